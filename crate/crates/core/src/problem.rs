//! Precision-independent problem descriptions and the plain-text problem file.
//!
//! A [`ProblemSpec`] keeps every number as a decimal expression so that it can
//! be instantiated at any precision with a single rounding per value.
//!
//! File format, one `key = value` per line, `#` starts a comment:
//!
//! ```text
//! order = 2
//! mu = 1e-2
//! coeff.0 = [0, -1]
//! coeff.2 = [mu]
//! bc.0 = (-1, 0, airy(-(1/mu)^(1/3)))
//! bc.1 = (1, 0, airy((1/mu)^(1/3)))
//! rhs = [0]
//! ```
//!
//! Missing `coeff.<l>` entries are zero series; a missing `rhs` is zero.

use std::collections::BTreeMap;
use std::fmt;

use crate::assembly::OdeProblem;
use crate::error::{Error, Result};
use crate::scalar::{parse_big, BigFloat, Real};
use crate::series::{BoundaryFunctional, Endpoint, UltrasphericalSeries};
use crate::special::{airy_ai_big, inverse_cube_root};

/// Bits used for intermediate values before rounding to the target level.
const GUARD_BITS: usize = 64;

/// A number in a problem description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValueExpr {
    /// Decimal literal, optionally signed.
    Number(String),
    /// `mu` or `-mu`.
    Mu { negative: bool },
    /// `airy((1/mu)^(1/3))` or `airy(-(1/mu)^(1/3))`.
    AiryScaled { negative: bool },
}

impl fmt::Display for ValueExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueExpr::Number(s) => f.write_str(s),
            ValueExpr::Mu { negative } => write!(f, "{}mu", if *negative { "-" } else { "" }),
            ValueExpr::AiryScaled { negative } => {
                write!(f, "airy({}(1/mu)^(1/3))", if *negative { "-" } else { "" })
            }
        }
    }
}

impl ValueExpr {
    pub fn number(s: impl Into<String>) -> Self {
        ValueExpr::Number(s.into())
    }

    fn parse(text: &str) -> std::result::Result<Self, String> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        match compact.as_str() {
            "mu" | "+mu" => return Ok(ValueExpr::Mu { negative: false }),
            "-mu" => return Ok(ValueExpr::Mu { negative: true }),
            "airy((1/mu)^(1/3))" => return Ok(ValueExpr::AiryScaled { negative: false }),
            "airy(-(1/mu)^(1/3))" => return Ok(ValueExpr::AiryScaled { negative: true }),
            _ => {}
        }
        // Validate at a modest width; the literal is re-parsed at the target precision.
        parse_big(&compact, 64).map_err(|_| format!("cannot parse value {text:?}"))?;
        Ok(ValueExpr::Number(compact))
    }

    fn uses_mu(&self) -> bool {
        !matches!(self, ValueExpr::Number(_))
    }

    /// Value at `bits` bits; `mu` must be supplied when referenced.
    pub fn evaluate(&self, mu: Option<&str>, bits: usize) -> Result<BigFloat> {
        let need_mu =
            || mu.ok_or_else(|| Error::InvalidProblem(format!("{self} used but mu is not set")));
        let work = bits + GUARD_BITS;
        match self {
            ValueExpr::Number(s) => parse_big(s, bits),
            ValueExpr::Mu { negative } => {
                let v = parse_big(need_mu()?, bits)?;
                Ok(if *negative { -v } else { v })
            }
            ValueExpr::AiryScaled { negative } => {
                let mu = parse_big(need_mu()?, work)?;
                if mu <= BigFloat::ZERO {
                    return Err(Error::InvalidProblem("mu must be positive".into()));
                }
                let s = inverse_cube_root(&mu, work);
                let x = if *negative { -s } else { s };
                Ok(
                    airy_ai_big(&x, bits.max(crate::scalar::DEFAULT_EXTENDED_BITS))?
                        .value
                        .with_precision(bits)
                        .value(),
                )
            }
        }
    }
}

/// Boundary condition with a symbolic target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundarySpec {
    pub point: Endpoint,
    pub derivative_order: u32,
    pub target: ValueExpr,
}

/// Problem description independent of the scalar type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemSpec {
    pub order: usize,
    pub mu: Option<String>,
    /// `coeffs[l]` is the Chebyshev series of `a^l`.
    pub coeffs: Vec<Vec<ValueExpr>>,
    pub bcs: Vec<BoundarySpec>,
    pub rhs: Vec<ValueExpr>,
    /// Known exact Chebyshev coefficients of the solution, if any.
    pub exact_solution: Option<Vec<ValueExpr>>,
}

impl ProblemSpec {
    /// Rounds every value to the precision of `T`.
    pub fn instantiate<T: Real>(&self) -> Result<OdeProblem<T>> {
        let bits = T::LEVEL.significand_bits();
        let mu = self.mu.as_deref();
        let value = |e: &ValueExpr| -> Result<T> { Ok(T::from_big(&e.evaluate(mu, bits)?)) };
        let series = |v: &[ValueExpr]| -> Result<UltrasphericalSeries<T>> {
            Ok(UltrasphericalSeries::chebyshev(
                v.iter().map(&value).collect::<Result<Vec<_>>>()?,
            ))
        };
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| series(c))
            .collect::<Result<Vec<_>>>()?;
        let bcs = self
            .bcs
            .iter()
            .map(|b| {
                Ok(BoundaryFunctional {
                    point: b.point,
                    derivative_order: b.derivative_order,
                    target_value: value(&b.target)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let p = OdeProblem {
            order: self.order,
            coeffs,
            bcs,
            rhs: series(&self.rhs)?,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn exact_solution<T: Real>(&self) -> Result<Option<Vec<T>>> {
        let bits = T::LEVEL.significand_bits();
        match &self.exact_solution {
            None => Ok(None),
            Some(v) => v
                .iter()
                .map(|e| Ok(T::from_big(&e.evaluate(self.mu.as_deref(), bits)?)))
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }

    /// Parses the problem file format described in the module docs.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                message: "expected `key = value`".into(),
            })?;
            let key = key.trim().to_string();
            if entries.contains_key(&key) {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("duplicate key `{key}`"),
                });
            }
            entries.insert(key, (line_no, value.trim().to_string()));
        }

        let err = |line: usize, message: String| Error::Parse { line, message };
        let (order_line, order_text) = entries
            .remove("order")
            .ok_or_else(|| err(0, "missing `order`".into()))?;
        let order: usize = order_text.parse().ok().filter(|&o| o >= 1).ok_or_else(|| {
            err(
                order_line,
                format!("order must be a positive integer, got {order_text:?}"),
            )
        })?;

        let mu = match entries.remove("mu") {
            Some((line, v)) => {
                let v = v.replace(char::is_whitespace, "");
                let parsed = parse_big(&v, 64).map_err(|_| err(line, format!("bad mu {v:?}")))?;
                if parsed <= BigFloat::ZERO {
                    return Err(err(line, "mu must be positive".into()));
                }
                Some(v)
            }
            None => None,
        };

        let mut coeffs = vec![Vec::new(); order + 1];
        let mut bcs: Vec<Option<BoundarySpec>> = vec![None; order];
        let mut rhs = Vec::new();
        let mut exact = None;
        for (key, (line, value)) in entries {
            if let Some(l) = key.strip_prefix("coeff.") {
                let l: usize = l.parse().ok().filter(|&l| l <= order).ok_or_else(|| {
                    err(line, format!("coefficient index must be in 0..={order}"))
                })?;
                coeffs[l] = parse_list(&value).map_err(|m| err(line, m))?;
            } else if let Some(i) = key.strip_prefix("bc.") {
                let i: usize =
                    i.parse().ok().filter(|&i| i < order).ok_or_else(|| {
                        err(line, format!("boundary index must be in 0..{order}"))
                    })?;
                bcs[i] = Some(parse_bc(&value).map_err(|m| err(line, m))?);
            } else if key == "rhs" {
                rhs = parse_list(&value).map_err(|m| err(line, m))?;
            } else if key == "exact" {
                exact = Some(parse_list(&value).map_err(|m| err(line, m))?);
            } else {
                return Err(err(line, format!("unknown key `{key}`")));
            }
        }
        let bcs = bcs
            .into_iter()
            .enumerate()
            .map(|(i, b)| b.ok_or_else(|| err(0, format!("missing `bc.{i}`"))))
            .collect::<Result<Vec<_>>>()?;

        let spec = ProblemSpec {
            order,
            mu,
            coeffs,
            bcs,
            rhs,
            exact_solution: exact,
        };
        let uses_mu = spec
            .coeffs
            .iter()
            .flatten()
            .chain(spec.rhs.iter())
            .chain(spec.bcs.iter().map(|b| &b.target))
            .any(ValueExpr::uses_mu);
        if uses_mu && spec.mu.is_none() {
            return Err(err(0, "`mu` is referenced but not set".into()));
        }
        // Structural checks (leading coefficient, derivative orders) at binary64.
        spec.instantiate::<f64>().map_err(|e| match e {
            Error::InvalidProblem(m) => err(0, m),
            other => other,
        })?;
        Ok(spec)
    }

    /// Serializes to the problem file format; `parse(to_file_string())` is the identity.
    pub fn to_file_string(&self) -> String {
        let list = |v: &[ValueExpr]| {
            format!(
                "[{}]",
                v.iter()
                    .map(|e| e.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        };
        let mut out = format!("order = {}\n", self.order);
        if let Some(mu) = &self.mu {
            out += &format!("mu = {mu}\n");
        }
        for (l, c) in self.coeffs.iter().enumerate() {
            if !c.is_empty() {
                out += &format!("coeff.{l} = {}\n", list(c));
            }
        }
        for (i, b) in self.bcs.iter().enumerate() {
            out += &format!(
                "bc.{i} = ({}, {}, {})\n",
                b.point.sign(),
                b.derivative_order,
                b.target
            );
        }
        if !self.rhs.is_empty() {
            out += &format!("rhs = {}\n", list(&self.rhs));
        }
        if let Some(e) = &self.exact_solution {
            out += &format!("exact = {}\n", list(e));
        }
        out
    }
}

/// Splits on commas that are not nested in parentheses.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

fn parse_list(text: &str) -> std::result::Result<Vec<ValueExpr>, String> {
    let inner = text
        .trim()
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| format!("expected `[...]`, got {text:?}"))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    split_top_level(inner)
        .into_iter()
        .map(ValueExpr::parse)
        .collect()
}

fn parse_bc(text: &str) -> std::result::Result<BoundarySpec, String> {
    let inner = text
        .trim()
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| format!("expected `(point, derivative, target)`, got {text:?}"))?;
    let parts = split_top_level(inner);
    if parts.len() != 3 {
        return Err(format!("expected 3 fields, got {}", parts.len()));
    }
    let point = match parts[0].trim() {
        "-1" | "-1.0" => Endpoint::Left,
        "1" | "+1" | "1.0" => Endpoint::Right,
        p => return Err(format!("boundary point must be -1 or 1, got {p:?}")),
    };
    let derivative_order: u32 = parts[1]
        .trim()
        .parse()
        .map_err(|_| format!("bad derivative order {:?}", parts[1].trim()))?;
    Ok(BoundarySpec {
        point,
        derivative_order,
        target: ValueExpr::parse(parts[2])?,
    })
}

fn nums(v: &[&str]) -> Vec<ValueExpr> {
    v.iter().map(|s| ValueExpr::number(*s)).collect()
}

fn dirichlet(point: Endpoint, target: ValueExpr) -> BoundarySpec {
    BoundarySpec {
        point,
        derivative_order: 0,
        target,
    }
}

/// `mu u'' - x u = 0` with `u(-1) = Ai(-(1/mu)^(1/3))`, `u(1) = Ai((1/mu)^(1/3))`.
/// The solution is `Ai((1/mu)^(1/3) x)`.
pub fn airy_problem(mu: &str) -> Result<ProblemSpec> {
    let mu = mu.trim().to_string();
    let parsed = parse_big(&mu, 64)?;
    if parsed <= BigFloat::ZERO {
        return Err(Error::InvalidProblem("mu must be positive".into()));
    }
    Ok(ProblemSpec {
        order: 2,
        mu: Some(mu),
        coeffs: vec![
            nums(&["0", "-1"]),
            Vec::new(),
            vec![ValueExpr::Mu { negative: false }],
        ],
        bcs: vec![
            dirichlet(Endpoint::Left, ValueExpr::AiryScaled { negative: true }),
            dirichlet(Endpoint::Right, ValueExpr::AiryScaled { negative: false }),
        ],
        rhs: Vec::new(),
        exact_solution: None,
    })
}

/// `u'' = 2`, `u(-1) = u(1) = 1`; solution `x^2 = (T_0 + T_2) / 2`.
pub fn parabola_problem() -> ProblemSpec {
    ProblemSpec {
        order: 2,
        mu: None,
        coeffs: vec![Vec::new(), Vec::new(), nums(&["1"])],
        bcs: vec![
            dirichlet(Endpoint::Left, ValueExpr::number("1")),
            dirichlet(Endpoint::Right, ValueExpr::number("1")),
        ],
        rhs: nums(&["2"]),
        exact_solution: Some(nums(&["0.5", "0", "0.5"])),
    }
}

/// Named problems used by the test suites and the demo.
pub fn corpus() -> Vec<(&'static str, ProblemSpec)> {
    let mut out = vec![
        ("airy-1e-2", airy_problem("1e-2").expect("valid")),
        ("parabola", parabola_problem()),
    ];
    // u'' + u = 1, u(+-1) = 0.
    out.push((
        "helmholtz",
        ProblemSpec {
            order: 2,
            mu: None,
            coeffs: vec![nums(&["1"]), Vec::new(), nums(&["1"])],
            bcs: vec![
                dirichlet(Endpoint::Left, ValueExpr::number("0")),
                dirichlet(Endpoint::Right, ValueExpr::number("0")),
            ],
            rhs: nums(&["1"]),
            exact_solution: None,
        },
    ));
    // u' + u = 0, u(-1) = 1.
    out.push((
        "decay",
        ProblemSpec {
            order: 1,
            mu: None,
            coeffs: vec![nums(&["1"]), nums(&["1"])],
            bcs: vec![dirichlet(Endpoint::Left, ValueExpr::number("1"))],
            rhs: Vec::new(),
            exact_solution: None,
        },
    ));
    // (2 + x) u'' + x^2 u' - u = T_1 + 0.5 T_3, u(-1) = 1, u'(1) = 0.
    out.push((
        "variable-neumann",
        ProblemSpec {
            order: 2,
            mu: None,
            coeffs: vec![nums(&["-1"]), nums(&["0.5", "0", "0.5"]), nums(&["2", "1"])],
            bcs: vec![
                dirichlet(Endpoint::Left, ValueExpr::number("1")),
                BoundarySpec {
                    point: Endpoint::Right,
                    derivative_order: 1,
                    target: ValueExpr::number("0"),
                },
            ],
            rhs: nums(&["0", "1", "0", "0.5"]),
            exact_solution: None,
        },
    ));
    // 0.05 u''' + x u' + u = 1, u(-1) = 0, u(1) = 1, u'(1) = 0.
    out.push((
        "third-order",
        ProblemSpec {
            order: 3,
            mu: None,
            coeffs: vec![nums(&["1"]), nums(&["0", "1"]), Vec::new(), nums(&["0.05"])],
            bcs: vec![
                dirichlet(Endpoint::Left, ValueExpr::number("0")),
                dirichlet(Endpoint::Right, ValueExpr::number("1")),
                BoundarySpec {
                    point: Endpoint::Right,
                    derivative_order: 1,
                    target: ValueExpr::number("0"),
                },
            ],
            rhs: nums(&["1"]),
            exact_solution: None,
        },
    ));
    out
}
