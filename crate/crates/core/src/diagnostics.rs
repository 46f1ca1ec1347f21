//! Error and conditioning experiments over a grid of truncation sizes, and
//! their CSV log.
//!
//! Every study solves at binary64 and measures against a software-float
//! reference whose width is taken from the configuration. Records for
//! different `n` are independent and are computed in parallel when the
//! `parallel` feature is on; output order always follows `n_values`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::assembly::{assemble, effective_support, hessenberg_index, min_size, OdeProblem};
use crate::error::{Error, Result};
use crate::linalg::conditioning::{conditioning_report, forward_error_bound_with};
use crate::linalg::qr::{qr_factor, DENSE_CUTOFF};
use crate::problem::ProblemSpec;
use crate::scalar::{Ext, PrecisionLevel, Real, DEFAULT_EXTENDED_BITS};
use crate::series::{chop, norm2, norm_inf};

/// Header of the CSV log.
pub const CSV_HEADER: &str =
    "n,total_error,rounding_error,cauchy_error,q_tail_sum,kappa_inf,kappa_2,cond_Eb,rule_of_thumb,k,m";

/// Reference widths the studies can be instantiated at.
pub const SUPPORTED_REFERENCE_BITS: [usize; 3] = [256, 512, 1024];

/// Reference size relative to the largest studied `n`.
pub const REFERENCE_SIZE_FACTOR: usize = 4;

/// Rational factor `num / den > 1` defining `n_dagger = ceil(n num / den)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CauchyFactor {
    num: u64,
    den: u64,
}

impl CauchyFactor {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num <= den {
            return Err(Error::InvalidProblem(format!(
                "Cauchy factor {num}/{den} must exceed 1"
            )));
        }
        Ok(CauchyFactor { num, den })
    }

    /// Parses a plain decimal such as `1.01` exactly.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidProblem(format!("bad Cauchy factor {s:?}"));
        let s = s.trim();
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if int.is_empty() && frac.is_empty()
            || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
            || frac.len() > 12
        {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let int: u64 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let frac_val: u64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad())?
        };
        let num = int
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac_val))
            .ok_or_else(bad)?;
        Self::new(num, den)
    }

    /// `ceil(n num / den)`.
    pub fn apply(&self, n: usize) -> usize {
        let n = n as u128;
        ((n * self.num as u128).div_ceil(self.den as u128)) as usize
    }
}

impl Default for CauchyFactor {
    fn default() -> Self {
        CauchyFactor { num: 101, den: 100 }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    /// Strictly increasing truncation sizes.
    pub n_values: Vec<usize>,
    pub mu_label: String,
    pub cauchy_factor: CauchyFactor,
    /// Working level (always binary64) and reference level.
    pub precisions: (PrecisionLevel, PrecisionLevel),
}

impl ExperimentConfig {
    pub fn new(problem: ProblemSpec, n_values: Vec<usize>) -> Self {
        let mu_label = problem.mu.clone().unwrap_or_default();
        ExperimentConfig {
            problem,
            n_values,
            mu_label,
            cauchy_factor: CauchyFactor::default(),
            precisions: (
                PrecisionLevel::Working64,
                PrecisionLevel::Extended {
                    bits: DEFAULT_EXTENDED_BITS,
                },
            ),
        }
    }

    pub fn with_reference_bits(mut self, bits: usize) -> Result<Self> {
        if !SUPPORTED_REFERENCE_BITS.contains(&bits) {
            return Err(Error::UnsupportedPrecision(format!(
                "reference precision must be one of {SUPPORTED_REFERENCE_BITS:?} bits, got {bits}"
            )));
        }
        self.precisions.1 = PrecisionLevel::Extended { bits };
        Ok(self)
    }

    fn validate(&self, p: &OdeProblem<f64>) -> Result<()> {
        if self.n_values.is_empty() {
            return Err(Error::InvalidProblem("no truncation sizes given".into()));
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidProblem(
                "truncation sizes must be strictly increasing".into(),
            ));
        }
        let min = min_size(p);
        if self.n_values[0] < min {
            return Err(Error::SizeTooSmall {
                n: self.n_values[0],
                min,
            });
        }
        if self.precisions.0 != PrecisionLevel::Working64 {
            return Err(Error::UnsupportedPrecision(
                "the working level must be binary64".into(),
            ));
        }
        Ok(())
    }

    fn n_max(&self) -> usize {
        *self.n_values.last().expect("validated")
    }

    fn reference_bits(&self) -> usize {
        self.precisions.1.significand_bits()
    }
}

/// One row of an experiment log; `None` is a quantity the study did not measure.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnosticsRecord {
    pub n: usize,
    pub total_error: Option<f64>,
    pub rounding_error: Option<f64>,
    pub cauchy_error: Option<f64>,
    pub q_tail_sum: Option<f64>,
    pub kappa_inf: Option<f64>,
    pub kappa_2: Option<f64>,
    pub cond_eb: Option<f64>,
    pub rule_of_thumb: Option<f64>,
    pub k: usize,
    pub m: usize,
}

/// `ceil(n_min factor^i)` for `i = 0, 1, ...` up to `n_max`, deduplicated,
/// with `n_max` appended if the progression skips it.
pub fn geometric_grid(n_min: usize, n_max: usize, factor: f64) -> Result<Vec<usize>> {
    if n_min == 0 || n_max < n_min || factor.is_nan() || factor <= 1.0 {
        return Err(Error::InvalidProblem(format!(
            "bad grid: n_min = {n_min}, n_max = {n_max}, factor = {factor}"
        )));
    }
    let mut out: Vec<usize> = Vec::new();
    let mut x = n_min as f64;
    while x.ceil() as usize <= n_max {
        let n = x.ceil() as usize;
        if out.last() != Some(&n) {
            out.push(n);
        }
        x *= factor;
    }
    if out.last() != Some(&n_max) {
        out.push(n_max);
    }
    Ok(out)
}

fn map_sizes<R: Send>(
    ns: &[usize],
    f: impl Fn(usize) -> Result<R> + Sync + Send,
) -> Result<Vec<R>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        ns.par_iter().map(|&n| f(n)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        ns.iter().map(|&n| f(n)).collect()
    }
}

/// Solves the problem at size `n`.
pub fn solve_at<T: Real>(p: &OdeProblem<T>, n: usize) -> Result<Vec<T>> {
    let sys = assemble(p, n)?;
    qr_factor(&sys.a)?.solve(&sys.f)
}

/// `k` from the binary64 solve at the largest size, shared by all records.
pub fn frozen_k(p: &OdeProblem<f64>, n_max: usize) -> Result<usize> {
    let sys = assemble(p, n_max)?;
    let u = qr_factor(&sys.a)?.solve(&sys.f)?;
    Ok(effective_support(&sys.f, &u, &f64::EPSILON))
}

/// Instantiates `$body` with `$X` bound to the software float of `$bits` bits.
macro_rules! with_reference {
    ($bits:expr, $X:ident => $body:expr) => {
        match $bits {
            256 => {
                type $X = Ext<256>;
                $body
            }
            512 => {
                type $X = Ext<512>;
                $body
            }
            1024 => {
                type $X = Ext<1024>;
                $body
            }
            b => Err(Error::UnsupportedPrecision(format!(
                "reference precision must be one of {SUPPORTED_REFERENCE_BITS:?} bits, got {b}"
            ))),
        }
    };
}

/// Reference Chebyshev coefficients of the exact solution: the closed form
/// when the problem has one, otherwise a large-`n` solve of the exactly
/// specified problem at the reference precision, chopped.
pub fn reference_solution<X: Real>(spec: &ProblemSpec, n_ref: usize) -> Result<Vec<X>> {
    if let Some(exact) = spec.exact_solution::<X>()? {
        return Ok(exact);
    }
    let p = spec.instantiate::<X>()?;
    let u = solve_at(&p, n_ref)?;
    let len = chop(&u, &X::epsilon());
    if len + hessenberg_index(&p) >= n_ref {
        return Err(Error::MissingReference(format!(
            "solution not resolved at n = {n_ref} (chop length {len})"
        )));
    }
    Ok(u[..len].to_vec())
}

fn promoted_distance<X: Real>(reference: &[X], u: &[f64]) -> X {
    let len = reference.len().max(u.len());
    let diff: Vec<X> = (0..len)
        .map(|i| {
            let r = reference.get(i).cloned().unwrap_or_else(X::zero);
            let v = u.get(i).map_or_else(X::zero, |&v| X::from_f64(v));
            r - v
        })
        .collect();
    norm2(&diff)
}

/// Weighted norm of `u - Phi_n u_hat` for each `n`.
pub fn total_error_study(cfg: &ExperimentConfig) -> Result<Vec<DiagnosticsRecord>> {
    let p = cfg.problem.instantiate::<f64>()?;
    cfg.validate(&p)?;
    with_reference!(cfg.reference_bits(), X => total_error_at::<X>(cfg, &p))
}

fn total_error_at<X: Real>(
    cfg: &ExperimentConfig,
    p: &OdeProblem<f64>,
) -> Result<Vec<DiagnosticsRecord>> {
    let reference = reference_solution::<X>(&cfg.problem, REFERENCE_SIZE_FACTOR * cfg.n_max())?;
    let k = frozen_k(p, cfg.n_max())?;
    let m = hessenberg_index(p);
    map_sizes(&cfg.n_values, |n| {
        let u = solve_at(p, n)?;
        Ok(DiagnosticsRecord {
            n,
            total_error: Some(promoted_distance(&reference, &u).to_f64()),
            k,
            m,
            ..Default::default()
        })
    })
}

/// `||u - u_hat||_2` where `u` solves the same (promoted) system at the
/// reference precision.
fn rounding_error_at<X: Real>(p: &OdeProblem<f64>, n: usize) -> Result<(Vec<f64>, Vec<X>, f64)> {
    let sys = assemble(p, n)?;
    let u_hat = qr_factor(&sys.a)?.solve(&sys.f)?;
    let hi = sys.promote::<X>();
    let u = qr_factor(&hi.a)?.solve(&hi.f)?;
    let err = promoted_distance(&u, &u_hat).to_f64();
    Ok((u_hat, u, err))
}

pub fn rounding_error_study(cfg: &ExperimentConfig) -> Result<Vec<DiagnosticsRecord>> {
    let p = cfg.problem.instantiate::<f64>()?;
    cfg.validate(&p)?;
    let k = frozen_k(&p, cfg.n_max())?;
    let m = hessenberg_index(&p);
    with_reference!(cfg.reference_bits(), X => map_sizes(&cfg.n_values, |n| {
        let (_, _, err) = rounding_error_at::<X>(&p, n)?;
        Ok(DiagnosticsRecord {
            n,
            rounding_error: Some(err),
            k,
            m,
            ..Default::default()
        })
    }))
}

/// `||u_hat_n - u_hat_{n_dagger}(1:n)||_2`, both at binary64.
pub fn cauchy_error(p: &OdeProblem<f64>, n: usize, factor: CauchyFactor) -> Result<f64> {
    let a = solve_at(p, n)?;
    let b = solve_at(p, factor.apply(n))?;
    let diff: Vec<f64> = a.iter().zip(&b[..n]).map(|(x, y)| x - y).collect();
    Ok(norm2(&diff))
}

pub fn cauchy_error_study(cfg: &ExperimentConfig) -> Result<Vec<DiagnosticsRecord>> {
    let p = cfg.problem.instantiate::<f64>()?;
    cfg.validate(&p)?;
    let k = frozen_k(&p, cfg.n_max())?;
    let m = hessenberg_index(&p);
    map_sizes(&cfg.n_values, |n| {
        Ok(DiagnosticsRecord {
            n,
            cauchy_error: Some(cauchy_error(&p, n, cfg.cauchy_factor)?),
            k,
            m,
            ..Default::default()
        })
    })
}

/// Result of [`q_tail_study`].
#[derive(Debug, Clone, PartialEq)]
pub struct QTailStudy {
    pub records: Vec<DiagnosticsRecord>,
    /// Largest measured ratio `||Q(j, n-m+1:n)|| / ||Q(j, n-m:n)||` over
    /// `j <= k` and all `n`; `None` if every tail underflowed to zero.
    pub sigma: Option<f64>,
}

/// `sum_{j<k} ||Q_n(j, n-m+1:n)||_2` and the tail ratio for one `n`.
pub fn q_tail(p: &OdeProblem<f64>, n: usize, k: usize) -> Result<(f64, Option<f64>)> {
    if n > DENSE_CUTOFF {
        return Err(Error::DenseCutoff {
            n,
            cutoff: DENSE_CUTOFF,
        });
    }
    let sys = assemble(p, n)?;
    let qr = qr_factor(&sys.a)?;
    let m = sys.m;
    let mut sum = 0.0;
    let mut sigma: Option<f64> = None;
    for j in 0..k.min(n) {
        let row = qr.q_row(j);
        let tail = norm2(&row[n - m..]);
        let wider = norm2(&row[n - m - 1..]);
        sum += tail;
        if wider > 0.0 {
            let r = tail / wider;
            sigma = Some(sigma.map_or(r, |s| s.max(r)));
        }
    }
    Ok((sum, sigma))
}

pub fn q_tail_study(cfg: &ExperimentConfig) -> Result<QTailStudy> {
    let p = cfg.problem.instantiate::<f64>()?;
    cfg.validate(&p)?;
    let k = frozen_k(&p, cfg.n_max())?;
    let m = hessenberg_index(&p);
    let rows = map_sizes(&cfg.n_values, |n| {
        let (sum, sigma) = q_tail(&p, n, k)?;
        Ok((
            DiagnosticsRecord {
                n,
                q_tail_sum: Some(sum),
                k,
                m,
                ..Default::default()
            },
            sigma,
        ))
    })?;
    let sigma = rows
        .iter()
        .filter_map(|(_, s)| *s)
        .fold(None, |acc: Option<f64>, s| {
            Some(acc.map_or(s, |a| a.max(s)))
        });
    Ok(QTailStudy {
        records: rows.into_iter().map(|(r, _)| r).collect(),
        sigma,
    })
}

/// `kappa_inf`, `kappa_2`, `cond_Eb` with `E = |A|`, `b = |f|`, the rule of
/// thumb `cond_Eb eps_mach`, and the measured rounding error.
pub fn conditioning_study(cfg: &ExperimentConfig) -> Result<Vec<DiagnosticsRecord>> {
    let p = cfg.problem.instantiate::<f64>()?;
    cfg.validate(&p)?;
    if cfg.n_max() > DENSE_CUTOFF {
        return Err(Error::DenseCutoff {
            n: cfg.n_max(),
            cutoff: DENSE_CUTOFF,
        });
    }
    let k = frozen_k(&p, cfg.n_max())?;
    let m = hessenberg_index(&p);
    with_reference!(cfg.reference_bits(), X => map_sizes(&cfg.n_values, |n| {
        let sys = assemble(&p, n)?;
        let (u_hat, _, eps_s) = rounding_error_at::<X>(&p, n)?;
        let report = conditioning_report(&sys.a, &sys.f, &u_hat, k.min(n), m)?;
        Ok(DiagnosticsRecord {
            n,
            rounding_error: Some(eps_s),
            kappa_inf: Some(report.kappa_inf),
            kappa_2: Some(report.kappa_2),
            cond_eb: Some(report.cond_eb),
            rule_of_thumb: Some(report.rule_of_thumb),
            k,
            m,
            ..Default::default()
        })
    }))
}

/// Measured forward error against the forward error bound for one `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub n: usize,
    pub k: usize,
    /// `||u - u_hat||_inf`, `u` from the promoted system at the reference precision.
    pub measured: f64,
    pub bound: f64,
}

/// Checks the forward error bound with `E = |A|`, `b = |f|`, `eps = eps_mach`,
/// the exact solution of the system in place of `u` and `k` from its chop
/// length at this `n`.
pub fn forward_bound_check(spec: &ProblemSpec, n: usize) -> Result<BoundCheck> {
    let p = spec.instantiate::<f64>()?;
    let sys = assemble(&p, n)?;
    let qr = qr_factor(&sys.a)?;
    let u_hat = qr.solve(&sys.f)?;
    let hi = sys.promote::<Ext<256>>();
    let u_ext = qr_factor(&hi.a)?.solve(&hi.f)?;
    let u: Vec<f64> = u_ext.iter().map(Real::to_f64).collect();
    let diff: Vec<Ext<256>> = u_ext
        .iter()
        .zip(&u_hat)
        .map(|(a, &b)| a.clone() - Ext::<256>::from_f64(b))
        .collect();
    let measured = norm_inf(&diff).to_f64();
    let k = effective_support(&sys.f, &u, &f64::EPSILON);
    let b: Vec<f64> = sys.f.iter().map(|v| v.abs()).collect();
    let bound = forward_error_bound_with(&qr, &sys.a.abs(), &b, &u, k, sys.m, &f64::EPSILON)?;
    Ok(BoundCheck {
        n,
        k,
        measured,
        bound,
    })
}

/// Components of the total error at one `n`, all as weighted norms.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorDecomposition {
    pub n: usize,
    /// `||u - Phi_n u_hat||`.
    pub total: f64,
    /// `||u_n - u_hat||`, `u_n` the exact solution of the binary64 system.
    pub rounding: f64,
    /// `||u - Phi_n u_n||`: representation plus truncation error.
    pub representation_and_truncation: f64,
    /// Reference coefficient mass beyond index `n`.
    pub truncation: f64,
}

pub fn error_decomposition(
    spec: &ProblemSpec,
    n_values: &[usize],
) -> Result<Vec<ErrorDecomposition>> {
    type X = Ext<256>;
    let p = spec.instantiate::<f64>()?;
    let n_max = *n_values
        .iter()
        .max()
        .ok_or_else(|| Error::InvalidProblem("no truncation sizes given".into()))?;
    let reference = reference_solution::<X>(spec, REFERENCE_SIZE_FACTOR * n_max)?;
    map_sizes(n_values, |n| {
        let (u_hat, u_n, rounding) = rounding_error_at::<X>(&p, n)?;
        let total = promoted_distance(&reference, &u_hat).to_f64();
        let len = reference.len().max(n);
        let ft: Vec<X> = (0..len)
            .map(|i| {
                reference.get(i).cloned().unwrap_or_else(X::zero)
                    - u_n.get(i).cloned().unwrap_or_else(X::zero)
            })
            .collect();
        let tail = if reference.len() > n {
            norm2(&reference[n..]).to_f64()
        } else {
            0.0
        };
        Ok(ErrorDecomposition {
            n,
            total,
            rounding,
            representation_and_truncation: norm2(&ft).to_f64(),
            truncation: tail,
        })
    })
}

fn format_field(out: &mut String, v: Option<f64>) {
    match v {
        None => {}
        Some(0.0) => out.push('0'),
        Some(x) => {
            let _ = write!(out, "{x:e}");
        }
    }
}

/// One CSV line (without newline).
pub fn format_record(r: &DiagnosticsRecord) -> String {
    let mut line = format!("{},", r.n);
    for v in [
        r.total_error,
        r.rounding_error,
        r.cauchy_error,
        r.q_tail_sum,
        r.kappa_inf,
        r.kappa_2,
        r.cond_eb,
        r.rule_of_thumb,
    ] {
        format_field(&mut line, v);
        line.push(',');
    }
    let _ = write!(line, "{},{}", r.k, r.m);
    line
}

pub fn write_csv_to(records: &[DiagnosticsRecord], mut w: impl Write) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(w, "{}", format_record(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(records: &[DiagnosticsRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv_to(records, std::io::BufWriter::new(file))
}

pub fn read_csv_from(r: impl BufRead) -> Result<Vec<DiagnosticsRecord>> {
    let mut lines = r.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim_end() != CSV_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("unexpected header {header:?}"),
        });
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let line_no = i + 2;
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        if fields.len() != 11 {
            return Err(err(format!("expected 11 fields, got {}", fields.len())));
        }
        let float = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse::<f64>()
                    .map(Some)
                    .map_err(|_| err(format!("bad number {s:?}")))
            }
        };
        let int = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| err(format!("bad integer {s:?}")))
        };
        out.push(DiagnosticsRecord {
            n: int(fields[0])?,
            total_error: float(fields[1])?,
            rounding_error: float(fields[2])?,
            cauchy_error: float(fields[3])?,
            q_tail_sum: float(fields[4])?,
            kappa_inf: float(fields[5])?,
            kappa_2: float(fields[6])?,
            cond_eb: float(fields[7])?,
            rule_of_thumb: float(fields[8])?,
            k: int(fields[9])?,
            m: int(fields[10])?,
        });
    }
    Ok(out)
}

pub fn read_csv(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    let file = std::fs::File::open(path)?;
    read_csv_from(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{airy_problem, corpus, parabola_problem};

    #[test]
    fn cauchy_factor() {
        let f = CauchyFactor::default();
        assert_eq!(f.apply(200), 202);
        assert_eq!(f.apply(100), 101);
        assert_eq!(f.apply(101), 103);
        assert_eq!(CauchyFactor::parse("1.01").unwrap(), f);
        assert_eq!(CauchyFactor::parse("2").unwrap().apply(7), 14);
        for bad in ["1", "0.99", "abc", "", "1.-1"] {
            assert!(CauchyFactor::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn grid() {
        let g = geometric_grid(10, 30, 1.2).unwrap();
        assert_eq!(g, vec![10, 12, 15, 18, 21, 25, 30]);
        assert_eq!(geometric_grid(5, 5, 2.0).unwrap(), vec![5]);
        assert!(geometric_grid(10, 5, 2.0).is_err());
        assert!(geometric_grid(10, 50, 1.0).is_err());
    }

    #[test]
    fn csv_format() {
        let mut buf = Vec::new();
        write_csv_to(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
        let r = DiagnosticsRecord {
            n: 200,
            cauchy_error: Some(0.0),
            total_error: Some(1.25e-15),
            kappa_inf: Some(f64::INFINITY),
            k: 40,
            m: 3,
            ..Default::default()
        };
        assert_eq!(format_record(&r), "200,1.25e-15,,0,,inf,,,,40,3");
    }

    #[test]
    fn csv_round_trip() {
        let records: Vec<DiagnosticsRecord> = (0..50)
            .map(|i| {
                let x = (i as f64 * 0.731).sin() * 10f64.powi(-(i as i32) * 7);
                DiagnosticsRecord {
                    n: 10 + i,
                    total_error: Some(x.abs()),
                    rounding_error: if i % 3 == 0 {
                        None
                    } else {
                        Some(x.abs() / 3.0)
                    },
                    cauchy_error: Some(if i > 40 {
                        0.0
                    } else {
                        f64::from_bits(i as u64 + 1)
                    }),
                    q_tail_sum: Some(1.0 / 3.0),
                    kappa_inf: Some(1e300),
                    kappa_2: None,
                    cond_eb: Some(std::f64::consts::PI),
                    rule_of_thumb: Some(f64::MIN_POSITIVE),
                    k: i,
                    m: 3,
                }
            })
            .collect();
        let mut buf = Vec::new();
        write_csv_to(&records, &mut buf).unwrap();
        let back = read_csv_from(buf.as_slice()).unwrap();
        assert_eq!(back.len(), records.len());
        for (a, b) in back.iter().zip(&records) {
            assert_eq!(format_record(a), format_record(b));
            assert_eq!(
                a.cauchy_error.map(f64::to_bits),
                b.cauchy_error.map(f64::to_bits)
            );
        }
        assert_eq!(back, records);
        assert!(read_csv_from("n,foo\n".as_bytes()).is_err());
    }

    #[test]
    fn parabola_total_error() {
        let cfg = ExperimentConfig::new(parabola_problem(), vec![4, 8, 16, 64]);
        for r in total_error_study(&cfg).unwrap() {
            assert!(r.total_error.unwrap() <= 10.0 * f64::EPSILON, "{r:?}");
        }
    }

    #[test]
    fn zero_problem_has_zero_rounding_error() {
        let mut spec = parabola_problem();
        spec.rhs.clear();
        for bc in &mut spec.bcs {
            bc.target = crate::problem::ValueExpr::number("0");
        }
        spec.exact_solution = None;
        let cfg = ExperimentConfig::new(spec, vec![8, 16]);
        for r in rounding_error_study(&cfg).unwrap() {
            assert_eq!(r.rounding_error, Some(0.0));
        }
    }

    #[test]
    fn studies_validate_config() {
        let spec = parabola_problem();
        assert!(total_error_study(&ExperimentConfig::new(spec.clone(), vec![])).is_err());
        assert!(total_error_study(&ExperimentConfig::new(spec.clone(), vec![8, 8])).is_err());
        assert!(matches!(
            total_error_study(&ExperimentConfig::new(spec.clone(), vec![2, 8])),
            Err(Error::SizeTooSmall { .. })
        ));
        assert!(ExperimentConfig::new(spec, vec![8])
            .with_reference_bits(300)
            .is_err());
    }

    #[test]
    fn decomposition_triangle_inequality() {
        let spec = airy_problem("1e-2").unwrap();
        for d in error_decomposition(&spec, &[20, 40, 80]).unwrap() {
            assert!(
                d.total >= d.rounding - d.representation_and_truncation - 1e-70,
                "{d:?}"
            );
            assert!(
                d.total <= d.rounding + d.representation_and_truncation + 1e-70,
                "{d:?}"
            );
        }
    }

    #[test]
    fn identity_like_q_tail() {
        // First-order problem with m = 1: tails are finite and sigma is measured.
        let (_, spec) = corpus().into_iter().find(|(n, _)| *n == "decay").unwrap();
        let p = spec.instantiate::<f64>().unwrap();
        let (sum, sigma) = q_tail(&p, 30, 5).unwrap();
        assert!(sum.is_finite());
        assert!(sigma.is_none_or(|s| s <= 1.0));
    }
}
