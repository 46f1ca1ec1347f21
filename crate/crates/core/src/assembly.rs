//! Discretization of a linear ODE into the `n x n` almost-banded system
//! `A u = f`: boundary rows on top, the truncated operator below.

use crate::error::{Error, Result};
use crate::operators::{band_add, band_mul, conv_op, diff_op, mult_op, BandedMatrix};
use crate::scalar::Real;
use crate::series::{boundary_row, chop, BoundaryFunctional, UltrasphericalSeries};

/// `a^N u^(N) + ... + a^1 u' + a^0 u = g` with `N` boundary functionals.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeProblem<T> {
    pub order: usize,
    /// `coeffs[lambda]` is the Chebyshev series of `a^lambda`.
    pub coeffs: Vec<UltrasphericalSeries<T>>,
    pub bcs: Vec<BoundaryFunctional<T>>,
    pub rhs: UltrasphericalSeries<T>,
}

impl<T: Real> OdeProblem<T> {
    pub fn validate(&self) -> Result<()> {
        let n = self.order;
        if n == 0 {
            return Err(Error::InvalidProblem("order must be positive".into()));
        }
        if self.coeffs.len() != n + 1 {
            return Err(Error::InvalidProblem(format!(
                "expected {} coefficient series, got {}",
                n + 1,
                self.coeffs.len()
            )));
        }
        if self.bcs.len() != n {
            return Err(Error::InvalidProblem(format!(
                "order {n} needs {n} boundary conditions, got {}",
                self.bcs.len()
            )));
        }
        if let Some(bc) = self.bcs.iter().find(|bc| bc.derivative_order as usize >= n) {
            return Err(Error::InvalidProblem(format!(
                "boundary derivative order {} not below the ODE order {n}",
                bc.derivative_order
            )));
        }
        if self.coeffs.iter().any(|a| a.lambda != 0) || self.rhs.lambda != 0 {
            return Err(Error::InvalidProblem(
                "coefficients and right-hand side must be Chebyshev series".into(),
            ));
        }
        let leading = max_abs(&self.coeffs[n].coeffs);
        if leading.is_zero() {
            return Err(Error::InvalidProblem(
                "leading coefficient a^N is identically zero".into(),
            ));
        }
        let overall = self
            .coeffs
            .iter()
            .map(|a| max_abs(&a.coeffs))
            .fold(T::zero(), T::max_of);
        if leading < T::epsilon() * overall {
            return Err(Error::InvalidProblem(
                "leading coefficient a^N is negligible relative to the others".into(),
            ));
        }
        Ok(())
    }

    /// Chops every coefficient series and the right-hand side at `tol`.
    pub fn chopped(&self, tol: &T) -> Self {
        let cut = |s: &UltrasphericalSeries<T>| {
            let k = chop(&s.coeffs, tol);
            UltrasphericalSeries::chebyshev(s.coeffs[..k].to_vec())
        };
        OdeProblem {
            order: self.order,
            coeffs: self.coeffs.iter().map(cut).collect(),
            bcs: self.bcs.clone(),
            rhs: cut(&self.rhs),
        }
    }

    fn degree(&self, lambda: usize) -> Option<usize> {
        self.coeffs[lambda].degree()
    }

    /// Lower bandwidth of the operator `L` (differentiation shifts bands up).
    pub fn operator_lower_bw(&self) -> usize {
        (0..=self.order)
            .filter_map(|l| self.degree(l).map(|d| d.saturating_sub(l)))
            .max()
            .unwrap_or(0)
    }

    /// Upper bandwidth of `L`: multiplication, differentiation and each conversion
    /// contribute `deg`, `lambda` and `2`.
    pub fn operator_upper_bw(&self) -> usize {
        let n = self.order;
        (0..=n)
            .filter_map(|l| self.degree(l).map(|d| d + l + 2 * (n - l)))
            .max()
            .unwrap_or(n)
    }
}

fn max_abs<T: Real>(v: &[T]) -> T {
    v.iter().map(|c| c.abs()).fold(T::zero(), T::max_of)
}

/// Number of subdiagonals of the assembled matrix: `N` plus the lower
/// bandwidth of `L`.
pub fn hessenberg_index<T: Real>(p: &OdeProblem<T>) -> usize {
    p.order + p.operator_lower_bw()
}

/// Banded matrix bordered by `N` dense rows on top.
#[derive(Debug, Clone, PartialEq)]
pub struct AlmostBandedMatrix<T> {
    n: usize,
    /// `N x n` boundary rows.
    dense_top: Vec<Vec<T>>,
    /// `(n - N) x n`; its row `i` is row `i + N` of the whole matrix.
    banded: BandedMatrix<T>,
    m: usize,
    upper: usize,
}

impl<T: Real> AlmostBandedMatrix<T> {
    /// `banded` is indexed by its own rows; its bandwidths are relative to them.
    pub fn new(dense_top: Vec<Vec<T>>, banded: BandedMatrix<T>) -> Result<Self> {
        let n = banded.cols();
        let num_dense = dense_top.len();
        if banded.rows() + num_dense != n || dense_top.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "{} dense rows + {} banded rows for {} columns",
                num_dense,
                banded.rows(),
                n
            )));
        }
        let m = (banded.lower_bw() + num_dense).max(num_dense.saturating_sub(1));
        let upper = banded.upper_bw().saturating_sub(num_dense);
        Ok(AlmostBandedMatrix {
            n,
            dense_top,
            banded,
            m,
            upper,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(Vec::new(), BandedMatrix::identity(n)).expect("square")
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn num_dense_rows(&self) -> usize {
        self.dense_top.len()
    }
    /// Lower bandwidth `m` of the whole matrix.
    pub fn lower_bw(&self) -> usize {
        self.m
    }
    /// Upper bandwidth of the banded rows.
    pub fn upper_bw(&self) -> usize {
        self.upper
    }
    pub fn dense_top(&self) -> &[Vec<T>] {
        &self.dense_top
    }
    pub fn banded_part(&self) -> &BandedMatrix<T> {
        &self.banded
    }

    pub fn entry(&self, i: usize, j: usize) -> T {
        let nd = self.dense_top.len();
        if i < nd {
            self.dense_top[i][j].clone()
        } else {
            self.banded.get(i - nd, j)
        }
    }

    /// Column range that may hold nonzeros in row `i`.
    pub fn row_support(&self, i: usize) -> std::ops::Range<usize> {
        let nd = self.dense_top.len();
        if i < nd {
            0..self.n
        } else {
            self.banded.row_range(i - nd)
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let mut acc = T::zero();
                for j in self.row_support(i) {
                    acc += self.entry(i, j) * x[j].clone();
                }
                acc
            })
            .collect()
    }

    pub fn mul_vec_transpose(&self, y: &[T]) -> Vec<T> {
        assert_eq!(y.len(), self.n);
        let mut out = vec![T::zero(); self.n];
        for i in 0..self.n {
            if y[i].is_zero() {
                continue;
            }
            for j in self.row_support(i) {
                out[j] += self.entry(i, j) * y[i].clone();
            }
        }
        out
    }

    /// Row sums of `|A|`.
    pub fn abs_row_sums(&self) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                let mut acc = T::zero();
                for j in self.row_support(i) {
                    acc += self.entry(i, j).abs();
                }
                acc
            })
            .collect()
    }

    pub fn norm_inf(&self) -> T {
        self.abs_row_sums().into_iter().fold(T::zero(), T::max_of)
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    /// Entrywise `|A|`, with the same structure.
    pub fn abs(&self) -> Self {
        self.map(|v| v.abs())
    }

    pub fn map<U: Real>(&self, f: impl Fn(&T) -> U) -> AlmostBandedMatrix<U> {
        AlmostBandedMatrix {
            n: self.n,
            dense_top: self
                .dense_top
                .iter()
                .map(|r| r.iter().map(&f).collect())
                .collect(),
            banded: self.banded.map(&f),
            m: self.m,
            upper: self.upper,
        }
    }
}

/// The truncated system together with its structural metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledSystem<T> {
    pub a: AlmostBandedMatrix<T>,
    pub f: Vec<T>,
    pub m: usize,
    /// Effective support length; equals `nnz_f` until a solution is known.
    pub k: usize,
    pub nnz_f: usize,
}

impl<T: Real> AssembledSystem<T> {
    /// Exact embedding into a higher precision.
    pub fn promote<X: Real>(&self) -> AssembledSystem<X> {
        let up = |v: &T| X::from_big(&v.to_big());
        AssembledSystem {
            a: self.a.map(up),
            f: self.f.iter().map(up).collect(),
            m: self.m,
            k: self.k,
            nnz_f: self.nnz_f,
        }
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }
}

/// `S_{to-1} ... S_from` applied on the left of `x` (`x` in the `C^(from)` basis).
fn convert_up<T: Real>(x: BandedMatrix<T>, from: usize, to: usize) -> BandedMatrix<T> {
    let mut out = x;
    for l in from..to {
        let s = conv_op::<T>(l as u32, out.rows(), out.rows());
        out = band_mul(&s, &out).expect("square conversion");
    }
    out
}

/// Truncated operator `L` as a `rows x cols` banded block.
///
/// All factors are built on a padded square so the returned block is free
/// of truncation artifacts and its entries do not depend on `rows`/`cols`.
pub fn operator_block<T: Real>(
    p: &OdeProblem<T>,
    rows: usize,
    cols: usize,
) -> Result<BandedMatrix<T>> {
    let order = p.order;
    let max_deg = p
        .coeffs
        .iter()
        .filter_map(|a| a.degree())
        .max()
        .unwrap_or(0);
    let slack = 3 * order + 2 * max_deg + 4;
    let big = rows.max(cols) + slack;

    let mut total: Option<BandedMatrix<T>> = None;
    for lambda in (0..=order).rev() {
        let a = &p.coeffs[lambda];
        if a.degree().is_none() {
            continue;
        }
        let m = mult_op(a, lambda as u32, big, big);
        let term = if lambda == 0 {
            m
        } else {
            let d = diff_op::<T>(lambda as u32, big, big)?;
            band_mul(&m, &d)?
        };
        let term = convert_up(term, lambda, order);
        total = Some(match total {
            None => term,
            Some(acc) => band_add(&acc, &term)?,
        });
    }
    let total =
        total.ok_or_else(|| Error::InvalidProblem("operator is identically zero".into()))?;
    Ok(total.reband(rows, cols, p.operator_lower_bw(), p.operator_upper_bw()))
}

/// Chebyshev coefficients of `g` converted to the `C^(N)` basis:
/// `S_{N-1} ... S_0 g`, computed once at full length.
pub fn converted_rhs<T: Real>(p: &OdeProblem<T>) -> Vec<T> {
    let g = &p.rhs.coeffs;
    let len = p.rhs.degree().map_or(0, |d| d + 1);
    let mut r: Vec<T> = g[..len].to_vec();
    for l in 0..p.order {
        let s = conv_op::<T>(l as u32, len, len);
        r = s.mul_vec(&r);
    }
    r
}

/// Smallest admissible truncation size for `p`.
pub fn min_size<T: Real>(p: &OdeProblem<T>) -> usize {
    p.order.max(hessenberg_index(p)) + 1
}

/// Builds the `n x n` system with boundary bordering.
pub fn assemble<T: Real>(p: &OdeProblem<T>, n: usize) -> Result<AssembledSystem<T>> {
    p.validate()?;
    let min = min_size(p);
    if n < min {
        return Err(Error::SizeTooSmall { n, min });
    }
    let order = p.order;
    let dense_top: Vec<Vec<T>> = p.bcs.iter().map(|bc| boundary_row(bc, n)).collect();
    let banded = operator_block(p, n - order, n)?;
    let a = AlmostBandedMatrix::new(dense_top, banded)?;

    let mut f: Vec<T> = p.bcs.iter().map(|bc| bc.target_value.clone()).collect();
    let r = converted_rhs(p);
    f.extend((0..n - order).map(|i| r.get(i).cloned().unwrap_or_else(T::zero)));
    let nnz_f = f.iter().rposition(|v| !v.is_zero()).map_or(0, |i| i + 1);
    let m = hessenberg_index(p);
    debug_assert_eq!(m, a.lower_bw());
    Ok(AssembledSystem {
        a,
        f,
        m,
        k: nnz_f,
        nnz_f,
    })
}

/// `k = max(last nonzero of f + 1, chop(u_hat, tol))`.
pub fn effective_support<T: Real>(f: &[T], u_hat: &[T], tol: &T) -> usize {
    let nnz_f = f.iter().rposition(|v| !v.is_zero()).map_or(0, |i| i + 1);
    nnz_f.max(chop(u_hat, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Endpoint;

    fn dirichlet(point: Endpoint, v: f64) -> BoundaryFunctional<f64> {
        BoundaryFunctional {
            point,
            derivative_order: 0,
            target_value: v,
        }
    }

    fn cheb(c: &[f64]) -> UltrasphericalSeries<f64> {
        UltrasphericalSeries::chebyshev(c.to_vec())
    }

    fn airy(mu: f64, left: f64, right: f64) -> OdeProblem<f64> {
        OdeProblem {
            order: 2,
            coeffs: vec![cheb(&[0.0, -1.0]), cheb(&[]), cheb(&[mu])],
            bcs: vec![
                dirichlet(Endpoint::Left, left),
                dirichlet(Endpoint::Right, right),
            ],
            rhs: cheb(&[]),
        }
    }

    /// Lowest nonzero subdiagonal found by a dense scan.
    fn scanned_m(a: &AlmostBandedMatrix<f64>) -> usize {
        let d = a.to_dense();
        let mut m = 0;
        for (i, row) in d.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if j < i && *v != 0.0 {
                    m = m.max(i - j);
                }
            }
        }
        m
    }

    #[test]
    fn airy_rows_and_rhs() {
        let p = airy(1e-2, 0.25, 0.125);
        let sys = assemble(&p, 8).unwrap();
        let d = sys.a.to_dense();
        assert_eq!(d[0], vec![1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0]);
        assert_eq!(d[1], vec![1.0; 8]);
        assert_eq!(sys.f, vec![0.25, 0.125, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(sys.nnz_f, 2);
        assert_eq!(sys.m, 3);
        assert_eq!(scanned_m(&sys.a), 3);
    }

    #[test]
    fn airy_operator_rows_match_dense_composition() {
        let mu = 1e-2;
        let p = airy(mu, 0.0, 0.0);
        let n = 12;
        let sys = assemble(&p, n).unwrap();
        let big = n + 10;
        let d2 = diff_op::<f64>(2, big, big).unwrap().to_dense();
        let s0 = conv_op::<f64>(0, big, big).to_dense();
        let s1 = conv_op::<f64>(1, big, big).to_dense();
        let x = crate::operators::jacobi_op::<f64>(0, big, big).to_dense();
        let mul = |a: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            (0..big)
                .map(|i| {
                    (0..big)
                        .map(|j| (0..big).map(|l| a[i][l] * b[l][j]).sum())
                        .collect()
                })
                .collect()
        };
        let s1s0x = mul(&s1, &mul(&s0, &x));
        for i in 0..n - 2 {
            for j in 0..n {
                let expect = mu * d2[i][j] - s1s0x[i][j];
                let got = sys.a.entry(i + 2, j);
                assert!((got - expect).abs() <= 1e-15, "({i},{j}) {got} vs {expect}");
            }
        }
    }

    #[test]
    fn hessenberg_index_examples() {
        let p = airy(1e-2, 0.0, 0.0);
        assert_eq!(hessenberg_index(&p), 3);

        let helmholtz = OdeProblem {
            order: 2,
            coeffs: vec![cheb(&[1.0]), cheb(&[]), cheb(&[1.0])],
            bcs: vec![
                dirichlet(Endpoint::Left, 0.0),
                dirichlet(Endpoint::Right, 0.0),
            ],
            rhs: cheb(&[1.0]),
        };
        assert_eq!(hessenberg_index(&helmholtz), 2);
        assert_eq!(scanned_m(&assemble(&helmholtz, 16).unwrap().a), 2);

        let first = OdeProblem {
            order: 1,
            coeffs: vec![cheb(&[1.0]), cheb(&[1.0])],
            bcs: vec![dirichlet(Endpoint::Left, 1.0)],
            rhs: cheb(&[]),
        };
        assert_eq!(hessenberg_index(&first), 1);
        assert_eq!(scanned_m(&assemble(&first, 16).unwrap().a), 1);
    }

    #[test]
    fn effective_support_examples() {
        let eps = f64::EPSILON;
        assert_eq!(
            effective_support(&[1.0, 2.0, 0.0, 0.0], &[5.0, 0.0, 0.0, 0.0], &eps),
            2
        );
        assert_eq!(effective_support(&[0.0; 4], &[0.0; 4], &eps), 0);
        assert_eq!(
            effective_support(&[1.0, 0.0, 0.0], &[1.0, 0.5, 0.25], &eps),
            3
        );
    }

    #[test]
    fn rejects_bad_problems() {
        let mut p = airy(1e-2, 0.0, 0.0);
        p.coeffs[2] = cheb(&[0.0]);
        assert!(matches!(assemble(&p, 16), Err(Error::InvalidProblem(_))));
        p.coeffs[2] = cheb(&[1e-30]);
        assert!(matches!(assemble(&p, 16), Err(Error::InvalidProblem(_))));
        let mut p = airy(1e-2, 0.0, 0.0);
        p.bcs.pop();
        assert!(assemble(&p, 16).is_err());
        let p = airy(1e-2, 0.0, 0.0);
        assert!(matches!(assemble(&p, 3), Err(Error::SizeTooSmall { .. })));
        let mut p = airy(1e-2, 0.0, 0.0);
        p.bcs[0].derivative_order = 2;
        assert!(assemble(&p, 16).is_err());
    }

    #[test]
    fn truncations_nest() {
        let p = OdeProblem {
            order: 2,
            coeffs: vec![
                cheb(&[0.5, -1.0, 0.25]),
                cheb(&[0.0, 0.3]),
                cheb(&[1.0, 0.0, 0.1]),
            ],
            bcs: vec![
                dirichlet(Endpoint::Left, 1.0),
                dirichlet(Endpoint::Right, 2.0),
            ],
            rhs: cheb(&[1.0, 0.5, 0.25, 0.125]),
        };
        let a = assemble(&p, 20).unwrap();
        let b = assemble(&p, 21).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                assert_eq!(a.a.entry(i, j).to_bits(), b.a.entry(i, j).to_bits());
            }
            assert_eq!(a.f[i].to_bits(), b.f[i].to_bits());
        }
        assert_eq!(a.nnz_f, b.nnz_f);
        assert!(a.nnz_f <= 2 + 4);
    }
}
