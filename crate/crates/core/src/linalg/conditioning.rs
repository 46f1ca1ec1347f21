//! Condition numbers from columns of `B = A^{-1}`.
//!
//! Every quantity here is of the form `|B| w` for a nonnegative weight vector
//! `w`, so `B` is never stored: columns are produced one at a time by the QR
//! solver and folded into row accumulators.

use crate::assembly::AlmostBandedMatrix;
use crate::error::{Error, Result};
use crate::linalg::qr::{qr_factor, QrFactorization, DENSE_CUTOFF};
use crate::scalar::Real;
use crate::series::{norm2, norm_inf};

/// Stopping tolerance of the power iterations for `kappa_2`.
pub const POWER_TOLERANCE: f64 = 1e-8;
/// Iteration cap of the power iterations.
pub const POWER_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningReport {
    pub kappa_inf: f64,
    pub kappa_2: f64,
    pub cond_eb: f64,
    pub rule_of_thumb: f64,
    pub k: usize,
    pub m: usize,
}

fn check_cutoff(n: usize) -> Result<()> {
    if n > DENSE_CUTOFF {
        Err(Error::DenseCutoff {
            n,
            cutoff: DENSE_CUTOFF,
        })
    } else {
        Ok(())
    }
}

fn inverse_column<T: Real>(qr: &QrFactorization<T>, j: usize) -> Result<Vec<T>> {
    let mut e = vec![T::zero(); qr.n()];
    e[j] = T::one();
    qr.solve(&e)
}

/// `|B| w_r` for each weight vector `w_r`; columns where every weight is zero
/// are never formed.
pub fn abs_inverse_times<T: Real>(
    qr: &QrFactorization<T>,
    weights: &[Vec<T>],
) -> Result<Vec<Vec<T>>> {
    let n = qr.n();
    let cols: Vec<usize> = (0..n)
        .filter(|&j| weights.iter().any(|w| !w[j].is_zero()))
        .collect();
    let fold = |range: &[usize]| -> Result<Vec<Vec<T>>> {
        let mut acc = vec![vec![T::zero(); n]; weights.len()];
        for &j in range {
            let b = inverse_column(qr, j)?;
            for (w, out) in weights.iter().zip(acc.iter_mut()) {
                if w[j].is_zero() {
                    continue;
                }
                for (o, bi) in out.iter_mut().zip(&b) {
                    *o += bi.abs() * w[j].clone();
                }
            }
        }
        Ok(acc)
    };
    // Fixed-size chunks combined in order keep the result independent of the
    // thread count.
    let chunk = 64;
    let chunks: Vec<&[usize]> = cols.chunks(chunk).collect();
    #[cfg(feature = "parallel")]
    let partials: Vec<Result<Vec<Vec<T>>>> = {
        use rayon::prelude::*;
        chunks.par_iter().map(|c| fold(c)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<Result<Vec<Vec<T>>>> = chunks.iter().map(|c| fold(c)).collect();

    let mut total = vec![vec![T::zero(); n]; weights.len()];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part?) {
            for (a, b) in t.iter_mut().zip(p) {
                *a += b;
            }
        }
    }
    Ok(total)
}

/// `||A||_inf ||A^{-1}||_inf`; infinite for a singular `A`.
pub fn kappa_inf<T: Real>(a: &AlmostBandedMatrix<T>) -> Result<T> {
    check_cutoff(a.n())?;
    let qr = match qr_factor(a) {
        Ok(qr) => qr,
        Err(Error::ZeroPivot { .. }) => return Ok(T::from_f64(f64::INFINITY)),
        Err(e) => return Err(e),
    };
    kappa_inf_with(a, &qr)
}

fn kappa_inf_with<T: Real>(a: &AlmostBandedMatrix<T>, qr: &QrFactorization<T>) -> Result<T> {
    let ones = vec![T::one(); a.n()];
    let rows = abs_inverse_times(qr, &[ones])?;
    Ok(a.norm_inf() * norm_inf(&rows[0]))
}

/// Largest eigenvalue of a symmetric positive semidefinite operator.
fn power_iteration<T: Real>(n: usize, apply: impl Fn(&[T]) -> Result<Vec<T>>) -> Result<T> {
    // Deterministic start with no particular symmetry.
    let mut x: Vec<T> = (0..n)
        .map(|i| T::from_f64(1.0 + ((i * 7919) % 101) as f64 / 101.0))
        .collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v = v.clone() / nx.clone());
    let tol = T::from_f64(POWER_TOLERANCE);
    let mut estimate = T::zero();
    for _ in 0..POWER_MAX_ITERATIONS {
        let y = apply(&x)?;
        let ny = norm2(&y);
        if ny.is_zero() {
            return Ok(T::zero());
        }
        let converged = (ny.clone() - estimate.clone()).abs() <= tol.clone() * ny.clone();
        estimate = ny.clone();
        x = y.into_iter().map(|v| v / ny.clone()).collect();
        if converged {
            break;
        }
    }
    Ok(estimate)
}

/// `||A||_2 ||A^{-1}||_2` by power iteration on `A^T A` and `(A^T A)^{-1}`;
/// infinite for a singular `A`.
pub fn kappa_2<T: Real>(a: &AlmostBandedMatrix<T>) -> Result<T> {
    check_cutoff(a.n())?;
    let qr = match qr_factor(a) {
        Ok(qr) => qr,
        Err(Error::ZeroPivot { .. }) => return Ok(T::from_f64(f64::INFINITY)),
        Err(e) => return Err(e),
    };
    kappa_2_with(a, &qr)
}

fn kappa_2_with<T: Real>(a: &AlmostBandedMatrix<T>, qr: &QrFactorization<T>) -> Result<T> {
    let n = a.n();
    let big = power_iteration(n, |x| Ok(a.mul_vec_transpose(&a.mul_vec(x))))?;
    let small_inv = power_iteration(n, |x| qr.solve(&qr.solve_transpose(x)?))?;
    Ok((big * small_inv).sqrt())
}

fn check_partition<T: Real>(n: usize, b: &[T], u: &[T], k: usize) -> Result<()> {
    if b.len() != n || u.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "b has length {}, u has length {}, n = {n}",
            b.len(),
            u.len()
        )));
    }
    if k > n {
        return Err(Error::DimensionMismatch(format!("k = {k} exceeds n = {n}")));
    }
    if let Some(i) = b[k..].iter().position(|v| !v.is_zero()) {
        return Err(Error::InvalidProblem(format!(
            "b must vanish beyond k = {k}; b[{}] is nonzero",
            k + i
        )));
    }
    Ok(())
}

/// Weight vector `w` with `|B| w = |B_1| b_1 + |B~_1| E_11 |u_1|`.
fn effective_weights<T: Real>(
    e: &AlmostBandedMatrix<T>,
    b: &[T],
    u: &[T],
    k: usize,
    m: usize,
) -> Vec<T> {
    let n = e.n();
    let mut w = vec![T::zero(); n];
    for (wi, bi) in w.iter_mut().zip(&b[..k]) {
        *wi = bi.abs();
    }
    for (i, wi) in w.iter_mut().enumerate().take(k + m) {
        let support = e.row_support(i);
        for j in support.start..support.end.min(k) {
            *wi += e.entry(i, j).abs() * u[j].abs();
        }
    }
    w
}

/// `|| |B_1| b_1 + |B~_1| E_11 |u_1| ||_inf`, using only the first `k + m`
/// columns of `A^{-1}` (all of them when `k + m > n`).
fn effective_numerator<T: Real>(
    qr: &QrFactorization<T>,
    e: &AlmostBandedMatrix<T>,
    b: &[T],
    u: &[T],
    k: usize,
    m: usize,
) -> Result<T> {
    let w = effective_weights(e, b, u, k, m);
    let rows = abs_inverse_times(qr, &[w])?;
    Ok(norm_inf(&rows[0]))
}

/// Effective componentwise condition number with `E` an `m`-Hessenberg
/// majorant of the backward error and `b_2 = 0`.
pub fn cond_componentwise<T: Real>(
    a: &AlmostBandedMatrix<T>,
    e: &AlmostBandedMatrix<T>,
    b: &[T],
    u: &[T],
    k: usize,
    m: usize,
) -> Result<T> {
    check_cutoff(a.n())?;
    check_partition(a.n(), b, u, k)?;
    let qr = qr_factor(a)?;
    cond_with(&qr, e, b, u, k, m)
}

fn cond_with<T: Real>(
    qr: &QrFactorization<T>,
    e: &AlmostBandedMatrix<T>,
    b: &[T],
    u: &[T],
    k: usize,
    m: usize,
) -> Result<T> {
    let un = norm_inf(u);
    if un.is_zero() {
        return Err(Error::Undefined("||u||_inf = 0".into()));
    }
    Ok(effective_numerator(qr, e, b, u, k, m)? / un)
}

/// `|| |A^{-1}| E ||_inf`.
pub fn abs_inverse_e_norm<T: Real>(
    qr: &QrFactorization<T>,
    e: &AlmostBandedMatrix<T>,
) -> Result<T> {
    let rows = abs_inverse_times(qr, &[e.abs_row_sums()])?;
    Ok(norm_inf(&rows[0]))
}

/// Right-hand side of the forward error bound
/// `eps / (1 - eps || |B| E ||) * || |B_1| b_1 + |B~_1| E_11 |u_1| ||` in the
/// infinity norm.
pub fn forward_error_bound<T: Real>(
    a: &AlmostBandedMatrix<T>,
    e: &AlmostBandedMatrix<T>,
    b: &[T],
    u: &[T],
    k: usize,
    m: usize,
    eps: &T,
) -> Result<T> {
    check_cutoff(a.n())?;
    check_partition(a.n(), b, u, k)?;
    let qr = qr_factor(a)?;
    forward_error_bound_with(&qr, e, b, u, k, m, eps)
}

pub(crate) fn forward_error_bound_with<T: Real>(
    qr: &QrFactorization<T>,
    e: &AlmostBandedMatrix<T>,
    b: &[T],
    u: &[T],
    k: usize,
    m: usize,
    eps: &T,
) -> Result<T> {
    if eps.is_zero() {
        return Ok(T::zero());
    }
    let w = effective_weights(e, b, u, k, m);
    let rows = abs_inverse_times(qr, &[e.abs_row_sums(), w])?;
    let product = eps.clone() * norm_inf(&rows[0]);
    if product >= T::one() {
        return Err(Error::BoundInapplicable(product.to_f64()));
    }
    Ok(eps.clone() / (T::one() - product) * norm_inf(&rows[1]))
}

/// All conditioning quantities with `E = |A|`, `b = |f|` and `eps = eps_mach`.
pub fn conditioning_report<T: Real>(
    a: &AlmostBandedMatrix<T>,
    f: &[T],
    u: &[T],
    k: usize,
    m: usize,
) -> Result<ConditioningReport> {
    check_cutoff(a.n())?;
    let b: Vec<T> = f.iter().map(|v| v.abs()).collect();
    check_partition(a.n(), &b, u, k)?;
    let qr = qr_factor(a)?;
    let e = a.abs();
    let kappa_inf = kappa_inf_with(a, &qr)?.to_f64();
    let kappa_2 = kappa_2_with(a, &qr)?.to_f64();
    let cond_eb = cond_with(&qr, &e, &b, u, k, m)?.to_f64();
    Ok(ConditioningReport {
        kappa_inf,
        kappa_2,
        cond_eb,
        rule_of_thumb: cond_eb * T::epsilon().to_f64(),
        k,
        m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble;
    use crate::linalg::dense;
    use crate::operators::BandedMatrix;
    use crate::problem::airy_problem;

    fn diag(d: &[f64]) -> AlmostBandedMatrix<f64> {
        AlmostBandedMatrix::new(Vec::new(), BandedMatrix::from_diagonal(d.to_vec())).unwrap()
    }

    #[test]
    fn identity_and_diagonal() {
        let i = AlmostBandedMatrix::<f64>::identity(4);
        assert_eq!(kappa_inf(&i).unwrap(), 1.0);
        assert!((kappa_2(&i).unwrap() - 1.0).abs() < 1e-12);
        let d = diag(&[1.0, 10.0]);
        assert_eq!(kappa_inf(&d).unwrap(), 10.0);
        assert!((kappa_2(&d).unwrap() - 10.0).abs() < 1e-6);
        let s = diag(&[1.0, 0.0]);
        assert_eq!(kappa_inf(&s).unwrap(), f64::INFINITY);
        assert_eq!(kappa_2(&s).unwrap(), f64::INFINITY);
    }

    #[test]
    fn componentwise_examples() {
        let i = AlmostBandedMatrix::<f64>::identity(3);
        let e1 = vec![1.0, 0.0, 0.0];
        assert_eq!(
            cond_componentwise(&i, &i.abs(), &e1, &e1, 1, 0).unwrap(),
            2.0
        );
        let zero = i.map(|_| 0.0);
        assert_eq!(
            cond_componentwise(&i, &zero, &[0.0; 3], &e1, 1, 0).unwrap(),
            0.0
        );
        assert!(matches!(
            cond_componentwise(&i, &i, &e1, &[0.0; 3], 1, 0),
            Err(Error::Undefined(_))
        ));
        let bound = forward_error_bound(&i, &i, &e1, &e1, 1, 0, &1e-16).unwrap();
        assert!((bound - 2e-16).abs() < 1e-30);
        assert_eq!(
            forward_error_bound(&i, &i, &e1, &e1, 1, 0, &0.0).unwrap(),
            0.0
        );
        assert!(matches!(
            forward_error_bound(&i, &i, &e1, &e1, 1, 0, &1.0),
            Err(Error::BoundInapplicable(_))
        ));
        assert!(matches!(
            cond_componentwise(&i, &i, &[1.0, 1.0, 0.0], &e1, 1, 0),
            Err(Error::InvalidProblem(_))
        ));
    }

    #[test]
    fn matches_dense_inverse() {
        let p = airy_problem("1e-2").unwrap().instantiate::<f64>().unwrap();
        let sys = assemble(&p, 60).unwrap();
        let dense_a = sys.a.to_dense();
        let inv = dense::inverse(&dense_a).unwrap();
        let expected = dense::norm_inf(&dense_a) * dense::norm_inf(&inv);
        let got = kappa_inf(&sys.a).unwrap();
        assert!((got / expected - 1.0).abs() < 1e-10);

        let u = crate::linalg::qr::solve(&sys.a, &sys.f).unwrap();
        let (k, m) = (30, sys.m);
        let b: Vec<f64> = sys.f.iter().map(|v| v.abs()).collect();
        let e = sys.a.abs();
        let mut num = vec![0.0; 60];
        for i in 0..60 {
            for j in 0..k {
                num[i] += inv[i][j].abs() * b[j];
            }
            for l in 0..k + m {
                let mut eu = 0.0;
                for j in 0..k {
                    eu += e.entry(l, j).abs() * u[j].abs();
                }
                num[i] += inv[i][l].abs() * eu;
            }
        }
        let expected = norm_inf(&num) / norm_inf(&u);
        let got = cond_componentwise(&sys.a, &e, &b, &u, k, m).unwrap();
        assert!((got / expected - 1.0).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn cutoff_is_enforced() {
        let i = AlmostBandedMatrix::<f64>::identity(DENSE_CUTOFF + 1);
        assert!(matches!(kappa_inf(&i), Err(Error::DenseCutoff { .. })));
    }
}
