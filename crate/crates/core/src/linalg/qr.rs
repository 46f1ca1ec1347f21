//! Givens QR of almost-banded matrices.
//!
//! Subdiagonal entries are eliminated column by column (left to right) and,
//! within a column, bottom-up by rotations of adjacent rows. Row `r` of the
//! working matrix is kept as an explicit window over columns
//! `r - m ..= r + ub` (`ub = m + upper_bw`); beyond the window it is a linear
//! combination of the original dense rows, `row_r(c) = U(r, :) . V(:, c)`.
//! Only `U` (an `n x N` block) is rotated for those columns, so the fill
//! from the dense rows costs `O(n N)` memory.
//!
//! The explicit value of the lower row at column `q + ub` is the only place
//! where the two representations meet: there the upper row's implicit value
//! is materialized before rotating.

use crate::assembly::AlmostBandedMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::series::norm2;

/// Largest `n` for which dense diagnostics (explicit `Q`, full inverse) run.
pub const DENSE_CUTOFF: usize = 4096;

/// Rotation of rows `row` and `row + 1` that zeroes entry `(row + 1, col)`:
/// `[x; y] <- [c s; -s c] [x; y]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GivensRotation<T> {
    pub row: usize,
    pub col: usize,
    pub c: T,
    pub s: T,
}

impl<T: Real> GivensRotation<T> {
    #[inline]
    fn apply(&self, x: &mut T, y: &mut T) {
        let nx = self.c.clone() * x.clone() + self.s.clone() * y.clone();
        let ny = self.c.clone() * y.clone() - self.s.clone() * x.clone();
        *x = nx;
        *y = ny;
    }

    #[inline]
    fn apply_transpose(&self, x: &mut T, y: &mut T) {
        let nx = self.c.clone() * x.clone() - self.s.clone() * y.clone();
        let ny = self.s.clone() * x.clone() + self.c.clone() * y.clone();
        *x = nx;
        *y = ny;
    }
}

/// `Q^T A = R` with `Q` a product of adjacent-row rotations.
#[derive(Debug, Clone)]
pub struct QrFactorization<T> {
    n: usize,
    m: usize,
    ub: usize,
    nd: usize,
    width: usize,
    /// Row-major windows, `width = m + ub + 1` entries per row.
    band: Vec<T>,
    /// `n x nd` coefficients of the dense-row combination.
    u: Vec<T>,
    /// The original dense rows.
    v: Vec<Vec<T>>,
    rotations: Vec<GivensRotation<T>>,
}

impl<T: Real> QrFactorization<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Subdiagonal count of the factored matrix.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Explicitly stored superdiagonals of `R`.
    pub fn explicit_upper_bw(&self) -> usize {
        self.ub
    }

    pub fn rotations(&self) -> &[GivensRotation<T>] {
        &self.rotations
    }

    #[inline]
    fn w(&self, r: usize, c: usize) -> &T {
        &self.band[r * self.width + c + self.m - r]
    }

    fn implicit(&self, r: usize, c: usize) -> T {
        let mut acc = T::zero();
        for t in 0..self.nd {
            let coef = &self.u[r * self.nd + t];
            if !coef.is_zero() {
                acc += coef.clone() * self.v[t][c].clone();
            }
        }
        acc
    }

    /// Entry `R(i, j)`.
    pub fn r_entry(&self, i: usize, j: usize) -> T {
        if j < i {
            T::zero()
        } else if j <= i + self.ub {
            self.w(i, j).clone()
        } else {
            self.implicit(i, j)
        }
    }

    /// `Q^T f`.
    pub fn apply_qt(&self, f: &[T]) -> Vec<T> {
        assert_eq!(f.len(), self.n);
        let mut s = f.to_vec();
        for g in &self.rotations {
            let (lo, hi) = s.split_at_mut(g.row + 1);
            let (x, y) = (&mut lo[g.row], &mut hi[0]);
            if x.is_zero() && y.is_zero() {
                continue;
            }
            g.apply(x, y);
        }
        s
    }

    /// `Q z`.
    pub fn apply_q(&self, z: &[T]) -> Vec<T> {
        assert_eq!(z.len(), self.n);
        let mut y = z.to_vec();
        for g in self.rotations.iter().rev() {
            let (lo, hi) = y.split_at_mut(g.row + 1);
            let (a, b) = (&mut lo[g.row], &mut hi[0]);
            if a.is_zero() && b.is_zero() {
                continue;
            }
            g.apply_transpose(a, b);
        }
        y
    }

    /// Solves `R u = s`. Terms with `u_j = 0` are skipped, so trailing exact
    /// zeros never perturb the leading entries.
    pub fn back_substitute(&self, s: &[T]) -> Result<Vec<T>> {
        assert_eq!(s.len(), self.n);
        let n = self.n;
        let mut x = vec![T::zero(); n];
        // acc[t] = sum_{j > i + ub} V(t, j) x_j
        let mut acc = vec![T::zero(); self.nd];
        for i in (0..n).rev() {
            let c = i + self.ub + 1;
            if c < n && !x[c].is_zero() {
                for (t, a) in acc.iter_mut().enumerate() {
                    *a += self.v[t][c].clone() * x[c].clone();
                }
            }
            let mut sum = s[i].clone();
            for j in i + 1..=(i + self.ub).min(n - 1) {
                if !x[j].is_zero() {
                    sum -= self.w(i, j).clone() * x[j].clone();
                }
            }
            for (t, a) in acc.iter().enumerate() {
                if !a.is_zero() {
                    sum -= self.u[i * self.nd + t].clone() * a.clone();
                }
            }
            let d = self.w(i, i);
            if d.is_zero() {
                return Err(Error::Singular { index: i });
            }
            x[i] = sum / d.clone();
        }
        Ok(x)
    }

    /// Solves `R^T z = b`.
    pub fn forward_substitute_transpose(&self, b: &[T]) -> Result<Vec<T>> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut z: Vec<T> = vec![T::zero(); n];
        // acc[t] = sum_{j < i - ub} z_j U(j, t)
        let mut acc = vec![T::zero(); self.nd];
        for i in 0..n {
            if i > self.ub {
                let j = i - self.ub - 1;
                if !z[j].is_zero() {
                    for (t, a) in acc.iter_mut().enumerate() {
                        *a += z[j].clone() * self.u[j * self.nd + t].clone();
                    }
                }
            }
            let mut sum = b[i].clone();
            for j in i.saturating_sub(self.ub)..i {
                if !z[j].is_zero() {
                    sum -= self.w(j, i).clone() * z[j].clone();
                }
            }
            for (t, a) in acc.iter().enumerate() {
                if !a.is_zero() {
                    sum -= a.clone() * self.v[t][i].clone();
                }
            }
            let d = self.w(i, i);
            if d.is_zero() {
                return Err(Error::Singular { index: i });
            }
            z[i] = sum / d.clone();
        }
        Ok(z)
    }

    /// Solves `A x = f`.
    pub fn solve(&self, f: &[T]) -> Result<Vec<T>> {
        if f.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side of length {} for n = {}",
                f.len(),
                self.n
            )));
        }
        self.back_substitute(&self.apply_qt(f))
    }

    /// Solves `A^T y = b`.
    pub fn solve_transpose(&self, b: &[T]) -> Result<Vec<T>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side of length {} for n = {}",
                b.len(),
                self.n
            )));
        }
        let z = self.forward_substitute_transpose(b)?;
        Ok(self.apply_q(&z))
    }

    /// Row `j` of `Q`, i.e. `Q^T e_j`.
    pub fn q_row(&self, j: usize) -> Vec<T> {
        let mut e = vec![T::zero(); self.n];
        e[j] = T::one();
        self.apply_qt(&e)
    }

    /// Explicit `Q` (row-major).
    pub fn accumulate_q(&self) -> Result<Vec<Vec<T>>> {
        if self.n > DENSE_CUTOFF {
            return Err(Error::DenseCutoff {
                n: self.n,
                cutoff: DENSE_CUTOFF,
            });
        }
        Ok((0..self.n).map(|j| self.q_row(j)).collect())
    }

    /// Dense `R` (row-major).
    pub fn r_dense(&self) -> Result<Vec<Vec<T>>> {
        if self.n > DENSE_CUTOFF {
            return Err(Error::DenseCutoff {
                n: self.n,
                cutoff: DENSE_CUTOFF,
            });
        }
        Ok((0..self.n)
            .map(|i| (0..self.n).map(|j| self.r_entry(i, j)).collect())
            .collect())
    }
}

/// Factorizes `a` in the fixed elimination order described in the module docs.
pub fn qr_factor<T: Real>(a: &AlmostBandedMatrix<T>) -> Result<QrFactorization<T>> {
    let n = a.n();
    let nd = a.num_dense_rows();
    let m = a.lower_bw();
    let ub = m + a.upper_bw();
    let width = m + ub + 1;

    let mut band = vec![T::zero(); n * width];
    for r in 0..n {
        let lo = r.saturating_sub(m);
        let hi = (r + ub).min(n.saturating_sub(1));
        let support = a.row_support(r);
        debug_assert!(r < nd || (support.start >= lo && support.end <= hi + 1));
        for c in support.start.max(lo)..support.end.min(hi + 1) {
            band[r * width + c + m - r] = a.entry(r, c);
        }
    }
    let mut u = vec![T::zero(); n * nd];
    for t in 0..nd.min(n) {
        u[t * nd + t] = T::one();
    }
    let v: Vec<Vec<T>> = a.dense_top().to_vec();

    let mut rotations = Vec::with_capacity(n * m);
    let idx = |r: usize, c: usize| r * width + c + m - r;
    for j in 0..n {
        let last = (j + m).min(n - 1);
        for q in (j + 1..=last).rev() {
            let p = q - 1;
            let b = band[idx(q, j)].clone();
            if b.is_zero() {
                continue;
            }
            let x = band[idx(p, j)].clone();
            let r = x.hypot(&b);
            let g = GivensRotation {
                row: p,
                col: j,
                c: x / r.clone(),
                s: b / r.clone(),
            };
            band[idx(p, j)] = r;
            band[idx(q, j)] = T::zero();
            for col in j + 1..=(p + ub).min(n - 1) {
                let (ip, iq) = (idx(p, col), idx(q, col));
                let mut xp = band[ip].clone();
                let mut xq = band[iq].clone();
                g.apply(&mut xp, &mut xq);
                band[ip] = xp;
                band[iq] = xq;
            }
            let col = q + ub;
            if col < n && nd > 0 {
                let mut xp = T::zero();
                for t in 0..nd {
                    let coef = &u[p * nd + t];
                    if !coef.is_zero() {
                        xp += coef.clone() * v[t][col].clone();
                    }
                }
                let iq = idx(q, col);
                band[iq] = g.c.clone() * band[iq].clone() - g.s.clone() * xp;
            }
            for t in 0..nd {
                let mut xp = u[p * nd + t].clone();
                let mut xq = u[q * nd + t].clone();
                g.apply(&mut xp, &mut xq);
                u[p * nd + t] = xp;
                u[q * nd + t] = xq;
            }
            rotations.push(g);
        }
        if band[idx(j, j)].is_zero() {
            return Err(Error::ZeroPivot { column: j });
        }
    }

    Ok(QrFactorization {
        n,
        m,
        ub,
        nd,
        width,
        band,
        u,
        v,
        rotations,
    })
}

/// `A x = f` via [`qr_factor`].
pub fn solve<T: Real>(a: &AlmostBandedMatrix<T>, f: &[T]) -> Result<Vec<T>> {
    qr_factor(a)?.solve(f)
}

/// Two-norm of the last `m` entries of row `j` of a dense `Q`.
pub fn q_tail_norm<T: Real>(q: &[Vec<T>], j: usize, m: usize) -> T {
    let row = &q[j];
    norm2(&row[row.len().saturating_sub(m)..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble;
    use crate::linalg::dense;
    use crate::operators::BandedMatrix;
    use crate::problem::{airy_problem, corpus, parabola_problem};

    fn dense_banded(rows: Vec<Vec<f64>>, lower: usize, upper: usize) -> BandedMatrix<f64> {
        let n = rows[0].len();
        let mut b = BandedMatrix::zeros(rows.len(), n, lower, upper);
        for (i, r) in rows.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                if *v != 0.0 {
                    b.set(i, j, *v);
                }
            }
        }
        b
    }

    #[test]
    fn identity_factorization() {
        let a = AlmostBandedMatrix::<f64>::identity(5);
        let qr = qr_factor(&a).unwrap();
        assert!(qr.rotations().is_empty());
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(qr.r_entry(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
        let f = vec![1.0, -2.0, 3.0, 0.0, 5.0];
        assert_eq!(qr.apply_qt(&f), f);
        assert_eq!(qr.apply_qt(&[0.0; 5]), vec![0.0; 5]);
        assert_eq!(qr.back_substitute(&f).unwrap(), f);
        let q = qr.accumulate_q().unwrap();
        assert_eq!(q, dense::identity(5));
        assert_eq!(q_tail_norm(&q, 0, 2), 0.0);
    }

    #[test]
    fn permutation() {
        let b = dense_banded(vec![vec![0.0, 1.0], vec![1.0, 0.0]], 1, 1);
        let a = AlmostBandedMatrix::new(Vec::new(), b).unwrap();
        let qr = qr_factor(&a).unwrap();
        assert_eq!(qr.rotations().len(), 1);
        assert_eq!(qr.r_entry(0, 0).abs(), 1.0);
        assert_eq!(qr.r_entry(1, 1).abs(), 1.0);
        assert_eq!(qr.r_entry(0, 1), 0.0);
        assert_eq!(qr.solve(&[2.0, 3.0]).unwrap(), vec![3.0, 2.0]);
    }

    #[test]
    fn upper_triangular_back_substitution() {
        let b = dense_banded(vec![vec![2.0, 1.0], vec![0.0, 4.0]], 0, 1);
        let a = AlmostBandedMatrix::new(Vec::new(), b).unwrap();
        let qr = qr_factor(&a).unwrap();
        assert_eq!(qr.back_substitute(&[4.0, 8.0]).unwrap(), vec![1.0, 2.0]);
        let qr = qr_factor(&AlmostBandedMatrix::<f64>::identity(3)).unwrap();
        let s = vec![1.0, 0.0, 0.0];
        assert_eq!(qr.back_substitute(&s).unwrap(), s);
    }

    #[test]
    fn singular_inputs() {
        let b = dense_banded(vec![vec![1.0, 2.0], vec![2.0, 4.0]], 1, 1);
        let a = AlmostBandedMatrix::new(Vec::new(), b).unwrap();
        assert!(matches!(qr_factor(&a), Err(Error::ZeroPivot { column: 1 })));
        let b = dense_banded(
            vec![
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
                vec![0.0, 0.0, 0.0],
            ],
            0,
            1,
        );
        let a = AlmostBandedMatrix::new(Vec::new(), b).unwrap();
        assert!(matches!(qr_factor(&a), Err(Error::ZeroPivot { column: 0 })));
    }

    #[test]
    fn q_times_r_reproduces_a() {
        for (name, spec) in corpus() {
            let p = spec.instantiate::<f64>().unwrap();
            let sys = assemble(&p, 40).unwrap();
            let qr = qr_factor(&sys.a).unwrap();
            let q = qr.accumulate_q().unwrap();
            let r = qr.r_dense().unwrap();
            let qr_prod = dense::matmul(&q, &r);
            let a = sys.a.to_dense();
            let scale = sys.a.norm_inf();
            for i in 0..40 {
                for j in 0..40 {
                    assert!(
                        (qr_prod[i][j] - a[i][j]).abs() <= 1e-13 * scale,
                        "{name} ({i},{j})"
                    );
                    if i > j {
                        assert_eq!(r[i][j], 0.0);
                    }
                }
            }
            let qtq = dense::matmul(&dense::transpose(&q), &q);
            for i in 0..40 {
                for j in 0..40 {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((qtq[i][j] - e).abs() < 1e-14, "{name}");
                }
            }
        }
    }

    #[test]
    fn orthogonality_at_512() {
        let p = airy_problem("1e-2").unwrap().instantiate::<f64>().unwrap();
        let sys = assemble(&p, 512).unwrap();
        let q = qr_factor(&sys.a).unwrap().accumulate_q().unwrap();
        let mut worst: f64 = 0.0;
        for row in &q {
            worst = worst.max((norm2(row) - 1.0).abs());
        }
        assert!(worst <= 1e-13, "{worst}");
        let qtq = dense::matmul(&dense::transpose(&q), &q);
        for (i, row) in qtq.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((v - e).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn solves_match_dense_lu() {
        for (name, spec) in corpus() {
            let p = spec.instantiate::<f64>().unwrap();
            for n in [12, 33, 80] {
                let sys = assemble(&p, n).unwrap();
                let qr = qr_factor(&sys.a).unwrap();
                let x = qr.solve(&sys.f).unwrap();
                let y = dense::lu_solve(&sys.a.to_dense(), &sys.f).unwrap();
                let scale = norm2(&y).max(1.0);
                for (a, b) in x.iter().zip(&y) {
                    assert!((a - b).abs() < 1e-11 * scale, "{name} n={n}");
                }
                let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
                let t = qr.solve_transpose(&b).unwrap();
                let back = sys.a.mul_vec_transpose(&t);
                let res: f64 = back
                    .iter()
                    .zip(&b)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                assert!(res < 1e-10 * norm2(&t).max(1.0), "{name} n={n}: {res}");
            }
        }
    }

    #[test]
    fn linear_solution() {
        let mut spec = parabola_problem();
        spec.rhs.clear();
        spec.bcs[0].target = crate::problem::ValueExpr::number("0");
        let p = spec.instantiate::<f64>().unwrap();
        let sys = assemble(&p, 10).unwrap();
        let u = solve(&sys.a, &sys.f).unwrap();
        assert!((u[0] - 0.5).abs() < 1e-15 && (u[1] - 0.5).abs() < 1e-15);
        assert!(u[2..].iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn nesting_is_bitwise() {
        let p = airy_problem("1e-2").unwrap().instantiate::<f64>().unwrap();
        let a = qr_factor(&assemble(&p, 64).unwrap().a).unwrap();
        let b = qr_factor(&assemble(&p, 128).unwrap().a).unwrap();
        let m = a.m();
        assert_eq!(m, 3);
        for i in 0..64 - m {
            for j in 0..64 - m {
                assert_eq!(a.r_entry(i, j).to_bits(), b.r_entry(i, j).to_bits());
            }
        }
        let prefix = a.rotations().iter().take_while(|g| g.col < 64 - m).count();
        assert_eq!(a.rotations()[..prefix], b.rotations()[..prefix]);
    }
}
