//! Banded truncations of the differentiation, conversion and multiplication
//! operators of the ultraspherical method, and the banded algebra used to
//! combine them.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::series::UltrasphericalSeries;

/// Row-major band storage: row `i` keeps columns `i - lower ..= i + upper`.
///
/// Slots that fall outside the logical `rows x cols` matrix are kept at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix<T> {
    rows: usize,
    cols: usize,
    lower: usize,
    upper: usize,
    data: Vec<T>,
}

impl<T: Real> BandedMatrix<T> {
    pub fn zeros(rows: usize, cols: usize, lower: usize, upper: usize) -> Self {
        BandedMatrix {
            rows,
            cols,
            lower,
            upper,
            data: vec![T::zero(); rows * (lower + upper + 1)],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n, 0, 0);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_diagonal(diag: Vec<T>) -> Self {
        let n = diag.len();
        BandedMatrix {
            rows: n,
            cols: n,
            lower: 0,
            upper: 0,
            data: diag,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn lower_bw(&self) -> usize {
        self.lower
    }
    pub fn upper_bw(&self) -> usize {
        self.upper
    }

    fn width(&self) -> usize {
        self.lower + self.upper + 1
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.rows && j < self.cols && j + self.lower >= i && j <= i + self.upper
    }

    /// Column range stored for row `i`, clipped to the matrix.
    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        let lo = i.saturating_sub(self.lower);
        let hi = (i + self.upper + 1).min(self.cols);
        lo..hi.max(lo)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if self.in_band(i, j) {
            self.data[i * self.width() + (j + self.lower - i)].clone()
        } else {
            T::zero()
        }
    }

    pub(crate) fn get_ref(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.width() + (j + self.lower - i)]
    }

    /// Panics when `(i, j)` lies outside the stored band.
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let w = self.width();
        self.data[i * w + (j + self.lower - i)] = v;
    }

    /// Leading `rows x cols` block.
    pub fn truncate(&self, rows: usize, cols: usize) -> Self {
        assert!(rows <= self.rows && cols <= self.cols);
        let mut out = Self::zeros(rows, cols, self.lower, self.upper);
        for i in 0..rows {
            for j in out.row_range(i) {
                out.set(i, j, self.get(i, j));
            }
        }
        out
    }

    /// Leading `rows x cols` block re-stored with the given bandwidths.
    /// Entries outside the new band must be zero.
    pub fn reband(&self, rows: usize, cols: usize, lower: usize, upper: usize) -> Self {
        let mut out = Self::zeros(rows, cols, lower, upper);
        for i in 0..rows {
            for j in self.row_range(i) {
                if j >= cols {
                    break;
                }
                let v = self.get_ref(i, j);
                if out.in_band(i, j) {
                    out.set(i, j, v.clone());
                } else {
                    debug_assert!(v.is_zero(), "nonzero ({i}, {j}) outside new band");
                }
            }
        }
        out
    }

    /// Entrywise conversion to another scalar type.
    pub fn map<U: Real>(&self, f: impl Fn(&T) -> U) -> BandedMatrix<U> {
        BandedMatrix {
            rows: self.rows,
            cols: self.cols,
            lower: self.lower,
            upper: self.upper,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for j in self.row_range(i) {
                    acc += self.get_ref(i, j).clone() * x[j].clone();
                }
                acc
            })
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Actual bandwidths of the nonzero pattern (may be smaller than the storage).
    pub fn effective_bandwidths(&self) -> (usize, usize) {
        let (mut lo, mut up) = (0, 0);
        for i in 0..self.rows {
            for j in self.row_range(i) {
                if !self.get_ref(i, j).is_zero() {
                    if i > j {
                        lo = lo.max(i - j);
                    } else {
                        up = up.max(j - i);
                    }
                }
            }
        }
        (lo, up)
    }
}

/// Truncation of `D_lambda`, mapping Chebyshev coefficients to `C^(lambda)`
/// coefficients of the `lambda`-th derivative.
///
/// Single band at offset `+lambda` with entry `2^(lambda-1) (lambda-1)! k` in
/// column `k`.
pub fn diff_op<T: Real>(lambda: u32, rows: usize, cols: usize) -> Result<BandedMatrix<T>> {
    if lambda == 0 {
        return Err(Error::InvalidProblem(
            "differentiation of order 0; use the identity".into(),
        ));
    }
    let l = lambda as usize;
    let scale: i64 = (1..l as i64).product::<i64>() * (1i64 << (l - 1));
    let mut d = BandedMatrix::zeros(rows, cols, 0, l);
    for k in l..cols {
        if k - l < rows {
            d.set(k - l, k, T::from_i64(scale * k as i64));
        }
    }
    Ok(d)
}

/// Truncation of `S_lambda : C^(lambda) -> C^(lambda+1)` (`lambda = 0` is `T -> C^(1)`).
pub fn conv_op<T: Real>(lambda: u32, rows: usize, cols: usize) -> BandedMatrix<T> {
    let mut s = BandedMatrix::zeros(rows, cols, 0, 2);
    let l = lambda as i64;
    for k in 0..rows {
        let ki = k as i64;
        if k < cols {
            let diag = if lambda == 0 {
                if k == 0 {
                    T::one()
                } else {
                    T::ratio(1, 2)
                }
            } else {
                T::ratio(l, l + ki)
            };
            s.set(k, k, diag);
        }
        if k + 2 < cols {
            let sup = if lambda == 0 {
                T::ratio(-1, 2)
            } else {
                T::ratio(-l, l + ki + 2)
            };
            s.set(k, k + 2, sup);
        }
    }
    s
}

/// Multiplication by `x` in the basis `C^(lambda)` (tridiagonal).
pub fn jacobi_op<T: Real>(lambda: u32, rows: usize, cols: usize) -> BandedMatrix<T> {
    let mut j = BandedMatrix::zeros(rows, cols, 1, 1);
    let l = lambda as i64;
    for k in 0..cols {
        let ki = k as i64;
        let (below, above) = if lambda == 0 {
            if k == 0 {
                (T::one(), T::zero())
            } else {
                (T::ratio(1, 2), T::ratio(1, 2))
            }
        } else {
            (
                T::ratio(ki + 1, 2 * (ki + l)),
                T::ratio(ki + 2 * l - 1, 2 * (ki + l)),
            )
        };
        if k + 1 < rows {
            j.set(k + 1, k, below);
        }
        if k >= 1 && k - 1 < rows {
            j.set(k - 1, k, above);
        }
    }
    j
}

/// Truncation of `M_lambda[a]` for a Chebyshev series `a`, built from the
/// recurrence `M[T_0] = I`, `M[T_1] = J`, `M[T_{j+1}] = 2 J M[T_j] - M[T_{j-1}]`.
///
/// The recurrence runs on a square operator padded by `deg(a) + 1` so that
/// the returned block does not see truncation effects.
pub fn mult_op<T: Real>(
    a: &UltrasphericalSeries<T>,
    lambda: u32,
    rows: usize,
    cols: usize,
) -> BandedMatrix<T> {
    assert_eq!(
        a.lambda, 0,
        "multiplication operators take Chebyshev coefficients"
    );
    let deg = match a.degree() {
        None => return BandedMatrix::zeros(rows, cols, 0, 0),
        Some(d) => d,
    };
    let big = rows.max(cols) + deg + 1;
    let jac = jacobi_op::<T>(lambda, big, big);
    let two_jac = band_scale(&jac, &T::from_i64(2));

    let mut prev = BandedMatrix::<T>::identity(big);
    let mut acc = band_scale(&prev, &a.coeffs[0]);
    if deg >= 1 {
        let mut cur = jac.clone();
        acc = band_add(&acc, &band_scale(&cur, &a.coeffs[1])).expect("same shape");
        for j in 2..=deg {
            let next =
                band_sub(&band_mul(&two_jac, &cur).expect("square"), &prev).expect("same shape");
            prev = cur;
            cur = next;
            if !a.coeffs[j].is_zero() {
                acc = band_add(&acc, &band_scale(&cur, &a.coeffs[j])).expect("same shape");
            }
        }
    }
    acc.truncate(rows, cols)
}

/// Exact banded product; bandwidths add. Sums run over increasing inner index.
pub fn band_mul<T: Real>(a: &BandedMatrix<T>, b: &BandedMatrix<T>) -> Result<BandedMatrix<T>> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let lower = a.lower + b.lower;
    let upper = a.upper + b.upper;
    let mut c = BandedMatrix::zeros(a.rows, b.cols, lower, upper);
    if a.cols == 0 {
        return Ok(c);
    }
    for i in 0..c.rows {
        for j in c.row_range(i) {
            let lo = i.saturating_sub(a.lower).max(j.saturating_sub(b.upper));
            let hi = (i + a.upper).min(j + b.lower).min(a.cols - 1);
            if lo > hi {
                continue;
            }
            let mut acc = T::zero();
            for l in lo..=hi {
                acc += a.get_ref(i, l).clone() * b.get_ref(l, j).clone();
            }
            c.set(i, j, acc);
        }
    }
    Ok(c)
}

fn combine<T: Real>(
    a: &BandedMatrix<T>,
    b: &BandedMatrix<T>,
    f: impl Fn(T, T) -> T,
) -> Result<BandedMatrix<T>> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut c = BandedMatrix::zeros(a.rows, a.cols, a.lower.max(b.lower), a.upper.max(b.upper));
    for i in 0..c.rows {
        for j in c.row_range(i) {
            c.set(i, j, f(a.get(i, j), b.get(i, j)));
        }
    }
    Ok(c)
}

pub fn band_add<T: Real>(a: &BandedMatrix<T>, b: &BandedMatrix<T>) -> Result<BandedMatrix<T>> {
    combine(a, b, |x, y| x + y)
}

pub fn band_sub<T: Real>(a: &BandedMatrix<T>, b: &BandedMatrix<T>) -> Result<BandedMatrix<T>> {
    combine(a, b, |x, y| x - y)
}

pub fn band_scale<T: Real>(a: &BandedMatrix<T>, c: &T) -> BandedMatrix<T> {
    let mut out = a.clone();
    for v in out.data.iter_mut() {
        *v = v.clone() * c.clone();
    }
    out
}
