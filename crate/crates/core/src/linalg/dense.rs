//! Small dense kernels used as independent oracles in tests and diagnostics.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub fn identity<T: Real>(n: usize) -> Vec<Vec<T>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { T::one() } else { T::zero() })
                .collect()
        })
        .collect()
}

pub fn transpose<T: Real>(a: &[Vec<T>]) -> Vec<Vec<T>> {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| a.iter().map(|row| row[j].clone()).collect())
        .collect()
}

pub fn matmul<T: Real>(a: &[Vec<T>], b: &[Vec<T>]) -> Vec<Vec<T>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            assert_eq!(row.len(), inner);
            let mut out = vec![T::zero(); cols];
            for (k, aik) in row.iter().enumerate() {
                if aik.is_zero() {
                    continue;
                }
                for (o, bkj) in out.iter_mut().zip(&b[k]) {
                    *o += aik.clone() * bkj.clone();
                }
            }
            out
        })
        .collect()
}

pub fn matvec<T: Real>(a: &[Vec<T>], x: &[T]) -> Vec<T> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(x)
                .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
        })
        .collect()
}

/// LU factorization with partial pivoting, stored in place, plus the pivot rows.
pub struct Lu<T> {
    lu: Vec<Vec<T>>,
    perm: Vec<usize>,
}

pub fn lu<T: Real>(a: &[Vec<T>]) -> Result<Lu<T>> {
    let n = a.len();
    let mut lu = a.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (piv, best) = (k..n)
            .map(|i| (i, lu[i][k].abs()))
            .fold(
                (k, T::zero()),
                |acc, cur| if cur.1 > acc.1 { cur } else { acc },
            );
        if best.is_zero() {
            return Err(Error::Singular { index: k });
        }
        lu.swap(k, piv);
        perm.swap(k, piv);
        let pivot = lu[k][k].clone();
        let (top, bottom) = lu.split_at_mut(k + 1);
        let pivot_row = &top[k];
        for row in bottom.iter_mut() {
            let factor = row[k].clone() / pivot.clone();
            if factor.is_zero() {
                continue;
            }
            for j in k + 1..n {
                row[j] -= factor.clone() * pivot_row[j].clone();
            }
            row[k] = factor;
        }
    }
    Ok(Lu { lu, perm })
}

impl<T: Real> Lu<T> {
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.lu.len();
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[i][j].clone();
                let xj = x[j].clone();
                x[i] -= l * xj;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu[i][j].clone();
                let xj = x[j].clone();
                x[i] -= u * xj;
            }
            x[i] = x[i].clone() / self.lu[i][i].clone();
        }
        x
    }
}

pub fn lu_solve<T: Real>(a: &[Vec<T>], b: &[T]) -> Result<Vec<T>> {
    Ok(lu(a)?.solve(b))
}

/// Dense inverse, column by column.
pub fn inverse<T: Real>(a: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let n = a.len();
    let f = lu(a)?;
    let cols: Vec<Vec<T>> = (0..n)
        .map(|j| {
            let mut e = vec![T::zero(); n];
            e[j] = T::one();
            f.solve(&e)
        })
        .collect();
    Ok(transpose(&cols))
}

/// Least-squares solution of the overdetermined `a x ~ b` (rows >= cols) by
/// Householder QR. Columns are scaled to unit norm first.
pub fn least_squares<T: Real>(a: &[Vec<T>], b: &[T]) -> Result<Vec<T>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    if rows < cols || b.len() != rows {
        return Err(Error::DimensionMismatch(format!(
            "{rows} x {cols} system with {} right-hand sides",
            b.len()
        )));
    }
    let mut m = transpose(a);
    let scales: Vec<T> = m.iter().map(|c| crate::series::norm2(c)).collect();
    for (col, s) in m.iter_mut().zip(&scales) {
        if s.is_zero() {
            return Err(Error::Singular { index: 0 });
        }
        col.iter_mut().for_each(|v| *v = v.clone() / s.clone());
    }
    let mut rhs = b.to_vec();
    for k in 0..cols {
        let alpha = crate::series::norm2(&m[k][k..]);
        if alpha.is_zero() {
            return Err(Error::Singular { index: k });
        }
        let alpha = if m[k][k] > T::zero() { -alpha } else { alpha };
        let mut v: Vec<T> = m[k][k..].to_vec();
        v[0] -= alpha.clone();
        let vv = v
            .iter()
            .fold(T::zero(), |acc, x| acc + x.clone() * x.clone());
        let reflect = |x: &mut [T]| {
            let dot = v
                .iter()
                .zip(x.iter())
                .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone());
            let f = T::from_i64(2) * dot / vv.clone();
            for (xi, vi) in x.iter_mut().zip(&v) {
                *xi -= f.clone() * vi.clone();
            }
        };
        for col in m.iter_mut().skip(k) {
            reflect(&mut col[k..]);
        }
        reflect(&mut rhs[k..]);
    }
    let mut x = vec![T::zero(); cols];
    for i in (0..cols).rev() {
        let mut sum = rhs[i].clone();
        for j in i + 1..cols {
            sum -= m[j][i].clone() * x[j].clone();
        }
        x[i] = sum / m[i][i].clone();
    }
    Ok(x.into_iter().zip(scales).map(|(v, s)| v / s).collect())
}

/// Maximum absolute row sum.
pub fn norm_inf<T: Real>(a: &[Vec<T>]) -> T {
    a.iter()
        .map(|row| row.iter().fold(T::zero(), |acc, v| acc + v.abs()))
        .fold(T::zero(), T::max_of)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_and_inverse() {
        let a = vec![
            vec![0.0, 2.0, 1.0],
            vec![1.0, 1.0, 0.0],
            vec![3.0, 0.0, 1.0],
        ];
        let x = lu_solve(&a, &[3.0, 2.0, 4.0]).unwrap();
        for (v, e) in x.iter().zip([1.0, 1.0, 1.0]) {
            assert!((v - e).abs() < 1e-15);
        }
        let inv = inverse(&a).unwrap();
        let id = matmul(&a, &inv);
        for i in 0..3 {
            for j in 0..3 {
                assert!((id[i][j] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
        assert_eq!(norm_inf(&a), 4.0);
        assert!(lu(&[vec![1.0, 2.0], vec![2.0, 4.0]]).is_err());
    }

    #[test]
    fn least_squares_fits_a_line() {
        let xs = [-1.0, -0.5, 0.0, 0.5, 1.0];
        let a: Vec<Vec<f64>> = xs.iter().map(|&x| vec![1.0, x]).collect();
        let b: Vec<f64> = xs.iter().map(|&x| 3.0 - 2.0 * x).collect();
        let c = least_squares(&a, &b).unwrap();
        assert!((c[0] - 3.0).abs() < 1e-15 && (c[1] + 2.0).abs() < 1e-15);
        // Residual orthogonal to the columns for an inconsistent system.
        let b2 = [1.0, 0.0, 0.0, 0.0, 1.0];
        let c = least_squares(&a, &b2).unwrap();
        assert!((c[0] - 0.4).abs() < 1e-15 && c[1].abs() < 1e-15);
    }
}
