//! Chebyshev and ultraspherical coefficient series.

use crate::scalar::Real;

/// Coefficients in the basis `C^(lambda)`; `lambda = 0` denotes Chebyshev `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct UltrasphericalSeries<T> {
    pub lambda: u32,
    pub coeffs: Vec<T>,
}

impl<T: Real> UltrasphericalSeries<T> {
    pub fn new(lambda: u32, coeffs: Vec<T>) -> Self {
        UltrasphericalSeries { lambda, coeffs }
    }

    pub fn chebyshev(coeffs: Vec<T>) -> Self {
        UltrasphericalSeries { lambda: 0, coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the last nonzero coefficient, `None` for the zero series.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    pub fn eval(&self, x: &T) -> T {
        clenshaw_eval(self, x)
    }
}

/// Recurrence coefficients `alpha_k(x)`, `beta_k` with
/// `phi_{k+1} = alpha_k phi_k + beta_k phi_{k-1}` and `phi_0 = 1`.
fn recurrence<T: Real>(lambda: u32, k: usize, x: &T) -> (T, T) {
    if lambda == 0 {
        if k == 0 {
            (x.clone(), T::zero())
        } else {
            (T::from_i64(2) * x.clone(), -T::one())
        }
    } else {
        let l = lambda as i64;
        let k = k as i64;
        let alpha = T::ratio(2 * (k + l), k + 1) * x.clone();
        let beta = if k == 0 {
            T::zero()
        } else {
            -T::ratio(k + 2 * l - 1, k + 1)
        };
        (alpha, beta)
    }
}

/// Evaluates `sum_k coeffs[k] C^(lambda)_k(x)` by Clenshaw's backward recurrence.
pub fn clenshaw_eval<T: Real>(s: &UltrasphericalSeries<T>, x: &T) -> T {
    let n = s.coeffs.len();
    let mut b1 = T::zero(); // b_{k+1}
    let mut b2 = T::zero(); // b_{k+2}
    for k in (0..n).rev() {
        let (alpha, _) = recurrence(s.lambda, k, x);
        let (_, beta_next) = recurrence(s.lambda, k + 1, x);
        let bk = s.coeffs[k].clone() + alpha * b1.clone() + beta_next * b2;
        b2 = b1;
        b1 = bk;
    }
    b1
}

/// Values `C^(lambda)_0(x), ..., C^(lambda)_{n-1}(x)` from the forward recurrence.
pub fn basis_values<T: Real>(lambda: u32, n: usize, x: &T) -> Vec<T> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push(T::one());
    for k in 0..n.saturating_sub(1) {
        let (alpha, beta) = recurrence(lambda, k, x);
        let prev = if k == 0 {
            T::zero()
        } else {
            out[k - 1].clone()
        };
        let next = alpha * out[k].clone() + beta * prev;
        out.push(next);
    }
    out
}

/// Retained length after dropping the trailing coefficients whose magnitudes
/// are all at most `tol * max|coeffs|`.
pub fn chop<T: Real>(coeffs: &[T], tol: &T) -> usize {
    let scale = coeffs.iter().map(|c| c.abs()).fold(T::zero(), T::max_of);
    let threshold = tol.clone() * scale;
    match coeffs.iter().rposition(|c| c.abs() > threshold) {
        Some(i) => i + 1,
        None => 0,
    }
}

/// Endpoint of `[-1, 1]` at which a boundary functional acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Left,
    Right,
}

impl Endpoint {
    pub fn from_sign(x: i32) -> Option<Self> {
        match x {
            -1 => Some(Endpoint::Left),
            1 => Some(Endpoint::Right),
            _ => None,
        }
    }

    pub fn sign(self) -> i32 {
        match self {
            Endpoint::Left => -1,
            Endpoint::Right => 1,
        }
    }
}

/// `u^(d)(point) = target`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFunctional<T> {
    pub point: Endpoint,
    pub derivative_order: u32,
    pub target_value: T,
}

/// `T_k^(d)(+-1)` for `k = 0..n`.
///
/// Uses `T_k^(d)(1) = prod_{j<d} (k^2 - j^2) / (2j + 1)` with the integer
/// numerator and denominator formed first and a single division at the end,
/// and `T_k^(d)(-1) = (-1)^(k+d) T_k^(d)(1)`.
pub fn boundary_row<T: Real>(bc: &BoundaryFunctional<T>, n: usize) -> Vec<T> {
    let d = bc.derivative_order as i64;
    let denom: i64 = (0..d).map(|j| 2 * j + 1).product();
    (0..n)
        .map(|k| {
            let k = k as i64;
            let mut num = T::one();
            for j in 0..d {
                num *= T::from_i64(k * k - j * j);
            }
            let value = if denom == 1 {
                num
            } else {
                num / T::from_i64(denom)
            };
            if bc.point == Endpoint::Left && (k + d) % 2 == 1 {
                -value
            } else {
                value
            }
        })
        .collect()
}

/// Two-norm of the Chebyshev coefficients, equal to the `1/sqrt(1 - x^2)`
/// weighted norm of the function up to a constant.
///
/// Scaled so that tiny vectors (down to subnormals) do not underflow to zero.
pub fn weighted_norm<T: Real>(s: &UltrasphericalSeries<T>) -> T {
    debug_assert_eq!(s.lambda, 0);
    norm2(&s.coeffs)
}

/// Scaled Euclidean norm; exactly zero only for the zero vector.
pub fn norm2<T: Real>(v: &[T]) -> T {
    let scale = v.iter().map(|c| c.abs()).fold(T::zero(), T::max_of);
    if scale.is_zero() {
        return T::zero();
    }
    let mut sum = T::zero();
    for c in v {
        let r = c.clone() / scale.clone();
        sum += r.clone() * r;
    }
    scale * sum.sqrt()
}

pub fn norm_inf<T: Real>(v: &[T]) -> T {
    v.iter().map(|c| c.abs()).fold(T::zero(), T::max_of)
}
