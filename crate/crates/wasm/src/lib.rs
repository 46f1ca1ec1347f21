//! Browser bindings: solve the Airy problem, sample the solution and compute
//! the Cauchy error curve. Each binding wraps a plain function so the logic
//! is testable off the browser.

use ultraspherical::diagnostics::{cauchy_error, geometric_grid, CauchyFactor};
use ultraspherical::problem::airy_problem;
use ultraspherical::{assemble, qr_factor, OdeProblem, UltrasphericalSeries};
use wasm_bindgen::prelude::*;

/// Largest size accepted from the page.
pub const MAX_N: usize = 20_000;

fn airy(mu: &str) -> Result<OdeProblem<f64>, String> {
    airy_problem(mu)
        .and_then(|s| s.instantiate())
        .map_err(|e| e.to_string())
}

fn check_size(n: usize) -> Result<(), String> {
    if n > MAX_N {
        Err(format!("n = {n} exceeds the demo limit {MAX_N}"))
    } else {
        Ok(())
    }
}

/// Chebyshev coefficients of the solution of `mu u'' - x u = 0` at size `n`.
pub fn airy_coefficients(mu: &str, n: usize) -> Result<Vec<f64>, String> {
    check_size(n)?;
    let p = airy(mu)?;
    let sys = assemble(&p, n).map_err(|e| e.to_string())?;
    qr_factor(&sys.a)
        .and_then(|qr| qr.solve(&sys.f))
        .map_err(|e| e.to_string())
}

/// Values of the Chebyshev series at `points` equispaced nodes of `[-1, 1]`.
pub fn sample(coeffs: &[f64], points: usize) -> Vec<f64> {
    let s = UltrasphericalSeries::chebyshev(coeffs.to_vec());
    let last = points.saturating_sub(1).max(1) as f64;
    (0..points)
        .map(|i| s.eval(&(-1.0 + 2.0 * i as f64 / last)))
        .collect()
}

/// Interleaved `[n_0, e_0, n_1, e_1, ...]` of Cauchy errors on a geometric grid.
pub fn cauchy_curve(mu: &str, n_min: usize, n_max: usize, factor: f64) -> Result<Vec<f64>, String> {
    check_size(n_max)?;
    let p = airy(mu)?;
    let grid = geometric_grid(n_min, n_max, factor).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(2 * grid.len());
    for n in grid {
        let e = cauchy_error(&p, n, CauchyFactor::default()).map_err(|e| e.to_string())?;
        out.push(n as f64);
        out.push(e);
    }
    Ok(out)
}

#[wasm_bindgen(js_name = solveAiry)]
pub fn solve_airy(mu: &str, n: usize) -> Result<Vec<f64>, JsError> {
    airy_coefficients(mu, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = sampleSolution)]
pub fn sample_solution(coeffs: &[f64], points: usize) -> Vec<f64> {
    sample(coeffs, points)
}

#[wasm_bindgen(js_name = cauchyCurve)]
pub fn cauchy_curve_js(
    mu: &str,
    n_min: usize,
    n_max: usize,
    factor: f64,
) -> Result<Vec<f64>, JsError> {
    cauchy_curve(mu, n_min, n_max, factor).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn airy_value_at_the_midpoint() {
        let c = airy_coefficients("1e-2", 100).unwrap();
        let v = sample(&c, 3);
        assert!((v[1] - 0.355_028_053_887_817_2).abs() < 1e-12);
    }

    #[test]
    fn cauchy_curve_pairs_sizes_with_errors() {
        let c = cauchy_curve("1e-2", 64, 400, 1.5).unwrap();
        assert_eq!(c.len() % 2, 0);
        assert_eq!(c[0], 64.0);
        assert_eq!(*c.last().unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(airy_coefficients("-1", 50).is_err());
        assert!(airy_coefficients("1e-2", MAX_N + 1).is_err());
        assert!(cauchy_curve("1e-2", 100, 50, 1.1).is_err());
    }
}
