//! Airy function of the first kind at configurable precision.
//!
//! `Ai(x) = Ai(0) F(x) + Ai'(0) G(x)` where `F` and `G` are the two Maclaurin
//! series of the Airy equation. The series converge everywhere but cancel
//! heavily for large `|x|`, so they are summed at an elevated precision that
//! grows with the expected cancellation, then rounded to the target.

use dashu_float::ops::Abs;
use dashu_float::round::mode::HalfEven;
use dashu_float::DBig;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::{BigFloat, PrecisionLevel, Real};

/// Largest argument magnitude the series path is validated for.
pub const MAX_ARGUMENT: f64 = 64.0;

/// Number of consecutive negligible terms that ends the summation.
const TAIL_TERMS: usize = 40;

/// Ai(0) = 3^(-2/3) / Gamma(2/3).
const AI_AT_ZERO: &str = concat!(
    "0.3550280538878172392600631860041831763979791741991772405833265103008100",
    "424501267129571742460540402716884204487303494958397582926704461619371050",
    "402400225853863840099026010357128190515682032902491696447661823279677702",
    "418989594796173489086406257323897601417640056780397387733804863176108754",
    "520253233492223889696310797677817018407651352099370413155733915331326628",
    "757170039713556080491748639102813585025352124000812058294816203628541757",
    "741156317845143845916412588241799045549908718621773627144996550359098157",
    "991051419088537861384579848172108274181279243950037034490877118980203227",
    "28645645032973350676784966",
);

/// Ai'(0) = -3^(-1/3) / Gamma(1/3).
const AI_PRIME_AT_ZERO: &str = concat!(
    "-0.258819403792806798405183560189203963479091138354934582210001813856102",
    "772676790280654196405827275384313371193211789133381275035952167626014785",
    "050989848419446632029644888805601878383305126950525128293342497999883570",
    "749079259060158951050944322089384059673577719328025106650170175689836578",
    "607525583113547817131862044958292721332591326821052031400011829967224451",
    "661030443855300039685359536955499592903111447673615877948315542715207827",
    "683079404466497771073745762623792283753153615982461931375049950143777995",
    "597606863018926196496920695339490111612279849614830023447216667841837884",
    "282596103460482320659223150",
);

/// Decimal digits carried by the stored constants.
const CONSTANT_DIGITS: usize = 600;

/// Outcome of one evaluation.
#[derive(Debug, Clone)]
pub struct AiryEvaluation<T> {
    pub x: T,
    pub precision: PrecisionLevel,
    pub value: T,
    /// Number of `x^3` steps summed.
    pub terms_used: usize,
}

fn parse_constant(s: &str, bits: usize) -> BigFloat {
    DBig::from_str(s)
        .expect("valid constant")
        .with_rounding::<HalfEven>()
        .with_base_and_precision::<2>(bits)
        .value()
}

pub(crate) fn ai_at_zero(bits: usize) -> BigFloat {
    parse_constant(AI_AT_ZERO, bits)
}

pub(crate) fn ai_prime_at_zero(bits: usize) -> BigFloat {
    parse_constant(AI_PRIME_AT_ZERO, bits)
}

/// Bits lost to cancellation when summing the series at `x`: the terms grow
/// like `exp(zeta)` with `zeta = 2/3 |x|^(3/2)` while the sum is `O(1)` for
/// negative `x` and `O(exp(-zeta))` for positive `x`.
fn cancellation_bits(x: f64) -> usize {
    let zeta = 2.0 / 3.0 * x.abs().powf(1.5);
    let nats = if x > 0.0 { 2.0 * zeta } else { zeta };
    (nats / std::f64::consts::LN_2).ceil() as usize
}

/// Working precision for a `target_bits` result at `x`.
pub fn working_bits(x: f64, target_bits: usize) -> usize {
    (4 * target_bits).max(target_bits + cancellation_bits(x) + 64)
}

/// `Ai(x)` rounded to `target_bits` bits.
pub fn airy_ai_big(x: &BigFloat, target_bits: usize) -> Result<AiryEvaluation<BigFloat>> {
    let xf = x.to_f64().value();
    if xf.is_nan() || xf.abs() > MAX_ARGUMENT {
        return Err(Error::OutOfRange(xf));
    }
    let work = working_bits(xf, target_bits);
    let constant_bits = (CONSTANT_DIGITS as f64 * std::f64::consts::LOG2_10) as usize;
    if target_bits + cancellation_bits(xf) + 32 > constant_bits {
        return Err(Error::UnsupportedPrecision(format!(
            "Ai at x = {xf} with {target_bits} bits needs more than the {constant_bits} stored bits"
        )));
    }

    let xw = x.clone().with_precision(work).value();
    let x3 = &(&xw * &xw) * &xw;
    // a: terms c1 * 3^k (1/3)_k x^(3k) / (3k)!, b: c2 * 3^k (2/3)_k x^(3k+1) / (3k+1)!
    let mut a = ai_at_zero(work);
    let mut b = &ai_prime_at_zero(work) * &xw;
    let mut sum = &a + &b;
    let tol = BigFloat::from_parts(1.into(), 1 - target_bits as isize)
        .with_precision(work)
        .value();

    let mut quiet = 0;
    let mut k: u64 = 0;
    while quiet < TAIL_TERMS {
        let p = 3 * k;
        a = &(&a * &x3) / &BigFloat::from((p + 2) * (p + 3));
        b = &(&b * &x3) / &BigFloat::from((p + 3) * (p + 4));
        let term = &a + &b;
        sum = &sum + &term;
        k += 1;
        if term.clone().abs() <= &tol * &sum.clone().abs() {
            quiet += 1;
        } else {
            quiet = 0;
        }
    }
    Ok(AiryEvaluation {
        x: x.clone(),
        precision: PrecisionLevel::Extended { bits: target_bits },
        value: sum.with_precision(target_bits).value(),
        terms_used: k as usize,
    })
}

/// `Ai(x)` at the precision of `T`, correctly rounded up to the series accuracy.
pub fn airy_ai<T: Real>(x: &T) -> Result<T> {
    airy_ai_eval(x).map(|e| e.value)
}

pub fn airy_ai_eval<T: Real>(x: &T) -> Result<AiryEvaluation<T>> {
    let bits = T::LEVEL.significand_bits();
    let eval = airy_ai_big(&x.to_big(), bits)?;
    Ok(AiryEvaluation {
        x: x.clone(),
        precision: T::LEVEL,
        value: T::from_big(&eval.value),
        terms_used: eval.terms_used,
    })
}

/// `(1/mu)^(1/3)` at `bits` bits by Newton's iteration on `y^3 = 1/mu`.
pub fn inverse_cube_root(mu: &BigFloat, bits: usize) -> BigFloat {
    let mu = mu.clone().with_precision(bits + 32).value();
    let target = &BigFloat::ONE.with_precision(bits + 32).value() / &mu;
    let guess = target.to_f64().value().cbrt();
    let mut y = BigFloat::try_from(guess)
        .expect("finite")
        .with_precision(bits + 32)
        .value();
    let three = BigFloat::from(3u8);
    let two = BigFloat::from(2u8);
    // Quadratic convergence from 50 bits; a few extra rounds are harmless.
    let rounds = ((bits + 32) as f64 / 50.0).log2().ceil() as usize + 3;
    for _ in 0..rounds {
        let y2 = &y * &y;
        y = &(&(&two * &y) + &(&target / &y2)) / &three;
    }
    y.with_precision(bits).value()
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::scalar::{Ext, Extended};

    type Ext2k = Ext<2200>;

    fn big(x: f64) -> BigFloat {
        BigFloat::try_from(x).unwrap()
    }

    /// Gamma(z) for 0 < z < 1 from the lower incomplete gamma series at a
    /// large cut `X`: Gamma(z) = X^z e^-X sum_k X^k / (z (z+1) ... (z+k)) + O(X^(z-1) e^-X).
    fn gamma_oracle(z_num: u32, z_den: u32, bits: usize) -> BigFloat {
        let p = bits + 64;
        let one = BigFloat::ONE.with_precision(p).value();
        let z = &(&one * &BigFloat::from(z_num)) / &BigFloat::from(z_den);
        let cut = BigFloat::from(1500u32).with_precision(p).value();
        let mut term = &one / &z;
        let mut sum = term.clone();
        let tol = BigFloat::from_parts(1.into(), -(p as isize))
            .with_precision(p)
            .value();
        let mut k = 1u32;
        loop {
            let denom = &z + &BigFloat::from(k);
            term = &(&term * &cut) / &denom;
            sum = &sum + &term;
            if k > 1500 && term <= &tol * &sum {
                break;
            }
            k += 1;
        }
        let prefactor = (&(&z * &cut.ln()) - &cut).exp();
        &prefactor * &sum
    }

    fn assert_close(a: &BigFloat, b: &BigFloat, rel_bits: isize) {
        let diff = (a - b).abs();
        let scale = b.clone().abs();
        let tol = &scale * &BigFloat::from_parts(1.into(), -rel_bits);
        assert!(
            diff <= tol,
            "difference {} exceeds 2^-{rel_bits}",
            diff.to_f64().value()
        );
    }

    #[test]
    fn stored_constants_match_gamma_oracle() {
        let bits = 2100;
        let p = bits + 64;
        let g13 = gamma_oracle(1, 3, bits);
        let g23 = gamma_oracle(2, 3, bits);
        let ln3 = BigFloat::from(3u8).with_precision(p).value().ln();
        let third = &BigFloat::ONE.with_precision(p).value() / &BigFloat::from(3u8);
        let c1 = &(-(&(&ln3 * &third) * &BigFloat::from(2u8))).exp() / &g23;
        let c2 = -(&(-(&ln3 * &third)).exp() / &g13);
        // Reflection: Gamma(1/3) Gamma(2/3) = 2 pi / sqrt 3.
        let pi = BigFloat::pi(p);
        let refl =
            &(&pi * &BigFloat::from(2u8)) / &BigFloat::from(3u8).with_precision(p).value().sqrt();
        assert_close(&(&g13 * &g23), &refl, 2000);

        // 600 digits ~ 1993 bits; allow the last few digits to differ.
        assert_close(&ai_at_zero(p), &c1, 1950);
        assert_close(&ai_prime_at_zero(p), &c2, 1950);
        assert_eq!(ai_at_zero(53).to_f64().value(), 0.3550280538878172);
        assert_eq!(ai_prime_at_zero(53).to_f64().value(), -0.2588194037928068);
    }

    /// Closed-form Maclaurin coefficients with Pochhammer symbols, independent
    /// of the recurrence used by the implementation.
    fn closed_form_terms(x: &Extended, count: u64) -> (Extended, Extended) {
        let c1 = Extended::from_big(&ai_at_zero(512));
        let c2 = Extended::from_big(&ai_prime_at_zero(512));
        let mut value = Extended::zero();
        let mut second = Extended::zero();
        for k in 0..count {
            let mut poch13 = Extended::one();
            let mut poch23 = Extended::one();
            for j in 0..k {
                poch13 *= Extended::ratio(3 * j as i64 + 1, 3);
                poch23 *= Extended::ratio(3 * j as i64 + 2, 3);
            }
            let mut pow3k = Extended::one();
            for _ in 0..k {
                pow3k *= Extended::from_i64(3);
            }
            let fact =
                |n: u64| (1..=n).fold(Extended::one(), |acc, i| acc * Extended::from_i64(i as i64));
            let xpow = |e: u64| (0..e).fold(Extended::one(), |acc, _| acc * x.clone());
            let p = 3 * k;
            let a = c1.clone() * pow3k.clone() * poch13 / fact(p);
            let b = c2.clone() * pow3k * poch23 / fact(p + 1);
            value += a.clone() * xpow(p) + b.clone() * xpow(p + 1);
            if p >= 2 {
                second += Extended::from_i64((p * (p - 1)) as i64) * a * xpow(p - 2);
            }
            second += Extended::from_i64(((p + 1) * p) as i64)
                * b
                * if p >= 1 {
                    xpow(p - 1)
                } else {
                    Extended::zero()
                };
        }
        (value, second)
    }

    #[test]
    fn satisfies_the_airy_equation() {
        for x in [-5.0, -1.5, 0.0, 0.5, 2.0, 5.0] {
            let xe = Extended::from_f64(x);
            let (value, second) = closed_form_terms(&xe, 90);
            let residual = (second.clone() - xe.clone() * value.clone()).abs();
            let scale =
                second.abs() + (xe.clone() * value.clone()).abs() + Extended::from_f64(1e-300);
            assert!(residual.to_f64() <= 1e-30 * scale.to_f64(), "x = {x}");
            let ai = airy_ai(&xe).unwrap();
            let rel = ((ai.clone() - value.clone()).abs() / value.abs()).to_f64();
            assert!(rel < 1e-60, "x = {x}: {rel}");
        }
    }

    #[test]
    fn value_at_zero() {
        assert_eq!(airy_ai(&0.0).unwrap(), 0.3550280538878172);
        let e = airy_ai_eval(&Extended::zero()).unwrap();
        assert_eq!(e.value.to_f64(), 0.3550280538878172);
        assert!(e.terms_used >= TAIL_TERMS);
    }

    #[test]
    fn known_values() {
        // Reference values from an independent arbitrary-precision library.
        let cbrt100 = inverse_cube_root(&big(0.01), 300);
        let right = airy_ai_big(&cbrt100, 256).unwrap().value.to_f64().value();
        let left = airy_ai_big(&(-cbrt100), 256)
            .unwrap()
            .value
            .to_f64()
            .value();
        assert!((right / 2.4221691467447960462e-4 - 1.0).abs() < 1e-15);
        assert!((left / 0.351913571284755999313 - 1.0).abs() < 1e-15);

        let mu = crate::scalar::parse_big("1e-5", 300).unwrap();
        let s = inverse_cube_root(&mu, 300);
        let right = airy_ai_big(&s, 256).unwrap().value.to_f64().value();
        let left = airy_ai_big(&(-s), 256).unwrap().value.to_f64().value();
        assert!(
            (right / 2.9941241913628559524e-93 - 1.0).abs() < 1e-15,
            "{right:e}"
        );
        assert!(
            (left / -0.194262414170774708710 - 1.0).abs() < 1e-15,
            "{left}"
        );
    }

    #[test]
    fn positive_and_decreasing_on_0_10() {
        let mut prev = f64::INFINITY;
        for i in 0..=40 {
            let v = airy_ai(&(i as f64 * 0.25)).unwrap();
            assert!(v > 0.0 && v < prev, "x = {}", i as f64 * 0.25);
            prev = v;
        }
    }

    #[test]
    fn working64_is_rounded_extended() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let x: f64 = rng.gen_range(-5.0..5.0);
            let lo = airy_ai(&x).unwrap();
            let hi = airy_ai(&Extended::from_f64(x)).unwrap().to_f64();
            let ulps = (lo.to_bits() as i64 - hi.to_bits() as i64).abs();
            assert!(ulps <= 1, "x = {x}: {lo:e} vs {hi:e}");
        }
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(airy_ai(&65.0), Err(Error::OutOfRange(_))));
        assert!(airy_ai(&-64.0).is_ok());
    }

    #[test]
    fn wider_targets() {
        let x = Ext2k::from_f64(1.0);
        assert!(airy_ai(&x).is_err());
        let v = airy_ai(&Ext::<1024>::from_f64(3.0)).unwrap();
        let w = airy_ai(&Extended::from_f64(3.0)).unwrap();
        assert_eq!(v.to_f64(), w.to_f64());
    }

    #[test]
    fn cube_root() {
        let y = inverse_cube_root(&crate::scalar::parse_big("1e-3", 300).unwrap(), 256);
        assert!(
            (Extended::from_big(&y) - Extended::from_i64(10))
                .abs()
                .to_f64()
                < 1e-70
        );
    }
}
