//! Error functions, the Gaussian tail and the modified Bessel functions
//! `K₀` and `K_{-1/2}`.
//!
//! The complementary error function uses a positive-term power series below
//! `x = 1.5` and the Laplace continued fraction above it, so the scaled form
//! `erfcx(x) = e^{x²}·erfc(x)` is available without underflow for large `x`.
//! `K₀` uses its ascending series for `x ≤ 2`, Steed's continued fraction on
//! `(2, 25]` and the Hankel asymptotic expansion beyond.

use crate::error::{invalid, Result};
use crate::Real;

const SERIES_CF_SPLIT: f64 = 1.5;
const MAX_TERMS: usize = 10_000;

/// `1/√π`.
fn frac_1_sqrt_pi<T: Real>() -> T {
    T::FRAC_2_SQRT_PI() / T::lit(2.0)
}

/// `erf(x)` for small `|x|` from the alternating Taylor series.
fn erf_taylor<T: Real>(x: T) -> T {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..MAX_TERMS {
        let nf = T::from_usize(n).unwrap();
        term = -term * x2 / nf;
        let contrib = term / (T::lit(2.0) * nf + T::one());
        sum = sum + contrib;
        if contrib.abs() <= T::epsilon() * sum.abs() {
            break;
        }
    }
    sum * T::FRAC_2_SQRT_PI()
}

/// `erf(x)·e^{x²}` for moderate `x ≥ 0` from the positive-term series
/// `Σ 2ⁿ x^{2n+1} / (1·3···(2n+1))`.
fn erf_scaled_series<T: Real>(x: T) -> T {
    let two_x2 = T::lit(2.0) * x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..MAX_TERMS {
        let denom = T::lit(2.0) * T::from_usize(n).unwrap() + T::one();
        term = term * two_x2 / denom;
        sum = sum + term;
        if term <= T::epsilon() * sum {
            break;
        }
    }
    sum * T::FRAC_2_SQRT_PI()
}

/// `erfcx(x)` for `x ≥ 1.5` from the continued fraction
/// `√π·erfcx(x) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + …))))`, modified Lentz.
fn erfcx_continued_fraction<T: Real>(x: T) -> T {
    if x.is_infinite() {
        return T::zero();
    }
    let tiny = T::min_positive_value() / T::epsilon();
    let half = T::lit(0.5);
    let mut f = x;
    let mut c = f;
    let mut d = T::zero();
    for n in 1..MAX_TERMS {
        let a = half * T::from_usize(n).unwrap();
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() <= T::epsilon() {
            break;
        }
    }
    frac_1_sqrt_pi::<T>() / f
}

/// Error function.
pub fn erf<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    let ax = x.abs();
    if ax < T::lit(0.5) {
        erf_taylor(x)
    } else {
        (T::one() - erfc(ax)).copysign(x)
    }
}

/// Complementary error function `1 − erf(x)`, accurate in relative terms
/// throughout the range where it does not underflow.
pub fn erfc<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x < T::zero() {
        return T::lit(2.0) - erfc(-x);
    }
    if x < T::lit(0.5) {
        T::one() - erf_taylor(x)
    } else if x < T::lit(SERIES_CF_SPLIT) {
        T::one() - erf_scaled_series(x) * (-x * x).exp()
    } else {
        erfcx_continued_fraction(x) * (-x * x).exp()
    }
}

/// Scaled complementary error function `e^{x²}·erfc(x)`.
pub fn erfcx<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x >= T::lit(SERIES_CF_SPLIT) {
        erfcx_continued_fraction(x)
    } else if x >= T::zero() {
        (x * x).exp() - erf_scaled_series(x)
    } else {
        // erfcx(-x) = 2e^{x²} - erfcx(x)
        T::lit(2.0) * (x * x).exp() - erfcx(-x)
    }
}

/// Upper tail of the standard normal distribution, `∫ₓ^∞ φ(u) du`.
pub fn gaussian_tail<T: Real>(x: T) -> T {
    erfc(x / T::SQRT_2()) / T::lit(2.0)
}

/// Standard normal distribution function, `1 − gaussian_tail(x)`.
pub fn normal_cdf<T: Real>(x: T) -> T {
    gaussian_tail(-x)
}

/// Modified Bessel function of the second kind of order zero, `x > 0`.
pub fn bessel_k0<T: Real>(x: T) -> Result<T> {
    check_bessel_arg("x", x)?;
    if x <= T::lit(2.0) {
        Ok(k0_series(x))
    } else {
        Ok(k0_scaled_large(x) * (-x).exp())
    }
}

/// Exponentially scaled `e^{x}·K₀(x)`, `x > 0`. Does not underflow for
/// large `x`.
pub fn bessel_k0_scaled<T: Real>(x: T) -> Result<T> {
    check_bessel_arg("x", x)?;
    if x <= T::lit(2.0) {
        Ok(k0_series(x) * x.exp())
    } else {
        Ok(k0_scaled_large(x))
    }
}

/// `K_{-1/2}(y) = (π/(2y))^{1/2} e^{-y}`, `y > 0`.
pub fn bessel_k_minus_half<T: Real>(y: T) -> Result<T> {
    check_bessel_arg("y", y)?;
    Ok((T::FRAC_PI_2() / y).sqrt() * (-y).exp())
}

fn check_bessel_arg<T: Real>(name: &'static str, x: T) -> Result<()> {
    if x > T::zero() && !x.is_nan() {
        Ok(())
    } else {
        Err(invalid(name, format!("Bessel K argument must be > 0, got {x}")))
    }
}

/// `K₀(x) = −(ln(x/2) + γ)·I₀(x) + Σ_{k≥1} (x²/4)^k/(k!)² · H_k`.
fn k0_series<T: Real>(x: T) -> T {
    let q = x * x / T::lit(4.0);
    let mut term = T::one();
    let mut i0 = T::one();
    let mut harmonic = T::zero();
    let mut tail = T::zero();
    for k in 1..MAX_TERMS {
        let kf = T::from_usize(k).unwrap();
        term = term * q / (kf * kf);
        harmonic = harmonic + kf.recip();
        i0 = i0 + term;
        let contrib = term * harmonic;
        tail = tail + contrib;
        if term <= T::epsilon() * i0 && contrib <= T::epsilon() * tail {
            break;
        }
    }
    -((x / T::lit(2.0)).ln() + T::euler_gamma()) * i0 + tail
}

fn k0_scaled_large<T: Real>(x: T) -> T {
    if x > T::lit(25.0) {
        k0_scaled_asymptotic(x)
    } else {
        k0_scaled_steed(x)
    }
}

/// Steed's method for the second continued fraction (Temme's CF2), order 0.
fn k0_scaled_steed<T: Real>(x: T) -> T {
    let two = T::lit(2.0);
    let mut b = two * (T::one() + x);
    let mut d = b.recip();
    let mut delh = d;
    let mut q1 = T::zero();
    let mut q2 = T::one();
    let a1 = T::lit(0.25);
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = T::one() + q * delh;
    for i in 2..MAX_TERMS {
        let fi = T::from_usize(i).unwrap();
        a = a - two * (fi - T::one());
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q = q + c * qnew;
        b = b + two;
        d = (b + a * d).recip();
        delh = (b * d - T::one()) * delh;
        let dels = q * delh;
        s = s + dels;
        if (dels / s).abs() < T::epsilon() {
            break;
        }
    }
    (T::FRAC_PI_2() / x).sqrt() / s
}

/// `e^x K₀(x) ~ √(π/(2x)) Σ (−1)^k [1²·3²···(2k−1)²] / (k! (8x)^k)`.
fn k0_scaled_asymptotic<T: Real>(x: T) -> T {
    let mut term = T::one();
    let mut sum = T::one();
    for k in 1..60 {
        let kf = T::from_usize(k).unwrap();
        let odd = T::lit(2.0) * kf - T::one();
        let next = -term * odd * odd / (T::lit(8.0) * kf * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum = sum + term;
        if term.abs() <= T::epsilon() * sum.abs() {
            break;
        }
    }
    (T::FRAC_PI_2() / x).sqrt() * sum
}
