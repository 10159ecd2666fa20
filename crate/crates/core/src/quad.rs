//! Adaptive Gauss–Kronrod quadrature.
//!
//! Finite intervals are first mapped through `t = a + (b−a)(3u² − 2u³)`,
//! whose Jacobian `6u(1−u)` vanishes at both ends. An endpoint factor
//! `(t−a)^α` becomes `u^{2α+1}`, so the `t^{-1/2}`-type singularities of the
//! first-passage integrands turn into smooth integrands. The mapped integral
//! is then refined by global bisection of the subinterval with the largest
//! 15-point Kronrod error estimate.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::QuadResult;
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSettings<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_evaluations: usize,
}

impl<T: Real> Default for QuadSettings<T> {
    fn default() -> Self {
        Self {
            // f32 cannot resolve 1e-9; keep the target a few ulps above ε.
            rel_tol: T::lit(1e-9).max(T::lit(100.0) * T::epsilon()),
            abs_tol: T::lit(1e-12),
            max_evaluations: 1_000_000,
        }
    }
}

impl<T: Real> QuadSettings<T> {
    pub fn new(rel_tol: T, abs_tol: T, max_evaluations: usize) -> Result<Self> {
        let s = Self {
            rel_tol,
            abs_tol,
            max_evaluations,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_rel_tol(mut self, rel_tol: T) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > T::zero() && self.rel_tol.is_finite()) {
            return Err(invalid("rel_tol", "must be > 0"));
        }
        if !(self.abs_tol > T::zero() && self.abs_tol.is_finite()) {
            return Err(invalid("abs_tol", "must be > 0"));
        }
        if self.max_evaluations < 100 {
            return Err(invalid("max_evaluations", "must be at least 100"));
        }
        Ok(())
    }

    fn target(&self, value: T) -> T {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

// Kronrod 15-point nodes (non-negative half) and weights, with the embedded
// 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_9,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_20,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

/// One 15-point Kronrod panel with the QUADPACK error heuristic.
fn kronrod15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let h = half * (b - a);
    let fc = f(center);
    let mut res_g = fc * T::lit(WG[3]);
    let mut res_k = fc * T::lit(WGK[7]);
    let mut res_abs = res_k.abs();
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let dx = h * T::lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let wk = T::lit(WGK[j]);
        res_k = res_k + wk * (f1 + f2);
        res_abs = res_abs + wk * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g = res_g + T::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    let mean = res_k * half;
    let mut res_asc = T::lit(WGK[7]) * (fc - mean).abs();
    for j in 0..7 {
        res_asc = res_asc + T::lit(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let integral = res_k * h;
    let res_abs = res_abs * h.abs();
    let res_asc = res_asc * h.abs();
    let mut err = ((res_k - res_g) * h).abs();
    if res_asc != T::zero() && err != T::zero() {
        let ratio = (T::lit(200.0) * err / res_asc).powf(T::lit(1.5));
        err = res_asc * ratio.min(T::one());
    }
    let floor = T::lit(50.0) * T::epsilon() * res_abs;
    if res_abs > T::min_positive_value() / (T::lit(50.0) * T::epsilon()) {
        err = err.max(floor);
    }
    (integral, err)
}

struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

impl<T: Real> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Real> Eq for Panel<T> {}
impl<T: Real> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

const INITIAL_PANELS: usize = 8;
const EVALS_PER_PANEL: usize = 15;

/// Global adaptive bisection of `∫ₐᵇ g` with no endpoint treatment.
fn adaptive<T: Real, F: Fn(T) -> T>(
    g: &F,
    a: T,
    b: T,
    settings: &QuadSettings<T>,
    budget: usize,
) -> Result<QuadResult<T>> {
    let mut heap = BinaryHeap::new();
    let mut value = T::zero();
    let mut error = T::zero();
    let mut evaluations = 0;
    let n0 = T::from_usize(INITIAL_PANELS).unwrap();
    for i in 0..INITIAL_PANELS {
        let lo = a + (b - a) * T::from_usize(i).unwrap() / n0;
        let hi = a + (b - a) * T::from_usize(i + 1).unwrap() / n0;
        let (v, e) = kronrod15(g, lo, hi);
        evaluations += EVALS_PER_PANEL;
        value = value + v;
        error = error + e;
        heap.push(Panel {
            a: lo,
            b: hi,
            value: v,
            error: e,
        });
    }
    loop {
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::NonConvergence {
                evaluations,
                error_estimate: f64::INFINITY,
            });
        }
        if error <= settings.target(value) {
            break;
        }
        if evaluations + 2 * EVALS_PER_PANEL > budget {
            return Err(Error::NonConvergence {
                evaluations,
                error_estimate: error.as_f64(),
            });
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = (worst.a + worst.b) / T::lit(2.0);
        if mid <= worst.a || mid >= worst.b {
            // Panel cannot be split further in this precision.
            heap.push(worst);
            if error <= T::lit(10.0) * settings.target(value) {
                break;
            }
            return Err(Error::NonConvergence {
                evaluations,
                error_estimate: error.as_f64(),
            });
        }
        let (v1, e1) = kronrod15(g, worst.a, mid);
        let (v2, e2) = kronrod15(g, mid, worst.b);
        evaluations += 2 * EVALS_PER_PANEL;
        value = value - worst.value + v1 + v2;
        error = error - worst.error + e1 + e2;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Recompute the totals to shed drift from the running updates.
    let (value, error) = heap
        .iter()
        .fold((T::zero(), T::zero()), |(v, e), p| (v + p.value, e + p.error));
    Ok(QuadResult {
        value,
        abs_error_estimate: error,
        evaluations,
    })
}

/// `∫ₐᵇ f(t) dt` for `f` with at worst integrable power-law singularities
/// at the endpoints. `f` is never evaluated exactly at `a` or `b`.
pub fn integrate_finite<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    settings: &QuadSettings<T>,
) -> Result<QuadResult<T>> {
    settings.validate()?;
    integrate_finite_budget(&f, a, b, settings, settings.max_evaluations)
}

fn integrate_finite_budget<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    settings: &QuadSettings<T>,
    budget: usize,
) -> Result<QuadResult<T>> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(invalid("interval", format!("need finite a < b, got ({a}, {b})")));
    }
    let width = b - a;
    let three = T::lit(3.0);
    let two = T::lit(2.0);
    let six = T::lit(6.0);
    let g = |u: T| {
        let w = u * u * (three - two * u);
        let t = if w <= T::lit(0.5) {
            a + width * w
        } else {
            // Measure from the right end so points near b keep their offset.
            let v = T::one() - u;
            b - width * v * v * (three - two * v)
        };
        if t <= a || t >= b {
            return T::zero();
        }
        f(t) * six * u * (T::one() - u) * width
    };
    adaptive(&g, T::zero(), T::one(), settings, budget)
}

const MAX_TAIL_PANELS: usize = 64;

/// Upper limit `x` solving `x²/2 = −ln(abs_tol) + 3 ln x`, capped at 45.
pub fn default_truncation<T: Real>(abs_tol: T) -> T {
    let target = -abs_tol.ln();
    let mut x = (T::lit(2.0) * target.max(T::one())).sqrt();
    for _ in 0..50 {
        let next = (T::lit(2.0) * (target + T::lit(3.0) * x.ln())).sqrt();
        if (next - x).abs() <= T::epsilon() * x {
            x = next;
            break;
        }
        x = next;
    }
    x.min(T::lit(45.0))
}

/// `∫ₐ^∞ f(x) dx` for Gaussian-dominated `f`. The first panel ends at
/// [`default_truncation`]; further panels of doubling width are appended
/// until one contributes less than a tenth of the tolerance, which covers
/// integrands whose Gaussian factor is shifted or widened.
pub fn integrate_semiinfinite<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    settings: &QuadSettings<T>,
) -> Result<QuadResult<T>> {
    settings.validate()?;
    if !a.is_finite() {
        return Err(invalid("a", "lower limit must be finite"));
    }
    let width0 = default_truncation(settings.abs_tol);
    let mut budget = settings.max_evaluations;
    let first = integrate_finite_budget(&f, a, a + width0, settings, budget)?;
    budget -= first.evaluations.min(budget);
    let mut value = first.value;
    let mut error = first.abs_error_estimate;
    let mut evaluations = first.evaluations;
    let mut lo = a + width0;
    let mut width = width0;
    for _ in 0..MAX_TAIL_PANELS {
        let hi = lo + width;
        let panel = integrate_finite_budget(&f, lo, hi, settings, budget).map_err(|e| match e {
            Error::NonConvergence { error_estimate, .. } => Error::NonConvergence {
                evaluations: settings.max_evaluations,
                error_estimate,
            },
            other => other,
        })?;
        budget -= panel.evaluations.min(budget);
        value = value + panel.value;
        error = error + panel.abs_error_estimate;
        evaluations += panel.evaluations;
        if panel.value.abs() <= T::lit(0.1) * settings.target(value) {
            return Ok(QuadResult {
                value,
                abs_error_estimate: error + panel.value.abs(),
                evaluations,
            });
        }
        lo = hi;
        width = width * T::lit(2.0);
    }
    Err(Error::NonConvergence {
        evaluations,
        error_estimate: f64::INFINITY,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gaussian_tail;

    fn settings() -> QuadSettings<f64> {
        QuadSettings::default()
    }

    #[test]
    fn inverse_sqrt_singularity() {
        let r = integrate_finite(|t: f64| t.powf(-0.5), 0.0, 1.0, &settings()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        assert!(r.abs_error_estimate >= 0.0);
        assert!(r.evaluations >= 1);
    }

    #[test]
    fn strong_power_singularity_both_ends() {
        // ∫₀¹ t^{-0.9} (1-t)^{-0.5} dt = B(0.1, 0.5). Near t = 1 the
        // integrand only sees 1 − t to the resolution of t, so the right
        // exponent is kept mild.
        let want = 11.323_086_975_215_753;
        let r = integrate_finite(
            |t: f64| t.powf(-0.9) * (1.0 - t).powf(-0.5),
            0.0,
            1.0,
            &QuadSettings::default().with_rel_tol(1e-8),
        );
        // Not every exponent > -1 is cheap; this one must still converge.
        let r = r.unwrap();
        assert!(((r.value - want) / want).abs() < 1e-7, "{}", r.value);
    }

    #[test]
    fn first_passage_density_mass() {
        // ∫₀¹ (1/√(2π)) t^{-3/2} e^{-1/(2t)} dt = 2·gaussian_tail(1)
        let f = |t: f64| (2.0 * std::f64::consts::PI).sqrt().recip() * t.powf(-1.5) * (-0.5 / t).exp();
        let r = integrate_finite(f, 0.0, 1.0, &settings()).unwrap();
        let want = 2.0 * gaussian_tail(1.0);
        assert!(((r.value - want) / want).abs() < 1e-10);
        assert!((r.value - 0.317_310_5).abs() < 1e-7);
    }

    #[test]
    fn bridge_three_halves_kernel() {
        // ∫₀¹ e^{-1/(2t(1-t))} / (t(1-t))^{3/2} dt = 2√(2π) e^{-2}
        let f = |t: f64| {
            let u = t * (1.0 - t);
            (-0.5 / u).exp() / u.powf(1.5)
        };
        let r = integrate_finite(f, 0.0, 1.0, &settings()).unwrap();
        let want = 2.0 * (2.0 * std::f64::consts::PI).sqrt() * (-2.0_f64).exp();
        assert!(((r.value - want) / want).abs() < 1e-10);
        assert!((r.value - 0.6783).abs() < 5e-4);
    }

    #[test]
    fn error_estimate_is_honest() {
        let s = QuadSettings::new(1e-6, 1e-14, 1_000_000).unwrap();
        for (f, want) in [
            (Box::new(|t: f64| t.sqrt().recip()) as Box<dyn Fn(f64) -> f64>, 2.0),
            (Box::new(|t: f64| (-t).exp() * (10.0 * t).cos()), -0.006_858_065_914_603_696),
        ] {
            let r = integrate_finite(f, 0.0, 1.0, &s).unwrap();
            let actual = (r.value - want).abs();
            assert!(actual <= 10.0 * r.abs_error_estimate.max(1e-15), "{actual} vs {}", r.abs_error_estimate);
            assert!(actual <= s.target(want));
        }
    }

    #[test]
    fn semi_infinite_gaussian_moments() {
        let r = integrate_semiinfinite(|x: f64| x.powi(3) * (-x * x / 2.0).exp(), 0.0, &settings()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        let r = integrate_semiinfinite(|x: f64| x * (-x * x / 2.0).exp(), 0.0, &settings()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn semi_infinite_shifted_gaussian() {
        // ∫₀^∞ e^{6x - x²/2} dx = √(2π) e^{18} Φ(6)
        let r = integrate_semiinfinite(|x: f64| (6.0 * x - x * x / 2.0).exp(), 0.0, &settings()).unwrap();
        let want = (2.0 * std::f64::consts::PI).sqrt() * 18f64.exp() * (1.0 - gaussian_tail(6.0));
        assert!(((r.value - want) / want).abs() < 1e-9);
    }

    #[test]
    fn semi_infinite_wide_gaussian() {
        // ∫₀^∞ x e^{-κx²/2} dx = 1/κ with κ = 1e-4
        let k = 1e-4;
        let r = integrate_semiinfinite(|x: f64| x * (-k * x * x / 2.0).exp(), 0.0, &settings()).unwrap();
        assert!(((r.value - 1.0 / k) / (1.0 / k)).abs() < 1e-9);
    }

    #[test]
    fn truncation_point() {
        let x = default_truncation(1e-12_f64);
        assert!((x * x / 2.0 - (27.631_021_115_928_547 + 3.0 * x.ln())).abs() < 1e-9);
        assert_eq!(default_truncation(1e-300_f64).min(45.0), default_truncation(1e-300_f64));
    }

    #[test]
    fn non_convergence_reported() {
        let s = QuadSettings::new(1e-14, 1e-300, 200).unwrap();
        let err = integrate_finite(|t: f64| (1.0 / t).sin() / t, 0.0, 1.0, &s).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn rejects_bad_settings_and_intervals() {
        assert!(QuadSettings::new(0.0, 1e-12, 1000).is_err());
        assert!(QuadSettings::new(1e-9, 1e-12, 10).is_err());
        assert!(integrate_finite(|t: f64| t, 1.0, 1.0, &settings()).is_err());
        assert!(integrate_finite(|t: f64| t, 2.0, 1.0, &settings()).is_err());
    }
}
