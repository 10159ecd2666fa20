//! Closed forms and quadrature formulas for the expected hitting time.
//!
//! Fixed-target functions take dimensional inputs and return a time.
//! Gaussian-target functions take the dimensionless rate `s` or period `𝒯`
//! and return a constant in units of `σ²/D` (d = 1, 2) or `σ³/D` (d = 3);
//! in d = 2 and d = 3 that constant is the `ε₀ → 0` limit of
//! `E/|log ε₀|` and `ε₀·E` respectively.
//!
//! The periodic-reset formulas contain time integrals of the heat kernel
//! `∫₀ᵀ t^{-k} e^{-c/t} dt` for `k ∈ {1/2, 3/2}`. These have erfc closed
//! forms (see [`heat_kernel_integral`]), which keeps every Gaussian-target
//! formula a single one-dimensional quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::model::{
    norm, to_dimensionless, Dimension, DimensionlessParams, ExpectedTime, Mechanism,
    MechanismKind, SearchSpec,
};
use crate::quad::{integrate_semiinfinite, QuadSettings};
use crate::specfun::{bessel_k0_scaled, erf, erfc, erfcx};
use crate::Real;

/// Distance from a divergence threshold inside which a formula reports
/// [`ExpectedTime::Divergent`] instead of a huge number.
pub const DIVERGENCE_GUARD: f64 = 1e-9;

fn sqrt_two_pi<T: Real>() -> T {
    (T::lit(2.0) * T::PI()).sqrt()
}

fn require_nonnegative<T: Real>(name: &'static str, value: T) -> Result<()> {
    if value.is_finite() && value >= T::zero() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and >= 0, got {value}")))
    }
}

fn require_finite<T: Real>(name: &'static str, value: T) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, "must be finite"))
    }
}

fn outside_ball<T: Real>(a: T, eps0: T) -> Result<()> {
    require_positive("eps0", eps0)?;
    require_finite("a", a)?;
    if a.abs() <= eps0 {
        return Err(invalid("a", "|a| must exceed the detection radius eps0"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Heat-kernel time integrals

/// Exponent `k` of `t^{-k}` in `∫₀ᵀ t^{-k} e^{-c/t} dt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelPower {
    Half,
    ThreeHalves,
}

/// `∫₀ᵀ t^{-k} e^{-c/t} dt` in closed form, `c ≥ 0`.
///
/// For `k = 3/2` this is `√(π/c)·erfc(√(c/T))` (infinite at `c = 0`); the
/// `k = 1/2` case follows by parts: `2√T e^{-c/T} − 2c·I_{3/2}`.
pub fn heat_kernel_integral<T: Real>(power: KernelPower, c: T, period: T) -> Result<T> {
    require_nonnegative("c", c)?;
    require_positive("period", period)?;
    let z = (c / period).sqrt();
    Ok(match power {
        KernelPower::ThreeHalves => {
            if c == T::zero() {
                T::infinity()
            } else {
                (T::PI() / c).sqrt() * erfc(z)
            }
        }
        KernelPower::Half => {
            if c == T::zero() {
                T::lit(2.0) * period.sqrt()
            } else {
                let e = (-c / period).exp();
                T::lit(2.0) * period.sqrt() * e - T::lit(2.0) * c * (T::PI() / c).sqrt() * erfc(z)
            }
        }
    })
}

/// `I_{1/2}/I_{3/2}`: conditional mean of the hitting time given a hit
/// within one period. Written with `erfcx` so it stays finite when both
/// integrals underflow.
pub fn heat_kernel_ratio<T: Real>(c: T, period: T) -> Result<T> {
    require_nonnegative("c", c)?;
    require_positive("period", period)?;
    Ok(kernel_ratio(c, period))
}

fn kernel_ratio<T: Real>(c: T, period: T) -> T {
    if c == T::zero() {
        return T::zero();
    }
    let z = (c / period).sqrt();
    T::lit(2.0) * (c * period).sqrt() / (T::PI().sqrt() * erfcx(z)) - T::lit(2.0) * c
}

// ---------------------------------------------------------------------------
// Densities and probabilities

/// Rejects everything but `t ∈ (0, ∞)`.
fn check_time<T: Real>(t: T) -> Result<()> {
    require_positive("t", t)
}

/// First-passage density of 1D Brownian motion from 0 to `a`.
pub fn fpt_density_1d<T: Real>(t: T, a: T, diffusion: T) -> Result<T> {
    check_time(t)?;
    require_positive("diffusion", diffusion)?;
    require_finite("a", a)?;
    if a == T::zero() {
        return Err(invalid("a", "must be nonzero"));
    }
    let a = a.abs();
    Ok(a / ((T::lit(2.0) * T::PI() * diffusion).sqrt() * t.powf(T::lit(1.5)))
        * (-a * a / (T::lit(2.0) * diffusion * t)).exp())
}

/// Sub-density of the first hit of `a` by a bridge of length `period`.
pub fn bridge_fpt_subdensity_1d<T: Real>(t: T, a: T, diffusion: T, period: T) -> Result<T> {
    require_positive("period", period)?;
    check_time(t)?;
    if t >= period {
        return Err(invalid("t", "must lie in (0, T)"));
    }
    require_positive("diffusion", diffusion)?;
    require_finite("a", a)?;
    if a == T::zero() {
        return Err(invalid("a", "must be nonzero"));
    }
    let a = a.abs();
    let u = T::one() - t / period;
    Ok(a * (-a * a / (T::lit(2.0) * diffusion * t * u)).exp()
        / ((T::lit(2.0) * T::PI() * diffusion * u).sqrt() * t.powf(T::lit(1.5))))
}

/// Sub-density of the first entrance of 3D Brownian motion into the
/// `ε₀`-ball around `a`; total mass `ε₀/|a|`.
pub fn fpt_subdensity_3d<T: Real>(t: T, a: T, eps0: T, diffusion: T) -> Result<T> {
    check_time(t)?;
    require_positive("diffusion", diffusion)?;
    outside_ball(a, eps0)?;
    let a = a.abs();
    let gap = a - eps0;
    Ok(eps0 / a * gap / ((T::lit(2.0) * T::PI() * diffusion).sqrt() * t.powf(T::lit(1.5)))
        * (-gap * gap / (T::lit(2.0) * diffusion * t)).exp())
}

/// Probability that a bridge of length `period` reaches level `a`.
pub fn bridge_crossing_prob<T: Real>(period: T, diffusion: T, a: T) -> Result<T> {
    require_positive("period", period)?;
    require_positive("diffusion", diffusion)?;
    require_finite("a", a)?;
    Ok((-T::lit(2.0) * a * a / (diffusion * period)).exp())
}

// ---------------------------------------------------------------------------
// Fixed targets

pub fn poisson_fixed_1d<T: Real>(rate: T, diffusion: T, a: T) -> Result<ExpectedTime<T>> {
    require_positive("rate", rate)?;
    require_positive("diffusion", diffusion)?;
    require_finite("a", a)?;
    let k = (T::lit(2.0) * rate / diffusion).sqrt();
    Ok(ExpectedTime::Finite((k * a.abs()).exp_m1() / rate))
}

/// Two-dimensional Poissonian reset, detection radius `eps0`; `a = |a|`.
pub fn poisson_fixed_2d<T: Real>(rate: T, diffusion: T, a: T, eps0: T) -> Result<ExpectedTime<T>> {
    require_positive("rate", rate)?;
    require_positive("diffusion", diffusion)?;
    outside_ball(a, eps0)?;
    let k = (rate / diffusion).sqrt();
    let (x_eps, x_a) = (k * eps0, k * a.abs());
    // K₀(x_eps)/K₀(x_a) with both factors scaled by eᵡ.
    let ratio = bessel_k0_scaled(x_eps)? / bessel_k0_scaled(x_a)? * (x_a - x_eps).exp();
    Ok(ExpectedTime::Finite((ratio - T::one()) / rate))
}

/// Three-dimensional Poissonian reset, detection radius `eps0`; `a = |a|`.
pub fn poisson_fixed_3d<T: Real>(rate: T, diffusion: T, a: T, eps0: T) -> Result<ExpectedTime<T>> {
    require_positive("rate", rate)?;
    require_positive("diffusion", diffusion)?;
    outside_ball(a, eps0)?;
    let a = a.abs();
    let k = (rate / diffusion).sqrt();
    Ok(ExpectedTime::Finite(
        (a / eps0 * (k * (a - eps0)).exp() - T::one()) / rate,
    ))
}

pub fn bridge_fixed_1d<T: Real>(period: T, diffusion: T, a: T) -> Result<ExpectedTime<T>> {
    require_positive("period", period)?;
    require_positive("diffusion", diffusion)?;
    require_finite("a", a)?;
    let a = a.abs();
    let dt = diffusion * period;
    let first = period * (T::lit(2.0) * a * a / dt).exp_m1();
    // (2|a|/D) e^{2a²/(DT)} ∫_{|a|}^∞ e^{-2x²/(DT)} dx, via erfcx.
    let w = a * (T::lit(2.0) / dt).sqrt();
    let second = a / diffusion * (T::PI() * dt / T::lit(2.0)).sqrt() * erfcx(w);
    Ok(ExpectedTime::Finite(first + second))
}

/// Two-sided bounds for the 3D bridge; no exact value is available.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BridgeBounds<T> {
    pub lower: ExpectedTime<T>,
    pub upper: ExpectedTime<T>,
}

impl<T: Real> BridgeBounds<T> {
    pub fn contains(&self, x: T) -> bool {
        self.lower.objective() <= x && x <= self.upper.objective()
    }
}

pub fn bridge_fixed_3d_bounds<T: Real>(
    period: T,
    diffusion: T,
    a: T,
    eps0: T,
) -> Result<BridgeBounds<T>> {
    require_positive("period", period)?;
    require_positive("diffusion", diffusion)?;
    outside_ball(a, eps0)?;
    let a = a.abs();
    let two = T::lit(2.0);
    let dt = diffusion * period;
    let (plus, minus) = (a + eps0, a - eps0);
    let shift = T::lit(8.0) * a * eps0 / dt;
    let upper = period * (plus / minus * a / (two * eps0) * (two * plus * plus / dt).exp() - T::one())
        + period * plus / (two * minus) * shift.exp();
    let lower = period * (a / (two * eps0) * (two * minus * minus / dt).exp() - T::one())
        + period * minus / (two * plus) * (-shift).exp();
    Ok(BridgeBounds {
        lower: ExpectedTime::Finite(lower),
        upper: ExpectedTime::Finite(upper),
    })
}

/// Geometric-cycle formula shared by the periodic cases: `p` is the hit
/// probability per period and `c = b²/(2D)` the kernel constant.
fn periodic_cycles<T: Real>(period: T, p: T, c: T) -> T {
    period * (T::one() / p - T::one()) + kernel_ratio(c, period)
}

pub fn periodic_fixed_1d<T: Real>(period: T, diffusion: T, a: T) -> Result<ExpectedTime<T>> {
    require_positive("period", period)?;
    require_positive("diffusion", diffusion)?;
    require_finite("a", a)?;
    if a == T::zero() {
        return Err(invalid("a", "must be nonzero"));
    }
    let a = a.abs();
    let p = erfc(a / (T::lit(2.0) * diffusion * period).sqrt());
    let c = a * a / (T::lit(2.0) * diffusion);
    Ok(ExpectedTime::Finite(periodic_cycles(period, p, c)))
}

/// Three-dimensional periodic reset; `a = |a|`.
pub fn periodic_fixed_3d<T: Real>(period: T, diffusion: T, a: T, eps0: T) -> Result<ExpectedTime<T>> {
    require_positive("period", period)?;
    require_positive("diffusion", diffusion)?;
    outside_ball(a, eps0)?;
    let a = a.abs();
    let gap = a - eps0;
    let p = eps0 / a * erfc(gap / (T::lit(2.0) * diffusion * period).sqrt());
    let c = gap * gap / (T::lit(2.0) * diffusion);
    Ok(ExpectedTime::Finite(periodic_cycles(period, p, c)))
}

/// Fixed-target query; `a` has one coordinate per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedTargetQuery<T> {
    pub spec: SearchSpec<T>,
    pub a: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FixedOutcome<T> {
    Exact { value: ExpectedTime<T> },
    Bounds { bounds: BridgeBounds<T> },
}

pub fn fixed_expected_time<T: Real>(q: &FixedTargetQuery<T>) -> Result<FixedOutcome<T>> {
    let spec = &q.spec;
    if q.a.len() != spec.dimension().get() {
        return Err(invalid("a", "coordinate count must equal the dimension"));
    }
    let d = spec.diffusion();
    let eps0 = spec.detection_radius();
    let exact = |v: Result<ExpectedTime<T>>| v.map(|value| FixedOutcome::Exact { value });
    match spec.dimension() {
        Dimension::One => {
            let a = q.a[0];
            match spec.mechanism() {
                Mechanism::Poissonian { rate } => exact(poisson_fixed_1d(rate, d, a)),
                Mechanism::Bridge { period } => exact(bridge_fixed_1d(period, d, a)),
                Mechanism::Periodic { period } => exact(periodic_fixed_1d(period, d, a)),
            }
        }
        Dimension::Two => {
            let a = norm(&q.a);
            match spec.mechanism() {
                Mechanism::Poissonian { rate } => exact(poisson_fixed_2d(rate, d, a, eps0)),
                m => Err(Error::UnsupportedCombination {
                    dimension: 2,
                    mechanism: m.kind().name(),
                }),
            }
        }
        Dimension::Three => {
            let a = norm(&q.a);
            match spec.mechanism() {
                Mechanism::Poissonian { rate } => exact(poisson_fixed_3d(rate, d, a, eps0)),
                Mechanism::Periodic { period } => exact(periodic_fixed_3d(period, d, a, eps0)),
                Mechanism::Bridge { period } => {
                    bridge_fixed_3d_bounds(period, d, a, eps0).map(|bounds| FixedOutcome::Bounds { bounds })
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Gaussian targets, dimensionless

fn divergent_at_or_below<T: Real>(x: T, threshold: f64) -> bool {
    x <= T::lit(threshold + DIVERGENCE_GUARD)
}

/// 1D Poissonian reset, units `σ²/D`.
pub fn gauss_poisson_1d<T: Real>(s: T) -> Result<T> {
    require_positive("s", s)?;
    Ok((s.exp_m1() + s.exp() * erf(s.sqrt())) / s)
}

/// 1D bridge reset, units `σ²/D`; divergent for `𝒯 ≤ 4`.
pub fn gauss_bridge_1d<T: Real>(script_t: T) -> Result<ExpectedTime<T>> {
    require_positive("script_t", script_t)?;
    if divergent_at_or_below(script_t, 4.0) {
        return Ok(ExpectedTime::Divergent);
    }
    let t = script_t;
    let root = t.sqrt();
    Ok(ExpectedTime::Finite(
        t * (t / (t - T::lit(4.0))).sqrt() - t + t / (T::lit(2.0) + root),
    ))
}

/// 1D periodic reset, units `σ²/D`; divergent for `𝒯 ≤ 1`.
pub fn gauss_periodic_1d<T: Real>(script_t: T) -> Result<ExpectedTime<T>> {
    gauss_periodic_1d_with(script_t, &QuadSettings::default())
}

pub fn gauss_periodic_1d_with<T: Real>(
    script_t: T,
    settings: &QuadSettings<T>,
) -> Result<ExpectedTime<T>> {
    require_positive("script_t", script_t)?;
    if divergent_at_or_below(script_t, 1.0) {
        return Ok(ExpectedTime::Divergent);
    }
    let t = script_t;
    let norm = sqrt_two_pi::<T>();
    let two = T::lit(2.0);
    let kappa = T::one() - T::one() / t;
    let root = t.sqrt();
    let scale = (two * t).sqrt();
    let f = |x: T| {
        let ex = erfcx(x / scale);
        // Conditional mean of the in-period hitting time, c = x²/2.
        let ratio = x * (two * root / (norm * ex) - x);
        let first = two / norm * ratio * (-x * x / two).exp();
        // e^{-x²/2} / ∫₀^𝒯 x s^{-3/2} e^{-x²/(2s)} ds
        let second = two * t * (-kappa * x * x / two).exp() / (norm * ex);
        first + second
    };
    let r = integrate_semiinfinite(f, T::zero(), settings)?;
    Ok(ExpectedTime::Finite(r.value - t))
}

/// 3D Poissonian reset, `lim ε₀·E` in units `σ³/D`.
pub fn gauss_poisson_3d<T: Real>(s: T) -> Result<T> {
    gauss_poisson_3d_with(s, &QuadSettings::default())
}

pub fn gauss_poisson_3d_with<T: Real>(s: T, settings: &QuadSettings<T>) -> Result<T> {
    require_positive("s", s)?;
    let b = s.sqrt();
    let half = T::lit(0.5);
    let r = integrate_semiinfinite(|x: T| x * x * x * (b * x - half * x * x).exp(), T::zero(), settings)?;
    Ok(T::lit(2.0) / (sqrt_two_pi::<T>() * s) * r.value)
}

/// 3D bridge reset, `lim ε₀·E` in units `σ³/D`; divergent for `𝒯 ≤ 4`.
pub fn gauss_bridge_3d<T: Real>(script_t: T) -> Result<ExpectedTime<T>> {
    require_positive("script_t", script_t)?;
    if divergent_at_or_below(script_t, 4.0) {
        return Ok(ExpectedTime::Divergent);
    }
    let t = script_t;
    let gap = t - T::lit(4.0);
    Ok(ExpectedTime::Finite(
        T::lit(2.0) * t * t * t / (sqrt_two_pi::<T>() * gap * gap),
    ))
}

/// 3D periodic reset, `lim ε₀·E` in units `σ³/D`; divergent for `𝒯 ≤ 1`.
pub fn gauss_periodic_3d<T: Real>(script_t: T) -> Result<ExpectedTime<T>> {
    gauss_periodic_3d_with(script_t, &QuadSettings::default())
}

pub fn gauss_periodic_3d_with<T: Real>(
    script_t: T,
    settings: &QuadSettings<T>,
) -> Result<ExpectedTime<T>> {
    require_positive("script_t", script_t)?;
    if divergent_at_or_below(script_t, 1.0) {
        return Ok(ExpectedTime::Divergent);
    }
    let t = script_t;
    let two = T::lit(2.0);
    let kappa = T::one() - T::one() / t;
    let scale = (two * t).sqrt();
    let norm = sqrt_two_pi::<T>();
    // x² e^{-x²/2} / ∫₀^𝒯 s^{-3/2} e^{-x²/(2s)} ds
    let f = |x: T| x * x * x * (-kappa * x * x / two).exp() / (norm * erfcx(x / scale));
    let r = integrate_semiinfinite(f, T::zero(), settings)?;
    Ok(ExpectedTime::Finite(two * t * r.value))
}

/// 2D Poissonian reset, `lim E/|log ε₀|` in units `σ²/D`.
pub fn gauss_poisson_2d<T: Real>(s: T) -> Result<T> {
    gauss_poisson_2d_with(s, &QuadSettings::default())
}

pub fn gauss_poisson_2d_with<T: Real>(s: T, settings: &QuadSettings<T>) -> Result<T> {
    require_positive("s", s)?;
    let b = s.sqrt();
    let half = T::lit(0.5);
    // x e^{-x²/2} / K₀(√s x), with K₀ = e^{-y}·(eʸK₀); the quadrature never
    // samples x = 0, where the integrand tends to 0.
    let f = |x: T| {
        let y = b * x;
        match bessel_k0_scaled(y) {
            Ok(k) => x * (y - half * x * x).exp() / k,
            Err(_) => T::zero(),
        }
    };
    let r = integrate_semiinfinite(f, T::zero(), settings)?;
    Ok(r.value / s)
}

// ---------------------------------------------------------------------------
// Gaussian-target dispatch

/// Gaussian target of per-coordinate variance `sigma2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussQuery<T> {
    pub spec: SearchSpec<T>,
    pub sigma2: T,
}

/// Units of a dimensionless constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Units {
    #[serde(rename = "sigma2_over_D")]
    Sigma2OverD,
    #[serde(rename = "sigma3_over_D")]
    Sigma3OverD,
    #[serde(rename = "time")]
    Time,
}

impl Units {
    pub fn label(self) -> &'static str {
        match self {
            Units::Sigma2OverD => "sigma2_over_D",
            Units::Sigma3OverD => "sigma3_over_D",
            Units::Time => "time",
        }
    }
}

/// Which quantity a Gaussian-target value actually is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    /// `E` itself.
    None,
    /// `lim_{ε₀→0} ε₀·E` (three dimensions).
    Eps0TimesE,
    /// `lim_{ε₀→0} E/|log ε₀|` (two dimensions).
    EOverAbsLogEps0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    AnalyticClosedForm,
    Quadrature,
    MonteCarlo,
}

impl Provenance {
    pub fn label(self) -> &'static str {
        match self {
            Provenance::AnalyticClosedForm => "analytic-closed-form",
            Provenance::Quadrature => "quadrature",
            Provenance::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussOutcome<T> {
    /// Dimensional value: `constant · σ²/D` or `constant · σ³/D`.
    pub value: ExpectedTime<T>,
    /// Dimensionless constant, in `units`.
    pub constant: ExpectedTime<T>,
    pub params: DimensionlessParams<T>,
    pub units: Units,
    pub scaling: Scaling,
    pub provenance: Provenance,
}

/// Dimensionless Gaussian-target formula for a `(dimension, mechanism)` pair.
pub fn gauss_dimensionless<T: Real>(
    dimension: Dimension,
    kind: MechanismKind,
    x: T,
    settings: &QuadSettings<T>,
) -> Result<ExpectedTime<T>> {
    use MechanismKind::*;
    let finite = ExpectedTime::Finite;
    match (dimension, kind) {
        (Dimension::One, Poissonian) => gauss_poisson_1d(x).map(finite),
        (Dimension::One, Bridge) => gauss_bridge_1d(x),
        (Dimension::One, Periodic) => gauss_periodic_1d_with(x, settings),
        (Dimension::Two, Poissonian) => gauss_poisson_2d_with(x, settings).map(finite),
        (Dimension::Three, Poissonian) => gauss_poisson_3d_with(x, settings).map(finite),
        (Dimension::Three, Bridge) => gauss_bridge_3d(x),
        (Dimension::Three, Periodic) => gauss_periodic_3d_with(x, settings),
        (Dimension::Two, k) => Err(Error::UnsupportedCombination {
            dimension: 2,
            mechanism: k.name(),
        }),
    }
}

pub fn units_for(dimension: Dimension) -> Units {
    match dimension {
        Dimension::Three => Units::Sigma3OverD,
        _ => Units::Sigma2OverD,
    }
}

pub fn scaling_for(dimension: Dimension) -> Scaling {
    match dimension {
        Dimension::One => Scaling::None,
        Dimension::Two => Scaling::EOverAbsLogEps0,
        Dimension::Three => Scaling::Eps0TimesE,
    }
}

pub fn provenance_for(dimension: Dimension, kind: MechanismKind) -> Provenance {
    match (dimension, kind) {
        (Dimension::One, MechanismKind::Periodic)
        | (Dimension::Two, _)
        | (Dimension::Three, MechanismKind::Poissonian)
        | (Dimension::Three, MechanismKind::Periodic) => Provenance::Quadrature,
        _ => Provenance::AnalyticClosedForm,
    }
}

pub fn gauss_expected_time<T: Real>(q: &GaussQuery<T>) -> Result<GaussOutcome<T>> {
    gauss_expected_time_with(q, &QuadSettings::default())
}

pub fn gauss_expected_time_with<T: Real>(
    q: &GaussQuery<T>,
    settings: &QuadSettings<T>,
) -> Result<GaussOutcome<T>> {
    let params = to_dimensionless(&q.spec, q.sigma2)?;
    let dim = q.spec.dimension();
    let kind = q.spec.mechanism().kind();
    let constant = gauss_dimensionless(dim, kind, params.value(), settings)?;
    let d = q.spec.diffusion();
    let unit = match dim {
        Dimension::Three => q.sigma2 * q.sigma2.sqrt() / d,
        _ => q.sigma2 / d,
    };
    Ok(GaussOutcome {
        value: constant.scale(unit),
        constant,
        params,
        units: units_for(dim),
        scaling: scaling_for(dim),
        provenance: provenance_for(dim, kind),
    })
}
