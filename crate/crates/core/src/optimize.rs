//! Minimization of the Gaussian-target expected time over `s` or `𝒯`.
//!
//! A coarse pass evaluates 64 log-spaced interior probes (in parallel; the
//! result does not depend on scheduling), then golden-section search refines
//! the bracket around the best probe. Divergent values count as `+∞`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{gauss_dimensionless, units_for, Units};
use crate::error::{Error, Result};
use crate::model::{Dimension, ExpectedTime, MechanismKind};
use crate::quad::QuadSettings;
use crate::Real;

pub const PROBES: usize = 64;
pub const DEFAULT_X_TOL: f64 = 1e-6;

/// Quadrature tolerance used inside objectives: the golden-section search
/// needs function noise far below `x_tol²`.
pub const OBJECTIVE_REL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum<T> {
    pub argmin: T,
    pub min_value: T,
    pub x_tolerance: T,
    pub function_evaluations: usize,
}

/// Minimizes `f` over the open interval `(lo, hi)`.
pub fn minimize_scalar<T, F>(f: F, lo: T, hi: T, x_tol: T) -> Result<Optimum<T>>
where
    T: Real,
    F: Fn(T) -> Result<ExpectedTime<T>> + Sync,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::BracketTooNarrow {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    let x_tol = if x_tol > T::zero() { x_tol } else { T::lit(DEFAULT_X_TOL) };
    let xs = probe_grid(lo, hi, PROBES);
    let values = xs
        .par_iter()
        .map(|&x| f(x).map(|v| v.objective()))
        .collect::<Result<Vec<T>>>()?;
    let mut evaluations = PROBES;

    let best = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite"))
        .map(|(i, _)| i)
        .ok_or(Error::NoFiniteValue {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        })?;

    let mut a = if best == 0 { lo } else { xs[best - 1] };
    let mut b = if best + 1 == xs.len() { hi } else { xs[best + 1] };

    // Golden-section search on [a, b].
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let eval = |x: T| f(x).map(|v| v.objective());
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    evaluations += 2;
    while b - a > T::lit(2.0) * x_tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d)?;
        }
        evaluations += 1;
        if c <= a || d >= b || c >= d {
            break; // bracket exhausted in this precision
        }
    }
    let argmin = (a + b) / T::lit(2.0);
    let min_value = eval(argmin)?;
    evaluations += 1;
    if !min_value.is_finite() {
        return Err(Error::NoFiniteValue {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    Ok(Optimum {
        argmin,
        min_value,
        x_tolerance: x_tol,
        function_evaluations: evaluations,
    })
}

/// `n` interior points, log-spaced when `lo > 0`.
fn probe_grid<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let denom = T::from_usize(n + 1).unwrap();
    (1..=n)
        .map(|i| {
            let frac = T::from_usize(i).unwrap() / denom;
            if lo > T::zero() {
                (lo.ln() + frac * (hi.ln() - lo.ln())).exp()
            } else {
                lo + frac * (hi - lo)
            }
        })
        .collect()
}

/// Search interval for the dimensionless parameter of a mechanism: the
/// divergence regions `𝒯 ≤ 4` (bridge) and `𝒯 ≤ 1` (periodic) are excluded.
pub fn default_bracket<T: Real>(kind: MechanismKind) -> (T, T) {
    match kind {
        MechanismKind::Poissonian => (T::lit(1e-4), T::lit(20.0)),
        MechanismKind::Bridge => (T::lit(4.0 + 1e-6), T::lit(100.0)),
        MechanismKind::Periodic => (T::lit(1.0 + 1e-6), T::lit(100.0)),
    }
}

/// Dimensionless objective for a `(dimension, mechanism)` pair.
pub fn objective<T: Real>(
    dimension: Dimension,
    kind: MechanismKind,
) -> impl Fn(T) -> Result<ExpectedTime<T>> + Sync {
    let settings = QuadSettings::default().with_rel_tol(T::lit(OBJECTIVE_REL_TOL).max(T::lit(100.0) * T::epsilon()));
    move |x| gauss_dimensionless(dimension, kind, x, &settings)
}

pub fn optimize_gauss<T: Real>(
    dimension: Dimension,
    kind: MechanismKind,
    bracket: Option<(T, T)>,
    x_tol: T,
) -> Result<Optimum<T>> {
    let (lo, hi) = bracket.unwrap_or_else(|| default_bracket(kind));
    // Surface UnsupportedCombination before probing.
    gauss_dimensionless(dimension, kind, hi, &QuadSettings::default())?;
    minimize_scalar(objective(dimension, kind), lo, hi, x_tol)
}

/// One optimal constant, with the value printed in the literature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantRow {
    pub theorem: u8,
    pub dimension: Dimension,
    pub mechanism: MechanismKind,
    pub units: Units,
    pub optimum: Optimum<f64>,
    pub published_argmin: f64,
    pub published_min: f64,
}

impl ConstantRow {
    pub fn rel_dev_argmin(&self) -> f64 {
        ((self.optimum.argmin - self.published_argmin) / self.published_argmin).abs()
    }

    pub fn rel_dev_min(&self) -> f64 {
        ((self.optimum.min_value - self.published_min) / self.published_min).abs()
    }
}

/// `(theorem, dimension, mechanism, published argmin, published min)`.
pub const PUBLISHED: [(u8, Dimension, MechanismKind, f64, f64); 7] = [
    (1, Dimension::One, MechanismKind::Poissonian, 0.491, 3.548),
    (2, Dimension::One, MechanismKind::Bridge, 10.136, 4.847),
    (3, Dimension::One, MechanismKind::Periodic, 2.82, 3.35),
    (4, Dimension::Three, MechanismKind::Poissonian, 0.738, 13.09),
    (5, Dimension::Three, MechanismKind::Bridge, 12.00, 21.54),
    (6, Dimension::Three, MechanismKind::Periodic, 4.13, 22.775),
    (7, Dimension::Two, MechanismKind::Poissonian, 0.713, 4.77),
];

/// Minimizes all seven Gaussian-target objectives.
pub fn optimal_constants() -> Result<Vec<ConstantRow>> {
    PUBLISHED
        .iter()
        .map(|&(theorem, dimension, mechanism, published_argmin, published_min)| {
            let optimum = optimize_gauss::<f64>(dimension, mechanism, None, DEFAULT_X_TOL)?;
            Ok(ConstantRow {
                theorem,
                dimension,
                mechanism,
                units: units_for(dimension),
                optimum,
                published_argmin,
                published_min,
            })
        })
        .collect()
}

/// Slope sign changes of `f` on an `n`-point log grid over `(lo, hi)`.
/// A unimodal objective shows exactly one (from falling to rising).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnimodalityReport {
    pub grid_points: usize,
    pub sign_changes: usize,
}

impl UnimodalityReport {
    pub fn is_unimodal(&self) -> bool {
        self.sign_changes == 1
    }
}

pub fn unimodality_check<T, F>(f: F, lo: T, hi: T, n: usize) -> Result<UnimodalityReport>
where
    T: Real,
    F: Fn(T) -> Result<ExpectedTime<T>> + Sync,
{
    let xs = probe_grid(lo, hi, n);
    let values = xs
        .par_iter()
        .map(|&x| f(x).map(|v| v.objective()))
        .collect::<Result<Vec<T>>>()?;
    let mut last_sign = 0i8;
    let mut changes = 0;
    for w in values.windows(2) {
        let sign = match w[1].partial_cmp(&w[0]) {
            Some(std::cmp::Ordering::Less) => -1,
            Some(std::cmp::Ordering::Greater) => 1,
            _ => 0,
        };
        if sign != 0 {
            if last_sign != 0 && sign != last_sign {
                changes += 1;
            }
            last_sign = sign;
        }
    }
    Ok(UnimodalityReport {
        grid_points: n,
        sign_changes: changes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{gauss_bridge_3d, gauss_expected_time_with, gauss_poisson_1d, GaussQuery};
    use crate::model::{Mechanism, SearchSpec};

    #[test]
    fn quadratic() {
        let o = minimize_scalar(|x: f64| Ok(ExpectedTime::Finite((x - 2.0).powi(2) + 1.0)), 0.0, 5.0, 1e-6).unwrap();
        assert!((o.argmin - 2.0).abs() <= 1e-6);
        assert!((o.min_value - 1.0).abs() < 1e-12);
        assert!(o.function_evaluations > PROBES);
    }

    #[test]
    fn bridge_3d_exact_stationarity() {
        let (lo, hi) = default_bracket::<f64>(MechanismKind::Bridge);
        let o = minimize_scalar(gauss_bridge_3d, lo, hi, 1e-6).unwrap();
        assert!((o.argmin - 12.0).abs() < 1e-5);
        assert!((o.min_value - 54.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-9);
        assert!(o.argmin > lo && o.argmin < hi);
    }

    #[test]
    fn poisson_1d_optimum() {
        let (lo, hi) = default_bracket::<f64>(MechanismKind::Poissonian);
        let o = minimize_scalar(|s| gauss_poisson_1d(s).map(ExpectedTime::Finite), lo, hi, 1e-6).unwrap();
        assert!((o.argmin - 0.491_349_828_546_060_8).abs() < 2e-6);
        assert!((o.min_value - 3.548_366_567_847_64).abs() < 1e-10);
        assert_eq!(o.min_value, gauss_poisson_1d(o.argmin).unwrap());
    }

    #[test]
    fn errors() {
        let f = |_: f64| Ok(ExpectedTime::Divergent);
        assert!(matches!(minimize_scalar(f, 1.0, 2.0, 1e-6), Err(Error::NoFiniteValue { .. })));
        let g = |x: f64| Ok(ExpectedTime::Finite(x));
        assert!(matches!(minimize_scalar(g, 2.0, 2.0, 1e-6), Err(Error::BracketTooNarrow { .. })));
        assert!(matches!(minimize_scalar(g, 3.0, 2.0, 1e-6), Err(Error::BracketTooNarrow { .. })));
        assert!(matches!(
            optimize_gauss::<f64>(Dimension::Two, MechanismKind::Bridge, None, 1e-6),
            Err(Error::UnsupportedCombination { .. })
        ));
    }

    #[test]
    fn divergent_region_is_skipped() {
        // Only the upper part of the bracket is finite.
        let o = minimize_scalar(gauss_bridge_3d, 0.5f64, 40.0, 1e-6).unwrap();
        assert!((o.argmin - 12.0).abs() < 1e-5);
    }

    #[test]
    fn deterministic() {
        let f = objective::<f64>(Dimension::One, MechanismKind::Periodic);
        let a = minimize_scalar(&f, 1.0 + 1e-6, 100.0, 1e-6).unwrap();
        let b = minimize_scalar(&f, 1.0 + 1e-6, 100.0, 1e-6).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unimodality_counts_sign_changes() {
        let bowl = |x: f64| Ok(ExpectedTime::Finite((x.ln() - 1.0).powi(2)));
        assert!(unimodality_check(bowl, 0.1, 100.0, 200).unwrap().is_unimodal());
        let wavy = |x: f64| Ok(ExpectedTime::Finite(x.sin()));
        assert!(unimodality_check(wavy, 0.1, 100.0, 200).unwrap().sign_changes > 1);
    }

    #[test]
    fn all_objectives_unimodal() {
        for &(_, dim, kind, _, _) in PUBLISHED.iter() {
            let (lo, hi) = default_bracket::<f64>(kind);
            let report = unimodality_check(objective(dim, kind), lo, hi, 200).unwrap();
            assert!(report.is_unimodal(), "{dim:?} {kind:?}: {report:?}");
        }
    }

    #[test]
    fn argmin_scale_equivariance() {
        // Minimizing over the dimensional rate/period returns s*·D/σ² or 𝒯*·σ²/D.
        for &(_, dim, kind, _, _) in PUBLISHED.iter() {
            let star = optimize_gauss::<f64>(dim, kind, None, 1e-8).unwrap().argmin;
            for (d, sigma2) in [(1.0, 1.0), (2.0, 0.5)] {
                let factor = match kind {
                    MechanismKind::Poissonian => d / sigma2,
                    _ => sigma2 / d,
                };
                let f = |p: f64| {
                    let mech = match kind {
                        MechanismKind::Poissonian => Mechanism::Poissonian { rate: p },
                        MechanismKind::Periodic => Mechanism::Periodic { period: p },
                        MechanismKind::Bridge => Mechanism::Bridge { period: p },
                    };
                    let spec = SearchSpec::new(dim, d, mech, 0.01)?;
                    let settings = QuadSettings::default().with_rel_tol(OBJECTIVE_REL_TOL);
                    gauss_expected_time_with(&GaussQuery { spec, sigma2 }, &settings).map(|o| o.value)
                };
                let (lo, hi) = default_bracket::<f64>(kind);
                let o = minimize_scalar(f, lo * factor, hi * factor, 1e-8 * factor).unwrap();
                let rel = ((o.argmin - star * factor) / (star * factor)).abs();
                assert!(rel <= 1e-6, "{dim:?} {kind:?} (D={d}, σ²={sigma2}): {} vs {}", o.argmin, star * factor);
            }
        }
    }
}
