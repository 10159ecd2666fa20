//! Parameter and result types shared by the rest of the crate.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::Real;

/// Spatial dimension of the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Dimension {
    One = 1,
    Two = 2,
    Three = 3,
}

impl Dimension {
    pub fn get(self) -> usize {
        self as usize
    }
}

impl TryFrom<u8> for Dimension {
    type Error = Error;

    fn try_from(d: u8) -> Result<Self> {
        match d {
            1 => Ok(Dimension::One),
            2 => Ok(Dimension::Two),
            3 => Ok(Dimension::Three),
            _ => Err(invalid("dimension", format!("must be 1, 2 or 3, got {d}"))),
        }
    }
}

impl From<Dimension> for u8 {
    fn from(d: Dimension) -> u8 {
        d as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MechanismKind {
    #[serde(rename = "poisson")]
    Poissonian,
    Periodic,
    Bridge,
}

impl MechanismKind {
    pub fn name(self) -> &'static str {
        match self {
            MechanismKind::Poissonian => "poisson",
            MechanismKind::Periodic => "periodic",
            MechanismKind::Bridge => "bridge",
        }
    }
}

/// How the searcher returns to the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Mechanism<T> {
    /// Instantaneous jump at the rings of a rate-`rate` exponential clock.
    #[serde(rename = "poisson")]
    Poissonian { rate: T },
    /// Instantaneous jump every `period` time units.
    Periodic { period: T },
    /// Consecutive independent Brownian bridges of length `period`.
    Bridge { period: T },
}

impl<T: Real> Mechanism<T> {
    pub fn kind(&self) -> MechanismKind {
        match self {
            Mechanism::Poissonian { .. } => MechanismKind::Poissonian,
            Mechanism::Periodic { .. } => MechanismKind::Periodic,
            Mechanism::Bridge { .. } => MechanismKind::Bridge,
        }
    }

    /// The rate `r` or the period `T`, whichever the mechanism carries.
    pub fn parameter(&self) -> T {
        match *self {
            Mechanism::Poissonian { rate } => rate,
            Mechanism::Periodic { period } | Mechanism::Bridge { period } => period,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Mechanism::Poissonian { rate } => require_positive("rate", rate),
            Mechanism::Periodic { period } | Mechanism::Bridge { period } => {
                require_positive("period", period)
            }
        }
    }
}

/// Full model configuration: dimension, diffusion coefficient `D`, reset
/// mechanism and detection radius `ε₀`.
///
/// Brownian motion with diffusion coefficient `D` has increments of variance
/// `D·t` per coordinate. The detection radius only matters for `d ≥ 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSpec<T> {
    dimension: Dimension,
    diffusion: T,
    mechanism: Mechanism<T>,
    detection_radius: T,
}

impl<T: Real> SearchSpec<T> {
    /// Validates and builds a spec. Two-dimensional search only supports
    /// Poissonian resetting; the other pairs return
    /// [`Error::UnsupportedCombination`].
    pub fn new(
        dimension: Dimension,
        diffusion: T,
        mechanism: Mechanism<T>,
        detection_radius: T,
    ) -> Result<Self> {
        require_positive("diffusion", diffusion)?;
        mechanism.validate()?;
        if dimension != Dimension::One {
            require_positive("detection_radius", detection_radius)?;
        }
        if dimension == Dimension::Two && mechanism.kind() != MechanismKind::Poissonian {
            return Err(Error::UnsupportedCombination {
                dimension: 2,
                mechanism: mechanism.kind().name(),
            });
        }
        Ok(Self {
            dimension,
            diffusion,
            mechanism,
            detection_radius,
        })
    }

    /// One-dimensional spec; the detection radius is unused there.
    pub fn one_dim(diffusion: T, mechanism: Mechanism<T>) -> Result<Self> {
        Self::new(Dimension::One, diffusion, mechanism, T::zero())
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn diffusion(&self) -> T {
        self.diffusion
    }

    pub fn mechanism(&self) -> Mechanism<T> {
        self.mechanism
    }

    pub fn detection_radius(&self) -> T {
        self.detection_radius
    }
}

/// Where the target is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TargetSpec<T> {
    /// A fixed point; the vector length must equal the dimension.
    Fixed { point: Vec<T> },
    /// Centered Gaussian with per-coordinate variance `σ²`.
    Gaussian { variance: T },
}

impl<T: Real> TargetSpec<T> {
    pub fn fixed(point: Vec<T>) -> Self {
        TargetSpec::Fixed { point }
    }

    pub fn gaussian(variance: T) -> Result<Self> {
        require_positive("sigma2", variance)?;
        Ok(TargetSpec::Gaussian { variance })
    }

    /// Checks the target against a spec. Fixed targets in `d ≥ 2` must lie
    /// outside the detection ball when `strict` is set, as expectation
    /// queries require.
    pub fn validate_for(&self, spec: &SearchSpec<T>, strict: bool) -> Result<()> {
        match self {
            TargetSpec::Fixed { point } => {
                if point.len() != spec.dimension().get() {
                    return Err(invalid(
                        "target",
                        format!(
                            "point has {} coordinates, dimension is {}",
                            point.len(),
                            spec.dimension().get()
                        ),
                    ));
                }
                if point.iter().any(|x| !x.is_finite()) {
                    return Err(invalid("target", "coordinates must be finite"));
                }
                if strict
                    && spec.dimension() != Dimension::One
                    && norm(point) <= spec.detection_radius()
                {
                    return Err(invalid(
                        "target",
                        "|a| must exceed the detection radius eps0",
                    ));
                }
                Ok(())
            }
            TargetSpec::Gaussian { variance } => require_positive("sigma2", *variance),
        }
    }
}

pub(crate) fn norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc.hypot(x))
}

/// Dimensionless rate `s` (with `r = (D/σ²)·s`) or period `𝒯` (with
/// `T = (σ²/D)·𝒯`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimensionlessParams<T> {
    Rate { s: T },
    Period { script_t: T },
}

impl<T: Real> DimensionlessParams<T> {
    pub fn value(&self) -> T {
        match *self {
            DimensionlessParams::Rate { s } => s,
            DimensionlessParams::Period { script_t } => script_t,
        }
    }

    /// Maps back to the dimensional rate or period for the given `D`, `σ²`.
    pub fn to_dimensional(&self, diffusion: T, sigma2: T) -> T {
        match *self {
            DimensionlessParams::Rate { s } => s * diffusion / sigma2,
            DimensionlessParams::Period { script_t } => script_t * sigma2 / diffusion,
        }
    }
}

pub fn to_dimensionless<T: Real>(spec: &SearchSpec<T>, sigma2: T) -> Result<DimensionlessParams<T>> {
    require_positive("sigma2", sigma2)?;
    let d = spec.diffusion();
    Ok(match spec.mechanism() {
        Mechanism::Poissonian { rate } => DimensionlessParams::Rate { s: rate * sigma2 / d },
        Mechanism::Periodic { period } | Mechanism::Bridge { period } => {
            DimensionlessParams::Period {
                script_t: period * d / sigma2,
            }
        }
    })
}

/// An expected time, or the divergent branch of a formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum ExpectedTime<T> {
    Finite(T),
    Divergent,
}

impl<T: Real> ExpectedTime<T> {
    pub fn finite(&self) -> Option<T> {
        match *self {
            ExpectedTime::Finite(v) => Some(v),
            ExpectedTime::Divergent => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, ExpectedTime::Divergent)
    }

    /// Value as a minimization objective: divergent maps to `+∞`.
    pub fn objective(&self) -> T {
        self.finite().unwrap_or_else(T::infinity)
    }

    pub fn scale(self, factor: T) -> Self {
        match self {
            ExpectedTime::Finite(v) => ExpectedTime::Finite(v * factor),
            ExpectedTime::Divergent => ExpectedTime::Divergent,
        }
    }
}

/// Result of an adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult<T> {
    pub value: T,
    pub abs_error_estimate: T,
    pub evaluations: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson(rate: f64) -> Mechanism<f64> {
        Mechanism::Poissonian { rate }
    }

    #[test]
    fn dimensionless_examples() {
        let spec = SearchSpec::one_dim(1.0, poisson(1.0)).unwrap();
        assert_eq!(to_dimensionless(&spec, 1.0).unwrap(), DimensionlessParams::Rate { s: 1.0 });

        let spec = SearchSpec::one_dim(2.0, poisson(0.491)).unwrap();
        let s = to_dimensionless(&spec, 2.0).unwrap().value();
        assert!((s - 0.491).abs() < 1e-15);

        let spec = SearchSpec::one_dim(1.0, Mechanism::Bridge { period: 10.136 }).unwrap();
        assert_eq!(
            to_dimensionless(&spec, 1.0).unwrap(),
            DimensionlessParams::Period { script_t: 10.136 }
        );
    }

    #[test]
    fn rejects_nonpositive_sigma2() {
        let spec = SearchSpec::one_dim(1.0, poisson(1.0)).unwrap();
        assert!(to_dimensionless(&spec, 0.0).is_err());
        assert!(to_dimensionless(&spec, -1.0).is_err());
        assert!(to_dimensionless(&spec, f64::NAN).is_err());
    }

    #[test]
    fn construction_invariants() {
        assert!(SearchSpec::one_dim(0.0, poisson(1.0)).is_err());
        assert!(SearchSpec::one_dim(1.0, poisson(-1.0)).is_err());
        assert!(SearchSpec::one_dim(1.0, Mechanism::Periodic { period: 0.0 }).is_err());
        assert!(SearchSpec::new(Dimension::Three, 1.0, poisson(1.0), 0.0).is_err());
        assert!(SearchSpec::new(Dimension::Three, 1.0, poisson(1.0), 0.1).is_ok());

        for mech in [Mechanism::Periodic { period: 1.0 }, Mechanism::Bridge { period: 1.0 }] {
            let err = SearchSpec::new(Dimension::Two, 1.0, mech, 0.1).unwrap_err();
            assert!(matches!(err, Error::UnsupportedCombination { dimension: 2, .. }));
        }
        assert!(SearchSpec::new(Dimension::Two, 1.0, poisson(1.0), 0.1).is_ok());
        assert!(Dimension::try_from(4).is_err());
    }

    #[test]
    fn fixed_target_must_leave_detection_ball() {
        let spec = SearchSpec::new(Dimension::Three, 1.0, poisson(1.0), 0.1).unwrap();
        assert!(TargetSpec::fixed(vec![0.05, 0.0, 0.0]).validate_for(&spec, true).is_err());
        assert!(TargetSpec::fixed(vec![0.05, 0.0, 0.0]).validate_for(&spec, false).is_ok());
        assert!(TargetSpec::fixed(vec![0.5, 0.0]).validate_for(&spec, false).is_err());
        assert!(TargetSpec::fixed(vec![0.0, 0.3, 0.4]).validate_for(&spec, true).is_ok());
    }

    #[test]
    fn divergent_is_infinite_objective() {
        assert_eq!(ExpectedTime::<f64>::Divergent.objective(), f64::INFINITY);
        assert_eq!(ExpectedTime::Finite(2.0).scale(3.0), ExpectedTime::Finite(6.0));
    }

    proptest::proptest! {
        #[test]
        fn dimensionless_round_trip(
            param in 1e-3f64..1e3,
            d in 1e-3f64..1e3,
            sigma2 in 1e-3f64..1e3,
            bridge in proptest::bool::ANY,
        ) {
            let mech = if bridge { Mechanism::Bridge { period: param } } else { poisson(param) };
            let spec = SearchSpec::one_dim(d, mech).unwrap();
            let back = to_dimensionless(&spec, sigma2).unwrap().to_dimensional(d, sigma2);
            proptest::prop_assert!(((back - param) / param).abs() <= 1e-14);
        }
    }
}
