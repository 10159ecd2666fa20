//! Monte Carlo simulation of the reset search processes.
//!
//! Brownian motion here has increments of variance `D·h` per coordinate.
//!
//! In one dimension each step draws an exact Gaussian (or bridge) increment
//! and a hit is declared either when the endpoint lies beyond the target or,
//! otherwise, with the Brownian-bridge crossing probability
//! `exp(−2(a−x₀)(a−x₁)/(D h))`, which is exact for a level. In two and three
//! dimensions the step adapts to the distance `δ` from the detection sphere:
//! `h = max(dt, (δ/4)²/D)`, so `dt` only governs the approach to the ball.
//! The same bridge correction with the half-space distance to the sphere
//! approximates excursions into the ball within a step.
//!
//! Every replicate has its own ChaCha8 stream, selected by replicate index,
//! so results are bit-identical for any thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::model::{norm, Dimension, Mechanism, SearchSpec, TargetSpec};

/// Censored fraction above which an estimate carries a bias warning.
pub const BIAS_WARNING_FRACTION: f64 = 0.001;
/// Censored fraction above which an estimate is rejected.
pub const MAX_CENSORED_FRACTION: f64 = 0.05;
pub const DEFAULT_MAX_RESETS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSettings {
    dt: f64,
    n_replicates: usize,
    max_resets: usize,
    seed: u64,
    threads: Option<usize>,
}

impl SimSettings {
    /// In `d ≥ 2` the step must satisfy `√(D·dt) ≤ ε₀/10`.
    pub fn new(spec: &SearchSpec<f64>, dt: f64, n_replicates: usize, seed: u64) -> Result<Self> {
        require_positive("dt", dt)?;
        if n_replicates == 0 {
            return Err(invalid("n_replicates", "must be at least 1"));
        }
        if spec.dimension() != Dimension::One {
            let limit = spec.detection_radius() / 10.0;
            if (spec.diffusion() * dt).sqrt() > limit * (1.0 + 1e-12) {
                return Err(invalid(
                    "dt",
                    format!("sqrt(D*dt) must not exceed eps0/10 = {limit}"),
                ));
            }
        }
        Ok(Self {
            dt,
            n_replicates,
            max_resets: DEFAULT_MAX_RESETS,
            seed,
            threads: None,
        })
    }

    pub fn with_max_resets(mut self, max_resets: usize) -> Result<Self> {
        if max_resets == 0 {
            return Err(invalid("max_resets", "must be at least 1"));
        }
        self.max_resets = max_resets;
        Ok(self)
    }

    /// Caps the worker threads; `None` uses the global pool.
    pub fn with_threads(mut self, threads: Option<usize>) -> Self {
        self.threads = threads.filter(|&t| t > 0);
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn n_replicates(&self) -> usize {
        self.n_replicates
    }
    pub fn max_resets(&self) -> usize {
        self.max_resets
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn threads(&self) -> Option<usize> {
        self.threads
    }
}

/// Default step: `a²/(400 D)` in one dimension (`a` a typical target
/// distance), `(ε₀/10)²/D` otherwise.
pub fn default_dt(spec: &SearchSpec<f64>, target_scale: f64) -> f64 {
    let d = spec.diffusion();
    match spec.dimension() {
        Dimension::One => {
            let a = if target_scale > 0.0 && target_scale.is_finite() { target_scale } else { 1.0 };
            a * a / (400.0 * d)
        }
        _ => (spec.detection_radius() / 10.0).powi(2) / d,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
    pub censored_fraction: f64,
    /// Set when censoring exceeds [`BIAS_WARNING_FRACTION`]: the mean is
    /// then biased low.
    pub bias_warning: bool,
}

impl McEstimate {
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.mean - reference) / self.std_error
    }
}

fn replicate_rng(seed: u64, replicate_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate_index as u64);
    rng
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Next bridge position after a step of `h` from `(t, x)` on a bridge of
/// length `horizon` pinned at 0: mean `x(1 − h/(T−t))`, variance
/// `D h (T−t−h)/(T−t)`.
pub fn bridge_increment<R: Rng>(
    x: f64,
    t: f64,
    horizon: f64,
    h: f64,
    diffusion: f64,
    rng: &mut R,
) -> Result<f64> {
    let left = horizon - t;
    if !(t >= 0.0 && h > 0.0 && h <= left * (1.0 + 1e-12)) {
        return Err(invalid("dt", "step must satisfy 0 <= t < t + dt <= T"));
    }
    if h >= left {
        return Ok(0.0);
    }
    let mean = x * (1.0 - h / left);
    let var = diffusion * h * (left - h) / left;
    Ok(mean + var.sqrt() * normal(rng))
}

/// Probability that a Brownian path with endpoints at distances `d0`, `d1`
/// (same side) from a level touches it during a step of length `h`.
fn crossing_probability(d0: f64, d1: f64, h: f64, diffusion: f64) -> f64 {
    if d0 <= 0.0 || d1 <= 0.0 {
        1.0
    } else {
        (-2.0 * d0 * d1 / (diffusion * h)).exp()
    }
}

/// Whether the continuous path between `x0` and `x1` touched `level`.
pub fn crossing_correction_1d<R: Rng>(
    x0: f64,
    x1: f64,
    level: f64,
    dt: f64,
    diffusion: f64,
    rng: &mut R,
) -> bool {
    let (d0, d1) = ((level - x0), (level - x1));
    if d0 * d1 <= 0.0 {
        return true;
    }
    let p = crossing_probability(d0.abs(), d1.abs(), dt, diffusion);
    rng.random::<f64>() < p
}

/// Mechanism-specific state of one inter-reset segment.
#[derive(Debug, Clone)]
pub struct PathSegmentSampler {
    mechanism: Mechanism<f64>,
    diffusion: f64,
    /// Time since the last reset.
    pub elapsed: f64,
    /// Current position (one entry per coordinate).
    pub position: Vec<f64>,
    /// Segment length: `T` for periodic and bridge, an exponential draw for
    /// Poissonian resets.
    pub horizon: f64,
}

impl PathSegmentSampler {
    pub fn new<R: Rng>(spec: &SearchSpec<f64>, rng: &mut R) -> Self {
        let mut s = Self {
            mechanism: spec.mechanism(),
            diffusion: spec.diffusion(),
            elapsed: 0.0,
            position: vec![0.0; spec.dimension().get()],
            horizon: 0.0,
        };
        s.reset(rng);
        s
    }

    /// Starts a new segment at the origin.
    pub fn reset<R: Rng>(&mut self, rng: &mut R) {
        self.elapsed = 0.0;
        self.position.iter_mut().for_each(|x| *x = 0.0);
        self.horizon = match self.mechanism {
            Mechanism::Poissonian { rate } => Exp::new(rate).expect("rate validated").sample(rng),
            Mechanism::Periodic { period } | Mechanism::Bridge { period } => period,
        };
    }

    pub fn remaining(&self) -> f64 {
        self.horizon - self.elapsed
    }

    /// Advances by `h ≤ remaining()`; bridge segments land exactly on the
    /// origin at the horizon.
    pub fn advance<R: Rng>(&mut self, h: f64, rng: &mut R) {
        let last = h >= self.remaining();
        let h = h.min(self.remaining());
        match self.mechanism {
            Mechanism::Bridge { .. } => {
                for x in self.position.iter_mut() {
                    *x = if last {
                        0.0
                    } else {
                        bridge_increment(*x, self.elapsed, self.horizon, h, self.diffusion, rng)
                            .expect("step within horizon")
                    };
                }
            }
            _ => {
                let s = (self.diffusion * h).sqrt();
                for x in self.position.iter_mut() {
                    *x += s * normal(rng);
                }
            }
        }
        self.elapsed = if last { self.horizon } else { self.elapsed + h };
    }
}

/// Distance from `x` to the detection set: the point `a` in one dimension,
/// the closed `ε₀`-ball around `a` otherwise. Signed in 1D.
fn gap(x: &[f64], a: &[f64], eps0: f64) -> f64 {
    if x.len() == 1 {
        a[0] - x[0]
    } else {
        let d: Vec<f64> = x.iter().zip(a).map(|(x, a)| x - a).collect();
        norm(&d) - eps0
    }
}

/// What happened within one segment.
enum SegmentOutcome {
    Hit(f64),
    Survived,
}

fn run_segment<R: Rng>(
    seg: &mut PathSegmentSampler,
    a: &[f64],
    eps0: f64,
    dt: f64,
    rng: &mut R,
) -> SegmentOutcome {
    let d = seg.diffusion;
    let one_d = a.len() == 1;
    while seg.remaining() > 0.0 {
        let g0 = gap(&seg.position, a, eps0);
        let h = if one_d {
            dt
        } else {
            dt.max((g0 / 4.0).powi(2) / d)
        }
        .min(seg.remaining());
        seg.advance(h, rng);
        let g1 = gap(&seg.position, a, eps0);
        let hit = if one_d {
            g0 * g1 <= 0.0 || rng.random::<f64>() < crossing_probability(g0.abs(), g1.abs(), h, d)
        } else {
            g1 <= 0.0 || rng.random::<f64>() < crossing_probability(g0, g1, h, d)
        };
        if hit {
            return SegmentOutcome::Hit(seg.elapsed);
        }
    }
    SegmentOutcome::Survived
}

fn hitting_time_with<R: Rng>(
    spec: &SearchSpec<f64>,
    a: &[f64],
    settings: &SimSettings,
    rng: &mut R,
) -> (f64, bool) {
    let eps0 = if spec.dimension() == Dimension::One { 0.0 } else { spec.detection_radius() };
    let start_on_target = if a.len() == 1 { a[0] == 0.0 } else { norm(a) <= eps0 };
    if start_on_target {
        return (0.0, false);
    }
    let mut seg = PathSegmentSampler::new(spec, rng);
    let mut total = 0.0;
    for _ in 0..settings.max_resets {
        match run_segment(&mut seg, a, eps0, settings.dt, rng) {
            SegmentOutcome::Hit(t) => return (total + t, false),
            SegmentOutcome::Survived => {
                total += seg.horizon;
                seg.reset(rng);
            }
        }
    }
    (total, true)
}

/// One draw of the hitting time of a fixed target, or the censoring time
/// (`true` flag) after `max_resets` segments.
pub fn sample_hitting_time(
    spec: &SearchSpec<f64>,
    target: &TargetSpec<f64>,
    settings: &SimSettings,
    replicate_index: usize,
) -> Result<(f64, bool)> {
    let TargetSpec::Fixed { point } = target else {
        return Err(invalid("target", "sample_hitting_time needs a fixed target"));
    };
    target.validate_for(spec, false)?;
    if replicate_index >= settings.n_replicates {
        return Err(invalid("replicate_index", "must be below n_replicates"));
    }
    let mut rng = replicate_rng(settings.seed, replicate_index);
    Ok(hitting_time_with(spec, point, settings, &mut rng))
}

fn draw_replicate(
    spec: &SearchSpec<f64>,
    target: &TargetSpec<f64>,
    settings: &SimSettings,
    index: usize,
) -> (f64, bool) {
    let mut rng = replicate_rng(settings.seed, index);
    match target {
        TargetSpec::Fixed { point } => hitting_time_with(spec, point, settings, &mut rng),
        TargetSpec::Gaussian { variance } => {
            let sd = variance.sqrt();
            let a: Vec<f64> = (0..spec.dimension().get()).map(|_| sd * normal(&mut rng)).collect();
            hitting_time_with(spec, &a, settings, &mut rng)
        }
    }
}

fn run_indexed<F, U>(settings: &SimSettings, f: F) -> Result<Vec<U>>
where
    F: Fn(usize) -> U + Sync + Send,
    U: Send,
{
    let n = settings.n_replicates;
    let go = || (0..n).into_par_iter().map(&f).collect::<Vec<U>>();
    match settings.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| invalid("threads", e.to_string()))?;
            Ok(pool.install(go))
        }
        None => Ok(go()),
    }
}

/// Pairwise (cascade) summation; fixed order, hence reproducible.
fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        xs.iter().sum()
    } else {
        let (l, r) = xs.split_at(xs.len() / 2);
        pairwise_sum(l) + pairwise_sum(r)
    }
}

fn summarize(samples: &[(f64, bool)]) -> Result<McEstimate> {
    let n = samples.len();
    let times: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let censored = samples.iter().filter(|s| s.1).count();
    let mean = pairwise_sum(&times) / n as f64;
    let sq: Vec<f64> = times.iter().map(|t| (t - mean).powi(2)).collect();
    let var = if n > 1 { pairwise_sum(&sq) / (n - 1) as f64 } else { 0.0 };
    let censored_fraction = censored as f64 / n as f64;
    if censored_fraction > MAX_CENSORED_FRACTION {
        return Err(Error::ExcessiveCensoring {
            fraction: censored_fraction,
        });
    }
    Ok(McEstimate {
        mean,
        std_error: (var / n as f64).sqrt(),
        n,
        censored_fraction,
        bias_warning: censored_fraction > BIAS_WARNING_FRACTION,
    })
}

/// Mean hitting time over `n_replicates` independent replicates. Gaussian
/// targets are redrawn for each replicate.
pub fn estimate_mean(
    spec: &SearchSpec<f64>,
    target: &TargetSpec<f64>,
    settings: &SimSettings,
) -> Result<McEstimate> {
    target.validate_for(spec, false)?;
    let samples = run_indexed(settings, |i| draw_replicate(spec, target, settings, i))?;
    summarize(&samples)
}

/// Fraction of single segments (periodic or bridge) that reach the target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HitFrequency {
    pub hits: usize,
    pub trials: usize,
    pub frequency: f64,
    /// Binomial standard error `√(p(1−p)/n)` at the observed frequency.
    pub std_error: f64,
}

pub fn estimate_segment_hit_frequency(
    spec: &SearchSpec<f64>,
    target: &[f64],
    settings: &SimSettings,
) -> Result<HitFrequency> {
    TargetSpec::fixed(target.to_vec()).validate_for(spec, true)?;
    let eps0 = if spec.dimension() == Dimension::One { 0.0 } else { spec.detection_radius() };
    let hits = run_indexed(settings, |i| {
        let mut rng = replicate_rng(settings.seed, i);
        let mut seg = PathSegmentSampler::new(spec, &mut rng);
        matches!(run_segment(&mut seg, target, eps0, settings.dt, &mut rng), SegmentOutcome::Hit(_))
    })?
    .into_iter()
    .filter(|&h| h)
    .count();
    let n = settings.n_replicates;
    let p = hits as f64 / n as f64;
    Ok(HitFrequency {
        hits,
        trials: n,
        frequency: p,
        std_error: (p * (1.0 - p) / n as f64).sqrt(),
    })
}
