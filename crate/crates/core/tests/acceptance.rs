//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
//!
//! `cargo test -p reset-search --test acceptance`

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use reset_search::analytic::{
    bridge_crossing_prob, bridge_fixed_1d, bridge_fixed_3d_bounds, gauss_bridge_1d, gauss_bridge_3d,
    gauss_periodic_1d, gauss_periodic_3d, periodic_fixed_1d, poisson_fixed_1d,
};
use reset_search::mc::{estimate_mean, estimate_segment_hit_frequency};
use reset_search::model::{Dimension, ExpectedTime, Mechanism, MechanismKind, SearchSpec, TargetSpec};
use reset_search::optimize::{optimize_gauss, DEFAULT_X_TOL};
use reset_search::quad::{integrate_finite, integrate_semiinfinite, QuadSettings};
use reset_search::specfun::erfc;
use reset_search::{Optimum, SimSettings};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(x: f64, want: f64, tol: f64) -> bool {
    (x - want).abs() <= tol
}

fn opt(dim: Dimension, kind: MechanismKind) -> Optimum {
    optimize_gauss::<f64>(dim, kind, None, DEFAULT_X_TOL).expect("optimizer converges")
}

fn timed<F: FnOnce() -> Outcome>(limit: Option<Duration>, f: F) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    out.detail = format!("{} [{:.2} s]", out.detail, elapsed.as_secs_f64());
    if let Some(limit) = limit {
        if elapsed > limit {
            out.pass = false;
            out.detail += &format!(" exceeds {:.0} s budget", limit.as_secs_f64());
        }
    }
    out
}

fn optimum_check(o: &Optimum, argmin: f64, argmin_tol: f64, min: f64, min_tol: f64) -> Outcome {
    check(
        within(o.argmin, argmin, argmin_tol) && within(o.min_value, min, min_tol),
        format!("argmin {:.6} (want {argmin} ± {argmin_tol}), min {:.6} (want {min} ± {min_tol})", o.argmin, o.min_value),
    )
}

fn is_divergent(r: reset_search::Result<ExpectedTime<f64>>) -> bool {
    matches!(r, Ok(ExpectedTime::Divergent))
}

fn criterion_1() -> Outcome {
    timed(Some(Duration::from_secs(1)), || {
        optimum_check(&opt(Dimension::One, MechanismKind::Poissonian), 0.491, 0.005, 3.548, 0.005)
    })
}

fn criterion_2() -> Outcome {
    timed(Some(Duration::from_secs(1)), || {
        let o = opt(Dimension::One, MechanismKind::Bridge);
        let mut c = optimum_check(&o, 10.136, 0.02, 4.847, 0.005);
        let div = is_divergent(gauss_bridge_1d(1.0)) && is_divergent(gauss_bridge_1d(4.0));
        c.pass &= div;
        c.detail += &format!("; divergent at 1 and 4: {div}");
        c
    })
}

fn criterion_3() -> Outcome {
    timed(Some(Duration::from_secs(10)), || {
        let o = opt(Dimension::One, MechanismKind::Periodic);
        let mut c = optimum_check(&o, 2.82, 0.02, 3.35, 0.01);
        let div = is_divergent(gauss_periodic_1d(1.0));
        c.pass &= div;
        c.detail += &format!("; divergent at 1: {div}");
        c
    })
}

fn criterion_4() -> Outcome {
    timed(None, || optimum_check(&opt(Dimension::Three, MechanismKind::Poissonian), 0.738, 0.005, 13.09, 0.02))
}

fn criterion_5() -> Outcome {
    timed(None, || {
        let o = opt(Dimension::Three, MechanismKind::Bridge);
        let exact = 54.0 / (2.0 * PI).sqrt();
        let mut c = optimum_check(&o, 12.0, 1e-4, 21.54, 0.01);
        // Stationarity at exactly 12: symmetric difference quotient vanishes.
        let f = |t: f64| gauss_bridge_3d(t).unwrap().finite().unwrap();
        let h = 1e-4;
        let slope = (f(12.0 + h) - f(12.0 - h)) / (2.0 * h);
        let at12 = f(12.0);
        let ok = (at12 - exact).abs() < 1e-12 * exact && slope.abs() < 1e-7;
        c.pass &= ok;
        c.detail += &format!("; value at 12 = {at12:.15} vs 54/sqrt(2 pi) = {exact:.15}, slope {slope:.1e}");
        c
    })
}

fn criterion_6() -> Outcome {
    timed(None, || {
        let o = opt(Dimension::Three, MechanismKind::Periodic);
        let mut c = optimum_check(&o, 4.13, 0.02, 22.775, 0.05);
        let div = is_divergent(gauss_periodic_3d(1.0));
        c.pass &= div;
        c.detail += &format!("; divergent at 1: {div}");
        c
    })
}

fn criterion_7() -> Outcome {
    timed(None, || optimum_check(&opt(Dimension::Two, MechanismKind::Poissonian), 0.713, 0.005, 4.77, 0.01))
}

fn criterion_8() -> Outcome {
    timed(Some(Duration::from_secs(30)), || {
        let s = QuadSettings::new(1e-11, 1e-300, 2_000_000).unwrap();
        let int = |f: &dyn Fn(f64) -> f64, t: f64| integrate_finite(f, 0.0, t, &s).unwrap().value;
        let mut worst = [0.0f64; 5];
        for &b in &[0.5f64, 1.0, 2.0] {
            for &t in &[1.0f64, 5.0] {
                for &d in &[0.5f64, 1.0] {
                    let e = (-2.0 * b * b / (t * d)).exp();
                    let k = |u: f64| (-b * b / (2.0 * d * u * (1.0 - u / t))).exp();
                    let rel = |got: f64, want: f64| ((got - want) / want).abs();

                    let lhs = int(&|u| b * k(u) / ((1.0 - u / t).sqrt() * u.powf(1.5)), t) / (2.0 * PI * d).sqrt();
                    worst[0] = worst[0].max(rel(lhs, e));

                    let lhs = int(&|u| b * k(u) / (u.sqrt() * (1.0 - u / t).powf(1.5)), t) / (2.0 * PI * d).sqrt();
                    worst[1] = worst[1].max(rel(lhs, t * e));

                    let lhs = int(&|u| k(u) / (u * (1.0 - u / t)).powf(1.5), t);
                    worst[2] = worst[2].max(rel(lhs, 2.0 * (2.0 * PI * d).sqrt() / b * e));

                    let lhs = int(&|u| k(u) / (2.0 * PI * d * u * (1.0 - u / t)).sqrt(), t);
                    let rhs_quad = 2.0 / d
                        * integrate_semiinfinite(|x: f64| (-2.0 * x * x / (t * d)).exp(), b, &s).unwrap().value;
                    let rhs_closed = (PI * t / (2.0 * d)).sqrt() * erfc(b * (2.0 / (t * d)).sqrt());
                    worst[3] = worst[3].max(rel(lhs, rhs_quad)).max(rel(rhs_quad, rhs_closed));

                    let lhs = int(&|u| b / (2.0 * PI * d).sqrt() * u.powf(-1.5) * (-b * b / (2.0 * d * u)).exp(), t);
                    worst[4] = worst[4].max(rel(lhs, erfc(b / (2.0 * d * t).sqrt())));
                }
            }
        }
        let names = [
            "bridge hit sub-density mass",
            "time-reversed sub-density",
            "symmetric 3/2 kernel",
            "bridge occupation vs gaussian tail",
            "reflection principle",
        ];
        let detail = names
            .iter()
            .zip(worst)
            .map(|(n, w)| format!("{n} {w:.1e}"))
            .collect::<Vec<_>>()
            .join(", ");
        check(worst.iter().all(|&w| w <= 1e-8), format!("worst relative error: {detail}"))
    })
}

struct Optima {
    p1: f64,
    b1: f64,
    per1: f64,
    p2: f64,
    p3: f64,
    b3: f64,
    per3: f64,
}

fn optima() -> Optima {
    use Dimension::*;
    use MechanismKind::*;
    Optima {
        p1: opt(One, Poissonian).min_value,
        b1: opt(One, Bridge).min_value,
        per1: opt(One, Periodic).min_value,
        p2: opt(Two, Poissonian).min_value,
        p3: opt(Three, Poissonian).min_value,
        b3: opt(Three, Bridge).min_value,
        per3: opt(Three, Periodic).min_value,
    }
}

fn ratio(label: &str, x: f64, want: f64, tol: f64) -> Outcome {
    check(within(x, want, tol), format!("{label} = {x:.4} (want {want} ± {tol})"))
}

fn criterion_9(m: &Optima) -> Vec<(&'static str, Outcome)> {
    vec![
        ("9a", {
            let mut c = ratio("1D bridge/periodic", m.b1 / m.per1, 1.37, 0.02);
            c.detail += &format!("; for reference 1D bridge/poisson = {:.4}", m.b1 / m.p1);
            c
        }),
        ("9b", ratio("1D poisson/periodic", m.p1 / m.per1, 1.06, 0.01)),
        ("9c", ratio("3D periodic/bridge", m.per3 / m.b3, 1.06, 0.01)),
        ("9d", ratio("3D bridge/poisson", m.b3 / m.p3, 1.65, 0.02)),
        ("9e", ratio("3D periodic/poisson", m.per3 / m.p3, 1.74, 0.02)),
        ("9f", ratio("2D/1D poisson", m.p2 / m.p1, 1.34, 0.02)),
    ]
}

fn mc_vs(label: &str, spec: SearchSpec<f64>, a: f64, want: f64, n: usize, seed: u64) -> Outcome {
    let settings = SimSettings::new(&spec, a * a / 400.0, n, seed).unwrap();
    let est = estimate_mean(&spec, &TargetSpec::fixed(vec![a]), &settings).unwrap();
    let z = est.z_score(want);
    check(
        z.abs() <= 3.0 && !est.bias_warning,
        format!("{label}: {:.4} ± {:.4} vs {want:.4}, z = {z:+.2}", est.mean, est.std_error),
    )
}

fn criterion_10() -> Vec<(&'static str, Outcome)> {
    let n = 100_000;
    let one = |m| SearchSpec::one_dim(1.0, m).unwrap();
    let mut out = Vec::new();

    for (i, &(r, a)) in [(0.5, 1.0), (1.0, 1.0), (2.0, 0.5)].iter().enumerate() {
        let want = poisson_fixed_1d(r, 1.0, a).unwrap().finite().unwrap();
        let label = format!("1D poisson r={r} a={a}");
        out.push(("10", timed(None, || mc_vs(&label, one(Mechanism::Poissonian { rate: r }), a, want, n, 100 + i as u64))));
    }
    let want = periodic_fixed_1d(1.0, 1.0, 1.0).unwrap().finite().unwrap();
    out.push(("10", timed(None, || mc_vs("1D periodic T=1 a=1", one(Mechanism::Periodic { period: 1.0 }), 1.0, want, n, 200))));
    let want = bridge_fixed_1d(4.0, 1.0, 1.0).unwrap().finite().unwrap();
    out.push(("10", timed(None, || mc_vs("1D bridge T=4 a=1", one(Mechanism::Bridge { period: 4.0 }), 1.0, want, n, 300))));

    out.push((
        "10",
        timed(None, || {
            let spec = SearchSpec::new(Dimension::Three, 1.0, Mechanism::Bridge { period: 12.0 }, 0.05).unwrap();
            let b = bridge_fixed_3d_bounds(12.0, 1.0, 1.0, 0.05).unwrap();
            let settings = SimSettings::new(&spec, 2.5e-5, 20_000, 400).unwrap();
            let est = estimate_mean(&spec, &TargetSpec::fixed(vec![1.0, 0.0, 0.0]), &settings).unwrap();
            let (lo, hi) = (b.lower.finite().unwrap(), b.upper.finite().unwrap());
            check(
                b.contains(est.mean),
                format!("3D bridge T=12 |a|=1 eps0=0.05: {:.2} ± {:.2} in [{lo:.2}, {hi:.2}]", est.mean, est.std_error),
            )
        }),
    ));

    out.push((
        "10",
        timed(None, || {
            let (t, a) = (1.0, 0.5);
            let spec = one(Mechanism::Bridge { period: t });
            let settings = SimSettings::new(&spec, a * a / 400.0, n, 500).unwrap();
            let h = estimate_segment_hit_frequency(&spec, &[a], &settings).unwrap();
            let want = bridge_crossing_prob(t, 1.0, a).unwrap();
            let z = (h.frequency - want) / h.std_error;
            check(
                z.abs() <= 3.0,
                format!("bridge segment hit frequency {:.4} ± {:.4} vs exp(-2a²/DT) = {want:.4}, z = {z:+.2}", h.frequency, h.std_error),
            )
        }),
    ));

    let halving = |dim: Dimension, point: Vec<f64>, reps: usize, seed: u64| {
        let spec = SearchSpec::new(dim, 1.0, Mechanism::Poissonian { rate: 1.0 }, 0.1).unwrap();
        let dt = 0.01f64.powi(2);
        let run = |dt: f64| {
            let s = SimSettings::new(&spec, dt, reps, seed).unwrap();
            estimate_mean(&spec, &TargetSpec::fixed(point.clone()), &s).unwrap().mean
        };
        let (coarse, fine) = (run(dt), run(dt / 2.0));
        let change = ((coarse - fine) / fine).abs();
        check(
            change < 0.02,
            format!("{}D poisson dt-halving: {coarse:.4} -> {fine:.4}, change {:.2}%", dim.get(), 100.0 * change),
        )
    };
    out.push(("10", timed(None, || halving(Dimension::Two, vec![1.0, 0.0], 100_000, 600))));
    out.push(("10", timed(None, || halving(Dimension::Three, vec![1.0, 0.0, 0.0], 40_000, 700))));
    out
}

fn criterion_11() -> Outcome {
    timed(None, || {
        let spec = SearchSpec::new(Dimension::Three, 1.0, Mechanism::Periodic { period: 3.0 }, 0.1).unwrap();
        let target = TargetSpec::gaussian(1.0).unwrap();
        let base = SimSettings::new(&spec, 1e-4, 2_000, 42).unwrap();
        let runs: Vec<_> = [Some(1), Some(4), None]
            .into_iter()
            .map(|t| estimate_mean(&spec, &target, &base.with_threads(t)).unwrap())
            .chain(std::iter::once(estimate_mean(&spec, &target, &base.with_threads(Some(1))).unwrap()))
            .collect();
        let bits = |e: &reset_search::McEstimate| (e.mean.to_bits(), e.std_error.to_bits(), e.censored_fraction.to_bits());
        let same = runs.iter().all(|e| bits(e) == bits(&runs[0]));
        check(same, format!("1, 4 and default threads, repeated: mean {:.6} identical: {same}", runs[0].mean))
    })
}

fn main() {
    let start = Instant::now();
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1", criterion_1()),
        ("2", criterion_2()),
        ("3", criterion_3()),
        ("4", criterion_4()),
        ("5", criterion_5()),
        ("6", criterion_6()),
        ("7", criterion_7()),
        ("8", criterion_8()),
    ];
    let m = optima();
    results.extend(criterion_9(&m));
    let mc_start = Instant::now();
    let mut mc = criterion_10();
    let mc_elapsed = mc_start.elapsed();
    if mc_elapsed > Duration::from_secs(120) {
        mc.push(("10", check(false, format!("Monte Carlo suite took {:.0} s, budget 120 s", mc_elapsed.as_secs_f64()))));
    }
    results.extend(mc);
    results.push(("11", criterion_11()));

    let mut failed = 0;
    for (id, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!o.pass);
        println!("criterion {id:<3} {tag}  {}", o.detail);
    }
    println!(
        "\n{} checks, {} failed, {:.1} s (Monte Carlo {:.1} s)",
        results.len(),
        failed,
        start.elapsed().as_secs_f64(),
        mc_elapsed.as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
