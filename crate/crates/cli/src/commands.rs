use std::io::Write;

use serde_json::{json, Value};

use reset_search::analytic::{
    fixed_expected_time, gauss_dimensionless, gauss_expected_time_with, units_for, BridgeBounds,
    FixedOutcome, FixedTargetQuery, GaussQuery, Provenance, Scaling,
};
use reset_search::mc::{default_dt, estimate_mean, McEstimate, SimSettings};
use reset_search::model::{
    Dimension, DimensionlessParams, ExpectedTime, Mechanism, MechanismKind,
    SearchSpec, TargetSpec,
};
use reset_search::optimize::{optimal_constants, optimize_gauss, PUBLISHED};
use reset_search::quad::QuadSettings;

use crate::report::{expected, RunReport};
use crate::{CliError, EvalArgs, ModelArgs, OptimizeArgs, SimulateArgs, TableArgs, TargetArgs};

pub const THREADS_ENV: &str = "RESET_SEARCH_THREADS";
const DEFAULT_SIGMA2: f64 = 1.0;

type CmdResult = Result<Option<RunReport>, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn dimension(d: u8) -> Result<Dimension, CliError> {
    Ok(Dimension::try_from(d)?)
}

fn build_spec(model: &ModelArgs, target: &TargetArgs) -> Result<SearchSpec<f64>, CliError> {
    let kind = MechanismKind::from(model.mechanism);
    let mechanism = match kind {
        MechanismKind::Poissonian => {
            if target.period.is_some() {
                return Err(usage("--period does not apply to poisson resetting; use --rate"));
            }
            Mechanism::Poissonian {
                rate: target.rate.ok_or_else(|| usage("poisson resetting needs --rate"))?,
            }
        }
        MechanismKind::Periodic | MechanismKind::Bridge => {
            if target.rate.is_some() {
                return Err(usage(format!("--rate does not apply to {}; use --period", kind.name())));
            }
            let period = target
                .period
                .ok_or_else(|| usage(format!("{} resetting needs --period", kind.name())))?;
            if kind == MechanismKind::Periodic {
                Mechanism::Periodic { period }
            } else {
                Mechanism::Bridge { period }
            }
        }
    };
    Ok(SearchSpec::new(dimension(model.dim)?, model.diffusion, mechanism, model.eps0)?)
}

enum Target {
    Fixed(Vec<f64>),
    Gaussian(f64),
}

fn build_target(dim: Dimension, target: &TargetArgs) -> Result<Target, CliError> {
    match &target.target_a {
        Some(a) if a.len() == dim.get() => Ok(Target::Fixed(a.clone())),
        // A single value is a distance along the first axis.
        Some(a) if a.len() == 1 => {
            let mut point = vec![0.0; dim.get()];
            point[0] = a[0];
            Ok(Target::Fixed(point))
        }
        Some(a) => Err(usage(format!(
            "--target-a has {} coordinates, expected 1 or {}",
            a.len(),
            dim.get()
        ))),
        None => Ok(Target::Gaussian(target.sigma2.unwrap_or(DEFAULT_SIGMA2))),
    }
}

fn model_params(spec: &SearchSpec<f64>, target: &Target) -> Value {
    let mut p = json!({
        "dim": spec.dimension().get(),
        "mechanism": spec.mechanism().kind().name(),
        "diffusion": spec.diffusion(),
        "eps0": spec.detection_radius(),
    });
    let m = spec.mechanism();
    let key = if m.kind() == MechanismKind::Poissonian { "rate" } else { "period" };
    p[key] = json!(m.parameter());
    match target {
        Target::Fixed(a) => p["target_a"] = json!(a),
        Target::Gaussian(s2) => p["sigma2"] = json!(s2),
    }
    p
}

fn bounds_json(b: &BridgeBounds<f64>) -> Value {
    json!({ "lower": expected(b.lower), "upper": expected(b.upper) })
}

fn params_json(p: &DimensionlessParams<f64>) -> Value {
    match *p {
        DimensionlessParams::Rate { s } => json!({ "s": s }),
        DimensionlessParams::Period { script_t } => json!({ "script_t": script_t }),
    }
}

fn scaling_label(s: Scaling) -> &'static str {
    match s {
        Scaling::None => "none",
        Scaling::Eps0TimesE => "eps0_times_E",
        Scaling::EOverAbsLogEps0 => "E_over_abs_log_eps0",
    }
}

fn fixed_result(outcome: &FixedOutcome<f64>) -> Value {
    match outcome {
        FixedOutcome::Exact { value } => {
            let mut v = expected(*value);
            v["kind"] = json!("exact");
            v
        }
        FixedOutcome::Bounds { bounds } => json!({ "kind": "bounds", "bounds": bounds_json(bounds) }),
    }
}

pub fn eval(args: &EvalArgs) -> CmdResult {
    let spec = build_spec(&args.model, &args.target)?;
    let target = build_target(spec.dimension(), &args.target)?;
    let mut params = model_params(&spec, &target);
    params["tol"] = json!(args.tol);
    let mut report = RunReport::new("eval", params);
    match target {
        Target::Fixed(a) => {
            let outcome = fixed_expected_time(&FixedTargetQuery { spec, a })?;
            let mut result = fixed_result(&outcome);
            result["units"] = json!("time");
            result["provenance"] = json!(Provenance::AnalyticClosedForm.label());
            result["scaling"] = json!(scaling_label(Scaling::None));
            report.insert("result", result);
        }
        Target::Gaussian(sigma2) => {
            let settings = QuadSettings::default().with_rel_tol(args.tol);
            settings.validate()?;
            let out = gauss_expected_time_with(&GaussQuery { spec, sigma2 }, &settings)?;
            let mut result = expected(out.value);
            result["kind"] = json!("exact");
            result["constant"] = expected(out.constant);
            result["dimensionless"] = params_json(&out.params);
            result["units"] = json!(out.units.label());
            result["scaling"] = json!(scaling_label(out.scaling));
            result["provenance"] = json!(out.provenance.label());
            report.insert("result", result);
        }
    }
    Ok(Some(report))
}

fn published(dim: Dimension, kind: MechanismKind) -> Option<(u8, f64, f64)> {
    PUBLISHED
        .iter()
        .find(|p| p.1 == dim && p.2 == kind)
        .map(|p| (p.0, p.3, p.4))
}

pub fn optimize(args: &OptimizeArgs) -> CmdResult {
    let dim = dimension(args.dim)?;
    let kind = MechanismKind::from(args.mechanism);
    if !(args.diffusion > 0.0 && args.diffusion.is_finite()) {
        return Err(usage("--diffusion must be positive"));
    }
    if !(args.sigma2 > 0.0 && args.sigma2.is_finite()) {
        return Err(usage("--sigma2 must be positive"));
    }
    let opt = optimize_gauss::<f64>(dim, kind, args.bracket, args.x_tol)?;
    let units = units_for(dim);
    let (d, s2) = (args.diffusion, args.sigma2);
    let (param_name, dimensionless, dimensional_argmin) = match kind {
        MechanismKind::Poissonian => {
            let p = DimensionlessParams::Rate { s: opt.argmin };
            ("rate", params_json(&p), p.to_dimensional(d, s2))
        }
        _ => {
            let p = DimensionlessParams::Period { script_t: opt.argmin };
            ("period", params_json(&p), p.to_dimensional(d, s2))
        }
    };
    let unit = match dim {
        Dimension::Three => s2 * s2.sqrt() / d,
        _ => s2 / d,
    };
    let mut params = json!({
        "dim": dim.get(),
        "mechanism": kind.name(),
        "diffusion": d,
        "sigma2": s2,
        "x_tol": args.x_tol,
    });
    if let Some((lo, hi)) = args.bracket {
        params["bracket"] = json!([lo, hi]);
    }
    let mut report = RunReport::new("optimize", params);
    let mut result = json!({
        "argmin": dimensionless,
        "argmin_dimensional": { param_name: dimensional_argmin },
        "min": opt.min_value,
        "min_dimensional": opt.min_value * unit,
        "x_tolerance": opt.x_tolerance,
        "function_evaluations": opt.function_evaluations,
        "units": units.label(),
        "scaling": scaling_label(reset_search::analytic::scaling_for(dim)),
        "provenance": reset_search::analytic::provenance_for(dim, kind).label(),
    });
    if let Some((theorem, pa, pm)) = published(dim, kind) {
        result["published"] = json!({ "theorem": theorem, "argmin": pa, "min": pm });
    }
    report.insert("result", result);
    Ok(Some(report))
}

fn open_out(path: &Option<std::path::PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

pub fn table(args: &TableArgs) -> CmdResult {
    if args.curve {
        return curve(args);
    }
    let rows = optimal_constants()?;
    let mut w = csv::Writer::from_writer(open_out(&args.out)?);
    w.write_record([
        "theorem",
        "mechanism",
        "dim",
        "argmin",
        "min",
        "paper_argmin",
        "paper_min",
        "rel_dev_argmin",
        "rel_dev_min",
    ])?;
    for r in &rows {
        w.write_record([
            r.theorem.to_string(),
            r.mechanism.name().to_string(),
            r.dimension.get().to_string(),
            r.optimum.argmin.to_string(),
            r.optimum.min_value.to_string(),
            r.published_argmin.to_string(),
            r.published_min.to_string(),
            r.rel_dev_argmin().to_string(),
            r.rel_dev_min().to_string(),
        ])?;
    }
    w.flush()?;
    let Some(path) = &args.out else {
        return Ok(None);
    };
    let mut report = RunReport::new("table", json!({ "out": path.display().to_string() }));
    let summary: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "theorem": r.theorem,
                "mechanism": r.mechanism.name(),
                "dim": r.dimension.get(),
                "argmin": r.optimum.argmin,
                "min": r.optimum.min_value,
                "units": r.units.label(),
                "rel_dev_argmin": r.rel_dev_argmin(),
                "rel_dev_min": r.rel_dev_min(),
            })
        })
        .collect();
    report.insert("rows", json!(summary));
    Ok(Some(report))
}

fn curve(args: &TableArgs) -> CmdResult {
    let (Some(mech), Some(d), Some((lo, hi, n))) = (args.mechanism, args.dim, args.grid) else {
        return Err(usage("--curve needs --mechanism, --dim and --grid"));
    };
    let dim = dimension(d)?;
    let kind = MechanismKind::from(mech);
    let settings = QuadSettings::default();
    let mut w = csv::Writer::from_writer(open_out(&args.out)?);
    w.write_record(["param", "value"])?;
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let value = match gauss_dimensionless(dim, kind, x, &settings)? {
            ExpectedTime::Finite(v) => v.to_string(),
            ExpectedTime::Divergent => "inf".to_string(),
        };
        w.write_record([x.to_string(), value])?;
    }
    w.flush()?;
    let Some(path) = &args.out else {
        return Ok(None);
    };
    let params = json!({
        "curve": true,
        "mechanism": kind.name(),
        "dim": dim.get(),
        "grid": [lo, hi, n],
        "out": path.display().to_string(),
    });
    let mut report = RunReport::new("table", params);
    report.insert("rows", json!(n));
    report.insert("units", json!(units_for(dim).label()));
    Ok(Some(report))
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| usage(format!("{THREADS_ENV} must be a non-negative integer"))),
        Err(_) => Ok(None),
    }
}

fn estimate_json(e: &McEstimate) -> Value {
    json!({
        "mean": e.mean,
        "std_error": e.std_error,
        "n": e.n,
        "censored_fraction": e.censored_fraction,
        "bias_warning": e.bias_warning,
        "units": "time",
        "provenance": Provenance::MonteCarlo.label(),
    })
}

/// Analytic counterpart of a simulation. The d ≥ 2 Poissonian formulas are
/// written for increments of variance 2Dt, so they are evaluated at D/2.
fn counterpart(spec: &SearchSpec<f64>, target: &Target) -> Result<(Value, Option<f64>), CliError> {
    let poisson_hd = spec.dimension() != Dimension::One
        && spec.mechanism().kind() == MechanismKind::Poissonian;
    let formula_spec = if poisson_hd {
        SearchSpec::new(spec.dimension(), spec.diffusion() / 2.0, spec.mechanism(), spec.detection_radius())?
    } else {
        *spec
    };
    let mut note = poisson_hd.then(|| "formula evaluated at D/2: written for increments of variance 2Dt".to_string());
    let (mut value, reference) = match target {
        Target::Fixed(a) => {
            let outcome = fixed_expected_time(&FixedTargetQuery {
                spec: formula_spec,
                a: a.clone(),
            })?;
            let reference = match outcome {
                FixedOutcome::Exact { value } => value.finite(),
                FixedOutcome::Bounds { .. } => None,
            };
            let mut v = fixed_result(&outcome);
            v["provenance"] = json!(Provenance::AnalyticClosedForm.label());
            (v, reference)
        }
        Target::Gaussian(sigma2) => {
            let out = gauss_expected_time_with(
                &GaussQuery {
                    spec: formula_spec,
                    sigma2: *sigma2,
                },
                &QuadSettings::default(),
            )?;
            // Turn the ε₀ → 0 limit back into an estimate of E at this ε₀.
            let eps0 = spec.detection_radius();
            let reference = out.value.finite().map(|v| match out.scaling {
                Scaling::None => v,
                Scaling::Eps0TimesE => v / eps0,
                Scaling::EOverAbsLogEps0 => v * eps0.ln().abs(),
            });
            if out.scaling != Scaling::None {
                let extra = "small-eps0 asymptote: agreement only to leading order in eps0";
                note = Some(match note {
                    Some(n) => format!("{n}; {extra}"),
                    None => extra.to_string(),
                });
            }
            let mut v = match reference {
                Some(r) => json!({ "value": r, "divergent": false }),
                None => json!({ "value": null, "divergent": true }),
            };
            v["kind"] = json!("exact");
            v["provenance"] = json!(out.provenance.label());
            (v, reference)
        }
    };
    if let Some(n) = note {
        value["note"] = json!(n);
    }
    Ok((value, reference))
}

pub fn simulate(args: &SimulateArgs) -> CmdResult {
    let spec = build_spec(&args.model, &args.target)?;
    let target = build_target(spec.dimension(), &args.target)?;
    let scale = match &target {
        Target::Fixed(a) => a.iter().map(|x| x * x).sum::<f64>().sqrt(),
        Target::Gaussian(s2) => s2.sqrt(),
    };
    let dt = args.dt.unwrap_or_else(|| default_dt(&spec, scale));
    let settings = SimSettings::new(&spec, dt, args.n, args.seed)?
        .with_max_resets(args.max_resets)?
        .with_threads(threads_from_env()?);
    let target_spec = match &target {
        Target::Fixed(a) => TargetSpec::fixed(a.clone()),
        Target::Gaussian(s2) => TargetSpec::gaussian(*s2)?,
    };
    let estimate = estimate_mean(&spec, &target_spec, &settings)?;

    let mut params = model_params(&spec, &target);
    params["n"] = json!(args.n);
    params["dt"] = json!(dt);
    params["seed"] = json!(args.seed);
    params["max_resets"] = json!(args.max_resets);
    let mut report = RunReport::new("simulate", params);
    report.insert("estimate", estimate_json(&estimate));

    match counterpart(&spec, &target) {
        Ok((mut analytic, reference)) => {
            if let Some(r) = reference {
                analytic["z_score"] = json!(estimate.z_score(r));
            }
            if let Some(b) = analytic.get("bounds") {
                let lower = b["lower"]["value"].as_f64().unwrap_or(f64::NEG_INFINITY);
                let upper = b["upper"]["value"].as_f64().unwrap_or(f64::INFINITY);
                let inside = lower <= estimate.mean && estimate.mean <= upper;
                analytic["inside_bounds"] = json!(inside);
            }
            report.insert("analytic", analytic);
        }
        Err(CliError::Model(e)) => {
            report.insert("analytic", json!({ "available": false, "reason": e.to_string() }));
        }
        Err(e) => return Err(e),
    }
    Ok(Some(report))
}
