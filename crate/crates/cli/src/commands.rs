use std::io::Write;

use argdist_core::distribution::{
    compare_report, solve_saddle, tau_min, theorem1_log_exponent, theorem1_prediction,
};
use argdist_core::divisor::{global_divisor_sum, ComplexOrder};
use argdist_core::imaginary::{
    asymptotic_imaginary_moment, exact_imaginary_moment, normalized_residual,
};
use argdist_core::lvalues::{empirical_moment, log_laplace_transform_q};
use argdist_core::{
    ConstantsBundle, EmpiricalDistribution, ModelConfig, ModelSamples, SweepMethod, SweepOptions,
    SweepResult,
};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::args::{
    Command, CompareArgs, ConstantsArgs, Format, ModelArgs, ModelOptions, MomentsArgs, PredictArgs,
    PsiArgs, SweepArgs, SweepSource,
};
use crate::error::{CliError, CliResult};
use crate::output::{fmt15, fmt_opt, write_csv, write_json, RunConfig};
use crate::sweep_io::{obtain_sweep, read_sweep, record_row, COLUMNS};

pub fn run(config: &RunConfig, sink: &mut dyn Write) -> CliResult<()> {
    match config.command {
        Command::Constants(a) => constants(a, config, sink),
        Command::Sweep(a) => sweep(a, config, sink),
        Command::Psi(a) => psi(a, config, sink),
        Command::Moments(a) => moments(a, config, sink),
        Command::Model(a) => model(a, config, sink),
        Command::Predict(a) => predict(a, config, sink),
        Command::Compare(a) => compare(a, config, sink),
    }
}

fn constants(a: &ConstantsArgs, config: &RunConfig, sink: &mut dyn Write) -> CliResult<()> {
    let c = ConstantsBundle::compute(a.tol)?;
    match config.format {
        Format::Json => write_json(sink, config, json!(c)),
        Format::Csv => write_csv(
            sink,
            config,
            &["name", "value"],
            [
                ("c1", c.c1),
                ("c2", c.c2),
                ("gamma", c.gamma_euler),
                ("tol", c.tolerance_achieved),
            ]
            .into_iter()
            .map(|(k, v)| vec![k.to_string(), fmt15(v)]),
        ),
    }
}

fn require_verified(sweep: &SweepResult) -> CliResult<()> {
    if let Some(bad) = sweep.records.iter().find(|r| !r.branch_verified) {
        return Err(argdist_core::Error::Accuracy {
            message: format!("branch check failed for q = {}, j = {}", bad.q, bad.j.get()),
            achieved: bad.branch_residual.abs(),
        }
        .into());
    }
    Ok(())
}

fn sweep(a: &SweepArgs, config: &RunConfig, sink: &mut dyn Write) -> CliResult<()> {
    let options = SweepOptions {
        method: a.method.into(),
        direct_cap: a.direct_cap,
        ..SweepOptions::default()
    };
    let sweep = obtain_sweep(a.q, options)?;
    require_verified(&sweep)?;
    match config.format {
        Format::Csv => write_csv(sink, config, &COLUMNS, sweep.records.iter().map(record_row)),
        Format::Json => write_json(sink, config, json!(sweep)),
    }
}

fn load_sweep(source: &SweepSource) -> CliResult<SweepResult> {
    match (source.q, &source.input) {
        (Some(q), None) => obtain_sweep(
            q,
            SweepOptions {
                method: SweepMethod::Auto,
                ..SweepOptions::default()
            },
        ),
        (None, Some(path)) => read_sweep(path),
        _ => Err(CliError::Usage(
            "give exactly one of --q and --input".into(),
        )),
    }
}

fn psi(a: &PsiArgs, config: &RunConfig, sink: &mut dyn Write) -> CliResult<()> {
    let dist = EmpiricalDistribution::from_sweep(&load_sweep(&a.source)?);
    let rows: Vec<(f64, f64, f64)> = a
        .tau
        .0
        .iter()
        .map(|&t| (t, dist.psi_q(t), dist.phi_q(t)))
        .collect();
    match config.format {
        Format::Csv => write_csv(
            sink,
            config,
            &["tau", "psi_q", "phi_q"],
            rows.iter()
                .map(|&(t, p, f)| vec![fmt15(t), fmt15(p), fmt15(f)]),
        ),
        Format::Json => write_json(
            sink,
            config,
            json!({
                "q": dist.q,
                "rows": rows
                    .iter()
                    .map(|&(t, p, f)| json!({"tau": t, "psi_q": p, "phi_q": f}))
                    .collect::<Vec<_>>(),
            }),
        ),
    }
}

fn pair(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn moments(a: &MomentsArgs, config: &RunConfig, sink: &mut dyn Write) -> CliResult<()> {
    let sweep =
        a.q.map(|q| {
            load_sweep(&SweepSource {
                q: Some(q),
                input: None,
            })
        })
        .transpose()?;
    if a.main_term {
        let z1 = Complex64::new(a.z1[0], a.z1[1]);
        let z2 = Complex64::new(a.z2[0], a.z2[1]);
        let eval = global_divisor_sum(
            ComplexOrder::new(z1)?,
            ComplexOrder::new(z2)?,
            a.sigma,
            a.tol.unwrap_or(1e-6),
        )?;
        let empirical = sweep
            .as_ref()
            .map(|s| empirical_moment(s, z1, z2))
            .transpose()?;
        match config.format {
            Format::Json => {
                let mut body = json!({
                    "z1": pair(z1),
                    "z2": pair(z2),
                    "sigma": a.sigma,
                    "value": pair(eval.value),
                    "error_bound": eval.error_bound,
                    "prime_cutoff": eval.prime_cutoff,
                });
                if let (Some(m), Some(q)) = (empirical, a.q) {
                    body["empirical"] = json!({
                        "q": q,
                        "value": pair(m.value),
                        "in_regime": m.in_regime,
                        "regime_radius": m.regime_radius,
                    });
                }
                write_json(sink, config, body)
            }
            Format::Csv => {
                let mut columns = vec![
                    "z1_re",
                    "z1_im",
                    "z2_re",
                    "z2_im",
                    "sigma",
                    "re",
                    "im",
                    "error_bound",
                ];
                let mut row: Vec<String> = [
                    z1.re,
                    z1.im,
                    z2.re,
                    z2.im,
                    a.sigma,
                    eval.value.re,
                    eval.value.im,
                    eval.error_bound,
                ]
                .into_iter()
                .map(fmt15)
                .collect();
                if let Some(m) = empirical {
                    columns.extend(["empirical_re", "empirical_im", "in_regime"]);
                    row.extend([
                        fmt15(m.value.re),
                        fmt15(m.value.im),
                        m.in_regime.to_string(),
                    ]);
                }
                write_csv(sink, config, &columns, [row])
            }
        }
    } else {
        let grid =
            a.s.as_ref()
                .ok_or_else(|| CliError::Usage("--imaginary needs --s".into()))?;
        let consts = ConstantsBundle::shared();
        let mut rows = Vec::new();
        for &s in &grid.0 {
            let exact = exact_imaginary_moment(s, a.tol.unwrap_or(1e-3))?;
            let (asym, resid) = if s >= 3.0 {
                (
                    Some(asymptotic_imaginary_moment(s, consts)?),
                    Some(normalized_residual(exact.log_value, s, consts)?),
                )
            } else {
                (None, None)
            };
            let lap = sweep
                .as_ref()
                .map(|sw| log_laplace_transform_q(sw, s))
                .transpose()?;
            rows.push((exact, asym, resid, lap));
        }
        match config.format {
            Format::Json => {
                let objs: Vec<Value> = rows
                    .iter()
                    .map(|(e, asym, resid, lap)| {
                        let mut v = json!({
                            "s": e.s,
                            "log_exact": e.log_value,
                            "log_asymptotic": asym,
                            "residual_normalized": resid,
                            "error_bound": e.tail_bound + e.quadrature_error,
                            "prime_cutoff": e.cutoff,
                        });
                        if let Some(l) = lap {
                            v["log_laplace_q"] = json!(l);
                        }
                        v
                    })
                    .collect();
                let body = match <[Value; 1]>::try_from(objs) {
                    Ok([single]) => single,
                    Err(objs) => json!({ "rows": objs }),
                };
                write_json(sink, config, body)
            }
            Format::Csv => write_csv(
                sink,
                config,
                &[
                    "s",
                    "log_exact",
                    "log_asymptotic",
                    "residual_normalized",
                    "error_bound",
                    "log_laplace_q",
                ],
                rows.iter().map(|(e, asym, resid, lap)| {
                    vec![
                        fmt15(e.s),
                        fmt15(e.log_value),
                        fmt_opt(*asym),
                        fmt_opt(*resid),
                        fmt15(e.tail_bound + e.quadrature_error),
                        fmt_opt(*lap),
                    ]
                }),
            ),
        }
    }
}

fn model_config(m: &ModelOptions) -> ModelConfig {
    ModelConfig {
        prime_cutoff: m.primes,
        samples: m.samples,
        seed: m.seed,
        tail_mode: m.tail_mode.into(),
    }
}

fn prediction_or_none(tau: f64, consts: &ConstantsBundle) -> CliResult<Option<f64>> {
    if tau < tau_min(consts) {
        return Ok(None);
    }
    Ok(Some(theorem1_prediction(tau, consts)?))
}

fn model(a: &ModelArgs, config: &RunConfig, sink: &mut dyn Write) -> CliResult<()> {
    let samples = ModelSamples::generate(model_config(&a.model))?;
    let consts = ConstantsBundle::shared();
    let rows = a
        .tau
        .0
        .iter()
        .map(|&t| Ok((samples.psi(t), prediction_or_none(t, consts)?)))
        .collect::<CliResult<Vec<_>>>()?;
    match config.format {
        Format::Csv => write_csv(
            sink,
            config,
            &["tau", "psi_model", "ci", "psi_thm1"],
            rows.iter().map(|(m, thm)| {
                vec![
                    fmt15(m.tau),
                    fmt15(m.psi_estimate),
                    fmt15(m.ci_halfwidth),
                    fmt_opt(*thm),
                ]
            }),
        ),
        Format::Json => write_json(
            sink,
            config,
            json!({
                "rows": rows
                    .iter()
                    .map(|(m, thm)| {
                        let mut v = json!(m);
                        v["psi_thm1"] = json!(thm);
                        v
                    })
                    .collect::<Vec<_>>(),
            }),
        ),
    }
}

fn predict(a: &PredictArgs, config: &RunConfig, sink: &mut dyn Write) -> CliResult<()> {
    let consts = ConstantsBundle::shared();
    let rows = a
        .tau
        .0
        .iter()
        .map(|&t| {
            let saddle = solve_saddle(t, consts)?;
            let log_exponent = theorem1_log_exponent(t, consts)?;
            Ok((saddle, log_exponent, theorem1_prediction(t, consts)?))
        })
        .collect::<CliResult<Vec<_>>>()?;
    match config.format {
        Format::Csv => write_csv(
            sink,
            config,
            &["tau", "s", "u", "residual", "log_exponent", "psi_thm1"],
            rows.iter().map(|(sp, le, p)| {
                [sp.tau, sp.s, sp.u, sp.residual, *le, *p]
                    .into_iter()
                    .map(fmt15)
                    .collect()
            }),
        ),
        Format::Json => {
            let objs: Vec<Value> = rows
                .iter()
                .map(|(sp, le, p)| {
                    let mut v = json!(sp);
                    v["log_exponent"] = json!(le);
                    v["psi_thm1"] = json!(p);
                    v
                })
                .collect();
            let body = json!({
                "constants": consts,
                "tau_min": tau_min(consts),
                "rows": objs,
            });
            write_json(sink, config, body)
        }
    }
}

fn compare(a: &CompareArgs, config: &RunConfig, sink: &mut dyn Write) -> CliResult<()> {
    let dist = EmpiricalDistribution::from_sweep(&load_sweep(&a.source)?);
    let samples = ModelSamples::generate(model_config(&a.model))?;
    let rows = compare_report(&dist, &samples, &a.tau.0, ConstantsBundle::shared())?;
    match config.format {
        Format::Csv => write_csv(
            sink,
            config,
            &["tau", "psi_q", "psi_model", "ci", "psi_thm1"],
            rows.iter().map(|r| {
                vec![
                    fmt15(r.tau),
                    fmt15(r.psi_q),
                    fmt15(r.psi_model),
                    fmt15(r.ci),
                    fmt_opt(r.psi_thm1),
                ]
            }),
        ),
        Format::Json => write_json(sink, config, json!({ "q": dist.q, "rows": rows })),
    }
}
