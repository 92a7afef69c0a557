use std::io::Write;
use std::time::Instant;

use serde_json::{json, Value};
use treeperc::critical::{
    convexity_probe, critical_value, curve_sample, self_consistency_check, slope_probe,
    surface_sample, BoundSet,
};
use treeperc::markov::{build_full_chain, build_q, u_sequence};
use treeperc::simulate::{gw_simulate, spine_simulate, tree_bfs, GwConfig, RootType, GENERATOR};
use treeperc::spectral::{char_poly_at, char_poly_coefficients, spectral_radius, yaglom};
use treeperc::ModelParams;

use crate::output::{Body, Cell, Output, Reduction};
use crate::{CliError, Command, Mode, Root};

pub fn execute(cmd: &Command, stderr: &mut dyn Write) -> Result<Output, CliError> {
    let started = Instant::now();
    let settings = match serde_json::to_value(cmd).expect("serializable") {
        Value::Object(map) => map.into_iter().next().map(|(_, v)| v).unwrap_or(Value::Null),
        other => other,
    };
    let name = cmd.name();
    let mut output = match cmd {
        Command::Matrix { params, full, out } => {
            let params = params.resolve()?;
            let q = if *full {
                build_full_chain(&params)?
            } else {
                build_q(&params)?
            };
            let dense = q.to_dense()?;
            let mut rows = Vec::with_capacity(q.dim() * q.dim());
            for (i, row) in dense.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    rows.push(vec![
                        Cell::Int(q.index_at(i) as i64),
                        Cell::Int(q.index_at(j) as i64),
                        Cell::Float(v),
                    ]);
                }
            }
            let body = Body::Table {
                header: &["row", "col", "value"],
                rows,
            };
            with_params(Output::new(name, settings, out, body), params, None)
        }
        Command::Rho { params, power, out } => {
            let params = params.resolve()?;
            let (reduced, reduction) = reduce(&params, stderr)?;
            let q = build_q(&reduced)?;
            let r = spectral_radius(&q, &power.options())?;
            let d_rho = reduced.d() as f64 * r.rho;
            let body = json!({
                "rho": r.rho,
                "rho_original": r.rho.powf(1.0 / params.gcd() as f64),
                "d_rho": d_rho,
                "regime": regime(d_rho),
                "method": r.method,
                "iterations": r.iterations,
                "residual": r.residual,
                "indices": indices(&q),
                "right_vector": r.right_vector,
                "left_vector": r.left_vector,
            });
            with_params(Output::new(name, settings, out, Body::Json(body)), params, reduction)
        }
        Command::Charpoly {
            params,
            at,
            coefficients,
            out,
        } => {
            let params = params.resolve()?;
            let q = build_q(&params)?;
            let v = char_poly_at(&q, *at)?;
            let mut body = json!({ "at": v.at, "value": v.value });
            if *coefficients {
                body["coefficients"] = json!(char_poly_coefficients(&q)?);
            }
            with_params(Output::new(name, settings, out, Body::Json(body)), params, None)
        }
        Command::Useq { params, n, out } => {
            let params = params.resolve()?;
            let u = u_sequence(&params, *n)?;
            let rows = u
                .terms
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    let ratio = i.checked_sub(1).and_then(|j| u.ratio(j));
                    vec![
                        Cell::Int(i as i64),
                        Cell::Float(t.mantissa),
                        Cell::Float(t.log_scale),
                        ratio.map_or(Cell::Empty, Cell::Float),
                    ]
                })
                .collect();
            let body = Body::Table {
                header: &["i", "u_mantissa", "u_log", "ratio"],
                rows,
            };
            with_params(Output::new(name, settings, out, body), params, None)
        }
        Command::Yaglom { params, power, out } => {
            let params = params.resolve()?;
            let (reduced, reduction) = reduce(&params, stderr)?;
            let q = build_q(&reduced)?;
            let y = yaglom(&q, &power.options())?;
            let body = json!({
                "rho": y.rho,
                "r_limit": y.r_limit,
                "indices": indices(&q),
                "lambda": y.lambda,
            });
            with_params(Output::new(name, settings, out, Body::Json(body)), params, reduction)
        }
        Command::Bounds { shape, p, out } => {
            let b = BoundSet::new(*p, shape.d, shape.l, shape.k)?;
            let body = json!({
                "d": shape.d, "l": shape.l, "k": shape.k, "p": p,
                "easy_lo": b.easy_lo, "tight_lo": b.tight_lo,
                "tight_hi": b.tight_hi, "easy_hi": b.easy_hi,
            });
            Output::new(name, settings, out, Body::Json(body))
        }
        Command::Critical {
            params,
            free,
            tol,
            out,
        } => {
            let params = params.resolve()?;
            let free = free.unwrap_or(params.m());
            if free == 0 || free > params.m() {
                return Err(CliError::Usage(format!(
                    "--free must be in 1..={} (got {free})",
                    params.m()
                )));
            }
            let (_, reduction) = reduce(&params, stderr)?;
            let sample = critical_value(&params, free - 1, &tol.options())?;
            let body = serde_json::to_value(&sample).expect("serializable");
            with_params(Output::new(name, settings, out, Body::Json(body)), params, reduction)
        }
        Command::Curve {
            shape,
            grid,
            tol,
            out,
        } => {
            let rows = curve_sample(shape.d, shape.l, shape.k, *grid, &tol.options())?
                .into_iter()
                .map(|r| {
                    [r.p, r.q_c, r.easy_lo, r.tight_lo, r.tight_hi, r.easy_hi]
                        .map(Cell::Float)
                        .to_vec()
                })
                .collect();
            let body = Body::Table {
                header: &["p", "q_c", "easy_lo", "tight_lo", "tight_hi", "easy_hi"],
                rows,
            };
            Output::new(name, settings, out, body)
        }
        Command::Surface {
            d,
            lengths,
            grid,
            tol,
            out,
        } => {
            let rows = surface_sample(*d, lengths, *grid, &tol.options())?
                .into_iter()
                .map(|r| {
                    vec![
                        Cell::Float(r.p1),
                        Cell::Float(r.p2),
                        Cell::Float(r.p3_c),
                        Cell::Bool(r.in_region),
                    ]
                })
                .collect();
            let body = Body::Table {
                header: &["p1", "p2", "p3_c", "in_region"],
                rows,
            };
            Output::new(name, settings, out, body)
        }
        Command::Simulate {
            params,
            mode,
            trials,
            depth,
            cap,
            root,
            budget,
            seed,
            out,
        } => {
            let params = params.resolve()?;
            let body = match mode {
                Mode::Spine => {
                    let est = spine_simulate(&params, depth.unwrap_or(30), *trials, *seed)?;
                    serde_json::to_value(&est)
                }
                Mode::Gw => {
                    let config = GwConfig {
                        cap: *cap,
                        horizon: depth.unwrap_or(200),
                        trials: *trials,
                        seed: *seed,
                        root: match root {
                            Root::AllOnes => RootType::AllOnes,
                            Root::Single => RootType::Single,
                        },
                    };
                    serde_json::to_value(&gw_simulate(&params, &config)?)
                }
                Mode::Tree => {
                    let est = tree_bfs(&params, depth.unwrap_or(10), *trials, *seed, *budget)?;
                    serde_json::to_value(&est)
                }
            }
            .expect("serializable");
            let mut output = with_params(Output::new(name, settings, out, Body::Json(body)), params, None);
            output.manifest.seed = Some(*seed);
            output.manifest.generator = Some(GENERATOR.to_string());
            output
        }
        Command::ProbeSlope { d, k, tol, out } => {
            let probe = slope_probe(*d, *k, &tol.options())?;
            let mut body = serde_json::to_value(&probe).expect("serializable");
            body["relative_error"] = json!((probe.slope / probe.expected - 1.0).abs());
            Output::new(name, settings, out, Body::Json(body))
        }
        Command::ProbeConvexity {
            d,
            k,
            p_max,
            grid,
            tol,
            out,
        } => {
            let probe = convexity_probe(*d, *k, *p_max, *grid, &tol.options())?;
            let body = serde_json::to_value(&probe).expect("serializable");
            Output::new(name, settings, out, Body::Json(body))
        }
        Command::CheckConsistency { d, k, p, tol, out } => {
            let check = self_consistency_check(*d, *k, *p, &tol.options())?;
            let body = serde_json::to_value(check).expect("serializable");
            Output::new(name, settings, out, Body::Json(body))
        }
        Command::Selftest => unreachable!("handled by the caller"),
    };
    output.started = started;
    Ok(output)
}

fn with_params(mut output: Output, params: ModelParams, reduction: Option<Reduction>) -> Output {
    output.manifest.params = Some(params);
    output.manifest.reduction = reduction;
    output
}

/// Canonical gcd reduction, announced on stderr when it changes the instance.
fn reduce(params: &ModelParams, stderr: &mut dyn Write) -> Result<(ModelParams, Option<Reduction>), CliError> {
    let reduced = params.reduce_gcd()?;
    if params.gcd() == 1 {
        return Ok((reduced, None));
    }
    let _ = writeln!(
        stderr,
        "note: lengths share gcd {}; working with d = {}, lengths = {:?}",
        params.gcd(),
        reduced.d(),
        reduced.lengths()
    );
    Ok((
        reduced.clone(),
        Some(Reduction {
            gcd: params.gcd(),
            reduced,
        }),
    ))
}

fn regime(d_rho: f64) -> &'static str {
    if d_rho > 1.0 {
        "supercritical"
    } else if d_rho < 1.0 {
        "subcritical"
    } else {
        "critical"
    }
}

fn indices(q: &treeperc::markov::ChainMatrix) -> Vec<u64> {
    (0..q.dim()).map(|i| q.index_at(i)).collect()
}
