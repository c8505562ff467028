//! Subcommand implementations.

use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use nlhodge::catalog::{self, CatalogField};
use nlhodge::monotonicity::{
    cutoff_terms, fit_power_law, inner_variation_terms, liouville_check, monotonicity_check,
    radial_profile, CutoffFamily, CutoffSpec, LiouvilleVerdict, RadialEnergyProfile, SingularSet,
    VariationSpec,
};
use nlhodge::{
    bianchi_residual, closedness_residual, curvature, el_residual, exponential_gauge,
    gauge_transform_connection, gauge_transform_curvature, snapshot, solve_stationary,
    BoundaryProblem, CubicalComplex, DensityModel, FormField, GaugeField, LieFormField,
};

use crate::config::ExperimentConfig;
use crate::report::{ensure_dir, fmt, write_csv, write_json};
use crate::CliError;

const SCHEMA_VERSION: u32 = 1;

/// Build the scalar boundary data named in the problem section.
fn boundary_field(
    cfg: &ExperimentConfig,
    cx: &Arc<CubicalComplex<f64>>,
) -> Result<FormField<f64>, CliError> {
    let which = cfg.problem.catalog_field()?;
    Ok(catalog::scalar_field(
        which,
        cx,
        cfg.problem.q,
        cfg.problem.scale,
        Some(cfg.problem.beta),
    )?)
}

pub fn run_solve(cfg: &ExperimentConfig, out_dir: &Path) -> Result<(), CliError> {
    ensure_dir(out_dir)?;
    let cx = cfg.domain.build()?;
    let model = cfg.density.build()?;
    let omega0 = boundary_field(cfg, &cx)?;
    let problem = BoundaryProblem::new(omega0, model, cfg.solver.build())?;
    let out = solve_stationary(&problem)?;

    let rows: Vec<Vec<String>> = out
        .log
        .iter()
        .map(|e| {
            vec![
                e.iter.to_string(),
                fmt(e.energy),
                fmt(e.el_residual),
                fmt(e.max_q),
            ]
        })
        .collect();
    write_csv(out_dir, "convergence.csv", "iter,energy,el_residual,max_Q", &rows)?;
    snapshot::save_form(&out_dir.join("field.nlh"), &out.field)?;

    let last = out.log.last().expect("log has at least one entry");
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "solve",
        "seed": cfg.seed,
        "density": model.id(),
        "boundary": cfg.problem.boundary,
        "degree": cfg.problem.q,
        "iterations": out.iterations,
        "el_residual_relative": out.residual,
        "el_residual": el_residual(&out.field, &model)?,
        "closedness_residual": closedness_residual(&out.field)?,
        "energy": last.energy,
        "max_q": last.max_q,
        "artifacts": ["field.nlh", "convergence.csv"],
    });
    write_json(out_dir, "summary.json", &summary)?;
    println!(
        "solve: converged in {} iterations, relative residual {:e}",
        out.iterations, out.residual
    );
    Ok(())
}

enum VerifyField {
    Scalar(FormField<f64>),
    Lie(LieFormField<f64>),
}

fn verify_field(
    cfg: &ExperimentConfig,
    cx: &Arc<CubicalComplex<f64>>,
) -> Result<VerifyField, CliError> {
    if let Some(path) = &cfg.verify.snapshot {
        return Ok(VerifyField::Scalar(snapshot::load_form(path)?));
    }
    let name = cfg
        .verify
        .field
        .clone()
        .unwrap_or_else(|| cfg.problem.boundary.clone());
    let which: CatalogField = name.parse()?;
    match which {
        CatalogField::AbelianPlaquette | CatalogField::NonabelianSample => {
            let a = catalog::connection(which, cx, cfg.problem.scale)?;
            Ok(VerifyField::Lie(curvature(&a)?))
        }
        _ => Ok(VerifyField::Scalar(catalog::scalar_field(
            which,
            cx,
            cfg.problem.q,
            cfg.problem.scale,
            Some(cfg.problem.beta),
        )?)),
    }
}

pub fn run_verify(cfg: &ExperimentConfig, out_dir: &Path) -> Result<(), CliError> {
    ensure_dir(out_dir)?;
    let cx = cfg.domain.build()?;
    let model = cfg.density.build()?;
    let field = verify_field(cfg, &cx)?;
    let vc = &cfg.verify;
    let mode = vc.quadrature()?;

    let mut failed: Vec<String> = Vec::new();
    let mut summary = serde_json::Map::new();
    summary.insert("schema_version".into(), json!(SCHEMA_VERSION));
    summary.insert("command".into(), json!("verify"));
    summary.insert("seed".into(), json!(cfg.seed));
    summary.insert("density".into(), json!(model.id()));

    let profile_for = |_: &str| -> Result<RadialEnergyProfile<f64>, CliError> {
        let p = match &field {
            VerifyField::Scalar(f) => radial_profile(f, &model, &vc.center, &vc.radii, mode)?,
            VerifyField::Lie(f) => radial_profile(f, &model, &vc.center, &vc.radii, mode)?,
        };
        Ok(p)
    };

    for check in &vc.checks {
        match check.as_str() {
            "monotonicity" => {
                let profile = profile_for("monotonicity")?;
                let report = monotonicity_check(&profile, vc.slack)?;
                let mut rows = Vec::new();
                for (k, ((&r, &e), &c)) in profile
                    .radii
                    .iter()
                    .zip(&profile.energies)
                    .zip(&report.conformal)
                    .enumerate()
                {
                    let step_ok = k == 0 || report.conformal[k] >= report.conformal[k - 1] * (1.0 - vc.slack);
                    rows.push(vec![
                        fmt(r),
                        fmt(e),
                        fmt(c),
                        (step_ok as u8).to_string(),
                    ]);
                }
                write_csv(out_dir, "monotonicity.csv", "r,energy,conformal_energy,pass_flag", &rows)?;
                if !report.pass {
                    failed.push("monotonicity".into());
                }
                summary.insert(
                    "monotonicity".into(),
                    json!({
                        "pass": report.pass,
                        "max_violation": report.max_violation,
                        "worst_pair": report.worst_pair.map(|(a, b)| vec![a, b]),
                        "slack": report.tol,
                    }),
                );
            }
            "identity" => {
                let scalar = match &field {
                    VerifyField::Scalar(f) => f,
                    VerifyField::Lie(_) => {
                        return Err(CliError::Config(
                            "identity check needs a scalar field".into(),
                        ))
                    }
                };
                let spec = VariationSpec::new(vc.tau, vc.delta)?;
                let terms = inner_variation_terms(scalar, &model, &spec, &vc.center)?;
                let residual = terms.relative_residual();
                let pass = residual <= vc.identity_tol;
                write_csv(
                    out_dir,
                    "identity.csv",
                    "tau,delta,lhs_volume,rhs_q,rhs_radial,relative_residual",
                    &[vec![
                        fmt(vc.tau),
                        fmt(vc.delta),
                        fmt(terms.lhs_volume),
                        fmt(terms.rhs_q),
                        fmt(terms.rhs_radial),
                        fmt(residual),
                    ]],
                )?;
                if !pass {
                    failed.push("identity".into());
                }
                summary.insert(
                    "identity".into(),
                    json!({
                        "pass": pass,
                        "relative_residual": residual,
                        "tolerance": vc.identity_tol,
                    }),
                );
            }
            "liouville" => {
                let profile = profile_for("liouville")?;
                let report = liouville_check(&profile, vc.growth_k, vc.q_tol)?;
                let verdict = match report.verdict {
                    LiouvilleVerdict::Forced => "liouville-forced",
                    LiouvilleVerdict::NoConclusion => "no-conclusion",
                };
                // a Forced verdict with nonvanishing Q is an inconsistency
                let pass = report.verdict == LiouvilleVerdict::NoConclusion || report.consistent;
                if !pass {
                    failed.push("liouville".into());
                }
                summary.insert(
                    "liouville".into(),
                    json!({
                        "pass": pass,
                        "verdict": verdict,
                        "fitted_exponent": report.fitted_exponent,
                        "criterion_exponent": report.criterion_exponent,
                        "max_q": report.max_q,
                        "consistent": report.consistent,
                    }),
                );
            }
            "cutoff" => {
                let scalar = match &field {
                    VerifyField::Scalar(f) => f,
                    VerifyField::Lie(_) => {
                        return Err(CliError::Config("cutoff check needs a scalar field".into()))
                    }
                };
                let eta = VariationSpec::new(vc.tau, vc.delta)?;
                let mut rows = Vec::new();
                let mut annuli = Vec::new();
                for &sigma in &vc.sigmas {
                    let spec = CutoffSpec {
                        singular_set: SingularSet::Point(vc.center.clone()),
                        family: CutoffFamily::Ramp { sigma },
                    };
                    let t = cutoff_terms(scalar, &model, &spec, &eta)?;
                    rows.push(vec![
                        fmt(sigma),
                        fmt(t.grad_norm_lm),
                        fmt(t.annulus_e),
                        fmt(t.annulus_radial),
                    ]);
                    annuli.push(t.annulus_e);
                }
                let mut grad_norms = Vec::new();
                for &nu in &vc.nus {
                    let spec = CutoffSpec {
                        singular_set: SingularSet::Point(vc.center.clone()),
                        family: CutoffFamily::LogCapacity {
                            nu,
                            r_out: vc.r_out,
                            ratio: vc.ratio,
                        },
                    };
                    let t = cutoff_terms(scalar, &model, &spec, &eta)?;
                    rows.push(vec![
                        format!("nu{nu}"),
                        fmt(t.grad_norm_lm),
                        fmt(t.annulus_e),
                        fmt(t.annulus_radial),
                    ]);
                    grad_norms.push(t.grad_norm_lm);
                }
                write_csv(
                    out_dir,
                    "cutoff.csv",
                    "sigma_or_nu,grad_norm,annulus_e,annulus_radial",
                    &rows,
                )?;
                let annuli_decreasing = annuli.windows(2).all(|w| w[1] < w[0]);
                let rate = fit_power_law(&vc.sigmas, &annuli).map(|(s, _)| s);
                let grads_decreasing = grad_norms.windows(2).all(|w| w[1] < w[0]);
                let pass = annuli_decreasing
                    && grads_decreasing
                    && rate.map(|r| r > 0.0).unwrap_or(false);
                if !pass {
                    failed.push("cutoff".into());
                }
                summary.insert(
                    "cutoff".into(),
                    json!({
                        "pass": pass,
                        "annulus_rate": rate,
                        "annuli_decreasing": annuli_decreasing,
                        "grad_norms_decreasing": grads_decreasing,
                    }),
                );
            }
            other => {
                return Err(CliError::Config(format!(
                    "unknown verify check \"{other}\" (expected monotonicity, identity, liouville, cutoff)"
                )))
            }
        }
    }

    summary.insert("pass".into(), json!(failed.is_empty()));
    write_json(out_dir, "summary.json", &serde_json::Value::Object(summary))?;
    if failed.is_empty() {
        println!("verify: all requested checks passed");
        Ok(())
    } else {
        Err(CliError::ChecksFailed(failed))
    }
}

pub fn run_refine(cfg: &ExperimentConfig, out_dir: &Path) -> Result<(), CliError> {
    ensure_dir(out_dir)?;
    let model = cfg.density.build()?;
    let base = cfg.domain.clone();
    let mut rows = Vec::new();
    let mut hs = Vec::new();
    let mut values = Vec::new();
    let mut prev: Option<(f64, f64)> = None;

    for level in 0..cfg.refine.levels {
        let mut dom = base.clone();
        let factor = 1usize << level;
        dom.resolution = dom.resolution.iter().map(|r| r * factor).collect();
        let cells: usize = {
            let res: Vec<usize> = if dom.resolution.len() == 1 {
                vec![dom.resolution[0]; dom.n]
            } else {
                dom.resolution.clone()
            };
            res.iter().product()
        };
        if cells > cfg.refine.max_cells {
            return Err(CliError::Config(format!(
                "refinement level {level} needs {cells} cells, exceeding the cap {}",
                cfg.refine.max_cells
            )));
        }
        let cx = dom.build()?;
        let h = cx.min_spacing();
        let value = refine_value(cfg, &cx, &model)?;
        let order = match prev {
            Some((ph, pv)) if value > 0.0 && pv > 0.0 => {
                Some((pv / value).ln() / (ph / h).ln())
            }
            _ => None,
        };
        rows.push(vec![
            level.to_string(),
            format!("{:?}", cx.resolution()),
            fmt(h),
            fmt(value),
            order.map(fmt).unwrap_or_default(),
        ]);
        hs.push(h);
        values.push(value);
        prev = Some((h, value));
    }
    write_csv(out_dir, "refine.csv", "level,resolution,h,value,order", &rows)?;

    let fitted = if values.iter().all(|&v| v > 0.0) {
        fit_power_law(&hs, &values).map(|(s, _)| s)
    } else {
        None
    };
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "refine",
        "seed": cfg.seed,
        "check": cfg.refine.check,
        "h": hs,
        "values": values,
        "fitted_order": fitted,
    });
    write_json(out_dir, "summary.json", &summary)?;
    match fitted {
        Some(o) => println!("refine[{}]: fitted order {o:.2}", cfg.refine.check),
        None => println!(
            "refine[{}]: values at rounding level, no order to fit",
            cfg.refine.check
        ),
    }
    Ok(())
}

/// One measured quantity per refinement level.
fn refine_value(
    cfg: &ExperimentConfig,
    cx: &Arc<CubicalComplex<f64>>,
    model: &DensityModel<f64>,
) -> Result<f64, CliError> {
    match cfg.refine.check.as_str() {
        // coboundary-squared of a seeded random node field: stays at
        // rounding level on every grid
        "dd" => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let coeffs: Vec<f64> = (0..cx.num_cells(0))
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect();
            let f = FormField::from_coeffs(cx, 0, coeffs)?;
            let dd = f.exterior_derivative()?.exterior_derivative()?;
            Ok(dd.max_abs())
        }
        "bianchi" => {
            let a = catalog::connection(CatalogField::NonabelianSample, cx, 0.9)?;
            let f = curvature(&a)?;
            Ok(bianchi_residual(&a, &f)?)
        }
        "identity" => {
            let field =
                catalog::scalar_field(CatalogField::HarmonicQuadratic, cx, 1, cfg.problem.scale, None)?;
            let spec = VariationSpec::new(cfg.verify.tau, cfg.verify.delta)?;
            let terms = inner_variation_terms(&field, model, &spec, &cfg.verify.center)?;
            Ok(terms.relative_residual())
        }
        // commutation defect of the gauge action with curvature
        "gauge-consistency" => {
            let a = catalog::connection(CatalogField::NonabelianSample, cx, 0.8)?;
            let g = GaugeField::from_axis_angle_fn(cx, |x| {
                [0.5 * x[1].sin(), 0.3 * x[2].cos(), 0.2 * x[0]]
            });
            let lhs = curvature(&gauge_transform_connection(&a, &g)?)?;
            let rhs = gauge_transform_curvature(&curvature(&a)?, &g)?;
            let mut worst = 0.0f64;
            for (u, v) in lhs.coeffs().iter().zip(rhs.coeffs()) {
                let d = [u[0] - v[0], u[1] - v[1], u[2] - v[2]];
                worst = worst.max((d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt());
            }
            Ok(worst)
        }
        // excess of the radial-gauge bound over ½|x|·sup|F| on the abelian
        // sample (clamped at zero so a safely-satisfied bound reads 0)
        "exp-gauge" => {
            let a = catalog::connection(CatalogField::AbelianPlaquette, cx, 1.0)?;
            let f = curvature(&a)?;
            let sup_f = f.max_abs();
            let center: Vec<usize> = cx.resolution().iter().map(|r| r / 2).collect();
            let out = exponential_gauge(&a, &center)?;
            let qfield = out.transformed.pointwise_q();
            let mut c0 = vec![0.0; cx.dim()];
            cx.node_coords(&center, &mut c0);
            let mut x = vec![0.0; cx.dim()];
            let mut excess = 0.0f64;
            let mut worst_flat = 0usize;
            cx.for_each_cell(0, |_, _, idx, flat| {
                cx.node_coords(idx, &mut x);
                let r = x
                    .iter()
                    .zip(&c0)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                let e = qfield.coeffs()[flat].sqrt() - 0.5 * r * sup_f;
                if e > excess {
                    excess = e;
                    worst_flat = flat;
                }
            });
            let _ = worst_flat;
            Ok(excess.max(0.0))
        }
        other => Err(CliError::Config(format!(
            "unknown refine check \"{other}\" (expected dd, bianchi, identity, gauge-consistency, exp-gauge)"
        ))),
    }
}

pub fn run_catalog() {
    println!("available analytic fields:");
    for &which in CatalogField::all() {
        println!("  {:<22} {}", which.name(), which.description());
    }
}
