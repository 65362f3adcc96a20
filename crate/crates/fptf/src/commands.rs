use std::path::{Path, PathBuf};

use fptf_core::design::{DesignMode, DesignResult, DesignStatus, DIAGNOSTIC_ORDERS};
use fptf_core::field::{sample_grid, solve_coefficients};
use fptf_core::{fpt_multicoated, DesignProblem, LayeredStructure};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::checks::{describe, run_suite, Check, Corruption};
use crate::config::{Config, Format, Method};
use crate::error::CliError;
use crate::output::{emit, json as pretty, num, sidecar, Csv};

/// Everything one command invocation needs.
#[derive(Debug, Clone)]
pub struct Run {
    pub config: Config,
    pub out: Option<PathBuf>,
    pub corruption: Corruption,
}

impl Run {
    pub fn new(config: Config, out: Option<PathBuf>, truncation: Option<usize>) -> Result<Self, CliError> {
        let mut config = config;
        if let Some(k) = truncation {
            if k == 0 {
                return Err(CliError::Config("--truncation must be at least 1".into()));
            }
            config.truncation = k;
        }
        let out = out.or_else(|| config.output.path.clone());
        Ok(Self {
            config,
            out,
            corruption: Corruption::default(),
        })
    }

    fn out(&self) -> Option<&Path> {
        self.out.as_deref()
    }

    fn format(&self) -> Format {
        match self.out() {
            Some(p) if p.extension().is_some_and(|e| e == "json") => Format::Json,
            Some(p) if p.extension().is_some_and(|e| e == "csv") => Format::Csv,
            _ => self.config.output.format,
        }
    }
}

pub fn grunsky(run: &Run) -> Result<(), CliError> {
    let k = run.config.truncation;
    let g = run.config.map()?.grunsky(k)?;
    let text = match run.format() {
        Format::Csv => {
            let mut csv = Csv::new(&["m", "k", "re_c", "im_c"]);
            for m in 1..=k {
                for j in 1..=k {
                    let c = g.get(m, j);
                    csv.row(&[m.to_string(), j.to_string(), num(c.re), num(c.im)]);
                }
            }
            csv.into_string()
        }
        Format::Json => {
            let rows: Vec<Value> = (1..=k)
                .flat_map(|m| (1..=k).map(move |j| (m, j)))
                .map(|(m, j)| {
                    let c = g.get(m, j);
                    json!({ "m": m, "k": j, "re_c": c.re, "im_c": c.im })
                })
                .collect();
            pretty(&json!({ "truncation": k, "entries": rows }))
        }
    };
    emit(run.out(), &text)
}

pub fn fpt(run: &Run) -> Result<(), CliError> {
    let k = run.config.truncation;
    let s = run.config.structure()?;
    let t = fpt_multicoated(&s, k)?;
    let diagnostics = t.diagnostics(DIAGNOSTIC_ORDERS, k);
    let conditioning = t.conditioning();
    if conditioning.dominance_margin < 0.0 {
        eprintln!(
            "warning: system is not diagonally dominant (margin {:.3e})",
            conditioning.dominance_margin
        );
    }
    let meta = json!({
        "truncation": k,
        "diagnostics": diagnostics,
        "dominance_margin": conditioning.dominance_margin,
        "pivot_ratio": conditioning.pivot_ratio,
    });
    match run.format() {
        Format::Csv => {
            let mut csv = Csv::new(&["m", "k", "re_F1", "im_F1", "re_F2", "im_F2"]);
            for m in 1..=k {
                for j in 1..=k {
                    let (a, b) = (t.f1_at(m, j), t.f2_at(m, j));
                    csv.row(&[m.to_string(), j.to_string(), num(a.re), num(a.im), num(b.re), num(b.im)]);
                }
            }
            emit(run.out(), &csv.into_string())?;
            match run.out() {
                Some(p) => emit(Some(&sidecar(p)), &pretty(&meta)),
                None => {
                    eprint!("{}", pretty(&meta));
                    Ok(())
                }
            }
        }
        Format::Json => {
            let rows: Vec<Value> = (1..=k)
                .flat_map(|m| (1..=k).map(move |j| (m, j)))
                .map(|(m, j)| {
                    let (a, b) = (t.f1_at(m, j), t.f2_at(m, j));
                    json!({ "m": m, "k": j, "re_F1": a.re, "im_F1": a.im, "re_F2": b.re, "im_F2": b.im })
                })
                .collect();
            let mut body = meta;
            body["entries"] = Value::Array(rows);
            emit(run.out(), &pretty(&body))
        }
    }
}

/// Largest potential jump across any interface at 64 angles.
fn continuity_defect(s: &LayeredStructure, sol: &fptf_core::LayerCoefficients) -> f64 {
    let mut worst = 0.0f64;
    for (j, r) in s.interface_radii().enumerate() {
        let rho = r.ln();
        for i in 0..64 {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / 64.0;
            worst = worst.max((sol.eval_layer(j, rho, theta) - sol.eval_layer(j + 1, rho, theta)).abs());
        }
    }
    worst
}

pub const CONTINUITY_TOLERANCE: f64 = 1e-8;

pub fn field(run: &Run) -> Result<(), CliError> {
    let s = run.config.structure()?;
    let load = run.config.loading(s.map())?;
    let t = fpt_multicoated(&s, run.config.truncation)?;
    let sol = solve_coefficients(&s, &t, &load)?;
    let jump = continuity_defect(&s, &sol);
    if jump > CONTINUITY_TOLERANCE {
        return Err(CliError::Numerical(fptf_core::Error::ConsistencyFailure {
            residual: jump,
            tolerance: CONTINUITY_TOLERANCE,
        }));
    }
    eprintln!("interface continuity defect {jump:.3e}, core residual {:.3e}", sol.core_residual());
    let samples = sample_grid(&s, &sol, &run.config.grid(&s))?;
    let text = match run.format() {
        Format::Csv => {
            let mut csv = Csv::new(&["x", "y", "rho", "theta", "layer", "u"]);
            for p in &samples {
                let (rho, theta) = p.curvilinear.map_or((String::new(), String::new()), |(r, t)| (num(r), num(t)));
                csv.row(&[num(p.x), num(p.y), rho, theta, p.layer.to_string(), num(p.u)]);
            }
            csv.into_string()
        }
        Format::Json => {
            let rows: Vec<Value> = samples
                .iter()
                .map(|p| {
                    let (rho, theta) = p.curvilinear.map_or((None, None), |(r, t)| (Some(r), Some(t)));
                    json!({ "x": p.x, "y": p.y, "rho": rho, "theta": theta, "layer": p.layer, "u": p.u })
                })
                .collect();
            pretty(&json!({ "samples": rows }))
        }
    };
    emit(run.out(), &text)
}

pub fn design_result_json(r: &DesignResult, method: Method, mode: DesignMode) -> Value {
    let status = match r.status {
        DesignStatus::Converged => "converged",
        DesignStatus::Stalled => "stalled",
        DesignStatus::GridBest => "grid-best",
    };
    let trace: Vec<Value> = r
        .trace
        .iter()
        .map(|t| json!({ "iteration": t.iteration, "objective": t.objective, "step_norm": t.step_norm }))
        .collect();
    json!({
        "sigma": r.sigma,
        "objective": r.objective,
        "diagnostics": r.diagnostics,
        "status": status,
        "method": match method { Method::Newton => "newton", Method::Grid => "grid" },
        "mode": match mode { DesignMode::Vanish => "vanish", DesignMode::Minimize => "minimize" },
        "trace": trace,
    })
}

/// Runs the configured design and returns the result with the method used.
pub fn solve_design(config: &Config) -> Result<(DesignResult, Method, DesignProblem), CliError> {
    let d = config.design()?;
    let s = config.structure()?;
    let method = d.method_for(s.map());
    let p = DesignProblem::new(s.clone(), d.order, config.truncation, d.options())?;
    let result = match method {
        Method::Newton => {
            let init = d.init.clone().unwrap_or_else(|| s.sigmas()[1..].to_vec());
            p.newton_solve(&init)?
        }
        Method::Grid => {
            let points = p.grid_points();
            let scores: Vec<f64> = points.par_iter().map(|x| p.score(x)).collect();
            p.grid_select(&points, &scores)?
        }
    };
    Ok((result, method, p))
}

pub fn design(run: &Run) -> Result<(), CliError> {
    let (result, method, p) = solve_design(&run.config)?;
    let mut body = design_result_json(&result, method, p.options().mode);
    body["order"] = json!(p.order());
    body["truncation"] = json!(p.truncation());
    emit(run.out(), &pretty(&body))?;
    if result.status == DesignStatus::Stalled {
        return Err(CliError::Stalled {
            objective: result.objective,
        });
    }
    Ok(())
}

pub fn validate_checks(run: &Run) -> Vec<Check> {
    let cfg = &run.config;
    let structure = cfg.build_structure().map_err(|e| describe(&e));
    run_suite(
        structure,
        |map| cfg.loading(map).map_err(|e| e.to_string()),
        cfg.truncation,
        run.corruption,
    )
}

pub fn validate(run: &Run) -> Result<(), CliError> {
    let checks = validate_checks(run);
    let mut text = String::new();
    for c in &checks {
        text.push_str(&c.line());
        text.push('\n');
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    text.push_str(&format!("{} of {} checks passed\n", checks.len() - failed, checks.len()));
    emit(run.out(), &text)?;
    if failed > 0 {
        return Err(CliError::Validation {
            failed,
            total: checks.len(),
        });
    }
    Ok(())
}
