//! `anderson`: disorder-ensemble sweeps, participation ratios,
//! localization lengths and the mean-free-path power-law fit.

use std::path::PathBuf;

use anyhow::Result;
use serde::Serialize;

use qlattice_core::LatticeKind;

use crate::config::{AndersonSection, TimeSection, DEFAULT_SEED};
use crate::ensemble::{localization_fit, run_sweep, steady_state_stats, SweepConfig};
use crate::output::{write_json, CsvWriter};
use crate::{OutputFormat, RunContext};

#[derive(Serialize)]
struct FitReport {
    /// `a` in `l = a (J/δ)^γ`, lattice-spacing units.
    amplitude: f64,
    amplitude_stderr: f64,
    /// γ.
    exponent: f64,
    exponent_stderr: f64,
    residual_norm: f64,
    deltas_used: Vec<f64>,
    deltas_excluded_gray: Vec<f64>,
}

#[derive(Serialize)]
struct AndersonSummary {
    seed: u64,
    realizations: usize,
    pr_window_over_j: [f64; 2],
    rows: Vec<PrRow>,
    fit: Option<FitReport>,
}

#[derive(Serialize)]
struct PrRow {
    delta_over_j: f64,
    pr_mean: f64,
    pr_std: f64,
    xi: Option<f64>,
    boundary_flagged: bool,
}

/// Default sweep grids mirroring the sizes the physics needs: 60
/// realizations for chains, 180 for grids.
pub fn default_section(kind: LatticeKind) -> AndersonSection {
    match kind {
        LatticeKind::Chain { .. } => AndersonSection {
            deltas: vec![2.5, 3.0, 3.5, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0],
            realizations: 60,
            seed: DEFAULT_SEED,
            pr_window: None,
            keep_raw: false,
        },
        LatticeKind::Grid { .. } => AndersonSection {
            deltas: vec![4.0, 5.0, 6.0, 7.0, 8.0, 10.0, 12.0],
            realizations: 180,
            seed: DEFAULT_SEED,
            pr_window: None,
            keep_raw: false,
        },
    }
}

pub fn run(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let resolved = ctx.config.resolve()?;
    let section = ctx
        .config
        .anderson
        .clone()
        .unwrap_or_else(|| default_section(resolved.spec.kind()));
    let pr_window = section.pr_window.map(|w| (w[0], w[1])).unwrap_or((5.0, 20.0));

    let times = match &ctx.config.time {
        Some(TimeSection { .. }) => resolved.times.clone(),
        None => crate::config::time_grid(20.0, 201)?,
    };

    let sweep = SweepConfig {
        base: resolved.spec.clone(),
        deltas: section.deltas.clone(),
        realizations: section.realizations,
        master_seed: section.seed,
        times,
        noise: resolved.noise,
        pr_window,
    };
    let result = run_sweep(&sweep)?;
    let steady = steady_state_stats(&result, pr_window)?;
    let fit = localization_fit(&result).ok();

    let mut outputs = Vec::new();
    let rows: Vec<PrRow> = result
        .per_delta
        .iter()
        .map(|s| PrRow {
            delta_over_j: s.delta,
            pr_mean: s.pr_mean,
            pr_std: s.pr_std,
            xi: s.xi,
            boundary_flagged: s.boundary_flagged,
        })
        .collect();

    match ctx.format {
        OutputFormat::Csv => {
            let mut w = CsvWriter::create(
                &ctx.out_dir.join("anderson_pr.csv"),
                "anderson",
                resolved.j_rad_per_ns,
                &[
                    format!("master seed: {}", section.seed),
                    format!("realizations per delta: {}", section.realizations),
                    format!("pr window (1/J): [{}, {}]", pr_window.0, pr_window.1),
                    "xi is the localization length from the closed-form PR inversion; -1 when unavailable".to_string(),
                ],
            )?;
            w.columns(&["delta_over_j", "pr_mean", "pr_std", "xi", "boundary_flagged"])?;
            for s in &result.per_delta {
                w.mixed_row(
                    &[],
                    &[
                        s.delta,
                        s.pr_mean,
                        s.pr_std,
                        s.xi.unwrap_or(-1.0),
                        if s.boundary_flagged { 1.0 } else { 0.0 },
                    ],
                )?;
            }
            outputs.push(w.finish()?);

            let mut w = CsvWriter::create(
                &ctx.out_dir.join("anderson_curves.csv"),
                "anderson",
                resolved.j_rad_per_ns,
                &["ensemble mean and std (divisor R) per time point".to_string()],
            )?;
            w.columns(&[
                "delta_over_j",
                "t",
                "ns_mean",
                "ns_std",
                "rms_mean",
                "rms_std",
                "egl_mean",
                "egl_std",
            ])?;
            for s in &result.per_delta {
                for k in 0..result.times.len() {
                    w.row(&[
                        s.delta,
                        result.times[k],
                        s.ns_mean[k],
                        s.ns_std[k],
                        s.rms_mean[k],
                        s.rms_std[k],
                        s.egl_mean[k],
                        s.egl_std[k],
                    ])?;
                }
            }
            outputs.push(w.finish()?);

            let mut w = CsvWriter::create(
                &ctx.out_dir.join("anderson_steady.csv"),
                "anderson",
                resolved.j_rad_per_ns,
                &[format!(
                    "per-realization time averages over [{}, {}]/J, then mean/std across realizations",
                    pr_window.0, pr_window.1
                )],
            )?;
            w.columns(&[
                "delta_over_j",
                "ns",
                "ns_std",
                "rms",
                "rms_std",
                "egl",
                "egl_std",
                "pr",
                "pr_std",
            ])?;
            for row in &steady {
                w.row(&[
                    row.delta, row.ns, row.ns_std, row.rms, row.rms_std, row.egl, row.egl_std,
                    row.pr, row.pr_std,
                ])?;
            }
            outputs.push(w.finish()?);

            if section.keep_raw {
                let mut w = CsvWriter::create(
                    &ctx.out_dir.join("anderson_raw.csv"),
                    "anderson",
                    resolved.j_rad_per_ns,
                    &[],
                )?;
                w.columns(&["delta_over_j", "realization", "pr"])?;
                for s in &result.per_delta {
                    for (r, m) in s.realizations.iter().enumerate() {
                        w.row(&[s.delta, r as f64, m.pr])?;
                    }
                }
                outputs.push(w.finish()?);
            }
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct CurvesDump {
                times: Vec<f64>,
                per_delta: Vec<CurveRow>,
            }
            #[derive(Serialize)]
            struct CurveRow {
                delta_over_j: f64,
                ns_mean: Vec<f64>,
                ns_std: Vec<f64>,
                rms_mean: Vec<f64>,
                rms_std: Vec<f64>,
                egl_mean: Vec<f64>,
                egl_std: Vec<f64>,
            }
            let dump = CurvesDump {
                times: result.times.clone(),
                per_delta: result
                    .per_delta
                    .iter()
                    .map(|s| CurveRow {
                        delta_over_j: s.delta,
                        ns_mean: s.ns_mean.clone(),
                        ns_std: s.ns_std.clone(),
                        rms_mean: s.rms_mean.clone(),
                        rms_std: s.rms_std.clone(),
                        egl_mean: s.egl_mean.clone(),
                        egl_std: s.egl_std.clone(),
                    })
                    .collect(),
            };
            outputs.push(write_json(&ctx.out_dir.join("anderson_curves.json"), &dump)?);
        }
    }

    let summary = AndersonSummary {
        seed: section.seed,
        realizations: section.realizations,
        pr_window_over_j: [pr_window.0, pr_window.1],
        rows,
        fit: fit.map(|(f, used, excluded)| FitReport {
            amplitude: f.amplitude,
            amplitude_stderr: f.amplitude_stderr,
            exponent: f.exponent,
            exponent_stderr: f.exponent_stderr,
            residual_norm: f.residual_norm,
            deltas_used: used,
            deltas_excluded_gray: excluded,
        }),
    };
    outputs.push(write_json(&ctx.out_dir.join("anderson_fit.json"), &summary)?);
    Ok(outputs)
}
