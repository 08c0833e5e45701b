//! `stark`: Wannier–Stark sweeps — Bloch periods, maximum spreads,
//! the spread-coefficient fit, and anisotropic per-axis ratios.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use qlattice_core::localization::{
    axis_resolved_bloch, bloch_period, max_spread, stark_boundary_flag, transport_curve,
};
use qlattice_core::{LatticeKind, LatticeSpec, StarkField};

use crate::commands::qrw::evolve_from_source;
use crate::config::{time_grid, StarkSweepSection};
use crate::output::{write_json, CsvWriter};
use crate::{OutputFormat, RunContext};

#[derive(Serialize)]
struct SweepRow {
    f_over_j: f64,
    period: Option<f64>,
    period_theory: f64,
    revival: Option<f64>,
    max_spread: f64,
    spread_theory_1d: f64,
    boundary_flagged: bool,
}

#[derive(Serialize)]
struct AnisoRow {
    ratio: f64,
    f_x_over_j: f64,
    f_y_over_j: f64,
    period_x: f64,
    period_y: f64,
    period_ratio: f64,
    spread_x: f64,
    spread_y: f64,
    spread_ratio: f64,
    boundary_flagged: bool,
}

#[derive(Serialize)]
struct StarkSummary {
    /// Coefficient c in `d_B^max = c·J/F`, through-origin fit over the
    /// unflagged sweep points.
    spread_coefficient: Option<f64>,
    spread_points_used: usize,
    rows: Vec<SweepRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    anisotropy: Option<Vec<AnisoRow>>,
}

/// Walks start at the Stark origin: chain center / grid corner, unless
/// the config pinned an explicit source.
fn stark_source(spec: &LatticeSpec, user_set: bool) -> usize {
    if user_set {
        return spec.source();
    }
    match spec.kind() {
        LatticeKind::Chain { .. } => spec.center_site(),
        LatticeKind::Grid { .. } => spec.source(),
    }
}

pub fn run(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let resolved = ctx.config.resolve()?;
    let section: StarkSweepSection = ctx
        .config
        .stark_sweep
        .clone()
        .context("stark requires a [stark_sweep] section with f_values")?;
    if section.f_values.iter().any(|&f| f <= 0.0) {
        bail!("f_values must be positive");
    }
    let periods = section.periods.unwrap_or(1.75);
    let points = section.points.unwrap_or(1201);

    let base = resolved.spec.clone();
    let source = stark_source(&base, ctx.config.lattice.source.is_some());
    let base = base.with_source(source).map_err(|e| anyhow::anyhow!("{e}"))?;
    let extent = base.extent_from(source).map_err(|e| anyhow::anyhow!("{e}"))?;

    let mut rows = Vec::new();
    for &f in &section.f_values {
        let spec = base
            .apply_stark(&StarkField::isotropic(f))
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        let t_b_expected = core::f64::consts::TAU / f;
        let times = time_grid(periods * t_b_expected, points)?;
        let traj = evolve_from_source(&spec, &resolved.noise, &times)?;
        let curve =
            transport_curve(&traj, &spec, source).map_err(|e| anyhow::anyhow!("{e}"))?;
        let detected = bloch_period(&curve).ok();
        let spread = max_spread(&curve).map_err(|e| anyhow::anyhow!("{e}"))?;
        rows.push(SweepRow {
            f_over_j: f,
            period: detected.map(|b| b.period),
            period_theory: t_b_expected,
            revival: detected.map(|b| b.revival),
            max_spread: spread.value,
            spread_theory_1d: 2.0 * 2.0f64.sqrt() / f,
            boundary_flagged: stark_boundary_flag(1.0, f, extent),
        });
    }

    // through-origin fit d = c·(J/F) over unflagged points
    let fit_pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| !r.boundary_flagged)
        .map(|r| (1.0 / r.f_over_j, r.max_spread))
        .collect();
    let spread_coefficient = if fit_pts.len() >= 2 {
        let sxx: f64 = fit_pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = fit_pts.iter().map(|p| p.0 * p.1).sum();
        Some(sxy / sxx)
    } else {
        None
    };

    let anisotropy = match (&section.anisotropy, base.kind()) {
        (Some(a), LatticeKind::Grid { .. }) => {
            let mut out = Vec::new();
            for &r in &a.ratios {
                if r <= 0.0 {
                    bail!("anisotropy ratios must be positive");
                }
                let field = StarkField::anisotropic(a.fy / r, a.fy);
                let spec = base.apply_stark(&field).map_err(|e| anyhow::anyhow!("{e}"))?;
                // the slower axis (x, since F_x = F_y/r ≤ F_y) sets the span
                let times = time_grid(periods * core::f64::consts::TAU / field.f_x, points)?;
                let traj = evolve_from_source(&spec, &resolved.noise, &times)?;
                let summary = axis_resolved_bloch(&traj, &spec, &field)
                    .map_err(|e| anyhow::anyhow!("{e}"))?;
                out.push(AnisoRow {
                    ratio: r,
                    f_x_over_j: field.f_x,
                    f_y_over_j: field.f_y,
                    period_x: summary.x.period,
                    period_y: summary.y.period,
                    period_ratio: summary.period_ratio,
                    spread_x: summary.x.max_spread,
                    spread_y: summary.y.max_spread,
                    spread_ratio: summary.spread_ratio,
                    boundary_flagged: summary.boundary_flagged,
                });
            }
            Some(out)
        }
        (Some(_), LatticeKind::Chain { .. }) => {
            bail!("anisotropic sweeps need a grid lattice")
        }
        (None, _) => None,
    };

    let mut outputs = Vec::new();
    if matches!(ctx.format, OutputFormat::Csv) {
        let mut w = CsvWriter::create(
            &ctx.out_dir.join("stark_sweep.csv"),
            "stark",
            resolved.j_rad_per_ns,
            &[
                format!("source site: {source}"),
                "period/revival are -1 when no revival was detected".to_string(),
            ],
        )?;
        w.columns(&[
            "f_over_j",
            "t_b",
            "t_b_theory",
            "revival",
            "d_max",
            "d_max_theory_1d",
            "boundary_flagged",
        ])?;
        for r in &rows {
            w.row(&[
                r.f_over_j,
                r.period.unwrap_or(-1.0),
                r.period_theory,
                r.revival.unwrap_or(-1.0),
                r.max_spread,
                r.spread_theory_1d,
                if r.boundary_flagged { 1.0 } else { 0.0 },
            ])?;
        }
        outputs.push(w.finish()?);

        if let Some(aniso) = &anisotropy {
            let mut w = CsvWriter::create(
                &ctx.out_dir.join("stark_aniso.csv"),
                "stark",
                resolved.j_rad_per_ns,
                &[],
            )?;
            w.columns(&[
                "ratio",
                "f_x_over_j",
                "f_y_over_j",
                "t_bx",
                "t_by",
                "period_ratio",
                "d_bx",
                "d_by",
                "spread_ratio",
                "boundary_flagged",
            ])?;
            for r in aniso {
                w.row(&[
                    r.ratio,
                    r.f_x_over_j,
                    r.f_y_over_j,
                    r.period_x,
                    r.period_y,
                    r.period_ratio,
                    r.spread_x,
                    r.spread_y,
                    r.spread_ratio,
                    if r.boundary_flagged { 1.0 } else { 0.0 },
                ])?;
            }
            outputs.push(w.finish()?);
        }
    }

    let summary = StarkSummary {
        spread_coefficient,
        spread_points_used: fit_pts.len(),
        rows,
        anisotropy,
    };
    outputs.push(write_json(&ctx.out_dir.join("stark_summary.json"), &summary)?);
    Ok(outputs)
}
