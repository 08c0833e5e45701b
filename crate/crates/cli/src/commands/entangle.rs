//! `entangle`: per-time entanglement metrics of a walk.

use std::path::PathBuf;

use anyhow::Result;
use serde::Serialize;

use qlattice_core::entanglement::entanglement_report;

use crate::commands::qrw::evolve_from_source;
use crate::output::{write_json, CsvWriter};
use crate::{OutputFormat, RunContext};

#[derive(Serialize)]
struct EntangleDump {
    times: Vec<f64>,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

pub fn run(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let resolved = ctx.config.resolve()?;
    let spec = &resolved.spec;
    let traj = evolve_from_source(spec, &resolved.noise, &resolved.times)?;
    let report = entanglement_report(&traj, spec).map_err(|e| anyhow::anyhow!("{e}"))?;

    // column layout from the first record; identical across times
    let first = report.first().expect("nonempty time grid");
    let mut columns = vec!["t".to_string()];
    for (j, _) in &first.source_pairwise {
        columns.push(format!("c_src_{j}"));
    }
    for (m, a, b, _) in &first.shell_pairwise {
        columns.push(format!("c_m{m}_{a}_{b}"));
    }
    for (m, i, _) in &first.distributed_bounds {
        columns.push(format!("cmin_m{m}_{i}"));
    }
    for (m, avg) in first.shell_average.iter().enumerate() {
        if avg.is_some() {
            columns.push(format!("cbar_m{m}"));
        }
    }
    columns.push("c_source_lattice".to_string());
    columns.push("s_source".to_string());
    columns.push("e_gl".to_string());

    let mut rows = Vec::with_capacity(report.len());
    for rec in &report {
        let mut row = vec![rec.time];
        row.extend(rec.source_pairwise.iter().map(|(_, c)| *c));
        row.extend(rec.shell_pairwise.iter().map(|(_, _, _, c)| *c));
        row.extend(rec.distributed_bounds.iter().map(|(_, _, c)| *c));
        row.extend(rec.shell_average.iter().filter_map(|v| *v));
        row.push(rec.source_lattice);
        row.push(rec.source_entropy);
        row.push(rec.global);
        rows.push(row);
    }

    let mut outputs = Vec::new();
    match ctx.format {
        OutputFormat::Csv => {
            let mut w = CsvWriter::create(
                &ctx.out_dir.join("entangle.csv"),
                "entangle",
                resolved.j_rad_per_ns,
                &[format!("source site: {}", spec.source())],
            )?;
            let names: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
            w.columns(&names)?;
            for row in &rows {
                w.row(row)?;
            }
            outputs.push(w.finish()?);
        }
        OutputFormat::Json => {
            outputs.push(write_json(
                &ctx.out_dir.join("entangle.json"),
                &EntangleDump { times: traj.times().to_vec(), columns, rows },
            )?);
        }
    }
    Ok(outputs)
}
