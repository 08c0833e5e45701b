//! `reduce`: the distance-shell reduction of a corner walk, printed as
//! JSON and optionally verified against the full evolution.

use std::path::PathBuf;

use anyhow::Result;
use serde::Serialize;

use qlattice_core::reduction::{column_reduce, verify_reduction};

use crate::config::time_grid;
use crate::output::write_json;
use crate::RunContext;

#[derive(Serialize)]
struct ReduceReport {
    root: usize,
    nodes: usize,
    shell_sizes: Vec<usize>,
    shells: Vec<Vec<usize>>,
    couplings_over_j: Vec<f64>,
    detunings_over_j: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<Verification>,
}

#[derive(Serialize)]
struct Verification {
    max_deviation: f64,
    time_max_over_j: f64,
    points: usize,
}

pub fn run(ctx: &RunContext, verify: bool) -> Result<Vec<PathBuf>> {
    let resolved = ctx.config.resolve()?;
    let spec = &resolved.spec;
    let root = spec.source();
    let reduced = column_reduce(spec, root).map_err(|e| anyhow::anyhow!("{e}"))?;

    let verification = if verify {
        let times = if ctx.config.time.is_some() {
            resolved.times.clone()
        } else {
            time_grid(10.0, 501)?
        };
        let dev = verify_reduction(spec, root, &times).map_err(|e| anyhow::anyhow!("{e}"))?;
        Some(Verification {
            max_deviation: dev,
            time_max_over_j: *times.last().expect("nonempty"),
            points: times.len(),
        })
    } else {
        None
    };

    let report = ReduceReport {
        root,
        nodes: reduced.node_count(),
        shell_sizes: reduced.shell_sizes(),
        shells: reduced.shells().to_vec(),
        couplings_over_j: reduced.couplings().to_vec(),
        detunings_over_j: reduced.detunings().to_vec(),
        verification,
    };

    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(vec![write_json(&ctx.out_dir.join("reduce.json"), &report)?])
}
