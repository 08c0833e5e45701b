//! `qrw`: quantum-random-walk trajectories, transport curves and the
//! fitted group velocity.

use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::Serialize;

use qlattice_core::localization::{group_velocity, transport_curve};
use qlattice_core::reduction::{column_reduce, verify_reduction};
use qlattice_core::{
    evolve_lindblad, evolve_unitary, DensityMatrix, QuantumState, Trajectory, TrajectoryStates,
};

use crate::config::default_velocity_window;
use crate::output::{write_json, CsvWriter};
use crate::{OutputFormat, RunContext};

#[derive(Serialize)]
struct VelocityReport {
    velocity_over_j: f64,
    stderr_over_j: f64,
    window_over_j: [f64; 2],
    points: usize,
}

#[derive(Serialize)]
struct TrajectoryDump {
    times: Vec<f64>,
    site_populations: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct StatesDump {
    times: Vec<f64>,
    /// Pure runs: per time, per site, `[re, im]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    amplitudes: Option<Vec<Vec<[f64; 2]>>>,
    /// Open-system runs: per time, dense matrix of `[re, im]` over the
    /// vacuum+sites basis.
    #[serde(skip_serializing_if = "Option::is_none")]
    density_matrices: Option<Vec<Vec<Vec<[f64; 2]>>>>,
}

#[derive(Serialize)]
struct ReductionReport {
    nodes: usize,
    shell_sizes: Vec<usize>,
    couplings_over_j: Vec<f64>,
    max_deviation: f64,
}

pub fn evolve_from_source(
    ctx_spec: &qlattice_core::LatticeSpec,
    noise: &qlattice_core::NoiseParams,
    times: &[f64],
) -> Result<Trajectory> {
    let source = ctx_spec.source();
    let traj = if noise.is_closed() {
        evolve_unitary(
            &ctx_spec.hamiltonian(),
            &QuantumState::site_basis(ctx_spec.sites(), source),
            times,
        )
    } else {
        evolve_lindblad(
            &ctx_spec.hamiltonian(),
            &DensityMatrix::from_excited_site(ctx_spec.sites(), source),
            noise,
            times,
        )
    };
    traj.map_err(|e| anyhow::anyhow!("evolution failed: {e}"))
}

pub fn run(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let resolved = ctx.config.resolve()?;
    let spec = &resolved.spec;
    let qrw = ctx.config.qrw.clone().unwrap_or(crate::config::QrwSection {
        velocity_window: None,
        emit_states: false,
        reduce_check: false,
    });

    let traj = evolve_from_source(spec, &resolved.noise, &resolved.times)?;
    let curve = transport_curve(&traj, spec, spec.source())
        .map_err(|e| anyhow::anyhow!("{e}"))?;

    let mut outputs = Vec::new();

    match ctx.format {
        OutputFormat::Csv => {
            let mut w = CsvWriter::create(
                &ctx.out_dir.join("qrw_trajectory.csv"),
                "qrw",
                resolved.j_rad_per_ns,
                &[format!("source site: {}", spec.source())],
            )?;
            let names: Vec<String> =
                (0..spec.sites()).map(|i| format!("p_site{i}")).collect();
            let mut cols = vec!["t"];
            cols.extend(names.iter().map(|s| s.as_str()));
            w.columns(&cols)?;
            for k in 0..traj.len() {
                let mut row = vec![traj.times()[k]];
                row.extend_from_slice(traj.site_populations(k));
                w.row(&row)?;
            }
            outputs.push(w.finish()?);

            let mut w = CsvWriter::create(
                &ctx.out_dir.join("qrw_transport.csv"),
                "qrw",
                resolved.j_rad_per_ns,
                &[],
            )?;
            w.columns(&["t", "rms_displacement", "source_population"])?;
            for k in 0..curve.len() {
                w.row(&[curve.times[k], curve.rms_displacement[k], curve.source_population[k]])?;
            }
            outputs.push(w.finish()?);
        }
        OutputFormat::Json => {
            let dump = TrajectoryDump {
                times: traj.times().to_vec(),
                site_populations: (0..traj.len())
                    .map(|k| traj.site_populations(k).to_vec())
                    .collect(),
            };
            outputs.push(write_json(&ctx.out_dir.join("qrw_trajectory.json"), &dump)?);
            #[derive(Serialize)]
            struct TransportDump {
                times: Vec<f64>,
                rms_displacement: Vec<f64>,
                source_population: Vec<f64>,
            }
            outputs.push(write_json(
                &ctx.out_dir.join("qrw_transport.json"),
                &TransportDump {
                    times: curve.times.clone(),
                    rms_displacement: curve.rms_displacement.clone(),
                    source_population: curve.source_population.clone(),
                },
            )?);
        }
    }

    let window = qrw
        .velocity_window
        .map(|w| (w[0], w[1]))
        .or_else(|| default_velocity_window(spec))
        .context(
            "no default velocity window for this source position; set qrw.velocity_window",
        )?;
    let fit = group_velocity(&curve, window).map_err(|e| anyhow::anyhow!("{e}"))?;
    outputs.push(write_json(
        &ctx.out_dir.join("qrw_velocity.json"),
        &VelocityReport {
            velocity_over_j: fit.velocity,
            stderr_over_j: fit.stderr,
            window_over_j: [window.0, window.1],
            points: fit.points,
        },
    )?);

    if qrw.emit_states {
        let states = match traj.states() {
            TrajectoryStates::Pure(states) => StatesDump {
                times: traj.times().to_vec(),
                amplitudes: Some(
                    states
                        .iter()
                        .map(|s| s.amplitudes().iter().map(|z| [z.re, z.im]).collect())
                        .collect(),
                ),
                density_matrices: None,
            },
            TrajectoryStates::Mixed(states) => StatesDump {
                times: traj.times().to_vec(),
                amplitudes: None,
                density_matrices: Some(
                    states
                        .iter()
                        .map(|rho| {
                            let m = rho.as_matrix();
                            (0..m.nrows())
                                .map(|i| {
                                    (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()
                                })
                                .collect()
                        })
                        .collect(),
                ),
            },
        };
        outputs.push(write_json(&ctx.out_dir.join("qrw_states.json"), &states)?);
    }

    if qrw.reduce_check {
        let red = column_reduce(spec, spec.source()).map_err(|e| anyhow::anyhow!("{e}"))?;
        let dev = verify_reduction(spec, spec.source(), &resolved.times)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        outputs.push(write_json(
            &ctx.out_dir.join("qrw_reduction.json"),
            &ReductionReport {
                nodes: red.node_count(),
                shell_sizes: red.shell_sizes(),
                couplings_over_j: red.couplings().to_vec(),
                max_deviation: dev,
            },
        )?);
    }

    Ok(outputs)
}
