//! Deterministic disorder-ensemble sweeps.
//!
//! Every realization is keyed by `(master seed, δ index, realization
//! index)` through the core counter streams, so the result is a pure
//! function of the sweep config: workers may compute realizations in
//! any order and the merged output is bit-identical.

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use qlattice_core::entanglement::global_entanglement;
use qlattice_core::localization::{
    fit_power_law, pr_invert, second_moment, time_averaged_pr, PowerLawFit, PrGeometry,
};
use qlattice_core::rng::stream_u64;
use qlattice_core::{
    evolve_lindblad, evolve_unitary, DensityMatrix, DisorderSpec, LatticeKind, LatticeSpec,
    NoiseParams, QuantumState,
};

#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Clean base lattice; disorder is drawn per realization.
    pub base: LatticeSpec,
    /// Disorder strengths δ in units of J.
    pub deltas: Vec<f64>,
    pub realizations: usize,
    pub master_seed: u64,
    pub times: Vec<f64>,
    pub noise: NoiseParams,
    /// PR time-averaging window in units of 1/J.
    pub pr_window: (f64, f64),
}

/// Derived disorder stream for one `(δ index, realization)` cell.
pub fn realization_disorder(master_seed: u64, delta: f64, delta_index: usize, r: usize) -> DisorderSpec {
    DisorderSpec::new(delta, stream_u64(master_seed, delta_index as u64, r as u64), 0)
}

/// Per-realization metric curves and scalars.
#[derive(Debug, Clone)]
pub struct RealizationMetrics {
    pub source_population: Vec<f64>,
    pub rms_displacement: Vec<f64>,
    pub global_entanglement: Vec<f64>,
    pub pr: f64,
}

#[derive(Debug, Clone)]
pub struct DeltaStats {
    pub delta: f64,
    pub pr_mean: f64,
    pub pr_std: f64,
    /// Localization length from the closed-form inversion of the mean
    /// PR, when the geometry has one and the value is attainable.
    pub xi: Option<f64>,
    /// ξ missing or exceeding the lattice extent from the source.
    pub boundary_flagged: bool,
    pub ns_mean: Vec<f64>,
    pub ns_std: Vec<f64>,
    pub rms_mean: Vec<f64>,
    pub rms_std: Vec<f64>,
    pub egl_mean: Vec<f64>,
    pub egl_std: Vec<f64>,
    pub realizations: Vec<RealizationMetrics>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub times: Vec<f64>,
    pub per_delta: Vec<DeltaStats>,
}

/// Population mean/std (divisor R) per time point.
fn aggregate_curves(curves: &[&Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let r = curves.len() as f64;
    let t = curves[0].len();
    let mut mean = vec![0.0; t];
    let mut std = vec![0.0; t];
    for c in curves {
        for (m, &v) in mean.iter_mut().zip(c.iter()) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= r;
    }
    for c in curves {
        for ((s, &m), &v) in std.iter_mut().zip(mean.iter()).zip(c.iter()) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut std {
        *s = (*s / r).sqrt();
    }
    (mean, std)
}

fn scalar_stats(values: &[f64]) -> (f64, f64) {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / r;
    (mean, var.sqrt())
}

/// Closed-form PR(ξ) geometry matching the lattice and its source, if
/// one exists.
pub fn inversion_geometry(spec: &LatticeSpec) -> Option<PrGeometry> {
    match spec.kind() {
        LatticeKind::Chain { sites } => {
            (spec.source() == 0 || spec.source() == sites - 1)
                .then_some(PrGeometry::ChainFiniteEdge(sites))
        }
        LatticeKind::Grid { nx, ny } => {
            let (x, y) = spec.coordinates(spec.source());
            let corner = (x == 0 || x == nx - 1) && (y == 0 || y == ny - 1);
            (nx == ny && corner).then_some(PrGeometry::GridFiniteCorner(nx))
        }
    }
}

fn run_realization(
    cfg: &SweepConfig,
    delta: f64,
    delta_index: usize,
    r: usize,
) -> Result<RealizationMetrics> {
    let disorder = realization_disorder(cfg.master_seed, delta, delta_index, r);
    let spec = cfg.base.apply_disorder(&disorder);
    let source = spec.source();
    let distances = spec
        .manhattan_distances(source)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let h = spec.hamiltonian();

    let traj = if cfg.noise.is_closed() {
        evolve_unitary(&h, &QuantumState::site_basis(spec.sites(), source), &cfg.times)
    } else {
        evolve_lindblad(
            &h,
            &DensityMatrix::from_excited_site(spec.sites(), source),
            &cfg.noise,
            &cfg.times,
        )
    }
    .with_context(|| format!("delta index {delta_index}, realization {r}"))?;

    let mut ns = Vec::with_capacity(traj.len());
    let mut rms = Vec::with_capacity(traj.len());
    let mut egl = Vec::with_capacity(traj.len());
    for k in 0..traj.len() {
        let p = traj.site_populations(k);
        ns.push(p[source]);
        rms.push(second_moment(p, &distances).map_err(|e| anyhow::anyhow!("{e}"))?.sqrt());
        egl.push(global_entanglement(&traj.density_matrix(k)));
    }
    let pr = time_averaged_pr(&traj, cfg.pr_window)
        .map_err(|e| anyhow::anyhow!("{e}"))?
        .pr;
    Ok(RealizationMetrics { source_population: ns, rms_displacement: rms, global_entanglement: egl, pr })
}

/// Runs the sweep. The `(δ, r)` tasks execute on the current rayon
/// pool; results merge in index order, so the output is independent of
/// worker count and schedule.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    if cfg.deltas.is_empty() || cfg.realizations == 0 {
        bail!("sweep needs at least one delta and one realization");
    }
    let tasks: Vec<(usize, usize)> = (0..cfg.deltas.len())
        .flat_map(|d| (0..cfg.realizations).map(move |r| (d, r)))
        .collect();
    let results: Vec<Result<RealizationMetrics>> = tasks
        .par_iter()
        .map(|&(d, r)| run_realization(cfg, cfg.deltas[d], d, r))
        .collect();

    let extent = cfg
        .base
        .extent_from(cfg.base.source())
        .map_err(|e| anyhow::anyhow!("{e}"))? as f64;
    let geometry = inversion_geometry(&cfg.base);

    let mut iter = results.into_iter();
    let mut per_delta = Vec::with_capacity(cfg.deltas.len());
    for (d, &delta) in cfg.deltas.iter().enumerate() {
        let metrics: Vec<RealizationMetrics> = (0..cfg.realizations)
            .map(|r| {
                iter.next()
                    .expect("task list covers the grid")
                    .with_context(|| format!("delta {delta} (index {d}), realization {r}"))
            })
            .collect::<Result<_>>()?;
        let (ns_mean, ns_std) =
            aggregate_curves(&metrics.iter().map(|m| &m.source_population).collect::<Vec<_>>());
        let (rms_mean, rms_std) =
            aggregate_curves(&metrics.iter().map(|m| &m.rms_displacement).collect::<Vec<_>>());
        let (egl_mean, egl_std) =
            aggregate_curves(&metrics.iter().map(|m| &m.global_entanglement).collect::<Vec<_>>());
        let (pr_mean, pr_std) = scalar_stats(&metrics.iter().map(|m| m.pr).collect::<Vec<_>>());

        let xi = geometry.and_then(|g| pr_invert(g, pr_mean).ok());
        let boundary_flagged = xi.is_none_or(|x| x > extent);

        per_delta.push(DeltaStats {
            delta,
            pr_mean,
            pr_std,
            xi,
            boundary_flagged,
            ns_mean,
            ns_std,
            rms_mean,
            rms_std,
            egl_mean,
            egl_std,
            realizations: metrics,
        });
    }
    Ok(SweepResult { times: cfg.times.clone(), per_delta })
}

/// Steady-state scalars per δ: each realization's metric is
/// time-averaged over `window` first, then averaged across
/// realizations (std with divisor R).
#[derive(Debug, Clone)]
pub struct SteadyStateRow {
    pub delta: f64,
    pub ns: f64,
    pub ns_std: f64,
    pub rms: f64,
    pub rms_std: f64,
    pub egl: f64,
    pub egl_std: f64,
    pub pr: f64,
    pub pr_std: f64,
}

pub fn steady_state_stats(
    result: &SweepResult,
    window: (f64, f64),
) -> Result<Vec<SteadyStateRow>> {
    let idx: Vec<usize> = result
        .times
        .iter()
        .enumerate()
        .filter(|(_, &t)| t >= window.0 && t <= window.1)
        .map(|(k, _)| k)
        .collect();
    if idx.is_empty() {
        bail!("steady-state window contains no samples");
    }
    let window_mean =
        |c: &[f64]| idx.iter().map(|&k| c[k]).sum::<f64>() / idx.len() as f64;

    Ok(result
        .per_delta
        .iter()
        .map(|stats| {
            let ns: Vec<f64> =
                stats.realizations.iter().map(|m| window_mean(&m.source_population)).collect();
            let rms: Vec<f64> =
                stats.realizations.iter().map(|m| window_mean(&m.rms_displacement)).collect();
            let egl: Vec<f64> =
                stats.realizations.iter().map(|m| window_mean(&m.global_entanglement)).collect();
            let (ns, ns_std) = scalar_stats(&ns);
            let (rms, rms_std) = scalar_stats(&rms);
            let (egl, egl_std) = scalar_stats(&egl);
            SteadyStateRow {
                delta: stats.delta,
                ns,
                ns_std,
                rms,
                rms_std,
                egl,
                egl_std,
                pr: stats.pr_mean,
                pr_std: stats.pr_std,
            }
        })
        .collect())
}

/// Mean-free-path power-law fit over the non-gray points
/// (`l = ξ`, excluding deltas whose ξ is missing or beyond the lattice
/// extent). Returns the fit and the δ values used.
pub fn localization_fit(result: &SweepResult) -> Result<(PowerLawFit, Vec<f64>, Vec<f64>)> {
    let mut used = Vec::new();
    let mut excluded = Vec::new();
    let mut lengths = Vec::new();
    for stats in &result.per_delta {
        match stats.xi {
            Some(xi) if !stats.boundary_flagged => {
                used.push(stats.delta);
                lengths.push(xi);
            }
            _ => excluded.push(stats.delta),
        }
    }
    let fit = fit_power_law(&used, &lengths).map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok((fit, used, excluded))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qlattice_core::LatticeSpec;

    fn small_cfg(seed: u64) -> SweepConfig {
        SweepConfig {
            base: LatticeSpec::chain(5, 1.0).unwrap(),
            deltas: vec![0.0, 4.0],
            realizations: 6,
            master_seed: seed,
            times: (0..81).map(|k| 20.0 * k as f64 / 80.0).collect(),
            noise: NoiseParams::default(),
            pr_window: (5.0, 20.0),
        }
    }

    #[test]
    fn zero_disorder_has_zero_variance() {
        let result = run_sweep(&small_cfg(1)).unwrap();
        let clean = &result.per_delta[0];
        assert!(clean.pr_std < 1e-12);
        assert!(clean.ns_std.iter().all(|&s| s < 1e-12));
    }

    #[test]
    fn sweep_is_deterministic_across_pool_sizes() {
        let cfg = small_cfg(7);
        let run = |workers: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap();
            pool.install(|| run_sweep(&cfg).unwrap())
        };
        let a = run(1);
        let b = run(4);
        for (x, y) in a.per_delta.iter().zip(b.per_delta.iter()) {
            assert_eq!(x.pr_mean.to_bits(), y.pr_mean.to_bits());
            for (u, v) in x.ns_mean.iter().zip(y.ns_mean.iter()) {
                assert_eq!(u.to_bits(), v.to_bits());
            }
        }
    }

    #[test]
    fn distinct_realizations_get_distinct_detunings() {
        let mut seen = std::collections::HashSet::new();
        for d in 0..3usize {
            for r in 0..50usize {
                let spec = LatticeSpec::chain(7, 1.0)
                    .unwrap()
                    .apply_disorder(&realization_disorder(99, 1.0, d, r));
                let key: Vec<u64> = spec.detunings().iter().map(|e| e.to_bits()).collect();
                assert!(seen.insert(key), "collision at ({d}, {r})");
            }
        }
    }

    #[test]
    fn aggregation_matches_naive_recomputation() {
        let result = run_sweep(&small_cfg(3)).unwrap();
        let stats = &result.per_delta[1];
        let r = stats.realizations.len() as f64;
        for k in [0usize, 40, 80] {
            let naive: f64 =
                stats.realizations.iter().map(|m| m.source_population[k]).sum::<f64>() / r;
            assert!((naive - stats.ns_mean[k]).abs() < 1e-12);
        }
        let naive_pr: f64 = stats.realizations.iter().map(|m| m.pr).sum::<f64>() / r;
        assert!((naive_pr - stats.pr_mean).abs() < 1e-12);
    }

    #[test]
    fn steady_state_of_constant_metric_is_the_constant() {
        // δ = 0 keeps every realization identical; the steady-state n̄_s
        // equals the plain time average over the window
        let result = run_sweep(&small_cfg(5)).unwrap();
        let rows = steady_state_stats(&result, (5.0, 20.0)).unwrap();
        let idx: Vec<usize> = result
            .times
            .iter()
            .enumerate()
            .filter(|(_, &t)| (5.0..=20.0).contains(&t))
            .map(|(k, _)| k)
            .collect();
        let expect: f64 = idx
            .iter()
            .map(|&k| result.per_delta[0].realizations[0].source_population[k])
            .sum::<f64>()
            / idx.len() as f64;
        assert!((rows[0].ns - expect).abs() < 1e-12);
        assert!(rows[0].ns_std < 1e-12);
    }
}
