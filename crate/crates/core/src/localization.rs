//! Transport and localization observables: second moments, group
//! velocities, participation ratios and their coth/tanh closed forms,
//! mean-free-path power-law fits, Bloch periods and maximum spreads.

use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::dynamics::Trajectory;
use crate::lattice::{LatticeSpec, StarkField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalizationError {
    /// All-zero population vector: moments are undefined.
    UndefinedMoment,
    DimensionMismatch,
    /// Fewer points than the fit needs, or nonpositive fit data.
    FitError,
    /// Requested window contains no trajectory points.
    EmptyWindow,
    /// PR outside the attainable range of the chosen closed form.
    OutOfRange,
    /// No revival found in the curve.
    DetectionError,
}

impl fmt::Display for LocalizationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UndefinedMoment => write!(f, "moment undefined for zero total population"),
            Self::DimensionMismatch => write!(f, "length mismatch"),
            Self::FitError => write!(f, "not enough valid points for the fit"),
            Self::EmptyWindow => write!(f, "window contains no samples"),
            Self::OutOfRange => write!(f, "participation ratio outside the attainable range"),
            Self::DetectionError => write!(f, "no revival detected"),
        }
    }
}

impl core::error::Error for LocalizationError {}

/// `⟨M²⟩ = Σ p_i M_i² / Σ p_i`, renormalized by the surviving
/// population so open-system trajectories keep well-defined moments.
pub fn second_moment(populations: &[f64], distances: &[u32]) -> Result<f64, LocalizationError> {
    if populations.len() != distances.len() {
        return Err(LocalizationError::DimensionMismatch);
    }
    let total: f64 = populations.iter().sum();
    if total <= 0.0 {
        return Err(LocalizationError::UndefinedMoment);
    }
    let weighted: f64 = populations
        .iter()
        .zip(distances.iter())
        .map(|(&p, &m)| p * (m as f64) * (m as f64))
        .sum();
    Ok(weighted / total)
}

fn second_moment_f(populations: &[f64], distances: &[f64]) -> Result<f64, LocalizationError> {
    let total: f64 = populations.iter().sum();
    if total <= 0.0 {
        return Err(LocalizationError::UndefinedMoment);
    }
    let weighted: f64 =
        populations.iter().zip(distances.iter()).map(|(&p, &m)| p * m * m).sum();
    Ok(weighted / total)
}

/// `√⟨M²⟩(t)` and the source population along a trajectory.
#[derive(Debug, Clone)]
pub struct TransportCurve {
    pub times: Vec<f64>,
    pub rms_displacement: Vec<f64>,
    pub source_population: Vec<f64>,
}

impl TransportCurve {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Transport curve of a trajectory measured from `source`.
pub fn transport_curve(
    traj: &Trajectory,
    spec: &LatticeSpec,
    source: usize,
) -> Result<TransportCurve, LocalizationError> {
    let distances =
        spec.manhattan_distances(source).map_err(|_| LocalizationError::DimensionMismatch)?;
    let mut rms = Vec::with_capacity(traj.len());
    let mut ns = Vec::with_capacity(traj.len());
    for k in 0..traj.len() {
        let p = traj.site_populations(k);
        rms.push(second_moment(p, &distances)?.sqrt());
        ns.push(p[source]);
    }
    Ok(TransportCurve {
        times: traj.times().to_vec(),
        rms_displacement: rms,
        source_population: ns,
    })
}

/// Least-squares slope with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct VelocityFit {
    pub velocity: f64,
    pub stderr: f64,
    pub points: usize,
    pub window: (f64, f64),
}

/// Group velocity: least-squares slope of `√⟨M²⟩` vs `t` over the
/// window (at least five samples).
pub fn group_velocity(
    curve: &TransportCurve,
    window: (f64, f64),
) -> Result<VelocityFit, LocalizationError> {
    let pts: Vec<(f64, f64)> = curve
        .times
        .iter()
        .zip(curve.rms_displacement.iter())
        .filter(|(&t, _)| t >= window.0 && t <= window.1)
        .map(|(&t, &y)| (t, y))
        .collect();
    let n = pts.len();
    if n < 5 {
        return Err(LocalizationError::FitError);
    }
    let (tm, ym) = (
        pts.iter().map(|p| p.0).sum::<f64>() / n as f64,
        pts.iter().map(|p| p.1).sum::<f64>() / n as f64,
    );
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm) * (p.0 - tm)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    if sxx == 0.0 {
        return Err(LocalizationError::FitError);
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * tm;
    let ssr: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = (ssr / (n - 2) as f64 / sxx).sqrt();
    Ok(VelocityFit { velocity: slope, stderr, points: n, window })
}

/// `PR = (Σ p̂_i²)⁻¹` on the normalized distribution.
pub fn participation_ratio(populations: &[f64]) -> Result<f64, LocalizationError> {
    let total: f64 = populations.iter().sum();
    if total <= 0.0 {
        return Err(LocalizationError::UndefinedMoment);
    }
    let sum_sq: f64 = populations.iter().map(|&p| (p / total) * (p / total)).sum();
    Ok(1.0 / sum_sq)
}

/// Time-averaged participation ratio: populations are renormalized at
/// each sample, averaged over the window, and the PR of the average is
/// returned (average first, then PR).
#[derive(Debug, Clone)]
pub struct PrResult {
    pub pr: f64,
    pub window: (f64, f64),
    /// Localization length from a closed-form inversion, if one was run.
    pub xi: Option<f64>,
    /// Set when the inversion failed or ξ exceeds the lattice extent.
    pub boundary_flagged: bool,
}

pub fn time_averaged_pr(
    traj: &Trajectory,
    window: (f64, f64),
) -> Result<PrResult, LocalizationError> {
    let mut avg: Option<Vec<f64>> = None;
    let mut count = 0usize;
    for (k, &t) in traj.times().iter().enumerate() {
        if t < window.0 || t > window.1 {
            continue;
        }
        let p = traj.site_populations(k);
        let total: f64 = p.iter().sum();
        if total <= 0.0 {
            return Err(LocalizationError::UndefinedMoment);
        }
        let acc = avg.get_or_insert_with(|| alloc::vec![0.0; p.len()]);
        for (a, &x) in acc.iter_mut().zip(p.iter()) {
            *a += x / total;
        }
        count += 1;
    }
    let Some(mut avg) = avg else {
        return Err(LocalizationError::EmptyWindow);
    };
    for a in &mut avg {
        *a /= count as f64;
    }
    Ok(PrResult { pr: participation_ratio(&avg)?, window, xi: None, boundary_flagged: false })
}

/// Closed-form PR(ξ) geometries for an exponentially localized
/// wavefunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrGeometry {
    /// Infinite chain, source in the bulk: `2coth(1/ξ) − tanh(2/ξ)`.
    ChainInfiniteCenter,
    /// Semi-infinite chain, source at the end: `coth(1/ξ)`.
    ChainInfiniteEdge,
    /// N-site chain, source at the end: `coth(1/ξ)·tanh(N/ξ)`.
    ChainFiniteEdge(usize),
    /// Infinite quarter-plane, source at the corner: `coth²(1/ξ)`.
    GridInfiniteCorner,
    /// n×n grid, source at the corner: `coth²(1/ξ)·tanh²(n/ξ)`.
    GridFiniteCorner(usize),
}

impl PrGeometry {
    /// Supremum of the attainable PR (`∞` for the infinite forms).
    pub fn max_pr(&self) -> f64 {
        match self {
            Self::ChainInfiniteCenter | Self::ChainInfiniteEdge | Self::GridInfiniteCorner => {
                f64::INFINITY
            }
            Self::ChainFiniteEdge(n) => *n as f64,
            Self::GridFiniteCorner(n) => (*n * *n) as f64,
        }
    }
}

fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

/// Evaluates the named closed form at localization length `ξ > 0`.
pub fn pr_analytic(geometry: PrGeometry, xi: f64) -> f64 {
    assert!(xi > 0.0, "localization length must be positive");
    match geometry {
        PrGeometry::ChainInfiniteCenter => 2.0 * coth(1.0 / xi) - (2.0 / xi).tanh(),
        PrGeometry::ChainInfiniteEdge => coth(1.0 / xi),
        PrGeometry::ChainFiniteEdge(n) => coth(1.0 / xi) * (n as f64 / xi).tanh(),
        PrGeometry::GridInfiniteCorner => coth(1.0 / xi).powi(2),
        PrGeometry::GridFiniteCorner(n) => {
            (coth(1.0 / xi) * (n as f64 / xi).tanh()).powi(2)
        }
    }
}

/// Inverts [`pr_analytic`] by bisection on the strictly monotone form,
/// to `|ΔPR| < 1e-10`.
pub fn pr_invert(geometry: PrGeometry, pr: f64) -> Result<f64, LocalizationError> {
    if pr <= 1.0 || pr >= geometry.max_pr() {
        return Err(LocalizationError::OutOfRange);
    }
    let mut lo = 1e-9;
    let mut hi = 1.0;
    while pr_analytic(geometry, hi) < pr {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(LocalizationError::OutOfRange);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = pr_analytic(geometry, mid);
        if (v - pr).abs() < 1e-10 {
            return Ok(mid);
        }
        if v < pr {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// 2d localization length from a mean free path:
/// `ξ_2d = l·exp((π/2)·k·l)` with a user-supplied lattice factor `k`
/// (`k = 0` reduces to the strong-disorder identification `ξ = l`).
pub fn xi_2d_from_mean_free_path(l: f64, k: f64) -> f64 {
    l * (core::f64::consts::FRAC_PI_2 * k * l).exp()
}

/// Inverse of [`xi_2d_from_mean_free_path`] by bisection (the forward
/// map is strictly increasing in `l` for `k ≥ 0`).
pub fn mean_free_path_from_xi_2d(xi: f64, k: f64) -> Result<f64, LocalizationError> {
    if xi <= 0.0 || k < 0.0 {
        return Err(LocalizationError::OutOfRange);
    }
    let mut lo = 0.0;
    let mut hi = xi.max(1.0);
    while xi_2d_from_mean_free_path(hi, k) < xi {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(LocalizationError::OutOfRange);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if xi_2d_from_mean_free_path(mid, k) < xi {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Power-law fit `l = a·(J/δ)^γ` by linear least squares on
/// `(ln(J/δ), ln l)`.
#[derive(Debug, Clone, Copy)]
pub struct PowerLawFit {
    pub amplitude: f64,
    pub exponent: f64,
    pub amplitude_stderr: f64,
    pub exponent_stderr: f64,
    pub residual_norm: f64,
    pub points: usize,
}

pub fn fit_power_law(
    delta_over_j: &[f64],
    mean_free_path: &[f64],
) -> Result<PowerLawFit, LocalizationError> {
    if delta_over_j.len() != mean_free_path.len() {
        return Err(LocalizationError::DimensionMismatch);
    }
    let n = delta_over_j.len();
    if n < 3 || delta_over_j.iter().any(|&d| d <= 0.0) || mean_free_path.iter().any(|&l| l <= 0.0)
    {
        return Err(LocalizationError::FitError);
    }
    // x = ln(J/δ) so the slope is γ directly
    let xs: Vec<f64> = delta_over_j.iter().map(|&d| -(d.ln())).collect();
    let ys: Vec<f64> = mean_free_path.iter().map(|&l| l.ln()).collect();
    let xm = xs.iter().sum::<f64>() / n as f64;
    let ym = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    if sxx == 0.0 {
        return Err(LocalizationError::FitError);
    }
    let sxy: f64 = xs.iter().zip(ys.iter()).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let gamma = sxy / sxx;
    let intercept = ym - gamma * xm;
    let ssr: f64 = xs
        .iter()
        .zip(ys.iter())
        .map(|(x, y)| (y - intercept - gamma * x).powi(2))
        .sum();
    let var = if n > 2 { ssr / (n - 2) as f64 } else { 0.0 };
    let gamma_stderr = (var / sxx).sqrt();
    let intercept_stderr = (var * (1.0 / n as f64 + xm * xm / sxx)).sqrt();
    let amplitude = intercept.exp();
    Ok(PowerLawFit {
        amplitude,
        exponent: gamma,
        amplitude_stderr: amplitude * intercept_stderr,
        exponent_stderr: gamma_stderr,
        residual_norm: ssr.sqrt(),
        points: n,
    })
}

/// Vertex of the parabola through three samples around index `k`;
/// falls back to the grid point at the ends of the curve.
fn quadratic_peak(times: &[f64], values: &[f64], k: usize) -> (f64, f64) {
    if k == 0 || k + 1 >= values.len() {
        return (times[k], values[k]);
    }
    let (t0, t1, t2) = (times[k - 1], times[k], times[k + 1]);
    let (y0, y1, y2) = (values[k - 1], values[k], values[k + 1]);
    let d1 = (y1 - y0) / (t1 - t0);
    let d2 = (y2 - y1) / (t2 - t1);
    let curv = (d2 - d1) / (t2 - t0);
    if curv == 0.0 {
        return (times[k], values[k]);
    }
    let tv = 0.5 * (t0 + t1) - d1 / (2.0 * curv);
    let yv = y0 + d1 * (tv - t0) + curv * (tv - t0) * (tv - t1);
    (tv, yv)
}

/// Bloch period and revival quality from a source-population curve.
#[derive(Debug, Clone, Copy)]
pub struct BlochPeriod {
    pub period: f64,
    /// Source population at the revival (quadratic-interpolated).
    pub revival: f64,
}

/// Detects the first revival maximum of the source population after
/// its first minimum. Local maxima below `threshold`× the initial
/// population are skipped: mid-period interference bumps stay well
/// below it while genuine revivals sit near unity.
pub fn bloch_period_with_threshold(
    curve: &TransportCurve,
    threshold: f64,
) -> Result<BlochPeriod, LocalizationError> {
    let ns = &curve.source_population;
    let n = ns.len();
    if n < 3 {
        return Err(LocalizationError::DetectionError);
    }
    let reference = ns[0];
    let mut first_min = None;
    for k in 1..n - 1 {
        if ns[k] <= ns[k - 1] && ns[k] <= ns[k + 1] {
            first_min = Some(k);
            break;
        }
    }
    let Some(first_min) = first_min else {
        return Err(LocalizationError::DetectionError);
    };
    for k in first_min + 1..n - 1 {
        if ns[k] >= ns[k - 1] && ns[k] >= ns[k + 1] && ns[k] >= threshold * reference {
            let (t, y) = quadratic_peak(&curve.times, ns, k);
            return Ok(BlochPeriod { period: t, revival: y });
        }
    }
    Err(LocalizationError::DetectionError)
}

/// [`bloch_period_with_threshold`] at the default 0.5 threshold.
pub fn bloch_period(curve: &TransportCurve) -> Result<BlochPeriod, LocalizationError> {
    bloch_period_with_threshold(curve, 0.5)
}

/// Maximum of `√⟨M²⟩` over the curve, quadratic-interpolated.
#[derive(Debug, Clone, Copy)]
pub struct MaxSpread {
    pub value: f64,
    pub time: f64,
}

pub fn max_spread(curve: &TransportCurve) -> Result<MaxSpread, LocalizationError> {
    if curve.is_empty() {
        return Err(LocalizationError::DetectionError);
    }
    let mut k = 0;
    for (i, &v) in curve.rms_displacement.iter().enumerate() {
        if v > curve.rms_displacement[k] {
            k = i;
        }
    }
    let (time, value) = quadratic_peak(&curve.times, &curve.rms_displacement, k);
    Ok(MaxSpread { value, time })
}

/// Boundary-domination flag for Wannier–Stark runs: the ideal maximum
/// spread `2√2·J/F` exceeding 60% of the distance available from the
/// source means the finite lattice measurably compresses the
/// oscillation.
pub fn stark_boundary_flag(j_ref: f64, f: f64, available_distance: u32) -> bool {
    2.0 * 2.0f64.sqrt() * j_ref / f > 0.6 * available_distance as f64
}

/// Per-axis Bloch observables of an anisotropic 2d run.
#[derive(Debug, Clone, Copy)]
pub struct AxisBloch {
    pub period: f64,
    pub revival: f64,
    pub max_spread: f64,
}

#[derive(Debug, Clone)]
pub struct BlochSummary {
    pub x: AxisBloch,
    pub y: AxisBloch,
    /// `T_Bx / T_By`; equals `r = F_y/F_x` away from boundaries.
    pub period_ratio: f64,
    /// `d^max_Bx / d^max_By`.
    pub spread_ratio: f64,
    pub anisotropy: f64,
    pub boundary_flagged: bool,
}

fn axis_curve(
    traj: &Trajectory,
    spec: &LatticeSpec,
    source: usize,
    horizontal: bool,
) -> Result<(TransportCurve, u32), LocalizationError> {
    let (xs, ys) = spec.coordinates(source);
    let n = spec.sites();
    let mut dist = Vec::with_capacity(n);
    for i in 0..n {
        let (x, y) = spec.coordinates(i);
        dist.push(if horizontal { x.abs_diff(xs) as f64 } else { y.abs_diff(ys) as f64 });
    }
    let available = dist.iter().fold(0.0f64, |a, &b| a.max(b)) as u32;

    let mut rms = Vec::with_capacity(traj.len());
    let mut marginal = Vec::with_capacity(traj.len());
    for k in 0..traj.len() {
        let p = traj.site_populations(k);
        rms.push(second_moment_f(p, &dist)?.sqrt());
        // population of the source row/column: the 1d marginal on the axis
        marginal.push(
            p.iter()
                .enumerate()
                .filter(|(i, _)| dist[*i] == 0.0)
                .map(|(_, &v)| v)
                .sum(),
        );
    }
    Ok((
        TransportCurve {
            times: traj.times().to_vec(),
            rms_displacement: rms,
            source_population: marginal,
        },
        available,
    ))
}

/// Axis-resolved periods and spreads of a grid trajectory under an
/// anisotropic field: second moments use x- and y-distances separately
/// and the per-axis period comes from the revival of the source
/// row/column population.
pub fn axis_resolved_bloch(
    traj: &Trajectory,
    spec: &LatticeSpec,
    field: &StarkField,
) -> Result<BlochSummary, LocalizationError> {
    if field.f_x <= 0.0 || field.f_y <= 0.0 {
        return Err(LocalizationError::DetectionError);
    }
    let source = spec.source();
    let j_ref = spec.mean_coupling();

    let (curve_x, avail_x) = axis_curve(traj, spec, source, true)?;
    let (curve_y, avail_y) = axis_curve(traj, spec, source, false)?;
    let bx = bloch_period(&curve_x)?;
    let by = bloch_period(&curve_y)?;
    let dx = max_spread(&curve_x)?;
    let dy = max_spread(&curve_y)?;

    let flagged = stark_boundary_flag(j_ref, field.f_x, avail_x)
        || stark_boundary_flag(j_ref, field.f_y, avail_y);

    Ok(BlochSummary {
        x: AxisBloch { period: bx.period, revival: bx.revival, max_spread: dx.value },
        y: AxisBloch { period: by.period, revival: by.revival, max_spread: dy.value },
        period_ratio: bx.period / by.period,
        spread_ratio: dx.value / dy.value,
        anisotropy: field.ratio(),
        boundary_flagged: flagged,
    })
}
