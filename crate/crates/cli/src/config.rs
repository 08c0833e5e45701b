//! Structured text configuration (TOML) and its resolution into core
//! types.
//!
//! Units: `coupling` values set the energy scale; everything else is
//! expressed relative to the mean coupling `J` — detunings, disorder
//! strengths, gradients and rates in units of `J`, times in units of
//! `1/J`. Giving `coupling_mhz` (an ordinary frequency; it is
//! multiplied by 2π internally) additionally lets time sections use
//! `unit = "ns"` and stamps output headers with the `1/J ↔ ns`
//! conversion.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use qlattice_core::{
    DisorderSpec, LatticeKind, LatticeSpec, NoiseParams, StarkField, StarkOrigin,
};

pub const DEFAULT_SEED: u64 = 2718;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub lattice: LatticeSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disorder: Option<DisorderSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stark: Option<StarkSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qrw: Option<QrwSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anderson: Option<AndersonSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stark_sweep: Option<StarkSweepSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sites: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nx: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ny: Option<usize>,
    /// Uniform coupling strength (defaults to 1).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
    /// Device coupling J/2π in MHz; enables ns time units in headers.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling_mhz: Option<f64>,
    /// "edge" | "corner" | "center" | site index.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<toml::Value>,
    /// Per-bond overrides (strength relative to `coupling`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bonds: Option<Vec<BondOverride>>,
    /// Explicit detunings in units of J.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detunings: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BondOverride {
    pub a: usize,
    pub b: usize,
    pub strength: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DisorderSection {
    /// δ in units of J.
    pub strength: f64,
    pub seed: u64,
    #[serde(default)]
    pub realization: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StarkSection {
    /// F_x in units of J.
    pub fx: f64,
    /// F_y in units of J (ignored for chains).
    #[serde(default)]
    pub fy: f64,
    /// "conventional" (chain center / grid source) | "source" | index.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin: Option<toml::Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    /// γ_r in units of J.
    #[serde(default)]
    pub relaxation: f64,
    /// γ_φ in units of J.
    #[serde(default)]
    pub dephasing: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub max: f64,
    pub points: usize,
    /// "inv_j" (default) or "ns" (requires `coupling_mhz`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct QrwSection {
    /// Fit window for the group velocity, units of 1/J.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub velocity_window: Option<[f64; 2]>,
    #[serde(default)]
    pub emit_states: bool,
    #[serde(default)]
    pub reduce_check: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AndersonSection {
    /// Disorder strengths in units of J.
    pub deltas: Vec<f64>,
    pub realizations: usize,
    pub seed: u64,
    /// Time-averaging window in units of 1/J (default [5, 20]).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pr_window: Option<[f64; 2]>,
    #[serde(default)]
    pub keep_raw: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StarkSweepSection {
    /// Gradient values in units of J (isotropic on grids).
    pub f_values: Vec<f64>,
    /// Trajectory length in expected Bloch periods (default 1.75).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub periods: Option<f64>,
    /// Samples per trajectory (default 1201).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anisotropy: Option<AnisotropySection>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AnisotropySection {
    /// Fixed F_y in units of J.
    pub fy: f64,
    /// Ratios r = F_y/F_x to sweep; F_x = F_y / r.
    pub ratios: Vec<f64>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).context("failed to parse config")
    }

    pub fn emit(&self) -> Result<String> {
        toml::to_string_pretty(self).context("failed to serialize config")
    }
}

/// Source-site keyword resolution.
fn resolve_site(value: &toml::Value, kind: LatticeKind) -> Result<usize> {
    let sites = match kind {
        LatticeKind::Chain { sites } => sites,
        LatticeKind::Grid { nx, ny } => nx * ny,
    };
    let site = match value {
        toml::Value::Integer(i) => {
            usize::try_from(*i).ok().filter(|&s| s < sites).context("site index out of range")?
        }
        toml::Value::String(s) => match (s.as_str(), kind) {
            ("edge", LatticeKind::Chain { .. }) | ("corner", _) => 0,
            ("edge", LatticeKind::Grid { .. }) => {
                bail!("'edge' is a chain keyword; use 'corner' or an index for grids")
            }
            ("center", LatticeKind::Chain { sites }) => sites / 2,
            ("center", LatticeKind::Grid { nx, ny }) => (ny / 2) * nx + nx / 2,
            _ => bail!("unknown source keyword {s:?}"),
        },
        _ => bail!("source must be a keyword or a site index"),
    };
    Ok(site)
}

/// Everything the pipelines need, in natural units (mean coupling 1).
#[derive(Debug, Clone)]
pub struct Resolved {
    pub spec: LatticeSpec,
    pub noise: NoiseParams,
    /// Absolute J/ħ in rad/ns when `coupling_mhz` was given.
    pub j_rad_per_ns: Option<f64>,
    pub times: Vec<f64>,
}

impl Config {
    /// Builds the lattice (normalized so the mean coupling is 1),
    /// applies disorder and/or Stark sections, resolves the time grid.
    pub fn resolve(&self) -> Result<Resolved> {
        let l = &self.lattice;
        let coupling = l.coupling.unwrap_or(1.0);
        if coupling <= 0.0 {
            bail!("coupling must be positive");
        }
        let mut spec = match l.kind.as_str() {
            "chain" => {
                let sites = l.sites.context("chain requires `sites`")?;
                LatticeSpec::chain(sites, coupling)?
            }
            "grid" => {
                let nx = l.nx.context("grid requires `nx`")?;
                let ny = l.ny.context("grid requires `ny`")?;
                LatticeSpec::grid(nx, ny, coupling)?
            }
            other => bail!("unknown lattice kind {other:?}"),
        };
        if let Some(bonds) = &l.bonds {
            for b in bonds {
                spec = spec.with_bond(b.a, b.b, b.strength * coupling)?;
            }
        }
        // normalize the energy scale: mean coupling = 1
        let j_ref = spec.mean_coupling();
        let bonds: Vec<_> = spec.bonds().to_vec();
        let mut norm = match spec.kind() {
            LatticeKind::Chain { sites } => LatticeSpec::chain(sites, 1.0)?,
            LatticeKind::Grid { nx, ny } => LatticeSpec::grid(nx, ny, 1.0)?,
        };
        for b in &bonds {
            norm = norm.with_bond(b.a, b.b, b.strength / j_ref)?;
        }
        let mut spec = norm;

        if let Some(src) = &l.source {
            let site = resolve_site(src, spec.kind())?;
            spec = spec.with_source(site)?;
        }
        if let Some(detunings) = &l.detunings {
            spec = spec.with_detunings(detunings.clone())?;
        }
        if let Some(d) = &self.disorder {
            spec = spec.apply_disorder(&DisorderSpec::new(d.strength, d.seed, d.realization));
        }
        if let Some(s) = &self.stark {
            let origin = match &s.origin {
                None => StarkOrigin::Conventional,
                Some(toml::Value::String(kw)) if kw == "conventional" => {
                    StarkOrigin::Conventional
                }
                Some(toml::Value::String(kw)) if kw == "source" => StarkOrigin::Source,
                Some(toml::Value::Integer(i)) => {
                    StarkOrigin::Site(usize::try_from(*i).context("bad stark origin")?)
                }
                Some(v) => bail!("bad stark origin {v:?}"),
            };
            spec = spec.apply_stark(&StarkField { f_x: s.fx, f_y: s.fy, origin })?;
        }

        let noise = match &self.noise {
            Some(n) => NoiseParams::new(n.relaxation, n.dephasing),
            None => NoiseParams::default(),
        };
        let j_rad_per_ns = l.coupling_mhz.map(|f| core::f64::consts::TAU * f * 1e-3);

        let times = match &self.time {
            Some(t) => {
                let scale = match t.unit.as_deref() {
                    None | Some("inv_j") => 1.0,
                    Some("ns") => j_rad_per_ns
                        .context("time unit 'ns' requires lattice.coupling_mhz")?,
                    Some(other) => bail!("unknown time unit {other:?}"),
                };
                time_grid(t.max * scale, t.points)?
            }
            None => time_grid(10.0, 201)?,
        };

        Ok(Resolved { spec, noise, j_rad_per_ns, times })
    }
}

/// Uniform grid `0..=max` with `points` samples.
pub fn time_grid(max: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || max <= 0.0 {
        bail!("time grid needs points >= 2 and max > 0");
    }
    Ok((0..points).map(|k| max * k as f64 / (points - 1) as f64).collect())
}

/// Documented default velocity-fit windows (units of 1/J), determined
/// against the exact propagator so they pre-date boundary reflection.
pub fn default_velocity_window(spec: &LatticeSpec) -> Option<(f64, f64)> {
    let source = spec.source();
    match spec.kind() {
        LatticeKind::Chain { sites } => {
            if source == 0 || source == sites - 1 {
                Some((2.1, 2.6))
            } else if source == sites / 2 {
                Some((0.1, 0.7))
            } else {
                None
            }
        }
        LatticeKind::Grid { nx, ny } => {
            let (x, y) = spec.coordinates(source);
            let corner = (x == 0 || x == nx - 1) && (y == 0 || y == ny - 1);
            corner.then_some((0.3, 1.1))
        }
    }
}
