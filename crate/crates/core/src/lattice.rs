//! Lattice geometry, couplings and on-site energy landscapes.
//!
//! A [`LatticeSpec`] is an immutable value: the builders and the
//! `apply_*` operations return modified copies and never touch their
//! input. Energies are angular frequencies with ħ = 1 throughout; the
//! hopping strengths are stored positive and the Hamiltonian applies
//! the minus sign.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;

use crate::linalg::{HermitianMatrix, C64};
use crate::rng::stream_unit;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeKind {
    Chain { sites: usize },
    Grid { nx: usize, ny: usize },
}

/// Undirected nearest-neighbor bond with `a < b` and positive strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub strength: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeError {
    /// Geometry too small to host a walk (N < 2 or a degenerate grid).
    InvalidGeometry,
    /// Site index outside the lattice.
    InvalidSite,
    /// Bond does not connect nearest neighbors of the declared geometry.
    InvalidBond,
    /// Coupling strengths must be positive.
    NonPositiveCoupling,
    /// Detuning vector length must equal the site count.
    DetuningLength,
    /// Stark gradients must be nonnegative.
    InvalidField,
}

impl fmt::Display for LatticeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidGeometry => write!(f, "invalid lattice geometry"),
            Self::InvalidSite => write!(f, "site index out of range"),
            Self::InvalidBond => write!(f, "bond does not connect nearest neighbors"),
            Self::NonPositiveCoupling => write!(f, "coupling strengths must be > 0"),
            Self::DetuningLength => write!(f, "detuning vector length != site count"),
            Self::InvalidField => write!(f, "stark gradients must be >= 0"),
        }
    }
}

impl core::error::Error for LatticeError {}

/// Uniform on-site disorder `ε_i ∈ [−δ/2, δ/2]`, drawn from the
/// deterministic stream keyed by `(seed, realization, site)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisorderSpec {
    pub strength: f64,
    pub seed: u64,
    pub realization: u64,
}

impl DisorderSpec {
    pub fn new(strength: f64, seed: u64, realization: u64) -> Self {
        assert!(strength >= 0.0, "disorder strength must be >= 0");
        Self { strength, seed, realization }
    }
}

/// Where the linear Stark ramp is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StarkOrigin {
    /// Chain: the center site. Grid: the source corner.
    #[default]
    Conventional,
    Source,
    Site(usize),
}

/// Linear potential gradient `ε(x, y) = (x − x₀)·F_x + (y − y₀)·F_y`.
/// For chains only `f_x` acts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarkField {
    pub f_x: f64,
    pub f_y: f64,
    pub origin: StarkOrigin,
}

impl StarkField {
    pub fn isotropic(f: f64) -> Self {
        Self { f_x: f, f_y: f, origin: StarkOrigin::Conventional }
    }

    pub fn anisotropic(f_x: f64, f_y: f64) -> Self {
        Self { f_x, f_y, origin: StarkOrigin::Conventional }
    }

    /// Anisotropy ratio r = F_y / F_x.
    pub fn ratio(&self) -> f64 {
        self.f_y / self.f_x
    }
}

/// Tight-binding lattice: geometry, bonds `J_ij > 0`, detunings `ε_i`,
/// and the walk source site.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    kind: LatticeKind,
    bonds: Vec<Bond>,
    detunings: Vec<f64>,
    source: usize,
}

impl LatticeSpec {
    /// 1d chain of `n` sites with uniform coupling; source defaults to
    /// the left edge (site 0).
    pub fn chain(n: usize, coupling: f64) -> Result<Self, LatticeError> {
        if n < 2 {
            return Err(LatticeError::InvalidGeometry);
        }
        if coupling <= 0.0 {
            return Err(LatticeError::NonPositiveCoupling);
        }
        let bonds = (0..n - 1)
            .map(|i| Bond { a: i, b: i + 1, strength: coupling })
            .collect();
        Ok(Self { kind: LatticeKind::Chain { sites: n }, bonds, detunings: vec![0.0; n], source: 0 })
    }

    /// Rectangular grid, row-major site order, nearest-neighbor bonds
    /// only; source defaults to the corner (site 0).
    pub fn grid(nx: usize, ny: usize, coupling: f64) -> Result<Self, LatticeError> {
        if nx < 2 || ny < 2 {
            return Err(LatticeError::InvalidGeometry);
        }
        if coupling <= 0.0 {
            return Err(LatticeError::NonPositiveCoupling);
        }
        let mut bonds = Vec::with_capacity(2 * nx * ny - nx - ny);
        for y in 0..ny {
            for x in 0..nx {
                let i = y * nx + x;
                if x + 1 < nx {
                    bonds.push(Bond { a: i, b: i + 1, strength: coupling });
                }
                if y + 1 < ny {
                    bonds.push(Bond { a: i, b: i + nx, strength: coupling });
                }
            }
        }
        bonds.sort_by_key(|b| (b.a, b.b));
        Ok(Self {
            kind: LatticeKind::Grid { nx, ny },
            bonds,
            detunings: vec![0.0; nx * ny],
            source: 0,
        })
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn sites(&self) -> usize {
        match self.kind {
            LatticeKind::Chain { sites } => sites,
            LatticeKind::Grid { nx, ny } => nx * ny,
        }
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    pub fn source(&self) -> usize {
        self.source
    }

    /// (x, y) coordinates of a site; chains sit on the x axis.
    pub fn coordinates(&self, site: usize) -> (usize, usize) {
        match self.kind {
            LatticeKind::Chain { .. } => (site, 0),
            LatticeKind::Grid { nx, .. } => (site % nx, site / nx),
        }
    }

    pub fn coupling(&self, a: usize, b: usize) -> Option<f64> {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        self.bonds.iter().find(|bd| bd.a == a && bd.b == b).map(|bd| bd.strength)
    }

    /// Arithmetic mean of the bond strengths; the reference J for
    /// window defaults and unit conversions.
    pub fn mean_coupling(&self) -> f64 {
        self.bonds.iter().map(|b| b.strength).sum::<f64>() / self.bonds.len() as f64
    }

    pub fn with_source(mut self, source: usize) -> Result<Self, LatticeError> {
        if source >= self.sites() {
            return Err(LatticeError::InvalidSite);
        }
        self.source = source;
        Ok(self)
    }

    /// The center site of a chain; for grids, falls back to the source.
    pub fn center_site(&self) -> usize {
        match self.kind {
            LatticeKind::Chain { sites } => sites / 2,
            LatticeKind::Grid { .. } => self.source,
        }
    }

    /// Override the strength of one existing bond (measured `J_ij`).
    pub fn with_bond(mut self, a: usize, b: usize, strength: f64) -> Result<Self, LatticeError> {
        if strength <= 0.0 {
            return Err(LatticeError::NonPositiveCoupling);
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        match self.bonds.iter_mut().find(|bd| bd.a == a && bd.b == b) {
            Some(bd) => {
                bd.strength = strength;
                Ok(self)
            }
            None => Err(LatticeError::InvalidBond),
        }
    }

    pub fn with_detunings(mut self, detunings: Vec<f64>) -> Result<Self, LatticeError> {
        if detunings.len() != self.sites() {
            return Err(LatticeError::DetuningLength);
        }
        self.detunings = detunings;
        Ok(self)
    }

    /// Copy with detunings drawn i.i.d. uniform on `[−δ/2, δ/2]` from
    /// the stream keyed by `(seed, realization, site)`.
    pub fn apply_disorder(&self, disorder: &DisorderSpec) -> Self {
        let mut out = self.clone();
        out.detunings = (0..self.sites())
            .map(|i| {
                disorder.strength
                    * (stream_unit(disorder.seed, disorder.realization, i as u64) - 0.5)
            })
            .collect();
        out
    }

    /// Copy with detunings overwritten by the linear Stark ramp.
    pub fn apply_stark(&self, field: &StarkField) -> Result<Self, LatticeError> {
        if field.f_x < 0.0 || field.f_y < 0.0 {
            return Err(LatticeError::InvalidField);
        }
        let origin = match field.origin {
            StarkOrigin::Conventional => match self.kind {
                LatticeKind::Chain { .. } => self.center_site(),
                LatticeKind::Grid { .. } => self.source,
            },
            StarkOrigin::Source => self.source,
            StarkOrigin::Site(s) => {
                if s >= self.sites() {
                    return Err(LatticeError::InvalidSite);
                }
                s
            }
        };
        let (x0, y0) = self.coordinates(origin);
        let mut out = self.clone();
        out.detunings = (0..self.sites())
            .map(|i| {
                let (x, y) = self.coordinates(i);
                (x as f64 - x0 as f64) * field.f_x + (y as f64 - y0 as f64) * field.f_y
            })
            .collect();
        Ok(out)
    }

    /// Single-excitation Hamiltonian: diagonal ε_i, off-diagonal −J_ij.
    pub fn hamiltonian(&self) -> HermitianMatrix {
        let n = self.sites();
        let mut m = DMatrix::<C64>::zeros(n, n);
        for (i, eps) in self.detunings.iter().enumerate() {
            m[(i, i)] = C64::new(*eps, 0.0);
        }
        for bond in &self.bonds {
            m[(bond.a, bond.b)] = C64::new(-bond.strength, 0.0);
            m[(bond.b, bond.a)] = C64::new(-bond.strength, 0.0);
        }
        HermitianMatrix::new(m).expect("construction is symmetric")
    }

    /// Per-site 1-norm graph distance from `source` on the declared
    /// geometry.
    pub fn manhattan_distances(&self, source: usize) -> Result<Vec<u32>, LatticeError> {
        if source >= self.sites() {
            return Err(LatticeError::InvalidSite);
        }
        let (xs, ys) = self.coordinates(source);
        Ok((0..self.sites())
            .map(|i| {
                let (x, y) = self.coordinates(i);
                (x.abs_diff(xs) + y.abs_diff(ys)) as u32
            })
            .collect())
    }

    /// Sites grouped by Manhattan distance from `source`; shell `j`
    /// holds the sites at distance `j`.
    pub fn shells(&self, source: usize) -> Result<Vec<Vec<usize>>, LatticeError> {
        let dist = self.manhattan_distances(source)?;
        let max = *dist.iter().max().expect("nonempty lattice") as usize;
        let mut shells = vec![Vec::new(); max + 1];
        for (site, d) in dist.iter().enumerate() {
            shells[*d as usize].push(site);
        }
        Ok(shells)
    }

    /// Largest Manhattan distance from `source`: the lattice extent as
    /// seen from the walk origin.
    pub fn extent_from(&self, source: usize) -> Result<u32, LatticeError> {
        Ok(*self.manhattan_distances(source)?.iter().max().expect("nonempty lattice"))
    }
}
