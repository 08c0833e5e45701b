//! Distance-shell reduction of the 2d corner quantum walk onto an
//! effective 1d chain with non-uniform couplings.
//!
//! A walk started at a corner of a uniform grid never leaves the
//! Krylov space of its start vector. Tridiagonalizing the Hamiltonian
//! on that space (Lanczos) produces column states supported on
//! successive Manhattan shells and an effective chain whose couplings
//! are `−⟨col j|H|col j+1⟩`; on the 3×3 corner walk these come out as
//! `(√2, √3, √3, √2)·J`. Reducibility is verified constructively: each
//! column state must be confined to a single shell and the chain must
//! close after one node per shell, which rejects disordered lattices,
//! per-bond coupling overrides and non-corner roots.

use alloc::vec::Vec;
use core::fmt;

use nalgebra::DVector;
#[allow(unused_imports)]
use num_traits::Float;

use crate::dynamics::{evolve_unitary, DynamicsError, QuantumState};
use crate::lattice::{LatticeError, LatticeSpec};
use crate::linalg::C64;

/// Shell support tolerance relative to the Hamiltonian scale.
const SHELL_CONFINEMENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionError {
    /// The walk does not close on the distance shells (disorder,
    /// per-bond overrides, or a root without the required symmetry).
    NotReducible,
    InvalidRoot,
    Dynamics(DynamicsError),
}

impl fmt::Display for ReductionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotReducible => write!(f, "walk is not reducible to the distance shells"),
            Self::InvalidRoot => write!(f, "root site out of range"),
            Self::Dynamics(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ReductionError {}

impl From<DynamicsError> for ReductionError {
    fn from(e: DynamicsError) -> Self {
        Self::Dynamics(e)
    }
}

impl From<LatticeError> for ReductionError {
    fn from(_: LatticeError) -> Self {
        Self::InvalidRoot
    }
}

/// Effective 1d chain over the Manhattan shells of a reducible walk.
#[derive(Debug, Clone)]
pub struct ReducedChain {
    shells: Vec<Vec<usize>>,
    couplings: Vec<f64>,
    detunings: Vec<f64>,
    column_states: Vec<Vec<C64>>,
}

impl ReducedChain {
    pub fn node_count(&self) -> usize {
        self.shells.len()
    }

    /// Sites forming each column node, grouped by shell.
    pub fn shells(&self) -> &[Vec<usize>] {
        &self.shells
    }

    pub fn shell_sizes(&self) -> Vec<usize> {
        self.shells.iter().map(|s| s.len()).collect()
    }

    /// Effective couplings `−⟨col j|H|col j+1⟩` (positive, length
    /// `nodes − 1`).
    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// Node detunings `⟨col j|H|col j⟩` (zero on a uniform lattice,
    /// `j·F` under an isotropic Stark ramp).
    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    /// Column-state amplitudes over the original sites.
    pub fn column_states(&self) -> &[Vec<C64>] {
        &self.column_states
    }

    /// The reduced walk as a chain spec with per-bond couplings and
    /// node detunings, source at node 0.
    pub fn to_spec(&self) -> LatticeSpec {
        let n = self.node_count();
        let mut spec = LatticeSpec::chain(n, 1.0).expect("n >= 2 for any reducible walk");
        for (j, &c) in self.couplings.iter().enumerate() {
            spec = spec.with_bond(j, j + 1, c).expect("chain bond");
        }
        spec.with_detunings(self.detunings.clone()).expect("length matches")
    }
}

/// Reduces the walk from `root` to an effective chain over the
/// Manhattan shells, or reports that the walk is not reducible.
pub fn column_reduce(spec: &LatticeSpec, root: usize) -> Result<ReducedChain, ReductionError> {
    let n = spec.sites();
    if root >= n {
        return Err(ReductionError::InvalidRoot);
    }
    let shells = spec.shells(root)?;
    let shell_of = spec.manhattan_distances(root)?;
    let h = spec.hamiltonian();
    let hm = h.as_matrix();

    let scale = spec
        .bonds()
        .iter()
        .map(|b| b.strength)
        .chain(spec.detunings().iter().map(|&e| e.abs()))
        .fold(1.0f64, f64::max);
    let tol = SHELL_CONFINEMENT_TOL * scale;

    let mut basis: Vec<DVector<C64>> = Vec::with_capacity(shells.len());
    let mut couplings = Vec::new();
    let mut detunings = Vec::new();

    let mut v = DVector::<C64>::zeros(n);
    v[root] = C64::new(1.0, 0.0);
    basis.push(v);

    for j in 0..shells.len() {
        let vj = &basis[j];
        let mut w = hm * vj;
        let alpha = vj.dotc(&w).re;
        detunings.push(alpha);
        w -= vj * C64::new(alpha, 0.0);
        if j > 0 {
            let beta_prev = C64::new(couplings[j - 1], 0.0);
            w -= &basis[j - 1] * beta_prev;
        }
        // full reorthogonalization keeps the tiny basis numerically exact
        for b in &basis {
            let overlap = b.dotc(&w);
            w -= b * overlap;
        }
        let beta = w.norm();
        if beta <= tol {
            // Krylov space closed: reducible iff it closed on the last shell
            if j + 1 == shells.len() {
                break;
            }
            return Err(ReductionError::NotReducible);
        }
        if j + 1 == shells.len() {
            // more Krylov directions than shells
            return Err(ReductionError::NotReducible);
        }
        let next = w / C64::new(beta, 0.0);
        // the column state must live entirely on shell j+1
        for (site, amp) in next.iter().enumerate() {
            if shell_of[site] as usize != j + 1 && amp.norm() > tol {
                return Err(ReductionError::NotReducible);
            }
        }
        couplings.push(beta);
        basis.push(next);
    }

    if basis.len() != shells.len() {
        return Err(ReductionError::NotReducible);
    }
    let column_states = basis.iter().map(|v| v.iter().copied().collect()).collect();
    Ok(ReducedChain { shells, couplings, detunings, column_states })
}

/// Evolves the full lattice from `|root⟩` and the reduced chain from
/// node 0 and returns the maximum absolute deviation between
/// shell-summed populations and reduced-node populations over all
/// shells and times.
pub fn verify_reduction(
    spec: &LatticeSpec,
    root: usize,
    times: &[f64],
) -> Result<f64, ReductionError> {
    let reduced = column_reduce(spec, root)?;
    let full = evolve_unitary(
        &spec.hamiltonian(),
        &QuantumState::site_basis(spec.sites(), root),
        times,
    )?;
    let chain_spec = reduced.to_spec();
    let chain = evolve_unitary(
        &chain_spec.hamiltonian(),
        &QuantumState::site_basis(reduced.node_count(), 0),
        times,
    )?;

    let mut max_dev = 0.0f64;
    for k in 0..times.len() {
        let p_full = full.site_populations(k);
        let p_chain = chain.site_populations(k);
        for (j, shell) in reduced.shells().iter().enumerate() {
            let shell_pop: f64 = shell.iter().map(|&s| p_full[s]).sum();
            max_dev = max_dev.max((shell_pop - p_chain[j]).abs());
        }
    }
    Ok(max_dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::DisorderSpec;
    use approx::assert_abs_diff_eq;

    #[test]
    fn grid_3x3_corner_reduction() {
        let spec = LatticeSpec::grid(3, 3, 1.0).unwrap();
        let red = column_reduce(&spec, 0).unwrap();
        assert_eq!(red.node_count(), 5);
        assert_eq!(red.shell_sizes(), alloc::vec![1, 2, 3, 2, 1]);
        let expect = [2.0f64.sqrt(), 3.0f64.sqrt(), 3.0f64.sqrt(), 2.0f64.sqrt()];
        for (c, e) in red.couplings().iter().zip(expect.iter()) {
            assert_abs_diff_eq!(c, e, epsilon = 1e-12);
        }
        assert!(red.detunings().iter().all(|&d| d.abs() < 1e-12));
        // symmetric under shell reversal
        let c = red.couplings();
        assert_abs_diff_eq!(c[0], c[3], epsilon = 1e-12);
        assert_abs_diff_eq!(c[1], c[2], epsilon = 1e-12);
    }

    #[test]
    fn grid_2x2_corner_reduction() {
        let spec = LatticeSpec::grid(2, 2, 1.0).unwrap();
        let red = column_reduce(&spec, 0).unwrap();
        assert_eq!(red.node_count(), 3);
        assert_eq!(red.shell_sizes(), alloc::vec![1, 2, 1]);
        for c in red.couplings() {
            assert_abs_diff_eq!(c, &2.0f64.sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn shell_sizes_partition_the_lattice() {
        let spec = LatticeSpec::grid(3, 3, 1.0).unwrap();
        let red = column_reduce(&spec, 0).unwrap();
        assert_eq!(red.shell_sizes().iter().sum::<usize>(), 9);
    }

    #[test]
    fn non_corner_root_is_not_reducible() {
        let spec = LatticeSpec::grid(3, 3, 1.0).unwrap();
        assert_eq!(column_reduce(&spec, 1).unwrap_err(), ReductionError::NotReducible);
    }

    #[test]
    fn disorder_breaks_reducibility() {
        let spec = LatticeSpec::grid(3, 3, 1.0)
            .unwrap()
            .apply_disorder(&DisorderSpec::new(0.5, 5, 0));
        assert_eq!(column_reduce(&spec, 0).unwrap_err(), ReductionError::NotReducible);
    }

    #[test]
    fn bond_override_breaks_reducibility() {
        let spec = LatticeSpec::grid(3, 3, 1.0).unwrap().with_bond(0, 1, 1.01).unwrap();
        assert_eq!(column_reduce(&spec, 0).unwrap_err(), ReductionError::NotReducible);
    }

    #[test]
    fn isotropic_stark_grid_stays_reducible() {
        let spec = LatticeSpec::grid(3, 3, 1.0)
            .unwrap()
            .apply_stark(&crate::lattice::StarkField::isotropic(2.0))
            .unwrap();
        let red = column_reduce(&spec, 0).unwrap();
        let expect = [0.0, 2.0, 4.0, 6.0, 8.0];
        for (d, e) in red.detunings().iter().zip(expect.iter()) {
            assert_abs_diff_eq!(d, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn verification_at_t0_is_exact() {
        let spec = LatticeSpec::grid(3, 3, 1.0).unwrap();
        let dev = verify_reduction(&spec, 0, &[1e-12]).unwrap();
        assert!(dev < 1e-12);
    }

    #[test]
    fn full_vs_reduced_walk_agrees() {
        let spec = LatticeSpec::grid(3, 3, 1.0).unwrap();
        let times: Vec<f64> = (1..=100).map(|k| 0.1 * k as f64).collect();
        let dev = verify_reduction(&spec, 0, &times).unwrap();
        assert!(dev < 1e-10, "max deviation {dev}");
    }
}
