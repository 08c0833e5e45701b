//! Single-particle quantum transport and localization on 1d/2d
//! tight-binding lattices.
//!
//! The crate covers the desk-scale physics of a small qubit array
//! emulating the tight-binding Hamiltonian
//! `H/ħ = −Σ J_ij σ†_i σ_j + Σ ε_i σ†_i σ_i`:
//!
//! * [`lattice`] — chains and grids, disorder and Wannier–Stark energy
//!   landscapes, the single-excitation Hamiltonian;
//! * [`dynamics`] — exact unitary propagation, Lindblad open-system
//!   propagation, a full 2^N brute-force oracle, distribution fidelity;
//! * [`entanglement`] — partial traces, concurrence and its distributed
//!   bounds, entropies, Meyer–Wallach global entanglement;
//! * [`localization`] — transport curves, group velocities,
//!   participation ratios and their closed forms, power-law fits,
//!   Bloch periods and spreads;
//! * [`reduction`] — the distance-shell reduction of the 2d corner walk
//!   onto an effective 1d chain.
//!
//! Everything is deterministic: random detunings come from counter-based
//! streams in [`rng`], keyed by `(seed, realization, site)`.
//!
//! The crate is `no_std`-compatible (`default-features = false` keeps
//! only `alloc`); the companion CLI crate carries all I/O.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

pub mod dynamics;
pub mod entanglement;
pub mod lattice;
pub mod linalg;
pub mod localization;
pub mod reduction;
pub mod rng;

pub use nalgebra;

pub use dynamics::{
    evolve_lindblad, evolve_unitary, fidelity, full_space_evolve, DensityMatrix, DynamicsError,
    NoiseParams, QuantumState, Trajectory, TrajectoryStates,
};
pub use lattice::{
    Bond, DisorderSpec, LatticeError, LatticeKind, LatticeSpec, StarkField, StarkOrigin,
};
pub use linalg::{HermitianMatrix, C64};
