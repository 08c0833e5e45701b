//! Independent oracles for the entanglement metrics: a brute-force
//! partial trace over the full 2^9 qubit space, the W-class closed
//! forms, and local-unitary invariance.

use nalgebra::{DMatrix, DVector};
use qlattice_core::entanglement::{
    concurrence, global_entanglement_pure, reduce_pure, source_lattice_concurrence, w_state,
};
use qlattice_core::rng::stream_unit;
use qlattice_core::{evolve_unitary, LatticeSpec, QuantumState, C64};

/// Partial trace of a full 2^n pure state down to the qubit pair
/// `(i, j)`, summing over every complement configuration. Independent
/// of the library's subspace-structured `reduce`.
fn brute_force_pair_trace(amplitudes: &[C64], n: usize, i: usize, j: usize) -> DMatrix<C64> {
    assert_eq!(amplitudes.len(), 1 << n);
    let mut out = DMatrix::<C64>::zeros(4, 4);
    let mask = !((1usize << i) | (1usize << j));
    for b1 in 0..amplitudes.len() {
        for b2 in 0..amplitudes.len() {
            if b1 & mask != b2 & mask {
                continue;
            }
            // reduced basis index: qubit i is the left slot
            let q1 = ((b1 >> i & 1) << 1) | (b1 >> j & 1);
            let q2 = ((b2 >> i & 1) << 1) | (b2 >> j & 1);
            out[(q1, q2)] += amplitudes[b1] * amplitudes[b2].conj();
        }
    }
    out
}

#[test]
fn w9_pair_concurrence_from_brute_force_trace() {
    // |W_9⟩ on the full 2^9 space
    let n = 9;
    let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
    for i in 0..n {
        amps[1 << i] = C64::new(1.0 / 3.0, 0.0);
    }
    for (i, j) in [(0, 1), (2, 7), (4, 8)] {
        let rho = brute_force_pair_trace(&amps, n, i, j);
        let c = concurrence(&rho).unwrap();
        assert!((c - 2.0 / 9.0).abs() < 1e-12, "pair ({i},{j}): {c}");
    }
}

#[test]
fn library_reduce_matches_brute_force_on_walk_states() {
    // evolve the 3x3 corner walk and compare both partial-trace routes
    let spec = LatticeSpec::grid(3, 3, 1.0).unwrap();
    let traj = evolve_unitary(
        &spec.hamiltonian(),
        &QuantumState::site_basis(9, 0),
        &[0.3, 0.7, 1.4],
    )
    .unwrap();
    let qlattice_core::TrajectoryStates::Pure(states) = traj.states() else {
        panic!("unitary trajectory is pure");
    };
    for state in states {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << 9];
        for i in 0..9 {
            amps[1 << i] = state.amplitudes()[i];
        }
        for (i, j) in [(0, 1), (1, 3), (2, 6), (5, 7)] {
            let brute = brute_force_pair_trace(&amps, 9, i, j);
            let lib = reduce_pure(state, &[i, j]).unwrap();
            let dev = (0..16)
                .map(|k| (brute[(k / 4, k % 4)] - lib[(k / 4, k % 4)]).norm())
                .fold(0.0f64, f64::max);
            assert!(dev < 1e-12, "pair ({i},{j}): dev {dev}");
        }
    }
}

fn random_single_excitation(sites: usize, trial: u64) -> QuantumState {
    let raw: Vec<C64> = (0..sites)
        .map(|i| {
            C64::new(
                stream_unit(400, trial, i as u64) - 0.5,
                stream_unit(401, trial, i as u64) - 0.5,
            )
        })
        .collect();
    let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    QuantumState::new(DVector::from_iterator(sites, raw.iter().map(|z| z / norm))).unwrap()
}

#[test]
fn source_lattice_equality_on_random_states() {
    // √(Σ_j C²_{s,j}) = 2|α_s|√(1−|α_s|²) for every pure
    // single-excitation state
    for trial in 0..200u64 {
        let sites = 3 + (trial % 7) as usize;
        let psi = random_single_excitation(sites, trial);
        let source = (trial % sites as u64) as usize;
        let pairwise: Vec<f64> = (0..sites)
            .filter(|&j| j != source)
            .map(|j| concurrence(&reduce_pure(&psi, &[source, j]).unwrap()).unwrap())
            .collect();
        let combined = source_lattice_concurrence(&pairwise);
        let a = psi.amplitudes()[source].norm();
        let exact = 2.0 * a * (1.0 - a * a).sqrt();
        assert!(
            (combined - exact.min(1.0)).abs() < 1e-9,
            "sites={sites} trial={trial}: {combined} vs {exact}"
        );
    }
}

fn random_local_unitary(seed: u64, trial: u64) -> DMatrix<C64> {
    let theta = stream_unit(seed, trial, 0) * core::f64::consts::PI;
    let alpha = stream_unit(seed, trial, 1) * core::f64::consts::TAU;
    let beta = stream_unit(seed, trial, 2) * core::f64::consts::TAU;
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::from_polar(c, alpha),
            C64::from_polar(s, beta),
            C64::from_polar(-s, -beta),
            C64::from_polar(c, -alpha),
        ],
    )
}

#[test]
fn concurrence_invariant_under_local_unitaries() {
    let w = w_state(9);
    let base = reduce_pure(&w, &[1, 5]).unwrap();
    let c0 = concurrence(&base).unwrap();
    for trial in 0..100u64 {
        let u = random_local_unitary(500, trial).kronecker(&random_local_unitary(501, trial));
        let rotated = &u * &base * u.adjoint();
        let c = concurrence(&rotated).unwrap();
        assert!((c - c0).abs() < 1e-9, "trial {trial}: {c} vs {c0}");
    }
}

#[test]
fn global_entanglement_capped_by_w_state() {
    for sites in [3usize, 5, 9] {
        let cap = global_entanglement_pure(&w_state(sites));
        for trial in 0..300u64 {
            let psi = random_single_excitation(sites, 1000 + trial);
            let e = global_entanglement_pure(&psi);
            assert!(e <= cap + 1e-9, "sites={sites}: {e} > {cap}");
        }
    }
}