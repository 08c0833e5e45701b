//! Partial traces and entanglement metrics: Wootters concurrence,
//! entanglement of formation, the CKW distributed bound,
//! source–lattice concurrence, shell averages, von Neumann entropy
//! and Meyer–Wallach global entanglement.

use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::{Float, Zero};

use crate::dynamics::{DensityMatrix, QuantumState, Trajectory};
use crate::lattice::LatticeSpec;
use crate::linalg::{hermitian_eigen, hermitian_sqrt, sorted_eigenvalues_desc, LinalgError, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntanglementError {
    /// Empty, repeated, out-of-range, or more than three kept sites.
    InvalidSubset,
    /// Input fails the density-matrix contract beyond tolerance.
    InvalidState,
    /// Shell averages are defined for 2- or 3-site shells only.
    UnsupportedShell,
    Numerical(LinalgError),
}

impl fmt::Display for EntanglementError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidSubset => write!(f, "invalid site subset"),
            Self::InvalidState => write!(f, "invalid density matrix"),
            Self::UnsupportedShell => write!(f, "shell must contain 2 or 3 sites"),
            Self::Numerical(e) => write!(f, "numerical error: {e}"),
        }
    }
}

impl core::error::Error for EntanglementError {}

impl From<LinalgError> for EntanglementError {
    fn from(e: LinalgError) -> Self {
        Self::Numerical(e)
    }
}

/// Partial trace of the vacuum+single-excitation density matrix onto
/// the qubits listed in `keep` (at most three, in the given order:
/// `keep[0]` is the leftmost qubit of the reduced register).
///
/// The reduced space has dimension `2^|keep|`, basis
/// `|q_{keep[0]} … q_{keep[k−1]}⟩` with `g` before `e`.
pub fn reduce(rho: &DensityMatrix, keep: &[usize]) -> Result<DMatrix<C64>, EntanglementError> {
    let sites = rho.sites();
    let k = keep.len();
    if k == 0 || k > 3 {
        return Err(EntanglementError::InvalidSubset);
    }
    for (idx, &s) in keep.iter().enumerate() {
        if s >= sites || keep[..idx].contains(&s) {
            return Err(EntanglementError::InvalidSubset);
        }
    }

    let dim = 1usize << k;
    let mut out = DMatrix::<C64>::zeros(dim, dim);
    let m = rho.as_matrix();

    // |g…g⟩⟨g…g| collects the vacuum plus every excitation outside `keep`
    let mut ground = m[(0, 0)];
    for site in 0..sites {
        if !keep.contains(&site) {
            ground += m[(site + 1, site + 1)];
        }
    }
    out[(0, 0)] = ground;

    // bit position of keep[t] in the reduced register (keep[0] leftmost)
    let bit = |t: usize| 1usize << (k - 1 - t);
    for t in 0..k {
        for u in 0..k {
            out[(bit(t), bit(u))] = m[(keep[t] + 1, keep[u] + 1)];
        }
        out[(bit(t), 0)] = m[(keep[t] + 1, 0)];
        out[(0, bit(t))] = m[(0, keep[t] + 1)];
    }
    Ok(out)
}

/// Convenience for pure single-excitation states.
pub fn reduce_pure(psi: &QuantumState, keep: &[usize]) -> Result<DMatrix<C64>, EntanglementError> {
    reduce(&DensityMatrix::from_pure(psi), keep)
}

fn check_two_qubit_density(rho: &DMatrix<C64>) -> Result<(), EntanglementError> {
    if rho.nrows() != 4 || rho.ncols() != 4 {
        return Err(EntanglementError::InvalidState);
    }
    let trace: C64 = rho.diagonal().iter().sum();
    if (trace.re - 1.0).abs() > 1e-9 || trace.im.abs() > 1e-9 {
        return Err(EntanglementError::InvalidState);
    }
    for i in 0..4 {
        for j in i..4 {
            if (rho[(i, j)] - rho[(j, i)].conj()).norm() > 1e-9 {
                return Err(EntanglementError::InvalidState);
            }
        }
    }
    let (vals, _) = hermitian_eigen(rho)?;
    if vals.iter().any(|&v| v < -1e-9) {
        return Err(EntanglementError::InvalidState);
    }
    Ok(())
}

/// Wootters concurrence of a two-qubit density matrix:
/// `max{0, λ1−λ2−λ3−λ4}` with `λ` the decreasing square roots of the
/// eigenvalues of `ρρ̃`, `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
///
/// The eigenvalues are taken from the Hermitian form `√ρ ρ̃ √ρ`, which
/// has the same spectrum as `ρρ̃`.
pub fn concurrence(rho: &DMatrix<C64>) -> Result<f64, EntanglementError> {
    check_two_qubit_density(rho)?;

    // (σ_y ⊗ σ_y) ρ* (σ_y ⊗ σ_y) in the {gg, ge, eg, ee} basis:
    // entry (i,j) picks up ρ*(3−i, 3−j) and sign (−1)^{popcount(i)+popcount(j)}
    let mut spin_flipped = DMatrix::<C64>::zeros(4, 4);
    for i in 0..4usize {
        for j in 0..4usize {
            let sign = if (i.count_ones() + j.count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
            spin_flipped[(i, j)] = rho[(3 - i, 3 - j)].conj() * C64::new(sign, 0.0);
        }
    }

    let sqrt_rho = hermitian_sqrt(rho)?;
    let product = &sqrt_rho * spin_flipped * &sqrt_rho;
    let product = (&product + product.adjoint()) * C64::new(0.5, 0.0);
    let raw = sorted_eigenvalues_desc(&product)?;
    // Eigenvalues at the numerical noise floor are exact zeros of the
    // product; flooring them before the square root keeps the √-noise
    // (≈1e-8 otherwise) out of the concurrence.
    let floor = raw[0].max(0.0) * 1e-14;
    let lambdas: Vec<f64> =
        raw.into_iter().map(|v| if v > floor { v.sqrt() } else { 0.0 }).collect();
    let c = lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3];
    Ok(c.clamp(0.0, 1.0))
}

/// Binary entropy in bits.
fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    term(x) + term(1.0 - x)
}

/// Entanglement of formation from a concurrence value:
/// `E = h((1+√(1−C²))/2)` with `h` the base-2 binary entropy, so a
/// Bell pair gives exactly one ebit.
pub fn entanglement_of_formation(c: f64) -> f64 {
    assert!((0.0..=1.0).contains(&c), "concurrence outside [0, 1]");
    binary_entropy((1.0 + (1.0 - c * c).sqrt()) / 2.0)
}

/// CKW lower bound on the concurrence between qubit `i` and the pair
/// `(j, k)`: `√(C_ij² + C_ik²)`.
pub fn distributed_concurrence_lb(c_ij: f64, c_ik: f64) -> f64 {
    (c_ij * c_ij + c_ik * c_ik).sqrt()
}

/// Concurrence between the source site and the rest of the lattice,
/// exact for single-particle states: `√(Σ_j C_{s,j}²)`, clamped to
/// `[0, 1]`.
pub fn source_lattice_concurrence(pairwise: &[f64]) -> f64 {
    pairwise.iter().map(|c| c * c).sum::<f64>().sqrt().min(1.0)
}

/// Average concurrence of a distance shell from its within-shell
/// pairwise concurrences.
///
/// Two-site shells pass one value (their pairwise concurrence) and get
/// it back. Three-site shells pass `[C_ab, C_ac, C_bc]` and get
/// `C̄ = √((1/3)[(C²)ᵐⁱⁿ_a + (C²)ᵐⁱⁿ_b + (C²)ᵐⁱⁿ_c])` where each
/// `(C²)ᵐⁱⁿ` is the CKW bound of one member against the other two.
pub fn shell_average_concurrence(pairwise: &[f64]) -> Result<f64, EntanglementError> {
    match pairwise {
        [c] => Ok(*c),
        [c_ab, c_ac, c_bc] => {
            let bound_a = c_ab * c_ab + c_ac * c_ac;
            let bound_b = c_ab * c_ab + c_bc * c_bc;
            let bound_c = c_ac * c_ac + c_bc * c_bc;
            Ok(((bound_a + bound_b + bound_c) / 3.0).sqrt())
        }
        _ => Err(EntanglementError::UnsupportedShell),
    }
}

/// Von Neumann entropy `−Σ λ ln λ` (natural log, so a maximally mixed
/// qubit gives ln 2).
pub fn von_neumann_entropy(rho: &DMatrix<C64>) -> Result<f64, EntanglementError> {
    let (vals, _) = hermitian_eigen(rho)?;
    Ok(vals
        .iter()
        .map(|&v| if v > 0.0 { -v * v.ln() } else { 0.0 })
        .sum())
}

fn single_site_purity(rho: &DensityMatrix, site: usize) -> f64 {
    let m = rho.as_matrix();
    let p = m[(site + 1, site + 1)].re;
    let coherence = m[(site + 1, 0)].norm_sqr();
    (1.0 - p) * (1.0 - p) + p * p + 2.0 * coherence
}

/// Meyer–Wallach global entanglement `E_gl = 2 − (2/N) Σ_j tr(ρ_j²)`
/// over the single-site reductions.
pub fn global_entanglement(rho: &DensityMatrix) -> f64 {
    let n = rho.sites();
    let purity_sum: f64 = (0..n).map(|j| single_site_purity(rho, j)).sum();
    2.0 - 2.0 / n as f64 * purity_sum
}

/// [`global_entanglement`] for a pure single-excitation state.
pub fn global_entanglement_pure(psi: &QuantumState) -> f64 {
    global_entanglement(&DensityMatrix::from_pure(psi))
}

/// Entanglement metrics of one time point of a walk.
#[derive(Debug, Clone)]
pub struct EntanglementRecord {
    pub time: f64,
    /// `C_{source,j}` for every site `j != source`, in site order.
    pub source_pairwise: Vec<(usize, f64)>,
    /// Within-shell pairwise concurrences `(shell, site_a, site_b, C)`.
    pub shell_pairwise: Vec<(usize, usize, usize, f64)>,
    /// CKW bounds `(shell, site_i, C^min_{i,(j,k)})` for 3-site shells.
    pub distributed_bounds: Vec<(usize, usize, f64)>,
    /// Shell-average concurrence per shell (None for 1-site shells).
    pub shell_average: Vec<Option<f64>>,
    pub source_lattice: f64,
    /// Von Neumann entropy of the source site.
    pub source_entropy: f64,
    pub global: f64,
}

/// Per-time entanglement report of a trajectory on `spec`, measured
/// from the walk source.
pub fn entanglement_report(
    traj: &Trajectory,
    spec: &LatticeSpec,
) -> Result<Vec<EntanglementRecord>, EntanglementError> {
    let source = spec.source();
    let shells = spec.shells(source).map_err(|_| EntanglementError::InvalidSubset)?;
    let sites = spec.sites();

    let mut out = Vec::with_capacity(traj.len());
    for k in 0..traj.len() {
        let rho = traj.density_matrix(k);

        let mut source_pairwise = Vec::with_capacity(sites - 1);
        for j in 0..sites {
            if j == source {
                continue;
            }
            let pair = reduce(&rho, &[source, j])?;
            source_pairwise.push((j, concurrence(&pair)?));
        }

        let mut shell_pairwise = Vec::new();
        let mut distributed_bounds = Vec::new();
        let mut shell_average = Vec::with_capacity(shells.len());
        for (m, shell) in shells.iter().enumerate() {
            match shell.len() {
                2 => {
                    let (a, b) = (shell[0], shell[1]);
                    let c = concurrence(&reduce(&rho, &[a, b])?)?;
                    shell_pairwise.push((m, a, b, c));
                    shell_average.push(Some(shell_average_concurrence(&[c])?));
                }
                3 => {
                    let (a, b, c_site) = (shell[0], shell[1], shell[2]);
                    let c_ab = concurrence(&reduce(&rho, &[a, b])?)?;
                    let c_ac = concurrence(&reduce(&rho, &[a, c_site])?)?;
                    let c_bc = concurrence(&reduce(&rho, &[b, c_site])?)?;
                    shell_pairwise.push((m, a, b, c_ab));
                    shell_pairwise.push((m, a, c_site, c_ac));
                    shell_pairwise.push((m, b, c_site, c_bc));
                    distributed_bounds.push((m, a, distributed_concurrence_lb(c_ab, c_ac)));
                    distributed_bounds.push((m, b, distributed_concurrence_lb(c_ab, c_bc)));
                    distributed_bounds.push((m, c_site, distributed_concurrence_lb(c_ac, c_bc)));
                    shell_average.push(Some(shell_average_concurrence(&[c_ab, c_ac, c_bc])?));
                }
                _ => shell_average.push(None),
            }
        }

        let source_lattice =
            source_lattice_concurrence(&source_pairwise.iter().map(|p| p.1).collect::<Vec<_>>());
        let source_entropy = von_neumann_entropy(&reduce(&rho, &[source])?)?;
        let global = global_entanglement(&rho);

        out.push(EntanglementRecord {
            time: traj.times()[k],
            source_pairwise,
            shell_pairwise,
            distributed_bounds,
            shell_average,
            source_lattice,
            source_entropy,
            global,
        });
    }
    Ok(out)
}

/// `|W_N⟩`-class helper: the uniform single-excitation state.
pub fn w_state(sites: usize) -> QuantumState {
    let amp = C64::new(1.0 / (sites as f64).sqrt(), 0.0);
    QuantumState::new(nalgebra::DVector::from_element(sites, amp)).expect("normalized")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;

    fn bell_pair() -> DMatrix<C64> {
        // (|ge⟩ + |eg⟩)/√2
        let mut psi = DVector::<C64>::zeros(4);
        psi[1] = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        psi[2] = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        &psi * psi.adjoint()
    }

    #[test]
    fn reduce_bell_like_pair() {
        let mut amp = DVector::<C64>::zeros(4);
        amp[1] = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        amp[2] = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        let psi = QuantumState::new(amp).unwrap();
        let rho = reduce_pure(&psi, &[1, 2]).unwrap();
        let expect = bell_pair();
        assert!(crate::linalg::max_abs_diff(&rho, &expect) < 1e-12);
        // purity 1: no support outside the kept pair
        let purity = (&rho * &rho).trace().re;
        assert_abs_diff_eq!(purity, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn reduce_w9_single_site() {
        let w = w_state(9);
        let rho = reduce_pure(&w, &[4]).unwrap();
        assert_abs_diff_eq!(rho[(0, 0)].re, 8.0 / 9.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rho[(1, 1)].re, 1.0 / 9.0, epsilon = 1e-12);
        assert!(rho[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn reduce_rejects_bad_subsets() {
        let w = w_state(4);
        assert!(reduce_pure(&w, &[]).is_err());
        assert!(reduce_pure(&w, &[0, 0]).is_err());
        assert!(reduce_pure(&w, &[5]).is_err());
        assert!(reduce_pure(&w, &[0, 1, 2, 3]).is_err());
    }

    #[test]
    fn concurrence_bell_and_product() {
        assert_abs_diff_eq!(concurrence(&bell_pair()).unwrap(), 1.0, epsilon = 1e-12);
        let mut gg = DMatrix::<C64>::zeros(4, 4);
        gg[(0, 0)] = C64::new(1.0, 0.0);
        assert_abs_diff_eq!(concurrence(&gg).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn concurrence_w9_pair() {
        let w = w_state(9);
        let rho = reduce_pure(&w, &[2, 7]).unwrap();
        assert_abs_diff_eq!(concurrence(&rho).unwrap(), 2.0 / 9.0, epsilon = 1e-11);
    }

    #[test]
    fn concurrence_rejects_unphysical() {
        let mut m = DMatrix::<C64>::zeros(4, 4);
        m[(0, 0)] = C64::new(1.5, 0.0);
        m[(1, 1)] = C64::new(-0.5, 0.0);
        assert_eq!(concurrence(&m).unwrap_err(), EntanglementError::InvalidState);
    }

    #[test]
    fn eof_values() {
        assert_abs_diff_eq!(entanglement_of_formation(0.0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(entanglement_of_formation(1.0), 1.0, epsilon = 1e-15);
        // frozen from a 40-digit evaluation of h((1+√0.75)/2)
        assert_abs_diff_eq!(
            entanglement_of_formation(0.5),
            0.354_578_902_665_269_88,
            epsilon = 1e-15
        );
    }

    #[test]
    fn eof_monotone() {
        let mut prev = 0.0;
        for k in 1..=100 {
            let e = entanglement_of_formation(k as f64 / 100.0);
            assert!(e > prev);
            prev = e;
        }
    }

    #[test]
    fn distributed_bound_values() {
        assert_abs_diff_eq!(distributed_concurrence_lb(0.6, 0.8), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(distributed_concurrence_lb(0.0, 0.0), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn ckw_equality_on_three_site_single_particle_states() {
        // α|100⟩ + β|010⟩ + γ|001⟩: the bound equals 2|α|√(|β|²+|γ|²)
        for trial in 0..50u64 {
            let raw: Vec<C64> = (0..3)
                .map(|i| {
                    C64::new(
                        crate::rng::stream_unit(11, trial, i) - 0.5,
                        crate::rng::stream_unit(12, trial, i) - 0.5,
                    )
                })
                .collect();
            let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let amp = DVector::from_iterator(3, raw.iter().map(|z| z / norm));
            let psi = QuantumState::new(amp.clone()).unwrap();
            let c01 = concurrence(&reduce_pure(&psi, &[0, 1]).unwrap()).unwrap();
            let c02 = concurrence(&reduce_pure(&psi, &[0, 2]).unwrap()).unwrap();
            let bound = distributed_concurrence_lb(c01, c02);
            let exact = 2.0 * amp[0].norm() * (amp[1].norm_sqr() + amp[2].norm_sqr()).sqrt();
            assert_abs_diff_eq!(bound, exact, epsilon = 1e-9);
        }
    }

    #[test]
    fn source_lattice_values() {
        assert_abs_diff_eq!(source_lattice_concurrence(&[0.3, 0.4]), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(source_lattice_concurrence(&[0.0, 0.0]), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn shell_average_cases() {
        assert_abs_diff_eq!(shell_average_concurrence(&[0.7]).unwrap(), 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(
            shell_average_concurrence(&[0.0, 0.0, 0.0]).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        // symmetric shell with all pairwise c: C̄ = c√2
        let c = 0.37;
        assert_abs_diff_eq!(
            shell_average_concurrence(&[c, c, c]).unwrap(),
            c * 2.0f64.sqrt(),
            epsilon = 1e-15
        );
        assert!(shell_average_concurrence(&[0.1, 0.2]).is_err());
    }

    #[test]
    fn entropy_values() {
        let mut pure = DMatrix::<C64>::zeros(2, 2);
        pure[(0, 0)] = C64::new(1.0, 0.0);
        assert_abs_diff_eq!(von_neumann_entropy(&pure).unwrap(), 0.0, epsilon = 1e-12);

        let mixed = DMatrix::from_diagonal(&DVector::from_vec(alloc::vec![
            C64::new(0.5, 0.0),
            C64::new(0.5, 0.0),
        ]));
        assert_abs_diff_eq!(
            von_neumann_entropy(&mixed).unwrap(),
            core::f64::consts::LN_2,
            epsilon = 1e-12
        );

        // frozen from a 40-digit evaluation of −(8/9)ln(8/9) − (1/9)ln(1/9)
        let w_site = DMatrix::from_diagonal(&DVector::from_vec(alloc::vec![
            C64::new(8.0 / 9.0, 0.0),
            C64::new(1.0 / 9.0, 0.0),
        ]));
        assert_abs_diff_eq!(
            von_neumann_entropy(&w_site).unwrap(),
            0.348_832_095_843_031_9,
            epsilon = 1e-12
        );
    }

    #[test]
    fn global_entanglement_values() {
        // product state: one site excited
        let product = QuantumState::site_basis(5, 2);
        assert_abs_diff_eq!(global_entanglement_pure(&product), 0.0, epsilon = 1e-12);

        // W_9: 4(N−1)/N² = 32/81
        assert_abs_diff_eq!(
            global_entanglement_pure(&w_state(9)),
            32.0 / 81.0,
            epsilon = 1e-12
        );

        // two-site Bell-like state
        let mut amp = DVector::<C64>::zeros(2);
        amp[0] = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        amp[1] = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        let bell = QuantumState::new(amp).unwrap();
        assert_abs_diff_eq!(global_entanglement_pure(&bell), 1.0, epsilon = 1e-12);
    }
}
