//! Time evolution: exact unitary propagation via Hermitian
//! eigendecomposition, Lindblad open-system propagation in the
//! vacuum + single-excitation subspace, and a brute-force oracle over
//! the full 2^N qubit space.

use alloc::collections::btree_map::{BTreeMap, Entry};
use alloc::vec::Vec;
use core::fmt;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::{Float, Zero};

use crate::lattice::LatticeSpec;
use crate::linalg::{
    expm, hermitian_eigen, kron, symmetric_eigen_real, unvec_density, vec_density,
    HermitianMatrix, LinalgError, C64,
};

/// Largest site count accepted by the full-space oracle (2^12 = 4096).
pub const FULL_SPACE_MAX_SITES: usize = 12;

pub const NORM_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynamicsError {
    /// State vector not normalized / density matrix not physical.
    InvalidState,
    /// Distribution has negative entries or sums above one.
    InvalidDistribution,
    /// Output times must be strictly increasing and nonnegative.
    InvalidTimeGrid,
    DimensionMismatch,
    /// Site count too large for the 2^N oracle.
    CapacityExceeded,
    /// Eigensolver or linear-solve failure, with the underlying cause.
    Numerical(LinalgError),
    /// Propagation violated a conservation law beyond tolerance.
    ContractViolation,
}

impl fmt::Display for DynamicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidState => write!(f, "invalid quantum state"),
            Self::InvalidDistribution => write!(f, "invalid probability distribution"),
            Self::InvalidTimeGrid => write!(f, "time grid must be strictly increasing and >= 0"),
            Self::DimensionMismatch => write!(f, "operator/state dimension mismatch"),
            Self::CapacityExceeded => {
                write!(f, "full-space oracle limited to {FULL_SPACE_MAX_SITES} sites")
            }
            Self::Numerical(e) => write!(f, "numerical error: {e}"),
            Self::ContractViolation => write!(f, "conservation tolerance exceeded"),
        }
    }
}

impl core::error::Error for DynamicsError {}

impl From<LinalgError> for DynamicsError {
    fn from(e: LinalgError) -> Self {
        Self::Numerical(e)
    }
}

/// Pure state in the single-excitation basis `{|i⟩}`, unit norm
/// within [`NORM_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState(DVector<C64>);

impl QuantumState {
    pub fn new(amplitudes: DVector<C64>) -> Result<Self, DynamicsError> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(DynamicsError::InvalidState);
        }
        Ok(Self(amplitudes))
    }

    /// Excitation localized on one site.
    pub fn site_basis(sites: usize, site: usize) -> Self {
        assert!(site < sites, "site out of range");
        let mut v = DVector::zeros(sites);
        v[site] = C64::new(1.0, 0.0);
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn populations(&self) -> Vec<f64> {
        self.0.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// Density matrix over the basis `{|vac⟩, |1⟩, …, |N⟩}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(DMatrix<C64>);

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (eigenvalues
    /// above −[`POSITIVITY_TOL`]).
    pub fn new(m: DMatrix<C64>) -> Result<Self, DynamicsError> {
        if m.nrows() != m.ncols() || m.nrows() < 2 {
            return Err(DynamicsError::InvalidState);
        }
        let herm = HermitianMatrix::new(m.clone()).map_err(|_| DynamicsError::InvalidState)?;
        let trace: C64 = m.diagonal().iter().sum();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(DynamicsError::InvalidState);
        }
        let (vals, _) = herm.eigen()?;
        if vals.iter().any(|&v| v < -POSITIVITY_TOL) {
            return Err(DynamicsError::InvalidState);
        }
        Ok(Self(m))
    }

    /// Embed a pure single-excitation state (vacuum amplitude zero).
    pub fn from_pure(state: &QuantumState) -> Self {
        let n = state.dim();
        let mut m = DMatrix::zeros(n + 1, n + 1);
        for i in 0..n {
            for j in 0..n {
                m[(i + 1, j + 1)] = state.amplitudes()[i] * state.amplitudes()[j].conj();
            }
        }
        Self(m)
    }

    /// `|i⟩⟨i|` for a single excited site.
    pub fn from_excited_site(sites: usize, site: usize) -> Self {
        assert!(site < sites, "site out of range");
        let mut m = DMatrix::zeros(sites + 1, sites + 1);
        m[(site + 1, site + 1)] = C64::new(1.0, 0.0);
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// Number of lattice sites (dimension minus the vacuum level).
    pub fn sites(&self) -> usize {
        self.0.nrows() - 1
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn vacuum_population(&self) -> f64 {
        self.0[(0, 0)].re
    }

    /// Diagonal over the site levels (excludes the vacuum).
    pub fn site_populations(&self) -> Vec<f64> {
        (0..self.sites()).map(|i| self.0[(i + 1, i + 1)].re).collect()
    }

    pub fn min_eigenvalue(&self) -> Result<f64, DynamicsError> {
        let (vals, _) = hermitian_eigen(&self.0)?;
        Ok(vals.iter().fold(f64::INFINITY, |a, &b| a.min(b)))
    }
}

/// Uniform relaxation and dephasing rates (angular-frequency units).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseParams {
    pub relaxation: f64,
    pub dephasing: f64,
}

impl NoiseParams {
    pub fn new(relaxation: f64, dephasing: f64) -> Self {
        assert!(relaxation >= 0.0 && dephasing >= 0.0, "rates must be >= 0");
        Self { relaxation, dephasing }
    }

    pub fn is_closed(&self) -> bool {
        self.relaxation == 0.0 && self.dephasing == 0.0
    }
}

#[derive(Debug, Clone)]
pub enum TrajectoryStates {
    Pure(Vec<QuantumState>),
    Mixed(Vec<DensityMatrix>),
}

/// Time grid plus per-time states and cached site populations.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: TrajectoryStates,
    populations: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn states(&self) -> &TrajectoryStates {
        &self.states
    }

    /// Raw site populations `⟨n_i⟩` at time index `k` (no
    /// renormalization; open systems lose weight to the vacuum).
    pub fn site_populations(&self, k: usize) -> &[f64] {
        &self.populations[k]
    }

    /// Total surviving excitation at time index `k`.
    pub fn excitation(&self, k: usize) -> f64 {
        self.populations[k].iter().sum()
    }

    /// Density matrix at index `k` in the vacuum+sites basis
    /// (pure states are embedded on the fly).
    pub fn density_matrix(&self, k: usize) -> DensityMatrix {
        match &self.states {
            TrajectoryStates::Pure(v) => DensityMatrix::from_pure(&v[k]),
            TrajectoryStates::Mixed(v) => v[k].clone(),
        }
    }
}

fn check_times(times: &[f64]) -> Result<(), DynamicsError> {
    if times.is_empty() || times[0] < 0.0 {
        return Err(DynamicsError::InvalidTimeGrid);
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DynamicsError::InvalidTimeGrid);
    }
    Ok(())
}

/// `ψ(t) = exp(−iHt)·ψ0` from one eigendecomposition of `H`, reused
/// for every output time.
pub fn evolve_unitary(
    h: &HermitianMatrix,
    psi0: &QuantumState,
    times: &[f64],
) -> Result<Trajectory, DynamicsError> {
    if h.dim() != psi0.dim() {
        return Err(DynamicsError::DimensionMismatch);
    }
    check_times(times)?;
    let (vals, vecs) = h.eigen()?;
    let coeffs = vecs.adjoint() * psi0.amplitudes();

    let mut states = Vec::with_capacity(times.len());
    let mut populations = Vec::with_capacity(times.len());
    for &t in times {
        let phased = DVector::from_iterator(
            coeffs.len(),
            coeffs
                .iter()
                .zip(vals.iter())
                .map(|(c, &w)| c * C64::new(0.0, -w * t).exp()),
        );
        let psi = &vecs * phased;
        if (psi.norm() - 1.0).abs() > NORM_TOL {
            return Err(DynamicsError::ContractViolation);
        }
        let state = QuantumState(psi);
        populations.push(state.populations());
        states.push(state);
    }
    Ok(Trajectory { times: times.to_vec(), states: TrajectoryStates::Pure(states), populations })
}

/// `σ⁻_i` on the vacuum+sites basis: `|vac⟩⟨i|`.
fn lowering(dim: usize, site: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(dim, dim);
    m[(0, site + 1)] = C64::new(1.0, 0.0);
    m
}

/// `σ^z_i` with the convention `σ^z|g⟩ = +|g⟩`, `σ^z|e⟩ = −|e⟩`:
/// diagonal `+1` everywhere except `−1` on `|i⟩`.
fn sigma_z(dim: usize, site: usize) -> DMatrix<C64> {
    let mut m = DMatrix::identity(dim, dim);
    m[(site + 1, site + 1)] = C64::new(-1.0, 0.0);
    m
}

/// Vectorized Liouvillian for `ρ̇ = −i[H',ρ] + γ_r/2 Σ(2σ⁻ρσ⁺ − {σ⁺σ⁻,ρ})
/// + γ_φ Σ(σ^zρσ^z − ρ)` with `H' = 0 ⊕ H`.
fn liouvillian(h: &HermitianMatrix, noise: &NoiseParams) -> DMatrix<C64> {
    let n = h.dim();
    let d = n + 1;
    let mut hp = DMatrix::<C64>::zeros(d, d);
    hp.view_mut((1, 1), (n, n)).copy_from(h.as_matrix());

    let id = DMatrix::<C64>::identity(d, d);
    let minus_i = C64::new(0.0, -1.0);
    let mut l = (kron(&id, &hp) - kron(&hp.transpose(), &id)) * minus_i;

    if noise.relaxation > 0.0 {
        let gr = C64::new(noise.relaxation, 0.0);
        let half = C64::new(0.5, 0.0);
        for i in 0..n {
            let low = lowering(d, i);
            let num = low.adjoint() * &low;
            l += (kron(&low.map(|z| z.conj()), &low)
                - kron(&id, &num) * half
                - kron(&num.transpose(), &id) * half)
                * gr;
        }
    }
    if noise.dephasing > 0.0 {
        let gp = C64::new(noise.dephasing, 0.0);
        let full_id = DMatrix::<C64>::identity(d * d, d * d);
        for i in 0..n {
            let sz = sigma_z(d, i);
            l += (kron(&sz.transpose(), &sz) - &full_id) * gp;
        }
    }
    l
}

/// Integrates the Lindblad master equation by exponentiating the
/// vectorized Liouvillian once per distinct time step.
pub fn evolve_lindblad(
    h: &HermitianMatrix,
    rho0: &DensityMatrix,
    noise: &NoiseParams,
    times: &[f64],
) -> Result<Trajectory, DynamicsError> {
    if rho0.dim() != h.dim() + 1 {
        return Err(DynamicsError::DimensionMismatch);
    }
    check_times(times)?;
    let d = rho0.dim();
    let l = liouvillian(h, noise);

    let mut propagators: BTreeMap<u64, DMatrix<C64>> = BTreeMap::new();
    let mut rho_vec = vec_density(rho0.as_matrix());
    let mut prev_t = 0.0;

    let mut states = Vec::with_capacity(times.len());
    let mut populations = Vec::with_capacity(times.len());
    for &t in times {
        let dt = t - prev_t;
        prev_t = t;
        if dt > 0.0 {
            let step = match propagators.entry(dt.to_bits()) {
                Entry::Occupied(e) => e.into_mut(),
                Entry::Vacant(e) => e.insert(expm(&(&l * C64::new(dt, 0.0)))?),
            };
            rho_vec = &*step * &rho_vec;
        }
        let m = unvec_density(&rho_vec, d);
        // symmetrize rounding noise before validating
        let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        let trace: f64 = m.diagonal().iter().map(|z| z.re).sum();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(DynamicsError::ContractViolation);
        }
        let rho = DensityMatrix(m);
        if rho.min_eigenvalue()? < -POSITIVITY_TOL {
            return Err(DynamicsError::ContractViolation);
        }
        populations.push(rho.site_populations());
        states.push(rho);
    }
    Ok(Trajectory { times: times.to_vec(), states: TrajectoryStates::Mixed(states), populations })
}

/// Full-space trajectory: per-site occupation numbers plus the
/// projection onto the vacuum+single-excitation basis.
#[derive(Debug, Clone)]
pub struct FullSpaceTrajectory {
    pub times: Vec<f64>,
    /// `⟨n_i⟩(t)` for each lattice site.
    pub site_populations: Vec<Vec<f64>>,
    /// Amplitudes on `{|vac⟩, |1⟩, …, |N⟩}` at each time.
    pub projected: Vec<DVector<C64>>,
    /// Probability weight outside the vacuum+single-excitation sector.
    pub subspace_leakage: Vec<f64>,
}

/// Evolves the tight-binding Hamiltonian built from `σ†σ` operators on
/// the full 2^N qubit space. `psi0` is given over the
/// vacuum+single-excitation basis (length N+1, unit norm); projecting
/// the result back must reproduce [`evolve_unitary`].
pub fn full_space_evolve(
    spec: &LatticeSpec,
    psi0: &DVector<C64>,
    times: &[f64],
) -> Result<FullSpaceTrajectory, DynamicsError> {
    let n = spec.sites();
    if n > FULL_SPACE_MAX_SITES {
        return Err(DynamicsError::CapacityExceeded);
    }
    if psi0.len() != n + 1 {
        return Err(DynamicsError::DimensionMismatch);
    }
    if (psi0.norm() - 1.0).abs() > NORM_TOL {
        return Err(DynamicsError::InvalidState);
    }
    check_times(times)?;

    let dim = 1usize << n;
    // basis state b: bit i set = site i excited
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for b in 0..dim {
        let mut diag = 0.0;
        for (i, eps) in spec.detunings().iter().enumerate() {
            if b >> i & 1 == 1 {
                diag += eps;
            }
        }
        h[(b, b)] = diag;
    }
    for bond in spec.bonds() {
        for b in 0..dim {
            // hop a -> b requires site a excited, site b empty
            if b >> bond.a & 1 == 1 && b >> bond.b & 1 == 0 {
                let b2 = b & !(1 << bond.a) | 1 << bond.b;
                h[(b2, b)] = -bond.strength;
                h[(b, b2)] = -bond.strength;
            }
        }
    }

    let (vals, vecs) = symmetric_eigen_real(&h)?;

    let mut full0_re = DVector::<f64>::zeros(dim);
    let mut full0_im = DVector::<f64>::zeros(dim);
    full0_re[0] = psi0[0].re;
    full0_im[0] = psi0[0].im;
    for i in 0..n {
        full0_re[1 << i] = psi0[i + 1].re;
        full0_im[1 << i] = psi0[i + 1].im;
    }
    let c_re = vecs.tr_mul(&full0_re);
    let c_im = vecs.tr_mul(&full0_im);

    let mut site_populations = Vec::with_capacity(times.len());
    let mut projected = Vec::with_capacity(times.len());
    let mut leakage = Vec::with_capacity(times.len());
    for &t in times {
        let mut w_re = DVector::<f64>::zeros(dim);
        let mut w_im = DVector::<f64>::zeros(dim);
        for k in 0..dim {
            let (s, c) = (-vals[k] * t).sin_cos();
            // (c + i s)(c_re + i c_im)
            w_re[k] = c * c_re[k] - s * c_im[k];
            w_im[k] = c * c_im[k] + s * c_re[k];
        }
        let psi_re = &vecs * w_re;
        let psi_im = &vecs * w_im;

        let mut pops = alloc::vec![0.0; n];
        for b in 0..dim {
            let p = psi_re[b] * psi_re[b] + psi_im[b] * psi_im[b];
            let mut bits = b;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                pops[i] += p;
                bits &= bits - 1;
            }
        }
        let mut proj = DVector::<C64>::zeros(n + 1);
        proj[0] = C64::new(psi_re[0], psi_im[0]);
        let mut kept = proj[0].norm_sqr();
        for i in 0..n {
            proj[i + 1] = C64::new(psi_re[1 << i], psi_im[1 << i]);
            kept += proj[i + 1].norm_sqr();
        }
        site_populations.push(pops);
        projected.push(proj);
        leakage.push((1.0 - kept).max(0.0));
    }
    Ok(FullSpaceTrajectory { times: times.to_vec(), site_populations, projected, subspace_leakage: leakage })
}

/// Bhattacharyya coefficient `Σ √(p_i q_i)` between two (sub)normalized
/// distributions.
pub fn fidelity(p: &[f64], q: &[f64]) -> Result<f64, DynamicsError> {
    if p.len() != q.len() {
        return Err(DynamicsError::DimensionMismatch);
    }
    if p.iter().chain(q.iter()).any(|&x| x < 0.0) {
        return Err(DynamicsError::InvalidDistribution);
    }
    let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
    if sp > 1.0 + 1e-9 || sq > 1.0 + 1e-9 {
        return Err(DynamicsError::InvalidDistribution);
    }
    Ok(p.iter().zip(q.iter()).map(|(&a, &b)| (a * b).sqrt()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;
    use approx::assert_abs_diff_eq;

    fn uniform_times(max: f64, points: usize) -> Vec<f64> {
        (0..points).map(|k| max * k as f64 / (points - 1) as f64).collect()
    }

    #[test]
    fn two_site_rabi() {
        let spec = LatticeSpec::chain(2, 1.0).unwrap();
        let h = spec.hamiltonian();
        let psi0 = QuantumState::site_basis(2, 0);
        let times = uniform_times(core::f64::consts::PI, 101);
        let traj = evolve_unitary(&h, &psi0, &times).unwrap();
        for (k, &t) in times.iter().enumerate() {
            let p = traj.site_populations(k);
            assert_abs_diff_eq!(p[0], t.cos().powi(2), epsilon = 1e-12);
            assert_abs_diff_eq!(p[1], t.sin().powi(2), epsilon = 1e-12);
        }
        // full transfer at t = π/2
        let half = evolve_unitary(&h, &psi0, &[core::f64::consts::FRAC_PI_2]).unwrap();
        assert_abs_diff_eq!(half.site_populations(0)[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let h = HermitianMatrix::new(DMatrix::zeros(4, 4)).unwrap();
        let mut amp = DVector::zeros(4);
        amp[1] = C64::new(0.6, 0.0);
        amp[3] = C64::new(0.0, 0.8);
        let psi0 = QuantumState::new(amp.clone()).unwrap();
        let traj = evolve_unitary(&h, &psi0, &[0.5, 1.0, 7.0]).unwrap();
        if let TrajectoryStates::Pure(states) = traj.states() {
            for s in states {
                assert!((s.amplitudes() - &amp).norm() < 1e-12);
            }
        } else {
            panic!("expected pure states");
        }
    }

    #[test]
    fn unitary_norm_and_composition() {
        let spec = LatticeSpec::chain(7, 1.0).unwrap();
        let h = spec.hamiltonian();
        let psi0 = QuantumState::site_basis(7, 0);
        let t = 1.7;
        let once = evolve_unitary(&h, &psi0, &[t]).unwrap();
        let TrajectoryStates::Pure(s1) = once.states() else { panic!() };
        // half-step twice equals one full step
        let half = evolve_unitary(&h, &psi0, &[t / 2.0]).unwrap();
        let TrajectoryStates::Pure(sh) = half.states() else { panic!() };
        let again = evolve_unitary(&h, &sh[0], &[t / 2.0]).unwrap();
        let TrajectoryStates::Pure(s2) = again.states() else { panic!() };
        assert!((s1[0].amplitudes() - s2[0].amplitudes()).norm() < 1e-10);
    }

    #[test]
    fn time_reversal() {
        let spec = LatticeSpec::grid(3, 3, 1.0).unwrap();
        let h = spec.hamiltonian();
        let psi0 = QuantumState::site_basis(9, 0);
        let fwd = evolve_unitary(&h, &psi0, &[2.3]).unwrap();
        let TrajectoryStates::Pure(s) = fwd.states() else { panic!() };
        let neg = HermitianMatrix::new(-h.as_matrix().clone()).unwrap();
        let back = evolve_unitary(&neg, &s[0], &[2.3]).unwrap();
        let TrajectoryStates::Pure(s2) = back.states() else { panic!() };
        assert!((s2[0].amplitudes() - psi0.amplitudes()).norm() < 1e-9);
    }

    #[test]
    fn rejects_bad_time_grids() {
        let h = LatticeSpec::chain(2, 1.0).unwrap().hamiltonian();
        let psi0 = QuantumState::site_basis(2, 0);
        assert!(evolve_unitary(&h, &psi0, &[]).is_err());
        assert!(evolve_unitary(&h, &psi0, &[0.0, 0.0]).is_err());
        assert!(evolve_unitary(&h, &psi0, &[1.0, 0.5]).is_err());
        assert!(evolve_unitary(&h, &psi0, &[-1.0, 0.5]).is_err());
    }

    #[test]
    fn amplitude_damping_single_site() {
        // H = 0, γ_φ = 0: population decays exactly as e^{−γ_r t}
        let h = HermitianMatrix::new(DMatrix::zeros(1, 1)).unwrap();
        let rho0 = DensityMatrix::from_excited_site(1, 0);
        let noise = NoiseParams::new(0.25, 0.0);
        let times = uniform_times(8.0, 41);
        let traj = evolve_lindblad(&h, &rho0, &noise, &times).unwrap();
        for (k, &t) in times.iter().enumerate() {
            assert_abs_diff_eq!(
                traj.site_populations(k)[0],
                (-0.25 * t).exp(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn closed_limit_matches_unitary() {
        let spec = LatticeSpec::chain(4, 1.0).unwrap();
        let h = spec.hamiltonian();
        let psi0 = QuantumState::site_basis(4, 1);
        let rho0 = DensityMatrix::from_pure(&psi0);
        let times = uniform_times(5.0, 26);
        let lind = evolve_lindblad(&h, &rho0, &NoiseParams::default(), &times).unwrap();
        let unit = evolve_unitary(&h, &psi0, &times).unwrap();
        for k in 0..times.len() {
            let rho_u = DensityMatrix::from_pure(match unit.states() {
                TrajectoryStates::Pure(s) => &s[k],
                _ => unreachable!(),
            });
            let diff = crate::linalg::max_abs_diff(
                lind.density_matrix(k).as_matrix(),
                rho_u.as_matrix(),
            );
            assert!(diff < 1e-9, "t={} diff={diff}", times[k]);
        }
    }

    #[test]
    fn excitation_decays_exactly_for_any_hamiltonian() {
        // H conserves excitation number and relaxation is uniform, so
        // the single-excitation weight decays as e^{−γ_r t} under any H.
        let n = 5;
        let mut m = DMatrix::<C64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let u = crate::rng::stream_unit(3, i as u64, j as u64) - 0.5;
                m[(i, j)] = C64::new(u, 0.0);
            }
        }
        let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        let h = HermitianMatrix::new(m).unwrap();
        let rho0 = DensityMatrix::from_excited_site(n, 2);
        let noise = NoiseParams::new(0.15, 0.35);
        let times = uniform_times(6.0, 31);
        let traj = evolve_lindblad(&h, &rho0, &noise, &times).unwrap();
        for (k, &t) in times.iter().enumerate() {
            let total: f64 = traj.site_populations(k).iter().sum();
            assert_abs_diff_eq!(total, (-0.15 * t).exp(), epsilon = 1e-9);
        }
    }

    #[test]
    fn partial_excitation_decays_from_its_initial_weight() {
        // ρ0 = 0.3|vac⟩⟨vac| + 0.7|1⟩⟨1|: the excited weight decays as
        // 0.7·e^{−γ_r t}
        let spec = LatticeSpec::chain(3, 1.0).unwrap();
        let h = spec.hamiltonian();
        let mut m = DMatrix::<C64>::zeros(4, 4);
        m[(0, 0)] = C64::new(0.3, 0.0);
        m[(2, 2)] = C64::new(0.7, 0.0);
        let rho0 = DensityMatrix::new(m).unwrap();
        let noise = NoiseParams::new(0.2, 0.1);
        let times = uniform_times(5.0, 21);
        let traj = evolve_lindblad(&h, &rho0, &noise, &times).unwrap();
        for (k, &t) in times.iter().enumerate() {
            let total: f64 = traj.site_populations(k).iter().sum();
            assert_abs_diff_eq!(total, 0.7 * (-0.2 * t).exp(), epsilon = 1e-10);
        }
    }

    #[test]
    fn coherence_decay_rates_pin_sigma_z_convention() {
        // H = 0: ρ_{ij} decays at γ_r + 4γ_φ, ρ_{i,vac} at γ_r/2 + 2γ_φ
        let n = 3;
        let h = HermitianMatrix::new(DMatrix::zeros(n, n)).unwrap();
        let gr = 0.11;
        let gp = 0.07;
        let mut m = DMatrix::<C64>::zeros(n + 1, n + 1);
        m[(0, 0)] = C64::new(0.25, 0.0);
        m[(1, 1)] = C64::new(0.375, 0.0);
        m[(2, 2)] = C64::new(0.375, 0.0);
        m[(1, 2)] = C64::new(0.2, 0.1);
        m[(2, 1)] = C64::new(0.2, -0.1);
        m[(1, 0)] = C64::new(0.1, -0.05);
        m[(0, 1)] = C64::new(0.1, 0.05);
        let rho0 = DensityMatrix::new(m.clone()).unwrap();
        let t = 2.5;
        let traj =
            evolve_lindblad(&h, &rho0, &NoiseParams::new(gr, gp), &[t]).unwrap();
        let rho_t = traj.density_matrix(0);
        let site_site = m[(1, 2)] * (-(gr + 4.0 * gp) * t).exp();
        let site_vac = m[(1, 0)] * (-(gr / 2.0 + 2.0 * gp) * t).exp();
        assert!((rho_t.as_matrix()[(1, 2)] - site_site).norm() < 1e-12);
        assert!((rho_t.as_matrix()[(1, 0)] - site_vac).norm() < 1e-12);
    }

    #[test]
    fn lindblad_stepping_composes_exactly_on_irregular_grids() {
        // exp(L a)·exp(L b) = exp(L (a+b)): stepping through an uneven
        // grid must agree with single-shot propagation to each time
        let spec = LatticeSpec::chain(3, 1.0).unwrap();
        let h = spec.hamiltonian();
        let rho0 = DensityMatrix::from_excited_site(3, 0);
        let noise = NoiseParams::new(0.12, 0.31);
        let grid = [0.3, 0.7, 1.5, 1.55, 2.9];
        let stepped = evolve_lindblad(&h, &rho0, &noise, &grid).unwrap();
        for (k, &t) in grid.iter().enumerate() {
            let direct = evolve_lindblad(&h, &rho0, &noise, &[t]).unwrap();
            let diff = crate::linalg::max_abs_diff(
                stepped.density_matrix(k).as_matrix(),
                direct.density_matrix(0).as_matrix(),
            );
            assert!(diff < 1e-12, "t={t}: {diff}");
        }
    }

    #[test]
    fn lindblad_trace_and_positivity() {
        let spec = LatticeSpec::grid(2, 2, 1.0).unwrap();
        let h = spec.hamiltonian();
        let rho0 = DensityMatrix::from_excited_site(4, 0);
        let noise = NoiseParams::new(0.02, 0.05);
        let times = uniform_times(20.0, 101);
        let traj = evolve_lindblad(&h, &rho0, &noise, &times).unwrap();
        for k in 0..times.len() {
            let rho = traj.density_matrix(k);
            assert!((rho.trace() - 1.0).abs() < 1e-9);
            assert!(rho.min_eigenvalue().unwrap() > -1e-9);
        }
    }

    #[test]
    fn full_space_vacuum_stays_vacuum() {
        let spec = LatticeSpec::chain(3, 1.0).unwrap();
        let mut psi0 = DVector::<C64>::zeros(4);
        psi0[0] = C64::new(1.0, 0.0);
        let traj = full_space_evolve(&spec, &psi0, &[1.0, 2.0]).unwrap();
        for k in 0..2 {
            assert!((traj.projected[k][0].norm() - 1.0).abs() < 1e-12);
            assert!(traj.site_populations[k].iter().all(|&p| p < 1e-12));
            assert!(traj.subspace_leakage[k] < 1e-12);
        }
    }

    #[test]
    fn full_space_capacity() {
        let spec = LatticeSpec::chain(13, 1.0).unwrap();
        let psi0 = DVector::<C64>::zeros(14);
        assert_eq!(
            full_space_evolve(&spec, &psi0, &[1.0]).unwrap_err(),
            DynamicsError::CapacityExceeded
        );
    }

    #[test]
    fn fidelity_cases() {
        assert_abs_diff_eq!(fidelity(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fidelity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            fidelity(&[1.0, 0.0], &[0.5, 0.5]).unwrap(),
            0.5f64.sqrt(),
            epsilon = 1e-15
        );
        assert!(fidelity(&[-0.1, 1.1], &[0.5, 0.5]).is_err());
        assert!(fidelity(&[0.9, 0.9], &[0.5, 0.5]).is_err());
    }
}
