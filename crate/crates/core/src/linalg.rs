//! Dense linear algebra helpers shared by the dynamics and
//! entanglement modules: validated Hermitian matrices, eigensolver
//! wrappers and a matrix exponential.

use alloc::vec::Vec;
use core::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
#[allow(unused_imports)]
use num_traits::{Float, Zero};

pub type C64 = Complex<f64>;

/// Entrywise tolerance for the Hermiticity check.
pub const HERMITICITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinalgError {
    NotHermitian,
    NotSquare,
    /// The iterative eigensolver did not converge.
    EigenFailure,
    Singular,
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotHermitian => write!(f, "matrix is not Hermitian within tolerance"),
            Self::NotSquare => write!(f, "matrix is not square"),
            Self::EigenFailure => write!(f, "eigensolver failed to converge"),
            Self::Singular => write!(f, "singular linear system"),
        }
    }
}

impl core::error::Error for LinalgError {}

/// Dense complex matrix checked to equal its conjugate transpose
/// entrywise within [`HERMITICITY_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(DMatrix<C64>);

impl HermitianMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self, LinalgError> {
        if m.nrows() != m.ncols() {
            return Err(LinalgError::NotSquare);
        }
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                let d = m[(i, j)] - m[(j, i)].conj();
                if d.norm() > HERMITICITY_TOL {
                    return Err(LinalgError::NotHermitian);
                }
            }
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    /// Eigenvalues (real, ascending is not guaranteed) and the unitary
    /// of column eigenvectors.
    pub fn eigen(&self) -> Result<(DVector<f64>, DMatrix<C64>), LinalgError> {
        hermitian_eigen(&self.0)
    }
}

// Convergence threshold for the symmetric QR iteration. The scalar
// type's machine epsilon makes nalgebra stall and mispair eigenpairs
// on matrices with exact degeneracies (e.g. the full-space
// tight-binding Hamiltonian); one digit of slack restores
// machine-precision reconstruction.
const EIGEN_EPS: f64 = 1e-15;

/// Eigendecomposition of a Hermitian matrix given as a raw `DMatrix`.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> Result<(DVector<f64>, DMatrix<C64>), LinalgError> {
    let eig = m
        .clone()
        .try_symmetric_eigen(EIGEN_EPS, 0)
        .ok_or(LinalgError::EigenFailure)?;
    Ok((eig.eigenvalues, eig.eigenvectors))
}

/// Same for a real symmetric matrix (used by the full-space oracle,
/// where the 2^N Hamiltonian is real and the complex solver would
/// waste a factor of a few in time and memory).
pub fn symmetric_eigen_real(
    m: &DMatrix<f64>,
) -> Result<(DVector<f64>, DMatrix<f64>), LinalgError> {
    let eig = m
        .clone()
        .try_symmetric_eigen(EIGEN_EPS, 0)
        .ok_or(LinalgError::EigenFailure)?;
    Ok((eig.eigenvalues, eig.eigenvectors))
}

/// Hermitian square root via eigendecomposition, clamping small
/// negative eigenvalues to zero.
pub fn hermitian_sqrt(m: &DMatrix<C64>) -> Result<DMatrix<C64>, LinalgError> {
    let (vals, vecs) = hermitian_eigen(m)?;
    let sq = DMatrix::from_diagonal(&vals.map(|x| C64::new(x.max(0.0).sqrt(), 0.0)));
    Ok(&vecs * sq * vecs.adjoint())
}

fn one_norm(m: &DMatrix<C64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling-and-squaring with a Padé(13)
/// approximant (Higham 2005). Accurate to close to machine precision
/// for the well-scaled generators used here.
pub fn expm(a: &DMatrix<C64>) -> Result<DMatrix<C64>, LinalgError> {
    if a.nrows() != a.ncols() {
        return Err(LinalgError::NotSquare);
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(a.clone());
    }

    const THETA_13: f64 = 5.371_920_351_148_152;
    #[rustfmt::skip]
    const B: [f64; 14] = [
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0, 129060195264000.0, 10559470521600.0,
        670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
        960960.0, 16380.0, 182.0, 1.0,
    ];

    let norm = one_norm(a);
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let scale = C64::new(0.5f64.powi(squarings as i32), 0.0);
    let a = a.map(|z| z * scale);

    let c = |x: f64| C64::new(x, 0.0);
    let ident = DMatrix::<C64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let u_inner = &a6 * c(B[13]) + &a4 * c(B[11]) + &a2 * c(B[9]);
    let u = &a * (&a6 * u_inner + &a6 * c(B[7]) + &a4 * c(B[5]) + &a2 * c(B[3]) + &ident * c(B[1]));
    let v_inner = &a6 * c(B[12]) + &a4 * c(B[10]) + &a2 * c(B[8]);
    let v = &a6 * v_inner + &a6 * c(B[6]) + &a4 * c(B[4]) + &a2 * c(B[2]) + &ident * c(B[0]);

    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut f = lhs.lu().solve(&rhs).ok_or(LinalgError::Singular)?;
    for _ in 0..squarings {
        f = &f * &f;
    }
    Ok(f)
}

/// Kronecker product (thin wrapper so callers need not know the
/// nalgebra method name).
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// Column-stacking vectorization matching nalgebra's column-major
/// storage: `vec(ρ)[j·d + i] = ρ[i, j]`.
pub fn vec_density(m: &DMatrix<C64>) -> DVector<C64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn unvec_density(v: &DVector<C64>, dim: usize) -> DMatrix<C64> {
    DMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// Eigenvalues of a Hermitian matrix sorted descending.
pub fn sorted_eigenvalues_desc(m: &DMatrix<C64>) -> Result<Vec<f64>, LinalgError> {
    let (vals, _) = hermitian_eigen(m)?;
    let mut v: Vec<f64> = vals.iter().copied().collect();
    v.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    Ok(v)
}

pub fn is_zero_matrix(m: &DMatrix<C64>, tol: f64) -> bool {
    m.iter().all(|z| z.norm() <= tol)
}

/// max_ij |a_ij − b_ij|
pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hermitian_validation() {
        let good = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(2.0, 0.0)],
        );
        assert!(HermitianMatrix::new(good).is_ok());
        let bad = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.0, 0.0), C64::new(0.5, 0.0), C64::new(0.0, 0.0), C64::new(2.0, 0.0)],
        );
        assert_eq!(HermitianMatrix::new(bad).unwrap_err(), LinalgError::NotHermitian);
    }

    #[test]
    fn eigen_reconstructs() {
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[
                C64::new(0.3, 0.0), C64::new(-1.0, 0.2), C64::zero(),
                C64::new(-1.0, -0.2), C64::new(-0.1, 0.0), C64::new(-1.0, 0.0),
                C64::zero(), C64::new(-1.0, 0.0), C64::new(0.7, 0.0),
            ],
        );
        let h = HermitianMatrix::new(m.clone()).unwrap();
        let (vals, vecs) = h.eigen().unwrap();
        let recon = &vecs * DMatrix::from_diagonal(&vals.map(|x| C64::new(x, 0.0))) * vecs.adjoint();
        assert!(max_abs_diff(&recon, &m) < 1e-12);
        // unitarity of the eigenvector matrix
        let gram = vecs.adjoint() * &vecs;
        assert!(max_abs_diff(&gram, &DMatrix::identity(3, 3)) < 1e-12);
    }

    #[test]
    fn expm_identity_and_diagonal() {
        let z = DMatrix::<C64>::zeros(4, 4);
        assert!(max_abs_diff(&expm(&z).unwrap(), &DMatrix::identity(4, 4)) < 1e-15);

        let d = DMatrix::from_diagonal(&DVector::from_vec(alloc::vec![
            C64::new(0.3, -0.7),
            C64::new(-1.2, 2.0),
        ]));
        let e = expm(&d).unwrap();
        assert!((e[(0, 0)] - C64::new(0.3, -0.7).exp()).norm() < 1e-14);
        assert!((e[(1, 1)] - C64::new(-1.2, 2.0).exp()).norm() < 1e-14);
        assert!(e[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn expm_pauli_rotation() {
        // exp(−iθ σ_x) = cos θ · I − i sin θ · σ_x
        let theta = 1.234_f64;
        let a = DMatrix::from_row_slice(
            2,
            2,
            &[C64::zero(), C64::new(0.0, -theta), C64::new(0.0, -theta), C64::zero()],
        );
        let e = expm(&a).unwrap();
        assert_abs_diff_eq!(e[(0, 0)].re, theta.cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(e[(0, 1)].im, -theta.sin(), epsilon = 1e-14);
    }

    #[test]
    fn expm_inverse_property() {
        // exp(A) exp(−A) = I for a stiff-ish generator (exercises scaling)
        let mut a = DMatrix::<C64>::zeros(5, 5);
        for i in 0..5 {
            for j in 0..5 {
                let t = (i * 5 + j) as f64;
                a[(i, j)] = C64::new((t * 0.713).sin() * 3.0, (t * 0.291).cos() * 2.0);
            }
        }
        let e = expm(&a).unwrap();
        let ei = expm(&(-&a)).unwrap();
        assert!(max_abs_diff(&(e * ei), &DMatrix::identity(5, 5)) < 1e-9);
    }

    #[test]
    fn vectorization_round_trip() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.0, 2.0), C64::new(3.0, 4.0), C64::new(5.0, 6.0), C64::new(7.0, 8.0)],
        );
        let v = vec_density(&m);
        // column stacking: first entries are the first column
        assert_eq!(v[0], C64::new(1.0, 2.0));
        assert_eq!(v[1], C64::new(5.0, 6.0));
        assert_eq!(unvec_density(&v, 2), m);
    }
}
