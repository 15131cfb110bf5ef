//! Dense complex matrices and validated quantum-state wrappers.
//!
//! Tensor products are ordered system first, ancilla second: in
//! `kron(system, ancilla)` the system index varies slowest, so the joint
//! basis element `|i>|k>` sits at row `i * d_a + k`. Every module in this
//! crate relies on that ordering.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Tolerance used for Hermiticity, trace and positivity checks.
pub const STATE_TOL: f64 = 1e-10;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

/// Builds a matrix from real entries in row-major order.
pub fn from_real_rows(rows: usize, cols: usize, entries: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_row_iterator(rows, cols, entries.iter().map(|&x| c(x, 0.0)))
}

pub fn diag_real(values: &[f64]) -> ComplexMatrix {
    let n = values.len();
    let mut m = ComplexMatrix::zeros(n, n);
    for (i, &v) in values.iter().enumerate() {
        m[(i, i)] = c(v, 0.0);
    }
    m
}

pub fn sigma_x() -> ComplexMatrix {
    from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn sigma_z() -> ComplexMatrix {
    from_real_rows(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

/// Largest absolute entry, 0 for an empty matrix.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermiticity_error(m: &ComplexMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn require_square(m: &ComplexMatrix, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "{what} must be a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

/// Kronecker product; block `(i, j)` of the result is `a[i, j] * b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Traces out the second (ancilla) factor of a `d_s * d_a` square matrix.
pub fn partial_trace_ancilla(m: &ComplexMatrix, d_s: usize, d_a: usize) -> Result<ComplexMatrix> {
    let n = d_s * d_a;
    if d_s == 0 || d_a == 0 || m.nrows() != n || m.ncols() != n {
        return Err(Error::Dimension(format!(
            "partial trace of {}x{} matrix over factors {d_s} x {d_a}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(ComplexMatrix::from_fn(d_s, d_s, |i, j| {
        (0..d_a).map(|k| m[(i * d_a + k, j * d_a + k)]).sum()
    }))
}

/// Spectral decomposition of a Hermitian matrix.
///
/// The input is symmetrized as `(M + M^dag) / 2` first. Eigenvalues come
/// back in descending order; column `k` of the returned matrix is the
/// eigenvector of eigenvalue `k`.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = require_square(m, "eigendecomposition input")?;
    if !is_finite(m) {
        return Err(Error::NonFinite);
    }
    let herr = hermiticity_error(m);
    if herr > STATE_TOL {
        return Err(Error::NotHermitian(herr));
    }
    let sym = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = sym.symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// Eigenvalues only, descending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    hermitian_eig(m).map(|(v, _)| v)
}

/// `cos(theta) I + i sin(theta) SWAP` on two `d`-dimensional factors.
pub fn partial_swap_unitary(theta: f64, d: usize) -> Result<UnitaryOp> {
    if d < 2 {
        return Err(Error::param(
            "d",
            format!("partial swap needs d >= 2, got {d}"),
        ));
    }
    let m = identity(d * d) * c(theta.cos(), 0.0) + swap_matrix(d) * c(0.0, theta.sin());
    UnitaryOp::new(m)
}

/// Permutation matrix exchanging two `d`-dimensional factors.
pub fn swap_matrix(d: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for k in 0..d {
            m[(k * d + i, i * d + k)] = ONE;
        }
    }
    m
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates `mat` as a quantum state. Small negative eigenvalues within
    /// [`STATE_TOL`] are accepted as-is; nothing is clipped.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        require_square(&mat, "density matrix")?;
        if !is_finite(&mat) {
            return Err(Error::NonFinite);
        }
        let herr = hermiticity_error(&mat);
        if herr > STATE_TOL {
            return Err(Error::NotHermitian(herr));
        }
        let tr = trace(&mat);
        if (tr - ONE).norm() > STATE_TOL {
            return Err(Error::NotUnitTrace(tr.re));
        }
        let min_eig = hermitian_eigenvalues(&mat)?.last().copied().unwrap_or(0.0);
        if min_eig < -STATE_TOL {
            return Err(Error::NotPositive(min_eig));
        }
        Ok(DensityMatrix { mat })
    }

    /// Wraps the output of a trace-preserving completely positive map applied
    /// to a validated state. Only the cheap Hermiticity and trace checks
    /// run in debug builds.
    pub(crate) fn from_cptp_output(mat: ComplexMatrix) -> Self {
        debug_assert!(hermiticity_error(&mat) <= 1e-8);
        debug_assert!((trace(&mat) - ONE).norm() <= 1e-8);
        DensityMatrix { mat }
    }

    /// `|i><i|` in dimension `d`.
    pub fn basis(d: usize, i: usize) -> Result<Self> {
        if i >= d {
            return Err(Error::param(
                "index",
                format!("basis index {i} out of range for dimension {d}"),
            ));
        }
        let mut m = ComplexMatrix::zeros(d, d);
        m[(i, i)] = ONE;
        Ok(DensityMatrix { mat: m })
    }

    pub fn maximally_mixed(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Dimension("zero-dimensional state".into()));
        }
        Ok(DensityMatrix {
            mat: identity(d) * c(1.0 / d as f64, 0.0),
        })
    }

    /// `|psi><psi|` for a normalized state vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        Self::new(&v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.mat
    }

    /// Expectation value `Tr(rho O)`.
    pub fn expect(&self, op: &ComplexMatrix) -> Complex64 {
        trace(&(&self.mat * op))
    }

    /// Population `<i|rho|i>`.
    pub fn population(&self, i: usize) -> f64 {
        self.mat[(i, i)].re
    }
}

/// Square matrix with `U^dag U = I` within [`STATE_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOp {
    mat: ComplexMatrix,
}

impl UnitaryOp {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let n = require_square(&mat, "unitary")?;
        if !is_finite(&mat) {
            return Err(Error::NonFinite);
        }
        let err = unitarity_error(&mat);
        if err > STATE_TOL {
            return Err(Error::NotUnitary(err));
        }
        debug_assert_eq!(mat.nrows(), n);
        Ok(UnitaryOp { mat })
    }

    pub fn identity(d: usize) -> Self {
        UnitaryOp { mat: identity(d) }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.mat
    }
}

pub fn unitarity_error(m: &ComplexMatrix) -> f64 {
    max_abs_diff(&(m.adjoint() * m), &identity(m.ncols()))
}

/// `1/2 * sum |lambda_i|` over the eigenvalues of `a - b`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "trace distance between dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let diff = a.mat() - b.mat();
    let eig = hermitian_eigenvalues(&diff)?;
    Ok(0.5 * eig.iter().map(|x| x.abs()).sum::<f64>())
}

/// Random matrices and states for tests and benchmarks.
pub mod random {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    pub fn gaussian_matrix<R: Rng + ?Sized>(
        rng: &mut R,
        rows: usize,
        cols: usize,
    ) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            c(rng.sample(StandardNormal), rng.sample(StandardNormal))
        })
    }

    /// Haar-distributed unitary: QR of a complex Gaussian matrix with the
    /// phases of `R`'s diagonal moved into `Q`.
    pub fn unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> UnitaryOp {
        let qr = gaussian_matrix(rng, d, d).qr();
        let (mut q, r) = qr.unpack();
        for j in 0..d {
            let rjj = r[(j, j)];
            let phase = if rjj.norm() > 0.0 {
                rjj / rjj.norm()
            } else {
                ONE
            };
            for i in 0..d {
                q[(i, j)] *= phase;
            }
        }
        UnitaryOp::new(q).expect("QR factor is unitary")
    }

    /// Full-rank random state `G G^dag / Tr(G G^dag)`.
    pub fn density<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityMatrix {
        let g = gaussian_matrix(rng, d, d);
        let m = &g * g.adjoint();
        let tr = trace(&m);
        let m = m / tr;
        DensityMatrix::new((&m + m.adjoint()) * c(0.5, 0.0)).expect("Wishart state is valid")
    }

    pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
        let g = gaussian_matrix(rng, d, d);
        (&g + g.adjoint()) * c(0.5, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn kron_identities() {
        assert_eq!(kron(&identity(2), &identity(2)), identity(4));
        let p = diag_real(&[1.0, 0.0]);
        assert_eq!(kron(&p, &p), diag_real(&[1.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn kron_block_structure() {
        let k = kron(&sigma_x(), &sigma_z());
        #[rustfmt::skip]
        let expected = from_real_rows(4, 4, &[
            0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, -1.0,
            1.0, 0.0, 0.0, 0.0,
            0.0, -1.0, 0.0, 0.0,
        ]);
        assert_eq!(k, expected);
    }

    #[test]
    fn kron_is_associative() {
        let mut r = rng();
        let a = random::gaussian_matrix(&mut r, 2, 3);
        let b = random::gaussian_matrix(&mut r, 3, 2);
        let cc = random::gaussian_matrix(&mut r, 2, 2);
        let left = kron(&kron(&a, &b), &cc);
        let right = kron(&a, &kron(&b, &cc));
        assert!(max_abs_diff(&left, &right) <= 1e-12);
    }

    #[test]
    fn partial_trace_of_product_and_bell_state() {
        let mut r = rng();
        for _ in 0..200 {
            let ds = 1 + (rand::Rng::random::<u32>(&mut r) % 4) as usize;
            let da = 1 + (rand::Rng::random::<u32>(&mut r) % 4) as usize;
            let rho = random::density(&mut r, ds);
            let eta = random::density(&mut r, da);
            let red = partial_trace_ancilla(&kron(rho.mat(), eta.mat()), ds, da).unwrap();
            assert!(max_abs_diff(&red, rho.mat()) <= 1e-12);
        }
        let s = 0.5f64.sqrt();
        let bell = DensityMatrix::pure(&[c(s, 0.0), ZERO, ZERO, c(s, 0.0)]).unwrap();
        let red = partial_trace_ancilla(bell.mat(), 2, 2).unwrap();
        assert!(max_abs_diff(&red, &(identity(2) * c(0.5, 0.0))) <= 1e-15);
    }

    #[test]
    fn partial_trace_matches_index_loop() {
        let mut r = rng();
        let m = random::hermitian(&mut r, 6);
        let red = partial_trace_ancilla(&m, 3, 2).unwrap();
        // oracle: explicit loop over the ancilla index via basis projections
        let mut oracle = ComplexMatrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                let mut s = ZERO;
                for k in 0..2 {
                    let mut bra = ComplexMatrix::zeros(1, 6);
                    bra[(0, i * 2 + k)] = ONE;
                    let mut ket = ComplexMatrix::zeros(6, 1);
                    ket[(j * 2 + k, 0)] = ONE;
                    s += (&bra * &m * &ket)[(0, 0)];
                }
                oracle[(i, j)] = s;
            }
        }
        assert!(max_abs_diff(&red, &oracle) <= 1e-12);
        assert!((trace(&red) - trace(&m)).norm() <= 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        assert!(partial_trace_ancilla(&identity(5), 2, 2).is_err());
    }

    #[test]
    fn eig_diagonal_and_pauli() {
        let (vals, _) = hermitian_eig(&diag_real(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(vals, vec![3.0, 2.0, 1.0]);

        let (vals, vecs) = hermitian_eig(&sigma_x()).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] + 1.0).abs() < 1e-14);
        // |+> up to phase
        let s = 0.5f64.sqrt();
        let overlap = (vecs[(0, 0)].conj() * s + vecs[(1, 0)].conj() * s).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut r = rng();
        for d in [2, 3, 5, 8] {
            let m = random::hermitian(&mut r, d);
            let (vals, v) = hermitian_eig(&m).unwrap();
            let lam = diag_real(&vals);
            let rec = &v * lam * v.adjoint();
            assert!(max_abs_diff(&rec, &m) <= 1e-10, "d={d}");
            assert!(unitarity_error(&v) <= 1e-10);
            assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = from_real_rows(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn trace_distance_cases() {
        let z0 = DensityMatrix::basis(2, 0).unwrap();
        let z1 = DensityMatrix::basis(2, 1).unwrap();
        let mix = DensityMatrix::maximally_mixed(2).unwrap();
        assert_eq!(trace_distance(&z0, &z0).unwrap(), 0.0);
        assert!((trace_distance(&z0, &z1).unwrap() - 1.0).abs() < 1e-14);
        assert!((trace_distance(&z0, &mix).unwrap() - 0.5).abs() < 1e-14);
        assert!(trace_distance(&z0, &DensityMatrix::basis(3, 0).unwrap()).is_err());
    }

    #[test]
    fn trace_distance_triangle_inequality() {
        let mut r = rng();
        for _ in 0..100 {
            let a = random::density(&mut r, 3);
            let b = random::density(&mut r, 3);
            let cc = random::density(&mut r, 3);
            let ab = trace_distance(&a, &b).unwrap();
            let bc = trace_distance(&b, &cc).unwrap();
            let ac = trace_distance(&a, &cc).unwrap();
            assert!(ac <= ab + bc + 1e-10);
            assert!((ab - trace_distance(&b, &a).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_swap_family() {
        assert_eq!(partial_swap_unitary(0.0, 2).unwrap().mat(), &identity(4));
        let u = partial_swap_unitary(std::f64::consts::FRAC_PI_2, 2).unwrap();
        assert!(max_abs_diff(u.mat(), &(swap_matrix(2) * I)) <= 1e-15);
        for theta in [
            0.0,
            0.3,
            std::f64::consts::FRAC_PI_4,
            std::f64::consts::FRAC_PI_2,
            std::f64::consts::PI,
        ] {
            for d in [2, 3] {
                let u = partial_swap_unitary(theta, d).unwrap();
                assert!(unitarity_error(u.mat()) <= 1e-12);
            }
        }
        assert!(partial_swap_unitary(0.1, 1).is_err());
    }

    #[test]
    fn density_validation() {
        assert!(matches!(
            DensityMatrix::new(diag_real(&[0.6, 0.6])),
            Err(Error::NotUnitTrace(_))
        ));
        assert!(matches!(
            DensityMatrix::new(diag_real(&[1.5, -0.5])),
            Err(Error::NotPositive(_))
        ));
        assert!(matches!(
            DensityMatrix::new(from_real_rows(2, 2, &[0.5, 0.1, 0.0, 0.5])),
            Err(Error::NotHermitian(_))
        ));
        // tiny negative eigenvalue inside tolerance is kept, not clipped
        let rho = DensityMatrix::new(diag_real(&[1.0 + 1e-11, -1e-11])).unwrap();
        assert_eq!(rho.mat()[(1, 1)].re, -1e-11);
    }

    #[test]
    fn unitary_validation() {
        assert!(UnitaryOp::new(diag_real(&[1.0, 2.0])).is_err());
        assert!(UnitaryOp::new(sigma_y()).is_ok());
    }
}
