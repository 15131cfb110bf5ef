//! Collision maps, their Choi/Kraus representations, and master-equation
//! generators.
//!
//! A collision map is held implicitly as the pair `(U, eta)` and applied as
//! `Tr_anc{U (rho ⊗ eta) U^dag}`. Kraus operators are only extracted when the
//! Lindblad-form generator is needed.
//!
//! Choi convention: `C = sum_ij |i><j| ⊗ Λ[|i><j|]`, unnormalized, so
//! `Tr C = d_s`. A Kraus operator `K` contributes the vector
//! `v[i * d + a] = K[a, i]` to the Choi eigenbasis.

use crate::error::{Error, Result};
use crate::qmat::{
    self, c, hermitian_eig, identity, kron, max_abs_diff, partial_trace_ancilla, ComplexMatrix,
    DensityMatrix, UnitaryOp, ONE,
};

/// Default relative cutoff below which Choi eigenvalues are treated as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// One collision model: system and ancilla dimensions, the collision
/// unitary, the ancilla state and the collision rate.
#[derive(Debug, Clone)]
pub struct CollisionSpec {
    d_s: usize,
    d_a: usize,
    u: UnitaryOp,
    eta: DensityMatrix,
    gamma: f64,
}

impl CollisionSpec {
    pub fn new(
        d_s: usize,
        d_a: usize,
        u: UnitaryOp,
        eta: DensityMatrix,
        gamma: f64,
    ) -> Result<Self> {
        if d_s == 0 || d_a == 0 {
            return Err(Error::Dimension(
                "system and ancilla dimensions must be positive".into(),
            ));
        }
        if u.dim() != d_s * d_a {
            return Err(Error::Dimension(format!(
                "collision unitary has dimension {}, expected {} x {}",
                u.dim(),
                d_s,
                d_a
            )));
        }
        if eta.dim() != d_a {
            return Err(Error::Dimension(format!(
                "ancilla state has dimension {}, expected {d_a}",
                eta.dim()
            )));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::param(
                "gamma",
                format!("collision rate must be positive, got {gamma}"),
            ));
        }
        Ok(CollisionSpec {
            d_s,
            d_a,
            u,
            eta,
            gamma,
        })
    }

    pub fn d_s(&self) -> usize {
        self.d_s
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn unitary(&self) -> &UnitaryOp {
        &self.u
    }

    pub fn eta(&self) -> &DensityMatrix {
        &self.eta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Same collision with a different rate.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        CollisionSpec::new(self.d_s, self.d_a, self.u.clone(), self.eta.clone(), gamma)
    }

    pub(crate) fn check_system(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.dim() != self.d_s {
            return Err(Error::Dimension(format!(
                "state has dimension {}, collision model expects {}",
                rho.dim(),
                self.d_s
            )));
        }
        Ok(())
    }

    /// Applies the collision map to an arbitrary `d_s x d_s` matrix. The map
    /// is linear, so this is also valid on non-states such as matrix units.
    pub(crate) fn apply_linear(&self, m: &ComplexMatrix) -> ComplexMatrix {
        dilate_and_trace(self.u.mat(), self.eta.mat(), m, self.d_s, self.d_a)
    }
}

/// `Tr_anc{U (m ⊗ eta) U^dag}` for any square `m` on the system.
pub(crate) fn dilate_and_trace(
    u: &ComplexMatrix,
    eta: &ComplexMatrix,
    m: &ComplexMatrix,
    d_s: usize,
    d_a: usize,
) -> ComplexMatrix {
    let joint = u * kron(m, eta) * u.adjoint();
    partial_trace_ancilla(&joint, d_s, d_a).expect("dimensions checked on construction")
}

/// `Λ[rho] = Tr_anc{U (rho ⊗ eta) U^dag}`.
pub fn collision_map_apply(spec: &CollisionSpec, rho: &DensityMatrix) -> Result<DensityMatrix> {
    spec.check_system(rho)?;
    DensityMatrix::new(spec.apply_linear(rho.mat()))
}

/// `(1 - delta_p) rho + delta_p Λ[rho]`.
pub fn averaged_step_map(
    spec: &CollisionSpec,
    rho: &DensityMatrix,
    delta_p: f64,
) -> Result<DensityMatrix> {
    check_probability(delta_p)?;
    spec.check_system(rho)?;
    let out = rho.mat() * c(1.0 - delta_p, 0.0) + spec.apply_linear(rho.mat()) * c(delta_p, 0.0);
    DensityMatrix::new(out)
}

pub(crate) fn check_probability(delta_p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&delta_p) {
        return Err(Error::param(
            "delta_p",
            format!("collision probability {delta_p} outside [0, 1]"),
        ));
    }
    Ok(())
}

/// Matrix unit `|i><j|` of dimension `d`.
fn matrix_unit(d: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    m[(i, j)] = ONE;
    m
}

/// Unnormalized Choi matrix of the collision map, size `d_s^2 x d_s^2`.
pub fn choi_matrix(spec: &CollisionSpec) -> ComplexMatrix {
    let d = spec.d_s;
    let mut choi = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let block = spec.apply_linear(&matrix_unit(d, i, j));
            choi.view_mut((i * d, j * d), (d, d)).copy_from(&block);
        }
    }
    choi
}

/// Channel in Kraus form, `Λ[rho] = sum K rho K^dag`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    d: usize,
    kraus: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Validates shapes and completeness `sum K^dag K = I` within 1e-10.
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let d = kraus.first().map(|k| k.nrows()).ok_or_else(|| {
            Error::Dimension("a channel needs at least one Kraus operator".into())
        })?;
        if kraus.iter().any(|k| k.nrows() != d || k.ncols() != d) {
            return Err(Error::Dimension("Kraus operators must all be d x d".into()));
        }
        let channel = KrausChannel { d, kraus };
        let err = channel.completeness_error();
        if err > qmat::STATE_TOL {
            return Err(Error::param(
                "kraus",
                format!("completeness violated by {err:.3e}"),
            ));
        }
        Ok(channel)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn len(&self) -> usize {
        self.kraus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kraus.is_empty()
    }

    /// `max |sum K^dag K - I|`.
    pub fn completeness_error(&self) -> f64 {
        let sum = self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.d, self.d), |acc, k| {
                acc + k.adjoint() * k
            });
        max_abs_diff(&sum, &identity(self.d))
    }

    /// `sum K m K^dag` on any square matrix.
    pub fn apply_linear(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.d, self.d), |acc, k| {
                acc + k * m * k.adjoint()
            })
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_dim(rho.dim())?;
        DensityMatrix::new(self.apply_linear(rho.mat()))
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.d {
            return Err(Error::Dimension(format!(
                "state has dimension {d}, channel acts on dimension {}",
                self.d
            )));
        }
        Ok(())
    }

    /// `sum (K m K^dag - 1/2 {K^dag K, m})` without the rate prefactor.
    pub(crate) fn dissipator(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.d, self.d);
        for k in &self.kraus {
            let kdk = k.adjoint() * k;
            out += k * m * k.adjoint() - (&kdk * m + m * &kdk) * c(0.5, 0.0);
        }
        out
    }
}

/// Kraus operators from the eigendecomposition of a Choi matrix.
///
/// Eigenvalues above `rank_tol * lambda_max` each give one operator
/// `sqrt(lambda) * unvec(v)`. Eigenvalues below `-rank_tol * lambda_max`
/// mean the map is not completely positive.
pub fn kraus_from_choi(choi: &ComplexMatrix, rank_tol: f64) -> Result<KrausChannel> {
    let n = choi.nrows();
    let d = (n as f64).sqrt().round() as usize;
    if d == 0 || d * d != n || choi.ncols() != n {
        return Err(Error::Dimension(format!(
            "Choi matrix must be d^2 x d^2, got {}x{}",
            choi.nrows(),
            choi.ncols()
        )));
    }
    let (values, vectors) = hermitian_eig(choi)?;
    let scale = values.first().copied().unwrap_or(0.0).max(0.0);
    let cutoff = rank_tol * scale;
    if let Some(&lowest) = values.last() {
        if lowest < -cutoff {
            return Err(Error::NotCompletelyPositive(lowest));
        }
    }

    let kraus = values
        .iter()
        .enumerate()
        .filter(|(_, &lambda)| lambda > cutoff)
        .map(|(col, &lambda)| {
            let amp = lambda.sqrt();
            ComplexMatrix::from_fn(d, d, |a, i| vectors[(i * d + a, col)] * amp)
        })
        .collect();
    KrausChannel::new(kraus)
}

/// Kraus form of a collision model's map with the default rank cutoff.
pub fn kraus_channel(spec: &CollisionSpec) -> Result<KrausChannel> {
    kraus_from_choi(&choi_matrix(spec), DEFAULT_RANK_TOL)
}

/// `gamma * sum (K rho K^dag - 1/2 {K^dag K, rho})`.
pub fn lindblad_rhs_kraus(
    channel: &KrausChannel,
    gamma: f64,
    rho: &DensityMatrix,
) -> Result<ComplexMatrix> {
    channel.check_dim(rho.dim())?;
    Ok(channel.dissipator(rho.mat()) * c(gamma, 0.0))
}

/// `gamma * (Λ[rho] - rho)`.
pub fn lindblad_rhs_map(spec: &CollisionSpec, rho: &DensityMatrix) -> Result<ComplexMatrix> {
    spec.check_system(rho)?;
    Ok(map_generator(spec, rho.mat()))
}

pub(crate) fn map_generator(spec: &CollisionSpec, m: &ComplexMatrix) -> ComplexMatrix {
    (spec.apply_linear(m) - m) * c(spec.gamma, 0.0)
}
