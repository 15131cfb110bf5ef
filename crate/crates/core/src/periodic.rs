//! Periodic collision model equivalent to the stochastic one.
//!
//! Each ancilla gains an inert level `|φ>` at basis index 0; the original
//! ancilla basis moves to indices `1..=d_a`. The extended unitary acts as the
//! identity when the ancilla is in `|φ>` and as the original collision
//! unitary on the remaining block. Preparing every ancilla in
//! `(1 - Δp) |φ><φ| + Δp η` turns the random collision times into ancilla
//! mixedness on a fixed time mesh.

use rayon::prelude::*;

use crate::channels::{check_probability, dilate_and_trace, CollisionSpec};
use crate::error::{Error, Result};
use crate::qmat::{c, ComplexMatrix, DensityMatrix, UnitaryOp, ONE};
use crate::series::StateSeries;

/// Basis index of the inert ancilla level.
pub const PHI_INDEX: usize = 0;

/// Largest number of bath branches [`uniform_fixed_m_bath`] will enumerate.
pub const MAX_BRANCHES: u64 = 1_000_000;

/// Branches per sequential block in [`run_correlated_bath`].
const BRANCH_BLOCK: usize = 64;

/// Ancilla state moved into indices `1..=d_a` of a `d_a + 1` space.
pub fn embed_ancilla_state(eta: &DensityMatrix) -> ComplexMatrix {
    let d = eta.dim();
    let mut out = ComplexMatrix::zeros(d + 1, d + 1);
    out.view_mut((1, 1), (d, d)).copy_from(eta.mat());
    out
}

/// `I_S ⊗ |φ><φ| + U` with `U` acting on system ⊗ span{|m>}.
pub fn extend_unitary(u: &UnitaryOp, d_s: usize, d_a: usize) -> Result<UnitaryOp> {
    if d_s == 0 || d_a == 0 || u.dim() != d_s * d_a {
        return Err(Error::Dimension(format!(
            "unitary of dimension {} does not act on {d_s} x {d_a}",
            u.dim()
        )));
    }
    let de = d_a + 1;
    let mut ext = ComplexMatrix::zeros(d_s * de, d_s * de);
    for i in 0..d_s {
        ext[(i * de + PHI_INDEX, i * de + PHI_INDEX)] = ONE;
        for j in 0..d_s {
            for m in 0..d_a {
                for n in 0..d_a {
                    ext[(i * de + m + 1, j * de + n + 1)] = u.mat()[(i * d_a + m, j * d_a + n)];
                }
            }
        }
    }
    UnitaryOp::new(ext)
}

/// `(1 - Δp) |φ><φ| + Δp η` on the extended ancilla.
pub fn extended_ancilla_state(eta: &DensityMatrix, delta_p: f64) -> Result<DensityMatrix> {
    check_probability(delta_p)?;
    let mut m = embed_ancilla_state(eta) * c(delta_p, 0.0);
    m[(PHI_INDEX, PHI_INDEX)] = c(1.0 - delta_p, 0.0);
    let out = DensityMatrix::new(m)?;
    debug_assert_eq!(out.mat()[(PHI_INDEX, PHI_INDEX)].re, 1.0 - delta_p);
    Ok(out)
}

fn check_step_dims(d_s: usize, u_ext: &UnitaryOp, d_ext: usize) -> Result<()> {
    if u_ext.dim() != d_s * d_ext {
        return Err(Error::Dimension(format!(
            "extended unitary has dimension {}, expected {d_s} x {d_ext}",
            u_ext.dim()
        )));
    }
    Ok(())
}

/// `Tr_anc{Ũ (rho ⊗ η̃) Ũ^dag}`.
pub fn periodic_step(
    rho: &DensityMatrix,
    u_ext: &UnitaryOp,
    eta_ext: &DensityMatrix,
) -> Result<DensityMatrix> {
    check_step_dims(rho.dim(), u_ext, eta_ext.dim())?;
    DensityMatrix::new(dilate_and_trace(
        u_ext.mat(),
        eta_ext.mat(),
        rho.mat(),
        rho.dim(),
        eta_ext.dim(),
    ))
}

/// `n_steps` periodic collisions with fresh ancillas, `Δp = γ Δt`. The
/// series holds `n_steps + 1` states, starting at `t = 0`.
pub fn run_periodic(
    spec: &CollisionSpec,
    rho0: &DensityMatrix,
    delta_t: f64,
    n_steps: usize,
) -> Result<StateSeries> {
    spec.check_system(rho0)?;
    if !(delta_t > 0.0 && delta_t.is_finite()) {
        return Err(Error::param(
            "delta_t",
            format!("time step must be positive, got {delta_t}"),
        ));
    }
    let delta_p = spec.gamma() * delta_t;
    if delta_p > 1.0 {
        return Err(Error::param(
            "delta_t",
            format!("gamma * delta_t = {delta_p} exceeds 1"),
        ));
    }
    let u_ext = extend_unitary(spec.unitary(), spec.d_s(), spec.d_a())?;
    let eta_ext = extended_ancilla_state(spec.eta(), delta_p)?;

    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut rho = rho0.clone();
    times.push(0.0);
    states.push(rho.clone());
    for n in 1..=n_steps {
        rho = periodic_step(&rho, &u_ext, &eta_ext)?;
        times.push(n as f64 * delta_t);
        states.push(rho.clone());
    }
    StateSeries::new(times, states)
}

/// One term of a classically correlated bath: with probability `weight`,
/// the ancillas in `collision_slots` start in η and all others in `|φ>`.
#[derive(Debug, Clone, PartialEq)]
pub struct BathBranch {
    pub weight: f64,
    pub collision_slots: Vec<usize>,
}

/// Classical mixture of product bath states over `n_slots` ancillas.
#[derive(Debug, Clone)]
pub struct CorrelatedBathSpec {
    n_slots: usize,
    branches: Vec<BathBranch>,
    eta: DensityMatrix,
}

impl CorrelatedBathSpec {
    pub fn new(n_slots: usize, mut branches: Vec<BathBranch>, eta: DensityMatrix) -> Result<Self> {
        if n_slots == 0 {
            return Err(Error::param("n_slots", "bath needs at least one slot"));
        }
        if branches.is_empty() {
            return Err(Error::param("branches", "bath needs at least one branch"));
        }
        for b in &mut branches {
            if !(0.0..=1.0).contains(&b.weight) {
                return Err(Error::param(
                    "weight",
                    format!("branch weight {} outside [0, 1]", b.weight),
                ));
            }
            b.collision_slots.sort_unstable();
            b.collision_slots.dedup();
            if b.collision_slots.last().is_some_and(|&s| s >= n_slots) {
                return Err(Error::param(
                    "collision_slots",
                    format!("slot index out of range 0..{n_slots}"),
                ));
            }
        }
        let total = compensated_sum(branches.iter().map(|b| b.weight));
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::param(
                "weights",
                format!("branch weights sum to {total}, expected 1"),
            ));
        }
        Ok(CorrelatedBathSpec {
            n_slots,
            branches,
            eta,
        })
    }

    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    pub fn branches(&self) -> &[BathBranch] {
        &self.branches
    }

    pub fn eta(&self) -> &DensityMatrix {
        &self.eta
    }
}

fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + comp
}

fn binomial(n: usize, k: usize) -> Option<u64> {
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u64)? / (i as u64 + 1);
    }
    Some(acc)
}

/// Every `m`-subset of `n_slots` slots with equal weight.
pub fn uniform_fixed_m_bath(
    n_slots: usize,
    m: usize,
    eta: DensityMatrix,
) -> Result<CorrelatedBathSpec> {
    if m > n_slots {
        return Err(Error::param(
            "m",
            format!("{m} collisions do not fit in {n_slots} slots"),
        ));
    }
    let count = binomial(n_slots, m)
        .filter(|&c| c <= MAX_BRANCHES)
        .ok_or_else(|| {
            Error::param(
                "m",
                format!("C({n_slots}, {m}) exceeds the {MAX_BRANCHES}-branch limit; use fixed-n sampling"),
            )
        })?;
    let weight = 1.0 / count as f64;

    let mut branches = Vec::with_capacity(count as usize);
    let mut subset: Vec<usize> = (0..m).collect();
    loop {
        branches.push(BathBranch {
            weight,
            collision_slots: subset.clone(),
        });
        // next combination in lexicographic order
        let Some(pos) = (0..m).rev().find(|&i| subset[i] < n_slots - m + i) else {
            break;
        };
        subset[pos] += 1;
        for i in pos + 1..m {
            subset[i] = subset[i - 1] + 1;
        }
    }
    debug_assert_eq!(branches.len() as u64, count);
    CorrelatedBathSpec::new(n_slots, branches, eta)
}

/// Superoperator of one slot on column-major `vec(rho)`.
fn slot_transfer(u_ext: &ComplexMatrix, ancilla: &ComplexMatrix, d_s: usize) -> ComplexMatrix {
    let d_ext = ancilla.nrows();
    let n = d_s * d_s;
    let mut transfer = ComplexMatrix::zeros(n, n);
    for col in 0..n {
        let mut unit = ComplexMatrix::zeros(d_s, d_s);
        unit[(col % d_s, col / d_s)] = ONE;
        let image = dilate_and_trace(u_ext, ancilla, &unit, d_s, d_ext);
        transfer.column_mut(col).copy_from_slice(image.as_slice());
    }
    transfer
}

/// Weighted average over bath branches, each evolved as its own periodic
/// collision sequence. Slot `k` covers `[kΔt, (k+1)Δt]`; the series has
/// `n_slots + 1` states. The collision spec supplies the unitary, the bath
/// its own η.
pub fn run_correlated_bath(
    spec: &CollisionSpec,
    bath: &CorrelatedBathSpec,
    rho0: &DensityMatrix,
    delta_t: f64,
) -> Result<StateSeries> {
    spec.check_system(rho0)?;
    if bath.eta.dim() != spec.d_a() {
        return Err(Error::Dimension(format!(
            "bath ancilla dimension {} differs from collision model's {}",
            bath.eta.dim(),
            spec.d_a()
        )));
    }
    if !(delta_t > 0.0 && delta_t.is_finite()) {
        return Err(Error::param(
            "delta_t",
            format!("time step must be positive, got {delta_t}"),
        ));
    }
    let d_s = spec.d_s();
    let u_ext = extend_unitary(spec.unitary(), d_s, spec.d_a())?;
    let inert_ancilla = extended_ancilla_state(&bath.eta, 0.0)?;
    let colliding_ancilla = extended_ancilla_state(&bath.eta, 1.0)?;
    let inert = slot_transfer(u_ext.mat(), inert_ancilla.mat(), d_s);
    let colliding = slot_transfer(u_ext.mat(), colliding_ancilla.mat(), d_s);

    let n_slots = bath.n_slots;
    let vec_len = d_s * d_s;
    let rho0_vec = nalgebra::DVector::from_column_slice(rho0.mat().as_slice());

    // Flat buffer of the weighted states after each slot, summed over a block.
    let run_block = |block: &[BathBranch]| -> Vec<num_complex::Complex64> {
        let mut acc = vec![c(0.0, 0.0); n_slots * vec_len];
        let mut v = rho0_vec.clone();
        let mut next = v.clone();
        for branch in block {
            v.copy_from(&rho0_vec);
            let mut slots = branch.collision_slots.iter().peekable();
            let w = c(branch.weight, 0.0);
            for k in 0..n_slots {
                let op = if slots.next_if_eq(&&k).is_some() {
                    &colliding
                } else {
                    &inert
                };
                next.gemv(ONE, op, &v, c(0.0, 0.0));
                std::mem::swap(&mut v, &mut next);
                for (a, x) in acc[k * vec_len..(k + 1) * vec_len].iter_mut().zip(v.iter()) {
                    *a += w * x;
                }
            }
        }
        acc
    };

    let mut total = vec![c(0.0, 0.0); n_slots * vec_len];
    let blocks: Vec<&[BathBranch]> = bath.branches.chunks(BRANCH_BLOCK).collect();
    // partial sums are folded in block order whatever the grouping
    for group_blocks in blocks.chunks(32) {
        let partials: Vec<_> = group_blocks.par_iter().map(|b| run_block(b)).collect();
        for p in &partials {
            for (t, x) in total.iter_mut().zip(p) {
                *t += x;
            }
        }
    }

    let mut times = Vec::with_capacity(n_slots + 1);
    let mut states = Vec::with_capacity(n_slots + 1);
    times.push(0.0);
    states.push(rho0.clone());
    for k in 0..n_slots {
        let m = ComplexMatrix::from_column_slice(d_s, d_s, &total[k * vec_len..(k + 1) * vec_len]);
        times.push((k + 1) as f64 * delta_t);
        states.push(DensityMatrix::new(m)?);
    }
    StateSeries::new(times, states)
}
