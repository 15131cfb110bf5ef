//! Fixed-step RK4 integration of the collision master equation.
//!
//! Output times are hit exactly by shortening the last sub-step before each
//! one. States are never symmetrized or clipped during integration; a step
//! that breaks Hermiticity or trace by more than 1e-9 is reported as an
//! error.

use crate::channels::{kraus_channel, map_generator, CollisionSpec, KrausChannel};
use crate::error::{Error, Result};
use crate::qmat::{self, c, ComplexMatrix, DensityMatrix};
use crate::series::{check_time_grid, StateSeries};

pub const DEFAULT_STEP: f64 = 1e-3;

/// Tolerance for the post-step Hermiticity and trace checks.
const STEP_TOL: f64 = 1e-9;

/// Which right-hand side drives the integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhsForm {
    /// `gamma (Λ[rho] - rho)` with Λ applied through the dilation.
    Map,
    /// Lindblad form built from the Kraus operators of Λ.
    Kraus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub step: f64,
    pub rhs_form: RhsForm,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            step: DEFAULT_STEP,
            rhs_form: RhsForm::Map,
        }
    }
}

impl IntegratorConfig {
    pub fn new(step: f64, rhs_form: RhsForm) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::param(
                "step",
                format!("integrator step must be positive, got {step}"),
            ));
        }
        Ok(IntegratorConfig { step, rhs_form })
    }
}

/// A ready-to-evaluate generator; the Kraus channel is built once.
enum Generator<'a> {
    Map(&'a CollisionSpec),
    Kraus(KrausChannel, f64),
}

impl<'a> Generator<'a> {
    fn new(spec: &'a CollisionSpec, form: RhsForm) -> Result<Self> {
        Ok(match form {
            RhsForm::Map => Generator::Map(spec),
            RhsForm::Kraus => Generator::Kraus(kraus_channel(spec)?, spec.gamma()),
        })
    }

    fn eval(&self, m: &ComplexMatrix) -> ComplexMatrix {
        match self {
            Generator::Map(spec) => map_generator(spec, m),
            Generator::Kraus(channel, gamma) => channel.dissipator(m) * c(*gamma, 0.0),
        }
    }

    fn rk4(&self, rho: &ComplexMatrix, h: f64) -> ComplexMatrix {
        let half = c(0.5 * h, 0.0);
        let k1 = self.eval(rho);
        let k2 = self.eval(&(rho + &k1 * half));
        let k3 = self.eval(&(rho + &k2 * half));
        let k4 = self.eval(&(rho + &k3 * c(h, 0.0)));
        rho + (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * c(h / 6.0, 0.0)
    }
}

fn check_step_output(m: &ComplexMatrix) -> Result<()> {
    if !qmat::is_finite(m) {
        return Err(Error::NonFinite);
    }
    let herr = qmat::hermiticity_error(m);
    if herr > STEP_TOL {
        return Err(Error::NotHermitian(herr));
    }
    let tr = qmat::trace(m);
    if (tr - qmat::ONE).norm() > STEP_TOL {
        return Err(Error::NotUnitTrace(tr.re));
    }
    Ok(())
}

fn check_h(h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::param("h", format!("step must be positive, got {h}")));
    }
    Ok(())
}

/// One classical RK4 step of length `h`.
pub fn rk4_step(
    spec: &CollisionSpec,
    rho: &DensityMatrix,
    h: f64,
    rhs_form: RhsForm,
) -> Result<DensityMatrix> {
    spec.check_system(rho)?;
    check_h(h)?;
    let generator = Generator::new(spec, rhs_form)?;
    let out = generator.rk4(rho.mat(), h);
    check_step_output(&out)?;
    DensityMatrix::new(out)
}

/// Integrates from `t = 0` and records the state at each output time.
pub fn integrate_me(
    spec: &CollisionSpec,
    rho0: &DensityMatrix,
    output_times: &[f64],
    config: &IntegratorConfig,
) -> Result<StateSeries> {
    spec.check_system(rho0)?;
    check_time_grid(output_times)?;
    let config = IntegratorConfig::new(config.step, config.rhs_form)?;
    let generator = Generator::new(spec, config.rhs_form)?;

    let mut state = rho0.mat().clone();
    let mut t = 0.0;
    let mut states = Vec::with_capacity(output_times.len());
    for &target in output_times {
        // number of sub-steps so that the last one lands on `target`
        let span = target - t;
        if span > 0.0 {
            let n_full = (span / config.step).floor() as usize;
            for _ in 0..n_full {
                state = generator.rk4(&state, config.step);
                check_step_output(&state)?;
            }
            let rest = target - (t + n_full as f64 * config.step);
            if rest > 1e-14 * target.max(1.0) {
                state = generator.rk4(&state, rest);
                check_step_output(&state)?;
            }
            t = target;
        }
        states.push(DensityMatrix::new(state.clone())?);
    }
    StateSeries::new(output_times.to_vec(), states)
}
