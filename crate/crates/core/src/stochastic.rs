//! Monte Carlo simulation of the stochastic collision model.
//!
//! Collisions are instantaneous and separated by exponential waiting times.
//! Between collisions the system state does not change (no free
//! Hamiltonian). A collision at exactly an output time is recorded as having
//! already happened.
//!
//! Random numbers come from ChaCha8 keyed by `seed` with the trajectory
//! index as the stream number, so `(seed, stream_id)` fixes a trajectory on
//! every platform. Ensembles are reduced in ascending trajectory order in
//! fixed-size chunks, which makes results independent of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channels::CollisionSpec;
use crate::error::{Error, Result};
use crate::qmat::{c, ComplexMatrix, DensityMatrix};
use crate::series::{check_time_grid, StateSeries};

/// Trajectories evaluated in parallel before being folded into the sum.
const REDUCTION_CHUNK: usize = 2048;

/// Deterministic random stream for one trajectory.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw from `(0, 1]`.
    pub fn uniform(&mut self) -> f64 {
        1.0 - self.rng.random::<f64>()
    }
}

/// `T = -ln(u) / gamma` with one uniform `u` from `(0, 1]`.
pub fn sample_waiting_time(gamma: f64, rng: &mut RngStream) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::param(
            "gamma",
            format!("collision rate must be positive, got {gamma}"),
        ));
    }
    Ok(-rng.uniform().ln() / gamma)
}

/// Collision times of one trajectory and its states on the output grid.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub collision_times: Vec<f64>,
    pub states_on_grid: Vec<DensityMatrix>,
}

/// How collision times are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// Poisson process with the spec's rate.
    Poisson,
    /// Exactly `n` collisions, uniformly placed on `[0, t_max]`.
    FixedN(usize),
}

fn check_inputs(spec: &CollisionSpec, rho0: &DensityMatrix, output_times: &[f64]) -> Result<()> {
    spec.check_system(rho0)?;
    check_time_grid(output_times)
}

/// Applies collisions at `collision_times` (ascending) and records the state
/// at every output time. Collisions at or before an output time are applied
/// before it is recorded.
fn evolve_through(
    spec: &CollisionSpec,
    rho0: &DensityMatrix,
    collision_times: &[f64],
    output_times: &[f64],
) -> Vec<ComplexMatrix> {
    let mut state = rho0.mat().clone();
    let mut next = 0;
    output_times
        .iter()
        .map(|&t| {
            while next < collision_times.len() && collision_times[next] <= t {
                state = spec.apply_linear(&state);
                next += 1;
            }
            state.clone()
        })
        .collect()
}

fn poisson_times(gamma: f64, t_max: f64, rng: &mut RngStream) -> Vec<f64> {
    let mut times = Vec::new();
    let mut t = 0.0;
    loop {
        // gamma was validated with the spec
        t += -rng.uniform().ln() / gamma;
        if t > t_max {
            return times;
        }
        times.push(t);
    }
}

fn fixed_n_times(n: usize, t_max: f64, rng: &mut RngStream) -> Vec<f64> {
    let mut times: Vec<f64> = (0..n).map(|_| rng.uniform() * t_max).collect();
    times.sort_by(f64::total_cmp);
    times
}

fn into_record(collision_times: Vec<f64>, states: Vec<ComplexMatrix>) -> TrajectoryRecord {
    TrajectoryRecord {
        collision_times,
        states_on_grid: states
            .into_iter()
            .map(DensityMatrix::from_cptp_output)
            .collect(),
    }
}

/// One Poisson trajectory up to the last output time.
pub fn run_trajectory(
    spec: &CollisionSpec,
    rho0: &DensityMatrix,
    output_times: &[f64],
    rng: &mut RngStream,
) -> Result<TrajectoryRecord> {
    check_inputs(spec, rho0, output_times)?;
    let t_max = *output_times.last().expect("grid checked non-empty");
    let times = poisson_times(spec.gamma(), t_max, rng);
    let states = evolve_through(spec, rho0, &times, output_times);
    Ok(into_record(times, states))
}

/// One trajectory with exactly `n` collisions in `[0, t_max]`, at the order
/// statistics of `n` uniform draws.
pub fn run_fixed_n_trajectory(
    spec: &CollisionSpec,
    rho0: &DensityMatrix,
    t_max: f64,
    n: usize,
    output_times: &[f64],
    rng: &mut RngStream,
) -> Result<TrajectoryRecord> {
    check_inputs(spec, rho0, output_times)?;
    check_horizon(t_max, output_times)?;
    let times = fixed_n_times(n, t_max, rng);
    let states = evolve_through(spec, rho0, &times, output_times);
    Ok(into_record(times, states))
}

fn check_horizon(t_max: f64, output_times: &[f64]) -> Result<()> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::param(
            "t_max",
            format!("horizon must be positive, got {t_max}"),
        ));
    }
    if output_times.last().is_some_and(|&t| t > t_max) {
        return Err(Error::param("output_times", "output times exceed t_max"));
    }
    Ok(())
}

/// Mean state over `n_traj` trajectories; trajectory `i` uses
/// `RngStream::new(seed, i)`. In fixed-n mode the horizon is the last
/// output time.
pub fn ensemble_average(
    spec: &CollisionSpec,
    rho0: &DensityMatrix,
    output_times: &[f64],
    n_traj: usize,
    seed: u64,
    mode: SamplingMode,
) -> Result<StateSeries> {
    check_inputs(spec, rho0, output_times)?;
    if n_traj == 0 {
        return Err(Error::param("n_traj", "need at least one trajectory"));
    }
    let t_max = *output_times.last().expect("grid checked non-empty");
    if mode != SamplingMode::Poisson {
        check_horizon(t_max, output_times)?;
    }

    let run = |i: usize| {
        let mut rng = RngStream::new(seed, i as u64);
        let times = match mode {
            SamplingMode::Poisson => poisson_times(spec.gamma(), t_max, &mut rng),
            SamplingMode::FixedN(n) => fixed_n_times(n, t_max, &mut rng),
        };
        evolve_through(spec, rho0, &times, output_times)
    };

    let d = spec.d_s();
    let mut sum = vec![ComplexMatrix::zeros(d, d); output_times.len()];
    let mut start = 0;
    while start < n_traj {
        let end = (start + REDUCTION_CHUNK).min(n_traj);
        let chunk: Vec<Vec<ComplexMatrix>> = (start..end).into_par_iter().map(run).collect();
        for states in &chunk {
            for (acc, s) in sum.iter_mut().zip(states) {
                *acc += s;
            }
        }
        start = end;
    }

    let scale = c(1.0 / n_traj as f64, 0.0);
    let states = sum
        .into_iter()
        .map(|m| DensityMatrix::new(m * scale))
        .collect::<Result<Vec<_>>>()?;
    StateSeries::new(output_times.to_vec(), states)
}
