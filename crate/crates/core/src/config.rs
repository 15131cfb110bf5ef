//! Scenario configuration files.
//!
//! Scenarios are TOML documents with a strict schema; unknown keys are
//! rejected. Example:
//!
//! ```toml
//! d_s = 2
//! d_a = 2
//! unitary = { partial_swap = 0.785398 }   # or "sigma_x_on_system", or { matrix = [[[re, im], ...], ...] }
//! eta = { basis_state = 0 }                # or { matrix = [[[re, im], ...], ...] }
//! gamma = 1.0
//! t_max = 5.0
//! engines = ["stochastic", "periodic", "me", "correlated"]
//! initial_states = [{ basis_state = 0 }, { basis_state = 1 }]
//! # optional, with defaults
//! grid_points = 101
//! n_traj = 10000
//! seed = 0
//! delta_t = 0.0005          # default t_max / 10000
//! fixed_n = 1               # stochastic engine samples exactly n collisions
//! correlated_m = 1          # required by the correlated engine
//! output_path = "out"
//! ```

use serde::Deserialize;

use crate::channels::CollisionSpec;
use crate::error::{Error, Result};
use crate::periodic::MAX_BRANCHES;
use crate::qmat::{
    c, identity, kron, partial_swap_unitary, sigma_x, ComplexMatrix, DensityMatrix, UnitaryOp,
};
use crate::series::uniform_grid;

pub const DEFAULT_GRID_POINTS: usize = 101;
pub const DEFAULT_N_TRAJ: usize = 10_000;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_STEPS_PER_HORIZON: f64 = 10_000.0;
pub const DEFAULT_OUTPUT_PATH: &str = "out";

/// Complex matrix literal: rows of `[re, im]` pairs.
pub type MatrixLiteral = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum UnitarySpec {
    PartialSwap(f64),
    SigmaXOnSystem,
    Matrix(MatrixLiteral),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    BasisState(usize),
    Matrix(MatrixLiteral),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Stochastic,
    Periodic,
    Me,
    Correlated,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Stochastic => "stochastic",
            Engine::Periodic => "periodic",
            Engine::Me => "me",
            Engine::Correlated => "correlated",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    d_s: usize,
    d_a: usize,
    unitary: UnitarySpec,
    eta: StateSpec,
    gamma: f64,
    t_max: f64,
    engines: Vec<Engine>,
    initial_states: Vec<StateSpec>,
    grid_points: Option<usize>,
    n_traj: Option<usize>,
    seed: Option<u64>,
    delta_t: Option<f64>,
    fixed_n: Option<usize>,
    correlated_m: Option<usize>,
    output_path: Option<String>,
}

/// Validated scenario, ready to run.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub spec: CollisionSpec,
    pub unitary: UnitarySpec,
    pub t_max: f64,
    pub grid_points: usize,
    /// Engines in canonical order, without duplicates.
    pub engines: Vec<Engine>,
    pub n_traj: usize,
    pub seed: u64,
    pub delta_t: f64,
    pub fixed_n: Option<usize>,
    pub correlated_m: Option<usize>,
    pub initial_states: Vec<DensityMatrix>,
    pub output_path: String,
}

impl ScenarioConfig {
    /// `t_k = k t_max / (grid_points - 1)`.
    pub fn grid(&self) -> Vec<f64> {
        uniform_grid(self.t_max, self.grid_points)
    }

    /// Periodic steps (or correlated-bath slots) covering `[0, t_max]`.
    pub fn n_steps(&self) -> usize {
        (self.t_max / self.delta_t).round() as usize
    }

    /// Fine steps between consecutive grid points.
    pub fn grid_stride(&self) -> usize {
        self.n_steps() / (self.grid_points - 1)
    }

    pub fn has(&self, engine: Engine) -> bool {
        self.engines.contains(&engine)
    }
}

fn matrix_from_literal(field: &str, lit: &MatrixLiteral, dim: usize) -> Result<ComplexMatrix> {
    if lit.len() != dim || lit.iter().any(|row| row.len() != dim) {
        return Err(Error::config(
            field,
            format!("matrix literal must be {dim}x{dim}"),
        ));
    }
    Ok(ComplexMatrix::from_fn(dim, dim, |i, j| {
        c(lit[i][j][0], lit[i][j][1])
    }))
}

fn build_state(field: &str, spec: &StateSpec, dim: usize) -> Result<DensityMatrix> {
    match spec {
        StateSpec::BasisState(i) => {
            DensityMatrix::basis(dim, *i).map_err(|e| Error::config(field, e.to_string()))
        }
        StateSpec::Matrix(lit) => DensityMatrix::new(matrix_from_literal(field, lit, dim)?)
            .map_err(|e| Error::config(field, e.to_string())),
    }
}

fn build_unitary(spec: &UnitarySpec, d_s: usize, d_a: usize) -> Result<UnitaryOp> {
    let wrap = |e: Error| Error::config("unitary", e.to_string());
    match spec {
        UnitarySpec::PartialSwap(theta) => {
            if d_s != d_a {
                return Err(Error::config("unitary", "partial_swap needs d_s == d_a"));
            }
            partial_swap_unitary(*theta, d_s).map_err(wrap)
        }
        UnitarySpec::SigmaXOnSystem => {
            if d_s != 2 {
                return Err(Error::config("unitary", "sigma_x_on_system needs d_s == 2"));
            }
            UnitaryOp::new(kron(&sigma_x(), &identity(d_a))).map_err(wrap)
        }
        UnitarySpec::Matrix(lit) => {
            UnitaryOp::new(matrix_from_literal("unitary", lit, d_s * d_a)?).map_err(wrap)
        }
    }
}

fn binomial_fits(n: usize, k: usize) -> bool {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i as u128 + 1);
        if acc > MAX_BRANCHES as u128 {
            return false;
        }
    }
    true
}

/// Parses and validates a scenario document.
pub fn load_config(text: &str) -> Result<ScenarioConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let msg = e.message().to_string();
        let field = msg.split('`').nth(1).unwrap_or("document").to_string();
        Error::config(field, msg)
    })?;

    if raw.d_s == 0 {
        return Err(Error::config("d_s", "must be positive"));
    }
    if raw.d_a == 0 {
        return Err(Error::config("d_a", "must be positive"));
    }
    if !(raw.gamma > 0.0 && raw.gamma.is_finite()) {
        return Err(Error::config("gamma", "must be positive and finite"));
    }
    if !(raw.t_max > 0.0 && raw.t_max.is_finite()) {
        return Err(Error::config("t_max", "must be positive and finite"));
    }
    let grid_points = raw.grid_points.unwrap_or(DEFAULT_GRID_POINTS);
    if grid_points < 2 {
        return Err(Error::config("grid_points", "need at least 2 grid points"));
    }
    let n_traj = raw.n_traj.unwrap_or(DEFAULT_N_TRAJ);
    if n_traj == 0 {
        return Err(Error::config("n_traj", "must be positive"));
    }
    let mut engines = raw.engines.clone();
    engines.sort();
    engines.dedup();
    if engines.is_empty() {
        return Err(Error::config("engines", "select at least one engine"));
    }
    if raw.initial_states.is_empty() || raw.initial_states.len() > 2 {
        return Err(Error::config(
            "initial_states",
            "give one or two initial states",
        ));
    }

    let u = build_unitary(&raw.unitary, raw.d_s, raw.d_a)?;
    let eta = build_state("eta", &raw.eta, raw.d_a)?;
    let initial_states = raw
        .initial_states
        .iter()
        .map(|s| build_state("initial_states", s, raw.d_s))
        .collect::<Result<Vec<_>>>()?;
    let spec = CollisionSpec::new(raw.d_s, raw.d_a, u, eta, raw.gamma)
        .map_err(|e| Error::config("unitary", e.to_string()))?;

    let delta_t = raw.delta_t.unwrap_or(raw.t_max / DEFAULT_STEPS_PER_HORIZON);
    if !(delta_t > 0.0 && delta_t.is_finite()) {
        return Err(Error::config("delta_t", "must be positive and finite"));
    }
    let fine = engines.contains(&Engine::Periodic) || engines.contains(&Engine::Correlated);
    if fine {
        let steps = raw.t_max / delta_t;
        let rounded = steps.round();
        if rounded < 1.0 || (steps - rounded).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::config(
                "delta_t",
                "t_max must be an integer multiple of delta_t",
            ));
        }
        if !(rounded as usize).is_multiple_of(grid_points - 1) {
            return Err(Error::config(
                "delta_t",
                format!(
                    "t_max / delta_t = {} is not a multiple of grid_points - 1 = {}",
                    rounded,
                    grid_points - 1
                ),
            ));
        }
    }
    if engines.contains(&Engine::Periodic) && raw.gamma * delta_t > 1.0 {
        return Err(Error::config(
            "delta_t",
            format!("gamma * delta_t = {} exceeds 1", raw.gamma * delta_t),
        ));
    }
    if engines.contains(&Engine::Correlated) {
        let m = raw
            .correlated_m
            .ok_or_else(|| Error::config("correlated_m", "required by the correlated engine"))?;
        let slots = (raw.t_max / delta_t).round() as usize;
        if m > slots {
            return Err(Error::config(
                "correlated_m",
                format!("{m} collisions exceed {slots} slots"),
            ));
        }
        if !binomial_fits(slots, m) {
            return Err(Error::config(
                "correlated_m",
                format!("C({slots}, {m}) exceeds the {MAX_BRANCHES}-branch limit"),
            ));
        }
    }

    Ok(ScenarioConfig {
        spec,
        unitary: raw.unitary,
        t_max: raw.t_max,
        grid_points,
        engines,
        n_traj,
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
        delta_t,
        fixed_n: raw.fixed_n,
        correlated_m: raw.correlated_m,
        initial_states,
        output_path: raw
            .output_path
            .unwrap_or_else(|| DEFAULT_OUTPUT_PATH.to_string()),
    })
}
