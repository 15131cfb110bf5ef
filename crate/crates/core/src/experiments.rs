//! Runs configured scenarios and writes CSV/JSON results.
//!
//! Per initial state `k` (0-based) and engine `E` the runner writes
//! `E_state{k}.csv`; with two or more engines also `comparison_state{k}.csv`;
//! and always `summary.json`. Numbers are printed with 17 significant
//! digits so every double round-trips exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{load_config, Engine, ScenarioConfig};
use crate::error::{Error, Result};
use crate::me::{integrate_me, IntegratorConfig};
use crate::periodic::{run_correlated_bath, run_periodic, uniform_fixed_m_bath};
use crate::qmat::{trace_distance, DensityMatrix};
use crate::series::StateSeries;
use crate::stochastic::{ensemble_average, SamplingMode};
use crate::witness::{bloch_vector, blp_witness, WitnessReport};

/// Names accepted by [`demo_config`].
pub const DEMO_NAMES: [&str; 4] = [
    "averaging-identity",
    "fullswap-decay",
    "fixedn-revival",
    "correlated-m1",
];

/// Built-in scenario documents.
pub fn demo_config(name: &str) -> Option<&'static str> {
    Some(match name {
        "averaging-identity" => {
            r#"
d_s = 2
d_a = 2
unitary = { partial_swap = 0.6 }
eta = { basis_state = 0 }
gamma = 1.0
t_max = 3.0
grid_points = 61
engines = ["stochastic", "periodic", "me"]
n_traj = 20000
seed = 1
delta_t = 0.0005
initial_states = [{ basis_state = 1 }]
output_path = "out/averaging-identity"
"#
        }
        "fullswap-decay" => {
            r#"
d_s = 2
d_a = 2
unitary = { partial_swap = 1.5707963267948966 }
eta = { basis_state = 0 }
gamma = 1.0
t_max = 5.0
engines = ["stochastic", "periodic", "me"]
n_traj = 20000
seed = 2
initial_states = [{ basis_state = 1 }]
output_path = "out/fullswap-decay"
"#
        }
        "fixedn-revival" => {
            r#"
d_s = 2
d_a = 2
unitary = "sigma_x_on_system"
eta = { basis_state = 0 }
gamma = 1.0
t_max = 1.0
engines = ["stochastic", "correlated", "me"]
n_traj = 10000
seed = 3
delta_t = 0.0005
fixed_n = 1
correlated_m = 1
initial_states = [{ basis_state = 0 }, { basis_state = 1 }]
output_path = "out/fixedn-revival"
"#
        }
        "correlated-m1" => {
            r#"
d_s = 2
d_a = 2
unitary = { partial_swap = 1.5707963267948966 }
eta = { basis_state = 0 }
gamma = 0.5
t_max = 2.0
engines = ["correlated", "stochastic", "me"]
n_traj = 10000
seed = 4
delta_t = 0.001
fixed_n = 1
correlated_m = 1
initial_states = [{ basis_state = 1 }, { matrix = [[[0.5, 0.0], [0.5, 0.0]], [[0.5, 0.0], [0.5, 0.0]]] }]
output_path = "out/correlated-m1"
"#
        }
        _ => return None,
    })
}

/// Evolution of every initial state under every engine, on the common grid.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub grid: Vec<f64>,
    /// `series[k][&engine]` for initial state `k`.
    pub series: Vec<BTreeMap<Engine, StateSeries>>,
    /// Present when two initial states were given.
    pub witness: Option<BTreeMap<Engine, WitnessReport>>,
}

#[derive(Serialize)]
struct Summary<'a> {
    scenario: &'a str,
    seed: u64,
    n_traj: usize,
    witness: BTreeMap<&'static str, &'a WitnessReport>,
}

fn on_grid(fine: StateSeries, stride: usize, grid: &[f64]) -> Result<StateSeries> {
    let coarse = fine.subsample(stride);
    StateSeries::new(grid.to_vec(), coarse.states().to_vec())
}

/// Evolves all initial states with all configured engines.
pub fn simulate(config: &ScenarioConfig) -> Result<ScenarioResult> {
    let grid = config.grid();
    let spec = &config.spec;
    let bath = match (config.has(Engine::Correlated), config.correlated_m) {
        (true, Some(m)) => Some(uniform_fixed_m_bath(
            config.n_steps(),
            m,
            spec.eta().clone(),
        )?),
        _ => None,
    };

    let mut series = Vec::with_capacity(config.initial_states.len());
    for rho0 in &config.initial_states {
        let mut per_engine = BTreeMap::new();
        for &engine in &config.engines {
            let s = match engine {
                Engine::Me => integrate_me(spec, rho0, &grid, &IntegratorConfig::default())?,
                Engine::Stochastic => {
                    let mode = config
                        .fixed_n
                        .map_or(SamplingMode::Poisson, SamplingMode::FixedN);
                    ensemble_average(spec, rho0, &grid, config.n_traj, config.seed, mode)?
                }
                Engine::Periodic => on_grid(
                    run_periodic(spec, rho0, config.delta_t, config.n_steps())?,
                    config.grid_stride(),
                    &grid,
                )?,
                Engine::Correlated => {
                    let bath = bath
                        .as_ref()
                        .expect("validated: correlated engine has a bath");
                    on_grid(
                        run_correlated_bath(spec, bath, rho0, config.delta_t)?,
                        config.grid_stride(),
                        &grid,
                    )?
                }
            };
            per_engine.insert(engine, s);
        }
        series.push(per_engine);
    }

    let witness = if series.len() == 2 {
        let mut reports = BTreeMap::new();
        for &engine in &config.engines {
            let d = distance_series(&series[0][&engine], &series[1][&engine])?;
            reports.insert(engine, blp_witness(&grid, &d)?);
        }
        Some(reports)
    } else {
        None
    };

    Ok(ScenarioResult {
        grid,
        series,
        witness,
    })
}

/// Pointwise trace distance between two aligned series.
pub fn distance_series(a: &StateSeries, b: &StateSeries) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::Dimension("series lengths differ".into()));
    }
    a.states()
        .iter()
        .zip(b.states())
        .map(|(x, y)| trace_distance(x, y))
        .collect()
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV of one state series: `t`, `re_r_i_j`/`im_r_i_j` for `i <= j`, then
/// Bloch components for qubits or populations `pop_i` otherwise.
pub fn state_csv(series: &StateSeries) -> Result<String> {
    let d = series.states().first().map_or(0, DensityMatrix::dim);
    let mut out = String::from("t");
    for i in 0..d {
        for j in i..d {
            write!(out, ",re_r_{i}_{j},im_r_{i}_{j}").unwrap();
        }
    }
    if d == 2 {
        out.push_str(",bloch_x,bloch_y,bloch_z");
    } else {
        for i in 0..d {
            write!(out, ",pop_{i}").unwrap();
        }
    }
    out.push('\n');

    for (t, rho) in series.iter() {
        out.push_str(&num(t));
        for i in 0..d {
            for j in i..d {
                let z = rho.mat()[(i, j)];
                write!(out, ",{},{}", num(z.re), num(z.im)).unwrap();
            }
        }
        if d == 2 {
            let (x, y, z) = bloch_vector(rho)?;
            write!(out, ",{},{},{}", num(x), num(y), num(z)).unwrap();
        } else {
            for i in 0..d {
                write!(out, ",{}", num(rho.population(i))).unwrap();
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// CSV with `D_<A>_vs_<B>` for every engine pair, in canonical engine order.
pub fn comparison_csv(grid: &[f64], per_engine: &BTreeMap<Engine, StateSeries>) -> Result<String> {
    let engines: Vec<Engine> = per_engine.keys().copied().collect();
    let mut pairs = Vec::new();
    for (i, &a) in engines.iter().enumerate() {
        for &b in &engines[i + 1..] {
            pairs.push((a, b, distance_series(&per_engine[&a], &per_engine[&b])?));
        }
    }
    let mut out = String::from("t");
    for (a, b, _) in &pairs {
        write!(out, ",D_{}_vs_{}", a.name(), b.name()).unwrap();
    }
    out.push('\n');
    for (k, &t) in grid.iter().enumerate() {
        out.push_str(&num(t));
        for (_, _, d) in &pairs {
            write!(out, ",{}", num(d[k])).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

/// Writes all outputs of a scenario into `out_dir` and returns the paths.
pub fn write_outputs(
    config: &ScenarioConfig,
    result: &ScenarioResult,
    scenario: &str,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, contents: String| -> Result<()> {
        let path = out_dir.join(name);
        fs::write(&path, contents)?;
        written.push(path);
        Ok(())
    };

    for (k, per_engine) in result.series.iter().enumerate() {
        for (engine, s) in per_engine {
            put(format!("{}_state{k}.csv", engine.name()), state_csv(s)?)?;
        }
        if per_engine.len() >= 2 {
            put(
                format!("comparison_state{k}.csv"),
                comparison_csv(&result.grid, per_engine)?,
            )?;
        }
    }

    let witness = result
        .witness
        .iter()
        .flat_map(|w| w.iter().map(|(e, r)| (e.name(), r)))
        .collect();
    let summary = Summary {
        scenario,
        seed: config.seed,
        n_traj: config.n_traj,
        witness,
    };
    let mut json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    json.push('\n');
    put("summary.json".into(), json)?;
    Ok(written)
}

/// Parses, simulates and writes a scenario. `out_dir` overrides the
/// configured output path.
pub fn run_scenario(text: &str, scenario: &str, out_dir: Option<&Path>) -> Result<Vec<PathBuf>> {
    let config = load_config(text)?;
    let result = simulate(&config)?;
    let dir = out_dir.map_or_else(|| PathBuf::from(&config.output_path), Path::to_path_buf);
    write_outputs(&config, &result, scenario, &dir)
}
