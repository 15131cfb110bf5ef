//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p qcollide --test acceptance`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qcollide::channels::{
    averaged_step_map, choi_matrix, collision_map_apply, kraus_from_choi, lindblad_rhs_kraus,
    lindblad_rhs_map, CollisionSpec, DEFAULT_RANK_TOL,
};
use qcollide::experiments::distance_series;
use qcollide::me::{integrate_me, IntegratorConfig, RhsForm};
use qcollide::periodic::{
    extend_unitary, extended_ancilla_state, periodic_step, run_correlated_bath, run_periodic,
    uniform_fixed_m_bath,
};
use qcollide::qmat::{
    identity, kron, max_abs_diff, partial_swap_unitary, random, sigma_x, unitarity_error,
};
use qcollide::series::uniform_grid;
use qcollide::stochastic::{
    ensemble_average, run_trajectory, sample_waiting_time, RngStream, SamplingMode,
};
use qcollide::witness::blp_witness;
use qcollide::{DensityMatrix, StateSeries, UnitaryOp};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    if let Some(limit) = limit {
        let in_time = elapsed <= limit;
        out.detail = format!(
            "{}; runtime {:.2}s (limit {}s)",
            out.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
        out.pass &= in_time;
    } else {
        out.detail = format!("{}; runtime {:.2}s", out.detail, elapsed.as_secs_f64());
    }
    out
}

fn full_swap(gamma: f64) -> CollisionSpec {
    partial_swap_spec(FRAC_PI_2, gamma)
}

fn partial_swap_spec(theta: f64, gamma: f64) -> CollisionSpec {
    CollisionSpec::new(
        2,
        2,
        partial_swap_unitary(theta, 2).unwrap(),
        DensityMatrix::basis(2, 0).unwrap(),
        gamma,
    )
    .unwrap()
}

fn flip_spec(gamma: f64) -> CollisionSpec {
    let u = UnitaryOp::new(kron(&sigma_x(), &identity(2))).unwrap();
    CollisionSpec::new(2, 2, u, DensityMatrix::basis(2, 0).unwrap(), gamma).unwrap()
}

fn random_spec(rng: &mut ChaCha8Rng) -> CollisionSpec {
    let d_s = rng.random_range(2..=3);
    let d_a = rng.random_range(2..=3);
    let u = random::unitary(rng, d_s * d_a);
    let eta = random::density(rng, d_a);
    CollisionSpec::new(d_s, d_a, u, eta, 0.1 + 2.0 * rng.random::<f64>()).unwrap()
}

fn sup_distance(a: &StateSeries, b: &StateSeries) -> f64 {
    distance_series(a, b)
        .unwrap()
        .into_iter()
        .fold(0.0, f64::max)
}

fn ac1_periodic_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let spec = random_spec(&mut rng);
        let rho = random::density(&mut rng, spec.d_s());
        let dp = rng.random::<f64>();
        let u_ext = extend_unitary(spec.unitary(), spec.d_s(), spec.d_a()).unwrap();
        let eta_ext = extended_ancilla_state(spec.eta(), dp).unwrap();
        let a = periodic_step(&rho, &u_ext, &eta_ext).unwrap();
        let b = averaged_step_map(&spec, &rho, dp).unwrap();
        worst = worst.max(max_abs_diff(a.mat(), b.mat()));
    }
    check(
        worst <= 1e-12,
        format!("max |periodic - averaged| = {worst:.2e} (tol 1e-12)"),
    )
}

fn ac2_lindblad_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut rhs_err, mut comp_err, mut action_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..100 {
        let spec = random_spec(&mut rng);
        let rho = random::density(&mut rng, spec.d_s());
        let channel = kraus_from_choi(&choi_matrix(&spec), DEFAULT_RANK_TOL).unwrap();
        let a = lindblad_rhs_map(&spec, &rho).unwrap();
        let b = lindblad_rhs_kraus(&channel, spec.gamma(), &rho).unwrap();
        rhs_err = rhs_err.max(max_abs_diff(&a, &b));
        comp_err = comp_err.max(channel.completeness_error());
        let direct = collision_map_apply(&spec, &rho).unwrap();
        action_err = action_err.max(max_abs_diff(&channel.apply_linear(rho.mat()), direct.mat()));
    }
    check(
        rhs_err <= 1e-10 && comp_err <= 1e-10 && action_err <= 1e-10,
        format!(
            "rhs {rhs_err:.2e}, completeness {comp_err:.2e}, action {action_err:.2e} (tol 1e-10)"
        ),
    )
}

fn ac3_extended_unitarity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let d_s = rng.random_range(2..=3);
        let d_a = rng.random_range(2..=3);
        let u = random::unitary(&mut rng, d_s * d_a);
        let ext = extend_unitary(&u, d_s, d_a).unwrap();
        worst = worst.max(unitarity_error(ext.mat()));
    }
    check(
        worst <= 1e-12,
        format!("max |Ũ†Ũ - I| = {worst:.2e} (tol 1e-12)"),
    )
}

fn ac4_me_closed_form() -> Outcome {
    let rho0 = DensityMatrix::basis(2, 1).unwrap();
    let times = [0.5, 1.0, 2.0, 5.0];
    let cfg = IntegratorConfig::new(1e-3, RhsForm::Map).unwrap();
    let s = integrate_me(&full_swap(1.0), &rho0, &times, &cfg).unwrap();
    let worst = s
        .iter()
        .map(|(t, r)| (r.population(1) - (-t).exp()).abs())
        .fold(0.0, f64::max);
    check(
        worst <= 1e-8,
        format!("max |p1(t) - e^-t| = {worst:.2e} (tol 1e-8)"),
    )
}

fn ac5_stochastic_convergence() -> Outcome {
    let grid = uniform_grid(5.0, 101);
    let rho0 = DensityMatrix::basis(2, 1).unwrap();
    let cfg = IntegratorConfig::default();
    let mut details = Vec::new();
    let mut pass = true;
    for (label, spec) in [
        ("full swap", full_swap(1.0)),
        ("partial swap pi/4", partial_swap_spec(FRAC_PI_4, 1.0)),
    ] {
        let mc =
            ensemble_average(&spec, &rho0, &grid, 100_000, 2024, SamplingMode::Poisson).unwrap();
        let me = integrate_me(&spec, &rho0, &grid, &cfg).unwrap();
        let sup = sup_distance(&mc, &me);
        pass &= sup <= 0.01;
        details.push(format!("{label}: sup D = {sup:.4}"));
    }
    check(pass, format!("{} (tol 0.01)", details.join(", ")))
}

fn periodic_sup_error(dt: f64) -> f64 {
    let spec = full_swap(1.0);
    let rho0 = DensityMatrix::basis(2, 1).unwrap();
    let n = (5.0 / dt).round() as usize;
    let periodic = run_periodic(&spec, &rho0, dt, n).unwrap();
    let me = integrate_me(&spec, &rho0, periodic.times(), &IntegratorConfig::default()).unwrap();
    sup_distance(&periodic, &me)
}

fn ac6_periodic_first_order() -> Outcome {
    let (e1, e2) = (periodic_sup_error(0.02), periodic_sup_error(0.01));
    let ratio = e1 / e2;

    let dt = 0.01;
    let s = run_periodic(
        &full_swap(1.0),
        &DensityMatrix::basis(2, 1).unwrap(),
        dt,
        500,
    )
    .unwrap();
    let discrete = s
        .states()
        .iter()
        .enumerate()
        .map(|(n, r)| (r.population(1) - (1.0 - dt).powi(n as i32)).abs())
        .fold(0.0, f64::max);
    check(
        (1.7..=2.3).contains(&ratio) && discrete <= 1e-12,
        format!(
            "err(0.02) = {e1:.3e}, err(0.01) = {e2:.3e}, ratio {ratio:.3} (range [1.7, 2.3]); discrete law {discrete:.2e} (tol 1e-12)"
        ),
    )
}

fn ac7_fixed_n_witness() -> Outcome {
    let spec = flip_spec(1.0);
    let zero = DensityMatrix::basis(2, 0).unwrap();
    let one = DensityMatrix::basis(2, 1).unwrap();
    let analytic = |t: f64| (1.0 - 2.0 * t).abs();

    // (a) exact correlated bath, 2000 slots, one collision
    let n_slots = 2000;
    let dt = 1.0 / n_slots as f64;
    let bath = uniform_fixed_m_bath(n_slots, 1, zero.clone()).unwrap();
    let a0 = run_correlated_bath(&spec, &bath, &zero, dt).unwrap();
    let a1 = run_correlated_bath(&spec, &bath, &one, dt).unwrap();
    let d_bath = distance_series(&a0, &a1).unwrap();
    let dev_a = a0
        .times()
        .iter()
        .zip(&d_bath)
        .map(|(&t, d)| (d - analytic(t)).abs())
        .fold(0.0, f64::max);
    let blp_a = blp_witness(a0.times(), &d_bath).unwrap().blp_value;

    // (b) stochastic fixed-n ensemble
    let grid = uniform_grid(1.0, 101);
    let mode = SamplingMode::FixedN(1);
    let b0 = ensemble_average(&spec, &zero, &grid, 100_000, 77, mode).unwrap();
    let b1 = ensemble_average(&spec, &one, &grid, 100_000, 77, mode).unwrap();
    let d_mc = distance_series(&b0, &b1).unwrap();
    let dev_b = grid
        .iter()
        .zip(&d_mc)
        .map(|(&t, d)| (d - analytic(t)).abs())
        .fold(0.0, f64::max);
    let blp_b = blp_witness(&grid, &d_mc).unwrap().blp_value;

    // (d) unconditioned Poisson collisions
    let p0 = ensemble_average(&spec, &zero, &grid, 100_000, 78, SamplingMode::Poisson).unwrap();
    let p1 = ensemble_average(&spec, &one, &grid, 100_000, 78, SamplingMode::Poisson).unwrap();
    let blp_d = blp_witness(&grid, &distance_series(&p0, &p1).unwrap())
        .unwrap()
        .blp_value;

    let pass = dev_a <= 0.002 && dev_b <= 0.01 && blp_a >= 0.95 && blp_b >= 0.95 && blp_d <= 0.01;
    check(
        pass,
        format!(
            "(a) bath dev {dev_a:.2e} (tol 0.002); (b) MC dev {dev_b:.4} (tol 0.01); \
             (c) blp bath {blp_a:.4}, MC {blp_b:.4} (min 0.95); (d) Poisson blp {blp_d:.2e} (max 0.01)"
        ),
    )
}

fn ac8_waiting_times() -> Outcome {
    let n = 1_000_000;
    let mut rng = RngStream::new(808, 0);
    let mut samples: Vec<f64> = (0..n)
        .map(|_| sample_waiting_time(1.0, &mut rng).unwrap())
        .collect();
    let mean = samples.iter().sum::<f64>() / n as f64;
    samples.sort_by(f64::total_cmp);
    let ks = samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - (-x).exp();
            (f - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - f)
        })
        .fold(0.0, f64::max);

    // collision counts of full trajectories, gamma = 1, t_max = 5
    let spec = full_swap(1.0);
    let rho0 = DensityMatrix::basis(2, 1).unwrap();
    use rayon::prelude::*;
    let counts: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let rec =
                run_trajectory(&spec, &rho0, &[0.0, 5.0], &mut RngStream::new(809, i)).unwrap();
            rec.collision_times.len() as f64
        })
        .collect();
    let c_mean = counts.iter().sum::<f64>() / n as f64;
    let c_var = counts.iter().map(|k| (k - c_mean).powi(2)).sum::<f64>() / (n - 1) as f64;

    let pass = ks <= 0.0017
        && (mean - 1.0).abs() <= 0.005
        && (c_mean - 5.0).abs() <= 0.05
        && (c_var - 5.0).abs() <= 0.05;
    check(
        pass,
        format!(
            "KS {ks:.5} (max 0.0017); mean {mean:.5} (1 ± 0.5%); counts mean {c_mean:.4}, variance {c_var:.4} (5 ± 1%)"
        ),
    )
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn ac9_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_qcollide");
    let mut outputs = Vec::new();
    for (run, threads) in [("a", "1"), ("b", "0")] {
        let dir = tmp.path().join(run);
        let status = Command::new(bin)
            .args(["demo", "fixedn-revival", "--threads", threads, "--out-dir"])
            .arg(&dir)
            .output()
            .unwrap();
        if !status.status.success() {
            return check(
                false,
                format!(
                    "run {run} failed: {}",
                    String::from_utf8_lossy(&status.stderr)
                ),
            );
        }
        outputs.push(read_dir_bytes(&dir));
    }
    let n_files = outputs[0].len();
    check(
        n_files > 0 && outputs[0] == outputs[1],
        format!("{n_files} files compared byte-for-byte across two runs (1 thread vs all cores)"),
    )
}

type Criterion = (&'static str, Option<u64>, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        (
            "AC1 periodic step equals averaged stochastic step",
            Some(5),
            ac1_periodic_equivalence,
        ),
        (
            "AC2 Lindblad form equals map form after Choi->Kraus",
            Some(5),
            ac2_lindblad_equivalence,
        ),
        (
            "AC3 extended unitary is unitary",
            None,
            ac3_extended_unitarity,
        ),
        (
            "AC4 master equation matches closed form",
            Some(1),
            ac4_me_closed_form,
        ),
        (
            "AC5 stochastic ensemble converges to master equation",
            Some(60),
            ac5_stochastic_convergence,
        ),
        (
            "AC6 periodic model converges at first order",
            None,
            ac6_periodic_first_order,
        ),
        (
            "AC7 fixed collision number gives trace-distance revival",
            Some(120),
            ac7_fixed_n_witness,
        ),
        (
            "AC8 waiting-time and collision-count statistics",
            None,
            ac8_waiting_times,
        ),
        (
            "AC9 byte-identical outputs for identical runs",
            None,
            ac9_determinism,
        ),
    ];

    let mut failures = 0;
    for (name, limit, f) in criteria {
        let out = timed(limit.map(Duration::from_secs), f);
        if !out.pass {
            failures += 1;
        }
        println!(
            "[{}] {name}: {}",
            if out.pass { "PASS" } else { "FAIL" },
            out.detail
        );
    }
    if failures == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criteria failed");
        ExitCode::FAILURE
    }
}
