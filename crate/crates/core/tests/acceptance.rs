//! End-to-end acceptance checks.  Each test prints a single verdict line
//! (`acceptance NN <name>: PASS/FAIL ...`); run with `--nocapture` to see
//! them all.  Expensive trajectories are shared between tests.

use std::sync::OnceLock;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kswave_core::diagnostics::{
    aligned_sup_distance, gap_decay, level_set, propagation_speed,
};
use kswave_core::elliptic::solve_pressure_neumann;
use kswave_core::hyperbolic::{run, run_from, RunOptions, RunResult};
use kswave_core::model::{Field, Grid1D, InitialCondition, ModelParams};
use kswave_core::travelingwave::{
    apply_t_ode, apply_t_tau, chibar, f_appendix, find_chibar, fixed_point, is_admissible,
    speed_interval, WaveOptions, WaveProfile,
};

const C_STAR: f64 = 0.414;

fn params() -> ModelParams {
    ModelParams::new(1.0, 1.0).unwrap()
}

fn verdict(id: u32, name: &str, ok: bool, detail: &str) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("acceptance {id:02} {name}: {tag} ({detail})");
    assert!(ok, "acceptance {id:02} {name}: {detail}");
}

// Reference run: quadratic-ramp data, L = 20, M = 2000, T = 40.  The time
// step sits near the stability limit (cfl = 0.9) to keep the donor-cell
// smearing of the shock small; at cfl = 0.45 the reaction feeding the
// smeared tail inflates the measured front speed by about 0.03.
fn baseline() -> &'static RunResult {
    static RUN: OnceLock<RunResult> = OnceLock::new();
    RUN.get_or_init(|| {
        let grid = Grid1D::new(20.0, 2000).unwrap();
        let ic = InitialCondition::Polynomial { l: 20.0, x0: -15.0 };
        let opts = RunOptions { cfl: 0.9, ..Default::default() };
        run(grid, &ic, &params(), &opts).unwrap()
    })
}

fn ramp_run() -> &'static RunResult {
    static RUN: OnceLock<RunResult> = OnceLock::new();
    RUN.get_or_init(|| {
        let grid = Grid1D::new(20.0, 2000).unwrap();
        let opts = RunOptions { cfl: 0.9, snapshot_times: vec![30.0], ..Default::default() };
        run(grid, &InitialCondition::Ramp, &params(), &opts).unwrap()
    })
}

fn plateau_run() -> &'static RunResult {
    static RUN: OnceLock<RunResult> = OnceLock::new();
    RUN.get_or_init(|| {
        let grid = Grid1D::new(20.0, 2000).unwrap();
        let opts = RunOptions {
            cfl: 0.9,
            t_final: 30.0,
            snapshot_times: vec![30.0],
            ..Default::default()
        };
        run(grid, &InitialCondition::PlateauRamp, &params(), &opts).unwrap()
    })
}

fn wave() -> &'static WaveProfile {
    static WAVE: OnceLock<WaveProfile> = OnceLock::new();
    WAVE.get_or_init(|| fixed_point(&params(), &WaveOptions::for_params(&params())).unwrap())
}

#[test]
fn c01_critical_front_speed() {
    let c = propagation_speed(&baseline().trace, 0.0, 15.0, 40.0).unwrap();
    verdict(
        1,
        "critical front speed",
        (c - C_STAR).abs() <= 0.02,
        &format!("measured {c:.4}, target {C_STAR} +/- 0.02"),
    );
}

#[test]
fn c02_jump_height() {
    let jump = *baseline().trace.jump.last().unwrap();
    let bound = 2.0 / 3.0;
    verdict(
        2,
        "jump height",
        jump >= bound - 0.05,
        &format!("u(40, h*-) = {jump:.4}, bound {bound:.4} - 0.05"),
    );
}

#[test]
fn c03_level_set_coherence() {
    let trace = &baseline().trace;
    let c0 = propagation_speed(trace, 0.0, 15.0, 40.0).unwrap();
    let mut worst = 0.0_f64;
    for beta in [0.2, 2.0 / 3.0, 0.8] {
        let c = propagation_speed(trace, beta, 15.0, 40.0).unwrap();
        worst = worst.max((c - c0).abs());
    }
    let dx = baseline().state.u.grid.dx;
    let fit = gap_decay(trace, 0.2, 0.0, 40.0, dx).unwrap();
    verdict(
        3,
        "level-set coherence",
        worst <= 0.02 && fit.rate < 0.0,
        &format!("max speed spread {worst:.4}, gap rate {:.4}", fit.rate),
    );
}

/// Linear interpolation of a field between cell centers, clamped at the ends.
fn eval_field(u: &Field, x: f64) -> f64 {
    let g = &u.grid;
    let s = ((x - g.center(0)) / g.dx).clamp(0.0, (g.m - 1) as f64);
    let i = (s.floor() as usize).min(g.m - 2);
    let frac = s - i as f64;
    u.values[i] * (1.0 - frac) + u.values[i + 1] * frac
}

#[test]
fn c04_initial_condition_independence() {
    let u1 = &ramp_run().snapshots[0].0;
    let u2 = &plateau_run().snapshots[0].0;
    let x1 = level_set(u1, 0.5).unwrap();
    let x2 = level_set(u2, 0.5).unwrap();
    let shift = x2 - x1;
    let mut sup = 0.0_f64;
    for i in 0..u1.grid.m {
        let x = u1.grid.center(i);
        if x + shift < -u2.grid.l || x + shift > u2.grid.l {
            continue;
        }
        sup = sup.max((u1.values[i] - eval_field(u2, x + shift)).abs());
    }
    verdict(
        4,
        "initial-condition independence",
        sup <= 0.05,
        &format!("front-aligned sup distance at t=30 is {sup:.4}"),
    );
}

#[test]
fn c05_alpha_sweep() {
    let targets = [(1.0, 1.0, 0.05), (2.0, 0.5, 0.05), (5.0, C_STAR, 0.03)];
    let mut ok = true;
    let mut detail = String::new();
    for (alpha, target, tol) in targets {
        let grid = Grid1D::new(50.0, 5000).unwrap();
        let ic = InitialCondition::Sigmoid { alpha, x0: -15.0 };
        let opts = RunOptions { cfl: 0.9, ..Default::default() };
        let result = run(grid, &ic, &params(), &opts).unwrap();
        let c = propagation_speed(&result.trace, 0.0, 15.0, 40.0).unwrap();
        ok &= (c - target).abs() <= tol;
        detail.push_str(&format!("alpha={alpha}: {c:.4} (target {target} +/- {tol}); "));
    }
    verdict(5, "alpha sweep", ok, detail.trim_end_matches("; "));
}

#[test]
fn c06_porous_medium_limit() {
    let mut speeds = Vec::new();
    for sigma2 in [0.5, 0.1, 0.01] {
        let sigma = f64::sqrt(sigma2);
        let p = ModelParams::new(sigma, 1.0).unwrap();
        let l = 20.0;
        let m = 2000usize.max((40.0 * l / sigma).ceil() as usize);
        let grid = Grid1D::new(l, m).unwrap();
        let ic = InitialCondition::Polynomial { l, x0: -15.0 };
        let opts = RunOptions { cfl: 0.9, ..Default::default() };
        let result = run(grid, &ic, &p, &opts).unwrap();
        speeds.push(propagation_speed(&result.trace, 0.0, 15.0, 40.0).unwrap());
    }
    let increasing = speeds.windows(2).all(|w| w[1] > w[0]);
    let limit_gap = (speeds[2] - std::f64::consts::FRAC_1_SQRT_2).abs();
    verdict(
        6,
        "porous-medium limit",
        increasing && limit_gap <= 0.05,
        &format!(
            "speeds {:.4}, {:.4}, {:.4}; |c(0.01) - 1/sqrt(2)| = {limit_gap:.4}",
            speeds[0], speeds[1], speeds[2]
        ),
    );
}

#[test]
fn c07_traveling_wave_solver() {
    let p = params();
    let w = wave();
    let (lo, hi) = speed_interval(&p);
    let mut ok = w.residual_eta < 1e-10;
    let mut notes = vec![format!("residual {:.2e}", w.residual_eta)];
    ok &= w.c > lo && w.c < hi && (w.c - C_STAR).abs() <= 0.01;
    notes.push(format!("c = {:.4}", w.c));
    ok &= w.u0minus >= 2.0 / 3.0 - 1e-12;
    notes.push(format!("U(0-) = {:.4}", w.u0minus));
    let strictly_decreasing = w.u.windows(2).all(|uu| uu[0] > uu[1]);
    ok &= strictly_decreasing;
    notes.push(format!("strictly decreasing: {strictly_decreasing}"));

    // restart the PDE from the converged profile and check shape retention
    let grid = Grid1D::new(20.0, 2000).unwrap();
    let front0 = 5.0;
    let values: Vec<f64> = grid
        .centers()
        .map(|x| {
            let z = x - front0;
            if z >= 0.0 {
                0.0
            } else {
                let s = (z - w.z[0]) / (w.z[1] - w.z[0]);
                if s <= 0.0 {
                    w.u[0]
                } else {
                    let j = (s.floor() as usize).min(w.z.len() - 2);
                    let frac = s - j as f64;
                    w.u[j] * (1.0 - frac) + w.u[j + 1] * frac
                }
            }
        })
        .collect();
    let u0 = Field::new(grid, values, 0.0).unwrap();
    let opts = RunOptions { cfl: 0.9, t_final: 10.0, ..Default::default() };
    let result = run_from(u0, front0, &p, &opts).unwrap();
    let dist = aligned_sup_distance(&result.state.u, &w.z, &w.u, w.u0minus, 5).unwrap();
    ok &= dist <= 0.02;
    notes.push(format!("shape drift after T=10: {dist:.4}"));

    verdict(7, "traveling-wave solver", ok, &notes.join(", "));
}

/// Smooth random admissible profile: 1 minus a mixture of two exponentials,
/// with the total drop capped so the lower bound holds.
fn random_admissible(rng: &mut ChaCha8Rng, n: usize, dz: f64, lower: f64) -> Vec<f64> {
    let total = rng.gen_range(0.0..(1.0 - lower));
    let split = rng.gen_range(0.0..=1.0);
    let (a1, a2) = (total * split, total * (1.0 - split));
    let b1 = rng.gen_range(0.2..1.0);
    let b2 = rng.gen_range(0.2..1.0);
    (0..=n)
        .map(|j| {
            let z = -((n - j) as f64) * dz;
            1.0 - a1 * (b1 * z).exp() - a2 * (b2 * z).exp()
        })
        .collect()
}

#[test]
fn c08_operator_contract_suite() {
    let p = params();
    let lower = 2.0 / (2.0 + p.chi_hat);
    let dz = 5e-4;
    let n = 40_000;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst_route_gap = 0.0_f64;
    let mut worst_boundary = 0.0_f64;
    let mut ok = true;
    for trial in 0..200 {
        let u = random_admissible(&mut rng, n, dz, lower);
        let v = apply_t_ode(&u, dz, &p).unwrap();
        let (adm, msg) = is_admissible(&v, p.chi_hat);
        if !adm {
            ok = false;
            eprintln!("trial {trial}: output not admissible: {msg:?}");
        }
        if !v.windows(2).all(|vv| vv[0] > vv[1]) {
            ok = false;
            eprintln!("trial {trial}: output not strictly decreasing");
        }
        // boundary value formula against an independent pressure evaluation
        let pair = kswave_core::elliptic::convolve_halfline(&u, dz, 1.0, p.sigma).unwrap();
        let boundary = (1.0 + p.chi_hat * pair.p[n]) / (1.0 + p.chi_hat);
        worst_boundary = worst_boundary.max((v[n] - boundary).abs());

        let w = apply_t_tau(&u, dz, &p).unwrap();
        let gap = v.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst_route_gap = worst_route_gap.max(gap);
    }
    ok &= worst_boundary <= 1e-8 && worst_route_gap <= 1e-6;
    verdict(
        8,
        "operator contract suite",
        ok,
        &format!(
            "200 profiles; worst boundary error {worst_boundary:.2e}, worst route gap {worst_route_gap:.2e}"
        ),
    );
}

#[test]
fn c09_conservation_and_invariant_region() {
    let p = params();
    let mut ok = true;
    let mut notes = Vec::new();

    for ic in [
        InitialCondition::Polynomial { l: 20.0, x0: -15.0 },
        InitialCondition::Ramp,
    ] {
        let grid = Grid1D::new(20.0, 1000).unwrap();
        let u0 = Field::from_ic(grid, &ic);
        let m0 = u0.mass();
        let opts = RunOptions { cfl: 0.9, t_final: 20.0, reaction: false, ..Default::default() };
        let result = run(grid, &ic, &p, &opts).unwrap();
        let drift = (result.state.u.mass() - m0).abs() / m0;
        ok &= drift <= 1e-12;
        notes.push(format!("mass drift {drift:.2e}"));
    }

    // the stepper aborts if any value leaves [0,1] beyond 1e-12, so finishing
    // is already the invariant-region check; assert the final fields anyway
    for result in [baseline(), ramp_run(), plateau_run()] {
        let inside = result
            .state
            .u
            .values
            .iter()
            .all(|&v| (-1e-12..=1.0 + 1e-12).contains(&v));
        ok &= inside;
    }
    notes.push("reaction runs stayed in [0,1] within 1e-12".into());
    verdict(9, "conservation and invariant region", ok, &notes.join(", "));
}

/// Dense Gaussian elimination for the same Neumann discretization,
/// as an independent oracle for the tridiagonal solver.
fn dense_pressure(u: &Field, p: &ModelParams) -> Vec<f64> {
    let m = u.grid.m;
    let s = p.sigma * p.sigma / (u.grid.dx * u.grid.dx);
    let mut a = vec![vec![0.0; m]; m];
    for i in 0..m {
        a[i][i] = 1.0 + 2.0 * s;
        if i == 0 || i == m - 1 {
            a[i][i] = 1.0 + s;
        }
        if i > 0 {
            a[i][i - 1] = -s;
        }
        if i + 1 < m {
            a[i][i + 1] = -s;
        }
    }
    let mut b = u.values.clone();
    for k in 0..m {
        // partial pivot
        let piv = (k..m).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..m {
            let f = a[i][k] / a[k][k];
            for j in k..m {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    for k in (0..m).rev() {
        let mut acc = b[k];
        for j in k + 1..m {
            acc -= a[k][j] * b[j];
        }
        b[k] = acc / a[k][k];
    }
    b
}

#[test]
fn c10_elliptic_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0_f64;
    for _ in 0..40 {
        let m = rng.gen_range(2..=200);
        let sigma = rng.gen_range(0.3..2.0);
        let p = ModelParams::new(sigma, 1.0).unwrap();
        let grid = Grid1D::new(rng.gen_range(1.0..20.0), m).unwrap();
        let values: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
        let u = Field::new(grid, values, 0.0).unwrap();
        let fast = solve_pressure_neumann(&u, &p).unwrap();
        let dense = dense_pressure(&u, &p);
        for (a, b) in fast.values.iter().zip(&dense) {
            worst = worst.max((a - b).abs());
        }
    }
    let mut principle_ok = true;
    for _ in 0..1000 {
        let m = 50;
        let grid = Grid1D::new(5.0, m).unwrap();
        let p = ModelParams::new(rng.gen_range(0.3..2.0), 1.0).unwrap();
        let values: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(0.0, f64::max);
        let u = Field::new(grid, values, 0.0).unwrap();
        let pr = solve_pressure_neumann(&u, &p).unwrap();
        principle_ok &= pr.values.iter().all(|&v| v >= lo - 1e-12 && v <= hi + 1e-12);
    }
    verdict(
        10,
        "elliptic oracle equivalence",
        worst <= 1e-10 && principle_ok,
        &format!("worst dense-solve gap {worst:.2e}, maximum principle on 1000 inputs: {principle_ok}"),
    );
}

#[test]
fn c11_critical_threshold() {
    let cb = find_chibar(1e-12);
    let f1 = f_appendix(1.0).unwrap();
    let mut decreasing = true;
    let mut last = f64::INFINITY;
    for i in 1..10_000 {
        let x = 2.0 * i as f64 / 10_000.0;
        let v = f_appendix(x).unwrap();
        decreasing &= v < last;
        last = v;
    }
    let ok = (cb - 1.045).abs() <= 0.001 && f1 > 0.0 && decreasing && (chibar() - cb).abs() < 1e-12;
    verdict(
        11,
        "critical threshold",
        ok,
        &format!("chibar = {cb:.6}, f(1) = {f1:.6}, strictly decreasing: {decreasing}"),
    );
}

#[test]
fn c12_separatrix_bounds() {
    let p = params();
    let cap = p.chi / (2.0 * p.sigma);
    let mut ok = true;
    let mut notes = Vec::new();
    for result in [baseline(), ramp_run(), plateau_run()] {
        ok &= result.max_separatrix_speed <= cap + 1e-6;
    }
    notes.push(format!("per-step speeds capped by chi/(2 sigma) = {cap}"));

    let trace = &ramp_run().trace;
    let mean = (trace.separatrix_at(40.0).unwrap() - trace.separatrix_at(20.0).unwrap()) / 20.0;
    let lower = 1.0 / 3.0 - 0.02;
    ok &= mean >= lower;
    notes.push(format!("mean dh*/dt over [20,40] = {mean:.4}, required >= {lower:.4}"));
    verdict(12, "separatrix bounds", ok, &notes.join("; "));
}
