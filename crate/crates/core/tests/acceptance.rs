//! End-to-end acceptance suite. Runs every criterion, prints one PASS/FAIL
//! line each, and exits non-zero if any fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;

use pointerlab::decoherence::{dephase, Basis, DensityMatrix, DephasingKernel};
use pointerlab::grid_states::{
    analytic_overlap, effective_rank, gaussian_state, gram_matrix, inner_product, make_grid, singular_values,
    GaussianParams, PointerFrame,
};
use pointerlab::lab::{
    self, render_csv, render_json, run_circulant_spectrum, run_double_well_sweep, run_near_symmetry_sweep,
    run_parity_census, strip_timing, Cell, Experiment, ExperimentConfig, Format, Timing,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use pointerlab::spectra::{eigh_real, oracle_3x3, RecordModel3};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn closed_form_three_site() -> Outcome {
    let values = [1e-3, 1e-2, 0.1, 0.5, 1.0];
    let offsets = [-0.5, -0.1, 0.0, 0.1, 0.5];
    let (mut worst_value, mut worst_vector) = (0.0f64, 0.0f64);
    for &a in &values {
        for &c in &offsets {
            let numeric = eigh_real(&RecordModel3::new(a, c, 0.0).map_err(err)?.matrix()).map_err(err)?;
            let exact = oracle_3x3(a, c).map_err(err)?;
            for i in 0..3 {
                worst_value = worst_value.max((numeric.eigenvalues[i] - exact.eigenvalues[i]).abs());
                let (u, w) = (numeric.real_vector(i), exact.real_vector(i));
                worst_vector = worst_vector.max((&u - &w).amax().min((&u + &w).amax()));
            }
        }
    }
    // Small-parameter behaviour read off the numerical eigenvectors.
    let a = 0.1;
    let spectrum = eigh_real(&RecordModel3::new(a, 0.0, 0.0).map_err(err)?.matrix()).map_err(err)?;
    let ratio = |i: usize| {
        let v = spectrum.real_vector(i);
        v[1] / v[0]
    };
    let (s_plus, s_minus) = (ratio(0), ratio(2));
    let plus_ok = (s_plus - 2.0 * a).abs() <= 0.02 * 2.0 * a;
    let minus_ok = (s_minus + 1.0 / a).abs() <= 0.02 / a;
    ensure(
        worst_value <= 1e-10 && worst_vector <= 1e-8 && plus_ok && minus_ok,
        format!(
            "max eigenvalue err {worst_value:.2e}, max eigenvector err {worst_vector:.2e}, \
             s+ = {s_plus:.5} (2a = {:.5}), s- = {s_minus:.4} (-1/a = {:.4})",
            2.0 * a,
            -1.0 / a
        ),
    )
}

fn plane_wave_eigenbasis() -> Outcome {
    let r = run_circulant_spectrum(256, 40.0, 0.5, 1.0).map_err(err)?;
    let summary = |k: &str| r.summary_value(k).and_then(Cell::as_f64).unwrap_or(f64::NAN);
    let weight = summary("min_top_plane_wave_weight");
    let max_ipr = summary("max_eigenvector_ipr");
    let pointer = summary("pointer_state_ipr");
    ensure(
        weight >= 1.0 - 1e-8 && max_ipr <= 2.0 / 256.0 && pointer >= 10.0 * max_ipr,
        format!("min weight {weight:.12}, max ipr {max_ipr:.4e} (bound {:.4e}), pointer ipr {pointer:.4e}", 2.0 / 256.0),
    )
}

fn parity_census() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for dim in [5usize, 7] {
        let r = run_parity_census(dim, 100, 1, 1e-6).map_err(err)?;
        let evaluated = r.summary_value("non_degenerate_trials").and_then(Cell::as_f64).unwrap_or(0.0);
        let passing = r.summary_value("passing_trials").and_then(Cell::as_f64).unwrap_or(-1.0);
        ok &= evaluated >= 95.0 && passing == evaluated;
        details.push(format!("dim {dim}: {passing}/{evaluated} non-degenerate trials with counts ({}, {})", dim / 2 + 1, dim / 2));
    }
    ensure(ok, details.join("; "))
}

fn double_well() -> Outcome {
    let a = 0.01;
    let b_values = [0.0, 0.1, 0.2, 0.5, 1.0];
    let r = run_double_well_sweep(a, &b_values).map_err(err)?;
    let minor = r.column("minor_component");
    let mut worst = 0.0f64;
    for (i, &b) in b_values.iter().enumerate().skip(1) {
        let predicted = a / (2.0 * b);
        worst = worst.max((minor[i].unwrap_or(f64::NAN) - predicted).abs() / predicted);
    }
    let symmetric = eigh_real(&pointerlab::spectra::RecordModel2::new(a, 0.0).matrix()).map_err(err)?;
    let h = 0.5f64.sqrt();
    let mut deviation = 0.0f64;
    for (i, expected) in [[h, h], [h, -h]].iter().enumerate() {
        let v = symmetric.real_vector(i);
        let direct = (v[0] - expected[0]).abs().max((v[1] - expected[1]).abs());
        let flipped = (v[0] + expected[0]).abs().max((v[1] + expected[1]).abs());
        deviation = deviation.max(direct.min(flipped));
    }
    ensure(
        worst <= 0.1 && deviation <= 1e-12,
        format!("max relative deviation from a/2b {worst:.4}, b=0 eigenvector deviation {deviation:.2e}"),
    )
}

fn near_symmetry() -> Outcome {
    let eps = [0.0, 1e-6, 1e-4, 1e-2, 0.1, 1.0];
    let r = run_near_symmetry_sweep(0.1, 0.0, &eps).map_err(err)?;
    let mut shift = 0.0f64;
    for i in 0..3 {
        let p = r.column(&format!("parity_{i}"));
        shift = shift.max((p[1].unwrap_or(f64::NAN) - p[0].unwrap_or(f64::NAN)).abs());
    }
    let crossover = r.summary_value("crossover_epsilon").and_then(Cell::as_f64);
    let in_range = crossover.is_some_and(|e| (0.01..=1.0).contains(&e));
    ensure(shift < 1e-4 && in_range, format!("parity shift at 1e-6: {shift:.2e}, crossover epsilon {crossover:?}"))
}

fn random_density(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let b = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let m = &b * b.adjoint();
    let trace = m.trace().re;
    let m = m / Complex64::new(trace, 0.0);
    // Exact Hermitian symmetry before handing it to the constructor.
    DMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

fn dephasing_channel() -> Outcome {
    let grid = make_grid(64, 40.0).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut trace_err, mut herm_err, mut min_eig, mut compose_err) = (0.0f64, 0.0f64, f64::INFINITY, 0.0f64);
    for _ in 0..100 {
        let rho = DensityMatrix::new(random_density(&mut rng, 64), Basis::PositionGrid(grid)).map_err(err)?;
        let (l1, l2) = (rng.gen_range(0.1..2.0), rng.gen_range(0.1..2.0));
        let k1 = DephasingKernel::new(&grid, l1).map_err(err)?;
        let k2 = DephasingKernel::new(&grid, l2).map_err(err)?;
        let k12 = DephasingKernel::new(&grid, l1 + l2).map_err(err)?;
        let once = dephase(&rho, &k1).map_err(err)?;
        trace_err = trace_err.max((once.trace() - rho.trace()).norm());
        let e = once.entries();
        herm_err = herm_err.max((e - e.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max));
        min_eig = min_eig.min(once.min_eigenvalue().map_err(err)?);
        let twice = dephase(&once, &k2).map_err(err)?;
        let direct = dephase(&rho, &k12).map_err(err)?;
        compose_err = compose_err.max((twice.entries() - direct.entries()).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    ensure(
        trace_err <= 1e-12 && herm_err <= 1e-12 && min_eig >= -1e-9 && compose_err <= 1e-12,
        format!("trace err {trace_err:.1e}, hermiticity err {herm_err:.1e}, min eigenvalue {min_eig:.2e}, composition err {compose_err:.1e}"),
    )
}

fn overlap_formula() -> Outcome {
    let (a, length) = (1.0, 40.0);
    let grid = make_grid(512, length).map_err(err)?;
    let x = 0.5 * length;
    let reference = gaussian_state(&grid, &GaussianParams::new(x, a).map_err(err)?).map_err(err)?;
    let mut worst = 0.0f64;
    for d in [0.5, 1.0, 2.0, 4.0] {
        let other = gaussian_state(&grid, &GaussianParams::new(x + d, a).map_err(err)?).map_err(err)?;
        let numeric = inner_product(&reference, &other).map_err(err)?;
        let exact = analytic_overlap(x, x + d, a, length);
        worst = worst.max((numeric - Complex64::new(exact, 0.0)).norm());
    }
    ensure(worst <= 1e-6, format!("max |numeric - exp(-a²d²/2)| = {worst:.2e}"))
}

fn frame_rank() -> Outcome {
    let (a, tol) = (1.0, 1e-8);
    let grid = make_grid(512, 40.0).map_err(err)?;
    let centered = |k: usize, delta: f64| {
        PointerFrame::evenly_spaced(&grid, 20.0 - 0.5 * (k - 1) as f64 * delta, delta, k, a).map(|f| gram_matrix(&f))
    };
    let wide = centered(3, 1.0 / a).map_err(err)?;
    let dense = centered(10, 0.01 / a).map_err(err)?;
    let wide_rank = effective_rank(&wide, tol).map_err(err)?;
    let dense_rank = effective_rank(&dense, tol).map_err(err)?;
    let sv = singular_values(&dense).map_err(err)?;
    let ratio = sv[sv.len() - 1] / sv[0];
    ensure(
        wide_rank == 3 && dense_rank < 10 && ratio < 1e-8,
        format!("k=3 spacing 1/a: rank {wide_rank}; k=10 spacing 0.01/a: rank {dense_rank}, singular ratio {ratio:.2e}"),
    )
}

fn with_timing(mut r: lab::SweepResult) -> lab::SweepResult {
    // Distinct timing values on purpose: they must not affect the comparison.
    static CALLS: std::sync::atomic::AtomicU64 = std::sync::atomic::AtomicU64::new(0);
    let call = CALLS.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
    r.metadata.timing = Some(Timing { timestamp: format!("2026-01-01T00:00:{:02}Z", call % 60), wall_time_seconds: call as f64 });
    r
}

fn cli_output(experiment: Experiment, format: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_pointerlab"))
        .args([experiment.name().replace('_', "-").as_str(), "--format", format, "--seed", "7"])
        .env_remove("POINTERLAB_SEED")
        .output()
        .map_err(err)?;
    if !out.status.success() {
        return Err(format!("{experiment} exited with {}", out.status));
    }
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let mut compared = 0;
    for experiment in Experiment::ALL {
        let config = ExperimentConfig::new(experiment, &[], 7, None, Format::Csv).map_err(err)?;
        let first = with_timing(lab::run(&config).map_err(err)?);
        let second = with_timing(lab::run(&config).map_err(err)?);
        if render_csv(&first) != render_csv(&second) {
            return Err(format!("{experiment}: library CSV differs between runs"));
        }
        if strip_timing(&render_json(&first)) != strip_timing(&render_json(&second)) {
            return Err(format!("{experiment}: library JSON differs between runs"));
        }
        if cli_output(experiment, "csv")? != cli_output(experiment, "csv")? {
            return Err(format!("{experiment}: CLI CSV differs between runs"));
        }
        let json = |bytes: Vec<u8>| strip_timing(&String::from_utf8_lossy(&bytes));
        if json(cli_output(experiment, "json")?) != json(cli_output(experiment, "json")?) {
            return Err(format!("{experiment}: CLI JSON differs between runs"));
        }
        compared += 1;
    }
    Ok(format!("{compared} experiments byte-identical across library and CLI re-runs (CSV and JSON)"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 three-site closed form", closed_form_three_site),
        ("2 plane-wave eigenbasis", plane_wave_eigenbasis),
        ("3 parity census", parity_census),
        ("4 double-well localization", double_well),
        ("5 near-symmetry continuity", near_symmetry),
        ("6 dephasing channel", dephasing_channel),
        ("7 overlap formula", overlap_formula),
        ("8 frame rank", frame_rank),
        ("9 determinism", determinism),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let started = Instant::now();
        let outcome = check();
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{name}] {detail} ({secs:.2}s)"),
            Err(detail) => {
                failures += 1;
                println!("FAIL [{name}] {detail} ({secs:.2}s)");
            }
        }
    }
    println!("acceptance: {}/9 criteria passed", 9 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
