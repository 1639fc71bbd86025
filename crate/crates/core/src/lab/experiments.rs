use std::collections::BTreeMap;

use rayon::prelude::*;

use super::config::{Experiment, ExperimentConfig, ParamValue};
use super::{Cell, LabError, RunMetadata, SweepResult, VERSION};
use crate::decoherence::{constant_rho, dephase, DephasingKernel};
use crate::grid_states::{effective_rank, gaussian_state, gram_matrix, singular_values, GaussianParams, Grid, PointerFrame};
use crate::spectra::{
    self, eigh_real, localization, oracle_3x3, parity_score, random_reflection_symmetric, resolve_clusters,
    swap_parity, twisted_shift_observable, RecordModel2, RecordModel3,
};

/// A record is called localized once the largest `|parity_score|` among its
/// eigenvectors falls below this.
pub const CROSSOVER_PARITY_THRESHOLD: f64 = 0.9;

/// Eigenvalues closer than this (relative to the largest) are treated as one
/// degenerate cluster in the circulant experiment.
const CLUSTER_GAP: f64 = 1e-9;

/// Parity scores within this of ±1 count as definite parity.
const PARITY_TOLERANCE: f64 = 1e-8;

type Params = BTreeMap<String, ParamValue>;

fn params(entries: &[(&str, ParamValue)]) -> Params {
    entries.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn result(
    experiment: Experiment,
    columns: &[&str],
    rows: Vec<Vec<Cell>>,
    summary: Vec<(&str, Cell)>,
    params: Params,
    seed: u64,
    conventions: &[(&str, &str)],
) -> SweepResult {
    SweepResult {
        experiment,
        columns: columns.iter().map(|c| c.to_string()).collect(),
        rows,
        summary: summary.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        metadata: RunMetadata {
            version: VERSION.to_string(),
            seed,
            params,
            conventions: conventions.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            timing: None,
        },
    }
}

/// Dispatches a validated configuration to its experiment.
pub fn run(config: &ExperimentConfig) -> Result<SweepResult, LabError> {
    let mut out = match config.experiment {
        Experiment::CirculantSpectrum => run_circulant_spectrum(
            config.int("n") as usize,
            config.real("length"),
            config.real("lambda"),
            config.real("pointer_width"),
        )?,
        Experiment::FrameRank => {
            let ks: Vec<usize> = config.list("k_values").iter().map(|&k| k as usize).collect();
            let grid = Grid::new(config.int("n") as usize, config.real("length"))?;
            run_frame_rank(&ks, config.list("delta_values"), config.real("a"), config.real("tol"), &grid)?
        }
        Experiment::DoubleWellSweep => run_double_well_sweep(config.real("a"), config.list("b_values"))?,
        Experiment::NearSymmetrySweep => {
            run_near_symmetry_sweep(config.real("a"), config.real("c"), config.list("epsilon_values"))?
        }
        Experiment::ParityCensus => run_parity_census(
            config.int("dim") as usize,
            config.int("trials") as usize,
            config.seed,
            config.real("gap_threshold"),
        )?,
        Experiment::OracleCheck => run_oracle_check(config.list("a_values"), config.list("c_values"))?,
    };
    out.metadata.params = config.params.clone();
    out.metadata.seed = config.seed;
    Ok(out)
}

/// Spectrum of the dephased uniform density on a ring of `n` points.
///
/// The circulant matrix is diagonalized, then every cluster of (numerically)
/// degenerate eigenvalues is rotated onto single Fourier modes using the
/// twisted shift observable. One row per eigenvector, plus a final row for a
/// Gaussian pointer state of inverse width `pointer_width` on the same grid.
pub fn run_circulant_spectrum(n: usize, length: f64, lambda: f64, pointer_width: f64) -> Result<SweepResult, LabError> {
    if n < 16 {
        return Err(LabError::Config(format!("parameter `n`: need at least 16 points, got {n}")));
    }
    let grid = Grid::new(n, length)?;
    let kernel = DephasingKernel::new(&grid, lambda)?;
    let rho = dephase(&constant_rho(&grid), &kernel)?;
    let raw = rho.spectrum()?;
    let spectrum = resolve_clusters(&raw, rho.entries(), &twisted_shift_observable(n), CLUSTER_GAP)?;

    let reports: Vec<_> = (0..n)
        .into_par_iter()
        .map(|i| localization(spectrum.vector(i).as_slice(), Some(&grid)))
        .collect();
    let mut rows: Vec<Vec<Cell>> = reports
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                "eigenvector".into(),
                i.into(),
                spectrum.eigenvalues[i].into(),
                r.ipr.into(),
                r.top_plane_wave_weight.into(),
                r.dominant_frequency.into(),
                r.spatial_stddev.into(),
            ]
        })
        .collect();

    let pointer = gaussian_state(&grid, &GaussianParams::new(0.5 * length, pointer_width)?)
        .map_err(|e| LabError::Config(format!("parameter `pointer_width`: {e}")))?;
    let pointer_report = localization(pointer.unit_vector().as_slice(), Some(&grid));
    rows.push(vec![
        "pointer_state".into(),
        Cell::Null,
        Cell::Null,
        pointer_report.ipr.into(),
        pointer_report.top_plane_wave_weight.into(),
        pointer_report.dominant_frequency.into(),
        pointer_report.spatial_stddev.into(),
    ]);

    let max_ipr = reports.iter().map(|r| r.ipr).fold(0.0, f64::max);
    let min_weight = reports.iter().map(|r| r.top_plane_wave_weight).fold(1.0, f64::min);
    let min_eigenvalue = spectrum.eigenvalues.last().copied().unwrap_or(0.0);
    let summary = vec![
        ("max_eigenvector_ipr", max_ipr.into()),
        ("min_top_plane_wave_weight", min_weight.into()),
        ("min_eigenvalue", min_eigenvalue.into()),
        ("pointer_state_ipr", pointer_report.ipr.into()),
        ("ipr_bound", (2.0 / n as f64).into()),
    ];
    Ok(result(
        Experiment::CirculantSpectrum,
        &["kind", "index", "eigenvalue", "ipr", "top_plane_wave_weight", "frequency", "spatial_stddev"],
        rows,
        summary,
        params(&[
            ("n", ParamValue::Int(n as i64)),
            ("length", ParamValue::Real(length)),
            ("lambda", ParamValue::Real(lambda)),
            ("pointer_width", ParamValue::Real(pointer_width)),
        ]),
        0,
        &[
            ("ipr_bound", "2/n: delocalization bound on eigenvector IPR (tool convention)"),
            ("cluster_gap", "1e-9 relative: eigenvalues this close are resolved by the twisted shift"),
        ],
    ))
}

/// Effective rank of `k` pointer states spaced `delta` apart, for every
/// `(k, delta)` pair.
pub fn run_frame_rank(
    k_values: &[usize],
    delta_values: &[f64],
    a: f64,
    tol: f64,
    grid: &Grid,
) -> Result<SweepResult, LabError> {
    if k_values.is_empty() || delta_values.is_empty() {
        return Err(LabError::Config("frame_rank needs at least one k and one delta".into()));
    }
    if let Some(k) = k_values.iter().find(|&&k| k == 0) {
        return Err(LabError::Config(format!("parameter `k_values`: frame size must be >= 1, got {k}")));
    }
    if let Some(d) = delta_values.iter().find(|d| !(**d > 0.0)) {
        return Err(LabError::Config(format!("parameter `delta_values`: spacing must be > 0, got {d}")));
    }
    let mut rows = Vec::new();
    for &k in k_values {
        for &delta in delta_values {
            let start = 0.5 * grid.length() - 0.5 * (k - 1) as f64 * delta;
            let frame = PointerFrame::evenly_spaced(grid, start, delta, k, a)?;
            let gram = gram_matrix(&frame);
            let rank = effective_rank(&gram, tol)?;
            let sv = singular_values(&gram)?;
            let ratio = sv.last().copied().unwrap_or(0.0) / sv[0];
            rows.push(vec![k.into(), delta.into(), rank.into(), ratio.into()]);
        }
    }
    Ok(result(
        Experiment::FrameRank,
        &["k", "delta", "effective_rank", "singular_value_ratio"],
        rows,
        vec![],
        params(&[
            ("k_values", ParamValue::List(k_values.iter().map(|&k| k as f64).collect())),
            ("delta_values", ParamValue::List(delta_values.to_vec())),
            ("a", ParamValue::Real(a)),
            ("tol", ParamValue::Real(tol)),
            ("n", ParamValue::Int(grid.n_points() as i64)),
            ("length", ParamValue::Real(grid.length())),
        ]),
        0,
        &[],
    ))
}

/// Diagonalizes the two-well record `[[1 + b, a], [a, 1 - b]]` for each `b`.
///
/// `minor_component` is the smaller modulus of the dominant eigenvector,
/// `parity_score` its well-exchange parity, and `prediction` the small-angle
/// estimate `a / 2b` (undefined at `b = 0`).
pub fn run_double_well_sweep(a: f64, b_values: &[f64]) -> Result<SweepResult, LabError> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(LabError::Config(format!("parameter `a`: must be > 0, got {a}")));
    }
    check_ascending("b_values", b_values, |b| b >= 0.0)?;
    let mut rows = Vec::with_capacity(b_values.len());
    let mut crossover = Cell::Null;
    for &b in b_values {
        let spectrum = eigh_real(&RecordModel2::new(a, b).matrix())?;
        let v = spectrum.vector(0);
        let minor = v[0].norm().min(v[1].norm());
        let parity = swap_parity(v.as_slice())?;
        if crossover == Cell::Null && parity.abs() < CROSSOVER_PARITY_THRESHOLD {
            crossover = b.into();
        }
        let prediction = if b > 0.0 { Cell::Real(a / (2.0 * b)) } else { Cell::Null };
        rows.push(vec![b.into(), minor.into(), parity.into(), prediction]);
    }
    Ok(result(
        Experiment::DoubleWellSweep,
        &["b", "minor_component", "parity_score", "prediction"],
        rows,
        vec![("crossover_b", crossover)],
        params(&[("a", ParamValue::Real(a)), ("b_values", ParamValue::List(b_values.to_vec()))]),
        0,
        &[("crossover", "first b with |parity_score| < 0.9 (tool convention)")],
    ))
}

/// Parity and IPR of every eigenvector of the three-site chain with the
/// last diagonal entry raised by `ε`.
///
/// `max_record_parity` is the largest `|parity_score|` among the two
/// dominant eigenvectors (the pair carrying the outer-site records); the
/// crossover is the first `ε >= 0` where it drops below
/// [`CROSSOVER_PARITY_THRESHOLD`].
pub fn run_near_symmetry_sweep(a: f64, c: f64, epsilon_values: &[f64]) -> Result<SweepResult, LabError> {
    check_ascending("epsilon_values", epsilon_values, f64::is_finite)?;
    if !epsilon_values.contains(&0.0) {
        return Err(LabError::Config("parameter `epsilon_values`: must include 0".into()));
    }
    let mut rows = Vec::with_capacity(epsilon_values.len());
    let mut crossover = Cell::Null;
    for &eps in epsilon_values {
        let model = RecordModel3::new(a, c, eps)?;
        let spectrum = eigh_real(&model.matrix())?;
        let mut row: Vec<Cell> = vec![eps.into()];
        let mut parities = [0.0; 3];
        for (i, parity) in parities.iter_mut().enumerate() {
            let v = spectrum.vector(i);
            *parity = parity_score(v.as_slice())?;
            row.push(spectrum.eigenvalues[i].into());
            row.push((*parity).into());
            row.push(spectra::ipr(v.as_slice()).into());
        }
        let record_parity = parities[0].abs().max(parities[1].abs());
        row.push(record_parity.into());
        if crossover == Cell::Null && eps >= 0.0 && record_parity < CROSSOVER_PARITY_THRESHOLD {
            crossover = eps.into();
        }
        rows.push(row);
    }
    Ok(result(
        Experiment::NearSymmetrySweep,
        &[
            "epsilon",
            "eigenvalue_0",
            "parity_0",
            "ipr_0",
            "eigenvalue_1",
            "parity_1",
            "ipr_1",
            "eigenvalue_2",
            "parity_2",
            "ipr_2",
            "max_record_parity",
        ],
        rows,
        vec![("crossover_epsilon", crossover)],
        params(&[
            ("a", ParamValue::Real(a)),
            ("c", ParamValue::Real(c)),
            ("epsilon_values", ParamValue::List(epsilon_values.to_vec())),
        ]),
        0,
        &[("crossover", "first epsilon >= 0 with max_record_parity < 0.9 (tool convention)")],
    ))
}

/// Counts symmetric and antisymmetric eigenvectors of seeded
/// reflection-symmetric matrices. Trial `t` uses seed `seed + t`.
///
/// Trials whose smallest eigenvalue gap is at or below `gap_threshold` are
/// flagged degenerate and excluded from the pass fraction.
pub fn run_parity_census(dim: usize, trials: usize, seed: u64, gap_threshold: f64) -> Result<SweepResult, LabError> {
    if dim < 3 || dim.is_multiple_of(2) {
        return Err(LabError::Config(format!("parameter `dim`: must be odd and >= 3, got {dim}")));
    }
    if trials == 0 {
        return Err(LabError::Config("parameter `trials`: must be >= 1".into()));
    }
    let half = dim / 2;
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<_, LabError> {
            let trial_seed = seed.wrapping_add(t as u64);
            let m = random_reflection_symmetric(dim, trial_seed)?;
            let spectrum = eigh_real(&m)?;
            let min_gap = spectrum.eigenvalues.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
            let scores = (0..dim)
                .map(|i| parity_score(spectrum.vector(i).as_slice()))
                .collect::<Result<Vec<_>, _>>()?;
            let plus = scores.iter().filter(|s| (*s - 1.0).abs() <= PARITY_TOLERANCE).count();
            let minus = scores.iter().filter(|s| (*s + 1.0).abs() <= PARITY_TOLERANCE).count();
            let deviation = scores.iter().map(|s| 1.0 - s.abs()).fold(0.0, f64::max);
            Ok((trial_seed, min_gap, plus, minus, deviation))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::with_capacity(trials + 1);
    let mut evaluated = 0usize;
    let mut passed = 0usize;
    let mut worst_deviation = 0.0f64;
    let mut smallest_gap = f64::INFINITY;
    for (t, (trial_seed, min_gap, plus, minus, deviation)) in outcomes.into_iter().enumerate() {
        let degenerate = min_gap <= gap_threshold;
        smallest_gap = smallest_gap.min(min_gap);
        let pass = if degenerate {
            Cell::Null
        } else {
            evaluated += 1;
            worst_deviation = worst_deviation.max(deviation);
            let ok = plus == half + 1 && minus == half && deviation <= PARITY_TOLERANCE;
            passed += ok as usize;
            Cell::Int(ok as i64)
        };
        rows.push(vec![
            t.into(),
            Cell::Int(trial_seed as i64),
            min_gap.into(),
            plus.into(),
            minus.into(),
            deviation.into(),
            Cell::Int(degenerate as i64),
            pass,
        ]);
    }
    let pass_fraction = if evaluated > 0 { Cell::Real(passed as f64 / evaluated as f64) } else { Cell::Null };
    rows.push(vec![
        "summary".into(),
        Cell::Null,
        smallest_gap.into(),
        Cell::Null,
        Cell::Null,
        worst_deviation.into(),
        Cell::Int((trials - evaluated) as i64),
        pass_fraction.clone(),
    ]);
    Ok(result(
        Experiment::ParityCensus,
        &[
            "trial",
            "seed",
            "min_gap",
            "count_plus",
            "count_minus",
            "max_parity_deviation",
            "degenerate",
            "pass",
        ],
        rows,
        vec![
            ("non_degenerate_trials", evaluated.into()),
            ("passing_trials", passed.into()),
            ("pass_fraction", pass_fraction),
            ("expected_counts", Cell::Text(format!("{}/{}", half + 1, half))),
        ],
        params(&[
            ("dim", ParamValue::Int(dim as i64)),
            ("trials", ParamValue::Int(trials as i64)),
            ("gap_threshold", ParamValue::Real(gap_threshold)),
        ]),
        seed,
        &[("degenerate", "trials with min eigenvalue gap <= gap_threshold are excluded from the pass fraction")],
    ))
}

/// Numerical versus closed-form eigenpairs of the symmetric three-site chain
/// over an `(a, c)` grid.
pub fn run_oracle_check(a_values: &[f64], c_values: &[f64]) -> Result<SweepResult, LabError> {
    check_ascending("a_values", a_values, |a| a > 0.0)?;
    check_ascending("c_values", c_values, f64::is_finite)?;
    let grid: Vec<(f64, f64)> = a_values.iter().flat_map(|&a| c_values.iter().map(move |&c| (a, c))).collect();
    let rows = grid
        .par_iter()
        .map(|&(a, c)| -> Result<Vec<Cell>, LabError> {
            let numeric = eigh_real(&RecordModel3::new(a, c, 0.0)?.matrix())?;
            let exact = oracle_3x3(a, c)?;
            let mut value_err = 0.0f64;
            let mut vector_err = 0.0f64;
            for i in 0..3 {
                value_err = value_err.max((numeric.eigenvalues[i] - exact.eigenvalues[i]).abs());
                let (u, w) = (numeric.real_vector(i), exact.real_vector(i));
                vector_err = vector_err.max((&u - &w).amax().min((&u + &w).amax()));
            }
            let min_gap = exact.eigenvalues.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
            let (s_plus, s_minus) = spectra::oracle_3x3_middle_components(a, c);
            Ok(vec![
                a.into(),
                c.into(),
                value_err.into(),
                vector_err.into(),
                min_gap.into(),
                s_plus.into(),
                s_minus.into(),
            ])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let worst = |col: usize| rows.iter().filter_map(|r| r[col].as_f64()).fold(0.0, f64::max);
    let summary = vec![("max_eigenvalue_error", worst(2).into()), ("max_eigenvector_error", worst(3).into())];
    Ok(result(
        Experiment::OracleCheck,
        &["a", "c", "eigenvalue_error", "eigenvector_error", "min_gap", "s_plus", "s_minus"],
        rows,
        summary,
        params(&[
            ("a_values", ParamValue::List(a_values.to_vec())),
            ("c_values", ParamValue::List(c_values.to_vec())),
        ]),
        0,
        &[],
    ))
}

fn check_ascending(name: &str, values: &[f64], admits: impl Fn(f64) -> bool) -> Result<(), LabError> {
    if values.is_empty() {
        return Err(LabError::Config(format!("parameter `{name}`: list is empty")));
    }
    if let Some(x) = values.iter().find(|&&x| !(x.is_finite() && admits(x))) {
        return Err(LabError::Config(format!("parameter `{name}`: value {x} is out of range")));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LabError::Config(format!("parameter `{name}`: values must be strictly ascending")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_well_rows() {
        let r = run_double_well_sweep(0.01, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(r.columns, vec!["b", "minor_component", "parity_score", "prediction"]);
        let minor = r.column("minor_component");
        assert!((minor[0].unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((minor[1].unwrap() - 0.01).abs() < 0.001);
        assert!((r.column("parity_score")[0].unwrap().abs() - 1.0).abs() < 1e-12);
        assert_eq!(r.rows[0][3], Cell::Null);
        assert_eq!(r.summary_value("crossover_b"), Some(&Cell::Real(0.5)));
    }

    #[test]
    fn strongly_biased_well_barely_mixes() {
        let r = run_double_well_sweep(0.01, &[1.0]).unwrap();
        assert!(r.column("minor_component")[0].unwrap() < 0.006);
    }

    #[test]
    fn near_symmetry_rows() {
        let r = run_near_symmetry_sweep(0.1, 0.0, &[0.0, 1e-6, 1.0]).unwrap();
        let p0 = r.column("parity_0");
        let p1 = r.column("parity_1");
        let p2 = r.column("parity_2");
        assert!((p0[0].unwrap() - 1.0).abs() < 1e-8);
        assert!((p1[0].unwrap() + 1.0).abs() < 1e-8);
        assert!((p2[0].unwrap() - 1.0).abs() < 1e-8);
        assert!((p0[1].unwrap() - p0[0].unwrap()).abs() < 1e-4);
        assert!(r.column("max_record_parity")[2].unwrap() < 0.9);
        assert!(run_near_symmetry_sweep(0.1, 0.0, &[1e-3, 1.0]).is_err());
        assert!(run_near_symmetry_sweep(0.0, 0.0, &[0.0]).is_err());
    }

    #[test]
    fn frame_rank_rows() {
        let grid = Grid::new(512, 40.0).unwrap();
        let r = run_frame_rank(&[1, 3], &[1.0], 1.0, 1e-8, &grid).unwrap();
        let ranks = r.column("effective_rank");
        assert_eq!(ranks, vec![Some(1.0), Some(3.0)]);
    }

    #[test]
    fn small_parity_census() {
        let r = run_parity_census(3, 20, 7, 1e-6).unwrap();
        assert_eq!(r.rows.len(), 21);
        assert_eq!(r.summary_value("pass_fraction"), Some(&Cell::Real(1.0)));
        assert!(run_parity_census(4, 1, 0, 1e-6).is_err());
    }

    #[test]
    fn small_circulant_run() {
        let r = run_circulant_spectrum(32, 40.0, 0.0, 1.0).unwrap();
        assert_eq!(r.rows.len(), 33);
        let eig = r.column("eigenvalue");
        assert!((eig[0].unwrap() - 1.0).abs() < 1e-12);
        assert!(eig[1..32].iter().all(|e| e.unwrap().abs() < 1e-12));
        // top eigenvector is the p = 0 mode
        assert_eq!(r.rows[0][5], Cell::Int(0));
        assert!(run_circulant_spectrum(8, 40.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn run_dispatch_echoes_config() {
        let config = ExperimentConfig::new(
            Experiment::DoubleWellSweep,
            &[("b_values".into(), "0.5".into())],
            9,
            None,
            super::super::Format::Csv,
        )
        .unwrap();
        let r = run(&config).unwrap();
        assert_eq!(r.metadata.seed, 9);
        assert_eq!(r.metadata.params, config.params);
    }
}
