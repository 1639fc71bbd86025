//! Built-in assertions run by `--check`.

use super::config::{Experiment, ParamValue};
use super::{Cell, SweepResult, CROSSOVER_PARITY_THRESHOLD};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.to_string(), passed, detail }
    }
}

fn summary_f64(result: &SweepResult, key: &str) -> f64 {
    result.summary_value(key).and_then(Cell::as_f64).unwrap_or(f64::NAN)
}

fn param_f64(result: &SweepResult, key: &str) -> f64 {
    match result.metadata.params.get(key) {
        Some(ParamValue::Int(x)) => *x as f64,
        Some(ParamValue::Real(x)) => *x,
        _ => f64::NAN,
    }
}

/// The experiment's own post-conditions evaluated on its rows.
pub fn self_check(result: &SweepResult) -> Vec<CheckOutcome> {
    match result.experiment {
        Experiment::CirculantSpectrum => circulant(result),
        Experiment::FrameRank => frame_rank(result),
        Experiment::DoubleWellSweep => double_well(result),
        Experiment::NearSymmetrySweep => near_symmetry(result),
        Experiment::ParityCensus => parity_census(result),
        Experiment::OracleCheck => oracle(result),
    }
}

fn circulant(r: &SweepResult) -> Vec<CheckOutcome> {
    let max_ipr = summary_f64(r, "max_eigenvector_ipr");
    let bound = summary_f64(r, "ipr_bound");
    let weight = summary_f64(r, "min_top_plane_wave_weight");
    let pointer = summary_f64(r, "pointer_state_ipr");
    let min_eig = summary_f64(r, "min_eigenvalue");
    let trace: f64 = r.column("eigenvalue").iter().flatten().sum();
    vec![
        CheckOutcome::new("plane_wave_weight", weight >= 1.0 - 1e-8, format!("min weight {weight:.12}")),
        CheckOutcome::new("ipr_bound", max_ipr <= bound, format!("max ipr {max_ipr:.6e} vs bound {bound:.6e}")),
        CheckOutcome::new(
            "pointer_contrast",
            pointer >= 10.0 * max_ipr,
            format!("pointer ipr {pointer:.6e} vs 10x max eigenvector ipr {:.6e}", 10.0 * max_ipr),
        ),
        CheckOutcome::new("positive_semidefinite", min_eig >= -1e-10, format!("min eigenvalue {min_eig:e}")),
        CheckOutcome::new("unit_trace", (trace - 1.0).abs() <= 1e-12, format!("eigenvalue sum {trace:.15}")),
    ]
}

fn frame_rank(r: &SweepResult) -> Vec<CheckOutcome> {
    let tol = param_f64(r, "tol");
    let k = r.column("k");
    let rank = r.column("effective_rank");
    let ratio = r.column("singular_value_ratio");
    let mut out = Vec::new();
    for i in 0..r.rows.len() {
        let (k, rank, ratio) = (k[i].unwrap_or(0.0), rank[i].unwrap_or(-1.0), ratio[i].unwrap_or(f64::NAN));
        let consistent = if ratio >= tol { rank == k } else { rank < k };
        out.push(CheckOutcome::new(
            "rank_matches_conditioning",
            consistent && rank >= 1.0,
            format!("row {i}: k={k} rank={rank} ratio={ratio:e} tol={tol:e}"),
        ));
    }
    out
}

fn double_well(r: &SweepResult) -> Vec<CheckOutcome> {
    let a = param_f64(r, "a");
    let b = r.column("b");
    let minor = r.column("minor_component");
    let parity = r.column("parity_score");
    let mut out = Vec::new();
    for i in 0..r.rows.len() {
        let (b, minor, parity) = (b[i].unwrap_or(f64::NAN), minor[i].unwrap_or(f64::NAN), parity[i].unwrap_or(f64::NAN));
        if b == 0.0 {
            out.push(CheckOutcome::new(
                "symmetric_wells_delocalize",
                (minor - 0.5f64.sqrt()).abs() <= 1e-12 && (parity.abs() - 1.0).abs() <= 1e-12,
                format!("b=0: minor {minor:.15}, parity {parity:.15}"),
            ));
        } else if b >= 10.0 * a {
            let prediction = a / (2.0 * b);
            out.push(CheckOutcome::new(
                "small_angle_prediction",
                (minor - prediction).abs() <= 0.1 * prediction,
                format!("b={b}: minor {minor:.6e} vs a/2b {prediction:.6e}"),
            ));
        }
    }
    out
}

fn near_symmetry(r: &SweepResult) -> Vec<CheckOutcome> {
    let eps = r.column("epsilon");
    let parities: Vec<Vec<Option<f64>>> = (0..3).map(|i| r.column(&format!("parity_{i}"))).collect();
    let at = |row: usize| -> Vec<f64> { parities.iter().map(|p| p[row].unwrap_or(f64::NAN)).collect() };
    let mut out = Vec::new();
    let Some(zero) = eps.iter().position(|e| *e == Some(0.0)) else {
        return vec![CheckOutcome::new("has_symmetric_point", false, "no epsilon = 0 row".into())];
    };
    let base = at(zero);
    let definite = base.iter().all(|p| (p.abs() - 1.0).abs() <= 1e-8);
    out.push(CheckOutcome::new("definite_parity_at_zero", definite, format!("parities {base:?}")));
    for (i, e) in eps.iter().enumerate() {
        let e = e.unwrap_or(f64::NAN);
        if e != 0.0 && e.abs() <= 1e-6 {
            let shift = at(i).iter().zip(&base).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            out.push(CheckOutcome::new("continuity", shift < 1e-4, format!("epsilon={e:e}: max shift {shift:e}")));
        }
    }
    let crossover = r.summary_value("crossover_epsilon").and_then(Cell::as_f64);
    out.push(CheckOutcome::new(
        "crossover_found",
        crossover.is_some(),
        format!("first epsilon with record parity < {CROSSOVER_PARITY_THRESHOLD}: {crossover:?}"),
    ));
    out
}

fn parity_census(r: &SweepResult) -> Vec<CheckOutcome> {
    let trials = param_f64(r, "trials");
    let evaluated = summary_f64(r, "non_degenerate_trials");
    let passing = summary_f64(r, "passing_trials");
    vec![
        CheckOutcome::new(
            "parity_counts",
            evaluated > 0.0 && passing == evaluated,
            format!("{passing}/{evaluated} non-degenerate trials have the expected counts"),
        ),
        CheckOutcome::new(
            "mostly_non_degenerate",
            evaluated >= 0.95 * trials,
            format!("{evaluated} of {trials} trials non-degenerate"),
        ),
    ]
}

fn oracle(r: &SweepResult) -> Vec<CheckOutcome> {
    let value_err = r.column("eigenvalue_error");
    let vector_err = r.column("eigenvector_error");
    let gap = r.column("min_gap");
    let mut worst_value = 0.0f64;
    let mut worst_vector = 0.0f64;
    for i in 0..r.rows.len() {
        if gap[i].unwrap_or(0.0) > 1e-6 {
            worst_value = worst_value.max(value_err[i].unwrap_or(f64::INFINITY));
            worst_vector = worst_vector.max(vector_err[i].unwrap_or(f64::INFINITY));
        }
    }
    vec![
        CheckOutcome::new("eigenvalues", worst_value <= 1e-10, format!("max error {worst_value:e}")),
        CheckOutcome::new("eigenvectors", worst_vector <= 1e-8, format!("max error {worst_vector:e}")),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::{run_double_well_sweep, run_oracle_check};

    #[test]
    fn default_style_runs_pass() {
        let r = run_double_well_sweep(0.01, &[0.0, 0.1, 0.2, 0.5, 1.0]).unwrap();
        let checks = self_check(&r);
        assert_eq!(checks.len(), 5);
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");

        let r = run_oracle_check(&[0.1], &[0.0]).unwrap();
        assert!(self_check(&r).iter().all(|c| c.passed));
    }

    #[test]
    fn tampered_result_fails() {
        let mut r = run_double_well_sweep(0.01, &[0.0, 0.5]).unwrap();
        r.rows[1][1] = Cell::Real(0.5);
        assert!(self_check(&r).iter().any(|c| !c.passed));
    }
}
