//! Experiment selection and `key=value` parameter validation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use super::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Experiment {
    CirculantSpectrum,
    FrameRank,
    DoubleWellSweep,
    NearSymmetrySweep,
    ParityCensus,
    OracleCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::CirculantSpectrum,
        Experiment::FrameRank,
        Experiment::DoubleWellSweep,
        Experiment::NearSymmetrySweep,
        Experiment::ParityCensus,
        Experiment::OracleCheck,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::CirculantSpectrum => "circulant_spectrum",
            Experiment::FrameRank => "frame_rank",
            Experiment::DoubleWellSweep => "double_well_sweep",
            Experiment::NearSymmetrySweep => "near_symmetry_sweep",
            Experiment::ParityCensus => "parity_census",
            Experiment::OracleCheck => "oracle_check",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    pub fn params(&self) -> &'static [ParamSpec] {
        match self {
            Experiment::CirculantSpectrum => CIRCULANT_PARAMS,
            Experiment::FrameRank => FRAME_RANK_PARAMS,
            Experiment::DoubleWellSweep => DOUBLE_WELL_PARAMS,
            Experiment::NearSymmetrySweep => NEAR_SYMMETRY_PARAMS,
            Experiment::ParityCensus => PARITY_CENSUS_PARAMS,
            Experiment::OracleCheck => ORACLE_CHECK_PARAMS,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn name(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    List(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Int,
    Real,
    List,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Range {
    /// Integer `>= min`, optionally `<= max`, optionally odd.
    Int { min: i64, max: Option<i64>, odd: bool },
    Positive,
    NonNegative,
    /// Open interval.
    Between(f64, f64),
    Any,
    /// Strictly ascending list of values in the given scalar range.
    Ascending(&'static Range),
    /// Ascending list that must contain zero.
    AscendingWithZero,
    /// Ascending list of integers `>= min`.
    AscendingInts { min: i64 },
}

impl Range {
    fn describe(&self) -> String {
        match self {
            Range::Int { min, max, odd } => {
                let parity = if *odd { "odd " } else { "" };
                match max {
                    Some(max) => format!("an {parity}integer in [{min}, {max}]"),
                    None => format!("an {parity}integer >= {min}"),
                }
            }
            Range::Positive => "a real > 0".into(),
            Range::NonNegative => "a real >= 0".into(),
            Range::Between(lo, hi) => format!("a real in ({lo}, {hi})"),
            Range::Any => "a finite real".into(),
            Range::Ascending(inner) => format!("an ascending list, each {}", inner.describe()),
            Range::AscendingWithZero => "an ascending list of reals containing 0".into(),
            Range::AscendingInts { min } => format!("an ascending list of integers >= {min}"),
        }
    }

    fn admits(&self, x: f64) -> bool {
        match self {
            Range::Int { min, max, odd } => {
                x.fract() == 0.0
                    && x >= *min as f64
                    && max.is_none_or(|m| x <= m as f64)
                    && (!odd || (x as i64) % 2 != 0)
            }
            Range::Positive => x > 0.0,
            Range::NonNegative => x >= 0.0,
            Range::Between(lo, hi) => x > *lo && x < *hi,
            Range::Any => true,
            Range::Ascending(inner) => inner.admits(x),
            Range::AscendingWithZero => true,
            Range::AscendingInts { min } => x.fract() == 0.0 && x >= *min as f64,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub key: &'static str,
    pub kind: ParamKind,
    pub default: &'static str,
    pub range: Range,
    pub help: &'static str,
}

impl ParamSpec {
    pub fn range_description(&self) -> String {
        self.range.describe()
    }
}

const CIRCULANT_PARAMS: &[ParamSpec] = &[
    ParamSpec {
        key: "n",
        kind: ParamKind::Int,
        default: "256",
        range: Range::Int { min: 16, max: Some(1024), odd: false },
        help: "grid points",
    },
    ParamSpec { key: "length", kind: ParamKind::Real, default: "40", range: Range::Positive, help: "ring circumference L" },
    ParamSpec {
        key: "lambda",
        kind: ParamKind::Real,
        default: "0.5",
        range: Range::NonNegative,
        help: "dephasing strength multiplying (x' - x'')²",
    },
    ParamSpec {
        key: "pointer_width",
        kind: ParamKind::Real,
        default: "1",
        range: Range::Positive,
        help: "inverse width a of the comparison pointer state",
    },
];

const FRAME_RANK_PARAMS: &[ParamSpec] = &[
    ParamSpec {
        key: "k_values",
        kind: ParamKind::List,
        default: "3,10",
        range: Range::AscendingInts { min: 1 },
        help: "frame sizes",
    },
    ParamSpec {
        key: "delta_values",
        kind: ParamKind::List,
        default: "0.01,1",
        range: Range::Ascending(&Range::Positive),
        help: "distance between neighbouring centers",
    },
    ParamSpec { key: "a", kind: ParamKind::Real, default: "1", range: Range::Positive, help: "inverse packet width" },
    ParamSpec {
        key: "tol",
        kind: ParamKind::Real,
        default: "1e-8",
        range: Range::Between(0.0, 1.0),
        help: "relative singular value cutoff",
    },
    ParamSpec {
        key: "n",
        kind: ParamKind::Int,
        default: "512",
        range: Range::Int { min: 16, max: Some(1024), odd: false },
        help: "grid points",
    },
    ParamSpec { key: "length", kind: ParamKind::Real, default: "40", range: Range::Positive, help: "ring circumference L" },
];

const DOUBLE_WELL_PARAMS: &[ParamSpec] = &[
    ParamSpec { key: "a", kind: ParamKind::Real, default: "0.01", range: Range::Positive, help: "tunneling coherence" },
    ParamSpec {
        key: "b_values",
        kind: ParamKind::List,
        default: "0,0.1,0.2,0.5,1",
        range: Range::Ascending(&Range::NonNegative),
        help: "well asymmetries",
    },
];

const NEAR_SYMMETRY_PARAMS: &[ParamSpec] = &[
    ParamSpec { key: "a", kind: ParamKind::Real, default: "0.1", range: Range::Positive, help: "nearest-neighbour coupling" },
    ParamSpec { key: "c", kind: ParamKind::Real, default: "0", range: Range::Any, help: "middle diagonal entry" },
    ParamSpec {
        key: "epsilon_values",
        kind: ParamKind::List,
        default: "0,1e-6,1e-4,1e-2,0.1,1",
        range: Range::AscendingWithZero,
        help: "asymmetry added to the last diagonal entry",
    },
];

const PARITY_CENSUS_PARAMS: &[ParamSpec] = &[
    ParamSpec {
        key: "dim",
        kind: ParamKind::Int,
        default: "5",
        range: Range::Int { min: 3, max: Some(1023), odd: true },
        help: "matrix dimension 2n+1",
    },
    ParamSpec {
        key: "trials",
        kind: ParamKind::Int,
        default: "100",
        range: Range::Int { min: 1, max: Some(1_000_000), odd: false },
        help: "number of seeded matrices",
    },
    ParamSpec {
        key: "gap_threshold",
        kind: ParamKind::Real,
        default: "1e-6",
        range: Range::Positive,
        help: "trials with a smaller eigenvalue gap are flagged degenerate",
    },
];

const ORACLE_CHECK_PARAMS: &[ParamSpec] = &[
    ParamSpec {
        key: "a_values",
        kind: ParamKind::List,
        default: "1e-3,1e-2,0.1,0.5,1",
        range: Range::Ascending(&Range::Positive),
        help: "couplings a",
    },
    ParamSpec {
        key: "c_values",
        kind: ParamKind::List,
        default: "-0.5,-0.1,0,0.1,0.5",
        range: Range::Ascending(&Range::Any),
        help: "middle diagonal entries c",
    },
];

/// A validated request to run one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub params: BTreeMap<String, ParamValue>,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

fn config_error(msg: impl Into<String>) -> LabError {
    LabError::Config(msg.into())
}

fn parse_value(spec: &ParamSpec, raw: &str) -> Result<ParamValue, LabError> {
    let key = spec.key;
    let bad = |what: &str| config_error(format!("parameter `{key}`: {what} (expected {})", spec.range_description()));
    let parse_real = |s: &str| -> Result<f64, LabError> {
        let x: f64 = s.trim().parse().map_err(|_| bad(&format!("cannot parse `{}` as a number", s.trim())))?;
        if !x.is_finite() {
            return Err(bad("value must be finite"));
        }
        Ok(x)
    };
    let value = match spec.kind {
        ParamKind::Int => {
            let x: i64 = raw.trim().parse().map_err(|_| bad(&format!("cannot parse `{}` as an integer", raw.trim())))?;
            if !spec.range.admits(x as f64) {
                return Err(bad(&format!("{x} is out of range")));
            }
            ParamValue::Int(x)
        }
        ParamKind::Real => {
            let x = parse_real(raw)?;
            if !spec.range.admits(x) {
                return Err(bad(&format!("{x} is out of range")));
            }
            ParamValue::Real(x)
        }
        ParamKind::List => {
            if raw.trim().is_empty() {
                return Err(bad("list is empty"));
            }
            let xs = raw.split(',').map(parse_real).collect::<Result<Vec<_>, _>>()?;
            if let Some(x) = xs.iter().find(|x| !spec.range.admits(**x)) {
                return Err(bad(&format!("{x} is out of range")));
            }
            if xs.windows(2).any(|w| w[0] >= w[1]) {
                return Err(bad("values must be strictly ascending"));
            }
            if spec.range == Range::AscendingWithZero && !xs.contains(&0.0) {
                return Err(bad("list must include 0"));
            }
            ParamValue::List(xs)
        }
    };
    Ok(value)
}

impl ExperimentConfig {
    /// Validates `key=value` overrides against the experiment's parameter
    /// table and fills every other parameter with its default.
    pub fn new(
        experiment: Experiment,
        overrides: &[(String, String)],
        seed: u64,
        output_path: Option<PathBuf>,
        format: Format,
    ) -> Result<Self, LabError> {
        let specs = experiment.params();
        let mut params = BTreeMap::new();
        for (key, raw) in overrides {
            let spec = specs.iter().find(|s| s.key == key).ok_or_else(|| {
                let known: Vec<&str> = specs.iter().map(|s| s.key).collect();
                config_error(format!(
                    "unknown parameter `{key}` for {experiment} (known: {})",
                    known.join(", ")
                ))
            })?;
            if params.contains_key(key) {
                return Err(config_error(format!("parameter `{key}` given more than once")));
            }
            params.insert(key.clone(), parse_value(spec, raw)?);
        }
        for spec in specs {
            if !params.contains_key(spec.key) {
                params.insert(spec.key.to_string(), parse_value(spec, spec.default)?);
            }
        }
        Ok(Self { experiment, params, seed, output_path, format })
    }

    pub fn with_defaults(experiment: Experiment) -> Self {
        Self::new(experiment, &[], 0, None, Format::Csv).expect("defaults are valid")
    }

    /// Parses `key=value`.
    pub fn parse_assignment(raw: &str) -> Result<(String, String), LabError> {
        match raw.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
            _ => Err(config_error(format!("expected key=value, got `{raw}`"))),
        }
    }

    pub fn int(&self, key: &str) -> i64 {
        match self.params.get(key) {
            Some(ParamValue::Int(x)) => *x,
            other => panic!("parameter `{key}` is not an integer: {other:?}"),
        }
    }

    pub fn real(&self, key: &str) -> f64 {
        match self.params.get(key) {
            Some(ParamValue::Real(x)) => *x,
            Some(ParamValue::Int(x)) => *x as f64,
            other => panic!("parameter `{key}` is not a real: {other:?}"),
        }
    }

    pub fn list(&self, key: &str) -> &[f64] {
        match self.params.get(key) {
            Some(ParamValue::List(xs)) => xs,
            other => panic!("parameter `{key}` is not a list: {other:?}"),
        }
    }
}
