//! Flat `key = value` experiment configs, one experiment per file.
//!
//! Lines starting with `#` are comments. Lists are comma separated; an
//! explicit probe matrix is written row-major as `re,im;re,im;...`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use qlimit::channel::WeightVector;
use qlimit::{DensityMatrix, Matrix, C64};

use crate::error::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    CmConvergence,
    NormLimit,
    PsiStarSweep,
    StinespringPeak,
    WeylInvariance,
    EbTensor,
    OutputCloud,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::CmConvergence,
        ExperimentKind::NormLimit,
        ExperimentKind::PsiStarSweep,
        ExperimentKind::StinespringPeak,
        ExperimentKind::WeylInvariance,
        ExperimentKind::EbTensor,
        ExperimentKind::OutputCloud,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::CmConvergence => "cm-convergence",
            ExperimentKind::NormLimit => "norm-limit",
            ExperimentKind::PsiStarSweep => "psistar-sweep",
            ExperimentKind::StinespringPeak => "stinespring-peak",
            ExperimentKind::WeylInvariance => "weyl-invariance",
            ExperimentKind::EbTensor => "eb-tensor",
            ExperimentKind::OutputCloud => "output-cloud",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown experiment '{s}'"))
    }
}

/// Channel family sampled by the Monte-Carlo experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    MixedUnitary,
    Stinespring,
    Depolarizing,
}

impl FromStr for ChannelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mixed-unitary" => Ok(ChannelKind::MixedUnitary),
            "stinespring" => Ok(ChannelKind::Stinespring),
            "depolarizing" => Ok(ChannelKind::Depolarizing),
            _ => Err(format!("unknown channel '{s}' (mixed-unitary, stinespring, depolarizing)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProbeSpec {
    /// `aa*` with `a = (1, …, 1)/√k`.
    FlatRankOne,
    /// One Haar-random pure state, shared by every trial of a run.
    RandomPure,
    Explicit(DensityMatrix),
}

impl ProbeSpec {
    pub fn descriptor(&self) -> &'static str {
        match self {
            ProbeSpec::FlatRankOne => "flat-rank-one",
            ProbeSpec::RandomPure => "random-pure",
            ProbeSpec::Explicit(_) => "explicit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format '{s}' (csv, json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub channel: ChannelKind,
    /// Output dimension (number of unitaries for mixed-unitary channels).
    pub k: usize,
    pub weights: Option<WeightVector>,
    pub t: Option<f64>,
    pub t_grid: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub m: usize,
    pub probe: ProbeSpec,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub restarts: usize,
    pub iter_cap: usize,
    /// Weights `(r, (1-r)/(k-1), …)` swept by `psistar-sweep`.
    pub r_grid: Vec<f64>,
    /// `(a, b)` of the Weyl operator used by `weyl-invariance`.
    pub weyl: (usize, usize),
    /// Input dimension of the entanglement-breaking factor.
    pub eb_in: usize,
    pub eb_outcomes: usize,
    pub eb_out: usize,
    /// Input dimension of the Stinespring factor in `eb-tensor`.
    pub psi_in: usize,
    pub lambda: f64,
}

const KEYS: &[&str] = &[
    "experiment",
    "channel",
    "k",
    "weights",
    "t",
    "t_grid",
    "n_grid",
    "trials",
    "seed",
    "m",
    "probe",
    "probe_matrix",
    "output",
    "format",
    "restarts",
    "iter_cap",
    "r_grid",
    "weyl",
    "eb_in",
    "eb_outcomes",
    "eb_out",
    "psi_in",
    "lambda",
];

fn err(field: &str, message: impl Into<String>) -> LabError {
    LabError::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

struct Fields(BTreeMap<String, String>);

impl Fields {
    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, LabError>
    where
        T::Err: fmt::Display,
    {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|e| err(key, format!("'{v}': {e}"))))
            .transpose()
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, LabError>
    where
        T::Err: fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|item| {
                        let item = item.trim();
                        item.parse::<T>().map_err(|e| err(key, format!("'{item}': {e}")))
                    })
                    .collect()
            })
            .transpose()
    }
}

fn parse_complex(entry: &str) -> Option<C64> {
    let (re, im) = entry.split_once(',')?;
    Some(C64::new(re.trim().parse().ok()?, im.trim().parse().ok()?))
}

/// Row-major `re,im;re,im;...` into a square matrix.
pub fn parse_matrix(text: &str) -> Result<Matrix, LabError> {
    let entries = text
        .split(';')
        .map(|e| parse_complex(e).ok_or_else(|| err("probe_matrix", format!("bad entry '{}'", e.trim()))))
        .collect::<Result<Vec<_>, _>>()?;
    let n = (entries.len() as f64).sqrt().round() as usize;
    if n * n != entries.len() || n == 0 {
        return Err(err("probe_matrix", format!("{} entries do not form a square matrix", entries.len())));
    }
    Matrix::new(n, n, entries).map_err(|e| err("probe_matrix", e.to_string()))
}

fn positive(field: &str, v: usize) -> Result<usize, LabError> {
    if v == 0 {
        return Err(err(field, "must be positive"));
    }
    Ok(v)
}

impl ExperimentConfig {
    /// Parses and validates a config document.
    pub fn parse(text: &str) -> Result<Self, LabError> {
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("line", format!("{}: expected key = value", lineno + 1)))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(err(key, "unknown key"));
            }
            if map.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(err(key, "given more than once"));
            }
        }
        Self::from_fields(Fields(map))
    }

    fn from_fields(f: Fields) -> Result<Self, LabError> {
        let experiment: ExperimentKind = f.get("experiment")?.ok_or_else(|| err("experiment", "missing"))?;
        let default_channel = match experiment {
            ExperimentKind::StinespringPeak => ChannelKind::Stinespring,
            _ => ChannelKind::MixedUnitary,
        };
        let channel = f.get("channel")?.unwrap_or(default_channel);
        let raw_weights: Option<Vec<f64>> = f.list("weights")?;
        let k = match (f.get::<usize>("k")?, &raw_weights) {
            (Some(k), Some(w)) if w.len() != k => {
                return Err(err("weights", format!("{} weights given for k = {k}", w.len())));
            }
            (Some(k), _) => positive("k", k)?,
            (None, Some(w)) => w.len(),
            (None, None) => return Err(err("k", "missing")),
        };
        let weights = raw_weights
            .map(|w| WeightVector::new(w).map_err(|e| err("weights", e.to_string())))
            .transpose()?;

        let t: Option<f64> = f.get("t")?;
        let t_grid = f.list("t_grid")?.or_else(|| t.map(|t| vec![t])).unwrap_or_default();
        for &t in t.iter().chain(&t_grid) {
            if !(t > 0.0 && t < 1.0) {
                return Err(err("t", format!("{t} is not in (0, 1)")));
            }
        }
        let n_grid: Vec<usize> = f.list("n_grid")?.unwrap_or_default();
        for &n in &n_grid {
            positive("n_grid", n)?;
        }
        let trials = positive("trials", f.get("trials")?.unwrap_or(1))?;
        let m = positive("m", f.get("m")?.unwrap_or(1))?;
        let probe = match f.raw("probe").unwrap_or("flat-rank-one") {
            "flat-rank-one" => ProbeSpec::FlatRankOne,
            "random-pure" => ProbeSpec::RandomPure,
            "explicit" => {
                let text = f.raw("probe_matrix").ok_or_else(|| err("probe_matrix", "required for explicit probes"))?;
                let a = parse_matrix(text)?;
                if a.rows() != k {
                    return Err(err("probe_matrix", format!("dimension {} differs from k = {k}", a.rows())));
                }
                ProbeSpec::Explicit(DensityMatrix::new(a).map_err(|e| err("probe_matrix", e.to_string()))?)
            }
            other => return Err(err("probe", format!("unknown probe '{other}'"))),
        };
        let weyl = match f.list::<usize>("weyl")? {
            None => (1, 1),
            Some(v) if v.len() == 2 => (v[0], v[1]),
            Some(_) => return Err(err("weyl", "expected two integers a,b")),
        };
        let lambda = f.get("lambda")?.unwrap_or(0.5);
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(err("lambda", "must lie in (0, 1]"));
        }

        let cfg = ExperimentConfig {
            experiment,
            channel,
            k,
            weights,
            t,
            t_grid,
            n_grid,
            trials,
            seed: f.get("seed")?.unwrap_or(0),
            m,
            probe,
            output: f.raw("output").map(PathBuf::from),
            format: f.get("format")?.unwrap_or_default(),
            restarts: positive("restarts", f.get("restarts")?.unwrap_or(3))?,
            iter_cap: positive("iter_cap", f.get("iter_cap")?.unwrap_or(200))?,
            r_grid: f.list("r_grid")?.unwrap_or_default(),
            weyl,
            eb_in: positive("eb_in", f.get("eb_in")?.unwrap_or(4))?,
            eb_outcomes: positive("eb_outcomes", f.get("eb_outcomes")?.unwrap_or(2))?,
            eb_out: positive("eb_out", f.get("eb_out")?.unwrap_or(2))?,
            psi_in: positive("psi_in", f.get("psi_in")?.unwrap_or(2))?,
            lambda,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), LabError> {
        use ExperimentKind::*;
        let needs_grid = !matches!(self.experiment, PsiStarSweep | StinespringPeak);
        if needs_grid && self.n_grid.is_empty() {
            return Err(err("n_grid", "missing"));
        }
        let samples_channel = matches!(self.experiment, CmConvergence | NormLimit | OutputCloud);
        if samples_channel && self.channel == ChannelKind::Stinespring && self.t.is_none() {
            return Err(err("t", "required for stinespring channels"));
        }
        let mixed = matches!(self.experiment, WeylInvariance | PsiStarSweep)
            || (samples_channel && self.channel == ChannelKind::MixedUnitary);
        if mixed && self.k < 2 {
            return Err(err("k", "mixed-unitary channels need k >= 2"));
        }
        if self.experiment == PsiStarSweep {
            for &r in &self.r_grid {
                if !(r > 0.0 && r < 1.0) {
                    return Err(err("r_grid", format!("{r} is not in (0, 1)")));
                }
            }
        }
        if self.experiment == StinespringPeak {
            if self.t_grid.is_empty() {
                return Err(err("t_grid", "missing"));
            }
            if self.k < 2 {
                return Err(err("k", "need k >= 2"));
            }
        }
        if self.experiment == CmConvergence {
            // Stinespring input dimensions depend on t and are checked when sampled
            let n = *self.n_grid.iter().min().expect("n_grid checked above");
            if self.channel != ChannelKind::Stinespring && self.m > n {
                return Err(err("m", format!("exceeds the smallest input dimension {n}")));
            }
        }
        if self.experiment == EbTensor {
            if self.eb_outcomes > self.eb_in {
                return Err(err("eb_outcomes", "a projective POVM has at most eb_in outcomes"));
            }
            if let Some(&n) = self.n_grid.iter().min() {
                if self.psi_in > self.k * n {
                    return Err(err("psi_in", format!("exceeds k·n = {}", self.k * n)));
                }
            }
        }
        Ok(())
    }

    /// Weights for mixed-unitary experiments, flat unless given.
    pub fn weight_vector(&self) -> WeightVector {
        self.weights
            .clone()
            .unwrap_or_else(|| WeightVector::flat(self.k).expect("k >= 1 after validation"))
    }
}
