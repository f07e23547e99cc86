//! Experiment configuration: one JSON document, unknown keys rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::packets::Envelope;
use crate::symbols::PhaseSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    UpperBoundSweep,
    KnappSharpness,
    Embedding,
    FlowLemma,
    TubeBound,
    Convergence,
    MeanOracle,
}

impl ExperimentKind {
    /// Prefix of report names.
    pub fn tag(self) -> &'static str {
        match self {
            ExperimentKind::UpperBoundSweep => "sweep",
            ExperimentKind::KnappSharpness => "sharpness",
            ExperimentKind::Embedding => "embedding",
            ExperimentKind::FlowLemma => "flow",
            ExperimentKind::TubeBound => "tube",
            ExperimentKind::Convergence => "converge",
            ExperimentKind::MeanOracle => "oracle",
        }
    }
}

/// Operator whose maximal function an upper-bound sweep measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operator {
    HalfWave,
    Spherical,
    Complex,
}

impl Operator {
    pub fn tag(self) -> &'static str {
        match self {
            Operator::HalfWave => "halfwave",
            Operator::Spherical => "spherical",
            Operator::Complex => "complex",
        }
    }
}

/// Test data of one dyadic shell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFamily {
    Packets,
    Knapp,
    Random,
}

impl TestFamily {
    pub fn tag(self) -> &'static str {
        match self {
            TestFamily::Packets => "packets",
            TestFamily::Knapp => "knapp",
            TestFamily::Random => "random",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhaseConfig {
    /// `|xi|`
    Euclidean,
    /// `sqrt(sum_a d_a xi_a^2)`
    Diagonal { entries: Vec<f64> },
}

impl PhaseConfig {
    pub fn build(&self, dim: usize) -> Result<PhaseSpec> {
        match self {
            PhaseConfig::Euclidean => PhaseSpec::euclidean(dim),
            PhaseConfig::Diagonal { entries } => {
                if entries.len() != dim {
                    return Err(Error::Config(format!(
                        "diagonal phase needs {dim} entries, got {}",
                        entries.len()
                    )));
                }
                PhaseSpec::diagonal(entries)
            }
        }
    }

    pub fn tag(&self) -> String {
        match self {
            PhaseConfig::Euclidean => "euclidean".into(),
            PhaseConfig::Diagonal { entries } => {
                let parts: Vec<String> = entries.iter().map(|e| format!("{e}")).collect();
                format!("diag{}", parts.join("x"))
            }
        }
    }
}

/// Every field has a default; empty lists and absent options select the
/// per-experiment defaults documented on the accessors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    pub dim: usize,
    pub p_list: Vec<f64>,
    pub k_min: Option<u32>,
    pub k_max: Option<u32>,
    pub operator: Operator,
    pub alpha: f64,
    pub families: Vec<TestFamily>,
    pub phases: Vec<PhaseConfig>,
    pub epsilon: f64,
    /// Time interval of the maximal function.
    pub time: Option<[f64; 2]>,
    pub theta: f64,
    pub cone_aperture_deg: f64,
    pub envelope: Envelope,
    pub t_list: Vec<f64>,
    pub delta_list: Vec<f64>,
    /// Shell of the convergence test field.
    pub shell: u32,
    pub grid_points: Option<usize>,
    pub box_length: Option<f64>,
    pub tolerance: Option<f64>,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            dim: 2,
            p_list: Vec::new(),
            k_min: None,
            k_max: None,
            operator: Operator::HalfWave,
            alpha: 1.0,
            families: Vec::new(),
            phases: Vec::new(),
            epsilon: 0.1,
            time: None,
            theta: 0.5,
            cone_aperture_deg: 30.0,
            envelope: Envelope::default(),
            t_list: Vec::new(),
            delta_list: Vec::new(),
            shell: 1,
            grid_points: None,
            box_length: None,
            tolerance: None,
            seed: 0,
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            experiment: Some(kind),
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn kind(&self) -> Result<ExperimentKind> {
        self.experiment
            .ok_or_else(|| Error::Config("no experiment kind given".into()))
    }

    /// Shell range; defaults 3..7 for sweeps, 3..6 for embeddings, 4..8 for
    /// tubes and 3..8 otherwise.
    pub fn k_range(&self) -> Result<(u32, u32)> {
        let (lo, hi) = match self.kind()? {
            ExperimentKind::UpperBoundSweep => (3, 7),
            ExperimentKind::Embedding => (3, 6),
            ExperimentKind::TubeBound => (4, 8),
            _ => (3, 8),
        };
        Ok((self.k_min.unwrap_or(lo), self.k_max.unwrap_or(hi)))
    }

    /// Exponents; defaults `[2, 6]`, or `[1.25, 1.5, 2, 6]` for sharpness.
    pub fn p_values(&self) -> Result<Vec<f64>> {
        if !self.p_list.is_empty() {
            return Ok(self.p_list.clone());
        }
        Ok(match self.kind()? {
            ExperimentKind::KnappSharpness => vec![1.25, 1.5, 2.0, 6.0],
            _ => vec![2.0, 6.0],
        })
    }

    pub fn family_list(&self) -> Vec<TestFamily> {
        if self.families.is_empty() {
            vec![TestFamily::Packets, TestFamily::Knapp, TestFamily::Random]
        } else {
            self.families.clone()
        }
    }

    /// Defaults to `|xi|` and the diagonal phase `(1, 1.3)` (padded with 0.8 in 3D).
    pub fn phase_list(&self) -> Vec<PhaseConfig> {
        if !self.phases.is_empty() {
            return self.phases.clone();
        }
        let mut entries = vec![1.0, 1.3];
        if self.dim == 3 {
            entries.push(0.8);
        }
        vec![PhaseConfig::Euclidean, PhaseConfig::Diagonal { entries }]
    }

    /// `[0, 1]` for the half-wave group, `[1, 2]` for the means.
    pub fn time_interval(&self) -> [f64; 2] {
        self.time.unwrap_or(match self.operator {
            Operator::HalfWave => [0.0, 1.0],
            _ => [1.0, 2.0],
        })
    }

    pub fn flow_times(&self) -> Vec<f64> {
        if self.t_list.is_empty() {
            vec![0.0125, 0.025, 0.05]
        } else {
            self.t_list.clone()
        }
    }

    pub fn oracle_times(&self) -> Vec<f64> {
        if self.t_list.is_empty() {
            vec![1.0, 1.5]
        } else {
            self.t_list.clone()
        }
    }

    pub fn deltas(&self) -> Vec<f64> {
        if self.delta_list.is_empty() {
            vec![0.01, 0.02, 0.04, 0.08]
        } else {
            self.delta_list.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let kind = self.kind()?;
        if !(2..=3).contains(&self.dim) {
            return bad(format!("dimension {} is not 2 or 3", self.dim));
        }
        let (lo, hi) = self.k_range()?;
        if lo > hi {
            return bad(format!("k_min {lo} exceeds k_max {hi}"));
        }
        if hi > 12 {
            return bad(format!("k_max {hi} is beyond desk scale"));
        }
        let slopes = !matches!(kind, ExperimentKind::Convergence | ExperimentKind::MeanOracle);
        if slopes && hi - lo + 1 < 4 {
            return bad(format!("slope fits need at least 4 shells, got {lo}..={hi}"));
        }
        for &p in &self.p_values()? {
            if !(p >= 1.0 && p.is_finite()) {
                return bad(format!("exponent {p} must be finite and >= 1"));
            }
        }
        if !(self.theta > 0.0 && self.theta <= 0.5) {
            return bad(format!("theta {} must lie in (0, 1/2]", self.theta));
        }
        if !(self.cone_aperture_deg > 0.0 && self.cone_aperture_deg < 180.0) {
            return bad(format!("cone aperture {} must lie in (0, 180) degrees", self.cone_aperture_deg));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon {} must be positive", self.epsilon));
        }
        if let Some([a, b]) = self.time {
            if !(a < b && a.is_finite() && b.is_finite()) {
                return bad(format!("time interval [{a}, {b}] is empty"));
            }
        }
        if let Some(t) = self.tolerance {
            if !(t >= 0.0 && t.is_finite()) {
                return bad(format!("tolerance {t} must be nonnegative"));
            }
        }
        if kind == ExperimentKind::Convergence && self.deltas().len() < 4 {
            return bad("convergence needs at least 4 windows".into());
        }
        if self.deltas().iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return bad("convergence windows must be positive".into());
        }
        self.envelope.validate().map_err(|e| Error::Config(e.to_string()))?;
        for ph in self.phase_list() {
            ph.build(self.dim)?;
        }
        Ok(())
    }
}
