//! Run configuration files.
//!
//! ```json
//! {
//!   "group": {"kind": "su2", "resolution": 12},
//!   "experiment": "first",
//!   "spins": [0.5, 1.0, 1.5],
//!   "q": [1, 2],
//!   "seed": 7,
//!   "optimizer": {"restarts": 8, "steps": 200}
//! }
//! ```
//!
//! Finite groups are given inline (`"kind": "finite"` with `table`,
//! `generators` and `irreps`), by name (`"kind": "builtin"`), or through
//! `{"file": "group.json"}` holding either form.

use std::fs;
use std::path::{Path, PathBuf};

use qbridge::group::builtin::{self, BuiltinGroup, IrrepSpec};
use qbridge::linalg::{c, CMat, C64};
use qbridge::OptimizerSettings;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    First,
    Second,
    Trek,
}

/// One irreducible representation of a finite group, by its generator
/// matrices (rows of `[re, im]` pairs) and coherent vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IrrepConfig {
    pub label: String,
    pub generators: Vec<Vec<Vec<[f64; 2]>>>,
    pub vector: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GroupDef {
    Finite {
        table: Vec<Vec<usize>>,
        generators: Vec<usize>,
        #[serde(default)]
        irreps: Vec<IrrepConfig>,
    },
    Builtin {
        name: String,
    },
    Su2 {
        resolution: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupConfig {
    File { file: PathBuf },
    Inline(GroupDef),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub enabled: bool,
    /// Lattice step for the operator ball.
    pub operator_step: f64,
    /// Lattice step for the function ball.
    pub function_step: f64,
    /// Simplex / Bloch lattice resolution for state samples.
    pub state_resolution: usize,
    /// Sample count when the operator ball has more than three dimensions.
    pub random_count: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            enabled: false,
            operator_step: 0.1,
            function_step: 0.05,
            state_resolution: 6,
            random_count: 20000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputNames {
    pub records: String,
    pub summary: String,
    pub plot: String,
    pub trek: String,
}

impl Default for OutputNames {
    fn default() -> Self {
        OutputNames {
            records: "records.jsonl".into(),
            summary: "summary.csv".into(),
            plot: "plot.csv".into(),
            trek: "trek.csv".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub group: GroupConfig,
    pub experiment: Experiment,
    /// Spins for SU(2) runs.
    #[serde(default)]
    pub spins: Vec<f64>,
    /// Irrep labels for finite-group runs.
    #[serde(default)]
    pub irreps: Vec<String>,
    /// `(m, n)` pairs for second-class and trek runs: spins or irrep labels.
    #[serde(default)]
    pub pairs: Vec<(serde_json::Value, serde_json::Value)>,
    #[serde(default = "default_levels")]
    pub q: Vec<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub optimizer: OptimizerSettings,
    #[serde(default)]
    pub oracle: OracleConfig,
    /// Also estimate `γ^m_n`, `γ^n_m` directly for second-class cells.
    #[serde(default)]
    pub direct_gamma: bool,
    #[serde(default)]
    pub witnesses: bool,
    /// Stability tolerance; group-kind default when absent.
    #[serde(default)]
    pub stability_tol: Option<f64>,
    #[serde(default)]
    pub outputs: OutputNames,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_levels() -> Vec<usize> {
    vec![1]
}

/// A side label of a cell: a spin or an irrep name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SideLabel {
    Spin(f64),
    Irrep(String),
}

impl std::fmt::Display for SideLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SideLabel::Spin(j) => write!(f, "{j}"),
            SideLabel::Irrep(s) => f.write_str(s),
        }
    }
}

fn is_half_integer(j: f64) -> bool {
    let t = 2.0 * j;
    t >= 0.0 && (t - t.round()).abs() < 1e-12
}

fn side_label(v: &serde_json::Value) -> Result<SideLabel, CliError> {
    match v {
        serde_json::Value::Number(n) => {
            let j = n.as_f64().unwrap_or(f64::NAN);
            if !is_half_integer(j) {
                return Err(CliError::Config(format!("pairs: {j} is not a half-integer spin")));
            }
            Ok(SideLabel::Spin(j))
        }
        serde_json::Value::String(s) => Ok(SideLabel::Irrep(s.clone())),
        other => Err(CliError::Config(format!("pairs: expected a spin or irrep label, got {other}"))),
    }
}

impl RunConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let mut cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("line {} column {}: {e}", e.line(), e.column())))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Applies the command-line seed and checks invariants.
    pub fn finalize(mut self, seed: Option<u64>) -> Result<Self, CliError> {
        if let Some(s) = seed {
            self.seed = Some(s);
        }
        if self.seed.is_none() {
            return Err(CliError::Config("seed: required (in the config or via --seed)".into()));
        }
        self.optimizer.seed = self.seed.unwrap();
        if self.q.contains(&0) {
            return Err(CliError::Config("q: levels must be at least 1".into()));
        }
        if let Some(j) = self.spins.iter().find(|j| !is_half_integer(**j)) {
            return Err(CliError::Config(format!("spins: {j} is not a half-integer")));
        }
        for (a, b) in &self.pairs {
            side_label(a)?;
            side_label(b)?;
        }
        if self.optimizer.step <= 0.0 {
            return Err(CliError::Config("optimizer.step: must be positive".into()));
        }
        Ok(self)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// Sides of first-class cells, in config order.
    pub fn sides(&self) -> Vec<SideLabel> {
        let mut out: Vec<SideLabel> = self.spins.iter().map(|&j| SideLabel::Spin(j)).collect();
        out.extend(self.irreps.iter().cloned().map(SideLabel::Irrep));
        out
    }

    pub fn pair_labels(&self) -> Vec<(SideLabel, SideLabel)> {
        self.pairs
            .iter()
            .map(|(a, b)| (side_label(a).unwrap(), side_label(b).unwrap()))
            .collect()
    }

    pub fn group_def(&self) -> Result<GroupDef, CliError> {
        match &self.group {
            GroupConfig::Inline(d) => Ok(d.clone()),
            GroupConfig::File { file } => {
                let path = if file.is_absolute() { file.clone() } else { self.base_dir.join(file) };
                let text = fs::read_to_string(&path).map_err(|e| CliError::Config(format!("group file {}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| {
                    CliError::Config(format!("group file {} line {} column {}: {e}", path.display(), e.line(), e.column()))
                })
            }
        }
    }
}

fn matrix(rows: &[Vec<[f64; 2]>]) -> Result<CMat, CliError> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Config("irrep generator matrices must be square".into()));
    }
    Ok(CMat::from_fn(n, n, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

/// Resolves a finite-group definition to a table with irreps.
pub fn finite_group(def: &GroupDef) -> Result<BuiltinGroup, CliError> {
    match def {
        GroupDef::Builtin { name } => {
            builtin::builtin(name).ok_or_else(|| CliError::Config(format!("group.name: unknown builtin group `{name}`")))
        }
        GroupDef::Finite {
            table,
            generators,
            irreps,
        } => {
            let irreps = irreps
                .iter()
                .map(|ir| {
                    Ok(IrrepSpec {
                        label: ir.label.clone(),
                        generator_matrices: ir.generators.iter().map(|m| matrix(m)).collect::<Result<_, _>>()?,
                        vector: ir.vector.iter().map(|z| C64::new(z[0], z[1])).collect(),
                    })
                })
                .collect::<Result<_, CliError>>()?;
            Ok(BuiltinGroup {
                name: "custom".into(),
                table: table.clone(),
                generators: generators.clone(),
                irreps,
            })
        }
        GroupDef::Su2 { .. } => Err(CliError::Config("expected a finite group".into())),
    }
}
