//! Run configuration: a TOML file with one section per stage, overridable
//! with `--set section.key=value`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tabkip::distill::{Init, DEFAULT_SIZES};
use tabkip::objectives::{CoeConvention, ObjectiveKind, ObjectiveParams};

use crate::Failure;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub run: RunSection,
    pub data: DataSection,
    pub split: SplitSection,
    pub kernel: KernelSection,
    pub objective: ObjectiveSection,
    pub distill: DistillSection,
    pub classifiers: ClassifierSection,
    pub sweep: SweepSection,
    pub calibrate: CalibrateSection,
    pub project: ProjectSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub seed: u64,
    /// Worker threads for grid commands; 0 uses every core.
    pub jobs: usize,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    /// CSV input. Without it the synthetic generator below is used.
    pub path: Option<PathBuf>,
    pub name: Option<String>,
    pub label_column: String,
    pub positive_value: String,
    pub standardize: bool,
    pub synthetic: SyntheticSection,
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            path: None,
            name: None,
            label_column: "label".into(),
            positive_value: "1".into(),
            standardize: true,
            synthetic: SyntheticSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSection {
    pub n: usize,
    pub d: usize,
    pub ir: f64,
    pub separation: f64,
    /// Defaults to `run.seed`.
    pub seed: Option<u64>,
}

impl Default for SyntheticSection {
    fn default() -> Self {
        SyntheticSection {
            n: 4000,
            d: 10,
            ir: 10.0,
            separation: 2.0,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitSection {
    pub test_fraction: f64,
    pub stratified: bool,
}

impl Default for SplitSection {
    fn default() -> Self {
        SplitSection {
            test_fraction: 0.2,
            stratified: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Rbf,
    Linear,
    Polynomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelSection {
    pub kind: KernelKind,
    /// rbf only; omitted means the median pairwise distance of the
    /// training split.
    pub bandwidth: Option<f64>,
    pub degree: u32,
    pub offset: f64,
}

impl Default for KernelSection {
    fn default() -> Self {
        KernelSection {
            kind: KernelKind::Rbf,
            bandwidth: None,
            degree: 2,
            offset: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObjectiveSection {
    pub kind: ObjectiveKind,
    pub gamma: Option<f64>,
    pub coe: Option<f64>,
    pub coe_convention: Option<CoeConvention>,
    pub alpha_w: Option<f64>,
    pub alpha_g: Option<f64>,
    pub beta_g: Option<f64>,
    pub ir: Option<f64>,
}

impl Default for ObjectiveSection {
    fn default() -> Self {
        ObjectiveSection {
            kind: ObjectiveKind::Ce,
            gamma: None,
            coe: None,
            coe_convention: None,
            alpha_w: None,
            alpha_g: None,
            beta_g: None,
            ir: None,
        }
    }
}

impl ObjectiveSection {
    pub fn params(&self) -> ObjectiveParams {
        ObjectiveParams {
            gamma: self.gamma,
            coe: self.coe,
            coe_convention: self.coe_convention,
            alpha_w: self.alpha_w,
            alpha_g: self.alpha_g,
            beta_g: self.beta_g,
            ir: self.ir,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DistillSection {
    pub m: usize,
    pub epochs: usize,
    pub lr_x: f64,
    pub lr_y: f64,
    pub batch_size: Option<usize>,
    pub learn_labels: bool,
    pub init: Init,
    pub noise_sigma: f64,
    /// Omitted means match the training set.
    pub synthetic_ir: Option<f64>,
    pub ridge: f64,
    pub snapshot_every: Option<usize>,
}

impl Default for DistillSection {
    fn default() -> Self {
        DistillSection {
            m: 40,
            epochs: 100,
            lr_x: 0.01,
            lr_y: 0.005,
            batch_size: None,
            learn_labels: true,
            init: Init::Subsample,
            noise_sigma: 0.1,
            synthetic_ir: None,
            ridge: 1e-6,
            snapshot_every: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Krr,
    Logreg,
    Knn,
    Cart,
    Forest,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifierSection {
    pub krr: KrrParams,
    pub logreg: LogregParams,
    pub knn: KnnParams,
    pub cart: TreeSection,
    pub forest: ForestParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KrrParams {
    pub ridge: f64,
    pub regress_on_support_labels: bool,
}

impl Default for KrrParams {
    fn default() -> Self {
        KrrParams {
            ridge: 1e-6,
            regress_on_support_labels: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LogregParams {
    pub l2: f64,
    pub max_iter: usize,
}

impl Default for LogregParams {
    fn default() -> Self {
        LogregParams {
            l2: 1e-3,
            max_iter: 5000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TreeSection {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeSection {
    fn default() -> Self {
        TreeSection {
            max_depth: 8,
            min_leaf: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Omitted means sqrt(D) / D.
    pub feature_fraction: Option<f64>,
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            feature_fraction: None,
            max_depth: 12,
            min_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub objectives: Vec<ObjectiveKind>,
    pub sizes: Vec<usize>,
    /// Omitted means `[run.seed]`.
    pub seeds: Option<Vec<u64>>,
    pub classifiers: Vec<ClassifierKind>,
    pub include_random_baseline: bool,
    pub include_full_baseline: bool,
    pub threshold: f64,
    /// Write a projection of the first seed's coreset per objective at this size.
    pub project_at: Option<usize>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            objectives: ObjectiveKind::ALL.to_vec(),
            sizes: DEFAULT_SIZES.to_vec(),
            seeds: None,
            classifiers: vec![
                ClassifierKind::Krr,
                ClassifierKind::Logreg,
                ClassifierKind::Knn,
                ClassifierKind::Cart,
                ClassifierKind::Forest,
            ],
            include_random_baseline: true,
            include_full_baseline: true,
            threshold: 0.5,
            project_at: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrateSection {
    pub grid_alpha: Vec<f64>,
    pub grid_beta: Vec<f64>,
    pub m: usize,
    pub epochs: usize,
    pub validation_fraction: f64,
}

impl Default for CalibrateSection {
    fn default() -> Self {
        CalibrateSection {
            grid_alpha: vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5],
            grid_beta: vec![-1.0, -0.5, 0.0, 0.5, 1.0],
            m: 20,
            epochs: 20,
            validation_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProjectSection {
    /// Coreset CSVs written by `distill`.
    pub coresets: Vec<PathBuf>,
    /// Source labels, one per coreset; defaults to the file stems.
    pub labels: Option<Vec<String>>,
}

/// Reads the optional config file, applies `key=value` overrides, and
/// checks the result against the schema.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, Failure> {
    let mut table = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
            toml::from_str::<toml::Table>(&text)
                .map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?
        }
        None => toml::Table::new(),
    };
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    RunConfig::deserialize(toml::Value::Table(table)).map_err(|e| Failure::Config(e.to_string()))
}

fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), Failure> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Failure::Config(format!("override `{assignment}` is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    // TOML literal if it parses as one, otherwise a bare string
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Failure::Config(format!("override key `{key}` is malformed")));
    }
    let (last, sections) = parts.split_last().expect("split yields at least one part");
    let mut cursor = table;
    for s in sections {
        let entry = cursor
            .entry(s.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cursor = entry
            .as_table_mut()
            .ok_or_else(|| Failure::Config(format!("override key `{key}`: `{s}` is not a section")))?;
    }
    cursor.insert(last.to_string(), value);
    Ok(())
}

pub fn snapshot(cfg: &RunConfig) -> Result<String, Failure> {
    toml::to_string(cfg).map_err(|e| Failure::Config(format!("serializing config: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = load(None, &[]).unwrap();
        assert_eq!(cfg, RunConfig::default());
        let text = snapshot(&cfg).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn overrides_are_typed() {
        let cfg = load(
            None,
            &[
                "distill.m=12".into(),
                "objective.kind=asig".into(),
                "sweep.sizes=[5, 6]".into(),
                "data.path=some/file.csv".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.distill.m, 12);
        assert_eq!(cfg.objective.kind, ObjectiveKind::Asig);
        assert_eq!(cfg.sweep.sizes, vec![5, 6]);
        assert_eq!(cfg.data.path, Some(PathBuf::from("some/file.csv")));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(load(None, &["distill.learning_rate=0.1".into()]).is_err());
        assert!(load(None, &["nonsense=1".into()]).is_err());
        assert!(load(None, &["distill.m".into()]).is_err());
    }
}
