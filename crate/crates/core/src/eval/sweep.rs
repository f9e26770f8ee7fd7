//! The experiment grid: distilled coresets per (objective, size, seed),
//! optional random-subset and full-data baselines, every classifier on each.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate, train_classifier, ClassifierSpec, EvalReport, TrainingData};
use crate::data::{random_subset, Dataset};
use crate::distill::{distill, DistillConfig, SyntheticSet};
use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Original,
    RandomSubset,
    Distilled,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Original => "original",
            Source::RandomSubset => "random_subset",
            Source::Distilled => "distilled",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub dataset: String,
    /// Fully resolved objectives (parameters already derived from `train`).
    pub objectives: Vec<Objective>,
    pub sizes: Vec<usize>,
    pub classifiers: Vec<ClassifierSpec>,
    pub seeds: Vec<u64>,
    pub include_random_baseline: bool,
    pub include_full_baseline: bool,
    /// Template for every distillation; `m`, `objective` and `seed` are
    /// replaced per cell.
    pub distill: DistillConfig,
    pub threshold: f64,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
    /// Keep the distilled coresets of this size in the output.
    pub keep_coresets_at: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub dataset: String,
    pub source: Source,
    /// Objective kind, or `none` for baselines.
    pub objective: String,
    pub m: usize,
    pub classifier: String,
    pub seed: u64,
    pub report: Option<EvalReport>,
    /// `ok`, or `error: <message>`.
    pub status: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

pub const SWEEP_COLUMNS: [&str; 11] = [
    "dataset",
    "source",
    "objective",
    "m",
    "classifier",
    "seed",
    "auc",
    "f1",
    "balanced_accuracy",
    "minority_recall",
    "status",
];

impl SweepResult {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::InvalidDataset(format!("writing sweep csv: {e}"));
        w.write_record(SWEEP_COLUMNS).map_err(csv_err)?;
        for r in &self.rows {
            let metric = |f: fn(&EvalReport) -> f64| r.report.as_ref().map(|x| f(x).to_string()).unwrap_or_default();
            w.write_record([
                r.dataset.clone(),
                r.source.as_str().to_string(),
                r.objective.clone(),
                r.m.to_string(),
                r.classifier.clone(),
                r.seed.to_string(),
                metric(|x| x.auc),
                metric(|x| x.f1),
                metric(|x| x.balanced_accuracy),
                metric(|x| x.minority_recall),
                r.status.clone(),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidDataset(format!("writing sweep csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn failures(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.report.is_none())
    }
}

/// A coreset retained for later projection.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCoreset {
    pub objective: String,
    pub m: usize,
    pub seed: u64,
    pub set: SyntheticSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub result: SweepResult,
    pub coresets: Vec<SweepCoreset>,
}

#[derive(Debug, Clone, Copy)]
enum Cell {
    Full { seed: u64 },
    Random { size: usize, seed: u64 },
    Distilled { objective: usize, size: usize, seed: u64 },
}

/// Seed of the coreset draw for a size slot. Shared by the random baseline and
/// every objective so that all start from the same subsample.
fn subset_seed(seed: u64, size_index: usize) -> u64 {
    derive_seed(seed, &[size_index as u64])
}

fn validate_plan(plan: &SweepPlan) -> Result<()> {
    if plan.objectives.is_empty() && !plan.include_random_baseline && !plan.include_full_baseline {
        return Err(Error::invalid("objectives", "nothing to run"));
    }
    if plan.classifiers.is_empty() {
        return Err(Error::invalid("classifiers", "at least one classifier is required"));
    }
    if plan.seeds.is_empty() {
        return Err(Error::invalid("seeds", "at least one seed is required"));
    }
    if !plan.threshold.is_finite() {
        return Err(Error::invalid("threshold", "must be finite"));
    }
    for c in &plan.classifiers {
        c.validate()?;
    }
    for o in &plan.objectives {
        o.validate()?;
    }
    Ok(())
}

/// Runs the grid. Individual cell failures are recorded in the rows and do
/// not abort the sweep; only an invalid plan is an error.
///
/// Rows come out ordered: full baselines, then random baselines by size and
/// seed, then distilled runs by objective, size and seed, with classifiers
/// innermost. The order and content do not depend on `jobs`.
pub fn sweep(train: &Dataset, test: &Dataset, plan: &SweepPlan) -> Result<SweepOutput> {
    validate_plan(plan)?;
    if train.n_features() != test.n_features() {
        return Err(Error::DimensionMismatch(format!(
            "train has {} features, test {}",
            train.n_features(),
            test.n_features()
        )));
    }
    let mut cells = Vec::new();
    if plan.include_full_baseline {
        cells.extend(plan.seeds.iter().map(|&seed| Cell::Full { seed }));
    }
    if plan.include_random_baseline {
        for size in 0..plan.sizes.len() {
            cells.extend(plan.seeds.iter().map(|&seed| Cell::Random { size, seed }));
        }
    }
    for objective in 0..plan.objectives.len() {
        for size in 0..plan.sizes.len() {
            cells.extend(plan.seeds.iter().map(|&seed| Cell::Distilled { objective, size, seed }));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.jobs)
        .build()
        .map_err(|e| Error::invalid("jobs", e.to_string()))?;
    let outcomes: Vec<(Vec<SweepRow>, Option<SweepCoreset>)> =
        pool.install(|| cells.par_iter().map(|&c| run_cell(train, test, plan, c)).collect());

    let mut result = SweepResult::default();
    let mut coresets = Vec::new();
    for (rows, coreset) in outcomes {
        result.rows.extend(rows);
        coresets.extend(coreset);
    }
    Ok(SweepOutput { result, coresets })
}

fn run_cell(train: &Dataset, test: &Dataset, plan: &SweepPlan, cell: Cell) -> (Vec<SweepRow>, Option<SweepCoreset>) {
    let (source, objective, m, seed) = match cell {
        Cell::Full { seed } => (Source::Original, "none".to_string(), train.n_rows(), seed),
        Cell::Random { size, seed } => (Source::RandomSubset, "none".to_string(), plan.sizes[size], seed),
        Cell::Distilled { objective, size, seed } => (
            Source::Distilled,
            plan.objectives[objective].kind().to_string(),
            plan.sizes[size],
            seed,
        ),
    };
    let row = |spec: &ClassifierSpec, report: Option<EvalReport>, status: String| SweepRow {
        dataset: plan.dataset.clone(),
        source,
        objective: objective.clone(),
        m,
        classifier: spec.name().to_string(),
        seed,
        report,
        status,
    };
    let score_all = |data: TrainingData| -> Vec<SweepRow> {
        plan.classifiers
            .iter()
            .map(|spec| {
                let spec = spec.with_seed(seed);
                match train_classifier(&spec, data).and_then(|model| evaluate(&model, test, plan.threshold)) {
                    Ok(report) => row(&spec, Some(report), "ok".to_string()),
                    Err(e) => row(&spec, None, format!("error: {e}")),
                }
            })
            .collect()
    };
    let fail_all = |e: &Error| -> Vec<SweepRow> {
        plan.classifiers
            .iter()
            .map(|spec| row(spec, None, format!("error: {e}")))
            .collect()
    };

    match cell {
        Cell::Full { .. } => (score_all(TrainingData::Real(train)), None),
        Cell::Random { size, .. } => match random_subset(train, m, true, subset_seed(seed, size)) {
            Ok(subset) => (score_all(TrainingData::Real(&subset)), None),
            Err(e) => (fail_all(&e), None),
        },
        Cell::Distilled {
            objective: o, size, ..
        } => {
            let cfg = DistillConfig {
                m,
                objective: plan.objectives[o],
                seed: subset_seed(seed, size),
                ..plan.distill.clone()
            };
            match distill(train, &cfg) {
                Ok((set, _)) => {
                    let rows = score_all(TrainingData::Synthetic(&set));
                    let keep = (plan.keep_coresets_at == Some(m)).then(|| SweepCoreset {
                        objective: objective.clone(),
                        m,
                        seed,
                        set,
                    });
                    (rows, keep)
                }
                Err(e) => (fail_all(&e), None),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_synthetic, split, standardize, SplitSpec};
    use crate::kernel::KernelSpec;
    use crate::objectives::Objective;

    fn setup() -> (Dataset, Dataset) {
        let ds = standardize(&gen_synthetic(120, 3, 3.0, 2.0, 4).unwrap());
        split(
            &ds,
            &SplitSpec {
                test_fraction: 0.25,
                stratified: true,
                seed: 1,
            },
        )
        .unwrap()
    }

    fn plan() -> SweepPlan {
        let kernel = KernelSpec::Rbf { bandwidth: 2.0 };
        let mut distill = DistillConfig::new(10, Objective::Mse, kernel);
        distill.epochs = 2;
        SweepPlan {
            dataset: "toy".into(),
            objectives: vec![Objective::Mse, Objective::Ce],
            sizes: vec![6, 10, 14],
            classifiers: vec![ClassifierSpec::krr(kernel), ClassifierSpec::knn()],
            seeds: vec![0, 1],
            include_random_baseline: false,
            include_full_baseline: false,
            distill,
            threshold: 0.5,
            jobs: 2,
            keep_coresets_at: None,
        }
    }

    #[test]
    fn grid_cardinality() {
        let (train, test) = setup();
        let mut p = plan();
        assert_eq!(sweep(&train, &test, &p).unwrap().result.rows.len(), 24);
        p.include_full_baseline = true;
        assert_eq!(sweep(&train, &test, &p).unwrap().result.rows.len(), 28);
        p.include_random_baseline = true;
        assert_eq!(sweep(&train, &test, &p).unwrap().result.rows.len(), 40);
    }

    #[test]
    fn failed_cell_is_recorded() {
        let (train, test) = setup();
        let mut p = plan();
        p.sizes = vec![1, 10];
        let out = sweep(&train, &test, &p).unwrap().result;
        assert_eq!(out.rows.len(), 16);
        let failed: Vec<_> = out.failures().collect();
        assert_eq!(failed.len(), 8);
        assert!(failed.iter().all(|r| r.m == 1 && r.status.starts_with("error: ")));
        let csv = out.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 17);
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let (train, test) = setup();
        let mut p = plan();
        p.include_random_baseline = true;
        p.jobs = 1;
        let a = sweep(&train, &test, &p).unwrap().result.to_csv().unwrap();
        p.jobs = 4;
        let b = sweep(&train, &test, &p).unwrap().result.to_csv().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_epochs_matches_random_baseline() {
        let (train, test) = setup();
        let mut p = plan();
        p.objectives = vec![Objective::Mse];
        p.sizes = vec![train.n_rows()];
        p.distill.epochs = 0;
        p.include_random_baseline = true;
        let rows = sweep(&train, &test, &p).unwrap().result.rows;
        let (random, distilled) = rows.split_at(rows.len() / 2);
        for (r, d) in random.iter().zip(distilled) {
            assert_eq!(r.source, Source::RandomSubset);
            assert_eq!(d.source, Source::Distilled);
            assert_eq!(r.report, d.report);
            assert!(r.report.is_some());
        }
    }

    #[test]
    fn keeps_requested_coresets() {
        let (train, test) = setup();
        let mut p = plan();
        p.keep_coresets_at = Some(10);
        let out = sweep(&train, &test, &p).unwrap();
        assert_eq!(out.coresets.len(), 4);
        assert!(out.coresets.iter().all(|c| c.set.len() == 10));
    }
}
