//! Grid search for the shift parameters `(alpha_g, beta_g)` of the asig
//! objective on a baseline dataset.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Objective, ObjectiveKind, ObjectiveParams};
use crate::data::{split, Dataset, SplitSpec};
use crate::distill::{distill, DistillConfig};
use crate::error::{Error, Result};
use crate::eval::{evaluate, train_classifier, ClassifierSpec};
use crate::kernel::{median_bandwidth, KernelSpec};
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationSettings {
    pub m: usize,
    pub epochs: usize,
    pub validation_fraction: f64,
    pub ridge: f64,
    /// Other asig parameters; `alpha_g` and `beta_g` here are ignored.
    pub objective: ObjectiveParams,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        CalibrationSettings {
            m: 20,
            epochs: 20,
            validation_fraction: 0.2,
            ridge: 1e-6,
            objective: ObjectiveParams::default(),
            jobs: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCell {
    pub alpha_g: f64,
    pub beta_g: f64,
    /// Validation AUC; `None` when the cell failed.
    pub auc: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub alpha_g: f64,
    pub beta_g: f64,
    pub auc: f64,
    /// Row-major over `grid_alpha` x `grid_beta`.
    pub cells: Vec<CalibrationCell>,
}

/// [`calibrate_g_with`] under the default settings (m = 20, 20 epochs, 80/20
/// stratified split).
pub fn calibrate_g(baseline: &Dataset, grid_alpha: &[f64], grid_beta: &[f64], seed: u64) -> Result<CalibrationResult> {
    calibrate_g_with(baseline, grid_alpha, grid_beta, seed, &CalibrationSettings::default())
}

/// For every `(alpha_g, beta_g)` pair, distills a short asig run on a
/// stratified training split of `baseline` and scores a KRR classifier fitted
/// on the coreset by validation AUC. Returns the best pair; ties go to the
/// smaller `|alpha_g|`, then the smaller `|beta_g|`.
pub fn calibrate_g_with(
    baseline: &Dataset,
    grid_alpha: &[f64],
    grid_beta: &[f64],
    seed: u64,
    settings: &CalibrationSettings,
) -> Result<CalibrationResult> {
    if grid_alpha.is_empty() || grid_beta.is_empty() {
        return Err(Error::invalid("grid", "both grids must be nonempty"));
    }
    if let Some(v) = grid_alpha.iter().chain(grid_beta).find(|v| !v.is_finite()) {
        return Err(Error::invalid("grid", format!("{v} is not finite")));
    }
    let (train, valid) = split(
        baseline,
        &SplitSpec {
            test_fraction: settings.validation_fraction,
            stratified: true,
            seed: derive_seed(seed, &[0]),
        },
    )?;
    let kernel = KernelSpec::Rbf {
        bandwidth: median_bandwidth(train.features(), derive_seed(seed, &[1]))?,
    };
    let classifier = ClassifierSpec::Krr {
        ridge: settings.ridge,
        kernel,
        regress_on_support_labels: false,
    };
    let grid: Vec<(usize, usize)> = (0..grid_alpha.len())
        .flat_map(|i| (0..grid_beta.len()).map(move |j| (i, j)))
        .collect();

    let score = |i: usize, j: usize| -> Result<f64> {
        let params = ObjectiveParams {
            alpha_g: Some(grid_alpha[i]),
            beta_g: Some(grid_beta[j]),
            ..settings.objective
        };
        let objective = Objective::from_kind(ObjectiveKind::Asig, &params, &train)?;
        let mut cfg = DistillConfig::new(settings.m, objective, kernel);
        cfg.epochs = settings.epochs;
        cfg.ridge = settings.ridge;
        cfg.seed = derive_seed(seed, &[2, i as u64, j as u64]);
        let (coreset, _) = distill(&train, &cfg)?;
        let model = train_classifier(&classifier, &coreset)?;
        Ok(evaluate(&model, &valid, 0.5)?.auc)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.jobs)
        .build()
        .map_err(|e| Error::invalid("jobs", e.to_string()))?;
    let cells: Vec<CalibrationCell> = pool.install(|| {
        grid.par_iter()
            .map(|&(i, j)| {
                let outcome = score(i, j);
                CalibrationCell {
                    alpha_g: grid_alpha[i],
                    beta_g: grid_beta[j],
                    status: match &outcome {
                        Ok(_) => "ok".to_string(),
                        Err(e) => format!("error: {e}"),
                    },
                    auc: outcome.ok(),
                }
            })
            .collect()
    });

    let mut best: Option<(usize, f64)> = None;
    for (k, c) in cells.iter().enumerate() {
        let Some(auc) = c.auc else { continue };
        let better = best.is_none_or(|(b, b_auc)| {
            let b = &cells[b];
            auc > b_auc
                || (auc == b_auc && (c.alpha_g.abs(), c.beta_g.abs()) < (b.alpha_g.abs(), b.beta_g.abs()))
        });
        if better {
            best = Some((k, auc));
        }
    }
    let (k, auc) = best.ok_or_else(|| {
        let first = cells.first().map(|c| c.status.clone()).unwrap_or_default();
        Error::Solve(format!("every calibration cell failed ({first})"))
    })?;
    Ok(CalibrationResult {
        alpha_g: cells[k].alpha_g,
        beta_g: cells[k].beta_g,
        auc,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_synthetic, standardize};

    fn baseline() -> Dataset {
        standardize(&gen_synthetic(300, 4, 5.0, 2.0, 11).unwrap())
    }

    #[test]
    fn singleton_grid() {
        let r = calibrate_g(&baseline(), &[0.0], &[0.0], 3).unwrap();
        assert_eq!((r.alpha_g, r.beta_g), (0.0, 0.0));
        assert_eq!(r.cells.len(), 1);
    }

    #[test]
    fn deterministic_and_dominant() {
        let ds = baseline();
        let a = calibrate_g(&ds, &[0.0, 0.5, 1.0], &[-0.5, 0.0], 9).unwrap();
        let b = calibrate_g(&ds, &[0.0, 0.5, 1.0], &[-0.5, 0.0], 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cells.len(), 6);
        for c in &a.cells {
            assert!(a.auc >= c.auc.unwrap());
        }
    }

    #[test]
    fn empty_grid_is_rejected() {
        assert!(calibrate_g(&baseline(), &[], &[0.0], 0).is_err());
    }
}
