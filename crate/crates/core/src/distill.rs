//! Coreset optimization: fit KRR on the synthetic set, score a batch of real
//! rows under the objective, pull the gradient back through the ridge solve,
//! and take an Adam step on the synthetic points (and optionally labels).

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{csv_header, draw_by_class, stratified_counts, Dataset};
use crate::error::{Error, Result};
use crate::kernel::{KernelSpec, KrrTape};
use crate::objectives::{loss_and_grad, Objective};
use crate::rng;

/// Support labels are clamped to this magnitude after every update.
pub const LABEL_CLAMP: f64 = 10.0;

/// Synthetic coordinates beyond this magnitude (standardized units) are
/// treated as divergence.
pub const RUNAWAY_BOUND: f64 = 1e4;

/// Sizes used by default in sweeps.
pub const DEFAULT_SIZES: [usize; 10] = [10, 20, 30, 50, 100, 200, 300, 500, 700, 900];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// Stratified draw of real training rows.
    Subsample,
    /// Stratified draw plus i.i.d. Gaussian noise of `noise_sigma`.
    SubsampleNoise,
    /// Standard normal draws in standardized units.
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistillConfig {
    pub m: usize,
    /// Zero runs no optimization steps and returns the initial coreset.
    pub epochs: usize,
    pub lr_x: f64,
    pub lr_y: f64,
    /// `None` means min(1024, N).
    pub batch_size: Option<usize>,
    pub learn_labels: bool,
    pub init: Init,
    pub noise_sigma: f64,
    /// Majority/minority ratio of the coreset; `None` matches the training set.
    pub synthetic_ir: Option<f64>,
    pub objective: Objective,
    pub kernel: KernelSpec,
    pub ridge: f64,
    pub seed: u64,
    /// Evaluate the full-target loss every this many epochs.
    pub snapshot_every: Option<usize>,
}

impl DistillConfig {
    pub fn new(m: usize, objective: Objective, kernel: KernelSpec) -> Self {
        DistillConfig {
            m,
            epochs: 100,
            lr_x: 0.01,
            lr_y: 0.005,
            batch_size: None,
            learn_labels: true,
            init: Init::Subsample,
            noise_sigma: 0.1,
            synthetic_ir: None,
            objective,
            kernel,
            ridge: 1e-6,
            seed: 0,
            snapshot_every: None,
        }
    }

    pub fn validate(&self, train: &Dataset) -> Result<()> {
        let n = train.n_rows();
        if self.m < 2 || self.m > n {
            return Err(Error::invalid(
                "m",
                format!("{} is outside 2..={n} (both classes are required)", self.m),
            ));
        }
        let positive = |arg: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(arg, format!("{v} must be positive")))
            }
        };
        positive("lr_x", self.lr_x)?;
        positive("lr_y", self.lr_y)?;
        positive("ridge", self.ridge)?;
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::invalid("noise_sigma", "must be finite and >= 0"));
        }
        if let Some(ir) = self.synthetic_ir {
            if !(ir > 0.0 && ir.is_finite()) {
                return Err(Error::invalid("synthetic_ir", format!("{ir} must be positive")));
            }
        }
        if self.batch_size == Some(0) {
            return Err(Error::invalid("batch_size", "must be at least 1"));
        }
        if self.snapshot_every == Some(0) {
            return Err(Error::invalid("snapshot_every", "must be at least 1"));
        }
        self.objective.validate()?;
        self.kernel.validate()
    }

    pub fn effective_batch_size(&self, n: usize) -> usize {
        self.batch_size.unwrap_or(1024).min(n)
    }
}

/// The learnable coreset, in standardized units.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSet {
    pub x: DMatrix<f64>,
    /// Real-valued regression targets used by KRR.
    pub y: DVector<f64>,
    /// The class each point was seeded from. Never changes.
    pub y_class: Vec<u8>,
}

impl SyntheticSet {
    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.nrows() == 0
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.y_class.iter().filter(|&&c| c == 1).count();
        (self.y_class.len() - pos, pos)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub epoch: usize,
    pub step: usize,
    pub batch_loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub epoch: usize,
    pub step: usize,
    pub full_loss: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DistillTrace {
    pub records: Vec<TraceRecord>,
    pub snapshots: Vec<Snapshot>,
}

impl DistillTrace {
    pub fn last_loss(&self) -> Option<f64> {
        self.records.last().map(|r| r.batch_loss)
    }

    /// `epoch,step,loss` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,step,loss\n");
        for r in &self.records {
            out.push_str(&format!("{},{},{}\n", r.epoch, r.step, r.batch_loss));
        }
        out
    }

    /// Mean batch loss over a window of steps ending at `end` (exclusive).
    pub fn moving_average(&self, end: usize, window: usize) -> Option<f64> {
        let start = end.checked_sub(window)?;
        let slice = self.records.get(start..end)?;
        Some(slice.iter().map(|r| r.batch_loss).sum::<f64>() / window as f64)
    }
}

/// Adam state for one flat parameter array (beta1 = 0.9, beta2 = 0.999,
/// eps = 1e-8, bias corrected).
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub const BETA1: f64 = 0.9;
    pub const BETA2: f64 = 0.999;
    pub const EPS: f64 = 1e-8;

    pub fn new(len: usize) -> Self {
        AdamState {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }
}

pub fn adam_update(state: &mut AdamState, params: &mut [f64], grads: &[f64], lr: f64) -> Result<()> {
    if params.len() != state.m.len() || grads.len() != state.m.len() {
        return Err(Error::DimensionMismatch(format!(
            "adam state for {} parameters, got {} parameters and {} gradients",
            state.m.len(),
            params.len(),
            grads.len()
        )));
    }
    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - AdamState::BETA1.powi(t);
    let c2 = 1.0 - AdamState::BETA2.powi(t);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = AdamState::BETA1 * state.m[i] + (1.0 - AdamState::BETA1) * g;
        state.v[i] = AdamState::BETA2 * state.v[i] + (1.0 - AdamState::BETA2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + AdamState::EPS);
    }
    Ok(())
}

/// Class counts `(negatives, positives)` for the coreset.
fn coreset_counts(train: &Dataset, cfg: &DistillConfig) -> Result<(usize, usize)> {
    let (neg, pos) = train.class_counts();
    let m = cfg.m;
    let counts = match cfg.synthetic_ir {
        None => stratified_counts(m, neg, pos)?,
        Some(ir) => {
            let p = ((m as f64 / (1.0 + ir)).round() as usize).max(1).min(m - 1);
            (m - p, p)
        }
    };
    if cfg.init != Init::Gaussian && (counts.0 > neg || counts.1 > pos) {
        return Err(Error::invalid(
            "m",
            format!(
                "cannot subsample {} negatives and {} positives from {neg} and {pos}",
                counts.0, counts.1
            ),
        ));
    }
    Ok(counts)
}

/// Builds the starting coreset. Rows are ordered positives first.
///
/// The subsample draw uses the same stream as a stratified
/// [`crate::data::random_subset`] with the same seed, so with matching
/// composition the two select identical rows.
pub fn init_synthetic(train: &Dataset, cfg: &DistillConfig) -> Result<SyntheticSet> {
    cfg.validate(train)?;
    let (neg, pos) = coreset_counts(train, cfg)?;
    let d = train.n_features();
    let mut r = rng::seeded(cfg.seed);
    let y_class: Vec<u8> = (0..cfg.m).map(|i| u8::from(i < pos)).collect();
    let x = match cfg.init {
        Init::Subsample | Init::SubsampleNoise => {
            let rows = draw_by_class(train.labels(), neg, pos, &mut r);
            let mut x = train.features().select_rows(&rows);
            if cfg.init == Init::SubsampleNoise && cfg.noise_sigma > 0.0 {
                let noise = Normal::new(0.0, cfg.noise_sigma)
                    .map_err(|e| Error::invalid("noise_sigma", e.to_string()))?;
                // row-major order so the stream does not depend on layout
                for i in 0..cfg.m {
                    for j in 0..d {
                        x[(i, j)] += noise.sample(&mut r);
                    }
                }
            }
            x
        }
        Init::Gaussian => {
            let vals: Vec<f64> = (0..cfg.m * d).map(|_| StandardNormal.sample(&mut r)).collect();
            DMatrix::from_row_slice(cfg.m, d, &vals)
        }
    };
    let y = DVector::from_iterator(
        cfg.m,
        y_class.iter().map(|&c| if c == 1 { 1.0 } else { -1.0 }),
    );
    Ok(SyntheticSet { x, y, y_class })
}

/// Objective value of the current coreset's KRR predictor on every row of
/// `targets`.
pub fn full_target_loss(targets: &Dataset, s: &SyntheticSet, cfg: &DistillConfig) -> Result<f64> {
    let tape = KrrTape::forward(&s.x, &s.y, targets.features(), cfg.ridge, &cfg.kernel)?;
    let (loss, _) = loss_and_grad(&cfg.objective, tape.scores().as_slice(), targets.labels())?;
    Ok(loss)
}

/// Runs the optimization and returns the final coreset with its trace.
pub fn distill(train: &Dataset, cfg: &DistillConfig) -> Result<(SyntheticSet, DistillTrace)> {
    let mut trace = DistillTrace::default();
    let s = distill_traced(train, cfg, &mut trace)?;
    Ok((s, trace))
}

/// Like [`distill`], but records into a caller-owned trace so the steps up to
/// a failure remain available.
pub fn distill_traced(
    train: &Dataset,
    cfg: &DistillConfig,
    trace: &mut DistillTrace,
) -> Result<SyntheticSet> {
    let mut s = init_synthetic(train, cfg)?;
    let n = train.n_rows();
    let d = train.n_features();
    let batch = cfg.effective_batch_size(n);
    let mut shuffle_rng = rng::seeded(rng::derive_seed(cfg.seed, &[1]));
    let mut adam_x = AdamState::new(cfg.m * d);
    let mut adam_y = AdamState::new(cfg.m);
    let mut order: Vec<usize> = (0..n).collect();
    let mut step = 0;

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        for rows in order.chunks(batch) {
            let xt = train.features().select_rows(rows);
            let yt: Vec<u8> = rows.iter().map(|&r| train.labels()[r]).collect();
            let tape = KrrTape::forward(&s.x, &s.y, &xt, cfg.ridge, &cfg.kernel)?;
            let (loss, dz) = loss_and_grad(&cfg.objective, tape.scores().as_slice(), &yt)?;
            trace.records.push(TraceRecord {
                epoch,
                step,
                batch_loss: loss,
            });
            let diverged = |reason: String| Error::Divergence {
                epoch,
                step,
                reason,
            };
            if !loss.is_finite() {
                return Err(diverged(format!("batch loss is {loss}")));
            }
            let grads = tape.backward(&DVector::from_vec(dz))?;
            if grads.points.iter().chain(grads.labels.iter()).any(|g| !g.is_finite()) {
                return Err(diverged("non-finite gradient".into()));
            }
            adam_update(&mut adam_x, s.x.as_mut_slice(), grads.points.as_slice(), cfg.lr_x)?;
            if cfg.learn_labels {
                adam_update(&mut adam_y, s.y.as_mut_slice(), grads.labels.as_slice(), cfg.lr_y)?;
                s.y.apply(|v| *v = v.clamp(-LABEL_CLAMP, LABEL_CLAMP));
            }
            if let Some(v) = s.x.iter().find(|v| !(v.abs() <= RUNAWAY_BOUND)) {
                return Err(diverged(format!("coreset coordinate reached {v}")));
            }
            step += 1;
        }
        if let Some(every) = cfg.snapshot_every {
            if (epoch + 1) % every == 0 {
                trace.snapshots.push(Snapshot {
                    epoch,
                    step,
                    full_loss: full_target_loss(train, &s, cfg)?,
                });
            }
        }
    }
    Ok(s)
}

/// Writes the coreset in original units as CSV (`features..., y_class, y_s`)
/// plus a JSON sidecar (`.json`) with the configuration, final loss, and a
/// SHA-256 fingerprint of the training data.
pub fn export_coreset(
    s: &SyntheticSet,
    train: &Dataset,
    cfg: &DistillConfig,
    final_loss: Option<f64>,
    path: &Path,
) -> Result<()> {
    if s.x.ncols() != train.n_features() {
        return Err(Error::DimensionMismatch(format!(
            "coreset has {} columns, training data {}",
            s.x.ncols(),
            train.n_features()
        )));
    }
    let x = match train.standardization() {
        Some(t) => t.invert(&s.x)?,
        None => s.x.clone(),
    };
    let mut out = csv_header(train.feature_names(), &["y_class", "y_s"]);
    for i in 0..s.len() {
        for j in 0..x.ncols() {
            out.push_str(&x[(i, j)].to_string());
            out.push(',');
        }
        out.push_str(&format!("{},{}\n", s.y_class[i], s.y[i]));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))?;

    let (neg, pos) = s.class_counts();
    let sidecar = serde_json::json!({
        "m": s.len(),
        "d": s.x.ncols(),
        "class_counts": { "negative": neg, "positive": pos },
        "feature_names": train.feature_names(),
        "standardization": train.standardization(),
        "config": cfg,
        "final_loss": final_loss,
        "training_data_sha256": train.fingerprint(),
    });
    let json_path = path.with_extension("json");
    fs::write(&json_path, serde_json::to_string_pretty(&sidecar)?)
        .map_err(|e| Error::io(&json_path, e))
}

/// A coreset read back from [`export_coreset`] output, still in the units it
/// was written in.
#[derive(Debug, Clone, PartialEq)]
pub struct CoresetFile {
    pub feature_names: Vec<String>,
    pub set: SyntheticSet,
}

pub fn read_coreset_csv(path: &Path) -> Result<CoresetFile> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let w = header.len();
    if w < 3 || header[w - 2] != "y_class" || header[w - 1] != "y_s" {
        return Err(Error::InvalidDataset(format!(
            "{}: expected trailing columns y_class,y_s",
            path.display()
        )));
    }
    let d = w - 2;
    let mut values = Vec::new();
    let mut y = Vec::new();
    let mut y_class = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let parse = |k: usize| -> Result<f64> {
            record[k].parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                Error::InvalidDataset(format!(
                    "{}: row {}: bad value `{}`",
                    path.display(),
                    line + 1,
                    &record[k]
                ))
            })
        };
        for k in 0..d {
            values.push(parse(k)?);
        }
        y_class.push(match &record[d] {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(Error::InvalidDataset(format!(
                    "{}: row {}: y_class `{other}` is not 0 or 1",
                    path.display(),
                    line + 1
                )))
            }
        });
        y.push(parse(d + 1)?);
    }
    let m = y.len();
    Ok(CoresetFile {
        feature_names: header[..d].to_vec(),
        set: SyntheticSet {
            x: DMatrix::from_row_slice(m, d, &values),
            y: DVector::from_vec(y),
            y_class,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_synthetic, random_subset, standardize};
    use crate::kernel::median_bandwidth;

    fn setup(n: usize, ir: f64) -> (Dataset, KernelSpec) {
        let ds = standardize(&gen_synthetic(n, 4, ir, 2.0, 7).unwrap());
        let h = median_bandwidth(ds.features(), 0).unwrap();
        (ds, KernelSpec::Rbf { bandwidth: h })
    }

    #[test]
    fn adam_zero_gradient_is_a_no_op() {
        let mut st = AdamState::new(3);
        let mut p = vec![1.0, -2.0, 3.5];
        for _ in 0..10 {
            adam_update(&mut st, &mut p, &[0.0; 3], 0.1).unwrap();
        }
        assert_eq!(p, vec![1.0, -2.0, 3.5]);
        assert_eq!(st.steps(), 10);
    }

    #[test]
    fn adam_first_step_is_sign_like() {
        let mut st = AdamState::new(3);
        let mut p = vec![0.0; 3];
        let g = 0.37;
        adam_update(&mut st, &mut p, &[g, 2.0 * g, -g], 0.01).unwrap();
        // lr * g / (|g| + eps)
        let expect = 0.01 * g / (g + 1e-8);
        assert!((p[0] + expect).abs() < 1e-15);
        assert!((p[0] + 0.01).abs() < 1e-9);
        assert!((p[0] - p[1]).abs() < 1e-9);
        assert!((p[2] + p[0]).abs() < 1e-15);
        assert!(adam_update(&mut st, &mut p, &[0.0; 2], 0.01).is_err());
    }

    #[test]
    fn init_counts_follow_ir() {
        let (ds, k) = setup(400, 3.0);
        let mut cfg = DistillConfig::new(10, Objective::Mse, k);
        cfg.synthetic_ir = Some(9.0);
        let s = init_synthetic(&ds, &cfg).unwrap();
        assert_eq!(s.class_counts(), (9, 1));
        assert_eq!(s.y.as_slice()[..2], [1.0, -1.0]);
        cfg.synthetic_ir = None;
        let s = init_synthetic(&ds, &cfg).unwrap();
        assert_eq!(s.class_counts(), (7, 3));
        cfg.m = 1;
        assert!(init_synthetic(&ds, &cfg).is_err());
    }

    #[test]
    fn subsample_rows_come_from_train() {
        let (ds, k) = setup(200, 3.0);
        let cfg = DistillConfig::new(20, Objective::Mse, k);
        let s = init_synthetic(&ds, &cfg).unwrap();
        for i in 0..s.len() {
            let row = s.x.row(i);
            let found = (0..ds.n_rows())
                .any(|r| ds.features().row(r) == row && ds.labels()[r] == s.y_class[i]);
            assert!(found, "row {i} not in train");
        }
        // same draw as a stratified random subset with the same seed
        let sub = random_subset(&ds, 20, true, cfg.seed).unwrap();
        assert_eq!(sub.features(), &s.x);
        assert_eq!(sub.labels(), s.y_class.as_slice());
    }

    #[test]
    fn subsample_noise_displacement() {
        let (ds, k) = setup(3000, 1.0);
        let mut cfg = DistillConfig::new(2500, Objective::Mse, k);
        cfg.init = Init::SubsampleNoise;
        cfg.noise_sigma = 0.1;
        let noisy = init_synthetic(&ds, &cfg).unwrap();
        cfg.init = Init::Subsample;
        let clean = init_synthetic(&ds, &cfg).unwrap();
        let diff = &noisy.x - &clean.x;
        let mean_abs = diff.iter().map(|v| v.abs()).sum::<f64>() / diff.len() as f64;
        let expect = 0.1 * (2.0 / std::f64::consts::PI).sqrt();
        assert!((mean_abs - expect).abs() < 0.1 * expect, "{mean_abs} vs {expect}");
    }

    #[test]
    fn zero_epochs_returns_init() {
        let (ds, k) = setup(200, 3.0);
        let mut cfg = DistillConfig::new(12, Objective::Ce, k);
        cfg.epochs = 0;
        let (s, trace) = distill(&ds, &cfg).unwrap();
        assert_eq!(s, init_synthetic(&ds, &cfg).unwrap());
        assert!(trace.records.is_empty());
    }

    #[test]
    fn frozen_labels_and_conserved_classes() {
        let (ds, k) = setup(300, 4.0);
        let mut cfg = DistillConfig::new(12, Objective::Focal { gamma: 2.0 }, k);
        cfg.epochs = 5;
        cfg.batch_size = Some(64);
        cfg.learn_labels = false;
        let init = init_synthetic(&ds, &cfg).unwrap();
        let (s, trace) = distill(&ds, &cfg).unwrap();
        assert_eq!(s.y, init.y);
        assert_eq!(s.y_class, init.y_class);
        assert_ne!(s.x, init.x);
        assert_eq!(trace.records.len(), 5 * 300usize.div_ceil(64));
        assert!(trace.records.windows(2).all(|w| w[0].step < w[1].step));
    }

    #[test]
    fn labels_are_clamped() {
        let (ds, k) = setup(300, 4.0);
        let mut cfg = DistillConfig::new(10, Objective::Ce, k);
        cfg.epochs = 20;
        cfg.batch_size = Some(50);
        cfg.lr_y = 5.0;
        let (s, _) = distill(&ds, &cfg).unwrap();
        assert!(s.y.iter().all(|v| v.abs() <= LABEL_CLAMP));
    }

    #[test]
    fn deterministic_per_seed() {
        let (ds, k) = setup(300, 4.0);
        let mut cfg = DistillConfig::new(10, Objective::Asig {
            gamma: 2.0,
            alpha_w: 0.8,
            alpha_g: 1.0,
            beta_g: 0.0,
            ir: 4.0,
        }, k);
        cfg.epochs = 3;
        cfg.snapshot_every = Some(1);
        let a = distill(&ds, &cfg).unwrap();
        let b = distill(&ds, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.1.snapshots.len(), 3);
    }

    #[test]
    fn runaway_learning_rate_is_reported() {
        let (ds, k) = setup(300, 4.0);
        let mut cfg = DistillConfig::new(10, Objective::Ce, k);
        cfg.lr_x = 1e6;
        let mut trace = DistillTrace::default();
        let err = distill_traced(&ds, &cfg, &mut trace).unwrap_err();
        assert!(matches!(err, Error::Divergence { step: 0, .. }), "{err}");
        assert_eq!(trace.records.len(), 1);
    }

    #[test]
    fn export_roundtrip() {
        let (ds, k) = setup(200, 3.0);
        let mut cfg = DistillConfig::new(15, Objective::Ce, k);
        cfg.epochs = 2;
        let (s, trace) = distill(&ds, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("coreset.csv");
        export_coreset(&s, &ds, &cfg, trace.last_loss(), &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 16);
        let back = read_coreset_csv(&path).unwrap();
        let restd = ds.standardization().unwrap().apply(&back.set.x).unwrap();
        assert!((restd - &s.x).abs().max() < 1e-9);
        assert_eq!(back.set.y, s.y);
        assert_eq!(back.set.y_class, s.y_class);
        assert_eq!(back.feature_names, ds.feature_names());
        let side: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(path.with_extension("json")).unwrap()).unwrap();
        assert_eq!(side["m"], 15);
        assert_eq!(side["d"], 4);
        assert_eq!(side["training_data_sha256"], ds.fingerprint());
    }
}
