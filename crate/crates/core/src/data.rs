//! Binary-labeled tabular datasets: ingestion, cleaning, standardization,
//! splitting, subsampling, profiling, and a Gaussian generator for desk-scale
//! experiments.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng;

/// Per-column affine transform recorded by [`standardize`].
///
/// `stddevs` use the sample convention (divide by N-1). Columns flagged in
/// `zero_variance` were shifted to zero and are mapped back to their mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub stddevs: Vec<f64>,
    pub zero_variance: Vec<bool>,
}

impl Standardization {
    pub fn width(&self) -> usize {
        self.means.len()
    }

    fn scale(&self, col: usize) -> f64 {
        if self.zero_variance[col] {
            1.0
        } else {
            self.stddevs[col]
        }
    }

    /// Maps original-unit rows into standardized units.
    pub fn apply(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_width(x.ncols())?;
        Ok(DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
            if self.zero_variance[j] {
                0.0
            } else {
                (x[(i, j)] - self.means[j]) / self.stddevs[j]
            }
        }))
    }

    /// Maps standardized rows back into original units.
    pub fn invert(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_width(x.ncols())?;
        Ok(DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
            x[(i, j)] * self.scale(j) + self.means[j]
        }))
    }

    fn check_width(&self, d: usize) -> Result<()> {
        if d != self.width() {
            return Err(Error::DimensionMismatch(format!(
                "standardization covers {} columns, matrix has {d}",
                self.width()
            )));
        }
        Ok(())
    }

    /// Composes `self` (applied first) with `then` into a single transform.
    fn compose(&self, then: &Standardization) -> Standardization {
        let d = self.width();
        let mut means = Vec::with_capacity(d);
        let mut stddevs = Vec::with_capacity(d);
        let mut zero_variance = Vec::with_capacity(d);
        for j in 0..d {
            let zero = self.zero_variance[j] || then.zero_variance[j];
            means.push(self.means[j] + self.scale(j) * then.means[j]);
            stddevs.push(if zero {
                0.0
            } else {
                self.stddevs[j] * then.stddevs[j]
            });
            zero_variance.push(zero);
        }
        Standardization {
            means,
            stddevs,
            zero_variance,
        }
    }
}

/// A validated binary classification dataset.
///
/// Invariants enforced at construction: all features finite, labels in
/// {0, 1}, both classes present, and names/labels sized to the matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: DMatrix<f64>,
    labels: Vec<u8>,
    feature_names: Vec<String>,
    standardization: Option<Standardization>,
}

impl Dataset {
    pub fn new(
        features: DMatrix<f64>,
        labels: Vec<u8>,
        feature_names: Vec<String>,
        standardization: Option<Standardization>,
    ) -> Result<Self> {
        let (n, d) = features.shape();
        if labels.len() != n {
            return Err(Error::InvalidDataset(format!(
                "{} labels for {n} rows",
                labels.len()
            )));
        }
        if feature_names.len() != d {
            return Err(Error::InvalidDataset(format!(
                "{} feature names for {d} columns",
                feature_names.len()
            )));
        }
        if d == 0 {
            return Err(Error::InvalidDataset("no feature columns".into()));
        }
        if let Some(s) = &standardization {
            if s.width() != d {
                return Err(Error::InvalidDataset(format!(
                    "standardization covers {} columns, dataset has {d}",
                    s.width()
                )));
            }
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite feature value".into()));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidDataset(format!("label {bad} is not 0 or 1")));
        }
        let pos = labels.iter().filter(|&&l| l == 1).count();
        if pos == 0 || pos == n {
            return Err(Error::InvalidDataset(format!(
                "both classes required, got {pos} positives out of {n} rows"
            )));
        }
        Ok(Dataset {
            features,
            labels,
            feature_names,
            standardization,
        })
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn standardization(&self) -> Option<&Standardization> {
        self.standardization.as_ref()
    }

    pub fn n_rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    /// `(negatives, positives)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l == 1).count();
        (self.labels.len() - pos, pos)
    }

    /// Labels encoded as -1 / +1.
    pub fn signed_labels(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.labels.len(),
            self.labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }),
        )
    }

    /// Builds a dataset from a subset of rows, in the given order. Metadata is
    /// carried over unchanged.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Dataset> {
        Dataset::new(
            self.features.select_rows(rows),
            rows.iter().map(|&r| self.labels[r]).collect(),
            self.feature_names.clone(),
            self.standardization.clone(),
        )
    }

    /// SHA-256 over the row-major feature bytes followed by the labels.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for i in 0..self.n_rows() {
            for j in 0..self.n_features() {
                h.update(self.features[(i, j)].to_le_bytes());
            }
        }
        h.update(&self.labels);
        hex::encode(h.finalize())
    }
}

/// Loads a headered CSV file. Rows with any empty or unparseable feature
/// cell, or an empty label cell, are deleted; labels equal to
/// `positive_value` become 1 and everything else 0. Row order is preserved.
pub fn load_csv(path: &Path, label_column: &str, positive_value: &str) -> Result<Dataset> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header = reader.headers().map_err(csv_err)?.clone();
    let label_idx = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| {
            Error::InvalidDataset(format!(
                "{}: label column `{label_column}` not in header",
                path.display()
            ))
        })?;
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h.to_string())
        .collect();
    let width = header.len();

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut row = Vec::with_capacity(width - 1);
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        if record.len() != width {
            continue;
        }
        row.clear();
        let mut label = None;
        let mut complete = true;
        for (i, cell) in record.iter().enumerate() {
            if i == label_idx {
                if cell.is_empty() {
                    complete = false;
                    break;
                }
                label = Some(u8::from(cell == positive_value));
            } else {
                match cell.parse::<f64>() {
                    Ok(v) if !cell.is_empty() && v.is_finite() => row.push(v),
                    _ => {
                        complete = false;
                        break;
                    }
                }
            }
        }
        if let (true, Some(l)) = (complete, label) {
            values.extend_from_slice(&row);
            labels.push(l);
        }
    }
    if labels.is_empty() {
        return Err(Error::InvalidDataset(format!(
            "{}: no rows survive cleaning",
            path.display()
        )));
    }
    let features = DMatrix::from_row_slice(labels.len(), width - 1, &values);
    Dataset::new(features, labels, feature_names, None)
}

/// Writes the dataset as CSV (features then `label`) and a JSON sidecar
/// (same path, `.json` extension) with names, standardization, class counts,
/// and imbalance ratio.
pub fn write_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(&csv_header(ds.feature_names(), &["label"]));
    for i in 0..ds.n_rows() {
        let mut cells: Vec<String> = (0..ds.n_features())
            .map(|j| ds.features[(i, j)].to_string())
            .collect();
        cells.push(ds.labels[i].to_string());
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))?;

    let (neg, pos) = ds.class_counts();
    let sidecar = serde_json::json!({
        "feature_names": ds.feature_names(),
        "standardization": ds.standardization(),
        "class_counts": { "negative": neg, "positive": pos },
        "imbalance_ratio": imbalance_ratio(ds),
    });
    let json_path = path.with_extension("json");
    let text = serde_json::to_string_pretty(&sidecar)?;
    fs::write(&json_path, text).map_err(|e| Error::io(&json_path, e))
}

pub(crate) fn csv_header(names: &[String], extra: &[&str]) -> String {
    let mut cols: Vec<String> = names.iter().map(|n| csv_quote(n)).collect();
    cols.extend(extra.iter().map(|s| s.to_string()));
    let mut line = cols.join(",");
    line.push('\n');
    line
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Majority count over minority count (always >= 1).
pub fn imbalance_ratio(ds: &Dataset) -> f64 {
    let (neg, pos) = ds.class_counts();
    neg.max(pos) as f64 / neg.min(pos) as f64
}

/// Shifts and scales every column to sample mean 0 and sample stddev 1.
///
/// Zero-variance columns become all zeros and are flagged. If the input
/// already carries a transform, the new one is composed onto it so the
/// recorded parameters still map back to the original units.
pub fn standardize(ds: &Dataset) -> Dataset {
    let (n, d) = ds.features.shape();
    let mut means = Vec::with_capacity(d);
    let mut stddevs = Vec::with_capacity(d);
    let mut zero_variance = Vec::with_capacity(d);
    for col in ds.features.column_iter() {
        let mean = col.iter().sum::<f64>() / n as f64;
        let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
        let sd = if n > 1 { (ss / (n - 1) as f64).sqrt() } else { 0.0 };
        let zero = !(sd > 0.0) || col.iter().all(|&v| v == col[0]);
        means.push(mean);
        stddevs.push(if zero { 0.0 } else { sd });
        zero_variance.push(zero);
    }
    let step = Standardization {
        means,
        stddevs,
        zero_variance,
    };
    let features = step
        .apply(&ds.features)
        .expect("transform built from the same matrix");
    let recorded = match &ds.standardization {
        Some(prev) => prev.compose(&step),
        None => step,
    };
    Dataset {
        features,
        labels: ds.labels.clone(),
        feature_names: ds.feature_names.clone(),
        standardization: Some(recorded),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub stratified: bool,
    pub seed: u64,
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::invalid(
                "test_fraction",
                format!("{} is not strictly between 0 and 1", self.test_fraction),
            ));
        }
        Ok(())
    }
}

fn indices_of(labels: &[u8], class: u8) -> Vec<usize> {
    labels
        .iter()
        .enumerate()
        .filter(|&(_, &l)| l == class)
        .map(|(i, _)| i)
        .collect()
}

/// Deterministic train/test partition. Both parts keep the original row
/// order. `|test| = round(N * test_fraction)`; with stratification the
/// positive share of the test part is `round(N_pos * test_fraction)`.
pub fn split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    spec.validate()?;
    let n = ds.n_rows();
    if n < 4 {
        return Err(Error::invalid("split", format!("need at least 4 rows, got {n}")));
    }
    let n_test = (n as f64 * spec.test_fraction).round() as usize;
    if n_test == 0 || n_test >= n {
        return Err(Error::invalid(
            "test_fraction",
            format!("yields {n_test} test rows out of {n}"),
        ));
    }
    let mut rng = rng::seeded(spec.seed);
    let mut test_rows = if spec.stratified {
        let (neg, pos) = ds.class_counts();
        if neg < 2 || pos < 2 {
            return Err(Error::invalid(
                "stratified",
                format!("each class needs at least 2 rows, got {neg} negatives and {pos} positives"),
            ));
        }
        let pos_test = ((pos as f64 * spec.test_fraction).round() as usize).clamp(1, pos - 1);
        let neg_test = n_test.checked_sub(pos_test).filter(|&k| k >= 1 && k < neg);
        let Some(neg_test) = neg_test else {
            return Err(Error::invalid(
                "test_fraction",
                format!("cannot place {n_test} test rows with {pos_test} positives"),
            ));
        };
        let mut p = indices_of(&ds.labels, 1);
        let mut q = indices_of(&ds.labels, 0);
        p.shuffle(&mut rng);
        q.shuffle(&mut rng);
        p.truncate(pos_test);
        q.truncate(neg_test);
        p.extend(q);
        p
    } else {
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut rng);
        all.truncate(n_test);
        all
    };
    test_rows.sort_unstable();
    let mut in_test = vec![false; n];
    for &r in &test_rows {
        in_test[r] = true;
    }
    let train_rows: Vec<usize> = (0..n).filter(|&r| !in_test[r]).collect();
    Ok((ds.select_rows(&train_rows)?, ds.select_rows(&test_rows)?))
}

/// Class counts for a stratified draw of `m` rows:
/// positives = max(1, round(m * N_pos / N)), leaving at least one negative.
pub fn stratified_counts(m: usize, neg: usize, pos: usize) -> Result<(usize, usize)> {
    let n = neg + pos;
    if m < 2 {
        return Err(Error::invalid(
            "m",
            format!("stratified draw of {m} rows cannot hold both classes"),
        ));
    }
    let want = ((m as f64 * pos as f64 / n as f64).round() as usize).max(1);
    let take_pos = want.min(pos).min(m - 1).max(m.saturating_sub(neg));
    let take_neg = m - take_pos;
    if take_pos == 0 || take_pos > pos || take_neg == 0 || take_neg > neg {
        return Err(Error::invalid(
            "m",
            format!("cannot draw {m} rows from {pos} positives and {neg} negatives"),
        ));
    }
    Ok((take_neg, take_pos))
}

/// Draws `pos_count` positive and `neg_count` negative row indices without
/// replacement. Returned positives first, each class in draw order.
pub(crate) fn draw_by_class(
    labels: &[u8],
    neg_count: usize,
    pos_count: usize,
    rng: &mut rng::Rng,
) -> Vec<usize> {
    let mut p = indices_of(labels, 1);
    let mut q = indices_of(labels, 0);
    p.shuffle(rng);
    q.shuffle(rng);
    p.truncate(pos_count);
    q.truncate(neg_count);
    p.extend(q);
    p
}

/// Samples `m` rows without replacement. Stratified draws follow
/// [`stratified_counts`]; plain draws are uniform and fail if they happen to
/// miss a class.
pub fn random_subset(ds: &Dataset, m: usize, stratified: bool, seed: u64) -> Result<Dataset> {
    let n = ds.n_rows();
    if m == 0 || m > n {
        return Err(Error::invalid("m", format!("{m} is outside 1..={n}")));
    }
    let mut rng = rng::seeded(seed);
    let rows = if stratified {
        let (neg, pos) = ds.class_counts();
        let (take_neg, take_pos) = stratified_counts(m, neg, pos)?;
        draw_by_class(&ds.labels, take_neg, take_pos, &mut rng)
    } else {
        rand::seq::index::sample(&mut rng, n, m).into_vec()
    };
    ds.select_rows(&rows)
}

/// Two unit-covariance Gaussian classes in `d` dimensions. Negatives are
/// centred at the origin, positives at `separation` along a random unit
/// direction. The positive count is max(1, round(n / (1 + ir))).
pub fn gen_synthetic(n: usize, d: usize, ir: f64, separation: f64, seed: u64) -> Result<Dataset> {
    if n < 10 {
        return Err(Error::invalid("n", format!("{n} < 10")));
    }
    if d == 0 {
        return Err(Error::invalid("d", "must be at least 1"));
    }
    if !(ir >= 1.0) || !ir.is_finite() {
        return Err(Error::invalid("ir", format!("{ir} < 1")));
    }
    if !(separation >= 0.0) || !separation.is_finite() {
        return Err(Error::invalid("separation", format!("{separation} is negative")));
    }
    let mut rng = rng::seeded(seed);
    let direction = loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            break v.into_iter().map(|x| x / norm).collect::<Vec<_>>();
        }
    };
    let pos = ((n as f64 / (1.0 + ir)).round() as usize).clamp(1, n - 1);
    let mut labels: Vec<u8> = (0..n).map(|i| u8::from(i < pos)).collect();
    labels.shuffle(&mut rng);
    let mut values = Vec::with_capacity(n * d);
    for &l in &labels {
        for &u in &direction {
            let z: f64 = StandardNormal.sample(&mut rng);
            values.push(z + if l == 1 { separation * u } else { 0.0 });
        }
    }
    let features = DMatrix::from_row_slice(n, d, &values);
    let names = (0..d).map(|j| format!("x{j}")).collect();
    Dataset::new(features, labels, names, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn toy(labels: Vec<u8>) -> Dataset {
        let n = labels.len();
        let features = DMatrix::from_fn(n, 2, |i, j| (i * 2 + j) as f64);
        Dataset::new(features, labels, vec!["a".into(), "b".into()], None).unwrap()
    }

    #[test]
    fn load_drops_rows_with_missing_cells() {
        let f = write_tmp("a,b,default\n1,2,yes\n3,,no\n5,6,no\n7,8,yes\n9,10,no\n");
        let ds = load_csv(f.path(), "default", "yes").unwrap();
        assert_eq!(ds.n_rows(), 4);
        assert_eq!(ds.labels(), &[1, 0, 1, 0]);
        assert_eq!(ds.features()[(1, 0)], 5.0);
        assert_eq!(ds.feature_names(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn load_keeps_clean_file_unchanged() {
        let mut text = String::from("y,x\n");
        for i in 0..100 {
            text.push_str(&format!("{},{}\n", i % 3 == 0, i as f64 * 0.5));
        }
        let f = write_tmp(&text);
        let ds = load_csv(f.path(), "y", "true").unwrap();
        assert_eq!(ds.n_rows(), 100);
        for i in 0..100 {
            assert_eq!(ds.features()[(i, 0)], i as f64 * 0.5);
        }
        assert_eq!(ds.class_counts(), (66, 34));
    }

    #[test]
    fn load_errors() {
        let missing = load_csv(Path::new("/nonexistent/file.csv"), "y", "1");
        assert!(matches!(missing, Err(Error::Io { .. })));

        let f = write_tmp("a,b\n1,2\n");
        assert!(matches!(load_csv(f.path(), "y", "1"), Err(Error::InvalidDataset(_))));

        let f = write_tmp("a,y\n,1\nx,0\n");
        assert!(matches!(load_csv(f.path(), "y", "1"), Err(Error::InvalidDataset(_))));

        let f = write_tmp("a,y\n1,1\n2,1\n");
        assert!(matches!(load_csv(f.path(), "y", "1"), Err(Error::InvalidDataset(_))));
    }

    #[test]
    fn imbalance_ratio_is_majority_over_minority() {
        let mut labels = vec![0u8; 90];
        labels.extend(vec![1u8; 10]);
        assert_eq!(imbalance_ratio(&toy(labels)), 9.0);

        let mut labels = vec![0u8; 9310];
        labels.extend(vec![1u8; 5475]);
        let ir = imbalance_ratio(&toy(labels));
        assert!((ir - 1.7005).abs() < 1e-4, "{ir}");

        let mut labels = vec![0u8; 139_974];
        labels.extend(vec![1u8; 10_026]);
        let ir = imbalance_ratio(&toy(labels));
        assert!((ir - 13.961).abs() < 1e-3, "{ir}");
    }

    #[test]
    fn standardize_uses_sample_stddev() {
        let features = DMatrix::from_row_slice(2, 2, &[2.0, 5.0, 4.0, 5.0]);
        let ds = Dataset::new(features, vec![0, 1], vec!["a".into(), "c".into()], None).unwrap();
        let s = standardize(&ds);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.features()[(0, 0)] + h).abs() < 1e-15);
        assert!((s.features()[(1, 0)] - h).abs() < 1e-15);
        let t = s.standardization().unwrap();
        assert_eq!(t.means[0], 3.0);
        assert!((t.stddevs[0] - 2f64.sqrt()).abs() < 1e-15);
        // constant column
        assert_eq!(s.features()[(0, 1)], 0.0);
        assert_eq!(s.features()[(1, 1)], 0.0);
        assert!(t.zero_variance[1]);
        assert!(!t.zero_variance[0]);
    }

    #[test]
    fn standardize_inverse_roundtrip() {
        let ds = gen_synthetic(200, 4, 3.0, 1.0, 5).unwrap();
        let s = standardize(&ds);
        let back = s.standardization().unwrap().invert(s.features()).unwrap();
        assert!((back - ds.features()).abs().max() < 1e-12);
        // double standardization composes
        let s2 = standardize(&s);
        assert!((s2.features() - s.features()).abs().max() < 1e-9);
        let back2 = s2.standardization().unwrap().invert(s2.features()).unwrap();
        assert!((back2 - ds.features()).abs().max() < 1e-9);
    }

    #[test]
    fn stratified_split_counts() {
        let mut labels = vec![0u8; 90];
        labels.extend(vec![1u8; 10]);
        let ds = toy(labels);
        let spec = SplitSpec {
            test_fraction: 0.2,
            stratified: true,
            seed: 3,
        };
        let (train, test) = split(&ds, &spec).unwrap();
        assert_eq!(test.n_rows(), 20);
        assert_eq!(test.class_counts().1, 2);
        assert_eq!(train.n_rows(), 80);
        let (train2, test2) = split(&ds, &spec).unwrap();
        assert_eq!(train, train2);
        assert_eq!(test, test2);
    }

    #[test]
    fn half_split_is_exhaustive() {
        let ds = toy(vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1]);
        for stratified in [false, true] {
            let spec = SplitSpec {
                test_fraction: 0.5,
                stratified,
                seed: 11,
            };
            let (train, test) = split(&ds, &spec).unwrap();
            assert_eq!((train.n_rows(), test.n_rows()), (5, 5));
            // first feature encodes the row id: 2*i
            let mut ids: Vec<usize> = train
                .features()
                .column(0)
                .iter()
                .chain(test.features().column(0).iter())
                .map(|&v| v as usize / 2)
                .collect();
            ids.sort_unstable();
            assert_eq!(ids, (0..10).collect::<Vec<_>>());
        }
    }

    #[test]
    fn split_preconditions() {
        let ds = toy(vec![0, 1, 0]);
        let spec = SplitSpec {
            test_fraction: 0.5,
            stratified: false,
            seed: 0,
        };
        assert!(split(&ds, &spec).is_err());
        let ds = toy(vec![0, 1, 0, 0, 0]);
        let spec = SplitSpec {
            stratified: true,
            ..spec
        };
        assert!(split(&ds, &spec).is_err());
        let bad = SplitSpec {
            test_fraction: 1.0,
            ..spec
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn stratified_subset_counts() {
        let ds = gen_synthetic(1000, 2, 9.0, 1.0, 1).unwrap();
        let sub = random_subset(&ds, 100, true, 4).unwrap();
        assert_eq!(sub.class_counts(), (90, 10));

        let ds = gen_synthetic(1500, 2, 14.0, 1.0, 1).unwrap();
        let sub = random_subset(&ds, 10, true, 4).unwrap();
        assert_eq!(sub.class_counts(), (9, 1));
    }

    #[test]
    fn full_subset_is_permutation() {
        let ds = gen_synthetic(50, 3, 4.0, 1.0, 2).unwrap();
        let sub = random_subset(&ds, 50, false, 9).unwrap();
        let key = |d: &Dataset| {
            let mut rows: Vec<Vec<u64>> = (0..d.n_rows())
                .map(|i| {
                    let mut r: Vec<u64> = d.features().row(i).iter().map(|v| v.to_bits()).collect();
                    r.push(d.labels()[i] as u64);
                    r
                })
                .collect();
            rows.sort();
            rows
        };
        assert_eq!(key(&ds), key(&sub));
        assert!(random_subset(&ds, 51, false, 9).is_err());
        assert!(random_subset(&ds, 0, true, 9).is_err());
    }

    #[test]
    fn synthetic_generator_contract() {
        let ds = gen_synthetic(1000, 5, 9.0, 2.0, 42).unwrap();
        assert_eq!(ds.class_counts().1, 100);
        assert_eq!(ds, gen_synthetic(1000, 5, 9.0, 2.0, 42).unwrap());
        assert_ne!(ds, gen_synthetic(1000, 5, 9.0, 2.0, 43).unwrap());
        assert!(gen_synthetic(9, 5, 9.0, 2.0, 42).is_err());
        assert!(gen_synthetic(100, 5, 0.5, 2.0, 42).is_err());
    }

    #[test]
    fn write_csv_roundtrips() {
        let ds = standardize(&gen_synthetic(30, 3, 2.0, 1.0, 8).unwrap());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.csv");
        write_csv(&ds, &path).unwrap();
        let back = load_csv(&path, "label", "1").unwrap();
        assert_eq!(back.features(), ds.features());
        assert_eq!(back.labels(), ds.labels());
        let side: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(path.with_extension("json")).unwrap()).unwrap();
        assert_eq!(side["class_counts"]["positive"], 10);
        assert_eq!(side["imbalance_ratio"], 2.0);
    }
}
