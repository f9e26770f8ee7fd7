//! Python bindings. Matrices cross the boundary as lists of rows.

use std::path::PathBuf;

use nalgebra::DMatrix;
use pyo3::exceptions::{PyArithmeticError, PyIOError, PyValueError};
use pyo3::prelude::*;

use tabkip::data::{self, SplitSpec};
use tabkip::distill::DistillConfig;
use tabkip::eval::{self, ClassifierSpec, EvalReport, SweepPlan, TrainingData};
use tabkip::kernel::{self, KernelSpec};
use tabkip::objectives::{self, Objective, ObjectiveKind, ObjectiveParams};
use tabkip::{Dataset, ErrorCategory, SyntheticSet};

fn to_py(e: tabkip::Error) -> PyErr {
    let msg = e.to_string();
    match e.category() {
        ErrorCategory::Config => PyValueError::new_err(msg),
        ErrorCategory::Data => match e {
            tabkip::Error::Io { .. } => PyIOError::new_err(msg),
            _ => PyValueError::new_err(msg),
        },
        ErrorCategory::Numerical => PyArithmeticError::new_err(msg),
    }
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let d = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != d) {
        return Err(PyValueError::new_err("rows have different lengths"));
    }
    Ok(DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]))
}

fn rows(x: &DMatrix<f64>) -> Vec<Vec<f64>> {
    x.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn rbf(train: &Dataset, bandwidth: Option<f64>, seed: u64) -> PyResult<KernelSpec> {
    let bandwidth = match bandwidth {
        Some(h) => h,
        None => kernel::median_bandwidth(train.features(), seed).map_err(to_py)?,
    };
    Ok(KernelSpec::Rbf { bandwidth })
}

fn objective(kind: &str, train: &Dataset) -> PyResult<Objective> {
    let kind: ObjectiveKind = kind.parse().map_err(to_py)?;
    Objective::from_kind(kind, &ObjectiveParams::default(), train).map_err(to_py)
}

fn classifier(name: &str, kernel: KernelSpec, seed: u64) -> PyResult<ClassifierSpec> {
    let spec = match name {
        "krr" => ClassifierSpec::krr(kernel),
        "logreg" => ClassifierSpec::logreg(),
        "knn" => ClassifierSpec::knn(),
        "cart" => ClassifierSpec::cart(),
        "forest" => ClassifierSpec::forest(),
        other => return Err(PyValueError::new_err(format!("unknown classifier `{other}`"))),
    };
    Ok(spec.with_seed(seed))
}

/// A labelled table; labels are 0 (negative) or 1 (positive).
#[pyclass(name = "Dataset", module = "tabkip", frozen)]
struct PyDataset {
    inner: Dataset,
}

#[pymethods]
impl PyDataset {
    #[new]
    #[pyo3(signature = (features, labels, names=None))]
    fn new(features: Vec<Vec<f64>>, labels: Vec<u8>, names: Option<Vec<String>>) -> PyResult<Self> {
        let x = matrix(&features)?;
        let names = names.unwrap_or_else(|| (0..x.ncols()).map(|j| format!("x{j}")).collect());
        let inner = Dataset::new(x, labels, names, None).map_err(to_py)?;
        Ok(PyDataset { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (n=4000, d=10, ir=10.0, separation=2.0, seed=0))]
    fn synthetic(n: usize, d: usize, ir: f64, separation: f64, seed: u64) -> PyResult<Self> {
        let inner = data::gen_synthetic(n, d, ir, separation, seed).map_err(to_py)?;
        Ok(PyDataset { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (path, label_column="label", positive_value="1"))]
    fn from_csv(path: PathBuf, label_column: &str, positive_value: &str) -> PyResult<Self> {
        let inner = data::load_csv(&path, label_column, positive_value).map_err(to_py)?;
        Ok(PyDataset { inner })
    }

    fn write_csv(&self, path: PathBuf) -> PyResult<()> {
        data::write_csv(&self.inner, &path).map_err(to_py)
    }

    fn standardize(&self) -> Self {
        PyDataset {
            inner: data::standardize(&self.inner),
        }
    }

    #[pyo3(signature = (test_fraction=0.2, stratified=true, seed=0))]
    fn split(&self, test_fraction: f64, stratified: bool, seed: u64) -> PyResult<(Self, Self)> {
        let spec = SplitSpec {
            test_fraction,
            stratified,
            seed,
        };
        let (train, test) = data::split(&self.inner, &spec).map_err(to_py)?;
        Ok((PyDataset { inner: train }, PyDataset { inner: test }))
    }

    #[pyo3(signature = (m, stratified=true, seed=0))]
    fn random_subset(&self, m: usize, stratified: bool, seed: u64) -> PyResult<Self> {
        let inner = data::random_subset(&self.inner, m, stratified, seed).map_err(to_py)?;
        Ok(PyDataset { inner })
    }

    fn imbalance_ratio(&self) -> f64 {
        data::imbalance_ratio(&self.inner)
    }

    #[pyo3(signature = (seed=0))]
    fn median_bandwidth(&self, seed: u64) -> PyResult<f64> {
        kernel::median_bandwidth(self.inner.features(), seed).map_err(to_py)
    }

    /// (negatives, positives)
    fn class_counts(&self) -> (usize, usize) {
        self.inner.class_counts()
    }

    #[getter]
    fn n_rows(&self) -> usize {
        self.inner.n_rows()
    }

    #[getter]
    fn n_features(&self) -> usize {
        self.inner.n_features()
    }

    #[getter]
    fn features(&self) -> Vec<Vec<f64>> {
        rows(self.inner.features())
    }

    #[getter]
    fn labels(&self) -> Vec<u8> {
        self.inner.labels().to_vec()
    }

    #[getter]
    fn feature_names(&self) -> Vec<String> {
        self.inner.feature_names().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.n_rows()
    }

    fn __repr__(&self) -> String {
        let (neg, pos) = self.inner.class_counts();
        format!(
            "Dataset(n_rows={}, n_features={}, negatives={neg}, positives={pos})",
            self.inner.n_rows(),
            self.inner.n_features()
        )
    }
}

/// A distilled coreset in the standardized units of its training set.
#[pyclass(name = "Coreset", module = "tabkip", frozen)]
struct PyCoreset {
    inner: SyntheticSet,
}

#[pymethods]
impl PyCoreset {
    #[getter]
    fn x(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.x)
    }

    #[getter]
    fn y(&self) -> Vec<f64> {
        self.inner.y.iter().copied().collect()
    }

    #[getter]
    fn y_class(&self) -> Vec<u8> {
        self.inner.y_class.clone()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        let (neg, pos) = self.inner.class_counts();
        format!("Coreset(m={}, negatives={neg}, positives={pos})", self.inner.len())
    }
}

/// Test-set metrics for one trained classifier.
#[pyclass(name = "Report", module = "tabkip", frozen, get_all)]
struct PyReport {
    auc: f64,
    f1: f64,
    balanced_accuracy: f64,
    minority_recall: f64,
    n_train: usize,
    n_test: usize,
    threshold: f64,
}

impl From<EvalReport> for PyReport {
    fn from(r: EvalReport) -> Self {
        PyReport {
            auc: r.auc,
            f1: r.f1,
            balanced_accuracy: r.balanced_accuracy,
            minority_recall: r.minority_recall,
            n_train: r.n_train,
            n_test: r.n_test,
            threshold: r.threshold,
        }
    }
}

#[pymethods]
impl PyReport {
    fn __repr__(&self) -> String {
        format!(
            "Report(auc={:.4}, f1={:.4}, balanced_accuracy={:.4}, minority_recall={:.4}, n_train={})",
            self.auc, self.f1, self.balanced_accuracy, self.minority_recall, self.n_train
        )
    }
}

/// Distills `train` to `m` points. Returns the coreset and the per-step
/// batch losses.
#[pyfunction]
#[pyo3(signature = (train, m, objective="ce", epochs=100, seed=0, bandwidth=None, lr_x=0.01, lr_y=0.005, learn_labels=true))]
#[allow(clippy::too_many_arguments)]
fn distill(
    py: Python<'_>,
    train: &PyDataset,
    m: usize,
    objective: &str,
    epochs: usize,
    seed: u64,
    bandwidth: Option<f64>,
    lr_x: f64,
    lr_y: f64,
    learn_labels: bool,
) -> PyResult<(PyCoreset, Vec<f64>)> {
    let train = &train.inner;
    let mut cfg = DistillConfig::new(m, self::objective(objective, train)?, rbf(train, bandwidth, seed)?);
    cfg.epochs = epochs;
    cfg.seed = seed;
    cfg.lr_x = lr_x;
    cfg.lr_y = lr_y;
    cfg.learn_labels = learn_labels;
    let (set, trace) = py.detach(|| tabkip::distill::distill(train, &cfg)).map_err(to_py)?;
    let losses = trace.records.iter().map(|r| r.batch_loss).collect();
    Ok((PyCoreset { inner: set }, losses))
}

/// Trains a classifier on a Dataset or Coreset and scores it on `test`.
/// For `krr` the RBF bandwidth defaults to the median heuristic on the
/// training points.
#[pyfunction]
#[pyo3(signature = (train, test, classifier="krr", bandwidth=None, threshold=0.5, seed=0))]
fn evaluate(
    py: Python<'_>,
    train: &Bound<'_, PyAny>,
    test: &PyDataset,
    classifier: &str,
    bandwidth: Option<f64>,
    threshold: f64,
    seed: u64,
) -> PyResult<PyReport> {
    let dataset = train.extract::<PyRef<'_, PyDataset>>().ok();
    let coreset = train.extract::<PyRef<'_, PyCoreset>>().ok();
    let (data, points): (TrainingData<'_>, _) = match (&dataset, &coreset) {
        (Some(d), _) => ((&d.inner).into(), d.inner.features()),
        (None, Some(c)) => ((&c.inner).into(), &c.inner.x),
        (None, None) => return Err(PyValueError::new_err("train must be a Dataset or a Coreset")),
    };
    let bandwidth = match bandwidth {
        Some(h) => h,
        None if classifier == "krr" => kernel::median_bandwidth(points, seed).map_err(to_py)?,
        None => 1.0,
    };
    let kernel = KernelSpec::Rbf { bandwidth };
    let spec = self::classifier(classifier, kernel, seed)?;
    let report = py
        .detach(|| {
            let model = eval::train_classifier(&spec, data)?;
            eval::evaluate(&model, &test.inner, threshold)
        })
        .map_err(to_py)?;
    Ok(report.into())
}

/// Area under the ROC curve; ties count half.
#[pyfunction]
fn auc(scores: Vec<f64>, labels: Vec<u8>) -> PyResult<f64> {
    eval::auc(&scores, &labels).map_err(to_py)
}

/// Projects `original` and each `(label, coreset)` onto the top two principal
/// components of `original`. Returns `(source, pc1, pc2, class)` rows.
#[pyfunction]
#[pyo3(signature = (original, coresets=Vec::new()))]
fn projection(
    original: &PyDataset,
    coresets: Vec<(String, PyRef<'_, PyCoreset>)>,
) -> PyResult<Vec<(String, f64, f64, u8)>> {
    let pairs: Vec<(String, &SyntheticSet)> = coresets.iter().map(|(l, c)| (l.clone(), &c.inner)).collect();
    let report = tabkip::pca::projection_report(&original.inner, &pairs).map_err(to_py)?;
    Ok(report.into_iter().map(|r| (r.source, r.pc1, r.pc2, r.class)).collect())
}

/// Runs the objective x size x classifier x seed grid and returns it as CSV.
#[pyfunction]
#[pyo3(signature = (train, test, objectives, sizes, classifiers=vec!["krr".to_string()], seeds=vec![0], epochs=100, bandwidth=None, jobs=0))]
#[allow(clippy::too_many_arguments)]
fn sweep(
    py: Python<'_>,
    train: &PyDataset,
    test: &PyDataset,
    objectives: Vec<String>,
    sizes: Vec<usize>,
    classifiers: Vec<String>,
    seeds: Vec<u64>,
    epochs: usize,
    bandwidth: Option<f64>,
    jobs: usize,
) -> PyResult<String> {
    let train_ds = &train.inner;
    let kernel = rbf(train_ds, bandwidth, seeds.first().copied().unwrap_or(0))?;
    let mut distill = DistillConfig::new(2, Objective::Mse, kernel);
    distill.epochs = epochs;
    let plan = SweepPlan {
        dataset: "python".into(),
        objectives: objectives
            .iter()
            .map(|k| objective(k, train_ds))
            .collect::<PyResult<_>>()?,
        sizes,
        classifiers: classifiers
            .iter()
            .map(|c| classifier(c, kernel, 0))
            .collect::<PyResult<_>>()?,
        seeds,
        include_random_baseline: true,
        include_full_baseline: true,
        distill,
        threshold: 0.5,
        jobs,
        keep_coresets_at: None,
    };
    let out = py
        .detach(|| eval::sweep(train_ds, &test.inner, &plan))
        .map_err(to_py)?;
    out.result.to_csv().map_err(to_py)
}

/// Grid-searches the asig boundary shift. Returns `(alpha_g, beta_g, auc)`.
#[pyfunction]
#[pyo3(signature = (baseline, grid_alpha, grid_beta, seed=0))]
fn calibrate_g(
    py: Python<'_>,
    baseline: &PyDataset,
    grid_alpha: Vec<f64>,
    grid_beta: Vec<f64>,
    seed: u64,
) -> PyResult<(f64, f64, f64)> {
    let r = py
        .detach(|| objectives::calibrate_g(&baseline.inner, &grid_alpha, &grid_beta, seed))
        .map_err(to_py)?;
    Ok((r.alpha_g, r.beta_g, r.auc))
}

#[pymodule(name = "tabkip")]
fn tabkip_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyCoreset>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(distill, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(auc, m)?)?;
    m.add_function(wrap_pyfunction!(projection, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate_g, m)?)?;
    Ok(())
}
