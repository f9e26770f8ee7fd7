//! Kernels, kernel ridge regression, and exact reverse-mode gradients of KRR
//! predictions with respect to the support set.
//!
//! Predictions are `Z = K_ts (K_ss + ridge * m * I)^-1 y_s`, where `m` is the
//! number of support points.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelSpec {
    /// `exp(-|x - x'|^2 / (2 h^2))`
    Rbf { bandwidth: f64 },
    /// `<x, x'>`
    Linear,
    /// `(<x, x'> + offset)^degree`
    Polynomial { degree: u32, offset: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Rbf { bandwidth } if !(bandwidth > 0.0 && bandwidth.is_finite()) => Err(
                Error::invalid("bandwidth", format!("{bandwidth} must be positive")),
            ),
            KernelSpec::Polynomial { degree: 0, .. } => {
                Err(Error::invalid("degree", "must be at least 1"))
            }
            KernelSpec::Polynomial { offset, .. } if !offset.is_finite() => {
                Err(Error::invalid("offset", "must be finite"))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Rbf { .. } => "rbf",
            KernelSpec::Linear => "linear",
            KernelSpec::Polynomial { .. } => "polynomial",
        }
    }
}

fn check_widths(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    if a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "kernel arguments have {} and {} columns",
            a.ncols(),
            b.ncols()
        )));
    }
    Ok(())
}

/// `out[(i, j)] = sum_k f(a[(i, k)], b[(j, k)])`, accumulated in column
/// order so every entry sums its terms in the same sequence.
fn pairwise(a: &DMatrix<f64>, b: &DMatrix<f64>, f: impl Fn(f64, f64) -> f64) -> DMatrix<f64> {
    let (na, d) = a.shape();
    let nb = b.nrows();
    let mut out = DMatrix::zeros(na, nb);
    for k in 0..d {
        let ak = a.column(k);
        let bk = b.column(k);
        for j in 0..nb {
            let bj = bk[j];
            let mut col = out.column_mut(j);
            for i in 0..na {
                col[i] += f(ak[i], bj);
            }
        }
    }
    out
}

fn inner_products(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    pairwise(a, b, |x, y| x * y)
}

fn squared_distances(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    pairwise(a, b, |x, y| (x - y) * (x - y))
}

/// Kernel matrix between the rows of `a` and the rows of `b`.
pub fn gram(a: &DMatrix<f64>, b: &DMatrix<f64>, spec: &KernelSpec) -> Result<DMatrix<f64>> {
    check_widths(a, b)?;
    spec.validate()?;
    Ok(match *spec {
        KernelSpec::Rbf { bandwidth } => {
            let scale = -1.0 / (2.0 * bandwidth * bandwidth);
            squared_distances(a, b).map(|s| (s * scale).exp())
        }
        KernelSpec::Linear => inner_products(a, b),
        KernelSpec::Polynomial { degree, offset } => {
            inner_products(a, b).map(|p| (p + offset).powi(degree as i32))
        }
    })
}

const MAX_BANDWIDTH_PAIRS: usize = 1_000_000;

/// Median pairwise Euclidean distance between rows.
///
/// All distinct pairs are used when there are at most 10^6 of them; otherwise
/// 10^6 pairs are sampled with the given seed. If the median is zero because
/// of duplicated rows, the median over the nonzero distances is returned.
pub fn median_bandwidth(x: &DMatrix<f64>, seed: u64) -> Result<f64> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::invalid("x", format!("need at least 2 rows, got {n}")));
    }
    let dist = |i: usize, j: usize| -> f64 {
        x.column_iter()
            .map(|c| (c[i] - c[j]) * (c[i] - c[j]))
            .sum::<f64>()
            .sqrt()
    };
    let total_pairs = n * (n - 1) / 2;
    let mut d: Vec<f64> = if total_pairs <= MAX_BANDWIDTH_PAIRS {
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| dist(i, j))
            .collect()
    } else {
        let mut r = rng::seeded(seed);
        (0..MAX_BANDWIDTH_PAIRS)
            .map(|_| {
                let i = r.random_range(0..n);
                let mut j = r.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                dist(i, j)
            })
            .collect()
    };
    let mut med = median(&mut d);
    if med == 0.0 {
        let mut nonzero: Vec<f64> = d.into_iter().filter(|&v| v > 0.0).collect();
        if nonzero.is_empty() {
            return Err(Error::InvalidDataset("all pairwise distances are zero".into()));
        }
        med = median(&mut nonzero);
    }
    Ok(med)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_unstable_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// A fitted kernel ridge regressor.
#[derive(Debug, Clone, PartialEq)]
pub struct KrrModel {
    pub support_points: DMatrix<f64>,
    pub support_labels: DVector<f64>,
    pub dual_coefficients: DVector<f64>,
    pub ridge: f64,
    pub kernel: KernelSpec,
}

/// Factorization of `K_ss + ridge * m * I` (plus a one-time jitter if the
/// first attempt was not positive definite).
struct RidgeSystem {
    chol: Cholesky<f64, Dyn>,
}

impl RidgeSystem {
    fn factor(k_ss: &DMatrix<f64>, ridge: f64) -> Result<Self> {
        let m = k_ss.nrows();
        let shift = ridge * m as f64;
        let mut a = k_ss.clone();
        diagonal_shift(&mut a, shift);
        if let Some(chol) = Cholesky::new(a.clone()) {
            return Ok(RidgeSystem { chol });
        }
        diagonal_shift(&mut a, 10.0 * shift);
        match Cholesky::new(a) {
            Some(chol) => Ok(RidgeSystem { chol }),
            None => Err(Error::Solve(diagnostics(k_ss, shift))),
        }
    }

    fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }
}

fn diagonal_shift(a: &mut DMatrix<f64>, s: f64) {
    for i in 0..a.nrows() {
        a[(i, i)] += s;
    }
}

fn diagnostics(k_ss: &DMatrix<f64>, shift: f64) -> String {
    let m = k_ss.nrows();
    let mut a = k_ss.clone();
    diagonal_shift(&mut a, 11.0 * shift);
    if a.iter().any(|v| !v.is_finite()) {
        return format!("{m}x{m} kernel matrix has non-finite entries (ridge shift {shift:e})");
    }
    let eig = SymmetricEigen::new(a).eigenvalues;
    let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    format!(
        "{m}x{m} system not positive definite after jitter: eigenvalues in [{lo:e}, {hi:e}], \
         condition estimate {:e}, ridge shift {shift:e}",
        hi.abs() / lo.abs().max(f64::MIN_POSITIVE)
    )
}

fn validate_fit_inputs(xs: &DMatrix<f64>, ys: &DVector<f64>, ridge: f64) -> Result<()> {
    if xs.nrows() == 0 {
        return Err(Error::invalid("support_points", "need at least one row"));
    }
    if ys.len() != xs.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} support labels for {} support points",
            ys.len(),
            xs.nrows()
        )));
    }
    if !(ridge > 0.0 && ridge.is_finite()) {
        return Err(Error::invalid("ridge", format!("{ridge} must be positive")));
    }
    Ok(())
}

/// Solves `(K_ss + ridge * m * I) dual = y_s` by Cholesky factorization.
pub fn krr_fit(
    xs: &DMatrix<f64>,
    ys: &DVector<f64>,
    ridge: f64,
    spec: &KernelSpec,
) -> Result<KrrModel> {
    validate_fit_inputs(xs, ys, ridge)?;
    let k_ss = gram(xs, xs, spec)?;
    let system = RidgeSystem::factor(&k_ss, ridge)?;
    Ok(KrrModel {
        support_points: xs.clone(),
        support_labels: ys.clone(),
        dual_coefficients: system.solve(ys),
        ridge,
        kernel: *spec,
    })
}

/// Scores `Z = K_ts * dual` for the rows of `xt`.
pub fn krr_predict(model: &KrrModel, xt: &DMatrix<f64>) -> Result<DVector<f64>> {
    let k_ts = gram(xt, &model.support_points, &model.kernel)?;
    Ok(k_ts * &model.dual_coefficients)
}

/// Forward pass that keeps what the backward pass needs.
pub struct KrrTape<'a> {
    xs: &'a DMatrix<f64>,
    xt: &'a DMatrix<f64>,
    kernel: KernelSpec,
    k_ts: DMatrix<f64>,
    k_ss: DMatrix<f64>,
    system: RidgeSystem,
    dual: DVector<f64>,
    scores: DVector<f64>,
}

/// Gradients of a scalar loss with respect to the support set.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportGradients {
    pub points: DMatrix<f64>,
    pub labels: DVector<f64>,
}

impl<'a> KrrTape<'a> {
    pub fn forward(
        xs: &'a DMatrix<f64>,
        ys: &DVector<f64>,
        xt: &'a DMatrix<f64>,
        ridge: f64,
        spec: &KernelSpec,
    ) -> Result<Self> {
        validate_fit_inputs(xs, ys, ridge)?;
        let k_ss = gram(xs, xs, spec)?;
        let k_ts = gram(xt, xs, spec)?;
        let system = RidgeSystem::factor(&k_ss, ridge)?;
        let dual = system.solve(ys);
        let scores = &k_ts * &dual;
        Ok(KrrTape {
            xs,
            xt,
            kernel: *spec,
            k_ts,
            k_ss,
            system,
            dual,
            scores,
        })
    }

    pub fn scores(&self) -> &DVector<f64> {
        &self.scores
    }

    /// Pulls `upstream = dL/dZ` back to the support points and labels.
    ///
    /// With `A = K_ss + ridge*m*I`, `alpha = A^-1 y_s` and `v = A^-1 K_ts^T g`:
    /// `dL/dy_s = v`, `dL/dK_ts = g alpha^T`, `dL/dK_ss = -v alpha^T`.
    pub fn backward(&self, upstream: &DVector<f64>) -> Result<SupportGradients> {
        if upstream.len() != self.scores.len() {
            return Err(Error::DimensionMismatch(format!(
                "upstream gradient has {} entries for {} scores",
                upstream.len(),
                self.scores.len()
            )));
        }
        let v = self.system.solve(&(self.k_ts.tr_mul(upstream)));
        let g_ts = upstream * self.dual.transpose();
        let g_ss = -(&v * self.dual.transpose());
        // X_s enters K_ss through both arguments.
        let g_ss_sym = &g_ss + g_ss.transpose();

        let xs = self.xs;
        let xt = self.xt;
        let points = match self.kernel {
            KernelSpec::Rbf { bandwidth } => {
                let inv_h2 = 1.0 / (bandwidth * bandwidth);
                // d k(x, s) / d s = k(x, s) (x - s) / h^2
                let w_ts = g_ts.component_mul(&self.k_ts);
                let w_ss = g_ss_sym.component_mul(&self.k_ss);
                let mut grad = w_ts.tr_mul(xt) + &w_ss * xs;
                let weight: Vec<f64> = (0..xs.nrows())
                    .map(|j| w_ts.column(j).sum() + w_ss.row(j).sum())
                    .collect();
                for (j, w) in weight.into_iter().enumerate() {
                    let mut row = grad.row_mut(j);
                    row -= xs.row(j) * w;
                }
                grad * inv_h2
            }
            KernelSpec::Linear => g_ts.tr_mul(xt) + &g_ss_sym * xs,
            KernelSpec::Polynomial { degree, offset } => {
                let d = degree as i32;
                let dpow = |p: f64| f64::from(degree) * (p + offset).powi(d - 1);
                let w_ts = g_ts.component_mul(&inner_products(xt, xs).map(dpow));
                let w_ss = g_ss_sym.component_mul(&inner_products(xs, xs).map(dpow));
                w_ts.tr_mul(xt) + &w_ss * xs
            }
        };
        Ok(SupportGradients { points, labels: v })
    }
}

/// Reverse-mode gradients of `<upstream, Z>` with respect to `X_s` and `y_s`.
pub fn krr_backward(
    xs: &DMatrix<f64>,
    ys: &DVector<f64>,
    xt: &DMatrix<f64>,
    ridge: f64,
    spec: &KernelSpec,
    upstream: &DVector<f64>,
) -> Result<SupportGradients> {
    KrrTape::forward(xs, ys, xt, ridge, spec)?.backward(upstream)
}
