//! Independent reference implementations used as test oracles. Nothing here
//! calls into the library's numerical code.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use tabkip::kernel::KernelSpec;
use tabkip::rng::{self, Rng};

pub fn normal(r: &mut Rng) -> f64 {
    StandardNormal.sample(r)
}

pub fn normal_matrix(r: &mut Rng, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    let v: Vec<f64> = (0..rows * cols)
        .map(|_| scale * normal(r))
        .collect();
    DMatrix::from_row_slice(rows, cols, &v)
}

pub fn normal_vector(r: &mut Rng, n: usize, scale: f64) -> DVector<f64> {
    DVector::from_iterator(n, (0..n).map(|_| scale * normal(r)))
}

/// Random 0/1 labels with both classes present.
pub fn labels(r: &mut Rng, n: usize) -> Vec<u8> {
    loop {
        let l: Vec<u8> = (0..n).map(|_| u8::from(r.random_bool(0.3))).collect();
        if l.contains(&0) && l.contains(&1) {
            return l;
        }
    }
}

pub fn seeded(seed: u64) -> Rng {
    rng::seeded(seed)
}

/// Kernel value from its textbook formula, one pair at a time.
pub fn kernel_value(a: &[f64], b: &[f64], spec: &KernelSpec) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    match *spec {
        KernelSpec::Rbf { bandwidth } => {
            let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
            (-d2 / (2.0 * bandwidth * bandwidth)).exp()
        }
        KernelSpec::Linear => dot,
        KernelSpec::Polynomial { degree, offset } => (dot + offset).powi(degree as i32),
    }
}

fn rows(x: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..x.nrows()).map(|i| x.row(i).iter().copied().collect()).collect()
}

pub fn gram_oracle(a: &DMatrix<f64>, b: &DMatrix<f64>, spec: &KernelSpec) -> Vec<Vec<f64>> {
    let (ra, rb) = (rows(a), rows(b));
    ra.iter()
        .map(|x| rb.iter().map(|y| kernel_value(x, y, spec)).collect())
        .collect()
}

/// Gaussian elimination with partial pivoting on a dense copy.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Ridge predictions `K_ts (K_ss + ridge m I)^-1 y_s` by direct solve.
pub fn krr_oracle(
    xs: &DMatrix<f64>,
    ys: &DVector<f64>,
    xt: &DMatrix<f64>,
    ridge: f64,
    spec: &KernelSpec,
) -> (Vec<f64>, Vec<f64>) {
    let m = xs.nrows();
    let mut a = gram_oracle(xs, xs, spec);
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += ridge * m as f64;
    }
    let dual = dense_solve(a, ys.iter().copied().collect());
    let kts = gram_oracle(xt, xs, spec);
    let z = kts
        .iter()
        .map(|row| row.iter().zip(&dual).map(|(k, d)| k * d).sum())
        .collect();
    (z, dual)
}

/// Central differences of `f` at `x`, one coordinate at a time.
pub fn central_differences(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            p[i] = x[i] + h;
            let up = f(&p);
            p[i] = x[i] - h;
            let down = f(&p);
            p[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Largest coordinate-wise relative error, with an absolute floor so that
/// coordinates that are zero up to rounding do not dominate.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
        .fold(0.0, f64::max)
}

/// AUC by counting every positive/negative pair.
pub fn brute_force_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if labels[i] != 1 {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] != 0 {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Four tight clusters in XOR layout. Cluster sizes are skewed slightly so a
/// single split still has a (small) Gini gain to take.
pub fn xor_data(r: &mut Rng, n: usize) -> (DMatrix<f64>, Vec<u8>) {
    let centres = [(1.0, 1.0, 1u8, 1.1), (-1.0, -1.0, 1, 0.9), (1.0, -1.0, 0, 0.9), (-1.0, 1.0, 0, 1.1)];
    let mut v = Vec::new();
    let mut y = Vec::new();
    for &(cx, cy, label, weight) in &centres {
        let count = (n as f64 * weight) as usize;
        for _ in 0..count {
            let ex: f64 = StandardNormal.sample(r);
            let ey: f64 = StandardNormal.sample(r);
            v.push(cx + 0.1 * ex);
            v.push(cy + 0.1 * ey);
            y.push(label);
        }
    }
    (DMatrix::from_row_slice(y.len(), 2, &v), y)
}

/// A random orthogonal matrix from Gram-Schmidt on Gaussian columns.
pub fn random_rotation(r: &mut Rng, d: usize) -> DMatrix<f64> {
    let mut q = normal_matrix(r, d, d, 1.0);
    for j in 0..d {
        for k in 0..j {
            let proj = q.column(j).dot(&q.column(k));
            let ck = q.column(k).clone_owned();
            q.column_mut(j).axpy(-proj, &ck, 1.0);
        }
        let norm = q.column(j).norm();
        q.column_mut(j).unscale_mut(norm);
    }
    q
}
