//! Principal component projections in a basis fit on the original data.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::distill::SyntheticSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: DVector<f64>,
    /// k x D, orthonormal rows.
    pub components: DMatrix<f64>,
    /// Nonincreasing sample variances along each component.
    pub explained_variance: DVector<f64>,
}

/// Top-`k` eigenvectors of the sample covariance (n - 1 denominator).
///
/// Each component is oriented so that its largest-magnitude coordinate is
/// positive (earliest coordinate on exact ties).
pub fn pca_fit(x: &DMatrix<f64>, k: usize) -> Result<PcaModel> {
    let (n, d) = x.shape();
    if n < 2 {
        return Err(Error::invalid("x", format!("need at least 2 rows, got {n}")));
    }
    if k == 0 || k > d.min(n - 1) {
        return Err(Error::invalid(
            "k",
            format!("{k} is outside 1..={}", d.min(n - 1)),
        ));
    }
    let mean = x.row_mean().transpose();
    let mut centered = x.clone();
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    let cov = centered.tr_mul(&centered) / (n - 1) as f64;
    if cov.trace() <= 0.0 {
        return Err(Error::InvalidDataset("zero total variance".into()));
    }
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let mut components = DMatrix::zeros(k, d);
    let mut explained = DVector::zeros(k);
    for (r, &c) in order.iter().take(k).enumerate() {
        let v = eig.eigenvectors.column(c);
        let lead = (0..d).fold(0, |best, j| if v[j].abs() > v[best].abs() { j } else { best });
        let sign = if v[lead] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..d {
            components[(r, j)] = sign * v[j];
        }
        explained[r] = eig.eigenvalues[c].max(0.0);
    }
    Ok(PcaModel {
        mean,
        components,
        explained_variance: explained,
    })
}

/// `(x - mean) components^T`.
pub fn project(model: &PcaModel, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if x.ncols() != model.mean.len() {
        return Err(Error::DimensionMismatch(format!(
            "projection basis has width {}, input {}",
            model.mean.len(),
            x.ncols()
        )));
    }
    let mut centered = x.clone();
    for mut row in centered.row_iter_mut() {
        row -= model.mean.transpose();
    }
    Ok(centered * model.components.transpose())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRow {
    pub source: String,
    pub pc1: f64,
    pub pc2: f64,
    pub class: u8,
}

/// Projects the original rows (source `original`) and every coreset onto the
/// first two components of a PCA fit on the original features alone.
pub fn projection_report(original: &Dataset, coresets: &[(String, &SyntheticSet)]) -> Result<Vec<ProjectionRow>> {
    let model = pca_fit(original.features(), 2)?;
    let mut rows = Vec::new();
    let mut push = |source: &str, x: &DMatrix<f64>, labels: &[u8]| -> Result<()> {
        let p = project(&model, x)?;
        for (i, &class) in labels.iter().enumerate() {
            rows.push(ProjectionRow {
                source: source.to_string(),
                pc1: p[(i, 0)],
                pc2: p[(i, 1)],
                class,
            });
        }
        Ok(())
    };
    push("original", original.features(), original.labels())?;
    for (label, set) in coresets {
        push(label, &set.x, &set.y_class)?;
    }
    Ok(rows)
}

pub fn projection_csv(rows: &[ProjectionRow]) -> String {
    let mut out = String::from("source,pc1,pc2,class\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.source, r.pc1, r.pc2, r.class);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_synthetic;
    use crate::rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn diagonal_covariance() {
        let mut r = rng::seeded(1);
        let x = DMatrix::from_fn(10_000, 2, |_, j| {
            let z: f64 = StandardNormal.sample(&mut r);
            z * [2.0, 1.0][j]
        });
        let m = pca_fit(&x, 2).unwrap();
        assert!((m.components[(0, 0)] - 1.0).abs() < 1e-3);
        assert!(m.components[(0, 0)] > 0.0);
        assert!((m.explained_variance[0] / 4.0 - 1.0).abs() < 0.05);
        assert!((m.explained_variance[1] - 1.0).abs() < 0.05);
    }

    #[test]
    fn full_basis_reconstructs() {
        let ds = gen_synthetic(50, 4, 2.0, 1.0, 3).unwrap();
        let m = pca_fit(ds.features(), 4).unwrap();
        let p = project(&m, ds.features()).unwrap();
        let back = &p * &m.components;
        for i in 0..50 {
            for j in 0..4 {
                let c = ds.features()[(i, j)] - m.mean[j];
                assert!((back[(i, j)] - c).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn mean_projects_to_origin_and_scales_linearly() {
        let ds = gen_synthetic(40, 3, 2.0, 1.0, 8).unwrap();
        let m = pca_fit(ds.features(), 2).unwrap();
        let origin = project(&m, &DMatrix::from_row_slice(1, 3, m.mean.as_slice())).unwrap();
        assert!(origin.iter().all(|v| v.abs() < 1e-12));
        let mut x = DMatrix::from_row_slice(1, 3, &[0.3, -1.0, 2.0]);
        let a = project(&m, &(&x + DMatrix::from_row_slice(1, 3, m.mean.as_slice()))).unwrap();
        x *= 2.0;
        let b = project(&m, &(&x + DMatrix::from_row_slice(1, 3, m.mean.as_slice()))).unwrap();
        for j in 0..2 {
            assert!((b[(0, j)] - 2.0 * a[(0, j)]).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_inputs() {
        let x = DMatrix::from_element(5, 3, 1.5);
        assert!(matches!(pca_fit(&x, 1), Err(Error::InvalidDataset(_))));
        let ds = gen_synthetic(20, 3, 2.0, 1.0, 8).unwrap();
        assert!(pca_fit(ds.features(), 0).is_err());
        assert!(pca_fit(ds.features(), 4).is_err());
        let m = pca_fit(ds.features(), 2).unwrap();
        assert!(project(&m, &DMatrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn report_cardinality() {
        let ds = gen_synthetic(30, 3, 2.0, 1.0, 8).unwrap();
        assert_eq!(projection_report(&ds, &[]).unwrap().len(), 30);
        let s = SyntheticSet {
            x: ds.features().rows(0, 5).into_owned(),
            y: DVector::zeros(5),
            y_class: ds.labels()[..5].to_vec(),
        };
        let rows = projection_report(&ds, &[("a".into(), &s), ("b".into(), &s)]).unwrap();
        assert_eq!(rows.len(), 40);
        for i in 0..5 {
            assert_eq!((rows[30 + i].pc1, rows[30 + i].pc2), (rows[35 + i].pc1, rows[35 + i].pc2));
        }
        let bad = SyntheticSet {
            x: DMatrix::zeros(2, 2),
            y: DVector::zeros(2),
            y_class: vec![0, 1],
        };
        assert!(projection_report(&ds, &[("c".into(), &bad)]).is_err());
    }
}
