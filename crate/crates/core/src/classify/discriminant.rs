//! Gaussian discriminant classifiers (LDA and QDA).
//!
//! LDA pools the within-class covariance; QDA keeps one covariance per
//! class. Both ridge-regularize with `gamma * trace(S)/d` on the diagonal
//! and factor the result with a Cholesky decomposition, so prediction uses
//! triangular solves rather than explicit inverses.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiscriminantShape {
    Linear,
    Quadratic,
}

/// Lower-triangular Cholesky factor stored row-major as plain vectors so
/// the model serializes exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CholeskyFactor {
    dim: usize,
    lower: Vec<f64>,
}

impl CholeskyFactor {
    fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        let chol = m
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Fit("covariance matrix is not positive definite".into()))?;
        let l = chol.l();
        let dim = m.nrows();
        let mut lower = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..=i {
                lower[i * dim + j] = l[(i, j)];
            }
        }
        Ok(Self { dim, lower })
    }

    /// `log |Sigma| = 2 sum ln L_ii`.
    fn log_det(&self) -> f64 {
        (0..self.dim).map(|i| self.lower[i * self.dim + i].ln()).sum::<f64>() * 2.0
    }

    /// Squared Mahalanobis norm `v' Sigma^-1 v` via one forward solve.
    fn quadratic_form(&self, v: &[f64]) -> f64 {
        let d = self.dim;
        let mut y = vec![0.0; d];
        for i in 0..d {
            let mut acc = v[i];
            for j in 0..i {
                acc -= self.lower[i * d + j] * y[j];
            }
            y[i] = acc / self.lower[i * d + i];
        }
        y.iter().map(|a| a * a).sum()
    }
}

/// Fitted LDA/QDA parameters in standardized feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantModel {
    pub shape: DiscriminantShape,
    /// Per-class means.
    means: Vec<Vec<f64>>,
    /// One factor for LDA (pooled), one per class for QDA.
    factors: Vec<CholeskyFactor>,
    /// `log |Sigma_c|`; zeros for LDA where the term is class-constant.
    log_dets: Vec<f64>,
    log_priors: Vec<f64>,
}

pub(super) fn fit(
    shape: DiscriminantShape,
    rows: &[Vec<f64>],
    class_indices: &[usize],
    n_classes: usize,
    ridge_gamma: f64,
) -> Result<DiscriminantModel> {
    let n = rows.len();
    let dim = rows[0].len();

    let mut counts = vec![0usize; n_classes];
    for &c in class_indices {
        counts[c] += 1;
    }
    if shape == DiscriminantShape::Quadratic {
        if let Some(c) = counts.iter().position(|&k| k < 2) {
            return Err(Error::Fit(format!(
                "qda needs at least 2 rows per class; class index {c} has {}",
                counts[c]
            )));
        }
    }

    let mut means = vec![vec![0.0; dim]; n_classes];
    for (row, &c) in rows.iter().zip(class_indices) {
        for (m, v) in means[c].iter_mut().zip(row) {
            *m += v;
        }
    }
    for (mean, &count) in means.iter_mut().zip(&counts) {
        for m in mean.iter_mut() {
            *m /= count as f64;
        }
    }

    let log_priors: Vec<f64> =
        counts.iter().map(|&c| (c as f64 / n as f64).ln()).collect();

    let ridge = |mut cov: DMatrix<f64>| -> DMatrix<f64> {
        let trace: f64 = (0..dim).map(|i| cov[(i, i)]).sum();
        let bump = ridge_gamma * trace / dim as f64;
        for i in 0..dim {
            cov[(i, i)] += bump;
        }
        cov
    };

    match shape {
        DiscriminantShape::Linear => {
            if n <= n_classes {
                return Err(Error::Fit(format!(
                    "lda needs more rows ({n}) than classes ({n_classes})"
                )));
            }
            let mut scatter = DMatrix::zeros(dim, dim);
            for (row, &c) in rows.iter().zip(class_indices) {
                let mean = &means[c];
                for i in 0..dim {
                    let di = row[i] - mean[i];
                    for j in 0..=i {
                        scatter[(i, j)] += di * (row[j] - mean[j]);
                    }
                }
            }
            // Mirror the lower triangle; the covariance is symmetric.
            for i in 0..dim {
                for j in 0..i {
                    scatter[(j, i)] = scatter[(i, j)];
                }
            }
            let pooled = ridge(scatter / (n - n_classes) as f64);
            let factor = CholeskyFactor::from_matrix(&pooled)?;
            Ok(DiscriminantModel {
                shape,
                means,
                factors: vec![factor],
                log_dets: vec![0.0; n_classes],
                log_priors,
            })
        }
        DiscriminantShape::Quadratic => {
            let mut factors = Vec::with_capacity(n_classes);
            let mut log_dets = Vec::with_capacity(n_classes);
            for c in 0..n_classes {
                let mut scatter = DMatrix::zeros(dim, dim);
                for (row, &ci) in rows.iter().zip(class_indices) {
                    if ci != c {
                        continue;
                    }
                    let mean = &means[c];
                    for i in 0..dim {
                        let di = row[i] - mean[i];
                        for j in 0..=i {
                            scatter[(i, j)] += di * (row[j] - mean[j]);
                        }
                    }
                }
                for i in 0..dim {
                    for j in 0..i {
                        scatter[(j, i)] = scatter[(i, j)];
                    }
                }
                let cov = ridge(scatter / (counts[c] - 1) as f64);
                let factor = CholeskyFactor::from_matrix(&cov)?;
                log_dets.push(factor.log_det());
                factors.push(factor);
            }
            Ok(DiscriminantModel { shape, means, factors, log_dets, log_priors })
        }
    }
}

impl DiscriminantModel {
    /// Per-class discriminant values for a standardized vector:
    /// `-1/2 log|Sigma_c| - 1/2 (x-mu_c)' Sigma_c^-1 (x-mu_c) + log pi_c`
    /// (the log-determinant term is zero for LDA, where it is constant
    /// across classes).
    pub fn discriminants(&self, z: &[f64]) -> Vec<f64> {
        let n_classes = self.means.len();
        let mut out = Vec::with_capacity(n_classes);
        let mut centered = vec![0.0; z.len()];
        for c in 0..n_classes {
            for ((d, v), m) in centered.iter_mut().zip(z).zip(&self.means[c]) {
                *d = v - m;
            }
            let factor = match self.shape {
                DiscriminantShape::Linear => &self.factors[0],
                DiscriminantShape::Quadratic => &self.factors[c],
            };
            let qf = factor.quadratic_form(&centered);
            out.push(-0.5 * self.log_dets[c] - 0.5 * qf + self.log_priors[c]);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use crate::classify::{fit as fit_model, ClassifierKind, FitOptions};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn as_refs(rows: &[Vec<f64>]) -> Vec<&[f64]> {
        rows.iter().map(Vec::as_slice).collect()
    }

    /// 1-D two-class data with means +-1 and equal spread: the decision
    /// boundary must sit at the origin for both LDA and QDA.
    #[test]
    fn symmetric_gaussians_put_boundary_at_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for class in 0..2u32 {
            let mu = if class == 0 { -1.0 } else { 1.0 };
            for _ in 0..10_000 {
                rows.push(vec![mu + 0.5 * rng.sample::<f64, _>(StandardNormal)]);
                labels.push(class);
            }
        }
        for kind in [ClassifierKind::Lda, ClassifierKind::Qda] {
            let m = fit_model(kind, &as_refs(&rows), &labels, &FitOptions::default()).unwrap();
            // Scan for the sign flip of the discriminant difference.
            let mut boundary = f64::NAN;
            let mut prev = f64::NAN;
            for step in 0..2001 {
                let x = -1.0 + step as f64 * 0.001;
                let d = m.gaussian_discriminants(&[x]).unwrap();
                let diff = d[1] - d[0];
                if step > 0 && prev < 0.0 && diff >= 0.0 {
                    boundary = x;
                    break;
                }
                prev = diff;
            }
            assert!(boundary.abs() <= 0.1, "{kind}: boundary at {boundary}");
        }
    }

    /// Discriminants must match a direct dense evaluation (explicit matrix
    /// inverse computed with Gauss-Jordan in the test) within 1e-9.
    #[test]
    fn discriminants_match_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for trial in 0..20 {
            let dim = 2 + (trial % 4);
            let n_per = 30;
            let mut rows: Vec<Vec<f64>> = Vec::new();
            let mut labels = Vec::new();
            for class in 0..3u32 {
                for _ in 0..n_per {
                    let mut row: Vec<f64> =
                        (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                    row[0] += class as f64 * 2.0;
                    rows.push(row);
                    labels.push(class);
                }
            }
            for kind in [ClassifierKind::Lda, ClassifierKind::Qda] {
                let m = fit_model(kind, &as_refs(&rows), &labels, &FitOptions::default())
                    .unwrap();
                let query: Vec<f64> =
                    (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let got = m.gaussian_discriminants(&query).unwrap();
                let want = dense_oracle(&m, &query);
                for (g, w) in got.iter().zip(&want) {
                    assert!((g - w).abs() < 1e-9, "{kind}: {g} vs {w}");
                }
            }
        }
    }

    /// Straight-line dense evaluation: re-derive covariance from the stored
    /// Cholesky factor, invert with Gauss-Jordan, apply the textbook
    /// formula.
    fn dense_oracle(model: &crate::classify::TrainedModel, query: &[f64]) -> Vec<f64> {
        let z = model.standardizer.transform(query);
        // Access the discriminant parameters through JSON to stay
        // independent of the solve path.
        let json: serde_json::Value =
            serde_json::from_str(&model.to_json().unwrap()).unwrap();
        let disc = &json["params"]["Discriminant"];
        let means: Vec<Vec<f64>> = serde_json::from_value(disc["means"].clone()).unwrap();
        let log_priors: Vec<f64> =
            serde_json::from_value(disc["log_priors"].clone()).unwrap();
        let log_dets: Vec<f64> = serde_json::from_value(disc["log_dets"].clone()).unwrap();
        let factors: Vec<serde_json::Value> =
            disc["factors"].as_array().unwrap().clone();
        let rebuild = |f: &serde_json::Value| -> Vec<Vec<f64>> {
            let dim = f["dim"].as_u64().unwrap() as usize;
            let lower: Vec<f64> = serde_json::from_value(f["lower"].clone()).unwrap();
            // Sigma = L L'
            let mut sigma = vec![vec![0.0; dim]; dim];
            for i in 0..dim {
                for j in 0..dim {
                    let mut acc = 0.0;
                    for k in 0..dim {
                        acc += lower[i * dim + k] * lower[j * dim + k];
                    }
                    sigma[i][j] = acc;
                }
            }
            gauss_jordan_inverse(&sigma)
        };
        let inverses: Vec<Vec<Vec<f64>>> = factors.iter().map(rebuild).collect();

        (0..means.len())
            .map(|c| {
                let inv = if inverses.len() == 1 { &inverses[0] } else { &inverses[c] };
                let d: Vec<f64> = z.iter().zip(&means[c]).map(|(a, b)| a - b).collect();
                let mut qf = 0.0;
                for i in 0..d.len() {
                    for j in 0..d.len() {
                        qf += d[i] * inv[i][j] * d[j];
                    }
                }
                -0.5 * log_dets[c] - 0.5 * qf + log_priors[c]
            })
            .collect()
    }

    fn gauss_jordan_inverse(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = m.len();
        let mut a: Vec<Vec<f64>> = m.to_vec();
        let mut inv: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        for col in 0..n {
            // Partial pivot.
            let pivot = (col..n)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap();
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let p = a[col][col];
            for j in 0..n {
                a[col][j] /= p;
                inv[col][j] /= p;
            }
            for i in 0..n {
                if i != col {
                    let f = a[i][col];
                    for j in 0..n {
                        a[i][j] -= f * a[col][j];
                        inv[i][j] -= f * inv[col][j];
                    }
                }
            }
        }
        inv
    }

    /// With `gamma = 0`, any invertible affine map applied to train and
    /// test alike leaves predictions unchanged.
    #[test]
    fn affine_equivariance_at_zero_ridge() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let dim = 3;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut labels = Vec::new();
        for class in 0..3u32 {
            for _ in 0..40 {
                let mut row: Vec<f64> =
                    (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                row[class as usize] += 4.0;
                rows.push(row);
                labels.push(class);
            }
        }
        // A fixed well-conditioned invertible map plus shift.
        let map = [[2.0, 0.5, -0.3], [0.0, 1.5, 0.7], [-0.4, 0.2, 1.1]];
        let shift = [3.0, -1.0, 0.5];
        let apply = |x: &[f64]| -> Vec<f64> {
            (0..dim)
                .map(|i| (0..dim).map(|j| map[i][j] * x[j]).sum::<f64>() + shift[i])
                .collect()
        };
        let mapped_rows: Vec<Vec<f64>> = rows.iter().map(|r| apply(r)).collect();
        let opts = FitOptions { ridge_gamma: 0.0, ..Default::default() };
        for kind in [ClassifierKind::Lda, ClassifierKind::Qda] {
            let m0 = fit_model(kind, &as_refs(&rows), &labels, &opts).unwrap();
            let m1 = fit_model(kind, &as_refs(&mapped_rows), &labels, &opts).unwrap();
            for _ in 0..100 {
                let q: Vec<f64> =
                    (0..dim).map(|_| 3.0 * rng.sample::<f64, _>(StandardNormal)).collect();
                assert_eq!(
                    m0.predict(&q).unwrap(),
                    m1.predict(&apply(&q)).unwrap(),
                    "{kind} disagrees under affine map"
                );
            }
        }
    }
}
