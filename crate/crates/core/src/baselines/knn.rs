//! k-nearest-neighbor regression under Euclidean, Manhattan or
//! Mahalanobis distance.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::standardize::{check_matrix, Standardizer};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceMetric {
    Euclidean,
    Manhattan,
    Mahalanobis,
}

impl DistanceMetric {
    pub const ALL: [DistanceMetric; 3] = [
        DistanceMetric::Euclidean,
        DistanceMetric::Manhattan,
        DistanceMetric::Mahalanobis,
    ];
}

/// Relative ridge added to the covariance diagonal: `lambda = scale * trace / d`.
pub const MAHALANOBIS_RIDGE_SCALE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub metric: DistanceMetric,
    pub standardizer: Option<Standardizer>,
    pub train_features: Vec<Vec<f64>>,
    pub train_labels: Vec<f64>,
    /// Row-major d x d inverse of the regularized covariance (Mahalanobis only).
    pub inv_cov: Option<Vec<f64>>,
}

impl KnnModel {
    /// Stores the training set. Euclidean and Manhattan models z-score the
    /// features when `standardize` is set; Mahalanobis always uses raw
    /// features with a ridge-regularized covariance.
    pub fn fit(
        x: &[Vec<f64>],
        y: &[f64],
        k: usize,
        metric: DistanceMetric,
        standardize: bool,
    ) -> Result<Self> {
        let d = check_matrix(x)?;
        if x.len() != y.len() {
            return Err(Error::InvalidInput(format!(
                "{} rows but {} labels",
                x.len(),
                y.len()
            )));
        }
        if k == 0 || k > x.len() {
            return Err(Error::InvalidInput(format!(
                "k={k} needs 1 <= k <= n={}",
                x.len()
            )));
        }
        let (standardizer, features, inv_cov) = match metric {
            DistanceMetric::Mahalanobis => (None, x.to_vec(), Some(regularized_inverse_covariance(x, d)?)),
            _ if standardize => {
                let s = Standardizer::fit(x)?;
                let f = s.transform(x);
                (Some(s), f, None)
            }
            _ => (None, x.to_vec(), None),
        };
        Ok(Self {
            k,
            metric,
            standardizer,
            train_features: features,
            train_labels: y.to_vec(),
            inv_cov,
        })
    }

    /// Mahalanobis model with a caller-supplied inverse covariance.
    pub fn with_inverse_covariance(
        x: &[Vec<f64>],
        y: &[f64],
        k: usize,
        inv_cov: Vec<f64>,
    ) -> Result<Self> {
        let d = check_matrix(x)?;
        if inv_cov.len() != d * d {
            return Err(Error::InvalidInput(format!(
                "inverse covariance has {} entries, expected {}",
                inv_cov.len(),
                d * d
            )));
        }
        let mut m = Self::fit(x, y, k, DistanceMetric::Euclidean, false)?;
        m.metric = DistanceMetric::Mahalanobis;
        m.inv_cov = Some(inv_cov);
        Ok(m)
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.metric {
            DistanceMetric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            DistanceMetric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            DistanceMetric::Mahalanobis => {
                let inv = self.inv_cov.as_ref().expect("mahalanobis model has inv_cov");
                let d = a.len();
                let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                let mut q = 0.0;
                for i in 0..d {
                    let mut row = 0.0;
                    for j in 0..d {
                        row += inv[i * d + j] * diff[j];
                    }
                    q += diff[i] * row;
                }
                q.max(0.0).sqrt()
            }
        }
    }

    /// Indices of the k nearest training rows; distance ties keep training order.
    pub fn neighbors(&self, x: &[f64]) -> Vec<usize> {
        let q = match &self.standardizer {
            Some(s) => s.transform_row(x),
            None => x.to_vec(),
        };
        let mut d: Vec<(f64, usize)> = self
            .train_features
            .iter()
            .enumerate()
            .map(|(i, row)| (self.distance(&q, row), i))
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        d.into_iter().take(self.k).map(|(_, i)| i).collect()
    }

    /// Mean label of the k nearest neighbors.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let nn = self.neighbors(x);
        nn.iter().map(|&i| self.train_labels[i]).sum::<f64>() / nn.len() as f64
    }
}

/// Sample covariance (n - 1) with a scale-aware ridge, inverted by Cholesky.
pub fn regularized_inverse_covariance(x: &[Vec<f64>], d: usize) -> Result<Vec<f64>> {
    let n = x.len();
    let mut mean = vec![0.0; d];
    for row in x {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v / n as f64;
        }
    }
    let denom = (n.max(2) - 1) as f64;
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for row in x {
        for i in 0..d {
            let di = row[i] - mean[i];
            for j in 0..d {
                cov[(i, j)] += di * (row[j] - mean[j]) / denom;
            }
        }
    }
    let lambda = (MAHALANOBIS_RIDGE_SCALE * cov.trace() / d as f64).max(1e-12);
    for i in 0..d {
        cov[(i, i)] += lambda;
    }
    let chol = cov.cholesky().ok_or_else(|| {
        Error::InvalidInput("regularized covariance is not positive definite".into())
    })?;
    let inv = chol.inverse();
    // row-major, symmetrized against rounding
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            out[i * d + j] = 0.5 * (inv[(i, j)] + inv[(j, i)]);
        }
    }
    Ok(out)
}
