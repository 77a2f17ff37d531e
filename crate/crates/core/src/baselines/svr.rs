//! Epsilon-insensitive support-vector regression, solved in the dual with
//! a two-variable SMO loop and second-order working-set selection.

use serde::{Deserialize, Serialize};

use super::standardize::{check_matrix, Standardizer};
use crate::error::{Error, Result};

pub const DEFAULT_C: f64 = 1.0;
pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_TOLERANCE: f64 = 1e-3;
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Rbf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrParams {
    pub c: f64,
    pub epsilon: f64,
    /// RBF width; `None` uses 1 / (d * mean feature variance).
    pub gamma: Option<f64>,
    pub tolerance: f64,
    /// `None` uses max(10_000_000, 100 n).
    pub max_iter: Option<usize>,
}

impl Default for SvrParams {
    fn default() -> Self {
        Self {
            c: DEFAULT_C,
            epsilon: DEFAULT_EPSILON,
            gamma: None,
            tolerance: DEFAULT_TOLERANCE,
            max_iter: None,
        }
    }
}

/// Raw dual solution over 2n variables: `alpha[..n]` pair with `+1`,
/// `alpha[n..]` with `-1`. Decision value is `sum (a_i - a*_i) K(x_i, x) - rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub max_violation: f64,
}

impl DualSolution {
    pub fn coefficients(&self) -> Vec<f64> {
        let n = self.alpha.len() / 2;
        (0..n).map(|i| self.alpha[i] - self.alpha[i + n]).collect()
    }
}

/// Solves the epsilon-SVR dual for a precomputed kernel matrix (row-major n x n).
pub fn solve_dual(
    kernel: &[f64],
    y: &[f64],
    c: f64,
    epsilon: f64,
    tolerance: f64,
    max_iter: usize,
) -> Result<DualSolution> {
    let n = y.len();
    if kernel.len() != n * n {
        return Err(Error::InvalidInput("kernel matrix shape mismatch".into()));
    }
    if !(c > 0.0) || !(epsilon >= 0.0) || !(tolerance > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "need C > 0, epsilon >= 0, tolerance > 0 (got {c}, {epsilon}, {tolerance})"
        )));
    }
    let l = 2 * n;
    let sign = |t: usize| if t < n { 1.0 } else { -1.0 };
    let k = |s: usize, t: usize| kernel[(s % n) * n + (t % n)];
    let mut alpha = vec![0.0; l];
    let mut grad: Vec<f64> = (0..l)
        .map(|t| if t < n { epsilon - y[t] } else { epsilon + y[t - n] })
        .collect();
    let mut iterations = 0;
    loop {
        let Some((i, j, violation)) = select_working_set(&alpha, &grad, n, c, &k) else {
            break;
        };
        if violation < tolerance {
            break;
        }
        if iterations >= max_iter {
            return Err(Error::NonConvergence {
                iterations,
                violation,
            });
        }
        iterations += 1;
        let (yi, yj) = (sign(i), sign(j));
        let qij = yi * yj * k(i, j);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if yi != yj {
            let quad = (k(i, i) + k(j, j) + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (k(i, i) + k(j, j) - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..l {
            let yt = sign(t);
            grad[t] += yt * (yi * k(i, t) * di + yj * k(j, t) * dj);
        }
    }
    let max_violation = kkt_violation(&alpha, &grad, c);
    let rho = compute_rho(&alpha, &grad, c);
    Ok(DualSolution {
        alpha,
        rho,
        iterations,
        max_violation,
    })
}

fn select_working_set(
    alpha: &[f64],
    grad: &[f64],
    n: usize,
    c: f64,
    k: &impl Fn(usize, usize) -> f64,
) -> Option<(usize, usize, f64)> {
    let l = alpha.len();
    let sign = |t: usize| if t < n { 1.0 } else { -1.0 };
    let mut gmax = f64::NEG_INFINITY;
    let mut i = None;
    for t in 0..l {
        let v = if sign(t) > 0.0 {
            (alpha[t] < c).then(|| -grad[t])
        } else {
            (alpha[t] > 0.0).then_some(grad[t])
        };
        if let Some(v) = v {
            if v >= gmax {
                gmax = v;
                i = Some(t);
            }
        }
    }
    let i = i?;
    let mut gmax2 = f64::NEG_INFINITY;
    let mut best = None;
    let mut best_obj = f64::INFINITY;
    for t in 0..l {
        let quad = k(i, i) + k(t, t) - 2.0 * k(i, t);
        let (eligible, g, grad_diff) = if sign(t) > 0.0 {
            (alpha[t] > 0.0, grad[t], gmax + grad[t])
        } else {
            (alpha[t] < c, -grad[t], gmax - grad[t])
        };
        if !eligible {
            continue;
        }
        gmax2 = gmax2.max(g);
        if grad_diff > 0.0 {
            let obj = -(grad_diff * grad_diff) / quad.max(TAU);
            if obj <= best_obj {
                best_obj = obj;
                best = Some(t);
            }
        }
    }
    let violation = gmax + gmax2;
    match best {
        Some(j) => Some((i, j, violation)),
        None => Some((i, i, f64::NEG_INFINITY)),
    }
}

/// Maximal KKT violation `m(alpha) - M(alpha)` for the gradient `grad`
/// of the dual objective. Variables `alpha[..n]` carry sign +1.
pub fn kkt_violation(alpha: &[f64], grad: &[f64], c: f64) -> f64 {
    let n = alpha.len() / 2;
    let mut up = f64::NEG_INFINITY;
    let mut low = f64::INFINITY;
    for t in 0..alpha.len() {
        let y = if t < n { 1.0 } else { -1.0 };
        let v = -y * grad[t];
        let in_up = (y > 0.0 && alpha[t] < c) || (y < 0.0 && alpha[t] > 0.0);
        let in_low = (y > 0.0 && alpha[t] > 0.0) || (y < 0.0 && alpha[t] < c);
        if in_up {
            up = up.max(v);
        }
        if in_low {
            low = low.min(v);
        }
    }
    if up.is_finite() && low.is_finite() {
        (up - low).max(0.0)
    } else {
        0.0
    }
}

fn compute_rho(alpha: &[f64], grad: &[f64], c: f64) -> f64 {
    let n = alpha.len() / 2;
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum_free) = (0usize, 0.0);
    for t in 0..alpha.len() {
        let y = if t < n { 1.0 } else { -1.0 };
        let yg = y * grad[t];
        if alpha[t] >= c {
            if y < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    if free > 0 {
        sum_free / free as f64
    } else {
        (ub + lb) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub kernel: Kernel,
    pub c: f64,
    pub epsilon: f64,
    pub standardizer: Option<Standardizer>,
    pub support_vectors: Vec<Vec<f64>>,
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub max_violation: f64,
}

impl SvrModel {
    pub fn fit(
        x: &[Vec<f64>],
        y: &[f64],
        kind: KernelKind,
        params: &SvrParams,
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
        if x.len() < 2 {
            return Err(Error::InvalidInput("SVR needs at least 2 rows".into()));
        }
        let (standardizer, xs) = if standardize {
            let s = Standardizer::fit(x)?;
            let t = s.transform(x);
            (Some(s), t)
        } else {
            (None, x.to_vec())
        };
        let kernel = match kind {
            KernelKind::Linear => Kernel::Linear,
            KernelKind::Rbf => Kernel::Rbf {
                gamma: params.gamma.unwrap_or_else(|| default_gamma(&xs, d)),
            },
        };
        let n = xs.len();
        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = kernel.eval(&xs[i], &xs[j]);
                gram[i * n + j] = v;
                gram[j * n + i] = v;
            }
        }
        let max_iter = params.max_iter.unwrap_or((100 * n).max(10_000_000));
        let sol = solve_dual(&gram, y, params.c, params.epsilon, params.tolerance, max_iter)?;
        let coef = sol.coefficients();
        let (mut support_vectors, mut coefficients) = (Vec::new(), Vec::new());
        for (row, a) in xs.into_iter().zip(coef) {
            if a != 0.0 {
                support_vectors.push(row);
                coefficients.push(a);
            }
        }
        Ok(Self {
            kernel,
            c: params.c,
            epsilon: params.epsilon,
            standardizer,
            support_vectors,
            coefficients,
            bias: -sol.rho,
            iterations: sol.iterations,
            max_violation: sol.max_violation,
        })
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let q = match &self.standardizer {
            Some(s) => s.transform_row(x),
            None => x.to_vec(),
        };
        self.support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, a)| a * self.kernel.eval(sv, &q))
            .sum::<f64>()
            + self.bias
    }

    /// Primal weight vector in the (standardized) input space; linear kernel only.
    pub fn linear_weights(&self) -> Option<Vec<f64>> {
        if self.kernel != Kernel::Linear {
            return None;
        }
        let d = self.support_vectors.first().map_or(0, Vec::len);
        let mut w = vec![0.0; d];
        for (sv, a) in self.support_vectors.iter().zip(&self.coefficients) {
            for (wi, v) in w.iter_mut().zip(sv) {
                *wi += a * v;
            }
        }
        Some(w)
    }
}

/// 1 / (d * mean per-feature population variance), or 1/d for constant data.
pub fn default_gamma(x: &[Vec<f64>], d: usize) -> f64 {
    let n = x.len() as f64;
    let mut total = 0.0;
    for j in 0..d {
        let m = x.iter().map(|r| r[j]).sum::<f64>() / n;
        total += x.iter().map(|r| (r[j] - m) * (r[j] - m)).sum::<f64>() / n;
    }
    let mean_var = total / d as f64;
    if mean_var > 0.0 {
        1.0 / (d as f64 * mean_var)
    } else {
        1.0 / d as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kernel_identities() {
        let k = Kernel::Rbf { gamma: 0.7 };
        let a = [0.3, -1.0, 2.0];
        let b = [1.0, 0.5, -0.25];
        assert_eq!(k.eval(&a, &a), 1.0);
        assert_eq!(k.eval(&a, &b), k.eval(&b, &a));
        assert_eq!(Kernel::Linear.eval(&a, &b), Kernel::Linear.eval(&b, &a));
    }

    #[test]
    fn linear_data_inside_tube() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 / 10.0]).collect();
        let y: Vec<f64> = x.iter().map(|r| 0.8 * r[0] + 0.3).collect();
        let p = SvrParams { epsilon: 0.2, ..SvrParams::default() };
        let m = SvrModel::fit(&x, &y, KernelKind::Linear, &p, false).unwrap();
        for (r, l) in x.iter().zip(&y) {
            assert!((m.predict(r) - l).abs() <= 0.2 + 1e-3);
        }
    }

    #[test]
    fn conflicting_duplicates() {
        let x = vec![vec![1.0], vec![1.0]];
        let y = [0.0, 2.0];
        let m = SvrModel::fit(&x, &y, KernelKind::Rbf, &SvrParams::default(), false).unwrap();
        let p = m.predict(&[1.0]);
        assert!((0.0..=2.0).contains(&p), "{p}");
        assert!(m.max_violation <= DEFAULT_TOLERANCE);
    }

    #[test]
    fn linear_prediction_matches_dot_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..4).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let y: Vec<f64> = x.iter().map(|r| r[0] - 0.5 * r[2] + rng.random_range(-0.3..0.3)).collect();
        let m = SvrModel::fit(&x, &y, KernelKind::Linear, &SvrParams::default(), true).unwrap();
        let w = m.linear_weights().unwrap();
        let s = m.standardizer.as_ref().unwrap();
        for r in &x {
            let z = s.transform_row(r);
            let dot: f64 = w.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>() + m.bias;
            assert!((dot - m.predict(r)).abs() < 1e-9);
        }
    }

    #[test]
    fn rbf_beats_linear_on_xor() {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (a, b) in [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
            for k in 0..5 {
                let j = k as f64 * 0.05;
                x.push(vec![a + j, b - j]);
                y.push(if (a > 0.0) != (b > 0.0) { 1.0 } else { 0.0 });
            }
        }
        let mae = |kind| {
            let m = SvrModel::fit(&x, &y, kind, &SvrParams::default(), false).unwrap();
            x.iter().zip(&y).map(|(r, l)| (m.predict(r) - l).abs()).sum::<f64>() / y.len() as f64
        };
        assert!(mae(KernelKind::Rbf) < mae(KernelKind::Linear));
    }

    #[test]
    fn iteration_cap_reported() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![(i as f64).sin(), (i as f64).cos()]).collect();
        let y: Vec<f64> = (0..30).map(|i| (i % 4) as f64).collect();
        let p = SvrParams { max_iter: Some(1), ..SvrParams::default() };
        let r = SvrModel::fit(&x, &y, KernelKind::Rbf, &p, false);
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }
}
