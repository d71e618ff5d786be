//! Gaussian mixture fitting by expectation-maximization.
//!
//! Diagonal or spherical covariances, k-means++ seeded means, log-domain
//! responsibilities. The log-likelihood trace holds the mean per-point
//! log-likelihood after each E-step, starting with the initial parameters.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GmmError {
    #[error("need at least {k} points, got {n}")]
    TooFewPoints { n: usize, k: usize },
    #[error("point {index} has dimension {found}, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, found: usize },
    #[error("point {index} has a non-finite component")]
    NonFinite { index: usize },
    #[error("invalid GMM config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceKind {
    #[default]
    Diagonal,
    Spherical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmmConfig {
    pub k: usize,
    pub covariance: CovarianceKind,
    pub max_iter: usize,
    /// Stop once the mean log-likelihood improves by less than this.
    pub tol: f64,
    pub cov_floor: f64,
    pub seed: u64,
}

impl Default for GmmConfig {
    fn default() -> Self {
        Self { k: 1, covariance: CovarianceKind::Diagonal, max_iter: 200, tol: 1e-6, cov_floor: 1e-6, seed: 0 }
    }
}

impl GmmConfig {
    pub fn with_k(k: usize) -> Self {
        Self { k, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), GmmError> {
        if self.k == 0 {
            return Err(GmmError::InvalidConfig("k must be >= 1".into()));
        }
        if self.max_iter == 0 {
            return Err(GmmError::InvalidConfig("max_iter must be >= 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(GmmError::InvalidConfig("tol must be > 0".into()));
        }
        if !(self.cov_floor > 0.0) {
            return Err(GmmError::InvalidConfig("cov_floor must be > 0".into()));
        }
        Ok(())
    }
}

/// Mixture parameters. `variances[c]` has one entry per dimension
/// (diagonal) or a single shared entry (spherical).
#[derive(Debug, Clone, PartialEq)]
pub struct GmmParams {
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmmModel {
    pub dim: usize,
    pub covariance: CovarianceKind,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
    pub mixing_weights: Vec<f64>,
    pub assignments: Vec<usize>,
    pub log_likelihood_trace: Vec<f64>,
    /// EM steps performed (M-step + E-step pairs).
    pub iterations: usize,
    pub converged: bool,
}

impl GmmModel {
    pub fn k(&self) -> usize {
        self.means.len()
    }

    pub fn final_log_likelihood(&self) -> f64 {
        *self.log_likelihood_trace.last().expect("trace holds the initial evaluation")
    }

    fn components(&self) -> Vec<Component> {
        prepare(&self.means, &self.variances, &self.mixing_weights)
    }

    /// Row-stochastic `n × k` responsibility matrix under the fitted parameters.
    pub fn responsibilities(&self, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, GmmError> {
        check_points(points, Some(self.dim))?;
        let comps = self.components();
        Ok(points.iter().map(|x| e_point(&comps, x).1).collect())
    }
}

struct Component {
    log_weight: f64,
    log_norm: f64,
    mean: Vec<f64>,
    inv_var: Vec<f64>,
}

impl Component {
    fn log_joint(&self, x: &[f64]) -> f64 {
        let maha: f64 = if self.inv_var.len() == 1 {
            let iv = self.inv_var[0];
            x.iter().zip(&self.mean).map(|(a, m)| (a - m) * (a - m)).sum::<f64>() * iv
        } else {
            x.iter().zip(&self.mean).zip(&self.inv_var).map(|((a, m), iv)| (a - m) * (a - m) * iv).sum()
        };
        self.log_weight + self.log_norm - 0.5 * maha
    }
}

fn prepare(means: &[Vec<f64>], variances: &[Vec<f64>], weights: &[f64]) -> Vec<Component> {
    means
        .iter()
        .zip(variances)
        .zip(weights)
        .map(|((mean, var), &w)| {
            let dim = mean.len();
            let log_det: f64 = if var.len() == 1 {
                dim as f64 * (2.0 * PI * var[0]).ln()
            } else {
                var.iter().map(|v| (2.0 * PI * v).ln()).sum()
            };
            Component {
                log_weight: w.ln(),
                log_norm: -0.5 * log_det,
                mean: mean.clone(),
                inv_var: var.iter().map(|v| 1.0 / v).collect(),
            }
        })
        .collect()
}

/// Log-sum-exp of the joint log densities and the normalized responsibilities.
fn e_point(comps: &[Component], x: &[f64]) -> (f64, Vec<f64>) {
    let lj: Vec<f64> = comps.iter().map(|c| c.log_joint(x)).collect();
    let max = lj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = lj.iter().map(|l| (l - max).exp()).sum();
    let lse = max + sum.ln();
    (lse, lj.iter().map(|l| (l - lse).exp()).collect())
}

fn check_points(points: &[Vec<f64>], dim: Option<usize>) -> Result<usize, GmmError> {
    let dim = match dim.or_else(|| points.first().map(Vec::len)) {
        Some(d) => d,
        None => return Ok(0),
    };
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(GmmError::DimensionMismatch { index: i, expected: dim, found: p.len() });
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(GmmError::NonFinite { index: i });
        }
    }
    Ok(dim)
}

fn validate_input(points: &[Vec<f64>], cfg: &GmmConfig) -> Result<usize, GmmError> {
    cfg.validate()?;
    if points.len() < cfg.k {
        return Err(GmmError::TooFewPoints { n: points.len(), k: cfg.k });
    }
    let dim = check_points(points, None)?;
    if dim == 0 {
        return Err(GmmError::InvalidConfig("points must have positive dimension".into()));
    }
    Ok(dim)
}

/// Per-dimension population variance of the data, floored.
fn global_variance(points: &[Vec<f64>], dim: usize, floor: f64) -> Vec<f64> {
    let n = points.len() as f64;
    let mut mean = vec![0.0; dim];
    for p in points {
        for (m, x) in mean.iter_mut().zip(p) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; dim];
    for p in points {
        for ((v, x), m) in var.iter_mut().zip(p).zip(&mean) {
            *v += (x - m) * (x - m);
        }
    }
    var.iter().map(|v| (v / n).max(floor)).collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn d2_sample(d2: &[f64], total: f64, rng: &mut ChaCha8Rng) -> usize {
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut pick = None;
    for (i, &d) in d2.iter().enumerate() {
        if d <= 0.0 {
            continue;
        }
        acc += d;
        pick = Some(i);
        if acc > target {
            break;
        }
    }
    pick.expect("positive total implies a positive entry")
}

/// Greedy k-means++ seeded means, uniform weights, global variance.
///
/// Each new mean is the best of `2 + ⌊ln k⌋` D²-sampled candidates, judged
/// by the resulting sum of squared distances to the nearest chosen mean.
pub fn kmeans_pp_init(points: &[Vec<f64>], cfg: &GmmConfig) -> Result<GmmParams, GmmError> {
    let dim = validate_input(points, cfg)?;
    let n = points.len();
    let trials = 2 + (cfg.k as f64).ln().floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[chosen[0]])).collect();
    while chosen.len() < cfg.k {
        let total: f64 = d2.iter().sum();
        if total > 0.0 {
            let mut best: Option<(f64, Vec<f64>, usize)> = None;
            for _ in 0..trials {
                let cand = d2_sample(&d2, total, &mut rng);
                let next_d2: Vec<f64> =
                    d2.iter().zip(points).map(|(d, p)| d.min(sq_dist(p, &points[cand]))).collect();
                let potential: f64 = next_d2.iter().sum();
                if best.as_ref().is_none_or(|(b, _, _)| potential < *b) {
                    best = Some((potential, next_d2, cand));
                }
            }
            let (_, next_d2, cand) = best.expect("at least two trials");
            chosen.push(cand);
            d2 = next_d2;
        } else {
            // all remaining points coincide with a chosen one
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            chosen.push(free[rng.random_range(0..free.len())]);
        }
    }

    let gv = global_variance(points, dim, cfg.cov_floor);
    let var = match cfg.covariance {
        CovarianceKind::Diagonal => gv,
        CovarianceKind::Spherical => vec![(gv.iter().sum::<f64>() / dim as f64).max(cfg.cov_floor)],
    };
    Ok(GmmParams {
        means: chosen.iter().map(|&i| points[i].clone()).collect(),
        variances: vec![var; cfg.k],
        weights: vec![1.0 / cfg.k as f64; cfg.k],
    })
}

pub fn gmm_fit(points: &[Vec<f64>], cfg: &GmmConfig) -> Result<GmmModel, GmmError> {
    let init = kmeans_pp_init(points, cfg)?;
    gmm_fit_from(points, cfg, init)
}

/// EM from explicit initial parameters.
pub fn gmm_fit_from(points: &[Vec<f64>], cfg: &GmmConfig, init: GmmParams) -> Result<GmmModel, GmmError> {
    let dim = validate_input(points, cfg)?;
    let shape_ok = init.means.len() == cfg.k
        && init.variances.len() == cfg.k
        && init.weights.len() == cfg.k
        && init.means.iter().all(|m| m.len() == dim)
        && init.variances.iter().all(|v| match cfg.covariance {
            CovarianceKind::Diagonal => v.len() == dim,
            CovarianceKind::Spherical => v.len() == 1,
        });
    if !shape_ok {
        return Err(GmmError::InvalidConfig("initial parameters do not match k/dimension/covariance".into()));
    }

    let mut params = init;
    let (mut ll, mut resp) = e_step(points, &params);
    let mut trace = vec![ll];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        params = m_step(points, &resp, &params, cfg);
        let (next_ll, next_resp) = e_step(points, &params);
        iterations += 1;
        trace.push(next_ll);
        resp = next_resp;
        let gain = next_ll - ll;
        ll = next_ll;
        if gain < cfg.tol {
            converged = true;
            break;
        }
    }

    // hard labels from the log joints, exactly as `gmm_predict` scores a point
    let comps = prepare(&params.means, &params.variances, &params.weights);
    let assignments = points
        .par_iter()
        .map(|x| argmax(&comps.iter().map(|c| c.log_joint(x)).collect::<Vec<_>>()))
        .collect();
    Ok(GmmModel {
        dim,
        covariance: cfg.covariance,
        means: params.means,
        variances: params.variances,
        mixing_weights: params.weights,
        assignments,
        log_likelihood_trace: trace,
        iterations,
        converged,
    })
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn e_step(points: &[Vec<f64>], params: &GmmParams) -> (f64, Vec<Vec<f64>>) {
    let comps = prepare(&params.means, &params.variances, &params.weights);
    let per_point: Vec<(f64, Vec<f64>)> = points.par_iter().map(|x| e_point(&comps, x)).collect();
    let mut total = 0.0;
    let mut resp = Vec::with_capacity(points.len());
    for (lse, r) in per_point {
        total += lse;
        resp.push(r);
    }
    (total / points.len() as f64, resp)
}

fn m_step(points: &[Vec<f64>], resp: &[Vec<f64>], prev: &GmmParams, cfg: &GmmConfig) -> GmmParams {
    let k = cfg.k;
    let dim = points[0].len();
    let n = points.len() as f64;
    let updated: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..k)
        .into_par_iter()
        .map(|c| {
            let nk: f64 = resp.iter().map(|r| r[c]).sum();
            if nk <= 0.0 {
                return (0.0, prev.means[c].clone(), prev.variances[c].clone());
            }
            let mut mean = vec![0.0; dim];
            for (x, r) in points.iter().zip(resp) {
                let w = r[c];
                for (m, xi) in mean.iter_mut().zip(x) {
                    *m += w * xi;
                }
            }
            mean.iter_mut().for_each(|m| *m /= nk);
            let mut var = vec![0.0; dim];
            for (x, r) in points.iter().zip(resp) {
                let w = r[c];
                for ((v, xi), m) in var.iter_mut().zip(x).zip(&mean) {
                    *v += w * (xi - m) * (xi - m);
                }
            }
            let var = match cfg.covariance {
                CovarianceKind::Diagonal => var.iter().map(|v| (v / nk).max(cfg.cov_floor)).collect(),
                CovarianceKind::Spherical => {
                    vec![(var.iter().sum::<f64>() / (nk * dim as f64)).max(cfg.cov_floor)]
                }
            };
            (nk / n, mean, var)
        })
        .collect();
    let mut out = GmmParams { means: Vec::with_capacity(k), variances: Vec::with_capacity(k), weights: Vec::with_capacity(k) };
    for (w, m, v) in updated {
        out.weights.push(w);
        out.means.push(m);
        out.variances.push(v);
    }
    out
}

/// Index of the most responsible component; ties resolve to the lowest index.
pub fn gmm_predict(model: &GmmModel, point: &[f64]) -> Result<usize, GmmError> {
    if point.len() != model.dim {
        return Err(GmmError::DimensionMismatch { index: 0, expected: model.dim, found: point.len() });
    }
    if point.iter().any(|x| !x.is_finite()) {
        return Err(GmmError::NonFinite { index: 0 });
    }
    let comps = model.components();
    let lj: Vec<f64> = comps.iter().map(|c| c.log_joint(point)).collect();
    Ok(argmax(&lj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    fn blobs() -> Vec<Vec<f64>> {
        let mut pts = Vec::new();
        for i in 0..5 {
            let o = i as f64 * 0.1;
            pts.push(vec![o, -o]);
            pts.push(vec![100.0 + o, 100.0 - o]);
        }
        pts
    }

    fn random_points(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect()).collect()
    }

    #[test]
    fn separates_far_blobs() {
        let pts = blobs();
        for seed in 0..10 {
            let m = gmm_fit(&pts, &GmmConfig { k: 2, seed, ..Default::default() }).unwrap();
            for i in (0..10).step_by(2) {
                assert_eq!(m.assignments[i], m.assignments[0]);
                assert_ne!(m.assignments[i + 1], m.assignments[i]);
            }
        }
    }

    #[test]
    fn single_component_is_sample_mean() {
        let pts = random_points(30, 3, 9);
        let m = gmm_fit(&pts, &GmmConfig::with_k(1)).unwrap();
        for d in 0..3 {
            let mean = pts.iter().map(|p| p[d]).sum::<f64>() / 30.0;
            assert!((m.means[0][d] - mean).abs() < 1e-10);
        }
        assert!(m.assignments.iter().all(|&a| a == 0));
        assert_eq!(m.mixing_weights, vec![1.0]);
    }

    #[test]
    fn errors() {
        let pts = random_points(3, 2, 1);
        assert_eq!(gmm_fit(&pts, &GmmConfig::with_k(4)).unwrap_err(), GmmError::TooFewPoints { n: 3, k: 4 });
        let ragged = vec![vec![0.0, 1.0], vec![1.0]];
        assert!(matches!(gmm_fit(&ragged, &GmmConfig::with_k(1)), Err(GmmError::DimensionMismatch { index: 1, .. })));
        let nan = vec![vec![0.0], vec![f64::NAN]];
        assert_eq!(gmm_fit(&nan, &GmmConfig::with_k(1)).unwrap_err(), GmmError::NonFinite { index: 1 });
        assert!(gmm_fit(&pts, &GmmConfig { tol: 0.0, ..GmmConfig::with_k(1) }).is_err());
        assert!(gmm_fit(&pts, &GmmConfig { cov_floor: -1.0, ..GmmConfig::with_k(1) }).is_err());
        assert!(gmm_fit(&pts, &GmmConfig::with_k(0)).is_err());
    }

    #[test]
    fn duplicate_points_respect_floor() {
        let pts = vec![vec![1.0, 1.0]; 6];
        for cov in [CovarianceKind::Diagonal, CovarianceKind::Spherical] {
            let m = gmm_fit(&pts, &GmmConfig { k: 3, covariance: cov, ..Default::default() }).unwrap();
            assert!(m.variances.iter().flatten().all(|&v| v >= 1e-6));
            assert!((m.mixing_weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn model_invariants() {
        let pts = random_points(40, 4, 3);
        for cov in [CovarianceKind::Diagonal, CovarianceKind::Spherical] {
            let cfg = GmmConfig { k: 3, covariance: cov, seed: 5, ..Default::default() };
            let m = gmm_fit(&pts, &cfg).unwrap();
            assert!((m.mixing_weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(m.variances.iter().flatten().all(|&v| v >= cfg.cov_floor));
            assert!(m.assignments.iter().all(|&a| a < 3));
            for w in m.log_likelihood_trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-9);
            }
            for row in m.responsibilities(&pts).unwrap() {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
            assert_eq!(m, gmm_fit(&pts, &cfg).unwrap());
        }
    }

    #[test]
    fn predict_at_mean_and_ties() {
        let pts = blobs();
        let m = gmm_fit(&pts, &GmmConfig { k: 2, ..Default::default() }).unwrap();
        for c in 0..2 {
            assert_eq!(gmm_predict(&m, &m.means[c]).unwrap(), c);
        }
        let twin = GmmModel {
            dim: 1,
            covariance: CovarianceKind::Diagonal,
            means: vec![vec![0.0], vec![0.0]],
            variances: vec![vec![1.0], vec![1.0]],
            mixing_weights: vec![0.5, 0.5],
            assignments: vec![],
            log_likelihood_trace: vec![0.0],
            iterations: 0,
            converged: true,
        };
        assert_eq!(gmm_predict(&twin, &[3.0]).unwrap(), 0);
        assert!(gmm_predict(&twin, &[0.0, 1.0]).is_err());
    }
}
