//! Univariate Gaussian mixtures fitted by EM with deterministic k-means
//! initialisation, BIC model selection, and negligible-weight pruning.
//!
//! All fits are seeded and single-threaded, so identical sample + config
//! means bit-identical output regardless of caller parallelism. Components
//! are reported sorted by ascending mean.

use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const LN_2PI: f64 = 1.8378770664093453;

/// Fixed EM hyperparameters for one run.
///
/// `tol` is the absolute change in mean per-sample log-likelihood between
/// iterations (the reference implementation's convention).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub n_init: usize,
    pub seed: u64,
    /// Variance regulariser `lambda`, added to every M-step variance.
    pub reg: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig { tol: 1e-3, max_iter: 100, n_init: 1, seed: 0, reg: 1e-6 }
    }
}

/// A fitted univariate mixture. Weights sum to one; every variance is at
/// least the regulariser floor; components are sorted by ascending mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureModel {
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    /// Total log-likelihood of the fitted sample under the final parameters.
    pub loglik: f64,
    /// BIC of the selected (pre-prune) fit: `-2 loglik + (3k-1) ln n`.
    pub bic: f64,
    /// False when EM stopped at `max_iter` without meeting `tol`.
    pub converged: bool,
    pub n_iter: usize,
}

impl MixtureModel {
    pub fn k(&self) -> usize {
        self.weights.len()
    }

    /// Index of the dominant component (largest weight, ties to the
    /// lowest index).
    pub fn dominant_index(&self) -> usize {
        let mut best = 0;
        for i in 1..self.weights.len() {
            if self.weights[i] > self.weights[best] {
                best = i;
            }
        }
        best
    }

    fn sort_by_mean(&mut self) {
        let mut order: Vec<usize> = (0..self.k()).collect();
        order.sort_by(|&a, &b| self.means[a].partial_cmp(&self.means[b]).unwrap().then(a.cmp(&b)));
        self.weights = order.iter().map(|&i| self.weights[i]).collect();
        self.means = order.iter().map(|&i| self.means[i]).collect();
        self.sds = order.iter().map(|&i| self.sds[i]).collect();
    }
}

/// Per-k fit summary kept for the diagnostic dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateFit {
    pub k: usize,
    pub bic: f64,
    pub loglik: f64,
    pub converged: bool,
}

/// Component cap `min(4, floor(n/25))`, floored at one.
pub fn k_max(n: usize) -> usize {
    (n / 25).clamp(1, 4)
}

/// `-2 loglik + (3k - 1) ln n` for a univariate k-component mixture.
pub fn bic_score(loglik: f64, k: usize, n: usize) -> f64 {
    -2.0 * loglik + (3 * k - 1) as f64 * (n as f64).ln()
}

fn nearest_centroid(x: f64, centroids: &[f64], current: usize) -> usize {
    let mut best = 0;
    let mut best_d = (x - centroids[0]) * (x - centroids[0]);
    for (j, &c) in centroids.iter().enumerate().skip(1) {
        let d = (x - c) * (x - c);
        // strict improvement, except the current assignment wins ties to
        // keep degenerate (duplicate-centroid) configurations stable
        if d < best_d || (d == best_d && j == current && best != current) {
            best_d = d;
            best = j;
        }
    }
    best
}

/// Deterministic k-means initialisation: seeded k-means++ draw, Lloyd's
/// algorithm capped at 300 iterations, empty clusters re-seeded at the
/// point farthest from its assigned centroid.
///
/// Returns occupancy weights, cluster means, and within-cluster variances
/// floored at `reg`.
pub fn kmeans_init(
    sample: &[f64],
    k: usize,
    seed: u64,
    reg: f64,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let n = sample.len();
    if k == 0 || n == 0 {
        return Err(Error::Numerical("kmeans: empty sample or k = 0".into()));
    }
    if k > n {
        return Err(Error::Numerical(format!("kmeans: k={k} exceeds sample size {n}")));
    }

    // greedy k-means++ seeding: per step, draw 2 + ln(k) candidates by
    // squared-distance weight and keep the one minimising the potential
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_trials = 2 + (k as f64).ln().floor() as usize;
    let mut centroids = Vec::with_capacity(k);
    centroids.push(sample[rng.random_range(0..n)]);
    let mut d2: Vec<f64> = sample.iter().map(|&x| (x - centroids[0]) * (x - centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut best = sample[0];
            let mut best_potential = f64::INFINITY;
            for _ in 0..n_trials {
                let r = rng.random::<f64>() * total;
                let mut acc = 0.0;
                let mut pick = n - 1;
                for (i, &w) in d2.iter().enumerate() {
                    acc += w;
                    if acc >= r {
                        pick = i;
                        break;
                    }
                }
                let candidate = sample[pick];
                let potential: f64 = sample
                    .iter()
                    .zip(&d2)
                    .map(|(&x, &d)| d.min((x - candidate) * (x - candidate)))
                    .sum();
                if potential < best_potential {
                    best_potential = potential;
                    best = candidate;
                }
            }
            best
        } else {
            // all residual distances zero: duplicate an existing point
            sample[rng.random_range(0..n)]
        };
        centroids.push(next);
        for (i, &x) in sample.iter().enumerate() {
            d2[i] = d2[i].min((x - next) * (x - next));
        }
    }

    // Lloyd iterations
    let mut assign = vec![usize::MAX; n];
    for _ in 0..300 {
        let mut changed = false;
        for (i, &x) in sample.iter().enumerate() {
            let current = if assign[i] == usize::MAX { 0 } else { assign[i] };
            let j = nearest_centroid(x, &centroids, current);
            if assign[i] != j {
                assign[i] = j;
                changed = true;
            }
        }

        // re-seed empty clusters at the farthest point from its centroid
        let mut counts = vec![0usize; k];
        for &a in &assign {
            counts[a] += 1;
        }
        for j in 0..k {
            if counts[j] > 0 {
                continue;
            }
            let mut far = None;
            let mut far_d = -1.0;
            for (i, &x) in sample.iter().enumerate() {
                if counts[assign[i]] <= 1 {
                    continue; // stealing would empty the donor
                }
                let d = (x - centroids[assign[i]]) * (x - centroids[assign[i]]);
                if d > far_d {
                    far_d = d;
                    far = Some(i);
                }
            }
            if let Some(i) = far {
                counts[assign[i]] -= 1;
                assign[i] = j;
                counts[j] = 1;
                centroids[j] = sample[i];
                changed = true;
            }
        }

        for j in 0..k {
            if counts[j] > 0 {
                let sum: f64 = sample.iter().zip(&assign).filter(|(_, &a)| a == j).map(|(&x, _)| x).sum();
                centroids[j] = sum / counts[j] as f64;
            }
        }
        if !changed {
            break;
        }
    }

    let mut counts = vec![0usize; k];
    for &a in &assign {
        counts[a] += 1;
    }
    let mut weights = vec![0.0; k];
    let mut means = vec![0.0; k];
    let mut vars = vec![0.0; k];
    for j in 0..k {
        let cj = counts[j] as f64;
        weights[j] = cj / n as f64;
        means[j] = centroids[j];
        let ss: f64 = sample
            .iter()
            .zip(&assign)
            .filter(|(_, &a)| a == j)
            .map(|(&x, _)| (x - centroids[j]) * (x - centroids[j]))
            .sum();
        vars[j] = (ss / cj).max(reg);
    }
    Ok((weights, means, vars))
}

fn log_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -0.5 * LN_2PI - sd.ln() - 0.5 * z * z
}

/// One E-step: per-point responsibilities and the mean per-sample
/// log-likelihood under the given parameters.
fn e_step(
    sample: &[f64],
    weights: &[f64],
    means: &[f64],
    sds: &[f64],
    resp: &mut [f64],
) -> f64 {
    let k = weights.len();
    let mut total = 0.0;
    for (i, &x) in sample.iter().enumerate() {
        let row = &mut resp[i * k..(i + 1) * k];
        let mut max = f64::NEG_INFINITY;
        for j in 0..k {
            row[j] = weights[j].ln() + log_pdf(x, means[j], sds[j]);
            if row[j] > max {
                max = row[j];
            }
        }
        let mut sum = 0.0;
        for r in row.iter_mut() {
            *r = (*r - max).exp();
            sum += *r;
        }
        for r in row.iter_mut() {
            *r /= sum;
        }
        total += max + sum.ln();
    }
    total / sample.len() as f64
}

/// Fit a k-component mixture by EM, additionally returning the
/// per-iteration mean log-likelihood trace (non-decreasing within
/// floating-point slack).
pub fn em_fit_trace(sample: &[f64], k: usize, cfg: &EmConfig) -> Result<(MixtureModel, Vec<f64>)> {
    let n = sample.len();
    if k == 0 {
        return Err(Error::Numerical("em_fit: k must be >= 1".into()));
    }
    if n < k {
        return Err(Error::Numerical(format!("em_fit: sample size {n} < k={k}")));
    }
    if cfg.n_init == 0 {
        return Err(Error::Config("em: n_init must be >= 1".into()));
    }

    let mut best: Option<(MixtureModel, Vec<f64>)> = None;
    for init in 0..cfg.n_init {
        let fitted = em_fit_single(sample, k, cfg, cfg.seed.wrapping_add(init as u64))?;
        if best.as_ref().map_or(true, |(m, _)| fitted.0.loglik > m.loglik) {
            best = Some(fitted);
        }
    }
    Ok(best.expect("n_init >= 1"))
}

fn em_fit_single(
    sample: &[f64],
    k: usize,
    cfg: &EmConfig,
    seed: u64,
) -> Result<(MixtureModel, Vec<f64>)> {
    let n = sample.len();
    let (mut weights, mut means, vars) = kmeans_init(sample, k, seed, cfg.reg)?;
    let mut sds: Vec<f64> = vars.iter().map(|v| v.sqrt()).collect();

    let mut resp = vec![0.0; n * k];
    let mut trace = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    let mut converged = false;
    let mut n_iter = 0;

    for iter in 1..=cfg.max_iter {
        n_iter = iter;
        let mean_lb = e_step(sample, &weights, &means, &sds, &mut resp);
        if !mean_lb.is_finite() {
            return Err(Error::Numerical(format!(
                "em_fit: non-finite log-likelihood at iteration {iter}"
            )));
        }
        trace.push(mean_lb);

        // M-step
        for j in 0..k {
            let mut nk = 0.0;
            let mut sum = 0.0;
            for i in 0..n {
                let r = resp[i * k + j];
                nk += r;
                sum += r * sample[i];
            }
            let mu = sum / nk;
            let mut ss = 0.0;
            for i in 0..n {
                let d = sample[i] - mu;
                ss += resp[i * k + j] * d * d;
            }
            weights[j] = nk / n as f64;
            means[j] = mu;
            sds[j] = (ss / nk + cfg.reg).sqrt();
        }
        if means.iter().chain(&sds).any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "em_fit: non-finite parameters at iteration {iter}"
            )));
        }

        if (mean_lb - prev).abs() < cfg.tol {
            converged = true;
            break;
        }
        prev = mean_lb;
    }

    // total log-likelihood under the final parameters
    let mut total = 0.0;
    for &x in sample {
        let mut max = f64::NEG_INFINITY;
        let mut terms = [0.0f64; 4];
        for j in 0..k {
            terms[j] = weights[j].ln() + log_pdf(x, means[j], sds[j]);
            if terms[j] > max {
                max = terms[j];
            }
        }
        let sum: f64 = terms[..k].iter().map(|t| (t - max).exp()).sum();
        total += max + sum.ln();
    }
    if !total.is_finite() {
        return Err(Error::Numerical("em_fit: non-finite final log-likelihood".into()));
    }

    let mut model = MixtureModel {
        weights,
        means,
        sds,
        loglik: total,
        bic: bic_score(total, k, n),
        converged,
        n_iter,
    };
    model.sort_by_mean();
    Ok((model, trace))
}

/// Fit a k-component mixture by EM with the given config.
pub fn em_fit(sample: &[f64], k: usize, cfg: &EmConfig) -> Result<MixtureModel> {
    em_fit_trace(sample, k, cfg).map(|(m, _)| m)
}

/// Fit `k = 1..k_max(n)`, select the lowest-BIC model (ties to the smaller
/// k), drop components with weight below `prune_weight`, and renormalise
/// the remaining weights. Also returns the per-k candidate summaries.
pub fn select_and_prune_with_candidates(
    sample: &[f64],
    cfg: &EmConfig,
    prune_weight: f64,
) -> Result<(MixtureModel, Vec<CandidateFit>)> {
    let kmax = k_max(sample.len());
    let mut candidates = Vec::with_capacity(kmax);
    let mut best: Option<MixtureModel> = None;
    for k in 1..=kmax {
        let model = em_fit(sample, k, cfg)?;
        candidates.push(CandidateFit {
            k,
            bic: model.bic,
            loglik: model.loglik,
            converged: model.converged,
        });
        if best.as_ref().map_or(true, |b| model.bic < b.bic) {
            best = Some(model);
        }
    }
    let mut model = best.expect("k_max >= 1");

    let keep: Vec<usize> =
        (0..model.k()).filter(|&i| model.weights[i] >= prune_weight).collect();
    // the max-weight component is always >= 1/k >= 0.25, so the keep set
    // cannot be empty for any prune threshold below that
    assert!(!keep.is_empty(), "pruning removed every component");
    if keep.len() < model.k() {
        model.weights = keep.iter().map(|&i| model.weights[i]).collect();
        model.means = keep.iter().map(|&i| model.means[i]).collect();
        model.sds = keep.iter().map(|&i| model.sds[i]).collect();
        let sum: f64 = model.weights.iter().sum();
        for w in &mut model.weights {
            *w /= sum;
        }
    }
    Ok((model, candidates))
}

/// [`select_and_prune_with_candidates`] without the candidate summaries.
pub fn select_and_prune(sample: &[f64], cfg: &EmConfig, prune_weight: f64) -> Result<MixtureModel> {
    select_and_prune_with_candidates(sample, cfg, prune_weight).map(|(m, _)| m)
}
