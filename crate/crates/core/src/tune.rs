//! Sequential model-based tuning of the boosting hyperparameters: a
//! quasi-random warm-up followed by expected-improvement proposals from a
//! Gaussian-process surrogate.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::gbtree::BoostConfig;
use crate::linalg::{cholesky, solve_lower, solve_upper_transposed, Dense};
use crate::rng::{stream, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchSpace {
    pub gamma: (f64, f64),
    /// Searched on a log scale.
    pub learning_rate: (f64, f64),
    pub max_depth: (usize, usize),
    pub n_estimators: (usize, usize),
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            gamma: (0.0, 5.0),
            learning_rate: (0.01, 0.3),
            max_depth: (2, 10),
            n_estimators: (50, 500),
        }
    }
}

impl SearchSpace {
    pub fn validate(&self) -> Result<()> {
        let (g0, g1) = self.gamma;
        let (l0, l1) = self.learning_rate;
        if !(g0.is_finite() && g1.is_finite() && 0.0 <= g0 && g0 <= g1) {
            return Err(Error::Tuning(format!("bad gamma bounds {:?}", self.gamma)));
        }
        if !(l0.is_finite() && l1.is_finite() && 0.0 < l0 && l0 <= l1 && l1 <= 1.0) {
            return Err(Error::Tuning(format!(
                "bad learning-rate bounds {:?}",
                self.learning_rate
            )));
        }
        if self.max_depth.0 == 0 || self.max_depth.0 > self.max_depth.1 {
            return Err(Error::Tuning(format!("bad max-depth bounds {:?}", self.max_depth)));
        }
        if self.n_estimators.0 == 0 || self.n_estimators.0 > self.n_estimators.1 {
            return Err(Error::Tuning(format!("bad estimator bounds {:?}", self.n_estimators)));
        }
        Ok(())
    }

    /// Maps a point of the unit cube to a configuration; fields outside the
    /// search space are copied from `base`.
    pub fn decode(&self, u: &[f64; 4], base: &BoostConfig) -> BoostConfig {
        let lerp = |(a, b): (f64, f64), t: f64| a + (b - a) * t.clamp(0.0, 1.0);
        let int = |(a, b): (usize, usize), t: f64| {
            let v = a as f64 + (b - a) as f64 * t.clamp(0.0, 1.0);
            (v.round() as usize).clamp(a, b)
        };
        let (l0, l1) = self.learning_rate;
        BoostConfig {
            gamma: lerp(self.gamma, u[0]),
            learning_rate: (l0.ln() + (l1.ln() - l0.ln()) * u[1].clamp(0.0, 1.0))
                .exp()
                .clamp(l0, l1),
            max_depth: int(self.max_depth, u[2]),
            n_estimators: int(self.n_estimators, u[3]),
            ..*base
        }
    }

    /// Inverse of [`decode`](Self::decode) for the searched fields.
    pub fn encode(&self, c: &BoostConfig) -> [f64; 4] {
        let frac = |v: f64, (a, b): (f64, f64)| if b > a { (v - a) / (b - a) } else { 0.5 };
        let (l0, l1) = self.learning_rate;
        [
            frac(c.gamma, self.gamma),
            frac(c.learning_rate.ln(), (l0.ln(), l1.ln())),
            frac(c.max_depth as f64, (self.max_depth.0 as f64, self.max_depth.1 as f64)),
            frac(
                c.n_estimators as f64,
                (self.n_estimators.0 as f64, self.n_estimators.1 as f64),
            ),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub config: BoostConfig,
    /// `None` when the objective failed.
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best_config: BoostConfig,
    pub best_score: f64,
    pub trials: Vec<Trial>,
    pub budget_used: usize,
}

/// Number of quasi-random trials before the surrogate takes over.
pub fn warmup_trials(budget: usize) -> usize {
    (budget / 4).max(5).min(budget)
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    out
}

/// Randomly shifted Halton points in the unit cube.
fn halton_points(n: usize, rng: &mut Rng) -> Vec<[f64; 4]> {
    let shift: [f64; 4] = std::array::from_fn(|_| rng.gen::<f64>());
    (1..=n as u64)
        .map(|i| {
            let bases = [2, 3, 5, 7];
            std::array::from_fn(|d| (radical_inverse(i, bases[d]) + shift[d]).fract())
        })
        .collect()
}

/// Gaussian process with a squared-exponential kernel on standardized
/// scores; the length scale is picked by marginal likelihood from a grid.
struct Surrogate {
    xs: Vec<[f64; 4]>,
    chol: Dense,
    alpha: Vec<f64>,
    length: f64,
    y_mean: f64,
    y_std: f64,
}

const NOISE: f64 = 1e-6;
const LENGTH_GRID: [f64; 5] = [0.1, 0.2, 0.35, 0.6, 1.0];

fn kernel(a: &[f64; 4], b: &[f64; 4], length: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-0.5 * d2 / (length * length)).exp()
}

impl Surrogate {
    fn fit(xs: &[[f64; 4]], ys: &[f64]) -> Option<Self> {
        let n = ys.len() as f64;
        let y_mean = ys.iter().sum::<f64>() / n;
        let var = ys.iter().map(|y| (y - y_mean).powi(2)).sum::<f64>() / n;
        let y_std = if var > 0.0 { var.sqrt() } else { 1.0 };
        let z: Vec<f64> = ys.iter().map(|y| (y - y_mean) / y_std).collect();
        let mut best: Option<(f64, Surrogate)> = None;
        for &length in &LENGTH_GRID {
            let k: Dense = xs
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    xs.iter()
                        .enumerate()
                        .map(|(j, b)| kernel(a, b, length) + if i == j { NOISE + 1e-8 } else { 0.0 })
                        .collect()
                })
                .collect();
            let Ok(chol) = cholesky(&k) else { continue };
            if chol.iter().enumerate().any(|(i, r)| r[i] <= 0.0) {
                continue;
            }
            let alpha = solve_upper_transposed(&chol, &solve_lower(&chol, &z));
            let fit_term: f64 = z.iter().zip(&alpha).map(|(a, b)| a * b).sum();
            let log_det: f64 = chol.iter().enumerate().map(|(i, r)| r[i].ln()).sum();
            let log_lik = -0.5 * fit_term - log_det;
            if best.as_ref().is_none_or(|(b, _)| log_lik > *b) {
                best = Some((
                    log_lik,
                    Surrogate {
                        xs: xs.to_vec(),
                        chol,
                        alpha,
                        length,
                        y_mean,
                        y_std,
                    },
                ));
            }
        }
        best.map(|(_, s)| s)
    }

    /// Predictive mean and standard deviation in score units.
    fn predict(&self, x: &[f64; 4]) -> (f64, f64) {
        let k: Vec<f64> = self.xs.iter().map(|a| kernel(a, x, self.length)).collect();
        let mean: f64 = k.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
        let v = solve_lower(&self.chol, &k);
        let var = (1.0 - v.iter().map(|a| a * a).sum::<f64>()).max(0.0);
        (self.y_mean + self.y_std * mean, self.y_std * var.sqrt())
    }
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Expected improvement over `best` for a maximization problem.
pub fn expected_improvement(mean: f64, std: f64, best: f64, xi: f64) -> f64 {
    if std <= 0.0 {
        return (mean - best - xi).max(0.0);
    }
    let d = mean - best - xi;
    let z = d / std;
    d * normal_cdf(z) + std * normal_pdf(z)
}

const CANDIDATES: usize = 2000;
const XI: f64 = 0.01;

/// Maximizes `objective` over `space` with `budget` evaluations. Fields of
/// the configuration outside the search space come from `base`.
pub fn optimize<F>(
    space: &SearchSpace,
    base: &BoostConfig,
    objective: F,
    budget: usize,
    seed: u64,
) -> Result<TuneResult>
where
    F: Fn(&BoostConfig) -> Result<f64> + Sync,
{
    space.validate()?;
    if budget == 0 {
        return Err(Error::Tuning("budget must be at least 1".into()));
    }
    let evaluate = |config: BoostConfig| match objective(&config) {
        Ok(s) if s.is_finite() => Trial {
            config,
            score: Some(s),
            error: None,
        },
        Ok(s) => Trial {
            config,
            score: None,
            error: Some(format!("non-finite score {s}")),
        },
        Err(e) => Trial {
            config,
            score: None,
            error: Some(e.to_string()),
        },
    };

    let mut rng = stream(seed, "tune", 0);
    let warm = halton_points(warmup_trials(budget), &mut rng);
    let mut trials: Vec<Trial> = warm.par_iter().map(|u| evaluate(space.decode(u, base))).collect();

    while trials.len() < budget {
        let ok: Vec<(&Trial, f64)> = trials.iter().filter_map(|t| t.score.map(|s| (t, s))).collect();
        let surrogate = if ok.len() >= 2 {
            let xs: Vec<[f64; 4]> = ok.iter().map(|(t, _)| space.encode(&t.config)).collect();
            let ys: Vec<f64> = ok.iter().map(|(_, s)| *s).collect();
            Surrogate::fit(&xs, &ys)
        } else {
            None
        };
        let best = ok.iter().map(|(_, s)| *s).fold(f64::NEG_INFINITY, f64::max);
        let incumbent = ok
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(t, _)| space.encode(&t.config));

        let mut candidates: Vec<[f64; 4]> = (0..CANDIDATES)
            .map(|_| std::array::from_fn(|_| rng.gen::<f64>()))
            .collect();
        if let Some(inc) = incumbent {
            for _ in 0..CANDIDATES / 4 {
                candidates.push(std::array::from_fn(|d| {
                    (inc[d] + 0.1 * (rng.gen::<f64>() - 0.5)).clamp(0.0, 1.0)
                }));
            }
        }
        let seen: Vec<BoostConfig> = trials.iter().map(|t| t.config).collect();
        let mut scored: Vec<(f64, BoostConfig)> = candidates
            .iter()
            .map(|u| {
                let c = space.decode(u, base);
                let ei = match &surrogate {
                    Some(s) => {
                        let (m, sd) = s.predict(&space.encode(&c));
                        expected_improvement(m, sd, best, XI * best.abs().max(1e-3))
                    }
                    None => 0.0,
                };
                (ei, c)
            })
            .collect();
        // Highest EI first; the stable sort keeps draw order among ties.
        scored.sort_by(|a, b| b.0.total_cmp(&a.0));
        let next = scored
            .iter()
            .map(|(_, c)| *c)
            .find(|c| !seen.contains(c))
            .unwrap_or(scored[0].1);
        trials.push(evaluate(next));
    }

    let (best_idx, best_score) = trials
        .iter()
        .enumerate()
        .filter_map(|(i, t)| t.score.map(|s| (i, s)))
        .fold(None, |acc: Option<(usize, f64)>, (i, s)| match acc {
            Some((_, b)) if b >= s => acc,
            _ => Some((i, s)),
        })
        .ok_or_else(|| Error::Tuning("every trial failed".into()))?;
    Ok(TuneResult {
        best_config: trials[best_idx].config,
        best_score,
        budget_used: trials.len(),
        trials,
    })
}
