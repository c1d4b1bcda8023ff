//! Lloyd's k-means with k-means++ seeding.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::Rng;

pub const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeans {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub iterations: usize,
    /// Within-cluster sum of squares after each update step.
    pub inertia: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid, ties to the lowest index.
pub fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

/// Clusters the rows of a complete table into `k` groups.
pub fn kmeans(data: &Matrix, k: usize, rng: &mut Rng) -> Result<KMeans> {
    let n = data.n_rows();
    if k == 0 || k > n {
        return Err(Error::Argument(format!("k = {k} is invalid for {n} rows")));
    }
    if data.count_missing() > 0 {
        return Err(Error::Precondition("k-means needs a complete table".into()));
    }
    let rows: Vec<Vec<f64>> = (0..n).map(|i| data.row(i)).collect();

    // k-means++: each new centre drawn with probability proportional to the
    // squared distance to the nearest existing centre.
    let mut centroids = vec![rows[rng.gen_range(0..n)].clone()];
    let mut d2: Vec<f64> = rows.iter().map(|r| sq_dist(r, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, d) in d2.iter().enumerate() {
                if u < *d {
                    chosen = i;
                    break;
                }
                u -= d;
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centroids.push(rows[pick].clone());
        for (d, r) in d2.iter_mut().zip(&rows) {
            *d = d.min(sq_dist(r, &centroids[centroids.len() - 1]));
        }
    }

    let dim = data.n_cols();
    let mut assignments = vec![usize::MAX; n];
    let mut inertia = Vec::new();
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut changed = false;
        for (a, r) in assignments.iter_mut().zip(&rows) {
            let c = nearest(r, &centroids);
            if *a != c {
                *a = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (a, r) in assignments.iter().zip(&rows) {
            counts[*a] += 1;
            for (s, v) in sums[*a].iter_mut().zip(r) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        // Empty clusters restart at the point farthest from its centre.
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..n)
                    .max_by(|&i, &j| {
                        sq_dist(&rows[i], &centroids[assignments[i]])
                            .total_cmp(&sq_dist(&rows[j], &centroids[assignments[j]]))
                            .then(j.cmp(&i))
                    })
                    .unwrap_or(0);
                centroids[c] = rows[far].clone();
                counts[assignments[far]] -= 1;
                assignments[far] = c;
                counts[c] = 1;
            }
        }
        inertia.push(
            rows.iter()
                .zip(&assignments)
                .map(|(r, &a)| sq_dist(r, &centroids[a]))
                .sum(),
        );
    }
    Ok(KMeans {
        centroids,
        assignments,
        iterations,
        inertia,
    })
}
