use rand::seq::index;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, Dense};
use crate::matrix::Matrix;
use crate::rng::Rng;

use super::CoefficientSet;

pub const COEFFICIENT_BOUND: f64 = 3.0;

/// `n` i.i.d. uniform draws on [−3, 3].
pub fn draw_coefficients(n: usize, rng: &mut Rng) -> Result<CoefficientSet> {
    if n == 0 {
        return Err(Error::InvalidSpec("at least one coefficient is required".into()));
    }
    let dist = Uniform::new_inclusive(-COEFFICIENT_BOUND, COEFFICIENT_BOUND);
    CoefficientSet::new((0..n).map(|_| dist.sample(rng)).collect())
}

/// Block-diagonal correlation matrix: features (2k, 2k+1) correlate at `r`,
/// a trailing odd feature stays independent.
pub fn build_covariance(n_features: usize, r: f64) -> Result<Dense> {
    if n_features == 0 {
        return Err(Error::InvalidSpec("covariance needs at least one feature".into()));
    }
    if r.is_nan() || r.abs() >= 1.0 {
        return Err(Error::InvalidSpec(format!("pair correlation {r} must satisfy |r| < 1")));
    }
    let mut sigma = vec![vec![0.0; n_features]; n_features];
    for (i, row) in sigma.iter_mut().enumerate() {
        row[i] = 1.0;
        let partner = i ^ 1;
        if partner < n_features {
            row[partner] = r;
        }
    }
    Ok(sigma)
}

/// `n_rows` i.i.d. draws from N(0, sigma), drawn row by row.
pub fn sample_features(n_rows: usize, sigma: &Dense, rng: &mut Rng) -> Result<Matrix> {
    let l = cholesky(sigma)?;
    let p = sigma.len();
    let mut m = Matrix::zeros(n_rows, p);
    let mut z = vec![0.0; p];
    for i in 0..n_rows {
        for v in z.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
        for (j, lrow) in l.iter().enumerate() {
            let x: f64 = lrow[..=j].iter().zip(&z).map(|(a, b)| a * b).sum();
            m.set(i, j, x);
        }
    }
    Ok(m)
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Largest double below one; keeps saturated probabilities inside (0, 1).
const P_MAX: f64 = 1.0 - f64::EPSILON / 2.0;

/// Median of a finite sample (mean of the middle pair for even length).
pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Sigmoid of the latent score centered on its median. Returns the
/// probabilities and the center used.
pub fn to_probability(latent: &[f64]) -> Result<(Vec<f64>, f64)> {
    if let Some(row) = latent.iter().position(|f| !f.is_finite()) {
        return Err(Error::Numeric {
            row,
            message: format!("latent score {} is not finite", latent[row]),
        });
    }
    let center = median(latent);
    let probs = latent
        .iter()
        .map(|&f| sigmoid(f - center).clamp(f64::MIN_POSITIVE, P_MAX))
        .collect();
    Ok((probs, center))
}

/// Independent Bernoulli draws.
pub fn sample_labels(probs: &[f64], rng: &mut Rng) -> Result<Vec<u8>> {
    if let Some(row) = probs.iter().position(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::Numeric {
            row,
            message: format!("probability {} outside [0, 1]", probs[row]),
        });
    }
    Ok(probs.iter().map(|&p| u8::from(rng.gen::<f64>() < p)).collect())
}

/// Appends `k` standard-normal columns.
pub fn add_noise_features(table: &mut Matrix, k: usize, rng: &mut Rng) {
    let n = table.n_rows();
    for _ in 0..k {
        let col: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        table.push_column(col).expect("noise column has the table's row count");
    }
}

/// Segment ids in 1..=S with segment sizes as equal as possible (the first
/// `n_rows % S` segments get one extra row), in shuffled row order.
pub fn assign_segments(n_rows: usize, n_segments: usize, rng: &mut Rng) -> Result<Vec<u32>> {
    if n_segments == 0 {
        return Err(Error::InvalidSpec("segment count must be at least 1".into()));
    }
    let base = n_rows / n_segments;
    let extra = n_rows % n_segments;
    let mut out = Vec::with_capacity(n_rows);
    for s in 0..n_segments {
        let size = base + usize::from(s < extra);
        out.extend(std::iter::repeat_n(s as u32 + 1, size));
    }
    for i in (1..out.len()).rev() {
        let j = rng.gen_range(0..=i);
        out.swap(i, j);
    }
    Ok(out)
}

/// Picks `feature_count` of the signal (non-noise) features uniformly at
/// random, returned in ascending order.
pub fn choose_missing_features(dataset: &Dataset, feature_count: usize, rng: &mut Rng) -> Result<Vec<usize>> {
    let signal = dataset.signal_indices();
    if feature_count > signal.len() {
        return Err(Error::InvalidSpec(format!(
            "cannot null {feature_count} features, only {} signal features exist",
            signal.len()
        )));
    }
    let mut chosen: Vec<usize> = index::sample(rng, signal.len(), feature_count)
        .into_iter()
        .map(|k| signal[k])
        .collect();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Masks each cell of the listed features independently with probability
/// `rate`. Labels and probabilities are untouched.
pub fn mask_cells(dataset: &mut Dataset, features: &[usize], rate: f64, rng: &mut Rng) -> Result<()> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::InvalidSpec(format!("null rate {rate} outside [0, 1]")));
    }
    for &j in features {
        if j >= dataset.n_features() {
            return Err(Error::InvalidSpec(format!("feature {j} does not exist")));
        }
        for i in 0..dataset.n_rows() {
            if rng.gen::<f64>() < rate {
                dataset.features.set(i, j, f64::NAN);
                dataset.missing_mask[j][i] = true;
            }
        }
    }
    let mut names: Vec<String> = features.iter().map(|&j| dataset.feature_names[j].clone()).collect();
    dataset.manifest.missing_features.append(&mut names);
    Ok(())
}

/// Chooses `feature_count` signal features and masks their cells at `rate`,
/// both with `rng`. Returns the chosen feature indices.
pub fn inject_missing(dataset: &mut Dataset, feature_count: usize, rate: f64, rng: &mut Rng) -> Result<Vec<usize>> {
    let chosen = choose_missing_features(dataset, feature_count, rng)?;
    mask_cells(dataset, &chosen, rate, rng)?;
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::DatasetManifest;
    use crate::rng::from_seed;

    fn pearson(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let mut sab = 0.0;
        let mut saa = 0.0;
        let mut sbb = 0.0;
        for (x, y) in a.iter().zip(b) {
            sab += (x - ma) * (y - mb);
            saa += (x - ma).powi(2);
            sbb += (y - mb).powi(2);
        }
        sab / (saa * sbb).sqrt()
    }

    fn toy_dataset(features: Matrix) -> Dataset {
        let n = features.n_rows();
        let p = features.n_cols();
        Dataset {
            feature_names: (1..=p).map(|j| format!("x{j}")).collect(),
            features,
            missing_mask: vec![vec![false; n]; p],
            noise_flags: vec![false; p],
            categorical: Vec::new(),
            labels: vec![0; n],
            true_probability: None,
            manifest: DatasetManifest::default(),
        }
    }

    #[test]
    fn coefficients_in_range_and_reproducible() {
        let a = draw_coefficients(10, &mut from_seed(3)).unwrap();
        assert_eq!(a.len(), 10);
        assert!(a.values().iter().all(|c| (-3.0..=3.0).contains(c)));
        let b = draw_coefficients(33, &mut from_seed(9)).unwrap();
        let c = draw_coefficients(33, &mut from_seed(9)).unwrap();
        assert_eq!(b, c);
        assert!(matches!(
            draw_coefficients(0, &mut from_seed(1)),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn coefficient_moments() {
        let c = draw_coefficients(100_000, &mut from_seed(11)).unwrap();
        let v = c.values();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        // uniform on [-3, 3]: mean 0, sd sqrt(3); 5 sd of the sample mean is ~0.027
        assert!(mean.abs() < 0.05);
        assert!(v.iter().cloned().fold(f64::INFINITY, f64::min) < -2.9);
        assert!(v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) > 2.9);
    }

    #[test]
    fn covariance_blocks() {
        let s = build_covariance(10, 0.5).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                let expected = if i == j {
                    1.0
                } else if i / 2 == j / 2 {
                    0.5
                } else {
                    0.0
                };
                assert_eq!(s[i][j], expected);
            }
        }
        assert_eq!(build_covariance(1, 0.5).unwrap(), vec![vec![1.0]]);
        let odd = build_covariance(5, 0.5).unwrap();
        assert_eq!(odd[4], vec![0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(odd[2][3], 0.5);
        assert!(build_covariance(4, 1.0).is_err());
        assert!(build_covariance(4, -1.2).is_err());
    }

    #[test]
    fn sampled_correlation_matches_sigma() {
        let sigma = build_covariance(10, 0.5).unwrap();
        let x = sample_features(100_000, &sigma, &mut from_seed(5)).unwrap();
        for i in 0..10 {
            for j in i + 1..10 {
                let r = pearson(x.column(i), x.column(j));
                let target = if i / 2 == j / 2 { 0.5 } else { 0.0 };
                assert!((r - target).abs() < 0.02, "corr({i},{j}) = {r}");
            }
        }
        let ident = build_covariance(3, 0.0).unwrap();
        let y = sample_features(100_000, &ident, &mut from_seed(6)).unwrap();
        assert!(pearson(y.column(0), y.column(2)).abs() < 0.02);
        assert_eq!(sample_features(0, &sigma, &mut from_seed(1)).unwrap().n_rows(), 0);
        let bad = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        assert!(matches!(
            sample_features(3, &bad, &mut from_seed(1)),
            Err(Error::Decomposition(_))
        ));
    }

    #[test]
    fn probability_centering() {
        let (p, c) = to_probability(&[-1.0, 0.0, 2.0, 1.0, 0.0 + 3f64.ln()]).unwrap();
        assert_eq!(c, 1.0);
        assert_eq!(p[3], 0.5);
        let (q, _) = to_probability(&[0.0, 0.0, 3f64.ln()]).unwrap();
        assert!((q[2] - 0.75).abs() < 1e-12);
        let (r, _) = to_probability(&[0.0, 0.0, 1e6]).unwrap();
        assert!(r[2] < 1.0 && r[2] > 0.999_999);
        assert!(p.windows(2).all(|w| w[0] != w[1]));
        match to_probability(&[0.0, f64::INFINITY]) {
            Err(Error::Numeric { row, .. }) => assert_eq!(row, 1),
            other => panic!("expected numeric error, got {other:?}"),
        }
    }

    #[test]
    fn label_sampling() {
        assert!(sample_labels(&[0.0; 100], &mut from_seed(1))
            .unwrap()
            .iter()
            .all(|&y| y == 0));
        let y = sample_labels(&vec![0.5; 100_000], &mut from_seed(2)).unwrap();
        let rate = y.iter().map(|&v| f64::from(v)).sum::<f64>() / y.len() as f64;
        // binomial sd = 0.0016, so 0.01 is over 6 sd
        assert!((rate - 0.5).abs() < 0.01);
        assert_eq!(y, sample_labels(&vec![0.5; 100_000], &mut from_seed(2)).unwrap());
        assert!(sample_labels(&[1.5], &mut from_seed(1)).is_err());
    }

    #[test]
    fn noise_columns() {
        let mut m = Matrix::zeros(5, 2);
        let before = m.clone();
        add_noise_features(&mut m, 0, &mut from_seed(1));
        assert_eq!(m, before);
        add_noise_features(&mut m, 3, &mut from_seed(1));
        assert_eq!(m.n_cols(), 5);
        assert_eq!(m.column(0), before.column(0));
    }

    #[test]
    fn segments_are_balanced() {
        assert!(assign_segments(10, 1, &mut from_seed(1))
            .unwrap()
            .iter()
            .all(|&s| s == 1));
        let s = assign_segments(30_000, 3, &mut from_seed(4)).unwrap();
        for seg in 1..=3 {
            let share = s.iter().filter(|&&v| v == seg).count() as f64 / 30_000.0;
            assert!((share - 1.0 / 3.0).abs() < 0.02);
        }
        assert_eq!(s, assign_segments(30_000, 3, &mut from_seed(4)).unwrap());
        let five = assign_segments(20_000, 5, &mut from_seed(4)).unwrap();
        assert_eq!(five.iter().filter(|&&v| v == 5).count(), 4_000);
        assert!(assign_segments(10, 0, &mut from_seed(1)).is_err());
    }

    #[test]
    fn missing_injection() {
        let x = sample_features(100_000, &build_covariance(4, 0.0).unwrap(), &mut from_seed(3)).unwrap();
        let mut d = toy_dataset(x.clone());
        let none = inject_missing(&mut d, 2, 0.0, &mut from_seed(4)).unwrap();
        assert_eq!(none.len(), 2);
        assert!(d.missing_mask.iter().flatten().all(|&m| !m));

        let mut d = toy_dataset(x);
        let chosen = inject_missing(&mut d, 2, 0.5, &mut from_seed(4)).unwrap();
        for &j in &chosen {
            let frac = d.missing_mask[j].iter().filter(|&&m| m).count() as f64 / 100_000.0;
            assert!((frac - 0.5).abs() < 0.01);
        }
        d.validate().unwrap();
        assert!(inject_missing(&mut d, 5, 0.5, &mut from_seed(4)).is_err());
    }

    #[test]
    fn toy_before_after_layout() {
        // the 4 x 4 illustration: two features nulled at a 50% rate
        let original = Matrix::from_rows(&[
            vec![0.34, 0.04, 0.28, 0.81],
            vec![0.67, 0.76, 0.60, 0.68],
            vec![0.85, 0.71, 0.92, 0.45],
            vec![0.50, 0.42, 0.59, 0.86],
        ])
        .unwrap();
        let mut d = toy_dataset(original.clone());
        mask_cells(&mut d, &[1, 2], 0.5, &mut from_seed(8)).unwrap();
        assert_eq!((d.features.n_rows(), d.features.n_cols()), (4, 4));
        for i in 0..4 {
            for j in 0..4 {
                if d.missing_mask[j][i] {
                    assert!([1, 2].contains(&j));
                    assert!(d.features.get(i, j).is_nan());
                } else {
                    assert_eq!(d.features.get(i, j), original.get(i, j));
                }
            }
        }
        assert_eq!(d.manifest.missing_features, vec!["x2", "x3"]);
    }
}
