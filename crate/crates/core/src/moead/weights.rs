use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::MoeadError;

const SUM_TOLERANCE: f64 = 1e-9;

/// A point on the unit simplex: non-negative components summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(lambda: Vec<f64>) -> Result<Self, MoeadError> {
        if lambda.is_empty() {
            return Err(MoeadError::Config("empty weight vector".into()));
        }
        if lambda.iter().any(|&l| !l.is_finite() || l < 0.0) {
            return Err(MoeadError::Config(format!("negative or non-finite weight in {lambda:?}")));
        }
        let sum: f64 = lambda.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(MoeadError::Config(format!("weights sum to {sum}")));
        }
        Ok(Self(lambda))
    }

    pub fn unit(n: usize, axis: usize) -> Self {
        let mut v = vec![0.0; n];
        v[axis] = 1.0;
        Self(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Axis index if this is a unit vector.
    pub fn unit_axis(&self) -> Option<usize> {
        let mut axis = None;
        for (k, &l) in self.0.iter().enumerate() {
            if l == 1.0 {
                axis = Some(k);
            } else if l != 0.0 {
                return None;
            }
        }
        axis
    }

    pub fn distance(&self, other: &WeightVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

fn lattice(n_objectives: usize, h: usize) -> Vec<Vec<f64>> {
    fn rec(remaining: usize, left: usize, h: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if left == 1 {
            prefix.push(remaining);
            out.push(prefix.iter().map(|&k| k as f64 / h as f64).collect());
            prefix.pop();
            return;
        }
        for k in 0..=remaining {
            prefix.push(k);
            rec(remaining - k, left - 1, h, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(h, n_objectives, h, &mut Vec::new(), &mut out);
    out
}

/// `count` distinct weight vectors covering the simplex, including every
/// unit vector.
///
/// Two and three objectives use a simplex lattice (`H = count − 1` for two;
/// the largest `H` whose lattice fits for three). Remaining slots, and all
/// non-unit vectors for more than three objectives, are filled with
/// uniformly random simplex points drawn from `seed`.
pub fn generate_weights(n_objectives: usize, count: usize, seed: u64) -> Result<Vec<WeightVector>, MoeadError> {
    if n_objectives < 2 {
        return Err(MoeadError::Config(format!("need at least 2 objectives, got {n_objectives}")));
    }
    if count < n_objectives {
        return Err(MoeadError::Config(format!(
            "{count} weight vectors cannot cover {n_objectives} objectives"
        )));
    }
    let mut points: Vec<Vec<f64>> = match n_objectives {
        2 => lattice(2, count - 1),
        3 => {
            let mut h = 1;
            while binomial(h + 3, 2) <= count {
                h += 1;
            }
            lattice(3, h)
        }
        n => (0..n).map(|axis| WeightVector::unit(n, axis).0).collect(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while points.len() < count {
        let raw: Vec<f64> = (0..n_objectives).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            continue;
        }
        let p: Vec<f64> = raw.iter().map(|v| v / total).collect();
        if !points.contains(&p) {
            points.push(p);
        }
    }
    points.into_iter().map(WeightVector::new).collect()
}

/// For each weight vector, the indices of the `size` nearest weight vectors
/// (itself first), by ascending Euclidean distance with ties broken by index.
pub fn neighborhoods(weights: &[WeightVector], size: usize) -> Vec<Vec<usize>> {
    weights
        .iter()
        .map(|w| {
            let mut order: Vec<(f64, usize)> = weights.iter().enumerate().map(|(j, o)| (w.distance(o), j)).collect();
            order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            order.into_iter().take(size).map(|(_, j)| j).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn three_bi_objective_weights() {
        let w = generate_weights(2, 3, 9).unwrap();
        let got = sorted(w.into_iter().map(|w| w.0).collect());
        assert_eq!(got, vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.0]]);
    }

    #[test]
    fn six_tri_objective_weights_include_units() {
        let w = generate_weights(3, 6, 1).unwrap();
        assert_eq!(w.len(), 6);
        for axis in 0..3 {
            assert!(w.iter().any(|v| v.unit_axis() == Some(axis)));
        }
        for v in &w {
            assert!((v.as_slice().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn five_hundred_bi_objective_weights_are_evenly_spaced() {
        let w = generate_weights(2, 500, 42).unwrap();
        assert_eq!(w.len(), 500);
        let mut first: Vec<f64> = w.iter().map(|v| v.as_slice()[0]).collect();
        first.sort_by(f64::total_cmp);
        assert_eq!(first[0], 0.0);
        assert_eq!(first[499], 1.0);
        let max_gap = first.windows(2).map(|p| p[1] - p[0]).fold(0.0, f64::max);
        assert!(max_gap <= 2.0 / 499.0 + 1e-12);
    }

    #[test]
    fn tri_objective_fill_and_many_objectives() {
        for (n, count) in [(3, 100), (3, 7), (4, 20), (5, 5)] {
            let w = generate_weights(n, count, 3).unwrap();
            assert_eq!(w.len(), count);
            for axis in 0..n {
                assert!(w.iter().any(|v| v.unit_axis() == Some(axis)), "n={n} count={count}");
            }
            for (i, a) in w.iter().enumerate() {
                for b in &w[i + 1..] {
                    assert_ne!(a, b);
                }
            }
        }
        assert_eq!(generate_weights(3, 50, 1).unwrap(), generate_weights(3, 50, 1).unwrap());
    }

    #[test]
    fn rejects_too_few_vectors() {
        assert!(matches!(generate_weights(3, 2, 0), Err(MoeadError::Config(_))));
        assert!(matches!(generate_weights(1, 10, 0), Err(MoeadError::Config(_))));
    }

    #[test]
    fn weight_vector_invariants() {
        assert!(WeightVector::new(vec![0.3, 0.7]).is_ok());
        assert!(WeightVector::new(vec![-0.1, 1.1]).is_err());
        assert!(WeightVector::new(vec![0.3, 0.6]).is_err());
    }

    #[test]
    fn neighborhoods_start_with_self_and_are_sorted() {
        let w = generate_weights(2, 21, 0).unwrap();
        let nb = neighborhoods(&w, 5);
        for (i, b) in nb.iter().enumerate() {
            assert_eq!(b.len(), 5);
            assert_eq!(b[0], i);
            for pair in b.windows(2) {
                assert!(w[i].distance(&w[pair[0]]) <= w[i].distance(&w[pair[1]]));
            }
        }
    }
}
