//! Reference directions on the unit simplex.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefPointMethod {
    /// Riesz s-energy minimization, any number of points.
    Riesz,
    /// Das–Dennis lattice with the most partitions not exceeding the count.
    DasDennis,
}

/// All points of the simplex lattice with `partitions` divisions per axis.
pub fn das_dennis(dim: usize, partitions: usize) -> Vec<Vec<f64>> {
    fn rec(dim: usize, left: usize, h: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if prefix.len() == dim - 1 {
            prefix.push(left);
            out.push(prefix.iter().map(|&k| k as f64 / h as f64).collect());
            prefix.pop();
            return;
        }
        for k in (0..=left).rev() {
            prefix.push(k);
            rec(dim, left - k, h, prefix, out);
            prefix.pop();
        }
    }
    if partitions == 0 {
        return vec![vec![1.0 / dim as f64; dim]];
    }
    let mut out = Vec::new();
    rec(dim, partitions, partitions, &mut Vec::with_capacity(dim), &mut out);
    out
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Das–Dennis lattice with the largest partition count giving at most `n`
/// points (at least one partition).
pub fn das_dennis_for(dim: usize, n: usize) -> Vec<Vec<f64>> {
    let mut h = 1;
    while binomial(h + 1 + dim - 1, dim - 1) <= n {
        h += 1;
    }
    das_dennis(dim, h)
}

fn energy(x: &[Vec<f64>], s: f64) -> f64 {
    let mut e = 0.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let d2: f64 = x[i].iter().zip(&x[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            e += d2.max(1e-24).powf(-s / 2.0);
        }
    }
    e
}

fn project_simplex(p: &mut [f64]) {
    for v in p.iter_mut() {
        *v = v.max(0.0);
    }
    let sum: f64 = p.iter().sum();
    if sum <= 0.0 {
        let k = p.len() as f64;
        p.iter_mut().for_each(|v| *v = 1.0 / k);
    } else {
        p.iter_mut().for_each(|v| *v /= sum);
    }
}

/// `n` well-spread points on the `dim`-simplex obtained by gradient descent
/// on the Riesz s-energy with `s = 2 dim`. The simplex corners are kept fixed.
pub fn riesz_points(dim: usize, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let s = 2.0 * dim as f64;
    let corners = dim.min(n);
    let mut x: Vec<Vec<f64>> = (0..corners)
        .map(|k| (0..dim).map(|i| if i == k { 1.0 } else { 0.0 }).collect())
        .collect();
    while x.len() < n {
        let mut p: Vec<f64> = (0..dim).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        project_simplex(&mut p);
        x.push(p);
    }
    if n <= dim {
        return x;
    }

    let mut e = energy(&x, s);
    let mut step = 0.05;
    for _ in 0..500 {
        let mut grad = vec![vec![0.0; dim]; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let diff: Vec<f64> = x[i].iter().zip(&x[j]).map(|(a, b)| a - b).collect();
                let d2: f64 = diff.iter().map(|d| d * d).sum::<f64>().max(1e-24);
                let w = s * d2.powf(-(s + 2.0) / 2.0);
                for k in 0..dim {
                    grad[i][k] += w * diff[k];
                }
            }
            let mean = grad[i].iter().sum::<f64>() / dim as f64;
            grad[i].iter_mut().for_each(|g| *g -= mean);
        }
        let norm = grad[corners..]
            .iter()
            .map(|g| g.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        if norm <= 0.0 {
            break;
        }
        let mut next = x.clone();
        for i in corners..n {
            for k in 0..dim {
                next[i][k] += step * grad[i][k] / norm;
            }
            project_simplex(&mut next[i]);
        }
        let e_next = energy(&next, s);
        if e_next < e {
            x = next;
            e = e_next;
            step *= 1.1;
        } else {
            step *= 0.5;
            if step < 1e-6 {
                break;
            }
        }
    }
    x
}

pub(crate) fn reference_points(method: RefPointMethod, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    match method {
        RefPointMethod::Riesz => riesz_points(3, n, rng),
        RefPointMethod::DasDennis => das_dennis_for(3, n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn on_simplex(p: &[f64]) -> bool {
        p.iter().all(|&v| v >= -1e-12) && (p.iter().sum::<f64>() - 1.0).abs() < 1e-9
    }

    #[test]
    fn das_dennis_counts() {
        assert_eq!(das_dennis(3, 12).len(), 91);
        assert_eq!(das_dennis(3, 1).len(), 3);
        assert_eq!(das_dennis_for(3, 100).len(), 91);
        assert!(das_dennis(3, 4).iter().all(|p| on_simplex(p)));
    }

    #[test]
    fn riesz_points_are_spread_on_the_simplex() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pts = riesz_points(3, 100, &mut rng);
        assert_eq!(pts.len(), 100);
        assert!(pts.iter().all(|p| on_simplex(p)));
        let min_dist = |x: &[Vec<f64>]| {
            let mut m = f64::INFINITY;
            for i in 0..x.len() {
                for j in i + 1..x.len() {
                    let d: f64 = x[i].iter().zip(&x[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    m = m.min(d);
                }
            }
            m
        };
        // spacing of a 100-point lattice is about 0.11; a random sample of
        // that size typically has pairs far closer
        assert!(min_dist(&pts) > 0.05, "{}", min_dist(&pts));
        let again = riesz_points(3, 100, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(pts, again);
    }
}
