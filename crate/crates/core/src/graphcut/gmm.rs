//! Full-covariance RGB Gaussian mixtures fitted by k-means++ seeding and
//! Lloyd iterations.

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Ridge added to every covariance diagonal.
pub const COV_REGULARIZATION: f64 = 1e-5;
/// Upper bound on Lloyd rounds.
pub const KMEANS_ROUNDS: usize = 20;

const LN_2PI: f64 = 1.837_877_066_409_345_3;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: Vector3<f64>,
    pub cov: Matrix3<f64>,
    inv_cov: Matrix3<f64>,
    /// `ln wₖ − ½ ln det Σₖ − (3/2) ln 2π`.
    log_scale: f64,
}

impl GaussianComponent {
    fn new(weight: f64, mean: Vector3<f64>, cov: Matrix3<f64>) -> Option<Self> {
        let det = cov.determinant();
        if !(det > 0.0) {
            return None;
        }
        let inv_cov = cov.try_inverse()?;
        Some(Self {
            weight,
            mean,
            cov,
            inv_cov,
            log_scale: weight.ln() - 0.5 * det.ln() - 1.5 * LN_2PI,
        })
    }

    /// `ln(wₖ · N(z; μₖ, Σₖ))`.
    pub fn weighted_log_density(&self, z: &[f64; 3]) -> f64 {
        let d = Vector3::new(z[0], z[1], z[2]) - self.mean;
        self.log_scale - 0.5 * d.dot(&(self.inv_cov * d))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gmm {
    components: Vec<GaussianComponent>,
}

impl Gmm {
    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    /// `ln Σₖ wₖ N(z; μₖ, Σₖ)` via log-sum-exp.
    pub fn log_likelihood(&self, z: &[f64; 3]) -> f64 {
        let best = self
            .components
            .iter()
            .map(|c| c.weighted_log_density(z))
            .fold(f64::NEG_INFINITY, f64::max);
        if !best.is_finite() {
            return best;
        }
        let sum: f64 = self
            .components
            .iter()
            .map(|c| (c.weighted_log_density(z) - best).exp())
            .sum();
        best + sum.ln()
    }
}

#[inline]
fn sq_dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

/// k-means++ seeding. Stops early when every pixel coincides with a center.
fn seed_centers(pixels: &[[f64; 3]], k: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 3]> {
    let mut centers = vec![pixels[rng.random_range(0..pixels.len())]];
    let mut d2: Vec<f64> = pixels.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        if !(total > 0.0) {
            break;
        }
        let mut target = rng.random::<f64>() * total;
        let mut pick = pixels.len() - 1;
        for (i, &d) in d2.iter().enumerate() {
            if d > 0.0 && target < d {
                pick = i;
                break;
            }
            target -= d;
        }
        if d2[pick] == 0.0 {
            // Rounding walked past the end; take the last positive entry.
            pick = d2.iter().rposition(|&d| d > 0.0).expect("total > 0");
        }
        let c = pixels[pick];
        for (d, p) in d2.iter_mut().zip(pixels) {
            *d = d.min(sq_dist(p, &c));
        }
        centers.push(c);
    }
    centers
}

/// Hard k-means assignment of each pixel (ties to the lowest index).
fn kmeans(pixels: &[[f64; 3]], k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut centers = seed_centers(pixels, k, rng);
    let mut assign = vec![usize::MAX; pixels.len()];
    for _ in 0..KMEANS_ROUNDS {
        let mut changed = false;
        for (a, p) in assign.iter_mut().zip(pixels) {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (i, c) in centers.iter().enumerate() {
                let d = sq_dist(p, c);
                if d < best_d {
                    best_d = d;
                    best = i;
                }
            }
            if *a != best {
                *a = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![[0.0; 3]; centers.len()];
        let mut counts = vec![0usize; centers.len()];
        for (&a, p) in assign.iter().zip(pixels) {
            counts[a] += 1;
            for c in 0..3 {
                sums[a][c] += p[c];
            }
        }
        for ((center, sum), &n) in centers.iter_mut().zip(&sums).zip(&counts) {
            if n > 0 {
                *center = [sum[0] / n as f64, sum[1] / n as f64, sum[2] / n as f64];
            }
        }
    }
    assign
}

/// Fits a `k`-component mixture. Clusters left empty by k-means are dropped,
/// so the result may have fewer than `k` components.
pub fn fit_gmm(pixels: &[[f64; 3]], k: usize, seed: u64) -> Result<Gmm> {
    if k == 0 {
        return Err(Error::InvalidArgument("mixture needs at least one component".into()));
    }
    if pixels.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let assign = kmeans(pixels, k.min(pixels.len()), &mut rng);
    let n_clusters = assign.iter().copied().max().unwrap_or(0) + 1;
    let mut counts = vec![0usize; n_clusters];
    let mut means = vec![Vector3::zeros(); n_clusters];
    for (&a, p) in assign.iter().zip(pixels) {
        counts[a] += 1;
        means[a] += Vector3::new(p[0], p[1], p[2]);
    }
    for (m, &n) in means.iter_mut().zip(&counts) {
        if n > 0 {
            *m /= n as f64;
        }
    }
    let mut covs = vec![Matrix3::zeros(); n_clusters];
    for (&a, p) in assign.iter().zip(pixels) {
        let d = Vector3::new(p[0], p[1], p[2]) - means[a];
        covs[a] += d * d.transpose();
    }
    let total = pixels.len() as f64;
    let components = (0..n_clusters)
        .filter(|&i| counts[i] > 0)
        .filter_map(|i| {
            let cov = covs[i] / counts[i] as f64 + Matrix3::identity() * COV_REGULARIZATION;
            GaussianComponent::new(counts[i] as f64 / total, means[i], cov)
        })
        .collect::<Vec<_>>();
    if components.is_empty() {
        return Err(Error::SingularSystem);
    }
    Ok(Gmm { components })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_separated_clusters() {
        let mut px = Vec::new();
        for i in 0..50 {
            let e = (i % 5) as f64 * 0.001;
            px.push([0.1 + e, 0.1, 0.1]);
            px.push([0.9, 0.9 - e, 0.9]);
        }
        let g = fit_gmm(&px, 2, 7).unwrap();
        assert_eq!(g.components().len(), 2);
        let wsum: f64 = g.components().iter().map(|c| c.weight).sum();
        assert!((wsum - 1.0).abs() < 1e-12);
        assert!(g.log_likelihood(&[0.1, 0.1, 0.1]) > g.log_likelihood(&[0.5, 0.5, 0.5]));
    }

    #[test]
    fn constant_pixels_collapse_to_one_component() {
        let px = vec![[0.3, 0.4, 0.5]; 20];
        let g = fit_gmm(&px, 5, 1).unwrap();
        assert_eq!(g.components().len(), 1);
        let c = &g.components()[0];
        assert!((c.cov[(0, 0)] - COV_REGULARIZATION).abs() < 1e-15);
        assert!(g.log_likelihood(&[0.3, 0.4, 0.5]).is_finite());
    }

    #[test]
    fn single_component_matches_closed_form() {
        let px = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let g = fit_gmm(&px, 1, 0).unwrap();
        let c = &g.components()[0];
        let mean = Vector3::new(0.25, 0.25, 0.25);
        assert!((c.mean - mean).norm() < 1e-12);
        let z = [0.2, 0.1, 0.3];
        let d = Vector3::new(z[0], z[1], z[2]) - mean;
        let expected = -0.5 * d.dot(&(c.cov.try_inverse().unwrap() * d))
            - 0.5 * c.cov.determinant().ln()
            - 1.5 * (2.0 * std::f64::consts::PI).ln();
        assert!((g.log_likelihood(&z) - expected).abs() < 1e-9);
    }

    #[test]
    fn rejects_empty() {
        assert!(matches!(fit_gmm(&[], 5, 0), Err(Error::EmptyInput)));
        assert!(fit_gmm(&[[0.0; 3]], 0, 0).is_err());
    }
}
