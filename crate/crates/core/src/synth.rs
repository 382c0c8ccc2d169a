//! Seeded generators for benchmark-style datasets: Gaussian blobs,
//! uniform balls, and a two-moons pair for concave-cluster pipelines.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::geometry::euclidean_distance;
use crate::partition::Partition;
use crate::rng::{rng_from_seed, unit_vector};

/// A generated dataset together with its ground-truth labels.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub dataset: Dataset,
    pub labels: Vec<usize>,
    pub k: usize,
}

impl LabeledDataset {
    pub fn partition(&self) -> Result<Partition> {
        Partition::from_labels(&self.dataset, self.labels.clone(), self.k)
    }
}

/// Draw `k` centers uniformly in `[0, box_side]^dim`, rejecting any closer
/// than `min_separation` to an already placed center. Deterministic given
/// the seed; errors out if the box cannot host that many centers.
pub fn separated_centers(
    k: usize,
    dim: usize,
    box_side: f64,
    min_separation: f64,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if k == 0 || dim == 0 {
        return Err(Error::validation("need k >= 1 centers and dim >= 1"));
    }
    let mut rng = rng_from_seed(seed);
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut attempts = 0usize;
    while centers.len() < k {
        attempts += 1;
        if attempts > 10_000 * k {
            return Err(Error::validation(format!(
                "could not place {k} centers with separation {min_separation} in a {box_side}-sided box"
            )));
        }
        let candidate: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..box_side)).collect();
        let mut ok = true;
        for placed in &centers {
            if euclidean_distance(placed, &candidate)? < min_separation {
                ok = false;
                break;
            }
        }
        if ok {
            centers.push(candidate);
        }
    }
    Ok(centers)
}

fn assemble(
    centers: &[Vec<f64>],
    per_cluster: usize,
    mut point_of: impl FnMut(&[f64]) -> Vec<f64>,
) -> Result<LabeledDataset> {
    if centers.is_empty() || per_cluster == 0 {
        return Err(Error::validation("need at least one center and one point per cluster"));
    }
    let dim = centers[0].len();
    if centers.iter().any(|c| c.len() != dim) {
        return Err(Error::validation("centers must share one dimension"));
    }
    let mut rows = Vec::with_capacity(centers.len() * per_cluster);
    let mut labels = Vec::with_capacity(centers.len() * per_cluster);
    for (j, center) in centers.iter().enumerate() {
        for _ in 0..per_cluster {
            rows.push(point_of(center));
            labels.push(j);
        }
    }
    Ok(LabeledDataset {
        dataset: Dataset::from_rows(rows)?,
        labels,
        k: centers.len(),
    })
}

/// Isotropic Gaussian clusters of `per_cluster` points around each center.
pub fn gaussian_blobs(
    centers: &[Vec<f64>],
    per_cluster: usize,
    sigma: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::validation(format!("sigma must be positive, got {sigma}")));
    }
    let normal = Normal::new(0.0, sigma).expect("sigma checked finite positive");
    let mut rng = rng_from_seed(seed);
    assemble(centers, per_cluster, |center| {
        center.iter().map(|&c| c + normal.sample(&mut rng)).collect()
    })
}

/// Clusters drawn uniformly from the solid ball of the given radius around
/// each center (a uniform disk in 2D).
pub fn ball_clusters(
    centers: &[Vec<f64>],
    per_cluster: usize,
    radius: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::validation(format!("radius must be positive, got {radius}")));
    }
    let mut rng = rng_from_seed(seed);
    assemble(centers, per_cluster, |center| {
        let dim = center.len();
        let dir = unit_vector(dim, &mut rng);
        let r = radius * rng.gen::<f64>().powf(1.0 / dim as f64);
        center.iter().zip(&dir).map(|(&c, &u)| c + r * u).collect()
    })
}

/// Two interleaved crescents of `per_moon` points each: the upper half of
/// a circle of the given radius, and its mirror shifted right and down, as
/// in the usual two-moons benchmark. `noise` is the radial jitter as a
/// fraction of the radius.
pub fn two_moons(per_moon: usize, radius: f64, noise: f64, seed: u64) -> Result<LabeledDataset> {
    if per_moon < 2 {
        return Err(Error::validation("need at least 2 points per moon"));
    }
    if !(radius > 0.0) || !(0.0..1.0).contains(&noise) {
        return Err(Error::validation(
            "radius must be positive and noise must lie in [0, 1)",
        ));
    }
    let mut rng = rng_from_seed(seed);
    let mut rows = Vec::with_capacity(2 * per_moon);
    let mut labels = Vec::with_capacity(2 * per_moon);
    for moon in 0..2usize {
        for i in 0..per_moon {
            let t = std::f64::consts::PI * i as f64 / (per_moon - 1) as f64;
            let r = radius * (1.0 + noise * (2.0 * rng.gen::<f64>() - 1.0));
            let (x, y) = if moon == 0 {
                (r * t.cos(), r * t.sin())
            } else {
                (radius - r * t.cos(), radius * 0.5 - r * t.sin())
            };
            rows.push(vec![x, y]);
            labels.push(moon);
        }
    }
    Ok(LabeledDataset {
        dataset: Dataset::from_rows(rows)?,
        labels,
        k: 2,
    })
}
