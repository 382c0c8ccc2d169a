//! Partitions of a dataset into non-empty clusters, plus the
//! partition-comparison utilities used by the experiment pipelines.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::geometry::squared_distance;

/// Whether a pair of points shares a cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairClass {
    IntraCluster,
    InterCluster,
}

/// A partition of a dataset into `k` non-empty clusters.
///
/// Stores, per cluster: size, centroid (gravity center), and enclosing
/// radius — the maximum distance from a member to the centroid. A partition
/// is tied to the coordinates it was built from; after transforming a
/// dataset, rebuild with [`Partition::from_labels`] to refresh the derived
/// quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    k: usize,
    labels: Vec<usize>,
    sizes: Vec<usize>,
    centroids: Vec<Vec<f64>>,
    radii: Vec<f64>,
}

impl Partition {
    /// Cheap shape check that this partition can describe `dataset`.
    pub(crate) fn ensure_matches(&self, dataset: &Dataset) -> Result<()> {
        if self.len() != dataset.len() {
            return Err(Error::validation(format!(
                "partition covers {} points, dataset has {}",
                self.len(),
                dataset.len()
            )));
        }
        if self.centroid(0).len() != dataset.dim() {
            return Err(Error::validation(format!(
                "partition dim {} vs dataset dim {}",
                self.centroid(0).len(),
                dataset.dim()
            )));
        }
        Ok(())
    }

    /// Validates labels against the dataset and computes per-cluster
    /// centroids, sizes, and enclosing radii.
    ///
    /// Every cluster index in `0..k` must be non-empty.
    pub fn from_labels(dataset: &Dataset, labels: Vec<usize>, k: usize) -> Result<Self> {
        if labels.len() != dataset.len() {
            return Err(Error::validation(format!(
                "{} labels for {} points",
                labels.len(),
                dataset.len()
            )));
        }
        if k == 0 {
            return Err(Error::validation("k must be positive"));
        }
        let dim = dataset.dim();
        let mut sizes = vec![0usize; k];
        let mut centroids = vec![vec![0.0; dim]; k];
        for (i, &l) in labels.iter().enumerate() {
            if l >= k {
                return Err(Error::validation(format!(
                    "point {i} has label {l}, expected < {k}"
                )));
            }
            sizes[l] += 1;
            for (c, x) in centroids[l].iter_mut().zip(dataset.point(i)) {
                *c += x;
            }
        }
        if let Some(j) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::validation(format!("cluster {j} is empty")));
        }
        for (c, &s) in centroids.iter_mut().zip(&sizes) {
            let inv = 1.0 / s as f64;
            for x in c.iter_mut() {
                *x *= inv;
            }
        }
        let mut radii = vec![0.0f64; k];
        for (i, &l) in labels.iter().enumerate() {
            let d2 = squared_distance(dataset.point(i), &centroids[l]);
            if d2 > radii[l] {
                radii[l] = d2;
            }
        }
        for r in radii.iter_mut() {
            *r = r.sqrt();
        }
        Ok(Partition {
            k,
            labels,
            sizes,
            centroids,
            radii,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, point: usize) -> usize {
        self.labels[point]
    }

    pub fn size(&self, cluster: usize) -> usize {
        self.sizes[cluster]
    }

    pub fn centroid(&self, cluster: usize) -> &[f64] {
        &self.centroids[cluster]
    }

    pub fn centroids(&self) -> &[Vec<f64>] {
        &self.centroids
    }

    /// Enclosing radius of a cluster: the max distance from a member to the
    /// cluster's gravity center (not the minimum enclosing ball).
    pub fn radius(&self, cluster: usize) -> f64 {
        self.radii[cluster]
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Member ids of a cluster, ascending.
    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == cluster)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn pair_class(&self, i: usize, j: usize) -> PairClass {
        if self.labels[i] == self.labels[j] {
            PairClass::IntraCluster
        } else {
            PairClass::InterCluster
        }
    }
}

/// Enclosing radius of one cluster; thin wrapper with id validation.
pub fn enclosing_radius(partition: &Partition, cluster_id: usize) -> Result<f64> {
    if cluster_id >= partition.k() {
        return Err(Error::validation(format!(
            "cluster id {cluster_id} out of range (k = {})",
            partition.k()
        )));
    }
    Ok(partition.radius(cluster_id))
}

/// Number of membership disagreements between two partitions of the same
/// points, after aligning their cluster labels optimally.
///
/// Builds the k_a × k_b confusion matrix and finds the one-to-one cluster
/// matching that maximizes total agreement (optimal assignment); the result
/// is `n` minus the matched agreement. Symmetric in its arguments, zero iff
/// the partitions are equal up to a label permutation.
pub fn disagreement_count(a: &Partition, b: &Partition) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::validation(format!(
            "partitions cover {} vs {} points",
            a.len(),
            b.len()
        )));
    }
    let (ka, kb) = (a.k(), b.k());
    let mut confusion = vec![vec![0u64; kb]; ka];
    for (&la, &lb) in a.labels().iter().zip(b.labels()) {
        confusion[la][lb] += 1;
    }
    let agreement = optimal_assignment_agreement(&confusion);
    Ok(a.len() - agreement as usize)
}

/// Maximum total value of a one-to-one row↔column matching, via the
/// Hungarian algorithm with potentials (O(max(k_a,k_b)³)) on the padded
/// square min-cost formulation.
fn optimal_assignment_agreement(value: &[Vec<u64>]) -> u64 {
    let rows = value.len();
    let cols = value.first().map_or(0, |r| r.len());
    let n = rows.max(cols);
    if n == 0 {
        return 0;
    }
    let max_entry = value.iter().flatten().copied().max().unwrap_or(0) as i64;
    // Minimize cost = max_entry − value; padding cells carry zero agreement.
    let cost = |i: usize, j: usize| -> i64 {
        if i < rows && j < cols {
            max_entry - value[i][j] as i64
        } else {
            max_entry
        }
    };
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1]; // p[j]: row (1-based) matched to column j
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![i64::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut agreement = 0u64;
    for j in 1..=n {
        let i = p[j];
        if i >= 1 && i - 1 < rows && j - 1 < cols {
            agreement += value[i - 1][j - 1];
        }
    }
    agreement
}

/// The cluster lying "most centrally": the one whose centroid minimizes the
/// sum of squared distances to all other centroids. Ties break to the lowest
/// cluster index.
pub fn select_central_cluster(partition: &Partition) -> Result<usize> {
    let k = partition.k();
    if k < 2 {
        return Err(Error::validation("select_central_cluster needs k >= 2"));
    }
    let mut best = 0usize;
    let mut best_sum = f64::INFINITY;
    for j in 0..k {
        let mut sum = 0.0;
        for l in 0..k {
            if l != j {
                sum += squared_distance(partition.centroid(j), partition.centroid(l));
            }
        }
        if sum < best_sum {
            best_sum = sum;
            best = j;
        }
    }
    Ok(best)
}
