//! k-means: the quadratic cost in both formula forms, Lloyd's algorithm
//! with deterministic multi-restart, an exhaustive small-instance oracle,
//! and the move-based local-optimality test.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::geometry::squared_distance;
use crate::partition::Partition;
use crate::rng::{derive_seed, rng_from_seed};

/// Points-to-partitions ratio above which [`kmeans_ideal`] refuses to run.
pub const IDEAL_ENUMERATION_CAP: usize = 14;

/// Configuration for Lloyd's algorithm with restarts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmeansConfig {
    /// Number of clusters; must satisfy 1 ≤ k ≤ n.
    pub k: usize,
    /// Number of independent random-set restarts (NSTART).
    pub nstart: usize,
    /// Iteration cap per restart.
    pub max_iters: usize,
    /// Absolute cost-improvement threshold that stops a restart.
    pub tolerance: f64,
    /// Root seed; restart r runs on the derived child seed (seed, r).
    pub seed: u64,
}

impl KmeansConfig {
    pub fn new(k: usize) -> Self {
        KmeansConfig {
            k,
            nstart: 100,
            max_iters: 100,
            tolerance: 1e-10,
            seed: 0,
        }
    }

    pub fn with_nstart(mut self, nstart: usize) -> Self {
        self.nstart = nstart;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::validation("k must be positive"));
        }
        if self.k > n {
            return Err(Error::validation(format!(
                "k = {} exceeds the number of points n = {n}",
                self.k
            )));
        }
        if self.nstart == 0 {
            return Err(Error::validation("nstart must be at least 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::validation("max_iters must be at least 1"));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::validation("tolerance must be nonnegative"));
        }
        Ok(())
    }
}

/// Output of a clustering run.
#[derive(Debug, Clone)]
pub struct ClusteringResult {
    pub partition: Partition,
    /// The k-means cost Q of the partition.
    pub cost: f64,
    pub restarts_run: usize,
    /// Index of the restart that produced the returned partition (ties in
    /// cost resolve to the lowest index, so this is deterministic).
    pub best_restart_index: usize,
}

fn check_partition(dataset: &Dataset, partition: &Partition) -> Result<()> {
    partition.ensure_matches(dataset)
}

/// k-means cost in the canonical centroid form:
/// Q = Σ_j Σ_{x ∈ C_j} ‖x − μ_j‖², with μ_j recomputed from the labels.
pub fn kmeans_cost(dataset: &Dataset, partition: &Partition) -> Result<f64> {
    check_partition(dataset, partition)?;
    let fresh = Partition::from_labels(dataset, partition.labels().to_vec(), partition.k())?;
    let mut q = 0.0;
    for (i, &l) in fresh.labels().iter().enumerate() {
        q += squared_distance(dataset.point(i), fresh.centroid(l));
    }
    Ok(q)
}

/// k-means cost in the pairwise form:
/// Q = Σ_j (1 / (2 n_j)) Σ_{i ∈ C_j} Σ_{l ∈ C_j} ‖x_i − x_l‖².
///
/// Mathematically identical to [`kmeans_cost`]; kept as an independent
/// implementation so the two can cross-check each other.
pub fn kmeans_cost_pairwise(dataset: &Dataset, partition: &Partition) -> Result<f64> {
    check_partition(dataset, partition)?;
    let mut q = 0.0;
    for j in 0..partition.k() {
        let members = partition.members(j);
        let mut sum = 0.0;
        for &a in &members {
            for &b in &members {
                sum += squared_distance(dataset.point(a), dataset.point(b));
            }
        }
        q += sum / (2.0 * members.len() as f64);
    }
    Ok(q)
}

struct RestartOutcome {
    labels: Vec<usize>,
    cost: f64,
}

/// One Lloyd descent from a random-set initial assignment.
fn lloyd_once(dataset: &Dataset, k: usize, seed: u64, max_iters: usize, tol: f64) -> RestartOutcome {
    let n = dataset.len();
    let dim = dataset.dim();
    let mut rng = rng_from_seed(seed);

    // Random-set initialization: uniform labels, redrawn until no cluster
    // is empty (guaranteed to terminate since k ≤ n).
    let mut labels = vec![0usize; n];
    let mut sizes = vec![0usize; k];
    loop {
        sizes.iter_mut().for_each(|s| *s = 0);
        for l in labels.iter_mut() {
            *l = rng.gen_range(0..k);
            sizes[*l] += 1;
        }
        if sizes.iter().all(|&s| s > 0) {
            break;
        }
    }

    let mut centroids = vec![0.0f64; k * dim];
    let mut point_d2 = vec![0.0f64; n];
    let recompute_centroids =
        |labels: &[usize], sizes: &[usize], centroids: &mut Vec<f64>| {
            centroids.iter_mut().for_each(|c| *c = 0.0);
            for (i, &l) in labels.iter().enumerate() {
                let x = dataset.point(i);
                let c = &mut centroids[l * dim..(l + 1) * dim];
                for (cd, xd) in c.iter_mut().zip(x) {
                    *cd += xd;
                }
            }
            for (j, &s) in sizes.iter().enumerate() {
                let inv = 1.0 / s as f64;
                for cd in centroids[j * dim..(j + 1) * dim].iter_mut() {
                    *cd *= inv;
                }
            }
        };
    let cost_of = |labels: &[usize], centroids: &[f64]| -> f64 {
        let mut q = 0.0;
        for (i, &l) in labels.iter().enumerate() {
            q += squared_distance(dataset.point(i), &centroids[l * dim..(l + 1) * dim]);
        }
        q
    };

    recompute_centroids(&labels, &sizes, &mut centroids);
    let mut prev_cost = cost_of(&labels, &centroids);
    let mut cost = prev_cost;

    for _ in 0..max_iters {
        // Assignment pass; ties go to the lowest cluster index because the
        // scan ascends and replaces only on strict improvement.
        let mut changed = false;
        for i in 0..n {
            let x = dataset.point(i);
            let mut best_j = 0usize;
            let mut best_d = f64::INFINITY;
            for j in 0..k {
                let d = squared_distance(x, &centroids[j * dim..(j + 1) * dim]);
                if d < best_d {
                    best_d = d;
                    best_j = j;
                }
            }
            point_d2[i] = best_d;
            if labels[i] != best_j {
                sizes[labels[i]] -= 1;
                sizes[best_j] += 1;
                labels[i] = best_j;
                changed = true;
            }
        }
        // Empty clusters are reseeded with the point currently farthest from
        // its own centroid, drawn only from clusters that keep ≥ 2 members.
        for j in 0..k {
            if sizes[j] > 0 {
                continue;
            }
            let mut pick = usize::MAX;
            let mut worst = f64::NEG_INFINITY;
            for i in 0..n {
                if sizes[labels[i]] >= 2 && point_d2[i] > worst {
                    worst = point_d2[i];
                    pick = i;
                }
            }
            debug_assert!(pick != usize::MAX, "n >= k guarantees a donor point");
            sizes[labels[pick]] -= 1;
            labels[pick] = j;
            sizes[j] = 1;
            point_d2[pick] = 0.0;
            changed = true;
        }
        recompute_centroids(&labels, &sizes, &mut centroids);
        cost = cost_of(&labels, &centroids);
        debug_assert!(
            cost <= prev_cost * (1.0 + 1e-9) + 1e-9,
            "Lloyd iteration increased Q: {prev_cost} -> {cost}"
        );
        if !changed || prev_cost - cost < tol {
            break;
        }
        prev_cost = cost;
    }
    RestartOutcome { labels, cost }
}

/// Lloyd's algorithm with `nstart` independent random-set restarts.
///
/// Restart `r` derives its seed from `(config.seed, r)`, restarts may run in
/// parallel, and the merge picks the lowest cost with ties resolved to the
/// lowest restart index — so results are bit-identical across serial and
/// parallel executions.
pub fn lloyd_kmeans(dataset: &Dataset, config: &KmeansConfig) -> Result<ClusteringResult> {
    config.validate(dataset.len())?;
    let best = (0..config.nstart)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(config.seed, r as u64);
            let outcome = lloyd_once(dataset, config.k, seed, config.max_iters, config.tolerance);
            (outcome.cost, r, outcome.labels)
        })
        .reduce_with(|a, b| {
            if (b.0, b.1) < (a.0, a.1) {
                b
            } else {
                a
            }
        })
        .expect("nstart >= 1");
    let (cost, best_restart_index, labels) = best;
    let partition = Partition::from_labels(dataset, labels, config.k)?;
    debug_assert!({
        let q = kmeans_cost(dataset, &partition).unwrap();
        (q - cost).abs() <= 1e-9 * q.max(1.0)
    });
    Ok(ClusteringResult {
        partition,
        cost,
        restarts_run: config.nstart,
        best_restart_index,
    })
}

/// Output of the exhaustive optimum search.
#[derive(Debug, Clone)]
pub struct IdealResult {
    pub partition: Partition,
    /// Exact global minimum of Q over all partitions into k non-empty parts.
    pub cost: f64,
    /// Whether exactly one partition attains the minimum (costs within
    /// 1e-12 relative count as the same partition cost).
    pub unique: bool,
    /// (second_best − best) / best; `None` when only one partition shape
    /// exists (k = 1 or k = n), +∞ when best = 0 < second.
    pub relative_margin: Option<f64>,
    /// Number of partitions enumerated.
    pub partitions_evaluated: u64,
}

/// Exact k-means optimum by enumerating every partition of the points into
/// k non-empty clusters (restricted-growth-string order).
///
/// Refuses datasets beyond [`IDEAL_ENUMERATION_CAP`] points: the count of
/// partitions grows super-exponentially and this operation is meant as a
/// desk-scale oracle.
pub fn kmeans_ideal(dataset: &Dataset, k: usize) -> Result<IdealResult> {
    let n = dataset.len();
    if k == 0 || k > n {
        return Err(Error::validation(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    if n > IDEAL_ENUMERATION_CAP {
        return Err(Error::refusal(format!(
            "kmeans_ideal enumerates all partitions and is capped at n = {IDEAL_ENUMERATION_CAP}; got n = {n}"
        )));
    }

    struct Search<'a> {
        dataset: &'a Dataset,
        k: usize,
        n: usize,
        assign: Vec<usize>,
        best_cost: f64,
        best_labels: Vec<usize>,
        ties: u64,
        second: f64,
        evaluated: u64,
    }

    impl Search<'_> {
        fn cost(&self) -> f64 {
            let dim = self.dataset.dim();
            let mut sums = vec![0.0f64; self.k * dim];
            let mut counts = vec![0usize; self.k];
            for (i, &c) in self.assign.iter().enumerate() {
                counts[c] += 1;
                for (s, x) in sums[c * dim..(c + 1) * dim].iter_mut().zip(self.dataset.point(i)) {
                    *s += x;
                }
            }
            for (j, &cnt) in counts.iter().enumerate() {
                let inv = 1.0 / cnt as f64;
                for s in sums[j * dim..(j + 1) * dim].iter_mut() {
                    *s *= inv;
                }
            }
            let mut q = 0.0;
            for (i, &c) in self.assign.iter().enumerate() {
                q += squared_distance(self.dataset.point(i), &sums[c * dim..(c + 1) * dim]);
            }
            q
        }

        fn leaf(&mut self) {
            let cost = self.cost();
            self.evaluated += 1;
            if !self.best_cost.is_finite() {
                self.best_cost = cost;
                self.best_labels.copy_from_slice(&self.assign);
                self.ties = 1;
                return;
            }
            let tie_window = 1e-12 * self.best_cost.max(cost).max(f64::MIN_POSITIVE);
            if cost < self.best_cost - tie_window {
                self.second = self.best_cost;
                self.best_cost = cost;
                self.best_labels.copy_from_slice(&self.assign);
                self.ties = 1;
            } else if (cost - self.best_cost).abs() <= tie_window {
                self.ties += 1;
            } else if cost < self.second {
                self.second = cost;
            }
        }

        fn recurse(&mut self, i: usize, parts_used: usize) {
            if i == self.n {
                if parts_used == self.k {
                    self.leaf();
                }
                return;
            }
            // Prune: remaining points must still be able to open the
            // missing clusters.
            let remaining = self.n - i;
            if parts_used + remaining < self.k {
                return;
            }
            let top = (parts_used + 1).min(self.k);
            for c in 0..top {
                self.assign[i] = c;
                let used = if c == parts_used { parts_used + 1 } else { parts_used };
                self.recurse(i + 1, used);
            }
        }
    }

    let mut search = Search {
        dataset,
        k,
        n,
        assign: vec![0usize; n],
        best_cost: f64::INFINITY,
        best_labels: vec![0usize; n],
        ties: 0,
        second: f64::INFINITY,
        evaluated: 0,
    };
    // Point 0 is pinned to cluster 0; every partition appears exactly once.
    search.recurse(1, 1);

    let partition = Partition::from_labels(dataset, search.best_labels.clone(), k)?;
    let relative_margin = if search.second.is_finite() {
        Some((search.second - search.best_cost) / search.best_cost)
    } else {
        None
    };
    Ok(IdealResult {
        partition,
        cost: search.best_cost,
        unique: search.ties == 1,
        relative_margin,
        partitions_evaluated: search.evaluated,
    })
}

/// First profitable single-point move if the partition is not a local
/// optimum: `Some((point, target_cluster))` means moving `point` into
/// `target_cluster` strictly lowers Q.
///
/// Moving x from cluster j0 (size n0 ≥ 2) to jl (size nl) pays off iff
/// (n0/(n0−1))‖x−μ_{j0}‖² > (nl/(nl+1))‖x−μ_{jl}‖². Points in singleton
/// clusters are skipped: removing them would dissolve the cluster and
/// change k, and the n0/(n0−1) factor is undefined.
pub fn local_optimum_violation(
    dataset: &Dataset,
    partition: &Partition,
) -> Result<Option<(usize, usize)>> {
    check_partition(dataset, partition)?;
    for i in 0..dataset.len() {
        let j0 = partition.label(i);
        let n0 = partition.size(j0);
        if n0 < 2 {
            continue;
        }
        let lhs = (n0 as f64 / (n0 as f64 - 1.0))
            * squared_distance(dataset.point(i), partition.centroid(j0));
        for jl in 0..partition.k() {
            if jl == j0 {
                continue;
            }
            let nl = partition.size(jl);
            let rhs = (nl as f64 / (nl as f64 + 1.0))
                * squared_distance(dataset.point(i), partition.centroid(jl));
            if lhs > rhs * (1.0 + 1e-9) + 1e-12 {
                return Ok(Some((i, jl)));
            }
        }
    }
    Ok(None)
}

/// Whether no single-point move strictly improves Q. See
/// [`local_optimum_violation`].
pub fn is_local_optimum(dataset: &Dataset, partition: &Partition) -> Result<bool> {
    Ok(local_optimum_violation(dataset, partition)?.is_none())
}
