//! Bisectional auto-k-means: recursive 2-means splitting with a relative
//! cost-decrease stopping rule, so the cluster count is discovered rather
//! than prescribed.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::geometry::squared_distance;
use crate::kmeans::{lloyd_kmeans, KmeansConfig};
use crate::partition::Partition;
use crate::rng::derive_seed;

/// Stopping controls for [`bisectional_auto_kmeans`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectConfig {
    /// Hard cap on the number of clusters produced.
    pub kmax: usize,
    /// A cluster is split only if the 2-means split cost is below this
    /// fraction of the cluster's own cost. Must lie in (0, 1).
    pub rel_decrease_threshold: f64,
}

impl BisectConfig {
    pub fn new(kmax: usize) -> Self {
        BisectConfig {
            kmax,
            rel_decrease_threshold: 1.0 / 9.0,
        }
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.rel_decrease_threshold = threshold;
        self
    }
}

/// One node of the binary split tree. Children are arena indices into
/// [`BisectResult::tree`].
#[derive(Debug, Clone)]
pub struct SplitNode {
    /// Point ids covered by this node, ascending.
    pub members: Vec<usize>,
    /// One-cluster k-means cost of the member set.
    pub cost: f64,
    pub children: Option<(usize, usize)>,
}

/// Output of [`bisectional_auto_kmeans`].
#[derive(Debug, Clone)]
pub struct BisectResult {
    /// Flat partition over the leaves of the split tree.
    pub partition: Partition,
    /// Split tree arena; node 0 is the root covering every point.
    pub tree: Vec<SplitNode>,
    /// Arena ids of the leaves, ordered like the partition's cluster ids
    /// (ascending smallest member id).
    pub leaves: Vec<usize>,
    /// Number of 2-means split attempts made (accepted or rejected).
    pub splits_attempted: usize,
}

fn one_cluster_cost(dataset: &Dataset, members: &[usize]) -> f64 {
    let dim = dataset.dim();
    let mut mean = vec![0.0f64; dim];
    for &i in members {
        for (m, x) in mean.iter_mut().zip(dataset.point(i)) {
            *m += x;
        }
    }
    let inv = 1.0 / members.len() as f64;
    mean.iter_mut().for_each(|m| *m *= inv);
    members
        .iter()
        .map(|&i| squared_distance(dataset.point(i), &mean))
        .sum()
}

/// Recursive 2-means bisection.
///
/// The cluster with the largest cost contribution is attempted next; a
/// split is kept only when its 2-means cost falls below
/// `rel_decrease_threshold` times the cluster's own cost. A cluster whose
/// split is rejected is never retried. The process stops when no cluster
/// qualifies or when `kmax` leaves exist. Split attempt `s` runs 2-means
/// with the seed derived from `(kcfg.seed, s)`, so the whole procedure is
/// deterministic.
///
/// `kcfg.k` must be 2; every other `kcfg` field applies to each split.
pub fn bisectional_auto_kmeans(
    dataset: &Dataset,
    bcfg: &BisectConfig,
    kcfg: &KmeansConfig,
) -> Result<BisectResult> {
    if bcfg.kmax == 0 {
        return Err(Error::validation("kmax must be at least 1"));
    }
    if !(bcfg.rel_decrease_threshold > 0.0 && bcfg.rel_decrease_threshold < 1.0) {
        return Err(Error::validation(format!(
            "rel_decrease_threshold must lie in (0, 1), got {}",
            bcfg.rel_decrease_threshold
        )));
    }
    if kcfg.k != 2 {
        return Err(Error::validation(format!(
            "bisection drives 2-means; kcfg.k must be 2, got {}",
            kcfg.k
        )));
    }

    let all: Vec<usize> = (0..dataset.len()).collect();
    let root_cost = one_cluster_cost(dataset, &all);
    let mut tree = vec![SplitNode {
        members: all,
        cost: root_cost,
        children: None,
    }];
    let mut live: Vec<usize> = vec![0]; // splittable leaves
    let mut frozen: Vec<usize> = Vec::new(); // leaves that failed or can't split
    let mut splits_attempted = 0usize;

    while live.len() + frozen.len() < bcfg.kmax {
        // Largest-cost live leaf next; ties resolve to the oldest node.
        let Some(pos) = (0..live.len()).reduce(|best, cand| {
            let (b, c) = (&tree[live[best]], &tree[live[cand]]);
            if c.cost > b.cost {
                cand
            } else {
                best
            }
        }) else {
            break;
        };
        let node_id = live.swap_remove(pos);
        let node_cost = tree[node_id].cost;
        if tree[node_id].members.len() < 2 || node_cost <= 0.0 {
            frozen.push(node_id);
            continue;
        }

        let members = tree[node_id].members.clone();
        let sub = Dataset::from_rows(members.iter().map(|&i| dataset.point(i).to_vec()).collect())?;
        let split_cfg = KmeansConfig {
            seed: derive_seed(kcfg.seed, splits_attempted as u64),
            ..kcfg.clone()
        };
        splits_attempted += 1;
        let split = lloyd_kmeans(&sub, &split_cfg)?;

        if split.cost / node_cost < bcfg.rel_decrease_threshold {
            let mut halves: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
            for (local, &global) in members.iter().enumerate() {
                halves[split.partition.label(local)].push(global);
            }
            let mut child_ids = [0usize; 2];
            for (slot, half) in halves.into_iter().enumerate() {
                let cost = one_cluster_cost(dataset, &half);
                tree.push(SplitNode {
                    members: half,
                    cost,
                    children: None,
                });
                child_ids[slot] = tree.len() - 1;
            }
            tree[node_id].children = Some((child_ids[0], child_ids[1]));
            live.push(child_ids[0]);
            live.push(child_ids[1]);
        } else {
            frozen.push(node_id);
        }
    }

    let mut leaves: Vec<usize> = live.into_iter().chain(frozen).collect();
    leaves.sort_by_key(|&id| tree[id].members[0]);
    let mut labels = vec![0usize; dataset.len()];
    for (cluster, &leaf) in leaves.iter().enumerate() {
        for &i in &tree[leaf].members {
            labels[i] = cluster;
        }
    }
    let partition = Partition::from_labels(dataset, labels, leaves.len())?;
    Ok(BisectResult {
        partition,
        tree,
        leaves,
        splits_attempted,
    })
}
