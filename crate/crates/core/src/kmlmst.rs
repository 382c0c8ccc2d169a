//! k-means-l-MST: cluster with k-means, join the k centers by a minimum
//! spanning tree, and cut the heaviest edges to merge the k clusters into
//! l connected groups. Includes the shrink-factor bound that keeps such
//! groups separated under centric shrinking.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::geometry::{euclidean_distance, minimum_spanning_tree, MstEdge};
use crate::kmeans::{lloyd_kmeans, ClusteringResult, KmeansConfig};
use crate::partition::Partition;

/// Output of [`kmeans_l_mst`].
#[derive(Debug, Clone)]
pub struct KmlMstResult {
    /// Final partition into l clusters (MST components of k-means centers).
    pub partition: Partition,
    /// The underlying k-means run.
    pub kmeans: ClusteringResult,
    /// MST over the k centroids, edge endpoints being k-means cluster ids.
    pub center_mst: Vec<MstEdge>,
    /// The l−1 deleted edges, heaviest first.
    pub removed_edges: Vec<MstEdge>,
    /// Map k-means cluster id → final cluster id.
    pub component_of: Vec<usize>,
}

/// Run k-means with `k` clusters, then merge them into `l` groups by
/// deleting the `l−1` heaviest MST edges over the centers (ties broken by
/// ascending endpoint pair). Final cluster ids order the components by
/// their smallest k-means cluster id.
pub fn kmeans_l_mst(
    dataset: &Dataset,
    k: usize,
    l: usize,
    kcfg: &KmeansConfig,
) -> Result<KmlMstResult> {
    if l == 0 || l > k {
        return Err(Error::validation(format!("need 1 <= l <= k, got l={l}, k={k}")));
    }
    let cfg = KmeansConfig { k, ..kcfg.clone() };
    let kmeans = lloyd_kmeans(dataset, &cfg)?;
    let centers: Vec<Vec<f64>> = kmeans.partition.centroids().to_vec();
    let center_mst = minimum_spanning_tree(&centers)?;

    let mut by_weight = center_mst.clone();
    by_weight.sort_by(|x, y| {
        y.weight
            .partial_cmp(&x.weight)
            .expect("finite weights")
            .then((x.a, x.b).cmp(&(y.a, y.b)))
    });
    let removed_edges: Vec<MstEdge> = by_weight.into_iter().take(l - 1).collect();
    let is_removed = |e: &MstEdge| {
        removed_edges
            .iter()
            .any(|r| r.a == e.a && r.b == e.b)
    };

    // Union-find over the surviving edges.
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for e in &center_mst {
        if !is_removed(e) {
            let (ra, rb) = (find(&mut parent, e.a), find(&mut parent, e.b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    // Components ordered by smallest k-means cluster id.
    let mut component_of = vec![usize::MAX; k];
    let mut next = 0usize;
    for j in 0..k {
        let root = find(&mut parent, j);
        if component_of[root] == usize::MAX {
            component_of[root] = next;
            next += 1;
        }
        component_of[j] = component_of[root];
    }
    debug_assert_eq!(next, l, "cutting l-1 tree edges yields l components");

    let labels: Vec<usize> = kmeans
        .partition
        .labels()
        .iter()
        .map(|&j| component_of[j])
        .collect();
    let partition = Partition::from_labels(dataset, labels, l)?;
    Ok(KmlMstResult {
        partition,
        kmeans,
        center_mst,
        removed_edges,
        component_of,
    })
}

/// Shrink-factor bound m_d / (4·R_M + d_M) under which shrinking every
/// k-means cluster toward its center keeps the final (MST-merged) clusters
/// at least m_d apart: R_M is the largest k-means cluster radius and d_M
/// the largest distance between k-means centers in different final
/// clusters.
pub fn concave_lambda_bound(result: &KmlMstResult, m_d: f64) -> Result<f64> {
    if result.partition.k() < 2 {
        return Err(Error::validation(
            "the bound needs at least two final clusters",
        ));
    }
    if !(m_d >= 0.0) {
        return Err(Error::validation("m_d must be nonnegative"));
    }
    let r_m = result
        .kmeans
        .partition
        .radii()
        .iter()
        .cloned()
        .fold(0.0f64, f64::max);
    let centers = result.kmeans.partition.centroids();
    let mut d_m = 0.0f64;
    for a in 0..centers.len() {
        for b in (a + 1)..centers.len() {
            if result.component_of[a] != result.component_of[b] {
                d_m = d_m.max(euclidean_distance(&centers[a], &centers[b])?);
            }
        }
    }
    let denom = 4.0 * r_m + d_m;
    if denom == 0.0 {
        return Err(Error::validation(
            "degenerate geometry: zero radii and coincident centers",
        ));
    }
    Ok(m_d / denom)
}
