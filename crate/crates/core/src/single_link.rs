//! Single-link clustering realized as an MST cut, the link-ball separation
//! test, and the semi-centric transform that contracts tree nodes without
//! disturbing the single-link structure.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::geometry::{euclidean_distance, minimum_spanning_tree, MstEdge};
use crate::partition::Partition;
use crate::rng::{rng_from_seed, unit_vector};
use crate::transforms::{Provenance, TransformResult};

/// Spanning tree of one cluster: the MST edges surviving inside it, plus
/// each member's longest incident edge length.
#[derive(Debug, Clone)]
pub struct LinkTree {
    pub cluster_id: usize,
    /// Point ids, ascending.
    pub members: Vec<usize>,
    /// Edges between members (global point ids, a < b).
    pub edges: Vec<MstEdge>,
    /// Longest edge incident to each member, parallel to `members`
    /// (0 for a singleton).
    pub longest_incident: Vec<f64>,
}

impl LinkTree {
    /// Builds a tree over `members` from `edges`, validating that the edges
    /// form a spanning tree of exactly that member set.
    pub fn new(cluster_id: usize, members: Vec<usize>, edges: Vec<MstEdge>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::validation("a cluster tree needs at least one member"));
        }
        if !members.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::validation("tree members must be strictly ascending"));
        }
        if edges.len() + 1 != members.len() {
            return Err(Error::validation(format!(
                "{} edges cannot span {} members",
                edges.len(),
                members.len()
            )));
        }
        let index_of = |p: usize| members.binary_search(&p);
        let mut longest_incident = vec![0.0f64; members.len()];
        let mut parent: Vec<usize> = (0..members.len()).collect();
        fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &edges {
            let (Ok(ia), Ok(ib)) = (index_of(e.a), index_of(e.b)) else {
                return Err(Error::validation(format!(
                    "edge ({}, {}) leaves the member set",
                    e.a, e.b
                )));
            };
            let (ra, rb) = (find(&mut parent, ia), find(&mut parent, ib));
            if ra == rb {
                return Err(Error::validation(format!(
                    "edges form a cycle at ({}, {})",
                    e.a, e.b
                )));
            }
            parent[ra] = rb;
            longest_incident[ia] = longest_incident[ia].max(e.weight);
            longest_incident[ib] = longest_incident[ib].max(e.weight);
        }
        Ok(LinkTree {
            cluster_id,
            members,
            edges,
            longest_incident,
        })
    }

    pub fn longest_incident_edge(&self, point: usize) -> Option<f64> {
        self.members
            .binary_search(&point)
            .ok()
            .map(|i| self.longest_incident[i])
    }

    /// Tree neighbors of a member.
    pub fn neighbors(&self, point: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|e| {
                if e.a == point {
                    Some(e.b)
                } else if e.b == point {
                    Some(e.a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }
}

/// The cluster's area: one ball per member, centered at the member with
/// radius equal to its longest incident tree edge.
#[derive(Debug, Clone)]
pub struct ClusterArea {
    /// (point id, center coordinates, radius), ascending by point id.
    pub balls: Vec<(usize, Vec<f64>, f64)>,
}

impl ClusterArea {
    pub fn from_tree(dataset: &Dataset, tree: &LinkTree) -> Result<Self> {
        let mut balls = Vec::with_capacity(tree.members.len());
        for (i, &p) in tree.members.iter().enumerate() {
            if p >= dataset.len() {
                return Err(Error::validation(format!("tree member {p} outside dataset")));
            }
            balls.push((p, dataset.point(p).to_vec(), tree.longest_incident[i]));
        }
        Ok(ClusterArea { balls })
    }

    /// Exact distance from a point to the union of balls:
    /// min over balls of max(‖p − center‖ − radius, 0).
    pub fn distance_to(&self, point: &[f64]) -> f64 {
        self.balls
            .iter()
            .map(|(_, c, r)| (euclidean_distance(point, c).expect("dim checked") - r).max(0.0))
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether a point lies in the union, with `slack` forgiveness.
    pub fn contains(&self, point: &[f64], slack: f64) -> bool {
        self.distance_to(point) <= slack
    }
}

/// Single-link clustering into k clusters: cut the k−1 heaviest MST edges
/// (ties broken by ascending endpoint pair); the components are the
/// clusters, ordered by smallest member id, each with its surviving
/// subtree.
pub fn single_link_k(dataset: &Dataset, k: usize) -> Result<(Partition, Vec<LinkTree>)> {
    let n = dataset.len();
    if k == 0 || k > n {
        return Err(Error::validation(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let points: Vec<Vec<f64>> = dataset.to_rows();
    let mst = minimum_spanning_tree(&points)?;
    let mut by_weight = mst.clone();
    by_weight.sort_by(|x, y| {
        y.weight
            .partial_cmp(&x.weight)
            .expect("finite weights")
            .then((x.a, x.b).cmp(&(y.a, y.b)))
    });
    let removed: Vec<(usize, usize)> = by_weight[..k - 1].iter().map(|e| (e.a, e.b)).collect();
    let surviving: Vec<MstEdge> = mst
        .into_iter()
        .filter(|e| !removed.contains(&(e.a, e.b)))
        .collect();

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for e in &surviving {
        let (ra, rb) = (find(&mut parent, e.a), find(&mut parent, e.b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut cluster_of_root = vec![usize::MAX; n];
    let mut labels = vec![0usize; n];
    let mut next = 0usize;
    for i in 0..n {
        let r = find(&mut parent, i);
        if cluster_of_root[r] == usize::MAX {
            cluster_of_root[r] = next;
            next += 1;
        }
        labels[i] = cluster_of_root[r];
    }
    debug_assert_eq!(next, k);
    let partition = Partition::from_labels(dataset, labels, k)?;

    let mut trees = Vec::with_capacity(k);
    for j in 0..k {
        let members = partition.members(j);
        let edges: Vec<MstEdge> = surviving
            .iter()
            .filter(|e| partition.label(e.a) == j)
            .cloned()
            .collect();
        trees.push(LinkTree::new(j, members, edges)?);
    }
    Ok((partition, trees))
}

fn check_trees(dataset: &Dataset, partition: &Partition, trees: &[LinkTree]) -> Result<()> {
    partition.ensure_matches(dataset)?;
    if trees.len() != partition.k() {
        return Err(Error::validation(format!(
            "{} trees for {} clusters",
            trees.len(),
            partition.k()
        )));
    }
    for (j, tree) in trees.iter().enumerate() {
        if tree.cluster_id != j {
            return Err(Error::validation(format!(
                "tree {j} claims cluster {}",
                tree.cluster_id
            )));
        }
        if tree.members != partition.members(j) {
            return Err(Error::validation(format!(
                "tree {j} members disagree with the partition"
            )));
        }
    }
    Ok(())
}

/// First node outside `cluster_id` that is too close to the cluster's area,
/// or None when the cluster is link-ball separated.
fn separation_violation(
    dataset: &Dataset,
    partition: &Partition,
    trees: &[LinkTree],
    cluster_id: usize,
) -> Result<Option<usize>> {
    if cluster_id >= partition.k() {
        return Err(Error::validation(format!(
            "cluster {cluster_id} out of range (k = {})",
            partition.k()
        )));
    }
    let area = ClusterArea::from_tree(dataset, &trees[cluster_id])?;
    for i in 0..dataset.len() {
        let j = partition.label(i);
        if j == cluster_id {
            continue;
        }
        let incident = trees[j]
            .longest_incident_edge(i)
            .expect("membership checked");
        if area.distance_to(dataset.point(i)) <= incident {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Whether every node outside the cluster is farther from the cluster's
/// ball-union area than its own longest incident tree edge.
pub fn link_ball_separated(
    dataset: &Dataset,
    partition: &Partition,
    trees: &[LinkTree],
    cluster_id: usize,
) -> Result<bool> {
    check_trees(dataset, partition, trees)?;
    Ok(separation_violation(dataset, partition, trees, cluster_id)?.is_none())
}

/// Boundary samples per ball when verifying that moved balls stay inside
/// the original cluster area.
const BOUNDARY_SAMPLES: usize = 64;
const AREA_SLACK: f64 = 1e-9;

/// Contract a node of a link-ball-separated cluster.
///
/// A leaf slides toward its unique tree neighbor: x′ = B + λ(x − B). For an
/// internal node M, each adjacent branch (component of the tree minus M,
/// tried in ascending neighbor order) is rigidly translated toward M by
/// (1−λ)(M − B); the first branch whose moved balls stay inside the
/// original cluster area (verified on sampled ball boundaries) is taken.
/// Refuses when the cluster is not separated or no branch stays inside.
pub fn semi_centric_transform(
    dataset: &Dataset,
    partition: &Partition,
    trees: &[LinkTree],
    cluster_id: usize,
    node_id: usize,
    lambda: f64,
) -> Result<TransformResult> {
    check_trees(dataset, partition, trees)?;
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::validation(format!(
            "lambda must lie strictly in (0, 1), got {lambda}"
        )));
    }
    if cluster_id >= partition.k() {
        return Err(Error::validation(format!(
            "cluster {cluster_id} out of range (k = {})",
            partition.k()
        )));
    }
    if node_id >= dataset.len() || partition.label(node_id) != cluster_id {
        return Err(Error::validation(format!(
            "node {node_id} is not a member of cluster {cluster_id}"
        )));
    }
    if let Some(v) = separation_violation(dataset, partition, trees, cluster_id)? {
        return Err(Error::refusal(format!(
            "cluster {cluster_id} is not link-ball separated: node {v} is too close"
        )));
    }
    let tree = &trees[cluster_id];
    let neighbors = tree.neighbors(node_id);
    if neighbors.is_empty() {
        return Err(Error::validation(format!(
            "node {node_id} has no tree edges to contract"
        )));
    }

    let dim = dataset.dim();
    let mut rows = dataset.to_rows();
    let provenance;
    if neighbors.len() == 1 {
        // Leaf: slide toward the unique neighbor.
        let b = neighbors[0];
        for d in 0..dim {
            rows[node_id][d] =
                rows[b][d] + lambda * (rows[node_id][d] - rows[b][d]);
        }
        provenance = Provenance::SemiCentric {
            cluster_id,
            node_id,
            lambda,
            branch_root: None,
            moved_nodes: vec![node_id],
        };
    } else {
        let original_area = ClusterArea::from_tree(dataset, tree)?;
        let mut first_violation: Option<usize> = None;
        let mut accepted: Option<(usize, Vec<usize>)> = None;
        for &b in &neighbors {
            let branch = branch_members(tree, node_id, b);
            let shift: Vec<f64> = (0..dim)
                .map(|d| (1.0 - lambda) * (dataset.point(node_id)[d] - dataset.point(b)[d]))
                .collect();
            match moved_balls_stay_inside(dataset, tree, node_id, b, &branch, &shift, &original_area)
            {
                Ok(()) => {
                    accepted = Some((b, branch));
                    break;
                }
                Err(node) => {
                    first_violation.get_or_insert(node);
                }
            }
        }
        let Some((b, branch)) = accepted else {
            let v = first_violation.expect("at least one branch was tried");
            return Err(Error::refusal(format!(
                "no branch of node {node_id} stays inside the cluster area; node {v}'s ball exits"
            )));
        };
        let shift: Vec<f64> = (0..dim)
            .map(|d| (1.0 - lambda) * (dataset.point(node_id)[d] - dataset.point(b)[d]))
            .collect();
        for &p in &branch {
            for d in 0..dim {
                rows[p][d] += shift[d];
            }
        }
        provenance = Provenance::SemiCentric {
            cluster_id,
            node_id,
            lambda,
            branch_root: Some(b),
            moved_nodes: branch,
        };
    }

    let dataset_after = Dataset::from_rows(rows)?;
    let baseline_partition =
        Partition::from_labels(&dataset_after, partition.labels().to_vec(), partition.k())?;
    Ok(TransformResult {
        dataset: dataset_after,
        provenance,
        baseline_partition,
    })
}

/// Members of the branch hanging off `node` through `neighbor` (the
/// component of the tree minus `node` containing `neighbor`).
fn branch_members(tree: &LinkTree, node: usize, neighbor: usize) -> Vec<usize> {
    let mut stack = vec![neighbor];
    let mut seen = vec![neighbor];
    while let Some(p) = stack.pop() {
        for q in tree.neighbors(p) {
            if q != node && !seen.contains(&q) {
                seen.push(q);
                stack.push(q);
            }
        }
    }
    seen.sort_unstable();
    seen
}

/// Checks that every ball of the cluster, after translating `branch` by
/// `shift` (which also rescales the node–root edge), stays inside
/// `original_area`. Ball boundaries are sampled at [`BOUNDARY_SAMPLES`]
/// points. Returns the first offending node on failure.
fn moved_balls_stay_inside(
    dataset: &Dataset,
    tree: &LinkTree,
    node: usize,
    root: usize,
    branch: &[usize],
    shift: &[f64],
    original_area: &ClusterArea,
) -> std::result::Result<(), usize> {
    let dim = dataset.dim();
    let moved = |p: usize| -> Vec<f64> {
        let mut x = dataset.point(p).to_vec();
        if branch.contains(&p) {
            for d in 0..dim {
                x[d] += shift[d];
            }
        }
        x
    };
    // Recompute longest incident edges on the moved configuration: only the
    // node–root edge changes length (the branch moves rigidly).
    let new_radius = |p: usize| -> f64 {
        tree.edges
            .iter()
            .filter(|e| e.a == p || e.b == p)
            .map(|e| {
                if (e.a == node && e.b == root) || (e.a == root && e.b == node) {
                    euclidean_distance(&moved(e.a), &moved(e.b)).expect("same dim")
                } else {
                    e.weight
                }
            })
            .fold(0.0f64, f64::max)
    };
    let mut rng = rng_from_seed(0x5eba_11);
    for &p in &tree.members {
        let center = moved(p);
        let radius = new_radius(p);
        for _ in 0..BOUNDARY_SAMPLES {
            let u = unit_vector(dim, &mut rng);
            let sample: Vec<f64> = center
                .iter()
                .zip(&u)
                .map(|(&c, &d)| c + radius * d)
                .collect();
            if !original_area.contains(&sample, AREA_SLACK) {
                return Err(p);
            }
        }
    }
    Ok(())
}
