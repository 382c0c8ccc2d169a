//! Euclidean geometry primitives: distances, centroids, enclosing radii,
//! and a deterministic minimum spanning tree.

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Squared Euclidean distance. The workhorse of every inner loop; callers
/// that need the true distance take the square root themselves.
#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

/// Euclidean (L2) distance between two points of equal dimension.
pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::validation(format!(
            "dimension mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(squared_distance(a, b).sqrt())
}

/// Arithmetic mean of the selected points.
///
/// Accumulates in ascending member order, so identical member sets always
/// produce bitwise-identical results.
pub fn centroid(dataset: &Dataset, member_ids: &[usize]) -> Result<Vec<f64>> {
    if member_ids.is_empty() {
        return Err(Error::validation("centroid of an empty member set"));
    }
    let dim = dataset.dim();
    let mut acc = vec![0.0; dim];
    for &id in member_ids {
        if id >= dataset.len() {
            return Err(Error::validation(format!(
                "member id {id} out of range (n = {})",
                dataset.len()
            )));
        }
        for (a, x) in acc.iter_mut().zip(dataset.point(id)) {
            *a += x;
        }
    }
    let inv = 1.0 / member_ids.len() as f64;
    for a in acc.iter_mut() {
        *a *= inv;
    }
    Ok(acc)
}

/// One edge of a spanning tree over locally indexed nodes, with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MstEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Minimum spanning tree over the given points under Euclidean distance.
///
/// Prim's algorithm in O(n²) time and O(n) memory. Ties are broken by
/// preferring the lexicographically smaller (i, j) index pair, which makes
/// the result deterministic even on symmetric configurations. Edges are
/// returned sorted by (a, b).
pub fn minimum_spanning_tree(points: &[Vec<f64>]) -> Result<Vec<MstEdge>> {
    if points.is_empty() {
        return Err(Error::validation("minimum_spanning_tree needs at least one node"));
    }
    let dim = points[0].len();
    if let Some((i, p)) = points.iter().enumerate().find(|(_, p)| p.len() != dim) {
        return Err(Error::validation(format!(
            "node {i} has {} coordinates, expected {dim}",
            p.len()
        )));
    }
    Ok(mst_by(points.len(), |i, j| {
        squared_distance(&points[i], &points[j]).sqrt()
    }))
}

/// Prim's MST over `n` nodes with an arbitrary distance oracle.
///
/// Tie-break: a frontier edge replaces the current candidate for a node only
/// if it is strictly shorter, and the next node picked is the one with the
/// smallest (weight, parent, node) triple — so equal-weight choices resolve
/// toward the lexicographically smallest index pair.
pub(crate) fn mst_by(n: usize, dist: impl Fn(usize, usize) -> f64) -> Vec<MstEdge> {
    if n <= 1 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut key = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    in_tree[0] = true;
    for v in 1..n {
        key[v] = dist(0, v);
        parent[v] = 0;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for _ in 1..n {
        let mut next = usize::MAX;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let better = match next {
                usize::MAX => true,
                u => {
                    (key[v], parent[v], v) < (key[u], parent[u], u)
                }
            };
            if better {
                next = v;
            }
        }
        let u = next;
        in_tree[u] = true;
        let (a, b) = if parent[u] < u { (parent[u], u) } else { (u, parent[u]) };
        edges.push(MstEdge { a, b, weight: key[u] });
        for v in 0..n {
            if !in_tree[v] {
                let w = dist(u, v);
                if w < key[v] || (w == key[v] && u < parent[v]) {
                    key[v] = w;
                    parent[v] = u;
                }
            }
        }
    }
    edges.sort_by(|x, y| (x.a, x.b).cmp(&(y.a, y.b)));
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(coords: &[&[f64]]) -> Vec<Vec<f64>> {
        coords.iter().map(|c| c.to_vec()).collect()
    }

    #[test]
    fn distance_matches_the_3_4_5_triangle() {
        let d = euclidean_distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap();
        assert_eq!(d, 5.0);
        assert_eq!(euclidean_distance(&[1.0, 1.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert!(euclidean_distance(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn distance_matches_coordinatewise_recomputation_in_32d() {
        let mut rng_state = 0x243F_6A88_85A3_08D3u64;
        let mut next = || {
            // Tiny xorshift; the oracle below is what matters, not the source.
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            (rng_state >> 11) as f64 / (1u64 << 53) as f64 * 20.0 - 10.0
        };
        let a: Vec<f64> = (0..32).map(|_| next()).collect();
        let b: Vec<f64> = (0..32).map(|_| next()).collect();
        // Independent oracle: per-coordinate squared differences, summed the
        // plain way, then a square root.
        let mut sum = 0.0f64;
        for d in 0..32 {
            sum += (a[d] - b[d]) * (a[d] - b[d]);
        }
        let oracle = sum.sqrt();
        let got = euclidean_distance(&a, &b).unwrap();
        assert!((got - oracle).abs() <= 1e-12 * oracle.max(1.0));
    }

    #[test]
    fn centroid_examples() {
        let ds = Dataset::from_rows(vec![vec![-2.0], vec![2.0]]).unwrap();
        assert_eq!(centroid(&ds, &[0, 1]).unwrap(), vec![0.0]);

        let ds = Dataset::from_rows(vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, 3.0]]).unwrap();
        assert_eq!(centroid(&ds, &[0, 1, 2]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(centroid(&ds, &[2]).unwrap(), vec![1.0, 3.0]);
        assert!(centroid(&ds, &[]).is_err());
        assert!(centroid(&ds, &[9]).is_err());
    }

    /// Brute-force minimum spanning tree: try every (n-1)-subset of the
    /// complete edge list, keep the cheapest acyclic connected one.
    fn brute_force_mst_weight(points: &[Vec<f64>]) -> f64 {
        let n = points.len();
        let mut all_edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                all_edges.push((i, j, squared_distance(&points[i], &points[j]).sqrt()));
            }
        }
        let m = all_edges.len();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << m) {
            if mask.count_ones() as usize != n - 1 {
                continue;
            }
            let mut root: Vec<usize> = (0..n).collect();
            fn find(root: &mut Vec<usize>, x: usize) -> usize {
                if root[x] != x {
                    let r = find(root, root[x]);
                    root[x] = r;
                }
                root[x]
            }
            let mut weight = 0.0;
            let mut ok = true;
            for (e, &(a, b, w)) in all_edges.iter().enumerate() {
                if mask & (1 << e) == 0 {
                    continue;
                }
                let (ra, rb) = (find(&mut root, a), find(&mut root, b));
                if ra == rb {
                    ok = false;
                    break;
                }
                root[ra] = rb;
                weight += w;
            }
            if ok && weight < best {
                best = weight;
            }
        }
        best
    }

    #[test]
    fn mst_collinear_example() {
        // Oracle first: all 16 spanning trees of the 4-node complete graph
        // are enumerated by brute force and the cheapest weighs 1+1+8.
        let p = pts(&[&[0.0], &[1.0], &[2.0], &[10.0]]);
        assert_eq!(brute_force_mst_weight(&p), 10.0);
        let edges = minimum_spanning_tree(&p).unwrap();
        assert_eq!(edges.len(), 3);
        assert_eq!(
            edges.iter().map(|e| (e.a, e.b)).collect::<Vec<_>>(),
            vec![(0, 1), (1, 2), (2, 3)]
        );
        assert_eq!(
            edges.iter().map(|e| e.weight).collect::<Vec<_>>(),
            vec![1.0, 1.0, 8.0]
        );
    }

    #[test]
    fn mst_two_nodes_single_edge() {
        let edges = minimum_spanning_tree(&pts(&[&[0.0, 0.0], &[3.0, 4.0]])).unwrap();
        assert_eq!(edges.len(), 1);
        assert_eq!((edges[0].a, edges[0].b, edges[0].weight), (0, 1, 5.0));
    }

    #[test]
    fn mst_single_node_is_empty() {
        assert!(minimum_spanning_tree(&pts(&[&[1.0]])).unwrap().is_empty());
        assert!(minimum_spanning_tree(&[]).is_err());
    }

    #[test]
    fn mst_equilateral_triangle_tie_break() {
        // The standard-basis simplex is exactly equilateral in floating
        // point (every pairwise distance evaluates to sqrt(2.0) bitwise),
        // unlike a 2D equilateral triangle whose irrational height rounds.
        let p = pts(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let edges = minimum_spanning_tree(&p).unwrap();
        assert_eq!(
            edges.iter().map(|e| (e.a, e.b)).collect::<Vec<_>>(),
            vec![(0, 1), (0, 2)],
            "ties must resolve to the lexicographically smallest pairs"
        );
        // Same tie-break through the distance oracle, all weights equal.
        let star = mst_by(4, |_, _| 1.0);
        assert_eq!(
            star.iter().map(|e| (e.a, e.b)).collect::<Vec<_>>(),
            vec![(0, 1), (0, 2), (0, 3)]
        );
    }

    #[test]
    fn mst_matches_brute_force_on_random_small_instances() {
        let mut state = 0x9E37_79B9u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for trial in 0..40 {
            let n = 2 + (trial % 5); // 2..=6 nodes
            let points: Vec<Vec<f64>> =
                (0..n).map(|_| vec![next() * 10.0, next() * 10.0]).collect();
            let edges = minimum_spanning_tree(&points).unwrap();
            let total: f64 = edges.iter().map(|e| e.weight).sum();
            let oracle = brute_force_mst_weight(&points);
            assert!(
                (total - oracle).abs() <= 1e-9 * oracle.max(1.0),
                "trial {trial}: MST weight {total} vs brute-force {oracle}"
            );
        }
    }
}
