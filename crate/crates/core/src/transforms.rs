//! Cluster-preserving dataset transformations: centric shrinks (full
//! cluster, subset, or axis-restricted), radius equalization, radial
//! separation, and per-cluster rigid motions with a safety predicate for
//! iterated random motion.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::geometry::{centroid, euclidean_distance, squared_distance};
use crate::partition::{select_central_cluster, Partition};
use crate::rng::{rng_from_seed, unit_vector};
use rand::Rng;

/// A centric shrink: pull points of one cluster toward a center by factor
/// λ ∈ (0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentricSpec {
    pub cluster_id: usize,
    pub lambda: f64,
    /// When set, only these member ids move, and they shrink toward the
    /// subset's own centroid rather than the cluster's.
    pub subset: Option<Vec<usize>>,
    /// When set, only coordinates with `true` shrink (length = dim).
    pub axis_mask: Option<Vec<bool>>,
}

impl CentricSpec {
    pub fn full_cluster(cluster_id: usize, lambda: f64) -> Self {
        CentricSpec {
            cluster_id,
            lambda,
            subset: None,
            axis_mask: None,
        }
    }
}

/// One rigid motion per cluster: x ↦ Rot_j·(x − μ_j) + μ_j + t_j. The
/// reference cluster stays fixed (identity rotation, zero translation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionSpec {
    pub reference_cluster: usize,
    /// Per-cluster translation vectors, k × dim.
    pub translations: Vec<Vec<f64>>,
    /// Per-cluster rotation matrices, row-major dim × dim.
    pub rotations: Vec<Vec<f64>>,
}

impl MotionSpec {
    /// The do-nothing motion for k clusters in `dim` dimensions.
    pub fn identity(k: usize, dim: usize, reference_cluster: usize) -> Self {
        let mut eye = vec![0.0; dim * dim];
        for d in 0..dim {
            eye[d * dim + d] = 1.0;
        }
        MotionSpec {
            reference_cluster,
            translations: vec![vec![0.0; dim]; k],
            rotations: vec![eye; k],
        }
    }
}

/// What a transformation did, kept alongside its output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    Centric(CentricSpec),
    EqualizeRadii {
        lambdas: Vec<f64>,
        common_radius: f64,
    },
    RadialSeparation {
        reference_cluster: usize,
        stretch: f64,
        /// Inter-cluster point pairs whose distance shrank — the operation
        /// verifies the monotone-gap guarantee instead of assuming it.
        decreased_inter_pairs: usize,
    },
    MotionSafeShrink {
        equalize_lambdas: Vec<f64>,
        shrink_lambda: f64,
        safe_radius: f64,
        /// Center-to-center distances at the safe baseline, k × k.
        baseline_center_distances: Vec<Vec<f64>>,
    },
    Motion(MotionSpec),
    SemiCentric {
        cluster_id: usize,
        node_id: usize,
        lambda: f64,
        /// Neighbor whose branch was translated (internal-node case only).
        branch_root: Option<usize>,
        /// Point ids that actually moved.
        moved_nodes: Vec<usize>,
    },
}

/// A transformed dataset plus the record of how it was produced.
#[derive(Debug, Clone)]
pub struct TransformResult {
    /// Same point ids and dimension as the input, new coordinates.
    pub dataset: Dataset,
    pub provenance: Provenance,
    /// The input labels re-evaluated on the transformed coordinates.
    pub baseline_partition: Partition,
}

fn rebuild(
    dataset_rows: Vec<Vec<f64>>,
    labels: Vec<usize>,
    k: usize,
    provenance: Provenance,
) -> Result<TransformResult> {
    let dataset = Dataset::from_rows(dataset_rows)?;
    let baseline_partition = Partition::from_labels(&dataset, labels, k)?;
    Ok(TransformResult {
        dataset,
        provenance,
        baseline_partition,
    })
}

/// Pull the points of one cluster (or a subset of it) toward their center:
/// x′ = center + λ(x − center).
///
/// With `subset`, the center is the subset's own centroid; with
/// `axis_mask`, only the masked coordinates move. λ = 1 returns an exact
/// copy.
pub fn centric_transform(
    dataset: &Dataset,
    partition: &Partition,
    spec: &CentricSpec,
) -> Result<TransformResult> {
    partition.ensure_matches(dataset)?;
    if spec.cluster_id >= partition.k() {
        return Err(Error::validation(format!(
            "cluster {} out of range (k = {})",
            spec.cluster_id,
            partition.k()
        )));
    }
    if !(spec.lambda > 0.0 && spec.lambda <= 1.0) {
        return Err(Error::validation(format!(
            "lambda must lie in (0, 1], got {}",
            spec.lambda
        )));
    }
    if let Some(mask) = &spec.axis_mask {
        if mask.len() != dataset.dim() {
            return Err(Error::validation(format!(
                "axis_mask length {} vs dim {}",
                mask.len(),
                dataset.dim()
            )));
        }
    }
    let affected: Vec<usize> = match &spec.subset {
        Some(subset) => {
            if subset.is_empty() {
                return Err(Error::validation("subset must not be empty"));
            }
            let mut ids = subset.clone();
            ids.sort_unstable();
            ids.dedup();
            for &i in &ids {
                if i >= dataset.len() || partition.label(i) != spec.cluster_id {
                    return Err(Error::validation(format!(
                        "subset point {i} is not a member of cluster {}",
                        spec.cluster_id
                    )));
                }
            }
            ids
        }
        None => partition.members(spec.cluster_id),
    };
    let center: Vec<f64> = match &spec.subset {
        Some(_) => centroid(dataset, &affected)?,
        None => partition.centroid(spec.cluster_id).to_vec(),
    };

    let mut rows = dataset.to_rows();
    if spec.lambda < 1.0 {
        for &i in &affected {
            for (d, x) in rows[i].iter_mut().enumerate() {
                let shrink = spec.axis_mask.as_ref().map_or(true, |m| m[d]);
                if shrink {
                    *x = center[d] + spec.lambda * (*x - center[d]);
                }
            }
        }
    }
    rebuild(
        rows,
        partition.labels().to_vec(),
        partition.k(),
        Provenance::Centric(spec.clone()),
    )
}

const RADII_EQUAL_REL_TOL: f64 = 1e-9;

/// Shrink every cluster toward its centroid so that all enclosing radii
/// equal the smallest one; returns the common radius. Centroids are
/// unchanged. Already-equal radii (within 1e-9 relative) return an exact
/// copy.
pub fn equalize_radii(dataset: &Dataset, partition: &Partition) -> Result<(TransformResult, f64)> {
    partition.ensure_matches(dataset)?;
    if partition.k() < 2 {
        return Err(Error::validation("radius equalization needs k >= 2"));
    }
    let radii = partition.radii();
    let r_min = radii.iter().cloned().fold(f64::INFINITY, f64::min);
    let r_max = radii.iter().cloned().fold(0.0f64, f64::max);
    if r_min == 0.0 && r_max > 0.0 {
        return Err(Error::refusal(
            "a cluster has enclosing radius 0 while others do not; no shrink factor can equalize onto 0",
        ));
    }
    let identity = r_max - r_min <= RADII_EQUAL_REL_TOL * r_max;
    let lambdas: Vec<f64> = if identity {
        vec![1.0; partition.k()]
    } else {
        radii.iter().map(|&r| r_min / r).collect()
    };

    let mut rows = dataset.to_rows();
    if !identity {
        for (i, row) in rows.iter_mut().enumerate() {
            let j = partition.label(i);
            let lam = lambdas[j];
            for (d, x) in row.iter_mut().enumerate() {
                let c = partition.centroid(j)[d];
                *x = c + lam * (*x - c);
            }
        }
    }
    let result = rebuild(
        rows,
        partition.labels().to_vec(),
        partition.k(),
        Provenance::EqualizeRadii {
            lambdas,
            common_radius: r_min,
        },
    )?;
    debug_assert!(result
        .baseline_partition
        .radii()
        .iter()
        .all(|&r| (r - r_min).abs() <= 1e-9 * r_min.max(1e-300)));
    Ok((result, r_min))
}

/// Translate every non-reference cluster j by (stretch − 1)(μ_j − μ_ref),
/// scaling the center configuration away from the reference cluster.
///
/// The provenance records how many inter-cluster point distances shrank:
/// zero when the partition is Voronoi-like (e.g. a k-means output), but the
/// guarantee is verified by a full pairwise scan rather than assumed.
pub fn radial_separation(
    dataset: &Dataset,
    partition: &Partition,
    reference_cluster: usize,
    stretch: f64,
) -> Result<TransformResult> {
    partition.ensure_matches(dataset)?;
    if reference_cluster >= partition.k() {
        return Err(Error::validation(format!(
            "reference cluster {} out of range (k = {})",
            reference_cluster,
            partition.k()
        )));
    }
    if !(stretch >= 1.0) || !stretch.is_finite() {
        return Err(Error::validation(format!("stretch must be >= 1, got {stretch}")));
    }
    let mu_ref = partition.centroid(reference_cluster);
    let shifts: Vec<Vec<f64>> = (0..partition.k())
        .map(|j| {
            partition
                .centroid(j)
                .iter()
                .zip(mu_ref)
                .map(|(&c, &r)| (stretch - 1.0) * (c - r))
                .collect()
        })
        .collect();

    let mut rows = dataset.to_rows();
    if stretch > 1.0 {
        for (i, row) in rows.iter_mut().enumerate() {
            let shift = &shifts[partition.label(i)];
            for (x, s) in row.iter_mut().zip(shift) {
                *x += s;
            }
        }
    }

    let mut decreased_inter_pairs = 0usize;
    for a in 0..dataset.len() {
        for b in (a + 1)..dataset.len() {
            if partition.label(a) == partition.label(b) {
                continue;
            }
            let before = squared_distance(dataset.point(a), dataset.point(b));
            let after = squared_distance(&rows[a], &rows[b]);
            if after < before * (1.0 - 1e-12) {
                decreased_inter_pairs += 1;
            }
        }
    }
    rebuild(
        rows,
        partition.labels().to_vec(),
        partition.k(),
        Provenance::RadialSeparation {
            reference_cluster,
            stretch,
            decreased_inter_pairs,
        },
    )
}

/// Equalize all cluster radii, then shrink uniformly by
/// λ = min(1, d_min / (6·R₀)) so the common radius R_safe obeys
/// 4·R_safe ≤ d_min − 2·R_safe: clusters are then small enough that any
/// center-distance-non-decreasing rigid motion keeps them unambiguous.
/// Returns the transformed data and R_safe; the provenance stores the
/// baseline center distances that [`motion_safe`] checks against.
pub fn ensure_motion_safe(
    dataset: &Dataset,
    partition: &Partition,
) -> Result<(TransformResult, f64)> {
    let (equalized, r0) = equalize_radii(dataset, partition)?;
    let centers = equalized.baseline_partition.centroids();
    let k = partition.k();
    let mut d_min = f64::INFINITY;
    let mut distances = vec![vec![0.0f64; k]; k];
    for a in 0..k {
        for b in (a + 1)..k {
            let d = euclidean_distance(&centers[a], &centers[b])?;
            distances[a][b] = d;
            distances[b][a] = d;
            d_min = d_min.min(d);
        }
    }
    if d_min == 0.0 {
        return Err(Error::refusal(
            "two clusters share a centroid; no shrink can separate them",
        ));
    }
    let equalize_lambdas = match &equalized.provenance {
        Provenance::EqualizeRadii { lambdas, .. } => lambdas.clone(),
        _ => unreachable!(),
    };
    let lambda = (d_min / (6.0 * r0)).min(1.0);
    let r_safe = lambda * r0;
    debug_assert!(4.0 * r_safe <= d_min - 2.0 * r_safe + 1e-9 * d_min);

    let mut rows = equalized.dataset.to_rows();
    if lambda < 1.0 {
        for (i, row) in rows.iter_mut().enumerate() {
            let j = partition.label(i);
            for (d, x) in row.iter_mut().enumerate() {
                let c = centers[j][d];
                *x = c + lambda * (*x - c);
            }
        }
    }
    let result = rebuild(
        rows,
        partition.labels().to_vec(),
        k,
        Provenance::MotionSafeShrink {
            equalize_lambdas,
            shrink_lambda: lambda,
            safe_radius: r_safe,
            baseline_center_distances: distances,
        },
    )?;
    Ok((result, r_safe))
}

const MOTION_REL_TOL: f64 = 1e-9;

/// Whether `current` is still a safe configuration relative to the
/// baseline produced by [`ensure_motion_safe`]: every pairwise center
/// distance is at least its baseline value, and every cluster's point set
/// is a rigid copy of its baseline (all intra-cluster distances preserved
/// within 1e-9 relative).
pub fn motion_safe(current: &Dataset, baseline: &TransformResult) -> Result<bool> {
    let Provenance::MotionSafeShrink {
        baseline_center_distances,
        ..
    } = &baseline.provenance
    else {
        return Err(Error::validation(
            "baseline must come from ensure_motion_safe",
        ));
    };
    if current.len() != baseline.dataset.len() || current.dim() != baseline.dataset.dim() {
        return Err(Error::validation(
            "current dataset shape differs from the baseline",
        ));
    }
    let part = &baseline.baseline_partition;
    let k = part.k();

    let current_part = Partition::from_labels(current, part.labels().to_vec(), k)?;
    for a in 0..k {
        for b in (a + 1)..k {
            let d = euclidean_distance(current_part.centroid(a), current_part.centroid(b))?;
            let floor = baseline_center_distances[a][b];
            if d < floor * (1.0 - MOTION_REL_TOL) {
                return Ok(false);
            }
        }
    }
    for j in 0..k {
        let members = part.members(j);
        for (ia, &a) in members.iter().enumerate() {
            for &b in members.iter().skip(ia + 1) {
                let before = euclidean_distance(baseline.dataset.point(a), baseline.dataset.point(b))?;
                let after = euclidean_distance(current.point(a), current.point(b))?;
                if (after - before).abs() > MOTION_REL_TOL * before.max(1.0) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn check_rotation(rot: &[f64], dim: usize) -> Result<()> {
    if rot.len() != dim * dim {
        return Err(Error::validation(format!(
            "rotation matrix has {} entries, expected {}",
            rot.len(),
            dim * dim
        )));
    }
    for r1 in 0..dim {
        for r2 in r1..dim {
            let dot: f64 = (0..dim).map(|c| rot[r1 * dim + c] * rot[r2 * dim + c]).sum();
            let want = if r1 == r2 { 1.0 } else { 0.0 };
            if (dot - want).abs() > 1e-9 {
                return Err(Error::validation(format!(
                    "rotation rows {r1},{r2} have dot product {dot}, expected {want}"
                )));
            }
        }
    }
    Ok(())
}

/// Apply one rigid motion per cluster: x ↦ Rot_j·(x − μ_j) + μ_j + t_j.
/// Intra-cluster distances are preserved by construction; rotations are
/// validated to be orthogonal within 1e-9.
pub fn apply_motion(
    dataset: &Dataset,
    partition: &Partition,
    spec: &MotionSpec,
) -> Result<TransformResult> {
    partition.ensure_matches(dataset)?;
    let (k, dim) = (partition.k(), dataset.dim());
    if spec.reference_cluster >= k {
        return Err(Error::validation(format!(
            "reference cluster {} out of range (k = {k})",
            spec.reference_cluster
        )));
    }
    if spec.translations.len() != k || spec.rotations.len() != k {
        return Err(Error::validation(format!(
            "motion spec covers {} translations / {} rotations for k = {k}",
            spec.translations.len(),
            spec.rotations.len()
        )));
    }
    for (j, t) in spec.translations.iter().enumerate() {
        if t.len() != dim {
            return Err(Error::validation(format!(
                "translation {j} has dim {}, expected {dim}",
                t.len()
            )));
        }
        if !t.iter().all(|v| v.is_finite()) {
            return Err(Error::validation(format!("translation {j} is not finite")));
        }
    }
    for rot in &spec.rotations {
        check_rotation(rot, dim)?;
    }
    let ref_t_zero = spec.translations[spec.reference_cluster].iter().all(|&v| v == 0.0);
    let ref_rot_identity = {
        let rot = &spec.rotations[spec.reference_cluster];
        (0..dim).all(|r| (0..dim).all(|c| rot[r * dim + c] == if r == c { 1.0 } else { 0.0 }))
    };
    if !ref_t_zero || !ref_rot_identity {
        return Err(Error::validation(
            "the reference cluster must keep the identity motion",
        ));
    }

    let mut rows = dataset.to_rows();
    for (i, row) in rows.iter_mut().enumerate() {
        let j = partition.label(i);
        let mu = partition.centroid(j);
        let rot = &spec.rotations[j];
        let t = &spec.translations[j];
        let centered: Vec<f64> = row.iter().zip(mu).map(|(&x, &m)| x - m).collect();
        for d in 0..dim {
            let rotated: f64 = (0..dim).map(|c| rot[d * dim + c] * centered[c]).sum();
            row[d] = rotated + mu[d] + t[d];
        }
    }
    rebuild(
        rows,
        partition.labels().to_vec(),
        k,
        Provenance::Motion(spec.clone()),
    )
}

/// Draw a random translation for every non-reference cluster: a uniform
/// unit direction scaled by a length uniform in (0, step_max]. Rotations
/// stay identity and the reference is the most central cluster.
/// Deterministic given the seed.
pub fn random_motion_step(
    dataset: &Dataset,
    partition: &Partition,
    rng_seed: u64,
    step_max: f64,
) -> Result<MotionSpec> {
    partition.ensure_matches(dataset)?;
    if !(step_max > 0.0) || !step_max.is_finite() {
        return Err(Error::validation(format!(
            "step_max must be positive and finite, got {step_max}"
        )));
    }
    let reference = select_central_cluster(partition)?;
    let mut spec = MotionSpec::identity(partition.k(), dataset.dim(), reference);
    let mut rng = rng_from_seed(rng_seed);
    for j in 0..partition.k() {
        if j == reference {
            continue;
        }
        let dir = unit_vector(dataset.dim(), &mut rng);
        let len = (1.0 - rng.gen::<f64>()) * step_max; // uniform in (0, step_max]
        spec.translations[j] = dir.into_iter().map(|d| d * len).collect();
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kmeans::kmeans_ideal;
    use crate::partition::disagreement_count;
    use crate::rng::random_rotation;

    fn ds1(coords: &[f64]) -> Dataset {
        Dataset::from_rows(coords.iter().map(|&c| vec![c]).collect()).unwrap()
    }

    fn part(ds: &Dataset, labels: &[usize], k: usize) -> Partition {
        Partition::from_labels(ds, labels.to_vec(), k).unwrap()
    }

    #[test]
    fn centric_shrinks_a_symmetric_pair() {
        let ds = ds1(&[-2.0, 2.0]);
        let p = part(&ds, &[0, 0], 1);
        let res = centric_transform(&ds, &p, &CentricSpec::full_cluster(0, 0.5)).unwrap();
        assert_eq!(res.dataset.point(0), &[-1.0]);
        assert_eq!(res.dataset.point(1), &[1.0]);
    }

    #[test]
    fn centric_lambda_one_is_identity() {
        let ds = Dataset::from_rows(vec![vec![0.3, 1.7], vec![2.9, -0.4], vec![5.0, 5.0]]).unwrap();
        let p = part(&ds, &[0, 0, 1], 2);
        let res = centric_transform(&ds, &p, &CentricSpec::full_cluster(0, 1.0)).unwrap();
        assert_eq!(res.dataset.as_flat(), ds.as_flat(), "bitwise identical");
    }

    #[test]
    fn centric_triangle_keeps_its_centroid() {
        let ds = Dataset::from_rows(vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, 3.0]]).unwrap();
        let p = part(&ds, &[0, 0, 0], 1);
        let res = centric_transform(&ds, &p, &CentricSpec::full_cluster(0, 0.5)).unwrap();
        assert_eq!(res.dataset.point(0), &[0.5, 0.5]);
        assert_eq!(res.dataset.point(1), &[1.5, 0.5]);
        assert_eq!(res.dataset.point(2), &[1.0, 2.0]);
        let c = res.baseline_partition.centroid(0);
        assert!((c[0] - 1.0).abs() < 1e-12 && (c[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn centric_rejects_bad_lambda_and_foreign_subset() {
        let ds = ds1(&[0.0, 1.0, 5.0]);
        let p = part(&ds, &[0, 0, 1], 2);
        for bad in [0.0, -0.5, 1.5, f64::NAN] {
            assert!(centric_transform(&ds, &p, &CentricSpec::full_cluster(0, bad)).is_err());
        }
        let foreign = CentricSpec {
            cluster_id: 0,
            lambda: 0.5,
            subset: Some(vec![2]),
            axis_mask: None,
        };
        assert!(centric_transform(&ds, &p, &foreign).is_err(), "point 2 is in cluster 1");
    }

    #[test]
    fn centric_scales_intra_distances_by_lambda_and_keeps_centroid() {
        let mut rng = rng_from_seed(41);
        let rows: Vec<Vec<f64>> = (0..9)
            .map(|_| (0..3).map(|_| rng.gen_range(-4.0..4.0)).collect())
            .collect();
        let ds = Dataset::from_rows(rows).unwrap();
        let p = part(&ds, &[0; 9], 1);
        let lambda = 0.37;
        let res = centric_transform(&ds, &p, &CentricSpec::full_cluster(0, lambda)).unwrap();
        let mu_before = p.centroid(0);
        let mu_after = res.baseline_partition.centroid(0);
        for d in 0..3 {
            assert!((mu_before[d] - mu_after[d]).abs() <= 1e-9);
        }
        for a in 0..9 {
            for b in (a + 1)..9 {
                let before = euclidean_distance(ds.point(a), ds.point(b)).unwrap();
                let after = euclidean_distance(res.dataset.point(a), res.dataset.point(b)).unwrap();
                assert!((after - lambda * before).abs() <= 1e-9 * before.max(1.0));
            }
        }
    }

    #[test]
    fn subset_centric_shrinks_toward_subset_centroid() {
        // Subset {0, 1} of the cluster has centroid 1; point 2 stays.
        let ds = ds1(&[0.0, 2.0, 6.0]);
        let p = part(&ds, &[0, 0, 0], 1);
        let spec = CentricSpec {
            cluster_id: 0,
            lambda: 0.5,
            subset: Some(vec![0, 1]),
            axis_mask: None,
        };
        let res = centric_transform(&ds, &p, &spec).unwrap();
        assert_eq!(res.dataset.point(0), &[0.5]);
        assert_eq!(res.dataset.point(1), &[1.5]);
        assert_eq!(res.dataset.point(2), &[6.0]);
    }

    #[test]
    fn axis_mask_shrinks_only_masked_coordinates() {
        let ds = Dataset::from_rows(vec![vec![2.0, 2.0], vec![-2.0, -2.0]]).unwrap();
        let p = part(&ds, &[0, 0], 1);
        let spec = CentricSpec {
            cluster_id: 0,
            lambda: 0.5,
            subset: None,
            axis_mask: Some(vec![true, false]),
        };
        let res = centric_transform(&ds, &p, &spec).unwrap();
        assert_eq!(res.dataset.point(0), &[1.0, 2.0]);
        assert_eq!(res.dataset.point(1), &[-1.0, -2.0]);
    }

    #[test]
    fn subset_centric_preserves_the_exhaustive_optimum() {
        // Small version of the preservation protocol; the acceptance suite
        // runs the full one.
        let mut rng = rng_from_seed(404);
        let mut tested = 0;
        while tested < 10 {
            let n = rng.gen_range(6..=9);
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)])
                .collect();
            let ds = Dataset::from_rows(rows).unwrap();
            let ideal = kmeans_ideal(&ds, 2).unwrap();
            if !ideal.unique || ideal.relative_margin.unwrap_or(0.0) < 1e-6 {
                continue;
            }
            tested += 1;
            for cluster in 0..2 {
                let members = ideal.partition.members(cluster);
                if members.len() < 2 {
                    continue;
                }
                let subset: Vec<usize> = members[..2].to_vec();
                for lambda in [0.2, 0.5, 0.8] {
                    let spec = CentricSpec {
                        cluster_id: cluster,
                        lambda,
                        subset: Some(subset.clone()),
                        axis_mask: None,
                    };
                    let res = centric_transform(&ds, &ideal.partition, &spec).unwrap();
                    let after = kmeans_ideal(&res.dataset, 2).unwrap();
                    assert_eq!(
                        disagreement_count(&after.partition, &ideal.partition).unwrap(),
                        0,
                        "subset shrink moved the optimum"
                    );
                }
            }
        }
    }

    #[test]
    fn gravitational_inequality_for_homothetic_shrinks() {
        // Shrinking a cluster never pulls two of its subsets further apart.
        let mut rng = rng_from_seed(57);
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|_| (0..2).map(|_| rng.gen_range(-3.0..3.0)).collect())
            .collect();
        let ds = Dataset::from_rows(rows).unwrap();
        let p = part(&ds, &[0; 12], 1);
        for mask in [None, Some(vec![true, false])] {
            let spec = CentricSpec {
                cluster_id: 0,
                lambda: 0.4,
                subset: None,
                axis_mask: mask,
            };
            let res = centric_transform(&ds, &p, &spec).unwrap();
            for _ in 0..1000 {
                let mut ids: Vec<usize> = (0..12).collect();
                for i in (1..ids.len()).rev() {
                    ids.swap(i, rng.gen_range(0..=i));
                }
                let s1 = &ids[0..3];
                let s2 = &ids[3..6];
                let before = euclidean_distance(
                    &centroid(&ds, s1).unwrap(),
                    &centroid(&ds, s2).unwrap(),
                )
                .unwrap();
                let after = euclidean_distance(
                    &centroid(&res.dataset, s1).unwrap(),
                    &centroid(&res.dataset, s2).unwrap(),
                )
                .unwrap();
                assert!(after <= before + 1e-9, "{after} > {before}");
            }
        }
    }

    #[test]
    fn equalize_radii_examples() {
        // Radii {4, 2}: λ = {0.5, 1}, both radii become 2.
        let ds = ds1(&[-4.0, 4.0, 8.0, 12.0]);
        let p = part(&ds, &[0, 0, 1, 1], 2);
        let (res, common) = equalize_radii(&ds, &p).unwrap();
        assert_eq!(common, 2.0);
        assert_eq!(res.dataset.point(0), &[-2.0]);
        assert_eq!(res.dataset.point(1), &[2.0]);
        assert_eq!(res.dataset.point(2), &[8.0], "smallest cluster untouched");
        match &res.provenance {
            Provenance::EqualizeRadii { lambdas, .. } => assert_eq!(lambdas, &vec![0.5, 1.0]),
            other => panic!("unexpected provenance {other:?}"),
        }

        // Already equal: exact copy.
        let ds = ds1(&[-1.0, 1.0, 9.0, 11.0]);
        let p = part(&ds, &[0, 0, 1, 1], 2);
        let (res, common) = equalize_radii(&ds, &p).unwrap();
        assert_eq!(common, 1.0);
        assert_eq!(res.dataset.as_flat(), ds.as_flat());
    }

    #[test]
    fn equalize_radii_three_clusters() {
        let ds = ds1(&[-3.0, 3.0, 14.0, 26.0, 41.0, 59.0]);
        let p = part(&ds, &[0, 0, 1, 1, 2, 2], 3);
        assert_eq!(p.radii(), &[3.0, 6.0, 9.0]);
        let (res, common) = equalize_radii(&ds, &p).unwrap();
        assert_eq!(common, 3.0);
        for j in 0..3 {
            let r = res.baseline_partition.radius(j);
            assert!((r - 3.0).abs() <= 1e-9 * 3.0, "cluster {j} radius {r}");
            for d in 0..1 {
                assert!(
                    (res.baseline_partition.centroid(j)[d] - p.centroid(j)[d]).abs() <= 1e-9,
                    "centroid moved"
                );
            }
        }
    }

    #[test]
    fn equalize_radii_refuses_zero_radius_mixtures() {
        let ds = ds1(&[5.0, 5.0, 0.0, 2.0]);
        let p = part(&ds, &[0, 0, 1, 1], 2);
        match equalize_radii(&ds, &p) {
            Err(Error::Refusal(_)) => {}
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn radial_separation_examples() {
        let ds = ds1(&[-1.0, 1.0, 9.0, 11.0]);
        let p = part(&ds, &[0, 0, 1, 1], 2);

        let same = radial_separation(&ds, &p, 0, 1.0).unwrap();
        assert_eq!(same.dataset.as_flat(), ds.as_flat());

        let res = radial_separation(&ds, &p, 0, 1.4).unwrap();
        assert_eq!(res.dataset.point(2), &[13.0], "translated by +4");
        assert_eq!(res.dataset.point(3), &[15.0]);
        assert_eq!(res.dataset.point(0), &[-1.0], "reference fixed");
        match res.provenance {
            Provenance::RadialSeparation {
                decreased_inter_pairs,
                ..
            } => assert_eq!(decreased_inter_pairs, 0),
            ref other => panic!("unexpected provenance {other:?}"),
        }
    }

    #[test]
    fn radial_separation_on_kmeans_output_never_shrinks_gaps() {
        let mut rng = rng_from_seed(88);
        let mut rows = Vec::new();
        for center in [[0.0, 0.0], [8.0, 0.0], [0.0, 8.0], [8.0, 8.0], [4.0, 16.0]] {
            for _ in 0..6 {
                rows.push(vec![
                    center[0] + rng.gen_range(-1.0..1.0),
                    center[1] + rng.gen_range(-1.0..1.0),
                ]);
            }
        }
        let ds = Dataset::from_rows(rows).unwrap();
        let cfg = crate::kmeans::KmeansConfig::new(5).with_nstart(40).with_seed(6);
        let km = crate::kmeans::lloyd_kmeans(&ds, &cfg).unwrap();
        let res = radial_separation(&ds, &km.partition, 0, 1.1).unwrap();
        match res.provenance {
            Provenance::RadialSeparation {
                decreased_inter_pairs,
                ..
            } => assert_eq!(decreased_inter_pairs, 0, "Voronoi-like input must not lose gap"),
            ref other => panic!("unexpected provenance {other:?}"),
        }
    }

    #[test]
    fn motion_safe_shrink_arithmetic() {
        // d_min = 12 with R0 = 1: already safe, identity.
        let ds = ds1(&[-1.0, 1.0, 11.0, 13.0]);
        let p = part(&ds, &[0, 0, 1, 1], 2);
        let (res, r_safe) = ensure_motion_safe(&ds, &p).unwrap();
        assert_eq!(r_safe, 1.0);
        assert_eq!(res.dataset.as_flat(), ds.as_flat());

        // d_min = 3 with R0 = 1: λ = 0.5, R_safe = 0.5, equality case.
        let ds = ds1(&[-1.0, 1.0, 2.0, 4.0]);
        let p = part(&ds, &[0, 0, 1, 1], 2);
        let (res, r_safe) = ensure_motion_safe(&ds, &p).unwrap();
        assert_eq!(r_safe, 0.5);
        assert_eq!(res.dataset.point(0), &[-0.5]);
        assert_eq!(res.dataset.point(1), &[0.5]);
        assert_eq!(res.dataset.point(2), &[2.5]);
        assert_eq!(res.dataset.point(3), &[3.5]);
        assert!(4.0 * r_safe <= 3.0 - 2.0 * r_safe + 1e-12);
    }

    #[test]
    fn motion_safe_shrink_refuses_coincident_centroids() {
        let ds = Dataset::from_rows(vec![
            vec![-1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, -1.0],
            vec![0.0, 1.0],
        ])
        .unwrap();
        let p = part(&ds, &[0, 0, 1, 1], 2);
        match ensure_motion_safe(&ds, &p) {
            Err(Error::Refusal(_)) => {}
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn ideal_optimum_survives_rotations_after_motion_safe_shrink() {
        let mut rng = rng_from_seed(12);
        for trial in 0..3 {
            let mut rows = Vec::new();
            for center in [[0.0, 0.0], [10.0, 0.0], [0.0, 10.0], [10.0, 10.0]] {
                for _ in 0..3 {
                    rows.push(vec![
                        center[0] + rng.gen_range(-1.5..1.5),
                        center[1] + rng.gen_range(-1.5..1.5),
                    ]);
                }
            }
            let ds = Dataset::from_rows(rows).unwrap();
            let labels = [0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3];
            let p = part(&ds, &labels, 4);
            let (safe, _) = ensure_motion_safe(&ds, &p).unwrap();
            let before = kmeans_ideal(&safe.dataset, 4).unwrap();

            let mut spec = MotionSpec::identity(4, 2, 0);
            for j in 1..4 {
                spec.rotations[j] = random_rotation(2, &mut rng).concat();
            }
            let moved = apply_motion(&safe.dataset, &safe.baseline_partition, &spec).unwrap();
            let after = kmeans_ideal(&moved.dataset, 4).unwrap();
            assert_eq!(
                disagreement_count(&before.partition, &after.partition).unwrap(),
                0,
                "trial {trial}: rotation changed the optimum"
            );
        }
    }

    #[test]
    fn motion_safe_gate_examples() {
        let ds = ds1(&[-1.0, 1.0, 2.0, 4.0]);
        let p = part(&ds, &[0, 0, 1, 1], 2);
        let (baseline, _) = ensure_motion_safe(&ds, &p).unwrap();

        assert!(motion_safe(&baseline.dataset, &baseline).unwrap(), "baseline vs itself");

        // Cluster 1 moved directly away: still safe.
        let mut away = baseline.dataset.to_rows();
        away[2][0] += 2.0;
        away[3][0] += 2.0;
        let away = Dataset::from_rows(away).unwrap();
        assert!(motion_safe(&away, &baseline).unwrap());

        // Cluster 1 moved closer: unsafe.
        let mut closer = baseline.dataset.to_rows();
        closer[2][0] -= 1.0;
        closer[3][0] -= 1.0;
        let closer = Dataset::from_rows(closer).unwrap();
        assert!(!motion_safe(&closer, &baseline).unwrap());

        // Cluster stretched in place: not rigid, unsafe.
        let mut stretched = baseline.dataset.to_rows();
        stretched[3][0] += 0.5;
        let stretched = Dataset::from_rows(stretched).unwrap();
        assert!(!motion_safe(&stretched, &baseline).unwrap());
    }

    #[test]
    fn apply_motion_examples() {
        let ds = Dataset::from_rows(vec![
            vec![0.0, 0.0],
            vec![2.0, 0.0],
            vec![10.0, 0.0],
            vec![12.0, 0.0],
        ])
        .unwrap();
        let p = part(&ds, &[0, 0, 1, 1], 2);

        let identity = MotionSpec::identity(2, 2, 0);
        let same = apply_motion(&ds, &p, &identity).unwrap();
        assert_eq!(same.dataset.as_flat(), ds.as_flat());

        // 90° rotation of cluster 1 about its centroid (11, 0).
        let mut spec = MotionSpec::identity(2, 2, 0);
        spec.rotations[1] = vec![0.0, -1.0, 1.0, 0.0];
        let res = apply_motion(&ds, &p, &spec).unwrap();
        let c = res.baseline_partition.centroid(1);
        assert!((c[0] - 11.0).abs() < 1e-9 && c[1].abs() < 1e-9, "centroid fixed");
        let before = euclidean_distance(ds.point(2), ds.point(3)).unwrap();
        let after = euclidean_distance(res.dataset.point(2), res.dataset.point(3)).unwrap();
        assert!((before - after).abs() <= 1e-9);

        let mut skew = MotionSpec::identity(2, 2, 0);
        skew.rotations[1] = vec![1.0, 0.5, 0.0, 1.0];
        assert!(apply_motion(&ds, &p, &skew).is_err(), "non-orthogonal matrix");
    }

    #[test]
    fn apply_motion_preserves_intra_distances_under_random_motions() {
        let mut rng = rng_from_seed(3001);
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|_| (0..3).map(|_| rng.gen_range(-5.0..5.0)).collect())
            .collect();
        let ds = Dataset::from_rows(rows).unwrap();
        let labels: Vec<usize> = (0..12).map(|i| i % 3).collect();
        let p = part(&ds, &labels, 3);
        let mut spec = MotionSpec::identity(3, 3, 1);
        for j in [0usize, 2usize] {
            spec.rotations[j] = random_rotation(3, &mut rng).concat();
            spec.translations[j] = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        }
        let res = apply_motion(&ds, &p, &spec).unwrap();
        for a in 0..12 {
            for b in (a + 1)..12 {
                if labels[a] != labels[b] {
                    continue;
                }
                let before = euclidean_distance(ds.point(a), ds.point(b)).unwrap();
                let after = euclidean_distance(res.dataset.point(a), res.dataset.point(b)).unwrap();
                assert!((before - after).abs() <= 1e-9 * before.max(1.0));
            }
        }
    }

    #[test]
    fn random_motion_step_is_seeded_and_bounded() {
        let ds = Dataset::from_rows(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![10.0, 0.0],
            vec![11.0, 0.0],
            vec![0.0, 10.0],
            vec![1.0, 10.0],
        ])
        .unwrap();
        let p = part(&ds, &[0, 0, 1, 1, 2, 2], 3);
        let a = random_motion_step(&ds, &p, 7, 0.25).unwrap();
        let b = random_motion_step(&ds, &p, 7, 0.25).unwrap();
        assert_eq!(a, b, "same seed, same spec");
        let reference = a.reference_cluster;
        for (j, t) in a.translations.iter().enumerate() {
            let norm = t.iter().map(|v| v * v).sum::<f64>().sqrt();
            if j == reference {
                assert_eq!(norm, 0.0);
            } else {
                assert!(norm > 0.0 && norm <= 0.25 + 1e-12, "cluster {j} step {norm}");
            }
        }

        let tiny = random_motion_step(&ds, &p, 7, 1e-12).unwrap();
        for t in &tiny.translations {
            let norm = t.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(norm <= 1e-12, "steps vanish with step_max");
        }
    }

    #[test]
    fn gated_random_walk_stays_safe() {
        let ds = Dataset::from_rows(vec![
            vec![-1.0, 0.0],
            vec![1.0, 0.0],
            vec![19.0, 0.0],
            vec![21.0, 0.0],
            vec![9.0, 17.0],
            vec![11.0, 17.0],
        ])
        .unwrap();
        let p = part(&ds, &[0, 0, 1, 1, 2, 2], 3);
        let (baseline, r_safe) = ensure_motion_safe(&ds, &p).unwrap();
        let labels = baseline.baseline_partition.labels().to_vec();

        let mut current = baseline.dataset.clone();
        let mut accepted = 0;
        for step in 0..20u64 {
            let cur_part = Partition::from_labels(&current, labels.clone(), 3).unwrap();
            let spec = random_motion_step(&current, &cur_part, 1000 + step, r_safe).unwrap();
            let proposal = apply_motion(&current, &cur_part, &spec).unwrap();
            if motion_safe(&proposal.dataset, &baseline).unwrap() {
                current = proposal.dataset;
                accepted += 1;
                assert!(motion_safe(&current, &baseline).unwrap());
            }
        }
        assert!(accepted > 0, "some random steps must pass the gate");
    }
}
