//! Checkers that classify how a transformed dataset relates to a partition:
//! the distance-based consistency scan, its sampled percentage variant, the
//! gravity-center subset test, and the distance-order/ratio test.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::geometry::{centroid, euclidean_distance};
use crate::partition::{PairClass, Partition};
use crate::rng::rng_from_seed;

/// Relative tolerance on all distance comparisons; exact equality counts
/// as compliant since the underlying inequalities are non-strict.
pub const REL_TOL: f64 = 1e-9;

/// How a (before, after) pair relates to the consistency axioms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GammaClass {
    /// No intra distance grew and no inter distance shrank.
    FullGamma,
    /// Compliant, and additionally every inter distance is unchanged.
    InnerOnly,
    /// Compliant, and additionally every intra distance is unchanged.
    OuterOnly,
    /// At least one distance moved the forbidden way.
    NotGamma,
}

/// Outcome of the exhaustive pair scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    /// Same-cluster pairs with d′ > d(1 + tol).
    pub intra_increased: usize,
    /// Different-cluster pairs with d′ < d(1 − tol).
    pub inter_decreased: usize,
    pub intra_pairs_scanned: usize,
    pub inter_pairs_scanned: usize,
    /// 100 · inter_decreased / inter_pairs_scanned (0 when no inter pairs).
    pub violation_percentage: f64,
    pub classification: GammaClass,
}

fn same_shape(before: &Dataset, after: &Dataset) -> Result<()> {
    if before.len() != after.len() || before.dim() != after.dim() {
        return Err(Error::validation(format!(
            "dataset shapes differ: {}x{} vs {}x{}",
            before.len(),
            before.dim(),
            after.len(),
            after.dim()
        )));
    }
    Ok(())
}

/// Exhaustive scan of all point pairs, classifying the transformation.
///
/// When both violation counts are zero, the refinements are checked: all
/// inter distances unchanged → [`GammaClass::InnerOnly`], all intra
/// unchanged → [`GammaClass::OuterOnly`]; both (e.g. the identity) or
/// neither → [`GammaClass::FullGamma`].
pub fn classify_gamma(
    before: &Dataset,
    after: &Dataset,
    partition: &Partition,
) -> Result<ViolationReport> {
    same_shape(before, after)?;
    partition.ensure_matches(before)?;
    let n = before.len();
    let mut intra_increased = 0usize;
    let mut inter_decreased = 0usize;
    let mut intra_pairs = 0usize;
    let mut inter_pairs = 0usize;
    let mut all_inter_equal = true;
    let mut all_intra_equal = true;
    for a in 0..n {
        for b in (a + 1)..n {
            let d = euclidean_distance(before.point(a), before.point(b))?;
            let dp = euclidean_distance(after.point(a), after.point(b))?;
            let equal = (dp - d).abs() <= REL_TOL * d;
            match partition.pair_class(a, b) {
                PairClass::IntraCluster => {
                    intra_pairs += 1;
                    if dp > d * (1.0 + REL_TOL) {
                        intra_increased += 1;
                    }
                    all_intra_equal &= equal;
                }
                PairClass::InterCluster => {
                    inter_pairs += 1;
                    if dp < d * (1.0 - REL_TOL) {
                        inter_decreased += 1;
                    }
                    all_inter_equal &= equal;
                }
            }
        }
    }
    let classification = if intra_increased > 0 || inter_decreased > 0 {
        GammaClass::NotGamma
    } else if all_inter_equal && !all_intra_equal {
        GammaClass::InnerOnly
    } else if all_intra_equal && !all_inter_equal {
        GammaClass::OuterOnly
    } else {
        GammaClass::FullGamma
    };
    let violation_percentage = if inter_pairs == 0 {
        0.0
    } else {
        100.0 * inter_decreased as f64 / inter_pairs as f64
    };
    Ok(ViolationReport {
        intra_increased,
        inter_decreased,
        intra_pairs_scanned: intra_pairs,
        inter_pairs_scanned: inter_pairs,
        violation_percentage,
        classification,
    })
}

/// Sampling instructions for [`sampled_violation_percentage`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub target_cluster: usize,
    /// Points drawn from the target cluster (capped at its size).
    pub sample_in: usize,
    /// Points drawn from the rest of the dataset (capped at availability).
    pub sample_out: usize,
    pub seed: u64,
}

impl SamplePlan {
    pub fn new(target_cluster: usize, seed: u64) -> Self {
        SamplePlan {
            target_cluster,
            sample_in: 100,
            sample_out: 100,
            seed,
        }
    }
}

fn sample_without_replacement(
    pool: &[usize],
    count: usize,
    rng: &mut impl Rng,
) -> Vec<usize> {
    let mut v = pool.to_vec();
    let take = count.min(v.len());
    for i in 0..take {
        let j = rng.gen_range(i..v.len());
        v.swap(i, j);
    }
    v.truncate(take);
    v
}

/// Percentage of sampled cross pairs (target cluster × complement) whose
/// distance decreased: 100 · #{d′ < d(1 − tol)} / (n_in · n_out). Samples
/// are uniform without replacement and capped at what is available, so
/// over-sized plans degrade to the exhaustive percentage.
pub fn sampled_violation_percentage(
    before: &Dataset,
    after: &Dataset,
    partition: &Partition,
    plan: &SamplePlan,
) -> Result<f64> {
    same_shape(before, after)?;
    partition.ensure_matches(before)?;
    if plan.target_cluster >= partition.k() {
        return Err(Error::validation(format!(
            "target cluster {} out of range (k = {})",
            plan.target_cluster,
            partition.k()
        )));
    }
    if plan.sample_in == 0 || plan.sample_out == 0 {
        return Err(Error::validation("sample sizes must be at least 1"));
    }
    let inside = partition.members(plan.target_cluster);
    let outside: Vec<usize> = (0..before.len())
        .filter(|&i| partition.label(i) != plan.target_cluster)
        .collect();
    if outside.is_empty() {
        return Err(Error::validation(
            "the complement of the target cluster is empty",
        ));
    }
    let mut rng = rng_from_seed(plan.seed);
    let picked_in = sample_without_replacement(&inside, plan.sample_in, &mut rng);
    let picked_out = sample_without_replacement(&outside, plan.sample_out, &mut rng);
    let mut violated = 0usize;
    for &i in &picked_in {
        for &o in &picked_out {
            let d = euclidean_distance(before.point(i), before.point(o))?;
            let dp = euclidean_distance(after.point(i), after.point(o))?;
            if dp < d * (1.0 - REL_TOL) {
                violated += 1;
            }
        }
    }
    Ok(100.0 * violated as f64 / (picked_in.len() * picked_out.len()) as f64)
}

/// Outcome of [`gravitational_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GravitationalReport {
    pub ok: bool,
    /// Largest amount by which a subset-pair gravity-center distance grew
    /// past its tolerance-adjusted bound; 0 when compliant.
    pub worst_excess: f64,
    pub pairs_checked: u64,
}

/// Checks that gravity centers of disjoint subsets of one cluster do not
/// move apart: for subset pair (S₁, S₂), ‖μ(S₁′) − μ(S₂′)‖ must not exceed
/// ‖μ(S₁) − μ(S₂)‖(1 + tol). Exhaustive over all disjoint non-empty subset
/// pairs for clusters of at most 10 points, sampled (`n_samples` seeded
/// draws) above that.
pub fn gravitational_check(
    before: &Dataset,
    after: &Dataset,
    partition: &Partition,
    cluster_id: usize,
    n_samples: usize,
    seed: u64,
) -> Result<GravitationalReport> {
    same_shape(before, after)?;
    partition.ensure_matches(before)?;
    if cluster_id >= partition.k() {
        return Err(Error::validation(format!(
            "cluster {cluster_id} out of range (k = {})",
            partition.k()
        )));
    }
    let members = partition.members(cluster_id);
    let s = members.len();
    if s < 2 {
        return Err(Error::validation("gravitational check needs a cluster of size >= 2"));
    }

    let mut worst = 0.0f64;
    let mut pairs_checked = 0u64;
    let mut check = |assignment: &[u8]| -> Result<()> {
        let s1: Vec<usize> = members
            .iter()
            .zip(assignment)
            .filter(|(_, &c)| c == 1)
            .map(|(&m, _)| m)
            .collect();
        let s2: Vec<usize> = members
            .iter()
            .zip(assignment)
            .filter(|(_, &c)| c == 2)
            .map(|(&m, _)| m)
            .collect();
        let d = euclidean_distance(&centroid(before, &s1)?, &centroid(before, &s2)?)?;
        let dp = euclidean_distance(&centroid(after, &s1)?, &centroid(after, &s2)?)?;
        let excess = dp - d * (1.0 + REL_TOL);
        if excess > worst {
            worst = excess;
        }
        pairs_checked += 1;
        Ok(())
    };

    if s <= 10 {
        // Every assignment of members to {unused, S1, S2}; the first
        // classified member is pinned to S1 so each unordered pair appears
        // once.
        let mut assignment = vec![0u8; s];
        loop {
            let mut has1 = false;
            let mut has2 = false;
            let mut first_classified = 0u8;
            for &c in &assignment {
                if c != 0 && first_classified == 0 {
                    first_classified = c;
                }
                has1 |= c == 1;
                has2 |= c == 2;
            }
            if has1 && has2 && first_classified == 1 {
                check(&assignment)?;
            }
            // Increment base-3 counter.
            let mut pos = 0;
            loop {
                if pos == s {
                    break;
                }
                assignment[pos] += 1;
                if assignment[pos] < 3 {
                    break;
                }
                assignment[pos] = 0;
                pos += 1;
            }
            if pos == s {
                break;
            }
        }
    } else {
        if n_samples == 0 {
            return Err(Error::validation("n_samples must be at least 1 for sampled mode"));
        }
        let mut rng = rng_from_seed(seed);
        let mut assignment = vec![0u8; s];
        for _ in 0..n_samples {
            loop {
                let mut has1 = false;
                let mut has2 = false;
                for c in assignment.iter_mut() {
                    *c = rng.gen_range(0..3u8);
                    has1 |= *c == 1;
                    has2 |= *c == 2;
                }
                if has1 && has2 {
                    break;
                }
            }
            check(&assignment)?;
        }
    }
    Ok(GravitationalReport {
        ok: worst <= 0.0,
        worst_excess: worst.max(0.0),
        pairs_checked,
    })
}

/// Largest point count [`convergent_check`] accepts; the scan is quadratic
/// in the number of point pairs.
pub const CONVERGENT_CAP: usize = 200;

/// Whether the transformation preserves the distance order and never
/// shrinks the ratio of a smaller distance to a larger one: for all pairs
/// p, q with d_p ≤ d_q, both d′_p ≤ d′_q and d_p/d_q ≤ d′_p/d′_q (checked
/// cross-multiplied) must hold.
pub fn convergent_check(before: &Dataset, after: &Dataset) -> Result<bool> {
    same_shape(before, after)?;
    let n = before.len();
    if n > CONVERGENT_CAP {
        return Err(Error::refusal(format!(
            "convergent_check scans all pairs of pairs and is capped at n = {CONVERGENT_CAP}; got n = {n}"
        )));
    }
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in (a + 1)..n {
            pairs.push((
                euclidean_distance(before.point(a), before.point(b))?,
                euclidean_distance(after.point(a), after.point(b))?,
            ));
        }
    }
    let holds = |(d_p, dp_p): (f64, f64), (d_q, dp_q): (f64, f64)| -> bool {
        // Order clause and ratio clause for d_p ≤ d_q.
        if dp_p > dp_q * (1.0 + REL_TOL) {
            return false;
        }
        let lhs = d_p * dp_q;
        let rhs = dp_p * d_q;
        lhs <= rhs + REL_TOL * lhs.max(rhs)
    };
    for i in 0..pairs.len() {
        for j in (i + 1)..pairs.len() {
            let (p, q) = (pairs[i], pairs[j]);
            if p.0 <= q.0 && !holds(p, q) {
                return Ok(false);
            }
            if q.0 <= p.0 && !holds(q, p) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
