//! End-to-end experiment pipelines: golden-standard clustering followed by
//! centric shrinks, safe rigid motion walks, or direction sweeps, each
//! producing a serializable table-shaped report.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::consistency::{sampled_violation_percentage, SamplePlan, REL_TOL};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::geometry::euclidean_distance;
use crate::kmeans::{lloyd_kmeans, KmeansConfig};
use crate::partition::{disagreement_count, select_central_cluster, Partition};
use crate::rng::derive_seed;
use crate::synth::ball_clusters;
use crate::transforms::{
    apply_motion, centric_transform, ensure_motion_safe, motion_safe, random_motion_step,
    CentricSpec,
};

// Disjoint channels of the experiment seed, so reclustering, violation
// sampling, step drawing, and data generation are independent streams.
const CH_RECLUSTER: u64 = 0x0100;
const CH_SAMPLE: u64 = 0x0300;
const CH_STEP_DRAW: u64 = 0x0600;
const CH_DATA: u64 = 0x0700;

/// Shared knobs for all experiment kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Recorded origin of the data (informational; loading happens at the
    /// call site so experiments also run on in-memory datasets).
    pub input: Option<PathBuf>,
    /// Column indices the dataset was built from (empty = all).
    pub columns: Vec<usize>,
    pub k: usize,
    pub nstart: usize,
    pub seed: u64,
    /// Shrink factors for the centric experiment.
    pub lambdas: Vec<f64>,
    pub motion_steps: usize,
    /// Translation cap per motion step; defaults to the safe radius
    /// computed by the shrink stage.
    pub step_max: Option<f64>,
    pub sample_in: usize,
    pub sample_out: usize,
    /// Apply each λ on top of the previous transform instead of on the
    /// original dataset.
    pub cumulative_lambdas: bool,
}

impl ExperimentConfig {
    pub fn new(k: usize) -> Self {
        ExperimentConfig {
            input: None,
            columns: Vec::new(),
            k,
            nstart: 100,
            seed: 0,
            lambdas: vec![0.8, 0.6, 0.4, 0.2],
            motion_steps: 20,
            step_max: None,
            sample_in: 100,
            sample_out: 100,
            cumulative_lambdas: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.nstart == 0 {
            return Err(Error::validation("k and nstart must be at least 1"));
        }
        if self.motion_steps == 0 {
            return Err(Error::validation("motion_steps must be at least 1"));
        }
        if self.sample_in == 0 || self.sample_out == 0 {
            return Err(Error::validation("sample sizes must be at least 1"));
        }
        for &lambda in &self.lambdas {
            if !(lambda > 0.0 && lambda <= 1.0) {
                return Err(Error::validation(format!(
                    "lambda values must lie in (0, 1], got {lambda}"
                )));
            }
        }
        if let Some(s) = self.step_max {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::validation(format!(
                    "step_max must be positive and finite, got {s}"
                )));
            }
        }
        Ok(())
    }

    fn kmeans_config(&self) -> KmeansConfig {
        KmeansConfig::new(self.k)
            .with_nstart(self.nstart)
            .with_seed(self.seed)
    }
}

/// One λ row of the centric experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentricRow {
    pub lambda: f64,
    pub disagreements: usize,
    pub violation_percentage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentricExperimentReport {
    pub config: ExperimentConfig,
    pub golden_cost: f64,
    /// Cluster the shrink was applied to (the most central one).
    pub central_cluster: usize,
    pub rows: Vec<CentricRow>,
    pub wall_time_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionExperimentReport {
    pub config: ExperimentConfig,
    pub golden_cost: f64,
    /// Common cluster radius after the double shrink.
    pub safe_radius: f64,
    /// Violation percentage and disagreements right after the shrink,
    /// measured against the original data and the golden clustering.
    pub center_dst: f64,
    pub center_clu: usize,
    /// Maxima over accepted steps, measured against the post-shrink
    /// baseline configuration.
    pub motion_dst: f64,
    pub motion_clu: usize,
    /// Maxima over accepted steps, measured against the previous accepted
    /// configuration.
    pub step_dst: f64,
    pub step_clu: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub wall_time_seconds: f64,
}

/// One row of a direction sweep: a rotation angle in degrees or a shift
/// fraction, with the count of inter-cluster pairs whose distance shrank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionRow {
    pub angle_or_shift: f64,
    pub bad_distances: usize,
    pub bad_percentage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionExperimentReport {
    pub config: ExperimentConfig,
    /// Two clusters; one moves by a tenth of the center distance in
    /// directions rotated off the center line.
    pub rotation_rows: Vec<DirectionRow>,
    /// Five clusters; the top one moves outward by a fraction of the
    /// center distance.
    pub shift_rows: Vec<DirectionRow>,
    pub wall_time_seconds: f64,
}

/// Any experiment outcome, tagged for serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Report {
    Centric(CentricExperimentReport),
    Motion(MotionExperimentReport),
    Direction(DirectionExperimentReport),
}

/// Golden-standard clustering, then one independent centric shrink of the
/// central cluster per λ, reclustering each result with a fresh derived
/// seed and recording disagreements plus the sampled violation percentage
/// against the original coordinates.
pub fn run_centric_experiment(
    dataset: &Dataset,
    config: &ExperimentConfig,
) -> Result<CentricExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let kcfg = config.kmeans_config();
    let golden = lloyd_kmeans(dataset, &kcfg)?;
    let central = select_central_cluster(&golden.partition)?;
    let mut rows = Vec::with_capacity(config.lambdas.len());
    let mut base = dataset.clone();
    for (i, &lambda) in config.lambdas.iter().enumerate() {
        let source = if config.cumulative_lambdas { &base } else { dataset };
        let spec = CentricSpec::full_cluster(central, lambda);
        let transformed = centric_transform(source, &golden.partition, &spec)?;
        let recfg = kcfg
            .clone()
            .with_seed(derive_seed(config.seed, CH_RECLUSTER + i as u64));
        let reclustered = lloyd_kmeans(&transformed.dataset, &recfg)?;
        let disagreements = disagreement_count(&golden.partition, &reclustered.partition)?;
        let plan = SamplePlan {
            target_cluster: central,
            sample_in: config.sample_in,
            sample_out: config.sample_out,
            seed: derive_seed(config.seed, CH_SAMPLE + i as u64),
        };
        let violation_percentage =
            sampled_violation_percentage(dataset, &transformed.dataset, &golden.partition, &plan)?;
        rows.push(CentricRow {
            lambda,
            disagreements,
            violation_percentage,
        });
        if config.cumulative_lambdas {
            base = transformed.dataset;
        }
    }
    Ok(CentricExperimentReport {
        config: config.clone(),
        golden_cost: golden.cost,
        central_cluster: central,
        rows,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Golden-standard clustering, the double shrink (equalize radii, then
/// shrink until rigid motions cannot create ambiguity), then a random
/// translation walk where every step is accepted only if the safety
/// predicate still holds; rejected steps are rolled back and counted.
pub fn run_motion_experiment(
    dataset: &Dataset,
    config: &ExperimentConfig,
) -> Result<MotionExperimentReport> {
    config.validate()?;
    if config.k < 2 {
        return Err(Error::validation(
            "the motion experiment needs k >= 2 so cross-cluster pairs exist",
        ));
    }
    let start = Instant::now();
    let kcfg = config.kmeans_config();
    let golden = lloyd_kmeans(dataset, &kcfg)?;
    let central = select_central_cluster(&golden.partition)?;

    let (shrunk, safe_radius) = ensure_motion_safe(dataset, &golden.partition)?;
    let recfg = kcfg
        .clone()
        .with_seed(derive_seed(config.seed, CH_RECLUSTER));
    let baseline_clustering = lloyd_kmeans(&shrunk.dataset, &recfg)?;
    let center_clu = disagreement_count(&golden.partition, &baseline_clustering.partition)?;
    let plan_at = |index: u64| SamplePlan {
        target_cluster: central,
        sample_in: config.sample_in,
        sample_out: config.sample_out,
        seed: derive_seed(config.seed, CH_SAMPLE + index),
    };
    let center_dst =
        sampled_violation_percentage(dataset, &shrunk.dataset, &golden.partition, &plan_at(0))?;

    let step_max = match config.step_max {
        Some(s) => s,
        None => safe_radius,
    };
    if !(step_max > 0.0) {
        return Err(Error::validation(
            "degenerate configuration: the safe radius is zero, pass an explicit step_max",
        ));
    }

    let mut current = shrunk.dataset.clone();
    let mut prev_dataset = shrunk.dataset.clone();
    let mut prev_partition = baseline_clustering.partition.clone();
    let mut motion_dst = 0.0f64;
    let mut motion_clu = 0usize;
    let mut step_dst = 0.0f64;
    let mut step_clu = 0usize;
    let mut accepted_steps = 0usize;
    let mut rejected_steps = 0usize;
    for s in 0..config.motion_steps {
        let draw_seed = derive_seed(config.seed, CH_STEP_DRAW + s as u64);
        let spec = random_motion_step(&current, &golden.partition, draw_seed, step_max)?;
        let candidate = apply_motion(&current, &golden.partition, &spec)?;
        if !motion_safe(&candidate.dataset, &shrunk)? {
            rejected_steps += 1;
            continue;
        }
        accepted_steps += 1;
        current = candidate.dataset;
        let recfg = kcfg
            .clone()
            .with_seed(derive_seed(config.seed, CH_RECLUSTER + 1 + s as u64));
        let reclustered = lloyd_kmeans(&current, &recfg)?;
        motion_clu = motion_clu
            .max(disagreement_count(&baseline_clustering.partition, &reclustered.partition)?);
        motion_dst = motion_dst.max(sampled_violation_percentage(
            &shrunk.dataset,
            &current,
            &golden.partition,
            &plan_at(1 + 2 * s as u64),
        )?);
        step_clu = step_clu.max(disagreement_count(&prev_partition, &reclustered.partition)?);
        step_dst = step_dst.max(sampled_violation_percentage(
            &prev_dataset,
            &current,
            &golden.partition,
            &plan_at(2 + 2 * s as u64),
        )?);
        prev_dataset = current.clone();
        prev_partition = reclustered.partition;
    }
    Ok(MotionExperimentReport {
        config: config.clone(),
        golden_cost: golden.cost,
        safe_radius,
        center_dst,
        center_clu,
        motion_dst,
        motion_clu,
        step_dst,
        step_clu,
        accepted_steps,
        rejected_steps,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Count inter-cluster pairs between `moved` and every other cluster whose
/// distance strictly decreased after translating `moved` by `shift`.
fn decreased_pairs(
    data: &Dataset,
    partition: &Partition,
    moved: usize,
    shift: &[f64],
) -> Result<usize> {
    let mut bad = 0usize;
    for i in 0..data.len() {
        if partition.label(i) != moved {
            continue;
        }
        let moved_point: Vec<f64> = data
            .point(i)
            .iter()
            .zip(shift)
            .map(|(&c, &s)| c + s)
            .collect();
        for o in 0..data.len() {
            if partition.label(o) == moved {
                continue;
            }
            let d = euclidean_distance(data.point(i), data.point(o))?;
            let dp = euclidean_distance(&moved_point, data.point(o))?;
            if dp < d * (1.0 - REL_TOL) {
                bad += 1;
            }
        }
    }
    Ok(bad)
}

/// Two generated sweeps on uniform disk clusters (radius 1, 100 points
/// each, centers six radii apart). Sweep one translates one of two
/// clusters by a tenth of the center distance in directions rotated off
/// the center-connecting line; sweep two pushes the top of five clusters
/// outward by a growing fraction of the center distance. Both count the
/// inter-cluster pairs whose distance decreased.
pub fn run_direction_experiment(config: &ExperimentConfig) -> Result<DirectionExperimentReport> {
    config.validate()?;
    if config.input.is_some() {
        return Err(Error::validation(
            "the direction experiment generates its own 2D data; it takes no input file",
        ));
    }
    let start = Instant::now();
    let per_cluster = 100usize;
    let center_gap = 6.0f64;

    // Sweep 1: two clusters on the x axis; the second one moves.
    let centers = vec![vec![0.0, 0.0], vec![center_gap, 0.0]];
    let pair = ball_clusters(&centers, per_cluster, 1.0, derive_seed(config.seed, CH_DATA))?;
    let pair_partition = pair.partition()?;
    let step = 0.1 * center_gap;
    let mut rotation_rows = Vec::new();
    for &angle in &[-90.0f64, -60.0, -30.0, 0.0, 30.0, 60.0, 90.0] {
        let theta = angle.to_radians();
        let shift = [step * theta.cos(), step * theta.sin()];
        let bad = decreased_pairs(&pair.dataset, &pair_partition, 1, &shift)?;
        let total = per_cluster * per_cluster;
        rotation_rows.push(DirectionRow {
            angle_or_shift: angle,
            bad_distances: bad,
            bad_percentage: 100.0 * bad as f64 / total as f64,
        });
    }

    // Sweep 2: a central cluster with neighbors above, diagonally above,
    // and below; the top cluster moves straight up, perpendicular to its
    // border with the central one.
    let centers = vec![
        vec![0.0, 0.0],
        vec![0.0, center_gap],
        vec![-center_gap, center_gap],
        vec![center_gap, center_gap],
        vec![0.0, -center_gap],
    ];
    let five = ball_clusters(&centers, per_cluster, 1.0, derive_seed(config.seed, CH_DATA + 1))?;
    let five_partition = five.partition()?;
    let mut shift_rows = Vec::new();
    for i in 0..=10u32 {
        let fraction = f64::from(i) / 10.0;
        let shift = [0.0, fraction * center_gap];
        let bad = decreased_pairs(&five.dataset, &five_partition, 1, &shift)?;
        let total = per_cluster * per_cluster * (centers.len() - 1);
        shift_rows.push(DirectionRow {
            angle_or_shift: fraction,
            bad_distances: bad,
            bad_percentage: 100.0 * bad as f64 / total as f64,
        });
    }

    Ok(DirectionExperimentReport {
        config: config.clone(),
        rotation_rows,
        shift_rows,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Table,
}

fn aligned_table(rows: &[Vec<String>]) -> String {
    let columns = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut widths = vec![0usize; columns];
    for row in rows {
        for (c, cell) in row.iter().enumerate() {
            widths[c] = widths[c].max(cell.len());
        }
    }
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c > 0 {
                line.push_str("  ");
            }
            line.push_str(cell);
            let pad = widths[c].saturating_sub(cell.len());
            if c + 1 < row.len() {
                line.extend(std::iter::repeat(' ').take(pad));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// Render a report as a stable-key JSON document or an aligned text table.
pub fn render_report(report: &Report, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => {
            let mut text = serde_json::to_string_pretty(report)
                .map_err(|e| Error::validation(format!("report serialization failed: {e}")))?;
            text.push('\n');
            Ok(text)
        }
        ReportFormat::Table => Ok(match report {
            Report::Centric(r) => {
                let mut rows = vec![vec![
                    "lambda".to_string(),
                    "disagreements".to_string(),
                    "violation.pct".to_string(),
                ]];
                for row in &r.rows {
                    rows.push(vec![
                        format!("{:.2}", row.lambda),
                        row.disagreements.to_string(),
                        format!("{:.4}", row.violation_percentage),
                    ]);
                }
                format!(
                    "golden.cost {:.6}\ncentral.cluster {}\n{}",
                    r.golden_cost,
                    r.central_cluster,
                    aligned_table(&rows)
                )
            }
            Report::Motion(r) => {
                let rows = vec![
                    vec![
                        "center.dst".to_string(),
                        "center.clu".to_string(),
                        "motion.dst".to_string(),
                        "motion.clu".to_string(),
                        "step.dst".to_string(),
                        "step.clu".to_string(),
                        "accepted.steps".to_string(),
                        "rejected.steps".to_string(),
                    ],
                    vec![
                        format!("{:.4}", r.center_dst),
                        r.center_clu.to_string(),
                        format!("{:.4}", r.motion_dst),
                        r.motion_clu.to_string(),
                        format!("{:.4}", r.step_dst),
                        r.step_clu.to_string(),
                        r.accepted_steps.to_string(),
                        r.rejected_steps.to_string(),
                    ],
                ];
                format!(
                    "golden.cost {:.6}\nsafe.radius {:.6}\n{}",
                    r.golden_cost,
                    r.safe_radius,
                    aligned_table(&rows)
                )
            }
            Report::Direction(r) => {
                let header = |first: &str| {
                    vec![
                        first.to_string(),
                        "bad.distances".to_string(),
                        "bad.pct".to_string(),
                    ]
                };
                let mut rows = vec![header("rotation.deg")];
                for row in &r.rotation_rows {
                    rows.push(vec![
                        format!("{}", row.angle_or_shift),
                        row.bad_distances.to_string(),
                        format!("{:.4}", row.bad_percentage),
                    ]);
                }
                let mut out = aligned_table(&rows);
                out.push('\n');
                let mut rows = vec![header("shift")];
                for row in &r.shift_rows {
                    rows.push(vec![
                        format!("{:.1}", row.angle_or_shift),
                        row.bad_distances.to_string(),
                        format!("{:.4}", row.bad_percentage),
                    ]);
                }
                out.push_str(&aligned_table(&rows));
                out
            }
        }),
    }
}

/// Write a rendered report to disk.
pub fn write_report(report: &Report, path: &Path, format: ReportFormat) -> Result<()> {
    let text = render_report(report, format)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Read back a JSON report written by [`write_report`].
pub fn load_report(path: &Path) -> Result<Report> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::ingestion(format!("{}: not a report document: {e}", path.display())))
}
