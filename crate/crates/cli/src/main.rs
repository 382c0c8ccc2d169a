//! Command-line front end: clustering, cluster-preserving transforms,
//! consistency checks, and the experiment pipelines.
//!
//! Exit codes: 0 on success, 1 for validation/ingestion/usage errors, 2
//! when a mathematical precondition of the requested computation fails
//! (for example, a shrink on coincident centroids or an enumeration cap).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gammalab::bisect::{bisectional_auto_kmeans, BisectConfig};
use gammalab::consistency::{classify_gamma, convergent_check, gravitational_check};
use gammalab::dataset::Dataset;
use gammalab::error::{Error, Result};
use gammalab::experiment::{
    render_report, run_centric_experiment, run_direction_experiment, run_motion_experiment,
    ExperimentConfig, Report, ReportFormat,
};
use gammalab::io::{load_dataset, load_labels};
use gammalab::kmeans::{kmeans_cost, lloyd_kmeans, KmeansConfig};
use gammalab::kmlmst::kmeans_l_mst;
use gammalab::partition::{select_central_cluster, Partition};
use gammalab::single_link::single_link_k;
use gammalab::transforms::{
    centric_transform, ensure_motion_safe, equalize_radii, motion_safe, radial_separation,
    CentricSpec,
};

#[derive(Parser)]
#[command(
    name = "gammalab",
    version,
    about = "Cluster-preserving dataset transformations, clustering, and consistency checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster a dataset and emit one integer label per input row.
    Cluster(ClusterArgs),
    /// Apply a cluster-preserving transformation and emit the new points.
    Transform(TransformArgs),
    /// Compare an original and a transformed dataset.
    Check(CheckArgs),
    /// Run an end-to-end experiment and emit its report.
    Experiment(ExperimentArgs),
}

/// Column (or point-id) selections: comma-separated indices and inclusive
/// ranges, e.g. "0,2,4..7".
#[derive(Debug, Clone, Default)]
struct IndexList(Vec<usize>);

fn parse_index_list(s: &str) -> std::result::Result<IndexList, String> {
    let mut out = Vec::new();
    if s.trim().is_empty() {
        return Ok(IndexList(out));
    }
    for token in s.split(',') {
        let token = token.trim();
        if let Some((a, b)) = token.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| format!("bad range start in {token:?}"))?;
            let b: usize = b.trim().parse().map_err(|_| format!("bad range end in {token:?}"))?;
            if b < a {
                return Err(format!("range {token:?} runs backwards"));
            }
            out.extend(a..=b);
        } else {
            out.push(token.parse().map_err(|_| format!("bad index {token:?}"))?);
        }
    }
    Ok(IndexList(out))
}

#[derive(Args)]
struct SharedArgs {
    /// Input dataset: one point per line, whitespace- or comma-delimited.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Columns to keep, e.g. "0,2" or "0..31" (default: all).
    #[arg(long, value_parser = parse_index_list, default_value = "")]
    columns: IndexList,
    /// Precomputed partition file: one integer label per input row.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output format for structured results.
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Seed for every randomized stage.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    shared: SharedArgs,
    #[arg(long, value_enum)]
    algo: Algo,
    /// Cluster count (maximum for bisect).
    #[arg(long)]
    k: usize,
    /// Final cluster count for kmlmst (cuts l-1 heaviest center-MST edges).
    #[arg(long, default_value_t = 2)]
    l: usize,
    /// Number of random restarts for k-means stages.
    #[arg(long, default_value_t = 100)]
    nstart: usize,
    /// Cost-ratio below which a bisect split is accepted.
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Kmeans,
    Bisect,
    Kmlmst,
    Singlelink,
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    shared: SharedArgs,
    #[arg(long, value_enum)]
    kind: TransformKind,
    /// Contraction factor in (0, 1] for centric transforms.
    #[arg(long)]
    lambda: Option<f64>,
    /// Cluster to transform / reference cluster (default: the most
    /// central one).
    #[arg(long)]
    cluster: Option<usize>,
    /// Point ids for a subset-centric transform, e.g. "3,5,8..10".
    #[arg(long, value_parser = parse_index_list)]
    subset: Option<IndexList>,
    /// Restrict the contraction to these axes, e.g. "0,1".
    #[arg(long, value_parser = parse_index_list)]
    axes: Option<IndexList>,
    /// Center-distance multiplier for the separate transform (> 1 moves
    /// clusters apart).
    #[arg(long)]
    stretch: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TransformKind {
    Centric,
    Equalize,
    Separate,
    MotionSafeShrink,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    shared: SharedArgs,
    #[arg(long, value_enum)]
    kind: CheckKind,
    /// The transformed dataset to compare against --input.
    #[arg(long)]
    after: Option<PathBuf>,
    /// Cluster to inspect (default: the most central one).
    #[arg(long)]
    cluster: Option<usize>,
    /// Subset-pair samples for gravitational checks on large clusters.
    #[arg(long, default_value_t = 200)]
    samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckKind {
    Gamma,
    Gravitational,
    Convergent,
    MotionSafe,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    shared: SharedArgs,
    #[arg(long, value_enum)]
    kind: ExperimentKind,
    /// Cluster count for the golden-standard clustering.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 100)]
    nstart: usize,
    /// Shrink factors, comma-separated (default "0.8,0.6,0.4,0.2").
    #[arg(long)]
    lambdas: Option<String>,
    #[arg(long, default_value_t = 20)]
    motion_steps: usize,
    /// Translation cap per motion step (default: the computed safe radius).
    #[arg(long)]
    step_max: Option<f64>,
    /// Points sampled inside the target cluster for violation percentages.
    #[arg(long, default_value_t = 100)]
    sample_in: usize,
    /// Points sampled outside the target cluster.
    #[arg(long, default_value_t = 100)]
    sample_out: usize,
    /// Apply each lambda on top of the previous transform instead of on
    /// the original dataset.
    #[arg(long)]
    cumulative: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExperimentKind {
    Centric,
    Motion,
    Direction,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Refusal(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Cluster(args) => run_cluster(args),
        Command::Transform(args) => run_transform(args),
        Command::Check(args) => run_check(args),
        Command::Experiment(args) => run_experiment(args),
    }
}

fn read_input(shared: &SharedArgs) -> Result<Dataset> {
    let Some(path) = &shared.input else {
        return Err(Error::validation("--input is required for this command"));
    };
    let loaded = load_dataset(path, &shared.columns.0)?;
    if loaded.header_skipped {
        eprintln!("note: first row of {} treated as a header", path.display());
    }
    if loaded.rows_skipped > 0 {
        eprintln!(
            "note: {} rows of {} skipped for missing or non-numeric values",
            loaded.rows_skipped,
            path.display()
        );
    }
    Ok(loaded.dataset)
}

fn read_partition(shared: &SharedArgs, dataset: &Dataset) -> Result<Partition> {
    let Some(path) = &shared.labels else {
        return Err(Error::validation("--labels is required for this command"));
    };
    let labels = load_labels(path)?;
    let k = labels.iter().max().map_or(0, |m| m + 1);
    Partition::from_labels(dataset, labels, k)
}

/// Print the resolved configuration (one key per line) to stderr so stdout
/// stays machine-readable.
fn print_config(entries: &[(&str, String)]) {
    eprintln!("resolved config:");
    for (key, value) in entries {
        eprintln!("  {key} = {value}");
    }
}

fn emit(shared: &SharedArgs, text: &str) -> Result<()> {
    match &shared.output {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn format_point(point: &[f64]) -> String {
    let fields: Vec<String> = point.iter().map(|v| format!("{v}")).collect();
    fields.join(" ")
}

fn dataset_text(dataset: &Dataset) -> String {
    let mut out = String::new();
    for point in dataset.points() {
        out.push_str(&format_point(point));
        out.push('\n');
    }
    out
}

fn labels_text(labels: &[usize]) -> String {
    let mut out = String::new();
    for label in labels {
        out.push_str(&label.to_string());
        out.push('\n');
    }
    out
}

fn run_cluster(args: ClusterArgs) -> Result<()> {
    let dataset = read_input(&args.shared)?;
    print_config(&[
        ("command", "cluster".into()),
        ("algo", value_name(&args.algo)),
        ("input", display_path(&args.shared.input)),
        ("columns", format!("{:?}", args.shared.columns.0)),
        ("k", args.k.to_string()),
        ("l", args.l.to_string()),
        ("nstart", args.nstart.to_string()),
        ("seed", args.shared.seed.to_string()),
        (
            "threshold",
            args.threshold.map_or("default".into(), |t| t.to_string()),
        ),
    ]);
    let partition = match args.algo {
        Algo::Kmeans => {
            let cfg = KmeansConfig::new(args.k)
                .with_nstart(args.nstart)
                .with_seed(args.shared.seed);
            lloyd_kmeans(&dataset, &cfg)?.partition
        }
        Algo::Bisect => {
            let mut bcfg = BisectConfig::new(args.k);
            if let Some(t) = args.threshold {
                bcfg = bcfg.with_threshold(t);
            }
            let kcfg = KmeansConfig::new(2)
                .with_nstart(args.nstart)
                .with_seed(args.shared.seed);
            bisectional_auto_kmeans(&dataset, &bcfg, &kcfg)?.partition
        }
        Algo::Kmlmst => {
            let cfg = KmeansConfig::new(args.k)
                .with_nstart(args.nstart)
                .with_seed(args.shared.seed);
            kmeans_l_mst(&dataset, args.k, args.l, &cfg)?.partition
        }
        Algo::Singlelink => single_link_k(&dataset, args.k)?.0,
    };
    let labels = partition.labels().to_vec();
    let k_found = partition.k();
    let cost = kmeans_cost(&dataset, &partition)?;
    eprintln!("clusters found: {k_found}");
    eprintln!("cost: {cost}");
    match args.shared.format {
        Format::Table => {
            // The plain rendering IS a partition file, so `--output` (or a
            // stdout redirect) feeds straight back into --labels.
            emit(&args.shared, &labels_text(&labels))
        }
        Format::Json => {
            let doc = serde_json::json!({
                "algo": value_name(&args.algo),
                "k": k_found,
                "cost": cost,
                "seed": args.shared.seed,
                "labels": labels,
            });
            emit(&args.shared, &format!("{doc:#}\n"))
        }
    }
}

fn display_path(path: &Option<PathBuf>) -> String {
    path.as_ref()
        .map_or("none".into(), |p| p.display().to_string())
}

/// The kebab-case name a value enum uses on the command line.
fn value_name(value: &impl ValueEnum) -> String {
    value
        .to_possible_value()
        .map_or_else(|| "unknown".to_string(), |v| v.get_name().to_string())
}

fn run_transform(args: TransformArgs) -> Result<()> {
    let dataset = read_input(&args.shared)?;
    let partition = read_partition(&args.shared, &dataset)?;
    let central = select_central_cluster(&partition)?;
    let cluster = args.cluster.unwrap_or(central);
    print_config(&[
        ("command", "transform".into()),
        ("kind", value_name(&args.kind)),
        ("input", display_path(&args.shared.input)),
        ("labels", display_path(&args.shared.labels)),
        ("cluster", cluster.to_string()),
        (
            "lambda",
            args.lambda.map_or("none".into(), |v| v.to_string()),
        ),
        (
            "stretch",
            args.stretch.map_or("none".into(), |v| v.to_string()),
        ),
        ("seed", args.shared.seed.to_string()),
    ]);
    let result = match args.kind {
        TransformKind::Centric => {
            let Some(lambda) = args.lambda else {
                return Err(Error::validation("--lambda is required for centric transforms"));
            };
            let axis_mask = match &args.axes {
                None => None,
                Some(list) => {
                    let mut mask = vec![false; dataset.dim()];
                    for &axis in &list.0 {
                        if axis >= dataset.dim() {
                            return Err(Error::validation(format!(
                                "axis {axis} out of range for dimension {}",
                                dataset.dim()
                            )));
                        }
                        mask[axis] = true;
                    }
                    Some(mask)
                }
            };
            let spec = CentricSpec {
                cluster_id: cluster,
                lambda,
                subset: args.subset.as_ref().map(|s| s.0.clone()),
                axis_mask,
            };
            centric_transform(&dataset, &partition, &spec)?
        }
        TransformKind::Equalize => equalize_radii(&dataset, &partition)?.0,
        TransformKind::Separate => {
            let Some(stretch) = args.stretch else {
                return Err(Error::validation("--stretch is required for separate transforms"));
            };
            radial_separation(&dataset, &partition, cluster, stretch)?
        }
        TransformKind::MotionSafeShrink => ensure_motion_safe(&dataset, &partition)?.0,
    };
    eprintln!("provenance: {:?}", result.provenance);
    emit(&args.shared, &dataset_text(&result.dataset))
}

fn run_check(args: CheckArgs) -> Result<()> {
    let before = read_input(&args.shared)?;
    let after = match &args.after {
        Some(path) => load_dataset(path, &args.shared.columns.0)?.dataset,
        None => {
            return Err(Error::validation("--after is required for checks"));
        }
    };
    print_config(&[
        ("command", "check".into()),
        ("kind", value_name(&args.kind)),
        ("input", display_path(&args.shared.input)),
        ("after", display_path(&args.after)),
        ("labels", display_path(&args.shared.labels)),
        ("samples", args.samples.to_string()),
        ("seed", args.shared.seed.to_string()),
    ]);
    match args.kind {
        CheckKind::Gamma => {
            let partition = read_partition(&args.shared, &before)?;
            let report = classify_gamma(&before, &after, &partition)?;
            match args.shared.format {
                Format::Json => {
                    let doc = serde_json::to_string_pretty(&report)
                        .map_err(|e| Error::validation(e.to_string()))?;
                    emit(&args.shared, &format!("{doc}\n"))
                }
                Format::Table => emit(
                    &args.shared,
                    &format!(
                        "classification {:?}\nintra.increased {} of {}\ninter.decreased {} of {}\nviolation.pct {:.4}\n",
                        report.classification,
                        report.intra_increased,
                        report.intra_pairs_scanned,
                        report.inter_decreased,
                        report.inter_pairs_scanned,
                        report.violation_percentage
                    ),
                ),
            }
        }
        CheckKind::Gravitational => {
            let partition = read_partition(&args.shared, &before)?;
            let cluster = match args.cluster {
                Some(c) => c,
                None => select_central_cluster(&partition)?,
            };
            let report = gravitational_check(
                &before,
                &after,
                &partition,
                cluster,
                args.samples,
                args.shared.seed,
            )?;
            match args.shared.format {
                Format::Json => {
                    let doc = serde_json::to_string_pretty(&report)
                        .map_err(|e| Error::validation(e.to_string()))?;
                    emit(&args.shared, &format!("{doc}\n"))
                }
                Format::Table => emit(
                    &args.shared,
                    &format!(
                        "gravitational.ok {}\nworst.excess {}\npairs.checked {}\n",
                        report.ok, report.worst_excess, report.pairs_checked
                    ),
                ),
            }
        }
        CheckKind::Convergent => {
            let verdict = convergent_check(&before, &after)?;
            emit(&args.shared, &format!("convergent {verdict}\n"))
        }
        CheckKind::MotionSafe => {
            let partition = read_partition(&args.shared, &before)?;
            let (baseline, _) = ensure_motion_safe(&before, &partition)?;
            let verdict = motion_safe(&after, &baseline)?;
            emit(&args.shared, &format!("motion.safe {verdict}\n"))
        }
    }
}

fn run_experiment(args: ExperimentArgs) -> Result<()> {
    let needs_k = !matches!(args.kind, ExperimentKind::Direction);
    let k = match (args.k, needs_k) {
        (Some(k), _) => k,
        (None, false) => 2,
        (None, true) => {
            return Err(Error::validation("--k is required for this experiment"));
        }
    };
    let mut config = ExperimentConfig::new(k);
    config.input = args.shared.input.clone();
    config.columns = args.shared.columns.0.clone();
    config.nstart = args.nstart;
    config.seed = args.shared.seed;
    config.motion_steps = args.motion_steps;
    config.step_max = args.step_max;
    config.sample_in = args.sample_in;
    config.sample_out = args.sample_out;
    config.cumulative_lambdas = args.cumulative;
    if let Some(text) = &args.lambdas {
        let mut lambdas = Vec::new();
        for token in text.split(',') {
            let lambda: f64 = token
                .trim()
                .parse()
                .map_err(|_| Error::validation(format!("bad lambda {token:?}")))?;
            lambdas.push(lambda);
        }
        config.lambdas = lambdas;
    }
    eprintln!(
        "resolved config: {}",
        serde_json::to_string(&config).map_err(|e| Error::validation(e.to_string()))?
    );
    let report = match args.kind {
        ExperimentKind::Centric => {
            let dataset = read_input(&args.shared)?;
            Report::Centric(run_centric_experiment(&dataset, &config)?)
        }
        ExperimentKind::Motion => {
            let dataset = read_input(&args.shared)?;
            Report::Motion(run_motion_experiment(&dataset, &config)?)
        }
        ExperimentKind::Direction => Report::Direction(run_direction_experiment(&config)?),
    };
    let format = match args.shared.format {
        Format::Json => ReportFormat::Json,
        Format::Table => ReportFormat::Table,
    };
    emit(&args.shared, &render_report(&report, format)?)
}
