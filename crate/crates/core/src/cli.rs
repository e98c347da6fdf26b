//! Command-line front end: `gen`, `features`, `detect`, `eval`, `stability`.

use std::ffi::OsString;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::classifiers::ClassifierModel;
use crate::config::{stability_guard, RunConfig};
use crate::error::{Error, Result};
use crate::eval::{
    density_ratio, global_percentage, score_against_truth, score_classes_against_truth, stability_overlap,
    write_density_csv, DensityTable, SetOverlap,
};
use crate::features::{extract_features, RegionSet};
use crate::pipeline::{
    compare_detectors, definition_oracle, run_detection_detailed, run_one_vs_rest, run_with_model,
    DetectionOutcome, DetectionReport,
};
use crate::synthgen::{generate, PlantedTruth};

#[derive(Debug, Parser)]
#[command(name = "globalness", version, about = "Detect nodes whose ties span several regions")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic graph from the config's `synth` block.
    Gen,
    /// Write the feature matrix as CSV.
    Features {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train (or load) a classifier and flag global nodes.
    Detect {
        /// Score with this saved model instead of training.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Tabulate a detection report.
    Eval {
        /// Defaults to report.json in the config's output directory.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Score against planted truth; without a value, the config's truth file.
        #[arg(long, num_args = 0..=1)]
        truth: Option<Option<PathBuf>>,
        /// Rank classes by global count over density; without a value, the config's density file.
        #[arg(long, num_args = 0..=1)]
        density: Option<Option<PathBuf>>,
        /// Directory for the tables; defaults to the report's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare flagged sets of two runs that differ only in anchors.
    Stability {
        #[arg(long)]
        config_b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => Some(with_overrides(RunConfig::load(p)?, cli)),
        None => None,
    };
    let threads = cli.threads.or(cfg.as_ref().and_then(|c| c.threads));
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::Usage("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(cli, cfg.as_ref()))
}

fn with_overrides(mut cfg: RunConfig, cli: &Cli) -> RunConfig {
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    cfg
}

fn need_config<'a>(cfg: Option<&'a RunConfig>, command: &str) -> Result<&'a RunConfig> {
    cfg.ok_or_else(|| Error::Usage(format!("`{command}` needs --config")))
}

fn dispatch(cli: &Cli, cfg: Option<&RunConfig>) -> Result<()> {
    match &cli.command {
        Command::Gen => cmd_gen(need_config(cfg, "gen")?),
        Command::Features { out } => cmd_features(need_config(cfg, "features")?, out.as_deref()),
        Command::Detect { model } => {
            let cfg = need_config(cfg, "detect")?;
            let report = detect(cfg, model.as_deref())?;
            print_report_summary(&report);
            Ok(())
        }
        Command::Eval {
            report,
            truth,
            density,
            out,
        } => cmd_eval(cfg, report.as_deref(), truth.as_ref(), density.as_ref(), out.as_deref()),
        Command::Stability { config_b, out } => {
            let a = need_config(cfg, "stability")?;
            let b = with_overrides(RunConfig::load(config_b)?, cli);
            cmd_stability(a, &b, out.as_deref())
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn cmd_gen(cfg: &RunConfig) -> Result<()> {
    let mut synth = cfg
        .synth
        .clone()
        .ok_or_else(|| Error::Config("config has no `synth` block".into()))?;
    synth.rng_seed = cfg.seed();
    let out = generate(&synth)?;
    let dir = cfg.output_dir();
    let written = out.write_files(&dir)?;
    let isolated = out
        .graph
        .nodes()
        .filter(|&v| out.graph.successors(v).is_empty() && out.graph.predecessors(v).is_empty())
        .count();
    println!(
        "nodes {} edges {} isolated {} regions {} anchors {} planted_globals {}",
        out.graph.node_count(),
        out.graph.edge_count(),
        isolated,
        synth.regions,
        out.anchor_families.iter().map(|f| f.len()).sum::<usize>(),
        out.truth.planted_globals().count()
    );
    println!("wrote {} files to {}", written.len(), dir.display());
    Ok(())
}

fn regions_for(cfg: &RunConfig, inputs: &crate::config::Inputs) -> RegionSet {
    RegionSet {
        classes: inputs.hypothesis.target_classes().iter().copied().collect(),
        other: Some(cfg.hypothesis.other_label.clone()),
    }
}

fn cmd_features(cfg: &RunConfig, out: Option<&Path>) -> Result<()> {
    let inputs = cfg.load_inputs()?;
    let regions = regions_for(cfg, &inputs);
    let m = extract_features(&inputs.graph, &inputs.labels, &inputs.anchors, &regions, &cfg.features)?;
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.output_dir().join("features.csv"));
    m.write_csv(create(&path)?)?;
    println!("rows {} columns {} written to {}", m.len(), m.width(), path.display());
    Ok(())
}

#[derive(Serialize)]
struct OracleComparison {
    oracle_global: usize,
    agreement: SetOverlap,
}

/// Runs detection, writes every artifact into the output directory and
/// returns the report.
pub fn detect(cfg: &RunConfig, model_path: Option<&Path>) -> Result<DetectionReport> {
    let inputs = cfg.load_inputs()?;
    let (g, labels, hyp) = (&inputs.graph, &inputs.labels, &inputs.hypothesis);
    let dir = cfg.output_dir();
    let outcome = match model_path {
        Some(p) => {
            let model = ClassifierModel::load(p)?;
            let report = run_with_model(g, labels, hyp, &model)?;
            DetectionOutcome {
                report,
                models: Vec::new(),
                training: Vec::new(),
            }
        }
        None if cfg.hypothesis.one_vs_rest => run_one_vs_rest(g, labels, hyp)?,
        None => run_detection_detailed(g, labels, hyp)?,
    };
    outcome.report.write_files(&dir)?;
    write_text(&dir.join("config.json"), &cfg.persisted_json()?)?;
    match outcome.models.as_slice() {
        [] => {}
        [(_, m)] if !cfg.hypothesis.one_vs_rest => m.save(dir.join("model.json"))?,
        many => {
            for (scope, m) in many {
                m.save(dir.join(format!("model_{scope}.json")))?;
            }
        }
    }
    let oracle = definition_oracle(g, labels, &inputs.anchors, &cfg.definition_params())?;
    let agreement = compare_detectors(&outcome.report, &oracle, g)?;
    write_json(
        &dir.join("oracle.json"),
        &OracleComparison {
            oracle_global: oracle.len(),
            agreement,
        },
    )?;
    Ok(outcome.report)
}

fn print_report_summary(r: &DetectionReport) {
    let pct = if r.total_labeled == 0 { 0.0 } else { 100.0 * r.total_global as f64 / r.total_labeled as f64 };
    println!("scope {}: {} of {} nodes global ({pct:.2}%)", r.scope, r.total_global, r.total_labeled);
    for c in &r.per_class {
        println!("  {}\t{}/{}\t{:.2}%", c.class, c.global, c.labeled, c.percentage);
    }
}

fn optional_path(
    flag: Option<&Option<PathBuf>>,
    from_config: impl FnOnce() -> Option<PathBuf>,
    name: &str,
) -> Result<Option<PathBuf>> {
    match flag {
        None => Ok(None),
        Some(Some(p)) => Ok(Some(p.clone())),
        Some(None) => from_config()
            .map(Some)
            .ok_or_else(|| Error::Usage(format!("--{name} without a value needs a config naming the {name} file"))),
    }
}

#[derive(Serialize)]
struct EvalSummary {
    mean_global_percentage: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    truth: Option<crate::eval::GlobalScore>,
    #[serde(skip_serializing_if = "Option::is_none")]
    macro_precision: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    macro_recall: Option<f64>,
}

fn cmd_eval(
    cfg: Option<&RunConfig>,
    report: Option<&Path>,
    truth: Option<&Option<PathBuf>>,
    density: Option<&Option<PathBuf>>,
    out: Option<&Path>,
) -> Result<()> {
    let report_path = match (report, cfg) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(c)) => c.output_dir().join("report.json"),
        (None, None) => return Err(Error::Usage("`eval` needs --report or --config".into())),
    };
    let truth_path = optional_path(truth, || cfg.map(RunConfig::truth_path), "truth")?;
    let density_path = optional_path(density, || cfg.and_then(RunConfig::density_path), "density")?;
    let report = DetectionReport::load(&report_path)?;
    let dir = match out {
        Some(d) => d.to_path_buf(),
        None => report_path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };

    let table = global_percentage(&report);
    table.write_csv(create(&dir.join("percentages.csv"))?)?;
    println!("class\tlabeled\tglobal\tpercent");
    for r in &table.rows {
        println!("{}\t{}\t{}\t{:.2}", r.class, r.labeled, r.global, r.percentage);
    }
    println!("mean percent {:.2}", table.mean);
    let mut summary = EvalSummary {
        mean_global_percentage: table.mean,
        truth: None,
        macro_precision: None,
        macro_recall: None,
    };

    if let Some(p) = truth_path {
        let truth = PlantedTruth::load(&p)?;
        let s = score_against_truth(&report, &truth)?;
        let classes = score_classes_against_truth(&report, &truth)?;
        classes.write_csv(create(&dir.join("truth_scores.csv"))?)?;
        println!(
            "flagged {} planted {} precision {:.4} recall {:.4}",
            s.flagged, s.planted, s.precision, s.recall
        );
        println!("macro precision {:.4} macro recall {:.4}", classes.macro_precision, classes.macro_recall);
        summary.truth = Some(s);
        summary.macro_precision = Some(classes.macro_precision);
        summary.macro_recall = Some(classes.macro_recall);
    }
    if let Some(p) = density_path {
        let rows = density_ratio(&report, &DensityTable::load(&p)?)?;
        write_density_csv(&rows, create(&dir.join("density_ratio.csv"))?)?;
        println!("class\tglobal\tdensity\tratio");
        for r in &rows {
            println!("{}\t{}\t{}\t{:.4}", r.class, r.global, r.density, r.ratio);
        }
    }
    write_json(&dir.join("eval.json"), &summary)
}

fn cmd_stability(a: &RunConfig, b: &RunConfig, out: Option<&Path>) -> Result<()> {
    stability_guard(a, b)?;
    let ra = detect(a, None)?;
    let rb = detect(b, None)?;
    let s = stability_overlap(&ra, &rb)?;
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| a.output_dir().join("stability.json"));
    write_json(&path, &s)?;
    println!(
        "flagged {} vs {}, shared {}: jaccard {:.4} overlap {:.4}",
        s.set_a_size, s.set_b_size, s.intersection, s.jaccard, s.overlap_coefficient
    );
    Ok(())
}
