use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use lakin::dataset::io::load_manifest;
use lakin::ml::search::write_search_csv;
use lakin::ml::{centroid_trajectory, exhaustive_search, loocv, ClassifierConfig, Feature, FeatureMatrix, Method, SearchSpec};
use lakin::pipeline::{analyze_entry, feature_matrix, PipelineConfig, SegmentationMode, TrialAnalysis};
use lakin::report::{
    matrix_from_rows, pair_left_right, read_features_csv, updrs_histogram, write_cdf_csv, write_features_csv,
    write_heatmap_csv, write_histogram_csv, write_lr_csv, write_spectrum_csv, HeatmapGrid,
};
use lakin::synth::{write_cohort, CohortSpec};

#[derive(Parser)]
#[command(name = "lakin", version, about = "Leg Agility kinematic features and UPDRS classification")]
struct Cli {
    /// Seed for anything randomized.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic cohort with manifest, recordings and labels.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 36)]
        patients: usize,
        /// Sensor noise SD in each channel's units.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
    },
    /// Compute the per-trial feature table and left/right differences.
    Features {
        #[command(flatten)]
        input: ManifestArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Leave-one-out evaluation of one classifier configuration.
    Evaluate {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        classifier: ClassifierArgs,
        /// Also rank every configuration over the selected features.
        #[arg(long)]
        search: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank all feature subsets, classifiers and PCA settings by AuC.
    Search {
        #[command(flatten)]
        source: Source,
        /// Candidate features (comma list); defaults to all eleven.
        #[arg(long, value_delimiter = ',')]
        features: Option<Vec<String>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit plot data: spectrum heatmaps, trajectories, CDF and histogram.
    Report {
        #[command(flatten)]
        input: ManifestArgs,
        #[command(flatten)]
        classifier: ClassifierArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ManifestArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_enum, default_value_t = Segmentation::Labels)]
    segmentation: Segmentation,
}

#[derive(Args)]
struct Source {
    /// Manifest to process; features are computed inline.
    #[arg(long, required_unless_present = "input", conflicts_with = "input")]
    manifest: Option<PathBuf>,
    /// Previously written feature table.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Segmentation::Labels)]
    segmentation: Segmentation,
}

#[derive(Args)]
struct ClassifierArgs {
    #[arg(long, value_enum, default_value_t = Classifier::Knn)]
    classifier: Classifier,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long = "svm-c", default_value_t = 1.0)]
    svm_c: f64,
    #[arg(long)]
    pca_dims: Option<usize>,
    /// Feature columns (comma list).
    #[arg(long, value_delimiter = ',', default_value = "Theta,R,P_Xtheta")]
    features: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Segmentation {
    Labels,
    Auto,
}

#[derive(Clone, Copy, ValueEnum)]
enum Classifier {
    Ncc,
    Knn,
    Svm,
}

impl From<Segmentation> for SegmentationMode {
    fn from(s: Segmentation) -> Self {
        match s {
            Segmentation::Labels => SegmentationMode::Labels,
            Segmentation::Auto => SegmentationMode::Auto,
        }
    }
}

fn canonical_features(names: &[String]) -> anyhow::Result<Vec<String>> {
    names
        .iter()
        .map(|n| Ok(n.parse::<Feature>()?.name().to_string()))
        .collect()
}

impl ClassifierArgs {
    fn config(&self) -> anyhow::Result<ClassifierConfig> {
        let method = match self.classifier {
            Classifier::Ncc => Method::Ncc,
            Classifier::Knn => Method::Knn { k: self.k },
            Classifier::Svm => Method::Svm { c: self.svm_c },
        };
        let mut cfg = ClassifierConfig::new(method, canonical_features(&self.features)?);
        cfg.pca_dims = self.pca_dims;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Successful analyses in manifest order plus the number of failed trials.
fn analyze_manifest(manifest: &Path, mode: SegmentationMode) -> anyhow::Result<(Vec<TrialAnalysis>, usize)> {
    let entries = load_manifest(manifest).with_context(|| format!("loading manifest {}", manifest.display()))?;
    let cfg = PipelineConfig {
        segmentation: mode,
        ..Default::default()
    };
    let results: Vec<_> = entries.par_iter().map(|e| analyze_entry(e, &cfg)).collect();
    let mut ok = Vec::with_capacity(results.len());
    let mut failed = 0;
    for (entry, r) in entries.iter().zip(results) {
        match r {
            Ok(a) => ok.push(a),
            Err(e) => {
                failed += 1;
                eprintln!("error: trial {}: {e}", entry.meta.trial_id);
            }
        }
    }
    Ok((ok, failed))
}

fn load_matrix(source: &Source) -> anyhow::Result<(FeatureMatrix, usize)> {
    match (&source.manifest, &source.input) {
        (Some(m), _) => {
            let (analyses, failed) = analyze_manifest(m, source.segmentation.into())?;
            Ok((feature_matrix(&analyses)?, failed))
        }
        (None, Some(path)) => {
            let rows = read_features_csv(path).with_context(|| format!("reading {}", path.display()))?;
            Ok((matrix_from_rows(&rows)?, 0))
        }
        (None, None) => bail!("either --manifest or --input is required"),
    }
}

fn out_dir(path: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

fn run_search(m: &FeatureMatrix, features: Vec<String>, out: &Path) -> anyhow::Result<()> {
    let spec = SearchSpec::full(features);
    log::info!("evaluating {} configurations", spec.config_count());
    let results = exhaustive_search(m, &spec)?;
    let path = out.join("search.csv");
    write_search_csv(&results, fs::File::create(&path).with_context(|| path.display().to_string())?)?;
    Ok(())
}

fn evaluate(m: &FeatureMatrix, cfg: &ClassifierConfig, out: &Path) -> anyhow::Result<()> {
    let report = loocv(m, cfg)?;
    fs::write(out.join("report.json"), report.to_json()? + "\n")?;
    write_cdf_csv(out.join("cdf.csv"), &report.cdf)?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<usize> {
    match cli.command {
        Command::Synth { out, patients, noise } => {
            let spec = CohortSpec {
                patients,
                seed: cli.seed,
                noise_sd: noise,
                ..Default::default()
            };
            let manifest = write_cohort(&out, &spec)?;
            println!("{}", manifest.display());
            Ok(0)
        }
        Command::Features { input, out } => {
            let (analyses, mut failed) = analyze_manifest(&input.manifest, input.segmentation.into())?;
            out_dir(&out)?;
            write_features_csv(out.join("features.csv"), &analyses)?;
            let (pairs, errors) = pair_left_right(&analyses);
            for (pair, e) in &errors {
                eprintln!("error: left/right pair {pair}: {e}");
            }
            failed += errors.len();
            write_lr_csv(out.join("lr_features.csv"), &pairs)?;
            Ok(failed)
        }
        Command::Evaluate {
            source,
            classifier,
            search,
            out,
        } => {
            let cfg = classifier.config()?;
            let (m, failed) = load_matrix(&source)?;
            out_dir(&out)?;
            evaluate(&m, &cfg, &out)?;
            if search {
                run_search(&m, cfg.features.clone(), &out)?;
            }
            Ok(failed)
        }
        Command::Search { source, features, out } => {
            let features = match features {
                Some(f) => canonical_features(&f)?,
                None => Feature::ALL.iter().map(|f| f.name().to_string()).collect(),
            };
            let (m, failed) = load_matrix(&source)?;
            out_dir(&out)?;
            run_search(&m, features, &out)?;
            Ok(failed)
        }
        Command::Report { input, classifier, out } => {
            let cfg = classifier.config()?;
            let (analyses, failed) = analyze_manifest(&input.manifest, input.segmentation.into())?;
            out_dir(&out)?;
            let spectra = out.join("spectra");
            out_dir(&spectra)?;
            for a in &analyses {
                let id = &a.meta.trial_id;
                write_spectrum_csv(spectra.join(format!("{id}_theta.csv")), &a.spectrum_theta)?;
                write_spectrum_csv(spectra.join(format!("{id}_omega.csv")), &a.spectrum_omega)?;
            }
            let grid = HeatmapGrid::default();
            write_heatmap_csv(
                out.join("heatmap_theta.csv"),
                analyses.iter().map(|a| (&a.meta, &a.spectrum_theta)),
                &grid,
            )?;
            write_heatmap_csv(
                out.join("heatmap_omega.csv"),
                analyses.iter().map(|a| (&a.meta, &a.spectrum_omega)),
                &grid,
            )?;
            let m = feature_matrix(&analyses)?;
            write_histogram_csv(out.join("updrs_histogram.csv"), &updrs_histogram(m.labels()))?;
            if m.n_rows() >= 2 {
                if (2..=3).contains(&cfg.features.len()) {
                    let trajectory = centroid_trajectory(&m, &cfg.features)?;
                    trajectory.write_csv(fs::File::create(out.join("trajectory.csv"))?)?;
                }
                evaluate(&m, &cfg, &out)?;
            }
            Ok(failed)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Some(n) = std::env::var("LAKIN_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            log::warn!("could not size worker pool: {e}");
        }
    }
    match run(Cli::parse()) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(failed) => {
            eprintln!("{failed} trial(s) failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
