use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use inflection_art::data::{self, write_samples_tsv};
use inflection_art::encoding;
use inflection_art::experiment::config::synth_params;
use inflection_art::experiment::{
    self, load_samples, report_samples, sweep_samples, ExperimentConfig, ExperimentError, Settings,
};

/// ART1 clustering of verb paradigms into inflection classes.
#[derive(Parser)]
#[command(name = "inflart", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep vigilance with permutation replicates and a k-means baseline.
    Sweep(Flags),
    /// k-fold train/test runs at one vigilance.
    Cv(Flags),
    /// Cluster composition and distinctive trigrams of one run.
    Report(Flags),
    /// Write the assembled lexemes and their feature space.
    Dump(Flags),
    /// Write a synthetic lexicon in the simple_tsv layout.
    Synth(Flags),
}

/// Every flag doubles as a config-file key of the same name.
#[derive(Args, Default)]
struct Flags {
    /// `key = value` settings file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Lexicon file, or `synthetic` for the built-in generator.
    #[arg(long)]
    data: Option<String>,
    /// paralex, rvid or simple_tsv.
    #[arg(long)]
    format: Option<String>,
    /// latin, portuguese, estonian or custom.
    #[arg(long)]
    language: Option<String>,
    /// File with one cell id per line.
    #[arg(long)]
    cells: Option<String>,
    #[arg(long)]
    vigilance_min: Option<String>,
    #[arg(long)]
    vigilance_max: Option<String>,
    #[arg(long)]
    vigilance_step: Option<String>,
    #[arg(long)]
    permutations: Option<String>,
    /// Vigilance for cv and report; defaults to the best sweep point.
    #[arg(long)]
    vigilance: Option<String>,
    #[arg(long)]
    folds: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    jobs: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// Hide classes with fewer lexemes from composition plots.
    #[arg(long)]
    min_class_size: Option<String>,
    /// concat or set.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    no_padding: bool,
    #[arg(long)]
    ngram: Option<String>,
    #[arg(long)]
    learning_param: Option<String>,
    /// k-means restarts.
    #[arg(long)]
    restarts: Option<String>,
    #[arg(long)]
    baseline_k: Option<String>,
    #[arg(long)]
    no_baseline: bool,
    #[arg(long)]
    col_lexeme: Option<String>,
    #[arg(long)]
    col_cell: Option<String>,
    #[arg(long)]
    col_form: Option<String>,
    #[arg(long)]
    col_class: Option<String>,
    #[arg(long)]
    filter_column: Option<String>,
    #[arg(long)]
    filter_value: Option<String>,
    /// One byte, or `tab`.
    #[arg(long)]
    delimiter: Option<String>,
    /// Separator of pre-segmented forms (`space` for a blank).
    #[arg(long)]
    segment_delimiter: Option<String>,
    #[arg(long)]
    n_classes: Option<String>,
    #[arg(long)]
    n_lexemes: Option<String>,
    #[arg(long)]
    n_cells: Option<String>,
    #[arg(long)]
    stem_length: Option<String>,
    #[arg(long)]
    noise: Option<String>,
}

impl Flags {
    fn settings(&self) -> Result<Settings, ExperimentError> {
        let mut s = match &self.config {
            Some(p) => Settings::from_file(p)?,
            None => Settings::new(),
        };
        let mut cli = Settings::new();
        let pairs: [(&str, &Option<String>); 34] = [
            ("data", &self.data),
            ("format", &self.format),
            ("language", &self.language),
            ("cells", &self.cells),
            ("vigilance-min", &self.vigilance_min),
            ("vigilance-max", &self.vigilance_max),
            ("vigilance-step", &self.vigilance_step),
            ("permutations", &self.permutations),
            ("vigilance", &self.vigilance),
            ("folds", &self.folds),
            ("seed", &self.seed),
            ("jobs", &self.jobs),
            ("out", &self.out),
            ("min-class-size", &self.min_class_size),
            ("mode", &self.mode),
            ("ngram", &self.ngram),
            ("learning-param", &self.learning_param),
            ("restarts", &self.restarts),
            ("baseline-k", &self.baseline_k),
            ("col-lexeme", &self.col_lexeme),
            ("col-cell", &self.col_cell),
            ("col-form", &self.col_form),
            ("col-class", &self.col_class),
            ("filter-column", &self.filter_column),
            ("filter-value", &self.filter_value),
            ("delimiter", &self.delimiter),
            ("segment-delimiter", &self.segment_delimiter),
            ("n-classes", &self.n_classes),
            ("n-lexemes", &self.n_lexemes),
            ("n-cells", &self.n_cells),
            ("stem-length", &self.stem_length),
            ("noise", &self.noise),
            ("no-padding", &self.no_padding.then(|| "true".to_string())),
            ("no-baseline", &self.no_baseline.then(|| "true".to_string())),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cli.set(key, v.clone());
            }
        }
        s = s.overlay(&cli);
        Ok(s)
    }
}

/// Vigilance from the config, or the best point of an in-memory sweep.
fn chosen_vigilance(
    config: &ExperimentConfig,
    samples: &[data::ParadigmSample],
) -> Result<f64, ExperimentError> {
    if let Some(v) = config.vigilance {
        return Ok(v);
    }
    log::info!("no --vigilance given; sweeping to find the best grid point");
    let sweep = sweep_samples(samples, &ExperimentConfig {
        baseline: false,
        ..config.clone()
    })?;
    let v = sweep
        .best_vigilance()
        .ok_or_else(|| ExperimentError::Config("sweep produced no finite ARI".into()))?;
    log::info!("using vigilance {v}");
    Ok(v)
}

fn run(command: Command) -> Result<(), ExperimentError> {
    match command {
        Command::Sweep(f) => {
            let config = ExperimentConfig::from_settings(&f.settings()?)?;
            let r = experiment::run_sweep(&config)?;
            if let Some(b) = r.best() {
                println!(
                    "best vigilance {}: ARI {:.4} ± {:.4}, AMI {:.4} ± {:.4}, {:.1} clusters ({} attested classes)",
                    b.vigilance, b.ari_mean, b.ari_ci, b.ami_mean, b.ami_ci, b.clusters_mean, r.n_classes
                );
            }
            if let Some((a, m)) = r.baseline_means() {
                println!("k-means baseline: ARI {a:.4}, AMI {m:.4}");
            }
        }
        Command::Cv(f) => {
            let config = ExperimentConfig::from_settings(&f.settings()?)?;
            let samples = load_samples(&config)?;
            let v = chosen_vigilance(&config, &samples)?;
            let r = experiment::cv_samples(&samples, &config, v)?;
            r.write(&config.out_dir)?;
            println!(
                "vigilance {v}: train ARI {:.4}, test ARI {:.4}, train AMI {:.4}, test AMI {:.4}",
                r.mean_train_ari(),
                r.mean_test_ari(),
                r.mean_train_ami(),
                r.mean_test_ami()
            );
        }
        Command::Report(f) => {
            let config = ExperimentConfig::from_settings(&f.settings()?)?;
            let samples = load_samples(&config)?;
            let v = chosen_vigilance(&config, &samples)?;
            let r = report_samples(&samples, &config, v, config.seed, config.min_class_size)?;
            r.write(&config.out_dir)?;
            let mut text = Vec::new();
            r.report
                .write_features_text(&mut text, 6)
                .map_err(|e| ExperimentError::Io { path: "<stdout>".into(), source: e })?;
            print!("{}", String::from_utf8_lossy(&text));
        }
        Command::Dump(f) => {
            let config = ExperimentConfig::from_settings(&f.settings()?)?;
            let samples = load_samples(&config)?;
            let space = encoding::build_feature_space(&samples, &config.encoding)?;
            experiment::ensure_dir(&config.out_dir)?;
            let mut buf = Vec::new();
            write_samples_tsv(&samples, &mut buf).expect("writing to memory");
            experiment::write_file(&config.out_dir.join("samples.tsv"), &buf)?;
            buf.clear();
            space.write_table(&mut buf).expect("writing to memory");
            experiment::write_file(&config.out_dir.join("feature_space.tsv"), &buf)?;
            println!(
                "{} lexemes, {} classes, {} features",
                samples.len(),
                data::class_count(&samples),
                space.width()
            );
        }
        Command::Synth(f) => {
            let settings = f.settings()?;
            let params = synth_params(&settings)?;
            let ds = data::synthetic_dataset(&params)?;
            let path = PathBuf::from(settings.get("out").unwrap_or("out")).join("synthetic.tsv");
            if let Some(dir) = path.parent() {
                experiment::ensure_dir(dir)?;
            }
            let mut buf = Vec::new();
            write_samples_tsv(&ds.samples, &mut buf).expect("writing to memory");
            experiment::write_file(&path, &buf)?;
            let mut suffixes = String::from("class\tcell\tsuffix\n");
            for (label, per_cell) in ds.class_labels.iter().zip(&ds.suffixes) {
                for (cell, s) in ds.cells.iter().zip(per_cell) {
                    suffixes.push_str(&format!("{label}\t{cell}\t{s}\n"));
                }
            }
            experiment::write_file(&path.with_file_name("synthetic_suffixes.tsv"), suffixes)?;
            println!("wrote {} lexemes to {}", ds.samples.len(), path.display());
        }
    }
    std::io::stdout().flush().ok();
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                log::error!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
