use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use featopt::dataset::{generate_synthetic, save_csv, stratified_kfold};
use featopt::gafs::{evolve, write_convergence_csv};
use featopt::harness::{prepare_dataset, run_experiment, ExperimentConfig};
use featopt::mlp::{accuracy, cv_accuracy, train};
use featopt::pca;
use featopt::{Error, ErrorKind, Result};

#[derive(Parser)]
#[command(name = "featopt", version, about = "MLP baseline, GA feature selection and PCA experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured arms and write report.json, report.txt and convergence.csv.
    Experiment(Common),
    /// Run only the GA and print the best mask.
    Select(Common),
    /// Fit PCA and print the component count and variance ratios.
    Pca(Common),
    /// Train the MLP on all features and print training and CV accuracy.
    Train(Common),
    /// Write a synthetic dataset as CSV.
    Synth(SynthArgs),
}

#[derive(Args)]
struct Common {
    /// Key=value config file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// iris, heart, a CSV path, or synthetic:n,d,informative,sep[,seed]
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    label_col: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of default,ga,pca
    #[arg(long)]
    arms: Option<String>,
    #[arg(long)]
    pca_t: Option<f64>,
    #[arg(long)]
    pca_k: Option<usize>,
    /// Scale features to unit variance before PCA.
    #[arg(long)]
    scale: bool,
    #[arg(long)]
    min_class_count: Option<usize>,
    #[arg(long)]
    cv_folds: Option<usize>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    fitness_folds: Option<usize>,
    /// Hidden layer sizes, e.g. 100 or 64,32
    #[arg(long)]
    hidden: Option<String>,
    #[arg(long)]
    max_epochs: Option<usize>,
    /// Any other config key, as key=value (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    informative: usize,
    #[arg(long, default_value_t = 2.0)]
    sep: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

impl Common {
    fn to_config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let mut settings: Vec<(&str, String)> = Vec::new();
        let mut put = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                settings.push((k, v));
            }
        };
        put("dataset", self.dataset.clone());
        put("label_col", self.label_col.clone());
        put("seed", self.seed.map(|v| v.to_string()));
        put("arms", self.arms.clone());
        put("pca_t", self.pca_t.map(|v| v.to_string()));
        put("pca_k", self.pca_k.map(|v| v.to_string()));
        put("scale", self.scale.then(|| "true".to_string()));
        put("min_class_count", self.min_class_count.map(|v| v.to_string()));
        put("cv_folds", self.cv_folds.map(|v| v.to_string()));
        put("ga.population", self.population.map(|v| v.to_string()));
        put("ga.generations", self.generations.map(|v| v.to_string()));
        put("ga.fitness_folds", self.fitness_folds.map(|v| v.to_string()));
        put("mlp.hidden", self.hidden.clone());
        put("mlp.max_epochs", self.max_epochs.map(|v| v.to_string()));
        for (k, v) in settings {
            cfg.set(k, &v)?;
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::BadConfig(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            cfg.set(k, v)?;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn experiment(args: &Common) -> Result<()> {
    let cfg = args.to_config()?;
    let report = run_experiment(&cfg)?;
    print!("{}", report.to_table());
    if let Some(dir) = &cfg.out_dir {
        println!("wrote {}", dir.display());
    }
    Ok(())
}

fn select(args: &Common) -> Result<()> {
    let cfg = args.to_config()?;
    let ds = prepare_dataset(&cfg)?;
    let result = evolve(&ds, &cfg.ga_config())?;
    println!("best_mask {}", result.best);
    println!("best_fitness {}", result.best_fitness);
    println!("evaluations {}", result.evaluations);
    let names: Vec<&str> = result
        .best
        .indices()
        .iter()
        .map(|&i| ds.feature_names()[i].as_str())
        .collect();
    println!("features {}", names.join(","));
    if let Some(dir) = &cfg.out_dir {
        ensure_dir(dir)?;
        write_convergence_csv(&dir.join("convergence.csv"), &result.log)?;
    }
    Ok(())
}

fn fit_pca(args: &Common) -> Result<()> {
    let cfg = args.to_config()?;
    let ds = prepare_dataset(&cfg)?;
    let model = pca::fit(ds.x(), cfg.pca_mode, cfg.scale_inputs)?;
    println!("k {}", model.k);
    println!("cumulative_variance_ratio {}", model.cumulative_ratio());
    let ratios: Vec<String> = model.explained_ratio().iter().map(f64::to_string).collect();
    println!("explained_variance_ratio {}", ratios.join(","));
    if let Some(dir) = &cfg.out_dir {
        ensure_dir(dir)?;
        model.save(dir.join("pca_model.txt"))?;
        let names = (1..=model.k).map(|i| format!("pc{i}")).collect();
        let scores = ds.with_features(model.transform(ds.x())?, names)?;
        save_csv(&scores, dir.join("scores.csv"))?;
    }
    Ok(())
}

fn train_mlp(args: &Common) -> Result<()> {
    let cfg = args.to_config()?;
    let ds = prepare_dataset(&cfg)?;
    let mlp = cfg.mlp.clone().with_seed(cfg.seed);
    let (model, history) = train(ds.x(), ds.y(), ds.n_classes(), &mlp)?;
    println!("train_accuracy {}", accuracy(&model, ds.x(), ds.y())?);
    println!("epochs {}", history.stopped_epoch);
    let folds = stratified_kfold(&ds, cfg.cv_folds, cfg.seed)?;
    let cv = cv_accuracy(&ds, &folds, &mlp)?;
    println!("cv_accuracy_mean {}", cv.mean);
    if let Some(dir) = &cfg.out_dir {
        ensure_dir(dir)?;
        model.save(dir.join("model.txt"))?;
    }
    Ok(())
}

fn synth(args: &SynthArgs) -> Result<()> {
    let ds = generate_synthetic(args.n, args.d, args.informative, args.sep, args.seed)?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    save_csv(&ds, &args.out)?;
    println!("wrote {} ({} x {})", args.out.display(), ds.n_samples(), ds.n_features());
    Ok(())
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Usage => 1,
        ErrorKind::Data => 2,
        ErrorKind::Numeric => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Experiment(a) => experiment(a),
        Command::Select(a) => select(a),
        Command::Pca(a) => fit_pca(a),
        Command::Train(a) => train_mlp(a),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
