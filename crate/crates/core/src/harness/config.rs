use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Serialize, Serializer};

use crate::dataset::{generate_synthetic, load_builtin, load_csv, Dataset, LoadOptions};
use crate::error::{Error, Result};
use crate::gafs::GaConfig;
use crate::mlp::{Activation, MlpConfig};
use crate::pca::PcaMode;

/// Where the experiment's data comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum DatasetSpec {
    Builtin(String),
    Csv(PathBuf),
    /// Synthetic data; `seed: None` uses the experiment's master seed.
    Synthetic {
        n: usize,
        d: usize,
        informative: usize,
        class_sep: f64,
        seed: Option<u64>,
    },
}

impl DatasetSpec {
    /// `iris`, `heart`, a path to a CSV file, or `synthetic:n,d,informative,sep[,seed]`.
    pub fn parse(s: &str) -> Result<DatasetSpec> {
        let s = s.trim();
        if let Some(params) = s.strip_prefix("synthetic:") {
            let parts: Vec<&str> = params.split(',').map(str::trim).collect();
            let bad = || Error::UnknownDataset(s.to_string());
            if !(4..=5).contains(&parts.len()) {
                return Err(bad());
            }
            let int = |p: &str| p.parse::<usize>().map_err(|_| bad());
            return Ok(DatasetSpec::Synthetic {
                n: int(parts[0])?,
                d: int(parts[1])?,
                informative: int(parts[2])?,
                class_sep: parts[3].parse().map_err(|_| bad())?,
                seed: match parts.get(4) {
                    Some(p) => Some(p.parse().map_err(|_| bad())?),
                    None => None,
                },
            });
        }
        match s {
            "iris" | "heart" => Ok(DatasetSpec::Builtin(s.to_string())),
            _ if s.to_ascii_lowercase().ends_with(".csv") || Path::new(s).is_file() => {
                Ok(DatasetSpec::Csv(PathBuf::from(s)))
            }
            _ => Err(Error::UnknownDataset(s.to_string())),
        }
    }

    pub fn load(&self, label_column: &str, master_seed: u64) -> Result<Dataset> {
        match self {
            DatasetSpec::Builtin(name) => load_builtin(name),
            DatasetSpec::Csv(path) => load_csv(path, &LoadOptions::new(label_column)),
            DatasetSpec::Synthetic {
                n,
                d,
                informative,
                class_sep,
                seed,
            } => generate_synthetic(*n, *d, *informative, *class_sep, seed.unwrap_or(master_seed)),
        }
    }
}

impl fmt::Display for DatasetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetSpec::Builtin(name) => f.write_str(name),
            DatasetSpec::Csv(path) => write!(f, "{}", path.display()),
            DatasetSpec::Synthetic {
                n,
                d,
                informative,
                class_sep,
                seed,
            } => {
                write!(f, "synthetic:{n},{d},{informative},{class_sep}")?;
                match seed {
                    Some(s) => write!(f, ",{s}"),
                    None => Ok(()),
                }
            }
        }
    }
}

impl Serialize for DatasetSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ArmKind {
    Default,
    Ga,
    Pca,
}

impl ArmKind {
    pub fn name(self) -> &'static str {
        match self {
            ArmKind::Default => "default",
            ArmKind::Ga => "ga",
            ArmKind::Pca => "pca",
        }
    }

    /// Comma-separated arm list; duplicates are dropped, order is kept.
    pub fn parse_list(s: &str) -> Result<Vec<ArmKind>> {
        let mut arms = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let arm = match part {
                "default" => ArmKind::Default,
                "ga" => ArmKind::Ga,
                "pca" => ArmKind::Pca,
                other => {
                    return Err(Error::BadConfig(format!(
                        "unknown arm `{other}` (expected default, ga or pca)"
                    )))
                }
            };
            if !arms.contains(&arm) {
                arms.push(arm);
            }
        }
        Ok(arms)
    }
}

/// Whether PCA sees all rows or only each CV training fold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PcaFitScope {
    FullDataset,
    PerFold,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub label_column: String,
    pub arms: Vec<ArmKind>,
    pub pca_mode: PcaMode,
    pub scale_inputs: bool,
    pub pca_fit_scope: PcaFitScope,
    pub min_class_count: usize,
    pub cv_folds: usize,
    pub seed: u64,
    /// GA settings; `seed` is replaced by the master seed and an unset
    /// fitness fold count follows `cv_folds`.
    pub ga: GaConfig,
    pub ga_fitness_folds: Option<usize>,
    /// MLP settings shared by every arm and by GA fitness.
    pub mlp: MlpConfig,
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: DatasetSpec::Builtin("iris".into()),
            label_column: "label".into(),
            arms: vec![ArmKind::Default, ArmKind::Ga, ArmKind::Pca],
            pca_mode: PcaMode::Variance(0.95),
            scale_inputs: false,
            pca_fit_scope: PcaFitScope::FullDataset,
            min_class_count: 1,
            cv_folds: 5,
            seed: 42,
            ga: GaConfig::default(),
            ga_fitness_folds: None,
            mlp: MlpConfig::default(),
            out_dir: None,
        }
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::BadConfig(format!("{key}: expected true or false, got `{v}`"))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::BadConfig(format!("{key}: cannot parse `{v}`")))
}

impl ExperimentConfig {
    /// Applies one `key=value` setting. Keys match the config-file format.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "dataset" => self.dataset = DatasetSpec::parse(v)?,
            "label_col" | "label_column" => self.label_column = v.to_string(),
            "arms" => self.arms = ArmKind::parse_list(v)?,
            "pca_t" => self.pca_mode = PcaMode::Variance(parse_num(key, v)?),
            "pca_k" => self.pca_mode = PcaMode::FixedK(parse_num(key, v)?),
            "scale" => self.scale_inputs = parse_bool(key, v)?,
            "pca_fit_scope" => {
                self.pca_fit_scope = match v {
                    "full_dataset" => PcaFitScope::FullDataset,
                    "per_fold" => PcaFitScope::PerFold,
                    _ => {
                        return Err(Error::BadConfig(format!(
                            "pca_fit_scope: expected full_dataset or per_fold, got `{v}`"
                        )))
                    }
                }
            }
            "min_class_count" => self.min_class_count = parse_num(key, v)?,
            "cv_folds" => self.cv_folds = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "out" => self.out_dir = Some(PathBuf::from(v)),
            "ga.population" => self.ga.population_size = parse_num(key, v)?,
            "ga.generations" => self.ga.generations = parse_num(key, v)?,
            "ga.tournament" => self.ga.tournament_size = parse_num(key, v)?,
            "ga.crossover_rate" => self.ga.crossover_rate = parse_num(key, v)?,
            "ga.per_gene_p" => self.ga.per_gene_crossover_p = parse_num(key, v)?,
            "ga.mutation_rate" => self.ga.mutation_rate = Some(parse_num(key, v)?),
            "ga.elite" => self.ga.elite_count = parse_num(key, v)?,
            "ga.fitness_folds" => self.ga_fitness_folds = Some(parse_num(key, v)?),
            "mlp.hidden" => {
                self.mlp.hidden_sizes = v
                    .split(',')
                    .map(|h| parse_num(key, h.trim()))
                    .collect::<Result<_>>()?
            }
            "mlp.activation" => {
                self.mlp.activation = Activation::parse(v).ok_or_else(|| {
                    Error::BadConfig(format!("mlp.activation: expected relu or tanh, got `{v}`"))
                })?
            }
            "mlp.lr" => self.mlp.learning_rate = parse_num(key, v)?,
            "mlp.l2" => self.mlp.l2_penalty = parse_num(key, v)?,
            "mlp.batch" => self.mlp.batch_size = Some(parse_num(key, v)?),
            "mlp.max_epochs" => self.mlp.max_epochs = parse_num(key, v)?,
            "mlp.tol" => self.mlp.early_stop_tol = parse_num(key, v)?,
            "mlp.patience" => self.mlp.early_stop_patience = parse_num(key, v)?,
            "mlp.standardize" => self.mlp.standardize_inputs = parse_bool(key, v)?,
            other => return Err(Error::BadConfig(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Parses flat `key=value` lines; `#` starts a comment.
    pub fn parse_text(text: &str) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::BadConfig(format!("config line {}: expected key=value, got `{line}`", i + 1))
            })?;
            self.set(key, value).map_err(|e| match e {
                Error::BadConfig(m) => Error::BadConfig(format!("config line {}: {m}", i + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ExperimentConfig::parse_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.arms.is_empty() {
            return Err(Error::BadConfig("at least one arm is required".into()));
        }
        match self.pca_mode {
            PcaMode::Variance(t) if !(t > 0.0 && t <= 1.0) => return Err(Error::BadThreshold(t)),
            PcaMode::FixedK(0) => return Err(Error::BadConfig("pca_k must be at least 1".into())),
            _ => {}
        }
        if self.cv_folds < 2 {
            return Err(Error::BadConfig(format!(
                "cv_folds must be at least 2, got {}",
                self.cv_folds
            )));
        }
        if self.min_class_count == 0 {
            return Err(Error::BadConfig("min_class_count must be at least 1".into()));
        }
        self.mlp.validate()?;
        self.ga_config().validate()
    }

    /// The GA configuration actually used by the `ga` arm.
    pub fn ga_config(&self) -> GaConfig {
        GaConfig {
            seed: self.seed,
            fitness_cv_folds: self.ga_fitness_folds.unwrap_or(self.cv_folds),
            mlp_cfg: self.mlp.clone(),
            ..self.ga.clone()
        }
    }
}
