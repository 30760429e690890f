//! Flat key-value run configuration.
//!
//! Format: one `section.key = value` per line, `#`-prefixed comment lines
//! ignored. Unknown and duplicate keys are rejected. Command-line flags
//! override file values, which override defaults. Validation reports every
//! problem at once, naming the offending key.

use lapwave::model::{LossKind, OptimizerKind, SpectralConfig, TrainConfig, TransformMode};
use lapwave::spectral::Kernel;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Every key the parser accepts, in the order `inspect` prints them.
const KNOWN_KEYS: &[&str] = &[
    "seed",
    "workers",
    "data.manifest",
    "data.absolute_value",
    "out.dir",
    "model.widths",
    "model.biases",
    "scales.count",
    "scales.init_max",
    "kernel.family",
    "laplacian.normalized",
    "transform.mode",
    "transform.scales",
    "approx.k",
    "train.theta1",
    "train.theta2",
    "train.lr_weights",
    "train.lr_scales",
    "train.dropout",
    "train.leaky_slope",
    "train.epochs",
    "train.batch_size",
    "train.optimizer",
    "train.loss",
    "cv.folds",
    "saliency.top_k",
    "saliency.names",
    "synth.n",
    "synth.sigma",
    "synth.counts",
    "synth.templates",
];

/// Flag overrides collected from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub top_k: Option<usize>,
}

/// Fully resolved configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub workers: usize,
    pub manifest: Option<PathBuf>,
    pub absolute_value: bool,
    pub out_dir: Option<PathBuf>,
    pub widths: Vec<usize>,
    pub biases: bool,
    pub scale_count: usize,
    pub scale_init_max: f64,
    pub kernel: Kernel,
    pub normalized: bool,
    pub mode: TransformMode,
    pub transform_scales: Option<Vec<f64>>,
    pub taylor_order: usize,
    pub theta1: f64,
    pub theta2: f64,
    pub lr_weights: f64,
    pub lr_scales: f64,
    pub dropout: f64,
    pub leaky_slope: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerKind,
    pub loss: LossKind,
    pub folds: usize,
    pub top_k: usize,
    pub names: Option<PathBuf>,
    pub synth_n: Option<usize>,
    pub synth_sigma: Option<f64>,
    pub synth_counts: Option<Vec<usize>>,
    pub synth_templates: Option<Vec<PathBuf>>,
}

impl RunConfig {
    pub fn train_config(&self) -> TrainConfig<f64> {
        TrainConfig {
            theta1: self.theta1,
            theta2: self.theta2,
            lr_weights: self.lr_weights,
            lr_scales: self.lr_scales,
            dropout_rate: self.dropout,
            leaky_slope: self.leaky_slope,
            epochs: self.epochs,
            batch_size: self.batch_size,
            optimizer: self.optimizer,
            loss: self.loss,
            seed: self.seed,
        }
    }

    pub fn spectral_config(&self) -> SpectralConfig {
        SpectralConfig {
            normalized: self.normalized,
            mode: self.mode,
            taylor_order: self.taylor_order,
        }
    }

    /// The resolved configuration in config-file syntax; feeding this back
    /// through `--config` reproduces the run.
    pub fn resolved_text(&self) -> String {
        let mut out = String::new();
        let mut put = |key: &str, value: String| {
            writeln!(out, "{key} = {value}").expect("string write");
        };
        put("seed", self.seed.to_string());
        put("workers", self.workers.to_string());
        if let Some(p) = &self.manifest {
            put("data.manifest", p.display().to_string());
        }
        put("data.absolute_value", self.absolute_value.to_string());
        if let Some(p) = &self.out_dir {
            put("out.dir", p.display().to_string());
        }
        put("model.widths", join(&self.widths));
        put("model.biases", self.biases.to_string());
        put("scales.count", self.scale_count.to_string());
        put("scales.init_max", self.scale_init_max.to_string());
        put("kernel.family", self.kernel.to_string());
        put("laplacian.normalized", self.normalized.to_string());
        put("transform.mode", self.mode.to_string());
        if let Some(s) = &self.transform_scales {
            put("transform.scales", join(s));
        }
        put("approx.k", self.taylor_order.to_string());
        put("train.theta1", self.theta1.to_string());
        put("train.theta2", self.theta2.to_string());
        put("train.lr_weights", self.lr_weights.to_string());
        put("train.lr_scales", self.lr_scales.to_string());
        put("train.dropout", self.dropout.to_string());
        put("train.leaky_slope", self.leaky_slope.to_string());
        put("train.epochs", self.epochs.to_string());
        put("train.batch_size", self.batch_size.to_string());
        put("train.optimizer", self.optimizer.to_string());
        put("train.loss", self.loss.to_string());
        put("cv.folds", self.folds.to_string());
        put("saliency.top_k", self.top_k.to_string());
        if let Some(p) = &self.names {
            put("saliency.names", p.display().to_string());
        }
        if let Some(n) = self.synth_n {
            put("synth.n", n.to_string());
        }
        if let Some(s) = self.synth_sigma {
            put("synth.sigma", s.to_string());
        }
        if let Some(c) = &self.synth_counts {
            put("synth.counts", join(c));
        }
        if let Some(t) = &self.synth_templates {
            let joined = t
                .iter()
                .map(|p| p.display().to_string())
                .collect::<Vec<_>>()
                .join(",");
            put("synth.templates", joined);
        }
        out
    }
}

fn join<T: std::fmt::Display>(values: &[T]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Key-value pairs read from a config file, with problems accumulated rather
/// than short-circuited.
struct RawConfig {
    values: BTreeMap<String, String>,
    base_dir: PathBuf,
    problems: Vec<String>,
}

impl RawConfig {
    fn empty() -> Self {
        RawConfig {
            values: BTreeMap::new(),
            base_dir: PathBuf::from("."),
            problems: Vec::new(),
        }
    }

    fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let base_dir = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or_else(|| Path::new("."))
            .to_path_buf();
        let mut raw = RawConfig {
            values: BTreeMap::new(),
            base_dir,
            problems: Vec::new(),
        };
        for (idx, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                raw.problems
                    .push(format!("line {}: expected 'key = value'", idx + 1));
                continue;
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                raw.problems.push(format!("line {}: unknown key '{key}'", idx + 1));
                continue;
            }
            if raw.values.insert(key.clone(), value).is_some() {
                raw.problems
                    .push(format!("line {}: duplicate key '{key}'", idx + 1));
            }
        }
        Ok(raw)
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str, default: T) -> T {
        match self.take(key) {
            None => default,
            Some(text) => match text.parse() {
                Ok(v) => v,
                Err(_) => {
                    self.problems.push(format!("{key}: cannot parse '{text}'"));
                    default
                }
            },
        }
    }

    fn parse_opt<T: std::str::FromStr>(&mut self, key: &str) -> Option<T> {
        let text = self.take(key)?;
        match text.parse() {
            Ok(v) => Some(v),
            Err(_) => {
                self.problems.push(format!("{key}: cannot parse '{text}'"));
                None
            }
        }
    }

    fn parse_list<T: std::str::FromStr>(&mut self, key: &str) -> Option<Vec<T>> {
        let text = self.take(key)?;
        let mut out = Vec::new();
        for part in text.split(',') {
            match part.trim().parse() {
                Ok(v) => out.push(v),
                Err(_) => {
                    self.problems
                        .push(format!("{key}: cannot parse element '{}'", part.trim()));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn path(&mut self, key: &str) -> Option<PathBuf> {
        let text = self.take(key)?;
        Some(self.resolve(&text))
    }

    fn path_list(&mut self, key: &str) -> Option<Vec<PathBuf>> {
        let text = self.take(key)?;
        Some(text.split(',').map(|p| self.resolve(p.trim())).collect())
    }

    fn resolve(&self, text: &str) -> PathBuf {
        let p = PathBuf::from(text);
        if p.is_absolute() {
            p
        } else {
            self.base_dir.join(p)
        }
    }
}

/// Loads, overrides, and validates the configuration; on failure returns the
/// full list of problems.
pub fn resolve(overrides: &Overrides) -> Result<RunConfig, Vec<String>> {
    let mut raw = match &overrides.config {
        Some(path) => RawConfig::from_file(path).map_err(|e| vec![e])?,
        None => RawConfig::empty(),
    };

    let seed = overrides.seed.unwrap_or_else(|| raw.parse("seed", 42u64));
    if overrides.seed.is_some() {
        raw.take("seed");
    }
    let workers = overrides
        .workers
        .unwrap_or_else(|| raw.parse("workers", 1usize));
    if overrides.workers.is_some() {
        raw.take("workers");
    }
    let top_k = overrides
        .top_k
        .unwrap_or_else(|| raw.parse("saliency.top_k", 10usize));
    if overrides.top_k.is_some() {
        raw.take("saliency.top_k");
    }
    let out_dir = match &overrides.out {
        Some(p) => Some(p.clone()),
        None => raw.path("out.dir"),
    };

    let config = RunConfig {
        seed,
        workers,
        manifest: raw.path("data.manifest"),
        absolute_value: raw.parse("data.absolute_value", false),
        out_dir,
        widths: raw
            .parse_list("model.widths")
            .unwrap_or_else(|| vec![2000, 128, 32]),
        biases: raw.parse("model.biases", false),
        scale_count: raw.parse("scales.count", 5usize),
        scale_init_max: raw.parse("scales.init_max", 2.5f64),
        kernel: raw.parse("kernel.family", Kernel::SxExp),
        normalized: raw.parse("laplacian.normalized", true),
        mode: raw.parse("transform.mode", TransformMode::Exact),
        transform_scales: raw.parse_list("transform.scales"),
        taylor_order: raw.parse("approx.k", 30usize),
        theta1: raw.parse("train.theta1", 1e-4),
        theta2: raw.parse("train.theta2", 1e-3),
        lr_weights: raw.parse("train.lr_weights", 0.01),
        lr_scales: raw.parse("train.lr_scales", 0.05),
        dropout: raw.parse("train.dropout", 0.2),
        leaky_slope: raw.parse("train.leaky_slope", 0.01),
        epochs: raw.parse("train.epochs", 100usize),
        batch_size: raw.parse("train.batch_size", 30usize),
        optimizer: raw.parse("train.optimizer", OptimizerKind::Adam),
        loss: raw.parse("train.loss", LossKind::PerClassBinary),
        folds: raw.parse("cv.folds", 3usize),
        top_k,
        names: raw.path("saliency.names"),
        synth_n: raw.parse_opt("synth.n"),
        synth_sigma: raw.parse_opt("synth.sigma"),
        synth_counts: raw.parse_list("synth.counts"),
        synth_templates: raw.path_list("synth.templates"),
    };

    let mut problems = raw.problems;
    validate(&config, &mut problems);
    if problems.is_empty() {
        Ok(config)
    } else {
        Err(problems)
    }
}

fn validate(config: &RunConfig, problems: &mut Vec<String>) {
    if config.widths.is_empty() || config.widths.iter().any(|w| *w == 0) {
        problems.push("model.widths: widths must be positive".to_string());
    }
    if config.scale_count == 0 {
        problems.push("scales.count: at least one scale is required".to_string());
    }
    if !(config.scale_init_max > 1e-3) {
        problems.push("scales.init_max: must exceed 0.001".to_string());
    }
    if config.mode == TransformMode::Approx && !config.normalized {
        problems.push(
            "transform.mode: the fast transform requires laplacian.normalized = true".to_string(),
        );
    }
    if let Some(scales) = &config.transform_scales {
        if scales.is_empty() || scales.iter().any(|s| !(*s > 0.0)) {
            problems.push("transform.scales: scales must be positive".to_string());
        }
    }
    if config.theta1 < 0.0 {
        problems.push("train.theta1: must be nonnegative".to_string());
    }
    if config.theta2 < 0.0 {
        problems.push("train.theta2: must be nonnegative".to_string());
    }
    if config.lr_weights < 0.0 {
        problems.push("train.lr_weights: must be nonnegative".to_string());
    }
    if config.lr_scales < 0.0 {
        problems.push("train.lr_scales: must be nonnegative".to_string());
    }
    if !(0.0..1.0).contains(&config.dropout) {
        problems.push("train.dropout: must lie in [0, 1)".to_string());
    }
    if config.batch_size == 0 {
        problems.push("train.batch_size: must be positive".to_string());
    }
    if config.folds < 2 {
        problems.push("cv.folds: at least 2 folds are required".to_string());
    }
    if config.top_k == 0 {
        problems.push("saliency.top_k: must be positive".to_string());
    }
    if let Some(sigma) = config.synth_sigma {
        if sigma < 0.0 {
            problems.push("synth.sigma: must be nonnegative".to_string());
        }
    }
    match (&config.synth_counts, &config.synth_templates) {
        (Some(c), Some(t)) if c.len() != t.len() => {
            problems.push("synth.counts: one count per template is required".to_string());
        }
        _ => {}
    }
}
