//! Flat `section.key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored; every key must come from [`KEYS`]
//! and may appear once. Defaults:
//!
//! | key | default |
//! |-----|---------|
//! | `dataset.path` | none (required by commands that read prices) |
//! | `deform.kind` | `general` (`natural`, `tsallis`, `kaniadakis`, `amari`, `abe`, `gamma`) |
//! | `deform.a`, `deform.b` | `0` (only with `general`) |
//! | `deform.param` | required for the named one-parameter families |
//! | `loss.q` | `1` |
//! | `lr.eta` | `0.1` |
//! | `lr.schedule` | `scalar` (`power_of_weight`) |
//! | `lr.gamma` | `0` (only with `power_of_weight`) |
//! | `lr.negative_cap` | `1` |
//! | `strategy.centering` | `weighted_mean` (`uniform_mean`, `none`) |
//! | `strategy.projection` | `l1` (`euclidean`) |
//! | `preprocess.mode` | `raw` (`mean_reversion`, `median_reversion`) |
//! | `preprocess.window` | `5` |
//! | `sparsify.rule` | `none` (`threshold`, `top_k`, `winner_takes_all`) |
//! | `sparsify.threshold` | `0.05` |
//! | `sparsify.k` | `1` |
//! | `run.initial_wealth` | `1` |
//! | `run.seed` | `0` |
//! | `output.dir` | `results` |
//! | `search.method` | absent = no search block (`grid`, `random`) |
//! | `search.objective` | `mean_wealth` (`mean_log_wealth`, `worst_fold`) |
//! | `search.samples` | `100` (random only) |
//! | `search.a`, `search.b` | grid `-0.75, -0.5, …, 0.75`; random `-0.75, 0.75` |
//! | `search.q` | grid `0, 0.5, 1`; random `0, 1` |
//! | `search.eta` | grid `0.01, 0.0316…, 0.1, 0.316…, 1`; random `0.01, 1` (log-uniform) |
//! | `search.gamma` | grid `0, 0.5, 1`; random `0, 1` |
//! | `search.centering`, `search.projection`, `search.preprocessing` | the strategy's own value |
//! | `split.mode` | `rolling` (`anchored`) |
//! | `split.train`, `split.test` | `100`, `25` |
//! | `split.folds` | `0` (all folds that fit) |
//!
//! List values are comma separated; random-search intervals are `lo, hi`.
//! Preprocessing list items are `raw`, `mean_reversion:N` or `median_reversion:N`.
//! A relative `dataset.path` or `output.dir` is resolved against the directory
//! of the config file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::data::{format_number, DataError};
use crate::deform::{DeformKind, DeformParams};
use crate::market::Preprocessing;
use crate::mirror::{CenteringVariant, LearningRate, ProjectionKind, RateSchedule};
use crate::olps::{centering_name, projection_name, Sparsify, StrategyConfig};
use crate::search::{GridSpace, Objective, RandomSpace, SplitMode, SplitScheme};

pub const KEYS: &[&str] = &[
    "dataset.path",
    "deform.kind",
    "deform.a",
    "deform.b",
    "deform.param",
    "loss.q",
    "lr.eta",
    "lr.schedule",
    "lr.gamma",
    "lr.negative_cap",
    "strategy.centering",
    "strategy.projection",
    "preprocess.mode",
    "preprocess.window",
    "sparsify.rule",
    "sparsify.threshold",
    "sparsify.k",
    "run.initial_wealth",
    "run.seed",
    "output.dir",
    "search.method",
    "search.objective",
    "search.samples",
    "search.a",
    "search.b",
    "search.q",
    "search.eta",
    "search.gamma",
    "search.centering",
    "search.projection",
    "search.preprocessing",
    "split.mode",
    "split.train",
    "split.test",
    "split.folds",
];

const DEFAULT_WINDOW: usize = 5;
const DEFAULT_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub enum SearchMethod {
    Grid(GridSpace),
    Random { space: RandomSpace, samples: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub method: SearchMethod,
    pub split: SplitScheme,
    pub objective: Objective,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    pub strategy: StrategyConfig,
    pub initial_wealth: f64,
    pub search: Option<SearchConfig>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: None,
            strategy: StrategyConfig::default(),
            initial_wealth: 1.0,
            search: None,
            output_dir: PathBuf::from("results"),
            seed: 0,
        }
    }
}

struct Entry {
    line: usize,
    value: String,
}

/// Parsed key-value pairs with their source lines.
struct Table {
    entries: BTreeMap<String, Entry>,
}

fn constraint(key: &str, invariant: impl Into<String>) -> DataError {
    DataError::Constraint { key: key.to_string(), invariant: invariant.into() }
}

impl Table {
    fn parse(text: &str) -> Result<Self, DataError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(DataError::Parse { line: line as u64, message: format!("expected `key = value`, got {content:?}") });
            };
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(DataError::UnknownKey { line, key: key.to_string() });
            }
            let entry = Entry { line, value: value.trim().to_string() };
            if entries.insert(key.to_string(), entry).is_some() {
                return Err(DataError::Parse { line: line as u64, message: format!("duplicate key {key:?}") });
            }
        }
        Ok(Table { entries })
    }

    fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn raw(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    fn get<T: FromStr>(&self, key: &str, expected: &'static str) -> Result<Option<T>, DataError> {
        self.raw(key).map(|e| parse_value(key, e.line, &e.value, expected)).transpose()
    }

    fn or<T: FromStr>(&self, key: &str, expected: &'static str, default: T) -> Result<T, DataError> {
        Ok(self.get(key, expected)?.unwrap_or(default))
    }

    fn list<T: FromStr>(&self, key: &str, expected: &'static str) -> Result<Option<Vec<T>>, DataError> {
        let Some(e) = self.raw(key) else { return Ok(None) };
        let items = e
            .value
            .split(',')
            .map(|item| parse_value(key, e.line, item.trim(), expected))
            .collect::<Result<Vec<T>, _>>()?;
        if items.is_empty() {
            return Err(constraint(key, "list must be nonempty"));
        }
        Ok(Some(items))
    }

    fn choice<T>(&self, key: &str, default: T, parse: fn(&str) -> Option<T>, expected: &'static str) -> Result<T, DataError> {
        match self.raw(key) {
            None => Ok(default),
            Some(e) => parse(&e.value).ok_or_else(|| mismatch(key, e.line, &e.value, expected)),
        }
    }

    fn choices<T>(&self, key: &str, parse: fn(&str) -> Option<T>, expected: &'static str) -> Result<Option<Vec<T>>, DataError> {
        let Some(e) = self.raw(key) else { return Ok(None) };
        e.value
            .split(',')
            .map(|item| parse(item.trim()).ok_or_else(|| mismatch(key, e.line, item.trim(), expected)))
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
    }

    fn interval(&self, key: &str, default: (f64, f64)) -> Result<(f64, f64), DataError> {
        match self.list::<f64>(key, "an interval `lo, hi`")? {
            None => Ok(default),
            Some(v) if v.len() == 2 && v[0] <= v[1] => Ok((v[0], v[1])),
            Some(_) => Err(constraint(key, "random-search interval must be `lo, hi` with lo <= hi")),
        }
    }
}

fn mismatch(key: &str, line: usize, value: &str, expected: &'static str) -> DataError {
    DataError::TypeMismatch { line, key: key.to_string(), expected, value: value.to_string() }
}

fn parse_value<T: FromStr>(key: &str, line: usize, value: &str, expected: &'static str) -> Result<T, DataError> {
    value.parse().map_err(|_| mismatch(key, line, value, expected))
}

fn parse_centering(s: &str) -> Option<CenteringVariant> {
    match s {
        "weighted_mean" => Some(CenteringVariant::WeightedMean),
        "uniform_mean" => Some(CenteringVariant::UniformMean),
        "none" => Some(CenteringVariant::None),
        _ => None,
    }
}

fn parse_projection(s: &str) -> Option<ProjectionKind> {
    match s {
        "l1" => Some(ProjectionKind::L1Normalize),
        "euclidean" => Some(ProjectionKind::EuclideanSimplex),
        _ => None,
    }
}

fn parse_schedule(s: &str) -> Option<RateSchedule> {
    match s {
        "scalar" => Some(RateSchedule::Scalar),
        "power_of_weight" => Some(RateSchedule::PowerOfWeight),
        _ => None,
    }
}

/// `raw`, `mean_reversion:N` or `median_reversion:N`.
pub fn parse_preprocessing(s: &str) -> Option<Preprocessing> {
    let (mode, window) = match s.split_once(':') {
        Some((m, w)) => (m.trim(), Some(w.trim().parse::<usize>().ok()?)),
        None => (s, None),
    };
    match (mode, window) {
        ("raw", None) => Some(Preprocessing::Raw),
        ("mean_reversion", Some(n)) => Some(Preprocessing::MeanReversion(n)),
        ("median_reversion", Some(n)) => Some(Preprocessing::MedianReversion(n)),
        _ => None,
    }
}

fn preprocessing_token(p: Preprocessing) -> String {
    match p {
        Preprocessing::Raw => "raw".into(),
        Preprocessing::MeanReversion(n) => format!("mean_reversion:{n}"),
        Preprocessing::MedianReversion(n) => format!("median_reversion:{n}"),
    }
}

fn parse_objective(s: &str) -> Option<Objective> {
    match s {
        "mean_wealth" => Some(Objective::MeanFinalWealth),
        "mean_log_wealth" => Some(Objective::MeanLogWealth),
        "worst_fold" => Some(Objective::WorstFoldWealth),
        _ => None,
    }
}

pub fn objective_name(o: Objective) -> &'static str {
    match o {
        Objective::MeanFinalWealth => "mean_wealth",
        Objective::MeanLogWealth => "mean_log_wealth",
        Objective::WorstFoldWealth => "worst_fold",
    }
}

fn parse_split_mode(s: &str) -> Option<SplitMode> {
    match s {
        "rolling" => Some(SplitMode::Rolling),
        "anchored" => Some(SplitMode::Anchored),
        _ => None,
    }
}

fn deform_params(t: &Table) -> Result<DeformParams, DataError> {
    let kind = t.choice("deform.kind", "general".to_string(), |s| Some(s.to_string()), "a deformation kind")?;
    let param = t.get::<f64>("deform.param", "a number")?;
    if kind == "general" || kind == "natural" {
        if param.is_some() {
            return Err(constraint("deform.param", format!("not used by deform.kind = {kind}")));
        }
    } else if t.has("deform.a") || t.has("deform.b") {
        return Err(constraint("deform.kind", "deform.a/deform.b are only accepted with deform.kind = general"));
    }
    let need = || param.ok_or_else(|| constraint("deform.param", format!("required by deform.kind = {kind}")));
    let kind = match kind.as_str() {
        "general" => DeformKind::General { a: t.or("deform.a", "a number", 0.0)?, b: t.or("deform.b", "a number", 0.0)? },
        "natural" => {
            if t.has("deform.a") || t.has("deform.b") {
                return Err(constraint("deform.kind", "deform.a/deform.b are only accepted with deform.kind = general"));
            }
            DeformKind::NaturalLog
        }
        "tsallis" => DeformKind::Tsallis(need()?),
        "kaniadakis" => DeformKind::Kaniadakis(need()?),
        "amari" => DeformKind::Amari(need()?),
        "abe" => DeformKind::Abe(need()?),
        "gamma" => DeformKind::Gamma(need()?),
        other => {
            let line = t.raw("deform.kind").map_or(0, |e| e.line);
            return Err(mismatch("deform.kind", line, other, "general|natural|tsallis|kaniadakis|amari|abe|gamma"));
        }
    };
    DeformParams::from_kind(kind).map_err(|e| constraint("deform", e.to_string()))
}

fn strategy(t: &Table) -> Result<StrategyConfig, DataError> {
    let params = deform_params(t)?;
    let q = t.or("loss.q", "a number", 1.0)?;
    let eta = t.or("lr.eta", "a number", 0.1)?;
    let schedule = t.choice("lr.schedule", RateSchedule::Scalar, parse_schedule, "scalar|power_of_weight")?;
    let gamma = t.get::<f64>("lr.gamma", "a number")?;
    let lr = match schedule {
        RateSchedule::Scalar if gamma.is_some_and(|g| g != 0.0) => {
            return Err(constraint("lr.gamma", "a nonzero gamma requires lr.schedule = power_of_weight"));
        }
        RateSchedule::Scalar => LearningRate::scalar(eta),
        RateSchedule::PowerOfWeight => LearningRate::power_of_weight(eta, gamma.unwrap_or(0.0)),
    };
    let negative_eta_cap = t.or("lr.negative_cap", "a number", crate::mirror::DEFAULT_NEGATIVE_ETA_CAP)?;
    let centering = t.choice("strategy.centering", CenteringVariant::WeightedMean, parse_centering, "weighted_mean|uniform_mean|none")?;
    let projection = t.choice("strategy.projection", ProjectionKind::L1Normalize, parse_projection, "l1|euclidean")?;
    let window = t.get::<usize>("preprocess.window", "a nonnegative integer")?;
    let mode = t.choice("preprocess.mode", "raw".to_string(), |s| Some(s.to_string()), "")?;
    let preprocessing = match mode.as_str() {
        "raw" if window.is_some() => return Err(constraint("preprocess.window", "not used by preprocess.mode = raw")),
        "raw" => Preprocessing::Raw,
        "mean_reversion" => Preprocessing::MeanReversion(window.unwrap_or(DEFAULT_WINDOW)),
        "median_reversion" => Preprocessing::MedianReversion(window.unwrap_or(DEFAULT_WINDOW)),
        other => {
            let line = t.raw("preprocess.mode").map_or(0, |e| e.line);
            return Err(mismatch("preprocess.mode", line, other, "raw|mean_reversion|median_reversion"));
        }
    };
    let rule = t.choice("sparsify.rule", "none".to_string(), |s| Some(s.to_string()), "")?;
    let threshold = t.get::<f64>("sparsify.threshold", "a number")?;
    let k = t.get::<usize>("sparsify.k", "a nonnegative integer")?;
    if threshold.is_some() && rule != "threshold" {
        return Err(constraint("sparsify.threshold", "only used by sparsify.rule = threshold"));
    }
    if k.is_some() && rule != "top_k" {
        return Err(constraint("sparsify.k", "only used by sparsify.rule = top_k"));
    }
    let sparsify = match rule.as_str() {
        "none" => Sparsify::None,
        "threshold" => Sparsify::Threshold(threshold.unwrap_or(DEFAULT_THRESHOLD)),
        "top_k" => Sparsify::TopK(k.unwrap_or(1)),
        "winner_takes_all" => Sparsify::WinnerTakesAll,
        other => {
            let line = t.raw("sparsify.rule").map_or(0, |e| e.line);
            return Err(mismatch("sparsify.rule", line, other, "none|threshold|top_k|winner_takes_all"));
        }
    };
    let cfg = StrategyConfig { params, q, lr, centering, projection, preprocessing, sparsify, negative_eta_cap };
    cfg.validate().map_err(|e| constraint("strategy", e.to_string()))?;
    Ok(cfg)
}

fn search(t: &Table, base: &StrategyConfig) -> Result<Option<SearchConfig>, DataError> {
    let method = t.choice("search.method", None, |s| match s {
        "grid" | "random" => Some(Some(s.to_string())),
        _ => None,
    }, "grid|random")?;
    let Some(method) = method else {
        if let Some(key) = t.entries.keys().find(|k| k.starts_with("search.") || k.starts_with("split.")) {
            return Err(constraint(key, "search and split keys require search.method"));
        }
        return Ok(None);
    };
    let objective = t.choice("search.objective", Objective::MeanFinalWealth, parse_objective, "mean_wealth|mean_log_wealth|worst_fold")?;
    let centering = t.choices("search.centering", parse_centering, "weighted_mean|uniform_mean|none")?.unwrap_or(vec![base.centering]);
    let projection = t.choices("search.projection", parse_projection, "l1|euclidean")?.unwrap_or(vec![base.projection]);
    let preprocessing = t
        .choices("search.preprocessing", parse_preprocessing, "raw|mean_reversion:N|median_reversion:N")?
        .unwrap_or(vec![base.preprocessing]);
    let method = if method == "grid" {
        if t.has("search.samples") {
            return Err(constraint("search.samples", "only used by search.method = random"));
        }
        let d = GridSpace::default();
        SearchMethod::Grid(GridSpace {
            a: t.list("search.a", "a list of numbers")?.unwrap_or(d.a),
            b: t.list("search.b", "a list of numbers")?.unwrap_or(d.b),
            q: t.list("search.q", "a list of numbers")?.unwrap_or(d.q),
            eta: t.list("search.eta", "a list of numbers")?.unwrap_or(d.eta),
            gamma: t.list("search.gamma", "a list of numbers")?.unwrap_or(d.gamma),
            centering,
            projection,
            preprocessing,
        })
    } else {
        let d = RandomSpace::default();
        let samples = t.or("search.samples", "a positive integer", 100usize)?;
        if samples == 0 {
            return Err(constraint("search.samples", "must be >= 1"));
        }
        SearchMethod::Random {
            space: RandomSpace {
                a: t.interval("search.a", d.a)?,
                b: t.interval("search.b", d.b)?,
                q: t.interval("search.q", d.q)?,
                eta: t.interval("search.eta", d.eta)?,
                gamma: t.interval("search.gamma", d.gamma)?,
                centering,
                projection,
                preprocessing,
            },
            samples,
        }
    };
    let split = SplitScheme {
        folds: t.or("split.folds", "a nonnegative integer", 0)?,
        train: t.or("split.train", "a positive integer", 100)?,
        test: t.or("split.test", "a positive integer", 25)?,
        mode: t.choice("split.mode", SplitMode::Rolling, parse_split_mode, "rolling|anchored")?,
    };
    if split.train == 0 || split.test == 0 {
        return Err(constraint("split", "train and test lengths must be >= 1"));
    }
    Ok(Some(SearchConfig { method, split, objective }))
}

impl RunConfig {
    /// Parses config text; relative paths are resolved against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, DataError> {
        let t = Table::parse(text)?;
        let strategy = strategy(&t)?;
        let initial_wealth: f64 = t.or("run.initial_wealth", "a number", 1.0)?;
        if !(initial_wealth > 0.0) || !initial_wealth.is_finite() {
            return Err(constraint("run.initial_wealth", "must be positive and finite"));
        }
        let resolve = |p: String| {
            let p = PathBuf::from(p);
            if p.is_relative() { base_dir.join(p) } else { p }
        };
        Ok(RunConfig {
            dataset: t.get::<String>("dataset.path", "a path")?.map(resolve),
            search: search(&t, &strategy)?,
            strategy,
            initial_wealth,
            output_dir: resolve(t.or("output.dir", "a path", "results".to_string())?),
            seed: t.or("run.seed", "a nonnegative integer", 0)?,
        })
    }

    /// Every effective setting, defaults included, as `(key, value)` pairs.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out = vec![(
            "dataset.path".to_string(),
            self.dataset.as_ref().map_or_else(|| "-".into(), |p| p.display().to_string()),
        )];
        out.extend(self.strategy.describe().into_iter().map(|(k, v)| (k.to_string(), v)));
        out.push(("run.initial_wealth".into(), format_number(self.initial_wealth)));
        out.push(("run.seed".into(), self.seed.to_string()));
        out.push(("output.dir".into(), self.output_dir.display().to_string()));
        if let Some(s) = &self.search {
            let nums = |v: &[f64]| v.iter().map(|x| format_number(*x)).collect::<Vec<_>>().join(", ");
            let pair = |(lo, hi): (f64, f64)| format!("{}, {}", format_number(lo), format_number(hi));
            let (method, space): (&str, Vec<(&str, String)>) = match &s.method {
                SearchMethod::Grid(g) => (
                    "grid",
                    vec![
                        ("search.a", nums(&g.a)),
                        ("search.b", nums(&g.b)),
                        ("search.q", nums(&g.q)),
                        ("search.eta", nums(&g.eta)),
                        ("search.gamma", nums(&g.gamma)),
                        ("search.centering", join(g.centering.iter().map(|c| centering_name(*c).to_string()))),
                        ("search.projection", join(g.projection.iter().map(|p| projection_name(*p).to_string()))),
                        ("search.preprocessing", join(g.preprocessing.iter().map(|p| preprocessing_token(*p)))),
                    ],
                ),
                SearchMethod::Random { space: r, samples } => (
                    "random",
                    vec![
                        ("search.samples", samples.to_string()),
                        ("search.a", pair(r.a)),
                        ("search.b", pair(r.b)),
                        ("search.q", pair(r.q)),
                        ("search.eta", pair(r.eta)),
                        ("search.gamma", pair(r.gamma)),
                        ("search.centering", join(r.centering.iter().map(|c| centering_name(*c).to_string()))),
                        ("search.projection", join(r.projection.iter().map(|p| projection_name(*p).to_string()))),
                        ("search.preprocessing", join(r.preprocessing.iter().map(|p| preprocessing_token(*p)))),
                    ],
                ),
            };
            out.push(("search.method".into(), method.into()));
            out.push(("search.objective".into(), objective_name(s.objective).into()));
            out.extend(space.into_iter().map(|(k, v)| (k.to_string(), v)));
            let mode = match s.split.mode {
                SplitMode::Rolling => "rolling",
                SplitMode::Anchored => "anchored",
            };
            out.push(("split.mode".into(), mode.into()));
            out.push(("split.train".into(), s.split.train.to_string()));
            out.push(("split.test".into(), s.split.test.to_string()));
            out.push(("split.folds".into(), s.split.folds.to_string()));
        }
        out
    }
}

fn join(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(", ")
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig, DataError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| DataError::Io { path: path.to_path_buf(), source })?;
    RunConfig::parse(&text, path.parent().unwrap_or(Path::new(".")))
}
