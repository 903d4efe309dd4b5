//! Grid and random hyperparameter search scored by walk-forward validation.
//!
//! Each fold runs the online strategy from the start of its training window to
//! the end of its test window; the training periods only warm up the weights
//! and the fold is scored by the wealth multiple earned over the test periods.
//! Configurations are evaluated in parallel and merged by index, so the ranking
//! does not depend on scheduling.

use std::cmp::Ordering;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::deform::DeformParams;
use crate::market::{Preprocessing, PriceSeries};
use crate::mirror::{CenteringVariant, LearningRate, ProjectionKind};
use crate::olps::{backtest, OlpsError, StrategyConfig};

/// Give up on rejection sampling of `(a, b)` after this many draws per sample.
const MAX_REJECTIONS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("{periods} periods cannot hold a fold of {train} train + {test} test periods")]
    InsufficientData { periods: usize, train: usize, test: usize },
    #[error("invalid split scheme: {0}")]
    InvalidScheme(String),
    #[error("search space is empty after removing {invalid} invalid combinations")]
    EmptySpace { invalid: usize },
    #[error("invalid search space: {0}")]
    InvalidSpace(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// Fixed-length training window that slides forward.
    Rolling,
    /// Training window always starts at period 0.
    Anchored,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitScheme {
    /// Maximum number of folds; 0 keeps every fold that fits.
    pub folds: usize,
    pub train: usize,
    pub test: usize,
    pub mode: SplitMode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Range<usize>,
    pub test: Range<usize>,
}

/// Chronological folds over `periods` relative periods; consecutive test
/// windows are adjacent and never overlap.
pub fn walk_forward_splits(periods: usize, s: &SplitScheme) -> Result<Vec<Fold>, SearchError> {
    if s.train == 0 || s.test == 0 {
        return Err(SearchError::InvalidScheme("train and test lengths must be positive".into()));
    }
    if periods < s.train + s.test {
        return Err(SearchError::InsufficientData { periods, train: s.train, test: s.test });
    }
    let mut folds = Vec::new();
    let mut test_start = s.train;
    while test_start + s.test <= periods {
        let train_start = match s.mode {
            SplitMode::Rolling => test_start - s.train,
            SplitMode::Anchored => 0,
        };
        folds.push(Fold { train: train_start..test_start, test: test_start..test_start + s.test });
        if s.folds != 0 && folds.len() == s.folds {
            break;
        }
        test_start += s.test;
    }
    Ok(folds)
}

/// Statistic of the per-fold test wealth multiples that is maximized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    #[default]
    MeanFinalWealth,
    MeanLogWealth,
    WorstFoldWealth,
}

impl Objective {
    pub fn score(self, fold_wealth: &[f64]) -> f64 {
        let n = fold_wealth.len() as f64;
        match self {
            Objective::MeanFinalWealth => fold_wealth.iter().sum::<f64>() / n,
            Objective::MeanLogWealth => fold_wealth.iter().map(|w| w.ln()).sum::<f64>() / n,
            Objective::WorstFoldWealth => fold_wealth.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

/// Value lists for grid search; the grid is their Cartesian product.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpace {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub q: Vec<f64>,
    pub eta: Vec<f64>,
    /// `γ = 0` gives a scalar rate, any other value the `η·w^γ` schedule.
    pub gamma: Vec<f64>,
    pub centering: Vec<CenteringVariant>,
    pub projection: Vec<ProjectionKind>,
    pub preprocessing: Vec<Preprocessing>,
}

impl Default for GridSpace {
    fn default() -> Self {
        let ab: Vec<f64> = (-3..=3).map(|k| 0.25 * k as f64).collect();
        GridSpace {
            a: ab.clone(),
            b: ab,
            q: vec![0.0, 0.5, 1.0],
            eta: (0..5).map(|k| 10f64.powf(-2.0 + 0.5 * k as f64)).collect(),
            gamma: vec![0.0, 0.5, 1.0],
            centering: vec![CenteringVariant::WeightedMean],
            projection: vec![ProjectionKind::L1Normalize],
            preprocessing: vec![Preprocessing::Raw],
        }
    }
}

impl GridSpace {
    /// Number of grid points before filtering.
    pub fn size(&self) -> usize {
        self.a.len()
            * self.b.len()
            * self.q.len()
            * self.eta.len()
            * self.gamma.len()
            * self.centering.len()
            * self.projection.len()
            * self.preprocessing.len()
    }

    /// Valid configurations in lexicographic axis order, plus the number of
    /// grid points that failed validation.
    pub fn configurations(&self, base: &StrategyConfig) -> (Vec<StrategyConfig>, usize) {
        let mut out = Vec::new();
        let mut invalid = 0;
        for &a in &self.a {
            for &b in &self.b {
                let params = DeformParams::new(a, b);
                for &q in &self.q {
                    for &eta in &self.eta {
                        for &gamma in &self.gamma {
                            for &centering in &self.centering {
                                for &projection in &self.projection {
                                    for &preprocessing in &self.preprocessing {
                                        let Ok(params) = params else {
                                            invalid += 1;
                                            continue;
                                        };
                                        let cfg = StrategyConfig {
                                            params,
                                            q,
                                            lr: rate(eta, gamma),
                                            centering,
                                            projection,
                                            preprocessing,
                                            ..*base
                                        };
                                        if cfg.validate().is_ok() {
                                            out.push(cfg);
                                        } else {
                                            invalid += 1;
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        (out, invalid)
    }
}

fn rate(eta: f64, gamma: f64) -> LearningRate {
    if gamma == 0.0 {
        LearningRate::scalar(eta)
    } else {
        LearningRate::power_of_weight(eta, gamma)
    }
}

/// Sampling intervals for random search. `eta` is sampled log-uniformly when
/// both bounds are positive, uniformly otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomSpace {
    pub a: (f64, f64),
    pub b: (f64, f64),
    pub q: (f64, f64),
    pub eta: (f64, f64),
    pub gamma: (f64, f64),
    pub centering: Vec<CenteringVariant>,
    pub projection: Vec<ProjectionKind>,
    pub preprocessing: Vec<Preprocessing>,
}

impl Default for RandomSpace {
    fn default() -> Self {
        RandomSpace {
            a: (-0.75, 0.75),
            b: (-0.75, 0.75),
            q: (0.0, 1.0),
            eta: (0.01, 1.0),
            gamma: (0.0, 1.0),
            centering: vec![CenteringVariant::WeightedMean],
            projection: vec![ProjectionKind::L1Normalize],
            preprocessing: vec![Preprocessing::Raw],
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        lo + (hi - lo) * rng.random::<f64>()
    }
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, items: &[T]) -> T {
    items[rng.random_range(0..items.len())]
}

impl RandomSpace {
    fn check(&self) -> Result<(), SearchError> {
        for (name, (lo, hi)) in [("a", self.a), ("b", self.b), ("q", self.q), ("eta", self.eta), ("gamma", self.gamma)] {
            if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(SearchError::InvalidSpace(format!("interval for {name} is [{lo}, {hi}]")));
            }
        }
        if self.centering.is_empty() || self.projection.is_empty() || self.preprocessing.is_empty() {
            return Err(SearchError::InvalidSpace("categorical choices must be nonempty".into()));
        }
        Ok(())
    }

    /// Draws `samples` valid configurations; returns them with the number of
    /// rejected draws.
    pub fn sample(
        &self,
        base: &StrategyConfig,
        samples: usize,
        seed: u64,
    ) -> Result<(Vec<StrategyConfig>, usize), SearchError> {
        self.check()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(samples);
        let mut rejected = 0;
        while out.len() < samples {
            let mut attempts = 0;
            let params = loop {
                let a = uniform(&mut rng, self.a);
                let b = uniform(&mut rng, self.b);
                match DeformParams::new(a, b) {
                    Ok(p) => break p,
                    Err(_) => {
                        rejected += 1;
                        attempts += 1;
                        if attempts >= MAX_REJECTIONS {
                            return Err(SearchError::EmptySpace { invalid: rejected });
                        }
                    }
                }
            };
            let q = uniform(&mut rng, self.q);
            let eta = if self.eta.0 > 0.0 {
                uniform(&mut rng, (self.eta.0.ln(), self.eta.1.ln())).exp()
            } else {
                uniform(&mut rng, self.eta)
            };
            let gamma = uniform(&mut rng, self.gamma);
            let cfg = StrategyConfig {
                params,
                q,
                lr: rate(eta, gamma),
                centering: pick(&mut rng, &self.centering),
                projection: pick(&mut rng, &self.projection),
                preprocessing: pick(&mut rng, &self.preprocessing),
                ..*base
            };
            if cfg.validate().is_ok() {
                out.push(cfg);
            } else {
                rejected += 1;
            }
        }
        Ok((out, rejected))
    }
}

/// Outcome of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Position in the enumeration order (grid order or draw order).
    pub index: usize,
    pub config: StrategyConfig,
    /// Test-window wealth multiple per fold; empty when the run failed.
    pub fold_wealth: Vec<f64>,
    pub score: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    /// Best first; failed configurations last.
    pub ranked: Vec<Evaluation>,
    pub folds: Vec<Fold>,
    /// Combinations skipped (grid) or draws rejected (random) by validation.
    pub invalid: usize,
    pub objective: Objective,
}

impl SearchReport {
    pub fn best(&self) -> Option<&Evaluation> {
        self.ranked.first().filter(|e| e.score.is_some())
    }

    pub fn failed(&self) -> usize {
        self.ranked.iter().filter(|e| e.score.is_none()).count()
    }
}

/// Test-window wealth multiple of `cfg` on each fold.
pub fn evaluate_folds(prices: &PriceSeries, cfg: &StrategyConfig, folds: &[Fold]) -> Result<Vec<f64>, OlpsError> {
    folds
        .iter()
        .map(|fold| {
            // relatives [s, e) need prices s..=e
            let window = prices.slice(fold.train.start, fold.test.end)?;
            let run = backtest(&window, cfg, 1.0)?;
            let skip = fold.test.start - fold.train.start;
            Ok(run.returns[skip..].iter().product())
        })
        .collect()
}

fn compare_configs(x: &StrategyConfig, y: &StrategyConfig) -> Ordering {
    let key = |c: &StrategyConfig| [c.params.a(), c.params.b(), c.q, c.lr.eta, c.lr.gamma];
    key(x)
        .iter()
        .zip(key(y).iter())
        .map(|(u, v)| u.total_cmp(v))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
        .then(x.centering.cmp(&y.centering))
        .then(x.projection.cmp(&y.projection))
        .then(x.preprocessing.cmp(&y.preprocessing))
}

fn rank(mut evaluations: Vec<Evaluation>) -> Vec<Evaluation> {
    evaluations.sort_by(|x, y| match (x.score, y.score) {
        (Some(sx), Some(sy)) => sy.total_cmp(&sx).then_with(|| compare_configs(&x.config, &y.config)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => compare_configs(&x.config, &y.config),
    });
    evaluations
}

/// Evaluates every configuration on the folds in parallel and ranks them.
pub fn evaluate_all(
    configs: Vec<StrategyConfig>,
    prices: &PriceSeries,
    folds: &[Fold],
    objective: Objective,
) -> Vec<Evaluation> {
    let evaluations = configs
        .into_par_iter()
        .enumerate()
        .map(|(index, config)| match evaluate_folds(prices, &config, folds) {
            Ok(fold_wealth) => {
                let score = objective.score(&fold_wealth);
                Evaluation { index, config, fold_wealth, score: Some(score), error: None }
            }
            Err(e) => Evaluation { index, config, fold_wealth: Vec::new(), score: None, error: Some(e.to_string()) },
        })
        .collect();
    rank(evaluations)
}

pub fn grid_search(
    space: &GridSpace,
    base: &StrategyConfig,
    prices: &PriceSeries,
    scheme: &SplitScheme,
    objective: Objective,
) -> Result<SearchReport, SearchError> {
    let folds = walk_forward_splits(prices.n_periods() - 1, scheme)?;
    let (configs, invalid) = space.configurations(base);
    if configs.is_empty() {
        return Err(SearchError::EmptySpace { invalid });
    }
    let ranked = evaluate_all(configs, prices, &folds, objective);
    Ok(SearchReport { ranked, folds, invalid, objective })
}

pub fn random_search(
    space: &RandomSpace,
    base: &StrategyConfig,
    prices: &PriceSeries,
    scheme: &SplitScheme,
    objective: Objective,
    samples: usize,
    seed: u64,
) -> Result<SearchReport, SearchError> {
    if samples == 0 {
        return Err(SearchError::InvalidSpace("random search needs at least one sample".into()));
    }
    let folds = walk_forward_splits(prices.n_periods() - 1, scheme)?;
    let (configs, invalid) = space.sample(base, samples, seed)?;
    let ranked = evaluate_all(configs, prices, &folds, objective);
    Ok(SearchReport { ranked, folds, invalid, objective })
}
