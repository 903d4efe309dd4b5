//! Online portfolio selection with generalized EG updates.

use std::fmt;

use thiserror::Error;

use crate::deform::DeformParams;
use crate::market::{preprocess, price_relatives, MarketError, Preprocessing, PriceSeries};
use crate::mirror::{
    geg_step_normalized, project_l1_normalize, CenteringVariant, LearningRate, MirrorError,
    PortfolioWeights, ProjectionKind, RateSchedule, DEFAULT_NEGATIVE_ETA_CAP,
};

/// Loss exponents this close to 1 use the `-ln` branch.
pub const LOSS_Q_ONE_TOL: f64 = 1e-9;

/// Learning rate of the classical EG baseline.
pub const CLASSICAL_EG_ETA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OlpsError {
    #[error(transparent)]
    Mirror(#[from] MirrorError),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error("portfolio return w'x = {value} must be positive")]
    NonPositiveReturn { value: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("sparsification zeroed every weight")]
    EmptySparsification,
    #[error("invalid strategy configuration: {0}")]
    InvalidConfig(String),
    #[error("period {period}: {source}")]
    AtPeriod {
        period: usize,
        #[source]
        source: Box<OlpsError>,
    },
}

/// Post-processing of the traded portfolio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sparsify {
    None,
    /// Zero entries below `τ`, then renormalize.
    Threshold(f64),
    /// Keep the `k` largest entries, then renormalize.
    TopK(usize),
    WinnerTakesAll,
}

impl fmt::Display for Sparsify {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sparsify::None => write!(f, "none"),
            Sparsify::Threshold(tau) => write!(f, "threshold({tau})"),
            Sparsify::TopK(k) => write!(f, "top_k({k})"),
            Sparsify::WinnerTakesAll => write!(f, "winner_takes_all"),
        }
    }
}

/// Full hyperparameter set of a GEG portfolio strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyConfig {
    pub params: DeformParams,
    /// Exponent of the Tsallis-log loss.
    pub q: f64,
    pub lr: LearningRate,
    pub centering: CenteringVariant,
    pub projection: ProjectionKind,
    pub preprocessing: Preprocessing,
    pub sparsify: Sparsify,
    pub negative_eta_cap: f64,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            params: DeformParams::NATURAL,
            q: 1.0,
            lr: LearningRate::scalar(0.1),
            centering: CenteringVariant::WeightedMean,
            projection: ProjectionKind::L1Normalize,
            preprocessing: Preprocessing::Raw,
            sparsify: Sparsify::None,
            negative_eta_cap: DEFAULT_NEGATIVE_ETA_CAP,
        }
    }
}

impl StrategyConfig {
    /// Classical EG for OLPS: natural log link, log-wealth loss, scalar rate.
    pub fn classical_eg(eta: f64) -> Self {
        StrategyConfig { lr: LearningRate::scalar(eta), ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), OlpsError> {
        // re-run the pair check in case the struct was assembled by hand
        DeformParams::new(self.params.a(), self.params.b())
            .map_err(|e| OlpsError::InvalidConfig(e.to_string()))?;
        if !self.q.is_finite() {
            return Err(OlpsError::InvalidConfig(format!("loss q={} must be finite", self.q)));
        }
        if !(self.negative_eta_cap >= 0.0) {
            return Err(OlpsError::InvalidConfig(format!(
                "negative eta cap {} must be nonnegative",
                self.negative_eta_cap
            )));
        }
        self.lr
            .validate(self.negative_eta_cap)
            .map_err(|e| OlpsError::InvalidConfig(e.to_string()))?;
        match self.preprocessing {
            Preprocessing::MeanReversion(0) | Preprocessing::MedianReversion(0) => {
                return Err(OlpsError::InvalidConfig("reversion window must be >= 1".into()));
            }
            _ => {}
        }
        match self.sparsify {
            Sparsify::Threshold(tau) if !(0.0..1.0).contains(&tau) => {
                return Err(OlpsError::InvalidConfig(format!("threshold {tau} must lie in [0, 1)")));
            }
            Sparsify::TopK(0) => return Err(OlpsError::InvalidConfig("top_k needs k >= 1".into())),
            _ => {}
        }
        Ok(())
    }

    /// Every effective hyperparameter as `(config key, value)` pairs.
    pub fn describe(&self) -> Vec<(&'static str, String)> {
        let (mode, window) = match self.preprocessing {
            Preprocessing::Raw => ("raw", None),
            Preprocessing::MeanReversion(n) => ("mean_reversion", Some(n)),
            Preprocessing::MedianReversion(n) => ("median_reversion", Some(n)),
        };
        let (rule, threshold, k) = match self.sparsify {
            Sparsify::None => ("none", None, None),
            Sparsify::Threshold(t) => ("threshold", Some(t), None),
            Sparsify::TopK(k) => ("top_k", None, Some(k)),
            Sparsify::WinnerTakesAll => ("winner_takes_all", None, None),
        };
        let dash = || "-".to_string();
        vec![
            ("deform.a", self.params.a().to_string()),
            ("deform.b", self.params.b().to_string()),
            ("loss.q", self.q.to_string()),
            ("lr.eta", self.lr.eta.to_string()),
            ("lr.gamma", self.lr.gamma.to_string()),
            ("lr.schedule", schedule_name(self.lr.schedule).to_string()),
            ("lr.negative_cap", self.negative_eta_cap.to_string()),
            ("strategy.centering", centering_name(self.centering).to_string()),
            ("strategy.projection", projection_name(self.projection).to_string()),
            ("preprocess.mode", mode.to_string()),
            ("preprocess.window", window.map_or_else(dash, |n| n.to_string())),
            ("sparsify.rule", rule.to_string()),
            ("sparsify.threshold", threshold.map_or_else(dash, |t| t.to_string())),
            ("sparsify.k", k.map_or_else(dash, |k| k.to_string())),
        ]
    }
}

pub fn schedule_name(s: RateSchedule) -> &'static str {
    match s {
        RateSchedule::Scalar => "scalar",
        RateSchedule::PowerOfWeight => "power_of_weight",
    }
}

pub fn centering_name(c: CenteringVariant) -> &'static str {
    match c {
        CenteringVariant::WeightedMean => "weighted_mean",
        CenteringVariant::UniformMean => "uniform_mean",
        CenteringVariant::None => "none",
    }
}

pub fn projection_name(p: ProjectionKind) -> &'static str {
    match p {
        ProjectionKind::L1Normalize => "l1",
        ProjectionKind::EuclideanSimplex => "euclidean",
    }
}

fn portfolio_return(w: &PortfolioWeights, x: &[f64]) -> Result<f64, OlpsError> {
    if w.len() != x.len() {
        return Err(OlpsError::DimensionMismatch { left: w.len(), right: x.len() });
    }
    let value = w.dot(x);
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(OlpsError::NonPositiveReturn { value })
    }
}

/// `-log^T_q(wᵀx̂)`, interpolating between the linear loss (`q = 0`, shifted
/// by one) and the log-wealth loss (`q = 1`).
pub fn tsallis_log_loss(q: f64, w: &PortfolioWeights, xhat: &[f64]) -> Result<f64, OlpsError> {
    let s = portfolio_return(w, xhat)?;
    Ok(if q == 0.0 {
        1.0 - s
    } else if (q - 1.0).abs() < LOSS_Q_ONE_TOL {
        -s.ln()
    } else {
        let one_minus_q = 1.0 - q;
        -(one_minus_q * s.ln()).exp_m1() / one_minus_q
    })
}

/// Gradient of the normalized loss `L(w/‖w‖₁)`, centered as requested;
/// `CenteringVariant::None` returns the raw gradient `-x̂ / (wᵀx̂)^q`.
pub fn olps_gradient(
    q: f64,
    w: &PortfolioWeights,
    xhat: &[f64],
    centering: CenteringVariant,
) -> Result<Vec<f64>, OlpsError> {
    let s = portfolio_return(w, xhat)?;
    let scale = s.powf(-q);
    let shift = match centering {
        CenteringVariant::WeightedMean => s,
        CenteringVariant::UniformMean => xhat.iter().sum::<f64>() / xhat.len() as f64,
        CenteringVariant::None => 0.0,
    };
    Ok(xhat.iter().map(|x| -(x - shift) * scale).collect())
}

/// One GEG update of the portfolio after observing `x̂_t`.
pub fn geg_olps_step(
    cfg: &StrategyConfig,
    w: &PortfolioWeights,
    xhat: &[f64],
) -> Result<PortfolioWeights, OlpsError> {
    let grad = olps_gradient(cfg.q, w, xhat, cfg.centering)?;
    Ok(geg_step_normalized(cfg.params, w, &grad, &cfg.lr, cfg.projection)?)
}

/// Sparsifies a simplex portfolio and renormalizes it.
pub fn sparsify(w: &PortfolioWeights, rule: Sparsify) -> Result<PortfolioWeights, OlpsError> {
    let v = w.as_slice();
    let kept: Vec<f64> = match rule {
        Sparsify::None => return Ok(w.clone()),
        Sparsify::Threshold(tau) => v.iter().map(|&x| if x < tau { 0.0 } else { x }).collect(),
        Sparsify::TopK(k) => {
            let mut order: Vec<usize> = (0..v.len()).collect();
            // stable sort: equal weights keep the lower index first
            order.sort_by(|&i, &j| v[j].total_cmp(&v[i]));
            let mut out = vec![0.0; v.len()];
            for &i in order.iter().take(k) {
                out[i] = v[i];
            }
            out
        }
        Sparsify::WinnerTakesAll => {
            let mut best = 0;
            for (i, &x) in v.iter().enumerate() {
                if x > v[best] {
                    best = i;
                }
            }
            let mut out = vec![0.0; v.len()];
            out[best] = 1.0;
            return Ok(PortfolioWeights::new(out)?);
        }
    };
    if kept.iter().all(|&x| x == 0.0) {
        return Err(OlpsError::EmptySparsification);
    }
    Ok(project_l1_normalize(&kept)?)
}

/// Summary statistics of a wealth path. Everything except `final_wealth` is
/// reporting plumbing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub final_wealth: f64,
    pub max_drawdown: f64,
    pub mean_log_return: f64,
    pub std_log_return: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestResult {
    pub initial_wealth: f64,
    /// Portfolio held during each period (after sparsification).
    pub weights: Vec<Vec<f64>>,
    /// `w_tᵀx_t` on raw relatives.
    pub returns: Vec<f64>,
    /// Cumulative wealth at the end of each period.
    pub wealth: Vec<f64>,
    pub metrics: Metrics,
}

impl BacktestResult {
    pub fn final_wealth(&self) -> f64 {
        self.metrics.final_wealth
    }

    fn from_trajectory(initial_wealth: f64, weights: Vec<Vec<f64>>, returns: Vec<f64>) -> Self {
        let mut wealth = Vec::with_capacity(returns.len());
        let mut current = initial_wealth;
        let mut peak = initial_wealth;
        let mut max_drawdown: f64 = 0.0;
        for &r in &returns {
            current *= r;
            wealth.push(current);
            peak = peak.max(current);
            max_drawdown = max_drawdown.max((peak - current) / peak);
        }
        let logs: Vec<f64> = returns.iter().map(|r| r.ln()).collect();
        let n = logs.len() as f64;
        let mean = if logs.is_empty() { 0.0 } else { logs.iter().sum::<f64>() / n };
        let std = if logs.len() < 2 {
            0.0
        } else {
            (logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        BacktestResult {
            initial_wealth,
            weights,
            returns,
            wealth,
            metrics: Metrics {
                final_wealth: current,
                max_drawdown,
                mean_log_return: mean,
                std_log_return: std,
            },
        }
    }
}

fn at_period(period: usize) -> impl Fn(OlpsError) -> OlpsError {
    move |e| OlpsError::AtPeriod { period, source: Box::new(e) }
}

/// Runs the strategy over every period of `prices`, starting from the uniform
/// portfolio. Wealth is accounted on raw relatives; the update uses the
/// preprocessed signal available at the end of each period.
pub fn backtest(
    prices: &PriceSeries,
    cfg: &StrategyConfig,
    initial_wealth: f64,
) -> Result<BacktestResult, OlpsError> {
    cfg.validate()?;
    if !(initial_wealth > 0.0) || !initial_wealth.is_finite() {
        return Err(OlpsError::InvalidConfig(format!("initial wealth {initial_wealth} must be positive")));
    }
    let raw = price_relatives(prices);
    let signal = preprocess(prices, cfg.preprocessing);
    let periods = raw.n_periods();
    let mut state = PortfolioWeights::uniform(prices.n_assets());
    let mut weights = Vec::with_capacity(periods);
    let mut returns = Vec::with_capacity(periods);
    for t in 0..periods {
        let held = sparsify(&state, cfg.sparsify).map_err(at_period(t))?;
        returns.push(portfolio_return(&held, raw.row(t)).map_err(at_period(t))?);
        weights.push(held.into_vec());
        if t + 1 < periods {
            state = geg_olps_step(cfg, &state, signal.row(t)).map_err(at_period(t))?;
        }
    }
    Ok(BacktestResult::from_trajectory(initial_wealth, weights, returns))
}

/// Uniform buy-and-hold: the initial uniform allocation drifts with prices.
pub fn buy_and_hold(prices: &PriceSeries, initial_wealth: f64) -> Result<BacktestResult, OlpsError> {
    let raw = price_relatives(prices);
    let mut w = PortfolioWeights::uniform(prices.n_assets());
    let mut weights = Vec::new();
    let mut returns = Vec::new();
    for x in raw.rows() {
        let r = portfolio_return(&w, x)?;
        let drifted: Vec<f64> = w.as_slice().iter().zip(x).map(|(w, x)| w * x).collect();
        weights.push(w.into_vec());
        returns.push(r);
        w = project_l1_normalize(&drifted)?;
    }
    Ok(BacktestResult::from_trajectory(initial_wealth, weights, returns))
}

/// Uniform constant-rebalanced portfolio.
pub fn uniform_crp(prices: &PriceSeries, initial_wealth: f64) -> Result<BacktestResult, OlpsError> {
    let raw = price_relatives(prices);
    let w = PortfolioWeights::uniform(prices.n_assets());
    let mut weights = Vec::new();
    let mut returns = Vec::new();
    for x in raw.rows() {
        returns.push(portfolio_return(&w, x)?);
        weights.push(w.as_slice().to_vec());
    }
    Ok(BacktestResult::from_trajectory(initial_wealth, weights, returns))
}

/// Classical EG for portfolios, `w_i ← w_i exp(η x_i / wᵀx)` then normalize,
/// written out directly rather than through the generalized machinery.
pub fn classical_eg(prices: &PriceSeries, eta: f64, initial_wealth: f64) -> Result<BacktestResult, OlpsError> {
    let raw = price_relatives(prices);
    let mut w = PortfolioWeights::uniform(prices.n_assets());
    let mut weights = Vec::new();
    let mut returns = Vec::new();
    for x in raw.rows() {
        let r = portfolio_return(&w, x)?;
        let grown: Vec<f64> = w.as_slice().iter().zip(x).map(|(w, x)| w * (eta * x / r).exp()).collect();
        weights.push(w.into_vec());
        returns.push(r);
        w = project_l1_normalize(&grown)?;
    }
    Ok(BacktestResult::from_trajectory(initial_wealth, weights, returns))
}

/// Buy-and-hold, uniform CRP and classical EG on the same prices.
pub fn run_baselines(
    prices: &PriceSeries,
    initial_wealth: f64,
) -> Result<Vec<(&'static str, BacktestResult)>, OlpsError> {
    Ok(vec![
        ("buy_and_hold", buy_and_hold(prices, initial_wealth)?),
        ("uniform_crp", uniform_crp(prices, initial_wealth)?),
        ("classical_eg", classical_eg(prices, CLASSICAL_EG_ETA, initial_wealth)?),
    ])
}
