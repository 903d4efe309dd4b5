//! Price matrices and the relative series derived from them.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarketError {
    #[error("price series needs at least {min} {what}, got {got}")]
    TooSmall { what: &'static str, min: usize, got: usize },
    #[error("row {row} has {got} prices, expected {expected}")]
    Ragged { row: usize, got: usize, expected: usize },
    #[error("price at row {row}, column {col} must be positive and finite, got {value}")]
    InvalidPrice { row: usize, col: usize, value: f64 },
    #[error("{labels} period labels for {rows} rows")]
    LabelCount { labels: usize, rows: usize },
    #[error("{names} asset names for {cols} columns")]
    AssetCount { names: usize, cols: usize },
}

/// `T × N` matrix of strictly positive close prices, rows in chronological order.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    periods: Vec<String>,
    assets: Vec<String>,
    prices: Vec<f64>,
}

impl PriceSeries {
    pub fn new(periods: Vec<String>, assets: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self, MarketError> {
        if rows.len() < 2 {
            return Err(MarketError::TooSmall { what: "periods", min: 2, got: rows.len() });
        }
        let n = rows[0].len();
        if n < 2 {
            return Err(MarketError::TooSmall { what: "assets", min: 2, got: n });
        }
        if periods.len() != rows.len() {
            return Err(MarketError::LabelCount { labels: periods.len(), rows: rows.len() });
        }
        if assets.len() != n {
            return Err(MarketError::AssetCount { names: assets.len(), cols: n });
        }
        let mut prices = Vec::with_capacity(rows.len() * n);
        for (row, values) in rows.iter().enumerate() {
            if values.len() != n {
                return Err(MarketError::Ragged { row, got: values.len(), expected: n });
            }
            for (col, &value) in values.iter().enumerate() {
                if !(value > 0.0) || !value.is_finite() {
                    return Err(MarketError::InvalidPrice { row, col, value });
                }
            }
            prices.extend_from_slice(values);
        }
        Ok(PriceSeries { periods, assets, prices })
    }

    /// Builds a series with generated labels (`0, 1, …` and `asset0, asset1, …`).
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, MarketError> {
        let periods = (0..rows.len()).map(|t| t.to_string()).collect();
        let n = rows.first().map_or(0, Vec::len);
        let assets = (0..n).map(|i| format!("asset{i}")).collect();
        Self::new(periods, assets, rows)
    }

    pub fn n_periods(&self) -> usize {
        self.periods.len()
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    pub fn periods(&self) -> &[String] {
        &self.periods
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn row(&self, t: usize) -> &[f64] {
        let n = self.n_assets();
        &self.prices[t * n..(t + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.prices.chunks_exact(self.n_assets())
    }

    /// Rows `start..=end` as a new series.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self, MarketError> {
        let rows = (start..=end).map(|t| self.row(t).to_vec()).collect();
        Self::new(self.periods[start..=end].to_vec(), self.assets.clone(), rows)
    }
}

/// How the update signal `x̂_t` is derived from prices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Preprocessing {
    Raw,
    /// `mean(p_t, …, p_{t-n}) ⊘ p_t`
    MeanReversion(usize),
    /// `median(p_t, …, p_{t-n}) ⊘ p_t`
    MedianReversion(usize),
}

impl fmt::Display for Preprocessing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preprocessing::Raw => write!(f, "raw"),
            Preprocessing::MeanReversion(n) => write!(f, "mean_reversion({n})"),
            Preprocessing::MedianReversion(n) => write!(f, "median_reversion({n})"),
        }
    }
}

/// `(T-1) × N` relatives; row `t-1` holds the values for period `t = 1..T-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeSeries {
    mode: Preprocessing,
    n_assets: usize,
    values: Vec<f64>,
}

impl RelativeSeries {
    pub fn mode(&self) -> Preprocessing {
        self.mode
    }

    pub fn n_periods(&self) -> usize {
        self.values.len() / self.n_assets
    }

    pub fn n_assets(&self) -> usize {
        self.n_assets
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.n_assets..(t + 1) * self.n_assets]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_assets)
    }
}

/// `x_{i,t} = p_{i,t} / p_{i,t-1}`.
pub fn price_relatives(prices: &PriceSeries) -> RelativeSeries {
    preprocess(prices, Preprocessing::Raw)
}

/// Update signal for each period `t = 1..T-1`; reversion windows are truncated
/// at the start of the series.
pub fn preprocess(prices: &PriceSeries, mode: Preprocessing) -> RelativeSeries {
    let n = prices.n_assets();
    let mut values = Vec::with_capacity((prices.n_periods() - 1) * n);
    let mut window = Vec::new();
    for t in 1..prices.n_periods() {
        let current = prices.row(t);
        match mode {
            Preprocessing::Raw => {
                let previous = prices.row(t - 1);
                values.extend(current.iter().zip(previous).map(|(p, q)| p / q));
            }
            Preprocessing::MeanReversion(len) | Preprocessing::MedianReversion(len) => {
                let first = t.saturating_sub(len);
                for (i, &p_now) in current.iter().enumerate() {
                    window.clear();
                    window.extend((first..=t).map(|s| prices.row(s)[i]));
                    let stat = if matches!(mode, Preprocessing::MeanReversion(_)) {
                        window.iter().sum::<f64>() / window.len() as f64
                    } else {
                        median(&mut window)
                    };
                    values.push(stat / p_now);
                }
            }
        }
    }
    RelativeSeries { mode, n_assets: n, values }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}
