//! CSV price ingestion and result files.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::market::{MarketError, PriceSeries};
use crate::olps::{centering_name, projection_name, schedule_name, BacktestResult};
use crate::search::SearchReport;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: missing value in column {column:?}")]
    MissingValue { line: u64, column: String },
    #[error("line {line}: price at row {row}, column {column:?} must be positive and finite, got {value}")]
    InvalidPrice { line: u64, row: usize, column: String, value: f64 },
    #[error("line {line}: duplicate period label {label:?}")]
    DuplicatePeriod { line: u64, label: String },
    #[error("line {line}: period {label:?} is out of order (follows {previous:?})")]
    UnsortedPeriod { line: u64, label: String, previous: String },
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error("line {line}: unknown configuration key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: {key} expects {expected}, got {value:?}")]
    TypeMismatch { line: usize, key: String, expected: &'static str, value: String },
    #[error("{key}: {invariant}")]
    Constraint { key: String, invariant: String },
}

impl DataError {
    pub fn is_io(&self) -> bool {
        matches!(self, DataError::Io { .. })
    }
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> DataError + '_ {
    move |source| DataError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DataFormat {
    #[default]
    Csv,
}

/// Provenance of a loaded price table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub source: PathBuf,
    pub n_assets: usize,
    pub n_periods: usize,
    pub first_period: String,
    pub last_period: String,
    /// SHA-256 of the raw file bytes, lowercase hex.
    pub checksum: String,
}

impl DatasetManifest {
    /// Whether the file on disk still hashes to the recorded checksum.
    pub fn verify(&self) -> Result<bool, DataError> {
        let bytes = fs::read(&self.source).map_err(io_error(&self.source))?;
        Ok(sha256_hex(&bytes) == self.checksum)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub prices: PriceSeries,
    pub manifest: DatasetManifest,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Loads a price table: a header row, then one row per period with the
/// period label in the first column and one strictly positive price per asset.
///
/// Labels must be strictly increasing — numerically when every label parses as
/// a number, lexicographically otherwise (ISO dates sort correctly).
pub fn load_prices(path: impl AsRef<Path>, format: DataFormat) -> Result<Dataset, DataError> {
    let DataFormat::Csv = format;
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(io_error(path))?;
    let prices = parse_prices(&bytes)?;
    let manifest = DatasetManifest {
        source: path.to_path_buf(),
        n_assets: prices.n_assets(),
        n_periods: prices.n_periods(),
        first_period: prices.periods()[0].clone(),
        last_period: prices.periods()[prices.n_periods() - 1].clone(),
        checksum: sha256_hex(&bytes),
    };
    Ok(Dataset { prices, manifest })
}

fn csv_error(e: csv::Error) -> DataError {
    let line = e.position().map_or(0, |p| p.line());
    DataError::Parse { line, message: e.to_string() }
}

/// Parses CSV bytes into a validated price series.
pub fn parse_prices(bytes: &[u8]) -> Result<PriceSeries, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let header = reader.headers().map_err(csv_error)?.clone();
    if header.len() < 3 {
        return Err(DataError::Parse {
            line: 1,
            message: format!("header needs a period column and at least 2 assets, got {} columns", header.len()),
        });
    }
    let assets: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut periods = Vec::new();
    let mut lines = Vec::new();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(DataError::Parse {
                line,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let label = &record[0];
        if label.is_empty() {
            return Err(DataError::MissingValue { line, column: header[0].to_string() });
        }
        let mut row = Vec::with_capacity(assets.len());
        for (field, column) in record.iter().skip(1).zip(&assets) {
            if field.is_empty() || field.eq_ignore_ascii_case("na") || field.eq_ignore_ascii_case("nan") {
                return Err(DataError::MissingValue { line, column: column.clone() });
            }
            let value: f64 = field.parse().map_err(|_| DataError::Parse {
                line,
                message: format!("column {column:?}: {field:?} is not a number"),
            })?;
            if !(value > 0.0) || !value.is_finite() {
                return Err(DataError::InvalidPrice { line, row: rows.len(), column: column.clone(), value });
            }
            row.push(value);
        }
        periods.push(label.to_string());
        lines.push(line);
        rows.push(row);
    }
    check_order(&periods, &lines)?;
    Ok(PriceSeries::new(periods, assets, rows)?)
}

fn check_order(periods: &[String], lines: &[u64]) -> Result<(), DataError> {
    let numeric: Option<Vec<f64>> = periods.iter().map(|p| p.parse::<f64>().ok()).collect();
    for t in 1..periods.len() {
        let ordering = match &numeric {
            Some(v) => v[t - 1].total_cmp(&v[t]),
            None => periods[t - 1].cmp(&periods[t]),
        };
        match ordering {
            std::cmp::Ordering::Less => {}
            std::cmp::Ordering::Equal => {
                return Err(DataError::DuplicatePeriod { line: lines[t], label: periods[t].clone() })
            }
            std::cmp::Ordering::Greater => {
                return Err(DataError::UnsortedPeriod {
                    line: lines[t],
                    label: periods[t].clone(),
                    previous: periods[t - 1].clone(),
                })
            }
        }
    }
    Ok(())
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros dropped.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Files staged next to their destination and renamed into place together,
/// so a failed run leaves no partial outputs behind.
struct Staged {
    files: Vec<(PathBuf, PathBuf)>,
}

impl Staged {
    fn new() -> Self {
        Staged { files: Vec::new() }
    }

    fn add(&mut self, dir: &Path, name: &str, contents: &str) -> Result<(), DataError> {
        let target = dir.join(name);
        let tmp = dir.join(format!(".{name}.tmp"));
        if let Err(e) = fs::write(&tmp, contents) {
            self.discard();
            return Err(DataError::Io { path: tmp, source: e });
        }
        self.files.push((tmp, target));
        Ok(())
    }

    fn discard(&mut self) {
        for (tmp, _) in self.files.drain(..) {
            let _ = fs::remove_file(tmp);
        }
    }

    fn commit(mut self) -> Result<Vec<PathBuf>, DataError> {
        let mut written = Vec::new();
        for (tmp, target) in std::mem::take(&mut self.files) {
            fs::rename(&tmp, &target).map_err(io_error(&target))?;
            written.push(target);
        }
        Ok(written)
    }
}

fn prepare_dir(dir: &Path) -> Result<(), DataError> {
    fs::create_dir_all(dir).map_err(io_error(dir))
}

fn summary_text(sections: &[(&str, Vec<(String, String)>)]) -> String {
    let mut out = String::new();
    for (i, (title, entries)) in sections.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "[{title}]");
        for (k, v) in entries {
            let _ = writeln!(out, "{k} = {v}");
        }
    }
    out
}

pub fn wealth_csv(prices: &PriceSeries, result: &BacktestResult) -> String {
    let mut out = String::from("period,return,wealth\n");
    for (t, (r, w)) in result.returns.iter().zip(&result.wealth).enumerate() {
        let _ = writeln!(out, "{},{},{}", prices.periods()[t + 1], format_number(*r), format_number(*w));
    }
    out
}

pub fn weights_csv(prices: &PriceSeries, result: &BacktestResult) -> String {
    let mut out = String::from("period");
    for asset in prices.assets() {
        out.push(',');
        out.push_str(asset);
    }
    out.push('\n');
    for (t, w) in result.weights.iter().enumerate() {
        out.push_str(&prices.periods()[t + 1]);
        for v in w {
            out.push(',');
            out.push_str(&format_number(*v));
        }
        out.push('\n');
    }
    out
}

/// Reads a `weights.csv` back as period labels and weight rows.
pub fn read_weights(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<Vec<f64>>), DataError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(io_error(path))?;
    let mut reader = csv::Reader::from_reader(&bytes[..]);
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        labels.push(record[0].to_string());
        let row = record
            .iter()
            .skip(1)
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| DataError::Parse { line, message: e.to_string() })?;
        rows.push(row);
    }
    Ok((labels, rows))
}

/// Writes `wealth.csv`, `weights.csv` and `summary.txt`. `echo` is the full
/// effective configuration.
pub fn write_backtest(
    dir: &Path,
    prices: &PriceSeries,
    result: &BacktestResult,
    echo: &[(String, String)],
) -> Result<Vec<PathBuf>, DataError> {
    prepare_dir(dir)?;
    let m = &result.metrics;
    let metrics = vec![
        ("initial_wealth".to_string(), format_number(result.initial_wealth)),
        ("final_wealth".to_string(), format_number(m.final_wealth)),
        ("max_drawdown".to_string(), format_number(m.max_drawdown)),
        ("mean_log_return".to_string(), format_number(m.mean_log_return)),
        ("std_log_return".to_string(), format_number(m.std_log_return)),
        ("periods".to_string(), result.returns.len().to_string()),
    ];
    let summary = summary_text(&[("metrics", metrics), ("config", echo.to_vec())]);
    let mut staged = Staged::new();
    staged.add(dir, "wealth.csv", &wealth_csv(prices, result))?;
    staged.add(dir, "weights.csv", &weights_csv(prices, result))?;
    staged.add(dir, "summary.txt", &summary)?;
    staged.commit()
}

/// Writes `baselines.csv`: one row of metrics per named strategy.
pub fn write_baselines(
    dir: &Path,
    runs: &[(&str, BacktestResult)],
    echo: &[(String, String)],
) -> Result<Vec<PathBuf>, DataError> {
    prepare_dir(dir)?;
    let mut table = String::from("strategy,final_wealth,max_drawdown,mean_log_return,std_log_return\n");
    for (name, run) in runs {
        let m = &run.metrics;
        let _ = writeln!(
            table,
            "{name},{},{},{},{}",
            format_number(m.final_wealth),
            format_number(m.max_drawdown),
            format_number(m.mean_log_return),
            format_number(m.std_log_return)
        );
    }
    let mut staged = Staged::new();
    staged.add(dir, "baselines.csv", &table)?;
    staged.add(dir, "summary.txt", &summary_text(&[("config", echo.to_vec())]))?;
    staged.commit()
}

pub fn ranking_csv(report: &SearchReport) -> String {
    let mut out = String::from(
        "rank,index,a,b,q,eta,gamma,schedule,centering,projection,preprocessing,sparsify,score",
    );
    for k in 1..=report.folds.len() {
        let _ = write!(out, ",fold{k}");
    }
    out.push_str(",error\n");
    for (rank, e) in report.ranked.iter().enumerate() {
        let c = &e.config;
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            rank + 1,
            e.index,
            format_number(c.params.a()),
            format_number(c.params.b()),
            format_number(c.q),
            format_number(c.lr.eta),
            format_number(c.lr.gamma),
            schedule_name(c.lr.schedule),
            centering_name(c.centering),
            projection_name(c.projection),
            c.preprocessing,
            c.sparsify,
            e.score.map_or_else(String::new, format_number),
        );
        for k in 0..report.folds.len() {
            out.push(',');
            if let Some(w) = e.fold_wealth.get(k) {
                out.push_str(&format_number(*w));
            }
        }
        out.push(',');
        if let Some(err) = &e.error {
            // keep the field CSV-safe
            out.push('"');
            out.push_str(&err.replace('"', "'"));
            out.push('"');
        }
        out.push('\n');
    }
    out
}

/// Writes `ranking.csv` and `summary.txt` for a search.
pub fn write_search(dir: &Path, report: &SearchReport, echo: &[(String, String)]) -> Result<Vec<PathBuf>, DataError> {
    prepare_dir(dir)?;
    let mut outcome = vec![
        ("configurations".to_string(), report.ranked.len().to_string()),
        ("invalid_skipped".to_string(), report.invalid.to_string()),
        ("failed".to_string(), report.failed().to_string()),
        ("folds".to_string(), report.folds.len().to_string()),
    ];
    for (k, f) in report.folds.iter().enumerate() {
        outcome.push((
            format!("fold{}", k + 1),
            format!("train [{}, {}) test [{}, {})", f.train.start, f.train.end, f.test.start, f.test.end),
        ));
    }
    let mut sections = vec![("search", outcome)];
    if let Some(best) = report.best() {
        let mut top: Vec<(String, String)> = best.config.describe().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        top.push(("score".into(), best.score.map_or_else(String::new, format_number)));
        sections.push(("best", top));
    }
    sections.push(("config", echo.to_vec()));
    let mut staged = Staged::new();
    staged.add(dir, "ranking.csv", &ranking_csv(report))?;
    staged.add(dir, "summary.txt", &summary_text(&sections))?;
    staged.commit()
}
