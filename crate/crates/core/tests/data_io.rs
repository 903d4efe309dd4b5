use std::fs;
use std::path::PathBuf;

use geg_core::data::{read_weights, write_backtest, write_search};
use geg_core::{
    backtest, grid_search, load_config, load_prices, DataError, DataFormat, GridSpace, Objective,
    PriceSeries, SplitMode, SplitScheme, StrategyConfig,
};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

#[test]
fn fixture_manifest() {
    let ds = load_prices(fixture("prices_3x252.csv"), DataFormat::Csv).unwrap();
    let m = &ds.manifest;
    assert_eq!((m.n_periods, m.n_assets), (252, 3));
    assert_eq!((m.n_periods, m.n_assets), (ds.prices.n_periods(), ds.prices.n_assets()));
    assert_eq!((m.first_period.as_str(), m.last_period.as_str()), ("0", "251"));
    assert_eq!(ds.prices.assets(), &["alpha", "beta", "gamma"]);
    assert_eq!(m.checksum.len(), 64);
    assert!(m.verify().unwrap());
}

#[test]
fn manifest_detects_modification() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    fs::write(&path, "t,A,B\n1,1,2\n2,1.5,2\n3,1.2,2.5\n").unwrap();
    let ds = load_prices(&path, DataFormat::Csv).unwrap();
    assert_eq!((ds.prices.n_periods(), ds.prices.n_assets()), (3, 2));
    fs::write(&path, "t,A,B\n1,1,2\n2,1.5,2\n3,1.2,2.6\n").unwrap();
    assert!(!ds.manifest.verify().unwrap());
}

#[test]
fn load_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    fs::write(&path, "date,A,B\n2020-01-01,1,2\n2020-01-02,0,2\n").unwrap();
    let err = load_prices(&path, DataFormat::Csv).unwrap_err();
    assert!(err.to_string().contains("row 1, column \"A\""), "{err}");
    fs::write(&path, "date,A,B\n2020-01-02,1,2\n2020-01-01,1,2\n").unwrap();
    assert!(matches!(load_prices(&path, DataFormat::Csv), Err(DataError::UnsortedPeriod { .. })));
    let missing = dir.path().join("absent.csv");
    let err = load_prices(&missing, DataFormat::Csv).unwrap_err();
    assert!(err.is_io() && err.to_string().contains("absent.csv"));
}

fn sample_run() -> (PriceSeries, geg_core::BacktestResult) {
    let prices = load_prices(fixture("prices_3x252.csv"), DataFormat::Csv).unwrap().prices;
    let cfg = StrategyConfig { params: geg_core::DeformParams::new(0.3, -0.2).unwrap(), q: 0.5, ..StrategyConfig::default() };
    let run = backtest(&prices, &cfg, 1.0).unwrap();
    (prices, run)
}

#[test]
fn weights_round_trip() {
    let (prices, run) = sample_run();
    let dir = tempfile::tempdir().unwrap();
    write_backtest(dir.path(), &prices, &run, &[]).unwrap();
    let (labels, rows) = read_weights(dir.path().join("weights.csv")).unwrap();
    assert_eq!(labels.len(), run.weights.len());
    assert_eq!(labels[0], "1");
    for (got, want) in rows.iter().zip(&run.weights) {
        for (a, b) in got.iter().zip(want) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let (prices, run) = sample_run();
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let echo = vec![("loss.q".to_string(), "0.5".to_string())];
    write_backtest(d1.path(), &prices, &run, &echo).unwrap();
    let (_, again) = sample_run();
    write_backtest(d2.path(), &prices, &again, &echo).unwrap();
    for name in ["wealth.csv", "weights.csv", "summary.txt"] {
        assert_eq!(fs::read(d1.path().join(name)).unwrap(), fs::read(d2.path().join(name)).unwrap(), "{name}");
    }
    // no staging files left behind
    assert_eq!(fs::read_dir(d1.path()).unwrap().count(), 3);
}

#[test]
fn one_period_backtest_has_one_wealth_row() {
    let prices = PriceSeries::from_rows(vec![vec![1.0, 2.0], vec![1.1, 1.9]]).unwrap();
    let run = backtest(&prices, &StrategyConfig::default(), 1.0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_backtest(dir.path(), &prices, &run, &[]).unwrap();
    let wealth = fs::read_to_string(dir.path().join("wealth.csv")).unwrap();
    assert_eq!(wealth, "period,return,wealth\n1,1.025,1.025\n");
}

#[test]
fn summary_echoes_every_default() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    fs::write(&cfg_path, format!("dataset.path = {}\n", fixture("prices_3x252.csv").display())).unwrap();
    let cfg = load_config(&cfg_path).unwrap();
    let prices = load_prices(cfg.dataset.as_ref().unwrap(), DataFormat::Csv).unwrap().prices;
    let run = backtest(&prices, &cfg.strategy, cfg.initial_wealth).unwrap();
    write_backtest(&dir.path().join("out"), &prices, &run, &cfg.echo()).unwrap();
    let summary = fs::read_to_string(dir.path().join("out/summary.txt")).unwrap();
    for key in [
        "deform.a", "deform.b", "loss.q", "lr.eta", "lr.gamma", "lr.schedule", "lr.negative_cap",
        "strategy.centering", "strategy.projection", "preprocess.mode", "preprocess.window",
        "sparsify.rule", "sparsify.threshold", "sparsify.k", "run.initial_wealth", "run.seed", "output.dir",
        "final_wealth",
    ] {
        assert!(summary.lines().any(|l| l.starts_with(&format!("{key} = "))), "{key} missing:\n{summary}");
    }
}

#[test]
fn ranking_file_lists_every_configuration() {
    let prices = load_prices(fixture("prices_3x252.csv"), DataFormat::Csv).unwrap().prices;
    let space = GridSpace { a: vec![0.0, 0.5], b: vec![0.0, -0.5], q: vec![1.0], eta: vec![0.1], gamma: vec![0.0], ..GridSpace::default() };
    let split = SplitScheme { folds: 2, train: 100, test: 50, mode: SplitMode::Anchored };
    let report = grid_search(&space, &StrategyConfig::default(), &prices, &split, Objective::MeanFinalWealth).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_search(dir.path(), &report, &[]).unwrap();
    let text = fs::read_to_string(dir.path().join("ranking.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("rank,index,a,b,q,eta,gamma"));
    assert_eq!(lines.count(), 4);
    assert!(fs::read_to_string(dir.path().join("summary.txt")).unwrap().contains("fold2 = train [0, 150) test [150, 200)"));
}

#[test]
fn unwritable_destination_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let (prices, run) = sample_run();
    let err = write_backtest(&blocker.join("sub"), &prices, &run, &[]).unwrap_err();
    assert!(err.is_io());
}
