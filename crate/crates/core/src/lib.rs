//! Generalized exponentiated gradient (GEG) mirror-descent updates built on the
//! Euler (a,b)-logarithm, with an online portfolio selection engine, walk-forward
//! hyperparameter search and the file formats used by the `geg` CLI.

pub mod config;
pub mod data;
pub mod deform;
pub mod error;
pub mod market;
pub mod mirror;
pub mod olps;
pub mod search;
pub mod verify;

pub use config::{load_config, RunConfig, SearchConfig, SearchMethod};
pub use data::{load_prices, DataError, DataFormat, Dataset, DatasetManifest};
pub use deform::{
    bregman_divergence, bregman_generator, deformed_exp, deformed_exp_numeric,
    deformed_exp_series, deformed_log, generalized_multiply, trace_form_entropy, DeformError,
    DeformKind, DeformParams, ExpBranch,
};
pub use error::{Error, ErrorClass};
pub use market::{preprocess, price_relatives, MarketError, Preprocessing, PriceSeries, RelativeSeries};
pub use mirror::{
    center_gradient, geg_step_normalized, gegu_step, md_step_generic, project_l1_normalize,
    project_simplex_euclidean, CenteringVariant, LearningRate, MirrorError, PortfolioWeights,
    ProjectionKind, RateSchedule, EPS_FLOOR,
};
pub use olps::{
    backtest, geg_olps_step, olps_gradient, run_baselines, sparsify, tsallis_log_loss,
    BacktestResult, Metrics, OlpsError, Sparsify, StrategyConfig,
};
pub use search::{
    grid_search, random_search, walk_forward_splits, Evaluation, Fold, GridSpace, Objective,
    RandomSpace, SearchError, SearchReport, SplitMode, SplitScheme,
};
