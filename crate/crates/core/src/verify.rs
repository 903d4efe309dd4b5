//! Fast invariant suite: each check compares computed values against an
//! independent expectation and reports the largest residual.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::deform::{
    bregman_divergence, deformed_exp, deformed_exp_numeric, deformed_log, DeformKind, DeformParams,
};
use crate::market::PriceSeries;
use crate::mirror::{geg_step_normalized, CenteringVariant, LearningRate, PortfolioWeights, ProjectionKind};
use crate::olps::{backtest, olps_gradient, tsallis_log_loss, StrategyConfig};

/// Names of the checks, in report order.
pub const CHECKS: &[&str] = &[
    "log_exp_round_trip",
    "exp_log_round_trip",
    "closed_form_inversion",
    "family_constructors",
    "classical_eg_equivalence",
    "gradient_finite_difference",
    "bregman_natural_is_kl",
    "bregman_self_divergence",
    "simplex_feasibility",
    "wealth_product",
];

/// Shifts every expected value of one named check, simulating a corrupted
/// fixture.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub check: String,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub max_residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    /// Set when evaluation itself failed.
    pub error: Option<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.max_residual <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

type Pairs = Result<Vec<(f64, f64)>, String>;

struct Ctx {
    rng: ChaCha8Rng,
    perturb: Option<Perturbation>,
}

impl Ctx {
    fn run(&mut self, name: &'static str, tolerance: f64, relative: bool, f: fn(&mut ChaCha8Rng) -> Pairs) -> CheckOutcome {
        let shift = self.perturb.as_ref().filter(|p| p.check == name).map_or(0.0, |p| p.amount);
        match f(&mut self.rng) {
            Ok(pairs) => {
                let max_residual = pairs
                    .iter()
                    .map(|&(got, want)| {
                        let want = want + shift;
                        let diff = (got - want).abs();
                        let r = if relative { diff / want.abs().max(1.0) } else { diff };
                        if r.is_nan() { f64::INFINITY } else { r }
                    })
                    .fold(0.0, f64::max);
                CheckOutcome { name, max_residual, tolerance, samples: pairs.len(), error: None }
            }
            Err(e) => CheckOutcome { name, max_residual: f64::INFINITY, tolerance, samples: 0, error: Some(e) },
        }
    }
}

fn valid_params(rng: &mut ChaCha8Rng) -> DeformParams {
    loop {
        let a = rng.random_range(-0.9..0.9);
        let b = rng.random_range(-0.9..0.9);
        if let Ok(p) = DeformParams::new(a, b) {
            return p;
        }
    }
}

fn simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

fn log_exp(rng: &mut ChaCha8Rng) -> Pairs {
    let mut out = Vec::new();
    for _ in 0..200 {
        let p = valid_params(rng);
        let x = 10f64.powf(rng.random_range(-3.0..3.0));
        let y = deformed_log(p, x).map_err(|e| e.to_string())?;
        let back = deformed_exp(p, y).map_err(|e| e.to_string())?;
        out.push((back / x, 1.0));
    }
    Ok(out)
}

fn exp_log(rng: &mut ChaCha8Rng) -> Pairs {
    let mut out = Vec::new();
    for _ in 0..200 {
        let p = valid_params(rng);
        let y = rng.random_range(-1.0..1.0);
        let x = deformed_exp(p, y).map_err(|e| e.to_string())?;
        if x > 0.0 && x.is_finite() {
            out.push((deformed_log(p, x).map_err(|e| e.to_string())?, y));
        }
    }
    Ok(out)
}

fn closed_forms(rng: &mut ChaCha8Rng) -> Pairs {
    let kinds = [
        DeformKind::Tsallis(0.6),
        DeformKind::Tsallis(1.3),
        DeformKind::Kaniadakis(0.5),
        DeformKind::Amari(0.3),
        DeformKind::Gamma(0.25),
        DeformKind::Gamma(-0.3),
    ];
    let mut out = Vec::new();
    for kind in kinds {
        let p = DeformParams::from_kind(kind).map_err(|e| e.to_string())?;
        for _ in 0..50 {
            let y = rng.random_range(-2.0..2.0);
            let closed = deformed_exp(p, y).map_err(|e| e.to_string())?;
            let numeric = deformed_exp_numeric(p, y).map_err(|e| e.to_string())?;
            out.push((numeric, closed));
        }
    }
    Ok(out)
}

fn constructors(rng: &mut ChaCha8Rng) -> Pairs {
    let mut out = Vec::new();
    for _ in 0..50 {
        let q = rng.random_range(0.1..1.9);
        let named = DeformParams::from_kind(DeformKind::Tsallis(q)).map_err(|e| e.to_string())?;
        let general = DeformParams::new(1.0 - q, 0.0).map_err(|e| e.to_string())?;
        let x = 10f64.powf(rng.random_range(-2.0..2.0));
        out.push((
            deformed_log(named, x).map_err(|e| e.to_string())?,
            deformed_log(general, x).map_err(|e| e.to_string())?,
        ));
    }
    Ok(out)
}

fn classical_eg(rng: &mut ChaCha8Rng) -> Pairs {
    let mut out = Vec::new();
    for _ in 0..100 {
        let n = rng.random_range(2..6);
        let w = simplex(rng, n);
        let g: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let eta = rng.random_range(0.01..1.0);
        let pw = PortfolioWeights::new(w.clone()).map_err(|e| e.to_string())?;
        let got = geg_step_normalized(DeformParams::NATURAL, &pw, &g, &LearningRate::scalar(eta), ProjectionKind::L1Normalize)
            .map_err(|e| e.to_string())?;
        let grown: Vec<f64> = w.iter().zip(&g).map(|(w, g)| w * (-eta * g).exp()).collect();
        let z: f64 = grown.iter().sum();
        out.extend(got.as_slice().iter().zip(&grown).map(|(a, b)| (*a, b / z)));
    }
    Ok(out)
}

fn gradient(rng: &mut ChaCha8Rng) -> Pairs {
    let mut out = Vec::new();
    let h = 1e-6;
    for &q in &[0.0, 0.5, 1.0, 1.5] {
        for _ in 0..25 {
            let n = rng.random_range(2..5);
            let w = simplex(rng, n);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.7..1.3)).collect();
            let pw = PortfolioWeights::new(w.clone()).map_err(|e| e.to_string())?;
            let g = olps_gradient(q, &pw, &x, CenteringVariant::WeightedMean).map_err(|e| e.to_string())?;
            let loss = |v: &[f64]| -> Result<f64, String> {
                let s: f64 = v.iter().sum();
                let normalized = PortfolioWeights::new(v.iter().map(|x| x / s).collect()).map_err(|e| e.to_string())?;
                tsallis_log_loss(q, &normalized, &x).map_err(|e| e.to_string())
            };
            let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
            for i in 0..n {
                let mut up = w.clone();
                let mut down = w.clone();
                up[i] += h;
                down[i] -= h;
                let fd = (loss(&up)? - loss(&down)?) / (2.0 * h);
                out.push((g[i] / scale, fd / scale));
            }
        }
    }
    Ok(out)
}

fn kl(rng: &mut ChaCha8Rng) -> Pairs {
    let mut out = Vec::new();
    for _ in 0..100 {
        let n = rng.random_range(2..6);
        let w = simplex(rng, n);
        let v = simplex(rng, n);
        let d = bregman_divergence(DeformParams::NATURAL, &w, &v).map_err(|e| e.to_string())?;
        let kl: f64 = w.iter().zip(&v).map(|(w, v)| w * (w / v).ln()).sum();
        out.push((d, kl));
    }
    Ok(out)
}

fn self_divergence(rng: &mut ChaCha8Rng) -> Pairs {
    let mut out = Vec::new();
    for _ in 0..100 {
        let p = valid_params(rng);
        let n = rng.random_range(2..6);
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..3.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..3.0)).collect();
        out.push((bregman_divergence(p, &w, &w).map_err(|e| e.to_string())?, 0.0));
        // a negative divergence shows up as a residual against its clamp at zero
        let d = bregman_divergence(p, &w, &v).map_err(|e| e.to_string())?;
        out.push((d.min(0.0), 0.0));
    }
    Ok(out)
}

fn synthetic_market(rng: &mut ChaCha8Rng, periods: usize, assets: usize) -> Result<PriceSeries, String> {
    let mut rows = vec![vec![1.0; assets]];
    for t in 1..periods {
        let prev = &rows[t - 1];
        let next = prev.iter().map(|p| p * rng.random_range(0.9..1.1)).collect();
        rows.push(next);
    }
    PriceSeries::from_rows(rows).map_err(|e| e.to_string())
}

fn sample_configs() -> Vec<StrategyConfig> {
    let base = StrategyConfig::default();
    vec![
        base,
        StrategyConfig { params: DeformParams::new(0.5, -0.25).expect("valid"), q: 0.5, ..base },
        StrategyConfig {
            params: DeformParams::new(0.0, -0.5).expect("valid"),
            lr: LearningRate::power_of_weight(0.3, 0.5),
            projection: ProjectionKind::EuclideanSimplex,
            ..base
        },
    ]
}

fn simplex_feasibility(rng: &mut ChaCha8Rng) -> Pairs {
    let prices = synthetic_market(rng, 60, 4)?;
    let mut out = Vec::new();
    for cfg in sample_configs() {
        let run = backtest(&prices, &cfg, 1.0).map_err(|e| e.to_string())?;
        for w in &run.weights {
            out.push((w.iter().sum(), 1.0));
            out.push((w.iter().fold(0.0f64, |m, &v| m.min(v)), 0.0));
        }
    }
    Ok(out)
}

fn wealth_product(rng: &mut ChaCha8Rng) -> Pairs {
    let prices = synthetic_market(rng, 60, 3)?;
    let mut out = Vec::new();
    for cfg in sample_configs() {
        let run = backtest(&prices, &cfg, 1.0).map_err(|e| e.to_string())?;
        let mut wealth = 1.0;
        for (t, w) in run.weights.iter().enumerate() {
            let (now, before) = (prices.row(t + 1), prices.row(t));
            wealth *= w.iter().zip(now.iter().zip(before)).map(|(w, (p, q))| w * p / q).sum::<f64>();
        }
        out.push((run.final_wealth(), wealth));
    }
    Ok(out)
}

/// Runs every check with a fixed seed; `perturb` corrupts one check's
/// expectations.
pub fn run_checks(perturb: Option<Perturbation>) -> VerifyReport {
    let mut ctx = Ctx { rng: ChaCha8Rng::seed_from_u64(0x6e6), perturb };
    let checks = vec![
        ctx.run(CHECKS[0], 1e-8, false, log_exp),
        ctx.run(CHECKS[1], 1e-8, true, exp_log),
        ctx.run(CHECKS[2], 1e-10, false, closed_forms),
        ctx.run(CHECKS[3], 0.0, false, constructors),
        ctx.run(CHECKS[4], 1e-12, false, classical_eg),
        ctx.run(CHECKS[5], 1e-5, false, gradient),
        ctx.run(CHECKS[6], 1e-10, false, kl),
        ctx.run(CHECKS[7], 1e-12, false, self_divergence),
        ctx.run(CHECKS[8], 1e-12, false, simplex_feasibility),
        ctx.run(CHECKS[9], 1e-12, true, wealth_product),
    ];
    VerifyReport { checks }
}
