//! Euler (a,b)-logarithm and the functions built on it.
//!
//! The logarithm `log_{a,b}(x) = (x^a - x^b) / (a - b)` is evaluated in the
//! equivalent form `x^r sinh(k ln x) / k` with `r = (a+b)/2`, `k = |a-b|/2`,
//! which is symmetric in `(a, b)` bit-for-bit and stays accurate when `a` and
//! `b` are close. Its inverse, the deformed exponential, has closed forms for
//! the power (Tsallis/Amari), Kaniadakis and gamma families; every other pair
//! is inverted numerically by a bracketed Newton iteration on `u = ln x`.

use std::fmt;

use thiserror::Error;

/// Below this separation (with both parameters this close to zero) the
/// natural-logarithm branch is used.
pub const NATURAL_LOG_TOL: f64 = 1e-9;

/// Relative tolerance on `x` (absolute on `ln x`) for the numeric inversion.
pub const INVERSION_TOL: f64 = 1e-12;

/// Iteration cap for the Newton/bisection stage of the numeric inversion.
pub const INVERSION_MAX_ITER: usize = 200;

/// Largest |ln x| explored while bracketing; beyond it `x` is not representable.
const LN_X_LIMIT: f64 = 745.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeformError {
    #[error("invalid deformation parameters (a={a}, b={b}): {reason}")]
    InvalidParams { a: f64, b: f64, reason: &'static str },
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("probability vector not normalized (sum = {sum})")]
    NotNormalized { sum: f64 },
    #[error("inversion of log_(a={a}, b={b}) at y={y} did not converge in {iterations} iterations")]
    NoConvergence { a: f64, b: f64, y: f64, iterations: usize },
}

/// Named members of the Euler logarithm family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeformKind {
    General { a: f64, b: f64 },
    NaturalLog,
    Tsallis(f64),
    Kaniadakis(f64),
    Amari(f64),
    Abe(f64),
    Gamma(f64),
}

impl DeformKind {
    /// The `(a, b)` pair this family member corresponds to.
    pub fn pair(self) -> (f64, f64) {
        match self {
            DeformKind::General { a, b } => (a, b),
            DeformKind::NaturalLog => (0.0, 0.0),
            DeformKind::Tsallis(q) => (1.0 - q, 0.0),
            DeformKind::Kaniadakis(kappa) => (kappa, -kappa),
            DeformKind::Amari(alpha) => (0.0, -alpha),
            DeformKind::Abe(sigma) => (1.0 / sigma - 1.0, sigma - 1.0),
            DeformKind::Gamma(gamma) => (2.0 * gamma, -gamma),
        }
    }
}

/// Which evaluation route `deformed_exp` takes for a parameter pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExpBranch {
    NaturalLog,
    /// One parameter is zero, the other is `c`: `[1 + c y]_+^{1/c}`.
    Power { c: f64 },
    Kaniadakis { kappa: f64 },
    Gamma { gamma: f64 },
    General,
}

/// The `(a, b)` hyperparameters of the Euler logarithm.
///
/// Valid pairs satisfy `a, b ∈ (-1, 1)` and `a·b ≤ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformParams {
    a: f64,
    b: f64,
}

impl DeformParams {
    pub const NATURAL: DeformParams = DeformParams { a: 0.0, b: 0.0 };

    pub fn new(a: f64, b: f64) -> Result<Self, DeformError> {
        let invalid = |reason| Err(DeformError::InvalidParams { a, b, reason });
        if !a.is_finite() || !b.is_finite() {
            return invalid("parameters must be finite");
        }
        if a <= -1.0 || a >= 1.0 || b <= -1.0 || b >= 1.0 {
            return invalid("a and b must lie in (-1, 1)");
        }
        if a * b > 0.0 {
            return invalid("a*b <= 0 required for a monotone logarithm");
        }
        Ok(DeformParams { a, b })
    }

    pub fn from_kind(kind: DeformKind) -> Result<Self, DeformError> {
        let (a, b) = kind.pair();
        Self::new(a, b)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn is_natural(&self) -> bool {
        (self.a - self.b).abs() < NATURAL_LOG_TOL
            && self.a.abs() < NATURAL_LOG_TOL
            && self.b.abs() < NATURAL_LOG_TOL
    }

    pub fn exp_branch(&self) -> ExpBranch {
        let (a, b) = (self.a, self.b);
        if self.is_natural() {
            ExpBranch::NaturalLog
        } else if b == 0.0 {
            ExpBranch::Power { c: a }
        } else if a == 0.0 {
            ExpBranch::Power { c: b }
        } else if a == -b {
            ExpBranch::Kaniadakis { kappa: a.abs() }
        } else if a == -2.0 * b {
            ExpBranch::Gamma { gamma: -b }
        } else if b == -2.0 * a {
            ExpBranch::Gamma { gamma: -a }
        } else {
            ExpBranch::General
        }
    }

    /// Open interval `(inf, sup)` of values taken by the logarithm on `x > 0`.
    pub fn log_range(&self) -> (f64, f64) {
        if self.is_natural() {
            return (f64::NEG_INFINITY, f64::INFINITY);
        }
        let (lo, hi) = (self.a.min(self.b), self.a.max(self.b));
        let inf = if lo < 0.0 { f64::NEG_INFINITY } else { -1.0 / hi };
        let sup = if hi > 0.0 { f64::INFINITY } else { -1.0 / lo };
        (inf, sup)
    }

    fn half_sum(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    fn half_gap(&self) -> f64 {
        0.5 * (self.a - self.b).abs()
    }

    /// `log_{a,b}(e^u)`, the logarithm as a function of `u = ln x`.
    fn log_of_ln(&self, u: f64) -> f64 {
        if self.is_natural() {
            return u;
        }
        let k = self.half_gap();
        (self.half_sum() * u).exp() * (k * u).sinh() / k
    }

    /// Derivative of [`Self::log_of_ln`] with respect to `u`.
    fn log_of_ln_slope(&self, u: f64) -> f64 {
        if self.is_natural() {
            return 1.0;
        }
        let (r, k) = (self.half_sum(), self.half_gap());
        let ku = k * u;
        (r * u).exp() * (r * ku.sinh() / k + ku.cosh())
    }
}

impl fmt::Display for DeformParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(a={}, b={})", self.a, self.b)
    }
}

fn check_positive(what: &'static str, x: f64) -> Result<(), DeformError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(DeformError::Domain { what, value: x })
    }
}

/// Euler (a,b)-logarithm of `x > 0`.
pub fn deformed_log(p: DeformParams, x: f64) -> Result<f64, DeformError> {
    check_positive("deformed_log argument", x)?;
    Ok(p.log_of_ln(x.ln()))
}

/// Inverse of [`deformed_log`].
///
/// Arguments below the range of the logarithm map to 0 and arguments above it
/// map to `+inf`, following the `[·]_+` clipping of the closed forms.
pub fn deformed_exp(p: DeformParams, y: f64) -> Result<f64, DeformError> {
    if !y.is_finite() {
        return Err(DeformError::Domain { what: "deformed_exp argument", value: y });
    }
    if y == 0.0 {
        return Ok(1.0);
    }
    Ok(match p.exp_branch() {
        ExpBranch::NaturalLog => y.exp(),
        ExpBranch::Power { c } => power_exp(c, y),
        ExpBranch::Kaniadakis { kappa } => ((kappa * y).asinh() / kappa).exp(),
        ExpBranch::Gamma { gamma } => gamma_exp(gamma, y),
        ExpBranch::General => return invert_log(p, y),
    })
}

/// [`deformed_exp`] forced through the numeric inversion, whatever the pair.
pub fn deformed_exp_numeric(p: DeformParams, y: f64) -> Result<f64, DeformError> {
    if !y.is_finite() {
        return Err(DeformError::Domain { what: "deformed_exp argument", value: y });
    }
    invert_log(p, y)
}

fn power_exp(c: f64, y: f64) -> f64 {
    let base = c * y;
    if base <= -1.0 {
        return if c > 0.0 { 0.0 } else { f64::INFINITY };
    }
    (base.ln_1p() / c).exp()
}

/// Gamma family `(2γ, -γ)`: with `u = x^γ` the inversion is the positive root
/// of `u³ - 3γy·u - 1 = 0`.
fn gamma_exp(gamma: f64, y: f64) -> f64 {
    let c = gamma * y;
    let disc = 1.0 - 4.0 * c * c * c;
    let u = if disc >= 0.0 {
        let s = disc.sqrt();
        let big = (0.5 * (1.0 + s)).cbrt();
        let small = (0.5 * (1.0 - s)).cbrt();
        if small < 0.0 {
            // A³ + B³ = 1, so A + B = 1 / (A² - AB + B²) without cancellation.
            1.0 / (big * big - big * small + small * small)
        } else {
            big + small
        }
    } else {
        let sc = c.sqrt();
        2.0 * sc * ((1.0 / (2.0 * c * sc)).acos() / 3.0).cos()
    };
    (u.ln() / gamma).exp()
}

/// Safeguarded Newton inversion of the logarithm in `u = ln x`.
fn invert_log(p: DeformParams, y: f64) -> Result<f64, DeformError> {
    if y == 0.0 {
        return Ok(1.0);
    }
    let (inf, sup) = p.log_range();
    if y <= inf {
        return Ok(0.0);
    }
    if y >= sup {
        return Ok(f64::INFINITY);
    }
    let f = |u: f64| p.log_of_ln(u) - y;

    // Bracket: f(0) = -y, so the root lies on the side of the sign of y.
    let (mut lo, mut hi);
    if y > 0.0 {
        lo = 0.0;
        hi = 1.0;
        while f(hi) < 0.0 {
            lo = hi;
            hi *= 2.0;
            if hi > LN_X_LIMIT {
                return Ok(f64::INFINITY);
            }
        }
    } else {
        lo = -1.0;
        hi = 0.0;
        while f(lo) > 0.0 {
            hi = lo;
            lo *= 2.0;
            if lo < -LN_X_LIMIT {
                return Ok(0.0);
            }
        }
    }

    let mut u = y.clamp(lo, hi);
    for _ in 0..INVERSION_MAX_ITER {
        let fu = f(u);
        if fu == 0.0 {
            return Ok(u.exp());
        }
        if fu > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let slope = p.log_of_ln_slope(u);
        let mut next = u - fu / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - u).abs() <= INVERSION_TOL || hi - lo <= INVERSION_TOL {
            return Ok(next.exp());
        }
        u = next;
    }
    Err(DeformError::NoConvergence {
        a: p.a,
        b: p.b,
        y,
        iterations: INVERSION_MAX_ITER,
    })
}

/// Cubic Lagrange-inversion approximation of [`deformed_exp`] around 0.
///
/// Only meaningful for small `|y|` (≲ 0.5); kept as a cross-check.
pub fn deformed_exp_series(p: DeformParams, y: f64) -> Result<f64, DeformError> {
    if !y.is_finite() {
        return Err(DeformError::Domain { what: "series argument", value: y });
    }
    let (a, b) = (p.a, p.b);
    let c2 = 0.5 * (1.0 - a - b);
    let c3 = (1.0 - 3.0 * a - 3.0 * b + 2.0 * a * a + 5.0 * a * b + 2.0 * b * b) / 6.0;
    Ok(1.0 + y * (1.0 + y * (c2 + y * c3)))
}

/// `x ⊗ y = exp_{a,b}(log_{a,b} x + log_{a,b} y)`.
pub fn generalized_multiply(p: DeformParams, x: f64, y: f64) -> Result<f64, DeformError> {
    let sum = deformed_log(p, x)? + deformed_log(p, y)?;
    deformed_exp(p, sum)
}

/// Scalar mirror map `F` whose derivative is the Euler logarithm.
pub fn bregman_generator(p: DeformParams, w: f64) -> Result<f64, DeformError> {
    check_positive("bregman generator argument", w)?;
    if p.is_natural() {
        return Ok(w * w.ln() - w);
    }
    let (a, b) = (p.a, p.b);
    Ok((w.powf(a + 1.0) / (a + 1.0) - w.powf(b + 1.0) / (b + 1.0)) / (a - b))
}

/// Separable Bregman divergence `D(w ‖ w_ref)` generated by [`bregman_generator`].
pub fn bregman_divergence(p: DeformParams, w: &[f64], w_ref: &[f64]) -> Result<f64, DeformError> {
    if w.len() != w_ref.len() {
        return Err(DeformError::DimensionMismatch { left: w.len(), right: w_ref.len() });
    }
    let mut total = 0.0;
    for (&wi, &ri) in w.iter().zip(w_ref) {
        if wi == ri {
            check_positive("bregman divergence entry", wi)?;
            continue;
        }
        let term = bregman_generator(p, wi)?
            - bregman_generator(p, ri)?
            - (wi - ri) * deformed_log(p, ri)?;
        // each coordinate is itself a divergence; only rounding can make it negative
        total += term.max(0.0);
    }
    Ok(total)
}

/// Borges–Roditi trace-form entropy `Σ p_i log_{a,b}(1/p_i)`, with `0·log(1/0) = 0`.
pub fn trace_form_entropy(p: DeformParams, prob: &[f64]) -> Result<f64, DeformError> {
    let mut sum = 0.0;
    for &pi in prob {
        if !(pi >= 0.0) || !pi.is_finite() {
            return Err(DeformError::Domain { what: "probability entry", value: pi });
        }
        sum += pi;
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(DeformError::NotNormalized { sum });
    }
    let mut entropy = 0.0;
    for &pi in prob.iter().filter(|&&pi| pi > 0.0) {
        entropy += pi * p.log_of_ln(-pi.ln());
    }
    Ok(entropy)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, b: f64) -> DeformParams {
        DeformParams::new(a, b).unwrap()
    }

    fn close(x: f64, y: f64, tol: f64) -> bool {
        (x - y).abs() <= tol
    }

    #[test]
    fn rejects_invalid_pairs() {
        assert!(DeformParams::new(0.5, 0.5).is_err());
        assert!(DeformParams::new(-0.3, -0.2).is_err());
        assert!(DeformParams::new(1.0, 0.0).is_err());
        assert!(DeformParams::new(0.0, -1.0).is_err());
        assert!(DeformParams::new(f64::NAN, 0.0).is_err());
        assert!(DeformParams::new(0.0, 0.0).is_ok());
        assert!(DeformParams::new(0.7, -0.9).is_ok());
        assert!(DeformParams::from_kind(DeformKind::Kaniadakis(1.0)).is_err());
    }

    #[test]
    fn kind_mapping() {
        assert_eq!(DeformKind::Tsallis(0.5).pair(), (0.5, 0.0));
        assert_eq!(DeformKind::Kaniadakis(0.5).pair(), (0.5, -0.5));
        assert_eq!(DeformKind::Amari(0.5).pair(), (0.0, -0.5));
        assert_eq!(DeformKind::Gamma(0.25).pair(), (0.5, -0.25));
        let (a, b) = DeformKind::Abe(1.5).pair();
        assert!(close(a, -1.0 / 3.0, 1e-15) && b == 0.5);
        assert_eq!(params(0.5, 0.0).exp_branch(), ExpBranch::Power { c: 0.5 });
        assert_eq!(params(0.0, -0.5).exp_branch(), ExpBranch::Power { c: -0.5 });
        assert_eq!(params(-0.5, 0.5).exp_branch(), ExpBranch::Kaniadakis { kappa: 0.5 });
        assert_eq!(params(0.5, -0.25).exp_branch(), ExpBranch::Gamma { gamma: 0.25 });
        assert_eq!(params(-0.25, 0.5).exp_branch(), ExpBranch::Gamma { gamma: 0.25 });
        assert_eq!(params(0.3, -0.7).exp_branch(), ExpBranch::General);
        assert_eq!(params(1e-12, -1e-12).exp_branch(), ExpBranch::NaturalLog);
    }

    #[test]
    fn log_examples() {
        assert!(close(deformed_log(params(0.5, -0.5), 4.0).unwrap(), 1.5, 1e-15));
        assert_eq!(deformed_log(params(0.3, -0.6), 1.0).unwrap(), 0.0);
        assert!(close(deformed_log(DeformParams::NATURAL, std::f64::consts::E).unwrap(), 1.0, 1e-15));
        assert!(close(deformed_log(params(0.0, -1.0 + 1e-15), 2.0).unwrap(), 0.5, 1e-14));
        assert!(close(deformed_log(params(0.0, -0.5), 4.0).unwrap(), 1.0, 1e-15));
    }

    #[test]
    fn log_domain_errors() {
        let p = params(0.5, -0.5);
        assert!(matches!(deformed_log(p, 0.0), Err(DeformError::Domain { .. })));
        assert!(deformed_log(p, -1.0).is_err());
        assert!(deformed_log(p, f64::INFINITY).is_err());
        assert!(deformed_log(p, f64::NAN).is_err());
    }

    #[test]
    fn exp_examples() {
        for p in [params(0.5, -0.5), params(0.3, -0.7), DeformParams::NATURAL, params(0.5, 0.0)] {
            assert_eq!(deformed_exp(p, 0.0).unwrap(), 1.0);
        }
        assert!(close(deformed_exp(params(0.5, 0.0), 1.0).unwrap(), 2.25, 1e-14));
        assert!(close(deformed_exp(params(0.5, -0.5), 1.5).unwrap(), 4.0, 1e-14));
        assert!(close(deformed_exp_numeric(params(0.5, -0.5), 1.5).unwrap(), 4.0, 1e-12));
        assert!(deformed_exp(params(0.5, 0.0), f64::NAN).is_err());
    }

    #[test]
    fn exp_clips_outside_range() {
        // Tsallis q = 0.5: range (-2, inf)
        assert_eq!(deformed_exp(params(0.5, 0.0), -2.0).unwrap(), 0.0);
        assert_eq!(deformed_exp(params(0.5, 0.0), -3.0).unwrap(), 0.0);
        assert_eq!(deformed_exp_numeric(params(0.5, 0.0), -3.0).unwrap(), 0.0);
        // Amari alpha = 0.5: range (-inf, 2)
        assert_eq!(deformed_exp(params(0.0, -0.5), 2.5).unwrap(), f64::INFINITY);
        assert_eq!(deformed_exp_numeric(params(0.0, -0.5), 2.5).unwrap(), f64::INFINITY);
        assert_eq!(params(0.5, 0.0).log_range(), (-2.0, f64::INFINITY));
        assert_eq!(params(0.0, -0.5).log_range(), (f64::NEG_INFINITY, 2.0));
        assert_eq!(params(0.2, -0.5).log_range(), (f64::NEG_INFINITY, f64::INFINITY));
    }

    #[test]
    fn gamma_closed_form_both_discriminant_signs() {
        for gamma in [0.45, -0.45, 0.1, -0.2] {
            let p = DeformParams::from_kind(DeformKind::Gamma(gamma)).unwrap();
            for y in [-6.0, -2.0, -0.3, 0.4, 1.9, 5.0] {
                let closed = deformed_exp(p, y).unwrap();
                let numeric = deformed_exp_numeric(p, y).unwrap();
                assert!(
                    (closed - numeric).abs() <= 1e-11 * numeric.max(1.0),
                    "gamma={gamma} y={y}: {closed} vs {numeric}"
                );
            }
        }
    }

    #[test]
    fn extreme_targets_terminate() {
        let p = params(0.02, -0.01);
        let x = deformed_exp(p, -300.0).unwrap();
        assert!(x >= 0.0);
        let x = deformed_exp(p, 300.0).unwrap();
        assert!(x > 1.0);
        let p = params(0.9, -0.9);
        let x = deformed_exp(p, 1e6).unwrap();
        assert!(close(deformed_log(p, x).unwrap() / 1e6, 1.0, 1e-10));
    }

    #[test]
    fn series_examples() {
        let p = params(0.5, -0.5);
        assert_eq!(deformed_exp_series(p, 0.0).unwrap(), 1.0);
        let natural = deformed_exp_series(DeformParams::NATURAL, 0.1).unwrap();
        assert!(close(natural, 1.1051666666666666, 1e-15));
        assert!(close(natural, 0.1f64.exp(), 1e-5));
        let expected = 1.0 + 0.1 + 0.005 + (1.0 + 0.5 - 1.25 + 0.5) / 6.0 * 0.001;
        assert!(close(deformed_exp_series(p, 0.1).unwrap(), expected, 1e-15));
        assert!((deformed_exp_series(p, 0.1).unwrap() - deformed_exp(p, 0.1).unwrap()).abs() < 1e-4);
    }

    #[test]
    fn multiply_examples() {
        let p = params(0.5, -0.5);
        assert!(close(generalized_multiply(p, 4.0, 1.0).unwrap(), 4.0, 1e-14));
        assert!(close(generalized_multiply(p, 0.3, 1.0).unwrap(), 0.3, 1e-14));
        assert!(close(generalized_multiply(DeformParams::NATURAL, 2.0, 3.0).unwrap(), 6.0, 1e-14));
        assert!(generalized_multiply(p, 0.0, 1.0).is_err());
    }

    #[test]
    fn generator_examples() {
        assert_eq!(bregman_generator(DeformParams::NATURAL, 1.0).unwrap(), -1.0);
        assert!(close(bregman_generator(params(0.5, -0.5), 1.0).unwrap(), -4.0 / 3.0, 1e-15));
        assert!(bregman_generator(params(0.5, -0.5), 0.0).is_err());
        let h = 1e-5;
        for p in [params(0.5, -0.5), params(0.0, -0.4), DeformParams::NATURAL, params(0.7, -0.1)] {
            for w in [0.2, 1.0, 3.5] {
                let fd = (bregman_generator(p, w + h).unwrap() - bregman_generator(p, w - h).unwrap()) / (2.0 * h);
                assert!(close(fd, deformed_log(p, w).unwrap(), 1e-8), "{p} w={w}");
            }
        }
    }

    #[test]
    fn divergence_examples() {
        let p = params(0.4, -0.2);
        let w = [0.2, 0.7, 0.1];
        assert_eq!(bregman_divergence(p, &w, &w).unwrap(), 0.0);
        let kl = 0.5 * (0.5f64 / 0.25).ln() + 0.5 * (0.5f64 / 0.75).ln();
        let d = bregman_divergence(DeformParams::NATURAL, &[0.5, 0.5], &[0.25, 0.75]).unwrap();
        assert!(close(d, kl, 1e-15));
        assert!(close(d, 0.14384103622589045, 1e-15));
        assert!(bregman_divergence(p, &w, &[0.3, 0.7, 0.0]).unwrap_err() == DeformError::Domain { what: "bregman generator argument", value: 0.0 });
        assert!(matches!(
            bregman_divergence(p, &w, &[0.5, 0.5]),
            Err(DeformError::DimensionMismatch { left: 3, right: 2 })
        ));
    }

    #[test]
    fn entropy_examples() {
        let n = 5;
        let uniform = vec![1.0 / n as f64; n];
        let h = trace_form_entropy(DeformParams::NATURAL, &uniform).unwrap();
        assert!(close(h, (n as f64).ln(), 1e-14));
        assert_eq!(trace_form_entropy(params(0.3, -0.3), &[1.0, 0.0, 0.0]).unwrap(), 0.0);
        let h = trace_form_entropy(params(0.5, -0.5), &[0.5, 0.5]).unwrap();
        assert!(close(h, 2f64.sqrt() - 0.5f64.sqrt(), 1e-15));
        assert!(close(h, 0.7071067811865476, 1e-15));
        assert!(matches!(
            trace_form_entropy(DeformParams::NATURAL, &[0.5, 0.6]),
            Err(DeformError::NotNormalized { .. })
        ));
        assert!(trace_form_entropy(DeformParams::NATURAL, &[1.5, -0.5]).is_err());
    }

    #[test]
    fn symmetry_is_exact() {
        for (a, b) in [(0.3, -0.7), (0.5, 0.0), (0.0, -0.2), (0.9, -0.1)] {
            for x in [1e-3, 0.37, 2.0, 999.0] {
                assert_eq!(
                    deformed_log(params(a, b), x).unwrap(),
                    deformed_log(params(b, a), x).unwrap()
                );
            }
        }
    }
}
