//! Mirror-descent stepping over the positive orthant and the unit simplex.

use thiserror::Error;

use crate::deform::{deformed_exp, deformed_log, DeformError, DeformParams};

/// Weights are lifted to at least this value before entering a logarithm.
pub const EPS_FLOOR: f64 = 1e-12;

/// Default bound on |η| when the learning rate is negative (follow-the-winner).
pub const DEFAULT_NEGATIVE_ETA_CAP: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MirrorError {
    #[error(transparent)]
    Deform(#[from] DeformError),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("weight vector is empty")]
    Empty,
    #[error("invalid weight {value} at index {index}")]
    InvalidWeight { index: usize, value: f64 },
    #[error("cannot project: entries sum to {sum}")]
    ZeroSum { sum: f64 },
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("step annihilated every weight; learning rate too large")]
    DegenerateStep,
    #[error("step overflowed at index {index}; learning rate too large")]
    StepOverflow { index: usize },
    #[error("invalid learning rate: {0}")]
    InvalidRate(String),
}

/// Nonnegative weight vector; on the unit simplex whenever it comes out of a
/// projection.
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioWeights(Vec<f64>);

impl PortfolioWeights {
    pub fn new(w: Vec<f64>) -> Result<Self, MirrorError> {
        if w.is_empty() {
            return Err(MirrorError::Empty);
        }
        if let Some((index, &value)) = w.iter().enumerate().find(|(_, &x)| !(x >= 0.0) || !x.is_finite()) {
            return Err(MirrorError::InvalidWeight { index, value });
        }
        Ok(PortfolioWeights(w))
    }

    pub fn uniform(n: usize) -> Self {
        PortfolioWeights(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn is_on_simplex(&self, tol: f64) -> bool {
        (self.sum() - 1.0).abs() <= tol && self.0.iter().all(|&x| x >= 0.0)
    }

    /// `w_i` lifted to at least [`EPS_FLOOR`], the value fed to link functions.
    pub fn floored(&self, i: usize) -> f64 {
        self.0[i].max(EPS_FLOOR)
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(w, x)| w * x).sum()
    }
}

impl std::ops::Index<usize> for PortfolioWeights {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CenteringVariant {
    WeightedMean,
    UniformMean,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProjectionKind {
    L1Normalize,
    EuclideanSimplex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RateSchedule {
    Scalar,
    PowerOfWeight,
}

/// Learning rate `η`, optionally scaled per coordinate as `η·w_i^γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearningRate {
    pub eta: f64,
    pub gamma: f64,
    pub schedule: RateSchedule,
}

impl LearningRate {
    pub fn scalar(eta: f64) -> Self {
        LearningRate { eta, gamma: 0.0, schedule: RateSchedule::Scalar }
    }

    pub fn power_of_weight(eta: f64, gamma: f64) -> Self {
        LearningRate { eta, gamma, schedule: RateSchedule::PowerOfWeight }
    }

    /// Checks finiteness and the bound on negative rates.
    pub fn validate(&self, negative_cap: f64) -> Result<(), MirrorError> {
        if !self.eta.is_finite() || !self.gamma.is_finite() {
            return Err(MirrorError::InvalidRate(format!(
                "eta={} gamma={} must be finite",
                self.eta, self.gamma
            )));
        }
        if self.eta < 0.0 && -self.eta > negative_cap {
            return Err(MirrorError::InvalidRate(format!(
                "negative eta={} exceeds the cap |eta| <= {negative_cap}",
                self.eta
            )));
        }
        Ok(())
    }

    /// Rate applied to a coordinate whose (floored) weight is `w`.
    pub fn rate_at(&self, w: f64) -> f64 {
        match self.schedule {
            RateSchedule::Scalar => self.eta,
            RateSchedule::PowerOfWeight => self.eta * w.powf(self.gamma),
        }
    }
}

fn check_len(left: usize, right: usize) -> Result<(), MirrorError> {
    if left == right {
        Ok(())
    } else {
        Err(MirrorError::DimensionMismatch { left, right })
    }
}

/// Removes a multiple of the all-ones vector from `grad`.
pub fn center_gradient(
    grad: &[f64],
    w: &PortfolioWeights,
    variant: CenteringVariant,
) -> Result<Vec<f64>, MirrorError> {
    check_len(grad.len(), w.len())?;
    let shift = match variant {
        CenteringVariant::WeightedMean => w.dot(grad),
        CenteringVariant::UniformMean => grad.iter().sum::<f64>() / grad.len() as f64,
        CenteringVariant::None => return Ok(grad.to_vec()),
    };
    Ok(grad.iter().map(|g| g - shift).collect())
}

/// Explicit mirror-descent step `link⁻¹(link(w) - η∘grad)` for arbitrary links.
pub fn md_step_generic<L, I>(
    link: L,
    link_inverse: I,
    w: &[f64],
    grad: &[f64],
    lr: &LearningRate,
) -> Result<Vec<f64>, MirrorError>
where
    L: Fn(f64) -> f64,
    I: Fn(f64) -> f64,
{
    check_len(grad.len(), w.len())?;
    Ok(w
        .iter()
        .zip(grad)
        .map(|(&wi, &gi)| link_inverse(link(wi) - lr.rate_at(wi) * gi))
        .collect())
}

/// Unclipped generalized step; zeros are kept so callers can detect them.
fn raw_step(
    p: DeformParams,
    w: &PortfolioWeights,
    grad: &[f64],
    lr: &LearningRate,
) -> Result<Vec<f64>, MirrorError> {
    check_len(grad.len(), w.len())?;
    let mut out = Vec::with_capacity(w.len());
    for (i, &gi) in grad.iter().enumerate() {
        if !gi.is_finite() {
            return Err(MirrorError::NonFinite { index: i, value: gi });
        }
        let wi = w.floored(i);
        let shift = lr.rate_at(wi) * gi;
        let x = if shift == 0.0 {
            wi
        } else {
            deformed_exp(p, deformed_log(p, wi)? - shift)?
        };
        if !x.is_finite() {
            return Err(MirrorError::StepOverflow { index: i });
        }
        out.push(x);
    }
    Ok(out)
}

/// Unnormalized generalized EG step (GEGU), entries lifted to [`EPS_FLOOR`].
pub fn gegu_step(
    p: DeformParams,
    w: &PortfolioWeights,
    grad: &[f64],
    lr: &LearningRate,
) -> Result<PortfolioWeights, MirrorError> {
    let mut out = raw_step(p, w, grad, lr)?;
    for x in &mut out {
        *x = x.max(EPS_FLOOR);
    }
    Ok(PortfolioWeights(out))
}

/// Normalized GEG step: generalized multiplicative update, then projection
/// onto the unit simplex. `grad_hat` is expected to be centered already.
pub fn geg_step_normalized(
    p: DeformParams,
    w: &PortfolioWeights,
    grad_hat: &[f64],
    lr: &LearningRate,
    proj: ProjectionKind,
) -> Result<PortfolioWeights, MirrorError> {
    let raw = raw_step(p, w, grad_hat, lr)?;
    if raw.iter().all(|&x| x <= 0.0) {
        return Err(MirrorError::DegenerateStep);
    }
    match proj {
        ProjectionKind::L1Normalize => project_l1_normalize(&raw),
        ProjectionKind::EuclideanSimplex => project_simplex_euclidean(&raw),
    }
}

/// Rescales a nonnegative vector to unit ℓ1 norm.
pub fn project_l1_normalize(v: &[f64]) -> Result<PortfolioWeights, MirrorError> {
    if v.is_empty() {
        return Err(MirrorError::Empty);
    }
    if let Some((index, &value)) = v.iter().enumerate().find(|(_, &x)| !(x >= 0.0) || !x.is_finite()) {
        return Err(MirrorError::InvalidWeight { index, value });
    }
    let sum: f64 = v.iter().sum();
    if !(sum > 0.0) {
        return Err(MirrorError::ZeroSum { sum });
    }
    Ok(PortfolioWeights(v.iter().map(|x| x / sum).collect()))
}

/// Euclidean projection onto the unit simplex (sort and threshold).
pub fn project_simplex_euclidean(v: &[f64]) -> Result<PortfolioWeights, MirrorError> {
    if v.is_empty() {
        return Err(MirrorError::Empty);
    }
    if let Some((index, &value)) = v.iter().enumerate().find(|(_, x)| !x.is_finite()) {
        return Err(MirrorError::NonFinite { index, value });
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    Ok(PortfolioWeights(v.iter().map(|x| (x - theta).max(0.0)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[f64]) -> PortfolioWeights {
        PortfolioWeights::new(v.to_vec()).unwrap()
    }

    fn assert_vec_close(got: &[f64], want: &[f64], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (g, e) in got.iter().zip(want) {
            assert!((g - e).abs() <= tol, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn centering_examples() {
        let weights = w(&[0.2, 0.3, 0.5]);
        let constant = [1.7; 3];
        for v in [CenteringVariant::WeightedMean, CenteringVariant::UniformMean] {
            assert_vec_close(&center_gradient(&constant, &weights, v).unwrap(), &[0.0; 3], 1e-15);
        }
        let g = center_gradient(&[1.0, 3.0], &w(&[0.5, 0.5]), CenteringVariant::WeightedMean).unwrap();
        assert_eq!(g, vec![-1.0, 1.0]);
        let g = center_gradient(&[1.0, 3.0], &w(&[0.5, 0.5]), CenteringVariant::None).unwrap();
        assert_eq!(g, vec![1.0, 3.0]);
        assert!(matches!(
            center_gradient(&[1.0], &weights, CenteringVariant::UniformMean),
            Err(MirrorError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gegu_natural_matches_egu() {
        let weights = w(&[0.3, 1.2, 0.05]);
        let grad = [0.4, -1.1, 2.0];
        let lr = LearningRate::scalar(0.7);
        let out = gegu_step(DeformParams::NATURAL, &weights, &grad, &lr).unwrap();
        let egu: Vec<f64> = weights.as_slice().iter().zip(&grad).map(|(w, g)| w * (-0.7 * g).exp()).collect();
        assert_vec_close(out.as_slice(), &egu, 1e-12);
    }

    #[test]
    fn gegu_zero_gradient_fixed_point() {
        let p = DeformParams::new(0.3, -0.6).unwrap();
        let weights = w(&[0.3, 1.2, 0.05]);
        let out = gegu_step(p, &weights, &[0.0; 3], &LearningRate::scalar(0.5)).unwrap();
        assert_vec_close(out.as_slice(), weights.as_slice(), 1e-13);
    }

    #[test]
    fn gegu_scalar_kaniadakis() {
        // log(1) = 0, so the result is exp_{0.5,-0.5}(-0.5); oracle by bisection.
        let p = DeformParams::new(0.5, -0.5).unwrap();
        let out = gegu_step(p, &w(&[1.0]), &[1.0], &LearningRate::scalar(0.5)).unwrap();
        let target = -0.5;
        let (mut lo, mut hi) = (1e-6_f64, 1.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (mid.sqrt() - 1.0 / mid.sqrt()) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((out[0] - 0.5 * (lo + hi)).abs() < 1e-13);
        // closed form: (sqrt(1 + y²/4·4)... ) => x = (y/2 + sqrt(1 + y²/4))^2 with kappa = 0.5
        let kappa = 0.5;
        let closed = (kappa * target + (1.0 + kappa * kappa * target * target).sqrt()).powf(1.0 / kappa);
        assert!((out[0] - closed).abs() < 1e-14);
    }

    #[test]
    fn normalized_natural_example() {
        let out = geg_step_normalized(
            DeformParams::NATURAL,
            &w(&[0.5, 0.5]),
            &[1.0, -1.0],
            &LearningRate::scalar(1.0),
            ProjectionKind::L1Normalize,
        )
        .unwrap();
        let e = std::f64::consts::E;
        assert_vec_close(out.as_slice(), &[1.0 / e / (1.0 / e + e), e / (1.0 / e + e)], 1e-15);
        assert_vec_close(out.as_slice(), &[0.11920292202211755, 0.8807970779778823], 1e-15);
    }

    #[test]
    fn normalized_zero_gradient_fixed_point() {
        let p = DeformParams::new(0.4, -0.2).unwrap();
        let weights = w(&[0.2, 0.3, 0.5]);
        for proj in [ProjectionKind::L1Normalize, ProjectionKind::EuclideanSimplex] {
            let out = geg_step_normalized(p, &weights, &[0.0; 3], &LearningRate::scalar(0.3), proj).unwrap();
            assert_vec_close(out.as_slice(), weights.as_slice(), 1e-15);
        }
    }

    #[test]
    fn degenerate_and_overflow_steps() {
        // Tsallis q = 0.5 clips to zero below -2.
        let p = DeformParams::new(0.5, 0.0).unwrap();
        let err = geg_step_normalized(p, &w(&[0.5, 0.5]), &[10.0, 10.0], &LearningRate::scalar(1.0), ProjectionKind::L1Normalize);
        assert_eq!(err.unwrap_err(), MirrorError::DegenerateStep);
        // Amari alpha = 0.5 overflows above 2.
        let p = DeformParams::new(0.0, -0.5).unwrap();
        let err = geg_step_normalized(p, &w(&[0.5, 0.5]), &[-10.0, 1.0], &LearningRate::scalar(1.0), ProjectionKind::L1Normalize);
        assert!(matches!(err, Err(MirrorError::StepOverflow { index: 0 })));
        // A partial clip keeps the survivors.
        let p = DeformParams::new(0.5, 0.0).unwrap();
        let out = geg_step_normalized(p, &w(&[0.5, 0.5]), &[10.0, -1.0], &LearningRate::scalar(1.0), ProjectionKind::L1Normalize).unwrap();
        assert_eq!(out.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn l1_projection_examples() {
        assert_eq!(project_l1_normalize(&[2.0, 2.0]).unwrap().as_slice(), &[0.5, 0.5]);
        assert_eq!(project_l1_normalize(&[1.0, 3.0]).unwrap().as_slice(), &[0.25, 0.75]);
        assert_eq!(project_l1_normalize(&[0.25, 0.75]).unwrap().as_slice(), &[0.25, 0.75]);
        assert!(matches!(project_l1_normalize(&[0.0, 0.0]), Err(MirrorError::ZeroSum { .. })));
        assert!(project_l1_normalize(&[-1.0, 2.0]).is_err());
    }

    #[test]
    fn euclidean_projection_examples() {
        let third = 1.0 / 3.0;
        assert_vec_close(project_simplex_euclidean(&[0.5, 0.5, 0.5]).unwrap().as_slice(), &[third; 3], 1e-15);
        assert_vec_close(project_simplex_euclidean(&[0.2, 0.3, 0.5]).unwrap().as_slice(), &[0.2, 0.3, 0.5], 1e-15);
        assert_vec_close(project_simplex_euclidean(&[1.2, 0.3, -0.1]).unwrap().as_slice(), &[0.95, 0.05, 0.0], 1e-15);
        assert!(project_simplex_euclidean(&[f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn generic_step_links() {
        let weights = [0.3, 0.9];
        let grad = [0.5, -2.0];
        let lr = LearningRate::scalar(0.1);
        let gd = md_step_generic(|x| x, |y| y, &weights, &grad, &lr).unwrap();
        assert_vec_close(&gd, &[0.25, 1.1], 1e-15);
        let eg = md_step_generic(f64::ln, f64::exp, &weights, &grad, &lr).unwrap();
        assert_vec_close(&eg, &[0.3 * (-0.05f64).exp(), 0.9 * 0.2f64.exp()], 1e-15);
        let p = DeformParams::new(0.5, -0.5).unwrap();
        let generic = md_step_generic(
            |x| deformed_log(p, x).unwrap(),
            |y| deformed_exp(p, y).unwrap(),
            &weights,
            &grad,
            &lr,
        )
        .unwrap();
        let gegu = gegu_step(p, &PortfolioWeights::new(weights.to_vec()).unwrap(), &grad, &lr).unwrap();
        assert_eq!(generic.as_slice(), gegu.as_slice());
    }

    #[test]
    fn rate_schedule() {
        let lr = LearningRate::power_of_weight(0.5, 2.0);
        assert_eq!(lr.rate_at(0.5), 0.125);
        assert_eq!(LearningRate::scalar(0.5).rate_at(0.1), 0.5);
        assert!(LearningRate::scalar(-0.5).validate(1.0).is_ok());
        assert!(LearningRate::scalar(-1.5).validate(1.0).is_err());
        assert!(LearningRate::scalar(5.0).validate(1.0).is_ok());
        assert!(LearningRate::scalar(f64::NAN).validate(1.0).is_err());
    }
}
