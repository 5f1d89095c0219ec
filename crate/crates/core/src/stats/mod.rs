//! Means, pooled covariance, the two-sample Hotelling T² test, and verdicts.
//!
//! All tests run in the CIE xy chromaticity plane, so every sample is a set
//! of 2-D points and p = 2 throughout. The functions here are plain math and
//! do not enforce chromaticity bounds; callers building samples from board
//! cells get those for free.

mod permutation;
mod special;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use permutation::{permutation_test, PermutationOutcome};
pub use special::{beta_inc, f_survival, ln_beta, ln_gamma};

/// Dimension of the test space (x, y).
pub const DIM: u32 = 2;

/// Rejection threshold: p ≤ 0.003 (3σ) means the model does not match humans.
pub const DEFAULT_ALPHA: f64 = 0.003;

/// Pooled covariance counts as singular when det ≤ COND_EPS · trace².
const COND_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("sample is empty")]
    EmptySample,
    #[error("points and weights differ in length ({points} vs {weights})")]
    LengthMismatch { points: usize, weights: usize },
    #[error("weights must be finite and non-negative with a positive sum")]
    ZeroTotalWeight,
    #[error("need at least 2 points per sample and n1 + n2 ≥ 4, got n1 = {n1}, n2 = {n2}")]
    InsufficientSamples { n1: usize, n2: usize },
    #[error("pooled covariance is singular (det = {det:e})")]
    DegenerateCovariance { det: f64 },
    #[error("invalid degrees of freedom ({d1}, {d2})")]
    InvalidDegreesOfFreedom { d1: u32, d2: u32 },
    #[error("no outcomes to summarize")]
    EmptyExperiment,
    #[error("numerical domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point { x, y }
    }
}

/// Symmetric 2 × 2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Cov2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Cov2 {
    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// Singular when `det <= 1e-12 * trace²` or the trace is not positive.
    pub fn is_singular(&self) -> bool {
        let tr = self.trace();
        // Written so that NaN entries count as singular.
        !(tr > 0.0 && self.det() > COND_EPS * tr * tr)
    }

    /// `dᵀ M⁻¹ d`, assuming the matrix is invertible.
    fn inverse_quadratic_form(&self, d: Point) -> f64 {
        (self.yy * d.x * d.x - 2.0 * self.xy * d.x * d.y + self.xx * d.y * d.y) / self.det()
    }
}

pub fn sample_mean(points: &[Point]) -> Result<Point, StatsError> {
    if points.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Ok(Point::new(sx / n, sy / n))
}

/// `Σ wᵢ pᵢ / Σ wᵢ`.
pub fn weighted_mean(points: &[Point], weights: &[f64]) -> Result<Point, StatsError> {
    if points.len() != weights.len() {
        return Err(StatsError::LengthMismatch { points: points.len(), weights: weights.len() });
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(StatsError::ZeroTotalWeight);
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(StatsError::ZeroTotalWeight);
    }
    let (sx, sy) = points.iter().zip(weights).fold((0.0, 0.0), |(sx, sy), (p, w)| (sx + w * p.x, sy + w * p.y));
    Ok(Point::new(sx / total, sy / total))
}

/// Unbiased sample covariance (divisor n − 1).
pub fn sample_covariance(points: &[Point]) -> Result<Cov2, StatsError> {
    if points.len() < 2 {
        return Err(StatsError::InsufficientSamples { n1: points.len(), n2: 0 });
    }
    let mean = sample_mean(points)?;
    Ok(scatter(points, None, mean, (points.len() - 1) as f64))
}

fn scatter(points: &[Point], freq: Option<&[f64]>, mean: Point, divisor: f64) -> Cov2 {
    let mut acc = Cov2::default();
    for (i, p) in points.iter().enumerate() {
        let w = freq.map_or(1.0, |f| f[i]);
        let dx = p.x - mean.x;
        let dy = p.y - mean.y;
        acc.xx += w * dx * dx;
        acc.xy += w * dx * dy;
        acc.yy += w * dy * dy;
    }
    Cov2 { xx: acc.xx / divisor, xy: acc.xy / divisor, yy: acc.yy / divisor }
}

/// `((n1 − 1)S₁ + (n2 − 1)S₂) / (n1 + n2 − 2)`.
pub fn pooled_covariance(a: &[Point], b: &[Point]) -> Result<Cov2, StatsError> {
    check_sizes(a.len(), b.len())?;
    let sa = sample_covariance(a)?;
    let sb = sample_covariance(b)?;
    Ok(pool(&sa, a.len(), &sb, b.len()))
}

fn pool(sa: &Cov2, n1: usize, sb: &Cov2, n2: usize) -> Cov2 {
    let (wa, wb) = ((n1 - 1) as f64, (n2 - 1) as f64);
    let denom = (n1 + n2 - 2) as f64;
    Cov2 {
        xx: (wa * sa.xx + wb * sb.xx) / denom,
        xy: (wa * sa.xy + wb * sb.xy) / denom,
        yy: (wa * sa.yy + wb * sb.yy) / denom,
    }
}

fn check_sizes(n1: usize, n2: usize) -> Result<(), StatsError> {
    // n1 + n2 − p − 1 ≥ 1 with p = 2
    if n1 < 2 || n2 < 2 || n1 + n2 < DIM as usize + 2 {
        return Err(StatsError::InsufficientSamples { n1, n2 });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Match,
    Mismatch,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Match => "Match",
            Verdict::Mismatch => "Mismatch",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Match iff `p_value > alpha`; the boundary counts as a mismatch.
pub fn classify_alignment(p_value: f64, alpha: f64) -> Verdict {
    if p_value > alpha {
        Verdict::Match
    } else {
        Verdict::Mismatch
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HotellingOutcome {
    pub t2: f64,
    pub f_stat: f64,
    pub df1: u32,
    pub df2: u32,
    pub p_value: f64,
    pub verdict: Verdict,
}

/// Two-sample Hotelling T² test with a pooled covariance.
pub fn hotelling_two_sample(a: &[Point], b: &[Point], alpha: f64) -> Result<HotellingOutcome, StatsError> {
    check_sizes(a.len(), b.len())?;
    let ma = sample_mean(a)?;
    let mb = sample_mean(b)?;
    let pooled = pooled_covariance(a, b)?;
    finish(ma, mb, &pooled, a.len(), b.len(), alpha)
}

/// The bare T² statistic, without the F transform.
pub fn hotelling_t2(a: &[Point], b: &[Point]) -> Result<f64, StatsError> {
    check_sizes(a.len(), b.len())?;
    let pooled = pooled_covariance(a, b)?;
    t2_from(sample_mean(a)?, sample_mean(b)?, &pooled, a.len(), b.len())
}

/// Variant where sample `b` carries non-negative weights.
///
/// Weights are rescaled into fractional frequencies summing to `b.len()`, so
/// the weighted sample keeps its nominal size while its mean and covariance
/// follow the weights (frequency-replication approximation).
pub fn hotelling_two_sample_weighted(
    a: &[Point],
    b: &[Point],
    b_weights: &[f64],
    alpha: f64,
) -> Result<HotellingOutcome, StatsError> {
    check_sizes(a.len(), b.len())?;
    let ma = sample_mean(a)?;
    let mb = weighted_mean(b, b_weights)?;
    let total: f64 = b_weights.iter().sum();
    let n2 = b.len();
    let freq: Vec<f64> = b_weights.iter().map(|w| w * n2 as f64 / total).collect();
    let sa = sample_covariance(a)?;
    let sb = scatter(b, Some(&freq), mb, (n2 - 1) as f64);
    let pooled = pool(&sa, a.len(), &sb, n2);
    finish(ma, mb, &pooled, a.len(), n2, alpha)
}

fn t2_from(ma: Point, mb: Point, pooled: &Cov2, n1: usize, n2: usize) -> Result<f64, StatsError> {
    if pooled.is_singular() {
        return Err(StatsError::DegenerateCovariance { det: pooled.det() });
    }
    let d = Point::new(ma.x - mb.x, ma.y - mb.y);
    let (n1, n2) = (n1 as f64, n2 as f64);
    // The quadratic form is positive definite; clamp rounding noise at d ≈ 0.
    Ok(((n1 * n2 / (n1 + n2)) * pooled.inverse_quadratic_form(d)).max(0.0))
}

fn finish(
    ma: Point,
    mb: Point,
    pooled: &Cov2,
    n1: usize,
    n2: usize,
    alpha: f64,
) -> Result<HotellingOutcome, StatsError> {
    let t2 = t2_from(ma, mb, pooled, n1, n2)?;
    let df1 = DIM;
    let df2 = (n1 + n2) as u32 - DIM - 1;
    let f_stat = t2 * df2 as f64 / (df1 as f64 * (n1 + n2 - 2) as f64);
    let p_value = f_survival(f_stat, df1, df2)?;
    Ok(HotellingOutcome { t2, f_stat, df1, df2, p_value, verdict: classify_alignment(p_value, alpha) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordVerdict {
    pub word: String,
    pub p_value: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub words: Vec<WordVerdict>,
    pub word_count: usize,
    pub mismatch_count: usize,
    pub error_rate: f64,
}

impl ExperimentSummary {
    pub fn from_verdicts(words: Vec<WordVerdict>) -> Result<Self, StatsError> {
        if words.is_empty() {
            return Err(StatsError::EmptyExperiment);
        }
        let mismatch_count = words.iter().filter(|w| w.verdict == Verdict::Mismatch).count();
        let word_count = words.len();
        Ok(ExperimentSummary {
            error_rate: mismatch_count as f64 / word_count as f64,
            words,
            word_count,
            mismatch_count,
        })
    }

    /// Error rate as an integer percentage, rounding half up.
    pub fn percent(&self) -> u32 {
        rounded_percent(self.mismatch_count, self.word_count)
    }

    pub fn percent_label(&self) -> String {
        format!("{}%", self.percent())
    }
}

/// `round_half_up(100 · num / den)` in exact integer arithmetic.
pub fn rounded_percent(num: usize, den: usize) -> u32 {
    assert!(den > 0, "percentage of an empty set");
    ((200 * num + den) / (2 * den)) as u32
}

pub fn experiment_summary<S: AsRef<str>>(outcomes: &[(S, HotellingOutcome)]) -> Result<ExperimentSummary, StatsError> {
    ExperimentSummary::from_verdicts(
        outcomes
            .iter()
            .map(|(w, o)| WordVerdict { word: w.as_ref().to_string(), p_value: o.p_value, verdict: o.verdict })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().copied().map(Point::from).collect()
    }

    #[test]
    fn means() {
        assert_eq!(sample_mean(&pts(&[(0.0, 0.0), (1.0, 1.0)])).unwrap(), Point::new(0.5, 0.5));
        assert_eq!(sample_mean(&pts(&[(0.2, 0.7)])).unwrap(), Point::new(0.2, 0.7));
        assert_eq!(sample_mean(&[]), Err(StatsError::EmptySample));

        let p = pts(&[(0.0, 0.0), (9.0, 9.0)]);
        assert_eq!(weighted_mean(&p, &[1.0, 0.0]).unwrap(), Point::new(0.0, 0.0));
        let q = pts(&[(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(weighted_mean(&q, &[0.75, 0.25]).unwrap(), Point::new(0.25, 0.25));
        assert_eq!(weighted_mean(&q, &[2.0, 2.0]).unwrap(), sample_mean(&q).unwrap());
        assert!(matches!(weighted_mean(&q, &[1.0]), Err(StatsError::LengthMismatch { .. })));
        assert_eq!(weighted_mean(&q, &[0.0, 0.0]), Err(StatsError::ZeroTotalWeight));
        assert_eq!(weighted_mean(&q, &[-1.0, 2.0]), Err(StatsError::ZeroTotalWeight));
    }

    #[test]
    fn pooled_hand_example() {
        let a = pts(&[(0.0, 0.0), (2.0, 0.0)]);
        let b = pts(&[(1.0, 1.0), (1.0, 3.0)]);
        assert_eq!(pooled_covariance(&a, &b).unwrap(), Cov2 { xx: 1.0, xy: 0.0, yy: 1.0 });
        assert!(matches!(pooled_covariance(&a[..1], &b), Err(StatsError::InsufficientSamples { .. })));
    }

    #[test]
    fn pooled_of_identical_samples() {
        let a = pts(&[(0.1, 0.2), (0.3, 0.1), (0.25, 0.4)]);
        assert_eq!(pooled_covariance(&a, &a).unwrap(), sample_covariance(&a).unwrap());
    }

    #[test]
    fn hotelling_hand_example() {
        let a = pts(&[(0.0, 0.0), (2.0, 0.0)]);
        let b = pts(&[(1.0, 1.0), (1.0, 3.0)]);
        let out = hotelling_two_sample(&a, &b, DEFAULT_ALPHA).unwrap();
        assert_eq!(out.t2, 4.0);
        assert_eq!(out.f_stat, 1.0);
        assert_eq!((out.df1, out.df2), (2, 1));
        assert!((out.p_value - 1.0 / 3f64.sqrt()).abs() < 1e-9);
        assert_eq!(out.verdict, Verdict::Match);
    }

    #[test]
    fn hotelling_same_sample_matches() {
        let a = pts(&[(0.1, 0.2), (0.3, 0.1), (0.25, 0.4), (0.2, 0.2)]);
        let out = hotelling_two_sample(&a, &a, DEFAULT_ALPHA).unwrap();
        assert_eq!(out.t2, 0.0);
        assert_eq!(out.p_value, 1.0);
        assert_eq!(out.verdict, Verdict::Match);
    }

    #[test]
    fn hotelling_degenerate() {
        let a = pts(&[(0.1, 0.1), (0.2, 0.2), (0.3, 0.3)]);
        let b = pts(&[(0.4, 0.4), (0.5, 0.5)]);
        assert!(matches!(hotelling_two_sample(&a, &b, 0.003), Err(StatsError::DegenerateCovariance { .. })));
        assert!(matches!(
            hotelling_two_sample(&a[..1], &b, 0.003),
            Err(StatsError::InsufficientSamples { n1: 1, n2: 2 })
        ));
    }

    #[test]
    fn weighted_variant_with_equal_weights_is_unweighted() {
        let a = pts(&[(0.3, 0.3), (0.32, 0.31), (0.29, 0.33), (0.31, 0.28)]);
        let b = pts(&[(0.35, 0.3), (0.36, 0.32), (0.34, 0.35)]);
        let plain = hotelling_two_sample(&a, &b, 0.003).unwrap();
        let weighted = hotelling_two_sample_weighted(&a, &b, &[0.2, 0.2, 0.2], 0.003).unwrap();
        assert!((plain.t2 - weighted.t2).abs() < 1e-9 * plain.t2);
        assert!((plain.p_value - weighted.p_value).abs() < 1e-12);
    }

    #[test]
    fn classification_boundaries() {
        assert_eq!(classify_alignment(3.47e-05, DEFAULT_ALPHA), Verdict::Mismatch);
        assert_eq!(classify_alignment(0.843, DEFAULT_ALPHA), Verdict::Match);
        assert_eq!(classify_alignment(0.106, DEFAULT_ALPHA), Verdict::Match);
        assert_eq!(classify_alignment(DEFAULT_ALPHA, DEFAULT_ALPHA), Verdict::Mismatch);
    }

    #[test]
    fn summary_rates() {
        let all_match: Vec<_> = (0..5)
            .map(|i| WordVerdict { word: format!("W{i}"), p_value: 1.0, verdict: classify_alignment(1.0, 0.003) })
            .collect();
        let s = ExperimentSummary::from_verdicts(all_match).unwrap();
        assert_eq!((s.mismatch_count, s.percent_label().as_str()), (0, "0%"));
        assert_eq!(ExperimentSummary::from_verdicts(vec![]), Err(StatsError::EmptyExperiment));
        assert_eq!(experiment_summary::<&str>(&[]), Err(StatsError::EmptyExperiment));
        assert_eq!(rounded_percent(9, 34), 26);
        assert_eq!(rounded_percent(1, 8), 13);
        assert_eq!(rounded_percent(1, 200), 1);
        assert_eq!(rounded_percent(1, 201), 0);
    }
}
