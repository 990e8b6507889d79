//! Continuous source distributions (irradiance, wind speed), their
//! equal-width discretization into multi-state models, and steady-state
//! probabilities of Markov degradation/repair processes.

use statrs::distribution::{Beta, ContinuousCDF};

use crate::check::{is_non_negative, is_positive};
use crate::sum;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StochasticError {
    #[error("mean must lie strictly inside (0, 1), got {mean}")]
    MeanOutOfRange { mean: f64 },
    #[error("variance must lie strictly inside (0, mean*(1-mean)) = (0, {max}), got {variance}")]
    VarianceTooLarge { variance: f64, max: f64 },
    #[error("invalid density parameters: {reason}")]
    InvalidDensityParams { reason: String },
    #[error("invalid discretization: {reason}")]
    InvalidDiscretization { reason: String },
    #[error("transition rate must be non-negative, got {rate}")]
    NegativeRate { rate: f64 },
    #[error("failure and repair rates are both zero")]
    BothRatesZero,
    #[error("rate matrix is singular or reducible (residual {residual:e})")]
    SingularOrReducible { residual: f64 },
    #[error("invalid rate matrix: {reason}")]
    InvalidGenerator { reason: String },
}

/// Shape parameters of a Beta density on [0, 1] (normalized irradiance).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaParams {
    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    pub fn variance(&self) -> f64 {
        let s = self.alpha + self.beta;
        self.alpha * self.beta / (s * s * (s + 1.0))
    }
}

/// Shape and scale of a Weibull wind-speed density; `shape = 2` is the
/// Rayleigh special case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeibullParams {
    pub shape: f64,
    pub scale: f64,
}

/// A continuous source density that can be discretized into states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceDensity {
    Beta(BetaParams),
    Weibull(WeibullParams),
}

impl SourceDensity {
    fn validate(&self) -> Result<(), StochasticError> {
        match self {
            SourceDensity::Beta(p) => {
                if !is_positive(p.alpha) || !is_positive(p.beta) {
                    return Err(StochasticError::InvalidDensityParams {
                        reason: format!(
                            "Beta shapes must be positive and finite, got alpha={}, beta={}",
                            p.alpha, p.beta
                        ),
                    });
                }
            }
            SourceDensity::Weibull(p) => {
                if !is_positive(p.shape) || !is_positive(p.scale) {
                    return Err(StochasticError::InvalidDensityParams {
                        reason: format!(
                            "Weibull shape and scale must be positive, got shape={}, scale={}",
                            p.shape, p.scale
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    /// Cumulative distribution function. The Beta branch uses the
    /// regularized incomplete beta function; the Weibull CDF is elementary.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            SourceDensity::Beta(p) => {
                let dist = Beta::new(p.alpha, p.beta).expect("validated parameters");
                dist.cdf(x.clamp(0.0, 1.0))
            }
            SourceDensity::Weibull(p) => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-(x / p.scale).powf(p.shape)).exp_m1()
                }
            }
        }
    }
}

/// Equal-width discretization of a source density: `n` intervals covering
/// `[0, max_value]`, each represented by its midpoint and by the density
/// mass it captures (renormalized over the truncation window).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedDistribution {
    state_values: Vec<f64>,
    state_probs: Vec<f64>,
    step: f64,
    max_value: f64,
}

impl DiscretizedDistribution {
    pub fn state_values(&self) -> &[f64] {
        &self.state_values
    }

    pub fn state_probs(&self) -> &[f64] {
        &self.state_probs
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn max_value(&self) -> f64 {
        self.max_value
    }

    pub fn len(&self) -> usize {
        self.state_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.state_values.is_empty()
    }

    pub fn state_pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.state_values
            .iter()
            .copied()
            .zip(self.state_probs.iter().copied())
    }
}

/// Fits Beta shape parameters to a sample mean and variance by the method
/// of moments.
pub fn fit_beta_moments(mean: f64, variance: f64) -> Result<BetaParams, StochasticError> {
    if !mean.is_finite() || mean <= 0.0 || mean >= 1.0 {
        return Err(StochasticError::MeanOutOfRange { mean });
    }
    let max = mean * (1.0 - mean);
    if !variance.is_finite() || variance <= 0.0 || variance >= max {
        return Err(StochasticError::VarianceTooLarge { variance, max });
    }
    let factor = max / variance - 1.0;
    Ok(BetaParams {
        alpha: mean * factor,
        beta: (1.0 - mean) * factor,
    })
}

/// Splits `[0, max_value]` into `n_states` equal intervals; state `i` gets
/// the density mass of its interval (by CDF differences) renormalized over
/// the captured total, and the interval midpoint as its value.
pub fn discretize(
    density: &SourceDensity,
    n_states: usize,
    max_value: f64,
) -> Result<DiscretizedDistribution, StochasticError> {
    density.validate()?;
    if n_states == 0 {
        return Err(StochasticError::InvalidDiscretization {
            reason: "n_states must be at least 1".into(),
        });
    }
    if !is_positive(max_value) {
        return Err(StochasticError::InvalidDiscretization {
            reason: format!("max_value must be positive and finite, got {max_value}"),
        });
    }
    let step = max_value / n_states as f64;
    let captured = density.cdf(max_value);
    if !is_positive(captured) {
        return Err(StochasticError::InvalidDiscretization {
            reason: "density has no mass on [0, max_value]".into(),
        });
    }
    let mut state_values = Vec::with_capacity(n_states);
    let mut state_probs = Vec::with_capacity(n_states);
    let mut prev_cdf = 0.0;
    for i in 1..=n_states {
        let upper = if i == n_states {
            max_value
        } else {
            i as f64 * step
        };
        let cdf = density.cdf(upper);
        state_values.push((i as f64 * step + (i as f64 - 1.0) * step) / 2.0);
        state_probs.push(((cdf - prev_cdf) / captured).max(0.0));
        prev_cdf = cdf;
    }
    Ok(DiscretizedDistribution {
        state_values,
        state_probs,
        step,
        max_value,
    })
}

/// Time base of a transition rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeUnit {
    PerHour,
    PerYear,
}

impl TimeUnit {
    /// Converts a rate in this unit to a per-hour rate (8760 h per year).
    pub fn to_per_hour(self, rate: f64) -> f64 {
        match self {
            TimeUnit::PerHour => rate,
            TimeUnit::PerYear => rate / 8760.0,
        }
    }
}

/// Failure/repair rate pair of a two-state Markov degradation model. Both
/// rates share one explicit time unit; mixing units across components is
/// safe because steady-state occupancies depend only on the rate ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStateRates {
    pub failure_rate: f64,
    pub repair_rate: f64,
    pub time_unit: TimeUnit,
}

impl TwoStateRates {
    pub fn per_hour(failure_rate: f64, repair_rate: f64) -> Self {
        Self {
            failure_rate,
            repair_rate,
            time_unit: TimeUnit::PerHour,
        }
    }

    pub fn per_year(failure_rate: f64, repair_rate: f64) -> Self {
        Self {
            failure_rate,
            repair_rate,
            time_unit: TimeUnit::PerYear,
        }
    }
}

/// Steady-state occupancy of the working/failed two-state chain:
/// `(repair/(failure+repair), failure/(failure+repair))`. The pair sums to
/// 1 exactly.
pub fn steady_state_two_state(rates: &TwoStateRates) -> Result<(f64, f64), StochasticError> {
    for rate in [rates.failure_rate, rates.repair_rate] {
        if !is_non_negative(rate) {
            return Err(StochasticError::NegativeRate { rate });
        }
    }
    let lambda = rates.time_unit.to_per_hour(rates.failure_rate);
    let mu = rates.time_unit.to_per_hour(rates.repair_rate);
    if lambda + mu == 0.0 {
        return Err(StochasticError::BothRatesZero);
    }
    let p_work = mu / (lambda + mu);
    Ok((p_work, 1.0 - p_work))
}

/// Transition-rate matrix of a continuous-time Markov chain: off-diagonal
/// entries are non-negative rates and every row sums to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovGenerator {
    rates: Vec<Vec<f64>>,
}

impl MarkovGenerator {
    /// Validates and wraps a square rate matrix. The diagonal may be given
    /// explicitly (rows must then sum to ~0) or left as any value to be
    /// replaced by the negated off-diagonal sum.
    pub fn new(mut rates: Vec<Vec<f64>>) -> Result<Self, StochasticError> {
        let n = rates.len();
        if n == 0 {
            return Err(StochasticError::InvalidGenerator {
                reason: "rate matrix is empty".into(),
            });
        }
        for row in &rates {
            if row.len() != n {
                return Err(StochasticError::InvalidGenerator {
                    reason: format!("rate matrix must be square ({n}x{n})"),
                });
            }
        }
        for (i, row) in rates.iter_mut().enumerate() {
            let mut off_diag = 0.0;
            for (j, &r) in row.iter().enumerate() {
                if i != j {
                    if !is_non_negative(r) {
                        return Err(StochasticError::InvalidGenerator {
                            reason: format!("off-diagonal rate [{i}][{j}] = {r} must be >= 0"),
                        });
                    }
                    off_diag += r;
                }
            }
            row[i] = -off_diag;
        }
        Ok(Self { rates })
    }

    /// Working/failed chain with transitions `work -> fail` at
    /// `failure_rate` and back at `repair_rate` (state 0 = working).
    pub fn two_state(rates: &TwoStateRates) -> Result<Self, StochasticError> {
        let lambda = rates.time_unit.to_per_hour(rates.failure_rate);
        let mu = rates.time_unit.to_per_hour(rates.repair_rate);
        Self::new(vec![vec![0.0, lambda], vec![mu, 0.0]])
    }

    pub fn n_states(&self) -> usize {
        self.rates.len()
    }

    pub fn rates(&self) -> &[Vec<f64>] {
        &self.rates
    }
}

/// Solves `pi * Q = 0`, `sum(pi) = 1` by a dense linear solve with the
/// normalization condition replacing one (redundant) balance equation.
pub fn steady_state_general(generator: &MarkovGenerator) -> Result<Vec<f64>, StochasticError> {
    let n = generator.n_states();
    if n == 1 {
        return Ok(vec![1.0]);
    }
    let scale = generator
        .rates
        .iter()
        .flatten()
        .fold(0.0_f64, |m, r| m.max(r.abs()));
    if scale == 0.0 {
        return Err(StochasticError::InvalidGenerator {
            reason: "all transition rates are zero".into(),
        });
    }
    // Unit-scaled transpose system: rows are balance equations for each
    // state, the last replaced by the normalization row.
    let mut a = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = generator.rates[j][i] / scale;
        }
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = nalgebra::DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let pi = a
        .lu()
        .solve(&b)
        .ok_or(StochasticError::SingularOrReducible { residual: f64::NAN })?;

    let mut pi: Vec<f64> = pi.iter().copied().collect();
    for p in &mut pi {
        if *p < 0.0 && *p > -1e-12 {
            *p = 0.0;
        }
    }
    if pi.iter().any(|&p| p < 0.0) {
        return Err(StochasticError::SingularOrReducible { residual: f64::NAN });
    }
    let total = sum::sum(pi.iter().copied());
    for p in &mut pi {
        *p /= total;
    }
    // Residual of the balance equations on the unit-scaled generator.
    let mut residual = 0.0_f64;
    for j in 0..n {
        let r: f64 = sum::sum((0..n).map(|i| pi[i] * generator.rates[i][j] / scale));
        residual = residual.max(r.abs());
    }
    if residual > 1e-10 {
        return Err(StochasticError::SingularOrReducible { residual });
    }
    Ok(pi)
}
