//! Input-validation predicates. All reject NaN and infinities.

pub(crate) fn is_positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

pub(crate) fn is_non_negative(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

pub(crate) fn is_probability(x: f64) -> bool {
    x.is_finite() && (0.0..=1.0).contains(&x)
}
