//! Sparse probability mass functions over performance levels and the
//! operators that combine them.
//!
//! A [`UFunction`] holds terms `p·Z^g`: probability `p` of the component
//! delivering performance `g` (kW for generation, a unit count for
//! mechanical states). Independent components combine through
//! [`UFunction::compose`] under a [`StructureFunction`] (sum for parallel
//! capacity, product for source × mechanical coupling). Threshold queries
//! ([`UFunction::availability`], [`shortfall`]) read adequacy measures off
//! the composed distribution.

use std::fmt;

use crate::sum::{self, Accumulator};

/// Absolute slack allowed on the input mass before construction rejects it.
/// Probability columns transcribed from rounded sources commonly miss unit
/// mass by a few parts per thousand; anything worse is treated as garbage
/// rather than renormalized away.
pub const MASS_TOLERANCE: f64 = 1e-2;

/// One `p·Z^g` term: probability of delivering performance `value`.
///
/// Values may be negative (an EV aggregation drawing charge is a negative
/// contribution to generation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub value: f64,
    pub probability: f64,
}

/// Errors from constructing or transforming performance distributions.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UgfError {
    #[error("a distribution needs at least one term")]
    EmptyInput,
    #[error("negative probability {probability} at value {value}")]
    NegativeProbability { value: f64, probability: f64 },
    #[error("probabilities sum to {total}, more than {MASS_TOLERANCE} away from 1")]
    MassNotNormalized { total: f64 },
    #[error("non-finite performance value {value}")]
    NonFiniteValue { value: f64 },
    #[error("grid step must be positive, got {step}")]
    StepNotPositive { step: f64 },
}

/// Binary map combining two performance values into one.
///
/// `Plus` models capacities feeding a common bus; `Times` models a shared
/// per-unit output scaled by the number of functioning units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureFunction {
    Plus,
    Times,
}

impl StructureFunction {
    #[inline]
    pub fn apply(self, g1: f64, g2: f64) -> f64 {
        match self {
            StructureFunction::Plus => g1 + g2,
            StructureFunction::Times => g1 * g2,
        }
    }
}

/// A discrete random performance variable: terms sorted ascending by value,
/// probabilities summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct UFunction {
    terms: Vec<Term>,
}

impl UFunction {
    /// Builds a distribution from `(value, probability)` pairs.
    ///
    /// Zero-probability pairs are dropped, like terms are merged, and the
    /// total mass is renormalized to exactly 1 provided it was within
    /// [`MASS_TOLERANCE`] to begin with.
    ///
    /// ```
    /// use dgrel_core::UFunction;
    ///
    /// let transformer = UFunction::new([(0.0, 0.03), (5000.0, 0.97)]).unwrap();
    /// assert_eq!(transformer.availability(1000.0, false), 0.97);
    /// ```
    pub fn new(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self, UgfError> {
        let mut terms = Vec::new();
        for (value, probability) in pairs {
            if !value.is_finite() {
                return Err(UgfError::NonFiniteValue { value });
            }
            if probability < 0.0 || !probability.is_finite() {
                return Err(UgfError::NegativeProbability { value, probability });
            }
            if probability > 0.0 {
                terms.push(Term { value, probability });
            }
        }
        if terms.is_empty() {
            return Err(UgfError::EmptyInput);
        }
        let total = sum::sum(terms.iter().map(|t| t.probability));
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(UgfError::MassNotNormalized { total });
        }
        Ok(Self::from_raw(terms))
    }

    /// The degenerate distribution `1.0·Z^value`.
    pub fn deterministic(value: f64) -> Self {
        assert!(value.is_finite(), "performance value must be finite");
        Self {
            terms: vec![Term {
                value,
                probability: 1.0,
            }],
        }
    }

    /// Canonicalizes raw terms: sort, merge like terms at the default
    /// tolerance, renormalize mass to 1. Callers guarantee finite values and
    /// non-negative probabilities with total mass near 1.
    fn from_raw(mut terms: Vec<Term>) -> Self {
        terms.retain(|t| t.probability > 0.0);
        debug_assert!(!terms.is_empty());
        terms.sort_by(|a, b| a.value.partial_cmp(&b.value).expect("finite values"));
        let range = terms.last().map(|t| t.value).unwrap_or(0.0)
            - terms.first().map(|t| t.value).unwrap_or(0.0);
        let mut merged = merge_sorted(terms, default_collection_tolerance(range));
        let total = sum::sum(merged.iter().map(|t| t.probability));
        if total != 1.0 {
            for t in &mut merged {
                t.probability /= total;
            }
        }
        Self { terms: merged }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Number of distinct performance states.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_value(&self) -> f64 {
        self.terms.first().expect("non-empty").value
    }

    pub fn max_value(&self) -> f64 {
        self.terms.last().expect("non-empty").value
    }

    /// Probability-weighted mean performance.
    pub fn expectation(&self) -> f64 {
        sum::sum(self.terms.iter().map(|t| t.probability * t.value))
    }

    /// Total probability mass (1 up to rounding, by construction).
    pub fn total_mass(&self) -> f64 {
        sum::sum(self.terms.iter().map(|t| t.probability))
    }

    /// Composes two independent variables under `phi`: every pair of terms
    /// contributes `p_i·p_j` at `phi(g_i, g_j)`, and like terms are merged.
    ///
    /// ```
    /// use dgrel_core::{StructureFunction, UFunction};
    ///
    /// // Per-unit output scaled by the number of functioning units.
    /// let per_unit = UFunction::new([(-5.0, 0.13), (0.0, 0.83), (5.0, 0.04)]).unwrap();
    /// let units = UFunction::new([(0.0, 0.01), (25.0, 0.99)]).unwrap();
    /// let fleet = per_unit.compose(&units, StructureFunction::Times);
    /// assert_eq!(fleet.len(), 3);
    /// assert_eq!(fleet.min_value(), -125.0);
    /// ```
    pub fn compose(&self, other: &UFunction, phi: StructureFunction) -> UFunction {
        self.compose_with(other, |g1, g2| phi.apply(g1, g2))
    }

    /// [`UFunction::compose`] generalized to an arbitrary structure function.
    pub fn compose_with(&self, other: &UFunction, phi: impl Fn(f64, f64) -> f64) -> UFunction {
        let mut raw = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                raw.push(Term {
                    value: phi(a.value, b.value),
                    probability: a.probability * b.probability,
                });
            }
        }
        UFunction::from_raw(raw)
    }

    /// Merges terms whose values lie within `tol` of each other. Merged
    /// probabilities add; the merged value is their probability-weighted
    /// mean, so the expectation is preserved. Mass is left untouched.
    pub fn collect_like_terms(&self, tol: f64) -> UFunction {
        assert!(tol >= 0.0, "collection tolerance must be non-negative");
        UFunction {
            terms: merge_sorted(self.terms.clone(), tol),
        }
    }

    /// The distributive threshold read-out: total probability of meeting
    /// demand `w`. Non-strict counts states with `g >= w`; strict requires
    /// `g > w`.
    pub fn availability(&self, w: f64, strict: bool) -> f64 {
        let mut acc = Accumulator::new();
        for t in &self.terms {
            let ok = if strict { t.value > w } else { t.value >= w };
            if ok {
                acc.add(t.probability);
            }
        }
        acc.value()
    }
}

impl fmt::Display for UFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}Z^{}", t.probability, t.value)?;
        }
        Ok(())
    }
}

/// Default like-term tolerance: absolute for small ranges, scaled to the
/// value spread otherwise, so floating-point near-duplicates from
/// composition merge while physically distinct levels never do.
pub fn default_collection_tolerance(range: f64) -> f64 {
    1e-9 * range.abs().max(1.0)
}

/// Merges a value-sorted term list; clusters chain while consecutive values
/// are within `tol`. Clusters of bitwise-identical values keep that value
/// exactly (ties against demand thresholds survive collection).
fn merge_sorted(terms: Vec<Term>, tol: f64) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::with_capacity(terms.len());
    let mut cluster: Vec<Term> = Vec::new();
    let flush = |cluster: &mut Vec<Term>, out: &mut Vec<Term>| {
        if cluster.is_empty() {
            return;
        }
        let total: f64 = cluster.iter().map(|t| t.probability).sum();
        let first = cluster[0].value;
        let value = if cluster.iter().all(|t| t.value == first) {
            first
        } else if total > 0.0 {
            cluster.iter().map(|t| t.probability * t.value).sum::<f64>() / total
        } else {
            cluster.iter().map(|t| t.value).sum::<f64>() / cluster.len() as f64
        };
        out.push(Term {
            // Canonicalize -0.0 so products through zero print and hash
            // like zero.
            value: if value == 0.0 { 0.0 } else { value },
            probability: total,
        });
        cluster.clear();
    };
    for term in terms {
        match cluster.last() {
            Some(last) if term.value - last.value <= tol => cluster.push(term),
            Some(_) => {
                flush(&mut cluster, &mut out);
                cluster.push(term);
            }
            None => cluster.push(term),
        }
    }
    flush(&mut cluster, &mut out);
    out
}

/// Loss probability and expected unserved power of a generation/load pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shortfall {
    /// Probability that load exceeds generation.
    pub loss_probability: f64,
    /// Expected unserved power over all deficit states, in kW.
    pub expected_unserved_kw: f64,
}

/// Scans all generation/load state pairs for deficits. A pair qualifies when
/// `g_load - g_gen > 0` (strict) or `>= 0` (non-strict); qualifying pairs
/// contribute their joint probability and probability-weighted deficit.
pub fn shortfall(generation: &UFunction, load: &UFunction, strict: bool) -> Shortfall {
    let mut loss = Accumulator::new();
    let mut unserved = Accumulator::new();
    for g in generation.terms() {
        for l in load.terms() {
            let deficit = l.value - g.value;
            let qualifies = if strict { deficit > 0.0 } else { deficit >= 0.0 };
            if qualifies {
                let p = g.probability * l.probability;
                loss.add(p);
                unserved.add(p * deficit);
            }
        }
    }
    Shortfall {
        loss_probability: loss.value(),
        expected_unserved_kw: unserved.value(),
    }
}

/// Moves every term's mass to the nearest multiple of `step` (ties round to
/// the even multiple).
pub fn quantize_to_grid(u: &UFunction, step: f64) -> Result<UFunction, UgfError> {
    if !(step.is_finite() && step > 0.0) {
        return Err(UgfError::StepNotPositive { step });
    }
    let raw = u
        .terms()
        .iter()
        .map(|t| Term {
            value: (t.value / step).round_ties_even() * step,
            probability: t.probability,
        })
        .collect();
    Ok(UFunction::from_raw(raw))
}

/// Sum-composition on a uniform grid: both inputs are quantized to `step`
/// and their probability arrays convolved directly. Equivalent to
/// `quantize(u1).compose(&quantize(u2), Plus)` but linear in the grid span
/// rather than quadratic in term count for dense inputs.
///
/// Allocates one array entry per grid point across each input's value
/// span, so the step should be commensurate with the value range.
pub fn gridded_compose_plus(
    u1: &UFunction,
    u2: &UFunction,
    step: f64,
) -> Result<UFunction, UgfError> {
    let q1 = quantize_to_grid(u1, step)?;
    let q2 = quantize_to_grid(u2, step)?;
    let (lo1, a1) = to_dense(&q1, step);
    let (lo2, a2) = to_dense(&q2, step);
    let mut conv = vec![0.0_f64; a1.len() + a2.len() - 1];
    for (i, p1) in a1.iter().enumerate() {
        if *p1 == 0.0 {
            continue;
        }
        for (j, p2) in a2.iter().enumerate() {
            conv[i + j] += p1 * p2;
        }
    }
    let lo = lo1 + lo2;
    let raw = conv
        .into_iter()
        .enumerate()
        .filter(|(_, p)| *p > 0.0)
        .map(|(k, probability)| Term {
            value: (lo + k as i64) as f64 * step,
            probability,
        })
        .collect();
    Ok(UFunction::from_raw(raw))
}

/// Dense probability array of an on-grid distribution, with the index of its
/// lowest grid point.
fn to_dense(u: &UFunction, step: f64) -> (i64, Vec<f64>) {
    let idx = |v: f64| (v / step).round_ties_even() as i64;
    let lo = idx(u.min_value());
    let hi = idx(u.max_value());
    let mut arr = vec![0.0_f64; (hi - lo) as usize + 1];
    for t in u.terms() {
        arr[(idx(t.value) - lo) as usize] += t.probability;
    }
    (lo, arr)
}
