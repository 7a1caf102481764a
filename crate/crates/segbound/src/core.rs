//! Base value types: integer domains, raw time series, per-segment error
//! measures, and guaranteed scalars.
//!
//! A time series is a function from a contiguous integer domain `[a, b]` to
//! `f64`. All compressed-domain answers are [`ApproxScalar`]s: a value plus a
//! `guarantee` such that the exact answer lies within `value ± guarantee`
//! with certainty.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A contiguous inclusive integer interval `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Domain {
    /// First position (inclusive).
    pub a: i64,
    /// Last position (inclusive).
    pub b: i64,
}

impl Domain {
    /// Creates `[a, b]`, requiring `a <= b`.
    pub fn new(a: i64, b: i64) -> Result<Self> {
        if a > b {
            return Err(Error::invalid_domain(format!("[{a}, {b}] is empty")));
        }
        Ok(Domain { a, b })
    }

    /// Number of integer positions in the interval.
    pub fn len(&self) -> usize {
        (self.b - self.a + 1) as usize
    }

    /// Always false: construction forbids empty intervals. Provided so the
    /// type plays well with clippy's `len`/`is_empty` convention.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// True when `t` lies in `[a, b]`.
    pub fn contains(&self, t: i64) -> bool {
        self.a <= t && t <= self.b
    }

    /// True when `other` is fully contained in `self`.
    pub fn contains_domain(&self, other: &Domain) -> bool {
        self.a <= other.a && other.b <= self.b
    }

    /// Intersection with `other`, or `None` when disjoint.
    pub fn intersect(&self, other: &Domain) -> Option<Domain> {
        let a = self.a.max(other.a);
        let b = self.b.min(other.b);
        (a <= b).then_some(Domain { a, b })
    }

    /// The interval translated by `k` positions.
    pub fn shifted(&self, k: i64) -> Domain {
        Domain { a: self.a + k, b: self.b + k }
    }

    /// Iterator over the integer positions of the interval.
    pub fn positions(&self) -> impl Iterator<Item = i64> {
        self.a..=self.b
    }
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.a, self.b)
    }
}

/// Element-wise operations on two series over their intersection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointwiseOp {
    Add,
    Sub,
    Mul,
}

impl PointwiseOp {
    /// Applies the operation to a pair of values.
    pub fn apply(&self, x: f64, y: f64) -> f64 {
        match self {
            PointwiseOp::Add => x + y,
            PointwiseOp::Sub => x - y,
            PointwiseOp::Mul => x * y,
        }
    }
}

/// A raw (uncompressed) time series on a contiguous integer domain.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    /// Identifier used to reference the series in queries.
    pub id: String,
    /// Positions covered by `values`.
    pub domain: Domain,
    /// One value per position, `values[0]` at `domain.a`.
    pub values: Vec<f64>,
}

impl TimeSeries {
    /// Creates a series starting at position `a` with the given values.
    ///
    /// # Arguments
    ///
    /// * `id` - series identifier.
    /// * `a` - position of the first value.
    /// * `values` - at least one finite value.
    pub fn new(id: impl Into<String>, a: i64, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid_argument("time series needs at least one value"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid_argument(format!("non-finite value {v} in series")));
        }
        let domain = Domain::new(a, a + values.len() as i64 - 1)?;
        Ok(TimeSeries { id: id.into(), domain, values })
    }

    /// Value at position `t`.
    pub fn value_at(&self, t: i64) -> Result<f64> {
        if !self.domain.contains(t) {
            return Err(Error::invalid_domain(format!(
                "position {t} outside domain {} of series {}",
                self.domain, self.id
            )));
        }
        Ok(self.values[(t - self.domain.a) as usize])
    }

    /// Slice of values covering `sub`, which must lie inside the domain.
    pub fn window(&self, sub: &Domain) -> Result<&[f64]> {
        if !self.domain.contains_domain(sub) {
            return Err(Error::invalid_domain(format!(
                "{sub} not contained in domain {} of series {}",
                self.domain, self.id
            )));
        }
        let lo = (sub.a - self.domain.a) as usize;
        Ok(&self.values[lo..lo + sub.len()])
    }
}

/// Restriction of `series` to a subdomain.
///
/// # Example
///
/// ```
/// use segbound::core::{restrict, Domain, TimeSeries};
/// let t = TimeSeries::new("T", 1, vec![1.2, 1.3, 1.3, 1.2]).unwrap();
/// let r = restrict(&t, &Domain::new(2, 3).unwrap()).unwrap();
/// assert_eq!(r.domain, Domain::new(2, 3).unwrap());
/// assert_eq!(r.values, vec![1.3, 1.3]);
/// ```
pub fn restrict(series: &TimeSeries, sub: &Domain) -> Result<TimeSeries> {
    let values = series.window(sub)?.to_vec();
    Ok(TimeSeries { id: series.id.clone(), domain: *sub, values })
}

/// The series translated by `k` positions: position `t` of the result holds
/// the input's value at `t - k`.
pub fn shift(series: &TimeSeries, k: i64) -> TimeSeries {
    TimeSeries {
        id: series.id.clone(),
        domain: series.domain.shifted(k),
        values: series.values.clone(),
    }
}

/// Exact sum of the series values over `range` (or the full domain when
/// `None`). The range must lie inside the series domain.
pub fn exact_sum(series: &TimeSeries, range: Option<&Domain>) -> Result<f64> {
    let window = match range {
        Some(d) => series.window(d)?,
        None => &series.values,
    };
    Ok(window.iter().sum())
}

/// Element-wise combination of two series over their domain intersection.
///
/// Errors when the domains are disjoint.
pub fn pointwise(op: PointwiseOp, t1: &TimeSeries, t2: &TimeSeries) -> Result<TimeSeries> {
    let common = t1.domain.intersect(&t2.domain).ok_or_else(|| {
        Error::incompatible(format!(
            "domains {} and {} do not overlap",
            t1.domain, t2.domain
        ))
    })?;
    let w1 = t1.window(&common)?;
    let w2 = t2.window(&common)?;
    let values = w1.iter().zip(w2).map(|(x, y)| op.apply(*x, *y)).collect();
    Ok(TimeSeries { id: format!("({} . {})", t1.id, t2.id), domain: common, values })
}

/// The three per-segment error measures attached to an estimation function
/// `f` fitted to values `T` over a segment:
///
/// - `fes` — residual norm `sqrt(sum_i (T[i] - f(i))^2)`,
/// - `ses` — function norm `sqrt(sum_i f(i)^2)`,
/// - `tes` — absolute sum error `|sum_i T[i] - sum_i f(i)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMeasures {
    pub fes: f64,
    pub ses: f64,
    pub tes: f64,
}

impl ErrorMeasures {
    /// Creates a measure triple, requiring all components finite and `>= 0`.
    pub fn new(fes: f64, ses: f64, tes: f64) -> Result<Self> {
        for (name, v) in [("fes", fes), ("ses", ses), ("tes", tes)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid_argument(format!(
                    "error measure {name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(ErrorMeasures { fes, ses, tes })
    }

    /// All-zero measures (an exact fit of the zero series).
    pub fn zero() -> Self {
        ErrorMeasures { fes: 0.0, ses: 0.0, tes: 0.0 }
    }
}

/// An answer with a deterministic error bound: the exact value lies in
/// `[value - guarantee, value + guarantee]` with certainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxScalar {
    /// Approximate answer computed on the compressed form.
    pub value: f64,
    /// Hard bound on `|exact - value|`; always `>= 0`.
    pub guarantee: f64,
}

impl ApproxScalar {
    /// Creates a guaranteed scalar, requiring a finite value and a finite
    /// non-negative guarantee.
    pub fn new(value: f64, guarantee: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::invalid_argument(format!("non-finite value {value}")));
        }
        if !guarantee.is_finite() || guarantee < 0.0 {
            return Err(Error::invalid_argument(format!(
                "guarantee must be finite and non-negative, got {guarantee}"
            )));
        }
        Ok(ApproxScalar { value, guarantee })
    }

    /// An exactly-known scalar (guarantee 0).
    pub fn exact(value: f64) -> Self {
        ApproxScalar { value, guarantee: 0.0 }
    }

    /// True when `x` lies within the guaranteed interval.
    pub fn covers(&self, x: f64) -> bool {
        (x - self.value).abs() <= self.guarantee
    }
}
