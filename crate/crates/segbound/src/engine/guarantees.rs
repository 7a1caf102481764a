//! Propagation of deterministic error bounds.
//!
//! Two layers:
//!
//! * per-segment [`ErrorMeasures`] propagate through element-wise series
//!   arithmetic ([`propagate_measures`]), and
//! * `(value, guarantee)` pairs propagate through scalar arithmetic on query
//!   results ([`propagate_scalar`], [`propagate_sqrt`]).
//!
//! All bounds are worst-case and hold with certainty, not with probability.
//! Throughout, a segment's measures are read as: `fes` bounds the residual
//! norm ‖T − f‖, `ses` bounds the function norm ‖f‖, and `tes` bounds the
//! absolute sum error |Σ T − Σ f|.

use crate::core::{ApproxScalar, ErrorMeasures, PointwiseOp};
use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Per-segment measure propagation
// ---------------------------------------------------------------------------

/// Error measures of an element-wise combination of two approximated
/// segments sharing a domain.
///
/// For sums and differences all three measures add (triangle inequality).
/// For products, writing `T_i = f_i + e_i`:
///
/// ```text
/// T1*T2 - f1*f2 = e1*f2 + f1*e2 + e1*e2
/// ```
///
/// so with `‖x*y‖ <= ‖x‖*‖y‖` (Cauchy–Schwarz through the sup norm):
///
/// ```text
/// fes = fes1*fes2 + fes1*ses2 + ses1*fes2
/// ses = ses1*ses2
/// ```
///
/// The product `tes` uses the same bound — unless `same_space` holds, i.e.
/// both functions come from one linear span with each residual orthogonal to
/// it. Then `Σ e1*f2 = Σ f1*e2 = 0` and only the residual–residual term
/// survives:
///
/// ```text
/// tes = fes1*fes2
/// ```
///
/// # Arguments
///
/// * `op` - the element-wise operation.
/// * `lhs`, `rhs` - measures of the two segments (identical domains).
/// * `same_space` - product only: both functions lie in the same linear
///   span, with residuals orthogonal to it. Ignored for `Add`/`Sub`.
pub fn propagate_measures(
    op: PointwiseOp,
    lhs: &ErrorMeasures,
    rhs: &ErrorMeasures,
    same_space: bool,
) -> ErrorMeasures {
    match op {
        PointwiseOp::Add | PointwiseOp::Sub => ErrorMeasures {
            fes: lhs.fes + rhs.fes,
            ses: lhs.ses + rhs.ses,
            tes: lhs.tes + rhs.tes,
        },
        PointwiseOp::Mul => {
            let cross = lhs.fes * rhs.fes + lhs.fes * rhs.ses + lhs.ses * rhs.fes;
            ErrorMeasures {
                fes: cross,
                ses: lhs.ses * rhs.ses,
                tes: if same_space { lhs.fes * rhs.fes } else { cross },
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Aligned product guarantees
// ---------------------------------------------------------------------------

/// Guarantee for `Σ T1*T2` computed segment-by-segment over two series whose
/// segmentations coincide.
///
/// Per segment the sum error is bounded by the product `tes` of
/// [`propagate_measures`]; the per-segment bounds add. With `same_space`
/// set, every paired segment must use the same linear span on the same
/// domain — the caller asserts this; the cheaper `fes1*fes2` form is unsound
/// otherwise.
///
/// # Arguments
///
/// * `left`, `right` - per-segment measures, paired by index (equal length).
/// * `same_space` - see [`propagate_measures`].
pub fn product_guarantee_aligned(
    left: &[ErrorMeasures],
    right: &[ErrorMeasures],
    same_space: bool,
) -> Result<f64> {
    if left.len() != right.len() {
        return Err(Error::incompatible(format!(
            "aligned combination needs equal segment counts, got {} and {}",
            left.len(),
            right.len()
        )));
    }
    Ok(left
        .iter()
        .zip(right)
        .map(|(l, r)| propagate_measures(PointwiseOp::Mul, l, r, same_space).tes)
        .sum())
}

// ---------------------------------------------------------------------------
// Scalar propagation
// ---------------------------------------------------------------------------

/// Scalar arithmetic operators on query results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// One operand of a scalar operation: an exact literal or a guaranteed
/// approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Operand {
    /// An exactly known number (a query literal).
    Literal(f64),
    /// A value with a deterministic error bound.
    Approx(ApproxScalar),
}

impl Operand {
    /// The carried value.
    pub fn value(&self) -> f64 {
        match self {
            Operand::Literal(v) => *v,
            Operand::Approx(a) => a.value,
        }
    }

    /// The carried guarantee (0 for literals).
    pub fn guarantee(&self) -> f64 {
        match self {
            Operand::Literal(_) => 0.0,
            Operand::Approx(a) => a.guarantee,
        }
    }

    fn is_literal(&self) -> bool {
        matches!(self, Operand::Literal(_))
    }
}

/// Combines two guaranteed scalars, producing a guaranteed result.
///
/// With operand intervals `v_i ± g_i` containing the exact values:
///
/// * `+`/`-` — guarantees add.
/// * `*` — `g = g1*|v2| + g2*|v1| + g1*g2` (the exact product lies within
///   this of `v1*v2`; the `g1*g2` term covers the corner where both operands
///   err jointly).
/// * `/` — requires the divisor interval to exclude zero
///   (`|v2| - g2 > 0`), then `g = (g1*|v2| + g2*|v1|) / ((|v2| - g2)*|v2|)`.
///
/// Division by a *literal* zero is reported as an undefined value; division
/// by an approximation whose interval merely contains zero cannot carry any
/// finite bound and is reported as an unbounded guarantee.
pub fn propagate_scalar(op: ScalarOp, lhs: Operand, rhs: Operand) -> Result<ApproxScalar> {
    let (v1, g1) = (lhs.value(), lhs.guarantee());
    let (v2, g2) = (rhs.value(), rhs.guarantee());
    match op {
        ScalarOp::Add => ApproxScalar::new(v1 + v2, g1 + g2),
        ScalarOp::Sub => ApproxScalar::new(v1 - v2, g1 + g2),
        ScalarOp::Mul => {
            ApproxScalar::new(v1 * v2, g1 * v2.abs() + g2 * v1.abs() + g1 * g2)
        }
        ScalarOp::Div => {
            if rhs.is_literal() && v2 == 0.0 {
                return Err(Error::Undefined("division by zero".into()));
            }
            let margin = v2.abs() - g2;
            if margin <= 0.0 {
                return Err(Error::unbounded(format!(
                    "divisor {} ± {} may be zero",
                    v2, g2
                )));
            }
            let guarantee = (g1 * v2.abs() + g2 * v1.abs()) / (margin * v2.abs());
            ApproxScalar::new(v1 / v2, guarantee)
        }
    }
}

/// Square root of a guaranteed scalar known to approximate a non-negative
/// quantity.
///
/// The exact value lies in `[max(0, v - g), v + g]` (the caller asserts
/// non-negativity, e.g. for a variance). The reported value is
/// `sqrt(max(v, 0))` and the guarantee is its distance to the farther end of
/// the root interval. An interval entirely below zero contradicts the
/// non-negativity assertion and is reported as undefined.
pub fn propagate_sqrt(x: Operand) -> Result<ApproxScalar> {
    let (v, g) = (x.value(), x.guarantee());
    let hi = v + g;
    if hi < 0.0 {
        return Err(Error::Undefined(format!(
            "square root of {v} ± {g}, which is entirely negative"
        )));
    }
    let lo = (v - g).max(0.0);
    let value = v.max(0.0).sqrt();
    let guarantee = (hi.sqrt() - value).max(value - lo.sqrt());
    ApproxScalar::new(value, guarantee)
}
