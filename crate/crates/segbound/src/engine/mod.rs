//! Query evaluation: exact on raw series, approximate with deterministic
//! error guarantees on the compressed form.
//!
//! [`parse`] turns query text into an AST; [`eval_approx`] evaluates it
//! against compressed series, returning a value together with a guarantee
//! `g` such that the exact answer lies within `value ± g`; [`eval_exact`]
//! evaluates the same AST against raw series for comparison. The submodules
//! hold the moving parts: measure and scalar propagation rules
//! ([`guarantees`]), optimized window combination for product bounds
//! ([`combine`]), and the piece-wise evaluator ([`approx`]).

pub mod combine;
pub mod guarantees;
pub mod parse;

mod approx;

pub use combine::{
    check_aligned, is_combination_value, os_combination, FesPiece, SegmentCombination,
};
pub use guarantees::{
    product_guarantee_aligned, propagate_measures, propagate_scalar, propagate_sqrt, Operand,
    ScalarOp,
};
pub use parse::{parse, ArOp, StatExpr, TsaAst, Tse, TseOp};

use crate::core::{exact_sum, pointwise, shift, ApproxScalar, Domain, PointwiseOp, TimeSeries};
use crate::error::{Error, Result};
use crate::store::Catalog;

use approx::{compile, same_function, sum_eval, CTse};

// ---------------------------------------------------------------------------
// Approximate evaluation
// ---------------------------------------------------------------------------

/// A scalar in mid-evaluation: literals stay exact until they meet an
/// approximate operand.
enum ScalarVal {
    Lit(f64),
    Approx(ApproxScalar),
}

impl ScalarVal {
    fn operand(&self) -> Operand {
        match self {
            ScalarVal::Lit(v) => Operand::Literal(*v),
            ScalarVal::Approx(a) => Operand::Approx(*a),
        }
    }
}

/// Evaluates a query on the compressed series in `catalog`.
///
/// The result's `guarantee` is deterministic: the exact answer (the one
/// [`eval_exact`] computes from raw data) lies within `value ± guarantee`.
///
/// # Example
///
/// ```
/// use segbound::compress::{compress, SegmentationSpec};
/// use segbound::engine::{eval_approx, parse};
/// use segbound::store::Catalog;
/// use segbound::TimeSeries;
///
/// let series = TimeSeries::new("T1", 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
/// let mut catalog = Catalog::new();
/// catalog.insert_compressed(
///     compress(&series, "p1", &SegmentationSpec::FixedLength(4)).unwrap(),
/// );
/// let answer = eval_approx(&parse("Sum(T1)").unwrap(), &catalog).unwrap();
/// assert!((answer.value - 10.0).abs() <= answer.guarantee + 1e-9);
/// ```
pub fn eval_approx(ast: &TsaAst, catalog: &Catalog) -> Result<ApproxScalar> {
    match eval_scalar(ast, catalog)? {
        ScalarVal::Lit(v) => ApproxScalar::new(v, 0.0),
        ScalarVal::Approx(a) => Ok(a),
    }
}

fn eval_scalar(ast: &TsaAst, catalog: &Catalog) -> Result<ScalarVal> {
    match ast {
        TsaAst::Number(v) => Ok(ScalarVal::Lit(*v)),
        TsaAst::Binary { op, lhs, rhs } => {
            let l = eval_scalar(lhs, catalog)?;
            let r = eval_scalar(rhs, catalog)?;
            if let (ScalarVal::Lit(a), ScalarVal::Lit(b)) = (&l, &r) {
                return Ok(ScalarVal::Lit(match op {
                    ArOp::Add => a + b,
                    ArOp::Sub => a - b,
                    ArOp::Mul => a * b,
                    ArOp::Div => {
                        if *b == 0.0 {
                            return Err(Error::Undefined("division by zero".into()));
                        }
                        a / b
                    }
                }));
            }
            let op = match op {
                ArOp::Add => ScalarOp::Add,
                ArOp::Sub => ScalarOp::Sub,
                ArOp::Mul => ScalarOp::Mul,
                ArOp::Div => ScalarOp::Div,
            };
            Ok(ScalarVal::Approx(propagate_scalar(op, l.operand(), r.operand())?))
        }
        TsaAst::Sqrt(inner) => match eval_scalar(inner, catalog)? {
            ScalarVal::Lit(v) => {
                if v < 0.0 {
                    return Err(Error::Undefined(format!("square root of negative value {v}")));
                }
                Ok(ScalarVal::Lit(v.sqrt()))
            }
            ScalarVal::Approx(a) => {
                Ok(ScalarVal::Approx(propagate_sqrt(Operand::Approx(a))?))
            }
        },
        TsaAst::Agg { tse, range } => {
            let node = compile(tse, catalog)?;
            let target = resolve_range(&node.domain(), range)?;
            let (value, guarantee) = sum_eval(&node, &target)?;
            Ok(ScalarVal::Approx(ApproxScalar::new(value, guarantee)?))
        }
        TsaAst::Stat(stat) => Ok(ScalarVal::Approx(stat_approx(stat, catalog)?)),
    }
}

fn resolve_range(expr_domain: &Domain, range: &Option<Domain>) -> Result<Domain> {
    match range {
        None => Ok(*expr_domain),
        Some(r) => {
            if expr_domain.contains_domain(r) {
                Ok(*r)
            } else {
                Err(Error::invalid_domain(format!(
                    "sum range {r} is not contained in the expression domain {expr_domain}"
                )))
            }
        }
    }
}

/// Sum of `node` over `target` as an approximate scalar.
fn sum_of(node: &CTse, target: &Domain) -> Result<ApproxScalar> {
    let (value, guarantee) = sum_eval(node, target)?;
    ApproxScalar::new(value, guarantee)
}

/// Mean of `node` over `target`.
fn mean_of(node: &CTse, target: &Domain) -> Result<ApproxScalar> {
    let n = target.len() as f64;
    propagate_scalar(ScalarOp::Div, Operand::Approx(sum_of(node, target)?), Operand::Literal(n))
}

/// Relative rounding cushion added to variance guarantees. The propagation
/// rules are exact in real arithmetic, but `mean(x²) - mean(x)²` subtracts
/// two nearly equal quantities; the cushion keeps the leftover f64 noise
/// inside the reported bound, where a later square root would otherwise blow
/// a sub-epsilon violation up to a visible one.
const VARIANCE_ROUNDING_CUSHION: f64 = 1e-12;

/// Population variance of `node` over `target`: `mean(x²) - mean(x)²`,
/// assembled from sums with propagated guarantees. The exact variance is
/// nonnegative, so a negative estimate recenters at zero with the guarantee
/// trimmed to the reachable upper side.
fn variance_of(node: &CTse, target: &Domain) -> Result<ApproxScalar> {
    let n = target.len() as f64;
    let squared = CTse::Bin {
        op: PointwiseOp::Mul,
        lhs: Box::new(node.clone()),
        rhs: Box::new(node.clone()),
        domain: node.domain(),
    };
    let mean_sq = propagate_scalar(
        ScalarOp::Div,
        Operand::Approx(sum_of(&squared, target)?),
        Operand::Literal(n),
    )?;
    let mean = mean_of(node, target)?;
    let sq_mean =
        propagate_scalar(ScalarOp::Mul, Operand::Approx(mean), Operand::Approx(mean))?;
    let var =
        propagate_scalar(ScalarOp::Sub, Operand::Approx(mean_sq), Operand::Approx(sq_mean))?;
    let cushion =
        VARIANCE_ROUNDING_CUSHION * (1.0 + mean_sq.value.abs() + sq_mean.value.abs());
    let guarantee = var.guarantee + cushion;
    if var.value < 0.0 {
        ApproxScalar::new(0.0, (var.value + guarantee).max(0.0))
    } else {
        ApproxScalar::new(var.value, guarantee)
    }
}

fn stat_approx(stat: &StatExpr, catalog: &Catalog) -> Result<ApproxScalar> {
    match stat {
        StatExpr::Mu(tse) => {
            let node = compile(tse, catalog)?;
            mean_of(&node, &node.domain())
        }
        StatExpr::Sigma(tse) => {
            let node = compile(tse, catalog)?;
            let var = variance_of(&node, &node.domain())?;
            propagate_sqrt(Operand::Approx(var))
        }
        StatExpr::Corr(lhs, rhs) => {
            let l = compile(lhs, catalog)?;
            let r = compile(rhs, catalog)?;
            let target = l.domain().intersect(&r.domain()).ok_or_else(|| {
                Error::incompatible(format!(
                    "correlation operands live on disjoint domains {} and {}",
                    l.domain(),
                    r.domain()
                ))
            })?;
            corr_of(&l, &r, &target)
        }
    }
}

/// Pearson correlation of two compiled expressions over their shared domain.
fn corr_of(l: &CTse, r: &CTse, target: &Domain) -> Result<ApproxScalar> {
    // An expression correlated with itself is exactly 1 whenever its
    // variance is provably positive — the quotient below would needlessly
    // widen that to an interval.
    if same_function(l, r) {
        let var = variance_of(l, target)?;
        if var.value - var.guarantee > 0.0 {
            return Ok(ApproxScalar::exact(1.0));
        }
        return Err(Error::unbounded(
            "cannot certify a nonzero variance for a self-correlation",
        ));
    }

    let n = target.len() as f64;
    let product = CTse::Bin {
        op: PointwiseOp::Mul,
        lhs: Box::new(l.clone()),
        rhs: Box::new(r.clone()),
        domain: *target,
    };
    let mean_prod = propagate_scalar(
        ScalarOp::Div,
        Operand::Approx(sum_of(&product, target)?),
        Operand::Literal(n),
    )?;
    let mean_l = mean_of(l, target)?;
    let mean_r = mean_of(r, target)?;
    let mean_cross =
        propagate_scalar(ScalarOp::Mul, Operand::Approx(mean_l), Operand::Approx(mean_r))?;
    let cov = propagate_scalar(
        ScalarOp::Sub,
        Operand::Approx(mean_prod),
        Operand::Approx(mean_cross),
    )?;

    let sigma_l = propagate_sqrt(Operand::Approx(variance_of(l, target)?))?;
    let sigma_r = propagate_sqrt(Operand::Approx(variance_of(r, target)?))?;
    let denom =
        propagate_scalar(ScalarOp::Mul, Operand::Approx(sigma_l), Operand::Approx(sigma_r))?;
    propagate_scalar(ScalarOp::Div, Operand::Approx(cov), Operand::Approx(denom))
}

// ---------------------------------------------------------------------------
// Exact evaluation
// ---------------------------------------------------------------------------

/// Evaluates a query exactly on the raw series in `catalog`. Used as the
/// reference the approximate evaluation is guaranteed against.
pub fn eval_exact(ast: &TsaAst, catalog: &Catalog) -> Result<f64> {
    match ast {
        TsaAst::Number(v) => Ok(*v),
        TsaAst::Binary { op, lhs, rhs } => {
            let l = eval_exact(lhs, catalog)?;
            let r = eval_exact(rhs, catalog)?;
            Ok(match op {
                ArOp::Add => l + r,
                ArOp::Sub => l - r,
                ArOp::Mul => l * r,
                ArOp::Div => {
                    if r == 0.0 {
                        return Err(Error::Undefined("division by zero".into()));
                    }
                    l / r
                }
            })
        }
        TsaAst::Sqrt(inner) => {
            let v = eval_exact(inner, catalog)?;
            if v < 0.0 {
                return Err(Error::Undefined(format!("square root of negative value {v}")));
            }
            Ok(v.sqrt())
        }
        TsaAst::Agg { tse, range } => {
            let series = materialize(tse, catalog)?;
            let target = resolve_range(&series.domain, range)?;
            exact_sum(&series, Some(&target))
        }
        TsaAst::Stat(stat) => stat_exact(stat, catalog),
    }
}

/// Evaluates a series expression to a concrete series using raw data.
///
/// This is the series-level counterpart of [`eval_exact`]: references must
/// have raw data in the catalog, and binary operators combine values on the
/// operands' domain intersection.
///
/// # Arguments
///
/// * `tse` - series expression to evaluate.
/// * `catalog` - catalog holding the referenced raw series.
pub fn materialize(tse: &Tse, catalog: &Catalog) -> Result<TimeSeries> {
    match tse {
        Tse::Ref(id) => {
            catalog.raw(id).cloned().ok_or_else(|| Error::UnknownSeries(id.clone()))
        }
        Tse::Constant { value, domain } => {
            TimeSeries::new("constant", domain.a, vec![*value; domain.len()])
        }
        Tse::Shift { inner, offset } => Ok(shift(&materialize(inner, catalog)?, *offset)),
        Tse::Binary { op, lhs, rhs } => {
            let l = materialize(lhs, catalog)?;
            let r = materialize(rhs, catalog)?;
            let op = match op {
                TseOp::Add => PointwiseOp::Add,
                TseOp::Sub => PointwiseOp::Sub,
                TseOp::Mul => PointwiseOp::Mul,
            };
            pointwise(op, &l, &r)
        }
    }
}

fn stat_exact(stat: &StatExpr, catalog: &Catalog) -> Result<f64> {
    match stat {
        StatExpr::Mu(tse) => {
            let series = materialize(tse, catalog)?;
            Ok(mean(&series.values))
        }
        StatExpr::Sigma(tse) => {
            let series = materialize(tse, catalog)?;
            Ok(population_sd(&series.values))
        }
        StatExpr::Corr(lhs, rhs) => {
            let l = materialize(lhs, catalog)?;
            let r = materialize(rhs, catalog)?;
            let target = l.domain.intersect(&r.domain).ok_or_else(|| {
                Error::incompatible(format!(
                    "correlation operands live on disjoint domains {} and {}",
                    l.domain, r.domain
                ))
            })?;
            pearson(l.window(&target)?, r.window(&target)?)
        }
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn population_sd(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Pearson correlation via centered two-pass sums. Identical inputs produce
/// identical centered sums, so the quotient is exactly 1.
fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let mx = mean(x);
    let my = mean(y);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("zero variance in correlation".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}
