//! Approximate evaluation on the compressed form.
//!
//! A parsed series expression is *compiled* against the catalog: shifts fold
//! into per-leaf offsets (translation leaves polynomial coefficients and
//! error measures untouched) and every node learns its domain. Evaluation is
//! window-wise: a node's approximation over a target domain is described by
//! [`Piece`]s — consecutive windows carrying the approximation function in
//! closed form, error measures valid on that window, and a record of any
//! orthogonality between the residual and the window's polynomial span.
//! Binary operators overlay both sides' pieces onto a common refinement and
//! propagate measures per window; sum queries read values and deterministic
//! bounds off the pieces.

use crate::compress::{CompressedSeries, SegmentRep};
use crate::core::{Domain, ErrorMeasures, PointwiseOp};
use crate::error::{Error, Result};
use crate::families::basis::basis_vectors;
use crate::families::transform::restrict_coeffs;
use crate::families::{gaussian, FunctionRepr};
use crate::store::Catalog;

use super::combine::{os_combination, FesPiece};
use super::guarantees::propagate_measures;
use super::parse::{Tse, TseOp};

// ---------------------------------------------------------------------------
// Compiled expressions
// ---------------------------------------------------------------------------

/// A series expression compiled against a catalog.
#[derive(Debug, Clone)]
pub(crate) enum CTse<'a> {
    /// A stored compressed series translated by `offset` positions: position
    /// `t` carries the stored value at `t - offset`.
    Leaf { series: &'a CompressedSeries, offset: i64, domain: Domain },
    /// A constant function on an explicit domain.
    Const { value: f64, domain: Domain },
    /// Element-wise combination over the children's domain intersection.
    Bin { op: PointwiseOp, lhs: Box<CTse<'a>>, rhs: Box<CTse<'a>>, domain: Domain },
}

impl<'a> CTse<'a> {
    /// Domain the compiled expression is defined on.
    pub(crate) fn domain(&self) -> Domain {
        match self {
            CTse::Leaf { domain, .. } | CTse::Const { domain, .. } | CTse::Bin { domain, .. } => {
                *domain
            }
        }
    }

    /// Pushes a translation down to the leaves.
    fn shifted(self, k: i64) -> CTse<'a> {
        match self {
            CTse::Leaf { series, offset, domain } => {
                CTse::Leaf { series, offset: offset + k, domain: domain.shifted(k) }
            }
            CTse::Const { value, domain } => CTse::Const { value, domain: domain.shifted(k) },
            CTse::Bin { op, lhs, rhs, domain } => CTse::Bin {
                op,
                lhs: Box::new(lhs.shifted(k)),
                rhs: Box::new(rhs.shifted(k)),
                domain: domain.shifted(k),
            },
        }
    }
}

fn tse_op(op: TseOp) -> PointwiseOp {
    match op {
        TseOp::Add => PointwiseOp::Add,
        TseOp::Sub => PointwiseOp::Sub,
        TseOp::Mul => PointwiseOp::Mul,
    }
}

/// Compiles a series expression against the catalog's compressed series.
pub(crate) fn compile<'a>(tse: &Tse, catalog: &'a Catalog) -> Result<CTse<'a>> {
    match tse {
        Tse::Ref(id) => {
            let series = catalog.compressed(id).ok_or_else(|| {
                if catalog.raw(id).is_some() {
                    Error::UnknownSeries(format!("{id} has no compressed form (compress it first)"))
                } else {
                    Error::UnknownSeries(id.clone())
                }
            })?;
            Ok(CTse::Leaf { series, offset: 0, domain: series.domain() })
        }
        Tse::Constant { value, domain } => {
            if !value.is_finite() {
                return Err(Error::invalid_argument(format!("non-finite constant {value}")));
            }
            Ok(CTse::Const { value: *value, domain: *domain })
        }
        Tse::Shift { inner, offset } => Ok(compile(inner, catalog)?.shifted(*offset)),
        Tse::Binary { op, lhs, rhs } => {
            let l = compile(lhs, catalog)?;
            let r = compile(rhs, catalog)?;
            let domain = l.domain().intersect(&r.domain()).ok_or_else(|| {
                Error::incompatible(format!(
                    "operand domains {} and {} do not overlap",
                    l.domain(),
                    r.domain()
                ))
            })?;
            Ok(CTse::Bin { op: tse_op(*op), lhs: Box::new(l), rhs: Box::new(r), domain })
        }
    }
}

/// True when two compiled expressions denote the same approximation function
/// (used to recognize self-correlations such as a zero-lag autocorrelation).
pub(crate) fn same_function(a: &CTse, b: &CTse) -> bool {
    match (a, b) {
        (
            CTse::Leaf { series: s1, offset: o1, .. },
            CTse::Leaf { series: s2, offset: o2, .. },
        ) => std::ptr::eq(*s1, *s2) && o1 == o2,
        (CTse::Const { value: v1, domain: d1 }, CTse::Const { value: v2, domain: d2 }) => {
            v1 == v2 && d1 == d2
        }
        (
            CTse::Bin { op: op1, lhs: l1, rhs: r1, .. },
            CTse::Bin { op: op2, lhs: l2, rhs: r2, .. },
        ) => {
            op1 == op2
                && ((same_function(l1, l2) && same_function(r1, r2))
                    || (matches!(op1, PointwiseOp::Add | PointwiseOp::Mul)
                        && same_function(l1, r2)
                        && same_function(r1, l2)))
        }
        _ => false,
    }
}

// ---------------------------------------------------------------------------
// Pieces
// ---------------------------------------------------------------------------

/// Closed-form description of a piece's approximation function.
#[derive(Debug, Clone)]
enum PieceFun {
    /// Coefficients in the orthonormal polynomial basis of the piece domain.
    Poly(Vec<f64>),
    /// Gaussian bump evaluated at `t - shift`.
    Gauss { params: [f64; 4], shift: i64 },
    /// Element-wise combination of two descriptions on the same domain.
    Combo { op: PointwiseOp, lhs: Box<PieceFun>, rhs: Box<PieceFun> },
}

impl PieceFun {
    /// Function values over `domain` (which must be the domain the
    /// description was built for).
    fn values(&self, domain: &Domain) -> Vec<f64> {
        match self {
            PieceFun::Poly(coeffs) => {
                debug_assert!(coeffs.len() <= domain.len());
                let vectors = basis_vectors(domain.len(), coeffs.len());
                let mut out = vec![0.0; domain.len()];
                for (c, phi) in coeffs.iter().zip(vectors.iter()) {
                    for (o, p) in out.iter_mut().zip(phi) {
                        *o += c * p;
                    }
                }
                out
            }
            PieceFun::Gauss { params, shift } => domain
                .positions()
                .map(|t| gaussian::evaluate(params, (t - shift) as f64))
                .collect(),
            PieceFun::Combo { op, lhs, rhs } => {
                let a = lhs.values(domain);
                let b = rhs.values(domain);
                a.iter().zip(&b).map(|(x, y)| op.apply(*x, *y)).collect()
            }
        }
    }

    /// The same function re-described on a subdomain. Exact: polynomial
    /// restrictions are fully representable at dimension
    /// `min(dim, |sub|)`, the others keep their pointwise form.
    fn restricted(&self, src: &Domain, sub: &Domain) -> PieceFun {
        match self {
            PieceFun::Poly(coeffs) => PieceFun::Poly(restrict_coeffs(coeffs, src, sub)),
            PieceFun::Gauss { .. } => self.clone(),
            PieceFun::Combo { op, lhs, rhs } => PieceFun::Combo {
                op: *op,
                lhs: Box::new(lhs.restricted(src, sub)),
                rhs: Box::new(rhs.restricted(src, sub)),
            },
        }
    }

    /// `sqrt(sum f(t)^2)` over `domain` — exact (coefficient norm for
    /// polynomials, synthesized otherwise).
    fn norm_on(&self, domain: &Domain) -> f64 {
        match self {
            PieceFun::Poly(coeffs) => coeffs.iter().map(|c| c * c).sum::<f64>().sqrt(),
            _ => self.values(domain).iter().map(|v| v * v).sum::<f64>().sqrt(),
        }
    }

    /// `sum f(t)` over `domain` — exact (the degree-0 basis function is the
    /// only one with a nonzero sum).
    #[cfg(test)]
    fn sum_on(&self, domain: &Domain) -> f64 {
        match self {
            PieceFun::Poly(coeffs) => coeffs[0] * (domain.len() as f64).sqrt(),
            _ => self.values(domain).iter().sum(),
        }
    }

    /// Dimension of the polynomial span the function is known to lie in.
    fn poly_dim(&self) -> Option<usize> {
        match self {
            PieceFun::Poly(coeffs) => Some(coeffs.len()),
            _ => None,
        }
    }
}

/// One window of a node's approximation, with bounds valid on that window.
///
/// Invariants (with `f` the described function and `e = T - f` the residual
/// of the node's underlying exact values against it, both restricted to
/// `domain`):
///
/// - `‖e‖  <= em.fes`
/// - `‖f‖  <= em.ses` (equality whenever the piece was built by restriction)
/// - `|Σ e| <= em.tes`
/// - `ortho_dim == Some(d)` implies `<e, phi_k> = 0` for every `k < d` in the
///   orthonormal polynomial basis of `domain`.
#[derive(Debug, Clone)]
struct Piece {
    domain: Domain,
    em: ErrorMeasures,
    ortho_dim: Option<usize>,
    fun: PieceFun,
}

/// Restricts a piece to a window inside its domain, keeping the invariants:
/// the residual norm bound survives restriction, the function norm is
/// recomputed exactly, and the sum bound falls back to `sqrt(|w|) * fes`
/// (Cauchy–Schwarz). Orthogonality does not survive cutting — except for an
/// exact piece, whose zero residual is orthogonal to everything.
fn clip_piece(piece: &Piece, w: &Domain) -> Piece {
    if *w == piece.domain {
        return piece.clone();
    }
    debug_assert!(piece.domain.contains_domain(w));
    let fun = piece.fun.restricted(&piece.domain, w);
    let fes = piece.em.fes;
    let em = ErrorMeasures {
        fes,
        ses: fun.norm_on(w),
        tes: (w.len() as f64).sqrt() * fes,
    };
    let ortho_dim = (fes == 0.0).then_some(w.len());
    Piece { domain: *w, em, ortho_dim, fun }
}

/// Builds the piece of a stored segment restricted to `overlap_src` (given
/// in source coordinates) and translated by `offset`.
fn leaf_piece(seg: &SegmentRep, overlap_src: &Domain, offset: i64) -> Piece {
    let seg_domain = seg.domain.shifted(offset);
    let fun = match &seg.func.repr {
        // Basis vectors depend only on the window length, so translated
        // coefficients are the stored ones.
        FunctionRepr::Coefficients(c) => PieceFun::Poly(c.clone()),
        FunctionRepr::GaussianParams(p) => PieceFun::Gauss { params: *p, shift: offset },
    };
    let ortho_dim = if seg.measures.fes == 0.0 {
        Some(seg_domain.len())
    } else if seg.func.family.is_polynomial() {
        // Least squares projects, so the residual is orthogonal to the span.
        fun.poly_dim()
    } else {
        None
    };
    let whole = Piece { domain: seg_domain, em: seg.measures, ortho_dim, fun };
    let target = overlap_src.shifted(offset);
    if target == seg_domain {
        whole
    } else {
        clip_piece(&whole, &target)
    }
}

/// Describes `node` over `target` (which must lie inside the node's domain)
/// as consecutive pieces tiling `target`.
fn measured(node: &CTse, target: &Domain) -> Result<Vec<Piece>> {
    debug_assert!(node.domain().contains_domain(target));
    match node {
        CTse::Const { value, .. } => {
            let n = target.len();
            let scale = (n as f64).sqrt();
            Ok(vec![Piece {
                domain: *target,
                em: ErrorMeasures { fes: 0.0, ses: value.abs() * scale, tes: 0.0 },
                ortho_dim: Some(n),
                fun: PieceFun::Poly(vec![value * scale]),
            }])
        }
        CTse::Leaf { series, offset, .. } => {
            let src_target = target.shifted(-offset);
            let mut out = Vec::new();
            for seg in series.segments() {
                if let Some(overlap) = seg.domain.intersect(&src_target) {
                    out.push(leaf_piece(seg, &overlap, *offset));
                }
            }
            Ok(out)
        }
        CTse::Bin { op, lhs, rhs, .. } => {
            let l = measured(lhs, target)?;
            let r = measured(rhs, target)?;
            Ok(overlay(*op, &l, &r))
        }
    }
}

/// Overlays two piece lists tiling the same domain onto their common
/// boundary refinement and combines them window by window.
fn overlay(op: PointwiseOp, left: &[Piece], right: &[Piece]) -> Vec<Piece> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    let mut start = left[0].domain.a;
    while i < left.len() && j < right.len() {
        let end = left[i].domain.b.min(right[j].domain.b);
        let w = Domain { a: start, b: end };
        let lp = clip_piece(&left[i], &w);
        let rp = clip_piece(&right[j], &w);
        out.push(combine_pieces(op, lp, rp));
        if left[i].domain.b == end {
            i += 1;
        }
        if right[j].domain.b == end {
            j += 1;
        }
        start = end + 1;
    }
    out
}

/// True when the product of the two pieces' sum errors may drop the mixed
/// residual–function terms: each side's function must lie in a polynomial
/// span the *other* side's residual is orthogonal to.
fn same_space(lp: &Piece, rp: &Piece) -> bool {
    match (lp.fun.poly_dim(), rp.ortho_dim, rp.fun.poly_dim(), lp.ortho_dim) {
        (Some(dl), Some(or), Some(dr), Some(ol)) => dl <= or && dr <= ol,
        _ => false,
    }
}

/// Combines two pieces on the same window under an element-wise operation.
fn combine_pieces(op: PointwiseOp, lp: Piece, rp: Piece) -> Piece {
    debug_assert_eq!(lp.domain, rp.domain);
    let domain = lp.domain;
    match op {
        PointwiseOp::Add | PointwiseOp::Sub => {
            let em = propagate_measures(op, &lp.em, &rp.em, false);
            // The combined residual e1 ± e2 stays orthogonal to the smaller
            // of the two spans.
            let ortho_dim = match (lp.ortho_dim, rp.ortho_dim) {
                (Some(a), Some(b)) => Some(a.min(b)),
                _ => None,
            };
            let fun = combine_funs(op, lp.fun, rp.fun);
            Piece { domain, em, ortho_dim, fun }
        }
        PointwiseOp::Mul => {
            let vs = same_space(&lp, &rp);
            let em = propagate_measures(PointwiseOp::Mul, &lp.em, &rp.em, vs);
            // A product residual has no orthogonality structure unless it
            // vanishes entirely.
            let ortho_dim =
                (lp.em.fes == 0.0 && rp.em.fes == 0.0).then_some(domain.len());
            let fun = PieceFun::Combo {
                op: PointwiseOp::Mul,
                lhs: Box::new(lp.fun),
                rhs: Box::new(rp.fun),
            };
            Piece { domain, em, ortho_dim, fun }
        }
    }
}

/// Combines two function descriptions on the same window. Sums and
/// differences of polynomials fold into one coefficient vector (same basis);
/// everything else is kept symbolic.
fn combine_funs(op: PointwiseOp, lhs: PieceFun, rhs: PieceFun) -> PieceFun {
    if matches!(op, PointwiseOp::Add | PointwiseOp::Sub) {
        if let (PieceFun::Poly(a), PieceFun::Poly(b)) = (&lhs, &rhs) {
            let mut coeffs = vec![0.0; a.len().max(b.len())];
            for (c, v) in coeffs.iter_mut().zip(a) {
                *c = *v;
            }
            for (c, v) in coeffs.iter_mut().zip(b) {
                match op {
                    PointwiseOp::Add => *c += v,
                    _ => *c -= v,
                }
            }
            return PieceFun::Poly(coeffs);
        }
    }
    PieceFun::Combo { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
}

// ---------------------------------------------------------------------------
// Product guarantees
// ---------------------------------------------------------------------------

/// Bound on `|<e_p, f_other>|/‖e_p‖` over piece `p`'s window: the norm of the
/// other side's function there — reduced to its distance from the span when
/// `p` records residual orthogonality.
fn outer_bound(p: &Piece, other: &[Piece]) -> f64 {
    let overlapping: Vec<(&Piece, Domain)> = other
        .iter()
        .filter_map(|q| q.domain.intersect(&p.domain).map(|ov| (q, ov)))
        .collect();

    // Fast path: a single covering polynomial piece yields exact
    // coefficients of the other function in p's window basis, so both the
    // norm and the projections are read off coefficients.
    if let [(q, ov)] = overlapping.as_slice() {
        debug_assert_eq!(*ov, p.domain);
        if let PieceFun::Poly(c) = &q.fun {
            let coeffs = if q.domain == p.domain {
                c.clone()
            } else {
                restrict_coeffs(c, &q.domain, &p.domain)
            };
            let skip = p.ortho_dim.unwrap_or(0);
            return coeffs.iter().skip(skip).map(|x| x * x).sum::<f64>().sqrt();
        }
    }

    // General path: synthesize the other function across p's window.
    let mut vals = Vec::with_capacity(p.domain.len());
    for (q, ov) in &overlapping {
        let fun =
            if q.domain == *ov { q.fun.clone() } else { q.fun.restricted(&q.domain, ov) };
        vals.extend(fun.values(ov));
    }
    let norm_sq: f64 = vals.iter().map(|v| v * v).sum();
    match p.ortho_dim {
        None => norm_sq.sqrt(),
        Some(d) => {
            let dim = d.min(p.domain.len());
            let vectors = basis_vectors(p.domain.len(), dim);
            let mut proj_sq = 0.0;
            for phi in vectors.iter() {
                let gamma: f64 = vals.iter().zip(phi).map(|(v, b)| v * b).sum();
                proj_sq += gamma * gamma;
            }
            (norm_sq - proj_sq).max(0.0).sqrt()
        }
    }
}

/// Deterministic bound on `|Σ_target (T1*T2 - f1*f2)|` given both sides'
/// pieces over the target.
///
/// Expanding `T_i = f_i + e_i` leaves three sums: two mixed terms, bounded
/// piece-wise by `fes_p` times [`outer_bound`], and the residual–residual
/// term, bounded by the optimized window combination.
fn product_guarantee(left: &[Piece], right: &[Piece], target: &Domain) -> Result<f64> {
    let mixed = |side: &[Piece], other: &[Piece]| -> f64 {
        side.iter()
            .map(|p| if p.em.fes == 0.0 { 0.0 } else { p.em.fes * outer_bound(p, other) })
            .sum()
    };
    let term_left = mixed(left, right);
    let term_right = mixed(right, left);

    let fes_of = |pieces: &[Piece]| -> Vec<FesPiece> {
        pieces.iter().map(|p| FesPiece { domain: p.domain, fes: p.em.fes }).collect()
    };
    let cross = os_combination(&fes_of(left), &fes_of(right), target)?.cost;
    Ok(term_left + term_right + cross)
}

/// Concatenated function values of consecutive pieces.
fn pieces_values(pieces: &[Piece]) -> Vec<f64> {
    let total: usize = pieces.iter().map(|p| p.domain.len()).sum();
    let mut out = Vec::with_capacity(total);
    for p in pieces {
        out.extend(p.fun.values(&p.domain));
    }
    out
}

// ---------------------------------------------------------------------------
// Sum evaluation
// ---------------------------------------------------------------------------

/// `(value, guarantee)` for the sum of `node` over `target`: the sum of the
/// node's approximation function plus a deterministic bound on its distance
/// to the exact sum. `target` must lie inside the node's domain.
pub(crate) fn sum_eval(node: &CTse, target: &Domain) -> Result<(f64, f64)> {
    debug_assert!(node.domain().contains_domain(target));
    match node {
        CTse::Const { value, .. } => Ok((value * target.len() as f64, 0.0)),
        CTse::Leaf { series, offset, .. } => {
            let src_target = target.shifted(-offset);
            let mut value = 0.0;
            let mut guarantee = 0.0;
            for seg in series.segments() {
                let Some(overlap) = seg.domain.intersect(&src_target) else { continue };
                if overlap == seg.domain {
                    // Whole segment: the stored sum error applies as is.
                    value += seg.func.sum();
                    guarantee += seg.measures.tes;
                } else {
                    // Cut segment: the restriction's sum is exact in
                    // coefficient space; the sum error falls back to
                    // Cauchy–Schwarz over the cut length.
                    match &seg.func.repr {
                        FunctionRepr::Coefficients(c) => {
                            let d = restrict_coeffs(c, &seg.domain, &overlap);
                            value += d[0] * (overlap.len() as f64).sqrt();
                        }
                        FunctionRepr::GaussianParams(_) => {
                            value += seg.func.values_on(&overlap)?.iter().sum::<f64>();
                        }
                    }
                    guarantee += (overlap.len() as f64).sqrt() * seg.measures.fes;
                }
            }
            Ok((value, guarantee))
        }
        CTse::Bin { op: PointwiseOp::Add, lhs, rhs, .. } => {
            let (lv, lg) = sum_eval(lhs, target)?;
            let (rv, rg) = sum_eval(rhs, target)?;
            Ok((lv + rv, lg + rg))
        }
        CTse::Bin { op: PointwiseOp::Sub, lhs, rhs, .. } => {
            let (lv, lg) = sum_eval(lhs, target)?;
            let (rv, rg) = sum_eval(rhs, target)?;
            Ok((lv - rv, lg + rg))
        }
        CTse::Bin { op: PointwiseOp::Mul, lhs, rhs, .. } => {
            let left = measured(lhs, target)?;
            let right = measured(rhs, target)?;
            let lv = pieces_values(&left);
            let rv = pieces_values(&right);
            let value: f64 = lv.iter().zip(&rv).map(|(x, y)| x * y).sum();
            let guarantee = product_guarantee(&left, &right, target)?;
            Ok((value, guarantee))
        }
    }
}

/// Exact sum of the node's approximation function over `target` (no error
/// bound) — the value half of [`sum_eval`], exposed for reuse.
#[cfg(test)]
fn approx_sum_value(node: &CTse, target: &Domain) -> Result<f64> {
    Ok(measured(node, target)?.iter().map(|p| p.fun.sum_on(&p.domain)).sum())
}
