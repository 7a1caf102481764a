//! Window combination for cross-residual bounds.
//!
//! When two piecewise approximations are multiplied, the accumulated product
//! of their residuals over a shared domain D is bounded, for *any* partition
//! of D into windows w, by
//!
//! ```text
//! Σ_w ‖e1|w‖ · ‖e2|w‖            (Cauchy–Schwarz per window)
//! ```
//!
//! and each windowed residual norm is in turn bounded by the root of the
//! summed squared per-piece norms of the pieces overlapping w.  The resulting
//! bound depends on the chosen partition: coarse windows pay for overlap
//! slack, fine windows forgo cancellation between neighboring pieces, and
//! neither extreme wins in general.  This module searches the partitions.
//!
//! Two combination strategies are provided:
//!
//! * [`os_combination`] — optimizes over partitions cut at piece boundaries
//!   of *either* side.  Window cost is constant between consecutive
//!   boundaries, so restricting cuts to boundaries loses nothing and a
//!   per-block dynamic program attains the true minimum.
//! * [`is_combination_value`] — the simpler fallback that reuses one side's
//!   own pieces as the windows, taking the cheaper of the two sides.  Its
//!   partitions are a subset of those the dynamic program searches, so it is
//!   never tighter, but it is a useful comparison point.

use crate::core::Domain;
use crate::error::{Error, Result};

/// Cap on dynamic-program candidates per block.  Any subset of cut positions
/// still yields a sound bound (every partition does), so oversized blocks are
/// thinned rather than solved exactly; optimality degrades gracefully.
const MAX_BLOCK_CANDIDATES: usize = 4096;

/// A contiguous stretch of a residual with a known root-sum-square bound.
#[derive(Debug, Clone, PartialEq)]
pub struct FesPiece {
    /// The positions the piece covers.
    pub domain: Domain,
    /// Upper bound on the Euclidean norm of the residual restricted to
    /// `domain` (and hence to any sub-window of it).
    pub fes: f64,
}

/// A window partition of a shared domain together with its combined cost.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentCombination {
    /// Consecutive windows tiling the shared domain.
    pub windows: Vec<Domain>,
    /// `Σ_w sqrt(mass_left(w)) * sqrt(mass_right(w))` where `mass` sums the
    /// squared bounds of the pieces overlapping each window.
    pub cost: f64,
}

/// True when both lists carve the domain at exactly the same boundaries.
pub fn check_aligned(left: &[FesPiece], right: &[FesPiece]) -> bool {
    left.len() == right.len()
        && left.iter().zip(right).all(|(l, r)| l.domain == r.domain)
}

/// Checks that `pieces` tile `domain` contiguously with finite bounds.
fn validate_tiling(pieces: &[FesPiece], domain: &Domain, side: &str) -> Result<()> {
    if pieces.is_empty() {
        return Err(Error::invalid_argument(format!("{side} piece list is empty")));
    }
    if pieces[0].domain.a != domain.a || pieces[pieces.len() - 1].domain.b != domain.b {
        return Err(Error::invalid_argument(format!(
            "{side} pieces cover [{}, {}] but the shared domain is {domain}",
            pieces[0].domain.a,
            pieces[pieces.len() - 1].domain.b
        )));
    }
    for pair in pieces.windows(2) {
        if pair[1].domain.a != pair[0].domain.b + 1 {
            return Err(Error::invalid_argument(format!(
                "{side} pieces are not contiguous: {} is followed by {}",
                pair[0].domain, pair[1].domain
            )));
        }
    }
    for p in pieces {
        if !p.fes.is_finite() || p.fes < 0.0 {
            return Err(Error::invalid_argument(format!(
                "{side} piece on {} has invalid bound {}",
                p.domain, p.fes
            )));
        }
    }
    Ok(())
}

/// Prefix sums of squared piece bounds: `prefix[i] = Σ_{j<i} fes_j²`.
fn prefix_squares(pieces: &[FesPiece]) -> Vec<f64> {
    let mut prefix = Vec::with_capacity(pieces.len() + 1);
    let mut acc = 0.0;
    prefix.push(acc);
    for p in pieces {
        acc += p.fes * p.fes;
        prefix.push(acc);
    }
    prefix
}

/// Inclusive index range of the pieces overlapping `window`.
///
/// Pieces must tile a superset of `window`, sorted by position.
fn cover(pieces: &[FesPiece], window: &Domain) -> (usize, usize) {
    let lo = pieces.partition_point(|p| p.domain.b < window.a);
    let hi = pieces.partition_point(|p| p.domain.a <= window.b) - 1;
    (lo, hi)
}

fn mass(prefix: &[f64], lo: usize, hi: usize) -> f64 {
    prefix[hi + 1] - prefix[lo]
}

/// Boundaries (piece end positions) present in *both* lists, ascending.
///
/// The final domain position always qualifies because both tilings end there.
fn shared_boundaries(left: &[FesPiece], right: &[FesPiece]) -> Vec<i64> {
    let right_ends: std::collections::BTreeSet<i64> =
        right.iter().map(|p| p.domain.b).collect();
    left.iter()
        .map(|p| p.domain.b)
        .filter(|e| right_ends.contains(e))
        .collect()
}

/// Minimal-cost window partition over cuts at piece boundaries.
///
/// Splitting a window at a boundary shared by both sides never increases the
/// cost (the masses split additively there, and `sqrt((A1+A2)(B1+B2)) >=
/// sqrt(A1*B1) + sqrt(A2*B2)`), so the search first decomposes the domain
/// into blocks delimited by shared boundaries and then runs an exact
/// quadratic dynamic program inside each block.
///
/// # Arguments
///
/// * `left`, `right` — piece lists, each tiling `domain` contiguously.
/// * `domain` — the shared domain both tilings cover.
pub fn os_combination(
    left: &[FesPiece],
    right: &[FesPiece],
    domain: &Domain,
) -> Result<SegmentCombination> {
    validate_tiling(left, domain, "left")?;
    validate_tiling(right, domain, "right")?;

    let prefix_l = prefix_squares(left);
    let prefix_r = prefix_squares(right);
    let shared = shared_boundaries(left, right);

    let mut windows = Vec::new();
    let mut cost = 0.0;
    let mut block_start = domain.a;
    for &block_end in &shared {
        let block = Domain { a: block_start, b: block_end };
        cost += solve_block(left, right, &prefix_l, &prefix_r, &block, &mut windows);
        block_start = block_end + 1;
    }
    Ok(SegmentCombination { windows, cost })
}

/// Exact dynamic program over one block; appends its windows and returns its
/// cost.
fn solve_block(
    left: &[FesPiece],
    right: &[FesPiece],
    prefix_l: &[f64],
    prefix_r: &[f64],
    block: &Domain,
    windows: &mut Vec<Domain>,
) -> f64 {
    // Candidate cut positions: piece ends of either side inside the block.
    // The block end itself is always among them.
    let mut ends: Vec<i64> = left
        .iter()
        .chain(right.iter())
        .map(|p| p.domain.b)
        .filter(|e| *e >= block.a && *e <= block.b)
        .collect();
    ends.sort_unstable();
    ends.dedup();
    if ends.len() > MAX_BLOCK_CANDIDATES {
        ends = thin_candidates(ends, MAX_BLOCK_CANDIDATES);
    }

    let k = ends.len();
    let mut dp = vec![f64::INFINITY; k + 1];
    let mut back = vec![0usize; k + 1];
    dp[0] = 0.0;
    for j in 1..=k {
        for i in 0..j {
            let start = if i == 0 { block.a } else { ends[i - 1] + 1 };
            let w = Domain { a: start, b: ends[j - 1] };
            let (llo, lhi) = cover(left, &w);
            let (rlo, rhi) = cover(right, &w);
            let c = mass(prefix_l, llo, lhi).sqrt() * mass(prefix_r, rlo, rhi).sqrt();
            let total = dp[i] + c;
            if total < dp[j] {
                dp[j] = total;
                back[j] = i;
            }
        }
    }

    let mut picked = Vec::new();
    let mut j = k;
    while j > 0 {
        picked.push(j);
        j = back[j];
    }
    picked.reverse();
    let mut start = block.a;
    for j in picked {
        windows.push(Domain { a: start, b: ends[j - 1] });
        start = ends[j - 1] + 1;
    }
    dp[k]
}

/// Keeps an evenly spaced subset of `ends` (always retaining the last).
fn thin_candidates(ends: Vec<i64>, cap: usize) -> Vec<i64> {
    let stride = ends.len().div_ceil(cap);
    let last = *ends.last().expect("candidate list is nonempty");
    let mut thinned: Vec<i64> = ends
        .into_iter()
        .step_by(stride)
        .collect();
    if *thinned.last().expect("thinned list is nonempty") != last {
        thinned.push(last);
    }
    thinned
}

/// Cost of the partition that reuses one side's own pieces as windows,
/// taking the cheaper side.
///
/// With the left pieces as windows the per-window left mass is a single
/// squared bound, so the cost telescopes to
/// `Σ_p fes_p * sqrt(Σ_{q overlapping p} fes_q²)` — and symmetrically for
/// the right.
pub fn is_combination_value(
    left: &[FesPiece],
    right: &[FesPiece],
    domain: &Domain,
) -> Result<f64> {
    validate_tiling(left, domain, "left")?;
    validate_tiling(right, domain, "right")?;
    let prefix_l = prefix_squares(left);
    let prefix_r = prefix_squares(right);

    let route = |side: &[FesPiece], other: &[FesPiece], other_prefix: &[f64]| -> f64 {
        side.iter()
            .map(|p| {
                let (lo, hi) = cover(other, &p.domain);
                p.fes * mass(other_prefix, lo, hi).sqrt()
            })
            .sum()
    };
    let left_route = route(left, right, &prefix_r);
    let right_route = route(right, left, &prefix_l);
    Ok(left_route.min(right_route))
}
