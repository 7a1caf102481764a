//! Least-squares fitting of the 4-parameter Gaussian bump
//! `g(t) = a * exp(-(t - b)^2 / (2 c^2)) + d`.
//!
//! The model is nonlinear in `b` and `c`, so fitting uses Gauss–Newton with
//! Levenberg damping, run from a small set of deterministic starting points
//! (peak, trough, wide) and optionally from a warm start supplied by the
//! caller (the sliding-window segmenter reuses the previous window's fit).
//! The best sum of squared residuals wins. Positions are centered at the
//! window midpoint during optimization for conditioning; the reported `b` is
//! in absolute positions.

use crate::core::Domain;

/// Iteration cap per cold start; only matters for adversarial data.
const MAX_ITERATIONS: usize = 80;

/// Iteration cap when refining a warm start alone. A window grown by one
/// point needs a small correction, and capping the refinement keeps the
/// segmenter's grow loop linear in the window length; a fit the cap leaves
/// short shows up honestly in the error measures.
const WARM_REFINE_ITERATIONS: usize = 12;

/// Relative SSE improvement below which iteration stops.
const RELATIVE_TOLERANCE: f64 = 1e-13;

/// Width floor, as a fraction of the window span, keeping `c` away from the
/// singular point `c = 0`.
const MIN_WIDTH_FRACTION: f64 = 1e-6;

/// Window length up to which a warm-started fit still runs the full
/// multi-start. Small windows are cheap to refit and their warm starts are
/// often degenerate (a one-point window pins `a = 0`, freezing the shape
/// gradient), so the cold starts stay on until the window is long enough to
/// have locked in a real shape.
const MULTISTART_MAX_LEN: usize = 32;

/// Evaluates the bump at position `t`.
pub fn evaluate(params: &[f64; 4], t: f64) -> f64 {
    let [a, b, c, d] = *params;
    if c == 0.0 {
        // Degenerate width: the bump collapses to a single spike at t = b.
        return if t == b { a + d } else { d };
    }
    let z = (t - b) / c;
    a * (-0.5 * z * z).exp() + d
}

/// Sum of squared residuals of `params` against `values` on `domain`.
fn sse(params: &[f64; 4], values: &[f64], t0: f64) -> f64 {
    values
        .iter()
        .enumerate()
        .map(|(i, y)| {
            let r = evaluate(params, t0 + i as f64) - y;
            r * r
        })
        .sum()
}

/// Solves the 4x4 system `m x = rhs` by Gaussian elimination with partial
/// pivoting. Returns `None` when the matrix is numerically singular.
fn solve4(mut m: [[f64; 4]; 4], mut rhs: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..4 {
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = [0.0; 4];
    for col in (0..4).rev() {
        let mut s = rhs[col];
        for k in col + 1..4 {
            s -= m[col][k] * x[k];
        }
        x[col] = s / m[col][col];
        if !x[col].is_finite() {
            return None;
        }
    }
    Some(x)
}

/// One damped Gauss–Newton run from `start` (in centered coordinates).
/// Returns the refined parameters and their SSE.
fn refine(
    start: [f64; 4],
    values: &[f64],
    t0: f64,
    min_width: f64,
    max_iterations: usize,
) -> ([f64; 4], f64) {
    let mut params = start;
    params[2] = params[2].abs().max(min_width);
    let mut best_sse = sse(&params, values, t0);
    let mut lambda = 1e-3;

    for _ in 0..max_iterations {
        // Normal equations J^T J delta = -J^T r with Levenberg damping.
        let [a, b, c, _d] = params;
        let mut jtj = [[0.0; 4]; 4];
        let mut jtr = [0.0; 4];
        for (i, y) in values.iter().enumerate() {
            let t = t0 + i as f64;
            let z = (t - b) / c;
            let e = (-0.5 * z * z).exp();
            let residual = a * e + params[3] - y;
            let row = [e, a * e * z / c, a * e * z * z / c, 1.0];
            for p in 0..4 {
                jtr[p] += row[p] * residual;
                for q in p..4 {
                    jtj[p][q] += row[p] * row[q];
                }
            }
        }
        for p in 0..4 {
            for q in 0..p {
                jtj[p][q] = jtj[q][p];
            }
        }

        let mut improved = false;
        for _attempt in 0..8 {
            let mut damped = jtj;
            for (p, row) in damped.iter_mut().enumerate() {
                row[p] += lambda * (jtj[p][p].max(1e-12));
            }
            let rhs = [-jtr[0], -jtr[1], -jtr[2], -jtr[3]];
            let Some(delta) = solve4(damped, rhs) else {
                lambda *= 10.0;
                continue;
            };
            let mut candidate = [
                params[0] + delta[0],
                params[1] + delta[1],
                params[2] + delta[2],
                params[3] + delta[3],
            ];
            candidate[2] = candidate[2].abs().max(min_width);
            let candidate_sse = sse(&candidate, values, t0);
            if candidate_sse.is_finite() && candidate_sse < best_sse {
                let gain = best_sse - candidate_sse;
                params = candidate;
                best_sse = candidate_sse;
                lambda = (lambda / 3.0).max(1e-12);
                improved = true;
                if gain <= RELATIVE_TOLERANCE * (best_sse + 1e-30) {
                    return (params, best_sse);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (params, best_sse)
}

/// Fits the 4-parameter bump to `values` on `domain`, optionally warm-started
/// from a previous fit (parameters in absolute positions).
///
/// Always returns parameters; fit quality is reported separately through the
/// segment error measures.
pub fn fit(values: &[f64], domain: &Domain, warm: Option<&[f64; 4]>) -> [f64; 4] {
    let n = values.len();
    debug_assert_eq!(n, domain.len());
    let center = domain.a as f64 + (n as f64 - 1.0) / 2.0;
    let t0 = -((n as f64 - 1.0) / 2.0); // centered coordinate of the first point
    let span = (n as f64 - 1.0).max(1.0);
    let min_width = span * MIN_WIDTH_FRACTION;

    let mut min_v = f64::INFINITY;
    let mut max_v = f64::NEG_INFINITY;
    let mut arg_min = 0usize;
    let mut arg_max = 0usize;
    for (i, v) in values.iter().enumerate() {
        if *v < min_v {
            min_v = *v;
            arg_min = i;
        }
        if *v > max_v {
            max_v = *v;
            arg_max = i;
        }
    }

    // On a long window with a warm start the caller is growing one point at a
    // time, so the previous optimum is by far the best start and refining only
    // it keeps the grow loop linear instead of quadratic. If the refined fit
    // drifts off the data the error measure rises and the segmenter cuts,
    // after which the next window is fitted cold again — skipping the
    // multi-start cannot lock the segmenter onto a bad local optimum for long.
    //
    // Cold and short-window fits use a deterministic multi-start: an upward
    // bump at the max, a downward bump at the min, and a wide bump centered on
    // the window, plus the warm start when one is given.
    let (starts, max_iterations): (Vec<[f64; 4]>, usize) = match warm {
        Some(w) if n > MULTISTART_MAX_LEN => {
            (vec![[w[0], w[1] - center, w[2], w[3]]], WARM_REFINE_ITERATIONS)
        }
        _ => {
            let mut s = vec![
                [max_v - min_v, t0 + arg_max as f64, (span / 4.0).max(min_width), min_v],
                [min_v - max_v, t0 + arg_min as f64, (span / 4.0).max(min_width), max_v],
                [max_v - min_v, 0.0, span.max(min_width), min_v],
            ];
            if let Some(w) = warm {
                s.push([w[0], w[1] - center, w[2], w[3]]);
            }
            (s, MAX_ITERATIONS)
        }
    };

    let mut best: Option<([f64; 4], f64)> = None;
    for start in starts {
        let (params, fit_sse) = refine(start, values, t0, min_width, max_iterations);
        if best.as_ref().is_none_or(|(_, s)| fit_sse < *s) {
            best = Some((params, fit_sse));
        }
    }
    let (mut params, _) = best.expect("at least one start");
    params[1] += center; // back to absolute positions
    params[2] = params[2].abs();
    params
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bump(domain: &Domain, p: &[f64; 4]) -> Vec<f64> {
        domain.positions().map(|t| evaluate(p, t as f64)).collect()
    }

    fn residual_norm(values: &[f64], domain: &Domain, p: &[f64; 4]) -> f64 {
        values
            .iter()
            .zip(domain.positions())
            .map(|(y, t)| {
                let r = y - evaluate(p, t as f64);
                r * r
            })
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn recovers_noiseless_bump() {
        let domain = Domain::new(1, 8).unwrap();
        let truth = [2.0, 4.0, 1.5, 0.5];
        let values = bump(&domain, &truth);
        let fitted = fit(&values, &domain, None);
        assert!(residual_norm(&values, &domain, &fitted) < 1e-6);
    }

    #[test]
    fn recovers_downward_bump() {
        let domain = Domain::new(0, 29).unwrap();
        let truth = [-3.0, 14.0, 4.0, 10.0];
        let values = bump(&domain, &truth);
        let fitted = fit(&values, &domain, None);
        assert!(residual_norm(&values, &domain, &fitted) < 1e-6);
    }

    #[test]
    fn constant_data_fits_exactly() {
        let domain = Domain::new(5, 20).unwrap();
        let values = vec![3.25; domain.len()];
        let fitted = fit(&values, &domain, None);
        assert!(residual_norm(&values, &domain, &fitted) < 1e-9);
    }

    #[test]
    fn single_point_window() {
        let domain = Domain::new(7, 7).unwrap();
        let values = vec![42.0];
        let fitted = fit(&values, &domain, None);
        assert!(residual_norm(&values, &domain, &fitted) < 1e-9);
    }

    #[test]
    fn warm_start_tracks_growing_window() {
        let domain = Domain::new(1, 40).unwrap();
        let truth = [5.0, 22.0, 6.0, 1.0];
        let values = bump(&domain, &truth);
        let mut warm: Option<[f64; 4]> = None;
        for end in 5..=40 {
            let d = Domain::new(1, end).unwrap();
            let fitted = fit(&values[..d.len()], &d, warm.as_ref());
            warm = Some(fitted);
        }
        let final_fit = warm.unwrap();
        assert!(residual_norm(&values, &domain, &final_fit) < 1e-6);
    }

    #[test]
    fn evaluate_handles_degenerate_width() {
        let p = [2.0, 3.0, 0.0, 1.0];
        assert_abs_diff_eq!(evaluate(&p, 3.0), 3.0);
        assert_abs_diff_eq!(evaluate(&p, 4.0), 1.0);
    }

    #[test]
    fn far_position_decays_to_offset() {
        let p = [2.0, 0.0, 1.0, 0.25];
        assert_abs_diff_eq!(evaluate(&p, 100.0), 0.25, epsilon = 1e-12);
    }
}
