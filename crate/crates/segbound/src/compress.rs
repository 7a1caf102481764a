//! Segmentation and compression of raw series.
//!
//! A series is cut into contiguous segments, each fitted with one estimation
//! function and annotated with three error measures:
//!
//! - `fes = sqrt(sum_i (T[i] - f(i))^2)` — residual norm,
//! - `ses = sqrt(sum_i f(i)^2)` — function norm,
//! - `tes = |sum_i T[i] - sum_i f(i)|` — absolute sum error.
//!
//! Two segmentation strategies are offered: fixed-length windows and a
//! greedy sliding window that grows while `fes` stays within a threshold.

use crate::core::{Domain, ErrorMeasures, TimeSeries};
use crate::error::{Error, Result};
use crate::families::{family_by_id, fit_with_warm, FamilyDescriptor, FittedFunction};

/// How a series is cut into segments.
#[derive(Debug, Clone, PartialEq)]
pub enum SegmentationSpec {
    /// Consecutive windows of this many points; the last window may be
    /// shorter.
    FixedLength(usize),
    /// Greedy growth: extend the current window while the fit's `fes` stays
    /// `<= tau`; a violating point starts the next window. A point that
    /// violates on its own still forms a single-point segment. `max_len`
    /// optionally caps window growth (bounding per-step refit cost).
    SlidingWindow { tau: f64, max_len: Option<usize> },
}

impl SegmentationSpec {
    /// Parses the CLI syntax `fixed:<len>`, `sliding:<tau>`, or
    /// `sliding:<tau>:<max_len>`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        match parts.as_slice() {
            ["fixed", len] => {
                let len: usize = len
                    .parse()
                    .map_err(|_| Error::invalid_argument(format!("bad window length '{len}'")))?;
                if len == 0 {
                    return Err(Error::invalid_argument("window length must be at least 1"));
                }
                Ok(SegmentationSpec::FixedLength(len))
            }
            ["sliding", tau] | ["sliding", tau, _] => {
                let tau: f64 = tau
                    .parse()
                    .map_err(|_| Error::invalid_argument(format!("bad threshold '{tau}'")))?;
                if !tau.is_finite() || tau < 0.0 {
                    return Err(Error::invalid_argument("threshold must be finite and >= 0"));
                }
                let max_len = if parts.len() == 3 {
                    let m: usize = parts[2].parse().map_err(|_| {
                        Error::invalid_argument(format!("bad max length '{}'", parts[2]))
                    })?;
                    if m == 0 {
                        return Err(Error::invalid_argument("max length must be at least 1"));
                    }
                    Some(m)
                } else {
                    None
                };
                Ok(SegmentationSpec::SlidingWindow { tau, max_len })
            }
            _ => Err(Error::invalid_argument(format!(
                "bad segmentation '{text}' (use fixed:<len> or sliding:<tau>[:<max_len>])"
            ))),
        }
    }
}

/// One compressed segment: domain, fitted function, error measures.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentRep {
    /// Positions the segment covers.
    pub domain: Domain,
    /// Estimation function fitted on the segment.
    pub func: FittedFunction,
    /// Error measures of the fit.
    pub measures: ErrorMeasures,
}

/// A compressed series: contiguous segments under one family.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedSeries {
    /// Identifier of the underlying series.
    pub series_id: String,
    /// Family shared by all segments.
    pub family: &'static FamilyDescriptor,
    segments: Vec<SegmentRep>,
}

impl CompressedSeries {
    /// Assembles a compressed series, validating that segments are
    /// non-empty, contiguous, in order, and carry functions on their own
    /// domains under the declared family.
    pub fn new(
        series_id: impl Into<String>,
        family: &'static FamilyDescriptor,
        segments: Vec<SegmentRep>,
    ) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::invalid_argument("a compressed series needs at least one segment"));
        }
        for (i, seg) in segments.iter().enumerate() {
            if seg.func.domain != seg.domain {
                return Err(Error::invalid_argument(format!(
                    "segment {i} function domain {} differs from segment domain {}",
                    seg.func.domain, seg.domain
                )));
            }
            if seg.func.family.id != family.id {
                return Err(Error::invalid_argument(format!(
                    "segment {i} family {} differs from series family {}",
                    seg.func.family.id, family.id
                )));
            }
            if i > 0 {
                let prev = &segments[i - 1].domain;
                if seg.domain.a != prev.b + 1 {
                    return Err(Error::invalid_argument(format!(
                        "segments must be contiguous: {} then {}",
                        prev, seg.domain
                    )));
                }
            }
        }
        Ok(CompressedSeries { series_id: series_id.into(), family, segments })
    }

    /// The segments in position order.
    pub fn segments(&self) -> &[SegmentRep] {
        &self.segments
    }

    /// Full domain covered by the segments.
    pub fn domain(&self) -> Domain {
        Domain { a: self.segments[0].domain.a, b: self.segments.last().unwrap().domain.b }
    }

    /// Numbers stored by this representation: per segment, the function
    /// parameters plus its error measures — `dim + 1` for polynomials (the
    /// residual norm is the one measure a projection cannot reconstruct),
    /// `4 + 3` for the Gaussian bump.
    pub fn stored_numbers(&self) -> usize {
        self.segments
            .iter()
            .map(|s| match &s.func.repr {
                crate::families::FunctionRepr::Coefficients(c) => c.len() + 1,
                crate::families::FunctionRepr::GaussianParams(_) => 4 + 3,
            })
            .sum()
    }

    /// Raw point count divided by stored numbers.
    pub fn compression_ratio(&self, raw_points: usize) -> f64 {
        raw_points as f64 / self.stored_numbers() as f64
    }
}

/// Cuts `domain` into consecutive windows of `len` points (last one may be
/// shorter).
///
/// # Example
///
/// ```
/// use segbound::compress::segment_fixed;
/// use segbound::core::Domain;
/// let windows = segment_fixed(&Domain::new(1, 7).unwrap(), 3).unwrap();
/// assert_eq!(windows.len(), 3);
/// assert_eq!(windows[2], Domain::new(7, 7).unwrap());
/// ```
pub fn segment_fixed(domain: &Domain, len: usize) -> Result<Vec<Domain>> {
    if len == 0 {
        return Err(Error::invalid_argument("window length must be at least 1"));
    }
    let mut out = Vec::new();
    let mut a = domain.a;
    while a <= domain.b {
        let b = (a + len as i64 - 1).min(domain.b);
        out.push(Domain { a, b });
        a = b + 1;
    }
    Ok(out)
}

/// Error measures of `func` against the raw `values` on the function's
/// domain.
///
/// # Example
///
/// ```
/// use segbound::compress::error_measures;
/// use segbound::core::Domain;
/// use segbound::families::{FittedFunction, POLY0};
/// // The zero function against (3, 4): fes = 5, ses = 0, tes = 7.
/// let zero = FittedFunction::zero(&POLY0, Domain::new(1, 2).unwrap());
/// let m = error_measures(&[3.0, 4.0], &zero).unwrap();
/// assert_eq!((m.fes, m.ses, m.tes), (5.0, 0.0, 7.0));
/// ```
pub fn error_measures(values: &[f64], func: &FittedFunction) -> Result<ErrorMeasures> {
    if values.len() != func.domain.len() {
        return Err(Error::invalid_argument(format!(
            "expected {} values for domain {}, got {}",
            func.domain.len(),
            func.domain,
            values.len()
        )));
    }
    let fitted = func.values();
    let mut residual_sq = 0.0;
    let mut sum_raw = 0.0;
    let mut sum_fit = 0.0;
    for (v, f) in values.iter().zip(&fitted) {
        let r = v - f;
        residual_sq += r * r;
        sum_raw += v;
        sum_fit += f;
    }
    ErrorMeasures::new(residual_sq.sqrt(), func.norm(), (sum_raw - sum_fit).abs())
}

/// Greedy sliding-window segmentation with per-window fits.
///
/// Invariant: every produced segment, extended by one more point, would have
/// `fes > tau` (unless the extension was forbidden by `max_len` or the end
/// of the series).
pub fn segment_sliding(
    series: &TimeSeries,
    family: &'static FamilyDescriptor,
    tau: f64,
    max_len: Option<usize>,
) -> Result<Vec<SegmentRep>> {
    if !tau.is_finite() || tau < 0.0 {
        return Err(Error::invalid_argument("threshold must be finite and >= 0"));
    }
    let cap = max_len.unwrap_or(usize::MAX);
    if cap == 0 {
        return Err(Error::invalid_argument("max length must be at least 1"));
    }
    let mut segments = Vec::new();
    let mut start = series.domain.a;

    while start <= series.domain.b {
        // The single-point window always forms a valid last-resort segment.
        let mut accepted = fit_segment(series, Domain { a: start, b: start }, family, None)?;
        let mut end = start;
        while end < series.domain.b && ((end - start + 1) as usize) < cap {
            let candidate_domain = Domain { a: start, b: end + 1 };
            let warm_repr = Some(&accepted.func.repr);
            let candidate = fit_segment(series, candidate_domain, family, warm_repr)?;
            if candidate.measures.fes <= tau {
                accepted = candidate;
                end += 1;
            } else {
                break;
            }
        }
        start = end + 1;
        segments.push(accepted);
    }
    Ok(segments)
}

fn fit_segment(
    series: &TimeSeries,
    domain: Domain,
    family: &'static FamilyDescriptor,
    warm: Option<&crate::families::FunctionRepr>,
) -> Result<SegmentRep> {
    let values = series.window(&domain)?;
    let func = fit_with_warm(values, &domain, family, warm)?;
    let measures = error_measures(values, &func)?;
    Ok(SegmentRep { domain, func, measures })
}

/// Compresses a raw series under `family_id` with the given segmentation.
///
/// # Arguments
///
/// * `series` - raw series to compress.
/// * `family_id` - one of `p0`, `p1`, `p2`, `g`.
/// * `spec` - fixed-length or sliding-window segmentation.
pub fn compress(
    series: &TimeSeries,
    family_id: &str,
    spec: &SegmentationSpec,
) -> Result<CompressedSeries> {
    let family = family_by_id(family_id)?;
    let segments = match spec {
        SegmentationSpec::FixedLength(len) => {
            let windows = segment_fixed(&series.domain, *len)?;
            let mut segments = Vec::with_capacity(windows.len());
            for w in windows {
                segments.push(fit_segment(series, w, family, None)?);
            }
            segments
        }
        SegmentationSpec::SlidingWindow { tau, max_len } => {
            segment_sliding(series, family, *tau, *max_len)?
        }
    };
    CompressedSeries::new(series.id.clone(), family, segments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{fit, FunctionRepr, POLY0, POLY1};
    use approx::assert_abs_diff_eq;

    fn ramp(id: &str, a: i64, n: usize, slope: f64) -> TimeSeries {
        let values = (0..n).map(|i| slope * i as f64).collect();
        TimeSeries::new(id, a, values).unwrap()
    }

    #[test]
    fn fixed_windows_cover_domain() {
        let w = segment_fixed(&Domain::new(1, 10).unwrap(), 5).unwrap();
        assert_eq!(w, vec![Domain::new(1, 5).unwrap(), Domain::new(6, 10).unwrap()]);
        let w = segment_fixed(&Domain::new(1, 7).unwrap(), 3).unwrap();
        assert_eq!(w.len(), 3);
        assert_eq!(w[2].len(), 1);
        // A window longer than the domain produces a single segment.
        let w = segment_fixed(&Domain::new(1, 4).unwrap(), 100).unwrap();
        assert_eq!(w, vec![Domain::new(1, 4).unwrap()]);
        assert!(segment_fixed(&Domain::new(1, 4).unwrap(), 0).is_err());
    }

    #[test]
    fn measures_of_zero_function() {
        let zero = FittedFunction::zero(&POLY0, Domain::new(1, 2).unwrap());
        let m = error_measures(&[3.0, 4.0], &zero).unwrap();
        assert_eq!(m.fes, 5.0);
        assert_eq!(m.ses, 0.0);
        assert_eq!(m.tes, 7.0);
    }

    #[test]
    fn measures_of_worked_linear_fit() {
        let domain = Domain::new(1, 5).unwrap();
        let values = [0.2, 0.4, 0.4, 0.5, 0.6];
        let f = fit(&values, &domain, &POLY1).unwrap();
        let m = error_measures(&values, &f).unwrap();
        assert_abs_diff_eq!(m.fes, 0.08366600265340756, epsilon = 1e-12);
        assert_abs_diff_eq!(m.ses, 0.9813256340277675, epsilon = 1e-12);
        // Projection keeps the sum: tes vanishes up to rounding.
        assert!(m.tes < 1e-12);
    }

    #[test]
    fn compress_ratio_accounting() {
        let series = ramp("T1", 1, 1000, 0.01);
        let c = compress(&series, "p1", &SegmentationSpec::FixedLength(10)).unwrap();
        assert_eq!(c.segments().len(), 100);
        assert_eq!(c.stored_numbers(), 300);
        assert_abs_diff_eq!(c.compression_ratio(1000), 1000.0 / 300.0, epsilon = 1e-12);
        // Gaussian segments store 4 parameters + 3 measures.
        let g = compress(&series, "g", &SegmentationSpec::FixedLength(100)).unwrap();
        assert_eq!(g.stored_numbers(), 10 * 7);
    }

    #[test]
    fn compressed_series_validates_contiguity() {
        let d1 = Domain::new(1, 5).unwrap();
        let d3 = Domain::new(7, 9).unwrap();
        let seg = |d: Domain| SegmentRep {
            domain: d,
            func: FittedFunction::zero(&POLY0, d),
            measures: ErrorMeasures::zero(),
        };
        // Gap between 5 and 7.
        assert!(CompressedSeries::new("T", &POLY0, vec![seg(d1), seg(d3)]).is_err());
        assert!(CompressedSeries::new("T", &POLY0, vec![]).is_err());
        // Family mismatch.
        let mixed = vec![SegmentRep {
            domain: d1,
            func: FittedFunction::zero(&POLY1, d1),
            measures: ErrorMeasures::zero(),
        }];
        assert!(CompressedSeries::new("T", &POLY0, mixed).is_err());
    }

    #[test]
    fn sliding_window_exact_data_gives_one_segment() {
        let series = ramp("T1", 1, 50, 0.5);
        let c = compress(
            &series,
            "p1",
            &SegmentationSpec::SlidingWindow { tau: 1e-9, max_len: None },
        )
        .unwrap();
        assert_eq!(c.segments().len(), 1);
        assert_eq!(c.domain(), series.domain);
    }

    #[test]
    fn sliding_window_splits_at_breakpoint() {
        // Two perfect linear pieces with a sharp break: a small tau forces a
        // boundary at the break.
        let mut values: Vec<f64> = (0..30).map(|i| i as f64).collect();
        values.extend((0..30).map(|i| 29.0 - 3.0 * i as f64));
        let series = TimeSeries::new("T1", 1, values).unwrap();
        let c = compress(
            &series,
            "p1",
            &SegmentationSpec::SlidingWindow { tau: 1e-6, max_len: None },
        )
        .unwrap();
        assert_eq!(c.segments().len(), 2);
        assert_eq!(c.segments()[0].domain, Domain::new(1, 30).unwrap());
        for seg in c.segments() {
            assert!(seg.measures.fes <= 1e-6);
        }
    }

    #[test]
    fn sliding_window_greedy_maximality() {
        // Every segment extended by one point must violate tau.
        let values: Vec<f64> =
            (0..120).map(|i| (i as f64 * 0.37).sin() + 0.05 * ((i * 13) % 7) as f64).collect();
        let series = TimeSeries::new("T1", 1, values).unwrap();
        let tau = 0.12;
        let c = compress(
            &series,
            "p1",
            &SegmentationSpec::SlidingWindow { tau, max_len: None },
        )
        .unwrap();
        for seg in c.segments() {
            assert!(seg.measures.fes <= tau + 1e-12);
            if seg.domain.b < series.domain.b {
                let extended = Domain::new(seg.domain.a, seg.domain.b + 1).unwrap();
                let f = fit(series.window(&extended).unwrap(), &extended, &POLY1).unwrap();
                let m = error_measures(series.window(&extended).unwrap(), &f).unwrap();
                assert!(m.fes > tau, "segment {} was extendable", seg.domain);
            }
        }
        // Segments tile the domain contiguously (validated by construction,
        // re-checked here).
        assert_eq!(c.domain(), series.domain);
    }

    #[test]
    fn sliding_window_respects_max_len() {
        let series = ramp("T1", 1, 40, 0.0);
        let c = compress(
            &series,
            "p0",
            &SegmentationSpec::SlidingWindow { tau: 1.0, max_len: Some(16) },
        )
        .unwrap();
        assert_eq!(c.segments().len(), 3);
        assert!(c.segments().iter().all(|s| s.domain.len() <= 16));
    }

    #[test]
    fn sliding_window_gaussian_tracks_a_noiseless_bump() {
        let domain = Domain::new(1, 60).unwrap();
        let truth = [4.0, 30.0, 7.0, 1.0];
        let values: Vec<f64> = domain
            .positions()
            .map(|t| crate::families::gaussian::evaluate(&truth, t as f64))
            .collect();
        let series = TimeSeries::new("T1", 1, values).unwrap();
        let tau = 1e-6;
        let c = compress(&series, "g", &SegmentationSpec::SlidingWindow { tau, max_len: None })
            .unwrap();
        // Every emitted segment honors the threshold (nonlinear fits on the
        // nearly-flat tail may force early cuts, but never bad ones)…
        assert!(c.segments().iter().all(|s| s.measures.fes <= tau));
        // …the series does not devolve into per-point segments…
        assert!(c.segments().len() <= 8, "too many segments: {}", c.segments().len());
        // …and the bump's core grows into one long warm-started segment that
        // recovers the center.
        let core = c
            .segments()
            .iter()
            .max_by_key(|s| s.domain.len())
            .expect("at least one segment");
        assert!(core.domain.contains(25) && core.domain.contains(45), "core: {}", core.domain);
        match &core.func.repr {
            FunctionRepr::GaussianParams(p) => {
                assert!((p[1] - 30.0).abs() < 0.1, "center drifted: {p:?}")
            }
            _ => panic!("expected gaussian params"),
        }
    }

    #[test]
    fn segmentation_spec_parsing() {
        assert_eq!(SegmentationSpec::parse("fixed:10").unwrap(), SegmentationSpec::FixedLength(10));
        assert_eq!(
            SegmentationSpec::parse("sliding:0.5").unwrap(),
            SegmentationSpec::SlidingWindow { tau: 0.5, max_len: None }
        );
        assert_eq!(
            SegmentationSpec::parse("sliding:0.5:200").unwrap(),
            SegmentationSpec::SlidingWindow { tau: 0.5, max_len: Some(200) }
        );
        assert!(SegmentationSpec::parse("fixed:0").is_err());
        assert!(SegmentationSpec::parse("sliding:-1").is_err());
        assert!(SegmentationSpec::parse("chunky:3").is_err());
    }
}
