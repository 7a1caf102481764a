//! Segment-compressed time series with deterministic error guarantees.
//!
//! `segbound` stores a time series as a sequence of segments, each carrying a
//! fitted estimation function (orthonormal-basis polynomial or 4-parameter
//! Gaussian) together with three per-segment error measures. Analytical
//! queries — sums, products, shifts, means, standard deviations, and
//! (cross/auto) correlations — are evaluated directly on the compressed form,
//! and every answer comes back as a value plus a *guarantee*: a hard bound on
//! the distance to the exact answer that holds with certainty, not merely
//! with high probability.
//!
//! # Modules
//!
//! - [`core`]: domains, raw series, error measures, approximate scalars.
//! - [`families`]: estimation-function families, orthonormal bases, fitting,
//!   and basis transforms between nested domains.
//! - [`compress`]: fixed-length and error-bounded sliding-window segmentation.
//! - [`store`]: CSV ingestion and a line-delimited JSON segment catalog.
//! - [`engine`]: expression parsing and exact/approximate evaluation with
//!   guarantee propagation.
//! - [`sampling`]: a uniform-sampling baseline with Hoeffding-style sample
//!   sizes, for comparing storage against sampling at equal target error.
//!
//! # Quick start
//!
//! ```
//! use segbound::compress::{compress, SegmentationSpec};
//! use segbound::core::TimeSeries;
//! use segbound::engine::{eval_approx, eval_exact, parse};
//! use segbound::store::Catalog;
//!
//! // A short, noisy ramp.
//! let values: Vec<f64> = (0..60).map(|i| 0.5 * i as f64 + ((i * 7) % 5) as f64 * 0.01).collect();
//! let series = TimeSeries::new("T1", 1, values).unwrap();
//!
//! let mut catalog = Catalog::new();
//! catalog.insert_raw(series.clone());
//! catalog.insert_compressed(compress(&series, "p1", &SegmentationSpec::FixedLength(10)).unwrap());
//!
//! let query = parse("Sum(T1)").unwrap();
//! let exact = eval_exact(&query, &catalog).unwrap();
//! let answer = eval_approx(&query, &catalog).unwrap();
//! // The guarantee is exact in real arithmetic; comparisons computed in f64
//! // deserve a tiny rounding allowance.
//! assert!((exact - answer.value).abs() <= answer.guarantee + 1e-12 * (1.0 + answer.guarantee));
//! ```

pub mod compress;
pub mod core;
pub mod engine;
pub mod error;
pub mod families;
pub mod sampling;
pub mod store;

pub use crate::core::{ApproxScalar, Domain, ErrorMeasures, TimeSeries};
pub use crate::error::{Error, Result};
