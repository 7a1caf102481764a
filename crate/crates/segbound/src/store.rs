//! Ingestion and persistence.
//!
//! A [`Catalog`] holds raw series and their compressed representations. On
//! disk a catalog is a directory with two files:
//!
//! - `raw.csv` — header `series_id,t,value`, one row per point, positions
//!   strictly consecutive within each series;
//! - `segments.jsonl` — line-delimited JSON: a meta line
//!   `{"format_version":1}` followed by one record per segment.
//!
//! Floats are serialized in shortest round-trip form, so a save/load cycle
//! reproduces every stored number bit-for-bit.

use crate::compress::{CompressedSeries, SegmentRep};
use crate::core::{Domain, TimeSeries};
use crate::error::{Error, Result};
use crate::families::{family_by_id, FittedFunction, FunctionRepr};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

/// Supported on-disk format version.
const FORMAT_VERSION: u32 = 1;

/// In-memory collection of raw and compressed series, keyed by series id.
#[derive(Debug, Default)]
pub struct Catalog {
    raw: BTreeMap<String, TimeSeries>,
    compressed: BTreeMap<String, CompressedSeries>,
}

#[derive(Serialize, Deserialize)]
struct MetaLine {
    format_version: u32,
}

#[derive(Serialize, Deserialize)]
struct SegmentRecord {
    series_id: String,
    a: i64,
    b: i64,
    family_id: String,
    dim: usize,
    coeffs_or_params: Vec<f64>,
    fes: f64,
    ses: f64,
    tes: f64,
}

impl Catalog {
    /// An empty catalog.
    pub fn new() -> Self {
        Catalog::default()
    }

    /// Adds (or replaces) a raw series.
    pub fn insert_raw(&mut self, series: TimeSeries) {
        self.raw.insert(series.id.clone(), series);
    }

    /// Adds (or replaces) a compressed series.
    pub fn insert_compressed(&mut self, compressed: CompressedSeries) {
        self.compressed.insert(compressed.series_id.clone(), compressed);
    }

    /// Raw series by id.
    pub fn raw(&self, id: &str) -> Option<&TimeSeries> {
        self.raw.get(id)
    }

    /// Compressed series by id.
    pub fn compressed(&self, id: &str) -> Option<&CompressedSeries> {
        self.compressed.get(id)
    }

    /// Ids of all raw series, sorted.
    pub fn raw_ids(&self) -> Vec<&str> {
        self.raw.keys().map(String::as_str).collect()
    }

    /// Ids of all compressed series, sorted.
    pub fn compressed_ids(&self) -> Vec<&str> {
        self.compressed.keys().map(String::as_str).collect()
    }

    /// Reads `series_id,t,value` rows, groups them into series, and inserts
    /// them as raw series. Within a series, positions must be strictly
    /// consecutive (this catches gaps, duplicates, and reordering).
    ///
    /// Returns the ids ingested, in first-seen order.
    pub fn ingest_csv<R: Read>(&mut self, reader: R) -> Result<Vec<String>> {
        let mut csv_reader = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        {
            let headers = csv_reader.headers().map_err(|e| Error::Ingest(e.to_string()))?;
            let expected = ["series_id", "t", "value"];
            let got: Vec<&str> = headers.iter().collect();
            if got != expected {
                return Err(Error::Ingest(format!(
                    "expected header series_id,t,value, got {}",
                    got.join(",")
                )));
            }
        }
        let mut order: Vec<String> = Vec::new();
        let mut building: BTreeMap<String, (i64, Vec<f64>)> = BTreeMap::new();
        for (line, record) in csv_reader.records().enumerate() {
            let record = record.map_err(|e| Error::Ingest(e.to_string()))?;
            let row = line + 2; // 1-based, after the header
            if record.len() != 3 {
                return Err(Error::Ingest(format!("row {row}: expected 3 fields")));
            }
            let id = record[0].to_string();
            let t: i64 = record[1]
                .parse()
                .map_err(|_| Error::Ingest(format!("row {row}: bad position '{}'", &record[1])))?;
            let value: f64 = record[2]
                .parse()
                .map_err(|_| Error::Ingest(format!("row {row}: bad value '{}'", &record[2])))?;
            if !value.is_finite() {
                return Err(Error::Ingest(format!("row {row}: non-finite value")));
            }
            match building.get_mut(&id) {
                None => {
                    order.push(id.clone());
                    building.insert(id, (t, vec![value]));
                }
                Some((start, values)) => {
                    let expected_t = *start + values.len() as i64;
                    if t != expected_t {
                        return Err(Error::Ingest(format!(
                            "row {row}: series {id} expected position {expected_t}, got {t}"
                        )));
                    }
                    values.push(value);
                }
            }
        }
        for id in &order {
            let (start, values) = building.remove(id).expect("built above");
            self.insert_raw(TimeSeries::new(id.clone(), start, values)?);
        }
        Ok(order)
    }

    /// Writes the catalog to a directory (`raw.csv` + `segments.jsonl`),
    /// creating it if needed.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut raw_file = BufWriter::new(File::create(dir.join("raw.csv"))?);
        writeln!(raw_file, "series_id,t,value")?;
        for series in self.raw.values() {
            for (t, v) in series.domain.positions().zip(&series.values) {
                writeln!(raw_file, "{},{},{}", series.id, t, v)?;
            }
        }
        raw_file.flush()?;

        let mut seg_file = BufWriter::new(File::create(dir.join("segments.jsonl"))?);
        let meta = serde_json::to_string(&MetaLine { format_version: FORMAT_VERSION })
            .expect("meta serializes");
        writeln!(seg_file, "{meta}")?;
        for compressed in self.compressed.values() {
            for seg in compressed.segments() {
                let coeffs_or_params = match &seg.func.repr {
                    FunctionRepr::Coefficients(c) => c.clone(),
                    FunctionRepr::GaussianParams(p) => p.to_vec(),
                };
                let record = SegmentRecord {
                    series_id: compressed.series_id.clone(),
                    a: seg.domain.a,
                    b: seg.domain.b,
                    family_id: compressed.family.id.to_string(),
                    dim: coeffs_or_params.len(),
                    coeffs_or_params,
                    fes: seg.measures.fes,
                    ses: seg.measures.ses,
                    tes: seg.measures.tes,
                };
                let line = serde_json::to_string(&record)
                    .map_err(|e| Error::Store(format!("serialize segment: {e}")))?;
                writeln!(seg_file, "{line}")?;
            }
        }
        seg_file.flush()?;
        Ok(())
    }

    /// Loads a catalog from a directory written by [`Catalog::save`].
    pub fn load(dir: &Path) -> Result<Catalog> {
        let mut catalog = Catalog::new();
        let raw_path = dir.join("raw.csv");
        if raw_path.exists() {
            catalog.ingest_csv(File::open(&raw_path)?)?;
        }
        let seg_path = dir.join("segments.jsonl");
        if seg_path.exists() {
            catalog.load_segments(BufReader::new(File::open(&seg_path)?))?;
        }
        if !raw_path.exists() && !seg_path.exists() {
            return Err(Error::Store(format!("no catalog at {}", dir.display())));
        }
        Ok(catalog)
    }

    fn load_segments<R: BufRead>(&mut self, reader: R) -> Result<()> {
        let mut lines = reader.lines();
        let meta_line = lines
            .next()
            .ok_or_else(|| Error::Store("segments.jsonl is empty".into()))??;
        let meta: MetaLine = serde_json::from_str(&meta_line)
            .map_err(|e| Error::Store(format!("bad meta line: {e}")))?;
        if meta.format_version != FORMAT_VERSION {
            return Err(Error::Store(format!(
                "unsupported format_version {} (supported: {FORMAT_VERSION})",
                meta.format_version
            )));
        }
        let mut per_series: BTreeMap<String, Vec<SegmentRecord>> = BTreeMap::new();
        let mut seen: Vec<String> = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: SegmentRecord = serde_json::from_str(&line)
                .map_err(|e| Error::Store(format!("segment line {}: {e}", i + 2)))?;
            if !per_series.contains_key(&record.series_id) {
                seen.push(record.series_id.clone());
            }
            per_series.entry(record.series_id.clone()).or_default().push(record);
        }
        for id in seen {
            let records = per_series.remove(&id).expect("grouped above");
            let family = family_by_id(&records[0].family_id)?;
            let mut segments = Vec::with_capacity(records.len());
            for r in records {
                if r.family_id != family.id {
                    return Err(Error::Store(format!(
                        "series {id} mixes families {} and {}",
                        family.id, r.family_id
                    )));
                }
                if r.dim != r.coeffs_or_params.len() {
                    return Err(Error::Store(format!(
                        "series {id} segment [{}, {}]: dim {} does not match {} stored numbers",
                        r.a,
                        r.b,
                        r.dim,
                        r.coeffs_or_params.len()
                    )));
                }
                let domain = Domain::new(r.a, r.b)
                    .map_err(|e| Error::Store(format!("series {id}: {e}")))?;
                let repr = if family.is_polynomial() {
                    FunctionRepr::Coefficients(r.coeffs_or_params)
                } else {
                    let p: [f64; 4] = r.coeffs_or_params.as_slice().try_into().map_err(|_| {
                        Error::Store(format!(
                            "series {id}: family g expects 4 parameters, got {}",
                            r.dim
                        ))
                    })?;
                    FunctionRepr::GaussianParams(p)
                };
                let func = FittedFunction::new(family, domain, repr)
                    .map_err(|e| Error::Store(e.to_string()))?;
                let measures = crate::core::ErrorMeasures::new(r.fes, r.ses, r.tes)
                    .map_err(|e| Error::Store(e.to_string()))?;
                segments.push(SegmentRep { domain, func, measures });
            }
            let compressed = CompressedSeries::new(id, family, segments)
                .map_err(|e| Error::Store(e.to_string()))?;
            self.insert_compressed(compressed);
        }
        Ok(())
    }
}
