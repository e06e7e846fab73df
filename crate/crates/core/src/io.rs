//! Sample serialization: CSV rows `z,cause,removed` with the scheme in a
//! JSON sidecar, or a single self-describing JSON document.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::{classify_and_summarize, Cause, GphcSample, Observation};
use crate::scheme::CensoringScheme;

/// On-disk JSON layout. Derived quantities are optional on input and always
/// recomputed on load.
#[derive(Debug, Serialize, Deserialize)]
struct SampleDocument {
    scheme: CensoringScheme,
    observations: Vec<ObservationRow>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    derived: Option<DerivedFields>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ObservationRow {
    z: f64,
    cause: u8,
    removed: u32,
}

#[derive(Debug, Serialize, Deserialize)]
struct DerivedFields {
    j: u32,
    d1: u32,
    d2: u32,
    w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    Csv,
    Json,
}

fn rebuild(scheme: &CensoringScheme, rows: &[ObservationRow]) -> Result<GphcSample> {
    let times: Vec<f64> = rows.iter().map(|r| r.z).collect();
    let causes: Vec<Cause> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            Cause::from_label(r.cause).ok_or_else(|| Error::Parse {
                line: i + 2,
                reason: format!("cause label must be 1 or 2, got {}", r.cause),
            })
        })
        .collect::<Result<_>>()?;
    classify_and_summarize(&times, &causes, scheme)
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".scheme.json");
    PathBuf::from(p)
}

/// Save a sample. CSV writes the rows plus a `<path>.scheme.json` sidecar;
/// JSON writes one document including the derived statistics.
pub fn save_sample(sample: &GphcSample, path: &Path, format: SampleFormat) -> Result<()> {
    let rows: Vec<ObservationRow> = sample
        .observations
        .iter()
        .map(|o| ObservationRow {
            z: o.z,
            cause: o.cause.label(),
            removed: o.removed,
        })
        .collect();
    match format {
        SampleFormat::Csv => {
            let mut w = csv::Writer::from_path(path).map_err(csv_io)?;
            w.write_record(["z", "cause", "removed"]).map_err(csv_io)?;
            for r in &rows {
                w.write_record(&[
                    format!("{:?}", r.z),
                    r.cause.to_string(),
                    r.removed.to_string(),
                ])
                .map_err(csv_io)?;
            }
            w.flush()?;
            fs::write(
                sidecar_path(path),
                serde_json::to_string_pretty(&sample.scheme)?,
            )?;
        }
        SampleFormat::Json => {
            let doc = SampleDocument {
                scheme: sample.scheme.clone(),
                observations: rows,
                derived: Some(DerivedFields {
                    j: sample.j,
                    d1: sample.d1,
                    d2: sample.d2,
                    w: sample.w,
                }),
            };
            fs::write(path, serde_json::to_string_pretty(&doc)?)?;
        }
    }
    Ok(())
}

/// Load a sample saved by [`save_sample`]. For CSV the scheme comes from the
/// sidecar unless one is passed explicitly.
pub fn load_sample(
    path: &Path,
    format: SampleFormat,
    scheme: Option<&CensoringScheme>,
) -> Result<GphcSample> {
    match format {
        SampleFormat::Csv => {
            let scheme = match scheme {
                Some(s) => s.clone(),
                None => serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?,
            };
            let rows = read_csv_rows(path)?;
            rebuild(&scheme, &rows)
        }
        SampleFormat::Json => {
            let doc: SampleDocument = serde_json::from_str(&fs::read_to_string(path)?)?;
            rebuild(&doc.scheme, &doc.observations)
        }
    }
}

/// Parse observation rows from in-memory CSV text (header `z,cause,removed`;
/// `removed` may be omitted, in which case the scheme plan applies).
pub fn parse_csv_observations(text: &str) -> Result<Vec<(f64, Cause)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            reason: e.to_string(),
        })?;
        let z: f64 = rec
            .get(0)
            .ok_or_else(|| Error::Parse {
                line,
                reason: "missing z".into(),
            })?
            .trim()
            .parse()
            .map_err(|e| Error::Parse {
                line,
                reason: format!("bad time: {e}"),
            })?;
        let cause_raw: u8 = rec
            .get(1)
            .ok_or_else(|| Error::Parse {
                line,
                reason: "missing cause".into(),
            })?
            .trim()
            .parse()
            .map_err(|e| Error::Parse {
                line,
                reason: format!("bad cause: {e}"),
            })?;
        let cause = Cause::from_label(cause_raw).ok_or_else(|| Error::Parse {
            line,
            reason: format!("cause label must be 1 or 2, got {cause_raw}"),
        })?;
        out.push((z, cause));
    }
    Ok(out)
}

fn read_csv_rows(path: &Path) -> Result<Vec<ObservationRow>> {
    let text = fs::read_to_string(path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            reason: e.to_string(),
        })?;
        let parse_f = |s: Option<&str>, what: &str| -> Result<f64> {
            s.ok_or_else(|| Error::Parse {
                line,
                reason: format!("missing {what}"),
            })?
            .trim()
            .parse()
            .map_err(|e| Error::Parse {
                line,
                reason: format!("bad {what}: {e}"),
            })
        };
        let z = parse_f(rec.get(0), "z")?;
        let cause = parse_f(rec.get(1), "cause")? as u8;
        let removed = match rec.get(2) {
            Some(s) if !s.trim().is_empty() => s.trim().parse().map_err(|e| Error::Parse {
                line,
                reason: format!("bad removed: {e}"),
            })?,
            _ => 0,
        };
        out.push(ObservationRow { z, cause, removed });
    }
    Ok(out)
}

/// Rebuild a sample from raw observation pairs under a scheme.
pub fn sample_from_pairs(pairs: &[(f64, Cause)], scheme: &CensoringScheme) -> Result<GphcSample> {
    let times: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let causes: Vec<Cause> = pairs.iter().map(|p| p.1).collect();
    classify_and_summarize(&times, &causes, scheme)
}

fn csv_io(e: csv::Error) -> Error {
    Error::Parse {
        line: 0,
        reason: e.to_string(),
    }
}

/// Exposes the observations of a sample as `(z, cause, removed)` tuples.
pub fn observation_tuples(sample: &GphcSample) -> Vec<(f64, u8, u32)> {
    sample
        .observations
        .iter()
        .map(|o: &Observation| (o.z, o.cause.label(), o.removed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::hoel_gphc_sample;
    use tempfile::tempdir;

    #[test]
    fn json_round_trip_is_identity() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("sample.json");
        let s = hoel_gphc_sample();
        save_sample(&s, &path, SampleFormat::Json).unwrap();
        let back = load_sample(&path, SampleFormat::Json, None).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn csv_round_trip_is_identity() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("sample.csv");
        let s = hoel_gphc_sample();
        save_sample(&s, &path, SampleFormat::Csv).unwrap();
        let back = load_sample(&path, SampleFormat::Csv, None).unwrap();
        assert_eq!(s, back);
        assert_eq!(back.w, 28962.0);
        assert_eq!((back.d1, back.d2), (7, 18));
    }

    #[test]
    fn malformed_cause_is_a_parse_error() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "z,cause,removed\n1.0,7,0\n").unwrap();
        let scheme = crate::data::hoel_gphc_scheme();
        let err = load_sample(&path, SampleFormat::Csv, Some(&scheme)).unwrap_err();
        assert!(matches!(
            err,
            Error::Parse { .. } | Error::LengthMismatch(_)
        ));
    }

    #[test]
    fn csv_text_parser_reads_bundled_data() {
        let mut text = String::from("z,cause,removed\n");
        for &(z, c) in crate::data::HOEL_GPHC_DATA.iter() {
            text.push_str(&format!("{z},{c},2\n"));
        }
        let pairs = parse_csv_observations(&text).unwrap();
        assert_eq!(pairs.len(), 25);
        let sample = sample_from_pairs(&pairs, &crate::data::hoel_gphc_scheme()).unwrap();
        assert_eq!(sample.j, 25);
    }
}
