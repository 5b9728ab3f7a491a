//! CSV dataset ingestion.
//!
//! Expected schema: a header row with `group` (0 = healthy,
//! 1 = diseased) and `value` columns, plus an optional `biomarker`
//! column for multi-marker studies. Rows with value below the LLOD
//! become censored counts.

use std::collections::BTreeMap;
use std::path::Path;

use youden_drm::{BiomarkerSample, Error, Result};

/// One biomarker's parsed sample; `name` is None for single-marker files.
#[derive(Debug, Clone)]
pub struct NamedSample {
    pub name: Option<String>,
    pub sample: BiomarkerSample,
}

#[derive(Default)]
struct RawGroup {
    healthy: Vec<f64>,
    diseased: Vec<f64>,
}

/// Parse a dataset file, splitting values below `llod` into censored
/// counts. Returns biomarkers in name order.
pub fn parse_dataset(path: &Path, llod: f64) -> Result<Vec<NamedSample>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Parse {
            line: 0,
            message: format!("cannot open {}: {e}", path.display()),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let group_col = col("group").ok_or_else(|| Error::Parse {
        line: 1,
        message: "missing required column `group`".to_string(),
    })?;
    let value_col = col("value").ok_or_else(|| Error::Parse {
        line: 1,
        message: "missing required column `value`".to_string(),
    })?;
    let marker_col = col("biomarker");
    let censored_col = col("censored");

    let mut raw: BTreeMap<Option<String>, RawGroup> = BTreeMap::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2; // header is line 1
        let record = record.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let field = |c: usize| {
            record.get(c).ok_or(Error::Parse {
                line,
                message: format!("missing field {c}"),
            })
        };
        let group = match field(group_col)? {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("group must be 0 (healthy) or 1 (diseased), got `{other}`"),
                })
            }
        };
        let value: f64 = field(value_col)?.parse().map_err(|_| Error::Parse {
            line,
            message: format!(
                "value `{}` is not a number",
                record.get(value_col).unwrap_or("")
            ),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse {
                line,
                message: format!("value {value} is not finite"),
            });
        }
        // A `censored` flag forces the row below the LLOD regardless of
        // the recorded value; it is how this tool's own output marks
        // censored units.
        let censored = match censored_col {
            Some(c) => field(c)? == "1",
            None => false,
        };
        if censored && llod == f64::NEG_INFINITY {
            return Err(Error::Parse {
                line,
                message: "row is marked censored but no LLOD was given".to_string(),
            });
        }
        let value = if censored { f64::NEG_INFINITY } else { value };
        let name = marker_col.map(|c| record.get(c).unwrap_or("").to_string());
        let entry = raw.entry(name).or_default();
        if group {
            entry.diseased.push(value);
        } else {
            entry.healthy.push(value);
        }
    }

    if raw.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no data rows".to_string(),
        });
    }
    let mut out = Vec::with_capacity(raw.len());
    for (name, group) in raw {
        let label = name.clone().unwrap_or_else(|| "value".to_string());
        if group.healthy.is_empty() {
            return Err(Error::EmptyGroup(format!("no healthy rows for `{label}`")));
        }
        if group.diseased.is_empty() {
            return Err(Error::EmptyGroup(format!("no diseased rows for `{label}`")));
        }
        let sample = BiomarkerSample::from_raw(&group.healthy, &group.diseased, llod)?;
        out.push(NamedSample { name, sample });
    }
    Ok(out)
}

/// Render samples back to the CSV schema. Detected values print in
/// shortest round-trip form, so parsing the output reproduces them
/// bit-exactly; censored units print as the `below` marker rows they
/// are (a value strictly under the LLOD is unknowable, so the LLOD
/// itself is used with `group` intact and a `censored` flag).
pub fn to_csv(samples: &[NamedSample]) -> String {
    let multi = samples.iter().any(|s| s.name.is_some());
    let mut out = String::new();
    if multi {
        out.push_str("biomarker,group,value,censored\n");
    } else {
        out.push_str("group,value,censored\n");
    }
    for s in samples {
        let prefix = |out: &mut String| {
            if multi {
                out.push_str(s.name.as_deref().unwrap_or(""));
                out.push(',');
            }
        };
        for (vals, group) in [
            (s.sample.healthy_detected(), 0),
            (s.sample.diseased_detected(), 1),
        ] {
            for v in vals {
                prefix(&mut out);
                out.push_str(&format!("{group},{v},0\n"));
            }
        }
        for (count, group) in [
            (s.sample.healthy_below(), 0),
            (s.sample.diseased_below(), 1),
        ] {
            for _ in 0..count {
                prefix(&mut out);
                out.push_str(&format!("{group},{},1\n", s.sample.llod()));
            }
        }
    }
    out
}
