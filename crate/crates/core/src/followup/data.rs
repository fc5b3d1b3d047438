//! Censored survival data read from `time,event` CSV files.

use std::io::Read;
use std::path::{Path, PathBuf};

use crate::distmodel::Observation;
use crate::error::{Error, Result};

/// A censored sample. `event = 1` marks an observed (uncensored) time.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<Observation>,
    pub source: Option<PathBuf>,
}

impl Dataset {
    pub fn new(records: Vec<Observation>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Input { row: 1, message: "dataset has no records".into() });
        }
        for (i, o) in records.iter().enumerate() {
            if !(o.time > 0.0 && o.time.is_finite()) {
                return Err(Error::Input { row: i + 2, message: format!("time must be positive, got {}", o.time) });
            }
        }
        Ok(Self { records, source: None })
    }

    /// Parses CSV with a header naming the columns `time` and `event`.
    /// Rows are numbered from 1 at the header.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let column = |name: &str| {
            headers.iter().position(|h| h.eq_ignore_ascii_case(name)).ok_or_else(|| Error::Input {
                row: 1,
                message: format!("missing column '{name}' (header must name 'time' and 'event')"),
            })
        };
        let (time_col, event_col) = (column("time")?, column("event")?);
        let mut records = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 2;
            let rec = rec.map_err(|e| Error::Input { row, message: e.to_string() })?;
            let field = |c: usize| rec.get(c).unwrap_or("");
            let raw_time = field(time_col);
            let time: f64 = raw_time
                .parse()
                .map_err(|_| Error::Input { row, message: format!("time '{raw_time}' is not a number") })?;
            if !(time > 0.0 && time.is_finite()) {
                return Err(Error::Input { row, message: format!("time must be positive, got {raw_time}") });
            }
            let uncensored = match field(event_col) {
                "1" => true,
                "0" => false,
                other => {
                    return Err(Error::Input {
                        row,
                        message: format!("event must be 1 (observed) or 0 (censored), got '{other}'"),
                    })
                }
            };
            records.push(Observation { time, uncensored });
        }
        if records.is_empty() {
            return Err(Error::Input { row: 2, message: "file has a header but no data rows".into() });
        }
        Ok(Self { records, source: None })
    }
}

/// Reads a `time,event` CSV file.
pub fn ingest_csv(path: &Path) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    let mut data = Dataset::from_reader(std::io::BufReader::new(file))?;
    data.source = Some(path.to_path_buf());
    Ok(data)
}
