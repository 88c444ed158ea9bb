//! Right-censored survival records and CSV ingestion.
//!
//! One record is a follow-up time, an event indicator (1 = observed failure,
//! 0 = censored), and a scalar covariate. Files are plain UTF-8 CSV with the
//! exact header `time,event,z`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// A single right-censored observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    time: f64,
    event: bool,
    covariate: f64,
}

impl Observation {
    /// Validates finiteness and nonnegativity of the follow-up time.
    pub fn new(time: f64, event: bool, covariate: f64) -> Result<Self> {
        if !time.is_finite() {
            return Err(Error::InvalidData(format!("non-finite time {time}")));
        }
        if time < 0.0 {
            return Err(Error::InvalidData(format!("negative time {time}")));
        }
        if !covariate.is_finite() {
            return Err(Error::InvalidData(format!(
                "non-finite covariate {covariate}"
            )));
        }
        Ok(Self {
            time,
            event,
            covariate,
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn event(&self) -> bool {
        self.event
    }

    pub fn covariate(&self) -> f64 {
        self.covariate
    }
}

/// An immutable collection of observations.
///
/// `sorted` tracks whether times are nondecreasing with events ordered before
/// censorings at tied times, the order every fitting routine works in. The
/// tie rule keeps a subject censored at `t` inside the risk set of an event
/// at `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    observations: Vec<Observation>,
    sorted: bool,
}

impl Dataset {
    /// Builds a dataset from a nonempty list of observations, detecting
    /// whether the input already satisfies the sort order.
    pub fn new(observations: Vec<Observation>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::InvalidData("empty dataset".into()));
        }
        let sorted = is_time_sorted(&observations);
        Ok(Self {
            observations,
            sorted,
        })
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn is_sorted_by_time(&self) -> bool {
        self.sorted
    }

    /// Number of uncensored observations. This is the effective sample size
    /// the censoring tuner targets.
    pub fn event_count(&self) -> usize {
        self.observations.iter().filter(|o| o.event).count()
    }

    /// Stable sort by ascending time, events before censorings at ties.
    /// The row multiset is preserved and the operation is idempotent.
    pub fn sort_by_time(&self) -> Dataset {
        let mut observations = self.observations.clone();
        observations.sort_by(|a, b| {
            a.time
                .total_cmp(&b.time)
                .then_with(|| b.event.cmp(&a.event))
        });
        Dataset {
            observations,
            sorted: true,
        }
    }

    /// Reads a dataset from CSV. The header must be exactly `time,event,z`;
    /// each record is three decimal fields (plain or scientific notation)
    /// with `event` in {0, 1}. Line numbers in errors are 1-based and count
    /// the header.
    pub fn load_csv<P: AsRef<Path>>(path: P) -> Result<Dataset> {
        let text = fs::read_to_string(path)?;
        let mut observations = Vec::new();
        let mut lines = text.lines().enumerate();

        match lines.next() {
            Some((_, header)) if header.trim_end() == "time,event,z" => {}
            Some((_, header)) => {
                return Err(Error::Csv {
                    line: 1,
                    reason: format!("expected header 'time,event,z', found '{}'", header.trim_end()),
                })
            }
            None => {
                return Err(Error::Csv {
                    line: 1,
                    reason: "empty file".into(),
                })
            }
        }

        for (idx, raw) in lines {
            let line = idx + 1; // enumerate is 0-based
            let row = raw.trim_end();
            if row.is_empty() {
                continue;
            }
            let fields: Vec<&str> = row.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Csv {
                    line,
                    reason: format!("expected 3 fields, found {}", fields.len()),
                });
            }
            let time = parse_field(fields[0], "time", line)?;
            let event_raw = parse_field(fields[1], "event", line)?;
            let covariate = parse_field(fields[2], "z", line)?;

            let event = if event_raw == 0.0 {
                false
            } else if event_raw == 1.0 {
                true
            } else {
                return Err(Error::Csv {
                    line,
                    reason: "non-binary event flag".into(),
                });
            };
            if !time.is_finite() {
                return Err(Error::Csv {
                    line,
                    reason: "non-finite time".into(),
                });
            }
            if time < 0.0 {
                return Err(Error::Csv {
                    line,
                    reason: "negative time".into(),
                });
            }
            if !covariate.is_finite() {
                return Err(Error::Csv {
                    line,
                    reason: "non-finite covariate".into(),
                });
            }
            observations.push(Observation {
                time,
                event,
                covariate,
            });
        }

        Dataset::new(observations)
    }

    /// Writes the dataset in the `load_csv` format. Numbers are emitted in
    /// scientific notation at 17 significant digits, so a load of the written
    /// file reproduces every value exactly.
    pub fn save_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut out = String::with_capacity(self.len() * 48 + 16);
        out.push_str("time,event,z\n");
        for o in &self.observations {
            let _ = writeln!(
                out,
                "{:.16e},{},{:.16e}",
                o.time,
                u8::from(o.event),
                o.covariate
            );
        }
        fs::write(path, out)?;
        Ok(())
    }
}

fn is_time_sorted(obs: &[Observation]) -> bool {
    obs.windows(2).all(|w| {
        w[0].time < w[1].time || (w[0].time == w[1].time && (w[0].event || !w[1].event))
    })
}

fn parse_field(tok: &str, name: &str, line: usize) -> Result<f64> {
    tok.trim().parse::<f64>().map_err(|_| Error::Csv {
        line,
        reason: format!("malformed row: unparseable {name} '{tok}'"),
    })
}
