use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Control,
    Experimental,
}

impl Arm {
    pub fn from_indicator(x: u8) -> Option<Arm> {
        match x {
            0 => Some(Arm::Control),
            1 => Some(Arm::Experimental),
            _ => None,
        }
    }

    /// X_j: 1 for the experimental arm.
    pub fn indicator(self) -> f64 {
        match self {
            Arm::Control => 0.0,
            Arm::Experimental => 1.0,
        }
    }

    pub fn other(self) -> Arm {
        match self {
            Arm::Control => Arm::Experimental,
            Arm::Experimental => Arm::Control,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatientRecord {
    pub arm: Arm,
    /// Calendar time of randomization.
    pub entry_time: f64,
    /// Time from entry to the event (or to censoring when `observed` is false).
    pub event_time: f64,
    pub observed: bool,
}

impl PatientRecord {
    /// Calendar time at which the event or censoring happens.
    pub fn calendar_time(&self) -> f64 {
        self.entry_time + self.event_time
    }

    fn check(&self) -> std::result::Result<(), String> {
        if !(self.entry_time >= 0.0 && self.entry_time.is_finite()) {
            return Err(format!(
                "entry_time {} must be finite and nonnegative",
                self.entry_time
            ));
        }
        if !(self.event_time > 0.0 && self.event_time.is_finite()) {
            return Err(format!(
                "time {} must be finite and positive",
                self.event_time
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialData {
    patients: Vec<PatientRecord>,
    rand_ratio: f64,
}

impl TrialData {
    pub fn new(patients: Vec<PatientRecord>, rand_ratio: f64) -> Result<Self> {
        if !(rand_ratio > 0.0 && rand_ratio.is_finite()) {
            return Err(Error::invalid(
                "r",
                format!("{rand_ratio} must be positive"),
            ));
        }
        for (i, p) in patients.iter().enumerate() {
            p.check()
                .map_err(|reason| Error::invalid("patients", format!("patient {i}: {reason}")))?;
        }
        Ok(TrialData {
            patients,
            rand_ratio,
        })
    }

    pub(crate) fn from_trusted(patients: Vec<PatientRecord>, rand_ratio: f64) -> Self {
        TrialData {
            patients,
            rand_ratio,
        }
    }

    pub fn patients(&self) -> &[PatientRecord] {
        &self.patients
    }

    pub fn rand_ratio(&self) -> f64 {
        self.rand_ratio
    }

    /// Same trial with arm labels exchanged (and the allocation ratio inverted).
    pub fn swap_arms(&self) -> TrialData {
        TrialData {
            patients: self
                .patients
                .iter()
                .map(|p| PatientRecord {
                    arm: p.arm.other(),
                    ..*p
                })
                .collect(),
            rand_ratio: 1.0 / self.rand_ratio,
        }
    }

    /// Rejects tied calendar times among observed events.
    pub fn check_no_ties(&self) -> Result<()> {
        let mut times: Vec<f64> = self
            .patients
            .iter()
            .filter(|p| p.observed)
            .map(PatientRecord::calendar_time)
            .collect();
        times.sort_by(f64::total_cmp);
        match times.windows(2).find(|w| w[0] == w[1]) {
            Some(w) => Err(Error::TiedEventTimes { time: w[0] }),
            None => Ok(()),
        }
    }

    /// Parses delimited patient-level data with header
    /// `arm,entry_time,time,event` (columns in any order).
    pub fn read_csv<R: Read>(reader: R, rand_ratio: f64) -> Result<TrialData> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Ingest {
                line: 1,
                reason: e.to_string(),
            })?
            .clone();
        let column = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Ingest {
                    line: 1,
                    reason: format!("missing column `{name}`"),
                })
        };
        let (arm_col, entry_col, time_col, event_col) = (
            column("arm")?,
            column("entry_time")?,
            column("time")?,
            column("event")?,
        );

        let mut patients = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| Error::Ingest {
                line: e.position().map_or(0, |p| p.line()),
                reason: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let bad = |reason: String| Error::Ingest { line, reason };
            let field = |i: usize| record.get(i).unwrap_or("");
            let flag = |name: &str, i: usize| -> Result<u8> {
                match field(i) {
                    "0" => Ok(0),
                    "1" => Ok(1),
                    other => Err(bad(format!("{name} must be 0 or 1, got `{other}`"))),
                }
            };
            let real = |name: &str, i: usize| -> Result<f64> {
                field(i)
                    .parse::<f64>()
                    .map_err(|_| bad(format!("{name} is not a number: `{}`", field(i))))
            };
            let p = PatientRecord {
                arm: Arm::from_indicator(flag("arm", arm_col)?).expect("0 or 1"),
                entry_time: real("entry_time", entry_col)?,
                event_time: real("time", time_col)?,
                observed: flag("event", event_col)? == 1,
            };
            p.check().map_err(bad)?;
            patients.push(p);
        }
        let data = TrialData::new(patients, rand_ratio)?;
        data.check_no_ties()?;
        Ok(data)
    }

    pub fn read_csv_path(path: &Path, rand_ratio: f64) -> Result<TrialData> {
        let file =
            std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        TrialData::read_csv(file, rand_ratio)
    }
}
