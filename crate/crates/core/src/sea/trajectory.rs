//! Event logs of simulated runs, their CSV form and replay.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::state::TruncState;
use crate::error::{Error, Result};

/// Starting configuration of a logged run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Initial {
    /// Walkers `1..=n` with these values (finite system).
    Finite { values: Vec<i64> },
    /// A truncated state.
    Truncated { state: TruncState },
}

/// One jump: the walker at `index` moved up to `new_value`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub index: i64,
    pub new_value: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub initial: Initial,
    pub t: f64,
    pub horizon: f64,
    pub events: Vec<Event>,
}

/// Configuration reconstructed from a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub enum Replayed {
    Finite(Vec<i64>),
    Truncated(TruncState),
}

#[derive(Serialize, Deserialize)]
struct Header {
    initial: Initial,
    t: f64,
    horizon: f64,
}

impl Trajectory {
    /// State after all events with `time <= at`. Every event is re-applied
    /// through the jump rule, so an inconsistent log is rejected.
    pub fn state_at(&self, at: f64) -> Result<Replayed> {
        let upto = self.events.partition_point(|e| e.time <= at);
        let bad = |e: &Event| Error::Parse(format!("event {e:?} is not a block-top jump"));
        match &self.initial {
            Initial::Finite { values } => {
                let mut v = values.clone();
                for e in &self.events[..upto] {
                    let k = usize::try_from(e.index - 1).map_err(|_| bad(e))?;
                    if k >= v.len() || e.new_value != v[k] + 1 || (k > 0 && v[k - 1] == v[k]) {
                        return Err(bad(e));
                    }
                    v[k] += 1;
                }
                Ok(Replayed::Finite(v))
            }
            Initial::Truncated { state } => {
                let mut s = state.clone();
                for e in &self.events[..upto] {
                    if s.ring(e.index) != Some((e.index, e.new_value)) {
                        return Err(bad(e));
                    }
                }
                Ok(Replayed::Truncated(s))
            }
        }
    }

    /// Writes a JSON header line followed by `time,index,new_value` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header = Header { initial: self.initial.clone(), t: self.t, horizon: self.horizon };
        writeln!(w, "# {}", serde_json::to_string(&header)?)?;
        writeln!(w, "time,index,new_value")?;
        for e in &self.events {
            writeln!(w, "{:?},{},{}", e.time, e.index, e.new_value)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Trajectory> {
        let mut lines = r.lines();
        let first = lines.next().ok_or_else(|| Error::Parse("empty trajectory file".into()))??;
        let json = first
            .strip_prefix("# ")
            .ok_or_else(|| Error::Parse("missing JSON header line".into()))?;
        let header: Header = serde_json::from_str(json)?;
        match lines.next() {
            Some(Ok(l)) if l.trim() == "time,index,new_value" => {}
            _ => return Err(Error::Parse("missing column header".into())),
        }
        let mut events = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            let parse_err = || Error::Parse(format!("bad row {line:?}"));
            if f.len() != 3 {
                return Err(parse_err());
            }
            events.push(Event {
                time: f[0].trim().parse().map_err(|_| parse_err())?,
                index: f[1].trim().parse().map_err(|_| parse_err())?,
                new_value: f[2].trim().parse().map_err(|_| parse_err())?,
            });
        }
        let traj = Trajectory { initial: header.initial, t: header.t, horizon: header.horizon, events };
        traj.check_times()?;
        Ok(traj)
    }

    /// Event times are strictly increasing and within the horizon.
    pub fn check_times(&self) -> Result<()> {
        let mut prev = 0.0;
        for e in &self.events {
            if !(e.time > prev) || e.time > self.horizon {
                return Err(Error::Parse(format!("event time {} out of order", e.time)));
            }
            prev = e.time;
        }
        Ok(())
    }
}
