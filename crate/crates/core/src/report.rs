//! Run reports and their on-disk form.
//!
//! A run directory holds one `snap_<step>.csv` per snapshot, with header
//! `x,a,rho,u,p,S`, and a `report.json` mirroring [`RunReport`].

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostics::Violation;
use crate::eos::GasModel;
use crate::scheme::{RunState, SchemeConfig};
use crate::states::StateError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopAt {
    Steps(usize),
    Time(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub case: Option<String>,
    pub seed: Option<u64>,
    pub model: GasModel,
    pub scheme: SchemeConfig,
    pub stop: StopAt,
}

/// Cell-wise fields at one time level. Vacuum cells carry `u = p = 0` and `S = NaN`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub file: String,
    #[serde(skip)]
    pub x: Vec<f64>,
    #[serde(skip)]
    pub a: Vec<f64>,
    #[serde(skip)]
    pub rho: Vec<f64>,
    #[serde(skip)]
    pub u: Vec<f64>,
    #[serde(skip)]
    pub p: Vec<f64>,
    #[serde(skip)]
    pub s: Vec<f64>,
}

impl Snapshot {
    pub fn capture(model: &GasModel, x: &[f64], state: &RunState) -> Result<Self, StateError> {
        let n = state.cells.len();
        let mut snap = Snapshot {
            step: state.step,
            t: state.t,
            file: format!("snap_{}.csv", state.step),
            x: x.to_vec(),
            a: Vec::with_capacity(n),
            rho: Vec::with_capacity(n),
            u: Vec::with_capacity(n),
            p: Vec::with_capacity(n),
            s: Vec::with_capacity(n),
        };
        for c in &state.cells {
            snap.a.push(c.a);
            if c.is_vacuum() {
                snap.rho.push(0.0);
                snap.u.push(0.0);
                snap.p.push(0.0);
                snap.s.push(f64::NAN);
            } else {
                let prim = c.to_primitive(model)?;
                snap.rho.push(prim.rho);
                snap.u.push(prim.u);
                snap.p.push(prim.p);
                snap.s.push(prim.entropy(model)?);
            }
        }
        Ok(snap)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,a,rho,u,p,S\n");
        for j in 0..self.x.len() {
            let _ = writeln!(
                out,
                "{:e},{:e},{:e},{:e},{:e},{:e}",
                self.x[j], self.a[j], self.rho[j], self.u[j], self.p[j], self.s[j]
            );
        }
        out
    }
}

/// Per-step diagnostics, index 0 being the initial state.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub step: Vec<usize>,
    pub t: Vec<f64>,
    pub min_rho: Vec<f64>,
    pub min_s: Vec<f64>,
    pub max_entropy_residual: Vec<Option<f64>>,
    pub max_deviation: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ConfigEcho,
    pub snapshots: Vec<Snapshot>,
    pub series: TimeSeries,
    pub violations: Vec<Violation>,
    /// Steps at which resonant reconstructions were projected, with their counts.
    pub resonance_events: Vec<(usize, usize)>,
    pub error: Option<String>,
}

impl RunReport {
    pub fn final_snapshot(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }

    /// Largest `max_deviation` over the run, if a reference was tracked.
    pub fn max_deviation(&self) -> Option<f64> {
        self.series.max_deviation.iter().flatten().cloned().reduce(f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// Writes `report.json` and every snapshot CSV into `dir`.
    pub fn write_dir(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        for snap in &self.snapshots {
            fs::write(dir.join(&snap.file), snap.to_csv())?;
        }
        fs::write(dir.join("report.json"), self.to_json())
    }
}

/// Reads a snapshot CSV back into columns, checking the header.
pub fn read_snapshot_csv(text: &str) -> Result<Vec<[f64; 6]>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some("x,a,rho,u,p,S") => {}
        other => return Err(format!("unexpected header {other:?}")),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let cols: Vec<f64> = line
                .split(',')
                .map(|f| f.parse::<f64>().map_err(|e| format!("line {}: {e}", i + 2)))
                .collect::<Result<_, _>>()?;
            cols.try_into().map_err(|_| format!("line {}: expected 6 columns", i + 2))
        })
        .collect()
}
