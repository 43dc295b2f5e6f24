use serde::Serialize;

use super::ExperimentConfig;
use crate::boundary::BoundaryStatus;
use crate::em::{DataMatrix, EmResult};
use crate::error::{Error, Result};

/// One trial. EM fields are empty in boundary-fraction mode and the
/// membership fields are empty in the EM modes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub index: usize,
    pub seed: u64,
    pub flagged: bool,
    pub best_loglik: Option<f64>,
    pub best_restart: Option<usize>,
    pub pt_r: Option<f64>,
    pub r_pt: Option<f64>,
    pub rank_p: Option<usize>,
    pub iterations: Option<usize>,
    pub zero_cells: Option<usize>,
    pub geometric: Option<BoundaryStatus>,
    pub member: Option<bool>,
    pub status: Option<BoundaryStatus>,
}

impl TrialRecord {
    pub(super) fn from_fit(
        index: usize,
        seed: u64,
        u: &DataMatrix,
        fit: &EmResult,
        best_restart: usize,
        flagged: bool,
        geometric: Option<BoundaryStatus>,
    ) -> Self {
        TrialRecord {
            index,
            seed,
            flagged,
            best_loglik: Some(fit.loglik),
            best_restart: Some(best_restart),
            pt_r: Some(fit.critical.pt_r),
            r_pt: Some(fit.critical.r_pt),
            rank_p: Some(fit.critical.rank_p),
            iterations: Some(fit.iterations),
            zero_cells: Some(u.counts().data().iter().filter(|&&x| x == 0.0).count()),
            geometric,
            member: None,
            status: None,
        }
    }

    pub(super) fn from_boundary(index: usize, seed: u64, member: bool, status: BoundaryStatus) -> Self {
        TrialRecord {
            index,
            seed,
            flagged: status == BoundaryStatus::Boundary,
            best_loglik: None,
            best_restart: None,
            pt_r: None,
            r_pt: None,
            rank_p: None,
            iterations: None,
            zero_cells: None,
            geometric: None,
            member: Some(member),
            status: Some(status),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub schema: &'static str,
    pub config: ExperimentConfig,
    pub records: Vec<TrialRecord>,
    pub flagged: usize,
    /// `flagged / num_matrices`.
    pub fraction: f64,
    /// Flagged estimates that the geometric classifier calls interior.
    pub geometric_exceptions: usize,
    /// Whether every sampled matrix passed membership (boundary mode only).
    pub all_members: Option<bool>,
    /// Wall-clock time; the only field that varies between identical runs.
    pub runtime_secs: f64,
}

pub const CSV_HEADER: [&str; 13] = [
    "index",
    "seed",
    "flagged",
    "best_loglik",
    "best_restart",
    "pt_r",
    "r_pt",
    "rank_p",
    "iterations",
    "zero_cells",
    "geometric",
    "member",
    "status",
];

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn status_name(s: &Option<BoundaryStatus>) -> String {
    s.map(|s| match s {
        BoundaryStatus::Interior => "interior",
        BoundaryStatus::Boundary => "boundary",
        BoundaryStatus::OutsideModel => "outside_model",
    })
    .unwrap_or_default()
    .to_string()
}

impl ExperimentReport {
    pub(super) fn new(config: ExperimentConfig, records: Vec<TrialRecord>, runtime_secs: f64) -> Self {
        let flagged = records.iter().filter(|r| r.flagged).count();
        let geometric_exceptions = records
            .iter()
            .filter(|r| r.geometric == Some(BoundaryStatus::Interior))
            .count();
        let all_members = records
            .iter()
            .map(|r| r.member)
            .collect::<Option<Vec<bool>>>()
            .map(|m| m.iter().all(|&x| x));
        ExperimentReport {
            schema: "1",
            fraction: flagged as f64 / records.len() as f64,
            config,
            records,
            flagged,
            geometric_exceptions,
            all_members,
            runtime_secs,
        }
    }

    /// One row per trial, floats written with round-trip precision.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Config(format!("csv output failed: {e}"));
        w.write_record(CSV_HEADER).map_err(err)?;
        for r in &self.records {
            w.write_record([
                r.index.to_string(),
                r.seed.to_string(),
                r.flagged.to_string(),
                opt(&r.best_loglik),
                opt(&r.best_restart),
                opt(&r.pt_r),
                opt(&r.r_pt),
                opt(&r.rank_p),
                opt(&r.iterations),
                opt(&r.zero_cells),
                status_name(&r.geometric),
                opt(&r.member),
                status_name(&r.status),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| Error::Config(format!("csv output failed: {e}")))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(format!("json output failed: {e}")))
    }
}
