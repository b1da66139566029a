//! Per-step metrics, run summaries and their file formats.
//!
//! `metrics.csv` has one row per step. Columns, in order:
//!
//! ```text
//! schema_version, step,
//! for each antigen (worms, then benign profiles, in config order):
//!     <a>_susceptible, <a>_infected, <a>_cured, <a>_blocked, <a>_rate_limited,
//!     <a>_strong, <a>_weak,
//! strong_responses, weak_responses, false_positive_strong,
//! messages_sent, messages_delivered, symptom_events,
//! clones_ctl, clones_th1, clones_th2
//! ```
//!
//! `schema_version` is [`CSV_SCHEMA_VERSION`] on every row.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Antigen, CellType, Step};

pub const CSV_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AntigenCounts {
    pub antigen: Antigen,
    pub susceptible: u32,
    pub infected: u32,
    pub cured: u32,
    pub blocked_hosts: u32,
    pub rate_limited_hosts: u32,
    pub strong_responses: u32,
    pub weak_responses: u32,
}

impl AntigenCounts {
    pub fn new(antigen: Antigen) -> Self {
        AntigenCounts {
            antigen,
            susceptible: 0,
            infected: 0,
            cured: 0,
            blocked_hosts: 0,
            rate_limited_hosts: 0,
            strong_responses: 0,
            weak_responses: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CloneTotals {
    pub ctl: u64,
    pub th1: u64,
    pub th2: u64,
}

impl CloneTotals {
    pub fn add(&mut self, cell_type: CellType, clones: u32) {
        let slot = match cell_type {
            CellType::Ctl => &mut self.ctl,
            CellType::Th1 => &mut self.th1,
            CellType::Th2 => &mut self.th2,
        };
        *slot += u64::from(clones);
    }

    pub fn total(&self) -> u64 {
        self.ctl + self.th1 + self.th2
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepMetrics {
    pub step: Step,
    pub antigens: Vec<AntigenCounts>,
    pub strong_responses: u32,
    pub weak_responses: u32,
    pub false_positive_strong: u32,
    pub messages_sent: u64,
    pub messages_delivered: u64,
    pub symptom_events: u64,
    pub clones: CloneTotals,
}

impl StepMetrics {
    pub fn counts(&self, antigen: &Antigen) -> Option<&AntigenCounts> {
        self.antigens.iter().find(|c| c.antigen == *antigen)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WormSummary {
    pub final_infected_fraction: f64,
    pub peak_infected_fraction: f64,
    /// Hosts infected at some point (currently infected or cured).
    pub ever_infected_fraction: f64,
    pub first_infection_step: Option<Step>,
    pub first_strong_step: Option<Step>,
    /// `first_strong_step - first_infection_step`.
    pub time_to_first_strong: Option<Step>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenignSummary {
    pub false_positive_strong: u64,
    pub weak_responses: u64,
    pub first_strong_step: Option<Step>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub host_count: usize,
    pub steps: usize,
    pub worms: BTreeMap<String, WormSummary>,
    pub benign: BTreeMap<String, BenignSummary>,
    pub total_strong_responses: u64,
    pub total_weak_responses: u64,
    pub total_false_positive_strong: u64,
    pub total_messages: u64,
    /// First step of the final run of zero-clone steps; `None` if clones
    /// remain at the end of the run.
    pub quiescence_step: Option<Step>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSeries {
    pub host_count: usize,
    pub worm_antigens: Vec<Antigen>,
    pub benign_antigens: Vec<Antigen>,
    pub rows: Vec<StepMetrics>,
}

fn fraction(count: u32, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        f64::from(count) / total as f64
    }
}

impl MetricsSeries {
    pub fn worm_summary(&self, antigen: &Antigen) -> WormSummary {
        let n = self.host_count;
        let counts = || {
            self.rows
                .iter()
                .filter_map(move |r| r.counts(antigen).map(|c| (r.step, c)))
        };
        let last = counts().next_back();
        let first_infection_step = counts().find(|(_, c)| c.infected > 0).map(|(s, _)| s);
        let first_strong_step = counts()
            .find(|(_, c)| c.strong_responses > 0)
            .map(|(s, _)| s);
        WormSummary {
            final_infected_fraction: last.map_or(0.0, |(_, c)| fraction(c.infected, n)),
            peak_infected_fraction: counts()
                .map(|(_, c)| fraction(c.infected, n))
                .fold(0.0, f64::max),
            ever_infected_fraction: last.map_or(0.0, |(_, c)| fraction(c.infected + c.cured, n)),
            first_infection_step,
            first_strong_step,
            time_to_first_strong: match (first_infection_step, first_strong_step) {
                (Some(i), Some(s)) => Some(s.saturating_sub(i)),
                _ => None,
            },
        }
    }

    pub fn summary(&self) -> RunSummary {
        let worms = self
            .worm_antigens
            .iter()
            .map(|a| (a.to_string(), self.worm_summary(a)))
            .collect();
        let benign = self
            .benign_antigens
            .iter()
            .map(|a| {
                let per_step = || {
                    self.rows
                        .iter()
                        .filter_map(move |r| r.counts(a).map(|c| (r.step, c)))
                };
                (
                    a.to_string(),
                    BenignSummary {
                        false_positive_strong: per_step()
                            .map(|(_, c)| u64::from(c.strong_responses))
                            .sum(),
                        weak_responses: per_step().map(|(_, c)| u64::from(c.weak_responses)).sum(),
                        first_strong_step: per_step()
                            .find(|(_, c)| c.strong_responses > 0)
                            .map(|(s, _)| s),
                    },
                )
            })
            .collect();
        let quiescence_step = match self.rows.last() {
            Some(last) if last.clones.total() == 0 => {
                let busy = self.rows.iter().rposition(|r| r.clones.total() > 0);
                Some(busy.map_or(self.rows[0].step, |i| self.rows[i + 1].step))
            }
            _ => None,
        };
        RunSummary {
            host_count: self.host_count,
            steps: self.rows.len(),
            worms,
            benign,
            total_strong_responses: self
                .rows
                .iter()
                .map(|r| u64::from(r.strong_responses))
                .sum(),
            total_weak_responses: self.rows.iter().map(|r| u64::from(r.weak_responses)).sum(),
            total_false_positive_strong: self
                .rows
                .iter()
                .map(|r| u64::from(r.false_positive_strong))
                .sum(),
            total_messages: self.rows.iter().map(|r| r.messages_sent).sum(),
            quiescence_step,
        }
    }

    pub fn csv_header(&self) -> Vec<String> {
        let mut header = vec!["schema_version".to_string(), "step".to_string()];
        for a in self.worm_antigens.iter().chain(&self.benign_antigens) {
            for col in [
                "susceptible",
                "infected",
                "cured",
                "blocked",
                "rate_limited",
                "strong",
                "weak",
            ] {
                header.push(format!("{a}_{col}"));
            }
        }
        header.extend(
            [
                "strong_responses",
                "weak_responses",
                "false_positive_strong",
                "messages_sent",
                "messages_delivered",
                "symptom_events",
                "clones_ctl",
                "clones_th1",
                "clones_th2",
            ]
            .map(String::from),
        );
        header
    }

    pub fn write_csv_to<W: Write>(&self, out: W) -> std::result::Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.csv_header())?;
        for row in &self.rows {
            let mut record = vec![CSV_SCHEMA_VERSION.to_string(), row.step.to_string()];
            for c in &row.antigens {
                record.extend(
                    [
                        c.susceptible,
                        c.infected,
                        c.cured,
                        c.blocked_hosts,
                        c.rate_limited_hosts,
                        c.strong_responses,
                        c.weak_responses,
                    ]
                    .map(|v| v.to_string()),
                );
            }
            record.extend(
                [
                    u64::from(row.strong_responses),
                    u64::from(row.weak_responses),
                    u64::from(row.false_positive_strong),
                    row.messages_sent,
                    row.messages_delivered,
                    row.symptom_events,
                    row.clones.ctl,
                    row.clones.th1,
                    row.clones.th2,
                ]
                .map(|v| v.to_string()),
            );
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv_to(std::io::BufWriter::new(file))
            .map_err(|e| {
                let io = match e.into_kind() {
                    csv::ErrorKind::Io(io) => io,
                    other => std::io::Error::other(format!("{other:?}")),
                };
                Error::io(path, io)
            })
    }
}

impl RunSummary {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("summary serializes");
        text.push('\n');
        text
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}
