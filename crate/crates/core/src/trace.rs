//! Optional JSON-lines trace of peer messages and periphery responses.
//!
//! Message lines:
//! `{"event":"message","sender":..,"receiver":..,"antigen":..,"cell_type":..,"clones":..,"sender_active_responses":..,"sent_at":..}`
//!
//! Response lines: `{"event":"response","step":..,"host":..,"kind":"Strong"|"Weak","antigen":..}`

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netsim::StepReport;
use crate::responder::ResponseKind;
use crate::types::{CellType, Step};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceRecord {
    Message {
        sender: u32,
        receiver: u32,
        antigen: String,
        cell_type: CellType,
        clones: u32,
        sender_active_responses: u32,
        sent_at: Step,
    },
    Response {
        step: Step,
        host: u32,
        kind: ResponseKind,
        antigen: String,
    },
}

/// Trace records for one step: responses first, then messages.
pub fn records(report: &StepReport) -> impl Iterator<Item = TraceRecord> + '_ {
    let responses = report
        .responses
        .iter()
        .map(|(host, a)| TraceRecord::Response {
            step: a.applied_at,
            host: host.0,
            kind: a.kind,
            antigen: a.antigen.to_string(),
        });
    let messages = report.messages.iter().map(|m| TraceRecord::Message {
        sender: m.sender.0,
        receiver: m.receiver.0,
        antigen: m.effector.antigen.to_string(),
        cell_type: m.effector.cell_type,
        clones: m.effector.clones,
        sender_active_responses: m.sender_active_responses,
        sent_at: m.sent_at,
    });
    responses.chain(messages)
}

pub struct TraceWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl TraceWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        Ok(TraceWriter {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
        })
    }

    pub fn record(&mut self, report: &StepReport) -> Result<()> {
        for rec in records(report) {
            serde_json::to_writer(&mut self.out, &rec)
                .map_err(|e| Error::io(&self.path, e.into()))?;
            self.out
                .write_all(b"\n")
                .map_err(|e| Error::io(&self.path, e))?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}
