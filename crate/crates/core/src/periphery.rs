//! Artificial tissue and dendritic-cell assessment.
//!
//! Symptom events produced on a host during a step are buffered in its
//! [`Tissue`]. At the assessment phase the buffer is drained and every event
//! is classified by severity and certainty:
//!
//! | severity        | certainty          | signal       |
//! |-----------------|--------------------|--------------|
//! | `>= severity_hi`| `>= certainty_hi`  | costimulation|
//! | `>= severity_hi`| `<  certainty_hi`  | IL-12        |
//! | `<  severity_hi`| any                | IL-4         |
//!
//! Certainty is ignored for mild events: a weak response triggered by a false
//! positive costs little. Events are aggregated into one
//! [`DendriticCellReport`] per antigen per step.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::check;
use crate::error::{Error, Result};
use crate::types::{Antigen, Step};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymptomEvent {
    pub antigen: Antigen,
    pub severity: f64,
    pub certainty: f64,
    pub emitted_at: Step,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DendriticCellReport {
    pub antigen: Antigen,
    pub costim: f64,
    pub il12: f64,
    pub il4: f64,
    pub step: Step,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssessmentParams {
    pub severity_hi: f64,
    pub certainty_hi: f64,
    pub w_costim: f64,
    pub w_il12: f64,
    pub w_il4: f64,
}

impl Default for AssessmentParams {
    fn default() -> Self {
        AssessmentParams {
            severity_hi: 0.5,
            certainty_hi: 0.7,
            w_costim: 1.0,
            w_il12: 1.0,
            w_il4: 1.0,
        }
    }
}

impl AssessmentParams {
    pub fn validate(&self, path: &str) -> Result<()> {
        check::open_unit(path, "severity_hi", self.severity_hi)?;
        check::open_unit(path, "certainty_hi", self.certainty_hi)?;
        check::positive(path, "w_costim", self.w_costim)?;
        check::positive(path, "w_il12", self.w_il12)?;
        check::positive(path, "w_il4", self.w_il4)?;
        Ok(())
    }
}

/// Signal channel an event is assessed into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signal {
    Costim,
    Il12,
    Il4,
}

pub fn classify(severity: f64, certainty: f64, params: &AssessmentParams) -> Signal {
    if severity >= params.severity_hi {
        if certainty >= params.certainty_hi {
            Signal::Costim
        } else {
            Signal::Il12
        }
    } else {
        Signal::Il4
    }
}

#[derive(Default)]
struct Counts {
    costim: u32,
    il12: u32,
    il4: u32,
}

/// Turns one host's events for one step into dendritic-cell reports.
///
/// Reports come back sorted by antigen. Each field is `count * weight`, so the
/// result does not depend on the order of `events`.
pub fn assess_events(
    events: &[SymptomEvent],
    params: &AssessmentParams,
) -> Result<Vec<DendriticCellReport>> {
    let Some(first) = events.first() else {
        return Ok(Vec::new());
    };
    let step = first.emitted_at;

    let mut counts: BTreeMap<&Antigen, Counts> = BTreeMap::new();
    for (index, event) in events.iter().enumerate() {
        for (name, value) in [("severity", event.severity), ("certainty", event.certainty)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidEvent {
                    index,
                    reason: format!(
                        "{name} {value} outside [0, 1] (antigen `{}`)",
                        event.antigen
                    ),
                });
            }
        }
        if event.emitted_at != step {
            return Err(Error::InvalidEvent {
                index,
                reason: format!(
                    "emitted at step {} but batch is step {step}",
                    event.emitted_at
                ),
            });
        }
        let entry = counts.entry(&event.antigen).or_default();
        match classify(event.severity, event.certainty, params) {
            Signal::Costim => entry.costim += 1,
            Signal::Il12 => entry.il12 += 1,
            Signal::Il4 => entry.il4 += 1,
        }
    }

    Ok(counts
        .into_iter()
        .map(|(antigen, c)| DendriticCellReport {
            antigen: antigen.clone(),
            costim: f64::from(c.costim) * params.w_costim,
            il12: f64::from(c.il12) * params.w_il12,
            il4: f64::from(c.il4) * params.w_il4,
            step,
        })
        .collect())
}

/// Per-host buffer of symptom events awaiting dendritic-cell assessment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tissue {
    buffer: Vec<SymptomEvent>,
}

impl Tissue {
    pub fn push(&mut self, event: SymptomEvent) {
        self.buffer.push(event);
    }

    pub fn extend(&mut self, events: impl IntoIterator<Item = SymptomEvent>) {
        self.buffer.extend(events);
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    /// Drains the buffer. Clear-on-read: a second call in the same step
    /// returns nothing.
    pub fn collect(&mut self, step: Step) -> Vec<SymptomEvent> {
        debug_assert!(self.buffer.iter().all(|e| e.emitted_at == step));
        std::mem::take(&mut self.buffer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(antigen: &str, severity: f64, certainty: f64) -> SymptomEvent {
        SymptomEvent {
            antigen: Antigen::new(antigen).unwrap(),
            severity,
            certainty,
            emitted_at: 4,
        }
    }

    #[test]
    fn severe_and_certain_is_costim() {
        let reports = assess_events(&[ev("A", 0.9, 0.9)], &AssessmentParams::default()).unwrap();
        assert_eq!(reports.len(), 1);
        assert_eq!(
            (reports[0].costim, reports[0].il12, reports[0].il4),
            (1.0, 0.0, 0.0)
        );
        assert_eq!(reports[0].step, 4);
    }

    #[test]
    fn il4_ignores_certainty() {
        let events = [ev("A", 0.9, 0.3), ev("A", 0.9, 0.3), ev("A", 0.2, 0.9)];
        let reports = assess_events(&events, &AssessmentParams::default()).unwrap();
        assert_eq!(reports.len(), 1);
        assert_eq!(
            (reports[0].costim, reports[0].il12, reports[0].il4),
            (0.0, 2.0, 1.0)
        );
    }

    #[test]
    fn empty_batch() {
        assert!(assess_events(&[], &AssessmentParams::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn ties_classify_high() {
        let p = AssessmentParams::default();
        assert_eq!(classify(0.5, 0.7, &p), Signal::Costim);
        assert_eq!(classify(0.5, 0.69, &p), Signal::Il12);
        assert_eq!(classify(0.49, 1.0, &p), Signal::Il4);
    }

    #[test]
    fn weights_scale_counts() {
        let p = AssessmentParams {
            w_costim: 2.5,
            w_il12: 0.5,
            ..Default::default()
        };
        let events = [ev("A", 0.9, 0.9), ev("A", 0.9, 0.9), ev("B", 0.9, 0.1)];
        let reports = assess_events(&events, &p).unwrap();
        assert_eq!(reports[0].antigen.as_str(), "A");
        assert_eq!(reports[0].costim, 5.0);
        assert_eq!(reports[1].il12, 0.5);
    }

    #[test]
    fn rejects_out_of_range_event() {
        let events = [ev("A", 0.9, 0.9), ev("B", 1.2, 0.5)];
        match assess_events(&events, &AssessmentParams::default()) {
            Err(Error::InvalidEvent { index, reason }) => {
                assert_eq!(index, 1);
                assert!(reason.contains("severity"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let nan = [ev("A", 0.5, f64::NAN)];
        assert!(assess_events(&nan, &AssessmentParams::default()).is_err());
    }

    #[test]
    fn rejects_mixed_steps() {
        let mut late = ev("A", 0.1, 0.1);
        late.emitted_at = 5;
        assert!(assess_events(&[ev("A", 0.1, 0.1), late], &AssessmentParams::default()).is_err());
    }

    #[test]
    fn tissue_is_clear_on_read() {
        let mut tissue = Tissue::default();
        tissue.extend([ev("A", 0.1, 0.1), ev("A", 0.2, 0.1), ev("B", 0.3, 0.1)]);
        assert_eq!(tissue.collect(4).len(), 3);
        assert!(tissue.is_empty());
        assert!(tissue.collect(4).is_empty());
    }

    #[test]
    fn validate_bounds() {
        assert!(AssessmentParams::default().validate("assessment").is_ok());
        let bad = AssessmentParams {
            certainty_hi: 1.5,
            ..Default::default()
        };
        let err = bad.validate("assessment").unwrap_err().to_string();
        assert!(err.contains("assessment.certainty_hi"), "{err}");
    }
}
