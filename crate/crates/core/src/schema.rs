//! Scenario files.
//!
//! ```json
//! {
//!   "dims0": [2, 2],
//!   "rho0": [[[0.5, 0.0], ...], ...],
//!   "stations": [
//!     {
//!       "event": {"id": "A", "t": 0.0, "x": 1.0},
//!       "subsystem": 0,
//!       "intervention": {"d_in": 2, "outcomes": [{"label": "+", "d_out": 2, "kraus": [matrix]}]},
//!       "conditional": [{"history": {"P": "+"}, "subsystem": 0, "intervention": {...}}]
//!     }
//!   ],
//!   "evolutions": [{"from": "A", "to": "B", "history": {}, "unitary": matrix}]
//! }
//! ```
//!
//! A matrix is an array of rows, each row an array of `[re, im]` pairs.
//! `conditional`, `evolutions` and `history` may be omitted; `from`/`to` are
//! `null` for the preparation and final times. Unknown fields are rejected.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complexmat::CMatrix;
use crate::experiment::{Conditional, Evolution, ExperimentError, Record, Scenario, Station};
use crate::intervention::{Intervention, LocalIntervention};
use crate::spacetime::{Event, SpacetimeError};

/// A parse or validation failure located in the input document.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{path}: {message}")]
pub struct ParseError {
    /// JSON path of the offending value (`.` for the document root).
    pub path: String,
    pub message: String,
}

impl ParseError {
    fn at(path: impl Into<String>, message: impl ToString) -> Self {
        Self {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    dims0: Vec<usize>,
    rho0: CMatrix,
    stations: Vec<StationFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    evolutions: Vec<EvolutionFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StationFile {
    event: Event,
    subsystem: usize,
    intervention: Intervention,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    conditional: Vec<ConditionalFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConditionalFile {
    history: Record,
    subsystem: usize,
    intervention: Intervention,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvolutionFile {
    from: Option<String>,
    to: Option<String>,
    #[serde(default, skip_serializing_if = "Record::is_empty")]
    history: Record,
    unitary: CMatrix,
}

/// Parse and fully validate a scenario document.
pub fn parse_scenario(bytes: &[u8]) -> Result<Scenario, ParseError> {
    let text = std::str::from_utf8(bytes).map_err(|e| ParseError::at(".", format!("not UTF-8: {e}")))?;
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ParseError::at(path, format!("{inner}"))
    })?;
    build(file)
}

fn build(file: ScenarioFile) -> Result<Scenario, ParseError> {
    let ids: Vec<String> = file.stations.iter().map(|s| s.event.id.clone()).collect();
    let station_path = |id: &str| {
        ids.iter()
            .position(|x| x == id)
            .map_or_else(|| "stations".to_owned(), |i| format!("stations[{i}]"))
    };
    let evolution_keys: Vec<(Option<String>, Option<String>)> =
        file.evolutions.iter().map(|e| (e.from.clone(), e.to.clone())).collect();

    let stations = file
        .stations
        .into_iter()
        .map(|s| Station {
            event: s.event,
            local: LocalIntervention::new(s.subsystem, s.intervention),
            conditional: s
                .conditional
                .into_iter()
                .map(|c| Conditional {
                    history: c.history,
                    local: LocalIntervention::new(c.subsystem, c.intervention),
                })
                .collect(),
        })
        .collect();
    let evolutions = file
        .evolutions
        .into_iter()
        .map(|e| Evolution {
            from: e.from,
            to: e.to,
            history: e.history,
            unitary: e.unitary,
        })
        .collect();

    Scenario::new(file.dims0, file.rho0, stations, evolutions).map_err(|err| {
        let path = match &err {
            ExperimentError::InitialState(_) => "rho0".to_owned(),
            ExperimentError::NonCausalCondition { station, .. } => {
                format!("{}.conditional", station_path(station))
            }
            ExperimentError::UnknownStation(_) => "stations".to_owned(),
            ExperimentError::Spacetime(SpacetimeError::DuplicateId(id)) => {
                format!("{}.event.id", station_path(id))
            }
            ExperimentError::Spacetime(SpacetimeError::NonFinite(id)) => {
                format!("{}.event", station_path(id))
            }
            ExperimentError::Evolution { segment, .. } => evolution_keys
                .iter()
                .position(|(f, t)| {
                    format!(
                        "{} -> {}",
                        f.as_deref().unwrap_or("start"),
                        t.as_deref().unwrap_or("end")
                    ) == *segment
                })
                .map_or_else(|| "evolutions".to_owned(), |i| format!("evolutions[{i}]")),
            _ => ".".to_owned(),
        };
        ParseError::at(path, err)
    })
}

/// Pretty-printed scenario document with a trailing newline.
pub fn serialize_scenario(s: &Scenario) -> String {
    let file = ScenarioFile {
        dims0: s.dims0().to_vec(),
        rho0: s.rho0().clone(),
        stations: s
            .stations()
            .iter()
            .map(|st| StationFile {
                event: st.event.clone(),
                subsystem: st.local.subsystem,
                intervention: st.local.local.clone(),
                conditional: st
                    .conditional
                    .iter()
                    .map(|c| ConditionalFile {
                        history: c.history.clone(),
                        subsystem: c.local.subsystem,
                        intervention: c.local.local.clone(),
                    })
                    .collect(),
            })
            .collect(),
        evolutions: s
            .evolutions()
            .iter()
            .map(|e| EvolutionFile {
                from: e.from.clone(),
                to: e.to.clone(),
                history: e.history.clone(),
                unitary: e.unitary.clone(),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("scenario serializes");
    out.push('\n');
    out
}
