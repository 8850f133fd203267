//! Plan JSON: `{"format":"ortacplus-plan/1","horizon":T,"agents":{"a":["n:9","e:8-9",...]}}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Location, Plan};

pub const FORMAT: &str = "ortacplus-plan/1";

#[derive(Debug, Error)]
pub enum PlanFileError {
    #[error("plan file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported plan format `{0}` (expected `{FORMAT}`)")]
    Format(String),
    #[error("agent `{agent}`: {message}")]
    Location { agent: String, message: String },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanJson {
    format: String,
    horizon: usize,
    agents: BTreeMap<String, Vec<String>>,
}

/// Single-line JSON followed by a newline. Agents appear in name order.
pub fn write_plan(p: &Plan) -> String {
    let doc = PlanJson {
        format: FORMAT.to_string(),
        horizon: p.horizon,
        agents: p
            .traj
            .iter()
            .map(|(a, tr)| (a.clone(), tr.iter().map(|l| l.to_string()).collect()))
            .collect(),
    };
    let mut s = serde_json::to_string(&doc).expect("plan serializes");
    s.push('\n');
    s
}

/// Parses a plan file. Trajectory lengths are not checked here; the
/// validator reports them.
pub fn read_plan(text: &str) -> Result<Plan, PlanFileError> {
    let doc: PlanJson = serde_json::from_str(text)?;
    if doc.format != FORMAT {
        return Err(PlanFileError::Format(doc.format));
    }
    let mut traj = BTreeMap::new();
    for (agent, locs) in doc.agents {
        let parsed = locs
            .iter()
            .map(|s| s.parse::<Location>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| PlanFileError::Location {
                agent: agent.clone(),
                message: e.to_string(),
            })?;
        traj.insert(agent, parsed);
    }
    Ok(Plan {
        horizon: doc.horizon,
        traj,
    })
}
