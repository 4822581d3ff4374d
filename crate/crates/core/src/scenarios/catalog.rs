use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::vocab::{quantize_input, InputConcept};
use super::ScenarioInputs;
use crate::error::{Error, Result};

/// Default 26-scenario layout: sets 1-2 vary the forecast, 3-4 the forecast
/// accuracy, 5-6 the preference for the activity.
pub const BUNDLED_SCENARIOS_CSV: &str = include_str!("../../data/scenarios.csv");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub set_id: u8,
    pub activity: String,
    pub rpk_term: String,
    pub gwk_term: Option<String>,
    pub gp_term: Option<String>,
    pub inputs: ScenarioInputs,
}

impl Scenario {
    pub fn new(
        id: impl Into<String>,
        set_id: u8,
        activity: impl Into<String>,
        rpk_term: &str,
        gwk_term: Option<&str>,
        gp_term: Option<&str>,
    ) -> Result<Self> {
        let id = id.into();
        if !(1..=6).contains(&set_id) {
            return Err(Error::InvalidScenario(format!(
                "scenario `{id}`: set id {set_id} is outside 1-6"
            )));
        }
        let rpk = quantize_input(InputConcept::RationallyPerceivedKnowledge, rpk_term)?;
        let gwk = gwk_term
            .map(|t| quantize_input(InputConcept::GeneralWorldKnowledge, t))
            .transpose()?;
        let gp = gp_term
            .map(|t| quantize_input(InputConcept::GeneralPreference, t))
            .transpose()?;
        Ok(Self {
            id,
            set_id,
            activity: activity.into(),
            rpk_term: rpk_term.trim().to_string(),
            gwk_term: gwk_term.map(|t| t.trim().to_string()),
            gp_term: gp_term.map(|t| t.trim().to_string()),
            inputs: ScenarioInputs { rpk, gwk, gp },
        })
    }
}

#[derive(Debug, Deserialize)]
struct Row {
    scenario_id: String,
    set_id: u8,
    activity: String,
    rpk_term: String,
    #[serde(default)]
    gwk_term: Option<String>,
    #[serde(default)]
    gp_term: Option<String>,
}

fn blank_to_none(s: Option<String>) -> Option<String> {
    s.filter(|t| !t.trim().is_empty())
}

/// Parses `scenario_id,set_id,activity,rpk_term,gwk_term,gp_term`.
pub fn parse_scenarios_csv<R: Read>(input: R) -> Result<Vec<Scenario>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut out: Vec<Scenario> = Vec::new();
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let line = i as u64 + 2;
        let row = row.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let gwk = blank_to_none(row.gwk_term);
        let gp = blank_to_none(row.gp_term);
        let s = Scenario::new(
            row.scenario_id,
            row.set_id,
            row.activity,
            &row.rpk_term,
            gwk.as_deref(),
            gp.as_deref(),
        )
        .map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        if out.iter().any(|o| o.id == s.id) {
            return Err(Error::Parse {
                line,
                message: format!("duplicate scenario id `{}`", s.id),
            });
        }
        out.push(s);
    }
    Ok(out)
}

pub fn write_scenarios_csv<W: Write>(scenarios: &[Scenario], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scenario_id", "set_id", "activity", "rpk_term", "gwk_term", "gp_term"])?;
    for s in scenarios {
        w.write_record([
            s.id.as_str(),
            &s.set_id.to_string(),
            &s.activity,
            &s.rpk_term,
            s.gwk_term.as_deref().unwrap_or(""),
            s.gp_term.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn bundled_scenarios() -> Vec<Scenario> {
    parse_scenarios_csv(BUNDLED_SCENARIOS_CSV.as_bytes()).expect("bundled scenario file is valid")
}
