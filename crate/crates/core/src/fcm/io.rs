use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{
    ConceptId, ConceptKind, ConceptSpec, Family, Interval, Linkage, Network, Threshold, Trajectory,
    WeightFunction,
};
use crate::error::{Error, Result};
use crate::format::sig9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptDoc {
    pub id: ConceptId,
    pub name: String,
    pub kind: ConceptKind,
    #[serde(default)]
    pub interval: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkageDoc {
    pub cause: ConceptId,
    pub effect: ConceptId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intermediate: Option<ConceptId>,
    pub family: Family,
    pub params: Vec<f64>,
}

/// Serialised form of a [`Network`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkDoc {
    pub concepts: Vec<ConceptDoc>,
    pub linkages: Vec<LinkageDoc>,
    pub alpha: BTreeMap<ConceptId, f64>,
    #[serde(default)]
    pub threshold: Threshold,
}

impl From<&Network> for NetworkDoc {
    fn from(net: &Network) -> Self {
        NetworkDoc {
            concepts: net
                .concepts()
                .iter()
                .map(|c| ConceptDoc {
                    id: c.id,
                    name: c.name.clone(),
                    kind: c.kind,
                    interval: c.interval,
                })
                .collect(),
            linkages: net
                .linkages()
                .iter()
                .map(|l| LinkageDoc {
                    cause: l.cause,
                    effect: l.effect,
                    intermediate: l.intermediate,
                    family: l.weight.family(),
                    params: l.weight.params(),
                })
                .collect(),
            alpha: net.alpha().clone(),
            threshold: net.threshold(),
        }
    }
}

impl TryFrom<NetworkDoc> for Network {
    type Error = Error;

    fn try_from(doc: NetworkDoc) -> Result<Network> {
        let concepts = doc
            .concepts
            .into_iter()
            .map(|c| ConceptSpec {
                id: c.id,
                name: c.name,
                kind: c.kind,
                interval: c.interval,
            })
            .collect();
        let linkages = doc
            .linkages
            .into_iter()
            .map(|l| {
                Ok(Linkage {
                    cause: l.cause,
                    effect: l.effect,
                    intermediate: l.intermediate,
                    weight: WeightFunction::from_parts(l.family, &l.params)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Network::new(concepts, linkages, doc.alpha, doc.threshold)
    }
}

impl Network {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&NetworkDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Network> {
        let doc: NetworkDoc = serde_json::from_str(text)?;
        Network::try_from(doc)
    }
}

/// Writes `step,<concept_name>...` with one row per recorded step.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["step".to_string()];
    header.extend(traj.concept_names.iter().cloned());
    w.write_record(&header)?;
    for (k, s) in traj.steps.iter().enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(s.iter().map(|&v| sig9(v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
