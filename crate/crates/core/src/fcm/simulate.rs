use sha2::{Digest, Sha256};

use super::{check_settings, ConceptId, Network, NetworkDoc, Realisation};
use crate::error::{Error, Result};

/// Recorded run of a network: `steps[0]` is the initial vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<Vec<f64>>,
    pub converged_at: Option<usize>,
    pub network_digest: String,
    pub concept_ids: Vec<ConceptId>,
    pub concept_names: Vec<String>,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.steps.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn position(&self, id: ConceptId) -> Result<usize> {
        self.concept_ids
            .iter()
            .position(|&c| c == id)
            .ok_or(Error::UnknownConcept(id))
    }

    /// Values of one concept over all recorded steps.
    pub fn series(&self, id: ConceptId) -> Result<Vec<f64>> {
        let pos = self.position(id)?;
        Ok(self.steps.iter().map(|s| s[pos]).collect())
    }

    pub fn value_at(&self, id: ConceptId, step: usize) -> Result<f64> {
        let pos = self.position(id)?;
        self.steps
            .get(step)
            .map(|s| s[pos])
            .ok_or_else(|| Error::InvalidState(format!("trajectory has no step {step}")))
    }
}

/// Final-step value of a concept. `converged` is false when the run hit
/// `max_steps` without meeting the tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergedValue {
    pub value: Realisation,
    pub converged: bool,
}

/// One synchronous application of the update law.
pub fn step(net: &Network, state: &[f64]) -> Result<Vec<f64>> {
    net.validate_state(state)?;
    let mut next = vec![0.0; state.len()];
    net.step_into(state, &mut next);
    Ok(next)
}

pub fn simulate(net: &Network, initial: &[f64], max_steps: usize, epsilon: f64) -> Result<Trajectory> {
    check_settings(max_steps, epsilon)?;
    net.validate_state(initial)?;

    let mut steps = Vec::with_capacity(max_steps + 1);
    steps.push(initial.to_vec());
    let mut converged_at = None;
    for k in 1..=max_steps {
        let prev = &steps[k - 1];
        let mut next = vec![0.0; prev.len()];
        net.step_into(prev, &mut next);
        let change = net.sup_change(prev, &next);
        steps.push(next);
        if change < epsilon {
            converged_at = Some(k);
            break;
        }
    }

    Ok(Trajectory {
        steps,
        converged_at,
        network_digest: digest(net, initial),
        concept_ids: net.concepts().iter().map(|c| c.id).collect(),
        concept_names: net.concepts().iter().map(|c| c.name.clone()).collect(),
    })
}

pub fn converged_value(traj: &Trajectory, id: ConceptId) -> Result<ConvergedValue> {
    if traj.steps.is_empty() {
        return Err(Error::InvalidState("empty trajectory".into()));
    }
    let pos = traj.position(id)?;
    Ok(ConvergedValue {
        value: Realisation::new(traj.final_state()[pos])?,
        converged: traj.converged_at.is_some(),
    })
}

/// SHA-256 over the canonical JSON document of the network followed by the
/// bit patterns of the initial vector.
fn digest(net: &Network, initial: &[f64]) -> String {
    let mut hasher = Sha256::new();
    let doc = serde_json::to_vec(&NetworkDoc::from(net)).expect("network document serialises");
    hasher.update(&doc);
    for v in initial {
        hasher.update(v.to_bits().to_le_bytes());
    }
    hex::encode(hasher.finalize())
}
