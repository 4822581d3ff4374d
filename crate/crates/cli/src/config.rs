//! Run configuration read from `--config`. Command-line flags are merged on
//! top of it before use.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use xfcm::fcm::{ConceptId, Network, Realisation, DEFAULT_EPSILON, DEFAULT_MAX_STEPS};
use xfcm::scenarios::{
    build_network, ids, quantize_input, Alphas, InitialConditions, InputConcept, NetworkKind, ScenarioInputs,
    WeightVector,
};

use crate::UsageError;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkSource {
    Scenario1,
    #[default]
    Scenario2,
    /// A network document in JSON.
    File(PathBuf),
}

/// An input given as a vocabulary term or a raw value.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum InputValue {
    Value(f64),
    Term(String),
}

impl InputValue {
    pub fn parse_flag(s: &str) -> InputValue {
        match s.trim().parse::<f64>() {
            Ok(v) => InputValue::Value(v),
            Err(_) => InputValue::Term(s.to_string()),
        }
    }

    fn resolve(&self, concept: InputConcept, field: &str) -> Result<Realisation> {
        match self {
            InputValue::Value(v) => {
                check_unit(field, *v)?;
                Ok(Realisation::new(*v)?)
            }
            InputValue::Term(t) => {
                quantize_input(concept, t).map_err(|e| UsageError(format!("{field}: {e}")).into())
            }
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    pub rpk: Option<InputValue>,
    pub gwk: Option<InputValue>,
    pub gp: Option<InputValue>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Initial {
    pub belief: Option<f64>,
    pub goal: Option<f64>,
    pub emotion: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub network: NetworkSource,
    pub functional: bool,
    /// Overrides of named linkage parameters.
    pub weights: BTreeMap<String, f64>,
    pub alphas: Option<Alphas>,
    pub initial: Initial,
    pub inputs: Inputs,
    /// Extra initial realisations by concept id, mainly for file networks.
    pub state: BTreeMap<u32, f64>,
    pub max_steps: Option<usize>,
    pub epsilon: Option<f64>,
    pub theta: Option<f64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<RunConfig> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| UsageError(format!("config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks that can run before any work: known parameters, existing
    /// files, values in range.
    pub fn validate(&self) -> Result<()> {
        self.base_weights()?;
        if let NetworkSource::File(f) = &self.network {
            if !f.is_file() {
                bail!(UsageError(format!("network: file {} does not exist", f.display())));
            }
        }
        for (name, v) in [
            ("initial.belief", self.initial.belief),
            ("initial.goal", self.initial.goal),
            ("initial.emotion", self.initial.emotion),
        ] {
            if let Some(v) = v {
                check_unit(name, v)?;
            }
        }
        for (id, &v) in &self.state {
            check_unit(&format!("state.{id}"), v)?;
        }
        if self.max_steps == Some(0) {
            bail!(UsageError("max_steps must be at least 1".into()));
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e.is_finite()) {
                bail!(UsageError(format!("epsilon = {e} must be positive")));
            }
        }
        if let Some(t) = self.theta {
            if !(t > -1.0 && t < 1.0) {
                bail!(UsageError(format!("theta = {t} must lie in (-1, 1)")));
            }
        }
        Ok(())
    }

    /// Default weights with the configured overrides applied.
    pub fn base_weights(&self) -> Result<WeightVector> {
        let mut w = WeightVector::defaults();
        for (name, &v) in &self.weights {
            if w.get(name).is_none() {
                let defaults = WeightVector::defaults();
                let known: Vec<&str> = defaults.names().collect();
                bail!(UsageError(format!(
                    "weights.{name}: unknown parameter (known: {})",
                    known.join(", ")
                )));
            }
            w.set(name, v).map_err(|e| UsageError(format!("weights.{name}: {e}")))?;
        }
        Ok(w)
    }

    pub fn alphas(&self) -> Alphas {
        self.alphas.unwrap_or_default()
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps.unwrap_or(DEFAULT_MAX_STEPS)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(DEFAULT_EPSILON)
    }

    pub fn network(&self) -> Result<Network> {
        let kind = match &self.network {
            NetworkSource::Scenario1 => NetworkKind::Scenario1,
            NetworkSource::Scenario2 => NetworkKind::Scenario2,
            NetworkSource::File(path) => {
                let text =
                    std::fs::read_to_string(path).with_context(|| format!("reading network {}", path.display()))?;
                return Network::from_json(&text).with_context(|| format!("parsing network {}", path.display()));
            }
        };
        Ok(build_network(kind, &self.base_weights()?, &self.alphas(), self.functional)?)
    }

    pub fn initial_conditions(&self) -> InitialConditions {
        InitialConditions {
            belief: self.initial.belief.unwrap_or(0.0),
            goal: self.initial.goal.unwrap_or(0.0),
            emotion: self.initial.emotion.unwrap_or(0.0),
        }
    }

    /// Inputs for the canonical input concepts; each one is required when
    /// `net` contains it and the network is a built-in scenario.
    pub fn scenario_inputs(&self, net: &Network) -> Result<ScenarioInputs> {
        let builtin = !matches!(self.network, NetworkSource::File(_));
        let get = |v: &Option<InputValue>, concept, id: ConceptId, field: &str| -> Result<Option<Realisation>> {
            match v {
                Some(v) => v.resolve(concept, field).map(Some),
                None if builtin && net.contains(id) => bail!(UsageError(format!(
                    "{field} is required by this network (pass --{field} or inputs.{field})"
                ))),
                None => Ok(None),
            }
        };
        let rpk = get(&self.inputs.rpk, InputConcept::RationallyPerceivedKnowledge, ids::RPK, "rpk")?;
        let gwk = get(&self.inputs.gwk, InputConcept::GeneralWorldKnowledge, ids::GWK, "gwk")?;
        let gp = get(&self.inputs.gp, InputConcept::GeneralPreference, ids::GP, "gp")?;
        Ok(ScenarioInputs {
            rpk: rpk.unwrap_or(Realisation::new(0.0)?),
            gwk,
            gp,
        })
    }

    /// Full initial state vector: inputs and initial realisations for the
    /// canonical concepts present in `net`, then the `state` entries.
    pub fn initial_state(&self, net: &Network) -> Result<Vec<f64>> {
        let inputs = self.scenario_inputs(net)?;
        let init = self.initial_conditions();
        let mut assign = Vec::new();
        for (id, v) in [
            (ids::RPK, Some(inputs.rpk)),
            (ids::GWK, inputs.gwk),
            (ids::GP, inputs.gp),
        ] {
            if let (true, Some(v)) = (net.contains(id), v) {
                assign.push((id, v.value()));
            }
        }
        for (id, v) in [
            (ids::BELIEF, init.belief),
            (ids::GOAL, init.goal),
            (ids::EMOTION, init.emotion),
        ] {
            if net.contains(id) {
                assign.push((id, v));
            }
        }
        for (&id, &v) in &self.state {
            assign.push((ConceptId(id), v));
        }
        net.state_with(&assign)
            .map_err(|e| UsageError(format!("initial state: {e}")).into())
    }
}

pub fn check_unit(field: &str, v: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&v) {
        bail!(UsageError(format!("{field} = {v} is outside [-1, 1]")));
    }
    Ok(())
}
