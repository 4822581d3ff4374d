//! The two weather/outdoor-activity cognitive networks and the four model
//! variants built from them.
//!
//! Topology (cause -> effect):
//!
//! | linkage              | scenario 1 | scenario 2                     |
//! |----------------------|------------|--------------------------------|
//! | RPK -> BELIEF        | constant   | affine in GWK (functional)     |
//! | BIAS -> BELIEF       | constant   | constant                       |
//! | BELIEF -> GOAL       | piecewise sign (functional)  | same         |
//! | BELIEF -> TRIGGER2   | constant   | constant                       |
//! | BELIEF -> TRIGGER3   | scaled by GOAL (functional)  | same         |
//! | TRIGGER2 -> EMOTION  | constant   | constant                       |
//! | TRIGGER3 -> EMOTION  | constant   | constant                       |
//! | EMOTION -> GOAL      | constant   | constant                       |
//! | EMOTION -> BIAS      | constant   | constant                       |
//! | GOAL -> BIAS         | constant   | constant                       |
//! | GP -> GOAL           |            | constant                       |
//! | BELIEF -> TRIGGER1   |            | scaled by GP (functional)      |
//! | TRIGGER1 -> EMOTION  |            | constant                       |
//!
//! With `functional = false` every linkage uses the constant family.

mod catalog;
mod vocab;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fcm::{ConceptId, ConceptKind, ConceptSpec, Linkage, Network, Realisation, Threshold, WeightFunction};

pub use catalog::{
    bundled_scenarios, parse_scenarios_csv, write_scenarios_csv, Scenario, BUNDLED_SCENARIOS_CSV,
};
pub use vocab::{
    dequantize_input, dequantize_response, quantize_input, quantize_response, snap_to_level, InputConcept,
    ResponseConcept, RESPONSE_LEVELS,
};

/// Canonical concept ids shared by both scenario networks.
pub mod ids {
    use crate::fcm::ConceptId;

    pub const BELIEF: ConceptId = ConceptId(1);
    pub const GOAL: ConceptId = ConceptId(2);
    pub const EMOTION: ConceptId = ConceptId(3);
    pub const TRIGGER2: ConceptId = ConceptId(4);
    pub const TRIGGER3: ConceptId = ConceptId(5);
    pub const BIAS: ConceptId = ConceptId(6);
    pub const RPK: ConceptId = ConceptId(7);
    pub const GWK: ConceptId = ConceptId(8);
    pub const GP: ConceptId = ConceptId(9);
    pub const TRIGGER1: ConceptId = ConceptId(10);

    /// Concepts on the emotion path, absent from the belief-goal model.
    pub const EMOTION_PATH: [ConceptId; 5] = [EMOTION, TRIGGER2, TRIGGER3, BIAS, TRIGGER1];
}

/// Weight parameter names.
pub mod params {
    pub const RPK_BELIEF_W: &str = "rpk_belief_w";
    pub const BIAS_BELIEF_W: &str = "bias_belief_w";
    pub const GOAL_W_MINUS: &str = "goal_w_minus";
    pub const GOAL_W_PLUS: &str = "goal_w_plus";
    /// Constant belief -> goal weight used when linkages are not functional.
    pub const GOAL_W: &str = "goal_w";
    pub const TRIGGER2_W: &str = "trigger2_w";
    pub const TRIGGER3_W_BASE: &str = "trigger3_w_base";
    pub const TRIGGER1_W_BASE: &str = "trigger1_w_base";
    pub const TRIGGER1_EMOTION_W: &str = "trigger1_emotion_w";
    pub const TRIGGER2_EMOTION_W: &str = "trigger2_emotion_w";
    pub const TRIGGER3_EMOTION_W: &str = "trigger3_emotion_w";
    pub const EMOTION_GOAL_W: &str = "emotion_goal_w";
    pub const EMOTION_BIAS_W: &str = "emotion_bias_w";
    pub const GOAL_BIAS_W: &str = "goal_bias_w";
    pub const GP_GOAL_W: &str = "gp_goal_w";
}

/// Named weight parameters in declaration order. Every entry lies in [-1, 1].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "IndexMap<String, f64>", into = "IndexMap<String, f64>")]
pub struct WeightVector {
    entries: IndexMap<String, f64>,
}

impl WeightVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Calibrated defaults for every linkage parameter of both scenarios.
    pub fn defaults() -> Self {
        use params::*;
        let mut w = Self::new();
        for (name, v) in [
            (RPK_BELIEF_W, 0.8),
            (BIAS_BELIEF_W, 0.3),
            (GOAL_W_MINUS, 0.5),
            (GOAL_W_PLUS, 0.1),
            (GOAL_W, 0.3),
            (TRIGGER2_W, 0.2),
            (TRIGGER3_W_BASE, 0.25),
            (TRIGGER1_W_BASE, 0.3),
            (TRIGGER1_EMOTION_W, 1.0),
            (TRIGGER2_EMOTION_W, 1.0),
            (TRIGGER3_EMOTION_W, 1.0),
            (EMOTION_GOAL_W, 0.5),
            (EMOTION_BIAS_W, 0.4),
            (GOAL_BIAS_W, 0.2),
            (GP_GOAL_W, 0.1),
        ] {
            w.set(name, v).expect("defaults are in range");
        }
        w
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !value.is_finite() || value.abs() > 1.0 {
            return Err(Error::WeightOutOfRange {
                name: name.to_string(),
                value,
            });
        }
        self.entries.insert(name.to_string(), value);
        Ok(())
    }

    pub fn with(mut self, name: &str, value: f64) -> Result<Self> {
        self.set(name, value)?;
        Ok(self)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.get(name).copied()
    }

    /// Copy of `self` with every entry of `other` written over it.
    pub fn overlay(&self, other: &WeightVector) -> WeightVector {
        let mut out = self.clone();
        for (k, &v) in &other.entries {
            out.entries.insert(k.clone(), v);
        }
        out
    }

    /// Sub-vector restricted to `names`, in that order.
    pub fn project(&self, names: &[&str]) -> Result<WeightVector> {
        let mut out = WeightVector::new();
        for &n in names {
            let v = self.get(n).ok_or_else(|| Error::MissingWeight {
                param: n.to_string(),
                linkage: "projection".into(),
            })?;
            out.set(n, v)?;
        }
        Ok(out)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.values().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl TryFrom<IndexMap<String, f64>> for WeightVector {
    type Error = Error;

    fn try_from(map: IndexMap<String, f64>) -> Result<Self> {
        let mut w = WeightVector::new();
        for (k, v) in map {
            w.set(&k, v)?;
        }
        Ok(w)
    }
}

impl From<WeightVector> for IndexMap<String, f64> {
    fn from(w: WeightVector) -> Self {
        w.entries
    }
}

/// Self-persistence coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Alphas {
    pub belief: f64,
    pub goal: f64,
    pub emotion: f64,
    pub trigger: f64,
    pub bias: f64,
}

impl Default for Alphas {
    fn default() -> Self {
        Self {
            belief: 0.2,
            goal: 0.2,
            emotion: 0.2,
            trigger: 0.0,
            bias: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkKind {
    Scenario1,
    Scenario2,
}

struct Builder<'a> {
    weights: &'a WeightVector,
    linkages: Vec<Linkage>,
}

impl Builder<'_> {
    fn param(&self, name: &str, linkage: &str) -> Result<f64> {
        self.weights.get(name).ok_or_else(|| Error::MissingWeight {
            param: name.to_string(),
            linkage: linkage.to_string(),
        })
    }

    fn constant(&mut self, cause: ConceptId, effect: ConceptId, name: &str, label: &str) -> Result<()> {
        let w = self.param(name, label)?;
        self.linkages
            .push(Linkage::simple(cause, effect, WeightFunction::constant(w)?));
        Ok(())
    }
}

fn build(kind: NetworkKind, weights: &WeightVector, alphas: &Alphas, functional: bool) -> Result<Network> {
    use ids::*;
    use params::*;

    let mut concepts = vec![
        ConceptSpec::new(BELIEF.0, "belief", ConceptKind::State),
        ConceptSpec::new(GOAL.0, "goal", ConceptKind::State),
        ConceptSpec::new(EMOTION.0, "emotion", ConceptKind::State),
        ConceptSpec::new(TRIGGER2.0, "trigger2", ConceptKind::Auxiliary),
        ConceptSpec::new(TRIGGER3.0, "trigger3", ConceptKind::Auxiliary),
        ConceptSpec::new(BIAS.0, "bias", ConceptKind::Auxiliary),
        ConceptSpec::new(RPK.0, "rpk", ConceptKind::Input),
    ];
    let scenario2 = kind == NetworkKind::Scenario2;
    if scenario2 {
        concepts.push(ConceptSpec::new(GWK.0, "gwk", ConceptKind::Parameter));
        concepts.push(ConceptSpec::new(GP.0, "gp", ConceptKind::Parameter));
        concepts.push(ConceptSpec::new(TRIGGER1.0, "trigger1", ConceptKind::Auxiliary));
    }

    let mut b = Builder {
        weights,
        linkages: Vec::new(),
    };

    let label = "rpk->belief";
    let w = b.param(RPK_BELIEF_W, label)?;
    if scenario2 && functional {
        // effective weight w/2 * (1 + gwk) spans [0, w] as gwk goes -1 -> 1
        let g = WeightFunction::affine_in_intermediate(w / 2.0, w / 2.0)?;
        b.linkages.push(Linkage::complex(RPK, BELIEF, GWK, g));
    } else {
        b.linkages
            .push(Linkage::simple(RPK, BELIEF, WeightFunction::constant(w)?));
    }

    b.constant(BIAS, BELIEF, BIAS_BELIEF_W, "bias->belief")?;

    let label = "belief->goal";
    let f = if functional {
        WeightFunction::piecewise_sign(b.param(GOAL_W_MINUS, label)?, b.param(GOAL_W_PLUS, label)?)?
    } else {
        WeightFunction::constant(b.param(GOAL_W, label)?)?
    };
    b.linkages.push(Linkage::simple(BELIEF, GOAL, f));

    b.constant(BELIEF, TRIGGER2, TRIGGER2_W, "belief->trigger2")?;

    let w = b.param(TRIGGER3_W_BASE, "belief->trigger3")?;
    b.linkages.push(if functional {
        Linkage::complex(BELIEF, TRIGGER3, GOAL, WeightFunction::scaled_by_intermediate(w)?)
    } else {
        Linkage::simple(BELIEF, TRIGGER3, WeightFunction::constant(w)?)
    });

    b.constant(TRIGGER2, EMOTION, TRIGGER2_EMOTION_W, "trigger2->emotion")?;
    b.constant(TRIGGER3, EMOTION, TRIGGER3_EMOTION_W, "trigger3->emotion")?;
    b.constant(EMOTION, GOAL, EMOTION_GOAL_W, "emotion->goal")?;
    b.constant(EMOTION, BIAS, EMOTION_BIAS_W, "emotion->bias")?;
    b.constant(GOAL, BIAS, GOAL_BIAS_W, "goal->bias")?;

    if scenario2 {
        b.constant(GP, GOAL, GP_GOAL_W, "gp->goal")?;
        let w = b.param(TRIGGER1_W_BASE, "belief->trigger1")?;
        b.linkages.push(if functional {
            Linkage::complex(BELIEF, TRIGGER1, GP, WeightFunction::scaled_by_intermediate(w)?)
        } else {
            Linkage::simple(BELIEF, TRIGGER1, WeightFunction::constant(w)?)
        });
        b.constant(TRIGGER1, EMOTION, TRIGGER1_EMOTION_W, "trigger1->emotion")?;
    }

    let mut alpha = BTreeMap::from([
        (BELIEF, alphas.belief),
        (GOAL, alphas.goal),
        (EMOTION, alphas.emotion),
        (TRIGGER2, alphas.trigger),
        (TRIGGER3, alphas.trigger),
        (BIAS, alphas.bias),
    ]);
    if scenario2 {
        alpha.insert(TRIGGER1, alphas.trigger);
    }

    Network::new(concepts, b.linkages, alpha, Threshold::Clamp)
}

/// Scenario-1 network (no general world knowledge or preferences).
pub fn build_scenario1(weights: &WeightVector, functional: bool) -> Result<Network> {
    build(NetworkKind::Scenario1, weights, &Alphas::default(), functional)
}

/// Scenario-2 network (adds GWK, GP and emotion trigger 1).
pub fn build_scenario2(weights: &WeightVector, functional: bool) -> Result<Network> {
    build(NetworkKind::Scenario2, weights, &Alphas::default(), functional)
}

pub fn build_network(
    kind: NetworkKind,
    weights: &WeightVector,
    alphas: &Alphas,
    functional: bool,
) -> Result<Network> {
    build(kind, weights, alphas, functional)
}

/// Input realisations of one scenario. GWK and GP are only read by
/// scenario-2 networks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInputs {
    pub rpk: Realisation,
    pub gwk: Option<Realisation>,
    pub gp: Option<Realisation>,
}

impl ScenarioInputs {
    pub fn new(rpk: f64, gwk: f64, gp: f64) -> Result<Self> {
        Ok(Self {
            rpk: Realisation::new(rpk)?,
            gwk: Some(Realisation::new(gwk)?),
            gp: Some(Realisation::new(gp)?),
        })
    }

    pub fn rpk_only(rpk: f64) -> Result<Self> {
        Ok(Self {
            rpk: Realisation::new(rpk)?,
            gwk: None,
            gp: None,
        })
    }
}

/// Initial values of the fast-dynamics state variables; auxiliaries start at 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InitialConditions {
    pub belief: f64,
    pub goal: f64,
    pub emotion: f64,
}

impl Default for InitialConditions {
    fn default() -> Self {
        Self {
            belief: 0.0,
            goal: 0.0,
            emotion: 0.0,
        }
    }
}

impl InitialConditions {
    pub fn with_goal(goal: f64) -> Self {
        Self {
            goal,
            ..Self::default()
        }
    }
}

/// Initial state vector for a scenario network. Concepts missing from `net`
/// are skipped, so the same call serves both scenarios and the reduced
/// belief-goal network.
pub fn initial_state(net: &Network, inputs: &ScenarioInputs, init: &InitialConditions) -> Result<Vec<f64>> {
    let mut assign = vec![(ids::RPK, inputs.rpk.value())];
    for (id, v, name) in [(ids::GWK, inputs.gwk, "GWK"), (ids::GP, inputs.gp, "GP")] {
        if net.contains(id) {
            let v = v.ok_or_else(|| {
                Error::InvalidScenario(format!("{name} is required by this network but was not given"))
            })?;
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
    net.state_with(&assign)
}

/// The four model variants compared in the survey experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelVariant {
    M1,
    M2,
    M3,
    M4,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 4] = [ModelVariant::M1, ModelVariant::M2, ModelVariant::M3, ModelVariant::M4];

    pub fn network_kind(self) -> NetworkKind {
        match self {
            ModelVariant::M2 => NetworkKind::Scenario1,
            _ => NetworkKind::Scenario2,
        }
    }

    pub fn functional(self) -> bool {
        self != ModelVariant::M3
    }

    pub fn personalized(self) -> bool {
        self != ModelVariant::M4
    }

    /// Parameters identified per participant (or per population for M4).
    pub fn identified_params(self) -> &'static [&'static str] {
        use params::*;
        match self {
            ModelVariant::M1 | ModelVariant::M4 => &[
                GOAL_W_MINUS,
                GOAL_W_PLUS,
                TRIGGER2_W,
                TRIGGER3_W_BASE,
                TRIGGER1_W_BASE,
                EMOTION_BIAS_W,
                GOAL_BIAS_W,
            ],
            ModelVariant::M2 => &[
                GOAL_W_MINUS,
                GOAL_W_PLUS,
                TRIGGER2_W,
                TRIGGER3_W_BASE,
                EMOTION_BIAS_W,
                GOAL_BIAS_W,
            ],
            ModelVariant::M3 => &[
                GOAL_W,
                TRIGGER2_W,
                TRIGGER3_W_BASE,
                TRIGGER1_W_BASE,
                EMOTION_BIAS_W,
                GOAL_BIAS_W,
            ],
        }
    }

    pub fn build(self, weights: &WeightVector, alphas: &Alphas) -> Result<Network> {
        build(self.network_kind(), weights, alphas, self.functional())
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelVariant::M1 => "M1",
            ModelVariant::M2 => "M2",
            ModelVariant::M3 => "M3",
            ModelVariant::M4 => "M4",
        }
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().trim_start_matches('M') {
            "1" => Ok(ModelVariant::M1),
            "2" => Ok(ModelVariant::M2),
            "3" => Ok(ModelVariant::M3),
            "4" => Ok(ModelVariant::M4),
            _ => Err(Error::Vocabulary {
                concept: "model variant",
                term: s.to_string(),
                valid: "M1, M2, M3, M4".into(),
            }),
        }
    }
}
