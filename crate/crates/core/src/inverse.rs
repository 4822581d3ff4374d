//! Inferring an observed agent's emotion from its actions.
//!
//! Actions are predicted with an emotion-free belief-goal model. When the
//! observed action disagrees, candidate emotion values are injected into the
//! full network at the first history step and the value that reproduces both
//! the observed action and the estimated belief/goal history is reported.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fcm::{Network, Realisation, DEFAULT_EPSILON, DEFAULT_MAX_STEPS};
use crate::scenarios::{ids, initial_state, InitialConditions, ScenarioInputs};

/// Margin on the observed side of the threshold used when no candidate
/// emotion reproduces the observed action.
pub const IMPLIED_GOAL_MARGIN: f64 = 0.1;
/// Smallest trajectory change that counts as an emotional influence.
pub const INFLUENCE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Do,
    Abstain,
}

impl Action {
    pub fn as_str(self) -> &'static str {
        match self {
            Action::Do => "do",
            Action::Abstain => "abstain",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Action {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "do" => Ok(Action::Do),
            "abstain" => Ok(Action::Abstain),
            _ => Err(Error::Vocabulary {
                concept: "action",
                term: s.to_string(),
                valid: "do, abstain".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservedAction {
    pub action: Action,
    step: usize,
}

impl ObservedAction {
    pub fn new(action: Action, step: usize) -> Result<Self> {
        if step == 0 {
            return Err(Error::Inference("observation step must be at least 1".into()));
        }
        Ok(Self { action, step })
    }

    pub fn step(&self) -> usize {
        self.step
    }
}

/// Estimated belief and goal of the observed agent at one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeliefGoal {
    pub belief: f64,
    pub goal: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Explanation {
    Goal,
    Belief,
    Both,
}

impl Explanation {
    pub fn as_str(self) -> &'static str {
        match self {
            Explanation::Goal => "goal",
            Explanation::Belief => "belief",
            Explanation::Both => "both",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceResult {
    pub predicted_action: Action,
    pub observed_action: Action,
    pub discrepancy: bool,
    pub inferred_emotion: Option<Realisation>,
    pub explained_via: Option<Explanation>,
    /// No candidate emotion reproduces the observed action; the reported
    /// value is only the closest one.
    pub unexplained: bool,
}

impl InferenceResult {
    /// `predicted,observed,discrepancy,inferred_emotion,explained_via`.
    /// An unexplained discrepancy is reported as `unexplained` in the last
    /// column.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["predicted", "observed", "discrepancy", "inferred_emotion", "explained_via"])?;
        let via = if self.unexplained {
            "unexplained"
        } else {
            self.explained_via.map_or("", Explanation::as_str)
        };
        w.write_record([
            self.predicted_action.as_str(),
            self.observed_action.as_str(),
            if self.discrepancy { "true" } else { "false" },
            &self.inferred_emotion.map(|e| crate::format::sig9(e.value())).unwrap_or_default(),
            via,
        ])?;
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InferenceSettings {
    /// Action threshold on the goal, in (-1, 1).
    pub theta: f64,
    pub max_steps: usize,
    pub epsilon: f64,
    /// Spacing of the candidate emotion scan over [-1, 1].
    pub emotion_step: f64,
}

impl Default for InferenceSettings {
    fn default() -> Self {
        Self {
            theta: 0.0,
            max_steps: DEFAULT_MAX_STEPS,
            epsilon: DEFAULT_EPSILON,
            emotion_step: 0.1,
        }
    }
}

impl InferenceSettings {
    fn check(&self) -> Result<()> {
        check_theta(self.theta)?;
        if !(self.emotion_step > 0.0 && self.emotion_step <= 2.0) {
            return Err(Error::InvalidSettings(format!(
                "emotion step {} must be in (0, 2]",
                self.emotion_step
            )));
        }
        crate::fcm::check_settings(self.max_steps, self.epsilon)
    }

    fn candidates(&self) -> Vec<f64> {
        let n = (2.0 / self.emotion_step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| ((-1.0 + i as f64 * self.emotion_step) * 1e9).round() / 1e9)
            .collect()
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > -1.0 && theta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidSettings(format!("threshold {theta} must lie in (-1, 1)")))
    }
}

/// Do iff the goal exceeds `theta`.
pub fn rational_action_selection(goal: Realisation, theta: f64) -> Result<Action> {
    check_theta(theta)?;
    Ok(if goal.value() > theta { Action::Do } else { Action::Abstain })
}

/// The belief-goal core of a scenario network: emotion, triggers and bias
/// with all their linkages removed.
pub fn simplify(full: &Network) -> Result<Network> {
    full.without_concepts(&ids::EMOTION_PATH)
}

/// Action implied by the converged goal of the simplified network.
pub fn predict_action(simplified: &Network, initial: &[f64], settings: &InferenceSettings) -> Result<Action> {
    settings.check()?;
    if let Some(id) = ids::EMOTION_PATH.iter().find(|&&id| simplified.contains(id)) {
        return Err(Error::Inference(format!(
            "network still contains {} and is not a belief-goal model",
            simplified.concept(*id)?.name
        )));
    }
    let fin = simplified.final_state(initial, settings.max_steps, settings.epsilon)?;
    let goal = fin[simplified.position(ids::GOAL)?];
    rational_action_selection(Realisation::new(goal)?, settings.theta)
}

/// Belief and goal of `full` for steps 0..=steps with the given emotion at
/// step 0.
fn rollout(
    full: &Network,
    inputs: &ScenarioInputs,
    start: BeliefGoal,
    emotion: f64,
    steps: usize,
) -> Result<Vec<BeliefGoal>> {
    let init = InitialConditions {
        belief: start.belief,
        goal: start.goal,
        emotion,
    };
    let mut state = initial_state(full, inputs, &init)?;
    let (b, g) = (full.position(ids::BELIEF)?, full.position(ids::GOAL)?);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(BeliefGoal {
        belief: state[b],
        goal: state[g],
    });
    let mut next = state.clone();
    for _ in 0..steps {
        full.step_into(&state, &mut next);
        std::mem::swap(&mut state, &mut next);
        out.push(BeliefGoal {
            belief: state[b],
            goal: state[g],
        });
    }
    Ok(out)
}

struct Candidate {
    emotion: f64,
    action: Action,
    mismatch: f64,
    path: Vec<BeliefGoal>,
}

/// Explains a disagreement between `predicted` and `observed` by an emotion
/// present at the first history step.
///
/// `history[k]` is the estimated belief/goal at step k; at least two steps
/// are needed. Candidates whose action at the observation step matches the
/// observation are ranked by squared deviation from the history (steps 1
/// onward), then by smallest magnitude. Concepts of `full` other than the
/// inputs, belief, goal and emotion start at zero.
pub fn infer_emotion(
    full: &Network,
    inputs: &ScenarioInputs,
    predicted: Action,
    observed: ObservedAction,
    history: &[BeliefGoal],
    settings: &InferenceSettings,
) -> Result<InferenceResult> {
    settings.check()?;
    if history.len() < 2 {
        return Err(Error::Inference(format!(
            "need belief/goal estimates for at least 2 steps, got {}",
            history.len()
        )));
    }
    if !full.contains(ids::EMOTION) {
        return Err(Error::Inference("network has no emotion concept".into()));
    }
    for h in history {
        Realisation::new(h.belief)?;
        Realisation::new(h.goal)?;
    }
    if observed.action == predicted {
        return Ok(InferenceResult {
            predicted_action: predicted,
            observed_action: observed.action,
            discrepancy: false,
            inferred_emotion: None,
            explained_via: None,
            unexplained: false,
        });
    }

    let horizon = observed.step.max(history.len() - 1);
    let mut candidates = Vec::new();
    for e in settings.candidates() {
        let path = rollout(full, inputs, history[0], e, horizon)?;
        let action = rational_action_selection(Realisation::new(path[observed.step].goal)?, settings.theta)?;
        let mismatch = history[1..]
            .iter()
            .zip(&path[1..])
            .map(|(h, p)| (h.belief - p.belief).powi(2) + (h.goal - p.goal).powi(2))
            .sum::<f64>();
        candidates.push(Candidate {
            emotion: e,
            action,
            mismatch,
            path,
        });
    }
    let by_magnitude = |a: &Candidate, b: &Candidate| a.emotion.abs().total_cmp(&b.emotion.abs()).then(a.emotion.total_cmp(&b.emotion));

    let feasible = candidates
        .iter()
        .filter(|c| c.action == observed.action)
        .min_by(|a, b| a.mismatch.total_cmp(&b.mismatch).then_with(|| by_magnitude(a, b)));
    let (chosen, unexplained) = match feasible {
        Some(c) => (c, false),
        None => {
            let implied = match observed.action {
                Action::Do => settings.theta + IMPLIED_GOAL_MARGIN,
                Action::Abstain => settings.theta - IMPLIED_GOAL_MARGIN,
            };
            let gap = |c: &Candidate| (c.path[observed.step].goal - implied).abs();
            let c = candidates
                .iter()
                .min_by(|a, b| gap(a).total_cmp(&gap(b)).then_with(|| by_magnitude(a, b)))
                .expect("at least one candidate");
            (c, true)
        }
    };

    let baseline = rollout(full, inputs, history[0], 0.0, horizon)?;
    let shifted = |f: fn(&BeliefGoal) -> f64| {
        chosen
            .path
            .iter()
            .zip(&baseline)
            .any(|(a, b)| (f(a) - f(b)).abs() > INFLUENCE_TOLERANCE)
    };
    let explained_via = match (shifted(|p| p.goal), shifted(|p| p.belief)) {
        (true, true) => Some(Explanation::Both),
        (true, false) => Some(Explanation::Goal),
        (false, true) => Some(Explanation::Belief),
        (false, false) => None,
    };

    Ok(InferenceResult {
        predicted_action: predicted,
        observed_action: observed.action,
        discrepancy: true,
        inferred_emotion: Some(Realisation::new(chosen.emotion)?),
        explained_via,
        unexplained,
    })
}

/// Reads a `step,action` file holding exactly one observation.
pub fn parse_observation_csv<R: Read>(input: R) -> Result<ObservedAction> {
    #[derive(Deserialize)]
    struct Row {
        step: usize,
        action: String,
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut found = None;
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let line = i as u64 + 2;
        let parse_err = |message: String| Error::Parse { line, message };
        let row = row.map_err(|e| parse_err(e.to_string()))?;
        if found.is_some() {
            return Err(parse_err("expected a single observation".into()));
        }
        let action = row.action.parse().map_err(|e: Error| parse_err(e.to_string()))?;
        found = Some(ObservedAction::new(action, row.step).map_err(|e| parse_err(e.to_string()))?);
    }
    found.ok_or_else(|| Error::Degenerate("observation file has no rows".into()))
}

/// Reads a `step,belief,goal` history with consecutive steps from 0.
pub fn parse_history_csv<R: Read>(input: R) -> Result<Vec<BeliefGoal>> {
    #[derive(Deserialize)]
    struct Row {
        step: usize,
        belief: f64,
        goal: f64,
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let line = i as u64 + 2;
        let parse_err = |message: String| Error::Parse { line, message };
        let row = row.map_err(|e| parse_err(e.to_string()))?;
        if row.step != out.len() {
            return Err(parse_err(format!("expected step {}, got {}", out.len(), row.step)));
        }
        for v in [row.belief, row.goal] {
            Realisation::new(v).map_err(|e| parse_err(e.to_string()))?;
        }
        out.push(BeliefGoal {
            belief: row.belief,
            goal: row.goal,
        });
    }
    Ok(out)
}
