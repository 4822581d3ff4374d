//! Fitting model variants to survey responses.
//!
//! Per-participant weights are found by grid search over the linkage
//! parameters tied to personality (belief -> goal, the emotion triggers and
//! the bias), minimising the squared error between converged model outputs
//! and reported belief/goal/emotion over the training scenarios.

mod eval;
mod grid;
mod survey;
mod synth;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fcm::{Network, DEFAULT_MAX_STEPS};
use crate::scenarios::{ids, initial_state, Alphas, InitialConditions, ModelVariant, Scenario, WeightVector};

pub use eval::{
    evaluate, make_batches, mse_scenario, mse_set, write_summary_csv, Batch, EvaluationReport, MseRow,
    MseScope, SummaryRow, BATCH_SPLITS,
};
pub use grid::{
    identify, identify_population, loss, population_loss, FittedEntry, FittedWeights, GridSpec,
    Identified, SearchMode,
};
pub use survey::{parse_survey_csv, write_survey_csv, Survey, SurveyRecord};
pub use synth::{draw_ground_truth, synthesize_participant, synthesize_population, SyntheticPopulation};

/// Tolerance used when simulating for identification. Runs stop early once
/// the sup-norm change drops below it.
pub const IDENTIFICATION_EPSILON: f64 = 1e-9;

/// Everything besides the identified parameters that determines a model's
/// prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSetup {
    /// Values for every linkage parameter; identified parameters are
    /// overlaid on top.
    pub base: WeightVector,
    pub alphas: Alphas,
    pub initial: InitialConditions,
    pub max_steps: usize,
    pub epsilon: f64,
}

impl Default for ModelSetup {
    fn default() -> Self {
        Self {
            base: WeightVector::defaults(),
            alphas: Alphas::default(),
            // survey scenarios open with the participant wanting to do the activity
            initial: InitialConditions::with_goal(1.0),
            max_steps: DEFAULT_MAX_STEPS,
            epsilon: IDENTIFICATION_EPSILON,
        }
    }
}

impl ModelSetup {
    pub fn network(&self, model: ModelVariant, identified: &WeightVector) -> Result<Network> {
        model.build(&self.base.overlay(identified), &self.alphas)
    }

    /// Converged (belief, goal, emotion) of `net` for one scenario.
    pub fn outputs(&self, net: &Network, scenario: &Scenario) -> Result<[f64; 3]> {
        let init = initial_state(net, &scenario.inputs, &self.initial)?;
        let fin = net.final_state(&init, self.max_steps, self.epsilon)?;
        Ok([
            fin[net.position(ids::BELIEF)?],
            fin[net.position(ids::GOAL)?],
            fin[net.position(ids::EMOTION)?],
        ])
    }

    pub fn predict(&self, model: ModelVariant, identified: &WeightVector, scenario: &Scenario) -> Result<[f64; 3]> {
        let net = self.network(model, identified)?;
        self.outputs(&net, scenario)
    }
}
