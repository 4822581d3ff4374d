use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{ModelSetup, Survey, SurveyRecord};
use crate::error::{Error, Result};
use crate::fcm::Realisation;
use crate::scenarios::{snap_to_level, ModelVariant, Scenario, WeightVector};

/// Survey records of a participant whose responses are M1's converged
/// outputs under `truth`, optionally with Gaussian response noise (clamped
/// to [-1, 1]) and snapped to the five response levels.
pub fn synthesize_participant(
    setup: &ModelSetup,
    participant: &str,
    truth: &WeightVector,
    scenarios: &[Scenario],
    quantize: bool,
    seed: u64,
    noise_sd: f64,
) -> Result<Vec<SurveyRecord>> {
    let noise = if noise_sd > 0.0 {
        Some(Normal::new(0.0, noise_sd).map_err(|e| Error::InvalidSettings(e.to_string()))?)
    } else if noise_sd == 0.0 {
        None
    } else {
        return Err(Error::InvalidSettings(format!("noise sd {noise_sd} is negative")));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = setup.network(ModelVariant::M1, truth)?;
    scenarios
        .iter()
        .map(|s| {
            let out = setup.outputs(&net, s)?;
            let vals = out.map(|v| {
                let v = match &noise {
                    Some(n) => (v + n.sample(&mut rng)).clamp(-1.0, 1.0),
                    None => v,
                };
                let r = Realisation::new(v).expect("clamped output");
                if quantize {
                    snap_to_level(r)
                } else {
                    r
                }
            });
            Ok(SurveyRecord {
                participant_id: participant.to_string(),
                scenario_id: s.id.clone(),
                belief: vals[0],
                goal: vals[1],
                emotion: vals[2],
            })
        })
        .collect()
}

/// Uniform draw of every M1-identified parameter from `levels`.
pub fn draw_ground_truth<R: Rng>(rng: &mut R, levels: &[f64]) -> Result<WeightVector> {
    if levels.is_empty() {
        return Err(Error::InvalidGrid("no levels to draw from".into()));
    }
    let mut w = WeightVector::new();
    for name in ModelVariant::M1.identified_params() {
        w.set(name, *levels.choose(rng).expect("nonempty"))?;
    }
    Ok(w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticPopulation {
    pub seed: u64,
    pub quantized: bool,
    /// Ground-truth weights keyed by participant id.
    pub truths: IndexMap<String, WeightVector>,
    #[serde(skip)]
    pub survey: Survey,
}

impl SyntheticPopulation {
    pub fn participants(&self) -> Vec<String> {
        self.truths.keys().cloned().collect()
    }

    /// Ground truth as a JSON document.
    pub fn truth_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `count` participants `p01`, `p02`, ... with ground truths drawn from
/// `levels`. One seed drives both the draws and any response noise.
#[allow(clippy::too_many_arguments)]
pub fn synthesize_population(
    setup: &ModelSetup,
    count: usize,
    seed: u64,
    levels: &[f64],
    scenarios: &[Scenario],
    quantize: bool,
    noise_sd: f64,
) -> Result<SyntheticPopulation> {
    if count == 0 {
        return Err(Error::Degenerate("participant count must be at least 1".into()));
    }
    let width = count.to_string().len().max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut truths = IndexMap::with_capacity(count);
    let mut survey = Survey::default();
    for i in 1..=count {
        let id = format!("p{i:0width$}");
        let truth = draw_ground_truth(&mut rng, levels)?;
        let noise_seed = rng.gen();
        survey.extend(synthesize_participant(setup, &id, &truth, scenarios, quantize, noise_seed, noise_sd)?)?;
        truths.insert(id, truth);
    }
    Ok(SyntheticPopulation {
        seed,
        quantized: quantize,
        truths,
        survey,
    })
}
