use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{FittedWeights, ModelSetup, Survey};
use crate::error::{Error, Result};
use crate::format::sig9;
use crate::scenarios::{ModelVariant, ResponseConcept, Scenario};

/// (training sets, validation sets) of the three validation runs.
pub const BATCH_SPLITS: [(&[u8], &[u8]); 3] = [
    (&[3, 4, 5, 6], &[1, 2]),
    (&[1, 2, 5, 6], &[3, 4]),
    (&[1, 2, 3, 4, 5], &[6]),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    /// 1-based.
    pub id: u8,
    pub training_sets: Vec<u8>,
    pub validation_sets: Vec<u8>,
    pub training: Vec<Scenario>,
    pub validation: Vec<Scenario>,
}

/// Splits a scenario catalogue into the three fixed train/validation runs.
pub fn make_batches(scenarios: &[Scenario]) -> Result<[Batch; 3]> {
    for set in 1..=6 {
        if !scenarios.iter().any(|s| s.set_id == set) {
            return Err(Error::MissingSet(set));
        }
    }
    let pick = |sets: &[u8]| -> Vec<Scenario> {
        scenarios
            .iter()
            .filter(|s| sets.contains(&s.set_id))
            .cloned()
            .collect()
    };
    let batch = |k: usize| {
        let (train, val) = BATCH_SPLITS[k];
        Batch {
            id: k as u8 + 1,
            training_sets: train.to_vec(),
            validation_sets: val.to_vec(),
            training: pick(train),
            validation: pick(val),
        }
    };
    Ok([batch(0), batch(1), batch(2)])
}

fn fitted<'a>(
    weights: &'a FittedWeights,
    model: ModelVariant,
    batch: u8,
    participant: &str,
) -> Result<&'a crate::scenarios::WeightVector> {
    weights
        .lookup(model, batch, participant)
        .ok_or_else(|| Error::MissingFit {
            model: model.to_string(),
            batch,
            participant: participant.to_string(),
        })
}

/// Per-scenario squared errors of all three concepts, one entry per
/// participant.
fn squared_errors(
    setup: &ModelSetup,
    model: ModelVariant,
    scenario: &Scenario,
    survey: &Survey,
    participants: &[String],
    weights: &FittedWeights,
    batch: u8,
) -> Result<Vec<[f64; 3]>> {
    participants
        .iter()
        .map(|p| {
            let observed = survey.require(p, &scenario.id)?.values();
            let predicted = setup.predict(model, fitted(weights, model, batch, p)?, scenario)?;
            Ok([0, 1, 2].map(|j| (predicted[j] - observed[j]).powi(2)))
        })
        .collect()
}

/// Mean over participants of the squared deviation for one concept and
/// scenario.
#[allow(clippy::too_many_arguments)]
pub fn mse_scenario(
    setup: &ModelSetup,
    model: ModelVariant,
    concept: ResponseConcept,
    scenario: &Scenario,
    survey: &Survey,
    participants: &[String],
    weights: &FittedWeights,
    batch: u8,
) -> Result<f64> {
    if participants.is_empty() {
        return Err(Error::Degenerate("no participants".into()));
    }
    let errs = squared_errors(setup, model, scenario, survey, participants, weights, batch)?;
    Ok(mean(errs.iter().map(|e| e[concept.index()])))
}

/// Mean of [`mse_scenario`] over a validation set.
#[allow(clippy::too_many_arguments)]
pub fn mse_set(
    setup: &ModelSetup,
    model: ModelVariant,
    concept: ResponseConcept,
    validation: &[Scenario],
    survey: &Survey,
    participants: &[String],
    weights: &FittedWeights,
    batch: u8,
) -> Result<f64> {
    if validation.is_empty() {
        return Err(Error::Degenerate("validation set is empty".into()));
    }
    let per = validation
        .iter()
        .map(|s| mse_scenario(setup, model, concept, s, survey, participants, weights, batch))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean(per.into_iter()))
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MseScope {
    Scenario(String),
    Set(u8),
}

impl fmt::Display for MseScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MseScope::Scenario(id) => f.write_str(id),
            MseScope::Set(n) => write!(f, "set{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseRow {
    pub model: ModelVariant,
    pub concept: ResponseConcept,
    pub batch: u8,
    pub scope: MseScope,
    pub mse: f64,
}

/// Summary line: validation MSE per batch and over all evaluated validation
/// scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub model: ModelVariant,
    pub concept: ResponseConcept,
    pub batches: [Option<f64>; 3],
    pub overall: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub rows: Vec<MseRow>,
}

impl EvaluationReport {
    fn scenario_rows(&self, model: ModelVariant, concept: ResponseConcept) -> impl Iterator<Item = &MseRow> {
        self.rows.iter().filter(move |r| {
            r.model == model && r.concept == concept && matches!(r.scope, MseScope::Scenario(_))
        })
    }

    /// Mean over the validation scenarios of one batch.
    pub fn batch_mse(&self, model: ModelVariant, concept: ResponseConcept, batch: u8) -> Option<f64> {
        let v: Vec<f64> = self
            .scenario_rows(model, concept)
            .filter(|r| r.batch == batch)
            .map(|r| r.mse)
            .collect();
        (!v.is_empty()).then(|| mean(v.into_iter()))
    }

    /// Mean over every validation scenario in the report.
    pub fn overall(&self, model: ModelVariant, concept: ResponseConcept) -> Option<f64> {
        let v: Vec<f64> = self.scenario_rows(model, concept).map(|r| r.mse).collect();
        (!v.is_empty()).then(|| mean(v.into_iter()))
    }

    pub fn models(&self) -> Vec<ModelVariant> {
        let mut m: Vec<_> = self.rows.iter().map(|r| r.model).collect();
        m.sort();
        m.dedup();
        m
    }

    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut out = Vec::new();
        for model in self.models() {
            for concept in ResponseConcept::ALL {
                let Some(overall) = self.overall(model, concept) else {
                    continue;
                };
                out.push(SummaryRow {
                    model,
                    concept,
                    batches: [1, 2, 3].map(|b| self.batch_mse(model, concept, b)),
                    overall,
                });
            }
        }
        out
    }

    /// `model,concept,batch,scenario_or_set,mse`
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["model", "concept", "batch", "scenario_or_set", "mse"])?;
        for r in &self.rows {
            w.write_record([
                r.model.as_str(),
                r.concept.as_str(),
                &r.batch.to_string(),
                &r.scope.to_string(),
                &sig9(r.mse),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `model,concept,batch1,batch2,batch3,overall`; batches that were not
/// evaluated are left blank.
pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["model", "concept", "batch1", "batch2", "batch3", "overall"])?;
    for r in rows {
        let mut rec = vec![r.model.to_string(), r.concept.to_string()];
        rec.extend(r.batches.iter().map(|b| b.map(sig9).unwrap_or_default()));
        rec.push(sig9(r.overall));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Validation MSE of each model on each batch, at scenario and set level.
pub fn evaluate(
    setup: &ModelSetup,
    models: &[ModelVariant],
    batches: &[&Batch],
    survey: &Survey,
    participants: &[String],
    weights: &FittedWeights,
) -> Result<EvaluationReport> {
    if participants.is_empty() {
        return Err(Error::Degenerate("no participants".into()));
    }
    let mut rows = Vec::new();
    for &model in models {
        for batch in batches {
            if batch.validation.is_empty() {
                return Err(Error::Degenerate(format!("batch {} has no validation scenarios", batch.id)));
            }
            // per set: (sum of scenario MSEs, count) per concept
            let mut sets: BTreeMap<u8, ([f64; 3], usize)> = BTreeMap::new();
            let mut scenario_rows = Vec::new();
            for s in &batch.validation {
                let errs = squared_errors(setup, model, s, survey, participants, weights, batch.id)?;
                let acc = sets.entry(s.set_id).or_insert(([0.0; 3], 0));
                acc.1 += 1;
                for concept in ResponseConcept::ALL {
                    let mse = mean(errs.iter().map(|e| e[concept.index()]));
                    acc.0[concept.index()] += mse;
                    scenario_rows.push(MseRow {
                        model,
                        concept,
                        batch: batch.id,
                        scope: MseScope::Scenario(s.id.clone()),
                        mse,
                    });
                }
            }
            rows.extend(scenario_rows);
            for (set, (sums, n)) in sets {
                for concept in ResponseConcept::ALL {
                    rows.push(MseRow {
                        model,
                        concept,
                        batch: batch.id,
                        scope: MseScope::Set(set),
                        mse: sums[concept.index()] / n as f64,
                    });
                }
            }
        }
    }
    Ok(EvaluationReport { rows })
}
