use std::cmp::Ordering;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ModelSetup, Survey};
use crate::error::{Error, Result};
use crate::scenarios::{ModelVariant, Scenario, WeightVector};

/// A sweep that improves the loss by less than this ends cyclic search.
const SWEEP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    /// Full Cartesian enumeration.
    Exhaustive,
    /// One parameter at a time, in declaration order.
    #[default]
    CyclicCoordinate,
}

/// Candidate values per parameter. Level lists are kept sorted and
/// deduplicated so that enumeration order is lexicographic.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    params: IndexMap<String, Vec<f64>>,
    pub mode: SearchMode,
    pub max_sweeps: usize,
}

impl GridSpec {
    pub fn new(params: IndexMap<String, Vec<f64>>, mode: SearchMode, max_sweeps: usize) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::InvalidGrid("no parameters".into()));
        }
        let mut clean = IndexMap::with_capacity(params.len());
        for (name, mut levels) in params {
            if levels.is_empty() {
                return Err(Error::InvalidGrid(format!("`{name}` has no levels")));
            }
            if let Some(bad) = levels.iter().find(|v| !v.is_finite() || v.abs() > 1.0) {
                return Err(Error::InvalidGrid(format!("`{name}` level {bad} is outside [-1, 1]")));
            }
            levels.sort_by(f64::total_cmp);
            levels.dedup();
            clean.insert(name, levels);
        }
        if max_sweeps == 0 {
            return Err(Error::InvalidGrid("max_sweeps must be at least 1".into()));
        }
        Ok(Self {
            params: clean,
            mode,
            max_sweeps,
        })
    }

    /// Evenly spaced levels from -1 to 1 (inclusive) with the given step.
    pub fn levels(step: f64) -> Result<Vec<f64>> {
        if !(step > 0.0 && step <= 2.0) {
            return Err(Error::InvalidGrid(format!("step {step} must be in (0, 2]")));
        }
        let n = (2.0 / step + 1e-9).floor() as usize;
        Ok((0..=n)
            .map(|i| ((-1.0 + i as f64 * step) * 1e9).round() / 1e9)
            .filter(|v| *v <= 1.0)
            .collect())
    }

    /// Same levels for every identified parameter of `model`.
    pub fn uniform(model: ModelVariant, step: f64, mode: SearchMode, max_sweeps: usize) -> Result<Self> {
        Self::for_params(model.identified_params(), step, mode, max_sweeps)
    }

    pub fn for_params(names: &[&str], step: f64, mode: SearchMode, max_sweeps: usize) -> Result<Self> {
        let levels = Self::levels(step)?;
        let params = names.iter().map(|n| (n.to_string(), levels.clone())).collect();
        Self::new(params, mode, max_sweeps)
    }

    /// Default grid: 9 levels with step 0.25, cyclic search with 3 sweeps.
    pub fn default_for(model: ModelVariant) -> Self {
        Self::uniform(model, 0.25, SearchMode::CyclicCoordinate, 3).expect("default grid is valid")
    }

    pub fn with_mode(mut self, mode: SearchMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_sweeps(mut self, sweeps: usize) -> Self {
        self.max_sweeps = sweeps.max(1);
        self
    }

    pub fn params(&self) -> &IndexMap<String, Vec<f64>> {
        &self.params
    }

    pub fn names(&self) -> Vec<&str> {
        self.params.keys().map(String::as_str).collect()
    }

    pub fn size(&self) -> usize {
        self.params.values().map(Vec::len).product()
    }

    fn check_against(&self, model: ModelVariant) -> Result<()> {
        let allowed = model.identified_params();
        for name in self.params.keys() {
            if !allowed.contains(&name.as_str()) {
                return Err(Error::InvalidGrid(format!(
                    "`{name}` is not identified for {model}; expected a subset of {}",
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    fn vector(&self, values: &[f64]) -> WeightVector {
        let mut w = WeightVector::new();
        for (name, &v) in self.params.keys().zip(values) {
            w.set(name, v).expect("grid levels are validated");
        }
        w
    }

    /// Values of the flat candidate index, first parameter most significant.
    fn decode(&self, mut idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.params.len()];
        for (k, levels) in self.params.values().enumerate().rev() {
            out[k] = levels[idx % levels.len()];
            idx /= levels.len();
        }
        out
    }
}

/// Result of a grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct Identified {
    /// Values of the searched parameters only.
    pub weights: WeightVector,
    pub loss: f64,
    /// Loss evaluations performed.
    pub evaluations: usize,
}

/// Training targets gathered once up front so that data gaps surface before
/// any simulation.
struct Objective<'a> {
    setup: &'a ModelSetup,
    model: ModelVariant,
    scenarios: Vec<&'a Scenario>,
    /// Per scenario, one target triple per participant.
    targets: Vec<Vec<[f64; 3]>>,
}

impl<'a> Objective<'a> {
    fn new(
        setup: &'a ModelSetup,
        model: ModelVariant,
        survey: &Survey,
        participants: &[String],
        training: &'a [Scenario],
    ) -> Result<Self> {
        let mut targets = Vec::with_capacity(training.len());
        for s in training {
            let row = participants
                .iter()
                .map(|p| survey.require(p, &s.id).map(|r| r.values()))
                .collect::<Result<Vec<_>>>()?;
            targets.push(row);
        }
        Ok(Self {
            setup,
            model,
            scenarios: training.iter().collect(),
            targets,
        })
    }

    fn eval(&self, identified: &WeightVector) -> Result<f64> {
        let net = self.setup.network(self.model, identified)?;
        let mut total = 0.0;
        for (s, targets) in self.scenarios.iter().zip(&self.targets) {
            let out = self.setup.outputs(&net, s)?;
            for t in targets {
                total += out.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            }
        }
        Ok(total)
    }
}

/// Squared-error loss of one participant over the training scenarios.
pub fn loss(
    setup: &ModelSetup,
    model: ModelVariant,
    identified: &WeightVector,
    survey: &Survey,
    participant: &str,
    training: &[Scenario],
) -> Result<f64> {
    Objective::new(setup, model, survey, &[participant.to_string()], training)?.eval(identified)
}

/// Loss summed over several participants.
pub fn population_loss(
    setup: &ModelSetup,
    model: ModelVariant,
    identified: &WeightVector,
    survey: &Survey,
    participants: &[String],
    training: &[Scenario],
) -> Result<f64> {
    Objective::new(setup, model, survey, participants, training)?.eval(identified)
}

/// Lower loss first, then the lexicographically smaller candidate.
fn better(a: &(f64, Vec<f64>), b: &(f64, Vec<f64>)) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| {
        a.1.iter()
            .zip(&b.1)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

fn search(objective: &Objective, grid: &GridSpec) -> Result<Identified> {
    match grid.mode {
        SearchMode::Exhaustive => exhaustive(objective, grid),
        SearchMode::CyclicCoordinate => cyclic(objective, grid),
    }
}

fn exhaustive(objective: &Objective, grid: &GridSpec) -> Result<Identified> {
    let total = grid.size();
    let best = (0..total)
        .into_par_iter()
        .map(|idx| {
            let values = grid.decode(idx);
            objective.eval(&grid.vector(&values)).map(|l| (l, values))
        })
        .try_reduce(
            || (f64::INFINITY, Vec::new()),
            |a, b| {
                if b.1.is_empty() || (!a.1.is_empty() && better(&a, &b).is_le()) {
                    Ok(a)
                } else {
                    Ok(b)
                }
            },
        )?;
    Ok(Identified {
        weights: grid.vector(&best.1),
        loss: best.0,
        evaluations: total,
    })
}

/// Grid level closest to `target`; ties go to the smaller level.
fn nearest(levels: &[f64], target: f64) -> f64 {
    let mut best = levels[0];
    for &l in &levels[1..] {
        if (l - target).abs() < (best - target).abs() {
            best = l;
        }
    }
    best
}

fn cyclic(objective: &Objective, grid: &GridSpec) -> Result<Identified> {
    let mut current: Vec<f64> = grid
        .params()
        .iter()
        .map(|(name, levels)| nearest(levels, objective.setup.base.get(name).unwrap_or(0.0)))
        .collect();
    let mut best_loss = objective.eval(&grid.vector(&current))?;
    let mut evaluations = 1;

    for _ in 0..grid.max_sweeps {
        let before = best_loss;
        for (k, levels) in grid.params().values().enumerate() {
            let candidates = levels
                .par_iter()
                .map(|&v| {
                    let mut values = current.clone();
                    values[k] = v;
                    objective.eval(&grid.vector(&values)).map(|l| (l, values))
                })
                .collect::<Result<Vec<_>>>()?;
            evaluations += candidates.len();
            let winner = candidates
                .into_iter()
                .min_by(better)
                .expect("levels are nonempty");
            best_loss = winner.0;
            current = winner.1;
        }
        if before - best_loss < SWEEP_TOLERANCE {
            break;
        }
    }
    Ok(Identified {
        weights: grid.vector(&current),
        loss: best_loss,
        evaluations,
    })
}

/// Grid search for one participant.
pub fn identify(
    setup: &ModelSetup,
    model: ModelVariant,
    survey: &Survey,
    participant: &str,
    training: &[Scenario],
    grid: &GridSpec,
) -> Result<Identified> {
    identify_population(setup, model, survey, &[participant.to_string()], training, grid)
}

/// Grid search with the loss summed over all given participants.
pub fn identify_population(
    setup: &ModelSetup,
    model: ModelVariant,
    survey: &Survey,
    participants: &[String],
    training: &[Scenario],
    grid: &GridSpec,
) -> Result<Identified> {
    grid.check_against(model)?;
    if training.is_empty() {
        return Err(Error::Degenerate("training set is empty".into()));
    }
    if participants.is_empty() {
        return Err(Error::Degenerate("no participants".into()));
    }
    let objective = Objective::new(setup, model, survey, participants, training)?;
    search(&objective, grid)
}

/// One fitted weight vector. `participant` is `None` for a population-level
/// fit that applies to everyone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedEntry {
    pub model: ModelVariant,
    pub batch: u8,
    pub participant: Option<String>,
    pub loss: f64,
    pub weights: WeightVector,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FittedWeights {
    pub entries: Vec<FittedEntry>,
}

impl FittedWeights {
    /// Weights that apply to `participant` for (model, batch).
    pub fn lookup(&self, model: ModelVariant, batch: u8, participant: &str) -> Option<&WeightVector> {
        let matching = |e: &&FittedEntry| e.model == model && e.batch == batch;
        self.entries
            .iter()
            .filter(matching)
            .find(|e| e.participant.as_deref() == Some(participant))
            .or_else(|| self.entries.iter().filter(matching).find(|e| e.participant.is_none()))
            .map(|e| &e.weights)
    }

    pub fn models(&self) -> Vec<ModelVariant> {
        let mut m: Vec<_> = self.entries.iter().map(|e| e.model).collect();
        m.sort();
        m.dedup();
        m
    }

    pub fn batches(&self, model: ModelVariant) -> Vec<u8> {
        let mut b: Vec<_> = self
            .entries
            .iter()
            .filter(|e| e.model == model)
            .map(|e| e.batch)
            .collect();
        b.sort();
        b.dedup();
        b
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
