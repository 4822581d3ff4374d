//! Extended fuzzy cognitive maps.
//!
//! A [`Network`] is a directed graph of bounded concepts. Each linkage carries
//! a [`WeightFunction`] that is re-evaluated at every step from the current
//! realisations, so the effective weight of an edge can depend on the sign of
//! its cause (simple linkages) or on the value of a third, intermediate
//! concept (complex linkages). Concepts of kind `state` and `auxiliary` are
//! updated synchronously by [`step`]; inputs and parameters are held fixed.

mod io;
mod simulate;
mod weight;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{write_trajectory_csv, NetworkDoc};
pub use simulate::{converged_value, simulate, step, ConvergedValue, Trajectory};
pub use weight::{evaluate_weight, Family, WeightFunction};

/// Default number of simulation steps, matching the 30-step horizon of the figures.
pub const DEFAULT_MAX_STEPS: usize = 30;
/// Default sup-norm convergence tolerance.
pub const DEFAULT_EPSILON: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConceptId(pub u32);

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}", self.0)
    }
}

/// A concept value, always within [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Realisation(f64);

impl Realisation {
    pub const ZERO: Realisation = Realisation(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && (-1.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::RealisationOutOfRange(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Realisation {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl<'de> Deserialize<'de> for Realisation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Realisation::new(v).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConceptKind {
    /// Fast-dynamics state variable (belief, goal, emotion).
    State,
    /// Instantaneous auxiliary variable (emotion triggers, bias).
    Auxiliary,
    Input,
    /// Slow-dynamics variable held constant over a run.
    Parameter,
}

impl ConceptKind {
    pub fn is_updatable(self) -> bool {
        matches!(self, ConceptKind::State | ConceptKind::Auxiliary)
    }
}

/// Closed subinterval of [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub const FULL: Interval = Interval { lo: -1.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_finite() && hi.is_finite() && -1.0 <= lo && lo <= hi && hi <= 1.0 {
            Ok(Self { lo, hi })
        } else {
            Err(Error::InvalidInterval { lo, hi })
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }
}

impl Default for Interval {
    fn default() -> Self {
        Self::FULL
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;

    fn try_from([lo, hi]: [f64; 2]) -> Result<Self> {
        Interval::new(lo, hi)
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConceptSpec {
    pub id: ConceptId,
    pub name: String,
    pub kind: ConceptKind,
    pub interval: Interval,
}

impl ConceptSpec {
    pub fn new(id: u32, name: impl Into<String>, kind: ConceptKind) -> Self {
        Self {
            id: ConceptId(id),
            name: name.into(),
            kind,
            interval: Interval::FULL,
        }
    }

    pub fn with_interval(mut self, interval: Interval) -> Self {
        self.interval = interval;
        self
    }
}

/// A directed edge `cause -> effect`, optionally modulated by an intermediate
/// concept through a side linkage.
#[derive(Debug, Clone, PartialEq)]
pub struct Linkage {
    pub cause: ConceptId,
    pub effect: ConceptId,
    pub intermediate: Option<ConceptId>,
    pub weight: WeightFunction,
}

impl Linkage {
    pub fn simple(cause: ConceptId, effect: ConceptId, weight: WeightFunction) -> Self {
        Self {
            cause,
            effect,
            intermediate: None,
            weight,
        }
    }

    pub fn complex(
        cause: ConceptId,
        effect: ConceptId,
        intermediate: ConceptId,
        weight: WeightFunction,
    ) -> Self {
        Self {
            cause,
            effect,
            intermediate: Some(intermediate),
            weight,
        }
    }

    pub fn is_complex(&self) -> bool {
        self.intermediate.is_some()
    }
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.intermediate {
            Some(l) => write!(f, "{}->{} (via {})", self.cause, self.effect, l),
            None => write!(f, "{}->{}", self.cause, self.effect),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Threshold {
    /// Clamp to the concept's admissible interval.
    #[default]
    Clamp,
}

impl Threshold {
    fn apply(self, x: f64, interval: &Interval) -> f64 {
        match self {
            Threshold::Clamp => interval.clamp(x),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct CompiledLinkage {
    cause: usize,
    effect: usize,
    intermediate: Option<usize>,
    weight: WeightFunction,
}

/// A validated extended FCM. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Network {
    concepts: Vec<ConceptSpec>,
    linkages: Vec<Linkage>,
    alpha: BTreeMap<ConceptId, f64>,
    threshold: Threshold,
    index: HashMap<ConceptId, usize>,
    compiled: Vec<CompiledLinkage>,
    alpha_by_pos: Vec<f64>,
    updatable: Vec<usize>,
}

impl Network {
    pub fn new(
        concepts: Vec<ConceptSpec>,
        linkages: Vec<Linkage>,
        alpha: BTreeMap<ConceptId, f64>,
        threshold: Threshold,
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(concepts.len());
        for (pos, c) in concepts.iter().enumerate() {
            if index.insert(c.id, pos).is_some() {
                return Err(Error::InvalidNetwork(format!("duplicate concept id {}", c.id)));
            }
        }
        let lookup = |id: ConceptId, role: &str, link: &Linkage| {
            index.get(&id).copied().ok_or_else(|| {
                Error::InvalidNetwork(format!("linkage {link}: {role} {id} does not exist"))
            })
        };

        let mut seen = std::collections::HashSet::new();
        let mut compiled = Vec::with_capacity(linkages.len());
        for link in &linkages {
            let cause = lookup(link.cause, "cause", link)?;
            let effect = lookup(link.effect, "effect", link)?;
            let intermediate = match link.intermediate {
                Some(l) => Some(lookup(l, "intermediate", link)?),
                None => None,
            };
            if link.cause == link.effect {
                return Err(Error::InvalidNetwork(format!(
                    "linkage {link}: cause and effect coincide"
                )));
            }
            if link.intermediate.is_some() != link.weight.family().needs_intermediate() {
                return Err(Error::InvalidNetwork(format!(
                    "linkage {link}: family {} {} an intermediate concept",
                    link.weight.family(),
                    if link.weight.family().needs_intermediate() {
                        "requires"
                    } else {
                        "does not take"
                    }
                )));
            }
            if !concepts[effect].kind.is_updatable() {
                return Err(Error::InvalidNetwork(format!(
                    "linkage {link}: effect {} is not a state or auxiliary concept",
                    link.effect
                )));
            }
            if !alpha.contains_key(&link.effect) {
                return Err(Error::InvalidNetwork(format!(
                    "no alpha coefficient for effect {}",
                    link.effect
                )));
            }
            if !seen.insert((link.cause, link.effect)) {
                return Err(Error::InvalidNetwork(format!(
                    "more than one linkage {}->{}",
                    link.cause, link.effect
                )));
            }
            compiled.push(CompiledLinkage {
                cause,
                effect,
                intermediate,
                weight: link.weight,
            });
        }

        let mut alpha_by_pos = vec![0.0; concepts.len()];
        for (&id, &a) in &alpha {
            let pos = *index
                .get(&id)
                .ok_or_else(|| Error::InvalidNetwork(format!("alpha for unknown concept {id}")))?;
            if !concepts[pos].kind.is_updatable() {
                return Err(Error::InvalidNetwork(format!(
                    "alpha given for non-updatable concept {id}"
                )));
            }
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::InvalidNetwork(format!(
                    "alpha for {id} is {a}, expected [0, 1]"
                )));
            }
            alpha_by_pos[pos] = a;
        }

        let updatable = concepts
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind.is_updatable())
            .map(|(i, _)| i)
            .collect();

        Ok(Self {
            concepts,
            linkages,
            alpha,
            threshold,
            index,
            compiled,
            alpha_by_pos,
            updatable,
        })
    }

    pub fn concepts(&self) -> &[ConceptSpec] {
        &self.concepts
    }

    pub fn linkages(&self) -> &[Linkage] {
        &self.linkages
    }

    pub fn alpha(&self) -> &BTreeMap<ConceptId, f64> {
        &self.alpha
    }

    pub fn threshold(&self) -> Threshold {
        self.threshold
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    /// Position of a concept in the state vector.
    pub fn position(&self, id: ConceptId) -> Result<usize> {
        self.index.get(&id).copied().ok_or(Error::UnknownConcept(id))
    }

    pub fn concept(&self, id: ConceptId) -> Result<&ConceptSpec> {
        Ok(&self.concepts[self.position(id)?])
    }

    pub fn contains(&self, id: ConceptId) -> bool {
        self.index.contains_key(&id)
    }

    /// Builds a state vector with the given assignments and zero elsewhere,
    /// clamping the implicit zero into each concept's interval.
    pub fn state_with(&self, assignments: &[(ConceptId, f64)]) -> Result<Vec<f64>> {
        let mut state: Vec<f64> = self
            .concepts
            .iter()
            .map(|c| c.interval.clamp(0.0))
            .collect();
        for &(id, v) in assignments {
            state[self.position(id)?] = v;
        }
        self.validate_state(&state)?;
        Ok(state)
    }

    pub fn validate_state(&self, state: &[f64]) -> Result<()> {
        if state.len() != self.concepts.len() {
            return Err(Error::InvalidState(format!(
                "expected {} entries, got {}",
                self.concepts.len(),
                state.len()
            )));
        }
        for (c, &v) in self.concepts.iter().zip(state) {
            if !v.is_finite() || !c.interval.contains(v) {
                return Err(Error::InvalidState(format!(
                    "{} ({}) = {v} is outside [{}, {}]",
                    c.name,
                    c.id,
                    c.interval.lo(),
                    c.interval.hi()
                )));
            }
        }
        Ok(())
    }

    /// Synchronous update of every state/auxiliary concept; `next` must have
    /// the same length as `current`.
    pub(crate) fn step_into(&self, current: &[f64], next: &mut [f64]) {
        next.copy_from_slice(current);
        let mut sums = vec![0.0; current.len()];
        for link in &self.compiled {
            let w = link
                .weight
                .eval_unchecked(current[link.cause], link.intermediate.map(|l| current[l]));
            sums[link.effect] += w * current[link.cause];
        }
        for &j in &self.updatable {
            let raw = sums[j] + self.alpha_by_pos[j] * current[j];
            next[j] = self.threshold.apply(raw, &self.concepts[j].interval);
        }
    }

    /// Largest absolute change over updatable concepts.
    pub(crate) fn sup_change(&self, a: &[f64], b: &[f64]) -> f64 {
        self.updatable
            .iter()
            .map(|&j| (a[j] - b[j]).abs())
            .fold(0.0, f64::max)
    }

    /// Runs the recurrence without recording intermediate vectors and returns
    /// the final state. Same stopping rule as [`simulate`].
    pub fn final_state(&self, initial: &[f64], max_steps: usize, epsilon: f64) -> Result<Vec<f64>> {
        check_settings(max_steps, epsilon)?;
        self.validate_state(initial)?;
        let mut cur = initial.to_vec();
        let mut next = vec![0.0; cur.len()];
        for _ in 0..max_steps {
            self.step_into(&cur, &mut next);
            let change = self.sup_change(&cur, &next);
            std::mem::swap(&mut cur, &mut next);
            if change < epsilon {
                break;
            }
        }
        Ok(cur)
    }

    /// Copy of this network without the given concepts and every linkage that
    /// touches them.
    pub fn without_concepts(&self, removed: &[ConceptId]) -> Result<Network> {
        let keep = |id: &ConceptId| !removed.contains(id);
        let concepts = self.concepts.iter().filter(|c| keep(&c.id)).cloned().collect();
        let linkages = self
            .linkages
            .iter()
            .filter(|l| keep(&l.cause) && keep(&l.effect) && l.intermediate.map_or(true, |i| keep(&i)))
            .cloned()
            .collect();
        let alpha = self
            .alpha
            .iter()
            .filter(|(id, _)| keep(id))
            .map(|(&id, &a)| (id, a))
            .collect();
        Network::new(concepts, linkages, alpha, self.threshold)
    }
}

pub(crate) fn check_settings(max_steps: usize, epsilon: f64) -> Result<()> {
    if max_steps == 0 {
        return Err(Error::InvalidSettings("max_steps must be at least 1".into()));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidSettings(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    Ok(())
}
