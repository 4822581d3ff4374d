//! Linguistic terms and their numeric realisations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fcm::Realisation;

/// Inputs of the survey scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InputConcept {
    #[serde(rename = "GP")]
    GeneralPreference,
    #[serde(rename = "RPK")]
    RationallyPerceivedKnowledge,
    #[serde(rename = "GWK")]
    GeneralWorldKnowledge,
}

/// Concepts a participant reports on through the five-level sliding bars.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponseConcept {
    Belief,
    Goal,
    Emotion,
}

impl ResponseConcept {
    pub const ALL: [ResponseConcept; 3] = [
        ResponseConcept::Belief,
        ResponseConcept::Goal,
        ResponseConcept::Emotion,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ResponseConcept::Belief => "belief",
            ResponseConcept::Goal => "goal",
            ResponseConcept::Emotion => "emotion",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ResponseConcept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ResponseConcept {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "belief" => Ok(ResponseConcept::Belief),
            "goal" => Ok(ResponseConcept::Goal),
            "emotion" => Ok(ResponseConcept::Emotion),
            _ => Err(Error::Vocabulary {
                concept: "response concept",
                term: s.to_string(),
                valid: "belief, goal, emotion".into(),
            }),
        }
    }
}

const GP_TERMS: [(&str, f64); 7] = [
    ("Dislike a great deal", -1.0),
    ("Dislike a moderate amount", -0.66),
    ("Dislike a little", -0.33),
    ("No preference", 0.0),
    ("Like a little", 0.33),
    ("Like a moderate amount", 0.66),
    ("Like a great deal", 1.0),
];

const RPK_TERMS: [(&str, f64); 5] = [
    ("Heavy rain", -1.0),
    ("Light rain", -0.5),
    ("Unknown", 0.0),
    ("Cloudy", 0.5),
    ("Sunny", 1.0),
];

const GWK_TERMS: [(&str, f64); 3] = [
    ("Inaccurate", -0.4),
    ("Accurate", 0.2),
    ("Very accurate", 0.8),
];

/// The five sliding-bar levels.
pub const RESPONSE_LEVELS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

const BELIEF_TERMS: [&str; 5] = [
    "Heavy rain",
    "Light rain",
    "I do not know",
    "Partially sunny",
    "Sunny",
];
const GOAL_TERMS: [&str; 5] = [
    "I do not want it at all",
    "I do not want to do it",
    "I have no preference",
    "I want to do it",
    "I want it a lot",
];
const EMOTION_TERMS: [&str; 5] = ["Very unhappy", "Unhappy", "Nothing", "Happy", "Very happy"];

impl InputConcept {
    pub fn as_str(self) -> &'static str {
        match self {
            InputConcept::GeneralPreference => "GP",
            InputConcept::RationallyPerceivedKnowledge => "RPK",
            InputConcept::GeneralWorldKnowledge => "GWK",
        }
    }

    pub fn vocabulary(self) -> &'static [(&'static str, f64)] {
        match self {
            InputConcept::GeneralPreference => &GP_TERMS,
            InputConcept::RationallyPerceivedKnowledge => &RPK_TERMS,
            InputConcept::GeneralWorldKnowledge => &GWK_TERMS,
        }
    }
}

impl ResponseConcept {
    pub fn vocabulary(self) -> &'static [&'static str; 5] {
        match self {
            ResponseConcept::Belief => &BELIEF_TERMS,
            ResponseConcept::Goal => &GOAL_TERMS,
            ResponseConcept::Emotion => &EMOTION_TERMS,
        }
    }
}

fn matches(a: &str, b: &str) -> bool {
    a.trim().eq_ignore_ascii_case(b)
}

/// Looks up an input term. Matching ignores ASCII case and surrounding space.
pub fn quantize_input(concept: InputConcept, term: &str) -> Result<Realisation> {
    concept
        .vocabulary()
        .iter()
        .find(|(t, _)| matches(term, t))
        .map(|&(_, v)| Realisation::new(v).expect("table values are in range"))
        .ok_or_else(|| Error::Vocabulary {
            concept: concept.as_str(),
            term: term.to_string(),
            valid: concept
                .vocabulary()
                .iter()
                .map(|(t, _)| *t)
                .collect::<Vec<_>>()
                .join(", "),
        })
}

/// Term whose realisation equals `value` exactly.
pub fn dequantize_input(concept: InputConcept, value: Realisation) -> Option<&'static str> {
    concept
        .vocabulary()
        .iter()
        .find(|(_, v)| *v == value.value())
        .map(|(t, _)| *t)
}

pub fn quantize_response(concept: ResponseConcept, term: &str) -> Result<Realisation> {
    concept
        .vocabulary()
        .iter()
        .position(|t| matches(term, t))
        .map(|i| Realisation::new(RESPONSE_LEVELS[i]).expect("levels are in range"))
        .ok_or_else(|| Error::Vocabulary {
            concept: concept.as_str(),
            term: term.to_string(),
            valid: concept.vocabulary().join(", "),
        })
}

/// Index of the nearest response level; ties go to the level closer to zero.
fn nearest_level(value: f64) -> usize {
    let mut best = 0;
    for (i, &l) in RESPONSE_LEVELS.iter().enumerate().skip(1) {
        let d = (value - l).abs();
        let bd = (value - RESPONSE_LEVELS[best]).abs();
        if d < bd || (d == bd && l.abs() < RESPONSE_LEVELS[best].abs()) {
            best = i;
        }
    }
    best
}

/// Snaps a value to the nearest of the five response levels.
pub fn snap_to_level(value: Realisation) -> Realisation {
    Realisation::new(RESPONSE_LEVELS[nearest_level(value.value())]).expect("levels are in range")
}

pub fn dequantize_response(concept: ResponseConcept, value: Realisation) -> &'static str {
    concept.vocabulary()[nearest_level(value.value())]
}
