use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::fcm::Realisation;
use crate::format::sig9;
use crate::scenarios::{dequantize_response, quantize_response, ResponseConcept};

#[derive(Debug, Clone, PartialEq)]
pub struct SurveyRecord {
    pub participant_id: String,
    pub scenario_id: String,
    pub belief: Realisation,
    pub goal: Realisation,
    pub emotion: Realisation,
}

impl SurveyRecord {
    pub fn values(&self) -> [f64; 3] {
        [self.belief.value(), self.goal.value(), self.emotion.value()]
    }

    pub fn get(&self, concept: ResponseConcept) -> Realisation {
        match concept {
            ResponseConcept::Belief => self.belief,
            ResponseConcept::Goal => self.goal,
            ResponseConcept::Emotion => self.emotion,
        }
    }
}

/// Survey responses keyed by (participant, scenario).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Survey {
    records: Vec<SurveyRecord>,
    index: HashMap<(String, String), usize>,
}

impl Survey {
    pub fn new(records: Vec<SurveyRecord>) -> Result<Self> {
        let mut s = Survey::default();
        for r in records {
            s.push(r)?;
        }
        Ok(s)
    }

    pub fn push(&mut self, record: SurveyRecord) -> Result<()> {
        let key = (record.participant_id.clone(), record.scenario_id.clone());
        if self.index.contains_key(&key) {
            return Err(Error::DuplicateRecord {
                participant: key.0,
                scenario: key.1,
            });
        }
        self.index.insert(key, self.records.len());
        self.records.push(record);
        Ok(())
    }

    pub fn extend(&mut self, records: impl IntoIterator<Item = SurveyRecord>) -> Result<()> {
        for r in records {
            self.push(r)?;
        }
        Ok(())
    }

    pub fn records(&self) -> &[SurveyRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, participant: &str, scenario: &str) -> Option<&SurveyRecord> {
        self.index
            .get(&(participant.to_string(), scenario.to_string()))
            .map(|&i| &self.records[i])
    }

    pub fn require(&self, participant: &str, scenario: &str) -> Result<&SurveyRecord> {
        self.get(participant, scenario).ok_or_else(|| Error::MissingRecord {
            participant: participant.to_string(),
            scenario: scenario.to_string(),
        })
    }

    /// Participant ids in sorted order.
    pub fn participants(&self) -> Vec<String> {
        self.records
            .iter()
            .map(|r| r.participant_id.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// True when every response sits on one of the five sliding-bar levels.
    pub fn is_quantized(&self) -> bool {
        self.records.iter().all(|r| {
            r.values()
                .iter()
                .all(|v| crate::scenarios::RESPONSE_LEVELS.contains(v))
        })
    }
}

/// Parses a survey in either term form
/// (`participant_id,scenario_id,belief_term,goal_term,emotion_term`) or
/// numeric form (`participant_id,scenario_id,belief,goal,emotion`).
pub fn parse_survey_csv<R: Read>(input: R) -> Result<Survey> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let pid = col("participant_id");
    let sid = col("scenario_id");
    let (Some(pid), Some(sid)) = (pid, sid) else {
        return Err(Error::Parse {
            line: 1,
            message: "header must contain participant_id and scenario_id".into(),
        });
    };
    let term_cols = [col("belief_term"), col("goal_term"), col("emotion_term")];
    let num_cols = [col("belief"), col("goal"), col("emotion")];
    let (cols, terms) = if term_cols.iter().all(Option::is_some) {
        (term_cols.map(Option::unwrap), true)
    } else if num_cols.iter().all(Option::is_some) {
        (num_cols.map(Option::unwrap), false)
    } else {
        return Err(Error::Parse {
            line: 1,
            message: "header needs belief_term,goal_term,emotion_term or belief,goal,emotion".into(),
        });
    };

    let mut survey = Survey::default();
    for (i, row) in rdr.records().enumerate() {
        let line = i as u64 + 2;
        let row = row.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let field = |c: usize| row.get(c).unwrap_or("");
        let mut vals = [Realisation::ZERO; 3];
        for (k, concept) in ResponseConcept::ALL.into_iter().enumerate() {
            let raw = field(cols[k]);
            let parsed = if terms {
                quantize_response(concept, raw)
            } else {
                raw.parse::<f64>()
                    .map_err(|e| Error::InvalidState(format!("{concept} `{raw}`: {e}")))
                    .and_then(Realisation::new)
            };
            vals[k] = parsed.map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
        }
        let (participant_id, scenario_id) = (field(pid).to_string(), field(sid).to_string());
        if participant_id.is_empty() || scenario_id.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty participant_id or scenario_id".into(),
            });
        }
        survey
            .push(SurveyRecord {
                participant_id,
                scenario_id,
                belief: vals[0],
                goal: vals[1],
                emotion: vals[2],
            })
            .map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
    }
    if survey.is_empty() {
        return Err(Error::Degenerate("survey contains no records".into()));
    }
    Ok(survey)
}

/// Writes the term form when every response is on a sliding-bar level and
/// `numeric` is false, otherwise the numeric form.
pub fn write_survey_csv<W: Write>(survey: &Survey, out: W, numeric: bool) -> Result<()> {
    let terms = !numeric && survey.is_quantized();
    let mut w = csv::Writer::from_writer(out);
    if terms {
        w.write_record(["participant_id", "scenario_id", "belief_term", "goal_term", "emotion_term"])?;
    } else {
        w.write_record(["participant_id", "scenario_id", "belief", "goal", "emotion"])?;
    }
    for r in survey.records() {
        let mut row = vec![r.participant_id.clone(), r.scenario_id.clone()];
        for c in ResponseConcept::ALL {
            let v = r.get(c);
            row.push(if terms {
                dequantize_response(c, v).to_string()
            } else {
                sig9(v.value())
            });
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
