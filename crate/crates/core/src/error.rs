use crate::fcm::ConceptId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("realisation {0} is outside [-1, 1]")]
    RealisationOutOfRange(f64),

    #[error("invalid admissible interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("invalid {family} weight parameters {params:?}: {reason}")]
    InvalidWeightParams {
        family: &'static str,
        params: Vec<f64>,
        reason: String,
    },

    #[error("weight function contract violated: {0}")]
    WeightContract(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("unknown concept id {0}")]
    UnknownConcept(ConceptId),

    #[error("invalid state vector: {0}")]
    InvalidState(String),

    #[error("invalid simulation settings: {0}")]
    InvalidSettings(String),

    #[error("missing weight parameter `{param}` for linkage {linkage}")]
    MissingWeight { param: String, linkage: String },

    #[error("weight parameter `{name}` = {value} is outside [-1, 1]")]
    WeightOutOfRange { name: String, value: f64 },

    #[error("unknown term `{term}` for {concept}; valid terms: {valid}")]
    Vocabulary {
        concept: &'static str,
        term: String,
        valid: String,
    },

    #[error("missing survey record for participant `{participant}` in scenario `{scenario}`")]
    MissingRecord {
        participant: String,
        scenario: String,
    },

    #[error("duplicate survey record for participant `{participant}` in scenario `{scenario}`")]
    DuplicateRecord {
        participant: String,
        scenario: String,
    },

    #[error("no fitted weights for {model} batch {batch} participant `{participant}`")]
    MissingFit {
        model: String,
        batch: u8,
        participant: String,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("missing scenario set {0}")]
    MissingSet(u8),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("inference contract violated: {0}")]
    Inference(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
