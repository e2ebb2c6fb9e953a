use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Pipeline stage at which a design evaluation gave up.
///
/// The declaration order is the pipeline order; `ordinal` is used by the
/// optimizer to rank failed evaluations deterministically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Geometry,
    Winding,
    Circuit,
    RatedPoint,
    Efficiency,
}

impl Stage {
    pub fn ordinal(self) -> u32 {
        self as u32
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvimError {
    #[error("geometry infeasible: {0}")]
    GeometryInfeasible(String),
    #[error("winding infeasible: {0}")]
    WindingInfeasible(String),
    #[error("singular circuit: |Z| = {0:e} ohm")]
    SingularCircuit(f64),
    #[error("no rated operating point: required {required:.1} W, available {available:.1} W")]
    NoRatedPoint { required: f64, available: f64 },
    #[error("non-physical efficiency: losses {losses:.3} W >= input {input:.3} W")]
    NonPhysical { input: f64, losses: f64 },
    #[error("unknown report field `{0}`")]
    UnknownField(String),
    #[error("no feasible scenario in study")]
    NoFeasibleScenario,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("io: {0}")]
    Io(String),
    #[error("json: {0}")]
    Json(String),
    #[error("csv: {0}")]
    Csv(String),
}

impl EvimError {
    /// Stage of the evaluation pipeline this error belongs to, if any.
    pub fn stage(&self) -> Option<Stage> {
        match self {
            EvimError::GeometryInfeasible(_) => Some(Stage::Geometry),
            EvimError::WindingInfeasible(_) => Some(Stage::Winding),
            EvimError::SingularCircuit(_) => Some(Stage::Circuit),
            EvimError::NoRatedPoint { .. } => Some(Stage::RatedPoint),
            EvimError::NonPhysical { .. } => Some(Stage::Efficiency),
            _ => None,
        }
    }
}

impl From<std::io::Error> for EvimError {
    fn from(e: std::io::Error) -> Self {
        EvimError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for EvimError {
    fn from(e: serde_json::Error) -> Self {
        EvimError::Json(e.to_string())
    }
}

impl From<csv::Error> for EvimError {
    fn from(e: csv::Error) -> Self {
        EvimError::Csv(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, EvimError>;
