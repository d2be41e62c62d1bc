use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("record {index} references unknown model `{id}`")]
    UnknownModel { index: usize, id: String },

    #[error("record {index} pits model `{id}` against itself")]
    SelfBattle { index: usize, id: String },

    #[error("duplicate model id `{0}` in roster")]
    DuplicateModel(String),

    #[error("roster has {got} models, at least {needed} required")]
    RosterTooSmall { needed: usize, got: usize },

    #[error("rosters differ between inputs")]
    RosterMismatch,

    #[error("no battles to fit")]
    NoBattles,

    #[error("comparison graph is disconnected into {} components", components.len())]
    DisconnectedGraph { components: Vec<Vec<String>> },

    #[error("no finite maximizer: models {models:?} are separated by an unbroken win/loss boundary")]
    NoFiniteMaximizer { models: Vec<String> },

    #[error("solver stopped after {iterations} iterations with gradient max-norm {gradient:e}")]
    NotConverged { iterations: usize, gradient: f64 },

    #[error("no model pairs closer than h = {h}")]
    EmptyProximitySet { h: f64 },

    #[error("graph just below breakpoint h = {h} is disconnected (phi below = inf, phi above = {phi_above})")]
    DisconnectedBelowBreakpoint { h: f64, phi_above: f64 },

    #[error("breakpoint index {index} out of range ({count} breakpoints)")]
    BreakpointOutOfRange { index: usize, count: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("placement session already finished")]
    AlreadyFinished,

    #[error("round reported {got} battles, expected {expected}")]
    BadRoundTotal { expected: u32, got: u32 },

    #[error("original comparison graph is disconnected")]
    DisconnectedOriginal,

    #[error("bootstrap round {round} produced no identifiable resample after {attempts} attempts")]
    BootstrapExhausted { round: usize, attempts: usize },

    #[error("dataset unavailable: {0}")]
    DatasetUnavailable(String),

    #[error("line {line}: unsupported schema version {version}")]
    SchemaVersionUnsupported { line: usize, version: u64 },

    #[error("corrupt snapshot: {0}")]
    CorruptSnapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the estimation itself (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DisconnectedGraph { .. }
                | Error::NoFiniteMaximizer { .. }
                | Error::NotConverged { .. }
                | Error::DisconnectedBelowBreakpoint { .. }
                | Error::DisconnectedOriginal
                | Error::BootstrapExhausted { .. }
        )
    }
}
