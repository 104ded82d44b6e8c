use thiserror::Error;

#[derive(Debug, Error)]
pub enum SghError {
    #[error("invalid order {got}: expected {expected}")]
    InvalidOrder { got: usize, expected: &'static str },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-physical state: {0}")]
    NonPhysical(String),

    #[error("singular Jacobian in element {elem} at point {point}: det J = {det:e} (floor {floor:e})")]
    SingularJacobian {
        elem: usize,
        point: usize,
        det: f64,
        floor: f64,
    },

    #[error("density variation blow-up in element {elem} at point {point}: |drho| = {drho:e} exceeds {limit:e}")]
    DensityBlowup {
        elem: usize,
        point: usize,
        drho: f64,
        limit: f64,
    },

    #[error("internal energy clamped {count} times, limit is {limit}")]
    EnergyFloor { count: usize, limit: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SghError>;
