use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("underdetermined fit: {distinct} distinct nonzero voltages inside the window, need at least 5")]
    Underdetermined { distinct: usize },

    #[error("singular least-squares system (condition number {condition:.3e})")]
    Singular { condition: f64 },

    #[error("resistance must be positive, got {0}")]
    NonPositiveResistance(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("infeasible-G: i_M(v_eq)/v_eq - p1 = {excess:.3e} S is not positive at v_eq = {v_eq} V")]
    InfeasibleG { v_eq: f64, excess: f64 },

    #[error("safe-window: v_eq = {v_eq} V is not below |V_SET| = {v_set_mag} V")]
    SafeWindow { v_eq: f64, v_set_mag: f64 },

    #[error("invalid integration config: {0}")]
    InvalidConfig(String),

    #[error("step size underflow at t = {t:.6e} s (dt = {dt:.3e} s)")]
    StepUnderflow { t: f64, dt: f64 },

    #[error("trajectory diverged at t = {t:.6e} s")]
    Diverged { t: f64 },

    #[error("trajectory too short: {samples} samples")]
    TooShort { samples: usize },

    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
