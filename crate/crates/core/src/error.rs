use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("parameters outside the fault-tolerance region: {0}")]
    Domain(String),
    #[error("pole of the generating function at r = {r}")]
    Pole { r: f64 },
    #[error("moment generating function diverges: pole at r = {pole} lies below e^nu = {at}")]
    DivergentMgf { pole: f64, at: f64 },
    #[error(
        "series coefficient e({index}) = {value:e} is negative beyond slack; retry with higher internal precision"
    )]
    Instability { index: usize, value: f64 },
    #[error("degenerate formula: {0}")]
    Degenerate(String),
    #[error("quadrature did not converge: achieved {achieved:e}")]
    Accuracy { achieved: f64 },
    #[error("search exhausted at {cap} without reaching target {target:e}")]
    SearchExhausted { cap: u64, target: f64 },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("chain did not terminate within {0} stages")]
    NonTerminating(u64),
    #[error("simulator invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
