use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix entries sum to {sum}, expected 1")]
    NotStochastic { sum: f64 },
    #[error("p({node},{node}) = {value} must be zero")]
    NonzeroDiagonal { node: usize, value: f64 },
    #[error("entry p({i},{j}) = {value} is negative or not finite")]
    NegativeEntry { i: usize, j: usize, value: f64 },
    #[error("matrix has shape {rows}x{cols}, expected {expected}x{expected}")]
    BadShape { rows: usize, cols: usize, expected: usize },
    #[error("the chain on the nodes is not irreducible")]
    Reducible,
    #[error("no node receives external arrivals")]
    NoArrivals,
    #[error("rates sum to {sum}, expected 1")]
    BadNormalization { sum: f64 },
    #[error("rates must be positive")]
    NonPositiveRate,
    #[error("no customer ever leaves the network")]
    DivisionByZero,
    #[error("traffic equations are singular")]
    SingularTraffic,

    #[error("operation needs d = 2, network has d = {0}")]
    NotTwoDimensional(usize),
    #[error("a coordinate of the surface point is zero")]
    ZeroCoordinate,
    #[error("the beta equation degenerates and has no root")]
    DegenerateAffine,
    #[error("the conjugator denominator vanishes")]
    SingularBoundaryPolynomial,
    #[error("p(2,0) = 0")]
    NoExitAtTwo,
    #[error("coordinate {0} is not a constrained coordinate")]
    BadCoordinate(usize),

    #[error("zero base raised to a negative power")]
    ZeroToNegativePower,
    #[error("service rates of nodes {0} and {1} coincide")]
    EqualRates(usize, usize),
    #[error("equal-rate pattern not supported: {0}")]
    UnsupportedPattern(String),
    #[error("not a simple extension: {0}")]
    NotSimpleExtension(String),
    #[error("drifts a and b coincide")]
    EqualDrifts,
    #[error("network is not a tandem")]
    NotTandem,
    #[error("network is not a two dimensional tandem")]
    NotTandem2D,
    #[error("point is outside the domain: {0}")]
    OutsideDomain(String),

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("basis element is not Balayage determined: {0}")]
    NotBalayageDetermined(String),
    #[error("basis matrix is singular, condition number {cond:e}")]
    SingularBasis { cond: f64 },
    #[error("unsupported boundary tail")]
    UnsupportedTail,

    #[error("grid has {states} states, limit is {limit}")]
    TooLarge { states: u128, limit: u128 },
    #[error("no convergence after {iterations} sweeps, last change {change:e}")]
    NonConvergent { iterations: usize, change: f64 },

    #[error("all tilted weights vanished")]
    DegenerateTilt,
    #[error("no root in the bracket")]
    NoRoot,

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// Configuration and validation problems, as opposed to numerical failures.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::NotStochastic { .. }
                | Error::NonzeroDiagonal { .. }
                | Error::NegativeEntry { .. }
                | Error::BadShape { .. }
                | Error::Reducible
                | Error::NoArrivals
                | Error::BadNormalization { .. }
                | Error::NonPositiveRate
                | Error::NotTwoDimensional(_)
                | Error::NotTandem
                | Error::NotTandem2D
                | Error::BadCoordinate(_)
                | Error::OutsideDomain(_)
                | Error::UnsupportedPattern(_)
                | Error::UnsupportedTail
                | Error::TooLarge { .. }
                | Error::Config(_)
        )
    }
}
