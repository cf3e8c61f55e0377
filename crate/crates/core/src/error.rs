use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown equation `{0}`")]
    UnknownEquation(String),
    #[error("parameter `{name}` = {value} outside the oscillatory range ({expected})")]
    ParameterRange {
        name: String,
        value: f64,
        expected: &'static str,
    },
    #[error("missing parameter `{0}`")]
    MissingParameter(String),
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unbound identifier `{name}` at offset {offset}")]
    UnboundIdentifier { name: String, offset: usize },
    #[error("evaluation error at x = {x}: {message}")]
    Evaluation { x: f64, message: String },
    #[error("initial conditions are linearly dependent (Wronskian {0})")]
    DependentInitialConditions(f64),
    #[error("step size underflow at x = {0}")]
    StepUnderflow(f64),
    #[error("step limit of {limit} exceeded at x = {x}")]
    TooManySteps { x: f64, limit: usize },
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("tolerance {0:e} outside [1e-13, 1e-3]")]
    Tolerance(f64),
    #[error("x = {x} outside trajectory span [{lo}, {hi}]")]
    OutOfSpan { x: f64, lo: f64, hi: f64 },
    #[error("Wronskian is {0}; a unit-normalized pair is required")]
    NonUnitWronskian(f64),
    #[error("singular transformation (determinant {0})")]
    SingularMatrix(f64),
    #[error("amplitude vanished at x = {0}")]
    VanishingAmplitude(f64),
    #[error("phase quadrature disagrees with the arctangent by {mismatch} at x = {x}; refine the grid")]
    PhaseMismatch { x: f64, mismatch: f64 },
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("window covers {periods:.3} phase periods, at least {required} required")]
    WindowTooShort { periods: f64, required: f64 },
    #[error("ill-conditioned least-squares problem (condition estimate {0:e})")]
    IllConditioned(f64),
    #[error("objective is flat across all starts; the window does not oscillate")]
    FlatObjective,
    #[error("too few zeros in span: {found} found, {required} required")]
    TooFewZeros { found: usize, required: usize },
    #[error("cotangent singular at x = {0}")]
    SingularCotangent(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for errors caused by the request itself (bad names, parameters,
    /// intervals, tolerances, syntax) rather than by the computation.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::UnknownEquation(_)
                | Error::ParameterRange { .. }
                | Error::MissingParameter(_)
                | Error::Syntax { .. }
                | Error::UnboundIdentifier { .. }
                | Error::InvalidInterval { .. }
                | Error::Tolerance(_)
                | Error::InvalidArgument(_)
        )
    }

    /// Short stable identifier of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::UnknownEquation(_) => "unknown_equation",
            Error::ParameterRange { .. } => "parameter_range",
            Error::MissingParameter(_) => "missing_parameter",
            Error::Syntax { .. } => "syntax",
            Error::UnboundIdentifier { .. } => "unbound_identifier",
            Error::Evaluation { .. } => "evaluation",
            Error::DependentInitialConditions(_) => "dependent_initial_conditions",
            Error::StepUnderflow(_) => "step_underflow",
            Error::TooManySteps { .. } => "too_many_steps",
            Error::InvalidInterval { .. } => "invalid_interval",
            Error::Tolerance(_) => "tolerance",
            Error::OutOfSpan { .. } => "out_of_span",
            Error::NonUnitWronskian(_) => "non_unit_wronskian",
            Error::SingularMatrix(_) => "singular_matrix",
            Error::VanishingAmplitude(_) => "vanishing_amplitude",
            Error::PhaseMismatch { .. } => "phase_mismatch",
            Error::GridTooCoarse(_) => "grid_too_coarse",
            Error::WindowTooShort { .. } => "window_too_short",
            Error::IllConditioned(_) => "ill_conditioned",
            Error::FlatObjective => "flat_objective",
            Error::TooFewZeros { .. } => "too_few_zeros",
            Error::SingularCotangent(_) => "singular_cotangent",
            Error::InvalidArgument(_) => "invalid_argument",
        }
    }
}
