use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad class of a failure, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Malformed input data or an out-of-range argument.
    Parse,
    /// A statistic cannot be evaluated on the given data.
    Undefined,
    /// A simulation design or parameter set is invalid.
    Design,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}{}: {message}", field_suffix(.field))]
    Csv {
        line: u64,
        field: Option<&'static str>,
        message: String,
    },

    #[error("invalid JSON input: {0}")]
    Json(String),

    #[error("empty body: input contains no strata")]
    EmptyBody,

    #[error("duplicate stratum label `{0}`")]
    DuplicateLabel(String),

    #[error("stratum `{label}`: {message}")]
    InvalidStratum { label: String, message: String },

    #[error("no informative strata: every stratum has a zero column total")]
    NoInformativeStrata,

    #[error("{what} is undefined: {reason}")]
    Undefined { what: String, reason: String },

    #[error("stratum {stratum}: {message}")]
    StratumUndefined { stratum: String, message: String },

    #[error("{method} variance does not apply to {kind}{detail}")]
    MethodNotApplicable {
        method: &'static str,
        kind: &'static str,
        detail: String,
    },

    #[error("confidence level must lie strictly between 0 and 1, got {0}")]
    InvalidLevel(f64),

    #[error("invalid design (--{flag}): {message}")]
    InvalidDesign { flag: &'static str, message: String },

    #[error("invalid binomial parameters for stratum {stratum}: {message}")]
    InvalidParams { stratum: usize, message: String },

    #[error(
        "repetition {rep}: {dropped} of {total} replicates had an undefined MHq, above the 1% abort threshold"
    )]
    ExcessiveDrops {
        rep: usize,
        dropped: usize,
        total: usize,
    },

    #[error("repetition {rep}: only {defined} defined replicates, need at least 2")]
    InsufficientReplicates { rep: usize, defined: usize },
}

fn field_suffix(field: &Option<&'static str>) -> String {
    match field {
        Some(f) => format!(", field {f}"),
        None => String::new(),
    }
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Csv { .. }
            | Error::Json(_)
            | Error::EmptyBody
            | Error::DuplicateLabel(_)
            | Error::InvalidStratum { .. }
            | Error::InvalidLevel(_) => ErrorCategory::Parse,
            Error::NoInformativeStrata
            | Error::Undefined { .. }
            | Error::StratumUndefined { .. }
            | Error::MethodNotApplicable { .. }
            | Error::ExcessiveDrops { .. }
            | Error::InsufficientReplicates { .. } => ErrorCategory::Undefined,
            Error::InvalidDesign { .. } | Error::InvalidParams { .. } => ErrorCategory::Design,
        }
    }

    pub(crate) fn undefined(what: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Undefined {
            what: what.into(),
            reason: reason.into(),
        }
    }
}
