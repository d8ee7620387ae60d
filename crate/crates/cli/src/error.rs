use std::fmt;

use femkit::augmentation::AugmentError;
use femkit::corpus::CorpusError;
use femkit::encoder::EncoderError;
use femkit::evalkit::EvalError;
use femkit::fem::FemError;
use serde_json::json;

/// Process exit classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Bad flags, configuration or input files (exit 1).
    Usage,
    /// The run finished but degraded: success floor missed, a configuration
    /// failed, training diverged (exit 2).
    Degraded,
    /// Anything else (exit 3).
    Internal,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            kind: Kind::Usage,
            message: message.into(),
        }
    }

    pub fn degraded(message: impl Into<String>) -> Self {
        CliError {
            kind: Kind::Degraded,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        CliError {
            kind: Kind::Internal,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            Kind::Usage => 1,
            Kind::Degraded => 2,
            Kind::Internal => 3,
        }
    }

    pub fn to_json(&self) -> String {
        let kind = match self.kind {
            Kind::Usage => "usage",
            Kind::Degraded => "degraded",
            Kind::Internal => "internal",
        };
        json!({"error": {"kind": kind, "code": self.exit_code(), "message": self.message}}).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::internal(e.to_string())
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        // Unreadable or malformed input data is the caller's to fix.
        CliError::usage(e.to_string())
    }
}

impl From<EncoderError> for CliError {
    fn from(e: EncoderError) -> Self {
        match e {
            EncoderError::Config(_) => CliError::usage(e.to_string()),
            _ => CliError::internal(e.to_string()),
        }
    }
}

impl From<FemError> for CliError {
    fn from(e: FemError) -> Self {
        match e {
            FemError::Config(_)
            | FemError::EmptyTrainSplit
            | FemError::EmptyValidationSplit
            | FemError::Checkpoint(_) => CliError::usage(e.to_string()),
            FemError::Diverged { .. } => CliError::degraded(e.to_string()),
            FemError::Encoder(inner) => inner.into(),
            _ => CliError::internal(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Model(inner) => inner.into(),
            EvalError::Encoder(inner) => inner.into(),
            EvalError::Augment(inner) => inner.into(),
            EvalError::MissingArtifacts(_) | EvalError::NoPairs | EvalError::EmptyPlan | EvalError::EmptyEvaluation => {
                CliError::usage(e.to_string())
            }
            _ => CliError::internal(e.to_string()),
        }
    }
}

impl From<AugmentError> for CliError {
    fn from(e: AugmentError) -> Self {
        match e {
            AugmentError::Precondition(_) | AugmentError::Config(_) | AugmentError::Template(_) => {
                CliError::usage(e.to_string())
            }
            AugmentError::BelowFloor { .. } => CliError::degraded(e.to_string()),
            _ => CliError::internal(e.to_string()),
        }
    }
}
