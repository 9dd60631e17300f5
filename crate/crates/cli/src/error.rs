use prewet_core::Error;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Validation,
    Runtime,
}

/// A failure with the exit code it maps to.
#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub kind: Kind,
    /// Short tag of what failed (`config`, `beta`, `schema`, ...).
    pub context: String,
    pub message: String,
}

impl CliError {
    pub fn validation(context: &str, message: impl Into<String>) -> Self {
        Self { kind: Kind::Validation, context: context.into(), message: message.into() }
    }

    pub fn runtime(context: &str, message: impl Into<String>) -> Self {
        Self { kind: Kind::Runtime, context: context.into(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            Kind::Validation => 1,
            Kind::Runtime => 2,
        }
    }

    /// One JSON object per line on stderr.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            status: &'static str,
            code: i32,
            #[serde(flatten)]
            err: &'a CliError,
        }
        serde_json::to_string(&Line { status: "error", code: self.exit_code(), err: self }).unwrap()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let context = match &e {
            Error::Domain(_) => "domain",
            Error::AccuracyRange(_) => "accuracy_range",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::InsufficientData(_) => "insufficient_data",
            Error::SchemaMismatch { .. } => "schema",
            Error::CapTooSmall { .. } => "cap_too_small",
            Error::NegativeHeight { .. } => "negative_height",
            Error::Structure(_) => "structure",
            Error::NoConePoints => "no_cone_points",
            Error::ZeroBridgeWeight => "zero_bridge_weight",
            Error::ModesInsufficient { .. } => "modes_insufficient",
            Error::StepTooCoarse { .. } => "step_too_coarse",
            Error::GridResolution(_) => "grid_resolution",
            Error::Io(_) => "io",
        };
        let validation = matches!(
            e,
            Error::Domain(_)
                | Error::AccuracyRange(_)
                | Error::InvalidParameter(_)
                | Error::InsufficientData(_)
                | Error::SchemaMismatch { .. }
                | Error::CapTooSmall { .. }
                | Error::NegativeHeight { .. }
        );
        let msg = e.to_string();
        if validation {
            Self::validation(context, msg)
        } else {
            Self::runtime(context, msg)
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::runtime("io", e.to_string())
    }
}
