use std::fmt;

use chartdesc::chart_spec::SpecError;
use chartdesc::corpus::CorpusError;
use chartdesc::rankstats::RankError;
use chartdesc::realize::RealizeError;
use chartdesc::tabular::TableError;
use serde::Serialize;

/// A failure reported to the user as a JSON object on stderr.
#[derive(Debug, Serialize)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row: Option<usize>,
    #[serde(skip)]
    pub internal: bool,
}

impl CliError {
    pub fn new(kind: &'static str, message: impl fmt::Display) -> CliError {
        CliError {
            kind,
            message: message.to_string(),
            line: None,
            row: None,
            internal: false,
        }
    }

    pub fn internal(message: impl fmt::Display) -> CliError {
        CliError {
            internal: true,
            ..CliError::new("internal", message)
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.internal {
            2
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl From<TableError> for CliError {
    fn from(e: TableError) -> Self {
        match e {
            TableError::Unreadable { .. } => CliError::new("data-not-found", e),
            _ => CliError::new("data-invalid", e),
        }
    }
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        match e {
            SpecError::Table(t) => t.into(),
            SpecError::Syntax { line, .. } | SpecError::Schema { line, .. } => CliError {
                line: Some(line),
                ..CliError::new("spec-parse", e)
            },
            SpecError::UnknownMark(_)
            | SpecError::UnknownType(_)
            | SpecError::UnknownChannel(_)
            | SpecError::DuplicateChannel(_)
            | SpecError::MissingChannel(_)
            | SpecError::MalformedDomain { .. }
            | SpecError::BinNotAllowed { .. }
            | SpecError::MalformedBin { .. } => CliError::new("spec-parse", e),
            _ => CliError::new("spec-invalid", e),
        }
    }
}

impl From<RealizeError> for CliError {
    fn from(e: RealizeError) -> Self {
        match e {
            RealizeError::Spec(s) => s.into(),
            RealizeError::Table(t) => t.into(),
            RealizeError::TemplateSyntax { line, .. } => CliError {
                line: Some(line),
                ..CliError::new("template-invalid", e)
            },
            RealizeError::Io { .. } => CliError::new("template-not-found", e),
            RealizeError::MissingSlot { .. }
            | RealizeError::MissingTemplate(_)
            | RealizeError::UnknownFilter(_) => CliError::new("template-invalid", e),
            RealizeError::NoLevels | RealizeError::UnsupportedLevel(_) => CliError::new("usage", e),
            RealizeError::Trend(_) | RealizeError::Fact(_) => CliError::internal(e),
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Io { .. } => CliError::new("corpus-not-found", e),
            CorpusError::Invalid { line, .. }
            | CorpusError::Duplicate { line, .. }
            | CorpusError::ConflictingChart { line, .. } => CliError {
                line: Some(line),
                ..CliError::new("corpus-invalid", e)
            },
            CorpusError::Empty => CliError::new("corpus-invalid", e),
            CorpusError::UnknownChart(_) => CliError::new("unknown-chart", e),
            CorpusError::Csv(_) => CliError::internal(e),
        }
    }
}

impl From<RankError> for CliError {
    fn from(e: RankError) -> Self {
        match e {
            RankError::Csv { row, .. } => CliError {
                row: Some(row),
                ..CliError::new("rankings-invalid", e)
            },
            RankError::NoResponses => CliError::new("no-responses", e),
            RankError::UnsupportedAlpha(_) | RankError::UnsupportedGroups { .. } => {
                CliError::new("usage", e)
            }
            _ => CliError::new("rankings-invalid", e),
        }
    }
}
