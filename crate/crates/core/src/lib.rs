//! Natural-language chart descriptions organised by semantic content level.
//!
//! A declarative chart specification plus its backing dataset is turned into
//! sentences tagged with the level of content they carry:
//!
//! 1. elemental and encoded properties (chart type, title, axes, legend),
//! 2. statistical concepts and relations (extrema, means, correlations),
//! 3. perceptual and cognitive phenomena (trends, exceptions, clusters),
//! 4. contextual and domain-specific insight (type support only).
//!
//! The crate also carries the analytics used to study such descriptions: a
//! level-labelled sentence corpus and the rank statistics (Friedman, Nemenyi,
//! rank heatmaps) used to compare how readers value each level.

pub mod chart_spec;
pub mod corpus;
pub mod facts;
pub mod rankstats;
pub mod realize;
pub mod scalar;
pub mod tabular;
pub mod trends;

pub use chart_spec::{parse_spec, validate_spec, ChartSpec, Extent, ValidatedChart};
pub use realize::{compose_description, Description, Sentence, Style, Templates};
pub use scalar::Scalar;
pub use tabular::{load_table, Dataset};

/// Level 2 fact over `f64`.
pub type Fact = facts::Fact<f64>;
/// Level 3 heuristic fact over `f64`.
pub type TrendFact = trends::TrendFact<f64>;
/// Either kind of fact over `f64`.
pub type SemanticFact = realize::SemanticFact<f64>;
/// Single-precision variants, for callers that keep data in `f32`.
pub type FactF32 = facts::Fact<f32>;
pub type TrendFactF32 = trends::TrendFact<f32>;

/// Semantic content level of a sentence.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize,
)]
#[serde(try_from = "u8", into = "u8")]
pub enum Level {
    Elemental = 1,
    Statistical = 2,
    Perceptual = 3,
    Contextual = 4,
}

impl Level {
    pub const ALL: [Level; 4] = [
        Level::Elemental,
        Level::Statistical,
        Level::Perceptual,
        Level::Contextual,
    ];

    pub fn number(self) -> u8 {
        self as u8
    }
}

impl TryFrom<u8> for Level {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Level::Elemental),
            2 => Ok(Level::Statistical),
            3 => Ok(Level::Perceptual),
            4 => Ok(Level::Contextual),
            other => Err(format!("level must be 1-4, got {other}")),
        }
    }
}

impl From<Level> for u8 {
    fn from(l: Level) -> u8 {
        l.number()
    }
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.number())
    }
}
