use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relationship between two requirements.
///
/// `Dependent` is the binary view of `Requires` and `Other`. The derived
/// ordering is the fixed class ordering used for probability layouts and
/// tie-breaking.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DependencyLabel {
    Independent,
    Requires,
    Other,
    Dependent,
}

impl DependencyLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            DependencyLabel::Independent => "INDEPENDENT",
            DependencyLabel::Requires => "REQUIRES",
            DependencyLabel::Other => "OTHER",
            DependencyLabel::Dependent => "DEPENDENT",
        }
    }

    pub fn binary(self) -> DependencyLabel {
        match self {
            DependencyLabel::Independent => DependencyLabel::Independent,
            _ => DependencyLabel::Dependent,
        }
    }

    pub fn is_dependent(self) -> bool {
        self != DependencyLabel::Independent
    }
}

impl fmt::Display for DependencyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DependencyLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "INDEPENDENT" => Ok(DependencyLabel::Independent),
            "REQUIRES" => Ok(DependencyLabel::Requires),
            "OTHER" => Ok(DependencyLabel::Other),
            "DEPENDENT" => Ok(DependencyLabel::Dependent),
            other => Err(Error::Schema(format!("unknown label `{other}`"))),
        }
    }
}

/// The two label sets a corpus can be expressed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelScheme {
    /// INDEPENDENT, DEPENDENT
    Binary,
    /// INDEPENDENT, REQUIRES, OTHER
    Ternary,
}

impl LabelScheme {
    pub fn classes(self) -> &'static [DependencyLabel] {
        match self {
            LabelScheme::Binary => &[DependencyLabel::Independent, DependencyLabel::Dependent],
            LabelScheme::Ternary => &[
                DependencyLabel::Independent,
                DependencyLabel::Requires,
                DependencyLabel::Other,
            ],
        }
    }

    pub fn n_classes(self) -> usize {
        self.classes().len()
    }

    pub fn index_of(self, label: DependencyLabel) -> Option<usize> {
        self.classes().iter().position(|&c| c == label)
    }

    pub fn label(self, index: usize) -> DependencyLabel {
        self.classes()[index]
    }

    /// Scheme implied by a set of labels. Mixing `DEPENDENT` with
    /// `REQUIRES`/`OTHER` is rejected.
    pub fn infer(labels: impl IntoIterator<Item = DependencyLabel>) -> Result<LabelScheme> {
        let mut binary = false;
        let mut ternary = false;
        for label in labels {
            match label {
                DependencyLabel::Dependent => binary = true,
                DependencyLabel::Requires | DependencyLabel::Other => ternary = true,
                DependencyLabel::Independent => {}
            }
        }
        match (binary, ternary) {
            (true, true) => Err(Error::InvalidArgument(
                "pairs mix DEPENDENT with REQUIRES/OTHER labels".into(),
            )),
            (true, false) => Ok(LabelScheme::Binary),
            _ => Ok(LabelScheme::Ternary),
        }
    }
}
