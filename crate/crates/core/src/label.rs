use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A binary class indicator `y*` in {-1, +1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "-1")]
    Negative,
    #[serde(rename = "1")]
    Positive,
}

impl Label {
    /// Accepts exactly -1 or +1.
    pub fn from_sign(value: f64) -> Result<Self> {
        if value == 1.0 {
            Ok(Label::Positive)
        } else if value == -1.0 {
            Ok(Label::Negative)
        } else {
            Err(Error::Label(value))
        }
    }

    /// Accepts the {0, 1} coding as well as {-1, +1}; 0 maps to -1.
    pub fn from_binary(value: f64) -> Result<Self> {
        if value == 0.0 {
            Ok(Label::Negative)
        } else {
            Self::from_sign(value)
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    /// The {0, 1} coding `y = (y* + 1) / 2`.
    pub fn indicator(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => 0.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }
}

/// Outcome of `sign(f)` with the `sign(0) = +1` convention made visible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub label: Label,
    /// Set when `f == 0` and the label came from the tie convention.
    pub degenerate: bool,
}

impl Classification {
    pub fn from_score(f: f64) -> Self {
        if f > 0.0 {
            Classification { label: Label::Positive, degenerate: false }
        } else if f < 0.0 {
            Classification { label: Label::Negative, degenerate: false }
        } else {
            Classification { label: Label::Positive, degenerate: true }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_codings() {
        assert_eq!(Label::from_sign(1.0).unwrap(), Label::Positive);
        assert_eq!(Label::from_sign(-1.0).unwrap(), Label::Negative);
        assert_eq!(Label::from_binary(0.0).unwrap(), Label::Negative);
        assert!(matches!(Label::from_sign(0.0), Err(Error::Label(_))));
        assert!(matches!(Label::from_binary(2.0), Err(Error::Label(_))));
    }

    #[test]
    fn zero_score_is_flagged() {
        let c = Classification::from_score(0.0);
        assert_eq!(c.label, Label::Positive);
        assert!(c.degenerate);
        assert!(!Classification::from_score(-0.1).degenerate);
    }
}
