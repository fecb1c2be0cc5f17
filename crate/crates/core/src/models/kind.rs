use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::KgeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    DistMult,
    ComplEx,
    QMult,
}

impl ModelKind {
    /// Number of real coordinates per algebra element (1, 2 or 4).
    pub fn components(self) -> usize {
        match self {
            ModelKind::DistMult => 1,
            ModelKind::ComplEx => 2,
            ModelKind::QMult => 4,
        }
    }

    pub fn check_dim(self, dim: usize) -> Result<(), KgeError> {
        if dim == 0 || !dim.is_multiple_of(self.components()) {
            return Err(KgeError::Config(format!(
                "{self} needs an embedding width divisible by {}, got {dim}",
                self.components()
            )));
        }
        Ok(())
    }

    pub fn tag(self) -> u32 {
        match self {
            ModelKind::DistMult => 0,
            ModelKind::ComplEx => 1,
            ModelKind::QMult => 2,
        }
    }

    pub fn from_tag(tag: u32) -> Option<Self> {
        match tag {
            0 => Some(ModelKind::DistMult),
            1 => Some(ModelKind::ComplEx),
            2 => Some(ModelKind::QMult),
            _ => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::DistMult => "DistMult",
            ModelKind::ComplEx => "ComplEx",
            ModelKind::QMult => "QMult",
        })
    }
}

impl FromStr for ModelKind {
    type Err = KgeError;

    fn from_str(s: &str) -> Result<Self, KgeError> {
        match s.to_ascii_lowercase().as_str() {
            "distmult" => Ok(ModelKind::DistMult),
            "complex" => Ok(ModelKind::ComplEx),
            "qmult" => Ok(ModelKind::QMult),
            _ => Err(KgeError::Config(format!("unknown model {s:?}"))),
        }
    }
}
