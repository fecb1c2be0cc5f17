use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::KgeError;
use crate::scalar::Scalar;

/// Fuzzy conjunction with its dual disjunction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TNorm {
    /// `a·b`, dual `a + b − a·b`
    #[default]
    Product,
    /// `min(a, b)`, dual `max(a, b)`
    Goedel,
}

impl TNorm {
    #[inline]
    pub fn and<T: Scalar>(self, a: T, b: T) -> T {
        match self {
            TNorm::Product => a * b,
            TNorm::Goedel => a.min(b),
        }
    }

    #[inline]
    pub fn or<T: Scalar>(self, a: T, b: T) -> T {
        match self {
            TNorm::Product => a + b - a * b,
            TNorm::Goedel => a.max(b),
        }
    }
}

impl FromStr for TNorm {
    type Err = KgeError;

    fn from_str(s: &str) -> Result<Self, KgeError> {
        match s {
            "product" | "prod" => Ok(TNorm::Product),
            "goedel" | "godel" | "min" => Ok(TNorm::Goedel),
            _ => Err(KgeError::Config(format!("unknown t-norm {s:?}"))),
        }
    }
}
