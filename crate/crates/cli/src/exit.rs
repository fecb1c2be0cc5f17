use std::fmt;

use kge_core::KgeError;

pub const OK: i32 = 0;
pub const CONFIG: i32 = 2;
pub const DATA: i32 = 3;
pub const DIVERGENCE: i32 = 4;

/// Invalid configuration detected by the CLI itself (bad TOML, missing
/// required setting).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Process exit code for an error chain.
pub fn code_for(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return CONFIG;
        }
        if let Some(e) = cause.downcast_ref::<KgeError>() {
            return match e {
                KgeError::Config(_) => CONFIG,
                KgeError::Divergence { .. } => DIVERGENCE,
                _ => DATA,
            };
        }
    }
    DATA
}
