use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{KgeError, Result};
use crate::models::EmbeddingState;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AswaAction {
    Hard,
    Soft,
    Reject,
}

impl fmt::Display for AswaAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AswaAction::Hard => "hard",
            AswaAction::Soft => "soft",
            AswaAction::Reject => "reject",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AswaLogEntry {
    pub epoch: usize,
    pub val_running: f64,
    pub val_lookahead: Option<f64>,
    pub action: AswaAction,
    pub val_aswa: f64,
}

/// Adaptive parameter ensemble.
///
/// `alpha_count` is the number of snapshots currently averaged into `theta`.
/// A hard update adopts the running model as the single member, so the count
/// becomes 1; each soft update adds one member.
#[derive(Debug, Clone, PartialEq)]
pub struct AswaState<T> {
    pub theta: EmbeddingState<T>,
    pub alpha_count: usize,
    pub val_aswa: f64,
    pub log: Vec<AswaLogEntry>,
}

impl<T: Scalar> AswaState<T> {
    /// Starts from the initial parameters with no members and score −1.
    pub fn new(initial: &EmbeddingState<T>) -> Self {
        Self {
            theta: initial.clone(),
            alpha_count: 0,
            val_aswa: -1.0,
            log: Vec::new(),
        }
    }

    /// Processes the running model at the end of `epoch`.
    ///
    /// `eval` scores a parameter state on validation data (higher is better)
    /// and must be deterministic. Comparisons are strict, so ties reject.
    pub fn epoch_step<F>(
        &mut self,
        epoch: usize,
        theta_next: &EmbeddingState<T>,
        mut eval: F,
    ) -> Result<AswaAction>
    where
        F: FnMut(&EmbeddingState<T>) -> Result<f64>,
    {
        self.theta.ensure_congruent(theta_next)?;
        let val_running = finite(eval(theta_next)?)?;
        if val_running > self.val_aswa {
            self.theta.clone_from(theta_next);
            self.alpha_count = 1;
            self.val_aswa = val_running;
            return Ok(self.record(epoch, val_running, None, AswaAction::Hard));
        }

        let mut lookahead = self.theta.clone();
        lookahead.absorb(theta_next, self.alpha_count)?;
        let val_lookahead = finite(eval(&lookahead)?)?;
        if val_lookahead > self.val_aswa {
            self.theta = lookahead;
            self.alpha_count += 1;
            self.val_aswa = val_lookahead;
            Ok(self.record(epoch, val_running, Some(val_lookahead), AswaAction::Soft))
        } else {
            Ok(self.record(epoch, val_running, Some(val_lookahead), AswaAction::Reject))
        }
    }

    fn record(
        &mut self,
        epoch: usize,
        val_running: f64,
        val_lookahead: Option<f64>,
        action: AswaAction,
    ) -> AswaAction {
        self.log.push(AswaLogEntry {
            epoch,
            val_running,
            val_lookahead,
            action,
            val_aswa: self.val_aswa,
        });
        action
    }

    /// Writes the decision log as `epoch,val_running,val_lookahead,action,val_aswa`.
    pub fn write_log_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "epoch,val_running,val_lookahead,action,val_aswa")?;
        for e in &self.log {
            let look = e.val_lookahead.map(|v| v.to_string()).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{}",
                e.epoch, e.val_running, look, e.action, e.val_aswa
            )?;
        }
        Ok(())
    }
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(KgeError::Eval(format!(
            "validation score is not finite: {v}"
        )))
    }
}
