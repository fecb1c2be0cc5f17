use crate::error::{KgeError, Result};

/// Deferred cyclic cosine annealing.
///
/// The rate stays at `base_lr` for the first `defer_fraction` of training, then
/// runs `cycles` cosine cycles over the remaining epochs, each starting at
/// `base_lr` and decaying towards zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CyclicSchedule {
    pub total: usize,
    pub defer_fraction: f64,
    pub base_lr: f64,
    pub cycles: usize,
}

impl CyclicSchedule {
    pub fn new(total: usize, defer_fraction: f64, base_lr: f64, cycles: usize) -> Result<Self> {
        if total == 0 {
            return Err(KgeError::config("schedule needs at least one epoch"));
        }
        if !(defer_fraction > 0.0 && defer_fraction < 1.0) {
            return Err(KgeError::config(format!(
                "defer fraction must lie in (0, 1), got {defer_fraction}"
            )));
        }
        if cycles == 0 {
            return Err(KgeError::config("need at least one cycle"));
        }
        if !(base_lr > 0.0 && base_lr.is_finite()) {
            return Err(KgeError::config(format!(
                "base learning rate must be positive, got {base_lr}"
            )));
        }
        Ok(Self {
            total,
            defer_fraction,
            base_lr,
            cycles,
        })
    }

    /// First epoch of the cyclic region.
    pub fn start(&self) -> usize {
        ((self.defer_fraction * self.total as f64).ceil() as usize).min(self.total)
    }

    /// Position of `epoch` in the cyclic region, scaled by the cycle count;
    /// `None` before the deferral point.
    fn phase(&self, epoch: usize) -> Option<f64> {
        let start = self.start();
        if epoch < start {
            return None;
        }
        let u = (epoch - start) as f64 / (self.total - start) as f64;
        Some(u * self.cycles as f64)
    }

    pub fn lr(&self, epoch: usize) -> Result<f64> {
        if epoch >= self.total {
            return Err(KgeError::config(format!(
                "epoch {epoch} outside schedule of {} epochs",
                self.total
            )));
        }
        Ok(match self.phase(epoch) {
            None => self.base_lr,
            Some(p) => 0.5 * self.base_lr * (1.0 + (std::f64::consts::PI * p.fract()).cos()),
        })
    }

    /// True for the last epoch of each cycle, where a snapshot is taken.
    pub fn is_cycle_end(&self, epoch: usize) -> bool {
        let Some(p) = self.phase(epoch) else {
            return false;
        };
        if epoch + 1 >= self.total {
            return true;
        }
        let next = self.phase(epoch + 1).expect("inside cyclic region");
        next.floor() > p.floor()
    }
}

pub fn cyclic_lr(
    epoch: usize,
    total: usize,
    defer_fraction: f64,
    base_lr: f64,
    cycles: usize,
) -> Result<f64> {
    CyclicSchedule::new(total, defer_fraction, base_lr, cycles)?.lr(epoch)
}
