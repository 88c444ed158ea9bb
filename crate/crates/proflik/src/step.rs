//! Nondecreasing step functions with jumps at event times, used for the
//! baseline cumulative hazard and the odds function.

use crate::error::{Error, Result};

/// A cadlag step function that is 0 before its first jump.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    jump_times: Vec<f64>,
    jump_sizes: Vec<f64>,
    cumulative: Vec<f64>,
}

impl StepFunction {
    /// Requires strictly ascending finite jump times and strictly positive
    /// finite jump sizes.
    pub fn new(jump_times: Vec<f64>, jump_sizes: Vec<f64>) -> Result<Self> {
        if jump_times.len() != jump_sizes.len() {
            return Err(Error::InvalidData(
                "jump times and sizes differ in length".into(),
            ));
        }
        if jump_times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidData("non-finite jump time".into()));
        }
        if jump_times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidData(
                "jump times must be strictly ascending".into(),
            ));
        }
        if jump_sizes.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidData("jump sizes must be positive".into()));
        }
        let mut cumulative = Vec::with_capacity(jump_sizes.len());
        let mut acc = 0.0;
        for &s in &jump_sizes {
            acc += s;
            cumulative.push(acc);
        }
        Ok(Self {
            jump_times,
            jump_sizes,
            cumulative,
        })
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn jump_sizes(&self) -> &[f64] {
        &self.jump_sizes
    }

    /// Value at `t`: the sum of jump sizes at times <= t.
    pub fn value(&self, t: f64) -> f64 {
        let k = self.jump_times.partition_point(|&x| x <= t);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    /// Left limit at `t`: the sum of jump sizes at times < t.
    pub fn value_before(&self, t: f64) -> f64 {
        let k = self.jump_times.partition_point(|&x| x < t);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    /// Size of the jump exactly at `t`, or 0 if `t` is not a jump time.
    pub fn jump_at(&self, t: f64) -> f64 {
        match self.jump_times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(k) => self.jump_sizes[k],
            Err(_) => 0.0,
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.jump_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jump_times.is_empty()
    }
}
