//! `start:step:stop` SNR ranges.

use std::fmt;
use std::str::FromStr;

/// Inclusive arithmetic range of SNR values in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoRange {
    pub start: f64,
    pub step: f64,
    pub stop: f64,
}

impl RhoRange {
    pub fn single(v: f64) -> Self {
        Self { start: v, step: 1.0, stop: v }
    }

    /// Values in order; empty when `start > stop`.
    pub fn values(&self) -> Vec<f64> {
        if self.start > self.stop {
            return Vec::new();
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl fmt::Display for RhoRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.step, self.stop)
    }
}

impl FromStr for RhoRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("{t:?} is not a number"))
        };
        match parts.as_slice() {
            [v] => Ok(Self::single(num(v)?)),
            [a, st, b] => {
                let step = num(st)?;
                if step <= 0.0 {
                    return Err(format!("step must be positive, got {step}"));
                }
                Ok(Self { start: num(a)?, step, stop: num(b)? })
            }
            _ => Err(format!("expected VALUE or START:STEP:STOP, got {s:?}")),
        }
    }
}
