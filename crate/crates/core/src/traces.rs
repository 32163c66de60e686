use num_complex::Complex64;

use crate::error::{out_of_range, Result};
use crate::haar::UnitaryMatrix;

/// `Tr(M^j)` for `j = 1..=max_power`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceVector {
    values: Vec<Complex64>,
}

impl TraceVector {
    pub fn from_values(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(out_of_range("max_power", 0.0, "must be at least 1"));
        }
        Ok(Self { values })
    }

    pub fn max_power(&self) -> usize {
        self.values.len()
    }

    /// `Tr(M^j)`, 1-based.
    pub fn get(&self, j: usize) -> Option<Complex64> {
        j.checked_sub(1).and_then(|i| self.values.get(i).copied())
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Traces for powers `first..=last`.
    pub fn range(&self, first: usize, last: usize) -> Option<&[Complex64]> {
        if first == 0 || first > last || last > self.values.len() {
            return None;
        }
        Some(&self.values[first - 1..last])
    }
}

/// Traces of `M, M^2, ..., M^d` from running matrix powers.
pub fn traces_of_powers(m: &UnitaryMatrix, d: usize) -> Result<TraceVector> {
    if d == 0 {
        return Err(out_of_range("d", 0.0, "must be at least 1"));
    }
    let base = m.matrix();
    let mut power = base.clone();
    let mut values = Vec::with_capacity(d);
    values.push(power.trace());
    for _ in 1..d {
        power = power.matmul(base);
        values.push(power.trace());
    }
    Ok(TraceVector { values })
}
