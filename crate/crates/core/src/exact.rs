//! Exact floating-point summation.
//!
//! [`ExactSum`] keeps the running total as a list of non-overlapping
//! partials (Shewchuk's expansion arithmetic), so the represented value is
//! the exact real sum of every addend. Merging two sums is therefore
//! associative and commutative bit-for-bit, and [`ExactSum::value`] returns
//! the correctly rounded total regardless of how the additions were grouped.
//!
//! [`StagedSum`] layers a plain `f64` staging register on top. Hot loops add
//! into the register; [`StagedSum::merge`] folds both registers into the
//! exact part first. Because the staged value of an accumulator depends only
//! on its own addition sequence, merges of independently built accumulators
//! are still exactly associative.

use serde::{Deserialize, Serialize};

/// Exact sum of finite `f64` addends.
///
/// Equality compares the represented real numbers, not the partials.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ExactSum {
    // Non-overlapping, increasing magnitude.
    partials: Vec<f64>,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a finite value exactly.
    pub fn add(&mut self, value: f64) {
        debug_assert!(value.is_finite(), "ExactSum only accepts finite addends");
        let mut x = value;
        let mut kept = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[kept] = lo;
                kept += 1;
            }
            x = hi;
        }
        self.partials.truncate(kept);
        self.partials.push(x);
    }

    pub fn add_sum(&mut self, other: &ExactSum) {
        for &p in &other.partials {
            self.add(p);
        }
    }

    fn difference(&self, other: &ExactSum) -> ExactSum {
        let mut d = self.clone();
        for &p in &other.partials {
            d.add(-p);
        }
        d
    }

    /// The exact total rounded to nearest, ties to even.
    pub fn value(&self) -> f64 {
        let p = &self.partials;
        let mut n = p.len();
        if n == 0 {
            return 0.0;
        }
        n -= 1;
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            n -= 1;
            let y = p[n];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        // Half-way case: the remaining partials decide the rounding direction.
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            let yr = x - hi;
            if y == yr {
                hi = x;
            }
        }
        hi
    }
}

/// A fast staging register in front of an [`ExactSum`].
/// Equality compares the total (staged plus exact), exactly.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct StagedSum {
    staged: f64,
    exact: ExactSum,
}

impl StagedSum {
    #[inline]
    pub fn add(&mut self, value: f64) {
        self.staged += value;
    }

    /// Moves the staging register into the exact part.
    pub fn flush(&mut self) {
        if self.staged != 0.0 {
            self.exact.add(self.staged);
            self.staged = 0.0;
        }
    }

    pub fn merge(&self, other: &StagedSum) -> StagedSum {
        let mut out = self.clone();
        out.flush();
        out.exact.add(other.staged);
        out.exact.add_sum(&other.exact);
        out
    }

    pub fn value(&self) -> f64 {
        if self.staged == 0.0 {
            return self.exact.value();
        }
        let mut total = self.exact.clone();
        total.add(self.staged);
        total.value()
    }
}

impl PartialEq for ExactSum {
    fn eq(&self, other: &Self) -> bool {
        // Sums of doubles are multiples of the smallest subnormal, so a
        // correctly rounded zero means the difference is exactly zero.
        self.difference(other).value() == 0.0
    }
}

impl PartialEq for StagedSum {
    fn eq(&self, other: &Self) -> bool {
        let mut a = self.exact.clone();
        a.add(self.staged);
        let mut b = other.exact.clone();
        b.add(other.staged);
        a == b
    }
}
