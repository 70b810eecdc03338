//! Deterministic floating-point reductions.
//!
//! [`ExactSum`] keeps a list of non-overlapping partials (Shewchuk's
//! algorithm) and rounds once at the end, so its result is the correctly
//! rounded value of the exact sum. That makes it independent of summation
//! order and of how work is split across threads, which is what lets the
//! exhaustive spin enumerations match their closed forms bit for bit.

use crate::algebra::Quaternion;

/// Correctly rounded sum of an arbitrary number of `f64` terms.
#[derive(Debug, Clone, Default)]
pub struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub fn new() -> Self {
        ExactSum { partials: Vec::new() }
    }

    pub fn add(&mut self, mut x: f64) {
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    /// Adds every partial of `other`; the result is still exact.
    pub fn merge(&mut self, other: &ExactSum) {
        for &p in &other.partials {
            self.add(p);
        }
    }

    /// Correctly rounded (half-to-even) value of the accumulated sum.
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

impl Extend<f64> for ExactSum {
    fn extend<T: IntoIterator<Item = f64>>(&mut self, iter: T) {
        for x in iter {
            self.add(x);
        }
    }
}

/// Correctly rounded sum of a sequence.
pub fn exact_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut acc = ExactSum::new();
    acc.extend(iter);
    acc.value()
}

/// Componentwise [`ExactSum`] over quaternions.
#[derive(Debug, Clone, Default)]
pub struct QuaternionSum {
    parts: [ExactSum; 4],
}

impl QuaternionSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, q: Quaternion) {
        for (acc, c) in self.parts.iter_mut().zip(q.components()) {
            if c != 0.0 {
                acc.add(c);
            }
        }
    }

    pub fn merge(&mut self, other: &QuaternionSum) {
        for (a, b) in self.parts.iter_mut().zip(&other.parts) {
            a.merge(b);
        }
    }

    pub fn value(&self) -> Quaternion {
        Quaternion::from_components([
            self.parts[0].value(),
            self.parts[1].value(),
            self.parts[2].value(),
            self.parts[3].value(),
        ])
    }
}

/// Correctly rounded `Σ coef_k · q_k` for power-of-two (or otherwise
/// exactly representable product) coefficients such as `±1`, `±2^m`.
pub fn exact_combination<I: IntoIterator<Item = (f64, Quaternion)>>(terms: I) -> Quaternion {
    let mut acc = QuaternionSum::new();
    for (c, q) in terms {
        acc.add(q.scale(c));
    }
    acc.value()
}

/// Pairwise reduction over a slice with a fixed shape: the split points
/// depend only on the length, so results are reproducible regardless of
/// scheduling.
pub fn tree_reduce<T, F>(items: &[T], identity: T, combine: &F) -> T
where
    T: Clone + Send + Sync,
    F: Fn(&T, &T) -> T + Sync,
{
    match items.len() {
        0 => identity,
        1 => items[0].clone(),
        n => {
            let mid = n / 2;
            let (l, r) = rayon::join(
                || tree_reduce(&items[..mid], identity.clone(), combine),
                || tree_reduce(&items[mid..], identity.clone(), combine),
            );
            combine(&l, &r)
        }
    }
}
