//! Order-independent floating-point summation.
//!
//! Reductions over slices, time frames and thread-local partials go through
//! [`exact_sum`], so every total is the correctly rounded value of the exact
//! sum of its terms. Totals are then bit-identical across thread counts and
//! term orderings, and negating every term negates the total exactly.

/// Running exact accumulator (Shewchuk's non-overlapping partials).
#[derive(Debug, Clone, Default)]
pub struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
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

    /// Correctly rounded value of the accumulated sum.
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
        // half-way correction so the result is correctly rounded
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
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

pub fn exact_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = ExactSum::new();
    acc.extend(values);
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancels_catastrophically_rounded_terms() {
        assert_eq!(exact_sum([1e100, 1.0, -1e100]), 1.0);
        assert_eq!(exact_sum([0.1; 10]), 1.0);
    }

    #[test]
    fn order_and_sign_symmetry() {
        let v: Vec<f64> = (0..200).map(|i| ((i * 7919) % 101) as f64 * 1.37e-3 - 0.05).collect();
        let mut r = v.clone();
        r.reverse();
        let neg: Vec<f64> = r.iter().map(|x| -x).collect();
        assert_eq!(exact_sum(v.iter().copied()), exact_sum(r));
        assert_eq!(exact_sum(v.iter().copied()), -exact_sum(neg));
    }

    #[test]
    fn empty_is_zero() {
        assert_eq!(exact_sum(std::iter::empty()), 0.0);
    }
}
