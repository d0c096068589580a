//! Cached `ln(x!)`.

/// Entries below this are always present, so that the Stirling fallback is
/// only ever used where it is accurate to machine precision.
const MIN_ENTRIES: usize = 256;

/// Table of `ln(x!)` for `x` in `0..len`, built by compensated summation of
/// `ln(i)`.
#[derive(Debug, Clone)]
pub struct LogFactorialTable {
    values: Vec<f64>,
    // Kahan compensation term carried forward when the table grows.
    carry: f64,
}

impl Default for LogFactorialTable {
    fn default() -> Self {
        Self::with_capacity(MIN_ENTRIES)
    }
}

impl LogFactorialTable {
    /// Creates a table covering `0..=max_arg`.
    pub fn with_capacity(max_arg: usize) -> Self {
        let mut table = LogFactorialTable { values: vec![0.0, 0.0], carry: 0.0 };
        table.ensure(max_arg.max(MIN_ENTRIES));
        table
    }

    /// Extends the table so that `max_arg` is covered.
    pub fn ensure(&mut self, max_arg: usize) {
        if max_arg < self.values.len() {
            return;
        }
        self.values.reserve(max_arg + 1 - self.values.len());
        let mut sum = *self.values.last().unwrap();
        let mut carry = self.carry;
        for i in self.values.len()..=max_arg {
            let y = (i as f64).ln() - carry;
            let t = sum + y;
            carry = (t - sum) - y;
            sum = t;
            self.values.push(sum);
        }
        self.carry = carry;
    }

    /// Largest argument held in the table.
    pub fn high_water_mark(&self) -> usize {
        self.values.len() - 1
    }

    /// `ln(x!)`; beyond the high-water mark falls back to the Stirling series.
    #[inline]
    pub fn ln_factorial(&self, x: u64) -> f64 {
        match self.values.get(x as usize) {
            Some(&v) => v,
            None => stirling(x as f64),
        }
    }

    /// Growing lookup.
    pub fn get(&mut self, x: u64) -> f64 {
        self.ensure(x as usize);
        self.values[x as usize]
    }
}

/// `ln(x!)` without a cache.
pub fn ln_factorial(x: u64) -> f64 {
    if x < 32 {
        (2..=x).map(|i| (i as f64).ln()).sum()
    } else {
        stirling(x as f64)
    }
}

/// `ln(n choose k)`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

fn stirling(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + series
}
