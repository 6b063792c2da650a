//! Sample mean with a normal-approximation 95% half-width.

/// z-quantile for a two-sided 95% interval.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// Half-width of the 95% confidence interval; `INFINITY` for one sample.
    pub ci95: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            mean: value,
            ci95: 0.0,
            samples: 1,
        }
    }

    pub fn from_samples(xs: &[f64]) -> Self {
        let mut acc = Accumulator::default();
        xs.iter().for_each(|&x| acc.push(x));
        acc.finish()
    }

    /// `mean <= bound + 3 * ci95`.
    pub fn within(&self, bound: f64) -> bool {
        self.mean <= bound + 3.0 * self.ci95
    }

    pub fn scaled(&self, c: f64) -> Self {
        Estimate {
            mean: self.mean * c,
            ci95: self.ci95 * c.abs(),
            samples: self.samples,
        }
    }
}

/// Welford running mean/variance. Feeding the same values in the same order
/// gives bit-identical results.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn finish(&self) -> Estimate {
        let ci95 = match self.n {
            0 | 1 => f64::INFINITY,
            n => {
                let var = (self.m2 / (n - 1) as f64).max(0.0);
                Z95 * (var / n as f64).sqrt()
            }
        };
        Estimate {
            mean: self.mean,
            ci95,
            samples: self.n,
        }
    }
}
