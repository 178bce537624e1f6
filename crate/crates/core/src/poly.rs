//! Real polynomials in one variable, used for the nonlinearity, its
//! derivative and its primitive.

/// Polynomial `sum_k c[k] u^k` with trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    c: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut c: Vec<f64>) -> Self {
        while c.last() == Some(&0.0) {
            c.pop();
        }
        Self { c }
    }

    pub fn zero() -> Self {
        Self { c: Vec::new() }
    }

    /// `a u^k`.
    pub fn monomial(k: usize, a: f64) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] = a;
        Self::new(c)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.c.get(k).copied().unwrap_or(0.0)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &a)| k as f64 * a)
                .collect(),
        )
    }

    /// Primitive vanishing at zero.
    pub fn primitive(&self) -> Self {
        let mut c = vec![0.0];
        c.extend(self.c.iter().enumerate().map(|(k, &a)| a / (k + 1) as f64));
        Self::new(c)
    }

    pub fn has_even_terms(&self) -> bool {
        self.c.iter().step_by(2).any(|&a| a != 0.0)
    }

    pub fn has_odd_terms(&self) -> bool {
        self.c.iter().skip(1).step_by(2).any(|&a| a != 0.0)
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &a| acc * u + a)
    }

    /// Values of the odd-power and even-power parts at `u`.
    pub fn eval_parts(&self, u: f64) -> (f64, f64) {
        let u2 = u * u;
        let horner = |start: usize| {
            let mut acc = 0.0;
            let mut k = start;
            while k < self.c.len() {
                k += 2;
            }
            while k >= start + 2 {
                k -= 2;
                acc = acc * u2 + self.c[k];
            }
            acc
        };
        (u * horner(1), horner(0))
    }
}
