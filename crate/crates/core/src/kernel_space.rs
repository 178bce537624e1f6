//! The kernel `V` of the d'Alembertian: vectors `xi` with
//! `v = sum xi_j cos(j t) sin(j x) = eta(t + x) - eta(t - x)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral_core::{gcd, SpectralField};

/// Relative threshold deciding which coefficients count as support.
pub const SUPPORT_TOL: f64 = 1e-8;

/// Coefficients `xi_j`, `j = 1..=len`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelVector {
    xi: Vec<f64>,
}

impl KernelVector {
    pub fn new(xi: Vec<f64>) -> Self {
        Self { xi }
    }

    pub fn zeros(len: usize) -> Self {
        Self { xi: vec![0.0; len] }
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    /// `xi_j` for `j >= 1`, zero beyond the truncation.
    pub fn get(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            self.xi.get(j - 1).copied().unwrap_or(0.0)
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.xi.iter().map(|x| s * x).collect())
    }

    /// `||v||^2 = pi^2 sum j^2 xi_j^2`.
    pub fn h1_norm(&self) -> f64 {
        PI * self
            .xi
            .iter()
            .enumerate()
            .map(|(i, x)| ((i + 1) as f64 * x).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        PI * (0.5 * self.xi.iter().map(|x| x * x).sum::<f64>()).sqrt()
    }

    fn euclid(&self) -> f64 {
        self.xi.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        self.xi
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let j = (i + 1) as f64;
                c * (j * t).cos() * (j * x).sin()
            })
            .sum()
    }
}

/// Field with `coeffs(j, j) = xi_j` on the shape `(len, len)`.
pub fn embed(v: &KernelVector) -> SpectralField {
    let n = v.len().max(1);
    embed_into(v, n, n).expect("square shape holds the diagonal")
}

/// Embedding into a field of shape `(lt, lx)`.
pub fn embed_into(v: &KernelVector, lt: usize, lx: usize) -> Result<SpectralField> {
    let mut u = SpectralField::zeros(lt, lx);
    for (i, &c) in v.xi.iter().enumerate() {
        let j = i + 1;
        if j > lt || j > lx {
            if c != 0.0 {
                return Err(Error::Truncation {
                    needed: j,
                    available: lt.min(lx),
                });
            }
            continue;
        }
        u.set(j, j, c);
    }
    Ok(u)
}

/// Sine coefficients of `eta`: `eta_j = xi_j / 2`.
pub fn eta_coeffs(v: &KernelVector) -> Vec<f64> {
    v.xi.iter().map(|x| 0.5 * x).collect()
}

/// Value of the odd profile `sum eta_j sin(j s)`.
pub fn eta_eval(eta: &[f64], s: f64) -> f64 {
    eta.iter()
        .enumerate()
        .map(|(i, c)| c * ((i + 1) as f64 * s).sin())
        .sum()
}

/// The kernel vector whose profile has sine coefficients `eta`.
pub fn from_eta(eta: &[f64]) -> KernelVector {
    KernelVector::new(eta.iter().map(|e| 2.0 * e).collect())
}

/// `(L_n v)(t, x) = eta(n(t + x)) - eta(n(t - x))`: `xi'_{n j} = xi_j`.
pub fn rescale_ln(v: &KernelVector, n: usize) -> Result<KernelVector> {
    rescale_ln_within(v, n, usize::MAX)
}

/// As [`rescale_ln`], failing when the result needs more than `max_len` modes.
pub fn rescale_ln_within(v: &KernelVector, n: usize, max_len: usize) -> Result<KernelVector> {
    if n == 0 {
        return Err(Error::InvalidInput("rescaling index must be >= 1".into()));
    }
    let len = n * v.len();
    if len > max_len {
        let last = v.xi.iter().rposition(|&c| c != 0.0).map_or(0, |i| i + 1);
        if n * last > max_len {
            return Err(Error::Truncation {
                needed: n * last,
                available: max_len,
            });
        }
    }
    let mut xi = vec![0.0; len.min(max_len)];
    for (i, &c) in v.xi.iter().enumerate() {
        let k = n * (i + 1);
        if k <= xi.len() {
            xi[k - 1] = c;
        }
    }
    Ok(KernelVector::new(xi))
}

/// Inverse of [`rescale_ln`] on `V_n`: `xi_j <- xi_{n j}`.
pub fn restrict_ln(v: &KernelVector, n: usize) -> KernelVector {
    KernelVector::new((1..=v.len() / n).map(|j| v.get(n * j)).collect())
}

/// Global sign making the first significant coefficient positive.
pub fn normalize_sign(v: &KernelVector) -> Result<KernelVector> {
    let norm = v.euclid();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let first = v
        .xi
        .iter()
        .find(|c| c.abs() > 1e-10 * norm)
        .copied()
        .unwrap_or(1.0);
    Ok(if first < 0.0 { v.scaled(-1.0) } else { v.clone() })
}

/// `gcd` of the significant support; the minimal time period is `2 pi / n`.
pub fn minimal_time_period_index(v: &KernelVector) -> Result<usize> {
    let norm = v.euclid();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(v.xi
        .iter()
        .enumerate()
        .filter(|(_, c)| c.abs() > SUPPORT_TOL * norm)
        .fold(0, |g, (i, _)| gcd(g, i + 1)))
}
