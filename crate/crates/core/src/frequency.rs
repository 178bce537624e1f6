//! Frequency arithmetic: `eps`, the truncated non-resonance margin and the
//! admissibility of `(omega, n, f)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::reduced_functional::{Case, NonlinearitySpec};

/// Slack on the bound comparison so that exactly representable boundary
/// cases are not lost to rounding of `|omega - 1|`.
const BOUND_SLACK: f64 = 1e-12;

/// Frequency together with the margin used by the discrete small divisors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyContext {
    pub omega: f64,
    /// `(omega^2 - 1) / 2`.
    pub eps: f64,
    /// `min_{1 <= l <= l_max} l min_{j != l} |omega l - j|`.
    pub gamma: f64,
    pub l_max: usize,
}

impl FrequencyContext {
    /// Context with a prescribed margin, for studies where `gamma` is known.
    pub fn with_gamma(omega: f64, gamma: f64, l_max: usize) -> Self {
        Self {
            omega,
            eps: 0.5 * (omega * omega - 1.0),
            gamma,
            l_max,
        }
    }
}

/// `gamma` over temporal modes `1..=l_max`.
pub fn truncated_gamma(omega: f64, l_max: usize) -> f64 {
    let mut gamma = f64::INFINITY;
    for l in 1..=l_max {
        let target = omega * l as f64;
        let base = target.floor() as i64;
        let mut best = f64::INFINITY;
        for j in (base - 1)..=(base + 2) {
            if j < 1 || j as usize == l {
                continue;
            }
            best = best.min((target - j as f64).abs());
        }
        gamma = gamma.min(l as f64 * best);
    }
    gamma
}

pub fn make_context(omega: f64, l_max: usize) -> Result<FrequencyContext> {
    if !(0.5..=1.5).contains(&omega) {
        return Err(Error::InvalidInput(format!("omega = {omega} outside [1/2, 3/2]")));
    }
    if l_max == 0 {
        return Err(Error::InvalidInput("l_max must be >= 1".into()));
    }
    Ok(FrequencyContext::with_gamma(
        omega,
        truncated_gamma(omega, l_max),
        l_max,
    ))
}

/// Side of `omega = 1` on which solutions are sought.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Above,
    Below,
    Either,
}

impl Side {
    pub fn allows(&self, omega: f64) -> bool {
        match self {
            Side::Above => omega > 1.0,
            Side::Below => omega < 1.0,
            Side::Either => omega != 1.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Side::Above => "omega > 1",
            Side::Below => "omega < 1",
            Side::Either => "omega != 1",
        }
    }
}

/// Outcome of the admissibility test for one `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub ok: bool,
    pub side: Side,
    pub side_ok: bool,
    /// Value compared against the constant `C`.
    pub bound: f64,
    pub n_min: usize,
    /// Classification case selecting the existence statement.
    pub case: Case,
}

/// Default smallest period index for the critical even case with `b > 0`.
pub const DEFAULT_N0: usize = 2;

/// Side, smallest index and exponent `e` of the condition
/// `(|omega - 1| n^2)^e / gamma <= C` attached to the case of `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExistenceWindow {
    pub case: Case,
    pub side: Side,
    pub n_min: usize,
    pub exponent: f64,
}

pub fn existence_window(f: &NonlinearitySpec, n0: usize) -> Result<ExistenceWindow> {
    let cl = f.classification()?;
    let (exponent, side, n_min) = match cl.case {
        Case::Odd => (1.0, if cl.a > 0.0 { Side::Above } else { Side::Below }, 1),
        Case::N1 => {
            let d = cl.d.expect("N1 carries d") as f64;
            let b = cl.b.expect("N1 carries b");
            let side = if b > 0.0 { Side::Above } else { Side::Below };
            ((cl.p as f64 - 1.0) / (d - 1.0), side, 1)
        }
        Case::N2 => (0.5, Side::Below, if cl.p == 2 { 1 } else { 2 }),
        Case::N3 => {
            let b = cl.b.expect("N3 carries b");
            let threshold = cl.p as f64 * PI * PI * cl.a * cl.a / 24.0;
            if b < 0.0 {
                (0.5, Side::Below, if cl.p == 2 { 1 } else { 2 })
            } else if b >= threshold {
                (0.5, Side::Above, n0)
            } else {
                (0.5, Side::Either, n0)
            }
        }
    };
    Ok(ExistenceWindow { case: cl.case, side, n_min, exponent })
}

/// Admissibility of `(ctx, n)` for `f` with constant `c`.
pub fn admissible(
    ctx: &FrequencyContext,
    n: usize,
    f: &NonlinearitySpec,
    c: f64,
) -> Result<AdmissibilityReport> {
    admissible_with_n0(ctx, n, f, c, DEFAULT_N0)
}

/// As [`admissible`] with a configurable smallest index in the critical case.
pub fn admissible_with_n0(
    ctx: &FrequencyContext,
    n: usize,
    f: &NonlinearitySpec,
    c: f64,
    n0: usize,
) -> Result<AdmissibilityReport> {
    let w = existence_window(f, n0)?;
    let (exponent, side, n_min) = (w.exponent, w.side, w.n_min);
    let s = (ctx.omega - 1.0).abs() * (n * n) as f64;
    let bound = if ctx.gamma > 0.0 {
        s.powf(exponent) / ctx.gamma
    } else {
        f64::INFINITY
    };
    let side_ok = side.allows(ctx.omega);
    let ok = side_ok && n >= n_min && n >= 1 && bound <= c * (1.0 + BOUND_SLACK);
    Ok(AdmissibilityReport {
        ok,
        side,
        side_ok,
        bound,
        n_min,
        case: w.case,
    })
}

/// Largest admissible `n`, or 0 when none is.
pub fn max_admissible_n(ctx: &FrequencyContext, f: &NonlinearitySpec, c: f64) -> Result<usize> {
    max_admissible_n_with_n0(ctx, f, c, DEFAULT_N0)
}

pub fn max_admissible_n_with_n0(
    ctx: &FrequencyContext,
    f: &NonlinearitySpec,
    c: f64,
    n0: usize,
) -> Result<usize> {
    if ctx.gamma <= 0.0 {
        return Ok(0);
    }
    let mut best = 0;
    let mut n = 1;
    loop {
        let r = admissible_with_n0(ctx, n, f, c, n0)?;
        if !r.side_ok || r.bound > c * (1.0 + BOUND_SLACK) || n > 10_000_000 {
            break;
        }
        if r.ok {
            best = n;
        }
        n += 1;
    }
    Ok(best)
}

/// One sample of a frequency scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanEntry {
    pub omega: f64,
    pub gamma: f64,
    pub report: AdmissibilityReport,
}

/// Admissibility on the grid `lo, lo + step, ..., <= hi`, sorted by `omega`.
pub fn scan_frequencies(
    (lo, hi): (f64, f64),
    step: f64,
    l_max: usize,
    n: usize,
    f: &NonlinearitySpec,
    c: f64,
) -> Result<Vec<ScanEntry>> {
    if !(step > 0.0) {
        return Err(Error::InvalidInput("scan step must be positive".into()));
    }
    if hi < lo {
        return Err(Error::InvalidInput(format!("empty interval [{lo}, {hi}]")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|k| {
            let omega = (lo + k as f64 * step).min(hi);
            let ctx = make_context(omega, l_max)?;
            Ok(ScanEntry {
                omega,
                gamma: ctx.gamma,
                report: admissible(&ctx, n, f, c)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic() -> NonlinearitySpec {
        NonlinearitySpec::from_taylor(&[(3, 1.0)]).unwrap()
    }

    #[test]
    fn context_examples() {
        assert_eq!(make_context(1.5, 2).unwrap().gamma, 0.0);
        assert!((make_context(1.01, 3).unwrap().eps - 0.01005).abs() < 1e-15);
        let ctx = make_context(1.06, 5).unwrap();
        assert!((ctx.gamma - 0.94).abs() < 1e-12);
        assert!(make_context(1.6, 3).is_err());
    }

    /// Direct scan over every `j` up to twice the largest `omega l`.
    fn gamma_brute(omega: f64, l_max: usize) -> f64 {
        let mut g = f64::INFINITY;
        for l in 1..=l_max {
            for j in 1..=(2 * l_max + 4) {
                if j != l {
                    g = g.min(l as f64 * (omega * l as f64 - j as f64).abs());
                }
            }
        }
        g
    }

    #[test]
    fn gamma_matches_brute_force_and_is_monotone() {
        for &omega in &[0.55, 0.73, 1.0001, 1.2345, 1.4137] {
            let mut prev = f64::INFINITY;
            for l in 1..30 {
                let g = truncated_gamma(omega, l);
                assert!((g - gamma_brute(omega, l)).abs() < 1e-12);
                assert!(g <= prev);
                prev = g;
            }
        }
        assert_eq!(truncated_gamma(0.75, 4), 0.0);
    }

    #[test]
    fn admissibility_examples() {
        let ctx = FrequencyContext::with_gamma(1.0 + 1e-4, 0.9, 20);
        let r = admissible(&ctx, 10, &cubic(), 0.05).unwrap();
        assert!(r.ok && r.side == Side::Above);
        assert!((r.bound - 1e-2 / 0.9).abs() < 1e-9);
        let below = FrequencyContext::with_gamma(1.0 - 1e-4, 0.9, 20);
        assert!(!admissible(&below, 10, &cubic(), 0.05).unwrap().ok);
        let sq = NonlinearitySpec::from_taylor(&[(2, 1.0)]).unwrap();
        let r = admissible(&below, 1, &sq, 0.05).unwrap();
        assert!(r.ok && r.side == Side::Below && r.n_min == 1);
        let q4 = NonlinearitySpec::from_taylor(&[(4, 1.0)]).unwrap();
        assert!(!admissible(&below, 1, &q4, 0.05).unwrap().ok);
        assert!(admissible(&below, 2, &q4, 0.05).unwrap().ok);
        let one = FrequencyContext::with_gamma(1.0, 1.0, 5);
        assert!(!admissible(&one, 1, &cubic(), 10.0).unwrap().ok);
    }

    #[test]
    fn critical_even_window() {
        let thr = 2.0 * PI * PI / 24.0;
        let above = FrequencyContext::with_gamma(1.001, 0.9, 5);
        let below = FrequencyContext::with_gamma(0.999, 0.9, 5);
        let strong = NonlinearitySpec::from_taylor(&[(2, 1.0), (3, 1.1 * thr)]).unwrap();
        let weak = NonlinearitySpec::from_taylor(&[(2, 1.0), (3, 0.5 * thr)]).unwrap();
        let neg = NonlinearitySpec::from_taylor(&[(2, 1.0), (3, -1.0)]).unwrap();
        assert_eq!(admissible(&above, 2, &strong, 1.0).unwrap().side, Side::Above);
        assert!(!admissible(&below, 2, &strong, 1.0).unwrap().ok);
        assert!(admissible(&below, 2, &weak, 1.0).unwrap().ok);
        assert!(admissible(&above, 2, &weak, 1.0).unwrap().ok);
        assert!(!admissible(&above, 1, &weak, 1.0).unwrap().ok);
        let r = admissible(&below, 1, &neg, 1.0).unwrap();
        assert!(r.ok && r.n_min == 1);
    }

    #[test]
    fn max_n_examples() {
        let zero = FrequencyContext::with_gamma(1.5, 0.0, 5);
        assert_eq!(max_admissible_n(&zero, &cubic(), 0.05).unwrap(), 0);
        let ctx = FrequencyContext::with_gamma(1.01, 1.0, 5);
        assert_eq!(max_admissible_n(&ctx, &cubic(), 1.0).unwrap(), 10);
        let mut prev = usize::MAX;
        for k in 0..8 {
            let d = 1e-4 * 2f64.powi(k);
            let n = max_admissible_n(&FrequencyContext::with_gamma(1.0 + d, 0.9, 5), &cubic(), 0.05)
                .unwrap();
            assert!(n <= prev);
            prev = n;
        }
    }

    #[test]
    fn admissibility_monotone_in_n() {
        let ctx = FrequencyContext::with_gamma(1.0 + 3e-4, 0.8, 5);
        let top = max_admissible_n(&ctx, &cubic(), 0.05).unwrap();
        assert!(top > 1);
        for n in 1..=top {
            assert!(admissible(&ctx, n, &cubic(), 0.05).unwrap().ok);
        }
        assert!(!admissible(&ctx, top + 1, &cubic(), 0.05).unwrap().ok);
    }

    #[test]
    fn scan_examples() {
        let f = cubic();
        let s = scan_frequencies((1.45, 1.5), 0.01, 4, 1, &f, 0.05).unwrap();
        assert_eq!(s.len(), 6);
        assert_eq!(s.last().unwrap().gamma, 0.0);
        assert!(s.windows(2).all(|w| w[0].omega < w[1].omega));
        let one = scan_frequencies((1.2, 1.2), 0.01, 4, 1, &f, 0.05).unwrap();
        assert_eq!(one.len(), 1);
        assert!(scan_frequencies((1.2, 1.1), 0.01, 4, 1, &f, 0.05).is_err());
        assert!(scan_frequencies((1.1, 1.2), 0.0, 4, 1, &f, 0.05).is_err());
    }

    #[test]
    fn admissible_count_tracks_inverse_root_distance() {
        let f = cubic();
        for k in 0..4 {
            let d = 1e-4 * 4f64.powi(k);
            let ctx = make_context(1.0 + d, 40).unwrap();
            let n = max_admissible_n(&ctx, &f, 0.05).unwrap() as f64;
            let predicted = (0.05 * ctx.gamma / d).sqrt();
            assert!(n <= 2.0 * predicted && n >= 0.5 * predicted, "{n} vs {predicted}");
        }
    }
}
