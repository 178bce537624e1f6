//! Config documents (TOML) and their validation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nlwave_core::critical_search::SearchSettings;
use nlwave_core::NonlinearitySpec;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub nonlinearity: NonlinearityConfig,
    pub frequency: FrequencyConfig,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Taylor coefficients keyed by power, e.g. `taylor = { 3 = 1.0 }`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityConfig {
    pub taylor: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyConfig {
    pub omega: Option<f64>,
    pub omega_range: Option<OmegaRange>,
    /// Temporal modes entering `gamma`; defaults to the physical truncation.
    pub l_max: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    /// Geometric in `|omega - 1|`.
    Geometric,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    pub n: Option<usize>,
    pub n_max: Option<usize>,
    pub dim: usize,
    pub restarts: usize,
    pub seed: u64,
    pub grad_tol: f64,
    pub residual_tol: f64,
    pub max_newton: usize,
    pub rho: f64,
    pub c: f64,
    pub n0: usize,
    pub force: bool,
    pub lt: Option<usize>,
    pub lx: Option<usize>,
    /// Also write the paired solution of each record.
    pub partners: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        let s = SearchSettings::default();
        Self {
            n: None,
            n_max: None,
            dim: s.dim,
            restarts: s.restarts,
            seed: s.seed,
            grad_tol: s.grad_tol,
            residual_tol: s.residual_tol,
            max_newton: s.max_newton,
            rho: s.rho,
            c: s.c,
            n0: s.n0,
            force: s.force,
            lt: None,
            lx: None,
            partners: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory for record files; the working directory by default.
    pub dir: Option<PathBuf>,
    /// Record path for a single-`n` solve.
    pub record: Option<PathBuf>,
    /// Scan table path; standard output by default.
    pub table: Option<PathBuf>,
}

/// Validated contents of a config document.
#[derive(Debug, Clone)]
pub struct Plan {
    pub f: NonlinearitySpec,
    pub omegas: Vec<f64>,
    pub l_max: Option<usize>,
    /// Single `n`, or `None` for every admissible `n <= n_max`.
    pub n: Option<usize>,
    pub n_max: usize,
    pub settings: SearchSettings,
    pub partners: bool,
    pub output: OutputConfig,
}

impl Plan {
    /// `l_max` given, else `2 dim` temporal modes on the largest lattice.
    pub fn l_max(&self) -> usize {
        self.l_max.unwrap_or_else(|| {
            let lt = self.settings.truncation.map_or(2 * self.settings.dim, |t| t.0);
            lt * self.n.unwrap_or(self.n_max)
        })
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn parse_taylor(map: &BTreeMap<String, f64>) -> CliResult<NonlinearitySpec> {
    let mut terms = Vec::new();
    for (k, v) in map {
        let k: usize = k.trim().parse().map_err(|_| bad(format!("taylor power {k:?} is not an integer")))?;
        terms.push((k, *v));
    }
    if terms.iter().all(|(_, v)| *v == 0.0) {
        return Err(bad("nonlinearity has no nonzero coefficient"));
    }
    NonlinearitySpec::from_taylor(&terms).map_err(|e| bad(e.to_string()))
}

/// `"k=v,..."`, optionally prefixed by the expected leading order `p:`.
pub fn parse_coeffs(text: &str) -> CliResult<NonlinearitySpec> {
    let (expect, body) = match text.trim().split_once(':') {
        Some((p, rest)) => {
            let p: usize = p.trim().parse().map_err(|_| bad(format!("leading order {p:?} is not an integer")))?;
            (Some(p), rest)
        }
        None => (None, text.trim()),
    };
    let mut map = BTreeMap::new();
    for item in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item.split_once('=').ok_or_else(|| bad(format!("expected k=v, got {item:?}")))?;
        let v: f64 = v.trim().parse().map_err(|_| bad(format!("coefficient {v:?} is not a number")))?;
        if map.insert(k.trim().to_string(), v).is_some() {
            return Err(bad(format!("power {k} given twice")));
        }
    }
    let f = parse_taylor(&map)?;
    if let Some(p) = expect {
        let found = f.classification().map_err(|e| bad(e.to_string()))?.p;
        if found != p {
            return Err(bad(format!("leading order is {found}, not {p}")));
        }
    }
    Ok(f)
}

fn check_omega(omega: f64) -> CliResult<()> {
    if !omega.is_finite() || !(0.5..=1.5).contains(&omega) {
        return Err(bad(format!("omega = {omega} outside [0.5, 1.5]")));
    }
    if omega == 1.0 {
        return Err(bad("omega = 1 is degenerate"));
    }
    Ok(())
}

impl OmegaRange {
    pub fn values(&self) -> CliResult<Vec<f64>> {
        check_omega(self.start)?;
        check_omega(self.stop)?;
        if self.count == 0 {
            return Err(bad("omega_range.count must be >= 1"));
        }
        if self.count == 1 {
            return Ok(vec![self.start]);
        }
        let k = (self.count - 1) as f64;
        let mut out: Vec<f64> = match self.spacing {
            Spacing::Linear => (0..self.count)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / k)
                .collect(),
            Spacing::Geometric => {
                let (a, b) = (self.start - 1.0, self.stop - 1.0);
                if a.signum() != b.signum() {
                    return Err(bad("geometric omega_range must stay on one side of 1"));
                }
                let r = (b / a).powf(1.0 / k);
                (0..self.count).map(|i| 1.0 + a * r.powi(i as i32)).collect()
            }
        };
        for w in &out {
            check_omega(*w)?;
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        Ok(out)
    }
}

impl ConfigDocument {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| bad(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Validate everything before any computation.
    pub fn plan(&self) -> CliResult<Plan> {
        let f = parse_taylor(&self.nonlinearity.taylor)?;
        let fr = &self.frequency;
        let omegas = match (fr.omega, &fr.omega_range) {
            (Some(w), None) => {
                check_omega(w)?;
                vec![w]
            }
            (None, Some(r)) => r.values()?,
            (Some(_), Some(_)) => return Err(bad("give either frequency.omega or frequency.omega_range")),
            (None, None) => return Err(bad("missing frequency.omega or frequency.omega_range")),
        };
        if fr.l_max == Some(0) {
            return Err(bad("frequency.l_max must be >= 1"));
        }
        let s = &self.search;
        if s.n.is_some() && s.n_max.is_some() {
            return Err(bad("give either search.n or search.n_max"));
        }
        if s.n == Some(0) || s.n_max == Some(0) {
            return Err(bad("n must be >= 1"));
        }
        if s.dim == 0 || s.restarts == 0 || s.max_newton == 0 {
            return Err(bad("dim, restarts and max_newton must be >= 1"));
        }
        for (name, v) in [("grad_tol", s.grad_tol), ("residual_tol", s.residual_tol), ("rho", s.rho), ("c", s.c)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(bad(format!("search.{name} must be positive")));
            }
        }
        let truncation = match (s.lt, s.lx) {
            (Some(lt), Some(lx)) if lt >= 1 && lx >= 1 => Some((lt, lx)),
            (None, None) => None,
            _ => return Err(bad("search.lt and search.lx go together and must be >= 1")),
        };
        let settings = SearchSettings {
            dim: s.dim,
            restarts: s.restarts,
            seed: s.seed,
            grad_tol: s.grad_tol,
            residual_tol: s.residual_tol,
            max_newton: s.max_newton,
            rho: s.rho,
            c: s.c,
            n0: s.n0.max(1),
            force: s.force,
            truncation,
            ..SearchSettings::default()
        };
        Ok(Plan {
            f,
            omegas,
            l_max: fr.l_max,
            n: s.n,
            n_max: s.n_max.or(s.n).unwrap_or(1),
            settings,
            partners: s.partners,
            output: self.output.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
[nonlinearity]
taylor = { 3 = 1.0 }

[frequency]
omega = 1.001
"#;

    #[test]
    fn minimal_document() {
        let plan = ConfigDocument::parse(BASIC).unwrap().plan().unwrap();
        assert_eq!(plan.omegas, vec![1.001]);
        assert_eq!(plan.n_max, 1);
        assert_eq!(plan.settings, SearchSettings::default());
        assert_eq!(plan.l_max(), 24);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{BASIC}\n[search]\ndimm = 3\n");
        assert!(matches!(ConfigDocument::parse(&text), Err(CliError::Config(_))));
        let text = BASIC.replace("[frequency]", "[frequency]\nextra = 1");
        assert!(ConfigDocument::parse(&text).is_err());
    }

    #[test]
    fn validation_errors() {
        for (from, to) in [
            ("omega = 1.001", "omega = 1.0"),
            ("omega = 1.001", "omega = 2.0"),
            ("3 = 1.0", "x = 1.0"),
            ("3 = 1.0", "1 = 1.0"),
            ("3 = 1.0", "3 = 0.0"),
        ] {
            let doc = ConfigDocument::parse(&BASIC.replace(from, to)).unwrap();
            assert!(matches!(doc.plan(), Err(CliError::Config(_))), "{to}");
        }
        let both = format!("{BASIC}\n[search]\nn = 1\nn_max = 3\n");
        assert!(ConfigDocument::parse(&both).unwrap().plan().is_err());
        let half = format!("{BASIC}\n[search]\nlt = 4\n");
        assert!(ConfigDocument::parse(&half).unwrap().plan().is_err());
    }

    #[test]
    fn omega_ranges() {
        let r = OmegaRange { start: 1.001, stop: 1.008, count: 4, spacing: Spacing::Geometric };
        let v = r.values().unwrap();
        assert_eq!(v.len(), 4);
        assert!((v[1] - 1.002).abs() < 1e-15 && (v[3] - 1.008).abs() < 1e-15);
        let r = OmegaRange { start: 0.9, stop: 1.1, count: 3, spacing: Spacing::Linear };
        assert!(r.values().is_err());
        let r = OmegaRange { start: 0.99, stop: 0.9, count: 2, spacing: Spacing::Linear };
        assert_eq!(r.values().unwrap(), vec![0.9, 0.99]);
    }

    #[test]
    fn coefficient_strings() {
        let f = parse_coeffs("3:3=1,5=-0.5").unwrap();
        assert_eq!(f.taylor(), vec![(3, 1.0), (5, -0.5)]);
        assert_eq!(parse_coeffs("2=1").unwrap().taylor(), vec![(2, 1.0)]);
        assert!(parse_coeffs("3").is_err());
        assert!(parse_coeffs("3=1,3=2").is_err());
        assert!(parse_coeffs("5:3=1").is_err());
        assert!(parse_coeffs("p:3=1").is_err());
        assert!(parse_coeffs("").is_err());
    }
}
