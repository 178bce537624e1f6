//! JSON solution records.

use std::path::Path;

use nlwave_core::critical_search::compose_u;
use nlwave_core::spectral_core::norms;
use nlwave_core::{KernelVector, Lattice, NonlinearitySpec, SolutionRecord, SpectralField};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const RECORD_VERSION: u32 = 1;

/// On-disk form of a [`SolutionRecord`]; `w_coeffs[a][b - 1]` is the
/// coefficient of `cos(t_stride a t) sin(x_stride b x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordDocument {
    pub version: u32,
    pub omega: f64,
    pub eps: f64,
    pub gamma: f64,
    pub n: usize,
    pub q: usize,
    pub case: String,
    pub xi: Vec<f64>,
    pub w_coeffs: Vec<Vec<f64>>,
    pub h1: f64,
    pub sup: f64,
    pub energy: f64,
    pub residual: f64,
    pub phi: f64,
    pub predicted_level: Option<f64>,
    pub accepted: bool,
    pub t_stride: usize,
    pub x_stride: usize,
    pub taylor: Vec<(usize, f64)>,
    pub l2: f64,
    pub omega_norm: f64,
    pub energy_drift: f64,
    pub grad_norm: f64,
    pub minimal_period: f64,
    pub period_index: usize,
    pub partner: bool,
    pub admissible: bool,
    pub in_domain: bool,
}

impl RecordDocument {
    pub fn from_record(r: &SolutionRecord) -> Self {
        Self {
            version: RECORD_VERSION,
            omega: r.omega,
            eps: r.eps,
            gamma: r.gamma,
            n: r.n,
            q: r.q,
            case: r.case.name().to_string(),
            xi: r.v.xi().to_vec(),
            w_coeffs: r.w.to_rows(),
            h1: r.norms.h1,
            sup: r.norms.sup,
            energy: r.energy,
            residual: r.residual,
            phi: r.phi,
            predicted_level: r.predicted_level.is_finite().then_some(r.predicted_level),
            accepted: r.accepted,
            t_stride: r.lattice.t_stride,
            x_stride: r.lattice.x_stride,
            taylor: r.taylor.clone(),
            l2: r.norms.l2,
            omega_norm: r.norms.omega,
            energy_drift: r.energy_drift,
            grad_norm: r.grad_norm,
            minimal_period: r.minimal_period,
            period_index: r.period_index,
            partner: r.partner,
            admissible: r.admissible,
            in_domain: r.in_domain,
        }
    }

    pub fn to_record(&self) -> CliResult<SolutionRecord> {
        let bad = |m: String| CliError::Config(format!("record: {m}"));
        if self.version != RECORD_VERSION {
            return Err(bad(format!("unsupported version {}", self.version)));
        }
        let f = NonlinearitySpec::from_taylor(&self.taylor).map_err(|e| bad(e.to_string()))?;
        let cl = *f.classification().map_err(|e| bad(e.to_string()))?;
        if cl.case.name() != self.case || cl.q != self.q {
            return Err(bad(format!("case {} / q {} do not match the taylor coefficients", self.case, self.q)));
        }
        let lattice = Lattice::new(self.t_stride, self.x_stride).map_err(|e| bad(e.to_string()))?;
        let w = SpectralField::from_rows(&self.w_coeffs, lattice).map_err(|e| bad(e.to_string()))?;
        let v = KernelVector::new(self.xi.clone());
        let u = compose_u(&v, &w).map_err(|e| bad(e.to_string()))?;
        Ok(SolutionRecord {
            n: self.n,
            omega: self.omega,
            eps: self.eps,
            gamma: self.gamma,
            q: self.q,
            case: cl.case,
            taylor: self.taylor.clone(),
            lattice,
            norms: norms(&u, self.omega),
            v,
            w,
            u,
            energy: self.energy,
            energy_drift: self.energy_drift,
            residual: self.residual,
            grad_norm: self.grad_norm,
            phi: self.phi,
            predicted_level: self.predicted_level.unwrap_or(f64::NAN),
            minimal_period: self.minimal_period,
            period_index: self.period_index,
            partner: self.partner,
            admissible: self.admissible,
            in_domain: self.in_domain,
            accepted: self.accepted,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("records contain only finite numbers");
        s.push('\n');
        s
    }
}

pub fn write_record(path: &Path, r: &SolutionRecord) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, RecordDocument::from_record(r).to_json()).map_err(|e| CliError::io(path, e))
}

pub fn read_record(path: &Path) -> CliResult<SolutionRecord> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let doc: RecordDocument =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    doc.to_record()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nlwave_core::critical_search::solve_n;
    use nlwave_core::{make_context, SearchSettings};

    #[test]
    fn round_trip() {
        let ctx = make_context(1.0 + 1e-3, 8).unwrap();
        let f = NonlinearitySpec::from_taylor(&[(3, 1.0)]).unwrap();
        let settings = SearchSettings { dim: 3, restarts: 2, ..SearchSettings::default() };
        let (recs, _) = solve_n(&ctx, &f, 2, &settings).unwrap();
        let doc = RecordDocument::from_record(&recs[0]);
        let back: RecordDocument = serde_json::from_str(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        let r = back.to_record().unwrap();
        assert_eq!(r.u, recs[0].u);
        assert_eq!(r.norms, recs[0].norms);
        assert_eq!(RecordDocument::from_record(&r), doc);
        let json: serde_json::Value = serde_json::from_str(&doc.to_json()).unwrap();
        for key in [
            "version", "omega", "eps", "gamma", "n", "q", "case", "xi", "w_coeffs", "h1", "sup", "energy",
            "residual", "phi", "predicted_level", "accepted",
        ] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }
}
