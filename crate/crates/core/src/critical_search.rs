//! The kernel equation: maximization of the leading term on the unit sphere,
//! scaling to an initial guess, Newton refinement of the reduced gradient in
//! `V_n`, and assembly of solution records.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::frequency::{admissible_with_n0, max_admissible_n_with_n0, FrequencyContext, DEFAULT_N0};
use crate::kernel_space::{minimal_time_period_index, normalize_sign, KernelVector};
use crate::poly::Polynomial;
use crate::range_solver::{apply_l, Galerkin, DEFAULT_RHO};
use crate::reduced_functional::{Case, Evaluation, LeadingTerm, NonlinearitySpec, ReducedFunctional};
use crate::spectral_core::{l2_norm, norms, Lattice, NormBundle, SpectralField, XQuadrature};

/// Tunables of the solution pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSettings {
    /// Kernel coordinates in the gcd-one space.
    pub dim: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Target for the coefficient 2-norm of the reduced gradient.
    pub grad_tol: f64,
    /// Acceptance bound on the Galerkin residual relative to `f(u)`.
    pub residual_tol: f64,
    pub max_newton: usize,
    pub rho: f64,
    /// Admissibility constant.
    pub c: f64,
    pub n0: usize,
    /// Attempt `n` even when it lies outside the admissible range.
    pub force: bool,
    /// Reduced truncation `(lt, lx)`; the default depends on `dim` and `f`.
    pub truncation: Option<(usize, usize)>,
    pub energy_samples: usize,
    /// Bound on the relative energy variation along `t`.
    pub energy_tol: f64,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            dim: 12,
            restarts: 16,
            seed: 0,
            grad_tol: 1e-10,
            residual_tol: 1e-8,
            max_newton: 40,
            rho: DEFAULT_RHO,
            c: 0.05,
            n0: DEFAULT_N0,
            force: false,
            truncation: None,
            energy_samples: 64,
            energy_tol: 1e-9,
        }
    }
}

/// Diagnostics of the search for one `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchDiagnostics {
    pub m_hat: f64,
    /// Unit-norm maximizer.
    pub y_star: KernelVector,
    pub restarts: usize,
    /// Distinct maximizers found on the plateau of `m_hat`.
    pub maximizers: usize,
    /// Sign `s` of `eps`; the search works with `s Phi`.
    pub sign: f64,
    /// Mountain-pass level of `s Phi_{eps,n}` from the leading term.
    pub predicted_level: f64,
    pub predicted_amplitude: f64,
    /// `sup |DR(v)[v]| / |v|^{q+1}` over the probe points.
    pub alpha_hat: f64,
    pub newton_iterations: usize,
    pub grad_norm: f64,
}

/// One solution `u = v + w(v)` with its checks.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionRecord {
    pub n: usize,
    pub omega: f64,
    pub eps: f64,
    pub gamma: f64,
    pub q: usize,
    pub case: Case,
    pub taylor: Vec<(usize, f64)>,
    /// Lattice of `w` and `u`.
    pub lattice: Lattice,
    /// Kernel part on physical indices.
    pub v: KernelVector,
    pub w: SpectralField,
    pub u: SpectralField,
    pub norms: NormBundle,
    /// Energy at `t = 0`.
    pub energy: f64,
    /// `(max - min) / |mean|` of the energy over one period.
    pub energy_drift: f64,
    /// Weighted residual of the Galerkin equations relative to `f(u)`.
    pub residual: f64,
    pub grad_norm: f64,
    pub phi: f64,
    /// Leading-order prediction of `phi`, signed like `eps`.
    pub predicted_level: f64,
    /// Minimal period in physical time, `2 pi / (n omega)`.
    pub minimal_period: f64,
    /// Minimal time-period index of the kernel part.
    pub period_index: usize,
    /// Whether this is the image `u(t + pi, pi - x)` of the computed branch.
    pub partner: bool,
    /// Whether `(omega, n)` satisfies the admissibility condition.
    pub admissible: bool,
    /// Whether `|v|_omega^{p-1} / gamma` stayed below `rho`.
    pub in_domain: bool,
    pub accepted: bool,
}

impl SolutionRecord {
    /// The paired solution `u(t + pi, pi - x)`.
    pub fn partner_record(&self) -> Self {
        let mut out = self.clone();
        out.v = self.v.scaled(-1.0);
        out.w = self.w.shifted_reflected();
        out.u = self.u.shifted_reflected();
        out.partner = !self.partner;
        out
    }

    pub fn nonlinearity(&self) -> Result<NonlinearitySpec> {
        NonlinearitySpec::from_taylor(&self.taylor)
    }
}

/// Objective `s H(L_n v)` on gcd-one kernel vectors of length `dim`.
#[derive(Debug, Clone)]
pub struct Objective {
    lead: LeadingTerm,
    sign: f64,
}

impl Objective {
    pub fn new(f: &NonlinearitySpec, dim: usize, n: usize, sign: f64) -> Result<Self> {
        Ok(Self { lead: LeadingTerm::new(f, dim, n)?, sign })
    }

    /// Objective whose positive maximum selects the side allowed by `f`.
    pub fn natural(f: &NonlinearitySpec, dim: usize) -> Result<Self> {
        let cl = *f.classification()?;
        let sign = match cl.case {
            Case::Odd => cl.a.signum(),
            Case::N1 => cl.b.unwrap_or(1.0).signum(),
            Case::N2 => -1.0,
            Case::N3 => {
                if cl.b.unwrap_or(0.0) < 0.0 {
                    -1.0
                } else {
                    1.0
                }
            }
        };
        Self::new(f, dim, 1, sign)
    }

    pub fn dim(&self) -> usize {
        self.lead.len()
    }

    pub fn degree(&self) -> usize {
        self.lead.degree()
    }

    pub fn sign(&self) -> f64 {
        self.sign
    }

    pub fn value_grad(&self, xi: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (h, dh) = self.lead.h_with_grad(xi)?;
        Ok((self.sign * h, dh.into_iter().map(|x| self.sign * x).collect()))
    }

    pub fn value(&self, xi: &[f64]) -> Result<f64> {
        Ok(self.value_grad(xi)?.0)
    }

    /// Value and gradient in the sphere coordinates `y_k = pi k xi_k`.
    fn value_grad_y(&self, y: &[f64]) -> Result<(f64, Vec<f64>)> {
        let xi = y_to_xi(y);
        let (o, g) = self.value_grad(&xi)?;
        Ok((o, g.iter().enumerate().map(|(k, x)| x / (PI * (k + 1) as f64)).collect()))
    }
}

fn y_to_xi(y: &[f64]) -> Vec<f64> {
    y.iter().enumerate().map(|(k, x)| x / (PI * (k + 1) as f64)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalized(a: &[f64]) -> Vec<f64> {
    let n = norm(a);
    a.iter().map(|x| x / n).collect()
}

/// A unit-sphere maximizer.
#[derive(Debug, Clone, PartialEq)]
pub struct Maximizer {
    pub value: f64,
    /// Unit `H^1` norm, sign-normalized.
    pub y: KernelVector,
}

const ASCENT_MAX_ITER: usize = 5000;
const ASCENT_TOL: f64 = 1e-10;

/// Projected gradient ascent on the unit sphere from `y0`.
fn ascend(obj: &Objective, y0: &[f64]) -> Result<(f64, Vec<f64>)> {
    let deg = obj.degree() as f64;
    let mut y = normalized(y0);
    let (mut o, g) = obj.value_grad_y(&y)?;
    let tangent = |g: &[f64], y: &[f64]| -> Vec<f64> {
        let c = dot(g, y);
        g.iter().zip(y).map(|(a, b)| a - c * b).collect()
    };
    let mut t = tangent(&g, &y);
    let mut tau = 1.0 / (deg * o.abs().max(1e-300));
    let mut history = vec![o];
    for it in 0..ASCENT_MAX_ITER {
        let tn = norm(&t);
        if tn <= ASCENT_TOL * deg * o.abs().max(1e-300) {
            break;
        }
        if it >= 10 && o - history[it - 10] <= 1e-15 * o.abs() {
            break;
        }
        let mut step_ok = false;
        for _ in 0..30 {
            let trial: Vec<f64> = y.iter().zip(&t).map(|(a, b)| a + tau * b).collect();
            let trial = normalized(&trial);
            let (on, gn) = obj.value_grad_y(&trial)?;
            if on >= o + 1e-4 * tau * tn * tn {
                let tnew = tangent(&gn, &trial);
                let s: Vec<f64> = trial.iter().zip(&y).map(|(a, b)| a - b).collect();
                let r: Vec<f64> = tnew.iter().zip(&t).map(|(a, b)| a - b).collect();
                let sr = dot(&s, &r).abs();
                tau = if sr > 0.0 { (dot(&s, &s) / sr).clamp(tau * 1e-3, tau * 1e3) } else { tau * 2.0 };
                y = trial;
                o = on;
                t = tnew;
                history.push(o);
                step_ok = true;
                break;
            }
            tau *= 0.5;
        }
        if !step_ok {
            break;
        }
    }
    Ok((o, y))
}

/// Distinct maximizers of the objective on the unit sphere, best first.
pub fn maximize_objective(obj: &Objective, restarts: usize, seed: u64) -> Result<Vec<Maximizer>> {
    let dim = obj.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found: Vec<(f64, Vec<f64>)> = Vec::new();
    for _ in 0..restarts.max(1) {
        let y0: Vec<f64> = (1..=dim)
            .map(|k| {
                let xi = rng.gen_range(-1.0..1.0) / (k * k) as f64;
                PI * k as f64 * xi
            })
            .collect();
        if norm(&y0) == 0.0 {
            continue;
        }
        found.push(ascend(obj, &y0)?);
    }
    found.sort_by(|a, b| b.0.total_cmp(&a.0));
    let best = found.first().map(|f| f.0).unwrap_or(f64::NEG_INFINITY);
    if !(best > 0.0) {
        return Err(Error::Infeasible(format!(
            "the leading term has no positive maximum on this side (best {best:.3e})"
        )));
    }
    let mut out: Vec<Maximizer> = Vec::new();
    for (o, y) in found {
        if o < best - 1e-8 * best {
            break;
        }
        let y = normalize_sign(&KernelVector::new(y_to_xi(&y)))?;
        let yy = xi_to_y(y.xi());
        if out.iter().all(|m| norm(&sub(&xi_to_y(m.y.xi()), &yy)) > 1e-6) {
            out.push(Maximizer { value: o, y });
        }
    }
    Ok(out)
}

fn xi_to_y(xi: &[f64]) -> Vec<f64> {
    xi.iter().enumerate().map(|(k, x)| PI * (k + 1) as f64 * x).collect()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `sup U` on the unit sphere of `dim` modes for the side allowed by `f`.
pub fn maximize_u(f: &NonlinearitySpec, dim: usize, restarts: usize, seed: u64) -> Result<(f64, KernelVector)> {
    let obj = Objective::natural(f, dim)?;
    let best = maximize_objective(&obj, restarts, seed)?.remove(0);
    Ok((best.value, best.y))
}

fn sign_of(ctx: &FrequencyContext) -> Result<f64> {
    if ctx.eps == 0.0 {
        return Err(Error::Infeasible("omega = 1 is degenerate".into()));
    }
    Ok(ctx.eps.signum())
}

fn mu(ctx: &FrequencyContext, n: usize) -> f64 {
    ctx.eps.abs() * (n * n) as f64
}

/// `(mu / (m (q + 1)))^{1/(q-1)}` with `mu = |eps| n^2`.
pub fn predicted_amplitude(ctx: &FrequencyContext, n: usize, q: usize, m_hat: f64) -> Result<f64> {
    if !(m_hat > 0.0) {
        return Err(Error::Infeasible(format!("nonpositive maximum {m_hat:.3e}")));
    }
    let qf = q as f64;
    Ok((mu(ctx, n) / (m_hat * (qf + 1.0))).powf(1.0 / (qf - 1.0)))
}

/// `((q - 1) / 2) m (mu / ((q + 1) m))^{(q+1)/(q-1)}`.
pub fn predicted_level(ctx: &FrequencyContext, n: usize, q: usize, m_hat: f64) -> Result<f64> {
    if !(m_hat > 0.0) {
        return Err(Error::Infeasible(format!("nonpositive maximum {m_hat:.3e}")));
    }
    let qf = q as f64;
    Ok(0.5 * (qf - 1.0) * m_hat * (mu(ctx, n) / ((qf + 1.0) * m_hat)).powf((qf + 1.0) / (qf - 1.0)))
}

/// Scaled maximizer in the gcd-one space.
pub fn initial_guess(
    ctx: &FrequencyContext,
    n: usize,
    f: &NonlinearitySpec,
    m_hat: f64,
    y_star: &KernelVector,
) -> Result<KernelVector> {
    let q = f.classification()?.q;
    Ok(y_star.scaled(predicted_amplitude(ctx, n, q, m_hat)?))
}

/// Lattice carrying `L_n v`, `w` and `u` for `f`.
pub fn lattice_for(f: &NonlinearitySpec, n: usize) -> Result<Lattice> {
    if f.polynomial().has_even_terms() {
        Lattice::new(n, 1)
    } else {
        Lattice::new(n, n)
    }
}

/// Default reduced truncation on [`lattice_for`].
pub fn default_shape(f: &NonlinearitySpec, n: usize, dim: usize) -> (usize, usize) {
    if f.polynomial().has_even_terms() {
        (2 * dim, 8 * n * dim)
    } else {
        (2 * dim, 2 * dim)
    }
}

/// Reduced functional for `Phi_{eps,n}` on the gcd-one coordinates.
pub fn functional_for(
    ctx: &FrequencyContext,
    f: &NonlinearitySpec,
    n: usize,
    dim: usize,
    truncation: Option<(usize, usize)>,
) -> Result<ReducedFunctional> {
    let shape = truncation.unwrap_or_else(|| default_shape(f, n, dim));
    Ok(ReducedFunctional::new(Galerkin::new(ctx, f, lattice_for(f, n)?, shape, dim)?))
}

/// Outcome of the Newton refinement.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub eval: Evaluation,
    pub iterations: usize,
    pub grad_norm: f64,
    /// Gradient norms per iteration.
    pub trace: Vec<f64>,
    pub converged: bool,
}

/// GMRES without restarts for the matrix-free operator `a`.
pub fn gmres(
    a: impl Fn(&[f64]) -> Result<Vec<f64>>,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let n = b.len();
    let beta = norm(b);
    if beta == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let m = max_iter.min(n).max(1);
    let mut basis: Vec<Vec<f64>> = vec![b.iter().map(|x| x / beta).collect()];
    let mut h = vec![vec![0.0; m]; m + 1];
    let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
    let mut g = vec![0.0; m + 1];
    g[0] = beta;
    let mut k_used = 0;
    for k in 0..m {
        let mut w = a(&basis[k])?;
        for _ in 0..2 {
            for (i, vi) in basis.iter().enumerate() {
                let c = dot(&w, vi);
                h[i][k] += c;
                w.iter_mut().zip(vi).for_each(|(x, y)| *x -= c * y);
            }
        }
        let hn = norm(&w);
        h[k + 1][k] = hn;
        for i in 0..k {
            let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
            h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
            h[i][k] = t;
        }
        let r = h[k][k].hypot(h[k + 1][k]);
        if r == 0.0 {
            k_used = k;
            break;
        }
        cs[k] = h[k][k] / r;
        sn[k] = h[k + 1][k] / r;
        h[k][k] = r;
        h[k + 1][k] = 0.0;
        g[k + 1] = -sn[k] * g[k];
        g[k] *= cs[k];
        k_used = k + 1;
        if g[k + 1].abs() <= tol * beta || hn <= 1e-300 {
            break;
        }
        basis.push(w.iter().map(|x| x / hn).collect());
    }
    let mut y = vec![0.0; k_used];
    for i in (0..k_used).rev() {
        let s: f64 = (i + 1..k_used).map(|j| h[i][j] * y[j]).sum();
        y[i] = (g[i] - s) / h[i][i];
    }
    let mut x = vec![0.0; n];
    for (yi, vi) in y.iter().zip(&basis) {
        x.iter_mut().zip(vi).for_each(|(a, b)| *a += yi * b);
    }
    Ok(x)
}

fn diag_scale(rf: &ReducedFunctional, e: &Evaluation) -> f64 {
    let fd = rf.galerkin().kernel_part(&e.fu);
    0.5 * PI * PI * norm(&fd)
}

/// Damped Newton on the reduced gradient with GMRES solves and a
/// gradient-of-residual fallback.
pub fn refine_functional(
    rf: &ReducedFunctional,
    xi0: &[f64],
    settings: &SearchSettings,
) -> Result<Refinement> {
    let mut e = rf.evaluate(xi0, None)?;
    let mut trace = vec![norm(&e.grad)];
    let mut iterations = 0;
    let mut stalls = 0;
    loop {
        let gn = norm(&e.grad);
        if e.report.domain_ratio > 10.0 * settings.rho {
            return Err(Error::Divergence(format!(
                "left the contraction domain (ratio {:.3e}) after {iterations} iterations, gradient trace {trace:?}",
                e.report.domain_ratio
            )));
        }
        let target = settings.grad_tol.min(1e-12 * diag_scale(rf, &e).max(1e-300));
        if gn <= target || gn == 0.0 {
            return Ok(Refinement { eval: e, iterations, grad_norm: gn, trace, converged: true });
        }
        if iterations >= settings.max_newton || stalls >= 3 {
            let converged = gn <= settings.grad_tol;
            return Ok(Refinement { eval: e, iterations, grad_norm: gn, trace, converged });
        }
        iterations += 1;
        let rhs: Vec<f64> = e.grad.iter().map(|x| -x).collect();
        let step = gmres(|h| rf.hess_vec(&e, h), &rhs, 1e-13, 200)?;
        let mut accepted = try_line(rf, &e, &step, gn)?;
        if accepted.is_none() {
            let hg = rf.hess_vec(&e, &e.grad)?;
            let scale = gn * gn / dot(&hg, &hg).max(1e-300);
            let dir: Vec<f64> = hg.iter().map(|x| -scale * x).collect();
            accepted = try_line(rf, &e, &dir, gn)?;
        }
        match accepted {
            Some(next) => {
                if norm(&next.grad) > 0.5 * gn {
                    stalls += 1;
                } else {
                    stalls = 0;
                }
                e = next;
            }
            None => stalls = 3,
        }
        trace.push(norm(&e.grad));
    }
}

fn try_line(rf: &ReducedFunctional, e: &Evaluation, dir: &[f64], gn: f64) -> Result<Option<Evaluation>> {
    let mut alpha = 1.0;
    for _ in 0..12 {
        let xi: Vec<f64> = e.xi.iter().zip(dir).map(|(x, d)| x + alpha * d).collect();
        if let Ok(next) = rf.evaluate(&xi, Some(&e.w)) {
            if norm(&next.grad) < (1.0 - 1e-4 * alpha) * gn {
                return Ok(Some(next));
            }
        }
        alpha *= 0.5;
    }
    Ok(None)
}

/// Critical point of `Phi_{eps,n}` near the gcd-one vector `v0`, returned
/// as the physical kernel vector `L_n v`.
pub fn refine(
    v0: &KernelVector,
    ctx: &FrequencyContext,
    n: usize,
    f: &NonlinearitySpec,
    tol: f64,
) -> Result<KernelVector> {
    let settings = SearchSettings { grad_tol: tol, ..SearchSettings::default() };
    let rf = functional_for(ctx, f, n, v0.len(), None)?;
    let r = refine_functional(&rf, v0.xi(), &settings)?;
    if !r.converged {
        return Err(Error::Divergence(format!("gradient stalled at {:.3e}, trace {:?}", r.grad_norm, r.trace)));
    }
    Ok(rf.galerkin().physical_kernel(&r.eval.xi))
}

/// `int_0^pi omega^2 u_t^2 / 2 + u_x^2 / 2 + F(u) dx` at time `t`.
pub fn energy_at(u: &SpectralField, omega: f64, big_f: &Polynomial, t: f64) -> f64 {
    let u = u.to_unit_lattice();
    let la = u.lattice();
    let lx = u.lx();
    let mut pos = vec![0.0; lx];
    let mut vel = vec![0.0; lx];
    for ((a, b), &c) in u.coeffs().indexed_iter() {
        let l = la.l(a) as f64;
        pos[b] += c * (l * t).cos();
        vel[b] -= c * l * (l * t).sin();
    }
    let mut quad = 0.0;
    for b in 0..lx {
        let j = (b + 1) as f64;
        quad += omega * omega * vel[b] * vel[b] + j * j * pos[b] * pos[b];
    }
    let xq = XQuadrature::new(big_f.degree().max(1) * lx);
    let s = xq.synthesis(lx);
    let vals: Vec<f64> = (0..xq.nodes().len())
        .map(|k| (0..lx).map(|b| pos[b] * s[(b, k)]).sum())
        .collect();
    let (odd, even): (Vec<f64>, Vec<f64>) = vals.iter().map(|&x| big_f.eval_parts(x)).unzip();
    0.25 * PI * quad + xq.integrate_parts(&odd, &even)
}

fn weighted_norm(u: &SpectralField) -> f64 {
    l2_norm(u)
}

/// `R_{lj} = (j^2 - omega^2 l^2) u_{lj} + f(u)_{lj}` relative to `f(u)`, over
/// the range modes of the truncation and the kernel modes `1..=dim`.
pub fn galerkin_residual(g: &Galerkin, u: &SpectralField, fu: &SpectralField) -> Result<f64> {
    let mut r = fu.sub(&apply_l(u, g.ctx().omega))?;
    let la = g.lattice();
    let mut k = g.dim() + 1;
    loop {
        let (a, b) = la.diagonal_position(k);
        if a > r.lt() || b > r.lx() {
            break;
        }
        r.set(a, b, 0.0);
        k += 1;
    }
    let nf = weighted_norm(fu);
    let nr = weighted_norm(&r);
    Ok(if nf > 0.0 { nr / nf } else { nr })
}

struct AssemblyInfo {
    n: usize,
    predicted_level: f64,
    admissible: bool,
    grad_norm: f64,
}

fn assemble(
    rf: &ReducedFunctional,
    e: &Evaluation,
    f: &NonlinearitySpec,
    info: AssemblyInfo,
    settings: &SearchSettings,
) -> Result<SolutionRecord> {
    let g = rf.galerkin();
    let ctx = *g.ctx();
    let cl = *f.classification()?;
    let big_f = f.primitive();
    let v = g.physical_kernel(&e.xi);
    let residual = galerkin_residual(g, &e.u, &e.fu)?;
    let energy = energy_at(&e.u, ctx.omega, &big_f, 0.0);
    let samples = settings.energy_samples.max(2);
    let es: Vec<f64> = (0..samples)
        .map(|i| energy_at(&e.u, ctx.omega, &big_f, 2.0 * PI * i as f64 / samples as f64))
        .collect();
    let (lo, hi) = es.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let mean = es.iter().sum::<f64>() / samples as f64;
    let energy_drift = if mean != 0.0 { (hi - lo) / mean.abs() } else { hi - lo };
    let period_index = minimal_time_period_index(&v).unwrap_or(0);
    let accepted = residual <= settings.residual_tol
        && period_index == info.n
        && energy_drift <= settings.energy_tol;
    Ok(SolutionRecord {
        n: info.n,
        omega: ctx.omega,
        eps: ctx.eps,
        gamma: ctx.gamma,
        q: cl.q,
        case: cl.case,
        taylor: f.taylor(),
        lattice: g.lattice(),
        v,
        w: e.w.clone(),
        u: e.u.clone(),
        norms: norms(&e.u, ctx.omega),
        energy,
        energy_drift,
        residual,
        grad_norm: info.grad_norm,
        phi: e.phi,
        predicted_level: info.predicted_level,
        minimal_period: 2.0 * PI / (info.n as f64 * ctx.omega),
        period_index,
        partner: false,
        admissible: info.admissible,
        in_domain: e.report.in_domain,
        accepted,
    })
}

/// `v + w` on the lattice and truncation of `w`.
pub fn compose_u(v: &KernelVector, w: &SpectralField) -> Result<SpectralField> {
    let la = w.lattice();
    let g = la.kernel_stride();
    let mut u = w.clone();
    for (i, &c) in v.xi().iter().enumerate() {
        let j = i + 1;
        if c == 0.0 {
            continue;
        }
        if j % g != 0 {
            return Err(Error::DimensionMismatch(format!("kernel mode {j} is not on {la:?}")));
        }
        let (a, b) = la.diagonal_position(j / g);
        if a > u.lt() || b > u.lx() {
            return Err(Error::Truncation { needed: j, available: u.lt().min(u.lx()) });
        }
        u.set(a, b, c);
    }
    Ok(u)
}

/// Record for a physical kernel vector `v_star` in `V_n`.
pub fn build_solution(
    v_star: &KernelVector,
    ctx: &FrequencyContext,
    n: usize,
    f: &NonlinearitySpec,
) -> Result<SolutionRecord> {
    let settings = SearchSettings::default();
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let la = lattice_for(f, n)?;
    let g_stride = la.kernel_stride();
    let dim = (v_star.len() / g_stride).max(1);
    let xi: Vec<f64> = (1..=dim).map(|k| v_star.get(g_stride * k)).collect();
    let rf = functional_for(ctx, f, n, dim, None)?;
    let e = rf.evaluate(&xi, None)?;
    let admissible = admissible_with_n0(ctx, n, f, settings.c, settings.n0)?.ok;
    let grad_norm = norm(&e.grad);
    assemble(
        &rf,
        &e,
        f,
        AssemblyInfo { n, predicted_level: f64::NAN, admissible, grad_norm },
        &settings,
    )
}

/// Full pipeline for one `n`: all records (one per distinct maximizer) and
/// the diagnostics of the best one.
pub fn solve_n(
    ctx: &FrequencyContext,
    f: &NonlinearitySpec,
    n: usize,
    settings: &SearchSettings,
) -> Result<(Vec<SolutionRecord>, SearchDiagnostics)> {
    solve_n_with(ctx, f, n, settings, None)
}

fn n_independent(cl: &crate::reduced_functional::Classification) -> bool {
    match cl.case {
        Case::Odd | Case::N1 => true,
        Case::N2 => false,
        Case::N3 => cl.b.unwrap_or(0.0) > 0.0,
    }
}

fn solve_n_with(
    ctx: &FrequencyContext,
    f: &NonlinearitySpec,
    n: usize,
    settings: &SearchSettings,
    cached: Option<&[Maximizer]>,
) -> Result<(Vec<SolutionRecord>, SearchDiagnostics)> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    if ctx.gamma <= 0.0 {
        return Err(Error::Infeasible(format!("omega = {} is resonant on the truncation", ctx.omega)));
    }
    let cl = *f.classification()?;
    let rep = admissible_with_n0(ctx, n, f, settings.c, settings.n0)?;
    if !rep.ok && !settings.force {
        return Err(Error::Infeasible(format!(
            "(omega = {}, n = {n}) is not admissible: side {} {}, bound {:.3e}, n_min {}",
            ctx.omega,
            rep.side.name(),
            if rep.side_ok { "met" } else { "violated" },
            rep.bound,
            rep.n_min
        )));
    }
    let sign = sign_of(ctx)?;
    let dim = settings.dim;
    let owned;
    let maxima = match cached {
        Some(m) => m,
        None => {
            let obj = Objective::new(f, dim, n, sign)?;
            owned = maximize_objective(&obj, settings.restarts, settings.seed)?;
            &owned[..]
        }
    };
    let best = &maxima[0];
    let amp = predicted_amplitude(ctx, n, cl.q, best.value)?;
    let level = sign * predicted_level(ctx, n, cl.q, best.value)?;
    let rf = functional_for(ctx, f, n, dim, settings.truncation)?;
    let obj = Objective::new(f, dim, n, sign)?;
    let mut records = Vec::new();
    let mut diag = None;
    for (i, mx) in maxima.iter().enumerate() {
        let v0 = mx.y.scaled(amp);
        let r = refine_functional(&rf, v0.xi(), settings)?;
        if !r.converged {
            let msg = format!("gradient stalled at {:.3e}, trace {:?}", r.grad_norm, r.trace);
            if i == 0 {
                return Err(Error::Divergence(msg));
            }
            continue;
        }
        if i == 0 {
            let probes = [v0.scaled(0.5), v0.clone(), KernelVector::new(r.eval.xi.clone())];
            let mut alpha_hat = 0.0f64;
            for p in &probes {
                let e = if p.xi() == r.eval.xi.as_slice() { r.eval.clone() } else { rf.evaluate(p.xi(), None)? };
                let nv = p.h1_norm();
                let o = obj.value(p.xi())?;
                let dr = sign * dot(&e.grad, p.xi()) - mu(ctx, n) * nv * nv + (cl.q + 1) as f64 * o;
                alpha_hat = alpha_hat.max(dr.abs() / nv.powi(cl.q as i32 + 1));
            }
            diag = Some(SearchDiagnostics {
                m_hat: best.value,
                y_star: best.y.clone(),
                restarts: settings.restarts,
                maximizers: maxima.len(),
                sign,
                predicted_level: level,
                predicted_amplitude: amp,
                alpha_hat,
                newton_iterations: r.iterations,
                grad_norm: r.grad_norm,
            });
        }
        records.push(assemble(
            &rf,
            &r.eval,
            f,
            AssemblyInfo { n, predicted_level: level, admissible: rep.ok, grad_norm: r.grad_norm },
            settings,
        )?);
    }
    Ok((records, diag.expect("best maximizer refined")))
}

/// Result of the pipeline for one `n` of a branch.
#[derive(Debug, Clone)]
pub struct BranchItem {
    pub n: usize,
    pub outcome: Result<(Vec<SolutionRecord>, SearchDiagnostics)>,
}

/// Pipeline for every admissible `n <= n_max`, sorted by `n`; with
/// `settings.force` every `n` in `1..=n_max` is attempted.
pub fn solve_branch(
    ctx: &FrequencyContext,
    f: &NonlinearitySpec,
    n_max: usize,
    settings: &SearchSettings,
) -> Result<Vec<BranchItem>> {
    if ctx.gamma <= 0.0 {
        return Ok(Vec::new());
    }
    let cl = *f.classification()?;
    let top = if settings.force {
        n_max
    } else {
        n_max.min(max_admissible_n_with_n0(ctx, f, settings.c, settings.n0)?)
    };
    let sign = sign_of(ctx)?;
    let shared = if n_independent(&cl) {
        let obj = Objective::new(f, settings.dim, 1, sign)?;
        Some(maximize_objective(&obj, settings.restarts, settings.seed))
    } else {
        None
    };
    let mut out = Vec::new();
    for n in 1..=top {
        if !settings.force && !admissible_with_n0(ctx, n, f, settings.c, settings.n0)?.ok {
            continue;
        }
        let outcome = match &shared {
            Some(Ok(m)) => solve_n_with(ctx, f, n, settings, Some(m)),
            Some(Err(e)) => Err(e.clone()),
            None => solve_n_with(ctx, f, n, settings, None),
        };
        out.push(BranchItem { n, outcome });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frequency::{make_context, FrequencyContext};

    fn cubic() -> NonlinearitySpec {
        NonlinearitySpec::from_taylor(&[(3, 1.0)]).unwrap()
    }

    #[test]
    fn one_mode_maximum_is_closed_form() {
        let (m, y) = maximize_u(&cubic(), 1, 2, 0).unwrap();
        assert!((m - 9.0 / (128.0 * PI * PI)).abs() < 1e-15);
        assert!((y.get(1) - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn maximum_dominates_and_is_seed_stable() {
        let (m8, y) = maximize_u(&cubic(), 8, 16, 1).unwrap();
        assert!(m8 >= 9.0 / (128.0 * PI * PI));
        assert!((y.h1_norm() - 1.0).abs() < 1e-12);
        let (m8b, _) = maximize_u(&cubic(), 8, 16, 2).unwrap();
        assert!((m8 - m8b).abs() <= 1e-8 * m8, "{m8} {m8b}");
    }

    #[test]
    fn wrong_side_is_infeasible() {
        let obj = Objective::new(&cubic(), 4, 1, -1.0).unwrap();
        assert!(matches!(maximize_objective(&obj, 4, 0), Err(Error::Infeasible(_))));
    }

    #[test]
    fn initial_guess_amplitudes() {
        let ctx = FrequencyContext::with_gamma(1.0 + 0.01, 0.9, 8);
        let y = KernelVector::new(vec![1.0 / PI]);
        let m = mu(&ctx, 1) / 4.0;
        let v = initial_guess(&ctx, 1, &cubic(), m, &y).unwrap();
        assert!((v.h1_norm() - 1.0).abs() < 1e-12);
        let v4 = initial_guess(&ctx, 1, &cubic(), 4.0 * m, &y).unwrap();
        assert!((v4.h1_norm() - 0.5).abs() < 1e-12);
        assert!(initial_guess(&ctx, 1, &cubic(), 0.0, &y).is_err());
        let amp = predicted_amplitude(&ctx, 3, 3, m).unwrap();
        let rescaled = crate::kernel_space::rescale_ln(&v.scaled(amp / v.h1_norm()), 3).unwrap();
        let expected = 3.0 * ((ctx.omega - 1.0).abs() * 9.0 / (m * 4.0)).sqrt();
        assert!((rescaled.h1_norm() / expected - 1.0).abs() < 0.01);
    }

    #[test]
    fn gmres_solves_small_systems() {
        let a = [[4.0, 1.0, 0.0], [1.0, -3.0, 1.0], [0.0, 1.0, 2.0]];
        let b = [1.0, 2.0, 3.0];
        let x = gmres(|v| Ok((0..3).map(|i| (0..3).map(|j| a[i][j] * v[j]).sum()).collect()), &b, 1e-14, 10).unwrap();
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[i][j] * x[j]).sum::<f64>() - b[i];
            assert!(r.abs() < 1e-13);
        }
    }

    #[test]
    fn zero_is_a_fixed_point_of_refinement() {
        let ctx = make_context(1.01, 8).unwrap();
        let rf = functional_for(&ctx, &NonlinearitySpec::zero(), 1, 3, None);
        assert!(rf.is_ok());
        let rf = functional_for(&ctx, &cubic(), 1, 3, None).unwrap();
        let r = refine_functional(&rf, &[0.0; 3], &SearchSettings::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert!(r.eval.xi.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn cubic_solution_small_dim() {
        let ctx = make_context(1.0 + 1e-3, 12).unwrap();
        let settings = SearchSettings { dim: 4, restarts: 4, ..SearchSettings::default() };
        let (recs, d) = solve_n(&ctx, &cubic(), 1, &settings).unwrap();
        let r = &recs[0];
        assert!(r.accepted, "{r:?}");
        assert!(r.grad_norm <= 1e-10);
        assert!((r.phi / r.predicted_level - 1.0).abs() < 0.1);
        assert!(d.alpha_hat.is_finite());
        let p = r.partner_record();
        assert!(p.partner);
        assert_eq!(p.partner_record(), *r);
        let again = build_solution(&r.v, &ctx, 1, &cubic()).unwrap();
        assert!(again.residual <= 1e-8);
    }

    #[test]
    fn gamma_zero_branch_is_empty() {
        let ctx = make_context(1.5, 8).unwrap();
        assert!(solve_branch(&ctx, &cubic(), 5, &SearchSettings::default()).unwrap().is_empty());
    }

    #[test]
    fn compose_matches_pipeline() {
        let ctx = make_context(1.0 + 1e-3, 12).unwrap();
        let settings = SearchSettings { dim: 3, restarts: 2, ..SearchSettings::default() };
        let f = cubic();
        for n in [1, 2] {
            let (recs, _) = solve_n(&ctx, &f, n, &settings).unwrap();
            assert_eq!(compose_u(&recs[0].v, &recs[0].w).unwrap(), recs[0].u);
        }
    }

    #[test]
    fn energy_of_static_mode() {
        let u = SpectralField::mode(1, 1, 0, 1, 1.0);
        let e = energy_at(&u, 1.0, &Polynomial::zero(), 0.0);
        assert!((e - PI / 4.0).abs() < 1e-15);
    }
}
