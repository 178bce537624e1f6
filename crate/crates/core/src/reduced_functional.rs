//! Reduced action on the kernel, its gradient and Hessian action, the
//! homogeneous leading terms of each nonlinearity class, and independent
//! evaluations of `int w L^{-1} w`.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frequency::FrequencyContext;
use crate::kernel_space::{eta_coeffs, eta_eval, KernelVector};
use crate::poly::Polynomial;
use crate::quadrature::{gauss_legendre, CompositeRule};
use crate::range_solver::{apply_l, apply_l_inv, Galerkin, PSolveReport};
use crate::spectral_core::{inner_l2, project_w, Projector, SpectralField};

/// Supremum of `(int v^p)^2 / int v^{2p}` over the kernel.
pub const KAPPA: f64 = PI * PI;

const HALF_PI2: f64 = 0.5 * PI * PI;

/// Class of a nonlinearity by its lowest-order Taylor data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Case {
    /// Lowest order `p` odd.
    Odd,
    /// `p` even with an odd term of order `d < 2p - 1`.
    N1,
    /// `p` even with no odd term of order `<= 2p - 1`.
    N2,
    /// `p` even with lowest odd order exactly `2p - 1`.
    N3,
}

impl Case {
    pub fn name(&self) -> &'static str {
        match self {
            Case::Odd => "odd",
            Case::N1 => "N1",
            Case::N2 => "N2",
            Case::N3 => "N3",
        }
    }
}

/// Derived classification of `f(u) = sum c_k u^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    /// Lowest order with nonzero coefficient.
    pub p: usize,
    /// `c_p`.
    pub a: f64,
    pub case: Case,
    /// Lowest odd order above `p`, when it selects the case.
    pub d: Option<usize>,
    /// `c_d`.
    pub b: Option<f64>,
    /// Homogeneity degree of the leading term minus one.
    pub q: usize,
}

impl Classification {
    /// `sign(G)` relates the leading term to `H` in `Phi ~ (eps/2)|v|^2 - H`.
    fn orientation(&self) -> f64 {
        match self.case {
            Case::Odd | Case::N1 => 1.0,
            Case::N2 => -1.0,
            Case::N3 => {
                if self.b.unwrap_or(0.0) < 0.0 {
                    -1.0
                } else {
                    1.0
                }
            }
        }
    }
}

/// Polynomial nonlinearity with its classification.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearitySpec {
    poly: Polynomial,
    class: Option<Classification>,
}

impl NonlinearitySpec {
    /// `f(u) = sum c_k u^k` from `(k, c_k)` pairs with `k >= 2`. An empty
    /// list gives the zero stub.
    pub fn from_taylor(terms: &[(usize, f64)]) -> Result<Self> {
        let deg = terms.iter().map(|t| t.0).max().unwrap_or(0);
        let mut c = vec![0.0; deg + 1];
        for &(k, v) in terms {
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!("coefficient of order {k} is not finite")));
            }
            if k < 2 && v != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "order {k} is not allowed, f must vanish to second order"
                )));
            }
            if c[k] != 0.0 {
                return Err(Error::InvalidInput(format!("order {k} given twice")));
            }
            c[k] = v;
        }
        Ok(Self::from_polynomial(Polynomial::new(c)))
    }

    /// Coefficients `c[k]` of `u^k`.
    pub fn from_coeffs(c: Vec<f64>) -> Result<Self> {
        let terms: Vec<(usize, f64)> =
            c.into_iter().enumerate().filter(|t| t.1 != 0.0).collect();
        Self::from_taylor(&terms)
    }

    /// `f = 0`.
    pub fn zero() -> Self {
        Self::from_polynomial(Polynomial::zero())
    }

    fn from_polynomial(poly: Polynomial) -> Self {
        let class = classify(&poly);
        Self { poly, class }
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.poly
    }

    pub fn derivative(&self) -> Polynomial {
        self.poly.derivative()
    }

    /// `F` with `F' = f` and `F(0) = 0`.
    pub fn primitive(&self) -> Polynomial {
        self.poly.primitive()
    }

    /// Nonzero `(k, c_k)` pairs in increasing order.
    pub fn taylor(&self) -> Vec<(usize, f64)> {
        self.poly
            .coeffs()
            .iter()
            .enumerate()
            .filter(|t| *t.1 != 0.0)
            .map(|(k, &c)| (k, c))
            .collect()
    }

    pub fn classification(&self) -> Result<&Classification> {
        self.class.as_ref().ok_or(Error::Unclassifiable)
    }
}

fn classify(f: &Polynomial) -> Option<Classification> {
    let c = f.coeffs();
    let p = (2..c.len()).find(|&k| c[k] != 0.0)?;
    let a = c[p];
    if p % 2 == 1 {
        return Some(Classification { p, a, case: Case::Odd, d: None, b: None, q: p });
    }
    let odd = (p + 1..c.len()).step_by(2).find(|&k| c[k] != 0.0 && k < 2 * p);
    Some(match odd {
        Some(d) if d < 2 * p - 1 => Classification { p, a, case: Case::N1, d: Some(d), b: Some(c[d]), q: d },
        Some(d) => Classification { p, a, case: Case::N3, d: Some(d), b: Some(c[d]), q: 2 * p - 1 },
        None => Classification { p, a, case: Case::N2, d: None, b: None, q: 2 * p - 1 },
    })
}

/// Result of evaluating the reduced action at one kernel point.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub xi: Vec<f64>,
    pub w: SpectralField,
    pub u: SpectralField,
    /// `f(u)` on the truncation.
    pub fu: SpectralField,
    pub phi: f64,
    /// Coefficient gradient `d Phi / d xi_k`.
    pub grad: Vec<f64>,
    pub report: PSolveReport,
}

/// Picard tolerance for reduced-action evaluations.
pub const P_TOL: f64 = 1e-15;
/// Picard iteration cap for reduced-action evaluations.
pub const P_MAX_ITER: usize = 500;

/// `Phi_eps(v) = Psi(v + w(v))` on a truncated lattice.
#[derive(Debug, Clone)]
pub struct ReducedFunctional {
    galerkin: Galerkin,
}

impl ReducedFunctional {
    pub fn new(galerkin: Galerkin) -> Self {
        Self { galerkin }
    }

    /// Unit-lattice functional for kernel vectors of length `len`.
    pub fn for_kernel(ctx: &FrequencyContext, f: &NonlinearitySpec, len: usize) -> Result<Self> {
        Ok(Self::new(Galerkin::for_kernel(ctx, f, len)?))
    }

    pub fn galerkin(&self) -> &Galerkin {
        &self.galerkin
    }

    pub fn dim(&self) -> usize {
        self.galerkin.dim()
    }

    fn diag_weight(&self, k: usize) -> f64 {
        let j = self.galerkin.physical_j(k) as f64;
        self.galerkin.ctx().eps * PI * PI * j * j
    }

    /// Full evaluation, warm-started from `w0` when given.
    pub fn evaluate(&self, xi: &[f64], w0: Option<&SpectralField>) -> Result<Evaluation> {
        let g = &self.galerkin;
        if xi.len() != g.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} kernel coordinates for a {}-dimensional problem",
                xi.len(),
                g.dim()
            )));
        }
        let (w, report) = g.solve(xi, P_TOL, P_MAX_ITER, w0)?;
        let u = g.kernel_field(xi).add(&w)?;
        let fu = g.nonlinearity(&u)?;
        let phi = 0.5 * inner_l2(&u, &apply_l(&u, g.ctx().omega))? - g.primitive_integral(&u)?;
        let fd = g.kernel_part(&fu);
        let grad = (0..g.dim())
            .map(|i| self.diag_weight(i + 1) * xi[i] - HALF_PI2 * fd[i])
            .collect();
        Ok(Evaluation { xi: xi.to_vec(), w, u, fu, phi, grad, report })
    }

    pub fn phi(&self, xi: &[f64]) -> Result<f64> {
        Ok(self.evaluate(xi, None)?.phi)
    }

    pub fn grad(&self, xi: &[f64]) -> Result<Vec<f64>> {
        Ok(self.evaluate(xi, None)?.grad)
    }

    /// Hessian of `Phi` applied to `h` at an evaluated point.
    pub fn hess_vec(&self, at: &Evaluation, h: &[f64]) -> Result<Vec<f64>> {
        let g = &self.galerkin;
        let dw = g.solve_linearized(&at.u, h, 1e-14, 500)?;
        let dir = g.kernel_field(h).add(&dw)?;
        let q = g.kernel_part(&g.linearized_nonlinearity(&at.u, &dir)?);
        Ok((0..g.dim())
            .map(|i| self.diag_weight(i + 1) * h[i] - HALF_PI2 * q[i])
            .collect())
    }
}

/// `Phi_eps(v)` on the default truncation.
pub fn phi(v: &KernelVector, ctx: &FrequencyContext, f: &NonlinearitySpec) -> Result<f64> {
    ReducedFunctional::for_kernel(ctx, f, v.len())?.phi(v.xi())
}

/// Coefficient gradient of `Phi_eps` at `v` on the default truncation.
pub fn grad_phi(v: &KernelVector, ctx: &FrequencyContext, f: &NonlinearitySpec) -> Result<KernelVector> {
    Ok(KernelVector::new(ReducedFunctional::for_kernel(ctx, f, v.len())?.grad(v.xi())?))
}

/// Degree of the `x`-truncation used for `L^{-1}` of even powers.
pub fn even_power_lx(p: usize, m: usize) -> usize {
    16 * p * m.max(4)
}

/// `v^p` on the unit lattice, shape `(p m, lx)`.
pub fn kernel_power_field(v: &KernelVector, p: usize, lx: usize) -> Result<SpectralField> {
    let m = v.len().max(1);
    let u = crate::kernel_space::embed_into(v, m, m)?;
    let proj = Projector::new((m, m), (p * m, lx), (p * m, p * m));
    proj.apply(&u, &Polynomial::monomial(p, 1.0))
}

/// `int_Omega w L^{-1} Pi_W w` with `L = L_1`.
pub fn l_inv_pairing(w: &SpectralField) -> Result<f64> {
    let ww = project_w(w);
    inner_l2(&ww, &apply_l_inv(&ww, 1.0)?)
}

/// Leading homogeneous term `G` of the reduced action and its gradient,
/// evaluated along `L_n v` for `v` of length `m`.
#[derive(Debug, Clone)]
pub struct LeadingTerm {
    class: Classification,
    m: usize,
    n: usize,
    pw: Projector,
    quad: Option<(Projector, Projector)>,
}

impl LeadingTerm {
    pub fn new(f: &NonlinearitySpec, m: usize, n: usize) -> Result<Self> {
        let class = *f.classification()?;
        let m = m.max(1);
        if n == 0 {
            return Err(Error::InvalidInput("rescaling index must be positive".into()));
        }
        let p = class.p;
        let top = match class.case {
            Case::Odd => p + 1,
            Case::N1 => class.d.unwrap_or(p) + 1,
            Case::N2 => p,
            Case::N3 => 2 * p,
        };
        let pw = Projector::new((m, m), (m, m), (top * m, top * m));
        let quad = match class.case {
            Case::N2 | Case::N3 => {
                let lx = even_power_lx(p, m);
                let zp = Projector::new((m, m), (p * m, lx), (p * m, p * m));
                let gp = Projector::new((p * m, lx), (m, m), ((2 * p - 1) * m, (p - 1) * m + lx));
                Some((zp, gp))
            }
            _ => None,
        };
        Ok(Self { class, m, n, pw, quad })
    }

    pub fn classification(&self) -> &Classification {
        &self.class
    }

    /// Homogeneity degree `q + 1`.
    pub fn degree(&self) -> usize {
        self.class.q + 1
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn field(&self, xi: &[f64]) -> Result<SpectralField> {
        if xi.len() != self.m {
            return Err(Error::DimensionMismatch(format!("expected {} coordinates, got {}", self.m, xi.len())));
        }
        crate::kernel_space::embed_into(&KernelVector::new(xi.to_vec()), self.m, self.m)
    }

    /// `int v^k` and its coefficient gradient.
    fn power(&self, u: &SpectralField, k: usize) -> Result<(f64, Vec<f64>)> {
        let val = self.pw.integrate(u, &Polynomial::monomial(k, 1.0))?;
        let d = self.pw.apply(u, &Polynomial::monomial(k - 1, k as f64))?;
        Ok((val, (1..=self.m).map(|j| HALF_PI2 * d.get(j, j)).collect()))
    }

    /// `-(1/2) int v^p L^{-1} v^p` (without `a^2`) and its gradient.
    fn quadratic(&self, u: &SpectralField) -> Result<(f64, Vec<f64>)> {
        let (zp, gp) = self.quad.as_ref().expect("even cases carry the quadratic projectors");
        let p = self.class.p;
        let vp = zp.apply(u, &Polynomial::monomial(p, 1.0))?;
        let z = apply_l_inv(&project_w(&vp), 1.0)?;
        let q = inner_l2(&vp, &z)?;
        let d = gp.apply_product(u, &Polynomial::monomial(p - 1, 1.0), &z)?;
        let grad = (1..=self.m).map(|j| -0.5 * 2.0 * p as f64 * HALF_PI2 * d.get(j, j)).collect();
        Ok((-0.5 * q, grad))
    }

    /// `a^2 G_2` along `L_n v`, with `G_2 = -(1/2) int v^p L^{-1} v^p`.
    fn even_g(&self, u: &SpectralField) -> Result<(f64, Vec<f64>)> {
        let a2 = self.class.a * self.class.a;
        let (g, mut dg) = self.quadratic(u)?;
        let (g, mut dg) = (a2 * g, {
            dg.iter_mut().for_each(|x| *x *= a2);
            dg
        });
        if self.n == 1 {
            return Ok((g, dg));
        }
        let n2 = (self.n * self.n) as f64;
        let (ip, dip) = self.power(u, self.class.p)?;
        let alpha = ip / (2.0 * PI * PI);
        let c = a2 * PI.powi(4) / 12.0 * (1.0 - 1.0 / n2);
        for (x, di) in dg.iter_mut().zip(&dip) {
            *x = *x / n2 + c * 2.0 * alpha * di / (2.0 * PI * PI);
        }
        Ok((g / n2 + c * alpha * alpha, dg))
    }

    /// `G(L_n v)` per case (`G~` in the critical case with `b > 0`) and its
    /// gradient in `xi`.
    pub fn g_with_grad(&self, xi: &[f64]) -> Result<(f64, Vec<f64>)> {
        let u = self.field(xi)?;
        let cl = &self.class;
        let p = cl.p;
        match cl.case {
            Case::Odd => {
                let (i, di) = self.power(&u, p + 1)?;
                let s = cl.a / (p + 1) as f64;
                Ok((s * i, di.iter().map(|x| s * x).collect()))
            }
            Case::N1 => {
                let d = cl.d.expect("N1 carries d");
                let (i, di) = self.power(&u, d + 1)?;
                let s = cl.b.expect("N1 carries b") / (d + 1) as f64;
                Ok((s * i, di.iter().map(|x| s * x).collect()))
            }
            Case::N2 => self.even_g(&u),
            Case::N3 => {
                let b = cl.b.expect("N3 carries b");
                let s = b / (2 * p) as f64;
                let (i2, di2) = self.power(&u, 2 * p)?;
                if b < 0.0 {
                    let (g, dg) = self.even_g(&u)?;
                    Ok((
                        g - s * i2,
                        dg.iter().zip(&di2).map(|(x, y)| x - s * y).collect(),
                    ))
                } else {
                    let (ip, dip) = self.power(&u, p)?;
                    let c = cl.a * cl.a / 48.0;
                    Ok((
                        s * i2 - c * ip * ip,
                        di2.iter().zip(&dip).map(|(x, y)| s * x - 2.0 * c * ip * y).collect(),
                    ))
                }
            }
        }
    }

    pub fn g(&self, xi: &[f64]) -> Result<f64> {
        Ok(self.g_with_grad(xi)?.0)
    }

    /// `H` with `Phi_{eps,n} ~ (eps n^2 / 2)|v|^2 - H(v)`, and its gradient.
    pub fn h_with_grad(&self, xi: &[f64]) -> Result<(f64, Vec<f64>)> {
        let s = self.class.orientation();
        let (g, dg) = self.g_with_grad(xi)?;
        Ok((s * g, dg.into_iter().map(|x| s * x).collect()))
    }
}

/// `G(v)` for a physical kernel vector.
pub fn g_eval(v: &KernelVector, f: &NonlinearitySpec) -> Result<f64> {
    LeadingTerm::new(f, v.len(), 1)?.g(v.xi())
}

/// `G(v) / |v|^{q+1}`.
pub fn u_eval(v: &KernelVector, f: &NonlinearitySpec) -> Result<f64> {
    let nv = v.h1_norm();
    if nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    let lt = LeadingTerm::new(f, v.len(), 1)?;
    Ok(lt.g(v.xi())? / nv.powi(lt.degree() as i32))
}

/// Closed-form `G` for `p = 2` from the sine coefficients of `eta`.
pub fn g_p2_closed_form(eta: &[f64], a: f64) -> f64 {
    let m = eta.len().max(1);
    let n = 8 * m + 8;
    let h = 2.0 * PI / n as f64;
    let s: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let e: Vec<f64> = s.iter().map(|&x| eta_eval(eta, x)).collect();
    let mean_e2 = e.iter().map(|x| x * x).sum::<f64>() / n as f64;
    // P1 = -sum eta_j cos(js) / j
    let p1: Vec<f64> = s
        .iter()
        .map(|&x| {
            -eta.iter()
                .enumerate()
                .map(|(j, c)| c * ((j + 1) as f64 * x).cos() / (j + 1) as f64)
                .sum::<f64>()
        })
        .collect();
    // eta^2 = (1/2) sum_{j,k} eta_j eta_k [cos((j-k)s) - cos((j+k)s)]
    let mut cosc = vec![0.0; 2 * m + 1];
    for (j, cj) in eta.iter().enumerate() {
        for (k, ck) in eta.iter().enumerate() {
            let (j1, k1) = (j + 1, k + 1);
            cosc[j1.abs_diff(k1)] += 0.5 * cj * ck;
            cosc[j1 + k1] -= 0.5 * cj * ck;
        }
    }
    let p2: Vec<f64> = s
        .iter()
        .map(|&x| {
            (1..cosc.len())
                .map(|r| cosc[r] * (r as f64 * x).sin() / r as f64)
                .sum::<f64>()
        })
        .collect();
    let i1: f64 = (0..n).map(|i| p1[i] * p1[i] * (e[i] * e[i] + mean_e2)).sum::<f64>() * h;
    let i2: f64 = p2.iter().map(|x| x * x).sum::<f64>() * h;
    0.5 * a * a * (PI * i1 + 0.5 * PI * i2 + 2.0 * PI.powi(4) / 3.0 * mean_e2 * mean_e2)
}

/// `M(s1, s2) = int int_R (eta(xi) - eta(nu))^p` over
/// `R = {s1 <= xi <= s2 + 2 pi, s2 <= nu <= s1}`, by Gauss-Legendre panels.
#[derive(Debug, Clone)]
pub struct MKernel {
    eta: Vec<f64>,
    p: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    width: f64,
    /// `int_0^{k width} eta^r` for panel boundaries on `[-2 pi, 4 pi]`.
    table: Vec<Vec<f64>>,
    origin: f64,
}

impl MKernel {
    pub fn new(eta: &[f64], p: usize) -> Self {
        let (nodes, weights) = gauss_legendre(20);
        let panels = 96;
        let width = 6.0 * PI / panels as f64;
        let origin = -2.0 * PI;
        let mut k = Self {
            eta: eta.to_vec(),
            p,
            nodes,
            weights,
            width,
            table: vec![vec![0.0; panels + 1]; p + 1],
            origin,
        };
        for i in 0..panels {
            let a = origin + i as f64 * width;
            let seg = k.segment(a, a + width);
            for r in 0..=p {
                k.table[r][i + 1] = k.table[r][i] + seg[r];
            }
        }
        k
    }

    /// `int_a^b eta^r` for `r = 0..=p` on one short interval.
    fn segment(&self, a: f64, b: f64) -> Vec<f64> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut out = vec![0.0; self.p + 1];
        for (z, w) in self.nodes.iter().zip(&self.weights) {
            let e = eta_eval(&self.eta, mid + half * z);
            let mut pw = w * half;
            for o in out.iter_mut() {
                *o += pw;
                pw *= e;
            }
        }
        out
    }

    /// `int_{-2 pi}^s eta^r` for `r = 0..=p`, `s` in `[-2 pi, 4 pi]`.
    fn primitive(&self, s: f64) -> Vec<f64> {
        let pos = ((s - self.origin) / self.width).floor();
        let i = (pos.max(0.0) as usize).min(self.table[0].len() - 2);
        let a = self.origin + i as f64 * self.width;
        let seg = self.segment(a, s);
        (0..=self.p).map(|r| self.table[r][i] + seg[r]).collect()
    }

    /// `M(s1, s2)` for `s2 <= s1 <= s2 + 2 pi`, arguments reduced mod `2 pi`.
    pub fn value(&self, s1: f64, s2: f64) -> f64 {
        let shift = (s2 / (2.0 * PI)).floor() * 2.0 * PI;
        let (s1, s2) = (s1 - shift, s2 - shift);
        let q1 = self.primitive(s1);
        let q2 = self.primitive(s2);
        let q3 = self.primitive(s2 + 2.0 * PI);
        let p = self.p;
        let mut acc = 0.0;
        let mut binom = 1.0;
        for k in 0..=p {
            let sign = if (p - k) % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binom * (q3[k] - q1[k]) * (q1[p - k] - q2[p - k]);
            binom = binom * (p - k) as f64 / (k + 1) as f64;
        }
        acc
    }
}

/// `-int v^p L^{-1} v^p` through the primitive kernel `M`: the value
/// `(1/8) int_Omega M(t + x, t - x) v^p`.
pub fn kernel_m_oracle(v: &KernelVector, p: usize) -> Result<f64> {
    if p % 2 == 1 || p == 0 {
        return Err(Error::InvalidInput(format!("kernel oracle needs even p, got {p}")));
    }
    let eta = eta_coeffs(v);
    if eta.iter().all(|&c| c == 0.0) {
        return Ok(0.0);
    }
    let kern = MKernel::new(&eta, p);
    let m = v.len();
    let nt = 4 * (p + 1) * m + 8;
    let xrule = CompositeRule::new(20, PI / (2 * m + 4) as f64);
    let mut acc = 0.0;
    for i in 0..nt {
        let t = 2.0 * PI * i as f64 / nt as f64;
        acc += xrule.integrate(0.0, PI, |x| {
            let vv = eta_eval(&eta, t + x) - eta_eval(&eta, t - x);
            kern.value(t + x, t - x) * vv.powi(p as i32)
        });
    }
    Ok(acc * 2.0 * PI / nt as f64 / 8.0)
}

/// Samples of a doubly `2 pi`-periodic function on a uniform `n x n` grid,
/// `values[(i, k)] = m(2 pi i / n, 2 pi k / n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusField {
    pub values: Array2<f64>,
}

impl TorusField {
    pub fn from_fn(n: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let h = 2.0 * PI / n as f64;
        Self {
            values: Array2::from_shape_fn((n, n), |(i, k)| f(i as f64 * h, k as f64 * h)),
        }
    }

    /// `m(s1, s2) = (eta(s1) - eta(s2))^p` for `v^p`.
    pub fn kernel_power(v: &KernelVector, p: usize, n: usize) -> Self {
        let eta = eta_coeffs(v);
        Self::from_fn(n, |a, b| (eta_eval(&eta, a) - eta_eval(&eta, b)).powi(p as i32))
    }

    /// `m` with `w(t, x) = m(t + x, t - x)` on `0 <= x <= pi`, sampled
    /// through `w`.
    pub fn from_field(w: &SpectralField, n: usize) -> Self {
        Self::from_fn(n, |a, b| {
            let (t, x) = (0.5 * (a + b), 0.5 * (a - b));
            if x < 0.0 {
                w.eval(t + PI, x + PI)
            } else {
                w.eval(t, x)
            }
        })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// `(1 / 4 pi^2) int_{T^2}`.
    pub fn mean(&self) -> f64 {
        self.values.mean().unwrap_or(0.0)
    }
}

/// Output of [`decompose_m`]: `m = m~ + a(s1) + a(s2) + alpha`, with the
/// primitives `A' = a / 4` and `d1 d2 M = m~ / 4`, all sampled on the grid.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub alpha: f64,
    pub a: Vec<f64>,
    pub m_tilde: Array2<f64>,
    pub big_a: Vec<f64>,
    pub big_m: Array2<f64>,
    /// `max |a_1 - a_2|` between the two marginal profiles.
    pub marginal_gap: f64,
    /// `max |m~ + a + a + alpha - m|`, together with the spectral tail of `m`
    /// beyond a quarter of the grid.
    pub reconstruction: f64,
}

fn dft_matrix(n: usize, sign: f64) -> Array2<Complex64> {
    Array2::from_shape_fn((n, n), |(k, i)| {
        Complex64::from_polar(1.0, sign * 2.0 * PI * ((k * i) % n) as f64 / n as f64)
    })
}

fn wavenumber(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// Splits `m` into mean, marginal and doubly mean-free parts and builds the
/// primitives `A`, `M` spectrally.
pub fn decompose_m(m: &TorusField) -> Result<Decomposition> {
    let n = m.n();
    if n < 4 || n % 2 == 1 {
        return Err(Error::InvalidInput("torus grid must be even and at least 4".into()));
    }
    let fwd = dft_matrix(n, -1.0);
    let inv = dft_matrix(n, 1.0);
    let mc = m.values.mapv(|x| Complex64::new(x, 0.0));
    let nn = (n * n) as f64;
    let hat = fwd.dot(&mc).dot(&fwd.t()).mapv(|z| z / nn);
    let alpha = hat[(0, 0)].re;
    let scale = m.values.iter().fold(0.0f64, |s, x| s.max(x.abs())).max(1e-300);
    let mut marginal_gap = 0.0f64;
    let mut a_hat = vec![Complex64::new(0.0, 0.0); n];
    for k in 1..n {
        marginal_gap = marginal_gap.max((hat[(k, 0)] - hat[(0, k)]).norm());
        a_hat[k] = 0.5 * (hat[(k, 0)] + hat[(0, k)]);
    }
    let synth1 = |c: &[Complex64]| -> Vec<f64> {
        (0..n)
            .map(|i| (0..n).map(|k| c[k] * inv[(i, k)]).sum::<Complex64>().re)
            .collect()
    };
    let a = synth1(&a_hat);
    let mut big_a_hat = vec![Complex64::new(0.0, 0.0); n];
    for k in 1..n {
        let kk = wavenumber(k, n);
        if kk.abs() < n as f64 / 2.0 {
            big_a_hat[k] = a_hat[k] / (Complex64::new(0.0, 4.0 * kk));
        }
    }
    let big_a = synth1(&big_a_hat);
    let mut mt_hat = hat.clone();
    mt_hat[(0, 0)] = Complex64::new(0.0, 0.0);
    for k in 1..n {
        mt_hat[(k, 0)] = Complex64::new(0.0, 0.0);
        mt_hat[(0, k)] = Complex64::new(0.0, 0.0);
    }
    let mut bm_hat = Array2::zeros((n, n));
    for ((k1, k2), z) in mt_hat.indexed_iter() {
        let (w1, w2) = (wavenumber(k1, n), wavenumber(k2, n));
        if k1 != 0 && k2 != 0 && w1.abs() < n as f64 / 2.0 && w2.abs() < n as f64 / 2.0 {
            bm_hat[(k1, k2)] = -z / (4.0 * w1 * w2);
        }
    }
    let synth2 = |c: &Array2<Complex64>| inv.dot(c).dot(&inv.t()).mapv(|z| z.re);
    let m_tilde = synth2(&mt_hat);
    let big_m = synth2(&bm_hat);
    let mut band = hat.clone();
    for ((k1, k2), z) in band.indexed_iter_mut() {
        if wavenumber(k1, n).abs() > n as f64 / 4.0 || wavenumber(k2, n).abs() > n as f64 / 4.0 {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    // the band-limited part must reproduce m: a non-smooth m (a field not
    // of the form m(t + x, t - x)) leaves a spectral tail
    let smooth = synth2(&band);
    let mut reconstruction = 0.0f64;
    for ((i, k), &x) in m.values.indexed_iter() {
        let r = m_tilde[(i, k)] + a[i] + a[k] + alpha - x;
        reconstruction = reconstruction.max(r.abs()).max((smooth[(i, k)] - x).abs());
    }
    if marginal_gap > 1e-9 * scale || reconstruction > 1e-9 * scale {
        return Err(Error::NotDecomposable(marginal_gap.max(reconstruction) / scale));
    }
    Ok(Decomposition { alpha, a, m_tilde, big_a, big_m, marginal_gap, reconstruction })
}

/// `int_Omega L^{-1}(w) w` from the decomposition of `m`:
/// `-(1/2) int M m~ + 2 pi int M(s,s) a + 2 pi alpha int M(s,s)
///  - 8 pi int A^2 - alpha^2 pi^4 / 6`.
pub fn l_inv_quadratic_form(d: &Decomposition) -> f64 {
    let n = d.a.len();
    let h = 2.0 * PI / n as f64;
    let mm: f64 = d.big_m.iter().zip(d.m_tilde.iter()).map(|(x, y)| x * y).sum::<f64>() * h * h;
    let diag: Vec<f64> = (0..n).map(|i| d.big_m[(i, i)]).collect();
    let da: f64 = diag.iter().zip(&d.a).map(|(x, y)| x * y).sum::<f64>() * h;
    let dm: f64 = diag.iter().sum::<f64>() * h;
    let aa: f64 = d.big_a.iter().map(|x| x * x).sum::<f64>() * h;
    -0.5 * mm + 2.0 * PI * da + 2.0 * PI * d.alpha * dm - 8.0 * PI * aa
        - d.alpha * d.alpha * PI.powi(4) / 6.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frequency::make_context;
    use crate::kernel_space::{embed, from_eta, rescale_ln};
    use crate::spectral_core::h1_norm;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cubic() -> NonlinearitySpec {
        NonlinearitySpec::from_taylor(&[(3, 1.0)]).unwrap()
    }

    fn random_kernel(len: usize, scale: f64, seed: u64) -> KernelVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        KernelVector::new(
            (1..=len)
                .map(|j| scale * rng.gen_range(-1.0..1.0) / (j * j) as f64)
                .collect(),
        )
    }

    #[test]
    fn classification_examples() {
        let c = *cubic().classification().unwrap();
        assert_eq!((c.case, c.p, c.q), (Case::Odd, 3, 3));
        let sq = NonlinearitySpec::from_taylor(&[(2, 1.0)]).unwrap();
        let c = *sq.classification().unwrap();
        assert_eq!((c.case, c.q, c.d), (Case::N2, 3, None));
        let n3 = NonlinearitySpec::from_taylor(&[(2, 1.0), (3, 2.0)]).unwrap();
        let c = *n3.classification().unwrap();
        assert_eq!((c.case, c.d, c.b, c.q), (Case::N3, Some(3), Some(2.0), 3));
        let n1 = NonlinearitySpec::from_taylor(&[(4, 1.0), (5, -1.0)]).unwrap();
        let c = *n1.classification().unwrap();
        assert_eq!((c.case, c.d, c.q), (Case::N1, Some(5), 5));
        let n2 = NonlinearitySpec::from_taylor(&[(4, 1.0), (9, 1.0)]).unwrap();
        assert_eq!(n2.classification().unwrap().case, Case::N2);
        assert!(matches!(NonlinearitySpec::zero().classification(), Err(Error::Unclassifiable)));
        assert!(NonlinearitySpec::from_taylor(&[(1, 1.0)]).is_err());
        assert!(NonlinearitySpec::from_taylor(&[(3, 1.0), (3, 2.0)]).is_err());
        assert_eq!(
            NonlinearitySpec::from_coeffs(vec![0.0, 0.0, 1.0, 0.5]).unwrap().taylor(),
            vec![(2, 1.0), (3, 0.5)]
        );
    }

    #[test]
    fn phi_of_zero_stub_is_quadratic() {
        let ctx = make_context(1.01, 8).unwrap();
        let v = random_kernel(4, 1.0, 1);
        let f = NonlinearitySpec::zero();
        let val = phi(&v, &ctx, &f).unwrap();
        let nv = v.h1_norm();
        assert!((val - 0.5 * ctx.eps * nv * nv).abs() <= 1e-13 * nv * nv);
        let g = grad_phi(&v, &ctx, &f).unwrap();
        for (j, (gj, xj)) in g.xi().iter().zip(v.xi()).enumerate() {
            let jj = (j + 1) as f64;
            assert!((gj - ctx.eps * PI * PI * jj * jj * xj).abs() <= 1e-13);
        }
        assert_eq!(phi(&KernelVector::zeros(3), &ctx, &cubic()).unwrap(), 0.0);
        assert!(grad_phi(&KernelVector::zeros(3), &ctx, &cubic()).unwrap().xi().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn phi_is_even() {
        let ctx = make_context(1.0 + 1e-3 * 2f64.sqrt(), 16).unwrap();
        for (f, seed) in [
            (cubic(), 3),
            (NonlinearitySpec::from_taylor(&[(2, 1.0), (3, 0.3)]).unwrap(), 4),
        ] {
            let v = random_kernel(4, 0.1, seed);
            let a = phi(&v, &ctx, &f).unwrap();
            let b = phi(&v.scaled(-1.0), &ctx, &f).unwrap();
            assert!((a - b).abs() <= 1e-11 * a.abs().max(1e-12), "{a} {b}");
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let ctx = make_context(1.0 + 1e-3 * 3f64.sqrt(), 16).unwrap();
        let f = cubic();
        let v = random_kernel(4, 0.2, 7);
        let rf = ReducedFunctional::for_kernel(&ctx, &f, 4).unwrap();
        let g = rf.grad(v.xi()).unwrap();
        for k in 0..4 {
            let mut p = v.xi().to_vec();
            let mut m = v.xi().to_vec();
            p[k] += 1e-5;
            m[k] -= 1e-5;
            let fd = (rf.phi(&p).unwrap() - rf.phi(&m).unwrap()) / 2e-5;
            let scale = g.iter().map(|x| x.abs()).fold(0.0, f64::max);
            assert!((fd - g[k]).abs() <= 1e-7 * scale, "{k}: {fd} {}", g[k]);
        }
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let ctx = make_context(1.0 + 1e-3 * 5f64.sqrt(), 16).unwrap();
        let f = NonlinearitySpec::from_taylor(&[(2, 1.0), (3, 0.5)]).unwrap();
        let rf = ReducedFunctional::for_kernel(&ctx, &f, 3).unwrap();
        let v = random_kernel(3, 0.1, 11);
        let h = random_kernel(3, 1.0, 12);
        let at = rf.evaluate(v.xi(), None).unwrap();
        let hv = rf.hess_vec(&at, h.xi()).unwrap();
        let s = 1e-6;
        let p: Vec<f64> = v.xi().iter().zip(h.xi()).map(|(a, b)| a + s * b).collect();
        let m: Vec<f64> = v.xi().iter().zip(h.xi()).map(|(a, b)| a - s * b).collect();
        let gp = rf.grad(&p).unwrap();
        let gm = rf.grad(&m).unwrap();
        let scale = hv.iter().map(|x| x.abs()).fold(0.0, f64::max);
        for k in 0..3 {
            let fd = (gp[k] - gm[k]) / (2.0 * s);
            assert!((fd - hv[k]).abs() <= 1e-6 * scale, "{k}: {fd} {}", hv[k]);
        }
    }

    #[test]
    fn g_cubic_example() {
        let v = KernelVector::new(vec![1.0]);
        let g = g_eval(&v, &cubic()).unwrap();
        assert!((g - 9.0 * PI * PI / 128.0).abs() < 1e-14);
        let u = u_eval(&v, &cubic()).unwrap();
        assert!((u - 9.0 / (128.0 * PI * PI)).abs() < 1e-15);
        assert!(matches!(u_eval(&KernelVector::zeros(2), &cubic()), Err(Error::ZeroVector)));
    }

    #[test]
    fn g_square_closed_form_example() {
        let sq = NonlinearitySpec::from_taylor(&[(2, 1.0)]).unwrap();
        let v = from_eta(&[1.0]);
        let expect = 0.5 * (25.0 * PI * PI / 32.0 + PI.powi(4) / 6.0);
        let spectral = g_eval(&v, &sq).unwrap();
        assert!((spectral - expect).abs() <= 1e-10 * expect, "{spectral} {expect}");
        assert!((g_p2_closed_form(&[1.0], 1.0) - expect).abs() <= 1e-13 * expect);
    }

    #[test]
    fn m_oracle_matches_spectral_path() {
        assert_eq!(kernel_m_oracle(&KernelVector::zeros(3), 2).unwrap(), 0.0);
        assert!(kernel_m_oracle(&KernelVector::new(vec![1.0]), 3).is_err());
        let sq = NonlinearitySpec::from_taylor(&[(2, 1.0)]).unwrap();
        for seed in 0..3 {
            let v = random_kernel(4, 1.0, 20 + seed);
            let spectral = 2.0 * g_eval(&v, &sq).unwrap();
            let oracle = kernel_m_oracle(&v, 2).unwrap();
            assert!((spectral - oracle).abs() <= 1e-8 * spectral, "{spectral} {oracle}");
        }
        let eta = eta_coeffs(&random_kernel(3, 1.0, 5));
        let k = MKernel::new(&eta, 2);
        for i in 0..20 {
            let t = 0.3 * i as f64;
            let x = 0.1 + 0.15 * i as f64;
            assert!(k.value(t + x, t - x) >= -1e-13);
        }
    }

    #[test]
    fn decomposition_examples() {
        let one = decompose_m(&TorusField::from_fn(16, |_, _| 1.0)).unwrap();
        assert!((one.alpha - 1.0).abs() < 1e-14);
        assert!(one.a.iter().all(|x| x.abs() < 1e-14));
        assert!(one.m_tilde.iter().all(|x| x.abs() < 1e-14));
        assert!((l_inv_quadratic_form(&one) + PI.powi(4) / 6.0).abs() < 1e-12);

        let sq = decompose_m(&TorusField::from_fn(32, |a, b| (a.sin() - b.sin()).powi(2))).unwrap();
        let h = 2.0 * PI / 32.0;
        assert!((sq.alpha - 1.0).abs() < 1e-13);
        for i in 0..32 {
            let s = i as f64 * h;
            assert!((sq.a[i] - (s.sin().powi(2) - 0.5)).abs() < 1e-13);
            for k in 0..32 {
                let t = k as f64 * h;
                assert!((sq.m_tilde[(i, k)] + 2.0 * s.sin() * t.sin()).abs() < 1e-13);
            }
        }
        assert!(sq.marginal_gap < 1e-14);
        let not_sym = TorusField::from_fn(16, |a, _| a.cos());
        assert!(matches!(decompose_m(&not_sym), Err(Error::NotDecomposable(_))));
        let mixed = TorusField::from_field(&SpectralField::mode(2, 2, 1, 2, 1.0), 32);
        assert!(matches!(decompose_m(&mixed), Err(Error::NotDecomposable(_))));
    }

    #[test]
    fn decomposition_formula_matches_spectral_pairing() {
        for seed in 0..3 {
            let v = random_kernel(4, 1.0, 40 + seed);
            let w = kernel_power_field(&v, 2, even_power_lx(2, 4)).unwrap();
            let spectral = l_inv_pairing(&w).unwrap();
            let d = decompose_m(&TorusField::kernel_power(&v, 2, 32)).unwrap();
            let formula = l_inv_quadratic_form(&d);
            assert!((spectral - formula).abs() <= 1e-9 * spectral.abs(), "{spectral} {formula}");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let mut w = SpectralField::zeros(5, 5);
        for l in 0..=5 {
            for j in 1..=5 {
                if (l + j) % 2 == 0 && l != j {
                    w.set(l, j, rng.gen_range(-1.0..1.0));
                }
            }
        }
        let d = decompose_m(&TorusField::from_field(&w, 32)).unwrap();
        let spectral = l_inv_pairing(&w).unwrap();
        assert!((l_inv_quadratic_form(&d) - spectral).abs() <= 1e-11 * spectral.abs());

        let pure = TorusField::from_fn(16, |a, b| a.sin() * b.sin());
        let d = decompose_m(&pure).unwrap();
        let h = 2.0 * PI / 16.0;
        let mm: f64 = d.big_m.iter().zip(d.m_tilde.iter()).map(|(x, y)| x * y).sum::<f64>() * h * h;
        assert!((l_inv_quadratic_form(&d) + 0.5 * mm).abs() < 1e-13);
    }

    #[test]
    fn rescaled_g_identities() {
        let sq = NonlinearitySpec::from_taylor(&[(2, 1.0)]).unwrap();
        let v = random_kernel(3, 1.0, 50);
        let g1 = g_eval(&v, &sq).unwrap();
        let ip = {
            let u = embed(&v);
            Projector::new((3, 3), (0, 1), (6, 6)).integrate(&u, &Polynomial::monomial(2, 1.0)).unwrap()
        };
        let alpha = ip / (2.0 * PI * PI);
        for n in [2usize, 3] {
            let direct = g_eval(&rescale_ln(&v, n).unwrap(), &sq).unwrap();
            let n2 = (n * n) as f64;
            let formula = g1 / n2 + PI.powi(4) * alpha * alpha / 12.0 * (1.0 - 1.0 / n2);
            assert!((direct - formula).abs() <= 1e-10 * direct, "{direct} {formula}");
            let lt = LeadingTerm::new(&sq, 3, n).unwrap();
            assert!((lt.g(v.xi()).unwrap() - direct).abs() <= 1e-10 * direct);
        }
        let v = random_kernel(3, 1.0, 51);
        let g1 = g_eval(&v, &cubic()).unwrap();
        let g3 = g_eval(&rescale_ln(&v, 3).unwrap(), &cubic()).unwrap();
        assert!((g1 - g3).abs() <= 1e-10 * g1.abs());
    }

    #[test]
    fn leading_gradients_match_differences() {
        let cases = [
            (cubic(), 1),
            (NonlinearitySpec::from_taylor(&[(2, 1.0)]).unwrap(), 2),
            (NonlinearitySpec::from_taylor(&[(2, 1.0), (3, -0.5)]).unwrap(), 3),
            (NonlinearitySpec::from_taylor(&[(2, 1.0), (3, 0.5)]).unwrap(), 1),
            (NonlinearitySpec::from_taylor(&[(4, 1.0), (5, 0.5)]).unwrap(), 1),
        ];
        for (f, n) in cases {
            let lt = LeadingTerm::new(&f, 3, n).unwrap();
            let v = random_kernel(3, 1.0, 60 + n as u64);
            let (_, g) = lt.g_with_grad(v.xi()).unwrap();
            let scale = g.iter().map(|x| x.abs()).fold(0.0, f64::max);
            for k in 0..3 {
                let mut p = v.xi().to_vec();
                let mut m = v.xi().to_vec();
                p[k] += 1e-5;
                m[k] -= 1e-5;
                let fd = (lt.g(&p).unwrap() - lt.g(&m).unwrap()) / 2e-5;
                assert!((fd - g[k]).abs() <= 1e-7 * scale, "{:?} {k}: {fd} {}", f.taylor(), g[k]);
            }
        }
    }

    #[test]
    fn phi_expansion_remainder_is_high_order() {
        let ctx = make_context(1.0 + 1e-3 * 3f64.sqrt(), 16).unwrap();
        let f = cubic();
        let base = random_kernel(3, 1.0, 70);
        let mut rem = Vec::new();
        for k in 0..3 {
            let v = base.scaled(0.2 / 2f64.powi(k));
            let g = Galerkin::for_kernel(&ctx, &f, 3).unwrap();
            let vf = g.kernel_field(v.xi());
            let fv = g.nonlinearity(&vf).unwrap();
            let approx = 0.5 * ctx.eps * h1_norm(&vf).powi(2) - g.primitive_integral(&vf).unwrap()
                - 0.5 * inner_l2(&fv, &g.l_inv(&fv)).unwrap();
            rem.push((phi(&v, &ctx, &f).unwrap() - approx).abs());
        }
        for r in rem.windows(2) {
            assert!((r[0] / r[1]).log2() >= 5.5, "{rem:?}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn g_is_homogeneous(seed in 0u64..1000, which in 0usize..3) {
            let f = match which {
                0 => cubic(),
                1 => NonlinearitySpec::from_taylor(&[(2, 1.0)]).unwrap(),
                _ => NonlinearitySpec::from_taylor(&[(2, 1.0), (3, 1.0)]).unwrap(),
            };
            let v = random_kernel(3, 1.0, seed);
            let lt = LeadingTerm::new(&f, 3, 1).unwrap();
            let g = lt.g(v.xi()).unwrap();
            for lam in [0.5, 2.0, 3.0] {
                let gl = lt.g(v.scaled(lam).xi()).unwrap();
                prop_assert!((gl - lam.powi(lt.degree() as i32) * g).abs() <= 1e-10 * g.abs().max(1e-300) * lam.powi(lt.degree() as i32));
            }
        }

        #[test]
        fn even_g_is_nonnegative(seed in 0u64..1000) {
            let sq = NonlinearitySpec::from_taylor(&[(2, 1.0)]).unwrap();
            let v = random_kernel(4, 1.0, seed);
            prop_assert!(g_eval(&v, &sq).unwrap() >= -1e-12);
        }

        #[test]
        fn u_is_scale_invariant(seed in 0u64..1000) {
            let v = random_kernel(3, 1.0, seed);
            let u1 = u_eval(&v, &cubic()).unwrap();
            let u2 = u_eval(&v.scaled(2.0), &cubic()).unwrap();
            let um = u_eval(&v.scaled(-1.0), &cubic()).unwrap();
            prop_assert!((u1 - u2).abs() <= 1e-12 * u1.abs());
            prop_assert!((u1 - um).abs() <= 1e-12 * u1.abs());
        }
    }
}
