//! The range equation `w = L_omega^{-1} Pi_W f(v + w)` on a truncated
//! lattice: diagonal inverse, Picard iteration and its linearization.

use ndarray::{Array2, Zip};

use crate::error::{Error, Result};
use crate::frequency::FrequencyContext;
use crate::kernel_space::KernelVector;
use crate::poly::Polynomial;
use crate::reduced_functional::NonlinearitySpec;
use crate::spectral_core::{gcd, l2_norm, omega_norm, Lattice, Projector, SpectralField};

/// Contraction-domain warning threshold for `|v|_omega^{p-1} / gamma`.
pub const DEFAULT_RHO: f64 = 0.1;

const RESONANCE_TOL: f64 = 1e-13;

/// Diagnostics of one Picard solve.
#[derive(Debug, Clone, PartialEq)]
pub struct PSolveReport {
    pub iterations: usize,
    /// Last update `|w_{k+1} - w_k|_omega`.
    pub update: f64,
    /// Ratio of the last two updates.
    pub ratio: f64,
    pub converged: bool,
    pub w_omega_norm: f64,
    /// `L^2` distance between `w(v)` and the first iterate `L^{-1} Pi_W f(v)`.
    pub first_iterate_gap: f64,
    /// `|v|_omega^{p-1} / gamma`.
    pub domain_ratio: f64,
    /// Whether `domain_ratio` stays below [`DEFAULT_RHO`].
    pub in_domain: bool,
}

/// Reciprocal divisors `1 / (omega^2 l^2 - j^2)` off the diagonal, zero on it.
fn inverse_divisors(
    omega: f64,
    lattice: Lattice,
    (lt, lx): (usize, usize),
) -> Result<Array2<f64>> {
    let w2 = omega * omega;
    let mut out = Array2::zeros((lt + 1, lx));
    for a in 0..=lt {
        for b in 1..=lx {
            if lattice.on_diagonal(a, b) {
                continue;
            }
            let l = lattice.l(a) as f64;
            let j = lattice.j(b) as f64;
            let d = w2 * l * l - j * j;
            if d.abs() <= RESONANCE_TOL * (w2 * l * l).max(j * j) {
                return Err(Error::Resonance {
                    l: lattice.l(a),
                    j: lattice.j(b),
                });
            }
            out[(a, b - 1)] = 1.0 / d;
        }
    }
    Ok(out)
}

/// `h_{lj} / (omega^2 l^2 - j^2)` on the off-diagonal modes of `h`.
pub fn apply_l_inv(h: &SpectralField, omega: f64) -> Result<SpectralField> {
    let inv = inverse_divisors(omega, h.lattice(), (h.lt(), h.lx()))?;
    let mut out = h.clone();
    Zip::from(out.coeffs_mut()).and(&inv).for_each(|c, &d| *c *= d);
    Ok(out)
}

/// `(omega^2 l^2 - j^2) u_{lj}`, the operator `-omega^2 d_tt + d_xx`.
pub fn apply_l(u: &SpectralField, omega: f64) -> SpectralField {
    let la = u.lattice();
    let w2 = omega * omega;
    let mut out = u.clone();
    for ((a, b), c) in out.coeffs_mut().indexed_iter_mut() {
        let l = la.l(a) as f64;
        let j = la.j(b + 1) as f64;
        *c *= w2 * l * l - j * j;
    }
    out
}

/// Default reduced truncation `(lt, lx)` for kernel vectors of length `len`.
pub fn default_truncation(len: usize, f: &NonlinearitySpec) -> (usize, usize) {
    let lt = 2 * len.max(1);
    if f.polynomial().has_even_terms() {
        (lt, 8 * len.max(1))
    } else {
        (lt, lt)
    }
}

/// Truncated range problem on a mode lattice.
#[derive(Debug, Clone)]
pub struct Galerkin {
    ctx: FrequencyContext,
    f: NonlinearitySpec,
    lattice: Lattice,
    shape: (usize, usize),
    dim: usize,
    inv: Array2<f64>,
    nl: Projector,
    quad: Projector,
    df: Polynomial,
    big_f: Polynomial,
    p: usize,
}

impl Galerkin {
    /// Range problem with reduced shape `(lt, lx)` and `dim` kernel modes.
    pub fn new(
        ctx: &FrequencyContext,
        f: &NonlinearitySpec,
        lattice: Lattice,
        (lt, lx): (usize, usize),
        dim: usize,
    ) -> Result<Self> {
        let g = f.polynomial();
        if lattice.x_stride > 1 && g.has_even_terms() {
            return Err(Error::InvalidInput(
                "x-strided lattices require an odd nonlinearity".into(),
            ));
        }
        let (a, b) = lattice.diagonal_position(dim);
        if dim == 0 || a > lt || b > lx {
            return Err(Error::Truncation {
                needed: a.max(b),
                available: lt.min(lx),
            });
        }
        let r = g.degree().max(1);
        Ok(Self {
            ctx: *ctx,
            f: f.clone(),
            lattice,
            shape: (lt, lx),
            dim,
            inv: inverse_divisors(ctx.omega, lattice, (lt, lx))?,
            nl: Projector::for_polynomial((lt, lx), (lt, lx), r),
            quad: Projector::new((lt, lx), (0, 1), ((r + 1) * lt, (r + 1) * lx)),
            df: g.derivative(),
            big_f: g.primitive(),
            p: f.classification().map(|c| c.p).unwrap_or(2),
        })
    }

    /// Unit-lattice problem sized for kernel vectors of length `len`.
    pub fn for_kernel(ctx: &FrequencyContext, f: &NonlinearitySpec, len: usize) -> Result<Self> {
        Self::new(ctx, f, Lattice::UNIT, default_truncation(len, f), len.max(1))
    }

    pub fn ctx(&self) -> &FrequencyContext {
        &self.ctx
    }

    pub fn nonlinearity_spec(&self) -> &NonlinearitySpec {
        &self.f
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Physical index `j` of the `k`-th kernel coordinate.
    pub fn physical_j(&self, k: usize) -> usize {
        self.lattice.kernel_stride() * k
    }

    pub fn zero_field(&self) -> SpectralField {
        SpectralField::zeros_on(self.shape.0, self.shape.1, self.lattice)
    }

    /// Field with the kernel coordinates `xi` on the lattice diagonal.
    pub fn kernel_field(&self, xi: &[f64]) -> SpectralField {
        let mut u = self.zero_field();
        for (i, &c) in xi.iter().enumerate().take(self.dim) {
            let (a, b) = self.lattice.diagonal_position(i + 1);
            u.set(a, b, c);
        }
        u
    }

    /// Kernel coordinates of `u`.
    pub fn kernel_part(&self, u: &SpectralField) -> Vec<f64> {
        (1..=self.dim)
            .map(|k| {
                let (a, b) = self.lattice.diagonal_position(k);
                u.get(a, b)
            })
            .collect()
    }

    /// Physical kernel vector of the reduced coordinates `xi`.
    pub fn physical_kernel(&self, xi: &[f64]) -> KernelVector {
        let g = self.lattice.kernel_stride();
        let mut out = vec![0.0; g * xi.len()];
        for (i, &c) in xi.iter().enumerate() {
            out[g * (i + 1) - 1] = c;
        }
        KernelVector::new(out)
    }

    /// `f(u)` on the truncation.
    pub fn nonlinearity(&self, u: &SpectralField) -> Result<SpectralField> {
        self.nl.apply(u, self.f.polynomial())
    }

    /// `f'(u) h` on the truncation.
    pub fn linearized_nonlinearity(&self, u: &SpectralField, h: &SpectralField) -> Result<SpectralField> {
        self.nl.apply_product(u, &self.df, h)
    }

    /// `int_Omega F(u)` with `F' = f`, `F(0) = 0`.
    pub fn primitive_integral(&self, u: &SpectralField) -> Result<f64> {
        self.quad.integrate(u, &self.big_f)
    }

    /// `L_omega^{-1} Pi_W h`.
    pub fn l_inv(&self, h: &SpectralField) -> SpectralField {
        let mut out = h.clone();
        Zip::from(out.coeffs_mut()).and(&self.inv).for_each(|c, &d| *c *= d);
        out
    }

    /// Picard iteration for `w(v)` from `w0` (zero when `None`).
    pub fn solve(
        &self,
        xi: &[f64],
        tol: f64,
        max_iter: usize,
        w0: Option<&SpectralField>,
    ) -> Result<(SpectralField, PSolveReport)> {
        let omega = self.ctx.omega;
        let v = self.kernel_field(xi);
        let v_norm = omega_norm(&v, omega);
        let domain_ratio = if self.ctx.gamma > 0.0 {
            v_norm.powi(self.p as i32 - 1) / self.ctx.gamma
        } else {
            f64::INFINITY
        };
        let mut w = match w0 {
            Some(w0) => w0.clone(),
            None => self.zero_field(),
        };
        let mut first: Option<SpectralField> = None;
        let mut prev_update = f64::INFINITY;
        let mut ratio = 0.0;
        for it in 1..=max_iter {
            let u = v.add(&w)?;
            let next = self.l_inv(&self.nonlinearity(&u)?);
            if first.is_none() && w0.is_none() {
                first = Some(next.clone());
            }
            let update = omega_norm(&next.sub(&w)?, omega);
            let scale = omega_norm(&next, omega);
            if it > 1 && prev_update > 0.0 {
                ratio = update / prev_update;
            }
            w = next;
            let floor = it > 2 && update >= 0.5 * prev_update && update <= 1e-13 * scale.max(1e-300);
            if update <= tol * scale.max(1.0) || floor || update == 0.0 {
                let first_gap = match &first {
                    Some(f1) => l2_norm(&w.sub(f1)?),
                    None => f64::NAN,
                };
                return Ok((
                    w,
                    PSolveReport {
                        iterations: it,
                        update,
                        ratio,
                        converged: true,
                        w_omega_norm: scale,
                        first_iterate_gap: first_gap,
                        domain_ratio,
                        in_domain: domain_ratio <= DEFAULT_RHO,
                    },
                ));
            }
            if !update.is_finite() || update > 1e6 * (1.0 + scale) {
                return Err(Error::NonConvergence {
                    iterations: it,
                    ratio,
                });
            }
            prev_update = update;
        }
        Err(Error::NonConvergence {
            iterations: max_iter,
            ratio,
        })
    }

    /// Fixed point of `dw = L_omega^{-1} Pi_W (f'(u)(h + dw))`.
    pub fn solve_linearized(
        &self,
        u: &SpectralField,
        h: &[f64],
        tol: f64,
        max_iter: usize,
    ) -> Result<SpectralField> {
        let hf = self.kernel_field(h);
        if hf.max_abs() == 0.0 {
            return Ok(self.zero_field());
        }
        let mut dw = self.zero_field();
        let mut prev = f64::INFINITY;
        let mut ratio = 0.0;
        for it in 1..=max_iter {
            let next = self.l_inv(&self.linearized_nonlinearity(u, &hf.add(&dw)?)?);
            let update = next.sub(&dw)?.max_abs();
            let scale = next.max_abs();
            if prev.is_finite() && prev > 0.0 {
                ratio = update / prev;
            }
            dw = next;
            let floor = it > 2 && update >= 0.5 * prev && update <= 1e-13 * scale;
            if update <= tol * scale || floor || update == 0.0 {
                return Ok(dw);
            }
            if !update.is_finite() {
                break;
            }
            prev = update;
        }
        Err(Error::NonConvergence {
            iterations: max_iter,
            ratio,
        })
    }
}

/// Problem on the lattice of the exact temporal support of `v`, with the
/// reduced kernel coordinates of `v`.
pub fn galerkin_for_vector(
    v: &KernelVector,
    ctx: &FrequencyContext,
    f: &NonlinearitySpec,
) -> Result<(Galerkin, Vec<f64>)> {
    let n = v
        .xi()
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .fold(0, |g, (i, _)| gcd(g, i + 1))
        .max(1);
    let even = f.polynomial().has_even_terms();
    let lattice = if even { Lattice::new(n, 1)? } else { Lattice::new(n, n)? };
    let dim = (v.len() / n).max(1);
    let (lt, lx) = default_truncation(dim, f);
    let lx = if even { 8 * v.len().max(1) } else { lx };
    let g = Galerkin::new(ctx, f, lattice, (lt, lx), dim)?;
    let xi = (1..=dim).map(|k| v.get(n * k)).collect();
    Ok((g, xi))
}

/// `w(v)` for a physical kernel vector, returned on the unit lattice with
/// the default physical truncation.
pub fn solve_p(
    v: &KernelVector,
    ctx: &FrequencyContext,
    f: &NonlinearitySpec,
    tol: f64,
    max_iter: usize,
) -> Result<(SpectralField, PSolveReport)> {
    let (g, xi) = galerkin_for_vector(v, ctx, f)?;
    let (w, rep) = g.solve(&xi, tol, max_iter, None)?;
    let (lt, lx) = default_truncation(v.len().max(1), f);
    Ok((w.to_unit_lattice().resized(lt, lx), rep))
}

/// Derivative of `v -> w(v)` along `h` at a converged pair `(v, w)`.
pub fn solve_p_linearized(
    v: &KernelVector,
    w: &SpectralField,
    ctx: &FrequencyContext,
    f: &NonlinearitySpec,
    h: &KernelVector,
) -> Result<SpectralField> {
    let g = Galerkin::new(ctx, f, w.lattice(), (w.lt(), w.lx()), v.len().max(h.len()))?;
    let u = g.kernel_field(v.xi()).add(w)?;
    let mut hx = h.xi().to_vec();
    hx.resize(g.dim(), 0.0);
    g.solve_linearized(&u, &hx, 1e-14, 500)
}
