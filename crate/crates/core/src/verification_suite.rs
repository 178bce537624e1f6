//! Executable checks of the identities and inequalities behind the solver,
//! each returning a [`CheckReport`] with a measured defect and its tolerance.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::critical_search::{solve_n, SearchSettings};
use crate::error::{Error, Result};
use crate::frequency::{admissible_with_n0, make_context, FrequencyContext, Side};
use crate::kernel_space::{embed_into, from_eta, rescale_ln, KernelVector};
use crate::poly::Polynomial;
use crate::quadrature::CompositeRule;
use crate::range_solver::{apply_l_inv, solve_p};
use crate::reduced_functional::{
    decompose_m, even_power_lx, kernel_m_oracle, kernel_power_field, l_inv_pairing, l_inv_quadratic_form,
    NonlinearitySpec, TorusField,
};
use crate::spectral_core::{inner_l2, l2_norm, omega_norm, project_w, Projector, SpectralField};

/// Outcome of one check; `passed` is `measured <= tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    /// Defect compared against the tolerance.
    pub measured: f64,
    pub tolerance: f64,
    /// Further monitored quantities.
    pub details: Vec<(String, f64)>,
    pub description: String,
}

impl CheckReport {
    fn new(name: &str, measured: f64, tolerance: f64, details: Vec<(String, f64)>, description: &str) -> Self {
        Self {
            name: name.to_string(),
            passed: measured <= tolerance,
            measured,
            tolerance,
            details,
            description: description.to_string(),
        }
    }
}

/// Names accepted by [`run_suite`], in report order.
pub const CHECK_NAMES: [&str; 10] = [
    "change_of_variables",
    "decomposition_formula",
    "g_positivity",
    "kappa",
    "ln_norm_scaling",
    "operator_estimates",
    "orthogonality",
    "rescaling_identity",
    "scalings",
    "w_properties",
];

/// Random kernel vector with coefficients decaying like `1 / j^2`.
pub fn random_kernel(rng: &mut ChaCha8Rng, len: usize) -> KernelVector {
    KernelVector::new((1..=len).map(|j| rng.gen_range(-1.0..1.0) / (j * j) as f64).collect())
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(f64::MIN_POSITIVE)
}

fn kernel_field(v: &KernelVector) -> SpectralField {
    let m = v.len().max(1);
    embed_into(v, m, m).expect("kernel vectors embed into their own truncation")
}

fn power_integral(v: &KernelVector, k: usize) -> Result<f64> {
    let m = v.len().max(1);
    Projector::new((m, m), (0, 1), (k * m, k * m)).integrate(&kernel_field(v), &Polynomial::monomial(k, 1.0))
}

/// Trigonometric polynomial `m(s1, s2)` of degree `<= degree` in each variable.
#[derive(Debug, Clone)]
pub struct TrigPolynomial {
    degree: usize,
    /// `c[(k1 + degree, k2 + degree)]` for `cos(k1 s1 + k2 s2)` and `s` for sine.
    c: Vec<f64>,
    s: Vec<f64>,
}

impl TrigPolynomial {
    pub fn random(rng: &mut ChaCha8Rng, degree: usize) -> Self {
        let side = 2 * degree + 1;
        let mut draw = |k1: usize, k2: usize| {
            let a = (k1 as f64 - degree as f64).abs() + (k2 as f64 - degree as f64).abs();
            rng.gen_range(-1.0..1.0) / (1.0 + a * a)
        };
        let mut c = vec![0.0; side * side];
        let mut s = vec![0.0; side * side];
        for k1 in 0..side {
            for k2 in 0..side {
                c[k1 * side + k2] = draw(k1, k2);
                s[k1 * side + k2] = draw(k1, k2);
            }
        }
        Self { degree, c, s }
    }

    pub fn constant(value: f64) -> Self {
        Self { degree: 0, c: vec![value], s: vec![0.0] }
    }

    /// `sin(s1)`.
    pub fn sin_first() -> Self {
        let mut s = vec![0.0; 9];
        s[2 * 3 + 1] = 1.0;
        Self { degree: 1, c: vec![0.0; 9], s }
    }

    pub fn eval(&self, s1: f64, s2: f64) -> f64 {
        let d = self.degree as i64;
        let side = 2 * self.degree + 1;
        let mut acc = 0.0;
        for k1 in -d..=d {
            for k2 in -d..=d {
                let i = (k1 + d) as usize * side + (k2 + d) as usize;
                let arg = k1 as f64 * s1 + k2 as f64 * s2;
                acc += self.c[i] * arg.cos() + self.s[i] * arg.sin();
            }
        }
        acc
    }

    fn abs_sum(&self) -> f64 {
        self.c.iter().chain(&self.s).map(|x| x.abs()).sum()
    }
}

/// `(int_Omega m(t + x, t - x), (1/2) int_{T^2} m)`.
pub fn change_of_variables_sides(m: &TrigPolynomial) -> (f64, f64) {
    let nt = 4 * m.degree + 8;
    let rule = CompositeRule::new(20, PI / 4.0);
    let ht = 2.0 * PI / nt as f64;
    let lhs: f64 = (0..nt)
        .map(|i| {
            let t = i as f64 * ht;
            rule.integrate(0.0, PI, |x| m.eval(t + x, t - x))
        })
        .sum::<f64>()
        * ht;
    let rhs: f64 = (0..nt)
        .flat_map(|i| (0..nt).map(move |k| (i, k)))
        .map(|(i, k)| m.eval(i as f64 * ht, k as f64 * ht))
        .sum::<f64>()
        * ht
        * ht
        * 0.5;
    (lhs, rhs)
}

pub fn check_change_of_variables(samples: usize, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut inputs = vec![TrigPolynomial::constant(1.0), TrigPolynomial::sin_first()];
    inputs.extend((0..samples).map(|_| TrigPolynomial::random(&mut rng, 8)));
    for m in &inputs {
        let (l, r) = change_of_variables_sides(m);
        worst = worst.max(rel(l, r, 2.0 * PI * PI * m.abs_sum()));
    }
    CheckReport::new(
        "change_of_variables",
        worst,
        1e-11,
        vec![("inputs".into(), inputs.len() as f64)],
        "integral over the strip of m(t+x, t-x) equals half the torus integral",
    )
}

/// `max_j |(v^{2p})_{jj}| / |v^{2p}|`.
pub fn orthogonality_defect(v: &KernelVector, p: usize) -> Result<f64> {
    let m = v.len().max(1);
    let k = 2 * p;
    let w = Projector::new((m, m), (k * m, k * m), (k * m, k * m)).apply(&kernel_field(v), &Polynomial::monomial(k, 1.0))?;
    let nw = l2_norm(&w);
    if nw == 0.0 {
        return Ok(0.0);
    }
    Ok((1..=k * m).map(|j| w.get(j, j).abs()).fold(0.0, f64::max) / nw)
}

pub fn check_orthogonality(samples: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = orthogonality_defect(&KernelVector::new(vec![1.0]), 1)?;
    worst = worst.max(orthogonality_defect(&KernelVector::zeros(3), 1)?);
    for i in 0..samples {
        let len = rng.gen_range(1..=8);
        let v = random_kernel(&mut rng, len);
        worst = worst.max(orthogonality_defect(&v, 1 + i % 2)?);
    }
    Ok(CheckReport::new(
        "orthogonality",
        worst,
        1e-11,
        vec![],
        "even powers of kernel elements have no diagonal modes",
    ))
}

/// `(int L^{-1}(L_n w) L_n w, -pi^4 a^2 / 6 + (int w L^{-1} w + pi^4 a^2 / 6) / n^2)`
/// for `w = v^p` with mean `a`.
pub fn rescaling_sides(v: &KernelVector, p: usize, n: usize) -> Result<(f64, f64)> {
    let q1 = l_inv_pairing(&kernel_power_field(v, p, even_power_lx(p, v.len()))?)?;
    let vn = rescale_ln(v, n)?;
    let qn = l_inv_pairing(&kernel_power_field(&vn, p, even_power_lx(p, vn.len()))?)?;
    let alpha = power_integral(v, p)? / (2.0 * PI * PI);
    let c = PI.powi(4) * alpha * alpha / 6.0;
    let n2 = (n * n) as f64;
    Ok((qn, -c + (q1 + c) / n2))
}

pub fn check_rescaling_identity(samples: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut inputs = vec![(KernelVector::new(vec![1.0]), 2usize)];
    inputs.extend((0..samples).map(|i| (random_kernel(&mut rng, 3), 2 + i % 2)));
    for (v, n) in &inputs {
        let (lhs, rhs) = rescaling_sides(v, 2, *n)?;
        worst = worst.max(rel(lhs, rhs, lhs.abs()));
    }
    Ok(CheckReport::new(
        "rescaling_identity",
        worst,
        1e-9,
        vec![],
        "quadratic form of L^{-1} on time-space rescaled squares",
    ))
}

pub fn check_g_positivity(trials: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_g = f64::INFINITY;
    let mut worst = 0.0f64;
    for i in 0..trials {
        let p = if i % 5 == 4 { 4 } else { 2 };
        let len = if p == 2 { rng.gen_range(1..=5) } else { rng.gen_range(1..=3) };
        let v = random_kernel(&mut rng, len);
        let g = -l_inv_pairing(&kernel_power_field(&v, p, even_power_lx(p, len))?)?;
        let oracle = kernel_m_oracle(&v, p)?;
        min_g = min_g.min(g / v.l2_norm().powi(2 * p as i32));
        worst = worst.max(rel(g, oracle, g.abs()));
    }
    let positivity = (-min_g).max(0.0) / 1e-12 * 1e-8;
    Ok(CheckReport::new(
        "g_positivity",
        worst.max(positivity),
        1e-8,
        vec![("min_normalized_g".into(), min_g), ("oracle_gap".into(), worst)],
        "-int v^p L^{-1} v^p is nonnegative and matches the kernel quadrature",
    ))
}

/// `(int v^p)^2 / int v^{2p}` for the kernel element of profile `eta`.
pub fn kappa_ratio(eta: &[f64], p: usize) -> Result<f64> {
    let v = from_eta(eta);
    let a = power_integral(&v, p)?;
    let b = power_integral(&v, 2 * p)?;
    Ok(a * a / b)
}

/// Odd square-wave approximant `sum_{k odd <= degree} sin(k s) / k`.
pub fn square_wave(degree: usize) -> Vec<f64> {
    (1..=degree).map(|k| if k % 2 == 1 { 1.0 / k as f64 } else { 0.0 }).collect()
}

pub fn check_kappa(p: usize, family_size: usize, seed: u64) -> Result<CheckReport> {
    let k = PI * PI;
    let mut sup_square = 0.0f64;
    let mut sup_all = 0.0f64;
    for i in 0..family_size {
        let r = kappa_ratio(&square_wave(2 * i + 1), p)?;
        sup_square = sup_square.max(r);
    }
    sup_all = sup_all.max(sup_square);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..100 {
        let len = rng.gen_range(1..=6);
        let eta: Vec<f64> = (1..=len).map(|j| rng.gen_range(-1.0..1.0) / j as f64).collect();
        sup_all = sup_all.max(kappa_ratio(&eta, p)?);
    }
    let lower = (0.9 * k - sup_square).max(0.0) / k;
    let upper = (sup_all - k * (1.0 + 1e-6)).max(0.0) / k;
    Ok(CheckReport::new(
        "kappa",
        lower.max(upper),
        0.0,
        vec![("sup_square_wave".into(), sup_square / k), ("sup_all".into(), sup_all / k)],
        "sup of (int v^p)^2 / int v^2p is approached by square waves and bounded by pi^2",
    ))
}

pub fn check_decomposition_formula(samples: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let len = rng.gen_range(1..=4);
        let v = random_kernel(&mut rng, len);
        let spectral = l_inv_pairing(&kernel_power_field(&v, 2, even_power_lx(2, len))?)?;
        let formula = l_inv_quadratic_form(&decompose_m(&TorusField::kernel_power(&v, 2, 32))?);
        worst = worst.max(rel(spectral, formula, spectral.abs()));
    }
    Ok(CheckReport::new(
        "decomposition_formula",
        worst,
        1e-9,
        vec![],
        "closed form of int w L^{-1} w through the torus decomposition",
    ))
}

pub fn check_ln_norm_scaling(samples: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for i in 0..samples {
        let v = random_kernel(&mut rng, 1 + i % 8);
        let n = 1 + i % 5;
        let vn = rescale_ln(&v, n)?;
        worst = worst.max(rel(vn.h1_norm(), n as f64 * v.h1_norm(), vn.h1_norm()));
        worst = worst.max(rel(vn.l2_norm(), v.l2_norm(), v.l2_norm()));
        let (a, b) = (power_integral(&v, 4)?, power_integral(&vn, 4)?);
        worst = worst.max(rel(a, b, a.abs()));
    }
    Ok(CheckReport::new(
        "ln_norm_scaling",
        worst,
        1e-11,
        vec![],
        "time rescaling multiplies the H1 norm by n and keeps L2 norms and power integrals",
    ))
}

fn random_field(rng: &mut ChaCha8Rng, lt: usize, lx: usize) -> SpectralField {
    let mut u = SpectralField::zeros(lt, lx);
    for l in 0..=lt {
        for j in 1..=lx {
            u.set(l, j, rng.gen_range(-1.0..1.0) / (1.0 + (l * l + j * j) as f64));
        }
    }
    u
}

/// Slope of `log y` against `log x` by least squares.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.abs().ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn operator_gap(r: &SpectralField, s: &SpectralField, omega: f64) -> Result<f64> {
    let ps = project_w(s);
    let d = apply_l_inv(&ps, omega)?.sub(&apply_l_inv(&ps, 1.0)?)?;
    inner_l2(r, &d)
}

pub fn check_operator_estimates(ctx: &FrequencyContext, trials: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sup = 0.0f64;
    let eps = ctx.eps.abs();
    let l_max = ctx.l_max.min(8);
    for _ in 0..trials {
        let r = random_field(&mut rng, l_max, l_max);
        let s = random_field(&mut rng, l_max, l_max);
        let gap = operator_gap(&r, &s, ctx.omega)?;
        sup = sup.max(gap.abs() * ctx.gamma / (eps * omega_norm(&r, ctx.omega) * omega_norm(&s, ctx.omega)));
    }
    let r = random_field(&mut rng, 6, 6);
    let s = random_field(&mut rng, 6, 6);
    let epss: Vec<f64> = (0..4).map(|k| 1e-3 / 2f64.powi(k)).collect();
    let gaps = epss
        .iter()
        .map(|e| operator_gap(&r, &s, (1.0 + 2.0 * e).sqrt()))
        .collect::<Result<Vec<_>>>()?;
    let slope = log_slope(&epss, &gaps);
    let measured = if sup.is_finite() { (slope - 1.0).abs() } else { f64::INFINITY };
    Ok(CheckReport::new(
        "operator_estimates",
        measured,
        0.1,
        vec![("sup_ratio".into(), sup), ("eps_slope".into(), slope)],
        "difference of the inverses at omega and at 1 is of order eps / gamma",
    ))
}

pub fn check_w_properties(ctx: &FrequencyContext, f: &NonlinearitySpec, trials: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = f.classification()?.p;
    let scale = 0.1 * ctx.gamma.powf(1.0 / (p as f64 - 1.0).max(1.0));
    let mut sym = 0.0f64;
    let mut closure = 0.0f64;
    let mut bound = 0.0f64;
    for i in 0..trials {
        let v = random_kernel(&mut rng, 3).scaled(scale);
        let (w, rep) = solve_p(&v, ctx, f, 1e-15, 500)?;
        let (wm, _) = solve_p(&v.scaled(-1.0), ctx, f, 1e-15, 500)?;
        sym = sym.max(wm.sub(&w.shifted_reflected())?.max_abs() / w.max_abs().max(f64::MIN_POSITIVE));
        let vnorm = omega_norm(&kernel_field(&v), ctx.omega);
        bound = bound.max(rep.w_omega_norm * ctx.gamma / vnorm.powi(p as i32));
        let n = 2 + i % 2;
        let (wn, _) = solve_p(&rescale_ln(&v, n)?, ctx, f, 1e-15, 500)?;
        let off: f64 = wn
            .coeffs()
            .indexed_iter()
            .filter(|((l, _), _)| l % n != 0)
            .map(|(_, c)| c.abs())
            .fold(0.0, f64::max);
        closure = closure.max(off);
    }
    let v = random_kernel(&mut rng, 3);
    let amps = [scale / 4.0, scale / 8.0, scale / 16.0];
    let gaps = amps
        .iter()
        .map(|a| solve_p(&v.scaled(*a), ctx, f, 1e-15, 500).map(|(_, r)| r.first_iterate_gap))
        .collect::<Result<Vec<_>>>()?;
    let slope = log_slope(&amps, &gaps);
    let expected = (2 * p - 1) as f64;
    let measured = (sym / 1e-11).max(if closure == 0.0 { 0.0 } else { f64::INFINITY }).max((slope - expected).abs() / 0.2);
    Ok(CheckReport::new(
        "w_properties",
        measured,
        1.0,
        vec![
            ("symmetry".into(), sym),
            ("closure_leak".into(), closure),
            ("bound_ratio".into(), bound),
            ("first_iterate_slope".into(), slope),
        ],
        "range solution: pair symmetry, closure in V_n, bound ratio, first-iterate order",
    ))
}

/// Measured exponents and level ratios of solution families.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub amplitude_slope: f64,
    pub level_slope: f64,
    pub energy_slope: f64,
    /// `max |phi / predicted - 1|`.
    pub level_deviation: f64,
    pub eps: Vec<f64>,
    pub h1: Vec<f64>,
    pub energy: Vec<f64>,
}

/// Solutions at `ctxs` for one `n` with their scaling fits.
pub fn scaling_fit(f: &NonlinearitySpec, ctxs: &[FrequencyContext], n: usize, settings: &SearchSettings) -> Result<ScalingFit> {
    let mut eps = Vec::new();
    let mut h1 = Vec::new();
    let mut energy = Vec::new();
    let mut phi = Vec::new();
    let mut dev = 0.0f64;
    for ctx in ctxs {
        let (recs, _) = solve_n(ctx, f, n, settings)?;
        let r = &recs[0];
        eps.push(ctx.eps.abs() * (n * n) as f64);
        h1.push(r.norms.h1);
        energy.push(r.energy);
        phi.push(r.phi);
        dev = dev.max((r.phi / r.predicted_level - 1.0).abs());
    }
    Ok(ScalingFit {
        amplitude_slope: log_slope(&eps, &h1),
        level_slope: log_slope(&eps, &phi),
        energy_slope: log_slope(&eps, &energy),
        level_deviation: dev,
        eps,
        h1,
        energy,
    })
}

/// Dyadic contexts `|omega - 1| = base / 2^k` on the side allowed by `f`.
pub fn dyadic_contexts(f: &NonlinearitySpec, base: f64, count: usize, l_max: usize) -> Result<Vec<FrequencyContext>> {
    let probe = make_context(1.0 + base, l_max)?;
    let side = admissible_with_n0(&probe, 1, f, 1.0, 2)?.side;
    let sign = if side == Side::Below { -1.0 } else { 1.0 };
    (0..count).map(|k| make_context(1.0 + sign * base / 2f64.powi(k as i32), l_max)).collect()
}

pub fn check_scalings(f: &NonlinearitySpec, ctxs: &[FrequencyContext], n: usize) -> Result<CheckReport> {
    let q = f.classification()?.q as f64;
    let settings = SearchSettings { dim: 8, restarts: 8, ..SearchSettings::default() };
    let fit = scaling_fit(f, ctxs, n, &settings)?;
    let last = ctxs.last().expect("at least one context");
    let (next, _) = solve_n(last, f, n + 1, &SearchSettings { force: true, ..settings })?;
    let energy_grows = next[0].energy > *fit.energy.last().expect("one energy per context");
    let amp = (fit.amplitude_slope - 1.0 / (q - 1.0)).abs() / 0.03;
    let level = (fit.level_slope - (q + 1.0) / (q - 1.0)).abs() / 0.06;
    let energy = (fit.energy_slope - 2.0 / (q - 1.0)).abs() / 0.06;
    let measured = amp.max(level).max(energy).max(fit.level_deviation / 0.1).max(if energy_grows { 0.0 } else { f64::INFINITY });
    Ok(CheckReport::new(
        "scalings",
        measured,
        1.0,
        vec![
            ("amplitude_slope".into(), fit.amplitude_slope),
            ("level_slope".into(), fit.level_slope),
            ("energy_slope".into(), fit.energy_slope),
            ("level_deviation".into(), fit.level_deviation),
            ("energy_next_n".into(), next[0].energy),
        ],
        "amplitude, level and energy exponents in |eps| n^2, level prediction, energy growth in n",
    ))
}

fn default_w_context() -> Result<FrequencyContext> {
    make_context(1.0 + 1e-3, 16)
}

/// Run the named checks with inputs drawn from `seed`; `"all"` selects every
/// check. Reports follow [`CHECK_NAMES`] order.
pub fn run_suite(selection: &[String], seed: u64) -> Result<Vec<CheckReport>> {
    let mut chosen: Vec<&str> = Vec::new();
    for s in selection {
        if s == "all" {
            chosen.extend(CHECK_NAMES);
        } else if let Some(n) = CHECK_NAMES.iter().find(|n| **n == s.as_str()) {
            chosen.push(n);
        } else {
            return Err(Error::UnknownCheck(s.clone()));
        }
    }
    chosen.sort_by_key(|n| CHECK_NAMES.iter().position(|m| m == n));
    chosen.dedup();
    chosen.into_iter().map(|name| run_check(name, seed)).collect()
}

fn run_check(name: &str, seed: u64) -> Result<CheckReport> {
    let cubic = NonlinearitySpec::from_taylor(&[(3, 1.0)])?;
    match name {
        "change_of_variables" => Ok(check_change_of_variables(20, seed)),
        "decomposition_formula" => check_decomposition_formula(20, seed),
        "g_positivity" => check_g_positivity(50, seed),
        "kappa" => check_kappa(2, 11, seed),
        "ln_norm_scaling" => check_ln_norm_scaling(20, seed),
        "operator_estimates" => check_operator_estimates(&default_w_context()?, 100, seed),
        "orthogonality" => check_orthogonality(20, seed),
        "rescaling_identity" => check_rescaling_identity(20, seed),
        "scalings" => check_scalings(&cubic, &dyadic_contexts(&cubic, 2e-3, 4, 16)?, 1),
        "w_properties" => {
            let sq = NonlinearitySpec::from_taylor(&[(2, 1.0)])?;
            check_w_properties(&default_w_context()?, &sq, 8, seed)
        }
        other => Err(Error::UnknownCheck(other.to_string())),
    }
}
