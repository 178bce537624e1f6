//! Time-domain cross-check: Stormer-Verlet integration of
//! `u_tt = u_xx - f(u)` on sine coefficients, starting from the `t = 0`
//! profile of a computed solution (`u_t(0, .) = 0`), and periodicity
//! measurements.
//!
//! Fields on a lattice with `x_stride = s` are evolved in `z = s x`, where
//! the modes `sin(s b x)` become `sin(b z)` with stiffness `(s b)^2`.

use std::f64::consts::PI;

use ndarray::Array2;

use crate::critical_search::SolutionRecord;
use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::spectral_core::{SpectralField, XQuadrature};

/// Largest `step * j_max` accepted by the integrator.
pub const STABILITY_MARGIN: f64 = 0.5;
/// Default number of samples per period `2 pi / omega`.
pub const SAMPLES_PER_PERIOD: usize = 4096;
/// One-period return bar.
pub const RETURN_TOL: f64 = 1e-4;

/// Semi-discrete sine-Galerkin system in the reduced coordinate.
#[derive(Debug, Clone)]
pub struct SineSystem {
    x_stride: usize,
    modes: usize,
    f: Polynomial,
    big_f: Polynomial,
    quad: XQuadrature,
    nodes: usize,
    /// `sin(b z_k)`, row `b - 1`.
    synth: Vec<f64>,
    /// Transposed odd-part analysis, row `b - 1`.
    odd_an: Option<Vec<f64>>,
    /// Transposed even-part analysis, row `b - 1`.
    even_an: Option<Vec<f64>>,
}

fn rows(a: &Array2<f64>) -> Vec<f64> {
    a.iter().copied().collect()
}

impl SineSystem {
    pub fn new(f: &Polynomial, x_stride: usize, modes: usize) -> Result<Self> {
        if x_stride == 0 || modes == 0 {
            return Err(Error::InvalidInput("need x_stride >= 1 and at least one mode".into()));
        }
        let big_f = f.primitive();
        let quad = XQuadrature::new(big_f.degree().max(2) * modes);
        let nodes = quad.nodes().len();
        let synth = rows(&quad.synthesis(modes));
        let (odd, even) = quad.analysis(modes);
        let odd_an = f.has_odd_terms().then(|| rows(&odd.t().to_owned()));
        let even_an = f.has_even_terms().then(|| rows(&even.t().to_owned()));
        Ok(Self { x_stride, modes, f: f.clone(), big_f, quad, nodes, synth, odd_an, even_an })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn x_stride(&self) -> usize {
        self.x_stride
    }

    /// Physical wavenumber of reduced mode `b` (1-based).
    pub fn wavenumber(&self, b: usize) -> usize {
        self.x_stride * b
    }

    pub fn max_wavenumber(&self) -> usize {
        self.wavenumber(self.modes)
    }

    fn values(&self, q: &[f64]) -> Vec<f64> {
        let mut vals = vec![0.0; self.nodes];
        for (row, &c) in self.synth.chunks_exact(self.nodes).zip(q) {
            if c != 0.0 {
                vals.iter_mut().zip(row).for_each(|(v, s)| *v += c * s);
            }
        }
        vals
    }

    fn analyze(&self, an: &[f64], samples: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(an.chunks_exact(self.nodes)) {
            *o += row.iter().zip(samples).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    /// Acceleration `-j^2 q_j - f(u)_j`.
    pub fn acceleration(&self, q: &[f64]) -> Vec<f64> {
        let vals = self.values(q);
        let (odd, even): (Vec<f64>, Vec<f64>) = vals.iter().map(|&u| self.f.eval_parts(u)).unzip();
        let mut c = vec![0.0; self.modes];
        if let Some(an) = &self.odd_an {
            self.analyze(an, &odd, &mut c);
        }
        if let Some(an) = &self.even_an {
            self.analyze(an, &even, &mut c);
        }
        (0..self.modes)
            .map(|i| {
                let j = self.wavenumber(i + 1) as f64;
                -j * j * q[i] - c[i]
            })
            .collect()
    }

    /// `int_0^pi u_t^2 / 2 + u_x^2 / 2 + F(u) dx`.
    pub fn energy(&self, q: &[f64], p: &[f64]) -> f64 {
        let quad: f64 = (0..self.modes)
            .map(|i| {
                let j = self.wavenumber(i + 1) as f64;
                p[i] * p[i] + j * j * q[i] * q[i]
            })
            .sum();
        let vals = self.values(q);
        let (odd, even): (Vec<f64>, Vec<f64>) = vals.iter().map(|&u| self.big_f.eval_parts(u)).unzip();
        0.25 * PI * quad + self.quad.integrate_parts(&odd, &even)
    }
}

/// Position and velocity coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl State {
    /// At rest with the given positions.
    pub fn at_rest(q: Vec<f64>) -> Self {
        let p = vec![0.0; q.len()];
        Self { q, p }
    }
}

/// Integration parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig {
    /// Sampling step in physical time.
    pub dt: f64,
    /// Integrator substeps per sampling step.
    pub substeps: usize,
    /// Reduced spatial modes.
    pub modes: usize,
    /// Span in periods `2 pi / omega`.
    pub periods: usize,
}

impl EvolutionConfig {
    /// `dt = (2 pi / omega) / 4096` and `4 L_x` modes, with enough substeps
    /// for the stability margin and at least `t_stride` of them.
    pub fn for_record(record: &SolutionRecord, periods: usize) -> Self {
        let dt = 2.0 * PI / record.omega / SAMPLES_PER_PERIOD as f64;
        let modes = 4 * record.u.lx();
        let j_max = (record.lattice.x_stride * modes) as f64;
        let substeps = ((dt * j_max / STABILITY_MARGIN).ceil() as usize).max(record.lattice.t_stride).max(1);
        Self { dt, substeps, modes, periods }
    }

    pub fn step(&self) -> f64 {
        self.dt / self.substeps as f64
    }
}

fn check_stability(system: &SineSystem, h: f64) -> Result<()> {
    let r = h.abs() * system.max_wavenumber() as f64;
    if r > STABILITY_MARGIN {
        return Err(Error::Instability(r));
    }
    Ok(())
}

fn blown_up(q: &[f64], limit: f64) -> Option<f64> {
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    (!n.is_finite() || n > limit).then_some(n)
}

/// `steps` velocity-Verlet steps of size `h` (negative `h` runs backward).
pub fn verlet(system: &SineSystem, state: &State, h: f64, steps: usize) -> Result<State> {
    check_stability(system, h)?;
    let limit = 1e6 * (1.0 + norm(&state.q) + norm(&state.p));
    let mut q = state.q.clone();
    let mut p = state.p.clone();
    let mut a = system.acceleration(&q);
    for _ in 0..steps {
        for i in 0..q.len() {
            p[i] += 0.5 * h * a[i];
            q[i] += h * p[i];
        }
        a = system.acceleration(&q);
        for i in 0..q.len() {
            p[i] += 0.5 * h * a[i];
        }
        if let Some(n) = blown_up(&q, limit) {
            return Err(Error::Instability(n));
        }
    }
    Ok(State { q, p })
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// States sampled every `record_every` steps, including the start.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub energies: Vec<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// `(max - min) / |E(0)|` over the samples.
    pub fn energy_drift(&self) -> f64 {
        let (lo, hi) = self
            .energies
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &e| (a.min(e), b.max(e)));
        let e0 = self.energies[0].abs();
        if e0 > 0.0 {
            (hi - lo) / e0
        } else {
            hi - lo
        }
    }
}

/// Integrate from rest at `q0` with step `h`.
pub fn integrate(
    system: &SineSystem,
    q0: &[f64],
    h: f64,
    steps: usize,
    record_every: usize,
) -> Result<Trajectory> {
    if q0.len() != system.modes() {
        return Err(Error::DimensionMismatch(format!("{} modes vs {}", q0.len(), system.modes())));
    }
    let every = record_every.max(1);
    let mut state = State::at_rest(q0.to_vec());
    let mut out = Trajectory {
        times: vec![0.0],
        energies: vec![system.energy(&state.q, &state.p)],
        states: vec![state.clone()],
    };
    let mut done = 0;
    while done < steps {
        let k = every.min(steps - done);
        state = verlet(system, &state, h, k)?;
        done += k;
        out.times.push(done as f64 * h);
        out.energies.push(system.energy(&state.q, &state.p));
        out.states.push(state.clone());
    }
    Ok(out)
}

/// Reduced sine coefficients of `u(0, .)`, padded to `modes`.
pub fn initial_profile(u: &SpectralField, modes: usize) -> Vec<f64> {
    let mut q = vec![0.0; modes];
    for ((_, b), &c) in u.coeffs().indexed_iter() {
        if b < modes {
            q[b] += c;
        }
    }
    q
}

/// Relative `L^2` distance of positions.
pub fn relative_distance(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let n = norm(b);
    if n > 0.0 {
        d / n
    } else {
        d
    }
}

/// Periodicity measurements of one record.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnReport {
    pub config: EvolutionConfig,
    /// Return errors after `1..=periods` periods `2 pi / omega`.
    pub period_errors: Vec<f64>,
    /// Return error after the minimal period `2 pi / (n omega)`.
    pub minimal_period_error: f64,
    /// Time `2 pi / ((n + 1) omega)` of the non-return check.
    pub witness_time: f64,
    pub witness_error: f64,
    pub energy_drift: f64,
}

impl ReturnReport {
    pub fn one_period(&self) -> f64 {
        self.period_errors.first().copied().unwrap_or(f64::NAN)
    }

    pub fn returns(&self, tol: f64) -> bool {
        self.period_errors.iter().all(|&e| e <= tol) && self.minimal_period_error <= tol
    }

    pub fn witnesses_minimality(&self, tol: f64) -> bool {
        self.witness_error >= 10.0 * tol
    }
}

/// Position at time `tau`, stepping with the largest `h' <= h` dividing it.
fn position_at(system: &SineSystem, q0: &[f64], h: f64, tau: f64) -> Result<Vec<f64>> {
    let steps = (tau / h).ceil().max(1.0) as usize;
    Ok(verlet(system, &State::at_rest(q0.to_vec()), tau / steps as f64, steps)?.q)
}

/// Return errors of an accepted record over `periods` periods, at the
/// minimal period, and at the non-return witness `2 pi / ((n + 1) omega)`.
pub fn return_error(record: &SolutionRecord, config: &EvolutionConfig) -> Result<ReturnReport> {
    if !record.accepted {
        return Err(Error::InvalidInput("record is not accepted".into()));
    }
    let f = record.nonlinearity()?;
    let system = SineSystem::new(f.polynomial(), record.lattice.x_stride, config.modes)?;
    let q0 = initial_profile(&record.u, config.modes);
    let h = config.step();
    let samples = (2.0 * PI / record.omega / config.dt).round().max(1.0) as usize;
    let steps_per_period = samples * config.substeps;
    let traj = integrate(&system, &q0, h, steps_per_period * config.periods.max(1), steps_per_period)?;
    let period_errors = (1..=config.periods.max(1))
        .map(|k| {
            relative_distance(&traj.states[k].q, &q0)
        })
        .collect();
    let minimal = 2.0 * PI / (record.n as f64 * record.omega);
    let minimal_period_error = relative_distance(&position_at(&system, &q0, h, minimal)?, &q0);
    let witness_time = 2.0 * PI / ((record.n + 1) as f64 * record.omega);
    let witness_error = relative_distance(&position_at(&system, &q0, h, witness_time)?, &q0);
    Ok(ReturnReport {
        config: *config,
        period_errors,
        minimal_period_error,
        witness_time,
        witness_error,
        energy_drift: traj.energy_drift(),
    })
}
