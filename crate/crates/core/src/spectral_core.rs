//! Discrete function space on the strip `(R/2piZ) x (0, pi)`.
//!
//! Fields are stored as coefficients of `cos(l t) sin(j x)`. A field may live
//! on a sub-lattice of modes (`l = t_stride * a`, `j = x_stride * b`); the
//! stored table is then indexed by the reduced pair `(a, b)`. All pointwise
//! work happens in reduced coordinates, which leaves integrals over the strip
//! unchanged.
//!
//! Quadrature is exact for trigonometric polynomials of the declared degree.
//! In `t` the field is even, so only the half period is sampled. In `x` the
//! integrand is split into its odd and even parts under `x -> -x`; the odd
//! part goes through a discrete sine transform and the even part through a
//! discrete cosine transform followed by the exact cosine-to-sine conversion
//! on `(0, pi)`.

use std::f64::consts::PI;

use ndarray::{s, Array1, Array2, Zip};

use crate::error::{Error, Result};
use crate::kernel_space::KernelVector;
use crate::poly::Polynomial;
use crate::reduced_functional::NonlinearitySpec;

/// Mode lattice of a field: physical mode `(t_stride * a, x_stride * b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lattice {
    pub t_stride: usize,
    pub x_stride: usize,
}

impl Lattice {
    pub const UNIT: Lattice = Lattice {
        t_stride: 1,
        x_stride: 1,
    };

    pub fn new(t_stride: usize, x_stride: usize) -> Result<Self> {
        if t_stride == 0 || x_stride == 0 {
            return Err(Error::InvalidInput("lattice strides must be >= 1".into()));
        }
        Ok(Self { t_stride, x_stride })
    }

    pub fn l(&self, a: usize) -> usize {
        self.t_stride * a
    }

    pub fn j(&self, b: usize) -> usize {
        self.x_stride * b
    }

    pub fn on_diagonal(&self, a: usize, b: usize) -> bool {
        self.t_stride * a == self.x_stride * b
    }

    /// Physical spacing of diagonal modes (`lcm` of the strides).
    pub fn kernel_stride(&self) -> usize {
        self.t_stride / gcd(self.t_stride, self.x_stride) * self.x_stride
    }

    /// Reduced position `(a, b)` of the `k`-th diagonal mode.
    pub fn diagonal_position(&self, k: usize) -> (usize, usize) {
        let g = self.kernel_stride();
        (k * g / self.t_stride, k * g / self.x_stride)
    }
}

pub(crate) fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Coefficient table `u[(a, b - 1)]` of `cos(l t) sin(j x)` on a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    coeffs: Array2<f64>,
    lattice: Lattice,
}

impl SpectralField {
    /// Zero field with `a in 0..=lt`, `b in 1..=lx` on the unit lattice.
    pub fn zeros(lt: usize, lx: usize) -> Self {
        Self::zeros_on(lt, lx, Lattice::UNIT)
    }

    pub fn zeros_on(lt: usize, lx: usize, lattice: Lattice) -> Self {
        Self {
            coeffs: Array2::zeros((lt + 1, lx.max(1))),
            lattice,
        }
    }

    pub fn from_coeffs(coeffs: Array2<f64>) -> Result<Self> {
        Self::from_coeffs_on(coeffs, Lattice::UNIT)
    }

    pub fn from_coeffs_on(coeffs: Array2<f64>, lattice: Lattice) -> Result<Self> {
        if coeffs.nrows() < 2 || coeffs.ncols() < 1 {
            return Err(Error::InvalidInput(
                "need L_t >= 1 and L_x >= 1".to_string(),
            ));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        Ok(Self { coeffs, lattice })
    }

    /// Field from rows `a = 0..=lt` of coefficients `b = 1..=lx`.
    pub fn from_rows(rows: &[Vec<f64>], lattice: Lattice) -> Result<Self> {
        let lx = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != lx) {
            return Err(Error::DimensionMismatch("ragged coefficient rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let coeffs = Array2::from_shape_vec((rows.len(), lx), flat)
            .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
        Self::from_coeffs_on(coeffs, lattice)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.coeffs.rows().into_iter().map(|r| r.to_vec()).collect()
    }

    /// Single mode `c cos(l t) sin(j x)` on the unit lattice.
    pub fn mode(lt: usize, lx: usize, l: usize, j: usize, c: f64) -> Self {
        let mut u = Self::zeros(lt, lx);
        u.set(l, j, c);
        u
    }

    pub fn lt(&self) -> usize {
        self.coeffs.nrows() - 1
    }

    pub fn lx(&self) -> usize {
        self.coeffs.ncols()
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn coeffs(&self) -> &Array2<f64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut Array2<f64> {
        &mut self.coeffs
    }

    /// Coefficient at reduced index `(a, b)`, `b >= 1`; zero outside the table.
    pub fn get(&self, a: usize, b: usize) -> f64 {
        if b == 0 || a > self.lt() || b > self.lx() {
            0.0
        } else {
            self.coeffs[(a, b - 1)]
        }
    }

    pub fn set(&mut self, a: usize, b: usize, c: f64) {
        self.coeffs[(a, b - 1)] = c;
    }

    /// Coefficient of the physical mode `cos(l t) sin(j x)`.
    pub fn physical(&self, l: usize, j: usize) -> f64 {
        let la = self.lattice;
        if l % la.t_stride != 0 || j % la.x_stride != 0 {
            return 0.0;
        }
        self.get(l / la.t_stride, j / la.x_stride)
    }

    /// Copy truncated or zero-padded to the reduced shape `(lt, lx)`.
    pub fn resized(&self, lt: usize, lx: usize) -> Self {
        let mut out = Self::zeros_on(lt, lx, self.lattice);
        let a = lt.min(self.lt()) + 1;
        let b = lx.min(self.lx());
        out.coeffs
            .slice_mut(s![..a, ..b])
            .assign(&self.coeffs.slice(s![..a, ..b]));
        out
    }

    /// The same function on the unit lattice.
    pub fn to_unit_lattice(&self) -> Self {
        let la = self.lattice;
        let mut out = Self::zeros(la.l(self.lt()), la.j(self.lx()));
        for ((a, b), &c) in self.coeffs.indexed_iter() {
            out.coeffs[(la.l(a), la.j(b + 1) - 1)] = c;
        }
        out
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.lattice != other.lattice || self.coeffs.dim() != other.coeffs.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{:?} on {:?} vs {:?} on {:?}",
                self.coeffs.dim(),
                self.lattice,
                other.coeffs.dim(),
                other.lattice
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            coeffs: &self.coeffs + &other.coeffs,
            lattice: self.lattice,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            coeffs: &self.coeffs - &other.coeffs,
            lattice: self.lattice,
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            coeffs: &self.coeffs * s,
            lattice: self.lattice,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Largest absolute coefficient on the diagonal `l = j`.
    pub fn diagonal_max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for ((a, b), &c) in self.coeffs.indexed_iter() {
            if self.lattice.on_diagonal(a, b + 1) {
                m = m.max(c.abs());
            }
        }
        m
    }

    /// Point value `sum u cos(l t) sin(j x)`.
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        let la = self.lattice;
        let mut acc = 0.0;
        for a in 0..=self.lt() {
            let ct = (la.l(a) as f64 * t).cos();
            let mut row = 0.0;
            for b in 1..=self.lx() {
                row += self.coeffs[(a, b - 1)] * (la.j(b) as f64 * x).sin();
            }
            acc += ct * row;
        }
        acc
    }

    /// The field `u(t + pi, pi - x)`.
    pub fn shifted_reflected(&self) -> Self {
        let la = self.lattice;
        let mut out = self.clone();
        for ((a, b), c) in out.coeffs.indexed_iter_mut() {
            if (la.l(a) + la.j(b + 1) + 1) % 2 == 1 {
                *c = -*c;
            }
        }
        out
    }

    /// Set of physical temporal modes carrying a nonzero coefficient.
    pub fn temporal_support(&self) -> Vec<usize> {
        (0..=self.lt())
            .filter(|&a| self.coeffs.row(a).iter().any(|&c| c != 0.0))
            .map(|a| self.lattice.l(a))
            .collect()
    }
}

/// Parseval weight of temporal mode `l`.
pub fn parseval_weight(l: usize) -> f64 {
    if l == 0 {
        2.0
    } else {
        1.0
    }
}

fn next_pow2(n: usize) -> usize {
    n.max(2).next_power_of_two()
}

/// Half-period sample set in `t` for even functions.
#[derive(Debug, Clone)]
struct TimeNodes {
    nt: usize,
    t: Vec<f64>,
}

impl TimeNodes {
    fn new(nt: usize) -> Self {
        let m = nt / 2;
        let t = (0..=m).map(|i| 2.0 * PI * i as f64 / nt as f64).collect();
        Self { nt, t }
    }

    fn weight(&self, m: usize) -> f64 {
        if m == 0 || m == self.t.len() - 1 {
            1.0
        } else {
            2.0
        }
    }

    fn synthesis(&self, lt: usize) -> Array2<f64> {
        Array2::from_shape_fn((self.t.len(), lt + 1), |(m, a)| (a as f64 * self.t[m]).cos())
    }

    fn analysis(&self, lt_out: usize) -> Array2<f64> {
        let nt = self.nt as f64;
        Array2::from_shape_fn((lt_out + 1, self.t.len()), |(a, m)| {
            let c = if a == 0 { 1.0 } else { 2.0 };
            c / nt * self.weight(m) * (a as f64 * self.t[m]).cos()
        })
    }

    /// Weights with `sum w_m g(t_m) = int_0^{2 pi} g dt`.
    fn integral_weights(&self) -> Array1<f64> {
        let nt = self.nt as f64;
        Array1::from_shape_fn(self.t.len(), |m| 2.0 * PI * self.weight(m) / nt)
    }
}

/// Sine/cosine collocation on `x_k = k pi / (n + 1)`, `k = 0..=n+1`.
#[derive(Debug, Clone)]
pub struct XQuadrature {
    n: usize,
    x: Vec<f64>,
    odd_w: Array1<f64>,
    even_w: Array1<f64>,
}

impl XQuadrature {
    /// Exact for odd parts of sine degree `<= dx` and even parts of cosine
    /// degree `<= dx`.
    pub fn new(dx: usize) -> Self {
        Self::with_interior(dx + 1)
    }

    pub fn with_interior(n: usize) -> Self {
        let h = PI / (n + 1) as f64;
        let x: Vec<f64> = (0..n + 2).map(|k| k as f64 * h).collect();
        let scale = 2.0 / (n + 1) as f64;
        let mut odd_w = Array1::zeros(n + 2);
        for k in 1..=n {
            let mut acc = 0.0;
            for j in (1..=n).step_by(2) {
                acc += 2.0 / j as f64 * (j as f64 * x[k]).sin();
            }
            odd_w[k] = scale * acc;
        }
        let even_w = Array1::from_shape_fn(n + 2, |k| {
            let e = if k == 0 || k == n + 1 { 0.5 } else { 1.0 };
            PI * e / (n + 1) as f64
        });
        Self { n, x, odd_w, even_w }
    }

    pub fn interior(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    /// `S[b - 1, k] = sin(b x_k)`.
    pub fn synthesis(&self, lx: usize) -> Array2<f64> {
        Array2::from_shape_fn((lx, self.n + 2), |(b, k)| ((b + 1) as f64 * self.x[k]).sin())
    }

    /// `S'[b - 1, k] = b cos(b x_k)`, values of `d/dx` of the sine modes.
    pub fn derivative_synthesis(&self, lx: usize) -> Array2<f64> {
        Array2::from_shape_fn((lx, self.n + 2), |(b, k)| {
            let bb = (b + 1) as f64;
            bb * (bb * self.x[k]).cos()
        })
    }

    /// Matrices mapping odd-part and even-part samples to the sine
    /// coefficients `1..=lx_out` on `(0, pi)`.
    pub fn analysis(&self, lx_out: usize) -> (Array2<f64>, Array2<f64>) {
        let n = self.n;
        let np1 = (n + 1) as f64;
        let mut odd = Array2::zeros((n + 2, lx_out));
        for k in 1..=n {
            for j in 1..=lx_out.min(n) {
                odd[(k, j - 1)] = 2.0 / np1 * (j as f64 * self.x[k]).sin();
            }
        }
        let dmax = n - 1;
        let dct = Array2::from_shape_fn((n + 2, dmax + 1), |(k, m)| {
            let e = if k == 0 || k == n + 1 { 0.5 } else { 1.0 };
            let c = if m == 0 { 1.0 } else { 2.0 };
            c / np1 * e * (m as f64 * self.x[k]).cos()
        });
        let conv = Array2::from_shape_fn((dmax + 1, lx_out), |(m, jb)| {
            let j = jb + 1;
            if (m + j) % 2 == 1 {
                let jf = j as f64;
                let mf = m as f64;
                2.0 / PI * 2.0 * jf / (jf * jf - mf * mf)
            } else {
                0.0
            }
        });
        (odd, dct.dot(&conv))
    }

    /// `int_0^pi` of a function given by its odd and even parts at the nodes.
    pub fn integrate_parts(&self, odd: &[f64], even: &[f64]) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.n + 2 {
            acc += self.odd_w[k] * odd[k] + self.even_w[k] * even[k];
        }
        acc
    }

    pub(crate) fn odd_weights(&self) -> &Array1<f64> {
        &self.odd_w
    }

    pub(crate) fn even_weights(&self) -> &Array1<f64> {
        &self.even_w
    }
}

/// Sample grid on the strip: `nt` full-period samples in `t` (even fields
/// are sampled on the half period `0..=nt/2`) and `nx` interior nodes in
/// `x` plus the two boundary nodes.
#[derive(Debug, Clone)]
pub struct PhysicalGrid {
    time: TimeNodes,
    space: XQuadrature,
}

impl PhysicalGrid {
    pub fn new(nt: usize, nx: usize) -> Result<Self> {
        if nt < 2 || nt % 2 != 0 || nx < 1 {
            return Err(Error::InvalidInput(format!(
                "grid needs even nt >= 2 and nx >= 1, got ({nt}, {nx})"
            )));
        }
        Ok(Self {
            time: TimeNodes::new(nt),
            space: XQuadrature::with_interior(nx),
        })
    }

    /// Grid integrating trigonometric integrands of degree `(dt, dx)` exactly.
    pub fn for_degree(dt: usize, dx: usize) -> Self {
        Self {
            time: TimeNodes::new(next_pow2(2 * dt + 1)),
            space: XQuadrature::new(dx),
        }
    }

    pub fn nt(&self) -> usize {
        self.time.nt
    }

    pub fn nx(&self) -> usize {
        self.space.n
    }

    /// Half-period time nodes `2 pi m / nt`, `m = 0..=nt/2`.
    pub fn t_nodes(&self) -> &[f64] {
        &self.time.t
    }

    /// Space nodes including both boundary points.
    pub fn x_nodes(&self) -> &[f64] {
        &self.space.x
    }
}

/// Point values of `field` on the grid (rows: time nodes, columns: space nodes).
pub fn synthesize(field: &SpectralField, grid: &PhysicalGrid) -> Result<Array2<f64>> {
    if grid.nt() < 2 * field.lt() + 1 || grid.nx() < field.lx() {
        return Err(Error::Resolution(format!(
            "field ({}, {}) on grid ({}, {})",
            field.lt(),
            field.lx(),
            grid.nt(),
            grid.nx()
        )));
    }
    let la = field.lattice();
    let ct = Array2::from_shape_fn((grid.time.t.len(), field.lt() + 1), |(m, a)| {
        (la.l(a) as f64 * grid.time.t[m]).cos()
    });
    let sx = Array2::from_shape_fn((field.lx(), grid.space.n + 2), |(b, k)| {
        (la.j(b + 1) as f64 * grid.space.x[k]).sin()
    });
    Ok(ct.dot(field.coeffs()).dot(&sx))
}

/// Inverse of [`synthesize`] for trigonometric polynomials resolved by the grid.
pub fn analyze(
    samples: &Array2<f64>,
    grid: &PhysicalGrid,
    lt: usize,
    lx: usize,
) -> Result<SpectralField> {
    if samples.dim() != (grid.time.t.len(), grid.space.n + 2) {
        return Err(Error::DimensionMismatch(format!(
            "samples {:?} vs grid ({}, {})",
            samples.dim(),
            grid.time.t.len(),
            grid.space.n + 2
        )));
    }
    if grid.nt() < 2 * lt + 1 || grid.nx() < lx {
        return Err(Error::Resolution(format!(
            "target ({lt}, {lx}) on grid ({}, {})",
            grid.nt(),
            grid.nx()
        )));
    }
    let at = grid.time.analysis(lt);
    let (ax, _) = grid.space.analysis(lx);
    SpectralField::from_coeffs(at.dot(samples).dot(&ax))
}

/// Cached exact transforms between a coefficient shape and a collocation
/// grid sized for integrands of given trigonometric degree.
#[derive(Debug, Clone)]
pub struct Projector {
    lt_in: usize,
    lx_in: usize,
    lt_out: usize,
    lx_out: usize,
    syn_t: Array2<f64>,
    syn_x: Array2<f64>,
    ana_t: Array2<f64>,
    ana_x_odd: Array2<f64>,
    ana_x_even: Array2<f64>,
    wt: Array1<f64>,
    space: XQuadrature,
}

impl Projector {
    /// Input shape `(lt_in, lx_in)`, output shape `(lt_out, lx_out)`, and
    /// integrand degrees `(dt, dx)` in reduced coordinates.
    pub fn new(
        (lt_in, lx_in): (usize, usize),
        (lt_out, lx_out): (usize, usize),
        (dt, dx): (usize, usize),
    ) -> Self {
        let time = TimeNodes::new(next_pow2((2 * dt + 1).max(dt + lt_out + 1)));
        let space = XQuadrature::new(dx.max(1));
        let (ana_x_odd, ana_x_even) = space.analysis(lx_out);
        Self {
            lt_in,
            lx_in,
            lt_out,
            lx_out,
            syn_t: time.synthesis(lt_in),
            syn_x: space.synthesis(lx_in),
            ana_t: time.analysis(lt_out),
            ana_x_odd,
            ana_x_even,
            wt: time.integral_weights(),
            space,
        }
    }

    /// Projector for `g(u)` with `deg g = r` and `u` of shape `input`.
    pub fn for_polynomial(input: (usize, usize), output: (usize, usize), r: usize) -> Self {
        let r = r.max(1);
        Self::new(input, output, (r * input.0, r * input.1))
    }

    pub fn input_shape(&self) -> (usize, usize) {
        (self.lt_in, self.lx_in)
    }

    pub fn output_shape(&self) -> (usize, usize) {
        (self.lt_out, self.lx_out)
    }

    /// Point values of `u` on the internal grid.
    pub fn values(&self, u: &SpectralField) -> Result<Array2<f64>> {
        if u.lt() > self.lt_in || u.lx() > self.lx_in {
            return Err(Error::Resolution(format!(
                "field ({}, {}) exceeds projector input ({}, {})",
                u.lt(),
                u.lx(),
                self.lt_in,
                self.lx_in
            )));
        }
        let ct = self.syn_t.slice(s![.., ..=u.lt()]);
        let sx = self.syn_x.slice(s![..u.lx(), ..]);
        Ok(ct.dot(u.coeffs()).dot(&sx))
    }

    /// Values of `d u / d x` on the internal grid, in reduced coordinates.
    pub fn x_derivative_values(&self, u: &SpectralField) -> Result<Array2<f64>> {
        let _ = self.values(u)?;
        let ct = self.syn_t.slice(s![.., ..=u.lt()]);
        let dx = self.space.derivative_synthesis(u.lx());
        Ok(ct.dot(u.coeffs()).dot(&dx))
    }

    /// Sine coefficients of the function whose odd part (in `x`) is `odd`
    /// and whose even part is `even`.
    pub fn analyze_parts(
        &self,
        odd: &Array2<f64>,
        even: Option<&Array2<f64>>,
        lattice: Lattice,
    ) -> SpectralField {
        let mut inner = odd.dot(&self.ana_x_odd);
        if let Some(e) = even {
            inner = inner + e.dot(&self.ana_x_even);
        }
        SpectralField {
            coeffs: self.ana_t.dot(&inner),
            lattice,
        }
    }

    /// `int_Omega` of the function with the given odd and even parts.
    pub fn integrate_parts(&self, odd: Option<&Array2<f64>>, even: Option<&Array2<f64>>) -> f64 {
        let mut acc = 0.0;
        if let Some(o) = odd {
            acc += self.wt.dot(&o.dot(self.space.odd_weights()));
        }
        if let Some(e) = even {
            acc += self.wt.dot(&e.dot(self.space.even_weights()));
        }
        acc
    }

    /// Coefficients of `g(u)`.
    pub fn apply(&self, u: &SpectralField, g: &Polynomial) -> Result<SpectralField> {
        let vals = self.values(u)?;
        let (odd, even) = split_parts(&vals, g);
        Ok(self.analyze_parts(&odd, even.as_ref(), u.lattice()))
    }

    /// Coefficients of `g(u) h`.
    pub fn apply_product(
        &self,
        u: &SpectralField,
        g: &Polynomial,
        h: &SpectralField,
    ) -> Result<SpectralField> {
        let uv = self.values(u)?;
        let hv = self.values(h)?;
        let (go, ge) = split_parts(&uv, g);
        // odd powers of u times the odd factor h are even in x
        let odd = match ge {
            Some(ge) => ge * &hv,
            None => Array2::zeros(hv.dim()),
        };
        let even = if g.has_odd_terms() {
            Some(go * &hv)
        } else {
            None
        };
        Ok(self.analyze_parts(&odd, even.as_ref(), u.lattice()))
    }

    /// `int_Omega g(u)`.
    pub fn integrate(&self, u: &SpectralField, g: &Polynomial) -> Result<f64> {
        let vals = self.values(u)?;
        let (odd, even) = split_parts(&vals, g);
        Ok(self.integrate_parts(Some(&odd), even.as_ref()))
    }
}

/// Odd-power and even-power parts of `g` evaluated on `vals`; the even part
/// is `None` when `g` has no even terms.
pub(crate) fn split_parts(vals: &Array2<f64>, g: &Polynomial) -> (Array2<f64>, Option<Array2<f64>>) {
    let mut odd = Array2::zeros(vals.dim());
    if g.has_even_terms() {
        let mut even = Array2::zeros(vals.dim());
        Zip::from(&mut odd)
            .and(&mut even)
            .and(vals)
            .for_each(|o, e, &u| {
                let (a, b) = g.eval_parts(u);
                *o = a;
                *e = b;
            });
        (odd, Some(even))
    } else {
        Zip::from(&mut odd).and(vals).for_each(|o, &u| {
            *o = g.eval_parts(u).0;
        });
        (odd, None)
    }
}

/// Coefficients of `f(u)` up to reduced order `out = (lt, lx)`, free of aliasing.
pub fn apply_nonlinearity(
    u: &SpectralField,
    f: &NonlinearitySpec,
    out: (usize, usize),
) -> Result<SpectralField> {
    let g = f.polynomial();
    if u.lattice().x_stride > 1 && g.has_even_terms() {
        return Err(Error::InvalidInput(
            "even powers leave an x-strided lattice".into(),
        ));
    }
    let proj = Projector::for_polynomial((u.lt(), u.lx()), out, g.degree());
    proj.apply(u, g)
}

/// Norms of a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormBundle {
    pub h1: f64,
    pub l2: f64,
    /// Maximum over a twice-oversampled grid (a lower bound of the true sup).
    pub sup: f64,
    /// `sup + |omega - 1|^{1/2} h1`.
    pub omega: f64,
}

/// `int_Omega u w`.
pub fn inner_l2(u: &SpectralField, w: &SpectralField) -> Result<f64> {
    weighted_inner(u, w, |_, _| 1.0)
}

/// `int_Omega u_t w_t + u_x w_x`.
pub fn inner_h1(u: &SpectralField, w: &SpectralField) -> Result<f64> {
    weighted_inner(u, w, |l, j| (l * l + j * j) as f64)
}

fn weighted_inner(
    u: &SpectralField,
    w: &SpectralField,
    weight: impl Fn(usize, usize) -> f64,
) -> Result<f64> {
    if u.lattice() != w.lattice() {
        return Err(Error::DimensionMismatch("fields on different lattices".into()));
    }
    let la = u.lattice();
    let lt = u.lt().min(w.lt());
    let lx = u.lx().min(w.lx());
    let mut acc = 0.0;
    for a in 0..=lt {
        let l = la.l(a);
        let c = parseval_weight(l);
        for b in 1..=lx {
            acc += c * weight(l, la.j(b)) * u.get(a, b) * w.get(a, b);
        }
    }
    Ok(0.5 * PI * PI * acc)
}

pub fn h1_norm(u: &SpectralField) -> f64 {
    inner_h1(u, u).unwrap_or(0.0).sqrt()
}

pub fn l2_norm(u: &SpectralField) -> f64 {
    inner_l2(u, u).unwrap_or(0.0).sqrt()
}

/// Maximum of `|u|` on a twice-oversampled grid.
pub fn sup_norm(u: &SpectralField) -> f64 {
    let nt = 2 * (2 * u.lt() + 1);
    let m = nt / 2;
    let nx = 2 * (u.lx() + 1);
    let ct = Array2::from_shape_fn((m + 1, u.lt() + 1), |(i, a)| {
        (a as f64 * 2.0 * PI * i as f64 / nt as f64).cos()
    });
    let sx = Array2::from_shape_fn((u.lx(), nx), |(b, k)| {
        ((b + 1) as f64 * PI * (k + 1) as f64 / (nx + 1) as f64).sin()
    });
    ct.dot(u.coeffs())
        .dot(&sx)
        .iter()
        .fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

pub fn norms(u: &SpectralField, omega: f64) -> NormBundle {
    let h1 = h1_norm(u);
    let sup = sup_norm(u);
    NormBundle {
        h1,
        l2: l2_norm(u),
        sup,
        omega: sup + (omega - 1.0).abs().sqrt() * h1,
    }
}

/// `|u|_omega`.
pub fn omega_norm(u: &SpectralField, omega: f64) -> f64 {
    sup_norm(u) + (omega - 1.0).abs().sqrt() * h1_norm(u)
}

/// Diagonal part `xi_j = u_{jj}` on the physical index `j = 1..`.
pub fn project_v(u: &SpectralField) -> KernelVector {
    let la = u.lattice();
    let g = la.kernel_stride();
    let mut kmax = 0;
    while {
        let (a, b) = la.diagonal_position(kmax + 1);
        a <= u.lt() && b <= u.lx()
    } {
        kmax += 1;
    }
    let mut xi = vec![0.0; kmax * g];
    for k in 1..=kmax {
        let (a, b) = la.diagonal_position(k);
        xi[k * g - 1] = u.get(a, b);
    }
    KernelVector::new(xi)
}

/// Off-diagonal part.
pub fn project_w(u: &SpectralField) -> SpectralField {
    let la = u.lattice();
    let mut out = u.clone();
    for ((a, b), c) in out.coeffs.indexed_iter_mut() {
        if la.on_diagonal(a, b + 1) {
            *c = 0.0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel_space::embed;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(lt: usize, lx: usize, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = Array2::from_shape_fn((lt + 1, lx), |_| rng.gen_range(-1.0..1.0));
        SpectralField::from_coeffs(c).unwrap()
    }

    /// Midpoint-free reference: composite Gauss-Legendre in x, trapezoid in t.
    fn brute_integral(g: impl Fn(f64, f64) -> f64) -> f64 {
        let (xs, ws) = crate::quadrature::gauss_legendre(40);
        let panels = 8;
        let nt = 256;
        let mut acc = 0.0;
        for m in 0..nt {
            let t = 2.0 * PI * m as f64 / nt as f64;
            for p in 0..panels {
                let a = PI * p as f64 / panels as f64;
                let h = PI / panels as f64;
                for (x, w) in xs.iter().zip(&ws) {
                    let xx = a + 0.5 * h * (x + 1.0);
                    acc += 2.0 * PI / nt as f64 * 0.5 * h * w * g(t, xx);
                }
            }
        }
        acc
    }

    #[test]
    fn synthesize_zero_and_unit_mode() {
        let grid = PhysicalGrid::for_degree(4, 4);
        let z = synthesize(&SpectralField::zeros(2, 2), &grid).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
        let u = SpectralField::mode(1, 1, 1, 1, 1.0);
        assert!((u.eval(0.0, PI / 2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn analyze_single_modes() {
        let grid = PhysicalGrid::for_degree(8, 8);
        let samples = Array2::from_shape_fn((grid.t_nodes().len(), grid.x_nodes().len()), |(m, k)| {
            (2.0 * grid.t_nodes()[m]).cos() * grid.x_nodes()[k].sin()
        });
        let u = analyze(&samples, &grid, 4, 4).unwrap();
        for ((a, b), &c) in u.coeffs().indexed_iter() {
            let want = if (a, b) == (2, 0) { 1.0 } else { 0.0 };
            assert!((c - want).abs() < 1e-14);
        }
        let samples = Array2::from_shape_fn((grid.t_nodes().len(), grid.x_nodes().len()), |(_, k)| {
            (3.0 * grid.x_nodes()[k]).sin()
        });
        let u = analyze(&samples, &grid, 4, 4).unwrap();
        assert!((u.get(0, 3) - 1.0).abs() < 1e-14);
        assert!(u.max_abs() - 1.0 < 1e-14);
    }

    #[test]
    fn round_trip_degree_six_and_eight() {
        for (deg, seed) in [(6, 1), (8, 2)] {
            let u = random_field(deg, deg, seed);
            let grid = PhysicalGrid::for_degree(deg, deg);
            let back = analyze(&synthesize(&u, &grid).unwrap(), &grid, deg, deg).unwrap();
            assert!(back.sub(&u).unwrap().max_abs() <= 1e-13);
        }
    }

    #[test]
    fn synthesize_rejects_coarse_grid() {
        let grid = PhysicalGrid::new(4, 2).unwrap();
        assert!(matches!(
            synthesize(&random_field(4, 4, 0), &grid),
            Err(Error::Resolution(_))
        ));
        let bad = Array2::zeros((2, 2));
        assert!(matches!(
            analyze(&bad, &grid, 1, 1),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn cube_of_sin_matches_closed_form() {
        let f = NonlinearitySpec::from_taylor(&[(3, 1.0)]).unwrap();
        let u = SpectralField::mode(0, 1, 0, 1, 1.0);
        let c = apply_nonlinearity(&u, &f, (0, 5)).unwrap();
        assert!((c.get(0, 1) - 0.75).abs() < 1e-14);
        assert!((c.get(0, 3) + 0.25).abs() < 1e-14);
        assert!(c.get(0, 2).abs() < 1e-14 && c.get(0, 5).abs() < 1e-14);
        let z = apply_nonlinearity(&SpectralField::zeros(2, 2), &f, (4, 4)).unwrap();
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn square_has_no_diagonal_and_matches_expansion() {
        let f = NonlinearitySpec::from_taylor(&[(2, 1.0)]).unwrap();
        let u = SpectralField::mode(1, 1, 1, 1, 1.0);
        let sq = apply_nonlinearity(&u, &f, (4, 40)).unwrap();
        assert!(sq.diagonal_max_abs() < 1e-15);
        // cos^2 t sin^2 x = (1 + cos 2t)/2 * sin^2 x; sin^2 x has sine
        // coefficients -8 / (pi j (j^2 - 4)) on odd j.
        for j in (1..40).step_by(2) {
            let jf = j as f64;
            let s2 = -8.0 / (PI * jf * (jf * jf - 4.0));
            assert!((sq.get(0, j) - 0.5 * s2).abs() < 1e-14);
            assert!((sq.get(2, j) - 0.5 * s2).abs() < 1e-14);
        }
    }

    #[test]
    fn nonlinearity_is_associative() {
        let u = random_field(3, 3, 7).scaled(0.3);
        let q4 = NonlinearitySpec::from_taylor(&[(4, 1.0)]).unwrap();
        let lx = 60;
        let once = apply_nonlinearity(&u, &q4, (12, lx)).unwrap();
        // u^2 is even in x with an infinite sine series; squaring it again
        // exactly requires the even product path
        let p = Projector::new((3, 3), (12, lx), (12, 12));
        let uv = p.values(&u).unwrap();
        let sqv = uv.mapv(|x| x * x);
        let twice = p.analyze_parts(&Array2::zeros(sqv.dim()), Some(&(&sqv * &sqv)), u.lattice());
        assert!(once.sub(&twice).unwrap().max_abs() < 1e-12);
        let cube = Polynomial::monomial(3, 1.0);
        let prod = p.apply_product(&u, &cube, &u).unwrap();
        assert!(once.sub(&prod).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn norm_examples() {
        let u = SpectralField::mode(1, 1, 1, 1, 1.0);
        let n = norms(&u, 1.0);
        assert!((n.h1 * n.h1 - PI * PI).abs() < 1e-12);
        assert!((n.l2 * n.l2 - PI * PI / 2.0).abs() < 1e-12);
        let u2 = SpectralField::mode(2, 2, 2, 2, 1.0);
        assert!((h1_norm(&u2).powi(2) - 4.0 * PI * PI).abs() < 1e-12);
        let z = norms(&SpectralField::zeros(2, 2), 1.1);
        assert_eq!((z.h1, z.l2, z.sup, z.omega), (0.0, 0.0, 0.0, 0.0));
        let s = SpectralField::mode(0, 1, 0, 1, 1.0);
        assert!((inner_l2(&s, &s).unwrap() - PI * PI).abs() < 1e-12);
        assert!((inner_h1(&u, &u).unwrap() - PI * PI).abs() < 1e-12);
        let v = SpectralField::mode(1, 2, 1, 2, 1.0);
        assert_eq!(inner_l2(&SpectralField::mode(1, 2, 1, 1, 1.0), &v).unwrap(), 0.0);
    }

    #[test]
    fn norms_match_brute_quadrature() {
        let u = random_field(3, 3, 11);
        let l2 = brute_integral(|t, x| u.eval(t, x).powi(2));
        assert!((l2_norm(&u).powi(2) - l2).abs() < 1e-10 * l2);
        let h = 1e-6;
        let h1 = brute_integral(|t, x| {
            let ut = (u.eval(t + h, x) - u.eval(t - h, x)) / (2.0 * h);
            let ux = (u.eval(t, x + h) - u.eval(t, x - h)) / (2.0 * h);
            ut * ut + ux * ux
        });
        assert!((h1_norm(&u).powi(2) - h1).abs() < 1e-7 * h1);
    }

    #[test]
    fn projectors_split_the_field() {
        let u = SpectralField::mode(3, 3, 2, 2, 1.0)
            .add(&SpectralField::mode(3, 3, 1, 3, 1.0))
            .unwrap();
        let v = project_v(&u);
        assert_eq!(v.xi(), &[0.0, 1.0, 0.0]);
        assert_eq!(project_w(&u), SpectralField::mode(3, 3, 1, 3, 1.0));
        assert_eq!(project_w(&embed(&v)).max_abs(), 0.0);
    }

    #[test]
    fn integral_matches_brute_quadrature() {
        let u = random_field(2, 3, 5).scaled(0.5);
        let g = Polynomial::new(vec![0.0, 0.0, 1.0, 0.5, -0.25]);
        let p = Projector::for_polynomial((2, 3), (1, 1), 4);
        let exact = p.integrate(&u, &g).unwrap();
        let brute = brute_integral(|t, x| g.eval(u.eval(t, x)));
        assert!((exact - brute).abs() < 1e-11 * brute.abs().max(1.0));
    }

    #[test]
    fn lattice_fields_expand_consistently() {
        let la = Lattice::new(2, 1).unwrap();
        let mut u = SpectralField::zeros_on(2, 4, la);
        u.set(1, 2, 1.5);
        u.set(2, 1, -0.5);
        let full = u.to_unit_lattice();
        assert_eq!(full.physical(2, 2), 1.5);
        assert_eq!(full.physical(4, 1), -0.5);
        assert!((u.eval(0.3, 0.7) - full.eval(0.3, 0.7)).abs() < 1e-14);
        assert!((h1_norm(&u) - h1_norm(&full)).abs() < 1e-12);
        assert_eq!(project_v(&u).xi(), project_v(&full).xi());
        assert_eq!(la.kernel_stride(), 2);
        assert_eq!(la.diagonal_position(3), (3, 6));
    }

    #[test]
    fn shifted_reflection_matches_pointwise() {
        let u = random_field(3, 4, 9);
        let r = u.shifted_reflected();
        for &(t, x) in &[(0.1, 0.2), (1.3, 2.9), (4.0, 1.0)] {
            assert!((r.eval(t, x) - u.eval(t + PI, PI - x)).abs() < 1e-12);
        }
        assert_eq!(r.shifted_reflected(), u);
    }
}
