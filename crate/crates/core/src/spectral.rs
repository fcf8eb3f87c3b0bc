//! Periodic grids, sampled fields and Fourier-space operators.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use realfft::RealFftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

thread_local! {
    static PLANNER: RefCell<RealFftPlanner<f64>> = RefCell::new(RealFftPlanner::new());
}

/// Uniform periodic grid on `[0, L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    domain_length: f64,
    num_points: usize,
}

impl Grid {
    pub fn new(domain_length: f64, num_points: usize) -> Result<Self> {
        if !(domain_length.is_finite() && domain_length > 0.0) {
            return Err(invalid(format!(
                "domain length must be positive and finite, got {domain_length}"
            )));
        }
        if num_points < 16 || !num_points.is_multiple_of(2) {
            return Err(invalid(format!(
                "number of points must be even and at least 16, got {num_points}"
            )));
        }
        Ok(Self {
            domain_length,
            num_points,
        })
    }

    pub fn domain_length(&self) -> f64 {
        self.domain_length
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn spacing(&self) -> f64 {
        self.domain_length / self.num_points as f64
    }

    /// Number of stored half-spectrum modes, `N/2 + 1`.
    pub fn num_modes(&self) -> usize {
        self.num_points / 2 + 1
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.num_points).map(|j| self.node(j)).collect()
    }

    /// Angular wavenumber of half-spectrum index `j`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.domain_length
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.num_modes()).map(|j| self.wavenumber(j)).collect()
    }

    pub fn nyquist_index(&self) -> usize {
        self.num_points / 2
    }
}

/// Samples of a real profile on a [`Grid`] at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
    time: f64,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.num_points() {
            return Err(invalid(format!(
                "field has {} values but grid has {} points",
                values.len(),
                grid.num_points()
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("field value at node {j} is not finite")));
        }
        Ok(Self { grid, values, time })
    }

    /// Builds a field without the finiteness check. Used by integrators that
    /// check for blow-up themselves.
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>, time: f64) -> Self {
        debug_assert_eq!(values.len(), grid.num_points());
        Self { grid, values, time }
    }

    pub fn from_fn(grid: Grid, time: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().into_iter().map(f).collect();
        Self::new(grid, values, time)
    }

    pub fn zeros(grid: Grid, time: f64) -> Self {
        Self::from_raw(grid, vec![0.0; grid.num_points()], time)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `sqrt(h * sum v^2)`, the periodic trapezoid L2 norm.
    pub fn norm_l2(&self) -> f64 {
        l2_norm(&self.values, self.grid.spacing())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / self.values.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect(), self.time)
    }

    /// Pointwise `a*self + b*other`.
    pub fn lincomb(&self, a: f64, other: &Field, b: f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Self::from_raw(self.grid, values, self.time)
    }

    pub fn sub(&self, other: &Field) -> Self {
        self.lincomb(1.0, other, -1.0)
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::forward(self)
    }

    /// Trigonometric interpolant evaluated at an arbitrary point.
    pub fn eval_at(&self, x: f64) -> f64 {
        self.spectrum().eval_at(x)
    }

    /// Translate by `s`: returns `f(x - s)`.
    pub fn shift(&self, s: f64) -> Self {
        let mut sp = self.spectrum();
        let g = self.grid;
        for (j, c) in sp.coeffs.iter_mut().enumerate() {
            *c *= Complex64::from_polar(1.0, -g.wavenumber(j) * s);
        }
        sp.to_field(self.time)
    }
}

pub(crate) fn l2_norm(values: &[f64], h: f64) -> f64 {
    (h * values.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// Half spectrum `c_j = (1/N) sum_n v_n exp(-i k_j x_n)`, `j = 0..=N/2`.
///
/// The Nyquist coefficient is read as the coefficient of `cos(k_{N/2} x)`;
/// its imaginary part multiplies `sin(k_{N/2} x)`, which vanishes on the nodes,
/// and is dropped by [`Spectrum::to_field`].
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn forward(f: &Field) -> Self {
        let n = f.grid.num_points();
        let mut input = f.values.clone();
        let mut out = vec![Complex64::new(0.0, 0.0); n / 2 + 1];
        PLANNER.with(|p| {
            let plan = p.borrow_mut().plan_fft_forward(n);
            plan.process(&mut input, &mut out)
                .expect("forward transform buffers have planned sizes");
        });
        let scale = 1.0 / n as f64;
        for c in &mut out {
            *c *= scale;
        }
        Self {
            grid: f.grid,
            coeffs: out,
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.num_modes() {
            return Err(invalid(format!(
                "expected {} modes, got {}",
                grid.num_modes(),
                coeffs.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Inverse transform back to nodal values.
    ///
    /// Panics if the mean mode carries an imaginary part above `1e-12` relative
    /// to the spectrum scale; no operator in this crate should produce one.
    /// Non-finite spectra pass through so callers can report blow-up.
    pub fn to_field(&self, time: f64) -> Field {
        let n = self.grid.num_points();
        let mut buf = self.coeffs.clone();
        let scale = buf.iter().fold(1.0_f64, |m, c| m.max(c.norm()));
        assert!(
            !buf[0].im.is_finite() || buf[0].im.abs() <= 1e-12 * scale,
            "imaginary residue {} in mean mode",
            buf[0].im
        );
        buf[0].im = 0.0;
        buf[n / 2].im = 0.0;
        let mut out = vec![0.0; n];
        PLANNER.with(|p| {
            let plan = p.borrow_mut().plan_fft_inverse(n);
            plan.process(&mut buf, &mut out)
                .expect("inverse transform buffers have planned sizes");
        });
        Field::from_raw(self.grid, out, time)
    }

    /// Spectral derivative of any order. Odd orders zero the Nyquist mode.
    pub fn derivative(&self, order: u32) -> Spectrum {
        let nyq = self.grid.nyquist_index();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                if j == nyq && order % 2 == 1 {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * ik_pow(self.grid.wavenumber(j), order)
                }
            })
            .collect();
        Spectrum {
            grid: self.grid,
            coeffs,
        }
    }

    pub fn scale_modes(&self, symbol: impl Fn(f64) -> Complex64) -> Spectrum {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| c * symbol(self.grid.wavenumber(j)))
            .collect();
        Spectrum {
            grid: self.grid,
            coeffs,
        }
    }

    pub fn eval_at(&self, x: f64) -> f64 {
        let nyq = self.grid.nyquist_index();
        let mut acc = self.coeffs[0].re;
        for j in 1..nyq {
            let k = self.grid.wavenumber(j);
            acc += 2.0 * (self.coeffs[j] * Complex64::from_polar(1.0, k * x)).re;
        }
        acc + self.coeffs[nyq].re * (self.grid.wavenumber(nyq) * x).cos()
    }

    /// Energy weights: `sum |c_j|^2` counting each conjugate pair twice.
    pub fn power(&self) -> f64 {
        let nyq = self.grid.nyquist_index();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let w = if j == 0 || j == nyq { 1.0 } else { 2.0 };
                w * c.norm_sqr()
            })
            .sum()
    }
}

/// `(i k)^order`.
pub(crate) fn ik_pow(k: f64, order: u32) -> Complex64 {
    let mag = k.powi(order as i32);
    match order % 4 {
        0 => Complex64::new(mag, 0.0),
        1 => Complex64::new(0.0, mag),
        2 => Complex64::new(-mag, 0.0),
        _ => Complex64::new(0.0, -mag),
    }
}

/// Coefficients of `L = 1 - alpha d_xx + beta d_xxxx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolParams {
    alpha: f64,
    beta: f64,
}

impl SymbolParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0 && beta.is_finite() && beta >= 0.0) {
            return Err(invalid(format!(
                "alpha and beta must be finite and nonnegative, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `1 + alpha xi^2 + beta xi^4`, bounded below by one.
    pub fn symbol(&self, xi: f64) -> f64 {
        let x2 = xi * xi;
        1.0 + self.alpha * x2 + self.beta * x2 * x2
    }
}

pub fn differentiate(f: &Field, order: u32) -> Result<Field> {
    if !(1..=5).contains(&order) {
        return Err(invalid(format!(
            "derivative order must be in [1, 5], got {order}"
        )));
    }
    Ok(f.spectrum().derivative(order).to_field(f.time))
}

/// `L^{-1} f`, i.e. convolution with the kernel `k`.
pub fn apply_k(f: &Field, s: SymbolParams) -> Field {
    f.spectrum()
        .scale_modes(|xi| Complex64::new(1.0 / s.symbol(xi), 0.0))
        .to_field(f.time)
}

/// `L f = f - alpha f_xx + beta f_xxxx`.
pub fn apply_l(f: &Field, s: SymbolParams) -> Field {
    f.spectrum()
        .scale_modes(|xi| Complex64::new(s.symbol(xi), 0.0))
        .to_field(f.time)
}

/// `x -> f(2 axis - x)` through the trigonometric interpolant.
pub fn reflect(f: &Field, axis: f64) -> Field {
    reflect_spectrum(&f.spectrum(), axis).to_field(f.time)
}

pub(crate) fn reflect_spectrum(sp: &Spectrum, axis: f64) -> Spectrum {
    let coeffs = sp
        .coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| c.conj() * Complex64::from_polar(1.0, -2.0 * sp.grid.wavenumber(j) * axis))
        .collect();
    Spectrum {
        grid: sp.grid,
        coeffs,
    }
}

/// Zeroes every mode whose index exceeds `fraction * N/2`.
pub fn dealias(f: &Field, fraction: f64) -> Result<Field> {
    check_fraction(fraction)?;
    let mut sp = f.spectrum();
    truncate(&mut sp, fraction);
    Ok(sp.to_field(f.time))
}

pub(crate) fn check_fraction(fraction: f64) -> Result<()> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "dealias fraction must lie in (0, 1], got {fraction}"
        )));
    }
    Ok(())
}

pub(crate) fn truncate(sp: &mut Spectrum, fraction: f64) {
    let cutoff = fraction * sp.grid.nyquist_index() as f64;
    for (j, c) in sp.coeffs.iter_mut().enumerate() {
        if j as f64 > cutoff + 1e-9 {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// Default truncation fraction for a polynomial nonlinearity of the given degree.
pub fn default_dealias_fraction(degree: u32) -> f64 {
    if degree <= 2 {
        2.0 / 3.0
    } else {
        0.5
    }
}
