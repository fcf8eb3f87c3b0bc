//! The perturbed equation
//! `v_t + a1 v_x + a2 v_xxx + a3 v_xxt + a4 v_xxxxt + a5 (v^n)_x = R(v)`,
//! stepped as `v_t = M^{-1}[R - a1 v_x - a2 v_xxx - a5 (v^n)_x]` with
//! `M = 1 + a3 d_xx + a4 d_xxxx`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::integrator::{advance, Coeffs, Integrator};
use crate::numerics::{rational_approx, safeguarded_newton};
use crate::rkrlw::{check_dt, check_grid, run_steps, StepOptions};
use crate::spectral::{
    check_fraction, default_dealias_fraction, truncate, Field, Grid, Spectrum,
};
use crate::trajectory::{ModelParams, Trajectory};

/// Coefficients `a1..a5`, `b1..b12` (stored zero-based) and exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbedParams {
    pub a: [f64; 5],
    pub b: [f64; 12],
    pub m: u32,
    pub n: u32,
}

impl PerturbedParams {
    pub fn new(a: [f64; 5], b: [f64; 12], m: u32, n: u32) -> Result<Self> {
        let p = Self { a, b, m, n };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(i) = self.a.iter().position(|x| !x.is_finite()) {
            return Err(invalid(format!("coefficient a{} is not finite", i + 1)));
        }
        if let Some(i) = self.b.iter().position(|x| !x.is_finite()) {
            return Err(invalid(format!("coefficient b{} is not finite", i + 1)));
        }
        if !(1..=4).contains(&self.m) {
            return Err(invalid(format!("m must lie in 1..=4, got {}", self.m)));
        }
        if self.n < 2 {
            return Err(invalid(format!("n must be at least 2, got {}", self.n)));
        }
        Ok(())
    }

    /// One-based `a_i`.
    pub fn a(&self, i: usize) -> f64 {
        self.a[i - 1]
    }

    /// One-based `b_i`.
    pub fn b(&self, i: usize) -> f64 {
        self.b[i - 1]
    }

    /// Symbol of `M`: `1 - a3 xi^2 + a4 xi^4`.
    pub fn m_symbol(&self, xi: f64) -> f64 {
        let x2 = xi * xi;
        1.0 - self.a(3) * x2 + self.a(4) * x2 * x2
    }

    /// Full linear symbol of the rearranged equation.
    pub fn linear_symbol(&self, xi: f64) -> Complex64 {
        let re = self.b(1) - self.b(2) * xi.powi(2) + self.b(10) * xi.powi(4);
        let im = self.b(11) * xi.powi(5) - self.a(1) * xi + self.a(2) * xi.powi(3);
        Complex64::new(re, im) / self.m_symbol(xi)
    }

    /// Errors with the first grid wavenumber where `M` is (numerically) singular.
    pub fn check_invertible(&self, grid: &Grid) -> Result<()> {
        for xi in grid.wavenumbers() {
            let x2 = xi * xi;
            let scale = 1f64.max(self.a(3).abs() * x2).max(self.a(4).abs() * x2 * x2);
            if self.m_symbol(xi).abs() <= 1e-12 * scale {
                return Err(Error::NonInvertibleSymbol { xi });
            }
        }
        Ok(())
    }

    fn symbol_degrees(&self) -> (u32, u32) {
        let num = [5, 4, 3, 2, 1, 0]
            .into_iter()
            .zip([self.b(11), self.b(10), self.a(2), self.b(2), self.a(1), self.b(1)])
            .find(|(_, c)| *c != 0.0)
            .map_or(0, |(d, _)| d);
        let den = if self.a(4) != 0.0 {
            4
        } else if self.a(3) != 0.0 {
            2
        } else {
            0
        };
        (num, den)
    }

    fn max_exponent(&self) -> u32 {
        let cubic = [6, 7].iter().any(|&i| self.b(i) != 0.0);
        self.m.max(self.n).max(if cubic { 3 } else { 1 })
    }
}

/// Quadratic and cubic derivative products of `R`: `(b index, derivative orders)`.
const PRODUCT_TERMS: [(usize, &[u32]); 7] = [
    (3, &[1, 2]),
    (5, &[0, 3]),
    (6, &[0, 1, 2]),
    (7, &[1, 1, 1]),
    (8, &[1, 4]),
    (9, &[2, 3]),
    (12, &[0, 5]),
];

#[derive(Debug, Clone)]
pub struct PerturbedSolver {
    params: PerturbedParams,
    grid: Grid,
    method: Integrator,
    fraction: f64,
    linear: Coeffs,
    inv_m: Vec<f64>,
    ik: Coeffs,
}

impl PerturbedSolver {
    pub fn new(params: PerturbedParams, grid: Grid, options: StepOptions) -> Result<Self> {
        params.validate()?;
        params.check_invertible(&grid)?;
        let fraction = options
            .dealias_fraction
            .unwrap_or_else(|| default_dealias_fraction(params.max_exponent()));
        check_fraction(fraction)?;
        let (num, den) = params.symbol_degrees();
        let method = options.integrator.resolve(num, den);
        let nyq = grid.nyquist_index();
        let ks = grid.wavenumbers();
        let linear = ks
            .iter()
            .enumerate()
            .map(|(j, &k)| {
                let l = params.linear_symbol(k);
                if j == nyq {
                    Complex64::new(l.re, 0.0)
                } else {
                    l
                }
            })
            .collect();
        let inv_m = ks.iter().map(|&k| 1.0 / params.m_symbol(k)).collect();
        let ik = ks
            .iter()
            .enumerate()
            .map(|(j, &k)| Complex64::new(0.0, if j == nyq { 0.0 } else { k }))
            .collect();
        Ok(Self {
            params,
            grid,
            method,
            fraction,
            linear,
            inv_m,
            ik,
        })
    }

    pub fn params(&self) -> &PerturbedParams {
        &self.params
    }

    pub fn method(&self) -> Integrator {
        self.method
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.fraction
    }

    fn derivatives(&self, sp: &Spectrum, max_order: u32) -> Vec<Vec<f64>> {
        (0..=max_order)
            .map(|o| {
                if o == 0 {
                    sp.to_field(0.0).into_values()
                } else {
                    sp.derivative(o).to_field(0.0).into_values()
                }
            })
            .collect()
    }

    /// Spectrum of `d_x T(v^p) / p`.
    fn power_flux_hat(&self, v: &[f64], p: u32) -> Coeffs {
        let pow: Vec<f64> = v.iter().map(|x| x.powi(p as i32)).collect();
        let mut sp = Field::from_raw(self.grid, pow, 0.0).spectrum();
        truncate(&mut sp, self.fraction);
        let scale = 1.0 / p as f64;
        sp.coeffs()
            .iter()
            .zip(&self.ik)
            .map(|(c, ik)| c * ik * scale)
            .collect()
    }

    /// Spectrum of the nonlinear part of `R`, minus `a5 (v^n)_x` when
    /// `with_transport`, before `M^{-1}`.
    fn nonlinear_unscaled(&self, sp: &Spectrum, with_transport: bool) -> Coeffs {
        let p = &self.params;
        let nmodes = self.grid.num_modes();
        let mut out = vec![Complex64::new(0.0, 0.0); nmodes];
        let active: Vec<_> = PRODUCT_TERMS
            .iter()
            .filter(|(i, _)| p.b(*i) != 0.0)
            .collect();
        let transport = with_transport && p.a(5) != 0.0;
        let need_v = !active.is_empty() || p.b(4) != 0.0 || transport;
        if !need_v {
            return out;
        }
        let max_order = active
            .iter()
            .flat_map(|(_, o)| o.iter().copied())
            .max()
            .unwrap_or(0);
        let d = self.derivatives(sp, max_order);
        if !active.is_empty() {
            let q: Vec<f64> = (0..self.grid.num_points())
                .map(|j| {
                    active
                        .iter()
                        .map(|(i, orders)| {
                            p.b(*i) * orders.iter().map(|&o| d[o as usize][j]).product::<f64>()
                        })
                        .sum()
                })
                .collect();
            let mut qs = Field::from_raw(self.grid, q, 0.0).spectrum();
            truncate(&mut qs, self.fraction);
            for (o, c) in out.iter_mut().zip(qs.coeffs()) {
                *o += c;
            }
        }
        if p.b(4) != 0.0 {
            for (o, c) in out.iter_mut().zip(self.power_flux_hat(&d[0], p.m + 1)) {
                *o += p.b(4) * c;
            }
        }
        if transport {
            // (v^n)_x = n * [d_x(v^n)/n]
            let nn = p.n as f64;
            for (o, c) in out.iter_mut().zip(self.power_flux_hat(&d[0], p.n)) {
                *o -= p.a(5) * nn * c;
            }
        }
        out
    }

    fn nonlinear(&self, u: &[Complex64]) -> Coeffs {
        let sp = Spectrum::from_coeffs(self.grid, u.to_vec()).expect("grid size");
        self.nonlinear_unscaled(&sp, true)
            .into_iter()
            .zip(&self.inv_m)
            .map(|(c, s)| c * *s)
            .collect()
    }

    /// All twelve terms of `R`.
    pub fn perturbation_r(&self, v: &Field) -> Field {
        let p = &self.params;
        let sp = v.spectrum();
        let lin = sp.scale_modes(|k| {
            Complex64::new(p.b(1) - p.b(2) * k * k + p.b(10) * k.powi(4), p.b(11) * k.powi(5))
        });
        let nyq = self.grid.nyquist_index();
        let nl = self.nonlinear_unscaled(&sp, false);
        let coeffs = lin
            .coeffs()
            .iter()
            .zip(nl)
            .enumerate()
            .map(|(j, (l, c))| {
                let l = if j == nyq { Complex64::new(l.re, 0.0) } else { *l };
                l + c
            })
            .collect();
        Spectrum::from_coeffs(self.grid, coeffs)
            .expect("grid size")
            .to_field(v.time())
    }

    /// `(v^n)_x` with the solver's dealiasing.
    pub(crate) fn transport_term(&self, v: &Field) -> Field {
        let nn = self.params.n as f64;
        let coeffs = self
            .power_flux_hat(v.values(), self.params.n)
            .into_iter()
            .map(|c| c * nn)
            .collect();
        Spectrum::from_coeffs(self.grid, coeffs)
            .expect("grid size")
            .to_field(v.time())
    }

    /// `v_t` of the rearranged equation.
    pub fn rhs(&self, v: &Field) -> Field {
        let u = v.spectrum();
        let nl = self.nonlinear(u.coeffs());
        let coeffs = u
            .coeffs()
            .iter()
            .zip(&self.linear)
            .zip(nl)
            .map(|((c, l), n)| l * c + n)
            .collect();
        Spectrum::from_coeffs(self.grid, coeffs)
            .expect("grid size")
            .to_field(v.time())
    }

    pub fn step(&self, v: &Field, dt: f64) -> Result<Field> {
        check_grid(&self.grid, v)?;
        check_dt(dt)?;
        let u = v.spectrum();
        let next = advance(
            self.method,
            &self.linear,
            &|x| self.nonlinear(x),
            u.coeffs(),
            dt,
            v.time(),
        )?;
        let out = Spectrum::from_coeffs(self.grid, next)?.to_field(v.time() + dt);
        if !out.is_finite() {
            return Err(Error::BlowUp { time: v.time() });
        }
        Ok(out)
    }

    /// `0.5 / max |omega_eff|` with each nonlinear product linearized about
    /// the current derivative maxima.
    pub fn suggest_dt(&self, v: &Field) -> f64 {
        let p = &self.params;
        let sp = v.spectrum();
        let dmax: Vec<f64> = self
            .derivatives(&sp, 5)
            .iter()
            .map(|d| d.iter().fold(0.0_f64, |m, x| m.max(x.abs())))
            .collect();
        let mut terms: Vec<(f64, Vec<u32>)> = PRODUCT_TERMS
            .iter()
            .map(|(i, o)| (p.b(*i).abs(), o.to_vec()))
            .collect();
        let mut pow_term = |c: f64, e: u32| {
            let mut o = vec![0; (e - 1) as usize];
            o.push(1);
            terms.push((c, o));
        };
        pow_term(p.b(4).abs(), p.m + 1);
        pow_term(p.a(5).abs() * p.n as f64, p.n);
        let worst = self
            .grid
            .wavenumbers()
            .into_iter()
            .map(|k| {
                let nl: f64 = terms
                    .iter()
                    .filter(|(c, _)| *c != 0.0)
                    .map(|(c, orders)| {
                        c * (0..orders.len())
                            .map(|f| {
                                let others: f64 = orders
                                    .iter()
                                    .enumerate()
                                    .filter(|(g, _)| *g != f)
                                    .map(|(_, &o)| dmax[o as usize])
                                    .product();
                                others * k.powi(orders[f] as i32)
                            })
                            .sum::<f64>()
                    })
                    .sum::<f64>()
                    / p.m_symbol(k).abs();
                let lin = if self.method == Integrator::IfRk4 {
                    0.0
                } else {
                    p.linear_symbol(k).norm()
                };
                lin + nl
            })
            .fold(0.0, f64::max);
        if worst > 0.0 {
            0.5 / worst
        } else {
            f64::INFINITY
        }
    }

    pub fn simulate(
        &self,
        v0: &Field,
        t_end: f64,
        dt: f64,
        snapshot_every: usize,
    ) -> Result<Trajectory> {
        let traj = run_steps(v0, t_end, dt, snapshot_every, |v, h| self.step(v, h))?;
        Ok(traj
            .with_params(ModelParams::Perturbed(self.params))
            .with_dt(dt))
    }
}

pub fn perturbation_r(v: &Field, p: &PerturbedParams) -> Result<Field> {
    Ok(PerturbedSolver::new(*p, *v.grid(), StepOptions::default())?.perturbation_r(v))
}

pub fn step_perturbed(v: &Field, p: &PerturbedParams, dt: f64) -> Result<Field> {
    PerturbedSolver::new(*p, *v.grid(), StepOptions::default())?.step(v, dt)
}

pub fn simulate_perturbed(
    v0: &Field,
    p: &PerturbedParams,
    t_end: f64,
    dt: f64,
    snapshot_every: usize,
) -> Result<Trajectory> {
    PerturbedSolver::new(*p, *v0.grid(), StepOptions::default())?
        .simulate(v0, t_end, dt, snapshot_every)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate {
    pub speed: f64,
    pub shape_defect: f64,
}

/// Best shift `s` (in `(-L/2, L/2]`) with `g(x) ~ f(x - s)`, from the
/// cross-correlation `R(s) = sum_k g_k conj(f_k) e^{iks}`.
fn best_shift(f: &Spectrum, g: &Spectrum) -> f64 {
    let grid = *f.grid();
    let nyq = grid.nyquist_index();
    let h: Vec<Complex64> = g
        .coeffs()
        .iter()
        .zip(f.coeffs())
        .map(|(a, b)| a * b.conj())
        .collect();
    let corr = Spectrum::from_coeffs(grid, h.clone())
        .expect("grid size")
        .to_field(0.0);
    let (jbest, _) = corr
        .values()
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (j, &c)| if c > b.1 { (j, c) } else { b });
    let s0 = grid.node(jbest);
    // derivatives of R(s) = Re[h0] + 2 sum Re[h_k e^{iks}] + Re[h_N] cos(k_N s)
    let deriv = |s: f64, order: u32| -> f64 {
        let mut acc = 0.0;
        for (j, hk) in h.iter().enumerate().skip(1) {
            let k = grid.wavenumber(j);
            let w = if j == nyq { 1.0 } else { 2.0 };
            let e = if j == nyq {
                Complex64::new((k * s).cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, k * s)
            };
            let factor = crate::spectral::ik_pow(k, order);
            acc += w * (hk * e * factor).re;
        }
        acc
    };
    let dx = grid.spacing();
    let s = safeguarded_newton(|s| deriv(s, 1), |s| deriv(s, 2), s0 - dx, s0 + dx, 1e-15 * grid.domain_length());
    let l = grid.domain_length();
    let mut s = s.rem_euclid(l);
    if s > 0.5 * l {
        s -= l;
    }
    s
}

fn relative_mismatch(f: &Spectrum, g: &Spectrum, s: f64) -> f64 {
    let grid = f.grid();
    let nyq = grid.nyquist_index();
    let mut num = 0.0;
    let mut den = 0.0;
    for (j, (a, b)) in f.coeffs().iter().zip(g.coeffs()).enumerate() {
        let k = grid.wavenumber(j);
        let w = if j == 0 || j == nyq { 1.0 } else { 2.0 };
        let shifted = if j == nyq {
            Complex64::new(a.re * (k * s).cos(), 0.0)
        } else {
            a * Complex64::from_polar(1.0, -k * s)
        };
        let bb = if j == nyq { Complex64::new(b.re, 0.0) } else { *b };
        num += w * (bb - shifted).norm_sqr();
        den += w * a.norm_sqr();
    }
    (num / den).sqrt()
}

/// Propagation speed from accumulated snapshot-to-snapshot shifts, and the
/// minimal relative L2 mismatch between the first and last snapshot over all
/// translations.
pub fn measure_speed(traj: &Trajectory) -> Result<SpeedEstimate> {
    if traj.len() < 2 {
        return Err(Error::InsufficientData(
            "speed measurement needs at least two snapshots".into(),
        ));
    }
    let spectra: Vec<Spectrum> = traj
        .snapshots()
        .map(|f| {
            if f.variance() < 1e-14 {
                Err(Error::DegenerateInput(format!(
                    "snapshot at t = {} is nearly constant",
                    f.time()
                )))
            } else {
                Ok(f.spectrum())
            }
        })
        .collect::<Result<_>>()?;
    let total: f64 = spectra.windows(2).map(|w| best_shift(&w[0], &w[1])).sum();
    let elapsed = traj.times()[traj.len() - 1] - traj.times()[0];
    let first = &spectra[0];
    let last = &spectra[spectra.len() - 1];
    let s = best_shift(first, last);
    Ok(SpeedEstimate {
        speed: total / elapsed,
        shape_defect: relative_mismatch(first, last, s),
    })
}

/// Smallest domain length that is a whole number of periods for every
/// frequency, `L = 2 pi q / f_1` when `f_i / f_1 = p_i / q`. Errors if none
/// exists up to `cap`.
pub fn commensurate_length(frequencies: &[f64], cap: f64) -> Result<f64> {
    let f1 = *frequencies
        .first()
        .ok_or_else(|| invalid("at least one frequency is required"))?;
    if frequencies.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
        return Err(invalid("frequencies must be positive"));
    }
    let mut q = 1i64;
    for f in &frequencies[1..] {
        let (_, den) =
            rational_approx(f / f1, 1000, 1e-12).ok_or(Error::NoCommensurateLength { cap })?;
        q = q / crate::numerics::gcd(q, den) * den;
    }
    let l = 2.0 * PI * q as f64 / f1;
    if l > cap {
        return Err(Error::NoCommensurateLength { cap });
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{fd_derivative, FdScheme};
    use crate::rkrlw::{GrkrlwParams, RkrlwSolver};

    fn zero_params(m: u32, n: u32) -> PerturbedParams {
        PerturbedParams::new([0.0; 5], [0.0; 12], m, n).unwrap()
    }

    #[test]
    fn validation() {
        assert!(PerturbedParams::new([0.0; 5], [0.0; 12], 5, 2).is_err());
        assert!(PerturbedParams::new([0.0; 5], [0.0; 12], 1, 1).is_err());
        let mut p = zero_params(1, 2);
        p.a[2] = 2.0;
        p.a[3] = 1.0;
        // 1 - 2 xi^2 + xi^4 vanishes at xi = 1
        let g = Grid::new(2.0 * PI, 16).unwrap();
        assert_eq!(p.check_invertible(&g), Err(Error::NonInvertibleSymbol { xi: 1.0 }));
        assert!(PerturbedSolver::new(p, g, StepOptions::default()).is_err());
    }

    #[test]
    fn r_vanishes_and_b1_only() {
        let g = Grid::new(2.0 * PI, 32).unwrap();
        let v = Field::from_fn(g, 0.0, |x| x.sin().exp()).unwrap();
        assert!(perturbation_r(&v, &zero_params(1, 2)).unwrap().max_abs() == 0.0);
        let mut p = zero_params(1, 2);
        p.b[0] = 0.7;
        let r = perturbation_r(&v, &p).unwrap();
        assert!(r.sub(&v.map(|x| 0.7 * x)).max_abs() < 1e-13);
    }

    #[test]
    fn r_matches_fd_oracle() {
        let g = Grid::new(40.0, 256).unwrap();
        let v = Field::from_fn(g, 0.0, |x| 0.8 / (0.5 * (x - 20.0)).cosh().powi(2)).unwrap();
        let b: [f64; 12] = [0.1, -0.2, 0.3, 0.4, -0.5, 0.6, 0.7, -0.8, 0.9, 0.05, -0.02, 0.3];
        let p = PerturbedParams::new([0.0; 5], b, 2, 3).unwrap();
        let r = perturbation_r(&v, &p).unwrap();
        let h = g.spacing();
        let d: Vec<Vec<f64>> = (0..=5)
            .map(|o| {
                if o == 0 {
                    v.values().to_vec()
                } else {
                    fd_derivative(v.values(), h, o, FdScheme::Eighth)
                }
            })
            .collect();
        let err = (0..g.num_points())
            .map(|j| {
                let (u, u1, u2, u3, u4, u5) = (d[0][j], d[1][j], d[2][j], d[3][j], d[4][j], d[5][j]);
                let o = b[0] * u + b[1] * u2 + b[2] * u1 * u2 + b[3] * u * u * u1 + b[4] * u * u3
                    + b[5] * u * u1 * u2
                    + b[6] * u1.powi(3)
                    + b[7] * u1 * u4
                    + b[8] * u2 * u3
                    + b[9] * u4
                    + b[10] * u5
                    + b[11] * u * u5;
                (o - r.values()[j]).abs()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn pure_advection_translates() {
        let g = Grid::new(2.0 * PI, 32).unwrap();
        let mut p = zero_params(1, 2);
        p.a[0] = 1.3;
        let v = Field::from_fn(g, 0.0, |x| (x.sin()).exp()).unwrap();
        let solver = PerturbedSolver::new(p, g, StepOptions { integrator: Integrator::Rk4, dealias_fraction: None }).unwrap();
        let dt = 1e-3;
        let out = solver.step(&v, dt).unwrap();
        let exact = Field::from_fn(g, dt, |x| ((x - 1.3 * dt).sin()).exp()).unwrap();
        assert!(out.sub(&exact).max_abs() < 1e-13);
    }

    #[test]
    fn b1_growth_is_exponential() {
        let g = Grid::new(2.0 * PI, 16).unwrap();
        let mut p = zero_params(1, 2);
        p.b[0] = 0.4;
        let v = Field::from_fn(g, 0.0, |x| 1.0 + 0.5 * x.cos()).unwrap();
        let traj = simulate_perturbed(&v, &p, 1.0, 0.01, 100).unwrap();
        let exact = v.map(|x| x * 0.4f64.exp());
        assert!(traj.last().sub(&exact).max_abs() < 1e-10);
    }

    #[test]
    fn reduces_to_rkrlw() {
        let g = Grid::new(40.0, 128).unwrap();
        let a = [0.3, 0.7, -0.5, 0.2, 0.9];
        let n = 3;
        let p = PerturbedParams::new(a, [0.0; 12], 1, n).unwrap();
        let q = GrkrlwParams::new(a[0], n as f64 * a[4], a[1], 0.0, -a[2], a[3], n - 1).unwrap();
        let opts = StepOptions { integrator: Integrator::Rk4, dealias_fraction: Some(0.5) };
        let s1 = PerturbedSolver::new(p, g, opts).unwrap();
        let s2 = RkrlwSolver::new(q, g, opts).unwrap();
        let v = Field::from_fn(g, 0.0, |x| 1.0 / (0.5 * (x - 20.0)).cosh().powi(2)).unwrap();
        let d = s1.step(&v, 1e-2).unwrap().sub(&s2.step(&v, 1e-2).unwrap()).max_abs();
        assert!(d < 1e-12, "{d}");
    }

    #[test]
    fn speed_of_exact_translation() {
        let g = Grid::new(60.0, 256).unwrap();
        let c = 0.77;
        let fields: Vec<Field> = (0..12)
            .map(|i| {
                let t = 0.5 * i as f64;
                Field::from_fn(g, t, |x| {
                    let y = (x - 5.0 - c * t).rem_euclid(60.0) - 30.0;
                    1.0 / (0.5 * y).cosh().powi(2)
                })
                .unwrap()
            })
            .collect();
        let traj = Trajectory::new(fields).unwrap();
        let est = measure_speed(&traj).unwrap();
        assert!((est.speed - c).abs() < 1e-10, "{}", est.speed);
        assert!(est.shape_defect < 1e-12, "{}", est.shape_defect);
        let shifted = measure_speed(&traj.shift(3.3)).unwrap();
        assert!((shifted.speed - est.speed).abs() < 1e-12);
    }

    #[test]
    fn stationary_and_constant_inputs() {
        let g = Grid::new(2.0 * PI, 32).unwrap();
        let f0 = Field::from_fn(g, 0.0, |x| x.cos()).unwrap();
        let traj = Trajectory::new(vec![f0.clone(), f0.clone().with_time(1.0)]).unwrap();
        assert!(measure_speed(&traj).unwrap().speed.abs() < 1e-14);
        let c = Field::from_fn(g, 0.0, |_| 2.0).unwrap();
        let traj = Trajectory::new(vec![c.clone(), c.with_time(1.0)]).unwrap();
        assert!(matches!(measure_speed(&traj), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn commensurate_lengths() {
        let l = commensurate_length(&[1.0, 2.0], 100.0).unwrap();
        assert!((l - 2.0 * PI).abs() < 1e-14);
        let l = commensurate_length(&[2.0, 3.0], 100.0).unwrap();
        assert!((l - 2.0 * PI).abs() < 1e-14);
        let l = commensurate_length(&[1.0, 0.5], 100.0).unwrap();
        assert!((l - 4.0 * PI).abs() < 1e-14);
        assert!(commensurate_length(&[1.0, 2f64.sqrt()], 1e6).is_err());
        assert!(commensurate_length(&[0.01], 100.0).is_err());
    }
}
