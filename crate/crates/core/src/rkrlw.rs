//! The generalized Rosenau-Kawahara-RLW equation in kernel form
//! `v_t = -k * F(v)`, `F = a v_x + b v^m v_x + kappa v_xxx - mu v_xxxxx`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::integrator::{advance, Coeffs, Integrator};
use crate::spectral::{
    check_fraction, default_dealias_fraction, truncate, Field, Grid, Spectrum, SymbolParams,
};
use crate::trajectory::{ModelParams, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrkrlwParams {
    pub a: f64,
    pub b: f64,
    pub kappa: f64,
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub m: u32,
}

impl GrkrlwParams {
    pub fn new(a: f64, b: f64, kappa: f64, mu: f64, alpha: f64, beta: f64, m: u32) -> Result<Self> {
        let p = Self {
            a,
            b,
            kappa,
            mu,
            alpha,
            beta,
            m,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("a", self.a),
            ("b", self.b),
            ("kappa", self.kappa),
            ("mu", self.mu),
            ("alpha", self.alpha),
            ("beta", self.beta),
        ] {
            if !v.is_finite() {
                return Err(invalid(format!("coefficient {name} is not finite")));
            }
        }
        if self.alpha < 0.0 || self.beta < 0.0 {
            return Err(invalid(format!(
                "alpha and beta must be nonnegative, got alpha={}, beta={}",
                self.alpha, self.beta
            )));
        }
        if self.m < 1 {
            return Err(invalid("nonlinearity exponent m must be at least 1"));
        }
        Ok(())
    }

    pub fn symbol(&self) -> SymbolParams {
        SymbolParams::new(self.alpha, self.beta).expect("validated parameters")
    }

    /// Linear dispersion relation `omega(xi)`; modes evolve as `exp(-i omega t)`.
    pub fn dispersion(&self, xi: f64) -> f64 {
        (self.a * xi - self.kappa * xi.powi(3) - self.mu * xi.powi(5)) / self.symbol().symbol(xi)
    }

    fn symbol_degrees(&self) -> (u32, u32) {
        let num = if self.mu != 0.0 {
            5
        } else if self.kappa != 0.0 {
            3
        } else if self.a != 0.0 {
            1
        } else {
            0
        };
        let den = if self.beta != 0.0 {
            4
        } else if self.alpha != 0.0 {
            2
        } else {
            0
        };
        (num, den)
    }
}

/// Named members of the equation family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelPreset {
    KdV,
    Rlw,
    RosenauRlw,
    RosenauKdv,
    RosenauKdvRlw,
    RosenauKawahara,
    RosenauKawaharaRlw,
}

impl ModelPreset {
    pub const ALL: [ModelPreset; 7] = [
        ModelPreset::KdV,
        ModelPreset::Rlw,
        ModelPreset::RosenauRlw,
        ModelPreset::RosenauKdv,
        ModelPreset::RosenauKdvRlw,
        ModelPreset::RosenauKawahara,
        ModelPreset::RosenauKawaharaRlw,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelPreset::KdV => "KdV",
            ModelPreset::Rlw => "RLW",
            ModelPreset::RosenauRlw => "Rosenau_RLW",
            ModelPreset::RosenauKdv => "Rosenau_KdV",
            ModelPreset::RosenauKdvRlw => "Rosenau_KdV_RLW",
            ModelPreset::RosenauKawahara => "Rosenau_Kawahara",
            ModelPreset::RosenauKawaharaRlw => "Rosenau_Kawahara_RLW",
        }
    }

    /// Which coefficients vanish and whether `m` is pinned.
    ///
    /// The Rosenau-RLW member is usually written with `(v^{m+1})_x`; that
    /// normalization is `b = m + 1`, left to the caller.
    pub fn mask(self) -> PresetMask {
        use Coefficient::*;
        let (zero, fixed_m): (&[Coefficient], Option<u32>) = match self {
            ModelPreset::KdV => (&[Alpha, Beta, Mu], Some(1)),
            ModelPreset::Rlw => (&[Kappa, Beta, Mu], Some(1)),
            ModelPreset::RosenauRlw => (&[Kappa, Mu], None),
            ModelPreset::RosenauKdv => (&[Alpha, Mu], None),
            ModelPreset::RosenauKdvRlw => (&[Mu], None),
            ModelPreset::RosenauKawahara => (&[Alpha], None),
            ModelPreset::RosenauKawaharaRlw => (&[], None),
        };
        PresetMask {
            preset: self,
            zero: zero.to_vec(),
            fixed_m,
        }
    }
}

impl fmt::Display for ModelPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelPreset {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['-', ' '], "_");
        ModelPreset::ALL
            .into_iter()
            .find(|p| p.name().to_ascii_lowercase() == key)
            .ok_or_else(|| invalid(format!("unknown model preset '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coefficient {
    A,
    B,
    Kappa,
    Mu,
    Alpha,
    Beta,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresetMask {
    pub preset: ModelPreset,
    pub zero: Vec<Coefficient>,
    pub fixed_m: Option<u32>,
}

impl PresetMask {
    pub fn is_free(&self, c: Coefficient) -> bool {
        !self.zero.contains(&c)
    }

    /// Takes the free values from `p` and forces the rest.
    pub fn apply(&self, p: GrkrlwParams) -> Result<GrkrlwParams> {
        let mut q = p;
        for c in &self.zero {
            *slot(&mut q, *c) = 0.0;
        }
        if let Some(m) = self.fixed_m {
            q.m = m;
        }
        q.validate()?;
        Ok(q)
    }

    /// Errors if `p` violates the pattern.
    pub fn check(&self, p: &GrkrlwParams) -> Result<()> {
        let mut q = *p;
        for c in &self.zero {
            if *slot(&mut q, *c) != 0.0 {
                return Err(invalid(format!(
                    "preset {} requires {:?} = 0",
                    self.preset, c
                )));
            }
        }
        if let Some(m) = self.fixed_m {
            if p.m != m {
                return Err(invalid(format!("preset {} requires m = {m}", self.preset)));
            }
        }
        Ok(())
    }
}

fn slot(p: &mut GrkrlwParams, c: Coefficient) -> &mut f64 {
    match c {
        Coefficient::A => &mut p.a,
        Coefficient::B => &mut p.b,
        Coefficient::Kappa => &mut p.kappa,
        Coefficient::Mu => &mut p.mu,
        Coefficient::Alpha => &mut p.alpha,
        Coefficient::Beta => &mut p.beta,
    }
}

pub fn preset(name: &str) -> Result<PresetMask> {
    Ok(name.parse::<ModelPreset>()?.mask())
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepOptions {
    pub integrator: Integrator,
    /// Overrides the degree-based default truncation fraction.
    pub dealias_fraction: Option<f64>,
}

/// Precomputed per-grid operators for one parameter set.
#[derive(Debug, Clone)]
pub struct RkrlwSolver {
    params: GrkrlwParams,
    grid: Grid,
    method: Integrator,
    fraction: f64,
    linear: Coeffs,
    inv_symbol: Vec<f64>,
    ik: Coeffs,
}

impl RkrlwSolver {
    pub fn new(params: GrkrlwParams, grid: Grid, options: StepOptions) -> Result<Self> {
        params.validate()?;
        let fraction = options
            .dealias_fraction
            .unwrap_or_else(|| default_dealias_fraction(params.m));
        check_fraction(fraction)?;
        let (num, den) = params.symbol_degrees();
        let method = options.integrator.resolve(num, den);
        let nyq = grid.nyquist_index();
        let s = params.symbol();
        let ks = grid.wavenumbers();
        let inv_symbol: Vec<f64> = ks.iter().map(|&k| 1.0 / s.symbol(k)).collect();
        let ik = ks
            .iter()
            .enumerate()
            .map(|(j, &k)| Complex64::new(0.0, if j == nyq { 0.0 } else { k }))
            .collect();
        let linear = ks
            .iter()
            .enumerate()
            .map(|(j, &k)| {
                let w = if j == nyq { 0.0 } else { params.dispersion(k) };
                Complex64::new(0.0, -w)
            })
            .collect();
        Ok(Self {
            params,
            grid,
            method,
            fraction,
            linear,
            inv_symbol,
            ik,
        })
    }

    pub fn params(&self) -> &GrkrlwParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// The resolved scheme (never `Auto`).
    pub fn method(&self) -> Integrator {
        self.method
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.fraction
    }

    /// Spectrum of `(1/(m+1)) d_x T(v^{m+1})`, `T` the truncation.
    fn nonlinear_flux_hat(&self, v: &Field) -> Coeffs {
        let p = self.params.m as i32 + 1;
        let pow = v.map(|x| x.powi(p));
        let mut sp = pow.spectrum();
        truncate(&mut sp, self.fraction);
        let scale = 1.0 / p as f64;
        sp.coeffs()
            .iter()
            .zip(&self.ik)
            .map(|(c, ik)| c * ik * scale)
            .collect()
    }

    fn nonlinear(&self, u: &[Complex64]) -> Coeffs {
        if self.params.b == 0.0 {
            return vec![Complex64::new(0.0, 0.0); u.len()];
        }
        let v = Spectrum::from_coeffs(self.grid, u.to_vec())
            .expect("state has grid size")
            .to_field(0.0);
        self.nonlinear_flux_hat(&v)
            .into_iter()
            .zip(&self.inv_symbol)
            .map(|(c, s)| -self.params.b * c * *s)
            .collect()
    }

    pub fn flux(&self, v: &Field) -> Field {
        let p = &self.params;
        let lin = v.spectrum().scale_modes(|k| {
            Complex64::new(0.0, p.a * k - p.kappa * k.powi(3) - p.mu * k.powi(5))
        });
        let nyq = self.grid.nyquist_index();
        let nl = self.nonlinear_flux_hat(v);
        let coeffs = lin
            .coeffs()
            .iter()
            .zip(nl)
            .enumerate()
            .map(|(j, (l, n))| if j == nyq { Complex64::new(0.0, 0.0) } else { l + p.b * n })
            .collect();
        Spectrum::from_coeffs(self.grid, coeffs)
            .expect("grid size")
            .to_field(v.time())
    }

    /// `v_t = -k * F(v)`.
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
            return Err(crate::Error::BlowUp { time: v.time() });
        }
        Ok(out)
    }

    /// `0.5 / max |omega_eff|`, where the nonlinear speed `|b| max|v|^m` is
    /// added to the linear frequency. With the integrating factor only the
    /// nonlinear part limits the step. Returns infinity for a zero bound.
    pub fn suggest_dt(&self, v: &Field) -> f64 {
        let p = &self.params;
        let c_nl = p.b.abs() * v.max_abs().powi(p.m as i32);
        let s = p.symbol();
        let worst = self
            .grid
            .wavenumbers()
            .into_iter()
            .map(|k| {
                let lin = if self.method == Integrator::IfRk4 {
                    0.0
                } else {
                    p.dispersion(k).abs()
                };
                lin + c_nl * k / s.symbol(k)
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
            .with_params(ModelParams::Rkrlw(self.params))
            .with_dt(dt))
    }
}

pub(crate) fn check_grid(grid: &Grid, v: &Field) -> Result<()> {
    if v.grid() != grid {
        return Err(invalid("field grid does not match solver grid"));
    }
    Ok(())
}

pub(crate) fn check_dt(dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt != 0.0) {
        return Err(invalid(format!("time step must be finite and nonzero, got {dt}")));
    }
    Ok(())
}

/// Shared stepping loop: fixed steps, final step shortened to land on `t_end`.
pub(crate) fn run_steps(
    v0: &Field,
    t_end: f64,
    dt: f64,
    snapshot_every: usize,
    mut step: impl FnMut(&Field, f64) -> Result<Field>,
) -> Result<Trajectory> {
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(invalid(format!("t_end must be finite and nonnegative, got {t_end}")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid(format!("dt must be positive, got {dt}")));
    }
    if snapshot_every == 0 {
        return Err(invalid("snapshot_every must be positive"));
    }
    let t0 = v0.time();
    let mut traj = Trajectory::new(vec![v0.clone()])?;
    if t_end == 0.0 {
        return Ok(traj);
    }
    let n_steps = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
    let mut v = v0.clone();
    for i in 1..=n_steps {
        let t_prev = t0 + (i - 1) as f64 * dt;
        let t_next = if i == n_steps {
            t0 + t_end
        } else {
            t0 + i as f64 * dt
        };
        v = step(&v.with_time(t_prev), t_next - t_prev)?.with_time(t_next);
        if i % snapshot_every == 0 || i == n_steps {
            traj.push(v.clone())?;
        }
    }
    Ok(traj)
}

pub fn flux(v: &Field, p: &GrkrlwParams) -> Result<Field> {
    Ok(RkrlwSolver::new(*p, *v.grid(), StepOptions::default())?.flux(v))
}

pub fn step(v: &Field, p: &GrkrlwParams, dt: f64) -> Result<Field> {
    RkrlwSolver::new(*p, *v.grid(), StepOptions::default())?.step(v, dt)
}

pub fn simulate(
    v0: &Field,
    p: &GrkrlwParams,
    t_end: f64,
    dt: f64,
    snapshot_every: usize,
) -> Result<Trajectory> {
    RkrlwSolver::new(*p, *v0.grid(), StepOptions::default())?.simulate(v0, t_end, dt, snapshot_every)
}

pub fn suggest_dt(v: &Field, p: &GrkrlwParams) -> Result<f64> {
    Ok(RkrlwSolver::new(*p, *v.grid(), StepOptions::default())?.suggest_dt(v))
}

/// `int v dx`; the periodic trapezoid rule is exact for the interpolant.
pub fn mass(v: &Field) -> f64 {
    v.grid().spacing() * v.values().iter().sum::<f64>()
}

/// `int (v^2 + alpha v_x^2 + beta v_xx^2) dx`.
pub fn energy(v: &Field, p: &GrkrlwParams) -> f64 {
    let sp = v.spectrum();
    let vx = sp.derivative(1).to_field(v.time());
    let vxx = sp.derivative(2).to_field(v.time());
    let h = v.grid().spacing();
    h * (0..v.values().len())
        .map(|j| {
            v.values()[j].powi(2) + p.alpha * vx.values()[j].powi(2) + p.beta * vxx.values()[j].powi(2)
        })
        .sum::<f64>()
}
