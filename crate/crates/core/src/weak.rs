//! Weak-form residuals against smooth compactly supported test functions.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::io::to_json_compact;
use crate::oracle::check_uniform;
use crate::rkrlw::GrkrlwParams;
use crate::spectral::{Field, Grid, Spectrum};
use crate::trajectory::Trajectory;

/// Highest derivative order of the standard bump that is ever needed.
const MAX_ORDER: usize = 5;

/// `rho^(n)(s) = P_n(s) (1 - s^2)^(-2n) rho(s)` with
/// `P_{n+1} = q^2 P_n' + (4 n s q - 2 s) P_n`, `q = 1 - s^2`.
fn rho_polys() -> &'static [Vec<f64>] {
    static POLYS: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    POLYS.get_or_init(|| {
        let mut out = vec![vec![1.0]];
        for n in 0..MAX_ORDER {
            let p = &out[n];
            let mut next = vec![0.0; p.len() + 4];
            // q^2 = 1 - 2 s^2 + s^4
            let q2 = [1.0, 0.0, -2.0, 0.0, 1.0];
            for (i, c) in p.iter().enumerate().skip(1) {
                for (j, qj) in q2.iter().enumerate() {
                    next[i - 1 + j] += i as f64 * c * qj;
                }
            }
            // (4n - 2) s - 4n s^3
            let nf = n as f64;
            for (i, c) in p.iter().enumerate() {
                next[i + 1] += (4.0 * nf - 2.0) * c;
                next[i + 3] -= 4.0 * nf * c;
            }
            while next.len() > 1 && next[next.len() - 1] == 0.0 {
                next.pop();
            }
            out.push(next);
        }
        out
    })
}

/// `n`-th derivative of `rho(s) = exp(-1/(1-s^2))` on `|s| < 1`, zero outside.
pub fn rho_derivative(s: f64, n: usize) -> f64 {
    assert!(n <= MAX_ORDER, "bump derivatives are tabulated up to order {MAX_ORDER}");
    let q = 1.0 - s * s;
    if q <= 0.0 {
        return 0.0;
    }
    let p = rho_polys()[n].iter().rev().fold(0.0, |acc, c| acc * s + c);
    p * (-1.0 / q - 2.0 * n as f64 * q.ln()).exp()
}

/// `rho((x - center) / radius)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump1d {
    pub center: f64,
    pub radius: f64,
}

impl Bump1d {
    pub fn new(center: f64, radius: f64) -> Result<Self> {
        if !(center.is_finite() && radius.is_finite() && radius > 0.0) {
            return Err(invalid(format!("bad bump centre {center} / radius {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn derivative(&self, x: f64, n: usize) -> f64 {
        rho_derivative((x - self.center) / self.radius, n) / self.radius.powi(n as i32)
    }

    fn check_inside(&self, lo: f64, hi: f64, what: &str) -> Result<()> {
        if self.center - self.radius > lo && self.center + self.radius < hi {
            Ok(())
        } else {
            Err(invalid(format!(
                "{what} support [{}, {}] is not strictly inside [{lo}, {hi}]",
                self.center - self.radius,
                self.center + self.radius
            )))
        }
    }
}

/// Product bump `phi(t, x) = rho((t - c_t)/r_t) rho((x - c_x)/r_x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestBump {
    pub center_t: f64,
    pub center_x: f64,
    pub radius_t: f64,
    pub radius_x: f64,
}

impl TestBump {
    pub fn new(center_t: f64, center_x: f64, radius_t: f64, radius_x: f64) -> Result<Self> {
        Bump1d::new(center_t, radius_t)?;
        Bump1d::new(center_x, radius_x)?;
        Ok(Self {
            center_t,
            center_x,
            radius_t,
            radius_x,
        })
    }

    fn factors(&self) -> (Bump1d, Bump1d) {
        (
            Bump1d {
                center: self.center_t,
                radius: self.radius_t,
            },
            Bump1d {
                center: self.center_x,
                radius: self.radius_x,
            },
        )
    }
}

/// The partial derivatives of a test function entering the weak form.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Partials {
    pub t: f64,
    pub txx: f64,
    pub txxxx: f64,
    pub x: f64,
    pub xxx: f64,
    pub xxxxx: f64,
}

pub trait TestFunction {
    /// `((t_lo, t_hi), (x_lo, x_hi))` containing the support.
    fn support(&self) -> ((f64, f64), (f64, f64));
    fn partials(&self, t: f64, x: f64) -> Partials;
    /// Smallest spatial feature radius, which sets the quadrature resolution.
    fn x_radius(&self) -> f64 {
        let (_, (lo, hi)) = self.support();
        0.5 * (hi - lo)
    }
}

impl TestFunction for TestBump {
    fn support(&self) -> ((f64, f64), (f64, f64)) {
        (
            (self.center_t - self.radius_t, self.center_t + self.radius_t),
            (self.center_x - self.radius_x, self.center_x + self.radius_x),
        )
    }

    fn partials(&self, t: f64, x: f64) -> Partials {
        let (bt, bx) = self.factors();
        let (f0, f1) = (bt.derivative(t, 0), bt.derivative(t, 1));
        if f0 == 0.0 && f1 == 0.0 {
            return Partials::default();
        }
        let g: Vec<f64> = (0..=MAX_ORDER).map(|n| bx.derivative(x, n)).collect();
        Partials {
            t: f1 * g[0],
            txx: f1 * g[2],
            txxxx: f1 * g[4],
            x: f0 * g[1],
            xxx: f0 * g[3],
            xxxxx: f0 * g[5],
        }
    }
}

/// Quadrature points wanted across one bump diameter: the fifth derivative
/// of `rho` needs about this many for a relative error near roundoff.
const POINTS_PER_DIAMETER: f64 = 2048.0;

/// Refinement factor (a power of two) so the bump diameter spans enough points.
fn refinement(grid: &Grid, radius: f64) -> usize {
    let want = POINTS_PER_DIAMETER * grid.spacing() / (2.0 * radius);
    (want.ceil().max(1.0) as usize).next_power_of_two()
}

/// Zero-padded trigonometric interpolant of `values` on a grid `factor` times finer.
fn refine(grid: &Grid, values: &[f64], factor: usize) -> Result<Field> {
    let coarse = Field::new(*grid, values.to_vec(), 0.0)?;
    if factor == 1 {
        return Ok(coarse);
    }
    let fine_grid = Grid::new(grid.domain_length(), grid.num_points() * factor)?;
    let sp = coarse.spectrum();
    let nyq = grid.nyquist_index();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); fine_grid.num_modes()];
    coeffs[..nyq].copy_from_slice(&sp.coeffs()[..nyq]);
    // the coarse Nyquist mode is a cosine; split it over +-k on the fine grid
    coeffs[nyq] = Complex64::new(0.5 * sp.coeffs()[nyq].re, 0.0);
    Ok(Spectrum::from_coeffs(fine_grid, coeffs)?.to_field(0.0))
}

/// Composite Simpson weights on `n` uniform samples; an even number of
/// intervals is closed with the 3/8 rule on the last three.
fn simpson_weights(n: usize, dt: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    match n {
        0 | 1 => {}
        2 => {
            w[0] = 0.5 * dt;
            w[1] = 0.5 * dt;
        }
        _ => {
            let intervals = n - 1;
            let simpson_end = if intervals.is_multiple_of(2) { intervals } else { intervals - 3 };
            for i in (0..simpson_end).step_by(2) {
                w[i] += dt / 3.0;
                w[i + 1] += 4.0 * dt / 3.0;
                w[i + 2] += dt / 3.0;
            }
            if simpson_end < intervals {
                let s = simpson_end;
                for (k, c) in [1.0, 3.0, 3.0, 1.0].into_iter().enumerate() {
                    w[s + k] += 3.0 * dt / 8.0 * c;
                }
            }
        }
    }
    w
}

/// Signed weak-form integral
/// `int int v L(phi_t) + (a v + b v^{m+1}/(m+1)) phi_x + kappa v phi_xxx - mu v phi_xxxxx`
/// and composite Simpson in `t`. In `x` each snapshot is replaced by its
/// trigonometric interpolant on a grid fine enough to resolve the test
/// function, then integrated by the trapezoid rule.
pub fn weak_integral(traj: &Trajectory, p: &GrkrlwParams, test: &dyn TestFunction) -> Result<f64> {
    let times = traj.times();
    let grid = traj.grid();
    let ((tlo, thi), (xlo, xhi)) = test.support();
    let (t0, t1) = (times[0], times[times.len() - 1]);
    if !(tlo > t0 && thi < t1) {
        return Err(invalid(format!(
            "test function time support [{tlo}, {thi}] leaves [{t0}, {t1}]"
        )));
    }
    if !(xlo > 0.0 && xhi < grid.domain_length()) {
        return Err(invalid(format!(
            "test function space support [{xlo}, {xhi}] leaves [0, {}]",
            grid.domain_length()
        )));
    }
    let dt = if times.len() > 1 {
        check_uniform(times)?
    } else {
        0.0
    };
    let wt = simpson_weights(times.len(), dt);
    let factor = refinement(grid, test.x_radius());
    let mp1 = (p.m + 1) as f64;
    let mut total = 0.0;
    for ((&t, v), w) in times.iter().zip(traj.values()).zip(&wt) {
        if t <= tlo || t >= thi {
            continue;
        }
        let fine = refine(grid, v, factor)?;
        let fg = fine.grid();
        let h = fg.spacing();
        let (j0, j1) = ((xlo / h).floor() as usize, (xhi / h).ceil() as usize);
        let mut acc = 0.0;
        for j in j0..=j1.min(fg.num_points() - 1) {
            let x = fg.node(j);
            let vj = fine.values()[j];
            let d = test.partials(t, x);
            let l_phi_t = d.t - p.alpha * d.txx + p.beta * d.txxxx;
            acc += vj * l_phi_t
                + (p.a * vj + p.b / mp1 * vj.powi(p.m as i32 + 1)) * d.x
                + p.kappa * vj * d.xxx
                - p.mu * vj * d.xxxxx;
        }
        total += w * h * acc;
    }
    Ok(total)
}

/// `|weak_integral|` for each bump.
pub fn weak_residuals(traj: &Trajectory, p: &GrkrlwParams, bumps: &[TestBump]) -> Result<Vec<f64>> {
    bumps
        .iter()
        .map(|b| weak_integral(traj, p, b).map(f64::abs))
        .collect()
}

/// Largest `|weak_integral|` over the bumps (zero for an empty list).
pub fn weak_residual(traj: &Trajectory, p: &GrkrlwParams, bumps: &[TestBump]) -> Result<f64> {
    Ok(weak_residuals(traj, p, bumps)?.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyCertificate {
    pub max_residual: f64,
    pub per_bump: Vec<f64>,
    /// Largest `|int psi_x|` over the bumps: the contribution of the literal
    /// `+1` inside the flux, which vanishes for compactly supported `psi`.
    pub plus_one_contribution: f64,
}

impl SteadyCertificate {
    pub fn to_json(&self) -> String {
        to_json_compact(self)
    }
}

/// Profile form of the weak identity for `v = V(x - c t)`:
/// `int -c V L(psi_x) + (a V + b V^{m+1}/(m+1) + 1) psi_x + kappa V psi_xxx - mu V psi_xxxxx`,
/// the `+1` kept as written.
pub fn steady_certificate(
    v: &Field,
    c: f64,
    p: &GrkrlwParams,
    bumps: &[Bump1d],
) -> Result<SteadyCertificate> {
    let grid: &Grid = v.grid();
    let mp1 = (p.m + 1) as f64;
    let mut per_bump = Vec::with_capacity(bumps.len());
    let mut plus_one: f64 = 0.0;
    for b in bumps {
        b.check_inside(0.0, grid.domain_length(), "bump")?;
        let fine = refine(grid, v.values(), refinement(grid, b.radius))?;
        let fg = fine.grid();
        let h = fg.spacing();
        let j0 = ((b.center - b.radius) / h).floor() as usize;
        let j1 = (((b.center + b.radius) / h).ceil() as usize).min(fg.num_points() - 1);
        let mut acc = 0.0;
        let mut one = 0.0;
        for j in j0..=j1 {
            let x = fg.node(j);
            let vj = fine.values()[j];
            let (px, pxxx, pxxxxx) = (b.derivative(x, 1), b.derivative(x, 3), b.derivative(x, 5));
            let l_psi_x = px - p.alpha * pxxx + p.beta * pxxxxx;
            acc += -c * vj * l_psi_x
                + (p.a * vj + p.b / mp1 * vj.powi(p.m as i32 + 1) + 1.0) * px
                + p.kappa * vj * pxxx
                - p.mu * vj * pxxxxx;
            one += px;
        }
        per_bump.push((h * acc).abs());
        plus_one = plus_one.max((h * one).abs());
    }
    Ok(SteadyCertificate {
        max_residual: per_bump.iter().copied().fold(0.0, f64::max),
        per_bump,
        plus_one_contribution: plus_one,
    })
}
