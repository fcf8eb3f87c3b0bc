//! Low-tech reference computations: periodic finite differences and
//! exhaustive axis scans. Nothing here touches a Fourier transform.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spectral::Field;
use crate::trajectory::{ModelParams, Trajectory};

/// Accuracy order of the central stencils in `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FdScheme {
    Sixth,
    #[default]
    Eighth,
}

impl FdScheme {
    pub fn accuracy(self) -> usize {
        match self {
            FdScheme::Sixth => 6,
            FdScheme::Eighth => 8,
        }
    }

    /// Half-width of the central stencil for derivative `order`.
    pub fn half_width(self, order: usize) -> usize {
        order.div_ceil(2) - 1 + self.accuracy() / 2
    }

    /// Weights on offsets `-p..=p` for unit spacing.
    pub fn weights(self, order: usize) -> Vec<f64> {
        let p = self.half_width(order) as i64;
        let nodes: Vec<f64> = (-p..=p).map(|i| i as f64).collect();
        fornberg_weights(0.0, &nodes, order).swap_remove(order)
    }
}

/// Finite-difference weights for derivatives `0..=max_order` at `z` on the
/// given nodes (Fornberg's recursion).
pub fn fornberg_weights(z: f64, x: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Periodic central difference of order `order` on uniform spacing `h`.
pub fn fd_derivative(values: &[f64], h: f64, order: usize, scheme: FdScheme) -> Vec<f64> {
    let w = scheme.weights(order);
    let p = scheme.half_width(order) as i64;
    let n = values.len() as i64;
    let scale = h.powi(order as i32);
    (0..n)
        .map(|j| {
            w.iter()
                .enumerate()
                .map(|(i, wi)| wi * values[(j + i as i64 - p).rem_euclid(n) as usize])
                .sum::<f64>()
                / scale
        })
        .collect()
}

/// Fourth-order centered time derivative from five equally spaced snapshots.
pub fn fd_time_derivative(s: [&[f64]; 5], dt: f64) -> Vec<f64> {
    (0..s[0].len())
        .map(|j| (s[0][j] - 8.0 * s[1][j] + 8.0 * s[3][j] - s[4][j]) / (12.0 * dt))
        .collect()
}

/// `h * sum (v^2 + alpha v_x^2 + beta v_xx^2)` with eighth-order differences.
pub fn fd_energy(values: &[f64], h: f64, alpha: f64, beta: f64) -> f64 {
    let vx = fd_derivative(values, h, 1, FdScheme::Eighth);
    let vxx = fd_derivative(values, h, 2, FdScheme::Eighth);
    h * (0..values.len())
        .map(|j| values[j].powi(2) + alpha * vx[j].powi(2) + beta * vxx[j].powi(2))
        .sum::<f64>()
}

pub(crate) fn check_uniform(times: &[f64]) -> Result<f64> {
    let dt = times[1] - times[0];
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs() {
            return Err(invalid(format!(
                "snapshot times are not uniformly spaced ({} vs {dt})",
                w[1] - w[0]
            )));
        }
    }
    Ok(dt)
}

/// Pointwise residual of the governing equation at one interior time.
fn pointwise_residual(p: &ModelParams, v: &[f64], vt: &[f64], h: f64) -> Vec<f64> {
    let s = FdScheme::Eighth;
    let d = |f: &[f64], o: usize| fd_derivative(f, h, o, s);
    match p {
        ModelParams::Rkrlw(q) => {
            // L v_t + d_x(a v + b v^{m+1}/(m+1) + kappa v_xx - mu v_xxxx)
            let vt_xx = d(vt, 2);
            let vt_xxxx = d(vt, 4);
            let vx = d(v, 1);
            let vxxx = d(v, 3);
            let vxxxxx = d(v, 5);
            let pot: Vec<f64> = v
                .iter()
                .map(|x| x.powi(q.m as i32 + 1) / (q.m as f64 + 1.0))
                .collect();
            let potx = d(&pot, 1);
            (0..v.len())
                .map(|j| {
                    vt[j] - q.alpha * vt_xx[j] + q.beta * vt_xxxx[j] + q.a * vx[j] + q.b * potx[j]
                        + q.kappa * vxxx[j]
                        - q.mu * vxxxxx[j]
                })
                .collect()
        }
        ModelParams::Perturbed(q) => {
            let dv: Vec<Vec<f64>> = (0..=5)
                .map(|o| if o == 0 { v.to_vec() } else { d(v, o) })
                .collect();
            let vt_xx = d(vt, 2);
            let vt_xxxx = d(vt, 4);
            let pn: Vec<f64> = v.iter().map(|x| x.powi(q.n as i32)).collect();
            let pnx = d(&pn, 1);
            let pm: Vec<f64> = v
                .iter()
                .map(|x| x.powi(q.m as i32 + 1) / (q.m as f64 + 1.0))
                .collect();
            let pmx = d(&pm, 1);
            (0..v.len())
                .map(|j| {
                    let (u, u1, u2, u3, u4, u5) =
                        (dv[0][j], dv[1][j], dv[2][j], dv[3][j], dv[4][j], dv[5][j]);
                    let r = q.b(1) * u
                        + q.b(2) * u2
                        + q.b(3) * u1 * u2
                        + q.b(4) * pmx[j]
                        + q.b(5) * u * u3
                        + q.b(6) * u * u1 * u2
                        + q.b(7) * u1.powi(3)
                        + q.b(8) * u1 * u4
                        + q.b(9) * u2 * u3
                        + q.b(10) * u4
                        + q.b(11) * u5
                        + q.b(12) * u * u5;
                    vt[j] + q.a(1) * u1 + q.a(2) * u3 + q.a(3) * vt_xx[j] + q.a(4) * vt_xxxx[j]
                        + q.a(5) * pnx[j]
                        - r
                })
                .collect()
        }
    }
}

/// Max over interior space-time points of the finite-difference residual:
/// eighth order in `x`, fourth order in `t`.
pub fn fd_pde_residual(traj: &Trajectory, p: &ModelParams) -> Result<f64> {
    if traj.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "finite-difference residual needs at least 5 snapshots, got {}",
            traj.len()
        )));
    }
    let dt = check_uniform(traj.times())?;
    let h = traj.grid().spacing();
    let vals = traj.values();
    let mut worst: f64 = 0.0;
    for i in 2..traj.len() - 2 {
        let vt = fd_time_derivative(
            [&vals[i - 2], &vals[i - 1], &vals[i], &vals[i + 1], &vals[i + 2]],
            dt,
        );
        let r = pointwise_residual(p, &vals[i], &vt, h);
        worst = r.iter().fold(worst, |m, x| m.max(x.abs()));
    }
    Ok(worst)
}

/// `f(2 axis - x_j)` by exact index mapping when `2 axis / h` is an integer,
/// otherwise by 12-point periodic Lagrange interpolation.
pub fn reflect_fd(values: &[f64], h: f64, axis: f64) -> Vec<f64> {
    let n = values.len() as i64;
    let shift = 2.0 * axis / h;
    if (shift - shift.round()).abs() < 1e-9 {
        let s = shift.round() as i64;
        return (0..n).map(|j| values[(s - j).rem_euclid(n) as usize]).collect();
    }
    const HALF: i64 = 6;
    (0..n)
        .map(|j| {
            let u = shift - j as f64;
            let base = u.floor() as i64;
            let nodes: Vec<f64> = (base - HALF + 1..=base + HALF).map(|i| i as f64).collect();
            let w = fornberg_weights(u, &nodes, 0).swap_remove(0);
            nodes
                .iter()
                .zip(&w)
                .map(|(x, wi)| wi * values[(*x as i64).rem_euclid(n) as usize])
                .sum()
        })
        .collect()
}

fn reflection_defect(values: &[f64], h: f64, axis: f64, norm2: f64) -> f64 {
    let r = reflect_fd(values, h, axis);
    let d: f64 = values.iter().zip(&r).map(|(a, b)| (a - b).powi(2)).sum();
    (d / norm2).sqrt()
}

/// Exhaustive scan of `resolution` equally spaced axes on `[0, L/2)`, no refinement.
pub fn brute_axis_scan(f: &Field, resolution: usize) -> (f64, f64) {
    let h = f.grid().spacing();
    let half = 0.5 * f.grid().domain_length();
    let norm2: f64 = f.values().iter().map(|v| v * v).sum();
    if norm2 == 0.0 {
        return (0.0, 0.0);
    }
    (0..resolution.max(1))
        .map(|i| {
            let axis = half * i as f64 / resolution.max(1) as f64;
            (axis, reflection_defect(f.values(), h, axis, norm2))
        })
        .fold((0.0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best })
}
