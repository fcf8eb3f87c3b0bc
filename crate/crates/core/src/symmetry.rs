//! Symmetry axes of snapshots, their motion, and the residuals of the
//! transport / balance split that a symmetric solution must satisfy.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{format_f64, to_json_compact};
use crate::numerics::{golden_section_min, safeguarded_newton};
use crate::oracle::check_uniform;
use crate::perturbed::PerturbedSolver;
use crate::rkrlw::{RkrlwSolver, StepOptions};
use crate::spectral::{l2_norm, Field, Spectrum};
use crate::trajectory::{ModelParams, Trajectory};

/// Candidates whose defect is within this of the best count as ties.
const TIE_TOL: f64 = 1e-10;
/// Coarse minima refined per snapshot.
const MAX_REFINED: usize = 8;

/// Squared reflection mismatch `||v - R_lambda v||^2 / ||v||^2` evaluated mode
/// by mode, so a symmetric field gives a true zero rather than a cancellation.
struct AxisObjective<'a> {
    sp: &'a Spectrum,
    power: f64,
}

impl AxisObjective<'_> {
    fn defect_sq(&self, axis: f64) -> f64 {
        let g = self.sp.grid();
        let nyq = g.nyquist_index();
        let mut acc = 0.0;
        for (j, c) in self.sp.coeffs().iter().enumerate() {
            let k = g.wavenumber(j);
            if j == nyq {
                acc += (c.re * (1.0 - (2.0 * k * axis).cos())).powi(2);
            } else {
                let w = if j == 0 { 1.0 } else { 2.0 };
                let r = c.conj() * Complex64::from_polar(1.0, -2.0 * k * axis);
                acc += w * (c - r).norm_sqr();
            }
        }
        acc / self.power
    }

    /// Derivatives of `S(axis) = Re sum w c_k^2 e^{2ik axis}`, whose maxima are
    /// the minima of the defect (Nyquist term excluded; it only sets the floor).
    fn s_deriv(&self, axis: f64, order: u32) -> f64 {
        let g = self.sp.grid();
        let nyq = g.nyquist_index();
        let mut acc = 0.0;
        for (j, c) in self.sp.coeffs().iter().enumerate().take(nyq).skip(1) {
            let k = g.wavenumber(j);
            let e = Complex64::from_polar(1.0, 2.0 * k * axis);
            acc += 2.0 * (c * c * e * crate::spectral::ik_pow(2.0 * k, order)).re;
        }
        acc
    }
}

/// All axes in `[0, L/2)` tied for the minimal defect, sorted by coordinate.
fn axis_candidates(v: &Field) -> Result<Vec<(f64, f64)>> {
    if v.variance() <= 1e-14 {
        return Err(Error::DegenerateInput(format!(
            "field at t = {} is (nearly) constant; no symmetry axis",
            v.time()
        )));
    }
    let grid = *v.grid();
    let n = grid.num_points();
    let half = 0.5 * grid.domain_length();
    let sp = v.spectrum();
    let obj = AxisObjective {
        power: sp.power(),
        sp: &sp,
    };

    // Coarse scan: S at axis = x_i / 2 is an inverse transform of c_k^2.
    let sq: Vec<Complex64> = sp
        .coeffs()
        .iter()
        .enumerate()
        .map(|(j, c)| if j == grid.nyquist_index() { Complex64::new(0.0, 0.0) } else { c * c })
        .collect();
    let s = Spectrum::from_coeffs(grid, sq).expect("grid size").to_field(0.0);
    let s = s.values();
    let step = half / n as f64;
    let mut peaks: Vec<usize> = (0..n)
        .filter(|&i| s[i] >= s[(i + n - 1) % n] && s[i] >= s[(i + 1) % n])
        .collect();
    peaks.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    peaks.truncate(MAX_REFINED);

    let mut found: Vec<(f64, f64)> = peaks
        .into_iter()
        .map(|i| {
            let c = i as f64 * step;
            let (x, _) = golden_section_min(|a| obj.defect_sq(a), c - step, c + step, 1e-12);
            let x = safeguarded_newton(
                |a| obj.s_deriv(a, 1),
                |a| obj.s_deriv(a, 2),
                x - 1e-9 * half,
                x + 1e-9 * half,
                1e-15 * half,
            );
            let mut x = x.rem_euclid(half);
            if half - x < 1e-13 * half {
                x = 0.0;
            }
            (x, obj.defect_sq(x).max(0.0).sqrt())
        })
        .collect();
    let best = found.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    found.retain(|c| c.1 <= best + TIE_TOL);
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    found.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-9 * half);
    Ok(found)
}

/// Axis in `[0, L/2)` minimizing the relative L2 reflection mismatch, and that
/// mismatch. The defect is `L/2`-periodic in the axis; among tied minimizers
/// the smallest coordinate is returned.
pub fn detect_axis(v: &Field) -> Result<(f64, f64)> {
    Ok(axis_candidates(v)?[0])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryReport {
    /// `(t, axis mod L)`.
    pub axis_samples: Vec<(f64, f64)>,
    /// Axes made continuous in time by adding multiples of `L/2`.
    pub unwrapped_axes: Vec<f64>,
    pub defect_samples: Vec<(f64, f64)>,
    /// Second-order one-sided slope of the axis at the first snapshot.
    pub axis_speed: f64,
}

#[derive(Serialize)]
struct SymmetrySummary {
    axis_speed: f64,
    max_defect: f64,
}

impl SymmetryReport {
    pub fn times(&self) -> Vec<f64> {
        self.axis_samples.iter().map(|s| s.0).collect()
    }

    pub fn max_defect(&self) -> f64 {
        self.defect_samples.iter().map(|s| s.1).fold(0.0, f64::max)
    }

    /// Largest deviation of the unwrapped axis from its least-squares line.
    pub fn affine_deviation(&self) -> f64 {
        let t = self.times();
        let y = &self.unwrapped_axes;
        let n = t.len() as f64;
        let tm = t.iter().sum::<f64>() / n;
        let ym = y.iter().sum::<f64>() / n;
        let stt: f64 = t.iter().map(|ti| (ti - tm).powi(2)).sum();
        let sty: f64 = t.iter().zip(y).map(|(ti, yi)| (ti - tm) * (yi - ym)).sum();
        let slope = if stt > 0.0 { sty / stt } else { 0.0 };
        t.iter()
            .zip(y)
            .map(|(ti, yi)| (yi - ym - slope * (ti - tm)).abs())
            .fold(0.0, f64::max)
    }

    /// Header `t,axis,defect`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,axis,defect\n");
        for ((t, a), (_, d)) in self.axis_samples.iter().zip(&self.defect_samples) {
            s.push_str(&format!("{},{},{}\n", format_f64(*t), format_f64(*a), format_f64(*d)));
        }
        s
    }

    /// `{"axis_speed":..,"max_defect":..}`.
    pub fn summary_json(&self) -> String {
        to_json_compact(&SymmetrySummary {
            axis_speed: self.axis_speed,
            max_defect: self.max_defect(),
        })
    }
}

/// Derivative at `t[0]` of the quadratic through three samples.
fn one_sided_slope(t: [f64; 3], y: [f64; 3]) -> f64 {
    let [t0, t1, t2] = t;
    y[0] * (2.0 * t0 - t1 - t2) / ((t0 - t1) * (t0 - t2))
        + y[1] * (t0 - t2) / ((t1 - t0) * (t1 - t2))
        + y[2] * (t0 - t1) / ((t2 - t0) * (t2 - t1))
}

/// Axis of every snapshot, continued in time by choosing the candidate nearest
/// the previous one. A profile that moves more than `L/4` between snapshots
/// cannot be followed unambiguously.
pub fn track_axis(traj: &Trajectory) -> Result<SymmetryReport> {
    if traj.len() < 3 {
        return Err(Error::InsufficientData(
            "axis tracking needs at least three snapshots".into(),
        ));
    }
    let l = traj.grid().domain_length();
    let half = 0.5 * l;
    let mut report = SymmetryReport {
        axis_samples: Vec::with_capacity(traj.len()),
        unwrapped_axes: Vec::with_capacity(traj.len()),
        defect_samples: Vec::with_capacity(traj.len()),
        axis_speed: 0.0,
    };
    for f in traj.snapshots() {
        let cands = axis_candidates(&f)?;
        let (u, d) = match report.unwrapped_axes.last() {
            None => cands[0],
            Some(&prev) => cands
                .iter()
                .map(|&(a, d)| (a + ((prev - a) / half).round() * half, d))
                .fold((f64::NAN, f64::INFINITY), |best, c| {
                    if best.0.is_nan() || (c.0 - prev).abs() < (best.0 - prev).abs() {
                        c
                    } else {
                        best
                    }
                }),
        };
        report.axis_samples.push((f.time(), u.rem_euclid(l)));
        report.unwrapped_axes.push(u);
        report.defect_samples.push((f.time(), d));
    }
    let t = traj.times();
    let y = &report.unwrapped_axes;
    report.axis_speed = one_sided_slope([t[0], t[1], t[2]], [y[0], y[1], y[2]]);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecompositionResiduals {
    /// `max_t ||v_t + lambda' v_x||`.
    pub r_transport: f64,
    /// `max_t ||lambda' v_x - k * F||`, with `k * F` replaced by `-v_t` of the
    /// model for the perturbed equation.
    pub r_balance: f64,
    /// Perturbed only: `v_t + a3 v_xxt + a4 v_xxxxt + lambda' M v_x - (b1 v + b2 v_xx + b10 v_xxxx)`.
    pub r_linear: Option<f64>,
    /// Perturbed only: `lambda' M v_x` minus the remaining terms.
    pub r_nonlinear: Option<f64>,
}

/// Fourth-order centered difference of samples `y[i-2..=i+2]`.
fn centered4(y: [&[f64]; 5], dt: f64) -> Vec<f64> {
    (0..y[0].len())
        .map(|j| (y[0][j] - 8.0 * y[1][j] + 8.0 * y[3][j] - y[4][j]) / (12.0 * dt))
        .collect()
}

fn deriv(sp: &Spectrum, order: u32) -> Vec<f64> {
    sp.derivative(order).to_field(0.0).into_values()
}

enum Model {
    Rkrlw(RkrlwSolver),
    Perturbed(PerturbedSolver),
}

/// Residual norms of the symmetric-solution split at every interior snapshot
/// (indices `2..len-2`); the maxima are returned. Time derivatives of `v` and
/// of the axis use fourth-order centered differences.
pub fn decomposition_residuals(
    traj: &Trajectory,
    report: &SymmetryReport,
    params: &ModelParams,
) -> Result<DecompositionResiduals> {
    if traj.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "decomposition residuals need at least 5 snapshots, got {}",
            traj.len()
        )));
    }
    if report.unwrapped_axes.len() != traj.len()
        || report.axis_samples.len() != traj.len()
        || report
            .axis_samples
            .iter()
            .zip(traj.times())
            .any(|(s, t)| (s.0 - t).abs() > 1e-12 * t.abs().max(1.0))
    {
        return Err(crate::error::invalid(
            "symmetry report times do not match the trajectory",
        ));
    }
    let dt = check_uniform(traj.times())?;
    let grid = *traj.grid();
    let h = grid.spacing();
    let model = match params {
        ModelParams::Rkrlw(p) => Model::Rkrlw(RkrlwSolver::new(*p, grid, StepOptions::default())?),
        ModelParams::Perturbed(p) => {
            Model::Perturbed(PerturbedSolver::new(*p, grid, StepOptions::default())?)
        }
    };
    let vals = traj.values();
    let ax = &report.unwrapped_axes;
    let mut out = DecompositionResiduals {
        r_transport: 0.0,
        r_balance: 0.0,
        r_linear: None,
        r_nonlinear: None,
    };
    for i in 2..traj.len() - 2 {
        let vt = centered4(
            [&vals[i - 2], &vals[i - 1], &vals[i], &vals[i + 1], &vals[i + 2]],
            dt,
        );
        let lam = (ax[i - 2] - 8.0 * ax[i - 1] + 8.0 * ax[i + 1] - ax[i + 2]) / (12.0 * dt);
        let v = traj.snapshot(i);
        let sp = v.spectrum();
        let vx = deriv(&sp, 1);
        let model_vt = match &model {
            Model::Rkrlw(s) => s.rhs(&v),
            Model::Perturbed(s) => s.rhs(&v),
        };
        let transport: Vec<f64> = vt.iter().zip(&vx).map(|(a, b)| a + lam * b).collect();
        let balance: Vec<f64> = vx
            .iter()
            .zip(model_vt.values())
            .map(|(a, b)| lam * a + b)
            .collect();
        out.r_transport = out.r_transport.max(l2_norm(&transport, h));
        out.r_balance = out.r_balance.max(l2_norm(&balance, h));

        if let Model::Perturbed(s) = &model {
            let p = s.params();
            let vxx = deriv(&sp, 2);
            let vxxx = deriv(&sp, 3);
            let vxxxx = deriv(&sp, 4);
            let vxxxxx = deriv(&sp, 5);
            let vt_sp = Field::from_raw(grid, vt.clone(), 0.0).spectrum();
            let vtxx = deriv(&vt_sp, 2);
            let vtxxxx = deriv(&vt_sp, 4);
            let r = s.perturbation_r(&v);
            let transport_nl = s.transport_term(&v);
            let mut lin = Vec::with_capacity(vt.len());
            let mut nl = Vec::with_capacity(vt.len());
            for j in 0..vt.len() {
                let mvx = vx[j] + p.a(3) * vxxx[j] + p.a(4) * vxxxxx[j];
                let rlin = p.b(1) * v.values()[j] + p.b(2) * vxx[j] + p.b(10) * vxxxx[j];
                lin.push(vt[j] + p.a(3) * vtxx[j] + p.a(4) * vtxxxx[j] + lam * mvx - rlin);
                let rest = p.a(1) * vx[j] + p.a(2) * vxxx[j] + p.a(5) * transport_nl.values()[j]
                    - (r.values()[j] - rlin);
                nl.push(lam * mvx - rest);
            }
            out.r_linear = Some(out.r_linear.unwrap_or(0.0).max(l2_norm(&lin, h)));
            out.r_nonlinear = Some(out.r_nonlinear.unwrap_or(0.0).max(l2_norm(&nl, h)));
        }
    }
    Ok(out)
}
