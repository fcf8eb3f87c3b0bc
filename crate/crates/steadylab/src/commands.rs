//! The four subcommands. Each returns its report plus the auxiliary files
//! to write; nothing here touches the filesystem.

use std::f64::consts::PI;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::value::RawValue;
use steadylab_core::admissibility::{profile_frequency, residual_samples, single_frequency_profile};
use steadylab_core::classifier::classify_from_values;
use steadylab_core::io::{format_f64, to_json_compact};
use steadylab_core::oracle::fd_pde_residual;
use steadylab_core::perturbed::measure_speed;
use steadylab_core::rkrlw::{energy, mass};
use steadylab_core::weak::weak_residuals;
use steadylab_core::{
    check_conditions, classify, decomposition_residuals, track_axis, ConstraintCoefficients, Field,
    Grid, LambdaDot, ModelParams, PerturbedSolver, RkrlwSolver, TestBump, Trajectory, TrigProfile,
};

use crate::config::{EquationKind, MonitorSection, RunConfig, VerifySection};
use crate::error::CliError;
use crate::initial::{self, InitialProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Verdict {
    Satisfied,
    Violated,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Self::Satisfied
        } else {
            Self::Violated
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Satisfied => "satisfied",
            Self::Violated => "violated",
        }
    }
}

pub struct Outcome {
    pub name: &'static str,
    pub report: String,
    pub verdict: Option<Verdict>,
    /// `(file name, contents)`, always written.
    pub files: Vec<(String, String)>,
    /// Two-column gnuplot data, written on request.
    pub plots: Vec<(String, String)>,
}

pub struct Context {
    pub cfg: RunConfig,
    /// Directory relative file paths in the config resolve against.
    pub base: PathBuf,
}

fn raw(json: String) -> Box<RawValue> {
    RawValue::from_string(json).expect("core reports are valid JSON")
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'a str,
    verdict: Option<&'a str>,
    config: Box<RawValue>,
    result: T,
}

fn report<T: Serialize>(command: &str, cfg: &RunConfig, verdict: Option<Verdict>, result: T) -> String {
    let mut s = to_json_compact(&Report {
        command,
        verdict: verdict.map(Verdict::name),
        config: raw(to_json_compact(cfg)),
        result,
    });
    s.push('\n');
    s
}

fn columns(rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut s = String::new();
    for r in rows {
        let line: Vec<String> = r.into_iter().map(format_f64).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

fn field_columns(f: &Field) -> String {
    let g = f.grid();
    columns(f.values().iter().enumerate().map(|(j, v)| vec![g.node(j), *v]))
}

fn profile_columns(g: &TrigProfile, span: f64) -> String {
    columns((0..=512).map(|j| {
        let y = span * j as f64 / 512.0;
        vec![y, g.eval(y)]
    }))
}

impl Context {
    fn initial(&self, grid: Grid) -> Result<InitialProfile, CliError> {
        initial::build(&self.cfg.initial_data, grid, self.cfg.seed, &self.base)
    }

    fn run_model(&self, v0: &Field) -> Result<Trajectory, CliError> {
        let t = self.cfg.time()?;
        let grid = *v0.grid();
        let opts = self.cfg.step_options();
        let traj = match self.cfg.model()? {
            ModelParams::Rkrlw(p) => RkrlwSolver::new(p, grid, opts)?.simulate(v0, t.t_end, t.dt, t.snapshot_every)?,
            ModelParams::Perturbed(p) => {
                PerturbedSolver::new(p, grid, opts)?.simulate(v0, t.t_end, t.dt, t.snapshot_every)?
            }
        };
        Ok(traj)
    }
}

#[derive(Serialize)]
struct SimulateSummary {
    snapshots: usize,
    t_final: f64,
    max_abs_final: f64,
    mass_initial: f64,
    mass_final: f64,
    mass_drift: f64,
    energy_initial: Option<f64>,
    energy_final: Option<f64>,
    energy_drift: Option<f64>,
}

fn relative_drift(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        (b - a).abs()
    } else {
        ((b - a) / a).abs()
    }
}

pub fn simulate(ctx: &Context) -> Result<Outcome, CliError> {
    let grid = ctx.cfg.grid();
    let v0 = ctx.initial(grid)?.field(grid)?;
    let traj = ctx.run_model(&v0)?;
    let (first, last) = (traj.first(), traj.last());
    let energies = match ctx.cfg.model()? {
        ModelParams::Rkrlw(p) => Some(traj.snapshots().map(|f| energy(&f, &p)).collect::<Vec<_>>()),
        ModelParams::Perturbed(_) => None,
    };
    let masses: Vec<f64> = traj.snapshots().map(|f| mass(&f)).collect();
    let summary = SimulateSummary {
        snapshots: traj.len(),
        t_final: last.time(),
        max_abs_final: last.max_abs(),
        mass_initial: masses[0],
        mass_final: masses[masses.len() - 1],
        mass_drift: relative_drift(masses[0], masses[masses.len() - 1]),
        energy_initial: energies.as_ref().map(|e| e[0]),
        energy_final: energies.as_ref().map(|e| e[e.len() - 1]),
        energy_drift: energies.as_ref().map(|e| relative_drift(e[0], e[e.len() - 1])),
    };
    let invariants = columns(traj.times().iter().enumerate().map(|(i, &t)| {
        let mut row = vec![t, masses[i]];
        if let Some(e) = &energies {
            row.push(e[i]);
        }
        row
    }));
    Ok(Outcome {
        name: "simulate",
        report: report("simulate", &ctx.cfg, None, summary),
        verdict: None,
        files: vec![
            ("trajectory.csv".into(), traj.to_csv()),
            ("trajectory.json".into(), traj.to_json() + "\n"),
        ],
        plots: vec![
            ("initial.dat".into(), field_columns(&first)),
            ("final.dat".into(), field_columns(&last)),
            ("invariants.dat".into(), invariants),
        ],
    })
}

fn constraint_coefficients(cfg: &RunConfig) -> Result<ConstraintCoefficients, CliError> {
    let from_section = cfg.perturbed.as_ref().map(|p| (p.b[0], p.b[1], p.b[9]));
    let over = cfg.classify.clone().unwrap_or_default();
    let pick = |o: Option<f64>, i: usize, name: &str| -> Result<f64, CliError> {
        o.or(from_section.map(|b| [b.0, b.1, b.2][i])).ok_or_else(|| {
            CliError::Validation(format!(
                "classify.{name}: not given and no [perturbed] section to take it from"
            ))
        })
    };
    let cc = ConstraintCoefficients::new(
        pick(over.b1, 0, "b1")?,
        pick(over.b2, 1, "b2")?,
        pick(over.b10, 2, "b10")?,
    )?;
    Ok(cc)
}

pub fn classify_cmd(ctx: &Context) -> Result<Outcome, CliError> {
    let cc = constraint_coefficients(&ctx.cfg)?;
    let samples = ctx.cfg.classify.as_ref().and_then(|c| c.samples.clone());
    let rep = match samples {
        Some(values) => classify_from_values(&cc, values)
            .map_err(|e| CliError::Validation(format!("classify.samples: {e}")))?,
        None => {
            let v0 = ctx.initial(ctx.cfg.grid())?;
            classify(&cc, |y| v0.eval(y))?
        }
    };
    let verdict = Verdict::from_bool(rep.bounded && rep.symmetric == Some(true));
    let mut plots = Vec::new();
    if let Some(p) = &rep.profile {
        let fmin = p.terms.iter().map(|t| t.freq).fold(f64::INFINITY, f64::min);
        if fmin.is_finite() {
            plots.push(("profile.dat".into(), profile_columns(p, 4.0 * PI / fmin)));
        }
    }
    Ok(Outcome {
        name: "classify",
        report: report("classify", &ctx.cfg, Some(verdict), raw(rep.to_json())),
        verdict: Some(verdict),
        files: Vec::new(),
        plots,
    })
}

#[derive(Serialize)]
struct DynamicCheck {
    domain_length: f64,
    num_points: usize,
    dt: f64,
    t_end: f64,
    predicted_speed: f64,
    measured_speed: f64,
    axis_speed: f64,
    shape_defect: f64,
    relative_error: f64,
    axis_relative_error: f64,
    within_tolerance: bool,
}

#[derive(Serialize)]
struct VerifyResult {
    satisfied: bool,
    omega: f64,
    c3: f64,
    c4: f64,
    admissibility: Box<RawValue>,
    dynamic: Option<DynamicCheck>,
    dynamic_skipped: Option<String>,
}

fn dynamic_check(
    ctx: &Context,
    p: steadylab_core::PerturbedParams,
    c3: f64,
    c4: f64,
    omega: f64,
    speed: f64,
    vs: &VerifySection,
) -> Result<DynamicCheck, CliError> {
    let wavelength = 2.0 * PI / omega;
    let k = (ctx.cfg.grid.l / wavelength).round().max(1.0);
    let grid = Grid::new(k * wavelength, ctx.cfg.grid.n)?;
    let v0 = Field::from_fn(grid, 0.0, |x| c3 * (omega * x).cos() + c4 * (omega * x).sin())?;
    let solver = PerturbedSolver::new(p, grid, ctx.cfg.step_options())?;
    // 64 snapshots per wavelength transit keeps successive shifts unambiguous
    let transit = if speed.abs() > 1e-12 { wavelength / speed.abs() } else { wavelength };
    let interval = transit / 64.0;
    let dt_max = ctx.cfg.time.map_or_else(|| 0.5 * solver.suggest_dt(&v0), |t| t.dt);
    let every = (interval / dt_max).ceil().max(1.0);
    let dt = interval / every;
    let t_end = vs.periods * transit;
    let traj = solver.simulate(&v0, t_end, dt, every as usize)?;
    let est = measure_speed(&traj)?;
    let axis = track_axis(&traj)?;
    let rel = |x: f64| {
        if speed != 0.0 {
            ((x - speed) / speed).abs()
        } else {
            x.abs()
        }
    };
    let (e1, e2) = (rel(est.speed), rel(axis.axis_speed));
    Ok(DynamicCheck {
        domain_length: grid.domain_length(),
        num_points: grid.num_points(),
        dt,
        t_end,
        predicted_speed: speed,
        measured_speed: est.speed,
        axis_speed: axis.axis_speed,
        shape_defect: est.shape_defect,
        relative_error: e1,
        axis_relative_error: e2,
        within_tolerance: e1 < vs.speed_tol && e2 < vs.speed_tol,
    })
}

pub fn verify(ctx: &Context) -> Result<Outcome, CliError> {
    if ctx.cfg.equation != EquationKind::Perturbed {
        return Err(CliError::Validation(
            "equation: verify needs equation = \"perturbed\"".into(),
        ));
    }
    let p = ctx.cfg.perturbed_params()?;
    let vs = ctx.cfg.verify.clone().unwrap_or_default();
    let omega = match vs.omega {
        Some(w) => w,
        None => profile_frequency(&p)?,
    };
    let (c3, c4) = match (vs.c3, vs.c4) {
        (Some(a), Some(b)) => (a, b),
        (a, b) => {
            let v0 = ctx.initial(ctx.cfg.grid())?;
            (a.unwrap_or_else(|| v0.eval(0.0)), b.unwrap_or_else(|| v0.eval(0.5 * PI / omega)))
        }
    };
    let lambda = vs.lambda_dot.map_or(LambdaDot::Solve, LambdaDot::Supplied);
    let adm = check_conditions(&p, c3, c4, omega, lambda, vs.weight)?;
    let (dynamic, dynamic_skipped) = if !vs.dynamic {
        (None, Some("disabled in config".to_string()))
    } else if !adm.satisfied {
        (None, Some("conditions violated; the profile does not travel rigidly".to_string()))
    } else if c3 == 0.0 && c4 == 0.0 {
        (None, Some("zero profile".to_string()))
    } else {
        (Some(dynamic_check(ctx, p, c3, c4, omega, adm.lambda_dot, &vs)?), None)
    };
    let satisfied = adm.satisfied && dynamic.as_ref().is_none_or(|d| d.within_tolerance);
    let verdict = Verdict::from_bool(satisfied);
    let g = single_frequency_profile(c3, c4, omega)?;
    let span = 2.0 * PI / omega;
    let residual = columns(
        residual_samples(&g, &p, adm.lambda_dot, vs.weight, span, 512)
            .into_iter()
            .map(|(y, r)| vec![y, r]),
    );
    let result = VerifyResult {
        satisfied,
        omega,
        c3,
        c4,
        admissibility: raw(adm.to_json()),
        dynamic,
        dynamic_skipped,
    };
    Ok(Outcome {
        name: "verify",
        report: report("verify", &ctx.cfg, Some(verdict), result),
        verdict: Some(verdict),
        files: Vec::new(),
        plots: vec![
            ("profile.dat".into(), profile_columns(&g, span)),
            ("residual.dat".into(), residual),
        ],
    })
}

#[derive(Serialize)]
struct MonitorResult {
    symmetric_traveling: bool,
    axis_speed: f64,
    max_defect: f64,
    affine_deviation: f64,
    r_transport: f64,
    r_balance: f64,
    r_linear: Option<f64>,
    r_nonlinear: Option<f64>,
    fd_pde_residual: f64,
    weak_residual: Option<f64>,
    weak_bumps: Vec<TestBump>,
}

/// Bumps with support strictly inside the run, seeded.
fn random_bumps(traj: &Trajectory, count: usize, seed: u64) -> Vec<TestBump> {
    let times = traj.times();
    let (t0, t1) = (times[0], times[times.len() - 1]);
    let span = t1 - t0;
    let l = traj.grid().domain_length();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .filter_map(|_| {
            let rt = span * rng.gen_range(0.2..0.45);
            let ct = t0 + rt + (span - 2.0 * rt) * rng.gen_range(0.05..0.95);
            let rx = (l / 8.0) * rng.gen_range(0.5..1.0);
            let cx = rx + (l - 2.0 * rx) * rng.gen_range(0.05..0.95);
            TestBump::new(ct, cx, rt, rx).ok()
        })
        .collect()
}

pub fn monitor(ctx: &Context) -> Result<Outcome, CliError> {
    let ms: MonitorSection = ctx.cfg.monitor.unwrap_or_default();
    let grid = ctx.cfg.grid();
    let v0 = ctx.initial(grid)?.field(grid)?;
    let traj = ctx.run_model(&v0)?;
    let model = ctx.cfg.model()?;
    let sym = track_axis(&traj)?;
    let dec = decomposition_residuals(&traj, &sym, &model)?;
    let fd = fd_pde_residual(&traj, &model)?;
    let (weak, bumps) = match model {
        ModelParams::Rkrlw(p) => {
            let bumps = random_bumps(&traj, ms.bumps, ctx.cfg.seed);
            let w = weak_residuals(&traj, &p, &bumps)?.into_iter().fold(0.0, f64::max);
            (Some(w), bumps)
        }
        ModelParams::Perturbed(_) => (None, Vec::new()),
    };
    let ok = sym.max_defect() <= ms.defect_tol && sym.affine_deviation() <= ms.defect_tol;
    let verdict = Verdict::from_bool(ok);
    let result = MonitorResult {
        symmetric_traveling: ok,
        axis_speed: sym.axis_speed,
        max_defect: sym.max_defect(),
        affine_deviation: sym.affine_deviation(),
        r_transport: dec.r_transport,
        r_balance: dec.r_balance,
        r_linear: dec.r_linear,
        r_nonlinear: dec.r_nonlinear,
        fd_pde_residual: fd,
        weak_residual: weak,
        weak_bumps: bumps,
    };
    let axis = columns(sym.times().into_iter().zip(&sym.unwrapped_axes).map(|(t, a)| vec![t, *a]));
    let defect = columns(sym.defect_samples.iter().map(|(t, d)| vec![*t, *d]));
    Ok(Outcome {
        name: "monitor",
        report: report("monitor", &ctx.cfg, Some(verdict), result),
        verdict: Some(verdict),
        files: vec![
            ("symmetry.csv".into(), sym.to_csv()),
            ("symmetry_summary.json".into(), sym.summary_json() + "\n"),
        ],
        plots: vec![("axis.dat".into(), axis), ("defect.dat".into(), defect)],
    })
}
