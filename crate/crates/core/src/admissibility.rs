//! Whether the single-frequency profile `g = c3 cos(w y) + c4 sin(w y)`
//! solves the full nonlinear constraint
//! `ld (g' + a3 g''' + a4 g''''') = a1 g' + a2 g''' + a5 (g^n)' - (R(g) - b1 g - b2 g'' - b10 g'''')`,
//! checked both through the frequency-by-frequency condition sets and by
//! direct substitution.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classifier::{TermKind, TrigProfile, TrigTerm};
use crate::error::{invalid, Error, Result};
use crate::io::to_json_compact;
use crate::numerics::rational_approx;
use crate::perturbed::PerturbedParams;

/// Points per fundamental period used by [`nonlinear_residual`].
pub const RESIDUAL_SAMPLES: usize = 4096;
/// Relative tolerance of the algebraic condition checks.
pub const CONDITION_TOL: f64 = 1e-10;
/// Relative tolerance of the substitution oracle.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Weight carried by `a5` in front of `g^{n-1} g'`. The equation itself has
/// `(g^n)' = n g^{n-1} g'`; the printed condition sets were derived with
/// `n - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearWeight {
    #[default]
    Exact,
    AsPrinted,
}

impl NonlinearWeight {
    pub fn value(self, n: u32) -> f64 {
        match self {
            Self::Exact => n as f64,
            Self::AsPrinted => n as f64 - 1.0,
        }
    }
}

/// `max(1, |a|, |b|, |c3|, |c4|, w^4)`.
pub fn tolerance_scale(p: &PerturbedParams, c3: f64, c4: f64, omega: f64) -> f64 {
    p.a.iter()
        .chain(p.b.iter())
        .chain([c3, c4].iter())
        .fold(1.0_f64, |m, x| m.max(x.abs()))
        .max(omega.powi(4))
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(invalid(format!("omega must be positive, got {omega}")));
    }
    Ok(())
}

/// `1 - a3 w^2 + a4 w^4`, the symbol of `M` at `w`.
fn m_factor(p: &PerturbedParams, omega: f64) -> f64 {
    let w2 = omega * omega;
    1.0 - p.a(3) * w2 + p.a(4) * w2 * w2
}

/// `-a1 + a2 w^2 + b11 w^4 + (3 b7 - b6) w^2 r^2 / 4`.
fn q_factor(p: &PerturbedParams, r2: f64, omega: f64) -> f64 {
    let w2 = omega * omega;
    -p.a(1) + p.a(2) * w2 + p.b(11) * w2 * w2 + 0.25 * w2 * (3.0 * p.b(7) - p.b(6)) * r2
}

/// `A1..A6`.
pub fn compute_a(p: &PerturbedParams, c3: f64, c4: f64, omega: f64, lambda_dot: f64) -> [f64; 6] {
    let r2 = c3 * c3 + c4 * c4;
    let bracket = q_factor(p, r2, omega) + lambda_dot * m_factor(p, omega);
    let k = p.b(3) + p.b(5) - (p.b(8) + p.b(9) + p.b(12)) * omega * omega;
    let s = p.b(6) + p.b(7);
    [
        c3 * bracket,
        -c4 * bracket,
        (c4 * c4 - c3 * c3) * k,
        2.0 * c3 * c4 * k,
        c3 * s * (3.0 * c4 * c4 - c3 * c3),
        c4 * s * (3.0 * c3 * c3 - c4 * c4),
    ]
}

/// Coefficient of `sin(k w y)` or `cos(k w y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BTerm {
    pub multiple: u32,
    pub kind: TermKind,
    pub coeff: f64,
}

/// `(sin_k, cos_k)` for `k = 0..=K` of `g^k g'`, exactly, via
/// `g^k g' = (g^{k+1})' / (k+1)` and `g = Re(C e^{i w y})`, `C = c3 - i c4`.
fn power_times_derivative(c3: f64, c4: f64, omega: f64, k: u32) -> Vec<(f64, f64)> {
    let top = k + 1;
    let mut out = vec![(0.0, 0.0); top as usize + 1];
    let c = Complex64::new(c3, -c4);
    let cbar = c.conj();
    let mut binom = 1.0;
    let norm = 0.5_f64.powi(top as i32);
    for j in 0..=top {
        let q = 2 * j as i64 - top as i64;
        if q > 0 {
            let z = 2.0 * norm * binom * c.powu(j) * cbar.powu(top - j);
            let w = Complex64::i() * (q as f64 * omega) * z / top as f64;
            let slot = &mut out[q as usize];
            slot.0 -= w.im;
            slot.1 += w.re;
        }
        binom = binom * (top - j) as f64 / (j + 1) as f64;
    }
    out
}

/// Frequency content of `B = a5 w g^{n-1} g' - b4 g^m g'`, computed exactly.
pub fn compute_b(
    p: &PerturbedParams,
    c3: f64,
    c4: f64,
    omega: f64,
    weight: NonlinearWeight,
) -> Vec<BTerm> {
    let kmax = p.n.max(p.m + 1) as usize;
    let mut acc = vec![(0.0, 0.0); kmax + 1];
    let a5 = p.a(5) * weight.value(p.n);
    for (scale, k) in [(a5, p.n - 1), (-p.b(4), p.m)] {
        for (q, (s, c)) in power_times_derivative(c3, c4, omega, k).into_iter().enumerate() {
            acc[q].0 += scale * s;
            acc[q].1 += scale * c;
        }
    }
    acc.into_iter()
        .enumerate()
        .skip(1)
        .flat_map(|(k, (s, c))| {
            [
                BTerm {
                    multiple: k as u32,
                    kind: TermKind::Sin,
                    coeff: s,
                },
                BTerm {
                    multiple: k as u32,
                    kind: TermKind::Cos,
                    coeff: c,
                },
            ]
        })
        .collect()
}

fn heaviside(x: i64) -> f64 {
    if x >= 0 {
        1.0
    } else {
        0.0
    }
}

/// Highest-frequency part of `B` as printed, gated by `H(n-m-1)` and
/// `H(m-n+1)`. Reported for comparison only; [`compute_b`] is authoritative.
/// Agrees with it whenever `c4 = 0`.
pub fn printed_high_terms(
    p: &PerturbedParams,
    c3: f64,
    c4: f64,
    omega: f64,
    weight: NonlinearWeight,
) -> Vec<BTerm> {
    let (m, n) = (p.m as i64, p.n as i64);
    let mut out = Vec::new();
    let mut push = |multiple: i64, s: f64, c: f64| {
        out.push(BTerm {
            multiple: multiple as u32,
            kind: TermKind::Sin,
            coeff: s,
        });
        out.push(BTerm {
            multiple: multiple as u32,
            kind: TermKind::Cos,
            coeff: c,
        });
    };
    let ga = heaviside(n - m - 1);
    if ga > 0.0 {
        let pre = p.a(5) * weight.value(p.n) / 2f64.powi(n as i32 - 1) * omega;
        let (mut s, mut c) = (-c3.powi(n as i32), c3.powi(n as i32 - 1) * c4);
        // delta1 and delta2
        let d1 = c4.powi(n as i32 - 1) * c3;
        let d2 = c4.powi(n as i32);
        if n % 2 == 0 {
            c -= d1 * if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
            s -= d2;
        } else {
            s -= d1 * if ((n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            c -= d2;
        }
        push(n, pre * s, pre * c);
    }
    let gb = heaviside(m - n + 1);
    if gb > 0.0 {
        let pre = -p.b(4) / 2f64.powi(m as i32) * omega;
        let (mut s, mut c) = (-c3.powi(m as i32 + 1), c3.powi(m as i32) * c4);
        let d3 = c4.powi(m as i32) * c3;
        let d4 = c4.powi(m as i32 + 1);
        if m % 2 == 1 {
            c -= d3 * if ((m + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            s -= d4;
        } else {
            s -= d3 * if (m / 2) % 2 == 0 { 1.0 } else { -1.0 };
            c -= d4;
        }
        push(m + 1, pre * s, pre * c);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyDecomposition {
    pub a: [f64; 6],
    pub omega: f64,
    pub b_terms: Vec<BTerm>,
    /// Top-frequency terms of `B` as printed; present when `m >= 3` or `n >= 4`.
    pub b_high_printed: Option<Vec<BTerm>>,
}

impl FrequencyDecomposition {
    pub fn new(
        p: &PerturbedParams,
        c3: f64,
        c4: f64,
        omega: f64,
        lambda_dot: f64,
        weight: NonlinearWeight,
    ) -> Result<Self> {
        check_omega(omega)?;
        Ok(Self {
            a: compute_a(p, c3, c4, omega, lambda_dot),
            omega,
            b_terms: compute_b(p, c3, c4, omega, weight),
            b_high_printed: (p.m >= 3 || p.n >= 4)
                .then(|| printed_high_terms(p, c3, c4, omega, weight)),
        })
    }

    /// `(sin, cos)` coefficient of frequency `k w` in
    /// `w[A1 sin + A2 cos] + w^3/2 [A3 sin2 + A4 cos2] + w^3/4 [A5 sin3 + A6 cos3] + B`.
    pub fn assembled(&self, k: u32) -> (f64, f64) {
        let w = self.omega;
        let (mut s, mut c) = match k {
            1 => (w * self.a[0], w * self.a[1]),
            2 => (0.5 * w.powi(3) * self.a[2], 0.5 * w.powi(3) * self.a[3]),
            3 => (0.25 * w.powi(3) * self.a[4], 0.25 * w.powi(3) * self.a[5]),
            _ => (0.0, 0.0),
        };
        for t in self.b_terms.iter().filter(|t| t.multiple == k) {
            match t.kind {
                TermKind::Sin => s += t.coeff,
                TermKind::Cos => c += t.coeff,
            }
        }
        (s, c)
    }
}

/// Which of the enumerated condition sets applies to `(m, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdmissibilityCase {
    /// `m >= 3`, `n >= 4`, `m != n - 1`.
    HighDistinct,
    /// `n >= 4`, `m = n - 1`.
    HighMatched,
    M1N2,
    M2N2,
    M1N3,
    M2N3,
    /// Not covered by a closed condition set; decided by substitution only.
    OutsideEnumerated,
}

impl AdmissibilityCase {
    pub fn of(m: u32, n: u32) -> Self {
        match (m, n) {
            (1, 2) => Self::M1N2,
            (2, 2) => Self::M2N2,
            (1, 3) => Self::M1N3,
            (2, 3) => Self::M2N3,
            _ if n >= 4 && m == n - 1 => Self::HighMatched,
            _ if m >= 3 && n >= 4 => Self::HighDistinct,
            _ => Self::OutsideEnumerated,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::HighDistinct => "1",
            Self::HighMatched => "2",
            Self::M1N2 => "3",
            Self::M2N2 => "4",
            Self::M1N3 => "5",
            Self::M2N3 => "6",
            Self::OutsideEnumerated => "outside_enumerated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equation {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

/// Frequency-one coefficient of `B`, as a multiple of `g'`: the `e^{i w y}`
/// part of `g^{k+1}` is `2^{-k} C(k+1, k/2+1) r^k g` for even `k`, else zero.
fn first_harmonic_factor(k: u32, r2: f64) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let top = k + 1;
    let j = k / 2 + 1;
    let mut binom = 1.0;
    for i in 0..j {
        binom = binom * (top - i) as f64 / (i + 1) as f64;
    }
    binom * 0.5_f64.powi(k as i32) * r2.powi(k as i32 / 2) / top as f64
}

/// The `ld` making the frequency-one coefficient vanish: there the residual
/// is `(beta - Q - ld M(w)) g'` with `beta` from `B`.
pub fn solve_lambda_dot(
    p: &PerturbedParams,
    c3: f64,
    c4: f64,
    omega: f64,
    weight: NonlinearWeight,
) -> Result<f64> {
    check_omega(omega)?;
    let r2 = c3 * c3 + c4 * c4;
    let den = m_factor(p, omega);
    let w2 = omega * omega;
    let den_scale = 1.0_f64.max((p.a(3) * w2).abs()).max((p.a(4) * w2 * w2).abs());
    if den.abs() <= 1e-14 * den_scale {
        return Err(Error::IndeterminateSpeed(format!(
            "1 - a3 w^2 + a4 w^4 vanishes at w = {omega}"
        )));
    }
    let beta = p.a(5) * weight.value(p.n) * first_harmonic_factor(p.n - 1, r2)
        - p.b(4) * first_harmonic_factor(p.m, r2);
    Ok((beta - q_factor(p, r2, omega)) / den)
}

/// `[(b6 - 3 b7) w^2 r^2/4 + a1 - a2 w^2 - b11 w^4] / (a4 w^4 - a3 w^2 + 1)`.
pub fn wave_speed(p: &PerturbedParams, c3: f64, c4: f64, omega: f64) -> Result<f64> {
    check_omega(omega)?;
    let r2 = c3 * c3 + c4 * c4;
    if r2 == 0.0 {
        return Err(invalid("the speed formula needs c3^2 + c4^2 != 0"));
    }
    let den = m_factor(p, omega);
    if den == 0.0 {
        return Err(Error::IndeterminateSpeed(format!(
            "1 - a3 w^2 + a4 w^4 vanishes at w = {omega}"
        )));
    }
    Ok(-q_factor(p, r2, omega) / den)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaDot {
    Supplied(f64),
    /// Solved from the frequency-one equations.
    Solve,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyProjection {
    pub multiple: u32,
    pub freq: f64,
    pub sin: f64,
    pub cos: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonlinearResidual {
    pub max: f64,
    pub per_frequency: Vec<FrequencyProjection>,
}

impl NonlinearResidual {
    pub fn projection(&self, k: u32) -> Option<&FrequencyProjection> {
        self.per_frequency.iter().find(|f| f.multiple == k)
    }
}

/// Pointwise residual, `RHS - LHS` of the nonlinear constraint.
fn residual_at(g: &TrigProfile, p: &PerturbedParams, lambda_dot: f64, weight: NonlinearWeight, y: f64) -> f64 {
    let d: Vec<f64> = (0..=5).map(|k| g.derivative(y, k)).collect();
    let (v, vx, vxx, vxxx, vxxxx, vxxxxx) = (d[0], d[1], d[2], d[3], d[4], d[5]);
    let b = |i| p.b(i);
    let r_nonlinear = b(3) * vx * vxx
        + b(4) * v.powi(p.m as i32) * vx
        + b(5) * v * vxxx
        + b(6) * v * vx * vxx
        + b(7) * vx.powi(3)
        + b(8) * vx * vxxxx
        + b(9) * vxx * vxxx
        + b(11) * vxxxxx
        + b(12) * v * vxxxxx;
    let rhs = p.a(1) * vx
        + p.a(2) * vxxx
        + p.a(5) * weight.value(p.n) * v.powi(p.n as i32 - 1) * vx
        - r_nonlinear;
    let lhs = lambda_dot * (vx + p.a(3) * vxxx + p.a(4) * vxxxxx);
    rhs - lhs
}

/// `(y, residual)` at `count` equispaced points of `[0, span)`.
pub fn residual_samples(
    g: &TrigProfile,
    p: &PerturbedParams,
    lambda_dot: f64,
    weight: NonlinearWeight,
    span: f64,
    count: usize,
) -> Vec<(f64, f64)> {
    (0..count)
        .map(|j| {
            let y = span * j as f64 / count as f64;
            (y, residual_at(g, p, lambda_dot, weight, y))
        })
        .collect()
}

/// Fundamental frequency of a periodic profile.
fn fundamental(g: &TrigProfile) -> Result<f64> {
    let hs = g.harmonics();
    let Some(first) = hs.first() else {
        return Ok(1.0);
    };
    let mut f = first.freq;
    for h in &hs[1..] {
        // num/den in lowest terms puts the common fundamental at f/den
        let (_, den) = rational_approx(h.freq / f, 1000, 1e-12)
            .ok_or_else(|| invalid("profile frequencies are incommensurate; it is not periodic"))?;
        f /= den as f64;
    }
    Ok(f)
}

/// Substitutes `g` into the nonlinear constraint with exact derivatives,
/// samples one period at 4096 points and projects onto `k F` for
/// `k = 0..=max(n, m+1) f_max / F`, `F` the fundamental frequency.
pub fn nonlinear_residual(
    g: &TrigProfile,
    p: &PerturbedParams,
    lambda_dot: f64,
    weight: NonlinearWeight,
) -> Result<NonlinearResidual> {
    let f = fundamental(g)?;
    let fmax = g.harmonics().last().map_or(f, |h| h.freq);
    let kmax = (p.n.max(p.m + 1) as f64 * fmax / f).round() as u32;
    let period = 2.0 * PI / f;
    let n = RESIDUAL_SAMPLES;
    let values: Vec<f64> = (0..n)
        .map(|j| residual_at(g, p, lambda_dot, weight, period * j as f64 / n as f64))
        .collect();
    let max = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let per_frequency = (0..=kmax)
        .map(|k| {
            let (mut s, mut c) = (0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                let phase = 2.0 * PI * ((k as usize * j) % n) as f64 / n as f64;
                s += v * phase.sin();
                c += v * phase.cos();
            }
            let norm = if k == 0 { 1.0 } else { 2.0 } / n as f64;
            FrequencyProjection {
                multiple: k,
                freq: k as f64 * f,
                sin: s * norm,
                cos: c * norm,
            }
        })
        .collect();
    Ok(NonlinearResidual { max, per_frequency })
}

pub fn single_frequency_profile(c3: f64, c4: f64, omega: f64) -> Result<TrigProfile> {
    check_omega(omega)?;
    TrigProfile::new(vec![TrigTerm::cos(c3, omega), TrigTerm::sin(c4, omega)], 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub case: AdmissibilityCase,
    pub equations: Vec<Equation>,
    pub lambda_dot: f64,
    pub wave_speed: Option<f64>,
    pub residual: NonlinearResidual,
    pub tolerance: f64,
    pub satisfied: bool,
    pub decomposition: FrequencyDecomposition,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    case: &'a str,
    verdict: &'a str,
    equations: &'a [Equation],
    lambda_dot: f64,
    wave_speed: Option<f64>,
    residual: &'a NonlinearResidual,
    warnings: &'a [String],
}

impl AdmissibilityReport {
    pub fn verdict(&self) -> &'static str {
        if self.satisfied {
            "satisfied"
        } else {
            "violated"
        }
    }

    pub fn to_json(&self) -> String {
        to_json_compact(&ReportJson {
            case: self.case.name(),
            verdict: self.verdict(),
            equations: &self.equations,
            lambda_dot: self.lambda_dot,
            wave_speed: self.wave_speed,
            residual: &self.residual,
            warnings: &self.warnings,
        })
    }
}

fn condition_set(
    case: AdmissibilityCase,
    p: &PerturbedParams,
    c3: f64,
    c4: f64,
    omega: f64,
    a: &[f64; 6],
    weight: NonlinearWeight,
) -> Vec<(String, f64)> {
    let n = p.n as f64;
    let (a5, b4) = (p.a(5), p.b(4));
    // a5 as it enters the printed sets, which assume weight n - 1
    let e = a5 * weight.value(p.n) / (n - 1.0);
    let w2 = omega * omega;
    let r2 = c3 * c3 + c4 * c4;
    let d2 = c4 * c4 - c3 * c3;
    let x = 2.0 * c3 * c4;
    let t3 = c3 * (3.0 * c4 * c4 - c3 * c3);
    let t4 = c4 * (3.0 * c3 * c3 - c4 * c4);
    let all_a = || (0..6).map(|i| (format!("A{}", i + 1), a[i])).collect::<Vec<_>>();
    let named = |v: Vec<(&str, f64)>| -> Vec<(String, f64)> {
        v.into_iter().map(|(s, x)| (s.to_string(), x)).collect()
    };
    match case {
        AdmissibilityCase::HighDistinct => {
            let mut v = named(vec![("a5", a5), ("b4", b4)]);
            v.extend(all_a());
            v
        }
        AdmissibilityCase::HighMatched => {
            let mut v = named(vec![("a5 (n-1) - b4", e * (n - 1.0) - b4)]);
            v.extend(all_a());
            v
        }
        AdmissibilityCase::M1N2 => named(vec![
            ("A1", a[0]),
            ("A2", a[1]),
            ("(a5-b4)(c4^2-c3^2) + w^2 A3", (e - b4) * d2 + w2 * a[2]),
            ("A5", a[4]),
            ("A6", a[5]),
            ("2(a5-b4)c3c4 + w^2 A4", (e - b4) * x + w2 * a[3]),
        ]),
        AdmissibilityCase::M2N2 => named(vec![
            ("4A1 + b4 c3 r^2", 4.0 * a[0] + b4 * c3 * r2),
            ("4A2 - b4 c4 r^2", 4.0 * a[1] - b4 * c4 * r2),
            ("w^2 A3 + a5(c4^2-c3^2)", w2 * a[2] + e * d2),
            ("w^2 A4 + 2a5 c3c4", w2 * a[3] + e * x),
            ("w^2 A5 - b4 c3(3c4^2-c3^2)", w2 * a[4] - b4 * t3),
            ("w^2 A6 - b4 c4(3c3^2-c4^2)", w2 * a[5] - b4 * t4),
        ]),
        AdmissibilityCase::M1N3 => named(vec![
            ("2A1 - a5 c3 r^2", 2.0 * a[0] - e * c3 * r2),
            ("2A2 + a5 c4 r^2", 2.0 * a[1] + e * c4 * r2),
            ("w^2 A3 - b4(c4^2-c3^2)", w2 * a[2] - b4 * d2),
            ("w^2 A4 - 2b4 c3c4", w2 * a[3] - b4 * x),
            ("w^2 A5 + 2a5 c3(3c4^2-c3^2)", w2 * a[4] + 2.0 * e * t3),
            ("w^2 A6 + 2a5 c4(3c3^2-c4^2)", w2 * a[5] + 2.0 * e * t4),
        ]),
        AdmissibilityCase::M2N3 => {
            let f = 2.0 * e - b4;
            named(vec![
                ("4A1 - c3(2a5-b4)r^2", 4.0 * a[0] - c3 * f * r2),
                ("4A2 + c4(2a5-b4)r^2", 4.0 * a[1] + c4 * f * r2),
                ("A3", a[2]),
                ("w^2 A5 + c3(2a5-b4)(3c4^2-c3^2)", w2 * a[4] + f * t3),
                ("w^2 A6 + c4(2a5-b4)(3c3^2-c4^2)", w2 * a[5] + f * t4),
                ("A4", a[3]),
            ])
        }
        AdmissibilityCase::OutsideEnumerated => Vec::new(),
    }
}

/// Evaluates the condition set for `(m, n)` at tolerance
/// `1e-10 max(1, |a|, |b|, |c|, w^4)` and the substitution oracle alongside.
/// Outside the enumerated sets the verdict is the oracle's
/// (`max residual < 1e-8` times the same scale).
pub fn check_conditions(
    p: &PerturbedParams,
    c3: f64,
    c4: f64,
    omega: f64,
    lambda: LambdaDot,
    weight: NonlinearWeight,
) -> Result<AdmissibilityReport> {
    p.validate()?;
    check_omega(omega)?;
    if !(c3.is_finite() && c4.is_finite()) {
        return Err(invalid("c3 and c4 must be finite"));
    }
    let lambda_dot = match lambda {
        LambdaDot::Supplied(l) if l.is_finite() => l,
        LambdaDot::Supplied(l) => return Err(invalid(format!("lambda_dot must be finite, got {l}"))),
        LambdaDot::Solve => solve_lambda_dot(p, c3, c4, omega, weight)?,
    };
    let case = AdmissibilityCase::of(p.m, p.n);
    let scale = tolerance_scale(p, c3, c4, omega);
    let tol = CONDITION_TOL * scale;
    let decomposition = FrequencyDecomposition::new(p, c3, c4, omega, lambda_dot, weight)?;
    let equations: Vec<Equation> = condition_set(case, p, c3, c4, omega, &decomposition.a, weight)
        .into_iter()
        .map(|(name, lhs)| Equation {
            name,
            lhs,
            rhs: 0.0,
            satisfied: lhs.abs() <= tol,
        })
        .collect();
    let profile = single_frequency_profile(c3, c4, omega)?;
    let residual = nonlinear_residual(&profile, p, lambda_dot, weight)?;
    let mut warnings = Vec::new();
    let satisfied = if case == AdmissibilityCase::OutsideEnumerated {
        warnings.push(format!(
            "(m, n) = ({}, {}) has no closed condition set; verdict from direct substitution",
            p.m, p.n
        ));
        residual.max < RESIDUAL_TOL * scale
    } else {
        equations.iter().all(|e| e.satisfied)
    };
    if weight == NonlinearWeight::AsPrinted {
        warnings.push("a5 weighted by n - 1 instead of n".into());
    }
    Ok(AdmissibilityReport {
        case,
        equations,
        lambda_dot,
        wave_speed: wave_speed(p, c3, c4, omega).ok(),
        residual,
        tolerance: tol,
        satisfied,
        decomposition,
        warnings,
    })
}

/// `sqrt(-z-)` for coefficients in case I(c), the frequency of the
/// single-frequency profile.
pub fn profile_frequency(p: &PerturbedParams) -> Result<f64> {
    use crate::classifier::{classify_roots, CaseTag, ConstraintCoefficients, ZRoots};
    let rs = classify_roots(&ConstraintCoefficients::from_perturbed(p))?;
    match (rs.case_tag, rs.z_roots) {
        (CaseTag::IcOppositeSigns, ZRoots::RealPair { minus, .. }) => Ok((-minus).sqrt()),
        (tag, _) => Err(Error::HypothesisViolation(format!(
            "single-frequency profile needs b1 b10 < 0 (case I(c)), got {}",
            tag.name()
        ))),
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn params(m: u32, n: u32, rng: &mut impl Rng) -> PerturbedParams {
        let mut a = [0.0; 5];
        let mut b = [0.0; 12];
        for x in a.iter_mut().chain(b.iter_mut()) {
            *x = rng.gen_range(-1.0..1.0);
        }
        PerturbedParams::new(a, b, m, n).unwrap()
    }

    /// Adjusts `b3`, `b7` (and `a5`, `b4` when needed) so the condition set
    /// for `(m, n)` holds.
    pub(crate) fn make_admissible(p: &mut PerturbedParams, omega: f64, weight: NonlinearWeight) {
        let w2 = omega * omega;
        let case = AdmissibilityCase::of(p.m, p.n);
        match case {
            AdmissibilityCase::HighDistinct => {
                p.a[4] = 0.0;
                p.b[3] = 0.0;
            }
            AdmissibilityCase::HighMatched => p.b[3] = p.a[4] * weight.value(p.n),
            _ => {}
        }
        let e = p.a[4] * weight.value(p.n) / (p.n as f64 - 1.0);
        let b4 = p.b[3];
        // target values of K = b3 + b5 - (b8 + b9 + b12) w^2 and S = b6 + b7
        let (k, s) = match case {
            AdmissibilityCase::M1N2 => ((b4 - e) / w2, 0.0),
            AdmissibilityCase::M2N2 => (-e / w2, b4 / w2),
            AdmissibilityCase::M1N3 => (b4 / w2, -2.0 * e / w2),
            AdmissibilityCase::M2N3 => (0.0, -(2.0 * e - b4) / w2),
            _ => (0.0, 0.0),
        };
        p.b[2] = k - p.b[4] + (p.b[7] + p.b[8] + p.b[11]) * w2;
        p.b[6] = s - p.b[5];
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / 1f64.max(b.abs())
    }

    #[test]
    fn trivial_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = params(1, 2, &mut rng);
        assert_eq!(compute_a(&p, 0.0, 0.0, 1.3, 0.4), [0.0; 6]);

        let mut q = p;
        let w: f64 = 1.3;
        q.b[2] = (q.b[7] + q.b[8] + q.b[11]) * w * w - q.b[4];
        let a = compute_a(&q, 0.7, -0.2, w, 0.1);
        assert!(a[2].abs() < 1e-15 && a[3].abs() < 1e-15);

        q.b[6] = -q.b[5];
        let a = compute_a(&q, 0.7, -0.2, w, 0.1);
        assert_eq!((a[4], a[5]), (0.0, 0.0));

        let z = single_frequency_profile(0.0, 0.0, 1.0).unwrap();
        let r = nonlinear_residual(&z, &p, 0.3, NonlinearWeight::Exact).unwrap();
        assert_eq!(r.max, 0.0);
    }

    #[test]
    fn shared_factor_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let p = params(2, 3, &mut rng);
            let (c3, c4, w) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.3..2.0));
            let a = compute_a(&p, c3, c4, w, rng.gen_range(-1.0..1.0));
            assert!((a[2] * 2.0 * c3 * c4 - a[3] * (c4 * c4 - c3 * c3)).abs() < 1e-14);
        }
    }

    #[test]
    fn b_vanishes_on_matched_prefactors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut p = params(1, 2, &mut rng);
        p.b[3] = p.a[4] * 1.0;
        let b = compute_b(&p, 0.6, 0.3, 1.1, NonlinearWeight::AsPrinted);
        assert!(b.iter().all(|t| t.coeff.abs() < 1e-15));

        let mut p = params(2, 3, &mut rng);
        p.b[3] = 2.0 * p.a[4];
        let b = compute_b(&p, 0.6, 0.3, 1.1, NonlinearWeight::AsPrinted);
        assert!(b.iter().all(|t| t.coeff.abs() < 1e-15));
        // with the exact weight the cancellation needs 3 a5 = b4
        p.b[3] = 3.0 * p.a[4];
        let b = compute_b(&p, 0.6, 0.3, 1.1, NonlinearWeight::Exact);
        assert!(b.iter().all(|t| t.coeff.abs() < 1e-15));
    }

    #[test]
    fn printed_low_b_terms_match_the_expansion() {
        // B_{1,2}, B_{2,2}, B_{1,3}, B_{2,3} as printed, weight n - 1
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (m, n) in [(1, 2), (2, 2), (1, 3), (2, 3)] {
            let p = params(m, n, &mut rng);
            let (c3, c4, w) = (0.8, -0.45, 1.7);
            let (a5, b4) = (p.a(5), p.b(4));
            let r2 = c3 * c3 + c4 * c4;
            let two = (c3 * c4, 0.5 * (c4 * c4 - c3 * c3)); // (cos2, sin2)
            let three = (c3 * (3.0 * c4 * c4 - c3 * c3), c4 * (3.0 * c3 * c3 - c4 * c4)); // (sin3, cos3)
            let one = (c3 * r2, c4 * r2); // (-sin1, cos1)
            let (k2, k3, k1) = match (m, n) {
                (1, 2) => (w * (a5 - b4), 0.0, 0.0),
                (2, 2) => (w * a5, -0.25 * b4 * w, -0.25 * b4 * w),
                (1, 3) => (-b4 * w, 0.5 * a5 * w, 0.5 * a5 * w),
                _ => (0.0, 0.25 * w * (2.0 * a5 - b4), 0.25 * w * (2.0 * a5 - b4)),
            };
            let want = [
                (1, -k1 * one.0, k1 * one.1),
                (2, k2 * two.1, k2 * two.0),
                (3, k3 * three.0, k3 * three.1),
            ];
            let b = compute_b(&p, c3, c4, w, NonlinearWeight::AsPrinted);
            for (k, s, c) in want {
                let got = |kind| b.iter().find(|t| t.multiple == k && t.kind == kind).map_or(0.0, |t| t.coeff);
                assert!((got(TermKind::Sin) - s).abs() < 1e-14, "({m},{n}) sin {k}");
                assert!((got(TermKind::Cos) - c).abs() < 1e-14, "({m},{n}) cos {k}");
            }
        }
    }

    #[test]
    fn printed_high_terms_gating() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = params(3, 4, &mut rng);
        let h = printed_high_terms(&p, 0.7, 0.0, 1.2, NonlinearWeight::AsPrinted);
        // both gates open, both at 4 w
        assert_eq!(h.len(), 4);
        assert!(h.iter().all(|t| t.multiple == 4));
        let b = compute_b(&p, 0.7, 0.0, 1.2, NonlinearWeight::AsPrinted);
        for kind in [TermKind::Sin, TermKind::Cos] {
            let printed: f64 = h.iter().filter(|t| t.kind == kind).map(|t| t.coeff).sum();
            let exact = b.iter().find(|t| t.multiple == 4 && t.kind == kind).unwrap().coeff;
            assert!((printed - exact).abs() < 1e-14);
        }
        let p = params(1, 5, &mut rng);
        let h = printed_high_terms(&p, 0.7, 0.0, 1.2, NonlinearWeight::AsPrinted);
        assert!(h.iter().all(|t| t.multiple == 5));
        let p = params(4, 2, &mut rng);
        let h = printed_high_terms(&p, 0.7, 0.0, 1.2, NonlinearWeight::AsPrinted);
        assert!(h.iter().all(|t| t.multiple == 5));
    }

    #[test]
    fn projections_match_assembled_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for (m, n) in [(1, 2), (2, 2), (1, 3), (2, 3), (3, 4), (3, 5), (4, 5), (4, 7)] {
            for weight in [NonlinearWeight::Exact, NonlinearWeight::AsPrinted] {
                let p = params(m, n, &mut rng);
                let (c3, c4, w) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.4..1.6));
                let ld = rng.gen_range(-1.0..1.0);
                let d = FrequencyDecomposition::new(&p, c3, c4, w, ld, weight).unwrap();
                let g = single_frequency_profile(c3, c4, w).unwrap();
                let r = nonlinear_residual(&g, &p, ld, weight).unwrap();
                assert!(r.projection(0).unwrap().cos.abs() < 1e-12);
                for k in 1..=n.max(m + 1) {
                    let (s, c) = d.assembled(k);
                    let pr = r.projection(k).unwrap();
                    assert!((pr.sin - s).abs() < 1e-10 && (pr.cos - c).abs() < 1e-10, "({m},{n}) k={k}");
                }
            }
        }
    }

    #[test]
    fn speed_examples() {
        let mut p = PerturbedParams::new([1.5, 0.3, 0.0, 0.0, 0.0], [0.0; 12], 1, 2).unwrap();
        assert!(rel(wave_speed(&p, 1.0, 0.5, 2.0).unwrap(), 1.5 - 0.3 * 4.0) < 1e-15);
        p.a[1] = 0.0;
        assert_eq!(wave_speed(&p, 1.0, 0.5, 2.0).unwrap(), 1.5);
        p.a[2] = 2.0;
        p.a[3] = 1.0;
        // 1 - 2 w^2 + w^4 = 0 at w = 1
        assert!(matches!(wave_speed(&p, 1.0, 0.5, 1.0), Err(Error::IndeterminateSpeed(_))));
        assert!(matches!(
            check_conditions(&p, 1.0, 0.5, 1.0, LambdaDot::Solve, NonlinearWeight::Exact),
            Err(Error::IndeterminateSpeed(_))
        ));
    }

    #[test]
    fn admissible_high_cases_and_speed_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (m, n) in [(3, 5), (4, 6), (3, 4), (4, 5)] {
            let mut p = params(m, n, &mut rng);
            let w = 0.9;
            make_admissible(&mut p, w, NonlinearWeight::Exact);
            let r = check_conditions(&p, 0.6, -0.3, w, LambdaDot::Solve, NonlinearWeight::Exact).unwrap();
            assert!(r.satisfied, "({m},{n}) {:?}", r.equations);
            assert!(r.residual.max < RESIDUAL_TOL);
            let expect = if m == n - 1 { "2" } else { "1" };
            assert_eq!(r.case.name(), expect);
            assert!(rel(r.lambda_dot, r.wave_speed.unwrap()) < 1e-12);
        }
    }

    #[test]
    fn perturbing_b11_breaks_admissibility() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut p = params(2, 3, &mut rng);
        let w = 1.1;
        make_admissible(&mut p, w, NonlinearWeight::Exact);
        let ok = check_conditions(&p, 0.5, 0.4, w, LambdaDot::Solve, NonlinearWeight::Exact).unwrap();
        assert!(ok.satisfied);
        let ld = ok.lambda_dot;
        p.b[10] *= 1.01;
        let bad = check_conditions(&p, 0.5, 0.4, w, LambdaDot::Supplied(ld), NonlinearWeight::Exact).unwrap();
        assert!(!bad.satisfied);
        assert!(bad.residual.max > RESIDUAL_TOL * bad.tolerance / CONDITION_TOL);
    }

    #[test]
    fn violated_second_harmonic_shows_in_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut p = params(1, 2, &mut rng);
        let w = 1.4;
        make_admissible(&mut p, w, NonlinearWeight::Exact);
        p.b[2] += 0.05;
        let (c3, c4) = (0.7, 0.2);
        let r = check_conditions(&p, c3, c4, w, LambdaDot::Solve, NonlinearWeight::Exact).unwrap();
        let eq = r.equations.iter().find(|e| e.name.contains("A3")).unwrap();
        assert!(!eq.satisfied);
        let s2 = r.residual.projection(2).unwrap().sin;
        assert!((s2 - 0.5 * w * eq.lhs).abs() < 1e-8);
    }

    #[test]
    fn outside_enumerated_falls_back_to_substitution() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut p = params(3, 2, &mut rng);
        p.a[4] = 0.0;
        p.b[3] = 0.0;
        make_admissible(&mut p, 1.0, NonlinearWeight::Exact);
        let r = check_conditions(&p, 0.3, 0.2, 1.0, LambdaDot::Solve, NonlinearWeight::Exact).unwrap();
        assert_eq!(r.case, AdmissibilityCase::OutsideEnumerated);
        assert!(r.equations.is_empty() && r.satisfied);
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn frequency_from_constraint_coefficients() {
        let mut b = [0.0; 12];
        b[0] = -1.0;
        b[9] = 1.0;
        let p = PerturbedParams::new([0.0; 5], b, 1, 2).unwrap();
        assert!((profile_frequency(&p).unwrap() - 1.0).abs() < 1e-15);
        b[0] = 1.0;
        let p = PerturbedParams::new([0.0; 5], b, 1, 2).unwrap();
        assert!(matches!(profile_frequency(&p), Err(Error::HypothesisViolation(_))));
    }

    #[test]
    fn report_json_layout() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = params(1, 2, &mut rng);
        let r = check_conditions(&p, 0.3, 0.2, 1.0, LambdaDot::Solve, NonlinearWeight::Exact).unwrap();
        let j = r.to_json();
        assert!(j.starts_with("{\"case\":\"3\",\"verdict\":\"violated\",\"equations\":[{\"name\":\"A1\""));
        assert!(j.contains("\"residual\":{\"max\":"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn verdict_agrees_with_substitution(
            seed in any::<u64>(),
            mn in prop::sample::select(vec![(1u32, 2u32), (2, 2), (1, 3), (2, 3), (3, 4), (3, 5), (4, 5)]),
            admissible in any::<bool>(),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut p = params(mn.0, mn.1, &mut rng);
            let w = rng.gen_range(0.3..2.0);
            let (c3, c4) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if admissible {
                make_admissible(&mut p, w, NonlinearWeight::Exact);
            }
            let r = check_conditions(&p, c3, c4, w, LambdaDot::Solve, NonlinearWeight::Exact).unwrap();
            let scale = tolerance_scale(&p, c3, c4, w);
            prop_assert_eq!(r.satisfied, r.residual.max < RESIDUAL_TOL * scale);
            if admissible {
                prop_assert!(r.satisfied);
            }
        }
    }
}
