//! Bounded symmetric solutions of `b1 g + b2 g'' + b10 g'''' = 0`.
//!
//! The characteristic equation `b10 tau^4 + b2 tau^2 + b1 = 0` is solved in
//! `z = tau^2`; the sign pattern of the roots decides whether bounded
//! nontrivial profiles exist, and if so they are trigonometric sums fixed by
//! a few samples of the initial datum.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::io::to_json_compact;
use crate::numerics::{dist_to_integer, rational_approx};
use crate::perturbed::PerturbedParams;

/// Relative width of the band around `D = 0` dispatched to Case II.
const TIE_TOL: f64 = 1e-14;
/// Relative tolerance for "this coefficient vanishes".
const ZERO_TOL: f64 = 1e-12;
/// Verbatim-versus-solved coefficients disagreeing beyond this are flagged.
const VERBATIM_TOL: f64 = 1e-8;
/// Systems with a larger condition number are treated as singular.
const MAX_CONDITION: f64 = 1e12;
/// Above this the printed I(d) abscissae are replaced by a rescaled set.
const SAMPLING_CONDITION: f64 = 1e8;
/// Irrational rescalings tried, in order, when the printed set is singular.
const FALLBACK_SCALES: [f64; 3] = [FRAC_1_SQRT_2, 0.577_350_269_189_625_8, 0.618_033_988_749_894_8];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintCoefficients {
    pub b1: f64,
    pub b2: f64,
    pub b10: f64,
}

impl ConstraintCoefficients {
    pub fn new(b1: f64, b2: f64, b10: f64) -> Result<Self> {
        if ![b1, b2, b10].iter().all(|b| b.is_finite()) {
            return Err(invalid("constraint coefficients must be finite"));
        }
        Ok(Self { b1, b2, b10 })
    }

    pub fn from_perturbed(p: &PerturbedParams) -> Self {
        Self {
            b1: p.b(1),
            b2: p.b(2),
            b10: p.b(10),
        }
    }

    pub fn scale(&self) -> f64 {
        self.b1.abs().max(self.b2.abs()).max(self.b10.abs())
    }

    pub fn discriminant(&self) -> f64 {
        self.b2 * self.b2 - 4.0 * self.b1 * self.b10
    }

    /// The equation is unchanged by a global sign; this fixes `b10 >= 0`.
    pub fn normalized(&self) -> (Self, bool) {
        if self.b10 < 0.0 {
            (
                Self {
                    b1: -self.b1,
                    b2: -self.b2,
                    b10: -self.b10,
                },
                true,
            )
        } else {
            (*self, false)
        }
    }

    fn tie_tolerance(&self) -> f64 {
        TIE_TOL * (self.b2 * self.b2).max(4.0 * (self.b1 * self.b10).abs())
    }

    fn check_hypothesis(&self) -> Result<()> {
        if self.b1 == 0.0 && self.b2 == 0.0 && self.b10 == 0.0 {
            return Err(Error::HypothesisViolation(
                "b1, b2 and b10 all vanish; the constraint is empty".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseTag {
    #[serde(rename = "I_a_zero_root")]
    IaZeroRoot,
    #[serde(rename = "I_b_both_positive")]
    IbBothPositive,
    #[serde(rename = "I_c_opposite_signs")]
    IcOppositeSigns,
    #[serde(rename = "I_d_both_negative")]
    IdBothNegative,
    #[serde(rename = "II_a_positive_double")]
    IiaPositiveDouble,
    #[serde(rename = "II_b_zero_quadruple")]
    IibZeroQuadruple,
    #[serde(rename = "II_c_negative_double")]
    IicNegativeDouble,
    #[serde(rename = "III_complex_pair")]
    IiiComplexPair,
    #[serde(rename = "Degenerate_b10_zero")]
    DegenerateB10Zero,
    /// `b10 = b2 = 0`, `b1 != 0`: the constraint forces `g = 0`.
    #[serde(rename = "TrivialOnly")]
    TrivialOnly,
}

impl CaseTag {
    pub fn name(self) -> &'static str {
        match self {
            Self::IaZeroRoot => "I_a_zero_root",
            Self::IbBothPositive => "I_b_both_positive",
            Self::IcOppositeSigns => "I_c_opposite_signs",
            Self::IdBothNegative => "I_d_both_negative",
            Self::IiaPositiveDouble => "II_a_positive_double",
            Self::IibZeroQuadruple => "II_b_zero_quadruple",
            Self::IicNegativeDouble => "II_c_negative_double",
            Self::IiiComplexPair => "III_complex_pair",
            Self::DegenerateB10Zero => "Degenerate_b10_zero",
            Self::TrivialOnly => "TrivialOnly",
        }
    }
}

/// Roots in `z = tau^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ZRoots {
    /// Two distinct real roots. In case I(a) `minus` is the zero root.
    RealPair { plus: f64, minus: f64 },
    Double { z: f64 },
    ComplexPair { re: f64, im: f64 },
    /// Degenerate (`b10 = 0`) linear equation.
    Single { z: f64 },
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootStructure {
    pub case_tag: CaseTag,
    pub z_roots: ZRoots,
    /// Roots of the characteristic polynomial as `[re, im]`; four unless the
    /// equation is degenerate.
    pub tau_roots: Vec<[f64; 2]>,
    pub discriminant: Option<f64>,
    /// Coefficients with `b10 >= 0`, used for all sign decisions.
    pub normalized: ConstraintCoefficients,
    pub warnings: Vec<String>,
}

impl RootStructure {
    /// Whether some bounded, nonconstant solution exists for this root pattern.
    pub fn admits_bounded_nontrivial(&self) -> bool {
        let c = &self.normalized;
        match self.case_tag {
            CaseTag::IaZeroRoot => c.b2 * c.b10 > 0.0,
            CaseTag::IcOppositeSigns | CaseTag::IdBothNegative | CaseTag::IicNegativeDouble => {
                true
            }
            CaseTag::DegenerateB10Zero => c.b1 * c.b2 > 0.0,
            _ => false,
        }
    }

    pub fn tau(&self) -> Vec<Complex64> {
        self.tau_roots
            .iter()
            .map(|r| Complex64::new(r[0], r[1]))
            .collect()
    }
}

fn tau_from_z(zs: &[Complex64]) -> Vec<[f64; 2]> {
    zs.iter()
        .flat_map(|z| {
            let s = z.sqrt();
            [[s.re, s.im], [-s.re, -s.im]]
        })
        .collect()
}

/// Closed-form roots and the case they fall in. A discriminant within
/// `1e-14 max(b2^2, 4|b1 b10|)` of zero is treated as zero.
pub fn classify_roots(cc: &ConstraintCoefficients) -> Result<RootStructure> {
    cc.check_hypothesis()?;
    let (n, flipped) = cc.normalized();
    let mut warnings = Vec::new();
    if flipped {
        warnings.push("coefficients negated so that b10 > 0".to_string());
    }
    let real = |z: f64| Complex64::new(z, 0.0);
    if n.b10 == 0.0 {
        if n.b2 == 0.0 {
            return Ok(RootStructure {
                case_tag: CaseTag::TrivialOnly,
                z_roots: ZRoots::None,
                tau_roots: Vec::new(),
                discriminant: None,
                normalized: n,
                warnings,
            });
        }
        let z = -n.b1 / n.b2;
        return Ok(RootStructure {
            case_tag: CaseTag::DegenerateB10Zero,
            z_roots: ZRoots::Single { z },
            tau_roots: tau_from_z(&[real(z)]),
            discriminant: None,
            normalized: n,
            warnings,
        });
    }
    let d = n.discriminant();
    let tol = n.tie_tolerance();
    let (case_tag, z_roots, zs) = if d.abs() <= tol {
        if d != 0.0 {
            warnings.push(format!(
                "discriminant {d:e} lies within the tie band {tol:e}; treated as a double root"
            ));
        }
        let z = -n.b2 / (2.0 * n.b10);
        let tag = if n.b2 == 0.0 {
            CaseTag::IibZeroQuadruple
        } else if n.b2 * n.b10 < 0.0 {
            CaseTag::IiaPositiveDouble
        } else {
            CaseTag::IicNegativeDouble
        };
        (tag, ZRoots::Double { z }, vec![real(z), real(z)])
    } else if d > 0.0 {
        let sd = d.sqrt();
        if n.b1 == 0.0 {
            let zp = -n.b2 / n.b10;
            (
                CaseTag::IaZeroRoot,
                ZRoots::RealPair { plus: zp, minus: 0.0 },
                vec![real(zp), real(0.0)],
            )
        } else {
            // q avoids cancellation; z1 z2 = b1 / b10
            let q = -0.5 * (n.b2 + if n.b2 >= 0.0 { sd } else { -sd });
            let (z1, z2) = (q / n.b10, n.b1 / q);
            let (zp, zm) = (z1.max(z2), z1.min(z2));
            let tag = if n.b1 < 0.0 {
                CaseTag::IcOppositeSigns
            } else if n.b2 > 0.0 {
                CaseTag::IdBothNegative
            } else {
                CaseTag::IbBothPositive
            };
            (
                tag,
                ZRoots::RealPair { plus: zp, minus: zm },
                vec![real(zp), real(zm)],
            )
        }
    } else {
        let re = -n.b2 / (2.0 * n.b10);
        let im = (-d).sqrt() / (2.0 * n.b10);
        (
            CaseTag::IiiComplexPair,
            ZRoots::ComplexPair { re, im },
            vec![Complex64::new(re, im), Complex64::new(re, -im)],
        )
    };
    Ok(RootStructure {
        case_tag,
        z_roots,
        tau_roots: tau_from_z(&zs),
        discriminant: Some(d),
        normalized: n,
        warnings,
    })
}

/// Which of the existence conditions i) - v) holds (the first that does).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    I,
    Ii,
    Iii,
    Iv,
    V,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Self::I => "i",
            Self::Ii => "ii",
            Self::Iii => "iii",
            Self::Iv => "iv",
            Self::V => "v",
        }
    }
}

/// Conditions i) - v), evaluated on sign-normalized coefficients (`b10 >= 0`)
/// with the same tie rule for `D = 0` as [`classify_roots`].
pub fn condition_check(cc: &ConstraintCoefficients) -> Option<Condition> {
    let (n, _) = cc.normalized();
    let (b1, b2, b10) = (n.b1, n.b2, n.b10);
    let d = n.discriminant();
    let tol = n.tie_tolerance();
    let d_pos = d > tol;
    let d_zero = d.abs() <= tol;
    if b1 == 0.0 && b2 * b10 > 0.0 {
        Some(Condition::I)
    } else if b10 != 0.0 && d_pos && b1 < 0.0 && b10 > 0.0 {
        Some(Condition::Ii)
    } else if b10 != 0.0 && d_pos && (d.sqrt() - b2) * b10 < 0.0 {
        Some(Condition::Iii)
    } else if b10 != 0.0 && d_zero && b2 * b10 > 0.0 {
        Some(Condition::Iv)
    } else if b10 == 0.0 && b2 != 0.0 && b1 * b2 > 0.0 {
        Some(Condition::V)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermKind {
    Cos,
    Sin,
}

/// `amp * cos(freq y - phase)` or `amp * sin(freq y - phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub amp: f64,
    pub freq: f64,
    pub kind: TermKind,
    pub phase: f64,
}

impl TrigTerm {
    pub fn cos(amp: f64, freq: f64) -> Self {
        Self {
            amp,
            freq,
            kind: TermKind::Cos,
            phase: 0.0,
        }
    }

    pub fn sin(amp: f64, freq: f64) -> Self {
        Self {
            amp,
            freq,
            kind: TermKind::Sin,
            phase: 0.0,
        }
    }

    /// `n`-th derivative at `y`.
    pub fn derivative(&self, y: f64, n: u32) -> f64 {
        let arg = self.freq * y - self.phase;
        let shift = match self.kind {
            TermKind::Cos => 0.0,
            TermKind::Sin => -FRAC_PI_2,
        };
        // d^n/dy^n cos(a) = f^n cos(a + n pi/2)
        self.amp * self.freq.powi(n as i32) * (arg + shift + n as f64 * FRAC_PI_2).cos()
    }

    /// `(C, S)` with `term = C cos(freq y) + S sin(freq y)`.
    fn cos_sin(&self) -> (f64, f64) {
        let (s, c) = self.phase.sin_cos();
        match self.kind {
            TermKind::Cos => (self.amp * c, self.amp * s),
            TermKind::Sin => (-self.amp * s, self.amp * c),
        }
    }
}

/// One harmonic `r cos(freq y - theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Harmonic {
    pub freq: f64,
    pub r: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigProfile {
    pub terms: Vec<TrigTerm>,
    pub offset: f64,
}

impl TrigProfile {
    pub fn new(terms: Vec<TrigTerm>, offset: f64) -> Result<Self> {
        for t in &terms {
            if !(t.freq.is_finite() && t.freq > 0.0 && t.amp.is_finite() && t.phase.is_finite()) {
                return Err(invalid(format!("bad trig term {t:?}")));
            }
        }
        if !offset.is_finite() {
            return Err(invalid("offset must be finite"));
        }
        Ok(Self { terms, offset })
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.offset + self.terms.iter().map(|t| t.derivative(y, 0)).sum::<f64>()
    }

    pub fn derivative(&self, y: f64, n: u32) -> f64 {
        if n == 0 {
            return self.eval(y);
        }
        self.terms.iter().map(|t| t.derivative(y, n)).sum()
    }

    /// Terms grouped by frequency (relative tolerance `1e-12`), sorted by frequency.
    pub fn harmonics(&self) -> Vec<Harmonic> {
        let mut groups: Vec<(f64, f64, f64)> = Vec::new();
        for t in &self.terms {
            let (c, s) = t.cos_sin();
            match groups
                .iter_mut()
                .find(|g| (g.0 - t.freq).abs() <= 1e-12 * g.0.max(t.freq))
            {
                Some(g) => {
                    g.1 += c;
                    g.2 += s;
                }
                None => groups.push((t.freq, c, s)),
            }
        }
        groups.sort_by(|a, b| a.0.total_cmp(&b.0));
        groups
            .into_iter()
            .map(|(freq, c, s)| Harmonic {
                freq,
                r: c.hypot(s),
                theta: s.atan2(c),
            })
            .collect()
    }

    /// Euclidean norm of the harmonic amplitudes; zero iff the profile is constant.
    pub fn amplitude_norm(&self) -> f64 {
        self.harmonics().iter().map(|h| h.r * h.r).sum::<f64>().sqrt()
    }

    /// Max of `|b1 g + b2 g'' + b10 g''''|` over 1000 points per period of the
    /// slowest harmonic, relative to `max|b| * max|g|` on the same points.
    pub fn ode_residual(&self, cc: &ConstraintCoefficients) -> f64 {
        let fmin = self
            .terms
            .iter()
            .map(|t| t.freq)
            .fold(f64::INFINITY, f64::min);
        let period = if fmin.is_finite() { 2.0 * PI / fmin } else { 1.0 };
        let (mut res, mut gmax): (f64, f64) = (0.0, 0.0);
        for j in 0..1000 {
            let y = period * j as f64 / 1000.0;
            let g = self.eval(y);
            let r = cc.b1 * g + cc.b2 * self.derivative(y, 2) + cc.b10 * self.derivative(y, 4);
            res = res.max(r.abs());
            gmax = gmax.max(g.abs());
        }
        let scale = cc.scale() * gmax;
        if scale == 0.0 {
            res
        } else {
            res / scale
        }
    }

    pub fn interpolation_error(&self, samples: &InitialSamples) -> f64 {
        samples
            .abscissae
            .iter()
            .zip(&samples.values)
            .map(|(&y, &v)| (self.eval(y) - v).abs())
            .fold(0.0, f64::max)
    }
}

/// The initial datum at the abscissae the construction formulas require.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialSamples {
    pub abscissae: Vec<f64>,
    pub values: Vec<f64>,
}

impl InitialSamples {
    pub fn from_fn(rs: &RootStructure, v0: impl Fn(f64) -> f64) -> Self {
        let abscissae = sample_abscissae(rs);
        let values = abscissae.iter().map(|&y| v0(y)).collect();
        Self { abscissae, values }
    }

    pub fn from_values(rs: &RootStructure, values: Vec<f64>) -> Result<Self> {
        let abscissae = sample_abscissae(rs);
        if abscissae.len() != values.len() {
            return Err(invalid(format!(
                "case {} needs {} samples, got {}",
                rs.case_tag.name(),
                abscissae.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("samples must be finite"));
        }
        Ok(Self { abscissae, values })
    }

    fn scale(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Frequencies `1/beta1 < 1/beta2` of case I(d), from `-z+` and `-z-`.
fn id_betas(n: &ConstraintCoefficients) -> (f64, f64) {
    let sd = n.discriminant().sqrt();
    // (b2 - sqrt D) / (2 b1) = 2 b10 / (b2 + sqrt D) without cancellation
    let beta1 = ((n.b2 + sd) / (2.0 * n.b1)).sqrt();
    let beta2 = (2.0 * n.b10 / (n.b2 + sd)).sqrt();
    (beta1, beta2)
}

fn id_printed_abscissae((b1, b2): (f64, f64)) -> Vec<f64> {
    vec![0.0, FRAC_PI_2 * b1, FRAC_PI_2 * b2, PI * b1]
}

/// Rows `[cos(y/beta1), sin(y/beta1), cos(y/beta2), sin(y/beta2)]`.
fn id_matrix((b1, b2): (f64, f64), ys: &[f64]) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| {
        let f = if j < 2 { 1.0 / b1 } else { 1.0 / b2 };
        if j % 2 == 0 {
            (f * ys[i]).cos()
        } else {
            (f * ys[i]).sin()
        }
    })
}

fn id_condition(a: &Matrix4<f64>) -> f64 {
    let sv = a.singular_values();
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    }
}

/// Coefficients of the two-frequency sum through the samples, and the
/// condition number of the system.
fn id_solve(betas: (f64, f64), samples: &InitialSamples) -> Result<([f64; 4], f64)> {
    let a = id_matrix(betas, &samples.abscissae);
    let condition = id_condition(&a);
    if condition > MAX_CONDITION {
        return Err(Error::SingularSystem { condition });
    }
    let v = &samples.values;
    let sol = a
        .lu()
        .solve(&Vector4::new(v[0], v[1], v[2], v[3]))
        .ok_or(Error::SingularSystem { condition })?;
    Ok(([sol[0], sol[1], sol[2], sol[3]], condition))
}

/// Angular frequency of the single-frequency bounded cases.
fn single_frequency(rs: &RootStructure) -> Option<f64> {
    let n = &rs.normalized;
    match (rs.case_tag, rs.z_roots) {
        (CaseTag::IaZeroRoot, ZRoots::RealPair { plus, .. }) if plus < 0.0 => Some((-plus).sqrt()),
        (CaseTag::IcOppositeSigns, ZRoots::RealPair { minus, .. }) => Some((-minus).sqrt()),
        (CaseTag::IicNegativeDouble, ZRoots::Double { z }) => Some((-z).sqrt()),
        (CaseTag::DegenerateB10Zero, _) if n.b1 * n.b2 > 0.0 => Some((n.b1 / n.b2).sqrt()),
        _ => None,
    }
}

/// Abscissae at which the initial datum is read, by case:
/// I(a) `{0, pi/(2w), pi/w}`; I(c), II(c), degenerate `{0, pi/(2w)}`;
/// I(d) `{0, pi beta1/2, pi beta2/2, pi beta1}`; none otherwise.
pub fn sample_abscissae(rs: &RootStructure) -> Vec<f64> {
    if rs.case_tag == CaseTag::IdBothNegative {
        let betas = id_betas(&rs.normalized);
        let printed = id_printed_abscissae(betas);
        if id_condition(&id_matrix(betas, &printed)) <= SAMPLING_CONDITION {
            return printed;
        }
        // the printed set is singular exactly when c0 = 0
        let scaled = |t: f64| printed.iter().map(|y| t * y).collect::<Vec<f64>>();
        return FALLBACK_SCALES
            .iter()
            .map(|&t| scaled(t))
            .find(|ys| id_condition(&id_matrix(betas, ys)) <= SAMPLING_CONDITION)
            .unwrap_or_else(|| scaled(FALLBACK_SCALES[0]));
    }
    match single_frequency(rs) {
        Some(w) if rs.case_tag == CaseTag::IaZeroRoot => vec![0.0, FRAC_PI_2 / w, PI / w],
        Some(w) => vec![0.0, FRAC_PI_2 / w],
        None => Vec::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedQuantities {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub c0: f64,
    pub c_tilde: [f64; 4],
    /// `e^{(i+1) pi} c~_i / c0`, as printed.
    pub c_verbatim: [f64; 4],
    /// Solution of the 4x4 interpolation system; authoritative.
    pub c: [f64; 4],
    pub condition_number: f64,
    /// `max_i |c_verbatim_i - c_i| / max(max_i |c_i|, tiny)`.
    pub verbatim_discrepancy: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub thetabar1: f64,
    pub thetabar2: f64,
    pub r1: f64,
    pub r2: f64,
}

fn require_id_regime(cc: &ConstraintCoefficients) -> Result<ConstraintCoefficients> {
    let (n, _) = cc.normalized();
    let d = n.discriminant();
    if !(n.b10 != 0.0 && d > n.tie_tolerance() && (d.sqrt() - n.b2) * n.b10 < 0.0) {
        return Err(Error::HypothesisViolation(format!(
            "two-frequency quantities need b10 != 0, D > 0 and (sqrt(D) - b2) b10 < 0; \
             got (b1, b2, b10) = ({}, {}, {})",
            cc.b1, cc.b2, cc.b10
        )));
    }
    Ok(n)
}

/// All two-frequency quantities of case I(d), including the printed closed
/// forms for `c0`, `c~_i` and `c_i`, and the directly solved interpolation
/// coefficients of `c1 cos(y/b1) + c2 sin(y/b1) + c3 cos(y/b2) + c4 sin(y/b2)`.
pub fn derived_quantities(
    cc: &ConstraintCoefficients,
    samples: &InitialSamples,
) -> Result<DerivedQuantities> {
    let n = require_id_regime(cc)?;
    if samples.values.len() != 4 {
        return Err(invalid("case I(d) needs four samples"));
    }
    let sd = n.discriminant().sqrt();
    let root = (n.b1 * n.b10).sqrt();
    let alpha1 = (sd + n.b2).abs() / (2.0 * root);
    // |sqrt D - b2| / (2 sqrt(b1 b10)) rewritten without cancellation
    let alpha2 = 2.0 * root / (sd + n.b2);
    let (beta1, beta2) = id_betas(&n);
    let [v0, va, vb, vc] = [
        samples.values[0],
        samples.values[1],
        samples.values[2],
        samples.values[3],
    ];
    let (s1h, c1h) = (FRAC_PI_2 * alpha1).sin_cos();
    let (s2h, c2h) = (FRAC_PI_2 * alpha2).sin_cos();
    let (s1, c1) = (PI * alpha1).sin_cos();

    let c0 = (1.0 - s1h * s2h) * (1.0 + c1) + (c2h + c1h * s2h) * s1;
    let c_tilde = [
        (1.0 - s1h * s2h) * (c1 * v0 - vc) + (c1h * s2h * v0 - s2h * va + vb) * s1,
        (c1h * v0 - va) * (1.0 + c2h * s1) - (s1h * c2h * v0 + va) * c1 + (c1h + s1h * c2h) * vc,
        (1.0 - s1h * s2h) * (v0 + vc) + (c2h * v0 + s2h * va - vb) * s1,
        (c1 * c2h - c1h * s2h) * v0 + (1.0 + c1) * (s2h * va - vb) - (c2h + c1h * s2h) * vc,
    ];
    if c0.abs() < 1e-13 {
        return Err(Error::DegenerateNormalization { c0 });
    }
    let mut c_verbatim = [0.0; 4];
    for (i, cv) in c_verbatim.iter_mut().enumerate() {
        *cv = ((i + 2) as f64 * PI).exp() * c_tilde[i] / c0;
    }

    let printed = id_printed_abscissae((beta1, beta2));
    let off = samples
        .abscissae
        .iter()
        .zip(&printed)
        .any(|(a, b)| (a - b).abs() > 1e-12 * b.abs().max(1.0));
    if off {
        return Err(Error::HypothesisViolation(
            "closed forms assume the abscissae {0, pi beta1/2, pi beta2/2, pi beta1}".into(),
        ));
    }
    let (c, condition_number) = id_solve((beta1, beta2), samples)?;
    let cmax = c.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let verbatim_discrepancy = c
        .iter()
        .zip(&c_verbatim)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / cmax;

    let r1 = c[0].hypot(c[1]);
    let r2 = c[2].hypot(c[3]);
    let theta1 = c[1].atan2(c[0]);
    let theta2 = c[3].atan2(c[2]);
    Ok(DerivedQuantities {
        alpha1,
        alpha2,
        beta1,
        beta2,
        c0,
        c_tilde,
        c_verbatim,
        c,
        condition_number,
        verbatim_discrepancy,
        theta1,
        theta2,
        thetabar1: theta1 / beta2,
        thetabar2: theta2 / beta1,
        r1,
        r2,
    })
}

/// Membership in the set where the two-frequency profile is asymmetric:
/// `(c1^2 + c2^2)(c3^2 + c4^2) != 0` and `thetabar1 - thetabar2` not in `pi Z`
/// (distance to the lattice above `1e-10`).
pub fn in_set_a(
    cc: &ConstraintCoefficients,
    samples: &InitialSamples,
) -> Result<(bool, DerivedQuantities)> {
    let dq = derived_quantities(cc, samples)?;
    let tol = ZERO_TOL * samples.scale().max(f64::MIN_POSITIVE);
    let nonzero = dq.r1 > tol && dq.r2 > tol;
    let off_lattice = dist_to_integer((dq.thetabar1 - dq.thetabar2) / PI) > 1e-10;
    Ok((nonzero && off_lattice, dq))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryMethod {
    /// At most one harmonic; always symmetric.
    SingleFrequency,
    /// Commensurate frequencies, decided by the coprime-integer criterion.
    Lattice,
    /// Incommensurate frequencies, searched over a long window.
    Numerical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrigSymmetry {
    pub symmetric: bool,
    pub axis: Option<f64>,
    pub method: SymmetryMethod,
}

/// Symmetry of a sum of at most two harmonics `r_i cos(f_i y - theta_i)`.
///
/// For `f2/f1 = k2/k1` in lowest terms (detected to `1e-12`) the sum is
/// asymmetric iff `r1 r2 != 0` and `(k1 theta2 - k2 theta1)/pi` is not an
/// integer. Incommensurate pairs are checked over a window of 20 periods of
/// the slowest harmonic: the first harmonic is symmetric exactly at
/// `(theta1 + n pi)/f1`, and the second must be too up to `1e-8`.
pub fn is_symmetric_trig(profile: &TrigProfile) -> Result<TrigSymmetry> {
    let hs = profile.harmonics();
    let scale = hs.iter().map(|h| h.r).fold(0.0, f64::max);
    let live: Vec<Harmonic> = hs
        .into_iter()
        .filter(|h| h.r > ZERO_TOL * scale)
        .collect();
    match live.len() {
        0 => Ok(TrigSymmetry {
            symmetric: true,
            axis: Some(0.0),
            method: SymmetryMethod::SingleFrequency,
        }),
        1 => {
            let h = live[0];
            Ok(TrigSymmetry {
                symmetric: true,
                axis: Some((h.theta / h.freq).rem_euclid(PI / h.freq)),
                method: SymmetryMethod::SingleFrequency,
            })
        }
        2 => Ok(two_harmonic_symmetry(live[0], live[1])),
        k => Err(Error::Unsupported(format!(
            "symmetry test covers at most two frequencies, got {k}"
        ))),
    }
}

fn two_harmonic_symmetry(h1: Harmonic, h2: Harmonic) -> TrigSymmetry {
    if let Some((k2, k1)) = rational_approx(h2.freq / h1.freq, 1000, 1e-12) {
        let m = (k1 as f64 * h2.theta - k2 as f64 * h1.theta) / PI;
        if dist_to_integer(m) > 1e-9 {
            return TrigSymmetry {
                symmetric: false,
                axis: None,
                method: SymmetryMethod::Lattice,
            };
        }
        // in s = F y with F = f1/k1 both harmonics have integer frequency k_i
        let f = h1.freq / k1 as f64;
        let axis = (0..k1)
            .map(|n1| (h1.theta + PI * n1 as f64) / k1 as f64)
            .find(|s0| dist_to_integer((k2 as f64 * s0 - h2.theta) / PI) < 1e-6)
            .map(|s0| (s0 / f).rem_euclid(PI / f));
        return TrigSymmetry {
            symmetric: true,
            axis,
            method: SymmetryMethod::Lattice,
        };
    }
    let window = 20.0 * 2.0 * PI / h1.freq.min(h2.freq);
    let count = (window * h1.freq / PI).ceil() as i64;
    let weight = h2.r / (h1.r + h2.r);
    let (best_axis, best) = (0..=count)
        .map(|n1| {
            let axis = (h1.theta + PI * n1 as f64) / h1.freq;
            (axis, weight * (h2.freq * axis - h2.theta).sin().abs())
        })
        .fold((0.0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
    TrigSymmetry {
        symmetric: best < 1e-8,
        axis: (best < 1e-8).then_some(best_axis),
        method: SymmetryMethod::Numerical,
    }
}

/// Outcome of the profile construction.
#[derive(Debug, Clone, PartialEq)]
pub enum Construction {
    Symmetric(TrigProfile),
    /// Bounded, but the profile fixed by the samples is not symmetric.
    AsymmetricOnly(TrigProfile),
    /// Every bounded solution of this case is constant (or zero).
    NoBoundedSolution,
    /// The case admits bounded profiles but the samples select a constant one.
    Trivial(TrigProfile),
}

impl Construction {
    pub fn profile(&self) -> Option<&TrigProfile> {
        match self {
            Self::Symmetric(p) | Self::AsymmetricOnly(p) | Self::Trivial(p) => Some(p),
            Self::NoBoundedSolution => None,
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, Self::NoBoundedSolution)
    }
}

fn finish(profile: TrigProfile, scale: f64) -> Result<Construction> {
    if profile.amplitude_norm() <= ZERO_TOL * scale.max(f64::MIN_POSITIVE) {
        return Ok(Construction::Trivial(profile));
    }
    Ok(if is_symmetric_trig(&profile)?.symmetric {
        Construction::Symmetric(profile)
    } else {
        Construction::AsymmetricOnly(profile)
    })
}

/// Explicit bounded profile of the case, with coefficients read off the
/// samples: I(a) `c1 + c3 cos(w y) + c4 sin(w y)`; I(c), II(c) and the
/// degenerate case `c cos(w y) + s sin(w y)`; I(d) the two-frequency sum
/// from the interpolation solve.
pub fn construct_profile(
    rs: &RootStructure,
    cc: &ConstraintCoefficients,
    samples: &InitialSamples,
) -> Result<Construction> {
    if !rs.admits_bounded_nontrivial() {
        return Ok(Construction::NoBoundedSolution);
    }
    let want = sample_abscissae(rs).len();
    if samples.values.len() != want {
        return Err(invalid(format!(
            "case {} needs {want} samples, got {}",
            rs.case_tag.name(),
            samples.values.len()
        )));
    }
    let v = &samples.values;
    let scale = samples.scale();
    if rs.case_tag == CaseTag::IdBothNegative {
        let betas = id_betas(&require_id_regime(cc)?);
        let (c, _) = id_solve(betas, samples)?;
        let (f1, f2) = (1.0 / betas.0, 1.0 / betas.1);
        let profile = TrigProfile::new(
            vec![
                TrigTerm::cos(c[0], f1),
                TrigTerm::sin(c[1], f1),
                TrigTerm::cos(c[2], f2),
                TrigTerm::sin(c[3], f2),
            ],
            0.0,
        )?;
        return finish(profile, scale);
    }
    let w = single_frequency(rs).expect("bounded single-frequency case");
    let profile = match rs.case_tag {
        CaseTag::IaZeroRoot => {
            let c1 = 0.5 * (v[0] + v[2]);
            let c3 = 0.5 * (v[0] - v[2]);
            let c4 = v[1] - c1;
            TrigProfile::new(vec![TrigTerm::cos(c3, w), TrigTerm::sin(c4, w)], c1)?
        }
        CaseTag::IicNegativeDouble => {
            // r cos(w y - theta3); the sign of the sine part comes from c3
            let r = v[0].hypot(v[1]);
            let theta3 = v[1].atan2(v[0]);
            TrigProfile::new(
                vec![TrigTerm {
                    amp: r,
                    freq: w,
                    kind: TermKind::Cos,
                    phase: theta3,
                }],
                0.0,
            )?
        }
        _ => TrigProfile::new(vec![TrigTerm::cos(v[0], w), TrigTerm::sin(v[1], w)], 0.0)?,
    };
    finish(profile, scale)
}

/// Sign marker `(sgn x - 1)^(sgn x + 1)`: 0 for `x > 0`, 1 for `x < 0`, -1 for `x = 0`.
pub fn g_marker(x: f64) -> f64 {
    let s = if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    };
    (s - 1.0_f64).powi((s + 1.0) as i32)
}

/// Which zero pattern of the solved I(d) coefficients is present, the printed
/// closed forms for that pattern next to the solved values, and whether the
/// printed lattice condition holds for the representative `k = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubCaseReport {
    pub label: &'static str,
    pub lattice_condition: bool,
    /// `(index 1..=4, printed value, solved value)`.
    pub coefficients: Vec<(usize, f64, f64)>,
    pub max_discrepancy: f64,
}

/// Pattern matcher over the zero structure of `dq.c` (zero below `1e-12`
/// relative to the samples). Returns `None` when the pattern has no listed
/// sub-case (a single harmonic, or all four nonzero off the lattice).
pub fn match_subcase(dq: &DerivedQuantities, samples: &InitialSamples) -> Option<SubCaseReport> {
    let tol = ZERO_TOL * samples.scale().max(f64::MIN_POSITIVE);
    let z: Vec<bool> = dq.c.iter().map(|c| c.abs() <= tol).collect();
    let [v0, va, vb, _] = [
        samples.values[0],
        samples.values[1],
        samples.values[2],
        samples.values[3],
    ];
    let (s1, c1h) = (FRAC_PI_2 * dq.alpha1).sin_cos();
    let (s2, c2h) = (FRAC_PI_2 * dq.alpha2).sin_cos();
    let (b1, b2) = (dq.beta1, dq.beta2);
    let (tb1, tb2) = (dq.thetabar1, dq.thetabar2);
    let on_pi = |x: f64| dist_to_integer(x / PI) <= 1e-10;
    let on_int = |x: f64| dist_to_integer(x) <= 1e-10;
    let c = dq.c;
    let g = g_marker;
    let (label, lattice, printed): (&'static str, bool, Vec<(usize, f64)>) = match (z[0], z[1], z[2], z[3]) {
        (false, false, false, false) => {
            let lattice = on_pi(tb1 - tb2);
            if !lattice {
                return None;
            }
            ("i", lattice, (0..4).map(|i| (i + 1, dq.c_verbatim[i])).collect())
        }
        (true, false, false, false) => (
            "ii",
            on_pi(FRAC_PI_2 / b2 - tb2),
            vec![
                (4, (s2 * (va - v0 * c1h) - vb) / (s1 * s2 - 1.0)),
                (3, v0),
                (2, (vb * s1 + v0 * c1h) / (s1 * s2 - 1.0)),
            ],
        ),
        (false, true, false, false) => (
            "iii",
            on_pi(g(c[0]) * PI / b2 - tb2),
            vec![
                (3, ((v0 * c2h - va) * s1 + va) / (s1 * c2h)),
                (4, va / s1),
                (1, (vb * s1 - va) / (s1 * c2h)),
            ],
        ),
        (false, false, true, false) => (
            "iv",
            on_pi(tb1 - FRAC_PI_2 / b1),
            vec![
                (4, (va * s2 + v0 * c2h) / (s2 * s1 - 1.0)),
                (1, v0),
                (2, (s1 * (vb - v0 * c2h) - va) / (s2 * s1 - 1.0)),
            ],
        ),
        (false, false, false, true) => (
            "v",
            on_pi(tb1 - g(c[2]) * PI / b1),
            vec![
                (1, ((v0 * c1h - vb) * s2 + vb) / (s2 * c1h)),
                (2, vb / s2),
                (3, (va * s2 - vb) / (s2 * c1h)),
            ],
        ),
        (false, true, false, true) => (
            "vi",
            on_int(g(c[0]) / b2 - g(c[2]) / b1),
            vec![(1, vb / c2h), (3, va / c1h)],
        ),
        (false, true, true, false) => (
            "vii",
            on_int(g(c[0]) / b2 - 0.5 / b1),
            vec![(1, v0), (4, va / s1)],
        ),
        (true, false, false, true) => (
            "viii",
            on_int(0.5 / b2 - g(c[2]) / b1),
            vec![(2, vb / s2), (3, v0)],
        ),
        (true, false, true, false) => (
            "ix",
            true,
            vec![
                (2, (vb * s1 - va) / (s2 * s1 - 1.0)),
                (4, (va * s2 - vb) / (s2 * s1 - 1.0)),
            ],
        ),
        _ => return None,
    };
    let coefficients: Vec<(usize, f64, f64)> = printed
        .into_iter()
        .map(|(i, p)| (i, p, dq.c[i - 1]))
        .collect();
    let max_discrepancy = coefficients
        .iter()
        .map(|(_, p, s)| (p - s).abs())
        .fold(0.0, f64::max);
    Some(SubCaseReport {
        label,
        lattice_condition: lattice,
        coefficients,
        max_discrepancy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub case_tag: CaseTag,
    pub condition: Option<Condition>,
    pub bounded: bool,
    pub symmetric: Option<bool>,
    pub profile: Option<TrigProfile>,
    pub derived: Option<DerivedQuantities>,
    pub subcase: Option<SubCaseReport>,
    pub samples: InitialSamples,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    case_tag: &'a str,
    condition: &'a str,
    bounded: bool,
    symmetric: Option<bool>,
    profile: Option<&'a TrigProfile>,
    derived: Option<&'a DerivedQuantities>,
    subcase: Option<&'a SubCaseReport>,
    samples: &'a InitialSamples,
    warnings: &'a [String],
}

impl ClassificationReport {
    pub fn to_json(&self) -> String {
        to_json_compact(&ReportJson {
            case_tag: self.case_tag.name(),
            condition: self.condition.map_or("none", Condition::name),
            bounded: self.bounded,
            symmetric: self.symmetric,
            profile: self.profile.as_ref(),
            derived: self.derived.as_ref(),
            subcase: self.subcase.as_ref(),
            samples: &self.samples,
            warnings: &self.warnings,
        })
    }
}

/// Full pipeline: roots, case, profile from `v0`, symmetry and (for I(d)) the
/// derived quantities with the printed-formula cross-checks.
pub fn classify(
    cc: &ConstraintCoefficients,
    v0: impl Fn(f64) -> f64,
) -> Result<ClassificationReport> {
    let rs = classify_roots(cc)?;
    let samples = InitialSamples::from_fn(&rs, v0);
    classify_samples(cc, &rs, samples)
}

/// As [`classify`], with the sample values given directly (in the order of
/// [`sample_abscissae`]).
pub fn classify_from_values(
    cc: &ConstraintCoefficients,
    values: Vec<f64>,
) -> Result<ClassificationReport> {
    let rs = classify_roots(cc)?;
    let samples = InitialSamples::from_values(&rs, values)?;
    classify_samples(cc, &rs, samples)
}

fn classify_samples(
    cc: &ConstraintCoefficients,
    rs: &RootStructure,
    samples: InitialSamples,
) -> Result<ClassificationReport> {
    let construction = construct_profile(rs, cc, &samples)?;
    let mut warnings = rs.warnings.clone();
    let derived = if rs.case_tag == CaseTag::IdBothNegative {
        match derived_quantities(cc, &samples) {
            Ok(dq) => Some(dq),
            Err(e @ (Error::DegenerateNormalization { .. } | Error::HypothesisViolation(_))) => {
                warnings.push(format!("closed-form quantities unavailable: {e}"));
                None
            }
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let (derived, subcase) = if let Some(dq) = derived {
        if dq.verbatim_discrepancy > VERBATIM_TOL {
            warnings.push(format!(
                "printed c_i formula differs from the interpolation solve by {:e} (relative, \
                 condition number {:e}); solved values used",
                dq.verbatim_discrepancy, dq.condition_number
            ));
        }
        let sub = match_subcase(&dq, &samples);
        (Some(dq), sub)
    } else {
        (None, None)
    };
    let symmetric = match &construction {
        Construction::Symmetric(_) | Construction::Trivial(_) => Some(true),
        Construction::AsymmetricOnly(_) => Some(false),
        Construction::NoBoundedSolution => None,
    };
    Ok(ClassificationReport {
        case_tag: rs.case_tag,
        condition: condition_check(cc),
        bounded: rs.admits_bounded_nontrivial(),
        symmetric,
        profile: construction.profile().cloned(),
        derived,
        subcase,
        samples,
        warnings,
    })
}
