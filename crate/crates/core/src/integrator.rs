//! Fourth-order time steppers for semilinear systems `u_t = Lambda u + N(u)`
//! posed on half-spectrum coefficients.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Integrating-factor RK4 when the linear symbol grows at least
    /// quadratically faster in the numerator than in the denominator,
    /// classical RK4 otherwise.
    #[default]
    Auto,
    Rk4,
    /// RK4 in the Lawson form, with the linear part integrated exactly.
    IfRk4,
}

impl Integrator {
    /// Resolves `Auto` from the polynomial degrees of the linear symbol.
    pub fn resolve(self, numerator_degree: u32, denominator_degree: u32) -> Integrator {
        match self {
            Integrator::Auto if numerator_degree >= denominator_degree + 2 => Integrator::IfRk4,
            Integrator::Auto => Integrator::Rk4,
            other => other,
        }
    }
}

pub(crate) type Coeffs = Vec<Complex64>;

fn axpy(y: &[Complex64], a: f64, x: &[Complex64]) -> Coeffs {
    y.iter().zip(x).map(|(yi, xi)| yi + a * xi).collect()
}

fn hadamard(e: &[Complex64], x: &[Complex64]) -> Coeffs {
    e.iter().zip(x).map(|(ei, xi)| ei * xi).collect()
}

/// Advances `u` by `dt`. `time` is only used to label a blow-up.
pub(crate) fn advance(
    method: Integrator,
    linear: &[Complex64],
    nonlinear: &dyn Fn(&[Complex64]) -> Coeffs,
    u: &[Complex64],
    dt: f64,
    time: f64,
) -> Result<Coeffs> {
    let out = match method {
        Integrator::IfRk4 => if_rk4(linear, nonlinear, u, dt),
        _ => rk4(linear, nonlinear, u, dt),
    };
    if out.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(out)
    } else {
        Err(Error::BlowUp { time })
    }
}

fn rk4(
    linear: &[Complex64],
    nonlinear: &dyn Fn(&[Complex64]) -> Coeffs,
    u: &[Complex64],
    dt: f64,
) -> Coeffs {
    let rhs = |v: &[Complex64]| -> Coeffs {
        let mut n = nonlinear(v);
        for ((ni, li), vi) in n.iter_mut().zip(linear).zip(v) {
            *ni += li * vi;
        }
        n
    };
    let k1 = rhs(u);
    let k2 = rhs(&axpy(u, 0.5 * dt, &k1));
    let k3 = rhs(&axpy(u, 0.5 * dt, &k2));
    let k4 = rhs(&axpy(u, dt, &k3));
    (0..u.len())
        .map(|j| u[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
        .collect()
}

fn if_rk4(
    linear: &[Complex64],
    nonlinear: &dyn Fn(&[Complex64]) -> Coeffs,
    u: &[Complex64],
    dt: f64,
) -> Coeffs {
    let e: Coeffs = linear.iter().map(|l| (l * (0.5 * dt)).exp()).collect();
    let e2: Coeffs = e.iter().map(|x| x * x).collect();

    let a = nonlinear(u);
    let b = nonlinear(&hadamard(&e, &axpy(u, 0.5 * dt, &a)));
    let eu = hadamard(&e, u);
    let c = nonlinear(&axpy(&eu, 0.5 * dt, &b));
    let e2u = hadamard(&e2, u);
    let ec = hadamard(&e, &c);
    let d = nonlinear(&axpy(&e2u, dt, &ec));
    (0..u.len())
        .map(|j| e2u[j] + dt / 6.0 * (e2[j] * a[j] + 2.0 * e[j] * (b[j] + c[j]) + d[j]))
        .collect()
}
