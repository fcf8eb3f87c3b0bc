//! Scalar root finding, minimization and rational detection.

/// Golden-section minimization of a unimodal `f` on `[a, b]`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .fold((x, fx), |best, cand| if cand.1 < best.1 { cand } else { best })
}

/// Root of `g` in `[lo, hi]` by Newton steps that fall back to bisection when
/// they leave the bracket. Requires a sign change; otherwise returns the
/// endpoint with smaller `|g|`.
pub fn safeguarded_newton(
    g: impl Fn(f64) -> f64,
    dg: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> f64 {
    let (mut glo, ghi) = (g(lo), g(hi));
    if glo == 0.0 {
        return lo;
    }
    if ghi == 0.0 {
        return hi;
    }
    if glo.signum() == ghi.signum() {
        return if glo.abs() < ghi.abs() { lo } else { hi };
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gx = g(x);
        if gx == 0.0 {
            return x;
        }
        if gx.signum() == glo.signum() {
            lo = x;
            glo = gx;
        } else {
            hi = x;
        }
        let d = dg(x);
        let newton = x - gx / d;
        let next = if d != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= tol || (hi - lo) <= tol {
            return next;
        }
        x = next;
    }
    x
}

/// Best rational `p/q` with `q <= max_den` from the continued fraction of `x`,
/// accepted when `|x - p/q| <= tol * max(1, |x|)`.
pub fn rational_approx(x: f64, max_den: i64, tol: f64) -> Option<(i64, i64)> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (x - h1 as f64 / k1 as f64).abs() <= tol * x.abs().max(1.0) {
            return Some((h1, k1));
        }
        let frac = r - a as f64;
        if frac == 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Distance from `x` to the nearest integer.
pub fn dist_to_integer(x: f64) -> f64 {
    (x - x.round()).abs()
}
