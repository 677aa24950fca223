//! Ai and Ai′ on [−200, 100].
//!
//! * Maclaurin series on [−5, 5.5];
//! * Taylor continuation of y″ = xy from −5 on (−8, −5);
//! * optimally truncated asymptotic series above 5.5 and below −8.

use std::f64::consts::PI;

use crate::{Error, Result};

pub const AIRY_MIN: f64 = -200.0;
pub const AIRY_MAX: f64 = 100.0;

/// Ai(0) = 3^{−2/3}/Γ(2/3), −Ai′(0) = 3^{−1/3}/Γ(1/3).
const AI0: f64 = 0.355_028_053_887_817_2;
const AIP0: f64 = 0.258_819_403_792_806_8;

const SWITCH_POS: f64 = 5.5;
const SWITCH_NEG: f64 = -8.0;
const MACLAURIN_NEG: f64 = -5.0;

pub fn airy_ai(x: f64) -> Result<f64> {
    check(x)?;
    Ok(ai_pair(x).0)
}

pub fn airy_ai_prime(x: f64) -> Result<f64> {
    check(x)?;
    Ok(ai_pair(x).1)
}

fn check(x: f64) -> Result<()> {
    if !(AIRY_MIN..=AIRY_MAX).contains(&x) {
        return Err(Error::Domain(format!(
            "Airy argument {x} outside the accuracy window [{AIRY_MIN}, {AIRY_MAX}]"
        )));
    }
    Ok(())
}

/// (Ai(x), Ai′(x)) without the window check. Beyond the right end of the
/// window both underflow to zero anyway.
pub(crate) fn ai_pair(x: f64) -> (f64, f64) {
    if x >= SWITCH_POS {
        asymptotic_pos(x)
    } else if x >= MACLAURIN_NEG {
        maclaurin(x)
    } else if x > SWITCH_NEG {
        taylor_from(MACLAURIN_NEG, maclaurin(MACLAURIN_NEG), x)
    } else {
        asymptotic_neg(-x)
    }
}

fn maclaurin(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    let (mut f, mut g, mut fp, mut gp) = (1.0, x, 0.0, 1.0);
    let (mut tf, mut tg) = (1.0, x);
    let mut tfp = x * x / 2.0;
    let mut tgp = 1.0;
    fp += tfp;
    for k in 1..200 {
        let k3 = 3.0 * k as f64;
        tf *= x3 / ((k3 - 1.0) * k3);
        tg *= x3 / ((k3 + 1.0) * k3);
        tgp *= x3 / ((k3 - 2.0) * k3);
        f += tf;
        g += tg;
        gp += tgp;
        if k >= 2 {
            tfp *= x3 / ((k3 - 3.0) * (k3 - 1.0));
            fp += tfp;
        }
        let scale = f.abs() + g.abs() + fp.abs() + gp.abs();
        if tf.abs() + tg.abs() + tfp.abs() + tgp.abs() < 1e-17 * scale {
            break;
        }
    }
    (AI0 * f - AIP0 * g, AI0 * fp - AIP0 * gp)
}

/// Integrates y″ = xy from `x0` with data `(y, y′)` to `x` by Taylor steps
/// of length at most ½.
fn taylor_from(x0: f64, (mut y, mut yp): (f64, f64), x: f64) -> (f64, f64) {
    let steps = ((x - x0).abs() / 0.5).ceil().max(1.0) as usize;
    let h = (x - x0) / steps as f64;
    let mut c = x0;
    for _ in 0..steps {
        // Coefficients a_n of y(c + s) = Σ a_n s^n:
        // (n+2)(n+1) a_{n+2} = c·a_n + a_{n−1}.
        let mut a = [0.0f64; 48];
        a[0] = y;
        a[1] = yp;
        a[2] = c * y / 2.0;
        for n in 1..46 {
            a[n + 2] = (c * a[n] + a[n - 1]) / ((n + 2) as f64 * (n + 1) as f64);
        }
        let (mut v, mut d) = (0.0, 0.0);
        for n in (0..48).rev() {
            v = v * h + a[n];
        }
        for n in (1..48).rev() {
            d = d * h + n as f64 * a[n];
        }
        y = v;
        yp = d;
        c += h;
    }
    (y, yp)
}

/// u_k and v_k of the Airy asymptotic expansions.
fn uv_coefficients(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0; n];
    let mut v = vec![1.0; n];
    for k in 1..n {
        let kf = k as f64;
        u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        v[k] = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u[k];
    }
    (u, v)
}

/// Σ_j (−1)^j c_{start+j·stride} ζ^{−(start+j·stride)}, stopped at the
/// smallest term.
fn alternating_series(c: &[f64], zeta: f64, start: usize, stride: usize) -> f64 {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut sign = 1.0;
    let mut k = start;
    while k < c.len() {
        let term = c[k] / zeta.powi(k as i32);
        if term.abs() > prev {
            break;
        }
        sum += sign * term;
        prev = term.abs();
        sign = -sign;
        k += stride;
    }
    sum
}

fn asymptotic_pos(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let (u, v) = uv_coefficients(40);
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    let x4 = x.powf(0.25);
    let ai = e / x4 * alternating_series(&u, zeta, 0, 1);
    let aip = -e * x4 * alternating_series(&v, zeta, 0, 1);
    (ai, aip)
}

/// Ai(−x), Ai′(−x) for x > 0.
fn asymptotic_neg(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let (u, v) = uv_coefficients(40);
    let x4 = x.powf(0.25);
    let phase = zeta - PI / 4.0;
    let (s, c) = phase.sin_cos();
    let ue = alternating_series(&u, zeta, 0, 2);
    let uo = alternating_series(&u, zeta, 1, 2);
    let ve = alternating_series(&v, zeta, 0, 2);
    let vo = alternating_series(&v, zeta, 1, 2);
    let ai = (c * ue + s * uo) / (PI.sqrt() * x4);
    let aip = x4 / PI.sqrt() * (s * ve - c * vo);
    (ai, aip)
}
