//! Airy function, Airy kernel and functionals of the Airy point process.
//!
//! The Laplace transform R(c₁,…,cₙ) of the Airy kernel determinant is
//! evaluated in Gaussian form:
//!
//! R(c) = ∏ᵢ e^{cᵢ³/12}/(2√π cᵢ^{1/2}) · E[det[1/((cᵢ+c_j)/2 + i(z_j−zᵢ))]]
//!
//! with independent zᵢ ~ N(0, 1/(2cᵢ)). At n = 1 the determinant is 1/c and
//! R(c) = e^{c³/12}/(2√π c^{3/2}).

mod fredholm;
mod function;

pub use fredholm::{
    fredholm_first_moment, fredholm_multiplicative, fredholm_slope, tracy_widom_cdf, tracy_widom_moments, FredholmConfig,
};
pub use function::{airy_ai, airy_ai_prime, AIRY_MAX, AIRY_MIN};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::combinatorics::enumerate_partitions;
use crate::quadrature::{complex_det, composite_legendre, gauss_hermite, ComplexSum, KahanSum};
use crate::she_moments::{default_hermite_order, r_single};
use crate::{Error, Result};

use function::ai_pair;

/// Time parameter and the derived C = (T/2)^{1/3}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryConfig {
    pub t: f64,
    pub c: f64,
}

impl AiryConfig {
    pub fn new(t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("time must be positive, got {t}")));
        }
        Ok(AiryConfig {
            t,
            c: (t / 2.0).cbrt(),
        })
    }
}

/// Divided-difference form [Ai(x)Ai′(y) − Ai′(x)Ai(y)]/(x−y), with the
/// diagonal limit Ai′(x)² − x·Ai(x)².
pub fn airy_kernel(x: f64, y: f64) -> Result<f64> {
    for v in [x, y] {
        if !(AIRY_MIN..=AIRY_MAX).contains(&v) {
            return Err(Error::Domain(format!("kernel argument {v} outside the Airy window")));
        }
    }
    Ok(kernel_unchecked(x, y))
}

pub(crate) fn kernel_unchecked(x: f64, y: f64) -> f64 {
    let d = x - y;
    if d.abs() < 1e-3 {
        // Second order in δ = (x−y)/2 around the midpoint m:
        // K = K(m,m) + δ²/2 · (4·∫_m^∞ sAi² + 2Ai·Ai′).
        let m = 0.5 * (x + y);
        let (a, ap) = ai_pair(m);
        let diag = ap * ap - m * a * a;
        let i1 = (-a * ap + m * ap * ap - m * m * a * a) / 3.0;
        let delta = 0.5 * d;
        return diag + 0.5 * delta * delta * (4.0 * i1 + 2.0 * a * ap);
    }
    let (ax, apx) = ai_pair(x);
    let (ay, apy) = ai_pair(y);
    (ax * apy - apx * ay) / d
}

/// ∫₀^∞ Ai(x+t)Ai(y+t) dt by composite Gauss–Legendre on t ∈ [0, L], with L
/// chosen so that both arguments pass 25 (where Ai < 1e−40).
pub fn airy_kernel_integral(x: f64, y: f64) -> Result<f64> {
    airy_kernel(x, y)?;
    let len = (25.0 - x.min(y)).max(1.0);
    let panels = len.ceil() as usize * 2;
    let (ts, ws) = composite_legendre(20, panels, 0.0, len)?;
    let mut s = KahanSum::default();
    for (t, w) in ts.iter().zip(&ws) {
        s.add(w * ai_pair(x + t).0 * ai_pair(y + t).0);
    }
    Ok(s.total())
}

/// Closed form of ∫ e^{xz} Ai(z+a) Ai(z+b) dz over ℝ:
/// (1/(2√(πx)))·exp(x³/12 − (a+b)x/2 − (a−b)²/(4x)).
pub fn okounkov_transform(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("Okounkov transform needs x > 0, got {x}")));
    }
    Ok((x.powi(3) / 12.0 - (a + b) * x / 2.0 - (a - b).powi(2) / (4.0 * x)).exp()
        / (2.0 * (std::f64::consts::PI * x).sqrt()))
}

/// Result of the numerical Okounkov integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OkounkovQuadrature {
    pub value: f64,
    /// Bound on the discarded left tail.
    pub tail_bound: f64,
}

/// Quadrature of ∫ e^{xz} Ai(z+a) Ai(z+b) dz. On the left the Airy product
/// oscillates with envelope 1/(π√|z|) and is cut where e^{xz} makes the
/// remainder below 1e−13 of the leading scale; on the right Ai decays
/// superexponentially and the cut is at z + min(a,b) = 25.
pub fn okounkov_quadrature(x: f64, a: f64, b: f64) -> Result<OkounkovQuadrature> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("Okounkov transform needs x > 0, got {x}")));
    }
    let shift = a.max(b);
    let left = -(36.0 / x) - shift;
    let right = 25.0 - a.min(b);
    if left + a.min(b) < AIRY_MIN {
        return Err(Error::Domain(format!(
            "x = {x} needs Airy values below the window"
        )));
    }
    let panels = ((right - left) / 0.5).ceil() as usize;
    let (zs, ws) = composite_legendre(20, panels, left, right)?;
    let mut s = KahanSum::default();
    for (z, w) in zs.iter().zip(&ws) {
        s.add(w * (x * z).exp() * ai_pair(z + a).0 * ai_pair(z + b).0);
    }
    // ∫_{−∞}^{left} e^{xz}/(π√|z+shift|) dz ≤ e^{x·left}/(πx√|left+shift|).
    let tail_bound = (x * left).exp() / (std::f64::consts::PI * x * (left + shift).abs().sqrt());
    Ok(OkounkovQuadrature {
        value: s.total(),
        tail_bound,
    })
}

/// Gauss–Hermite configuration for [`laplace_r`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LaplaceConfig {
    /// Order per coordinate; defaults by dimension as in the partition
    /// expansion.
    pub hermite_order: Option<usize>,
}

pub const MAX_LAPLACE_DIM: usize = 4;

/// R(c₁,…,cₙ) by tensor Gauss–Hermite against e^{−cᵢzᵢ²} and a complex LU
/// of det[1/((−izᵢ+cᵢ/2) + (iz_j+c_j/2))].
pub fn laplace_r(c: &[f64], cfg: &LaplaceConfig) -> Result<f64> {
    let n = c.len();
    if n == 0 || n > MAX_LAPLACE_DIM {
        return Err(Error::Domain(format!(
            "laplace_r supports 1..={MAX_LAPLACE_DIM} arguments, got {n}"
        )));
    }
    if c.iter().any(|&ci| !(ci > 0.0 && ci.is_finite())) {
        return Err(Error::domain("laplace_r arguments must be positive"));
    }
    let pref: f64 = c
        .iter()
        .map(|&ci| (ci.powi(3) / 12.0).exp() / (2.0 * std::f64::consts::PI.sqrt() * ci.sqrt()))
        .product();
    if n == 1 {
        return Ok(r_single(c[0]));
    }
    let order = cfg.hermite_order.unwrap_or_else(|| default_hermite_order(n));
    let rule = gauss_hermite(order)?;
    let inner = order.pow(n as u32 - 1);
    let partials: Vec<Complex64> = (0..order)
        .into_par_iter()
        .map(|i0| {
            let mut acc = ComplexSum::default();
            let mut z = vec![0.0; n];
            let mut m = vec![Complex64::new(0.0, 0.0); n * n];
            z[0] = rule.nodes[i0] / c[0].sqrt();
            for flat in 0..inner {
                let mut r = flat;
                let mut w = rule.weights[i0];
                for a in (1..n).rev() {
                    let idx = r % order;
                    r /= order;
                    z[a] = rule.nodes[idx] / c[a].sqrt();
                    w *= rule.weights[idx];
                }
                for i in 0..n {
                    for j in 0..n {
                        m[i * n + j] = 1.0 / Complex64::new(0.5 * (c[i] + c[j]), z[j] - z[i]);
                    }
                }
                acc.add(complex_det(&m, n) * w);
            }
            acc.total()
        })
        .collect();
    let mut total = ComplexSum::default();
    for p in partials {
        total.add(p);
    }
    let e = total.total() / std::f64::consts::PI.powf(0.5 * n as f64);
    if e.im.abs() > 1e-10 * e.re.abs().max(1e-300) {
        return Err(Error::Inconsistent(format!(
            "Gaussian expectation has imaginary part {}",
            e.im
        )));
    }
    Ok(pref * e.re)
}

pub const MAX_AIRY_MOMENT_K: u32 = 4;

/// E[h_k(e^{Ca₁}, e^{Ca₂}, …)] = Σ_{λ⊢k} R(Cλ₁,…,Cλ_ℓ)/∏mᵢ!.
pub fn moment_from_airy(k: u32, cfg: &AiryConfig, lap: &LaplaceConfig) -> Result<f64> {
    if k == 0 || k > MAX_AIRY_MOMENT_K {
        return Err(Error::Domain(format!(
            "moment_from_airy supports 1..={MAX_AIRY_MOMENT_K}, got {k}"
        )));
    }
    let mut s = KahanSum::default();
    for lambda in enumerate_partitions(k)? {
        let c: Vec<f64> = lambda.parts().iter().map(|&l| cfg.c * f64::from(l)).collect();
        s.add(lambda.inv_multiplicity_factorials() * laplace_r(&c, lap)?);
    }
    Ok(s.total())
}

/// `moment_from_airy` at the default Gauss–Hermite orders together with the
/// change against orders reduced by a quarter.
pub fn moment_from_airy_with_err(k: u32, cfg: &AiryConfig) -> Result<(f64, f64)> {
    if k == 0 || k > MAX_AIRY_MOMENT_K {
        return Err(Error::Domain(format!(
            "moment_from_airy supports 1..={MAX_AIRY_MOMENT_K}, got {k}"
        )));
    }
    let mut fine = KahanSum::default();
    let mut err = 0.0;
    for lambda in enumerate_partitions(k)? {
        let c: Vec<f64> = lambda.parts().iter().map(|&l| cfg.c * f64::from(l)).collect();
        let w = lambda.inv_multiplicity_factorials();
        let v = laplace_r(&c, &LaplaceConfig::default())?;
        fine.add(w * v);
        if c.len() > 1 {
            let coarse = LaplaceConfig {
                hermite_order: Some(default_hermite_order(c.len()) * 3 / 4),
            };
            err += w * (v - laplace_r(&c, &coarse)?).abs();
        } else {
            err += w * v * 4.0 * f64::EPSILON;
        }
    }
    Ok((fine.total(), err))
}

/// Converts E[h_k(e^{Ca})] into E[𝒵(T,0)ᵏ] = k!·e^{−kT/24}·E[h_k].
pub fn she_moment_from_hk(k: u32, t: f64, hk: f64) -> f64 {
    crate::combinatorics::factorial_f64(k) * (-(f64::from(k)) * t / 24.0).exp() * hk
}
