//! Fredholm determinants of the Airy kernel by Nyström discretisation.
//!
//! E[∏ₚ 1/(1 + u·e^{Caₚ})] = det(I − √φ K_Ai √φ) with
//! φ(x) = u·e^{Cx}/(1 + u·e^{Cx}). The half-line is cut at `right`, where the
//! kernel is negligible, and at s₀ = −(ln u + margin)/C on the left, where
//! φ < e^{−margin}; the interval is covered by Gauss–Legendre panels.

use rayon::prelude::*;

use super::function::ai_pair;
use super::{kernel_unchecked, AiryConfig};
use crate::quadrature::{composite_legendre, real_det, KahanSum};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FredholmConfig {
    /// Gauss–Legendre nodes per panel.
    pub order: usize,
    pub panel_width: f64,
    /// Right truncation point.
    pub right: f64,
    /// The left cut makes φ(s₀) = e^{−margin} (approximately).
    pub margin: f64,
    /// Largest change allowed when the panel order is raised by half.
    pub check_tol: f64,
}

impl Default for FredholmConfig {
    fn default() -> Self {
        FredholmConfig {
            order: 16,
            panel_width: 1.0,
            right: 16.0,
            margin: 30.0,
            check_tol: 1e-8,
        }
    }
}

impl FredholmConfig {
    pub fn left_cutoff(&self, u: f64, c: f64) -> f64 {
        (-(u.ln() + self.margin) / c).min(self.right - 8.0)
    }
}

/// Determinant and the change seen under refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FredholmEstimate {
    pub value: f64,
    pub err: f64,
    pub nodes: usize,
}

/// det(I − W^{1/2}·√φ K √φ·W^{1/2}) on the given nodes.
fn nystrom_det(nodes: &[f64], weights: &[f64], phi: impl Fn(f64) -> f64) -> f64 {
    let n = nodes.len();
    let ai: Vec<(f64, f64)> = nodes.iter().map(|&s| ai_pair(s)).collect();
    let scale: Vec<f64> = nodes
        .iter()
        .zip(weights)
        .map(|(&s, &w)| (w * phi(s)).sqrt())
        .collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (si, (a, ap)) = (nodes[i], ai[i]);
            (0..n)
                .map(|j| {
                    let sj = nodes[j];
                    let k = if i == j {
                        ap * ap - si * a * a
                    } else if (si - sj).abs() < 1e-3 {
                        kernel_unchecked(si, sj)
                    } else {
                        (a * ai[j].1 - ap * ai[j].0) / (si - sj)
                    };
                    let v = -scale[i] * k * scale[j];
                    if i == j {
                        1.0 + v
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    real_det(&flat, n)
}

/// φ(x) = 1/(1 + e^{−(Cx + ln u)}), evaluated without overflow.
fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn multiplicative_at(u: f64, cfg: &AiryConfig, f: &FredholmConfig, order: usize) -> Result<(f64, usize)> {
    let left = f.left_cutoff(u, cfg.c);
    let panels = ((f.right - left) / f.panel_width).ceil().max(1.0) as usize;
    let (x, w) = composite_legendre(order, panels, left, f.right)?;
    let lu = u.ln();
    let c = cfg.c;
    Ok((nystrom_det(&x, &w, |s| logistic(c * s + lu)), x.len()))
}

/// E[∏ₚ(1 + u·e^{Caₚ})^{−1}] over the Airy point process.
pub fn fredholm_multiplicative(u: f64, cfg: &AiryConfig, f: &FredholmConfig) -> Result<FredholmEstimate> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::Domain(format!("u must be positive, got {u}")));
    }
    if f.order < 2 || !(f.panel_width > 0.0) {
        return Err(Error::domain("Fredholm rule needs order >= 2 and a positive panel width"));
    }
    let (coarse, _) = multiplicative_at(u, cfg, f, f.order)?;
    let (fine, nodes) = multiplicative_at(u, cfg, f, f.order + f.order / 2)?;
    let err = (fine - coarse).abs();
    if err > f.check_tol {
        return Err(Error::Accuracy(format!(
            "Fredholm determinant changed by {err:e} under refinement (u = {u})"
        )));
    }
    if !(fine > 0.0 && fine <= 1.0 + 1e-12) {
        return Err(Error::Inconsistent(format!(
            "Fredholm determinant {fine} outside (0, 1]"
        )));
    }
    Ok(FredholmEstimate {
        value: fine.min(1.0),
        err,
        nodes,
    })
}

/// The difference quotient [1 − F(u)]/u, which tends to E[Σₚ e^{Caₚ}] as u → 0.
pub fn fredholm_slope(u: f64, cfg: &AiryConfig, f: &FredholmConfig) -> Result<FredholmEstimate> {
    let d = fredholm_multiplicative(u, cfg, f)?;
    Ok(FredholmEstimate {
        value: (1.0 - d.value) / u,
        err: d.err / u,
        nodes: d.nodes,
    })
}

/// E[Σₚ e^{Caₚ}] from slopes at u₀, u₀/2, u₀/4 with two Richardson steps.
/// `err` adds the last Richardson correction to the propagated determinant
/// errors.
pub fn fredholm_first_moment(u0: f64, cfg: &AiryConfig, f: &FredholmConfig) -> Result<FredholmEstimate> {
    let s: Vec<FredholmEstimate> = [u0, u0 / 2.0, u0 / 4.0]
        .iter()
        .map(|&u| fredholm_slope(u, cfg, f))
        .collect::<Result<_>>()?;
    let r1a = 2.0 * s[1].value - s[0].value;
    let r1b = 2.0 * s[2].value - s[1].value;
    let r2 = (4.0 * r1b - r1a) / 3.0;
    let propagated = s[0].err + 3.0 * s[1].err + 8.0 / 3.0 * s[2].err;
    Ok(FredholmEstimate {
        value: r2,
        err: (r2 - r1b).abs() + propagated,
        nodes: s[2].nodes,
    })
}

/// Tracy–Widom GUE distribution F₂(s) = det(I − K_Ai) on L²(s, ∞).
pub fn tracy_widom_cdf(s: f64) -> Result<f64> {
    if !(-12.0..=20.0).contains(&s) {
        return Err(Error::Domain(format!("Tracy-Widom argument {s} outside [-12, 20]")));
    }
    let (x, w) = composite_legendre(12, 16, s, s + 16.0)?;
    Ok(nystrom_det(&x, &w, |_| 1.0).clamp(0.0, 1.0))
}

/// Mean and variance of the Tracy–Widom GUE law, from
/// E[a] = ∫₀^∞ (1−F) − ∫_{−∞}^0 F and E[a²] = 2∫₀^∞ s(1−F) + 2∫_{−∞}^0 |s|F.
pub fn tracy_widom_moments() -> Result<(f64, f64)> {
    let mut m1 = KahanSum::default();
    let mut m2 = KahanSum::default();
    let (xl, wl) = composite_legendre(10, 10, -10.0, 0.0)?;
    for (s, w) in xl.iter().zip(&wl) {
        let f = tracy_widom_cdf(*s)?;
        m1.add(-w * f);
        m2.add(2.0 * w * s.abs() * f);
    }
    let (xr, wr) = composite_legendre(10, 10, 0.0, 10.0)?;
    for (s, w) in xr.iter().zip(&wr) {
        let f = tracy_widom_cdf(*s)?;
        m1.add(w * (1.0 - f));
        m2.add(2.0 * w * s * (1.0 - f));
    }
    let mean = m1.total();
    Ok((mean, m2.total() - mean * mean))
}
