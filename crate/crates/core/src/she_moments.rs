//! E[𝒵(T,X)ᵏ] by nested contour integrals, by the partition expansion and by
//! a Gaussian-expectation Monte Carlo.
//!
//! Contour form: (2πi)^{−k} ∫ ∏_{A<B} (z_A−z_B)/(z_A−z_B−1) · e^{(T/2)Σz² + XΣz} dz
//! with z_j on vertical lines α_j + iℝ, α_A − α_B > 1 for A < B.
//!
//! Partition form: Σ_{λ⊢k} k!/∏mᵢ! · (2πi)^{−ℓ} ∫ det[1/(wᵢ+λᵢ−w_j)]
//! ∏_j e^{(T/2)Σ_{r<λ_j}(w_j+r)²} dw. Each line is moved to
//! w_j = −(λ_j−1)/2 + iy_j, where the exponent becomes
//! T(λ_j³−λ_j)/24 − Tλ_j y_j²/2, so the term is a closed-form prefactor times
//! a Gaussian expectation of the determinant, which is real (the matrix is
//! Hermitian, a Cauchy matrix in λᵢ/2 ± iyᵢ).

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde_json::json;

use crate::combinatorics::{enumerate_partitions, factorial_f64, multiplicity_factor, Partition};
use crate::quadrature::{
    complex_det, gauss_hermite, trapezoid_tensor, KahanSum, LineContour, TensorGrid,
};
use crate::report::{Method, MomentEstimate};
use crate::rng::{derive_index, derive_seed, stream};
use crate::{Error, Result};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// A moment to compute: E[𝒵(T,X)ᵏ].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRequest {
    pub k: u32,
    pub t: f64,
    pub x: f64,
}

impl MomentRequest {
    pub fn new(k: u32, t: f64, x: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("moment order k must be at least 1"));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("time must be positive, got {t}")));
        }
        if !x.is_finite() {
            return Err(Error::domain("space coordinate must be finite"));
        }
        Ok(MomentRequest { k, t, x })
    }
}

/// e^{−X²/2T}/√(2πT), the first moment.
pub fn heat_kernel(t: f64, x: f64) -> f64 {
    (-x * x / (2.0 * t)).exp() / (TWO_PI * t).sqrt()
}

/// Factor and origin request with E[𝒵(T,X)ᵏ] = factor · E[𝒵(T,0)ᵏ].
pub fn reduce_to_origin(req: &MomentRequest) -> (f64, MomentRequest) {
    let factor = (-(req.k as f64) * req.x * req.x / (2.0 * req.t)).exp();
    (factor, MomentRequest { x: 0.0, ..*req })
}

/// Spacing used by the default anchor schedule.
pub const ANCHOR_SPACING: f64 = 1.5;

/// α_j = (k−j)·1.5, j = 1..k.
pub fn default_anchors(k: u32) -> Vec<f64> {
    (1..=k).map(|j| f64::from(k - j) * ANCHOR_SPACING).collect()
}

/// The same spacing centred on zero, which keeps e^{TΣα²/2} small.
pub fn centred_anchors(k: u32) -> Vec<f64> {
    let mid = (f64::from(k) + 1.0) / 2.0;
    (1..=k).map(|j| (mid - f64::from(j)) * ANCHOR_SPACING).collect()
}

/// Largest order for tensor quadrature and for the sampled contour mode.
pub const MAX_TENSOR_K: u32 = 3;
pub const MAX_CONTOUR_K: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContourMode {
    /// Tensor quadrature up to k = 3, sampling above.
    Auto,
    Tensor,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContourConfig {
    pub mode: ContourMode,
    /// Line abscissae; defaults depend on the mode.
    pub anchors: Option<Vec<f64>>,
    /// Target accuracy driving the trapezoid step and truncation.
    pub tol: Option<f64>,
    /// Explicit interval count per axis, overriding `tol`.
    pub intervals: Option<usize>,
    pub halfwidth: Option<f64>,
    pub samples: usize,
    pub seed: u64,
}

impl Default for ContourConfig {
    fn default() -> Self {
        ContourConfig {
            mode: ContourMode::Auto,
            anchors: None,
            tol: None,
            intervals: None,
            halfwidth: None,
            samples: 400_000,
            seed: 0,
        }
    }
}

fn check_anchors(anchors: &[f64], k: u32) -> Result<()> {
    if anchors.len() != k as usize {
        return Err(Error::Domain(format!(
            "expected {k} anchors, got {}",
            anchors.len()
        )));
    }
    for a in 0..anchors.len() {
        for b in a + 1..anchors.len() {
            if !(anchors[a] - anchors[b] > 1.0) {
                return Err(Error::Domain(format!(
                    "anchors {a} and {b} are {} apart; contours must be separated by more than 1",
                    anchors[a] - anchors[b]
                )));
            }
        }
    }
    Ok(())
}

/// ∏_{A<B} (z_A−z_B)/(z_A−z_B−1) · e^{(T/2)Σz² + XΣz}.
fn contour_integrand(z: &[Complex64], t: f64, x: f64) -> Complex64 {
    let mut cross = Complex64::new(1.0, 0.0);
    for a in 0..z.len() {
        for b in a + 1..z.len() {
            let d = z[a] - z[b];
            cross *= d / (d - 1.0);
        }
    }
    let mut expo = Complex64::new(0.0, 0.0);
    for zj in z {
        expo += 0.5 * t * zj * zj + x * zj;
    }
    cross * expo.exp()
}

/// Nested contour integral for E[𝒵(T,X)ᵏ].
pub fn moment_contour(req: &MomentRequest, cfg: &ContourConfig) -> Result<MomentEstimate> {
    let k = req.k;
    if k > MAX_CONTOUR_K {
        return Err(Error::Domain(format!(
            "contour integration supports k <= {MAX_CONTOUR_K}, got {k}"
        )));
    }
    let tensor = match cfg.mode {
        ContourMode::Auto => k <= MAX_TENSOR_K,
        ContourMode::Tensor => true,
        ContourMode::MonteCarlo => false,
    };
    if tensor && k > MAX_TENSOR_K {
        return Err(Error::Domain(format!(
            "tensor quadrature supports k <= {MAX_TENSOR_K}, got {k}"
        )));
    }
    let anchors = match &cfg.anchors {
        Some(a) => a.clone(),
        None if tensor => default_anchors(k),
        None => centred_anchors(k),
    };
    check_anchors(&anchors, k)?;
    let est = if tensor {
        contour_tensor(req, &anchors, cfg)?
    } else {
        contour_mc(req, &anchors, cfg)?
    };
    if !(est.value > 0.0) {
        return Err(Error::Inconsistent(format!(
            "contour estimate {} is not positive",
            est.value
        )));
    }
    Ok(est)
}

fn contour_tensor(req: &MomentRequest, anchors: &[f64], cfg: &ContourConfig) -> Result<MomentEstimate> {
    let (k, t, x) = (req.k, req.t, req.x);
    let tol = cfg.tol.unwrap_or(if k <= 2 { 1e-10 } else { 1e-6 });
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::domain("contour tolerance must lie in (0, 1)"));
    }
    // Distance from the lines to the nearest cross-factor pole; bounds the
    // strip of analyticity and hence the trapezoid error e^{−2πd/h}.
    let d = (0..anchors.len())
        .flat_map(|a| (a + 1..anchors.len()).map(move |b| (a, b)))
        .map(|(a, b)| anchors[a] - anchors[b] - 1.0)
        .fold(1.0_f64, f64::min);
    let growth: f64 = anchors
        .iter()
        .map(|&a| (0.5 * t * a * a + x * a).max(0.0))
        .sum();
    let budget = (1.0 / tol).ln() + growth + 3.0;
    let halfwidth = cfg
        .halfwidth
        .unwrap_or_else(|| (2.0 * (budget + 10.0) / t).sqrt());
    let intervals = match cfg.intervals {
        Some(n) => n,
        None => {
            // The half-resolution rule (step 2h) must already reach the budget.
            let h = std::f64::consts::PI * d / budget;
            let n = (2.0 * halfwidth / h).ceil() as usize;
            n.div_ceil(4).max(2) * 4
        }
    };
    let axes = anchors
        .iter()
        .map(|&a| LineContour::vertical(a, halfwidth, intervals))
        .collect::<Result<Vec<_>>>()?;
    let grid = TensorGrid::new(axes)?;
    let raw = trapezoid_tensor(|z| contour_integrand(z, t, x), &grid)?;
    let norm = Complex64::new(0.0, TWO_PI).powu(k);
    let v = raw.value / norm;
    let err = raw.err / TWO_PI.powi(k as i32);
    if v.im.abs() > 10.0 * err + 1e-300 {
        return Err(Error::Inconsistent(format!(
            "imaginary part {} exceeds ten times the error estimate {err}",
            v.im
        )));
    }
    Ok(MomentEstimate::new(Method::Contour, v.re, err)
        .with("mode", "tensor")
        .with("anchors", anchors.to_vec())
        .with("halfwidth", halfwidth)
        .with("intervals_per_axis", intervals)
        .with("nodes", grid.total_nodes())
        .with("imag", v.im))
}

/// Chunk size for all chunked Monte Carlo loops.
pub(crate) const MC_CHUNK: usize = 4096;

/// Draws y_j ~ N(0, 1/T) independently; the Gaussian part of the integrand
/// divided by the proposal density leaves ∏ e^{Tα²/2+Xα}/√(2πT) times the
/// oscillating phase and the cross factor.
fn contour_mc(req: &MomentRequest, anchors: &[f64], cfg: &ContourConfig) -> Result<MomentEstimate> {
    let (t, x) = (req.t, req.x);
    let k = anchors.len();
    if cfg.samples < 1000 {
        return Err(Error::domain("sampled contour mode needs at least 1000 samples"));
    }
    let seed = derive_seed(cfg.seed, "contour_mc");
    let sd = 1.0 / t.sqrt();
    let log_pref: f64 = anchors
        .iter()
        .map(|&a| 0.5 * t * a * a + x * a - 0.5 * (TWO_PI * t).ln())
        .sum();
    let pref = log_pref.exp();
    let chunks = cfg.samples.div_ceil(MC_CHUNK);
    let partials: Vec<(f64, f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, c as u64);
            let n = MC_CHUNK.min(cfg.samples - c * MC_CHUNK);
            let mut z = vec![Complex64::new(0.0, 0.0); k];
            let (mut s, mut s2, mut si) = (0.0, 0.0, 0.0);
            for _ in 0..n {
                let mut phase = 0.0;
                for (j, zj) in z.iter_mut().enumerate() {
                    let y: f64 = rng.sample::<f64, _>(StandardNormal) * sd;
                    *zj = Complex64::new(anchors[j], y);
                    phase += (t * anchors[j] + x) * y;
                }
                let mut cross = Complex64::new(1.0, 0.0);
                for a in 0..k {
                    for b in a + 1..k {
                        let d = z[a] - z[b];
                        cross *= d / (d - 1.0);
                    }
                }
                let v = cross * Complex64::from_polar(1.0, phase);
                s += v.re;
                s2 += v.re * v.re;
                si += v.im;
            }
            (s, s2, si)
        })
        .collect();
    let (mut s, mut s2, mut si) = (KahanSum::default(), KahanSum::default(), KahanSum::default());
    for (a, b, c) in partials {
        s.add(a);
        s2.add(b);
        si.add(c);
    }
    let n = cfg.samples as f64;
    let mean = s.total() / n;
    let var = (s2.total() / n - mean * mean).max(0.0) * n / (n - 1.0);
    let se = (var / n).sqrt();
    let value = pref * mean;
    let err = pref * se;
    let imag = pref * si.total() / n;
    if imag.abs() > 10.0 * err {
        return Err(Error::Inconsistent(format!(
            "imaginary part {imag} exceeds ten times the standard error {err}"
        )));
    }
    Ok(MomentEstimate::new(Method::Contour, value, err)
        .with("mode", "importance_sampling")
        .with("anchors", anchors.to_vec())
        .with("samples", cfg.samples)
        .with("seed", cfg.seed)
        .with("imag", imag))
}

/// Value of the λ = (k) summand, also in log form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominantTerm {
    pub value: f64,
    pub log_value: f64,
}

/// The λ = (k) summand of the partition expansion in closed form:
/// (k−1)!·e^{T(k³−k)/24}/√(2πkT).
pub fn dominant_term(k: u32, t: f64) -> Result<DominantTerm> {
    MomentRequest::new(k, t, 0.0)?;
    let kf = f64::from(k);
    let log_value =
        ln_factorial(k - 1) + t * (kf * kf * kf - kf) / 24.0 - 0.5 * (TWO_PI * kf * t).ln();
    Ok(DominantTerm {
        value: log_value.exp(),
        log_value,
    })
}

pub(crate) fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|i| f64::from(i).ln()).sum()
}

/// Largest k for the partition expansion and largest length on full tensor
/// Gauss–Hermite grids.
pub const MAX_PARTITION_K: u32 = 8;
pub const MAX_TENSOR_LENGTH: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionConfig {
    /// Gauss–Hermite order for every term with ℓ ≥ 2; by default it depends
    /// on ℓ (see [`default_hermite_order`]).
    pub hermite_order: Option<usize>,
    /// Samples per term for ℓ > 4.
    pub samples: usize,
    pub seed: u64,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig {
            hermite_order: None,
            samples: 200_000,
            seed: 0,
        }
    }
}

/// Gauss–Hermite order used for a term of length ℓ.
pub fn default_hermite_order(len: usize) -> usize {
    match len {
        0 | 1 => 1,
        2 => 200,
        3 => 100,
        _ => 40,
    }
}

/// One summand of the partition expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionTerm {
    pub partition: Partition,
    /// ln of k!/∏mᵢ! · ∏_j e^{T(λ_j³−λ_j)/24}/(2π) · √(2π/(Tλ_j)).
    pub log_prefactor: f64,
    /// Gaussian expectation of the determinant and its error.
    pub expectation: f64,
    pub err: f64,
    pub rule: String,
}

impl PartitionTerm {
    pub fn value(&self) -> f64 {
        self.log_prefactor.exp() * self.expectation
    }
}

fn term_prefactor(lambda: &Partition, t: f64) -> f64 {
    let log_mult = multiplicity_factor(lambda).to_f64().map_or(f64::INFINITY, f64::ln);
    lambda
        .parts()
        .iter()
        .map(|&l| {
            let l = f64::from(l);
            t * (l * l * l - l) / 24.0 - TWO_PI.ln() + 0.5 * (TWO_PI / (t * l)).ln()
        })
        .sum::<f64>()
        + log_mult
}

/// det[1/(i(yᵢ−y_j) + (λᵢ+λ_j)/2)] through a complex LU.
fn partition_det(lambda: &[f64], y: &[f64]) -> Complex64 {
    let n = lambda.len();
    let mut m = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            m.push(1.0 / Complex64::new(0.5 * (lambda[i] + lambda[j]), y[i] - y[j]));
        }
    }
    complex_det(&m, n)
}

/// E[det] with y_j ~ N(0, 1/(Tλ_j)) on a tensor Gauss–Hermite grid.
fn hermite_expectation(lambda: &[f64], t: f64, order: usize) -> Result<Complex64> {
    let rule = gauss_hermite(order)?;
    let n = lambda.len();
    let scale: Vec<f64> = lambda.iter().map(|&l| (2.0 / (t * l)).sqrt()).collect();
    let inner: usize = order.pow(n as u32 - 1);
    let partials: Vec<Complex64> = (0..order)
        .into_par_iter()
        .map(|i0| {
            let mut acc = crate::quadrature::ComplexSum::default();
            let mut y = vec![0.0; n];
            y[0] = rule.nodes[i0] * scale[0];
            for flat in 0..inner {
                let mut r = flat;
                let mut w = rule.weights[i0];
                for a in (1..n).rev() {
                    let idx = r % order;
                    r /= order;
                    y[a] = rule.nodes[idx] * scale[a];
                    w *= rule.weights[idx];
                }
                acc.add(partition_det(lambda, &y) * w);
            }
            acc.total()
        })
        .collect();
    let mut total = crate::quadrature::ComplexSum::default();
    for p in partials {
        total.add(p);
    }
    Ok(total.total() / std::f64::consts::PI.powf(0.5 * n as f64))
}

/// Monte Carlo mean of ∏_{i<j} [(zᵢ−z_j)² + (aᵢ−a_j)²/4]/[(zᵢ−z_j)² + (aᵢ+a_j)²/4]
/// with independent zᵢ ~ N(0, varᵢ). Returns (mean, standard error).
pub fn cauchy_ratio_mc(a: &[f64], var: &[f64], samples: usize, seed: u64) -> (f64, f64) {
    let n = a.len();
    if n < 2 {
        return (1.0, 0.0);
    }
    let sd: Vec<f64> = var.iter().map(|v| v.sqrt()).collect();
    let chunks = samples.div_ceil(MC_CHUNK);
    let partials: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, c as u64);
            let m = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut z = vec![0.0; n];
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..m {
                for (zi, sdi) in z.iter_mut().zip(&sd) {
                    *zi = rng.sample::<f64, _>(StandardNormal) * sdi;
                }
                let mut r = 1.0;
                for i in 0..n {
                    for j in i + 1..n {
                        let d2 = (z[i] - z[j]) * (z[i] - z[j]);
                        let dm = 0.5 * (a[i] - a[j]);
                        let dp = 0.5 * (a[i] + a[j]);
                        r *= (d2 + dm * dm) / (d2 + dp * dp);
                    }
                }
                s += r;
                s2 += r * r;
            }
            (s, s2)
        })
        .collect();
    let (mut s, mut s2) = (KahanSum::default(), KahanSum::default());
    for (a, b) in partials {
        s.add(a);
        s2.add(b);
    }
    let nf = samples as f64;
    let mean = s.total() / nf;
    let var = (s2.total() / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    (mean, (var / nf).sqrt())
}

/// Evaluates one partition term.
pub fn partition_term(lambda: &Partition, t: f64, cfg: &PartitionConfig, index: u64) -> Result<PartitionTerm> {
    let parts: Vec<f64> = lambda.parts().iter().map(|&p| f64::from(p)).collect();
    let len = parts.len();
    let log_prefactor = term_prefactor(lambda, t);
    let diag: f64 = parts.iter().map(|l| 1.0 / l).product();
    let (expectation, err, rule) = if len == 1 {
        (diag, f64::EPSILON * diag, "closed_form".to_string())
    } else if len <= MAX_TENSOR_LENGTH {
        let order = cfg.hermite_order.unwrap_or_else(|| default_hermite_order(len));
        let fine = hermite_expectation(&parts, t, order)?;
        let coarse = hermite_expectation(&parts, t, (3 * order / 4).max(1))?;
        let err = (fine.re - coarse.re).abs().max(4.0 * f64::EPSILON * fine.re.abs());
        if fine.im.abs() > 10.0 * err + 1e-14 * fine.re.abs() {
            return Err(Error::Inconsistent(format!(
                "determinant expectation for {lambda} has imaginary part {}",
                fine.im
            )));
        }
        (fine.re, err, format!("gauss_hermite({order})"))
    } else {
        if cfg.samples < 1000 {
            return Err(Error::domain("partition sampling needs at least 1000 samples"));
        }
        let var: Vec<f64> = parts.iter().map(|&l| 1.0 / (t * l)).collect();
        let seed = derive_index(derive_seed(cfg.seed, "partition"), index);
        let (m, se) = cauchy_ratio_mc(&parts, &var, cfg.samples, seed);
        (diag * m, diag * se, format!("monte_carlo({})", cfg.samples))
    };
    Ok(PartitionTerm {
        partition: lambda.clone(),
        log_prefactor,
        expectation,
        err,
        rule,
    })
}

/// Partition/determinant expansion of E[𝒵(T,X)ᵏ]; X enters through
/// [`reduce_to_origin`].
pub fn moment_partition(req: &MomentRequest, cfg: &PartitionConfig) -> Result<MomentEstimate> {
    let k = req.k;
    if k > MAX_PARTITION_K {
        return Err(Error::Domain(format!(
            "partition expansion supports k <= {MAX_PARTITION_K}, got {k}"
        )));
    }
    let (factor, origin) = reduce_to_origin(req);
    let terms: Vec<PartitionTerm> = enumerate_partitions(k)?
        .iter()
        .enumerate()
        .map(|(i, lambda)| partition_term(lambda, origin.t, cfg, i as u64))
        .collect::<Result<_>>()?;
    // Sum relative to the largest prefactor so that large T·k³ stays finite.
    let lmax = terms
        .iter()
        .map(|t| t.log_prefactor)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut sum = KahanSum::default();
    let mut err = 0.0;
    for term in &terms {
        let w = (term.log_prefactor - lmax).exp();
        sum.add(w * term.expectation);
        err += w * term.err;
    }
    let scaled = sum.total();
    if !(scaled > 0.0) {
        return Err(Error::Inconsistent(format!(
            "partition sum is not positive ({scaled})"
        )));
    }
    let log_value = lmax + scaled.ln() + factor.ln();
    let value = log_value.exp();
    if !value.is_finite() {
        return Err(Error::Domain(format!(
            "moment overflows double precision (log value {log_value})"
        )));
    }
    let err = value * err / scaled;
    let term_meta: Vec<_> = terms
        .iter()
        .map(|t| {
            json!({
                "partition": t.partition.to_string(),
                "value": t.value() * factor,
                "err": t.log_prefactor.exp() * t.err * factor,
                "rule": t.rule,
            })
        })
        .collect();
    Ok(MomentEstimate::new(Method::Partition, value, err)
        .with("log_value", log_value)
        .with("terms", term_meta))
}

pub const MAX_GAUSSIAN_MC_K: u32 = 6;

/// Σ_{λ⊢k} (1/∏mᵢ!)·R(Cλ₁,…,Cλ_ℓ), with every R written as
/// ∏ e^{cᵢ³/12}/(2√π cᵢ^{3/2}) times a Monte Carlo Cauchy ratio, then
/// converted to E[𝒵(T,X)ᵏ] = k!·e^{−kT/24}·(sum)·e^{−kX²/2T}.
pub fn moment_gaussian_mc(req: &MomentRequest, samples: usize, seed: u64) -> Result<MomentEstimate> {
    let k = req.k;
    if k > MAX_GAUSSIAN_MC_K {
        return Err(Error::Domain(format!(
            "gaussian Monte Carlo supports k <= {MAX_GAUSSIAN_MC_K}, got {k}"
        )));
    }
    if samples < 1000 {
        return Err(Error::domain("gaussian Monte Carlo needs at least 1000 samples"));
    }
    let (factor, origin) = reduce_to_origin(req);
    let t = origin.t;
    let c = (t / 2.0).cbrt();
    let base = derive_seed(seed, "gaussian_mc");
    let outer = factorial_f64(k) * (-(f64::from(k)) * t / 24.0).exp() * factor;
    let mut value = KahanSum::default();
    let mut var = 0.0;
    for (i, lambda) in enumerate_partitions(k)?.iter().enumerate() {
        let cs: Vec<f64> = lambda.parts().iter().map(|&l| c * f64::from(l)).collect();
        let pref = lambda.inv_multiplicity_factorials()
            * cs.iter().map(|&ci| r_single(ci)).product::<f64>();
        let v: Vec<f64> = cs.iter().map(|&ci| 1.0 / (2.0 * ci)).collect();
        let (m, se) = cauchy_ratio_mc(&cs, &v, samples, derive_index(base, i as u64));
        value.add(pref * m);
        var += (pref * se).powi(2);
    }
    Ok(MomentEstimate::new(
        Method::GaussianMc,
        outer * value.total(),
        outer * var.sqrt(),
    )
    .with("samples_per_term", samples)
    .with("seed", seed))
}

/// R(c) = e^{c³/12}/(2√π c^{3/2}).
pub fn r_single(c: f64) -> f64 {
    (c * c * c / 12.0).exp() / (2.0 * std::f64::consts::PI.sqrt() * c.powf(1.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn request_validation() {
        assert!(MomentRequest::new(0, 1.0, 0.0).is_err());
        assert!(MomentRequest::new(1, 0.0, 0.0).is_err());
        assert!(MomentRequest::new(1, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn first_moment_by_contour() {
        let req = MomentRequest::new(1, 1.0, 1.0).unwrap();
        let est = moment_contour(&req, &ContourConfig::default()).unwrap();
        assert_relative_eq!(est.value, 0.24197072451914337, max_relative = 1e-10);
    }

    #[test]
    fn anchor_gap_is_enforced() {
        let req = MomentRequest::new(2, 1.0, 0.0).unwrap();
        let cfg = ContourConfig {
            anchors: Some(vec![0.9, 0.0]),
            ..Default::default()
        };
        assert!(matches!(moment_contour(&req, &cfg), Err(Error::Domain(_))));
        let cfg = ContourConfig {
            mode: ContourMode::Tensor,
            ..Default::default()
        };
        let req4 = MomentRequest::new(4, 1.0, 0.0).unwrap();
        assert!(moment_contour(&req4, &cfg).is_err());
    }

    #[test]
    fn second_moment_contour_and_partition() {
        let req = MomentRequest::new(2, 1.0, 0.0).unwrap();
        let c = moment_contour(&req, &ContourConfig::default()).unwrap();
        let p = moment_partition(&req, &PartitionConfig::default()).unwrap();
        assert_relative_eq!(c.value, 0.4345303059, max_relative = 1e-9);
        assert_relative_eq!(p.value, c.value, max_relative = 1e-9);
    }

    #[test]
    fn dominant_term_values() {
        assert_relative_eq!(dominant_term(1, 2.0).unwrap().value, 1.0 / (4.0 * std::f64::consts::PI).sqrt());
        assert_relative_eq!(dominant_term(2, 1.0).unwrap().value, 0.3622168826, max_relative = 1e-9);
        let d = dominant_term(5, 4.0).unwrap();
        assert_relative_eq!(d.log_value, 24f64.ln() + 20.0 - 0.5 * (TWO_PI * 20.0).ln(), max_relative = 1e-14);
    }

    #[test]
    fn reduction_factor() {
        let (f, o) = reduce_to_origin(&MomentRequest::new(2, 2.0, 3.0).unwrap());
        assert_relative_eq!(f, (-4.5f64).exp());
        assert_eq!(o.x, 0.0);
    }

    #[test]
    fn hermitian_and_cauchy_forms_agree() {
        let lambda = [3.0, 1.0, 2.0];
        let y = [0.3, -0.4, 1.1];
        let det = partition_det(&lambda, &y);
        let mut prod = 1.0 / 6.0;
        for i in 0..3 {
            for j in i + 1..3 {
                let d2: f64 = (y[i] - y[j]) * (y[i] - y[j]);
                let dm: f64 = 0.5 * (lambda[i] - lambda[j]);
                let dp: f64 = 0.5 * (lambda[i] + lambda[j]);
                prod *= (d2 + dm * dm) / (d2 + dp * dp);
            }
        }
        assert!(det.im.abs() < 1e-15);
        assert_relative_eq!(det.re, prod, max_relative = 1e-13);
    }

    #[test]
    fn gaussian_mc_first_moment() {
        let req = MomentRequest::new(1, 2.0, 0.0).unwrap();
        let e = moment_gaussian_mc(&req, 1000, 1).unwrap();
        assert_relative_eq!(e.value, 1.0 / (4.0 * std::f64::consts::PI).sqrt(), max_relative = 1e-12);
    }
}
