//! Approximate Airy point process samples from the β = 2 tridiagonal
//! Hermite ensemble, and Monte Carlo functionals built on them.
//!
//! The matrix has N(0,1) diagonal and off-diagonal entries √(χ²_{2(N−i)}/2),
//! i.e. squared off-diagonals Gamma(N−i, 1). Its top eigenvalues rescaled by
//! a = N^{1/6}(λ − 2√N) approximate the largest Airy points.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Exp1, Gamma, StandardNormal};
use rayon::prelude::*;

use crate::airy::AiryConfig;
use crate::combinatorics::h_complete;
use crate::quadrature::{composite_legendre, KahanSum};
use crate::report::{Method, MomentEstimate};
use crate::rng::{derive_index, derive_seed, stream};
use crate::tridiag::{gershgorin, sturm_count, top_eigenvalues};
use crate::{Error, Result};

pub const MAX_POINTS: usize = 32;
pub const MIN_MATRIX: usize = 100;
pub const MIN_REPLICAS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleConfig {
    /// Matrix dimension N.
    pub n: usize,
    /// Points kept per replica.
    pub m: usize,
    pub replicas: usize,
    pub seed: u64,
}

impl EnsembleConfig {
    pub fn new(n: usize, m: usize, replicas: usize, seed: u64) -> Result<Self> {
        let cfg = EnsembleConfig { n, m, replicas, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m > MAX_POINTS {
            return Err(Error::Domain(format!("m must lie in 1..={MAX_POINTS}, got {}", self.m)));
        }
        if self.n < MIN_MATRIX {
            return Err(Error::Domain(format!("N must be at least {MIN_MATRIX}, got {}", self.n)));
        }
        if self.replicas < MIN_REPLICAS {
            return Err(Error::Domain(format!(
                "at least {MIN_REPLICAS} replicas are needed, got {}",
                self.replicas
            )));
        }
        Ok(())
    }
}

/// Top-m rescaled points per replica, each row sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct AirySampleSet {
    pub config: EnsembleConfig,
    points: Vec<f64>,
    /// Replicas that had to be redrawn because the eigenvalue bracket failed.
    pub retries: usize,
}

impl AirySampleSet {
    pub fn replica(&self, i: usize) -> &[f64] {
        let m = self.config.m;
        &self.points[i * m..(i + 1) * m]
    }

    pub fn replicas(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks(self.config.m)
    }

    pub fn len(&self) -> usize {
        self.config.replicas
    }

    pub fn is_empty(&self) -> bool {
        self.config.replicas == 0
    }

    /// `replica,rank,value` rows, ranks starting at 1.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("replica,rank,value\n");
        for (i, row) in self.replicas().enumerate() {
            for (r, a) in row.iter().enumerate() {
                let _ = writeln!(s, "{i},{},{a:e}", r + 1);
            }
        }
        s
    }

    /// Sample mean and variance of the largest point.
    pub fn top_point_stats(&self) -> (f64, f64) {
        let n = self.len() as f64;
        let mean = self.replicas().map(|r| r[0]).sum::<f64>() / n;
        let var = self.replicas().map(|r| (r[0] - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }
}

/// One replica's points, or `None` if the bracket did not hold.
fn draw_replica(n: usize, m: usize, seed: u64) -> Option<Vec<f64>> {
    let mut rng = stream(seed, 0);
    let diag: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let mut off2 = Vec::with_capacity(n - 1);
    for i in 1..n {
        let g = Gamma::new((n - i) as f64, 1.0).ok()?;
        off2.push(rng.sample(g));
    }
    let nf = n as f64;
    let edge = 2.0 * nf.sqrt();
    let unit = nf.powf(-1.0 / 6.0);
    let (glo, ghi) = gershgorin(&diag, &off2);
    // Tight bracket around the edge, widened to Gershgorin if it misses.
    let mut lo = edge - 60.0 * unit;
    let mut hi = edge + 20.0 * unit;
    if sturm_count(&diag, &off2, lo) > n - m {
        lo = glo - 1.0;
    }
    if sturm_count(&diag, &off2, hi) < n {
        hi = ghi + 1.0;
    }
    let ev = top_eigenvalues(&diag, &off2, m, lo, hi, 1e-10 * unit)?;
    let pts: Vec<f64> = ev.iter().map(|l| (l - edge) / unit).collect();
    if pts.iter().all(|p| p.is_finite()) && pts.windows(2).all(|w| w[0] >= w[1]) {
        Some(pts)
    } else {
        None
    }
}

const MAX_RETRIES: u64 = 8;

/// Samples `replicas` independent point sets. Replica i uses the stream
/// keyed by (seed, i); retries use derived sub-seeds, so results do not
/// depend on the thread count.
pub fn sample_airy_points(cfg: &EnsembleConfig) -> Result<AirySampleSet> {
    cfg.validate()?;
    let base = derive_seed(cfg.seed, "airy_sampler");
    let rows: Vec<Result<(Vec<f64>, usize)>> = (0..cfg.replicas)
        .into_par_iter()
        .map(|i| {
            let seed_i = derive_index(base, i as u64);
            for attempt in 0..MAX_RETRIES {
                let s = if attempt == 0 { seed_i } else { derive_index(seed_i, attempt) };
                if let Some(p) = draw_replica(cfg.n, cfg.m, s) {
                    return Ok((p, attempt as usize));
                }
            }
            Err(Error::Convergence(format!(
                "replica {i}: eigenvalue bisection failed {MAX_RETRIES} times"
            )))
        })
        .collect();
    let mut points = Vec::with_capacity(cfg.replicas * cfg.m);
    let mut retries = 0;
    for r in rows {
        let (p, a) = r?;
        points.extend(p);
        retries += a;
    }
    Ok(AirySampleSet {
        config: *cfg,
        points,
        retries,
    })
}

/// Weights of the random series: `scale`·χ²(`dof`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConvention {
    pub dof: u32,
    pub scale: f64,
}

impl SeriesConvention {
    /// 2·χ²(1) weights, mean 2.
    pub const NOMINAL: SeriesConvention = SeriesConvention { dof: 1, scale: 2.0 };
    /// ½·χ²(2) = Exp(1) weights, mean 1, second moment 2.
    pub const CALIBRATED: SeriesConvention = SeriesConvention { dof: 2, scale: 0.5 };

    pub fn mean(&self) -> f64 {
        self.scale * f64::from(self.dof)
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        if self.dof == 2 {
            return 2.0 * self.scale * rng.sample::<f64, _>(Exp1);
        }
        let mut s = 0.0;
        for _ in 0..self.dof {
            let g: f64 = rng.sample(StandardNormal);
            s += g * g;
        }
        self.scale * s
    }

    /// E[e^{−u·w·x}] = (1 + 2·scale·u·x)^{−dof/2}.
    fn laplace(&self, ux: f64) -> f64 {
        (1.0 + 2.0 * self.scale * ux).powf(-0.5 * f64::from(self.dof))
    }
}

/// Mean and standard error of per-replica values, reduced in order.
fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mut s = KahanSum::default();
    for v in values {
        s.add(*v);
    }
    let mean = s.total() / n;
    let mut q = KahanSum::default();
    for v in values {
        q.add((v - mean).powi(2));
    }
    (mean, (q.total() / (n - 1.0) / n).sqrt())
}

/// Expected contribution of the points below a_m: with Airy density
/// √|x|/π far left, Σ_{p>m} e^{Ca_p} ≈ ∫_{−∞}^{a_m} e^{Cx}√|x|/π dx.
pub fn tail_sum_bound(a_m: f64, c: f64) -> f64 {
    let lo = a_m - 40.0 / c;
    let Ok((xs, ws)) = composite_legendre(16, 20, lo, a_m) else {
        return f64::INFINITY;
    };
    xs.iter()
        .zip(&ws)
        .map(|(x, w)| w * (c * x).exp() * x.abs().sqrt() / std::f64::consts::PI)
        .sum()
}

/// Mean over replicas of tail_sum_bound(a_m)/Σ_{p≤m} e^{Ca_p}.
pub fn truncation_bias(set: &AirySampleSet, airy: &AiryConfig) -> f64 {
    let c = airy.c;
    let total: f64 = set
        .replicas()
        .map(|r| {
            let head: f64 = r.iter().map(|a| (c * a).exp()).sum();
            tail_sum_bound(r[r.len() - 1], c) / head
        })
        .sum();
    total / set.len() as f64
}

pub const TRUNCATION_WARNING: f64 = 1e-3;

pub const MAX_SERIES_K: u32 = 2;

/// Monte Carlo mean of (Σₚ wₚ e^{Caₚ})ᵏ with weights from `conv`. Under the
/// calibrated convention the mean targets e^{kT/24}·E[𝒵(T,0)ᵏ].
pub fn series_moment_mc(
    k: u32,
    set: &AirySampleSet,
    airy: &AiryConfig,
    conv: SeriesConvention,
) -> Result<MomentEstimate> {
    if k == 0 || k > MAX_SERIES_K {
        return Err(Error::Domain(format!("series moments support k in 1..={MAX_SERIES_K}, got {k}")));
    }
    let c = airy.c;
    let base = derive_seed(set.config.seed, "series_weights");
    let values: Vec<f64> = (0..set.len())
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(base, i as u64);
            let s: f64 = set.replica(i).iter().map(|a| conv.draw(&mut rng) * (c * a).exp()).sum();
            s.powi(k as i32)
        })
        .collect();
    let (mean, se) = mean_se(&values);
    let bias = truncation_bias(set, airy);
    let mut est = MomentEstimate::new(Method::SeriesMc, mean, se)
        .with("k", k)
        .with("weight_dof", conv.dof)
        .with("weight_scale", conv.scale)
        .with("matrix_size", set.config.n)
        .with("points", set.config.m)
        .with("replicas", set.len())
        .with("seed", set.config.seed)
        .with("truncation_bias", bias);
    if bias > TRUNCATION_WARNING {
        est = est.with("warning", "truncation bias above 1e-3; increase m");
    }
    Ok(est)
}

/// Per-replica ∏ₚ(1 + 2·scale·u·e^{Caₚ})^{−dof/2}: the weights of the random
/// series integrated out. Returns (mean, standard error).
pub fn conditional_laplace_mc(
    u: f64,
    set: &AirySampleSet,
    airy: &AiryConfig,
    conv: SeriesConvention,
) -> Result<(f64, f64)> {
    if !(u > 0.0 && u <= 10.0) {
        return Err(Error::Domain(format!("u must lie in (0, 10], got {u}")));
    }
    let c = airy.c;
    let values: Vec<f64> = set
        .replicas()
        .map(|r| r.iter().map(|a| conv.laplace(u * (c * a).exp())).product())
        .collect();
    Ok(mean_se(&values))
}

pub const MAX_HK: u32 = 3;

/// Per-replica h_k(e^{Ca₁},…,e^{Ca_m}). Returns (mean, standard error).
pub fn hk_mc(k: u32, set: &AirySampleSet, airy: &AiryConfig) -> Result<(f64, f64)> {
    if k == 0 || k > MAX_HK {
        return Err(Error::Domain(format!("hk_mc supports k in 1..={MAX_HK}, got {k}")));
    }
    let c = airy.c;
    let values: Vec<f64> = set
        .replicas()
        .map(|r| {
            let x: Vec<f64> = r.iter().map(|a| (c * a).exp()).collect();
            h_complete(k as usize, &x)
        })
        .collect();
    Ok(mean_se(&values))
}

/// First-moment comparison of the two weight conventions against a target.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesCalibration {
    pub target: f64,
    pub nominal: (f64, f64),
    pub calibrated: (f64, f64),
    /// nominal mean / target.
    pub nominal_ratio: f64,
    pub adopted: SeriesConvention,
}

/// Runs the k = 1 series under both conventions and adopts the one whose
/// mean is within three standard errors of `target` (the closer one if
/// neither or both are).
pub fn calibrate_series(set: &AirySampleSet, airy: &AiryConfig, target: f64) -> Result<SeriesCalibration> {
    let p = series_moment_mc(1, set, airy, SeriesConvention::NOMINAL)?;
    let q = series_moment_mc(1, set, airy, SeriesConvention::CALIBRATED)?;
    let z = |e: &MomentEstimate| (e.value - target).abs() / e.err.max(f64::MIN_POSITIVE);
    let adopted = if z(&q) <= z(&p) {
        SeriesConvention::CALIBRATED
    } else {
        SeriesConvention::NOMINAL
    };
    Ok(SeriesCalibration {
        target,
        nominal: (p.value, p.err),
        calibrated: (q.value, q.err),
        nominal_ratio: p.value / target,
        adopted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> AirySampleSet {
        sample_airy_points(&EnsembleConfig::new(100, 8, 200, 11).unwrap()).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(EnsembleConfig::new(99, 8, 200, 0).is_err());
        assert!(EnsembleConfig::new(100, 33, 200, 0).is_err());
        assert!(EnsembleConfig::new(100, 8, 99, 0).is_err());
    }

    #[test]
    fn rows_are_descending_and_reproducible() {
        let a = small();
        assert!(a.replicas().all(|r| r.windows(2).all(|w| w[0] >= w[1])));
        assert_eq!(a, small());
        let csv = a.to_csv();
        assert_eq!(csv.lines().count(), 1 + 200 * 8);
        let (mean, var) = a.top_point_stats();
        assert!(mean > -2.5 && mean < -1.2 && var > 0.4 && var < 1.4, "{mean} {var}");
    }

    #[test]
    fn eigenvalues_match_dense_count() {
        // Every rescaled point is an eigenvalue: the Sturm count jumps there.
        let p = draw_replica(150, 4, 3).unwrap();
        assert!(p.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn weight_conventions() {
        assert_eq!(SeriesConvention::NOMINAL.mean(), 2.0);
        assert_eq!(SeriesConvention::CALIBRATED.mean(), 1.0);
        assert!((SeriesConvention::CALIBRATED.laplace(1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hk_is_monotone_in_points() {
        let set = small();
        let airy = AiryConfig::new(1.0).unwrap();
        let r = set.replica(0);
        let x: Vec<f64> = r.iter().map(|a| (airy.c * a).exp()).collect();
        for m in 1..x.len() {
            assert!(h_complete(2, &x[..m + 1]) >= h_complete(2, &x[..m]));
        }
        assert!(hk_mc(4, &set, &airy).is_err());
    }

    #[test]
    fn laplace_functional_decreases() {
        let set = small();
        let airy = AiryConfig::new(2.0).unwrap();
        let v: Vec<f64> = [0.1, 0.5, 1.0]
            .iter()
            .map(|&u| conditional_laplace_mc(u, &set, &airy, SeriesConvention::CALIBRATED).unwrap().0)
            .collect();
        assert!(v[0] > v[1] && v[1] > v[2]);
        let tiny = conditional_laplace_mc(1e-9, &set, &airy, SeriesConvention::CALIBRATED).unwrap().0;
        assert!((1.0 - tiny) < 1e-8);
    }
}
