//! The semi-discrete (O'Connell–Yor) polymer.
//!
//! 𝐙^N(t) integrates e^{E(φ)} over up-right paths from (0,1) to (t,N), with
//! E(φ) = B₁(s₁) + [B₂(s₂) − B₂(s₁)] + ⋯ + [B_N(t) − B_N(s_{N−1})]. Level by
//! level it solves dZ_n = Z_{n−1}dt + Z_n∘dB_n (raw energies) or, after
//! multiplying by e^{−t/2}, the Itô system dZ_n = Z_{n−1}dt + Z_n dB_n
//! (compensated). The nested residue sum yields the compensated moments.
//!
//! Under t = √(NT) + X the rescaled variable 𝐙^N(t)/C(N,T,X) converges to
//! 𝒵(T,X); C(N,T,X) absorbs the e^{t/2} between the two conventions.

mod fixed;
mod residue;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

pub use fixed::Fixed;
pub use residue::nested_residue_sum;

use crate::quadrature::KahanSum;
use crate::rng::{derive_index, derive_seed, stream};
use crate::she_moments::ln_factorial;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// e^{E(φ)} as defined: E[𝐙^N(t)] = e^{t/2}t^{N−1}/(N−1)!.
    Raw,
    /// e^{E(φ) − t/2}: E[𝐙^N(t)] = t^{N−1}/(N−1)!, matching the residues.
    Compensated,
}

impl Convention {
    /// ln of 𝐙_raw/𝐙_this.
    pub fn log_offset(&self, t: f64) -> f64 {
        match self {
            Convention::Raw => 0.0,
            Convention::Compensated => t / 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolymerConfig {
    pub n: u32,
    pub t: f64,
    pub dt: f64,
    pub replicas: usize,
    pub seed: u64,
    pub convention: Convention,
}

impl PolymerConfig {
    /// Defaults to dt = t/400 and the compensated convention.
    pub fn new(n: u32, t: f64, replicas: usize, seed: u64) -> Result<Self> {
        let cfg = PolymerConfig {
            n,
            t,
            dt: t / 400.0,
            replicas,
            seed,
            convention: Convention::Compensated,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::domain("the polymer needs N ≥ 1 levels"));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::Domain(format!("terminal time must be positive, got {}", self.t)));
        }
        if !(self.dt > 0.0 && self.dt <= self.t / 200.0 * (1.0 + 1e-12)) {
            return Err(Error::Domain(format!(
                "dt must lie in (0, t/200], got {} for t = {}",
                self.dt, self.t
            )));
        }
        if self.replicas < 2 {
            return Err(Error::domain("at least two replicas are needed"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t / self.dt - 1e-9).ceil() as usize
    }
}

/// Level partition functions Z₁(s), …, Z_N(s).
#[derive(Debug, Clone, PartialEq)]
pub struct PolymerState {
    pub z: Vec<f64>,
}

impl PolymerState {
    /// Z₁(0) = 1, all other levels empty.
    pub fn initial(n: u32) -> Self {
        let mut z = vec![0.0; n as usize];
        z[0] = 1.0;
        PolymerState { z }
    }

    /// One step with Brownian increments `db`: exponential Euler on the
    /// diagonal and the trapezoid rule for the feed from the level below.
    pub fn step(&mut self, db: &[f64], dt: f64, convention: Convention) {
        let drift = match convention {
            Convention::Raw => 0.0,
            Convention::Compensated => -0.5 * dt,
        };
        let mut below_old = 0.0;
        let mut below_new = 0.0;
        for (z, b) in self.z.iter_mut().zip(db) {
            let g = (b + drift).exp();
            let old = *z;
            *z = old * g + 0.5 * dt * (below_old * g + below_new);
            below_old = old;
            below_new = *z;
        }
    }

    pub fn is_valid(&self) -> bool {
        self.z.iter().all(|v| v.is_finite() && *v >= 0.0)
    }
}

/// Terminal values 𝐙^N(t), one per replica.
#[derive(Debug, Clone, PartialEq)]
pub struct PolymerSamples {
    pub config: PolymerConfig,
    pub values: Vec<f64>,
}

impl PolymerSamples {
    /// Sample mean of Zᵏ and its standard error.
    pub fn moment(&self, k: u32) -> (f64, f64) {
        let v: Vec<f64> = self.values.iter().map(|z| z.powi(k as i32)).collect();
        mean_se(&v)
    }
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mut s = KahanSum::default();
    v.iter().for_each(|x| s.add(*x));
    let mean = s.total() / n;
    let mut q = KahanSum::default();
    v.iter().for_each(|x| q.add((x - mean).powi(2)));
    (mean, (q.total() / (n - 1.0) / n).sqrt())
}

fn run_replica(cfg: &PolymerConfig, base: u64, i: usize, sub: usize) -> Result<f64> {
    let mut rng = stream(base, i as u64);
    let steps = cfg.steps();
    let h = cfg.t / steps as f64;
    let fine = h / sub as f64;
    let sd = fine.sqrt();
    let n = cfg.n as usize;
    let mut state = PolymerState::initial(cfg.n);
    let mut db = vec![0.0; n];
    for s in 0..steps * sub {
        for b in db.iter_mut() {
            *b = sd * rng.sample::<f64, _>(StandardNormal);
        }
        state.step(&db, fine, cfg.convention);
        if !state.is_valid() {
            return Err(Error::Convergence(format!(
                "replica {i}: non-finite polymer state at step {s} of {}; reduce dt",
                steps * sub
            )));
        }
    }
    Ok(state.z[n - 1])
}

/// Simulates `replicas` independent copies of 𝐙^N(t). Replica i draws from
/// the stream keyed by (seed, i).
pub fn simulate_polymer(cfg: &PolymerConfig) -> Result<PolymerSamples> {
    cfg.validate()?;
    let base = derive_seed(cfg.seed, "polymer");
    let values = (0..cfg.replicas)
        .into_par_iter()
        .map(|i| run_replica(cfg, base, i, 1))
        .collect::<Result<Vec<f64>>>()?;
    Ok(PolymerSamples { config: *cfg, values })
}

/// Coupled comparison of step dt against dt/2 on the same Brownian paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepCheck {
    pub coarse_mean: f64,
    pub fine_mean: f64,
    /// Mean and standard error of the per-replica difference fine − coarse.
    pub diff_mean: f64,
    pub diff_se: f64,
}

pub fn step_size_check(cfg: &PolymerConfig) -> Result<StepCheck> {
    cfg.validate()?;
    let base = derive_seed(cfg.seed, "polymer_step_check");
    let pairs = (0..cfg.replicas)
        .into_par_iter()
        .map(|i| {
            let seed = derive_index(base, i as u64);
            let mut rng = stream(seed, 0);
            let steps = cfg.steps();
            let h = cfg.t / steps as f64;
            let sd = (h / 2.0).sqrt();
            let n = cfg.n as usize;
            let mut coarse = PolymerState::initial(cfg.n);
            let mut fine = PolymerState::initial(cfg.n);
            let mut a = vec![0.0; n];
            let mut b = vec![0.0; n];
            for _ in 0..steps {
                for x in a.iter_mut().chain(b.iter_mut()) {
                    *x = sd * rng.sample::<f64, _>(StandardNormal);
                }
                fine.step(&a, h / 2.0, cfg.convention);
                fine.step(&b, h / 2.0, cfg.convention);
                let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
                coarse.step(&sum, h, cfg.convention);
            }
            if !(coarse.is_valid() && fine.is_valid()) {
                return Err(Error::Convergence(format!("replica {i}: non-finite polymer state")));
            }
            Ok((coarse.z[n - 1], fine.z[n - 1]))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let c: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let f: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let d: Vec<f64> = pairs.iter().map(|p| p.1 - p.0).collect();
    let (diff_mean, diff_se) = mean_se(&d);
    Ok(StepCheck {
        coarse_mean: mean_se(&c).0,
        fine_mean: mean_se(&f).0,
        diff_mean,
        diff_se,
    })
}

pub const MAX_RESIDUE_K: u32 = 3;
pub const MAX_RESIDUE_N: u32 = 30;
/// k = 1 has a closed form and is allowed much further.
pub const MAX_FIRST_MOMENT_N: u32 = 200;

/// E[𝐙^N(t)ᵏ] in the compensated convention, by exact residue enumeration
/// (k = 1: t^{N−1}/(N−1)!).
pub fn polymer_moment_contour(k: u32, n: u32, t: f64) -> Result<f64> {
    Ok(log_polymer_moment(k, n, t)?.exp())
}

/// ln of `polymer_moment_contour`, usable where the value under- or overflows.
pub fn log_polymer_moment(k: u32, n: u32, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    if n == 0 {
        return Err(Error::domain("the polymer needs N ≥ 1 levels"));
    }
    match k {
        1 if n <= MAX_FIRST_MOMENT_N => Ok(f64::from(n - 1) * t.ln() - ln_factorial(n - 1)),
        2..=MAX_RESIDUE_K if n <= MAX_RESIDUE_N => {
            let v = nested_residue_sum(k as usize, n, t).to_f64();
            if v > 0.0 && v.is_finite() {
                Ok(v.ln())
            } else {
                Err(Error::Accuracy(format!("residue sum {v} for k={k}, N={n}, t={t}")))
            }
        }
        _ => Err(Error::Domain(format!(
            "residue moments support k ≤ {MAX_RESIDUE_K} with N ≤ {MAX_RESIDUE_N} (k = 1: N ≤ {MAX_FIRST_MOMENT_N}), got k={k}, N={n}"
        ))),
    }
}

/// ln C(N,T,X) = N + (√(NT)+X)/2 + X√(N/T) + (N/2)ln(T/N).
pub fn log_scaling_constant(n: u32, t: f64, x: f64) -> Result<f64> {
    if n == 0 || !(t > 0.0 && t.is_finite()) || !x.is_finite() {
        return Err(Error::Domain(format!("scaling constant needs N ≥ 1, T > 0, got N={n}, T={t}")));
    }
    let nf = f64::from(n);
    Ok(nf + ((nf * t).sqrt() + x) / 2.0 + x * (nf / t).sqrt() + 0.5 * nf * (t / nf).ln())
}

/// C(N,T,X); errors where only the logarithm is representable.
pub fn scaling_constant(n: u32, t: f64, x: f64) -> Result<f64> {
    let l = log_scaling_constant(n, t, x)?;
    let v = l.exp();
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Domain(format!("C(N,T,X) = e^{l} is not representable; use the log form")))
    }
}

/// The polymer time t = √(NT) + X matched to (T, X).
pub fn polymer_time(n: u32, t: f64, x: f64) -> f64 {
    (f64::from(n) * t).sqrt() + x
}

/// E[(𝐙^N(t)/C(N,T,X))ᵏ] with raw 𝐙 and t = √(NT)+X.
pub fn rescaled_moment(k: u32, n: u32, t: f64, x: f64) -> Result<f64> {
    let time = polymer_time(n, t, x);
    if time <= 0.0 {
        return Err(Error::Domain(format!("√(NT)+X = {time} must be positive")));
    }
    let kf = f64::from(k);
    let log = log_polymer_moment(k, n, time)? + kf * Convention::Compensated.log_offset(time)
        - kf * log_scaling_constant(n, t, x)?;
    Ok(log.exp())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitRow {
    pub n: u32,
    pub time: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitTable {
    pub k: u32,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "X")]
    pub x: f64,
    pub rows: Vec<LimitRow>,
    /// Two-term fit L + a/N through the last two rows.
    pub extrapolated: f64,
    /// Change of the fit when moved back one row (or distance to the last
    /// row when only two are given).
    pub extrapolation_err: f64,
}

impl LimitTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,time,value\n");
        for r in &self.rows {
            s.push_str(&format!("{},{:e},{:e}\n", r.n, r.time, r.value));
        }
        s
    }
}

fn richardson(a: &LimitRow, b: &LimitRow) -> f64 {
    let (na, nb) = (f64::from(a.n), f64::from(b.n));
    (nb * b.value - na * a.value) / (nb - na)
}

/// Rescaled moments along `n_list` and their extrapolation in 1/N.
pub fn intermediate_disorder_limit(k: u32, t: f64, x: f64, n_list: &[u32]) -> Result<LimitTable> {
    if k == 0 || k > 2 {
        return Err(Error::Domain(format!("limit tables support k ∈ {{1, 2}}, got {k}")));
    }
    if n_list.len() < 2 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("N list must be strictly increasing with at least two entries"));
    }
    let rows = n_list
        .iter()
        .map(|&n| {
            Ok(LimitRow {
                n,
                time: polymer_time(n, t, x),
                value: rescaled_moment(k, n, t, x)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let m = rows.len();
    let extrapolated = richardson(&rows[m - 2], &rows[m - 1]);
    let extrapolation_err = if m >= 3 {
        (extrapolated - richardson(&rows[m - 3], &rows[m - 2])).abs()
    } else {
        (extrapolated - rows[m - 1].value).abs()
    };
    Ok(LimitTable {
        k,
        t,
        x,
        rows,
        extrapolated,
        extrapolation_err,
    })
}

/// (M, moment/M^{k+1}): Markov bounds on P(𝒵 ≥ M) from the (k+1)-th moment.
pub fn markov_tail_bound(m_list: &[f64], k: u32, moment: f64) -> Result<Vec<(f64, f64)>> {
    if !(moment >= 0.0 && moment.is_finite()) {
        return Err(Error::Domain(format!("moment must be non-negative, got {moment}")));
    }
    m_list
        .iter()
        .map(|&m| {
            if m > 0.0 && m.is_finite() {
                Ok((m, moment / m.powi(k as i32 + 1)))
            } else {
                Err(Error::Domain(format!("threshold M must be positive, got {m}")))
            }
        })
        .collect()
}

/// ∏_{A<B} (z_A − z_B)/(z_A − z_B − 1).
pub fn cross_factor(z: &[Complex64]) -> Complex64 {
    let mut p = Complex64::new(1.0, 0.0);
    for a in 0..z.len() {
        for b in a + 1..z.len() {
            let d = z[a] - z[b];
            p *= d / (d - 1.0);
        }
    }
    p
}
