//! Integer partitions and (truncated) complete homogeneous symmetric functions.
//!
//! Partition enumeration is exact; the symmetric functions are generic over
//! any commutative ring implementing [`Zero`] and [`One`], so the same code
//! runs on `f64` for analytic work and on `BigRational` for identity checks.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::{Error, Result};

/// Largest weight accepted by [`enumerate_partitions`]; p(40) = 37338.
pub const MAX_PARTITION_WEIGHT: u32 = 40;

/// Largest degree accepted by [`truncated_generating_check`].
pub const MAX_CHECK_DEGREE: usize = 64;

/// An integer partition, parts stored non-increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    /// Builds a partition from parts in any order. Zero parts are rejected.
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::domain("a partition needs at least one part"));
        }
        if parts.contains(&0) {
            return Err(Error::domain("partition parts must be positive"));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Partition { parts })
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn weight(&self) -> u32 {
        self.parts.iter().sum()
    }

    pub fn length(&self) -> usize {
        self.parts.len()
    }

    /// Part size to multiplicity.
    pub fn multiplicities(&self) -> BTreeMap<u32, u32> {
        let mut m = BTreeMap::new();
        for &p in &self.parts {
            *m.entry(p).or_insert(0) += 1;
        }
        m
    }

    /// 1/∏ mᵢ! as a float.
    pub fn inv_multiplicity_factorials(&self) -> f64 {
        self.multiplicities()
            .values()
            .map(|&m| 1.0 / factorial_f64(m))
            .product()
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// All partitions of `k` in reverse lexicographic order, starting from `(k)`
/// and ending at `(1,…,1)`.
pub fn enumerate_partitions(k: u32) -> Result<Vec<Partition>> {
    if k == 0 || k > MAX_PARTITION_WEIGHT {
        return Err(Error::Domain(format!(
            "partition weight must lie in 1..={MAX_PARTITION_WEIGHT}, got {k}"
        )));
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k as usize);
    fill(k, k, &mut current, &mut out);
    Ok(out)
}

fn fill(rest: u32, max_part: u32, current: &mut Vec<u32>, out: &mut Vec<Partition>) {
    if rest == 0 {
        out.push(Partition {
            parts: current.clone(),
        });
        return;
    }
    for p in (1..=max_part.min(rest)).rev() {
        current.push(p);
        fill(rest - p, p, current, out);
        current.pop();
    }
}

/// k!/(m₁!m₂!…) for λ ⊢ k, exact.
pub fn multiplicity_factor(lambda: &Partition) -> BigUint {
    let num = factorial(lambda.weight());
    let den = lambda
        .multiplicities()
        .values()
        .fold(BigUint::one(), |acc, &m| acc * factorial(m));
    num / den
}

pub fn factorial(n: u32) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

pub fn factorial_f64(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// h_n(x₁,…,x_Q): the sum of x_{i₁}⋯x_{iₙ} over weakly increasing index
/// tuples.
pub fn h_complete<T>(n: usize, x: &[T]) -> T
where
    T: Clone + Zero + One,
{
    // h[j] runs over degrees for the alphabet prefix seen so far.
    let mut h = vec![T::zero(); n + 1];
    h[0] = T::one();
    for xi in x {
        for d in 1..=n {
            let add = xi.clone() * h[d - 1].clone();
            h[d] = h[d].clone() + add;
        }
    }
    h.swap_remove(n)
}

/// h_n restricted to index tuples in which no index occurs more than `cap`
/// times. Evaluated by enumerating multiplicity vectors directly.
pub fn h_truncated<T>(n: usize, cap: usize, x: &[T]) -> T
where
    T: Clone + Zero + One,
{
    fn rec<T: Clone + Zero + One>(n: usize, cap: usize, x: &[T], acc: T) -> T {
        if n == 0 {
            return acc;
        }
        let Some((head, tail)) = x.split_first() else {
            return T::zero();
        };
        if n > cap * x.len() {
            return T::zero();
        }
        let mut total = T::zero();
        let mut power = acc;
        for m in 0..=cap.min(n) {
            if m > 0 {
                power = power * head.clone();
            }
            total = total + rec(n - m, cap, tail, power.clone());
        }
        total
    }
    rec(n, cap, x, T::one())
}

/// Checks, coefficient by coefficient up to `u^nmax`, the polynomial identity
/// ∏ₚ Σ_{m≤cap} (−u xₚ)^m = Σₙ h_truncated(n, cap, x)·(−u)ⁿ in exact rationals.
pub fn truncated_generating_check(cap: usize, nmax: usize, x: &[BigRational]) -> Result<bool> {
    if cap == 0 {
        return Err(Error::domain("cap must be positive"));
    }
    if nmax > MAX_CHECK_DEGREE {
        return Err(Error::Domain(format!(
            "degree {nmax} exceeds the check limit {MAX_CHECK_DEGREE}"
        )));
    }
    // Expand the product, truncating at degree nmax.
    let mut poly = vec![BigRational::zero(); nmax + 1];
    poly[0] = BigRational::one();
    for xp in x {
        let mut factor = Vec::with_capacity(cap + 1);
        let mut pow = BigRational::one();
        for _ in 0..=cap.min(nmax) {
            let next = &pow * -xp;
            factor.push(pow);
            pow = next;
        }
        let mut next = vec![BigRational::zero(); nmax + 1];
        for (i, a) in poly.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in factor.iter().enumerate() {
                if i + j > nmax {
                    break;
                }
                next[i + j] += a * b;
            }
        }
        poly = next;
    }
    let ok = poly.iter().enumerate().all(|(n, coef)| {
        let h = h_truncated(n, cap, x);
        let expected = if n % 2 == 0 { h } else { -h };
        *coef == expected
    });
    Ok(ok)
}

/// Outcome of [`partition_count_bound_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionBound {
    /// p(n) ≤ e^{π√(2n/3)} for every n ≤ nmax.
    pub holds: bool,
    /// max over n of p(n)/e^{√n}, and where it is attained.
    pub max_ratio_sqrt: f64,
    pub argmax: u32,
    pub counts: Vec<u64>,
}

/// Counts partitions by enumeration for n = 1..=nmax and compares with the
/// Hardy–Ramanujan envelope e^{π√(2n/3)}.
pub fn partition_count_bound_check(nmax: u32) -> Result<PartitionBound> {
    let mut holds = true;
    let mut max_ratio = 0.0;
    let mut argmax = 1;
    let mut counts = Vec::with_capacity(nmax as usize);
    for n in 1..=nmax {
        let p = enumerate_partitions(n)?.len() as u64;
        let nf = f64::from(n);
        let envelope = (std::f64::consts::PI * (2.0 * nf / 3.0).sqrt()).exp();
        if p as f64 > envelope {
            holds = false;
        }
        let ratio = p as f64 / nf.sqrt().exp();
        if ratio > max_ratio {
            max_ratio = ratio;
            argmax = n;
        }
        counts.push(p);
    }
    Ok(PartitionBound {
        holds,
        max_ratio_sqrt: max_ratio,
        argmax,
        counts,
    })
}
