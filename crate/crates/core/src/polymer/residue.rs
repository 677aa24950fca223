//! Exact nested residue evaluation of
//! (2πi)^{−k} ∮⋯∮ ∏_{A<B} (w_A−w_B)/(w_A−w_B−1) ∏_j w_j^{−N} e^{t w_j} dw_j,
//! with the w_A contour enclosing 0 and w_B + 1 for B > A only.
//!
//! Integrating the innermost variable first, every pole lies at an integer.
//! After w_j is fixed at p, the cross factors with the outer variables
//! expand as 1 + Σ_n u^n (w_C − p − 1)^{−n−1}, so the remaining integrand is
//! always ∏ w_C^{−N}e^{t w_C} · (outer cross factors) times a polynomial in
//! the symbols (w_C − s)^{−1}, s ≥ 1. Those polynomials are tracked exactly
//! by their exponents; the numbers are fixed-point.

use std::collections::BTreeMap;

use super::fixed::Fixed;

/// Exponent of (w_C − s)^{−1} at index C·width + s.
type Key = Vec<u32>;

/// Taylor coefficients of (q + u)^{−e}, q ≠ 0, up to degree `len − 1`.
fn inverse_power_series(q: i64, e: u32, len: usize) -> Vec<Fixed> {
    let mut c0 = Fixed::one();
    for _ in 0..e {
        c0 = c0.div_int(q);
    }
    let mut out = Vec::with_capacity(len);
    out.push(c0);
    for n in 1..len {
        let prev = &out[n - 1];
        // c_n = c_{n−1} · (−(e + n − 1)) / (n q).
        let next = prev.mul_int(-(i64::from(e) + n as i64 - 1)).div_int(n as i64 * q);
        out.push(next);
    }
    out
}

fn mul_truncated(a: &[Fixed], b: &[Fixed]) -> Vec<Fixed> {
    let len = a.len().min(b.len());
    (0..len)
        .map(|d| {
            let mut s = Fixed::zero();
            for i in 0..=d {
                if a[i].is_zero() || b[d - i].is_zero() {
                    continue;
                }
                s += &(&a[i] * &b[d - i]);
            }
            s
        })
        .collect()
}

struct Engine {
    k: usize,
    n: u32,
    width: usize,
    /// t^d/d!.
    exp_series: Vec<Fixed>,
    /// e^{tp}.
    exp_shift: Vec<Fixed>,
}

impl Engine {
    fn new(k: usize, n: u32, t: f64) -> Self {
        let width = k + 1;
        let tf = Fixed::from_f64(t);
        let max_order = k * (n as usize + 1) + 2;
        let mut exp_series = Vec::with_capacity(max_order);
        exp_series.push(Fixed::one());
        for d in 1..max_order {
            let next = (&exp_series[d - 1] * &tf).div_int(d as i64);
            exp_series.push(next);
        }
        let et = tf.exp();
        let mut exp_shift = vec![Fixed::one()];
        for p in 1..=k {
            let next = &exp_shift[p - 1] * &et;
            exp_shift.push(next);
        }
        Engine {
            k,
            n,
            width,
            exp_series,
            exp_shift,
        }
    }

    /// Residues of the j-th variable (0-based, all outer ones still free).
    fn eliminate(&self, j: usize, terms: &BTreeMap<Key, Fixed>) -> BTreeMap<Key, Fixed> {
        let w = self.width;
        let mut out: BTreeMap<Key, Fixed> = BTreeMap::new();
        for (key, coeff) in terms {
            let own = &key[j * w..(j + 1) * w];
            let mut poles = vec![(0usize, self.n)];
            for (s, &e) in own.iter().enumerate().skip(1) {
                if e > 0 {
                    poles.push((s, e));
                }
            }
            for &(p, order) in &poles {
                let len = order as usize;
                if len == 0 {
                    continue;
                }
                let mut series = self.exp_series[..len].to_vec();
                if p != 0 {
                    series = mul_truncated(&series, &inverse_power_series(p as i64, self.n, len));
                }
                for (s, &e) in own.iter().enumerate().skip(1) {
                    if e > 0 && s != p {
                        let q = p as i64 - s as i64;
                        series = mul_truncated(&series, &inverse_power_series(q, e, len));
                    }
                }
                let scale = &self.exp_shift[p] * coeff;
                let base: Key = key[..j * w].to_vec();
                let mut choice = vec![None; j];
                self.distribute(0, len - 1, p + 1, &series, &scale, &base, &mut choice, &mut out);
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Spreads the remaining u-degree over the outer cross factors: outer
    /// variable C either takes the constant 1 or u^a (w_C − s)^{−a−1}.
    #[allow(clippy::too_many_arguments)]
    fn distribute(
        &self,
        c: usize,
        degree_left: usize,
        s: usize,
        series: &[Fixed],
        scale: &Fixed,
        base: &Key,
        choice: &mut Vec<Option<usize>>,
        out: &mut BTreeMap<Key, Fixed>,
    ) {
        if c == choice.len() {
            let coeff = &series[degree_left];
            if coeff.is_zero() {
                return;
            }
            let mut key = base.clone();
            for (cc, a) in choice.iter().enumerate() {
                if let Some(a) = a {
                    key[cc * self.width + s] += *a as u32 + 1;
                }
            }
            let v = scale * coeff;
            out.entry(key).and_modify(|x| *x += &v).or_insert(v);
            return;
        }
        choice[c] = None;
        self.distribute(c + 1, degree_left, s, series, scale, base, choice, out);
        for a in 0..=degree_left {
            choice[c] = Some(a);
            self.distribute(c + 1, degree_left - a, s, series, scale, base, choice, out);
        }
        choice[c] = None;
    }

    fn run(&self) -> Fixed {
        let mut terms = BTreeMap::new();
        terms.insert(vec![0u32; self.k * self.width], Fixed::one());
        for j in (0..self.k).rev() {
            terms = self.eliminate(j, &terms);
        }
        terms.remove(&Vec::new()).unwrap_or_else(Fixed::zero)
    }
}

/// The nested contour integral as an exact residue sum (fixed-point), for
/// N ≥ 1 levels at time t.
pub fn nested_residue_sum(k: usize, n: u32, t: f64) -> Fixed {
    Engine::new(k, n, t).run()
}
