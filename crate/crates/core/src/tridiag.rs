//! Eigenvalues of symmetric tridiagonal matrices by Sturm-sequence bisection.

/// Number of eigenvalues strictly below `x` for the matrix with diagonal
/// `diag` and squared off-diagonal `off2` (`off2[i]` couples rows i, i+1).
pub fn sturm_count(diag: &[f64], off2: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let prev = if q == 0.0 { f64::EPSILON * (x.abs() + 1.0) } else { q };
        q = diag[i] - x - off2[i - 1] / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin interval containing the spectrum.
pub fn gershgorin(diag: &[f64], off2: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let off: Vec<f64> = off2.iter().map(|v| v.sqrt()).collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1] } else { 0.0 } + if i + 1 < n { off[i] } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// The `m` largest eigenvalues, in decreasing order, bisected inside
/// `[lo, hi]` until the bracket is below `abs_tol`.
///
/// Every count refines the brackets of all requested eigenvalues at once.
/// Returns `None` when the bracket does not contain the eigenvalues.
pub fn top_eigenvalues(
    diag: &[f64],
    off2: &[f64],
    m: usize,
    lo: f64,
    hi: f64,
    abs_tol: f64,
) -> Option<Vec<f64>> {
    let n = diag.len();
    let m = m.min(n);
    if m == 0 {
        return Some(Vec::new());
    }
    // Eigenvalue with ascending index n−1−r for rank r.
    let c_lo = sturm_count(diag, off2, lo);
    let c_hi = sturm_count(diag, off2, hi);
    if c_lo > n - m || c_hi < n {
        return None;
    }
    let mut lower = vec![lo; m];
    let mut upper = vec![hi; m];
    // Up to LANES brackets are bisected per sweep; their Sturm sequences are
    // interleaved so the divisions overlap.
    for _ in 0..200 * m {
        let mut mids = [0.0; LANES];
        let mut used = 0;
        for r in 0..m {
            if upper[r] - lower[r] <= abs_tol {
                continue;
            }
            let mid = 0.5 * (lower[r] + upper[r]);
            if mids[..used].contains(&mid) {
                continue;
            }
            mids[used] = mid;
            used += 1;
            if used == LANES {
                break;
            }
        }
        if used == 0 {
            break;
        }
        for i in used..LANES {
            mids[i] = mids[0];
        }
        let counts = sturm_counts(diag, off2, &mids);
        for (mid, c) in mids[..used].iter().zip(&counts[..used]) {
            // c eigenvalues lie below mid: ascending indices < c are below.
            for (s, (l, u)) in lower.iter_mut().zip(upper.iter_mut()).enumerate() {
                if n - 1 - s < *c {
                    if *mid < *u {
                        *u = *mid;
                    }
                } else if *mid > *l {
                    *l = *mid;
                }
            }
        }
    }
    Some(
        lower
            .iter()
            .zip(&upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect(),
    )
}

const LANES: usize = 8;

/// `sturm_count` at several shifts in one pass.
fn sturm_counts(diag: &[f64], off2: &[f64], x: &[f64; LANES]) -> [usize; LANES] {
    let mut count = [0usize; LANES];
    let mut q = [0.0; LANES];
    for l in 0..LANES {
        q[l] = diag[0] - x[l];
        count[l] += usize::from(q[l] < 0.0);
    }
    for i in 1..diag.len() {
        let (d, e) = (diag[i], off2[i - 1]);
        for l in 0..LANES {
            let prev = if q[l] == 0.0 { f64::EPSILON * (x[l].abs() + 1.0) } else { q[l] };
            q[l] = d - x[l] - e / prev;
            count[l] += usize::from(q[l] < 0.0);
        }
    }
    count
}

/// All eigenvalues in increasing order.
pub fn all_eigenvalues(diag: &[f64], off2: &[f64], abs_tol: f64) -> Vec<f64> {
    let (lo, hi) = gershgorin(diag, off2);
    let pad = 1e-12 * (lo.abs() + hi.abs() + 1.0);
    let mut v = top_eigenvalues(diag, off2, diag.len(), lo - pad, hi + pad, abs_tol)
        .unwrap_or_default();
    v.reverse();
    v
}
