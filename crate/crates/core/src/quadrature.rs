//! Trapezoid rules on truncated lines and tensor grids, Gauss rules, and
//! LU determinants.
//!
//! Line rules use the closed trapezoid rule on nodes `−Y + j·h`, `j = 0..=n`,
//! so the rule with `n/2` intervals reuses every other node. The reported
//! error is the difference between the two, floored by a roundoff estimate.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::{Error, Result};

/// Direction of a line contour in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// z = anchor + i·y
    Vertical,
    /// z = anchor + y
    Real,
}

/// A truncated line `anchor + i·[−Y, Y]` (or its real counterpart)
/// discretized with `intervals` equal steps.
#[derive(Debug, Clone, PartialEq)]
pub struct LineContour {
    pub anchor: f64,
    pub orientation: Orientation,
    pub halfwidth: f64,
    pub intervals: usize,
}

impl LineContour {
    pub fn vertical(anchor: f64, halfwidth: f64, intervals: usize) -> Result<Self> {
        Self::new(anchor, Orientation::Vertical, halfwidth, intervals)
    }

    pub fn new(
        anchor: f64,
        orientation: Orientation,
        halfwidth: f64,
        intervals: usize,
    ) -> Result<Self> {
        if !(halfwidth > 0.0 && halfwidth.is_finite()) {
            return Err(Error::domain("line halfwidth must be positive"));
        }
        if intervals < 8 || !intervals.is_multiple_of(4) {
            return Err(Error::Domain(format!(
                "interval count must be a multiple of 4 and at least 8, got {intervals}"
            )));
        }
        Ok(LineContour {
            anchor,
            orientation,
            halfwidth,
            intervals,
        })
    }

    pub fn step(&self) -> f64 {
        2.0 * self.halfwidth / self.intervals as f64
    }

    pub fn node_count(&self) -> usize {
        self.intervals + 1
    }

    /// Line parameter of node `j`.
    pub fn param(&self, j: usize) -> f64 {
        -self.halfwidth + j as f64 * self.step()
    }

    pub fn point(&self, j: usize) -> Complex64 {
        let y = self.param(j);
        match self.orientation {
            Orientation::Vertical => Complex64::new(self.anchor, y),
            Orientation::Real => Complex64::new(self.anchor + y, 0.0),
        }
    }

    /// dz/dy along the line.
    pub fn jacobian(&self) -> Complex64 {
        match self.orientation {
            Orientation::Vertical => Complex64::i(),
            Orientation::Real => Complex64::new(1.0, 0.0),
        }
    }

    /// Trapezoid weights (in the line parameter) for the fine and the
    /// half-resolution rule at node `j`.
    fn weights(&self, j: usize) -> (f64, f64) {
        let h = self.step();
        let end = j == 0 || j == self.intervals;
        let fine = if end { 0.5 * h } else { h };
        let coarse = if j % 2 == 1 {
            0.0
        } else if end {
            h
        } else {
            2.0 * h
        };
        (fine, coarse)
    }
}

/// Halfwidth making a Gaussian envelope e^{−decay·y²/2} smaller than `tol`
/// at the truncation point, plus a safety margin of 3.
pub fn default_halfwidth(tol: f64, decay: f64) -> f64 {
    (2.0 * (1.0 / tol).ln() / decay).sqrt() + 3.0
}

/// A product of line contours.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    pub axes: Vec<LineContour>,
}

/// Largest dimension evaluated on a full tensor grid.
pub const MAX_TENSOR_DIM: usize = 4;

impl TensorGrid {
    pub fn new(axes: Vec<LineContour>) -> Result<Self> {
        if axes.is_empty() || axes.len() > MAX_TENSOR_DIM {
            return Err(Error::Domain(format!(
                "tensor grids support 1..={MAX_TENSOR_DIM} axes, got {}",
                axes.len()
            )));
        }
        Ok(TensorGrid { axes })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn total_nodes(&self) -> usize {
        self.axes.iter().map(LineContour::node_count).product()
    }
}

/// A quadrature value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub err: f64,
}

/// Relative roundoff floor applied to error estimates.
const ROUNDOFF: f64 = 4.0 * f64::EPSILON;

fn non_finite(z: &[Complex64]) -> Error {
    let pts: Vec<String> = z.iter().map(|p| format!("{}{:+}i", p.re, p.im)).collect();
    Error::NonFinite {
        location: format!("[{}]", pts.join(", ")),
    }
}

/// ∫ f(z) dz along the line, with dz including the orientation factor.
pub fn trapezoid_line<F>(f: F, c: &LineContour) -> Result<Estimate>
where
    F: Fn(Complex64) -> Complex64,
{
    let mut fine = ComplexSum::default();
    let mut coarse = ComplexSum::default();
    let mut abs = KahanSum::default();
    for j in 0..c.node_count() {
        let z = c.point(j);
        let v = f(z);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(non_finite(&[z]));
        }
        let (wf, wc) = c.weights(j);
        fine.add(v * wf);
        abs.add(v.norm() * wf);
        if wc != 0.0 {
            coarse.add(v * wc);
        }
    }
    let jac = c.jacobian();
    let value = fine.total() * jac;
    let err = ((fine.total() - coarse.total()).norm()).max(ROUNDOFF * abs.total());
    Ok(Estimate { value, err })
}

/// ∫…∫ f(z₁,…,z_d) dz₁…dz_d over a tensor grid. The outer axis is split
/// across threads; partial sums are combined in axis order, so the result
/// does not depend on the number of workers.
pub fn trapezoid_tensor<F>(f: F, grid: &TensorGrid) -> Result<Estimate>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    let d = grid.dim();
    let first = &grid.axes[0];
    let rest: Vec<usize> = grid.axes[1..].iter().map(LineContour::node_count).collect();
    let inner_total: usize = rest.iter().product();

    let partials: Vec<Result<(Complex64, Complex64, f64)>> = (0..first.node_count())
        .into_par_iter()
        .map(|j0| {
            let mut fine = ComplexSum::default();
            let mut coarse = ComplexSum::default();
            let mut abs = KahanSum::default();
            let mut z = vec![Complex64::new(0.0, 0.0); d];
            let mut idx = vec![0usize; d];
            idx[0] = j0;
            z[0] = first.point(j0);
            let (wf0, wc0) = first.weights(j0);
            for flat in 0..inner_total {
                let mut r = flat;
                let mut wf = wf0;
                let mut wc = wc0;
                for a in (1..d).rev() {
                    let n = rest[a - 1];
                    idx[a] = r % n;
                    r /= n;
                    let axis = &grid.axes[a];
                    z[a] = axis.point(idx[a]);
                    let (f1, c1) = axis.weights(idx[a]);
                    wf *= f1;
                    wc *= c1;
                }
                let v = f(&z);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(non_finite(&z));
                }
                fine.add(v * wf);
                abs.add(v.norm() * wf);
                if wc != 0.0 {
                    coarse.add(v * wc);
                }
            }
            Ok((fine.total(), coarse.total(), abs.total()))
        })
        .collect();

    let mut fine = ComplexSum::default();
    let mut coarse = ComplexSum::default();
    let mut abs = KahanSum::default();
    for p in partials {
        let (a, b, c) = p?;
        fine.add(a);
        coarse.add(b);
        abs.add(c);
    }
    let jac: Complex64 = grid.axes.iter().map(LineContour::jacobian).product();
    Ok(Estimate {
        value: fine.total() * jac,
        err: (fine.total() - coarse.total()).norm().max(ROUNDOFF * abs.total()),
    })
}

/// Neumaier-compensated sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct ComplexSum {
    re: KahanSum,
    im: KahanSum,
}

impl ComplexSum {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn total(&self) -> Complex64 {
        Complex64::new(self.re.total(), self.im.total())
    }
}

/// Gauss–Hermite rule for ∫ f(x) e^{−x²} dx.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermiteRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermiteRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let mut s = KahanSum::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s.add(w * f(*x));
        }
        s.total()
    }
}

pub const MAX_HERMITE_ORDER: usize = 200;

/// Gauss–Hermite nodes and weights. Nodes are the eigenvalues of the Jacobi
/// matrix (bisection), polished by Newton steps on the orthonormal Hermite
/// recurrence, which also yields the weights. Nodes increase.
pub fn gauss_hermite(n: usize) -> Result<GaussHermiteRule> {
    if n == 0 || n > MAX_HERMITE_ORDER {
        return Err(Error::Domain(format!(
            "Gauss-Hermite order must lie in 1..={MAX_HERMITE_ORDER}, got {n}"
        )));
    }
    let diag = vec![0.0; n];
    let off2: Vec<f64> = (1..n).map(|j| j as f64 / 2.0).collect();
    let bound = (2.0 * n as f64 + 1.0).sqrt() + 1.0;
    let mut nodes = crate::tridiag::top_eigenvalues(&diag, &off2, n, -bound, bound, 1e-13)
        .ok_or_else(|| Error::Convergence(format!("Gauss-Hermite nodes of order {n}")))?;
    nodes.reverse();
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let nf = n as f64;
    // p_n(z) and √(2n)·p_{n−1}(z) = p_n'(z) for the orthonormal family.
    let eval = |z: f64| {
        let mut p1 = pim4;
        let mut p2 = 0.0;
        for j in 1..=n {
            let jf = j as f64;
            let p3 = p2;
            p2 = p1;
            p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
        }
        (p1, (2.0 * nf).sqrt() * p2)
    };
    let mut weights = vec![0.0; n];
    for (z, w) in nodes.iter_mut().zip(weights.iter_mut()) {
        for _ in 0..3 {
            let (p, dp) = eval(*z);
            if dp != 0.0 {
                *z -= p / dp;
            }
        }
        let (_, dp) = eval(*z);
        *w = 2.0 / (dp * dp);
        if !w.is_finite() {
            return Err(Error::Convergence(format!(
                "Gauss-Hermite weight at node {z} of order {n}"
            )));
        }
    }
    // Enforce exact symmetry.
    for i in 0..n / 2 {
        let z = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[n - 1 - i]);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(GaussHermiteRule { nodes, weights })
}

/// Gauss–Legendre nodes and weights on [a, b].
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::domain("Gauss-Legendre order must be positive"));
    }
    let nf = n as f64;
    let xm = 0.5 * (b + a);
    let xl = 0.5 * (b - a);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        let mut converged = false;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 1..=n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Convergence(format!(
                "Gauss-Legendre root {i} of order {n}"
            )));
        }
        x[i] = xm - xl * z;
        x[n - 1 - i] = xm + xl * z;
        w[i] = 2.0 * xl / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    Ok((x, w))
}

/// Composite Gauss–Legendre rule with `panels` equal panels on [a, b].
pub fn composite_legendre(
    order: usize,
    panels: usize,
    a: f64,
    b: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if panels == 0 || !(b > a) {
        return Err(Error::domain("composite rule needs b > a and at least one panel"));
    }
    let width = (b - a) / panels as f64;
    let mut xs = Vec::with_capacity(order * panels);
    let mut ws = Vec::with_capacity(order * panels);
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let (x, w) = gauss_legendre(order, lo, lo + width)?;
        xs.extend(x);
        ws.extend(w);
    }
    Ok((xs, ws))
}

pub const MAX_DET_DIM: usize = 40;

/// Determinant of an `n×n` complex matrix stored row-major, by LU with
/// partial pivoting.
pub fn complex_det(a: &[Complex64], n: usize) -> Complex64 {
    assert_eq!(a.len(), n * n, "matrix storage does not match dimension");
    match n {
        0 => return Complex64::new(1.0, 0.0),
        1 => return a[0],
        2 => return a[0] * a[3] - a[1] * a[2],
        _ => {}
    }
    let mut m = a.to_vec();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i * n + col].norm().total_cmp(&m[j * n + col].norm()))
            .unwrap_or(col);
        let p = m[piv * n + col];
        if p.norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != col {
            for c in 0..n {
                m.swap(col * n + c, piv * n + c);
            }
            det = -det;
        }
        det *= p;
        for r in col + 1..n {
            let factor = m[r * n + col] / p;
            if factor.norm() == 0.0 {
                continue;
            }
            for c in col + 1..n {
                let sub = factor * m[col * n + c];
                m[r * n + c] -= sub;
            }
        }
    }
    det
}

/// Real counterpart of [`complex_det`].
pub fn real_det(a: &[f64], n: usize) -> f64 {
    assert_eq!(a.len(), n * n, "matrix storage does not match dimension");
    if n == 0 {
        return 1.0;
    }
    let mut m = a.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
            .unwrap_or(col);
        let p = m[piv * n + col];
        if p == 0.0 {
            return 0.0;
        }
        if piv != col {
            for c in 0..n {
                m.swap(col * n + c, piv * n + c);
            }
            det = -det;
        }
        det *= p;
        for r in col + 1..n {
            let factor = m[r * n + col] / p;
            if factor == 0.0 {
                continue;
            }
            for c in col + 1..n {
                m[r * n + c] -= factor * m[col * n + c];
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_line_integral() {
        let c = LineContour::vertical(0.0, 8.0, 400).unwrap();
        let est = trapezoid_line(|z| (z * z / 2.0).exp(), &c).unwrap();
        let v = est.value / Complex64::new(0.0, 2.0 * PI);
        assert!((v.re - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-10);
        assert!(v.im.abs() < 1e-14);
        assert!(est.err < 1e-10);
    }

    #[test]
    fn zero_and_odd_integrands() {
        let c = LineContour::vertical(0.0, 8.0, 64).unwrap();
        assert_eq!(trapezoid_line(|_| Complex64::new(0.0, 0.0), &c).unwrap().value, Complex64::new(0.0, 0.0));
        let odd = trapezoid_line(|z| z * (z * z / 2.0).exp(), &c).unwrap();
        assert!(odd.value.norm() < 1e-14);
    }

    #[test]
    fn non_finite_reports_location() {
        let c = LineContour::vertical(0.0, 1.0, 8).unwrap();
        let err = trapezoid_line(|z| Complex64::new(1.0 / z.im, 0.0), &c).unwrap_err();
        match err {
            Error::NonFinite { location } => assert!(location.contains('0')),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn contour_validation() {
        assert!(LineContour::vertical(0.0, -1.0, 16).is_err());
        assert!(LineContour::vertical(0.0, 1.0, 6).is_err());
        assert!(LineContour::vertical(0.0, 1.0, 10).is_err());
        let c = LineContour::vertical(0.5, 2.0, 16).unwrap();
        assert_relative_eq!(c.param(0), -c.param(16));
    }

    #[test]
    fn tensor_matches_product() {
        let c = LineContour::vertical(0.0, 8.0, 96).unwrap();
        let g = TensorGrid::new(vec![c.clone(), c]).unwrap();
        let est = trapezoid_tensor(|z| (z[0] * z[0] / 2.0 + z[1] * z[1]).exp(), &g).unwrap();
        let expect = -(2.0 * PI).sqrt() * PI.sqrt();
        assert!((est.value.re - expect).abs() < 1e-9);
        assert_eq!(g.total_nodes(), 97 * 97);
    }

    #[test]
    fn hermite_rules() {
        let r1 = gauss_hermite(1).unwrap();
        assert_eq!(r1.nodes, vec![0.0]);
        assert_relative_eq!(r1.weights[0], PI.sqrt(), epsilon = 1e-14);
        let r5 = gauss_hermite(5).unwrap();
        assert_relative_eq!(r5.integrate(|_| 1.0), PI.sqrt(), epsilon = 1e-14);
        let r2 = gauss_hermite(2).unwrap();
        assert_relative_eq!(r2.integrate(|x| x * x), PI.sqrt() / 2.0, epsilon = 1e-14);
        for n in [60, 120, 200] {
            let r = gauss_hermite(n).unwrap();
            assert!(r.weights.iter().all(|&w| w > 0.0));
            assert_relative_eq!(r.integrate(|_| 1.0), PI.sqrt(), epsilon = 1e-13);
            assert_relative_eq!(r.integrate(|x| x.powi(4)), 0.75 * PI.sqrt(), epsilon = 1e-12);
        }
        assert!(gauss_hermite(0).is_err());
        assert!(gauss_hermite(201).is_err());
    }

    #[test]
    fn legendre_rules() {
        let (x, w) = gauss_legendre(10, 0.0, 2.0).unwrap();
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(19)).sum();
        assert_relative_eq!(s, 2f64.powi(20) / 20.0, max_relative = 1e-13);
        let (x, w) = composite_legendre(8, 5, -1.0, 4.0).unwrap();
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.exp()).sum();
        assert_relative_eq!(s, 4f64.exp() - (-1f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn determinants() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let id = vec![one, zero, zero, zero, one, zero, zero, zero, one];
        assert_eq!(complex_det(&id, 3), one);
        let m = [
            Complex64::new(1.0, 2.0),
            Complex64::new(3.0, -1.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(-2.0, 1.0),
        ];
        assert_eq!(complex_det(&m, 2), m[0] * m[3] - m[1] * m[2]);
        assert_relative_eq!(real_det(&[2.0, 1.0, 1.0, 3.0], 2), 5.0);
        assert_relative_eq!(real_det(&[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 2.0], 3), -2.0);
    }

    #[test]
    fn cauchy_determinant() {
        let xs = [0.3, 1.1, 2.7, 0.9];
        let ys = [Complex64::new(0.2, 0.5), Complex64::new(1.4, -0.3), Complex64::new(0.7, 1.0), Complex64::new(2.0, 0.1)];
        let n = 4;
        let mut a = Vec::new();
        for &x in &xs {
            for &y in &ys {
                a.push(1.0 / (y + x));
            }
        }
        let mut num = Complex64::new(1.0, 0.0);
        let mut den = Complex64::new(1.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                if i < j {
                    num *= (xs[j] - xs[i]) * (ys[j] - ys[i]);
                }
                den *= ys[j] + xs[i];
            }
        }
        let expect = num / den;
        assert!((complex_det(&a, n) - expect).norm() < 1e-10 * expect.norm());
    }
}
