//! Moment estimates and the cross-check report.
//!
//! JSON output is byte-stable: maps are ordered, floats are printed in
//! shortest round-trip form and nothing time-dependent is recorded unless
//! timing is requested explicitly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{Error, Result};

/// Which route produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Contour,
    Partition,
    GaussianMc,
    AiryLaplace,
    AiryFredholmSlope,
    SeriesMc,
    PolymerLimit,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Contour => "contour",
            Method::Partition => "partition",
            Method::GaussianMc => "gaussian_mc",
            Method::AiryLaplace => "airy_laplace",
            Method::AiryFredholmSlope => "airy_fredholm_slope",
            Method::SeriesMc => "series_mc",
            Method::PolymerLimit => "polymer_limit",
        }
    }

    /// Deterministic quadrature (as opposed to sampling or extrapolation).
    pub fn is_deterministic(self) -> bool {
        matches!(
            self,
            Method::Contour | Method::Partition | Method::AiryLaplace | Method::AiryFredholmSlope
        )
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A computed value with its error estimate and provenance.
///
/// For deterministic methods `err` is a discretisation error estimate, for
/// Monte Carlo methods it is one standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub method: Method,
    pub value: f64,
    pub err: f64,
    #[serde(default)]
    pub meta: BTreeMap<String, Value>,
}

impl MomentEstimate {
    pub fn new(method: Method, value: f64, err: f64) -> Self {
        MomentEstimate {
            method,
            value,
            err,
            meta: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }

    /// Scales value and error by a positive factor.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.value *= factor;
        self.err *= factor;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RequestEcho {
    pub k: u32,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "X")]
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub a: Method,
    pub b: Method,
    pub rel_gap: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Tolerances used when comparing two estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative tolerance for pairs of deterministic estimates.
    pub quadrature: f64,
    /// Number of combined standard errors allowed when either side is
    /// stochastic or extrapolated.
    pub sigmas: f64,
}

impl Tolerances {
    /// 1e−6 for k ≤ 2, 1e−3 above.
    pub fn for_order(k: u32) -> Self {
        Tolerances {
            quadrature: if k <= 2 { 1e-6 } else { 1e-3 },
            sigmas: 3.0,
        }
    }
}

/// Compares `a` against the reference `b`.
///
/// A deterministic pair passes when the gap plus both error estimates stays
/// within the tolerance, so a tolerance below the attainable resolution fails.
/// Any other pair passes when the gap is within `sigmas` combined errors (or
/// the quadrature tolerance, whichever is larger).
pub fn compare(a: &MomentEstimate, b: &MomentEstimate, tol: Tolerances) -> Gap {
    let scale = b.value.abs();
    let rel_gap = (a.value - b.value).abs() / scale;
    let (tol_used, pass) = if a.method.is_deterministic() && b.method.is_deterministic() {
        let resolution = (a.err + b.err) / scale;
        (tol.quadrature, rel_gap + resolution <= tol.quadrature)
    } else {
        let stat = tol.sigmas * a.err.hypot(b.err) / scale;
        let t = stat.max(tol.quadrature);
        (t, rel_gap <= t)
    };
    Gap {
        a: a.method,
        b: b.method,
        rel_gap,
        tol: tol_used,
        pass: pass && rel_gap.is_finite(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckReport {
    pub request: RequestEcho,
    pub estimates: Vec<MomentEstimate>,
    pub gaps: Vec<Gap>,
    pub pass: bool,
    pub seed: u64,
    pub version: String,
    /// Wall-clock data; present only when explicitly requested and excluded
    /// from the reproducibility guarantee.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<BTreeMap<String, f64>>,
}

impl CrossCheckReport {
    /// Builds the report, comparing every pair of estimates in order.
    pub fn build(
        request: RequestEcho,
        estimates: Vec<MomentEstimate>,
        tol: Tolerances,
        seed: u64,
    ) -> Result<Self> {
        if estimates.is_empty() {
            return Err(Error::EmptyReport);
        }
        let mut gaps = Vec::new();
        for i in 0..estimates.len() {
            for j in i + 1..estimates.len() {
                gaps.push(compare(&estimates[i], &estimates[j], tol));
            }
        }
        let pass = gaps.iter().all(|g| g.pass);
        Ok(CrossCheckReport {
            request,
            estimates,
            gaps,
            pass,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timing: None,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        if self.estimates.is_empty() {
            return Err(Error::EmptyReport);
        }
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// One `estimate` row per estimate followed by one `gap` row per pair.
    pub fn to_csv(&self) -> Result<String> {
        if self.estimates.is_empty() {
            return Err(Error::EmptyReport);
        }
        let mut s = String::from("kind,method,value,err,a,b,rel_gap,tol,pass\n");
        for e in &self.estimates {
            let _ = writeln!(s, "estimate,{},{:e},{:e},,,,,", e.method, e.value, e.err);
        }
        for g in &self.gaps {
            let _ = writeln!(
                s,
                "gap,,,,{},{},{:e},{:e},{}",
                g.a, g.b, g.rel_gap, g.tol, g.pass
            );
        }
        Ok(s)
    }

    /// Writes the report; nothing is written when the report is empty.
    pub fn emit(&self, format: Format, path: &Path) -> Result<()> {
        let body = match format {
            Format::Json => self.to_json()?,
            Format::Csv => self.to_csv()?,
        };
        fs::write(path, body)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}
