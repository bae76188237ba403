//! Fits of F(L) = a·L^b + c and exponent-versus-λ scans.

use rayon::prelude::*;

use crate::edge::{numeric_edge_information, ssh_edge_qfi};
use crate::error::{Error, Result};
use crate::estimation::default_step;
use crate::many_body::{qfi_obc_projector, qfi_pbc_sum, GAP_FLOOR};
use crate::models::ModelFamily;
use crate::table::{Cell, Table};

pub const DEFAULT_B_RANGE: (f64, f64) = (-1.0, 4.0);
/// Largest condition number of the 2×2 normal matrix accepted at the optimum.
pub const MAX_CONDITION: f64 = 1e12;
const STARTS: [f64; 3] = [0.0, 1.0, 2.0];

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingSeries {
    pub samples: Vec<(usize, f64)>,
    pub label: String,
}

impl ScalingSeries {
    pub fn new(samples: Vec<(usize, f64)>, label: impl Into<String>) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::InvalidSize(format!("{} samples; at least 3 are needed", samples.len())));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidParams("L values must be strictly increasing".into()));
        }
        if samples.iter().any(|&(l, f)| l == 0 || !f.is_finite()) {
            return Err(Error::InvalidParams("samples need L > 0 and finite F".into()));
        }
        Ok(Self { samples, label: label.into() })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitFlag {
    /// All F equal; b is reported as 0.
    Degenerate,
    /// The optimum sits on the edge of the search interval.
    AtBoundary,
}

impl FitFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            FitFlag::Degenerate => "degenerate",
            FitFlag::AtBoundary => "b-at-boundary",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub rms_residual: f64,
    /// rms_residual / max|F|.
    pub relative_residual: f64,
    pub flags: Vec<FitFlag>,
}

impl FitResult {
    pub fn predict(&self, l: f64) -> f64 {
        self.a * l.powf(self.b) + self.c
    }

    pub fn flag_string(&self) -> String {
        self.flags.iter().map(|f| f.as_str()).collect::<Vec<_>>().join(";")
    }
}

/// Box-Cox basis (x^b − 1)/b, continuous through b = 0.
fn basis(x: f64, b: f64) -> f64 {
    let t = b * x.ln();
    if t.abs() < 1e-8 {
        x.ln() * (1.0 + t / 2.0)
    } else {
        t.exp_m1() / b
    }
}

struct Projection {
    slope: f64,
    intercept: f64,
    sse: f64,
    condition: f64,
}

/// Least squares of F on {φ_b(x), 1}, solved in centred form.
fn project(x: &[f64], f: &[f64], b: f64) -> Projection {
    let n = x.len() as f64;
    let phi: Vec<f64> = x.iter().map(|&xi| basis(xi, b)).collect();
    let mp = phi.iter().sum::<f64>() / n;
    let mf = f.iter().sum::<f64>() / n;
    let spp: f64 = phi.iter().map(|p| (p - mp) * (p - mp)).sum();
    let spf: f64 = phi.iter().zip(f).map(|(p, y)| (p - mp) * (y - mf)).sum();
    let slope = if spp > 0.0 { spf / spp } else { 0.0 };
    let intercept = mf - slope * mp;
    let sse = phi.iter().zip(f).map(|(p, y)| (y - slope * p - intercept).powi(2)).sum();
    // Eigenvalues of [[Σφ², Σφ], [Σφ, n]].
    let s11: f64 = phi.iter().map(|p| p * p).sum();
    let s12: f64 = phi.iter().sum();
    let tr = s11 + n;
    let det = s11 * n - s12 * s12;
    let disc = ((tr * tr / 4.0) - det).max(0.0).sqrt();
    let lo = tr / 2.0 - disc;
    let condition = if lo > 0.0 { (tr / 2.0 + disc) / lo } else { f64::INFINITY };
    Projection { slope, intercept, sse, condition }
}

fn golden_section(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    [(lo, f(lo)), (mid, f(mid)), (hi, f(hi))]
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|p| p.0)
        .unwrap_or(mid)
}

/// Walks downhill from `start` in steps of `step` until the objective rises,
/// returning a bracket around the local minimum.
fn bracket(f: &impl Fn(f64) -> f64, start: f64, range: (f64, f64), step: f64) -> (f64, f64) {
    let f0 = f(start);
    let dir = if start + step <= range.1 && f(start + step) < f0 {
        1.0
    } else if start - step >= range.0 && f(start - step) < f0 {
        -1.0
    } else {
        return ((start - step).max(range.0), (start + step).min(range.1));
    };
    let mut prev = start;
    let mut cur = start + dir * step;
    let mut fcur = f(cur);
    loop {
        let next = (cur + dir * step).clamp(range.0, range.1);
        if next == cur {
            return if dir > 0.0 { (prev, cur) } else { (cur, prev) };
        }
        let fnext = f(next);
        if fnext >= fcur {
            return if dir > 0.0 { (prev, next) } else { (next, prev) };
        }
        prev = cur;
        cur = next;
        fcur = fnext;
    }
}

/// Variable-projection fit of a·L^b + c.
///
/// For fixed b the model is linear in (a, c); b is found by golden-section
/// search started from 0, 1, 2 and both interval ends, keeping the best.
pub fn fit_power_law(series: &ScalingSeries, b_range: (f64, f64)) -> Result<FitResult> {
    let n = series.samples.len();
    if n < 4 {
        return Err(Error::InvalidSize(format!("{n} samples; at least 4 are needed")));
    }
    if b_range.0.is_nan() || b_range.1.is_nan() || b_range.0 >= b_range.1 {
        return Err(Error::InvalidParams(format!("empty exponent interval {b_range:?}")));
    }
    let f: Vec<f64> = series.samples.iter().map(|s| s.1).collect();
    let fmax = f.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let fmin = f.iter().copied().fold(f64::INFINITY, f64::min);
    let fmean = f.iter().sum::<f64>() / n as f64;
    if f.iter().copied().fold(f64::NEG_INFINITY, f64::max) - fmin <= 1e-14 * fmax {
        let rms = (f.iter().map(|v| (v - fmean).powi(2)).sum::<f64>() / n as f64).sqrt();
        return Ok(FitResult {
            a: 0.0,
            b: 0.0,
            c: fmean,
            rms_residual: rms,
            relative_residual: if fmax > 0.0 { rms / fmax } else { 0.0 },
            flags: vec![FitFlag::Degenerate],
        });
    }
    // Work in x = L / geometric mean to keep the basis well scaled.
    let lref = (series.samples.iter().map(|s| (s.0 as f64).ln()).sum::<f64>() / n as f64).exp();
    let x: Vec<f64> = series.samples.iter().map(|s| s.0 as f64 / lref).collect();
    let objective = |b: f64| project(&x, &f, b).sse;

    let step = (b_range.1 - b_range.0) / 50.0;
    let mut starts: Vec<f64> = STARTS.iter().map(|s| s.clamp(b_range.0, b_range.1)).collect();
    starts.extend([b_range.0, b_range.1]);
    let mut best_b = starts[0];
    let mut best = f64::INFINITY;
    for s in starts {
        let (lo, hi) = bracket(&objective, s, b_range, step);
        let b = golden_section(&objective, lo, hi, 1e-12);
        let v = objective(b);
        if v < best {
            best = v;
            best_b = b;
        }
    }
    let p = project(&x, &f, best_b);
    if p.condition > MAX_CONDITION {
        return Err(Error::IllConditioned(p.condition));
    }
    // F = s·(x^b − 1)/b + i  ⇒  a = s/(b·lref^b), c = i − s/b.
    let (a, c) = if best_b.abs() < 1e-12 {
        (f64::NAN, f64::NAN)
    } else {
        (p.slope / (best_b * lref.powf(best_b)), p.intercept - p.slope / best_b)
    };
    let mut flags = Vec::new();
    if (best_b - b_range.0).abs() < 1e-9 || (best_b - b_range.1).abs() < 1e-9 {
        flags.push(FitFlag::AtBoundary);
    }
    let fit = FitResult { a, b: best_b, c, rms_residual: 0.0, relative_residual: 0.0, flags };
    let rms = if a.is_finite() {
        (series.samples.iter().map(|&(l, y)| (y - fit.predict(l as f64)).powi(2)).sum::<f64>() / n as f64).sqrt()
    } else {
        (p.sse / n as f64).sqrt()
    };
    Ok(FitResult { rms_residual: rms, relative_residual: rms / fmax, ..fit })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    Edge,
    ManybodyPbc,
    ManybodyObc,
}

impl Quantity {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "edge" => Ok(Quantity::Edge),
            "manybody_pbc" | "manybody-pbc" => Ok(Quantity::ManybodyPbc),
            "manybody_obc" | "manybody-obc" => Ok(Quantity::ManybodyObc),
            other => Err(Error::InvalidConfig(format!("unknown quantity '{other}'"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::Edge => "edge",
            Quantity::ManybodyPbc => "manybody_pbc",
            Quantity::ManybodyObc => "manybody_obc",
        }
    }
}

/// F(λ, L) through the pipeline matching `quantity`.
pub fn compute_quantity(family: &ModelFamily, quantity: Quantity, lambda: f64, l: usize) -> Result<f64> {
    match quantity {
        Quantity::Edge => match family {
            ModelFamily::Ssh { j2 } if lambda.abs() < 1.0 && *j2 == 1.0 => ssh_edge_qfi(lambda, l),
            _ => Ok(numeric_edge_information(family, lambda, l, default_step(lambda))?.qfi),
        },
        Quantity::ManybodyPbc => Ok(qfi_pbc_sum(family, lambda, l, GAP_FLOOR)?.total),
        Quantity::ManybodyObc => qfi_obc_projector(family, lambda, l, default_step(lambda)),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub lambda: f64,
    pub fit: Option<FitResult>,
    pub error: Option<String>,
}

impl ScanRow {
    pub fn flags(&self) -> String {
        match (&self.fit, &self.error) {
            (_, Some(e)) => format!("error: {e}"),
            (Some(f), None) => f.flag_string(),
            (None, None) => String::new(),
        }
    }
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 5 {
        return Err(Error::InvalidConfig(format!("{} sizes; a scan needs at least 5", sizes.len())));
    }
    if sizes.windows(2).any(|w| w[1] <= w[0]) || sizes[0] == 0 {
        return Err(Error::InvalidConfig("sizes must be positive and strictly increasing".into()));
    }
    let ratios: Vec<f64> = sizes.windows(2).map(|w| w[1] as f64 / w[0] as f64).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    if ratios.iter().any(|r| (r / mean - 1.0).abs() > 0.1) {
        return Err(Error::InvalidConfig("sizes must form a geometric grid".into()));
    }
    Ok(())
}

/// One fitted row per λ, in input order. Failures at individual points are
/// reported in the row instead of aborting the scan.
pub fn exponent_scan(
    family: &ModelFamily,
    quantity: Quantity,
    lambdas: &[f64],
    sizes: &[usize],
) -> Result<Vec<ScanRow>> {
    if lambdas.is_empty() {
        return Err(Error::InvalidConfig("empty lambda grid".into()));
    }
    check_sizes(sizes)?;
    Ok(lambdas
        .par_iter()
        .map(|&lambda| {
            let series: Result<Vec<(usize, f64)>> =
                sizes.iter().map(|&l| compute_quantity(family, quantity, lambda, l).map(|f| (l, f))).collect();
            let fit = series
                .and_then(|s| ScalingSeries::new(s, format!("{} {} {lambda}", family.id(), quantity.as_str())))
                .and_then(|s| fit_power_law(&s, DEFAULT_B_RANGE));
            match fit {
                Ok(f) => ScanRow { lambda, fit: Some(f), error: None },
                Err(e) => ScanRow { lambda, fit: None, error: Some(e.to_string()) },
            }
        })
        .collect())
}

pub fn scan_table(rows: &[ScanRow]) -> Table {
    let mut t = Table::new(&["lambda", "b", "a", "c", "rms_residual", "flags"]);
    for r in rows {
        let f = r.fit.as_ref();
        t.push(vec![
            Cell::Num(r.lambda),
            f.map(|f| f.b).into(),
            f.map(|f| f.a).into(),
            f.map(|f| f.c).into(),
            f.map(|f| f.rms_residual).into(),
            Cell::Text(r.flags()),
        ]);
    }
    t
}
