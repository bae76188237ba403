//! Monte-Carlo position measurements and maximum-likelihood estimation of λ.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::edge::{reference_kind, select_state, ssh_edge_family, StateKind};
use crate::error::{Error, Result};
use crate::estimation::{
    cfi, default_step, numerical_state_derivative, position_probabilities, site_marginals, PureState,
};
use crate::models::ModelFamily;
use crate::table::{Cell, Table};

/// Grid points used to bracket the likelihood maximum.
pub const MLE_GRID: usize = 64;
pub const MLE_TOL: f64 = 1e-8;

/// λ ↦ site-resolved position distribution.
pub trait PositionModel: Sync {
    fn distribution(&self, lambda: f64) -> Result<Vec<f64>>;
    /// Classical Fisher information of the position measurement at λ.
    fn position_cfi(&self, lambda: f64) -> Result<f64>;
}

/// Closed-form p_j of the SSH zero mode.
#[derive(Clone, Copy, Debug)]
pub struct SshEdgePositions {
    pub l: usize,
}

impl PositionModel for SshEdgePositions {
    fn distribution(&self, lambda: f64) -> Result<Vec<f64>> {
        site_marginals(ssh_edge_family(lambda, self.l)?.state()?.amplitudes(), 2)
    }

    fn position_cfi(&self, lambda: f64) -> Result<f64> {
        cfi(&position_probabilities(&ssh_edge_family(lambda, self.l)?.materialize()?, 2)?)
    }
}

/// Position distribution of a numerically selected state; the edge/bulk
/// choice is fixed once at construction.
#[derive(Clone, Debug)]
pub struct NumericPositions {
    pub family: ModelFamily,
    pub kind: StateKind,
    pub l: usize,
}

impl NumericPositions {
    pub fn new(family: ModelFamily, lambda_ref: f64, l: usize) -> Result<Self> {
        let kind = reference_kind(&family, lambda_ref, l)?;
        Ok(Self { family, kind, l })
    }

    fn state(&self, lambda: f64) -> Result<PureState> {
        select_state(&self.family, self.kind, lambda, self.l)
    }
}

impl PositionModel for NumericPositions {
    fn distribution(&self, lambda: f64) -> Result<Vec<f64>> {
        site_marginals(self.state(lambda)?.amplitudes(), self.family.orbitals())
    }

    fn position_cfi(&self, lambda: f64) -> Result<f64> {
        let sd = numerical_state_derivative(|x| self.state(x), lambda, default_step(lambda))?;
        cfi(&position_probabilities(&sd, self.family.orbitals())?)
    }
}

/// The analytic model where one exists, the numeric one otherwise.
pub fn position_model(family: &ModelFamily, lambda_ref: f64, l: usize) -> Result<Box<dyn PositionModel + Send>> {
    match family {
        ModelFamily::Ssh { .. } if lambda_ref.abs() < 1.0 => Ok(Box::new(SshEdgePositions { l })),
        _ => Ok(Box::new(NumericPositions::new(family.clone(), lambda_ref, l)?)),
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `m` independent draws from `p` by inverse CDF, returned as counts.
pub fn sample_counts(p: &[f64], m: u64, rng: &mut impl Rng) -> Result<Vec<u64>> {
    let total: f64 = p.iter().sum();
    if p.is_empty() || p.iter().any(|&x| x < 0.0 || !x.is_finite()) || (total - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParams("not a probability distribution".into()));
    }
    let mut cdf = Vec::with_capacity(p.len());
    let mut acc = 0.0;
    for &x in p {
        acc += x;
        cdf.push(acc);
    }
    let last = p.iter().rposition(|&x| x > 0.0).unwrap_or(0);
    let mut counts = vec![0u64; p.len()];
    for _ in 0..m {
        let u: f64 = rng.random::<f64>() * acc;
        let j = cdf.partition_point(|&c| c <= u).min(last);
        counts[j] += 1;
    }
    Ok(counts)
}

/// Site counts from `m` position measurements on ψ; stream 0 of `seed`.
pub fn sample_positions(psi: &PureState, d: usize, m: u64, seed: u64) -> Result<Vec<u64>> {
    let p = site_marginals(psi.amplitudes(), d)?;
    sample_counts(&p, m, &mut rng_for(seed, 0))
}

fn log_likelihood(counts: &[u64], model: &dyn PositionModel, lambda: f64) -> f64 {
    let Ok(p) = model.distribution(lambda) else {
        return f64::NEG_INFINITY;
    };
    if p.len() != counts.len() {
        return f64::NEG_INFINITY;
    }
    let mut ll = 0.0;
    for (&n, &pj) in counts.iter().zip(&p) {
        if n == 0 {
            continue;
        }
        if pj <= 0.0 {
            return f64::NEG_INFINITY;
        }
        ll += n as f64 * pj.ln();
    }
    ll
}

/// argmax_λ Σ_j n_j ln p_j(λ) on `interval`: a 64-point grid picks the
/// basin, golden-section search refines it to 1e−8.
pub fn mle_estimate(counts: &[u64], model: &dyn PositionModel, interval: (f64, f64)) -> Result<f64> {
    if counts.iter().sum::<u64>() == 0 {
        return Err(Error::InvalidParams("no measurement outcomes".into()));
    }
    let (lo, hi) = interval;
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::InvalidParams(format!("empty interval ({lo}, {hi})")));
    }
    let step = (hi - lo) / (MLE_GRID - 1) as f64;
    let grid: Vec<f64> = (0..MLE_GRID).map(|i| if i == MLE_GRID - 1 { hi } else { lo + i as f64 * step }).collect();
    let values: Vec<f64> = grid.iter().map(|&x| log_likelihood(counts, model, x)).collect();
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let max = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = finite.iter().copied().fold(f64::INFINITY, f64::min);
    if finite.is_empty() || (finite.len() == values.len() && max - min < 1e-12 * max.abs().max(1.0)) {
        return Err(Error::FlatLikelihood);
    }
    let best = values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|p| p.0).unwrap_or(0);
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(MLE_GRID - 1)];
    let f = |x: f64| -log_likelihood(counts, model, x);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > MLE_TOL {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    let candidates = [0.5 * (a + b), grid[best]];
    Ok(candidates.into_iter().min_by(|x, y| f(*x).total_cmp(&f(*y))).unwrap_or(0.5 * (a + b)))
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub samples: u64,
    pub reps: usize,
    pub seed: u64,
    pub lambda_true: f64,
    pub interval: (f64, f64),
    pub l: usize,
    pub family: ModelFamily,
}

impl SimConfig {
    pub fn ssh_default() -> Self {
        Self {
            samples: 10_000,
            reps: 200,
            seed: 0,
            lambda_true: 0.5,
            interval: (0.0, 0.95),
            l: 32,
            family: ModelFamily::ssh(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.reps == 0 {
            return Err(Error::InvalidConfig("samples and reps must be at least 1".into()));
        }
        let (lo, hi) = self.interval;
        if !(lo < self.lambda_true && self.lambda_true < hi) {
            return Err(Error::InvalidConfig(format!(
                "lambda_true = {} is not inside ({lo}, {hi})",
                self.lambda_true
            )));
        }
        if self.l < 2 {
            return Err(Error::InvalidConfig("L must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub lambda_hat_mean: f64,
    pub sample_variance: f64,
    pub predicted_crb: f64,
    pub ratio: f64,
    /// Ordered by run index; `None` where the run failed.
    pub per_run_estimates: Vec<Option<f64>>,
    pub run_failures: usize,
}

/// R independent experiments of M position measurements each, run `r` using
/// stream `r` of the seeded generator.
pub fn estimator_stats(cfg: &SimConfig) -> Result<EstimationReport> {
    cfg.validate()?;
    let model = position_model(&cfg.family, cfg.lambda_true, cfg.l)?;
    let p_true = model.distribution(cfg.lambda_true)?;
    let fc = model.position_cfi(cfg.lambda_true)?;
    let runs: Vec<Option<f64>> = (0..cfg.reps)
        .into_par_iter()
        .map(|run| {
            let mut rng = rng_for(cfg.seed, run as u64);
            sample_counts(&p_true, cfg.samples, &mut rng)
                .and_then(|counts| mle_estimate(&counts, model.as_ref(), cfg.interval))
                .ok()
        })
        .collect();
    let ok: Vec<f64> = runs.iter().flatten().copied().collect();
    let n = ok.len();
    let mean = if n > 0 { ok.iter().sum::<f64>() / n as f64 } else { f64::NAN };
    let var = if n > 1 { ok.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { f64::NAN };
    let crb = 1.0 / (cfg.samples as f64 * fc);
    Ok(EstimationReport {
        lambda_hat_mean: mean,
        sample_variance: var,
        predicted_crb: crb,
        ratio: var / crb,
        run_failures: cfg.reps - n,
        per_run_estimates: runs,
    })
}

pub fn per_run_table(report: &EstimationReport) -> Table {
    let mut t = Table::new(&["run", "lambda_hat"]);
    for (i, est) in report.per_run_estimates.iter().enumerate() {
        t.push(vec![Cell::from(i), Cell::from(*est)]);
    }
    t
}
