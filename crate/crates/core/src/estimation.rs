//! Fisher information of pure states and of measurement outcome
//! distributions.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, inner, norm, ComplexMatrix, C64};

/// Normalisation slack accepted by [`PureState::new`].
pub const NORM_TOL: f64 = 1e-10;
/// Probabilities at or below this are left out of CFI sums.
pub const PROB_CUTOFF: f64 = 1e-14;
/// Below this a negative QFI is treated as rounding and clamped to zero.
pub const NEGATIVE_SLACK: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Wraps an already normalised vector.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let n = norm(&amplitudes);
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParams(format!("state norm {n} is not 1")));
        }
        Ok(Self { amplitudes })
    }

    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let n = norm(&amplitudes);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidParams("cannot normalise a zero vector".into()));
        }
        for z in amplitudes.iter_mut() {
            *z /= n;
        }
        Ok(Self { amplitudes })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn overlap(&self, other: &PureState) -> C64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.overlap(other).norm_sqr()
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }
}

/// A state together with ∂_λ of it. `step` is the finite-difference step,
/// zero for analytic derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct StateDerivative {
    pub base: PureState,
    pub derivative: Vec<C64>,
    pub step: f64,
}

impl StateDerivative {
    pub fn analytic(base: PureState, derivative: Vec<C64>) -> Result<Self> {
        if derivative.len() != base.len() {
            return Err(Error::ShapeMismatch(format!(
                "derivative of length {} for a state of length {}",
                derivative.len(),
                base.len()
            )));
        }
        Ok(Self { base, derivative, step: 0.0 })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityVector {
    pub p: Vec<f64>,
    pub dp: Vec<f64>,
}

/// F = 4(⟨∂ψ|∂ψ⟩ − |⟨ψ|∂ψ⟩|²).
pub fn qfi_pure(sd: &StateDerivative) -> Result<f64> {
    let psi = sd.base.amplitudes();
    let dpsi = &sd.derivative;
    if psi.len() != dpsi.len() {
        return Err(Error::ShapeMismatch("state and derivative differ in length".into()));
    }
    let f = 4.0 * (inner(dpsi, dpsi).re - inner(psi, dpsi).norm_sqr());
    if f < -NEGATIVE_SLACK {
        return Err(Error::NegativeResult(f));
    }
    Ok(f.max(0.0))
}

/// F^C = Σ dp²/p over outcomes with p > 1e−14.
pub fn cfi(pv: &ProbabilityVector) -> Result<f64> {
    if pv.p.len() != pv.dp.len() {
        return Err(Error::ShapeMismatch("p and dp differ in length".into()));
    }
    if pv.p.iter().all(|&p| p <= PROB_CUTOFF) {
        return Err(Error::DegenerateDistribution);
    }
    Ok(pv.p.iter().zip(&pv.dp).filter(|(&p, _)| p > PROB_CUTOFF).map(|(&p, &dp)| dp * dp / p).sum())
}

pub fn default_step(lambda: f64) -> f64 {
    1e-5 * lambda.abs().max(1.0)
}

/// Central difference of a state-selection rule, with both neighbours
/// rotated so their overlap with ψ(λ) is real and positive.
pub fn numerical_state_derivative<F>(select: F, lambda: f64, h: f64) -> Result<StateDerivative>
where
    F: Fn(f64) -> Result<PureState>,
{
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::InvalidParams(format!("step {h} must be positive")));
    }
    let base = select(lambda)?;
    let aligned = |shifted: PureState| -> Result<Vec<C64>> {
        if shifted.len() != base.len() {
            return Err(Error::ShapeMismatch("selector changed the state dimension".into()));
        }
        let ov = base.overlap(&shifted);
        if ov.norm() < 0.5 {
            return Err(Error::StateCrossing { overlap: ov.norm() });
        }
        let phase = ov.conj() / ov.norm();
        Ok(shifted.into_amplitudes().into_iter().map(|z| z * phase).collect())
    };
    let plus = aligned(select(lambda + h)?)?;
    let minus = aligned(select(lambda - h)?)?;
    let derivative = plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect();
    Ok(StateDerivative { base, derivative, step: h })
}

/// Per-site weights Σ_m |ψ_{j,m}|².
pub fn site_marginals(psi: &[C64], d: usize) -> Result<Vec<f64>> {
    if d == 0 || !psi.len().is_multiple_of(d) {
        return Err(Error::ShapeMismatch(format!("{} amplitudes do not split into {d} orbitals", psi.len())));
    }
    Ok(psi.chunks(d).map(|cell| cell.iter().map(|z| z.norm_sqr()).sum()).collect())
}

/// Site-resolved position distribution and its λ-derivative. Amplitudes are
/// in full (site, orbital) coordinates, with zeros on removed orbitals.
pub fn position_probabilities(sd: &StateDerivative, d: usize) -> Result<ProbabilityVector> {
    let p = site_marginals(sd.base.amplitudes(), d)?;
    if sd.derivative.len() != sd.base.len() {
        return Err(Error::ShapeMismatch("state and derivative differ in length".into()));
    }
    let dp = sd
        .base
        .amplitudes()
        .chunks(d)
        .zip(sd.derivative.chunks(d))
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| 2.0 * (x.conj() * y).re).sum())
        .collect();
    Ok(ProbabilityVector { p, dp })
}

/// Outcome distribution of a projective measurement onto the orthonormal
/// vectors `basis`. A basis covering only the span of ψ is enough.
pub fn basis_probabilities(sd: &StateDerivative, basis: &[Vec<C64>]) -> Result<ProbabilityVector> {
    let psi = sd.base.amplitudes();
    let mut p = Vec::with_capacity(basis.len());
    let mut dp = Vec::with_capacity(basis.len());
    for b in basis {
        if b.len() != psi.len() {
            return Err(Error::ShapeMismatch("basis vector has the wrong length".into()));
        }
        let a = inner(b, psi);
        let da = inner(b, &sd.derivative);
        p.push(a.norm_sqr());
        dp.push(2.0 * (a.conj() * da).re);
    }
    Ok(ProbabilityVector { p, dp })
}

/// L = 2(|∂ψ⟩⟨ψ| + |ψ⟩⟨∂ψ|), kept as its two factors.
#[derive(Clone, Debug, PartialEq)]
pub struct PureSld {
    pub psi: Vec<C64>,
    pub dpsi: Vec<C64>,
}

pub fn sld_pure(sd: &StateDerivative) -> PureSld {
    PureSld { psi: sd.base.amplitudes().to_vec(), dpsi: sd.derivative.clone() }
}

impl PureSld {
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let a = inner(&self.psi, v);
        let b = inner(&self.dpsi, v);
        self.dpsi.iter().zip(&self.psi).map(|(d, p)| 2.0 * (d * a + p * b)).collect()
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let n = self.psi.len();
        ComplexMatrix::from_fn(n, n, |i, j| {
            2.0 * (self.dpsi[i] * self.psi[j].conj() + self.psi[i] * self.dpsi[j].conj())
        })
    }

    /// Tr[ρL²] = ‖Lψ‖².
    pub fn trace_rho_l2(&self) -> f64 {
        let v = self.apply(&self.psi);
        inner(&v, &v).re
    }

    /// Eigenvectors of L spanning span{ψ, ∂ψ}, i.e. the part of the SLD
    /// eigenbasis that carries probability.
    pub fn measurement_basis(&self) -> Result<Vec<Vec<C64>>> {
        let a = inner(&self.psi, &self.dpsi);
        let mut q: Vec<C64> = self.dpsi.iter().zip(&self.psi).map(|(d, p)| d - a * p).collect();
        let qn = norm(&q);
        if qn <= 1e-12 * norm(&self.dpsi).max(1.0) {
            return Ok(vec![self.psi.clone()]);
        }
        for z in q.iter_mut() {
            *z /= qn;
        }
        let span = [self.psi.clone(), q];
        let images: Vec<Vec<C64>> = span.iter().map(|v| self.apply(v)).collect();
        let small = ComplexMatrix::from_fn(2, 2, |r, c| inner(&span[r], &images[c]));
        let small = ComplexMatrix::from_fn(2, 2, |r, c| 0.5 * (small[(r, c)] + small[(c, r)].conj()));
        let eig = hermitian_eig(&small)?;
        Ok((0..2)
            .map(|c| {
                let w = eig.vector(c);
                (0..self.psi.len()).map(|i| w[0] * span[0][i] + w[1] * span[1][i]).collect()
            })
            .collect())
    }
}
