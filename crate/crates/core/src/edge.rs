//! Edge states: the geometric ansatz |φ_z⟩⊗|u⟩, its closed-form QFI, the
//! analytic SSH zero mode, and numerical edge/bulk state extraction.

use crate::error::{Error, Result};
use crate::estimation::{
    cfi, numerical_state_derivative, position_probabilities, qfi_pure, site_marginals, PureState,
    StateDerivative,
};
use crate::linalg::{hermitian_eig, inner, norm, ComplexMatrix, C64, ONE, ZERO};
use crate::models::{BlockHamiltonian1D, ModelFamily};

/// |φ_z⟩⊗|u⟩ on `l` sites together with ∂_λz and ∂_λu.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeAnsatz {
    pub z: C64,
    pub u: Vec<C64>,
    pub l: usize,
    pub dz: C64,
    pub du: Vec<C64>,
}

impl EdgeAnsatz {
    pub fn new(z: C64, u: Vec<C64>, l: usize, dz: C64, du: Vec<C64>) -> Result<Self> {
        check_z(z)?;
        if l == 0 {
            return Err(Error::InvalidSize("L must be at least 1".into()));
        }
        if (norm(&u) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams("internal state u must be normalised".into()));
        }
        if du.len() != u.len() {
            return Err(Error::ShapeMismatch("du and u differ in length".into()));
        }
        Ok(Self { z, u, l, dz, du })
    }

    pub fn orbitals(&self) -> usize {
        self.u.len()
    }

    pub fn r(&self) -> f64 {
        self.z.norm()
    }

    /// ∂_λ|z|; taken as |∂_λz| at z = 0 where |z| is not differentiable.
    pub fn dr(&self) -> f64 {
        let r = self.r();
        if r == 0.0 {
            self.dz.norm()
        } else {
            (self.z.conj() * self.dz).re / r
        }
    }

    /// Site-major amplitudes and their exact λ-derivative.
    pub fn materialize(&self) -> Result<StateDerivative> {
        let r = self.r();
        let l = self.l;
        let norm_const = normalization(r, l);
        let dlog_n = dlog_normalization(r, l) * self.dr();
        let d = self.orbitals();
        let mut psi = Vec::with_capacity(l * d);
        let mut dpsi = Vec::with_capacity(l * d);
        // z^j and j z^{j-1}
        let mut zj = ONE;
        let mut dzj = ZERO;
        for _ in 0..l {
            let spatial = norm_const * zj;
            let dspatial = norm_const * (dlog_n * zj + dzj * self.dz);
            for m in 0..d {
                psi.push(spatial * self.u[m]);
                dpsi.push(dspatial * self.u[m] + spatial * self.du[m]);
            }
            dzj = dzj * self.z + zj;
            zj *= self.z;
        }
        StateDerivative::analytic(PureState::new(psi)?, dpsi)
    }

    pub fn state(&self) -> Result<PureState> {
        Ok(self.materialize()?.base)
    }
}

fn check_z(z: C64) -> Result<()> {
    let r = z.norm();
    if r.is_nan() || r >= 1.0 {
        return Err(Error::InvalidZ(r));
    }
    Ok(())
}

/// √((1−r²)/(1−r^{2L})).
fn normalization(r: f64, l: usize) -> f64 {
    let r2 = r * r;
    if r2 == 0.0 {
        return 1.0;
    }
    // expm1 keeps both factors accurate for r near 1.
    let ln_r2 = r2.ln();
    let num = -(ln_r2).exp_m1();
    let den = -(l as f64 * ln_r2).exp_m1();
    (num / den).sqrt()
}

/// d ln N / dr = −r/(1−r²) + L r^{2L−1}/(1−r^{2L}).
fn dlog_normalization(r: f64, l: usize) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let r2 = r * r;
    let ln_r2 = r2.ln();
    let a = -r / (-ln_r2.exp_m1());
    let b = l as f64 * (l as f64 * ln_r2).exp() / r / (-(l as f64 * ln_r2).exp_m1());
    a + b
}

/// |φ_z⟩ with a single orbital per site.
pub fn phi_z_state(z: C64, l: usize) -> Result<PureState> {
    EdgeAnsatz::new(z, vec![ONE], l, ZERO, vec![ZERO])?.state()
}

/// csch²x − 1/x², by series near zero.
fn g(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        -1.0 / 3.0 + x2 / 15.0 - 2.0 * x2 * x2 / 189.0 + x2 * x2 * x2 / 675.0
            - 2.0 * x2 * x2 * x2 * x2 / 10395.0
    } else {
        let s = x.sinh();
        1.0 / (s * s) - 1.0 / (x * x)
    }
}

fn check_r(r: f64) -> Result<()> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::InvalidR(r));
    }
    Ok(())
}

/// QFI of |φ_r⟩ for real r:
/// 4(∂r)²[1 + r^{4L} − r^{2L−2}(2r² + L²(1−r²)²)] / [(1−r²)²(1−r^{2L})²].
///
/// For r ≥ 0.5 this is evaluated as (∂r)² e^u [g(u/2) − L² g(Lu/2)] with
/// u = −ln r², which avoids the catastrophic cancellation near r = 1.
pub fn qfi_phi_z_closed_form(r: f64, dr: f64, l: usize) -> Result<f64> {
    check_r(r)?;
    if l <= 1 || dr == 0.0 {
        return Ok(0.0);
    }
    let lf = l as f64;
    let shape = if r < 0.5 {
        let r2 = r * r;
        let r2l = r2.powi(l as i32);
        4.0 * (1.0 + r2l * r2l - r2.powi(l as i32 - 1) * (2.0 * r2 + lf * lf * (1.0 - r2).powi(2)))
            / ((1.0 - r2).powi(2) * (1.0 - r2l).powi(2))
    } else {
        let u = -(r * r).ln();
        u.exp() * (g(u / 2.0) - lf * lf * g(lf * u / 2.0))
    };
    Ok(dr * dr * shape.max(0.0))
}

/// QFI of |φ_z⟩ with z = r e^{iθ}: F(r)·[(∂r)² + r²(∂θ)²].
pub fn qfi_phi_z_complex(r: f64, _theta: f64, dr: f64, dtheta: f64, l: usize) -> Result<f64> {
    Ok(qfi_phi_z_closed_form(r, 1.0, l)? * (dr * dr + r * r * dtheta * dtheta))
}

/// The r → 1 limit (L² − 1)[(∂r)² + (∂θ)²]/3.
pub fn qfi_tpt_limit(dr: f64, dtheta: f64, l: usize) -> f64 {
    let lf = l as f64;
    (lf * lf - 1.0) * (dr * dr + dtheta * dtheta) / 3.0
}

/// The exact SSH zero mode φ_{−λ}⊗[1, 0] of the chain whose last b orbital
/// is removed.
pub fn ssh_edge_family(lambda: f64, l: usize) -> Result<EdgeAnsatz> {
    if lambda.is_nan() || lambda.abs() >= 1.0 {
        return Err(Error::OutsideTopologicalPhase(lambda));
    }
    EdgeAnsatz::new(C64::new(-lambda, 0.0), vec![ONE, ZERO], l, C64::new(-1.0, 0.0), vec![ZERO, ZERO])
}

/// QFI of the SSH edge family, via the closed form.
pub fn ssh_edge_qfi(lambda: f64, l: usize) -> Result<f64> {
    let fam = ssh_edge_family(lambda, l)?;
    qfi_phi_z_closed_form(fam.r(), fam.dr(), l)
}

/// A selected eigenstate with its energy and weight on the left quarter.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectedState {
    pub state: PureState,
    pub energy: f64,
    pub left_weight: f64,
}

fn window_len(dim: usize, d: usize) -> usize {
    let sites = dim.div_ceil(d);
    sites.div_ceil(4) * d
}

fn left_weight(v: &[C64], d: usize) -> f64 {
    v[..window_len(v.len(), d).min(v.len())].iter().map(|z| z.norm_sqr()).sum()
}

fn fix_phase(v: &mut [C64]) {
    let peak = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(anchor) = v.iter().find(|z| z.norm() >= 0.5 * peak && peak > 0.0) {
        let phase = anchor.conj() / anchor.norm();
        v.iter_mut().for_each(|z| *z *= phase);
    }
}

/// The eigenstate closest to zero energy, taken from the left edge.
///
/// All eigenstates within 1e−8·max(1, ‖H‖) of the smallest |E| are
/// candidates; the returned state maximises the weight on the first ⌈L/4⌉
/// sites within their span. `d` is the number of orbitals per site, with
/// coordinates ordered site-major.
pub fn extract_edge_state(h: &ComplexMatrix, d: usize) -> Result<SelectedState> {
    let eig = hermitian_eig(h)?;
    let n = eig.dim();
    if n == 0 || d == 0 {
        return Err(Error::InvalidSize("empty Hamiltonian".into()));
    }
    let scale = eig.spectral_radius().max(1.0);
    let min_abs = eig.eigenvalues.iter().map(|e| e.abs()).fold(f64::INFINITY, f64::min);
    let candidates: Vec<usize> =
        (0..n).filter(|&i| eig.eigenvalues[i].abs() - min_abs <= 1e-8 * scale).collect();
    let mut psi = if candidates.len() == 1 {
        eig.vector(candidates[0])
    } else {
        let vecs: Vec<Vec<C64>> = candidates.iter().map(|&i| eig.vector(i)).collect();
        let w = window_len(n, d).min(n);
        let k = vecs.len();
        let weight = ComplexMatrix::from_fn(k, k, |a, b| inner(&vecs[a][..w], &vecs[b][..w]));
        let weight = ComplexMatrix::from_fn(k, k, |a, b| 0.5 * (weight[(a, b)] + weight[(b, a)].conj()));
        let sub = hermitian_eig(&weight)?;
        if sub.eigenvalues[k - 1] - sub.eigenvalues[k - 2] < 1e-6 {
            return Err(Error::NoGapIsolation);
        }
        let c = sub.vector(k - 1);
        (0..n).map(|i| (0..k).map(|a| c[a] * vecs[a][i]).sum()).collect()
    };
    let nrm = norm(&psi);
    psi.iter_mut().for_each(|z| *z /= nrm);
    fix_phase(&mut psi);
    let energy = inner(&psi, &h.mul_vec(&psi)?).re;
    let left_weight = left_weight(&psi, d);
    Ok(SelectedState { state: PureState::new(psi)?, energy, left_weight })
}

/// The eigenstate at the top of the lower band (largest E < 0).
pub fn extract_bulk_state(h: &ComplexMatrix) -> Result<PureState> {
    let eig = hermitian_eig(h)?;
    let tol = 1e-10 * eig.spectral_radius();
    let idx = eig.eigenvalues.iter().rposition(|&e| e < -tol).ok_or(Error::NoLowerBand)?;
    PureState::new(eig.vector(idx))
}

/// Estimate of |z| from the decay of site probabilities, exp(mean ½ln(p_{j+1}/p_j))
/// over j ∈ [1, L/2].
pub fn localization_parameter(psi: &PureState, d: usize) -> Result<f64> {
    let p = site_marginals(psi.amplitudes(), d)?;
    let l = p.len();
    if l < 3 {
        return Err(Error::InvalidSize(format!("need at least 3 sites, got {l}")));
    }
    if p[1..].iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let upper = (l / 2).min(l - 2);
    let mut logs = Vec::new();
    let mut rising = 0;
    let mut total = 0;
    for j in 1..=upper.max(1) {
        if p[j] == 0.0 {
            continue;
        }
        total += 1;
        if p[j + 1] > p[j] {
            rising += 1;
        }
        logs.push(0.5 * (p[j + 1] / p[j]).ln());
    }
    if total == 0 {
        return Ok(0.0);
    }
    if rising as f64 > 0.2 * total as f64 {
        return Err(Error::NonMonotonic);
    }
    Ok((logs.iter().sum::<f64>() / logs.len() as f64).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateKind {
    Edge,
    Bulk,
}

impl StateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StateKind::Edge => "edge",
            StateKind::Bulk => "bulk",
        }
    }
}

/// Decides whether the open wire at λ is probed through its edge state or,
/// in the trivial phase, through the top of its lower band.
pub fn reference_kind(family: &ModelFamily, lambda: f64, l: usize) -> Result<StateKind> {
    if let Some(topological) = family.in_topological_phase(lambda) {
        return Ok(if topological { StateKind::Edge } else { StateKind::Bulk });
    }
    let h = family.dense(lambda, l)?;
    match extract_edge_state(&h, family.orbitals()) {
        Ok(s) if s.left_weight >= 0.5 => Ok(StateKind::Edge),
        Ok(_) => Ok(StateKind::Bulk),
        Err(Error::NoGapIsolation) => Ok(StateKind::Bulk),
        Err(e) => Err(e),
    }
}

fn wire_or_none(family: &ModelFamily, lambda: f64, l: usize) -> Result<Option<BlockHamiltonian1D>> {
    match family {
        ModelFamily::Custom(_) => Ok(None),
        _ => family.wire(lambda, l).map(Some),
    }
}

/// The state of the requested kind, in full (site, orbital) coordinates.
pub fn select_state(family: &ModelFamily, kind: StateKind, lambda: f64, l: usize) -> Result<PureState> {
    let wire = wire_or_none(family, lambda, l)?;
    let h = match &wire {
        Some(w) => w.assemble_dense(),
        None => family.dense(lambda, l)?,
    };
    let state = match kind {
        StateKind::Edge => extract_edge_state(&h, family.orbitals())?.state,
        StateKind::Bulk => extract_bulk_state(&h)?,
    };
    match wire {
        Some(w) if !w.decoupled.is_empty() => PureState::new(w.embed(state.amplitudes())?),
        _ => Ok(state),
    }
}

/// Fisher information of a numerically selected edge (or bulk) state.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericEdgeInfo {
    pub kind: StateKind,
    pub qfi: f64,
    pub cfi_position: f64,
}

pub fn numeric_edge_information(family: &ModelFamily, lambda: f64, l: usize, h: f64) -> Result<NumericEdgeInfo> {
    let kind = reference_kind(family, lambda, l)?;
    let sd = numerical_state_derivative(|x| select_state(family, kind, x, l), lambda, h)?;
    let qfi = qfi_pure(&sd)?;
    let cfi_position = cfi(&position_probabilities(&sd, family.orbitals())?)?;
    Ok(NumericEdgeInfo { kind, qfi, cfi_position })
}
