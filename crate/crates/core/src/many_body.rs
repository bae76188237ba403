//! QFI of Slater-determinant ground states.
//!
//! Two independent routes are provided: the per-state sum
//! 4Σ⟨∂ψ_l|(1−P)|∂ψ_l⟩ and the gauge-free projector form 2Tr[(∂P)²]. The
//! first is the oracle, the second is used for open boundaries. Periodic
//! systems decompose into one two-band problem per momentum.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimation::{default_step, numerical_state_derivative, qfi_pure, PureState, StateDerivative};
use crate::linalg::{hermitian_eig, inner, operator_norm, spectral_projector, ComplexMatrix, C64};
use crate::models::{k_points, ModelFamily, Momentum};

/// Momenta whose gap falls below this are treated as Dirac points.
pub const GAP_FLOOR: f64 = 1e-12;
/// Idempotency slack for [`qfi_slater_projector`].
pub const PROJECTOR_TOL: f64 = 1e-8;

/// Orthonormal occupied orbitals and their projector.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupiedSubspace {
    pub states: Vec<Vec<C64>>,
    pub projector: ComplexMatrix,
}

impl OccupiedSubspace {
    pub fn from_states(states: Vec<Vec<C64>>) -> Result<Self> {
        let dim = states.first().map(Vec::len).ok_or(Error::InvalidOccupation { n_occ: 0, dim: 0 })?;
        if states.iter().any(|s| s.len() != dim) {
            return Err(Error::DimensionMismatch("occupied states differ in length".into()));
        }
        if states.len() > dim {
            return Err(Error::InvalidOccupation { n_occ: states.len(), dim });
        }
        for (a, sa) in states.iter().enumerate() {
            for (b, sb) in states.iter().enumerate() {
                let expected = if a == b { 1.0 } else { 0.0 };
                if (inner(sa, sb) - expected).norm() > 1e-10 {
                    return Err(Error::InvalidParams("occupied states are not orthonormal".into()));
                }
            }
        }
        let projector = ComplexMatrix::from_fn(dim, dim, |i, j| states.iter().map(|s| s[i] * s[j].conj()).sum());
        Ok(Self { states, projector })
    }

    /// The `n_occ` lowest eigenstates of `h`.
    pub fn ground_state(h: &ComplexMatrix, n_occ: usize) -> Result<Self> {
        let eig = hermitian_eig(h)?;
        let projector = spectral_projector(&eig, n_occ)?;
        Ok(Self { states: (0..n_occ).map(|l| eig.vector(l)).collect(), projector })
    }

    pub fn dim(&self) -> usize {
        self.projector.rows()
    }

    pub fn filling(&self) -> f64 {
        self.states.len() as f64 / self.dim() as f64
    }
}

/// 4Σ_l ⟨∂ψ_l|(1−P)|∂ψ_l⟩.
pub fn qfi_slater_states(occ: &OccupiedSubspace, derivs: &[Vec<C64>]) -> Result<f64> {
    if derivs.len() != occ.states.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} derivatives for {} occupied states",
            derivs.len(),
            occ.states.len()
        )));
    }
    let mut total = 0.0;
    for d in derivs {
        if d.len() != occ.dim() {
            return Err(Error::DimensionMismatch("derivative has the wrong length".into()));
        }
        let pd = occ.projector.mul_vec(d)?;
        total += inner(d, d).re - inner(d, &pd).re;
    }
    Ok(4.0 * total.max(0.0))
}

fn projector_defect(p: &ComplexMatrix) -> Result<f64> {
    Ok(p.matmul(p)?.sub(p)?.max_abs().max(p.hermiticity_defect()))
}

/// 2Tr[(∂P)²] with ∂P from a central difference of two projectors.
pub fn qfi_slater_projector(p_minus: &ComplexMatrix, p_plus: &ComplexMatrix, h: f64) -> Result<f64> {
    if p_minus.rows() != p_plus.rows() || p_minus.cols() != p_plus.cols() || !p_minus.is_square() {
        return Err(Error::DimensionMismatch("projectors differ in shape".into()));
    }
    if h <= 0.0 {
        return Err(Error::InvalidParams(format!("step {h} must be positive")));
    }
    for p in [p_minus, p_plus] {
        let defect = projector_defect(p)?;
        if defect > PROJECTOR_TOL {
            return Err(Error::NotAProjector(defect));
        }
    }
    let dp = p_plus.sub(p_minus)?;
    let sum: f64 = dp.as_slice().iter().map(|z| z.norm_sqr()).sum();
    Ok(2.0 * sum / (4.0 * h * h))
}

/// The PBC momentum grid with its Dirac-point exclusions.
#[derive(Clone, Debug, PartialEq)]
pub struct KGrid {
    pub points: Vec<Momentum>,
    /// Indices into `points` whose gap fell below the floor.
    pub excluded: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PbcSum {
    pub total: f64,
    /// F_{|u_k⟩} in grid order; zero at excluded momenta.
    pub per_k: Vec<f64>,
    pub grid: KGrid,
}

fn lower_band(h: &ComplexMatrix) -> Result<(Vec<C64>, f64)> {
    let eig = hermitian_eig(h)?;
    Ok((eig.vector(0), eig.eigenvalues[1] - eig.eigenvalues[0]))
}

/// F_{|u_k⟩} of the lower band at one momentum, by gauge-fixed central difference.
pub fn lower_band_qfi(family: &ModelFamily, lambda: f64, k: Momentum) -> Result<f64> {
    let select = |x: f64| -> Result<PureState> { PureState::new(lower_band(&family.bloch(x, k)?)?.0) };
    qfi_pure(&numerical_state_derivative(select, lambda, default_step(lambda))?)
}

/// Σ_k F_{|u_k⟩} over the L (or L×L) grid, skipping momenta whose gap is
/// below `gap_floor`. Terms are summed in grid order.
pub fn qfi_pbc_sum(family: &ModelFamily, lambda: f64, l: usize, gap_floor: f64) -> Result<PbcSum> {
    let points = family.k_grid(l)?;
    let per_point: Vec<Result<Option<f64>>> = points
        .par_iter()
        .map(|&k| {
            let (_, gap) = lower_band(&family.bloch(lambda, k)?)?;
            if gap < gap_floor {
                return Ok(None);
            }
            lower_band_qfi(family, lambda, k).map(Some)
        })
        .collect();
    let mut per_k = Vec::with_capacity(points.len());
    let mut excluded = Vec::new();
    for (i, r) in per_point.into_iter().enumerate() {
        match r? {
            Some(f) => per_k.push(f),
            None => {
                excluded.push(i);
                per_k.push(0.0);
            }
        }
    }
    if excluded.len() == points.len() {
        return Err(Error::AllExcluded);
    }
    let total = per_k.iter().sum();
    Ok(PbcSum { total, per_k, grid: KGrid { points, excluded } })
}

/// (L² − 3L + 2)/12, the critical SSH ring.
pub fn ssh_tpt_closed_form(l: usize) -> Result<f64> {
    if l % 2 == 1 {
        return Err(Error::OddL(l));
    }
    if l < 2 {
        return Err(Error::InvalidSize(format!("L = {l}")));
    }
    let lf = l as f64;
    Ok((lf * lf - 3.0 * lf + 2.0) / 12.0)
}

/// QFI per site of the SSH ring as L → ∞.
pub fn ssh_continuum_limit(lambda: f64) -> Result<f64> {
    if (lambda - 1.0).abs() < 1e-9 {
        return Err(Error::AtCriticality(lambda));
    }
    if lambda < 0.0 {
        return Err(Error::InvalidParams(format!("lambda = {lambda} must be non-negative")));
    }
    let l2 = lambda * lambda;
    Ok(if lambda < 1.0 { 1.0 / (2.0 * (1.0 - l2)) } else { 1.0 / (2.0 * (l2 * l2 - l2)) })
}

/// Σ_{k ≠ Dirac} (B_x² + B_y²)/(4E⁴) at m_z = −4t₂ on the L×L grid, with
/// E² = |B|².
///
/// The lower-band QFI of B·σ is t₂²(B_x² + B_y²)/E⁴, so [`qfi_pbc_sum`]
/// returns 4·this value at t₂ = 1.
pub fn chern_tpt_sum(l: usize, t1: f64, t2: f64) -> Result<f64> {
    if l < 2 {
        return Err(Error::InvalidSize(format!("L = {l}")));
    }
    if t2 == 0.0 {
        return Err(Error::InvalidParams("t2 must be nonzero".into()));
    }
    let field = crate::models::chern_bloch(-4.0, t1, t2)?;
    let ks = k_points(l);
    let mut total = 0.0;
    for &kx in &ks {
        for &ky in &ks {
            let [bx, by, bz] = field.b(kx, ky);
            let transverse = bx * bx + by * by;
            let e2 = transverse + bz * bz;
            if 2.0 * e2.sqrt() < GAP_FLOOR {
                continue;
            }
            total += transverse / (4.0 * e2 * e2);
        }
    }
    Ok(total)
}

/// 4‖∂H‖²/ΔE².
pub fn qfi_mode_upper_bound(dh_norm: f64, gap: f64) -> Result<f64> {
    if gap.is_nan() || gap <= 0.0 {
        return Err(Error::GaplessInput(gap));
    }
    Ok(4.0 * dh_norm * dh_norm / (gap * gap))
}

/// Per-momentum QFI and its bound for a gapped Bloch family.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeBound {
    pub k: Momentum,
    pub qfi: f64,
    pub bound: f64,
}

pub fn mode_bounds(family: &ModelFamily, lambda: f64, l: usize) -> Result<Vec<ModeBound>> {
    family
        .k_grid(l)?
        .into_par_iter()
        .map(|k| {
            let (_, gap) = lower_band(&family.bloch(lambda, k)?)?;
            let dh = operator_norm(&family.bloch_derivative(lambda, k)?)?;
            Ok(ModeBound { k, qfi: lower_band_qfi(family, lambda, k)?, bound: qfi_mode_upper_bound(dh, gap)? })
        })
        .collect()
}

/// Lower-band QFI of αkσ_x + (λ−λ_c)σ_z at one k, from the exact
/// eigenvector (−sin γ/2, cos γ/2) with γ = atan2(αk, λ−λ_c).
pub fn band_inversion_mode_qfi(k: f64, alpha: f64, lambda: f64, lambda_c: f64) -> Result<f64> {
    if alpha == 0.0 {
        return Err(Error::InvalidParams("alpha must be nonzero".into()));
    }
    let a = alpha * k;
    let delta = lambda - lambda_c;
    if a == 0.0 {
        // The k = 0 state is λ-independent on either side of λ_c.
        return Ok(0.0);
    }
    let gamma = a.atan2(delta);
    let dgamma = -a / (a * a + delta * delta);
    let (s, c) = (gamma / 2.0).sin_cos();
    let u = vec![C64::new(-s, 0.0), C64::new(c, 0.0)];
    let du = vec![C64::new(-c * dgamma / 2.0, 0.0), C64::new(-s * dgamma / 2.0, 0.0)];
    qfi_pure(&StateDerivative::analytic(PureState::new(u)?, du)?)
}

/// F_{k=0} + F_{k=k₁} for the two modes nearest the band touching, with
/// k₁ = 1/L (α carries the 2π of the lattice momentum 2π/L).
pub fn band_inversion_lowest_modes(l: usize, alpha: f64, lambda: f64, lambda_c: f64) -> Result<f64> {
    if l == 0 {
        return Err(Error::InvalidSize("L must be positive".into()));
    }
    Ok(band_inversion_mode_qfi(0.0, alpha, lambda, lambda_c)?
        + band_inversion_mode_qfi(1.0 / l as f64, alpha, lambda, lambda_c)?)
}

/// Half-filled ground-state projector of an open wire.
fn half_filled_projector(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h)?;
    spectral_projector(&eig, eig.dim() / 2)
}

/// Many-body QFI with open boundaries via the projector route: the plain
/// SSH chain, or the sum over k_x of Chern strip wires, each half filled.
pub fn qfi_obc_projector(family: &ModelFamily, lambda: f64, l: usize, h: f64) -> Result<f64> {
    let minus = family.obc_wires(lambda - h, l)?;
    let plus = family.obc_wires(lambda + h, l)?;
    let terms: Vec<Result<f64>> = minus
        .par_iter()
        .zip(plus.par_iter())
        .map(|(wm, wp)| {
            let pm = half_filled_projector(&wm.assemble_dense())?;
            let pp = half_filled_projector(&wp.assemble_dense())?;
            qfi_slater_projector(&pm, &pp, h)
        })
        .collect();
    terms.into_iter().sum()
}

/// Plane-wave orbital e^{ikj}u/√L on a ring of `l` two-orbital cells.
pub fn bloch_orbital(u: &[C64], k: f64, l: usize) -> Vec<C64> {
    let scale = 1.0 / (l as f64).sqrt();
    (0..l)
        .flat_map(|j| {
            let phase = C64::from_polar(scale, k * j as f64);
            u.iter().map(move |&x| phase * x)
        })
        .collect()
}

/// Occupied SSH ring orbitals at λ, one per momentum, with the Dirac-point
/// orbital held at its λ = 1 value (so it carries no λ-dependence).
pub fn ssh_ring_lower_band(lambda: f64, l: usize) -> Result<Vec<Vec<C64>>> {
    k_points(l)
        .into_iter()
        .map(|k| {
            let hk = crate::models::ssh_bloch(lambda, k);
            let u = if (k - PI).abs() < 1e-12 {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                vec![C64::new(s, 0.0), C64::new(s, 0.0)]
            } else {
                lower_band(&hk)?.0
            };
            Ok(bloch_orbital(&u, k, l))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;
    use crate::models::{build_ssh_periodic, ssh_bloch};
    use proptest::prelude::*;

    fn ring_projector(lambda: f64, l: usize) -> ComplexMatrix {
        OccupiedSubspace::from_states(ssh_ring_lower_band(lambda, l).unwrap()).unwrap().projector
    }

    #[test]
    fn slater_states_trivial() {
        let occ = OccupiedSubspace::ground_state(&ComplexMatrix::pauli_z(), 1).unwrap();
        assert_eq!(qfi_slater_states(&occ, &[vec![ZERO; 2]]).unwrap(), 0.0);
        assert!(matches!(qfi_slater_states(&occ, &[]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn single_state_matches_pure_qfi() {
        let psi = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let d = vec![C64::new(0.1, 0.3), C64::new(-0.2, 0.05)];
        let occ = OccupiedSubspace::from_states(vec![psi.clone()]).unwrap();
        let a = qfi_slater_states(&occ, std::slice::from_ref(&d)).unwrap();
        let b = qfi_pure(&StateDerivative::analytic(PureState::new(psi).unwrap(), d).unwrap()).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn critical_ring_from_bloch_orbitals() {
        // Occupied plane waves with gauge-fixed derivatives of u_k.
        let (lambda, l) = (1.0, 4);
        let states = ssh_ring_lower_band(lambda, l).unwrap();
        let occ = OccupiedSubspace::from_states(states).unwrap();
        let h = 1e-5;
        let derivs: Vec<Vec<C64>> = k_points(l)
            .into_iter()
            .map(|k| {
                if (k - PI).abs() < 1e-12 {
                    return vec![ZERO; 2 * l];
                }
                let sel = |x: f64| PureState::new(lower_band(&ssh_bloch(x, k))?.0);
                let sd = numerical_state_derivative(sel, lambda, h).unwrap();
                bloch_orbital(&sd.derivative, k, l)
            })
            .collect();
        let f = qfi_slater_states(&occ, &derivs).unwrap();
        assert!((f - 0.5).abs() < 1e-8, "{f}");
    }

    #[test]
    fn projector_route_examples() {
        let p = ring_projector(0.7, 6);
        assert_eq!(qfi_slater_projector(&p, &p, 1e-5).unwrap(), 0.0);
        let h = 1e-5;
        let f = qfi_slater_projector(&ring_projector(1.0 - h, 6), &ring_projector(1.0 + h, 6), h).unwrap();
        assert!((f / (5.0 / 3.0) - 1.0).abs() < 1e-6, "{f}");
        let not_p = ComplexMatrix::identity(12).scale(C64::new(0.5, 0.0));
        assert!(matches!(qfi_slater_projector(&not_p, &not_p, h), Err(Error::NotAProjector(_))));
    }

    #[test]
    fn projector_ignores_rotations_within_occupied_space() {
        let states = ssh_ring_lower_band(0.6, 4).unwrap();
        let p = OccupiedSubspace::from_states(states.clone()).unwrap().projector;
        // A 2×2 rotation mixing two occupied orbitals.
        let (c, s) = (0.3f64.cos(), C64::from_polar(0.3f64.sin(), 1.1));
        let mut rotated = states.clone();
        rotated[0] = states[0].iter().zip(&states[1]).map(|(a, b)| a * c + b * s).collect();
        rotated[1] = states[0].iter().zip(&states[1]).map(|(a, b)| -a * s.conj() + b * c).collect();
        let q = OccupiedSubspace::from_states(rotated).unwrap().projector;
        assert!(p.sub(&q).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn periodic_dense_projector_is_clean() {
        let h = build_ssh_periodic(0.5, 4).unwrap().assemble_dense();
        let occ = OccupiedSubspace::ground_state(&h, 4).unwrap();
        assert!((occ.projector.trace().re - 4.0).abs() < 1e-10);
        assert!(projector_defect(&occ.projector).unwrap() <= 1e-12);
        assert_eq!(occ.filling(), 0.5);
    }

    #[test]
    fn pbc_sum_matches_closed_forms() {
        let f = qfi_pbc_sum(&ModelFamily::ssh(), 1.0, 8, GAP_FLOOR).unwrap();
        assert!((f.total / 3.5 - 1.0).abs() < 1e-6);
        assert_eq!(f.grid.excluded, vec![4]);
        for l in (2..=128).step_by(2) {
            let f = qfi_pbc_sum(&ModelFamily::ssh(), 1.0, l, GAP_FLOOR).unwrap().total;
            let exact = ssh_tpt_closed_form(l).unwrap();
            assert!((f - exact).abs() <= 1e-6 * exact.max(1e-6), "L={l}: {f} vs {exact}");
        }
    }

    #[test]
    fn chern_pbc_is_four_times_critical_sum() {
        let f = qfi_pbc_sum(&ModelFamily::chern_bloch(), -4.0, 32, GAP_FLOOR).unwrap();
        assert_eq!(f.grid.excluded.len(), 1);
        let sum = chern_tpt_sum(32, 1.0, 1.0).unwrap();
        assert!((f.total / (4.0 * sum) - 1.0).abs() < 1e-6, "{} vs {}", f.total, sum);
    }

    #[test]
    fn all_gapless_is_an_error() {
        let flat = ModelFamily::chern_bloch();
        let zero_t1 = ModelFamily::ChernBloch { t1: 0.0, t2: 1.0 };
        assert!(qfi_pbc_sum(&flat, -4.0, 4, GAP_FLOOR).is_ok());
        // Gap floor above every gap.
        assert_eq!(qfi_pbc_sum(&zero_t1, -4.0, 4, 1e6), Err(Error::AllExcluded));
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(ssh_tpt_closed_form(4).unwrap(), 0.5);
        assert_eq!(ssh_tpt_closed_form(2).unwrap(), 0.0);
        assert_eq!(ssh_tpt_closed_form(64).unwrap(), 325.5);
        assert_eq!(ssh_tpt_closed_form(7), Err(Error::OddL(7)));
        assert_eq!(ssh_continuum_limit(0.0).unwrap(), 0.5);
        assert!((ssh_continuum_limit(2.0).unwrap() - 1.0 / 24.0).abs() < 1e-16);
        assert!((ssh_continuum_limit(0.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(ssh_continuum_limit(1.0), Err(Error::AtCriticality(_))));
    }

    #[test]
    fn tan_and_cot_sums_agree() {
        for l in (4..=64).step_by(2) {
            let lf = l as f64;
            let tan: f64 = (0..l).filter(|&k| 2 * k != l).map(|k| (PI * k as f64 / lf).tan().powi(2) / 4.0).sum();
            let cot: f64 = (1..l).map(|k| (PI * k as f64 / lf).tan().powi(-2) / 4.0).sum();
            let exact = ssh_tpt_closed_form(l).unwrap();
            assert!((tan - exact).abs() < 1e-9 * exact.max(1.0), "L={l}");
            assert!((cot - exact).abs() < 1e-9 * exact.max(1.0), "L={l}");
        }
    }

    #[test]
    fn chern_sum_examples() {
        assert_eq!(chern_tpt_sum(16, 0.0, 1.0).unwrap(), 0.0);
        let ks = k_points(4);
        let mut brute = 0.0;
        for &kx in &ks {
            for &ky in &ks {
                let bx = 2.0 * kx.cos();
                let by = 2.0 * ky.cos();
                let bz = -4.0 + 2.0 * (kx.sin() + ky.sin());
                let e2 = bx * bx + by * by + bz * bz;
                if e2 > 1e-20 {
                    brute += (bx * bx + by * by) / (4.0 * e2 * e2);
                }
            }
        }
        assert!((chern_tpt_sum(4, 1.0, 1.0).unwrap() - brute).abs() < 1e-14);
    }

    #[test]
    fn mode_bound_examples() {
        assert_eq!(qfi_mode_upper_bound(1.0, 2.0).unwrap(), 1.0);
        assert!(matches!(qfi_mode_upper_bound(1.0, 0.0), Err(Error::GaplessInput(_))));
        for lambda in [0.5, 2.0] {
            let modes = mode_bounds(&ModelFamily::ssh(), lambda, 256).unwrap();
            assert!(modes.iter().all(|m| m.qfi <= m.bound * (1.0 + 1e-9)));
            let gap = 2.0 * (1.0f64 - lambda).abs();
            assert!(modes.iter().all(|m| m.qfi <= 4.0 / (gap * gap) + 1e-9));
        }
    }

    #[test]
    fn band_inversion_examples() {
        assert!((band_inversion_lowest_modes(10, 1.0, 0.3, 0.3).unwrap() / 100.0 - 1.0).abs() < 1e-12);
        assert_eq!(band_inversion_mode_qfi(0.0, 1.0, 0.3, 0.3).unwrap(), 0.0);
        // Lattice momentum 2π/L gives L²/(4π²α²).
        let l = 50.0;
        let f = band_inversion_mode_qfi(2.0 * PI / l, 1.0, 0.0, 0.0).unwrap();
        assert!((f / (l * l / (4.0 * PI * PI)) - 1.0).abs() < 1e-12);
        // Off-critical: a²/(a² + δ²)² → 0 like 1/L².
        let f1 = band_inversion_lowest_modes(1000, 1.0, 1.0, 0.0).unwrap();
        let f2 = band_inversion_lowest_modes(2000, 1.0, 1.0, 0.0).unwrap();
        assert!((f1 / f2 - 4.0).abs() < 1e-3);
        assert!(band_inversion_lowest_modes(10, 0.0, 0.0, 0.0).is_err());
        // The explicit 2×2 Hamiltonian route agrees.
        let fam = ModelFamily::band_inversion(1.3, 0.2);
        let numeric = lower_band_qfi(&fam, 0.5, Momentum::One(0.4)).unwrap();
        let exact = band_inversion_mode_qfi(0.4, 1.3, 0.5, 0.2).unwrap();
        assert!((numeric / exact - 1.0).abs() < 1e-8);
    }

    #[test]
    fn obc_and_pbc_share_scaling_at_criticality() {
        let fam = ModelFamily::ssh();
        let a = qfi_obc_projector(&fam, 1.0, 32, 1e-5).unwrap();
        let b = qfi_obc_projector(&fam, 1.0, 64, 1e-5).unwrap();
        let ratio = b / a;
        assert!(ratio > 3.6 && ratio < 4.4, "{ratio}");
    }

    #[test]
    fn strip_sums_wires() {
        let fam = ModelFamily::chern_bloch();
        let total = qfi_obc_projector(&fam, -3.0, 8, 1e-5).unwrap();
        let by_hand: f64 = k_points(8)
            .into_iter()
            .map(|kx| qfi_obc_projector(&ModelFamily::ChernWire { kx, t1: 1.0, t2: 1.0 }, -3.0, 8, 1e-5).unwrap())
            .sum();
        assert!((total - by_hand).abs() < 1e-9 * total);
    }

    fn random_hermitian(v: &[(f64, f64)], n: usize) -> ComplexMatrix {
        let m = ComplexMatrix::from_fn(n, n, |i, j| C64::new(v[i * n + j].0, v[i * n + j].1));
        m.add(&m.adjoint()).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn slater_routes_agree(n in 2usize..=12, frac in 0.1f64..0.9,
                               a in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 144),
                               b in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 144)) {
            let n_occ = ((n as f64 * frac) as usize).clamp(1, n - 1);
            let ha = random_hermitian(&a, n);
            let hb = random_hermitian(&b, n);
            let h_of = |x: f64| ha.add(&hb.scale(C64::new(x, 0.0))).unwrap();
            let eig = hermitian_eig(&h_of(0.0)).unwrap();
            let min_gap = eig.eigenvalues.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            prop_assume!(min_gap > 1e-2);
            let h = 1e-5;
            let derivs: Vec<Vec<C64>> = (0..n_occ)
                .map(|i| {
                    let sel = |x: f64| PureState::new(hermitian_eig(&h_of(x))?.vector(i));
                    numerical_state_derivative(sel, 0.0, h).unwrap().derivative
                })
                .collect();
            let occ = OccupiedSubspace::ground_state(&h_of(0.0), n_occ).unwrap();
            let f_states = qfi_slater_states(&occ, &derivs).unwrap();
            let pm = OccupiedSubspace::ground_state(&h_of(-h), n_occ).unwrap().projector;
            let pp = OccupiedSubspace::ground_state(&h_of(h), n_occ).unwrap().projector;
            let f_proj = qfi_slater_projector(&pm, &pp, h).unwrap();
            prop_assert!((f_states - f_proj).abs() <= 1e-6 * f_states.max(1e-3), "{} vs {}", f_states, f_proj);
        }
    }
}
