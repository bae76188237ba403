//! Tight-binding Hamiltonians: the generic 1D block chain, the SSH chain,
//! the Chern insulator (Bloch form and virtual wires) and the band-inversion
//! toy model.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, I, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Open,
    Periodic,
}

/// A chain of `sites` unit cells with `orbitals` internal states each.
///
/// `hop_blocks[r]` is the block coupling cell `j` to cell `j + r`; the
/// reverse block is its adjoint. Orbitals listed in `decoupled` are removed
/// from the Hilbert space after assembly.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockHamiltonian1D {
    pub sites: usize,
    pub orbitals: usize,
    pub hop_blocks: Vec<ComplexMatrix>,
    pub boundary: Boundary,
    pub decoupled: Vec<(usize, usize)>,
}

impl BlockHamiltonian1D {
    pub fn new(
        sites: usize,
        hop_blocks: Vec<ComplexMatrix>,
        boundary: Boundary,
        decoupled: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let h0 = hop_blocks
            .first()
            .ok_or_else(|| Error::InvalidParams("at least the on-site block is required".into()))?;
        let d = h0.rows();
        if hop_blocks.iter().any(|b| b.rows() != d || b.cols() != d) {
            return Err(Error::ShapeMismatch("hopping blocks must all be d x d".into()));
        }
        if !h0.is_hermitian() {
            return Err(Error::NonHermitianInput {
                defect: h0.hermiticity_defect(),
                tolerance: crate::linalg::HERMITIAN_TOL * h0.max_abs(),
            });
        }
        if sites == 0 {
            return Err(Error::InvalidSize("a chain needs at least one site".into()));
        }
        if decoupled.iter().any(|&(j, m)| j >= sites || m >= d) {
            return Err(Error::InvalidParams("decoupled orbital outside the chain".into()));
        }
        let mut decoupled = decoupled;
        decoupled.sort_unstable();
        decoupled.dedup();
        Ok(Self { sites, orbitals: d, hop_blocks, boundary, decoupled })
    }

    pub fn full_dim(&self) -> usize {
        self.sites * self.orbitals
    }

    pub fn dim(&self) -> usize {
        self.full_dim() - self.decoupled.len()
    }

    /// Maps each full (site-major) index to its position in the reduced space.
    pub fn layout(&self) -> Vec<Option<usize>> {
        let mut next = 0;
        (0..self.full_dim())
            .map(|idx| {
                let key = (idx / self.orbitals, idx % self.orbitals);
                if self.decoupled.binary_search(&key).is_ok() {
                    None
                } else {
                    next += 1;
                    Some(next - 1)
                }
            })
            .collect()
    }

    /// Pads a reduced-space vector with zeros on the decoupled orbitals.
    pub fn embed(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim() {
            return Err(Error::ShapeMismatch(format!("expected {} amplitudes, got {}", self.dim(), v.len())));
        }
        Ok(self.layout().iter().map(|slot| slot.map_or(ZERO, |i| v[i])).collect())
    }

    /// Drops the decoupled orbitals from a full-space vector.
    pub fn restrict(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.full_dim() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} amplitudes, got {}",
                self.full_dim(),
                v.len()
            )));
        }
        Ok(self.layout().iter().zip(v).filter_map(|(slot, &z)| slot.map(|_| z)).collect())
    }

    fn assemble_full(&self) -> ComplexMatrix {
        let d = self.orbitals;
        let l = self.sites;
        let mut h = ComplexMatrix::zeros(l * d, l * d);
        for j in 0..l {
            for (r, block) in self.hop_blocks.iter().enumerate() {
                let target = match self.boundary {
                    Boundary::Open if j + r < l => j + r,
                    Boundary::Open => continue,
                    Boundary::Periodic => (j + r) % l,
                };
                for a in 0..d {
                    for b in 0..d {
                        let v = block[(a, b)];
                        if r == 0 {
                            h[(j * d + a, j * d + b)] += v;
                        } else {
                            h[(j * d + a, target * d + b)] += v;
                            h[(target * d + b, j * d + a)] += v.conj();
                        }
                    }
                }
            }
        }
        h
    }

    /// Dense Hermitian matrix on the reduced space.
    pub fn assemble_dense(&self) -> ComplexMatrix {
        let full = self.assemble_full();
        if self.decoupled.is_empty() {
            return full;
        }
        let kept: Vec<usize> =
            self.layout().iter().enumerate().filter_map(|(i, s)| s.map(|_| i)).collect();
        ComplexMatrix::from_fn(kept.len(), kept.len(), |a, b| full[(kept[a], kept[b])])
    }

    /// H_k = h_0 + Σ_r (e^{ikr} h_r + e^{−ikr} h_r†).
    pub fn bloch(&self, k: f64) -> ComplexMatrix {
        let mut hk = self.hop_blocks[0].clone();
        for (r, block) in self.hop_blocks.iter().enumerate().skip(1) {
            let phase = C64::from_polar(1.0, k * r as f64);
            let term = block.scale(phase).add(&block.adjoint().scale(phase.conj())).expect("same shape");
            hk = hk.add(&term).expect("same shape");
        }
        hk
    }
}

fn check_size(l: usize, min: usize) -> Result<()> {
    if l < min {
        return Err(Error::InvalidSize(format!("L = {l} is below the minimum {min}")));
    }
    Ok(())
}

fn ssh_blocks(lambda: f64, j2: f64) -> Vec<ComplexMatrix> {
    let h0 = ComplexMatrix::pauli_x().scale(C64::new(-lambda * j2, 0.0));
    // −(σx − iσy)/2: only the lower-left entry survives.
    let mut h1 = ComplexMatrix::zeros(2, 2);
    h1[(1, 0)] = C64::new(-j2, 0.0);
    vec![h0, h1]
}

/// SSH chain with J₂ = 1. The b orbital of the last cell can be removed so
/// that the left zero mode is exact.
pub fn build_ssh(lambda: f64, l: usize, decouple_last_b: bool) -> Result<BlockHamiltonian1D> {
    build_ssh_scaled(lambda, 1.0, l, Boundary::Open, decouple_last_b)
}

pub fn build_ssh_scaled(
    lambda: f64,
    j2: f64,
    l: usize,
    boundary: Boundary,
    decouple_last_b: bool,
) -> Result<BlockHamiltonian1D> {
    check_size(l, 2)?;
    let decoupled = if decouple_last_b { vec![(l - 1, 1)] } else { vec![] };
    BlockHamiltonian1D::new(l, ssh_blocks(lambda, j2), boundary, decoupled)
}

pub fn build_ssh_periodic(lambda: f64, l: usize) -> Result<BlockHamiltonian1D> {
    build_ssh_scaled(lambda, 1.0, l, Boundary::Periodic, false)
}

pub fn ssh_bloch(lambda: f64, k: f64) -> ComplexMatrix {
    let off = -(C64::new(lambda, 0.0) + C64::from_polar(1.0, -k));
    ComplexMatrix::from_row_major(2, 2, vec![ZERO, off, off.conj(), ZERO]).expect("2x2")
}

fn check_t2(t2: f64) -> Result<()> {
    if t2 == 0.0 {
        return Err(Error::InvalidParams("t2 must be nonzero".into()));
    }
    Ok(())
}

fn chern_wire_blocks(kx: f64, lambda: f64, t1: f64, t2: f64) -> Vec<ComplexMatrix> {
    let mz = lambda * t2;
    let h0 = ComplexMatrix::pauli_x()
        .scale(C64::new(2.0 * t1 * kx.cos(), 0.0))
        .add(&ComplexMatrix::pauli_z().scale(C64::new(mz + 2.0 * t2 * kx.sin(), 0.0)))
        .expect("2x2");
    let h1 = ComplexMatrix::pauli_y()
        .scale(C64::new(t1, 0.0))
        .add(&ComplexMatrix::pauli_z().scale(-I * t2))
        .expect("2x2");
    vec![h0, h1]
}

/// Virtual wire of the Chern insulator at fixed k_x, open along y.
pub fn build_chern_wire(kx: f64, lambda: f64, t1: f64, t2: f64, l2: usize) -> Result<BlockHamiltonian1D> {
    check_t2(t2)?;
    check_size(l2, 2)?;
    BlockHamiltonian1D::new(l2, chern_wire_blocks(kx, lambda, t1, t2), Boundary::Open, vec![])
}

/// k ↦ B(k), with H_k = B·σ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochField2D {
    pub lambda: f64,
    pub t1: f64,
    pub t2: f64,
}

impl BlochField2D {
    pub fn b(&self, kx: f64, ky: f64) -> [f64; 3] {
        [
            2.0 * self.t1 * kx.cos(),
            2.0 * self.t1 * ky.cos(),
            self.lambda * self.t2 + 2.0 * self.t2 * (kx.sin() + ky.sin()),
        ]
    }

    pub fn hamiltonian(&self, kx: f64, ky: f64) -> ComplexMatrix {
        pauli_vector(self.b(kx, ky))
    }

    pub fn gap(&self, kx: f64, ky: f64) -> f64 {
        let [x, y, z] = self.b(kx, ky);
        2.0 * (x * x + y * y + z * z).sqrt()
    }
}

pub fn pauli_vector([x, y, z]: [f64; 3]) -> ComplexMatrix {
    ComplexMatrix::from_row_major(
        2,
        2,
        vec![C64::new(z, 0.0), C64::new(x, -y), C64::new(x, y), C64::new(-z, 0.0)],
    )
    .expect("2x2")
}

pub fn chern_bloch(lambda: f64, t1: f64, t2: f64) -> Result<BlochField2D> {
    check_t2(t2)?;
    Ok(BlochField2D { lambda, t1, t2 })
}

/// H_k = αkσ_x + (λ − λ_c)σ_z.
pub fn band_inversion_bloch(k: f64, lambda: f64, alpha: f64, lambda_c: f64) -> Result<ComplexMatrix> {
    if alpha == 0.0 {
        return Err(Error::InvalidParams("alpha must be nonzero".into()));
    }
    Ok(pauli_vector([alpha * k, 0.0, lambda - lambda_c]))
}

/// A point of the Brillouin zone.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Momentum {
    One(f64),
    Two(f64, f64),
}

/// 2πκ/L for κ = 0..L−1.
pub fn k_points(l: usize) -> Vec<f64> {
    (0..l).map(|kappa| 2.0 * PI * kappa as f64 / l as f64).collect()
}

pub type CustomBuilder = Arc<dyn Fn(f64) -> Result<ComplexMatrix> + Send + Sync>;

/// A user-supplied λ ↦ dense Hamiltonian rule.
#[derive(Clone)]
pub struct CustomFamily {
    pub name: String,
    pub orbitals: usize,
    pub build: CustomBuilder,
}

impl fmt::Debug for CustomFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFamily").field("name", &self.name).field("orbitals", &self.orbitals).finish()
    }
}

/// Parameterised model with λ as the single scan variable.
#[derive(Clone, Debug)]
pub enum ModelFamily {
    Ssh { j2: f64 },
    ChernWire { kx: f64, t1: f64, t2: f64 },
    ChernBloch { t1: f64, t2: f64 },
    BandInversion { alpha: f64, lambda_c: f64 },
    Custom(CustomFamily),
}

pub const MODEL_IDS: [&str; 4] = ["ssh", "chern-wire", "chern-bloch", "band-inversion"];

impl ModelFamily {
    pub fn ssh() -> Self {
        ModelFamily::Ssh { j2: 1.0 }
    }

    pub fn chern_wire(kx: f64) -> Self {
        ModelFamily::ChernWire { kx, t1: 1.0, t2: 1.0 }
    }

    pub fn chern_bloch() -> Self {
        ModelFamily::ChernBloch { t1: 1.0, t2: 1.0 }
    }

    pub fn band_inversion(alpha: f64, lambda_c: f64) -> Self {
        ModelFamily::BandInversion { alpha, lambda_c }
    }

    pub fn custom(name: &str, orbitals: usize, build: impl Fn(f64) -> Result<ComplexMatrix> + Send + Sync + 'static) -> Self {
        ModelFamily::Custom(CustomFamily { name: name.into(), orbitals, build: Arc::new(build) })
    }

    pub fn id(&self) -> &str {
        match self {
            ModelFamily::Ssh { .. } => "ssh",
            ModelFamily::ChernWire { .. } => "chern-wire",
            ModelFamily::ChernBloch { .. } => "chern-bloch",
            ModelFamily::BandInversion { .. } => "band-inversion",
            ModelFamily::Custom(c) => &c.name,
        }
    }

    /// Builds a family from its identifier. Unknown keys in `params` are
    /// rejected; missing ones take their defaults (t₁ = t₂ = J₂ = α = 1,
    /// k_x = π/2, λ_c = 0).
    pub fn from_id(id: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let allowed: &[&str] = match id {
            "ssh" => &["j2"],
            "chern-wire" => &["kx", "t1", "t2"],
            "chern-bloch" => &["t1", "t2"],
            "band-inversion" => &["alpha", "lambda_c"],
            other => return Err(Error::InvalidConfig(format!("unknown model '{other}'"))),
        };
        if let Some(bad) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidConfig(format!("parameter '{bad}' does not apply to {id}")));
        }
        let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);
        let family = match id {
            "ssh" => ModelFamily::Ssh { j2: get("j2", 1.0) },
            "chern-wire" => ModelFamily::ChernWire { kx: get("kx", PI / 2.0), t1: get("t1", 1.0), t2: get("t2", 1.0) },
            "chern-bloch" => ModelFamily::ChernBloch { t1: get("t1", 1.0), t2: get("t2", 1.0) },
            _ => ModelFamily::BandInversion { alpha: get("alpha", 1.0), lambda_c: get("lambda_c", 0.0) },
        };
        family.validate()?;
        Ok(family)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelFamily::Ssh { j2 } if j2 == 0.0 || !j2.is_finite() => {
                Err(Error::InvalidParams("j2 must be finite and nonzero".into()))
            }
            ModelFamily::ChernWire { t2, .. } | ModelFamily::ChernBloch { t2, .. } => check_t2(t2),
            ModelFamily::BandInversion { alpha: 0.0, .. } => {
                Err(Error::InvalidParams("alpha must be nonzero".into()))
            }
            _ => Ok(()),
        }
    }

    /// Lattice dimension D.
    pub fn dimension(&self) -> usize {
        match self {
            ModelFamily::ChernBloch { .. } => 2,
            _ => 1,
        }
    }

    pub fn orbitals(&self) -> usize {
        match self {
            ModelFamily::Custom(c) => c.orbitals,
            _ => 2,
        }
    }

    /// Critical coupling where the relevant gap closes, if known.
    pub fn critical_lambda(&self) -> Option<f64> {
        match *self {
            ModelFamily::Ssh { .. } => Some(1.0),
            ModelFamily::ChernWire { .. } | ModelFamily::ChernBloch { .. } => Some(-4.0),
            ModelFamily::BandInversion { lambda_c, .. } => Some(lambda_c),
            ModelFamily::Custom(_) => None,
        }
    }

    /// The open chain used for edge-state work: SSH with the last b orbital
    /// removed, or the Chern wire at the family's k_x.
    pub fn wire(&self, lambda: f64, l: usize) -> Result<BlockHamiltonian1D> {
        match *self {
            ModelFamily::Ssh { j2 } => build_ssh_scaled(lambda, j2, l, Boundary::Open, true),
            ModelFamily::ChernWire { kx, t1, t2 } => build_chern_wire(kx, lambda, t1, t2, l),
            _ => Err(Error::InvalidConfig(format!("{} has no single open wire", self.id()))),
        }
    }

    /// Dense open-boundary Hamiltonian in the edge geometry.
    pub fn dense(&self, lambda: f64, l: usize) -> Result<ComplexMatrix> {
        match self {
            ModelFamily::Custom(c) => (c.build)(lambda),
            _ => Ok(self.wire(lambda, l)?.assemble_dense()),
        }
    }

    /// Open chains whose ground states are summed for the many-body OBC QFI:
    /// the plain SSH chain, or one Chern wire per k_x in strip geometry.
    pub fn obc_wires(&self, lambda: f64, l: usize) -> Result<Vec<BlockHamiltonian1D>> {
        match *self {
            ModelFamily::Ssh { j2 } => Ok(vec![build_ssh_scaled(lambda, j2, l, Boundary::Open, false)?]),
            ModelFamily::ChernWire { kx, t1, t2 } => Ok(vec![build_chern_wire(kx, lambda, t1, t2, l)?]),
            ModelFamily::ChernBloch { t1, t2 } => {
                k_points(l).into_iter().map(|kx| build_chern_wire(kx, lambda, t1, t2, l)).collect()
            }
            _ => Err(Error::InvalidConfig(format!("{} has no open-boundary geometry", self.id()))),
        }
    }

    /// The PBC momentum grid with L points per direction.
    pub fn k_grid(&self, l: usize) -> Result<Vec<Momentum>> {
        check_size(l, 2)?;
        let ks = k_points(l);
        Ok(match self {
            ModelFamily::ChernBloch { .. } => {
                ks.iter().flat_map(|&kx| ks.iter().map(move |&ky| Momentum::Two(kx, ky))).collect()
            }
            ModelFamily::BandInversion { .. } => {
                // Centred on k = 0 since the toy dispersion is not periodic.
                ks.iter().map(|&k| Momentum::One(if k >= PI { k - 2.0 * PI } else { k })).collect()
            }
            ModelFamily::Custom(_) => {
                return Err(Error::InvalidConfig("custom families have no Bloch form".into()))
            }
            _ => ks.into_iter().map(Momentum::One).collect(),
        })
    }

    pub fn bloch(&self, lambda: f64, k: Momentum) -> Result<ComplexMatrix> {
        match (self, k) {
            (ModelFamily::Ssh { j2 }, Momentum::One(k)) => Ok(ssh_bloch(lambda, k).scale(C64::new(*j2, 0.0))),
            (ModelFamily::ChernWire { kx, t1, t2 }, Momentum::One(ky)) => {
                Ok(chern_bloch(lambda, *t1, *t2)?.hamiltonian(*kx, ky))
            }
            (ModelFamily::ChernBloch { t1, t2 }, Momentum::Two(kx, ky)) => {
                Ok(chern_bloch(lambda, *t1, *t2)?.hamiltonian(kx, ky))
            }
            (ModelFamily::BandInversion { alpha, lambda_c }, Momentum::One(k)) => {
                band_inversion_bloch(k, lambda, *alpha, *lambda_c)
            }
            (ModelFamily::Custom(_), _) => Err(Error::InvalidConfig("custom families have no Bloch form".into())),
            _ => Err(Error::DimensionMismatch(format!("momentum {k:?} does not match {}", self.id()))),
        }
    }

    /// ∂_λ H_k; every built-in family is affine in λ.
    pub fn bloch_derivative(&self, _lambda: f64, k: Momentum) -> Result<ComplexMatrix> {
        let s = |x: f64| C64::new(x, 0.0);
        match (self, k) {
            (ModelFamily::Ssh { j2 }, Momentum::One(_)) => Ok(ComplexMatrix::pauli_x().scale(s(-j2))),
            (ModelFamily::ChernWire { t2, .. }, Momentum::One(_))
            | (ModelFamily::ChernBloch { t2, .. }, Momentum::Two(_, _)) => Ok(ComplexMatrix::pauli_z().scale(s(*t2))),
            (ModelFamily::BandInversion { .. }, Momentum::One(_)) => Ok(ComplexMatrix::pauli_z()),
            (ModelFamily::Custom(_), _) => Err(Error::InvalidConfig("custom families have no Bloch form".into())),
            _ => Err(Error::DimensionMismatch(format!("momentum {k:?} does not match {}", self.id()))),
        }
    }

    /// Whether the open wire at λ is expected to host a zero-energy edge
    /// state; `None` when the family gives no analytic answer.
    pub fn in_topological_phase(&self, lambda: f64) -> Option<bool> {
        match *self {
            ModelFamily::Ssh { .. } => Some(lambda.abs() < 1.0),
            ModelFamily::ChernWire { kx, t1, t2 } if (t1 * kx.cos()).abs() < 1e-12 => {
                Some((lambda * t2 + 2.0 * t2 * kx.sin()).abs() < 2.0 * t2.abs())
            }
            _ => None,
        }
    }
}

/// Orbital parity diag(+1, −1, +1, …) on the reduced SSH space.
pub fn sublattice_operator(h: &BlockHamiltonian1D) -> ComplexMatrix {
    let signs: Vec<f64> = h
        .layout()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_some())
        .map(|(i, _)| if i % h.orbitals == 0 { 1.0 } else { -1.0 })
        .collect();
    ComplexMatrix::from_real_diagonal(&signs)
}
