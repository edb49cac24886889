//! Interactions: catalogs of Hermitian terms on finite supports, their
//! weighted norms, surfaces and boundaries, and assembly of local
//! Hamiltonians. Includes the nearest-neighbor Heisenberg presets used by
//! the experiments.

use crate::error::{Error, Result};
use crate::lsm::TwistSpec;
use crate::metric::{Geometry, Site, SiteSpace};
use crate::tensor;
use ndarray::Array2;
use ndarray_linalg::{c64, EigValsh, UPLO};
use serde::{Deserialize, Serialize};

const HERMITICITY_TOL: f64 = 1e-12;

/// Spin component matrices `(S^1, S^2, S^3)` for spin `S = two_s / 2`, in the
/// basis `|m = S>, |m = S-1>, ..., |m = -S>`.
pub fn spin_matrices(two_s: u32) -> [Array2<c64>; 3] {
    let d = two_s as usize + 1;
    let s = two_s as f64 / 2.0;
    let m_of = |k: usize| s - k as f64;
    let mut sz = Array2::<c64>::zeros((d, d));
    let mut sp = Array2::<c64>::zeros((d, d));
    for k in 0..d {
        sz[[k, k]] = c64::new(m_of(k), 0.0);
        if k > 0 {
            // raising: S+ |m> = sqrt(S(S+1) - m(m+1)) |m+1>
            let m = m_of(k);
            sp[[k - 1, k]] = c64::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
    }
    let sm = adjoint(&sp);
    let sx = (&sp + &sm) * c64::new(0.5, 0.0);
    let sy = (&sp - &sm) * c64::new(0.0, -0.5);
    [sx, sy, sz]
}

pub(crate) fn adjoint(a: &Array2<c64>) -> Array2<c64> {
    a.t().mapv(|v| v.conj())
}

pub(crate) fn max_abs_entry(a: &Array2<c64>) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.norm()))
}

pub(crate) fn hermiticity_deviation(a: &Array2<c64>) -> f64 {
    let mut dev = 0.0f64;
    for i in 0..a.nrows() {
        for j in i..a.ncols() {
            dev = dev.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    dev
}

/// One interaction term: a Hermitian block on a finite support.
#[derive(Debug, Clone)]
pub struct Term {
    support: Vec<Site>,
    block: Array2<c64>,
    norm: f64,
}

impl Term {
    /// Sites the block acts on, ascending.
    pub fn support(&self) -> &[Site] {
        &self.support
    }

    pub fn block(&self) -> &Array2<c64> {
        &self.block
    }

    /// Operator norm of the block (largest |eigenvalue|; blocks are Hermitian).
    pub fn norm(&self) -> f64 {
        self.norm
    }

    fn crosses(&self, in_x: &[bool]) -> bool {
        let mut inside = false;
        let mut outside = false;
        for &s in &self.support {
            if in_x[s] {
                inside = true;
            } else {
                outside = true;
            }
        }
        inside && outside
    }

    fn contains(&self, x: Site) -> bool {
        self.support.binary_search(&x).is_ok()
    }
}

/// An interaction: a finite list of Hermitian terms on supports inside a
/// fixed site space. Terms with identical support are allowed and simply
/// sum on assembly.
#[derive(Debug, Clone)]
pub struct Interaction {
    terms: Vec<Term>,
}

impl Interaction {
    pub fn empty() -> Self {
        Interaction { terms: Vec::new() }
    }

    /// Validates supports against the space and Hermiticity of every block
    /// (tolerance 1e-12 in max-entry norm).
    pub fn new(space: &SiteSpace, terms: Vec<(Vec<Site>, Array2<c64>)>) -> Result<Self> {
        let mut out = Vec::with_capacity(terms.len());
        for (support, block) in terms {
            if support.is_empty() {
                return Err(Error::EmptySet("interaction term support"));
            }
            let mut sorted = support.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != support.len() {
                return Err(Error::Config(format!(
                    "term support {support:?} has repeated sites"
                )));
            }
            if *sorted.last().unwrap() >= space.len() {
                return Err(Error::Config(format!(
                    "term support {support:?} leaves the space of {} sites",
                    space.len()
                )));
            }
            let want: usize = sorted.iter().map(|&s| space.local_dim(s)).product();
            if block.nrows() != want || block.ncols() != want {
                return Err(Error::DimensionMismatch {
                    left: block.nrows(),
                    right: want,
                });
            }
            let dev = hermiticity_deviation(&block);
            if dev > HERMITICITY_TOL * (1.0 + max_abs_entry(&block)) {
                return Err(Error::NotHermitian { deviation: dev });
            }
            let evals = block.eigvalsh(UPLO::Lower)?;
            let norm = evals.iter().fold(0.0f64, |m, &e| m.max(e.abs()));
            out.push(Term {
                support: sorted,
                block,
                norm,
            });
        }
        Ok(Interaction { terms: out })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// `sup_{x,y} sum_{terms containing x and y} |Phi(X)| / F_a(d(x,y))`.
pub fn interaction_norm_a(
    phi: &Interaction,
    space: &SiteSpace,
    profile: &crate::metric::DecayProfile,
) -> Result<f64> {
    let n = space.len();
    let mut sup = 0.0f64;
    for x in 0..n {
        for y in 0..n {
            let mut sum = 0.0;
            for term in &phi.terms {
                if term.contains(x) && term.contains(y) {
                    sum += term.norm;
                }
            }
            if sum == 0.0 {
                continue;
            }
            let f = profile.eval(space.distance(x, y));
            if f <= 0.0 {
                return Err(Error::DivisionByZeroProfile {
                    distance: space.distance(x, y),
                });
            }
            sup = sup.max(sum / f);
        }
    }
    Ok(sup)
}

fn membership(space_len: usize, x_set: &[Site]) -> Vec<bool> {
    let mut in_x = vec![false; space_len];
    for &s in x_set {
        in_x[s] = true;
    }
    in_x
}

/// Indices of the terms whose support crosses the surface of `x_set`:
/// nonempty intersection with both the set and its complement.
pub fn surface_sets(phi: &Interaction, space: &SiteSpace, x_set: &[Site]) -> Vec<usize> {
    let in_x = membership(space.len(), x_set);
    phi.terms
        .iter()
        .enumerate()
        .filter(|(_, t)| t.crosses(&in_x))
        .map(|(i, _)| i)
        .collect()
}

/// Surface-restricted local norm: 0 when `x` lies outside `x_set`, otherwise
/// `sup_y sum_{Z in S(X): x,y in Z} |Phi(Z)| / F_a(d(x,y))`.
pub fn local_surface_norm(
    phi: &Interaction,
    space: &SiteSpace,
    profile: &crate::metric::DecayProfile,
    x: Site,
    x_set: &[Site],
) -> Result<f64> {
    if !x_set.contains(&x) {
        return Ok(0.0);
    }
    let surface = surface_sets(phi, space, x_set);
    let mut sup = 0.0f64;
    for y in 0..space.len() {
        let mut sum = 0.0;
        for &i in &surface {
            let t = &phi.terms[i];
            if t.contains(x) && t.contains(y) {
                sum += t.norm;
            }
        }
        if sum == 0.0 {
            continue;
        }
        let f = profile.eval(space.distance(x, y));
        if f <= 0.0 {
            return Err(Error::DivisionByZeroProfile {
                distance: space.distance(x, y),
            });
        }
        sup = sup.max(sum / f);
    }
    Ok(sup)
}

/// Sites of `x_set` touched by a nonzero term crossing its surface.
pub fn phi_boundary(phi: &Interaction, space: &SiteSpace, x_set: &[Site]) -> Vec<Site> {
    let in_x = membership(space.len(), x_set);
    let mut boundary: Vec<Site> = Vec::new();
    for t in &phi.terms {
        if t.norm > 0.0 && t.crosses(&in_x) {
            for &s in &t.support {
                if in_x[s] {
                    boundary.push(s);
                }
            }
        }
    }
    boundary.sort_unstable();
    boundary.dedup();
    boundary
}

/// Dense local Hamiltonian `H = sum_{support within volume} Phi(X)`, each
/// term embedded with identity elsewhere. `volume` must be ascending.
pub fn assemble_hamiltonian(
    phi: &Interaction,
    space: &SiteSpace,
    volume: &[Site],
    dense_cap: usize,
) -> Result<Array2<c64>> {
    let dims: Vec<usize> = volume.iter().map(|&s| space.local_dim(s)).collect();
    let dim: usize = dims.iter().product();
    if dim > dense_cap {
        return Err(Error::DimensionCap {
            dim,
            cap: dense_cap,
        });
    }
    let mut h = Array2::zeros((dim, dim));
    for term in &phi.terms {
        let Some(positions) = positions_in_volume(term.support(), volume) else {
            continue;
        };
        let split = tensor::split_index(&dims, &positions);
        tensor::add_embedded(&mut h, &term.block, &split);
    }
    Ok(h)
}

/// Positions of `support` sites inside the ascending `volume` list, or None
/// if any site is missing.
pub(crate) fn positions_in_volume(support: &[Site], volume: &[Site]) -> Option<Vec<usize>> {
    support
        .iter()
        .map(|s| volume.binary_search(s).ok())
        .collect()
}

/// Declarative spin model used by presets and configs: a geometry, the spin
/// magnitude (as 2S), couplings, and an optional twist.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpinModelSpec {
    pub geometry: Geometry,
    /// Twice the spin magnitude, so `two_s = 1` is spin-1/2.
    pub two_s: u32,
    /// Exchange coupling J multiplying every bond.
    pub coupling: f64,
    /// Staggered field h in `h sum_x (-1)^x S^3_x` (checkerboard sign).
    pub staggered_field: f64,
    /// Optional double twist; see [`TwistSpec`].
    pub twist: Option<TwistSpec>,
}

impl SpinModelSpec {
    pub fn local_dim(&self) -> usize {
        self.two_s as usize + 1
    }

    pub fn site_space(&self) -> Result<SiteSpace> {
        self.geometry.site_space(self.local_dim())
    }
}

/// The nearest-neighbor Heisenberg bond `J S_x . S_y` on two sites of equal
/// dimension, first site varying fastest.
pub fn heisenberg_bond(two_s: u32, coupling: f64) -> Array2<c64> {
    let d = two_s as usize + 1;
    let dims = [d, d];
    let spins = spin_matrices(two_s);
    let split0 = tensor::split_index(&dims, &[0]);
    let split1 = tensor::split_index(&dims, &[1]);
    let mut bond = Array2::zeros((d * d, d * d));
    for s in &spins {
        let a = tensor::embedded(s, &split0);
        let b = tensor::embedded(s, &split1);
        bond = bond + a.dot(&b);
    }
    bond * c64::new(coupling, 0.0)
}

/// Nearest-neighbor Heisenberg interaction on the spec's geometry: bond
/// terms `J S_x . S_y` on every unit edge (horizontal wrap included for
/// periodic geometries) plus the staggered field as single-site terms when
/// `staggered_field != 0`.
pub fn heisenberg_preset(spec: &SpinModelSpec, space: &SiteSpace) -> Result<Interaction> {
    if matches!(spec.geometry, Geometry::Grid { .. }) {
        return Err(Error::UnsupportedGeometry(
            "heisenberg preset needs a path, ring, or horizontally periodic strip".into(),
        ));
    }
    let bond = heisenberg_bond(spec.two_s, spec.coupling);
    let mut terms: Vec<(Vec<Site>, Array2<c64>)> = Vec::new();
    for (x, y) in spec.geometry.edges() {
        // Supports are kept ascending; the bond block is symmetric under
        // swapping the two sites, so no reindexing is needed.
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        terms.push((vec![lo, hi], bond.clone()));
    }
    if spec.staggered_field != 0.0 {
        let sz = spin_matrices(spec.two_s)[2].clone();
        for s in 0..spec.geometry.site_count() {
            let (c, v) = spec.geometry.coords(s);
            let sign = if (c + v) % 2 == 0 { 1.0 } else { -1.0 };
            terms.push((vec![s], &sz * c64::new(sign * spec.staggered_field, 0.0)));
        }
    }
    Interaction::new(space, terms)
}
