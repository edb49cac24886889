//! Dense finite-dimensional quantum mechanics: embeddings, spectral
//! decompositions, real and imaginary time Heisenberg evolution, operator
//! norms, and the partial-trace localization map.
//!
//! Magnetization-conserving models additionally get a sector-resolved fast
//! path (block assembly, lowest eigenvalues, block norms). The sector route
//! is self-validating: it is only taken when every term structurally
//! commutes with the total `S^3` key, and block norms re-check that the
//! operators they are handed actually vanish between sectors, falling back
//! to the dense path otherwise.

use crate::error::{Error, Result};
use crate::interaction::{
    adjoint, assemble_hamiltonian, hermiticity_deviation, max_abs_entry, positions_in_volume,
    Interaction,
};
use crate::metric::{Site, SiteSpace};
use crate::tensor;
use ndarray::{Array1, Array2};
use ndarray_linalg::{c64, Eigh, EigValsh, QRSquare, SVD, UPLO};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

const HERMITIAN_DECOMPOSE_TOL: f64 = 1e-10;
const RECONSTRUCTION_TOL: f64 = 1e-10;

/// A local matrix tagged with the sites it acts on (ascending order, first
/// site varying fastest inside the block).
#[derive(Debug, Clone)]
pub struct ObservableWithSupport {
    support: Vec<Site>,
    block: Array2<c64>,
}

impl ObservableWithSupport {
    pub fn new(space: &SiteSpace, support: Vec<Site>, block: Array2<c64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::EmptySet("observable support"));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) || *support.last().unwrap() >= space.len() {
            return Err(Error::Config(format!(
                "observable support {support:?} must be ascending within the space"
            )));
        }
        let want: usize = support.iter().map(|&s| space.local_dim(s)).product();
        if block.nrows() != want || block.ncols() != want {
            return Err(Error::DimensionMismatch {
                left: block.nrows(),
                right: want,
            });
        }
        Ok(ObservableWithSupport { support, block })
    }

    /// Single-site spin component (`axis` = 0, 1, 2 for `S^1, S^2, S^3`).
    pub fn spin_component(space: &SiteSpace, site: Site, axis: usize) -> Result<Self> {
        let two_s = (space.local_dim(site) - 1) as u32;
        let block = crate::interaction::spin_matrices(two_s)[axis].clone();
        ObservableWithSupport::new(space, vec![site], block)
    }

    pub fn support(&self) -> &[Site] {
        &self.support
    }

    pub fn block(&self) -> &Array2<c64> {
        &self.block
    }

    /// Operator norm; embedding with identity does not change it.
    pub fn norm(&self) -> f64 {
        operator_norm(&self.block)
    }
}

/// `A (x) identity` on the volume, under the fixed site-order convention.
pub fn embed_local(
    obs: &ObservableWithSupport,
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
    let positions =
        positions_in_volume(obs.support(), volume).ok_or(Error::SupportNotContained)?;
    let split = tensor::split_index(&dims, &positions);
    Ok(tensor::embedded(obs.block(), &split))
}

/// Eigendecomposition of a Hermitian operator, validated on construction:
/// ascending eigenvalues, unitary eigenvector matrix, and reconstruction of
/// the origin within 1e-10 relative max-entry error.
#[derive(Debug, Clone)]
pub struct SpectralData {
    eigenvalues: Array1<f64>,
    eigenvectors: Array2<c64>,
    origin: Array2<c64>,
}

pub fn spectral_decompose(h: &Array2<c64>) -> Result<SpectralData> {
    let dev = hermiticity_deviation(h);
    if dev > HERMITIAN_DECOMPOSE_TOL * (1.0 + max_abs_entry(h)) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let (eigenvalues, eigenvectors) = h.eigh(UPLO::Lower)?;
    let sd = SpectralData {
        eigenvalues,
        eigenvectors,
        origin: h.clone(),
    };
    let scale = 1.0 + max_abs_entry(h);
    let recon = sd.from_eigenbasis(&Array2::from_diag(
        &sd.eigenvalues.mapv(|e| c64::new(e, 0.0)),
    ));
    let err = max_abs_entry(&(&recon - h));
    if err > RECONSTRUCTION_TOL * scale {
        return Err(Error::Linalg(format!(
            "eigendecomposition reconstruction error {err:.3e} exceeds tolerance"
        )));
    }
    let gram = adjoint(&sd.eigenvectors).dot(&sd.eigenvectors);
    let uerr = max_abs_entry(&(&gram - &Array2::<c64>::eye(sd.dim())));
    if uerr > RECONSTRUCTION_TOL {
        return Err(Error::Linalg(format!(
            "eigenvector matrix is not unitary (deviation {uerr:.3e})"
        )));
    }
    Ok(sd)
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eigenvalues
    }

    /// Unitary matrix of eigenvector columns.
    pub fn eigenvectors(&self) -> &Array2<c64> {
        &self.eigenvectors
    }

    pub fn origin(&self) -> &Array2<c64> {
        &self.origin
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Ground eigenvector with the phase gauge fixed (largest-magnitude
    /// amplitude real positive).
    pub fn ground_state(&self) -> Array1<c64> {
        phase_fix_vector(&self.eigenvectors.column(0).to_owned())
    }

    /// `U^* A U`.
    pub fn to_eigenbasis(&self, a: &Array2<c64>) -> Array2<c64> {
        adjoint(&self.eigenvectors).dot(a).dot(&self.eigenvectors)
    }

    /// `U A U^*`.
    pub fn from_eigenbasis(&self, a: &Array2<c64>) -> Array2<c64> {
        self.eigenvectors
            .dot(a)
            .dot(&adjoint(&self.eigenvectors))
    }

    /// Precompute `U^* A U` so repeated evolutions of the same observable
    /// cost two matrix products each instead of four.
    pub fn conjugate(&self, a: &Array2<c64>) -> Result<Conjugated> {
        if a.nrows() != self.dim() || a.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: a.nrows(),
                right: self.dim(),
            });
        }
        Ok(Conjugated {
            w: self.to_eigenbasis(a),
        })
    }

    /// Real-time Heisenberg evolution of a precomputed conjugate.
    pub fn evolve_conjugated(&self, c: &Conjugated, t: f64) -> Array2<c64> {
        let n = self.dim();
        let mut x = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let phase = t * (self.eigenvalues[i] - self.eigenvalues[j]);
                x[[i, j]] = c.w[[i, j]] * c64::new(0.0, phase).exp();
            }
        }
        self.from_eigenbasis(&x)
    }

    /// Schroedinger evolution `e^{-itH} v` of a state vector.
    pub fn evolve_vector(&self, v: &Array1<c64>, t: f64) -> Array1<c64> {
        let coeffs = adjoint(&self.eigenvectors).dot(v);
        let phased = Array1::from_iter(
            coeffs
                .iter()
                .zip(self.eigenvalues.iter())
                .map(|(c, &e)| c * c64::new(0.0, -t * e).exp()),
        );
        self.eigenvectors.dot(&phased)
    }
}

/// `U^* A U` cache for repeated evolutions; see [`SpectralData::conjugate`].
#[derive(Debug, Clone)]
pub struct Conjugated {
    w: Array2<c64>,
}

/// `tau_t(A) = e^{itH} A e^{-itH}` through the spectral decomposition.
pub fn heisenberg_evolve(sd: &SpectralData, a: &Array2<c64>, t: f64) -> Result<Array2<c64>> {
    let c = sd.conjugate(a)?;
    Ok(sd.evolve_conjugated(&c, t))
}

/// Imaginary-displacement conjugation `e^{-bH} A e^{bH}`. The energy shift
/// that puts the ground energy at zero cancels between the two factors, so
/// the matrix elements are `e^{-b(E_i - E_j)} <i|A|j>` in the eigenbasis.
pub fn complex_time_evolve(sd: &SpectralData, a: &Array2<c64>, b: f64) -> Result<Array2<c64>> {
    let spread = sd.eigenvalues[sd.dim() - 1] - sd.eigenvalues[0];
    if b.abs() * spread > 300.0 {
        return Err(Error::OverflowRisk(b.abs() * spread));
    }
    let c = sd.conjugate(a)?;
    let n = sd.dim();
    let mut x = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let w = -b * (sd.eigenvalues[i] - sd.eigenvalues[j]);
            x[[i, j]] = c.w[[i, j]] * c64::new(w.exp(), 0.0);
        }
    }
    Ok(sd.from_eigenbasis(&x))
}

/// Operator norm: largest |eigenvalue| for (anti-)Hermitian input, largest
/// singular value otherwise.
pub fn operator_norm(a: &Array2<c64>) -> f64 {
    if a.nrows() == a.ncols() {
        let scale = 1.0 + max_abs_entry(a);
        if hermiticity_deviation(a) <= 1e-12 * scale {
            return hermitian_norm(a);
        }
        let ia = a * c64::new(0.0, 1.0);
        if hermiticity_deviation(&ia) <= 1e-12 * scale {
            return hermitian_norm(&ia);
        }
    }
    let (_, sigma, _) = a.svd(false, false).expect("svd failed");
    sigma.iter().fold(0.0f64, |m, &s| m.max(s))
}

/// Largest |eigenvalue| of a Hermitian matrix.
pub fn hermitian_norm(a: &Array2<c64>) -> f64 {
    let evals = a.eigvalsh(UPLO::Lower).expect("eigvalsh failed");
    evals.iter().fold(0.0f64, |m, &e| m.max(e.abs()))
}

/// `A B - B A`.
pub fn commutator(a: &Array2<c64>, b: &Array2<c64>) -> Array2<c64> {
    a.dot(b) - b.dot(a)
}

/// Gauge fix: rotate the global phase so the largest-magnitude amplitude is
/// real positive.
pub fn phase_fix_vector(v: &Array1<c64>) -> Array1<c64> {
    let mut best = 0usize;
    let mut best_mag = -1.0;
    for (i, amp) in v.iter().enumerate() {
        let m = amp.norm();
        if m > best_mag {
            best_mag = m;
            best = i;
        }
    }
    if best_mag == 0.0 {
        return v.clone();
    }
    let phase = v[best] / c64::new(best_mag, 0.0);
    v.mapv(|amp| amp * phase.conj())
}

/// `<v, M v>`.
pub fn expectation(m: &Array2<c64>, v: &Array1<c64>) -> c64 {
    let mv = m.dot(v);
    v.iter().zip(mv.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// `<u, v>`.
pub fn inner(u: &Array1<c64>, v: &Array1<c64>) -> c64 {
    u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum()
}

pub fn vector_norm(v: &Array1<c64>) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Normalized partial trace `<A>_{X^c} = (Tr_{X^c} A / dim H_{X^c}) (x) 1`,
/// embedded back into the volume. The result is supported in `x_set`.
pub fn conditional_expectation(
    a: &Array2<c64>,
    x_set: &[Site],
    space: &SiteSpace,
    volume: &[Site],
) -> Result<Array2<c64>> {
    let dims: Vec<usize> = volume.iter().map(|&s| space.local_dim(s)).collect();
    let dim: usize = dims.iter().product();
    if a.nrows() != dim || a.ncols() != dim {
        return Err(Error::DimensionMismatch {
            left: a.nrows(),
            right: dim,
        });
    }
    let mut keep: Vec<Site> = x_set.iter().copied().filter(|s| volume.contains(s)).collect();
    keep.sort_unstable();
    keep.dedup();
    let positions = positions_in_volume(&keep, volume).ok_or(Error::SupportNotContained)?;
    let split = tensor::split_index(&dims, &positions);
    let mut sub = tensor::partial_trace_keep(a, &split);
    sub.mapv_inplace(|v| v / split.comp_dim as f64);
    Ok(tensor::embedded(&sub, &split))
}

/// One Haar-distributed unitary via QR of a complex Gaussian matrix with the
/// R-diagonal phases absorbed.
pub fn haar_unitary(dim: usize, rng: &mut ChaCha12Rng) -> Array2<c64> {
    if dim == 1 {
        // Uniform phase.
        let x: f64 = StandardNormal.sample(rng);
        let y: f64 = StandardNormal.sample(rng);
        let z = c64::new(x, y);
        let z = if z.norm() == 0.0 { c64::new(1.0, 0.0) } else { z / z.norm() };
        return Array2::from_elem((1, 1), z);
    }
    let mut g = Array2::<c64>::zeros((dim, dim));
    let scale = 1.0 / 2.0f64.sqrt();
    for v in g.iter_mut() {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        *v = c64::new(re * scale, im * scale);
    }
    let (q, r) = g.qr_square().expect("qr failed");
    let mut lambda = Array2::<c64>::zeros((dim, dim));
    for i in 0..dim {
        let d = r[[i, i]];
        lambda[[i, i]] = if d.norm() == 0.0 {
            c64::new(1.0, 0.0)
        } else {
            d / d.norm()
        };
    }
    q.dot(&lambda)
}

/// Monte Carlo average `int U^* A U mu(dU)` over Haar unitaries on the
/// complement of `x_set`; converges to [`conditional_expectation`].
pub fn haar_average_mc(
    a: &Array2<c64>,
    x_set: &[Site],
    space: &SiteSpace,
    volume: &[Site],
    samples: usize,
    seed: u64,
) -> Result<Array2<c64>> {
    assert!(samples >= 1, "need at least one sample");
    let dims: Vec<usize> = volume.iter().map(|&s| space.local_dim(s)).collect();
    let dim: usize = dims.iter().product();
    if a.nrows() != dim || a.ncols() != dim {
        return Err(Error::DimensionMismatch {
            left: a.nrows(),
            right: dim,
        });
    }
    let keep: Vec<Site> = x_set.iter().copied().filter(|s| volume.contains(s)).collect();
    let comp_positions: Vec<usize> = volume
        .iter()
        .enumerate()
        .filter(|(_, s)| !keep.contains(s))
        .map(|(p, _)| p)
        .collect();
    if comp_positions.is_empty() {
        // The complement factor is one-dimensional; every unitary on it is a
        // phase, and conjugation by a phase is the identity map.
        return Ok(a.clone());
    }
    let split = tensor::split_index(&dims, &comp_positions);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut acc = Array2::<c64>::zeros((dim, dim));
    for _ in 0..samples {
        let u = haar_unitary(split.sup_dim, &mut rng);
        let u_full = tensor::embedded(&u, &split);
        acc = acc + adjoint(&u_full).dot(a).dot(&u_full);
    }
    Ok(acc / c64::new(samples as f64, 0.0))
}

/// A concrete simulation target: a site space, an interaction over it, and
/// the sub-volume whose Hilbert space is actually built. Analytic constants
/// never look at the volume; empirical quantities live on it.
#[derive(Debug, Clone)]
pub struct Model {
    pub space: SiteSpace,
    pub interaction: Interaction,
    pub volume: Vec<Site>,
    pub dense_cap: usize,
}

impl Model {
    pub fn new(
        space: SiteSpace,
        interaction: Interaction,
        volume: Option<Vec<Site>>,
        dense_cap: usize,
    ) -> Result<Self> {
        let volume = match volume {
            Some(mut v) => {
                v.sort_unstable();
                v.dedup();
                if v.is_empty() {
                    return Err(Error::EmptySet("model volume"));
                }
                if *v.last().unwrap() >= space.len() {
                    return Err(Error::Config("volume leaves the site space".into()));
                }
                v
            }
            None => space.sites(),
        };
        Ok(Model {
            space,
            interaction,
            volume,
            dense_cap,
        })
    }

    pub fn volume_dims(&self) -> Vec<usize> {
        self.volume.iter().map(|&s| self.space.local_dim(s)).collect()
    }

    pub fn dim(&self) -> usize {
        self.volume_dims().iter().product()
    }

    pub fn hamiltonian(&self) -> Result<Array2<c64>> {
        assemble_hamiltonian(&self.interaction, &self.space, &self.volume, self.dense_cap)
    }

    pub fn spectral(&self) -> Result<SpectralData> {
        spectral_decompose(&self.hamiltonian()?)
    }

    pub fn embed(&self, obs: &ObservableWithSupport) -> Result<Array2<c64>> {
        embed_local(obs, &self.space, &self.volume, self.dense_cap)
    }

    pub fn sectors(&self) -> MagnetizationSectors {
        magnetization_sectors(&self.volume_dims())
    }
}

/// Decomposition of a volume's basis by twice the total magnetization
/// (`sum_x 2 m_x`, an integer for any mix of local dimensions).
#[derive(Debug, Clone)]
pub struct MagnetizationSectors {
    pub keys: Vec<i64>,
    pub indices: Vec<Vec<u32>>,
    pub sector_of: Vec<u32>,
    pub pos_of: Vec<u32>,
}

impl MagnetizationSectors {
    pub fn count(&self) -> usize {
        self.keys.len()
    }
}

pub fn magnetization_sectors(dims: &[usize]) -> MagnetizationSectors {
    let n = dims.len();
    let dim: usize = dims.iter().product();
    let mut key_of = vec![0i64; dim];
    let mut digits = vec![0usize; n];
    for g in 0..dim {
        let mut key = 0i64;
        for k in 0..n {
            key += (dims[k] as i64 - 1) - 2 * digits[k] as i64;
        }
        key_of[g] = key;
        for k in 0..n {
            digits[k] += 1;
            if digits[k] < dims[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    let mut keys: Vec<i64> = key_of.clone();
    keys.sort_unstable();
    keys.dedup();
    let sector_index = |k: i64| keys.binary_search(&k).unwrap();
    let mut indices = vec![Vec::new(); keys.len()];
    let mut sector_of = vec![0u32; dim];
    let mut pos_of = vec![0u32; dim];
    for g in 0..dim {
        let s = sector_index(key_of[g]);
        sector_of[g] = s as u32;
        pos_of[g] = indices[s].len() as u32;
        indices[s].push(g as u32);
    }
    MagnetizationSectors {
        keys,
        indices,
        sector_of,
        pos_of,
    }
}

/// Whether every term block commutes with the total-magnetization key on its
/// support (max off-sector entry below 1e-13 of scale). A sufficient
/// structural condition for the full Hamiltonian to be block diagonal in the
/// volume's magnetization sectors.
pub fn interaction_conserves_magnetization(phi: &Interaction, space: &SiteSpace) -> bool {
    for term in phi.terms() {
        let dims: Vec<usize> = term.support().iter().map(|&s| space.local_dim(s)).collect();
        let keys = local_keys(&dims);
        let block = term.block();
        let tol = 1e-13 * (1.0 + max_abs_entry(block));
        for i in 0..block.nrows() {
            for j in 0..block.ncols() {
                if keys[i] != keys[j] && block[[i, j]].norm() > tol {
                    return false;
                }
            }
        }
    }
    true
}

fn local_keys(dims: &[usize]) -> Vec<i64> {
    let n = dims.len();
    let dim: usize = dims.iter().product();
    let mut keys = vec![0i64; dim];
    let mut digits = vec![0usize; n];
    for g in 0..dim {
        let mut key = 0i64;
        for k in 0..n {
            key += (dims[k] as i64 - 1) - 2 * digits[k] as i64;
        }
        keys[g] = key;
        for k in 0..n {
            digits[k] += 1;
            if digits[k] < dims[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    keys
}

/// Per-sector Hamiltonian blocks, assembled without materializing the full
/// dense matrix. Callers must have checked conservation first.
pub fn assemble_sector_blocks(
    phi: &Interaction,
    space: &SiteSpace,
    volume: &[Site],
    sectors: &MagnetizationSectors,
) -> Vec<Array2<c64>> {
    let dims: Vec<usize> = volume.iter().map(|&s| space.local_dim(s)).collect();
    let dim: usize = dims.iter().product();
    let mut blocks: Vec<Array2<c64>> = sectors
        .indices
        .iter()
        .map(|idx| Array2::zeros((idx.len(), idx.len())))
        .collect();
    for term in phi.terms() {
        let Some(positions) = positions_in_volume(term.support(), volume) else {
            continue;
        };
        let split = tensor::split_index(&dims, &positions);
        let block = term.block();
        for j in 0..dim {
            let sj = split.sup[j] as usize;
            let cj = split.comp[j] as usize;
            let sector = sectors.sector_of[j] as usize;
            let col = sectors.pos_of[j] as usize;
            for si in 0..split.sup_dim {
                let v = block[[si, sj]];
                if v == c64::new(0.0, 0.0) {
                    continue;
                }
                let gi = split.global[si * split.comp_dim + cj] as usize;
                debug_assert_eq!(sectors.sector_of[gi] as usize, sector);
                let row = sectors.pos_of[gi] as usize;
                blocks[sector][[row, col]] += v;
            }
        }
    }
    blocks
}

/// The `k` lowest eigenvalues of the volume Hamiltonian. Uses the
/// magnetization-sector decomposition when the interaction conserves it,
/// and a dense eigensolve otherwise.
pub fn lowest_eigenvalues(
    phi: &Interaction,
    space: &SiteSpace,
    volume: &[Site],
    k: usize,
    dense_cap: usize,
) -> Result<Vec<f64>> {
    let dims: Vec<usize> = volume.iter().map(|&s| space.local_dim(s)).collect();
    let dim: usize = dims.iter().product();
    if dim > dense_cap {
        return Err(Error::DimensionCap {
            dim,
            cap: dense_cap,
        });
    }
    let mut all = Vec::with_capacity(dim);
    if interaction_conserves_magnetization(phi, space) {
        let sectors = magnetization_sectors(&dims);
        for block in assemble_sector_blocks(phi, space, volume, &sectors) {
            if block.nrows() == 0 {
                continue;
            }
            all.extend(block.eigvalsh(UPLO::Lower)?.into_iter());
        }
    } else {
        let h = assemble_hamiltonian(phi, space, volume, dense_cap)?;
        all.extend(h.eigvalsh(UPLO::Lower)?.into_iter());
    }
    all.sort_by(f64::total_cmp);
    all.truncate(k);
    Ok(all)
}

/// Largest |eigenvalue| of a Hermitian operator that is expected to be
/// sector-block-diagonal. Entries between sectors are scanned first; if any
/// exceed tolerance the dense path is used instead, so the answer is always
/// the true norm.
pub fn hermitian_norm_sectored(m: &Array2<c64>, sectors: &MagnetizationSectors) -> f64 {
    let n = m.nrows();
    let tol = 1e-11 * (1.0 + max_abs_entry(m));
    for i in 0..n {
        for j in 0..n {
            if sectors.sector_of[i] != sectors.sector_of[j] && m[[i, j]].norm() > tol {
                return hermitian_norm(m);
            }
        }
    }
    let mut best = 0.0f64;
    for idx in &sectors.indices {
        if idx.is_empty() {
            continue;
        }
        let mut block = Array2::zeros((idx.len(), idx.len()));
        for (a, &gi) in idx.iter().enumerate() {
            for (b, &gj) in idx.iter().enumerate() {
                block[[a, b]] = m[[gi as usize, gj as usize]];
            }
        }
        let evals = block.eigvalsh(UPLO::Lower).expect("eigvalsh failed");
        best = evals.iter().fold(best, |acc, &e| acc.max(e.abs()));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interaction::{heisenberg_preset, SpinModelSpec};
    use crate::metric::Geometry;
    use proptest::prelude::*;

    fn ring_model(n: usize, two_s: u32) -> Model {
        let g = Geometry::Ring { length: n };
        let spec = SpinModelSpec {
            geometry: g,
            two_s,
            coupling: 1.0,
            staggered_field: 0.0,
            twist: None,
        };
        let space = g.site_space(two_s as usize + 1).unwrap();
        let phi = heisenberg_preset(&spec, &space).unwrap();
        Model::new(space, phi, None, 1 << 14).unwrap()
    }

    fn random_hermitian(n: usize, seed: u64) -> Array2<c64> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut m = Array2::<c64>::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                let v = if i == j {
                    c64::new(re, 0.0)
                } else {
                    c64::new(re, im)
                };
                m[[i, j]] = v;
                m[[j, i]] = v.conj();
            }
        }
        m
    }

    fn random_matrix(n: usize, seed: u64) -> Array2<c64> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut m = Array2::<c64>::zeros((n, n));
        for v in m.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *v = c64::new(re, im);
        }
        m
    }

    #[test]
    fn embed_identity_and_sz_patterns() {
        let space = Geometry::Path { length: 2 }.site_space(2).unwrap();
        let vol = space.sites();
        let id = ObservableWithSupport::new(&space, vec![0], Array2::eye(2)).unwrap();
        let full = embed_local(&id, &space, &vol, 64).unwrap();
        assert_eq!(max_abs_entry(&(&full - &Array2::<c64>::eye(4))), 0.0);
        // S^3 on site 1: site 0 varies fastest, so diag(1/2, 1/2, -1/2, -1/2).
        let sz1 = ObservableWithSupport::spin_component(&space, 1, 2).unwrap();
        let full = embed_local(&sz1, &space, &vol, 64).unwrap();
        let want = [0.5, 0.5, -0.5, -0.5];
        for (i, w) in want.iter().enumerate() {
            assert_eq!(full[[i, i]], c64::new(*w, 0.0));
        }
    }

    #[test]
    fn disjoint_embeddings_commute() {
        let space = Geometry::Path { length: 3 }.site_space(2).unwrap();
        let vol = space.sites();
        let a = ObservableWithSupport::spin_component(&space, 0, 0).unwrap();
        let b = ObservableWithSupport::spin_component(&space, 2, 1).unwrap();
        let fa = embed_local(&a, &space, &vol, 64).unwrap();
        let fb = embed_local(&b, &space, &vol, 64).unwrap();
        assert!(operator_norm(&commutator(&fa, &fb)) < 1e-15);
    }

    #[test]
    fn embed_errors() {
        let space = Geometry::Path { length: 3 }.site_space(2).unwrap();
        let a = ObservableWithSupport::spin_component(&space, 2, 2).unwrap();
        assert!(matches!(
            embed_local(&a, &space, &[0, 1], 64),
            Err(Error::SupportNotContained)
        ));
        assert!(matches!(
            embed_local(&a, &space, &space.sites(), 4),
            Err(Error::DimensionCap { .. })
        ));
    }

    #[test]
    fn spectral_decompose_diag_and_zero() {
        let z = Array2::<c64>::zeros((3, 3));
        let sd = spectral_decompose(&z).unwrap();
        assert!(sd.eigenvalues().iter().all(|&e| e == 0.0));
        let d = Array2::from_diag(&ndarray::arr1(&[
            c64::new(3.0, 0.0),
            c64::new(1.0, 0.0),
            c64::new(2.0, 0.0),
        ]));
        let sd = spectral_decompose(&d).unwrap();
        let want = [1.0, 2.0, 3.0];
        for (e, w) in sd.eigenvalues().iter().zip(want.iter()) {
            assert!((e - w).abs() < 1e-14);
        }
    }

    #[test]
    fn spectral_moments_match_traces() {
        // Moment identities: tr H = sum E_i, tr H^2 = sum E_i^2 give an
        // eigensolver-independent cross-check on the 4-ring spectrum.
        let model = ring_model(4, 1);
        let h = model.hamiltonian().unwrap();
        let sd = model.spectral().unwrap();
        let tr: c64 = (0..16).map(|i| h[[i, i]]).sum();
        let h2 = h.dot(&h);
        let tr2: c64 = (0..16).map(|i| h2[[i, i]]).sum();
        let s1: f64 = sd.eigenvalues().iter().sum();
        let s2: f64 = sd.eigenvalues().iter().map(|e| e * e).sum();
        assert!((tr.re - s1).abs() < 1e-10);
        assert!((tr2.re - s2).abs() < 1e-9);
        assert!(tr.im.abs() < 1e-12 && tr2.im.abs() < 1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = random_matrix(4, 7);
        assert!(matches!(
            spectral_decompose(&m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn evolve_identities() {
        let h = random_hermitian(6, 3);
        let sd = spectral_decompose(&h).unwrap();
        let a = random_matrix(6, 4);
        // t = 0 is the identity map.
        let a0 = heisenberg_evolve(&sd, &a, 0.0).unwrap();
        assert!(max_abs_entry(&(&a0 - &a)) < 1e-12);
        // H evolves to itself.
        let ht = heisenberg_evolve(&sd, &h, 1.3).unwrap();
        assert!(max_abs_entry(&(&ht - &h)) < 1e-10);
        // Unitary invariance of the norm.
        let at = heisenberg_evolve(&sd, &a, 0.77).unwrap();
        assert!((operator_norm(&at) - operator_norm(&a)).abs() < 1e-9);
    }

    #[test]
    fn evolve_group_action() {
        let h = random_hermitian(5, 11);
        let sd = spectral_decompose(&h).unwrap();
        let a = random_matrix(5, 12);
        let (t, s) = (0.4, 0.9);
        let two_step = heisenberg_evolve(&sd, &heisenberg_evolve(&sd, &a, s).unwrap(), t).unwrap();
        let one_step = heisenberg_evolve(&sd, &a, t + s).unwrap();
        assert!(max_abs_entry(&(&two_step - &one_step)) < 1e-9);
    }

    #[test]
    fn complex_time_identities() {
        let h = random_hermitian(6, 21);
        let sd = spectral_decompose(&h).unwrap();
        let a = random_matrix(6, 22);
        let a0 = complex_time_evolve(&sd, &a, 0.0).unwrap();
        assert!(max_abs_entry(&(&a0 - &a)) < 1e-12);
        // Commuting observable is fixed: take a polynomial in H.
        let p = h.dot(&h) + &h * c64::new(0.5, 0.0);
        let pb = complex_time_evolve(&sd, &p, 0.8).unwrap();
        assert!(max_abs_entry(&(&pb - &p)) < 1e-8);
        // Matrix elements in the eigenbasis: e^{-b(E_i - E_j)} <i|A|j>.
        let b = 0.35;
        let res = complex_time_evolve(&sd, &a, b).unwrap();
        let res_eig = sd.to_eigenbasis(&res);
        let a_eig = sd.to_eigenbasis(&a);
        for i in 0..6 {
            for j in 0..6 {
                let w = (-b * (sd.eigenvalues()[i] - sd.eigenvalues()[j])).exp();
                let want = a_eig[[i, j]] * w;
                assert!((res_eig[[i, j]] - want).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn overflow_guard_triggers() {
        let d = Array2::from_diag(&ndarray::arr1(&[c64::new(0.0, 0.0), c64::new(200.0, 0.0)]));
        let sd = spectral_decompose(&d).unwrap();
        let a = random_matrix(2, 5);
        assert!(matches!(
            complex_time_evolve(&sd, &a, 2.0),
            Err(Error::OverflowRisk(_))
        ));
    }

    #[test]
    fn operator_norm_basics_and_oracle() {
        assert!((operator_norm(&Array2::<c64>::eye(5)) - 1.0).abs() < 1e-14);
        let d = Array2::from_diag(&ndarray::arr1(&[c64::new(-3.0, 0.0), c64::new(2.0, 0.0)]));
        assert!((operator_norm(&d) - 3.0).abs() < 1e-14);
        // Independent oracle: power iteration on A^* A.
        let a = random_matrix(8, 33);
        let b = adjoint(&a).dot(&a);
        let mut x = Array1::from_elem(8, c64::new(1.0, 0.25));
        let mut lambda = 0.0;
        for _ in 0..2000 {
            let y = b.dot(&x);
            lambda = vector_norm(&y);
            x = y / c64::new(lambda, 0.0);
        }
        let oracle = lambda.sqrt();
        assert!(
            (operator_norm(&a) - oracle).abs() < 1e-8,
            "{} vs {}",
            operator_norm(&a),
            oracle
        );
    }

    #[test]
    fn conditional_expectation_identities() {
        let space = Geometry::Path { length: 3 }.site_space(2).unwrap();
        let vol = space.sites();
        let dim = 8;
        // Identity maps to identity.
        let id: Array2<c64> = Array2::eye(dim);
        let ce = conditional_expectation(&id, &[0], &space, &vol).unwrap();
        assert!(max_abs_entry(&(&ce - &id)) < 1e-14);
        // Traceless factor inside the complement averages to zero.
        let sz2 = embed_local(
            &ObservableWithSupport::spin_component(&space, 2, 2).unwrap(),
            &space,
            &vol,
            64,
        )
        .unwrap();
        let ce = conditional_expectation(&sz2, &[0, 1], &space, &vol).unwrap();
        assert!(max_abs_entry(&ce) < 1e-14);
        // Operators already supported in X are fixed points.
        let sx0 = embed_local(
            &ObservableWithSupport::spin_component(&space, 0, 0).unwrap(),
            &space,
            &vol,
            64,
        )
        .unwrap();
        let ce = conditional_expectation(&sx0, &[0], &space, &vol).unwrap();
        assert!(max_abs_entry(&(&ce - &sx0)) < 1e-14);
    }

    #[test]
    fn conditional_expectation_projection_and_trace() {
        let space = Geometry::Path { length: 3 }.site_space(2).unwrap();
        let vol = space.sites();
        let a = random_matrix(8, 44);
        let once = conditional_expectation(&a, &[1], &space, &vol).unwrap();
        let twice = conditional_expectation(&once, &[1], &space, &vol).unwrap();
        assert_eq!(max_abs_entry(&(&twice - &once)), 0.0);
        let tr_a: c64 = (0..8).map(|i| a[[i, i]]).sum();
        let tr_o: c64 = (0..8).map(|i| once[[i, i]]).sum();
        assert!((tr_a - tr_o).norm() < 1e-10);
    }

    #[test]
    fn haar_average_identity_and_empty_complement() {
        let space = Geometry::Path { length: 2 }.site_space(2).unwrap();
        let vol = space.sites();
        let id: Array2<c64> = Array2::eye(4);
        let avg = haar_average_mc(&id, &[0], &space, &vol, 3, 7).unwrap();
        assert!(max_abs_entry(&(&avg - &id)) < 1e-12);
        // X = whole volume: complement is trivial, A comes back exactly.
        let a = random_matrix(4, 9);
        let avg = haar_average_mc(&a, &[0, 1], &space, &vol, 1, 7).unwrap();
        assert_eq!(max_abs_entry(&(&avg - &a)), 0.0);
    }

    #[test]
    fn haar_average_converges_to_partial_trace() {
        let space = Geometry::Path { length: 2 }.site_space(2).unwrap();
        let vol = space.sites();
        let a = random_hermitian(4, 55);
        let exact = conditional_expectation(&a, &[0], &space, &vol).unwrap();
        let mc = haar_average_mc(&a, &[0], &space, &vol, 10_000, 2024).unwrap();
        let err = max_abs_entry(&(&mc - &exact));
        assert!(err < 5e-2, "MC error {err}");
        // Commutator form of the difference: <A> - A = int U^* [A, U] dU.
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let split = tensor::split_index(&[2, 2], &[1]);
        let mut acc = Array2::<c64>::zeros((4, 4));
        let samples = 10_000;
        for _ in 0..samples {
            let u = haar_unitary(2, &mut rng);
            let uf = tensor::embedded(&u, &split);
            acc = acc + adjoint(&uf).dot(&commutator(&a, &uf));
        }
        acc = acc / c64::new(samples as f64, 0.0);
        let lhs = &exact - &a;
        assert!(max_abs_entry(&(&acc - &lhs)) < 5e-2);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let u = haar_unitary(6, &mut rng);
        let g = adjoint(&u).dot(&u);
        assert!(max_abs_entry(&(&g - &Array2::<c64>::eye(6))) < 1e-12);
    }

    #[test]
    fn sector_lowest_eigenvalues_match_dense() {
        let model = ring_model(6, 1);
        assert!(interaction_conserves_magnetization(
            &model.interaction,
            &model.space
        ));
        let lows =
            lowest_eigenvalues(&model.interaction, &model.space, &model.volume, 5, 1 << 14)
                .unwrap();
        let h = model.hamiltonian().unwrap();
        let dense = h.eigvalsh(UPLO::Lower).unwrap();
        for (a, b) in lows.iter().zip(dense.iter()) {
            assert!((a - b).abs() < 1e-10, "{lows:?} vs {dense:?}");
        }
    }

    #[test]
    fn sector_norm_matches_dense_norm() {
        let model = ring_model(6, 1);
        let sd = model.spectral().unwrap();
        let a = model
            .embed(&ObservableWithSupport::spin_component(&model.space, 0, 2).unwrap())
            .unwrap();
        let b = model
            .embed(&ObservableWithSupport::spin_component(&model.space, 3, 2).unwrap())
            .unwrap();
        let at = heisenberg_evolve(&sd, &a, 0.6).unwrap();
        let m = commutator(&at, &b) * c64::new(0.0, 1.0);
        let sectors = model.sectors();
        let fast = hermitian_norm_sectored(&m, &sectors);
        let dense = hermitian_norm(&m);
        assert!((fast - dense).abs() < 1e-10, "{fast} vs {dense}");
    }

    #[test]
    fn phase_fix_makes_leading_amplitude_positive() {
        let v = ndarray::arr1(&[c64::new(0.0, -0.8), c64::new(0.1, 0.0)]);
        let w = phase_fix_vector(&v);
        assert!((w[0].re - 0.8).abs() < 1e-15 && w[0].im.abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn evolution_is_a_group_action(seed in 0u64..1000, t in -1.5f64..1.5, s in -1.5f64..1.5) {
            let h = random_hermitian(4, seed);
            let sd = spectral_decompose(&h).unwrap();
            let a = random_matrix(4, seed.wrapping_add(1));
            let lhs = heisenberg_evolve(&sd, &heisenberg_evolve(&sd, &a, s).unwrap(), t).unwrap();
            let rhs = heisenberg_evolve(&sd, &a, t + s).unwrap();
            prop_assert!(max_abs_entry(&(&lhs - &rhs)) < 1e-9);
        }
    }
}
