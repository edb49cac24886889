//! Tensor-index plumbing: embedding local blocks into a volume and partial
//! traces over site subsets.
//!
//! Convention used everywhere: basis states of a volume are indexed with the
//! first site in the ordered site list varying fastest, so the global index
//! of a configuration `(c_0, c_1, ...)` is `c_0 + c_1 d_0 + c_2 d_0 d_1 + ...`.
//! The same rule applies inside any sub-factor.

use ndarray::{Array1, Array2};
use ndarray_linalg::c64;

/// Index tables splitting the volume factor into a support factor (given by
/// `positions` into the volume's site list) and its complement.
pub struct SplitIndex {
    pub dim: usize,
    pub sup_dim: usize,
    pub comp_dim: usize,
    /// global index -> index within the support factor
    pub sup: Vec<u32>,
    /// global index -> index within the complement factor
    pub comp: Vec<u32>,
    /// `(sup_idx, comp_idx) -> global`, laid out as `sup_idx * comp_dim + comp_idx`
    pub global: Vec<u32>,
}

pub fn split_index(volume_dims: &[usize], positions: &[usize]) -> SplitIndex {
    let n = volume_dims.len();
    let dim: usize = volume_dims.iter().product();
    let in_support: Vec<bool> = {
        let mut v = vec![false; n];
        for &p in positions {
            v[p] = true;
        }
        v
    };
    let mut sup_dim = 1usize;
    let mut comp_dim = 1usize;
    // strides within each sub-factor, first listed site fastest
    let mut sub_stride = vec![0usize; n];
    for (k, &d) in volume_dims.iter().enumerate() {
        if in_support[k] {
            sub_stride[k] = sup_dim;
            sup_dim *= d;
        } else {
            sub_stride[k] = comp_dim;
            comp_dim *= d;
        }
    }
    let mut sup = vec![0u32; dim];
    let mut comp = vec![0u32; dim];
    let mut global = vec![0u32; dim];
    // Incremental digit counter over the volume.
    let mut digits = vec![0usize; n];
    for g in 0..dim {
        let mut s = 0usize;
        let mut c = 0usize;
        for k in 0..n {
            if in_support[k] {
                s += digits[k] * sub_stride[k];
            } else {
                c += digits[k] * sub_stride[k];
            }
        }
        sup[g] = s as u32;
        comp[g] = c as u32;
        global[s * comp_dim + c] = g as u32;
        // increment
        for k in 0..n {
            digits[k] += 1;
            if digits[k] < volume_dims[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    SplitIndex {
        dim,
        sup_dim,
        comp_dim,
        sup,
        comp,
        global,
    }
}

/// Add `block (x) identity` into `out`, with `block` acting on the factor
/// selected by `split`.
pub fn add_embedded(out: &mut Array2<c64>, block: &Array2<c64>, split: &SplitIndex) {
    debug_assert_eq!(block.nrows(), split.sup_dim);
    debug_assert_eq!(out.nrows(), split.dim);
    for si in 0..split.sup_dim {
        for sj in 0..split.sup_dim {
            let v = block[[si, sj]];
            if v == c64::new(0.0, 0.0) {
                continue;
            }
            let row_base = si * split.comp_dim;
            let col_base = sj * split.comp_dim;
            for c in 0..split.comp_dim {
                let gi = split.global[row_base + c] as usize;
                let gj = split.global[col_base + c] as usize;
                out[[gi, gj]] += v;
            }
        }
    }
}

/// `block (x) identity` as a fresh dense matrix.
pub fn embedded(block: &Array2<c64>, split: &SplitIndex) -> Array2<c64> {
    let mut out = Array2::zeros((split.dim, split.dim));
    add_embedded(&mut out, block, split);
    out
}

/// Partial trace onto the support factor: `sub[si, sj] = sum_c a[g(si,c), g(sj,c)]`.
pub fn partial_trace_keep(a: &Array2<c64>, split: &SplitIndex) -> Array2<c64> {
    debug_assert_eq!(a.nrows(), split.dim);
    let mut sub = Array2::zeros((split.sup_dim, split.sup_dim));
    for si in 0..split.sup_dim {
        for sj in 0..split.sup_dim {
            let row_base = si * split.comp_dim;
            let col_base = sj * split.comp_dim;
            let mut acc = c64::new(0.0, 0.0);
            for c in 0..split.comp_dim {
                let gi = split.global[row_base + c] as usize;
                let gj = split.global[col_base + c] as usize;
                acc += a[[gi, gj]];
            }
            sub[[si, sj]] = acc;
        }
    }
    sub
}

/// Tensor product vector from per-site factors, first site fastest.
pub fn product_vector(volume_dims: &[usize], factors: &[Array1<c64>]) -> Array1<c64> {
    let dim: usize = volume_dims.iter().product();
    let n = volume_dims.len();
    let mut out = Array1::zeros(dim);
    let mut digits = vec![0usize; n];
    for g in 0..dim {
        let mut amp = c64::new(1.0, 0.0);
        for k in 0..n {
            amp *= factors[k][digits[k]];
        }
        out[g] = amp;
        for k in 0..n {
            digits[k] += 1;
            if digits[k] < volume_dims[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> c64 {
        c64::new(re, 0.0)
    }

    #[test]
    fn split_on_two_qubits() {
        // volume [2, 2], support = site 1. Site 0 varies fastest.
        let split = split_index(&[2, 2], &[1]);
        assert_eq!(split.sup_dim, 2);
        assert_eq!(split.comp_dim, 2);
        assert_eq!(split.sup, vec![0, 0, 1, 1]);
        assert_eq!(split.comp, vec![0, 1, 0, 1]);
    }

    #[test]
    fn embed_diagonal_on_second_site() {
        // diag(a, b) on site 1 of two qubits -> diag(a, a, b, b)
        let block = Array2::from_diag(&ndarray::arr1(&[c(3.0), c(7.0)]));
        let split = split_index(&[2, 2], &[1]);
        let full = embedded(&block, &split);
        for (i, want) in [3.0, 3.0, 7.0, 7.0].iter().enumerate() {
            assert_eq!(full[[i, i]], c(*want));
        }
    }

    #[test]
    fn trace_then_embed_identity_roundtrip() {
        let split = split_index(&[2, 3, 2], &[0, 2]);
        assert_eq!(split.sup_dim, 4);
        assert_eq!(split.comp_dim, 3);
        // Partial trace of the identity gives comp_dim * identity.
        let id = Array2::eye(12);
        let sub = partial_trace_keep(&id, &split);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { c(3.0) } else { c(0.0) };
                assert_eq!(sub[[i, j]], want);
            }
        }
    }

    #[test]
    fn product_vector_ordering() {
        // |v0> = (1, 2), |v1> = (1, 10): amplitude at g = c0 + 2 c1 is v0[c0] v1[c1].
        let v0 = ndarray::arr1(&[c(1.0), c(2.0)]);
        let v1 = ndarray::arr1(&[c(1.0), c(10.0)]);
        let v = product_vector(&[2, 2], &[v0, v1]);
        assert_eq!(v[0], c(1.0));
        assert_eq!(v[1], c(2.0));
        assert_eq!(v[2], c(10.0));
        assert_eq!(v[3], c(20.0));
    }
}
