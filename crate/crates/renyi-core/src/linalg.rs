//! Dense complex Hermitian linear algebra on small matrices.
//!
//! Target dimensions are tiny (total dimension <= 64), so everything is dense
//! and goes through full eigendecompositions. A single relative support cutoff
//! (`SUPPORT_CUTOFF_REL` times the largest eigenvalue magnitude) feeds every
//! support predicate so that different divergence kinds never disagree about
//! what "the support" is.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::CoreError;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex vector.
pub type CVector = DVector<Complex64>;

/// Hermiticity tolerance (max entrywise |M - M^dag|).
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Relative support cutoff: eigenvalues above `cutoff_rel * max |eig|` count
/// as support.
pub const SUPPORT_CUTOFF_REL: f64 = 1e-9;
/// Default absolute tolerance for merging near-degenerate eigenvalues when
/// building pinching projectors.
pub const EIG_CLUSTER_TOL: f64 = 1e-8;
/// Rank cutoff used when intersecting supports.
pub const INTERSECTION_CUTOFF: f64 = 1e-8;
/// Overlap threshold for support containment / orthogonality predicates.
pub const SUPPORT_OVERLAP_TOL: f64 = 1e-6;

pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// Max entrywise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max entrywise |M - M^dag|.
pub fn hermitian_residual(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn check_hermitian(m: &CMatrix, tol: f64) -> Result<(), CoreError> {
    if m.nrows() != m.ncols() {
        return Err(CoreError::NotSquare(m.nrows(), m.ncols()));
    }
    let residual = hermitian_residual(m);
    if residual > tol {
        return Err(CoreError::NotHermitian { residual, tol });
    }
    Ok(())
}

/// Symmetrize away floating-point drift. Only valid for matrices that are
/// Hermitian up to numerical noise.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace_re(m: &CMatrix) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `[a, b]` max entrywise modulus.
pub fn commutator_norm(a: &CMatrix, b: &CMatrix) -> f64 {
    max_abs(&(a * b - b * a))
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted
/// descending. Returns `(eigenvalues, eigenvectors)` with eigenvectors as
/// columns, matching the eigenvalue order.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let d = m.nrows();
    if d == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let se = nalgebra::linalg::SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| se.eigenvalues[j].partial_cmp(&se.eigenvalues[i]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(d, d);
    for (new_col, &old_col) in order.iter().enumerate() {
        vectors.set_column(new_col, &se.eigenvectors.column(old_col));
    }
    (eigenvalues, vectors)
}

/// Eigendecomposition plus support bookkeeping.
#[derive(Debug, Clone)]
pub struct Spectral {
    /// Eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix of eigenvectors (columns).
    pub vectors: CMatrix,
    /// Number of eigenvalues strictly above the support cutoff.
    pub support_rank: usize,
    /// Absolute cutoff that was applied.
    pub cutoff: f64,
}

impl Spectral {
    /// Rebuild `U diag(f(lambda)) U^dag` applying `f` only on the support.
    pub fn apply_on_support(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let d = self.vectors.nrows();
        let mut out = CMatrix::zeros(d, d);
        for (i, &lam) in self.eigenvalues.iter().enumerate() {
            if lam.abs() > self.cutoff {
                let v = self.vectors.column(i);
                let scaled = v.scale(f(lam));
                out += scaled * v.adjoint();
            }
        }
        out
    }

    /// Projector onto the support.
    pub fn support_projector(&self) -> CMatrix {
        self.apply_on_support(|_| 1.0)
    }

    /// Isometry whose columns span the support (d x rank).
    pub fn support_isometry(&self) -> CMatrix {
        let d = self.vectors.nrows();
        let mut cols = Vec::new();
        for (i, &lam) in self.eigenvalues.iter().enumerate() {
            if lam.abs() > self.cutoff {
                cols.push(i);
            }
        }
        let mut b = CMatrix::zeros(d, cols.len());
        for (j, &i) in cols.iter().enumerate() {
            b.set_column(j, &self.vectors.column(i));
        }
        b
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }
}

/// Spectral decomposition of a Hermitian matrix. `support_cutoff` is an
/// absolute threshold; `None` selects the default relative cutoff.
pub fn spectral(m: &CMatrix, support_cutoff: Option<f64>) -> Result<Spectral, CoreError> {
    check_hermitian(m, HERMITIAN_TOL)?;
    let (eigenvalues, vectors) = eigh(m);
    let max_eig = eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let cutoff = support_cutoff.unwrap_or(SUPPORT_CUTOFF_REL * max_eig);
    let support_rank = eigenvalues.iter().filter(|x| x.abs() > cutoff).count();
    Ok(Spectral {
        eigenvalues,
        vectors,
        support_rank,
        cutoff,
    })
}

/// `M^p` with the power taken on the support only; negative powers act as
/// pseudo-inverse powers. `M` must be PSD up to the usual tolerances.
pub fn matrix_power_on_support(m: &CMatrix, p: f64) -> CMatrix {
    let s = spectral(m, None).expect("matrix_power_on_support: non-Hermitian input");
    s.apply_on_support(|lam| lam.max(0.0).powf(p))
}

/// Base-2 logarithm on the support; zero block off support. The caller is
/// responsible for tracking the support projector.
pub fn matrix_log2_on_support(m: &CMatrix) -> Result<CMatrix, CoreError> {
    let s = spectral(m, None)?;
    if s.support_rank == 0 {
        return Err(CoreError::ZeroMatrix);
    }
    Ok(s.apply_on_support(|lam| lam.max(s.cutoff * 0.5).log2()))
}

/// `2^H` for Hermitian `H` (full exponential, no support restriction).
pub fn matrix_exp2(h: &CMatrix) -> CMatrix {
    let (eigenvalues, vectors) = eigh(h);
    let d = h.nrows();
    let mut out = CMatrix::zeros(d, d);
    for (i, &lam) in eigenvalues.iter().enumerate() {
        let v = vectors.column(i);
        out += v.scale(lam.exp2()) * v.adjoint();
    }
    out
}

fn check_dims(dims: &[usize], total: usize) -> Result<(), CoreError> {
    let prod: usize = dims.iter().product();
    if dims.is_empty() || dims.iter().any(|&d| d == 0) || prod != total {
        return Err(CoreError::BadDims {
            dims: dims.to_vec(),
            reason: format!("product must equal matrix dimension {total}"),
        });
    }
    Ok(())
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn decompose(index: usize, dims: &[usize], strides: &[usize]) -> Vec<usize> {
    dims.iter()
        .zip(strides)
        .map(|(&d, &s)| (index / s) % d)
        .collect()
}

/// Partial trace keeping the subsystems listed in `keep` (in their original
/// order). Trace and positivity are preserved.
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix, CoreError> {
    check_dims(dims, m.nrows())?;
    if keep.is_empty() {
        return Err(CoreError::BadDims {
            dims: dims.to_vec(),
            reason: "keep set must be nonempty".into(),
        });
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    for &k in &keep {
        if k >= dims.len() {
            return Err(CoreError::SubsystemOutOfRange {
                index: k,
                count: dims.len(),
            });
        }
    }
    let st = strides(dims);
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let kept_strides = strides(&kept_dims);
    let d_out: usize = kept_dims.iter().product();
    let mut out = CMatrix::zeros(d_out, d_out);
    let d = m.nrows();
    for i in 0..d {
        let ti = decompose(i, dims, &st);
        for j in 0..d {
            let tj = decompose(j, dims, &st);
            // traced subsystems must match for the entry to survive
            if (0..dims.len())
                .filter(|k| !keep.contains(k))
                .all(|k| ti[k] == tj[k])
            {
                let oi: usize = keep
                    .iter()
                    .enumerate()
                    .map(|(pos, &k)| ti[k] * kept_strides[pos])
                    .sum();
                let oj: usize = keep
                    .iter()
                    .enumerate()
                    .map(|(pos, &k)| tj[k] * kept_strides[pos])
                    .sum();
                out[(oi, oj)] += m[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Reorder subsystems: output subsystem `k` is input subsystem `perm[k]`.
pub fn permute_subsystems(
    m: &CMatrix,
    dims: &[usize],
    perm: &[usize],
) -> Result<CMatrix, CoreError> {
    check_dims(dims, m.nrows())?;
    let mut sorted = perm.to_vec();
    sorted.sort_unstable();
    if sorted != (0..dims.len()).collect::<Vec<_>>() {
        return Err(CoreError::BadDims {
            dims: dims.to_vec(),
            reason: format!("{perm:?} is not a permutation of the subsystems"),
        });
    }
    let st = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&k| dims[k]).collect();
    let new_st = strides(&new_dims);
    let d = m.nrows();
    let map = |i: usize| -> usize {
        let t = decompose(i, dims, &st);
        perm.iter()
            .enumerate()
            .map(|(pos, &k)| t[k] * new_st[pos])
            .sum()
    };
    let mut out = CMatrix::zeros(d, d);
    for i in 0..d {
        let ni = map(i);
        for j in 0..d {
            out[(ni, map(j))] = m[(i, j)];
        }
    }
    Ok(out)
}

/// Trace norm (sum of singular values).
pub fn trace_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().singular_values().iter().sum()
}

/// Fidelity `F = ||sqrt(a) sqrt(b)||_1 + sqrt((1-tr a)(1-tr b))` between
/// (sub)normalized PSD matrices, clamped into [0, 1].
pub fn fidelity(a: &CMatrix, b: &CMatrix) -> f64 {
    let sa = matrix_power_on_support(a, 0.5);
    let sb = matrix_power_on_support(b, 0.5);
    let tn = trace_norm(&(&sa * &sb));
    let cross = ((1.0 - trace_re(a)).max(0.0) * (1.0 - trace_re(b)).max(0.0)).sqrt();
    (tn + cross).clamp(0.0, 1.0)
}

/// Purified distance `P = sqrt(1 - F^2)`.
pub fn purified_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let f = fidelity(a, b);
    (1.0 - f * f).max(0.0).sqrt()
}

/// Cluster eigenvalues of a Hermitian matrix: eigenvalues within
/// `cluster_tol` of their neighbor (descending order) are chained into one
/// cluster. Returns the projectors onto each cluster's eigenspace.
pub fn eigenvalue_cluster_projectors(h: &CMatrix, cluster_tol: f64) -> Vec<CMatrix> {
    let (eigenvalues, vectors) = eigh(h);
    let d = h.nrows();
    let mut projectors = Vec::new();
    let mut i = 0;
    while i < d {
        let mut j = i;
        while j + 1 < d && (eigenvalues[j] - eigenvalues[j + 1]).abs() <= cluster_tol {
            j += 1;
        }
        let mut p = CMatrix::zeros(d, d);
        for k in i..=j {
            let v = vectors.column(k);
            p += v * v.adjoint();
        }
        projectors.push(p);
        i = j + 1;
    }
    projectors
}

/// Pinching map associated with `h`: `X -> sum_i P_i X P_i` over the
/// (clustered) spectral projectors of `h`. Returns the pinched matrix and the
/// number of distinct eigenvalue clusters `v(h)`.
pub fn pinch(h: &CMatrix, x: &CMatrix, cluster_tol: f64) -> (CMatrix, usize) {
    let projectors = eigenvalue_cluster_projectors(h, cluster_tol);
    let d = x.nrows();
    let mut out = CMatrix::zeros(d, d);
    for p in &projectors {
        out += p * x * p;
    }
    (hermitize(&out), projectors.len())
}

/// True when `supp(a)` is contained in `supp(b)` (both Hermitian PSD).
pub fn support_contained(a: &CMatrix, b: &CMatrix) -> bool {
    let pa = matrix_power_on_support(a, 0.0);
    let pb = matrix_power_on_support(b, 0.0);
    let escape = trace_re(&(&pa * (identity(a.nrows()) - &pb)));
    escape < SUPPORT_OVERLAP_TOL
}

/// True when `supp(a)` is orthogonal to `supp(b)`.
pub fn supports_orthogonal(a: &CMatrix, b: &CMatrix) -> bool {
    let pa = matrix_power_on_support(a, 0.0);
    let pb = matrix_power_on_support(b, 0.0);
    trace_re(&(&pa * &pb)) < SUPPORT_OVERLAP_TOL
}

/// Isometry (columns) spanning `supp(a) xcap supp(b)`, computed as the null
/// space of `(1 - P_a) + (1 - P_b)` with the intersection rank cutoff.
pub fn support_intersection_isometry(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let d = a.nrows();
    let pa = matrix_power_on_support(a, 0.0);
    let pb = matrix_power_on_support(b, 0.0);
    let k = (identity(d) - &pa) + (identity(d) - &pb);
    let (eigenvalues, vectors) = eigh(&k);
    // eigenvalues descending; the null space sits at the tail
    let cols: Vec<usize> = (0..d)
        .filter(|&i| eigenvalues[i].abs() < INTERSECTION_CUTOFF)
        .collect();
    let mut bmat = CMatrix::zeros(d, cols.len());
    for (j, &i) in cols.iter().enumerate() {
        bmat.set_column(j, &vectors.column(i));
    }
    bmat
}

/// Simultaneously diagonalize a commuting PSD pair; returns the common
/// eigenbasis (columns) and the two eigenvalue vectors.
pub fn simultaneous_diagonalization(
    rho: &CMatrix,
    sigma: &CMatrix,
) -> Option<(CMatrix, Vec<f64>, Vec<f64>)> {
    if commutator_norm(rho, sigma) > 1e-8 {
        return None;
    }
    let d = rho.nrows();
    // diagonalize sigma, then rho inside each sigma eigenvalue cluster
    let (sig_eigs, sig_vecs) = eigh(sigma);
    let mut basis = CMatrix::zeros(d, d);
    let mut p = vec![0.0; d];
    let mut q = vec![0.0; d];
    let mut col = 0usize;
    let mut i = 0usize;
    while i < d {
        let mut j = i;
        while j + 1 < d && (sig_eigs[j] - sig_eigs[j + 1]).abs() <= 1e-9 * (1.0 + sig_eigs[i].abs())
        {
            j += 1;
        }
        let k = j - i + 1;
        let mut block_basis = CMatrix::zeros(d, k);
        for (c, idx) in (i..=j).enumerate() {
            block_basis.set_column(c, &sig_vecs.column(idx));
        }
        let rho_block = hermitize(&(block_basis.adjoint() * rho * &block_basis));
        let (r_eigs, r_vecs) = eigh(&rho_block);
        let rotated = &block_basis * r_vecs;
        for c in 0..k {
            basis.set_column(col, &rotated.column(c));
            p[col] = r_eigs[c].max(0.0);
            q[col] = sig_eigs[i].max(0.0);
            col += 1;
        }
        i = j + 1;
    }
    Some((basis, p, q))
}

/// Von Neumann entropy in bits.
pub fn entropy_bits(rho: &CMatrix) -> f64 {
    let s = spectral(rho, None).expect("entropy: non-Hermitian input");
    -s.eigenvalues
        .iter()
        .filter(|&&lam| lam > s.cutoff)
        .map(|&lam| lam * lam.log2())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density_mat, random_hermitian, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(values: &[f64]) -> CMatrix {
        CMatrix::from_fn(values.len(), values.len(), |i, j| {
            if i == j {
                re(values[i])
            } else {
                re(0.0)
            }
        })
    }

    #[test]
    fn spectral_identity_and_projector() {
        let s = spectral(&identity(2), None).unwrap();
        assert_eq!(s.support_rank, 2);
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((s.eigenvalues[1] - 1.0).abs() < 1e-12);

        let s = spectral(&diag(&[1.0, 0.0]), None).unwrap();
        assert_eq!(s.support_rank, 1);
    }

    #[test]
    fn spectral_reconstruction_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let m = random_hermitian(3, &mut rng);
            let s = spectral(&m, None).unwrap();
            let rebuilt = s
                .vectors
                .clone()
                * CMatrix::from_fn(3, 3, |i, j| {
                    if i == j {
                        re(s.eigenvalues[i])
                    } else {
                        re(0.0)
                    }
                })
                * s.vectors.adjoint();
            let scale = max_abs(&m).max(1.0);
            assert!(max_abs(&(rebuilt - &m)) <= 1e-9 * scale);
            // eigenvector matrix unitary
            let resid = max_abs(&(s.vectors.adjoint() * &s.vectors - identity(3)));
            assert!(resid <= 1e-9);
        }
    }

    #[test]
    fn spectral_rejects_non_hermitian() {
        let mut m = identity(2);
        m[(0, 1)] = Complex64::new(0.5, 0.0);
        assert!(matches!(
            spectral(&m, None),
            Err(CoreError::NotHermitian { .. })
        ));
    }

    #[test]
    fn power_on_support_examples() {
        let m = matrix_power_on_support(&diag(&[4.0, 0.0]), 0.5);
        assert!(max_abs(&(m - diag(&[2.0, 0.0]))) < 1e-12);

        let m = matrix_power_on_support(&diag(&[2.0, 3.0]), -1.0);
        assert!(max_abs(&(m - diag(&[0.5, 1.0 / 3.0]))) < 1e-12);
    }

    #[test]
    fn power_two_matches_direct_multiplication() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let rho = random_density_mat(4, 4, &mut rng);
            let sq = matrix_power_on_support(&rho, 2.0);
            assert!(max_abs(&(sq - &rho * &rho)) <= 1e-9);
        }
    }

    #[test]
    fn log_on_support_examples() {
        let m = matrix_log2_on_support(&diag(&[2.0, 0.0])).unwrap();
        assert!(max_abs(&(m - diag(&[1.0, 0.0]))) < 1e-10);
        let m = matrix_log2_on_support(&identity(2)).unwrap();
        assert!(max_abs(&m) < 1e-10);
        assert!(matches!(
            matrix_log2_on_support(&CMatrix::zeros(2, 2)),
            Err(CoreError::ZeroMatrix)
        ));
    }

    #[test]
    fn log_exp_roundtrip_on_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let rho = random_density_mat(3, 3, &mut rng);
            let back = matrix_exp2(&matrix_log2_on_support(&rho).unwrap());
            assert!(max_abs(&(back - &rho)) <= 1e-8);
        }
    }

    #[test]
    fn partial_trace_product_and_entangled() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_density_mat(2, 2, &mut rng);
        let b = random_density_mat(3, 3, &mut rng);
        let ab = kron(&a, &b);
        let got = partial_trace(&ab, &[2, 3], &[0]).unwrap();
        assert!(max_abs(&(got - &a)) <= 1e-12);

        // maximally entangled qubit pair
        let mut psi = CVector::zeros(4);
        psi[0] = re(1.0 / 2f64.sqrt());
        psi[3] = re(1.0 / 2f64.sqrt());
        let rho = &psi * psi.adjoint();
        let red = partial_trace(&rho, &[2, 2], &[0]).unwrap();
        assert!(max_abs(&(red - identity(2).scale(0.5))) <= 1e-12);
    }

    #[test]
    fn partial_trace_matches_index_summation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random_density_mat(6, 6, &mut rng);
        // naive double-loop oracle for dims [2, 3], keeping subsystem 0
        let mut oracle = CMatrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                for e in 0..3 {
                    oracle[(i, j)] += m[(i * 3 + e, j * 3 + e)];
                }
            }
        }
        let got = partial_trace(&m, &[2, 3], &[0]).unwrap();
        assert!(max_abs(&(got - oracle)) <= 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_index() {
        let m = identity(4);
        assert!(partial_trace(&m, &[2, 2], &[2]).is_err());
    }

    #[test]
    fn permute_subsystems_swap_matches_kron_swap() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = random_density_mat(2, 2, &mut rng);
        let b = random_density_mat(3, 3, &mut rng);
        let ab = kron(&a, &b);
        let ba = kron(&b, &a);
        let got = permute_subsystems(&ab, &[2, 3], &[1, 0]).unwrap();
        assert!(max_abs(&(got - ba)) <= 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let rho = random_density_mat(3, 3, &mut rng);
        assert!((fidelity(&rho, &rho) - 1.0).abs() <= 1e-9);

        let zero = diag(&[1.0, 0.0]);
        let one = diag(&[0.0, 1.0]);
        assert!(fidelity(&zero, &one).abs() <= 1e-12);

        // pure |0> vs maximally mixed
        let f = fidelity(&zero, &identity(2).scale(0.5));
        assert!((f - 1.0 / 2f64.sqrt()).abs() <= 1e-10);
        let p = purified_distance(&zero, &identity(2).scale(0.5));
        assert!((p - 1.0 / 2f64.sqrt()).abs() <= 1e-10);
    }

    #[test]
    fn purified_distance_triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..25 {
            let a = random_density_mat(3, 3, &mut rng);
            let b = random_density_mat(3, 2, &mut rng);
            let c = random_density_mat(3, 3, &mut rng);
            let pab = purified_distance(&a, &b);
            let pbc = purified_distance(&b, &c);
            let pac = purified_distance(&a, &c);
            assert!(pac <= pab + pbc + 1e-9);
        }
    }

    #[test]
    fn pinch_identity_and_two_level() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let x = random_density_mat(2, 2, &mut rng);
        let (pinched, v) = pinch(&identity(2), &x, EIG_CLUSTER_TOL);
        assert_eq!(v, 1);
        assert!(max_abs(&(pinched - &x)) <= 1e-12);

        let h = diag(&[0.0, 1.0]);
        let (pinched, v) = pinch(&h, &x, EIG_CLUSTER_TOL);
        assert_eq!(v, 2);
        assert!(pinched[(0, 1)].norm() <= 1e-12);
        assert!((pinched[(0, 0)] - x[(0, 0)]).norm() <= 1e-12);
    }

    #[test]
    fn pinching_inequality_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..20 {
            let h = random_hermitian(3, &mut rng);
            let sigma = random_density_mat(3, 3, &mut rng);
            let (pinched, v) = pinch(&h, &sigma, EIG_CLUSTER_TOL);
            let diff = pinched.scale(v as f64) - &sigma;
            let s = spectral(&diff, None).unwrap();
            let min_eig = s.eigenvalues.last().copied().unwrap();
            assert!(min_eig >= -1e-9, "pinching inequality violated: {min_eig}");
        }
    }

    #[test]
    fn support_predicates() {
        let a = diag(&[0.5, 0.5, 0.0]);
        let b = diag(&[0.3, 0.3, 0.4]);
        let c = diag(&[0.0, 0.0, 1.0]);
        assert!(support_contained(&a, &b));
        assert!(!support_contained(&b, &a));
        assert!(supports_orthogonal(&a, &c));
        let isom = support_intersection_isometry(&a, &b);
        assert_eq!(isom.ncols(), 2);
        let isom = support_intersection_isometry(&a, &c);
        assert_eq!(isom.ncols(), 0);
    }

    #[test]
    fn entropy_of_uniform() {
        assert!((entropy_bits(&identity(4).scale(0.25)) - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn unitary_conjugation_preserves_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let rho = random_density_mat(3, 3, &mut rng);
        let u = random_unitary(3, &mut rng);
        let rotated = &u * &rho * u.adjoint();
        let e1 = spectral(&rho, None).unwrap().eigenvalues;
        let e2 = spectral(&rotated, None).unwrap().eigenvalues;
        for (a, b) in e1.iter().zip(&e2) {
            assert!((a - b).abs() <= 1e-10);
        }
    }
}
