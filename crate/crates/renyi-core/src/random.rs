//! Seeded generators for states, unitaries and channels.
//!
//! Every generator is deterministic given its seed (or the caller's RNG);
//! nothing here touches global RNG state. Haar unitaries come from the
//! QR decomposition of a Ginibre matrix with the usual phase correction,
//! channels from a Haar isometry followed by a partial trace (Stinespring
//! form).


use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::CoreError;
use crate::linalg::{self, CMatrix, CVector};
use crate::state::{CqState, DensityMatrix};

/// The crate-wide deterministic RNG.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive a child seed; used to make Monte Carlo samples independent and
/// replayable.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(index.wrapping_mul(0xbf58_476d_1ce4_e5b9))
}

pub fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Ginibre matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// GUE-like random Hermitian matrix with O(1) spectral radius.
pub fn random_hermitian(d: usize, rng: &mut impl Rng) -> CMatrix {
    let g = ginibre(d, d, rng);
    (&g + g.adjoint()).scale(0.5 / (d as f64).sqrt())
}

/// Haar-random unitary.
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> CMatrix {
    let g = ginibre(d, d, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let col = q.column(j) * phase;
        q.set_column(j, &col);
    }
    q
}

/// Haar-random pure state vector.
pub fn random_pure(d: usize, rng: &mut impl Rng) -> CVector {
    let mut v = CVector::from_fn(d, |_, _| complex_gaussian(rng));
    let norm = v.norm();
    v /= Complex64::new(norm, 0.0);
    v
}

/// Random rank-`rank` density matrix (Ginibre ensemble).
pub fn random_density_mat(d: usize, rank: usize, rng: &mut impl Rng) -> CMatrix {
    let rank = rank.clamp(1, d);
    let g = ginibre(d, rank, rng);
    let m = &g * g.adjoint();
    let tr = linalg::trace_re(&m);
    linalg::hermitize(&m.scale(1.0 / tr))
}

/// Random density matrix with declared subsystem dimensions.
pub fn random_density(dims: &[usize], rank: usize, seed: u64) -> Result<DensityMatrix, CoreError> {
    let d: usize = dims.iter().product();
    if d == 0 {
        return Err(CoreError::BadDims {
            dims: dims.to_vec(),
            reason: "zero dimension".into(),
        });
    }
    let mut rng = rng_from_seed(seed);
    DensityMatrix::new(dims.to_vec(), random_density_mat(d, rank, &mut rng), true)
}

/// Random probability vector (normalized Gamma(1) samples).
pub fn random_probability_vector(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut p: Vec<f64> = (0..n).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
    let s: f64 = p.iter().sum();
    for x in &mut p {
        *x /= s;
    }
    p
}

/// A CPTP map sampled as a Haar isometry into `output x environment`
/// followed by tracing out the environment.
#[derive(Debug, Clone)]
pub struct RandomChannel {
    /// Isometry of shape `(d_out * env_dim) x d_in`.
    pub isometry: CMatrix,
    pub d_in: usize,
    pub d_out: usize,
    pub env_dim: usize,
}

impl RandomChannel {
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let big = &self.isometry * x * self.isometry.adjoint();
        linalg::partial_trace(&big, &[self.d_out, self.env_dim], &[0])
            .expect("channel dims are consistent by construction")
    }
}

/// Random CPTP channel from `d_in` to `d_out` with the given environment
/// dimension (requires `d_out * env_dim >= d_in`).
pub fn random_cptp(
    d_in: usize,
    d_out: usize,
    env_dim: usize,
    rng: &mut impl Rng,
) -> Result<RandomChannel, CoreError> {
    let big = d_out * env_dim;
    if big < d_in || d_in == 0 {
        return Err(CoreError::BadDims {
            dims: vec![d_in, d_out, env_dim],
            reason: "need d_out * env_dim >= d_in >= 1".into(),
        });
    }
    let u = random_unitary(big, rng);
    let mut isometry = CMatrix::zeros(big, d_in);
    for j in 0..d_in {
        isometry.set_column(j, &u.column(j));
    }
    Ok(RandomChannel {
        isometry,
        d_in,
        d_out,
        env_dim,
    })
}

/// Random classical-quantum state with full-rank conditional states.
pub fn random_cq(alphabet_size: usize, d_e: usize, rng: &mut impl Rng) -> CqState {
    let probs = random_probability_vector(alphabet_size, rng);
    let cond_states = (0..alphabet_size)
        .map(|_| random_density_mat(d_e, d_e, rng))
        .collect();
    CqState::new(probs, cond_states).expect("generated CQ state is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, max_abs, trace_re};

    #[test]
    fn unitary_residual_small() {
        let mut rng = rng_from_seed(1);
        for d in [2, 3, 5] {
            let u = random_unitary(d, &mut rng);
            assert!(max_abs(&(u.adjoint() * &u - identity(d))) <= 1e-10);
        }
    }

    #[test]
    fn density_eigenvalues_nonnegative() {
        let mut rng = rng_from_seed(2);
        for _ in 0..10 {
            let rho = random_density_mat(4, 2, &mut rng);
            let s = linalg::spectral(&rho, None).unwrap();
            assert!(s.eigenvalues.iter().all(|&x| x >= -1e-12));
            assert!((trace_re(&rho) - 1.0).abs() <= 1e-12);
            assert_eq!(s.support_rank, 2);
        }
    }

    #[test]
    fn cptp_preserves_trace_on_maximally_mixed() {
        let mut rng = rng_from_seed(3);
        let ch = random_cptp(3, 2, 4, &mut rng).unwrap();
        let out = ch.apply(&identity(3).scale(1.0 / 3.0));
        assert!((trace_re(&out) - 1.0).abs() <= 1e-10);
        let s = linalg::spectral(&out, None).unwrap();
        assert!(s.eigenvalues.iter().all(|&x| x >= -1e-10));
    }

    #[test]
    fn generators_deterministic_per_seed() {
        let a = random_density(&[2, 2], 3, 42).unwrap();
        let b = random_density(&[2, 2], 3, 42).unwrap();
        assert!(max_abs(&(a.matrix() - b.matrix())) == 0.0);
    }
}
