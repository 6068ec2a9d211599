//! Finite-blocklength Monte Carlo simulators for the two operational tasks:
//! privacy amplification of a classical source against a quantum adversary,
//! and (catalytic) decoupling of a system from a reference, plus the
//! one-shot Haar decoupling inequality.
//!
//! Simulated schemes illustrate trends and provide the optimality-floor
//! checks: every simulated decay rate must sit above the theorem exponent.
//! Achievability is only asymptotic, so no acceptance threshold is attached
//! to the gap from above.

use rand::Rng;

use crate::error::CoreError;
use crate::linalg::{self, CMatrix};
use crate::optimize::{self, Domain, OptimizerConfig};
use crate::random;
use crate::state::{CqState, DensityMatrix};

/// A hash function `X^n -> Z` stored as an explicit table over the
/// lexicographic enumeration of `X^n` (most significant symbol first).
#[derive(Debug, Clone)]
pub struct HashFunction {
    pub n: usize,
    pub alphabet: usize,
    pub z_size: usize,
    table: Vec<usize>,
}

impl HashFunction {
    pub fn from_table(
        n: usize,
        alphabet: usize,
        z_size: usize,
        table: Vec<usize>,
    ) -> Result<Self, CoreError> {
        let domain = alphabet.pow(n as u32);
        if table.len() != domain {
            return Err(CoreError::DimensionMismatch {
                expected: domain,
                got: table.len(),
            });
        }
        if z_size == 0 || table.iter().any(|&z| z >= z_size) {
            return Err(CoreError::BadDims {
                dims: vec![z_size],
                reason: "hash outputs must lie in the declared alphabet".into(),
            });
        }
        Ok(Self {
            n,
            alphabet,
            z_size,
            table,
        })
    }

    /// Uniformly random function table.
    pub fn random(n: usize, alphabet: usize, z_size: usize, rng: &mut impl Rng) -> Self {
        let domain = alphabet.pow(n as u32);
        let table = (0..domain).map(|_| rng.gen_range(0..z_size)).collect();
        Self {
            n,
            alphabet,
            z_size,
            table,
        }
    }

    /// Injective embedding of `X^n` into a larger output alphabet.
    pub fn injective(n: usize, alphabet: usize, z_size: usize) -> Result<Self, CoreError> {
        let domain = alphabet.pow(n as u32);
        if z_size < domain {
            return Err(CoreError::BadDims {
                dims: vec![z_size, domain],
                reason: "injective embedding needs |Z| >= |X|^n".into(),
            });
        }
        Ok(Self {
            n,
            alphabet,
            z_size,
            table: (0..domain).collect(),
        })
    }

    /// Constant hash mapping everything to `z0`.
    pub fn constant(n: usize, alphabet: usize, z_size: usize, z0: usize) -> Self {
        let domain = alphabet.pow(n as u32);
        Self {
            n,
            alphabet,
            z_size,
            table: vec![z0.min(z_size - 1); domain],
        }
    }

    pub fn apply(&self, x_index: usize) -> usize {
        self.table[x_index]
    }

    /// Compose with a permutation of the output alphabet.
    pub fn relabeled(&self, perm: &[usize]) -> Self {
        Self {
            n: self.n,
            alphabet: self.alphabet,
            z_size: self.z_size,
            table: self.table.iter().map(|&z| perm[z]).collect(),
        }
    }
}

/// Security parameter of privacy amplification:
/// `max over omega_E of F^2(P_f(rho_XE^{(x) n}), pi_Z (x) omega_E)`.
///
/// The hashed state is block diagonal over `Z`, so the fidelity decomposes
/// per block and the concave maximization over `omega_E` runs by mirror
/// ascent (finite-difference gradients; joint concavity certifies the
/// optimum).
pub fn pa_performance(
    cq: &CqState,
    f: &HashFunction,
    config: &OptimizerConfig,
) -> Result<f64, CoreError> {
    if f.alphabet != cq.alphabet_size() {
        return Err(CoreError::DimensionMismatch {
            expected: cq.alphabet_size(),
            got: f.alphabet,
        });
    }
    let d_env = cq.dim_e().pow(f.n as u32);
    if d_env > 1024 {
        return Err(CoreError::SizeLimit(format!(
            "environment dimension {d_env} exceeds 10 qubits"
        )));
    }
    let big = cq.tensor_power(f.n);
    // subnormalized environment blocks per output symbol
    let mut blocks: Vec<CMatrix> = vec![CMatrix::zeros(d_env, d_env); f.z_size];
    for (x, (p, cond)) in big.probs().iter().zip(big.cond_states()).enumerate() {
        if *p > 0.0 {
            blocks[f.apply(x)] += cond.scale(*p);
        }
    }
    let sqrt_blocks: Vec<Option<CMatrix>> = blocks
        .iter()
        .map(|s| {
            if linalg::trace_re(s) > 1e-15 {
                Some(linalg::matrix_power_on_support(s, 0.5))
            } else {
                None
            }
        })
        .collect();
    let inv_sqrt_z = 1.0 / (f.z_size as f64).sqrt();
    let mut fidelity = |omega: &CMatrix| -> f64 {
        let sqrt_omega = linalg::matrix_power_on_support(omega, 0.5);
        let mut total = 0.0;
        for sb in sqrt_blocks.iter().flatten() {
            total += linalg::trace_norm(&(sb * &sqrt_omega));
        }
        total * inv_sqrt_z
    };
    let res = optimize::maximize_over_states(&mut fidelity, &Domain::full(d_env), config, None);
    let f_val = res.value.clamp(0.0, 1.0);
    Ok(f_val * f_val)
}

/// Hash sampling strategy for the decay experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HashStrategy {
    /// Independent uniformly random tables.
    Random,
    /// Keep every sample but report the best of `k` candidates per point.
    BestOfK(usize),
    /// The deterministic injective embedding (needs `|Z| >= |X|^n`).
    Injective,
}

/// One row of the decay table.
#[derive(Debug, Clone)]
pub struct PaDecayRow {
    pub n: usize,
    pub z_size: usize,
    /// `-(1/n) log2 performance` per sampled hash.
    pub rates: Vec<f64>,
    /// Best (smallest) observed decay rate.
    pub best_rate: f64,
}

/// Sample hash functions at rate `r` and record the decay of the security
/// parameter per blocklength.
pub fn pa_decay_experiment(
    cq: &CqState,
    r: f64,
    n_list: &[usize],
    strategy: HashStrategy,
    seed: u64,
    config: &OptimizerConfig,
) -> Result<Vec<PaDecayRow>, CoreError> {
    let mut rows = Vec::with_capacity(n_list.len());
    for (i, &n) in n_list.iter().enumerate() {
        // ceiling keeps the realized extraction rate at or above r, which is
        // what the converse floor assumes
        let z_size = (n as f64 * r).exp2().ceil().max(1.0) as usize;
        let mut rng = random::rng_from_seed(random::child_seed(seed, i as u64));
        let hashes: Vec<HashFunction> = match strategy {
            HashStrategy::Injective => vec![HashFunction::injective(n, cq.alphabet_size(), z_size)?],
            HashStrategy::Random => vec![HashFunction::random(n, cq.alphabet_size(), z_size, &mut rng)],
            HashStrategy::BestOfK(k) => (0..k.max(1))
                .map(|_| HashFunction::random(n, cq.alphabet_size(), z_size, &mut rng))
                .collect(),
        };
        let mut rates = Vec::with_capacity(hashes.len());
        for h in &hashes {
            let perf = pa_performance(cq, h, config)?;
            rates.push(-perf.log2() / n as f64);
        }
        let best_rate = rates.iter().cloned().fold(f64::INFINITY, f64::min);
        rows.push(PaDecayRow {
            n,
            z_size,
            rates,
            best_rate,
        });
    }
    Ok(rows)
}

/// A decoupling scheme: an optional catalyst state on `A'` and a unitary
/// from `A (x) A'` onto `A-bar (x) A-tilde`; `A-tilde` is discarded.
#[derive(Debug, Clone)]
pub struct DecouplingScheme {
    pub catalyst: Option<DensityMatrix>,
    pub unitary: CMatrix,
    pub dim_bar: usize,
    pub dim_tilde: usize,
}

impl DecouplingScheme {
    pub fn new(
        catalyst: Option<DensityMatrix>,
        unitary: CMatrix,
        dim_bar: usize,
        dim_tilde: usize,
    ) -> Result<Self, CoreError> {
        let d = unitary.nrows();
        if unitary.ncols() != d || dim_bar * dim_tilde != d {
            return Err(CoreError::BadDims {
                dims: vec![dim_bar, dim_tilde, d],
                reason: "|A-bar| * |A-tilde| must equal the unitary dimension".into(),
            });
        }
        let resid = linalg::max_abs(&(unitary.adjoint() * &unitary - linalg::identity(d)));
        if resid > 1e-10 {
            return Err(CoreError::NotHermitian {
                residual: resid,
                tol: 1e-10,
            });
        }
        Ok(Self {
            catalyst,
            unitary,
            dim_bar,
            dim_tilde,
        })
    }

    fn catalyst_dim(&self) -> usize {
        self.catalyst.as_ref().map(|c| c.total_dim()).unwrap_or(1)
    }
}

/// Decoupling performance
/// `max over omega_R, omega_Abar of F^2(tr_Atilde[U (rho (x) catalyst) U^dag],
/// omega_R (x) omega_Abar)` by alternating concave maximization over the two
/// marginals with multistart.
pub fn dec_performance(
    rho_ra: &DensityMatrix,
    scheme: &DecouplingScheme,
    config: &OptimizerConfig,
) -> Result<f64, CoreError> {
    let (d_r, d_a) = match rho_ra.dims() {
        [r, a] => (*r, *a),
        other => {
            return Err(CoreError::BadDims {
                dims: other.to_vec(),
                reason: "expected bipartite R:A state".into(),
            })
        }
    };
    let d_cat = scheme.catalyst_dim();
    if scheme.unitary.nrows() != d_a * d_cat {
        return Err(CoreError::DimensionMismatch {
            expected: d_a * d_cat,
            got: scheme.unitary.nrows(),
        });
    }
    if d_r * d_a * d_cat > 64 {
        return Err(CoreError::SizeLimit(format!(
            "total dimension {} exceeds 64",
            d_r * d_a * d_cat
        )));
    }
    let input = match &scheme.catalyst {
        Some(c) => linalg::kron(rho_ra.matrix(), c.matrix()),
        None => rho_ra.matrix().clone(),
    };
    let big_u = linalg::kron(&linalg::identity(d_r), &scheme.unitary);
    let rotated = &big_u * input * big_u.adjoint();
    let tau = linalg::partial_trace(
        &rotated,
        &[d_r, scheme.dim_bar, scheme.dim_tilde],
        &[0, 1],
    )?;

    // alternating concave maximization over the product marginals
    let inner = config.inner();
    let mut rng = random::rng_from_seed(config.seed.wrapping_add(23));
    let mut best = 0.0f64;
    for start in 0..config.multistart_count.max(1) {
        let (mut om_r, mut om_b) = if start == 0 {
            (
                linalg::partial_trace(&tau, &[d_r, scheme.dim_bar], &[0])?,
                linalg::partial_trace(&tau, &[d_r, scheme.dim_bar], &[1])?,
            )
        } else {
            (
                random::random_density_mat(d_r, d_r, &mut rng),
                random::random_density_mat(scheme.dim_bar, scheme.dim_bar, &mut rng),
            )
        };
        let mut value = 0.0f64;
        for _sweep in 0..40 {
            let mut f_r = |om: &CMatrix| linalg::fidelity(&tau, &linalg::kron(om, &om_b));
            let res_r = optimize::maximize_over_states(
                &mut f_r,
                &Domain::full(d_r),
                &inner,
                Some(&[om_r.clone()]),
            );
            om_r = res_r.minimizer;
            let mut f_b = |om: &CMatrix| linalg::fidelity(&tau, &linalg::kron(&om_r, om));
            let res_b = optimize::maximize_over_states(
                &mut f_b,
                &Domain::full(scheme.dim_bar),
                &inner,
                Some(&[om_b.clone()]),
            );
            om_b = res_b.minimizer;
            let new_value = res_b.value;
            let gain = new_value - value;
            value = new_value;
            if gain.abs() < inner.convergence_tol {
                break;
            }
        }
        if value > best {
            best = value;
        }
    }
    let best = best.clamp(0.0, 1.0);
    Ok(best * best)
}

/// Monte Carlo check of the one-shot Haar decoupling inequality: the Haar
/// average of `|| sigma_RAbar(U) - psi_R (x) sigma_Abar(U) ||_1^2` against
/// the analytic bound `(|R||A|/|Atilde|^2)(tr psi_RA^2 + tr psi_R^2 tr psi_A^2)`.
#[derive(Debug, Clone)]
pub struct HaarCheck {
    pub samples: usize,
    pub mean: f64,
    pub std_err: f64,
    pub bound: f64,
    /// `mean <= bound + 3 std_err`.
    pub holds: bool,
}

pub fn haar_decoupling_check(
    psi_ra: &DensityMatrix,
    dim_bar: usize,
    dim_tilde: usize,
    samples: usize,
    seed: u64,
) -> Result<HaarCheck, CoreError> {
    if samples < 100 {
        return Err(CoreError::InsufficientSamples {
            need: 100,
            got: samples,
        });
    }
    let (d_r, d_a) = match psi_ra.dims() {
        [r, a] => (*r, *a),
        other => {
            return Err(CoreError::BadDims {
                dims: other.to_vec(),
                reason: "expected bipartite R:A state".into(),
            })
        }
    };
    if dim_bar * dim_tilde != d_a {
        return Err(CoreError::BadDims {
            dims: vec![dim_bar, dim_tilde, d_a],
            reason: "split must multiply to |A|".into(),
        });
    }
    if d_a > 16 || d_r > 4 {
        return Err(CoreError::SizeLimit(format!(
            "|A| = {d_a} (max 16), |R| = {d_r} (max 4)"
        )));
    }
    let psi_r = psi_ra.partial_trace(&[0])?.matrix().clone();
    let psi_a = psi_ra.partial_trace(&[1])?.matrix().clone();
    let purity = |m: &CMatrix| linalg::trace_re(&(m * m));
    let bound = (d_r * d_a) as f64 / (dim_tilde * dim_tilde) as f64
        * (purity(psi_ra.matrix()) + purity(&psi_r) * purity(&psi_a));

    let mut rng = random::rng_from_seed(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let u = random::random_unitary(d_a, &mut rng);
        let big_u = linalg::kron(&linalg::identity(d_r), &u);
        let rotated = &big_u * psi_ra.matrix() * big_u.adjoint();
        let sigma_rb = linalg::partial_trace(&rotated, &[d_r, dim_bar, dim_tilde], &[0, 1])?;
        let sigma_b = linalg::partial_trace(&sigma_rb, &[d_r, dim_bar], &[1])?;
        let diff = &sigma_rb - linalg::kron(&psi_r, &sigma_b);
        let t = linalg::trace_norm(&diff);
        let t2 = t * t;
        sum += t2;
        sum_sq += t2 * t2;
    }
    let mean = sum / samples as f64;
    let var = (sum_sq / samples as f64 - mean * mean).max(0.0);
    let std_err = (var / samples as f64).sqrt();
    Ok(HaarCheck {
        samples,
        mean,
        std_err,
        bound,
        holds: mean <= bound + 3.0 * std_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::{exponent_pa, CurveConfig};
    use crate::linalg::identity;
    use crate::random::{random_cq, random_unitary, rng_from_seed};
    use nalgebra::DVector;
    use num_complex::Complex64;

    fn cfg() -> OptimizerConfig {
        OptimizerConfig {
            multistart_count: 2,
            ..Default::default()
        }
    }

    fn uniform_bit_trivial_env() -> CqState {
        CqState::new(vec![0.5, 0.5], vec![identity(1), identity(1)]).unwrap()
    }

    fn maximally_entangled_pair() -> DensityMatrix {
        let mut psi = DVector::zeros(4);
        psi[0] = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
        psi[3] = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
        DensityMatrix::from_pure(vec![2, 2], &psi).unwrap()
    }

    #[test]
    fn injective_hash_performance_closed_form() {
        let cq = uniform_bit_trivial_env();
        for (n, z) in [(2usize, 16usize), (3, 64)] {
            let f = HashFunction::injective(n, 2, z).unwrap();
            let perf = pa_performance(&cq, &f, &cfg()).unwrap();
            let expected = 2f64.powi(n as i32) / z as f64;
            assert!((perf - expected).abs() <= 1e-10, "{perf} vs {expected}");
        }
    }

    #[test]
    fn constant_hash_performance_is_inverse_z() {
        let mut rng = rng_from_seed(1);
        let cq = random_cq(2, 2, &mut rng);
        let f = HashFunction::constant(1, 2, 4, 0);
        let perf = pa_performance(&cq, &f, &cfg()).unwrap();
        assert!((perf - 0.25).abs() <= 1e-6, "{perf}");
    }

    #[test]
    fn single_output_is_trivially_perfect() {
        let mut rng = rng_from_seed(2);
        let cq = random_cq(2, 2, &mut rng);
        let f = HashFunction::constant(1, 2, 1, 0);
        let perf = pa_performance(&cq, &f, &cfg()).unwrap();
        assert!((perf - 1.0).abs() <= 1e-6, "{perf}");
    }

    #[test]
    fn performance_invariant_under_output_relabeling() {
        let mut rng = rng_from_seed(3);
        let cq = random_cq(2, 2, &mut rng);
        let f = HashFunction::random(2, 2, 3, &mut rng);
        let g = f.relabeled(&[2, 0, 1]);
        let a = pa_performance(&cq, &f, &cfg()).unwrap();
        let b = pa_performance(&cq, &g, &cfg()).unwrap();
        assert!((a - b).abs() <= 1e-10);
    }

    #[test]
    fn decay_experiment_exact_rate_for_injective_hash() {
        // uniform bit, trivial E, r = 2: rate is exactly r - 1 = 1 at every n
        let cq = uniform_bit_trivial_env();
        let rows =
            pa_decay_experiment(&cq, 2.0, &[2, 4, 6], HashStrategy::Injective, 7, &cfg()).unwrap();
        for row in &rows {
            assert!((row.best_rate - 1.0).abs() <= 1e-9, "n={}: {}", row.n, row.best_rate);
        }
    }

    #[test]
    fn sampled_hashes_respect_optimality_floor() {
        let mut rng = rng_from_seed(4);
        let cq = random_cq(2, 2, &mut rng);
        let r = 1.4;
        let theorem = exponent_pa(&cq, r, &CurveConfig::with_grid(97), &cfg())
            .unwrap()
            .supremum;
        let rows = pa_decay_experiment(
            &cq,
            r,
            &[1, 2],
            HashStrategy::BestOfK(8),
            11,
            &cfg(),
        )
        .unwrap();
        for row in &rows {
            for &rate in &row.rates {
                assert!(
                    rate >= theorem - 1e-6,
                    "n={}: sampled rate {rate} below theorem {theorem}",
                    row.n
                );
            }
        }
    }

    #[test]
    fn rates_near_zero_below_entropy() {
        // r below H(X|E): no converse pressure, best sampled rates near 0
        let cq = uniform_bit_trivial_env();
        let rows =
            pa_decay_experiment(&cq, 0.5, &[2, 4], HashStrategy::BestOfK(8), 3, &cfg()).unwrap();
        for row in &rows {
            assert!(row.best_rate <= 0.35, "n={}: {}", row.n, row.best_rate);
        }
    }

    #[test]
    fn dec_performance_product_state_identity_scheme() {
        let mut rng = rng_from_seed(5);
        let a = crate::random::random_density_mat(2, 2, &mut rng);
        let b = crate::random::random_density_mat(2, 2, &mut rng);
        let rho = DensityMatrix::new(vec![2, 2], linalg::kron(&a, &b), true).unwrap();
        // keep everything (|A-tilde| = 1), U = identity
        let scheme = DecouplingScheme::new(None, identity(2), 2, 1).unwrap();
        let perf = dec_performance(&rho, &scheme, &cfg()).unwrap();
        assert!((perf - 1.0).abs() <= 1e-6, "{perf}");
    }

    #[test]
    fn dec_performance_discard_all_of_entangled_pair() {
        let rho = maximally_entangled_pair();
        let scheme = DecouplingScheme::new(None, identity(2), 1, 2).unwrap();
        let perf = dec_performance(&rho, &scheme, &cfg()).unwrap();
        // after discarding A the state on R is I/2: best omega_R = I/2
        assert!((perf - 1.0).abs() <= 1e-6, "{perf}");
    }

    #[test]
    fn dec_performance_keep_entangled_pair_is_half() {
        // maximally entangled pair, keep everything: best product fidelity
        // squared is 1/2
        let rho = maximally_entangled_pair();
        let scheme = DecouplingScheme::new(None, identity(2), 2, 1).unwrap();
        let perf = dec_performance(&rho, &scheme, &cfg()).unwrap();
        assert!((perf - 0.5).abs() <= 1e-4, "{perf}");
    }

    #[test]
    fn dec_performance_invariant_under_local_rotation_of_r() {
        let mut rng = rng_from_seed(6);
        let rho = DensityMatrix::new(
            vec![2, 2],
            crate::random::random_density_mat(4, 4, &mut rng),
            true,
        )
        .unwrap();
        let u_a = random_unitary(2, &mut rng);
        let scheme = DecouplingScheme::new(None, u_a, 1, 2).unwrap();
        let perf = dec_performance(&rho, &scheme, &cfg()).unwrap();
        // rotate R locally
        let u_r = random_unitary(2, &mut rng);
        let big = linalg::kron(&u_r, &identity(2));
        let rotated = DensityMatrix::new(
            vec![2, 2],
            linalg::hermitize(&(&big * rho.matrix() * big.adjoint())),
            true,
        )
        .unwrap();
        let scheme2 = DecouplingScheme::new(None, random_unitary(2, &mut rng), 1, 2).unwrap();
        let perf_rot = dec_performance(&rotated, &scheme2, &cfg()).unwrap();
        // discarding all of A leaves only the R marginal, whose rotation is
        // absorbed by the omega_R maximization; scheme unitary is irrelevant
        assert!((perf - perf_rot).abs() <= 1e-6, "{perf} vs {perf_rot}");
    }

    #[test]
    fn catalytic_scheme_runs() {
        let mut rng = rng_from_seed(7);
        let rho = DensityMatrix::new(
            vec![2, 2],
            crate::random::random_density_mat(4, 4, &mut rng),
            true,
        )
        .unwrap();
        let catalyst =
            DensityMatrix::new(vec![2], identity(2).scale(0.5), true).unwrap();
        let u = random_unitary(4, &mut rng);
        let scheme = DecouplingScheme::new(Some(catalyst), u, 2, 2).unwrap();
        let perf = dec_performance(&rho, &scheme, &cfg()).unwrap();
        assert!((0.0..=1.0).contains(&perf));
    }

    #[test]
    fn haar_check_product_pure_state() {
        let mut rng = rng_from_seed(8);
        let psi_r = crate::random::random_pure(2, &mut rng);
        let psi_a = crate::random::random_pure(4, &mut rng);
        let mut joint = DVector::zeros(8);
        for i in 0..2 {
            for j in 0..4 {
                joint[i * 4 + j] = psi_r[i] * psi_a[j];
            }
        }
        let psi = DensityMatrix::from_pure(vec![2, 4], &joint).unwrap();
        let check = haar_decoupling_check(&psi, 2, 2, 150, 5).unwrap();
        assert!(check.holds, "mean {} vs bound {}", check.mean, check.bound);
    }

    #[test]
    fn haar_check_entangled_embedded_pair() {
        // maximally entangled |R|=2 with a qubit subspace of |A|=4
        let mut joint = DVector::zeros(8);
        joint[0] = Complex64::new(1.0 / 2f64.sqrt(), 0.0); // |0>|0>
        joint[5] = Complex64::new(1.0 / 2f64.sqrt(), 0.0); // |1>|1>
        let psi = DensityMatrix::from_pure(vec![2, 4], &joint).unwrap();
        let check = haar_decoupling_check(&psi, 2, 2, 200, 9).unwrap();
        assert!(check.holds, "mean {} vs bound {}", check.mean, check.bound);
        assert!(check.bound > 0.0);
    }

    #[test]
    fn haar_check_refuses_undersampling() {
        let psi = maximally_entangled_pair();
        assert!(matches!(
            haar_decoupling_check(&psi, 1, 2, 50, 1),
            Err(CoreError::InsufficientSamples { .. })
        ));
    }
}
