//! Mirror descent over density matrices.
//!
//! The decision variable is a density matrix constrained to a direct sum of
//! blocks (a single full block, a support-compressed block, or the
//! block-diagonal algebra of a classical-quantum state). Iterates follow
//! multiplicative exponentiated-gradient updates
//! `M <- exp(log M - eta * G) / Z`, which keep every block strictly positive
//! definite and the total trace equal to one, so support never collapses
//! mid-run.
//!
//! Gradients are central finite differences in an orthonormal Hermitian
//! operator basis (generalized Gell-Mann plus diagonal units), step 1e-6,
//! which keeps the engine agnostic to the objective kind.

use num_complex::Complex64;
use rand::Rng;

use crate::linalg::{self, CMatrix};
use crate::random;

/// Configuration shared by all iterative minimizations.
#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    /// Convergence tolerance on the objective decrease.
    pub convergence_tol: f64,
    pub multistart_count: usize,
    pub seed: u64,
    /// Finite-difference step in the Hermitian basis.
    pub fd_step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            convergence_tol: 1e-9,
            multistart_count: 8,
            seed: 0,
            fd_step: 1e-6,
        }
    }
}

impl OptimizerConfig {
    /// Cheaper settings for inner loops that are restarted or warm-started
    /// by an outer driver.
    pub fn inner(&self) -> Self {
        Self {
            multistart_count: 1,
            ..self.clone()
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn with_multistarts(&self, count: usize) -> Self {
        Self {
            multistart_count: count.max(1),
            ..self.clone()
        }
    }
}

/// Optimization domain: a direct sum of blocks. Each block is described by an
/// embedding isometry (ambient_dim x block_dim, orthonormal columns, ranges
/// mutually orthogonal); the iterate is `sum_b V_b M_b V_b^dag` with
/// `M_b > 0` and total trace 1.
#[derive(Debug, Clone)]
pub struct Domain {
    embeds: Vec<CMatrix>,
    ambient_dim: usize,
}

impl Domain {
    /// All density matrices on a `d`-dimensional space.
    pub fn full(d: usize) -> Self {
        Self {
            embeds: vec![linalg::identity(d)],
            ambient_dim: d,
        }
    }

    /// Density matrices supported on the column span of `isometry`.
    pub fn supported(isometry: CMatrix) -> Self {
        let ambient_dim = isometry.nrows();
        Self {
            embeds: vec![isometry],
            ambient_dim,
        }
    }

    /// Block-diagonal domain from explicit embeddings.
    pub fn block_diag(embeds: Vec<CMatrix>) -> Self {
        let ambient_dim = embeds.first().map(|e| e.nrows()).unwrap_or(0);
        Self {
            embeds,
            ambient_dim,
        }
    }

    pub fn num_blocks(&self) -> usize {
        self.embeds.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.embeds.iter().map(|e| e.ncols()).collect()
    }

    /// Total compressed dimension.
    pub fn compressed_dim(&self) -> usize {
        self.embeds.iter().map(|e| e.ncols()).sum()
    }

    /// Assemble the ambient matrix from block coordinates.
    pub fn assemble(&self, blocks: &[CMatrix]) -> CMatrix {
        let mut out = CMatrix::zeros(self.ambient_dim, self.ambient_dim);
        for (v, m) in self.embeds.iter().zip(blocks) {
            if v.ncols() > 0 {
                out += v * m * v.adjoint();
            }
        }
        out
    }

    /// Maximally mixed start (uniform over the compressed dimensions).
    pub fn maximally_mixed(&self) -> Vec<CMatrix> {
        let total = self.compressed_dim().max(1);
        self.embeds
            .iter()
            .map(|e| linalg::identity(e.ncols()).scale(1.0 / total as f64))
            .collect()
    }

    /// Random full-rank start with random block weights.
    pub fn random_start(&self, rng: &mut impl Rng) -> Vec<CMatrix> {
        let weights = random::random_probability_vector(self.embeds.len(), rng);
        self.embeds
            .iter()
            .zip(weights)
            .map(|(e, w)| {
                let k = e.ncols();
                if k == 0 {
                    CMatrix::zeros(0, 0)
                } else {
                    random::random_density_mat(k, k, rng).scale(w)
                }
            })
            .collect()
    }
}

/// Orthonormal Hermitian basis of k x k matrices (diagonal units plus
/// symmetric and antisymmetric pair combinations).
pub fn hermitian_basis(k: usize) -> Vec<CMatrix> {
    let mut basis = Vec::with_capacity(k * k);
    for i in 0..k {
        let mut m = CMatrix::zeros(k, k);
        m[(i, i)] = Complex64::new(1.0, 0.0);
        basis.push(m);
    }
    let inv_sqrt2 = 1.0 / 2f64.sqrt();
    for i in 0..k {
        for j in (i + 1)..k {
            let mut m = CMatrix::zeros(k, k);
            m[(i, j)] = Complex64::new(inv_sqrt2, 0.0);
            m[(j, i)] = Complex64::new(inv_sqrt2, 0.0);
            basis.push(m);
            let mut m = CMatrix::zeros(k, k);
            m[(i, j)] = Complex64::new(0.0, inv_sqrt2);
            m[(j, i)] = Complex64::new(0.0, -inv_sqrt2);
            basis.push(m);
        }
    }
    basis
}

/// Result of a domain minimization.
#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub value: f64,
    /// Minimizer assembled in the ambient space.
    pub minimizer: CMatrix,
    /// Minimizer in block coordinates (for warm starts).
    pub blocks: Vec<CMatrix>,
    /// Whether the final iterations met the convergence tolerance.
    pub converged: bool,
    /// Objective decrease over the last accepted step.
    pub last_decrease: f64,
    /// Spread of values across multistarts (0 for a single start).
    pub multistart_spread: f64,
    pub iters: usize,
}

fn log_blocks(blocks: &[CMatrix]) -> Vec<CMatrix> {
    blocks
        .iter()
        .map(|m| {
            if m.ncols() == 0 {
                m.clone()
            } else {
                let (eigs, vecs) = linalg::eigh(m);
                let mut out = CMatrix::zeros(m.nrows(), m.ncols());
                for (i, &lam) in eigs.iter().enumerate() {
                    let v = vecs.column(i);
                    out += v.scale(lam.max(1e-250).ln()) * v.adjoint();
                }
                out
            }
        })
        .collect()
}

fn exp_blocks_normalized(logs: &[CMatrix]) -> Vec<CMatrix> {
    // shift by the global max eigenvalue for numerical stability
    let shift = logs
        .iter()
        .filter(|m| m.ncols() > 0)
        .flat_map(|m| linalg::eigh(m).0)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut exps: Vec<CMatrix> = logs
        .iter()
        .map(|m| {
            if m.ncols() == 0 {
                return m.clone();
            }
            let (eigs, vecs) = linalg::eigh(m);
            let mut out = CMatrix::zeros(m.nrows(), m.ncols());
            for (i, &lam) in eigs.iter().enumerate() {
                let v = vecs.column(i);
                out += v.scale((lam - shift).exp()) * v.adjoint();
            }
            out
        })
        .collect();
    let z: f64 = exps.iter().map(linalg::trace_re).sum();
    for m in &mut exps {
        *m = m.scale(1.0 / z.max(1e-300));
    }
    exps
}

fn fd_gradient(
    f: &mut dyn FnMut(&CMatrix) -> f64,
    domain: &Domain,
    blocks: &[CMatrix],
    center: f64,
    h: f64,
) -> Vec<CMatrix> {
    let mut grads = Vec::with_capacity(blocks.len());
    for (bi, m) in blocks.iter().enumerate() {
        let k = m.ncols();
        let mut g = CMatrix::zeros(k, k);
        for dir in hermitian_basis(k) {
            let mut probe = |sign: f64| -> f64 {
                let mut pb = blocks.to_vec();
                pb[bi] = m + dir.scale(sign * h);
                f(&domain.assemble(&pb))
            };
            let plus = probe(1.0);
            let minus = probe(-1.0);
            let slope = if plus.is_finite() && minus.is_finite() {
                (plus - minus) / (2.0 * h)
            } else if plus.is_finite() {
                (plus - center) / h
            } else if minus.is_finite() {
                (center - minus) / h
            } else {
                0.0
            };
            g += dir.scale(slope);
        }
        grads.push(g);
    }
    grads
}

fn descend_from(
    f: &mut dyn FnMut(&CMatrix) -> f64,
    domain: &Domain,
    start: Vec<CMatrix>,
    config: &OptimizerConfig,
) -> MinimizeResult {
    let mut blocks = start;
    let mut value = f(&domain.assemble(&blocks));
    let mut eta = 1.0f64;
    let mut streak = 0usize;
    let mut converged = false;
    let mut last_decrease = f64::INFINITY;
    let mut iters = 0;
    let n_dirs: usize = domain.block_dims().iter().map(|k| k * k).sum();
    if n_dirs <= 1 {
        // a single degree of freedom is fixed by the trace constraint
        converged = true;
        last_decrease = 0.0;
    } else {
        for it in 0..config.max_iters {
            iters = it + 1;
            let grads = fd_gradient(f, domain, &blocks, value, config.fd_step);
            let logs = log_blocks(&blocks);
            let mut accepted = false;
            let mut trial_eta = eta;
            for _ in 0..30 {
                let stepped: Vec<CMatrix> = logs
                    .iter()
                    .zip(&grads)
                    .map(|(l, g)| l - g.scale(trial_eta))
                    .collect();
                let cand = exp_blocks_normalized(&stepped);
                let cand_value = f(&domain.assemble(&cand));
                if cand_value.is_finite() && cand_value < value {
                    last_decrease = value - cand_value;
                    blocks = cand;
                    value = cand_value;
                    accepted = true;
                    break;
                }
                trial_eta *= 0.5;
            }
            if !accepted {
                converged = true;
                break;
            }
            eta = (trial_eta * 1.4).min(8.0);
            if last_decrease < config.convergence_tol {
                streak += 1;
                if streak >= 3 {
                    converged = true;
                    break;
                }
            } else {
                streak = 0;
            }
        }
    }
    MinimizeResult {
        value,
        minimizer: domain.assemble(&blocks),
        blocks,
        converged,
        last_decrease,
        multistart_spread: 0.0,
        iters,
    }
}

/// Minimize `f` over the density matrices of `domain` by multistart mirror
/// descent. `warm` seeds the first start with block coordinates from a
/// previous solve.
pub fn minimize_over_states(
    f: &mut dyn FnMut(&CMatrix) -> f64,
    domain: &Domain,
    config: &OptimizerConfig,
    warm: Option<&[CMatrix]>,
) -> MinimizeResult {
    let mut rng = random::rng_from_seed(config.seed);
    let mut starts: Vec<Vec<CMatrix>> = Vec::new();
    if let Some(w) = warm {
        if w.len() == domain.num_blocks() {
            starts.push(w.to_vec());
        }
    }
    starts.push(domain.maximally_mixed());
    while starts.len() < config.multistart_count.max(1) {
        starts.push(domain.random_start(&mut rng));
    }
    let mut results: Vec<MinimizeResult> = starts
        .into_iter()
        .map(|s| descend_from(f, domain, s, config))
        .collect();
    let finite: Vec<f64> = results
        .iter()
        .map(|r| r.value)
        .filter(|v| v.is_finite())
        .collect();
    let spread = if finite.len() > 1 {
        finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - finite.iter().cloned().fold(f64::INFINITY, f64::min)
    } else {
        0.0
    };
    let best = results
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.value.partial_cmp(&b.1.value).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let mut out = results.swap_remove(best);
    out.multistart_spread = spread;
    out
}

/// Maximize `f` (concave objectives) by minimizing its negation.
pub fn maximize_over_states(
    f: &mut dyn FnMut(&CMatrix) -> f64,
    domain: &Domain,
    config: &OptimizerConfig,
    warm: Option<&[CMatrix]>,
) -> MinimizeResult {
    let mut neg = |m: &CMatrix| -f(m);
    let mut res = minimize_over_states(&mut neg, domain, config, warm);
    res.value = -res.value;
    res
}

/// Golden-section search for the maximum of a 1-D function on `[lo, hi]`.
/// Returns `(argmax, max)`.
pub fn golden_section_max(
    f: &mut dyn FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    x_tol: f64,
) -> (f64, f64) {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = if fc > fd { (c, fc) } else { (d, fd) };
    while (b - a) > x_tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
        let (x, fx) = if fc > fd { (c, fc) } else { (d, fd) };
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::umegaki_relative_entropy;
    use crate::linalg::{identity, max_abs, trace_re};
    use crate::random::{random_density_mat, rng_from_seed};

    #[test]
    fn minimizes_relative_entropy_to_target() {
        // min_tau D(tau || rho) = 0 at tau = rho
        let mut rng = rng_from_seed(1);
        let rho = random_density_mat(3, 3, &mut rng);
        let mut f = |tau: &CMatrix| umegaki_relative_entropy(tau, &rho);
        let cfg = OptimizerConfig {
            multistart_count: 2,
            ..Default::default()
        };
        let res = minimize_over_states(&mut f, &Domain::full(3), &cfg, None);
        assert!(res.value.abs() <= 1e-6, "value {}", res.value);
        assert!(max_abs(&(res.minimizer - &rho)) <= 1e-3);
        assert!(res.converged);
    }

    #[test]
    fn respects_block_structure() {
        // classical objective on a 2-block domain; the optimum puts all mass
        // on the cheap block
        let e1 = {
            let mut m = CMatrix::zeros(4, 2);
            m[(0, 0)] = Complex64::new(1.0, 0.0);
            m[(1, 1)] = Complex64::new(1.0, 0.0);
            m
        };
        let e2 = {
            let mut m = CMatrix::zeros(4, 2);
            m[(2, 0)] = Complex64::new(1.0, 0.0);
            m[(3, 1)] = Complex64::new(1.0, 0.0);
            m
        };
        let domain = Domain::block_diag(vec![e1, e2]);
        let mut f = |tau: &CMatrix| {
            (tau[(0, 0)] + tau[(1, 1)]).re + 2.0 * (tau[(2, 2)] + tau[(3, 3)]).re
        };
        let cfg = OptimizerConfig {
            multistart_count: 2,
            max_iters: 2000,
            ..Default::default()
        };
        let res = minimize_over_states(&mut f, &domain, &cfg, None);
        assert!((res.value - 1.0).abs() <= 1e-4, "value {}", res.value);
        assert!(res.minimizer[(0, 2)].norm() <= 1e-12);
    }

    #[test]
    fn trivial_domain_returns_fixed_point() {
        let mut f = |tau: &CMatrix| trace_re(tau) * 2.0;
        let res =
            minimize_over_states(&mut f, &Domain::full(1), &OptimizerConfig::default(), None);
        assert!((res.value - 2.0).abs() <= 1e-12);
        assert!(res.converged);
    }

    #[test]
    fn golden_section_finds_quadratic_max() {
        let mut f = |x: f64| -(x - 0.3) * (x - 0.3);
        let (x, fx) = golden_section_max(&mut f, 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() <= 1e-8);
        assert!(fx.abs() <= 1e-15);
    }

    #[test]
    fn hermitian_basis_is_orthonormal() {
        let basis = hermitian_basis(3);
        assert_eq!(basis.len(), 9);
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let ip = trace_re(&(a.adjoint() * b));
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((ip - expected).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn maximize_concave_fidelity_against_fixed_state() {
        // max_omega F(rho, omega) = 1 at omega = rho
        let mut rng = rng_from_seed(5);
        let rho = random_density_mat(2, 2, &mut rng);
        let mut f = |omega: &CMatrix| linalg::fidelity(&rho, omega);
        let cfg = OptimizerConfig {
            multistart_count: 2,
            ..Default::default()
        };
        let res = maximize_over_states(&mut f, &Domain::full(2), &cfg, None);
        assert!((res.value - 1.0).abs() <= 1e-5, "value {}", res.value);
    }

    #[test]
    fn supported_domain_stays_on_support() {
        let rho = {
            let mut m = CMatrix::zeros(3, 3);
            m[(0, 0)] = Complex64::new(0.6, 0.0);
            m[(1, 1)] = Complex64::new(0.4, 0.0);
            m
        };
        let spec = linalg::spectral(&rho, None).unwrap();
        let domain = Domain::supported(spec.support_isometry());
        let target = identity(3).scale(1.0 / 3.0);
        let mut f = |tau: &CMatrix| umegaki_relative_entropy(tau, &target);
        let res = minimize_over_states(&mut f, &domain, &OptimizerConfig::default(), None);
        // minimizer is uniform on the 2-dim support: D = log2(3) - 1
        assert!((res.value - (3f64.log2() - 1.0)).abs() <= 1e-6);
        assert!(res.minimizer[(2, 2)].norm() <= 1e-12);
    }
}
