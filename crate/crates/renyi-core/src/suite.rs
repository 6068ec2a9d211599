//! Randomized verification suites over the module invariants.
//!
//! Each suite draws independent instances from per-trial child seeds, checks
//! the inequalities and identities of its module, and records every failure
//! with the seed that reproduces it. Trials run in parallel; all checks are
//! pure.

use rayon::prelude::*;

use crate::divergence::{divergence, umegaki_relative_entropy, DivergenceKind, DivergenceSpec};
use crate::entropic::{self, MiVariant};
use crate::error::CoreError;
use crate::exponent::{self, weight, CurveConfig};
use crate::linalg::{self, CMatrix};
use crate::optimize::OptimizerConfig;
use crate::protocol::{self, HashStrategy};
use crate::random;
use crate::smoothing;
use crate::state::{CqState, DensityMatrix};
use crate::types;

pub const SUITE_NAMES: &[&str] = &[
    "divergence-props",
    "entropy-props",
    "duality",
    "variational",
    "smoothing",
    "types",
    "protocols",
];

/// One failed check, replayable from its seed.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SuiteFailure {
    pub check: String,
    pub seed: u64,
    pub observed: f64,
    pub bound: f64,
    pub tolerance: f64,
}

/// Outcome of one suite run.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub trials: usize,
    pub checks_run: usize,
    pub failures: Vec<SuiteFailure>,
    pub wall_ms: u128,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Default)]
struct Recorder {
    checks: usize,
    failures: Vec<SuiteFailure>,
    tol_scale: f64,
    seed: u64,
}

impl Recorder {
    fn new(seed: u64, tol_scale: f64) -> Self {
        Self {
            checks: 0,
            failures: Vec::new(),
            tol_scale,
            seed,
        }
    }

    /// Check `observed <= bound + tol` (tolerances scaled globally).
    fn le(&mut self, check: &str, observed: f64, bound: f64, tol: f64) {
        self.checks += 1;
        let tol = tol * self.tol_scale;
        let ok = observed <= bound + tol || (observed.is_infinite() && bound.is_infinite());
        if !ok {
            self.failures.push(SuiteFailure {
                check: check.to_string(),
                seed: self.seed,
                observed,
                bound,
                tolerance: tol,
            });
        }
    }

    /// Check `|a - b| <= tol`.
    fn close(&mut self, check: &str, a: f64, b: f64, tol: f64) {
        self.checks += 1;
        let tol = tol * self.tol_scale;
        let ok = (a - b).abs() <= tol || (a.is_infinite() && b.is_infinite());
        if !ok {
            self.failures.push(SuiteFailure {
                check: check.to_string(),
                seed: self.seed,
                observed: a,
                bound: b,
                tolerance: tol,
            });
        }
    }

    fn is_true(&mut self, check: &str, ok: bool) {
        self.checks += 1;
        if !ok {
            self.failures.push(SuiteFailure {
                check: check.to_string(),
                seed: self.seed,
                observed: 0.0,
                bound: 1.0,
                tolerance: 0.0,
            });
        }
    }
}

fn div(spec: &DivergenceSpec, rho: &CMatrix, sigma: &CMatrix) -> f64 {
    divergence(spec, rho, sigma).map(|v| v.value).unwrap_or(f64::NAN)
}

fn divergence_trial(rec: &mut Recorder, seed: u64) {
    let mut rng = random::rng_from_seed(seed);
    let rho = random::random_density_mat(3, 3, &mut rng);
    let sigma = random::random_density_mat(3, 3, &mut rng);
    let tau = random::random_density_mat(3, 3, &mut rng);

    // monotonicity in the Renyi parameter, both kinds
    for kind in [DivergenceKind::Sandwiched, DivergenceKind::LogEuclidean] {
        let mut prev = f64::NEG_INFINITY;
        for alpha in [0.5, 0.7, 0.9, 1.3, 2.0] {
            let v = div(
                &DivergenceSpec {
                    kind,
                    alpha,
                    smoothing_eps: 0.0,
                },
                &rho,
                &sigma,
            );
            rec.le(&format!("alpha-monotone/{kind}"), prev, v, 1e-9);
            prev = v;
        }
    }

    // monotonicity in sigma
    let bump = random::random_density_mat(3, 3, &mut rng);
    let bigger = &sigma + bump.scale(0.5);
    for (kind, alpha) in [
        (DivergenceKind::Sandwiched, 0.6),
        (DivergenceKind::Sandwiched, 1.5),
        (DivergenceKind::LogEuclidean, 0.6),
        (DivergenceKind::LogEuclidean, 1.5),
    ] {
        let spec = DivergenceSpec {
            kind,
            alpha,
            smoothing_eps: 0.0,
        };
        rec.le(
            &format!("sigma-monotone/{kind}/{alpha}"),
            div(&spec, &rho, &bigger),
            div(&spec, &rho, &sigma),
            1e-9,
        );
    }

    // data processing
    let ch = random::random_cptp(3, 3, 2, &mut rng).expect("channel dims valid");
    let (nr, ns) = (ch.apply(&rho), ch.apply(&sigma));
    for (kind, alpha) in [
        (DivergenceKind::Sandwiched, 0.5),
        (DivergenceKind::Sandwiched, 0.8),
        (DivergenceKind::Sandwiched, 2.0),
        (DivergenceKind::LogEuclidean, 0.3),
        (DivergenceKind::LogEuclidean, 0.9),
    ] {
        let spec = DivergenceSpec {
            kind,
            alpha,
            smoothing_eps: 0.0,
        };
        rec.le(
            &format!("dpi/{kind}/{alpha}"),
            div(&spec, &nr, &ns),
            div(&spec, &rho, &sigma),
            1e-8,
        );
    }

    // flat dominates sandwiched below alpha = 1
    for alpha in [0.5, 0.8] {
        rec.le(
            "flat-dominates-sandwiched",
            div(&DivergenceSpec::sandwiched(alpha), &rho, &sigma),
            div(&DivergenceSpec::log_euclidean(alpha), &rho, &sigma),
            1e-9,
        );
    }

    // sandwiched at 1/2 equals -2 log2 F
    let f = linalg::fidelity(&rho, &sigma);
    rec.close(
        "sandwiched-half-fidelity",
        div(&DivergenceSpec::sandwiched(0.5), &rho, &sigma),
        -2.0 * f.log2(),
        1e-9,
    );

    // fidelity achievable by measurement
    rec.le(
        "fidelity-relative-entropy",
        -2.0 * f.log2(),
        umegaki_relative_entropy(&tau, &rho) + umegaki_relative_entropy(&tau, &sigma),
        1e-8,
    );

    // Renyi pair inequality with conjugate orders
    for alpha in [0.6, 0.75, 0.9] {
        let beta = alpha / (2.0 * alpha - 1.0);
        rec.le(
            "renyi-pair-fidelity",
            2.0 * alpha / (1.0 - alpha) * f.log2(),
            div(&DivergenceSpec::sandwiched(beta), &rho, &tau)
                - div(&DivergenceSpec::sandwiched(alpha), &sigma, &tau),
            1e-8,
        );
    }

    // block-diagonal pinched-fidelity bound
    {
        let rho4 = random::random_density_mat(4, 4, &mut rng);
        let b1 = random::random_density_mat(2, 2, &mut rng);
        let b2 = random::random_density_mat(2, 2, &mut rng);
        let w = 0.5;
        let mut sig4 = CMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                sig4[(i, j)] = b1[(i, j)] * num_complex::Complex64::new(w, 0.0);
                sig4[(i + 2, j + 2)] = b2[(i, j)] * num_complex::Complex64::new(1.0 - w, 0.0);
            }
        }
        let h = CMatrix::from_fn(4, 4, |i, j| {
            if i == j && i >= 2 {
                num_complex::Complex64::new(1.0, 0.0)
            } else {
                num_complex::Complex64::new(0.0, 0.0)
            }
        });
        let (pinched, blocks) = linalg::pinch(&h, &rho4, linalg::EIG_CLUSTER_TOL);
        rec.le(
            "pinched-fidelity-bound",
            linalg::fidelity(&pinched, &sig4),
            (blocks as f64).sqrt() * linalg::fidelity(&rho4, &sig4),
            1e-9,
        );
    }

    // pinching inequality
    {
        let h = random::random_hermitian(3, &mut rng);
        let (pinched, v) = linalg::pinch(&h, &sigma, linalg::EIG_CLUSTER_TOL);
        let diff = pinched.scale(v as f64) - &sigma;
        let min_eig = linalg::spectral(&linalg::hermitize(&diff), None)
            .map(|s| s.eigenvalues.last().copied().unwrap_or(0.0))
            .unwrap_or(f64::NAN);
        rec.le("pinching-inequality", -min_eig, 0.0, 1e-9);
    }

    // fidelity data processing
    rec.le(
        "fidelity-dpi",
        f,
        linalg::fidelity(&ch.apply(&rho), &ch.apply(&sigma)),
        1e-9,
    );

    // partial trace of a product recovers the factor
    {
        let a = random::random_density_mat(2, 2, &mut rng);
        let b = random::random_density_mat(3, 3, &mut rng);
        let back = linalg::partial_trace(&linalg::kron(&a, &b), &[2, 3], &[0]).unwrap();
        rec.le(
            "partial-trace-kron",
            linalg::max_abs(&(back - &a)),
            0.0,
            1e-12,
        );
    }
}

fn entropy_trial(rec: &mut Recorder, seed: u64) {
    let mut rng = random::rng_from_seed(seed);
    let cfg = OptimizerConfig {
        multistart_count: 2,
        seed,
        ..Default::default()
    };
    let alpha = 0.7;

    // discarding classical information
    {
        let rho1 = random::random_density_mat(4, 4, &mut rng);
        let rho2 = random::random_density_mat(4, 4, &mut rng);
        let px = 0.4;
        let mut mat = CMatrix::zeros(8, 8);
        for i in 0..4 {
            for j in 0..4 {
                mat[(i, j)] = rho1[(i, j)] * num_complex::Complex64::new(px, 0.0);
                mat[(4 + i, 4 + j)] = rho2[(i, j)] * num_complex::Complex64::new(1.0 - px, 0.0);
            }
        }
        let rho_xab = DensityMatrix::new(vec![4, 2], mat, true).unwrap();
        let h_xa_b = entropic::conditional_entropy(DivergenceKind::Sandwiched, alpha, &rho_xab, &cfg)
            .unwrap()
            .value;
        let avg = rho1.scale(px) + rho2.scale(1.0 - px);
        let rho_ab = DensityMatrix::new(vec![2, 2], avg, true).unwrap();
        let h_a_b = entropic::conditional_entropy(DivergenceKind::Sandwiched, alpha, &rho_ab, &cfg)
            .unwrap()
            .value;
        rec.le("discard-classical-info", h_a_b, h_xa_b, 1e-7);
    }

    // dimension bound for the fixed-marginal mutual information
    {
        let rho_abc = random::random_density_mat(8, 6, &mut rng);
        let joint_abc = DensityMatrix::new(vec![2, 4], rho_abc.clone(), true).unwrap();
        let i_abc = entropic::mutual_information(
            DivergenceKind::Sandwiched,
            alpha,
            &joint_abc,
            MiVariant::FixedMarginal,
            &cfg,
        )
        .unwrap()
        .value;
        let ab = linalg::partial_trace(&rho_abc, &[2, 2, 2], &[0, 1]).unwrap();
        let joint_ab = DensityMatrix::new(vec![2, 2], ab, true).unwrap();
        let i_ab = entropic::mutual_information(
            DivergenceKind::Sandwiched,
            alpha,
            &joint_ab,
            MiVariant::FixedMarginal,
            &cfg,
        )
        .unwrap()
        .value;
        rec.le("mi-dimension-bound", i_abc, i_ab + 2.0, 1e-7);
    }

    // conditional-entropy fidelity inequality with conjugate orders
    {
        let rho = DensityMatrix::new(vec![2, 2], random::random_density_mat(4, 4, &mut rng), true)
            .unwrap();
        let sigma =
            DensityMatrix::new(vec![2, 2], random::random_density_mat(4, 4, &mut rng), true)
                .unwrap();
        let a = 0.75;
        let b = a / (2.0 * a - 1.0);
        let f = linalg::fidelity(rho.matrix(), sigma.matrix());
        let h_a = entropic::conditional_entropy(DivergenceKind::Sandwiched, a, &rho, &cfg)
            .unwrap()
            .value;
        let h_b = entropic::conditional_entropy(DivergenceKind::Sandwiched, b, &sigma, &cfg)
            .unwrap()
            .value;
        rec.le(
            "conditional-entropy-pair",
            2.0 * a / (1.0 - a) * f.log2(),
            h_a - h_b,
            1e-6,
        );
    }

    // mutual information monotone in alpha
    {
        let rho = DensityMatrix::new(vec![2, 2], random::random_density_mat(4, 4, &mut rng), true)
            .unwrap();
        let mut prev = f64::NEG_INFINITY;
        for a in [0.6, 0.8, 0.95] {
            let v = entropic::mutual_information(
                DivergenceKind::Sandwiched,
                a,
                &rho,
                MiVariant::DoubleMin,
                &cfg,
            )
            .unwrap()
            .value;
            rec.le("mi-alpha-monotone", prev, v, 1e-7);
            prev = v;
        }
    }

    // variational representation of the log-Euclidean divergence
    {
        let rho = random::random_density_mat(2, 2, &mut rng);
        let sigma = random::random_density_mat(2, 2, &mut rng);
        let a = 0.6;
        let direct = div(&DivergenceSpec::log_euclidean(a), &rho, &sigma);
        let mut objective = |tau: &CMatrix| {
            umegaki_relative_entropy(tau, &sigma)
                + a / (1.0 - a) * umegaki_relative_entropy(tau, &rho)
        };
        let res = crate::optimize::minimize_over_states(
            &mut objective,
            &crate::optimize::Domain::full(2),
            &cfg,
            None,
        );
        rec.close("flat-variational-representation", res.value, direct, 2e-4);
    }
}

fn duality_trial(rec: &mut Recorder, seed: u64) {
    let mut rng = random::rng_from_seed(seed);
    let cfg = OptimizerConfig {
        multistart_count: 2,
        seed,
        ..Default::default()
    };
    let psi = random::random_pure(8, &mut rng);
    let rho_abc = DensityMatrix::from_pure(vec![2, 2, 2], &psi).unwrap();
    let ab = rho_abc.partial_trace(&[0, 1]).unwrap();
    let ac = rho_abc.partial_trace(&[0, 2]).unwrap();
    let one = linalg::identity(2);

    // sandwiched duality across conjugate orders
    for alpha in [0.6, 0.8] {
        let dual_order = alpha / (2.0 * alpha - 1.0);
        let lhs = entropic::min_over_sigma(DivergenceKind::Sandwiched, alpha, &ab, &one, &cfg)
            .unwrap()
            .value;
        let rhs = entropic::min_over_sigma(DivergenceKind::Sandwiched, dual_order, &ac, &one, &cfg)
            .unwrap()
            .value;
        rec.close(&format!("sandwiched-duality/{alpha}"), lhs, -rhs, 2e-4);
    }

    // Petz-to-sandwiched duality with the inverse order
    for beta in [0.7, 1.3] {
        let lhs = entropic::min_over_sigma(DivergenceKind::Petz, beta, &ab, &one, &cfg)
            .unwrap()
            .value;
        let rho_c = ac.partial_trace(&[1]).unwrap().matrix().clone();
        let rhs = div(
            &DivergenceSpec::sandwiched(1.0 / beta),
            ac.matrix(),
            &linalg::kron(&one, &rho_c),
        );
        rec.close(&format!("petz-duality/{beta}"), lhs, -rhs, 2e-4);
    }
}

fn variational_trial(rec: &mut Recorder, seed: u64) {
    let mut rng = random::rng_from_seed(seed);
    let cfg = OptimizerConfig {
        multistart_count: 2,
        seed,
        ..Default::default()
    };
    let curve_cfg = CurveConfig::with_grid(129);

    // commuting smoothing dual (classical, exact both sides)
    {
        let p = random::random_probability_vector(3, &mut rng);
        let q = random::random_probability_vector(3, &mut rng);
        let r = 0.15;
        let (dual, _) = exponent::classical_hinge_dual(&p, &q, r);
        let (rho, sigma) = (diag_mat(&p), diag_mat(&q));
        let mut eval = |alpha: f64| -> (f64, f64) {
            let d = if alpha >= 1.0 {
                umegaki_relative_entropy(&rho, &sigma)
            } else {
                div(&DivergenceSpec::log_euclidean(alpha), &rho, &sigma)
            };
            (d - r, weight(alpha) * (d - r))
        };
        let sup = exponent::curve_from_payoff(&mut eval, &curve_cfg).supremum;
        rec.close("smoothing-dual-commuting", dual, sup, 2e-4);
    }

    // general quantum smoothing dual at dimension <= 3
    {
        let rho = random::random_density_mat(3, 3, &mut rng);
        let sigma = random::random_density_mat(3, 3, &mut rng);
        let r = 0.1;
        let dual = exponent::dual_dmax(&rho, &sigma, r, &cfg);
        let mut eval = |alpha: f64| -> (f64, f64) {
            let d = if alpha >= 1.0 {
                umegaki_relative_entropy(&rho, &sigma)
            } else {
                div(&DivergenceSpec::log_euclidean(alpha), &rho, &sigma)
            };
            (d - r, weight(alpha) * (d - r))
        };
        let sup = exponent::curve_from_payoff(&mut eval, &curve_cfg).supremum;
        rec.close("smoothing-dual-quantum", dual.value, sup, 2e-4);
    }

    // privacy amplification dual versus its flat sup-form
    {
        let cq = random::random_cq(2, 2, &mut rng);
        let r = 0.9;
        let dual = exponent::dual_pa(&cq, r, &cfg);
        let joint = cq.joint();
        let one_x = linalg::identity(2);
        let inner = cfg.inner();
        let mut warm: Option<Vec<CMatrix>> = None;
        let mut eval = |alpha: f64| -> (f64, f64) {
            let spec = entropic::effective_spec(DivergenceKind::LogEuclidean, alpha);
            let res = entropic::min_one_side(
                &spec,
                joint.matrix(),
                &one_x,
                entropic::Side::B,
                2,
                &inner,
                warm.as_deref(),
            );
            warm = Some(res.blocks.clone());
            let payoff = r - (-res.value);
            (payoff, weight(alpha) * payoff)
        };
        let sup = exponent::curve_from_payoff(&mut eval, &curve_cfg).supremum;
        rec.close("pa-dual-vs-flat-sup", dual.value, sup, 2e-4);
    }

    // decoupling dual versus its flat sup-form
    {
        let rho =
            DensityMatrix::new(vec![2, 2], random::random_density_mat(4, 4, &mut rng), true)
                .unwrap();
        let r = 0.25;
        let dual = exponent::dual_dec(&rho, r, &cfg);
        let inner = cfg.inner();
        let mut warm_pair: Option<(CMatrix, CMatrix)> = None;
        let mut eval = |alpha: f64| -> (f64, f64) {
            let spec = entropic::effective_spec(DivergenceKind::LogEuclidean, alpha);
            let (mut sa, mut sb) = warm_pair.clone().unwrap_or_else(|| {
                (
                    rho.partial_trace(&[0]).unwrap().matrix().clone(),
                    rho.partial_trace(&[1]).unwrap().matrix().clone(),
                )
            });
            let mut value = f64::INFINITY;
            for _ in 0..40 {
                let res_b = entropic::min_one_side(
                    &spec,
                    rho.matrix(),
                    &sa,
                    entropic::Side::B,
                    2,
                    &inner,
                    Some(&[sb.clone()]),
                );
                sb = res_b.minimizer;
                let res_a = entropic::min_one_side(
                    &spec,
                    rho.matrix(),
                    &sb,
                    entropic::Side::A,
                    2,
                    &inner,
                    Some(&[sa.clone()]),
                );
                sa = res_a.minimizer;
                let decrease = value - res_a.value;
                value = res_a.value;
                if decrease.abs() < inner.convergence_tol {
                    break;
                }
            }
            warm_pair = Some((sa, sb));
            let payoff = value - 2.0 * r;
            (payoff, weight(alpha) * payoff)
        };
        let sup = exponent::curve_from_payoff(&mut eval, &curve_cfg).supremum;
        rec.close("dec-dual-vs-flat-sup", dual.value, sup, 2e-4);
    }
}

fn diag_mat(values: &[f64]) -> CMatrix {
    CMatrix::from_fn(values.len(), values.len(), |i, j| {
        if i == j {
            num_complex::Complex64::new(values[i], 0.0)
        } else {
            num_complex::Complex64::new(0.0, 0.0)
        }
    })
}

fn smoothing_trial(rec: &mut Recorder, seed: u64) {
    let mut rng = random::rng_from_seed(seed);
    let cfg = OptimizerConfig {
        multistart_count: 3,
        seed,
        ..Default::default()
    };

    // monotone in lambda and bracket closure
    {
        let d = if seed % 2 == 0 { 2 } else { 3 };
        let rho = random::random_density_mat(d, d, &mut rng);
        let sigma = random::random_density_mat(d, d, &mut rng);
        let mut prev = 2.0;
        for lambda in [-1.0, -0.2, 0.6] {
            let res = smoothing::smooth_quantum(&rho, &sigma, lambda, &cfg).unwrap();
            rec.le("smoothing-lambda-monotone", res.epsilon, prev, 1e-8);
            rec.is_true("smoothing-bracket-closed", res.bracket_closed);
            rec.le("smoothing-cap-residual", -res.cap_residual, 0.0, 1e-8);
            rec.le("smoothing-trace-slack", -res.trace_slack, 0.0, 1e-10);
            prev = res.epsilon;
        }
    }

    // data processing
    {
        let rho = random::random_density_mat(2, 2, &mut rng);
        let sigma = random::random_density_mat(2, 2, &mut rng);
        let ch = random::random_cptp(2, 2, 2, &mut rng).unwrap();
        let lambda = 0.0;
        let before = smoothing::smooth_quantum(&rho, &sigma, lambda, &cfg).unwrap();
        let after =
            smoothing::smooth_quantum(&ch.apply(&rho), &ch.apply(&sigma), lambda, &cfg).unwrap();
        rec.le("smoothing-dpi", after.epsilon, before.epsilon, 5e-3);
    }

    // commuting case matches the exact classical solver
    {
        let u = random::random_unitary(3, &mut rng);
        let p = random::random_probability_vector(3, &mut rng);
        let q = random::random_probability_vector(3, &mut rng);
        let rho = linalg::hermitize(&(&u * diag_mat(&p) * u.adjoint()));
        let sigma = linalg::hermitize(&(&u * diag_mat(&q) * u.adjoint()));
        let quantum = smoothing::smooth_quantum(&rho, &sigma, -0.4, &cfg).unwrap();
        let classical = smoothing::smooth_classical(&p, &q, -0.4).unwrap();
        rec.close(
            "smoothing-commuting-exact",
            quantum.epsilon,
            classical.epsilon,
            1e-6,
        );
    }

    // pinching sandwich
    {
        let u = random::random_unitary(3, &mut rng);
        let sigma = linalg::hermitize(&(&u * diag_mat(&[0.5, 0.25, 0.25]) * u.adjoint()));
        let rho = random::random_density_mat(3, 3, &mut rng);
        let p1 = {
            let v = u.column(0);
            v * v.adjoint()
        };
        let p2 = linalg::identity(3) - &p1;
        let sandwich =
            smoothing::pinching_sandwich(&rho, &sigma, -0.2, &[p1, p2], &cfg).unwrap();
        rec.is_true("pinching-sandwich", sandwich.holds);
    }

    // constructive fidelity-preserving lift
    {
        let mut p1 = CMatrix::zeros(4, 4);
        p1[(0, 0)] = num_complex::Complex64::new(1.0, 0.0);
        p1[(1, 1)] = num_complex::Complex64::new(1.0, 0.0);
        let p2 = linalg::identity(4) - &p1;
        let b1 = random::random_density_mat(2, 2, &mut rng);
        let b2 = random::random_density_mat(2, 2, &mut rng);
        let mut sigma = CMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                sigma[(i, j)] = b1[(i, j)] * num_complex::Complex64::new(0.5, 0.0);
                sigma[(i + 2, j + 2)] = b2[(i, j)] * num_complex::Complex64::new(0.5, 0.0);
            }
        }
        let rho_tilde = random::random_density_mat(4, 4, &mut rng);
        let rho = linalg::hermitize(&(&p1 * &rho_tilde * &p1 + &p2 * &rho_tilde * &p2));
        let sigma_tilde =
            smoothing::uhlmann_block_lift(&rho, &sigma, &[p1.clone(), p2.clone()], &rho_tilde)
                .unwrap();
        let pinched = linalg::hermitize(&(&p1 * &sigma_tilde * &p1 + &p2 * &sigma_tilde * &p2));
        rec.le(
            "uhlmann-lift-pinch",
            linalg::max_abs(&(pinched - &sigma)),
            0.0,
            1e-8,
        );
        rec.close(
            "uhlmann-lift-fidelity",
            linalg::fidelity(&rho, &sigma),
            linalg::fidelity(&rho_tilde, &sigma_tilde),
            1e-8,
        );
    }
}

fn types_trial(rec: &mut Recorder, seed: u64) {
    let mut rng = random::rng_from_seed(seed);
    let p = random::random_probability_vector(2, &mut rng);
    let q = random::random_probability_vector(2, &mut rng);
    let r = 0.1;

    for n in [5usize, 40] {
        let res = types::finite_n_optimum(&p, &q, r, n).unwrap();
        let (lo, hi) = res.bracket_log2;
        rec.le("types-bracket-lower", lo, res.log2_fidelity_opt, 1e-9);
        rec.le("types-bracket-upper", res.log2_fidelity_opt, hi, 1e-9);
        let y = -res.log2_fidelity_opt / n as f64;
        rec.le("types-ant-lower", res.ant_bounds.0, y, 1e-9);
        rec.le("types-ant-upper", y, res.ant_bounds.1, 1e-9);
    }

    // blocklength one coincides with the classical smoother
    {
        let res = types::finite_n_optimum(&p, &q, r, 1).unwrap();
        let cls = smoothing::smooth_classical(&p, &q, r).unwrap();
        rec.close(
            "types-n1-classical",
            res.fidelity_opt,
            cls.fidelity_achieved,
            1e-12,
        );
    }

    // classical variational identity at the heart of the commutative proof
    {
        let (dual, _) = exponent::classical_hinge_dual(&p, &q, r);
        let mut f = |alpha: f64| {
            let z: f64 = p
                .iter()
                .zip(&q)
                .map(|(&pi, &qi)| pi.powf(alpha) * qi.powf(1.0 - alpha))
                .sum();
            weight(alpha) * (z.log2() / (alpha - 1.0) - r)
        };
        let (_, sup) = crate::optimize::golden_section_max(&mut f, 0.5, 1.0 - 1e-9, 1e-12);
        rec.close("types-variational-identity", dual, sup.max(0.0), 1e-8);
    }
}

fn protocols_trial(rec: &mut Recorder, seed: u64) {
    let mut rng = random::rng_from_seed(seed);
    let cfg = OptimizerConfig {
        multistart_count: 2,
        seed,
        ..Default::default()
    };

    // relabeling invariance and range of the PA performance
    {
        let cq = random::random_cq(2, 2, &mut rng);
        let f = protocol::HashFunction::random(2, 2, 3, &mut rng);
        let g = f.relabeled(&[1, 2, 0]);
        let a = protocol::pa_performance(&cq, &f, &cfg).unwrap();
        let b = protocol::pa_performance(&cq, &g, &cfg).unwrap();
        rec.close("pa-relabel-invariance", a, b, 1e-10);
        rec.is_true("pa-performance-range", (0.0..=1.0).contains(&a));
    }

    // optimality floor against the theorem exponent
    {
        let cq = random::random_cq(2, 2, &mut rng);
        let r = 1.3;
        let theorem = exponent::exponent_pa(&cq, r, &CurveConfig::with_grid(65), &cfg)
            .unwrap()
            .supremum;
        let rows =
            protocol::pa_decay_experiment(&cq, r, &[1], HashStrategy::BestOfK(4), seed, &cfg)
                .unwrap();
        for row in &rows {
            for &rate in &row.rates {
                rec.le("pa-optimality-floor", theorem, rate, 1e-6);
            }
        }
    }

    // decoupling performance invariances
    {
        let rho =
            DensityMatrix::new(vec![2, 2], random::random_density_mat(4, 4, &mut rng), true)
                .unwrap();
        let scheme =
            protocol::DecouplingScheme::new(None, random::random_unitary(2, &mut rng), 1, 2)
                .unwrap();
        let perf = protocol::dec_performance(&rho, &scheme, &cfg).unwrap();
        rec.is_true("dec-performance-range", (0.0..=1.0).contains(&perf));
        let u_r = random::random_unitary(2, &mut rng);
        let big = linalg::kron(&u_r, &linalg::identity(2));
        let rotated = DensityMatrix::new(
            vec![2, 2],
            linalg::hermitize(&(&big * rho.matrix() * big.adjoint())),
            true,
        )
        .unwrap();
        let perf_rot = protocol::dec_performance(&rotated, &scheme, &cfg).unwrap();
        rec.close("dec-local-unitary-invariance", perf, perf_rot, 1e-8);
    }

    // one-shot Haar decoupling inequality
    {
        let psi = random::random_pure(8, &mut rng);
        let state = DensityMatrix::from_pure(vec![2, 4], &psi).unwrap();
        let check = protocol::haar_decoupling_check(&state, 2, 2, 150, seed).unwrap();
        rec.is_true("haar-one-shot-bound", check.holds);
    }
}

fn run_named(name: &str, trials: usize, seed: u64, tol_scale: f64) -> Result<SuiteReport, CoreError> {
    let trial_fn: fn(&mut Recorder, u64) = match name {
        "divergence-props" => divergence_trial,
        "entropy-props" => entropy_trial,
        "duality" => duality_trial,
        "variational" => variational_trial,
        "smoothing" => smoothing_trial,
        "types" => types_trial,
        "protocols" => protocols_trial,
        other => {
            return Err(CoreError::SizeLimit(format!(
                "unknown suite `{other}` (expected one of {SUITE_NAMES:?} or `all`)"
            )))
        }
    };
    let start = std::time::Instant::now();
    let results: Vec<Recorder> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let child = random::child_seed(seed, i as u64);
            let mut rec = Recorder::new(child, tol_scale);
            trial_fn(&mut rec, child);
            rec
        })
        .collect();
    let mut checks_run = 0;
    let mut failures = Vec::new();
    for r in results {
        checks_run += r.checks;
        failures.extend(r.failures);
    }
    Ok(SuiteReport {
        name: name.to_string(),
        trials,
        checks_run,
        failures,
        wall_ms: start.elapsed().as_millis(),
    })
}

/// Run the named suite (or `all`) with the given number of randomized trials.
pub fn run_suite(
    name: &str,
    trials: usize,
    seed: u64,
    tol_scale: f64,
) -> Result<Vec<SuiteReport>, CoreError> {
    if trials == 0 {
        return Err(CoreError::SizeLimit("trials must be >= 1".into()));
    }
    if name == "all" {
        SUITE_NAMES
            .iter()
            .map(|n| run_named(n, trials, seed, tol_scale))
            .collect()
    } else {
        Ok(vec![run_named(name, trials, seed, tol_scale)?])
    }
}
