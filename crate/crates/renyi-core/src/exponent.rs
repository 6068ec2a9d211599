//! Strong converse exponent curves `sup_alpha (1-alpha)/alpha * payoff(alpha)`
//! for the three tasks (max-relative-entropy smoothing, privacy
//! amplification, decoupling), and their variational duals
//! `inf_tau { D(tau||rho) + |statistic(tau)|^+ }`.
//!
//! The alpha-supremum runs on a dense grid followed by golden-section
//! refinement around the best point; payoffs are evaluated lazily in grid
//! order so that inner optimizations can be warm-started from the previous
//! grid point. The hinge duals go through the scalarization
//! `sup_{lambda in [0,1]} inf_tau { base + lambda * statistic }` (each inner
//! problem convex and smooth), with the two hinge branches solved separately
//! for reporting.

use crate::divergence::{
    self, divergence, dmax_zero, umegaki_relative_entropy, DivergenceKind, DivergenceSpec,
    SupportCase,
};
use crate::entropic::{self, effective_spec, Side};
use crate::error::CoreError;
use crate::linalg::{self, CMatrix};
use crate::optimize::{self, Domain, OptimizerConfig};
use crate::state::{CqState, DensityMatrix};

/// `(1 - alpha) / alpha`.
pub fn weight(alpha: f64) -> f64 {
    (1.0 - alpha) / alpha
}

/// Grid and refinement settings for the alpha-supremum.
#[derive(Debug, Clone)]
pub struct CurveConfig {
    /// Number of grid points on [1/2, 1].
    pub grid_points: usize,
    /// Golden-section resolution in alpha.
    pub refine_x_tol: f64,
}

impl Default for CurveConfig {
    fn default() -> Self {
        Self {
            grid_points: 512,
            refine_x_tol: 1e-10,
        }
    }
}

impl CurveConfig {
    pub fn with_grid(points: usize) -> Self {
        Self {
            grid_points: points.max(3),
            ..Default::default()
        }
    }
}

/// Sampled exponent curve plus its supremum.
#[derive(Debug, Clone)]
pub struct ExponentCurve {
    pub alphas: Vec<f64>,
    /// The payoff term (divergence or entropy difference, minus the rate).
    pub payoffs: Vec<f64>,
    /// The weighted objective whose supremum is the exponent.
    pub values: Vec<f64>,
    pub supremum: f64,
    pub argmax_alpha: f64,
}

impl ExponentCurve {
    pub fn is_finite(&self) -> bool {
        self.supremum.is_finite()
    }
}

/// Build a curve from a payoff evaluator returning `(payoff, value)` at each
/// alpha. Evaluation happens in ascending grid order (warm-start friendly);
/// golden-section refinement then polishes the best bracket.
pub fn curve_from_payoff(
    eval: &mut dyn FnMut(f64) -> (f64, f64),
    config: &CurveConfig,
) -> ExponentCurve {
    let n = config.grid_points.max(3);
    let alphas: Vec<f64> = (0..n)
        .map(|i| 0.5 + 0.5 * i as f64 / (n - 1) as f64)
        .collect();
    let mut payoffs = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for &a in &alphas {
        let (p, v) = eval(a);
        payoffs.push(p);
        values.push(v);
    }
    let (mut best_idx, mut supremum) = (0usize, f64::NEG_INFINITY);
    for (i, &v) in values.iter().enumerate() {
        if v > supremum {
            supremum = v;
            best_idx = i;
        }
    }
    let mut argmax_alpha = alphas[best_idx];
    if supremum.is_finite() {
        let lo = if best_idx == 0 {
            alphas[0]
        } else {
            alphas[best_idx - 1]
        };
        let hi = if best_idx + 1 == n {
            alphas[n - 1]
        } else {
            alphas[best_idx + 1]
        };
        if hi > lo {
            let mut value_only = |a: f64| eval(a).1;
            let (x, fx) = optimize::golden_section_max(&mut value_only, lo, hi, config.refine_x_tol);
            if fx > supremum {
                supremum = fx;
                argmax_alpha = x;
            }
        }
    }
    ExponentCurve {
        alphas,
        payoffs,
        values,
        supremum,
        argmax_alpha,
    }
}

/// Strong converse exponent for smoothing the max-relative entropy:
/// `sup_{1/2 <= alpha < 1} (1-alpha)/alpha (D*_alpha(rho||sigma) - r)`, with
/// the three support cases handled explicitly (closed-interval maximum when
/// `supp rho` is contained in `supp sigma`, the projected rewrite when the
/// supports merely overlap, `+inf` when they are orthogonal).
pub fn exponent_dmax(rho: &CMatrix, sigma: &CMatrix, r: f64, config: &CurveConfig) -> ExponentCurve {
    let case = divergence::support_case(rho, sigma);
    match case {
        SupportCase::Orthogonal => {
            let alphas: Vec<f64> = vec![0.5, 0.75, 1.0];
            ExponentCurve {
                payoffs: vec![f64::INFINITY; 3],
                values: vec![f64::INFINITY; 3],
                alphas,
                supremum: f64::INFINITY,
                argmax_alpha: 0.5,
            }
        }
        SupportCase::Contained => {
            let mut eval = |alpha: f64| -> (f64, f64) {
                let d = if alpha >= 1.0 {
                    umegaki_relative_entropy(rho, sigma)
                } else {
                    divergence(&DivergenceSpec::sandwiched(alpha), rho, sigma)
                        .map(|v| v.value)
                        .unwrap_or(f64::INFINITY)
                };
                let payoff = d - r;
                (payoff, weight(alpha) * payoff)
            };
            curve_from_payoff(&mut eval, config)
        }
        SupportCase::Overlapping => {
            // rewrite with the projection onto supp(sigma): evaluate with the
            // normalized projected state and add -log2 tr[P rho P]
            let p_sigma = linalg::matrix_power_on_support(sigma, 0.0);
            let projected = linalg::hermitize(&(&p_sigma * rho * &p_sigma));
            let mass = linalg::trace_re(&projected);
            let rho_prime = projected.scale(1.0 / mass);
            let offset = -mass.log2();
            let mut eval = |alpha: f64| -> (f64, f64) {
                let d = if alpha >= 1.0 {
                    umegaki_relative_entropy(&rho_prime, sigma)
                } else {
                    divergence(&DivergenceSpec::sandwiched(alpha), &rho_prime, sigma)
                        .map(|v| v.value)
                        .unwrap_or(f64::INFINITY)
                };
                let payoff = d - r;
                (payoff, weight(alpha) * payoff + offset)
            };
            curve_from_payoff(&mut eval, config)
        }
    }
}

/// Strong converse exponent for privacy amplification:
/// `sup_alpha (1-alpha)/alpha (r - H*_alpha(X|E))`.
pub fn exponent_pa(
    cq: &CqState,
    r: f64,
    config: &CurveConfig,
    opt: &OptimizerConfig,
) -> Result<ExponentCurve, CoreError> {
    let joint = cq.joint();
    let d_x = cq.alphabet_size();
    let d_e = cq.dim_e();
    let one_x = linalg::identity(d_x);
    let inner = opt.inner();
    let mut warm: Option<Vec<CMatrix>> = None;
    let mut eval = |alpha: f64| -> (f64, f64) {
        let spec = effective_spec(DivergenceKind::Sandwiched, alpha);
        let res = entropic::min_one_side(
            &spec,
            joint.matrix(),
            &one_x,
            Side::B,
            d_e,
            &inner,
            warm.as_deref(),
        );
        warm = Some(res.blocks.clone());
        let h = -res.value;
        let payoff = r - h;
        (payoff, weight(alpha) * payoff)
    };
    Ok(curve_from_payoff(&mut eval, config))
}

/// Finite-block upper bound on the decoupling strong converse exponent:
/// `sup_alpha (1-alpha)/alpha ((1/block) I*_alpha(R^block:A^block) - 2r)`.
/// Block values upper-bound the regularized mutual information, so the
/// result is an upper bound on the true exponent.
pub fn exponent_dec(
    rho_ra: &DensityMatrix,
    r: f64,
    block: usize,
    config: &CurveConfig,
    opt: &OptimizerConfig,
) -> Result<ExponentCurve, CoreError> {
    let dims = rho_ra.dims();
    let (d_r, d_a) = match dims {
        [a, b] => (*a, *b),
        other => {
            return Err(CoreError::BadDims {
                dims: other.to_vec(),
                reason: "expected bipartite R:A state".into(),
            })
        }
    };
    if !(1..=2).contains(&block) {
        return Err(CoreError::SizeLimit(format!("block must be 1 or 2, got {block}")));
    }
    let total = (d_r * d_a).pow(block as u32);
    if total > 64 {
        return Err(CoreError::SizeLimit(format!(
            "dimension {total} exceeds 64 at block {block}"
        )));
    }
    // assemble the blocked state with grouped marginals
    let (mat, dr_blk, da_blk) = if block == 1 {
        (rho_ra.matrix().clone(), d_r, d_a)
    } else {
        let rho2 = rho_ra.tensor(rho_ra);
        let mat =
            linalg::permute_subsystems(rho2.matrix(), &[d_r, d_a, d_r, d_a], &[0, 2, 1, 3])?;
        (mat, d_r * d_r, d_a * d_a)
    };
    let inner = opt.inner();
    let mut warm_a: Option<CMatrix> = None;
    let mut warm_b: Option<CMatrix> = None;
    let rho_r = linalg::partial_trace(&mat, &[dr_blk, da_blk], &[0])?;
    let rho_a = linalg::partial_trace(&mat, &[dr_blk, da_blk], &[1])?;
    let mut eval = |alpha: f64| -> (f64, f64) {
        let spec = effective_spec(DivergenceKind::Sandwiched, alpha);
        let mut sig_a = warm_a.clone().unwrap_or_else(|| rho_r.clone());
        let mut sig_b = warm_b.clone().unwrap_or_else(|| rho_a.clone());
        let mut value = f64::INFINITY;
        for _sweep in 0..40 {
            let res_b = entropic::min_one_side(
                &spec,
                &mat,
                &sig_a,
                Side::B,
                da_blk,
                &inner,
                Some(&[sig_b.clone()]),
            );
            sig_b = res_b.minimizer;
            let res_a = entropic::min_one_side(
                &spec,
                &mat,
                &sig_b,
                Side::A,
                dr_blk,
                &inner,
                Some(&[sig_a.clone()]),
            );
            sig_a = res_a.minimizer;
            let new_value = res_a.value;
            let decrease = value - new_value;
            value = new_value;
            if decrease.abs() < inner.convergence_tol {
                break;
            }
        }
        warm_a = Some(sig_a);
        warm_b = Some(sig_b);
        let payoff = value / block as f64 - 2.0 * r;
        (payoff, weight(alpha) * payoff)
    };
    Ok(curve_from_payoff(&mut eval, config))
}

/// Which hinge branch attained the dual optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualBranch {
    /// The hinge is inactive at the optimum (`statistic <= 0`).
    Unpenalized,
    /// The hinge contributes (`statistic >= 0`).
    Penalized,
}

/// Variational dual value `inf_tau { D(tau||rho) + |statistic(tau)|^+ }`.
#[derive(Debug, Clone)]
pub struct VariationalDual {
    pub value: f64,
    /// The optimizing state (ambient coordinates).
    pub optimizer: CMatrix,
    pub branch: DualBranch,
    /// Branch minimum with the hinge forced inactive (`statistic <= 0`).
    pub branch_unpenalized: f64,
    /// Branch minimum with the hinge active (`statistic >= 0`).
    pub branch_penalized: f64,
    /// Maximizing scalarization weight in [0, 1].
    pub lambda_star: f64,
    pub converged: bool,
}

/// Solve `inf_tau { base(tau) + |stat(tau)|^+ }` over a domain of density
/// matrices via the scalarization `sup_{lambda in [0,1]} h(lambda)`,
/// `h(lambda) = inf_tau { base + lambda * stat }` (concave in lambda, convex
/// inner problems). Branch values are recovered separately: the unpenalized
/// branch by penalty continuation towards `stat <= 0`, the penalized branch
/// from the unconstrained minimum of `base + stat`.
pub fn hinge_dual(
    domain: &Domain,
    base: &dyn Fn(&CMatrix) -> f64,
    stat: &dyn Fn(&CMatrix) -> f64,
    config: &OptimizerConfig,
) -> VariationalDual {
    let inner_cfg = config.inner();
    let mut warm: Option<Vec<CMatrix>>;
    let mut best_tau: Option<(f64, CMatrix)>;
    let mut all_converged = true;
    let h_of = |lambda: f64, warm_slot: &mut Option<Vec<CMatrix>>| -> (f64, CMatrix) {
        let mut f = |tau: &CMatrix| base(tau) + lambda * stat(tau);
        let res = optimize::minimize_over_states(&mut f, domain, &inner_cfg, warm_slot.as_deref());
        *warm_slot = Some(res.blocks.clone());
        (res.value, res.minimizer)
    };

    // multistart only the first solve; later lambda values warm-start
    {
        let mut f0 = |tau: &CMatrix| base(tau);
        let res = optimize::minimize_over_states(
            &mut f0,
            domain,
            &config.with_multistarts(config.multistart_count.max(2)),
            None,
        );
        all_converged &= res.converged;
        warm = Some(res.blocks.clone());
        best_tau = Some((res.value + 0.0f64.max(stat(&res.minimizer)), res.minimizer));
    }

    let mut h_eval = |lambda: f64| -> f64 {
        let (v, tau) = h_of(lambda, &mut warm);
        // every inner solution is feasible for the primal, giving an upper
        // bound base + |stat|^+ that we track alongside the dual value
        let primal = base(&tau) + stat(&tau).max(0.0);
        if best_tau.as_ref().map(|(b, _)| primal < *b).unwrap_or(true) {
            best_tau = Some((primal, tau));
        }
        v
    };
    let h0 = h_eval(0.0);
    let h1 = h_eval(1.0);
    let (lambda_star, mut value) = optimize::golden_section_max(&mut h_eval, 0.0, 1.0, 1e-6);
    let mut lam = lambda_star;
    if h0 >= value && h0 >= h1 {
        value = h0;
        lam = 0.0;
    }
    if h1 >= value && h1 >= h0 {
        value = h1;
        lam = 1.0;
    }

    // branch values for reporting
    let (primal_best, tau_best) = best_tau.expect("at least one solve ran");
    // penalized branch: unconstrained min of base + stat, valid when its
    // optimizer satisfies stat >= 0
    let warm_pen = Some(
        linalg::spectral(&tau_best, None)
            .ok()
            .map(|_| warm.clone().unwrap())
            .unwrap_or_else(|| domain.maximally_mixed()),
    );
    let (pen_unc, tau_pen) = {
        let mut f = |tau: &CMatrix| base(tau) + stat(tau);
        let res = optimize::minimize_over_states(
            &mut f,
            domain,
            &inner_cfg,
            warm_pen.as_deref(),
        );
        (res.value, res.minimizer)
    };
    let branch_penalized = if stat(&tau_pen) >= -1e-6 {
        pen_unc
    } else {
        // constrained to the boundary: take the scalarization value there
        value
    };
    // unpenalized branch: min base subject to stat <= 0 by penalty
    // continuation on mu * |stat|^+
    let branch_unpenalized = {
        let mut f0 = |tau: &CMatrix| base(tau);
        let res = optimize::minimize_over_states(&mut f0, domain, &inner_cfg, warm.as_deref());
        if stat(&res.minimizer) <= 1e-6 {
            res.value
        } else {
            let mut warm_c = Some(res.blocks);
            let mut out = f64::INFINITY;
            for mu in [2.0, 8.0, 32.0, 128.0] {
                let mut f = |tau: &CMatrix| base(tau) + mu * stat(tau).max(0.0);
                let res = optimize::minimize_over_states(&mut f, domain, &inner_cfg, warm_c.as_deref());
                warm_c = Some(res.blocks.clone());
                if stat(&res.minimizer) <= 1e-4 {
                    out = base(&res.minimizer);
                }
            }
            out
        }
    };

    let branch = if stat(&tau_best) <= 1e-9 {
        DualBranch::Unpenalized
    } else {
        DualBranch::Penalized
    };
    // the scalarization value is the certified one; the primal evaluations
    // provide the optimizer state
    let converged = all_converged && (primal_best - value).abs() <= 5e-4 * (1.0 + value.abs());
    VariationalDual {
        value,
        optimizer: tau_best,
        branch,
        branch_unpenalized,
        branch_penalized,
        lambda_star: lam,
        converged,
    }
}

/// Exact classical hinge dual on a probability simplex:
/// `inf_t { D(t||p) + |D(t||q) - r|^+ }` via the closed-form inner minimizer
/// `t(lambda) proportional to (p q^lambda)^{1/(1+lambda)}` and a 1-D
/// concave maximization over lambda. Returns `(value, lambda_star)`.
pub fn classical_hinge_dual(p: &[f64], q: &[f64], r: f64) -> (f64, f64) {
    let support: Vec<usize> = (0..p.len())
        .filter(|&i| p[i] > 0.0 && q[i] > 0.0)
        .collect();
    if support.is_empty() {
        return (f64::INFINITY, 1.0);
    }
    let mut h = |lambda: f64| -> f64 {
        let z: f64 = support
            .iter()
            .map(|&i| (p[i] * q[i].powf(lambda)).powf(1.0 / (1.0 + lambda)))
            .sum();
        -(1.0 + lambda) * z.log2() - lambda * r
    };
    let (lam, val) = optimize::golden_section_max(&mut h, 1e-12, 1.0, 1e-12);
    let ends = [(1e-12, h(1e-12)), (1.0, h(1.0))];
    let mut best = (lam, val);
    for (x, v) in ends {
        if v > best.1 {
            best = (x, v);
        }
    }
    (best.1, best.0)
}

/// Variational dual for the smoothing exponent:
/// `inf_tau { D(tau||rho) + |D(tau||sigma) - r|^+ }`. Commuting inputs are
/// solved exactly on the classical simplex in the common eigenbasis.
pub fn dual_dmax(
    rho: &CMatrix,
    sigma: &CMatrix,
    r: f64,
    config: &OptimizerConfig,
) -> VariationalDual {
    if let Some((basis, p, q)) = linalg::simultaneous_diagonalization(rho, sigma) {
        let (value, lambda_star) = classical_hinge_dual(&p, &q, r);
        // closed-form optimizer at lambda_star
        let d = rho.nrows();
        let mut t = vec![0.0; d];
        let mut z = 0.0;
        for i in 0..d {
            if p[i] > 0.0 && q[i] > 0.0 {
                t[i] = (p[i] * q[i].powf(lambda_star)).powf(1.0 / (1.0 + lambda_star));
                z += t[i];
            }
        }
        let mut tau = CMatrix::zeros(d, d);
        if z > 0.0 {
            for i in 0..d {
                if t[i] > 0.0 {
                    let v = basis.column(i);
                    tau += v.scale(t[i] / z) * v.adjoint();
                }
            }
        }
        let stat_rho = if z > 0.0 {
            umegaki_relative_entropy(&tau, sigma) - r
        } else {
            f64::INFINITY
        };
        return VariationalDual {
            value,
            optimizer: tau,
            branch: if stat_rho <= 0.0 {
                DualBranch::Unpenalized
            } else {
                DualBranch::Penalized
            },
            branch_unpenalized: if dmax_zero(rho, sigma) <= r {
                0.0
            } else {
                value
            },
            branch_penalized: value.max(0.0),
            lambda_star,
            converged: true,
        };
    }
    let isom = linalg::support_intersection_isometry(rho, sigma);
    if isom.ncols() == 0 {
        return VariationalDual {
            value: f64::INFINITY,
            optimizer: CMatrix::zeros(rho.nrows(), rho.nrows()),
            branch: DualBranch::Penalized,
            branch_unpenalized: f64::INFINITY,
            branch_penalized: f64::INFINITY,
            lambda_star: 1.0,
            converged: true,
        };
    }
    let domain = Domain::supported(isom);
    let base = |tau: &CMatrix| umegaki_relative_entropy(tau, rho);
    let stat = |tau: &CMatrix| umegaki_relative_entropy(tau, sigma) - r;
    hinge_dual(&domain, &base, &stat, config)
}

/// CQ-restricted domain spanning `supp(rho_E^x)` per symbol with `p_x > 0`.
fn cq_domain(cq: &CqState) -> Domain {
    let d_e = cq.dim_e();
    let d = cq.alphabet_size() * d_e;
    let mut embeds = Vec::new();
    for (x, (p, cond)) in cq.probs().iter().zip(cq.cond_states()).enumerate() {
        if *p <= 0.0 {
            continue;
        }
        let spec = linalg::spectral(cond, None).expect("cond state Hermitian");
        let isom_e = spec.support_isometry();
        let mut embed = CMatrix::zeros(d, isom_e.ncols());
        for c in 0..isom_e.ncols() {
            for e in 0..d_e {
                embed[(x * d_e + e, c)] = isom_e[(e, c)];
            }
        }
        embeds.push(embed);
    }
    Domain::block_diag(embeds)
}

/// Variational dual for privacy amplification:
/// `inf over CQ tau in S_rho of { D(tau||rho) + |r - H(X|E)_tau|^+ }`.
pub fn dual_pa(cq: &CqState, r: f64, config: &OptimizerConfig) -> VariationalDual {
    let joint = cq.joint().matrix().clone();
    let d_x = cq.alphabet_size();
    let d_e = cq.dim_e();
    let domain = cq_domain(cq);
    let base = move |tau: &CMatrix| umegaki_relative_entropy(tau, &joint);
    let stat = move |tau: &CMatrix| {
        let h_xe = linalg::entropy_bits(tau);
        let tau_e = linalg::partial_trace(tau, &[d_x, d_e], &[1]).expect("dims fixed");
        let h_e = linalg::entropy_bits(&tau_e);
        r - (h_xe - h_e)
    };
    hinge_dual(&domain, &base, &stat, config)
}

/// Variational dual for decoupling:
/// `inf over tau in S_rho(RA) of { D(tau||rho) + |I(R:A)_tau - 2r|^+ }`.
pub fn dual_dec(rho_ra: &DensityMatrix, r: f64, config: &OptimizerConfig) -> VariationalDual {
    let (d_r, d_a) = (rho_ra.dims()[0], rho_ra.dims()[1]);
    let spec = linalg::spectral(rho_ra.matrix(), None).expect("state Hermitian");
    let domain = Domain::supported(spec.support_isometry());
    let mat = rho_ra.matrix().clone();
    let base = move |tau: &CMatrix| umegaki_relative_entropy(tau, &mat);
    let stat = move |tau: &CMatrix| {
        let h_ra = linalg::entropy_bits(tau);
        let tau_r = linalg::partial_trace(tau, &[d_r, d_a], &[0]).expect("dims fixed");
        let tau_a = linalg::partial_trace(tau, &[d_r, d_a], &[1]).expect("dims fixed");
        linalg::entropy_bits(&tau_r) + linalg::entropy_bits(&tau_a) - h_ra - 2.0 * r
    };
    hinge_dual(&domain, &base, &stat, config)
}
