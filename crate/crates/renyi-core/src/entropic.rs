//! Conditional Renyi entropies and Renyi mutual informations defined by
//! minimizations over density matrices, plus finite-block estimates of the
//! regularized sandwiched mutual information.
//!
//! Every quantity reduces to `min over product-marginal states of a
//! divergence`, driven by the mirror-descent engine in [`crate::optimize`].
//! Values at `alpha = 1` are always the Umegaki limits, never extrapolated.

use crate::divergence::{divergence, DivergenceKind, DivergenceSpec};
use crate::error::CoreError;
use crate::linalg::{self, CMatrix};
use crate::optimize::{self, Domain, MinimizeResult, OptimizerConfig};
use crate::state::DensityMatrix;

/// Which marginal of a bipartite divergence objective varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Mutual information variant: joint minimization over both marginals
/// (`I_alpha`) or minimization over `sigma_B` with `sigma_A = rho_A` pinned
/// (`I-bar_alpha`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MiVariant {
    DoubleMin,
    FixedMarginal,
}

/// Result of an entropic optimization, in bits.
#[derive(Debug, Clone)]
pub struct EntropicValue {
    pub value: f64,
    /// Optimizing marginal on `A`, when the problem has one.
    pub optimizer_a: Option<CMatrix>,
    /// Optimizing marginal on `B`.
    pub optimizer_b: Option<CMatrix>,
    /// False when any inner solve hit its iteration cap before meeting the
    /// tolerance; the value is still the best found (never silently wrong).
    pub converged: bool,
    /// Objective decrease over the last accepted optimizer step.
    pub gap_certificate: f64,
    /// Spread of outer multistart optima; a warning-level signal when above
    /// 1e-6 for the jointly non-convex double minimization.
    pub multistart_spread: f64,
}

/// The divergence actually evaluated for `(kind, alpha)`: `alpha = 1` is the
/// Umegaki limit for every Renyi kind.
pub fn effective_spec(kind: DivergenceKind, alpha: f64) -> DivergenceSpec {
    if alpha == 1.0 {
        DivergenceSpec::umegaki()
    } else {
        DivergenceSpec {
            kind,
            alpha,
            smoothing_eps: 0.0,
        }
    }
}

fn bipartite_dims(rho: &DensityMatrix) -> Result<(usize, usize), CoreError> {
    match rho.dims() {
        [a, b] => Ok((*a, *b)),
        other => Err(CoreError::BadDims {
            dims: other.to_vec(),
            reason: "expected a bipartite state".into(),
        }),
    }
}

/// Minimize `sigma -> D(rho_ab || fixed (x) sigma)` (side B) or
/// `D(rho_ab || sigma (x) fixed)` (side A) over normalized states.
pub fn min_one_side(
    spec: &DivergenceSpec,
    rho_ab: &CMatrix,
    fixed: &CMatrix,
    side: Side,
    vary_dim: usize,
    config: &OptimizerConfig,
    warm: Option<&[CMatrix]>,
) -> MinimizeResult {
    let mut objective = |sigma: &CMatrix| -> f64 {
        let product = match side {
            Side::B => linalg::kron(fixed, sigma),
            Side::A => linalg::kron(sigma, fixed),
        };
        divergence(spec, rho_ab, &product)
            .map(|v| v.value)
            .unwrap_or(f64::INFINITY)
    };
    optimize::minimize_over_states(&mut objective, &Domain::full(vary_dim), config, warm)
}

/// `min over sigma_B of D_kind,alpha(rho_AB || x_a (x) sigma_B)`.
///
/// `x_a` is any PSD operator on `A` (the identity for conditional entropies,
/// `rho_A` for the fixed-marginal mutual information, an arbitrary `tau_A`
/// for the duality relations).
pub fn min_over_sigma(
    kind: DivergenceKind,
    alpha: f64,
    rho_ab: &DensityMatrix,
    x_a: &CMatrix,
    config: &OptimizerConfig,
) -> Result<EntropicValue, CoreError> {
    let (_, d_b) = bipartite_dims(rho_ab)?;
    let spec = effective_spec(kind, alpha);
    spec.validate()?;
    let res = min_one_side(&spec, rho_ab.matrix(), x_a, Side::B, d_b, config, None);
    Ok(EntropicValue {
        value: res.value,
        optimizer_a: None,
        optimizer_b: Some(res.minimizer),
        converged: res.converged,
        gap_certificate: res.last_decrease,
        multistart_spread: res.multistart_spread,
    })
}

/// Conditional Renyi entropy `H_alpha(A|B) = -min_sigma D(rho_AB || 1_A (x) sigma_B)`.
pub fn conditional_entropy(
    kind: DivergenceKind,
    alpha: f64,
    rho_ab: &DensityMatrix,
    config: &OptimizerConfig,
) -> Result<EntropicValue, CoreError> {
    let (d_a, _) = bipartite_dims(rho_ab)?;
    let mut out = min_over_sigma(kind, alpha, rho_ab, &linalg::identity(d_a), config)?;
    out.value = -out.value;
    Ok(out)
}

/// Renyi mutual information, either the double minimization over
/// `sigma_A (x) sigma_B` (alternating exact-direction solves with multistart)
/// or the fixed-marginal variant pinned at `sigma_A = rho_A`.
pub fn mutual_information(
    kind: DivergenceKind,
    alpha: f64,
    rho_ab: &DensityMatrix,
    variant: MiVariant,
    config: &OptimizerConfig,
) -> Result<EntropicValue, CoreError> {
    let (d_a, d_b) = bipartite_dims(rho_ab)?;
    let spec = effective_spec(kind, alpha);
    spec.validate()?;
    let rho_a = rho_ab.partial_trace(&[0])?.matrix().clone();
    let rho_b = rho_ab.partial_trace(&[1])?.matrix().clone();
    match variant {
        MiVariant::FixedMarginal => {
            let res = min_one_side(&spec, rho_ab.matrix(), &rho_a, Side::B, d_b, config, None);
            Ok(EntropicValue {
                value: res.value,
                optimizer_a: Some(rho_a),
                optimizer_b: Some(res.minimizer),
                converged: res.converged,
                gap_certificate: res.last_decrease,
                multistart_spread: res.multistart_spread,
            })
        }
        MiVariant::DoubleMin => {
            let inner = config.inner();
            let starts = config.multistart_count.max(1);
            let mut rng = crate::random::rng_from_seed(config.seed);
            let mut best: Option<EntropicValue> = None;
            let mut optima: Vec<f64> = Vec::new();
            for start in 0..starts {
                let (mut sig_a, mut sig_b) = if start == 0 {
                    (rho_a.clone(), rho_b.clone())
                } else {
                    (
                        crate::random::random_density_mat(d_a, d_a, &mut rng),
                        crate::random::random_density_mat(d_b, d_b, &mut rng),
                    )
                };
                let mut value = f64::INFINITY;
                let mut converged = false;
                let mut last = f64::INFINITY;
                for _sweep in 0..60 {
                    let res_b = min_one_side(
                        &spec,
                        rho_ab.matrix(),
                        &sig_a,
                        Side::B,
                        d_b,
                        &inner,
                        Some(&[sig_b.clone()]),
                    );
                    sig_b = res_b.minimizer;
                    let res_a = min_one_side(
                        &spec,
                        rho_ab.matrix(),
                        &sig_b,
                        Side::A,
                        d_a,
                        &inner,
                        Some(&[sig_a.clone()]),
                    );
                    sig_a = res_a.minimizer;
                    let new_value = res_a.value;
                    last = value - new_value;
                    converged = res_a.converged && res_b.converged;
                    value = new_value;
                    if last.abs() < config.convergence_tol {
                        break;
                    }
                }
                optima.push(value);
                let candidate = EntropicValue {
                    value,
                    optimizer_a: Some(sig_a),
                    optimizer_b: Some(sig_b),
                    converged,
                    gap_certificate: last.abs(),
                    multistart_spread: 0.0,
                };
                if best.as_ref().map(|b| value < b.value).unwrap_or(true) {
                    best = Some(candidate);
                }
            }
            let finite: Vec<f64> = optima.into_iter().filter(|v| v.is_finite()).collect();
            let spread = if finite.len() > 1 {
                finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                    - finite.iter().cloned().fold(f64::INFINITY, f64::min)
            } else {
                0.0
            };
            let mut out = best.expect("at least one start");
            out.multistart_spread = spread;
            Ok(out)
        }
    }
}

/// Per-block values `(1/m) I_alpha(R^m : A^m)` for `m = 1..=max_block`
/// (`max_block <= 2`). By subadditivity the sequence is non-increasing, so
/// the last entry is the tightest computable upper bound on the regularized
/// mutual information.
pub fn regularized_mutual_information_estimate(
    kind: DivergenceKind,
    alpha: f64,
    rho_ra: &DensityMatrix,
    max_block: usize,
    config: &OptimizerConfig,
) -> Result<Vec<f64>, CoreError> {
    let (d_r, d_a) = bipartite_dims(rho_ra)?;
    if !(1..=2).contains(&max_block) {
        return Err(CoreError::SizeLimit(format!(
            "max_block must be 1 or 2, got {max_block}"
        )));
    }
    let total = (d_r * d_a).pow(max_block as u32);
    if total > 64 {
        return Err(CoreError::SizeLimit(format!(
            "dimension {total} exceeds 64 at block {max_block}"
        )));
    }
    let mut values = Vec::with_capacity(max_block);
    let v1 = mutual_information(kind, alpha, rho_ra, MiVariant::DoubleMin, config)?;
    values.push(v1.value);
    if max_block == 2 {
        let rho2 = rho_ra.tensor(rho_ra);
        // reorder [R1 A1 R2 A2] -> [R1 R2 A1 A2]
        let mat = linalg::permute_subsystems(rho2.matrix(), &[d_r, d_a, d_r, d_a], &[0, 2, 1, 3])?;
        let grouped = DensityMatrix::new(vec![d_r * d_r, d_a * d_a], mat, true)?;
        let v2 = mutual_information(kind, alpha, &grouped, MiVariant::DoubleMin, config)?;
        values.push(v2.value / 2.0);
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{entropy_bits, identity, kron};
    use crate::random::{random_density_mat, rng_from_seed};
    use crate::state::diagonal_density;
    use nalgebra::DVector;
    use num_complex::Complex64;

    fn cfg() -> OptimizerConfig {
        OptimizerConfig {
            multistart_count: 3,
            ..Default::default()
        }
    }

    fn bipartite(mat: CMatrix, d_a: usize, d_b: usize) -> DensityMatrix {
        DensityMatrix::new(vec![d_a, d_b], mat, true).unwrap()
    }

    fn maximally_entangled_pair() -> DensityMatrix {
        let mut psi = DVector::zeros(4);
        psi[0] = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
        psi[3] = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
        DensityMatrix::from_pure(vec![2, 2], &psi).unwrap()
    }

    /// Brute-force oracle: minimum of the divergence over a Bloch-ball grid
    /// of qubit sigma_B with the given step.
    fn bloch_grid_min(
        spec: &DivergenceSpec,
        rho_ab: &CMatrix,
        x_a: &CMatrix,
        step: f64,
    ) -> f64 {
        let n = (2.0 / step).round() as i64;
        let mut best = f64::INFINITY;
        for ix in 0..=n {
            let x = -1.0 + step * ix as f64;
            for iy in 0..=n {
                let y = -1.0 + step * iy as f64;
                let norm2_xy = x * x + y * y;
                if norm2_xy > 1.0 {
                    continue;
                }
                for iz in 0..=n {
                    let z = -1.0 + step * iz as f64;
                    if norm2_xy + z * z > 1.0 {
                        continue;
                    }
                    let sigma = CMatrix::from_fn(2, 2, |i, j| match (i, j) {
                        (0, 0) => Complex64::new((1.0 + z) / 2.0, 0.0),
                        (1, 1) => Complex64::new((1.0 - z) / 2.0, 0.0),
                        (0, 1) => Complex64::new(x / 2.0, -y / 2.0),
                        (1, 0) => Complex64::new(x / 2.0, y / 2.0),
                        _ => unreachable!(),
                    });
                    let product = kron(x_a, &sigma);
                    let v = divergence(spec, rho_ab, &product).unwrap().value;
                    if v < best {
                        best = v;
                    }
                }
            }
        }
        best
    }

    #[test]
    fn umegaki_conditional_entropy_matches_entropy_difference() {
        let mut rng = rng_from_seed(1);
        for _ in 0..3 {
            let rho = bipartite(random_density_mat(4, 4, &mut rng), 2, 2);
            let h = conditional_entropy(DivergenceKind::Umegaki, 1.0, &rho, &cfg())
                .unwrap()
                .value;
            let h_ab = entropy_bits(rho.matrix());
            let h_b = entropy_bits(rho.partial_trace(&[1]).unwrap().matrix());
            assert!((h - (h_ab - h_b)).abs() <= 1e-7, "{h} vs {}", h_ab - h_b);
        }
    }

    #[test]
    fn product_state_reduces_to_renyi_entropy() {
        let mut rng = rng_from_seed(2);
        let p = [0.3, 0.7];
        let rho_x = diagonal_density(&p, true).unwrap();
        let rho_e = random_density_mat(2, 2, &mut rng);
        let joint = bipartite(kron(rho_x.matrix(), &rho_e), 2, 2);
        for alpha in [0.5, 0.8, 1.4] {
            let h = conditional_entropy(DivergenceKind::Sandwiched, alpha, &joint, &cfg())
                .unwrap()
                .value;
            let renyi = (p[0].powf(alpha) + p[1].powf(alpha)).log2() / (1.0 - alpha);
            assert!((h - renyi).abs() <= 1e-6, "alpha {alpha}: {h} vs {renyi}");
        }
        // uniform bit: exactly 1 for every alpha
        let uniform = diagonal_density(&[0.5, 0.5], true).unwrap();
        let joint = bipartite(kron(uniform.matrix(), &rho_e), 2, 2);
        for alpha in [0.5, 0.9, 2.0] {
            let h = conditional_entropy(DivergenceKind::Sandwiched, alpha, &joint, &cfg())
                .unwrap()
                .value;
            assert!((h - 1.0).abs() <= 1e-6);
        }
    }

    #[test]
    fn classical_copy_state_has_zero_conditional_entropy() {
        // perfectly correlated uniform bits: H(A|B) = H(AB) - H(B) = 0
        let mut mat = CMatrix::zeros(4, 4);
        mat[(0, 0)] = Complex64::new(0.5, 0.0);
        mat[(3, 3)] = Complex64::new(0.5, 0.0);
        let rho = bipartite(mat, 2, 2);
        let h = conditional_entropy(DivergenceKind::Umegaki, 1.0, &rho, &cfg())
            .unwrap()
            .value;
        assert!(h.abs() <= 1e-7);
    }

    #[test]
    fn maximally_entangled_conditional_entropy_at_half() {
        let rho = maximally_entangled_pair();
        let got = conditional_entropy(DivergenceKind::Sandwiched, 0.5, &rho, &cfg())
            .unwrap()
            .value;
        assert!((got + 1.0).abs() <= 1e-5, "H*_1/2(A|B) = {got}");
    }

    #[test]
    fn optimizer_matches_bloch_grid_oracle() {
        // random 2x2 state, sandwiched 0.5 conditional entropy objective
        let mut rng = rng_from_seed(3);
        let rho = bipartite(random_density_mat(4, 4, &mut rng), 2, 2);
        let spec = DivergenceSpec::sandwiched(0.5);
        let grid = bloch_grid_min(&spec, rho.matrix(), &identity(2), 0.02);
        let opt = min_over_sigma(DivergenceKind::Sandwiched, 0.5, &rho, &identity(2), &cfg())
            .unwrap()
            .value;
        assert!(
            (opt - grid).abs() <= 2e-4,
            "optimizer {opt} vs grid oracle {grid}"
        );
        assert!(opt <= grid + 1e-9, "optimizer must not exceed the grid min");
    }

    #[test]
    fn mutual_information_zero_on_product_states() {
        let mut rng = rng_from_seed(4);
        let a = random_density_mat(2, 2, &mut rng);
        let b = random_density_mat(2, 2, &mut rng);
        let rho = bipartite(kron(&a, &b), 2, 2);
        for kind in [
            DivergenceKind::Sandwiched,
            DivergenceKind::LogEuclidean,
            DivergenceKind::Petz,
        ] {
            for variant in [MiVariant::DoubleMin, MiVariant::FixedMarginal] {
                let v = mutual_information(kind, 0.7, &rho, variant, &cfg())
                    .unwrap()
                    .value;
                assert!(v.abs() <= 1e-6, "{kind:?} {variant:?}: {v}");
            }
        }
        let v = mutual_information(DivergenceKind::Umegaki, 1.0, &rho, MiVariant::DoubleMin, &cfg())
            .unwrap()
            .value;
        assert!(v.abs() <= 1e-6);
    }

    #[test]
    fn umegaki_double_min_matches_entropy_sum() {
        let mut rng = rng_from_seed(5);
        let rho = bipartite(random_density_mat(4, 3, &mut rng), 2, 2);
        let mi = mutual_information(
            DivergenceKind::Umegaki,
            1.0,
            &rho,
            MiVariant::DoubleMin,
            &cfg(),
        )
        .unwrap()
        .value;
        let h_a = entropy_bits(rho.partial_trace(&[0]).unwrap().matrix());
        let h_b = entropy_bits(rho.partial_trace(&[1]).unwrap().matrix());
        let h_ab = entropy_bits(rho.matrix());
        assert!(
            (mi - (h_a + h_b - h_ab)).abs() <= 1e-7,
            "{mi} vs {}",
            h_a + h_b - h_ab
        );
    }

    #[test]
    fn fixed_marginal_mi_matches_bloch_grid_on_entangled_pair() {
        let rho = maximally_entangled_pair();
        let rho_a = rho.partial_trace(&[0]).unwrap().matrix().clone();
        let spec = DivergenceSpec::sandwiched(0.5);
        let grid = bloch_grid_min(&spec, rho.matrix(), &rho_a, 0.02);
        let got = mutual_information(
            DivergenceKind::Sandwiched,
            0.5,
            &rho,
            MiVariant::FixedMarginal,
            &cfg(),
        )
        .unwrap()
        .value;
        assert!((got - grid).abs() <= 2e-4, "{got} vs grid {grid}");
    }

    #[test]
    fn block_estimates_product_and_subadditive() {
        let mut rng = rng_from_seed(6);
        let a = random_density_mat(2, 2, &mut rng);
        let b = random_density_mat(2, 2, &mut rng);
        let prod = bipartite(kron(&a, &b), 2, 2);
        let vals = regularized_mutual_information_estimate(
            DivergenceKind::Sandwiched,
            0.7,
            &prod,
            2,
            &cfg(),
        )
        .unwrap();
        assert!(vals[0].abs() <= 1e-5);
        assert!(vals[1].abs() <= 1e-5);

        let rho = bipartite(random_density_mat(4, 4, &mut rng), 2, 2);
        let vals = regularized_mutual_information_estimate(
            DivergenceKind::Sandwiched,
            0.7,
            &rho,
            2,
            &cfg(),
        )
        .unwrap();
        assert!(vals[1] <= vals[0] + 1e-7, "subadditivity: {vals:?}");
    }

    #[test]
    fn classical_correlated_pair_is_additive() {
        // classical joint distribution embedded as a diagonal state
        let joint = [0.4, 0.1, 0.2, 0.3];
        let rho = bipartite(diagonal_density(&joint, true).unwrap().matrix().clone(), 2, 2);
        let vals = regularized_mutual_information_estimate(
            DivergenceKind::Sandwiched,
            0.6,
            &rho,
            2,
            &cfg(),
        )
        .unwrap();
        assert!(
            (vals[1] - vals[0]).abs() <= 1e-6,
            "classical additivity: {vals:?}"
        );
    }

    #[test]
    fn dimension_overflow_rejected() {
        let mut rng = rng_from_seed(7);
        let rho = bipartite(random_density_mat(9, 9, &mut rng), 3, 3);
        assert!(matches!(
            regularized_mutual_information_estimate(
                DivergenceKind::Sandwiched,
                0.7,
                &rho,
                2,
                &cfg()
            ),
            Err(CoreError::SizeLimit(_))
        ));
    }

    #[test]
    fn discarding_classical_information_monotonicity() {
        // H*_a(XA|B) >= H*_a(A|B) on CQ-extended states
        let mut rng = rng_from_seed(8);
        for _ in 0..3 {
            let rho_ab1 = random_density_mat(4, 4, &mut rng);
            let rho_ab2 = random_density_mat(4, 4, &mut rng);
            let (px, alpha) = (0.35, 0.7);
            // rho_XAB block diagonal over the classical X
            let mut mat = CMatrix::zeros(8, 8);
            for i in 0..4 {
                for j in 0..4 {
                    mat[(i, j)] = rho_ab1[(i, j)] * Complex64::new(px, 0.0);
                    mat[(4 + i, 4 + j)] = rho_ab2[(i, j)] * Complex64::new(1.0 - px, 0.0);
                }
            }
            // group X and A together: dims [XA, B] = [4, 2]
            let rho_xab = bipartite(mat, 4, 2);
            let h_xa_b =
                conditional_entropy(DivergenceKind::Sandwiched, alpha, &rho_xab, &cfg())
                    .unwrap()
                    .value;
            // marginal on AB: average the blocks
            let avg = rho_ab1.scale(px) + rho_ab2.scale(1.0 - px);
            let rho_ab = bipartite(avg, 2, 2);
            let h_a_b = conditional_entropy(DivergenceKind::Sandwiched, alpha, &rho_ab, &cfg())
                .unwrap()
                .value;
            assert!(h_xa_b >= h_a_b - 1e-7, "{h_xa_b} vs {h_a_b}");
        }
    }
}
