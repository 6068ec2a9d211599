//! Density matrices, observables and classical-quantum states, with JSON
//! loading that validates every invariant up front.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::linalg::{self, CMatrix, CVector, HERMITIAN_TOL};

/// Spectral decomposition with eigenvalues sorted descending; see
/// [`linalg::spectral`].
pub type SpectralDecomposition = linalg::Spectral;

const PSD_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;

/// Hermitian positive semidefinite matrix with declared subsystem dimensions.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    mat: CMatrix,
    normalized: bool,
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity and the trace constraint
    /// (`trace = 1` when normalized, `0 < trace <= 1` when subnormalized).
    pub fn new(dims: Vec<usize>, mat: CMatrix, normalized: bool) -> Result<Self, CoreError> {
        let total: usize = dims.iter().product();
        if dims.is_empty() || dims.contains(&0) {
            return Err(CoreError::BadDims {
                dims,
                reason: "dims must be nonempty positive integers".into(),
            });
        }
        if mat.nrows() != mat.ncols() {
            return Err(CoreError::NotSquare(mat.nrows(), mat.ncols()));
        }
        if mat.nrows() != total {
            return Err(CoreError::DimensionMismatch {
                expected: total,
                got: mat.nrows(),
            });
        }
        linalg::check_hermitian(&mat, HERMITIAN_TOL)?;
        let spec = linalg::spectral(&mat, None)?;
        let min_eig = spec.eigenvalues.last().copied().unwrap_or(0.0);
        if min_eig < -PSD_TOL {
            return Err(CoreError::NotPsd { min_eig });
        }
        let trace = linalg::trace_re(&mat);
        if normalized {
            if (trace - 1.0).abs() > TRACE_TOL {
                return Err(CoreError::BadTrace {
                    trace,
                    constraint: "trace = 1 (normalized)".into(),
                });
            }
        } else if trace <= 0.0 || trace > 1.0 + TRACE_TOL {
            return Err(CoreError::BadTrace {
                trace,
                constraint: "trace in (0, 1] (subnormalized)".into(),
            });
        }
        Ok(Self {
            dims,
            mat: linalg::hermitize(&mat),
            normalized,
        })
    }

    pub fn from_pure(dims: Vec<usize>, psi: &CVector) -> Result<Self, CoreError> {
        let norm = psi.norm();
        let v = psi / Complex64::new(norm, 0.0);
        Self::new(dims, &v * v.adjoint(), true)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn trace(&self) -> f64 {
        linalg::trace_re(&self.mat)
    }

    /// Reinterpret the same matrix with a different subsystem split.
    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self, CoreError> {
        Self::new(dims, self.mat.clone(), self.normalized)
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix, CoreError> {
        let reduced = linalg::partial_trace(&self.mat, &self.dims, keep)?;
        let mut keep_sorted = keep.to_vec();
        keep_sorted.sort_unstable();
        keep_sorted.dedup();
        let dims = keep_sorted.iter().map(|&k| self.dims[k]).collect();
        DensityMatrix::new(dims, reduced, self.normalized)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityMatrix {
            dims,
            mat: linalg::kron(&self.mat, &other.mat),
            normalized: self.normalized && other.normalized,
        }
    }

    /// `rho^{tensor n}`.
    pub fn tensor_power(&self, n: usize) -> DensityMatrix {
        assert!(n >= 1, "tensor power needs n >= 1");
        let mut out = self.clone();
        for _ in 1..n {
            out = out.tensor(self);
        }
        out
    }
}

/// Hermitian operator with declared subsystem dimensions (no positivity
/// requirement).
#[derive(Debug, Clone)]
pub struct HermitianObservable {
    dims: Vec<usize>,
    mat: CMatrix,
}

impl HermitianObservable {
    pub fn new(dims: Vec<usize>, mat: CMatrix) -> Result<Self, CoreError> {
        let total: usize = dims.iter().product();
        if mat.nrows() != mat.ncols() {
            return Err(CoreError::NotSquare(mat.nrows(), mat.ncols()));
        }
        if mat.nrows() != total || total == 0 {
            return Err(CoreError::DimensionMismatch {
                expected: total,
                got: mat.nrows(),
            });
        }
        linalg::check_hermitian(&mat, HERMITIAN_TOL)?;
        Ok(Self {
            dims,
            mat: linalg::hermitize(&mat),
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Spectral decomposition; `support_cutoff = None` uses the default
    /// relative cutoff.
    pub fn spectral(&self, support_cutoff: Option<f64>) -> Result<SpectralDecomposition, CoreError> {
        linalg::spectral(&self.mat, support_cutoff)
    }
}

/// Fidelity between two states carried as [`DensityMatrix`] values; checks
/// dimension compatibility first.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, CoreError> {
    if rho.total_dim() != sigma.total_dim() {
        return Err(CoreError::DimensionMismatch {
            expected: rho.total_dim(),
            got: sigma.total_dim(),
        });
    }
    Ok(linalg::fidelity(rho.matrix(), sigma.matrix()))
}

/// Purified distance `sqrt(1 - F^2)`.
pub fn purified_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, CoreError> {
    let f = fidelity(rho, sigma)?;
    Ok((1.0 - f * f).max(0.0).sqrt())
}

/// Classical-quantum state: a probability vector over a finite alphabet plus
/// one conditional density matrix per symbol.
#[derive(Debug, Clone)]
pub struct CqState {
    probs: Vec<f64>,
    cond_states: Vec<CMatrix>,
    dim_e: usize,
}

impl CqState {
    pub fn new(probs: Vec<f64>, cond_states: Vec<CMatrix>) -> Result<Self, CoreError> {
        if probs.is_empty() || probs.len() != cond_states.len() {
            return Err(CoreError::BadProbability {
                index: 0,
                reason: format!(
                    "need matching nonempty probs ({}) and cond_states ({})",
                    probs.len(),
                    cond_states.len()
                ),
            });
        }
        for (i, &p) in probs.iter().enumerate() {
            if !(0.0..=1.0 + 1e-12).contains(&p) {
                return Err(CoreError::BadProbability {
                    index: i,
                    reason: format!("probability {p} outside [0, 1]"),
                });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(CoreError::BadProbability {
                index: 0,
                reason: format!("probabilities sum to {sum}, expected 1"),
            });
        }
        let dim_e = cond_states[0].nrows();
        for (i, c) in cond_states.iter().enumerate() {
            if c.nrows() != dim_e || c.ncols() != dim_e {
                return Err(CoreError::BadDims {
                    dims: vec![c.nrows(), c.ncols()],
                    reason: format!("cond_states[{i}] must be {dim_e}x{dim_e}"),
                });
            }
            // validate as a normalized state
            DensityMatrix::new(vec![dim_e], c.clone(), true).map_err(|e| CoreError::FileFormat {
                field: format!("cond_states[{i}]"),
                reason: e.to_string(),
            })?;
        }
        Ok(Self {
            probs,
            cond_states,
            dim_e,
        })
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn dim_e(&self) -> usize {
        self.dim_e
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn cond_states(&self) -> &[CMatrix] {
        &self.cond_states
    }

    /// The joint state `sum_x p(x) |x><x| (x) rho_E^x` with dims `[|X|, d_E]`.
    pub fn joint(&self) -> DensityMatrix {
        let x = self.alphabet_size();
        let d = x * self.dim_e;
        let mut mat = CMatrix::zeros(d, d);
        for (i, c) in self.cond_states.iter().enumerate() {
            let block = c.scale(self.probs[i]);
            for a in 0..self.dim_e {
                for b in 0..self.dim_e {
                    mat[(i * self.dim_e + a, i * self.dim_e + b)] = block[(a, b)];
                }
            }
        }
        DensityMatrix::new(vec![x, self.dim_e], mat, true).expect("CQ joint state is valid")
    }

    /// Marginal on the quantum side, `sum_x p(x) rho_E^x`.
    pub fn env_marginal(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_e, self.dim_e);
        for (p, c) in self.probs.iter().zip(&self.cond_states) {
            out += c.scale(*p);
        }
        out
    }

    /// i.i.d. extension with alphabet `X^n`; symbol index is the base-|X|
    /// expansion of the new index (most significant digit first).
    pub fn tensor_power(&self, n: usize) -> CqState {
        assert!(n >= 1);
        let mut probs = self.probs.clone();
        let mut cond = self.cond_states.clone();
        for _ in 1..n {
            let mut new_probs = Vec::with_capacity(probs.len() * self.probs.len());
            let mut new_cond = Vec::with_capacity(probs.len() * self.probs.len());
            for (p, c) in probs.iter().zip(&cond) {
                for (q, d) in self.probs.iter().zip(&self.cond_states) {
                    new_probs.push(p * q);
                    new_cond.push(linalg::kron(c, d));
                }
            }
            probs = new_probs;
            cond = new_cond;
        }
        CqState {
            probs,
            cond_states: cond,
            dim_e: self.dim_e.pow(n as u32),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    dims: Vec<usize>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
    #[serde(default = "default_true")]
    normalized: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Serialize, Deserialize)]
struct CqJson {
    probs: Vec<f64>,
    cond_states: Vec<StateJson>,
}

fn matrix_from_parts(
    re_rows: &[Vec<f64>],
    im_rows: &[Vec<f64>],
    expected: usize,
    ctx: &str,
) -> Result<CMatrix, CoreError> {
    if re_rows.len() != expected {
        return Err(CoreError::FileFormat {
            field: format!("{ctx}re"),
            reason: format!("{} rows, expected {expected}", re_rows.len()),
        });
    }
    if im_rows.len() != expected {
        return Err(CoreError::FileFormat {
            field: format!("{ctx}im"),
            reason: format!("{} rows, expected {expected}", im_rows.len()),
        });
    }
    for (i, row) in re_rows.iter().enumerate() {
        if row.len() != expected {
            return Err(CoreError::FileFormat {
                field: format!("{ctx}re[{i}]"),
                reason: format!("row length {}, expected {expected}", row.len()),
            });
        }
    }
    for (i, row) in im_rows.iter().enumerate() {
        if row.len() != expected {
            return Err(CoreError::FileFormat {
                field: format!("{ctx}im[{i}]"),
                reason: format!("row length {}, expected {expected}", row.len()),
            });
        }
    }
    Ok(CMatrix::from_fn(expected, expected, |i, j| {
        Complex64::new(re_rows[i][j], im_rows[i][j])
    }))
}

impl DensityMatrix {
    /// Parse from the JSON state format
    /// `{"dims":[..],"re":[[..]],"im":[[..]],"normalized":true}`.
    pub fn from_json(text: &str) -> Result<Self, CoreError> {
        let parsed: StateJson = serde_json::from_str(text)?;
        let total: usize = parsed.dims.iter().product();
        if parsed.dims.is_empty() || parsed.dims.contains(&0) {
            return Err(CoreError::FileFormat {
                field: "dims".into(),
                reason: format!("{:?} must be nonempty positive integers", parsed.dims),
            });
        }
        let mat = matrix_from_parts(&parsed.re, &parsed.im, total, "")?;
        DensityMatrix::new(parsed.dims, mat, parsed.normalized)
    }

    pub fn to_json(&self) -> String {
        let d = self.total_dim();
        let grab = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..d)
                .map(|i| (0..d).map(|j| f(&self.mat[(i, j)])).collect())
                .collect()
        };
        let obj = StateJson {
            dims: self.dims.clone(),
            re: grab(|z| z.re),
            im: grab(|z| z.im),
            normalized: self.normalized,
        };
        serde_json::to_string_pretty(&obj).expect("state serializes")
    }
}

impl CqState {
    /// Parse from `{"probs":[..],"cond_states":[<state>..]}`.
    pub fn from_json(text: &str) -> Result<Self, CoreError> {
        let parsed: CqJson = serde_json::from_str(text)?;
        let mut cond = Vec::with_capacity(parsed.cond_states.len());
        for (i, s) in parsed.cond_states.iter().enumerate() {
            let total: usize = s.dims.iter().product();
            let mat = matrix_from_parts(&s.re, &s.im, total, &format!("cond_states[{i}]."))?;
            cond.push(mat);
        }
        CqState::new(parsed.probs, cond)
    }

    pub fn to_json(&self) -> String {
        let states: Vec<StateJson> = self
            .cond_states
            .iter()
            .map(|c| {
                let d = c.nrows();
                StateJson {
                    dims: vec![d],
                    re: (0..d)
                        .map(|i| (0..d).map(|j| c[(i, j)].re).collect())
                        .collect(),
                    im: (0..d)
                        .map(|i| (0..d).map(|j| c[(i, j)].im).collect())
                        .collect(),
                    normalized: true,
                }
            })
            .collect();
        let obj = CqJson {
            probs: self.probs.clone(),
            cond_states: states,
        };
        serde_json::to_string_pretty(&obj).expect("cq state serializes")
    }
}

/// Diagonal density matrix from a probability (or subnormalized) vector.
pub fn diagonal_density(p: &[f64], normalized: bool) -> Result<DensityMatrix, CoreError> {
    let d = p.len();
    let mat = CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            Complex64::new(p[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    DensityMatrix::new(vec![d], mat, normalized)
}
