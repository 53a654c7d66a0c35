//! Covariance construction, singular value decomposition, and projection
//! onto principal components.
//!
//! Two independent decomposition routes are provided on purpose:
//!
//! * [`svd`] — one-sided Jacobi on the input matrix: columns are
//!   orthogonalized by plane rotations accumulated into the right factor,
//!   after which column norms are the singular values. Works for any shape
//!   (wide inputs are transposed internally) and is exact enough at the
//!   sizes used here (≤ a few hundred columns).
//! * [`sym_eigen`] — cyclic two-sided Jacobi eigendecomposition for
//!   symmetric matrices, converging when the off-diagonal Frobenius mass
//!   falls below `1e-12·‖M‖_F`.
//!
//! For a symmetric positive semi-definite matrix the two must agree, which
//! the tests use as a cross-check. Vectors follow a fixed sign convention
//! (largest-magnitude entry positive) and ties in singular values keep
//! their original order, so decompositions are reproducible bit-for-bit.

use crate::matrix::Matrix;
use thiserror::Error;

const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

#[derive(Debug, Error, PartialEq)]
pub enum PcaError {
    #[error("need at least 2 observation rows, got {rows}")]
    InsufficientObservations { rows: usize },
    #[error("matrix has no entries")]
    EmptyMatrix,
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (residual {residual:.3e})")]
    NonConvergence { sweeps: usize, residual: f64 },
    #[error("singular spectrum is identically zero")]
    DegenerateSpectrum,
    #[error("component count {k} out of range 1..={max}")]
    KOutOfRange { k: usize, max: usize },
    #[error("energy threshold {threshold} outside (0, 1]")]
    InvalidThreshold { threshold: f64 },
    #[error("dimension mismatch: {cols} data columns vs {rows} projection rows")]
    DimensionMismatch { cols: usize, rows: usize },
}

/// Symmetric p×p sample covariance of the columns of a data matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    matrix: Matrix,
}

impl CovarianceMatrix {
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn size(&self) -> usize {
        self.matrix.rows()
    }
}

/// Economy SVD `M = L·diag(σ)·Rᵀ` with `r = min(rows, cols)` columns in
/// each factor and σ descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    singular_values: Vec<f64>,
    left: Matrix,
    right: Matrix,
}

impl SvdResult {
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn left_vectors(&self) -> &Matrix {
        &self.left
    }

    pub fn right_vectors(&self) -> &Matrix {
        &self.right
    }

    /// `L·diag(σ)·Rᵀ`, for reconstruction checks.
    pub fn reconstruct(&self) -> Matrix {
        let r = self.singular_values.len();
        let mut scaled = self.left.clone();
        for j in 0..r {
            for i in 0..scaled.rows() {
                scaled[(i, j)] *= self.singular_values[j];
            }
        }
        scaled.matmul(&self.right.transpose())
    }
}

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    values: Vec<f64>,
    vectors: Matrix,
}

impl EigenDecomposition {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }
}

/// Projection matrix holding k orthonormal component directions as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaProjection {
    matrix: Matrix,
}

impl PcaProjection {
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn component_count(&self) -> usize {
        self.matrix.cols()
    }
}

/// Data projected onto selected components, with per-column names.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedMatrix {
    entries: Matrix,
    names: Vec<String>,
}

impl ReducedMatrix {
    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// How many components to keep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelectionRule {
    FixedCount(usize),
    /// Smallest k with `Σ_{i≤k} σ_i / Σ_i σ_i ≥ threshold` (sums of σ,
    /// not σ²).
    EnergyThreshold(f64),
}

/// Sample covariance `C = ZᵀZ/(n−1)` where Z is `x` with column means
/// removed when `center` is set; rows of `x` are observations.
pub fn covariance(x: &Matrix, center: bool) -> Result<CovarianceMatrix, PcaError> {
    let n = x.rows();
    let p = x.cols();
    if n == 0 || p == 0 {
        return Err(PcaError::EmptyMatrix);
    }
    if n < 2 {
        return Err(PcaError::InsufficientObservations { rows: n });
    }
    if !x.all_finite() {
        return Err(PcaError::NonFinite);
    }

    let means: Vec<f64> = if center {
        (0..p)
            .map(|j| (0..n).map(|i| x[(i, j)]).sum::<f64>() / (n as f64))
            .collect()
    } else {
        vec![0.0; p]
    };

    let mut c = Matrix::zeros(p, p);
    let scale = 1.0 / ((n - 1) as f64);
    for a in 0..p {
        for b in a..p {
            let mut acc = 0.0;
            for i in 0..n {
                acc += (x[(i, a)] - means[a]) * (x[(i, b)] - means[b]);
            }
            let value = acc * scale;
            c[(a, b)] = value;
            c[(b, a)] = value;
        }
    }
    Ok(CovarianceMatrix { matrix: c })
}

/// Index order sorting `values` descending, ties keeping original order.
fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap().then(a.cmp(&b)));
    order
}

/// Flips `col` (and `partner`, if any) so the largest-magnitude entry of
/// `col` is positive; first occurrence wins on ties.
fn sign_fix(col: &mut [f64], partner: Option<&mut [f64]>) {
    let mut idx = 0;
    let mut best = -1.0;
    for (i, &v) in col.iter().enumerate() {
        if v.abs() > best {
            best = v.abs();
            idx = i;
        }
    }
    if col[idx] < 0.0 {
        for v in col.iter_mut() {
            *v = -*v;
        }
        if let Some(other) = partner {
            for v in other.iter_mut() {
                *v = -*v;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Column-major working storage for the Jacobi sweeps.
type ColumnSet = Vec<Vec<f64>>;

/// One-sided Jacobi on a tall (rows ≥ cols) matrix: returns column-major
/// `(b, v)` where `b` holds the rotated data columns (norms = singular
/// values) and `v` the accumulated right rotations.
fn one_sided_jacobi(a: &Matrix) -> Result<(ColumnSet, ColumnSet), PcaError> {
    let n = a.cols();
    let mut b: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let app = dot(&b[p], &b[p]);
                let aqq = dot(&b[q], &b[q]);
                let apq = dot(&b[p], &b[q]);
                if apq.abs() <= JACOBI_TOL * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;

                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;

                let (bp, bq) = pair_mut(&mut b, p, q);
                rotate_pair(bp, bq, c, s);
                let (vp, vq) = pair_mut(&mut v, p, q);
                rotate_pair(vp, vq, c, s);
            }
        }
        if !rotated {
            return Ok((b, v));
        }
    }

    let mut residual = 0.0_f64;
    for p in 0..n.saturating_sub(1) {
        for q in p + 1..n {
            let denom = (dot(&b[p], &b[p]) * dot(&b[q], &b[q])).sqrt();
            if denom > 0.0 {
                residual = residual.max(dot(&b[p], &b[q]).abs() / denom);
            }
        }
    }
    Err(PcaError::NonConvergence {
        sweeps: MAX_SWEEPS,
        residual,
    })
}

fn pair_mut<T>(items: &mut [T], p: usize, q: usize) -> (&mut T, &mut T) {
    debug_assert!(p < q);
    let (head, tail) = items.split_at_mut(q);
    (&mut head[p], &mut tail[0])
}

/// `(x, y) ← (c·x − s·y, s·x + c·y)` elementwise.
fn rotate_pair(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let new_x = c * *xi - s * *yi;
        let new_y = s * *xi + c * *yi;
        *xi = new_x;
        *yi = new_y;
    }
}

/// Deterministically extends `accepted` (orthonormal m-vectors) with
/// `needed` more orthonormal vectors from the unit-basis candidates.
/// Each round greedily takes the candidate with the largest residual
/// against the current set, which cannot run dry while the span is
/// incomplete.
fn complete_basis(accepted: &mut Vec<Vec<f64>>, m: usize, needed: usize) -> Vec<Vec<f64>> {
    let unit = |idx: usize| -> Vec<f64> {
        (0..m).map(|i| if i == idx { 1.0 } else { 0.0 }).collect()
    };
    let orthogonalize = |candidate: &mut Vec<f64>, basis_set: &[Vec<f64>], passes: usize| {
        for _ in 0..passes {
            for basis in basis_set {
                let proj = dot(candidate, basis);
                for (c, b) in candidate.iter_mut().zip(basis) {
                    *c -= proj * b;
                }
            }
        }
    };

    let mut added = Vec::with_capacity(needed);
    let mut used = vec![false; m];
    for _ in 0..needed {
        let mut best = (0, f64::NEG_INFINITY);
        for idx in (0..m).filter(|&i| !used[i]) {
            let mut candidate = unit(idx);
            orthogonalize(&mut candidate, accepted, 1);
            let residual = dot(&candidate, &candidate);
            if residual > best.1 {
                best = (idx, residual);
            }
        }
        used[best.0] = true;

        let mut candidate = unit(best.0);
        // Two Gram-Schmidt passes keep the result orthogonal to rounding.
        orthogonalize(&mut candidate, accepted, 2);
        let norm = dot(&candidate, &candidate).sqrt();
        assert!(norm > 0.0, "basis completion found no independent direction");
        for c in &mut candidate {
            *c /= norm;
        }
        accepted.push(candidate.clone());
        added.push(candidate);
    }
    added
}

/// Economy SVD by one-sided Jacobi; wide inputs are transposed and the
/// factors swapped back.
pub fn svd(m: &Matrix) -> Result<SvdResult, PcaError> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(PcaError::EmptyMatrix);
    }
    if !m.all_finite() {
        return Err(PcaError::NonFinite);
    }

    if m.rows() < m.cols() {
        let flipped = svd_tall(&m.transpose())?;
        return Ok(SvdResult {
            singular_values: flipped.singular_values,
            left: flipped.right,
            right: flipped.left,
        });
    }
    svd_tall(m)
}

fn svd_tall(a: &Matrix) -> Result<SvdResult, PcaError> {
    let (m, n) = (a.rows(), a.cols());
    let (b, v) = one_sided_jacobi(a)?;

    let norms: Vec<f64> = b.iter().map(|col| dot(col, col).sqrt()).collect();
    let order = descending_order(&norms);
    let sigma_max = norms[order[0]];
    let cutoff = sigma_max * (m.max(n) as f64) * f64::EPSILON;

    let mut singular_values = Vec::with_capacity(n);
    let mut left_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut right_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut accepted: Vec<Vec<f64>> = Vec::new();
    let mut pending: Vec<usize> = Vec::new(); // output slots awaiting basis completion

    for (slot, &j) in order.iter().enumerate() {
        singular_values.push(norms[j]);
        right_cols.push(v[j].clone());
        if norms[j] > cutoff {
            let unit: Vec<f64> = b[j].iter().map(|x| x / norms[j]).collect();
            accepted.push(unit.clone());
            left_cols.push(unit);
        } else {
            // Placeholder; filled from the orthogonal complement below.
            left_cols.push(Vec::new());
            pending.push(slot);
        }
    }

    if !pending.is_empty() {
        let fresh = complete_basis(&mut accepted, m, pending.len());
        for (slot, column) in pending.into_iter().zip(fresh) {
            left_cols[slot] = column;
        }
    }

    for (l, r) in left_cols.iter_mut().zip(right_cols.iter_mut()) {
        sign_fix(l, Some(r));
    }

    let left = Matrix::from_fn(m, n, |i, j| left_cols[j][i]);
    let right = Matrix::from_fn(n, n, |i, j| right_cols[j][i]);
    Ok(SvdResult {
        singular_values,
        left,
        right,
    })
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
pub fn sym_eigen(m: &Matrix) -> Result<EigenDecomposition, PcaError> {
    let n = m.rows();
    if n == 0 {
        return Err(PcaError::EmptyMatrix);
    }
    if !m.all_finite() {
        return Err(PcaError::NonFinite);
    }
    if m.cols() != n {
        return Err(PcaError::NotSymmetric);
    }
    let scale = m.max_abs();
    for i in 0..n {
        for j in i + 1..n {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * (1.0 + scale) {
                return Err(PcaError::NotSymmetric);
            }
        }
    }

    let frob = m.frobenius_norm();
    let mut a = m.clone();
    let mut q = Matrix::identity(n);

    let off_norm = |a: &Matrix| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                acc += 2.0 * a[(i, j)] * a[(i, j)];
            }
        }
        acc.sqrt()
    };

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        if off_norm(&a) <= JACOBI_TOL * frob {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for qq in p + 1..n {
                let apq = a[(p, qq)];
                if apq.abs() <= JACOBI_TOL * frob / (n as f64) {
                    continue;
                }
                let theta = (a[(qq, qq)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;

                // A ← JᵀAJ applied as column then row updates.
                for r in 0..n {
                    let (x, y) = (a[(r, p)], a[(r, qq)]);
                    a[(r, p)] = c * x - s * y;
                    a[(r, qq)] = s * x + c * y;
                }
                for r in 0..n {
                    let (x, y) = (a[(p, r)], a[(qq, r)]);
                    a[(p, r)] = c * x - s * y;
                    a[(qq, r)] = s * x + c * y;
                }
                a[(p, qq)] = 0.0;
                a[(qq, p)] = 0.0;
                for r in 0..n {
                    let (x, y) = (q[(r, p)], q[(r, qq)]);
                    q[(r, p)] = c * x - s * y;
                    q[(r, qq)] = s * x + c * y;
                }
            }
        }
    }
    if !converged && off_norm(&a) > JACOBI_TOL * frob {
        return Err(PcaError::NonConvergence {
            sweeps: MAX_SWEEPS,
            residual: off_norm(&a) / frob.max(f64::MIN_POSITIVE),
        });
    }

    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    let order = descending_order(&diag);
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vector_cols: Vec<Vec<f64>> = order.iter().map(|&j| q.column(j)).collect();
    for col in &mut vector_cols {
        sign_fix(col, None);
    }
    let vectors = Matrix::from_fn(n, n, |i, j| vector_cols[j][i]);
    Ok(EigenDecomposition { values, vectors })
}

/// Singular values scaled so the first is exactly 1.
pub fn normalized_spectrum(s: &SvdResult) -> Result<Vec<f64>, PcaError> {
    let first = *s
        .singular_values
        .first()
        .ok_or(PcaError::DegenerateSpectrum)?;
    if first <= 0.0 {
        return Err(PcaError::DegenerateSpectrum);
    }
    Ok(s.singular_values.iter().map(|v| v / first).collect())
}

/// Builds the projection matrix from the top components of a decomposition.
pub fn select_components(s: &SvdResult, rule: SelectionRule) -> Result<PcaProjection, PcaError> {
    let available = s.right.cols();
    let k = match rule {
        SelectionRule::FixedCount(k) => {
            if k == 0 || k > available {
                return Err(PcaError::KOutOfRange { k, max: available });
            }
            k
        }
        SelectionRule::EnergyThreshold(threshold) => {
            if !(threshold > 0.0 && threshold <= 1.0) {
                return Err(PcaError::InvalidThreshold { threshold });
            }
            let total: f64 = s.singular_values.iter().sum();
            if total <= 0.0 {
                return Err(PcaError::DegenerateSpectrum);
            }
            let mut cumulative = 0.0;
            let mut chosen = available;
            for (i, sigma) in s.singular_values.iter().enumerate() {
                cumulative += sigma;
                if cumulative / total >= threshold {
                    chosen = i + 1;
                    break;
                }
            }
            chosen
        }
    };

    let p = Matrix::from_fn(s.right.rows(), k, |i, j| s.right[(i, j)]);
    Ok(PcaProjection { matrix: p })
}

/// `X′ = X·P`; column i is named `<prefix><i+1>`.
pub fn project(x: &Matrix, p: &PcaProjection, prefix: &str) -> Result<ReducedMatrix, PcaError> {
    if x.cols() != p.matrix.rows() {
        return Err(PcaError::DimensionMismatch {
            cols: x.cols(),
            rows: p.matrix.rows(),
        });
    }
    let entries = x.matmul(&p.matrix);
    let names = (1..=p.component_count())
        .map(|i| format!("{prefix}{i}"))
        .collect();
    Ok(ReducedMatrix { entries, names })
}
