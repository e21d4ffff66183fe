use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::qr::no_pivoting::factor as qr;
use faer::{Mat, MatRef, Par};

use super::spec::{column_offsets, DerivativeMethod, LinearSystem};
use crate::error::{invalid, Error, Result};
use crate::feature_net::{fd_derivative_features, DerivativeBasis, FeatureNetwork, MultiIndex};

/// Singular values below this fraction of the largest are discarded.
pub const RANK_CUTOFF: f64 = 1e-14;

/// Output of [`solve_min_norm_lsq`].
#[derive(Debug, Clone, PartialEq)]
pub struct LsqSolution {
    pub alpha: Vec<f64>,
    pub residual_norm: f64,
    /// Number of singular values kept.
    pub rank: usize,
}

/// Minimum-norm least-squares solution of `A α ≈ b` through the SVD with
/// relative cutoff [`RANK_CUTOFF`].
///
/// Tall systems are first reduced by a Householder QR of `[A | b]`, so the
/// SVD only touches the `C × C` triangular factor.
pub fn solve_min_norm_lsq(system: &LinearSystem) -> Result<LsqSolution> {
    solve_dense(system.matrix.as_ref(), &system.rhs)
}

pub(crate) fn solve_dense(a: MatRef<'_, f64>, b: &[f64]) -> Result<LsqSolution> {
    let (rows, cols) = (a.nrows(), a.ncols());
    if rows == 0 || cols == 0 {
        return Err(invalid("system must have at least one row and one column"));
    }
    if b.len() != rows {
        return Err(invalid("rhs length does not match the matrix"));
    }
    for c in 0..cols {
        if a.col(c).iter().any(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite matrix entry in column {c}")));
        }
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(invalid("non-finite right-hand side"));
    }

    let (alpha, rank) = if rows >= cols {
        let mut aug = Mat::<f64>::zeros(rows, cols + 1);
        aug.as_mut().submatrix_mut(0, 0, rows, cols).copy_from(a);
        for (r, v) in b.iter().enumerate() {
            aug[(r, cols)] = *v;
        }
        let size = cols + 1;
        let blocksize = qr::recommended_block_size::<f64>(rows, size);
        let mut h = Mat::<f64>::zeros(blocksize, rows.min(size));
        let params = Default::default();
        qr::qr_in_place(
            aug.as_mut(),
            h.as_mut(),
            Par::Seq,
            MemStack::new(&mut MemBuffer::new(qr::qr_in_place_scratch::<f64>(rows, size, blocksize, Par::Seq, params))),
            params,
        );
        drop(h);
        let r = Mat::from_fn(cols, cols, |i, j| if i <= j { aug[(i, j)] } else { 0.0 });
        let qtb: Vec<f64> = (0..cols).map(|i| aug[(i, cols)]).collect();
        drop(aug);
        pinv_apply(r.as_ref(), &qtb)?
    } else {
        pinv_apply(a, b)?
    };

    let residual_norm = residual(a, &alpha, b);
    Ok(LsqSolution { alpha, residual_norm, rank })
}

/// `V Σ⁺ Uᵀ y` from the thin SVD of `m`.
fn pinv_apply(m: MatRef<'_, f64>, y: &[f64]) -> Result<(Vec<f64>, usize)> {
    let svd = m.thin_svd().map_err(|e| Error::Solver(format!("{e:?}")))?;
    let (u, s, v) = (svd.U(), svd.S(), svd.V());
    let k = s.dim();
    let smax = (0..k).map(|i| s[i]).fold(0.0, f64::max);
    let cut = RANK_CUTOFF * smax;
    let mut alpha = vec![0.0; m.ncols()];
    let mut rank = 0;
    for i in 0..k {
        let si = s[i];
        if !(si > cut) {
            continue;
        }
        rank += 1;
        let mut dot = 0.0;
        for (r, yr) in y.iter().enumerate() {
            dot += u[(r, i)] * yr;
        }
        let coef = dot / si;
        for (j, aj) in alpha.iter_mut().enumerate() {
            *aj += v[(j, i)] * coef;
        }
    }
    Ok((alpha, rank))
}

pub(crate) fn residual(a: MatRef<'_, f64>, x: &[f64], b: &[f64]) -> f64 {
    let mut r: Vec<f64> = b.iter().map(|v| -v).collect();
    for (c, xc) in x.iter().enumerate() {
        for (ri, av) in r.iter_mut().zip(a.col(c).iter()) {
            *ri += av * xc;
        }
    }
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Trained model: networks for every field plus the shared output weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub fields: Vec<String>,
    pub networks: Vec<FeatureNetwork>,
    pub alpha: Vec<f64>,
    pub residual_norm: f64,
}

/// Rows evaluated at once in [`evaluate_solution`].
const EVAL_CHUNK: usize = 2048;

impl Solution {
    pub fn new(
        fields: Vec<String>,
        networks: Vec<FeatureNetwork>,
        alpha: Vec<f64>,
        residual_norm: f64,
    ) -> Result<Self> {
        if fields.len() != networks.len() {
            return Err(invalid("one network per field required"));
        }
        let total = *column_offsets(&networks).last().unwrap();
        if alpha.len() != total {
            return Err(invalid(format!("alpha has length {}, networks have {total} features", alpha.len())));
        }
        Ok(Solution { fields, networks, alpha, residual_norm })
    }

    pub fn field_index(&self, field: &str) -> Result<usize> {
        self.fields
            .iter()
            .position(|f| f == field)
            .ok_or_else(|| invalid(format!("unknown field `{field}`; known {:?}", self.fields)))
    }

    /// Output weights belonging to `field`.
    pub fn field_alpha(&self, field: usize) -> &[f64] {
        let off = column_offsets(&self.networks);
        &self.alpha[off[field]..off[field + 1]]
    }
}

/// `∂^m u_field` at every point.
pub fn evaluate_solution(
    solution: &Solution,
    field: &str,
    points: MatRef<'_, f64>,
    m: &MultiIndex,
    method: DerivativeMethod,
) -> Result<Vec<f64>> {
    let f = solution.field_index(field)?;
    let net = &solution.networks[f];
    let alpha = solution.field_alpha(f);
    let mut out = Vec::with_capacity(points.nrows());
    let mut start = 0;
    while start < points.nrows() {
        let n = EVAL_CHUNK.min(points.nrows() - start);
        let chunk = points.subrows(start, n);
        let phi = match method {
            DerivativeMethod::Analytic => DerivativeBasis::new(net, chunk)?.derivative(m)?,
            DerivativeMethod::Fd(steps) => fd_derivative_features(net, m, chunk, &steps)?,
        };
        let mut acc = vec![0.0; n];
        for (c, ac) in alpha.iter().enumerate() {
            for (v, p) in acc.iter_mut().zip(phi.col(c).iter()) {
                *v += ac * p;
            }
        }
        out.extend(acc);
        start += n;
    }
    Ok(out)
}

/// `‖predicted − truth‖₂ / ‖truth‖₂`.
pub fn l2_relative_error(predicted: &[f64], truth: &[f64]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(invalid("length mismatch"));
    }
    let den = truth.iter().map(|t| t * t).sum::<f64>().sqrt();
    if den == 0.0 {
        return Err(Error::DegenerateReference);
    }
    let num = predicted.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum::<f64>().sqrt();
    Ok(num / den)
}
