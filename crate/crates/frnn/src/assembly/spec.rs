use std::fmt;
use std::sync::Arc;

use faer::{Mat, MatRef};

use crate::error::{invalid, Result};
use crate::feature_net::{fd_derivative_features, DerivativeBasis, FdSteps, FeatureNetwork, MultiIndex, MAX_ORDER};
use crate::Error;

/// Real function of a point.
pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Boundary or forcing data; the second argument is the outward normal when
/// the block has one.
pub type DataFn = Arc<dyn Fn(&[f64], Option<&[f64]>) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Coefficient {
    Const(f64),
    /// Depends on the collocation point.
    Point(ScalarFn),
    /// Depends on the outward normal; the block must carry normals.
    Normal(ScalarFn),
}

impl Coefficient {
    pub fn uses_normal(&self) -> bool {
        matches!(self, Coefficient::Normal(_))
    }

    fn value(&self, x: &[f64], n: Option<&[f64]>) -> f64 {
        match self {
            Coefficient::Const(c) => *c,
            Coefficient::Point(f) => f(x),
            Coefficient::Normal(f) => f(n.expect("normals checked before assembly")),
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Const(c) => write!(f, "Const({c})"),
            Coefficient::Point(_) => f.write_str("Point(..)"),
            Coefficient::Normal(_) => f.write_str("Normal(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Term {
    pub coeff: Coefficient,
    pub index: MultiIndex,
    /// Position of the field in the network list.
    pub field: usize,
}

/// A linear differential operator `Σ_t c_t(x, n) ∂^{m_t} u_{f_t}` producing one
/// scalar equation per collocation point.
#[derive(Debug, Clone, Default)]
pub struct OperatorSpec {
    pub terms: Vec<Term>,
}

impl OperatorSpec {
    pub fn new() -> Self {
        OperatorSpec::default()
    }

    pub fn term(mut self, coeff: Coefficient, index: MultiIndex, field: usize) -> Self {
        self.terms.push(Term { coeff, index, field });
        self
    }

    pub fn constant(self, c: f64, index: MultiIndex, field: usize) -> Self {
        self.term(Coefficient::Const(c), index, field)
    }

    /// `u_field` itself.
    pub fn identity(dim: usize, field: usize) -> Self {
        OperatorSpec::new().constant(1.0, MultiIndex::zero(dim), field)
    }

    /// `scale · Σ_j ∂²u/∂x_j²`.
    pub fn laplacian(dim: usize, field: usize, scale: f64) -> Self {
        (0..dim).fold(OperatorSpec::new(), |s, j| s.constant(scale, MultiIndex::axis(dim, j, 2), field))
    }

    pub fn uses_normal(&self) -> bool {
        self.terms.iter().any(|t| t.coeff.uses_normal())
    }

    pub fn max_order(&self) -> usize {
        self.terms.iter().map(|t| t.index.total()).max().unwrap_or(0)
    }
}

/// How derivative features are produced during assembly.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DerivativeMethod {
    /// Exact derivative networks.
    #[default]
    Analytic,
    /// Central finite differences of the network.
    Fd(FdSteps),
}

/// Column offset of every field followed by the total width.
pub fn column_offsets(nets: &[FeatureNetwork]) -> Vec<usize> {
    let mut out = Vec::with_capacity(nets.len() + 1);
    let mut acc = 0;
    out.push(0);
    for n in nets {
        acc += n.width();
        out.push(acc);
    }
    out
}

/// Rows of `spec` at every point, columns laid out field after field.
pub fn assemble_matrix(
    nets: &[FeatureNetwork],
    spec: &OperatorSpec,
    points: MatRef<'_, f64>,
    normals: Option<MatRef<'_, f64>>,
    method: DerivativeMethod,
) -> Result<Mat<f64>> {
    if nets.is_empty() {
        return Err(invalid("no networks"));
    }
    if spec.terms.is_empty() {
        return Err(invalid("operator has no terms"));
    }
    if spec.max_order() > MAX_ORDER {
        return Err(Error::UnsupportedOrder { order: spec.max_order(), max: MAX_ORDER });
    }
    if let Some(t) = spec.terms.iter().find(|t| t.field >= nets.len()) {
        return Err(invalid(format!("term references field {} of {}", t.field, nets.len())));
    }
    if spec.uses_normal() && normals.is_none() {
        return Err(invalid("operator uses normals but the block has none"));
    }
    if let Some(n) = normals {
        if n.nrows() != points.nrows() || n.ncols() != points.ncols() {
            return Err(invalid("normals must match the shape of points"));
        }
    }
    let offsets = column_offsets(nets);
    let rows = points.nrows();
    let mut block = Mat::<f64>::zeros(rows, offsets[nets.len()]);

    let coords = |p: usize| -> (Vec<f64>, Option<Vec<f64>>) {
        let x = (0..points.ncols()).map(|j| points[(p, j)]).collect();
        let n = normals.map(|n| (0..n.ncols()).map(|j| n[(p, j)]).collect());
        (x, n)
    };

    for (f, net) in nets.iter().enumerate() {
        let terms: Vec<&Term> = spec.terms.iter().filter(|t| t.field == f).collect();
        if terms.is_empty() {
            continue;
        }
        let mut basis = match method {
            DerivativeMethod::Analytic => Some(DerivativeBasis::new(net, points)?),
            DerivativeMethod::Fd(_) => None,
        };
        for term in terms {
            if term.index.dim() != net.input_dim() {
                return Err(invalid(format!("multi-index {} does not match input dimension", term.index)));
            }
            let coeff: Vec<f64> = match &term.coeff {
                Coefficient::Const(c) => vec![*c; rows],
                other => (0..rows)
                    .map(|p| {
                        let (x, n) = coords(p);
                        other.value(&x, n.as_deref())
                    })
                    .collect(),
            };
            let off = offsets[f];
            match (&mut basis, method) {
                (Some(basis), _) => {
                    let scale = net.weight_products(&term.index);
                    let (sign, a) = basis.activation(term.index.total())?;
                    for (c, s) in scale.iter().enumerate() {
                        for p in 0..rows {
                            block[(p, off + c)] += coeff[p] * (s * (sign * a[(p, c)]));
                        }
                    }
                }
                (None, DerivativeMethod::Fd(steps)) => {
                    let d = fd_derivative_features(net, &term.index, points, &steps)?;
                    for c in 0..net.width() {
                        for p in 0..rows {
                            block[(p, off + c)] += coeff[p] * d[(p, c)];
                        }
                    }
                }
                (None, DerivativeMethod::Analytic) => unreachable!(),
            }
        }
    }
    Ok(block)
}

/// One block of rows of the least-squares system before weighting.
#[derive(Debug, Clone)]
pub struct Block {
    pub label: String,
    pub matrix: Mat<f64>,
    pub rhs: Vec<f64>,
    pub weight: f64,
}

/// Matrix rows of `spec` and the right-hand side `data(x_p, n_p)`.
pub fn assemble_block(
    nets: &[FeatureNetwork],
    spec: &OperatorSpec,
    points: MatRef<'_, f64>,
    normals: Option<MatRef<'_, f64>>,
    data: &DataFn,
    method: DerivativeMethod,
) -> Result<(Mat<f64>, Vec<f64>)> {
    let matrix = assemble_matrix(nets, spec, points, normals, method)?;
    let rhs = (0..points.nrows())
        .map(|p| {
            let x: Vec<f64> = (0..points.ncols()).map(|j| points[(p, j)]).collect();
            let n: Option<Vec<f64>> = normals.map(|n| (0..n.ncols()).map(|j| n[(p, j)]).collect());
            data(&x, n.as_deref())
        })
        .collect();
    Ok((matrix, rhs))
}

/// Stacked, weighted system `A α ≈ b`.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: Mat<f64>,
    pub rhs: Vec<f64>,
    /// `(label, first row, end row, λ)` per block in stacking order.
    pub blocks: Vec<(String, usize, usize, f64)>,
}

/// Vertical stack of the blocks, each block and its right-hand side
/// multiplied by its weight.
pub fn assemble_system(blocks: Vec<Block>) -> Result<LinearSystem> {
    let Some(first) = blocks.first() else {
        return Err(invalid("no blocks"));
    };
    let rows: usize = blocks.iter().map(|b| b.matrix.nrows()).sum();
    let mut system = LinearSystem::with_capacity(rows, first.matrix.ncols());
    for b in blocks {
        system.push_block(&b.label, b.matrix.as_ref(), &b.rhs, b.weight)?;
    }
    system.finish()
}

impl LinearSystem {
    /// Empty system with room for `rows` rows; fill it with
    /// [`push_block`](Self::push_block).
    pub fn with_capacity(rows: usize, cols: usize) -> Self {
        LinearSystem { matrix: Mat::zeros(rows, cols), rhs: Vec::with_capacity(rows), blocks: Vec::new() }
    }

    /// Copies `weight · matrix` and `weight · rhs` below the rows already
    /// pushed. A weight of one copies the block unchanged.
    pub fn push_block(&mut self, label: &str, matrix: MatRef<'_, f64>, rhs: &[f64], weight: f64) -> Result<()> {
        let cols = self.ncols();
        if matrix.ncols() != cols {
            return Err(invalid(format!("block `{label}` has {} columns, expected {cols}", matrix.ncols())));
        }
        if matrix.nrows() != rhs.len() {
            return Err(invalid(format!("block `{label}` rhs length mismatch")));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(invalid(format!("block `{label}` weight must be positive, got {weight}")));
        }
        let start = self.rhs.len();
        let n = matrix.nrows();
        if start + n > self.nrows() {
            return Err(invalid(format!("block `{label}` overflows the reserved rows")));
        }
        let w = weight;
        for c in 0..cols {
            for r in 0..n {
                self.matrix[(start + r, c)] = if w == 1.0 { matrix[(r, c)] } else { w * matrix[(r, c)] };
            }
        }
        self.rhs.extend(rhs.iter().map(|v| if w == 1.0 { *v } else { w * v }));
        self.blocks.push((label.to_string(), start, start + n, w));
        Ok(())
    }

    /// Checks that every reserved row was filled.
    pub fn finish(self) -> Result<Self> {
        if self.rhs.len() != self.nrows() {
            return Err(invalid(format!("{} of {} rows filled", self.rhs.len(), self.nrows())));
        }
        Ok(self)
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    /// Writes a `#`-prefixed header (rows, columns, block index) followed by
    /// one CSV line per row: the matrix entries then the right-hand side.
    pub fn write_csv(&self, mut out: impl std::io::Write) -> Result<()> {
        writeln!(out, "# rows={} cols={}", self.nrows(), self.ncols())?;
        for (label, a, b, w) in &self.blocks {
            writeln!(out, "# block {label} rows {a}..{b} weight {w}")?;
        }
        for r in 0..self.nrows() {
            for c in 0..self.ncols() {
                write!(out, "{},", self.matrix[(r, c)])?;
            }
            writeln!(out, "{}", self.rhs[r])?;
        }
        Ok(())
    }
}
