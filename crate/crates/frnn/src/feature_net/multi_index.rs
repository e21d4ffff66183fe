use std::fmt;

use serde::{Deserialize, Serialize};

/// Partial-derivative orders `(m_1, …, m_k)`, one per input coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(orders: Vec<usize>) -> Self {
        MultiIndex(orders)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// `∂^order / ∂x_axis^order` in `dim` dimensions.
    pub fn axis(dim: usize, axis: usize, order: usize) -> Self {
        let mut orders = vec![0; dim];
        orders[axis] = order;
        MultiIndex(orders)
    }

    /// `∂² / ∂x_a ∂x_b` (or `∂²/∂x_a²` when `a == b`).
    pub fn pair(dim: usize, a: usize, b: usize) -> Self {
        let mut orders = vec![0; dim];
        orders[a] += 1;
        orders[b] += 1;
        MultiIndex(orders)
    }

    pub fn orders(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&m| m == 0)
    }

    /// Every multi-index in `dim` dimensions with `|m| <= max_total`.
    pub fn all_up_to(dim: usize, max_total: usize) -> Vec<MultiIndex> {
        fn rec(dim: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
            if prefix.len() == dim {
                out.push(MultiIndex(prefix.clone()));
                return;
            }
            for m in 0..=left {
                prefix.push(m);
                rec(dim, left - m, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(dim, max_total, &mut Vec::with_capacity(dim), &mut out);
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (j, m) in self.0.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, ")")
    }
}
