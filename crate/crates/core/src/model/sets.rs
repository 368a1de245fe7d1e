use serde::{Deserialize, Serialize};

use super::{ConvexQuadratic, Sense};

/// One convex row `func(x) ≤ rhs` of a block set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockRow {
    pub func: ConvexQuadratic,
    pub rhs: f64,
}

/// A bounded convex set `{x ∈ [lower, upper] : func_l(x) ≤ rhs_l}`.
///
/// Used both for the on-state set Λ_s and the off-state set Γ_s of a block.
/// Boxes are mandatory and finite, which keeps every set bounded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSet {
    pub dim: usize,
    pub rows: Vec<BlockRow>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BlockSet {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        BlockSet { dim: lower.len(), rows: Vec::new(), lower, upper }
    }

    /// The set `{0}`.
    pub fn zero_singleton(dim: usize) -> Self {
        Self::boxed(vec![0.0; dim], vec![0.0; dim])
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        Self::boxed(vec![lo], vec![hi])
    }

    pub fn with_row(mut self, func: ConvexQuadratic, rhs: f64) -> Self {
        self.rows.push(BlockRow { func, rhs });
        self
    }

    pub fn is_zero_singleton(&self) -> bool {
        self.rows.is_empty() && self.lower.iter().chain(&self.upper).all(|&v| v == 0.0)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&xi, (&lo, &hi))| xi >= lo - tol && xi <= hi + tol)
            && self.rows.iter().all(|r| r.func.eval(x) <= r.rhs + tol)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| 0.5 * (l + u)).collect()
    }
}

/// On/off pair (Λ_s, Γ_s) for block `s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockPair {
    pub on: BlockSet,
    pub off: BlockSet,
}

impl BlockPair {
    pub fn dim(&self) -> usize {
        self.on.dim
    }

    /// Whether the off-state set is `{0}`, in which case the off-part
    /// variables are eliminated at compile time.
    pub fn off_is_zero(&self) -> bool {
        self.off.is_zero_singleton()
    }
}

/// Integer coupling row `coeffs·y (sense) rhs` over the block binaries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingRow {
    pub coeffs: Vec<i64>,
    pub sense: Sense,
    pub rhs: i64,
}

/// Feasible set of one equivalence class: per-block on/off sets plus the
/// integer coupling polytope over the `k` block binaries.
///
/// Binaries always carry the bounds `0 ≤ y ≤ 1`, so the relaxed coupling
/// polytope sits inside the unit box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaSpec {
    pub blocks: Vec<BlockPair>,
    pub coupling: Vec<CouplingRow>,
    pub tu_asserted: bool,
}

impl OmegaSpec {
    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(BlockPair::dim).sum()
    }

    /// Dense coupling matrix (rows as `≤`, equalities expanded to two rows).
    pub fn coupling_le_matrix(&self) -> (Vec<Vec<i64>>, Vec<i64>) {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for row in &self.coupling {
            let neg: Vec<i64> = row.coeffs.iter().map(|c| -c).collect();
            match row.sense {
                Sense::Le => {
                    a.push(row.coeffs.clone());
                    b.push(row.rhs);
                }
                Sense::Ge => {
                    a.push(neg);
                    b.push(-row.rhs);
                }
                Sense::Eq => {
                    a.push(row.coeffs.clone());
                    b.push(row.rhs);
                    a.push(neg);
                    b.push(-row.rhs);
                }
            }
        }
        (a, b)
    }

    /// Whether a 0/1 vector satisfies the coupling rows.
    pub fn coupling_ok(&self, y: &[i64]) -> bool {
        self.coupling.iter().all(|row| {
            let lhs: i64 = row.coeffs.iter().zip(y).map(|(a, b)| a * b).sum();
            match row.sense {
                Sense::Le => lhs <= row.rhs,
                Sense::Ge => lhs >= row.rhs,
                Sense::Eq => lhs == row.rhs,
            }
        })
    }

    /// All binary vectors satisfying the coupling rows, in the order of a
    /// binary counter whose bit `s` is `y_s`. Partial assignments are cut
    /// off as soon as some row can no longer be met.
    pub fn feasible_assignments(&self) -> Vec<Vec<i64>> {
        let (a, b) = self.coupling_le_matrix();
        let k = self.k();
        // slack[i] = b_i − (fixed part) − Σ over free positions of min(0, a_ij)
        let mut slack: Vec<i64> = a.iter().zip(&b).map(|(row, &bi)| bi - row.iter().map(|&v| v.min(0)).sum::<i64>()).collect();
        let mut y = vec![0i64; k];
        let mut out = Vec::new();
        fn fill(s: usize, a: &[Vec<i64>], slack: &mut Vec<i64>, y: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
            if slack.iter().any(|&v| v < 0) {
                return;
            }
            if s == 0 {
                out.push(y.clone());
                return;
            }
            let j = s - 1;
            for bit in [0i64, 1] {
                for (i, row) in a.iter().enumerate() {
                    slack[i] += row[j].min(0) - bit * row[j];
                }
                y[j] = bit;
                fill(j, a, slack, y, out);
                for (i, row) in a.iter().enumerate() {
                    slack[i] -= row[j].min(0) - bit * row[j];
                }
            }
            y[j] = 0;
        }
        fill(k, &a, &mut slack, &mut y, &mut out);
        out
    }
}
