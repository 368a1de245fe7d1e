use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `Σ_j quad_j·x_j² + lin_j·x_j + const_term` over one block of variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexQuadratic {
    pub dim: usize,
    pub quad: Vec<f64>,
    pub lin: Vec<f64>,
    pub const_term: f64,
}

impl ConvexQuadratic {
    /// Builds the function after checking vector lengths. Curvature signs are
    /// checked by validation, so a negative entry is accepted here.
    pub fn new(quad: Vec<f64>, lin: Vec<f64>, const_term: f64) -> Result<Self> {
        if quad.len() != lin.len() {
            return Err(Error::Dimension(format!(
                "quad has {} entries, lin has {}",
                quad.len(),
                lin.len()
            )));
        }
        Ok(ConvexQuadratic { dim: quad.len(), quad, lin, const_term })
    }

    pub fn linear(lin: Vec<f64>, const_term: f64) -> Self {
        ConvexQuadratic { dim: lin.len(), quad: vec![0.0; lin.len()], lin, const_term }
    }

    /// Single coordinate `coef·x_index` in a block of `dim` variables.
    pub fn unit(dim: usize, index: usize, coef: f64) -> Self {
        let mut lin = vec![0.0; dim];
        lin[index] = coef;
        Self::linear(lin, 0.0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        self.quad
            .iter()
            .zip(&self.lin)
            .zip(x)
            .fold(self.const_term, |acc, ((q, b), xi)| acc + q * xi * xi + b * xi)
    }

    pub fn is_linear(&self) -> bool {
        self.quad.iter().all(|&q| q == 0.0)
    }

    pub fn is_convex(&self) -> bool {
        self.quad.iter().all(|&q| q >= 0.0 && q.is_finite())
            && self.lin.iter().all(|b| b.is_finite())
            && self.const_term.is_finite()
    }

    pub fn shape_ok(&self) -> bool {
        self.quad.len() == self.dim && self.lin.len() == self.dim
    }

    /// Minimum over the box `[lower, upper]` together with a minimizer.
    pub fn min_over_box(&self, lower: &[f64], upper: &[f64]) -> (f64, Vec<f64>) {
        let mut value = self.const_term;
        let mut arg = Vec::with_capacity(self.dim);
        for j in 0..self.dim {
            let (v, x) = interval_min(self.quad[j], self.lin[j], lower[j], upper[j]);
            value += v;
            arg.push(x);
        }
        (value, arg)
    }

    /// Maximum over the box; for a convex separable function it sits at a
    /// vertex, so each coordinate is settled at one of its endpoints.
    pub fn max_over_box(&self, lower: &[f64], upper: &[f64]) -> f64 {
        (0..self.dim).fold(self.const_term, |acc, j| {
            acc + interval_max(self.quad[j], self.lin[j], lower[j], upper[j]).0
        })
    }
}

/// Minimum of `q·x² + b·x` on `[lo, hi]` (q ≥ 0): the vertex `−b/(2q)` clipped
/// to the interval, or the cheaper endpoint for a linear term.
pub fn interval_min(q: f64, b: f64, lo: f64, hi: f64) -> (f64, f64) {
    let f = |x: f64| q * x * x + b * x;
    let x = if q > 0.0 {
        (-b / (2.0 * q)).clamp(lo, hi)
    } else if b >= 0.0 {
        lo
    } else {
        hi
    };
    (f(x), x)
}

/// Maximum of `q·x² + b·x` on `[lo, hi]` (q ≥ 0), attained at an endpoint.
pub fn interval_max(q: f64, b: f64, lo: f64, hi: f64) -> (f64, f64) {
    let f = |x: f64| q * x * x + b * x;
    let (fl, fh) = (f(lo), f(hi));
    if fh >= fl {
        (fh, hi)
    } else {
        (fl, lo)
    }
}
