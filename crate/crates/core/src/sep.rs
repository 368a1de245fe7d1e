//! Separable problems: the epigraph reduction of a separable mixed-integer
//! convex program, line cover, and the seeded instance generators.
//!
//! Random draws use ChaCha8 seeded with the instance seed. Every
//! (parameter family, class) pair reads its own stream, numbered
//! `(family << 32) | class`, so adding rows or classes never shifts the
//! draws of another family.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{interval_max, interval_min, BlockPair, BlockSet, ConvexQuadratic, EquivClass, GlobalRow, OmegaSpec, ProblemSpec, Sense};

/// Version of the generator recipes recorded in instance metadata.
pub const RECIPE_VERSION: u32 = 1;

/// One class of a separable problem: cost `a·x² + b·x + c·y`, box
/// `l·y ≤ x ≤ u·y`, and `row_quad[l]·x² + row_lin[l]·x` in global row `l`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SepClassParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub lower: f64,
    pub upper: f64,
    pub row_quad: Vec<f64>,
    pub row_lin: Vec<f64>,
    pub multiplicity: u32,
}

fn quad1(q: f64, b: f64, dim: usize, at: usize, epi: Option<usize>) -> ConvexQuadratic {
    let mut quad = vec![0.0; dim];
    let mut lin = vec![0.0; dim];
    quad[at] = q;
    lin[at] = b;
    if let Some(e) = epi {
        lin[e] = -1.0;
    }
    ConvexQuadratic { dim, quad, lin, const_term: 0.0 }
}

/// Builds the epigraph form: one block `(x, w_l for curved rows, z)` per
/// class with `g_l(x) ≤ w_l`, `f(x) ≤ z` and exact epigraph boxes.
/// Rows whose `g_l` is linear couple `x` directly, so they may be
/// equalities; curved rows must be `≤`.
pub fn build_sp(name: &str, classes: &[SepClassParams], rhs: &[f64], senses: &[Sense]) -> Result<ProblemSpec> {
    if rhs.len() != senses.len() {
        return Err(Error::Dimension(format!("{} right-hand sides for {} senses", rhs.len(), senses.len())));
    }
    let n_rows = rhs.len();
    let mut out = Vec::with_capacity(classes.len());
    for (t, p) in classes.iter().enumerate() {
        if p.row_quad.len() != n_rows || p.row_lin.len() != n_rows {
            return Err(Error::Dimension(format!("class {t} has coefficients for {} rows", p.row_quad.len())));
        }
        let nonneg = p.a >= 0.0 && p.row_quad.iter().chain(&p.row_lin).all(|&v| v >= 0.0);
        if !nonneg || !(p.lower <= p.upper) || p.multiplicity == 0 {
            return Err(Error::InvalidArgument(format!("class {t} violates a ≥ 0, row coefficients ≥ 0, l ≤ u, N ≥ 1")));
        }
        let curved: Vec<usize> = (0..n_rows).filter(|&l| p.row_quad[l] > 0.0).collect();
        if let Some(&l) = curved.iter().find(|&&l| senses[l] != Sense::Le) {
            return Err(Error::InvalidArgument(format!("row {l} is curved and must be <=")));
        }
        let dim = 2 + curved.len();
        let z = dim - 1;
        let mut on = BlockSet::boxed(vec![0.0; dim], vec![0.0; dim]);
        on.lower[0] = p.lower;
        on.upper[0] = p.upper;
        for (k, &l) in curved.iter().enumerate() {
            let w = 1 + k;
            on.lower[w] = interval_min(p.row_quad[l], p.row_lin[l], p.lower, p.upper).0;
            on.upper[w] = interval_max(p.row_quad[l], p.row_lin[l], p.lower, p.upper).0;
            on = on.with_row(quad1(p.row_quad[l], p.row_lin[l], dim, 0, Some(w)), 0.0);
        }
        on.lower[z] = interval_min(p.a, p.b, p.lower, p.upper).0;
        on.upper[z] = interval_max(p.a, p.b, p.lower, p.upper).0;
        on = on.with_row(quad1(p.a, p.b, dim, 0, Some(z)), 0.0);
        let mut obj = vec![0.0; dim];
        obj[z] = 1.0;
        let coupling_coeffs = (0..n_rows)
            .map(|l| {
                let mut v = vec![0.0; dim];
                match curved.iter().position(|&c| c == l) {
                    Some(k) => v[1 + k] = 1.0,
                    None => v[0] = p.row_lin[l],
                }
                vec![v]
            })
            .collect();
        out.push(EquivClass {
            omega: OmegaSpec { blocks: vec![BlockPair { on, off: BlockSet::zero_singleton(dim) }], coupling: vec![], tu_asserted: true },
            multiplicity: p.multiplicity,
            obj: vec![obj],
            y_obj: vec![p.c],
            coupling_coeffs,
        });
    }
    let global_rows = rhs.iter().zip(senses).map(|(&rhs, &sense)| GlobalRow { sense, rhs }).collect();
    Ok(ProblemSpec { name: name.to_string(), classes: out, global_rows })
}

/// One line-cover sensor class: cost `a·x² + c·y`, `0 ≤ x ≤ u·y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LcClass {
    pub a: f64,
    pub c: f64,
    pub u: f64,
    pub multiplicity: u32,
}

impl LcClass {
    pub fn sep_params(&self) -> SepClassParams {
        SepClassParams {
            a: self.a,
            b: 0.0,
            c: self.c,
            lower: 0.0,
            upper: self.u,
            row_quad: vec![0.0],
            row_lin: vec![1.0],
            multiplicity: self.multiplicity,
        }
    }
}

/// Line cover: `min Σ a·x² + c·y` subject to `Σ x = d`.
pub fn build_line_cover(name: &str, classes: &[LcClass], d: f64) -> Result<ProblemSpec> {
    if classes.iter().any(|c| !(c.a > 0.0) || !(c.u > 0.0)) {
        return Err(Error::InvalidArgument("line cover needs a > 0 and u > 0".into()));
    }
    let params: Vec<SepClassParams> = classes.iter().map(LcClass::sep_params).collect();
    build_sp(name, &params, &[d], &[Sense::Eq])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LcParams {
    #[serde(rename = "T")]
    pub t: u32,
    #[serde(rename = "N")]
    pub n: u32,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SqpParams {
    #[serde(rename = "T")]
    pub t: u32,
    #[serde(rename = "N")]
    pub n: u32,
    pub m: u32,
    pub seed: u64,
}

/// Sidecar record of how an instance was drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub family: String,
    pub seed: u64,
    pub recipe_version: u32,
    #[serde(rename = "T")]
    pub t: u32,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub c_max: Option<f64>,
    /// Hidden feasible point, one entry per member in class-major order.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub x_hat: Option<Vec<f64>>,
}

mod family {
    pub const INSTANCE: u32 = 0;
    pub const COST_QUAD: u32 = 1;
    pub const COST_FIXED: u32 = 2;
    pub const COST_LIN: u32 = 3;
    pub const HIDDEN_POINT: u32 = 4;
    /// Row `l` uses `ROWS + 2l` for its curvature and `ROWS + 2l + 1` for its slope.
    pub const ROWS: u32 = 16;
}

fn stream(seed: u64, family: u32, class: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((family as u64) << 32) | class as u64);
    rng
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

/// Line-cover instance with `T` distinct sensors each replicated `N` times:
/// `C_max ∈ {10n, 20n, 30n}` once per instance, `a ~ U[n, C_max]`,
/// `c` uniform in `{1..n}`, `u = d = 1`.
pub fn gen_lc_instance(p: &LcParams) -> Result<(ProblemSpec, InstanceMeta)> {
    if p.t == 0 || p.n == 0 {
        return Err(Error::InvalidArgument("T and N must be positive".into()));
    }
    let n = p.t as u64 * p.n as u64;
    let nf = n as f64;
    let c_max = nf * [10.0, 20.0, 30.0][stream(p.seed, family::INSTANCE, 0).gen_range(0..3usize)];
    let classes: Vec<LcClass> = (0..p.t)
        .map(|t| LcClass {
            a: uniform(&mut stream(p.seed, family::COST_QUAD, t), nf, c_max),
            c: stream(p.seed, family::COST_FIXED, t).gen_range(1..=n) as f64,
            u: 1.0,
            multiplicity: p.n,
        })
        .collect();
    let spec = build_line_cover(&format!("lc_T{}_N{}_s{}", p.t, p.n, p.seed), &classes, 1.0)?;
    let meta = InstanceMeta {
        family: "lc".into(),
        seed: p.seed,
        recipe_version: RECIPE_VERSION,
        t: p.t,
        n: p.n,
        m: None,
        c_max: Some(c_max),
        x_hat: None,
    };
    Ok((spec, meta))
}

/// Separable quadratic instance: `a, c ~ U[0,1]`, `b ~ U[2,5]`, box
/// `[−1, 1]`; rows `l < m` with `a_l ~ U[0,2]`, `b_l ~ U[0,5]` and
/// right-hand sides taken at a hidden point `x̂ ~ U[−1,1]` per member;
/// row `m` is `Σ x = Σ x̂`.
pub fn gen_sqp_instance(p: &SqpParams) -> Result<(ProblemSpec, InstanceMeta)> {
    if p.t == 0 || p.n == 0 || p.m == 0 {
        return Err(Error::InvalidArgument("T, N and m must be positive".into()));
    }
    let m = p.m as usize;
    let mut classes = Vec::with_capacity(p.t as usize);
    let mut x_hat = Vec::with_capacity((p.t * p.n) as usize);
    let mut rhs = vec![0.0; m];
    for t in 0..p.t {
        let mut row_quad = vec![0.0; m];
        let mut row_lin = vec![0.0; m];
        for l in 0..m - 1 {
            row_quad[l] = uniform(&mut stream(p.seed, family::ROWS + 2 * l as u32, t), 0.0, 2.0);
            row_lin[l] = uniform(&mut stream(p.seed, family::ROWS + 2 * l as u32 + 1, t), 0.0, 5.0);
        }
        row_lin[m - 1] = 1.0;
        let mut hidden = stream(p.seed, family::HIDDEN_POINT, t);
        for _ in 0..p.n {
            let x = uniform(&mut hidden, -1.0, 1.0);
            for l in 0..m {
                rhs[l] += row_quad[l] * x * x + row_lin[l] * x;
            }
            x_hat.push(x);
        }
        classes.push(SepClassParams {
            a: uniform(&mut stream(p.seed, family::COST_QUAD, t), 0.0, 1.0),
            b: uniform(&mut stream(p.seed, family::COST_LIN, t), 2.0, 5.0),
            c: uniform(&mut stream(p.seed, family::COST_FIXED, t), 0.0, 1.0),
            lower: -1.0,
            upper: 1.0,
            row_quad,
            row_lin,
            multiplicity: p.n,
        });
    }
    let mut senses = vec![Sense::Le; m];
    senses[m - 1] = Sense::Eq;
    let spec = build_sp(&format!("sqp_T{}_N{}_m{}_s{}", p.t, p.n, p.m, p.seed), &classes, &rhs, &senses)?;
    let meta = InstanceMeta {
        family: "sqp".into(),
        seed: p.seed,
        recipe_version: RECIPE_VERSION,
        t: p.t,
        n: p.n,
        m: Some(p.m),
        c_max: None,
        x_hat: Some(x_hat),
    };
    Ok((spec, meta))
}

/// Objective of the separable problem at a per-member point with every
/// member switched on, for class-major `x` (one entry per member).
pub fn sp_objective_all_on(spec: &ProblemSpec, x: &[f64]) -> f64 {
    let mut k = 0;
    let mut total = 0.0;
    for class in &spec.classes {
        let on = &class.omega.blocks[0].on;
        let f = &on.rows.last().expect("cost row").func;
        for _ in 0..class.multiplicity {
            total += f.quad[0] * x[k] * x[k] + f.lin[0] * x[k] + class.y_cost(0);
            k += 1;
        }
    }
    total
}
