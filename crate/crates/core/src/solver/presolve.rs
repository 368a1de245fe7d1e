//! Fixed-variable elimination, singleton rows to bounds, empty-row removal
//! and cones whose scale variable is pinned at zero.

use crate::model::{ConicModel, Sense};

pub(super) struct Infeasible;

/// Affine expression `x[col] + constant` (or just `constant`).
#[derive(Clone, Copy, Debug)]
pub(super) struct Aff {
    pub col: Option<usize>,
    pub constant: f64,
}

pub(super) struct PRow {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

pub(super) struct PCone {
    pub u: Aff,
    pub v: Aff,
    pub z: Vec<Aff>,
}

pub(super) struct Presolved {
    /// Column -> original variable.
    pub orig_of: Vec<usize>,
    /// Value of every original variable that was fixed (NaN otherwise).
    pub fixed: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub rows: Vec<PRow>,
    pub cones: Vec<PCone>,
    pub c: Vec<f64>,
    pub c0: f64,
}

const MIN_PIVOT: f64 = 1e-9;

fn is_fixed(lo: f64, hi: f64) -> bool {
    lo.is_finite() && hi.is_finite() && hi - lo <= 1e-12 * (1.0 + lo.abs().max(hi.abs()))
}

pub(super) fn presolve(model: &ConicModel, bounds: &[(f64, f64)], feas: f64) -> Result<Presolved, Infeasible> {
    let n = model.num_vars();
    let mut lo: Vec<f64> = bounds.iter().map(|b| b.0).collect();
    let mut hi: Vec<f64> = bounds.iter().map(|b| b.1).collect();
    let mut row_live = vec![true; model.rows.len()];
    let mut cone_live = vec![true; model.cones.len()];

    let settle = |lo: &mut [f64], hi: &mut [f64], j: usize| -> Result<(), Infeasible> {
        if lo[j] > hi[j] {
            if lo[j] - hi[j] > feas * (1.0 + lo[j].abs().max(hi[j].abs())) {
                return Err(Infeasible);
            }
            let mid = 0.5 * (lo[j] + hi[j]);
            lo[j] = mid;
            hi[j] = mid;
        }
        Ok(())
    };
    for j in 0..n {
        settle(&mut lo, &mut hi, j)?;
    }

    let mut changed = true;
    let mut passes = 0;
    while changed && passes < 100 {
        changed = false;
        passes += 1;
        for (i, row) in model.rows.iter().enumerate() {
            if !row_live[i] {
                continue;
            }
            let mut constant = 0.0;
            let mut free: Option<(usize, f64)> = None;
            let mut n_free = 0usize;
            for &(j, a) in &row.coeffs {
                if is_fixed(lo[j], hi[j]) {
                    constant += a * lo[j];
                } else if a != 0.0 {
                    n_free += 1;
                    free = Some((j, a));
                }
            }
            let rhs = row.rhs - constant;
            match (n_free, free) {
                (0, _) => {
                    if row.sense.violation(0.0, rhs) > feas * (1.0 + row.rhs.abs()) {
                        return Err(Infeasible);
                    }
                    row_live[i] = false;
                    changed = true;
                }
                (1, Some((j, a))) if a.abs() >= MIN_PIVOT => {
                    let t = rhs / a;
                    let upper = matches!((row.sense, a > 0.0), (Sense::Le, true) | (Sense::Ge, false));
                    match row.sense {
                        Sense::Eq => {
                            lo[j] = lo[j].max(t);
                            hi[j] = hi[j].min(t);
                        }
                        _ if upper => hi[j] = hi[j].min(t),
                        _ => lo[j] = lo[j].max(t),
                    }
                    settle(&mut lo, &mut hi, j)?;
                    row_live[i] = false;
                    changed = true;
                }
                _ => {}
            }
        }
        for (i, cone) in model.cones.iter().enumerate() {
            if !cone_live[i] {
                continue;
            }
            let pinned_zero = |j: usize| is_fixed(lo[j], hi[j]) && lo[j].abs() <= 1e-12;
            let (zero_side, other) = if pinned_zero(cone.u) {
                (true, cone.v)
            } else if pinned_zero(cone.v) {
                (true, cone.u)
            } else {
                (false, 0)
            };
            if zero_side {
                for &z in &cone.z {
                    if lo[z] > feas || hi[z] < -feas {
                        return Err(Infeasible);
                    }
                    lo[z] = 0.0;
                    hi[z] = 0.0;
                }
                lo[other] = lo[other].max(0.0);
                settle(&mut lo, &mut hi, other)?;
                cone_live[i] = false;
                changed = true;
            }
        }
    }

    let mut col_of = vec![None; n];
    let mut orig_of = Vec::new();
    let mut fixed = vec![f64::NAN; n];
    for j in 0..n {
        if is_fixed(lo[j], hi[j]) {
            fixed[j] = lo[j];
        } else {
            col_of[j] = Some(orig_of.len());
            orig_of.push(j);
        }
    }
    let aff = |j: usize| match col_of[j] {
        Some(c) => Aff { col: Some(c), constant: 0.0 },
        None => Aff { col: None, constant: fixed[j] },
    };

    let mut rows = Vec::new();
    for (i, row) in model.rows.iter().enumerate() {
        if !row_live[i] {
            continue;
        }
        let mut rhs = row.rhs;
        let mut coeffs = Vec::with_capacity(row.coeffs.len());
        for &(j, a) in &row.coeffs {
            match col_of[j] {
                Some(c) => coeffs.push((c, a)),
                None => rhs -= a * fixed[j],
            }
        }
        rows.push(PRow { coeffs, sense: row.sense, rhs });
    }

    let mut cones = Vec::new();
    for (i, cone) in model.cones.iter().enumerate() {
        if !cone_live[i] {
            continue;
        }
        let pc = PCone { u: aff(cone.u), v: aff(cone.v), z: cone.z.iter().map(|&j| aff(j)).collect() };
        if pc.u.col.is_none() && pc.v.col.is_none() && pc.z.iter().all(|a| a.col.is_none()) {
            let zz: f64 = pc.z.iter().map(|a| a.constant * a.constant).sum();
            let (u, v) = (pc.u.constant, pc.v.constant);
            if u < -feas || v < -feas || zz - u * v > feas * (1.0 + u.abs() + v.abs()) {
                return Err(Infeasible);
            }
            continue;
        }
        cones.push(pc);
    }

    let mut c = vec![0.0; orig_of.len()];
    let mut c0 = model.obj_offset;
    for &(j, coef) in &model.objective {
        match col_of[j] {
            Some(col) => c[col] += coef,
            None => c0 += coef * fixed[j],
        }
    }
    let (plo, phi) = orig_of.iter().map(|&j| (lo[j], hi[j])).unzip();
    Ok(Presolved { orig_of, fixed, lo: plo, hi: phi, rows, cones, c, c0 })
}
