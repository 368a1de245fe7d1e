use serde::{Deserialize, Serialize};

use super::Sense;
use crate::error::{Error, Result};

pub type VarId = usize;

/// What a compiled variable stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    X,
    W,
    Z,
    Y,
    Epigraph,
    Slack,
}

impl Role {
    pub fn token(self) -> &'static str {
        match self {
            Role::X => "X",
            Role::W => "W",
            Role::Z => "Z",
            Role::Y => "Y",
            Role::Epigraph => "epigraph",
            Role::Slack => "slack",
        }
    }

    pub fn from_token(tok: &str) -> Option<Role> {
        Some(match tok {
            "X" => Role::X,
            "W" => Role::W,
            "Z" => Role::Z,
            "Y" => Role::Y,
            "epigraph" => Role::Epigraph,
            "slack" => Role::Slack,
            _ => return None,
        })
    }
}

/// Provenance of a compiled variable. `member` is `None` for aggregated
/// variables; `coord` indexes the coordinate inside the block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VarTag {
    pub class: u32,
    pub member: Option<u32>,
    pub block: u32,
    pub role: Role,
    pub coord: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    #[serde(with = "extended_f64")]
    pub lower: f64,
    #[serde(with = "extended_f64")]
    pub upper: f64,
    pub integer: bool,
    pub tag: Option<VarTag>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearRow {
    pub coeffs: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl LinearRow {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }
}

/// Rotated second-order cone `Σ_j z_j² ≤ u·v`, `u ≥ 0`, `v ≥ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotatedCone {
    pub u: VarId,
    pub v: VarId,
    pub z: Vec<VarId>,
}

/// A compiled continuous or mixed-integer conic model:
/// `min c·x + offset` subject to linear rows, rotated cones, bounds and
/// integrality marks.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConicModel {
    pub name: String,
    pub vars: Vec<Variable>,
    pub rows: Vec<LinearRow>,
    pub cones: Vec<RotatedCone>,
    pub objective: Vec<(VarId, f64)>,
    pub obj_offset: f64,
}

#[derive(Serialize, Deserialize)]
struct Versioned<T> {
    format_version: u32,
    #[serde(flatten)]
    inner: T,
}

impl ConicModel {
    pub fn new(name: &str) -> Self {
        ConicModel {
            name: name.split_whitespace().collect::<Vec<_>>().join("_"),
            ..Default::default()
        }
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn add_var(&mut self, lower: f64, upper: f64, integer: bool, tag: Option<VarTag>) -> VarId {
        self.vars.push(Variable { lower, upper, integer, tag });
        self.vars.len() - 1
    }

    pub fn add_continuous(&mut self, lower: f64, upper: f64, tag: Option<VarTag>) -> VarId {
        self.add_var(lower, upper, false, tag)
    }

    /// Appends a row, merging repeated variables and dropping zero entries.
    pub fn add_row(&mut self, coeffs: Vec<(VarId, f64)>, sense: Sense, rhs: f64) -> usize {
        let mut merged: Vec<(VarId, f64)> = Vec::with_capacity(coeffs.len());
        for (j, a) in coeffs {
            match merged.iter_mut().find(|(k, _)| *k == j) {
                Some(entry) => entry.1 += a,
                None => merged.push((j, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        self.rows.push(LinearRow { coeffs: merged, sense, rhs });
        self.rows.len() - 1
    }

    pub fn add_cone(&mut self, u: VarId, v: VarId, z: Vec<VarId>) -> usize {
        self.cones.push(RotatedCone { u, v, z });
        self.cones.len() - 1
    }

    pub fn add_objective(&mut self, var: VarId, coef: f64) {
        if coef == 0.0 {
            return;
        }
        match self.objective.iter_mut().find(|(k, _)| *k == var) {
            Some(entry) => entry.1 += coef,
            None => self.objective.push((var, coef)),
        }
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.obj_offset + self.objective.iter().map(|&(j, c)| c * x[j]).sum::<f64>()
    }

    pub fn integer_vars(&self) -> Vec<VarId> {
        (0..self.vars.len()).filter(|&j| self.vars[j].integer).collect()
    }

    /// Copy with every integrality mark removed.
    pub fn relaxed(&self) -> ConicModel {
        let mut m = self.clone();
        for v in &mut m.vars {
            v.integer = false;
        }
        m
    }

    /// Structural invariants: indices in range, bounds ordered, integer
    /// variables finitely bounded.
    pub fn check(&self) -> Result<()> {
        let n = self.vars.len();
        for (j, v) in self.vars.iter().enumerate() {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(Error::InvalidModel(format!("variable {j} has bounds [{}, {}]", v.lower, v.upper)));
            }
            if v.integer && !(v.lower.is_finite() && v.upper.is_finite()) {
                return Err(Error::InvalidModel(format!("integer variable {j} lacks finite bounds")));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.iter().any(|&(j, a)| j >= n || !a.is_finite()) || !row.rhs.is_finite() {
                return Err(Error::InvalidModel(format!("row {i} references a bad index or value")));
            }
        }
        for (i, cone) in self.cones.iter().enumerate() {
            if cone.u >= n || cone.v >= n || cone.z.iter().any(|&j| j >= n) {
                return Err(Error::InvalidModel(format!("cone {i} references an unknown variable")));
            }
        }
        if self.objective.iter().any(|&(j, c)| j >= n || !c.is_finite()) || !self.obj_offset.is_finite() {
            return Err(Error::InvalidModel("objective references a bad index or value".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&Versioned { format_version: crate::FORMAT_VERSION, inner: self })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Versioned<ConicModel> = serde_json::from_str(text)?;
        if doc.format_version != crate::FORMAT_VERSION {
            return Err(Error::UnsupportedFormat(format!("format_version {}", doc.format_version)));
        }
        Ok(doc.inner)
    }
}

/// JSON has no infinities; unbounded sides are written as `"inf"`/`"-inf"`.
mod extended_f64 {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(de::Error::custom(format!("bad bound `{other}`"))),
            },
        }
    }
}
