use serde::{Deserialize, Serialize};

use super::{OmegaSpec, Sense};

/// A group of `multiplicity` identical members sharing one Ω, costs and
/// coupling coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivClass {
    pub omega: OmegaSpec,
    pub multiplicity: u32,
    /// Per-block linear cost on the block variables.
    pub obj: Vec<Vec<f64>>,
    /// Per-block cost on the block binary (fixed costs such as start-up or
    /// set-up charges). Linear in `y`, so it aggregates to a cost on `Y`.
    #[serde(default)]
    pub y_obj: Vec<f64>,
    /// `coupling_coeffs[l][s]`: coefficients of global row `l` on block `s`.
    pub coupling_coeffs: Vec<Vec<Vec<f64>>>,
}

impl EquivClass {
    pub fn y_cost(&self, s: usize) -> f64 {
        self.y_obj.get(s).copied().unwrap_or(0.0)
    }
}

/// Global linear row `Σ_t Σ_i a_tl·x_i (sense) rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalRow {
    pub sense: Sense,
    pub rhs: f64,
}

/// A full instance: equivalence classes plus the global linear rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub name: String,
    pub classes: Vec<EquivClass>,
    pub global_rows: Vec<GlobalRow>,
}

#[derive(Serialize, Deserialize)]
struct Versioned<T> {
    format_version: u32,
    #[serde(flatten)]
    inner: T,
}

impl ProblemSpec {
    pub fn total_members(&self) -> u64 {
        self.classes.iter().map(|c| c.multiplicity as u64).sum()
    }

    /// Number of per-copy binaries (Σ_t N_t·k_t).
    pub fn per_copy_binaries(&self) -> u64 {
        self.classes.iter().map(|c| c.multiplicity as u64 * c.omega.k() as u64).sum()
    }

    pub fn to_json(&self) -> crate::Result<String> {
        Ok(serde_json::to_string_pretty(&Versioned {
            format_version: crate::FORMAT_VERSION,
            inner: self,
        })?)
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        let doc: Versioned<ProblemSpec> = serde_json::from_str(text)?;
        if doc.format_version != crate::FORMAT_VERSION {
            return Err(crate::Error::UnsupportedFormat(format!(
                "format_version {}",
                doc.format_version
            )));
        }
        Ok(doc.inner)
    }
}
