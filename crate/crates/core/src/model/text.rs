//! Line-oriented `conic-text` serialization of [`ConicModel`].
//!
//! ```text
//! CONIC 1 [name]                  header, format version 1
//! VARS <n>                        variables are named x0 .. x<n-1>
//! BOUNDS x<j> <lower> <upper>     one line per variable, in index order
//! ROW <sense> <rhs> : <coef> x<j> ...
//! RSOC <m+2>: x<u> x<v> x<z1> ... Σ z² ≤ u·v
//! INT x<j>
//! TAG x<j> <class> <member|-> <block> <role> <coord>
//! OBJ <offset> : <coef> x<j> ...
//! ```
//!
//! Sections appear in this order; ROW, RSOC, INT and TAG lines are omitted
//! when there is nothing to list. Reals are written with 17 significant
//! digits (`inf`/`-inf` for unbounded sides), lines end with LF.

use std::fmt::Write as _;

use super::{ConicModel, LinearRow, Role, RotatedCone, Sense, VarTag, Variable};
use crate::error::{Error, Result};

/// Output formats understood by [`emit_model`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelFormat {
    ConicText,
    Json,
}

impl std::str::FromStr for ModelFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conic-text" => Ok(ModelFormat::ConicText),
            "json" => Ok(ModelFormat::Json),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }
}

pub fn emit_model(model: &ConicModel, format: ModelFormat) -> Result<Vec<u8>> {
    model.check()?;
    match format {
        ModelFormat::ConicText => Ok(to_conic_text(model).into_bytes()),
        ModelFormat::Json => Ok(model.to_json()?.into_bytes()),
    }
}

pub fn parse_model(bytes: &[u8], format: ModelFormat) -> Result<ConicModel> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Error::Parse { line: 0, msg: e.to_string() })?;
    match format {
        ModelFormat::ConicText => from_conic_text(text),
        ModelFormat::Json => ConicModel::from_json(text),
    }
}

fn real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

fn terms(out: &mut String, coeffs: &[(usize, f64)]) {
    for &(j, a) in coeffs {
        let _ = write!(out, " {} x{j}", real(a));
    }
}

pub fn to_conic_text(model: &ConicModel) -> String {
    let mut out = String::new();
    if model.name.is_empty() {
        let _ = writeln!(out, "CONIC {}", crate::FORMAT_VERSION);
    } else {
        let _ = writeln!(out, "CONIC {} {}", crate::FORMAT_VERSION, model.name);
    }
    let _ = writeln!(out, "VARS {}", model.vars.len());
    for (j, v) in model.vars.iter().enumerate() {
        let _ = writeln!(out, "BOUNDS x{j} {} {}", real(v.lower), real(v.upper));
    }
    for row in &model.rows {
        let _ = write!(out, "ROW {} {} :", row.sense.token(), real(row.rhs));
        terms(&mut out, &row.coeffs);
        out.push('\n');
    }
    for cone in &model.cones {
        let _ = write!(out, "RSOC {}: x{} x{}", cone.z.len() + 2, cone.u, cone.v);
        for z in &cone.z {
            let _ = write!(out, " x{z}");
        }
        out.push('\n');
    }
    for (j, v) in model.vars.iter().enumerate() {
        if v.integer {
            let _ = writeln!(out, "INT x{j}");
        }
    }
    for (j, v) in model.vars.iter().enumerate() {
        if let Some(t) = v.tag {
            let member = t.member.map_or_else(|| "-".to_string(), |m| m.to_string());
            let _ = writeln!(
                out,
                "TAG x{j} {} {member} {} {} {}",
                t.class,
                t.block,
                t.role.token(),
                t.coord
            );
        }
    }
    let _ = write!(out, "OBJ {} :", real(model.obj_offset));
    terms(&mut out, &model.objective);
    out.push('\n');
    out
}

struct Lines<'a> {
    line: usize,
    toks: Vec<&'a str>,
}

impl<'a> Lines<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, msg: msg.into() }
    }

    fn real(&self, tok: &str) -> Result<f64> {
        tok.parse::<f64>().map_err(|_| self.err(format!("bad number `{tok}`")))
    }

    fn var(&self, tok: &str, n: usize) -> Result<usize> {
        let j = tok
            .strip_prefix('x')
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| self.err(format!("bad variable `{tok}`")))?;
        if j >= n {
            return Err(self.err(format!("variable `{tok}` out of range")));
        }
        Ok(j)
    }

    fn terms(&self, toks: &[&str], n: usize) -> Result<Vec<(usize, f64)>> {
        if toks.len() % 2 != 0 {
            return Err(self.err("coefficient list must be pairs"));
        }
        toks.chunks(2).map(|p| Ok((self.var(p[1], n)?, self.real(p[0])?))).collect()
    }
}

pub fn from_conic_text(text: &str) -> Result<ConicModel> {
    let mut model = ConicModel::default();
    let mut n: Option<usize> = None;
    let mut seen_obj = false;
    for (idx, raw) in text.lines().enumerate() {
        let ln = Lines { line: idx + 1, toks: raw.split_whitespace().collect() };
        let Some(&head) = ln.toks.first() else { continue };
        let toks = &ln.toks[1..];
        match head {
            "CONIC" => {
                if idx != 0 {
                    return Err(ln.err("header must be the first line"));
                }
                let version = toks.first().ok_or_else(|| ln.err("missing version"))?;
                if *version != crate::FORMAT_VERSION.to_string() {
                    return Err(Error::UnsupportedFormat(format!("conic-text version {version}")));
                }
                model.name = toks.get(1).map(|s| s.to_string()).unwrap_or_default();
            }
            "VARS" => {
                let count: usize = toks
                    .first()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| ln.err("VARS needs a count"))?;
                model.vars = vec![
                    Variable { lower: 0.0, upper: f64::INFINITY, integer: false, tag: None };
                    count
                ];
                n = Some(count);
            }
            _ => {
                let n = n.ok_or_else(|| ln.err("VARS must precede other sections"))?;
                match head {
                    "BOUNDS" => {
                        if toks.len() != 3 {
                            return Err(ln.err("BOUNDS needs var, lower, upper"));
                        }
                        let j = ln.var(toks[0], n)?;
                        model.vars[j].lower = ln.real(toks[1])?;
                        model.vars[j].upper = ln.real(toks[2])?;
                    }
                    "ROW" => {
                        if toks.len() < 3 || toks[2] != ":" {
                            return Err(ln.err("ROW needs `sense rhs :`"));
                        }
                        let sense = Sense::from_token(toks[0])
                            .ok_or_else(|| ln.err(format!("bad sense `{}`", toks[0])))?;
                        let rhs = ln.real(toks[1])?;
                        let coeffs = ln.terms(&toks[3..], n)?;
                        model.rows.push(LinearRow { coeffs, sense, rhs });
                    }
                    "RSOC" => {
                        let size: usize = toks
                            .first()
                            .and_then(|t| t.strip_suffix(':'))
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| ln.err("RSOC needs `<size>:`"))?;
                        let vars: Vec<usize> =
                            toks[1..].iter().map(|t| ln.var(t, n)).collect::<Result<_>>()?;
                        if vars.len() != size || size < 2 {
                            return Err(ln.err("RSOC size does not match its members"));
                        }
                        model.cones.push(RotatedCone { u: vars[0], v: vars[1], z: vars[2..].to_vec() });
                    }
                    "INT" => {
                        let j = ln.var(toks.first().ok_or_else(|| ln.err("INT needs a var"))?, n)?;
                        model.vars[j].integer = true;
                    }
                    "TAG" => {
                        if toks.len() != 6 {
                            return Err(ln.err("TAG needs var class member block role coord"));
                        }
                        let j = ln.var(toks[0], n)?;
                        let int = |t: &str| t.parse::<u32>().map_err(|_| ln.err(format!("bad integer `{t}`")));
                        let member = if toks[2] == "-" { None } else { Some(int(toks[2])?) };
                        let role = Role::from_token(toks[4]).ok_or_else(|| ln.err("bad role"))?;
                        model.vars[j].tag = Some(VarTag {
                            class: int(toks[1])?,
                            member,
                            block: int(toks[3])?,
                            role,
                            coord: int(toks[5])?,
                        });
                    }
                    "OBJ" => {
                        if toks.len() < 2 || toks[1] != ":" {
                            return Err(ln.err("OBJ needs `offset :`"));
                        }
                        model.obj_offset = ln.real(toks[0])?;
                        model.objective = ln.terms(&toks[2..], n)?;
                        seen_obj = true;
                    }
                    other => return Err(ln.err(format!("unknown section `{other}`"))),
                }
            }
        }
    }
    if n.is_none() || !seen_obj {
        return Err(Error::Parse { line: 0, msg: "missing VARS or OBJ section".into() });
    }
    Ok(model)
}
