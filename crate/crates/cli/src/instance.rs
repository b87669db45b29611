//! Instance files: JSON documents `{dim, index, S, G, tolerances?}`.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use sconvex::{MonotoneSet, ScalarProduct};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_activity")]
    pub activity: f64,
    #[serde(default = "default_isotropy")]
    pub isotropy: f64,
    #[serde(default = "default_coverage")]
    pub coverage: f64,
}

fn default_activity() -> f64 {
    sconvex::ACTIVITY_TOL
}

fn default_isotropy() -> f64 {
    sconvex::ISOTROPY_TOL
}

fn default_coverage() -> f64 {
    1e-8
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            activity: default_activity(),
            isotropy: default_isotropy(),
            coverage: default_coverage(),
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [
            ("activity", self.activity),
            ("isotropy", self.isotropy),
            ("coverage", self.coverage),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Input(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    dim: usize,
    index: usize,
    #[serde(rename = "S")]
    s: Vec<Vec<f64>>,
    #[serde(rename = "G")]
    g: Vec<Vec<f64>>,
    tolerances: Option<Tolerances>,
}

/// A validated instance: the form, an `S`-monotone set and tolerances.
#[derive(Debug, Clone)]
pub struct Instance {
    pub space: ScalarProduct,
    pub set: MonotoneSet,
    pub tolerances: Tolerances,
}

impl Instance {
    pub fn new(space: ScalarProduct, points: Vec<Vec<f64>>, tolerances: Tolerances) -> Result<Self, CliError> {
        tolerances.validate()?;
        let set = MonotoneSet::new(space.clone(), points, tolerances.isotropy)?;
        Ok(Self { space, set, tolerances })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawInstance = serde_json::from_str(text).map_err(|e| {
            CliError::Input(format!("parse error at line {}, column {}: {e}", e.line(), e.column()))
        })?;
        if raw.dim == 0 {
            return Err(CliError::Input("field `dim`: must be at least 1".into()));
        }
        if raw.s.len() != raw.dim || raw.s.iter().any(|r| r.len() != raw.dim) {
            return Err(CliError::Input(format!("field `S`: expected a {0}x{0} matrix", raw.dim)));
        }
        if raw.g.is_empty() {
            return Err(CliError::Input("field `G`: at least one point is required".into()));
        }
        if let Some(i) = raw.g.iter().position(|p| p.len() != raw.dim) {
            return Err(CliError::Input(format!(
                "field `G`: point {i} has {} coordinates, expected {}",
                raw.g[i].len(),
                raw.dim
            )));
        }
        let space = ScalarProduct::from_rows(&raw.s)?;
        if space.index() != raw.index {
            return Err(CliError::Input(format!(
                "field `index`: declared {}, but S has {} positive eigenvalues",
                raw.index,
                space.index()
            )));
        }
        Self::new(space, raw.g, raw.tolerances.unwrap_or_default())
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Canonical text: two-space indentation, one matrix row or point per
    /// line, shortest round-trip numbers.
    pub fn to_canonical_string(&self) -> String {
        let mut out = String::from("{\n");
        let _ = writeln!(out, "  \"dim\": {},", self.space.dim());
        let _ = writeln!(out, "  \"index\": {},", self.space.index());
        write_rows(&mut out, "S", &self.space.rows());
        out.push_str(",\n");
        write_rows(&mut out, "G", self.set.points());
        out.push_str(",\n  \"tolerances\": {\n");
        let t = &self.tolerances;
        let _ = writeln!(out, "    \"activity\": {},", num(t.activity));
        let _ = writeln!(out, "    \"isotropy\": {},", num(t.isotropy));
        let _ = writeln!(out, "    \"coverage\": {}", num(t.coverage));
        out.push_str("  }\n}\n");
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_canonical_string())
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
    }
}

pub(crate) fn num(v: f64) -> String {
    serde_json::to_string(&v).expect("finite number")
}

fn write_rows(out: &mut String, key: &str, rows: &[Vec<f64>]) {
    let _ = writeln!(out, "  \"{key}\": [");
    for (i, r) in rows.iter().enumerate() {
        let cells: Vec<String> = r.iter().map(|&v| num(v)).collect();
        let sep = if i + 1 < rows.len() { "," } else { "" };
        let _ = writeln!(out, "    [{}]{sep}", cells.join(", "));
    }
    out.push_str("  ]");
}
