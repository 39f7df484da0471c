//! On-disk formats: JSON design documents, OBJ meshes, CSV backbones, and
//! JSON fit reports. All emitters are deterministic; numbers carry 9
//! significant digits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fk::{Backbone, BoomDesign, CreaseKind, FacetMesh};
use crate::geometry::ModuleSpec;
use crate::ik::{FitResult, SearchOptions, TargetCurve};
use crate::states::StateLabel;

pub const SCHEMA_VERSION: &str = "1";

/// Nine significant digits; plain decimal notation.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000".to_string();
    }
    let p = (8 - x.abs().log10().floor() as i32).clamp(0, 30) as usize;
    format!("{x:.p$}")
}

/// Serialized boom design: spec, per-module state labels, and optionally a
/// target curve with search options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignDocument {
    pub version: String,
    /// Length convention; always side-length units.
    pub units: String,
    pub n: u32,
    pub beta: f64,
    pub states: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<SearchOptions>,
}

impl DesignDocument {
    pub fn from_design(design: &BoomDesign) -> Self {
        DesignDocument {
            version: SCHEMA_VERSION.to_string(),
            units: "l".to_string(),
            n: design.spec().n(),
            beta: design.spec().beta_deg(),
            states: design.states().iter().map(|s| s.to_string()).collect(),
            target: None,
            options: None,
        }
    }

    pub fn spec(&self) -> Result<ModuleSpec> {
        ModuleSpec::new(self.n, self.beta)
    }

    pub fn labels(&self) -> Result<Vec<StateLabel>> {
        self.states.iter().map(|s| s.parse()).collect()
    }

    pub fn design(&self) -> Result<BoomDesign> {
        BoomDesign::new(self.spec()?, self.labels()?)
    }

    pub fn curve(&self) -> Result<Option<TargetCurve>> {
        match &self.target {
            None => Ok(None),
            Some(pts) => {
                let pts = pts.iter().map(|p| nalgebra::Point3::new(p[0], p[1], p[2])).collect();
                Ok(Some(TargetCurve::new(pts)?))
            }
        }
    }
}

/// Parses and validates a design document.
pub fn load_design(text: &str) -> Result<DesignDocument> {
    let doc: DesignDocument = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("design document: {e}")))?;
    if doc.version.is_empty() {
        return Err(Error::Validation { field: "version".into(), message: "must be non-empty".into() });
    }
    if doc.units != "l" {
        return Err(Error::Validation {
            field: "units".into(),
            message: format!("unsupported units `{}` (only `l`)", doc.units),
        });
    }
    if !doc.beta.is_finite() {
        return Err(Error::Validation { field: "beta".into(), message: "must be finite".into() });
    }
    doc.spec().map_err(|e| Error::Validation { field: "n/beta".into(), message: e.to_string() })?;
    for (i, s) in doc.states.iter().enumerate() {
        let label: StateLabel = s
            .parse()
            .map_err(|e| Error::Validation { field: format!("states[{i}]"), message: format!("{e}") })?;
        if !label.is_valid_for(doc.n) {
            return Err(Error::Validation {
                field: format!("states[{i}]"),
                message: format!("pop-out index out of range for n={}", doc.n),
            });
        }
    }
    if let Some(target) = &doc.target {
        for (i, p) in target.iter().enumerate() {
            if !p.iter().all(|v| v.is_finite()) {
                return Err(Error::Validation {
                    field: format!("target[{i}]"),
                    message: "non-finite coordinate".into(),
                });
            }
        }
        doc.curve()?;
    }
    Ok(doc)
}

/// Emits a design document as pretty JSON followed by a newline.
pub fn emit_design(doc: &DesignDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("design document serializes");
    s.push('\n');
    s
}

/// Wavefront OBJ: vertices, faces (1-indexed), then crease polylines grouped
/// under `# mountain` / `# valley` comments.
pub fn export_mesh(mesh: &FacetMesh) -> String {
    let mut out = String::new();
    out.push_str("# yoshimura boom mesh\n");
    out.push_str(&format!("# modules: {}, n: {}\n", mesh.modules, mesh.n));
    for v in &mesh.vertices {
        out.push_str(&format!("v {} {} {}\n", sig9(v.x), sig9(v.y), sig9(v.z)));
    }
    for f in &mesh.faces {
        out.push_str(&format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1));
    }
    for (kind, header) in [(CreaseKind::Mountain, "# mountain"), (CreaseKind::Valley, "# valley")] {
        let edges: Vec<_> = mesh.creases.iter().filter(|c| c.kind == kind).collect();
        if edges.is_empty() {
            continue;
        }
        out.push_str(header);
        out.push('\n');
        for c in edges {
            out.push_str(&format!("l {} {}\n", c.a + 1, c.b + 1));
        }
    }
    out
}

/// CSV backbone: header `index,x,y,z`, one row per point.
pub fn export_backbone(bb: &Backbone) -> String {
    let mut out = String::from("index,x,y,z\n");
    for (i, p) in bb.points.iter().enumerate() {
        out.push_str(&format!("{i},{},{},{}\n", sig9(p.x), sig9(p.y), sig9(p.z)));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FitReport {
    version: String,
    labels: Vec<String>,
    rms: f64,
    algorithm: String,
    explored: u64,
    backbone: Vec<[f64; 3]>,
}

/// JSON fit report with stable key order; full-precision numbers so the rms
/// survives a reload bit-exactly.
pub fn export_fit_report(result: &FitResult) -> String {
    let report = FitReport {
        version: SCHEMA_VERSION.to_string(),
        labels: result.labels.iter().map(|l| l.to_string()).collect(),
        rms: result.rms,
        algorithm: result.algorithm.clone(),
        explored: result.explored,
        backbone: result.backbone.points.iter().map(|p| [p.x, p.y, p.z]).collect(),
    };
    let mut s = serde_json::to_string_pretty(&report).expect("fit report serializes");
    s.push('\n');
    s
}
