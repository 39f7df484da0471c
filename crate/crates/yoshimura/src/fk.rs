//! Forward kinematics: chaining per-module transforms into backbones and
//! triangulated facet meshes, plus edge-length strain diagnostics and the
//! exact configuration count.

use nalgebra::Point3;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    bottom_ring, derive_params, mid_plane_with, top_ring, transform, HomTransform,
    MidPlaneOptions, ModuleSpec, StateParams,
};
use crate::states::{resolve_state, StateLabel};

/// A boom: one module spec shared by all `m` modules, plus one state label
/// per module, bottom to top.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoomDesign {
    spec: ModuleSpec,
    states: Vec<StateLabel>,
}

impl BoomDesign {
    pub fn new(spec: ModuleSpec, states: Vec<StateLabel>) -> Result<Self> {
        for (i, label) in states.iter().enumerate() {
            if !label.is_valid_for(spec.n()) {
                return Err(Error::InvalidSpec(format!(
                    "module {i}: label {label} invalid for n={}",
                    spec.n()
                )));
            }
        }
        Ok(BoomDesign { spec, states })
    }

    pub fn spec(&self) -> &ModuleSpec {
        &self.spec
    }

    pub fn states(&self) -> &[StateLabel] {
        &self.states
    }

    pub fn m(&self) -> usize {
        self.states.len()
    }
}

/// Chain of module boundary-ring centroids, `x_0` through `x_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Backbone {
    pub points: Vec<Point3<f64>>,
    /// True when lengths are in units of the ring circumradius `r` instead of
    /// the side length `l`.
    pub normalized: bool,
}

/// Crease classification on the facet mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CreaseKind {
    /// `P`-to-ring edges, nominal length `a`.
    Mountain,
    /// Ring edges and mid `P_i - P_{i+1}` edges, nominal length 1.
    Valley,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CreaseEdge {
    pub a: usize,
    pub b: usize,
    pub kind: CreaseKind,
    /// Nominal length in l-units.
    pub expected: f64,
    /// Index of the module this crease is grouped under.
    pub module: usize,
}

/// Triangulated boom surface. Vertex layout is ring 0 first, then per module
/// its `n` mid vertices followed by its top ring; boundary rings between
/// consecutive modules are shared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetMesh {
    pub vertices: Vec<Point3<f64>>,
    pub faces: Vec<[usize; 3]>,
    pub creases: Vec<CreaseEdge>,
    pub n: usize,
    pub modules: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeStrain {
    pub a: usize,
    pub b: usize,
    pub kind: CreaseKind,
    pub expected: f64,
    pub actual: f64,
    /// `|actual - expected| / expected`.
    pub deviation: f64,
}

/// Edge-length diagnostics against the nominal crease lengths. The facets are
/// rigid, so every tagged edge should hold its nominal length in a strain-free
/// state; deviations measure how far a configuration is from that.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrainReport {
    pub edges: Vec<EdgeStrain>,
    pub max_deviation: f64,
    pub mean_deviation: f64,
}

/// Bottom-to-top transform of one module in a given state. `normalized`
/// rescales the slant height to `d / r`; the rotation part is scale-free.
pub fn module_transform(spec: &ModuleSpec, label: StateLabel, normalized: bool) -> Result<HomTransform> {
    let st = resolve_state(spec, label)?;
    let mut params = st.params;
    if normalized {
        params = StateParams::new(params.gamma_deg, params.psi_deg, params.d / derive_params(spec).r);
    }
    Ok(transform(&params))
}

/// Backbone points `x_i = T^(1) ... T^(i) . origin` for `i = 0..m`.
pub fn backbone(design: &BoomDesign, normalized: bool) -> Result<Backbone> {
    let mut points = Vec::with_capacity(design.m() + 1);
    points.push(Point3::origin());
    let mut acc = HomTransform::identity();
    for label in design.states() {
        let t = module_transform(design.spec(), *label, normalized)?;
        acc = acc * t;
        points.push(acc.apply_point(&Point3::origin()));
    }
    Ok(Backbone { points, normalized })
}

/// Builds the triangulated surface of the boom in l-units.
///
/// Mid vertices whose equidistance radicand is slightly negative are clamped
/// onto the quad circumcenter instead of failing: away from the critical fold
/// angles the pop-out states carry real strain and an exact equidistant point
/// need not exist, but the surface should still render. Coincident boundary
/// rings (the zero-height self-packed module) get their mid vertices at the
/// ring edge midpoints.
pub fn boom_mesh(design: &BoomDesign) -> Result<FacetMesh> {
    let n = design.spec().n() as usize;
    let m = design.m();
    let a_len = derive_params(design.spec()).a;
    let mut mesh = FacetMesh {
        vertices: Vec::new(),
        faces: Vec::new(),
        creases: Vec::new(),
        n,
        modules: m,
    };
    if m == 0 {
        return Ok(mesh);
    }

    let base = bottom_ring(design.spec().n())?;
    let mut bottom = base.clone();
    let mut acc = HomTransform::identity();
    mesh.vertices.extend(bottom.points.iter().copied());
    push_ring_creases(&mut mesh, 0, 0, n);

    let opts = MidPlaneOptions { clamp_infeasible: true, ..MidPlaneOptions::default() };
    for (k, label) in design.states().iter().enumerate() {
        let t = module_transform(design.spec(), *label, false)?;
        acc = acc * t;
        let top = top_ring(&base, &acc);

        let coincident = bottom
            .points
            .iter()
            .zip(&top.points)
            .all(|(p, q)| (q - p).norm() < 1e-12);
        let mids: Vec<Point3<f64>> = if coincident {
            (0..n)
                .map(|i| nalgebra::center(&bottom.points[i], &bottom.points[(i + 1) % n]))
                .collect()
        } else {
            let mp = mid_plane_with(&bottom, &top, a_len, &opts)
                .map_err(|e| Error::GeometryInfeasible(format!("module {k}: {e}")))?;
            mp.entries.iter().map(|e| e.point).collect()
        };

        let bot_off = k * 2 * n;
        let mid_off = bot_off + n;
        let top_off = mid_off + n;
        mesh.vertices.extend(mids);
        mesh.vertices.extend(top.points.iter().copied());

        for i in 0..n {
            let j = (i + 1) % n;
            mesh.faces.push([bot_off + i, bot_off + j, mid_off + i]);
            mesh.faces.push([mid_off + i, mid_off + j, bot_off + j]);
            mesh.faces.push([top_off + i, top_off + j, mid_off + i]);
            mesh.faces.push([mid_off + i, mid_off + j, top_off + j]);

            for ring_v in [bot_off + i, bot_off + j, top_off + i, top_off + j] {
                mesh.creases.push(CreaseEdge {
                    a: ring_v.min(mid_off + i),
                    b: ring_v.max(mid_off + i),
                    kind: CreaseKind::Mountain,
                    expected: a_len,
                    module: k,
                });
            }
            mesh.creases.push(CreaseEdge {
                a: mid_off + i,
                b: mid_off + j,
                kind: CreaseKind::Valley,
                expected: 1.0,
                module: k,
            });
        }
        push_ring_creases(&mut mesh, top_off, k, n);
        bottom = top;
    }
    Ok(mesh)
}

fn push_ring_creases(mesh: &mut FacetMesh, offset: usize, module: usize, n: usize) {
    for i in 0..n {
        let j = (i + 1) % n;
        mesh.creases.push(CreaseEdge {
            a: offset + i.min(j),
            b: offset + i.max(j),
            kind: CreaseKind::Valley,
            expected: 1.0,
            module,
        });
    }
}

/// Compares each tagged crease edge to its nominal length, in crease order.
pub fn strain_report(mesh: &FacetMesh, _spec: &ModuleSpec) -> StrainReport {
    let mut edges = Vec::with_capacity(mesh.creases.len());
    let mut max_dev: f64 = 0.0;
    let mut sum = 0.0;
    for c in &mesh.creases {
        let actual = (mesh.vertices[c.b] - mesh.vertices[c.a]).norm();
        let deviation = (actual - c.expected).abs() / c.expected;
        max_dev = max_dev.max(deviation);
        sum += deviation;
        edges.push(EdgeStrain {
            a: c.a,
            b: c.b,
            kind: c.kind,
            expected: c.expected,
            actual,
            deviation,
        });
    }
    let mean = if edges.is_empty() { 0.0 } else { sum / edges.len() as f64 };
    StrainReport { edges, max_deviation: max_dev, mean_deviation: mean }
}

/// Exact number of global configurations, `(2(n+1))^m`.
pub fn config_count(n: u32, m: u32) -> Result<BigUint> {
    if n < 3 {
        return Err(Error::InvalidSpec(format!("n must be >= 3, got {n}")));
    }
    Ok(BigUint::from(2 * (n as u64 + 1)).pow(m))
}
