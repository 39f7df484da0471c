//! Module-local geometry: design parameters, the bottom-to-top homogeneous
//! transform, boundary rings, and the mid-plane vertex construction.
//!
//! All lengths are in units of the valley fold length `l = 1`; all angles at
//! the public surface are in degrees.

use nalgebra::{Matrix4, Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) fn deg_to_rad(deg: f64) -> f64 {
    deg * std::f64::consts::PI / 180.0
}

pub(crate) fn rad_to_deg(rad: f64) -> f64 {
    rad * 180.0 / std::f64::consts::PI
}

/// Design inputs of a single module: side count `n` and fold angle `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModuleSpec {
    n: u32,
    beta_deg: f64,
}

impl ModuleSpec {
    /// Builds a validated spec. Requires `n >= 3` and `0 < beta < 90` degrees.
    pub fn new(n: u32, beta_deg: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidSpec(format!("n must be >= 3, got {n}")));
        }
        if !beta_deg.is_finite() || beta_deg <= 0.0 || beta_deg >= 90.0 {
            return Err(Error::InvalidSpec(format!(
                "beta must lie in (0, 90) degrees, got {beta_deg}"
            )));
        }
        Ok(Self { n, beta_deg })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn beta_deg(&self) -> f64 {
        self.beta_deg
    }

    /// Flat-foldability angle `90/n` degrees.
    pub fn flat_fold_beta_deg(&self) -> f64 {
        90.0 / self.n as f64
    }

    /// True iff `90/n < beta < 45` degrees strictly.
    pub fn is_strictly_feasible(&self) -> bool {
        self.beta_deg > self.flat_fold_beta_deg() && self.beta_deg < 45.0
    }
}

/// Lengths derived from a [`ModuleSpec`], in units of `l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    /// Unfolded module height `w = tan(beta)`.
    pub w: f64,
    /// Mountain fold length `a = 1 / (2 cos(beta))`.
    pub a: f64,
    /// Circumradius of the regular boundary n-gon.
    pub r: f64,
    /// Vertex diagonal measure across the n-gon.
    pub lambda: f64,
    /// Edge diagonal measure across the n-gon. Equals `lambda` for odd `n`.
    pub lambda_prime: f64,
    /// Inner radial position of the hyperfolds, `1 / (2 tan(2 beta))`.
    pub r_in: f64,
}

/// One module state in the `(gamma, psi, d)` parameterization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateParams {
    /// Tilt angle between top and bottom planes, degrees.
    pub gamma_deg: f64,
    /// Phase angle of the tilt axis, degrees.
    pub psi_deg: f64,
    /// Slant height between ring centroids, units of `l`.
    pub d: f64,
}

impl StateParams {
    pub fn new(gamma_deg: f64, psi_deg: f64, d: f64) -> Self {
        Self { gamma_deg, psi_deg, d }
    }
}

/// 4x4 homogeneous transform acting on column vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomTransform(Matrix4<f64>);

impl HomTransform {
    pub fn identity() -> Self {
        Self(Matrix4::identity())
    }

    pub fn from_matrix(m: Matrix4<f64>) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    /// Rotation block (upper-left 3x3).
    pub fn rotation(&self) -> nalgebra::Matrix3<f64> {
        self.0.fixed_view::<3, 3>(0, 0).into_owned()
    }

    /// Translation column.
    pub fn translation(&self) -> Vector3<f64> {
        Vector3::new(self.0[(0, 3)], self.0[(1, 3)], self.0[(2, 3)])
    }

    pub fn apply_point(&self, p: &Point3<f64>) -> Point3<f64> {
        let v = self.0 * nalgebra::Vector4::new(p.x, p.y, p.z, 1.0);
        Point3::new(v.x, v.y, v.z)
    }
}

impl std::ops::Mul for HomTransform {
    type Output = HomTransform;

    fn mul(self, rhs: HomTransform) -> HomTransform {
        HomTransform(self.0 * rhs.0)
    }
}

/// Ordered boundary ring of `n` points.
#[derive(Debug, Clone, PartialEq)]
pub struct Ring {
    pub points: Vec<Point3<f64>>,
}

impl Ring {
    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn centroid(&self) -> Point3<f64> {
        let mut c = Vector3::zeros();
        for p in &self.points {
            c += p.coords;
        }
        Point3::from(c / self.points.len() as f64)
    }
}

/// Mid-plane data for one edge pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidPlaneEntry {
    /// Circumcenter of the edge-pair quadrilateral in its plane.
    pub circumcenter: Point3<f64>,
    /// Unit direction of the equidistance locus.
    pub direction: Vector3<f64>,
    /// Offset of the mid vertex from the circumcenter, `>= 0`.
    pub offset: f64,
    /// The mid vertex itself.
    pub point: Point3<f64>,
}

/// Mid-plane vertices for all `n` edge pairs of a module.
#[derive(Debug, Clone, PartialEq)]
pub struct MidPlane {
    pub entries: Vec<MidPlaneEntry>,
}

/// Options for [`mid_plane_with`].
#[derive(Debug, Clone, Copy)]
pub struct MidPlaneOptions {
    /// Normalized coplanarity residual above which construction is rejected.
    pub coplanarity_tol: f64,
    /// When true, a negative radicand (quad circumradius exceeding `a`) is
    /// clamped to a zero offset instead of erroring. Strained states such as
    /// pop-outs at off-critical `beta` need this; the deviation is surfaced by
    /// the strain report rather than by a hard failure.
    pub clamp_infeasible: bool,
}

impl Default for MidPlaneOptions {
    fn default() -> Self {
        Self { coplanarity_tol: 1e-6, clamp_infeasible: false }
    }
}

/// Populates every derived length for a spec. `r_in = 1 / (2 tan 2beta)`.
pub fn derive_params(spec: &ModuleSpec) -> DerivedParams {
    let beta = deg_to_rad(spec.beta_deg());
    let half = deg_to_rad(180.0 / spec.n() as f64);
    let w = beta.tan();
    let a = 1.0 / (2.0 * beta.cos());
    let r = 1.0 / (2.0 * half.sin());
    let (lambda, lambda_prime) = if spec.n() % 2 == 0 {
        (1.0 / half.sin(), half.cos() / half.sin())
    } else {
        let v = (1.0 + half.cos()) / (2.0 * half.sin());
        (v, v)
    };
    let r_in = 1.0 / (2.0 * (2.0 * beta).tan());
    DerivedParams { w, a, r, lambda, lambda_prime, r_in }
}

/// Regular bottom boundary n-gon with unit side length, centered at origin.
pub fn bottom_ring(n: u32) -> Result<Ring> {
    if n < 3 {
        return Err(Error::InvalidSpec(format!("ring needs n >= 3, got {n}")));
    }
    let r = 1.0 / (2.0 * deg_to_rad(180.0 / n as f64).sin());
    let points = (0..n)
        .map(|i| {
            let ang = deg_to_rad(360.0 * i as f64 / n as f64);
            Point3::new(r * ang.cos(), r * ang.sin(), 0.0)
        })
        .collect();
    Ok(Ring { points })
}

fn rot_z(psi: f64) -> Matrix4<f64> {
    let (s, c) = psi.sin_cos();
    Matrix4::new(
        c, -s, 0.0, 0.0, //
        s, c, 0.0, 0.0, //
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0,
    )
}

fn rot_x(gamma: f64) -> Matrix4<f64> {
    let (s, c) = gamma.sin_cos();
    Matrix4::new(
        1.0, 0.0, 0.0, 0.0, //
        0.0, c, -s, 0.0, //
        0.0, s, c, 0.0, //
        0.0, 0.0, 0.0, 1.0,
    )
}

fn tr_z(d: f64) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    m[(2, 3)] = d;
    m
}

/// Bottom-to-top module transform:
/// `Rot_z(psi) * Rot_x(gamma/2) * Tr_z(d) * Rot_x(gamma/2) * Rot_z(-psi)`.
///
/// The split into two half-tilts puts the mid-plane exactly between the
/// boundary rings and leaves no net twist about the z axis.
pub fn transform(state: &StateParams) -> HomTransform {
    let gamma = deg_to_rad(state.gamma_deg);
    let psi = deg_to_rad(state.psi_deg);
    let m = rot_z(psi) * rot_x(gamma / 2.0) * tr_z(state.d) * rot_x(gamma / 2.0) * rot_z(-psi);
    HomTransform(m)
}

/// Vertex-wise image of `bottom` under `t`.
pub fn top_ring(bottom: &Ring, t: &HomTransform) -> Ring {
    Ring { points: bottom.points.iter().map(|p| t.apply_point(p)).collect() }
}

/// Normalized scalar-triple-product residual of the edge pair
/// `(A, B)` on the bottom and `(Ap, Bp)` on the top. Zero means the four
/// points are coplanar.
pub fn coplanarity_residual(
    a: &Point3<f64>,
    b: &Point3<f64>,
    ap: &Point3<f64>,
    bp: &Point3<f64>,
) -> Result<f64> {
    let u = b - a;
    let v = bp - ap;
    let w = ap - a;
    let (nu, nv, nw) = (u.norm(), v.norm(), w.norm());
    if nu < 1e-12 || nv < 1e-12 {
        return Err(Error::DegenerateInput("zero-length edge in coplanarity check".into()));
    }
    if nw < 1e-12 {
        // Top edge starts at the bottom edge; trivially coplanar.
        return Ok(0.0);
    }
    Ok((w.dot(&u.cross(&v))).abs() / (nu * nv * nw))
}

fn circumcenter3(a: &Point3<f64>, b: &Point3<f64>, c: &Point3<f64>) -> Result<Point3<f64>> {
    let ab = b - a;
    let ac = c - a;
    let cr = ab.cross(&ac);
    let denom = 2.0 * cr.norm_squared();
    if denom < 1e-18 {
        return Err(Error::DegenerateInput("collinear quadrilateral vertices".into()));
    }
    let offset = (cr.cross(&(ab * ac.norm_squared() - ac * ab.norm_squared()))) / denom;
    Ok(a + offset)
}

/// Mid-plane construction with default options (strict feasibility,
/// coplanarity tolerance `1e-6`).
pub fn mid_plane(bottom: &Ring, top: &Ring, a_len: f64) -> Result<MidPlane> {
    mid_plane_with(bottom, top, a_len, &MidPlaneOptions::default())
}

/// Builds the `n` mid vertices: per edge pair, the circumcenter of the
/// quadrilateral `A_i A_{i+1} B' A'`, the unit equidistance direction, the
/// offset solving `|P - A| = a`, and the mid vertex pushed radially outward
/// from the module axis.
pub fn mid_plane_with(
    bottom: &Ring,
    top: &Ring,
    a_len: f64,
    opts: &MidPlaneOptions,
) -> Result<MidPlane> {
    let n = bottom.n();
    if n < 3 || top.n() != n {
        return Err(Error::DegenerateInput("rings must share n >= 3 vertices".into()));
    }
    let c0 = bottom.centroid();
    let c1 = top.centroid();
    let axis = {
        let d = c1 - c0;
        if d.norm() > 1e-12 { d.normalize() } else { Vector3::z() }
    };
    let radial = |p: &Point3<f64>| {
        let v = p - c0;
        (v - axis * v.dot(&axis)).norm()
    };

    let mut entries = Vec::with_capacity(n);
    for i in 0..n {
        let a = &bottom.points[i];
        let b = &bottom.points[(i + 1) % n];
        let ap = &top.points[i];
        let bp = &top.points[(i + 1) % n];

        let res = coplanarity_residual(a, b, ap, bp)?;
        if res > opts.coplanarity_tol {
            return Err(Error::GeometryInfeasible(format!(
                "edge pair {i}: coplanarity residual {res:.3e} exceeds {:.3e}",
                opts.coplanarity_tol
            )));
        }

        // Equidistance direction: cross of the two edge vectors, falling back
        // to the quad plane normal when the edges are parallel (gamma = 0).
        let u = b - a;
        let v = bp - ap;
        let cross = u.cross(&v);
        let direction = if cross.norm() > 1e-9 {
            cross.normalize()
        } else {
            let alt = u.cross(&(ap - a));
            if alt.norm() < 1e-12 {
                return Err(Error::DegenerateInput(format!(
                    "edge pair {i}: quadrilateral vertices are collinear"
                )));
            }
            alt.normalize()
        };

        // The popped vertex of a pop-out state keeps ground contact, leaving
        // Ap (or Bp) coincident with its bottom vertex; fall through to the
        // first non-degenerate triple of the quad.
        let oc = circumcenter3(a, b, ap)
            .or_else(|_| circumcenter3(a, b, bp))
            .or_else(|_| circumcenter3(a, ap, bp))?;
        let rad2 = (a - oc).norm_squared();
        let mut radicand = a_len * a_len - rad2;
        // Noise floor: the deployed rectangle has radicand exactly zero in
        // reals; cancellation leaves O(eps * a^2) here. Snap to zero so the
        // offset is exact rather than sqrt(noise).
        let floor = 64.0 * f64::EPSILON * a_len * a_len;
        if radicand.abs() < floor {
            radicand = 0.0;
        }
        if radicand < 0.0 {
            if opts.clamp_infeasible {
                radicand = 0.0;
            } else {
                return Err(Error::GeometryInfeasible(format!(
                    "edge pair {i}: a^2 = {:.6} < squared circumradius {:.6}",
                    a_len * a_len,
                    rad2
                )));
            }
        }
        let offset = radicand.sqrt();

        let p_minus = oc - direction * offset;
        let p_plus = oc + direction * offset;
        let point = if radial(&p_plus) >= radial(&p_minus) { p_plus } else { p_minus };

        entries.push(MidPlaneEntry { circumcenter: oc, direction, offset, point });
    }
    Ok(MidPlane { entries })
}
