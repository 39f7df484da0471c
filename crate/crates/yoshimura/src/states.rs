//! Metastable state catalog of a single module: the symmetric deployed,
//! folded, and self-packed (hyperfold) states, the 2n asymmetric pop-out
//! states, and the critical-angle root-finding problems behind them.

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{deg_to_rad, derive_params, rad_to_deg, ModuleSpec, StateParams};

/// Label of one metastable state. The derived ordering matches the
/// deterministic catalog order and is used for search tie-breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StateLabel {
    Deployed,
    Folded,
    /// One-facet pop-out at edge index `i`, `theta_in = 0`.
    PopOutOne(u32),
    /// Two-facet pop-out at vertex index `i`, `theta_out = 0`.
    PopOutTwo(u32),
    SelfPacked,
}

impl StateLabel {
    pub fn is_valid_for(&self, n: u32) -> bool {
        match self {
            StateLabel::PopOutOne(i) | StateLabel::PopOutTwo(i) => *i < n,
            _ => true,
        }
    }
}

impl std::fmt::Display for StateLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StateLabel::Deployed => write!(f, "deployed"),
            StateLabel::Folded => write!(f, "folded"),
            StateLabel::SelfPacked => write!(f, "self_packed"),
            StateLabel::PopOutOne(i) => write!(f, "popout1:{i}"),
            StateLabel::PopOutTwo(i) => write!(f, "popout2:{i}"),
        }
    }
}

impl std::str::FromStr for StateLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deployed" => Ok(StateLabel::Deployed),
            "folded" => Ok(StateLabel::Folded),
            "self_packed" => Ok(StateLabel::SelfPacked),
            _ => {
                let parse_idx = |rest: &str| {
                    rest.parse::<u32>().map_err(|_| Error::Parse(format!("bad state label `{s}`")))
                };
                if let Some(rest) = s.strip_prefix("popout1:") {
                    Ok(StateLabel::PopOutOne(parse_idx(rest)?))
                } else if let Some(rest) = s.strip_prefix("popout2:") {
                    Ok(StateLabel::PopOutTwo(parse_idx(rest)?))
                } else {
                    Err(Error::Parse(format!("unknown state label `{s}`")))
                }
            }
        }
    }
}

/// A fully solved metastable state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetastableState {
    pub label: StateLabel,
    pub params: StateParams,
    /// Inner dihedral angle, degrees. `None` where the state leaves it free.
    pub theta_in_deg: Option<f64>,
    /// Outer dihedral angle, degrees.
    pub theta_out_deg: Option<f64>,
    /// Hyperfold angle, degrees; zero except for the self-packed state.
    pub zeta_deg: f64,
}

/// Which critical-angle system was solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PopOutKind {
    In,
    Out,
}

/// Solution of a critical fold angle system.
#[derive(Debug, Clone, PartialEq)]
pub struct PopOutSolution {
    pub kind: PopOutKind,
    /// Critical fold angle `beta_in` or `beta_out`, degrees.
    pub beta_crit_deg: f64,
    /// Tilt angle at criticality, degrees.
    pub gamma_deg: f64,
    /// Mid-plane edge angle `eta`, degrees; `In` kind only.
    pub eta_deg: Option<f64>,
    /// Final max deviation of the length constraints from `a`.
    pub residual: f64,
    /// Critical points used by the constraints: O, P, Q (and R for `In`).
    pub witness_points: Vec<Point3<f64>>,
}

/// Flat-foldability angle `90/n` degrees.
pub fn flat_fold_beta(n: u32) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidSpec(format!("n must be >= 3, got {n}")));
    }
    Ok(90.0 / n as f64)
}

/// Deployed state: pure translation by `w = tan(beta)`.
pub fn deployed_state(spec: &ModuleSpec) -> MetastableState {
    let w = deg_to_rad(spec.beta_deg()).tan();
    MetastableState {
        label: StateLabel::Deployed,
        params: StateParams::new(0.0, 0.0, w),
        theta_in_deg: Some(180.0),
        theta_out_deg: Some(180.0),
        zeta_deg: 0.0,
    }
}

/// Folded state: `theta = 2 acos(tan(90/n) / tan(beta))`, `d = w sin(theta/2)`.
pub fn folded_state(spec: &ModuleSpec) -> Result<MetastableState> {
    let w = deg_to_rad(spec.beta_deg()).tan();
    let ratio = deg_to_rad(spec.flat_fold_beta_deg()).tan() / w;
    if ratio > 1.0 + 1e-12 {
        return Err(Error::Infeasible(format!(
            "beta = {} deg is below the flat-fold angle {} deg",
            spec.beta_deg(),
            spec.flat_fold_beta_deg()
        )));
    }
    let theta = 2.0 * ratio.min(1.0).acos();
    let d = w * (theta / 2.0).sin();
    let theta_deg = rad_to_deg(theta);
    Ok(MetastableState {
        label: StateLabel::Folded,
        params: StateParams::new(0.0, 0.0, d),
        theta_in_deg: Some(theta_deg),
        theta_out_deg: Some(theta_deg),
        zeta_deg: 0.0,
    })
}

/// Self-packed hyperfold state: `d = 0`, `theta = 0`,
/// `zeta = acos((2 sin^2(90/n) - sin^2 beta) / sin^2 beta)`.
pub fn self_packed_state(spec: &ModuleSpec) -> Result<MetastableState> {
    let ff = spec.flat_fold_beta_deg();
    if spec.beta_deg() < ff - 1e-12 || spec.beta_deg() > 45.0 + 1e-12 {
        return Err(Error::Infeasible(format!(
            "self-packed state needs beta in [{}..45] deg, got {}",
            ff,
            spec.beta_deg()
        )));
    }
    let s2 = deg_to_rad(spec.beta_deg()).sin().powi(2);
    let arg = (2.0 * deg_to_rad(ff).sin().powi(2) - s2) / s2;
    if arg.abs() > 1.0 + 1e-12 {
        return Err(Error::Domain(format!("hyperfold cosine {arg} outside [-1, 1]")));
    }
    let zeta = rad_to_deg(arg.clamp(-1.0, 1.0).acos());
    Ok(MetastableState {
        label: StateLabel::SelfPacked,
        params: StateParams::new(0.0, 0.0, 0.0),
        theta_in_deg: Some(0.0),
        theta_out_deg: Some(0.0),
        zeta_deg: zeta,
    })
}

/// One-facet pop-out at edge `i`: `gamma = 2 asin(w / (2 lambda'))`,
/// `d = sin(gamma/2) / tan(beta)`, `psi = 360 i / n + 180 / n`.
pub fn one_popout_state(spec: &ModuleSpec, i: u32) -> Result<MetastableState> {
    if i >= spec.n() {
        return Err(Error::InvalidSpec(format!("pop-out index {i} out of range for n={}", spec.n())));
    }
    let p = derive_params(spec);
    let s = p.w / (2.0 * p.lambda_prime);
    if s > 1.0 + 1e-12 {
        return Err(Error::Infeasible(format!(
            "one pop-out needs tan(beta)/(2 lambda') <= 1, got {s}"
        )));
    }
    let gamma = 2.0 * s.min(1.0).asin();
    let d = (gamma / 2.0).sin() / deg_to_rad(spec.beta_deg()).tan();
    let n = spec.n() as f64;
    let psi = 360.0 * i as f64 / n + 180.0 / n;
    Ok(MetastableState {
        label: StateLabel::PopOutOne(i),
        params: StateParams::new(rad_to_deg(gamma), psi, d),
        theta_in_deg: Some(0.0),
        theta_out_deg: None,
        zeta_deg: 0.0,
    })
}

/// Two-facet pop-out at vertex `i`: `gamma = 2 asin(w / (2 lambda))`,
/// `d = sin(gamma/2) / sin(180/n)`, `psi = 360 i / n`.
pub fn two_popout_state(spec: &ModuleSpec, i: u32) -> Result<MetastableState> {
    if i >= spec.n() {
        return Err(Error::InvalidSpec(format!("pop-out index {i} out of range for n={}", spec.n())));
    }
    let p = derive_params(spec);
    let s = p.w / (2.0 * p.lambda);
    if s > 1.0 + 1e-12 {
        return Err(Error::Infeasible(format!("two pop-out needs tan(beta)/(2 lambda) <= 1, got {s}")));
    }
    let gamma = 2.0 * s.min(1.0).asin();
    let d = (gamma / 2.0).sin() / deg_to_rad(180.0 / spec.n() as f64).sin();
    let psi = 360.0 * i as f64 / spec.n() as f64;
    Ok(MetastableState {
        label: StateLabel::PopOutTwo(i),
        params: StateParams::new(rad_to_deg(gamma), psi, d),
        theta_in_deg: None,
        theta_out_deg: Some(0.0),
        zeta_deg: 0.0,
    })
}

/// Resolves any label to its fully solved state.
pub fn resolve_state(spec: &ModuleSpec, label: StateLabel) -> Result<MetastableState> {
    match label {
        StateLabel::Deployed => Ok(deployed_state(spec)),
        StateLabel::Folded => folded_state(spec),
        StateLabel::SelfPacked => self_packed_state(spec),
        StateLabel::PopOutOne(i) => one_popout_state(spec, i),
        StateLabel::PopOutTwo(i) => two_popout_state(spec, i),
    }
}

/// The `2(n+1)` accessible states in deterministic order: deployed, folded,
/// the `n` one-facet pop-outs, the `n` two-facet pop-outs. The self-packed
/// state is appended only on request; it does not change the boom's shape.
pub fn state_catalog(spec: &ModuleSpec, include_self_packed: bool) -> Result<Vec<MetastableState>> {
    if !spec.is_strictly_feasible() {
        return Err(Error::Infeasible(format!(
            "catalog needs {} < beta < 45 deg strictly, got {}",
            spec.flat_fold_beta_deg(),
            spec.beta_deg()
        )));
    }
    let mut out = Vec::with_capacity(2 * (spec.n() as usize + 1) + 1);
    out.push(deployed_state(spec));
    out.push(folded_state(spec)?);
    for i in 0..spec.n() {
        out.push(one_popout_state(spec, i)?);
    }
    for i in 0..spec.n() {
        out.push(two_popout_state(spec, i)?);
    }
    if include_self_packed {
        out.push(self_packed_state(spec)?);
    }
    Ok(out)
}

const RESIDUAL_TARGET: f64 = 1e-10;
const DEFAULT_ITERATIONS: usize = 200;

fn in_system(n: u32, beta_deg: f64, eta_deg: f64) -> Option<(f64, f64, [Point3<f64>; 4], f64)> {
    let beta = deg_to_rad(beta_deg);
    let w = beta.tan();
    let lambda_prime = {
        let half = deg_to_rad(180.0 / n as f64);
        if n % 2 == 0 {
            half.cos() / half.sin()
        } else {
            (1.0 + half.cos()) / (2.0 * half.sin())
        }
    };
    let s = w / (2.0 * lambda_prime);
    if !(0.0..=1.0).contains(&s) {
        return None;
    }
    let half_gamma = s.asin();
    let a = 1.0 / (2.0 * beta.cos());
    let eta2 = deg_to_rad(eta_deg) / 2.0;
    let full = deg_to_rad(360.0 / n as f64);
    let o = Point3::new(0.0, 0.0, 0.0);
    let p = Point3::new(0.5, w / 2.0, 0.0);
    let q = Point3::new(eta2.sin(), eta2.cos(), 0.0);
    let r = Point3::new(
        0.5 + full.cos(),
        full.sin() * half_gamma.cos() + w / 2.0,
        full.sin() * half_gamma.sin(),
    );
    let f1 = (p - q).norm() - a;
    let f2 = (q - r).norm() - a;
    Some((f1, f2, [o, p, q, r], rad_to_deg(2.0 * half_gamma)))
}

/// Solves the one-pop-out critical-angle system: `sin(gamma/2) = w/(2 lambda')`
/// together with `|P - Q| = |Q - R| = a`, for `(beta_in, eta)`.
///
/// The two-unknown system has two roots in the feasible strip for n >= 4; the
/// lower-beta root continues the unique n = 3 solution and approaches the
/// flat-fold angle, so that branch is returned.
pub fn solve_beta_in(n: u32) -> Result<PopOutSolution> {
    if n < 3 {
        return Err(Error::InvalidSpec(format!("n must be >= 3, got {n}")));
    }
    let lo = 90.0 / n as f64;
    let hi = 45.0;

    // 0.1-degree grid scan for Newton seeds, kept in scan order.
    let mut seeds: Vec<(f64, f64, f64)> = Vec::new();
    let nb = ((hi - lo) / 0.1) as usize;
    for kb in 1..nb {
        let beta = lo + (hi - lo) * kb as f64 / nb as f64;
        for ke in 1..1800 {
            let eta = 180.0 * ke as f64 / 1800.0;
            if let Some((f1, f2, _, _)) = in_system(n, beta, eta) {
                let norm = f1.hypot(f2);
                if norm < 5e-3 {
                    seeds.push((norm, beta, eta));
                }
            }
        }
    }
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0));
    seeds.truncate(64);

    let mut roots: Vec<(f64, f64, f64)> = Vec::new();
    for &(_, b0, e0) in &seeds {
        if let Some((beta, eta, res)) = newton2(n, b0, e0) {
            let inside = beta > lo && beta < hi && eta > 0.0 && eta < 180.0;
            if res < RESIDUAL_TARGET && inside {
                if !roots.iter().any(|r| (r.0 - beta).abs() < 1e-6) {
                    roots.push((beta, eta, res));
                }
            }
        }
    }
    if roots.is_empty() {
        return Err(Error::NoConvergence(format!(
            "one-pop-out system for n={n} did not reach residual {RESIDUAL_TARGET}"
        )));
    }
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (beta, eta, residual) = roots[0];
    let (_, _, pts, gamma) = in_system(n, beta, eta).unwrap();
    Ok(PopOutSolution {
        kind: PopOutKind::In,
        beta_crit_deg: beta,
        gamma_deg: gamma,
        eta_deg: Some(eta),
        residual,
        witness_points: pts.to_vec(),
    })
}

fn newton2(n: u32, mut beta: f64, mut eta: f64) -> Option<(f64, f64, f64)> {
    let h = 1e-7;
    for _ in 0..DEFAULT_ITERATIONS {
        let (f1, f2, _, _) = in_system(n, beta, eta)?;
        let (g1, g2, _, _) = in_system(n, beta + h, eta)?;
        let (h1, h2, _, _) = in_system(n, beta, eta + h)?;
        let (j11, j12) = ((g1 - f1) / h, (h1 - f1) / h);
        let (j21, j22) = ((g2 - f2) / h, (h2 - f2) / h);
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-18 {
            return None;
        }
        let db = (-f1 * j22 + f2 * j12) / det;
        let de = (-f2 * j11 + f1 * j21) / det;
        // Damped step: halve until the residual norm drops.
        let base = f1.hypot(f2);
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let (nb, ne) = (beta + scale * db, eta + scale * de);
            if let Some((t1, t2, _, _)) = in_system(n, nb, ne) {
                if t1.hypot(t2) < base {
                    beta = nb;
                    eta = ne;
                    accepted = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
        if base < 1e-13 {
            break;
        }
    }
    let (f1, f2, _, _) = in_system(n, beta, eta)?;
    Some((beta, eta, f1.abs().max(f2.abs())))
}

fn out_constraint(n: u32, beta_deg: f64) -> Option<(f64, [Point3<f64>; 3], f64)> {
    let beta = deg_to_rad(beta_deg);
    let w = beta.tan();
    let half = deg_to_rad(180.0 / n as f64);
    let lambda = if n % 2 == 0 {
        1.0 / half.sin()
    } else {
        (1.0 + half.cos()) / (2.0 * half.sin())
    };
    let s = w / (2.0 * lambda);
    if !(0.0..=1.0).contains(&s) {
        return None;
    }
    let half_gamma = s.asin();
    let a = 1.0 / (2.0 * beta.cos());
    let o = Point3::new(0.0, 0.0, 0.0);
    let p = Point3::new(0.5, w / 2.0, 0.0);
    let q = Point3::new(half.cos(), half.sin() * half_gamma.cos(), half.sin() * half_gamma.sin());
    Some(((p - q).norm() - a, [o, p, q], rad_to_deg(2.0 * half_gamma)))
}

/// Solves the two-pop-out scalar equation `|P - Q| = a` (gamma eliminated via
/// the rise constraint) for `beta_out` by bracketed bisection.
pub fn solve_beta_out(n: u32) -> Result<PopOutSolution> {
    if n < 3 {
        return Err(Error::InvalidSpec(format!("n must be >= 3, got {n}")));
    }
    let lo = 90.0 / n as f64 + 1e-9;
    let hi = 45.0 - 1e-9;
    let f = |beta: f64| out_constraint(n, beta).map(|(v, _, _)| v);

    // Bracket by scanning for a sign change.
    let steps = 4000;
    let mut bracket = None;
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..=steps {
        let beta = lo + (hi - lo) * k as f64 / steps as f64;
        if let Some(v) = f(beta) {
            if let Some((pb, pv)) = prev {
                if pv * v <= 0.0 {
                    bracket = Some((pb, beta));
                    break;
                }
            }
            prev = Some((beta, v));
        }
    }
    let (mut a_lo, mut a_hi) = bracket.ok_or_else(|| {
        Error::NoRoot(format!("|P - Q| - a does not change sign on (90/{n}, 45) deg"))
    })?;
    let mut f_lo = f(a_lo).unwrap();
    for _ in 0..DEFAULT_ITERATIONS {
        let mid = 0.5 * (a_lo + a_hi);
        let fm = f(mid).unwrap();
        if f_lo * fm <= 0.0 {
            a_hi = mid;
        } else {
            a_lo = mid;
            f_lo = fm;
        }
        if a_hi - a_lo < 1e-13 {
            break;
        }
    }
    let beta = 0.5 * (a_lo + a_hi);
    let (residual, pts, gamma) = out_constraint(n, beta).unwrap();
    let residual = residual.abs();
    if residual > RESIDUAL_TARGET {
        return Err(Error::NoConvergence(format!(
            "two-pop-out bisection for n={n} stalled at residual {residual:.3e}"
        )));
    }
    Ok(PopOutSolution {
        kind: PopOutKind::Out,
        beta_crit_deg: beta,
        gamma_deg: gamma,
        eta_deg: None,
        residual,
        witness_points: pts.to_vec(),
    })
}

/// Warns when a catalog's design `beta` sits more than one degree away from a
/// pop-out critical angle; the pop-out closed forms are strain-free only near
/// criticality.
pub fn critical_angle_warning(spec: &ModuleSpec) -> Result<Option<String>> {
    let bin = solve_beta_in(spec.n())?;
    let bout = solve_beta_out(spec.n())?;
    let din = (spec.beta_deg() - bin.beta_crit_deg).abs();
    let dout = (spec.beta_deg() - bout.beta_crit_deg).abs();
    if din > 1.0 && dout > 1.0 {
        Ok(Some(format!(
            "beta = {} deg is {:.2} deg from beta_in and {:.2} deg from beta_out; \
             pop-out states carry geometric strain",
            spec.beta_deg(),
            din,
            dout
        )))
    } else {
        Ok(None)
    }
}
