//! Discrete inverse kinematics: fitting the per-module state sequence so the
//! backbone tracks a target polyline, by exhaustive, greedy, beam, and
//! quantized dynamic-programming search, with sliding-window refinement.

use std::collections::BTreeMap;

use nalgebra::Point3;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fk::{backbone, Backbone, BoomDesign};
use crate::geometry::{HomTransform, ModuleSpec};
use crate::states::{state_catalog, StateLabel};

/// Target polyline in the boom's frame (base pinned at the origin), in the
/// same units as the backbone it is compared against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetCurve {
    points: Vec<Point3<f64>>,
}

impl TargetCurve {
    pub fn new(points: Vec<Point3<f64>>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidSpec(format!(
                "target curve needs at least 2 points, got {}",
                points.len()
            )));
        }
        for (i, pair) in points.windows(2).enumerate() {
            if !pair[0].coords.iter().chain(pair[1].coords.iter()).all(|v| v.is_finite()) {
                return Err(Error::Validation {
                    field: "target".into(),
                    message: format!("non-finite coordinate near point {i}"),
                });
            }
            if (pair[1] - pair[0]).norm() < 1e-12 {
                return Err(Error::Validation {
                    field: "target".into(),
                    message: format!("points {i} and {} coincide", i + 1),
                });
            }
        }
        Ok(TargetCurve { points })
    }

    pub fn points(&self) -> &[Point3<f64>] {
        &self.points
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchAlgorithm {
    Exhaustive,
    Greedy,
    Beam,
    Dp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchOptions {
    pub algorithm: SearchAlgorithm,
    pub beam_width: usize,
    /// Position quantization step for DP keys, in curve units.
    pub dp_cell: f64,
    /// Rotation-matrix entry quantization step for DP keys.
    pub dp_orient_step: f64,
    /// Maximum live keys per DP layer.
    pub dp_key_budget: usize,
    /// Sliding-window width for refinement, 2 to 4.
    pub window: usize,
    /// Maximum configurations exhaustive search will enumerate.
    pub exhaustive_limit: u64,
    pub include_self_packed: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            algorithm: SearchAlgorithm::Beam,
            beam_width: 16,
            dp_cell: 0.25,
            dp_orient_step: 0.1,
            dp_key_budget: 1 << 20,
            window: 2,
            exhaustive_limit: 10_000_000,
            include_self_packed: false,
        }
    }
}

/// Outcome of a fit: the chosen labels, the achieved RMS, the matching
/// backbone, and bookkeeping about the search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub labels: Vec<StateLabel>,
    pub rms: f64,
    pub backbone: Backbone,
    /// Algorithm name with its parameters, e.g. `beam(width=16)`.
    pub algorithm: String,
    /// Number of label sequences (or branch expansions) evaluated.
    pub explored: u64,
}

/// Closest point of the polyline to `p`: orthogonal projection onto each
/// segment clamped to its endpoints, global minimum, ties broken by the
/// lowest segment index. Returns the point, the segment index, and the
/// parameter along that segment in `[0, 1]`.
pub fn nearest_point(curve: &TargetCurve, p: &Point3<f64>) -> (Point3<f64>, usize, f64) {
    let pts = curve.points();
    let mut best = (pts[0], 0usize, 0.0f64);
    let mut best_d2 = f64::INFINITY;
    for (i, pair) in pts.windows(2).enumerate() {
        let seg = pair[1] - pair[0];
        let t = ((p - pair[0]).dot(&seg) / seg.norm_squared()).clamp(0.0, 1.0);
        let q = pair[0] + seg * t;
        let d2 = (p - q).norm_squared();
        if d2 < best_d2 {
            best_d2 = d2;
            best = (q, i, t);
        }
    }
    best
}

fn dist2(curve: &TargetCurve, p: &Point3<f64>) -> f64 {
    let (q, _, _) = nearest_point(curve, p);
    let d2 = (p - q).norm_squared();
    // Points lying on the curve pick up O(eps^2) projection noise; snap it so
    // exact ties are decided by the lexicographic rule, not rounding.
    if d2 < 1e-24 {
        0.0
    } else {
        d2
    }
}

/// RMS of the curve distances of the module points `x_1 .. x_m` (the base
/// `x_0` is pinned and excluded).
pub fn rms_error(bb: &Backbone, curve: &TargetCurve) -> Result<f64> {
    let m = bb.points.len() - 1;
    if m == 0 {
        return Err(Error::EmptyDesign("rms over zero modules is undefined".into()));
    }
    let sum: f64 = bb.points[1..].iter().map(|p| dist2(curve, p)).sum();
    Ok((sum / m as f64).sqrt())
}

struct Catalog {
    labels: Vec<StateLabel>,
    transforms: Vec<HomTransform>,
}

fn catalog_of(spec: &ModuleSpec, include_self_packed: bool) -> Result<Catalog> {
    let states = state_catalog(spec, include_self_packed)?;
    let labels: Vec<StateLabel> = states.iter().map(|s| s.label).collect();
    let transforms = states.iter().map(|s| crate::geometry::transform(&s.params)).collect();
    Ok(Catalog { labels, transforms })
}

fn finish(
    spec: &ModuleSpec,
    curve: &TargetCurve,
    labels: Vec<StateLabel>,
    algorithm: String,
    explored: u64,
) -> Result<FitResult> {
    let design = BoomDesign::new(*spec, labels.clone())?;
    let bb = backbone(&design, false)?;
    let rms = rms_error(&bb, curve)?;
    Ok(FitResult { labels, rms, backbone: bb, algorithm, explored })
}

fn check_m(m: usize) -> Result<()> {
    if m == 0 {
        Err(Error::EmptyDesign("cannot fit a boom with zero modules".into()))
    } else {
        Ok(())
    }
}

/// Global minimum of the RMS over all label sequences, ties broken by the
/// lexicographically smallest sequence in catalog order.
pub fn solve_exhaustive(
    spec: &ModuleSpec,
    m: usize,
    curve: &TargetCurve,
    opts: &SearchOptions,
) -> Result<FitResult> {
    check_m(m)?;
    let cat = catalog_of(spec, opts.include_self_packed)?;
    let total = BigUint::from(cat.labels.len()).pow(m as u32);
    if total > BigUint::from(opts.exhaustive_limit) {
        return Err(Error::LimitExceeded { count: total, limit: opts.exhaustive_limit });
    }

    let mut best_cost = f64::INFINITY;
    let mut best: Vec<usize> = Vec::new();
    let mut explored = 0u64;
    // DFS over prefixes in catalog order; the first completed sequence at a
    // given cost is the lexicographically smallest, so strict `<` suffices.
    let mut stack: Vec<(usize, f64, HomTransform)> = Vec::with_capacity(m + 1);
    let mut prefix: Vec<usize> = Vec::with_capacity(m);
    stack.push((0, 0.0, HomTransform::identity()));
    while let Some((next, cost, acc)) = stack.pop() {
        if next == cat.labels.len() {
            prefix.pop();
            continue;
        }
        stack.push((next + 1, cost, acc));
        let acc2 = acc * cat.transforms[next];
        let cost2 = cost + dist2(curve, &acc2.apply_point(&Point3::origin()));
        prefix.push(next);
        if prefix.len() == m {
            explored += 1;
            if cost2 < best_cost {
                best_cost = cost2;
                best = prefix.clone();
            }
            prefix.pop();
        } else {
            stack.push((0, cost2, acc2));
        }
    }
    let labels = best.into_iter().map(|i| cat.labels[i]).collect();
    finish(spec, curve, labels, "exhaustive".into(), explored)
}

/// Fixes one label per layer, minimizing the partial sum of squared curve
/// distances; ties keep the catalog-first label.
pub fn solve_greedy(
    spec: &ModuleSpec,
    m: usize,
    curve: &TargetCurve,
    opts: &SearchOptions,
) -> Result<FitResult> {
    check_m(m)?;
    let cat = catalog_of(spec, opts.include_self_packed)?;
    let mut acc = HomTransform::identity();
    let mut cost = 0.0;
    let mut labels = Vec::with_capacity(m);
    let mut explored = 0u64;
    for _ in 0..m {
        let mut best = usize::MAX;
        let mut best_cost = f64::INFINITY;
        let mut best_acc = acc;
        for (idx, t) in cat.transforms.iter().enumerate() {
            explored += 1;
            let acc2 = acc * *t;
            let c = cost + dist2(curve, &acc2.apply_point(&Point3::origin()));
            if c < best_cost {
                best_cost = c;
                best = idx;
                best_acc = acc2;
            }
        }
        labels.push(cat.labels[best]);
        acc = best_acc;
        cost = best_cost;
    }
    finish(spec, curve, labels, "greedy".into(), explored)
}

/// Layer-synchronous beam keeping the `beam_width` lowest partial costs;
/// ties broken by lexicographic label order.
pub fn solve_beam(
    spec: &ModuleSpec,
    m: usize,
    curve: &TargetCurve,
    opts: &SearchOptions,
) -> Result<FitResult> {
    check_m(m)?;
    if opts.beam_width == 0 {
        return Err(Error::InvalidSpec("beam_width must be >= 1".into()));
    }
    let cat = catalog_of(spec, opts.include_self_packed)?;
    let mut frontier: Vec<(f64, Vec<usize>, HomTransform)> =
        vec![(0.0, Vec::new(), HomTransform::identity())];
    let mut explored = 0u64;
    for _ in 0..m {
        let mut next = Vec::with_capacity(frontier.len() * cat.labels.len());
        for (cost, prefix, acc) in &frontier {
            for (idx, t) in cat.transforms.iter().enumerate() {
                explored += 1;
                let acc2 = *acc * *t;
                let c = cost + dist2(curve, &acc2.apply_point(&Point3::origin()));
                let mut p = prefix.clone();
                p.push(idx);
                next.push((c, p, acc2));
            }
        }
        next.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        next.truncate(opts.beam_width);
        frontier = next;
    }
    let labels = frontier[0].1.iter().map(|&i| cat.labels[i]).collect();
    finish(spec, curve, labels, format!("beam(width={})", opts.beam_width), explored)
}

type DpKey = ([i64; 3], [i64; 9]);

fn dp_key(acc: &HomTransform, cell: f64, orient: f64) -> DpKey {
    let t = acc.translation();
    let r = acc.rotation();
    let q = |v: f64, s: f64| (v / s).round() as i64;
    (
        [q(t.x, cell), q(t.y, cell), q(t.z, cell)],
        [
            q(r[(0, 0)], orient),
            q(r[(0, 1)], orient),
            q(r[(0, 2)], orient),
            q(r[(1, 0)], orient),
            q(r[(1, 1)], orient),
            q(r[(1, 2)], orient),
            q(r[(2, 0)], orient),
            q(r[(2, 1)], orient),
            q(r[(2, 2)], orient),
        ],
    )
}

/// Layer-by-layer table keyed by the quantized end frame, keeping the lowest
/// partial cost (ties: lexicographically smallest prefix) per key. With the
/// steps taken to zero this converges to the exhaustive answer.
pub fn solve_dp(
    spec: &ModuleSpec,
    m: usize,
    curve: &TargetCurve,
    opts: &SearchOptions,
) -> Result<FitResult> {
    check_m(m)?;
    if !(opts.dp_cell > 0.0) || !(opts.dp_orient_step > 0.0) {
        return Err(Error::InvalidSpec("dp_cell and dp_orient_step must be positive".into()));
    }
    let cat = catalog_of(spec, opts.include_self_packed)?;
    let mut layer: BTreeMap<DpKey, (f64, Vec<usize>, HomTransform)> = BTreeMap::new();
    layer.insert(
        dp_key(&HomTransform::identity(), opts.dp_cell, opts.dp_orient_step),
        (0.0, Vec::new(), HomTransform::identity()),
    );
    let mut explored = 0u64;
    for _ in 0..m {
        let mut next: BTreeMap<DpKey, (f64, Vec<usize>, HomTransform)> = BTreeMap::new();
        for (cost, prefix, acc) in layer.values() {
            for (idx, t) in cat.transforms.iter().enumerate() {
                explored += 1;
                let acc2 = *acc * *t;
                let c = cost + dist2(curve, &acc2.apply_point(&Point3::origin()));
                let key = dp_key(&acc2, opts.dp_cell, opts.dp_orient_step);
                let mut p = prefix.clone();
                p.push(idx);
                match next.get_mut(&key) {
                    None => {
                        next.insert(key, (c, p, acc2));
                    }
                    Some(cur) => {
                        if c < cur.0 || (c == cur.0 && p < cur.1) {
                            *cur = (c, p, acc2);
                        }
                    }
                }
            }
            if next.len() > opts.dp_key_budget {
                return Err(Error::MemoryLimit(format!(
                    "DP table exceeded {} keys; coarsen dp_cell/dp_orient_step",
                    opts.dp_key_budget
                )));
            }
        }
        layer = next;
    }
    let best = layer
        .values()
        .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)))
        .expect("non-empty DP layer");
    let labels = best.1.iter().map(|&i| cat.labels[i]).collect();
    finish(
        spec,
        curve,
        labels,
        format!("dp(cell={},orient={})", opts.dp_cell, opts.dp_orient_step),
        explored,
    )
}

/// Sliding-window polish: exhaustively re-optimizes `window` consecutive
/// labels with the rest fixed, sweeping bottom to top until a full sweep
/// yields no strict improvement. Never increases the RMS.
pub fn refine_window(
    result: &FitResult,
    spec: &ModuleSpec,
    curve: &TargetCurve,
    window: usize,
    opts: &SearchOptions,
) -> Result<FitResult> {
    if !(2..=4).contains(&window) {
        return Err(Error::InvalidSpec(format!("window must be 2..=4, got {window}")));
    }
    let m = result.labels.len();
    check_m(m)?;
    let cat = catalog_of(spec, opts.include_self_packed)?;
    let index_of = |label: &StateLabel| -> Result<usize> {
        cat.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::InvalidSpec(format!("label {label} not in search catalog")))
    };
    let mut current: Vec<usize> = result.labels.iter().map(index_of).collect::<Result<_>>()?;
    let seq_cost = |seq: &[usize]| -> f64 {
        let mut acc = HomTransform::identity();
        let mut cost = 0.0;
        for &idx in seq {
            acc = acc * cat.transforms[idx];
            cost += dist2(curve, &acc.apply_point(&Point3::origin()));
        }
        cost
    };
    let mut cost = seq_cost(&current);
    let mut explored = result.explored;
    let win = window.min(m);
    let combos = cat.labels.len().pow(win as u32);
    loop {
        let mut improved = false;
        for start in 0..=(m - win) {
            let mut best_combo: Option<(f64, Vec<usize>)> = None;
            let mut trial = current.clone();
            for c in 0..combos {
                let mut v = c;
                for k in 0..win {
                    trial[start + k] = v % cat.labels.len();
                    v /= cat.labels.len();
                }
                explored += 1;
                let tc = seq_cost(&trial);
                if tc < cost && best_combo.as_ref().is_none_or(|(bc, _)| tc < *bc) {
                    best_combo = Some((tc, trial[start..start + win].to_vec()));
                }
            }
            if let Some((bc, combo)) = best_combo {
                current[start..start + win].copy_from_slice(&combo);
                cost = bc;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    let labels = current.into_iter().map(|i| cat.labels[i]).collect();
    let algorithm = format!("{}+window({win})", result.algorithm);
    let mut out = finish(spec, curve, labels, algorithm, explored)?;
    // Guard against quantization of the incumbent: never report a worse rms.
    if out.rms > result.rms {
        out = result.clone();
    }
    Ok(out)
}

/// Dispatch on `opts.algorithm`.
pub fn solve(
    spec: &ModuleSpec,
    m: usize,
    curve: &TargetCurve,
    opts: &SearchOptions,
) -> Result<FitResult> {
    match opts.algorithm {
        SearchAlgorithm::Exhaustive => solve_exhaustive(spec, m, curve, opts),
        SearchAlgorithm::Greedy => solve_greedy(spec, m, curve, opts),
        SearchAlgorithm::Beam => solve_beam(spec, m, curve, opts),
        SearchAlgorithm::Dp => solve_dp(spec, m, curve, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(n: u32, beta: f64) -> ModuleSpec {
        ModuleSpec::new(n, beta).unwrap()
    }

    fn z_line(len: f64) -> TargetCurve {
        TargetCurve::new(vec![Point3::origin(), Point3::new(0.0, 0.0, len)]).unwrap()
    }

    fn random_curve(rng: &mut ChaCha8Rng, k: usize) -> TargetCurve {
        let mut pts = vec![Point3::origin()];
        for _ in 1..k {
            let last = *pts.last().unwrap();
            pts.push(Point3::new(
                last.x + rng.gen_range(-0.5..0.5),
                last.y + rng.gen_range(-0.5..0.5),
                last.z + rng.gen_range(0.1..0.6),
            ));
        }
        TargetCurve::new(pts).unwrap()
    }

    #[test]
    fn curve_validation() {
        assert!(TargetCurve::new(vec![Point3::origin()]).is_err());
        assert!(TargetCurve::new(vec![Point3::origin(), Point3::origin()]).is_err());
        assert!(TargetCurve::new(vec![Point3::origin(), Point3::new(f64::NAN, 0.0, 0.0)]).is_err());
    }

    #[test]
    fn nearest_point_projection() {
        let c = z_line(10.0);
        let (q, seg, _) = nearest_point(&c, &Point3::new(1.0, 0.0, 3.0));
        assert_abs_diff_eq!((q - Point3::new(0.0, 0.0, 3.0)).norm(), 0.0, epsilon = 1e-15);
        assert_eq!(seg, 0);
    }

    #[test]
    fn nearest_point_vertex_and_tiebreak() {
        let c = TargetCurve::new(vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(1.0, 1.0, 0.0),
        ])
        .unwrap();
        let (q, _, _) = nearest_point(&c, &Point3::new(1.0, 0.0, 0.0));
        assert_eq!(q, Point3::new(1.0, 0.0, 0.0));
        // Equidistant from both segments: the corner, reported on segment 0.
        let (_, seg, t) = nearest_point(&c, &Point3::new(1.5, -0.5, 0.0));
        assert_eq!(seg, 0);
        assert_abs_diff_eq!(t, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rms_single_point_distance() {
        let bb = Backbone {
            points: vec![Point3::origin(), Point3::new(0.3, 0.0, 5.0)],
            normalized: false,
        };
        assert_abs_diff_eq!(rms_error(&bb, &z_line(10.0)).unwrap(), 0.3, epsilon = 1e-15);
        let empty = Backbone { points: vec![Point3::origin()], normalized: false };
        assert!(rms_error(&empty, &z_line(10.0)).is_err());
    }

    #[test]
    fn rms_matches_independent_oracle() {
        // Plain per-segment projection written without nearest_point.
        fn oracle_rms(bb: &Backbone, pts: &[Point3<f64>]) -> f64 {
            let mut sum = 0.0;
            for p in &bb.points[1..] {
                let mut best = f64::INFINITY;
                for w in pts.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    let ab = b - a;
                    let mut t = (p - a).dot(&ab) / ab.dot(&ab);
                    if t < 0.0 {
                        t = 0.0;
                    }
                    if t > 1.0 {
                        t = 1.0;
                    }
                    let q = Point3::from(a.coords + ab * t);
                    best = best.min((p - q).norm_squared());
                }
                sum += best;
            }
            (sum / (bb.points.len() - 1) as f64).sqrt()
        }
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sp = spec(4, 30.0);
        let catalog = state_catalog(&sp, true).unwrap();
        for _ in 0..100 {
            let curve = random_curve(&mut rng, 5);
            let labels: Vec<StateLabel> =
                (0..3).map(|_| catalog[rng.gen_range(0..catalog.len())].label).collect();
            let bb = backbone(&BoomDesign::new(sp, labels).unwrap(), false).unwrap();
            let got = rms_error(&bb, &curve).unwrap();
            assert_abs_diff_eq!(got, oracle_rms(&bb, curve.points()), epsilon = 1e-12);
        }
    }

    #[test]
    fn exhaustive_z_line_all_deployed() {
        let sp = spec(4, 30.0);
        let opts = SearchOptions::default();
        let fit = solve_exhaustive(&sp, 3, &z_line(5.0), &opts).unwrap();
        assert_eq!(fit.labels, vec![StateLabel::Deployed; 3]);
        assert!(fit.rms < 1e-12);
        assert_eq!(fit.explored, 1000);
    }

    #[test]
    fn straight_line_recovered_by_every_algorithm() {
        let sp = spec(4, 30.0);
        let curve = z_line(4.0);
        let opts = SearchOptions::default();
        for fit in [
            solve_exhaustive(&sp, 3, &curve, &opts).unwrap(),
            solve_greedy(&sp, 3, &curve, &opts).unwrap(),
            solve_beam(&sp, 3, &curve, &opts).unwrap(),
            solve_dp(&sp, 3, &curve, &opts).unwrap(),
        ] {
            assert_eq!(fit.labels, vec![StateLabel::Deployed; 3]);
            assert!(fit.rms < 1e-12, "{}", fit.algorithm);
        }
    }

    #[test]
    fn exhaustive_matches_bruteforce_enumerator() {
        // Independent enumerator: odometer over label indices, full backbone
        // rebuilt per sequence, no shared search code.
        let sp = spec(3, 35.0);
        let opts = SearchOptions::default();
        let catalog = state_catalog(&sp, false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..5 {
            let curve = random_curve(&mut rng, 4);
            let fit = solve_exhaustive(&sp, 3, &curve, &opts).unwrap();
            let mut best: Option<(f64, Vec<StateLabel>)> = None;
            let cs = catalog.len();
            for code in 0..cs.pow(3) {
                let labels: Vec<StateLabel> =
                    vec![catalog[code / (cs * cs)].label, catalog[code / cs % cs].label, catalog[code % cs].label];
                let bb = backbone(&BoomDesign::new(sp, labels.clone()).unwrap(), false).unwrap();
                let mut cost = 0.0;
                for p in &bb.points[1..] {
                    cost += dist2(&curve, p);
                }
                let rms = (cost / 3.0).sqrt();
                let better = match &best {
                    None => true,
                    Some((br, bl)) => rms < *br || (rms == *br && labels < *bl),
                };
                if better {
                    best = Some((rms, labels));
                }
            }
            let (orms, olabels) = best.unwrap();
            assert_eq!(fit.labels, olabels);
            assert_eq!(fit.rms.to_bits(), orms.to_bits());
        }
    }

    #[test]
    fn beam_width_one_is_greedy() {
        let sp = spec(3, 35.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let curve = random_curve(&mut rng, 4);
            let g = solve_greedy(&sp, 4, &curve, &SearchOptions::default()).unwrap();
            let b = solve_beam(
                &sp,
                4,
                &curve,
                &SearchOptions { beam_width: 1, ..SearchOptions::default() },
            )
            .unwrap();
            assert_eq!(g.labels, b.labels);
            assert_eq!(g.rms.to_bits(), b.rms.to_bits());
        }
    }

    #[test]
    fn wide_beam_is_exhaustive() {
        let sp = spec(3, 35.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..3 {
            let curve = random_curve(&mut rng, 4);
            let e = solve_exhaustive(&sp, 3, &curve, &SearchOptions::default()).unwrap();
            let b = solve_beam(
                &sp,
                3,
                &curve,
                &SearchOptions { beam_width: 512, ..SearchOptions::default() },
            )
            .unwrap();
            assert_eq!(e.labels, b.labels);
            assert_eq!(e.rms.to_bits(), b.rms.to_bits());
        }
    }

    #[test]
    fn greedy_never_beats_exhaustive() {
        let sp = spec(3, 35.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let curve = random_curve(&mut rng, 4);
            let e = solve_exhaustive(&sp, 3, &curve, &SearchOptions::default()).unwrap();
            let g = solve_greedy(&sp, 3, &curve, &SearchOptions::default()).unwrap();
            assert!(g.rms >= e.rms - 1e-15);
        }
    }

    #[test]
    fn dp_fine_grid_matches_exhaustive() {
        let sp = spec(3, 35.0);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..3 {
            let curve = random_curve(&mut rng, 4);
            let e = solve_exhaustive(&sp, 3, &curve, &SearchOptions::default()).unwrap();
            let d = solve_dp(
                &sp,
                3,
                &curve,
                &SearchOptions { dp_cell: 1e-9, dp_orient_step: 1e-9, ..SearchOptions::default() },
            )
            .unwrap();
            assert_eq!(e.labels, d.labels);
            assert_eq!(e.rms.to_bits(), d.rms.to_bits());
        }
    }

    #[test]
    fn dp_coarse_grid_runs_and_bounds() {
        let sp = spec(3, 35.0);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let curve = random_curve(&mut rng, 5);
        let e = solve_exhaustive(&sp, 5, &curve, &SearchOptions::default()).unwrap();
        let d = solve_dp(&sp, 5, &curve, &SearchOptions::default()).unwrap();
        assert!(d.rms >= e.rms - 1e-15);
        // One giant cell degenerates to a single survivor per layer.
        let huge = solve_dp(
            &sp,
            5,
            &curve,
            &SearchOptions { dp_cell: 1e6, dp_orient_step: 1e6, ..SearchOptions::default() },
        )
        .unwrap();
        assert!(huge.rms >= e.rms - 1e-15);
    }

    #[test]
    fn dp_key_budget_errors() {
        let sp = spec(4, 30.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let curve = random_curve(&mut rng, 4);
        let res = solve_dp(
            &sp,
            6,
            &curve,
            &SearchOptions { dp_cell: 1e-9, dp_orient_step: 1e-9, dp_key_budget: 100, ..SearchOptions::default() },
        );
        assert!(matches!(res, Err(Error::MemoryLimit(_))));
    }

    #[test]
    fn exhaustive_limit_exceeded_reports_count() {
        let sp = spec(4, 30.0);
        let res = solve_exhaustive(&sp, 10, &z_line(6.0), &SearchOptions::default());
        match res {
            Err(Error::LimitExceeded { count, limit }) => {
                assert_eq!(count, BigUint::from(10_000_000_000u64));
                assert_eq!(limit, 10_000_000);
            }
            other => panic!("expected LimitExceeded, got {other:?}"),
        }
    }

    #[test]
    fn refine_window_never_worse_and_fixes_greedy() {
        let sp = spec(3, 35.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let opts = SearchOptions::default();
        for _ in 0..5 {
            let curve = random_curve(&mut rng, 4);
            let g = solve_greedy(&sp, 4, &curve, &opts).unwrap();
            let r = refine_window(&g, &sp, &curve, 2, &opts).unwrap();
            assert!(r.rms <= g.rms + 1e-15);
            let e = solve_exhaustive(&sp, 4, &curve, &opts).unwrap();
            assert!(r.rms >= e.rms - 1e-15);
        }
    }

    #[test]
    fn refine_leaves_global_optimum_alone() {
        let sp = spec(3, 35.0);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let curve = random_curve(&mut rng, 4);
        let opts = SearchOptions::default();
        let e = solve_exhaustive(&sp, 3, &curve, &opts).unwrap();
        let r = refine_window(&e, &sp, &curve, 3, &opts).unwrap();
        assert_eq!(e.labels, r.labels);
        assert_eq!(e.rms.to_bits(), r.rms.to_bits());
    }

    #[test]
    fn refine_window_covering_everything_is_exhaustive() {
        let sp = spec(3, 35.0);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let curve = random_curve(&mut rng, 4);
        let opts = SearchOptions::default();
        let g = solve_greedy(&sp, 3, &curve, &opts).unwrap();
        let r = refine_window(&g, &sp, &curve, 3, &opts).unwrap();
        let e = solve_exhaustive(&sp, 3, &curve, &opts).unwrap();
        assert_abs_diff_eq!(r.rms, e.rms, epsilon = 1e-12);
    }

    #[test]
    fn determinism_repeated_runs() {
        let sp = spec(4, 30.0);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let curve = random_curve(&mut rng, 5);
        let opts = SearchOptions::default();
        let a = solve_beam(&sp, 4, &curve, &opts).unwrap();
        let b = solve_beam(&sp, 4, &curve, &opts).unwrap();
        assert_eq!(a, b);
    }
}
