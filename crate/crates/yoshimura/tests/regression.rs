//! Pinned search outputs on two fixed instances: a quarter-circle arc and a
//! helical target. Guards against silent behavior drift in the heuristics.
//! The rms values and label sequences were frozen from a reference run and
//! cross-checked against the exhaustive optimum.

use nalgebra::Point3;
use yoshimura::{
    refine_window, solve_beam, solve_dp, solve_exhaustive, solve_greedy, ModuleSpec,
    SearchOptions, StateLabel, TargetCurve,
};

fn quarter_circle() -> TargetCurve {
    // Radius chosen so the arc length roughly matches a 4-module boom at
    // beta = 35 degrees.
    let r = 1.78;
    let pts = (0..=8)
        .map(|k| {
            let t = std::f64::consts::FRAC_PI_2 * k as f64 / 8.0;
            Point3::new(r * t.sin(), 0.0, r * (1.0 - t.cos()))
        })
        .collect();
    TargetCurve::new(pts).unwrap()
}

fn helix() -> TargetCurve {
    let (r, c) = (0.9, 0.55);
    let pts = (0..=10)
        .map(|k| {
            let t = 2.5 * k as f64 / 10.0;
            Point3::new(r * t.sin(), r * (1.0 - t.cos()), c * t)
        })
        .collect();
    TargetCurve::new(pts).unwrap()
}

const QC_OPT_RMS: f64 = 3.48809356398553261e-1;
const QC_GREEDY_RMS: f64 = 1.06754350028315992e0;
const HX_OPT_RMS: f64 = 1.70729690255695954e-1;
const HX5_OPT_RMS: f64 = 1.63799382817633177e-1;

fn qc_opt_labels() -> Vec<StateLabel> {
    vec![
        StateLabel::PopOutTwo(1),
        StateLabel::PopOutOne(0),
        StateLabel::Deployed,
        StateLabel::PopOutTwo(2),
    ]
}

#[test]
fn quarter_circle_greedy_vs_exhaustive() {
    let sp = ModuleSpec::new(3, 35.0).unwrap();
    let opts = SearchOptions::default();
    let qc = quarter_circle();

    let e = solve_exhaustive(&sp, 4, &qc, &opts).unwrap();
    assert_eq!(e.labels, qc_opt_labels());
    assert!((e.rms - QC_OPT_RMS).abs() < 1e-12);

    let g = solve_greedy(&sp, 4, &qc, &opts).unwrap();
    assert_eq!(
        g.labels,
        vec![StateLabel::Folded, StateLabel::Folded, StateLabel::Folded, StateLabel::PopOutTwo(1)]
    );
    assert!((g.rms - QC_GREEDY_RMS).abs() < 1e-12);
    assert!(g.rms >= e.rms);
}

#[test]
fn quarter_circle_refinement_recovers_optimum() {
    let sp = ModuleSpec::new(3, 35.0).unwrap();
    let opts = SearchOptions::default();
    let qc = quarter_circle();
    let g = solve_greedy(&sp, 4, &qc, &opts).unwrap();
    let r = refine_window(&g, &sp, &qc, 2, &opts).unwrap();
    assert!(r.rms <= g.rms);
    assert_eq!(r.labels, qc_opt_labels());
    assert!((r.rms - QC_OPT_RMS).abs() < 1e-12);
}

#[test]
fn helix_beam_widths_vs_exhaustive() {
    let sp = ModuleSpec::new(3, 35.0).unwrap();
    let opts = SearchOptions::default();
    let hx = helix();
    let e = solve_exhaustive(&sp, 4, &hx, &opts).unwrap();
    assert!((e.rms - HX_OPT_RMS).abs() < 1e-12);
    for w in [1usize, 4, 16] {
        let b = solve_beam(&sp, 4, &hx, &SearchOptions { beam_width: w, ..opts.clone() }).unwrap();
        assert!(b.rms >= e.rms - 1e-15, "beam width {w}");
        // On this instance every width already lands on the optimum.
        assert!((b.rms - HX_OPT_RMS).abs() < 1e-12, "beam width {w}");
        assert_eq!(b.labels, e.labels, "beam width {w}");
    }
}

#[test]
fn helix_dp_default_grid_vs_exhaustive() {
    let sp = ModuleSpec::new(3, 35.0).unwrap();
    let opts = SearchOptions::default();
    let hx = helix();
    let e = solve_exhaustive(&sp, 5, &hx, &opts).unwrap();
    assert!((e.rms - HX5_OPT_RMS).abs() < 1e-12);
    let d = solve_dp(&sp, 5, &hx, &opts).unwrap();
    // The default 0.25 / 0.1 grid is fine enough here to reach the optimum.
    assert_eq!(d.labels, e.labels);
    assert!((d.rms - HX5_OPT_RMS).abs() < 1e-12);
    assert!(d.explored <= e.explored);
}
