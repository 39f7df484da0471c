//! `yoshimura` - command-line front end for the boom geometry library.
//!
//! Exit codes: 0 success, 2 usage or parse problems, 3 geometric
//! infeasibility, 4 resource limits.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use yoshimura::{
    backbone, boom_mesh, config_count, derive_params, export_backbone, export_fit_report,
    export_mesh, flat_fold_beta, load_design, refine_window, sig9, solve, state_catalog,
    DesignDocument, Error, ModuleSpec, SearchAlgorithm,
};

#[derive(Parser)]
#[command(name = "yoshimura", version, about = "Yoshimura origami boom toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print derived module parameters and a feasibility verdict.
    Params {
        #[arg(long)]
        n: u32,
        /// Fold angle in degrees.
        #[arg(long)]
        beta: f64,
    },
    /// List the metastable state catalog.
    States {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        beta: f64,
        /// Append the self-packed state.
        #[arg(long = "self-packed")]
        self_packed: bool,
    },
    /// Compute the backbone of a design document and write it as CSV.
    Fk {
        #[arg(long)]
        design: PathBuf,
        /// Report lengths in circumradius units instead of side-length units.
        #[arg(long)]
        normalized: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Triangulate a design document and write an OBJ mesh.
    Mesh {
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the exact number of global configurations.
    Count {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: u32,
    },
    /// Fit a design's state sequence to the target curve in the document.
    Ik {
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        algorithm: Option<AlgorithmArg>,
        #[arg(long = "beam-width")]
        beam_width: Option<usize>,
        #[arg(long = "dp-cell")]
        dp_cell: Option<f64>,
        #[arg(long = "dp-orient-step")]
        dp_orient_step: Option<f64>,
        /// Sliding-window refinement width (2-4) applied after the search.
        #[arg(long)]
        window: Option<usize>,
        /// Include the self-packed state in the search catalog.
        #[arg(long = "self-packed")]
        self_packed: bool,
        /// Worker threads; results are identical for any value.
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Exhaustive,
    Greedy,
    Beam,
    Dp,
}

impl From<AlgorithmArg> for SearchAlgorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Exhaustive => SearchAlgorithm::Exhaustive,
            AlgorithmArg::Greedy => SearchAlgorithm::Greedy,
            AlgorithmArg::Beam => SearchAlgorithm::Beam,
            AlgorithmArg::Dp => SearchAlgorithm::Dp,
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Infeasible(_)
        | Error::Domain(_)
        | Error::DegenerateInput(_)
        | Error::GeometryInfeasible(_)
        | Error::NoConvergence(_)
        | Error::NoRoot(_) => 3,
        Error::LimitExceeded { .. } | Error::MemoryLimit(_) => 4,
        Error::InvalidSpec(_) | Error::EmptyDesign(_) | Error::Parse(_) | Error::Validation { .. } => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn read_design(path: &PathBuf) -> Result<DesignDocument, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    load_design(&text)
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Params { n, beta } => cmd_params(n, beta),
        Command::States { n, beta, self_packed } => cmd_states(n, beta, self_packed),
        Command::Fk { design, normalized, out } => cmd_fk(&design, normalized, &out),
        Command::Mesh { design, out } => cmd_mesh(&design, &out),
        Command::Count { n, m } => {
            println!("{}", config_count(n, m)?);
            Ok(())
        }
        Command::Ik {
            design,
            algorithm,
            beam_width,
            dp_cell,
            dp_orient_step,
            window,
            self_packed,
            threads,
            out,
        } => cmd_ik(
            &design,
            algorithm,
            beam_width,
            dp_cell,
            dp_orient_step,
            window,
            self_packed,
            threads,
            &out,
        ),
    }
}

fn cmd_params(n: u32, beta: f64) -> Result<(), Error> {
    let ff = flat_fold_beta(n)?;
    if beta > 45.0 {
        return Err(Error::Infeasible(format!(
            "beta = {beta} deg exceeds the 45 deg bound from r_in >= 0"
        )));
    }
    if beta < ff {
        return Err(Error::Infeasible(format!(
            "beta = {beta} deg is below the flat-fold angle 90/n = {ff} deg"
        )));
    }
    let spec = ModuleSpec::new(n, beta)?;
    let p = derive_params(&spec);
    let verdict = if beta == ff {
        "flat-foldable limit (beta = 90/n)"
    } else if beta == 45.0 {
        "upper feasibility limit (beta = 45)"
    } else {
        "strictly feasible"
    };
    println!("n        {n}");
    println!("beta     {}", sig9(beta));
    println!("w        {}", sig9(p.w));
    println!("a        {}", sig9(p.a));
    println!("r        {}", sig9(p.r));
    println!("lambda   {}", sig9(p.lambda));
    println!("lambda'  {}", sig9(p.lambda_prime));
    println!("r_in     {}", sig9(p.r_in));
    println!("flat-fold beta  {}", sig9(ff));
    println!("verdict  {verdict}");
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), sig9)
}

fn cmd_states(n: u32, beta: f64, self_packed: bool) -> Result<(), Error> {
    let spec = ModuleSpec::new(n, beta)?;
    let catalog = state_catalog(&spec, self_packed)?;
    println!(
        "{:<12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "label", "gamma", "psi", "d", "theta_in", "theta_out", "zeta"
    );
    for st in catalog {
        println!(
            "{:<12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}",
            st.label.to_string(),
            sig9(st.params.gamma_deg),
            sig9(st.params.psi_deg),
            sig9(st.params.d),
            fmt_opt(st.theta_in_deg),
            fmt_opt(st.theta_out_deg),
            sig9(st.zeta_deg),
        );
    }
    Ok(())
}

fn cmd_fk(path: &PathBuf, normalized: bool, out: &Option<PathBuf>) -> Result<(), Error> {
    let doc = read_design(path)?;
    let design = doc.design()?;
    let bb = backbone(&design, normalized)?;
    write_or_print(out, &export_backbone(&bb))?;
    let tip = bb.points.last().unwrap();
    eprintln!("modules: {}", design.m());
    eprintln!("tip z: {}", sig9(tip.z));
    for (k, pair) in bb.points.windows(2).enumerate() {
        eprintln!("module {k} d: {}", sig9((pair[1] - pair[0]).norm()));
    }
    Ok(())
}

fn cmd_mesh(path: &PathBuf, out: &Option<PathBuf>) -> Result<(), Error> {
    let doc = read_design(path)?;
    let mesh = boom_mesh(&doc.design()?)?;
    write_or_print(out, &export_mesh(&mesh))
}

#[allow(clippy::too_many_arguments)]
fn cmd_ik(
    path: &PathBuf,
    algorithm: Option<AlgorithmArg>,
    beam_width: Option<usize>,
    dp_cell: Option<f64>,
    dp_orient_step: Option<f64>,
    window: Option<usize>,
    self_packed: bool,
    _threads: usize,
    out: &Option<PathBuf>,
) -> Result<(), Error> {
    let doc = read_design(path)?;
    let spec = doc.spec()?;
    let m = doc.states.len();
    let curve = doc.curve()?.ok_or_else(|| Error::Validation {
        field: "target".into(),
        message: "ik requires a target curve in the design document".into(),
    })?;
    let mut opts = doc.options.clone().unwrap_or_default();
    if let Some(a) = algorithm {
        opts.algorithm = a.into();
    }
    if let Some(w) = beam_width {
        opts.beam_width = w;
    }
    if let Some(c) = dp_cell {
        opts.dp_cell = c;
    }
    if let Some(s) = dp_orient_step {
        opts.dp_orient_step = s;
    }
    if self_packed {
        opts.include_self_packed = true;
    }
    let start = Instant::now();
    let mut fit = solve(&spec, m, &curve, &opts)?;
    if let Some(w) = window {
        fit = refine_window(&fit, &spec, &curve, w, &opts)?;
    }
    let elapsed = start.elapsed();
    write_or_print(out, &export_fit_report(&fit))?;
    eprintln!("algorithm: {}", fit.algorithm);
    eprintln!("rms: {}", sig9(fit.rms));
    eprintln!(
        "labels: {}",
        fit.labels.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")
    );
    eprintln!("explored: {}", fit.explored);
    eprintln!("wall time: {:.3} s", elapsed.as_secs_f64());
    Ok(())
}
