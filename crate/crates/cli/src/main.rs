//! `symporder`: command-line front end for the symporder library.
//!
//! Every subcommand reads its inputs from JSON files (formats in [`io`]),
//! writes one JSON document to stdout or `--out`, and reports timings on
//! stderr only, so identical inputs and seed give byte-identical output.
//!
//! Exit codes: 0 success, 1 invalid input or domain error, 2 numerical
//! failure (including a failed `verify` criterion).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use symporder::acceptance::{self, Suite};
use symporder::maslov::{
    empirical_defect_constant, homogenize, maslov_via_trace, positive_path_to,
    quasimorphism_defect_sample, redistribute_eigenvalues,
};
use symporder::matrix_core::{self, max_abs, max_abs_c};
use symporder::order_metric::{
    gamma_closed_symplectic, gamma_closed_unitary, growth_estimate, pseudo_distance_k,
    z_coordinate, Interval,
};
use symporder::path_calculus::{classify_cone, extract_hamiltonian, order_leq, DEFAULT_SAMPLES};
use symporder::prequantization::{
    calabi_weinstein, embed_into_z, gamma_n_quant_bruteforce, gamma_quant, hofer_norms, k_quant,
    rotation_curve_distance, QuantElement,
};
use symporder::{maslov_index, SampledPath, MASLOV_CONVENTION};

mod io;

/// Number of random pairs behind the empirical defect constant.
const DEFECT_PAIRS: usize = 20;

/// Minimum grid for the trace-formula cross-check.
const TRACE_SAMPLES: usize = 2049;

#[derive(Parser, Debug)]
#[command(
    name = "symporder",
    version,
    about = "Maslov index, cone orders and growth metrics on Sp(2n) and quantomorphisms",
    allow_negative_numbers = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Tolerance for cone classification.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,

    /// Resample input paths (or size synthesized paths) to this many samples.
    #[arg(long, global = true)]
    grid: Option<usize>,

    /// Largest power used for homogenized indices.
    #[arg(long, global = true, default_value_t = 8)]
    kmax: u32,

    /// Largest n for brute-force growth sequences.
    #[arg(long, global = true, default_value_t = 16)]
    nmax: u64,

    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,

    /// Write the result document here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Emit a CSV series instead of JSON (maslov, gamma).
    #[arg(long, global = true)]
    csv: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Maslov index of a sampled path.
    Maslov {
        #[arg(long)]
        path: PathBuf,
    },
    /// Cone membership of a path.
    Cone {
        #[arg(long)]
        path: PathBuf,
    },
    /// Whether `lower <= upper` in the cone order.
    Order {
        #[arg(long)]
        lower: PathBuf,
        #[arg(long)]
        upper: PathBuf,
    },
    /// Positive path from the identity to a positive definite symplectic matrix.
    SynthPositive {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Redistribute the eigenvalues of a Hermitian matrix to a target trace.
    Redistribute {
        #[arg(long)]
        hermitian: PathBuf,
        #[arg(long)]
        target: f64,
    },
    /// Relative growth gamma(X, Y): brute force and closed form.
    Gamma {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        /// Powers of X searched: |p| <= pfactor * n.
        #[arg(long, default_value_t = 4.0)]
        pfactor: f64,
    },
    /// Pseudo-distance K(X, Y).
    Kdist {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
    },
    /// Coordinate of a dominant in the metric space Z.
    Zcoord {
        #[arg(long)]
        path: PathBuf,
    },
    /// Sampled quasimorphism defect of the Maslov index.
    DefectSample {
        #[arg(long, default_value_t = DEFECT_PAIRS)]
        pairs: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    /// gamma(e^{is} f, e^{it} g) for leaf functions.
    QuantGamma {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        t: f64,
    },
    /// K(e^{is} f, e^{it} g) for leaf functions.
    QuantK {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        t: f64,
    },
    /// Distance from e^{is} f to the rotation curve.
    RotDistance {
        #[arg(long)]
        s: f64,
        #[arg(long)]
        func: PathBuf,
    },
    /// Isometric image of a normalized leaf function in Z.
    Embed {
        #[arg(long)]
        func: PathBuf,
    },
    /// Calabi-Weinstein invariant of a time-sampled family.
    Cw {
        #[arg(long)]
        family: PathBuf,
    },
    /// Run the acceptance suite.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SuiteArg {
    Linear,
    Quant,
    All,
}

#[derive(Debug)]
pub enum Failure {
    Input(String),
    Numeric(String),
}

impl From<symporder::Error> for Failure {
    fn from(e: symporder::Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Numeric(e.to_string())
        }
    }
}

#[derive(Serialize)]
struct Document<'a> {
    command: &'a str,
    version: &'a str,
    convention: &'a str,
    inputs: Value,
    tolerances: Value,
    result: Value,
}

/// What a subcommand produced.
enum Output {
    Json { inputs: Value, result: Value },
    Csv(String),
}

/// A finished document that still signals failure (a failed criterion).
struct Outcome {
    output: Output,
    failed: bool,
}

impl From<Output> for Outcome {
    fn from(output: Output) -> Self {
        Outcome {
            output,
            failed: false,
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Maslov { .. } => "maslov",
        Command::Cone { .. } => "cone",
        Command::Order { .. } => "order",
        Command::SynthPositive { .. } => "synth-positive",
        Command::Redistribute { .. } => "redistribute",
        Command::Gamma { .. } => "gamma",
        Command::Kdist { .. } => "kdist",
        Command::Zcoord { .. } => "zcoord",
        Command::DefectSample { .. } => "defect-sample",
        Command::QuantGamma { .. } => "quant-gamma",
        Command::QuantK { .. } => "quant-k",
        Command::RotDistance { .. } => "rot-distance",
        Command::Embed { .. } => "embed",
        Command::Cw { .. } => "cw",
        Command::Verify { .. } => "verify",
    }
}

fn main() -> ExitCode {
    // Usage errors are invalid input (exit 1), not clap's default 2.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let name = command_name(&cli.command);
    let start = Instant::now();
    let code = match run(&cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    };
    eprintln!("{name}: {:.3} s", start.elapsed().as_secs_f64());
    code
}

/// Runs the command and writes its output; `Ok(true)` when the document
/// records a failure.
fn run(cli: &Cli) -> Result<bool, Failure> {
    if !(cli.tol > 0.0) {
        return Err(Failure::Input(format!(
            "--tol must be positive, got {}",
            cli.tol
        )));
    }
    if cli.kmax == 0 || cli.nmax == 0 {
        return Err(Failure::Input(
            "--kmax and --nmax must be at least 1".into(),
        ));
    }
    let outcome = dispatch(cli)?;
    let text = match outcome.output {
        Output::Csv(text) => text,
        Output::Json { inputs, result } => {
            let doc = Document {
                command: command_name(&cli.command),
                version: env!("CARGO_PKG_VERSION"),
                convention: MASLOV_CONVENTION,
                inputs,
                tolerances: json!({
                    "cone": cli.tol,
                    "file_symplectic": io::FILE_TOL,
                    "normalized_mean": symporder::prequantization::NORMALIZED_TOL,
                }),
                result,
            };
            let mut s = serde_json::to_string_pretty(&doc)
                .map_err(|e| Failure::Numeric(format!("serializing output: {e}")))?;
            s.push('\n');
            s
        }
    };
    io::emit(cli.out.as_deref(), &text)?;
    Ok(outcome.failed)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

fn load_path(cli: &Cli, p: &Path) -> Result<SampledPath, Failure> {
    let x = io::read_path(p)?;
    Ok(match cli.grid {
        Some(n) => x.with_samples(n)?,
        None => x,
    })
}

/// Defect constant for homogenized indices; unused (0) when every path is
/// unitary, where the index is exact.
fn defect_constant(cli: &Cli, paths: &[&SampledPath]) -> Result<f64, Failure> {
    if paths.iter().all(|p| p.is_unitary(1e-9)) {
        return Ok(0.0);
    }
    Ok(empirical_defect_constant(
        DEFECT_PAIRS,
        paths[0].dim(),
        cli.seed,
    )?)
}

fn check_csv(cli: &Cli, supported: bool) -> Result<(), Failure> {
    if cli.csv && !supported {
        return Err(Failure::Input(format!(
            "--csv is not supported by {}",
            command_name(&cli.command)
        )));
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<Outcome, Failure> {
    check_csv(
        cli,
        matches!(cli.command, Command::Maslov { .. } | Command::Gamma { .. }),
    )?;
    let out = match &cli.command {
        Command::Maslov { path } => maslov(cli, path)?,
        Command::Cone { path } => {
            let x = load_path(cli, path)?;
            let v = classify_cone(&x, cli.tol)?;
            Output::Json {
                inputs: json!({ "path": path, "samples": x.len() }),
                result: json!({ "in_cone": v.status.in_cone(), "verdict": to_value(&v) }),
            }
        }
        Command::Order { lower, upper } => {
            let (y, x) = (load_path(cli, lower)?, load_path(cli, upper)?);
            let v = order_leq(&y, &x, cli.tol)?;
            Output::Json {
                inputs: json!({ "lower": lower, "upper": upper }),
                result: json!({ "holds": v.status.in_cone(), "verdict": to_value(&v) }),
            }
        }
        Command::SynthPositive { matrix } => synth_positive(cli, matrix)?,
        Command::Redistribute { hermitian, target } => redistribute(hermitian, *target)?,
        Command::Gamma { x, y, pfactor } => gamma(cli, x, y, *pfactor)?,
        Command::Kdist { x, y } => {
            let (px, py) = (load_path(cli, x)?, load_path(cli, y)?);
            let c_emp = defect_constant(cli, &[&px, &py])?;
            let k = pseudo_distance_k(&px, &py, cli.kmax, c_emp, cli.tol)?;
            Output::Json {
                inputs: json!({ "x": x, "y": y, "kmax": cli.kmax, "seed": cli.seed }),
                result: json!({ "distance": to_value(&k), "defect_constant": c_emp }),
            }
        }
        Command::Zcoord { path } => {
            let x = load_path(cli, path)?;
            let c_emp = defect_constant(cli, &[&x])?;
            let z = z_coordinate(&x, cli.kmax, c_emp, cli.tol)?;
            Output::Json {
                inputs: json!({ "path": path, "kmax": cli.kmax, "seed": cli.seed }),
                result: json!({ "coordinate": to_value(&z.coordinate), "defect_constant": c_emp }),
            }
        }
        Command::DefectSample { pairs, dim } => {
            let d = quasimorphism_defect_sample(*pairs, *dim, cli.seed)?;
            Output::Json {
                inputs: json!({ "pairs": pairs, "dim": dim, "seed": cli.seed }),
                result: json!({ "max_defect": d, "defect_constant": 2.0 * d }),
            }
        }
        Command::QuantGamma { f, s, g, t } => quant_gamma(cli, f, *s, g, *t)?,
        Command::QuantK { f, s, g, t } => {
            let a = QuantElement::new(*s, io::read_grid(f)?)?;
            let b = QuantElement::new(*t, io::read_grid(g)?)?;
            Output::Json {
                inputs: json!({ "f": f, "s": s, "g": g, "t": t }),
                result: json!({
                    "k": k_quant(&a, &b)?,
                    "log_gamma_ab": gamma_quant(&a, &b)?.ln(),
                    "log_gamma_ba": gamma_quant(&b, &a)?.ln(),
                }),
            }
        }
        Command::RotDistance { s, func } => {
            let f = io::read_grid(func)?;
            let d = rotation_curve_distance(*s, &f)?;
            Output::Json {
                inputs: json!({ "s": s, "func": func, "grid_points": f.values.len() }),
                result: json!({
                    "distance": d.distance,
                    "t_star": d.t_star,
                    "hofer": to_value(&hofer_norms(&f)?),
                }),
            }
        }
        Command::Embed { func } => {
            let f = io::read_grid(func)?;
            let e = embed_into_z(&f)?;
            Output::Json {
                inputs: json!({ "func": func }),
                result: to_value(&e),
            }
        }
        Command::Cw { family } => {
            let fam = io::read_family(family)?;
            let cw = calabi_weinstein(&fam.times, &fam.slices, fam.weights.as_deref())?;
            Output::Json {
                inputs: json!({ "family": family, "slices": fam.slices.len() }),
                result: json!({
                    "cw": cw,
                    "all_normalized": fam.slices.iter().all(|s| s.normalized),
                }),
            }
        }
        Command::Verify { suite } => return verify(cli, *suite),
    };
    Ok(out.into())
}

fn maslov(cli: &Cli, path: &Path) -> Result<Output, Failure> {
    let x = load_path(cli, path)?;
    let m = maslov_index(&x)?;
    if cli.csv {
        let mut s = String::from("step,increment,cumulative\n");
        let mut acc = 0.0;
        for (k, d) in m.per_step_increments.iter().enumerate() {
            acc += d;
            s.push_str(&format!("{k},{d:?},{acc:?}\n"));
        }
        return Ok(Output::Csv(s));
    }
    // The trace formula is only second-order accurate; evaluate it on a
    // finer grid than the file's.
    let trace = if x.is_unitary(1e-9) {
        Some(maslov_via_trace(
            &x.with_samples(x.len().max(TRACE_SAMPLES))?,
        )?)
    } else {
        None
    };
    let homog: Vec<Value> = homogenize(&x, cli.kmax)?
        .iter()
        .enumerate()
        .map(|(k, v)| json!({ "k": k + 1, "value": v }))
        .collect();
    Ok(Output::Json {
        inputs: json!({ "path": path, "samples": x.len(), "dim": x.dim(), "kmax": cli.kmax }),
        result: json!({
            "value": m.value,
            "turns": m.turns(),
            "samples": m.samples,
            "max_step": m.max_step,
            "via_trace": trace,
            "homogenized": homog,
        }),
    })
}

fn synth_positive(cli: &Cli, matrix: &Path) -> Result<Output, Failure> {
    let p = io::read_matrix(matrix)?;
    let x = positive_path_to(&p, cli.grid.unwrap_or(DEFAULT_SAMPLES))?;
    let endpoint_error = max_abs(&(x.endpoint() - &p));
    let track = extract_hamiltonian(&x)?;
    let min_eig = track
        .hams
        .iter()
        .map(|h| nalgebra::SymmetricEigen::new(h.clone()).eigenvalues.min())
        .fold(f64::INFINITY, f64::min);
    let mu = maslov_index(&x)?.value;
    Ok(Output::Json {
        inputs: json!({ "matrix": matrix, "samples": x.len() }),
        result: json!({
            "endpoint_error": endpoint_error,
            "min_hamiltonian_eigenvalue": min_eig,
            "max_asymmetry": track.max_asymmetry,
            "maslov": mu,
            "maslov_bound": 4.0 * PI * x.half_dim() as f64,
            "path": to_value(&io::PathFile::from_path(&x)),
        }),
    })
}

fn redistribute(hermitian: &Path, target: f64) -> Result<Output, Failure> {
    let a = io::read_hermitian(hermitian)?;
    let r = redistribute_eigenvalues(&a, target)?;
    let a2 = r.reassemble();
    let tol = matrix_core::DEFAULT_TOL;
    let drift = max_abs_c(
        &(matrix_core::exp_i_hermitian(&a2, tol)? - matrix_core::exp_i_hermitian(&a, tol)?),
    );
    let n = a.nrows();
    let re: Vec<f64> = (0..n * n).map(|k| a2[(k / n, k % n)].re).collect();
    let im: Vec<f64> = (0..n * n).map(|k| a2[(k / n, k % n)].im).collect();
    Ok(Output::Json {
        inputs: json!({ "hermitian": hermitian, "target": target }),
        result: json!({
            "eigenvalues": r.eigenvalues,
            "trace": r.trace(),
            "max_gap": r.max_gap(),
            "gap_bound": 2.0 * PI * n as f64,
            "endpoint_drift": drift,
            "matrix": { "dim": n, "re": re, "im": im },
        }),
    })
}

fn growth_ns(nmax: u64) -> Vec<u64> {
    let mut ns: Vec<u64> = std::iter::successors(Some(1u64), |n| n.checked_mul(2))
        .take_while(|&n| n <= nmax)
        .collect();
    if ns.last() != Some(&nmax) {
        ns.push(nmax);
    }
    ns
}

fn gamma(cli: &Cli, x: &Path, y: &Path, pfactor: f64) -> Result<Output, Failure> {
    if !(pfactor > 0.0) {
        return Err(Failure::Input(format!(
            "--pfactor must be positive, got {pfactor}"
        )));
    }
    let (px, py) = (load_path(cli, x)?, load_path(cli, y)?);
    let ns = growth_ns(cli.nmax);
    let est = growth_estimate(&px, &py, &ns, pfactor, cli.tol)?;
    if cli.csv {
        let mut s = String::from("n,gamma_n,ratio\n");
        for &(n, g) in &est.gamma_n_sequence {
            match g {
                Some(g) => s.push_str(&format!("{n},{g},{:?}\n", g as f64 / n as f64)),
                None => s.push_str(&format!("{n},,\n")),
            }
        }
        return Ok(Output::Csv(s));
    }
    let c_emp = defect_constant(cli, &[&px, &py])?;
    let closed = if px.is_unitary(1e-8) && py.is_unitary(1e-8) {
        Interval::exact(gamma_closed_unitary(&px, &py, cli.tol)?)
    } else {
        gamma_closed_symplectic(&px, &py, cli.kmax, c_emp, cli.tol)?
    };
    let seq: Vec<Value> = est
        .gamma_n_sequence
        .iter()
        .map(|&(n, g)| json!({ "n": n, "gamma_n": g, "ratio": g.map(|g| g as f64 / n as f64) }))
        .collect();
    Ok(Output::Json {
        inputs: json!({
            "x": x, "y": y, "nmax": cli.nmax, "pfactor": pfactor,
            "kmax": cli.kmax, "seed": cli.seed,
        }),
        result: json!({
            "sequence": seq,
            "limit_estimate": est.limit_estimate,
            "closed_form": to_value(&closed),
            "defect_constant": c_emp,
        }),
    })
}

fn quant_gamma(cli: &Cli, f: &Path, s: f64, g: &Path, t: f64) -> Result<Output, Failure> {
    let a = QuantElement::new(s, io::read_grid(f)?)?;
    let b = QuantElement::new(t, io::read_grid(g)?)?;
    let gamma = gamma_quant(&a, &b)?;
    let mut seq = Vec::new();
    let mut last = None;
    for n in growth_ns(cli.nmax) {
        let gn = gamma_n_quant_bruteforce(&a, &b, n)?;
        let ratio = gn as f64 / n as f64;
        // gamma_n / n - 1/n <= gamma <= gamma_n / n
        last = Some(Interval {
            estimate: ratio,
            lo: ratio - 1.0 / n as f64,
            hi: ratio,
        });
        seq.push(json!({ "n": n, "gamma_n": gn, "ratio": ratio }));
    }
    Ok(Output::Json {
        inputs: json!({ "f": f, "s": s, "g": g, "t": t, "nmax": cli.nmax }),
        result: json!({
            "gamma": gamma,
            "sequence": seq,
            "bruteforce_interval": last.map(|i| to_value(&i)),
        }),
    })
}

fn verify(cli: &Cli, suite: SuiteArg) -> Result<Outcome, Failure> {
    let (name, suite) = match suite {
        SuiteArg::Linear => ("linear", Suite::Linear),
        SuiteArg::Quant => ("quant", Suite::Quant),
        SuiteArg::All => ("all", Suite::All),
    };
    let reports = acceptance::run_suite(suite, cli.seed);
    for r in &reports {
        eprintln!("{}  ({:.2} s)", r.summary_line(), r.elapsed.as_secs_f64());
    }
    let failed = reports.iter().any(|r| !r.passed);
    Ok(Outcome {
        output: Output::Json {
            inputs: json!({ "suite": name, "seed": cli.seed }),
            result: json!({ "passed": !failed, "criteria": to_value(&reports) }),
        },
        failed,
    })
}
