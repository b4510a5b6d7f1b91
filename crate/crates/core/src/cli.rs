//! Command-line front end.
//!
//! Exit status is 0 on success, 1 on domain errors (bad files, solver or
//! capacity failures) and 2 on usage errors. Complex numbers are printed as
//! `[re, im]` pairs.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::dictionary::{to_pairs, Dictionary, StateFile};
use crate::error::{Error, Result};
use crate::experiments::{self, AddPhiMode, EpsilonParameter, Report, RunSettings};
use crate::extent::{self, ExtentOptions, ExtentSolution};
use crate::stab;
use crate::witness;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "EXTENTLAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "extentlab", version, about = "Extent of vectors over finite dictionaries")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct Tolerances {
    /// Relative duality gap target of the solver.
    #[arg(long, global = true, default_value_t = 1e-7, value_parser = positive)]
    pub gap_tol: f64,
    /// Words with |<s,y>| >= 1 - tol are active.
    #[arg(long, global = true, default_value_t = 1e-6, value_parser = positive)]
    pub activity_tol: f64,
    /// Coefficients with |c_s| > tol form the support.
    #[arg(long, global = true, default_value_t = 1e-7, value_parser = positive)]
    pub support_tol: f64,
}

impl Tolerances {
    pub fn extent_options(&self) -> ExtentOptions {
        let mut o = ExtentOptions::default();
        o.solver.gap_tol = self.gap_tol;
        o.activity_tol = self.activity_tol;
        o.support_tol = self.support_tol;
        o
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the n-qubit stabilizer dictionary to a file.
    GenDict {
        #[arg(long)]
        qubits: usize,
        #[arg(long)]
        out: PathBuf,
        /// Permit n = 5 (2.4 million words).
        #[arg(long)]
        allow_large: bool,
    },
    /// Compute the extent of a state.
    Extent {
        #[command(flatten)]
        source: DictSource,
        #[arg(long, value_parser = existing_file)]
        state: PathBuf,
        #[arg(long)]
        json: bool,
        /// Print the interior-point iterations to stderr.
        #[arg(long)]
        verbose_solver: bool,
    },
    /// Analyse the optimal dual witness of a state.
    Witness {
        #[command(flatten)]
        source: DictSource,
        #[arg(long, value_parser = existing_file)]
        state: PathBuf,
        #[arg(long)]
        check_slackness: bool,
        #[arg(long)]
        json: bool,
    },
    /// Run a seeded experiment.
    #[command(subcommand)]
    Exp(Experiment),
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct DictSource {
    /// Dictionary file written by gen-dict or Dictionary::save.
    #[arg(long, value_parser = existing_file)]
    pub dict: Option<PathBuf>,
    /// Use the n-qubit stabilizer dictionary.
    #[arg(long)]
    pub stab: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Experiment {
    /// Fraction of Haar states with small stabilizer fidelity.
    Concentration {
        #[arg(long)]
        qubits: usize,
        #[arg(long, default_value_t = 0.1, value_parser = positive)]
        epsilon: f64,
        #[command(flatten)]
        common: ExpArgs,
    },
    /// Multiplicativity of extent on a product of stabilizer dictionaries.
    Product {
        /// Qubits per factor.
        #[arg(long, default_value_t = 1)]
        qubits: usize,
        #[command(flatten)]
        common: ExpArgs,
    },
    /// Effect of adding the maximally entangled word to the product dictionary.
    AddPhi {
        #[arg(long, default_value_t = 1)]
        qubits: usize,
        /// Use the computational basis on each factor instead of STAB_n.
        #[arg(long)]
        synthetic: bool,
        /// Permit three qubits per factor.
        #[arg(long)]
        big: bool,
        #[command(flatten)]
        common: ExpArgs,
    },
    /// Support words per stabilizer basis in optimal decompositions.
    Optimality {
        #[arg(long, default_value_t = 1)]
        qubits: usize,
        #[command(flatten)]
        common: ExpArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ExpArgs {
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON-lines output, one record per trial. Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary JSON. Defaults to the last line of stdout.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Record per-trial wall time (output is then not reproducible).
    #[arg(long)]
    pub wall_time: bool,
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("expected a positive number, got {s}"))
    }
}

fn existing_file(s: &str) -> std::result::Result<PathBuf, String> {
    let p = PathBuf::from(s);
    if p.is_file() {
        Ok(p)
    } else {
        Err(format!("cannot read {s}"))
    }
}

pub fn parse_args<I, T>(argv: I) -> std::result::Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    RunConfig::try_parse_from(argv)
}

/// Parses `argv` and runs, writing results to `stdout`. Returns the exit status.
pub fn main_with_args<I, T>(argv: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match parse_args(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    run(&config, stdout)
}

pub fn run(config: &RunConfig, stdout: &mut dyn Write) -> i32 {
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let mut buf = Vec::new();
    let result = pool.install(|| execute(config, &mut buf));
    if let Err(e) = stdout.write_all(&buf).and_then(|_| stdout.flush()) {
        eprintln!("error: {e}");
        return EXIT_DOMAIN;
    }
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_DOMAIN
        }
    }
}

fn thread_pool() -> std::result::Result<rayon::ThreadPool, String> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got {v:?}"))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| e.to_string())
}

fn load_dictionary(source: &DictSource) -> Result<Dictionary> {
    match (&source.dict, source.stab) {
        (Some(path), None) => Dictionary::load(path),
        (None, Some(n)) => stab::enumerate_stabilizer_states(n),
        _ => Err(Error::Validation("exactly one of --dict and --stab is required".into())),
    }
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *out, value).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct ExtentOutput<'a> {
    schema_version: u32,
    xi: f64,
    l1: f64,
    dual_value: f64,
    gap: f64,
    relative_gap: f64,
    certified: bool,
    status: crate::socp::SolverStatus,
    iterations: usize,
    fidelity: f64,
    support: &'a [usize],
    coefficients: Vec<[f64; 2]>,
    witness: Vec<[f64; 2]>,
    reconstruction_error: f64,
    max_overlap: f64,
    warnings: &'a [String],
}

impl<'a> ExtentOutput<'a> {
    fn new(sol: &'a ExtentSolution, fidelity: f64) -> Self {
        ExtentOutput {
            schema_version: experiments::SCHEMA_VERSION,
            xi: sol.xi,
            l1: sol.l1,
            dual_value: sol.dual_value,
            gap: sol.gap,
            relative_gap: sol.relative_gap(),
            certified: sol.is_certified(),
            status: sol.status,
            iterations: sol.iterations,
            fidelity,
            support: &sol.support,
            coefficients: sol.support.iter().map(|&i| [sol.coefficients[i].re, sol.coefficients[i].im]).collect(),
            witness: to_pairs(&sol.witness),
            reconstruction_error: sol.reconstruction_error,
            max_overlap: sol.max_overlap,
            warnings: &sol.warnings,
        }
    }
}

#[derive(Serialize)]
struct WitnessOutput {
    schema_version: u32,
    xi: f64,
    witness: Vec<[f64; 2]>,
    witness_norm_sqr: f64,
    active_set: Vec<usize>,
    active_phases: Vec<f64>,
    extreme_point: bool,
    uniqueness: witness::Uniqueness,
    #[serde(skip_serializing_if = "Option::is_none")]
    slackness: Option<witness::SlacknessReport>,
}

fn execute(config: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let opts = config.tolerances.extent_options();
    match &config.command {
        Command::GenDict { qubits, out: path, allow_large } => {
            let dict = stab::enumerate_stabilizer_states_with(*qubits, *allow_large)?;
            dict.save(path)?;
            writeln!(out, "wrote {} words in C^{} to {}", dict.len(), dict.dim(), path.display())?;
        }
        Command::Extent { source, state, json, verbose_solver } => {
            let dict = load_dictionary(source)?;
            let psi = StateFile::load(state)?;
            let mut opts = opts;
            opts.solver.trace = *verbose_solver;
            let sol = extent::extent_with(&dict, &psi, &opts)?;
            for it in &sol.trace {
                eprintln!(
                    "iter {:3}  pobj {:.10e}  dobj {:.10e}  gap {:.2e}  pres {:.2e}  dres {:.2e}  step {:.3}  sigma {:.2e}",
                    it.iteration,
                    it.primal_objective,
                    it.dual_objective,
                    it.relative_gap,
                    it.primal_residual,
                    it.dual_residual,
                    it.step,
                    it.sigma
                );
            }
            let (f, _) = extent::fidelity(&dict, &psi)?;
            if *json {
                print_json(out, &ExtentOutput::new(&sol, f))?;
            } else {
                writeln!(out, "xi            {:.10}", sol.xi)?;
                writeln!(out, "fidelity      {f:.10}")?;
                writeln!(out, "relative gap  {:.3e}", sol.relative_gap())?;
                writeln!(out, "certified     {}", sol.is_certified())?;
                writeln!(out, "support       {:?}", sol.support)?;
            }
            for w in &sol.warnings {
                eprintln!("warning: {w}");
            }
        }
        Command::Witness { source, state, check_slackness, json } => {
            let dict = load_dictionary(source)?;
            let psi = StateFile::load(state)?;
            let sol = extent::extent_with(&dict, &psi, &opts)?;
            let active = witness::active_set(&dict, &sol.witness, opts.activity_tol)?;
            let slackness = if *check_slackness {
                Some(witness::check_complementary_slackness(&dict, &sol.coefficients, &sol.witness)?)
            } else {
                None
            };
            let report = WitnessOutput {
                schema_version: experiments::SCHEMA_VERSION,
                xi: sol.xi,
                witness: to_pairs(&sol.witness),
                witness_norm_sqr: crate::vector::norm_sqr(&sol.witness),
                extreme_point: witness::spans(&dict, &active.indices),
                uniqueness: witness::witness_is_unique(&dict, &sol),
                active_set: active.indices,
                active_phases: active.phases,
                slackness,
            };
            if *json {
                print_json(out, &report)?;
            } else {
                writeln!(out, "xi             {:.10}", report.xi)?;
                writeln!(out, "|y|^2          {:.10}", report.witness_norm_sqr)?;
                writeln!(out, "active words   {:?}", report.active_set)?;
                writeln!(out, "extreme point  {}", report.extreme_point)?;
                writeln!(out, "uniqueness     {:?}", report.uniqueness)?;
                if let Some(s) = &report.slackness {
                    writeln!(out, "slackness      (I) {:.3e}  (II) {:.3e}", s.max_condition_one, s.max_condition_two)?;
                }
            }
        }
        Command::Exp(exp) => run_experiment(exp, opts, out)?,
    }
    Ok(())
}

fn settings(common: &ExpArgs, opts: ExtentOptions) -> RunSettings {
    RunSettings { trials: common.trials as usize, seed: common.seed, record_wall_time: common.wall_time, extent: opts }
}

fn run_experiment(exp: &Experiment, opts: ExtentOptions, out: &mut dyn Write) -> Result<()> {
    match exp {
        Experiment::Concentration { qubits, epsilon, common } => {
            let eps = EpsilonParameter::new(*epsilon)?;
            let r = experiments::concentration_experiment(*qubits, eps, &settings(common, opts))?;
            emit(&r, common, out)
        }
        Experiment::Product { qubits, common } => {
            let d = stab::enumerate_stabilizer_states(*qubits)?;
            let r = experiments::product_multiplicativity_experiment(&d, &d, &settings(common, opts))?;
            emit(&r, common, out)
        }
        Experiment::AddPhi { qubits, synthetic, big, common } => {
            let mode = if *synthetic { AddPhiMode::Synthetic } else { AddPhiMode::Stabilizer };
            let r = experiments::add_phi_experiment(*qubits, mode, *big, &settings(common, opts))?;
            emit(&r, common, out)
        }
        Experiment::Optimality { qubits, common } => {
            let r = experiments::optimality_condition_check(*qubits, &settings(common, opts))?;
            emit(&r, common, out)
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn emit<S: Serialize>(report: &Report<S>, common: &ExpArgs, out: &mut dyn Write) -> Result<()> {
    match &common.out {
        Some(path) => {
            let mut f = create(path)?;
            experiments::write_json_lines(&report.records, &mut f)?;
            f.flush()?;
        }
        None => experiments::write_json_lines(&report.records, &mut *out)?,
    }
    if let Some(path) = &common.csv {
        experiments::write_csv(&report.records, create(path)?)?;
    }
    match &common.summary {
        Some(path) => {
            let mut f = create(path)?;
            serde_json::to_writer_pretty(&mut f, &report.summary).map_err(std::io::Error::from)?;
            writeln!(f)?;
            f.flush()?;
        }
        None => print_json(out, &report.summary)?,
    }
    Ok(())
}
