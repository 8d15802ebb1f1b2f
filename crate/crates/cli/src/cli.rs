//! Argument parsing and command dispatch.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use fermion_decay_core::model::{check_smallness, SmallnessVariant};

use crate::model::{read_model_file, LoadError, Model, ModelFile};
use crate::report::{write_rows, write_table, Format};
use crate::suites::{build_table, run_suite, RunOptions, Suite, SuiteError, TableKind, GENERAL_R};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_ERROR: u8 = 2;

pub const THREADS_ENV: &str = "FERMION_DECAY_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "fermion-decay",
    version,
    about = "Verify covariance, determinant, Grassmann and decay bounds for finite-lattice Hubbard-type models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a model file and report hermiticity, norms and smallness.
    ModelValidate {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Run a verification suite; exits 0 iff every check passes.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Emit plot data.
    Table {
        #[arg(long, value_enum)]
        kind: TableKind,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// Model selection. Without `--model` the default is t=1, t'=0, mu=0.2,
/// beta=1, d=1, L=4 and no interaction.
#[derive(Debug, Args)]
pub struct ModelArgs {
    /// JSON model file
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Side length [default: L=4, or the model file's value]
    #[arg(long = "L")]
    pub l: Option<usize>,
    /// Dimension [default: d=1, or the model file's value]
    #[arg(long)]
    pub d: Option<usize>,
    /// Inverse temperature [default: beta=1, or the model file's value]
    #[arg(long)]
    pub beta: Option<f64>,
    /// Nearest-neighbour hopping [default: t=1]
    #[arg(long)]
    pub t: Option<f64>,
    /// Next-nearest hopping [default: t'=0]
    #[arg(long = "t-prime")]
    pub t_prime: Option<f64>,
    /// Chemical potential [default: mu=0.2]
    #[arg(long)]
    pub mu: Option<f64>,
    /// Replace the interaction by the on-site Hubbard term with this coupling [default: no interaction]
    #[arg(long = "U", allow_hyphen_values = true)]
    pub u: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Half the number of time slices: beta*h = 2 * half-steps
    #[arg(long = "half-steps", default_value_t = 1)]
    pub half_steps: usize,
    /// Highest Taylor order
    #[arg(long = "m-max", default_value_t = 3)]
    pub m_max: usize,
    /// Random trials for sampled checks
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Override the tolerance of every numerical identity
    #[arg(long)]
    pub tol: Option<f64>,
    /// Worker threads; computations are sequential so results never depend on it
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Report path; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

impl ModelArgs {
    pub fn load(&self) -> Result<Model, LoadError> {
        let mut file = match &self.model {
            Some(p) => read_model_file(p)?,
            None => ModelFile::default(),
        };
        if let Some(l) = self.l {
            file.l = l;
        }
        if let Some(d) = self.d {
            file.d = d;
        }
        if let Some(b) = self.beta {
            file.beta = b;
        }
        if let Some(t) = self.t {
            file.t = t;
        }
        if let Some(t) = self.t_prime {
            file.t_prime = t;
        }
        if let Some(mu) = self.mu {
            file.mu = mu;
        }
        if let Some(u) = self.u {
            file = file.hubbard(u);
        }
        file.build()
    }
}

impl RunArgs {
    fn options(&self) -> Result<RunOptions, String> {
        if self.half_steps == 0 {
            return Err("--half-steps must be positive".into());
        }
        if self.trials == 0 {
            return Err("--trials must be positive".into());
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err("--tol must be positive".into());
            }
        }
        if self.threads == Some(0) {
            return Err("thread count must be positive".into());
        }
        Ok(RunOptions {
            half_steps: self.half_steps,
            m_max: self.m_max,
            trials: self.trials,
            seed: self.seed,
            tol: self.tol,
        })
    }
}

fn load_error_code(e: &LoadError) -> u8 {
    match e {
        LoadError::Parse(_) => EXIT_ERROR,
        LoadError::Invalid(_) => EXIT_VIOLATION,
    }
}

fn open(out: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn suite_error_code(e: &SuiteError) -> u8 {
    match e {
        SuiteError::Refused(_) => EXIT_VIOLATION,
        SuiteError::Core(_) => EXIT_ERROR,
    }
}

pub fn run(cli: Cli) -> u8 {
    match cli.command {
        Command::ModelValidate { model } => model_validate(&model),
        Command::Verify {
            suite,
            model,
            run,
            output,
        } => verify(suite, &model, &run, &output),
        Command::Table {
            kind,
            model,
            run,
            output,
        } => table(kind, &model, &run, &output),
    }
}

fn model_validate(args: &ModelArgs) -> u8 {
    let model = match args.load() {
        Ok(m) => m,
        Err(e) => {
            eprintln!("{e}");
            return load_error_code(&e);
        }
    };
    let (spec, u) = (&model.spec, &model.interaction);
    println!("lattice d={} L={}", spec.d, spec.l);
    println!(
        "params t={} t'={} mu={} beta={}",
        model.params.t, model.params.t_prime, model.params.mu, model.params.beta
    );
    println!("hermiticity ok");
    for l in 1..=u.max_order() {
        println!(
            "order {l}: norm {} (restricted {})",
            u.norm(l, None),
            u.norm(l, Some(spec))
        );
    }
    let mut variants = vec![("general R=0.5", SmallnessVariant::General { r: GENERAL_R })];
    if u.hubbard_coupling().is_some() {
        variants.push(("on-site", SmallnessVariant::Hubbard));
    }
    for (name, v) in variants {
        match check_smallness(u, &model.params, spec, v) {
            Ok(s) => println!(
                "smallness {name}: {} <= {}: {}",
                s.lhs,
                s.rhs,
                if s.satisfied { "satisfied" } else { "violated" }
            ),
            Err(e) => {
                eprintln!("{e}");
                return EXIT_ERROR;
            }
        }
    }
    EXIT_OK
}

fn verify(suite: Suite, model: &ModelArgs, run: &RunArgs, output: &OutputArgs) -> u8 {
    let opts = match run.options() {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_ERROR;
        }
    };
    let model = match model.load() {
        Ok(m) => m,
        Err(e) => {
            eprintln!("{e}");
            return load_error_code(&e);
        }
    };
    let rows = match run_suite(&model, suite, &opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return suite_error_code(&e);
        }
    };
    for r in &rows {
        let bound = r
            .bound
            .map_or(String::new(), |b| format!(" (bound {b:.3e})"));
        eprintln!(
            "{} {}: {}: {:.3e}{bound}",
            if r.pass { "PASS" } else { "FAIL" },
            r.suite,
            r.quantity,
            r.computed
        );
    }
    let written = open(&output.out).and_then(|w| write_rows(w, &rows, output.format));
    if let Err(e) = written {
        eprintln!("cannot write report: {e}");
        return EXIT_ERROR;
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    eprintln!("{} of {} checks pass", rows.len() - failed, rows.len());
    if failed == 0 {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

fn table(kind: TableKind, model: &ModelArgs, run: &RunArgs, output: &OutputArgs) -> u8 {
    let opts = match run.options() {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_ERROR;
        }
    };
    let model = match model.load() {
        Ok(m) => m,
        Err(e) => {
            eprintln!("{e}");
            return load_error_code(&e);
        }
    };
    let t = match build_table(&model, kind, &opts) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{e}");
            return suite_error_code(&e);
        }
    };
    match open(&output.out).and_then(|w| write_table(w, &t, output.format)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("cannot write table: {e}");
            EXIT_ERROR
        }
    }
}
