//! `mmwb`: batch front end for the Minsky machine workbench.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use report::Report;

#[derive(Parser, Debug)]
#[command(name = "mmwb", version, about = "Minsky machines, their semigroup and Conway simulations, and finite-algebra checks")]
pub struct Cli {
    /// Seed for randomized procedures.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Add wall-clock timings to the report (breaks byte-identical output).
    #[arg(long, global = true)]
    pub timings: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    /// Write the artifact here instead of after the report.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a machine file and print it back.
    Parse {
        machine: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Run a deterministic machine from a configuration.
    Run {
        machine: PathBuf,
        /// Start configuration, e.g. `1;2,0`.
        #[arg(long)]
        config: String,
        #[arg(long, default_value_t = 10_000)]
        fuel: u64,
        /// Print the trace as the artifact.
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Decide equivalence of two configurations under Sym(M).
    Equiv {
        machine: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, default_value_t = 10_000)]
        fuel: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Compile a K-glass machine to two glasses.
    Compile2 {
        machine: PathBuf,
        /// Also run source and target from this configuration and compare.
        #[arg(long)]
        check: Option<String>,
        /// Target-machine fuel for `--check`.
        #[arg(long, default_value_t = 1_000_000)]
        fuel: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Attach glasses 4 and 5 to a 3-glass machine.
    DepthGlasses {
        machine: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Emit a presentation: s1, s2r, s2l, s1p, s2rp, s3r, s5r, amalgam-d, amalgam-e, amalgam.
    Emit {
        variant: String,
        machine: PathBuf,
        /// Use the uncorrected relation rows.
        #[arg(long)]
        literal: bool,
        /// Emit the quasi-identity L -> W = 0 for this input configuration instead.
        #[arg(long)]
        quasi_identity: Option<String>,
        #[command(flatten)]
        out: Output,
    },
    /// Decide equality of two words.
    Decide {
        machine: PathBuf,
        #[arg(long)]
        variant: String,
        /// Word, or a configuration such as `1;2,0`.
        #[arg(long)]
        u: String,
        #[arg(long)]
        v: String,
        #[arg(long, default_value_t = 20_000)]
        fuel: u64,
        #[arg(long)]
        literal: bool,
        /// Also rewrite `u` under this many seeded random strategies and compare normal forms.
        #[arg(long, default_value_t = 0)]
        confluence: u32,
        #[command(flatten)]
        out: Output,
    },
    /// Compute the divisor set of a word.
    Divisors {
        machine: PathBuf,
        #[arg(long)]
        variant: String,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 10_000)]
        fuel: u64,
        #[arg(long)]
        literal: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Build the Rees quotient by the non-divisors of a word.
    Quotient {
        machine: PathBuf,
        #[arg(long)]
        variant: String,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 10_000)]
        fuel: u64,
        #[arg(long)]
        literal: bool,
        /// Evaluate the quasi-identity for this input configuration in the quotient.
        #[arg(long)]
        quasi_identity: Option<String>,
        /// Search for a quotient separating `word` from this word.
        #[arg(long)]
        separate: Option<String>,
        #[arg(long, default_value_t = 2000)]
        order_bound: usize,
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Compile a two-glass machine to a piecewise dilation.
    ConwayCompile {
        machine: PathBuf,
        /// Test 2p | n instead of 3p | n in the glass-2 decrement piece.
        #[arg(long)]
        literal_sub2: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Iterate the compiled dilation.
    ConwayRun {
        machine: PathBuf,
        /// Start value.
        #[arg(long, conflicts_with = "m")]
        n: Option<String>,
        /// Start from the code of (1;m,0).
        #[arg(long)]
        m: Option<u64>,
        #[arg(long, default_value_t = 10_000)]
        fuel: u64,
        #[arg(long)]
        literal_sub2: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Compare machine runs with dilation trajectories over a range of inputs.
    ConwayVerify {
        machine: PathBuf,
        /// Range `a..b` (inclusive) of m in (1;m,0).
        #[arg(long)]
        m: String,
        #[arg(long, default_value_t = 100_000)]
        fuel: u64,
        #[arg(long)]
        literal_sub2: bool,
    },
    /// Build a Rees matrix semigroup over a group.
    ReesMatrix {
        /// `Z<k>` for a cyclic group, or a table file.
        #[arg(long)]
        group: String,
        /// Sandwich rows separated by `;`, entries by spaces; `0` is zero.
        #[arg(long)]
        sandwich: String,
        #[command(flatten)]
        out: Output,
    },
    /// Build the split-system semigroup of a partial group.
    SplitSystem {
        partial_group: PathBuf,
        /// Enumerate extensions G ⊆ Gᵢ = G·G·G first.
        #[arg(long)]
        extensions: bool,
        #[arg(long, default_value_t = 4)]
        bound: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Evaluate identities in a finite semigroup.
    IdentityEval {
        /// Table file, builtin name, or `A*B` for a direct product of builtins.
        #[arg(long)]
        semigroup: String,
        #[arg(long)]
        identity: Option<String>,
        #[arg(long)]
        identities: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
    },
    /// Print a Zimin word.
    Zimin {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Check whether a word is an isoterm for an identity.
    Isoterm {
        #[arg(long)]
        word: String,
        #[arg(long)]
        identity: String,
    },
    /// Evaluate the two decidability conditions for an identity list.
    VarietyCheck {
        identities: PathBuf,
        /// Require Z_{n+1} to be an isoterm in the periodic-side condition.
        #[arg(long)]
        flip: bool,
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let echo: Vec<String> = std::env::args().skip(1).collect();
    let mut report = Report::new(&echo.join(" "));
    report.set("seed", cli.seed);
    let started = Instant::now();
    let result = commands::dispatch(&cli, &mut report);
    if cli.timings {
        report.set("elapsed_ms", started.elapsed().as_millis());
    }
    report.finish(result.err())
}
