use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Exact solvers for linear equations over regular integer sequences.
#[derive(Debug, Parser)]
#[command(name = "regseq", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Run every inner loop on the calling thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    /// Ratio-scan and classification budget.
    #[arg(long, global = true, default_value_t = 512, value_parser = positive)]
    pub scan: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print r_start .. r_{start+count-1}.
    Eval {
        #[arg(long)]
        seq: PathBuf,
        #[arg(long, default_value_t = 0)]
        start: usize,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Classify an operator as finitely many roots or cofinitely zero.
    Classify {
        #[arg(long)]
        seq: PathBuf,
        /// Coefficients a_0..a_d, e.g. "[-2,1]".
        #[arg(long, allow_hyphen_values = true)]
        op: String,
    },
    /// Describe all solutions of a linear equation.
    Solve {
        /// Overrides the sequence embedded in the problem file.
        #[arg(long)]
        seq: Option<PathBuf>,
        #[arg(long)]
        problem: PathBuf,
        /// Cross-check against brute force on [0, N]^s.
        #[arg(long)]
        oracle: Option<usize>,
        #[arg(long, default_value_t = 64, value_parser = positive)]
        max_offset: usize,
        #[arg(long, default_value_t = 512, value_parser = positive)]
        max_anchor: usize,
    },
    /// Decide a sentence of the first-order language with predicate R.
    Decide {
        #[arg(long)]
        seq: PathBuf,
        #[arg(long)]
        formula: PathBuf,
        /// Indices tried by a bounded search.
        #[arg(long, default_value_t = 256, value_parser = positive)]
        search: usize,
    },
    /// Eventual periodicity of r_n mod m.
    Periodicity {
        #[arg(long)]
        seq: PathBuf,
        #[arg(long)]
        modulus: u64,
    },
    #[command(subcommand)]
    Syndetic(SyndeticCmd),
    #[command(subcommand)]
    Mann(MannCmd),
    /// Check the finiteness axiom for one operator.
    VerifyAx5 {
        #[arg(long)]
        seq: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        op: String,
    },
    /// Check the shift-pattern axiom for a homogeneous equation.
    VerifyAx6 {
        #[arg(long)]
        seq: PathBuf,
        /// Operators separated by ';', e.g. "[2,-3,1];[-2,3,-1]".
        #[arg(long, allow_hyphen_values = true)]
        ops: String,
        #[arg(long, default_value_t = 200, value_parser = positive)]
        window: usize,
    },
    /// Run the built-in battery and print one deterministic report.
    Suite,
}

/// Set syntax: `progression:A,D`, `explicit:1,5,9`, `monoid:2,3`,
/// `seq:FILE`, `sums:FILE:K`.
#[derive(Debug, Subcommand)]
pub enum SyndeticCmd {
    /// Longest run with gaps at most d below the horizon.
    GapRuns {
        #[arg(long)]
        set: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        d: u64,
    },
    /// Search a + dN for an element missed by every image.
    CoverCheck {
        #[arg(long)]
        a: u64,
        #[arg(long)]
        d: u64,
        #[arg(long = "image", required = true)]
        images: Vec<String>,
        #[arg(long)]
        n: u64,
    },
    /// Pick the part of a partition with the longest bounded-gap run.
    Brown {
        #[arg(long)]
        set: String,
        #[arg(long = "part", required = true)]
        parts: Vec<String>,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        d: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum MannCmd {
    /// Solve a linear equation over a finitely generated monoid.
    Solve {
        /// Generators, e.g. "2,3".
        #[arg(long, allow_hyphen_values = true)]
        gens: String,
        /// Equation like "x1 + x2 - x3 = 0".
        #[arg(long, allow_hyphen_values = true)]
        eq: String,
        #[arg(long, default_value_t = 20, value_parser = positive_u32)]
        exp_bound: u32,
    },
    /// Solution families of a homogeneous equation as unary-function atoms.
    Trace {
        #[arg(long, allow_hyphen_values = true)]
        gens: String,
        #[arg(long, allow_hyphen_values = true)]
        eq: String,
        #[arg(long, default_value_t = 20, value_parser = positive_u32)]
        exp_bound: u32,
    },
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn positive_u32(s: &str) -> Result<u32, String> {
    match s.parse::<u32>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}
