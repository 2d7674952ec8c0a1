mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use report::Report;

#[derive(Parser, Debug)]
#[command(name = "rankforge", version, about = "Certified points on elliptic curves over quadratic extensions")]
pub struct Cli {
    /// Write the report here as well as to standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Omit the timing section so identical runs give identical bytes.
    #[arg(long, global = true)]
    deterministic: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct CurveArgs {
    /// `[a1,a2,a3,a4,a6]` as a JSON array of rationals.
    #[arg(long)]
    curve: String,
    /// Comma separated primes dividing the conductor.
    #[arg(long = "conductor-primes", alias = "primes")]
    conductor_primes: String,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Independent points over distinct imaginary quadratic fields.
    Twists {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long = "max-scan", default_value_t = 1_000_000)]
        max_scan: u64,
        /// Also report canonical heights on the twists to this tolerance.
        #[arg(long = "height-eps")]
        height_eps: Option<f64>,
    },
    /// The same construction over 𝔽_q(T).
    #[command(name = "ff-twists")]
    FfTwists {
        #[arg(long)]
        q: u32,
        /// `{"a":..,"b":..,"c":..}` or `[a,b,c]` polynomial strings in `T`.
        #[arg(long)]
        curve: String,
        /// Comma separated monic irreducible polynomials.
        #[arg(long = "conductor-primes")]
        conductor_primes: String,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long = "max-scan", default_value_t = rankforge::ff::DEFAULT_FF_SCAN)]
        max_scan: u64,
    },
    /// Heegner point of an imaginary quadratic discriminant, traced to `K`.
    Heegner {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, allow_negative_numbers = true)]
        disc: i64,
        #[arg(long, env = "RANKFORGE_PREC_BITS", default_value_t = 128)]
        prec: usize,
        #[arg(long, default_value_t = 2000)]
        terms: usize,
        #[arg(long = "max-prec", default_value_t = 1024)]
        max_prec: usize,
        /// `zero`, `auto`, or explicit `p:a_p` pairs such as `37:-1`.
        #[arg(long = "bad-ap", default_value = "zero", allow_hyphen_values = true)]
        bad_ap: String,
        /// Generator `[x,y]` compared by height ratio.
        #[arg(long)]
        generator: Option<String>,
        /// Level `N`; defaults to the product of the conductor primes.
        #[arg(long)]
        level: Option<u64>,
    },
    /// Class group of the order of discriminant `D`.
    Classgroup {
        #[arg(short = 'D', long = "disc", allow_negative_numbers = true)]
        d: i64,
    },
    /// Generalized dihedral group and the minus-one argument.
    Dihedral {
        /// Take `A` from the class group of discriminant `-D`.
        #[arg(long = "from-classgroup", requires = "d")]
        from_classgroup: bool,
        #[arg(short = 'D', long = "disc", allow_negative_numbers = true)]
        d: Option<i64>,
        /// Cyclic factors of `A`, comma separated.
        #[arg(long, conflicts_with = "from_classgroup")]
        factors: Option<String>,
        /// Cyclic factors of the module.
        #[arg(long, default_value = "7,7")]
        module: String,
        /// `all`, `relations`, `squaring`, `lifts` or `minus-one`.
        #[arg(long, default_value = "all")]
        check: String,
        /// Random candidate actions tried when exhaustive enumeration is too large.
        #[arg(long, default_value_t = 200)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Distinctness of CM images at conductors `pⁿ`.
    Orbit {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, allow_negative_numbers = true)]
        disc: i64,
        /// Split prime; defaults to the smallest split prime not dividing `2N`.
        #[arg(long)]
        p: Option<u64>,
        #[arg(long = "n-max", default_value_t = 2)]
        n_max: u32,
        #[arg(long, env = "RANKFORGE_PREC_BITS", default_value_t = 128)]
        prec: usize,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        #[arg(long = "bad-ap", default_value = "zero", allow_hyphen_values = true)]
        bad_ap: String,
        #[arg(long)]
        level: Option<u64>,
    },
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: could not size the worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    let start = std::time::Instant::now();
    let outcome = commands::run(&cli.command);
    let report = Report::new(argv[1..].to_vec(), outcome, &cli.command, start, cli.deterministic);
    let text = report.to_string_pretty();
    // a closed stdout (e.g. piped into head) is not an error of the run
    let _ = writeln!(std::io::stdout(), "{text}");
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, format!("{text}\n")) {
            eprintln!("error: writing {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    ExitCode::from(report.exit_code())
}
