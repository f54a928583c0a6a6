mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

/// Computable topology from the command line.
#[derive(Debug, Parser)]
#[command(name = "ctopo", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dump a prefix of a point name, or of a finite open name, as `<budget> <word>` lines.
    Name(NameArgs),
    /// Apply a chart, forward or backward, and print an enclosure at precision 2^-k.
    Eval(EvalArgs),
    /// Semi-decide membership of a point in a finite union of computable balls.
    Member(MemberArgs),
    /// Search for disjoint base sets around two points.
    Separate(SeparateArgs),
    /// Restrict a point name to an open submanifold.
    Restrict(RestrictArgs),
    /// Run the torus map into R^3 and the embedding of the circle into R^8.
    EmbedDemo(EmbedArgs),
    /// Run the acceptance suite.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
struct NameArgs {
    /// Gallery identifier, e.g. euclid:2, circle, sphere-stereo:2, torus:2.
    target: String,
    /// Carrier point in ambient coordinates, e.g. 3/5,4/5.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "open")]
    point: Option<String>,
    /// Computable balls `<i>:B(c;r)` or `B(c;r)` (first chart), one per flag.
    #[arg(long, allow_hyphen_values = true, required_unless_present = "point")]
    open: Vec<String>,
    #[arg(long, default_value_t = 100)]
    budget: u64,
}

#[derive(Debug, Args)]
struct EvalArgs {
    target: String,
    /// Chart index or chart name (f+, f-, g+, g- on the circle, s+1, s-1 on spheres,
    /// 1..n+1 on projective spaces, comma lists of circle charts on tori).
    #[arg(long)]
    chart: String,
    /// Carrier point, or chart coordinates with --backward.
    #[arg(long, allow_hyphen_values = true)]
    point: String,
    /// Apply the inverse chart.
    #[arg(long)]
    backward: bool,
    #[arg(long, default_value_t = 16)]
    precision: u32,
    #[arg(long, default_value_t = 1 << 16)]
    budget: u64,
}

#[derive(Debug, Args)]
struct MemberArgs {
    target: String,
    #[arg(long, allow_hyphen_values = true)]
    point: String,
    #[arg(long, allow_hyphen_values = true, required = true)]
    open: Vec<String>,
    #[arg(long, default_value_t = 1000)]
    budget: u64,
}

#[derive(Debug, Args)]
struct SeparateArgs {
    target: String,
    #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_hyphen_values = true, required = true)]
    points: Vec<String>,
    #[arg(long, default_value_t = 10_000)]
    budget: u64,
}

#[derive(Debug, Args)]
struct RestrictArgs {
    target: String,
    #[arg(long, allow_hyphen_values = true)]
    point: String,
    #[arg(long, allow_hyphen_values = true, required = true)]
    open: Vec<String>,
    #[arg(long, default_value_t = 4000)]
    budget: u64,
}

#[derive(Debug, Args)]
struct EmbedArgs {
    /// Number of circle points to embed.
    #[arg(long, default_value_t = 4)]
    samples: u32,
    #[arg(long, default_value_t = 12)]
    precision: u32,
    #[arg(long, default_value_t = 4096)]
    budget: u64,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    /// Run a single criterion.
    #[arg(long)]
    criterion: Option<u8>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return ExitCode::from(if ok { 0 } else { 1 });
        }
    };
    let out = match cli.command {
        Command::Name(a) => commands::name(&a.target, a.point.as_deref(), &a.open, a.budget),
        Command::Eval(a) => commands::eval(
            &a.target,
            &a.chart,
            &a.point,
            a.backward,
            a.precision,
            a.budget,
        ),
        Command::Member(a) => commands::member(&a.target, &a.point, &a.open, a.budget),
        Command::Separate(a) => commands::separate(&a.target, &a.points[0], &a.points[1], a.budget),
        Command::Restrict(a) => commands::restrict(&a.target, &a.point, &a.open, a.budget),
        Command::EmbedDemo(a) => commands::embed_demo(a.samples, a.precision, a.budget),
        Command::Selftest(a) => commands::selftest(a.criterion),
    };
    match out {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let Some(text) = &e.partial {
                print!("{text}");
            }
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
