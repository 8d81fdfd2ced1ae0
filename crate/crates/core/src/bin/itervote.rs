//! Command-line front end: run single iterations with traces, run
//! experiment grids, generate and inspect profiles.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::builder::PossibleValuesParser;
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use itervote::engine::{default_step_cap, iterate, IterationStatus};
use itervote::experiments::{run_experiment_with_jobs, ExperimentConfig};
use itervote::moves::{MoveRestriction, MOVE_NAMES};
use itervote::preferences::{
    condorcet_winner, generate_profile, generate_profile_with_condorcet_winner, majority_matrix,
    parse_profiles, Candidate, Profile, TieBreakOrder, DEFAULT_SAMPLING_ATTEMPT_CAP,
};
use itervote::rules::{winner, Rule, RULE_NAMES};
use itervote::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "itervote", version, about = "Iterative voting simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one iterative election per input profile and print its trace.
    Simulate(SimulateArgs),
    /// Run an experiment grid from a config file and write a CSV report.
    Experiment(ExperimentArgs),
    /// Generate impartial-culture profiles.
    Generate(GenerateArgs),
    /// Print majority matrix, per-rule winners, and the Condorcet winner.
    Analyze(AnalyzeArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Voting rule.
    #[arg(long, value_parser = PossibleValuesParser::new(RULE_NAMES))]
    rule: String,
    /// Manipulation move restriction.
    #[arg(long = "move", value_parser = PossibleValuesParser::new(MOVE_NAMES))]
    restriction: String,
    /// Profile file (one or more concatenated profiles).
    #[arg(long, conflicts_with_all = ["seed", "m", "n"])]
    profile: Option<PathBuf>,
    /// Generate the input profile from this seed instead of a file.
    #[arg(long, requires = "m", requires = "n")]
    seed: Option<u64>,
    /// Candidate count for --seed generation.
    #[arg(long)]
    m: Option<usize>,
    /// Voter count for --seed generation.
    #[arg(long)]
    n: Option<usize>,
    /// Only accept a generated profile with a Condorcet winner.
    #[arg(long = "require-cw", default_value_t = false)]
    require_cw: bool,
    /// Tie-break priority as comma-separated candidate ids (default
    /// identity 0..m-1).
    #[arg(long)]
    tb: Option<String>,
    /// Iteration step cap (default 10*n*m).
    #[arg(long)]
    cap: Option<usize>,
    /// Write the structured JSON outcome(s) here in addition to the trace.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Experiment grid config file (key=value format).
    #[arg(long)]
    config: PathBuf,
    /// Write the CSV report here (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; output is byte-identical for every value.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Candidate count.
    #[arg(long)]
    m: usize,
    /// Voter count.
    #[arg(long)]
    n: usize,
    /// Number of profiles to generate.
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Master seed.
    #[arg(long)]
    seed: u64,
    /// Rejection-sample until every profile has a Condorcet winner.
    #[arg(long = "require-cw", default_value_t = false)]
    require_cw: bool,
    /// Output file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Profile file (one or more concatenated profiles).
    #[arg(long)]
    profile: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate(args) => simulate(args),
        Command::Experiment(args) => experiment(args),
        Command::Generate(args) => generate(args),
        Command::Analyze(args) => analyze(args),
    }
}

fn load_profiles(path: &PathBuf) -> Result<Vec<Profile>> {
    let text = fs::read_to_string(path)?;
    parse_profiles(&text)
}

fn parse_tb(raw: Option<&str>, m: usize) -> Result<TieBreakOrder> {
    match raw {
        None => Ok(TieBreakOrder::identity(m)),
        Some(raw) => {
            let ids = raw
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::InvalidTieBreak {
                            reason: format!("`{tok}` is not a candidate id"),
                        })
                })
                .collect::<Result<Vec<_>>>()?;
            if ids.len() != m {
                return Err(Error::InvalidTieBreak {
                    reason: format!("expected {m} ids, got {}", ids.len()),
                });
            }
            TieBreakOrder::from_ids(&ids)
        }
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let profiles = match (&args.profile, args.seed) {
        (Some(path), None) => load_profiles(path)?,
        (None, Some(seed)) => {
            let (m, n) = (args.m.unwrap(), args.n.unwrap());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let profile = if args.require_cw {
                generate_profile_with_condorcet_winner(
                    m,
                    n,
                    &mut rng,
                    DEFAULT_SAMPLING_ATTEMPT_CAP,
                )?
            } else {
                generate_profile(m, n, &mut rng)
            };
            vec![profile]
        }
        _ => {
            return Err(Error::InvalidProfile {
                reason: "simulate needs exactly one of --profile or --seed".into(),
            })
        }
    };

    let mut outcomes = Vec::with_capacity(profiles.len());
    for (index, profile) in profiles.iter().enumerate() {
        let (m, n) = (profile.m(), profile.n());
        let rule = Rule::parse(&args.rule, m)?;
        let restriction = MoveRestriction::parse(&args.restriction)?;
        let tb = parse_tb(args.tb.as_deref(), m)?;
        let cap = args.cap.unwrap_or_else(|| default_step_cap(n, m));
        let outcome = iterate(profile, &rule, restriction, &tb, cap)?;

        if profiles.len() > 1 {
            println!("profile {index}: m={m} n={n}");
        }
        for record in &outcome.trace {
            println!("{}", record.trace_line());
        }
        let status = match outcome.status {
            IterationStatus::Converged => "converged",
            IterationStatus::StepCapReached => "step-cap-reached",
        };
        println!("{status} steps={} winner={}", outcome.steps, outcome.winner);
        outcomes.push(outcome);
    }

    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&outcomes).expect("outcomes serialize");
        fs::write(path, json)?;
    }
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config)?;
    let config = ExperimentConfig::parse(&text)?;
    if args.jobs < 1 {
        return Err(Error::InvalidProfile {
            reason: "--jobs must be at least 1".into(),
        });
    }
    let report = run_experiment_with_jobs(&config, args.jobs)?;
    let csv = report.to_csv();
    match &args.out {
        Some(path) => fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut out = String::new();
    for _ in 0..args.count {
        let profile = if args.require_cw {
            generate_profile_with_condorcet_winner(
                args.m,
                args.n,
                &mut rng,
                DEFAULT_SAMPLING_ATTEMPT_CAP,
            )?
        } else {
            generate_profile(args.m, args.n, &mut rng)
        };
        out.push_str(&profile.to_text());
    }
    match &args.out {
        Some(path) => fs::write(path, out)?,
        None => print!("{out}"),
    }
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let profiles = load_profiles(&args.profile)?;
    for (index, profile) in profiles.iter().enumerate() {
        let (m, n) = (profile.m(), profile.n());
        if profiles.len() > 1 {
            println!("profile {index}: m={m} n={n}");
        }
        let matrix = majority_matrix(profile);
        println!("majority matrix (support[x][y], row x over column y):");
        for x in (0..m).map(Candidate) {
            let row: Vec<String> = (0..m)
                .map(Candidate)
                .map(|y| {
                    if x == y {
                        "-".to_string()
                    } else {
                        matrix.support(x, y).to_string()
                    }
                })
                .collect();
            println!("  {}", row.join(" "));
        }
        let tb = TieBreakOrder::identity(m);
        for name in RULE_NAMES {
            match Rule::parse(name, m) {
                Ok(rule) => {
                    let result = winner(&rule, profile, &tb);
                    let scores: Vec<String> = result.scores.iter().map(|s| s.to_string()).collect();
                    println!(
                        "{name}: winner={} scores={} tie_broken={}",
                        result.winner,
                        scores.join(" "),
                        result.tie_broken
                    );
                }
                // k-approval is undefined for m <= k; skip those rows.
                Err(Error::ApprovalNotDefined { .. }) => continue,
                Err(err) => return Err(err),
            }
        }
        match condorcet_winner(profile) {
            Some(c) => println!("condorcet_winner: {c}"),
            None => println!("condorcet_winner: none"),
        }
    }
    Ok(())
}
