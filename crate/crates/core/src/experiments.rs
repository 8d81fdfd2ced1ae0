//! Monte-Carlo harness: Condorcet efficiency of base vs. iterated rules
//! across moves, rules, and electorate sizes, with paired profile samples
//! and deterministic seeding.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{default_step_cap, iterate};
use crate::error::{Error, Result};
use crate::moves::MoveRestriction;
use crate::preferences::{
    condorcet_winner, generate_profile_with_condorcet_winner, Candidate, Profile, TieBreakOrder,
    DEFAULT_SAMPLING_ATTEMPT_CAP,
};
use crate::rules::{winner, Rule};

/// CSV header emitted by [`ExperimentReport::to_csv`].
pub const CSV_HEADER: &str =
    "rule,restriction,n,m,sample_size,efficiency,iterated_profiles,mean_steps,max_steps,nonconverged";

/// A grid of experiment cells: every rule is evaluated as its base
/// (non-iterated) version plus one cell per listed restriction, for every
/// voter count, all on the same profile sample per `(m, n)`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n_values: Vec<usize>,
    pub sample_size: usize,
    pub rules: Vec<String>,
    pub restrictions: Vec<String>,
    pub seed: u64,
    /// Iteration step cap; `None` uses `10 * n * m` per cell.
    pub step_cap: Option<usize>,
}

impl ExperimentConfig {
    /// Parses the flat `key=value` config format. Keys: `rules`, `moves`,
    /// `n`, `samples`, `seed` (required); `m` (default 5) and `cap`
    /// (default `10*n*m`). List values are comma-separated; `#` starts a
    /// comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut m = 5usize;
        let mut n_values: Option<Vec<usize>> = None;
        let mut sample_size: Option<usize> = None;
        let mut rules: Option<Vec<String>> = None;
        let mut restrictions: Option<Vec<String>> = None;
        let mut seed: Option<u64> = None;
        let mut step_cap: Option<usize> = None;

        for (line_no, raw) in text.lines().enumerate() {
            let line_no = line_no + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigParse {
                line: line_no,
                message: format!("expected key=value, got `{line}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |message: String| Error::ConfigParse {
                line: line_no,
                message,
            };
            match key {
                "m" => m = value.parse().map_err(|_| bad(format!("bad m `{value}`")))?,
                "n" => {
                    n_values = Some(
                        parse_list(value)
                            .map_err(|tok| bad(format!("bad voter count `{tok}` in n list")))?,
                    )
                }
                "samples" => {
                    sample_size = Some(
                        value
                            .parse()
                            .map_err(|_| bad(format!("bad samples `{value}`")))?,
                    )
                }
                "seed" => {
                    seed = Some(
                        value
                            .parse()
                            .map_err(|_| bad(format!("bad seed `{value}`")))?,
                    )
                }
                "cap" => {
                    step_cap = Some(
                        value
                            .parse()
                            .map_err(|_| bad(format!("bad cap `{value}`")))?,
                    )
                }
                "rules" => rules = Some(split_names(value)),
                "moves" => restrictions = Some(split_names(value)),
                _ => return Err(bad(format!("unknown key `{key}`"))),
            }
        }

        let missing = |what: &str| Error::ConfigParse {
            line: 0,
            message: format!("missing required key `{what}`"),
        };
        let config = ExperimentConfig {
            m,
            n_values: n_values.ok_or_else(|| missing("n"))?,
            sample_size: sample_size.ok_or_else(|| missing("samples"))?,
            rules: rules.ok_or_else(|| missing("rules"))?,
            restrictions: restrictions.ok_or_else(|| missing("moves"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
            step_cap,
        };
        config.validate()?;
        Ok(config)
    }

    /// Checks counts and that every rule and move name is parseable.
    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::InvalidProfile {
                reason: format!("experiments need m >= 2, got {}", self.m),
            });
        }
        if self.sample_size < 1 {
            return Err(Error::InvalidProfile {
                reason: "sample_size must be at least 1".into(),
            });
        }
        if self.n_values.is_empty() {
            return Err(Error::InvalidProfile {
                reason: "need at least one voter count".into(),
            });
        }
        for name in &self.rules {
            Rule::parse(name, self.m)?;
        }
        for name in &self.restrictions {
            MoveRestriction::parse(name)?;
        }
        Ok(())
    }
}

fn parse_list(value: &str) -> std::result::Result<Vec<usize>, String> {
    value
        .split(',')
        .map(|tok| tok.trim())
        .filter(|tok| !tok.is_empty())
        .map(|tok| tok.parse::<usize>().map_err(|_| tok.to_string()))
        .collect()
}

fn split_names(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|tok| tok.trim().to_string())
        .filter(|tok| !tok.is_empty())
        .collect()
}

/// Aggregate statistics for one `(rule, restriction, n)` cell.
///
/// `mean_steps` averages over the profiles where iteration actually took
/// place (zero when none did); `nonconverged` counts step-cap cutoffs,
/// whose final-profile winner still enters the efficiency count.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct CellReport {
    pub rule: String,
    pub restriction: String,
    pub n: usize,
    pub m: usize,
    pub sample_size: usize,
    pub condorcet_efficiency: f64,
    pub profiles_with_iteration: usize,
    pub mean_steps: f64,
    pub max_steps: usize,
    pub nonconverged: usize,
}

impl CellReport {
    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6},{},{:.4},{},{}",
            self.rule,
            self.restriction,
            self.n,
            self.m,
            self.sample_size,
            self.condorcet_efficiency,
            self.profiles_with_iteration,
            self.mean_steps,
            self.max_steps,
            self.nonconverged
        )
    }
}

/// Per-profile outcome kept for auditing.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ProfileOutcome {
    pub index: usize,
    pub condorcet_winner: Candidate,
    pub winner: Candidate,
    pub steps: usize,
    pub converged: bool,
}

/// Per-cell audit: the outcome of every profile in the sample.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct CellAudit {
    pub rule: String,
    pub restriction: String,
    pub n: usize,
    pub outcomes: Vec<ProfileOutcome>,
}

/// Full experiment output: cell aggregates plus per-profile audits.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct ExperimentReport {
    pub cells: Vec<CellReport>,
    pub audit: Vec<CellAudit>,
}

impl ExperimentReport {
    /// Renders the cell table as CSV, one row per cell, stable order and
    /// formatting so identical runs are byte-identical.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for cell in &self.cells {
            out.push_str(&cell.csv_row());
            out.push('\n');
        }
        out
    }
}

/// Derives the seed for one profile draw from the master seed and the
/// profile's coordinates. Stable across releases: SplitMix64 chained over
/// the voter count and the profile index, so any worker can regenerate any
/// profile independently of execution order.
pub fn profile_seed(master: u64, n: usize, index: usize) -> u64 {
    let mut z = splitmix64(master ^ splitmix64(n as u64));
    z = splitmix64(z ^ splitmix64(index as u64));
    z
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generates the shared Condorcet-winner profile sample for one `(m, n)`.
fn generate_sample(m: usize, n: usize, sample_size: usize, seed: u64) -> Result<Vec<Profile>> {
    (0..sample_size)
        .into_par_iter()
        .map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(profile_seed(seed, n, index));
            generate_profile_with_condorcet_winner(m, n, &mut rng, DEFAULT_SAMPLING_ATTEMPT_CAP)
        })
        .collect()
}

fn evaluate_cell(
    profiles: &[Profile],
    cws: &[Candidate],
    rule_name: &str,
    restriction: Option<&str>,
    m: usize,
    n: usize,
    step_cap: Option<usize>,
) -> Result<(CellReport, CellAudit)> {
    let rule = Rule::parse(rule_name, m)?;
    let restriction_parsed = restriction.map(MoveRestriction::parse).transpose()?;
    let tb = TieBreakOrder::identity(m);
    let cap = step_cap.unwrap_or_else(|| default_step_cap(n, m));

    let outcomes: Vec<ProfileOutcome> = profiles
        .par_iter()
        .enumerate()
        .map(|(index, profile)| -> Result<ProfileOutcome> {
            let cw = cws[index];
            let (elected, steps, converged) = match restriction_parsed {
                None => (winner(&rule, profile, &tb).winner, 0, true),
                Some(restriction) => {
                    let outcome = iterate(profile, &rule, restriction, &tb, cap)?;
                    (outcome.winner, outcome.steps, outcome.converged())
                }
            };
            Ok(ProfileOutcome {
                index,
                condorcet_winner: cw,
                winner: elected,
                steps,
                converged,
            })
        })
        .collect::<Result<_>>()?;

    let sample_size = profiles.len();
    let hits = outcomes
        .iter()
        .filter(|o| o.winner == o.condorcet_winner)
        .count();
    let iterated: Vec<&ProfileOutcome> = outcomes.iter().filter(|o| o.steps > 0).collect();
    let mean_steps = if iterated.is_empty() {
        0.0
    } else {
        iterated.iter().map(|o| o.steps as f64).sum::<f64>() / iterated.len() as f64
    };
    let report = CellReport {
        rule: rule_name.to_string(),
        restriction: restriction.unwrap_or("none").to_string(),
        n,
        m,
        sample_size,
        condorcet_efficiency: hits as f64 / sample_size as f64,
        profiles_with_iteration: iterated.len(),
        mean_steps,
        max_steps: outcomes.iter().map(|o| o.steps).max().unwrap_or(0),
        nonconverged: outcomes.iter().filter(|o| !o.converged).count(),
    };
    let audit = CellAudit {
        rule: rule_name.to_string(),
        restriction: restriction.unwrap_or("none").to_string(),
        n,
        outcomes,
    };
    Ok((report, audit))
}

/// Evaluates a single cell on a freshly generated sample. Pairing across
/// cells comes from the seeding contract: the sample depends only on
/// `(seed, m, n, sample_size)`.
#[allow(clippy::too_many_arguments)]
pub fn condorcet_efficiency(
    rule_name: &str,
    restriction: Option<&str>,
    m: usize,
    n: usize,
    sample_size: usize,
    seed: u64,
    step_cap: Option<usize>,
) -> Result<CellReport> {
    let profiles = generate_sample(m, n, sample_size, seed)?;
    let cws: Vec<Candidate> = profiles
        .iter()
        .map(|p| condorcet_winner(p).expect("sample profiles have a Condorcet winner"))
        .collect();
    let (report, _) = evaluate_cell(&profiles, &cws, rule_name, restriction, m, n, step_cap)?;
    Ok(report)
}

/// Runs the whole grid serially (equivalent to one job).
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_with_jobs(config, 1)
}

/// Runs the whole grid on `jobs` worker threads. Per-profile seeds depend
/// only on the cell coordinates, so the report is byte-identical for every
/// job count.
pub fn run_experiment_with_jobs(
    config: &ExperimentConfig,
    jobs: usize,
) -> Result<ExperimentReport> {
    assert!(jobs >= 1, "need at least one job");
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool construction");
    pool.install(|| run_grid(config))
}

fn run_grid(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut cells = Vec::new();
    let mut audit = Vec::new();
    for &n in &config.n_values {
        let profiles = generate_sample(config.m, n, config.sample_size, config.seed)?;
        let cws: Vec<Candidate> = profiles
            .iter()
            .map(|p| condorcet_winner(p).expect("sample profiles have a Condorcet winner"))
            .collect();
        for rule_name in &config.rules {
            for restriction in
                std::iter::once(None).chain(config.restrictions.iter().map(|r| Some(r.as_str())))
            {
                let (report, cell_audit) = evaluate_cell(
                    &profiles,
                    &cws,
                    rule_name,
                    restriction,
                    config.m,
                    n,
                    config.step_cap,
                )?;
                cells.push(report);
                audit.push(cell_audit);
            }
        }
    }
    Ok(ExperimentReport { cells, audit })
}
