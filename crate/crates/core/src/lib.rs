//! Deterministic simulation of iterative voting with restricted
//! manipulation moves.
//!
//! Voters submit full strict rankings; a voting rule (positional scoring,
//! Copeland, Maximin, or STV) picks a tie-broken winner; then, one agent
//! per step, voters rewrite their ballot through a restricted manipulation
//! move (best response, k-pragmatist, M1, or M2) whenever doing so improves
//! the outcome for their truthful preference. The engine schedules movers
//! by dissatisfaction index, detects convergence, and records a full trace.
//! A Monte-Carlo harness measures the Condorcet efficiency of base versus
//! iterated rules on seeded impartial-culture samples.
//!
//! Everything is deterministic given explicit seeds; all core types are
//! immutable and all operations pure, so simulations parallelize freely.

pub mod engine;
pub mod error;
pub mod experiments;
pub mod moves;
pub mod preferences;
pub mod rules;

pub use engine::{
    default_step_cap, iterate, IterationOutcome, IterationState, IterationStatus, MoveRecord,
    StepResult,
};
pub use error::{Error, Result};
pub use experiments::{
    condorcet_efficiency, run_experiment, run_experiment_with_jobs, CellReport, ExperimentConfig,
    ExperimentReport,
};
pub use moves::{
    best_response_move, k_pragmatist_move, m1_move, m1_move_ungated, m2_move, MoveContext,
    MoveRestriction,
};
pub use preferences::{
    condorcet_winner, generate_profile, generate_profile_with_condorcet_winner, majority_matrix,
    parse_profile, parse_profiles, Ballot, Candidate, MajorityMatrix, Profile, TieBreakOrder,
};
pub use rules::{named_psr, stv_winner, winner, ElectionResult, Evaluator, Rule, ScoringVector};

/// Shared unit-test fixtures: the three hand-traced profiles used across
/// module tests.
#[cfg(test)]
pub(crate) mod fixtures {
    use crate::preferences::Profile;

    /// Mixed profile `{0>1>2, 0>1>2, 1>0>2, 1>0>2, 2>1>0}`: plurality ties
    /// 0 and 1, the Condorcet winner is 1.
    pub fn profile_a() -> Profile {
        Profile::from_rows(&[&[0, 1, 2], &[0, 1, 2], &[1, 0, 2], &[1, 0, 2], &[2, 1, 0]]).unwrap()
    }

    /// Unanimous profile: five ballots `0>1>2`.
    pub fn profile_b() -> Profile {
        let row: &[usize] = &[0, 1, 2];
        Profile::from_rows(&[row; 5]).unwrap()
    }

    /// Symmetric majority cycle `{0>1>2, 1>2>0, 2>0>1}`.
    pub fn profile_c() -> Profile {
        Profile::from_rows(&[&[0, 1, 2], &[1, 2, 0], &[2, 0, 1]]).unwrap()
    }
}
