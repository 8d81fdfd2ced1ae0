//! Restricted manipulation moves: best response, k-pragmatist, M1, and M2.
//!
//! Each move inspects one agent's situation against the current profile and
//! either produces the agent's manipulated ballot or reports that no move
//! is available. Every returned ballot strictly improves the election
//! winner with respect to the agent's truthful preference; the comparison
//! is always against the truthful ballot, never the current one.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::preferences::{Ballot, Candidate, Profile, TieBreakOrder};
use crate::rules::{Evaluator, Rule};

/// Move names accepted by [`MoveRestriction::parse`] and the CLI.
pub const MOVE_NAMES: [&str; 5] = ["best", "pragmatist2", "pragmatist3", "m1", "m2"];

/// Largest candidate count for which best response enumerates all `m!`
/// ballots.
pub const DEFAULT_ENUMERATION_CAP: usize = 8;

/// A restriction on the manipulation moves available to agents.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MoveRestriction {
    /// Unrestricted: the ballot yielding the best achievable winner.
    BestResponse,
    /// Lift the favorite among the k top-scored candidates.
    KPragmatist(usize),
    /// Lift the truthful second-best candidate.
    M1,
    /// Lift the best truth-preferred candidate above the winner that can
    /// actually win.
    M2,
}

impl MoveRestriction {
    /// Parses a move name: `best`, `m1`, `m2`, or `pragmatist<k>`.
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "best" => Ok(MoveRestriction::BestResponse),
            "m1" => Ok(MoveRestriction::M1),
            "m2" => Ok(MoveRestriction::M2),
            _ => {
                if let Some(k) = name.strip_prefix("pragmatist") {
                    let k: usize = k
                        .parse()
                        .map_err(|_| Error::UnknownMove { name: name.into() })?;
                    if k == 0 {
                        return Err(Error::UnknownMove { name: name.into() });
                    }
                    Ok(MoveRestriction::KPragmatist(k))
                } else {
                    Err(Error::UnknownMove { name: name.into() })
                }
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            MoveRestriction::BestResponse => "best".into(),
            MoveRestriction::KPragmatist(k) => format!("pragmatist{k}"),
            MoveRestriction::M1 => "m1".into(),
            MoveRestriction::M2 => "m2".into(),
        }
    }

    /// Computes this restriction's move for the given context.
    pub fn compute(&self, ctx: &MoveContext) -> Result<Option<Ballot>> {
        match *self {
            MoveRestriction::BestResponse => best_response_move(ctx),
            MoveRestriction::KPragmatist(k) => Ok(k_pragmatist_move(ctx, k)),
            MoveRestriction::M1 => Ok(m1_move(ctx)),
            MoveRestriction::M2 => Ok(m2_move(ctx)),
        }
    }
}

impl std::fmt::Display for MoveRestriction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Everything a move needs to know about one agent's situation: the
/// truthful ballot, the current profile (which holds the agent's current
/// ballot), and an evaluator for the rule on that profile.
pub struct MoveContext<'a> {
    truthful: &'a Ballot,
    agent: usize,
    evaluator: &'a Evaluator<'a>,
}

impl<'a> MoveContext<'a> {
    pub fn new(truthful: &'a Ballot, agent: usize, evaluator: &'a Evaluator<'a>) -> Self {
        debug_assert_eq!(truthful.m(), evaluator.profile().m());
        MoveContext {
            truthful,
            agent,
            evaluator,
        }
    }

    pub fn truthful(&self) -> &Ballot {
        self.truthful
    }

    pub fn agent(&self) -> usize {
        self.agent
    }

    /// The agent's currently reported ballot.
    pub fn current(&self) -> &Ballot {
        self.evaluator.profile().ballot(self.agent)
    }

    pub fn profile(&self) -> &Profile {
        self.evaluator.profile()
    }

    pub fn rule(&self) -> &Rule {
        self.evaluator.rule()
    }

    pub fn tie_break(&self) -> &TieBreakOrder {
        self.evaluator.tie_break()
    }

    pub fn current_winner(&self) -> Candidate {
        self.evaluator.winner()
    }

    fn winner_if(&self, ballot: &Ballot) -> Candidate {
        self.evaluator.winner_if(self.agent, ballot)
    }

    /// True iff `a` is strictly preferred to `b` under the truthful ballot.
    fn truth_prefers(&self, a: Candidate, b: Candidate) -> bool {
        self.truthful.prefers(a, b)
    }
}

/// M1: lift the truthful second-best candidate to the top of the current
/// ballot, unless the winner already is the agent's truthful best or
/// second-best. Applied only when the resulting winner is a strict
/// improvement under the truthful ballot.
pub fn m1_move(ctx: &MoveContext) -> Option<Ballot> {
    let candidate_ballot = m1_candidate_ballot(ctx)?;
    let new_winner = ctx.winner_if(&candidate_ballot);
    if ctx.truth_prefers(new_winner, ctx.current_winner()) {
        Some(candidate_ballot)
    } else {
        None
    }
}

/// M1 without the improvement gate: the lift is performed whenever the
/// winner is below the truthful top two and the lift changes the ballot,
/// regardless of how it affects the outcome.
pub fn m1_move_ungated(ctx: &MoveContext) -> Option<Ballot> {
    let candidate_ballot = m1_candidate_ballot(ctx)?;
    if &candidate_ballot == ctx.current() {
        None
    } else {
        Some(candidate_ballot)
    }
}

fn m1_candidate_ballot(ctx: &MoveContext) -> Option<Ballot> {
    let truth = ctx.truthful();
    if truth.rank_of(ctx.current_winner()) <= 1 {
        return None;
    }
    let second_best = truth.ranking()[1];
    Some(ctx.current().lifted_to_top(second_best))
}

/// M2: among the candidates ranked above the winner in the agent's current
/// ballot, keep those that would actually win if lifted to the top; lift
/// the truthfully most preferred survivor, provided it beats the current
/// winner under the truthful ballot.
pub fn m2_move(ctx: &MoveContext) -> Option<Ballot> {
    let current = ctx.current();
    let truth = ctx.truthful();
    let w = ctx.current_winner();
    let winner_pos = current.rank_of(w);

    let mut best: Option<(usize, Ballot)> = None;
    for &c in &current.ranking()[..winner_pos] {
        let lifted = current.lifted_to_top(c);
        if ctx.winner_if(&lifted) != c {
            continue;
        }
        let truth_rank = truth.rank_of(c);
        if best.as_ref().is_none_or(|(r, _)| truth_rank < *r) {
            best = Some((truth_rank, lifted));
        }
    }

    let (truth_rank, ballot) = best?;
    if truth_rank < truth.rank_of(w) {
        Some(ballot)
    } else {
        None
    }
}

/// Ranks all candidates by the rule's result: score descending, ties by tb
/// priority. For STV the scores are survival surrogates, so this realizes
/// reverse elimination order with the winner first; tb orders candidates
/// that survived equally long.
pub fn rule_ranking(evaluator: &Evaluator) -> Vec<Candidate> {
    let scores = &evaluator.result().scores;
    let tb = evaluator.tie_break();
    let mut candidates: Vec<Candidate> = (0..scores.len()).map(Candidate).collect();
    candidates.sort_by_key(|&c| (std::cmp::Reverse(scores[c.0]), tb.priority_of(c)));
    candidates
}

/// k-pragmatist: lift the truthful favorite among the k top-ranked
/// candidates of the current outcome. No move when that favorite is the
/// sitting winner, already tops the current ballot, or lifting it does not
/// strictly improve the outcome.
pub fn k_pragmatist_move(ctx: &MoveContext, k: usize) -> Option<Ballot> {
    let m = ctx.profile().m();
    assert!(k >= 1 && k <= m, "k-pragmatist needs 1 <= k <= m");
    let ranking = rule_ranking(ctx.evaluator);
    let truth = ctx.truthful();
    let favorite = *ranking[..k]
        .iter()
        .min_by_key(|&&c| truth.rank_of(c))
        .expect("k >= 1");

    let w = ctx.current_winner();
    if favorite == w || ctx.current().top() == favorite {
        return None;
    }
    let lifted = ctx.current().lifted_to_top(favorite);
    let new_winner = ctx.winner_if(&lifted);
    if ctx.truth_prefers(new_winner, w) {
        Some(lifted)
    } else {
        None
    }
}

/// Best response: enumerate all `m!` ballots and pick one achieving the
/// truthfully best reachable winner. Returns the canonical optimal ballot
/// (the achieved winner lifted to the top of the truthful ballot) when
/// that ballot itself achieves the optimum, otherwise the first optimal
/// ballot in lexicographic enumeration order.
pub fn best_response_move(ctx: &MoveContext) -> Result<Option<Ballot>> {
    best_response_move_with_cap(ctx, DEFAULT_ENUMERATION_CAP)
}

pub fn best_response_move_with_cap(ctx: &MoveContext, cap: usize) -> Result<Option<Ballot>> {
    let m = ctx.profile().m();
    if m > cap {
        return Err(Error::EnumerationCapExceeded { m, cap });
    }
    let truth = ctx.truthful();

    let mut best: Option<(usize, Ballot)> = None;
    for perm in (0..m).permutations(m) {
        let ballot = Ballot::from_ids(&perm).expect("permutations are valid ballots");
        let achieved = ctx.winner_if(&ballot);
        let rank = truth.rank_of(achieved);
        if best.as_ref().is_none_or(|(r, _)| rank < *r) {
            best = Some((rank, ballot));
        }
    }
    let (best_rank, first_optimal) = best.expect("m >= 2 yields at least two ballots");

    let w = ctx.current_winner();
    if best_rank >= truth.rank_of(w) {
        return Ok(None);
    }
    let target = truth.ranking()[best_rank];
    let canonical = truth.lifted_to_top(target);
    if ctx.winner_if(&canonical) == target {
        Ok(Some(canonical))
    } else {
        Ok(Some(first_optimal))
    }
}
