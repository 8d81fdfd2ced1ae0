//! The iterative voting process: dissatisfaction-based turn selection, one
//! manipulation per step, convergence detection, and trace recording.
//!
//! The loop itself is sequential by definition (one mover per step);
//! distinct iterations share no mutable state and can run concurrently.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::moves::{MoveContext, MoveRestriction};
use crate::preferences::{Ballot, Candidate, Profile, TieBreakOrder};
use crate::rules::{Evaluator, Rule};

/// One applied manipulation: which agent moved at which step, the ballot
/// rewrite, and the winner change it caused.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct MoveRecord {
    pub step: usize,
    pub agent: usize,
    pub ballot_before: Ballot,
    pub ballot_after: Ballot,
    pub winner_before: Candidate,
    pub winner_after: Candidate,
}

impl MoveRecord {
    /// Canonical one-line trace format: step, agent, old ballot, new
    /// ballot, old winner, new winner, space-separated, ballots in the
    /// profile text-format syntax.
    pub fn trace_line(&self) -> String {
        format!(
            "{} {} {} {} {} {}",
            self.step,
            self.agent,
            self.ballot_before,
            self.ballot_after,
            self.winner_before,
            self.winner_after
        )
    }
}

/// Terminal status of an iteration.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum IterationStatus {
    /// No agent has an available improving move in the final profile.
    Converged,
    /// The step cap was hit while moves were still available.
    StepCapReached,
}

/// Result of running an iteration to completion.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct IterationOutcome {
    pub status: IterationStatus,
    pub winner: Candidate,
    pub steps: usize,
    pub final_profile: Profile,
    pub trace: Vec<MoveRecord>,
}

impl IterationOutcome {
    pub fn converged(&self) -> bool {
        self.status == IterationStatus::Converged
    }
}

/// Outcome of a single engine step.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum StepResult {
    /// One agent moved; the record describes the rewrite.
    Moved(MoveRecord),
    /// No agent has an available improving move.
    Converged,
}

/// Mutable state of one iterative election.
pub struct IterationState {
    truthful: Profile,
    current: Profile,
    step: usize,
    dissatisfaction: Vec<u64>,
    rule: Rule,
    restriction: MoveRestriction,
    tb: TieBreakOrder,
    trace: Vec<MoveRecord>,
}

impl IterationState {
    /// Starts an iteration at the truthful profile.
    pub fn new(
        profile: Profile,
        rule: Rule,
        restriction: MoveRestriction,
        tb: TieBreakOrder,
    ) -> Result<Self> {
        let m = profile.m();
        if tb.m() != m {
            return Err(Error::InvalidTieBreak {
                reason: format!("tie-break covers {} candidates, profile has {m}", tb.m()),
            });
        }
        if let Rule::Psr(vector) = &rule {
            if vector.len() != m {
                return Err(Error::InvalidScoringVector {
                    reason: format!("vector length {} does not match m={m}", vector.len()),
                });
            }
        }
        if let MoveRestriction::KPragmatist(k) = restriction {
            if k == 0 || k > m {
                return Err(Error::PragmatistOutOfRange { k, m });
            }
        }
        let n = profile.n();
        Ok(IterationState {
            truthful: profile.clone(),
            current: profile,
            step: 0,
            dissatisfaction: vec![0; n],
            rule,
            restriction,
            tb,
            trace: Vec::new(),
        })
    }

    pub fn truthful(&self) -> &Profile {
        &self.truthful
    }

    pub fn current(&self) -> &Profile {
        &self.current
    }

    pub fn step_count(&self) -> usize {
        self.step
    }

    pub fn dissatisfaction(&self) -> &[u64] {
        &self.dissatisfaction
    }

    pub fn trace(&self) -> &[MoveRecord] {
        &self.trace
    }

    /// Computes every agent's available move in the current profile.
    fn available_moves(&self) -> Result<Vec<Option<Ballot>>> {
        let evaluator = Evaluator::new(&self.rule, &self.current, &self.tb);
        (0..self.current.n())
            .map(|agent| {
                let ctx = MoveContext::new(self.truthful.ballot(agent), agent, &evaluator);
                self.restriction.compute(&ctx)
            })
            .collect()
    }

    /// Agents with an available improving move in the current profile, in
    /// index order.
    pub fn eligible_agents(&self) -> Result<Vec<usize>> {
        Ok(self
            .available_moves()?
            .iter()
            .enumerate()
            .filter_map(|(agent, mv)| mv.is_some().then_some(agent))
            .collect())
    }

    /// Among eligible agents, the one with maximal dissatisfaction; ties
    /// go to the lowest agent index.
    pub fn select_mover(&self) -> Result<usize> {
        let eligible = self.eligible_agents()?;
        self.pick_mover(&eligible).ok_or(Error::NoEligibleAgent)
    }

    fn pick_mover(&self, eligible: &[usize]) -> Option<usize> {
        eligible.iter().copied().max_by(|&a, &b| {
            self.dissatisfaction[a]
                .cmp(&self.dissatisfaction[b])
                // On equal dissatisfaction prefer the smaller index.
                .then(b.cmp(&a))
        })
    }

    /// Performs one step: either reports convergence or applies the
    /// selected mover's manipulation and updates dissatisfaction indices
    /// (denied eligible agents gain one point, the mover resets to zero).
    pub fn step(&mut self) -> Result<StepResult> {
        let moves = self.available_moves()?;
        Ok(match self.apply_step(moves) {
            Some(record) => StepResult::Moved(record),
            None => StepResult::Converged,
        })
    }

    fn apply_step(&mut self, moves: Vec<Option<Ballot>>) -> Option<MoveRecord> {
        let eligible: Vec<usize> = moves
            .iter()
            .enumerate()
            .filter_map(|(agent, mv)| mv.is_some().then_some(agent))
            .collect();
        let mover = self.pick_mover(&eligible)?;
        let ballot_after = moves
            .into_iter()
            .nth(mover)
            .flatten()
            .expect("mover is eligible");

        let evaluator = Evaluator::new(&self.rule, &self.current, &self.tb);
        let winner_before = evaluator.winner();
        let winner_after = evaluator.winner_if(mover, &ballot_after);
        debug_assert_ne!(winner_before, winner_after, "moves must change the winner");

        let ballot_before = self.current.replace_ballot(mover, ballot_after.clone());
        for &agent in &eligible {
            if agent != mover {
                self.dissatisfaction[agent] += 1;
            }
        }
        self.dissatisfaction[mover] = 0;

        let record = MoveRecord {
            step: self.step,
            agent: mover,
            ballot_before,
            ballot_after,
            winner_before,
            winner_after,
        };
        self.trace.push(record.clone());
        self.step += 1;
        Some(record)
    }
}

/// Default iteration step cap.
pub fn default_step_cap(n: usize, m: usize) -> usize {
    10 * n * m
}

/// Runs the iterative election from `profile` until no agent has an
/// improving move or `step_cap` manipulations have been applied.
/// Deterministic given its inputs.
pub fn iterate(
    profile: &Profile,
    rule: &Rule,
    restriction: MoveRestriction,
    tb: &TieBreakOrder,
    step_cap: usize,
) -> Result<IterationOutcome> {
    assert!(step_cap >= 1, "step cap must be positive");
    let mut state = IterationState::new(profile.clone(), rule.clone(), restriction, tb.clone())?;
    let status = loop {
        let moves = state.available_moves()?;
        if moves.iter().all(Option::is_none) {
            break IterationStatus::Converged;
        }
        if state.step >= step_cap {
            break IterationStatus::StepCapReached;
        }
        state.apply_step(moves);
    };
    let winner = Evaluator::new(rule, &state.current, tb).winner();
    Ok(IterationOutcome {
        status,
        winner,
        steps: state.step,
        final_profile: state.current,
        trace: state.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{profile_a, profile_b};
    use crate::preferences::{condorcet_winner, generate_profile};
    use crate::rules::{named_psr, winner, RULE_NAMES};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tb3() -> TieBreakOrder {
        TieBreakOrder::identity(3)
    }

    #[test]
    fn unanimous_profile_converges_immediately() {
        for name in RULE_NAMES {
            if name == "approval3" {
                continue; // undefined for m = 3
            }
            let rule = Rule::parse(name, 3).unwrap();
            for restriction in [MoveRestriction::M1, MoveRestriction::M2] {
                let outcome = iterate(&profile_b(), &rule, restriction, &tb3(), 100).unwrap();
                assert_eq!(outcome.status, IterationStatus::Converged);
                assert_eq!(outcome.steps, 0);
                assert_eq!(outcome.winner, Candidate(0));
                assert!(outcome.trace.is_empty());
            }
        }
    }

    #[test]
    fn eligibility_on_mixed_profile() {
        let plurality = named_psr("plurality", 3).unwrap();
        for restriction in [MoveRestriction::M1, MoveRestriction::M2] {
            let state =
                IterationState::new(profile_a(), plurality.clone(), restriction, tb3()).unwrap();
            assert_eq!(state.eligible_agents().unwrap(), vec![4]);
            assert_eq!(state.select_mover().unwrap(), 4);
        }
        let state = IterationState::new(profile_b(), plurality.clone(), MoveRestriction::M2, tb3())
            .unwrap();
        assert!(state.eligible_agents().unwrap().is_empty());
        assert!(matches!(state.select_mover(), Err(Error::NoEligibleAgent)));
    }

    #[test]
    fn mixed_profile_m2_converges_in_one_step() {
        let plurality = named_psr("plurality", 3).unwrap();
        let outcome = iterate(&profile_a(), &plurality, MoveRestriction::M2, &tb3(), 100).unwrap();
        assert_eq!(outcome.status, IterationStatus::Converged);
        assert_eq!(outcome.steps, 1);
        assert_eq!(outcome.winner, Candidate(1));
        let record = &outcome.trace[0];
        assert_eq!(record.agent, 4);
        assert_eq!(record.winner_before, Candidate(0));
        assert_eq!(record.winner_after, Candidate(1));
        assert_eq!(record.ballot_after, Ballot::from_ids(&[1, 2, 0]).unwrap());
        assert_eq!(record.trace_line(), "0 4 2 1 0 1 2 0 0 1",);
        // The final profile differs from the truthful one only at agent 4.
        for agent in 0..4 {
            assert_eq!(
                outcome.final_profile.ballot(agent),
                profile_a().ballot(agent)
            );
        }
    }

    #[test]
    fn dissatisfaction_updates_on_denied_agents() {
        // Plurality scores (1, 2, 2): winner 1 by tie-break. Agents 3 and 4
        // (truth 2>0>1) can each flip the winner to 0, so both are
        // eligible; the tie on dissatisfaction goes to the lower index and
        // the denied agent gains one point.
        let p = Profile::from_rows(&[&[1, 0, 2], &[1, 0, 2], &[0, 1, 2], &[2, 0, 1], &[2, 0, 1]])
            .unwrap();
        let plurality = named_psr("plurality", 3).unwrap();
        let mut state =
            IterationState::new(p, plurality, MoveRestriction::BestResponse, tb3()).unwrap();
        let eligible = state.eligible_agents().unwrap();
        assert_eq!(eligible, vec![3, 4]);
        let mover = state.select_mover().unwrap();
        assert_eq!(mover, 3, "ties broken by lowest index");
        match state.step().unwrap() {
            StepResult::Moved(record) => assert_eq!(record.agent, 3),
            StepResult::Converged => panic!("expected a move"),
        }
        assert_eq!(state.dissatisfaction(), &[0, 0, 0, 0, 1]);
    }

    #[test]
    fn select_mover_prefers_higher_dissatisfaction() {
        let p = profile_a();
        let plurality = named_psr("plurality", 3).unwrap();
        let mut state = IterationState::new(p, plurality, MoveRestriction::M2, tb3()).unwrap();
        // Only agent 4 is eligible, but force distinct dissatisfaction to
        // exercise the comparator on a synthetic eligible set.
        state.dissatisfaction = vec![0, 0, 1, 0, 3];
        assert_eq!(state.pick_mover(&[2, 4]), Some(4));
        state.dissatisfaction = vec![0, 0, 0, 0, 0];
        assert_eq!(state.pick_mover(&[2, 4]), Some(2));
        assert_eq!(state.pick_mover(&[4]), Some(4));
    }

    #[test]
    fn m1_converges_within_n_steps_for_every_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(79);
        for _ in 0..30 {
            let p = generate_profile(4, 9, &mut rng);
            for name in RULE_NAMES {
                let rule = Rule::parse(name, 4).unwrap();
                let tb = TieBreakOrder::identity(4);
                let outcome =
                    iterate(&p, &rule, MoveRestriction::M1, &tb, default_step_cap(9, 4)).unwrap();
                assert_eq!(outcome.status, IterationStatus::Converged, "rule {name}");
                assert!(
                    outcome.steps <= p.n(),
                    "rule {name}: {} steps",
                    outcome.steps
                );
                // No agent moves twice under M1.
                let mut seen = std::collections::HashSet::new();
                for record in &outcome.trace {
                    assert!(seen.insert(record.agent), "agent moved twice");
                }
            }
        }
    }

    #[test]
    fn recorded_moves_strictly_improve_for_the_mover() {
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        let restrictions = [
            MoveRestriction::M1,
            MoveRestriction::M2,
            MoveRestriction::KPragmatist(2),
            MoveRestriction::BestResponse,
        ];
        for _ in 0..20 {
            let p = generate_profile(4, 7, &mut rng);
            let tb = TieBreakOrder::identity(4);
            for restriction in restrictions {
                for name in RULE_NAMES {
                    let rule = Rule::parse(name, 4).unwrap();
                    let outcome =
                        iterate(&p, &rule, restriction, &tb, default_step_cap(7, 4)).unwrap();
                    for record in &outcome.trace {
                        let truth = p.ballot(record.agent);
                        assert!(
                            truth.prefers(record.winner_after, record.winner_before),
                            "move by {} under {name}/{restriction} did not improve",
                            record.agent
                        );
                        assert_ne!(record.winner_before, record.winner_after);
                    }
                    // Status matches final-profile availability, judged
                    // against the original truthful ballots.
                    let evaluator = Evaluator::new(&rule, &outcome.final_profile, &tb);
                    let any_move = (0..p.n()).any(|agent| {
                        let ctx = MoveContext::new(p.ballot(agent), agent, &evaluator);
                        restriction.compute(&ctx).unwrap().is_some()
                    });
                    match outcome.status {
                        IterationStatus::Converged => assert!(!any_move),
                        IterationStatus::StepCapReached => assert!(any_move),
                    }
                }
            }
        }
    }

    #[test]
    fn condorcet_consistency_is_preserved_along_the_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(89);
        let tb = TieBreakOrder::identity(5);
        for _ in 0..20 {
            let p = crate::preferences::generate_profile_with_condorcet_winner(
                5, 21, &mut rng, 100_000,
            )
            .unwrap();
            let cw = condorcet_winner(&p).unwrap();
            for rule in [Rule::Copeland, Rule::Maximin] {
                for restriction in [MoveRestriction::M1, MoveRestriction::M2] {
                    let outcome = iterate(&p, &rule, restriction, &tb, 1000).unwrap();
                    assert_eq!(outcome.winner, cw);
                    assert_eq!(outcome.status, IterationStatus::Converged);
                    // Replay the trace: the Condorcet winner is stable at
                    // every intermediate profile.
                    let mut replayed = p.clone();
                    for record in &outcome.trace {
                        replayed.replace_ballot(record.agent, record.ballot_after.clone());
                        assert_eq!(condorcet_winner(&replayed), Some(cw));
                    }
                }
            }
        }
    }

    #[test]
    fn winner_position_is_preserved_by_m1_and_m2_moves() {
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        for _ in 0..20 {
            let p = generate_profile(5, 9, &mut rng);
            let tb = TieBreakOrder::identity(5);
            for name in RULE_NAMES {
                let rule = Rule::parse(name, 5).unwrap();
                for restriction in [MoveRestriction::M1, MoveRestriction::M2] {
                    let outcome =
                        iterate(&p, &rule, restriction, &tb, default_step_cap(9, 5)).unwrap();
                    for record in &outcome.trace {
                        let w = record.winner_before;
                        for x in (0..5).map(Candidate).filter(|&x| x != w) {
                            assert_eq!(
                                record.ballot_before.prefers(w, x),
                                record.ballot_after.prefers(w, x),
                                "relative order of winner {w} vs {x} changed"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn m2_winner_score_sequence_is_lexicographically_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let score_rules = [
            "plurality",
            "veto",
            "approval2",
            "approval3",
            "borda",
            "copeland",
            "maximin",
        ];
        for _ in 0..20 {
            let p = generate_profile(5, 11, &mut rng);
            let tb = TieBreakOrder::identity(5);
            for name in score_rules {
                let rule = Rule::parse(name, 5).unwrap();
                let outcome =
                    iterate(&p, &rule, MoveRestriction::M2, &tb, default_step_cap(11, 5)).unwrap();
                assert_eq!(outcome.status, IterationStatus::Converged, "rule {name}");
                // Replay and compare (score, priority) of successive
                // winners, starting from the truthful profile's winner.
                let mut replayed = p.clone();
                let base = winner(&rule, &replayed, &tb);
                let mut previous = (base.scores[base.winner.0], tb.priority_of(base.winner));
                let mut prev_winner = base.winner;
                for record in &outcome.trace {
                    assert_eq!(record.winner_before, prev_winner);
                    replayed.replace_ballot(record.agent, record.ballot_after.clone());
                    let result = winner(&rule, &replayed, &tb);
                    assert_eq!(result.winner, record.winner_after);
                    let key = (
                        result.scores[result.winner.0],
                        tb.priority_of(result.winner),
                    );
                    let increased =
                        key.0 > previous.0 || (key.0 == previous.0 && key.1 < previous.1);
                    assert!(
                        increased,
                        "rule {name}: winner key {key:?} after {previous:?}"
                    );
                    previous = key;
                    prev_winner = result.winner;
                }
            }
        }
    }

    #[test]
    fn determinism_of_full_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        let p = generate_profile(5, 13, &mut rng);
        let tb = TieBreakOrder::identity(5);
        let rule = named_psr("borda", 5).unwrap();
        let a = iterate(&p, &rule, MoveRestriction::M2, &tb, 1000).unwrap();
        let b = iterate(&p, &rule, MoveRestriction::M2, &tb, 1000).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn best_response_cycle_hits_the_step_cap() {
        // Found by searching seeded impartial-culture draws: all three
        // candidates tie at Borda score 4, and unrestricted best responses
        // keep trading the lead. The iteration must be cut off by the cap.
        let p = Profile::from_rows(&[&[0, 2, 1], &[1, 0, 2], &[1, 2, 0], &[2, 0, 1]]).unwrap();
        let rule = named_psr("borda", 3).unwrap();
        let outcome = iterate(
            &p,
            &rule,
            MoveRestriction::BestResponse,
            &tb3(),
            default_step_cap(p.n(), p.m()),
        )
        .unwrap();
        assert_eq!(outcome.status, IterationStatus::StepCapReached);
        assert_eq!(outcome.steps, default_step_cap(p.n(), p.m()));
    }
}
