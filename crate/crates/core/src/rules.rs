//! Voting rules: positional scoring rules, Copeland, Maximin, and STV, each
//! producing per-candidate scores and a unique tie-broken winner.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::preferences::{
    majority_matrix, Ballot, Candidate, MajorityMatrix, Profile, TieBreakOrder,
};

/// Rule names accepted by [`Rule::parse`] and the CLI.
pub const RULE_NAMES: [&str; 8] = [
    "plurality",
    "veto",
    "approval2",
    "approval3",
    "borda",
    "copeland",
    "maximin",
    "stv",
];

/// A positional scoring vector `(s_1, ..., s_m)`: nonincreasing nonnegative
/// integers with `s_1 > s_m`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ScoringVector(Vec<u64>);

impl ScoringVector {
    pub fn new(values: Vec<u64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidScoringVector {
                reason: "need at least two entries".into(),
            });
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidScoringVector {
                reason: "entries must be nonincreasing".into(),
            });
        }
        if values[0] == values[values.len() - 1] {
            return Err(Error::InvalidScoringVector {
                reason: "first entry must exceed the last".into(),
            });
        }
        Ok(ScoringVector(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Points awarded to the candidate at 0-based rank `pos`.
    pub fn points(&self, pos: usize) -> u64 {
        self.0[pos]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }
}

/// A resolute voting rule (ties resolved by a [`TieBreakOrder`]).
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Rule {
    Psr(ScoringVector),
    Copeland,
    Maximin,
    Stv,
}

impl Rule {
    /// Builds the rule named `name` for an `m`-candidate election.
    pub fn parse(name: &str, m: usize) -> Result<Rule> {
        match name {
            "copeland" => Ok(Rule::Copeland),
            "maximin" => Ok(Rule::Maximin),
            "stv" => Ok(Rule::Stv),
            "plurality" | "veto" | "approval2" | "approval3" | "borda" => named_psr(name, m),
            _ => Err(Error::UnknownRule { name: name.into() }),
        }
    }

    /// True for rules whose winner is the argmax of a score vector
    /// (everything except STV).
    pub fn is_score_based(&self) -> bool {
        !matches!(self, Rule::Stv)
    }
}

/// The named positional scoring rules: plurality `(1,0,...,0)`, veto
/// `(1,...,1,0)`, 2-approval `(1,1,0,...,0)`, 3-approval `(1,1,1,0,...,0)`,
/// Borda `(m-1,m-2,...,0)`.
pub fn named_psr(name: &str, m: usize) -> Result<Rule> {
    if m < 2 {
        return Err(Error::InvalidScoringVector {
            reason: format!("need m >= 2, got m={m}"),
        });
    }
    let vector = match name {
        "plurality" => k_approval_vector(1, m)?,
        "veto" => {
            let mut v = vec![1; m];
            v[m - 1] = 0;
            v
        }
        "approval2" => k_approval_vector(2, m)?,
        "approval3" => k_approval_vector(3, m)?,
        "borda" => (0..m).rev().map(|j| j as u64).collect(),
        _ => return Err(Error::UnknownRule { name: name.into() }),
    };
    Ok(Rule::Psr(ScoringVector::new(vector)?))
}

fn k_approval_vector(k: usize, m: usize) -> Result<Vec<u64>> {
    if m <= k {
        return Err(Error::ApprovalNotDefined { k, m });
    }
    Ok((0..m).map(|j| if j < k { 1 } else { 0 }).collect())
}

/// The outcome of one election: the tie-broken winner, per-candidate
/// scores, and whether tie-breaking was needed.
///
/// For STV the scores are survival surrogates: a candidate eliminated in
/// round `j` scores `j`, candidates still standing when a majority appears
/// score the number of rounds played, and the winner scores one more, so
/// higher always means survived longer. For STV, `tie_broken` reports
/// whether any elimination tie was resolved by the tie-break order.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ElectionResult {
    pub winner: Candidate,
    pub scores: Vec<i64>,
    pub tie_broken: bool,
}

/// Positional tally: candidate `c` collects `s_j` points from every ballot
/// ranking it at position `j`.
pub fn psr_scores(vector: &ScoringVector, profile: &Profile) -> Vec<i64> {
    assert_eq!(
        vector.len(),
        profile.m(),
        "scoring vector length must equal the candidate count"
    );
    let mut scores = vec![0i64; profile.m()];
    for ballot in profile.ballots() {
        for (pos, c) in ballot.ranking().iter().enumerate() {
            scores[c.0] += vector.points(pos) as i64;
        }
    }
    scores
}

/// Copeland score: pairwise wins minus pairwise losses; exact ties
/// (`support = n/2`) count for neither.
pub fn copeland_scores(profile: &Profile) -> Vec<i64> {
    copeland_scores_from(&majority_matrix(profile))
}

pub fn copeland_scores_from(matrix: &MajorityMatrix) -> Vec<i64> {
    let m = matrix.m();
    (0..m)
        .map(Candidate)
        .map(|c| {
            let mut score = 0i64;
            for x in (0..m).map(Candidate) {
                if x == c {
                    continue;
                }
                if matrix.beats(c, x) {
                    score += 1;
                } else if matrix.beats(x, c) {
                    score -= 1;
                }
            }
            score
        })
        .collect()
}

/// Maximin score: the smallest pairwise support the candidate receives
/// against any opponent.
pub fn maximin_scores(profile: &Profile) -> Vec<i64> {
    maximin_scores_from(&majority_matrix(profile))
}

pub fn maximin_scores_from(matrix: &MajorityMatrix) -> Vec<i64> {
    let m = matrix.m();
    (0..m)
        .map(Candidate)
        .map(|c| {
            (0..m)
                .map(Candidate)
                .filter(|&x| x != c)
                .map(|x| matrix.support(c, x) as i64)
                .min()
                .expect("m >= 2")
        })
        .collect()
}

/// Single transferable vote. Each round the candidate ranked first by the
/// fewest voters is eliminated (ties eliminate the lowest-priority tied
/// candidate, so high-priority candidates survive) and ballots transfer to
/// their highest-ranked surviving candidate, until someone is ranked first
/// by a strict majority.
pub fn stv_winner(profile: &Profile, tb: &TieBreakOrder) -> ElectionResult {
    stv_result(profile, tb, None)
}

pub(crate) fn stv_result(
    profile: &Profile,
    tb: &TieBreakOrder,
    replaced: Option<(usize, &Ballot)>,
) -> ElectionResult {
    let m = profile.m();
    let n = profile.n();
    let ballot_of = |agent: usize| -> &Ballot {
        match replaced {
            Some((i, b)) if i == agent => b,
            _ => profile.ballot(agent),
        }
    };

    let mut standing = vec![true; m];
    let mut scores = vec![0i64; m];
    let mut tie_broken = false;
    let mut round = 0usize;
    loop {
        let mut firsts = vec![0usize; m];
        for agent in 0..n {
            let top = ballot_of(agent)
                .ranking()
                .iter()
                .find(|c| standing[c.0])
                .expect("at least one candidate stands");
            firsts[top.0] += 1;
        }

        if let Some(winner) = (0..m)
            .map(Candidate)
            .find(|c| standing[c.0] && 2 * firsts[c.0] > n)
        {
            for c in (0..m).map(Candidate) {
                if standing[c.0] {
                    scores[c.0] = round as i64;
                }
            }
            scores[winner.0] = round as i64 + 1;
            return ElectionResult {
                winner,
                scores,
                tie_broken,
            };
        }

        // Eliminate the standing candidate with the fewest first places;
        // among tied candidates the one with the lowest tb priority goes.
        let fewest = (0..m)
            .filter(|&c| standing[c])
            .map(|c| firsts[c])
            .min()
            .expect("at least one candidate stands");
        let tied: Vec<Candidate> = (0..m)
            .map(Candidate)
            .filter(|c| standing[c.0] && firsts[c.0] == fewest)
            .collect();
        if tied.len() > 1 {
            tie_broken = true;
        }
        let eliminated = *tied
            .iter()
            .max_by_key(|&&c| tb.priority_of(c))
            .expect("tied set is nonempty");
        standing[eliminated.0] = false;
        scores[eliminated.0] = round as i64;
        round += 1;
    }
}

/// Runs `rule` on `profile`, breaking score ties by `tb` priority.
pub fn winner(rule: &Rule, profile: &Profile, tb: &TieBreakOrder) -> ElectionResult {
    assert_eq!(
        tb.m(),
        profile.m(),
        "tie-break order must cover the candidate set"
    );
    match rule {
        Rule::Psr(vector) => score_result(psr_scores(vector, profile), tb),
        Rule::Copeland => score_result(copeland_scores(profile), tb),
        Rule::Maximin => score_result(maximin_scores(profile), tb),
        Rule::Stv => stv_result(profile, tb, None),
    }
}

/// Selects the maximal-score candidate, resolving ties by tb priority.
pub(crate) fn score_result(scores: Vec<i64>, tb: &TieBreakOrder) -> ElectionResult {
    let (winner, tie_broken) = argmax_with_tb(&scores, tb);
    ElectionResult {
        winner,
        scores,
        tie_broken,
    }
}

pub(crate) fn argmax_with_tb(scores: &[i64], tb: &TieBreakOrder) -> (Candidate, bool) {
    let max = *scores.iter().max().expect("nonempty scores");
    let mut best: Option<Candidate> = None;
    let mut tied = 0usize;
    for c in (0..scores.len()).map(Candidate) {
        if scores[c.0] == max {
            tied += 1;
            let better = match best {
                None => true,
                Some(b) => tb.priority_of(c) < tb.priority_of(b),
            };
            if better {
                best = Some(c);
            }
        }
    }
    (best.expect("nonempty scores"), tied > 1)
}

/// Incremental election evaluator for one `(rule, profile, tb)` snapshot.
///
/// `winner_if` answers "who would win if this one agent reported that
/// ballot instead" without rebuilding the whole tally: positional scores
/// and the majority matrix are patched with the ballot delta, while STV is
/// re-run with the single ballot substituted.
pub struct Evaluator<'a> {
    rule: &'a Rule,
    profile: &'a Profile,
    tb: &'a TieBreakOrder,
    base: ElectionResult,
    cache: Cache,
}

enum Cache {
    Scores(Vec<i64>),
    Pairwise(MajorityMatrix),
    Stv,
}

impl<'a> Evaluator<'a> {
    pub fn new(rule: &'a Rule, profile: &'a Profile, tb: &'a TieBreakOrder) -> Evaluator<'a> {
        assert_eq!(tb.m(), profile.m());
        let (base, cache) = match rule {
            Rule::Psr(vector) => {
                let scores = psr_scores(vector, profile);
                (score_result(scores.clone(), tb), Cache::Scores(scores))
            }
            Rule::Copeland => {
                let matrix = majority_matrix(profile);
                let scores = copeland_scores_from(&matrix);
                (score_result(scores, tb), Cache::Pairwise(matrix))
            }
            Rule::Maximin => {
                let matrix = majority_matrix(profile);
                let scores = maximin_scores_from(&matrix);
                (score_result(scores, tb), Cache::Pairwise(matrix))
            }
            Rule::Stv => (stv_result(profile, tb, None), Cache::Stv),
        };
        Evaluator {
            rule,
            profile,
            tb,
            base,
            cache,
        }
    }

    pub fn rule(&self) -> &Rule {
        self.rule
    }

    pub fn profile(&self) -> &Profile {
        self.profile
    }

    pub fn tie_break(&self) -> &TieBreakOrder {
        self.tb
    }

    /// Election result of the unmodified profile.
    pub fn result(&self) -> &ElectionResult {
        &self.base
    }

    pub fn winner(&self) -> Candidate {
        self.base.winner
    }

    /// Winner of the profile with `agent`'s ballot replaced by `ballot`.
    pub fn winner_if(&self, agent: usize, ballot: &Ballot) -> Candidate {
        let old = self.profile.ballot(agent);
        match &self.cache {
            Cache::Scores(scores) => {
                let vector = match self.rule {
                    Rule::Psr(v) => v,
                    _ => unreachable!("score cache implies a PSR"),
                };
                let mut patched = scores.clone();
                for (pos, c) in old.ranking().iter().enumerate() {
                    patched[c.0] -= vector.points(pos) as i64;
                }
                for (pos, c) in ballot.ranking().iter().enumerate() {
                    patched[c.0] += vector.points(pos) as i64;
                }
                argmax_with_tb(&patched, self.tb).0
            }
            Cache::Pairwise(matrix) => {
                let patched = matrix.with_ballot_replaced(old, ballot);
                let scores = match self.rule {
                    Rule::Copeland => copeland_scores_from(&patched),
                    Rule::Maximin => maximin_scores_from(&patched),
                    _ => unreachable!("pairwise cache implies Copeland or Maximin"),
                };
                argmax_with_tb(&scores, self.tb).0
            }
            Cache::Stv => stv_result(self.profile, self.tb, Some((agent, ballot))).winner,
        }
    }
}
