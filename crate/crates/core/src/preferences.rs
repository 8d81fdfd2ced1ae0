//! Candidates, ballots, profiles, pairwise majority analysis, and seeded
//! impartial-culture profile generation.
//!
//! All types are immutable after construction and all operations are pure,
//! so they are safe to share across worker threads.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// A candidate, identified by a dense id in `0..m`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
#[serde(transparent)]
pub struct Candidate(pub usize);

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A strict linear order over all `m` candidates, most preferred first.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize)]
#[serde(transparent)]
pub struct Ballot {
    ranking: Vec<Candidate>,
}

impl Ballot {
    /// Builds a ballot from a full ranking; the ranking must be a
    /// permutation of `0..m` where `m = ranking.len()`.
    pub fn new(ranking: Vec<Candidate>) -> Result<Self> {
        let m = ranking.len();
        if m == 0 {
            return Err(Error::InvalidBallot {
                reason: "empty ranking".into(),
            });
        }
        let mut seen = vec![false; m];
        for c in &ranking {
            if c.0 >= m {
                return Err(Error::InvalidBallot {
                    reason: format!("candidate id {} out of range for m={m}", c.0),
                });
            }
            if seen[c.0] {
                return Err(Error::InvalidBallot {
                    reason: format!("candidate id {} appears twice", c.0),
                });
            }
            seen[c.0] = true;
        }
        Ok(Ballot { ranking })
    }

    /// Convenience constructor from raw ids.
    pub fn from_ids(ids: &[usize]) -> Result<Self> {
        Ballot::new(ids.iter().copied().map(Candidate).collect())
    }

    /// Number of candidates ranked by this ballot.
    pub fn m(&self) -> usize {
        self.ranking.len()
    }

    /// Full ranking, most preferred first.
    pub fn ranking(&self) -> &[Candidate] {
        &self.ranking
    }

    /// The most preferred candidate.
    pub fn top(&self) -> Candidate {
        self.ranking[0]
    }

    /// Zero-based position of `c` in the ranking (0 = most preferred).
    pub fn rank_of(&self, c: Candidate) -> usize {
        self.ranking
            .iter()
            .position(|&x| x == c)
            .expect("candidate must be ranked")
    }

    /// True iff `a` is ranked strictly above `b`.
    pub fn prefers(&self, a: Candidate, b: Candidate) -> bool {
        self.rank_of(a) < self.rank_of(b)
    }

    /// Returns a copy of this ballot with `c` moved to the top; all other
    /// candidates keep their relative order.
    pub fn lifted_to_top(&self, c: Candidate) -> Ballot {
        let mut ranking = Vec::with_capacity(self.ranking.len());
        ranking.push(c);
        ranking.extend(self.ranking.iter().copied().filter(|&x| x != c));
        Ballot { ranking }
    }
}

impl fmt::Display for Ballot {
    /// Profile text-format ballot syntax: space-separated ids,
    /// most preferred first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.ranking.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// A fixed candidate priority used to resolve all ties deterministically;
/// position 0 is the highest priority.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct TieBreakOrder {
    priority: Vec<Candidate>,
}

impl TieBreakOrder {
    /// Builds a tie-break order; must be a permutation of `0..m`.
    pub fn new(priority: Vec<Candidate>) -> Result<Self> {
        let m = priority.len();
        if m == 0 {
            return Err(Error::InvalidTieBreak {
                reason: "empty priority order".into(),
            });
        }
        let mut seen = vec![false; m];
        for c in &priority {
            if c.0 >= m || seen[c.0] {
                return Err(Error::InvalidTieBreak {
                    reason: format!("not a permutation of 0..{m}"),
                });
            }
            seen[c.0] = true;
        }
        Ok(TieBreakOrder { priority })
    }

    /// Convenience constructor from raw ids.
    pub fn from_ids(ids: &[usize]) -> Result<Self> {
        TieBreakOrder::new(ids.iter().copied().map(Candidate).collect())
    }

    /// The identity order: candidate 0 has the highest priority.
    pub fn identity(m: usize) -> Self {
        TieBreakOrder {
            priority: (0..m).map(Candidate).collect(),
        }
    }

    pub fn m(&self) -> usize {
        self.priority.len()
    }

    /// Priority rank of `c` (0 = highest priority).
    pub fn priority_of(&self, c: Candidate) -> usize {
        self.priority
            .iter()
            .position(|&x| x == c)
            .expect("candidate must appear in tie-break order")
    }

    /// Candidates from highest to lowest priority.
    pub fn order(&self) -> &[Candidate] {
        &self.priority
    }
}

/// An ordered collection of ballots over the same candidate set; the ballot
/// index is the agent id.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Profile {
    m: usize,
    ballots: Vec<Ballot>,
}

impl Profile {
    /// Builds a profile; requires `n >= 1`, `m >= 2`, and every ballot
    /// ranking exactly the same `m` candidates.
    pub fn new(ballots: Vec<Ballot>) -> Result<Self> {
        if ballots.is_empty() {
            return Err(Error::InvalidProfile {
                reason: "a profile needs at least one ballot".into(),
            });
        }
        let m = ballots[0].m();
        if m < 2 {
            return Err(Error::InvalidProfile {
                reason: format!("a profile needs at least two candidates, got m={m}"),
            });
        }
        if let Some(bad) = ballots.iter().find(|b| b.m() != m) {
            return Err(Error::InvalidProfile {
                reason: format!(
                    "mixed candidate counts: expected m={m}, found m={}",
                    bad.m()
                ),
            });
        }
        Ok(Profile { m, ballots })
    }

    /// Convenience constructor from raw id rows.
    pub fn from_rows(rows: &[&[usize]]) -> Result<Self> {
        let ballots = rows
            .iter()
            .map(|row| Ballot::from_ids(row))
            .collect::<Result<Vec<_>>>()?;
        Profile::new(ballots)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of agents.
    pub fn n(&self) -> usize {
        self.ballots.len()
    }

    pub fn ballots(&self) -> &[Ballot] {
        &self.ballots
    }

    pub fn ballot(&self, agent: usize) -> &Ballot {
        &self.ballots[agent]
    }

    /// Returns a copy of the profile with `agent`'s ballot replaced.
    pub fn with_ballot(&self, agent: usize, ballot: Ballot) -> Profile {
        assert_eq!(ballot.m(), self.m, "replacement ballot has wrong m");
        let mut ballots = self.ballots.clone();
        ballots[agent] = ballot;
        Profile { m: self.m, ballots }
    }

    /// Replaces `agent`'s ballot in place, returning the previous one.
    pub fn replace_ballot(&mut self, agent: usize, ballot: Ballot) -> Ballot {
        assert_eq!(ballot.m(), self.m, "replacement ballot has wrong m");
        std::mem::replace(&mut self.ballots[agent], ballot)
    }

    /// Serializes to the profile text format: a header line `m n`, then one
    /// line per ballot (space-separated ids, most preferred first).
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.m, self.n());
        for b in &self.ballots {
            out.push_str(&b.to_string());
            out.push('\n');
        }
        out
    }
}

/// Parses exactly one profile from its text representation.
pub fn parse_profile(text: &str) -> Result<Profile> {
    let profiles = parse_profiles(text)?;
    match profiles.len() {
        1 => Ok(profiles.into_iter().next().unwrap()),
        k => Err(Error::ProfileParse {
            line: 0,
            message: format!("expected exactly one profile, found {k}"),
        }),
    }
}

/// Parses one or more concatenated profiles. Blank lines between profiles
/// are ignored; the format is otherwise exactly what [`Profile::to_text`]
/// emits, so parse/serialize round-trips are lossless.
pub fn parse_profiles(text: &str) -> Result<Vec<Profile>> {
    let mut profiles = Vec::new();
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .peekable();

    while let Some((line_no, header)) = lines.next() {
        let mut parts = header.split_whitespace();
        let m = parse_count(parts.next(), line_no, "m")?;
        let n = parse_count(parts.next(), line_no, "n")?;
        if parts.next().is_some() {
            return Err(Error::ProfileParse {
                line: line_no,
                message: "header must be exactly `m n`".into(),
            });
        }
        let mut ballots = Vec::with_capacity(n);
        for _ in 0..n {
            let (ballot_line, row) = lines.next().ok_or_else(|| Error::ProfileParse {
                line: line_no,
                message: format!("expected {n} ballot lines after header"),
            })?;
            let mut ids = Vec::with_capacity(m);
            for (tok_no, tok) in row.split_whitespace().enumerate() {
                let id: usize = tok.parse().map_err(|_| Error::ProfileParse {
                    line: ballot_line,
                    message: format!("token {} (`{tok}`) is not a candidate id", tok_no + 1),
                })?;
                ids.push(id);
            }
            if ids.len() != m {
                return Err(Error::ProfileParse {
                    line: ballot_line,
                    message: format!("expected {m} candidate ids, found {}", ids.len()),
                });
            }
            let ballot = Ballot::from_ids(&ids).map_err(|e| Error::ProfileParse {
                line: ballot_line,
                message: e.to_string(),
            })?;
            ballots.push(ballot);
        }
        let profile = Profile::new(ballots).map_err(|e| Error::ProfileParse {
            line: line_no,
            message: e.to_string(),
        })?;
        profiles.push(profile);
    }

    if profiles.is_empty() {
        return Err(Error::ProfileParse {
            line: 0,
            message: "input contains no profile".into(),
        });
    }
    Ok(profiles)
}

fn parse_count(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| Error::ProfileParse {
        line,
        message: format!("missing `{what}` in header"),
    })?;
    tok.parse().map_err(|_| Error::ProfileParse {
        line,
        message: format!("`{what}` (`{tok}`) is not a count"),
    })
}

/// Pairwise support counts: `support(x, y)` is the number of voters ranking
/// `x` above `y`. For all `x != y`, `support(x, y) + support(y, x) = n`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MajorityMatrix {
    m: usize,
    n: usize,
    support: Vec<usize>,
}

impl MajorityMatrix {
    fn zero(m: usize, n: usize) -> Self {
        MajorityMatrix {
            m,
            n,
            support: vec![0; m * m],
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support(&self, x: Candidate, y: Candidate) -> usize {
        self.support[x.0 * self.m + y.0]
    }

    fn add(&mut self, x: Candidate, y: Candidate, delta: isize) {
        let cell = &mut self.support[x.0 * self.m + y.0];
        *cell = cell.checked_add_signed(delta).expect("support underflow");
    }

    /// True iff a strict majority of voters ranks `x` above `y`.
    pub fn beats(&self, x: Candidate, y: Candidate) -> bool {
        2 * self.support(x, y) > self.n
    }

    /// Replays the effect of replacing `agent`'s ballot, returning the
    /// matrix of the modified profile. Only pairs whose relative order
    /// changed are touched.
    pub(crate) fn with_ballot_replaced(&self, old: &Ballot, new: &Ballot) -> MajorityMatrix {
        let mut out = self.clone();
        for i in 0..self.m {
            for j in (i + 1)..self.m {
                let (x, y) = (Candidate(i), Candidate(j));
                let before = old.prefers(x, y);
                let after = new.prefers(x, y);
                if before != after {
                    if after {
                        out.add(x, y, 1);
                        out.add(y, x, -1);
                    } else {
                        out.add(x, y, -1);
                        out.add(y, x, 1);
                    }
                }
            }
        }
        out
    }
}

/// Counts, for every ordered pair `(x, y)`, the voters ranking `x` above `y`.
pub fn majority_matrix(profile: &Profile) -> MajorityMatrix {
    let m = profile.m();
    let mut matrix = MajorityMatrix::zero(m, profile.n());
    for ballot in profile.ballots() {
        // Walk the ranking once: every candidate beats all candidates
        // ranked after it.
        let ranking = ballot.ranking();
        for (i, &x) in ranking.iter().enumerate() {
            for &y in &ranking[i + 1..] {
                matrix.add(x, y, 1);
            }
        }
    }
    matrix
}

/// The candidate beating every other in a strict pairwise majority, if any.
/// Unique when present.
pub fn condorcet_winner(profile: &Profile) -> Option<Candidate> {
    let matrix = majority_matrix(profile);
    condorcet_winner_of(&matrix)
}

pub(crate) fn condorcet_winner_of(matrix: &MajorityMatrix) -> Option<Candidate> {
    let m = matrix.m();
    (0..m)
        .map(Candidate)
        .find(|&c| (0..m).map(Candidate).all(|x| x == c || matrix.beats(c, x)))
}

/// Default attempt cap for rejection sampling of Condorcet-winner profiles.
pub const DEFAULT_SAMPLING_ATTEMPT_CAP: usize = 1_000_000;

/// Draws an impartial-culture profile: each ballot is an independent
/// unbiased shuffle of the `m` candidates. Deterministic given the
/// generator state.
pub fn generate_profile<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Profile {
    assert!(m >= 2, "need at least two candidates");
    assert!(n >= 1, "need at least one voter");
    let ballots = (0..n)
        .map(|_| {
            let mut ranking: Vec<Candidate> = (0..m).map(Candidate).collect();
            ranking.shuffle(rng);
            Ballot { ranking }
        })
        .collect();
    Profile { m, ballots }
}

/// Rejection-samples impartial-culture profiles until one has a Condorcet
/// winner. Fails if `attempt_cap` draws go by without one, which signals
/// pathological parameters.
pub fn generate_profile_with_condorcet_winner<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    rng: &mut R,
    attempt_cap: usize,
) -> Result<Profile> {
    for _ in 0..attempt_cap {
        let profile = generate_profile(m, n, rng);
        if condorcet_winner(&profile).is_some() {
            return Ok(profile);
        }
    }
    Err(Error::SamplingCapExceeded {
        attempts: attempt_cap,
        m,
        n,
    })
}
