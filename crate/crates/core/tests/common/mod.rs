//! Brute-force election oracles, written from first principles and kept
//! independent of the library's evaluation paths: direct positional tally,
//! literal pairwise recounts, and a step-by-step STV trace.

use itervote::preferences::Profile;

/// Position of candidate `c` in a ballot given as the library type, by
/// scanning the raw ranking.
fn position(profile: &Profile, voter: usize, c: usize) -> usize {
    profile
        .ballot(voter)
        .ranking()
        .iter()
        .position(|x| x.0 == c)
        .expect("candidate is ranked")
}

/// Direct positional tally: walk every ballot position by position.
pub fn oracle_positional_tally(vector: &[u64], profile: &Profile) -> Vec<i64> {
    let mut scores = vec![0i64; profile.m()];
    for voter in 0..profile.n() {
        for c in 0..profile.m() {
            scores[c] += vector[position(profile, voter, c)] as i64;
        }
    }
    scores
}

/// Number of voters ranking `x` above `y`, counted one ballot at a time.
pub fn oracle_pairwise_count(profile: &Profile, x: usize, y: usize) -> usize {
    (0..profile.n())
        .filter(|&voter| position(profile, voter, x) < position(profile, voter, y))
        .count()
}

/// Pairwise recount of Copeland scores: wins minus losses over all
/// opponents, strict majorities only.
pub fn oracle_copeland(profile: &Profile) -> Vec<i64> {
    let (m, n) = (profile.m(), profile.n());
    (0..m)
        .map(|c| {
            let mut score = 0i64;
            for a in 0..m {
                if a == c {
                    continue;
                }
                let for_c = oracle_pairwise_count(profile, c, a);
                let against_c = n - for_c;
                if 2 * for_c > n {
                    score += 1;
                } else if 2 * against_c > n {
                    score -= 1;
                }
            }
            score
        })
        .collect()
}

/// Pairwise recount of Maximin scores: the worst pairwise support.
pub fn oracle_maximin(profile: &Profile) -> Vec<i64> {
    let m = profile.m();
    (0..m)
        .map(|c| {
            (0..m)
                .filter(|&a| a != c)
                .map(|a| oracle_pairwise_count(profile, c, a) as i64)
                .min()
                .unwrap()
        })
        .collect()
}

/// Condorcet winner by definition: beats every opponent head to head.
pub fn oracle_condorcet_winner(profile: &Profile) -> Option<usize> {
    let (m, n) = (profile.m(), profile.n());
    (0..m).find(|&c| (0..m).all(|a| a == c || 2 * oracle_pairwise_count(profile, c, a) > n))
}

/// Argmax with explicit tie-breaking: the maximal-score candidate that
/// appears earliest in the `tb` priority list.
pub fn oracle_argmax_tb(scores: &[i64], tb: &[usize]) -> usize {
    let max = *scores.iter().max().unwrap();
    *tb.iter()
        .find(|&&c| scores[c] == max)
        .expect("tb covers all candidates")
}

/// Literal STV trace: recount first places among alive candidates from the
/// raw ballots every round, declare any strict-majority holder the winner,
/// otherwise eliminate the fewest-firsts candidate that appears latest in
/// the `tb` priority list.
pub fn oracle_stv(profile: &Profile, tb: &[usize]) -> usize {
    let (m, n) = (profile.m(), profile.n());
    let mut alive = vec![true; m];
    loop {
        let mut firsts = vec![0usize; m];
        for voter in 0..profile.n() {
            for cand in profile.ballot(voter).ranking() {
                if alive[cand.0] {
                    firsts[cand.0] += 1;
                    break;
                }
            }
        }
        for &c in tb {
            if alive[c] && 2 * firsts[c] > n {
                return c;
            }
        }
        let fewest = (0..m)
            .filter(|&c| alive[c])
            .map(|c| firsts[c])
            .min()
            .unwrap();
        let victim = *tb
            .iter()
            .rev()
            .find(|&&c| alive[c] && firsts[c] == fewest)
            .unwrap();
        alive[victim] = false;
    }
}

/// Winner of any named rule via the oracles above, identity tie-break.
pub fn oracle_winner(rule_name: &str, profile: &Profile) -> usize {
    let m = profile.m();
    let tb: Vec<usize> = (0..m).collect();
    let k_approval = |k: usize| -> Vec<u64> { (0..m).map(|j| u64::from(j < k)).collect() };
    let scores = match rule_name {
        "plurality" => oracle_positional_tally(&k_approval(1), profile),
        "veto" => oracle_positional_tally(&k_approval(m - 1), profile),
        "approval2" => oracle_positional_tally(&k_approval(2), profile),
        "approval3" => oracle_positional_tally(&k_approval(3), profile),
        "borda" => {
            let vector: Vec<u64> = (0..m).rev().map(|j| j as u64).collect();
            oracle_positional_tally(&vector, profile)
        }
        "copeland" => oracle_copeland(profile),
        "maximin" => oracle_maximin(profile),
        "stv" => return oracle_stv(profile, &tb),
        other => panic!("oracle has no rule `{other}`"),
    };
    oracle_argmax_tb(&scores, &tb)
}
