//! Dominance by mixed strategies, the Dekel-Fudenberg procedure and IESDS.
//!
//! All verdicts are decided by exact linear programs (see [`crate::lp`]).
//! Dominators never put weight on the strategy they dominate.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{Game, MixedStrategy, Player};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::rational::Rational;

/// Per-player surviving strategy sets, kept in file order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Restriction {
    sets: [Vec<usize>; 2],
}

impl Restriction {
    pub fn full(game: &Game) -> Restriction {
        Restriction {
            sets: [
                (0..game.num_strategies(Player::One)).collect(),
                (0..game.num_strategies(Player::Two)).collect(),
            ],
        }
    }

    pub fn new(game: &Game, mut sets: [Vec<usize>; 2]) -> Result<Restriction> {
        for p in Player::BOTH {
            let set = &mut sets[p.index()];
            set.sort_unstable();
            set.dedup();
            if set.is_empty() {
                return Err(Error::input(format!("restriction for player {p} is empty")));
            }
            if set.iter().any(|&s| s >= game.num_strategies(p)) {
                return Err(Error::input(format!(
                    "restriction for player {p} names an unknown strategy"
                )));
            }
        }
        Ok(Restriction { sets })
    }

    pub fn strategies(&self, p: Player) -> &[usize] {
        &self.sets[p.index()]
    }

    pub fn contains(&self, p: Player, s: usize) -> bool {
        self.sets[p.index()].binary_search(&s).is_ok()
    }

    /// Componentwise inclusion.
    pub fn is_subset(&self, other: &Restriction) -> bool {
        Player::BOTH
            .iter()
            .all(|&p| self.strategies(p).iter().all(|&s| other.contains(p, s)))
    }

    fn remove_all(&mut self, eliminated: &[Elimination]) {
        for e in eliminated {
            self.sets[e.player.index()].retain(|&s| s != e.strategy);
        }
    }

    pub fn labels(&self, game: &Game, p: Player) -> Vec<String> {
        self.strategies(p)
            .iter()
            .map(|&s| game.strategy_label(p, s).to_string())
            .collect()
    }

    pub fn render(&self, game: &Game) -> String {
        format!(
            "({{{}}}, {{{}}})",
            self.labels(game, Player::One).join(","),
            self.labels(game, Player::Two).join(",")
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Weak,
    Strict,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Weak => "weak",
            Phase::Strict => "strict",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Elimination {
    pub player: Player,
    pub strategy: usize,
    pub dominator: MixedStrategy,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Round {
    pub phase: Phase,
    /// The restriction the round's dominance checks were run against.
    pub before: Restriction,
    pub eliminations: Vec<Elimination>,
}

impl Round {
    /// Re-checks every recorded dominator against the round's restriction.
    pub fn verify(&self, game: &Game) -> bool {
        self.eliminations.iter().all(|e| match self.phase {
            Phase::Weak => verifies_weak(game, &self.before, e.player, e.strategy, &e.dominator),
            Phase::Strict => {
                verifies_strict(game, &self.before, e.player, e.strategy, &e.dominator)
            }
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EliminationTrace {
    pub rounds: Vec<Round>,
}

impl EliminationTrace {
    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn verify(&self, game: &Game) -> bool {
        self.rounds.iter().all(|r| r.verify(game))
    }

    /// Rows of (1-based round, phase, player, strategy, dominator).
    pub fn table(&self, game: &Game) -> Vec<TraceRow> {
        let mut rows = Vec::new();
        for (k, round) in self.rounds.iter().enumerate() {
            for e in &round.eliminations {
                rows.push(TraceRow {
                    round: k + 1,
                    phase: round.phase,
                    player: e.player.to_string(),
                    strategy: game.strategy_label(e.player, e.strategy).to_string(),
                    dominator: e.dominator.to_labelled(game),
                });
            }
        }
        rows
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub round: usize,
    pub phase: Phase,
    pub player: String,
    pub strategy: String,
    pub dominator: std::collections::BTreeMap<String, Rational>,
}

fn check_member(game: &Game, r: &Restriction, i: Player, s_i: usize) -> Result<()> {
    if r.contains(i, s_i) {
        Ok(())
    } else {
        let label = if s_i < game.num_strategies(i) {
            game.strategy_label(i, s_i).to_string()
        } else {
            format!("#{s_i}")
        };
        Err(Error::input(format!(
            "strategy {label} of player {i} is not in the restriction"
        )))
    }
}

fn mixture_over(game: &Game, owner: Player, support: &[usize], x: &[Rational]) -> MixedStrategy {
    MixedStrategy::from_pairs(game, owner, support.iter().copied().zip(x.iter().cloned()))
        .expect("LP solution is a distribution")
}

/// A mixture over `r`'s strategies for `i` (excluding `s_i`) that is strictly
/// better than `s_i` against every opponent strategy in `r`, if one exists.
pub fn strictly_dominated(
    game: &Game,
    r: &Restriction,
    i: Player,
    s_i: usize,
) -> Result<Option<MixedStrategy>> {
    check_member(game, r, i, s_i)?;
    let j = i.other();
    let candidates: Vec<usize> = r
        .strategies(i)
        .iter()
        .copied()
        .filter(|&k| k != s_i)
        .collect();
    if candidates.is_empty() {
        return Ok(None);
    }
    let n = candidates.len();
    // variables: weights over candidates, then margin t = t+ - t-
    let mut lp = LinearProgram::new(n + 2);
    lp.objective[n] = Rational::one();
    lp.objective[n + 1] = -Rational::one();
    for &s_j in r.strategies(j) {
        let mut row: Vec<Rational> = candidates
            .iter()
            .map(|&k| game.utility(i, k, s_j).clone())
            .collect();
        row.push(-Rational::one());
        row.push(Rational::one());
        lp.add(row, Relation::Ge, game.utility(i, s_i, s_j).clone());
    }
    let mut simplex = vec![Rational::one(); n];
    simplex.extend([Rational::zero(), Rational::zero()]);
    lp.add(simplex, Relation::Eq, Rational::one());
    match lp.solve() {
        LpOutcome::Optimal { x, value } if value.is_positive() => {
            Ok(Some(mixture_over(game, i, &candidates, &x[..n])))
        }
        LpOutcome::Optimal { .. } => Ok(None),
        other => unreachable!("strict dominance LP is feasible and bounded: {other:?}"),
    }
}

/// A mixture over `r`'s strategies for `i` (excluding `s_i`) that is at least
/// as good as `s_i` against every opponent strategy in `r` and strictly better
/// against one, if one exists.
pub fn weakly_dominated(
    game: &Game,
    r: &Restriction,
    i: Player,
    s_i: usize,
) -> Result<Option<MixedStrategy>> {
    check_member(game, r, i, s_i)?;
    let j = i.other();
    let candidates: Vec<usize> = r
        .strategies(i)
        .iter()
        .copied()
        .filter(|&k| k != s_i)
        .collect();
    if candidates.is_empty() {
        return Ok(None);
    }
    let n = candidates.len();
    let opp = r.strategies(j);
    let m = opp.len();
    // variables: weights over candidates, then one slack per opponent strategy
    let mut lp = LinearProgram::new(n + m);
    for c in lp.objective.iter_mut().skip(n) {
        *c = Rational::one();
    }
    for (col, &s_j) in opp.iter().enumerate() {
        let mut row: Vec<Rational> = candidates
            .iter()
            .map(|&k| game.utility(i, k, s_j).clone())
            .collect();
        row.resize(n + m, Rational::zero());
        row[n + col] = -Rational::one();
        lp.add(row, Relation::Eq, game.utility(i, s_i, s_j).clone());
    }
    let mut simplex = vec![Rational::one(); n];
    simplex.resize(n + m, Rational::zero());
    lp.add(simplex, Relation::Eq, Rational::one());
    match lp.solve() {
        LpOutcome::Optimal { x, value } if value.is_positive() => {
            Ok(Some(mixture_over(game, i, &candidates, &x[..n])))
        }
        LpOutcome::Optimal { .. } | LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => unreachable!("weak dominance LP is bounded"),
    }
}

fn best_response_rows(
    game: &Game,
    r: &Restriction,
    i: Player,
    s_i: usize,
    width: usize,
) -> Vec<Vec<Rational>> {
    let j = i.other();
    r.strategies(i)
        .iter()
        .filter(|&&k| k != s_i)
        .map(|&k| {
            let mut row: Vec<Rational> = r
                .strategies(j)
                .iter()
                .map(|&s_j| game.utility(i, s_i, s_j) - game.utility(i, k, s_j))
                .collect();
            row.resize(width, Rational::zero());
            row
        })
        .collect()
}

/// A belief over the opponent's strategies in `r` against which `s_i` is a
/// best response among `i`'s strategies in `r`. Exists exactly when
/// [`strictly_dominated`] finds no dominator.
pub fn justifying_belief(
    game: &Game,
    r: &Restriction,
    i: Player,
    s_i: usize,
) -> Result<Option<MixedStrategy>> {
    check_member(game, r, i, s_i)?;
    let j = i.other();
    let m = r.strategies(j).len();
    let mut lp = LinearProgram::new(m);
    for row in best_response_rows(game, r, i, s_i, m) {
        lp.add(row, Relation::Ge, Rational::zero());
    }
    lp.add(vec![Rational::one(); m], Relation::Eq, Rational::one());
    match lp.solve() {
        LpOutcome::Optimal { x, .. } => Ok(Some(mixture_over(game, j, r.strategies(j), &x))),
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => unreachable!("zero objective"),
    }
}

/// A belief with full support on the opponent's strategies in `r` against
/// which `s_i` is a best response in `r`. Exists exactly when
/// [`weakly_dominated`] finds no dominator.
pub fn admissible_belief(
    game: &Game,
    r: &Restriction,
    i: Player,
    s_i: usize,
) -> Result<Option<MixedStrategy>> {
    check_member(game, r, i, s_i)?;
    let j = i.other();
    let m = r.strategies(j).len();
    // variables: belief weights, then the common lower bound delta
    let mut lp = LinearProgram::new(m + 1);
    lp.objective[m] = Rational::one();
    for row in best_response_rows(game, r, i, s_i, m + 1) {
        lp.add(row, Relation::Ge, Rational::zero());
    }
    for col in 0..m {
        let mut row = vec![Rational::zero(); m + 1];
        row[col] = Rational::one();
        row[m] = -Rational::one();
        lp.add(row, Relation::Ge, Rational::zero());
    }
    let mut simplex = vec![Rational::one(); m];
    simplex.push(Rational::zero());
    lp.add(simplex, Relation::Eq, Rational::one());
    match lp.solve() {
        LpOutcome::Optimal { x, value } if value.is_positive() => {
            Ok(Some(mixture_over(game, j, r.strategies(j), &x[..m])))
        }
        LpOutcome::Optimal { .. } | LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => unreachable!("delta is at most 1"),
    }
}

/// `u_i(dom, s_j) > u_i(s_i, s_j)` for every opponent strategy in `r`.
pub fn verifies_strict(
    game: &Game,
    r: &Restriction,
    i: Player,
    s_i: usize,
    dom: &MixedStrategy,
) -> bool {
    dom.owner() == i
        && dom.weight(s_i).is_zero()
        && dom.support().iter().all(|&k| r.contains(i, k))
        && r.strategies(i.other())
            .iter()
            .all(|&s_j| mixed_utility(game, i, dom, s_j) > *game.utility(i, s_i, s_j))
}

/// `u_i(dom, ·) >= u_i(s_i, ·)` on the restriction, strictly somewhere.
pub fn verifies_weak(
    game: &Game,
    r: &Restriction,
    i: Player,
    s_i: usize,
    dom: &MixedStrategy,
) -> bool {
    let opp = r.strategies(i.other());
    dom.owner() == i
        && dom.weight(s_i).is_zero()
        && dom.support().iter().all(|&k| r.contains(i, k))
        && opp
            .iter()
            .all(|&s_j| mixed_utility(game, i, dom, s_j) >= *game.utility(i, s_i, s_j))
        && opp
            .iter()
            .any(|&s_j| mixed_utility(game, i, dom, s_j) > *game.utility(i, s_i, s_j))
}

/// `u_i(mix, s_j)` for a mixture of `i`'s own strategies.
pub fn mixed_utility(game: &Game, i: Player, mix: &MixedStrategy, s_j: usize) -> Rational {
    mix.support()
        .into_iter()
        .map(|k| mix.weight(k) * game.utility(i, k, s_j))
        .sum()
}

/// Whether `s_i` maximizes expected utility against `belief` among `candidates`.
pub fn is_best_response(
    game: &Game,
    i: Player,
    s_i: usize,
    belief: &MixedStrategy,
    candidates: &[usize],
) -> bool {
    let own = game.expected_against(i, s_i, belief.weights());
    candidates
        .iter()
        .all(|&k| game.expected_against(i, k, belief.weights()) <= own)
}

fn round_of(game: &Game, r: &Restriction, phase: Phase) -> Result<Vec<Elimination>> {
    let mut out = Vec::new();
    for p in Player::BOTH {
        for &s in r.strategies(p) {
            let found = match phase {
                Phase::Weak => weakly_dominated(game, r, p, s)?,
                Phase::Strict => strictly_dominated(game, r, p, s)?,
            };
            if let Some(dominator) = found {
                out.push(Elimination {
                    player: p,
                    strategy: s,
                    dominator,
                });
            }
        }
    }
    Ok(out)
}

fn strict_to_fixed_point(
    game: &Game,
    mut r: Restriction,
    trace: &mut EliminationTrace,
) -> Restriction {
    loop {
        let eliminations = round_of(game, &r, Phase::Strict).expect("members of r");
        if eliminations.is_empty() {
            return r;
        }
        let before = r.clone();
        r.remove_all(&eliminations);
        trace.rounds.push(Round {
            phase: Phase::Strict,
            before,
            eliminations,
        });
    }
}

/// One simultaneous round of weak-dominance elimination in the full game,
/// then iterated strict dominance to a fixed point.
pub fn dekel_fudenberg(game: &Game) -> (Restriction, EliminationTrace) {
    let mut trace = EliminationTrace::default();
    let mut r = Restriction::full(game);
    let eliminations = round_of(game, &r, Phase::Weak).expect("members of r");
    if !eliminations.is_empty() {
        let before = r.clone();
        r.remove_all(&eliminations);
        trace.rounds.push(Round {
            phase: Phase::Weak,
            before,
            eliminations,
        });
    }
    let r = strict_to_fixed_point(game, r, &mut trace);
    (r, trace)
}

/// Iterated simultaneous elimination of strictly dominated strategies.
pub fn iesds(game: &Game) -> (Restriction, EliminationTrace) {
    let mut trace = EliminationTrace::default();
    let r = strict_to_fixed_point(game, Restriction::full(game), &mut trace);
    (r, trace)
}
