//! Finite two-player strategic-form games with exact payoffs.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::One, Player::Two];

    pub fn index(self) -> usize {
        match self {
            Player::One => 0,
            Player::Two => 1,
        }
    }

    pub fn other(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }

    pub fn from_index(i: usize) -> Player {
        match i {
            0 => Player::One,
            1 => Player::Two,
            _ => panic!("player index {i} out of range"),
        }
    }

    /// Parses the 1-based player keys used in every file format.
    pub fn parse(s: &str) -> Result<Player> {
        match s {
            "1" => Ok(Player::One),
            "2" => Ok(Player::Two),
            _ => Err(Error::Unknown {
                kind: "player",
                label: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index() + 1)
    }
}

/// A finite 2-player game in strategic form.
///
/// Strategies are addressed by their index in the player's list; labels keep
/// their file order, which is also the tie-breaking order everywhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Game {
    players: [String; 2],
    strategies: [Vec<String>; 2],
    /// `payoffs[s1][s2] = (u_1, u_2)`
    payoffs: Vec<Vec<[Rational; 2]>>,
}

impl Game {
    pub fn new(
        players: [String; 2],
        strategies: [Vec<String>; 2],
        payoffs: Vec<Vec<[Rational; 2]>>,
    ) -> Result<Game> {
        for (i, list) in strategies.iter().enumerate() {
            if list.is_empty() {
                return Err(Error::input(format!("player {} has no strategies", i + 1)));
            }
            let mut seen = HashSet::new();
            for label in list {
                if label.is_empty() || label.contains(',') {
                    return Err(Error::input(format!(
                        "strategy label {label:?} must be nonempty and must not contain ','"
                    )));
                }
                if !seen.insert(label) {
                    return Err(Error::input(format!(
                        "duplicate strategy label {label:?} for player {}",
                        i + 1
                    )));
                }
            }
        }
        if payoffs.len() != strategies[0].len()
            || payoffs.iter().any(|row| row.len() != strategies[1].len())
        {
            return Err(Error::input("payoff table does not match strategy sets"));
        }
        Ok(Game {
            players,
            strategies,
            payoffs,
        })
    }

    /// Builds a game with players named "1" and "2" from integer payoffs.
    pub fn from_integers(rows: &[&str], cols: &[&str], table: &[Vec<(i64, i64)>]) -> Result<Game> {
        let payoffs = table
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&(a, b)| [Rational::from_integer(a), Rational::from_integer(b)])
                    .collect()
            })
            .collect();
        Game::new(
            ["1".to_string(), "2".to_string()],
            [
                rows.iter().map(|s| s.to_string()).collect(),
                cols.iter().map(|s| s.to_string()).collect(),
            ],
            payoffs,
        )
    }

    pub fn player_name(&self, p: Player) -> &str {
        &self.players[p.index()]
    }

    pub fn strategies(&self, p: Player) -> &[String] {
        &self.strategies[p.index()]
    }

    pub fn num_strategies(&self, p: Player) -> usize {
        self.strategies[p.index()].len()
    }

    pub fn strategy_label(&self, p: Player, s: usize) -> &str {
        &self.strategies[p.index()][s]
    }

    pub fn strategy_index(&self, p: Player, label: &str) -> Result<usize> {
        self.strategies[p.index()]
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Unknown {
                kind: "strategy",
                label: format!("{label} (player {p})"),
            })
    }

    /// `u_p(own, opp)` where `own` is a strategy of `p` and `opp` one of the opponent.
    pub fn utility(&self, p: Player, own: usize, opp: usize) -> &Rational {
        match p {
            Player::One => &self.payoffs[own][opp][0],
            Player::Two => &self.payoffs[opp][own][1],
        }
    }

    /// Payoff pair at a profile `(s1, s2)`.
    pub fn payoff_pair(&self, s1: usize, s2: usize) -> &[Rational; 2] {
        &self.payoffs[s1][s2]
    }

    fn check_strategy(&self, p: Player, s: usize) -> Result<()> {
        if s < self.num_strategies(p) {
            Ok(())
        } else {
            Err(Error::Unknown {
                kind: "strategy",
                label: format!("#{s} (player {p})"),
            })
        }
    }

    /// Expected utility of `own` against opponent weights indexed by strategy.
    pub fn expected_against(&self, p: Player, own: usize, weights: &[Rational]) -> Rational {
        weights
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(|(opp, w)| w * self.utility(p, own, opp))
            .sum()
    }

    pub fn to_file(&self) -> GameFile {
        let mut payoffs = BTreeMap::new();
        for (a, row) in self.payoffs.iter().enumerate() {
            for (b, cell) in row.iter().enumerate() {
                payoffs.insert(
                    format!("{},{}", self.strategies[0][a], self.strategies[1][b]),
                    cell.clone(),
                );
            }
        }
        GameFile {
            players: self.players.clone(),
            strategies: self.strategies.clone(),
            payoffs,
        }
    }

    pub fn from_file(file: GameFile) -> Result<Game> {
        let [rows, cols] = &file.strategies;
        let mut payoffs = Vec::with_capacity(rows.len());
        for r in rows {
            let mut row = Vec::with_capacity(cols.len());
            for c in cols {
                let key = format!("{r},{c}");
                let cell = file
                    .payoffs
                    .get(&key)
                    .ok_or_else(|| Error::input(format!("missing payoff cell {key:?}")))?;
                row.push(cell.clone());
            }
            payoffs.push(row);
        }
        if file.payoffs.len() != rows.len() * cols.len() {
            let extra = file
                .payoffs
                .keys()
                .find(|k| {
                    k.split_once(',')
                        .map(|(a, b)| {
                            !rows.contains(&a.to_string()) || !cols.contains(&b.to_string())
                        })
                        .unwrap_or(true)
                })
                .cloned()
                .unwrap_or_default();
            return Err(Error::input(format!(
                "payoff cell {extra:?} names unknown strategies"
            )));
        }
        Game::new(file.players, file.strategies, payoffs)
    }

    pub fn from_json(text: &str) -> Result<Game> {
        let file: GameFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("game file: {e}")))?;
        Game::from_file(file)
    }
}

/// On-disk representation of a [`Game`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub players: [String; 2],
    pub strategies: [Vec<String>; 2],
    pub payoffs: BTreeMap<String, [Rational; 2]>,
}

/// A probability distribution over one player's strategies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedStrategy {
    owner: Player,
    weights: Vec<Rational>,
}

impl MixedStrategy {
    pub fn new(game: &Game, owner: Player, weights: Vec<Rational>) -> Result<MixedStrategy> {
        if weights.len() != game.num_strategies(owner) {
            return Err(Error::input(format!(
                "mixed strategy for player {owner} needs {} weights, got {}",
                game.num_strategies(owner),
                weights.len()
            )));
        }
        if weights.iter().any(Rational::is_negative) {
            return Err(Error::input("mixed strategy has a negative weight"));
        }
        let total: Rational = weights.iter().sum();
        if total != Rational::one() {
            return Err(Error::input(format!(
                "mixed strategy weights sum to {total}, not 1"
            )));
        }
        Ok(MixedStrategy { owner, weights })
    }

    pub fn pure(game: &Game, owner: Player, s: usize) -> MixedStrategy {
        let mut weights = vec![Rational::zero(); game.num_strategies(owner)];
        weights[s] = Rational::one();
        MixedStrategy { owner, weights }
    }

    /// Builds a mixed strategy from `(strategy, weight)` pairs.
    pub fn from_pairs(
        game: &Game,
        owner: Player,
        pairs: impl IntoIterator<Item = (usize, Rational)>,
    ) -> Result<MixedStrategy> {
        let mut weights = vec![Rational::zero(); game.num_strategies(owner)];
        for (s, w) in pairs {
            game.check_strategy(owner, s)?;
            weights[s] += w;
        }
        MixedStrategy::new(game, owner, weights)
    }

    pub fn owner(&self) -> Player {
        self.owner
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, s: usize) -> &Rational {
        &self.weights[s]
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len())
            .filter(|&s| self.weights[s].is_positive())
            .collect()
    }

    pub fn render(&self, game: &Game) -> String {
        let parts: Vec<String> = self
            .support()
            .into_iter()
            .map(|s| format!("{}:{}", game.strategy_label(self.owner, s), self.weights[s]))
            .collect();
        format!("{{{}}}", parts.join(", "))
    }

    /// Labelled weights of the support, in strategy order.
    pub fn to_labelled(&self, game: &Game) -> BTreeMap<String, Rational> {
        self.support()
            .into_iter()
            .map(|s| {
                (
                    game.strategy_label(self.owner, s).to_string(),
                    self.weights[s].clone(),
                )
            })
            .collect()
    }
}

/// `u_i(s_i, mix_j)`.
pub fn expected_utility(
    game: &Game,
    i: Player,
    s_i: usize,
    mix_j: &MixedStrategy,
) -> Result<Rational> {
    game.check_strategy(i, s_i)?;
    if mix_j.owner() != i.other() {
        return Err(Error::input(format!(
            "belief of player {i} must be over player {}'s strategies",
            i.other()
        )));
    }
    Ok(game.expected_against(i, s_i, mix_j.weights()))
}

/// Level-by-level expected utilities of `s_i` against a lexicographic belief.
pub fn lex_utility_vector(
    game: &Game,
    i: Player,
    s_i: usize,
    beliefs: &[MixedStrategy],
) -> Result<Vec<Rational>> {
    if beliefs.is_empty() {
        return Err(Error::input(
            "lexicographic belief must have at least one level",
        ));
    }
    beliefs
        .iter()
        .map(|b| expected_utility(game, i, s_i, b))
        .collect()
}

/// Lexicographic comparison: the first differing level decides.
pub fn lex_compare(u: &[Rational], v: &[Rational]) -> Result<Ordering> {
    if u.len() != v.len() {
        return Err(Error::input(format!(
            "cannot compare utility vectors of lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    Ok(u.iter()
        .zip(v)
        .map(|(a, b)| a.cmp(b))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal))
}
