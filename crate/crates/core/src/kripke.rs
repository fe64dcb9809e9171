//! Standard and probabilistic Kripke models of a game, their KD45 validation,
//! the belief and common belief operators, and the rationality event.

use std::collections::{BTreeSet, HashMap};

use crate::distribution::{box_operator, Distribution, EventSet};
use crate::dominance::{iesds, justifying_belief, Restriction};
use crate::error::{Error, Result};
use crate::game::{Game, Player};
use crate::rational::Rational;
use crate::violation::{Violation, ViolationKind};

/// Worlds, per-player accessibility and per-player strategy assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StandardKripkeModel {
    pub game: Game,
    worlds: Vec<String>,
    access: [Vec<BTreeSet<usize>>; 2],
    sigma: [Vec<usize>; 2],
}

impl StandardKripkeModel {
    /// Checks shape only (sizes, indices, unique labels); axioms are checked by
    /// [`StandardKripkeModel::validate`].
    pub fn new(
        game: Game,
        worlds: Vec<String>,
        access: [Vec<BTreeSet<usize>>; 2],
        sigma: [Vec<usize>; 2],
    ) -> Result<Self> {
        let n = worlds.len();
        if n == 0 {
            return Err(Error::input("a model needs at least one world"));
        }
        let mut seen = BTreeSet::new();
        for w in &worlds {
            if !seen.insert(w) {
                return Err(Error::input(format!("duplicate world label {w:?}")));
            }
        }
        for p in Player::BOTH {
            let acc = &access[p.index()];
            let sig = &sigma[p.index()];
            if acc.len() != n || sig.len() != n {
                return Err(Error::input(format!(
                    "player {p}: accessibility and strategy maps must cover all {n} worlds"
                )));
            }
            if acc.iter().flatten().any(|&v| v >= n) {
                return Err(Error::input(format!(
                    "player {p}: access names an unknown world"
                )));
            }
            if sig.iter().any(|&s| s >= game.num_strategies(p)) {
                return Err(Error::input(format!(
                    "player {p}: sigma names an unknown strategy"
                )));
            }
        }
        Ok(StandardKripkeModel {
            game,
            worlds,
            access,
            sigma,
        })
    }

    pub fn num_worlds(&self) -> usize {
        self.worlds.len()
    }

    pub fn world_labels(&self) -> &[String] {
        &self.worlds
    }

    pub fn world_label(&self, w: usize) -> &str {
        &self.worlds[w]
    }

    pub fn world_index(&self, label: &str) -> Result<usize> {
        self.worlds
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Unknown {
                kind: "world",
                label: label.to_string(),
            })
    }

    pub fn access(&self, p: Player, w: usize) -> &BTreeSet<usize> {
        &self.access[p.index()][w]
    }

    pub fn sigma(&self, p: Player, w: usize) -> usize {
        self.sigma[p.index()][w]
    }

    pub fn profile(&self, w: usize) -> (usize, usize) {
        (self.sigma[0][w], self.sigma[1][w])
    }

    pub fn all_worlds(&self) -> EventSet {
        EventSet::all(self.num_worlds())
    }

    pub fn event(&self, labels: &[&str]) -> Result<EventSet> {
        labels.iter().map(|l| self.world_index(l)).collect()
    }

    pub fn event_labels(&self, e: &EventSet) -> Vec<String> {
        e.iter().map(|w| self.worlds[w].clone()).collect()
    }

    pub fn render_event(&self, e: &EventSet) -> String {
        format!("{{{}}}", self.event_labels(e).join(", "))
    }

    fn label_list(&self, ws: &[usize]) -> String {
        ws.iter()
            .map(|&w| self.worlds[w].as_str())
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// KD45 and strategy-constancy violations; empty iff the model is valid.
    ///
    /// Each condition is reported at most once per (player, world).
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for p in Player::BOTH {
            for w in 0..self.num_worlds() {
                let rw = self.access(p, w);
                if rw.is_empty() {
                    out.push(Violation::new(
                        ViolationKind::Seriality,
                        p,
                        vec![w],
                        format!("R_{p}({}) is empty", self.worlds[w]),
                    ));
                }
                let trans = rw.iter().find_map(|&v| {
                    self.access(p, v)
                        .iter()
                        .find(|x| !rw.contains(x))
                        .map(|&x| (v, x))
                });
                if let Some((v, x)) = trans {
                    out.push(Violation::new(
                        ViolationKind::Transitivity,
                        p,
                        vec![w, v, x],
                        format!(
                            "{} -> {} -> {} but {} is not accessible from {}",
                            self.worlds[w],
                            self.worlds[v],
                            self.worlds[x],
                            self.worlds[x],
                            self.worlds[w]
                        ),
                    ));
                }
                let eucl = rw.iter().find_map(|&v| {
                    rw.iter()
                        .find(|x| !self.access(p, v).contains(x))
                        .map(|&x| (v, x))
                });
                if let Some((v, x)) = eucl {
                    out.push(Violation::new(
                        ViolationKind::Euclideanness,
                        p,
                        vec![w, v, x],
                        format!(
                            "{} and {} are accessible from {} but {} is not accessible from {}",
                            self.worlds[v],
                            self.worlds[x],
                            self.worlds[w],
                            self.worlds[x],
                            self.worlds[v]
                        ),
                    ));
                }
                if let Some(&v) = rw.iter().find(|&&v| self.sigma(p, v) != self.sigma(p, w)) {
                    out.push(Violation::new(
                        ViolationKind::SigmaConstancy,
                        p,
                        vec![w, v],
                        format!(
                            "sigma_{p}({}) = {} but accessible {} has {}",
                            self.worlds[w],
                            self.game.strategy_label(p, self.sigma(p, w)),
                            self.worlds[v],
                            self.game.strategy_label(p, self.sigma(p, v))
                        ),
                    ));
                }
            }
        }
        out
    }

    /// `B_i(E) = {w : R_i(w) ⊆ E}`.
    pub fn belief(&self, p: Player, e: &EventSet) -> EventSet {
        box_operator(self.num_worlds(), e, |w| self.access(p, w).iter().copied())
    }

    /// `CB(E) = {w : R_1(w) ∪ R_2(w) ⊆ E}` (one-step mutual belief).
    pub fn common_belief(&self, e: &EventSet) -> EventSet {
        box_operator(self.num_worlds(), e, |w| {
            self.access(Player::One, w)
                .iter()
                .chain(self.access(Player::Two, w).iter())
                .copied()
        })
    }

    pub(crate) fn describe_worlds(&self, ws: &[usize]) -> String {
        self.label_list(ws)
    }
}

/// Per-player rational events and their intersection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rationality {
    pub per_player: [EventSet; 2],
    pub all: EventSet,
}

impl Rationality {
    pub fn of(&self, p: Player) -> &EventSet {
        &self.per_player[p.index()]
    }

    pub(crate) fn from_per_player(per_player: [EventSet; 2]) -> Self {
        let all = per_player[0].intersection(&per_player[1]);
        Rationality { per_player, all }
    }
}

/// A standard Kripke model with a belief `p_i(w)` at every world.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbKripkeModel {
    pub base: StandardKripkeModel,
    p: [Vec<Distribution<usize>>; 2],
}

impl ProbKripkeModel {
    pub fn new(base: StandardKripkeModel, p: [Vec<Distribution<usize>>; 2]) -> Result<Self> {
        let n = base.num_worlds();
        for pl in Player::BOTH {
            let ps = &p[pl.index()];
            if ps.len() != n {
                return Err(Error::input(format!(
                    "player {pl}: probability map must cover all {n} worlds"
                )));
            }
            if ps.iter().any(|d| d.iter().any(|(&v, _)| v >= n)) {
                return Err(Error::input(format!(
                    "player {pl}: probability names an unknown world"
                )));
            }
        }
        Ok(ProbKripkeModel { base, p })
    }

    pub fn game(&self) -> &Game {
        &self.base.game
    }

    pub fn num_worlds(&self) -> usize {
        self.base.num_worlds()
    }

    pub fn prob(&self, pl: Player, w: usize) -> &Distribution<usize> {
        &self.p[pl.index()][w]
    }

    /// Base violations plus the probability-measure conditions on `p_i`.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = self.base.validate();
        let b = &self.base;
        for pl in Player::BOTH {
            for w in 0..self.num_worlds() {
                let d = self.prob(pl, w);
                if !d.is_probability() {
                    out.push(Violation::new(
                        ViolationKind::NotAProbability,
                        pl,
                        vec![w],
                        format!(
                            "p_{pl}({}) is not a probability measure (total {})",
                            b.world_label(w),
                            d.total()
                        ),
                    ));
                }
                if let Some(&v) = d.support().find(|v| !b.access(pl, w).contains(v)) {
                    out.push(Violation::new(
                        ViolationKind::SupportOutsideAccess,
                        pl,
                        vec![w, v],
                        format!(
                            "p_{pl}({}) puts weight on {} outside R_{pl}({})",
                            b.world_label(w),
                            b.world_label(v),
                            b.world_label(w)
                        ),
                    ));
                }
                if let Some(&v) = b.access(pl, w).iter().find(|&&v| self.prob(pl, v) != d) {
                    out.push(Violation::new(
                        ViolationKind::ProbabilityConstancy,
                        pl,
                        vec![w, v],
                        format!(
                            "p_{pl}({}) differs from p_{pl}({}) although {} is accessible",
                            b.world_label(w),
                            b.world_label(v),
                            b.world_label(v)
                        ),
                    ));
                }
            }
        }
        out
    }

    /// Opponent strategy weights induced by `p_i(w)`: `Σ_w' p_i(w)(w') σ_j(w')`.
    pub fn induced_belief(&self, pl: Player, w: usize) -> Vec<Rational> {
        induced_weights(&self.base, pl, self.prob(pl, w))
    }

    /// Strategies of `pl` that maximize expected utility at `w`.
    pub fn optimal_strategies(&self, pl: Player, w: usize) -> Vec<usize> {
        best_responses(self.game(), pl, &self.induced_belief(pl, w))
    }

    pub fn is_rational_at(&self, pl: Player, w: usize) -> bool {
        let belief = self.induced_belief(pl, w);
        let own = self
            .game()
            .expected_against(pl, self.base.sigma(pl, w), &belief);
        (0..self.game().num_strategies(pl))
            .all(|s| self.game().expected_against(pl, s, &belief) <= own)
    }

    /// `RAT_i` and `RAT`.
    pub fn rat(&self) -> Rationality {
        let per = Player::BOTH.map(|pl| {
            (0..self.num_worlds())
                .filter(|&w| self.is_rational_at(pl, w))
                .collect()
        });
        Rationality::from_per_player(per)
    }

    pub fn belief(&self, pl: Player, e: &EventSet) -> EventSet {
        self.base.belief(pl, e)
    }

    pub fn common_belief(&self, e: &EventSet) -> EventSet {
        self.base.common_belief(e)
    }
}

pub(crate) fn induced_weights(
    base: &StandardKripkeModel,
    pl: Player,
    d: &Distribution<usize>,
) -> Vec<Rational> {
    let j = pl.other();
    let mut weights = vec![Rational::zero(); base.game.num_strategies(j)];
    for (&v, wt) in d.iter() {
        weights[base.sigma(j, v)] += wt;
    }
    weights
}

pub(crate) fn best_responses(game: &Game, pl: Player, belief: &[Rational]) -> Vec<usize> {
    let values: Vec<Rational> = (0..game.num_strategies(pl))
        .map(|s| game.expected_against(pl, s, belief))
        .collect();
    let best = values.iter().max().cloned().expect("nonempty strategy set");
    (0..values.len()).filter(|&s| values[s] == best).collect()
}

/// Outcome of checking that common belief in rationality implies IESDS survival.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IesdsCheck {
    pub cb_rat: EventSet,
    pub survivors: Restriction,
    /// Worlds in `CB(RAT)` whose profile does not survive IESDS.
    pub failures: Vec<usize>,
}

impl IesdsCheck {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// For every `w ∈ CB(RAT)`, checks `σ(w) ∈ S^IEDS`.
pub fn check_common_belief_rationality(model: &ProbKripkeModel) -> IesdsCheck {
    let rat = model.rat();
    let cb_rat = model.common_belief(&rat.all);
    let (survivors, _) = iesds(model.game());
    let failures = cb_rat
        .iter()
        .filter(|&w| {
            let (a, b) = model.base.profile(w);
            !(survivors.contains(Player::One, a) && survivors.contains(Player::Two, b))
        })
        .collect();
    IesdsCheck {
        cb_rat,
        survivors,
        failures,
    }
}

/// Builds a probabilistic model with a world `w`, `σ(w) = profile`, in `CB(RAT)`.
///
/// Worlds are the IESDS-surviving profiles. Player `i` at `(s_1, s_2)` considers
/// possible the worlds that keep `s_i` and vary the opponent over the support
/// of a justifying belief for `s_i`, weighted by that belief.
pub fn construct_ieds_witness(
    game: &Game,
    profile: (usize, usize),
) -> Result<(ProbKripkeModel, usize)> {
    let (survivors, _) = iesds(game);
    if !(survivors.contains(Player::One, profile.0) && survivors.contains(Player::Two, profile.1)) {
        return Err(Error::input(format!(
            "profile ({}, {}) does not survive iterated strict dominance",
            game.strategies(Player::One)
                .get(profile.0)
                .map_or("?", |s| s.as_str()),
            game.strategies(Player::Two)
                .get(profile.1)
                .map_or("?", |s| s.as_str()),
        )));
    }
    let rows = survivors.strategies(Player::One);
    let cols = survivors.strategies(Player::Two);
    let mut index = HashMap::new();
    let mut worlds = Vec::new();
    for &a in rows {
        for &b in cols {
            index.insert((a, b), worlds.len());
            worlds.push(format!(
                "{}.{}",
                game.strategy_label(Player::One, a),
                game.strategy_label(Player::Two, b)
            ));
        }
    }
    let n = worlds.len();
    let mut access: [Vec<BTreeSet<usize>>; 2] =
        [vec![BTreeSet::new(); n], vec![BTreeSet::new(); n]];
    let mut sigma: [Vec<usize>; 2] = [vec![0; n], vec![0; n]];
    let mut p: [Vec<Distribution<usize>>; 2] = [
        vec![Distribution::from_weights([]); n],
        vec![Distribution::from_weights([]); n],
    ];
    let beliefs: [HashMap<usize, _>; 2] = Player::BOTH.map(|pl| {
        survivors
            .strategies(pl)
            .iter()
            .map(|&s| {
                let b = justifying_belief(game, &survivors, pl, s)
                    .expect("survivor")
                    .expect("IESDS survivors have justifying beliefs");
                (s, b)
            })
            .collect()
    });
    for (&(a, b), &w) in &index {
        sigma[0][w] = a;
        sigma[1][w] = b;
        for pl in Player::BOTH {
            let own = if pl == Player::One { a } else { b };
            let belief = &beliefs[pl.index()][&own];
            let d = Distribution::from_weights(belief.support().into_iter().map(|opp| {
                let key = if pl == Player::One {
                    (own, opp)
                } else {
                    (opp, own)
                };
                (index[&key], belief.weight(opp).clone())
            }));
            access[pl.index()][w] = d.support_set();
            p[pl.index()][w] = d;
        }
    }
    let base = StandardKripkeModel::new(game.clone(), worlds, access, sigma)?;
    let model = ProbKripkeModel::new(base, p)?;
    Ok((model, index[&profile]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{four_world_prob, myerson};
    use crate::violation::kinds;

    fn set(ws: &[usize]) -> EventSet {
        ws.iter().copied().collect()
    }

    fn frame(
        game: Game,
        access: [Vec<Vec<usize>>; 2],
        sigma: [Vec<usize>; 2],
    ) -> StandardKripkeModel {
        let n = access[0].len();
        let worlds = (1..=n).map(|i| format!("w{i}")).collect();
        let access = access.map(|a| a.into_iter().map(|s| s.into_iter().collect()).collect());
        StandardKripkeModel::new(game, worlds, access, sigma).unwrap()
    }

    #[test]
    fn seriality_violation_names_world() {
        let m = frame(
            myerson(),
            [vec![vec![0], vec![]], vec![vec![0], vec![1]]],
            [vec![0, 0], vec![0, 1]],
        );
        let v = m.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::Seriality);
        assert_eq!(v[0].worlds, vec![1]);
    }

    #[test]
    fn transitivity_violation_without_euclid() {
        let m = frame(
            myerson(),
            [
                vec![vec![1], vec![1, 2], vec![1, 2]],
                vec![vec![0], vec![1], vec![2]],
            ],
            [vec![0, 0, 0], vec![0, 0, 0]],
        );
        assert_eq!(kinds(&m.validate()), vec![ViolationKind::Transitivity]);
    }

    #[test]
    fn euclid_violation_without_transitivity() {
        let m = frame(
            myerson(),
            [
                vec![vec![1, 2], vec![1], vec![2]],
                vec![vec![0], vec![1], vec![2]],
            ],
            [vec![0, 0, 0], vec![0, 0, 0]],
        );
        assert_eq!(kinds(&m.validate()), vec![ViolationKind::Euclideanness]);
    }

    #[test]
    fn four_world_prob_is_valid_with_expected_sets() {
        let eps = Rational::new(1, 4);
        let m = four_world_prob(&eps);
        assert!(m.validate().is_empty(), "{:?}", m.validate());
        let rat = m.rat();
        assert_eq!(rat.of(Player::One), &set(&[0, 1]));
        assert_eq!(rat.of(Player::Two), &set(&[0, 2]));
        assert_eq!(rat.all, set(&[0]));
        for pl in Player::BOTH {
            assert!(m.belief(pl, &rat.all).is_empty());
        }
        assert!(m.common_belief(&rat.all).is_empty());
    }

    #[test]
    fn operators_on_whole_and_empty_events() {
        let m = four_world_prob(&Rational::new(1, 3));
        let all = m.base.all_worlds();
        for pl in Player::BOTH {
            assert_eq!(m.belief(pl, &all), all);
            assert!(m.belief(pl, &EventSet::empty()).is_empty());
        }
        assert_eq!(m.common_belief(&all), all);
        let some = set(&[0, 1, 2]);
        let cb = m.common_belief(&some);
        for pl in Player::BOTH {
            assert!(cb.is_subset(&m.belief(pl, &some)));
        }
    }

    #[test]
    fn one_by_one_game_is_all_rational() {
        let g = Game::from_integers(&["X"], &["Y"], &[vec![(0, 0)]]).unwrap();
        let (m, w) = construct_ieds_witness(&g, (0, 0)).unwrap();
        assert_eq!(m.num_worlds(), 1);
        assert_eq!(w, 0);
        assert_eq!(m.rat().all, m.base.all_worlds());
    }

    #[test]
    fn witnesses_for_myerson_profiles() {
        let g = myerson();
        for profile in [(0, 0), (1, 1), (0, 1), (1, 0)] {
            let (m, w) = construct_ieds_witness(&g, profile).unwrap();
            assert!(m.validate().is_empty());
            assert_eq!(m.base.profile(w), profile);
            let check = check_common_belief_rationality(&m);
            assert!(check.holds());
            assert!(check.cb_rat.contains(w));
        }
    }

    #[test]
    fn witness_rejects_non_survivor() {
        let g = Game::from_integers(
            &["C", "D"],
            &["C", "D"],
            &[vec![(3, 3), (0, 5)], vec![(5, 0), (1, 1)]],
        )
        .unwrap();
        assert!(construct_ieds_witness(&g, (0, 0)).is_err());
        let (m, w) = construct_ieds_witness(&g, (1, 1)).unwrap();
        assert_eq!(m.num_worlds(), 1);
        assert!(check_common_belief_rationality(&m).cb_rat.contains(w));
    }

    #[test]
    fn four_world_prob_iesds_check_is_vacuous() {
        let m = four_world_prob(&Rational::new(1, 4));
        let check = check_common_belief_rationality(&m);
        assert!(check.holds());
        assert!(check.cb_rat.is_empty());
    }
}
