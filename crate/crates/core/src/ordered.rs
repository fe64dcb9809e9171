//! Ordered Kripke models: a lexicographic sequence of distributions over the
//! accessible worlds at every world.

use std::cmp::Ordering;

use crate::distribution::{box_operator, Distribution, EventSet};
use crate::dominance::{dekel_fudenberg, Restriction};
use crate::error::{Error, Result};
use crate::game::{lex_compare, Game, Player};
use crate::kripke::{induced_weights, Rationality, StandardKripkeModel};
use crate::rational::Rational;
use crate::violation::{Violation, ViolationKind};

/// `λ_i(w)`: level 0 is the primary belief.
pub type LexBelief = Vec<Distribution<usize>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedKripkeModel {
    pub base: StandardKripkeModel,
    lambda: [Vec<LexBelief>; 2],
}

impl OrderedKripkeModel {
    pub fn new(base: StandardKripkeModel, lambda: [Vec<LexBelief>; 2]) -> Result<Self> {
        let n = base.num_worlds();
        for p in Player::BOTH {
            let l = &lambda[p.index()];
            if l.len() != n {
                return Err(Error::input(format!(
                    "player {p}: lambda must cover all {n} worlds"
                )));
            }
            if l.iter().flatten().any(|d| d.iter().any(|(&v, _)| v >= n)) {
                return Err(Error::input(format!(
                    "player {p}: lambda names an unknown world"
                )));
            }
        }
        Ok(OrderedKripkeModel { base, lambda })
    }

    pub fn game(&self) -> &Game {
        &self.base.game
    }

    pub fn num_worlds(&self) -> usize {
        self.base.num_worlds()
    }

    pub fn lambda(&self, p: Player, w: usize) -> &LexBelief {
        &self.lambda[p.index()][w]
    }

    /// Base violations plus the conditions on every `λ_i(w)`.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = self.base.validate();
        let b = &self.base;
        for p in Player::BOTH {
            for w in 0..self.num_worlds() {
                let seq = self.lambda(p, w);
                let wl = b.world_label(w);
                if seq.is_empty() {
                    out.push(Violation::new(
                        ViolationKind::EmptyLexicographicBelief,
                        p,
                        vec![w],
                        format!("lambda_{p}({wl}) has no levels"),
                    ));
                }
                if let Some(k) = seq.iter().position(|d| !d.is_probability()) {
                    out.push(Violation::new(
                        ViolationKind::NotAProbability,
                        p,
                        vec![w],
                        format!(
                            "level {} of lambda_{p}({wl}) is not a probability measure",
                            k + 1
                        ),
                    ));
                }
                let outside = seq.iter().enumerate().find_map(|(k, d)| {
                    d.support()
                        .find(|v| !b.access(p, w).contains(v))
                        .map(|&v| (k, v))
                });
                if let Some((k, v)) = outside {
                    out.push(Violation::new(
                        ViolationKind::SupportOutsideAccess,
                        p,
                        vec![w, v],
                        format!(
                            "level {} of lambda_{p}({wl}) weights {} outside R_{p}({wl})",
                            k + 1,
                            b.world_label(v)
                        ),
                    ));
                }
                let dup = (0..seq.len())
                    .flat_map(|a| (a + 1..seq.len()).map(move |c| (a, c)))
                    .find(|&(a, c)| seq[a] == seq[c]);
                if let Some((a, c)) = dup {
                    out.push(Violation::new(
                        ViolationKind::LevelInjectivity,
                        p,
                        vec![w],
                        format!(
                            "levels {} and {} of lambda_{p}({wl}) coincide",
                            a + 1,
                            c + 1
                        ),
                    ));
                }
                if let Some(&v) = b.access(p, w).iter().find(|&&v| self.lambda(p, v) != seq) {
                    out.push(Violation::new(
                        ViolationKind::LambdaConstancy,
                        p,
                        vec![w, v],
                        format!(
                            "lambda_{p}({wl}) differs from lambda_{p}({}) although {} is accessible",
                            b.world_label(v),
                            b.world_label(v)
                        ),
                    ));
                }
            }
        }
        out
    }

    /// One violation per `(i, w, s_j)` with no positively weighted world playing `s_j`.
    pub fn check_caution(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for p in Player::BOTH {
            let j = p.other();
            for w in 0..self.num_worlds() {
                for s_j in 0..self.game().num_strategies(j) {
                    let covered = self
                        .lambda(p, w)
                        .iter()
                        .any(|d| d.support().any(|&v| self.base.sigma(j, v) == s_j));
                    if !covered {
                        out.push(Violation::new(
                            ViolationKind::Caution,
                            p,
                            vec![w],
                            format!(
                                "at {} no level of lambda_{p} weights a world where player {j} plays {}",
                                self.base.world_label(w),
                                self.game().strategy_label(j, s_j)
                            ),
                        ));
                    }
                }
            }
        }
        out
    }

    /// Level-wise expected utilities of `s` for `p` at `w`.
    pub fn utility_vector(&self, p: Player, w: usize, s: usize) -> Vec<Rational> {
        self.lambda(p, w)
            .iter()
            .map(|d| {
                self.game()
                    .expected_against(p, s, &induced_weights(&self.base, p, d))
            })
            .collect()
    }

    /// Lexicographic comparison of `s` against `t` for `p` at `w`.
    pub fn lex_prefers(&self, p: Player, w: usize, s: usize, t: usize) -> Result<Ordering> {
        let n = self.game().num_strategies(p);
        if s >= n || t >= n {
            return Err(Error::Unknown {
                kind: "strategy",
                label: format!("#{} (player {p})", s.max(t)),
            });
        }
        if w >= self.num_worlds() {
            return Err(Error::Unknown {
                kind: "world",
                label: format!("#{w}"),
            });
        }
        lex_compare(&self.utility_vector(p, w, s), &self.utility_vector(p, w, t))
    }

    pub fn is_lex_rational_at(&self, p: Player, w: usize) -> bool {
        let own = self.utility_vector(p, w, self.base.sigma(p, w));
        (0..self.game().num_strategies(p)).all(|s| {
            lex_compare(&self.utility_vector(p, w, s), &own).expect("same length")
                != Ordering::Greater
        })
    }

    /// `LRAT_i` and `LRAT`.
    pub fn lrat(&self) -> Rationality {
        let per = Player::BOTH.map(|p| {
            (0..self.num_worlds())
                .filter(|&w| self.is_lex_rational_at(p, w))
                .collect()
        });
        Rationality::from_per_player(per)
    }

    /// `R_i^1(w)`: the support of the primary level.
    pub fn level1_access(&self, p: Player, w: usize) -> EventSet {
        self.lambda(p, w)
            .first()
            .map(|d| d.support().copied().collect())
            .unwrap_or_default()
    }

    /// `B_i^1(E) = {w : R_i^1(w) ⊆ E}`.
    pub fn level1_belief(&self, p: Player, e: &EventSet) -> EventSet {
        box_operator(self.num_worlds(), e, |w| {
            self.level1_access(p, w).as_set().clone().into_iter()
        })
    }

    /// `CB^1(E) = {w : R_1^1(w) ∪ R_2^1(w) ⊆ E}`.
    pub fn common_level1_belief(&self, e: &EventSet) -> EventSet {
        box_operator(self.num_worlds(), e, |w| {
            self.level1_access(Player::One, w)
                .union(&self.level1_access(Player::Two, w))
                .as_set()
                .clone()
                .into_iter()
        })
    }

    pub fn belief(&self, p: Player, e: &EventSet) -> EventSet {
        self.base.belief(p, e)
    }

    pub fn common_belief(&self, e: &EventSet) -> EventSet {
        self.base.common_belief(e)
    }

    /// Disjointness of level supports and coverage of every accessible world.
    pub fn check_structural_conditions(&self) -> StructuralReport {
        let mut violations = Vec::new();
        let b = &self.base;
        for p in Player::BOTH {
            for w in 0..self.num_worlds() {
                let seq = self.lambda(p, w);
                let overlap = (0..seq.len())
                    .flat_map(|a| (a + 1..seq.len()).map(move |c| (a, c)))
                    .find_map(|(a, c)| {
                        seq[a]
                            .support()
                            .find(|v| seq[c].weight(v).is_positive())
                            .map(|&v| (a, c, v))
                    });
                if let Some((a, c, v)) = overlap {
                    violations.push(Violation::new(
                        ViolationKind::DisjointSupports,
                        p,
                        vec![w, v],
                        format!(
                            "levels {} and {} of lambda_{p}({}) both weight {}",
                            a + 1,
                            c + 1,
                            b.world_label(w),
                            b.world_label(v)
                        ),
                    ));
                }
                let missed: Vec<usize> = b
                    .access(p, w)
                    .iter()
                    .copied()
                    .filter(|v| !seq.iter().any(|d| d.weight(v).is_positive()))
                    .collect();
                if !missed.is_empty() {
                    let mut worlds = vec![w];
                    worlds.extend(&missed);
                    violations.push(Violation::new(
                        ViolationKind::Surjection,
                        p,
                        worlds,
                        format!(
                            "no level of lambda_{p}({}) weights {}",
                            b.world_label(w),
                            b.describe_worlds(&missed)
                        ),
                    ));
                }
            }
        }
        StructuralReport {
            disjoint_supports: !violations
                .iter()
                .any(|v| v.kind == ViolationKind::DisjointSupports),
            surjection: !violations
                .iter()
                .any(|v| v.kind == ViolationKind::Surjection),
            violations,
        }
    }

    /// Largest number of levels at any world.
    pub fn depth(&self) -> usize {
        self.lambda
            .iter()
            .flatten()
            .map(Vec::len)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuralReport {
    pub disjoint_supports: bool,
    pub surjection: bool,
    pub violations: Vec<Violation>,
}

impl StructuralReport {
    pub fn holds(&self) -> bool {
        self.disjoint_supports && self.surjection
    }
}

/// Outcome of checking that common level-1 belief in lexicographic
/// rationality implies Dekel-Fudenberg survival.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermissibilityCheck {
    pub cb1_lrat: EventSet,
    pub survivors: Restriction,
    /// Worlds in `CB^1(LRAT)` whose profile is not in `S^DF`.
    pub failures: Vec<usize>,
}

impl PermissibilityCheck {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn check_level1_permissibility(model: &OrderedKripkeModel) -> PermissibilityCheck {
    let lrat = model.lrat();
    let cb1_lrat = model.common_level1_belief(&lrat.all);
    let (survivors, _) = dekel_fudenberg(model.game());
    let failures = cb1_lrat
        .iter()
        .filter(|&w| {
            let (a, b) = model.base.profile(w);
            !(survivors.contains(Player::One, a) && survivors.contains(Player::Two, b))
        })
        .collect();
    PermissibilityCheck {
        cb1_lrat,
        survivors,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::fixtures::{four_world_ordered, myerson};
    use crate::violation::kinds;

    fn set(ws: &[usize]) -> EventSet {
        ws.iter().copied().collect()
    }

    #[test]
    fn four_world_ordered_is_valid_and_cautious() {
        let m = four_world_ordered();
        assert!(m.validate().is_empty(), "{:?}", m.validate());
        assert!(m.check_caution().is_empty());
        assert!(m.check_structural_conditions().holds());
    }

    #[test]
    fn four_world_ordered_sets() {
        let m = four_world_ordered();
        let lrat = m.lrat();
        assert_eq!(lrat.of(Player::One), &set(&[0, 1]));
        assert_eq!(lrat.of(Player::Two), &set(&[0, 2]));
        assert_eq!(lrat.all, set(&[0]));
        assert_eq!(m.common_level1_belief(&lrat.all), set(&[0]));
        assert!(m.common_belief(&lrat.all).is_empty());
        for p in Player::BOTH {
            assert!(m.belief(p, &lrat.all).is_empty());
        }
        // The class of w1 for each player also contains the world that differs
        // only in the opponent's strategy.
        assert_eq!(m.level1_belief(Player::One, &lrat.all), set(&[0, 1]));
        assert_eq!(m.level1_belief(Player::Two, &lrat.all), set(&[0, 2]));
    }

    #[test]
    fn a_strictly_preferred_to_b_everywhere() {
        let m = four_world_ordered();
        for w in 0..m.num_worlds() {
            assert_eq!(
                m.lex_prefers(Player::One, w, 0, 1).unwrap(),
                Ordering::Greater
            );
            assert_eq!(
                m.lex_prefers(Player::One, w, 1, 1).unwrap(),
                Ordering::Equal
            );
            assert_eq!(
                m.lex_prefers(Player::Two, w, 0, 1).unwrap(),
                Ordering::Greater
            );
        }
        assert!(m.lex_prefers(Player::One, 0, 0, 7).is_err());
    }

    fn single_world_d(game: Game) -> OrderedKripkeModel {
        let base = StandardKripkeModel::new(
            game,
            vec!["w".into()],
            [vec![BTreeSet::from([0])], vec![BTreeSet::from([0])]],
            [vec![0], vec![1]],
        )
        .unwrap();
        OrderedKripkeModel::new(
            base,
            [
                vec![vec![Distribution::point(0)]],
                vec![vec![Distribution::point(0)]],
            ],
        )
        .unwrap()
    }

    #[test]
    fn point_belief_on_d_world_gives_indifference() {
        let m = single_world_d(myerson());
        assert_eq!(
            m.lex_prefers(Player::One, 0, 0, 1).unwrap(),
            Ordering::Equal
        );
        assert_eq!(kinds(&m.check_caution()), vec![ViolationKind::Caution]);
        let c = m.check_caution();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].player, Some(Player::One));
        assert!(c[0].message.contains("plays C"));
        assert!(c[1].message.contains("plays B"));
    }

    #[test]
    fn operators_on_trivial_events() {
        let m = four_world_ordered();
        let all = m.base.all_worlds();
        for p in Player::BOTH {
            assert_eq!(m.level1_belief(p, &all), all);
            assert!(m.level1_belief(p, &EventSet::empty()).is_empty());
        }
        assert_eq!(m.common_level1_belief(&all), all);
    }

    #[test]
    fn one_by_one_game_is_all_rational() {
        let g = Game::from_integers(&["X"], &["Y"], &[vec![(2, 5)]]).unwrap();
        let base = StandardKripkeModel::new(
            g,
            vec!["w".into()],
            [vec![BTreeSet::from([0])], vec![BTreeSet::from([0])]],
            [vec![0], vec![0]],
        )
        .unwrap();
        let m = OrderedKripkeModel::new(
            base,
            [
                vec![vec![Distribution::point(0)]],
                vec![vec![Distribution::point(0)]],
            ],
        )
        .unwrap();
        assert!(m.validate().is_empty());
        assert!(m.check_caution().is_empty());
        assert_eq!(m.lrat().all, m.base.all_worlds());
        assert!(check_level1_permissibility(&m).holds());
    }

    #[test]
    fn surjection_and_disjointness_violations() {
        let m = four_world_ordered();
        let mut lambda = m.lambda.clone();
        // drop the second level at player 1's class {w1, w2}
        lambda[0][0].truncate(1);
        lambda[0][1].truncate(1);
        let cut = OrderedKripkeModel::new(m.base.clone(), lambda).unwrap();
        let r = cut.check_structural_conditions();
        assert!(r.disjoint_supports);
        assert!(!r.surjection);
        assert_eq!(r.violations.len(), 2);
        assert!(r.violations.iter().all(|v| v.worlds[1..] == [1]));

        let mut lambda = m.lambda.clone();
        let both = Distribution::uniform([0usize, 1]);
        lambda[0][0][1] = both.clone();
        lambda[0][1][1] = both;
        let overlapping = OrderedKripkeModel::new(m.base.clone(), lambda).unwrap();
        let r = overlapping.check_structural_conditions();
        assert!(!r.disjoint_supports);
        assert!(r.surjection);
    }

    #[test]
    fn duplicate_levels_and_non_constant_lambda_are_reported() {
        let m = four_world_ordered();
        let mut lambda = m.lambda.clone();
        lambda[0][0] = vec![Distribution::point(0), Distribution::point(0)];
        let bad = OrderedKripkeModel::new(m.base.clone(), lambda).unwrap();
        let k = kinds(&bad.validate());
        assert!(k.contains(&ViolationKind::LevelInjectivity));
        assert!(k.contains(&ViolationKind::LambdaConstancy));
    }

    #[test]
    fn four_world_ordered_permissibility_check_holds() {
        let c = check_level1_permissibility(&four_world_ordered());
        assert!(c.holds());
        assert_eq!(c.cb1_lrat, set(&[0]));
    }
}
