//! Small worked models used by tests, the CLI examples and the acceptance suite.

use std::collections::BTreeSet;

use crate::distribution::Distribution;
use crate::game::Game;
use crate::kripke::{ProbKripkeModel, StandardKripkeModel};
use crate::ordered::OrderedKripkeModel;
use crate::rational::Rational;
use crate::types::{LexEpistemicModel, ProbEpistemicModel};

/// Player 1 picks A or B, player 2 picks C or D; only (A, C) pays, (1, 1).
pub fn myerson() -> Game {
    Game::from_integers(
        &["A", "B"],
        &["C", "D"],
        &[vec![(1, 1), (0, 0)], vec![(0, 0), (0, 0)]],
    )
    .expect("fixture game is well formed")
}

/// Worlds w1..w4 play (A,C), (A,D), (B,C), (B,D). Player 1 considers the
/// worlds sharing its strategy, player 2 those sharing its strategy.
fn four_world_frame() -> StandardKripkeModel {
    let cells1 = [BTreeSet::from([0, 1]), BTreeSet::from([2, 3])];
    let cells2 = [BTreeSet::from([0, 2]), BTreeSet::from([1, 3])];
    StandardKripkeModel::new(
        myerson(),
        (1..=4).map(|i| format!("w{i}")).collect(),
        [
            vec![
                cells1[0].clone(),
                cells1[0].clone(),
                cells1[1].clone(),
                cells1[1].clone(),
            ],
            vec![
                cells2[0].clone(),
                cells2[1].clone(),
                cells2[0].clone(),
                cells2[1].clone(),
            ],
        ],
        [vec![0, 0, 1, 1], vec![0, 1, 0, 1]],
    )
    .expect("fixture frame is well formed")
}

/// Cautious ordered model of the four-world frame: each player's primary
/// level is the point on the first world of the cell, the second level the
/// point on the other world.
pub fn four_world_ordered() -> OrderedKripkeModel {
    let lex = |a: usize, b: usize| vec![Distribution::point(a), Distribution::point(b)];
    OrderedKripkeModel::new(
        four_world_frame(),
        [
            vec![lex(0, 1), lex(0, 1), lex(2, 3), lex(2, 3)],
            vec![lex(0, 2), lex(1, 3), lex(0, 2), lex(1, 3)],
        ],
    )
    .expect("fixture model is well formed")
}

/// Probabilistic model of the four-world frame: weight `1 - eps` on the
/// first world of each cell and `eps` on the second.
pub fn four_world_prob(eps: &Rational) -> ProbKripkeModel {
    let mix = |a: usize, b: usize| {
        Distribution::from_weights([(a, Rational::one() - eps), (b, eps.clone())])
    };
    ProbKripkeModel::new(
        four_world_frame(),
        [
            vec![mix(0, 1), mix(0, 1), mix(2, 3), mix(2, 3)],
            vec![mix(0, 2), mix(1, 3), mix(0, 2), mix(1, 3)],
        ],
    )
    .expect("fixture model is well formed")
}

/// One lexicographic type per player: primary level on the paying strategy,
/// second level on the other.
pub fn myerson_lex_types() -> LexEpistemicModel {
    LexEpistemicModel::new(
        myerson(),
        [vec!["th1".into()], vec!["th2".into()]],
        [
            vec![vec![
                Distribution::point((0, 0)),
                Distribution::point((1, 0)),
            ]],
            vec![vec![
                Distribution::point((0, 0)),
                Distribution::point((1, 0)),
            ]],
        ],
    )
    .expect("fixture model is well formed")
}

/// One probabilistic type per player with weight `eps` on the opponent's
/// non-paying strategy.
pub fn myerson_prob_types(eps: &Rational) -> ProbEpistemicModel {
    let b = Distribution::from_weights([((0, 0), Rational::one() - eps), ((1, 0), eps.clone())]);
    ProbEpistemicModel::new(
        myerson(),
        [vec!["t1".into()], vec!["t2".into()]],
        [vec![b.clone()], vec![b]],
    )
    .expect("fixture model is well formed")
}
