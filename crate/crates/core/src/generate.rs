//! Random games and random valid models for property tests.
//!
//! Models are built from belief cells: for each player the worlds sharing a
//! strategy are split into cells containing every opponent strategy, and
//! each world points at one cell of its own group. This yields KD45 frames
//! with constant strategies, and any cell-wise belief is automatically
//! constant on accessible worlds.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::distribution::Distribution;
use crate::game::{Game, Player};
use crate::kripke::{ProbKripkeModel, StandardKripkeModel};
use crate::ordered::OrderedKripkeModel;
use crate::rational::Rational;

/// A game with 1 to `max_strategies` strategies per player and integer
/// payoffs in `0..=max_payoff`. Player 1 plays `a1, a2, ...`, player 2
/// `b1, b2, ...`.
pub fn random_game<R: Rng>(rng: &mut R, max_strategies: usize, max_payoff: i64) -> Game {
    let rows = rng.gen_range(1..=max_strategies);
    let cols = rng.gen_range(1..=max_strategies);
    random_game_of_size(rng, rows, cols, max_payoff)
}

pub fn random_game_of_size<R: Rng>(rng: &mut R, rows: usize, cols: usize, max_payoff: i64) -> Game {
    let r: Vec<String> = (1..=rows).map(|i| format!("a{i}")).collect();
    let c: Vec<String> = (1..=cols).map(|i| format!("b{i}")).collect();
    let payoffs: Vec<Vec<(i64, i64)>> = (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| (rng.gen_range(0..=max_payoff), rng.gen_range(0..=max_payoff)))
                .collect()
        })
        .collect();
    let r: Vec<&str> = r.iter().map(String::as_str).collect();
    let c: Vec<&str> = c.iter().map(String::as_str).collect();
    Game::from_integers(&r, &c, &payoffs).expect("generated game is well formed")
}

/// Worlds with strategy profiles, and per player the belief cells and the
/// cell each world points at.
#[derive(Clone, Debug)]
pub struct CellFrame {
    pub game: Game,
    pub sigma: [Vec<usize>; 2],
    pub cells: [Vec<Vec<usize>>; 2],
    pub points_to: [Vec<usize>; 2],
}

impl CellFrame {
    pub fn num_worlds(&self) -> usize {
        self.sigma[0].len()
    }

    pub fn base(&self) -> StandardKripkeModel {
        let access = Player::BOTH.map(|p| {
            self.points_to[p.index()]
                .iter()
                .map(|&c| {
                    self.cells[p.index()][c]
                        .iter()
                        .copied()
                        .collect::<BTreeSet<_>>()
                })
                .collect()
        });
        StandardKripkeModel::new(
            self.game.clone(),
            (1..=self.num_worlds()).map(|i| format!("w{i}")).collect(),
            access,
            self.sigma.clone(),
        )
        .expect("generated frame is well formed")
    }
}

/// Every profile appears once or twice; cells of each group contain every
/// opponent strategy; worlds left out of all cells point at a random cell.
pub fn random_frame<R: Rng>(rng: &mut R, game: &Game) -> CellFrame {
    let n = [
        game.num_strategies(Player::One),
        game.num_strategies(Player::Two),
    ];
    let mut profiles = Vec::new();
    for a in 0..n[0] {
        for b in 0..n[1] {
            for _ in 0..rng.gen_range(1..=2) {
                profiles.push((a, b));
            }
        }
    }
    profiles.shuffle(rng);
    let sigma = [
        profiles.iter().map(|p| p.0).collect::<Vec<_>>(),
        profiles.iter().map(|p| p.1).collect::<Vec<_>>(),
    ];
    let total = profiles.len();
    let mut cells: [Vec<Vec<usize>>; 2] = [Vec::new(), Vec::new()];
    let mut points_to: [Vec<usize>; 2] = [vec![0; total], vec![0; total]];
    for p in Player::BOTH {
        let (i, j) = (p.index(), p.other().index());
        for s in 0..n[i] {
            let by_opp: Vec<Vec<usize>> = (0..n[j])
                .map(|t| {
                    let mut ws: Vec<usize> = (0..total)
                        .filter(|&w| sigma[i][w] == s && sigma[j][w] == t)
                        .collect();
                    ws.shuffle(rng);
                    ws
                })
                .collect();
            let most = by_opp
                .iter()
                .map(Vec::len)
                .min()
                .expect("opponent has strategies");
            let m = rng.gen_range(1..=most);
            let first = cells[i].len();
            let mut group: Vec<Vec<usize>> = vec![Vec::new(); m];
            let mut outsiders = Vec::new();
            for ws in &by_opp {
                for (k, &w) in ws.iter().enumerate() {
                    if k < m {
                        group[k].push(w);
                    } else if rng.gen_bool(0.5) {
                        group[rng.gen_range(0..m)].push(w);
                    } else {
                        outsiders.push(w);
                    }
                }
            }
            for (c, cell) in group.iter_mut().enumerate() {
                cell.sort_unstable();
                for &w in cell.iter() {
                    points_to[i][w] = first + c;
                }
            }
            for w in outsiders {
                points_to[i][w] = first + rng.gen_range(0..m);
            }
            cells[i].extend(group);
        }
    }
    CellFrame {
        game: game.clone(),
        sigma,
        cells,
        points_to,
    }
}

fn random_weights<R: Rng>(rng: &mut R, support: &[usize], max_weight: i64) -> Distribution<usize> {
    let raw: Vec<i64> = support
        .iter()
        .map(|_| rng.gen_range(1..=max_weight))
        .collect();
    let total: i64 = raw.iter().sum();
    Distribution::from_weights(
        support
            .iter()
            .zip(raw)
            .map(|(&w, x)| (w, Rational::new(x, total))),
    )
}

fn random_subset<R: Rng>(rng: &mut R, items: &[usize]) -> Vec<usize> {
    loop {
        let s: Vec<usize> = items
            .iter()
            .copied()
            .filter(|_| rng.gen_bool(0.5))
            .collect();
        if !s.is_empty() {
            return s;
        }
    }
}

/// Random injective levels over `cell` covering every opponent strategy.
/// With `structural`, levels are an ordered partition of the cell.
fn random_levels<R: Rng>(
    rng: &mut R,
    cell: &[usize],
    structural: bool,
) -> Vec<Distribution<usize>> {
    if structural {
        let mut ws = cell.to_vec();
        ws.shuffle(rng);
        let k = rng.gen_range(1..=ws.len().min(3));
        let mut cuts: Vec<usize> = (1..ws.len()).collect();
        cuts.shuffle(rng);
        let mut cuts: Vec<usize> = cuts.into_iter().take(k - 1).collect();
        cuts.sort_unstable();
        cuts.push(ws.len());
        let mut start = 0;
        let mut out = Vec::new();
        for end in cuts {
            out.push(random_weights(rng, &ws[start..end], 3));
            start = end;
        }
        return out;
    }
    let k = rng.gen_range(1..=3);
    let mut out: Vec<Distribution<usize>> = Vec::new();
    for _ in 0..k {
        let support = random_subset(rng, cell);
        let d = random_weights(rng, &support, 3);
        if !out.contains(&d) {
            out.push(d);
        }
    }
    let covered: BTreeSet<usize> = out.iter().flat_map(|d| d.support().copied()).collect();
    if covered.len() < cell.len() {
        let tail = Distribution::uniform(cell.iter().copied());
        if !out.contains(&tail) {
            out.push(tail);
        }
    }
    out
}

fn ordered_on<R: Rng>(rng: &mut R, frame: &CellFrame, structural: bool) -> OrderedKripkeModel {
    let per_cell: [Vec<Vec<Distribution<usize>>>; 2] = Player::BOTH.map(|p| {
        frame.cells[p.index()]
            .iter()
            .map(|c| random_levels(rng, c, structural))
            .collect()
    });
    let lambda = Player::BOTH.map(|p| {
        frame.points_to[p.index()]
            .iter()
            .map(|&c| per_cell[p.index()][c].clone())
            .collect()
    });
    OrderedKripkeModel::new(frame.base(), lambda).expect("generated model is well formed")
}

/// A valid cautious ordered model of `game`. Level supports may overlap
/// and need not cover the accessible worlds.
pub fn random_cautious_ordered<R: Rng>(rng: &mut R, game: &Game) -> OrderedKripkeModel {
    let frame = random_frame(rng, game);
    ordered_on(rng, &frame, false)
}

/// A valid cautious ordered model whose levels partition each accessible set.
pub fn random_structural_ordered<R: Rng>(rng: &mut R, game: &Game) -> OrderedKripkeModel {
    let frame = random_frame(rng, game);
    ordered_on(rng, &frame, true)
}

/// A valid probabilistic model whose beliefs have full support on each
/// cell, with every world either heavy (weight 4 to 8) or light (weight 1).
pub fn random_cautious_prob<R: Rng>(rng: &mut R, game: &Game) -> ProbKripkeModel {
    let frame = random_frame(rng, game);
    let per_cell: [Vec<Distribution<usize>>; 2] = Player::BOTH.map(|p| {
        frame.cells[p.index()]
            .iter()
            .map(|c| {
                let raw: Vec<i64> = c
                    .iter()
                    .map(|_| {
                        if rng.gen_bool(0.5) {
                            rng.gen_range(4..=8)
                        } else {
                            1
                        }
                    })
                    .collect();
                let total: i64 = raw.iter().sum();
                Distribution::from_weights(
                    c.iter()
                        .zip(raw)
                        .map(|(&w, x)| (w, Rational::new(x, total))),
                )
            })
            .collect()
    });
    let p = Player::BOTH.map(|pl| {
        frame.points_to[pl.index()]
            .iter()
            .map(|&c| per_cell[pl.index()][c].clone())
            .collect()
    });
    ProbKripkeModel::new(frame.base(), p).expect("generated model is well formed")
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::epsilon::check_prob_caution;

    #[test]
    fn generated_models_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let g = random_game(&mut rng, 3, 3);
            let o = random_cautious_ordered(&mut rng, &g);
            assert!(o.validate().is_empty(), "{:?}", o.validate());
            assert!(o.check_caution().is_empty());
            let s = random_structural_ordered(&mut rng, &g);
            assert!(s.validate().is_empty());
            assert!(s.check_caution().is_empty());
            assert!(s.check_structural_conditions().holds());
            let p = random_cautious_prob(&mut rng, &g);
            assert!(p.validate().is_empty());
            assert!(check_prob_caution(&p).is_empty());
        }
    }

    #[test]
    fn games_stay_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let g = random_game(&mut rng, 3, 3);
            for p in Player::BOTH {
                assert!((1..=3).contains(&g.num_strategies(p)));
            }
            for a in 0..g.num_strategies(Player::One) {
                for b in 0..g.num_strategies(Player::Two) {
                    for x in g.payoff_pair(a, b) {
                        assert!(*x >= Rational::zero() && *x <= Rational::from_integer(3));
                    }
                }
            }
        }
    }
}
