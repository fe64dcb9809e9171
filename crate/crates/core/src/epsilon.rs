//! Caution and ε-trembling for probabilistic Kripke models, and the upper-ε
//! belief operators.

use std::fmt;
use std::str::FromStr;

use crate::distribution::{box_operator, EventSet};
use crate::error::{Error, Result};
use crate::game::Player;
use crate::kripke::ProbKripkeModel;
use crate::rational::Rational;
use crate::violation::{Violation, ViolationKind};

/// A threshold in the open interval `(0, 1/2)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Epsilon(Rational);

impl Epsilon {
    pub fn new(value: Rational) -> Result<Epsilon> {
        if value.is_positive() && value < Rational::new(1, 2) {
            Ok(Epsilon(value))
        } else {
            Err(Error::input(format!(
                "epsilon must lie strictly between 0 and 1/2, got {value}"
            )))
        }
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }
}

impl FromStr for Epsilon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Epsilon> {
        Epsilon::new(s.parse()?)
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// How "the accessible world's strategy is not optimal" is read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TremblingReading {
    /// `σ_j(w')` is not optimal for `j` under `p_j(w')`, i.e. `w' ∉ RAT_j`.
    #[default]
    Belief,
    /// `σ_i(w)` is not a best response to the pure strategy `σ_j(w')`.
    Pointwise,
}

impl FromStr for TremblingReading {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "belief" => Ok(TremblingReading::Belief),
            "pointwise" => Ok(TremblingReading::Pointwise),
            other => Err(Error::input(format!(
                "unknown trembling reading {other:?} (expected belief or pointwise)"
            ))),
        }
    }
}

impl fmt::Display for TremblingReading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TremblingReading::Belief => "belief",
            TremblingReading::Pointwise => "pointwise",
        })
    }
}

/// One violation per `(i, w, s_j)` where no supported world plays `s_j`.
pub fn check_prob_caution(model: &ProbKripkeModel) -> Vec<Violation> {
    let mut out = Vec::new();
    let game = model.game();
    for p in Player::BOTH {
        let j = p.other();
        for w in 0..model.num_worlds() {
            for s_j in 0..game.num_strategies(j) {
                if !model
                    .prob(p, w)
                    .support()
                    .any(|&v| model.base.sigma(j, v) == s_j)
                {
                    out.push(Violation::new(
                        ViolationKind::Caution,
                        p,
                        vec![w],
                        format!(
                            "p_{p}({}) gives no weight to a world where player {j} plays {}",
                            model.base.world_label(w),
                            game.strategy_label(j, s_j)
                        ),
                    ));
                }
            }
        }
    }
    out
}

/// Worlds weighted above `eps` although their strategy fails optimality.
pub fn check_trembling(
    model: &ProbKripkeModel,
    eps: &Epsilon,
    reading: TremblingReading,
) -> Vec<Violation> {
    let game = model.game();
    let rat = model.rat();
    let mut out = Vec::new();
    for p in Player::BOTH {
        let j = p.other();
        for w in 0..model.num_worlds() {
            let own = model.base.sigma(p, w);
            for (&v, weight) in model.prob(p, w).iter() {
                if weight <= eps.value() {
                    continue;
                }
                let failing = match reading {
                    TremblingReading::Belief => !rat.of(j).contains(v),
                    TremblingReading::Pointwise => {
                        let opp = model.base.sigma(j, v);
                        let u = game.utility(p, own, opp);
                        (0..game.num_strategies(p)).any(|s| game.utility(p, s, opp) > u)
                    }
                };
                if failing {
                    out.push(Violation::new(
                        ViolationKind::Trembling,
                        p,
                        vec![w, v],
                        format!(
                            "p_{p}({})({}) = {weight} exceeds {eps} at a non-optimal world ({reading} reading)",
                            model.base.world_label(w),
                            model.base.world_label(v),
                        ),
                    ));
                }
            }
        }
    }
    out
}

/// `R_i^{>ε}(w)`: accessible worlds weighted strictly above `eps`.
pub fn upper_access(model: &ProbKripkeModel, p: Player, w: usize, eps: &Epsilon) -> EventSet {
    model
        .prob(p, w)
        .iter()
        .filter(|(v, wt)| *wt > eps.value() && model.base.access(p, w).contains(v))
        .map(|(&v, _)| v)
        .collect()
}

/// `B_i^{>ε}(E) = {w : R_i^{>ε}(w) ⊆ E}`.
pub fn upper_belief(model: &ProbKripkeModel, p: Player, eps: &Epsilon, e: &EventSet) -> EventSet {
    box_operator(model.num_worlds(), e, |w| {
        upper_access(model, p, w, eps).as_set().clone().into_iter()
    })
}

/// `CB^{>ε}(E) = {w : R_1^{>ε}(w) ∪ R_2^{>ε}(w) ⊆ E}`.
pub fn upper_common_belief(model: &ProbKripkeModel, eps: &Epsilon, e: &EventSet) -> EventSet {
    box_operator(model.num_worlds(), e, |w| {
        upper_access(model, Player::One, w, eps)
            .union(&upper_access(model, Player::Two, w, eps))
            .as_set()
            .clone()
            .into_iter()
    })
}
