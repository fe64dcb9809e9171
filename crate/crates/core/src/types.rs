//! Finite epistemic type models with lexicographic or single-distribution
//! beliefs, common full belief, permissibility, and the constructions linking
//! type models to Kripke models.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::distribution::{Distribution, EventSet};
use crate::dominance::{admissible_belief, dekel_fudenberg, justifying_belief, Restriction};
use crate::epsilon::{upper_common_belief, Epsilon};
use crate::error::{Error, Result};
use crate::game::{lex_compare, Game, Player};
use crate::kripke::{best_responses, ProbKripkeModel, StandardKripkeModel};
use crate::ordered::OrderedKripkeModel;
use crate::rational::Rational;

/// An opponent `(strategy, type)` pair, both as indices.
pub type Pair = (usize, usize);

/// What the property and fixed-point machinery needs from a type model.
pub trait TypeModel {
    fn game(&self) -> &Game;
    fn type_labels(&self, p: Player) -> &[String];
    /// Pairs with positive weight anywhere in the belief of type `t` of `p`.
    fn deemed_pairs(&self, p: Player, t: usize) -> BTreeSet<Pair>;
    /// Strategies of `p` that are optimal for type `t`.
    fn optimal_strategies(&self, p: Player, t: usize) -> Vec<usize>;

    fn num_types(&self, p: Player) -> usize {
        self.type_labels(p).len()
    }

    fn type_index(&self, p: Player, label: &str) -> Result<usize> {
        self.type_labels(p)
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Unknown {
                kind: "type",
                label: format!("{label} (player {p})"),
            })
    }
}

fn check_types(game: &Game, types: &[Vec<String>; 2]) -> Result<()> {
    for p in Player::BOTH {
        let ts = &types[p.index()];
        if ts.is_empty() {
            return Err(Error::input(format!("player {p} needs at least one type")));
        }
        let mut seen = BTreeSet::new();
        for t in ts {
            if t.contains(',') {
                return Err(Error::input(format!(
                    "type label {t:?} must not contain ','"
                )));
            }
            if !seen.insert(t) {
                return Err(Error::input(format!(
                    "duplicate type label {t:?} for player {p}"
                )));
            }
        }
    }
    let _ = game;
    Ok(())
}

fn check_distribution(
    game: &Game,
    types: &[Vec<String>; 2],
    p: Player,
    what: &str,
    d: &Distribution<Pair>,
) -> Result<()> {
    let j = p.other();
    if !d.is_probability() {
        return Err(Error::input(format!(
            "{what} is not a probability distribution"
        )));
    }
    if d.iter()
        .any(|(&(s, t), _)| s >= game.num_strategies(j) || t >= types[j.index()].len())
    {
        return Err(Error::input(format!(
            "{what} names an unknown strategy or type"
        )));
    }
    Ok(())
}

/// Opponent strategy weights of a belief over pairs.
pub fn strategy_marginal(game: &Game, p: Player, d: &Distribution<Pair>) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); game.num_strategies(p.other())];
    for (&(s, _), w) in d.iter() {
        out[s] += w;
    }
    out
}

/// Types with lexicographic beliefs `β_i(θ_i) = (β_i1, ..., β_iK)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexEpistemicModel {
    pub game: Game,
    types: [Vec<String>; 2],
    beliefs: [Vec<Vec<Distribution<Pair>>>; 2],
}

impl LexEpistemicModel {
    pub fn new(
        game: Game,
        types: [Vec<String>; 2],
        beliefs: [Vec<Vec<Distribution<Pair>>>; 2],
    ) -> Result<Self> {
        check_types(&game, &types)?;
        for p in Player::BOTH {
            let bs = &beliefs[p.index()];
            if bs.len() != types[p.index()].len() {
                return Err(Error::input(format!(
                    "player {p}: one belief per type is required"
                )));
            }
            for (t, seq) in bs.iter().enumerate() {
                let label = &types[p.index()][t];
                if seq.is_empty() {
                    return Err(Error::input(format!(
                        "type {label} of player {p} has an empty lexicographic belief"
                    )));
                }
                for (k, d) in seq.iter().enumerate() {
                    check_distribution(
                        &game,
                        &types,
                        p,
                        &format!("level {} of type {label} (player {p})", k + 1),
                        d,
                    )?;
                }
            }
        }
        Ok(LexEpistemicModel {
            game,
            types,
            beliefs,
        })
    }

    pub fn belief(&self, p: Player, t: usize) -> &[Distribution<Pair>] {
        &self.beliefs[p.index()][t]
    }

    pub fn types(&self) -> &[Vec<String>; 2] {
        &self.types
    }

    /// Level-wise expected utilities of `s` for type `t`.
    pub fn utility_vector(&self, p: Player, t: usize, s: usize) -> Vec<Rational> {
        self.belief(p, t)
            .iter()
            .map(|d| {
                self.game
                    .expected_against(p, s, &strategy_marginal(&self.game, p, d))
            })
            .collect()
    }

    /// Drops every level that repeats an earlier one. Lexicographic
    /// preferences are unchanged by this.
    pub fn without_repeated_levels(&self) -> LexEpistemicModel {
        let beliefs = self.beliefs.clone().map(|per| {
            per.into_iter()
                .map(|seq| {
                    let mut kept: Vec<Distribution<Pair>> = Vec::new();
                    for d in seq {
                        if !kept.contains(&d) {
                            kept.push(d);
                        }
                    }
                    kept
                })
                .collect()
        });
        LexEpistemicModel {
            game: self.game.clone(),
            types: self.types.clone(),
            beliefs,
        }
    }
}

impl TypeModel for LexEpistemicModel {
    fn game(&self) -> &Game {
        &self.game
    }

    fn type_labels(&self, p: Player) -> &[String] {
        &self.types[p.index()]
    }

    fn deemed_pairs(&self, p: Player, t: usize) -> BTreeSet<Pair> {
        self.belief(p, t)
            .iter()
            .flat_map(|d| d.support().copied())
            .collect()
    }

    fn optimal_strategies(&self, p: Player, t: usize) -> Vec<usize> {
        let vectors: Vec<Vec<Rational>> = (0..self.game.num_strategies(p))
            .map(|s| self.utility_vector(p, t, s))
            .collect();
        (0..vectors.len())
            .filter(|&s| {
                vectors.iter().all(|v| {
                    lex_compare(v, &vectors[s]).expect("same length") != std::cmp::Ordering::Greater
                })
            })
            .collect()
    }
}

/// Types with a single belief `b_i(t_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbEpistemicModel {
    pub game: Game,
    types: [Vec<String>; 2],
    beliefs: [Vec<Distribution<Pair>>; 2],
}

impl ProbEpistemicModel {
    pub fn new(
        game: Game,
        types: [Vec<String>; 2],
        beliefs: [Vec<Distribution<Pair>>; 2],
    ) -> Result<Self> {
        check_types(&game, &types)?;
        for p in Player::BOTH {
            let bs = &beliefs[p.index()];
            if bs.len() != types[p.index()].len() {
                return Err(Error::input(format!(
                    "player {p}: one belief per type is required"
                )));
            }
            for (t, d) in bs.iter().enumerate() {
                check_distribution(
                    &game,
                    &types,
                    p,
                    &format!("belief of type {} (player {p})", types[p.index()][t]),
                    d,
                )?;
            }
        }
        Ok(ProbEpistemicModel {
            game,
            types,
            beliefs,
        })
    }

    pub fn belief(&self, p: Player, t: usize) -> &Distribution<Pair> {
        &self.beliefs[p.index()][t]
    }

    pub fn types(&self) -> &[Vec<String>; 2] {
        &self.types
    }
}

impl TypeModel for ProbEpistemicModel {
    fn game(&self) -> &Game {
        &self.game
    }

    fn type_labels(&self, p: Player) -> &[String] {
        &self.types[p.index()]
    }

    fn deemed_pairs(&self, p: Player, t: usize) -> BTreeSet<Pair> {
        self.belief(p, t).support().copied().collect()
    }

    fn optimal_strategies(&self, p: Player, t: usize) -> Vec<usize> {
        best_responses(
            &self.game,
            p,
            &strategy_marginal(&self.game, p, self.belief(p, t)),
        )
    }
}

/// `Θ_j(θ_i)`: opponent types deemed possible by type `t` of `p`.
pub fn deems_possible<M: TypeModel>(model: &M, p: Player, t: usize) -> BTreeSet<usize> {
    model
        .deemed_pairs(p, t)
        .into_iter()
        .map(|(_, tj)| tj)
        .collect()
}

/// Every deemed opponent type is deemed possible with every opponent strategy.
pub fn type_caution<M: TypeModel>(model: &M, p: Player, t: usize) -> bool {
    let pairs = model.deemed_pairs(p, t);
    let n = model.game().num_strategies(p.other());
    !pairs.is_empty()
        && deems_possible(model, p, t)
            .into_iter()
            .all(|tj| (0..n).all(|s| pairs.contains(&(s, tj))))
}

/// The primary level weights only pairs whose strategy is optimal for its type.
pub fn primary_belief_in_rationality(model: &LexEpistemicModel, p: Player, t: usize) -> bool {
    let j = p.other();
    model.belief(p, t)[0]
        .support()
        .all(|&(s, tj)| model.optimal_strategies(j, tj).contains(&s))
}

/// Pairs whose strategy is not optimal for its type carry at most `eps`.
pub fn eps_trembling(model: &ProbEpistemicModel, p: Player, t: usize, eps: &Epsilon) -> bool {
    let j = p.other();
    model
        .belief(p, t)
        .iter()
        .all(|(&(s, tj), w)| w <= eps.value() || model.optimal_strategies(j, tj).contains(&s))
}

/// A named per-type truth valuation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeProperty {
    pub name: String,
    pub valuation: [Vec<bool>; 2],
}

impl TypeProperty {
    pub fn from_fn<M: TypeModel>(
        model: &M,
        name: impl Into<String>,
        mut f: impl FnMut(Player, usize) -> bool,
    ) -> Self {
        TypeProperty {
            name: name.into(),
            valuation: Player::BOTH.map(|p| (0..model.num_types(p)).map(|t| f(p, t)).collect()),
        }
    }

    pub fn caution<M: TypeModel>(model: &M) -> Self {
        TypeProperty::from_fn(model, "caution", |p, t| type_caution(model, p, t))
    }

    pub fn primary_rationality(model: &LexEpistemicModel) -> Self {
        TypeProperty::from_fn(model, "primary_rationality", |p, t| {
            primary_belief_in_rationality(model, p, t)
        })
    }

    pub fn eps_trembling(model: &ProbEpistemicModel, eps: &Epsilon) -> Self {
        TypeProperty::from_fn(model, format!("eps_trembling({eps})"), |p, t| {
            eps_trembling(model, p, t, eps)
        })
    }

    pub fn and(&self, other: &TypeProperty) -> TypeProperty {
        let valuation = [0, 1].map(|i| {
            self.valuation[i]
                .iter()
                .zip(&other.valuation[i])
                .map(|(a, b)| *a && *b)
                .collect()
        });
        TypeProperty {
            name: format!("{} & {}", self.name, other.name),
            valuation,
        }
    }

    pub fn holds(&self, p: Player, t: usize) -> bool {
        self.valuation[p.index()][t]
    }
}

/// Types expressing common full belief in `prop`: the greatest set of types
/// satisfying `prop` that deem possible only types in the set.
pub fn common_full_belief<M: TypeModel>(model: &M, prop: &TypeProperty) -> [BTreeSet<usize>; 2] {
    let mut alive: [BTreeSet<usize>; 2] = Player::BOTH.map(|p| {
        (0..model.num_types(p))
            .filter(|&t| prop.holds(p, t))
            .collect()
    });
    let deemed: [Vec<BTreeSet<usize>>; 2] = Player::BOTH.map(|p| {
        (0..model.num_types(p))
            .map(|t| deems_possible(model, p, t))
            .collect()
    });
    loop {
        let next: [BTreeSet<usize>; 2] = Player::BOTH.map(|p| {
            let opp = &alive[p.other().index()];
            alive[p.index()]
                .iter()
                .copied()
                .filter(|&t| deemed[p.index()][t].is_subset(opp))
                .collect()
        });
        if next == alive {
            return alive;
        }
        alive = next;
    }
}

fn optimal_union<M: TypeModel>(
    model: &M,
    survivors: &[BTreeSet<usize>; 2],
) -> [BTreeSet<usize>; 2] {
    Player::BOTH.map(|p| {
        survivors[p.index()]
            .iter()
            .flat_map(|&t| model.optimal_strategies(p, t))
            .collect()
    })
}

/// Strategies optimal for some type expressing common full belief in caution
/// and primary belief in rationality.
pub fn permissible(model: &LexEpistemicModel) -> [BTreeSet<usize>; 2] {
    let prop = TypeProperty::caution(model).and(&TypeProperty::primary_rationality(model));
    optimal_union(model, &common_full_belief(model, &prop))
}

/// Strategies optimal for some type expressing common full belief in caution
/// and ε-trembling.
pub fn eps_permissible(model: &ProbEpistemicModel, eps: &Epsilon) -> [BTreeSet<usize>; 2] {
    let prop = TypeProperty::caution(model).and(&TypeProperty::eps_trembling(model, eps));
    optimal_union(model, &common_full_belief(model, &prop))
}

/// Index of world `(t_1, t_2, s_1, s_2)` in a model built over types × profiles.
pub fn product_world(game: &Game, type_counts: [usize; 2], t: [usize; 2], s: [usize; 2]) -> usize {
    let n1 = game.num_strategies(Player::One);
    let n2 = game.num_strategies(Player::Two);
    ((t[0] * type_counts[1] + t[1]) * n1 + s[0]) * n2 + s[1]
}

struct ProductFrame {
    worlds: Vec<String>,
    sigma: [Vec<usize>; 2],
    /// `(t, s)` per player per world.
    coords: Vec<([usize; 2], [usize; 2])>,
}

fn product_frame(game: &Game, types: &[Vec<String>; 2]) -> ProductFrame {
    let mut worlds = Vec::new();
    let mut sigma = [Vec::new(), Vec::new()];
    let mut coords = Vec::new();
    for (t1, l1) in types[0].iter().enumerate() {
        for (t2, l2) in types[1].iter().enumerate() {
            for s1 in 0..game.num_strategies(Player::One) {
                for s2 in 0..game.num_strategies(Player::Two) {
                    worlds.push(format!(
                        "{l1}/{l2}/{}/{}",
                        game.strategy_label(Player::One, s1),
                        game.strategy_label(Player::Two, s2)
                    ));
                    sigma[0].push(s1);
                    sigma[1].push(s2);
                    coords.push(([t1, t2], [s1, s2]));
                }
            }
        }
    }
    ProductFrame {
        worlds,
        sigma,
        coords,
    }
}

/// World of `(t_i, s_i)` for `p` meeting the opponent pair `(s_j, t_j)`.
fn meeting_world(
    game: &Game,
    counts: [usize; 2],
    p: Player,
    ti: usize,
    si: usize,
    pair: Pair,
) -> usize {
    let (sj, tj) = pair;
    match p {
        Player::One => product_world(game, counts, [ti, tj], [si, sj]),
        Player::Two => product_world(game, counts, [tj, ti], [sj, si]),
    }
}

/// The ordered Kripke model over types × profiles induced by a cautious
/// lexicographic type model.
///
/// Levels repeating an earlier level of the same type are dropped first.
pub fn build_ordered_from_lex(model: &LexEpistemicModel) -> Result<OrderedKripkeModel> {
    let model = model.without_repeated_levels();
    for p in Player::BOTH {
        for t in 0..model.num_types(p) {
            if !type_caution(&model, p, t) {
                return Err(Error::precondition(
                    "caution",
                    format!(
                        "type {} of player {p} is not cautious; make every deemed opponent type \
                         appear with every opponent strategy",
                        model.type_labels(p)[t]
                    ),
                ));
            }
        }
    }
    let game = &model.game;
    let counts = [model.num_types(Player::One), model.num_types(Player::Two)];
    let frame = product_frame(game, model.types());
    let mut access: [Vec<BTreeSet<usize>>; 2] = [Vec::new(), Vec::new()];
    let mut lambda: [Vec<Vec<Distribution<usize>>>; 2] = [Vec::new(), Vec::new()];
    for &(t, s) in &frame.coords {
        for p in Player::BOTH {
            let (ti, si) = (t[p.index()], s[p.index()]);
            let levels: Vec<Distribution<usize>> = model
                .belief(p, ti)
                .iter()
                .map(|d| d.map(|&pair| meeting_world(game, counts, p, ti, si, pair)))
                .collect();
            access[p.index()].push(levels.iter().flat_map(|d| d.support().copied()).collect());
            lambda[p.index()].push(levels);
        }
    }
    let base = StandardKripkeModel::new(game.clone(), frame.worlds, access, frame.sigma)?;
    OrderedKripkeModel::new(base, lambda)
}

/// The probabilistic Kripke model over types × profiles induced by a
/// probabilistic type model.
pub fn build_prob_kripke_from_types(model: &ProbEpistemicModel) -> Result<ProbKripkeModel> {
    let game = &model.game;
    let counts = [model.num_types(Player::One), model.num_types(Player::Two)];
    let frame = product_frame(game, model.types());
    let mut access: [Vec<BTreeSet<usize>>; 2] = [Vec::new(), Vec::new()];
    let mut prob: [Vec<Distribution<usize>>; 2] = [Vec::new(), Vec::new()];
    for &(t, s) in &frame.coords {
        for p in Player::BOTH {
            let (ti, si) = (t[p.index()], s[p.index()]);
            let d = model
                .belief(p, ti)
                .map(|&pair| meeting_world(game, counts, p, ti, si, pair));
            access[p.index()].push(d.support_set());
            prob[p.index()].push(d);
        }
    }
    let base = StandardKripkeModel::new(game.clone(), frame.worlds, access, frame.sigma)?;
    ProbKripkeModel::new(base, prob)
}

/// A type model read off a probabilistic Kripke model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extraction {
    pub model: ProbEpistemicModel,
    /// Type of each player at each world.
    pub world_types: Vec<[usize; 2]>,
}

impl Extraction {
    pub fn type_at(&self, p: Player, w: usize) -> usize {
        self.world_types[w][p.index()]
    }
}

/// Types as classes of worlds with identical beliefs.
///
/// Two worlds get the same type for `i` exactly when `p_i` induces the same
/// distribution over (opponent strategy, opponent type). This is the coarsest
/// such partition, computed by refinement from a single class. A type's
/// belief gives each `(s_j, t_j)` the total weight of worlds of type `t_j`
/// playing `s_j`.
pub fn extract_prob_model(model: &ProbKripkeModel) -> Result<Extraction> {
    let n = model.num_worlds();
    let mut class: [Vec<usize>; 2] = [vec![0; n], vec![0; n]];
    let mut counts = [1usize, 1];
    loop {
        let mut next: [Vec<usize>; 2] = [Vec::with_capacity(n), Vec::with_capacity(n)];
        let mut next_counts = [0usize; 2];
        for p in Player::BOTH {
            let j = p.other();
            let mut index: HashMap<(usize, Distribution<Pair>), usize> = HashMap::new();
            for w in 0..n {
                let key = (
                    class[p.index()][w],
                    model
                        .prob(p, w)
                        .map(|&v| (model.base.sigma(j, v), class[j.index()][v])),
                );
                let fresh = index.len();
                next[p.index()].push(*index.entry(key).or_insert(fresh));
            }
            next_counts[p.index()] = index.len();
        }
        let stable = next_counts == counts;
        class = next;
        counts = next_counts;
        if stable {
            break;
        }
    }
    let types: [Vec<String>; 2] = Player::BOTH.map(|p| {
        let k = counts[p.index()];
        (0..k)
            .map(|c| {
                if k == 1 {
                    format!("t{p}")
                } else {
                    format!("t{p}_{}", c + 1)
                }
            })
            .collect()
    });
    let beliefs: [Vec<Distribution<Pair>>; 2] = Player::BOTH.map(|p| {
        let j = p.other();
        (0..counts[p.index()])
            .map(|c| {
                let rep = class[p.index()]
                    .iter()
                    .position(|&x| x == c)
                    .expect("class has a world");
                model
                    .prob(p, rep)
                    .map(|&v| (model.base.sigma(j, v), class[j.index()][v]))
            })
            .collect()
    });
    let ext = ProbEpistemicModel::new(model.game().clone(), types, beliefs)?;
    let world_types = (0..n).map(|w| [class[0][w], class[1][w]]).collect();
    Ok(Extraction {
        model: ext,
        world_types,
    })
}

/// One type per player per world: the type of `i` at `w` believes
/// `(σ_j(v), type of j at v)` with weight `p_i(w)(v)`. Distinct worlds give
/// distinct pairs, so no weights are pooled.
pub fn extract_world_types(model: &ProbKripkeModel) -> Result<Extraction> {
    let n = model.num_worlds();
    let types: [Vec<String>; 2] = Player::BOTH.map(|p| {
        (0..n)
            .map(|w| format!("t{p}@{}", model.base.world_label(w)))
            .collect()
    });
    let beliefs: [Vec<Distribution<Pair>>; 2] = Player::BOTH.map(|p| {
        let j = p.other();
        (0..n)
            .map(|w| model.prob(p, w).map(|&v| (model.base.sigma(j, v), v)))
            .collect()
    });
    let ext = ProbEpistemicModel::new(model.game().clone(), types, beliefs)?;
    Ok(Extraction {
        model: ext,
        world_types: (0..n).map(|w| [w, w]).collect(),
    })
}

/// Makes every type cautious without moving its opponent-strategy marginal.
///
/// For each opponent strategy `s` with mass `m`, and deemed types `M` never
/// paired with `s`, the pairs already carrying `s` keep a `1 - eta` share and
/// each `(s, t)` with `t` in `M` receives `eta * m / |M|`. Optimal strategies
/// are unchanged and added pairs weigh at most `eta`. Strategies with no mass
/// are left alone.
pub fn cautious_completion(
    model: &ProbEpistemicModel,
    eta: &Rational,
) -> Result<ProbEpistemicModel> {
    if !(eta.is_positive() && *eta < Rational::one()) {
        return Err(Error::input(format!(
            "completion weight must lie in (0, 1), got {eta}"
        )));
    }
    let game = &model.game;
    let keep = Rational::one() - eta;
    let beliefs: [Vec<Distribution<Pair>>; 2] = Player::BOTH.map(|p| {
        (0..model.num_types(p))
            .map(|t| {
                let b = model.belief(p, t);
                let deemed = deems_possible(model, p, t);
                let marginal = strategy_marginal(game, p, b);
                let mut entries: Vec<(Pair, Rational)> = Vec::new();
                for (s, m) in marginal.iter().enumerate() {
                    let missing: Vec<usize> = deemed
                        .iter()
                        .copied()
                        .filter(|&tj| !b.weight(&(s, tj)).is_positive())
                        .collect();
                    let present = b.iter().filter(|((sj, _), _)| *sj == s);
                    if missing.is_empty() || !m.is_positive() {
                        entries.extend(present.map(|(&k, x)| (k, x.clone())));
                        continue;
                    }
                    entries.extend(present.map(|(&k, x)| (k, x * &keep)));
                    let share = eta * m / Rational::from_integer(missing.len() as i64);
                    entries.extend(missing.into_iter().map(|tj| ((s, tj), share.clone())));
                }
                Distribution::from_weights(entries)
            })
            .collect()
    });
    ProbEpistemicModel::new(game.clone(), model.types().clone(), beliefs)
}

/// Outcome of reading types off the worlds in `CB^{>ε}(RAT)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpperBeliefCheck {
    pub cb_upper_rat: EventSet,
    /// Per-world types after [`cautious_completion`] with weight `ε`.
    pub extraction: Extraction,
    pub survivors: [BTreeSet<usize>; 2],
    /// `(world, player, reason)` for every failed requirement.
    pub failures: Vec<(usize, Player, String)>,
}

impl UpperBeliefCheck {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// For every `w ∈ CB^{>ε}(RAT)` and player `i`: `σ_i(w)` is optimal for the
/// type of `i` at `w`, and that type expresses common full belief in caution
/// and ε-trembling.
///
/// Types come from [`extract_world_types`] followed by
/// [`cautious_completion`] with weight `ε`.
pub fn check_upper_belief_types(
    model: &ProbKripkeModel,
    eps: &Epsilon,
) -> Result<UpperBeliefCheck> {
    let rat = model.rat();
    let cb_upper_rat = upper_common_belief(model, eps, &rat.all);
    let raw = extract_world_types(model)?;
    let extraction = Extraction {
        model: cautious_completion(&raw.model, eps.value())?,
        world_types: raw.world_types,
    };
    let ext = &extraction.model;
    let caution = TypeProperty::caution(ext);
    let trembling = TypeProperty::eps_trembling(ext, eps);
    let survivors = common_full_belief(ext, &caution.and(&trembling));
    let mut failures = Vec::new();
    for w in cb_upper_rat.iter() {
        for p in Player::BOTH {
            let t = extraction.type_at(p, w);
            let s = model.base.sigma(p, w);
            let label = &ext.type_labels(p)[t];
            if !ext.optimal_strategies(p, t).contains(&s) {
                failures.push((
                    w,
                    p,
                    format!(
                        "strategy {} is not optimal for {label}",
                        model.game().strategy_label(p, s)
                    ),
                ));
            }
            if !survivors[p.index()].contains(&t) {
                let why = match (caution.holds(p, t), trembling.holds(p, t)) {
                    (false, _) => "is not cautious",
                    (true, false) => "violates eps-trembling",
                    (true, true) => "deems possible a type outside the survivor set",
                };
                failures.push((w, p, format!("type {label} {why}")));
            }
        }
    }
    Ok(UpperBeliefCheck {
        cb_upper_rat,
        extraction,
        survivors,
        failures,
    })
}

/// A cautious lexicographic type model with one type per Dekel-Fudenberg
/// survivor, each making its strategy optimal.
///
/// The type for `s_i` has a primary level given by a belief over surviving
/// opponent strategies justifying `s_i`, paired with the opponents' own
/// survivor types, and a second level with full support on opponent
/// strategies against which `s_i` is a best response, spread evenly over the
/// opponent types deemed possible.
pub fn df_lex_model(game: &Game) -> Result<LexEpistemicModel> {
    let (survivors, _) = dekel_fudenberg(game);
    let full = Restriction::full(game);
    let type_of: [BTreeMap<usize, usize>; 2] = Player::BOTH.map(|p| {
        survivors
            .strategies(p)
            .iter()
            .enumerate()
            .map(|(t, &s)| (s, t))
            .collect()
    });
    let types: [Vec<String>; 2] = Player::BOTH.map(|p| {
        survivors
            .strategies(p)
            .iter()
            .map(|&s| format!("t{p}.{}", game.strategy_label(p, s)))
            .collect()
    });
    let mut beliefs: [Vec<Vec<Distribution<Pair>>>; 2] = [Vec::new(), Vec::new()];
    for p in Player::BOTH {
        let j = p.other();
        for &s in survivors.strategies(p) {
            let mu = justifying_belief(game, &survivors, p, s)?
                .ok_or_else(|| Error::input("a survivor lacks a justifying belief"))?;
            let nu = admissible_belief(game, &full, p, s)?
                .ok_or_else(|| Error::input("a survivor is weakly dominated"))?;
            let primary = Distribution::from_weights(
                mu.support()
                    .into_iter()
                    .map(|sj| ((sj, type_of[j.index()][&sj]), mu.weight(sj).clone())),
            );
            let deemed: BTreeSet<usize> = primary.support().map(|&(_, t)| t).collect();
            let share = Rational::new(1, deemed.len() as i64);
            let secondary = Distribution::from_weights(nu.support().into_iter().flat_map(|sj| {
                let w = nu.weight(sj) * &share;
                deemed.iter().map(move |&t| ((sj, t), w.clone()))
            }));
            beliefs[p.index()].push(vec![primary, secondary]);
        }
    }
    Ok(LexEpistemicModel::new(game.clone(), types, beliefs)?.without_repeated_levels())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{four_world_prob, myerson, myerson_lex_types, myerson_prob_types};

    fn ids(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    #[test]
    fn myerson_lex_type_properties() {
        let m = myerson_lex_types();
        assert_eq!(deems_possible(&m, Player::One, 0), ids(&[0]));
        assert!(type_caution(&m, Player::One, 0));
        assert_eq!(m.optimal_strategies(Player::One, 0), vec![0]);
        assert!(primary_belief_in_rationality(&m, Player::One, 0));
        let prop = TypeProperty::caution(&m).and(&TypeProperty::primary_rationality(&m));
        assert_eq!(common_full_belief(&m, &prop), [ids(&[0]), ids(&[0])]);
        assert_eq!(permissible(&m), [ids(&[0]), ids(&[0])]);
    }

    #[test]
    fn primary_belief_on_suboptimal_pair_fails() {
        let g = myerson();
        let m = LexEpistemicModel::new(
            g,
            [vec!["a".into()], vec!["b".into()]],
            [
                vec![vec![
                    Distribution::point((1, 0)),
                    Distribution::point((0, 0)),
                ]],
                vec![vec![
                    Distribution::point((0, 0)),
                    Distribution::point((1, 0)),
                ]],
            ],
        )
        .unwrap();
        // player 2's type prefers C, so D in player 1's primary belief is irrational
        assert!(!primary_belief_in_rationality(&m, Player::One, 0));
        assert!(primary_belief_in_rationality(&m, Player::Two, 0));
    }

    #[test]
    fn point_mass_type_is_not_cautious() {
        let m = LexEpistemicModel::new(
            myerson(),
            [vec!["a".into()], vec!["b".into()]],
            [
                vec![vec![Distribution::point((0, 0))]],
                vec![vec![Distribution::point((0, 0))]],
            ],
        )
        .unwrap();
        assert!(!type_caution(&m, Player::One, 0));
        assert!(build_ordered_from_lex(&m).is_err());
    }

    #[test]
    fn myerson_prob_type_properties() {
        let eps = Epsilon::new(Rational::new(1, 4)).unwrap();
        let m = myerson_prob_types(eps.value());
        assert_eq!(m.optimal_strategies(Player::One, 0), vec![0]);
        assert!(eps_trembling(&m, Player::One, 0, &eps));
        let half = Epsilon::new(Rational::new(1, 8)).unwrap();
        assert!(!eps_trembling(&m, Player::One, 0, &half));
        assert_eq!(eps_permissible(&m, &eps), [ids(&[0]), ids(&[0])]);
        assert_eq!(eps_permissible(&m, &half), [ids(&[]), ids(&[])]);
    }

    #[test]
    fn extraction_of_four_world_prob_has_one_type_each() {
        for e in [Rational::new(1, 4), Rational::new(1, 3)] {
            let ext = extract_prob_model(&four_world_prob(&e)).unwrap();
            assert_eq!(ext.model, myerson_prob_types(&e));
            assert!(ext.world_types.iter().all(|t| *t == [0, 0]));
        }
    }

    type CellWeights<'a> = &'a [(usize, i64, i64)];

    fn prob_model(
        game: Game,
        worlds: &[&str],
        cells: [&[&[usize]]; 2],
        sigma: [Vec<usize>; 2],
        weights: [&[CellWeights]; 2],
    ) -> ProbKripkeModel {
        let n = worlds.len();
        let mut access: [Vec<BTreeSet<usize>>; 2] =
            [vec![BTreeSet::new(); n], vec![BTreeSet::new(); n]];
        let mut prob: [Vec<Distribution<usize>>; 2] = [
            vec![Distribution::point(0); n],
            vec![Distribution::point(0); n],
        ];
        for p in 0..2 {
            for (cell, ws) in cells[p].iter().zip(weights[p]) {
                let d = Distribution::from_weights(
                    ws.iter().map(|&(v, a, b)| (v, Rational::new(a, b))),
                );
                for w in 0..n {
                    if ws.iter().any(|&(v, _, _)| v == w) || cell.contains(&w) {
                        access[p][w] = cell.iter().copied().collect();
                        prob[p][w] = d.clone();
                    }
                }
            }
        }
        let base = StandardKripkeModel::new(
            game,
            worlds.iter().map(|w| w.to_string()).collect(),
            access,
            sigma,
        )
        .unwrap();
        ProbKripkeModel::new(base, prob).unwrap()
    }

    #[test]
    fn completion_keeps_marginals_and_adds_caution() {
        let g = myerson();
        let m = ProbEpistemicModel::new(
            g.clone(),
            [vec!["a".into()], vec!["b".into(), "c".into()]],
            [
                vec![Distribution::from_weights([
                    ((0, 0), Rational::new(3, 4)),
                    ((1, 1), Rational::new(1, 4)),
                ])],
                vec![Distribution::point((0, 0)), Distribution::point((1, 0))],
            ],
        )
        .unwrap();
        assert!(!type_caution(&m, Player::One, 0));
        let c = cautious_completion(&m, &Rational::new(1, 10)).unwrap();
        assert!(type_caution(&c, Player::One, 0));
        assert_eq!(
            strategy_marginal(&g, Player::One, c.belief(Player::One, 0)),
            strategy_marginal(&g, Player::One, m.belief(Player::One, 0))
        );
        assert_eq!(
            c.belief(Player::One, 0).weight(&(0, 1)),
            Rational::new(3, 40)
        );
        assert_eq!(
            c.optimal_strategies(Player::One, 0),
            m.optimal_strategies(Player::One, 0)
        );
        // player 2's types deem only one strategy of player 1 possible, so they stay as they are
        assert_eq!(c.belief(Player::Two, 1), m.belief(Player::Two, 1));
        assert!(cautious_completion(&m, &Rational::one()).is_err());
    }

    #[test]
    fn quotient_pools_duplicate_worlds_above_eps() {
        // d1 and d2 are exact duplicates; each is light for player 1, together they are not
        let m = prob_model(
            myerson(),
            &["a", "d1", "d2", "b", "e1", "e2"],
            [&[&[0, 1, 2], &[3, 4, 5]], &[&[0, 3], &[1, 2, 4, 5]]],
            [vec![0, 0, 0, 1, 1, 1], vec![0, 1, 1, 0, 1, 1]],
            [
                &[
                    &[(0, 7, 10), (1, 3, 20), (2, 3, 20)],
                    &[(3, 7, 10), (4, 3, 20), (5, 3, 20)],
                ],
                &[
                    &[(0, 4, 5), (3, 1, 5)],
                    &[(1, 2, 5), (2, 2, 5), (4, 1, 10), (5, 1, 10)],
                ],
            ],
        );
        let eps = Epsilon::new(Rational::new(1, 5)).unwrap();
        assert!(m.validate().is_empty());
        assert!(crate::epsilon::check_prob_caution(&m).is_empty());
        assert!(crate::epsilon::check_trembling(
            &m,
            &eps,
            crate::epsilon::TremblingReading::Belief
        )
        .is_empty());
        let quotient = extract_prob_model(&m).unwrap();
        let t = quotient.type_at(Player::One, 0);
        assert!(!eps_trembling(&quotient.model, Player::One, t, &eps));
        let check = check_upper_belief_types(&m, &eps).unwrap();
        assert!(check.cb_upper_rat.contains(0));
        assert!(check.holds(), "{:?}", check.failures);
    }

    #[test]
    fn upper_belief_holds_vacuously_when_every_weight_is_light() {
        // X is strictly dominated, yet with all weights at most eps nothing is heavy
        let g = Game::from_integers(&["X", "Y"], &["Z"], &[vec![(0, 0)], vec![(1, 0)]]).unwrap();
        let labels = [
            "x1", "x2", "x3", "x4", "x5", "x6", "y1", "y2", "y3", "y4", "y5", "y6",
        ];
        let xs: Vec<(usize, i64, i64)> = (0..6).map(|w| (w, 1, 6)).collect();
        let ys: Vec<(usize, i64, i64)> = (6..12).map(|w| (w, 1, 6)).collect();
        let all: Vec<(usize, i64, i64)> = (0..12).map(|w| (w, 1, 12)).collect();
        let xw: Vec<usize> = (0..6).collect();
        let yw: Vec<usize> = (6..12).collect();
        let aw: Vec<usize> = (0..12).collect();
        let m = prob_model(
            g,
            &labels,
            [&[&xw, &yw], &[&aw]],
            [(0..12).map(|w| usize::from(w >= 6)).collect(), vec![0; 12]],
            [&[&xs, &ys], &[&all]],
        );
        let eps = Epsilon::new(Rational::new(1, 5)).unwrap();
        assert!(m.validate().is_empty());
        assert!(crate::epsilon::check_trembling(
            &m,
            &eps,
            crate::epsilon::TremblingReading::Belief
        )
        .is_empty());
        let check = check_upper_belief_types(&m, &eps).unwrap();
        assert_eq!(check.cb_upper_rat, m.base.all_worlds());
        assert!(check
            .failures
            .iter()
            .any(|(w, p, why)| *w == 0 && *p == Player::One && why.contains("not optimal")));
    }

    #[test]
    fn build_from_myerson_lex_types() {
        let m = build_ordered_from_lex(&myerson_lex_types()).unwrap();
        assert_eq!(m.num_worlds(), 4);
        assert!(m.validate().is_empty());
        assert!(m.check_caution().is_empty());
        let lrat = m.lrat();
        let cb1 = m.common_level1_belief(&lrat.all);
        assert!(cb1.iter().any(|w| m.base.profile(w) == (0, 0)));
    }

    #[test]
    fn one_strategy_one_type_builds_one_world() {
        let g = Game::from_integers(&["X"], &["Y"], &[vec![(1, 1)]]).unwrap();
        let m = LexEpistemicModel::new(
            g,
            [vec!["a".into()], vec!["b".into()]],
            [
                vec![vec![Distribution::point((0, 0))]],
                vec![vec![Distribution::point((0, 0))]],
            ],
        )
        .unwrap();
        let k = build_ordered_from_lex(&m).unwrap();
        assert_eq!(k.num_worlds(), 1);
        let lrat = k.lrat();
        assert_eq!(k.common_level1_belief(&lrat.all), k.base.all_worlds());
    }

    #[test]
    fn df_model_for_myerson() {
        let g = myerson();
        let m = df_lex_model(&g).unwrap();
        assert_eq!(m.types()[0], vec!["t1.A".to_string()]);
        assert_eq!(permissible(&m), [ids(&[0]), ids(&[0])]);
        let k = build_ordered_from_lex(&m).unwrap();
        assert!(k.validate().is_empty());
        let w = product_world(&g, [1, 1], [0, 0], [0, 0]);
        let lrat = k.lrat();
        assert!(k.common_level1_belief(&lrat.all).contains(w));
    }

    #[test]
    fn common_full_belief_drops_chains_into_bad_types() {
        // type b of player 2 fails the property; type a of player 1 deems it possible
        let g = myerson();
        let m = ProbEpistemicModel::new(
            g,
            [vec!["a".into(), "c".into()], vec!["b".into(), "d".into()]],
            [
                vec![Distribution::point((0, 0)), Distribution::point((0, 1))],
                vec![Distribution::point((0, 0)), Distribution::point((0, 1))],
            ],
        )
        .unwrap();
        let prop = TypeProperty {
            name: "test".into(),
            valuation: [vec![true, true], vec![false, true]],
        };
        assert_eq!(common_full_belief(&m, &prop), [ids(&[1]), ids(&[1])]);
        let none = TypeProperty {
            name: "none".into(),
            valuation: [vec![false, false], vec![false, false]],
        };
        assert_eq!(common_full_belief(&m, &none), [ids(&[]), ids(&[])]);
    }
}
