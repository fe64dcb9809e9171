//! Probabilistic models `M^ε` built from an ordered model, and finite-horizon
//! checks that `CB^{>ε_n}(RAT)` settles on `CB^1(LRAT)` as `ε_n` shrinks.

use std::fmt;
use std::str::FromStr;

use crate::distribution::{Distribution, EventSet};
use crate::epsilon::{check_prob_caution, upper_common_belief, Epsilon};
use crate::error::{Error, Result};
use crate::game::Player;
use crate::kripke::ProbKripkeModel;
use crate::ordered::OrderedKripkeModel;
use crate::rational::Rational;

/// A finite, strictly decreasing list of thresholds in `(0, 1/2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsilonSchedule {
    values: Vec<Epsilon>,
}

impl EpsilonSchedule {
    pub fn new(values: Vec<Rational>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::input("a schedule needs at least one value"));
        }
        if values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::input("schedule values must be strictly decreasing"));
        }
        let values = values
            .into_iter()
            .map(Epsilon::new)
            .collect::<Result<_>>()?;
        Ok(EpsilonSchedule { values })
    }

    /// `ε_n = ratio^{n+2}` for `n = 0..count`.
    pub fn geometric(ratio: Rational, count: usize) -> Result<Self> {
        if !(ratio.is_positive() && ratio < Rational::one()) {
            return Err(Error::input(format!(
                "geometric ratio must lie in (0, 1), got {ratio}"
            )));
        }
        let exps = 2..count as u32 + 2;
        EpsilonSchedule::new(exps.map(|k| ratio.pow(k)).collect())
    }

    pub fn values(&self) -> &[Epsilon] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Accepts `geometric:RATIO,COUNT` or `list:E1,E2,...`.
impl FromStr for EpsilonSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("schedule {s:?}: expected KIND:ARGS")))?;
        match kind {
            "geometric" => {
                let (r, n) = rest.split_once(',').ok_or_else(|| {
                    Error::Parse(format!("schedule {s:?}: expected geometric:RATIO,COUNT"))
                })?;
                let count = n
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("schedule count {n:?}: {e}")))?;
                EpsilonSchedule::geometric(r.trim().parse()?, count)
            }
            "list" => EpsilonSchedule::new(
                rest.split(',')
                    .map(|x| x.trim().parse())
                    .collect::<Result<Vec<Rational>>>()?,
            ),
            other => Err(Error::Parse(format!(
                "unknown schedule kind {other:?} (expected geometric or list)"
            ))),
        }
    }
}

/// How level masses are chosen in `M^ε`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WeightingScheme {
    /// Level masses `1-ε, (1-ε)ε, (1-ε)ε², ..., ε^{K-1}` for `K` levels.
    #[default]
    Perfect,
    /// Every deeper-level world weighs at most `ε` times every shallower one.
    Proper,
}

impl FromStr for WeightingScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perfect" => Ok(WeightingScheme::Perfect),
            "proper" => Ok(WeightingScheme::Proper),
            other => Err(Error::input(format!(
                "unknown weighting scheme {other:?} (expected perfect or proper)"
            ))),
        }
    }
}

impl fmt::Display for WeightingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightingScheme::Perfect => "perfect",
            WeightingScheme::Proper => "proper",
        })
    }
}

fn level_masses(
    levels: &[Distribution<usize>],
    eps: &Rational,
    scheme: WeightingScheme,
) -> Vec<Rational> {
    let k = levels.len();
    match scheme {
        WeightingScheme::Perfect => {
            let keep = Rational::one() - eps;
            (0..k)
                .map(|i| {
                    if i + 1 == k {
                        eps.pow(i as u32)
                    } else {
                        &keep * eps.pow(i as u32)
                    }
                })
                .collect()
        }
        WeightingScheme::Proper => {
            let mut raw = vec![Rational::one()];
            for d in &levels[..k - 1] {
                let lightest = d
                    .iter()
                    .map(|(_, w)| w.clone())
                    .min()
                    .expect("levels are nonempty");
                let next = eps * raw.last().expect("starts nonempty") * lightest;
                raw.push(next);
            }
            let total: Rational = raw.iter().sum();
            raw.iter().map(|m| m / &total).collect()
        }
    }
}

/// The hypotheses shared by every construction here.
fn check_hypotheses(model: &OrderedKripkeModel) -> Result<()> {
    let v = model.validate();
    if let Some(first) = v.first() {
        return Err(Error::precondition(
            "ordered model validity",
            format!("{} violation(s), first: {}", v.len(), first.message),
        ));
    }
    let c = model.check_caution();
    if let Some(first) = c.first() {
        return Err(Error::precondition("caution", first.message.clone()));
    }
    let s = model.check_structural_conditions();
    if let Some(first) = s.violations.first() {
        let condition = if s.disjoint_supports {
            "surjection"
        } else {
            "disjoint supports"
        };
        return Err(Error::precondition(condition, first.message.clone()));
    }
    Ok(())
}

/// `M^ε`: same worlds, access and strategies, with `p_i(w)` giving each
/// level its scheme mass spread in proportion to that level of `λ_i(w)`.
///
/// The result is checked for validity, caution, and off-primary mass at most
/// `ε`; trembling is left to [`crate::epsilon::check_trembling`].
pub fn build_epsilon_model(
    model: &OrderedKripkeModel,
    eps: &Epsilon,
    scheme: WeightingScheme,
) -> Result<ProbKripkeModel> {
    check_hypotheses(model)?;
    let e = eps.value();
    let n = model.num_worlds();
    let p = Player::BOTH.map(|pl| {
        (0..n)
            .map(|w| {
                let levels = model.lambda(pl, w);
                let masses = level_masses(levels, e, scheme);
                Distribution::from_weights(
                    levels
                        .iter()
                        .zip(&masses)
                        .flat_map(|(d, m)| d.iter().map(move |(&v, x)| (v, m * x))),
                )
            })
            .collect()
    });
    let built = ProbKripkeModel::new(model.base.clone(), p)?;
    for pl in Player::BOTH {
        for w in 0..n {
            let primary = &model.lambda(pl, w)[0];
            let off: Rational = built
                .prob(pl, w)
                .iter()
                .filter(|(v, _)| !primary.weight(v).is_positive())
                .map(|(_, x)| x.clone())
                .sum();
            if off > *e {
                return Err(Error::precondition(
                    "off-primary mass at most eps",
                    format!(
                        "p_{pl}({}) puts {off} outside the primary level; use a smaller eps",
                        model.base.world_label(w)
                    ),
                ));
            }
        }
    }
    let v = built.validate();
    if let Some(first) = v.first() {
        return Err(Error::precondition(
            "probabilistic model validity",
            first.message.clone(),
        ));
    }
    let c = check_prob_caution(&built);
    if let Some(first) = c.first() {
        return Err(Error::precondition("caution", first.message.clone()));
    }
    Ok(built)
}

/// One schedule step of a convergence run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergenceRow {
    pub eps: Epsilon,
    pub rat: EventSet,
    pub cb_upper_rat: EventSet,
    /// Intersection of `CB^{>ε_m}(RAT)` over `m ≥ n`.
    pub tail: EventSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergenceReport {
    pub scheme: WeightingScheme,
    pub rows: Vec<ConvergenceRow>,
    /// `CB^1(LRAT)` in the ordered model.
    pub cb1_lrat: EventSet,
    /// Least `n` whose tail already equals the last one.
    pub stabilization_index: usize,
    /// At least the last two steps agree.
    pub stabilized: bool,
    pub stabilized_set: EventSet,
    pub matches: bool,
    pub family: Vec<ProbKripkeModel>,
}

pub fn verify_convergence(
    model: &OrderedKripkeModel,
    schedule: &EpsilonSchedule,
    scheme: WeightingScheme,
) -> Result<ConvergenceReport> {
    let family = schedule
        .values()
        .iter()
        .map(|e| build_epsilon_model(model, e, scheme))
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<ConvergenceRow> = schedule
        .values()
        .iter()
        .zip(&family)
        .map(|(e, m)| {
            let rat = m.rat().all;
            let cb_upper_rat = upper_common_belief(m, e, &rat);
            ConvergenceRow {
                eps: e.clone(),
                rat,
                tail: cb_upper_rat.clone(),
                cb_upper_rat,
            }
        })
        .collect();
    for i in (0..rows.len().saturating_sub(1)).rev() {
        rows[i].tail = rows[i].tail.intersection(&rows[i + 1].tail);
    }
    let last = rows.last().expect("schedule is nonempty").tail.clone();
    let stabilization_index = rows
        .iter()
        .position(|r| r.tail == last)
        .expect("last row matches");
    let lrat = model.lrat();
    let cb1_lrat = model.common_level1_belief(&lrat.all);
    Ok(ConvergenceReport {
        scheme,
        stabilized: stabilization_index + 1 < rows.len(),
        matches: last == cb1_lrat,
        stabilized_set: last,
        stabilization_index,
        cb1_lrat,
        rows,
        family,
    })
}

/// A failed limit clause at one step, player and pair of worlds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LimitViolation {
    /// 1: off-primary weights vanish; 2: primary weights approach `λ_i(w)(1)`;
    /// 3: ratios within a level match `λ`.
    pub clause: u8,
    pub step: usize,
    pub player: Player,
    pub world: usize,
    pub other: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LimitReport {
    pub violations: Vec<LimitViolation>,
}

impl LimitReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn clause_holds(&self, clause: u8) -> bool {
        self.violations.iter().all(|v| v.clause != clause)
    }
}

/// Finite checks of the three limit clauses over a family indexed by
/// `schedule`:
/// 1. worlds outside the primary support weigh at most `ε_n`, and no more
///    than at the previous step;
/// 2. primary worlds are within the off-primary mass of their `λ` weight;
/// 3. within every level, weights are in exactly `λ`'s proportions.
pub fn check_limit_conditions(
    model: &OrderedKripkeModel,
    family: &[ProbKripkeModel],
    schedule: &EpsilonSchedule,
) -> Result<LimitReport> {
    if family.len() != schedule.len() {
        return Err(Error::input(format!(
            "family has {} models but the schedule has {} values",
            family.len(),
            schedule.len()
        )));
    }
    if family.iter().any(|m| m.num_worlds() != model.num_worlds()) {
        return Err(Error::input(
            "family models must share the ordered model's worlds",
        ));
    }
    let label = |w: usize| model.base.world_label(w).to_string();
    let mut out = Vec::new();
    for (n, (m, eps)) in family.iter().zip(schedule.values()).enumerate() {
        for pl in Player::BOTH {
            for w in 0..model.num_worlds() {
                let levels = model.lambda(pl, w);
                let primary = &levels[0];
                let p = m.prob(pl, w);
                let mut push = |clause: u8, other: usize, message: String| {
                    out.push(LimitViolation {
                        clause,
                        step: n,
                        player: pl,
                        world: w,
                        other,
                        message,
                    })
                };
                let off: Rational = p
                    .iter()
                    .filter(|(v, _)| !primary.weight(v).is_positive())
                    .map(|(_, x)| x.clone())
                    .sum();
                for (&v, x) in p.iter() {
                    if primary.weight(&v).is_positive() {
                        continue;
                    }
                    if x > eps.value() {
                        push(
                            1,
                            v,
                            format!(
                                "p_{pl}({})({}) = {x} exceeds eps = {eps}",
                                label(w),
                                label(v)
                            ),
                        );
                    }
                    if n > 0 {
                        let before = family[n - 1].prob(pl, w).weight(&v);
                        if *x > before {
                            push(
                                1,
                                v,
                                format!(
                                    "p_{pl}({})({}) grew from {before} to {x}",
                                    label(w),
                                    label(v)
                                ),
                            );
                        }
                    }
                }
                for (&v, target) in primary.iter() {
                    let gap = (p.weight(&v) - target).abs();
                    if gap > off {
                        push(2, v, format!(
                            "p_{pl}({})({}) is {gap} away from {target}, more than the off-primary mass {off}",
                            label(w),
                            label(v)
                        ));
                    }
                }
                for (k, d) in levels.iter().enumerate() {
                    let support: Vec<(usize, Rational)> =
                        d.iter().map(|(&v, x)| (v, x.clone())).collect();
                    for (a, (v1, l1)) in support.iter().enumerate() {
                        for (v2, l2) in &support[a + 1..] {
                            if p.weight(v1) * l2 != p.weight(v2) * l1 {
                                push(
                                    3,
                                    *v2,
                                    format!(
                                    "at level {} of {}, p_{pl} weights {} and {} out of proportion",
                                    k + 1,
                                    label(w),
                                    label(*v1),
                                    label(*v2)
                                ),
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(LimitReport { violations: out })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::fixtures::{four_world_ordered, four_world_prob};
    use crate::kripke::StandardKripkeModel;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn set(ws: &[usize]) -> EventSet {
        ws.iter().copied().collect()
    }

    #[test]
    fn schedule_parsing() {
        let s: EpsilonSchedule = "geometric:1/2,9".parse().unwrap();
        assert_eq!(s.len(), 9);
        assert_eq!(s.values()[0].value(), &r(1, 4));
        assert_eq!(s.values()[8].value(), &r(1, 1024));
        let l: EpsilonSchedule = "list:1/3, 1/5,1/7".parse().unwrap();
        assert_eq!(l.values()[1].value(), &r(1, 5));
        assert!("list:1/5,1/3".parse::<EpsilonSchedule>().is_err());
        assert!("list:1/2".parse::<EpsilonSchedule>().is_err());
        assert!("geometric:1,3".parse::<EpsilonSchedule>().is_err());
        assert!("fast:1/2".parse::<EpsilonSchedule>().is_err());
    }

    #[test]
    fn perfect_masses_sum_to_one() {
        let lv = vec![Distribution::point(0usize); 4];
        for e in [r(1, 4), r(1, 3), r(1, 100)] {
            let m = level_masses(&lv, &e, WeightingScheme::Perfect);
            assert_eq!(m.iter().sum::<Rational>(), Rational::one());
            assert_eq!(m[0], Rational::one() - &e);
        }
    }

    #[test]
    fn ordered_fixture_builds_prob_fixture() {
        for e in [r(1, 4), r(1, 3), r(1, 10)] {
            let eps = Epsilon::new(e.clone()).unwrap();
            let built =
                build_epsilon_model(&four_world_ordered(), &eps, WeightingScheme::Perfect).unwrap();
            assert_eq!(built, four_world_prob(&e));
        }
    }

    #[test]
    fn proper_scheme_bounds_deeper_levels() {
        let eps = Epsilon::new(r(1, 4)).unwrap();
        let m = four_world_ordered();
        let built = build_epsilon_model(&m, &eps, WeightingScheme::Proper).unwrap();
        for pl in Player::BOTH {
            for w in 0..4 {
                let lv = m.lambda(pl, w);
                let p = built.prob(pl, w);
                for (k, shallow) in lv.iter().enumerate() {
                    for deep in &lv[k + 1..] {
                        for (a, _) in shallow.iter() {
                            for (b, _) in deep.iter() {
                                assert!(p.weight(b) <= eps.value() * p.weight(a));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn single_level_is_copied() {
        let g = crate::game::Game::from_integers(&["X"], &["Y"], &[vec![(0, 0)]]).unwrap();
        let base = StandardKripkeModel::new(
            g,
            vec!["u".into()],
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
        let sched: EpsilonSchedule = "geometric:1/2,4".parse().unwrap();
        let rep = verify_convergence(&m, &sched, WeightingScheme::Perfect).unwrap();
        assert!(rep.rows.iter().all(|row| row.cb_upper_rat == set(&[0])));
        assert!(rep.matches);
        assert_eq!(rep.stabilization_index, 0);
        for fam in &rep.family {
            assert_eq!(fam.prob(Player::One, 0), &Distribution::point(0));
        }
        assert!(check_limit_conditions(&m, &rep.family, &sched)
            .unwrap()
            .holds());
    }

    #[test]
    fn convergence_on_four_world_ordered() {
        let sched: EpsilonSchedule = "geometric:1/2,9".parse().unwrap();
        let m = four_world_ordered();
        for scheme in [WeightingScheme::Perfect, WeightingScheme::Proper] {
            let rep = verify_convergence(&m, &sched, scheme).unwrap();
            assert_eq!(rep.cb1_lrat, set(&[0]));
            assert_eq!(rep.stabilized_set, set(&[0]));
            assert_eq!(rep.stabilization_index, 0);
            assert!(rep.stabilized && rep.matches);
            assert!(check_limit_conditions(&m, &rep.family, &sched)
                .unwrap()
                .holds());
        }
    }

    #[test]
    fn skewed_family_breaks_clause_three() {
        // a three-world cell whose second level weights two worlds evenly
        let g = crate::game::Game::from_integers(
            &["A", "B", "C"],
            &["X"],
            &[vec![(0, 0)], vec![(0, 0)], vec![(0, 0)]],
        )
        .unwrap();
        let all: BTreeSet<usize> = (0..3).collect();
        let base = StandardKripkeModel::new(
            g,
            vec!["a".into(), "b".into(), "c".into()],
            [(0..3).map(|w| BTreeSet::from([w])).collect(), vec![all; 3]],
            [vec![0, 1, 2], vec![0, 0, 0]],
        )
        .unwrap();
        let lex = vec![Distribution::point(0), Distribution::uniform([1usize, 2])];
        let m = OrderedKripkeModel::new(
            base.clone(),
            [
                (0..3).map(|w| vec![Distribution::point(w)]).collect(),
                vec![lex; 3],
            ],
        )
        .unwrap();
        let sched: EpsilonSchedule = "list:1/4".parse().unwrap();
        let eps = &sched.values()[0];
        let good = build_epsilon_model(&m, eps, WeightingScheme::Perfect).unwrap();
        assert_eq!(good.prob(Player::Two, 0).weight(&1), r(1, 8));
        assert!(
            check_limit_conditions(&m, std::slice::from_ref(&good), &sched)
                .unwrap()
                .holds()
        );
        let skew = Distribution::from_weights([(0, r(3, 4)), (1, r(1, 6)), (2, r(1, 12))]);
        let mut p2: Vec<Distribution<usize>> =
            (0..3).map(|w| good.prob(Player::Two, w).clone()).collect();
        p2[1] = skew;
        let p1 = (0..3).map(|w| good.prob(Player::One, w).clone()).collect();
        let bad = ProbKripkeModel::new(base, [p1, p2]).unwrap();
        let rep = check_limit_conditions(&m, &[bad], &sched).unwrap();
        assert!(rep.clause_holds(1) && rep.clause_holds(2));
        assert!(!rep.clause_holds(3));
        assert!(rep
            .violations
            .iter()
            .all(|v| v.world == 1 && v.player == Player::Two));
    }

    #[test]
    fn hypotheses_are_enforced() {
        let m = four_world_ordered();
        let broken = OrderedKripkeModel::new(
            m.base.clone(),
            Player::BOTH.map(|p| (0..4).map(|w| vec![m.lambda(p, w)[0].clone()]).collect()),
        )
        .unwrap();
        let eps = Epsilon::new(r(1, 4)).unwrap();
        let err = build_epsilon_model(&broken, &eps, WeightingScheme::Perfect).unwrap_err();
        assert!(err.to_string().contains("caution"), "{err}");
    }
}
