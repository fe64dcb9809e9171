//! JSON files for models, type models and events.
//!
//! Worlds, strategies and types are referred to by label. Maps keep file
//! order so emitted files list worlds in model order.

use std::collections::BTreeSet;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::distribution::{Distribution, EventSet};
use crate::error::{Error, Result};
use crate::game::{Game, GameFile, Player};
use crate::kripke::{ProbKripkeModel, StandardKripkeModel};
use crate::ordered::OrderedKripkeModel;
use crate::rational::Rational;
use crate::types::{LexEpistemicModel, Pair, ProbEpistemicModel, TypeModel};

/// A value per player, keyed `"1"` and `"2"` on disk.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerPlayer<T> {
    #[serde(rename = "1")]
    pub one: T,
    #[serde(rename = "2")]
    pub two: T,
}

impl<T> PerPlayer<T> {
    fn get(&self, p: Player) -> &T {
        match p {
            Player::One => &self.one,
            Player::Two => &self.two,
        }
    }

    fn build(mut f: impl FnMut(Player) -> T) -> Self {
        PerPlayer {
            one: f(Player::One),
            two: f(Player::Two),
        }
    }
}

type WeightMap = IndexMap<String, Rational>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game: Option<GameFile>,
    pub worlds: Vec<String>,
    pub access: PerPlayer<IndexMap<String, Vec<String>>>,
    pub sigma: PerPlayer<IndexMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<PerPlayer<IndexMap<String, WeightMap>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<PerPlayer<IndexMap<String, Vec<WeightMap>>>>,
}

/// A model of any of the three flavours.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnyModel {
    Standard(StandardKripkeModel),
    Prob(ProbKripkeModel),
    Ordered(OrderedKripkeModel),
}

impl AnyModel {
    pub fn base(&self) -> &StandardKripkeModel {
        match self {
            AnyModel::Standard(m) => m,
            AnyModel::Prob(m) => &m.base,
            AnyModel::Ordered(m) => &m.base,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AnyModel::Standard(_) => "standard",
            AnyModel::Prob(_) => "probabilistic",
            AnyModel::Ordered(_) => "ordered",
        }
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(what: &str, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("file structures always serialize")
}

fn pick_game(embedded: Option<GameFile>, given: Option<&Game>) -> Result<Game> {
    match (given, embedded) {
        (Some(g), _) => Ok(g.clone()),
        (None, Some(f)) => Game::from_file(f),
        (None, None) => Err(Error::input(
            "no game: embed a \"game\" object in the file or pass one separately",
        )),
    }
}

fn per_world<'a, T>(
    base_labels: &[String],
    map: &'a IndexMap<String, T>,
    what: &str,
    p: Player,
) -> Result<Vec<&'a T>> {
    if let Some(extra) = map.keys().find(|k| !base_labels.contains(k)) {
        return Err(Error::Unknown {
            kind: "world",
            label: format!("{extra} (in {what} of player {p})"),
        });
    }
    base_labels
        .iter()
        .map(|w| {
            map.get(w).ok_or_else(|| {
                Error::input(format!("{what} of player {p} has no entry for world {w}"))
            })
        })
        .collect()
}

fn world_distribution(
    base: &StandardKripkeModel,
    weights: &WeightMap,
) -> Result<Distribution<usize>> {
    let entries = weights
        .iter()
        .map(|(w, x)| Ok((base.world_index(w)?, x.clone())))
        .collect::<Result<Vec<_>>>()?;
    let dist = Distribution::from_weights(entries.iter().cloned());
    if entries.iter().any(|(_, x)| x.is_negative()) {
        return Err(Error::input("probabilities must be non-negative"));
    }
    Ok(dist)
}

fn world_weights(base: &StandardKripkeModel, d: &Distribution<usize>) -> WeightMap {
    d.iter()
        .map(|(&v, x)| (base.world_label(v).to_string(), x.clone()))
        .collect()
}

impl ModelFile {
    pub fn into_model(self, game: Option<&Game>) -> Result<AnyModel> {
        let game = pick_game(self.game, game)?;
        let labels = &self.worlds;
        let mut access: [Vec<BTreeSet<usize>>; 2] = [Vec::new(), Vec::new()];
        let mut sigma: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        let index = |w: &String| {
            labels
                .iter()
                .position(|l| l == w)
                .ok_or_else(|| Error::Unknown {
                    kind: "world",
                    label: w.clone(),
                })
        };
        for p in Player::BOTH {
            for targets in per_world(labels, self.access.get(p), "access", p)? {
                access[p.index()].push(targets.iter().map(index).collect::<Result<_>>()?);
            }
            for s in per_world(labels, self.sigma.get(p), "sigma", p)? {
                sigma[p.index()].push(game.strategy_index(p, s)?);
            }
        }
        let base = StandardKripkeModel::new(game, self.worlds.clone(), access, sigma)?;
        match (self.p, self.lambda) {
            (Some(_), Some(_)) => Err(Error::input(
                "a model file has either \"p\" or \"lambda\", not both",
            )),
            (None, None) => Ok(AnyModel::Standard(base)),
            (Some(p), None) => {
                let mut probs: [Vec<Distribution<usize>>; 2] = [Vec::new(), Vec::new()];
                for pl in Player::BOTH {
                    for d in per_world(labels, p.get(pl), "p", pl)? {
                        probs[pl.index()].push(world_distribution(&base, d)?);
                    }
                }
                Ok(AnyModel::Prob(ProbKripkeModel::new(base, probs)?))
            }
            (None, Some(l)) => {
                let mut lambda: [Vec<Vec<Distribution<usize>>>; 2] = [Vec::new(), Vec::new()];
                for pl in Player::BOTH {
                    for seq in per_world(labels, l.get(pl), "lambda", pl)? {
                        lambda[pl.index()].push(
                            seq.iter()
                                .map(|d| world_distribution(&base, d))
                                .collect::<Result<_>>()?,
                        );
                    }
                }
                Ok(AnyModel::Ordered(OrderedKripkeModel::new(base, lambda)?))
            }
        }
    }

    pub fn from_model(model: &AnyModel, embed_game: bool) -> ModelFile {
        let base = model.base();
        let labels = base.world_labels();
        let per = |f: &dyn Fn(Player, usize) -> _| -> PerPlayer<IndexMap<String, _>> {
            PerPlayer::build(|p| {
                (0..labels.len())
                    .map(|w| (labels[w].clone(), f(p, w)))
                    .collect()
            })
        };
        let access = PerPlayer::build(|p| {
            (0..labels.len())
                .map(|w| {
                    let targets = base
                        .access(p, w)
                        .iter()
                        .map(|&v| labels[v].clone())
                        .collect();
                    (labels[w].clone(), targets)
                })
                .collect()
        });
        let sigma = PerPlayer::build(|p| {
            (0..labels.len())
                .map(|w| {
                    (
                        labels[w].clone(),
                        base.game.strategy_label(p, base.sigma(p, w)).to_string(),
                    )
                })
                .collect()
        });
        let (p, lambda) = match model {
            AnyModel::Standard(_) => (None, None),
            AnyModel::Prob(m) => (Some(per(&|pl, w| world_weights(base, m.prob(pl, w)))), None),
            AnyModel::Ordered(m) => (
                None,
                Some(PerPlayer::build(|pl| {
                    (0..labels.len())
                        .map(|w| {
                            let seq = m
                                .lambda(pl, w)
                                .iter()
                                .map(|d| world_weights(base, d))
                                .collect();
                            (labels[w].clone(), seq)
                        })
                        .collect()
                })),
            ),
        };
        ModelFile {
            game: embed_game.then(|| base.game.to_file()),
            worlds: labels.to_vec(),
            access,
            sigma,
            p,
            lambda,
        }
    }
}

pub fn load_model(text: &str, game: Option<&Game>) -> Result<AnyModel> {
    parse_json::<ModelFile>("model file", text)?.into_model(game)
}

pub fn model_to_json(model: &AnyModel, embed_game: bool) -> String {
    to_json(&ModelFile::from_model(model, embed_game))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventFile {
    pub worlds: Vec<String>,
}

pub fn load_event(text: &str, base: &StandardKripkeModel) -> Result<EventSet> {
    let file: EventFile = parse_json("event file", text)?;
    let refs: Vec<&str> = file.worlds.iter().map(String::as_str).collect();
    base.event(&refs)
}

pub fn event_to_json(base: &StandardKripkeModel, e: &EventSet) -> String {
    to_json(&EventFile {
        worlds: base.event_labels(e),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BeliefEntry {
    Lex(Vec<WeightMap>),
    Prob(WeightMap),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypesFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game: Option<GameFile>,
    pub types: [Vec<String>; 2],
    pub beliefs: PerPlayer<IndexMap<String, BeliefEntry>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnyTypes {
    Lex(LexEpistemicModel),
    Prob(ProbEpistemicModel),
}

fn pair_distribution(
    game: &Game,
    types: &[Vec<String>; 2],
    p: Player,
    weights: &WeightMap,
) -> Result<Distribution<Pair>> {
    let j = p.other();
    let entries = weights
        .iter()
        .map(|(key, x)| {
            let (s, t) = key.split_once(',').ok_or_else(|| {
                Error::Parse(format!("belief key {key:?}: expected \"STRATEGY,TYPE\""))
            })?;
            let sj = game.strategy_index(j, s.trim())?;
            let tj = types[j.index()]
                .iter()
                .position(|l| l == t.trim())
                .ok_or_else(|| Error::Unknown {
                    kind: "type",
                    label: format!("{} (player {j})", t.trim()),
                })?;
            if x.is_negative() {
                return Err(Error::input("probabilities must be non-negative"));
            }
            Ok(((sj, tj), x.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Distribution::from_weights(entries))
}

fn pair_weights<M: TypeModel>(model: &M, p: Player, d: &Distribution<Pair>) -> WeightMap {
    let j = p.other();
    d.iter()
        .map(|(&(s, t), x)| {
            (
                format!(
                    "{},{}",
                    model.game().strategy_label(j, s),
                    model.type_labels(j)[t]
                ),
                x.clone(),
            )
        })
        .collect()
}

impl TypesFile {
    pub fn into_types(self, game: Option<&Game>) -> Result<AnyTypes> {
        let game = pick_game(self.game, game)?;
        let types = self.types;
        let mut lex: [Vec<Vec<Distribution<Pair>>>; 2] = [Vec::new(), Vec::new()];
        let mut prob: [Vec<Distribution<Pair>>; 2] = [Vec::new(), Vec::new()];
        for p in Player::BOTH {
            for entry in per_world(&types[p.index()], self.beliefs.get(p), "beliefs", p).map_err(
                |e| match e {
                    Error::Unknown { label, .. } => Error::Unknown {
                        kind: "type",
                        label,
                    },
                    other => other,
                },
            )? {
                match entry {
                    BeliefEntry::Lex(seq) => lex[p.index()].push(
                        seq.iter()
                            .map(|d| pair_distribution(&game, &types, p, d))
                            .collect::<Result<_>>()?,
                    ),
                    BeliefEntry::Prob(d) => {
                        prob[p.index()].push(pair_distribution(&game, &types, p, d)?)
                    }
                }
            }
        }
        let lex_count: usize = lex.iter().map(Vec::len).sum();
        let prob_count: usize = prob.iter().map(Vec::len).sum();
        match (lex_count, prob_count) {
            (_, 0) => Ok(AnyTypes::Lex(LexEpistemicModel::new(game, types, lex)?)),
            (0, _) => Ok(AnyTypes::Prob(ProbEpistemicModel::new(game, types, prob)?)),
            _ => Err(Error::input(
                "beliefs mix lexicographic lists and single distributions",
            )),
        }
    }

    pub fn from_types(model: &AnyTypes, embed_game: bool) -> TypesFile {
        let (game, types) = match model {
            AnyTypes::Lex(m) => (&m.game, m.types().clone()),
            AnyTypes::Prob(m) => (&m.game, m.types().clone()),
        };
        let beliefs = PerPlayer::build(|p| {
            types[p.index()]
                .iter()
                .enumerate()
                .map(|(t, label)| {
                    let entry = match model {
                        AnyTypes::Lex(m) => BeliefEntry::Lex(
                            m.belief(p, t)
                                .iter()
                                .map(|d| pair_weights(m, p, d))
                                .collect(),
                        ),
                        AnyTypes::Prob(m) => BeliefEntry::Prob(pair_weights(m, p, m.belief(p, t))),
                    };
                    (label.clone(), entry)
                })
                .collect()
        });
        TypesFile {
            game: embed_game.then(|| game.to_file()),
            types,
            beliefs,
        }
    }
}

pub fn load_types(text: &str, game: Option<&Game>) -> Result<AnyTypes> {
    parse_json::<TypesFile>("types file", text)?.into_types(game)
}

pub fn types_to_json(model: &AnyTypes, embed_game: bool) -> String {
    to_json(&TypesFile::from_types(model, embed_game))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{
        four_world_ordered, four_world_prob, myerson, myerson_lex_types, myerson_prob_types,
    };

    #[test]
    fn models_round_trip() {
        let models = [
            AnyModel::Standard(four_world_ordered().base),
            AnyModel::Prob(four_world_prob(&Rational::new(1, 4))),
            AnyModel::Ordered(four_world_ordered()),
        ];
        for m in models {
            let text = model_to_json(&m, true);
            assert_eq!(load_model(&text, None).unwrap(), m);
            let bare = model_to_json(&m, false);
            assert!(load_model(&bare, None).is_err());
            assert_eq!(load_model(&bare, Some(&myerson())).unwrap(), m);
        }
    }

    #[test]
    fn documented_lambda_shape_parses() {
        let text = r#"{
          "worlds": ["w1"],
          "access": {"1": {"w1": ["w1"]}, "2": {"w1": ["w1"]}},
          "sigma": {"1": {"w1": "A"}, "2": {"w1": "C"}},
          "lambda": {"1": {"w1": [{"w1": "1"}]}, "2": {"w1": [{"w1": "1"}]}}
        }"#;
        let m = load_model(text, Some(&myerson())).unwrap();
        assert_eq!(m.kind(), "ordered");
    }

    #[test]
    fn bad_model_files() {
        let g = myerson();
        let missing = r#"{"worlds":["w1","w2"],"access":{"1":{"w1":["w1"]},"2":{"w1":["w1"],"w2":["w2"]}},
            "sigma":{"1":{"w1":"A","w2":"A"},"2":{"w1":"C","w2":"C"}}}"#;
        assert!(load_model(missing, Some(&g))
            .unwrap_err()
            .to_string()
            .contains("w2"));
        let unknown = r#"{"worlds":["w1"],"access":{"1":{"w1":["w9"]},"2":{"w1":["w1"]}},
            "sigma":{"1":{"w1":"A"},"2":{"w1":"C"}}}"#;
        assert!(load_model(unknown, Some(&g))
            .unwrap_err()
            .to_string()
            .contains("w9"));
        let strategy = r#"{"worlds":["w1"],"access":{"1":{"w1":["w1"]},"2":{"w1":["w1"]}},
            "sigma":{"1":{"w1":"Z"},"2":{"w1":"C"}}}"#;
        assert!(load_model(strategy, Some(&g)).is_err());
        assert!(load_model("{", Some(&g)).is_err());
        let extra = r#"{"worlds":["w1"],"access":{"1":{"w1":["w1"]},"2":{"w1":["w1"]}},
            "sigma":{"1":{"w1":"A"},"2":{"w1":"C"}},"colour":1}"#;
        assert!(load_model(extra, Some(&g)).is_err());
    }

    #[test]
    fn events_round_trip() {
        let m = four_world_ordered();
        let e: EventSet = [0usize, 3].into_iter().collect();
        let text = event_to_json(&m.base, &e);
        assert_eq!(load_event(&text, &m.base).unwrap(), e);
        assert!(load_event(r#"{"worlds":["nope"]}"#, &m.base).is_err());
    }

    #[test]
    fn types_round_trip() {
        for t in [
            AnyTypes::Lex(myerson_lex_types()),
            AnyTypes::Prob(myerson_prob_types(&Rational::new(1, 3))),
        ] {
            let text = types_to_json(&t, true);
            assert_eq!(load_types(&text, None).unwrap(), t);
        }
    }

    #[test]
    fn documented_types_shape_parses() {
        let text = r#"{"types":[["th1"],["th2"]],"beliefs":{
            "1":{"th1":[{"C,th2":"1"},{"D,th2":"1"}]},
            "2":{"th2":[{"A,th1":"1"},{"B,th1":"1"}]}}}"#;
        match load_types(text, Some(&myerson())).unwrap() {
            AnyTypes::Lex(m) => assert_eq!(m, myerson_lex_types()),
            AnyTypes::Prob(_) => panic!("expected lexicographic types"),
        }
        let mixed = r#"{"types":[["th1"],["th2"]],"beliefs":{
            "1":{"th1":[{"C,th2":"1"}]},
            "2":{"th2":{"A,th1":"1"}}}}"#;
        assert!(load_types(mixed, Some(&myerson())).is_err());
        let bad_key = r#"{"types":[["th1"],["th2"]],"beliefs":{
            "1":{"th1":{"C":"1"}},"2":{"th2":{"A,th1":"1"}}}}"#;
        assert!(load_types(bad_key, Some(&myerson())).is_err());
    }
}
