use std::fmt;

use serde::Serialize;

use crate::game::Player;

/// The axiom or condition a [`Violation`] breaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Seriality,
    Transitivity,
    Euclideanness,
    SigmaConstancy,
    /// A probability or level distribution is not a probability measure.
    NotAProbability,
    /// Positive weight outside `R_i(w)`.
    SupportOutsideAccess,
    /// `p_i` differs between `w` and a world accessible from it.
    ProbabilityConstancy,
    /// `λ_i` differs between `w` and a world accessible from it.
    LambdaConstancy,
    EmptyLexicographicBelief,
    LevelInjectivity,
    Caution,
    Trembling,
    DisjointSupports,
    Surjection,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::Seriality => "seriality",
            ViolationKind::Transitivity => "transitivity",
            ViolationKind::Euclideanness => "euclideanness",
            ViolationKind::SigmaConstancy => "sigma-constancy",
            ViolationKind::NotAProbability => "not-a-probability",
            ViolationKind::SupportOutsideAccess => "support-outside-access",
            ViolationKind::ProbabilityConstancy => "probability-constancy",
            ViolationKind::LambdaConstancy => "lambda-constancy",
            ViolationKind::EmptyLexicographicBelief => "empty-lexicographic-belief",
            ViolationKind::LevelInjectivity => "level-injectivity",
            ViolationKind::Caution => "caution",
            ViolationKind::Trembling => "trembling",
            ViolationKind::DisjointSupports => "disjoint-supports",
            ViolationKind::Surjection => "surjection",
        };
        f.write_str(s)
    }
}

/// One failed condition, with the worlds involved and a readable message.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    #[serde(serialize_with = "player_key")]
    pub player: Option<Player>,
    /// World indices; the first is the world at which the condition fails.
    #[serde(skip)]
    pub worlds: Vec<usize>,
    pub message: String,
}

fn player_key<S: serde::Serializer>(p: &Option<Player>, s: S) -> Result<S::Ok, S::Error> {
    match p {
        Some(p) => s.collect_str(p),
        None => s.serialize_none(),
    }
}

impl Violation {
    pub fn new(
        kind: ViolationKind,
        player: Player,
        worlds: Vec<usize>,
        message: impl Into<String>,
    ) -> Self {
        Violation {
            kind,
            player: Some(player),
            worlds,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.player {
            Some(p) => write!(f, "[{}] player {}: {}", self.kind, p, self.message),
            None => write!(f, "[{}] {}", self.kind, self.message),
        }
    }
}

/// Distinct kinds among `violations`, sorted.
pub fn kinds(violations: &[Violation]) -> Vec<ViolationKind> {
    let mut k: Vec<ViolationKind> = violations.iter().map(|v| v.kind).collect();
    k.sort();
    k.dedup();
    k
}
