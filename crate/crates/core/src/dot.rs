//! Graphviz rendering of Kripke models.

use std::fmt::Write;

use crate::game::Player;
use crate::io::AnyModel;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn player_style(p: Player) -> (&'static str, &'static str) {
    match p {
        Player::One => ("blue", "solid"),
        Player::Two => ("red", "dashed"),
    }
}

/// Nodes `w:(s1,s2)`, one edge per accessible pair and player. Probabilistic
/// models label edges with weights, ordered ones with `level:weight`, and
/// primary-level edges are drawn bold.
pub fn to_dot(model: &AnyModel) -> String {
    let base = model.base();
    let game = &base.game;
    let mut out = String::from("digraph kripke {\n  node [shape=ellipse];\n");
    for w in 0..base.num_worlds() {
        let (a, b) = base.profile(w);
        let label = format!(
            "{}:({},{})",
            base.world_label(w),
            game.strategy_label(Player::One, a),
            game.strategy_label(Player::Two, b)
        );
        writeln!(out, "  n{w} [label={}];", quote(&label)).expect("string write");
    }
    for p in Player::BOTH {
        let (color, style) = player_style(p);
        for w in 0..base.num_worlds() {
            for &v in base.access(p, w) {
                let mut attrs = vec![format!("color={color}"), format!("style={style}")];
                let mut text = format!("{p}");
                match model {
                    AnyModel::Standard(_) => {}
                    AnyModel::Prob(m) => {
                        write!(text, ": {}", m.prob(p, w).weight(&v)).expect("string write");
                    }
                    AnyModel::Ordered(m) => {
                        let levels = m.lambda(p, w);
                        if let Some(k) = levels.iter().position(|d| d.weight(&v).is_positive()) {
                            write!(text, ": L{} {}", k + 1, levels[k].weight(&v))
                                .expect("string write");
                            if k == 0 {
                                attrs[1] = "style=bold".into();
                            }
                        }
                    }
                }
                attrs.push(format!("label={}", quote(&text)));
                writeln!(out, "  n{w} -> n{v} [{}];", attrs.join(", ")).expect("string write");
            }
        }
    }
    out.push_str("}\n");
    out
}
