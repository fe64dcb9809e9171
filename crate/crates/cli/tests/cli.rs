use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use egk_core::convergence::{build_epsilon_model, EpsilonSchedule, WeightingScheme};
use egk_core::dominance::dekel_fudenberg;
use egk_core::fixtures::{four_world_ordered, four_world_prob, myerson};
use egk_core::io::{load_event, load_model, load_types, AnyModel, AnyTypes};
use egk_core::types::build_ordered_from_lex;
use egk_core::{Game, Player, Rational};
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn egk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_egk"))
        .args(args)
        .env_remove("EGK_COLOR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf8")
}

fn json(args: &[&str]) -> Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let o = egk(&all);
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(&o)))
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf8 path")
}

#[test]
fn df_on_myerson_matches_library() {
    let file = data("myerson.json");
    let o = egk(&["game", "analyze", path(&file), "--procedure", "df"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("survivors 1: A\n"), "{text}");
    assert!(text.contains("survivors 2: C\n"));

    let j = json(&["game", "analyze", path(&file), "--procedure", "df"]);
    let g = myerson();
    let (survivors, trace) = dekel_fudenberg(&g);
    for p in Player::BOTH {
        let got: Vec<String> =
            serde_json::from_value(j["survivors"][p.to_string()].clone()).unwrap();
        assert_eq!(got, survivors.labels(&g, p));
    }
    assert_eq!(j["trace"], serde_json::to_value(trace.table(&g)).unwrap());
    assert_eq!(j["trace"][0]["dominator"]["A"], "1");
}

#[test]
fn iesds_keeps_everything_in_myerson() {
    let j = json(&[
        "game",
        "analyze",
        path(&data("myerson.json")),
        "--procedure",
        "iesds",
    ]);
    assert_eq!(j["survivors"]["1"], serde_json::json!(["A", "B"]));
    assert_eq!(j["survivors"]["2"], serde_json::json!(["C", "D"]));
    assert_eq!(j["trace"], serde_json::json!([]));
}

#[test]
fn lrat_pipeline_gives_w1() {
    let dir = tempfile::tempdir().unwrap();
    let lrat = dir.path().join("lrat.json");
    let model = data("four_world_ordered.json");
    let o = egk(&["model", "lrat", path(&model), "--event-out", path(&lrat)]);
    assert_eq!(o.status.code(), Some(0));
    let o = egk(&[
        "model",
        "operators",
        path(&model),
        "--op",
        "cb1",
        "--event",
        path(&lrat),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "cb1({w1}) = {w1}\n");
    let j = json(&[
        "model",
        "operators",
        path(&model),
        "--op",
        "cb",
        "--event",
        path(&lrat),
    ]);
    assert_eq!(j["result"], serde_json::json!([]));
}

#[test]
fn rat_feeds_upper_common_belief() {
    let dir = tempfile::tempdir().unwrap();
    let rat = dir.path().join("rat.json");
    let model = data("four_world_prob.json");
    assert_eq!(
        egk(&["model", "rat", path(&model), "--event-out", path(&rat)])
            .status
            .code(),
        Some(0)
    );
    let j = json(&[
        "model",
        "operators",
        path(&model),
        "--op",
        "upper-cb",
        "--eps",
        "1/4",
        "--event",
        path(&rat),
        "--show-upper",
    ]);
    assert_eq!(j["result"], serde_json::json!(["w1"]));
    assert_eq!(j["upper_access"]["w2"]["1"], serde_json::json!(["w1"]));
    let j = json(&[
        "model",
        "operators",
        path(&model),
        "--op",
        "cb",
        "--event",
        path(&rat),
    ]);
    assert_eq!(j["result"], serde_json::json!([]));
    let o = egk(&["model", "operators", path(&model), "--op", "upper-cb"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn model_check_exit_codes() {
    let ex31 = data("four_world_prob.json");
    assert_eq!(
        egk(&["model", "check", path(&ex31), "--eps", "1/4"])
            .status
            .code(),
        Some(0)
    );
    let o = egk(&[
        "model",
        "check",
        path(&ex31),
        "--eps",
        "1/4",
        "--trembling-reading",
        "pointwise",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("[trembling]"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let mut j: Value =
        serde_json::from_str(&std::fs::read_to_string(data("four_world_ordered.json")).unwrap())
            .unwrap();
    j["access"]["1"]["w1"] = serde_json::json!(["w1"]);
    std::fs::write(&bad, j.to_string()).unwrap();
    let o = egk(&["--json", "model", "check", path(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(!report["validity"].as_array().unwrap().is_empty());
}

#[test]
fn malformed_input_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("broken.json");
    std::fs::write(&bad, "{\n  \"worlds\": [\"w1\",\n").unwrap();
    let o = egk(&["model", "check", path(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("broken.json"), "{err}");
    assert!(err.contains("line 3"), "{err}");

    let o = egk(&["model", "check", path(&dir.path().join("missing.json"))]);
    assert_eq!(o.status.code(), Some(2));
    let o = egk(&["model", "frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    let o = egk(&["model", "lrat", path(&data("four_world_prob.json"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn types_round_trip_through_kripke() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ordered.json");
    let types = data("myerson_types.json");
    assert_eq!(
        egk(&["types", "to-kripke", path(&types), "--out", path(&out)])
            .status
            .code(),
        Some(0)
    );
    let AnyTypes::Lex(lex) = load_types(&std::fs::read_to_string(&types).unwrap(), None).unwrap()
    else {
        panic!("lexicographic file");
    };
    let reloaded = load_model(&std::fs::read_to_string(&out).unwrap(), None).unwrap();
    assert_eq!(
        reloaded,
        AnyModel::Ordered(build_ordered_from_lex(&lex).unwrap())
    );

    let j = json(&["types", "analyze", path(&types)]);
    assert_eq!(j["strategies"]["1"], serde_json::json!(["A"]));
    assert_eq!(j["types"][0]["cautious"], true);
    assert_eq!(j["types"][0]["primary_belief_in_rationality"], true);
}

#[test]
fn model_to_types_and_back() {
    let dir = tempfile::tempdir().unwrap();
    let types = dir.path().join("types.json");
    let model = data("four_world_prob.json");
    assert_eq!(
        egk(&["model", "to-types", path(&model), "--out", path(&types)])
            .status
            .code(),
        Some(0)
    );
    let j = json(&["types", "analyze", path(&types), "--eps", "1/4"]);
    assert_eq!(j["strategies"]["1"], serde_json::json!(["A"]));
    assert_eq!(j["strategies"]["2"], serde_json::json!(["C"]));
    assert_eq!(
        egk(&["types", "analyze", path(&types)]).status.code(),
        Some(2)
    );

    let j = json(&[
        "model",
        "to-types",
        path(&model),
        "--per-world",
        "--complete",
        "1/4",
    ]);
    assert_eq!(j["world_types"]["w3"]["1"], "t1@w3");
    assert_eq!(j["types"]["types"][0].as_array().unwrap().len(), 4);
}

#[test]
fn emitted_events_reload() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.json");
    let model = data("four_world_ordered.json");
    egk(&[
        "model",
        "operators",
        path(&model),
        "--op",
        "b1-1",
        "--event-out",
        path(&out),
    ]);
    let base = four_world_ordered().base;
    let e = load_event(&std::fs::read_to_string(&out).unwrap(), &base).unwrap();
    assert_eq!(e, base.all_worlds());
}

#[test]
fn converge_emits_the_family() {
    let dir = tempfile::tempdir().unwrap();
    let fam = dir.path().join("fam");
    let model = data("four_world_ordered.json");
    let o = egk(&[
        "converge",
        path(&model),
        "--schedule",
        "geometric:1/2,9",
        "--scheme",
        "perfect",
        "--emit-family",
        path(&fam),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let schedule: EpsilonSchedule = "geometric:1/2,9".parse().unwrap();
    for (n, eps) in schedule.values().iter().enumerate() {
        let text = std::fs::read_to_string(fam.join(format!("eps_{n}.json"))).unwrap();
        let expected =
            build_epsilon_model(&four_world_ordered(), eps, WeightingScheme::Perfect).unwrap();
        assert_eq!(load_model(&text, None).unwrap(), AnyModel::Prob(expected));
    }
    let first = load_model(
        &std::fs::read_to_string(fam.join("eps_0.json")).unwrap(),
        None,
    )
    .unwrap();
    assert_eq!(first, AnyModel::Prob(four_world_prob(&Rational::new(1, 4))));

    let j = json(&["converge", path(&model), "--scheme", "proper"]);
    assert_eq!(j["matches"], true);
    assert_eq!(j["cb1_lrat"], serde_json::json!(["w1"]));
    assert_eq!(j["rows"].as_array().unwrap().len(), 9);
    assert_eq!(j["rows"][1]["eps"], "1/8");
}

/// Minimal DOT checker: a `digraph ID {` header, then statements
/// `node [..];`, `ID [..];` or `ID -> ID [..];` with well-formed quoted
/// attribute lists, and a closing brace.
fn valid_dot(text: &str) -> bool {
    fn ident(s: &str) -> bool {
        !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
    }
    fn attrs(s: &str) -> bool {
        let Some(inner) = s.strip_prefix('[').and_then(|s| s.strip_suffix(']')) else {
            return false;
        };
        let mut parts = Vec::new();
        let (mut cur, mut quoted, mut escaped) = (String::new(), false, false);
        for c in inner.chars() {
            if escaped {
                escaped = false;
            } else if c == '\\' && quoted {
                escaped = true;
            } else if c == '"' {
                quoted = !quoted;
            } else if c == ',' && !quoted {
                parts.push(std::mem::take(&mut cur));
                continue;
            }
            cur.push(c);
        }
        parts.push(cur);
        !quoted
            && parts.iter().all(|p| match p.trim().split_once('=') {
                Some((k, v)) => {
                    ident(k)
                        && (ident(v) || (v.len() >= 2 && v.starts_with('"') && v.ends_with('"')))
                }
                None => false,
            })
    }
    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect();
    let Some((head, rest)) = lines.split_first() else {
        return false;
    };
    let Some((last, body)) = rest.split_last() else {
        return false;
    };
    let header = head
        .strip_prefix("digraph ")
        .and_then(|s| s.strip_suffix(" {"))
        .is_some_and(ident);
    header
        && *last == "}"
        && body.iter().all(|l| {
            let Some(stmt) = l.strip_suffix(';') else {
                return false;
            };
            let (target, list) = match stmt.find(" [") {
                Some(i) => (&stmt[..i], &stmt[i + 1..]),
                None => (stmt, "[]"),
            };
            let target_ok = match target.split_once(" -> ") {
                Some((a, b)) => ident(a) && ident(b),
                None => ident(target),
            };
            target_ok && (list == "[]" || attrs(list))
        })
}

#[test]
fn dot_export_is_well_formed() {
    for file in ["four_world_ordered.json", "four_world_prob.json"] {
        let o = egk(&["export", "dot", path(&data(file))]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        assert!(valid_dot(&text), "{text}");
    }
    assert!(!valid_dot("digraph g {\n  a -> [x=1];\n}\n"));
    assert!(!valid_dot("digraph g {\n  a [label=\"open];\n}\n"));
}

#[test]
fn output_is_deterministic() {
    let model = data("four_world_prob.json");
    let args = ["--json", "model", "to-types", path(&model), "--per-world"];
    assert_eq!(egk(&args).stdout, egk(&args).stdout);
    let ordered = data("four_world_ordered.json");
    let args = ["converge", path(&ordered)];
    assert_eq!(egk(&args).stdout, egk(&args).stdout);
}

#[test]
fn color_follows_environment() {
    let file = data("four_world_ordered.json");
    let plain = egk(&["model", "check", path(&file)]);
    assert!(!stdout(&plain).contains('\u{1b}'));
    let colored = Command::new(env!("CARGO_BIN_EXE_egk"))
        .args(["model", "check", path(&file)])
        .env("EGK_COLOR", "1")
        .output()
        .unwrap();
    assert!(stdout(&colored).contains("\u{1b}[32mok\u{1b}[0m"));
}

#[test]
fn explicit_game_overrides_embedded() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("game.json");
    let mut g: Value = serde_json::to_value(myerson().to_file()).unwrap();
    g["payoffs"]["A,D"] = serde_json::json!(["0", "5"]);
    std::fs::write(&game, g.to_string()).unwrap();
    let model = data("four_world_ordered.json");
    let j = json(&["--game", path(&game), "model", "lrat", path(&model)]);
    let changed = Game::from_json(&g.to_string()).unwrap();
    assert_ne!(changed, myerson());
    assert_eq!(j["2"], serde_json::json!(["w2", "w4"]));
    assert_eq!(j["all"], serde_json::json!(["w2"]));
}

#[test]
fn every_verb_has_help() {
    for verb in [
        vec!["game", "analyze"],
        vec!["model", "check"],
        vec!["model", "operators"],
        vec!["model", "rat"],
        vec!["model", "lrat"],
        vec!["model", "to-types"],
        vec!["types", "analyze"],
        vec!["types", "to-kripke"],
        vec!["converge"],
        vec!["export", "dot"],
    ] {
        let mut args = verb.clone();
        args.push("--help");
        let o = egk(&args);
        assert_eq!(o.status.code(), Some(0), "{verb:?}");
        assert!(stdout(&o).contains("Usage"), "{verb:?}");
    }
}
