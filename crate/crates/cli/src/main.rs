//! `egk`: command-line front end for egk-core.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use egk_core::convergence::{
    check_limit_conditions, verify_convergence, EpsilonSchedule, WeightingScheme,
};
use egk_core::dominance::{dekel_fudenberg, iesds};
use egk_core::dot::to_dot;
use egk_core::epsilon::{
    check_prob_caution, check_trembling, upper_access, upper_belief, upper_common_belief,
};
use egk_core::io::{
    event_to_json, load_event, load_model, load_types, model_to_json, types_to_json, AnyModel,
    AnyTypes,
};
use egk_core::kripke::Rationality;
use egk_core::types::{
    build_ordered_from_lex, build_prob_kripke_from_types, cautious_completion, deems_possible,
    eps_permissible, eps_trembling, extract_prob_model, extract_world_types, permissible,
    primary_belief_in_rationality, type_caution, TypeModel,
};
use egk_core::{
    Epsilon, EventSet, Game, Player, Rational, StandardKripkeModel, TremblingReading, Violation,
};

#[derive(Parser, Debug)]
#[command(
    name = "egk",
    version,
    about = "Dominance, Kripke models and type models for two-player games"
)]
struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Game file used instead of the one embedded in a model or type file.
    #[arg(long, global = true, value_name = "FILE")]
    game: Option<PathBuf>,

    /// How trembling reads "the accessible world's strategy is not optimal".
    #[arg(long, global = true, value_enum, default_value_t = Reading::Belief)]
    trembling_reading: Reading,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Reading {
    Belief,
    Pointwise,
}

impl From<Reading> for TremblingReading {
    fn from(r: Reading) -> Self {
        match r {
            Reading::Belief => TremblingReading::Belief,
            Reading::Pointwise => TremblingReading::Pointwise,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Operations on a game file.
    #[command(subcommand)]
    Game(GameCommand),
    /// Operations on a Kripke model file.
    #[command(subcommand)]
    Model(ModelCommand),
    /// Operations on a type model file.
    #[command(subcommand)]
    Types(TypesCommand),
    /// Build probabilistic approximations of an ordered model along a schedule of eps values.
    Converge(ConvergeArgs),
    /// Export a model in another format.
    #[command(subcommand)]
    Export(ExportCommand),
}

#[derive(Subcommand, Debug)]
enum GameCommand {
    /// Run an elimination procedure and print survivors with the trace.
    Analyze {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Procedure::Df)]
        procedure: Procedure,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Procedure {
    /// One round of weak dominance, then iterated strict dominance.
    Df,
    /// Iterated strict dominance.
    Iesds,
}

#[derive(Subcommand, Debug)]
enum ModelCommand {
    /// Validate a model; with --eps also check trembling on probabilistic models.
    Check {
        file: PathBuf,
        #[arg(long)]
        eps: Option<Epsilon>,
    },
    /// Apply a belief operator to an event (all worlds by default).
    Operators {
        file: PathBuf,
        #[arg(long, value_enum)]
        op: Operator,
        /// Event file; defaults to every world.
        #[arg(long, value_name = "FILE")]
        event: Option<PathBuf>,
        /// Threshold for the upper operators.
        #[arg(long)]
        eps: Option<Epsilon>,
        /// Also list the worlds weighted above eps at each world.
        #[arg(long)]
        show_upper: bool,
        #[arg(long, value_name = "FILE")]
        event_out: Option<PathBuf>,
    },
    /// Rationality events of a probabilistic model.
    Rat {
        file: PathBuf,
        /// Write RAT as an event file.
        #[arg(long, value_name = "FILE")]
        event_out: Option<PathBuf>,
    },
    /// Lexicographic rationality events of an ordered model.
    Lrat {
        file: PathBuf,
        /// Write LRAT as an event file.
        #[arg(long, value_name = "FILE")]
        event_out: Option<PathBuf>,
    },
    /// Read a type model off a probabilistic model.
    ToTypes {
        file: PathBuf,
        /// One type per world instead of classes of worlds with identical beliefs.
        #[arg(long)]
        per_world: bool,
        /// Give every missing deemed-possible type this share of each strategy's weight.
        #[arg(long, value_name = "ETA")]
        complete: Option<Rational>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Operator {
    B1,
    B2,
    Cb,
    #[value(name = "b1-1")]
    B1Level1,
    #[value(name = "b2-1")]
    B2Level1,
    Cb1,
    UpperB1,
    UpperB2,
    UpperCb,
}

#[derive(Subcommand, Debug)]
enum TypesCommand {
    /// Type properties and the permissible (or eps-permissible) types.
    Analyze {
        file: PathBuf,
        /// Required for probabilistic type models.
        #[arg(long)]
        eps: Option<Epsilon>,
    },
    /// Build the product Kripke model of a type model.
    ToKripke {
        file: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    /// Ordered model file.
    file: PathBuf,
    /// `geometric:R,N` (eps_n = R^(n+2), n < N) or `list:e1,e2,...`.
    #[arg(long, default_value = "geometric:1/2,9")]
    schedule: EpsilonSchedule,
    #[arg(long, default_value_t = WeightingScheme::Perfect)]
    scheme: WeightingScheme,
    /// Directory receiving one model file per schedule step.
    #[arg(long, value_name = "DIR")]
    emit_family: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum ExportCommand {
    /// Graphviz rendering of a model.
    Dot {
        file: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

/// A failure that maps to exit code 2.
struct InputError(String);

impl<E: std::fmt::Display> From<(&Path, E)> for InputError {
    fn from((path, e): (&Path, E)) -> Self {
        InputError(format!("{}: {e}", path.display()))
    }
}

type Outcome = std::result::Result<Report, InputError>;

/// What a verb produced: text, JSON and whether violations were found.
struct Report {
    text: String,
    json: Value,
    violations: bool,
}

impl Report {
    fn ok(text: String, json: Value) -> Self {
        Report {
            text,
            json,
            violations: false,
        }
    }
}

struct Style {
    color: bool,
}

impl Style {
    fn from_env() -> Self {
        let color = std::env::var("EGK_COLOR")
            .map(|v| {
                matches!(
                    v.to_ascii_lowercase().as_str(),
                    "1" | "true" | "yes" | "on" | "always"
                )
            })
            .unwrap_or(false);
        Style { color }
    }

    fn paint(&self, code: &str, s: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{s}\x1b[0m")
        } else {
            s.to_string()
        }
    }

    fn good(&self, s: &str) -> String {
        self.paint("32", s)
    }

    fn bad(&self, s: &str) -> String {
        self.paint("31", s)
    }

    fn head(&self, s: &str) -> String {
        self.paint("1", s)
    }

    fn verdict(&self, ok: bool) -> String {
        if ok {
            self.good("ok")
        } else {
            self.bad("FAIL")
        }
    }
}

struct Ctx {
    game: Option<Game>,
    reading: TremblingReading,
    style: Style,
}

fn read(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|e| (path, e).into())
}

fn write(path: &Path, text: &str) -> Result<(), InputError> {
    fs::write(path, text).map_err(|e| (path, e).into())
}

impl Ctx {
    fn model(&self, path: &Path) -> Result<AnyModel, InputError> {
        load_model(&read(path)?, self.game.as_ref()).map_err(|e| (path, e).into())
    }

    fn types(&self, path: &Path) -> Result<AnyTypes, InputError> {
        load_types(&read(path)?, self.game.as_ref()).map_err(|e| (path, e).into())
    }
}

fn event_json(base: &StandardKripkeModel, e: &EventSet) -> Value {
    Value::from(base.event_labels(e))
}

fn violations_json(vs: &[Violation]) -> Value {
    serde_json::to_value(vs).expect("violations serialize")
}

fn write_violations(out: &mut String, style: &Style, title: &str, vs: &[Violation]) {
    let _ = writeln!(
        out,
        "{title}: {} ({})",
        style.verdict(vs.is_empty()),
        vs.len()
    );
    for v in vs {
        let _ = writeln!(out, "  {v}");
    }
}

fn game_analyze(path: &Path, procedure: Procedure, style: &Style) -> Outcome {
    let game = Game::from_json(&read(path)?).map_err(|e| InputError::from((path, e)))?;
    let (survivors, trace) = match procedure {
        Procedure::Df => dekel_fudenberg(&game),
        Procedure::Iesds => iesds(&game),
    };
    let rows = trace.table(&game);
    let name = match procedure {
        Procedure::Df => "df",
        Procedure::Iesds => "iesds",
    };
    let labels = Player::BOTH.map(|p| survivors.labels(&game, p));
    let mut text = String::new();
    let _ = writeln!(text, "{}", style.head(&format!("procedure {name}")));
    for p in Player::BOTH {
        let _ = writeln!(text, "survivors {p}: {}", labels[p.index()].join(", "));
    }
    if rows.is_empty() {
        let _ = writeln!(text, "no eliminations");
    } else {
        let _ = writeln!(
            text,
            "{:<6} {:<7} {:<7} {:<10} dominator",
            "round", "phase", "player", "strategy"
        );
        for r in &rows {
            let dom = r
                .dominator
                .iter()
                .map(|(s, x)| format!("{x} {s}"))
                .collect::<Vec<_>>()
                .join(" + ");
            let _ = writeln!(
                text,
                "{:<6} {:<7} {:<7} {:<10} {dom}",
                r.round,
                r.phase.to_string(),
                r.player,
                r.strategy
            );
        }
    }
    let json = json!({
        "procedure": name,
        "survivors": {"1": labels[0], "2": labels[1]},
        "trace": rows,
    });
    Ok(Report::ok(text, json))
}

fn model_check(ctx: &Ctx, path: &Path, eps: Option<&Epsilon>) -> Outcome {
    let model = ctx.model(path)?;
    let style = &ctx.style;
    let mut text = String::new();
    let _ = writeln!(
        text,
        "{} model, {} worlds",
        model.kind(),
        model.base().num_worlds()
    );
    let validity = match &model {
        AnyModel::Standard(m) => m.validate(),
        AnyModel::Prob(m) => m.validate(),
        AnyModel::Ordered(m) => m.validate(),
    };
    write_violations(&mut text, style, "validity", &validity);
    let mut json = json!({"kind": model.kind(), "worlds": model.base().num_worlds(), "validity": violations_json(&validity)});
    let mut found = !validity.is_empty();
    match &model {
        AnyModel::Standard(_) => {
            if eps.is_some() {
                return Err(InputError(
                    "--eps applies to probabilistic models only".into(),
                ));
            }
        }
        AnyModel::Prob(m) => {
            let caution = check_prob_caution(m);
            write_violations(&mut text, style, "caution", &caution);
            found |= !caution.is_empty();
            json["caution"] = violations_json(&caution);
            if let Some(e) = eps {
                let t = check_trembling(m, e, ctx.reading);
                write_violations(
                    &mut text,
                    style,
                    &format!("trembling at eps {e} ({} reading)", ctx.reading),
                    &t,
                );
                found |= !t.is_empty();
                json["trembling"] = violations_json(&t);
                json["eps"] = json!(e.value());
                json["reading"] = json!(ctx.reading.to_string());
            }
        }
        AnyModel::Ordered(m) => {
            if eps.is_some() {
                return Err(InputError(
                    "--eps applies to probabilistic models only".into(),
                ));
            }
            let caution = m.check_caution();
            write_violations(&mut text, style, "caution", &caution);
            found |= !caution.is_empty();
            json["caution"] = violations_json(&caution);
            if validity.is_empty() {
                // structural conditions are properties, not requirements
                let s = m.check_structural_conditions();
                let _ = writeln!(
                    text,
                    "disjoint supports: {}",
                    if s.disjoint_supports { "yes" } else { "no" }
                );
                let _ = writeln!(
                    text,
                    "surjection: {}",
                    if s.surjection { "yes" } else { "no" }
                );
                for v in &s.violations {
                    let _ = writeln!(text, "  {v}");
                }
                json["disjoint_supports"] = json!(s.disjoint_supports);
                json["surjection"] = json!(s.surjection);
                json["structural"] = violations_json(&s.violations);
            }
        }
    }
    Ok(Report {
        text,
        json,
        violations: found,
    })
}

fn require_valid(model: &AnyModel, path: &Path) -> Result<(), InputError> {
    let v = match model {
        AnyModel::Standard(m) => m.validate(),
        AnyModel::Prob(m) => m.validate(),
        AnyModel::Ordered(m) => m.validate(),
    };
    match v.first() {
        None => Ok(()),
        Some(first) => Err(InputError(format!(
            "{}: model is not valid ({} violations, first: {first}); run `egk model check`",
            path.display(),
            v.len()
        ))),
    }
}

fn operators(
    ctx: &Ctx,
    path: &Path,
    op: Operator,
    event: Option<&Path>,
    eps: Option<&Epsilon>,
    show_upper: bool,
    event_out: Option<&Path>,
) -> Outcome {
    let model = ctx.model(path)?;
    require_valid(&model, path)?;
    let base = model.base();
    let e = match event {
        Some(f) => load_event(&read(f)?, base).map_err(|err| InputError::from((f, err)))?,
        None => base.all_worlds(),
    };
    let level1 = matches!(op, Operator::B1Level1 | Operator::B2Level1 | Operator::Cb1);
    let upper = matches!(
        op,
        Operator::UpperB1 | Operator::UpperB2 | Operator::UpperCb
    );
    let result = if level1 {
        let AnyModel::Ordered(m) = &model else {
            return Err(InputError(format!(
                "{}: level-1 operators need an ordered model",
                path.display()
            )));
        };
        match op {
            Operator::B1Level1 => m.level1_belief(Player::One, &e),
            Operator::B2Level1 => m.level1_belief(Player::Two, &e),
            _ => m.common_level1_belief(&e),
        }
    } else if upper {
        let AnyModel::Prob(m) = &model else {
            return Err(InputError(format!(
                "{}: upper operators need a probabilistic model",
                path.display()
            )));
        };
        let eps = eps.ok_or_else(|| InputError("upper operators need --eps".into()))?;
        match op {
            Operator::UpperB1 => upper_belief(m, Player::One, eps, &e),
            Operator::UpperB2 => upper_belief(m, Player::Two, eps, &e),
            _ => upper_common_belief(m, eps, &e),
        }
    } else {
        match op {
            Operator::B1 => base.belief(Player::One, &e),
            Operator::B2 => base.belief(Player::Two, &e),
            _ => base.common_belief(&e),
        }
    };
    let name = op
        .to_possible_value()
        .expect("named")
        .get_name()
        .to_string();
    let mut text = format!(
        "{name}({}) = {}\n",
        base.render_event(&e),
        base.render_event(&result)
    );
    let mut json =
        json!({"op": name, "event": event_json(base, &e), "result": event_json(base, &result)});
    if show_upper {
        let (AnyModel::Prob(m), Some(eps)) = (&model, eps) else {
            return Err(InputError(
                "--show-upper needs a probabilistic model and --eps".into(),
            ));
        };
        let mut rows = serde_json::Map::new();
        for w in 0..base.num_worlds() {
            let sets = Player::BOTH.map(|p| upper_access(m, p, w, eps));
            let _ = writeln!(
                text,
                "  R^>eps at {}: 1 {} 2 {}",
                base.world_label(w),
                base.render_event(&sets[0]),
                base.render_event(&sets[1])
            );
            rows.insert(
                base.world_label(w).to_string(),
                json!({"1": event_json(base, &sets[0]), "2": event_json(base, &sets[1])}),
            );
        }
        json["upper_access"] = Value::Object(rows);
    }
    if let Some(out) = event_out {
        write(out, &event_to_json(base, &result))?;
    }
    Ok(Report::ok(text, json))
}

fn rationality_report(
    base: &StandardKripkeModel,
    name: &str,
    r: &Rationality,
    event_out: Option<&Path>,
) -> Outcome {
    let mut text = String::new();
    for p in Player::BOTH {
        let _ = writeln!(text, "{name}_{p} = {}", base.render_event(r.of(p)));
    }
    let _ = writeln!(text, "{name} = {}", base.render_event(&r.all));
    let json = json!({
        "1": event_json(base, r.of(Player::One)),
        "2": event_json(base, r.of(Player::Two)),
        "all": event_json(base, &r.all),
    });
    if let Some(out) = event_out {
        write(out, &event_to_json(base, &r.all))?;
    }
    Ok(Report::ok(text, json))
}

fn model_rat(ctx: &Ctx, path: &Path, event_out: Option<&Path>) -> Outcome {
    let model = ctx.model(path)?;
    require_valid(&model, path)?;
    let AnyModel::Prob(m) = &model else {
        return Err(InputError(format!(
            "{}: RAT needs a probabilistic model",
            path.display()
        )));
    };
    rationality_report(&m.base, "RAT", &m.rat(), event_out)
}

fn model_lrat(ctx: &Ctx, path: &Path, event_out: Option<&Path>) -> Outcome {
    let model = ctx.model(path)?;
    require_valid(&model, path)?;
    let AnyModel::Ordered(m) = &model else {
        return Err(InputError(format!(
            "{}: LRAT needs an ordered model",
            path.display()
        )));
    };
    rationality_report(&m.base, "LRAT", &m.lrat(), event_out)
}

fn to_types(
    ctx: &Ctx,
    path: &Path,
    per_world: bool,
    complete: Option<&Rational>,
    out: Option<&Path>,
) -> Outcome {
    let model = ctx.model(path)?;
    require_valid(&model, path)?;
    let AnyModel::Prob(m) = &model else {
        return Err(InputError(format!(
            "{}: types are read off probabilistic models",
            path.display()
        )));
    };
    let fail = |e: egk_core::Error| InputError::from((path, e));
    let mut ext = if per_world {
        extract_world_types(m)
    } else {
        extract_prob_model(m)
    }
    .map_err(fail)?;
    if let Some(eta) = complete {
        ext.model = cautious_completion(&ext.model, eta).map_err(fail)?;
    }
    let types = AnyTypes::Prob(ext.model.clone());
    let file = types_to_json(&types, true);
    let mut text = String::new();
    let mut assignment = serde_json::Map::new();
    for w in 0..m.num_worlds() {
        let labels = Player::BOTH.map(|p| ext.model.type_labels(p)[ext.type_at(p, w)].clone());
        let _ = writeln!(
            text,
            "{}: {} / {}",
            m.base.world_label(w),
            labels[0],
            labels[1]
        );
        assignment.insert(
            m.base.world_label(w).to_string(),
            json!({"1": labels[0], "2": labels[1]}),
        );
    }
    match out {
        Some(o) => write(o, &file)?,
        None => text.push_str(&file),
    }
    let json = json!({
        "world_types": Value::Object(assignment),
        "types": serde_json::from_str::<Value>(&file).expect("emitted JSON parses"),
    });
    Ok(Report::ok(text, json))
}

fn types_analyze(ctx: &Ctx, path: &Path, eps: Option<&Epsilon>) -> Outcome {
    let types = ctx.types(path)?;
    let style = &ctx.style;
    let mut text = String::new();
    let mut rows = Vec::new();
    let (survivors, labels, kind) = match &types {
        AnyTypes::Lex(m) => {
            for p in Player::BOTH {
                for t in 0..m.num_types(p) {
                    let cautious = type_caution(m, p, t);
                    let primary = primary_belief_in_rationality(m, p, t);
                    rows.push((
                        p,
                        t,
                        vec![
                            ("cautious", cautious),
                            ("primary belief in rationality", primary),
                        ],
                    ));
                }
            }
            (permissible(m), m.types().clone(), "lexicographic")
        }
        AnyTypes::Prob(m) => {
            let eps =
                eps.ok_or_else(|| InputError("probabilistic type models need --eps".into()))?;
            for p in Player::BOTH {
                for t in 0..m.num_types(p) {
                    let cautious = type_caution(m, p, t);
                    let trembling = eps_trembling(m, p, t, eps);
                    rows.push((
                        p,
                        t,
                        vec![("cautious", cautious), ("eps-trembling", trembling)],
                    ));
                }
            }
            (eps_permissible(m, eps), m.types().clone(), "probabilistic")
        }
    };
    let game = match &types {
        AnyTypes::Lex(m) => m.game().clone(),
        AnyTypes::Prob(m) => m.game().clone(),
    };
    let optimal = |p: Player, t: usize| -> Vec<String> {
        let s = match &types {
            AnyTypes::Lex(m) => m.optimal_strategies(p, t),
            AnyTypes::Prob(m) => m.optimal_strategies(p, t),
        };
        s.into_iter()
            .map(|s| game.strategy_label(p, s).to_string())
            .collect()
    };
    let deemed = |p: Player, t: usize| -> Vec<String> {
        let d = match &types {
            AnyTypes::Lex(m) => deems_possible(m, p, t),
            AnyTypes::Prob(m) => deems_possible(m, p, t),
        };
        d.into_iter()
            .map(|u| labels[p.other().index()][u].clone())
            .collect()
    };
    let _ = writeln!(text, "{kind} type model");
    let mut jtypes = Vec::new();
    for (p, t, props) in &rows {
        let (p, t) = (*p, *t);
        let label = &labels[p.index()][t];
        let survives = survivors[p.index()].contains(&t);
        let flags: Vec<String> = props
            .iter()
            .map(|(n, ok)| format!("{n} {}", if *ok { "yes" } else { "no" }))
            .collect();
        let _ = writeln!(
            text,
            "player {p} type {label}: optimal {{{}}}, deems {{{}}}, {}, {}",
            optimal(p, t).join(", "),
            deemed(p, t).join(", "),
            flags.join(", "),
            if survives {
                style.good("survives")
            } else {
                style.bad("eliminated")
            }
        );
        let mut j = json!({
            "player": p.to_string(),
            "type": label,
            "optimal": optimal(p, t),
            "deems_possible": deemed(p, t),
            "survives": survives,
        });
        for (n, ok) in props {
            j[n.replace([' ', '-'], "_")] = json!(ok);
        }
        jtypes.push(j);
    }
    let mut strategies = serde_json::Map::new();
    for p in Player::BOTH {
        let mut s: Vec<usize> = survivors[p.index()]
            .iter()
            .flat_map(|&t| match &types {
                AnyTypes::Lex(m) => m.optimal_strategies(p, t),
                AnyTypes::Prob(m) => m.optimal_strategies(p, t),
            })
            .collect();
        s.sort_unstable();
        s.dedup();
        let names: Vec<String> = s
            .iter()
            .map(|&s| game.strategy_label(p, s).to_string())
            .collect();
        let _ = writeln!(
            text,
            "strategies optimal for surviving types of {p}: {{{}}}",
            names.join(", ")
        );
        strategies.insert(p.to_string(), json!(names));
    }
    let json = json!({"kind": kind, "types": jtypes, "strategies": Value::Object(strategies)});
    Ok(Report::ok(text, json))
}

fn types_to_kripke(ctx: &Ctx, path: &Path, out: Option<&Path>) -> Outcome {
    let types = ctx.types(path)?;
    let fail = |e: egk_core::Error| InputError::from((path, e));
    let model = match &types {
        AnyTypes::Lex(m) => AnyModel::Ordered(build_ordered_from_lex(m).map_err(fail)?),
        AnyTypes::Prob(m) => AnyModel::Prob(build_prob_kripke_from_types(m).map_err(fail)?),
    };
    let file = model_to_json(&model, true);
    let text = match out {
        Some(o) => {
            write(o, &file)?;
            format!(
                "{} model with {} worlds written to {}\n",
                model.kind(),
                model.base().num_worlds(),
                o.display()
            )
        }
        None => file.clone(),
    };
    let json = json!({"kind": model.kind(), "model": serde_json::from_str::<Value>(&file).expect("emitted JSON parses")});
    Ok(Report::ok(text, json))
}

fn converge(ctx: &Ctx, args: &ConvergeArgs) -> Outcome {
    let path = args.file.as_path();
    let model = ctx.model(path)?;
    require_valid(&model, path)?;
    let AnyModel::Ordered(m) = &model else {
        return Err(InputError(format!(
            "{}: convergence starts from an ordered model",
            path.display()
        )));
    };
    let fail = |e: egk_core::Error| InputError::from((path, e));
    let report = verify_convergence(m, &args.schedule, args.scheme).map_err(fail)?;
    let limits = check_limit_conditions(m, &report.family, &args.schedule).map_err(fail)?;
    let base = &m.base;
    let style = &ctx.style;
    let mut text = String::new();
    let _ = writeln!(text, "{}", style.head(&format!("scheme {}", report.scheme)));
    let _ = writeln!(
        text,
        "{:<3} {:<10} {:<20} {:<20} tail",
        "n", "eps", "RAT", "CB^>eps(RAT)"
    );
    let mut rows = Vec::new();
    for (n, r) in report.rows.iter().enumerate() {
        let _ = writeln!(
            text,
            "{:<3} {:<10} {:<20} {:<20} {}",
            n,
            r.eps.to_string(),
            base.render_event(&r.rat),
            base.render_event(&r.cb_upper_rat),
            base.render_event(&r.tail)
        );
        rows.push(json!({
            "n": n,
            "eps": r.eps.value(),
            "rat": event_json(base, &r.rat),
            "cb_upper_rat": event_json(base, &r.cb_upper_rat),
            "tail": event_json(base, &r.tail),
        }));
    }
    let _ = writeln!(text, "CB^1(LRAT) = {}", base.render_event(&report.cb1_lrat));
    let _ = writeln!(
        text,
        "tail stabilizes at n = {} on {}: {}",
        report.stabilization_index,
        base.render_event(&report.stabilized_set),
        style.verdict(report.matches)
    );
    for clause in 1..=3 {
        let _ = writeln!(
            text,
            "limit clause {clause}: {}",
            style.verdict(limits.clause_holds(clause))
        );
    }
    for v in &limits.violations {
        let _ = writeln!(
            text,
            "  clause {} step {} player {}: {}",
            v.clause, v.step, v.player, v.message
        );
    }
    if let Some(dir) = &args.emit_family {
        fs::create_dir_all(dir).map_err(|e| InputError::from((dir.as_path(), e)))?;
        for (n, fm) in report.family.iter().enumerate() {
            let p = dir.join(format!("eps_{n}.json"));
            write(&p, &model_to_json(&AnyModel::Prob(fm.clone()), true))?;
        }
        let _ = writeln!(
            text,
            "wrote {} models to {}",
            report.family.len(),
            dir.display()
        );
    }
    let json = json!({
        "scheme": report.scheme.to_string(),
        "rows": rows,
        "cb1_lrat": event_json(base, &report.cb1_lrat),
        "stabilization_index": report.stabilization_index,
        "stabilized": report.stabilized,
        "stabilized_set": event_json(base, &report.stabilized_set),
        "matches": report.matches,
        "limit_clauses": (1..=3).map(|c| limits.clause_holds(c)).collect::<Vec<_>>(),
    });
    Ok(Report {
        text,
        json,
        violations: !(report.matches && limits.holds()),
    })
}

fn export_dot(ctx: &Ctx, path: &Path, out: Option<&Path>) -> Outcome {
    let model = ctx.model(path)?;
    let dot = to_dot(&model);
    let text = match out {
        Some(o) => {
            write(o, &dot)?;
            format!("wrote {}\n", o.display())
        }
        None => dot.clone(),
    };
    Ok(Report::ok(text, json!({"dot": dot})))
}

fn run(cli: &Cli) -> Outcome {
    let game = match &cli.game {
        Some(p) => {
            Some(Game::from_json(&read(p)?).map_err(|e| InputError::from((p.as_path(), e)))?)
        }
        None => None,
    };
    let ctx = Ctx {
        game,
        reading: cli.trembling_reading.into(),
        style: Style::from_env(),
    };
    match &cli.command {
        Command::Game(GameCommand::Analyze { file, procedure }) => {
            game_analyze(file, *procedure, &ctx.style)
        }
        Command::Model(ModelCommand::Check { file, eps }) => model_check(&ctx, file, eps.as_ref()),
        Command::Model(ModelCommand::Operators {
            file,
            op,
            event,
            eps,
            show_upper,
            event_out,
        }) => operators(
            &ctx,
            file,
            *op,
            event.as_deref(),
            eps.as_ref(),
            *show_upper,
            event_out.as_deref(),
        ),
        Command::Model(ModelCommand::Rat { file, event_out }) => {
            model_rat(&ctx, file, event_out.as_deref())
        }
        Command::Model(ModelCommand::Lrat { file, event_out }) => {
            model_lrat(&ctx, file, event_out.as_deref())
        }
        Command::Model(ModelCommand::ToTypes {
            file,
            per_world,
            complete,
            out,
        }) => to_types(&ctx, file, *per_world, complete.as_ref(), out.as_deref()),
        Command::Types(TypesCommand::Analyze { file, eps }) => {
            types_analyze(&ctx, file, eps.as_ref())
        }
        Command::Types(TypesCommand::ToKripke { file, out }) => {
            types_to_kripke(&ctx, file, out.as_deref())
        }
        Command::Converge(args) => converge(&ctx, args),
        Command::Export(ExportCommand::Dot { file, out }) => export_dot(&ctx, file, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(report) => {
            let body = if cli.json {
                let mut j = serde_json::to_string_pretty(&report.json).expect("report serializes");
                j.push('\n');
                j
            } else {
                report.text
            };
            // a closed pipe is not an error worth reporting
            let _ = std::io::stdout().lock().write_all(body.as_bytes());
            if report.violations {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(InputError(msg)) => {
            if cli.json {
                println!("{}", json!({"error": msg}));
            }
            eprintln!("egk: {msg}");
            ExitCode::from(2)
        }
    }
}
