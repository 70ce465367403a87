//! Command-line front end: consistency checking, evaluation, updating,
//! atom decomposition and the axiom self-test.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use meadowprob::event::EventTerm;
use meadowprob::lab::{atom_decompose, axiom_suite, eval_expr, Env, GuardedEquation};
use meadowprob::lang::{
    lower, parse, parse_event_term, parse_stalk_expr, render_event, render_stalk_expr, Names,
    SpecDocument, StalkExpr,
};
use meadowprob::pmf::PmfModel;
use meadowprob::solver::{solve, verify_witness, SolveResult, SolverMode, Witness};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Human,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Mode {
    #[default]
    Strict,
    Meadow,
}

impl From<Mode> for SolverMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Strict => SolverMode::Strict,
            Mode::Meadow => SolverMode::Meadow,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "meadowprob",
    version,
    about = "Exact pmf reasoning with meadow-valued probabilities"
)]
pub struct CliConfig {
    #[arg(long, value_enum, default_value_t, global = true)]
    pub format: Format,
    /// How conditional constraints treat a conditioning event of probability 0.
    #[arg(long, value_enum, default_value_t, global = true)]
    pub mode: Mode,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Input {
    /// Input file.
    pub path: Option<PathBuf>,
    /// Input text given directly.
    #[arg(long)]
    pub inline: Option<String>,
}

impl Input {
    fn read(&self) -> Result<String, Failure> {
        match (&self.path, &self.inline) {
            (_, Some(text)) => Ok(text.clone()),
            (Some(p), None) => std::fs::read_to_string(p)
                .map_err(|e| Failure(format!("cannot read {}: {e}", p.display()))),
            (None, None) => Err(Failure("no input given".into())),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether a specification is consistent.
    Check {
        #[command(flatten)]
        input: Input,
    },
    /// Evaluate the queries of a specification in a model of it.
    Eval {
        #[command(flatten)]
        input: Input,
        /// Additional query; may be repeated.
        #[arg(long)]
        query: Vec<String>,
        /// Evaluate in this model instead of a solved witness.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Condition a model, or a witness of a specification, on evidence.
    Update {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        evidence: String,
    },
    /// Replace probability atoms by fresh variables and print the guard.
    Decompose {
        #[arg(long)]
        lhs: String,
        #[arg(long)]
        rhs: String,
        /// Comma-separated event variables.
        #[arg(long, value_delimiter = ',')]
        events: Vec<String>,
    },
    /// Run the axiom suite on random models.
    Selftest {
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Rendered output and exit status: 0 on success, 1 for an inconsistent
/// specification, degenerate evidence or a failed self-test, 2 on errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub status: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
struct Failure(String);

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

pub fn run(config: &CliConfig) -> Outcome {
    match dispatch(config) {
        Ok((status, stdout)) => Outcome {
            status,
            stdout,
            stderr: String::new(),
        },
        Err(Failure(message)) => Outcome {
            status: 2,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        },
    }
}

fn dispatch(config: &CliConfig) -> Result<(i32, String), Failure> {
    let json = config.format == Format::Json;
    let mode = SolverMode::from(config.mode);
    match &config.command {
        Command::Check { input } => check(&input.read()?, mode, json),
        Command::Eval {
            input,
            query,
            model,
        } => eval(&input.read()?, query, model.as_ref(), mode, json),
        Command::Update { input, evidence } => update(&input.read()?, evidence, mode, json),
        Command::Decompose { lhs, rhs, events } => decompose(lhs, rhs, events, json),
        Command::Selftest { trials, seed } => {
            let report = axiom_suite(*trials as usize, *seed);
            let out = if json {
                pretty(&report.to_json())
            } else {
                report.render_table()
            };
            Ok((if report.all_passed() { 0 } else { 1 }, out))
        }
    }
}

fn pretty(v: &Value) -> String {
    format!(
        "{}\n",
        serde_json::to_string_pretty(v).expect("json values serialize")
    )
}

fn solve_doc(doc: &SpecDocument, mode: SolverMode) -> Result<SolveResult, Failure> {
    Ok(solve(&lower(doc, mode)?)?)
}

fn render_result(result: &SolveResult) -> String {
    let mut out = String::new();
    match result {
        SolveResult::Sat { witness, branch } => {
            out.push_str("SAT\n");
            for (constraint, case) in branch {
                let _ = writeln!(out, "case {case} for {constraint}");
            }
            out.push_str(&witness.to_model().map(|m| m.to_text()).unwrap_or_default());
        }
        SolveResult::Unsat { trace } => {
            out.push_str("UNSAT\n");
            for step in trace {
                let _ = writeln!(out, "{step}");
            }
        }
    }
    out
}

fn check(text: &str, mode: SolverMode, json: bool) -> Result<(i32, String), Failure> {
    let doc = parse(text)?;
    let result = solve_doc(&doc, mode)?;
    let status = if result.is_sat() { 0 } else { 1 };
    Ok((
        status,
        if json {
            pretty(&result.to_json())
        } else {
            render_result(&result)
        },
    ))
}

const CAVEAT: &str = "values are exact in the witness found by the consistency check; \
                      other models of the specification may give other values unless the constraints determine them";

fn eval(
    text: &str,
    extra: &[String],
    model: Option<&PathBuf>,
    mode: SolverMode,
    json: bool,
) -> Result<(i32, String), Failure> {
    let doc = parse(text)?;
    let names = doc.names();
    let mut queries: Vec<StalkExpr> = doc.queries.clone();
    for q in extra {
        queries.push(parse_stalk_expr(q, &names, false)?);
    }
    let (m, header, caveat) = match model {
        Some(path) => {
            let m = PmfModel::from_text(
                &std::fs::read_to_string(path)
                    .map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))?,
            )?;
            let gens = doc.generators()?;
            if m.generators() != &gens {
                return Err(Failure(format!(
                    "model generators [{}] differ from the specification's [{}]",
                    m.generators().names().join(", "),
                    gens.names().join(", ")
                )));
            }
            let w = Witness {
                generators: gens,
                weights: m.weights().to_vec(),
            };
            let complies = verify_witness(&doc, &w, mode);
            let header = json!({"status": "model", "satisfies_specification": complies});
            let caveat = (!complies)
                .then(|| "the given model does not satisfy the specification".to_string());
            (m, header, caveat)
        }
        None => {
            let result = solve_doc(&doc, mode)?;
            let Some(w) = result.witness() else {
                let out = if json {
                    let mut v = result.to_json();
                    v["queries"] = json!([]);
                    pretty(&v)
                } else {
                    format!(
                        "{}the specification is inconsistent; no query is evaluated\n",
                        render_result(&result)
                    )
                };
                return Ok((1, out));
            };
            let header = json!({"status": "sat", "witness": w.to_json()});
            (w.to_model()?, header, Some(CAVEAT.to_string()))
        }
    };
    let mut values = Vec::new();
    for q in &queries {
        values.push((
            render_stalk_expr(q, &names),
            eval_expr(q, &m, &Env::default())?,
        ));
    }
    if json {
        let mut v = header;
        v["queries"] = values
            .iter()
            .map(|(q, val)| json!({"query": q, "value": val.to_string()}))
            .collect::<Vec<_>>()
            .into();
        v["caveat"] = caveat.map(Value::from).unwrap_or(Value::Null);
        return Ok((0, pretty(&v)));
    }
    let mut out = String::new();
    if let Some(c) = caveat {
        let _ = writeln!(out, "note: {c}");
    }
    for (q, val) in values {
        let _ = writeln!(out, "{q} = {val}");
    }
    Ok((0, out))
}

fn is_model_text(text: &str) -> bool {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .is_some_and(|l| l.starts_with("generators:"))
}

fn model_json(m: &PmfModel) -> Value {
    let gens = m.generators();
    let weights: serde_json::Map<String, Value> = m
        .weights()
        .iter()
        .enumerate()
        .map(|(i, w)| (gens.bits(i), Value::from(w.to_string())))
        .collect();
    json!({"generators": gens.names(), "weights": weights})
}

fn update(
    text: &str,
    evidence: &str,
    mode: SolverMode,
    json: bool,
) -> Result<(i32, String), Failure> {
    let (prior, names) = if is_model_text(text) {
        let m = PmfModel::from_text(text)?;
        let names = Names::from_events(m.generators().names().iter().cloned());
        (m, names)
    } else {
        let doc = parse(text)?;
        let result = solve_doc(&doc, mode)?;
        let Some(w) = result.witness() else {
            let out = if json {
                pretty(&result.to_json())
            } else {
                render_result(&result)
            };
            return Ok((1, out));
        };
        (w.to_model()?, doc.names())
    };
    let y: EventTerm = parse_event_term(evidence, &names)?;
    let shown = render_event(&y, &names);
    match prior.update(&y)? {
        Ok(post) => {
            let out = if json {
                pretty(
                    &json!({"status": "posterior", "evidence": shown, "model": model_json(&post)}),
                )
            } else {
                post.to_text()
            };
            Ok((0, out))
        }
        Err(_) => {
            let out = if json {
                pretty(&json!({"status": "degenerate", "evidence": shown}))
            } else {
                format!(
                    "degenerate evidence: P({shown}) = 0, so conditioning on it yields no pmf\n"
                )
            };
            Ok((1, out))
        }
    }
}

fn decompose_json(ge: &GuardedEquation) -> Value {
    json!({
        "lhs": ge.lhs.to_string(),
        "rhs": ge.rhs.to_string(),
        "guard": ge.guard.to_string(),
        "u_vars": ge.u_vars,
        "z_defs": ge.z_defs.iter().map(|(z, t, set)| json!({
            "var": z,
            "event": t.to_string(),
            "minterms": set.bit_strings(),
        })).collect::<Vec<_>>(),
    })
}

fn decompose(
    lhs: &str,
    rhs: &str,
    events: &[String],
    json: bool,
) -> Result<(i32, String), Failure> {
    let events: Vec<String> = events
        .iter()
        .map(|e| e.trim().to_string())
        .filter(|e| !e.is_empty())
        .collect();
    let names = Names::from_events(events.iter().cloned());
    let l = parse_stalk_expr(lhs, &names, true)?;
    let r = parse_stalk_expr(rhs, &names, true)?;
    let ge = atom_decompose(&l, &r, &events)?;
    Ok((
        0,
        if json {
            pretty(&decompose_json(&ge))
        } else {
            format!("{ge}\n")
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(args: &[&str]) -> CliConfig {
        CliConfig::try_parse_from(std::iter::once("meadowprob").chain(args.iter().copied()))
            .unwrap()
    }

    #[test]
    fn model_text_is_detected_past_comments() {
        assert!(is_model_text("# prior\n\ngenerators: a\n0: 1\n1: 0\n"));
        assert!(!is_model_text("event a; P(a) = 1/2;"));
        assert!(!is_model_text(""));
    }

    #[test]
    fn flags_default_to_human_and_strict() {
        let c = config(&["check", "--inline", "event a;"]);
        assert_eq!((c.format, c.mode), (Format::Human, Mode::Strict));
        let c = config(&[
            "check", "--inline", "event a;", "--mode", "meadow", "--format", "json",
        ]);
        assert_eq!((c.format, c.mode), (Format::Json, Mode::Meadow));
    }

    #[test]
    fn run_reports_status_without_a_process() {
        let out = run(&config(&[
            "check",
            "--inline",
            "event a; P(a) > 1/2; P(a) < 1/3;",
        ]));
        assert_eq!(out.status, 1);
        assert!(out.stdout.starts_with("UNSAT\n"));
        let out = run(&config(&[
            "eval",
            "--inline",
            "event a; P(a) = 1/3; eval P(!a) * 3;",
        ]));
        assert_eq!(out.status, 0);
        assert!(out.stdout.ends_with("P(!a) * 3 = 2\n"), "{}", out.stdout);
        let out = run(&config(&[
            "update",
            "--inline",
            "event a;",
            "--evidence",
            "b",
        ]));
        assert_eq!(out.status, 2);
        assert!(out.stderr.starts_with("error: "));
    }
}
