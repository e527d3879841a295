//! Command-line front end: validate automaton files, score lasso words,
//! apply the constructions, and answer extremal-value queries.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use faba::automata::{Aba, Acceptance, Lasso};
use faba::decision::{self, Relation};
use faba::eval;
use faba::format::{self, Automaton};
use faba::lattice::Value;
use faba::transforms;
use faba::{samples, Limits};

#[derive(Parser)]
#[command(name = "faba", version, about = "weighted alternating automata over lattices")]
struct Cli {
    /// Cap on expansion terms and constructed states.
    #[arg(long, global = true, default_value_t = 100_000)]
    term_cap: usize,

    /// Write the result to this file instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a file for structural problems.
    Validate { file: PathBuf },

    /// Score a lasso word against an automaton.
    Eval {
        file: PathBuf,
        /// Finite prefix, symbols separated by spaces.
        #[arg(long, default_value = "")]
        prefix: String,
        /// Repeated block, symbols separated by spaces.
        #[arg(long)]
        period: String,
    },

    /// Apply a construction and print the resulting automaton.
    Transform {
        kind: TransformKind,
        file: PathBuf,
        /// Second operand, for union and meet.
        other: Option<PathBuf>,
    },

    /// Best value, worst value, or degree of implication.
    Decide {
        kind: DecideKind,
        file: PathBuf,
        /// Second operand, for imp-val.
        other: Option<PathBuf>,
        /// Compare the computed value against --threshold: <, <=, =, >= or >.
        #[arg(long)]
        rel: Option<String>,
        /// Threshold value, required together with --rel.
        #[arg(long)]
        threshold: Option<String>,
    },

    /// Re-run the built-in examples and report any mismatch.
    Reproduce {
        /// One of: branching, pipeline, dual, weakening.
        name: String,
    },
}

#[derive(ValueEnum, Clone, Copy)]
enum TransformKind {
    CrispInitial,
    CrispFinal,
    ToNba,
    NbaToAba,
    Dualize,
    CobuchiToWeak,
    Union,
    Meet,
}

#[derive(ValueEnum, Clone, Copy)]
enum DecideKind {
    EVal,
    UVal,
    ImpVal,
}

/// Argument misuse detected after clap parsing; exits with code 3.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let output = cli.output.clone();
    match run(cli) {
        Ok((text, code)) => {
            if let Some(path) = output {
                if let Err(err) = fs::write(&path, &text) {
                    eprintln!("error: cannot write {}: {err}", path.display());
                    return ExitCode::from(1);
                }
            } else {
                print!("{text}");
            }
            ExitCode::from(code)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}

fn classify(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return 3;
        }
        if let Some(e) = cause.downcast_ref::<faba::Error>() {
            return match e {
                faba::Error::ResourceCap { .. } => 2,
                _ => 1,
            };
        }
    }
    1
}

fn run(cli: Cli) -> anyhow::Result<(String, u8)> {
    let limits = Limits {
        term_cap: cli.term_cap,
        state_cap: 100_000,
    };
    match cli.command {
        Command::Validate { file } => {
            let automaton = load(&file)?;
            let problems = automaton.validate();
            if problems.is_empty() {
                Ok(("ok\n".into(), 0))
            } else {
                Ok((problems.join("\n") + "\n", 1))
            }
        }
        Command::Eval {
            file,
            prefix,
            period,
        } => {
            let automaton = load(&file)?;
            let word = Lasso::parse(&prefix, &period)?;
            let value = match &automaton {
                Automaton::Aba(a) => eval::aba_lasso(a, &word, &limits)?,
                Automaton::Nba(n) => eval::nba_lasso(n, &word)?,
            };
            Ok((show_value(&value) + "\n", 0))
        }
        Command::Transform { kind, file, other } => transform(kind, &file, other.as_deref(), &limits),
        Command::Decide {
            kind,
            file,
            other,
            rel,
            threshold,
        } => decide(kind, &file, other.as_deref(), rel, threshold, &limits),
        Command::Reproduce { name } => reproduce(&name, &limits),
    }
}

fn load(path: &Path) -> anyhow::Result<Automaton> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(format::parse(&text)?)
}

/// Loads an alternating automaton, converting a nondeterministic file on the fly.
fn load_aba(path: &Path) -> anyhow::Result<Aba> {
    Ok(match load(path)? {
        Automaton::Aba(a) => a,
        Automaton::Nba(n) => transforms::nba_to_aba(&n),
    })
}

fn show_value(v: &Value) -> String {
    let base = v.to_string();
    match v.approx() {
        Some(x) if base.contains('/') => {
            let mut approx = format!("{x:.6}");
            while approx.ends_with('0') {
                approx.pop();
            }
            if approx.ends_with('.') {
                approx.pop();
            }
            format!("{base} ({approx})")
        }
        _ => base,
    }
}

fn transform(
    kind: TransformKind,
    file: &Path,
    other: Option<&Path>,
    limits: &Limits,
) -> anyhow::Result<(String, u8)> {
    let needs_other = matches!(kind, TransformKind::Union | TransformKind::Meet);
    if needs_other && other.is_none() {
        return Err(UsageError("this transform takes two automaton files".into()).into());
    }
    if !needs_other && other.is_some() {
        return Err(UsageError("this transform takes a single automaton file".into()).into());
    }
    let text = match kind {
        TransformKind::CrispInitial => format::serialize_aba(&transforms::crisp_initial(&load_aba(file)?)),
        TransformKind::CrispFinal => {
            format::serialize_aba(&transforms::crisp_final(&load_aba(file)?, limits)?)
        }
        TransformKind::ToNba => {
            format::serialize_nba(&transforms::aba_to_nba(&load_aba(file)?, limits)?)
        }
        TransformKind::NbaToAba => {
            format::serialize_aba(&transforms::nba_to_aba(&load(file)?.into_nba()?))
        }
        TransformKind::Dualize => format::serialize_aba(&transforms::dualize(&load_aba(file)?)?),
        TransformKind::CobuchiToWeak => {
            format::serialize_aba(&transforms::cobuchi_to_weak(&load_aba(file)?, limits)?)
        }
        TransformKind::Union => {
            let merged = transforms::union(&load_aba(file)?, &load_aba(other.unwrap())?)?;
            format::serialize_aba(&merged)
        }
        TransformKind::Meet => {
            let merged = transforms::meet(&load_aba(file)?, &load_aba(other.unwrap())?)?;
            format::serialize_aba(&merged)
        }
    };
    Ok((text, 0))
}

fn decide(
    kind: DecideKind,
    file: &Path,
    other: Option<&Path>,
    rel: Option<String>,
    threshold: Option<String>,
    limits: &Limits,
) -> anyhow::Result<(String, u8)> {
    let comparison = match (rel, threshold) {
        (None, None) => None,
        (Some(r), Some(t)) => Some((
            Relation::parse(&r).map_err(|e| UsageError(e.to_string()))?,
            t,
        )),
        _ => {
            return Err(UsageError("--rel and --threshold must be given together".into()).into());
        }
    };
    let a = load_aba(file)?;
    let lattice = a.lattice.clone();
    let (value, witness) = match kind {
        DecideKind::EVal | DecideKind::UVal => {
            if other.is_some() {
                return Err(UsageError("this query takes a single automaton file".into()).into());
            }
            let outcome = match kind {
                DecideKind::EVal => decision::e_val(&a, limits)?,
                _ => decision::u_val(&a, limits)?,
            };
            (outcome.value, Some(outcome.witness))
        }
        DecideKind::ImpVal => {
            let Some(other) = other else {
                return Err(UsageError("imp-val takes two automaton files".into()).into());
            };
            (decision::imp_val(&a, &load_aba(other)?, limits)?, None)
        }
    };
    let mut text = show_value(&value) + "\n";
    if let Some(witness) = witness {
        match witness {
            Some(w) => text.push_str(&format!("witness: {w}\n")),
            None => text.push_str("witness: none\n"),
        }
    }
    let mut code = 0;
    if let Some((relation, raw)) = comparison {
        let bound = lattice.parse_value(&raw)?;
        let holds = relation.holds(&lattice, &value, &bound);
        text.push_str(&format!(
            "{} {relation} {}: {holds}\n",
            show_value(&value),
            show_value(&bound)
        ));
        if !holds {
            code = 1;
        }
    }
    Ok((text, code))
}

fn check_line(
    out: &mut String,
    all_ok: &mut bool,
    label: &str,
    got: impl fmt::Display,
    want: impl fmt::Display,
) {
    let got = got.to_string();
    let want = want.to_string();
    let verdict = if got == want {
        "ok"
    } else {
        *all_ok = false;
        "MISMATCH"
    };
    out.push_str(&format!("{label}: got {got}, expected {want} [{verdict}]\n"));
}

fn show_set(values: impl IntoIterator<Item = Value>) -> String {
    let items: Vec<String> = values.into_iter().map(|v| v.to_string()).collect();
    format!("{{{}}}", items.join(", "))
}

fn reproduce(name: &str, limits: &Limits) -> anyhow::Result<(String, u8)> {
    let mut out = String::new();
    let mut ok = true;
    match name {
        "branching" => {
            let a = samples::branching();
            let word = Lasso::parse("a", "a b")?;
            let value = eval::aba_lasso(&a, &word, limits)?;
            check_line(&mut out, &mut ok, "value of a (a b)^w", show_value(&value), "3/10 (0.3)");
            let brute = eval::brute_force_aba(&a, &word, limits)?;
            check_line(
                &mut out,
                &mut ok,
                "run weights on a (a b)^w",
                show_set(brute.run_weights),
                "{1/5, 3/10}",
            );
        }
        "pipeline" => {
            let a = samples::pipeline();
            let words = [("a a", "b", "3/5"), ("a", "b", "3/5"), ("", "b", "1/2"), ("b", "a", "3/10")];
            for (prefix, period, want) in words {
                let word = Lasso::parse(prefix, period)?;
                let direct = eval::aba_lasso(&a, &word, limits)?;
                check_line(&mut out, &mut ok, &format!("value of {word}"), direct.to_string(), want);
                let via_pairs = eval::aba_lasso_via_nba(&a, &word, limits)?;
                check_line(
                    &mut out,
                    &mut ok,
                    &format!("pair-route value of {word}"),
                    via_pairs.to_string(),
                    want,
                );
            }
            let crisped = transforms::crisp_final(&transforms::crisp_initial(&a), limits)?;
            check_line(&mut out, &mut ok, "states after crisping", crisped.states.len(), 16);
        }
        "dual" => {
            let dual = transforms::dualize(&samples::pipeline())?;
            let words = [
                ("a a", "b", "2/5"),
                ("a", "b", "2/5"),
                ("", "b", "1/2"),
                ("b", "a", "7/10"),
                ("a b a", "a", "1"),
            ];
            for (prefix, period, want) in words {
                let word = Lasso::parse(prefix, period)?;
                let value = eval::aba_lasso(&dual, &word, limits)?;
                check_line(
                    &mut out,
                    &mut ok,
                    &format!("dual value of {word}"),
                    value.to_string(),
                    want,
                );
            }
        }
        "weakening" => {
            let a = samples::cobuchi();
            let words = [("", "a", "2/5"), ("b", "a", "2/5"), ("b b", "a", "3/10")];
            for (prefix, period, want) in words {
                let word = Lasso::parse(prefix, period)?;
                let value = eval::aba_lasso(&a, &word, limits)?;
                check_line(&mut out, &mut ok, &format!("value of {word}"), value.to_string(), want);
            }
            let weak = transforms::cobuchi_to_weak(&a, limits)?;
            check_line(&mut out, &mut ok, "weakened state count", weak.states.len(), 162);
            check_line(&mut out, &mut ok, "weakened acceptance", weak.acceptance, Acceptance::Buchi);
            check_line(&mut out, &mut ok, "weakened automaton is weak", weak.is_weak()?, true);
            for (prefix, period, want) in words {
                let word = Lasso::parse(prefix, period)?;
                let value = eval::aba_lasso(&weak, &word, limits)?;
                check_line(
                    &mut out,
                    &mut ok,
                    &format!("weakened value of {word}"),
                    value.to_string(),
                    want,
                );
            }
        }
        _ => {
            return Err(UsageError(format!(
                "unknown example {name:?}; expected branching, pipeline, dual or weakening"
            ))
            .into());
        }
    }
    Ok((out, if ok { 0 } else { 1 }))
}
