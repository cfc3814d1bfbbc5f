//! `pol`: satisfiability, model checking, translation and reduction
//! generators for star-free public observation logic.
//!
//! Exit status is 0 for any decided answer, 2 for usage and input errors,
//! 3 when a resource limit stopped the computation, and 1 for internal
//! errors.

mod config;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};

use pol_core::formula::{parse_formula, Formula, Signature};
use pol_core::model::{parse_model, PointedModel};
use pol_core::oracle::{bounded_sat, OracleError, OracleResult, SearchBounds};
use pol_core::pal::translate;
use pol_core::reductions::{gen_qbf, gen_tiling, gen_vbot, QbfInstance, TilingInstance};
use pol_core::tableau::{solve_with, SolveOptions, Stats, Verdict};

use config::FileConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Machine,
}

#[derive(Debug, Parser)]
#[command(name = "pol", version, about = "Star-free public observation logic toolkit")]
struct Cli {
    /// Output style; `machine` drops comments and keeps one token per status line.
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    /// `key = value` file with default caps and bounds.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide satisfiability; prints SAT and a witness model, UNSAT, or INDETERMINATE.
    Sat {
        /// Formula text, or `@path` to read it from a file.
        formula: String,
        /// Print the rule applications of the decisive search.
        #[arg(long)]
        trace: bool,
        /// Wall-clock limit in seconds.
        #[arg(long)]
        timeout: Option<u64>,
        /// Limit on tableau terms over the whole search.
        #[arg(long)]
        max_terms: Option<u64>,
        /// Limit on explored branches.
        #[arg(long)]
        max_branches: Option<u64>,
    },
    /// Evaluate a formula at a named state of a model file; prints TRUE or FALSE.
    Check {
        model: PathBuf,
        state: String,
        /// Formula text, or `@path`.
        formula: String,
    },
    /// Translate a word-fragment formula into public announcement logic.
    TranslatePal {
        /// Formula text, or `@path`.
        formula: String,
    },
    /// Print a generated formula.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Search all models within bounds for a witness.
    Oracle {
        /// Formula text, or `@path`.
        formula: String,
        /// Largest number of states.
        #[arg(long)]
        states: Option<u64>,
        /// Longest expected word.
        #[arg(long)]
        wordlen: Option<u64>,
        /// Most words per expectation.
        #[arg(long)]
        words: Option<u64>,
        /// Largest search space to attempt.
        #[arg(long)]
        cap: Option<u64>,
    },
}

#[derive(Debug, Subcommand)]
enum GenKind {
    /// QBF instance such as `exists x1 forall x2 : (x1 x2)(x1 -x2)`, or `@path`.
    Qbf { instance: String },
    /// Tiling instance (`n <k>` line, then `up right down left` per tile), or `@path`.
    Tiling { instance: String },
    /// Vacuum-bot fixtures for horizon `n`.
    Vbot {
        n: u32,
        /// Print only this fixture.
        #[arg(long)]
        name: Option<String>,
    },
}

enum Failure {
    Usage(anyhow::Error),
    Limit(String),
    Internal(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

type Outcome = Result<String, Failure>;

fn read_arg(arg: &str) -> anyhow::Result<String> {
    match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)
            .map(|s| s.trim_end().to_string())
            .with_context(|| format!("cannot read {path}")),
        None => Ok(arg.to_string()),
    }
}

fn formula_arg(arg: &str, sig: Option<&Signature>) -> anyhow::Result<Formula> {
    let text = read_arg(arg)?;
    parse_formula(&text, sig).map_err(|e| anyhow!("formula: {e}"))
}

struct Settings {
    format: Format,
    file: FileConfig,
}

impl Settings {
    /// Flag value, else config value, else `default`; always positive.
    fn positive(&self, flag: Option<u64>, key: &str, default: u64) -> anyhow::Result<u64> {
        if flag == Some(0) {
            anyhow::bail!("--{} must be positive", key.replace('_', "-"));
        }
        Ok(flag.or(self.file.get_positive(key)?).unwrap_or(default))
    }

    fn machine(&self) -> bool {
        self.format == Format::Machine
    }
}

fn model_block(m: &PointedModel) -> String {
    m.model.to_file(Some(m.point))
}

fn stats_line(s: &Stats) -> String {
    format!(
        "# branches {} terms {} labels {} depth {} backjumps {}\n",
        s.branches, s.terms, s.max_labels, s.max_depth, s.backjumps
    )
}

fn run_sat(
    st: &Settings,
    formula: &str,
    trace: bool,
    timeout: Option<u64>,
    max_terms: Option<u64>,
    max_branches: Option<u64>,
) -> Outcome {
    let f = formula_arg(formula, None)?;
    let defaults = SolveOptions::default();
    let opts = SolveOptions {
        timeout: Duration::from_secs(st.positive(timeout, "timeout", defaults.timeout.as_secs())?),
        max_terms: st.positive(max_terms, "max_terms", defaults.max_terms as u64)? as usize,
        max_branches: st.positive(max_branches, "max_branches", defaults.max_branches as u64)?
            as usize,
        trace,
    };
    let r = solve_with(&f, &opts).map_err(|e| Failure::Internal(e.into()))?;
    let mut out = String::new();
    match &r.verdict {
        Verdict::Sat(m) => {
            out.push_str("SAT\n");
            out.push_str(&model_block(m));
        }
        Verdict::Unsat => out.push_str("UNSAT\n"),
        Verdict::Indeterminate(reason) => {
            out.push_str(&format!("INDETERMINATE {reason}\n"));
        }
    }
    if !st.machine() {
        out.push_str(&stats_line(&r.stats));
    }
    for line in &r.trace {
        out.push_str(line);
        out.push('\n');
    }
    match r.verdict {
        Verdict::Indeterminate(_) => Err(Failure::Limit(out)),
        _ => Ok(out),
    }
}

fn run_check(model: &PathBuf, state: &str, formula: &str) -> Outcome {
    let text = std::fs::read_to_string(model)
        .with_context(|| format!("cannot read {}", model.display()))?;
    let file = parse_model(&text).map_err(|e| anyhow!("{}: {e}", model.display()))?;
    let m = &file.model;
    let s = m
        .state(state)
        .ok_or_else(|| anyhow!("{}: no state named `{state}`", model.display()))?;
    let sig = Signature {
        letters: m.alphabet().letters().to_vec(),
        agents: m.skeleton().agents().to_vec(),
        atoms: m.skeleton().atoms().to_vec(),
    };
    let f = formula_arg(formula, Some(&sig))?;
    let v = pol_core::semantics::check(m, s, &f);
    Ok(if v { "TRUE\n" } else { "FALSE\n" }.to_string())
}

fn run_oracle(
    st: &Settings,
    formula: &str,
    states: Option<u64>,
    wordlen: Option<u64>,
    words: Option<u64>,
    cap: Option<u64>,
) -> Outcome {
    let f = formula_arg(formula, None)?;
    let mut b = SearchBounds::for_formula(&f);
    b.max_states = st.positive(states, "states", b.max_states as u64)? as usize;
    b.max_words = st.positive(words, "words", b.max_words as u64)? as usize;
    b.cap = st.positive(cap, "cap", b.cap.min(u64::MAX as u128) as u64)? as u128;
    b.max_word_len = match wordlen.or(st.file.get_positive("wordlen")?) {
        Some(n) => n as usize,
        None => b.max_word_len,
    };
    match bounded_sat(&f, &b) {
        Ok(OracleResult::Sat(m)) => Ok(format!("SAT\n{}", model_block(&m))),
        Ok(OracleResult::NoModelWithinBounds { models_checked }) => Ok(if st.machine() {
            format!("NO-MODEL-WITHIN-BOUNDS {models_checked}\n")
        } else {
            format!(
                "NO-MODEL-WITHIN-BOUNDS\n# {models_checked} models checked; this does not prove unsatisfiability\n"
            )
        }),
        Err(e @ OracleError::CapExceeded { .. }) => Err(Failure::Limit(format!("INDETERMINATE {e}\n"))),
        Err(e) => Err(Failure::Usage(e.into())),
    }
}

fn run_gen(kind: &GenKind) -> Outcome {
    Ok(match kind {
        GenKind::Qbf { instance } => {
            let q = QbfInstance::parse(&read_arg(instance)?).map_err(|e| anyhow!("qbf: {e}"))?;
            format!("{}\n", gen_qbf(&q))
        }
        GenKind::Tiling { instance } => {
            let t = TilingInstance::parse(&read_arg(instance)?)
                .map_err(|e| anyhow!("tiling: {e}"))?;
            format!("{}\n", gen_tiling(&t))
        }
        GenKind::Vbot { n, name } => {
            if *n == 0 {
                return Err(Failure::Usage(anyhow!("vbot: n must be at least 1")));
            }
            let fixtures = gen_vbot(*n);
            match name {
                Some(want) => {
                    let (_, f) = fixtures.iter().find(|(k, _)| k == want).ok_or_else(|| {
                        let names: Vec<&str> = fixtures.iter().map(|(k, _)| *k).collect();
                        anyhow!("vbot: unknown fixture `{want}`; known: {}", names.join(", "))
                    })?;
                    format!("{f}\n")
                }
                None => fixtures.iter().fold(String::new(), |mut s, (k, f)| {
                    let _ = writeln!(s, "{k}: {f}");
                    s
                }),
            }
        }
    })
}

fn run(cli: Cli) -> Outcome {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let format = match (cli.format, file.get_str("format")) {
        (Some(f), _) => f,
        (None, Some(s)) => Format::from_str(s, true).map_err(|e| anyhow!("config format: {e}"))?,
        (None, None) => Format::Human,
    };
    let st = Settings { format, file };
    match &cli.command {
        Command::Sat {
            formula,
            trace,
            timeout,
            max_terms,
            max_branches,
        } => run_sat(&st, formula, *trace, *timeout, *max_terms, *max_branches),
        Command::Check {
            model,
            state,
            formula,
        } => run_check(model, state, formula),
        Command::TranslatePal { formula } => {
            let f = formula_arg(formula, None)?;
            let t = translate(&f).map_err(|e| anyhow!("translate-pal: {e}"))?;
            Ok(format!("{t}\n"))
        }
        Command::Gen { kind } => run_gen(kind),
        Command::Oracle {
            formula,
            states,
            wordlen,
            words,
            cap,
        } => run_oracle(&st, formula, *states, *wordlen, *words, *cap),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Limit(out)) => {
            print!("{out}");
            ExitCode::from(3)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(1)
        }
    }
}
