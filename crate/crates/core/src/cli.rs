//! Command-line surface. [`dispatch`] parses arguments, runs one command
//! and returns the exit code with the JSON report.

// Failures carry a full report; they are built once per command.
#![allow(clippy::result_large_err)]

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::csa::{self, CsaError};
use crate::flow::{self, EmptinessVerdict, RbcError};
use crate::machine::{
    classify_restrictions, instruction_traces, parse_machine, store_signature, validate_machine, Letter,
    MachineSpec, Mode,
};
use crate::sim::{self, Acceptance, BoundedOutcome, SearchOptions, Trace, Verdict};
use crate::store::StoreKind;
use crate::transforms;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_RESOURCE: i32 = 2;
pub const EXIT_UNDECIDABLE: i32 = 3;

/// Bound used when no `--max-steps` is given.
pub const DEFAULT_MAX_STEPS: u64 = 100_000;

#[derive(Debug, Parser)]
#[command(name = "csacm", version, about = "Checking-stack automata with reversal-bounded counters")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a machine file and report static diagnostics.
    Validate { file: PathBuf },
    /// Run a machine on a word (exact for deterministic machines, bounded
    /// search otherwise).
    Run {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        input: String,
        #[arg(long)]
        max_steps: Option<u64>,
        #[arg(long)]
        require_input_consumed: bool,
    },
    /// Decide membership of a word.
    Member {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        input: String,
    },
    /// Decide or bound emptiness.
    Empty {
        file: PathBuf,
        /// Longest label word searched on a reduction instance.
        #[arg(long, default_value_t = 8)]
        max_len: usize,
        #[arg(long)]
        max_steps: Option<u64>,
    },
    /// Apply a construction and write the resulting machine.
    Transform {
        kind: TransformKind,
        input: PathBuf,
        second: Option<PathBuf>,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        /// Word for the `lambda` transform.
        #[arg(long, allow_hyphen_values = true)]
        word: Option<String>,
        /// Accept nondeterministic input for `twoway-to-csacm`.
        #[arg(long)]
        nondet: bool,
    },
    /// Report store signature and syntactic restriction labels.
    Classify { file: PathBuf },
    /// List accepted words up to a length.
    Enumerate {
        file: PathBuf,
        #[arg(long)]
        max_len: usize,
        #[arg(long)]
        max_steps: Option<u64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformKind {
    /// Encode a word into the states (`--word`).
    Lambda,
    Normalize,
    LabelDeterminize,
    EraseInput,
    RestrictLambda,
    TwowayToCsacm,
    Twodcm2Guess,
    PhaseAutomaton,
    WritingNcm,
    NoreadTo2dcm1,
    Intersection,
}

/// The JSON report of one command.
#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct Report {
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Vec<Value>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduction_artifact: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

impl Report {
    fn verdict(v: &str) -> Self {
        Report {
            verdict: v.into(),
            ..Report::default()
        }
    }

    fn error(verdict: &str, message: impl ToString) -> Self {
        Report {
            verdict: verdict.into(),
            diagnostics: Some(vec![json!({"kind": verdict, "message": message.to_string()})]),
            ..Report::default()
        }
    }
}

type Outcome = (i32, Report);

fn fail(code: i32, verdict: &str, message: impl ToString) -> Outcome {
    (code, Report::error(verdict, message))
}

fn csa_failure(e: CsaError) -> Outcome {
    match e {
        CsaError::Nondeterministic => fail(EXIT_UNDECIDABLE, "undecidable-class", e),
        CsaError::Resource(_) | CsaError::Rbc(RbcError::Resource(_)) => fail(EXIT_RESOURCE, "resource", e),
        _ => fail(EXIT_INVALID, "invalid", e),
    }
}

fn rbc_failure(e: RbcError) -> Outcome {
    match e {
        RbcError::Resource(_) => fail(EXIT_RESOURCE, "resource", e),
        RbcError::NotNcm(_) => fail(EXIT_INVALID, "invalid", e),
    }
}

fn load(path: &Path) -> Result<MachineSpec, Outcome> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| fail(EXIT_INVALID, "invalid", format!("{}: {e}", path.display())))?;
    parse_machine(&text).map_err(|e| fail(EXIT_INVALID, "invalid", format!("{}: {e}", path.display())))
}

/// Loads a machine and rejects it if static validation fails.
fn load_valid(path: &Path) -> Result<MachineSpec, Outcome> {
    let m = load(path)?;
    let diags = validate_machine(&m);
    if diags.is_empty() {
        Ok(m)
    } else {
        Err((
            EXIT_INVALID,
            Report {
                verdict: "invalid".into(),
                diagnostics: Some(diags.iter().map(|d| json!(d)).collect()),
                ..Report::default()
            },
        ))
    }
}

fn word(m: &MachineSpec, text: &str) -> Result<Vec<Letter>, Outcome> {
    m.parse_word(text).map_err(|e| fail(EXIT_INVALID, "invalid", e))
}

fn default_steps(explicit: Option<u64>) -> u64 {
    explicit.unwrap_or_else(|| DEFAULT_MAX_STEPS.min(csa::step_budget()))
}

/// The word, the transition path and the per-store instruction traces of
/// an accepting run.
pub fn witness_json(m: &MachineSpec, w: &[Letter], path: &[usize]) -> Value {
    let traces: Vec<Value> = instruction_traces(m, path)
        .iter()
        .zip(&m.stores)
        .map(|(tr, d)| {
            json!({
                "store": d.id,
                "instructions": tr.iter().map(|&i| d.spec.instruction_name(i)).collect::<Vec<_>>(),
                "valid": d.spec.validate_trace(tr),
            })
        })
        .collect();
    json!({
        "word": m.render_word(w),
        "transitions": path,
        "store_traces": traces,
    })
}

/// Configurations of a trace, rendered.
pub fn trace_json(m: &MachineSpec, t: &Trace) -> Value {
    let cfg = |c: &crate::machine::Configuration| {
        json!({
            "state": m.states[c.state],
            "heads": c.heads,
            "stores": c.stores.iter().zip(&m.stores).map(|(s, d)| s.render(&d.spec)).collect::<Vec<_>>(),
        })
    };
    let mut out = vec![cfg(&t.initial)];
    out.extend(t.steps.iter().map(|(_, c)| cfg(c)));
    Value::Array(out)
}

fn accept_report(m: &MachineSpec, w: &[Letter], t: &Trace) -> Report {
    Report {
        verdict: "accept".into(),
        witness: Some(witness_json(m, w, &t.transitions())),
        trace: Some(trace_json(m, t)),
        ..Report::default()
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn dispatch<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            return (code, Report::error(if code == EXIT_OK { "help" } else { "usage" }, e.to_string()));
        }
    };
    run_command(cli.command).unwrap_or_else(|o| o)
}

fn run_command(cmd: Command) -> Result<Outcome, Outcome> {
    match cmd {
        Command::Validate { file } => {
            let m = load(&file)?;
            let diags = validate_machine(&m);
            let ok = diags.is_empty();
            Ok((
                if ok { EXIT_OK } else { EXIT_INVALID },
                Report {
                    verdict: if ok { "valid" } else { "invalid" }.into(),
                    diagnostics: Some(diags.iter().map(|d| json!(d)).collect()),
                    ..Report::default()
                },
            ))
        }
        Command::Run {
            file,
            input,
            max_steps,
            require_input_consumed,
        } => {
            let m = load_valid(&file)?;
            let w = word(&m, &input)?;
            let steps = default_steps(max_steps);
            let acceptance = Acceptance { require_input_consumed };
            if m.is_deterministic() {
                let r = sim::run_deterministic_with(&m, &w, steps, acceptance).expect("checked deterministic");
                Ok(match r.verdict {
                    Verdict::Accept => (EXIT_OK, accept_report(&m, &w, r.trace.as_ref().expect("accept has trace"))),
                    Verdict::Reject => (EXIT_OK, Report::verdict("reject")),
                    Verdict::BoundExceeded => fail(EXIT_RESOURCE, "bound_exceeded", format!("no verdict within {steps} steps")),
                })
            } else {
                let opts = SearchOptions {
                    max_steps: steps,
                    max_counter: None,
                    max_configs: Some(1_000_000),
                    acceptance,
                };
                Ok(match sim::bounded_search(&m, &w, &opts) {
                    BoundedOutcome::Accept(t) => (EXIT_OK, accept_report(&m, &w, &t)),
                    BoundedOutcome::Reject => (EXIT_OK, Report::verdict("reject")),
                    BoundedOutcome::Unknown => fail(EXIT_RESOURCE, "bound_exceeded", format!("search cut off at depth {steps}")),
                })
            }
        }
        Command::Member { file, input } => {
            let m = load_valid(&file)?;
            let w = word(&m, &input)?;
            member(&m, &w)
        }
        Command::Empty { file, max_len, max_steps } => {
            let m = load_valid(&file)?;
            empty(&m, max_len, default_steps(max_steps))
        }
        Command::Transform {
            kind,
            input,
            second,
            output,
            word: w,
            nondet,
        } => transform(kind, &input, second.as_deref(), &output, w.as_deref(), nondet),
        Command::Classify { file } => {
            let m = load(&file)?;
            let labels: Vec<String> = classify_restrictions(&m).iter().map(|r| r.to_string()).collect();
            let sig: serde_json::Map<String, Value> = store_signature(&m)
                .into_iter()
                .map(|(k, n)| (k.to_string(), json!(n)))
                .collect();
            let mut r = Report::verdict("classified");
            r.details = Some(json!({
                "restrictions": labels,
                "signature": sig,
                "mode": m.mode,
                "heads": m.heads,
                "deterministic": m.is_deterministic(),
            }));
            Ok((EXIT_OK, r))
        }
        Command::Enumerate { file, max_len, max_steps } => {
            let m = load_valid(&file)?;
            let steps = default_steps(max_steps);
            let words: Vec<String> = sim::enumerate_accepted(&m, max_len, steps)
                .iter()
                .map(|w| m.render_word(w))
                .collect();
            let mut r = Report::verdict("enumerated");
            r.details = Some(json!({ "words": words, "max_len": max_len, "max_steps": steps }));
            Ok((EXIT_OK, r))
        }
    }
}

fn only_kinds(m: &MachineSpec, kinds: &[StoreKind]) -> bool {
    m.stores.iter().all(|d| kinds.contains(&d.spec.kind))
}

fn is_ncm(m: &MachineSpec) -> bool {
    m.mode == Mode::OneWay && m.heads == 1 && only_kinds(m, &[StoreKind::RbCounter])
}

fn is_csacm(m: &MachineSpec) -> bool {
    only_kinds(m, &[StoreKind::CheckingStack, StoreKind::RbCounter])
}

/// A witness run for an accepted word, when one is cheap to produce.
fn witness_run(m: &MachineSpec, w: &[Letter]) -> Option<Trace> {
    if m.is_deterministic() {
        sim::run_deterministic(m, w, csa::step_budget()).ok()?.trace
    } else {
        sim::accepts_bounded_with(
            m,
            w,
            &SearchOptions {
                max_steps: DEFAULT_MAX_STEPS,
                max_counter: None,
                max_configs: Some(200_000),
                acceptance: Acceptance::default(),
            },
        )
        .trace()
        .cloned()
    }
}

fn member(m: &MachineSpec, w: &[Letter]) -> Result<Outcome, Outcome> {
    let (accepted, method) = if is_ncm(m) {
        (flow::ncm_membership(m, w).map_err(rbc_failure)?, "ncm-emptiness")
    } else if is_csacm(m) {
        if !m.is_deterministic() {
            return Err(fail(
                EXIT_UNDECIDABLE,
                "undecidable-class",
                "membership for nondeterministic checking-stack machines with counters is undecidable",
            ));
        }
        let stacks = m.stores_of_kind(StoreKind::CheckingStack).len();
        if stacks == 1 {
            (csa::decide_membership_dcsacm(m, w).map_err(csa_failure)?, "dcsacm")
        } else {
            (csa::decide_membership_kstack(m, w).map_err(csa_failure)?, "kstack")
        }
    } else {
        return Err(fail(
            EXIT_INVALID,
            "unsupported-class",
            "membership is decided for counter machines and checking-stack machines with counters",
        ));
    };
    let mut r = if accepted {
        match witness_run(m, w) {
            Some(t) => accept_report(m, w, &t),
            None => Report::verdict("accept"),
        }
    } else {
        Report::verdict("reject")
    };
    r.details = Some(json!({ "method": method }));
    Ok((EXIT_OK, r))
}

fn empty(m: &MachineSpec, max_len: usize, max_steps: u64) -> Result<Outcome, Outcome> {
    if is_ncm(m) {
        return Ok(match flow::ncm_emptiness(m).map_err(rbc_failure)? {
            EmptinessVerdict::Empty => (EXIT_OK, Report::verdict("empty")),
            EmptinessVerdict::Nonempty(wit) => (
                EXIT_OK,
                Report {
                    verdict: "nonempty".into(),
                    witness: Some(witness_json(m, &wit.word, &wit.path)),
                    trace: Some(trace_json(m, &wit.trace)),
                    ..Report::default()
                },
            ),
        });
    }
    if is_csacm(m) && m.input.is_empty() && m.is_deterministic() {
        let nonempty = csa::decide_lambda_dcsacm(m)
            .or_else(|_| csa::decide_membership_kstack(m, &[]))
            .map_err(csa_failure)?;
        if !nonempty {
            return Ok((EXIT_OK, Report::verdict("empty")));
        }
        let mut r = witness_run(m, &[]).map_or_else(|| Report::verdict("nonempty"), |t| accept_report(m, &[], &t));
        r.verdict = "nonempty".into();
        return Ok((EXIT_OK, r));
    }
    let inst = match csa::noread_dcsacm1_to_2dcm1(m) {
        Ok(i) => i,
        Err(CsaError::Nondeterministic) => {
            return Err(fail(EXIT_UNDECIDABLE, "undecidable-class", "emptiness is not decided for this class"))
        }
        Err(e) => {
            return Err(fail(
                EXIT_INVALID,
                "unsupported-class",
                format!("emptiness is decided for NCMs and bounded for no-read DCSACM(1)s: {e}"),
            ))
        }
    };
    let search = csa::search_instance(&inst, max_len, 200_000, max_steps);
    let artifact = json!({
        "machine": inst.spec.to_text(),
        "sidecar": inst.sidecar(),
        "search": search,
    });
    let mut r = Report {
        verdict: "unresolved".into(),
        reduction_artifact: Some(artifact),
        ..Report::default()
    };
    if let Some(labels) = &search.witness {
        let w = csa::instance_word(&inst, m, labels);
        if let Some(t) = witness_run(m, &w).filter(|t| m.is_final(t.last().state)) {
            r = Report {
                witness: Some(witness_json(m, &w, &t.transitions())),
                trace: Some(trace_json(m, &t)),
                ..r
            };
            r.verdict = "nonempty".into();
            r.details = Some(json!({ "label_word": inst.render(labels) }));
        }
    }
    Ok((EXIT_OK, r))
}

fn write_text(path: &Path, text: &str) -> Result<(), Outcome> {
    std::fs::write(path, text).map_err(|e| fail(EXIT_INVALID, "invalid", format!("{}: {e}", path.display())))
}

fn transform(
    kind: TransformKind,
    input: &Path,
    second: Option<&Path>,
    output: &Path,
    w: Option<&str>,
    nondet: bool,
) -> Result<Outcome, Outcome> {
    let m = load_valid(input)?;
    let tf = |e: transforms::TransformError| fail(EXIT_INVALID, "invalid", e);
    let mut sidecar = None;
    let out = match kind {
        TransformKind::Lambda => {
            let w = word(&m, w.unwrap_or(""))?;
            csa::make_lambda_machine(&m, &w)
        }
        TransformKind::Normalize => csa::normalize_dcsacm(&m).map_err(csa_failure)?,
        TransformKind::LabelDeterminize => transforms::label_determinize(&m).map_err(tf)?,
        TransformKind::EraseInput => transforms::erase_input(&m).map_err(tf)?,
        TransformKind::RestrictLambda => transforms::restrict_to_lambda(&m).map_err(tf)?,
        TransformKind::TwowayToCsacm => transforms::twoway_counter_to_csacm(&m, nondet).map_err(tf)?,
        TransformKind::Twodcm2Guess => transforms::twodcm2_to_lambda_ncsacm(&m).map_err(tf)?,
        TransformKind::PhaseAutomaton => flow::to_phase_automaton(&m).map_err(rbc_failure)?,
        TransformKind::WritingNcm => csa::writing_phase_ncm(&m).map_err(csa_failure)?,
        TransformKind::NoreadTo2dcm1 => {
            let inst = csa::noread_dcsacm1_to_2dcm1(&m).map_err(csa_failure)?;
            sidecar = Some(inst.sidecar());
            inst.spec
        }
        TransformKind::Intersection => {
            let Some(second) = second else {
                return Err(fail(EXIT_INVALID, "usage", "intersection needs a second machine"));
            };
            let m2 = load_valid(second)?;
            let inst = csa::intersection_emptiness_reduction(&m, &m2).map_err(csa_failure)?;
            sidecar = Some(inst.sidecar());
            inst.spec
        }
    };
    write_text(output, &out.to_text())?;
    let mut artifact = json!({ "machine": output.display().to_string() });
    if let Some(s) = sidecar {
        let p = PathBuf::from(format!("{}.labels", output.display()));
        write_text(&p, &s)?;
        artifact["sidecar"] = json!(p.display().to_string());
    }
    let mut r = Report::verdict("ok");
    r.reduction_artifact = Some(artifact);
    r.details = Some(json!({
        "states": out.states.len(),
        "transitions": out.transitions.len(),
        "deterministic": out.is_deterministic(),
    }));
    Ok((EXIT_OK, r))
}
