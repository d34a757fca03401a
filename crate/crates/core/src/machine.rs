//! `(Ω₁,…,Ω_k)`-machines: the specification type, the text format, static
//! validation, restriction classifiers and the one-step successor relation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use serde::Serialize;
use thiserror::Error;

use crate::store::{Instruction, PhaseState, StoreConfig, StoreKind, StoreSym, StoreTypeSpec};

pub type StateId = usize;

/// Index of an input letter in `Σ`.
pub type Letter = u16;

/// Tokens reserved by the file format; neither states nor input symbols may
/// use them.
pub const RESERVED_TOKENS: &[&str] = &["<", ">", "|", "->", "Zb", "Zt"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    OneWay,
    TwoWay,
}

/// A symbol under an input head: `⊳`, `⊲`, or a letter of `Σ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InSym {
    Left,
    Right,
    Letter(Letter),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StoreDecl {
    pub id: String,
    pub spec: StoreTypeSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transition {
    pub from: StateId,
    pub reads: Vec<InSym>,
    pub store_reads: Vec<StoreSym>,
    pub to: StateId,
    pub instructions: Vec<Instruction>,
    pub moves: Vec<i8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineSpec {
    pub name: String,
    pub mode: Mode,
    pub heads: usize,
    /// The claim made by the file; [`validate_machine`] checks it.
    pub deterministic: bool,
    pub input: Vec<String>,
    pub stores: Vec<StoreDecl>,
    pub states: Vec<String>,
    pub initial: StateId,
    pub finals: BTreeSet<StateId>,
    pub transitions: Vec<Transition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing machine header")]
    MissingHeader,
    #[error("line {line}: unknown store kind {kind:?}")]
    UnknownStoreKind { line: usize, kind: String },
    #[error("line {line}: undeclared symbol {symbol:?}")]
    UndeclaredSymbol { line: usize, symbol: String },
    #[error("missing {0} declaration")]
    Missing(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("symbol {0:?} is not in the input alphabet")]
    UnknownLetter(String),
}

impl MachineSpec {
    pub fn is_final(&self, q: StateId) -> bool {
        self.finals.contains(&q)
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name)
    }

    pub fn letter_id(&self, name: &str) -> Option<Letter> {
        self.input.iter().position(|s| s == name).map(|i| i as Letter)
    }

    pub fn store_specs(&self) -> Vec<StoreTypeSpec> {
        self.stores.iter().map(|d| d.spec.clone()).collect()
    }

    pub fn stores_of_kind(&self, kind: StoreKind) -> Vec<usize> {
        (0..self.stores.len())
            .filter(|&i| self.stores[i].spec.kind == kind)
            .collect()
    }

    /// Transition indices grouped by source state.
    pub fn by_state(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.states.len()];
        for (i, t) in self.transitions.iter().enumerate() {
            if let Some(v) = out.get_mut(t.from) {
                v.push(i);
            }
        }
        out
    }

    pub fn in_sym_name(&self, s: InSym) -> &str {
        match s {
            InSym::Left => "<",
            InSym::Right => ">",
            InSym::Letter(a) => self.input.get(a as usize).map_or("?", String::as_str),
        }
    }

    /// Whether no two transitions share a left-hand side.
    pub fn is_deterministic(&self) -> bool {
        determinism_clashes(self).is_empty()
    }

    /// Parses a word: characters when every letter is one character long,
    /// otherwise whitespace-separated tokens. The empty string is `λ`.
    pub fn parse_word(&self, text: &str) -> Result<Vec<Letter>, WordError> {
        let single = self.input.iter().all(|s| s.chars().count() == 1);
        let lookup = |tok: &str| {
            self.letter_id(tok)
                .ok_or_else(|| WordError::UnknownLetter(tok.to_string()))
        };
        if single && !text.contains(char::is_whitespace) {
            text.chars().map(|c| lookup(c.encode_utf8(&mut [0; 4]))).collect()
        } else {
            text.split_whitespace().map(lookup).collect()
        }
    }

    pub fn render_word(&self, word: &[Letter]) -> String {
        let single = self.input.iter().all(|s| s.chars().count() == 1);
        let names = word.iter().map(|&a| self.in_sym_name(InSym::Letter(a)));
        if single {
            names.collect()
        } else {
            names.collect::<Vec<_>>().join(" ")
        }
    }

    /// `⊳ w ⊲` as a vector of head symbols.
    pub fn tape(&self, word: &[Letter]) -> Vec<InSym> {
        let mut tape = Vec::with_capacity(word.len() + 2);
        tape.push(InSym::Left);
        tape.extend(word.iter().map(|&a| InSym::Letter(a)));
        tape.push(InSym::Right);
        tape
    }

    pub fn initial_configuration(&self) -> Configuration {
        Configuration {
            state: self.initial,
            heads: vec![1; self.heads],
            stores: self.stores.iter().map(|d| d.spec.initial_config()).collect(),
            phases: self.stores.iter().map(|d| d.spec.initial_phase()).collect(),
        }
    }

    pub fn transition_text(&self, t: &Transition) -> String {
        let reads: Vec<&str> = t.reads.iter().map(|&s| self.in_sym_name(s)).collect();
        let sreads: Vec<&str> = t
            .store_reads
            .iter()
            .zip(&self.stores)
            .map(|(&s, d)| d.spec.symbol_name(s))
            .collect();
        let ins: Vec<String> = t
            .instructions
            .iter()
            .zip(&self.stores)
            .map(|(&i, d)| d.spec.instruction_name(i))
            .collect();
        let moves: Vec<&str> = t
            .moves
            .iter()
            .map(|m| match m {
                -1 => "-1",
                0 => "0",
                _ => "+1",
            })
            .collect();
        format!(
            "trans {} | {} | {} -> {} | {} | {}",
            self.states[t.from],
            reads.join(" "),
            sreads.join(" "),
            self.states[t.to],
            ins.join(" "),
            moves.join(" ")
        )
        .replace("  ", " ")
    }

    /// Serialises in the machine file format; the output parses back to an
    /// equal spec.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "machine {}", self.name);
        let _ = writeln!(
            out,
            "mode {}",
            match self.mode {
                Mode::OneWay => "oneway",
                Mode::TwoWay => "twoway",
            }
        );
        let _ = writeln!(out, "heads {}", self.heads);
        let _ = writeln!(out, "deterministic {}", self.deterministic);
        let _ = writeln!(out, "{}", join_line("input", &self.input));
        for d in &self.stores {
            let mut line = format!("store {} {}", d.id, d.spec.type_token());
            if !d.spec.kind.is_counter() && !d.spec.alphabet.is_empty() {
                line.push_str(" alphabet ");
                line.push_str(&d.spec.alphabet.join(" "));
            }
            let _ = writeln!(out, "{line}");
        }
        let _ = writeln!(out, "{}", join_line("states", &self.states));
        let _ = writeln!(out, "initial {}", self.states[self.initial]);
        let finals: Vec<String> = self.finals.iter().map(|&q| self.states[q].clone()).collect();
        let _ = writeln!(out, "{}", join_line("final", &finals));
        for t in &self.transitions {
            let _ = writeln!(out, "{}", self.transition_text(t));
        }
        out
    }
}

fn join_line(head: &str, items: &[String]) -> String {
    if items.is_empty() {
        head.to_string()
    } else {
        format!("{head} {}", items.join(" "))
    }
}

impl fmt::Display for MachineSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Incremental construction by name. States are created on first use.
#[derive(Debug, Clone)]
pub struct MachineBuilder {
    spec: MachineSpec,
    state_ids: HashMap<String, StateId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct BuildError(pub String);

impl MachineBuilder {
    pub fn new(name: &str, mode: Mode, heads: usize, input: &[&str]) -> Self {
        MachineBuilder {
            spec: MachineSpec {
                name: name.to_string(),
                mode,
                heads,
                deterministic: false,
                input: input.iter().map(|s| s.to_string()).collect(),
                stores: Vec::new(),
                states: Vec::new(),
                initial: 0,
                finals: BTreeSet::new(),
                transitions: Vec::new(),
            },
            state_ids: HashMap::new(),
        }
    }

    pub fn from_parts(
        name: &str,
        mode: Mode,
        heads: usize,
        input: Vec<String>,
        stores: Vec<StoreDecl>,
    ) -> Self {
        MachineBuilder {
            spec: MachineSpec {
                name: name.to_string(),
                mode,
                heads,
                deterministic: false,
                input,
                stores,
                states: Vec::new(),
                initial: 0,
                finals: BTreeSet::new(),
                transitions: Vec::new(),
            },
            state_ids: HashMap::new(),
        }
    }

    pub fn store(mut self, id: &str, spec: StoreTypeSpec) -> Self {
        self.spec.stores.push(StoreDecl {
            id: id.to_string(),
            spec,
        });
        self
    }

    pub fn state(&mut self, name: &str) -> StateId {
        if let Some(&q) = self.state_ids.get(name) {
            return q;
        }
        let q = self.spec.states.len();
        self.spec.states.push(name.to_string());
        self.state_ids.insert(name.to_string(), q);
        q
    }

    pub fn has_state(&self, name: &str) -> bool {
        self.state_ids.contains_key(name)
    }

    pub fn initial(&mut self, name: &str) -> &mut Self {
        self.spec.initial = self.state(name);
        self
    }

    pub fn final_state(&mut self, name: &str) -> &mut Self {
        let q = self.state(name);
        self.spec.finals.insert(q);
        self
    }

    pub fn push_transition(&mut self, t: Transition) {
        self.spec.transitions.push(t);
    }

    /// Adds a transition written with the file-format tokens.
    pub fn trans(
        &mut self,
        from: &str,
        reads: &[&str],
        store_reads: &[&str],
        to: &str,
        instructions: &[&str],
        moves: &[i8],
    ) -> Result<&mut Self, BuildError> {
        let from = self.state(from);
        let to = self.state(to);
        let reads = reads
            .iter()
            .map(|r| parse_in_sym(&self.spec, r).ok_or_else(|| BuildError(format!("unknown input symbol {r}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if store_reads.len() != self.spec.stores.len() || instructions.len() != self.spec.stores.len() {
            return Err(BuildError("store arity mismatch".into()));
        }
        let store_reads = store_reads
            .iter()
            .zip(&self.spec.stores)
            .map(|(r, d)| d.spec.parse_symbol(r).ok_or_else(|| BuildError(format!("unknown store symbol {r}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let instructions = instructions
            .iter()
            .zip(&self.spec.stores)
            .map(|(r, d)| d.spec.parse_instruction(r).ok_or_else(|| BuildError(format!("unknown instruction {r}"))))
            .collect::<Result<Vec<_>, _>>()?;
        self.spec.transitions.push(Transition {
            from,
            reads,
            store_reads,
            to,
            instructions,
            moves: moves.to_vec(),
        });
        Ok(self)
    }

    pub fn spec(&self) -> &MachineSpec {
        &self.spec
    }

    /// Finishes the machine; the determinism flag is computed from the table.
    pub fn build(mut self) -> MachineSpec {
        if self.spec.states.is_empty() {
            self.state("q0");
        }
        self.spec.deterministic = self.spec.is_deterministic();
        self.spec
    }
}

fn parse_in_sym(m: &MachineSpec, tok: &str) -> Option<InSym> {
    match tok {
        "<" => Some(InSym::Left),
        ">" => Some(InSym::Right),
        t => m.letter_id(t).map(InSym::Letter),
    }
}

/// Parses the line-oriented machine format. Lines whose first non-blank
/// character is `#` are comments; `#` elsewhere is an ordinary symbol.
pub fn parse_machine(text: &str) -> Result<MachineSpec, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line_no, header) = lines.next().ok_or(ParseError::MissingHeader)?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("machine") {
        return Err(ParseError::MissingHeader);
    }
    let name = toks.next().ok_or(ParseError::Syntax {
        line: line_no,
        message: "machine needs a name".into(),
    })?;
    let syntax = |line: usize, message: String| ParseError::Syntax { line, message };

    let mut mode = None;
    let mut heads = None;
    let mut deterministic = None;
    let mut input: Option<Vec<String>> = None;
    let mut stores = Vec::new();
    let mut states: Option<Vec<String>> = None;
    let mut initial = None;
    let mut finals = None;
    let mut trans_lines = Vec::new();

    for (line, text) in lines {
        let mut toks = text.split_whitespace();
        let key = toks.next().unwrap_or_default();
        let rest: Vec<&str> = toks.collect();
        let one = |what: &str| -> Result<&str, ParseError> {
            match rest.as_slice() {
                [v] => Ok(*v),
                _ => Err(syntax(line, format!("{what} takes exactly one value"))),
            }
        };
        match key {
            "mode" => {
                mode = Some(match one("mode")? {
                    "oneway" => Mode::OneWay,
                    "twoway" => Mode::TwoWay,
                    v => return Err(syntax(line, format!("unknown mode {v}"))),
                })
            }
            "heads" => {
                let r: usize = one("heads")?
                    .parse()
                    .map_err(|_| syntax(line, "heads must be a positive integer".into()))?;
                if r == 0 {
                    return Err(syntax(line, "heads must be at least 1".into()));
                }
                heads = Some(r);
            }
            "deterministic" => {
                deterministic = Some(match one("deterministic")? {
                    "true" => true,
                    "false" => false,
                    v => return Err(syntax(line, format!("expected true or false, got {v}"))),
                })
            }
            "input" => {
                for (i, s) in rest.iter().enumerate() {
                    if RESERVED_TOKENS.contains(s) {
                        return Err(syntax(line, format!("{s} is reserved")));
                    }
                    if rest[..i].contains(s) {
                        return Err(syntax(line, format!("duplicate input symbol {s}")));
                    }
                }
                input = Some(rest.iter().map(|s| s.to_string()).collect());
            }
            "store" => {
                let (id, ty, tail) = match rest.as_slice() {
                    [id, ty, tail @ ..] => (*id, *ty, tail),
                    _ => return Err(syntax(line, "store needs an id and a kind".into())),
                };
                let (kind, bound) = match ty.split_once(':') {
                    Some(("rb_counter", l)) => (
                        StoreKind::RbCounter,
                        l.parse::<u32>()
                            .map_err(|_| syntax(line, format!("bad reversal bound {l}")))?,
                    ),
                    None => (
                        match ty {
                            "pushdown" => StoreKind::Pushdown,
                            "counter" => StoreKind::Counter,
                            "stack" => StoreKind::Stack,
                            "checking_stack" => StoreKind::CheckingStack,
                            _ => {
                                return Err(ParseError::UnknownStoreKind {
                                    line,
                                    kind: ty.to_string(),
                                })
                            }
                        },
                        0,
                    ),
                    Some(_) => {
                        return Err(ParseError::UnknownStoreKind {
                            line,
                            kind: ty.to_string(),
                        })
                    }
                };
                let alphabet: Vec<String> = match tail {
                    [] => vec![],
                    ["alphabet", syms @ ..] => syms.iter().map(|s| s.to_string()).collect(),
                    _ => return Err(syntax(line, "expected `alphabet <sym>...`".into())),
                };
                if stores.iter().any(|d: &StoreDecl| d.id == id) {
                    return Err(syntax(line, format!("duplicate store id {id}")));
                }
                let spec = StoreTypeSpec::new(kind, bound, alphabet)
                    .map_err(|e| syntax(line, e.to_string()))?;
                stores.push(StoreDecl {
                    id: id.to_string(),
                    spec,
                });
            }
            "states" => {
                for (i, s) in rest.iter().enumerate() {
                    if RESERVED_TOKENS.contains(s) {
                        return Err(syntax(line, format!("{s} is reserved")));
                    }
                    if rest[..i].contains(s) {
                        return Err(syntax(line, format!("duplicate state {s}")));
                    }
                }
                states = Some(rest.iter().map(|s| s.to_string()).collect());
            }
            "initial" => initial = Some((line, one("initial")?.to_string())),
            "final" => finals = Some((line, rest.iter().map(|s| s.to_string()).collect::<Vec<_>>())),
            "trans" => trans_lines.push((line, rest.join(" "))),
            other => return Err(syntax(line, format!("unknown directive {other:?}"))),
        }
    }

    let states = states.ok_or(ParseError::Missing("states"))?;
    let state_of = |line: usize, s: &str| {
        states
            .iter()
            .position(|x| x == s)
            .ok_or_else(|| ParseError::UndeclaredSymbol {
                line,
                symbol: s.to_string(),
            })
    };
    let (iline, iname) = initial.ok_or(ParseError::Missing("initial"))?;
    let initial = state_of(iline, &iname)?;
    let finals = match finals {
        Some((fline, names)) => names
            .iter()
            .map(|n| state_of(fline, n))
            .collect::<Result<BTreeSet<_>, _>>()?,
        None => BTreeSet::new(),
    };

    let mut spec = MachineSpec {
        name: name.to_string(),
        mode: mode.ok_or(ParseError::Missing("mode"))?,
        heads: heads.unwrap_or(1),
        deterministic: deterministic.unwrap_or(false),
        input: input.ok_or(ParseError::Missing("input"))?,
        stores,
        states: states.clone(),
        initial,
        finals,
        transitions: Vec::new(),
    };

    for (line, body) in trans_lines {
        let t = parse_transition(&spec, line, &body)?;
        spec.transitions.push(t);
    }
    Ok(spec)
}

fn parse_transition(m: &MachineSpec, line: usize, body: &str) -> Result<Transition, ParseError> {
    let syntax = |message: String| ParseError::Syntax { line, message };
    let (lhs, rhs) = body
        .split_once("->")
        .ok_or_else(|| syntax("transition needs `->`".into()))?;
    let lhs: Vec<&str> = lhs.split('|').map(str::trim).collect();
    let rhs: Vec<&str> = rhs.split('|').map(str::trim).collect();
    let (from, reads, sreads) = match lhs.as_slice() {
        [a, b, c] => (*a, *b, *c),
        _ => return Err(syntax("expected `<from> | <reads> | <store reads>`".into())),
    };
    let (to, ins, moves) = match rhs.as_slice() {
        [a, b, c] => (*a, *b, *c),
        _ => return Err(syntax("expected `<to> | <instructions> | <moves>`".into())),
    };
    let state = |s: &str| {
        m.state_id(s).ok_or_else(|| ParseError::UndeclaredSymbol {
            line,
            symbol: s.to_string(),
        })
    };
    let undeclared = |s: &str| ParseError::UndeclaredSymbol {
        line,
        symbol: s.to_string(),
    };
    let reads: Vec<InSym> = reads
        .split_whitespace()
        .map(|t| parse_in_sym(m, t).ok_or_else(|| undeclared(t)))
        .collect::<Result<_, _>>()?;
    let sread_toks: Vec<&str> = sreads.split_whitespace().collect();
    let ins_toks: Vec<&str> = ins.split_whitespace().collect();
    if sread_toks.len() != m.stores.len() || ins_toks.len() != m.stores.len() {
        return Err(syntax(format!(
            "expected one store read and one instruction per store ({})",
            m.stores.len()
        )));
    }
    let store_reads = sread_toks
        .iter()
        .zip(&m.stores)
        .map(|(t, d)| d.spec.parse_symbol(t).ok_or_else(|| undeclared(t)))
        .collect::<Result<Vec<_>, _>>()?;
    let instructions = ins_toks
        .iter()
        .zip(&m.stores)
        .map(|(t, d)| {
            let ins = d.spec.parse_instruction(t).ok_or_else(|| {
                if let Some(sym) = t.strip_prefix("push:") {
                    undeclared(sym)
                } else {
                    syntax(format!("unknown instruction {t}"))
                }
            })?;
            if !d.spec.allows(ins) {
                return Err(syntax(format!(
                    "instruction {t} is not available on {} store {}",
                    d.spec.kind, d.id
                )));
            }
            Ok(ins)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let moves = moves
        .split_whitespace()
        .map(|t| match t {
            "-1" => Ok(-1),
            "0" => Ok(0),
            "+1" | "1" => Ok(1),
            _ => Err(syntax(format!("bad move {t}"))),
        })
        .collect::<Result<Vec<i8>, _>>()?;
    Ok(Transition {
        from: state(from)?,
        reads,
        store_reads,
        to: state(to)?,
        instructions,
        moves,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    Arity,
    Symbol,
    Mode,
    Determinism,
    State,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
    /// Offending transition indices.
    pub transitions: Vec<usize>,
}

fn determinism_clashes(m: &MachineSpec) -> Vec<(usize, usize)> {
    let mut seen: HashMap<(StateId, &[InSym], &[StoreSym]), usize> = HashMap::new();
    let mut out = Vec::new();
    for (i, t) in m.transitions.iter().enumerate() {
        match seen.get(&(t.from, t.reads.as_slice(), t.store_reads.as_slice())) {
            Some(&j) => out.push((j, i)),
            None => {
                seen.insert((t.from, &t.reads, &t.store_reads), i);
            }
        }
    }
    out
}

/// Static checks. An empty result means every structural invariant holds.
pub fn validate_machine(m: &MachineSpec) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let diag = |kind, message: String, transitions: Vec<usize>| Diagnostic {
        kind,
        message,
        transitions,
    };
    if m.heads == 0 {
        out.push(diag(DiagnosticKind::Arity, "machine needs at least one head".into(), vec![]));
    }
    if m.states.is_empty() || m.initial >= m.states.len() {
        out.push(diag(DiagnosticKind::State, "initial state is undefined".into(), vec![]));
    }
    if let Some(&q) = m.finals.iter().find(|&&q| q >= m.states.len()) {
        out.push(diag(DiagnosticKind::State, format!("final state #{q} is undefined"), vec![]));
    }
    for (i, s) in m.input.iter().enumerate() {
        if RESERVED_TOKENS.contains(&s.as_str()) || m.input[..i].contains(s) {
            out.push(diag(DiagnosticKind::Symbol, format!("bad input symbol {s}"), vec![]));
        }
    }
    for (i, t) in m.transitions.iter().enumerate() {
        if t.from >= m.states.len() || t.to >= m.states.len() {
            out.push(diag(DiagnosticKind::State, format!("transition {i} uses an undefined state"), vec![i]));
        }
        if t.reads.len() != m.heads || t.moves.len() != m.heads {
            out.push(diag(
                DiagnosticKind::Arity,
                format!("transition {i} needs one read and one move per head ({})", m.heads),
                vec![i],
            ));
        }
        if t.store_reads.len() != m.stores.len() || t.instructions.len() != m.stores.len() {
            out.push(diag(
                DiagnosticKind::Arity,
                format!("transition {i} needs one store read and one instruction per store"),
                vec![i],
            ));
            continue;
        }
        for r in &t.reads {
            if let InSym::Letter(a) = r {
                if *a as usize >= m.input.len() {
                    out.push(diag(DiagnosticKind::Symbol, format!("transition {i} reads an undeclared letter"), vec![i]));
                }
            }
        }
        for ((s, ins), d) in t.store_reads.iter().zip(&t.instructions).zip(&m.stores) {
            if !d.spec.readable_symbols().contains(s) {
                out.push(diag(
                    DiagnosticKind::Symbol,
                    format!("transition {i} reads a symbol store {} cannot hold", d.id),
                    vec![i],
                ));
            }
            if !d.spec.allows(*ins) {
                out.push(diag(
                    DiagnosticKind::Symbol,
                    format!("transition {i} uses {ins} on {} store {}", d.spec.kind, d.id),
                    vec![i],
                ));
            }
        }
        for &mv in &t.moves {
            if !(-1..=1).contains(&mv) {
                out.push(diag(DiagnosticKind::Mode, format!("transition {i} has move {mv}"), vec![i]));
            } else if mv == -1 && m.mode == Mode::OneWay {
                out.push(diag(
                    DiagnosticKind::Mode,
                    format!("transition {i} moves left in a one-way machine"),
                    vec![i],
                ));
            }
        }
    }
    if m.deterministic {
        for (a, b) in determinism_clashes(m) {
            out.push(diag(
                DiagnosticKind::Determinism,
                format!("transitions {a} and {b} share state, input and store reads"),
                vec![a, b],
            ));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Restriction {
    #[serde(rename = "no-read")]
    NoRead,
    #[serde(rename = "no-read/no-decrease")]
    NoReadNoDecrease,
    #[serde(rename = "no-read/no-counter")]
    NoReadNoCounter,
    #[serde(rename = "d-crossing-candidate")]
    DCrossingCandidate,
}

impl fmt::Display for Restriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Restriction::NoRead => "no-read",
            Restriction::NoReadNoDecrease => "no-read/no-decrease",
            Restriction::NoReadNoCounter => "no-read/no-counter",
            Restriction::DCrossingCandidate => "d-crossing-candidate",
        })
    }
}

/// Syntactic restriction labels. Labels only apply to machines with at least
/// one checking stack. A transition "before the end-marker" is one whose
/// heads do not all read `⊲`.
///
/// `d-crossing-candidate` holds when no checking stack is moved both down and
/// up anywhere in the table; every run of such a machine crosses each stack
/// boundary at most once.
pub fn classify_restrictions(m: &MachineSpec) -> BTreeSet<Restriction> {
    let stacks = m.stores_of_kind(StoreKind::CheckingStack);
    let mut out = BTreeSet::new();
    if stacks.is_empty() {
        return out;
    }
    let before_end = |t: &Transition| t.reads.iter().any(|&r| r != InSym::Right);
    let early: Vec<&Transition> = m.transitions.iter().filter(|t| before_end(t)).collect();
    let no_read = early
        .iter()
        .all(|t| stacks.iter().all(|&s| !t.instructions[s].is_move()));
    let counters: Vec<usize> = (0..m.stores.len())
        .filter(|&i| m.stores[i].spec.kind.is_counter())
        .collect();
    let no_decrease = early
        .iter()
        .all(|t| counters.iter().all(|&c| t.instructions[c] != Instruction::Pop));
    let no_counter = early
        .iter()
        .all(|t| counters.iter().all(|&c| t.instructions[c] == Instruction::Stay));
    if no_read {
        out.insert(Restriction::NoRead);
        if no_decrease {
            out.insert(Restriction::NoReadNoDecrease);
            if no_counter {
                out.insert(Restriction::NoReadNoCounter);
            }
        }
    }
    let monotone = stacks.iter().all(|&s| {
        let down = m.transitions.iter().any(|t| t.instructions[s] == Instruction::Down);
        let up = m.transitions.iter().any(|t| t.instructions[s] == Instruction::Up);
        !(down && up)
    });
    if monotone {
        out.insert(Restriction::DCrossingCandidate);
    }
    out
}

/// An instantaneous description. The input word is fixed for a run and kept
/// outside, as a tape built by [`MachineSpec::tape`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub state: StateId,
    pub heads: Vec<usize>,
    pub stores: Vec<StoreConfig>,
    pub phases: Vec<PhaseState>,
}

impl Configuration {
    pub fn store_reads(&self) -> Vec<StoreSym> {
        self.stores.iter().map(StoreConfig::read).collect()
    }
}

/// Applies transition `t` to `c`, or `None` when it is not enabled or some
/// store update or phase advance is undefined.
pub fn fire(
    m: &MachineSpec,
    tape: &[InSym],
    c: &Configuration,
    t: &Transition,
) -> Option<Configuration> {
    if t.from != c.state {
        return None;
    }
    let last = tape.len() - 1;
    let mut heads = c.heads.clone();
    for ((h, &r), &mv) in heads.iter_mut().zip(&t.reads).zip(&t.moves) {
        if tape[*h] != r {
            return None;
        }
        let next = *h as i64 + mv as i64;
        if next < 0 || next > last as i64 {
            return None;
        }
        *h = next as usize;
    }
    if c.stores.iter().zip(&t.store_reads).any(|(s, &r)| s.read() != r) {
        return None;
    }
    let mut stores = c.stores.clone();
    let mut phases = c.phases.clone();
    for (i, d) in m.stores.iter().enumerate() {
        let ins = t.instructions[i];
        phases[i] = d.spec.advance(phases[i], ins).ok()?;
        stores[i].apply_in_place(ins).ok()?;
    }
    Some(Configuration {
        state: t.to,
        heads,
        stores,
        phases,
    })
}

/// All successors of `c`, each with the index of the transition used.
pub fn step(m: &MachineSpec, tape: &[InSym], c: &Configuration) -> Vec<(Configuration, usize)> {
    m.transitions
        .iter()
        .enumerate()
        .filter_map(|(i, t)| fire(m, tape, c, t).map(|n| (n, i)))
        .collect()
}

/// Like [`step`] but only scanning the transitions of the current state.
pub fn step_indexed(
    m: &MachineSpec,
    by_state: &[Vec<usize>],
    tape: &[InSym],
    c: &Configuration,
) -> Vec<(Configuration, usize)> {
    by_state[c.state]
        .iter()
        .filter_map(|&i| fire(m, tape, c, &m.transitions[i]).map(|n| (n, i)))
        .collect()
}

/// Per-store instruction sequences of a transition path.
pub fn instruction_traces(m: &MachineSpec, path: &[usize]) -> Vec<Vec<Instruction>> {
    (0..m.stores.len())
        .map(|s| path.iter().map(|&t| m.transitions[t].instructions[s]).collect())
        .collect()
}

/// Store signature summary, e.g. counts per kind.
pub fn store_signature(m: &MachineSpec) -> BTreeMap<StoreKind, usize> {
    let mut out = BTreeMap::new();
    for d in &m.stores {
        *out.entry(d.spec.kind).or_insert(0) += 1;
    }
    out
}
