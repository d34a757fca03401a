//! Store types: pushdowns, counters, reversal-bounded counters, stacks and
//! checking stacks.
//!
//! A store type fixes an alphabet, a read function `f`, a partial write
//! function `g`, an initial configuration and an instruction language `L_I`.
//! Every instruction language used here is prefix-closed, so a run whose
//! instruction sequence stays a valid prefix at every step is in `L_I` when
//! it stops. The simulator relies on this: it advances a [`PhaseState`]
//! alongside every store update and never needs to look back at the history.
//!
//! Configurations are kept in a compact form. Counters hold their value as an
//! integer instead of the unary word `Z_b c^n`; stacks hold their cells plus
//! the head position, where position `0` is the bottom marker `Z_b`, positions
//! `1..=len` are the cells and `len + 1` is the top marker `Z_t`. The head
//! reads the cell immediately left of `↓`, which is exactly the cell at its
//! position.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a plain store symbol inside its store's alphabet.
pub type SymId = u16;

/// The symbol name used for the single counter letter.
pub const COUNTER_SYMBOL: &str = "c";

/// Tokens that cannot be used as plain store symbols.
pub const RESERVED_STORE_TOKENS: &[&str] = &["Zb", "Zt", "↓", "|", "->", "<", ">"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("pop on an empty store")]
    PopEmpty,
    #[error("{0} requires the head at the top of the stack")]
    HeadNotAtTop(&'static str),
    #[error("cannot move down from the bottom marker")]
    DownAtBottom,
    #[error("cannot move up past the top marker")]
    UpAtTop,
    #[error("symbol {0} is not in the store alphabet")]
    UnknownSymbol(SymId),
    #[error("instruction {0} is not available on a {1} store")]
    IllegalInstruction(String, StoreKind),
    #[error("instruction sequence leaves the instruction language: {0}")]
    Language(String),
    #[error("malformed store configuration: {0}")]
    Malformed(String),
    #[error("counter overflow")]
    Overflow,
    #[error("invalid store type: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoreKind {
    Pushdown,
    Counter,
    RbCounter,
    Stack,
    CheckingStack,
}

impl StoreKind {
    pub fn is_counter(self) -> bool {
        matches!(self, StoreKind::Counter | StoreKind::RbCounter)
    }

    pub fn is_stack(self) -> bool {
        matches!(self, StoreKind::Stack | StoreKind::CheckingStack)
    }
}

impl fmt::Display for StoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StoreKind::Pushdown => "pushdown",
            StoreKind::Counter => "counter",
            StoreKind::RbCounter => "rb_counter",
            StoreKind::Stack => "stack",
            StoreKind::CheckingStack => "checking_stack",
        })
    }
}

/// A store kind together with its parameters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StoreTypeSpec {
    pub kind: StoreKind,
    /// Only meaningful for [`StoreKind::RbCounter`].
    pub reversal_bound: u32,
    /// Plain symbols `Γ₀`; markers are implicit.
    pub alphabet: Vec<String>,
}

impl StoreTypeSpec {
    pub fn pushdown(alphabet: &[&str]) -> Result<Self, StoreError> {
        Self::new(StoreKind::Pushdown, 0, owned(alphabet))
    }

    pub fn counter() -> Self {
        Self::new(StoreKind::Counter, 0, vec![]).expect("counter spec is valid")
    }

    pub fn rb_counter(reversal_bound: u32) -> Result<Self, StoreError> {
        Self::new(StoreKind::RbCounter, reversal_bound, vec![])
    }

    pub fn stack(alphabet: &[&str]) -> Result<Self, StoreError> {
        Self::new(StoreKind::Stack, 0, owned(alphabet))
    }

    pub fn checking_stack(alphabet: &[&str]) -> Result<Self, StoreError> {
        Self::new(StoreKind::CheckingStack, 0, owned(alphabet))
    }

    /// Builds a spec, normalising counter alphabets to `{c}` and the reversal
    /// bound of non-rb kinds to zero.
    pub fn new(
        kind: StoreKind,
        reversal_bound: u32,
        alphabet: Vec<String>,
    ) -> Result<Self, StoreError> {
        if kind == StoreKind::RbCounter && reversal_bound == 0 {
            return Err(StoreError::InvalidSpec(
                "rb_counter needs a reversal bound of at least 1".into(),
            ));
        }
        let alphabet = if kind.is_counter() {
            if !(alphabet.is_empty() || alphabet == [COUNTER_SYMBOL]) {
                return Err(StoreError::InvalidSpec(
                    "counter alphabet is fixed to {c}".into(),
                ));
            }
            vec![COUNTER_SYMBOL.to_string()]
        } else {
            alphabet
        };
        for (i, s) in alphabet.iter().enumerate() {
            if s.is_empty() || s.chars().any(char::is_whitespace) {
                return Err(StoreError::InvalidSpec(format!("bad store symbol {s:?}")));
            }
            if RESERVED_STORE_TOKENS.contains(&s.as_str()) {
                return Err(StoreError::InvalidSpec(format!("{s} is a reserved marker")));
            }
            if alphabet[..i].contains(s) {
                return Err(StoreError::InvalidSpec(format!("duplicate store symbol {s}")));
            }
        }
        if alphabet.len() > SymId::MAX as usize {
            return Err(StoreError::InvalidSpec("store alphabet too large".into()));
        }
        let reversal_bound = if kind == StoreKind::RbCounter {
            reversal_bound
        } else {
            0
        };
        Ok(StoreTypeSpec {
            kind,
            reversal_bound,
            alphabet,
        })
    }

    pub fn symbol_id(&self, name: &str) -> Option<SymId> {
        self.alphabet
            .iter()
            .position(|s| s == name)
            .map(|i| i as SymId)
    }

    pub fn symbol_name(&self, sym: StoreSym) -> &str {
        match sym {
            StoreSym::Bottom => "Zb",
            StoreSym::Top => "Zt",
            StoreSym::Sym(i) => self
                .alphabet
                .get(i as usize)
                .map(String::as_str)
                .unwrap_or("?"),
        }
    }

    /// Every symbol `f` can return on a well-formed configuration of this kind.
    pub fn readable_symbols(&self) -> Vec<StoreSym> {
        let mut out = vec![StoreSym::Bottom];
        out.extend((0..self.alphabet.len()).map(|i| StoreSym::Sym(i as SymId)));
        if self.kind.is_stack() {
            out.push(StoreSym::Top);
        }
        out
    }

    /// `c₀`: `Z_b` for pushdowns and counters, `Z_b ↓ Z_t` for stacks.
    pub fn initial_config(&self) -> StoreConfig {
        match self.kind {
            StoreKind::Pushdown => StoreConfig::Pushdown(Vec::new()),
            StoreKind::Counter | StoreKind::RbCounter => StoreConfig::Counter(0),
            StoreKind::Stack | StoreKind::CheckingStack => StoreConfig::Stack {
                cells: Vec::new(),
                head: 0,
            },
        }
    }

    pub fn initial_phase(&self) -> PhaseState {
        match self.kind {
            StoreKind::RbCounter => PhaseState::Reversals {
                decreasing: false,
                used: 0,
            },
            StoreKind::CheckingStack => PhaseState::Checking { reading: false },
            _ => PhaseState::Free,
        }
    }

    /// Whether `ins` belongs to the instruction set `I` of this kind.
    pub fn allows(&self, ins: Instruction) -> bool {
        match ins {
            Instruction::Push(y) => (y as usize) < self.alphabet.len(),
            Instruction::Pop | Instruction::Stay => true,
            Instruction::Down | Instruction::Hold | Instruction::Up => self.kind.is_stack(),
        }
    }

    pub fn check_config(&self, cfg: &StoreConfig) -> Result<(), StoreError> {
        let n = self.alphabet.len();
        match (self.kind, cfg) {
            (StoreKind::Pushdown, StoreConfig::Pushdown(cells)) => {
                if cells.iter().any(|&c| c as usize >= n) {
                    return Err(StoreError::Malformed("pushdown cell outside alphabet".into()));
                }
                Ok(())
            }
            (StoreKind::Counter | StoreKind::RbCounter, StoreConfig::Counter(_)) => Ok(()),
            (StoreKind::Stack | StoreKind::CheckingStack, StoreConfig::Stack { cells, head }) => {
                if cells.iter().any(|&c| c as usize >= n) {
                    return Err(StoreError::Malformed("stack cell outside alphabet".into()));
                }
                if *head > cells.len() + 1 {
                    return Err(StoreError::Malformed("stack head beyond Z_t".into()));
                }
                Ok(())
            }
            _ => Err(StoreError::Malformed(format!(
                "configuration shape does not match a {} store",
                self.kind
            ))),
        }
    }

    /// The write function `g`. Undefined cases are errors.
    pub fn apply(&self, cfg: &StoreConfig, ins: Instruction) -> Result<StoreConfig, StoreError> {
        if !self.allows(ins) {
            return Err(match ins {
                Instruction::Push(y) => StoreError::UnknownSymbol(y),
                _ => StoreError::IllegalInstruction(ins.to_string(), self.kind),
            });
        }
        let mut next = cfg.clone();
        next.apply_in_place(ins)?;
        Ok(next)
    }

    /// Extends the online `L_I` recogniser by one instruction.
    pub fn advance(&self, ph: PhaseState, ins: Instruction) -> Result<PhaseState, StoreError> {
        if !self.allows(ins) {
            return Err(StoreError::IllegalInstruction(ins.to_string(), self.kind));
        }
        match (self.kind, ph) {
            (StoreKind::RbCounter, PhaseState::Reversals { decreasing, used }) => {
                let wants_decrease = match ins {
                    Instruction::Push(_) => false,
                    Instruction::Pop => true,
                    _ => return Ok(ph),
                };
                if wants_decrease == decreasing {
                    return Ok(ph);
                }
                if used + 1 > self.reversal_bound {
                    return Err(StoreError::Language(format!(
                        "more than {} reversal(s)",
                        self.reversal_bound
                    )));
                }
                Ok(PhaseState::Reversals {
                    decreasing: wants_decrease,
                    used: used + 1,
                })
            }
            (StoreKind::CheckingStack, PhaseState::Checking { reading }) => match ins {
                Instruction::Push(_) | Instruction::Stay if reading => Err(StoreError::Language(
                    "checking stack cannot write after it starts reading".into(),
                )),
                Instruction::Push(_) | Instruction::Stay => Ok(ph),
                Instruction::Pop => Err(StoreError::Language(
                    "checking stack never pops".into(),
                )),
                Instruction::Down | Instruction::Hold | Instruction::Up => {
                    Ok(PhaseState::Checking { reading: true })
                }
            },
            (StoreKind::Pushdown | StoreKind::Counter | StoreKind::Stack, PhaseState::Free) => {
                Ok(ph)
            }
            _ => Err(StoreError::Malformed(format!(
                "phase state {ph:?} does not belong to a {} store",
                self.kind
            ))),
        }
    }

    /// Whether the whole sequence lies in `L_I`.
    pub fn validate_trace(&self, trace: &[Instruction]) -> bool {
        trace
            .iter()
            .try_fold(self.initial_phase(), |ph, &ins| self.advance(ph, ins))
            .is_ok()
    }

    pub fn instruction_name(&self, ins: Instruction) -> String {
        match ins {
            Instruction::Push(y) => format!("push:{}", self.symbol_name(StoreSym::Sym(y))),
            other => other.to_string(),
        }
    }

    pub fn parse_instruction(&self, token: &str) -> Option<Instruction> {
        Some(match token {
            "pop" => Instruction::Pop,
            "stay" => Instruction::Stay,
            "D" => Instruction::Down,
            "S" => Instruction::Hold,
            "U" => Instruction::Up,
            _ => Instruction::Push(self.symbol_id(token.strip_prefix("push:")?)?),
        })
    }

    pub fn parse_symbol(&self, token: &str) -> Option<StoreSym> {
        match token {
            "Zb" => Some(StoreSym::Bottom),
            "Zt" if self.kind.is_stack() => Some(StoreSym::Top),
            _ => self.symbol_id(token).map(StoreSym::Sym),
        }
    }

    /// Type string used by the machine file format.
    pub fn type_token(&self) -> String {
        match self.kind {
            StoreKind::RbCounter => format!("rb_counter:{}", self.reversal_bound),
            k => k.to_string(),
        }
    }
}

fn owned(alphabet: &[&str]) -> Vec<String> {
    alphabet.iter().map(|s| s.to_string()).collect()
}

/// A symbol returned by a store's read function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StoreSym {
    Bottom,
    Top,
    Sym(SymId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Instruction {
    Push(SymId),
    Pop,
    /// Write-phase no-op.
    Stay,
    /// `D`
    Down,
    /// `S`: read-phase no-move.
    Hold,
    /// `U`
    Up,
}

impl Instruction {
    pub fn is_move(self) -> bool {
        matches!(self, Instruction::Down | Instruction::Hold | Instruction::Up)
    }

    pub fn is_write_phase(self) -> bool {
        matches!(self, Instruction::Push(_) | Instruction::Stay)
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Push(y) => write!(f, "push:#{y}"),
            Instruction::Pop => f.write_str("pop"),
            Instruction::Stay => f.write_str("stay"),
            Instruction::Down => f.write_str("D"),
            Instruction::Hold => f.write_str("S"),
            Instruction::Up => f.write_str("U"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StoreConfig {
    /// Cells above `Z_b`, bottom first.
    Pushdown(Vec<SymId>),
    Counter(u64),
    Stack { cells: Vec<SymId>, head: usize },
}

impl StoreConfig {
    /// The read function `f`.
    pub fn read(&self) -> StoreSym {
        match self {
            StoreConfig::Pushdown(cells) => cells.last().map_or(StoreSym::Bottom, |&a| StoreSym::Sym(a)),
            StoreConfig::Counter(0) => StoreSym::Bottom,
            StoreConfig::Counter(_) => StoreSym::Sym(0),
            StoreConfig::Stack { cells, head } => match *head {
                0 => StoreSym::Bottom,
                h if h <= cells.len() => StoreSym::Sym(cells[h - 1]),
                _ => StoreSym::Top,
            },
        }
    }

    pub fn counter_value(&self) -> Option<u64> {
        match self {
            StoreConfig::Counter(v) => Some(*v),
            _ => None,
        }
    }

    /// `g` without the alphabet/kind check; callers go through
    /// [`StoreTypeSpec::apply`] unless the instruction was already vetted.
    pub fn apply_in_place(&mut self, ins: Instruction) -> Result<(), StoreError> {
        match self {
            StoreConfig::Pushdown(cells) => match ins {
                Instruction::Push(y) => cells.push(y),
                Instruction::Pop => {
                    cells.pop().ok_or(StoreError::PopEmpty)?;
                }
                Instruction::Stay => {}
                _ => {
                    return Err(StoreError::IllegalInstruction(
                        ins.to_string(),
                        StoreKind::Pushdown,
                    ))
                }
            },
            StoreConfig::Counter(v) => match ins {
                Instruction::Push(_) => *v = v.checked_add(1).ok_or(StoreError::Overflow)?,
                Instruction::Pop => *v = v.checked_sub(1).ok_or(StoreError::PopEmpty)?,
                Instruction::Stay => {}
                _ => {
                    return Err(StoreError::IllegalInstruction(
                        ins.to_string(),
                        StoreKind::Counter,
                    ))
                }
            },
            StoreConfig::Stack { cells, head } => {
                let at_top = *head == cells.len();
                match ins {
                    Instruction::Push(y) => {
                        if !at_top {
                            return Err(StoreError::HeadNotAtTop("push"));
                        }
                        cells.push(y);
                        *head += 1;
                    }
                    Instruction::Pop => {
                        if !at_top {
                            return Err(StoreError::HeadNotAtTop("pop"));
                        }
                        cells.pop().ok_or(StoreError::PopEmpty)?;
                        *head -= 1;
                    }
                    Instruction::Stay => {
                        if !at_top {
                            return Err(StoreError::HeadNotAtTop("stay"));
                        }
                    }
                    Instruction::Down => {
                        if *head == 0 {
                            return Err(StoreError::DownAtBottom);
                        }
                        *head -= 1;
                    }
                    Instruction::Hold => {}
                    Instruction::Up => {
                        if *head > cells.len() {
                            return Err(StoreError::UpAtTop);
                        }
                        *head += 1;
                    }
                }
            }
        }
        Ok(())
    }

    /// Renders the configuration as a word, e.g. `Zb a b ↓ Zt`.
    pub fn render(&self, spec: &StoreTypeSpec) -> String {
        let name = |s: &SymId| spec.symbol_name(StoreSym::Sym(*s)).to_string();
        let mut parts = vec!["Zb".to_string()];
        match self {
            StoreConfig::Pushdown(cells) => parts.extend(cells.iter().map(name)),
            StoreConfig::Counter(v) => {
                parts.extend(std::iter::repeat_n(COUNTER_SYMBOL.to_string(), *v as usize))
            }
            StoreConfig::Stack { cells, head } => {
                // ↓ sits right after the cell at `head`; at len+1 it follows Z_t.
                for (i, c) in cells.iter().enumerate() {
                    if i == *head {
                        parts.push("↓".into());
                    }
                    parts.push(name(c));
                }
                if *head == cells.len() {
                    parts.push("↓".into());
                }
                parts.push("Zt".into());
                if *head == cells.len() + 1 {
                    parts.push("↓".into());
                }
            }
        }
        parts.join(" ")
    }

    /// Parses the rendering produced by [`StoreConfig::render`]. `Z_b`/`Z_t`
    /// may be written with or without the underscore.
    pub fn parse(spec: &StoreTypeSpec, text: &str) -> Result<StoreConfig, StoreError> {
        let toks: Vec<&str> = text
            .split_whitespace()
            .map(|t| match t {
                "Z_b" => "Zb",
                "Z_t" => "Zt",
                t => t,
            })
            .collect();
        let bad = |m: &str| StoreError::Malformed(format!("{m}: {text:?}"));
        if toks.first() != Some(&"Zb") {
            return Err(bad("configuration must start with Zb"));
        }
        let body = &toks[1..];
        let sym = |t: &str| spec.symbol_id(t).ok_or_else(|| bad("unknown symbol"));
        match spec.kind {
            StoreKind::Pushdown => Ok(StoreConfig::Pushdown(
                body.iter().map(|t| sym(t)).collect::<Result<_, _>>()?,
            )),
            StoreKind::Counter | StoreKind::RbCounter => {
                if body.iter().any(|t| *t != COUNTER_SYMBOL) {
                    return Err(bad("counter content must be c*"));
                }
                Ok(StoreConfig::Counter(body.len() as u64))
            }
            StoreKind::Stack | StoreKind::CheckingStack => {
                let mut cells = Vec::new();
                let mut head = None;
                let mut seen_top = false;
                for t in body {
                    match *t {
                        "↓" => {
                            if head.is_some() {
                                return Err(bad("more than one ↓"));
                            }
                            head = Some(cells.len() + usize::from(seen_top));
                        }
                        "Zt" => {
                            if seen_top {
                                return Err(bad("more than one Zt"));
                            }
                            seen_top = true;
                        }
                        t if seen_top => return Err(bad(&format!("{t} after Zt"))),
                        t => cells.push(sym(t)?),
                    }
                }
                if !seen_top {
                    return Err(bad("stack content must end with Zt"));
                }
                let head = head.ok_or_else(|| bad("missing ↓"))?;
                Ok(StoreConfig::Stack { cells, head })
            }
        }
    }
}

/// Online state of the `L_I` recogniser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhaseState {
    Free,
    Reversals { decreasing: bool, used: u32 },
    Checking { reading: bool },
}
