//! Decision procedures for deterministic checking-stack automata with
//! reversal-bounded counters, and the two-way one-counter instances built
//! from no-read machines.

use std::collections::{HashMap, HashSet, VecDeque};
use std::hash::Hash;

use serde::Serialize;
use thiserror::Error;

use crate::flow::{ncm_emptiness, word_of_path, RbcError};
use crate::machine::{
    classify_restrictions, fire, InSym, Letter, MachineBuilder, MachineSpec, Mode, Restriction, StateId,
    Transition,
};
use crate::sim::{run_deterministic, Verdict};
use crate::store::{Instruction, PhaseState, StoreConfig, StoreKind, StoreSym, StoreTypeSpec};
use crate::views::{materialize, Dynamics, LambdaView, NormalView, SplitView};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CsaError {
    #[error("machine is nondeterministic; membership is undecidable for this class")]
    Nondeterministic,
    #[error("unsupported store signature: {0}")]
    Signature(String),
    #[error("machine is not in normal form: {0}")]
    NotNormalized(String),
    #[error("restriction not met: {0}")]
    Restriction(String),
    #[error(transparent)]
    Rbc(#[from] RbcError),
    #[error("step budget of {0} exceeded")]
    Resource(u64),
}

pub const DEFAULT_STEP_BUDGET: u64 = 50_000_000;

/// Step cap for the deciders: `CSA_BUDGET_STEPS` when set and smaller than
/// the default.
pub fn step_budget() -> u64 {
    std::env::var("CSA_BUDGET_STEPS")
        .ok()
        .and_then(|v| v.trim().parse::<u64>().ok())
        .map_or(DEFAULT_STEP_BUDGET, |v| v.min(DEFAULT_STEP_BUDGET))
}

fn check_signature(m: &MachineSpec, stacks: Option<usize>) -> Result<(), CsaError> {
    let mut k = 0;
    for d in &m.stores {
        match d.spec.kind {
            StoreKind::CheckingStack => k += 1,
            StoreKind::RbCounter => {}
            other => return Err(CsaError::Signature(format!("store {} is a {other}", d.id))),
        }
    }
    if let Some(want) = stacks {
        if k != want {
            return Err(CsaError::Signature(format!("expected {want} checking stack(s), found {k}")));
        }
    }
    if !m.is_deterministic() {
        return Err(CsaError::Nondeterministic);
    }
    Ok(())
}

/// The word-encoding construction: a one-way machine over the empty input
/// alphabet accepting `λ` iff `m` accepts `w`. States are `q/h₁.h₂…`.
pub fn make_lambda_machine(m: &MachineSpec, w: &[Letter]) -> MachineSpec {
    let name = format!("{}_on_{}", m.name, if w.is_empty() { "lambda".into() } else { m.render_word(w) });
    materialize(&LambdaView::new(m, w), &sanitize(&name))
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect()
}

/// Normal form of a DCSACM on `λ`: every counter 1-reversal, every
/// writing step pushes, and acceptance only with all stores on `Z_b`.
pub fn normalize_dcsacm(m: &MachineSpec) -> Result<MachineSpec, CsaError> {
    check_signature(m, Some(1))?;
    let v = NormalView::new(SplitView::new(LambdaView::new(m, &[])));
    Ok(materialize(&v, &format!("{}_normal", m.name)))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RunStats {
    pub steps: u64,
    /// Times the repeat detector was cleared.
    pub resets: u64,
    /// Longest run of consecutive quiet steps.
    pub longest_window: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stop {
    Accept,
    Halt,
    Loop,
    Reading,
}

struct Run<S> {
    stop: Stop,
    state: S,
    stores: Vec<StoreConfig>,
    stats: RunStats,
}

/// What the future of a quiet stretch depends on, per store.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Obs {
    Top(StoreSym),
    Head(usize),
    Counter(bool, PhaseState),
}

fn observe(stores: &[StoreConfig], phases: &[PhaseState]) -> Vec<Obs> {
    stores
        .iter()
        .zip(phases)
        .map(|(s, &p)| match (s, p) {
            (StoreConfig::Stack { head, .. }, PhaseState::Checking { reading: true }) => Obs::Head(*head),
            (StoreConfig::Counter(v), p) => Obs::Counter(*v == 0, p),
            (s, _) => Obs::Top(s.read()),
        })
        .collect()
}

fn reading_mask(phases: &[PhaseState]) -> Vec<bool> {
    phases
        .iter()
        .map(|p| matches!(p, PhaseState::Checking { reading: true }))
        .collect()
}

fn defined(cfg: &StoreConfig, ins: Instruction) -> bool {
    match (cfg, ins) {
        (StoreConfig::Counter(v), Instruction::Pop) => *v > 0,
        (StoreConfig::Pushdown(c), Instruction::Pop) => !c.is_empty(),
        (StoreConfig::Stack { head, .. }, Instruction::Down) => *head > 0,
        (StoreConfig::Stack { cells, head }, Instruction::Up) => *head <= cells.len(),
        (StoreConfig::Stack { cells, head }, Instruction::Pop) => *head == cells.len() && !cells.is_empty(),
        (StoreConfig::Stack { cells, head }, Instruction::Push(_) | Instruction::Stay) => *head == cells.len(),
        _ => true,
    }
}

/// Runs a deterministic view whose counters are 1-reversal.
///
/// A step is quiet when it pops no counter and pushes no counter that reads
/// `Z_b`; quiet steps preserve every counter's zero test. Between a
/// non-quiet step (or a stack entering its reading phase) and the next, the
/// observation of state, writing-stack tops, reading-stack heads and counter
/// phases determines the rest of the run, so a repeated observation is an
/// infinite loop. Only finitely many non-quiet steps occur, which bounds
/// the run.
fn simulate<D: Dynamics>(d: &D, stop_at_reading: bool, max_steps: u64) -> Result<Run<D::State>, CsaError> {
    let specs: Vec<&StoreTypeSpec> = d.stores().iter().map(|s| &s.spec).collect();
    let mut q = d.initial();
    let mut stores: Vec<StoreConfig> = specs.iter().map(|s| s.initial_config()).collect();
    let mut phases: Vec<PhaseState> = specs.iter().map(|s| s.initial_phase()).collect();
    let mut stats = RunStats::default();
    let mut seen: HashSet<(D::State, Vec<Obs>)> = HashSet::new();
    let mut window = 0u64;
    seen.insert((q.clone(), observe(&stores, &phases)));
    let stop = loop {
        if d.is_final(&q) {
            break Stop::Accept;
        }
        let frozen = reading_mask(&phases);
        if stop_at_reading && frozen.iter().any(|&r| r) {
            break Stop::Reading;
        }
        let reads: Vec<StoreSym> = stores.iter().map(StoreConfig::read).collect();
        let mut succ = d.successors(&q, &reads);
        if succ.len() > 1 {
            return Err(CsaError::Nondeterministic);
        }
        let Some((next, ins)) = succ.pop() else { break Stop::Halt };
        let mut next_phases = phases.clone();
        let mut ok = true;
        for i in 0..specs.len() {
            match specs[i].advance(phases[i], ins[i]) {
                Ok(p) if defined(&stores[i], ins[i]) => next_phases[i] = p,
                _ => ok = false,
            }
        }
        if !ok {
            break Stop::Halt;
        }
        if stats.steps >= max_steps {
            return Err(CsaError::Resource(max_steps));
        }
        let quiet = (0..specs.len()).all(|i| {
            !specs[i].kind.is_counter()
                || match ins[i] {
                    Instruction::Pop => false,
                    Instruction::Push(_) => reads[i] != StoreSym::Bottom,
                    _ => true,
                }
        });
        for (s, &x) in stores.iter_mut().zip(&ins) {
            s.apply_in_place(x).expect("checked above");
        }
        phases = next_phases;
        stats.steps += 1;
        q = next;
        if !quiet || reading_mask(&phases) != frozen {
            seen.clear();
            stats.resets += 1;
            window = 0;
        } else {
            window += 1;
            stats.longest_window = stats.longest_window.max(window);
        }
        if !seen.insert((q.clone(), observe(&stores, &phases))) {
            break Stop::Loop;
        }
    };
    Ok(Run { stop, state: q, stores, stats })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Decision {
    pub accepted: bool,
    pub stats: RunStats,
}

/// Decides acceptance of `λ` by a deterministic view over checking stacks
/// and counters.
pub fn decide_view<D: Dynamics>(d: &D, max_steps: u64) -> Result<Decision, CsaError> {
    let v = NormalView::new(SplitView::new(d));
    let run = simulate(&v, false, max_steps)?;
    Ok(Decision {
        accepted: run.stop == Stop::Accept,
        stats: run.stats,
    })
}

impl<D: Dynamics> Dynamics for &D {
    type State = D::State;

    fn stores(&self) -> &[crate::machine::StoreDecl] {
        (*self).stores()
    }
    fn initial(&self) -> Self::State {
        (*self).initial()
    }
    fn is_final(&self, q: &Self::State) -> bool {
        (*self).is_final(q)
    }
    fn successors(&self, q: &Self::State, reads: &[StoreSym]) -> Vec<(Self::State, Vec<Instruction>)> {
        (*self).successors(q, reads)
    }
    fn name(&self, q: &Self::State) -> String {
        (*self).name(q)
    }
}

/// `λ ∈ L(m)` for a DCSACM (one checking stack plus `rb_counter`s).
pub fn decide_lambda_dcsacm(m: &MachineSpec) -> Result<bool, CsaError> {
    check_signature(m, Some(1))?;
    Ok(decide_view(&LambdaView::new(m, &[]), step_budget())?.accepted)
}

/// `w ∈ L(m)` for a DCSACM, one- or two-way with any number of heads.
pub fn decide_membership_dcsacm(m: &MachineSpec, w: &[Letter]) -> Result<bool, CsaError> {
    check_signature(m, Some(1))?;
    Ok(decide_view(&LambdaView::new(m, w), step_budget())?.accepted)
}

/// `w ∈ L(m)` for a deterministic machine with any number of checking
/// stacks and `rb_counter`s.
pub fn decide_membership_kstack(m: &MachineSpec, w: &[Letter]) -> Result<bool, CsaError> {
    check_signature(m, None)?;
    Ok(decide_view(&LambdaView::new(m, w), step_budget())?.accepted)
}

/// Like [`decide_membership_kstack`], also returning run statistics.
pub fn decide_membership_stats(m: &MachineSpec, w: &[Letter], max_steps: u64) -> Result<Decision, CsaError> {
    check_signature(m, None)?;
    decide_view(&LambdaView::new(m, w), max_steps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Direct simulation with repeat detection.
    Simulation,
    /// Emptiness of the reversal-bounded counter machine from
    /// [`writing_phase_ncm`].
    Reduction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WritingSummary {
    /// Contents of each checking stack, bottom first.
    pub stacks: Vec<Vec<String>>,
    pub state: String,
    pub counters: Vec<u64>,
    /// Whether the phase ended with a stack starting to read (as opposed to
    /// accepting or halting).
    pub entered_reading: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum WritingPhaseOutcome {
    Infinite,
    Finite(WritingSummary),
}

/// Checks the normal form: `λ`-form (every transition reads `⊲` without
/// moving), 1-reversal counters, no `stay` on a checking stack, and every
/// transition into a final state reads `Z_b` on every store.
pub fn check_normalized(m: &MachineSpec) -> Result<(), CsaError> {
    check_signature(m, None)?;
    let bad = |msg: String| Err(CsaError::NotNormalized(msg));
    if m.heads != 1 {
        return bad(format!("{} heads", m.heads));
    }
    if let Some(d) = m.stores.iter().find(|d| d.spec.kind == StoreKind::RbCounter && d.spec.reversal_bound != 1) {
        return bad(format!("counter {} is {}-reversal", d.id, d.spec.reversal_bound));
    }
    for t in &m.transitions {
        let text = m.transition_text(t);
        if t.reads[0] != InSym::Right || t.moves[0] != 0 {
            return bad(format!("input is read: {text}"));
        }
        for (i, d) in m.stores.iter().enumerate() {
            if d.spec.kind == StoreKind::CheckingStack && t.instructions[i] == Instruction::Stay {
                return bad(format!("stay on a checking stack: {text}"));
            }
        }
        if m.is_final(t.to) && t.store_reads.iter().any(|&r| r != StoreSym::Bottom) {
            return bad(format!("accepting move off Z_b: {text}"));
        }
    }
    Ok(())
}

fn summarize<D: Dynamics>(d: &D, run: &Run<D::State>) -> WritingSummary {
    let mut stacks = Vec::new();
    let mut counters = Vec::new();
    for (decl, cfg) in d.stores().iter().zip(&run.stores) {
        match cfg {
            StoreConfig::Stack { cells, .. } => stacks.push(
                cells
                    .iter()
                    .map(|&y| decl.spec.symbol_name(StoreSym::Sym(y)).to_string())
                    .collect(),
            ),
            StoreConfig::Counter(v) => counters.push(*v),
            StoreConfig::Pushdown(_) => {}
        }
    }
    WritingSummary {
        stacks,
        state: d.name(&run.state),
        counters,
        entered_reading: run.stop == Stop::Reading,
    }
}

/// Whether the writing phase of a normalized machine on `λ` runs forever.
/// The phase ends when some stack starts reading.
pub fn detect_infinite_writing(m: &MachineSpec, engine: Engine) -> Result<WritingPhaseOutcome, CsaError> {
    check_normalized(m)?;
    let v = LambdaView::new(m, &[]);
    match engine {
        Engine::Simulation => {
            let run = simulate(&v, true, step_budget())?;
            Ok(match run.stop {
                Stop::Loop => WritingPhaseOutcome::Infinite,
                _ => WritingPhaseOutcome::Finite(summarize(&v, &run)),
            })
        }
        Engine::Reduction => {
            if !ncm_emptiness(&writing_phase_ncm(m)?)?.is_empty() {
                return Ok(WritingPhaseOutcome::Infinite);
            }
            let run = simulate(&v, true, step_budget())?;
            if run.stop == Stop::Loop {
                return Err(CsaError::Resource(run.stats.steps));
            }
            Ok(WritingPhaseOutcome::Finite(summarize(&v, &run)))
        }
    }
}

/// Assigns state ids to keys on first sight, with unique readable names.
struct Interner<K> {
    b: MachineBuilder,
    ids: HashMap<K, StateId>,
    queue: VecDeque<K>,
}

impl<K: Clone + Eq + Hash> Interner<K> {
    fn new(b: MachineBuilder) -> Self {
        Interner {
            b,
            ids: HashMap::new(),
            queue: VecDeque::new(),
        }
    }

    fn id(&mut self, k: &K, name: impl FnOnce() -> String) -> StateId {
        if let Some(&s) = self.ids.get(k) {
            return s;
        }
        let base = name();
        let mut name = base.clone();
        let mut n = 1;
        while self.b.has_state(&name) {
            n += 1;
            name = format!("{base}#{n}");
        }
        let s = self.b.state(&name);
        self.ids.insert(k.clone(), s);
        self.queue.push_back(k.clone());
        s
    }

    fn set_final(&mut self, s: StateId) {
        let n = self.b.spec().states[s].clone();
        self.b.final_state(&n);
    }

    fn set_initial(&mut self, s: StateId) {
        let n = self.b.spec().states[s].clone();
        self.b.initial(&n);
    }
}

/// Writing-phase node of a normalized machine: state and stack tops.
type WNode = (StateId, Vec<StoreSym>);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum WKey {
    Run(WNode),
    Guess(WNode, WNode),
}

/// A one-way reversal-bounded counter machine that is nonempty iff the
/// writing phase of the normalized `λ`-machine `m` is infinite.
///
/// The input alphabet is the tuples of symbols pushed in one step (names
/// joined by `+`); the counters are those of `m`. The machine follows the
/// writing phase, guesses a node `(q, tops)` from which it then takes only
/// quiet steps, and accepts when it returns to that node. A quiet cycle
/// through a node repeats forever in a deterministic machine, and an
/// infinite writing phase is eventually quiet, so such a cycle exists.
pub fn writing_phase_ncm(m: &MachineSpec) -> Result<MachineSpec, CsaError> {
    check_normalized(m)?;
    let stacks = m.stores_of_kind(StoreKind::CheckingStack);
    let counters: Vec<usize> = (0..m.stores.len()).filter(|i| !stacks.contains(i)).collect();
    let by_state = m.by_state();
    let writing = |t: &Transition| stacks.iter().all(|&s| matches!(t.instructions[s], Instruction::Push(_)));
    let quiet = |t: &Transition| {
        counters.iter().all(|&c| match t.instructions[c] {
            Instruction::Pop => false,
            Instruction::Push(_) => t.store_reads[c] != StoreSym::Bottom,
            _ => true,
        })
    };
    let pushed = |t: &Transition| -> Vec<StoreSym> {
        stacks
            .iter()
            .map(|&s| match t.instructions[s] {
                Instruction::Push(y) => StoreSym::Sym(y),
                _ => unreachable!("writing transitions push"),
            })
            .collect()
    };
    let moves = |n: &WNode| -> Vec<&Transition> {
        if m.is_final(n.0) {
            return Vec::new();
        }
        by_state[n.0]
            .iter()
            .map(|&i| &m.transitions[i])
            .filter(|t| writing(t) && stacks.iter().zip(&n.1).all(|(&s, &top)| t.store_reads[s] == top))
            .collect()
    };

    // Quiet graph over writing nodes, to restrict guesses to its cycles.
    let start: WNode = (m.initial, vec![StoreSym::Bottom; stacks.len()]);
    let mut nodes: Vec<WNode> = vec![start.clone()];
    let mut index: HashMap<WNode, usize> = HashMap::from([(start.clone(), 0)]);
    let mut quiet_adj: Vec<Vec<usize>> = vec![Vec::new()];
    let mut i = 0;
    while i < nodes.len() {
        let n = nodes[i].clone();
        for t in moves(&n) {
            let next = (t.to, pushed(t));
            let j = *index.entry(next.clone()).or_insert_with(|| {
                nodes.push(next.clone());
                quiet_adj.push(Vec::new());
                nodes.len() - 1
            });
            if quiet(t) {
                quiet_adj[i].push(j);
            }
        }
        i += 1;
    }
    let comp = scc(&quiet_adj);
    let cyclic: Vec<bool> = {
        let mut size = vec![0usize; nodes.len()];
        for &c in &comp {
            size[c] += 1;
        }
        (0..nodes.len())
            .map(|v| size[comp[v]] > 1 || quiet_adj[v].contains(&v))
            .collect()
    };

    let mut letters: Vec<Vec<StoreSym>> = Vec::new();
    for t in &m.transitions {
        if writing(t) {
            let p = pushed(t);
            if !letters.contains(&p) {
                letters.push(p);
            }
        }
    }
    let letter_name = |p: &[StoreSym]| -> String {
        let parts: Vec<&str> = stacks
            .iter()
            .zip(p)
            .map(|(&s, &y)| m.stores[s].spec.symbol_name(y))
            .collect();
        parts.join("+")
    };
    let names: Vec<String> = letters.iter().map(|p| letter_name(p)).collect();
    let mut stores = Vec::new();
    for &c in &counters {
        stores.push(m.stores[c].clone());
    }
    let b = MachineBuilder::from_parts(&format!("{}_writing", m.name), Mode::OneWay, 1, names, stores);
    let mut it: Interner<WKey> = Interner::new(b);
    let node_name = |n: &WNode| -> String {
        let tops: Vec<&str> = stacks
            .iter()
            .zip(&n.1)
            .map(|(&s, &y)| m.stores[s].spec.symbol_name(y))
            .collect();
        format!("{}[{}]", m.states[n.0], tops.join(","))
    };
    let s0 = it.id(&WKey::Run(start.clone()), || format!("N:{}", node_name(&start)));
    it.set_initial(s0);
    let acc = it.b.state("ACC");
    it.set_final(acc);
    while let Some(k) = it.queue.pop_front() {
        let from = it.ids[&k];
        let (cur, guess) = match &k {
            WKey::Run(n) => (n.clone(), None),
            WKey::Guess(n, g) => (n.clone(), Some(g.clone())),
        };
        for t in moves(&cur) {
            let next: WNode = (t.to, pushed(t));
            let p = pushed(t);
            let letter = letters.iter().position(|l| *l == p).expect("letter collected") as Letter;
            let mut targets = Vec::new();
            match &guess {
                None => {
                    targets.push(WKey::Run(next.clone()));
                    if quiet(t) && cyclic[index[&cur]] && comp[index[&cur]] == comp[index[&next]] {
                        targets.push(WKey::Guess(next.clone(), cur.clone()));
                    }
                }
                Some(g) => {
                    if quiet(t) && comp[index[&next]] == comp[index[g]] {
                        targets.push(WKey::Guess(next.clone(), g.clone()));
                    }
                }
            }
            for target in targets {
                let to = match &target {
                    WKey::Guess(n, g) if n == g => acc,
                    WKey::Run(n) => it.id(&target, || format!("N:{}", node_name(n))),
                    WKey::Guess(n, g) => it.id(&target, || format!("G:{}<{}", node_name(n), node_name(g))),
                };
                it.b.push_transition(Transition {
                    from,
                    reads: vec![InSym::Letter(letter)],
                    store_reads: counters.iter().map(|&c| t.store_reads[c]).collect(),
                    to,
                    instructions: counters.iter().map(|&c| t.instructions[c]).collect(),
                    moves: vec![1],
                });
            }
        }
    }
    Ok(it.b.build())
}

/// Tarjan's algorithm; returns a component id per vertex.
fn scc(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![usize::MAX; n];
    let mut next_index = 0;
    let mut next_comp = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        // Explicit call stack of (vertex, next edge).
        let mut calls = vec![(root, 0usize)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut e)) = calls.last_mut() {
            if *e < adj[v].len() {
                let w = adj[v][*e];
                *e += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    calls.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                calls.pop();
                if let Some(&(u, _)) = calls.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("component on stack");
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

/// A symbol of a two-way one-counter instance: one or two source
/// transitions written side by side (`$` marks an absent component).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InstanceLabel {
    pub name: String,
    pub first: Option<usize>,
    pub second: Option<usize>,
    /// Input symbol read by the source transitions.
    #[serde(skip)]
    pub read: InSym,
    /// Whether the source transitions advance the input head.
    #[serde(skip)]
    pub advance: bool,
}

/// A deterministic two-way one-counter machine over transition labels,
/// with the source transition(s) behind each label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoDcm1Instance {
    pub spec: MachineSpec,
    pub labels: Vec<InstanceLabel>,
}

impl TwoDcm1Instance {
    /// One line per label: `label -> first second`, `$` when absent.
    pub fn sidecar(&self) -> String {
        let part = |x: Option<usize>| x.map_or("$".to_string(), |i| i.to_string());
        let mut out = String::new();
        for l in &self.labels {
            if self.labels.iter().any(|l| l.second.is_some()) {
                out.push_str(&format!("{} -> {} {}\n", l.name, part(l.first), part(l.second)));
            } else {
                out.push_str(&format!("{} -> {}\n", l.name, part(l.first)));
            }
        }
        out
    }

    pub fn label_id(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l.name == name)
    }

    /// The source input word spelled by a label word.
    pub fn source_word(&self, labels: &[usize]) -> Vec<Letter> {
        let mut word = Vec::new();
        let mut pending = None;
        for &i in labels {
            let l = &self.labels[i];
            let x = match l.read {
                InSym::Letter(a) => Some(a),
                _ => None,
            };
            if l.advance {
                word.extend(x);
                pending = None;
            } else {
                pending = x;
            }
        }
        word.extend(pending);
        word
    }

    /// The label word as instance letters.
    pub fn render(&self, labels: &[usize]) -> String {
        labels.iter().map(|&i| self.labels[i].name.as_str()).collect::<Vec<_>>().join(" ")
    }
}

fn check_noread_dcsacm1(m: &MachineSpec) -> Result<(usize, usize), CsaError> {
    check_signature(m, Some(1))?;
    let counters = m.stores_of_kind(StoreKind::RbCounter);
    if counters.len() != 1 {
        return Err(CsaError::Signature(format!("expected one counter, found {}", counters.len())));
    }
    if m.mode != Mode::OneWay || m.heads != 1 {
        return Err(CsaError::Signature("expected a one-way, one-head machine".into()));
    }
    if !classify_restrictions(m).contains(&Restriction::NoRead) {
        return Err(CsaError::Restriction(format!("{} is not no-read", m.name)));
    }
    Ok((m.stores_of_kind(StoreKind::CheckingStack)[0], counters[0]))
}

/// Head status of the source machine while labels are scanned: fresh on a
/// new cell, or parked on a symbol by a non-advancing transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Head {
    Fresh,
    On(InSym),
}

impl Head {
    fn admits(self, x: InSym) -> bool {
        match self {
            Head::Fresh => true,
            Head::On(y) => x == y,
        }
    }

    fn after(x: InSym, advance: bool) -> Head {
        if advance {
            Head::Fresh
        } else {
            Head::On(x)
        }
    }

    fn at_end(self) -> bool {
        matches!(self, Head::Fresh | Head::On(InSym::Right))
    }

    fn tag(self, m: &MachineSpec) -> String {
        match self {
            Head::Fresh => "_".into(),
            Head::On(x) => m.in_sym_name(x).to_string(),
        }
    }
}

/// Writing-phase transitions usable as labels: they push or stay on the
/// stack, and a transition on `⊲` must not move.
fn label_transitions(m: &MachineSpec, s: usize) -> Vec<usize> {
    (0..m.transitions.len())
        .filter(|&i| {
            let t = &m.transitions[i];
            t.instructions[s].is_write_phase()
                && t.reads[0] != InSym::Left
                && (t.reads[0] != InSym::Right || t.moves[0] == 0)
        })
        .collect()
}

const COUNTER_READS: [StoreSym; 2] = [StoreSym::Bottom, StoreSym::Sym(0)];

fn top_after(t: &Transition, s: usize, top: StoreSym) -> StoreSym {
    match t.instructions[s] {
        Instruction::Push(y) => StoreSym::Sym(y),
        _ => top,
    }
}

fn reading_move(ins: Instruction) -> Option<i8> {
    match ins {
        Instruction::Down => Some(-1),
        Instruction::Hold => Some(0),
        Instruction::Up => Some(1),
        _ => None,
    }
}

fn tape_syms(n_labels: usize) -> Vec<InSym> {
    let mut v = vec![InSym::Left, InSym::Right];
    v.extend((0..n_labels).map(|i| InSym::Letter(i as Letter)));
    v
}

/// Emits the reading-phase transitions of `m` from `q` on the instance:
/// the stack symbol under the head is the label's pushed symbol, `⊳` stands
/// for `Z_b` and `⊲` for `Z_t`; labels that do not push are skipped.
/// `pick` selects the label's component for `m`, `target` names the state
/// after each move.
#[allow(clippy::too_many_arguments)]
fn reading_phase<K: Clone + Eq + Hash>(
    it: &mut Interner<K>,
    from: StateId,
    m: &MachineSpec,
    s: usize,
    c: usize,
    q: StateId,
    down: bool,
    labels: &[InstanceLabel],
    pick: impl Fn(&InstanceLabel) -> Option<usize>,
    mut target: impl FnMut(&mut Interner<K>, StateId, bool) -> StateId,
) {
    let by_state = m.by_state();
    for x in tape_syms(labels.len()) {
        let y = match x {
            InSym::Left => Some(StoreSym::Bottom),
            InSym::Right => Some(StoreSym::Top),
            InSym::Letter(i) => pick(&labels[i as usize]).and_then(|ti| match m.transitions[ti].instructions[s] {
                Instruction::Push(y) => Some(StoreSym::Sym(y)),
                _ => None,
            }),
        };
        match y {
            None => {
                let to = target(it, q, down);
                for cr in COUNTER_READS {
                    it.b.push_transition(Transition {
                        from,
                        reads: vec![x],
                        store_reads: vec![cr],
                        to,
                        instructions: vec![Instruction::Stay],
                        moves: vec![if down { -1 } else { 1 }],
                    });
                }
            }
            Some(y) => {
                for &ti in &by_state[q] {
                    let t = &m.transitions[ti];
                    let Some(mv) = reading_move(t.instructions[s]) else { continue };
                    if t.reads[0] != InSym::Right || t.moves[0] != 0 || t.store_reads[s] != y {
                        continue;
                    }
                    let nd = match mv {
                        -1 => true,
                        1 => false,
                        _ => down,
                    };
                    let to = target(it, t.to, nd);
                    it.b.push_transition(Transition {
                        from,
                        reads: vec![x],
                        store_reads: vec![t.store_reads[c]],
                        to,
                        instructions: vec![t.instructions[c]],
                        moves: vec![mv],
                    });
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum NrKey {
    Write(StateId, StoreSym, Head),
    Read(StateId, bool),
}

/// A deterministic two-way one-counter machine whose language is nonempty
/// iff `L(m)` is, for a no-read DCSACM with one counter.
///
/// The instance reads words of writing-phase transition labels. A left to
/// right pass checks that the labels form the writing phase of a run of `m`
/// on the word they spell (replaying the counter); at `⊲` it walks back
/// over the labels, which now serve as the stack contents, and runs the
/// reading phase of `m`.
pub fn noread_dcsacm1_to_2dcm1(m: &MachineSpec) -> Result<TwoDcm1Instance, CsaError> {
    let (s, c) = check_noread_dcsacm1(m)?;
    let label_ts = label_transitions(m, s);
    let labels: Vec<InstanceLabel> = label_ts
        .iter()
        .map(|&i| InstanceLabel {
            name: format!("t{i}"),
            first: Some(i),
            second: None,
            read: m.transitions[i].reads[0],
            advance: m.transitions[i].moves[0] == 1,
        })
        .collect();
    let names: Vec<String> = labels.iter().map(|l| l.name.clone()).collect();
    let counter = StoreTypeSpec::rb_counter(m.stores[c].spec.reversal_bound).expect("valid bound");
    let b = MachineBuilder::from_parts(
        &format!("{}_2dcm1", m.name),
        Mode::TwoWay,
        1,
        names,
        vec![crate::machine::StoreDecl {
            id: m.stores[c].id.clone(),
            spec: counter,
        }],
    );
    let mut it: Interner<NrKey> = Interner::new(b);
    let stack_spec = &m.stores[s].spec;
    let key_name = |k: &NrKey| match k {
        NrKey::Write(q, top, h) => format!("W:{}:{}:{}", m.states[*q], stack_spec.symbol_name(*top), h.tag(m)),
        NrKey::Read(q, down) => format!("R:{}:{}", m.states[*q], if *down { "d" } else { "u" }),
    };
    let k0 = NrKey::Write(m.initial, StoreSym::Bottom, Head::Fresh);
    let s0 = it.id(&k0, || key_name(&k0));
    it.set_initial(s0);
    while let Some(k) = it.queue.pop_front() {
        let from = it.ids[&k];
        match k {
            NrKey::Write(q, top, h) => {
                if m.is_final(q) {
                    it.set_final(from);
                    continue;
                }
                for (li, l) in labels.iter().enumerate() {
                    let t = &m.transitions[l.first.expect("single component")];
                    if t.from != q || t.store_reads[s] != top || !h.admits(l.read) {
                        continue;
                    }
                    let nk = NrKey::Write(t.to, top_after(t, s, top), Head::after(l.read, l.advance));
                    let to = it.id(&nk, || key_name(&nk));
                    it.b.push_transition(Transition {
                        from,
                        reads: vec![InSym::Letter(li as Letter)],
                        store_reads: vec![t.store_reads[c]],
                        to,
                        instructions: vec![t.instructions[c]],
                        moves: vec![1],
                    });
                }
                if h.at_end() {
                    let nk = NrKey::Read(q, true);
                    let to = it.id(&nk, || key_name(&nk));
                    for cr in COUNTER_READS {
                        it.b.push_transition(Transition {
                            from,
                            reads: vec![InSym::Right],
                            store_reads: vec![cr],
                            to,
                            instructions: vec![Instruction::Stay],
                            moves: vec![-1],
                        });
                    }
                }
            }
            NrKey::Read(q, down) => {
                if m.is_final(q) {
                    it.set_final(from);
                    continue;
                }
                reading_phase(&mut it, from, m, s, c, q, down, &labels, |l| l.first, |it, q2, d2| {
                    let nk = NrKey::Read(q2, d2);
                    it.id(&nk, || key_name(&nk))
                });
            }
        }
    }
    Ok(TwoDcm1Instance {
        spec: it.b.build(),
        labels,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum IxKey {
    /// First pass; `None` once the first machine has accepted.
    Pass1(Option<(StateId, StoreSym)>, Head),
    Read1(StateId, bool),
    Zero,
    Rewind,
    Pass2(StateId, StoreSym, Head),
    Read2(StateId, bool),
    Accept,
}

/// A deterministic two-way one-counter machine that is nonempty iff
/// `L(m1) ∩ L(m2)` is, for no-read DCSACMs with one counter each.
///
/// Labels pair a transition of each machine (same input symbol and head
/// move), or one transition with `$`. The first pass replays `m1` on the
/// first components and its reading phase; the counter is then emptied,
/// the head returns to `⊳`, and `m2` is replayed on the second components.
pub fn intersection_emptiness_reduction(m1: &MachineSpec, m2: &MachineSpec) -> Result<TwoDcm1Instance, CsaError> {
    let (s1, c1) = check_noread_dcsacm1(m1)?;
    let (s2, c2) = check_noread_dcsacm1(m2)?;
    if m1.input != m2.input {
        return Err(CsaError::Signature("machines have different input alphabets".into()));
    }
    let t1 = label_transitions(m1, s1);
    let t2 = label_transitions(m2, s2);
    let mut labels = Vec::new();
    for &i in &t1 {
        let a = &m1.transitions[i];
        for &j in &t2 {
            let b = &m2.transitions[j];
            if a.reads[0] == b.reads[0] && a.moves[0] == b.moves[0] {
                labels.push(InstanceLabel {
                    name: format!("t{i}/t{j}"),
                    first: Some(i),
                    second: Some(j),
                    read: a.reads[0],
                    advance: a.moves[0] == 1,
                });
            }
        }
    }
    for &i in &t1 {
        let a = &m1.transitions[i];
        labels.push(InstanceLabel {
            name: format!("t{i}/$"),
            first: Some(i),
            second: None,
            read: a.reads[0],
            advance: a.moves[0] == 1,
        });
    }
    for &j in &t2 {
        let b = &m2.transitions[j];
        labels.push(InstanceLabel {
            name: format!("$/t{j}"),
            first: None,
            second: Some(j),
            read: b.reads[0],
            advance: b.moves[0] == 1,
        });
    }
    let names: Vec<String> = labels.iter().map(|l| l.name.clone()).collect();
    let bound = m1.stores[c1].spec.reversal_bound + m2.stores[c2].spec.reversal_bound + 2;
    let b = MachineBuilder::from_parts(
        &format!("{}_x_{}_2dcm1", m1.name, m2.name),
        Mode::TwoWay,
        1,
        names,
        vec![crate::machine::StoreDecl {
            id: "C".into(),
            spec: StoreTypeSpec::rb_counter(bound).expect("valid bound"),
        }],
    );
    let mut it: Interner<IxKey> = Interner::new(b);
    let (g1, g2) = (&m1.stores[s1].spec, &m2.stores[s2].spec);
    let key_name = |k: &IxKey| match k {
        IxKey::Pass1(Some((q, top)), h) => format!("A:{}:{}:{}", m1.states[*q], g1.symbol_name(*top), h.tag(m1)),
        IxKey::Pass1(None, h) => format!("A:done:{}", h.tag(m1)),
        IxKey::Read1(q, d) => format!("RA:{}:{}", m1.states[*q], if *d { "d" } else { "u" }),
        IxKey::Zero => "ZERO".into(),
        IxKey::Rewind => "REWIND".into(),
        IxKey::Pass2(q, top, h) => format!("B:{}:{}:{}", m2.states[*q], g2.symbol_name(*top), h.tag(m2)),
        IxKey::Read2(q, d) => format!("RB:{}:{}", m2.states[*q], if *d { "d" } else { "u" }),
        IxKey::Accept => "ACCEPT".into(),
    };
    let pass1 = |q: StateId, top: StoreSym, h: Head| {
        if m1.is_final(q) {
            IxKey::Pass1(None, h)
        } else {
            IxKey::Pass1(Some((q, top)), h)
        }
    };
    let pass2 = |q: StateId, top: StoreSym, h: Head| {
        if m2.is_final(q) {
            IxKey::Accept
        } else {
            IxKey::Pass2(q, top, h)
        }
    };
    let k0 = pass1(m1.initial, StoreSym::Bottom, Head::Fresh);
    let s0 = it.id(&k0, || key_name(&k0));
    it.set_initial(s0);
    let all = tape_syms(labels.len());
    let push = |it: &mut Interner<IxKey>, from, x, cr, to, ins, mv| {
        it.b.push_transition(Transition {
            from,
            reads: vec![x],
            store_reads: vec![cr],
            to,
            instructions: vec![ins],
            moves: vec![mv],
        })
    };
    while let Some(k) = it.queue.pop_front() {
        let from = it.ids[&k];
        match k {
            IxKey::Pass1(active, h) => {
                for (li, l) in labels.iter().enumerate() {
                    if !h.admits(l.read) {
                        continue;
                    }
                    let x = InSym::Letter(li as Letter);
                    let nh = Head::after(l.read, l.advance);
                    match active {
                        None => {
                            let nk = IxKey::Pass1(None, nh);
                            let to = it.id(&nk, || key_name(&nk));
                            for cr in COUNTER_READS {
                                push(&mut it, from, x, cr, to, Instruction::Stay, 1);
                            }
                        }
                        Some((q, top)) => match l.first {
                            None => {
                                // m2 may only run ahead while m1 stands still.
                                if l.advance {
                                    continue;
                                }
                                let nk = pass1(q, top, nh);
                                let to = it.id(&nk, || key_name(&nk));
                                for cr in COUNTER_READS {
                                    push(&mut it, from, x, cr, to, Instruction::Stay, 1);
                                }
                            }
                            Some(ti) => {
                                let t = &m1.transitions[ti];
                                if t.from != q || t.store_reads[s1] != top {
                                    continue;
                                }
                                let nk = pass1(t.to, top_after(t, s1, top), nh);
                                let to = it.id(&nk, || key_name(&nk));
                                push(&mut it, from, x, t.store_reads[c1], to, t.instructions[c1], 1);
                            }
                        },
                    }
                }
                match active {
                    None => {
                        let nk = IxKey::Zero;
                        let to = it.id(&nk, || key_name(&nk));
                        for cr in COUNTER_READS {
                            push(&mut it, from, InSym::Right, cr, to, Instruction::Stay, 0);
                        }
                    }
                    Some((q, _)) if h.at_end() => {
                        let nk = IxKey::Read1(q, true);
                        let to = it.id(&nk, || key_name(&nk));
                        for cr in COUNTER_READS {
                            push(&mut it, from, InSym::Right, cr, to, Instruction::Stay, -1);
                        }
                    }
                    Some(_) => {}
                }
            }
            IxKey::Read1(q, down) => {
                reading_phase(&mut it, from, m1, s1, c1, q, down, &labels, |l| l.first, |it, q2, d2| {
                    let nk = if m1.is_final(q2) { IxKey::Zero } else { IxKey::Read1(q2, d2) };
                    it.id(&nk, || key_name(&nk))
                });
            }
            IxKey::Zero => {
                let to_rewind = it.id(&IxKey::Rewind, || key_name(&IxKey::Rewind));
                for &x in &all {
                    push(&mut it, from, x, StoreSym::Sym(0), from, Instruction::Pop, 0);
                    push(&mut it, from, x, StoreSym::Bottom, to_rewind, Instruction::Stay, 0);
                }
            }
            IxKey::Rewind => {
                let nk = pass2(m2.initial, StoreSym::Bottom, Head::Fresh);
                let start = it.id(&nk, || key_name(&nk));
                for &x in &all {
                    let (to, mv) = if x == InSym::Left { (start, 1) } else { (from, -1) };
                    push(&mut it, from, x, StoreSym::Bottom, to, Instruction::Stay, mv);
                }
            }
            IxKey::Pass2(q, top, h) => {
                for (li, l) in labels.iter().enumerate() {
                    if !h.admits(l.read) {
                        continue;
                    }
                    let x = InSym::Letter(li as Letter);
                    let nh = Head::after(l.read, l.advance);
                    match l.second {
                        None => {
                            if l.advance {
                                continue;
                            }
                            let nk = IxKey::Pass2(q, top, nh);
                            let to = it.id(&nk, || key_name(&nk));
                            for cr in COUNTER_READS {
                                push(&mut it, from, x, cr, to, Instruction::Stay, 1);
                            }
                        }
                        Some(tj) => {
                            let t = &m2.transitions[tj];
                            if t.from != q || t.store_reads[s2] != top {
                                continue;
                            }
                            let nk = pass2(t.to, top_after(t, s2, top), nh);
                            let to = it.id(&nk, || key_name(&nk));
                            push(&mut it, from, x, t.store_reads[c2], to, t.instructions[c2], 1);
                        }
                    }
                }
                if h.at_end() {
                    let nk = IxKey::Read2(q, true);
                    let to = it.id(&nk, || key_name(&nk));
                    for cr in COUNTER_READS {
                        push(&mut it, from, InSym::Right, cr, to, Instruction::Stay, -1);
                    }
                }
            }
            IxKey::Read2(q, down) => {
                reading_phase(&mut it, from, m2, s2, c2, q, down, &labels, |l| l.second, |it, q2, d2| {
                    let nk = if m2.is_final(q2) { IxKey::Accept } else { IxKey::Read2(q2, d2) };
                    it.id(&nk, || key_name(&nk))
                });
            }
            IxKey::Accept => it.set_final(from),
        }
    }
    Ok(TwoDcm1Instance {
        spec: it.b.build(),
        labels,
    })
}

/// Transitions of an accepting run up to acceptance or the first stack
/// move, whichever comes first: the labels of its writing phase.
pub fn writing_prefix(m: &MachineSpec, path: &[usize]) -> Vec<usize> {
    let stacks = m.stores_of_kind(StoreKind::CheckingStack);
    path.iter()
        .copied()
        .take_while(|&t| stacks.iter().all(|&s| m.transitions[t].instructions[s].is_write_phase()))
        .collect()
}

/// The instance label word for an accepting run of the source machine.
pub fn noread_label_word(inst: &TwoDcm1Instance, m: &MachineSpec, path: &[usize]) -> Option<Vec<usize>> {
    writing_prefix(m, path)
        .into_iter()
        .map(|t| inst.label_id(&format!("t{t}")))
        .collect()
}

/// Groups a writing prefix by input cell: the non-advancing transitions on
/// the cell, then the advancing one if any.
fn by_cell(m: &MachineSpec, prefix: &[usize]) -> Vec<(Vec<usize>, Option<usize>)> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for &t in prefix {
        if m.transitions[t].moves[0] == 1 {
            out.push((std::mem::take(&mut cur), Some(t)));
        } else {
            cur.push(t);
        }
    }
    if !cur.is_empty() {
        out.push((cur, None));
    }
    out
}

/// The intersection-instance label word for accepting runs of both
/// machines on the same word.
pub fn pair_label_word(
    inst: &TwoDcm1Instance,
    m1: &MachineSpec,
    path1: &[usize],
    m2: &MachineSpec,
    path2: &[usize],
) -> Option<Vec<usize>> {
    let g1 = by_cell(m1, &writing_prefix(m1, path1));
    let g2 = by_cell(m2, &writing_prefix(m2, path2));
    let mut names = Vec::new();
    for i in 0..g1.len().max(g2.len()) {
        let (st1, adv1) = g1.get(i).cloned().unwrap_or_default();
        let (st2, adv2) = g2.get(i).cloned().unwrap_or_default();
        names.extend(st1.iter().map(|t| format!("t{t}/$")));
        names.extend(st2.iter().map(|t| format!("$/t{t}")));
        match (adv1, adv2) {
            (Some(a), Some(b)) => names.push(format!("t{a}/t{b}")),
            (Some(a), None) => names.push(format!("t{a}/$")),
            (None, Some(b)) => names.push(format!("$/t{b}")),
            (None, None) => {}
        }
    }
    names.iter().map(|n| inst.label_id(n)).collect()
}

/// How far the first left-to-right pass gets on a label word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrefixStatus {
    Accepted,
    /// The pass reached `⊲`; extensions may still be accepted.
    Viable,
    Dead,
}

/// Runs the instance on `u` until its head first reaches `⊲`. Every
/// transition before that point moves right, so a dead prefix has no
/// accepted extension.
pub fn prefix_status(inst: &TwoDcm1Instance, u: &[usize]) -> PrefixStatus {
    let m = &inst.spec;
    let w: Vec<Letter> = u.iter().map(|&i| i as Letter).collect();
    let tape = m.tape(&w);
    let by_state = m.by_state();
    let mut c = m.initial_configuration();
    loop {
        if m.is_final(c.state) {
            return PrefixStatus::Accepted;
        }
        if c.heads[0] == tape.len() - 1 {
            return PrefixStatus::Viable;
        }
        match by_state[c.state].iter().find_map(|&i| fire(m, &tape, &c, &m.transitions[i])) {
            Some(n) => c = n,
            None => return PrefixStatus::Dead,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InstanceSearch {
    /// An accepted label word, as label indices.
    pub witness: Option<Vec<usize>>,
    /// Label words whose run exceeded the step bound.
    pub unresolved: usize,
    /// Viable prefixes examined.
    pub explored: usize,
    /// Whether every label word up to the length bound was settled.
    pub exhausted: bool,
}

/// Breadth-first search for an accepted label word of length at most
/// `max_len`, pruning prefixes whose first pass dies.
pub fn search_instance(inst: &TwoDcm1Instance, max_len: usize, max_prefixes: usize, max_steps: u64) -> InstanceSearch {
    let mut out = InstanceSearch {
        witness: None,
        unresolved: 0,
        explored: 0,
        exhausted: true,
    };
    let mut level: Vec<Vec<usize>> = vec![Vec::new()];
    for len in 0..=max_len {
        let mut next = Vec::new();
        for u in level {
            if out.explored >= max_prefixes {
                out.exhausted = false;
                return out;
            }
            out.explored += 1;
            let w: Vec<Letter> = u.iter().map(|&i| i as Letter).collect();
            match run_deterministic(&inst.spec, &w, max_steps) {
                Ok(r) if r.verdict == Verdict::Accept => {
                    out.witness = Some(u);
                    return out;
                }
                Ok(r) if r.verdict == Verdict::BoundExceeded => {
                    out.unresolved += 1;
                    out.exhausted = false;
                }
                _ => {}
            }
            if len == max_len {
                continue;
            }
            for l in 0..inst.labels.len() {
                let mut v = u.clone();
                v.push(l);
                if prefix_status(inst, &v) != PrefixStatus::Dead {
                    next.push(v);
                }
            }
        }
        level = next;
    }
    out
}

/// Source word of an instance witness for a single-machine instance.
pub fn instance_word(inst: &TwoDcm1Instance, m: &MachineSpec, labels: &[usize]) -> Vec<Letter> {
    let path: Vec<usize> = labels.iter().filter_map(|&i| inst.labels[i].first).collect();
    if inst.labels.iter().all(|l| l.second.is_none()) {
        word_of_path(m, &path)
    } else {
        inst.source_word(labels)
    }
}
