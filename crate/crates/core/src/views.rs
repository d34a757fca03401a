//! Input-free machine dynamics computed on demand. A view exposes the
//! transition function of a machine running on a fixed input, and views
//! compose: the word encoding, counter splitting and the normal form are
//! each a wrapper around an inner view. [`materialize`] turns any view into
//! an ordinary [`MachineSpec`].

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Debug;
use std::hash::Hash;

use crate::flow::SplitLayout;
use crate::machine::{InSym, Letter, MachineBuilder, MachineSpec, Mode, StateId, StoreDecl, Transition};
use crate::store::{Instruction, StoreKind, StoreSym, StoreTypeSpec};

/// A machine over the empty input whose single head rests on `⊲`.
pub trait Dynamics {
    type State: Clone + Eq + Hash + Debug;

    fn stores(&self) -> &[StoreDecl];
    fn initial(&self) -> Self::State;
    fn is_final(&self, q: &Self::State) -> bool;
    /// Every move available in `q` when the stores read `reads`.
    fn successors(&self, q: &Self::State, reads: &[StoreSym]) -> Vec<(Self::State, Vec<Instruction>)>;
    /// A name usable as a state token in the machine format.
    fn name(&self, q: &Self::State) -> String;

    /// Every move from `q`, with the store reads enabling it.
    fn edges(&self, q: &Self::State) -> Vec<(Vec<StoreSym>, Self::State, Vec<Instruction>)> {
        let mut out = Vec::new();
        for reads in read_tuples(self.stores()) {
            for (n, ins) in self.successors(q, &reads) {
                out.push((reads.clone(), n, ins));
            }
        }
        out
    }
}

/// All tuples of symbols the stores can show.
pub fn read_tuples(stores: &[StoreDecl]) -> Vec<Vec<StoreSym>> {
    let mut acc: Vec<Vec<StoreSym>> = vec![Vec::new()];
    for d in stores {
        let syms = d.spec.readable_symbols();
        acc = acc
            .into_iter()
            .flat_map(|v| {
                syms.iter().map(move |&s| {
                    let mut v = v.clone();
                    v.push(s);
                    v
                })
            })
            .collect();
    }
    acc
}

/// `m` running on a fixed word: states pair a control state with the head
/// positions. This is the word-encoding construction, computed lazily.
#[derive(Debug, Clone)]
pub struct LambdaView<'m> {
    m: &'m MachineSpec,
    tape: Vec<InSym>,
    by_state: Vec<Vec<usize>>,
}

impl<'m> LambdaView<'m> {
    pub fn new(m: &'m MachineSpec, w: &[Letter]) -> Self {
        LambdaView {
            m,
            tape: m.tape(w),
            by_state: m.by_state(),
        }
    }

    pub fn machine(&self) -> &MachineSpec {
        self.m
    }

    /// Transitions of the source machine enabled in `q`, with the heads they
    /// lead to.
    fn enabled(&self, q: &(StateId, Vec<usize>)) -> impl Iterator<Item = (&Transition, Vec<usize>)> + '_ {
        let heads = q.1.clone();
        self.by_state[q.0].iter().filter_map(move |&i| {
            let t = &self.m.transitions[i];
            let last = self.tape.len() as i64 - 1;
            let mut next = Vec::with_capacity(heads.len());
            for ((&h, &r), &mv) in heads.iter().zip(&t.reads).zip(&t.moves) {
                let p = h as i64 + mv as i64;
                if self.tape[h] != r || p < 0 || p > last {
                    return None;
                }
                next.push(p as usize);
            }
            Some((t, next))
        })
    }
}

impl Dynamics for LambdaView<'_> {
    type State = (StateId, Vec<usize>);

    fn stores(&self) -> &[StoreDecl] {
        &self.m.stores
    }

    fn initial(&self) -> Self::State {
        (self.m.initial, vec![1; self.m.heads])
    }

    fn is_final(&self, q: &Self::State) -> bool {
        self.m.is_final(q.0)
    }

    fn successors(&self, q: &Self::State, reads: &[StoreSym]) -> Vec<(Self::State, Vec<Instruction>)> {
        self.enabled(q)
            .filter(|(t, _)| t.store_reads == reads)
            .map(|(t, heads)| ((t.to, heads), t.instructions.clone()))
            .collect()
    }

    fn name(&self, q: &Self::State) -> String {
        let hs: Vec<String> = q.1.iter().map(usize::to_string).collect();
        format!("{}/{}", self.m.states[q.0], hs.join("."))
    }

    fn edges(&self, q: &Self::State) -> Vec<(Vec<StoreSym>, Self::State, Vec<Instruction>)> {
        self.enabled(q)
            .map(|(t, heads)| (t.store_reads.clone(), (t.to, heads), t.instructions.clone()))
            .collect()
    }
}

/// Every `rb_counter` replaced by 1-reversal counters; see [`SplitLayout`].
#[derive(Debug, Clone)]
pub struct SplitView<D> {
    inner: D,
    layout: SplitLayout,
}

impl<D: Dynamics> SplitView<D> {
    pub fn new(inner: D) -> Self {
        let layout = SplitLayout::new(inner.stores());
        SplitView { inner, layout }
    }
}

impl<D: Dynamics> Dynamics for SplitView<D> {
    type State = (D::State, Vec<u8>);

    fn stores(&self) -> &[StoreDecl] {
        &self.layout.stores
    }

    fn initial(&self) -> Self::State {
        (self.inner.initial(), self.layout.initial_phases())
    }

    fn is_final(&self, q: &Self::State) -> bool {
        self.inner.is_final(&q.0)
    }

    fn successors(&self, q: &Self::State, reads: &[StoreSym]) -> Vec<(Self::State, Vec<Instruction>)> {
        let inner_reads = self.layout.inner_reads(reads);
        self.inner
            .successors(&q.0, &inner_reads)
            .into_iter()
            .filter_map(|(n, ins)| {
                let (r, phys) = self.layout.map(&q.1, reads, &ins)?;
                Some(((n, r), phys))
            })
            .collect()
    }

    fn name(&self, q: &Self::State) -> String {
        let tags: Vec<String> = q.1.iter().map(u8::to_string).collect();
        format!("{}@{}", self.inner.name(&q.0), tags.join(","))
    }
}

/// Progress of the normal form's bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NormalMode {
    Run,
    Clean,
    Accept,
}

/// Per checking stack: in the writing phase, the last real symbol written
/// and whether padding lies above it; in the reading phase, the direction of
/// the last head move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StackPhase {
    Writing { real_top: StoreSym, padded: bool },
    Reading { down: bool },
}

/// The normal form of a machine whose stores are checking stacks and
/// 1-reversal counters:
/// - every writing-phase step pushes (a padding symbol `$` replaces `stay`,
///   and the reading phase steps over padding in its direction of travel);
/// - on reaching a final state, every counter is drained and every stack
///   head moved to `Z_b` before an accepting state is entered.
#[derive(Debug, Clone)]
pub struct NormalView<D> {
    inner: D,
    stores: Vec<StoreDecl>,
    stacks: Vec<usize>,
    /// Padding symbol id per store (meaningful for stacks).
    pad: Vec<StoreSym>,
}

pub const PAD_SYMBOL: &str = "$";

impl<D: Dynamics> NormalView<D> {
    pub fn new(inner: D) -> Self {
        let mut stores = inner.stores().to_vec();
        let mut stacks = Vec::new();
        let mut pad = vec![StoreSym::Bottom; stores.len()];
        for (i, d) in stores.iter_mut().enumerate() {
            if d.spec.kind == StoreKind::CheckingStack {
                let mut alphabet = d.spec.alphabet.clone();
                let mut name = PAD_SYMBOL.to_string();
                while alphabet.contains(&name) {
                    name.push('$');
                }
                alphabet.push(name);
                pad[i] = StoreSym::Sym(alphabet.len() as u16 - 1);
                d.spec = StoreTypeSpec::new(StoreKind::CheckingStack, 0, alphabet).expect("padding symbol is fresh");
                stacks.push(i);
            }
        }
        NormalView {
            inner,
            stores,
            stacks,
            pad,
        }
    }

    pub fn inner(&self) -> &D {
        &self.inner
    }

    fn is_stack(&self, i: usize) -> bool {
        self.stacks.contains(&i)
    }

    /// Drains counters and lowers stack heads; enters the accepting state
    /// once every store reads `Z_b`.
    fn cleanup(&self, q: &NState<D::State>, reads: &[StoreSym]) -> (NState<D::State>, Vec<Instruction>) {
        let done = reads.iter().all(|&r| r == StoreSym::Bottom);
        let ins: Vec<Instruction> = (0..reads.len())
            .map(|i| match (self.is_stack(i), reads[i] == StoreSym::Bottom) {
                (true, true) => Instruction::Hold,
                (true, false) => Instruction::Down,
                (false, true) => Instruction::Stay,
                (false, false) => Instruction::Pop,
            })
            .collect();
        let phases = q
            .phases
            .iter()
            .map(|_| StackPhase::Reading { down: true })
            .collect();
        let mode = if done { NormalMode::Accept } else { NormalMode::Clean };
        (
            NState {
                inner: q.inner.clone(),
                mode,
                phases,
            },
            ins,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NState<S> {
    pub inner: S,
    pub mode: NormalMode,
    /// One entry per checking stack, in store order.
    pub phases: Vec<StackPhase>,
}

impl<D: Dynamics> Dynamics for NormalView<D> {
    type State = NState<D::State>;

    fn stores(&self) -> &[StoreDecl] {
        &self.stores
    }

    fn initial(&self) -> Self::State {
        NState {
            inner: self.inner.initial(),
            mode: NormalMode::Run,
            phases: self
                .stacks
                .iter()
                .map(|_| StackPhase::Writing {
                    real_top: StoreSym::Bottom,
                    padded: false,
                })
                .collect(),
        }
    }

    fn is_final(&self, q: &Self::State) -> bool {
        q.mode == NormalMode::Accept
    }

    fn successors(&self, q: &Self::State, reads: &[StoreSym]) -> Vec<(Self::State, Vec<Instruction>)> {
        match q.mode {
            NormalMode::Accept => return vec![],
            NormalMode::Clean => return vec![self.cleanup(q, reads)],
            NormalMode::Run if self.inner.is_final(&q.inner) => return vec![self.cleanup(q, reads)],
            NormalMode::Run => {}
        }
        let n = reads.len();
        // A reading stack on padding keeps moving; the rest of the machine waits.
        let skipping: Vec<bool> = self
            .stacks
            .iter()
            .enumerate()
            .map(|(k, &s)| matches!(q.phases[k], StackPhase::Reading { .. }) && reads[s] == self.pad[s])
            .collect();
        if skipping.iter().any(|&b| b) {
            return vec![self.pause(q, |k| skipping[k], n)];
        }
        let mut virt = reads.to_vec();
        for (k, &s) in self.stacks.iter().enumerate() {
            if let StackPhase::Writing { real_top, .. } = q.phases[k] {
                virt[s] = real_top;
            }
        }
        let mut out: Vec<(Self::State, Vec<Instruction>)> = Vec::new();
        for (inner_next, ins) in self.inner.successors(&q.inner, &virt) {
            // Moves outside the stacks' instruction languages are dropped.
            let illegal = self.stacks.iter().enumerate().any(|(k, &s)| {
                ins[s] == Instruction::Pop
                    || (matches!(q.phases[k], StackPhase::Reading { .. }) && ins[s].is_write_phase())
            });
            if illegal {
                continue;
            }
            // A stack leaving the writing phase with padding on top first
            // moves down onto its last real symbol.
            let lower: Vec<bool> = self
                .stacks
                .iter()
                .enumerate()
                .map(|(k, &s)| {
                    matches!(q.phases[k], StackPhase::Writing { padded: true, .. }) && !ins[s].is_write_phase()
                })
                .collect();
            let succ = if lower.iter().any(|&b| b) {
                self.pause(q, |k| lower[k], n)
            } else {
                let mut phases = q.phases.clone();
                let mut phys = ins.clone();
                for (k, &s) in self.stacks.iter().enumerate() {
                    phases[k] = match (q.phases[k], ins[s]) {
                        (StackPhase::Writing { .. }, Instruction::Push(x)) => StackPhase::Writing {
                            real_top: StoreSym::Sym(x),
                            padded: false,
                        },
                        (StackPhase::Writing { real_top, .. }, Instruction::Stay) => {
                            phys[s] = pad_push(self.pad[s]);
                            StackPhase::Writing { real_top, padded: true }
                        }
                        (_, Instruction::Down) => StackPhase::Reading { down: true },
                        (_, Instruction::Up) => StackPhase::Reading { down: false },
                        (StackPhase::Reading { down }, _) => StackPhase::Reading { down },
                        (StackPhase::Writing { .. }, _) => StackPhase::Reading { down: true },
                    };
                }
                (
                    NState {
                        inner: inner_next,
                        mode: NormalMode::Run,
                        phases,
                    },
                    phys,
                )
            };
            if !out.contains(&succ) {
                out.push(succ);
            }
        }
        out
    }

    fn name(&self, q: &Self::State) -> String {
        let mut tag = String::new();
        for (k, &s) in self.stacks.iter().enumerate() {
            match q.phases[k] {
                StackPhase::Writing { real_top, padded } => {
                    tag.push('w');
                    tag.push_str(self.stores[s].spec.symbol_name(real_top));
                    if padded {
                        tag.push('$');
                    }
                }
                StackPhase::Reading { down: true } => tag.push_str("rd"),
                StackPhase::Reading { down: false } => tag.push_str("ru"),
            }
            tag.push(',');
        }
        tag.pop();
        let mode = match q.mode {
            NormalMode::Run => "",
            NormalMode::Clean => "!clean",
            NormalMode::Accept => "!accept",
        };
        format!("{}~{tag}{mode}", self.inner.name(&q.inner))
    }
}

fn pad_push(pad: StoreSym) -> Instruction {
    match pad {
        StoreSym::Sym(x) => Instruction::Push(x),
        _ => unreachable!("padding is an alphabet symbol"),
    }
}

impl<D: Dynamics> NormalView<D> {
    /// A step that leaves the inner machine where it is: the stacks selected
    /// by `moving` move (in their reading direction, or down when leaving the
    /// writing phase), other writing stacks push padding, other reading
    /// stacks hold, counters stay.
    fn pause(&self, q: &NState<D::State>, moving: impl Fn(usize) -> bool, n: usize) -> (NState<D::State>, Vec<Instruction>) {
        let mut ins = vec![Instruction::Stay; n];
        let mut phases = q.phases.clone();
        for (k, &s) in self.stacks.iter().enumerate() {
            let (i, p) = match (q.phases[k], moving(k)) {
                (StackPhase::Reading { down }, true) => {
                    (if down { Instruction::Down } else { Instruction::Up }, StackPhase::Reading { down })
                }
                (StackPhase::Writing { .. }, true) => (Instruction::Down, StackPhase::Reading { down: true }),
                (StackPhase::Reading { down }, false) => (Instruction::Hold, StackPhase::Reading { down }),
                (StackPhase::Writing { real_top, .. }, false) => {
                    (pad_push(self.pad[s]), StackPhase::Writing { real_top, padded: true })
                }
            };
            ins[s] = i;
            phases[k] = p;
        }
        (
            NState {
                inner: q.inner.clone(),
                mode: q.mode,
                phases,
            },
            ins,
        )
    }
}

/// The reachable part of a view as a one-way, one-head machine over the
/// empty input alphabet; every transition reads `⊲` and does not move.
pub fn materialize<D: Dynamics>(d: &D, name: &str) -> MachineSpec {
    let mut b = MachineBuilder::from_parts(name, Mode::OneWay, 1, Vec::new(), d.stores().to_vec());
    let mut ids: HashMap<D::State, StateId> = HashMap::new();
    let mut names: HashMap<String, usize> = HashMap::new();
    let mut intern = |b: &mut MachineBuilder, q: &D::State, ids: &mut HashMap<D::State, StateId>| -> (StateId, bool) {
        if let Some(&s) = ids.get(q) {
            return (s, false);
        }
        let mut name = d.name(q);
        let k = names.entry(name.clone()).or_insert(0);
        *k += 1;
        if *k > 1 {
            name = format!("{name}#{k}");
        }
        let s = b.state(&name);
        ids.insert(q.clone(), s);
        (s, true)
    };
    let start = d.initial();
    let (s0, _) = intern(&mut b, &start, &mut ids);
    let s0_name = b.spec().states[s0].clone();
    b.initial(&s0_name);
    let mut seen_transitions: HashSet<Transition> = HashSet::new();
    let mut queue = VecDeque::from([start]);
    while let Some(q) = queue.pop_front() {
        let from = ids[&q];
        if d.is_final(&q) {
            let n = b.spec().states[from].clone();
            b.final_state(&n);
        }
        for (reads, n, ins) in d.edges(&q) {
            let (to, fresh) = intern(&mut b, &n, &mut ids);
            if fresh {
                queue.push_back(n);
            }
            let t = Transition {
                from,
                reads: vec![InSym::Right],
                store_reads: reads,
                to,
                instructions: ins,
                moves: vec![0],
            };
            if seen_transitions.insert(t.clone()) {
                b.push_transition(t);
            }
        }
    }
    b.build()
}
