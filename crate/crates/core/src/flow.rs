//! Decision procedures for one-way reversal-bounded multicounter machines:
//! splitting counters into 1-reversal counters, the Parikh flow system of
//! the resulting mode graph, an exact integer feasibility solver and witness
//! extraction.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::lp::{solve_lp, LpOutcome, Row, Sense};
use crate::machine::{fire, InSym, Letter, MachineBuilder, MachineSpec, Mode, StateId, StoreDecl, Transition};
use crate::sim::Trace;
use crate::store::{Instruction, StoreKind, StoreSym, StoreTypeSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RbcError {
    #[error("not a one-way reversal-bounded counter machine: {0}")]
    NotNcm(String),
    #[error("resource budget exceeded: {0}")]
    Resource(String),
}

/// Checks the NCM signature: one-way, one head, every store an `rb_counter`.
pub fn check_ncm(m: &MachineSpec) -> Result<(), RbcError> {
    if m.mode != Mode::OneWay {
        return Err(RbcError::NotNcm("machine is two-way".into()));
    }
    if m.heads != 1 {
        return Err(RbcError::NotNcm(format!("machine has {} heads", m.heads)));
    }
    if let Some(d) = m.stores.iter().find(|d| d.spec.kind != StoreKind::RbCounter) {
        return Err(RbcError::NotNcm(format!("store {} is a {}", d.id, d.spec.kind)));
    }
    Ok(())
}

/// Where an original store lives after splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Slot {
    Keep(usize),
    Split { first: usize, count: usize, bound: u32 },
}

/// Replaces every `rb_counter` with bound `l` by `⌈(l+1)/2⌉` 1-reversal
/// counters. Up-phase `j` of the original counter increments physical
/// counter `j`; a decrement takes the highest-index nonzero physical counter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct SplitLayout {
    pub slots: Vec<Slot>,
    pub stores: Vec<StoreDecl>,
}

impl SplitLayout {
    pub fn new(stores: &[StoreDecl]) -> Self {
        let mut slots = Vec::new();
        let mut out = Vec::new();
        for d in stores {
            if d.spec.kind == StoreKind::RbCounter {
                let count = (d.spec.reversal_bound as usize + 2) / 2;
                slots.push(Slot::Split {
                    first: out.len(),
                    count,
                    bound: d.spec.reversal_bound,
                });
                for j in 0..count {
                    out.push(StoreDecl {
                        id: if count == 1 { d.id.clone() } else { format!("{}.{j}", d.id) },
                        spec: StoreTypeSpec::rb_counter(1).expect("bound 1 is valid"),
                    });
                }
            } else {
                slots.push(Slot::Keep(out.len()));
                out.push(d.clone());
            }
        }
        SplitLayout { slots, stores: out }
    }

    /// Reversals used so far, per original store.
    pub fn initial_phases(&self) -> Vec<u8> {
        vec![0; self.slots.len()]
    }

    pub fn inner_reads(&self, phys: &[StoreSym]) -> Vec<StoreSym> {
        self.slots
            .iter()
            .map(|s| match *s {
                Slot::Keep(i) => phys[i],
                Slot::Split { first, count, .. } => {
                    if phys[first..first + count].iter().any(|&r| r != StoreSym::Bottom) {
                        StoreSym::Sym(0)
                    } else {
                        StoreSym::Bottom
                    }
                }
            })
            .collect()
    }

    /// Physical instructions for one original instruction tuple, or `None`
    /// when the original move would exceed its reversal bound or is
    /// undefined.
    pub fn map(&self, r: &[u8], phys: &[StoreSym], ins: &[Instruction]) -> Option<(Vec<u8>, Vec<Instruction>)> {
        let mut out = vec![Instruction::Stay; self.stores.len()];
        let mut nr = r.to_vec();
        for (i, s) in self.slots.iter().enumerate() {
            match *s {
                Slot::Keep(p) => out[p] = ins[i],
                Slot::Split { first, count, bound } => {
                    let up = r[i].is_multiple_of(2);
                    match ins[i] {
                        Instruction::Stay => {}
                        Instruction::Push(_) => {
                            let k = if up { r[i] } else { r[i] + 1 };
                            let j = (k / 2) as usize;
                            if k as u32 > bound || j >= count {
                                return None;
                            }
                            nr[i] = k;
                            out[first + j] = Instruction::Push(0);
                        }
                        Instruction::Pop => {
                            let k = if up { r[i] + 1 } else { r[i] };
                            if k as u32 > bound {
                                return None;
                            }
                            let j = (0..count).rev().find(|&j| phys[first + j] != StoreSym::Bottom)?;
                            nr[i] = k;
                            out[first + j] = Instruction::Pop;
                        }
                        _ => return None,
                    }
                }
            }
        }
        Some((nr, out))
    }

    /// Physical read tuples consistent with the original reads; only counters
    /// already started in phase `r` may be nonzero.
    pub fn phys_patterns(&self, r: &[u8], inner: &[StoreSym]) -> Vec<Vec<StoreSym>> {
        let mut acc: Vec<Vec<StoreSym>> = vec![Vec::with_capacity(self.stores.len())];
        for (i, s) in self.slots.iter().enumerate() {
            match *s {
                Slot::Keep(_) => acc.iter_mut().for_each(|v| v.push(inner[i])),
                Slot::Split { count, .. } => {
                    let active = ((r[i] / 2) as usize + 1).min(count);
                    let options: Vec<Vec<StoreSym>> = if inner[i] == StoreSym::Bottom {
                        vec![vec![StoreSym::Bottom; count]]
                    } else {
                        (1u32..(1 << active))
                            .map(|mask| {
                                (0..count)
                                    .map(|j| {
                                        if j < active && mask & (1 << j) != 0 {
                                            StoreSym::Sym(0)
                                        } else {
                                            StoreSym::Bottom
                                        }
                                    })
                                    .collect()
                            })
                            .collect()
                    };
                    acc = acc
                        .into_iter()
                        .flat_map(|v| {
                            options.iter().map(move |o| {
                                let mut v = v.clone();
                                v.extend_from_slice(o);
                                v
                            })
                        })
                        .collect();
                }
            }
        }
        acc
    }
}

/// A split machine together with the source transition of each of its
/// transitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseAutomaton {
    pub spec: MachineSpec,
    pub origin: Vec<usize>,
}

fn phase_name(q: &str, r: &[u8]) -> String {
    let tags: Vec<String> = r.iter().map(u8::to_string).collect();
    format!("{q}@{}", tags.join(","))
}

/// Language-equivalent machine in which every counter is 1-reversal. Works
/// for any store mix; stores other than `rb_counter` are kept.
pub fn split_counters(m: &MachineSpec) -> PhaseAutomaton {
    let layout = SplitLayout::new(&m.stores);
    let mut b = MachineBuilder::from_parts(&m.name, m.mode, m.heads, m.input.clone(), layout.stores.clone());
    let by_state = m.by_state();
    let start = (m.initial, layout.initial_phases());
    let mut ids: HashMap<(StateId, Vec<u8>), StateId> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut origin = Vec::new();
    let name0 = phase_name(&m.states[start.0], &start.1);
    ids.insert(start.clone(), b.state(&name0));
    b.initial(&name0);
    queue.push_back(start);
    while let Some((q, r)) = queue.pop_front() {
        let from = ids[&(q, r.clone())];
        if m.is_final(q) {
            let n = phase_name(&m.states[q], &r);
            b.final_state(&n);
        }
        for &ti in &by_state[q] {
            let t = &m.transitions[ti];
            for phys in layout.phys_patterns(&r, &t.store_reads) {
                let Some((nr, ins)) = layout.map(&r, &phys, &t.instructions) else { continue };
                let key = (t.to, nr);
                let to = match ids.get(&key) {
                    Some(&s) => s,
                    None => {
                        let s = b.state(&phase_name(&m.states[t.to], &key.1));
                        ids.insert(key.clone(), s);
                        queue.push_back(key);
                        s
                    }
                };
                b.push_transition(Transition {
                    from,
                    reads: t.reads.clone(),
                    store_reads: phys,
                    to,
                    instructions: ins,
                    moves: t.moves.clone(),
                });
                origin.push(ti);
            }
        }
    }
    PhaseAutomaton { spec: b.build(), origin }
}

/// Splits the counters of an NCM into 1-reversal counters.
pub fn to_phase_automaton(m: &MachineSpec) -> Result<MachineSpec, RbcError> {
    check_ncm(m)?;
    Ok(split_counters(m).spec)
}

/// Per-counter mode of a 1-reversal counter along a path: `A` increasing at
/// zero, `B` increasing and positive, `C` decreasing and positive, `E`
/// decreasing at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CounterMode {
    A,
    B,
    C,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Head {
    Fresh,
    On(InSym),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct PNode {
    q: StateId,
    modes: Vec<CounterMode>,
    head: Head,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct PEdge {
    from: usize,
    to: usize,
    transition: usize,
    delta: Vec<i64>,
}

/// The finite mode graph of a 1-reversal NCM: nodes track the state, each
/// counter's mode and whether the input head sits on a symbol already read.
#[derive(Debug, Clone)]
struct ProductGraph {
    nodes: Vec<PNode>,
    edges: Vec<PEdge>,
    accepting: Vec<usize>,
}

fn product_graph(m: &MachineSpec) -> ProductGraph {
    let k = m.stores.len();
    let by_state = m.by_state();
    let start = PNode {
        q: m.initial,
        modes: vec![CounterMode::A; k],
        head: Head::Fresh,
    };
    let mut ids: HashMap<PNode, usize> = HashMap::from([(start.clone(), 0)]);
    let mut nodes = vec![start];
    let mut edges = Vec::new();
    let mut i = 0;
    while i < nodes.len() {
        let node = nodes[i].clone();
        for &ti in &by_state[node.q] {
            let t = &m.transitions[ti];
            let x = t.reads[0];
            let head = match (node.head, x) {
                (_, InSym::Left) => continue,
                (Head::On(y), x) if y != x => continue,
                (_, InSym::Right) if t.moves[0] != 0 => continue,
                (_, x) if t.moves[0] == 0 => Head::On(x),
                _ => Head::Fresh,
            };
            // Each counter contributes one or two successor modes.
            let mut options: Vec<(Vec<CounterMode>, Vec<i64>)> = vec![(Vec::new(), Vec::new())];
            for c in 0..k {
                let mode = node.modes[c];
                let zero = matches!(mode, CounterMode::A | CounterMode::E);
                if (t.store_reads[c] == StoreSym::Bottom) != zero {
                    options.clear();
                    break;
                }
                let succ: &[(CounterMode, i64)] = match (t.instructions[c], mode) {
                    (Instruction::Stay, _) => &[],
                    (Instruction::Push(_), CounterMode::A | CounterMode::B) => &[(CounterMode::B, 1)],
                    (Instruction::Pop, CounterMode::B | CounterMode::C) => {
                        &[(CounterMode::C, -1), (CounterMode::E, -1)]
                    }
                    _ => {
                        options.clear();
                        break;
                    }
                };
                let succ: Vec<(CounterMode, i64)> = if succ.is_empty() { vec![(mode, 0)] } else { succ.to_vec() };
                options = options
                    .into_iter()
                    .flat_map(|(ms, ds)| {
                        succ.iter().map(move |&(md, d)| {
                            let mut ms = ms.clone();
                            let mut ds = ds.clone();
                            ms.push(md);
                            ds.push(d);
                            (ms, ds)
                        })
                    })
                    .collect();
            }
            for (modes, delta) in options {
                let n = PNode { q: t.to, modes, head };
                let to = match ids.get(&n) {
                    Some(&j) => j,
                    None => {
                        ids.insert(n.clone(), nodes.len());
                        nodes.push(n);
                        nodes.len() - 1
                    }
                };
                edges.push(PEdge {
                    from: i,
                    to,
                    transition: ti,
                    delta,
                });
            }
        }
        i += 1;
    }
    let accepting = (0..nodes.len()).filter(|&v| m.is_final(nodes[v].q)).collect();
    ProductGraph { nodes, edges, accepting }
}

/// A variable's arc in the flow network and the product edges it stands for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    /// Transitions of the 1-reversal machine traversed by one unit of flow.
    pub transitions: Vec<usize>,
}

/// Integer feasibility instance. When `network` is present, a feasible
/// solution must also be connected: every arc carrying flow is reachable
/// from `source` through arcs carrying flow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowSystem {
    pub n_vars: usize,
    pub rows: Vec<Row>,
    pub network: Option<FlowNetwork>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowNetwork {
    pub n_nodes: usize,
    pub source: usize,
    pub sink: usize,
    /// One arc per variable.
    pub arcs: Vec<Arc>,
    pub final_modes: Vec<CounterMode>,
}

impl FlowSystem {
    pub fn plain(n_vars: usize, rows: Vec<Row>) -> Self {
        FlowSystem {
            n_vars,
            rows,
            network: None,
        }
    }

    /// One constraint per line, e.g. `x0 + x2 - x5 = 0`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let mut terms = String::new();
            for (i, &(v, c)) in r.coeffs.iter().enumerate() {
                let sign = match (i, c < 0) {
                    (0, true) => "-",
                    (0, false) => "",
                    (_, true) => " - ",
                    (_, false) => " + ",
                };
                let mag = c.unsigned_abs();
                if mag == 1 {
                    let _ = write!(terms, "{sign}x{v}");
                } else {
                    let _ = write!(terms, "{sign}{mag}·x{v}");
                }
            }
            if terms.is_empty() {
                terms.push('0');
            }
            let op = match r.sense {
                Sense::Eq => "=",
                Sense::Ge => ">=",
                Sense::Le => "<=",
            };
            let _ = writeln!(out, "{terms} {op} {}", r.rhs);
        }
        out
    }
}

fn reach(n: usize, arcs: &[(usize, usize)], from: &[usize], forward: bool) -> Vec<bool> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in arcs {
        if forward {
            adj[u].push(v);
        } else {
            adj[v].push(u);
        }
    }
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = from.to_vec();
    for &s in from {
        seen[s] = true;
    }
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// One flow system per final mode vector, in a deterministic order. With
/// `end_zero`, only final modes with every counter at zero are kept.
pub fn build_flow_systems(m: &MachineSpec, end_zero: bool) -> Result<Vec<FlowSystem>, RbcError> {
    check_ncm(m)?;
    if m.stores.iter().any(|d| d.spec.reversal_bound != 1) {
        return Err(RbcError::NotNcm("counters must be 1-reversal; split first".into()));
    }
    Ok(flow_systems_of(&product_graph(m), m.stores.len(), end_zero))
}

fn flow_systems_of(g: &ProductGraph, k: usize, end_zero: bool) -> Vec<FlowSystem> {
    let mut by_modes: BTreeMap<Vec<CounterMode>, Vec<usize>> = BTreeMap::new();
    for &v in &g.accepting {
        let modes = g.nodes[v].modes.clone();
        if end_zero && modes.iter().any(|&md| !matches!(md, CounterMode::A | CounterMode::E)) {
            continue;
        }
        by_modes.entry(modes).or_default().push(v);
    }
    let pairs: Vec<(usize, usize)> = g.edges.iter().map(|e| (e.from, e.to)).collect();
    let n = g.nodes.len();
    let fwd = reach(n, &pairs, &[0], true);
    let mut out = Vec::new();
    for (modes, targets) in by_modes {
        let back = reach(n, &pairs, &targets, false);
        let live: Vec<bool> = (0..n).map(|v| fwd[v] && back[v]).collect();
        if !live[0] {
            continue;
        }
        // Contract chains of nodes with a single in-arc and a single out-arc.
        let mut arcs: Vec<(usize, usize, Vec<usize>, Vec<i64>)> = g
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| live[e.from] && live[e.to])
            .map(|(i, e)| (e.from, e.to, vec![i], e.delta.clone()))
            .collect();
        let protected = |v: usize| v == 0 || targets.contains(&v);
        loop {
            let mut indeg = vec![0usize; n];
            let mut outdeg = vec![0usize; n];
            for a in &arcs {
                outdeg[a.0] += 1;
                indeg[a.1] += 1;
            }
            let cand = (0..n).find(|&v| {
                live[v] && !protected(v) && indeg[v] == 1 && outdeg[v] == 1 && !arcs.iter().any(|a| a.0 == v && a.1 == v)
            });
            let Some(v) = cand else { break };
            let i_in = arcs.iter().position(|a| a.1 == v).expect("in-arc");
            let i_out = arcs.iter().position(|a| a.0 == v).expect("out-arc");
            let out_arc = arcs[i_out].clone();
            let a = &mut arcs[i_in];
            a.1 = out_arc.1;
            a.2.extend(out_arc.2);
            for (d, e) in a.3.iter_mut().zip(&out_arc.3) {
                *d += e;
            }
            arcs.remove(i_out);
        }
        // Renumber nodes; the super-sink comes last.
        let mut index = vec![usize::MAX; n];
        let mut n_nodes = 0;
        for v in 0..n {
            if live[v] && (v == 0 || arcs.iter().any(|a| a.0 == v || a.1 == v) || targets.contains(&v)) {
                index[v] = n_nodes;
                n_nodes += 1;
            }
        }
        let sink = n_nodes;
        n_nodes += 1;
        let mut net_arcs: Vec<Arc> = arcs
            .iter()
            .map(|a| Arc {
                from: index[a.0],
                to: index[a.1],
                transitions: a.2.iter().map(|&e| g.edges[e].transition).collect(),
            })
            .collect();
        let mut deltas: Vec<Vec<i64>> = arcs.iter().map(|a| a.3.clone()).collect();
        for &t in &targets {
            net_arcs.push(Arc {
                from: index[t],
                to: sink,
                transitions: vec![],
            });
            deltas.push(vec![0; k]);
        }
        let n_vars = net_arcs.len();
        let mut rows = Vec::new();
        for v in 0..n_nodes {
            let mut coeffs: BTreeMap<usize, i64> = BTreeMap::new();
            for (j, a) in net_arcs.iter().enumerate() {
                if a.to == v {
                    *coeffs.entry(j).or_default() += 1;
                }
                if a.from == v {
                    *coeffs.entry(j).or_default() -= 1;
                }
            }
            let rhs = if v == index[0] {
                -1
            } else if v == sink {
                1
            } else {
                0
            };
            rows.push(Row::new(coeffs.into_iter().filter(|&(_, c)| c != 0).collect(), Sense::Eq, rhs));
        }
        for (c, md) in modes.iter().enumerate() {
            let coeffs: Vec<(usize, i64)> = deltas
                .iter()
                .enumerate()
                .filter(|(_, d)| d[c] != 0)
                .map(|(j, d)| (j, d[c]))
                .collect();
            match md {
                CounterMode::C => rows.push(Row::new(coeffs, Sense::Ge, 1)),
                CounterMode::E => rows.push(Row::new(coeffs, Sense::Eq, 0)),
                CounterMode::A | CounterMode::B => {}
            }
        }
        out.push(FlowSystem {
            n_vars,
            rows,
            network: Some(FlowNetwork {
                n_nodes,
                source: index[0],
                sink,
                arcs: net_arcs,
                final_modes: modes,
            }),
        });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveBudget {
    /// Maximum number of branch-and-bound nodes.
    pub max_nodes: usize,
    /// Maximum number of variables.
    pub max_vars: usize,
}

impl Default for SolveBudget {
    fn default() -> Self {
        SolveBudget {
            max_nodes: 20_000,
            max_vars: 4_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowSolution {
    Feasible(Vec<u64>),
    Infeasible,
}

/// A-priori bound on some solution's entries: `n·(m·a)^(2m+1)` for `m` rows
/// and coefficient magnitude `a`.
pub fn solution_bound(fs: &FlowSystem) -> BigInt {
    let m = fs.rows.len() + fs.n_vars;
    let a = fs
        .rows
        .iter()
        .flat_map(|r| r.coeffs.iter().map(|c| c.1.unsigned_abs()).chain([r.rhs.unsigned_abs()]))
        .max()
        .unwrap_or(1)
        .max(1);
    let base = BigInt::from(m as u64) * BigInt::from(a);
    BigInt::from(fs.n_vars.max(1) as u64) * num_traits::pow(base, 2 * m + 1)
}

/// Exact feasibility over nonnegative integers by branch and bound on an
/// exact LP relaxation, with cut branching for connectivity.
pub fn solve_flow(fs: &FlowSystem, budget: &SolveBudget) -> Result<FlowSolution, RbcError> {
    if fs.n_vars > budget.max_vars {
        return Err(RbcError::Resource(format!(
            "flow system has {} variables (budget {})",
            fs.n_vars, budget.max_vars
        )));
    }
    let bound = solution_bound(fs);
    let cost = vec![1i64; fs.n_vars];
    let mut stack: Vec<Vec<Row>> = vec![Vec::new()];
    let mut explored = 0usize;
    while let Some(extra) = stack.pop() {
        explored += 1;
        if explored > budget.max_nodes {
            return Err(RbcError::Resource(format!(
                "branch and bound exceeded {} nodes",
                budget.max_nodes
            )));
        }
        let rows: Vec<Row> = fs.rows.iter().chain(&extra).cloned().collect();
        let x = match solve_lp(fs.n_vars, &rows, &cost) {
            LpOutcome::Infeasible => continue,
            LpOutcome::Optimal(x) => x,
        };
        if let Some(j) = x.iter().position(|v| !v.is_integer()) {
            let fl = x[j].floor().to_integer();
            let ce = &fl + BigInt::one();
            if ce <= bound {
                let mut up = extra.clone();
                up.push(Row::new(vec![(j, 1)], Sense::Ge, to_i64(&ce)?));
                stack.push(up);
            }
            let mut down = extra;
            down.push(Row::new(vec![(j, 1)], Sense::Le, to_i64(&fl)?));
            stack.push(down);
            continue;
        }
        let xi: Vec<u64> = x
            .iter()
            .map(|v| u64::try_from(v.to_integer()).map_err(|_| RbcError::Resource("solution entry overflow".into())))
            .collect::<Result<_, _>>()?;
        let Some(net) = &fs.network else {
            return Ok(FlowSolution::Feasible(xi));
        };
        match disconnected(net, &xi) {
            None => return Ok(FlowSolution::Feasible(xi)),
            Some((e, entering)) => {
                let mut with = extra.clone();
                with.push(Row::new(vec![(e, 1)], Sense::Ge, 1));
                with.push(Row::new(entering.into_iter().map(|j| (j, 1)).collect(), Sense::Ge, 1));
                stack.push(with);
                let mut without = extra;
                without.push(Row::new(vec![(e, 1)], Sense::Le, 0));
                stack.push(without);
            }
        }
    }
    Ok(FlowSolution::Infeasible)
}

fn to_i64(v: &BigInt) -> Result<i64, RbcError> {
    i64::try_from(v).map_err(|_| RbcError::Resource("branching bound overflow".into()))
}

/// For a support not reachable from the source: an arc in the unreached part
/// and every arc entering that part from outside.
fn disconnected(net: &FlowNetwork, x: &[u64]) -> Option<(usize, Vec<usize>)> {
    let support: Vec<(usize, usize)> = net
        .arcs
        .iter()
        .zip(x)
        .filter(|(_, &v)| v > 0)
        .map(|(a, _)| (a.from, a.to))
        .collect();
    let seen = reach(net.n_nodes, &support, &[net.source], true);
    let e = (0..net.arcs.len()).find(|&j| x[j] > 0 && !seen[net.arcs[j].from])?;
    let entering = (0..net.arcs.len())
        .filter(|&j| seen[net.arcs[j].from] && !seen[net.arcs[j].to])
        .collect();
    Some((e, entering))
}

/// Euler trail from source to sink over the arc multiset given by `x`,
/// always leaving a node by its lowest-index unused arc.
fn euler_trail(net: &FlowNetwork, x: &[u64]) -> Vec<usize> {
    let mut remaining: Vec<u64> = x.to_vec();
    let mut out_arcs: Vec<Vec<usize>> = vec![Vec::new(); net.n_nodes];
    for (j, a) in net.arcs.iter().enumerate() {
        out_arcs[a.from].push(j);
    }
    let mut next_idx = vec![0usize; net.n_nodes];
    let mut stack: Vec<(usize, Option<usize>)> = vec![(net.source, None)];
    let mut trail = Vec::new();
    while let Some(&(v, via)) = stack.last() {
        let arcs = &out_arcs[v];
        while next_idx[v] < arcs.len() && remaining[arcs[next_idx[v]]] == 0 {
            next_idx[v] += 1;
        }
        if next_idx[v] < arcs.len() {
            let j = arcs[next_idx[v]];
            remaining[j] -= 1;
            stack.push((net.arcs[j].to, Some(j)));
        } else {
            stack.pop();
            if let Some(j) = via {
                trail.push(j);
            }
        }
    }
    trail.reverse();
    trail
}

/// Input word consumed along a transition path of a one-way machine; a
/// symbol under the head when the path ends is included.
pub fn word_of_path(m: &MachineSpec, path: &[usize]) -> Vec<Letter> {
    let mut word = Vec::new();
    let mut pending = None;
    for &ti in path {
        let t = &m.transitions[ti];
        let x = match t.reads[0] {
            InSym::Letter(a) => Some(a),
            _ => None,
        };
        if t.moves[0] == 1 {
            word.extend(x);
            pending = None;
        } else {
            pending = x;
        }
    }
    word.extend(pending);
    word
}

/// Fires `path` on `w` from the initial configuration.
pub fn replay(m: &MachineSpec, w: &[Letter], path: &[usize]) -> Option<Trace> {
    let tape = m.tape(w);
    let initial = m.initial_configuration();
    let mut cur = initial.clone();
    let mut steps = Vec::new();
    for &ti in path {
        cur = fire(m, &tape, &cur, &m.transitions[ti])?;
        steps.push((ti, cur.clone()));
    }
    Some(Trace { initial, steps })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub word: Vec<Letter>,
    /// Transition indices of the source machine.
    pub path: Vec<usize>,
    pub trace: Trace,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmptinessVerdict {
    Empty,
    Nonempty(Witness),
}

impl EmptinessVerdict {
    pub fn is_empty(&self) -> bool {
        matches!(self, EmptinessVerdict::Empty)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EmptinessOptions {
    /// Also require every counter to be zero on acceptance.
    pub end_zero: bool,
    pub budget: SolveBudget,
}

/// Decides `L(m) = ∅` for an NCM.
pub fn ncm_emptiness(m: &MachineSpec) -> Result<EmptinessVerdict, RbcError> {
    ncm_emptiness_with(m, &EmptinessOptions::default())
}

pub fn ncm_emptiness_with(m: &MachineSpec, opts: &EmptinessOptions) -> Result<EmptinessVerdict, RbcError> {
    check_ncm(m)?;
    if m.finals.is_empty() {
        return Ok(EmptinessVerdict::Empty);
    }
    let pa = split_counters(m);
    let g = product_graph(&pa.spec);
    for fs in flow_systems_of(&g, pa.spec.stores.len(), opts.end_zero) {
        let FlowSolution::Feasible(x) = solve_flow(&fs, &opts.budget)? else { continue };
        let net = fs.network.as_ref().expect("graph systems carry a network");
        let split_path: Vec<usize> = euler_trail(net, &x)
            .into_iter()
            .flat_map(|j| net.arcs[j].transitions.clone())
            .collect();
        let path: Vec<usize> = split_path.iter().map(|&t| pa.origin[t]).collect();
        let word = word_of_path(m, &path);
        let trace = replay(m, &word, &path)
            .filter(|tr| m.is_final(tr.last().state) && tr.is_valid(m))
            .expect("flow witness replays to an accepting run");
        return Ok(EmptinessVerdict::Nonempty(Witness { word, path, trace }));
    }
    Ok(EmptinessVerdict::Empty)
}

/// Decides `w ∈ L(m)` for an NCM via the word-encoding construction and
/// emptiness.
pub fn ncm_membership(m: &MachineSpec, w: &[Letter]) -> Result<bool, RbcError> {
    check_ncm(m)?;
    let mw = crate::csa::make_lambda_machine(m, w);
    Ok(!ncm_emptiness(&mw)?.is_empty())
}
