//! Bounded exact execution: deterministic runs, breadth-first search over
//! configurations and bounded language enumeration.

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::machine::{fire, instruction_traces, Configuration, InSym, Letter, MachineSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Accept,
    Reject,
    BoundExceeded,
}

/// An accepting computation: the initial configuration followed by one
/// `(transition index, configuration)` pair per step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub initial: Configuration,
    pub steps: Vec<(usize, Configuration)>,
}

impl Trace {
    pub fn transitions(&self) -> Vec<usize> {
        self.steps.iter().map(|(t, _)| *t).collect()
    }

    pub fn last(&self) -> &Configuration {
        self.steps.last().map_or(&self.initial, |(_, c)| c)
    }

    /// Whether every store's instruction sequence lies in its instruction
    /// language.
    pub fn is_valid(&self, m: &MachineSpec) -> bool {
        instruction_traces(m, &self.transitions())
            .iter()
            .zip(&m.stores)
            .all(|(tr, d)| d.spec.validate_trace(tr))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub verdict: Verdict,
    /// Present exactly when the verdict is `Accept`.
    pub trace: Option<Trace>,
    pub steps_used: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("machine is not deterministic")]
    Nondeterministic,
}

/// Acceptance condition. The literal condition only asks for a final state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Acceptance {
    pub require_input_consumed: bool,
}

impl Acceptance {
    pub fn accepts(&self, m: &MachineSpec, tape: &[InSym], c: &Configuration) -> bool {
        m.is_final(c.state)
            && (!self.require_input_consumed || c.heads.iter().all(|&h| h == tape.len() - 1))
    }
}

/// A deterministic machine prepared for repeated runs.
#[derive(Debug, Clone)]
pub struct DetRunner<'m> {
    m: &'m MachineSpec,
    by_state: Vec<Vec<usize>>,
    pub acceptance: Acceptance,
}

impl<'m> DetRunner<'m> {
    pub fn new(m: &'m MachineSpec) -> Result<Self, SimError> {
        if !m.is_deterministic() {
            return Err(SimError::Nondeterministic);
        }
        Ok(DetRunner {
            m,
            by_state: m.by_state(),
            acceptance: Acceptance::default(),
        })
    }

    fn successor(&self, tape: &[InSym], c: &Configuration) -> Option<(Configuration, usize)> {
        self.by_state[c.state]
            .iter()
            .find_map(|&i| fire(self.m, tape, c, &self.m.transitions[i]).map(|n| (n, i)))
    }

    pub fn run(&self, w: &[Letter], max_steps: u64, keep_trace: bool) -> RunResult {
        let tape = self.m.tape(w);
        let initial = self.m.initial_configuration();
        let mut cur = initial.clone();
        let mut steps = Vec::new();
        let mut used = 0;
        loop {
            if self.acceptance.accepts(self.m, &tape, &cur) {
                return RunResult {
                    verdict: Verdict::Accept,
                    trace: Some(Trace { initial, steps }),
                    steps_used: used,
                };
            }
            if used >= max_steps {
                return RunResult {
                    verdict: Verdict::BoundExceeded,
                    trace: None,
                    steps_used: used,
                };
            }
            match self.successor(&tape, &cur) {
                None => {
                    return RunResult {
                        verdict: Verdict::Reject,
                        trace: None,
                        steps_used: used,
                    }
                }
                Some((next, t)) => {
                    used += 1;
                    if keep_trace {
                        steps.push((t, next.clone()));
                    }
                    cur = next;
                }
            }
        }
    }
}

/// Runs the unique computation of a deterministic machine for at most
/// `max_steps` transitions.
pub fn run_deterministic(m: &MachineSpec, w: &[Letter], max_steps: u64) -> Result<RunResult, SimError> {
    run_deterministic_with(m, w, max_steps, Acceptance::default())
}

pub fn run_deterministic_with(
    m: &MachineSpec,
    w: &[Letter],
    max_steps: u64,
    acceptance: Acceptance,
) -> Result<RunResult, SimError> {
    let mut r = DetRunner::new(m)?;
    r.acceptance = acceptance;
    Ok(r.run(w, max_steps, true))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Maximum BFS depth, counted in transitions.
    pub max_steps: u64,
    /// Configurations with a counter above this value are not expanded.
    pub max_counter: Option<u64>,
    /// Stop after this many distinct configurations.
    pub max_configs: Option<usize>,
    pub acceptance: Acceptance,
}

impl SearchOptions {
    pub fn depth(max_steps: u64) -> Self {
        SearchOptions {
            max_steps,
            max_counter: None,
            max_configs: None,
            acceptance: Acceptance::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchResult {
    Accept(Trace),
    Unknown,
}

impl SearchResult {
    pub fn is_accept(&self) -> bool {
        matches!(self, SearchResult::Accept(_))
    }

    pub fn trace(&self) -> Option<&Trace> {
        match self {
            SearchResult::Accept(t) => Some(t),
            SearchResult::Unknown => None,
        }
    }
}

/// Breadth-first search over configurations reachable on `w`; configurations
/// are never revisited.
pub fn accepts_bounded(m: &MachineSpec, w: &[Letter], max_steps: u64) -> SearchResult {
    accepts_bounded_with(m, w, &SearchOptions::depth(max_steps))
}

pub fn accepts_bounded_with(m: &MachineSpec, w: &[Letter], opts: &SearchOptions) -> SearchResult {
    match bounded_search(m, w, opts) {
        BoundedOutcome::Accept(t) => SearchResult::Accept(t),
        _ => SearchResult::Unknown,
    }
}

/// Result of a bounded search that also reports whether the search space
/// was exhausted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundedOutcome {
    Accept(Trace),
    /// Every reachable configuration was expanded without acceptance.
    Reject,
    /// Some configuration was cut off by a bound.
    Unknown,
}

pub fn bounded_search(m: &MachineSpec, w: &[Letter], opts: &SearchOptions) -> BoundedOutcome {
    let tape = m.tape(w);
    let mut truncated = false;
    let by_state = m.by_state();
    let initial = m.initial_configuration();
    // Node: configuration, parent index, transition, depth.
    let mut nodes: Vec<(Configuration, usize, usize, u64)> = vec![(initial.clone(), usize::MAX, 0, 0)];
    let mut seen: HashMap<Configuration, ()> = HashMap::new();
    seen.insert(initial, ());
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let (c, _, _, depth) = &nodes[i];
        if opts.acceptance.accepts(m, &tape, c) {
            return BoundedOutcome::Accept(rebuild(&nodes, i));
        }
        let depth = *depth;
        let succ: Vec<(Configuration, usize)> = by_state[c.state]
            .iter()
            .filter_map(|&t| fire(m, &tape, c, &m.transitions[t]).map(|n| (n, t)))
            .collect();
        if depth >= opts.max_steps {
            truncated |= !succ.is_empty();
            continue;
        }
        for (n, t) in succ {
            if let Some(cap) = opts.max_counter {
                if n.stores.iter().any(|s| s.counter_value().is_some_and(|v| v > cap)) {
                    truncated = true;
                    continue;
                }
            }
            if seen.contains_key(&n) {
                continue;
            }
            if opts.max_configs.is_some_and(|cap| seen.len() >= cap) {
                return BoundedOutcome::Unknown;
            }
            seen.insert(n.clone(), ());
            nodes.push((n, i, t, depth + 1));
            queue.push_back(nodes.len() - 1);
        }
    }
    if truncated {
        BoundedOutcome::Unknown
    } else {
        BoundedOutcome::Reject
    }
}

fn rebuild(nodes: &[(Configuration, usize, usize, u64)], mut i: usize) -> Trace {
    let mut steps = Vec::new();
    while nodes[i].1 != usize::MAX {
        steps.push((nodes[i].2, nodes[i].0.clone()));
        i = nodes[i].1;
    }
    steps.reverse();
    Trace {
        initial: nodes[0].0.clone(),
        steps,
    }
}

/// All words over `Σ` of length at most `max_len`, shortest first and
/// lexicographic by letter index within a length.
pub fn words_up_to(alphabet: usize, max_len: usize) -> impl Iterator<Item = Vec<Letter>> {
    (0..=max_len).flat_map(move |len| WordsOfLen::new(alphabet, len))
}

struct WordsOfLen {
    alphabet: usize,
    next: Option<Vec<Letter>>,
}

impl WordsOfLen {
    fn new(alphabet: usize, len: usize) -> Self {
        WordsOfLen {
            alphabet,
            next: (len == 0 || alphabet > 0).then(|| vec![0; len]),
        }
    }
}

impl Iterator for WordsOfLen {
    type Item = Vec<Letter>;

    fn next(&mut self) -> Option<Vec<Letter>> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        let mut i = succ.len();
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            if (succ[i] as usize) + 1 < self.alphabet {
                succ[i] += 1;
                self.next = Some(succ);
                break;
            }
            succ[i] = 0;
        }
        Some(cur)
    }
}

/// `{ w : |w| ≤ max_len, accepts_bounded(m, w, max_steps) = Accept }`.
pub fn enumerate_accepted(m: &MachineSpec, max_len: usize, max_steps: u64) -> BTreeSet<Vec<Letter>> {
    enumerate_accepted_with(m, max_len, &SearchOptions::depth(max_steps))
}

pub fn enumerate_accepted_with(
    m: &MachineSpec,
    max_len: usize,
    opts: &SearchOptions,
) -> BTreeSet<Vec<Letter>> {
    if m.finals.is_empty() {
        return BTreeSet::new();
    }
    words_up_to(m.input.len(), max_len)
        .filter(|w| accepts_bounded_with(m, w, opts).is_accept())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_enumeration_counts() {
        assert_eq!(words_up_to(2, 3).count(), 1 + 2 + 4 + 8);
        assert_eq!(words_up_to(0, 3).count(), 1);
        let ws: Vec<_> = words_up_to(2, 2).collect();
        assert_eq!(ws[0], Vec::<Letter>::new());
        assert_eq!(ws[3], vec![0, 0]);
        assert_eq!(ws[6], vec![1, 1]);
    }
}
