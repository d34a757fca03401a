//! Constructions between machine classes: label alphabets, input erasure,
//! restriction to the empty word, and simulation of two-way counter
//! machines on a checking stack.

use thiserror::Error;

use crate::machine::{InSym, Letter, MachineBuilder, MachineSpec, Mode, StoreDecl, Transition};
use crate::store::{Instruction, StoreSym, StoreTypeSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("construction needs a one-way machine")]
    TwoWay,
    #[error("construction needs a single input head, found {0}")]
    Heads(usize),
    #[error("store signature mismatch: {0}")]
    Signature(String),
    #[error("machine is nondeterministic")]
    Nondeterministic,
    #[error("invalid checking-stack trace: {0}")]
    InvalidTrace(String),
}

fn one_way_one_head(m: &MachineSpec) -> Result<(), TransformError> {
    if m.mode != Mode::OneWay {
        return Err(TransformError::TwoWay);
    }
    if m.heads != 1 {
        return Err(TransformError::Heads(m.heads));
    }
    Ok(())
}

/// Head status while a path is followed one transition at a time: on a
/// fresh cell, or parked on a symbol by a transition that did not advance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Head {
    Fresh,
    On(InSym),
}

fn head_name(m: &MachineSpec, h: Head) -> String {
    match h {
        Head::Fresh => "_".into(),
        Head::On(x) => m.in_sym_name(x).into(),
    }
}

/// Transitions that can fire in a one-way run: never on `⊳`, and on `⊲`
/// only without moving.
fn fireable(t: &Transition) -> bool {
    t.reads[0] != InSym::Left && (t.reads[0] != InSym::Right || t.moves[0] == 0)
}

fn admits(h: Head, x: InSym) -> bool {
    match h {
        Head::Fresh => true,
        Head::On(y) => x == y,
    }
}

fn after(t: &Transition) -> Head {
    if t.moves[0] == 1 {
        Head::Fresh
    } else {
        Head::On(t.reads[0])
    }
}

/// Explores `(state, head status)` pairs of a one-way machine, calling
/// `emit(builder, from, transition index, to)` for every admissible step.
fn head_product(
    m: &MachineSpec,
    name: &str,
    input: Vec<String>,
    mut emit: impl FnMut(&mut MachineBuilder, usize, usize, usize),
) -> MachineSpec {
    let mut b = MachineBuilder::from_parts(name, Mode::OneWay, 1, input, m.stores.clone());
    let by_state = m.by_state();
    let key_name = |q: usize, h: Head| format!("{}:{}", m.states[q], head_name(m, h));
    let mut keys = vec![(m.initial, Head::Fresh)];
    let s0 = b.state(&key_name(m.initial, Head::Fresh));
    b.initial(&key_name(m.initial, Head::Fresh));
    let mut ids = std::collections::HashMap::from([((m.initial, Head::Fresh), s0)]);
    let mut i = 0;
    while i < keys.len() {
        let (q, h) = keys[i];
        let from = ids[&(q, h)];
        if m.is_final(q) {
            b.final_state(&key_name(q, h));
        }
        for &ti in &by_state[q] {
            let t = &m.transitions[ti];
            if !fireable(t) || !admits(h, t.reads[0]) {
                continue;
            }
            let k = (t.to, after(t));
            let to = *ids.entry(k).or_insert_with(|| {
                keys.push(k);
                b.state(&key_name(k.0, k.1))
            });
            emit(&mut b, from, ti, to);
        }
        i += 1;
    }
    b.build()
}

/// A deterministic machine over the label alphabet `t0, t1, …` (one symbol
/// per transition of `m`, in table order). Reading `tᵢ` applies transition
/// `i`'s store instructions and moves right; consecutive labels must agree
/// on the input symbol whenever the earlier one did not advance. The output
/// accepts exactly the label sequences of accepting runs of `m`, so it is
/// empty iff `m` is. An accepting run may end with non-advancing labels.
pub fn label_determinize(m: &MachineSpec) -> Result<MachineSpec, TransformError> {
    one_way_one_head(m)?;
    let labels: Vec<String> = (0..m.transitions.len()).map(|i| format!("t{i}")).collect();
    Ok(head_product(m, &format!("{}_labels", m.name), labels, |b, from, ti, to| {
        let t = &m.transitions[ti];
        b.push_transition(Transition {
            from,
            reads: vec![InSym::Letter(ti as Letter)],
            store_reads: t.store_reads.clone(),
            to,
            instructions: t.instructions.clone(),
            moves: vec![1],
        });
    }))
}

/// [`erase_input`] together with the source transition of each output
/// transition.
pub fn erase_input_with_origin(m: &MachineSpec) -> Result<(MachineSpec, Vec<usize>), TransformError> {
    one_way_one_head(m)?;
    let mut origin = Vec::new();
    let spec = head_product(m, &format!("{}_erased", m.name), Vec::new(), |b, from, ti, to| {
        let t = &m.transitions[ti];
        b.push_transition(Transition {
            from,
            reads: vec![InSym::Right],
            store_reads: t.store_reads.clone(),
            to,
            instructions: t.instructions.clone(),
            moves: vec![0],
        });
        origin.push(ti);
    });
    Ok((spec, origin))
}

/// A machine over the empty input alphabet that guesses the input letters
/// of `m` in its finite control; it accepts `λ` iff `L(m) ≠ ∅`. Stores are
/// untouched.
pub fn erase_input(m: &MachineSpec) -> Result<MachineSpec, TransformError> {
    Ok(erase_input_with_origin(m)?.0)
}

/// `L(m) ∩ {λ}`: a fresh initial state proceeds to `m`'s initial state only
/// on the empty input, and letter-reading transitions are dropped.
pub fn restrict_to_lambda(m: &MachineSpec) -> Result<MachineSpec, TransformError> {
    if m.mode != Mode::OneWay {
        return Err(TransformError::TwoWay);
    }
    let mut b = MachineBuilder::from_parts(
        &format!("{}_lambda", m.name),
        m.mode,
        m.heads,
        m.input.clone(),
        m.stores.clone(),
    );
    for q in &m.states {
        b.state(q);
    }
    let mut start = "start".to_string();
    while b.has_state(&start) {
        start.push('\'');
    }
    let s = b.state(&start);
    b.initial(&start);
    for &f in &m.finals {
        b.final_state(&m.states[f]);
    }
    b.push_transition(Transition {
        from: s,
        reads: vec![InSym::Right; m.heads],
        store_reads: vec![StoreSym::Bottom; m.stores.len()],
        to: m.initial,
        instructions: vec![Instruction::Stay; m.stores.len()],
        moves: vec![0; m.heads],
    });
    for t in &m.transitions {
        if t.reads.iter().all(|r| !matches!(r, InSym::Letter(_))) {
            b.push_transition(t.clone());
        }
    }
    Ok(b.build())
}

fn check_counter_machine(m: &MachineSpec) -> Result<(), TransformError> {
    if m.heads != 1 {
        return Err(TransformError::Heads(m.heads));
    }
    if let Some(d) = m.stores.iter().find(|d| !d.spec.kind.is_counter()) {
        return Err(TransformError::Signature(format!("store {} is a {}", d.id, d.spec.kind)));
    }
    Ok(())
}

/// One-way machine with a checking stack `S` over `Σ` plus the counters of
/// `m`. It first puts a word on the stack (copying the input, or guessing
/// letters when `guess`), moves the stack head to the first cell, and then
/// runs `m` with the stack as its two-way input: `Z_b` stands for `⊳`, `Z_t`
/// for `⊲`, and head moves `-1/0/+1` become `D/S/U`.
fn stack_simulation(m: &MachineSpec, guess: bool, name: &str) -> MachineSpec {
    let letters: Vec<&str> = m.input.iter().map(String::as_str).collect();
    let stack = StoreTypeSpec::checking_stack(&letters).expect("input letters are valid stack symbols");
    let mut stores = vec![StoreDecl {
        id: "S".into(),
        spec: stack,
    }];
    stores.extend(m.stores.iter().cloned());
    let input = if guess { Vec::new() } else { m.input.clone() };
    let mut b = MachineBuilder::from_parts(name, Mode::OneWay, 1, input, stores);
    let sim = |q: usize| format!("sim:{}", m.states[q]);
    for q in 0..m.states.len() {
        b.state(&sim(q));
    }
    let copy = b.state(if guess { "GUESS" } else { "COPY" });
    let rewind = b.state("REWIND");
    let name_copy = b.spec().states[copy].clone();
    b.initial(&name_copy);
    if m.is_final(m.initial) {
        b.final_state(&name_copy);
    }
    for &f in &m.finals {
        b.final_state(&sim(f));
    }
    let n_counters = m.stores.len();
    let zero_reads = |y: StoreSym| {
        let mut v = vec![y];
        v.extend(std::iter::repeat_n(StoreSym::Bottom, n_counters));
        v
    };
    let with_counters = |x: Instruction| {
        let mut v = vec![x];
        v.extend(std::iter::repeat_n(Instruction::Stay, n_counters));
        v
    };
    let stack_syms: Vec<StoreSym> = std::iter::once(StoreSym::Bottom)
        .chain((0..letters.len()).map(|a| StoreSym::Sym(a as u16)))
        .collect();
    for a in 0..letters.len() {
        for &y in &stack_syms {
            b.push_transition(Transition {
                from: copy,
                reads: vec![if guess { InSym::Right } else { InSym::Letter(a as Letter) }],
                store_reads: zero_reads(y),
                to: copy,
                instructions: with_counters(Instruction::Push(a as u16)),
                moves: vec![if guess { 0 } else { 1 }],
            });
        }
    }
    let start = b.state(&sim(m.initial));
    for &y in &stack_syms {
        // An empty stack puts the simulated head straight on `Z_t`.
        let (to, ins) = if y == StoreSym::Bottom { (start, Instruction::Up) } else { (rewind, Instruction::Down) };
        b.push_transition(Transition {
            from: copy,
            reads: vec![InSym::Right],
            store_reads: zero_reads(y),
            to,
            instructions: with_counters(ins),
            moves: vec![0],
        });
        let (to, ins) = if y == StoreSym::Bottom { (start, Instruction::Up) } else { (rewind, Instruction::Down) };
        b.push_transition(Transition {
            from: rewind,
            reads: vec![InSym::Right],
            store_reads: zero_reads(y),
            to,
            instructions: with_counters(ins),
            moves: vec![0],
        });
    }
    for t in &m.transitions {
        let y = match t.reads[0] {
            InSym::Left => StoreSym::Bottom,
            InSym::Right => StoreSym::Top,
            InSym::Letter(a) => StoreSym::Sym(a),
        };
        let mv = match t.moves[0] {
            -1 => Instruction::Down,
            0 => Instruction::Hold,
            _ => Instruction::Up,
        };
        let mut store_reads = vec![y];
        store_reads.extend(&t.store_reads);
        let mut instructions = vec![mv];
        instructions.extend(&t.instructions);
        let (from, to) = (b.state(&sim(t.from)), b.state(&sim(t.to)));
        b.push_transition(Transition {
            from,
            reads: vec![InSym::Right],
            store_reads,
            to,
            instructions,
            moves: vec![0],
        });
    }
    b.build()
}

/// Converts a two-way one-head counter machine into a one-way machine with
/// one checking stack that copies its input onto the stack and runs the
/// two-way machine there. The result is no-read and never uses its counters
/// before `⊲`, and accepts the same language.
pub fn twoway_counter_to_csacm(m: &MachineSpec, nondet_allowed: bool) -> Result<MachineSpec, TransformError> {
    check_counter_machine(m)?;
    if !nondet_allowed && !m.is_deterministic() {
        return Err(TransformError::Nondeterministic);
    }
    Ok(stack_simulation(m, false, &format!("{}_csacm", m.name)))
}

/// From a two-way deterministic machine with two counters, a
/// nondeterministic machine over the empty input alphabet that guesses a
/// word onto its stack and runs the two-way machine on it. It accepts `λ`
/// iff `L(m) ≠ ∅`.
pub fn twodcm2_to_lambda_ncsacm(m: &MachineSpec) -> Result<MachineSpec, TransformError> {
    check_counter_machine(m)?;
    if m.mode != Mode::TwoWay {
        return Err(TransformError::Signature("expected a two-way machine".into()));
    }
    if m.stores.len() != 2 {
        return Err(TransformError::Signature(format!("expected two counters, found {}", m.stores.len())));
    }
    if !m.is_deterministic() {
        return Err(TransformError::Nondeterministic);
    }
    Ok(stack_simulation(m, true, &format!("{}_guess", m.name)))
}

/// Head positions of a checking-stack instruction trace, before each
/// instruction. Cell `0` is `Z_b`; the written cells are `1..=n`.
fn head_walk(trace: &[Instruction]) -> Result<Vec<usize>, TransformError> {
    let mut n = 0usize;
    let mut head = 0usize;
    let mut reading = false;
    let mut out = Vec::with_capacity(trace.len());
    for (i, &ins) in trace.iter().enumerate() {
        out.push(head);
        let bad = |msg: &str| Err(TransformError::InvalidTrace(format!("step {i}: {msg}")));
        match ins {
            Instruction::Push(_) if !reading => {
                n += 1;
                head = n;
            }
            Instruction::Stay if !reading => {}
            Instruction::Push(_) | Instruction::Stay => return bad("write after the reading phase began"),
            Instruction::Pop => return bad("pop on a checking stack"),
            Instruction::Down => {
                reading = true;
                if head == 0 {
                    return bad("D on Z_b");
                }
                head -= 1;
            }
            Instruction::Hold => reading = true,
            Instruction::Up => {
                reading = true;
                if head > n {
                    return bad("U on Z_t");
                }
                head += 1;
            }
        }
    }
    Ok(out)
}

/// Reading-phase head moves across the boundary between cells `boundary`
/// and `boundary + 1`: a `D` from cell `p` crosses boundary `p - 1`, a `U`
/// from cell `p` crosses boundary `p`.
pub fn crossing_count(trace: &[Instruction], boundary: usize) -> Result<u64, TransformError> {
    let walk = head_walk(trace)?;
    Ok(trace
        .iter()
        .zip(&walk)
        .filter(|&(&ins, &p)| match ins {
            Instruction::Down => p == boundary + 1,
            Instruction::Up => p == boundary,
            _ => false,
        })
        .count() as u64)
}

/// Crossings per boundary `0..=n`, where `n` is the number of written cells.
pub fn crossing_profile(trace: &[Instruction]) -> Result<Vec<u64>, TransformError> {
    let walk = head_walk(trace)?;
    let n = trace.iter().filter(|i| matches!(i, Instruction::Push(_))).count();
    let mut out = vec![0u64; n + 1];
    for (&ins, &p) in trace.iter().zip(&walk) {
        match ins {
            Instruction::Down => out[p - 1] += 1,
            Instruction::Up => out[p] += 1,
            _ => {}
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Instruction::*;

    #[test]
    fn crossings_of_a_short_trace() {
        let t = [Push(0), Push(0), Down, Up];
        assert_eq!(crossing_count(&t, 1).unwrap(), 2);
        assert_eq!(crossing_count(&t, 0).unwrap(), 0);
        assert_eq!(crossing_profile(&t).unwrap(), vec![0, 2, 0]);
        assert!(crossing_count(&[Down, Push(0)], 0).is_err());
        assert_eq!(crossing_profile(&[Push(0), Stay]).unwrap(), vec![0, 0]);
    }
}
