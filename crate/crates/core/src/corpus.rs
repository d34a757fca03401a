//! Reference machines, definitional language oracles and a seeded random
//! machine generator.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::machine::{InSym, MachineBuilder, MachineSpec, Mode, StoreDecl, Transition};
use crate::store::{Instruction, StoreKind, StoreSym, StoreTypeSpec};

/// Builds a transition table from `from read.. | sreads.. -> to | ins.. | moves..`
/// rows, one per line.
fn table(mut b: MachineBuilder, initial: &str, finals: &[&str], rows: &str) -> MachineSpec {
    b.initial(initial);
    for row in rows.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let (lhs, rhs) = row.split_once("->").expect("row has ->");
        let l: Vec<&str> = lhs.split('|').map(str::trim).collect();
        let r: Vec<&str> = rhs.split('|').map(str::trim).collect();
        fn words(s: &str) -> Vec<&str> {
            s.split_whitespace().collect()
        }
        let moves: Vec<i8> = words(r[2])
            .iter()
            .map(|m| m.trim_start_matches('+').parse::<i8>().expect("move"))
            .collect();
        let head = words(l[0]);
        b.trans(head[0], &head[1..], &words(l[1]), r[0], &words(r[1]), &moves)
            .expect("corpus row is well-formed");
    }
    for f in finals {
        b.final_state(f);
    }
    b.build()
}

/// `{ (aⁿ#)ⁿ : n ≥ 1 }`. The stack holds the first segment; the counter
/// holds the number of segments still to come.
pub fn example1_machine() -> MachineSpec {
    let b = MachineBuilder::new("example1", Mode::OneWay, 1, &["a", "#"])
        .store("T", StoreTypeSpec::checking_stack(&["a"]).unwrap())
        .store("C", StoreTypeSpec::rb_counter(1).unwrap());
    table(
        b,
        "q0",
        &["qf"],
        "q0 a | Zb Zb -> q1 | push:a push:c | +1
         q1 a | a c -> q1 | push:a push:c | +1
         q1 # | a c -> qd0 | S pop | +1
         qd0 a | a c -> qd | D stay | +1
         qd a | a c -> qd | D stay | +1
         qd # | Zb c -> qu0 | U pop | +1
         qu0 a | a c -> qu | U stay | +1
         qu a | a c -> qu | U stay | +1
         qu # | Zt c -> qd0 | D pop | +1
         qd0 > | a Zb -> qf | S stay | 0
         qu0 > | a Zb -> qf | S stay | 0",
    )
}

/// `{ aⁱ bʲ cᵏ : i, j ≥ 1, k = i·j }`. The stack holds `aⁱ`; every full sweep
/// of the stack during the `c` block consumes one unit of the counter.
pub fn example2_machine() -> MachineSpec {
    let b = MachineBuilder::new("example2", Mode::OneWay, 1, &["a", "b", "c"])
        .store("T", StoreTypeSpec::checking_stack(&["a"]).unwrap())
        .store("C", StoreTypeSpec::rb_counter(1).unwrap());
    table(
        b,
        "p0",
        &["pf"],
        "p0 a | Zb Zb -> p1 | push:a stay | +1
         p1 a | a Zb -> p1 | push:a stay | +1
         p1 b | a Zb -> p2 | stay push:c | +1
         p2 b | a c -> p2 | stay push:c | +1
         p2 c | a c -> p3 | D stay | +1
         p3 c | a c -> p3 | D stay | +1
         p3 c | Zb c -> p4 | U pop | 0
         p4 c | a c -> p4 | U stay | +1
         p4 c | Zt c -> p3 | D pop | 0
         p3 > | Zb c -> p5 | S pop | 0
         p4 > | Zt c -> p5 | S pop | 0
         p5 > | Zb Zb -> pf | S stay | 0
         p5 > | Zt Zb -> pf | S stay | 0",
    )
}

/// Two checking stacks, no counters: `{ aⁿbⁿcⁿ : n ≥ 1 }`.
pub fn anbncn_two_stack_machine() -> MachineSpec {
    let b = MachineBuilder::new("anbncn_2stack", Mode::OneWay, 1, &["a", "b", "c"])
        .store("S1", StoreTypeSpec::checking_stack(&["a"]).unwrap())
        .store("S2", StoreTypeSpec::checking_stack(&["b"]).unwrap());
    table(
        b,
        "s0",
        &["sf"],
        "s0 a | Zb Zb -> s1 | push:a stay | +1
         s1 a | a Zb -> s1 | push:a stay | +1
         s1 b | a Zb -> s2 | D push:b | +1
         s2 b | a b -> s2 | D push:b | +1
         s2 c | Zb b -> s3 | S D | +1
         s3 c | Zb b -> s3 | S D | +1
         s3 > | Zb Zb -> sf | S S | 0",
    )
}

/// Two-way, one 1-reversal counter: `{ aⁿbⁿ : n ≥ 1 }`. Checks `a⁺b⁺`
/// left to right, returns to `⊳`, then counts.
pub fn anbn_2dcm1_machine() -> MachineSpec {
    let b = MachineBuilder::new("anbn_2dcm1", Mode::TwoWay, 1, &["a", "b"])
        .store("C", StoreTypeSpec::rb_counter(1).unwrap());
    table(
        b,
        "c0",
        &["cf"],
        "c0 a | Zb -> c1 | stay | +1
         c1 a | Zb -> c1 | stay | +1
         c1 b | Zb -> c2 | stay | +1
         c2 b | Zb -> c2 | stay | +1
         c2 > | Zb -> c3 | stay | -1
         c3 a | Zb -> c3 | stay | -1
         c3 b | Zb -> c3 | stay | -1
         c3 < | Zb -> c4 | stay | +1
         c4 a | Zb -> c4 | push:c | +1
         c4 a | c -> c4 | push:c | +1
         c4 b | c -> c5 | pop | +1
         c5 b | c -> c5 | pop | +1
         c5 > | Zb -> cf | stay | 0",
    )
}

/// Two-way, two 1-reversal counters: `{ aⁿbⁿ : n ≥ 1 }`. Counts `a` and `b`
/// separately, then drains both together at `⊲`.
pub fn anbn_2dcm2_machine() -> MachineSpec {
    let b = MachineBuilder::new("anbn_2dcm2", Mode::TwoWay, 1, &["a", "b"])
        .store("A", StoreTypeSpec::rb_counter(1).unwrap())
        .store("B", StoreTypeSpec::rb_counter(1).unwrap());
    table(
        b,
        "d0",
        &["df"],
        "d0 a | Zb Zb -> d1 | push:c stay | +1
         d1 a | c Zb -> d1 | push:c stay | +1
         d1 b | c Zb -> d2 | stay push:c | +1
         d2 b | c c -> d2 | stay push:c | +1
         d2 > | c c -> d3 | pop pop | 0
         d3 > | c c -> d3 | pop pop | 0
         d3 > | Zb Zb -> df | stay stay | 0",
    )
}

/// One-way, one 1-reversal counter: `{ aⁿbⁿ : n ≥ 1 }`.
pub fn anbn_ncm_machine() -> MachineSpec {
    let b = MachineBuilder::new("anbn_ncm", Mode::OneWay, 1, &["a", "b"])
        .store("C", StoreTypeSpec::rb_counter(1).unwrap());
    table(
        b,
        "n0",
        &["nf"],
        "n0 a | Zb -> n1 | push:c | +1
         n1 a | c -> n1 | push:c | +1
         n1 b | c -> n2 | pop | +1
         n2 b | c -> n2 | pop | +1
         n2 > | Zb -> nf | stay | 0",
    )
}

/// Increments once, then demands a zero counter: the language is empty.
pub fn ncm_inc_then_zero_machine() -> MachineSpec {
    let b = MachineBuilder::new("ncm_inc_then_zero", Mode::OneWay, 1, &["a"])
        .store("C", StoreTypeSpec::rb_counter(1).unwrap());
    table(
        b,
        "z0",
        &["zf"],
        "z0 a | Zb -> z1 | push:c | +1
         z1 > | Zb -> zf | stay | 0",
    )
}

/// No-read DCSACM(1): `{ aⁱbʲ : i ≥ 1, 0 ≤ j ≤ i }`. Copies `aⁱ` and counts
/// `b`s; the stack is only read at `⊲`, sweeping down once per counted `b`.
pub fn noread_machine() -> MachineSpec {
    let b = MachineBuilder::new("noread_dcsacm1", Mode::OneWay, 1, &["a", "b"])
        .store("T", StoreTypeSpec::checking_stack(&["a"]).unwrap())
        .store("C", StoreTypeSpec::rb_counter(1).unwrap());
    table(
        b,
        "r0",
        &["rf"],
        "r0 a | Zb Zb -> r1 | push:a stay | +1
         r1 a | a Zb -> r1 | push:a stay | +1
         r1 b | a Zb -> r2 | stay push:c | +1
         r2 b | a c -> r2 | stay push:c | +1
         r1 > | a Zb -> rf | S stay | 0
         r2 > | a c -> r3 | D pop | 0
         r3 > | a c -> r3 | D pop | 0
         r3 > | a Zb -> rf | S stay | 0
         r3 > | Zb Zb -> rf | S stay | 0",
    )
}

#[derive(Debug, Clone, Copy)]
pub struct CorpusEntry {
    pub file: &'static str,
    pub build: fn() -> MachineSpec,
    pub text: &'static str,
    /// Definitional oracle, when the language has one.
    pub language: Option<&'static str>,
}

/// The committed corpus, in index order.
pub fn corpus() -> Vec<CorpusEntry> {
    vec![
        CorpusEntry {
            file: "example1.machine",
            build: example1_machine,
            text: include_str!("../corpus/example1.machine"),
            language: Some("example1"),
        },
        CorpusEntry {
            file: "example2.machine",
            build: example2_machine,
            text: include_str!("../corpus/example2.machine"),
            language: Some("example2"),
        },
        CorpusEntry {
            file: "anbncn_2stack.machine",
            build: anbncn_two_stack_machine,
            text: include_str!("../corpus/anbncn_2stack.machine"),
            language: Some("anbncn"),
        },
        CorpusEntry {
            file: "anbn_2dcm1.machine",
            build: anbn_2dcm1_machine,
            text: include_str!("../corpus/anbn_2dcm1.machine"),
            language: Some("anbn"),
        },
        CorpusEntry {
            file: "anbn_2dcm2.machine",
            build: anbn_2dcm2_machine,
            text: include_str!("../corpus/anbn_2dcm2.machine"),
            language: Some("anbn"),
        },
        CorpusEntry {
            file: "anbn_ncm.machine",
            build: anbn_ncm_machine,
            text: include_str!("../corpus/anbn_ncm.machine"),
            language: Some("anbn"),
        },
        CorpusEntry {
            file: "ncm_inc_then_zero.machine",
            build: ncm_inc_then_zero_machine,
            text: include_str!("../corpus/ncm_inc_then_zero.machine"),
            language: Some("empty"),
        },
        CorpusEntry {
            file: "noread_dcsacm1.machine",
            build: noread_machine,
            text: include_str!("../corpus/noread_dcsacm1.machine"),
            language: Some("aibj_j_le_i"),
        },
        CorpusEntry {
            file: "ncsacm_guess.machine",
            build: ncsacm_guess_machine,
            text: include_str!("../corpus/ncsacm_guess.machine"),
            language: None,
        },
    ]
}

/// The guessing machine obtained from [`anbn_2dcm2_machine`]: it accepts `λ`
/// iff that machine's language is nonempty.
pub fn ncsacm_guess_machine() -> MachineSpec {
    let mut m = crate::transforms::twodcm2_to_lambda_ncsacm(&anbn_2dcm2_machine())
        .expect("corpus machine has the 2DCM(2) signature");
    m.name = "ncsacm_guess".into();
    m
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown language id {0:?}")]
pub struct UnknownLanguage(pub String);

pub const LANGUAGE_IDS: &[&str] = &["example1", "example2", "anbn", "anbncn", "aibj_j_le_i", "empty"];

/// Direct arithmetic check of a language's defining condition. Words are
/// strings of one-character letters.
pub fn oracle_membership(language_id: &str, w: &str) -> Result<bool, UnknownLanguage> {
    let runs = runs(w);
    Ok(match language_id {
        "example1" => {
            let segs: Vec<&str> = w.split_terminator('#').collect();
            let n = segs.len();
            w.ends_with('#')
                && n >= 1
                && segs.iter().all(|s| s.len() == n && s.bytes().all(|c| c == b'a'))
        }
        "example2" => match runs.as_slice() {
            [('a', i), ('b', j), ('c', k)] => i * j == *k,
            _ => false,
        },
        "anbn" => matches!(runs.as_slice(), [('a', i), ('b', j)] if i == j),
        "anbncn" => matches!(runs.as_slice(), [('a', i), ('b', j), ('c', k)] if i == j && j == k),
        "aibj_j_le_i" => match runs.as_slice() {
            [('a', _)] => true,
            [('a', i), ('b', j)] => j <= i,
            _ => false,
        },
        "empty" => false,
        other => return Err(UnknownLanguage(other.to_string())),
    })
}

/// Maximal blocks of equal characters.
fn runs(w: &str) -> Vec<(char, usize)> {
    let mut out: Vec<(char, usize)> = Vec::new();
    for c in w.chars() {
        match out.last_mut() {
            Some((d, n)) if *d == c => *n += 1,
            _ => out.push((c, 1)),
        }
    }
    out
}

/// Parameters of [`random_machine`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomProfile {
    pub mode: Mode,
    pub max_states: usize,
    pub max_transitions: usize,
    pub alphabet_size: usize,
    pub checking_stacks: usize,
    pub stack_alphabet_size: usize,
    pub counters: usize,
    pub reversal_bound: u32,
    pub deterministic: bool,
    /// No stack-reading instruction on transitions that read a letter.
    pub no_read: bool,
}

impl RandomProfile {
    /// Deterministic one-way machine with one checking stack and `k`
    /// counters.
    pub fn dcsacm(counters: usize) -> Self {
        RandomProfile {
            mode: Mode::OneWay,
            max_states: 3,
            max_transitions: 10,
            alphabet_size: 2,
            checking_stacks: 1,
            stack_alphabet_size: 2,
            counters,
            reversal_bound: 1,
            deterministic: true,
            no_read: false,
        }
    }

    /// Nondeterministic one-way counter machine.
    pub fn ncm(counters: usize, reversal_bound: u32) -> Self {
        RandomProfile {
            mode: Mode::OneWay,
            max_states: 4,
            max_transitions: 10,
            alphabet_size: 2,
            checking_stacks: 0,
            stack_alphabet_size: 0,
            counters,
            reversal_bound,
            deterministic: false,
            no_read: false,
        }
    }

    /// Deterministic no-read machine with one checking stack and one counter.
    pub fn noread_dcsacm1() -> Self {
        RandomProfile {
            no_read: true,
            ..RandomProfile::dcsacm(1)
        }
    }

    /// Nondeterministic one-way machine with one checking stack and `k`
    /// counters.
    pub fn ncsacm(counters: usize) -> Self {
        RandomProfile {
            deterministic: false,
            ..RandomProfile::dcsacm(counters)
        }
    }

    /// Deterministic two-way counter machine.
    pub fn twodcm(counters: usize) -> Self {
        RandomProfile {
            mode: Mode::TwoWay,
            max_states: 4,
            max_transitions: 12,
            alphabet_size: 2,
            checking_stacks: 0,
            stack_alphabet_size: 0,
            counters,
            reversal_bound: 1,
            deterministic: true,
            no_read: false,
        }
    }
}

const STACK_SYMBOLS: &[&str] = &["x", "y", "z", "w"];
const INPUT_SYMBOLS: &[&str] = &["a", "b", "c", "d"];

/// A pseudo-random machine, identical for identical `(seed, profile)`.
pub fn random_machine(seed: u64, profile: &RandomProfile) -> MachineSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let input: Vec<String> = INPUT_SYMBOLS[..profile.alphabet_size.min(INPUT_SYMBOLS.len())]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut stores = Vec::new();
    for i in 0..profile.checking_stacks {
        let gamma = &STACK_SYMBOLS[..profile.stack_alphabet_size.clamp(1, STACK_SYMBOLS.len())];
        stores.push(StoreDecl {
            id: format!("T{i}"),
            spec: StoreTypeSpec::checking_stack(gamma).unwrap(),
        });
    }
    for i in 0..profile.counters {
        let l = rng.gen_range(1..=profile.reversal_bound.max(1));
        stores.push(StoreDecl {
            id: format!("C{i}"),
            spec: StoreTypeSpec::rb_counter(l).unwrap(),
        });
    }
    let mut b = MachineBuilder::from_parts(
        &format!("random{seed}"),
        profile.mode,
        1,
        input.clone(),
        stores.clone(),
    );
    let n_states = rng.gen_range(1..=profile.max_states.max(1));
    let names: Vec<String> = (0..n_states).map(|i| format!("q{i}")).collect();
    for n in &names {
        b.state(n);
    }
    b.initial("q0");
    for n in &names {
        if rng.gen_bool(0.4) {
            b.final_state(n);
        }
    }
    let n_trans = rng.gen_range(1..=profile.max_transitions.max(1));
    let mut attempts = 0;
    let mut added = 0;
    while added < n_trans && attempts < n_trans * 10 {
        attempts += 1;
        let t = random_transition(&mut rng, profile, n_states, input.len(), &stores);
        if profile.deterministic
            && b.spec().transitions.iter().any(|u| {
                u.from == t.from && u.reads == t.reads && u.store_reads == t.store_reads
            })
        {
            continue;
        }
        if b.spec().transitions.contains(&t) {
            continue;
        }
        b.push_transition(t);
        added += 1;
    }
    b.build()
}

fn random_transition(
    rng: &mut ChaCha8Rng,
    profile: &RandomProfile,
    n_states: usize,
    n_letters: usize,
    stores: &[StoreDecl],
) -> Transition {
    let from = rng.gen_range(0..n_states);
    let to = rng.gen_range(0..n_states);
    let two_way = profile.mode == Mode::TwoWay;
    let read = {
        let k = rng.gen_range(0..n_letters + if two_way { 2 } else { 1 });
        match k {
            k if k < n_letters => InSym::Letter(k as u16),
            k if k == n_letters => InSym::Right,
            _ => InSym::Left,
        }
    };
    let mv: i8 = match (read, two_way) {
        (InSym::Right, false) => 0,
        (InSym::Right, true) => *[-1i8, 0].choose(rng).unwrap(),
        (InSym::Left, _) => *[0i8, 1].choose(rng).unwrap(),
        (_, false) => {
            if rng.gen_bool(0.8) {
                1
            } else {
                0
            }
        }
        (_, true) => *[-1i8, 0, 1, 1].choose(rng).unwrap(),
    };
    let mut store_reads = Vec::new();
    let mut instructions = Vec::new();
    for d in stores {
        let (r, ins) = match d.spec.kind {
            StoreKind::CheckingStack => {
                let g = d.spec.alphabet.len() as u16;
                let r = match rng.gen_range(0..g + 2) {
                    k if k < g => StoreSym::Sym(k),
                    k if k == g => StoreSym::Bottom,
                    _ => StoreSym::Top,
                };
                let reading_allowed = !(profile.no_read && read != InSym::Right);
                let mut options = vec![Instruction::Stay];
                if r != StoreSym::Top {
                    options.extend((0..g).map(Instruction::Push));
                }
                if reading_allowed {
                    options.push(Instruction::Hold);
                    if r != StoreSym::Bottom {
                        options.push(Instruction::Down);
                    }
                    if r != StoreSym::Top {
                        options.push(Instruction::Up);
                    }
                }
                (r, *options.choose(rng).unwrap())
            }
            _ => {
                if rng.gen_bool(0.5) {
                    (
                        StoreSym::Bottom,
                        *[Instruction::Push(0), Instruction::Stay].choose(rng).unwrap(),
                    )
                } else {
                    (
                        StoreSym::Sym(0),
                        *[Instruction::Push(0), Instruction::Pop, Instruction::Stay]
                            .choose(rng)
                            .unwrap(),
                    )
                }
            }
        };
        store_reads.push(r);
        instructions.push(ins);
    }
    Transition {
        from,
        reads: vec![read],
        store_reads,
        to,
        instructions,
        moves: vec![mv],
    }
}
