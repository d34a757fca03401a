//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints its own PASS/FAIL line; the process fails if any
//! criterion does.

// Tolerances are pinned constants, and a tolerance of zero makes the
// comparisons trivially true for unsigned counts.
#![allow(clippy::absurd_extreme_comparisons)]

mod common;

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use csacm::corpus::{self, oracle_membership, random_machine, RandomProfile};
use csacm::csa::{
    decide_lambda_dcsacm, decide_membership_dcsacm, decide_membership_kstack, detect_infinite_writing,
    instance_word, intersection_emptiness_reduction, make_lambda_machine, noread_dcsacm1_to_2dcm1,
    noread_label_word, normalize_dcsacm, pair_label_word, search_instance, Engine, TwoDcm1Instance,
};
use csacm::flow::{ncm_emptiness, word_of_path, EmptinessVerdict};
use csacm::machine::{classify_restrictions, step, Letter, MachineBuilder, MachineSpec, Mode, Restriction};
use csacm::sim::{bounded_search, run_deterministic, words_up_to, BoundedOutcome, SearchOptions, Trace, Verdict};
use csacm::store::StoreTypeSpec;
use csacm::transforms::{erase_input_with_origin, label_determinize, restrict_to_lambda, twoway_counter_to_csacm};

use common::{find_witness, nontrivial, replays_to_accept, search_opts, spell, traces_independently_valid};

/// Pinned tolerances and sizes.
const C1_MAX_LEN: usize = 12;
const C1_TIME_LIMIT: Duration = Duration::from_secs(60);
const C2_MAX_LEN: usize = 10;
const C3_PAIRS: usize = 200;
const C3_RUN_STEPS: u64 = 100_000;
const C4_MACHINES: usize = 100;
const C4_MIN_HAND_INFINITE: usize = 10;
const C5_MACHINES: usize = 200;
const C5_MAX_LEN: usize = 8;
const C5_MAX_COUNTER: u64 = 8;
const C5_TIME_LIMIT: Duration = Duration::from_secs(300);
const C6_MACHINES: usize = 100;
const C7_MACHINES: usize = 100;
const C7_MAX_LEN: usize = 4;
const C8_MAX_LEN: usize = 8;
const C9_MAX_LEN: usize = 12;
const C10_SINGLE: usize = 50;
const C10_PAIRS: usize = 25;
const C10_MAX_LEN: usize = 8;
const C10_MAX_PREFIXES: usize = 20_000;
const C10_RUN_STEPS: u64 = 100_000;
const C11_RUNS: usize = 10_000;
const MAX_DISAGREEMENTS: usize = 0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("1 example1 membership, |w| <= 12", c1_example1),
        ("2 example2 membership, |w| <= 10", c2_example2),
        ("3 word encoding vs direct run", c3_word_encoding),
        ("4 writing-phase engines agree", c4_engines),
        ("5 NCM emptiness at desk scale", c5_ncm),
        ("6 normal form preserves lambda acceptance", c6_normal_form),
        ("7 transforms preserve emptiness", c7_transforms),
        ("8 two-way counter machine on a checking stack", c8_twoway),
        ("9 two-stack a^n b^n c^n, |w| <= 12", c9_kstack),
        ("10 no-read and intersection instances", c10_instances),
        ("11 accepting runs satisfy their instruction languages", c11_traces),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|x| name.starts_with(&format!("{x} "))) {
            continue;
        }
        let start = Instant::now();
        let o = f();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("[{verdict}] criterion {name}: {} ({:.1}s)", o.detail, start.elapsed().as_secs_f64());
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}

/// Exhaustive membership check of a one-stack machine against its oracle.
fn exhaustive(m: &MachineSpec, language: &str, max_len: usize) -> (usize, usize) {
    let mut words = 0;
    let mut bad = 0;
    for w in words_up_to(m.input.len(), max_len) {
        words += 1;
        let want = oracle_membership(language, &spell(m, &w)).unwrap();
        if decide_membership_dcsacm(m, &w).ok() != Some(want) {
            bad += 1;
        }
    }
    (words, bad)
}

fn c1_example1() -> Outcome {
    let start = Instant::now();
    let (words, bad) = exhaustive(&corpus::example1_machine(), "example1", C1_MAX_LEN);
    let t = start.elapsed();
    outcome(
        bad <= MAX_DISAGREEMENTS && t < C1_TIME_LIMIT,
        format!("{words} words, {bad} disagreements, {:.1}s (limit {}s)", t.as_secs_f64(), C1_TIME_LIMIT.as_secs()),
    )
}

fn c2_example2() -> Outcome {
    let (words, bad) = exhaustive(&corpus::example2_machine(), "example2", C2_MAX_LEN);
    outcome(bad <= MAX_DISAGREEMENTS, format!("{words} words, {bad} disagreements"))
}

fn lambda_profile(counters: usize) -> RandomProfile {
    RandomProfile {
        alphabet_size: 0,
        max_states: 4,
        max_transitions: 12,
        ..RandomProfile::dcsacm(counters)
    }
}

/// Deterministic one-stack machines: corpus entries with one checking
/// stack, then seeded random ones across several profiles.
fn dcsacm_pool(n: usize, seed: u64) -> Vec<MachineSpec> {
    let mut out = vec![corpus::example1_machine(), corpus::example2_machine(), corpus::noread_machine()];
    let profiles = [
        RandomProfile::dcsacm(1),
        RandomProfile::dcsacm(2),
        RandomProfile::dcsacm(0),
        RandomProfile::noread_dcsacm1(),
        RandomProfile {
            mode: Mode::TwoWay,
            ..RandomProfile::dcsacm(1)
        },
        lambda_profile(1),
    ];
    let mut s = seed;
    while out.len() < n {
        out.push(random_machine(s, &profiles[s as usize % profiles.len()]));
        s += 1;
    }
    out.truncate(n);
    out
}

fn c3_word_encoding() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let machines = dcsacm_pool(C3_PAIRS, 3_000);
    let (mut compared, mut skipped, mut bad, mut accepts) = (0, 0, 0, 0);
    for m in &machines {
        let w = random_word(m, &mut rng, 6);
        let direct = run_deterministic(m, &w, C3_RUN_STEPS).expect("pool machines are deterministic");
        let want = match direct.verdict {
            Verdict::Accept => true,
            Verdict::Reject => false,
            Verdict::BoundExceeded => {
                skipped += 1;
                continue;
            }
        };
        compared += 1;
        accepts += usize::from(want);
        if decide_lambda_dcsacm(&make_lambda_machine(m, &w)).ok() != Some(want) {
            bad += 1;
        }
    }
    outcome(
        bad <= MAX_DISAGREEMENTS && compared + skipped == C3_PAIRS,
        format!("{compared} pairs compared ({accepts} accepted), {skipped} inconclusive direct runs skipped, {bad} disagreements"),
    )
}

/// A one-way machine over the empty input alphabet with one checking stack
/// `T` over `{x, y}` and `counters` 1-reversal counters (2-reversal when
/// `reversals` says so). Rows are `from | store reads -> to | instructions`;
/// every row reads `⊲` and stays.
fn lambda_machine(name: &str, counters: usize, reversals: u32, rows: &str, finals: &[&str]) -> MachineSpec {
    let mut b = MachineBuilder::new(name, Mode::OneWay, 1, &[])
        .store("T", StoreTypeSpec::checking_stack(&["x", "y"]).unwrap());
    for i in 0..counters {
        b = b.store(&format!("C{i}"), StoreTypeSpec::rb_counter(reversals).unwrap());
    }
    b.state("q0");
    b.initial("q0");
    for row in rows.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let (lhs, rhs) = row.split_once("->").unwrap();
        let (from, reads) = lhs.split_once('|').unwrap();
        let (to, ins) = rhs.split_once('|').unwrap();
        let reads: Vec<&str> = reads.split_whitespace().collect();
        let ins: Vec<&str> = ins.split_whitespace().collect();
        b.trans(from.trim(), &[">"], &reads, to.trim(), &ins, &[0]).unwrap();
    }
    for f in finals {
        b.final_state(f);
    }
    b.build()
}

/// Hand-built machines whose writing phase on `λ` never ends.
fn hand_infinite() -> Vec<MachineSpec> {
    vec![
        lambda_machine("push_forever", 0, 1, "q0 | Zb -> q1 | push:x\n q1 | x -> q1 | push:x", &[]),
        lambda_machine(
            "alternate",
            0,
            1,
            "q0 | Zb -> q1 | push:x\n q1 | x -> q2 | push:y\n q2 | y -> q1 | push:x",
            &[],
        ),
        lambda_machine(
            "three_cycle",
            0,
            1,
            "q0 | Zb -> q1 | push:x\n q1 | x -> q2 | push:y\n q2 | y -> q3 | push:x\n q3 | x -> q1 | push:x",
            &["qf"],
        ),
        lambda_machine(
            "preload_then_loop",
            0,
            1,
            "q0 | Zb -> q1 | push:y\n q1 | y -> q2 | push:y\n q2 | y -> q3 | push:y\n q3 | y -> q4 | push:x\n q4 | x -> q4 | push:x",
            &[],
        ),
        lambda_machine(
            "count_up_forever",
            1,
            1,
            "q0 | Zb Zb -> q1 | push:x push:c\n q1 | x c -> q1 | push:x push:c",
            &[],
        ),
        lambda_machine(
            "counter_only_loop",
            1,
            1,
            "q0 | Zb Zb -> q1 | push:x stay\n q1 | x Zb -> q2 | stay push:c\n q2 | x c -> q2 | stay push:c",
            &[],
        ),
        lambda_machine(
            "count_down_then_loop",
            1,
            1,
            "q0 | Zb Zb -> q1 | push:x push:c\n q1 | x c -> q2 | push:x push:c\n q2 | x c -> q3 | push:x pop\n \
             q3 | x c -> q3 | push:x pop\n q3 | x Zb -> q4 | push:y stay\n q4 | y Zb -> q4 | push:y stay",
            &[],
        ),
        lambda_machine(
            "hold_counter",
            1,
            1,
            "q0 | Zb Zb -> q1 | push:x push:c\n q1 | x c -> q1 | push:y stay\n q1 | y c -> q1 | push:x stay",
            &[],
        ),
        lambda_machine(
            "two_counters_up",
            2,
            1,
            "q0 | Zb Zb Zb -> q1 | push:x push:c stay\n q1 | x c Zb -> q2 | push:y stay push:c\n \
             q2 | y c c -> q1b | push:x push:c push:c\n q1b | x c c -> q2 | push:y push:c stay",
            &[],
        ),
        lambda_machine(
            "reversal_then_loop",
            1,
            2,
            "q0 | Zb Zb -> q1 | push:x push:c\n q1 | x c -> q2 | push:x pop\n q2 | x Zb -> q3 | push:y push:c\n \
             q3 | y c -> q3 | push:y push:c",
            &[],
        ),
        lambda_machine(
            "unreachable_final",
            1,
            1,
            "q0 | Zb Zb -> q1 | push:x stay\n q1 | x Zb -> q1 | push:x stay\n q9 | x Zb -> qf | S stay",
            &["qf"],
        ),
        lambda_machine(
            "every_other_count",
            1,
            1,
            "q0 | Zb Zb -> q1 | push:x stay\n q1 | x Zb -> q2 | push:y push:c\n q1 | x c -> q2 | push:y push:c\n \
             q2 | y c -> q1 | push:x stay",
            &[],
        ),
    ]
}

/// Hand-built machines whose writing phase ends.
fn hand_finite() -> Vec<MachineSpec> {
    vec![
        lambda_machine(
            "push_while_counting_down",
            1,
            1,
            "q0 | Zb Zb -> q1 | push:x push:c\n q1 | x c -> q2 | push:x push:c\n q2 | x c -> q3 | push:x pop\n \
             q3 | x c -> q3 | push:y pop\n q3 | y c -> q3 | push:x pop",
            &[],
        ),
        lambda_machine(
            "write_then_read",
            0,
            1,
            "q0 | Zb -> q1 | push:x\n q1 | x -> q2 | push:y\n q2 | y -> q3 | D\n q3 | x -> q4 | D\n q4 | Zb -> qf | S",
            &["qf"],
        ),
        lambda_machine("accept_at_once", 0, 1, "q0 | Zb -> qf | S", &["qf"]),
        lambda_machine("halt_at_once", 0, 1, "", &[]),
        lambda_machine(
            "count_up_down",
            1,
            1,
            "q0 | Zb Zb -> q1 | push:x push:c\n q1 | x c -> q2 | push:x push:c\n q2 | x c -> q3 | push:y push:c\n \
             q3 | y c -> q3 | push:y pop\n q3 | y Zb -> qf | S stay",
            &["qf"],
        ),
    ]
}

fn c4_engines() -> Outcome {
    let mut machines: Vec<(MachineSpec, bool)> = hand_infinite().into_iter().map(|m| (m, true)).collect();
    machines.extend(hand_finite().into_iter().map(|m| (m, false)));
    let profiles = [lambda_profile(1), lambda_profile(2), RandomProfile::dcsacm(1)];
    let mut seed = 4_000;
    while machines.len() < C4_MACHINES {
        let m = random_machine(seed, &profiles[seed as usize % profiles.len()]);
        seed += 1;
        machines.push((m, false));
    }
    let (mut bad, mut infinite, mut hand_inf_ok, mut errors) = (0, 0, 0, 0);
    for (raw, hand_inf) in &machines {
        let n = normalize_dcsacm(raw).expect("one stack, deterministic");
        let a = detect_infinite_writing(&n, Engine::Simulation);
        let b = detect_infinite_writing(&n, Engine::Reduction);
        match (&a, &b) {
            (Ok(x), Ok(y)) if x == y => {
                let inf = *x == csacm::csa::WritingPhaseOutcome::Infinite;
                infinite += usize::from(inf);
                hand_inf_ok += usize::from(inf && *hand_inf);
                if *hand_inf && !inf {
                    bad += 1;
                }
            }
            (Err(_), Err(_)) => errors += 1,
            _ => bad += 1,
        }
    }
    outcome(
        bad <= MAX_DISAGREEMENTS && errors == 0 && hand_inf_ok >= C4_MIN_HAND_INFINITE,
        format!(
            "{} machines, {infinite} infinite ({hand_inf_ok} hand-built, need {C4_MIN_HAND_INFINITE}), {bad} disagreements, {errors} errors",
            machines.len()
        ),
    )
}

fn c5_ncm() -> Outcome {
    let start = Instant::now();
    let opts = SearchOptions {
        max_steps: 10_000,
        max_counter: Some(C5_MAX_COUNTER),
        max_configs: None,
        ..SearchOptions::depth(0)
    };
    let (mut empty, mut nonempty, mut bad_witness, mut missed, mut errors) = (0, 0, 0, 0, 0);
    for i in 0..C5_MACHINES as u64 {
        let counters = 1 + (i % 2) as usize;
        let l = 1 + ((i / 2) % 2) as u32;
        let m = nontrivial(random_machine(5_000 + i, &RandomProfile::ncm(counters, l)));
        match ncm_emptiness(&m) {
            Ok(EmptinessVerdict::Nonempty(w)) => {
                nonempty += 1;
                let accepted = bounded_search(&m, &w.word, &SearchOptions::depth(w.path.len() as u64 + 1));
                if !replays_to_accept(&m, &w.word, &w.path) || !matches!(accepted, BoundedOutcome::Accept(_)) {
                    bad_witness += 1;
                }
            }
            Ok(EmptinessVerdict::Empty) => {
                empty += 1;
                if find_witness(&m, C5_MAX_LEN, &opts).is_some() {
                    missed += 1;
                }
            }
            Err(_) => errors += 1,
        }
    }
    let t = start.elapsed();
    outcome(
        bad_witness + missed <= MAX_DISAGREEMENTS && errors == 0 && t < C5_TIME_LIMIT,
        format!(
            "{nonempty} nonempty (bad witnesses {bad_witness}), {empty} empty (BFS witnesses {missed}), {errors} errors, {:.1}s (limit {}s)",
            t.as_secs_f64(),
            C5_TIME_LIMIT.as_secs()
        ),
    )
}

fn c6_normal_form() -> Outcome {
    let mut machines: Vec<MachineSpec> = hand_infinite().into_iter().chain(hand_finite()).collect();
    machines.extend(dcsacm_pool(C6_MACHINES - machines.len(), 6_000));
    let (mut bad, mut accepted, mut errors) = (0, 0, 0);
    for m in &machines {
        let before = decide_lambda_dcsacm(m);
        let after = normalize_dcsacm(m).and_then(|n| decide_lambda_dcsacm(&n));
        match (before, after) {
            (Ok(x), Ok(y)) if x == y => accepted += usize::from(x),
            (Ok(_), Ok(_)) => bad += 1,
            _ => errors += 1,
        }
    }
    outcome(
        bad <= MAX_DISAGREEMENTS && errors == 0,
        format!("{} machines, {accepted} accept lambda, {bad} disagreements, {errors} errors", machines.len()),
    )
}

fn transform_pool(seed: u64) -> Vec<MachineSpec> {
    let profiles = [
        RandomProfile::ncsacm(1),
        RandomProfile::dcsacm(1),
        RandomProfile::ncm(1, 2),
        RandomProfile::noread_dcsacm1(),
    ];
    (0..C7_MACHINES as u64)
        .map(|i| nontrivial(random_machine(seed + i, &profiles[i as usize % profiles.len()])))
        .collect()
}

/// Lifts a source path into the erased machine by following, from its
/// initial state, the copy of each source transition.
fn lift(out: &MachineSpec, origin: &[usize], path: &[usize]) -> Option<Vec<usize>> {
    let mut q = out.initial;
    let mut lifted = Vec::new();
    for &t in path {
        let j = (0..out.transitions.len()).find(|&j| out.transitions[j].from == q && origin[j] == t)?;
        lifted.push(j);
        q = out.transitions[j].to;
    }
    Some(lifted)
}

fn c7_transforms() -> Outcome {
    let opts = search_opts(40, 8);
    let mut violations = Vec::new();
    let mut found = [0usize; 3];
    for m in transform_pool(7_000) {
        let src = find_witness(&m, C7_MAX_LEN, &opts);

        let labels = label_determinize(&m).unwrap();
        if let Some((_, t)) = &src {
            found[0] += 1;
            let u: Vec<Letter> = t.transitions().iter().map(|&i| i as Letter).collect();
            if !matches!(run_deterministic(&labels, &u, 10_000).map(|r| r.verdict), Ok(Verdict::Accept)) {
                violations.push(format!("label_determinize forward on {}", m.name));
            }
        }
        if let Some((u, _)) = find_witness(&labels, C7_MAX_LEN, &opts) {
            let path: Vec<usize> = u.iter().map(|&a| a as usize).collect();
            if !replays_to_accept(&m, &word_of_path(&m, &path), &path) {
                violations.push(format!("label_determinize backward on {}", m.name));
            }
        }

        let (erased, origin) = erase_input_with_origin(&m).unwrap();
        if let Some((_, t)) = &src {
            found[1] += 1;
            let ok = lift(&erased, &origin, &t.transitions()).is_some_and(|p| replays_to_accept(&erased, &[], &p));
            if !ok {
                violations.push(format!("erase_input forward on {}", m.name));
            }
        }
        if let BoundedOutcome::Accept(t) = bounded_search(&erased, &[], &opts) {
            let path: Vec<usize> = t.transitions().iter().map(|&j| origin[j]).collect();
            if !replays_to_accept(&m, &word_of_path(&m, &path), &path) {
                violations.push(format!("erase_input backward on {}", m.name));
            }
        }

        let restricted = restrict_to_lambda(&m).unwrap();
        let src_lambda = bounded_search(&m, &[], &opts);
        if let BoundedOutcome::Accept(t) = &src_lambda {
            found[2] += 1;
            let mut path = vec![0];
            for &i in &t.transitions() {
                match restricted.transitions.iter().skip(1).position(|u| *u == m.transitions[i]) {
                    Some(j) => path.push(j + 1),
                    None => break,
                }
            }
            if path.len() != t.steps.len() + 1 || !replays_to_accept(&restricted, &[], &path) {
                violations.push(format!("restrict_to_lambda forward on {}", m.name));
            }
        }
        if let Some((w, t)) = find_witness(&restricted, C7_MAX_LEN, &opts) {
            let path: Option<Vec<usize>> = t.transitions()[1..]
                .iter()
                .map(|&j| m.transitions.iter().position(|u| *u == restricted.transitions[j]))
                .collect();
            if !w.is_empty() || !path.is_some_and(|p| replays_to_accept(&m, &[], &p)) {
                violations.push(format!("restrict_to_lambda backward on {}", m.name));
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "{C7_MACHINES} machines per transform, source witnesses {}/{}/{}, {} violations {:?}",
            found[0],
            found[1],
            found[2],
            violations.len(),
            violations.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn c8_twoway() -> Outcome {
    let src = corpus::anbn_2dcm1_machine();
    let conv = twoway_counter_to_csacm(&src, false).unwrap();
    let (mut words, mut bad) = (0, 0);
    for w in words_up_to(src.input.len(), C8_MAX_LEN) {
        words += 1;
        let direct = run_deterministic(&src, &w, 100_000).unwrap().verdict;
        let want = oracle_membership("anbn", &spell(&src, &w)).unwrap();
        let got = decide_membership_dcsacm(&conv, &w).ok();
        if direct != if want { Verdict::Accept } else { Verdict::Reject } || got != Some(want) {
            bad += 1;
        }
    }
    let labels = classify_restrictions(&conv);
    let labelled = labels.contains(&Restriction::NoReadNoCounter);
    outcome(
        bad <= MAX_DISAGREEMENTS && labelled,
        format!(
            "{words} words, {bad} disagreements, restrictions {:?}",
            labels.iter().map(ToString::to_string).collect::<Vec<_>>()
        ),
    )
}

fn c9_kstack() -> Outcome {
    let m = corpus::anbncn_two_stack_machine();
    let (mut words, mut bad) = (0, 0);
    for w in words_up_to(m.input.len(), C9_MAX_LEN) {
        words += 1;
        let want = oracle_membership("anbncn", &spell(&m, &w)).unwrap();
        if decide_membership_kstack(&m, &w).ok() != Some(want) {
            bad += 1;
        }
    }
    outcome(bad <= MAX_DISAGREEMENTS, format!("{words} words, {bad} disagreements"))
}

/// Shortest word of length at most `max_len` accepted by every machine,
/// decided exactly, with each machine's accepting path.
fn common_word(ms: &[&MachineSpec], max_len: usize) -> Option<(Vec<Letter>, Vec<Vec<usize>>)> {
    words_up_to(ms[0].input.len(), max_len).find_map(|w| {
        ms.iter()
            .map(|m| match decide_membership_dcsacm(m, &w) {
                Ok(true) => run_deterministic(m, &w, 10_000_000)
                    .ok()
                    .and_then(|r| r.trace)
                    .map(|t| t.transitions()),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(|paths| (w.clone(), paths))
    })
}

#[derive(Default)]
struct InstanceTally {
    both: usize,
    neither: usize,
    unresolved: Vec<String>,
    bad: Vec<String>,
}

impl InstanceTally {
    /// Compares a source-side and an instance-side search. A one-sided find
    /// counts against the implementation only when the other side's search
    /// covered the mapped witness.
    fn record(
        &mut self,
        name: &str,
        inst: &TwoDcm1Instance,
        source: Option<Vec<usize>>,
        source_found: bool,
        instance: &csacm::csa::InstanceSearch,
        mapped_source_len: Option<usize>,
    ) {
        match (source_found, &instance.witness) {
            (true, Some(_)) => self.both += 1,
            (false, None) if instance.exhausted => self.neither += 1,
            (false, None) => self.unresolved.push(format!(
                "{name}: no witness on either side, instance search stopped after {} prefixes ({} runs over the step bound)",
                instance.explored, instance.unresolved
            )),
            (true, None) => match source {
                Some(u) if u.len() <= C10_MAX_LEN && instance.exhausted => {
                    self.bad.push(format!("{name}: instance search missed {}", inst.render(&u)))
                }
                Some(u) => self.unresolved.push(format!("{name}: label word of length {}", u.len())),
                None => self.bad.push(format!("{name}: source run has no label word")),
            },
            (false, Some(_)) => match mapped_source_len {
                Some(n) if n > C10_MAX_LEN => self.unresolved.push(format!("{name}: source word of length {n}")),
                _ => self.bad.push(format!("{name}: source search missed the instance word")),
            },
        }
    }
}

fn c10_instances() -> Outcome {
    let mut tally = InstanceTally::default();
    let mut machines = vec![corpus::noread_machine()];
    let mut seed = 10_000;
    while machines.len() < C10_SINGLE {
        let m = random_machine(seed, &RandomProfile::noread_dcsacm1());
        seed += 1;
        if classify_restrictions(&m).contains(&Restriction::NoRead) {
            machines.push(m);
        }
    }
    for m in &machines {
        let inst = noread_dcsacm1_to_2dcm1(m).unwrap();
        let src = common_word(&[m], C10_MAX_LEN);
        let search = search_instance(&inst, C10_MAX_LEN, C10_MAX_PREFIXES, C10_RUN_STEPS);
        let mut mapped = None;
        if let Some(u) = &search.witness {
            let w = instance_word(&inst, m, u);
            mapped = Some(w.len());
            if decide_membership_dcsacm(m, &w).ok() != Some(true) {
                tally.bad.push(format!("{}: instance word does not replay on the source", m.name));
            }
        }
        let labels = src.as_ref().and_then(|(_, p)| noread_label_word(&inst, m, &p[0]));
        if let Some(u) = &labels {
            let w: Vec<Letter> = u.iter().map(|&i| i as Letter).collect();
            if !matches!(run_deterministic(&inst.spec, &w, 1_000_000).map(|r| r.verdict), Ok(Verdict::Accept)) {
                tally.bad.push(format!("{}: source run does not replay on the instance", m.name));
            }
        }
        tally.record(&m.name, &inst, labels, src.is_some(), &search, mapped);
    }
    let pool: Vec<&MachineSpec> = machines.iter().filter(|m| m.input.len() == machines[0].input.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut pairs = 0;
    let mut instance_sizes = Vec::new();
    while pairs < C10_PAIRS {
        let m1 = *pool.choose(&mut rng).unwrap();
        let m2 = *pool.choose(&mut rng).unwrap();
        pairs += 1;
        let inst = intersection_emptiness_reduction(m1, m2).unwrap();
        instance_sizes.push(inst.labels.len());
        let name = format!("{} x {}", m1.name, m2.name);
        let src = common_word(&[m1, m2], C10_MAX_LEN);
        let search = search_instance(&inst, C10_MAX_LEN, C10_MAX_PREFIXES, C10_RUN_STEPS);
        let mut mapped = None;
        if let Some(u) = &search.witness {
            let w = inst.source_word(u);
            mapped = Some(w.len());
            let both = [m1, m2].iter().all(|m| decide_membership_dcsacm(m, &w).ok() == Some(true));
            if !both {
                tally.bad.push(format!("{name}: instance word is not in both languages"));
            }
        }
        let labels = src
            .as_ref()
            .and_then(|(_, p)| pair_label_word(&inst, m1, &p[0], m2, &p[1]));
        if let Some(u) = &labels {
            let w: Vec<Letter> = u.iter().map(|&i| i as Letter).collect();
            if !matches!(run_deterministic(&inst.spec, &w, 1_000_000).map(|r| r.verdict), Ok(Verdict::Accept)) {
                tally.bad.push(format!("{name}: source runs do not replay on the instance"));
            }
        }
        tally.record(&name, &inst, labels, src.is_some(), &search, mapped);
    }
    for u in &tally.unresolved {
        println!("    unresolved: {u}");
    }
    for b in &tally.bad {
        println!("    violation: {b}");
    }
    outcome(
        tally.bad.is_empty(),
        format!(
            "{} machines + {pairs} pairs: {} both nonempty, {} neither, {} unresolved, {} violations",
            machines.len(),
            tally.both,
            tally.neither,
            tally.unresolved.len(),
            tally.bad.len()
        ),
    )
}

/// A random accepting run of `m` on `w`, choosing uniformly among enabled
/// transitions, if one is found within `max_steps`.
fn random_run(m: &MachineSpec, w: &[Letter], rng: &mut ChaCha8Rng, max_steps: usize) -> Option<Trace> {
    let tape = m.tape(w);
    let initial = m.initial_configuration();
    let mut steps = Vec::new();
    let mut c = initial.clone();
    for _ in 0..max_steps {
        if m.is_final(c.state) {
            return Some(Trace { initial, steps });
        }
        let (next, t) = step(m, &tape, &c).choose(rng)?.clone();
        steps.push((t, next.clone()));
        c = next;
    }
    m.is_final(c.state).then_some(Trace { initial, steps })
}

fn random_word(m: &MachineSpec, rng: &mut ChaCha8Rng, max_len: usize) -> Vec<Letter> {
    if m.input.is_empty() {
        return Vec::new();
    }
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| rng.gen_range(0..m.input.len()) as Letter).collect()
}

fn c11_traces() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut machines: Vec<MachineSpec> = corpus::corpus().iter().map(|e| (e.build)()).collect();
    let profiles = [
        RandomProfile::ncsacm(1),
        RandomProfile::ncsacm(2),
        RandomProfile::dcsacm(1),
        RandomProfile::ncm(2, 2),
        RandomProfile::twodcm(1),
        RandomProfile::noread_dcsacm1(),
    ];
    for i in 0..300u64 {
        machines.push(random_machine(11_000 + i, &profiles[i as usize % profiles.len()]));
    }
    // Corpus words known to be accepted, so that corpus runs are not rare.
    let accepted: std::collections::HashMap<String, Vec<Vec<Letter>>> = corpus::corpus()
        .iter()
        .filter_map(|e| {
            let m = (e.build)();
            let lang = e.language?;
            let ws: Vec<Vec<Letter>> = words_up_to(m.input.len(), 6)
                .filter(|w| oracle_membership(lang, &spell(&m, w)).unwrap())
                .collect();
            (!ws.is_empty()).then(|| (m.name.clone(), ws))
        })
        .collect();
    let (mut runs, mut failures, mut rounds) = (0, 0, 0);
    while runs < C11_RUNS && rounds < 5_000 {
        rounds += 1;
        for m in &machines {
            let w = match accepted.get(&m.name) {
                Some(ws) if rng.gen_bool(0.7) => ws.choose(&mut rng).unwrap().clone(),
                _ => random_word(m, &mut rng, 6),
            };
            if let Some(t) = random_run(m, &w, &mut rng, 200).filter(|t| !t.steps.is_empty()) {
                runs += 1;
                if !t.is_valid(m) || !traces_independently_valid(m, &t.transitions()) {
                    failures += 1;
                }
            }
            if runs >= C11_RUNS {
                break;
            }
        }
    }
    outcome(
        runs >= C11_RUNS && failures == 0,
        format!("{runs} accepting runs from {} machines, {failures} invalid traces", machines.len()),
    )
}
