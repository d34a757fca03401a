mod common;

use csacm::corpus::{self, random_machine, RandomProfile};
use csacm::csa::{
    check_normalized, decide_lambda_dcsacm, decide_membership_dcsacm, decide_membership_kstack,
    decide_membership_stats, detect_infinite_writing, instance_word, intersection_emptiness_reduction,
    make_lambda_machine, noread_dcsacm1_to_2dcm1, noread_label_word, normalize_dcsacm, prefix_status,
    search_instance, writing_phase_ncm, CsaError, Engine, PrefixStatus, WritingPhaseOutcome,
};
use csacm::machine::{validate_machine, InSym, MachineBuilder, MachineSpec, Mode, Transition};
use csacm::sim::{run_deterministic, words_up_to, Verdict};
use csacm::store::{Instruction, StoreSym, StoreTypeSpec};
use csacm::transforms::twoway_counter_to_csacm;

fn word(m: &MachineSpec, w: &str) -> Vec<u16> {
    m.parse_word(w).unwrap()
}

fn lambda_stack_machine(name: &str, counters: usize, rows: &[(&str, &[&str], &str, &[&str])], finals: &[&str]) -> MachineSpec {
    let mut b = MachineBuilder::new(name, Mode::OneWay, 1, &[])
        .store("T", StoreTypeSpec::checking_stack(&["a"]).unwrap());
    for i in 0..counters {
        b = b.store(&format!("C{i}"), StoreTypeSpec::rb_counter(1).unwrap());
    }
    b.state("q0");
    b.initial("q0");
    for (from, reads, to, ins) in rows {
        b.trans(from, &[">"], reads, to, ins, &[0]).unwrap();
    }
    for f in finals {
        b.final_state(f);
    }
    b.build()
}

#[test]
fn word_encoding() {
    let e1 = corpus::example1_machine();
    assert!(decide_lambda_dcsacm(&make_lambda_machine(&e1, &word(&e1, "aa#aa#"))).unwrap());
    assert!(!decide_lambda_dcsacm(&make_lambda_machine(&e1, &word(&e1, "aa#a#"))).unwrap());
    let mw = make_lambda_machine(&e1, &word(&e1, "a#"));
    assert!(mw.input.is_empty());
    assert!(mw.is_deterministic());
    assert!(validate_machine(&mw).is_empty());
    for seed in 0..60 {
        let m = random_machine(seed, &RandomProfile::dcsacm(1));
        assert_eq!(
            decide_lambda_dcsacm(&make_lambda_machine(&m, &[])).unwrap(),
            decide_lambda_dcsacm(&m).unwrap(),
            "seed {seed}"
        );
    }
}

#[test]
fn normal_form() {
    // A writing loop that never pushes.
    let m = lambda_stack_machine(
        "stay_loop",
        1,
        &[
            ("q0", &["Zb", "Zb"], "q1", &["stay", "push:c"]),
            ("q1", &["Zb", "c"], "q2", &["stay", "pop"]),
            ("q2", &["Zb", "Zb"], "qf", &["S", "stay"]),
        ],
        &["qf"],
    );
    let n = normalize_dcsacm(&m).unwrap();
    check_normalized(&n).unwrap();
    let pad = n.stores[0].spec.symbol_id("$").expect("padding symbol");
    assert!(n
        .transitions
        .iter()
        .any(|t| t.instructions[0] == Instruction::Push(pad)));
    assert_eq!(decide_lambda_dcsacm(&m).unwrap(), decide_lambda_dcsacm(&n).unwrap());
    assert!(decide_lambda_dcsacm(&n).unwrap());

    let nn = normalize_dcsacm(&n).unwrap();
    assert_eq!(decide_lambda_dcsacm(&nn).unwrap(), decide_lambda_dcsacm(&n).unwrap());

    let e1 = corpus::example1_machine();
    let mw = make_lambda_machine(&e1, &word(&e1, "a#"));
    assert!(decide_lambda_dcsacm(&mw).unwrap());
    assert!(decide_lambda_dcsacm(&normalize_dcsacm(&mw).unwrap()).unwrap());

    assert!(matches!(check_normalized(&e1), Err(CsaError::NotNormalized(_))));
    assert!(matches!(
        normalize_dcsacm(&corpus::anbncn_two_stack_machine()),
        Err(CsaError::Signature(_))
    ));
}

#[test]
fn writing_phase() {
    let forever = lambda_stack_machine("forever", 0, &[("q0", &["Zb"], "q0", &["push:a"]), ("q0", &["a"], "q0", &["push:a"])], &[]);
    let n = normalize_dcsacm(&forever).unwrap();
    for engine in [Engine::Simulation, Engine::Reduction] {
        assert_eq!(detect_infinite_writing(&n, engine).unwrap(), WritingPhaseOutcome::Infinite);
    }

    let e1 = corpus::example1_machine();
    let n = normalize_dcsacm(&make_lambda_machine(&e1, &word(&e1, "a#"))).unwrap();
    for engine in [Engine::Simulation, Engine::Reduction] {
        match detect_infinite_writing(&n, engine).unwrap() {
            WritingPhaseOutcome::Finite(s) => {
                assert_eq!(s.stacks.len(), 1);
                assert_eq!(s.stacks[0].first().map(String::as_str), Some("a"));
                assert!(s.stacks[0][1..].iter().all(|y| y == "$"));
            }
            WritingPhaseOutcome::Infinite => panic!("example 1 on a# stops writing"),
        }
    }

    let countdown = lambda_stack_machine(
        "countdown",
        1,
        &[
            ("q0", &["Zb", "Zb"], "q1", &["push:a", "push:c"]),
            ("q1", &["a", "c"], "q2", &["push:a", "push:c"]),
            ("q2", &["a", "c"], "q3", &["push:a", "pop"]),
            ("q3", &["a", "c"], "q3", &["push:a", "pop"]),
        ],
        &[],
    );
    let n = normalize_dcsacm(&countdown).unwrap();
    let a = detect_infinite_writing(&n, Engine::Simulation).unwrap();
    assert!(matches!(a, WritingPhaseOutcome::Finite(_)));
    assert_eq!(a, detect_infinite_writing(&n, Engine::Reduction).unwrap());

    let stay_loop = lambda_stack_machine("stay", 0, &[("q0", &["Zb"], "q0", &["stay"])], &[]);
    assert!(matches!(
        detect_infinite_writing(&stay_loop, Engine::Simulation),
        Err(CsaError::NotNormalized(_))
    ));
    let ncm = writing_phase_ncm(&normalize_dcsacm(&forever).unwrap()).unwrap();
    assert!(ncm.stores.iter().all(|d| d.spec.kind.is_counter()));
}

#[test]
fn lambda_decisions() {
    let mut b = MachineBuilder::new("all", Mode::OneWay, 1, &["a"]).store("T", StoreTypeSpec::checking_stack(&["a"]).unwrap());
    b.trans("q", &["a"], &["Zb"], "q", &["stay"], &[1]).unwrap();
    b.initial("q");
    b.final_state("q");
    assert!(decide_lambda_dcsacm(&b.build()).unwrap());
    let e1 = corpus::example1_machine();
    assert!(!decide_lambda_dcsacm(&e1).unwrap());
    assert!(decide_lambda_dcsacm(&make_lambda_machine(&e1, &word(&e1, "aa#aa#"))).unwrap());
    assert_eq!(
        decide_lambda_dcsacm(&corpus::ncsacm_guess_machine()),
        Err(CsaError::Nondeterministic)
    );
}

#[test]
fn membership_examples() {
    let e2 = corpus::example2_machine();
    assert!(decide_membership_dcsacm(&e2, &word(&e2, "aabbcccc")).unwrap());
    assert!(!decide_membership_dcsacm(&e2, &word(&e2, "abcc")).unwrap());
    let k = corpus::anbncn_two_stack_machine();
    assert!(decide_membership_kstack(&k, &word(&k, "aabbcc")).unwrap());
    assert!(!decide_membership_kstack(&k, &word(&k, "aabbc")).unwrap());
    assert!(matches!(decide_membership_dcsacm(&k, &[]), Err(CsaError::Signature(_))));
    let d = decide_membership_stats(&e2, &word(&e2, "aabbcccc"), 1_000_000).unwrap();
    assert!(d.accepted && d.stats.steps > 0);
}

#[test]
fn single_stack_recursion_is_the_one_stack_decider() {
    for m in [corpus::example1_machine(), corpus::example2_machine()] {
        for w in words_up_to(m.input.len(), 6) {
            assert_eq!(
                decide_membership_kstack(&m, &w).unwrap(),
                decide_membership_dcsacm(&m, &w).unwrap()
            );
        }
    }
}

/// The `example2` corpus machine preceded by a sweep of the head to `⊲` and back to `⊳`.
fn two_way_example2() -> MachineSpec {
    let e2 = corpus::example2_machine();
    let mut m = e2.clone();
    m.mode = Mode::TwoWay;
    m.name = "example2_twoway".into();
    let (right, left) = (m.states.len(), m.states.len() + 1);
    m.states.push("sweep_right".into());
    m.states.push("sweep_left".into());
    let idle = |from, read, to, mv| Transition {
        from,
        reads: vec![read],
        store_reads: vec![StoreSym::Bottom; 2],
        to,
        instructions: vec![Instruction::Stay; 2],
        moves: vec![mv],
    };
    for a in 0..m.input.len() as u16 {
        m.transitions.push(idle(right, InSym::Letter(a), right, 1));
        m.transitions.push(idle(left, InSym::Letter(a), left, -1));
    }
    m.transitions.push(idle(right, InSym::Right, left, -1));
    m.transitions.push(idle(left, InSym::Left, e2.initial, 1));
    m.initial = right;
    m
}

#[test]
fn two_way_variant_agrees() {
    let e2 = corpus::example2_machine();
    let m = two_way_example2();
    assert!(validate_machine(&m).is_empty());
    for w in words_up_to(3, 7) {
        let want = decide_membership_dcsacm(&e2, &w).unwrap();
        assert_eq!(decide_membership_dcsacm(&m, &w).unwrap(), want, "{}", e2.render_word(&w));
        let direct = run_deterministic(&m, &w, 100_000).unwrap().verdict;
        assert_eq!(direct == Verdict::Accept, want);
    }
}

#[test]
fn noread_instance() {
    let m = corpus::noread_machine();
    let inst = noread_dcsacm1_to_2dcm1(&m).unwrap();
    assert_eq!(inst.spec.mode, Mode::TwoWay);
    assert_eq!(inst.spec.stores.len(), 1);
    assert!(inst.spec.is_deterministic());
    assert_eq!(inst.labels.len(), writing_labels(&m).len());
    let found = search_instance(&inst, 8, 100_000, 100_000);
    let u = found.witness.expect("the corpus language is nonempty");
    let w = instance_word(&inst, &m, &u);
    assert!(decide_membership_dcsacm(&m, &w).unwrap());

    let src = m.parse_word("aab").unwrap();
    let path = run_deterministic(&m, &src, 10_000).unwrap().trace.unwrap().transitions();
    let labels = noread_label_word(&inst, &m, &path).unwrap();
    assert_eq!(prefix_status(&inst, &labels), PrefixStatus::Viable);
    let u: Vec<u16> = labels.iter().map(|&i| i as u16).collect();
    assert_eq!(run_deterministic(&inst.spec, &u, 100_000).unwrap().verdict, Verdict::Accept);
    assert_eq!(prefix_status(&inst, &[]), PrefixStatus::Viable);

    let mut none = m.clone();
    none.finals.clear();
    assert!(noread_dcsacm1_to_2dcm1(&none).unwrap().spec.finals.is_empty());

    assert!(matches!(
        noread_dcsacm1_to_2dcm1(&corpus::example1_machine()),
        Err(CsaError::Restriction(_))
    ));
}

#[test]
fn converted_two_way_machine_instance() {
    let conv = twoway_counter_to_csacm(&corpus::anbn_2dcm1_machine(), false).unwrap();
    let inst = noread_dcsacm1_to_2dcm1(&conv).unwrap();
    let found = search_instance(&inst, 8, 200_000, 100_000);
    let u = found.witness.expect("a^n b^n is nonempty");
    let w = instance_word(&inst, &conv, &u);
    assert!(decide_membership_dcsacm(&conv, &w).unwrap());
    assert!(corpus::oracle_membership("anbn", &common::spell(&conv, &w)).unwrap());
}

/// Transitions that can appear in a writing phase: they write to the stack,
/// and on `⊲` they do not move.
fn writing_labels(m: &MachineSpec) -> Vec<usize> {
    (0..m.transitions.len())
        .filter(|&i| {
            let t = &m.transitions[i];
            matches!(t.instructions[0], Instruction::Push(_) | Instruction::Stay)
                && t.reads[0] != InSym::Left
                && (t.reads[0] != InSym::Right || t.moves[0] == 0)
        })
        .collect()
}

/// A no-read machine accepting `b⁺`.
fn only_bs() -> MachineSpec {
    let mut b = MachineBuilder::new("only_bs", Mode::OneWay, 1, &["a", "b"])
        .store("T", StoreTypeSpec::checking_stack(&["a"]).unwrap())
        .store("C", StoreTypeSpec::rb_counter(1).unwrap());
    b.trans("s0", &["b"], &["Zb", "Zb"], "s1", &["push:a", "stay"], &[1]).unwrap();
    b.trans("s1", &["b"], &["a", "Zb"], "s1", &["push:a", "stay"], &[1]).unwrap();
    b.trans("s1", &[">"], &["a", "Zb"], "sf", &["S", "stay"], &[0]).unwrap();
    b.initial("s0");
    b.final_state("sf");
    b.build()
}

#[test]
fn intersection_instances() {
    let m = corpus::noread_machine();
    let same = intersection_emptiness_reduction(&m, &m).unwrap();
    let found = search_instance(&same, 8, 100_000, 100_000);
    let u = found.witness.expect("self-intersection of a nonempty language");
    let w = same.source_word(&u);
    assert!(decide_membership_dcsacm(&m, &w).unwrap());

    let disjoint = intersection_emptiness_reduction(&m, &only_bs()).unwrap();
    let found = search_instance(&disjoint, 6, 100_000, 100_000);
    assert!(found.witness.is_none());
    for w in words_up_to(2, 8) {
        assert!(!(decide_membership_dcsacm(&m, &w).unwrap() && decide_membership_dcsacm(&only_bs(), &w).unwrap()));
    }

    // Paired labels agree on the letter and the head move; one-sided labels
    // exist for every transition.
    for l in &disjoint.labels {
        if let (Some(a), Some(b)) = (l.first, l.second) {
            let (ta, tb) = (&m.transitions[a], &only_bs().transitions[b]);
            assert_eq!(ta.reads, tb.reads);
            assert_eq!(ta.moves, tb.moves);
        }
    }
    for t in writing_labels(&m) {
        assert!(disjoint.label_id(&format!("t{t}/$")).is_some());
    }
    for t in writing_labels(&only_bs()) {
        assert!(disjoint.label_id(&format!("$/t{t}")).is_some());
    }
    assert!(!disjoint.sidecar().is_empty());
}
