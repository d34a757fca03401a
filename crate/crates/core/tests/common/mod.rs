#![allow(dead_code)]

use csacm::flow::replay;
use csacm::machine::{instruction_traces, Letter, MachineSpec};
use csacm::sim::{bounded_search, words_up_to, BoundedOutcome, SearchOptions, Trace};
use csacm::store::{Instruction, StoreKind, StoreTypeSpec};
use serde_json::Value;

/// Letters of a word as one string, for the arithmetic oracles.
pub fn spell(m: &MachineSpec, w: &[Letter]) -> String {
    w.iter().map(|&a| m.input[a as usize].as_str()).collect()
}

pub fn search_opts(max_steps: u64, max_counter: u64) -> SearchOptions {
    SearchOptions {
        max_steps,
        max_counter: Some(max_counter),
        max_configs: Some(50_000),
        ..SearchOptions::depth(max_steps)
    }
}

/// Makes acceptance depend on the run: at least one final state, and the
/// initial state final only when it is the only state.
pub fn nontrivial(mut m: MachineSpec) -> MachineSpec {
    let last = m.states.len() - 1;
    if m.finals.is_empty() {
        m.finals.insert(last);
    }
    if last > 0 {
        m.finals.remove(&m.initial);
        if m.finals.is_empty() {
            m.finals.insert(last);
        }
    }
    m
}

/// Shortest accepted word of length at most `max_len` found by bounded
/// search, with its accepting trace.
pub fn find_witness(m: &MachineSpec, max_len: usize, opts: &SearchOptions) -> Option<(Vec<Letter>, Trace)> {
    if m.finals.is_empty() {
        return None;
    }
    words_up_to(m.input.len(), max_len).find_map(|w| match bounded_search(m, &w, opts) {
        BoundedOutcome::Accept(t) => Some((w, t)),
        _ => None,
    })
}

/// Whether `path` is an accepting run of `m` on `w` with valid store traces.
pub fn replays_to_accept(m: &MachineSpec, w: &[Letter], path: &[usize]) -> bool {
    replay(m, w, path).is_some_and(|t| m.is_final(t.last().state) && t.is_valid(m))
}

/// Independent membership test for instruction languages: counters change
/// direction at most `l` times; a checking stack writes only before its
/// first head move and never pops; counters and pushdowns never move a head.
/// Plain stacks are unrestricted.
pub fn in_instruction_language(spec: &StoreTypeSpec, trace: &[Instruction]) -> bool {
    if trace.iter().any(|i| matches!(i, Instruction::Push(y) if *y as usize >= spec.alphabet.len())) {
        return false;
    }
    match spec.kind {
        StoreKind::Pushdown => trace.iter().all(|i| !i.is_move()),
        StoreKind::Stack => true,
        StoreKind::Counter | StoreKind::RbCounter => {
            if trace.iter().any(|i| i.is_move()) {
                return false;
            }
            let mut dirs: Vec<bool> = trace
                .iter()
                .filter_map(|i| match i {
                    Instruction::Push(_) => Some(true),
                    Instruction::Pop => Some(false),
                    _ => None,
                })
                .collect();
            dirs.dedup();
            // Counters start out increasing, so a leading decrement is a reversal.
            let changes = dirs.len().saturating_sub(1) + usize::from(dirs.first() == Some(&false));
            spec.kind == StoreKind::Counter || changes as u32 <= spec.reversal_bound
        }
        StoreKind::CheckingStack => {
            if trace.contains(&Instruction::Pop) {
                return false;
            }
            match trace.iter().position(|i| i.is_move()) {
                Some(p) => trace[p..].iter().all(|i| i.is_move()),
                None => true,
            }
        }
    }
}

/// Every store trace of `path` lies in the store's instruction language.
pub fn traces_independently_valid(m: &MachineSpec, path: &[usize]) -> bool {
    instruction_traces(m, path)
        .iter()
        .zip(&m.stores)
        .all(|(tr, d)| in_instruction_language(&d.spec, tr))
}

/// Checks `v` against the subset of JSON Schema used by the report schema:
/// `type`, `enum`, `required`, `properties`, `additionalProperties: false`,
/// `items` and `minimum`.
pub fn check_schema(schema: &Value, v: &Value, at: &str) -> Result<(), String> {
    if let Some(t) = schema.get("type") {
        let types: Vec<&str> = match t {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
            _ => vec![],
        };
        let ok = types.iter().any(|&t| match t {
            "object" => v.is_object(),
            "array" => v.is_array(),
            "string" => v.is_string(),
            "boolean" => v.is_boolean(),
            "integer" => v.is_i64() || v.is_u64(),
            "number" => v.is_number(),
            "null" => v.is_null(),
            _ => false,
        });
        if !ok {
            return Err(format!("{at}: expected {types:?}, found {v}"));
        }
    }
    if let Some(Value::Array(options)) = schema.get("enum") {
        if !options.contains(v) {
            return Err(format!("{at}: {v} not in enum"));
        }
    }
    if let (Some(min), Some(x)) = (schema.get("minimum").and_then(Value::as_f64), v.as_f64()) {
        if x < min {
            return Err(format!("{at}: {x} below {min}"));
        }
    }
    if let Value::Object(obj) = v {
        for r in schema.get("required").and_then(Value::as_array).into_iter().flatten() {
            let key = r.as_str().unwrap_or_default();
            if !obj.contains_key(key) {
                return Err(format!("{at}: missing {key}"));
            }
        }
        let props = schema.get("properties").and_then(Value::as_object);
        for (k, x) in obj {
            match props.and_then(|p| p.get(k)) {
                Some(s) => check_schema(s, x, &format!("{at}.{k}"))?,
                None if schema.get("additionalProperties") == Some(&Value::Bool(false)) => {
                    return Err(format!("{at}: unexpected property {k}"))
                }
                None => {}
            }
        }
    }
    if let (Value::Array(xs), Some(s)) = (v, schema.get("items")) {
        for (i, x) in xs.iter().enumerate() {
            check_schema(s, x, &format!("{at}[{i}]"))?;
        }
    }
    Ok(())
}

pub fn report_schema() -> Value {
    serde_json::from_str(include_str!("../../schema/report.schema.json")).expect("schema is JSON")
}
