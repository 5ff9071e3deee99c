//! Mining dependencies without memory from a recorded life.
//!
//! An implication is a conjunction of signal atoms at offsets 0 and -1
//! entailing a consequent, by default `bad_move(t+1) = 1`. The rejected
//! output vectors stored in each step are the positive examples; the
//! accepted output of the same step is the negative one. Shorter
//! implications are preferred: any rule whose antecedent strictly contains
//! a surviving rule's antecedent is dropped.

use crate::signal::{Scalar, ScalarKind, SignalValue, VectorSchema};
use crate::trace::Life;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    Eq,
    Ne,
}

impl Relation {
    fn as_str(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Ne => "!=",
        }
    }
}

/// One condition: a signal at this step (offset 0) or the previous step
/// (offset -1) compared with a concrete value. Undef satisfies nothing.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub signal: String,
    pub offset: i8,
    pub relation: Relation,
    pub value: Scalar,
}

impl std::fmt::Display for Atom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}(t{}){}{}",
            self.signal,
            if self.offset == 0 { "" } else { "-1" },
            self.relation.as_str(),
            self.value
        )
    }
}

/// What the antecedent predicts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Consequent {
    /// The candidate output is an incorrect move.
    BadMove,
    /// Experimental: the named input signal takes this value at t+1.
    NextInput { signal: String, value: Scalar },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Implication {
    pub antecedent: Vec<Atom>,
    pub consequent: Consequent,
    pub support: u64,
    pub violations: u64,
}

impl Implication {
    pub fn violation_rate(&self) -> f64 {
        if self.support == 0 {
            0.0
        } else {
            self.violations as f64 / self.support as f64
        }
    }
}

impl std::fmt::Display for Implication {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let atoms: Vec<String> = self.antecedent.iter().map(|a| a.to_string()).collect();
        let then = match &self.consequent {
            Consequent::BadMove => "bad_move(t+1)=1".to_string(),
            Consequent::NextInput { signal, value } => format!("{signal}(t+1)={value}"),
        };
        write!(
            f,
            "{} => {}  [support {}, violations {}]",
            atoms.join(", "),
            then,
            self.support,
            self.violations
        )
    }
}

#[derive(Debug, Clone)]
pub struct MinerConfig {
    pub max_atoms: usize,
    pub min_support: u64,
    pub max_violation_rate: f64,
    /// Mine next-input rules instead of bad-move rules. Experimental.
    pub next_input_consequents: bool,
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig {
            max_atoms: 2,
            min_support: 20,
            max_violation_rate: 0.0,
            next_input_consequents: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum MinerError {
    #[error("cannot mine an empty life")]
    EmptyLife,
    #[error("unknown signal '{0}'")]
    UnknownSignal(String),
    #[error("implications need at least one atom")]
    EmptyAntecedent,
    #[error("bad rule document: {0}")]
    BadRule(String),
}

// Atoms resolved against a schema, ordered canonically: inputs before
// outputs, then signal index, offset 0 before -1, relation, value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum SignalRef {
    Input(usize),
    Output(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ResolvedAtom {
    signal: SignalRef,
    offset: i8,
    relation: Relation,
    value: Scalar,
}

fn scalar_order_key(s: &Scalar) -> (u8, u64) {
    match s {
        Scalar::Bool(b) => (0, *b as u64),
        Scalar::Finite(v) => (1, *v),
        Scalar::Int(v) => (2, *v as u64),
        Scalar::Real(v) => (3, v.to_bits()),
    }
}

impl PartialOrd for ResolvedAtom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ResolvedAtom {
    fn cmp(&self, other: &Self) -> Ordering {
        (
            self.signal,
            -self.offset,
            self.relation,
            scalar_order_key(&self.value),
        )
            .cmp(&(
                other.signal,
                -other.offset,
                other.relation,
                scalar_order_key(&other.value),
            ))
    }
}

fn resolve_atom(schema: &VectorSchema, atom: &Atom) -> Result<ResolvedAtom, MinerError> {
    let signal = if let Some(i) = schema.inputs.iter().position(|s| s.name == atom.signal) {
        SignalRef::Input(i)
    } else if let Some(i) = schema.outputs.iter().position(|s| s.name == atom.signal) {
        SignalRef::Output(i)
    } else {
        return Err(MinerError::UnknownSignal(atom.signal.clone()));
    };
    Ok(ResolvedAtom {
        signal,
        offset: atom.offset,
        relation: atom.relation,
        value: atom.value,
    })
}

fn unresolve_atom(schema: &VectorSchema, atom: &ResolvedAtom) -> Atom {
    let name = match atom.signal {
        SignalRef::Input(i) => schema.inputs[i].name.clone(),
        SignalRef::Output(i) => schema.outputs[i].name.clone(),
    };
    Atom {
        signal: name,
        offset: atom.offset,
        relation: atom.relation,
        value: atom.value,
    }
}

fn atom_matches_value(atom: &ResolvedAtom, value: SignalValue) -> bool {
    match value {
        SignalValue::Concrete(s) => match atom.relation {
            Relation::Eq => s == atom.value,
            Relation::Ne => s != atom.value,
        },
        // An unknown or absent value asserts nothing.
        SignalValue::Undef | SignalValue::Nothing => false,
    }
}

// One example: a candidate output at a step, labeled by whether the world
// rejected it.
struct Example<'a> {
    step: usize,
    candidate: &'a [SignalValue],
    bad_move: bool,
}

fn atom_matches_example(life: &Life, atom: &ResolvedAtom, ex: &Example<'_>) -> bool {
    let value = match (atom.signal, atom.offset) {
        (SignalRef::Input(i), 0) => life.steps[ex.step].input[i],
        (SignalRef::Output(i), 0) => ex.candidate[i],
        (SignalRef::Input(i), _) => {
            if ex.step == 0 {
                SignalValue::Undef
            } else {
                life.steps[ex.step - 1].input[i]
            }
        }
        (SignalRef::Output(i), _) => {
            if ex.step == 0 {
                SignalValue::Undef
            } else {
                life.steps[ex.step - 1].output[i]
            }
        }
    };
    atom_matches_value(atom, value)
}

fn bad_move_examples(life: &Life) -> Vec<Example<'_>> {
    let mut examples = Vec::new();
    for (t, step) in life.steps.iter().enumerate() {
        for attempt in &step.incorrect {
            examples.push(Example {
                step: t,
                candidate: attempt,
                bad_move: true,
            });
        }
        examples.push(Example {
            step: t,
            candidate: &step.output,
            bad_move: false,
        });
    }
    examples
}

// The enumerable atom universe over input and output signals. Boolean and
// two-valued signals only get equality atoms; x != 0 is already x = 1.
fn atom_universe(schema: &VectorSchema) -> Vec<ResolvedAtom> {
    let mut atoms = Vec::new();
    let mut push_for = |signal: SignalRef, kind: &ScalarKind| {
        let Some(values) = kind.domain_values() else {
            return; // unbounded signals are not enumerated
        };
        for offset in [0i8, -1] {
            for v in &values {
                atoms.push(ResolvedAtom {
                    signal,
                    offset,
                    relation: Relation::Eq,
                    value: *v,
                });
            }
            if values.len() > 2 {
                for v in &values {
                    atoms.push(ResolvedAtom {
                        signal,
                        offset,
                        relation: Relation::Ne,
                        value: *v,
                    });
                }
            }
        }
    };
    for (i, spec) in schema.inputs.iter().enumerate() {
        push_for(SignalRef::Input(i), &spec.kind);
    }
    for (i, spec) in schema.outputs.iter().enumerate() {
        push_for(SignalRef::Output(i), &spec.kind);
    }
    atoms.sort();
    atoms
}

struct SearchCtx<'a> {
    life: &'a Life,
    universe: Vec<ResolvedAtom>,
    examples: Vec<Example<'a>>,
    config: &'a MinerConfig,
}

// Depth-first enumeration of antecedents. Support is anti-monotone in the
// atom set, so any branch below min_support is pruned whole.
fn search(
    ctx: &SearchCtx<'_>,
    consequent_holds: &dyn Fn(&Example<'_>) -> bool,
    chosen: &mut Vec<usize>,
    matching: &[usize],
    start: usize,
    found: &mut Vec<(Vec<usize>, u64, u64)>,
) {
    for idx in start..ctx.universe.len() {
        let atom = &ctx.universe[idx];
        let narrowed: Vec<usize> = matching
            .iter()
            .copied()
            .filter(|&e| atom_matches_example(ctx.life, atom, &ctx.examples[e]))
            .collect();
        if (narrowed.len() as u64) < ctx.config.min_support {
            continue;
        }
        chosen.push(idx);
        let support = narrowed.len() as u64;
        let violations = narrowed
            .iter()
            .filter(|&&e| !consequent_holds(&ctx.examples[e]))
            .count() as u64;
        if violations as f64 <= ctx.config.max_violation_rate * support as f64 {
            found.push((chosen.clone(), support, violations));
        }
        if chosen.len() < ctx.config.max_atoms {
            search(ctx, consequent_holds, chosen, &narrowed, idx + 1, found);
        }
        chosen.pop();
    }
}

fn is_strict_superset(larger: &[usize], smaller: &[usize]) -> bool {
    larger.len() > smaller.len() && smaller.iter().all(|a| larger.contains(a))
}

/// Mine implications from a life. Returns minimal rules meeting the
/// support and violation-rate thresholds, sorted by atom count, violation
/// rate and support.
pub fn mine_implications(
    life: &Life,
    config: &MinerConfig,
) -> Result<Vec<Implication>, MinerError> {
    if life.is_empty() {
        return Err(MinerError::EmptyLife);
    }
    assert!(config.max_atoms >= 1, "max_atoms must be >= 1");

    let universe = atom_universe(&life.schema);
    let mut results: Vec<(Vec<usize>, Consequent, u64, u64)> = Vec::new();

    if config.next_input_consequents {
        // Accepted steps that have a successor; the consequent looks one
        // step ahead in the recorded inputs.
        let examples: Vec<Example<'_>> = life
            .steps
            .iter()
            .enumerate()
            .filter(|(t, _)| t + 1 < life.steps.len())
            .map(|(t, step)| Example {
                step: t,
                candidate: &step.output,
                bad_move: false,
            })
            .collect();
        let ctx = SearchCtx {
            life,
            universe: universe.clone(),
            examples,
            config,
        };
        let all: Vec<usize> = (0..ctx.examples.len()).collect();
        for (i, spec) in life.schema.inputs.iter().enumerate() {
            let Some(values) = spec.kind.domain_values() else {
                continue;
            };
            for value in values {
                let holds = |ex: &Example<'_>| {
                    life.steps[ex.step + 1].input[i] == SignalValue::Concrete(value)
                };
                let mut found = Vec::new();
                search(&ctx, &holds, &mut Vec::new(), &all, 0, &mut found);
                let consequent = Consequent::NextInput {
                    signal: spec.name.clone(),
                    value,
                };
                results.extend(
                    found
                        .into_iter()
                        .map(|(atoms, s, v)| (atoms, consequent.clone(), s, v)),
                );
            }
        }
    } else {
        let examples = bad_move_examples(life);
        let ctx = SearchCtx {
            life,
            universe: universe.clone(),
            examples,
            config,
        };
        let all: Vec<usize> = (0..ctx.examples.len()).collect();
        let holds = |ex: &Example<'_>| ex.bad_move;
        let mut found = Vec::new();
        search(&ctx, &holds, &mut Vec::new(), &all, 0, &mut found);
        results.extend(
            found
                .into_iter()
                .map(|(atoms, s, v)| (atoms, Consequent::BadMove, s, v)),
        );
    }

    // Minimality: drop any rule whose antecedent strictly contains a kept
    // rule's antecedent with the same consequent.
    results.sort_by_key(|r| r.0.len());
    let mut kept: Vec<(Vec<usize>, Consequent, u64, u64)> = Vec::new();
    for candidate in results {
        let subsumed = kept
            .iter()
            .any(|k| k.1 == candidate.1 && is_strict_superset(&candidate.0, &k.0));
        if !subsumed {
            kept.push(candidate);
        }
    }

    let mut implications: Vec<Implication> = kept
        .into_iter()
        .map(|(atoms, consequent, support, violations)| Implication {
            antecedent: atoms
                .iter()
                .map(|&i| unresolve_atom(&life.schema, &universe[i]))
                .collect(),
            consequent,
            support,
            violations,
        })
        .collect();
    implications.sort_by(|a, b| {
        a.antecedent
            .len()
            .cmp(&b.antecedent.len())
            .then(
                a.violation_rate()
                    .partial_cmp(&b.violation_rate())
                    .unwrap_or(Ordering::Equal),
            )
            .then(b.support.cmp(&a.support))
            .then_with(|| format!("{a}").cmp(&format!("{b}")))
    });
    Ok(implications)
}

/// Recount one implication's support and violations by a full scan with
/// the same matching semantics as the miner.
pub fn evaluate_implication(imp: &Implication, life: &Life) -> Result<(u64, u64), MinerError> {
    if imp.antecedent.is_empty() {
        return Err(MinerError::EmptyAntecedent);
    }
    let resolved: Vec<ResolvedAtom> = imp
        .antecedent
        .iter()
        .map(|a| resolve_atom(&life.schema, a))
        .collect::<Result<_, _>>()?;

    let mut support = 0;
    let mut violations = 0;
    match &imp.consequent {
        Consequent::BadMove => {
            for ex in bad_move_examples(life) {
                if resolved.iter().all(|a| atom_matches_example(life, a, &ex)) {
                    support += 1;
                    if !ex.bad_move {
                        violations += 1;
                    }
                }
            }
        }
        Consequent::NextInput { signal, value } => {
            let idx = life
                .schema
                .inputs
                .iter()
                .position(|s| &s.name == signal)
                .ok_or_else(|| MinerError::UnknownSignal(signal.clone()))?;
            for (t, step) in life.steps.iter().enumerate() {
                if t + 1 >= life.steps.len() {
                    break;
                }
                let ex = Example {
                    step: t,
                    candidate: &step.output,
                    bad_move: false,
                };
                if resolved.iter().all(|a| atom_matches_example(life, a, &ex)) {
                    support += 1;
                    if life.steps[t + 1].input[idx] != SignalValue::Concrete(*value) {
                        violations += 1;
                    }
                }
            }
        }
    }
    Ok((support, violations))
}

/// The last-two-step snapshot a prediction is made against. Unknown parts
/// read as Undef, which satisfies no atom.
#[derive(Debug, Clone, Default)]
pub struct StepWindow<'a> {
    pub inputs_now: Option<&'a [SignalValue]>,
    pub inputs_prev: Option<&'a [SignalValue]>,
    pub output_prev: Option<&'a [SignalValue]>,
}

/// True iff some zero-violation bad-move rule fires on the window plus the
/// candidate output.
pub fn predict_incorrect(
    imps: &[Implication],
    schema: &VectorSchema,
    window: &StepWindow<'_>,
    candidate: &[SignalValue],
) -> bool {
    let lookup = |atom: &ResolvedAtom| -> SignalValue {
        let slot = match (atom.signal, atom.offset) {
            (SignalRef::Input(i), 0) => window.inputs_now.and_then(|v| v.get(i)),
            (SignalRef::Input(i), _) => window.inputs_prev.and_then(|v| v.get(i)),
            (SignalRef::Output(i), 0) => candidate.get(i),
            (SignalRef::Output(i), _) => window.output_prev.and_then(|v| v.get(i)),
        };
        slot.copied().unwrap_or(SignalValue::Undef)
    };
    imps.iter()
        .filter(|imp| imp.violations == 0 && imp.consequent == Consequent::BadMove)
        .any(|imp| {
            imp.antecedent
                .iter()
                .all(|atom| match resolve_atom(schema, atom) {
                    Ok(resolved) => atom_matches_value(&resolved, lookup(&resolved)),
                    Err(_) => false,
                })
        })
}

// Rule documents: one JSON object per line.

#[derive(Serialize, Deserialize)]
struct AtomDoc {
    sig: String,
    off: i8,
    rel: String,
    val: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
struct RuleDoc {
    #[serde(rename = "if")]
    antecedent: Vec<AtomDoc>,
    then: AtomDoc,
    support: u64,
    violations: u64,
}

fn scalar_to_json(s: &Scalar) -> serde_json::Value {
    crate::trace::value_to_json(&SignalValue::Concrete(*s))
}

pub fn rules_to_jsonl(imps: &[Implication]) -> String {
    let mut out = String::new();
    for imp in imps {
        let doc = RuleDoc {
            antecedent: imp
                .antecedent
                .iter()
                .map(|a| AtomDoc {
                    sig: a.signal.clone(),
                    off: a.offset,
                    rel: a.relation.as_str().to_string(),
                    val: scalar_to_json(&a.value),
                })
                .collect(),
            then: match &imp.consequent {
                Consequent::BadMove => AtomDoc {
                    sig: "bad_move".to_string(),
                    off: 1,
                    rel: "=".to_string(),
                    val: serde_json::json!(1),
                },
                Consequent::NextInput { signal, value } => AtomDoc {
                    sig: signal.clone(),
                    off: 1,
                    rel: "=".to_string(),
                    val: scalar_to_json(value),
                },
            },
            support: imp.support,
            violations: imp.violations,
        };
        out.push_str(&serde_json::to_string(&doc).expect("rule serializes"));
        out.push('\n');
    }
    out
}

pub fn rules_from_jsonl(text: &str, schema: &VectorSchema) -> Result<Vec<Implication>, MinerError> {
    let parse_scalar = |sig: &str, val: &serde_json::Value| -> Result<Scalar, MinerError> {
        let spec = schema
            .find(sig)
            .ok_or_else(|| MinerError::UnknownSignal(sig.to_string()))?;
        crate::trace::value_from_json(spec, val)
            .map_err(MinerError::BadRule)?
            .concrete()
            .ok_or_else(|| MinerError::BadRule(format!("non-concrete value for '{sig}'")))
    };
    let mut rules = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let doc: RuleDoc = serde_json::from_str(line)
            .map_err(|e| MinerError::BadRule(format!("line {}: {e}", i + 1)))?;
        if doc.antecedent.is_empty() {
            return Err(MinerError::EmptyAntecedent);
        }
        let antecedent = doc
            .antecedent
            .iter()
            .map(|a| {
                let relation = match a.rel.as_str() {
                    "=" => Relation::Eq,
                    "!=" => Relation::Ne,
                    other => return Err(MinerError::BadRule(format!("relation '{other}'"))),
                };
                Ok(Atom {
                    signal: a.sig.clone(),
                    offset: a.off,
                    relation,
                    value: parse_scalar(&a.sig, &a.val)?,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let consequent = if doc.then.sig == "bad_move" {
            Consequent::BadMove
        } else {
            Consequent::NextInput {
                signal: doc.then.sig.clone(),
                value: parse_scalar(&doc.then.sig, &doc.then.val)?,
            }
        };
        rules.push(Implication {
            antecedent,
            consequent,
            support: doc.support,
            violations: doc.violations,
        });
    }
    Ok(rules)
}
