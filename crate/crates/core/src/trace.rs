//! Life traces and their JSON-lines persistence.
//!
//! A life is the recorded history of one episode: per accepted step the
//! input vector, the set of rejected output vectors, the accepted output
//! and the reward vector. Rejected moves never advance time. The file
//! format is line-oriented: a header line, one line per step, then any
//! revision lines and an optional death line, with stable field order so
//! equal lives serialize to identical bytes.

use crate::signal::{
    validate_value, validate_vector, Scalar, ScalarKind, SignalSpec, SignalValue, VectorSchema,
};
use crate::success::RewardStream;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use thiserror::Error;

pub const TRACE_VERSION: u64 = 1;

/// Where a trace came from and how to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub world: String,
    pub agent: String,
    pub world_seed: u64,
    pub agent_seed: u64,
    pub config: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub world_spec: Option<Value>,
}

impl Metadata {
    pub fn new(world: &str, agent: &str, world_seed: u64, agent_seed: u64) -> Self {
        Metadata {
            world: world.to_string(),
            agent: agent.to_string(),
            world_seed,
            agent_seed,
            config: json!({}),
            world_spec: None,
        }
    }
}

/// One accepted step of a life.
#[derive(Debug, Clone, PartialEq)]
pub struct LifeStep {
    pub t: u64,
    pub input: Vec<SignalValue>,
    /// Output vectors rejected at this step, in the order they were tried.
    pub incorrect: Vec<Vec<SignalValue>>,
    pub output: Vec<SignalValue>,
    pub reward: Vec<SignalValue>,
}

/// Post-hoc resolution of a value that was Undef when recorded. The stored
/// step keeps the Undef; readers consult revisions.
#[derive(Debug, Clone, PartialEq)]
pub struct Revision {
    pub t: u64,
    pub signal: String,
    pub new: Scalar,
}

/// The recorded history of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Life {
    pub schema: VectorSchema,
    pub metadata: Metadata,
    pub steps: Vec<LifeStep>,
    pub revisions: Vec<Revision>,
    /// Time at which the world was found dead (no correct move left).
    pub death: Option<u64>,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported trace version {found} (expected {TRACE_VERSION})")]
    FormatVersionMismatch { found: u64 },
    #[error("corrupt trace at line {line}: {reason}")]
    CorruptTrace { line: usize, reason: String },
    #[error("revision at t={t} for '{signal}': {reason}")]
    BadRevision {
        t: u64,
        signal: String,
        reason: String,
    },
}

impl Life {
    pub fn new(schema: VectorSchema, metadata: Metadata) -> Self {
        Life {
            schema,
            metadata,
            steps: Vec::new(),
            revisions: Vec::new(),
            death: None,
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn push_step(&mut self, step: LifeStep) {
        debug_assert_eq!(step.t as usize, self.steps.len(), "time must advance by 1");
        self.steps.push(step);
    }

    /// Record that a previously-Undef input value has been resolved.
    pub fn apply_revision(&mut self, t: u64, signal: &str, new: Scalar) -> Result<(), TraceError> {
        let bad = |reason: &str| TraceError::BadRevision {
            t,
            signal: signal.to_string(),
            reason: reason.to_string(),
        };
        let idx = self
            .schema
            .inputs
            .iter()
            .position(|s| s.name == signal)
            .ok_or_else(|| bad("not an input signal"))?;
        let step = self
            .steps
            .get(t as usize)
            .ok_or_else(|| bad("no such step"))?;
        if !step.input[idx].is_undef() {
            return Err(bad("recorded value was not Undef"));
        }
        validate_value(&self.schema.inputs[idx], SignalValue::Concrete(new))
            .map_err(|e| bad(&e.to_string()))?;
        self.revisions.push(Revision {
            t,
            signal: signal.to_string(),
            new,
        });
        Ok(())
    }

    /// Input value at (t, signal) with any revision applied.
    pub fn resolved_input(&self, t: u64, signal: &str) -> Option<SignalValue> {
        let idx = self.schema.inputs.iter().position(|s| s.name == signal)?;
        let recorded = self.steps.get(t as usize)?.input[idx];
        if recorded.is_undef() {
            if let Some(rev) = self
                .revisions
                .iter()
                .rev()
                .find(|r| r.t == t && r.signal == signal)
            {
                return Some(SignalValue::Concrete(rev.new));
            }
        }
        Some(recorded)
    }

    /// The reward vectors of this life as a stream for success evaluation.
    pub fn reward_stream(&self) -> RewardStream {
        RewardStream::new(
            self.schema.rewards.clone(),
            self.steps.iter().map(|s| s.reward.clone()).collect(),
        )
        .expect("recorded rewards conform to the schema")
    }
}

// Values are encoded against their spec: "U" for Undef, "N" for Nothing,
// numbers otherwise (booleans as 0/1).

pub fn value_to_json(value: &SignalValue) -> Value {
    match value {
        SignalValue::Undef => Value::String("U".to_string()),
        SignalValue::Nothing => Value::String("N".to_string()),
        SignalValue::Concrete(Scalar::Bool(b)) => json!(*b as u8),
        SignalValue::Concrete(Scalar::Finite(v)) => json!(v),
        SignalValue::Concrete(Scalar::Int(v)) => json!(v),
        SignalValue::Concrete(Scalar::Real(v)) => json!(v),
    }
}

pub fn value_from_json(spec: &SignalSpec, value: &Value) -> Result<SignalValue, String> {
    let raw = match value {
        Value::String(s) if s == "U" => SignalValue::Undef,
        Value::String(s) if s == "N" => SignalValue::Nothing,
        Value::Bool(b) => SignalValue::Concrete(Scalar::Bool(*b)),
        Value::Number(n) => {
            let scalar = match spec.kind {
                ScalarKind::Boolean => match n.as_u64() {
                    Some(0) => Scalar::Bool(false),
                    Some(1) => Scalar::Bool(true),
                    _ => return Err(format!("signal '{}': {n} is not a boolean", spec.name)),
                },
                ScalarKind::Finite { .. } => Scalar::Finite(
                    n.as_u64()
                        .ok_or_else(|| format!("signal '{}': {n} is not finite", spec.name))?,
                ),
                ScalarKind::Integer => Scalar::Int(
                    n.as_i64()
                        .ok_or_else(|| format!("signal '{}': {n} is not an integer", spec.name))?,
                ),
                ScalarKind::Real => Scalar::Real(
                    n.as_f64()
                        .ok_or_else(|| format!("signal '{}': {n} is not a real", spec.name))?,
                ),
            };
            SignalValue::Concrete(scalar)
        }
        other => return Err(format!("signal '{}': bad value {other}", spec.name)),
    };
    validate_value(spec, raw).map_err(|e| e.to_string())
}

pub fn vector_to_json(values: &[SignalValue]) -> Value {
    Value::Array(values.iter().map(value_to_json).collect())
}

pub fn vector_from_json(specs: &[SignalSpec], value: &Value) -> Result<Vec<SignalValue>, String> {
    let arr = value.as_array().ok_or("expected an array")?;
    if arr.len() != specs.len() {
        return Err(format!(
            "expected {} values, got {}",
            specs.len(),
            arr.len()
        ));
    }
    specs
        .iter()
        .zip(arr)
        .map(|(spec, v)| value_from_json(spec, v))
        .collect()
}

// Line documents, serialized in declaration order for stable bytes.

#[derive(Serialize)]
struct HeaderDoc<'a> {
    version: u64,
    schema: &'a VectorSchema,
    metadata: &'a Metadata,
}

#[derive(Serialize)]
struct StepDoc {
    t: u64,
    input: Value,
    incorrect: Vec<Value>,
    output: Value,
    reward: Value,
}

/// Serialize a life to its canonical JSONL text.
pub fn life_to_jsonl(life: &Life) -> String {
    let mut out = String::new();
    let header = HeaderDoc {
        version: TRACE_VERSION,
        schema: &life.schema,
        metadata: &life.metadata,
    };
    out.push_str(&serde_json::to_string(&header).expect("header serializes"));
    out.push('\n');
    for step in &life.steps {
        let line = StepDoc {
            t: step.t,
            input: vector_to_json(&step.input),
            incorrect: step.incorrect.iter().map(|v| vector_to_json(v)).collect(),
            output: vector_to_json(&step.output),
            reward: vector_to_json(&step.reward),
        };
        out.push_str(&serde_json::to_string(&line).expect("step serializes"));
        out.push('\n');
    }
    for rev in &life.revisions {
        let line = json!({
            "revision": {
                "t": rev.t,
                "signal": rev.signal,
                "new": value_to_json(&SignalValue::Concrete(rev.new)),
            }
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    if let Some(t) = life.death {
        out.push_str(&json!({"death": true, "t": t}).to_string());
        out.push('\n');
    }
    out
}

pub fn write_trace(life: &Life, path: &Path) -> Result<(), TraceError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(life_to_jsonl(life).as_bytes())?;
    w.flush()?;
    Ok(())
}

/// Parse a life from JSONL text, validating every vector against the
/// embedded schema and every structural invariant of the trace.
pub fn life_from_jsonl(text: &str) -> Result<Life, TraceError> {
    let corrupt = |line: usize, reason: String| TraceError::CorruptTrace { line, reason };
    let mut lines = text.lines().enumerate();

    let (_, header_line) = lines
        .next()
        .ok_or_else(|| corrupt(1, "empty trace".into()))?;
    let header: Value = serde_json::from_str(header_line).map_err(|e| corrupt(1, e.to_string()))?;
    let version = header
        .get("version")
        .and_then(Value::as_u64)
        .ok_or_else(|| corrupt(1, "missing version".into()))?;
    if version != TRACE_VERSION {
        return Err(TraceError::FormatVersionMismatch { found: version });
    }
    let schema: VectorSchema = serde_json::from_value(
        header
            .get("schema")
            .cloned()
            .ok_or_else(|| corrupt(1, "missing schema".into()))?,
    )
    .map_err(|e| corrupt(1, e.to_string()))?;
    let metadata: Metadata = serde_json::from_value(
        header
            .get("metadata")
            .cloned()
            .ok_or_else(|| corrupt(1, "missing metadata".into()))?,
    )
    .map_err(|e| corrupt(1, e.to_string()))?;

    let mut life = Life::new(schema, metadata);
    for (idx, raw) in lines {
        let line_no = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let value: Value =
            serde_json::from_str(raw).map_err(|e| corrupt(line_no, e.to_string()))?;
        if value.get("death").is_some() {
            let t = value
                .get("t")
                .and_then(Value::as_u64)
                .ok_or_else(|| corrupt(line_no, "death line missing t".into()))?;
            life.death = Some(t);
        } else if let Some(rev) = value.get("revision") {
            let t = rev
                .get("t")
                .and_then(Value::as_u64)
                .ok_or_else(|| corrupt(line_no, "revision missing t".into()))?;
            let signal = rev
                .get("signal")
                .and_then(Value::as_str)
                .ok_or_else(|| corrupt(line_no, "revision missing signal".into()))?
                .to_string();
            let spec = life
                .schema
                .find(&signal)
                .ok_or_else(|| corrupt(line_no, format!("unknown signal '{signal}'")))?
                .clone();
            let new = value_from_json(
                &spec,
                rev.get("new")
                    .ok_or_else(|| corrupt(line_no, "revision missing new".into()))?,
            )
            .map_err(|e| corrupt(line_no, e))?
            .concrete()
            .ok_or_else(|| corrupt(line_no, "revision value must be concrete".into()))?;
            life.apply_revision(t, &signal, new)
                .map_err(|e| corrupt(line_no, e.to_string()))?;
        } else if value.get("t").is_some() {
            let t = value.get("t").and_then(Value::as_u64).unwrap();
            if t as usize != life.steps.len() {
                return Err(corrupt(
                    line_no,
                    format!("expected t={}, got t={t}", life.steps.len()),
                ));
            }
            let field = |name: &str| -> Result<&Value, TraceError> {
                value
                    .get(name)
                    .ok_or_else(|| corrupt(line_no, format!("step missing '{name}'")))
            };
            let input = vector_from_json(&life.schema.inputs, field("input")?)
                .map_err(|e| corrupt(line_no, e))?;
            let output = vector_from_json(&life.schema.outputs, field("output")?)
                .map_err(|e| corrupt(line_no, e))?;
            let reward = vector_from_json(&life.schema.rewards, field("reward")?)
                .map_err(|e| corrupt(line_no, e))?;
            let incorrect_raw = field("incorrect")?
                .as_array()
                .ok_or_else(|| corrupt(line_no, "incorrect must be an array".into()))?;
            let mut incorrect = Vec::with_capacity(incorrect_raw.len());
            for item in incorrect_raw {
                let v = vector_from_json(&life.schema.outputs, item)
                    .map_err(|e| corrupt(line_no, e))?;
                if incorrect.contains(&v) {
                    return Err(corrupt(line_no, "duplicate output in incorrect set".into()));
                }
                incorrect.push(v);
            }
            life.steps.push(LifeStep {
                t,
                input,
                incorrect,
                output,
                reward,
            });
        } else {
            return Err(corrupt(line_no, "unrecognized trace line".into()));
        }
    }
    Ok(life)
}

pub fn read_trace(path: &Path) -> Result<Life, TraceError> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    life_from_jsonl(&text)
}

// Validate a freshly built step against the schema; used by the session.
pub(crate) fn check_step(schema: &VectorSchema, step: &LifeStep) -> Result<(), String> {
    validate_vector(&schema.inputs, &step.input).map_err(|e| e.to_string())?;
    validate_vector(&schema.outputs, &step.output).map_err(|e| e.to_string())?;
    validate_vector(&schema.rewards, &step.reward).map_err(|e| e.to_string())?;
    for v in &step.incorrect {
        validate_vector(&schema.outputs, v).map_err(|e| e.to_string())?;
    }
    Ok(())
}
