//! Signal substrate: scalar kinds, the Undef/Nothing symbols, per-signal
//! specs, vector schemas and time-indexed series.
//!
//! Every other module builds on these types. The one rule worth keeping in
//! mind: Nothing is identical to zero on input, output and internal signals,
//! but a distinct symbol on reward signals (it is excluded from averages).

use serde::{Deserialize, Serialize};
use std::fmt;
use std::hash::{Hash, Hasher};
use thiserror::Error;

/// The declared value domain of a signal. Fixed for the signal's lifetime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarKind {
    /// Two values, 0 and 1.
    Boolean,
    /// `cardinality` values, `0..cardinality-1`.
    Finite { cardinality: u64 },
    /// 64-bit signed integer.
    Integer,
    /// 64-bit machine real.
    Real,
}

impl ScalarKind {
    pub fn finite(cardinality: u64) -> Self {
        assert!(cardinality >= 1, "finite kind needs cardinality >= 1");
        ScalarKind::Finite { cardinality }
    }

    /// Number of distinct concrete values, when the kind is enumerable.
    pub fn domain_size(&self) -> Option<u64> {
        match self {
            ScalarKind::Boolean => Some(2),
            ScalarKind::Finite { cardinality } => Some(*cardinality),
            ScalarKind::Integer | ScalarKind::Real => None,
        }
    }

    /// All concrete values of an enumerable kind, in canonical order.
    pub fn domain_values(&self) -> Option<Vec<Scalar>> {
        match self {
            ScalarKind::Boolean => Some(vec![Scalar::Bool(false), Scalar::Bool(true)]),
            ScalarKind::Finite { cardinality } => {
                Some((0..*cardinality).map(Scalar::Finite).collect())
            }
            ScalarKind::Integer | ScalarKind::Real => None,
        }
    }

    /// The zero scalar of this kind (what Nothing normalizes to).
    pub fn zero(&self) -> Scalar {
        match self {
            ScalarKind::Boolean => Scalar::Bool(false),
            ScalarKind::Finite { .. } => Scalar::Finite(0),
            ScalarKind::Integer => Scalar::Int(0),
            ScalarKind::Real => Scalar::Real(0.0),
        }
    }
}

/// One concrete scalar. Equality and hashing on `Real` use the raw bit
/// pattern so that traces and move sets stay deterministic.
#[derive(Debug, Clone, Copy)]
pub enum Scalar {
    Bool(bool),
    Finite(u64),
    Int(i64),
    Real(f64),
}

impl Scalar {
    /// Numeric view used by averaging and by implication atoms.
    pub fn as_f64(&self) -> f64 {
        match self {
            Scalar::Bool(b) => {
                if *b {
                    1.0
                } else {
                    0.0
                }
            }
            Scalar::Finite(v) => *v as f64,
            Scalar::Int(v) => *v as f64,
            Scalar::Real(v) => *v,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Bool(b) => !*b,
            Scalar::Finite(v) => *v == 0,
            Scalar::Int(v) => *v == 0,
            Scalar::Real(v) => v.to_bits() == 0.0f64.to_bits(),
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Bool(a), Scalar::Bool(b)) => a == b,
            (Scalar::Finite(a), Scalar::Finite(b)) => a == b,
            (Scalar::Int(a), Scalar::Int(b)) => a == b,
            (Scalar::Real(a), Scalar::Real(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}

impl Eq for Scalar {}

impl Hash for Scalar {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Scalar::Bool(b) => (0u8, *b as u64).hash(state),
            Scalar::Finite(v) => (1u8, *v).hash(state),
            Scalar::Int(v) => (2u8, *v as u64).hash(state),
            Scalar::Real(v) => (3u8, v.to_bits()).hash(state),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Bool(b) => write!(f, "{}", *b as u8),
            Scalar::Finite(v) => write!(f, "{v}"),
            Scalar::Int(v) => write!(f, "{v}"),
            Scalar::Real(v) => write!(f, "{v}"),
        }
    }
}

/// A signal value at one time step: a concrete scalar, or one of the two
/// special symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignalValue {
    Concrete(Scalar),
    /// Unknown value. Legal on input and internal signals only.
    Undef,
    /// "No value / no event". Identical to zero except on reward signals.
    Nothing,
}

impl SignalValue {
    pub fn concrete(&self) -> Option<Scalar> {
        match self {
            SignalValue::Concrete(s) => Some(*s),
            _ => None,
        }
    }

    pub fn is_nothing(&self) -> bool {
        matches!(self, SignalValue::Nothing)
    }

    pub fn is_undef(&self) -> bool {
        matches!(self, SignalValue::Undef)
    }
}

impl fmt::Display for SignalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignalValue::Concrete(s) => write!(f, "{s}"),
            SignalValue::Undef => write!(f, "U"),
            SignalValue::Nothing => write!(f, "N"),
        }
    }
}

impl From<Scalar> for SignalValue {
    fn from(s: Scalar) -> Self {
        SignalValue::Concrete(s)
    }
}

/// The four signal roles. Input and reward signals are what the device
/// receives; output signals are what it emits; internal signals are derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalRole {
    Input,
    Output,
    Reward,
    Internal,
}

/// Declaration of one signal: name, kind, role and symbol permissions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignalSpec {
    pub name: String,
    pub kind: ScalarKind,
    pub role: SignalRole,
    pub allows_undef: bool,
    pub allows_nothing: bool,
}

impl SignalSpec {
    /// Input signal; accepts Undef and Nothing by default.
    pub fn input(name: &str, kind: ScalarKind) -> Self {
        SignalSpec {
            name: name.to_string(),
            kind,
            role: SignalRole::Input,
            allows_undef: true,
            allows_nothing: true,
        }
    }

    /// Output signal; Undef never participates in outputs.
    pub fn output(name: &str, kind: ScalarKind) -> Self {
        SignalSpec {
            name: name.to_string(),
            kind,
            role: SignalRole::Output,
            allows_undef: false,
            allows_nothing: true,
        }
    }

    /// Reward signal; Nothing is always a legal (and distinct) value here.
    pub fn reward(name: &str, kind: ScalarKind) -> Self {
        SignalSpec {
            name: name.to_string(),
            kind,
            role: SignalRole::Reward,
            allows_undef: false,
            allows_nothing: true,
        }
    }

    pub fn internal(name: &str, kind: ScalarKind) -> Self {
        SignalSpec {
            name: name.to_string(),
            kind,
            role: SignalRole::Internal,
            allows_undef: true,
            allows_nothing: true,
        }
    }
}

/// Why a value was rejected against its spec.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignalError {
    #[error("signal '{signal}': value {value} outside declared kind {kind:?}")]
    KindMismatch {
        signal: String,
        kind: ScalarKind,
        value: String,
    },
    #[error("signal '{signal}': Undef is not permitted here")]
    ForbiddenUndef { signal: String },
    #[error("signal '{signal}': Nothing is not permitted here")]
    ForbiddenNothing { signal: String },
    #[error("vector has {got} values but schema section has {want} signals")]
    ArityMismatch { want: usize, got: usize },
    #[error("duplicate signal name '{0}' in schema")]
    DuplicateName(String),
}

/// Check a value against a spec. For non-reward signals Nothing is
/// normalized to the kind's zero; reward signals keep it symbolic.
pub fn validate_value(spec: &SignalSpec, value: SignalValue) -> Result<SignalValue, SignalError> {
    match value {
        SignalValue::Undef => {
            if spec.allows_undef {
                Ok(SignalValue::Undef)
            } else {
                Err(SignalError::ForbiddenUndef {
                    signal: spec.name.clone(),
                })
            }
        }
        SignalValue::Nothing => {
            if !spec.allows_nothing {
                Err(SignalError::ForbiddenNothing {
                    signal: spec.name.clone(),
                })
            } else if spec.role == SignalRole::Reward {
                Ok(SignalValue::Nothing)
            } else {
                Ok(SignalValue::Concrete(spec.kind.zero()))
            }
        }
        SignalValue::Concrete(s) => {
            let ok = match (spec.kind, s) {
                (ScalarKind::Boolean, Scalar::Bool(_)) => true,
                (ScalarKind::Finite { cardinality }, Scalar::Finite(v)) => v < cardinality,
                (ScalarKind::Integer, Scalar::Int(_)) => true,
                (ScalarKind::Real, Scalar::Real(v)) => v.is_finite(),
                _ => false,
            };
            if ok {
                Ok(value)
            } else {
                Err(SignalError::KindMismatch {
                    signal: spec.name.clone(),
                    kind: spec.kind,
                    value: format!("{s}"),
                })
            }
        }
    }
}

/// Validate a whole vector against an ordered spec list.
pub fn validate_vector(
    specs: &[SignalSpec],
    values: &[SignalValue],
) -> Result<Vec<SignalValue>, SignalError> {
    if specs.len() != values.len() {
        return Err(SignalError::ArityMismatch {
            want: specs.len(),
            got: values.len(),
        });
    }
    specs
        .iter()
        .zip(values)
        .map(|(spec, v)| validate_value(spec, *v))
        .collect()
}

/// The all-Nothing vector for a spec list, normalized per role: zeros on
/// non-reward signals, the Nothing symbol on reward signals.
pub fn nothing_vector(specs: &[SignalSpec]) -> Vec<SignalValue> {
    specs
        .iter()
        .map(|spec| {
            if spec.role == SignalRole::Reward {
                SignalValue::Nothing
            } else {
                SignalValue::Concrete(spec.kind.zero())
            }
        })
        .collect()
}

/// Ordered signal declarations for one world: inputs, outputs, and rewards
/// by descending priority (index 0 is the highest level).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorSchema {
    pub inputs: Vec<SignalSpec>,
    pub outputs: Vec<SignalSpec>,
    pub rewards: Vec<SignalSpec>,
}

impl VectorSchema {
    pub fn new(
        inputs: Vec<SignalSpec>,
        outputs: Vec<SignalSpec>,
        rewards: Vec<SignalSpec>,
    ) -> Result<Self, SignalError> {
        let schema = VectorSchema {
            inputs,
            outputs,
            rewards,
        };
        let mut seen = std::collections::HashSet::new();
        for spec in schema.all_signals() {
            if !seen.insert(spec.name.clone()) {
                return Err(SignalError::DuplicateName(spec.name.clone()));
            }
        }
        debug_assert!(schema.outputs.iter().all(|s| !s.allows_undef));
        debug_assert!(schema.rewards.iter().all(|s| s.allows_nothing));
        Ok(schema)
    }

    /// Number of reward priority levels (N).
    pub fn priority_count(&self) -> usize {
        self.rewards.len()
    }

    pub fn all_signals(&self) -> impl Iterator<Item = &SignalSpec> {
        self.inputs
            .iter()
            .chain(self.outputs.iter())
            .chain(self.rewards.iter())
    }

    pub fn find(&self, name: &str) -> Option<&SignalSpec> {
        self.all_signals().find(|s| s.name == name)
    }
}

/// A signal as a function of time: one spec plus its recorded values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalSeries {
    pub spec: SignalSpec,
    pub values: Vec<SignalValue>,
}

impl SignalSeries {
    pub fn new(spec: SignalSpec, values: Vec<SignalValue>) -> Result<Self, SignalError> {
        for v in &values {
            validate_value(&spec, *v)?;
        }
        Ok(SignalSeries { spec, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Derive the memory signal "this signal k steps ago". Steps before birth
/// read Undef. The derived signal is internal and accepts Undef.
pub fn shift_signal(series: &SignalSeries, k: usize) -> SignalSeries {
    assert!(k >= 1, "shift_signal requires k >= 1");
    let mut spec = series.spec.clone();
    spec.name = format!("{}_lag{}", spec.name, k);
    spec.role = SignalRole::Internal;
    spec.allows_undef = true;
    let mut values = vec![SignalValue::Undef; k.min(series.values.len())];
    if series.values.len() > k {
        values.extend_from_slice(&series.values[..series.values.len() - k]);
    }
    SignalSeries { spec, values }
}

// Schema document (de)serialization. The on-disk form groups specs by role
// and spells the kind as "bool" | "finite" | "int" | "real" with an optional
// "k" for finite cardinalities.

#[derive(Serialize, Deserialize)]
struct SpecDoc {
    name: String,
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<u64>,
    allows_undef: bool,
    allows_nothing: bool,
}

#[derive(Serialize, Deserialize)]
struct SchemaDoc {
    inputs: Vec<SpecDoc>,
    outputs: Vec<SpecDoc>,
    rewards: Vec<SpecDoc>,
}

fn spec_to_doc(spec: &SignalSpec) -> SpecDoc {
    let (kind, k) = match spec.kind {
        ScalarKind::Boolean => ("bool", None),
        ScalarKind::Finite { cardinality } => ("finite", Some(cardinality)),
        ScalarKind::Integer => ("int", None),
        ScalarKind::Real => ("real", None),
    };
    SpecDoc {
        name: spec.name.clone(),
        kind: kind.to_string(),
        k,
        allows_undef: spec.allows_undef,
        allows_nothing: spec.allows_nothing,
    }
}

fn spec_from_doc(doc: &SpecDoc, role: SignalRole) -> Result<SignalSpec, String> {
    let kind = match doc.kind.as_str() {
        "bool" => ScalarKind::Boolean,
        "finite" => {
            let k = doc
                .k
                .ok_or_else(|| format!("signal '{}': finite kind needs k", doc.name))?;
            if k == 0 {
                return Err(format!("signal '{}': finite kind needs k >= 1", doc.name));
            }
            ScalarKind::Finite { cardinality: k }
        }
        "int" => ScalarKind::Integer,
        "real" => ScalarKind::Real,
        other => return Err(format!("signal '{}': unknown kind '{other}'", doc.name)),
    };
    Ok(SignalSpec {
        name: doc.name.clone(),
        kind,
        role,
        allows_undef: doc.allows_undef,
        allows_nothing: doc.allows_nothing,
    })
}

impl Serialize for VectorSchema {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let doc = SchemaDoc {
            inputs: self.inputs.iter().map(spec_to_doc).collect(),
            outputs: self.outputs.iter().map(spec_to_doc).collect(),
            rewards: self.rewards.iter().map(spec_to_doc).collect(),
        };
        doc.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for VectorSchema {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let doc = SchemaDoc::deserialize(deserializer)?;
        let conv = |docs: &[SpecDoc], role| -> Result<Vec<SignalSpec>, D::Error> {
            docs.iter()
                .map(|d| spec_from_doc(d, role).map_err(D::Error::custom))
                .collect()
        };
        VectorSchema::new(
            conv(&doc.inputs, SignalRole::Input)?,
            conv(&doc.outputs, SignalRole::Output)?,
            conv(&doc.rewards, SignalRole::Reward)?,
        )
        .map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite_input(k: u64) -> SignalSpec {
        SignalSpec::input("x", ScalarKind::finite(k))
    }

    #[test]
    fn validate_in_range_is_identity() {
        let spec = finite_input(3);
        let v = SignalValue::Concrete(Scalar::Finite(2));
        assert_eq!(validate_value(&spec, v).unwrap(), v);
    }

    #[test]
    fn validate_rejects_out_of_range_finite() {
        let spec = finite_input(3);
        let err = validate_value(&spec, SignalValue::Concrete(Scalar::Finite(3))).unwrap_err();
        assert!(matches!(err, SignalError::KindMismatch { .. }));
    }

    #[test]
    fn nothing_normalizes_to_zero_on_inputs() {
        let spec = finite_input(3);
        assert_eq!(
            validate_value(&spec, SignalValue::Nothing).unwrap(),
            SignalValue::Concrete(Scalar::Finite(0))
        );
    }

    #[test]
    fn undef_forbidden_on_outputs() {
        let spec = SignalSpec::output("do", ScalarKind::Boolean);
        let err = validate_value(&spec, SignalValue::Undef).unwrap_err();
        assert!(matches!(err, SignalError::ForbiddenUndef { .. }));
    }

    #[test]
    fn reward_nothing_stays_symbolic_and_differs_from_zero() {
        let spec = SignalSpec::reward("r", ScalarKind::finite(3));
        let v = validate_value(&spec, SignalValue::Nothing).unwrap();
        assert_eq!(v, SignalValue::Nothing);
        assert_ne!(v, SignalValue::Concrete(Scalar::Finite(0)));
    }

    #[test]
    fn validate_rejects_non_finite_real() {
        let spec = SignalSpec::input("r", ScalarKind::Real);
        assert!(validate_value(&spec, SignalValue::Concrete(Scalar::Real(f64::NAN))).is_err());
        assert!(validate_value(&spec, SignalValue::Concrete(Scalar::Real(f64::INFINITY))).is_err());
    }

    #[test]
    fn shift_pads_with_undef() {
        let spec = finite_input(10);
        let series = SignalSeries::new(
            spec,
            vec![
                SignalValue::Concrete(Scalar::Finite(5)),
                SignalValue::Concrete(Scalar::Finite(7)),
                SignalValue::Concrete(Scalar::Finite(9)),
            ],
        )
        .unwrap();
        let shifted = shift_signal(&series, 1);
        assert_eq!(
            shifted.values,
            vec![
                SignalValue::Undef,
                SignalValue::Concrete(Scalar::Finite(5)),
                SignalValue::Concrete(Scalar::Finite(7)),
            ]
        );
        assert_eq!(shifted.spec.role, SignalRole::Internal);
        assert!(shifted.spec.allows_undef);

        let all_undef = shift_signal(&series, 3);
        assert!(all_undef.values.iter().all(|v| v.is_undef()));
        assert_eq!(all_undef.len(), 3);
    }

    #[test]
    #[should_panic]
    fn shift_rejects_zero() {
        let series = SignalSeries::new(finite_input(2), vec![]).unwrap();
        let _ = shift_signal(&series, 0);
    }

    #[test]
    fn nothing_vector_zeroes_outputs_and_keeps_reward_symbolic() {
        let outs = vec![
            SignalSpec::output("vertical", ScalarKind::finite(3)),
            SignalSpec::output("horizontal", ScalarKind::finite(3)),
            SignalSpec::output("put_cross", ScalarKind::Boolean),
            SignalSpec::output("new_game", ScalarKind::Boolean),
        ];
        assert_eq!(
            nothing_vector(&outs),
            vec![
                SignalValue::Concrete(Scalar::Finite(0)),
                SignalValue::Concrete(Scalar::Finite(0)),
                SignalValue::Concrete(Scalar::Bool(false)),
                SignalValue::Concrete(Scalar::Bool(false)),
            ]
        );
        assert!(nothing_vector(&[]).is_empty());
        let rewards = vec![SignalSpec::reward("r", ScalarKind::finite(3))];
        assert_eq!(nothing_vector(&rewards), vec![SignalValue::Nothing]);
    }

    #[test]
    fn schema_rejects_duplicate_names() {
        let err = VectorSchema::new(
            vec![finite_input(2)],
            vec![SignalSpec::output("x", ScalarKind::Boolean)],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, SignalError::DuplicateName(_)));
    }

    #[test]
    fn schema_document_round_trips() {
        let schema = VectorSchema::new(
            vec![SignalSpec::input("cell", ScalarKind::finite(3))],
            vec![
                SignalSpec::output("vertical", ScalarKind::finite(3)),
                SignalSpec::output("put_cross", ScalarKind::Boolean),
            ],
            vec![SignalSpec::reward("game", ScalarKind::finite(3))],
        )
        .unwrap();
        let json = serde_json::to_string(&schema).unwrap();
        assert!(json.contains("\"kind\":\"finite\""));
        assert!(json.contains("\"k\":3"));
        let back: VectorSchema = serde_json::from_str(&json).unwrap();
        assert_eq!(back, schema);
        assert_eq!(back.priority_count(), 1);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_value(k: u64) -> impl Strategy<Value = SignalValue> {
            prop_oneof![
                (0..k).prop_map(|v| SignalValue::Concrete(Scalar::Finite(v))),
                Just(SignalValue::Undef),
                Just(SignalValue::Nothing),
            ]
        }

        proptest! {
            #[test]
            fn shift_matches_definition(values in proptest::collection::vec(arb_value(4), 0..40), k in 1usize..6) {
                let spec = SignalSpec::input("s", ScalarKind::finite(4));
                let normalized: Vec<_> = values
                    .iter()
                    .map(|v| validate_value(&spec, *v).unwrap())
                    .collect();
                let series = SignalSeries { spec, values: normalized.clone() };
                let shifted = shift_signal(&series, k);
                prop_assert_eq!(shifted.len(), series.len());
                for t in 0..series.len() {
                    if t < k {
                        prop_assert!(shifted.values[t].is_undef());
                    } else {
                        prop_assert_eq!(shifted.values[t], normalized[t - k]);
                    }
                }
            }

            #[test]
            fn validate_is_idempotent(v in arb_value(5)) {
                for spec in [
                    SignalSpec::input("i", ScalarKind::finite(5)),
                    SignalSpec::reward("r", ScalarKind::finite(5)),
                ] {
                    if let Ok(once) = validate_value(&spec, v) {
                        prop_assert_eq!(validate_value(&spec, once).unwrap(), once);
                    }
                }
            }

            #[test]
            fn nothing_equals_zero_except_on_rewards(k in 1u64..6) {
                for spec in [
                    SignalSpec::input("i", ScalarKind::finite(k)),
                    SignalSpec::output("o", ScalarKind::finite(k)),
                    SignalSpec::internal("m", ScalarKind::finite(k)),
                ] {
                    prop_assert_eq!(
                        validate_value(&spec, SignalValue::Nothing).unwrap(),
                        validate_value(&spec, SignalValue::Concrete(Scalar::Finite(0))).unwrap()
                    );
                }
                let reward = SignalSpec::reward("r", ScalarKind::finite(k));
                prop_assert_ne!(
                    validate_value(&reward, SignalValue::Nothing).unwrap(),
                    validate_value(&reward, SignalValue::Concrete(Scalar::Finite(0))).unwrap()
                );
            }
        }
    }
}
