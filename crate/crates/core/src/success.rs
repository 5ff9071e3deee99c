//! The "meaning of life" evaluator: per-priority arithmetic means that skip
//! the Nothing symbol, a tail-window estimator for the limit of long lives,
//! and the lexicographic partial order over the resulting vectors.

use crate::signal::{validate_vector, ScalarKind, SignalRole, SignalSpec, SignalValue};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A time-indexed sequence of reward vectors, one coordinate per priority
/// level (index 0 is the highest priority).
#[derive(Debug, Clone, PartialEq)]
pub struct RewardStream {
    pub specs: Vec<SignalSpec>,
    pub values: Vec<Vec<SignalValue>>,
}

impl RewardStream {
    pub fn new(
        specs: Vec<SignalSpec>,
        values: Vec<Vec<SignalValue>>,
    ) -> Result<Self, SuccessError> {
        if specs.iter().any(|s| s.role != SignalRole::Reward) {
            return Err(SuccessError::SchemaMismatch(
                "reward stream requires reward-role specs".into(),
            ));
        }
        for step in &values {
            validate_vector(&specs, step)
                .map_err(|e| SuccessError::SchemaMismatch(e.to_string()))?;
        }
        Ok(RewardStream { specs, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn priority_count(&self) -> usize {
        self.specs.len()
    }
}

/// One coordinate of a Success vector: an exact mean, or the bracket the
/// value is known to lie in when the prefix means do not settle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SuccessCoord {
    Exact { exact: f64 },
    Interval { lo: f64, hi: f64 },
}

impl SuccessCoord {
    pub fn exact(v: f64) -> Self {
        SuccessCoord::Exact { exact: v }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        SuccessCoord::Interval { lo, hi }
    }

    /// The coordinate as a (lo, hi) bracket; Exact is the degenerate case.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            SuccessCoord::Exact { exact } => (*exact, *exact),
            SuccessCoord::Interval { lo, hi } => (*lo, *hi),
        }
    }
}

/// The value of the Success function: one coordinate per priority level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessValue {
    pub coords: Vec<SuccessCoord>,
}

impl SuccessValue {
    pub fn exact(values: &[f64]) -> Self {
        SuccessValue {
            coords: values.iter().map(|&v| SuccessCoord::exact(v)).collect(),
        }
    }
}

/// Outcome of comparing two Success vectors. The order is partial:
/// overlapping non-identical brackets do not compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComparisonResult {
    Less,
    Equal,
    Greater,
    Incomparable,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SuccessError {
    #[error("success vectors have different priority counts ({0} vs {1})")]
    PriorityMismatch(usize, usize),
    #[error("reward stream does not fit the operation: {0}")]
    SchemaMismatch(String),
}

/// Mean of each reward coordinate over the first `upto_t` steps, skipping
/// Nothing. A coordinate with no concrete observation scores exactly zero,
/// extending the empty-life convention per coordinate.
pub fn success_finite(stream: &RewardStream, upto_t: usize) -> SuccessValue {
    assert!(upto_t <= stream.len(), "upto_t beyond stream length");
    let n = stream.priority_count();
    let mut sums = vec![0.0f64; n];
    let mut counts = vec![0u64; n];
    for step in &stream.values[..upto_t] {
        for (i, v) in step.iter().enumerate() {
            if let Some(s) = v.concrete() {
                sums[i] += s.as_f64();
                counts[i] += 1;
            }
        }
    }
    SuccessValue {
        coords: (0..n)
            .map(|i| {
                if counts[i] == 0 {
                    SuccessCoord::exact(0.0)
                } else {
                    SuccessCoord::exact(sums[i] / counts[i] as f64)
                }
            })
            .collect(),
    }
}

/// Success of every beginning of the life: element `t` is the Success of
/// the first `t + 1` steps. Computed incrementally; agrees with
/// [`success_finite`] at every prefix.
pub fn success_series(stream: &RewardStream) -> Vec<SuccessValue> {
    let n = stream.priority_count();
    let mut sums = vec![0.0f64; n];
    let mut counts = vec![0u64; n];
    let mut out = Vec::with_capacity(stream.len());
    for step in &stream.values {
        for (i, v) in step.iter().enumerate() {
            if let Some(s) = v.concrete() {
                sums[i] += s.as_f64();
                counts[i] += 1;
            }
        }
        out.push(SuccessValue {
            coords: (0..n)
                .map(|i| {
                    if counts[i] == 0 {
                        SuccessCoord::exact(0.0)
                    } else {
                        SuccessCoord::exact(sums[i] / counts[i] as f64)
                    }
                })
                .collect(),
        });
    }
    out
}

pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Finite-horizon estimate of the limit of a Success series. Per
/// coordinate, the min and max over the final `ceil(tail_fraction * n)`
/// elements bracket the limit points; a bracket narrower than `epsilon`
/// collapses to its midpoint.
pub fn success_limit_estimate(
    series: &[SuccessValue],
    tail_fraction: f64,
    epsilon: f64,
) -> SuccessValue {
    assert!(
        !series.is_empty(),
        "limit estimate needs a non-empty series"
    );
    assert!(
        tail_fraction > 0.0 && tail_fraction <= 1.0,
        "tail_fraction must be in (0, 1]"
    );
    assert!(epsilon > 0.0, "epsilon must be positive");
    let n = series.len();
    let window = ((tail_fraction * n as f64).ceil() as usize).clamp(1, n);
    let tail = &series[n - window..];
    let coord_count = series[0].coords.len();
    let mut coords = Vec::with_capacity(coord_count);
    for i in 0..coord_count {
        let mut m = f64::INFINITY;
        let mut big_m = f64::NEG_INFINITY;
        for sv in tail {
            let (lo, hi) = sv.coords[i].bounds();
            m = m.min(lo);
            big_m = big_m.max(hi);
        }
        if big_m - m <= epsilon {
            coords.push(SuccessCoord::exact((m + big_m) / 2.0));
        } else {
            coords.push(SuccessCoord::interval(m, big_m));
        }
    }
    SuccessValue { coords }
}

/// Lexicographic comparison by priority. Identical coordinates fall
/// through to the next level; strictly separated brackets decide; any
/// other overlap is Incomparable.
pub fn compare_success(
    a: &SuccessValue,
    b: &SuccessValue,
) -> Result<ComparisonResult, SuccessError> {
    if a.coords.len() != b.coords.len() {
        return Err(SuccessError::PriorityMismatch(
            a.coords.len(),
            b.coords.len(),
        ));
    }
    for (ca, cb) in a.coords.iter().zip(&b.coords) {
        let (alo, ahi) = ca.bounds();
        let (blo, bhi) = cb.bounds();
        if alo == blo && ahi == bhi {
            continue;
        }
        if ahi < blo {
            return Ok(ComparisonResult::Less);
        }
        if bhi < alo {
            return Ok(ComparisonResult::Greater);
        }
        return Ok(ComparisonResult::Incomparable);
    }
    Ok(ComparisonResult::Equal)
}

/// Rewrite a two-priority stream (both levels valued in {Nothing, 0, 1})
/// as a single unbounded reward signal. A positive high-priority reward is
/// emitted as twice the running count of concrete emissions, and every
/// later emission carries an extra 2, so the combined mean lands in [0, 1]
/// exactly when no positive high-priority reward ever occurred and is at
/// least 2 afterwards.
pub fn emulate_two_priorities(stream: &RewardStream) -> Result<RewardStream, SuccessError> {
    if stream.priority_count() != 2 {
        return Err(SuccessError::SchemaMismatch(format!(
            "emulation needs exactly 2 priority levels, got {}",
            stream.priority_count()
        )));
    }
    for spec in &stream.specs {
        let ok = matches!(
            spec.kind,
            ScalarKind::Boolean | ScalarKind::Finite { cardinality: 2 }
        );
        if !ok {
            return Err(SuccessError::SchemaMismatch(format!(
                "emulation needs {{Nothing,0,1}} signals, '{}' has kind {:?}",
                spec.name, spec.kind
            )));
        }
    }
    let out_spec = SignalSpec::reward("combined", ScalarKind::Integer);
    let mut emitted: Vec<Vec<SignalValue>> = Vec::with_capacity(stream.len());
    let mut concrete_count: i64 = 0;
    let mut triggered = false;
    for step in &stream.values {
        let high = step[0].concrete().map(|s| s.as_f64() as i64);
        let low = step[1].concrete().map(|s| s.as_f64() as i64);
        let bonus = if triggered { 2 } else { 0 };
        let value = match (high, low) {
            (Some(1), _) => {
                concrete_count += 1;
                let v = 2 * concrete_count + bonus;
                triggered = true;
                Some(v)
            }
            (Some(_), _) => {
                concrete_count += 1;
                Some(bonus)
            }
            (None, Some(v)) => {
                concrete_count += 1;
                Some(v + bonus)
            }
            (None, None) => None,
        };
        emitted.push(vec![match value {
            Some(v) => SignalValue::Concrete(crate::signal::Scalar::Int(v)),
            None => SignalValue::Nothing,
        }]);
    }
    RewardStream::new(vec![out_spec], emitted)
}
