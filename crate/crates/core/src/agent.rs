//! Device policies: the exploring random agent and the miner-guided agent
//! that skips moves its rules predict to be incorrect.

use crate::miner::{predict_incorrect, Implication, StepWindow};
use crate::protocol::enumerate_outputs;
use crate::signal::{nothing_vector, SignalValue, VectorSchema};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

/// Everything a policy may look at when choosing the next output: the
/// current observation, one step of history, and the moves already
/// rejected in this state.
#[derive(Debug, Clone)]
pub struct AgentView<'a> {
    pub schema: &'a VectorSchema,
    pub inputs_now: &'a [SignalValue],
    pub rewards_now: &'a [SignalValue],
    pub inputs_prev: Option<&'a [SignalValue]>,
    pub output_prev: Option<&'a [SignalValue]>,
    pub tried_incorrect: &'a [Vec<SignalValue>],
}

/// Every output vector has been tried and rejected: the device is dead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("no untried output vectors remain")]
pub struct NoUntriedMoves;

pub trait AgentPolicy {
    fn id(&self) -> &str;

    /// Choose the next output. Must never return a member of
    /// `view.tried_incorrect`.
    fn decide(&mut self, view: &AgentView<'_>) -> Result<Vec<SignalValue>, NoUntriedMoves>;

    /// Parameters worth recording in the trace metadata.
    fn config_json(&self) -> Value {
        json!({})
    }
}

pub const DEFAULT_EXPLORATION_BIAS: f64 = 4.0;

// Shared sampling core: the first proposal of a life is the all-Nothing
// output, afterwards untried outputs are drawn with extra weight on the
// single-coordinate deviations from it.
struct Sampler {
    rng: ChaCha8Rng,
    bias: f64,
    first_call: bool,
}

impl Sampler {
    fn new(seed: u64, bias: f64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            bias,
            first_call: true,
        }
    }

    fn nothing_first(&mut self, view: &AgentView<'_>) -> Option<Vec<SignalValue>> {
        if self.first_call {
            self.first_call = false;
            if view.tried_incorrect.is_empty() {
                return Some(nothing_vector(&view.schema.outputs));
            }
        }
        None
    }

    fn untried<'p>(
        pool: &'p [Vec<SignalValue>],
        view: &AgentView<'_>,
    ) -> Vec<&'p Vec<SignalValue>> {
        pool.iter()
            .filter(|o| !view.tried_incorrect.contains(o))
            .collect()
    }

    // Deviation count from the all-Nothing output; Nothing normalizes to
    // zero on outputs, so this is just the non-zero coordinate count.
    fn deviations(output: &[SignalValue]) -> usize {
        output
            .iter()
            .filter(|v| match v {
                SignalValue::Concrete(s) => !s.is_zero(),
                SignalValue::Nothing => false,
                SignalValue::Undef => true,
            })
            .count()
    }

    fn weighted_pick(&mut self, candidates: &[&Vec<SignalValue>]) -> Vec<SignalValue> {
        debug_assert!(!candidates.is_empty());
        let weights: Vec<f64> = candidates
            .iter()
            .map(|o| {
                if Self::deviations(o) <= 1 {
                    self.bias
                } else {
                    1.0
                }
            })
            .collect();
        let total: f64 = weights.iter().sum();
        let mut draw = self.rng.gen_range(0.0..total);
        for (candidate, w) in candidates.iter().zip(&weights) {
            if draw < *w {
                return (*candidate).clone();
            }
            draw -= w;
        }
        candidates[candidates.len() - 1].clone()
    }
}

/// Explores from the all-Nothing anchor outwards, never repeating a move
/// rejected in the current state.
pub struct RandomAgent {
    sampler: Sampler,
    bias: f64,
    outputs: Option<Vec<Vec<SignalValue>>>,
}

impl RandomAgent {
    pub fn new(seed: u64) -> Self {
        Self::with_bias(seed, DEFAULT_EXPLORATION_BIAS)
    }

    pub fn with_bias(seed: u64, bias: f64) -> Self {
        RandomAgent {
            sampler: Sampler::new(seed, bias),
            bias,
            outputs: None,
        }
    }
}

impl AgentPolicy for RandomAgent {
    fn id(&self) -> &str {
        "random"
    }

    fn decide(&mut self, view: &AgentView<'_>) -> Result<Vec<SignalValue>, NoUntriedMoves> {
        if let Some(first) = self.sampler.nothing_first(view) {
            return Ok(first);
        }
        let outputs = self
            .outputs
            .get_or_insert_with(|| enumerate_outputs(view.schema).expect("finite output space"));
        let untried = Sampler::untried(outputs, view);
        if untried.is_empty() {
            return Err(NoUntriedMoves);
        }
        Ok(self.sampler.weighted_pick(&untried))
    }

    fn config_json(&self) -> Value {
        json!({"bias": self.bias})
    }
}

/// Filters candidates through the mined rules, preferring moves that keep
/// the most not-knowably-incorrect options open at the next step, with an
/// epsilon chance of deliberately probing a predicted-incorrect move.
pub struct MinerGuidedAgent {
    sampler: Sampler,
    rules: Vec<Implication>,
    epsilon: f64,
    mobility_weight: f64,
    outputs: Option<Vec<Vec<SignalValue>>>,
}

impl MinerGuidedAgent {
    pub fn new(rules: Vec<Implication>, seed: u64, epsilon: f64, mobility_weight: f64) -> Self {
        assert!((0.0..=1.0).contains(&epsilon));
        MinerGuidedAgent {
            sampler: Sampler::new(seed, DEFAULT_EXPLORATION_BIAS),
            rules,
            epsilon,
            mobility_weight,
            outputs: None,
        }
    }

    // Optimistic option count after playing `candidate`: how many outputs
    // would not be predicted incorrect given what will then be known (the
    // next inputs are unknown, so their atoms cannot fire).
    fn mobility(
        &self,
        view: &AgentView<'_>,
        outputs: &[Vec<SignalValue>],
        candidate: &[SignalValue],
    ) -> usize {
        let next_window = StepWindow {
            inputs_now: None,
            inputs_prev: Some(view.inputs_now),
            output_prev: Some(candidate),
        };
        outputs
            .iter()
            .filter(|o| !predict_incorrect(&self.rules, view.schema, &next_window, o))
            .count()
    }
}

impl AgentPolicy for MinerGuidedAgent {
    fn id(&self) -> &str {
        "miner"
    }

    fn decide(&mut self, view: &AgentView<'_>) -> Result<Vec<SignalValue>, NoUntriedMoves> {
        if let Some(first) = self.sampler.nothing_first(view) {
            return Ok(first);
        }
        let outputs = self
            .outputs
            .get_or_insert_with(|| enumerate_outputs(view.schema).expect("finite output space"))
            .clone();
        let untried = Sampler::untried(&outputs, view);
        if untried.is_empty() {
            return Err(NoUntriedMoves);
        }

        let window = StepWindow {
            inputs_now: Some(view.inputs_now),
            inputs_prev: view.inputs_prev,
            output_prev: view.output_prev,
        };
        let (predicted_bad, survivors): (Vec<&Vec<SignalValue>>, Vec<&Vec<SignalValue>>) = untried
            .iter()
            .partition(|o| predict_incorrect(&self.rules, view.schema, &window, o));

        // A near-certain-incorrect move costs nothing to test and refreshes
        // the rule's evidence.
        if !predicted_bad.is_empty() && self.epsilon > 0.0 {
            let probe = self.sampler.rng.gen_bool(self.epsilon);
            if probe {
                let idx = self.sampler.rng.gen_range(0..predicted_bad.len());
                return Ok(predicted_bad[idx].clone());
            }
        }

        // When every untried move is predicted incorrect the device still
        // has to move; the predictions are only predictions.
        let candidates = if survivors.is_empty() {
            predicted_bad
        } else {
            survivors
        };

        let chosen: Vec<&Vec<SignalValue>> = if self.mobility_weight > 0.0 && !self.rules.is_empty()
        {
            let scores: Vec<usize> = candidates
                .iter()
                .map(|c| self.mobility(view, &outputs, c))
                .collect();
            let best = *scores.iter().max().expect("non-empty candidates");
            candidates
                .iter()
                .zip(&scores)
                .filter(|(_, s)| **s == best)
                .map(|(c, _)| *c)
                .collect()
        } else {
            candidates
        };
        Ok(self.sampler.weighted_pick(&chosen))
    }

    fn config_json(&self) -> Value {
        json!({
            "epsilon": self.epsilon,
            "mobility_weight": self.mobility_weight,
            "rules": self.rules.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::miner::{Atom, Consequent, Relation};
    use crate::signal::{Scalar, ScalarKind, SignalSpec};

    fn schema() -> VectorSchema {
        VectorSchema::new(
            vec![SignalSpec::input("a", ScalarKind::Boolean)],
            vec![
                SignalSpec::output("go", ScalarKind::finite(3)),
                SignalSpec::output("do", ScalarKind::Boolean),
            ],
            vec![SignalSpec::reward("r", ScalarKind::finite(2))],
        )
        .unwrap()
    }

    fn b(v: bool) -> SignalValue {
        SignalValue::Concrete(Scalar::Bool(v))
    }

    fn view<'a>(
        schema: &'a VectorSchema,
        inputs: &'a [SignalValue],
        tried: &'a [Vec<SignalValue>],
    ) -> AgentView<'a> {
        AgentView {
            schema,
            inputs_now: inputs,
            rewards_now: &[],
            inputs_prev: None,
            output_prev: None,
            tried_incorrect: tried,
        }
    }

    #[test]
    fn first_proposal_is_all_nothing() {
        let schema = schema();
        let inputs = [b(false)];
        let mut agent = RandomAgent::new(3);
        let out = agent.decide(&view(&schema, &inputs, &[])).unwrap();
        assert_eq!(out, nothing_vector(&schema.outputs));
    }

    #[test]
    fn never_repeats_a_tried_move() {
        let schema = schema();
        let inputs = [b(false)];
        let mut agent = RandomAgent::new(5);
        let mut tried: Vec<Vec<SignalValue>> = Vec::new();
        // Exhaust the 6-vector output space one rejection at a time.
        for _ in 0..6 {
            let v = view(&schema, &inputs, &tried);
            let out = agent.decide(&v).unwrap();
            assert!(!tried.contains(&out), "agent repeated {out:?}");
            tried.push(out);
        }
        let v = view(&schema, &inputs, &tried);
        assert_eq!(agent.decide(&v), Err(NoUntriedMoves));
    }

    #[test]
    fn same_seed_same_proposals() {
        let schema = schema();
        let inputs = [b(true)];
        let mut a = RandomAgent::new(9);
        let mut c = RandomAgent::new(9);
        for _ in 0..10 {
            let va = view(&schema, &inputs, &[]);
            assert_eq!(a.decide(&va).unwrap(), c.decide(&va).unwrap());
        }
    }

    fn forbid_do_rule() -> Implication {
        Implication {
            antecedent: vec![Atom {
                signal: "do".into(),
                offset: 0,
                relation: Relation::Eq,
                value: Scalar::Bool(true),
            }],
            consequent: Consequent::BadMove,
            support: 50,
            violations: 0,
        }
    }

    #[test]
    fn zero_epsilon_never_proposes_a_predicted_move() {
        let schema = schema();
        let inputs = [b(true)];
        let mut agent = MinerGuidedAgent::new(vec![forbid_do_rule()], 4, 0.0, 0.0);
        for _ in 0..40 {
            let v = view(&schema, &inputs, &[]);
            let out = agent.decide(&v).unwrap();
            assert_eq!(out[1], b(false), "filtered move proposed: {out:?}");
        }
    }

    #[test]
    fn positive_epsilon_eventually_probes() {
        let schema = schema();
        let inputs = [b(true)];
        let mut agent = MinerGuidedAgent::new(vec![forbid_do_rule()], 4, 0.5, 0.0);
        let mut probed = false;
        for _ in 0..40 {
            let v = view(&schema, &inputs, &[]);
            if agent.decide(&v).unwrap()[1] == b(true) {
                probed = true;
                break;
            }
        }
        assert!(probed, "epsilon probing never fired");
    }

    #[test]
    fn empty_rules_match_the_random_agent_exactly() {
        let schema = schema();
        let inputs = [b(false)];
        let mut random = RandomAgent::new(7);
        let mut miner = MinerGuidedAgent::new(vec![], 7, 0.1, 1.0);
        for _ in 0..20 {
            let v = view(&schema, &inputs, &[]);
            assert_eq!(random.decide(&v).unwrap(), miner.decide(&v).unwrap());
        }
    }
}
