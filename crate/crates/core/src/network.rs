//! Structural hierarchical TMR network: a complete ternary tree of voters
//! over `3^order` leaf modules.
//!
//! Nodes use heap layout. Voters occupy indices `0..voters` in breadth-first
//! order from the root; the children of voter `i` are `3i + 1 ..= 3i + 3`.
//! Leaves follow at `voters..voters + 3^order`, left to right.
//!
//! Per trial, draws are consumed in a fixed order: every faulty leaf left to
//! right, then, when `voter_fault_rate > 0`, one draw per voter, deepest level
//! first and left to right within a level. A failed voter passes its first
//! child through un-voted; its alarm is still computed from all three children.

use serde::Serialize;

use crate::error::HtmrError;
use crate::exec::Executor;
use crate::fault::{derive_seed, module_output, ModuleKind, RandomSource, ScenarioPattern};
use crate::logic::{alarm_signal, majority_vote, TripleInput};
use crate::reliability::{Probability, TmrOrder};

/// Largest order a structural network may have (59 049 leaves).
pub const MAX_NETWORK_ORDER: u32 = 10;

/// Trials per independently seeded chunk in [`run_trials_seeded`].
pub const CHUNK_TRIALS: u64 = 1 << 14;

/// Tag describing how a failed voter behaves; echoed in output metadata.
pub const VOTER_FAILURE_SEMANTICS: &str = "voter-passthrough";

#[derive(Debug, Clone, PartialEq)]
pub enum LeafConfig {
    /// Every leaf faulty with the same rate.
    Uniform(Probability),
    /// A scenario pattern repeated over every first-order triple.
    Scenario(ScenarioPattern, Probability),
    /// Explicit kinds, left to right; length must be `3^order`.
    PerLeaf(Vec<ModuleKind>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HtmrNetwork {
    order: TmrOrder,
    leaves: Vec<ModuleKind>,
    voter_fault_rate: Probability,
    voters: usize,
}

pub fn build_network(
    order: TmrOrder,
    leaf_config: LeafConfig,
    voter_fault_rate: Probability,
) -> Result<HtmrNetwork, HtmrError> {
    let j = order.get();
    if j == 0 {
        return Err(HtmrError::OrderTooSmall(0));
    }
    if j > MAX_NETWORK_ORDER {
        return Err(HtmrError::OrderTooLarge {
            order: j,
            max: MAX_NETWORK_ORDER,
        });
    }
    let n_leaves = order.module_count() as usize;
    let leaves = match leaf_config {
        LeafConfig::Uniform(rate) => vec![ModuleKind::Faulty(rate); n_leaves],
        LeafConfig::Scenario(pattern, rate) => {
            let kinds = *pattern.with_rate(rate).kinds();
            (0..n_leaves).map(|k| kinds[k % 3]).collect()
        }
        LeafConfig::PerLeaf(kinds) => {
            if kinds.len() != n_leaves {
                return Err(HtmrError::LeafCountMismatch {
                    expected: n_leaves,
                    got: kinds.len(),
                });
            }
            kinds
        }
    };
    Ok(HtmrNetwork {
        order,
        leaves,
        voter_fault_rate,
        voters: order.voter_count() as usize,
    })
}

impl HtmrNetwork {
    pub fn order(&self) -> TmrOrder {
        self.order
    }

    pub fn leaves(&self) -> &[ModuleKind] {
        &self.leaves
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn voter_count(&self) -> usize {
        self.voters
    }

    pub fn voter_fault_rate(&self) -> Probability {
        self.voter_fault_rate
    }

    /// Node indices of voters at `depth` (root is depth 0).
    fn level(&self, depth: u32) -> std::ops::Range<usize> {
        let start = (3usize.pow(depth) - 1) / 2;
        start..start + 3usize.pow(depth)
    }

    /// Exact output error probability of this structure, assuming
    /// independent leaves, by propagating per-node error probabilities up
    /// the tree.
    pub fn exact_error_probability(&self) -> Probability {
        let mut wrong = vec![0.0f64; self.voters + self.leaves.len()];
        for (k, leaf) in self.leaves.iter().enumerate() {
            wrong[self.voters + k] = leaf.error_rate().value();
        }
        let w = self.voter_fault_rate.value();
        for depth in (0..self.order.get()).rev() {
            for i in self.level(depth) {
                let (a, b, c) = (wrong[3 * i + 1], wrong[3 * i + 2], wrong[3 * i + 3]);
                let voted = a * b + a * c + b * c - 2.0 * a * b * c;
                wrong[i] = w * a + (1.0 - w) * voted;
            }
        }
        Probability::clamped(wrong[0])
    }

    /// Evaluates one trial. `nodes` must hold `voters + leaves` entries and
    /// `alarms` one entry per voter. Returns the root output.
    fn evaluate(
        &self,
        reference_bit: bool,
        rng: &mut RandomSource,
        nodes: &mut [bool],
        alarms: &mut [bool],
    ) -> bool {
        let v = self.voters;
        for (k, &leaf) in self.leaves.iter().enumerate() {
            nodes[v + k] = module_output(leaf, reference_bit, rng);
        }
        let rate = self.voter_fault_rate.value();
        let voters_can_fail = rate > 0.0;
        for depth in (0..self.order.get()).rev() {
            for i in self.level(depth) {
                let t = TripleInput::new(nodes[3 * i + 1], nodes[3 * i + 2], nodes[3 * i + 3]);
                alarms[i] = alarm_signal(t);
                let failed = voters_can_fail && rng.next_uniform() < rate;
                nodes[i] = if failed { t.y1 } else { majority_vote(t) };
            }
        }
        nodes[0]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitResult {
    pub output: bool,
    /// Alarm per voter, breadth-first from the root.
    pub alarms: Vec<bool>,
}

pub fn simulate_bit(net: &HtmrNetwork, reference_bit: bool, rng: &mut RandomSource) -> BitResult {
    let mut nodes = vec![false; net.voters + net.leaves.len()];
    let mut alarms = vec![false; net.voters];
    let output = net.evaluate(reference_bit, rng, &mut nodes, &mut alarms);
    BitResult { output, alarms }
}

/// Payload carried through the network, indexed by global trial number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceStream {
    Constant(bool),
    #[default]
    Alternating,
}

impl ReferenceStream {
    #[inline]
    pub fn bit_at(self, trial: u64) -> bool {
        match self {
            ReferenceStream::Constant(b) => b,
            ReferenceStream::Alternating => trial & 1 == 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalEstimate {
    pub trials: u64,
    pub errors: u64,
    pub pe_hat: f64,
    pub std_err: f64,
}

impl EmpiricalEstimate {
    pub fn new(trials: u64, errors: u64) -> Self {
        assert!(trials > 0 && errors <= trials);
        let pe_hat = errors as f64 / trials as f64;
        let std_err = (pe_hat * (1.0 - pe_hat) / trials as f64).sqrt();
        Self {
            trials,
            errors,
            pe_hat,
            std_err,
        }
    }

    /// Binomial standard error of the mean under the hypothesis `pe = expected`.
    pub fn expected_std_err(&self, expected: f64) -> f64 {
        (expected * (1.0 - expected) / self.trials as f64).sqrt()
    }

    /// `|pe_hat - expected| <= k * se(expected)`. When `expected` is 0 or 1
    /// the standard error vanishes and only an exact match passes.
    pub fn agrees_with(&self, expected: f64, k: f64) -> bool {
        (self.pe_hat - expected).abs() <= k * self.expected_std_err(expected)
    }
}

/// Alarm tallies per voter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FaultStatusCounter {
    pub alarms: Vec<u64>,
    pub trials: u64,
    /// Trials in which at least one voter alarmed.
    pub alarmed_trials: u64,
}

impl FaultStatusCounter {
    pub fn new(voters: usize) -> Self {
        Self {
            alarms: vec![0; voters],
            trials: 0,
            alarmed_trials: 0,
        }
    }

    fn record(&mut self, alarms: &[bool]) {
        self.trials += 1;
        let mut any = false;
        for (count, &a) in self.alarms.iter_mut().zip(alarms) {
            *count += a as u64;
            any |= a;
        }
        self.alarmed_trials += any as u64;
    }

    pub fn merge(&mut self, other: &FaultStatusCounter) {
        for (a, b) in self.alarms.iter_mut().zip(&other.alarms) {
            *a += b;
        }
        self.trials += other.trials;
        self.alarmed_trials += other.alarmed_trials;
    }
}

fn run_range(
    net: &HtmrNetwork,
    trials: std::ops::Range<u64>,
    reference: ReferenceStream,
    rng: &mut RandomSource,
) -> (u64, FaultStatusCounter) {
    let mut nodes = vec![false; net.voters + net.leaves.len()];
    let mut alarms = vec![false; net.voters];
    let mut counter = FaultStatusCounter::new(net.voters);
    let mut errors = 0u64;
    for t in trials {
        let bit = reference.bit_at(t);
        let out = net.evaluate(bit, rng, &mut nodes, &mut alarms);
        errors += (out != bit) as u64;
        counter.record(&alarms);
    }
    (errors, counter)
}

/// Pushes `n` bits through the network on a single stream.
pub fn run_trials(
    net: &HtmrNetwork,
    n: u64,
    reference: ReferenceStream,
    rng: &mut RandomSource,
) -> Result<(EmpiricalEstimate, FaultStatusCounter), HtmrError> {
    if n == 0 {
        return Err(HtmrError::NoTrials);
    }
    let (errors, counter) = run_range(net, 0..n, reference, rng);
    Ok((EmpiricalEstimate::new(n, errors), counter))
}

/// Pushes `n` bits through the network in chunks of [`CHUNK_TRIALS`]; chunk
/// `c` draws from stream `c` under `seed`. Chunk boundaries depend only on
/// `n`, so the result is identical for every executor.
pub fn run_trials_seeded(
    net: &HtmrNetwork,
    n: u64,
    reference: ReferenceStream,
    seed: u64,
    exec: &Executor,
) -> Result<(EmpiricalEstimate, FaultStatusCounter), HtmrError> {
    if n == 0 {
        return Err(HtmrError::NoTrials);
    }
    let chunks = n.div_ceil(CHUNK_TRIALS);
    let parts = exec.map(chunks as usize, |c| {
        let c = c as u64;
        let mut rng = RandomSource::stream(seed, c);
        let start = c * CHUNK_TRIALS;
        run_range(net, start..(start + CHUNK_TRIALS).min(n), reference, &mut rng)
    });
    let mut errors = 0;
    let mut counter = FaultStatusCounter::new(net.voters);
    for (e, c) in &parts {
        errors += e;
        counter.merge(c);
    }
    Ok((EmpiricalEstimate::new(n, errors), counter))
}

/// Per-trial single-module baseline (order 0): the bare module's own errors.
pub fn run_bare_module_seeded(
    rate: Probability,
    n: u64,
    reference: ReferenceStream,
    seed: u64,
    exec: &Executor,
) -> Result<EmpiricalEstimate, HtmrError> {
    if n == 0 {
        return Err(HtmrError::NoTrials);
    }
    let chunks = n.div_ceil(CHUNK_TRIALS);
    let errors: u64 = exec
        .map(chunks as usize, |c| {
            let c = c as u64;
            let mut rng = RandomSource::stream(seed, c);
            let start = c * CHUNK_TRIALS;
            (start..(start + CHUNK_TRIALS).min(n))
                .filter(|&t| {
                    let bit = reference.bit_at(t);
                    module_output(ModuleKind::Faulty(rate), bit, &mut rng) != bit
                })
                .count() as u64
        })
        .into_iter()
        .sum();
    Ok(EmpiricalEstimate::new(n, errors))
}

/// Seed of sweep point `index` under `master`.
pub fn point_seed(master: u64, index: usize) -> u64 {
    derive_seed(master, index as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HealthReport {
    pub trials: u64,
    pub per_voter_frequency: Vec<f64>,
    /// Fraction of trials in which any voter alarmed.
    pub aggregate_rate: f64,
    pub alert_level: f64,
    /// Voters (breadth-first index) whose alarm frequency exceeds `alert_level`.
    pub flagged: Vec<usize>,
}

pub fn health_report(
    counter: &FaultStatusCounter,
    alert_level: f64,
) -> Result<HealthReport, HtmrError> {
    if counter.trials == 0 {
        return Err(HtmrError::NoTrials);
    }
    let n = counter.trials as f64;
    let per_voter_frequency: Vec<f64> = counter.alarms.iter().map(|&a| a as f64 / n).collect();
    let flagged = per_voter_frequency
        .iter()
        .enumerate()
        .filter(|(_, &f)| f > alert_level)
        .map(|(i, _)| i)
        .collect();
    Ok(HealthReport {
        trials: counter.trials,
        aggregate_rate: counter.alarmed_trials as f64 / n,
        per_voter_frequency,
        alert_level,
        flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reliability::{pe_first, pe_order, pem_first};

    fn p(v: f64) -> Probability {
        Probability::new(v).unwrap()
    }

    fn order(j: u32) -> TmrOrder {
        TmrOrder::new(j).unwrap()
    }

    #[test]
    fn shape_by_order() {
        for (j, leaves, voters) in [(1, 3, 1), (2, 9, 4), (3, 27, 13)] {
            let net = build_network(order(j), LeafConfig::Uniform(p(0.1)), p(0.0)).unwrap();
            assert_eq!(net.leaf_count(), leaves);
            assert_eq!(net.voter_count(), voters);
        }
    }

    #[test]
    fn build_errors() {
        assert_eq!(
            build_network(order(0), LeafConfig::Uniform(p(0.1)), p(0.0)),
            Err(HtmrError::OrderTooSmall(0))
        );
        assert!(matches!(
            build_network(order(11), LeafConfig::Uniform(p(0.1)), p(0.0)),
            Err(HtmrError::OrderTooLarge { .. })
        ));
        assert_eq!(
            build_network(order(2), LeafConfig::PerLeaf(vec![ModuleKind::FaultFree; 3]), p(0.0)),
            Err(HtmrError::LeafCountMismatch { expected: 9, got: 3 })
        );
    }

    #[test]
    fn scenario_replicated_per_triple() {
        let net = build_network(order(2), LeafConfig::Scenario(ScenarioPattern::Nnf, p(0.3)), p(0.0))
            .unwrap();
        let faulty: Vec<bool> = net.leaves().iter().map(|k| k.is_faulty()).collect();
        assert_eq!(
            faulty,
            [false, false, true, false, false, true, false, false, true]
        );
    }

    #[test]
    fn fault_free_network_is_transparent() {
        let net = build_network(
            order(2),
            LeafConfig::PerLeaf(vec![ModuleKind::FaultFree; 9]),
            p(0.0),
        )
        .unwrap();
        let mut rng = RandomSource::new(3);
        for bit in [false, true] {
            let r = simulate_bit(&net, bit, &mut rng);
            assert_eq!(r.output, bit);
            assert!(r.alarms.iter().all(|a| !a));
        }
        assert_eq!(rng.draws(), 0);
    }

    #[test]
    fn single_dissenter_and_all_faulty() {
        let mut rng = RandomSource::new(0);
        let nnf = build_network(order(1), LeafConfig::Scenario(ScenarioPattern::Nnf, p(1.0)), p(0.0))
            .unwrap();
        let r = simulate_bit(&nnf, false, &mut rng);
        assert_eq!((r.output, r.alarms.as_slice()), (false, &[true][..]));

        let fff = build_network(order(1), LeafConfig::Uniform(p(1.0)), p(0.0)).unwrap();
        let r = simulate_bit(&fff, false, &mut rng);
        assert_eq!((r.output, r.alarms.as_slice()), (true, &[false][..]));
    }

    #[test]
    fn draw_count_per_trial() {
        let net = build_network(order(2), LeafConfig::Scenario(ScenarioPattern::Nff, p(0.2)), p(0.1))
            .unwrap();
        let mut rng = RandomSource::new(9);
        simulate_bit(&net, true, &mut rng);
        // 6 faulty leaves + 4 voters.
        assert_eq!(rng.draws(), 10);
    }

    #[test]
    fn failed_voter_passes_first_child() {
        // Voter always fails; only y1 is wrong, so the pass-through output is wrong.
        let net = build_network(
            order(1),
            LeafConfig::PerLeaf(vec![
                ModuleKind::Faulty(p(1.0)),
                ModuleKind::FaultFree,
                ModuleKind::FaultFree,
            ]),
            p(1.0),
        )
        .unwrap();
        let mut rng = RandomSource::new(0);
        let r = simulate_bit(&net, false, &mut rng);
        assert!(r.output);
        assert_eq!(r.alarms, vec![true]);
    }

    #[test]
    fn exact_probability_matches_closed_forms() {
        for v in [0.0, 0.05, 0.1, 0.3, 0.5, 0.8, 1.0] {
            let n1 = build_network(order(1), LeafConfig::Uniform(p(v)), p(0.0)).unwrap();
            let n2 = build_network(order(2), LeafConfig::Uniform(p(v)), p(0.0)).unwrap();
            assert!((n1.exact_error_probability().value() - pe_first(p(v)).value()).abs() < 1e-15);
            assert!(
                (n2.exact_error_probability().value() - pe_order(order(2), p(v)).value()).abs()
                    < 1e-15
            );
            let m1 = build_network(order(1), LeafConfig::Uniform(p(v)), p(0.1)).unwrap();
            assert!(
                (m1.exact_error_probability().value() - pem_first(p(v), p(0.1)).value()).abs()
                    < 1e-15
            );
        }
    }

    #[test]
    fn chunked_run_is_worker_independent() {
        let net = build_network(order(2), LeafConfig::Uniform(p(0.2)), p(0.05)).unwrap();
        let n = 3 * CHUNK_TRIALS + 17;
        let seq = run_trials_seeded(&net, n, ReferenceStream::Alternating, 5, &Executor::sequential())
            .unwrap();
        let par = run_trials_seeded(&net, n, ReferenceStream::Alternating, 5, &Executor::parallel(3))
            .unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq.1.trials, n);
    }

    #[test]
    fn zero_trials_rejected() {
        let net = build_network(order(1), LeafConfig::Uniform(p(0.2)), p(0.0)).unwrap();
        let mut rng = RandomSource::new(0);
        assert_eq!(
            run_trials(&net, 0, ReferenceStream::Alternating, &mut rng),
            Err(HtmrError::NoTrials)
        );
        assert!(health_report(&FaultStatusCounter::new(1), 0.1).is_err());
    }

    #[test]
    fn health_report_examples() {
        let n = 200_000;
        let quiet = build_network(order(2), LeafConfig::Uniform(p(0.0)), p(0.0)).unwrap();
        let mut rng = RandomSource::new(1);
        let (_, c) = run_trials(&quiet, n, ReferenceStream::Alternating, &mut rng).unwrap();
        let h = health_report(&c, 0.01).unwrap();
        assert!(h.per_voter_frequency.iter().all(|&f| f == 0.0));
        assert!(h.flagged.is_empty());
        assert_eq!(h.aggregate_rate, 0.0);

        let rate = 0.3;
        let nnf = build_network(order(1), LeafConfig::Scenario(ScenarioPattern::Nnf, p(rate)), p(0.0))
            .unwrap();
        let (est, c) = run_trials(&nnf, n, ReferenceStream::Alternating, &mut rng).unwrap();
        assert_eq!(est.errors, 0);
        let h = health_report(&c, 0.2).unwrap();
        let tol = 4.0 * (rate * (1.0 - rate) / n as f64).sqrt();
        assert!((h.per_voter_frequency[0] - rate).abs() <= tol);
        assert_eq!(h.flagged, vec![0]);

        let fff = build_network(order(1), LeafConfig::Uniform(p(1.0)), p(0.0)).unwrap();
        let (est, c) = run_trials(&fff, 1000, ReferenceStream::Alternating, &mut rng).unwrap();
        assert_eq!(est.errors, 1000);
        assert_eq!(health_report(&c, 0.0).unwrap().per_voter_frequency, vec![0.0]);
    }

    #[test]
    fn estimate_agreement() {
        let e = EmpiricalEstimate::new(100, 0);
        assert!(e.agrees_with(0.0, 4.0));
        assert!(!e.agrees_with(0.5, 4.0));
        let e = EmpiricalEstimate::new(10_000, 280);
        assert!((e.std_err - (0.028f64 * 0.972 / 1e4).sqrt()).abs() < 1e-15);
        assert!(e.agrees_with(0.028, 1.0));
    }
}
