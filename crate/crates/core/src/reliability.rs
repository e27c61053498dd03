//! Closed-form error-probability models for single and hierarchical TMR.
//!
//! With every redundant module failing independently with probability `pf`
//! and ideal voters, a first-order TMR stage errs when at least two of its
//! three inputs err:
//!
//! ```text
//! pe(pf) = 3 pf^2 - 2 pf^3
//! ```
//!
//! Higher orders feed the output of order `j - 1` into another voter, so
//! `pe_j = pe(pe_{j-1})`. A voter (flip-flop) that itself fails with
//! probability `pfmb` mixes the single-path rate back in:
//!
//! ```text
//! pem_1 = pf * pfmb + pe(pf) * (1 - pfmb)
//! pem_j = pem_{j-1} * pfmb + pe_j * (1 - pfmb)
//! ```
//!
//! Reduction rates are expressed in decades (`log10`).

use std::fmt;

use serde::Serialize;

use crate::error::HtmrError;
use crate::fault::ScenarioPattern;

/// Upper bound on the TMR order unless a caller configures another one.
pub const DEFAULT_MAX_ORDER: u32 = 16;

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize)]
#[serde(transparent)]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const HALF: Probability = Probability(0.5);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(value: f64) -> Result<Self, HtmrError> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(HtmrError::ProbabilityOutOfRange(value))
        }
    }

    /// Wraps the result of arithmetic that is in range up to rounding.
    pub(crate) fn clamped(value: f64) -> Self {
        debug_assert!(!value.is_nan());
        Self(value.clamp(0.0, 1.0))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }
}

impl TryFrom<f64> for Probability {
    type Error = HtmrError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Depth of TMR support. Order 0 is a bare module with no voting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct TmrOrder(u32);

impl TmrOrder {
    pub const BARE: TmrOrder = TmrOrder(0);
    pub const FIRST: TmrOrder = TmrOrder(1);
    pub const SECOND: TmrOrder = TmrOrder(2);

    pub fn new(order: u32) -> Result<Self, HtmrError> {
        Self::with_max(order, DEFAULT_MAX_ORDER)
    }

    pub fn with_max(order: u32, max: u32) -> Result<Self, HtmrError> {
        if order > max {
            Err(HtmrError::OrderTooLarge { order, max })
        } else {
            Ok(Self(order))
        }
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    /// Number of redundant leaf modules, `3^order`.
    pub fn module_count(self) -> u64 {
        3u64.pow(self.0)
    }

    /// Number of voters in a complete ternary tree of this order, `(3^order - 1) / 2`.
    pub fn voter_count(self) -> u64 {
        (self.module_count() - 1) / 2
    }
}

impl fmt::Display for TmrOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `log10(pf / pe)` in decades; `pe = 0` gives positive infinity.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ReductionRate(f64);

impl ReductionRate {
    pub const INFINITE: ReductionRate = ReductionRate(f64::INFINITY);

    pub fn decades(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// Reduction shared out over the `3^order` redundant modules.
    pub fn per_module(self, order: TmrOrder) -> ReductionRate {
        ReductionRate(self.0 / order.module_count() as f64)
    }
}

impl fmt::Display for ReductionRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            self.0.fmt(f)
        }
    }
}

pub fn complement(pf: Probability) -> Probability {
    Probability::clamped(1.0 - pf.value())
}

/// First-order TMR error probability with ideal voters.
#[inline]
pub fn pe_first(pf: Probability) -> Probability {
    let p = pf.value();
    Probability::clamped(3.0 * p * p - 2.0 * p * p * p)
}

/// First-order TMR error probability when the voter fails with `pfmb`.
pub fn pem_first(pf: Probability, pfmb: Probability) -> Probability {
    mix(pf, pe_first(pf), pfmb)
}

fn mix(single_path: Probability, voted: Probability, pfmb: Probability) -> Probability {
    let w = pfmb.value();
    Probability::clamped(single_path.value() * w + voted.value() * (1.0 - w))
}

/// `pe_order(0, pf) = pf`, `pe_order(j, pf) = pe_first(pe_order(j - 1, pf))`.
pub fn pe_order(order: TmrOrder, pf: Probability) -> Probability {
    (0..order.get()).fold(pf, |p, _| pe_first(p))
}

/// Recursive voter-fault model. Order 0 returns `pf`, as a bare module has
/// no voter to fail.
pub fn pem_order(order: TmrOrder, pf: Probability, pfmb: Probability) -> Probability {
    let mut pe = pf;
    let mut pem = pf;
    for j in 1..=order.get() {
        pe = pe_first(pe);
        pem = if j == 1 {
            pem_first(pf, pfmb)
        } else {
            mix(pem, pe, pfmb)
        };
    }
    pem
}

pub fn reduction_rate(pf: Probability, pe: Probability) -> Result<ReductionRate, HtmrError> {
    if pf.is_zero() {
        return Err(HtmrError::UndefinedReduction);
    }
    if pe.is_zero() {
        return Ok(ReductionRate::INFINITE);
    }
    Ok(ReductionRate((pf.value() / pe.value()).log10()))
}

/// Mean number of operations per output error, `1 / pe`.
pub fn operations_per_error(pe: Probability) -> Result<f64, HtmrError> {
    if pe.is_zero() {
        Err(HtmrError::NoErrorsExpected)
    } else {
        Ok(1.0 / pe.value())
    }
}

/// Output error probability of a first-order stage under one of the
/// N/F scenarios, every faulty module erring with `pf`.
pub fn scenario_error_probability(scenario: ScenarioPattern, pf: Probability) -> Probability {
    match scenario {
        ScenarioPattern::Nnf => Probability::ZERO,
        ScenarioPattern::Nff => Probability::clamped(pf.value() * pf.value()),
        ScenarioPattern::Fff => pe_first(pf),
    }
}

/// Scenario pattern replicated on every first-order triple of an order-`j`
/// tree with ideal voters.
pub fn scenario_error_probability_order(
    scenario: ScenarioPattern,
    order: TmrOrder,
    pf: Probability,
) -> Probability {
    if order.get() == 0 {
        return pf;
    }
    let first = scenario_error_probability(scenario, pf);
    pe_order(TmrOrder(order.get() - 1), first)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Violated,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderStep {
    pub order: u32,
    pub pe: f64,
    /// Whether `pe` is strictly below the previous order's value; `None` for order 1.
    pub verdict: Option<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropositionReport {
    pub pf: f64,
    pub steps: Vec<OrderStep>,
    pub verdict: Verdict,
}

/// Checks `pe_j < pe_{j-1}` for `j = 2..=j_max`. A violation is a result,
/// not an error: it is expected for `pf >= 0.5`.
pub fn proposition_check(pf: Probability, j_max: TmrOrder) -> Result<PropositionReport, HtmrError> {
    if j_max.get() < 2 {
        return Err(HtmrError::InvalidConfig(format!(
            "proposition check needs j_max >= 2, got {j_max}"
        )));
    }
    let mut steps = Vec::with_capacity(j_max.get() as usize);
    let mut prev: Option<Probability> = None;
    let mut pe = pf;
    for order in 1..=j_max.get() {
        pe = pe_first(pe);
        let verdict = prev.map(|p| {
            if pe.value() < p.value() {
                Verdict::Holds
            } else {
                Verdict::Violated
            }
        });
        steps.push(OrderStep {
            order,
            pe: pe.value(),
            verdict,
        });
        prev = Some(pe);
    }
    let verdict = if steps.iter().any(|s| s.verdict == Some(Verdict::Violated)) {
        Verdict::Violated
    } else {
        Verdict::Holds
    };
    Ok(PropositionReport {
        pf: pf.value(),
        steps,
        verdict,
    })
}

/// Coefficients (constant term first) of the two-level composition as it
/// appears in the printed proof.
pub const PRINTED_TWO_LEVEL_COEFFICIENTS: [i64; 10] = [0, 0, 0, 0, 27, -18, -42, -72, 48, -16];

/// Integer-coefficient polynomial, constant term first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial(Vec<i64>);

impl Polynomial {
    pub fn new(mut coeffs: Vec<i64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self(coeffs)
    }

    /// `3p^2 - 2p^3`.
    pub fn tmr_stage() -> Self {
        Self::new(vec![0, 0, 3, -2])
    }

    pub fn coefficients(&self) -> &[i64] {
        &self.0
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c as f64)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        let c = (0..n)
            .map(|i| self.0.get(i).copied().unwrap_or(0) + other.0.get(i).copied().unwrap_or(0))
            .collect();
        Self::new(c)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut c = vec![0i64; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }

    /// `self(inner(x))` by Horner's scheme over polynomials.
    pub fn compose(&self, inner: &Self) -> Self {
        self.0.iter().rev().fold(Self::new(vec![0]), |acc, &c| {
            acc.mul(inner).add(&Self::new(vec![c]))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditSample {
    pub p: f64,
    pub composition: f64,
    pub printed: f64,
    pub derived: f64,
    pub printed_deviation: f64,
    pub derived_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionAudit {
    pub printed_coefficients: Vec<i64>,
    pub derived_coefficients: Vec<i64>,
    pub samples: Vec<AuditSample>,
    pub max_printed_deviation: f64,
    pub max_derived_deviation: f64,
}

/// Compares `pe_first(pe_first(p))` against the printed degree-9 expansion
/// and against an expansion derived by exact polynomial composition.
pub fn expansion_audit(samples: &[Probability]) -> ExpansionAudit {
    let stage = Polynomial::tmr_stage();
    let derived = stage.compose(&stage);
    let printed = Polynomial::new(PRINTED_TWO_LEVEL_COEFFICIENTS.to_vec());

    let samples: Vec<AuditSample> = samples
        .iter()
        .map(|&p| {
            let composition = pe_first(pe_first(p)).value();
            let printed_v = printed.eval(p.value());
            let derived_v = derived.eval(p.value());
            AuditSample {
                p: p.value(),
                composition,
                printed: printed_v,
                derived: derived_v,
                printed_deviation: (printed_v - composition).abs(),
                derived_deviation: (derived_v - composition).abs(),
            }
        })
        .collect();
    let max = |f: fn(&AuditSample) -> f64| samples.iter().map(f).fold(0.0, f64::max);
    ExpansionAudit {
        printed_coefficients: printed.coefficients().to_vec(),
        derived_coefficients: derived.coefficients().to_vec(),
        max_printed_deviation: max(|s| s.printed_deviation),
        max_derived_deviation: max(|s| s.derived_deviation),
        samples,
    }
}
