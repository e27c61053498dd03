//! Parameter sweeps comparing the closed-form models with Monte-Carlo runs
//! of the structural network.
//!
//! Random streams for a sweep are derived from the master seed by point
//! index, then TMR order, then scenario code (0 for uniform leaves), and
//! finally split into per-chunk ChaCha streams (see
//! [`run_trials_seeded`]). Sweep points are evaluated through an
//! [`Executor`] and merged in grid order.

use crate::error::HtmrError;
use crate::exec::Executor;
use crate::fault::{derive_seed, ScenarioPattern};
use crate::network::{
    build_network, point_seed, run_bare_module_seeded, run_trials_seeded, EmpiricalEstimate,
    LeafConfig, ReferenceStream,
};
use crate::reliability::{
    operations_per_error, pe_order, pem_order, reduction_rate, scenario_error_probability_order,
    Probability, ReductionRate, TmrOrder,
};

/// Smallest pf for which empirical columns are attempted.
pub const EMPIRICAL_PF_FLOOR: f64 = 1e-3;

/// Smallest pf accepted by [`low_probability_report`].
pub const LOW_PROBABILITY_PF_FLOOR: f64 = 1e-8;

/// Module error probabilities reported by [`table3_report`].
pub const TABLE3_PF: [f64; 5] = [0.001, 0.01, 0.1, 0.3, 0.5];

/// Describes how `stream_seed` derives per-run seeds; echoed in metadata.
pub const STREAM_DERIVATION: &str = "chacha8[splitmix(seed;point;order;scenario)][chunk]";

#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    /// Explicit points; sorted and de-duplicated on use.
    Points(Vec<f64>),
    Linear { min: f64, max: f64, steps: usize },
    Log { min: f64, max: f64, steps: usize },
}

impl Grid {
    /// 21 points over `[0, 1]`, step 0.05.
    pub fn default_linear() -> Self {
        Grid::Linear {
            min: 0.0,
            max: 1.0,
            steps: 21,
        }
    }

    pub fn points(&self) -> Result<Vec<Probability>, HtmrError> {
        let raw: Vec<f64> = match *self {
            Grid::Points(ref v) => {
                if v.is_empty() {
                    return Err(HtmrError::InvalidGrid("no points given".into()));
                }
                let mut v = v.clone();
                for &x in &v {
                    Probability::new(x)?;
                }
                v.sort_by(f64::total_cmp);
                v.dedup();
                v
            }
            Grid::Linear { min, max, steps } => {
                check_range(min, max, steps)?;
                let span = max - min;
                let last = (steps - 1) as f64;
                (0..steps)
                    .map(|i| (min + span * i as f64 / last).clamp(min, max))
                    .collect()
            }
            Grid::Log { min, max, steps } => {
                check_range(min, max, steps)?;
                if min <= 0.0 {
                    return Err(HtmrError::InvalidGrid(
                        "logarithmic grid needs min > 0".into(),
                    ));
                }
                let (lo, hi) = (min.log10(), max.log10());
                let last = (steps - 1) as f64;
                (0..steps)
                    .map(|i| {
                        if i + 1 == steps {
                            max
                        } else {
                            10f64.powf(lo + (hi - lo) * i as f64 / last).clamp(min, max)
                        }
                    })
                    .collect()
            }
        };
        raw.into_iter().map(Probability::new).collect()
    }
}

fn check_range(min: f64, max: f64, steps: usize) -> Result<(), HtmrError> {
    Probability::new(min)?;
    Probability::new(max)?;
    if min >= max {
        return Err(HtmrError::InvalidGrid(format!(
            "min ({min}) must be below max ({max})"
        )));
    }
    if steps < 2 {
        return Err(HtmrError::InvalidGrid(format!(
            "a range grid needs at least 2 steps, got {steps}"
        )));
    }
    Ok(())
}

/// Voter (flip-flop) error probability used at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PfmbMode {
    #[default]
    Zero,
    EqualToPf,
    Fixed(Probability),
}

impl PfmbMode {
    pub fn resolve(self, pf: Probability) -> Probability {
        match self {
            PfmbMode::Zero => Probability::ZERO,
            PfmbMode::EqualToPf => pf,
            PfmbMode::Fixed(p) => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub grid: Grid,
    pub orders: Vec<TmrOrder>,
    pub pfmb: PfmbMode,
    /// Trials per point and order; 0 means analytic only.
    pub trials: u64,
    /// `None` puts the same faulty rate on every leaf.
    pub scenario: Option<ScenarioPattern>,
    pub seed: u64,
    pub reference: ReferenceStream,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            grid: Grid::default_linear(),
            orders: vec![TmrOrder::BARE, TmrOrder::FIRST, TmrOrder::SECOND],
            pfmb: PfmbMode::Zero,
            trials: 0,
            scenario: None,
            seed: 0,
            reference: ReferenceStream::Alternating,
        }
    }
}

impl SweepConfig {
    fn orders(&self) -> Result<Vec<TmrOrder>, HtmrError> {
        if self.orders.is_empty() {
            return Err(HtmrError::InvalidConfig("no TMR orders selected".into()));
        }
        let mut o = self.orders.clone();
        o.sort();
        o.dedup();
        Ok(o)
    }
}

/// Columns for one TMR order at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderColumns {
    pub order: TmrOrder,
    pub pe: Probability,
    pub pem: Probability,
    /// `None` when pf = 0 (rate undefined).
    pub re: Option<ReductionRate>,
    pub rem: Option<ReductionRate>,
    pub re_per_module: Option<ReductionRate>,
    pub empirical: Option<EmpiricalEstimate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub pf: Probability,
    pub pfmb: Probability,
    pub scenario: Option<ScenarioPattern>,
    pub orders: Vec<OrderColumns>,
}

impl ComparisonRow {
    pub fn order(&self, j: u32) -> Option<&OrderColumns> {
        self.orders.iter().find(|c| c.order.get() == j)
    }
}

fn analytic_columns(
    pf: Probability,
    pfmb: Probability,
    order: TmrOrder,
    scenario: Option<ScenarioPattern>,
) -> Result<OrderColumns, HtmrError> {
    let (pe, pem) = match scenario {
        None => (pe_order(order, pf), pem_order(order, pf, pfmb)),
        Some(s) => {
            let pe = scenario_error_probability_order(s, order, pf);
            let pem = if order.get() == 0 {
                pf
            } else {
                build_network(order, LeafConfig::Scenario(s, pf), pfmb)?.exact_error_probability()
            };
            (pe, pem)
        }
    };
    let re = reduction_rate(pf, pe).ok();
    Ok(OrderColumns {
        order,
        pe,
        pem,
        re,
        rem: reduction_rate(pf, pem).ok(),
        re_per_module: re.map(|r| r.per_module(order)),
        empirical: None,
    })
}

fn analytic_row(
    cfg: &SweepConfig,
    orders: &[TmrOrder],
    pf: Probability,
) -> Result<ComparisonRow, HtmrError> {
    let pfmb = cfg.pfmb.resolve(pf);
    let orders = orders
        .iter()
        .map(|&o| analytic_columns(pf, pfmb, o, cfg.scenario))
        .collect::<Result<_, _>>()?;
    Ok(ComparisonRow {
        pf,
        pfmb,
        scenario: cfg.scenario,
        orders,
    })
}

/// Seed for one (point, order, scenario) Monte-Carlo run.
pub fn stream_seed(
    master: u64,
    point: usize,
    order: TmrOrder,
    scenario: Option<ScenarioPattern>,
) -> u64 {
    let code = match scenario {
        None => 0,
        Some(ScenarioPattern::Nnf) => 1,
        Some(ScenarioPattern::Nff) => 2,
        Some(ScenarioPattern::Fff) => 3,
    };
    derive_seed(derive_seed(point_seed(master, point), order.get() as u64), code)
}

pub fn sweep_analytic(cfg: &SweepConfig) -> Result<Vec<ComparisonRow>, HtmrError> {
    let orders = cfg.orders()?;
    cfg.grid
        .points()?
        .into_iter()
        .map(|pf| analytic_row(cfg, &orders, pf))
        .collect()
}

pub fn sweep_monte_carlo(
    cfg: &SweepConfig,
    exec: &Executor,
) -> Result<Vec<ComparisonRow>, HtmrError> {
    if cfg.trials == 0 {
        return Err(HtmrError::NoTrials);
    }
    let orders = cfg.orders()?;
    let points = cfg.grid.points()?;
    let rows = exec.map(points.len(), |i| {
        let mut row = analytic_row(cfg, &orders, points[i])?;
        for col in &mut row.orders {
            let seed = stream_seed(cfg.seed, i, col.order, cfg.scenario);
            let est = if col.order.get() == 0 {
                run_bare_module_seeded(row.pf, cfg.trials, cfg.reference, seed, exec)?
            } else {
                let leaves = match cfg.scenario {
                    None => LeafConfig::Uniform(row.pf),
                    Some(s) => LeafConfig::Scenario(s, row.pf),
                };
                let net = build_network(col.order, leaves, row.pfmb)?;
                run_trials_seeded(&net, cfg.trials, cfg.reference, seed, exec)?.0
            };
            col.empirical = Some(est);
        }
        Ok(row)
    });
    rows.into_iter().collect()
}

/// Rows for each of the three scenarios, in `NNF, NFF, FFF` order. The
/// scenario field of `cfg` is ignored; empirical columns are filled when
/// `cfg.trials > 0`.
pub fn scenario_suite(
    cfg: &SweepConfig,
    exec: &Executor,
) -> Result<Vec<(ScenarioPattern, Vec<ComparisonRow>)>, HtmrError> {
    ScenarioPattern::ALL
        .iter()
        .map(|&s| {
            let c = SweepConfig {
                scenario: Some(s),
                ..cfg.clone()
            };
            let rows = if c.trials == 0 {
                sweep_analytic(&c)?
            } else {
                sweep_monte_carlo(&c, exec)?
            };
            Ok((s, rows))
        })
        .collect()
}

/// Operations-per-error cell: the exact `1 / pe` and its table presentation.
#[derive(Debug, Clone, PartialEq)]
pub struct OpsCell {
    pub exact: f64,
    /// Floored; values of 1000 and above are further truncated to two
    /// significant figures.
    pub presented: u64,
}

impl OpsCell {
    pub fn new(exact: f64) -> Self {
        let floored = exact.floor() as u64;
        let digits = floored.checked_ilog10().map_or(1, |d| d + 1);
        let presented = if digits > 3 {
            let scale = 10u64.pow(digits - 2);
            floored / scale * scale
        } else {
            floored
        };
        Self { exact, presented }
    }

    /// `"35"`, `"433"`, or `"3.3e5"` for values of 1000 and above.
    pub fn text(&self) -> String {
        let v = self.presented;
        if v < 1000 {
            return v.to_string();
        }
        let exp = v.ilog10();
        let lead = v / 10u64.pow(exp - 1);
        format!("{}.{}e{}", lead / 10, lead % 10, exp)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table3Row {
    pub pf: Probability,
    /// Orders 0 (bare module), 1 and 2.
    pub cells: [OpsCell; 3],
}

pub fn table3_report() -> Vec<Table3Row> {
    TABLE3_PF
        .iter()
        .map(|&v| {
            let pf = Probability::new(v).expect("table grid is in range");
            let cell = |j| {
                let pe = pe_order(TmrOrder::new(j).expect("small order"), pf);
                OpsCell::new(operations_per_error(pe).expect("pe > 0 for pf > 0"))
            };
            Table3Row {
                pf,
                cells: [cell(0), cell(1), cell(2)],
            }
        })
        .collect()
}

/// Orders 1 and 2 over a logarithmic grid reaching far below the region
/// Monte-Carlo can resolve. Empirical columns are only produced when
/// `cfg.trials > 0` and the whole grid lies at or above
/// [`EMPIRICAL_PF_FLOOR`].
pub fn low_probability_report(
    cfg: &SweepConfig,
    exec: &Executor,
) -> Result<Vec<ComparisonRow>, HtmrError> {
    let min = match cfg.grid {
        Grid::Log { min, .. } => min,
        _ => {
            return Err(HtmrError::InvalidGrid(
                "low-probability report needs a logarithmic grid".into(),
            ))
        }
    };
    if min < LOW_PROBABILITY_PF_FLOOR {
        return Err(HtmrError::InvalidGrid(format!(
            "low-probability grid must start at or above {LOW_PROBABILITY_PF_FLOOR}, got {min}"
        )));
    }
    if cfg.trials > 0 && min < EMPIRICAL_PF_FLOOR {
        return Err(HtmrError::EmpiricalInfeasible {
            pf: min,
            limit: EMPIRICAL_PF_FLOOR,
        });
    }
    let c = SweepConfig {
        orders: vec![TmrOrder::FIRST, TmrOrder::SECOND],
        ..cfg.clone()
    };
    if c.trials > 0 {
        sweep_monte_carlo(&c, exec)
    } else {
        sweep_analytic(&c)
    }
}

/// `re_2 / 9 - re_1 / 3` for a row carrying both orders.
pub fn per_module_gap(row: &ComparisonRow) -> Option<f64> {
    let r1 = row.order(1)?.re_per_module?;
    let r2 = row.order(2)?.re_per_module?;
    Some(r2.decades() - r1.decades())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClaimsReport {
    pub pf: f64,
    pub pe1: f64,
    pub pe2: f64,
    /// `pf / pe_2`, the improvement over an unprotected module.
    pub improvement_over_module: f64,
    /// `(pf / pe_2) / (pf / pe_1)`, the improvement of order 2 over order 1.
    pub improvement_over_first: f64,
    pub over_module_exceeds_40: bool,
    pub over_first_exceeds_10: bool,
}

pub fn reduction_claims_at(pf: Probability) -> Result<ClaimsReport, HtmrError> {
    let pe1 = pe_order(TmrOrder::FIRST, pf);
    let pe2 = pe_order(TmrOrder::SECOND, pf);
    if pe2.is_zero() {
        return Err(HtmrError::NoErrorsExpected);
    }
    let over_module = pf.value() / pe2.value();
    let over_first = over_module / (pf.value() / pe1.value());
    Ok(ClaimsReport {
        pf: pf.value(),
        pe1: pe1.value(),
        pe2: pe2.value(),
        improvement_over_module: over_module,
        improvement_over_first: over_first,
        over_module_exceeds_40: over_module >= 40.0,
        over_first_exceeds_10: over_first >= 10.0,
    })
}

/// Checks the order-2 improvement claims at pf = 0.1.
pub fn reduction_claims_check() -> ClaimsReport {
    reduction_claims_at(Probability::new(0.1).expect("in range")).expect("pe2 > 0 at 0.1")
}
