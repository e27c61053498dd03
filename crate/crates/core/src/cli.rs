//! Command-line front end. [`run`] turns parsed arguments into an
//! [`OutputDocument`]; the binary only parses, runs and writes.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::error::HtmrError;
use crate::exec::Executor;
use crate::fault::{RandomSource, ScenarioPattern};
use crate::harness::{
    low_probability_report, per_module_gap, reduction_claims_at, scenario_suite,
    sweep_analytic, sweep_monte_carlo, table3_report, Grid, PfmbMode, SweepConfig,
    STREAM_DERIVATION,
};
use crate::logic::{vote_with_alarm, TripleInput};
use crate::network::ReferenceStream;
use crate::reliability::{expansion_audit, proposition_check, Probability, TmrOrder};
use crate::report::{format_real, push_sweep_rows, Cell, Format, Metadata, OutputDocument, SWEEP_COLUMNS};

#[derive(Debug, Parser)]
#[command(
    name = "htmr-lab",
    version,
    about = "Hierarchical TMR networks: voter logic, error-probability models and fault-injection sweeps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,

    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for Monte-Carlo runs (0 = all cores). Does not affect results.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Lin,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReferenceArg {
    /// 0, 1, 0, 1, ...
    Alt,
    #[value(name = "0")]
    Zero,
    #[value(name = "1")]
    One,
}

impl From<ReferenceArg> for ReferenceStream {
    fn from(r: ReferenceArg) -> Self {
        match r {
            ReferenceArg::Alt => ReferenceStream::Alternating,
            ReferenceArg::Zero => ReferenceStream::Constant(false),
            ReferenceArg::One => ReferenceStream::Constant(true),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Explicit module error probabilities (comma separated).
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["pf_min", "pf_max", "pf_steps", "pf_scale"])]
    pub pf: Option<Vec<f64>>,
    #[arg(long)]
    pub pf_min: Option<f64>,
    #[arg(long)]
    pub pf_max: Option<f64>,
    #[arg(long)]
    pub pf_steps: Option<usize>,
    #[arg(long, value_enum)]
    pub pf_scale: Option<ScaleArg>,
}

impl GridArgs {
    fn grid(&self, default: Grid) -> Grid {
        if let Some(points) = &self.pf {
            return Grid::Points(points.clone());
        }
        let (dmin, dmax, dsteps, dlog) = match default {
            Grid::Linear { min, max, steps } => (min, max, steps, false),
            Grid::Log { min, max, steps } => (min, max, steps, true),
            Grid::Points(_) => (0.0, 1.0, 21, false),
        };
        let min = self.pf_min.unwrap_or(dmin);
        let max = self.pf_max.unwrap_or(dmax);
        let steps = self.pf_steps.unwrap_or(dsteps);
        let log = self.pf_scale.map_or(dlog, |s| s == ScaleArg::Log);
        if log {
            Grid::Log { min, max, steps }
        } else {
            Grid::Linear { min, max, steps }
        }
    }
}

fn parse_pfmb(s: &str) -> Result<PfmbMode, String> {
    if s.eq_ignore_ascii_case("pf") {
        return Ok(PfmbMode::EqualToPf);
    }
    let v: f64 = s
        .parse()
        .map_err(|_| format!("expected 0, pf or a probability, got {s:?}"))?;
    if v == 0.0 {
        return Ok(PfmbMode::Zero);
    }
    Probability::new(v)
        .map(PfmbMode::Fixed)
        .map_err(|e| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the 8-row voter/alarm truth table.
    TruthTable,

    /// Closed-form error probabilities and reduction rates over a pf grid.
    Analytic {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        orders: Vec<u32>,
        /// Voter error probability: 0, pf, or a fixed value.
        #[arg(long, value_parser = parse_pfmb, default_value = "0")]
        pfmb: PfmbMode,
        #[arg(long)]
        scenario: Option<ScenarioPattern>,
    },

    /// Monte-Carlo fault injection on the structural network.
    Simulate {
        #[command(flatten)]
        grid: GridArgs,
        /// Single TMR order (overrides --orders).
        #[arg(long)]
        order: Option<u32>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        orders: Vec<u32>,
        #[arg(long, value_parser = parse_pfmb, default_value = "0")]
        pfmb: PfmbMode,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long)]
        scenario: Option<ScenarioPattern>,
        #[arg(long, value_enum, default_value_t = ReferenceArg::Alt)]
        reference: ReferenceArg,
    },

    /// NNF / NFF / FFF scenario study for orders 1 and 2.
    Scenarios {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        orders: Vec<u32>,
        #[arg(long, value_parser = parse_pfmb, default_value = "0")]
        pfmb: PfmbMode,
        /// Trials per point; 0 gives analytic columns only.
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, value_enum, default_value_t = ReferenceArg::Alt)]
        reference: ReferenceArg,
    },

    /// Operations per output error for a bare module and orders 1 and 2.
    Table3,

    /// Check that the error probability strictly decreases with order.
    Proposition {
        #[arg(long, value_delimiter = ',', default_value = "0.1")]
        pf: Vec<f64>,
        #[arg(long, default_value_t = 5)]
        j_max: u32,
    },

    /// Compare the two-level composition with its degree-9 expansions.
    Audit {
        /// Sample points (comma separated); defaults to 0, 0.1, ..., 1.
        #[arg(long, value_delimiter = ',')]
        pf: Option<Vec<f64>>,
        /// Additional uniformly drawn sample points.
        #[arg(long, default_value_t = 10)]
        random: usize,
    },

    /// Reduction rates per module in the very-low pf region (analytic).
    LowProb {
        #[command(flatten)]
        grid: GridArgs,
        /// Monte-Carlo trials; only allowed when the whole grid is >= 1e-3.
        #[arg(long, default_value_t = 0)]
        trials: u64,
    },

    /// Order-2 improvement ratios over a bare module and over order 1.
    Claims {
        #[arg(long, default_value_t = 0.1)]
        pf: f64,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Invalid(#[from] HtmrError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

fn to_orders(js: &[u32]) -> Result<Vec<TmrOrder>, HtmrError> {
    js.iter().map(|&j| TmrOrder::new(j)).collect()
}

fn describe_grid(grid: &Grid) -> String {
    match grid {
        Grid::Points(v) => {
            let pts: Vec<String> = v.iter().map(|&x| format_real(x)).collect();
            format!("points:{}", pts.join(";"))
        }
        Grid::Linear { min, max, steps } => {
            format!("lin:{}:{}:{steps}", format_real(*min), format_real(*max))
        }
        Grid::Log { min, max, steps } => {
            format!("log:{}:{}:{steps}", format_real(*min), format_real(*max))
        }
    }
}

fn describe_pfmb(p: PfmbMode) -> String {
    match p {
        PfmbMode::Zero => "0".into(),
        PfmbMode::EqualToPf => "pf".into(),
        PfmbMode::Fixed(v) => format_real(v.value()),
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
}

fn sweep_metadata(command: &str, cfg: &SweepConfig) -> Metadata {
    let reference = match cfg.reference {
        ReferenceStream::Alternating => "alt".to_string(),
        ReferenceStream::Constant(b) => (b as u8).to_string(),
    };
    let mut m = Metadata::new(command, cfg.seed)
        .with("grid", describe_grid(&cfg.grid))
        .with("orders", join(&cfg.orders))
        .with("pfmb", describe_pfmb(cfg.pfmb))
        .with("trials", cfg.trials);
    if let Some(s) = cfg.scenario {
        m = m.with("scenario", s);
    }
    if cfg.trials > 0 {
        m = m.with("reference", reference).with("streams", STREAM_DERIVATION);
    }
    m
}

pub fn run(cli: &Cli) -> Result<OutputDocument, CliError> {
    let exec = Executor::parallel(cli.workers);
    let seed = cli.seed;
    let doc = match &cli.command {
        Command::TruthTable => cmd_truth_table(seed),
        Command::Analytic {
            grid,
            orders,
            pfmb,
            scenario,
        } => {
            let cfg = SweepConfig {
                grid: grid.grid(Grid::default_linear()),
                orders: to_orders(orders)?,
                pfmb: *pfmb,
                trials: 0,
                scenario: *scenario,
                seed,
                reference: ReferenceStream::Alternating,
            };
            let rows = sweep_analytic(&cfg)?;
            let mut doc = OutputDocument::new(sweep_metadata("analytic", &cfg), &SWEEP_COLUMNS);
            push_sweep_rows(&mut doc, &[], &rows);
            doc
        }
        Command::Simulate {
            grid,
            order,
            orders,
            pfmb,
            trials,
            scenario,
            reference,
        } => {
            let orders = match order {
                Some(j) => vec![TmrOrder::new(*j)?],
                None => to_orders(orders)?,
            };
            let cfg = SweepConfig {
                grid: grid.grid(Grid::default_linear()),
                orders,
                pfmb: *pfmb,
                trials: *trials,
                scenario: *scenario,
                seed,
                reference: (*reference).into(),
            };
            let rows = sweep_monte_carlo(&cfg, &exec)?;
            let mut doc = OutputDocument::new(sweep_metadata("simulate", &cfg), &SWEEP_COLUMNS);
            push_sweep_rows(&mut doc, &[], &rows);
            doc
        }
        Command::Scenarios {
            grid,
            orders,
            pfmb,
            trials,
            reference,
        } => {
            let cfg = SweepConfig {
                grid: grid.grid(Grid::Points(vec![0.1, 0.3, 0.5, 0.9])),
                orders: to_orders(orders)?,
                pfmb: *pfmb,
                trials: *trials,
                scenario: None,
                seed,
                reference: (*reference).into(),
            };
            let suite = scenario_suite(&cfg, &exec)?;
            let mut columns = vec!["scenario"];
            columns.extend(SWEEP_COLUMNS);
            let mut doc = OutputDocument::new(
                sweep_metadata("scenarios", &cfg).with("order2_mapping", "pattern-per-triple"),
                &columns,
            );
            for (s, rows) in &suite {
                push_sweep_rows(&mut doc, &[Cell::from(s.label())], rows);
            }
            doc
        }
        Command::Table3 => cmd_table3(seed),
        Command::Proposition { pf, j_max } => cmd_proposition(seed, pf, *j_max)?,
        Command::Audit { pf, random } => cmd_audit(seed, pf.as_deref(), *random)?,
        Command::LowProb { grid, trials } => {
            let cfg = SweepConfig {
                grid: grid.grid(Grid::Log {
                    min: 1e-8,
                    max: 1e-3,
                    steps: 21,
                }),
                orders: vec![TmrOrder::FIRST, TmrOrder::SECOND],
                trials: *trials,
                seed,
                ..SweepConfig::default()
            };
            let rows = low_probability_report(&cfg, &exec)?;
            let mut columns = SWEEP_COLUMNS.to_vec();
            columns.push("per_module_gap");
            let mut doc = OutputDocument::new(sweep_metadata("low-prob", &cfg), &columns);
            for row in &rows {
                let mut lines = OutputDocument::new(doc.metadata.clone(), &SWEEP_COLUMNS);
                push_sweep_rows(&mut lines, &[], std::slice::from_ref(row));
                let gap = per_module_gap(row);
                for (mut line, col) in lines.rows.into_iter().zip(&row.orders) {
                    line.push(match gap {
                        Some(g) if col.order == TmrOrder::SECOND => Cell::Real(g),
                        _ => Cell::Empty,
                    });
                    doc.push(line);
                }
            }
            doc
        }
        Command::Claims { pf } => {
            let r = reduction_claims_at(Probability::new(*pf)?)?;
            let mut doc = OutputDocument::new(
                Metadata::new("claims", seed),
                &[
                    "pf",
                    "pe1",
                    "pe2",
                    "improvement_over_module",
                    "improvement_over_first",
                    "over_module_ge_40",
                    "over_first_ge_10",
                ],
            );
            doc.push(vec![
                r.pf.into(),
                r.pe1.into(),
                r.pe2.into(),
                r.improvement_over_module.into(),
                r.improvement_over_first.into(),
                r.over_module_exceeds_40.to_string().into(),
                r.over_first_exceeds_10.to_string().into(),
            ]);
            doc
        }
    };
    Ok(doc)
}

pub fn cmd_truth_table(seed: u64) -> OutputDocument {
    let mut doc = OutputDocument::new(
        Metadata::new("truth-table", seed),
        &["y1", "y2", "y3", "y", "alarm"],
    );
    for t in TripleInput::all() {
        let out = vote_with_alarm(t);
        let mut row: Vec<Cell> = t.digits().iter().map(|&d| Cell::from(d as u64)).collect();
        row.extend(out.digits().iter().map(|&d| Cell::from(d as u64)));
        doc.push(row);
    }
    doc
}

pub fn cmd_table3(seed: u64) -> OutputDocument {
    let mut doc = OutputDocument::new(
        Metadata::new("table3", seed).with("presentation", "floor;2-significant-figures-from-1e3"),
        &[
            "pf",
            "data_path",
            "first_order",
            "second_order",
            "data_path_exact",
            "first_order_exact",
            "second_order_exact",
        ],
    );
    for row in table3_report() {
        let mut cells = vec![Cell::from(row.pf.value())];
        cells.extend(row.cells.iter().map(|c| Cell::from(c.text())));
        cells.extend(row.cells.iter().map(|c| Cell::from(c.exact)));
        doc.push(cells);
    }
    doc
}

pub fn cmd_proposition(seed: u64, pfs: &[f64], j_max: u32) -> Result<OutputDocument, HtmrError> {
    let j_max = TmrOrder::new(j_max)?;
    let mut doc = OutputDocument::new(
        Metadata::new("proposition", seed).with("j_max", j_max),
        &["pf", "order", "pe", "verdict", "overall"],
    );
    for &pf in pfs {
        let r = proposition_check(Probability::new(pf)?, j_max)?;
        for s in &r.steps {
            doc.push(vec![
                Cell::from(pf),
                Cell::from(s.order as u64),
                Cell::from(s.pe),
                s.verdict.map_or(Cell::Empty, |v| Cell::from(v.to_string())),
                Cell::from(r.verdict.to_string()),
            ]);
        }
    }
    Ok(doc)
}

pub fn cmd_audit(seed: u64, pf: Option<&[f64]>, random: usize) -> Result<OutputDocument, HtmrError> {
    let mut samples: Vec<Probability> = match pf {
        Some(v) => v.iter().map(|&x| Probability::new(x)).collect::<Result<_, _>>()?,
        None => (0..=10)
            .map(|i| Probability::new(i as f64 / 10.0))
            .collect::<Result<_, _>>()?,
    };
    let mut rng = RandomSource::new(seed);
    samples.extend((0..random).map(|_| Probability::clamped(rng.next_uniform())));
    let audit = expansion_audit(&samples);
    let meta = Metadata::new("audit", seed)
        .with("random", random)
        .with("printed_coefficients", join(&audit.printed_coefficients))
        .with("derived_coefficients", join(&audit.derived_coefficients))
        .with("max_printed_deviation", format_real(audit.max_printed_deviation))
        .with("max_derived_deviation", format_real(audit.max_derived_deviation));
    let mut doc = OutputDocument::new(
        meta,
        &[
            "p",
            "composition",
            "printed",
            "derived",
            "printed_deviation",
            "derived_deviation",
        ],
    );
    for s in &audit.samples {
        doc.push(vec![
            s.p.into(),
            s.composition.into(),
            s.printed.into(),
            s.derived.into(),
            s.printed_deviation.into(),
            s.derived_deviation.into(),
        ]);
    }
    Ok(doc)
}

/// Writes the rendered document to `--out` or standard output.
pub fn emit(cli: &Cli, doc: &OutputDocument) -> Result<(), CliError> {
    let text = doc.render(cli.format.into());
    match &cli.out {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}
