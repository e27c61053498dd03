//! Stochastic faulty-module model and the seeded random streams behind it.
//!
//! A faulty module is a fault-free reference module whose output passes
//! through a bit-error block: with probability `rate` the bit is inverted.
//! Every faulty module consumes exactly one uniform draw per evaluation,
//! a fault-free module consumes none.
//!
//! Streams are ChaCha8 keystreams (`rand_chacha`). A stream is identified by
//! a 64-bit seed and a 64-bit stream index; the uniform in `[0, 1)` is the top
//! 53 bits of one `u64` output scaled by `2^-53`. Both the algorithm and the
//! conversion are frozen so that results reproduce across runs and platforms.

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use crate::error::HtmrError;
use crate::reliability::Probability;

const UNIT_SCALE: f64 = 1.0 / (1u64 << 53) as f64;

/// Deterministic uniform stream.
#[derive(Debug, Clone)]
pub struct RandomSource {
    rng: ChaCha8Rng,
    draws: u64,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self::stream(seed, 0)
    }

    /// Independent stream `index` under `seed`.
    pub fn stream(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Self { rng, draws: 0 }
    }

    /// Uniform real in `[0, 1)`.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        self.draws += 1;
        (self.rng.next_u64() >> 11) as f64 * UNIT_SCALE
    }

    /// Number of uniforms drawn so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }
}

/// Seed for child `index` of `master` (SplitMix64 finaliser over both words).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Inverts `bit` with probability `rate`. Always consumes one draw.
#[inline]
pub fn ber_corrupt(bit: bool, rate: Probability, rng: &mut RandomSource) -> bool {
    let u = rng.next_uniform();
    if u < rate.value() {
        !bit
    } else {
        bit
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
#[serde(tag = "kind", content = "rate", rename_all = "snake_case")]
pub enum ModuleKind {
    #[default]
    FaultFree,
    Faulty(Probability),
}

impl ModuleKind {
    /// Probability that this module's output is wrong.
    pub fn error_rate(self) -> Probability {
        match self {
            ModuleKind::FaultFree => Probability::ZERO,
            ModuleKind::Faulty(rate) => rate,
        }
    }

    pub fn is_faulty(self) -> bool {
        matches!(self, ModuleKind::Faulty(_))
    }
}

#[inline]
pub fn module_output(kind: ModuleKind, reference_bit: bool, rng: &mut RandomSource) -> bool {
    match kind {
        ModuleKind::FaultFree => reference_bit,
        ModuleKind::Faulty(rate) => ber_corrupt(reference_bit, rate, rng),
    }
}

/// Module kinds feeding one voter, in `y1, y2, y3` order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scenario(pub [ModuleKind; 3]);

impl Scenario {
    pub fn uniform(rate: Probability) -> Self {
        Self([ModuleKind::Faulty(rate); 3])
    }

    pub fn kinds(&self) -> &[ModuleKind; 3] {
        &self.0
    }
}

/// The three faulty-module test sessions: one, two or three faulty modules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ScenarioPattern {
    #[serde(rename = "NNF")]
    Nnf,
    #[serde(rename = "NFF")]
    Nff,
    #[serde(rename = "FFF")]
    Fff,
}

impl ScenarioPattern {
    pub const ALL: [ScenarioPattern; 3] =
        [ScenarioPattern::Nnf, ScenarioPattern::Nff, ScenarioPattern::Fff];

    /// Which of `y1, y2, y3` are faulty.
    pub fn faulty_positions(self) -> [bool; 3] {
        match self {
            ScenarioPattern::Nnf => [false, false, true],
            ScenarioPattern::Nff => [false, true, true],
            ScenarioPattern::Fff => [true, true, true],
        }
    }

    pub fn with_rate(self, rate: Probability) -> Scenario {
        Scenario(self.faulty_positions().map(|faulty| {
            if faulty {
                ModuleKind::Faulty(rate)
            } else {
                ModuleKind::FaultFree
            }
        }))
    }

    pub fn label(self) -> &'static str {
        match self {
            ScenarioPattern::Nnf => "NNF",
            ScenarioPattern::Nff => "NFF",
            ScenarioPattern::Fff => "FFF",
        }
    }
}

impl fmt::Display for ScenarioPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ScenarioPattern {
    type Err = HtmrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "NNF" => Ok(ScenarioPattern::Nnf),
            "NFF" => Ok(ScenarioPattern::Nff),
            "FFF" => Ok(ScenarioPattern::Fff),
            _ => Err(HtmrError::UnknownScenario(s.to_string())),
        }
    }
}
