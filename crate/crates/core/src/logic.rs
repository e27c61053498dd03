//! Bit-level behaviour of a TMR flip-flop: majority voter, disagreement
//! alarm and the output register.
//!
//! Bits are carried as `bool`; the `*_digits` helpers convert to and from
//! the `0`/`1` notation used in truth tables and CSV output.

use std::fmt;

use crate::error::HtmrError;

/// The three redundant copies of one bit feeding a voter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct TripleInput {
    pub y1: bool,
    pub y2: bool,
    pub y3: bool,
}

impl TripleInput {
    pub const fn new(y1: bool, y2: bool, y3: bool) -> Self {
        Self { y1, y2, y3 }
    }

    /// Builds an input from `0`/`1` digits. Any other digit is rejected.
    pub fn from_digits(y1: u8, y2: u8, y3: u8) -> Result<Self, HtmrError> {
        Ok(Self::new(digit(y1)?, digit(y2)?, digit(y3)?))
    }

    /// All eight inputs in truth-table order (`y1` is the fastest-changing bit).
    pub fn all() -> impl Iterator<Item = TripleInput> {
        (0u8..8).map(|i| Self::new(i & 1 != 0, i & 2 != 0, i & 4 != 0))
    }

    pub fn digits(self) -> [u8; 3] {
        [self.y1 as u8, self.y2 as u8, self.y3 as u8]
    }

    pub fn inverted(self) -> Self {
        Self::new(!self.y1, !self.y2, !self.y3)
    }
}

impl fmt::Display for TripleInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.digits();
        write!(f, "{a},{b},{c}")
    }
}

fn digit(d: u8) -> Result<bool, HtmrError> {
    match d {
        0 => Ok(false),
        1 => Ok(true),
        other => Err(HtmrError::InvalidDigit(other)),
    }
}

/// Voted value together with the alarm tap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VoteOutcome {
    pub value: bool,
    pub alarm: bool,
}

impl VoteOutcome {
    pub fn digits(self) -> [u8; 2] {
        [self.value as u8, self.alarm as u8]
    }
}

/// Sum-of-products majority: `y1·y2·!y3 + y1·!y2·y3 + !y1·y2·y3 + y1·y2·y3`.
#[inline]
pub fn majority_vote(t: TripleInput) -> bool {
    let TripleInput { y1, y2, y3 } = t;
    (y1 && y2 && !y3) || (y1 && !y2 && y3) || (!y1 && y2 && y3) || (y1 && y2 && y3)
}

/// Weak-consensus alarm: `(y1 + y2 + y3) · (!y1 + !y2 + !y3)`.
#[inline]
pub fn alarm_signal(t: TripleInput) -> bool {
    let TripleInput { y1, y2, y3 } = t;
    (y1 || y2 || y3) && (!y1 || !y2 || !y3)
}

#[inline]
pub fn vote_with_alarm(t: TripleInput) -> VoteOutcome {
    VoteOutcome {
        value: majority_vote(t),
        alarm: alarm_signal(t),
    }
}

/// Register element of a TMR flip-flop. Resets to 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TmrRegister {
    pub stored: bool,
    pub loaded: bool,
}

impl TmrRegister {
    pub const fn reset() -> Self {
        Self {
            stored: false,
            loaded: false,
        }
    }
}

/// One clock edge: vote and alarm are combinational on `t`, the vote is
/// latched into the register.
pub fn flipflop_step(_reg: TmrRegister, t: TripleInput) -> (TmrRegister, VoteOutcome) {
    let outcome = vote_with_alarm(t);
    let next = TmrRegister {
        stored: outcome.value,
        loaded: true,
    };
    (next, outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(a: u8, b: u8, c: u8) -> TripleInput {
        TripleInput::from_digits(a, b, c).unwrap()
    }

    #[test]
    fn spot_rows() {
        assert!(!majority_vote(t(0, 0, 0)));
        assert!(majority_vote(t(1, 0, 1)));
        assert!(majority_vote(t(1, 1, 1)));
        assert!(!alarm_signal(t(0, 0, 0)));
        assert!(alarm_signal(t(1, 0, 0)));
        assert!(!alarm_signal(t(1, 1, 1)));
        assert_eq!(vote_with_alarm(t(1, 1, 0)).digits(), [1, 1]);
        assert_eq!(vote_with_alarm(t(0, 0, 1)).digits(), [0, 1]);
        assert_eq!(vote_with_alarm(t(0, 0, 0)).digits(), [0, 0]);
    }

    #[test]
    fn rejects_non_binary_digit() {
        assert!(matches!(
            TripleInput::from_digits(0, 2, 1),
            Err(HtmrError::InvalidDigit(2))
        ));
    }

    #[test]
    fn all_enumerates_eight_distinct_inputs() {
        let v: Vec<_> = TripleInput::all().collect();
        assert_eq!(v.len(), 8);
        for (i, a) in v.iter().enumerate() {
            for b in &v[i + 1..] {
                assert_ne!(a, b);
            }
        }
    }

    #[test]
    fn flipflop_latches_vote() {
        let reg = TmrRegister::reset();
        assert!(!reg.stored && !reg.loaded);

        let (reg, out) = flipflop_step(reg, t(1, 1, 0));
        assert_eq!((reg.stored, reg.loaded), (true, true));
        assert_eq!(out.digits(), [1, 1]);

        let (reg, out) = flipflop_step(reg, t(0, 0, 0));
        assert!(!reg.stored);
        assert_eq!(out.digits(), [0, 0]);

        let (reg, out) = flipflop_step(TmrRegister::reset(), t(0, 1, 0));
        assert!(!reg.stored);
        assert_eq!(out.digits(), [0, 1]);
    }

    #[test]
    fn algebraic_properties_hold_for_every_input() {
        for x in TripleInput::all() {
            let [a, b, c] = x.digits();
            let sum = a + b + c;
            assert_eq!(majority_vote(x), sum >= 2, "{x}");
            assert_eq!(!alarm_signal(x), a == b && b == c, "{x}");

            let perms = [
                TripleInput::new(x.y1, x.y3, x.y2),
                TripleInput::new(x.y2, x.y1, x.y3),
                TripleInput::new(x.y2, x.y3, x.y1),
                TripleInput::new(x.y3, x.y1, x.y2),
                TripleInput::new(x.y3, x.y2, x.y1),
            ];
            for p in perms {
                assert_eq!(vote_with_alarm(p), vote_with_alarm(x));
            }

            assert_eq!(majority_vote(x.inverted()), !majority_vote(x));
            assert_eq!(alarm_signal(x.inverted()), alarm_signal(x));
        }
    }
}
