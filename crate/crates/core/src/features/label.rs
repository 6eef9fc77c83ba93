use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which of the three substructures carry a fault, written `[s1 s2 s3]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FaultLabel {
    bits: [bool; 3],
}

impl FaultLabel {
    pub const HEALTHY: FaultLabel = FaultLabel::new(false, false, false);

    /// Presentation order of the confusion-matrix rows and columns.
    pub const TABLE_ORDER: [FaultLabel; 8] = [
        FaultLabel::new(false, false, false),
        FaultLabel::new(true, false, false),
        FaultLabel::new(false, true, false),
        FaultLabel::new(false, false, true),
        FaultLabel::new(true, true, false),
        FaultLabel::new(true, false, true),
        FaultLabel::new(false, true, true),
        FaultLabel::new(true, true, true),
    ];

    pub const fn new(s1: bool, s2: bool, s3: bool) -> Self {
        FaultLabel { bits: [s1, s2, s3] }
    }

    pub fn from_bits(bits: [bool; 3]) -> Self {
        FaultLabel { bits }
    }

    /// Inverse of [`class_index`](Self::class_index).
    pub fn from_class_index(index: usize) -> Result<Self> {
        if index > 7 {
            return Err(Error::validation(format!("class index {index} out of range 0..=7")));
        }
        Ok(FaultLabel::new(index & 4 != 0, index & 2 != 0, index & 1 != 0))
    }

    pub fn bits(&self) -> [bool; 3] {
        self.bits
    }

    pub fn bit(&self, substructure: usize) -> bool {
        self.bits[substructure]
    }

    /// `4·s1 + 2·s2 + s3`.
    pub fn class_index(&self) -> usize {
        self.bits
            .iter()
            .fold(0, |acc, &b| (acc << 1) | usize::from(b))
    }

    /// Position in [`TABLE_ORDER`](Self::TABLE_ORDER).
    pub fn table_position(&self) -> usize {
        Self::TABLE_ORDER
            .iter()
            .position(|l| l == self)
            .expect("every label appears in the table order")
    }

    pub fn fault_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Targets in {0, 1} for the three network outputs.
    pub fn as_targets(&self) -> [f64; 3] {
        self.bits.map(|b| if b { 1.0 } else { 0.0 })
    }
}

impl fmt::Display for FaultLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.bits.map(u8::from);
        write!(f, "[{a}{b}{c}]")
    }
}

impl FromStr for FaultLabel {
    type Err = Error;

    /// Accepts `[101]`, `101`, or `[1 0 1]`.
    fn from_str(s: &str) -> Result<Self> {
        let digits: Vec<char> = s
            .chars()
            .filter(|c| !matches!(c, '[' | ']' | ' '))
            .collect();
        match digits.as_slice() {
            [a, b, c] if [a, b, c].iter().all(|d| matches!(d, '0' | '1')) => {
                Ok(FaultLabel::new(*a == '1', *b == '1', *c == '1'))
            }
            _ => Err(Error::validation(format!("invalid fault label {s:?}"))),
        }
    }
}
