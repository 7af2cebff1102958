//! Decoder maps `x̂ = f(y, u)`.

use std::fmt;
use std::str::FromStr;

use crate::error::RdError;

/// A deterministic decoder as a 2×2 table, rows indexed by `y`, columns by `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DecoderTable(pub [[u8; 2]; 2]);

impl DecoderTable {
    #[inline]
    pub fn decode(&self, y: u8, u: u8) -> u8 {
        self.0[y as usize][u as usize]
    }
}

/// The four decoders that arise as argmax reconstructions in the canonical
/// domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReconstructionRule {
    /// `x̂ = u`
    HatU,
    /// `x̂ = y ∨ u`
    HatOr,
    /// `x̂ = y ∧ u`
    HatAnd,
    /// `x̂ = y`
    HatY,
}

impl ReconstructionRule {
    pub const ALL: [ReconstructionRule; 4] = [Self::HatU, Self::HatOr, Self::HatAnd, Self::HatY];

    pub fn x_out(self) -> DecoderTable {
        match self {
            Self::HatU => DecoderTable([[0, 1], [0, 1]]),
            Self::HatOr => DecoderTable([[0, 1], [1, 1]]),
            Self::HatAnd => DecoderTable([[0, 0], [0, 1]]),
            Self::HatY => DecoderTable([[0, 0], [1, 1]]),
        }
    }

    #[inline]
    pub fn decode(self, y: u8, u: u8) -> u8 {
        match self {
            Self::HatU => u,
            Self::HatOr => y | u,
            Self::HatAnd => y & u,
            Self::HatY => y,
        }
    }

    pub fn from_table(table: DecoderTable) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.x_out() == table)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::HatU => "u",
            Self::HatOr => "or",
            Self::HatAnd => "and",
            Self::HatY => "y",
        }
    }
}

impl From<ReconstructionRule> for DecoderTable {
    fn from(rule: ReconstructionRule) -> Self {
        rule.x_out()
    }
}

impl fmt::Display for ReconstructionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReconstructionRule {
    type Err = RdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "u" => Ok(Self::HatU),
            "or" => Ok(Self::HatOr),
            "and" => Ok(Self::HatAnd),
            "y" => Ok(Self::HatY),
            other => Err(RdError::InvalidArgument(format!(
                "unknown reconstruction rule {other:?}"
            ))),
        }
    }
}
