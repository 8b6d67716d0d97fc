//! Infinite ground objects described by small generators: bit streams used as
//! ground reals and increasing sequences used as ground names.

use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blocks::{BitSeq, IncSeq};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unrecognized generator `{0}` (expected zeros, ones, periodic:<bits>, seeded-random:<n>)")]
pub struct GeneratorParseError(String);

/// A real in `2^ω` given by a named pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BitGen {
    Zeros,
    Ones,
    /// The word repeated forever; never empty.
    Periodic(Vec<bool>),
    SeededRandom(u64),
}

impl BitGen {
    pub fn bit(&self, j: usize) -> bool {
        match self {
            BitGen::Zeros => false,
            BitGen::Ones => true,
            BitGen::Periodic(word) => word[j % word.len()],
            BitGen::SeededRandom(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_word_pos((j / 32) as u128);
                (rng.next_u32() >> (j % 32)) & 1 == 1
            }
        }
    }

    pub fn prefix(&self, len: usize) -> BitSeq {
        match self {
            BitGen::SeededRandom(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut bits = Vec::with_capacity(len);
                while bits.len() < len {
                    let word = rng.next_u32();
                    for k in 0..32 {
                        if bits.len() == len {
                            break;
                        }
                        bits.push((word >> k) & 1 == 1);
                    }
                }
                BitSeq::new(bits)
            }
            _ => BitSeq::new((0..len).map(|j| self.bit(j)).collect()),
        }
    }
}

impl fmt::Display for BitGen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BitGen::Zeros => f.write_str("zeros"),
            BitGen::Ones => f.write_str("ones"),
            BitGen::Periodic(word) => {
                write!(f, "periodic:{}", BitSeq::new(word.clone()))
            }
            BitGen::SeededRandom(n) => write!(f, "seeded-random:{n}"),
        }
    }
}

impl FromStr for BitGen {
    type Err = GeneratorParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || GeneratorParseError(s.to_owned());
        match s.split_once(':') {
            None if s == "zeros" => Ok(BitGen::Zeros),
            None if s == "ones" => Ok(BitGen::Ones),
            Some(("periodic", word)) => {
                let bits: BitSeq = word.parse().map_err(|_| err())?;
                if bits.is_empty() {
                    return Err(err());
                }
                Ok(BitGen::Periodic(bits.to_vec()))
            }
            Some(("seeded-random", n)) => n.parse().map(BitGen::SeededRandom).map_err(|_| err()),
            _ => Err(err()),
        }
    }
}

impl TryFrom<String> for BitGen {
    type Error = GeneratorParseError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<BitGen> for String {
    fn from(g: BitGen) -> String {
        g.to_string()
    }
}

/// A strictly increasing sequence in the ground model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeqGen {
    /// `slope * n + offset`; `slope ≥ 1`.
    Affine { slope: u64, offset: u64 },
    /// A finite list. Asking for values past its end cannot be satisfied.
    Listed(IncSeq),
}

impl SeqGen {
    /// `(0, 1, 2, ...)`: unit blocks, each fits inside any block.
    pub const IDENTITY: SeqGen = SeqGen::Affine {
        slope: 1,
        offset: 0,
    };

    /// The first `len` values, or `None` if the generator is finite and
    /// shorter.
    pub fn take(&self, len: usize) -> Option<Vec<u64>> {
        match self {
            SeqGen::Affine { slope, offset } => {
                Some((0..len as u64).map(|n| slope * n + offset).collect())
            }
            SeqGen::Listed(seq) => (seq.len() >= len).then(|| seq[..len].to_vec()),
        }
    }

    /// All values `≤ bound`.
    pub fn up_to(&self, bound: u64) -> Vec<u64> {
        match self {
            SeqGen::Affine { slope, offset } => {
                if bound < *offset {
                    return Vec::new();
                }
                let count = (bound - offset) / slope + 1;
                (0..count).map(|n| slope * n + offset).collect()
            }
            SeqGen::Listed(seq) => seq.iter().copied().take_while(|&v| v <= bound).collect(),
        }
    }

    /// The shortest prefix holding a block that starts at or after `from`.
    pub fn through_block_from(&self, from: u64) -> Option<Vec<u64>> {
        let k = match self {
            SeqGen::Affine { slope, offset } => {
                if from <= *offset {
                    0
                } else {
                    (from - offset).div_ceil(*slope) as usize
                }
            }
            SeqGen::Listed(seq) => seq.partition_point(|&v| v < from),
        };
        self.take(k + 2)
    }
}
