//! Plain bit strings.
//!
//! Codewords, key material and encoder output all share this representation.
//! Sizes in this crate are small enough that a `Vec<bool>` beats packed
//! storage on clarity.

use std::fmt;
use std::ops::{Deref, DerefMut};
use std::str::FromStr;

use crate::error::Error;

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn new() -> Self {
        Bits(Vec::new())
    }

    pub fn zeros(len: usize) -> Self {
        Bits(vec![false; len])
    }

    /// The `width` low bits of `value`, most significant first.
    pub fn from_uint(value: u64, width: usize) -> Self {
        Bits((0..width).rev().map(|i| (value >> i) & 1 == 1).collect())
    }

    /// Inverse of [`Bits::from_uint`]; panics above 64 bits.
    pub fn to_uint(&self) -> u64 {
        assert!(self.0.len() <= 64, "bit string too long for u64");
        self.0.iter().fold(0, |acc, &b| (acc << 1) | u64::from(b))
    }

    pub fn extend_from(&mut self, other: &Bits) {
        self.0.extend_from_slice(&other.0);
    }

    /// Bitwise XOR over the common prefix; `self` keeps its length.
    pub fn xor_prefix(&mut self, pad: &[bool]) {
        for (b, p) in self.0.iter_mut().zip(pad) {
            *b ^= *p;
        }
    }

    pub fn xor(&self, other: &[bool]) -> Bits {
        assert_eq!(self.0.len(), other.len(), "xor of unequal lengths");
        Bits(self.0.iter().zip(other).map(|(a, b)| a ^ b).collect())
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn into_inner(self) -> Vec<bool> {
        self.0
    }
}

impl Deref for Bits {
    type Target = Vec<bool>;
    fn deref(&self) -> &Vec<bool> {
        &self.0
    }
}

impl DerefMut for Bits {
    fn deref_mut(&mut self) -> &mut Vec<bool> {
        &mut self.0
    }
}

impl From<Vec<bool>> for Bits {
    fn from(v: Vec<bool>) -> Self {
        Bits(v)
    }
}

impl From<&[bool]> for Bits {
    fn from(v: &[bool]) -> Self {
        Bits(v.to_vec())
    }
}

impl FromIterator<bool> for Bits {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Bits(iter.into_iter().collect())
    }
}

impl FromStr for Bits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Config(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Bits)
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits(\"{self}\")")
    }
}

/// Shorthand for building bit strings in tests and examples; panics on
/// anything other than `0`/`1`.
pub fn bits(s: &str) -> Bits {
    s.parse().expect("bit literal")
}
