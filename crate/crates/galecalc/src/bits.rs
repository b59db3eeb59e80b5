//! Finite binary strings.
//!
//! Strings are sequences over {0, 1}. Ordering is lexicographic, which for
//! strings of equal length coincides with the numeric order of their values
//! read most-significant-bit first; that is the order the codec's cumulative
//! sums are taken in.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn empty() -> Self {
        BitString { bits: Vec::new() }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitString { bits }
    }

    /// All-zero string of the given length.
    pub fn zeros(len: usize) -> Self {
        BitString { bits: vec![false; len] }
    }

    /// The length-`len` string whose MSB-first value is `value`.
    /// Counting `value` from 0 to 2^len - 1 enumerates Σ^len in order.
    pub fn from_value(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_value supports lengths up to 64");
        assert!(len == 64 || value < (1u64 << len), "value out of range for length");
        let bits = (0..len).map(|i| (value >> (len - 1 - i)) & 1 == 1).collect();
        BitString { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn pop(&mut self) -> Option<bool> {
        self.bits.pop()
    }

    /// The first `len` bits as a new string.
    pub fn prefix(&self, len: usize) -> Self {
        assert!(len <= self.bits.len(), "prefix longer than the string");
        BitString { bits: self.bits[..len].to_vec() }
    }

    pub fn is_prefix_of(&self, other: &Self) -> bool {
        other.bits.len() >= self.bits.len() && other.bits[..self.bits.len()] == self.bits[..]
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        BitString { bits }
    }

    pub fn child(&self, bit: bool) -> Self {
        let mut bits = self.bits.clone();
        bits.push(bit);
        BitString { bits }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }

    /// Sub-range [lo, hi) as a new string.
    pub fn slice(&self, lo: usize, hi: usize) -> Self {
        BitString { bits: self.bits[lo..hi].to_vec() }
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// All strings of length `len` in lexicographic order.
    pub fn all_of_len(len: usize) -> impl Iterator<Item = BitString> {
        assert!(len < 64, "exhaustive enumeration capped below 2^64");
        (0..(1u64 << len)).map(move |v| BitString::from_value(v, len))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(Error::BadBitString(s.to_string())),
            }
        }
        Ok(BitString { bits })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_matches_value_order() {
        let all: Vec<BitString> = BitString::all_of_len(3).collect();
        for pair in all.windows(2) {
            assert!(pair[0] < pair[1]);
        }
        assert_eq!(all[0].to_string(), "000");
        assert_eq!(all[7].to_string(), "111");
    }

    #[test]
    fn parse_and_display_round_trip() {
        let w: BitString = "0110".parse().unwrap();
        assert_eq!(w.to_string(), "0110");
        assert_eq!(w.len(), 4);
        assert!(!w.bit(0) && w.bit(1) && w.bit(2) && !w.bit(3));
        assert!("01x2".parse::<BitString>().is_err());
        assert_eq!("".parse::<BitString>().unwrap(), BitString::empty());
    }

    #[test]
    fn prefix_relations() {
        let w: BitString = "0110".parse().unwrap();
        assert!(w.prefix(2).is_prefix_of(&w));
        assert!(w.is_prefix_of(&w));
        assert!(!w.child(true).is_prefix_of(&w));
        assert_eq!(w.prefix(0), BitString::empty());
    }
}
