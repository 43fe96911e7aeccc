//! Fixed-length bitstrings used as product-state labels.
//!
//! Variable 0 is the leftmost character and is stored in the most significant
//! bit of the first word, so the derived ordering on equal-length strings is
//! lexicographic.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut b = Bits::zeros(len);
        for i in 0..len {
            b.set(i, true);
        }
        b
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut b = Bits::zeros(bits.len());
        for (i, &v) in bits.iter().enumerate() {
            b.set(i, v);
        }
        b
    }

    /// Interprets the low `len` bits of `value` with variable 0 as the most
    /// significant one, i.e. the usual reading of a binary numeral.
    pub fn from_index(value: u64, len: usize) -> Self {
        assert!(len <= 64, "index form holds at most 64 variables");
        let mut b = Bits::zeros(len);
        for i in 0..len {
            b.set(i, (value >> (len - 1 - i)) & 1 == 1);
        }
        b
    }

    /// Clock label `0^(len-k) 1^k`.
    pub fn clock(len: usize, k: usize) -> Self {
        assert!(k <= len);
        let mut b = Bits::zeros(len);
        for i in len - k..len {
            b.set(i, true);
        }
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (63 - i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (63 - i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] ^= 1u64 << (63 - i % 64);
    }

    pub fn flipped(&self, i: usize) -> Self {
        let mut b = self.clone();
        b.flip(i);
        b
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn hamming(&self, other: &Bits) -> usize {
        assert_eq!(self.len, other.len, "hamming distance of unequal lengths");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Integer index in the `2^len` product basis (variable 0 most significant).
    pub fn to_index(&self) -> Option<u64> {
        if self.len > 64 {
            return None;
        }
        Some((0..self.len).fold(0u64, |acc, i| (acc << 1) | self.get(i) as u64))
    }

    /// Sub-string made of the given variables, in the given order.
    pub fn select(&self, vars: &[usize]) -> Bits {
        let mut b = Bits::zeros(vars.len());
        for (k, &v) in vars.iter().enumerate() {
            b.set(k, self.get(v));
        }
        b
    }

    pub fn concat(&self, other: &Bits) -> Bits {
        let mut b = Bits::zeros(self.len + other.len);
        for i in 0..self.len {
            b.set(i, self.get(i));
        }
        for i in 0..other.len {
            b.set(self.len + i, other.get(i));
        }
        b
    }

    /// Bitwise majority of three equal-length strings.
    pub fn majority(a: &Bits, b: &Bits, c: &Bits) -> Bits {
        assert!(a.len == b.len && b.len == c.len);
        Bits {
            len: a.len,
            words: a
                .words
                .iter()
                .zip(&b.words)
                .zip(&c.words)
                .map(|((x, y), z)| (x & y) | (y & z) | (x & z))
                .collect(),
        }
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits({self})")
    }
}

impl FromStr for Bits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut b = Bits::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => b.set(i, true),
                _ => return Err(Error::invalid(format!("not a bitstring: {s:?}"))),
            }
        }
        Ok(b)
    }
}

impl Serialize for Bits {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Bits {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn display_and_parse() {
        let b: Bits = "0110".parse().unwrap();
        assert_eq!(b.to_string(), "0110");
        assert!(!b.get(0) && b.get(1) && b.get(2) && !b.get(3));
        assert_eq!(b.to_index(), Some(0b0110));
        assert!("01x".parse::<Bits>().is_err());
    }

    #[test]
    fn clock_labels() {
        assert_eq!(Bits::clock(5, 0).to_string(), "00000");
        assert_eq!(Bits::clock(5, 2).to_string(), "00011");
        assert_eq!(Bits::clock(5, 5).to_string(), "11111");
    }

    #[test]
    fn long_strings_cross_word_boundary() {
        let mut b = Bits::zeros(130);
        b.set(63, true);
        b.set(64, true);
        b.set(129, true);
        assert_eq!(b.count_ones(), 3);
        assert_eq!(b.hamming(&Bits::zeros(130)), 3);
        assert!(b.to_index().is_none());
        assert!(Bits::clock(130, 1) < Bits::clock(130, 2));
    }

    proptest! {
        #[test]
        fn ordering_is_lexicographic(a in prop::collection::vec(any::<bool>(), 1..140),
                                     seed in any::<u64>()) {
            let mut other = a.clone();
            let k = (seed as usize) % a.len();
            other[k] = !other[k];
            let (x, y) = (Bits::from_bools(&a), Bits::from_bools(&other));
            prop_assert_eq!(x.cmp(&y), x.to_string().cmp(&y.to_string()));
            prop_assert_eq!(x.hamming(&y), 1);
        }

        #[test]
        fn index_round_trip(v in any::<u32>(), len in 1usize..=32) {
            let v = (v as u64) & ((1u64 << len) - 1);
            prop_assert_eq!(Bits::from_index(v, len).to_index(), Some(v));
        }
    }
}
