//! Binary solution vectors.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

/// Upper bound on the number of components a [`Configuration`] can hold.
pub const MAX_COMPONENTS: usize = 64;

/// A fixed-length binary position on a landscape.
///
/// Component 0 is stored in the most significant occupied bit, so the packed
/// integer order coincides with the lexicographic order of the bit sequence.
/// That order is the tie-break used by every argmax in the crate.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    bits: u64,
    len: u32,
}

impl Configuration {
    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_index(0, n)
    }

    /// Builds the configuration whose packed value is `index`.
    pub fn from_index(index: u64, n: usize) -> Result<Self> {
        check_len(n)?;
        if n < MAX_COMPONENTS && index >> n != 0 {
            return Err(Error::param(format!(
                "index {index} does not fit in {n} components"
            )));
        }
        Ok(Self {
            bits: index,
            len: n as u32,
        })
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        check_len(bits.len())?;
        let mut packed = 0u64;
        for (i, &b) in bits.iter().enumerate() {
            if b > 1 {
                return Err(Error::param(format!(
                    "component {i} is {b}, expected 0 or 1"
                )));
            }
            packed = (packed << 1) | u64::from(b);
        }
        Ok(Self {
            bits: packed,
            len: bits.len() as u32,
        })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        check_len(n)?;
        let bits: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2u8)).collect();
        Self::from_bits(&bits)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Packed value; component 0 is the most significant bit.
    #[inline]
    pub fn index(&self) -> u64 {
        self.bits
    }

    #[inline]
    fn mask_of(&self, component: usize) -> u64 {
        1u64 << (self.len as usize - 1 - component)
    }

    #[inline]
    pub fn get(&self, component: usize) -> u8 {
        debug_assert!(component < self.len());
        ((self.bits & self.mask_of(component)) != 0) as u8
    }

    #[inline]
    pub fn flipped(&self, component: usize) -> Self {
        Self {
            bits: self.bits ^ self.mask_of(component),
            len: self.len,
        }
    }

    /// Flips every component whose bit is set in `mask` (packed layout).
    #[inline]
    pub(crate) fn xor_mask(&self, mask: u64) -> Self {
        Self {
            bits: self.bits ^ mask,
            len: self.len,
        }
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }

    pub fn hamming(&self, other: &Self) -> usize {
        debug_assert_eq!(self.len, other.len);
        (self.bits ^ other.bits).count_ones() as usize
    }

    /// Components (in increasing index order) where `self` and `other` differ.
    pub fn differing_components(&self, other: &Self) -> impl Iterator<Item = usize> + '_ {
        let diff = self.bits ^ other.bits;
        let len = self.len();
        (0..len).filter(move |&i| diff & (1u64 << (len - 1 - i)) != 0)
    }

    pub fn ensure_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: self.len(),
            });
        }
        Ok(())
    }
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::param("configuration needs at least one component"));
    }
    if n > MAX_COMPONENTS {
        return Err(Error::Capacity {
            what: "component count",
            value: n,
            limit: MAX_COMPONENTS,
        });
    }
    Ok(())
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.get(i) == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Configuration({self})")
    }
}

impl FromStr for Configuration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                other => Err(Error::Format(format!(
                    "unexpected character {other:?} in bit string"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(&bits)
    }
}
