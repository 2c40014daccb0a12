//! Fixed-length bitsets backing minmatrices.
//!
//! Bit `i` of a `Bitset` is minterm `i` of some context, so reading the whole
//! bitset as an unsigned integer (little-endian by bit index) gives the
//! canonical rank of the formula it represents.

/// A fixed-length set of bits, LSB-first within each 64-bit word.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Bitset {
    len: u64,
    words: Vec<u64>,
}

fn word_count(len: u64) -> usize {
    len.div_ceil(64) as usize
}

impl Bitset {
    pub fn empty(len: u64) -> Self {
        Bitset {
            len,
            words: vec![0; word_count(len)],
        }
    }

    pub fn full(len: u64) -> Self {
        let mut b = Bitset {
            len,
            words: vec![!0u64; word_count(len)],
        };
        b.trim();
        b
    }

    /// Mask of all indices whose binary expansion has bit `bit` set.
    ///
    /// This is the truth table of the `bit`-th "input variable" over the
    /// index space, the workhorse for prefix and factor masks.
    pub fn index_bit_mask(len: u64, bit: u32) -> Self {
        let mut b = Bitset::empty(len);
        if bit >= 6 {
            // runs of 2^(bit-6) words, alternating clear/set
            let run = 1usize << (bit - 6);
            let mut i = 0;
            while i < b.words.len() {
                let set = (i / run) % 2 == 1;
                if set {
                    b.words[i] = !0;
                }
                i += 1;
            }
        } else {
            // pattern repeats within a word
            let period = 1u32 << (bit + 1);
            let mut pattern = 0u64;
            for k in 0..64 {
                if (k % period) >= (1 << bit) {
                    pattern |= 1 << k;
                }
            }
            for w in b.words.iter_mut() {
                *w = pattern;
            }
        }
        b.trim();
        b
    }

    fn trim(&mut self) {
        let extra = (self.len % 64) as u32;
        if extra != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << extra) - 1;
            }
        }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.count_ones() == self.len
    }

    pub fn get(&self, i: u64) -> bool {
        debug_assert!(i < self.len);
        (self.words[(i / 64) as usize] >> (i % 64)) & 1 != 0
    }

    pub fn set(&mut self, i: u64, value: bool) {
        debug_assert!(i < self.len);
        let w = &mut self.words[(i / 64) as usize];
        if value {
            *w |= 1 << (i % 64);
        } else {
            *w &= !(1 << (i % 64));
        }
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn union(&self, other: &Bitset) -> Bitset {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersect(&self, other: &Bitset) -> Bitset {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn xor(&self, other: &Bitset) -> Bitset {
        self.zip_with(other, |a, b| a ^ b)
    }

    pub fn complement(&self) -> Bitset {
        let mut out = Bitset {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        out.trim();
        out
    }

    fn zip_with(&self, other: &Bitset, f: impl Fn(u64, u64) -> u64) -> Bitset {
        assert_eq!(self.len, other.len, "bitset length mismatch");
        Bitset {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn is_subset(&self, other: &Bitset) -> bool {
        assert_eq!(self.len, other.len, "bitset length mismatch");
        self.words
            .iter()
            .zip(&other.words)
            .all(|(&a, &b)| a & !b == 0)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            let base = wi as u64 * 64;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as u64;
                    w &= w - 1;
                    Some(base + b)
                }
            })
        })
    }

    pub fn from_indices(len: u64, indices: impl IntoIterator<Item = u64>) -> Self {
        let mut b = Bitset::empty(len);
        for i in indices {
            b.set(i, true);
        }
        b
    }

    /// The bitset read as an unsigned integer; only valid for short sets.
    pub fn as_u64(&self) -> u64 {
        assert!(self.len <= 64, "bitset too long for a u64 rank");
        self.words.first().copied().unwrap_or(0)
    }

    pub fn from_u64(len: u64, value: u64) -> Self {
        assert!(len <= 64);
        let mut b = Bitset {
            len,
            words: vec![value],
        };
        b.trim();
        b
    }

    /// Big-endian hex, least-significant hex digit covering minterms 0..4.
    pub fn to_hex(&self) -> String {
        let digits = self.len.div_ceil(4) as usize;
        let mut out = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let bit = d as u64 * 4;
            let word = self.words[(bit / 64) as usize];
            let nib = (word >> (bit % 64)) & 0xF;
            out.push(char::from_digit(nib as u32, 16).unwrap());
        }
        out
    }

    pub fn from_hex(len: u64, hex: &str) -> Option<Self> {
        let digits = len.div_ceil(4) as usize;
        if hex.len() != digits {
            return None;
        }
        let mut b = Bitset::empty(len);
        for (pos, c) in hex.chars().rev().enumerate() {
            let nib = c.to_digit(16)? as u64;
            let bit = pos as u64 * 4;
            if bit < len {
                b.words[(bit / 64) as usize] |= nib << (bit % 64);
            } else if nib != 0 {
                return None;
            }
        }
        let mut check = b.clone();
        check.trim();
        if check != b {
            return None;
        }
        Some(b)
    }
}

impl std::fmt::Debug for Bitset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Bitset({} bits: {{", self.len)?;
        for (i, idx) in self.iter_ones().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            if i >= 16 {
                write!(f, "..")?;
                break;
            }
            write!(f, "{idx}")?;
        }
        write!(f, "}})")
    }
}
