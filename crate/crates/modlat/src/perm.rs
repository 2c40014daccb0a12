//! Permutations of minterm index spaces.

use crate::bits::Bitset;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Permutation {
    map: Vec<u64>,
}

impl Permutation {
    pub fn identity(n: u64) -> Permutation {
        Permutation {
            map: (0..n).collect(),
        }
    }

    /// Builds a permutation, checking bijectivity.
    pub fn from_vec(map: Vec<u64>) -> Option<Permutation> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &i in &map {
            let i = i as usize;
            if i >= n || seen[i] {
                return None;
            }
            seen[i] = true;
        }
        Some(Permutation { map })
    }

    pub fn len(&self) -> u64 {
        self.map.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn apply(&self, i: u64) -> u64 {
        self.map[i as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &j)| i as u64 == j)
    }

    /// `self` after `other`: (self * other)(i) = self(other(i)).
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.map.len(), other.map.len());
        Permutation {
            map: other.map.iter().map(|&i| self.map[i as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u64; self.map.len()];
        for (i, &j) in self.map.iter().enumerate() {
            inv[j as usize] = i as u64;
        }
        Permutation { map: inv }
    }

    pub fn apply_to_set(&self, bits: &Bitset) -> Bitset {
        assert_eq!(bits.len(), self.map.len() as u64);
        let mut out = Bitset::empty(bits.len());
        for i in bits.iter_ones() {
            out.set(self.map[i as usize], true);
        }
        out
    }

    pub fn fixed_points(&self) -> u64 {
        self.map
            .iter()
            .enumerate()
            .filter(|&(i, &j)| i as u64 == j)
            .count() as u64
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.map
    }
}
