//! Uniform replacements and their extended five-input variant.
//!
//! A uniform replacement rewrites `<>e` to `rho(e) = eta(e, <>e, <>!e)` for an
//! 8-bit truth table `eta` (256 replacements, 24 invertible). An extended
//! replacement uses `eta(e, <>1, <>e, <>!e, <>0)` with a 32-bit table; the
//! invertible ones form a group of 31,104 elements found by brute force.
//!
//! Row encodings: `eta` bit `4a + 2b + c` is the value at `(a,b,c) =
//! (e, <>e, <>!e)`; `eta5` bit `16e + 8x1 + 4xe + 2xne + x0` is the value at
//! `(e, <>1, <>e, <>!e, <>0)`. The `eta5` row index coincides with the
//! canonical E[1,1] minterm index, so an `eta5` read as a bitset *is* the
//! replacement's E[1,1] minmatrix.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use crate::context::{Context, Minmatrix, Minterm};
use crate::formula::Formula;
use crate::perm::Permutation;
use crate::Error;

/// `<>e -> <>e`.
pub const UR_IDENTITY_ETA: u8 = 0xCC;
/// The identity as a five-input table.
pub const XUR_IDENTITY_ETA5: u32 = 0xF0F0_F0F0;

/// The 24 prime UR defining formulas, `e` written as `p1`, in the fixed
/// r0..r23 row order used by the table subcommands.
pub const PRIME_UR_FORMULAS: [&str; 24] = [
    "<>p1",
    "<>p1 <-> p1",
    "<>p1 <-> p1 + <>!p1",
    "<>p1 <-> p1 + !<>!p1",
    "<>p1 <-> !p1 + <>!p1",
    "<>p1 <-> !p1 + !<>!p1",
    "!<>p1",
    "!<>p1 <-> p1",
    "!<>p1 <-> p1 + <>!p1",
    "!<>p1 <-> p1 + !<>!p1",
    "!<>p1 <-> !p1 + <>!p1",
    "!<>p1 <-> !p1 + !<>!p1",
    "<>!p1",
    "<>!p1 <-> p1",
    "<>!p1 <-> p1 + <>p1",
    "<>!p1 <-> p1 + !<>p1",
    "<>!p1 <-> !p1 + <>p1",
    "<>!p1 <-> !p1 + !<>p1",
    "!<>!p1",
    "!<>!p1 <-> p1",
    "!<>!p1 <-> p1 + <>p1",
    "!<>!p1 <-> p1 + !<>p1",
    "!<>!p1 <-> !p1 + <>p1",
    "!<>!p1 <-> !p1 + !<>p1",
];

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct UniformReplacement {
    eta: u8,
}

impl UniformReplacement {
    pub fn identity() -> UniformReplacement {
        UniformReplacement {
            eta: UR_IDENTITY_ETA,
        }
    }

    pub fn from_eta(eta: u8) -> UniformReplacement {
        UniformReplacement { eta }
    }

    pub fn eta(&self) -> u8 {
        self.eta
    }

    pub fn at(&self, a: bool, b: bool, c: bool) -> bool {
        let row = (a as u8) << 2 | (b as u8) << 1 | c as u8;
        (self.eta >> row) & 1 == 1
    }

    /// The defining formula `rho(e)` as a canonical sum of products over
    /// `e`, `<>e` and `<>!e`.
    pub fn defining_formula(&self, e: &Formula) -> Formula {
        let atoms = [
            e.clone(),
            Formula::dia(e.clone()),
            Formula::dia(Formula::not(e.clone())),
        ];
        dnf_formula(self.eta as u64, 3, &atoms)
    }

    /// `rho(p1)`, the level-1 one-variable formula identified with the UR.
    pub fn formula(&self) -> Formula {
        self.defining_formula(&Formula::Var(1))
    }

    /// Reads a UR back from any formula equiprovable to a `(e,<>e,<>!e)`
    /// shape; rejects formulas that depend on `<>1` or `<>0`.
    pub fn from_formula(f: &Formula) -> Result<UniformReplacement, Error> {
        let m = e11()?.normalize(f)?;
        ExtendedUr::from_eta5(m.rank() as u32)
            .as_ur()
            .ok_or_else(|| {
                Error::Domain(format!(
                    "formula {f} depends on <>1 or <>0 and is not a plain UR"
                ))
            })
    }

    /// The E[1,1] minmatrix of `rho(p1)`.
    pub fn minmatrix(&self) -> Result<Minmatrix, Error> {
        self.extend().minmatrix()
    }

    pub fn extend(&self) -> ExtendedUr {
        let mut eta5 = 0u32;
        for r in 0..32u32 {
            let row = ((r >> 4) & 1) << 2 | ((r >> 2) & 1) << 1 | ((r >> 1) & 1);
            eta5 |= (((self.eta as u32) >> row) & 1) << r;
        }
        ExtendedUr { eta5 }
    }

    /// Recursive syntactic application: `<>psi` becomes `rho(psi * rho)` and
    /// `[]psi` becomes `!rho(!(psi * rho))`; level-0 formulas pass through.
    pub fn apply(&self, f: &Formula) -> Formula {
        match f {
            Formula::Const0 | Formula::Const1 | Formula::Var(_) => f.clone(),
            Formula::Not(g) => Formula::not(self.apply(g)),
            Formula::And(a, b) => Formula::and(self.apply(a), self.apply(b)),
            Formula::Or(a, b) => Formula::or(self.apply(a), self.apply(b)),
            Formula::Imp(a, b) => Formula::imp(self.apply(a), self.apply(b)),
            Formula::Iff(a, b) => Formula::iff(self.apply(a), self.apply(b)),
            Formula::Dia(g) => self.defining_formula(&self.apply(g)),
            Formula::Nec(g) => {
                Formula::not(self.defining_formula(&Formula::not(self.apply(g))))
            }
        }
    }

    /// Composition `rho rho' = rho * rho'`: apply `other` to the defining
    /// level-1 formula and read the table back through E[1,1] normalization.
    pub fn compose(&self, other: &UniformReplacement) -> UniformReplacement {
        let f = other.apply(&self.formula());
        UniformReplacement::from_formula(&f)
            .expect("UR composition stays within the three-input shape")
    }

    pub fn is_prime(&self) -> bool {
        self.inverse().is_some()
    }

    pub fn inverse(&self) -> Option<UniformReplacement> {
        // the two-sided inverse in the XUR monoid is unique, so a UR has a UR
        // inverse exactly when its XUR inverse ignores <>1 and <>0
        self.extend().inverse().and_then(|x| x.as_ur())
    }

    /// The minterm permutation induced on a context, computed by the grouped
    /// complemental-pair rewrite (fails for non-prime tables).
    pub fn minterm_permutation(&self, ctx: &Context) -> Result<Permutation, Error> {
        let pairs = pair_map(self.eta).ok_or_else(|| {
            Error::Domain(format!(
                "UR eta={:#04x} is not prime; minterm images need not be single minterms",
                self.eta
            ))
        })?;
        self.perm_at(&pairs, ctx)
    }

    fn perm_at(&self, pairs: &PairMap, ctx: &Context) -> Result<Permutation, Error> {
        let count = ctx.minterm_count();
        if ctx.d() == 0 {
            return Ok(Permutation::identity(count));
        }
        let lower = self.perm_at(pairs, &ctx.at_level(ctx.d() - 1))?;
        let factor_count = ctx.factor_count();
        let full_rank = factor_count - 1;
        // image of every lower-level formula rank under the lower permutation
        let rank_image: Vec<u64> = (0..factor_count)
            .map(|r| {
                let mut img = 0u64;
                for i in 0..lower.len() {
                    if (r >> i) & 1 == 1 {
                        img |= 1 << lower.apply(i);
                    }
                }
                img
            })
            .collect();
        let mut map = Vec::with_capacity(count as usize);
        for idx in 0..count {
            let prefix = idx >> factor_count;
            let kernel = if ctx.d() == 1 {
                prefix
            } else {
                lower.apply(ctx.ancestor_index(ctx.d() - 1, idx))
            };
            let mut states = 0u64;
            for r in 0..factor_count {
                let rbar = full_rank ^ r;
                if r > rbar {
                    continue;
                }
                let s = (idx >> r) & 1 == 1;
                let t = (idx >> rbar) & 1 == 1;
                let r_img = rank_image[r as usize];
                debug_assert_eq!(rank_image[rbar as usize], full_rank ^ r_img);
                let x = (r_img >> kernel) & 1 == 1;
                let (y, z) = pairs[x as usize][(s as usize) << 1 | t as usize];
                if y {
                    states |= 1 << r_img;
                }
                if z {
                    states |= 1 << (full_rank ^ r_img);
                }
            }
            map.push((prefix << factor_count) | states);
        }
        Permutation::from_vec(map)
            .ok_or_else(|| Error::Domain("prime UR action failed to permute minterms".into()))
    }

    /// Fast-path image of a single minterm.
    pub fn apply_minterm(&self, mu: &Minterm) -> Result<Minterm, Error> {
        let perm = self.minterm_permutation(mu.context())?;
        Minterm::new(mu.context(), perm.apply(mu.index()))
    }
}

/// For each truth value `x` of the paired operand, the unique new state pair
/// `(y, z)` of `(<>phi, <>!phi)` reproducing the old pair `(s, t)`; indexed
/// `[x][s*2 + t]`. Exists exactly when the table is prime.
type PairMap = [[(bool, bool); 4]; 2];

fn pair_map(eta: u8) -> Option<PairMap> {
    let at =
        |a: bool, b: bool, c: bool| (eta >> ((a as u8) << 2 | (b as u8) << 1 | c as u8)) & 1 == 1;
    let mut out = [[(false, false); 4]; 2];
    for x in [false, true] {
        let mut filled = [false; 4];
        for y in [false, true] {
            for z in [false, true] {
                let s = at(x, y, z);
                let t = at(!x, z, y);
                let slot = (s as usize) << 1 | t as usize;
                if filled[slot] {
                    return None;
                }
                filled[slot] = true;
                out[x as usize][slot] = (y, z);
            }
        }
        if filled != [true; 4] {
            return None;
        }
    }
    Some(out)
}

fn dnf_formula(table: u64, inputs: u32, atoms: &[Formula]) -> Formula {
    let rows = 1u64 << inputs;
    if table == 0 {
        return Formula::Const0;
    }
    if rows < 64 && table == (1 << rows) - 1 {
        return Formula::Const1;
    }
    let mut sum: Option<Formula> = None;
    for row in 0..rows {
        if (table >> row) & 1 == 0 {
            continue;
        }
        let mut product: Option<Formula> = None;
        for (i, atom) in atoms.iter().enumerate() {
            let positive = (row >> (inputs as usize - 1 - i)) & 1 == 1;
            let lit = if positive {
                atom.clone()
            } else {
                Formula::not(atom.clone())
            };
            product = Some(match product {
                None => lit,
                Some(acc) => Formula::and(acc, lit),
            });
        }
        let product = product.expect("at least one atom");
        sum = Some(match sum {
            None => product,
            Some(acc) => Formula::or(acc, product),
        });
    }
    sum.expect("nonzero table")
}

fn e11() -> Result<Context, Error> {
    Context::new(1, 1)
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ExtendedUr {
    eta5: u32,
}

impl ExtendedUr {
    pub fn identity() -> ExtendedUr {
        ExtendedUr {
            eta5: XUR_IDENTITY_ETA5,
        }
    }

    pub fn from_eta5(eta5: u32) -> ExtendedUr {
        ExtendedUr { eta5 }
    }

    pub fn eta5(&self) -> u32 {
        self.eta5
    }

    /// The embedded plain UR, when the table ignores `<>1` and `<>0`.
    pub fn as_ur(&self) -> Option<UniformReplacement> {
        let mut eta = 0u8;
        for row in 0..8u32 {
            let (a, b, c) = ((row >> 2) & 1, (row >> 1) & 1, row & 1);
            let base = 16 * a + 4 * b + 2 * c;
            let bit = (self.eta5 >> base) & 1;
            for (x1, x0) in [(0u32, 1u32), (1, 0), (1, 1)] {
                if (self.eta5 >> (base + 8 * x1 + x0)) & 1 != bit {
                    return None;
                }
            }
            eta |= (bit as u8) << row;
        }
        Some(UniformReplacement { eta })
    }

    pub fn defining_formula(&self, e: &Formula) -> Formula {
        let atoms = [
            e.clone(),
            Formula::dia(Formula::Const1),
            Formula::dia(e.clone()),
            Formula::dia(Formula::not(e.clone())),
            Formula::dia(Formula::Const0),
        ];
        dnf_formula(self.eta5 as u64, 5, &atoms)
    }

    pub fn formula(&self) -> Formula {
        self.defining_formula(&Formula::Var(1))
    }

    pub fn from_formula(f: &Formula) -> Result<ExtendedUr, Error> {
        let m = e11()?.normalize(f)?;
        Ok(ExtendedUr {
            eta5: m.rank() as u32,
        })
    }

    /// The E[1,1] minmatrix; its bits are exactly `eta5`.
    pub fn minmatrix(&self) -> Result<Minmatrix, Error> {
        let ctx = e11()?;
        Ok(Minmatrix::from_bitset(
            &ctx,
            crate::bits::Bitset::from_u64(32, self.eta5 as u64),
        ))
    }

    pub fn apply(&self, f: &Formula) -> Formula {
        match f {
            Formula::Const0 | Formula::Const1 | Formula::Var(_) => f.clone(),
            Formula::Not(g) => Formula::not(self.apply(g)),
            Formula::And(a, b) => Formula::and(self.apply(a), self.apply(b)),
            Formula::Or(a, b) => Formula::or(self.apply(a), self.apply(b)),
            Formula::Imp(a, b) => Formula::imp(self.apply(a), self.apply(b)),
            Formula::Iff(a, b) => Formula::iff(self.apply(a), self.apply(b)),
            Formula::Dia(g) => self.defining_formula(&self.apply(g)),
            Formula::Nec(g) => {
                Formula::not(self.defining_formula(&Formula::not(self.apply(g))))
            }
        }
    }

    /// Symbolic composition through E[1,1] normalization.
    pub fn compose(&self, other: &ExtendedUr) -> Result<ExtendedUr, Error> {
        ExtendedUr::from_formula(&other.apply(&self.formula()))
    }

    /// Bit-level composition: the union of `other`-images of this table's
    /// minterms. Agrees with [`ExtendedUr::compose`].
    pub fn compose_fast(&self, other: &ExtendedUr) -> ExtendedUr {
        let tables = XurTables::new(other.eta5);
        let mut out = 0u32;
        let mut bits = self.eta5;
        while bits != 0 {
            let idx = bits.trailing_zeros();
            bits &= bits - 1;
            out |= tables.minterm_image(idx);
        }
        ExtendedUr { eta5: out }
    }

    /// Single-minterm bijection filter: the induced map on E[1,1] minterms,
    /// when every image is one minterm and the map is onto.
    pub fn minterm_map(&self) -> Option<[u8; 32]> {
        minterm_map_fast(self.eta5)
    }

    pub fn is_prime(&self) -> bool {
        xur_is_prime_fast(self.eta5)
    }

    pub fn inverse(&self) -> Option<ExtendedUr> {
        let perm = minterm_map_fast(self.eta5)?;
        let candidate = inverse_candidate(&perm);
        let perm_inv = minterm_map_fast(candidate)?;
        let two_sided = apply_map_to_set(&perm_inv, self.eta5) == XUR_IDENTITY_ETA5
            && apply_map_to_set(&perm, candidate) == XUR_IDENTITY_ETA5;
        two_sided.then_some(ExtendedUr { eta5: candidate })
    }
}

/// Minmatrices of `chi(1)`, `chi(p)`, `chi(!p)` and `chi(0)`: everything a
/// minterm image needs, derived from `eta5` by bit shuffles.
struct XurTables {
    x1: u32,
    xp: u32,
    xnp: u32,
    x0: u32,
}

// index masks by the (<>1, <>0) state pair of the minterm index
const M1_0_M0_0: u32 = 0x0055_0055;
const M1_0_M0_1: u32 = 0x00AA_00AA;
const M1_1_M0_0: u32 = 0x5500_5500;
const M1_1_M0_1: u32 = 0xAA00_AA00;

impl XurTables {
    fn new(eta5: u32) -> XurTables {
        let bit = |r: u32| (eta5 >> r) & 1 == 1;
        let spread = |b00: bool, b01: bool, b10: bool, b11: bool| {
            let mut m = 0u32;
            if b00 {
                m |= M1_0_M0_0;
            }
            if b01 {
                m |= M1_0_M0_1;
            }
            if b10 {
                m |= M1_1_M0_0;
            }
            if b11 {
                m |= M1_1_M0_1;
            }
            m
        };
        // chi(1) = eta(1, <>1, <>1, <>0, <>0): row 16 + 12*x1 + 3*x0
        let x1 = spread(bit(16), bit(19), bit(28), bit(31));
        // chi(0) = eta(0, <>1, <>0, <>1, <>0): row 10*x1 + 5*x0
        let x0 = spread(bit(0), bit(5), bit(10), bit(15));
        // chi(!p): flip e and swap the <>e / <>!e index bits
        let y = eta5.rotate_left(16);
        let xnp = (y & 0xC3C3_C3C3) | ((y & 0x0C0C_0C0C) << 2) | ((y & 0x3030_3030) >> 2);
        XurTables {
            x1,
            xp: eta5,
            xnp,
            x0,
        }
    }

    #[inline]
    fn minterm_image(&self, idx: u32) -> u32 {
        #[inline]
        fn sel(mask: u32, state: bool) -> u32 {
            if state {
                mask
            } else {
                !mask
            }
        }
        let prefix = if idx & 16 != 0 { 0xFFFF_0000 } else { 0x0000_FFFF };
        prefix
            & sel(self.x1, idx & 8 != 0)
            & sel(self.xp, idx & 4 != 0)
            & sel(self.xnp, idx & 2 != 0)
            & sel(self.x0, idx & 1 != 0)
    }
}

fn minterm_map_fast(eta5: u32) -> Option<[u8; 32]> {
    let tables = XurTables::new(eta5);
    let mut perm = [0u8; 32];
    let mut seen = 0u32;
    for idx in 0..32 {
        let img = tables.minterm_image(idx);
        if img.count_ones() != 1 {
            return None;
        }
        perm[idx as usize] = img.trailing_zeros() as u8;
        seen |= img;
    }
    (seen == u32::MAX).then_some(perm)
}

fn inverse_candidate(perm: &[u8; 32]) -> u32 {
    // the inverse's minmatrix is the perm-preimage of the identity's
    let mut eta5 = 0u32;
    for (i, &p) in perm.iter().enumerate() {
        eta5 |= ((XUR_IDENTITY_ETA5 >> p) & 1) << i;
    }
    eta5
}

fn apply_map_to_set(perm: &[u8; 32], set: u32) -> u32 {
    let mut out = 0u32;
    let mut bits = set;
    while bits != 0 {
        let i = bits.trailing_zeros();
        bits &= bits - 1;
        out |= 1 << perm[i as usize];
    }
    out
}

/// Full invertibility test for a raw 32-bit table.
pub fn xur_is_prime_fast(eta5: u32) -> bool {
    let Some(perm) = minterm_map_fast(eta5) else {
        return false;
    };
    let candidate = inverse_candidate(&perm);
    let Some(perm_inv) = minterm_map_fast(candidate) else {
        return false;
    };
    apply_map_to_set(&perm_inv, eta5) == XUR_IDENTITY_ETA5
        && apply_map_to_set(&perm, candidate) == XUR_IDENTITY_ETA5
}

/// One row of the prime-UR table: the defining formula, where it sends the
/// four degree-1 zero-variable axioms, and the inverse's position.
#[derive(Clone, Debug)]
pub struct PrimeUrRow {
    pub index: usize,
    pub ur: UniformReplacement,
    pub formula: Formula,
    pub axiom_images: [crate::cmm::PrimaryLabel; 4],
    pub inverse_index: usize,
}

/// The 24 prime URs in the fixed row order, with their axiom permutations and
/// inverse pairing, all computed from scratch.
pub fn prime_table() -> Result<Vec<PrimeUrRow>, Error> {
    let urs: Vec<(Formula, UniformReplacement)> = PRIME_UR_FORMULAS
        .iter()
        .map(|s| {
            let f = crate::formula::parse(s).expect("fixed formula parses");
            let ur = UniformReplacement::from_formula(&f)?;
            Ok((f, ur))
        })
        .collect::<Result<_, Error>>()?;
    let eta_to_index: BTreeMap<u8, usize> = urs
        .iter()
        .enumerate()
        .map(|(i, (_, ur))| (ur.eta(), i))
        .collect();
    let mut rows = Vec::with_capacity(24);
    for (index, (formula, ur)) in urs.iter().enumerate() {
        if !ur.is_prime() {
            return Err(Error::Domain(format!(
                "table row {index} ({formula}) is not invertible"
            )));
        }
        let images = axiom_action(ur)?;
        let mut labels = [crate::cmm::PrimaryLabel::W; 4];
        for (slot, m) in labels.iter_mut().zip(images.iter()) {
            let idx = single_minterm(m)?;
            *slot = crate::cmm::PrimaryLabel::of(&Minterm::new(m.context(), idx)?)?;
        }
        let inverse = ur.inverse().expect("prime");
        let inverse_index = *eta_to_index.get(&inverse.eta()).ok_or_else(|| {
            Error::Domain(format!("inverse of row {index} missing from the table"))
        })?;
        rows.push(PrimeUrRow {
            index,
            ur: *ur,
            formula: formula.clone(),
            axiom_images: labels,
            inverse_index,
        });
    }
    Ok(rows)
}

fn single_minterm(m: &Minmatrix) -> Result<u64, Error> {
    let indices = m.indices();
    if indices.len() == 1 {
        Ok(indices[0])
    } else {
        Err(Error::Domain(format!(
            "expected a single minterm, found {}",
            indices.len()
        )))
    }
}

/// Images of the four E[0,1] atoms `(W, D, C, V)` under the replacement,
/// computed as `normalize((±<>1 & ±<>0) * rho)` in E[0,1].
pub fn axiom_action(ur: &UniformReplacement) -> Result<[Minmatrix; 4], Error> {
    let ctx = Context::new(0, 1)?;
    let d1 = Formula::dia(Formula::Const1);
    let d0 = Formula::dia(Formula::Const0);
    let signed = |f: &Formula, positive: bool| {
        if positive {
            f.clone()
        } else {
            Formula::not(f.clone())
        }
    };
    let mut out = Vec::with_capacity(4);
    for (s1, s0) in [(true, true), (true, false), (false, true), (false, false)] {
        let axiom = Formula::and(signed(&d1, s1), signed(&d0, s0));
        out.push(ctx.normalize(&ur.apply(&axiom))?);
    }
    Ok(out.try_into().expect("four images"))
}

/// The four complemental products `±rho(e) & ±rho(!e)` normalized in E[1,1],
/// in the order `(++, +-, -+, --)`.
pub fn table3_products(ur: &UniformReplacement) -> Result<[Minmatrix; 4], Error> {
    let ctx = e11()?;
    let e = Formula::Var(1);
    let pos = ur.defining_formula(&e);
    let neg = ur.defining_formula(&Formula::not(e));
    let signed = |f: &Formula, positive: bool| {
        if positive {
            f.clone()
        } else {
            Formula::not(f.clone())
        }
    };
    let mut out = Vec::with_capacity(4);
    for (s, t) in [(true, true), (true, false), (false, true), (false, false)] {
        let product = Formula::and(signed(&pos, s), signed(&neg, t));
        out.push(ctx.normalize(&product)?);
    }
    Ok(out.try_into().expect("four products"))
}

/// The side claim about arbitrary (also non-prime) replacements: every prime
/// orbit maps to a possibly empty union of complete prime orbits, distinct
/// orbits have disjoint images, and the images together cover the context.
pub fn ur_orbit_image_structure(ur: &UniformReplacement, ctx: &Context) -> Result<bool, Error> {
    let orbits = crate::subst::orbits(ctx)?;
    let mut covered = Minmatrix::empty(ctx);
    for orbit in orbits.orbits() {
        let mut image = Minmatrix::empty(ctx);
        for &mu in orbit.members() {
            let f = ctx.minterm_formula(mu);
            image = image.union(&ctx.normalize(&ur.apply(&f))?);
        }
        if !orbits.is_union_of_orbits(&image) {
            return Ok(false);
        }
        if !covered.intersect(&image).is_empty() {
            return Ok(false);
        }
        covered = covered.union(&image);
    }
    Ok(covered.is_full())
}

/// If `m` equals `normalize(e ˇ<>e ˇ<>!e + !e ˇ<>e ˇ<>!e)` for some choice of
/// the four checks, returns the signs `(on <>e, on <>!e)` of both summands.
pub fn complemental_pattern_signs(m: &Minmatrix) -> Option<[(bool, bool); 2]> {
    let ctx = m.context();
    if ctx.v() != 1 || ctx.d() != 1 {
        return None;
    }
    let e = Formula::Var(1);
    let shape = |e_sign: bool, de: bool, dne: bool| {
        let lit = |f: Formula, s: bool| if s { f } else { Formula::not(f) };
        Formula::and(
            Formula::and(lit(e.clone(), e_sign), lit(Formula::dia(e.clone()), de)),
            lit(Formula::dia(Formula::not(e.clone())), dne),
        )
    };
    for s in 0..16u32 {
        let (a, b, c, d) = (s & 8 != 0, s & 4 != 0, s & 2 != 0, s & 1 != 0);
        let f = Formula::or(shape(true, a, b), shape(false, c, d));
        if &ctx.normalize(&f).ok()? == m {
            return Some([(a, b), (c, d)]);
        }
    }
    None
}

const PARTITION_BITS: u32 = 20;
/// Number of fixed search partitions; a checkpoint counts finished ones.
pub const PARTITION_COUNT: u64 = 1 << (32 - PARTITION_BITS);
/// Candidates per partition.
pub const PARTITION_SIZE: u64 = 1 << PARTITION_BITS;

#[derive(Clone, Debug)]
pub struct XurSearchConfig {
    pub workers: usize,
    /// Partitions between checkpoint writes.
    pub report_every: u64,
    pub checkpoint: Option<PathBuf>,
}

impl Default for XurSearchConfig {
    fn default() -> Self {
        XurSearchConfig {
            workers: 1,
            report_every: 64,
            checkpoint: None,
        }
    }
}

#[derive(Debug)]
pub struct XurSearchOutcome {
    /// Prime tables in ascending eta5 order.
    pub primes: Vec<u32>,
    /// Partitions skipped thanks to a checkpoint.
    pub resumed_partitions: u64,
}

struct SearchState {
    frontier: u64,
    pending: BTreeMap<u64, Vec<u32>>,
    found: Vec<u32>,
    last_checkpoint: u64,
}

/// Scans all 2^32 five-input tables for invertible ones.
///
/// The space is split into fixed partitions handed to workers in order; the
/// checkpoint records the contiguous prefix of finished partitions plus the
/// tables found there, so an interrupted run resumes where it left off.
pub fn xur_search(
    cfg: &XurSearchConfig,
    progress: Option<&(dyn Fn(u64, u64, u64) + Sync)>,
) -> Result<XurSearchOutcome, Error> {
    let (start, found) = match &cfg.checkpoint {
        Some(path) if path.exists() => read_checkpoint(path)?,
        _ => (0, Vec::new()),
    };
    let resumed = start;
    let state = Mutex::new(SearchState {
        frontier: start,
        pending: BTreeMap::new(),
        found,
        last_checkpoint: start,
    });
    let next = AtomicU64::new(start);
    let workers = cfg.workers.max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let part = next.fetch_add(1, Ordering::Relaxed);
                if part >= PARTITION_COUNT {
                    break;
                }
                let mut found = Vec::new();
                let base = part * PARTITION_SIZE;
                for off in 0..PARTITION_SIZE {
                    let eta5 = (base + off) as u32;
                    if xur_is_prime_fast(eta5) {
                        found.push(eta5);
                    }
                }
                let mut st = state.lock().expect("search state");
                st.pending.insert(part, found);
                loop {
                    let frontier = st.frontier;
                    match st.pending.remove(&frontier) {
                        Some(batch) => {
                            st.found.extend(batch);
                            st.frontier += 1;
                        }
                        None => break,
                    }
                }
                let due = st.frontier >= st.last_checkpoint + cfg.report_every
                    || st.frontier == PARTITION_COUNT;
                if due && st.pending.is_empty() {
                    st.last_checkpoint = st.frontier;
                    if let Some(path) = &cfg.checkpoint {
                        // surface write errors at the end, not mid-scan
                        let _ = write_checkpoint(path, st.frontier, &st.found);
                    }
                    if let Some(report) = progress {
                        report(
                            st.frontier * PARTITION_SIZE,
                            PARTITION_COUNT * PARTITION_SIZE,
                            st.found.len() as u64,
                        );
                    }
                }
            });
        }
    });
    let st = state.into_inner().expect("search state");
    debug_assert_eq!(st.frontier, PARTITION_COUNT);
    if let Some(path) = &cfg.checkpoint {
        write_checkpoint(path, PARTITION_COUNT, &st.found)?;
    }
    Ok(XurSearchOutcome {
        primes: st.found,
        resumed_partitions: resumed,
    })
}

/// The smoke variant: scans only the 256 tables that embed plain URs.
pub fn xur_search_embedded_urs() -> Vec<u32> {
    (0..=255u8)
        .map(|eta| UniformReplacement::from_eta(eta).extend().eta5())
        .filter(|&eta5| xur_is_prime_fast(eta5))
        .collect()
}

const CHECKPOINT_HEADER: &str = "modlat-xur-checkpoint v1";

fn write_checkpoint(path: &PathBuf, partitions: u64, found: &[u32]) -> Result<(), Error> {
    let io = |e: std::io::Error| Error::Domain(format!("checkpoint {}: {e}", path.display()));
    let tmp = path.with_extension("tmp");
    let mut out = std::io::BufWriter::new(std::fs::File::create(&tmp).map_err(io)?);
    writeln!(out, "{CHECKPOINT_HEADER}").map_err(io)?;
    writeln!(out, "partitions_done={partitions}").map_err(io)?;
    for &eta5 in found {
        writeln!(out, "{eta5:08x}").map_err(io)?;
    }
    out.into_inner()
        .map_err(|e| Error::Domain(format!("checkpoint flush: {e}")))?;
    std::fs::rename(&tmp, path).map_err(io)?;
    Ok(())
}

fn read_checkpoint(path: &PathBuf) -> Result<(u64, Vec<u32>), Error> {
    let bad = |msg: &str| Error::Domain(format!("checkpoint {}: {msg}", path.display()));
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Domain(format!("checkpoint {}: {e}", path.display())))?;
    let mut lines = text.lines();
    if lines.next() != Some(CHECKPOINT_HEADER) {
        return Err(bad("unrecognized header"));
    }
    let partitions: u64 = lines
        .next()
        .and_then(|l| l.strip_prefix("partitions_done="))
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("missing partitions_done"))?;
    if partitions > PARTITION_COUNT {
        return Err(bad("partition count out of range"));
    }
    let mut found = Vec::new();
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        found.push(u32::from_str_radix(line, 16).map_err(|_| bad("bad eta5 entry"))?);
    }
    Ok((partitions, found))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn ur(text: &str) -> UniformReplacement {
        UniformReplacement::from_formula(&parse(text).unwrap()).unwrap()
    }

    #[test]
    fn identity_eta_is_cc() {
        assert_eq!(ur("<>p1").eta(), 0xCC);
        assert_eq!(UniformReplacement::identity().eta(), 0xCC);
        assert_eq!(
            UniformReplacement::identity().extend().eta5(),
            XUR_IDENTITY_ETA5
        );
    }

    #[test]
    fn apply_examples() {
        let ctx = Context::new(1, 1).unwrap();
        let e01 = Context::new(0, 1).unwrap();
        let rho6 = ur("!<>p1");
        // <>1 * rho6 ~ !<>1
        let image = rho6.apply(&parse("<>1").unwrap());
        assert_eq!(
            e01.normalize(&image).unwrap(),
            e01.normalize(&parse("!<>1").unwrap()).unwrap()
        );
        // level-0 formulas are untouched
        assert_eq!(rho6.apply(&parse("p1").unwrap()), parse("p1").unwrap());
        // <>1 & <>0 lands on the V minterm
        let v = e01
            .normalize(&rho6.apply(&parse("<>1 & <>0").unwrap()))
            .unwrap();
        assert_eq!(v.indices(), vec![0]);
        // identity leaves classes alone
        let id = UniformReplacement::identity();
        for s in ["<>p1 -> p1", "[]p1 <-> !<>!p1", "<>0 + !<>0"] {
            let f = parse(s).unwrap();
            assert_eq!(
                ctx.normalize(&id.apply(&f)).unwrap(),
                ctx.normalize(&f).unwrap()
            );
        }
    }

    #[test]
    fn box_rule() {
        // ([]psi) * rho ~ !rho(!(psi * rho))
        let ctx = Context::new(1, 1).unwrap();
        for s in ["<>p1 <-> p1", "!<>!p1", "<>!p1 <-> !p1 + <>p1"] {
            let rho = ur(s);
            let lhs = ctx.normalize(&rho.apply(&parse("[]p1").unwrap())).unwrap();
            let rhs = ctx
                .normalize(&Formula::not(
                    rho.defining_formula(&Formula::not(parse("p1").unwrap())),
                ))
                .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn compose_worked_examples() {
        let rho1 = ur("<>p1 <-> p1");
        let rho2 = ur("<>p1 <-> p1 + <>!p1");
        let rho3 = ur("<>p1 <-> p1 + !<>!p1");
        assert_eq!(rho2.compose(&rho3), rho1);
        let rho8 = ur("!<>p1 <-> p1 + <>!p1");
        let rho9 = ur("!<>p1 <-> p1 + !<>!p1");
        assert_eq!(rho8.compose(&rho9), UniformReplacement::identity());
    }

    #[test]
    fn identity_is_unit_for_all_256() {
        let id = UniformReplacement::identity();
        for eta in 0..=255u8 {
            let r = UniformReplacement::from_eta(eta);
            assert_eq!(r.compose(&id), r);
            assert_eq!(id.compose(&r), r);
        }
    }

    #[test]
    fn prime_count_and_inverses() {
        let primes: Vec<u8> = (0..=255u8)
            .filter(|&eta| UniformReplacement::from_eta(eta).is_prime())
            .collect();
        assert_eq!(primes.len(), 24);
        // spot rows of the golden table
        let rho13 = ur("<>!p1 <-> p1");
        let rho19 = ur("!<>!p1 <-> p1");
        assert_eq!(rho13.inverse().unwrap(), rho19);
        assert_eq!(rho19.inverse().unwrap(), rho13);
        assert!(!UniformReplacement::from_eta(0).is_prime());
        // inverses verified through symbolic composition
        for &eta in &primes {
            let r = UniformReplacement::from_eta(eta);
            let inv = r.inverse().unwrap();
            assert_eq!(r.compose(&inv), UniformReplacement::identity());
            assert_eq!(inv.compose(&r), UniformReplacement::identity());
        }
    }

    #[test]
    fn invertibility_matches_brute_force_composition() {
        // oracle: the full 256x256 symbolic composition table
        let all: Vec<UniformReplacement> = (0..=255u8).map(UniformReplacement::from_eta).collect();
        let id = UniformReplacement::identity();
        for &r in &all {
            let brute = all
                .iter()
                .any(|&s| r.compose(&s) == id && s.compose(&r) == id);
            assert_eq!(brute, r.is_prime(), "eta={:#04x}", r.eta());
        }
    }

    #[test]
    fn pair_map_primality() {
        for eta in 0..=255u8 {
            assert_eq!(
                pair_map(eta).is_some(),
                UniformReplacement::from_eta(eta).is_prime(),
                "eta={eta:#04x}"
            );
        }
    }

    #[test]
    fn minterm_fast_path_agrees_with_symbolic() {
        let ctx = Context::new(1, 1).unwrap();
        for s in PRIME_UR_FORMULAS {
            let rho = ur(s);
            let perm = rho.minterm_permutation(&ctx).unwrap();
            for idx in 0..32 {
                let mu = Minterm::new(&ctx, idx).unwrap();
                let slow = ctx.normalize(&rho.apply(&mu.formula())).unwrap();
                assert_eq!(slow.indices(), vec![perm.apply(idx)], "{s} idx={idx}");
            }
        }
    }

    #[test]
    fn minterm_fast_path_on_e01() {
        let ctx = Context::new(0, 1).unwrap();
        let rho6 = ur("!<>p1");
        let perm = rho6.minterm_permutation(&ctx).unwrap();
        // W (index 3) goes to V (index 0)
        assert_eq!(perm.apply(3), 0);
        let id = UniformReplacement::identity();
        assert!(id.minterm_permutation(&ctx).unwrap().is_identity());
    }

    #[test]
    fn minterm_fast_path_two_levels() {
        // E[0,2]: fast path against the symbolic route for a sample
        let ctx = Context::new(0, 2).unwrap();
        for s in ["!<>p1", "<>p1 <-> p1", "!<>!p1 <-> p1 + <>p1"] {
            let rho = ur(s);
            let perm = rho.minterm_permutation(&ctx).unwrap();
            for idx in [0u64, 1, 255, 32_768, 65_535, 40_000] {
                let mu = Minterm::new(&ctx, idx).unwrap();
                let slow = ctx.normalize(&rho.apply(&mu.formula())).unwrap();
                assert_eq!(slow.indices(), vec![perm.apply(idx)], "{s} idx={idx}");
            }
        }
    }

    #[test]
    fn axiom_action_rows() {
        use crate::cmm::PrimaryLabel::*;
        let images = |s: &str| {
            prime_table()
                .unwrap()
                .into_iter()
                .find(|row| row.formula == parse(s).unwrap())
                .unwrap()
                .axiom_images
        };
        assert_eq!(images("<>p1"), [W, D, C, V]);
        assert_eq!(images("!<>p1"), [V, C, D, W]);
        assert_eq!(images("!<>!p1"), [V, D, C, W]);
        assert_eq!(images("!<>!p1 <-> p1 + <>p1"), [D, V, C, W]);
    }

    #[test]
    fn orbit_images_are_complete_orbits() {
        // holds for every replacement, prime or not
        let ctx = Context::new(1, 1).unwrap();
        for eta in (0..=255u8).step_by(7) {
            let rho = UniformReplacement::from_eta(eta);
            assert!(
                ur_orbit_image_structure(&rho, &ctx).unwrap(),
                "eta={eta:#04x}"
            );
        }
        let e01 = Context::new(0, 1).unwrap();
        for eta in [0u8, 0x55, 0xCC, 0xFF] {
            assert!(ur_orbit_image_structure(&UniformReplacement::from_eta(eta), &e01).unwrap());
        }
    }

    #[test]
    fn nonprime_axiom_action_degenerates() {
        // the constant replacement sends every diamond to 0, so the atom
        // images are empty rather than single minterms
        let zero = UniformReplacement::from_eta(0);
        assert!(!zero.is_prime());
        let images = axiom_action(&zero).unwrap();
        assert!(images.iter().all(|m| m.count() != 1));
        assert!(zero.minterm_permutation(&Context::new(0, 1).unwrap()).is_err());
    }

    #[test]
    fn prime_table_inverse_pairing() {
        let rows = prime_table().unwrap();
        assert_eq!(rows.len(), 24);
        for row in &rows {
            assert_eq!(rows[row.inverse_index].inverse_index, row.index);
        }
        // spot inverse pairs by row position
        assert_eq!(rows[0].inverse_index, 0);
        assert_eq!(rows[6].inverse_index, 6);
        assert_eq!(rows[13].inverse_index, 19);
        assert_eq!(rows[20].inverse_index, 23);
    }

    #[test]
    fn table3_spot_rows() {
        let ctx = Context::new(1, 1).unwrap();
        let n = |s: &str| ctx.normalize(&parse(s).unwrap()).unwrap();
        let p0 = table3_products(&ur("<>p1")).unwrap();
        assert_eq!(p0[0], n("<>p1 & <>!p1"));
        assert_eq!(p0[1], n("<>p1 & !<>!p1"));
        assert_eq!(p0[2], n("!<>p1 & <>!p1"));
        assert_eq!(p0[3], n("!<>p1 & !<>!p1"));
        let p1 = table3_products(&ur("<>p1 <-> p1")).unwrap();
        assert_eq!(p1[0], n("p1 & <>p1 & !<>!p1 + !p1 & !<>p1 & <>!p1"));
        // every product of a prime fits the two-summand complemental shape
        for s in PRIME_UR_FORMULAS {
            for m in table3_products(&ur(s)).unwrap() {
                assert!(complemental_pattern_signs(&m).is_some(), "{s}");
            }
        }
    }

    #[test]
    fn xur_embeddings() {
        let id = ExtendedUr::identity();
        assert_eq!(id.as_ur().unwrap(), UniformReplacement::identity());
        for s in PRIME_UR_FORMULAS {
            let x = ur(s).extend();
            assert!(x.is_prime(), "{s}");
            assert_eq!(x.as_ur().unwrap(), ur(s));
        }
        assert_eq!(xur_search_embedded_urs().len(), 24);
    }

    #[test]
    fn xur_compose_fast_matches_symbolic() {
        let samples = [
            XUR_IDENTITY_ETA5,
            ur("!<>p1").extend().eta5(),
            ur("<>!p1 <-> p1").extend().eta5(),
            0xDEAD_BEEF,
            0x0000_0000,
            0x0F0F_1234,
        ];
        for &a in &samples {
            for &b in &samples {
                let xa = ExtendedUr::from_eta5(a);
                let xb = ExtendedUr::from_eta5(b);
                assert_eq!(
                    xa.compose(&xb).unwrap(),
                    xa.compose_fast(&xb),
                    "a={a:#010x} b={b:#010x}"
                );
            }
        }
    }

    #[test]
    fn worked_xur_pair() {
        let chi = ExtendedUr::from_formula(
            &parse("(<>1 -> p1 + (<>p1 <-> (<>0 -> <>!p1))) -> <>p1 & (<>1 -> p1)").unwrap(),
        )
        .unwrap();
        let chi_inv = ExtendedUr::from_formula(
            &parse("(<>1 -> p1 + (<>p1 <-> <>0 + <>!p1)) -> <>p1 & (<>1 -> p1)").unwrap(),
        )
        .unwrap();
        assert!(chi.is_prime());
        assert!(chi_inv.is_prime());
        assert_eq!(chi.compose(&chi_inv).unwrap(), ExtendedUr::identity());
        assert_eq!(chi_inv.compose(&chi).unwrap(), ExtendedUr::identity());
        assert_eq!(chi.inverse().unwrap(), chi_inv);
        // prime tables keep exactly half of the 32 minterms
        assert_eq!(chi.eta5().count_ones(), 16);
        assert!(chi.as_ur().is_none(), "the pair genuinely uses <>1/<>0");
    }

    #[test]
    fn checkpoint_roundtrip() {
        let dir = std::env::temp_dir().join(format!("modlat-ckpt-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("xur.ckpt");
        write_checkpoint(&path, 17, &[0xCCu32, 0xF0F0_F0F0]).unwrap();
        let (parts, found) = read_checkpoint(&path).unwrap();
        assert_eq!(parts, 17);
        assert_eq!(found, vec![0xCC, 0xF0F0_F0F0]);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
