//! Level-0 uniform substitutions.
//!
//! A substitution maps each variable to a level-0 formula, kept canonically as
//! a truth table over the 2^v assignments. Substitutions act on formulas
//! syntactically and on minterms through the "source map": applying sigma to
//! the minterms of a context partitions the context, every minterm `nu` having
//! exactly one source minterm `mu` with `nu` in `[mu o sigma]`. Prime
//! (invertible) substitutions are the ones whose source map is a permutation;
//! they form a group isomorphic to the symmetric group on the level-0
//! minterms, and their orbits are the building blocks of CMMs.

use crate::bits::Bitset;
use crate::context::{Context, Minmatrix};
use crate::formula::Formula;
use crate::perm::Permutation;
use crate::Error;

#[derive(Clone, Debug)]
pub struct Substitution {
    v: u32,
    /// Truth table of each component over the 2^v assignments.
    tables: Vec<u64>,
    /// Component formulas as given (canonical DNF when synthesized).
    components: Vec<Formula>,
}

impl PartialEq for Substitution {
    fn eq(&self, other: &Self) -> bool {
        self.v == other.v && self.tables == other.tables
    }
}

impl Eq for Substitution {}

impl Substitution {
    pub fn identity(v: u32) -> Substitution {
        let tables = (1..=v).map(|i| var_table(v, i)).collect();
        let components = (1..=v).map(Formula::Var).collect();
        Substitution {
            v,
            tables,
            components,
        }
    }

    pub fn from_formulas(v: u32, components: Vec<Formula>) -> Result<Substitution, Error> {
        if components.len() != v as usize {
            return Err(Error::Domain(format!(
                "expected {v} substitution components, got {}",
                components.len()
            )));
        }
        let ctx0 = Context::new(v, 0)?;
        let mut tables = Vec::with_capacity(v as usize);
        for (i, c) in components.iter().enumerate() {
            if c.modal_degree() > 0 {
                return Err(Error::Domain(format!(
                    "substitution component for p{} is not level 0",
                    i + 1
                )));
            }
            tables.push(ctx0.normalize(c)?.rank());
        }
        Ok(Substitution {
            v,
            tables,
            components,
        })
    }

    /// Builds from raw truth tables, synthesizing canonical DNF components.
    pub fn from_tables(v: u32, tables: Vec<u64>) -> Result<Substitution, Error> {
        if tables.len() != v as usize {
            return Err(Error::Domain(format!(
                "expected {v} truth tables, got {}",
                tables.len()
            )));
        }
        let n = 1u64 << v;
        let ctx0 = Context::new(v, 0)?;
        let mut components = Vec::with_capacity(v as usize);
        for &t in &tables {
            if n < 64 && t >= (1 << n) {
                return Err(Error::Domain(format!("table {t:#x} exceeds {n} bits")));
            }
            components.push(ctx0.rank_formula(t));
        }
        Ok(Substitution {
            v,
            tables,
            components,
        })
    }

    /// Text form `p1:=<formula>; p2:=<formula>; ...`. Unmentioned variables
    /// keep themselves.
    pub fn parse_text(v: u32, text: &str) -> Result<Substitution, Error> {
        let mut components = vec![None; v as usize];
        for part in text.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (lhs, rhs) = part
                .split_once(":=")
                .ok_or_else(|| Error::Domain(format!("expected 'p<i>:=<formula>' in '{part}'")))?;
            let lhs = lhs.trim();
            let idx: u32 = lhs
                .strip_prefix('p')
                .and_then(|s| s.parse().ok())
                .filter(|&i| i >= 1 && i <= v)
                .ok_or_else(|| Error::Domain(format!("bad substitution target '{lhs}'")))?;
            components[idx as usize - 1] = Some(crate::formula::parse(rhs)?);
        }
        let components = components
            .into_iter()
            .enumerate()
            .map(|(i, c)| c.unwrap_or(Formula::Var(i as u32 + 1)))
            .collect();
        Substitution::from_formulas(v, components)
    }

    pub fn to_text(&self) -> String {
        self.components
            .iter()
            .enumerate()
            .map(|(i, c)| format!("p{}:={}", i + 1, c))
            .collect::<Vec<_>>()
            .join("; ")
    }

    pub fn v(&self) -> u32 {
        self.v
    }

    pub fn component(&self, i: u32) -> &Formula {
        &self.components[i as usize - 1]
    }

    pub fn table(&self, i: u32) -> u64 {
        self.tables[i as usize - 1]
    }

    /// Syntactic application: replace every variable by its component.
    pub fn apply(&self, f: &Formula) -> Formula {
        match f {
            Formula::Const0 => Formula::Const0,
            Formula::Const1 => Formula::Const1,
            Formula::Var(i) => self.components[*i as usize - 1].clone(),
            Formula::Not(g) => Formula::not(self.apply(g)),
            Formula::Dia(g) => Formula::dia(self.apply(g)),
            Formula::Nec(g) => Formula::nec(self.apply(g)),
            Formula::And(a, b) => Formula::and(self.apply(a), self.apply(b)),
            Formula::Or(a, b) => Formula::or(self.apply(a), self.apply(b)),
            Formula::Imp(a, b) => Formula::imp(self.apply(a), self.apply(b)),
            Formula::Iff(a, b) => Formula::iff(self.apply(a), self.apply(b)),
        }
    }

    /// Composition: the components of `self` with `other`'s components
    /// substituted in, so `f o (self other) = (f o self) o other`.
    pub fn compose(&self, other: &Substitution) -> Substitution {
        assert_eq!(self.v, other.v, "substitution arity mismatch");
        let components: Vec<Formula> = self.components.iter().map(|c| other.apply(c)).collect();
        let tables = self
            .tables
            .iter()
            .map(|&t| {
                let mut out = 0u64;
                for b in 0..1u64 << self.v {
                    out |= ((t >> other.forward(b)) & 1) << b;
                }
                out
            })
            .collect();
        Substitution {
            v: self.v,
            tables,
            components,
        }
    }

    /// The assignment map: the tuple of component values at assignment `b`.
    pub fn forward(&self, b: u64) -> u64 {
        let mut out = 0u64;
        for i in 1..=self.v {
            out |= ((self.tables[i as usize - 1] >> b) & 1) << (self.v - i);
        }
        out
    }

    /// Invertible in the substitution monoid, i.e. the induced map on level-0
    /// minterms is a permutation.
    pub fn is_prime(&self) -> bool {
        let n = 1u64 << self.v;
        let mut seen = 0u64;
        for b in 0..n {
            seen |= 1 << self.forward(b);
        }
        seen.count_ones() as u64 == n
    }

    pub fn inverse(&self) -> Option<Substitution> {
        if !self.is_prime() {
            return None;
        }
        let n = 1u64 << self.v;
        let mut ginv = vec![0u64; n as usize];
        for b in 0..n {
            ginv[self.forward(b) as usize] = b;
        }
        let tables = (1..=self.v)
            .map(|i| {
                let mut t = 0u64;
                for b in 0..n {
                    t |= ((ginv[b as usize] >> (self.v - i)) & 1) << b;
                }
                t
            })
            .collect();
        Some(Substitution::from_tables(self.v, tables).expect("valid tables"))
    }

    /// For each minterm of the context, the unique minterm whose sigma-image
    /// contains it. Images of distinct minterms are disjoint and cover the
    /// context, so this single vector captures the whole action.
    pub fn source_map(&self, ctx: &Context) -> Result<Vec<u64>, Error> {
        if ctx.v() != self.v {
            return Err(Error::ContextMismatch(format!(
                "substitution over {} variables vs {ctx}",
                self.v
            )));
        }
        Ok(source_map_for_tables(self.v, &self.tables, ctx))
    }

    /// The minmatrix `[m o sigma]`.
    pub fn image(&self, m: &Minmatrix) -> Result<Minmatrix, Error> {
        let sources = self.source_map(m.context())?;
        let mut bits = Bitset::empty(m.context().minterm_count());
        for (nu, &src) in sources.iter().enumerate() {
            if m.contains(src) {
                bits.set(nu as u64, true);
            }
        }
        Ok(Minmatrix::from_bitset(m.context(), bits))
    }

    /// Minterm permutation induced on a context by a prime substitution.
    pub fn induced_permutation(&self, ctx: &Context) -> Result<Permutation, Error> {
        if !self.is_prime() {
            return Err(Error::Domain(
                "induced_permutation requires a prime substitution".into(),
            ));
        }
        let sources = self.source_map(ctx)?;
        Permutation::from_vec(sources)
            .map(|p| p.inverse())
            .ok_or_else(|| Error::Domain("prime substitution source map not bijective".into()))
    }

    /// Whether `[m & m o sigma]` is strictly below `[m]`, which disqualifies
    /// `m` from being a CMM.
    pub fn collapses(&self, m: &Minmatrix) -> Result<bool, Error> {
        Ok(!m.is_subset(&self.image(m)?))
    }
}

fn var_table(v: u32, i: u32) -> u64 {
    let mut t = 0u64;
    for b in 0..1u64 << v {
        t |= ((b >> (v - i)) & 1) << b;
    }
    t
}

fn forward_tables(v: u32, tables: &[u64], b: u64) -> u64 {
    let mut out = 0u64;
    for i in 1..=v {
        out |= ((tables[i as usize - 1] >> b) & 1) << (v - i);
    }
    out
}

fn source_map_for_tables(v: u32, tables: &[u64], ctx: &Context) -> Vec<u64> {
    let mut sources: Vec<u64> = (0..1u64 << v).map(|b| forward_tables(v, tables, b)).collect();
    for level in 1..=ctx.d() {
        let factor_count = ctx.factor_count_at(level);
        // image rank of every previous-level formula: nu is in the image of
        // rank r exactly when nu's source lies in r
        let mut rank_map = vec![0u64; factor_count as usize];
        for (r, entry) in rank_map.iter_mut().enumerate() {
            let mut img = 0u64;
            for (nu, &src) in sources.iter().enumerate() {
                if (r as u64 >> src) & 1 == 1 {
                    img |= 1 << nu;
                }
            }
            *entry = img;
        }
        let count = ctx.minterm_count_at(level);
        let mut next = Vec::with_capacity(count as usize);
        for nu in 0..count {
            let prefix = nu >> factor_count;
            let src_prefix = forward_tables(v, tables, prefix);
            // the source's state at rank r is nu's state at r's image rank
            let mut states = 0u64;
            for (r, &img) in rank_map.iter().enumerate() {
                states |= ((nu >> img) & 1) << r;
            }
            next.push((src_prefix << factor_count) | states);
        }
        sources = next;
    }
    sources
}

/// All level-0 substitutions over v variables, by ascending encoded tables.
pub fn enumerate_all(v: u32) -> Result<Vec<Substitution>, Error> {
    if v > 2 {
        return Err(Error::Domain(format!(
            "enumerating all 2^{} substitutions for v={v} exceeds the scan bound",
            (v as u64) << v
        )));
    }
    let table_count = 1u64 << (1u64 << v);
    let mut out = Vec::new();
    for code in 0..table_count.pow(v) {
        let mut tables = Vec::with_capacity(v as usize);
        let mut c = code;
        for _ in 0..v {
            tables.push(c % table_count);
            c /= table_count;
        }
        out.push(Substitution::from_tables(v, tables)?);
    }
    Ok(out)
}

/// The prime substitution realizing a given permutation of level-0 minterms.
pub fn from_level0_permutation(v: u32, perm: &Permutation) -> Result<Substitution, Error> {
    let n = 1u64 << v;
    if perm.len() != n {
        return Err(Error::Domain(format!(
            "permutation over {} points, expected {n}",
            perm.len()
        )));
    }
    // the minterm action is g^{-1}, so components read through perm^{-1}
    let g = perm.inverse();
    let tables = (1..=v)
        .map(|i| {
            let mut t = 0u64;
            for b in 0..n {
                t |= ((g.apply(b) >> (v - i)) & 1) << b;
            }
            t
        })
        .collect();
    Substitution::from_tables(v, tables)
}

/// An orbit of the prime-substitution group action on a context's minterms.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PrimeOrbit {
    members: Vec<u64>,
}

impl PrimeOrbit {
    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn len(&self) -> u64 {
        self.members.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct Orbits {
    ctx: Context,
    orbit_of: Vec<u32>,
    orbits: Vec<PrimeOrbit>,
}

impl Orbits {
    pub fn context(&self) -> &Context {
        &self.ctx
    }

    pub fn orbits(&self) -> &[PrimeOrbit] {
        &self.orbits
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    pub fn orbit_id(&self, minterm: u64) -> u32 {
        self.orbit_of[minterm as usize]
    }

    /// Whether `m` is a union of complete orbits.
    pub fn is_union_of_orbits(&self, m: &Minmatrix) -> bool {
        assert_eq!(m.context(), &self.ctx);
        self.orbits.iter().all(|orbit| {
            let inside = orbit.members.iter().filter(|&&i| m.contains(i)).count();
            inside == 0 || inside == orbit.members.len()
        })
    }

    /// The minmatrix spanned by a set of orbit ids.
    pub fn union_of(&self, ids: impl IntoIterator<Item = u32>) -> Minmatrix {
        let mut bits = Bitset::empty(self.ctx.minterm_count());
        for id in ids {
            for &m in &self.orbits[id as usize].members {
                bits.set(m, true);
            }
        }
        Minmatrix::from_bitset(&self.ctx, bits)
    }
}

/// Orbit partition of the context's minterms under all prime substitutions.
///
/// The group is generated by the adjacent transpositions of level-0 minterms.
pub fn orbits(ctx: &Context) -> Result<Orbits, Error> {
    let n = ctx.minterm_count();
    let v = ctx.v();
    let mut generators = Vec::new();
    for a in 0..(1u64 << v) - 1 {
        let mut map: Vec<u64> = (0..1u64 << v).collect();
        map.swap(a as usize, a as usize + 1);
        let transposition = Permutation::from_vec(map).expect("transposition");
        let sigma = from_level0_permutation(v, &transposition)?;
        generators.push(sigma.induced_permutation(ctx)?);
    }
    // union-find with path halving
    fn find(parent: &mut [u64], mut x: u64) -> u64 {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }
    let mut parent: Vec<u64> = (0..n).collect();
    for g in &generators {
        for i in 0..n {
            let j = g.apply(i);
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri.max(rj) as usize] = ri.min(rj);
            }
        }
    }
    let mut orbit_of = vec![u32::MAX; n as usize];
    let mut members: Vec<Vec<u64>> = Vec::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        if orbit_of[root as usize] == u32::MAX {
            orbit_of[root as usize] = members.len() as u32;
            members.push(Vec::new());
        }
        let id = orbit_of[root as usize];
        orbit_of[i as usize] = id;
        members[id as usize].push(i);
    }
    Ok(Orbits {
        ctx: ctx.clone(),
        orbit_of,
        orbits: members
            .into_iter()
            .map(|members| PrimeOrbit { members })
            .collect(),
    })
}

/// Scans every level-0 substitution for one that collapses `m`; `None` means
/// `m` is immune to all of them (the CMM necessary condition). Bounded to
/// v <= 2; use [`find_collapsing_substitution_unbounded`] to opt into the
/// 2^24-substitution scan of v = 3.
pub fn find_collapsing_substitution(m: &Minmatrix) -> Result<Option<Substitution>, Error> {
    if m.context().v() > 2 {
        return Err(Error::Domain(format!(
            "immunity scan over v={} needs the explicit unbounded variant",
            m.context().v()
        )));
    }
    scan_collapsing(m)
}

/// The immunity scan without the v <= 2 guard (still refuses v > 3, where
/// the substitution count passes 2^64).
pub fn find_collapsing_substitution_unbounded(
    m: &Minmatrix,
) -> Result<Option<Substitution>, Error> {
    if m.context().v() > 3 {
        return Err(Error::Domain(format!(
            "cannot enumerate 2^{} substitutions",
            (m.context().v() as u64) << m.context().v()
        )));
    }
    scan_collapsing(m)
}

fn scan_collapsing(m: &Minmatrix) -> Result<Option<Substitution>, Error> {
    let ctx = m.context();
    let v = ctx.v();
    let table_count = 1u64 << (1u64 << v);
    let mut tables = vec![0u64; v as usize];
    for code in 0..table_count.pow(v) {
        let mut c = code;
        for t in tables.iter_mut() {
            *t = c % table_count;
            c /= table_count;
        }
        let sources = source_map_for_tables(v, &tables, ctx);
        // m is inside its image exactly when every member's source is a member
        let collapses = m
            .bits()
            .iter_ones()
            .any(|mu| !m.contains(sources[mu as usize]));
        if collapses {
            return Ok(Some(Substitution::from_tables(v, tables)?));
        }
    }
    Ok(None)
}
