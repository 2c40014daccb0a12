//! Finite modal contexts and their canonical forms.
//!
//! A context fixes a variable count `v` and a modal degree bound `d`. Its
//! minterms are indexed by `prefix * 2^F + states`, where the prefix is the
//! level-0 assignment (p1 most significant, 1 = positive) and bit `r` of the
//! states word is the polarity of the modal factor `<>phi` for the level-(d-1)
//! formula `phi` of rank `r`. A formula's rank is its minmatrix bitset read as
//! an unsigned integer, so ranks, factors and minterm indices share one total
//! order. Normalization evaluates the formula bit-parallel over the whole
//! minterm space, recursing into the lower context under each `<>`.

use std::sync::Arc;

use crate::bits::Bitset;
use crate::formula::Formula;
use crate::Error;

pub const DEFAULT_CAPACITY: u64 = 1 << 24;

#[derive(Debug)]
struct ContextData {
    v: u32,
    d: u32,
    capacity: u64,
    /// Minterm count of E[v,k] for k = 0..=d.
    minterm_counts: Vec<u64>,
    /// Modal factor count F_k at level k (entry 0 is 0).
    factor_counts: Vec<u64>,
    /// promote_ranks[k][r]: the level-k rank of the promotion of the
    /// level-(k-1) formula with rank r. Filled for 1 <= k < d.
    promote_ranks: Vec<Vec<u64>>,
}

/// A finite modal context E[v,d]. Cheap to clone and immutable.
#[derive(Clone, Debug)]
pub struct Context {
    data: Arc<ContextData>,
}

impl PartialEq for Context {
    fn eq(&self, other: &Self) -> bool {
        self.data.v == other.data.v && self.data.d == other.data.d
    }
}

impl Eq for Context {}

impl std::fmt::Display for Context {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "E[{},{}]", self.v(), self.d())
    }
}

impl Context {
    pub fn new(v: u32, d: u32) -> Result<Context, Error> {
        Context::with_capacity(v, d, DEFAULT_CAPACITY)
    }

    pub fn with_capacity(v: u32, d: u32, capacity: u64) -> Result<Context, Error> {
        let exceeded = |detail: String| Error::CapacityExceeded { v, d, detail };
        if v >= 16 {
            return Err(exceeded(format!("2^{v} level-0 minterms")));
        }
        let mut minterm_counts = vec![1u64 << v];
        let mut factor_counts = vec![0u64];
        for k in 1..=d {
            let prev = minterm_counts[k as usize - 1];
            if prev > 32 {
                return Err(exceeded(format!(
                    "level {} has 2^{prev} formulas, far beyond any factor table",
                    k - 1
                )));
            }
            let factors = 1u64 << prev;
            let count = (v as u64 + factors <= 63)
                .then(|| 1u64 << (v as u64 + factors))
                .filter(|&c| c <= capacity)
                .ok_or_else(|| {
                    exceeded(format!(
                        "level {k} needs 2^{} minterms (bound {capacity})",
                        v as u64 + factors
                    ))
                })?;
            factor_counts.push(factors);
            minterm_counts.push(count);
        }
        let mut data = ContextData {
            v,
            d,
            capacity,
            minterm_counts,
            factor_counts,
            promote_ranks: vec![Vec::new()],
        };
        for k in 1..d {
            // promote each level-(k-1) formula by collecting its descendants
            let formulas = 1u64 << data.minterm_counts[k as usize - 1];
            let count_k = data.minterm_counts[k as usize];
            debug_assert!(count_k <= 63);
            let mut table = Vec::with_capacity(formulas as usize);
            for r in 0..formulas {
                let mut promoted = 0u64;
                for idx in 0..count_k {
                    if (r >> data.ancestor_at(k, idx)) & 1 == 1 {
                        promoted |= 1 << idx;
                    }
                }
                table.push(promoted);
            }
            data.promote_ranks.push(table);
        }
        Ok(Context { data: Arc::new(data) })
    }

    pub fn v(&self) -> u32 {
        self.data.v
    }

    pub fn d(&self) -> u32 {
        self.data.d
    }

    pub fn capacity(&self) -> u64 {
        self.data.capacity
    }

    pub fn minterm_count(&self) -> u64 {
        self.data.minterm_counts[self.data.d as usize]
    }

    pub fn factor_count(&self) -> u64 {
        self.data.factor_counts[self.data.d as usize]
    }

    pub fn minterm_count_at(&self, level: u32) -> u64 {
        self.data.minterm_counts[level as usize]
    }

    pub fn factor_count_at(&self, level: u32) -> u64 {
        self.data.factor_counts[level as usize]
    }

    /// The context E[v,level] with the same capacity bound.
    pub fn at_level(&self, level: u32) -> Context {
        assert!(level <= self.d());
        Context::with_capacity(self.v(), level, self.capacity())
            .expect("sub-context fits if the parent did")
    }

    /// Rank of the full formula [1] one level down, i.e. the factor `<>1`.
    pub fn top_factor_rank(&self) -> u64 {
        assert!(self.d() > 0);
        self.factor_count() - 1
    }

    /// Unique DCF representative of `f` in this context.
    pub fn normalize(&self, f: &Formula) -> Result<Minmatrix, Error> {
        if f.max_var() > self.v() {
            return Err(Error::Domain(format!(
                "formula uses p{} but context {self} has v={}",
                f.max_var(),
                self.v()
            )));
        }
        if f.modal_degree() > self.d() {
            return Err(Error::Domain(format!(
                "formula has modal degree {} but context {self} has d={}",
                f.modal_degree(),
                self.d()
            )));
        }
        Ok(Minmatrix {
            ctx: self.clone(),
            bits: self.eval_bits(f)?,
        })
    }

    fn eval_bits(&self, f: &Formula) -> Result<Bitset, Error> {
        let n = self.minterm_count();
        Ok(match f {
            Formula::Const0 => Bitset::empty(n),
            Formula::Const1 => Bitset::full(n),
            Formula::Var(i) => {
                let bit = self.factor_count() + (self.v() - i) as u64;
                Bitset::index_bit_mask(n, bit as u32)
            }
            Formula::Not(g) => self.eval_bits(g)?.complement(),
            Formula::And(a, b) => self.eval_bits(a)?.intersect(&self.eval_bits(b)?),
            Formula::Or(a, b) => self.eval_bits(a)?.union(&self.eval_bits(b)?),
            Formula::Imp(a, b) => self.eval_bits(a)?.complement().union(&self.eval_bits(b)?),
            Formula::Iff(a, b) => self.eval_bits(a)?.xor(&self.eval_bits(b)?).complement(),
            Formula::Dia(g) => {
                // the operand lives one level down; its rank picks the factor
                let sub = self.at_level(self.d() - 1).normalize(g)?;
                Bitset::index_bit_mask(n, sub.rank() as u32)
            }
            Formula::Nec(g) => {
                // []g = !<>!g
                let sub = self.at_level(self.d() - 1).normalize(&Formula::not((**g).clone()))?;
                Bitset::index_bit_mask(n, sub.rank() as u32).complement()
            }
        })
    }

    /// DCF formula with the given rank in this context.
    pub fn rank_formula(&self, rank: u64) -> Formula {
        let n = self.minterm_count();
        assert!(n <= 63 && rank < (1 << n), "rank out of range");
        if rank == 0 {
            return Formula::Const0;
        }
        if rank == (1 << n) - 1 {
            return Formula::Const1;
        }
        let mut sum: Option<Formula> = None;
        for idx in 0..n {
            if (rank >> idx) & 1 == 1 {
                let m = self.minterm_formula(idx);
                sum = Some(match sum {
                    None => m,
                    Some(acc) => Formula::or(acc, m),
                });
            }
        }
        sum.unwrap()
    }

    /// The conjunction formula of a single minterm, variables first, then
    /// modal factors in descending rank (so `<>1` prints first).
    pub fn minterm_formula(&self, idx: u64) -> Formula {
        assert!(idx < self.minterm_count());
        let prefix = idx >> self.factor_count();
        let mut acc: Option<Formula> = None;
        let mut push = |f: Formula| {
            acc = Some(match acc.take() {
                None => f,
                Some(a) => Formula::and(a, f),
            });
        };
        for i in 1..=self.v() {
            let positive = (prefix >> (self.v() - i)) & 1 == 1;
            let lit = Formula::Var(i);
            push(if positive { lit } else { Formula::not(lit) });
        }
        if self.d() > 0 {
            let lower = self.at_level(self.d() - 1);
            for r in (0..self.factor_count()).rev() {
                let lit = Formula::dia(lower.rank_formula(r));
                let positive = (idx >> r) & 1 == 1;
                push(if positive { lit } else { Formula::not(lit) });
            }
        }
        acc.unwrap_or(Formula::Const1)
    }

    /// Rank of the promotion of a formula from `from_level` to `to_level`;
    /// both levels must be below the context's degree.
    pub fn promote_rank(&self, from_level: u32, to_level: u32, rank: u64) -> u64 {
        assert!(from_level <= to_level && to_level < self.d());
        let mut r = rank;
        for k in from_level + 1..=to_level {
            r = self.data.promote_ranks[k as usize][r as usize];
        }
        r
    }

    /// Iterated ancestor of a top-level minterm index down to `level`.
    pub fn ancestor_index(&self, level: u32, idx: u64) -> u64 {
        assert!(level <= self.d());
        let mut idx = idx;
        for k in (level + 1..=self.d()).rev() {
            idx = self.data.ancestor_at(k, idx);
        }
        idx
    }
}

impl ContextData {
    fn ancestor_at(&self, level: u32, idx: u64) -> u64 {
        debug_assert!(level >= 1 && level <= self.d);
        let prefix = idx >> self.factor_counts[level as usize];
        if level == 1 {
            return prefix;
        }
        let lower_factors = self.factor_counts[level as usize - 1];
        let table = &self.promote_ranks[level as usize - 1];
        let mut states = 0u64;
        for s in 0..lower_factors {
            states |= ((idx >> table[s as usize]) & 1) << s;
        }
        (prefix << lower_factors) | states
    }
}

/// A single minterm of a context (the context's own top level).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Minterm {
    ctx: Context,
    index: u64,
}

impl Minterm {
    pub fn new(ctx: &Context, index: u64) -> Result<Minterm, Error> {
        if index >= ctx.minterm_count() {
            return Err(Error::Domain(format!(
                "minterm index {index} out of range for {ctx}"
            )));
        }
        Ok(Minterm {
            ctx: ctx.clone(),
            index,
        })
    }

    pub fn context(&self) -> &Context {
        &self.ctx
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// Level-0 assignment index.
    pub fn prefix(&self) -> u64 {
        self.index >> self.ctx.factor_count()
    }

    /// Polarity of the modal factor with the given rank.
    pub fn state(&self, rank: u64) -> bool {
        assert!(rank < self.ctx.factor_count());
        (self.index >> rank) & 1 == 1
    }

    pub fn formula(&self) -> Formula {
        self.ctx.minterm_formula(self.index)
    }

    /// Ancestor at a lower level: the restriction to that level's prefix.
    pub fn ancestor(&self, level: u32) -> Result<Minterm, Error> {
        if level >= self.ctx.d() {
            return Err(Error::Domain(format!(
                "ancestor level {level} must be below {}",
                self.ctx.d()
            )));
        }
        Ok(Minterm {
            ctx: self.ctx.at_level(level),
            index: self.ctx.ancestor_index(level, self.index),
        })
    }

    /// All descendants at the target context's level, as a minmatrix there.
    pub fn descendants(&self, to: &Context) -> Result<Minmatrix, Error> {
        let single = Minmatrix::from_indices(&self.ctx, [self.index])?;
        single.promote(to)
    }

    /// The unique descendant whose post-prefix factor states are all 0.
    pub fn special_descendant(&self, to: &Context) -> Result<Minterm, Error> {
        if to.v() != self.ctx.v() {
            return Err(Error::ContextMismatch(format!(
                "{} vs {to}",
                self.ctx
            )));
        }
        if to.d() <= self.ctx.d() {
            return Err(Error::Domain(format!(
                "special descendant level {} must exceed {}",
                to.d(),
                self.ctx.d()
            )));
        }
        let mut idx = self.index;
        for k in self.ctx.d() + 1..=to.d() {
            let lower_factors = to.factor_count_at(k - 1);
            let prefix = idx >> lower_factors;
            let mut states = 0u64;
            if k >= 2 {
                let table = &to.data.promote_ranks[k as usize - 1];
                for s in 0..lower_factors {
                    states |= ((idx >> s) & 1) << table[s as usize];
                }
            }
            idx = (prefix << to.factor_count_at(k)) | states;
        }
        Ok(Minterm {
            ctx: to.clone(),
            index: idx,
        })
    }
}

/// A set of minterms: the DCF representative of a formula class.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Minmatrix {
    ctx: Context,
    bits: Bitset,
}

impl Minmatrix {
    pub fn empty(ctx: &Context) -> Minmatrix {
        Minmatrix {
            ctx: ctx.clone(),
            bits: Bitset::empty(ctx.minterm_count()),
        }
    }

    pub fn full(ctx: &Context) -> Minmatrix {
        Minmatrix {
            ctx: ctx.clone(),
            bits: Bitset::full(ctx.minterm_count()),
        }
    }

    pub fn from_indices(
        ctx: &Context,
        indices: impl IntoIterator<Item = u64>,
    ) -> Result<Minmatrix, Error> {
        let n = ctx.minterm_count();
        let mut bits = Bitset::empty(n);
        for i in indices {
            if i >= n {
                return Err(Error::Domain(format!(
                    "minterm index {i} out of range for {ctx}"
                )));
            }
            bits.set(i, true);
        }
        Ok(Minmatrix {
            ctx: ctx.clone(),
            bits,
        })
    }

    pub fn from_bitset(ctx: &Context, bits: Bitset) -> Minmatrix {
        assert_eq!(bits.len(), ctx.minterm_count());
        Minmatrix {
            ctx: ctx.clone(),
            bits,
        }
    }

    pub fn context(&self) -> &Context {
        &self.ctx
    }

    pub fn bits(&self) -> &Bitset {
        &self.bits
    }

    pub fn count(&self) -> u64 {
        self.bits.count_ones()
    }

    pub fn contains(&self, idx: u64) -> bool {
        self.bits.get(idx)
    }

    pub fn indices(&self) -> Vec<u64> {
        self.bits.iter_ones().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.bits.is_full()
    }

    fn check_ctx(&self, other: &Minmatrix) {
        assert_eq!(
            self.ctx, other.ctx,
            "minmatrix operation across distinct contexts"
        );
    }

    pub fn union(&self, other: &Minmatrix) -> Minmatrix {
        self.check_ctx(other);
        Minmatrix {
            ctx: self.ctx.clone(),
            bits: self.bits.union(&other.bits),
        }
    }

    pub fn intersect(&self, other: &Minmatrix) -> Minmatrix {
        self.check_ctx(other);
        Minmatrix {
            ctx: self.ctx.clone(),
            bits: self.bits.intersect(&other.bits),
        }
    }

    pub fn complement(&self) -> Minmatrix {
        Minmatrix {
            ctx: self.ctx.clone(),
            bits: self.bits.complement(),
        }
    }

    pub fn is_subset(&self, other: &Minmatrix) -> bool {
        self.check_ctx(other);
        self.bits.is_subset(&other.bits)
    }

    /// Canonical rank: the bitset read as an unsigned integer.
    pub fn rank(&self) -> u64 {
        self.bits.as_u64()
    }

    /// Sum-of-minterms formula for this minmatrix.
    pub fn formula(&self) -> Formula {
        if self.is_empty() {
            return Formula::Const0;
        }
        if self.is_full() {
            return Formula::Const1;
        }
        let mut sum: Option<Formula> = None;
        for idx in self.bits.iter_ones() {
            let m = self.ctx.minterm_formula(idx);
            sum = Some(match sum {
                None => m,
                Some(acc) => Formula::or(acc, m),
            });
        }
        sum.unwrap()
    }

    /// Union of all level-`to.d()` descendants of this minmatrix's minterms.
    pub fn promote(&self, to: &Context) -> Result<Minmatrix, Error> {
        if to.v() != self.ctx.v() {
            return Err(Error::ContextMismatch(format!("{} vs {to}", self.ctx)));
        }
        if to.d() < self.ctx.d() {
            return Err(Error::Domain(format!(
                "cannot promote {} down to {to}",
                self.ctx
            )));
        }
        let mut bits = self.bits.clone();
        for k in self.ctx.d() + 1..=to.d() {
            let n = to.minterm_count_at(k);
            let mut next = Bitset::empty(n);
            for idx in 0..n {
                if bits.get(to.data.ancestor_at(k, idx)) {
                    next.set(idx, true);
                }
            }
            bits = next;
        }
        Ok(Minmatrix {
            ctx: to.clone(),
            bits,
        })
    }

    /// Canonical text form: index list up to 4096 minterms, hex beyond.
    pub fn to_text(&self) -> String {
        self.render(self.count() <= 4096)
    }

    pub fn to_text_hex(&self) -> String {
        self.render(false)
    }

    fn render(&self, as_indices: bool) -> String {
        let mut out = format!(
            "ctx v={} d={}\ncount={}\n",
            self.ctx.v(),
            self.ctx.d(),
            self.count()
        );
        if as_indices {
            for idx in self.bits.iter_ones() {
                out.push_str(&idx.to_string());
                out.push('\n');
            }
        } else {
            out.push_str("hex=");
            out.push_str(&self.bits.to_hex());
            out.push('\n');
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Minmatrix, Error> {
        Minmatrix::parse_text_with_capacity(text, DEFAULT_CAPACITY)
    }

    pub fn parse_text_with_capacity(text: &str, capacity: u64) -> Result<Minmatrix, Error> {
        let bad = |msg: &str| Error::Domain(format!("bad minmatrix text: {msg}"));
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| bad("missing header"))?;
        let rest = header
            .strip_prefix("ctx v=")
            .ok_or_else(|| bad("expected 'ctx v=<v> d=<d>'"))?;
        let (v_str, d_str) = rest
            .split_once(" d=")
            .ok_or_else(|| bad("expected 'ctx v=<v> d=<d>'"))?;
        let v: u32 = v_str.parse().map_err(|_| bad("bad v"))?;
        let d: u32 = d_str.parse().map_err(|_| bad("bad d"))?;
        let ctx = Context::with_capacity(v, d, capacity)?;
        let count_line = lines.next().ok_or_else(|| bad("missing count"))?;
        let count: u64 = count_line
            .strip_prefix("count=")
            .ok_or_else(|| bad("expected 'count=<n>'"))?
            .parse()
            .map_err(|_| bad("bad count"))?;
        let mut bits = Bitset::empty(ctx.minterm_count());
        let mut first = true;
        for line in lines {
            if first {
                first = false;
                if let Some(hex) = line.strip_prefix("hex=") {
                    bits = Bitset::from_hex(ctx.minterm_count(), hex)
                        .ok_or_else(|| bad("bad hex payload"))?;
                    if bits.count_ones() != count {
                        return Err(bad("count does not match hex payload"));
                    }
                    return Ok(Minmatrix { ctx, bits });
                }
            }
            let idx: u64 = line.parse().map_err(|_| bad("bad minterm index"))?;
            if idx >= ctx.minterm_count() {
                return Err(bad(&format!("index {idx} out of range")));
            }
            bits.set(idx, true);
        }
        if bits.count_ones() != count {
            return Err(bad("count does not match index list"));
        }
        Ok(Minmatrix { ctx, bits })
    }
}
