//! Neighborhood witness models.
//!
//! For a context E[v,d] the model has one world per minterm of every level
//! 0..=d. Neighborhoods are kept as a complement: each world stores the
//! finite family of sets it *excludes* from the powerset of worlds, and
//! `V(w, <>phi) = 1` iff `W \ X(phi)` belongs to that family. Level-0 worlds
//! exclude nothing; a world at level k excludes `W \ X(phi)` for every factor
//! `<>phi` whose state in its minterm is 1 (the states of promoted factors
//! repeat the ancestors' exclusions, and promotion preserves X). In the
//! resulting model every minterm is valid exactly at the worlds below it in
//! the ancestry forest plus the ancestors it is the special descendant of.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::bits::Bitset;
use crate::context::{Context, Minterm};
use crate::formula::Formula;
use crate::Error;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct WorldId {
    pub level: u32,
    pub index: u64,
}

pub struct WitnessModel {
    ctx: Context,
    /// Context of each level (shared capacity).
    level_ctx: Vec<Context>,
    /// Linear world id = level_offsets[level] + minterm index.
    level_offsets: Vec<u64>,
    world_count: u64,
    /// Per world, the sorted canonical ids of its excluded neighborhoods; a
    /// canonical id is a level-(d-1) formula rank.
    excluded: Vec<Vec<u64>>,
    /// Target X set (worlds satisfying the formula) per level-(d-1) rank.
    x_target: Vec<Bitset>,
    /// X sets computed through model_check, keyed by canonical rank.
    x_memo: Mutex<HashMap<u64, Bitset>>,
}

/// Builds the model level by level and verifies the two construction
/// invariants: distinct formulas get distinct X sets within each level (C1)
/// and X sets coincide across levels exactly for promotion pairs (C2).
pub fn build_model(ctx: &Context) -> Result<WitnessModel, Error> {
    let d = ctx.d();
    let level_ctx: Vec<Context> = (0..=d).map(|k| ctx.at_level(k)).collect();
    let mut level_offsets = Vec::with_capacity(d as usize + 1);
    let mut world_count = 0u64;
    for k in 0..=d {
        level_offsets.push(world_count);
        world_count = world_count
            .checked_add(ctx.minterm_count_at(k))
            .filter(|&c| c <= ctx.capacity())
            .ok_or_else(|| Error::CapacityExceeded {
                v: ctx.v(),
                d,
                detail: "world count exceeds the capacity bound".into(),
            })?;
    }

    // the minterm of each level valid at each world: the ancestor for worlds
    // at or below, the special descendant for ancestor worlds
    let valid_minterm = |w_level: u32, w_index: u64, level: u32| -> u64 {
        if w_level >= level {
            level_ctx[w_level as usize].ancestor_index(level, w_index)
        } else {
            Minterm::new(&level_ctx[w_level as usize], w_index)
                .expect("world index in range")
                .special_descendant(&level_ctx[level as usize])
                .expect("higher level in range")
                .index()
        }
    };

    // X sets for every formula of every level below d, via minterm X sets
    let mut x_by_level: Vec<Vec<Bitset>> = Vec::new();
    for level in 0..d {
        let minterm_count = ctx.minterm_count_at(level);
        let mut x_minterm = vec![Bitset::empty(world_count); minterm_count as usize];
        for k in 0..=d {
            for idx in 0..ctx.minterm_count_at(k) {
                let valid = valid_minterm(k, idx, level);
                x_minterm[valid as usize].set(level_offsets[k as usize] + idx, true);
            }
        }
        let formula_count = 1u64 << minterm_count;
        let mut x_formula = Vec::with_capacity(formula_count as usize);
        for rank in 0..formula_count {
            let mut x = Bitset::empty(world_count);
            for (mu, set) in x_minterm.iter().enumerate() {
                if (rank >> mu) & 1 == 1 {
                    x = x.union(set);
                }
            }
            x_formula.push(x);
        }
        x_by_level.push(x_formula);
    }

    // C1: distinct same-level formulas have distinct X sets
    for (level, sets) in x_by_level.iter().enumerate() {
        for a in 0..sets.len() {
            for b in 0..a {
                if sets[a] == sets[b] {
                    return Err(Error::Domain(format!(
                        "C1 violated at level {level}: formulas {a} and {b} share an X set"
                    )));
                }
            }
        }
    }
    // C2: across levels, X sets agree exactly on promotion pairs
    for low in 0..d.saturating_sub(1) {
        for high in low + 1..d {
            let promoted: Vec<u64> = (0..x_by_level[low as usize].len() as u64)
                .map(|r| ctx.promote_rank(low, high, r))
                .collect();
            for (r, x_low) in x_by_level[low as usize].iter().enumerate() {
                if x_low != &x_by_level[high as usize][promoted[r] as usize] {
                    return Err(Error::Domain(format!(
                        "C2 violated: level {low} formula {r} disagrees with its promotion"
                    )));
                }
            }
            for (f, x_high) in x_by_level[high as usize].iter().enumerate() {
                let is_promotion = promoted.contains(&(f as u64));
                let clashes = x_by_level[low as usize].iter().any(|x| x == x_high);
                if clashes != is_promotion {
                    return Err(Error::Domain(format!(
                        "C2 violated: level {high} formula {f} X-matches a non-promotion"
                    )));
                }
            }
        }
    }

    // excluded neighborhoods, canonicalized to level-(d-1) ranks
    let mut excluded = vec![Vec::new(); world_count as usize];
    for k in 1..=d {
        let factor_count = ctx.factor_count_at(k);
        for idx in 0..ctx.minterm_count_at(k) {
            let mut ids = Vec::new();
            for r in 0..factor_count {
                if (idx >> r) & 1 == 1 {
                    ids.push(ctx.promote_rank(k - 1, d - 1, r));
                }
            }
            ids.sort_unstable();
            excluded[(level_offsets[k as usize] + idx) as usize] = ids;
        }
    }

    let x_target = if d > 0 {
        x_by_level.pop().expect("level d-1 exists")
    } else {
        Vec::new()
    };
    Ok(WitnessModel {
        ctx: ctx.clone(),
        level_ctx,
        level_offsets,
        world_count,
        excluded,
        x_target,
        x_memo: Mutex::new(HashMap::new()),
    })
}

impl WitnessModel {
    pub fn context(&self) -> &Context {
        &self.ctx
    }

    pub fn world_count(&self) -> u64 {
        self.world_count
    }

    pub fn worlds(&self) -> impl Iterator<Item = WorldId> + '_ {
        (0..=self.ctx.d()).flat_map(move |level| {
            (0..self.ctx.minterm_count_at(level)).map(move |index| WorldId { level, index })
        })
    }

    pub fn linear_id(&self, w: WorldId) -> u64 {
        self.level_offsets[w.level as usize] + w.index
    }

    /// Canonical ids of the neighborhoods excluded at a world.
    pub fn excluded_ids(&self, w: WorldId) -> &[u64] {
        &self.excluded[self.linear_id(w) as usize]
    }

    /// Target X set of the level-(d-1) formula with the given rank.
    pub fn x_target(&self, rank: u64) -> &Bitset {
        &self.x_target[rank as usize]
    }

    fn var_value(&self, w: WorldId, i: u32) -> bool {
        let prefix = w.index >> self.ctx.factor_count_at(w.level);
        (prefix >> (self.ctx.v() - i)) & 1 == 1
    }

    /// X computed through the model itself: the worlds where `check` accepts
    /// the canonical formula of the rank.
    fn x_model(&self, rank: u64) -> Result<Bitset, Error> {
        if let Some(x) = self.x_memo.lock().expect("memo").get(&rank) {
            return Ok(x.clone());
        }
        let formula = self
            .level_ctx[self.ctx.d() as usize - 1]
            .rank_formula(rank);
        let mut x = Bitset::empty(self.world_count);
        for w in self.worlds() {
            if self.check(w, &formula)? {
                x.set(self.linear_id(w), true);
            }
        }
        self.x_memo.lock().expect("memo").insert(rank, x.clone());
        Ok(x)
    }

    /// Recursive valuation. `<>phi` holds iff the complement of phi's
    /// model-computed X set is one of the world's excluded neighborhoods,
    /// i.e. iff that X set equals the target X of some excluded id.
    pub fn check(&self, w: WorldId, f: &Formula) -> Result<bool, Error> {
        if f.max_var() > self.ctx.v() || f.modal_degree() > self.ctx.d() {
            return Err(Error::Domain(format!(
                "formula {f} exceeds context {}",
                self.ctx
            )));
        }
        Ok(match f {
            Formula::Const0 => false,
            Formula::Const1 => true,
            Formula::Var(i) => self.var_value(w, *i),
            Formula::Not(g) => !self.check(w, g)?,
            Formula::And(a, b) => self.check(w, a)? && self.check(w, b)?,
            Formula::Or(a, b) => self.check(w, a)? || self.check(w, b)?,
            Formula::Imp(a, b) => !self.check(w, a)? || self.check(w, b)?,
            Formula::Iff(a, b) => self.check(w, a)? == self.check(w, b)?,
            Formula::Dia(g) => {
                let rank = self.canonical_rank(g)?;
                let x = self.x_model(rank)?;
                self.excluded_ids(w)
                    .iter()
                    .any(|&id| self.x_target[id as usize] == x)
            }
            Formula::Nec(g) => {
                let rank = self.canonical_rank(&Formula::not((**g).clone()))?;
                let x = self.x_model(rank)?;
                !self
                    .excluded_ids(w)
                    .iter()
                    .any(|&id| self.x_target[id as usize] == x)
            }
        })
    }

    fn canonical_rank(&self, g: &Formula) -> Result<u64, Error> {
        let d = self.ctx.d();
        if d == 0 {
            return Err(Error::Domain(
                "modal operators need a context of degree at least 1".into(),
            ));
        }
        Ok(self.level_ctx[d as usize - 1].normalize(g)?.rank())
    }

    /// Values of every level-d modal factor at a world, as a state word.
    /// Computed through the same neighborhood test as `check`.
    pub fn factor_values(&self, w: WorldId) -> Result<u64, Error> {
        let mut word = 0u64;
        for rank in 0..self.ctx.factor_count() {
            let x = self.x_model(rank)?;
            let holds = self
                .excluded_ids(w)
                .iter()
                .any(|&id| self.x_target[id as usize] == x);
            if holds {
                word |= 1 << rank;
            }
        }
        Ok(word)
    }

    /// Whether the top-level minterm with the given index is valid at `w`,
    /// through real factor evaluations.
    pub fn minterm_valid(&self, w: WorldId, minterm: u64) -> Result<bool, Error> {
        let factor_count = self.ctx.factor_count();
        let states = minterm & ((1 << factor_count) - 1);
        if self.factor_values(w)? != states {
            return Ok(false);
        }
        let prefix = minterm >> factor_count;
        for i in 1..=self.ctx.v() {
            if self.var_value(w, i) != ((prefix >> (self.ctx.v() - i)) & 1 == 1) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Dump format: one header line per world naming its excluded sets, then
    /// each distinct excluded set once, as a sorted linear world-id list.
    /// Every excluded set is the complement of some formula's X set, so there
    /// are at most `factor_count` of them model-wide.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut used: Vec<bool> = vec![false; self.x_target.len()];
        for w in self.worlds() {
            let prefix = w.index >> self.ctx.factor_count_at(w.level);
            let mut vars = String::new();
            for i in 1..=self.ctx.v() {
                vars.push(if (prefix >> (self.ctx.v() - i)) & 1 == 1 {
                    '1'
                } else {
                    '0'
                });
            }
            if vars.is_empty() {
                vars.push('-');
            }
            let ids = self.excluded_ids(w);
            let refs: Vec<String> = ids.iter().map(|id| format!("X{id}")).collect();
            for &id in ids {
                used[id as usize] = true;
            }
            out.push_str(&format!(
                "world L{}#{}: vars={} excluded={} sets{}{}\n",
                w.level,
                w.index,
                vars,
                ids.len(),
                if ids.is_empty() { "" } else { ": " },
                refs.join(" ")
            ));
        }
        for (id, used) in used.iter().enumerate() {
            if !used {
                continue;
            }
            let set = self.x_target[id].complement();
            let members: Vec<String> = set.iter_ones().map(|i| i.to_string()).collect();
            out.push_str(&format!("set X{id} = {{{}}}\n", members.join(",")));
        }
        out
    }
}
