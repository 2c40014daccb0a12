//! Characteristic-minmatrix machinery.
//!
//! Primary labels classify minterms by the states of `<>1` and `<>0`; the
//! degree-1 zero-variable context has exactly four minterms W, D, C, V and its
//! sixteen systems form a four-cube lattice on which the prime replacements
//! act. A minmatrix can be a CMM only if it is a union of complete prime
//! orbits and immune to every level-0 substitution; both conditions are
//! computable here. The normal-logic matrices (T, S4, B, S5) are embedded as
//! fixtures since deriving them needs Kripke models outside this calculus.

use crate::bits::Bitset;
use crate::context::{Context, Minmatrix, Minterm};
use crate::formula::Formula;
use crate::perm::Permutation;
use crate::replace::UniformReplacement;
use crate::subst;
use crate::subst::Substitution;
use crate::Error;

/// The `(<>1, <>0)` state pair of a minterm: W=(1,1), D=(1,0), C=(0,1),
/// V=(0,0).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum PrimaryLabel {
    W,
    D,
    C,
    V,
}

impl PrimaryLabel {
    pub fn of(mu: &Minterm) -> Result<PrimaryLabel, Error> {
        let ctx = mu.context();
        if ctx.d() == 0 {
            return Err(Error::Domain(
                "primary labels need a context of degree at least 1".into(),
            ));
        }
        let top = mu.state(ctx.top_factor_rank());
        let bottom = mu.state(0);
        Ok(match (top, bottom) {
            (true, true) => PrimaryLabel::W,
            (true, false) => PrimaryLabel::D,
            (false, true) => PrimaryLabel::C,
            (false, false) => PrimaryLabel::V,
        })
    }

    pub fn letter(&self) -> char {
        match self {
            PrimaryLabel::W => 'W',
            PrimaryLabel::D => 'D',
            PrimaryLabel::C => 'C',
            PrimaryLabel::V => 'V',
        }
    }

    /// The E[0,1] minterm index carrying this label.
    pub fn e01_minterm(&self) -> u64 {
        match self {
            PrimaryLabel::W => 3,
            PrimaryLabel::D => 2,
            PrimaryLabel::C => 1,
            PrimaryLabel::V => 0,
        }
    }

    pub fn from_e01_minterm(idx: u64) -> PrimaryLabel {
        match idx {
            3 => PrimaryLabel::W,
            2 => PrimaryLabel::D,
            1 => PrimaryLabel::C,
            0 => PrimaryLabel::V,
            _ => panic!("E[0,1] has four minterms"),
        }
    }
}

impl std::fmt::Display for PrimaryLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// A minmatrix with its CMM necessary-condition flags.
#[derive(Clone, Debug)]
pub struct CmmCandidate {
    pub minmatrix: Minmatrix,
    /// Union of complete prime orbits.
    pub orbit_complete: bool,
    /// No level-0 substitution collapses it.
    pub immune: bool,
    /// A collapsing substitution when one exists.
    pub witness: Option<Substitution>,
}

pub fn candidate_check(m: &Minmatrix) -> Result<CmmCandidate, Error> {
    let orbits = subst::orbits(m.context())?;
    let witness = subst::find_collapsing_substitution(m)?;
    Ok(CmmCandidate {
        orbit_complete: orbits.is_union_of_orbits(m),
        immune: witness.is_none(),
        witness,
        minmatrix: m.clone(),
    })
}

/// Join of CMMs is plain set union.
pub fn lattice_join(a: &Minmatrix, b: &Minmatrix) -> Result<Minmatrix, Error> {
    if a.context() != b.context() {
        return Err(Error::ContextMismatch(format!(
            "{} vs {}",
            a.context(),
            b.context()
        )));
    }
    Ok(a.union(b))
}

/// Set intersection, an upper bound on the true CMM meet (the meet may be
/// strictly smaller when the combined axioms prove more).
pub fn lattice_meet_bound(a: &Minmatrix, b: &Minmatrix) -> Result<Minmatrix, Error> {
    if a.context() != b.context() {
        return Err(Error::ContextMismatch(format!(
            "{} vs {}",
            a.context(),
            b.context()
        )));
    }
    Ok(a.intersect(b))
}

/// One of the sixteen degree-1 zero-variable systems: a subset of the atoms
/// `{W, D, C, V}` with its minmatrix.
#[derive(Clone, Debug)]
pub struct Figure1System {
    /// Bit `i` set means E[0,1] minterm `i` belongs to the system.
    pub mask: u8,
    pub name: String,
    pub minmatrix: Minmatrix,
}

#[derive(Clone, Debug)]
pub struct Figure1 {
    pub systems: Vec<Figure1System>,
    /// Cover pairs `(lower, upper)` by position in `systems`.
    pub edges: Vec<(usize, usize)>,
}

fn system_name(mask: u8) -> String {
    match mask {
        0 => "F".into(),
        0b1111 => "E".into(),
        _ => {
            let mut parts = Vec::new();
            for idx in (0..4).rev() {
                if mask >> idx & 1 == 1 {
                    parts.push(PrimaryLabel::from_e01_minterm(idx).letter().to_string());
                }
            }
            parts.join("+")
        }
    }
}

/// All sixteen E[0,1] systems with their Hasse diagram.
pub fn figure1_lattice() -> Result<Figure1, Error> {
    let ctx = Context::new(0, 1)?;
    let systems = (0..16u8)
        .map(|mask| {
            let minmatrix = Minmatrix::from_bitset(&ctx, Bitset::from_u64(4, mask as u64));
            Figure1System {
                mask,
                name: system_name(mask),
                minmatrix,
            }
        })
        .collect::<Vec<_>>();
    let mut edges = Vec::new();
    for lower in 0..16usize {
        for upper in 0..16usize {
            let (l, u) = (lower as u8, upper as u8);
            if l & u == l && (l ^ u).count_ones() == 1 {
                edges.push((lower, upper));
            }
        }
    }
    Ok(Figure1 { systems, edges })
}

impl Figure1 {
    pub fn atoms(&self) -> Vec<&Figure1System> {
        self.systems
            .iter()
            .filter(|s| s.mask.count_ones() == 1)
            .collect()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph figure1 {\n  rankdir=BT;\n  node [shape=box];\n");
        for s in &self.systems {
            out.push_str(&format!("  n{} [label=\"{}\"];\n", s.mask, s.name));
        }
        for &(lower, upper) in &self.edges {
            out.push_str(&format!(
                "  n{} -> n{};\n",
                self.systems[lower].mask, self.systems[upper].mask
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// The permutation of the sixteen systems induced by a prime replacement;
/// positions follow [`figure1_lattice`] order (the subset mask).
pub fn ur_lattice_action(ur: &UniformReplacement) -> Result<Permutation, Error> {
    let ctx = Context::new(0, 1)?;
    let perm = ur.minterm_permutation(&ctx)?;
    let map = (0..16u64)
        .map(|mask| {
            let mut image = 0u64;
            for idx in 0..4 {
                if mask >> idx & 1 == 1 {
                    image |= 1 << perm.apply(idx);
                }
            }
            image
        })
        .collect();
    Permutation::from_vec(map)
        .ok_or_else(|| Error::Domain("system action is not a permutation".into()))
}

/// An embedded normal-logic minmatrix: retained factor rows and the column
/// bit patterns (row 0 is the most significant bit).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KMatrix {
    pub name: &'static str,
    pub rows: &'static [&'static str],
    pub columns: Vec<u8>,
}

impl KMatrix {
    pub fn column_set(&self) -> std::collections::BTreeSet<u8> {
        self.columns.iter().copied().collect()
    }

    pub fn intersect(&self, other: &KMatrix, name: &'static str) -> KMatrix {
        assert_eq!(self.rows, other.rows, "row sets differ");
        let theirs = other.column_set();
        KMatrix {
            name,
            rows: self.rows,
            columns: self
                .columns
                .iter()
                .copied()
                .filter(|c| theirs.contains(c))
                .collect(),
        }
    }

    pub fn is_subset(&self, other: &KMatrix) -> bool {
        let theirs = other.column_set();
        self.columns.iter().all(|c| theirs.contains(c))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\nrows={}\ncount={}\n", self.name, self.rows.join(","), self.columns.len());
        let width = self.rows.iter().map(|r| r.len()).max().unwrap_or(0);
        for (i, row) in self.rows.iter().enumerate() {
            let bit = self.rows.len() - 1 - i;
            let states: Vec<String> = self
                .columns
                .iter()
                .map(|c| ((c >> bit) & 1).to_string())
                .collect();
            out.push_str(&format!("{row:width$}  {}\n", states.join(" ")));
        }
        out
    }
}

const K12_ROWS: &[&str] = &[
    "p1",
    "<>(p1 & <>p1 & <>!p1)",
    "<>(p1 & <>p1 & !<>!p1)",
    "<>(!p1 & <>p1 & <>!p1)",
    "<>(!p1 & !<>p1 & <>!p1)",
];

const K11_ROWS: &[&str] = &["p1", "<>p1", "<>!p1"];

/// The four embedded fixtures: T in K[1,1], and S4, B, S5 in K[1,2] with the
/// four always-0 factor rows of extensions of T omitted.
#[derive(Clone, Debug)]
pub struct KFixtures {
    pub t: KMatrix,
    pub s4: KMatrix,
    pub b: KMatrix,
    pub s5: KMatrix,
}

pub fn k_fixtures() -> KFixtures {
    KFixtures {
        t: KMatrix {
            name: "T",
            rows: K11_ROWS,
            columns: vec![0b111, 0b110, 0b011, 0b001],
        },
        s4: KMatrix {
            name: "S4",
            rows: K12_ROWS,
            columns: vec![31, 30, 29, 27, 26, 25, 20, 15, 14, 11, 10, 7, 6, 1],
        },
        b: KMatrix {
            name: "B",
            rows: K12_ROWS,
            columns: vec![31, 28, 26, 20, 11, 10, 3, 1],
        },
        s5: KMatrix {
            name: "S5",
            rows: K12_ROWS,
            columns: vec![26, 20, 10, 1],
        },
    }
}

#[derive(Clone, Debug)]
pub struct KCollapseReport {
    pub fixtures: KFixtures,
    pub b4: KMatrix,
    pub s5_in_b4: bool,
    pub strict: bool,
}

/// The worked intersection-collapse example: B4 = S4 ∩ B keeps 6 columns but
/// is not the S5 matrix, which sits strictly inside it.
pub fn k_collapse_demo() -> KCollapseReport {
    let fixtures = k_fixtures();
    let b4 = fixtures.s4.intersect(&fixtures.b, "B4");
    let s5_in_b4 = fixtures.s5.is_subset(&b4);
    let strict = s5_in_b4 && fixtures.s5.columns.len() < b4.columns.len();
    KCollapseReport {
        fixtures,
        b4,
        s5_in_b4,
        strict,
    }
}

impl KCollapseReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.fixtures.t.to_text());
        out.push('\n');
        out.push_str(&self.fixtures.s4.to_text());
        out.push('\n');
        out.push_str(&self.fixtures.b.to_text());
        out.push('\n');
        out.push_str(&self.b4.to_text());
        out.push('\n');
        out.push_str(&self.fixtures.s5.to_text());
        out.push('\n');
        out.push_str(&format!(
            "|S4|={} |B|={} |B4|={} |S5|={}\n",
            self.fixtures.s4.columns.len(),
            self.fixtures.b.columns.len(),
            self.b4.columns.len(),
            self.fixtures.s5.columns.len()
        ));
        out.push_str(&format!(
            "S5 subset of B4: {} (strict: {})\n",
            self.s5_in_b4, self.strict
        ));
        out.push_str("B4 collapses to S5, so B4 is no CMM despite its complete orbits\n");
        out
    }
}

/// The E[2,1] CMM of the normal system K: the `<>0` state is pinned to 0, the
/// six factors `p`, `q` and the diamonds of the four level-0 minterms range
/// freely, and every other `<>theta` state is the OR of the minterm diamonds
/// inside `theta` (modal additivity).
pub fn normal_k_cmm_e21() -> Result<Minmatrix, Error> {
    let ctx = Context::new(2, 1)?;
    let factor_count = ctx.factor_count();
    debug_assert_eq!(factor_count, 16);
    let mut indices = Vec::with_capacity(64);
    for prefix in 0..4u64 {
        for minterm_dias in 0..16u64 {
            let mut states = 0u64;
            for r in 1..factor_count {
                if r & minterm_dias != 0 {
                    states |= 1 << r;
                }
            }
            indices.push((prefix << factor_count) | states);
        }
    }
    Minmatrix::from_indices(&ctx, indices)
}

/// Intersection of all level-0 substitution instances of a formula: the part
/// of an axiom's CMM forced by US alone.
pub fn us_closure_intersection(ctx: &Context, f: &Formula) -> Result<Minmatrix, Error> {
    let mut out = Minmatrix::full(ctx);
    for sigma in subst::enumerate_all(ctx.v())? {
        out = out.intersect(&ctx.normalize(&sigma.apply(f))?);
    }
    Ok(out)
}

/// The four co-atom axioms `<>p`, `<>p <-> p`, `<>p <-> !p`, `!<>p` with the
/// US-forced parts of their E[1,1] CMMs and the necessary-condition flags.
pub fn coatom_demo() -> Result<Vec<(Formula, CmmCandidate)>, Error> {
    let ctx = Context::new(1, 1)?;
    ["<>p1", "<>p1 <-> p1", "<>p1 <-> !p1", "!<>p1"]
        .iter()
        .map(|s| {
            let f = crate::formula::parse(s)?;
            let m = us_closure_intersection(&ctx, &f)?;
            Ok((f, candidate_check(&m)?))
        })
        .collect()
}
