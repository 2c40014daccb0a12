//! Acceptance suite: one test per criterion, each printing a pass line with
//! its elapsed time and asserting the stated runtime budget.
//!
//! Golden tables are pinned by defining formula, not by row position, so any
//! renumbering of the fixed row order cannot silently shift expectations.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use modlat::cmm::{self, PrimaryLabel};
use modlat::context::{Context, Minmatrix, Minterm};
use modlat::formula::{parse, Formula};
use modlat::replace::{self, ExtendedUr, UniformReplacement};
use modlat::subst::{self, Substitution};
use modlat::witness;

fn e(v: u32, d: u32) -> Context {
    Context::new(v, d).unwrap()
}

fn finish(criterion: &str, started: Instant, budget: Duration) {
    let elapsed = started.elapsed();
    println!("criterion {criterion}: PASS ({elapsed:?})");
    assert!(
        elapsed < budget,
        "criterion {criterion} exceeded its {budget:?} budget: {elapsed:?}"
    );
}

/// Golden rows: defining formula, images of (W,D,C,V), inverse's formula.
const TABLE2: [(&str, [PrimaryLabel; 4], &str); 24] = {
    use PrimaryLabel::{C, D, V, W};
    [
        ("<>p1", [W, D, C, V], "<>p1"),
        ("<>p1 <-> p1", [D, W, V, C], "<>p1 <-> p1"),
        ("<>p1 <-> p1 + <>!p1", [W, D, V, C], "<>p1 <-> p1 + <>!p1"),
        ("<>p1 <-> p1 + !<>!p1", [D, W, C, V], "<>p1 <-> p1 + !<>!p1"),
        ("<>p1 <-> !p1 + <>!p1", [W, V, C, D], "<>p1 <-> !p1 + <>!p1"),
        ("<>p1 <-> !p1 + !<>!p1", [C, D, W, V], "<>p1 <-> !p1 + !<>!p1"),
        ("!<>p1", [V, C, D, W], "!<>p1"),
        ("!<>p1 <-> p1", [C, V, W, D], "!<>p1 <-> p1"),
        ("!<>p1 <-> p1 + <>!p1", [C, V, D, W], "!<>p1 <-> p1 + !<>!p1"),
        ("!<>p1 <-> p1 + !<>!p1", [V, C, W, D], "!<>p1 <-> p1 + <>!p1"),
        ("!<>p1 <-> !p1 + <>!p1", [D, C, V, W], "!<>p1 <-> !p1 + !<>!p1"),
        ("!<>p1 <-> !p1 + !<>!p1", [V, W, D, C], "!<>p1 <-> !p1 + <>!p1"),
        ("<>!p1", [W, C, D, V], "<>!p1"),
        ("<>!p1 <-> p1", [C, W, V, D], "!<>!p1 <-> p1"),
        ("<>!p1 <-> p1 + <>p1", [W, C, V, D], "<>!p1 <-> !p1 + <>p1"),
        ("<>!p1 <-> p1 + !<>p1", [C, W, D, V], "<>!p1 <-> !p1 + !<>p1"),
        ("<>!p1 <-> !p1 + <>p1", [W, V, D, C], "<>!p1 <-> p1 + <>p1"),
        ("<>!p1 <-> !p1 + !<>p1", [D, C, W, V], "<>!p1 <-> p1 + !<>p1"),
        ("!<>!p1", [V, D, C, W], "!<>!p1"),
        ("!<>!p1 <-> p1", [D, V, W, C], "<>!p1 <-> p1"),
        ("!<>!p1 <-> p1 + <>p1", [D, V, C, W], "!<>!p1 <-> !p1 + !<>p1"),
        ("!<>!p1 <-> p1 + !<>p1", [V, D, W, C], "!<>!p1 <-> !p1 + <>p1"),
        ("!<>!p1 <-> !p1 + <>p1", [C, D, V, W], "!<>!p1 <-> p1 + !<>p1"),
        ("!<>!p1 <-> !p1 + !<>p1", [V, W, C, D], "!<>!p1 <-> p1 + <>p1"),
    ]
};

/// Golden complemental products per prime, keyed by defining formula; cells
/// in the order `r(e)r(!e), r(e)!r(!e), !r(e)r(!e), !r(e)!r(!e)`.
const TABLE3: [(&str, [&str; 4]); 24] = [
    (
        "<>p1",
        [
            "<>p1 & <>!p1",
            "<>p1 & !<>!p1",
            "!<>p1 & <>!p1",
            "!<>p1 & !<>!p1",
        ],
    ),
    (
        "<>p1 <-> p1",
        [
            "p1 & <>p1 & !<>!p1 + !p1 & !<>p1 & <>!p1",
            "p1 & <>p1 & <>!p1 + !p1 & !<>p1 & !<>!p1",
            "p1 & !<>p1 & !<>!p1 + !p1 & <>p1 & <>!p1",
            "p1 & !<>p1 & <>!p1 + !p1 & <>p1 & !<>!p1",
        ],
    ),
    (
        "<>p1 <-> p1 + <>!p1",
        [
            "<>p1 & <>!p1",
            "p1 & <>p1 & !<>!p1 + !p1 & !<>p1 & !<>!p1",
            "p1 & !<>p1 & !<>!p1 + !p1 & !<>p1 & <>!p1",
            "p1 & !<>p1 & <>!p1 + !p1 & <>p1 & !<>!p1",
        ],
    ),
    (
        "<>p1 <-> p1 + !<>!p1",
        [
            "p1 & <>p1 & !<>!p1 + !p1 & !<>p1 & <>!p1",
            "p1 & <>p1 & <>!p1 + !p1 & <>p1 & !<>!p1",
            "p1 & !<>p1 & <>!p1 + !p1 & <>p1 & <>!p1",
            "!<>p1 & !<>!p1",
        ],
    ),
    (
        "<>p1 <-> !p1 + <>!p1",
        [
            "<>p1 & <>!p1",
            "p1 & !<>p1 & !<>!p1 + !p1 & <>p1 & !<>!p1",
            "p1 & !<>p1 & <>!p1 + !p1 & !<>p1 & !<>!p1",
            "p1 & <>p1 & !<>!p1 + !p1 & !<>p1 & <>!p1",
        ],
    ),
    (
        "<>p1 <-> !p1 + !<>!p1",
        [
            "p1 & !<>p1 & <>!p1 + !p1 & <>p1 & !<>!p1",
            "p1 & <>p1 & !<>!p1 + !p1 & <>p1 & <>!p1",
            "p1 & <>p1 & <>!p1 + !p1 & !<>p1 & <>!p1",
            "!<>p1 & !<>!p1",
        ],
    ),
    (
        "!<>p1",
        [
            "!<>p1 & !<>!p1",
            "!<>p1 & <>!p1",
            "<>p1 & !<>!p1",
            "<>p1 & <>!p1",
        ],
    ),
    (
        "!<>p1 <-> p1",
        [
            "p1 & !<>p1 & <>!p1 + !p1 & <>p1 & !<>!p1",
            "p1 & !<>p1 & !<>!p1 + !p1 & <>p1 & <>!p1",
            "p1 & <>p1 & <>!p1 + !p1 & !<>p1 & !<>!p1",
            "p1 & <>p1 & !<>!p1 + !p1 & !<>p1 & <>!p1",
        ],
    ),
    (
        "!<>p1 <-> p1 + <>!p1",
        [
            "p1 & !<>p1 & <>!p1 + !p1 & <>p1 & !<>!p1",
            "p1 & !<>p1 & !<>!p1 + !p1 & !<>p1 & <>!p1",
            "p1 & <>p1 & !<>!p1 + !p1 & !<>p1 & !<>!p1",
            "<>p1 & <>!p1",
        ],
    ),
    (
        "!<>p1 <-> p1 + !<>!p1",
        [
            "!<>p1 & !<>!p1",
            "p1 & !<>p1 & <>!p1 + !p1 & <>p1 & <>!p1",
            "p1 & <>p1 & <>!p1 + !p1 & <>p1 & !<>!p1",
            "p1 & <>p1 & !<>!p1 + !p1 & !<>p1 & <>!p1",
        ],
    ),
    (
        "!<>p1 <-> !p1 + <>!p1",
        [
            "p1 & <>p1 & !<>!p1 + !p1 & !<>p1 & <>!p1",
            "p1 & !<>p1 & <>!p1 + !p1 & !<>p1 & !<>!p1",
            "p1 & !<>p1 & !<>!p1 + !p1 & <>p1 & !<>!p1",
            "<>p1 & <>!p1",
        ],
    ),
    (
        "!<>p1 <-> !p1 + !<>!p1",
        [
            "!<>p1 & !<>!p1",
            "p1 & <>p1 & <>!p1 + !p1 & !<>p1 & <>!p1",
            "p1 & <>p1 & !<>!p1 + !p1 & <>p1 & <>!p1",
            "p1 & !<>p1 & <>!p1 + !p1 & <>p1 & !<>!p1",
        ],
    ),
    (
        "<>!p1",
        [
            "<>p1 & <>!p1",
            "!<>p1 & <>!p1",
            "<>p1 & !<>!p1",
            "!<>p1 & !<>!p1",
        ],
    ),
    (
        "<>!p1 <-> p1",
        [
            "p1 & !<>p1 & <>!p1 + !p1 & <>p1 & !<>!p1",
            "p1 & <>p1 & <>!p1 + !p1 & !<>p1 & !<>!p1",
            "p1 & !<>p1 & !<>!p1 + !p1 & <>p1 & <>!p1",
            "p1 & <>p1 & !<>!p1 + !p1 & !<>p1 & <>!p1",
        ],
    ),
    (
        "<>!p1 <-> p1 + <>p1",
        [
            "<>p1 & <>!p1",
            "p1 & !<>p1 & <>!p1 + !p1 & !<>p1 & !<>!p1",
            "p1 & !<>p1 & !<>!p1 + !p1 & <>p1 & !<>!p1",
            "p1 & <>p1 & !<>!p1 + !p1 & !<>p1 & <>!p1",
        ],
    ),
    (
        "<>!p1 <-> p1 + !<>p1",
        [
            "p1 & !<>p1 & <>!p1 + !p1 & <>p1 & !<>!p1",
            "p1 & <>p1 & <>!p1 + !p1 & !<>p1 & <>!p1",
            "p1 & <>p1 & !<>!p1 + !p1 & <>p1 & <>!p1",
            "!<>p1 & !<>!p1",
        ],
    ),
    (
        "<>!p1 <-> !p1 + <>p1",
        [
            "<>p1 & <>!p1",
            "p1 & !<>p1 & !<>!p1 + !p1 & !<>p1 & <>!p1",
            "p1 & <>p1 & !<>!p1 + !p1 & !<>p1 & !<>!p1",
            "p1 & !<>p1 & <>!p1 + !p1 & <>p1 & !<>!p1",
        ],
    ),
    (
        "<>!p1 <-> !p1 + !<>p1",
        [
            "p1 & <>p1 & !<>!p1 + !p1 & !<>p1 & <>!p1",
            "p1 & !<>p1 & <>!p1 + !p1 & <>p1 & <>!p1",
            "p1 & <>p1 & <>!p1 + !p1 & <>p1 & !<>!p1",
            "!<>p1 & !<>!p1",
        ],
    ),
    (
        "!<>!p1",
        [
            "!<>p1 & !<>!p1",
            "<>p1 & !<>!p1",
            "!<>p1 & <>!p1",
            "<>p1 & <>!p1",
        ],
    ),
    (
        "!<>!p1 <-> p1",
        [
            "p1 & <>p1 & !<>!p1 + !p1 & !<>p1 & <>!p1",
            "p1 & !<>p1 & !<>!p1 + !p1 & <>p1 & <>!p1",
            "p1 & <>p1 & <>!p1 + !p1 & !<>p1 & !<>!p1",
            "p1 & !<>p1 & <>!p1 + !p1 & <>p1 & !<>!p1",
        ],
    ),
    (
        "!<>!p1 <-> p1 + <>p1",
        [
            "p1 & <>p1 & !<>!p1 + !p1 & !<>p1 & <>!p1",
            "p1 & !<>p1 & !<>!p1 + !p1 & <>p1 & !<>!p1",
            "p1 & !<>p1 & <>!p1 + !p1 & !<>p1 & !<>!p1",
            "<>p1 & <>!p1",
        ],
    ),
    (
        "!<>!p1 <-> p1 + !<>p1",
        [
            "!<>p1 & !<>!p1",
            "p1 & <>p1 & !<>!p1 + !p1 & <>p1 & <>!p1",
            "p1 & <>p1 & <>!p1 + !p1 & !<>p1 & <>!p1",
            "p1 & !<>p1 & <>!p1 + !p1 & <>p1 & !<>!p1",
        ],
    ),
    (
        "!<>!p1 <-> !p1 + <>p1",
        [
            "p1 & !<>p1 & <>!p1 + !p1 & <>p1 & !<>!p1",
            "p1 & <>p1 & !<>!p1 + !p1 & !<>p1 & !<>!p1",
            "p1 & !<>p1 & !<>!p1 + !p1 & !<>p1 & <>!p1",
            "<>p1 & <>!p1",
        ],
    ),
    (
        "!<>!p1 <-> !p1 + !<>p1",
        [
            "!<>p1 & !<>!p1",
            "p1 & <>p1 & <>!p1 + !p1 & <>p1 & !<>!p1",
            "p1 & !<>p1 & <>!p1 + !p1 & <>p1 & <>!p1",
            "p1 & <>p1 & !<>!p1 + !p1 & !<>p1 & <>!p1",
        ],
    ),
];

fn golden_by_eta() -> BTreeMap<u8, (&'static str, [PrimaryLabel; 4], &'static str)> {
    TABLE2
        .iter()
        .map(|&(f, images, inv)| {
            let ur = UniformReplacement::from_formula(&parse(f).unwrap()).unwrap();
            (ur.eta(), (f, images, inv))
        })
        .collect()
}

#[test]
fn criterion_01_table2_reproduction() {
    let start = Instant::now();
    let found: Vec<UniformReplacement> = (0..=255u8)
        .map(UniformReplacement::from_eta)
        .filter(|r| r.is_prime())
        .collect();
    assert_eq!(found.len(), 24, "exactly 24 prime URs");
    let golden = golden_by_eta();
    assert_eq!(golden.len(), 24, "the 24 golden formulas are distinct URs");
    for r in &found {
        let (formula, images, inverse_formula) = golden
            .get(&r.eta())
            .unwrap_or_else(|| panic!("prime eta={:#04x} missing from the golden table", r.eta()));
        // image tuple of (W,D,C,V)
        let computed = replace::axiom_action(r).unwrap();
        for (minmatrix, expect) in computed.iter().zip(images.iter()) {
            let idx = minmatrix.indices();
            assert_eq!(idx.len(), 1, "{formula}: atom image is one minterm");
            let label =
                PrimaryLabel::of(&Minterm::new(minmatrix.context(), idx[0]).unwrap()).unwrap();
            assert_eq!(label, *expect, "{formula}");
        }
        // inverse pairing, pinned by formula
        let expect_inv = UniformReplacement::from_formula(&parse(inverse_formula).unwrap()).unwrap();
        assert_eq!(r.inverse().unwrap(), expect_inv, "{formula}");
    }
    // the fixed-row-order listing exposes the same 24 rows
    let rows = replace::prime_table().unwrap();
    let listed: BTreeSet<u8> = rows.iter().map(|row| row.ur.eta()).collect();
    assert_eq!(listed, found.iter().map(|r| r.eta()).collect());
    finish("1 (table 2)", start, Duration::from_secs(1));
}

#[test]
fn criterion_02_group_structure() {
    let start = Instant::now();
    let rows = replace::prime_table().unwrap();
    let primes: BTreeSet<u8> = rows.iter().map(|r| r.ur.eta()).collect();

    // closure, identity, inverses: a group of order 24
    assert_eq!(primes.len(), 24);
    assert!(primes.contains(&replace::UR_IDENTITY_ETA));
    for a in &rows {
        assert!(primes.contains(&a.ur.inverse().unwrap().eta()));
        for b in &rows {
            assert!(
                primes.contains(&a.ur.compose(&b.ur).eta()),
                "composition left the set"
            );
        }
    }

    // axiom_action is a faithful homomorphism onto S4: mu * (r s) = (mu * r) * s
    let perm_of = |ur: &UniformReplacement| -> [usize; 4] {
        let mut p = [0usize; 4];
        for (i, m) in replace::axiom_action(ur).unwrap().iter().enumerate() {
            p[i] = match PrimaryLabel::of(&Minterm::new(m.context(), m.indices()[0]).unwrap())
                .unwrap()
            {
                PrimaryLabel::W => 0,
                PrimaryLabel::D => 1,
                PrimaryLabel::C => 2,
                PrimaryLabel::V => 3,
            };
        }
        p
    };
    let mut images = BTreeSet::new();
    for a in &rows {
        let pa = perm_of(&a.ur);
        images.insert(pa);
        for b in &rows {
            let pb = perm_of(&b.ur);
            let pc = perm_of(&a.ur.compose(&b.ur));
            let composed: [usize; 4] = std::array::from_fn(|i| pb[pa[i]]);
            assert_eq!(pc, composed, "homomorphism");
        }
    }
    assert_eq!(images.len(), 24, "onto all permutations of four atoms");

    // the two worked compositions
    let by_formula = |s: &str| UniformReplacement::from_formula(&parse(s).unwrap()).unwrap();
    assert_eq!(
        by_formula("<>p1 <-> p1 + <>!p1").compose(&by_formula("<>p1 <-> p1 + !<>!p1")),
        by_formula("<>p1 <-> p1")
    );
    assert_eq!(
        by_formula("!<>p1 <-> p1 + <>!p1").compose(&by_formula("!<>p1 <-> p1 + !<>!p1")),
        UniformReplacement::identity()
    );
    finish("2 (group structure)", start, Duration::from_secs(1));
}

#[test]
fn criterion_03_table3_reproduction() {
    let start = Instant::now();
    let ctx = e(1, 1);
    let by_eta: BTreeMap<u8, [&str; 4]> = TABLE3
        .iter()
        .map(|&(f, cells)| {
            let ur = UniformReplacement::from_formula(&parse(f).unwrap()).unwrap();
            (ur.eta(), cells)
        })
        .collect();
    assert_eq!(by_eta.len(), 24);
    for (&eta, cells) in &by_eta {
        let ur = UniformReplacement::from_eta(eta);
        assert!(ur.is_prime());
        let products = replace::table3_products(&ur).unwrap();
        for (product, cell) in products.iter().zip(cells.iter()) {
            let expect = ctx.normalize(&parse(cell).unwrap()).unwrap();
            assert_eq!(product, &expect, "eta={eta:#04x} cell {cell}");
            // and the two-summand complemental pattern holds
            assert!(replace::complemental_pattern_signs(product).is_some());
        }
    }
    finish("3 (table 3)", start, Duration::from_secs(1));
}

#[test]
fn criterion_04_single_minterm_action() {
    let start = Instant::now();
    let rows = replace::prime_table().unwrap();

    // E[1,1]: all 24 x 32 cases, slow route vs fast route
    let e11 = e(1, 1);
    let orbits11 = subst::orbits(&e11).unwrap();
    for row in &rows {
        let perm = row.ur.minterm_permutation(&e11).unwrap();
        let mut seen = BTreeSet::new();
        for idx in 0..32 {
            let mu = Minterm::new(&e11, idx).unwrap();
            let slow = e11.normalize(&row.ur.apply(&mu.formula())).unwrap();
            assert_eq!(slow.count(), 1, "{}: single minterm", row.formula);
            assert_eq!(slow.indices()[0], perm.apply(idx), "{}", row.formula);
            seen.insert(perm.apply(idx));
        }
        assert_eq!(seen.len(), 32, "bijection");
        // orbits map onto orbits of equal size
        for orbit in orbits11.orbits() {
            let image_ids: BTreeSet<u32> = orbit
                .members()
                .iter()
                .map(|&m| orbits11.orbit_id(perm.apply(m)))
                .collect();
            assert_eq!(image_ids.len(), 1, "orbit image is one orbit");
            let target = &orbits11.orbits()[*image_ids.iter().next().unwrap() as usize];
            assert_eq!(target.len(), orbit.len());
        }
    }

    // E[2,1]: a 1,000-sample of (prime, minterm) pairs plus full bijections
    let e21 = e(2, 1);
    let orbits21 = subst::orbits(&e21).unwrap();
    let mut rng = StdRng::seed_from_u64(0x0D1A);
    let perms: Vec<_> = rows
        .iter()
        .map(|row| row.ur.minterm_permutation(&e21).unwrap())
        .collect();
    for _ in 0..1000 {
        let which = rng.gen_range(0..24);
        let idx = rng.gen_range(0..e21.minterm_count());
        let mu = Minterm::new(&e21, idx).unwrap();
        let slow = e21.normalize(&rows[which].ur.apply(&mu.formula())).unwrap();
        assert_eq!(slow.count(), 1);
        assert_eq!(slow.indices()[0], perms[which].apply(idx));
    }
    for perm in &perms {
        for orbit in orbits21.orbits().iter().step_by(97) {
            let image_ids: BTreeSet<u32> = orbit
                .members()
                .iter()
                .map(|&m| orbits21.orbit_id(perm.apply(m)))
                .collect();
            assert_eq!(image_ids.len(), 1);
            let target = &orbits21.orbits()[*image_ids.iter().next().unwrap() as usize];
            assert_eq!(target.len(), orbit.len());
        }
    }
    finish("4 (single-minterm action)", start, Duration::from_secs(30));
}

fn random_formula(rng: &mut StdRng, v: u32, budget: u32, depth: u32) -> Formula {
    if depth == 0 {
        return match rng.gen_range(0..4) {
            0 => Formula::Const0,
            1 => Formula::Const1,
            _ => Formula::Var(rng.gen_range(1..=v)),
        };
    }
    match rng.gen_range(0..10) {
        0 => Formula::Const0,
        1 => Formula::Const1,
        2 | 3 => Formula::Var(rng.gen_range(1..=v)),
        4 => Formula::not(random_formula(rng, v, budget, depth - 1)),
        5 if budget > 0 => Formula::dia(random_formula(rng, v, budget - 1, depth - 1)),
        6 if budget > 0 => Formula::nec(random_formula(rng, v, budget - 1, depth - 1)),
        7 => Formula::and(
            random_formula(rng, v, budget, depth - 1),
            random_formula(rng, v, budget, depth - 1),
        ),
        8 => Formula::or(
            random_formula(rng, v, budget, depth - 1),
            random_formula(rng, v, budget, depth - 1),
        ),
        _ => Formula::imp(
            random_formula(rng, v, budget, depth - 1),
            random_formula(rng, v, budget, depth - 1),
        ),
    }
}

#[test]
fn criterion_05_interaction_laws() {
    let start = Instant::now();
    let e21 = e(2, 1);
    let e11 = e(1, 1);
    let mut rng = StdRng::seed_from_u64(0x1E88A);
    for round in 0..500 {
        let f = random_formula(&mut rng, 2, 1, 4);
        let sigma = Substitution::from_tables(
            2,
            vec![rng.gen_range(0..16u64), rng.gen_range(0..16u64)],
        )
        .unwrap();
        let rho = UniformReplacement::from_eta(rng.gen());
        let rho2 = UniformReplacement::from_eta(rng.gen());

        // exchange law: (f o sigma) * rho ~ (f * rho) o (sigma * rho)
        let lhs = e21.normalize(&rho.apply(&sigma.apply(&f))).unwrap();
        let sigma_rho = Substitution::from_formulas(
            2,
            (1..=2).map(|i| rho.apply(sigma.component(i))).collect(),
        )
        .unwrap();
        let rhs = e21.normalize(&sigma_rho.apply(&rho.apply(&f))).unwrap();
        assert_eq!(lhs, rhs, "exchange law, round {round}");

        // composition law: (f * rho) * rho' ~ f * (rho rho')
        let lhs = e21.normalize(&rho2.apply(&rho.apply(&f))).unwrap();
        let rhs = e21.normalize(&rho.compose(&rho2).apply(&f)).unwrap();
        assert_eq!(lhs, rhs, "composition law, round {round}");

        // theoremhood preservation: tautologies survive every replacement
        let taut = Formula::or(f.clone(), Formula::not(f.clone()));
        assert!(
            e21.normalize(&rho.apply(&taut)).unwrap().is_full(),
            "theoremhood preservation, round {round}"
        );

        // composition law again in the one-variable context
        let f1 = random_formula(&mut rng, 1, 1, 3);
        let lhs = e11.normalize(&rho2.apply(&rho.apply(&f1))).unwrap();
        let rhs = e11.normalize(&rho.compose(&rho2).apply(&f1)).unwrap();
        assert_eq!(lhs, rhs, "composition law in E[1,1], round {round}");
    }
    finish("5 (interaction laws)", start, Duration::from_secs(60));
}

#[test]
fn criterion_06_figure1() {
    let start = Instant::now();
    let fig = cmm::figure1_lattice().unwrap();
    assert_eq!(fig.systems.len(), 16);
    assert_eq!(fig.atoms().len(), 4);
    assert_eq!(fig.edges.len(), 32);

    let rows = replace::prime_table().unwrap();
    let golden = golden_by_eta();
    let mut actions = BTreeSet::new();
    for row in &rows {
        let action = cmm::ur_lattice_action(&row.ur).unwrap();
        actions.insert((0..16).map(|i| action.apply(i)).collect::<Vec<_>>());
        // lattice automorphism: preserves union and inclusion
        for a in 0..16u64 {
            for b in 0..16u64 {
                assert_eq!(action.apply(a | b), action.apply(a) | action.apply(b));
                assert_eq!(
                    a & b == a,
                    action.apply(a) & action.apply(b) == action.apply(a)
                );
            }
        }
        // atoms move exactly as the golden image tuple prescribes
        let (_, images, _) = golden[&row.ur.eta()];
        for (label, target) in [PrimaryLabel::W, PrimaryLabel::D, PrimaryLabel::C, PrimaryLabel::V]
            .iter()
            .zip(images.iter())
        {
            let atom_mask = 1u64 << label.e01_minterm();
            assert_eq!(action.apply(atom_mask), 1 << target.e01_minterm());
        }
    }
    assert_eq!(actions.len(), 24, "24 distinct lattice automorphisms");

    // CMM-flag invariance: the candidate flags survive every prime
    // replacement of the minmatrix
    let e11 = e(1, 1);
    let samples = [
        cmm::us_closure_intersection(&e11, &parse("<>p1").unwrap()).unwrap(),
        e11.normalize(&parse("<>0 & !<>p1 & !<>!p1 & !<>1").unwrap()).unwrap(),
        e11.normalize(&parse("<>p1 -> p1").unwrap()).unwrap(),
    ];
    for row in rows.iter().step_by(7) {
        let perm = row.ur.minterm_permutation(&e11).unwrap();
        for m in &samples {
            let image = Minmatrix::from_bitset(&e11, perm.apply_to_set(m.bits()));
            let a = cmm::candidate_check(m).unwrap();
            let b = cmm::candidate_check(&image).unwrap();
            assert_eq!(a.orbit_complete, b.orbit_complete);
            assert_eq!(a.immune, b.immune);
        }
    }
    finish("6 (figure 1)", start, Duration::from_secs(10));
}

#[test]
fn criterion_07_k_fixtures() {
    let start = Instant::now();
    let report = cmm::k_collapse_demo();
    assert_eq!(report.fixtures.s4.columns.len(), 14);
    assert_eq!(report.fixtures.b.columns.len(), 8);
    assert_eq!(report.b4.columns.len(), 6);
    assert_eq!(report.fixtures.s5.columns.len(), 4);
    assert!(report.s5_in_b4 && report.strict);
    assert_eq!(report.fixtures.t.columns.len(), 4);

    let m = cmm::normal_k_cmm_e21().unwrap();
    assert_eq!(m.count(), 64);
    let ctx = m.context().clone();
    for idx in m.indices() {
        let mu = Minterm::new(&ctx, idx).unwrap();
        assert!(!mu.state(0), "state of <>0 is always 0");
        for r in 1..16u64 {
            let additive = (0..4).any(|i| r >> i & 1 == 1 && mu.state(1 << i));
            assert_eq!(mu.state(r), additive, "additivity at rank {r}");
        }
    }
    finish("7 (K fixtures)", start, Duration::from_secs(5));
}

#[test]
fn criterion_08_witness_models() {
    let start = Instant::now();
    for ctx in [e(0, 1), e(1, 1), e(0, 2)] {
        let model = witness::build_model(&ctx).unwrap();
        if ctx.v() == 0 && ctx.d() == 2 {
            assert_eq!(model.world_count(), 65_541);
        }
        // every minterm is valid at its own world, all others are not:
        // the factor valuations at each top-level world must reproduce that
        // world's own state word, and the variable prefix pins the rest
        for idx in 0..ctx.minterm_count() {
            let w = witness::WorldId {
                level: ctx.d(),
                index: idx,
            };
            let factors = model.factor_values(w).unwrap();
            assert_eq!(
                factors,
                idx & ((1 << ctx.factor_count()) - 1),
                "{ctx} world {idx}"
            );
            assert!(model.minterm_valid(w, idx).unwrap());
        }
        // formula-route samples, including mutual invalidity
        let sample: Vec<u64> = (0..ctx.minterm_count())
            .step_by(1.max(ctx.minterm_count() as usize / 16))
            .collect();
        for &a in &sample {
            let w = witness::WorldId {
                level: ctx.d(),
                index: a,
            };
            assert!(model.check(w, &ctx.minterm_formula(a)).unwrap());
            for &b in &sample {
                if a != b {
                    assert!(!model.check(w, &ctx.minterm_formula(b)).unwrap());
                    assert!(!model.minterm_valid(w, b).unwrap());
                }
            }
        }
        // C1: the target X sets of distinct level-(d-1) formulas differ, and
        // the model-computed X sets match the targets
        let ranks = ctx.factor_count();
        for r in 0..ranks {
            for s in 0..r {
                assert_ne!(model.x_target(r), model.x_target(s), "C1");
            }
        }
        // C2 across levels holds exactly on promotion pairs
        if ctx.d() >= 2 {
            let low = ctx.at_level(ctx.d() - 2);
            let promoted: Vec<u64> = (0..(1u64 << low.minterm_count()))
                .map(|r| ctx.promote_rank(ctx.d() - 2, ctx.d() - 1, r))
                .collect();
            for (r, &p) in promoted.iter().enumerate() {
                // the promotion pair shares its X set by construction; verify
                // through the model's own checking route
                let f_low = low.rank_formula(r as u64);
                let f_high = ctx.at_level(ctx.d() - 1).rank_formula(p);
                for w in model.worlds().step_by(997) {
                    assert_eq!(
                        model.check(w, &f_low).unwrap(),
                        model.check(w, &f_high).unwrap(),
                        "C2"
                    );
                }
            }
        }
    }
    finish("8 (witness models)", start, Duration::from_secs(60));
}

#[test]
fn criterion_09_orbits_and_immunity() {
    let start = Instant::now();
    let ctx = e(1, 1);
    let orbits = subst::orbits(&ctx).unwrap();
    assert_eq!(orbits.len(), 16);
    assert!(orbits.orbits().iter().all(|o| o.len() == 2));

    let all_subst = subst::enumerate_all(1).unwrap();
    assert_eq!(all_subst.len(), 4);
    let primes: Vec<&Substitution> = all_subst.iter().filter(|s| s.is_prime()).collect();
    assert_eq!(primes.len(), 2);

    // complete-orbit unions: exhaustive over <= 3 orbits plus random samples.
    // Prime substitutions can never collapse them; non-prime ones sometimes
    // can, so full immunity is a strictly stronger property whose holders
    // must in turn be orbit-complete.
    let mut unions: Vec<Vec<u32>> = vec![vec![]];
    for a in 0..16u32 {
        unions.push(vec![a]);
        for b in 0..a {
            unions.push(vec![a, b]);
            for c in 0..b {
                unions.push(vec![a, b, c]);
            }
        }
    }
    assert_eq!(unions.len(), 1 + 16 + 120 + 560);
    let mut rng = StdRng::seed_from_u64(0x0BB17);
    let mut random_unions = Vec::new();
    for _ in 0..1000 {
        let mask: u16 = rng.gen();
        random_unions.push((0..16u32).filter(|i| mask >> i & 1 == 1).collect::<Vec<_>>());
    }
    let mut immune_count = 0u32;
    for ids in unions.iter().chain(random_unions.iter()) {
        let m = orbits.union_of(ids.iter().copied());
        for p in &primes {
            assert!(!p.collapses(&m).unwrap(), "prime collapse of complete orbits");
        }
        let witness = subst::find_collapsing_substitution(&m).unwrap();
        match witness {
            None => {
                immune_count += 1;
                assert!(orbits.is_union_of_orbits(&m), "immune implies orbit-complete");
            }
            Some(w) => {
                assert!(w.collapses(&m).unwrap());
                assert!(!w.is_prime(), "only non-prime substitutions can do this");
            }
        }
    }
    assert!(immune_count > 0, "some unions are fully immune");

    // the resolved open question, both directions on concrete pairs: the
    // all-states-off orbit is immune to all four substitutions, while the
    // <>0-only orbit collapses under the non-prime p1 := 0
    let ver = ctx
        .normalize(&parse("!<>1 & !<>p1 & !<>!p1 & !<>0").unwrap())
        .unwrap();
    assert!(subst::find_collapsing_substitution(&ver).unwrap().is_none());
    let d0_pair = ctx
        .normalize(&parse("<>0 & !<>p1 & !<>!p1 & !<>1").unwrap())
        .unwrap();
    assert!(orbits.is_union_of_orbits(&d0_pair));
    let w = subst::find_collapsing_substitution(&d0_pair)
        .unwrap()
        .expect("collapses under a non-prime substitution");
    assert!(!w.is_prime());
    println!(
        "note: criterion 9's literal `immune to all 4` clause holds only for some \
         complete-orbit unions; a complete orbit can collapse under a non-prime \
         substitution (witness above), so the suite checks prime-immunity plus \
         the immune-implies-orbit-complete direction instead"
    );

    // strict partial orbits: every one collapses, with a prime witness
    // available; exhaustive singles plus random partial subsets
    for orbit in orbits.orbits() {
        let half = Minmatrix::from_indices(&ctx, [orbit.members()[0]]).unwrap();
        let w = subst::find_collapsing_substitution(&half)
            .unwrap()
            .expect("partial orbit collapses");
        assert!(w.collapses(&half).unwrap());
        assert!(
            primes.iter().any(|p| p.collapses(&half).unwrap()),
            "a prime witness exists"
        );
    }
    for _ in 0..1000 {
        let bits: u32 = rng.gen();
        let m = Minmatrix::from_indices(&ctx, (0..32u64).filter(|i| bits >> i & 1 == 1)).unwrap();
        if orbits.is_union_of_orbits(&m) {
            continue;
        }
        let w = subst::find_collapsing_substitution(&m).unwrap();
        assert!(w.expect("split orbit collapses").collapses(&m).unwrap());
        assert!(primes.iter().any(|p| p.collapses(&m).unwrap()));
    }
    finish("9 (orbits)", start, Duration::from_secs(60));
}

#[test]
fn criterion_10_xur_smoke() {
    let start = Instant::now();
    // scanning the 256 embedded tables finds exactly the 24 prime URs
    let embedded = replace::xur_search_embedded_urs();
    assert_eq!(embedded.len(), 24);
    for &eta5 in &embedded {
        assert_eq!(eta5.count_ones(), 16, "half of the 32 minterms");
        assert!(ExtendedUr::from_eta5(eta5).as_ur().unwrap().is_prime());
    }
    // the published pair composes to the identity both ways
    let chi = ExtendedUr::from_formula(
        &parse("(<>1 -> p1 + (<>p1 <-> (<>0 -> <>!p1))) -> <>p1 & (<>1 -> p1)").unwrap(),
    )
    .unwrap();
    let chi_inv = ExtendedUr::from_formula(
        &parse("(<>1 -> p1 + (<>p1 <-> <>0 + <>!p1)) -> <>p1 & (<>1 -> p1)").unwrap(),
    )
    .unwrap();
    assert_eq!(chi.compose(&chi_inv).unwrap(), ExtendedUr::identity());
    assert_eq!(chi_inv.compose(&chi).unwrap(), ExtendedUr::identity());
    finish("10 (XUR smoke)", start, Duration::from_secs(1));
}

/// The full 2^32 scan; run it with `cargo test -- --ignored` (or
/// `--include-ignored`). Takes tens of seconds per hardware thread share.
#[test]
#[ignore = "full 2^32 scan; see the smoke variant for the default suite"]
fn criterion_10_xur_search_full() {
    let start = Instant::now();
    let dir = std::env::temp_dir().join(format!("modlat-accept-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let checkpoint = dir.join("xur-full.ckpt");
    let cfg = replace::XurSearchConfig {
        workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        report_every: 256,
        checkpoint: Some(checkpoint.clone()),
    };
    let outcome = replace::xur_search(&cfg, None).unwrap();
    assert_eq!(outcome.primes.len(), 31_104);
    for &eta5 in &outcome.primes {
        assert_eq!(eta5.count_ones(), 16);
    }
    // the embedded prime URs are among the results
    for eta5 in replace::xur_search_embedded_urs() {
        assert!(outcome.primes.binary_search(&eta5).is_ok());
    }
    // an interrupted-then-resumed run ends with the same answer: resuming
    // from the final checkpoint rescans nothing and keeps the count
    let resumed = replace::xur_search(&cfg, None).unwrap();
    assert_eq!(resumed.resumed_partitions, replace::PARTITION_COUNT);
    assert_eq!(resumed.primes.len(), 31_104);
    assert_eq!(resumed.primes, outcome.primes);
    std::fs::remove_dir_all(&dir).unwrap();
    println!("criterion 10 (XUR full): PASS ({:?})", start.elapsed());
}

#[test]
fn xur_search_resumes_mid_scan() {
    // resume mechanics without the full scan: a checkpoint claiming all but
    // the last partition leaves exactly one partition of real work
    let dir = std::env::temp_dir().join(format!("modlat-resume-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let checkpoint = dir.join("tail.ckpt");
    let done = replace::PARTITION_COUNT - 1;
    std::fs::write(
        &checkpoint,
        format!("modlat-xur-checkpoint v1\npartitions_done={done}\n"),
    )
    .unwrap();
    let cfg = replace::XurSearchConfig {
        workers: 1,
        report_every: 1,
        checkpoint: Some(checkpoint),
    };
    let outcome = replace::xur_search(&cfg, None).unwrap();
    assert_eq!(outcome.resumed_partitions, done);
    // oracle: scan the tail partition directly
    let base = done * replace::PARTITION_SIZE;
    let expect: Vec<u32> = (base..base + replace::PARTITION_SIZE)
        .map(|x| x as u32)
        .filter(|&x| replace::xur_is_prime_fast(x))
        .collect();
    assert_eq!(outcome.primes, expect);
    std::fs::remove_dir_all(&dir).unwrap();
}
