//! `modlat`: canonical-form computations for the classical modal logic E.

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use modlat::cmm;
use modlat::context::{Context, Minmatrix};
use modlat::formula::{self, Formula};
use modlat::replace::{self, UniformReplacement};
use modlat::subst::{self, Substitution};
use modlat::witness;
use modlat::Error;

#[derive(Parser)]
#[command(
    name = "modlat",
    version,
    about = "Canonical-form algebra for the classical modal logic E",
    after_help = "Formulas use the grammar: 0 1 p<k> ! <> [] & + -> <-> with parentheses.\n\
                  Contexts are E[v,d] pairs written v,d. The minterm capacity bound is\n\
                  2^24 by default; override with --capacity or MODLAT_CAPACITY (exponents)."
)]
struct Cli {
    /// Capacity exponent: contexts may hold at most 2^BITS minterms
    #[arg(long, global = true, value_name = "BITS")]
    capacity: Option<u32>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Auto,
    Index,
    Hex,
    Dot,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize a formula to its minmatrix in a context
    Normalize {
        #[arg(long, value_name = "v,d")]
        ctx: String,
        formula: String,
        #[arg(long, value_enum, default_value = "auto")]
        format: Format,
    },
    /// Promote a serialized minmatrix (file or - for stdin) to a higher level
    Promote {
        #[arg(long, value_name = "v,d")]
        to: String,
        /// Input path; defaults to stdin
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "auto")]
        format: Format,
    },
    /// Prime-substitution orbits of a context's minterms
    Orbits {
        #[arg(long, value_name = "v,d")]
        ctx: String,
    },
    /// Apply a level-0 substitution to a formula
    SubstApply {
        /// Substitution in the form "p1:=<formula>; p2:=<formula>"
        subst: String,
        formula: String,
    },
    /// Test a level-0 substitution for primality
    SubstPrime { subst: String },
    /// Apply a uniform replacement (formula over p1, or eta:0xHH) to a formula
    UrApply { ur: String, formula: String },
    /// Compose two uniform replacements
    UrCompose { first: String, second: String },
    /// Test one UR for primality, or scan all 256 when no argument is given
    UrPrime { ur: Option<String> },
    /// The 24 prime URs with their axiom permutations and inverses
    Table2,
    /// The complemental products of the 24 prime URs
    Table3,
    /// Images of the four E[0,1] atoms under a replacement
    AxiomAction { ur: String },
    /// The sixteen E[0,1] systems and their Hasse diagram
    Figure1 {
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
    },
    /// The embedded T/S4/B/S5 matrices and the intersection-collapse report
    KDemo,
    /// The E[2,1] characteristic minmatrix of the normal system K
    KCmmE21 {
        #[arg(long, value_enum, default_value = "auto")]
        format: Format,
    },
    /// Orbit-completeness and immunity flags of a formula's minmatrix
    CandidateCheck {
        #[arg(long, value_name = "v,d")]
        ctx: String,
        /// Formula to check; alternatively read a minmatrix with --input
        formula: Option<String>,
        #[arg(long, conflicts_with = "formula")]
        input: Option<PathBuf>,
    },
    /// Build the neighborhood witness model of a context and dump it
    WitnessModel {
        #[arg(long, value_name = "v,d")]
        ctx: String,
    },
    /// Brute-force scan for invertible extended URs
    XurSearch {
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Partitions between checkpoint writes and progress reports
        #[arg(long, default_value_t = 64)]
        report_every: u64,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Scan only the 256 tables that embed plain URs
        #[arg(long)]
        smoke: bool,
    },
}

enum CliError {
    Usage(String),
    Domain(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn capacity_bound(flag: Option<u32>) -> Result<u64, CliError> {
    let bits = match flag {
        Some(bits) => bits,
        None => match std::env::var("MODLAT_CAPACITY") {
            Ok(s) => s.parse().map_err(|_| {
                CliError::Usage(format!("MODLAT_CAPACITY must be an exponent, got '{s}'"))
            })?,
            Err(_) => 24,
        },
    };
    if bits >= 48 {
        return Err(CliError::Usage(format!(
            "capacity exponent {bits} is out of range (max 47)"
        )));
    }
    Ok(1u64 << bits)
}

fn parse_ctx(text: &str, capacity: u64) -> Result<Context, CliError> {
    let (v, d) = text
        .split_once(',')
        .and_then(|(v, d)| Some((v.trim().parse().ok()?, d.trim().parse().ok()?)))
        .ok_or_else(|| CliError::Usage(format!("--ctx expects 'v,d', got '{text}'")))?;
    Ok(Context::with_capacity(v, d, capacity)?)
}

fn parse_formula(text: &str) -> Result<Formula, CliError> {
    Ok(formula::parse(text)?)
}

fn parse_ur(text: &str) -> Result<UniformReplacement, CliError> {
    if let Some(hex) = text.strip_prefix("eta:") {
        let hex = hex.trim_start_matches("0x");
        let eta = u8::from_str_radix(hex, 16)
            .map_err(|_| CliError::Usage(format!("bad eta byte '{text}'")))?;
        return Ok(UniformReplacement::from_eta(eta));
    }
    Ok(UniformReplacement::from_formula(&parse_formula(text)?)?)
}

fn parse_substitution(text: &str) -> Result<Substitution, CliError> {
    // arity: the largest variable mentioned on either side
    let mut v = 0u32;
    for part in text.split(';') {
        if let Some((lhs, rhs)) = part.split_once(":=") {
            if let Some(i) = lhs.trim().strip_prefix('p').and_then(|s| s.parse::<u32>().ok()) {
                v = v.max(i);
            }
            v = v.max(parse_formula(rhs)?.max_var());
        }
    }
    if v == 0 {
        return Err(CliError::Usage(format!(
            "no substitution targets in '{text}'"
        )));
    }
    Ok(Substitution::parse_text(v, text)?)
}

fn render_minmatrix(m: &Minmatrix, format: Format) -> Result<String, CliError> {
    match format {
        Format::Auto => Ok(m.to_text()),
        Format::Index => {
            let mut out = format!(
                "ctx v={} d={}\ncount={}\n",
                m.context().v(),
                m.context().d(),
                m.count()
            );
            for idx in m.indices() {
                out.push_str(&idx.to_string());
                out.push('\n');
            }
            Ok(out)
        }
        Format::Hex => Ok(m.to_text_hex()),
        _ => Err(CliError::Usage(
            "--format here must be auto, index or hex".into(),
        )),
    }
}

fn read_input(path: Option<&PathBuf>) -> Result<String, CliError> {
    match path {
        None => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| CliError::Domain(Error::Domain(format!("stdin: {e}"))))?;
            Ok(buf)
        }
        Some(p) if p.as_os_str() == "-" => read_input(None),
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| CliError::Domain(Error::Domain(format!("{}: {e}", p.display())))),
    }
}

/// Product cell in the compact complemental shape: shared-sign products
/// collapse to two factors, otherwise both prefix summands are spelled out.
fn product_cell(m: &Minmatrix) -> String {
    let lit = |name: &str, sign: bool| {
        if sign {
            name.to_string()
        } else {
            format!("!{name}")
        }
    };
    match replace::complemental_pattern_signs(m) {
        Some([(a, b), (c, d)]) if (a, b) == (c, d) => {
            format!("{} & {}", lit("<>p1", a), lit("<>!p1", b))
        }
        Some([(a, b), (c, d)]) => format!(
            "p1 & {} & {} + !p1 & {} & {}",
            lit("<>p1", a),
            lit("<>!p1", b),
            lit("<>p1", c),
            lit("<>!p1", d)
        ),
        None => formula::print(&m.formula()),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let capacity = capacity_bound(cli.capacity)?;
    match cli.command {
        Command::Normalize { ctx, formula, format } => {
            let ctx = parse_ctx(&ctx, capacity)?;
            let m = ctx.normalize(&parse_formula(&formula)?)?;
            print!("{}", render_minmatrix(&m, format)?);
        }
        Command::Promote { to, input, format } => {
            let to = parse_ctx(&to, capacity)?;
            let text = read_input(input.as_ref())?;
            let m = Minmatrix::parse_text_with_capacity(&text, capacity)?;
            print!("{}", render_minmatrix(&m.promote(&to)?, format)?);
        }
        Command::Orbits { ctx } => {
            let ctx = parse_ctx(&ctx, capacity)?;
            let orbits = subst::orbits(&ctx)?;
            for (i, orbit) in orbits.orbits().iter().enumerate() {
                let members: Vec<String> =
                    orbit.members().iter().map(|m| m.to_string()).collect();
                println!("orbit {i}: {}", members.join(" "));
            }
            println!("orbit_count={}", orbits.len());
        }
        Command::SubstApply { subst, formula } => {
            let sigma = parse_substitution(&subst)?;
            let f = parse_formula(&formula)?;
            if f.max_var() > sigma.v() {
                return Err(CliError::Usage(format!(
                    "formula uses p{} beyond the substitution arity {}",
                    f.max_var(),
                    sigma.v()
                )));
            }
            println!("{}", sigma.apply(&f));
        }
        Command::SubstPrime { subst } => {
            let sigma = parse_substitution(&subst)?;
            println!("prime={}", sigma.is_prime());
            if let Some(inv) = sigma.inverse() {
                println!("inverse={}", inv.to_text());
            }
        }
        Command::UrApply { ur, formula } => {
            let rho = parse_ur(&ur)?;
            println!("{}", rho.apply(&parse_formula(&formula)?));
        }
        Command::UrCompose { first, second } => {
            let composed = parse_ur(&first)?.compose(&parse_ur(&second)?);
            println!("eta=0x{:02X}", composed.eta());
            println!("{}", composed.formula());
        }
        Command::UrPrime { ur } => match ur {
            Some(text) => {
                let rho = parse_ur(&text)?;
                println!("prime={}", rho.is_prime());
                if let Some(inv) = rho.inverse() {
                    println!("inverse_eta=0x{:02X}", inv.eta());
                    println!("inverse={}", inv.formula());
                }
            }
            None => {
                let mut count = 0;
                for eta in 0..=255u8 {
                    if UniformReplacement::from_eta(eta).is_prime() {
                        println!("0x{eta:02X}");
                        count += 1;
                    }
                }
                println!("prime_ur_count={count}");
            }
        },
        Command::Table2 => {
            let rows = replace::prime_table()?;
            println!("{:<4} {:<28} {:<14} inverse", "ur", "<>e ->", "(W,D,C,V) ->");
            for row in &rows {
                let images: Vec<String> = row
                    .axiom_images
                    .iter()
                    .map(|l| l.letter().to_string())
                    .collect();
                println!(
                    "r{:<3} {:<28} {:<14} r{}",
                    row.index,
                    row.formula.to_string(),
                    format!("({})", images.join(",")),
                    row.inverse_index
                );
            }
        }
        Command::Table3 => {
            let rows = replace::prime_table()?;
            println!("{:<4} | r(e) r(!e) | r(e) !r(!e) | !r(e) r(!e) | !r(e) !r(!e)", "ur");
            for row in &rows {
                let products = replace::table3_products(&row.ur)?;
                let cells: Vec<String> = products.iter().map(product_cell).collect();
                println!("r{:<3} | {}", row.index, cells.join(" | "));
            }
        }
        Command::AxiomAction { ur } => {
            let rho = parse_ur(&ur)?;
            let images = replace::axiom_action(&rho)?;
            let ctx = Context::new(0, 1)?;
            for (label, image) in ["W", "D", "C", "V"].iter().zip(images.iter()) {
                let target = match image.indices().as_slice() {
                    [single] => cmm::PrimaryLabel::from_e01_minterm(*single)
                        .letter()
                        .to_string(),
                    _ => formula::print(&image.formula()),
                };
                println!("{label} -> {target}");
                debug_assert_eq!(image.context(), &ctx);
            }
        }
        Command::Figure1 { format } => {
            let fig = cmm::figure1_lattice()?;
            match format {
                Format::Dot => print!("{}", fig.to_dot()),
                Format::Table | Format::Auto => {
                    for s in &fig.systems {
                        let atoms: Vec<String> =
                            s.minmatrix.indices().iter().map(|i| i.to_string()).collect();
                        println!("system {:<7} minterms {{{}}}", s.name, atoms.join(","));
                    }
                    println!("systems={} atoms=4 edges={}", fig.systems.len(), fig.edges.len());
                }
                _ => {
                    return Err(CliError::Usage(
                        "--format for figure1 must be dot or table".into(),
                    ))
                }
            }
        }
        Command::KDemo => {
            print!("{}", cmm::k_collapse_demo().to_text());
        }
        Command::KCmmE21 { format } => {
            let m = cmm::normal_k_cmm_e21()?;
            print!("{}", render_minmatrix(&m, format)?);
        }
        Command::CandidateCheck { ctx, formula, input } => {
            let m = match (formula, input) {
                (Some(f), None) => {
                    let ctx = parse_ctx(&ctx, capacity)?;
                    ctx.normalize(&parse_formula(&f)?)?
                }
                (None, Some(path)) => {
                    let text = read_input(Some(&path))?;
                    Minmatrix::parse_text_with_capacity(&text, capacity)?
                }
                _ => {
                    return Err(CliError::Usage(
                        "candidate-check needs a formula or --input".into(),
                    ))
                }
            };
            let cand = cmm::candidate_check(&m)?;
            println!("count={}", cand.minmatrix.count());
            println!("orbit_complete={}", cand.orbit_complete);
            println!("immune={}", cand.immune);
            if let Some(w) = cand.witness {
                println!("witness={}", w.to_text());
            }
        }
        Command::WitnessModel { ctx } => {
            let ctx = parse_ctx(&ctx, capacity)?;
            let model = witness::build_model(&ctx)?;
            print!("{}", model.dump());
        }
        Command::XurSearch {
            workers,
            report_every,
            checkpoint,
            smoke,
        } => {
            if smoke {
                let primes = replace::xur_search_embedded_urs();
                for eta5 in &primes {
                    println!("{eta5:08x}");
                }
                println!("prime_xur_count={}", primes.len());
            } else {
                let cfg = replace::XurSearchConfig {
                    workers,
                    report_every,
                    checkpoint,
                };
                let progress = |done: u64, total: u64, found: u64| {
                    eprintln!("scanned {done}/{total} candidates, {found} primes");
                };
                let outcome = replace::xur_search(&cfg, Some(&progress))?;
                if outcome.resumed_partitions > 0 {
                    eprintln!(
                        "resumed past {} checkpointed partitions",
                        outcome.resumed_partitions
                    );
                }
                for eta5 in &outcome.primes {
                    println!("{eta5:08x}");
                }
                println!("prime_xur_count={}", outcome.primes.len());
            }
        }
    }
    Ok(())
}
