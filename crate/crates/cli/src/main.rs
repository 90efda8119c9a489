//! `bt`: command-line access to every computation in the library, with
//! JSON/CSV emission and the one-shot verification suite.
//!
//! Exit codes: 0 success, 1 domain error, 2 budget exceeded, 3 invariant
//! violation (a bug), 64 usage error.

use std::fs;
use std::io::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use bt_core::dieudonne::{aut_count, hom_module, DieudonneTruncation};
use bt_core::experiment::{chi_image_count, level_experiment};
use bt_core::kraft::{direct_sum, minimal_datum, KraftDatum};
use bt_core::matrix::MatrixW;
use bt_core::newton::{np_from_matrix, specializing_height, traverso_codim, traverso_level, NewtonPolygon};
use bt_core::orbit::{
    group_order, orbit_bfs, stabilizer, ActionContext, StabilizerMode, SymplecticDescriptor,
    DEFAULT_ENUM_CAP, DEFAULT_ORBIT_CAP,
};
use bt_core::verify::{run_all, VerifyConfig};
use bt_core::witt::{EnumerationFilter, WittRing};
use bt_core::Error;

#[derive(Parser)]
#[command(name = "bt", version, about = "Exact invariants of truncated Barsotti-Tate groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Orbit search budget (number of visited points).
    #[arg(long, global = true, default_value_t = DEFAULT_ORBIT_CAP)]
    budget_orbit: u64,
    /// Enumeration budget (group elements / module solutions).
    #[arg(long, global = true, default_value_t = DEFAULT_ENUM_CAP)]
    budget_enum: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum BasePreset {
    /// Identity base: the split ordinary module when c = d = 1.
    Ordinary,
    /// Cyclic-shift base of the isoclinic datum for (c, d).
    Minimal,
    /// The (1,1) swap base (equals minimal at c = d = 1); in symplectic
    /// contexts the form-compatible rotation [[0,-1],[1,0]].
    Supersingular,
    /// Identity base for arbitrary (c, d).
    Identity,
}

#[derive(Args)]
struct RingArgs {
    /// Characteristic p (prime).
    #[arg(long)]
    p: u64,
    /// Residue degree n of F_{p^n}.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Truncation length m.
    #[arg(long, default_value_t = 1)]
    m: u32,
}

#[derive(Args)]
struct ShapeArgs {
    /// Codimension c.
    #[arg(long)]
    c: usize,
    /// Dimension d.
    #[arg(long)]
    d: usize,
    /// Base matrix preset.
    #[arg(long, value_enum, default_value_t = BasePreset::Minimal)]
    base: BasePreset,
    /// Read the base matrix from a JSON file instead of a preset.
    #[arg(long)]
    base_file: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Permutation normal forms and the level-1 automorphism dimension.
    Kraft {
        #[command(subcommand)]
        sub: KraftCommand,
    },
    /// Closed-form polygon invariants: codimension, specializing height,
    /// determining level.
    Traverso {
        /// Blocks as c/d pairs, comma separated, e.g. 2/1,1/1.
        #[arg(long)]
        blocks: String,
    },
    /// Build a truncation and emit its defining data.
    Truncation {
        #[command(flatten)]
        ring: RingArgs,
        #[command(flatten)]
        shape: ShapeArgs,
        /// Twist matrix from a JSON file (defaults to the identity).
        #[arg(long)]
        g_file: Option<String>,
        /// Include the recovered Newton polygon.
        #[arg(long)]
        with_np: bool,
    },
    /// Orbit, stabilizer, and group order of a point under the action.
    Orbit {
        #[command(flatten)]
        ring: RingArgs,
        #[command(flatten)]
        shape: ShapeArgs,
        /// Seed point: "identity" or a path to a matrix JSON file.
        #[arg(long, default_value = "identity")]
        seed: String,
        /// Restrict to the symplectic subgroup (requires c = d).
        #[arg(long)]
        symplectic: bool,
    },
    /// Automorphism and endomorphism counts of a truncation.
    Aut {
        #[command(flatten)]
        ring: RingArgs,
        #[command(flatten)]
        shape: ShapeArgs,
        /// Twist matrix from a JSON file (defaults to the identity).
        #[arg(long)]
        g_file: Option<String>,
        /// Probe finiteness of the block-diagonal automorphism image by
        /// fitting its counts over residue degrees n, n+1, n+2.
        #[arg(long)]
        chi_probe: bool,
    },
    /// Partition points by orbit at a truncation level and compare their
    /// polygons.
    LevelExp {
        #[command(flatten)]
        ring: RingArgs,
        #[command(flatten)]
        shape: ShapeArgs,
        /// Truncation level to partition at.
        #[arg(long, default_value_t = 1)]
        level: u32,
        /// Points file (JSON list of matrices); exhaustive over the full
        /// point group when omitted.
        #[arg(long)]
        points_file: Option<String>,
    },
    /// Run the verification suite and emit a pass/fail table.
    Verify {
        /// Seed for the randomized polygon corpus.
        #[arg(long, default_value_t = 0x5eed_cafe)]
        rng_seed: u64,
    },
}

#[derive(Subcommand)]
enum KraftCommand {
    /// Level-1 automorphism and orbit dimensions of a datum.
    Gamma {
        /// Codimension of a single isoclinic datum (with --minimal).
        #[arg(long)]
        c: Option<u64>,
        /// Dimension of a single isoclinic datum (with --minimal).
        #[arg(long)]
        d: Option<u64>,
        /// Use the isoclinic datum for (c, d).
        #[arg(long)]
        minimal: bool,
        /// Direct sum of isoclinic data, as c/d pairs: 2/1,1/1.
        #[arg(long)]
        blocks: Option<String>,
        /// Explicit permutation as a 1-indexed image list: 2,3,1.
        #[arg(long)]
        pi: Option<String>,
        /// Height r (with --pi).
        #[arg(long)]
        r: Option<usize>,
        /// Cut c (with --pi).
        #[arg(long)]
        cut: Option<usize>,
    },
}

fn parse_blocks(s: &str) -> Result<Vec<(u64, u64)>, Error> {
    s.split(',')
        .map(|part| {
            let mut it = part.trim().split('/');
            let c = it
                .next()
                .and_then(|x| x.parse().ok())
                .ok_or_else(|| Error::BadInput(format!("bad block '{}'", part)))?;
            let d = it
                .next()
                .and_then(|x| x.parse().ok())
                .ok_or_else(|| Error::BadInput(format!("bad block '{}'", part)))?;
            if it.next().is_some() {
                return Err(Error::BadInput(format!("bad block '{}'", part)));
            }
            Ok((c, d))
        })
        .collect()
}

fn load_matrix(path: &str) -> Result<MatrixW, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::BadInput(format!("cannot read {}: {}", path, e)))?;
    serde_json::from_str(&text).map_err(|e| Error::BadInput(format!("bad matrix JSON: {}", e)))
}

fn base_matrix(
    shape: &ShapeArgs,
    ring: &WittRing,
    symplectic: bool,
) -> Result<MatrixW, Error> {
    if let Some(path) = &shape.base_file {
        return load_matrix(path);
    }
    let r = shape.c + shape.d;
    Ok(match shape.base {
        BasePreset::Ordinary | BasePreset::Identity => MatrixW::identity(ring, r),
        BasePreset::Minimal => {
            let datum = minimal_datum(shape.c as u64, shape.d as u64)?;
            let pi0: Vec<usize> = datum.pi_one_indexed().iter().map(|&x| x - 1).collect();
            MatrixW::permutation(ring, &pi0)
        }
        BasePreset::Supersingular => {
            if r != 2 {
                return Err(Error::BadInput(
                    "the supersingular preset is the height-2 swap; use --base-file otherwise"
                        .into(),
                ));
            }
            if symplectic {
                let mut s = MatrixW::zero(ring, 2, 2);
                s.set(0, 1, ring.from_integer(-1));
                s.set(1, 0, ring.one());
                s
            } else {
                MatrixW::permutation(ring, &[1, 0])
            }
        }
    })
}

fn big_to_value(x: &num::BigUint) -> Value {
    match u64::try_from(x) {
        Ok(v) => json!(v),
        Err(_) => json!(x.to_string()),
    }
}

fn run(cli: &Cli) -> Result<(Value, bool), Error> {
    let mut all_passed = true;
    let report = match &cli.command {
        Command::Kraft { sub } => {
            let KraftCommand::Gamma {
                c,
                d,
                minimal,
                blocks,
                pi,
                r,
                cut,
            } = sub;
            let datum: KraftDatum = if let Some(pi) = pi {
                let images: Vec<usize> = pi
                    .split(',')
                    .map(|x| x.trim().parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| Error::BadInput(format!("bad permutation: {}", e)))?;
                let r = r.ok_or_else(|| Error::BadInput("--pi requires --r".into()))?;
                let cut = cut.ok_or_else(|| Error::BadInput("--pi requires --cut".into()))?;
                KraftDatum::new(r, cut, &images)?
            } else if let Some(blocks) = blocks {
                let blocks = parse_blocks(blocks)?;
                let mut data = blocks
                    .iter()
                    .map(|&(c, d)| minimal_datum(c, d))
                    .collect::<Result<Vec<_>, _>>()?;
                let first = data.remove(0);
                data.into_iter().fold(first, |acc, next| direct_sum(&acc, &next))
            } else if *minimal {
                let c = c.ok_or_else(|| Error::BadInput("--minimal requires --c".into()))?;
                let d = d.ok_or_else(|| Error::BadInput("--minimal requires --d".into()))?;
                minimal_datum(c, d)?
            } else {
                return Err(Error::BadInput(
                    "choose one of --minimal, --blocks, or --pi".into(),
                ));
            };
            json!({
                "datum": datum,
                "gamma1": datum.gamma1(),
                "dim_orbit1": datum.dim_orbit1(),
                "a_number": datum.a_number(),
            })
        }
        Command::Traverso { blocks } => {
            let blocks = parse_blocks(blocks)?;
            let np = NewtonPolygon::new(blocks)?;
            let codim = traverso_codim(&np)?;
            let s = specializing_height(&np)?;
            let level = traverso_level(np.codimension(), np.dimension())?;
            json!({
                "codim": codim,
                "s_D": s,
                "level": level,
                "slopes": np
                    .blocks()
                    .iter()
                    .map(|&(c, d)| format!("{}/{}", d, c + d))
                    .collect::<Vec<_>>(),
                "polygon": np,
            })
        }
        Command::Truncation {
            ring,
            shape,
            g_file,
            with_np,
        } => {
            let w = WittRing::with_default_modulus(ring.p, ring.n, ring.m)?;
            let s = base_matrix(shape, &w, false)?;
            let g = match g_file {
                Some(path) => load_matrix(path)?,
                None => MatrixW::identity(&w, shape.c + shape.d),
            };
            let t = bt_core::dieudonne::make_truncation(shape.c, shape.d, &w, s, g)?;
            let mut doc = json!({
                "c": t.codimension(),
                "d": t.dimension(),
                "ring": w.descriptor(),
                "S": t.base(),
                "g": t.twist(),
                "frobenius": t.frobenius_matrix(),
                "verschiebung": t.verschiebung_matrix(),
            });
            if *with_np {
                match np_from_matrix(&t) {
                    Ok(np) => doc["newton_polygon"] = json!(np),
                    Err(Error::InsufficientPrecision { uncertain }) => {
                        doc["newton_polygon"] = json!({ "insufficient_precision": uncertain });
                    }
                    Err(e) => return Err(e),
                }
            }
            doc
        }
        Command::Orbit {
            ring,
            shape,
            seed,
            symplectic,
        } => {
            let w = WittRing::with_default_modulus(ring.p, ring.n, ring.m)?;
            let s = base_matrix(shape, &w, *symplectic)?;
            let sp = symplectic.then(|| SymplecticDescriptor::standard(&w, shape.d));
            let ctx = ActionContext::new(shape.c, shape.d, &w, s, sp)?;
            let g0 = if seed == "identity" {
                MatrixW::identity(&w, shape.c + shape.d)
            } else {
                load_matrix(seed)?
            };
            let orbit = orbit_bfs(&ctx, &g0, cli.budget_orbit, false)?;
            let stab = stabilizer(
                &ctx,
                &g0,
                StabilizerMode::Count,
                cli.budget_orbit,
                cli.budget_enum,
            )?;
            json!({
                "context": {
                    "p": ring.p, "n": ring.n, "m": ring.m,
                    "c": shape.c, "d": shape.d,
                    "symplectic": symplectic,
                    "base": ctx.base(),
                },
                "seed": g0,
                "orbit_size": orbit.size,
                "canonical": orbit.canonical,
                "stabilizer_count": big_to_value(&stab.count),
                "group_order": big_to_value(&group_order(&ctx)),
            })
        }
        Command::Aut {
            ring,
            shape,
            g_file,
            chi_probe,
        } => {
            let w = WittRing::with_default_modulus(ring.p, ring.n, ring.m)?;
            let s = base_matrix(shape, &w, false)?;
            let g = match g_file {
                Some(path) => load_matrix(path)?,
                None => MatrixW::identity(&w, shape.c + shape.d),
            };
            let t: DieudonneTruncation =
                bt_core::dieudonne::make_truncation(shape.c, shape.d, &w, s, g)?;
            let hom = hom_module(&t, &t)?;
            let mut doc = json!({
                "aut_count": aut_count(&t, cli.budget_enum)?,
                "end_log_p_cardinality": hom.module.log_p_cardinality(),
                "chi_image_count": chi_image_count(&t, cli.budget_enum)?,
            });
            if *chi_probe {
                if g_file.is_some() {
                    return Err(Error::BadInput(
                        "--chi-probe rebuilds the truncation across residue degrees; presets only"
                            .into(),
                    ));
                }
                let mut counts = Vec::new();
                for n in ring.n..ring.n + 3 {
                    let wn = WittRing::with_default_modulus(ring.p, n, ring.m)?;
                    let sn = base_matrix(shape, &wn, false)?;
                    let gn = MatrixW::identity(&wn, shape.c + shape.d);
                    let tn = bt_core::dieudonne::make_truncation(shape.c, shape.d, &wn, sn, gn)?;
                    counts.push((n as u32, chi_image_count(&tn, cli.budget_enum)?));
                }
                let probe = bt_core::experiment::chi_finiteness_probe(ring.p, &counts)?;
                doc["chi_probe"] = json!(probe);
            }
            doc
        }
        Command::LevelExp {
            ring,
            shape,
            level,
            points_file,
        } => {
            if ring.m <= *level {
                return Err(Error::BadInput(
                    "--m must exceed --level for certain slope recovery".into(),
                ));
            }
            let w = WittRing::with_default_modulus(ring.p, ring.n, ring.m)?;
            let s = base_matrix(shape, &w, false)?;
            let ctx = ActionContext::new(shape.c, shape.d, &w, s, None)?;
            let points: Vec<MatrixW> = match points_file {
                Some(path) => {
                    let text = fs::read_to_string(path)
                        .map_err(|e| Error::BadInput(format!("cannot read {}: {}", path, e)))?;
                    serde_json::from_str(&text)
                        .map_err(|e| Error::BadInput(format!("bad points JSON: {}", e)))?
                }
                None => {
                    let r = shape.c + shape.d;
                    let elems: Vec<_> = w
                        .enumerate(EnumerationFilter::All, cli.budget_enum)?
                        .collect();
                    let total = (elems.len() as u128).pow((r * r) as u32);
                    if total > cli.budget_enum as u128 {
                        return Err(Error::EnumerationTooLarge {
                            required: total,
                            cap: cli.budget_enum,
                        });
                    }
                    let mut out = Vec::new();
                    let mut idx = vec![0usize; r * r];
                    loop {
                        let g = MatrixW::from_fn(&w, r, r, |i, j| elems[idx[i * r + j]].clone());
                        if g.is_invertible() {
                            out.push(g);
                        }
                        let mut carry = true;
                        for slot in (0..r * r).rev() {
                            idx[slot] += 1;
                            if idx[slot] < elems.len() {
                                carry = false;
                                break;
                            }
                            idx[slot] = 0;
                        }
                        if carry {
                            break;
                        }
                    }
                    out
                }
            };
            let report = level_experiment(&ctx, &points, *level, cli.budget_orbit)?;
            all_passed = report.violations.is_empty();
            json!({
                "level": report.level,
                "points": points.len(),
                "classes": report.classes.len(),
                "violations": report.violations,
                "minimal_separating_level": report.minimal_separating_level,
                "detail": report,
            })
        }
        Command::Verify { rng_seed } => {
            let cfg = VerifyConfig {
                orbit_cap: cli.budget_orbit,
                enum_cap: cli.budget_enum,
                rng_seed: *rng_seed,
            };
            let results = run_all(&cfg);
            all_passed = results.iter().all(|r| r.passed);
            for r in &results {
                eprintln!(
                    "criterion {:>2} [{}] {} ({} ms)",
                    r.id,
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.millis
                );
            }
            json!({
                "passed": all_passed,
                "criteria": results,
            })
        }
    };
    Ok((report, all_passed))
}

fn flatten_csv(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, val) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{}.{}", prefix, k)
                };
                flatten_csv(&key, val, rows);
            }
        }
        Value::Array(items) => {
            for (i, val) in items.iter().enumerate() {
                flatten_csv(&format!("{}[{}]", prefix, i), val, rows);
            }
        }
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn emit(cli: &Cli, doc: &Value) -> std::io::Result<()> {
    let text = match cli.format {
        Format::Json => format!("{:#}\n", doc),
        Format::Csv => {
            let mut rows = Vec::new();
            flatten_csv("", doc, &mut rows);
            let mut s = String::from("key,value\n");
            for (k, v) in rows {
                s.push_str(&format!("{},{}\n", k, v.replace(',', ";")));
            }
            s
        }
    };
    match &cli.out {
        Some(path) => fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    match run(&cli) {
        Ok((doc, all_passed)) => {
            if emit(&cli, &doc).is_err() {
                eprintln!("error: cannot write output");
                return ExitCode::from(1);
            }
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.exit_class() as u8)
        }
    }
}
