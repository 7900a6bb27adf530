//! Command line front end: matrix decomposition, complex building and
//! checking, GBS classification, endomorphism certificates, DOT exports and
//! the exhaustive sweep drivers.
//!
//! Exit codes: 0 success/pass, 1 fail (link condition violated or a
//! periodic class found), 2 invalid or inapplicable input, 3 internal
//! assertion failure.

use anyhow::{anyhow, bail, Context, Result};
use catsq_core::complexbuilder::{
    build_pe_complex, build_square_complex, classify_case, euler_characteristic, homology_h1,
    vertex_link, ComplexError, PE2Complex,
};
use catsq_core::endo::{analyze, linearity_certificate, Certificate, SearchBounds};
use catsq_core::freegroup::Endomorphism;
use catsq_core::gbs::{classify, GbsGraph};
use catsq_core::linkcheck::check_npc;
use catsq_core::matdecomp::{decompose, to_aut_word, AutWord, Mat2Z};
use catsq_core::sweeps;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::io::Read;

#[derive(Parser)]
#[command(
    name = "catsq",
    version,
    about = "Square complexes, GBS classification and linearity certificates for free-by-cyclic groups"
)]
struct Cli {
    /// Worker threads for sweeps and searches; output is independent of it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output format for the main result object.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Human,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a GL2(Z) matrix into the -I/F/L/R semigroup and print the
    /// matching automorphism word.
    DecomposeMatrix { input: String },
    /// Build the square complex (or the piecewise-Euclidean one) for an
    /// automorphism word or matrix and run the link condition.
    BuildComplex {
        input: String,
        /// Build the piecewise-Euclidean complex instead of the square one.
        #[arg(long)]
        pe: bool,
    },
    /// Check the link condition of a complex given as JSON.
    CheckNpc {
        input: String,
        /// Also recompute each girth in floating point with this tolerance,
        /// flagging borderline vertices; the verdict stays exact.
        #[arg(long)]
        float_tolerance: Option<f64>,
    },
    /// Classify a generalized Baumslag-Solitar graph.
    ClassifyGbs { input: String },
    /// Analyze an endomorphism and emit its certificate.
    AnalyzeEndo {
        input: String,
        #[arg(long, default_value_t = 8)]
        maxlen: usize,
        #[arg(long, default_value_t = 3)]
        maxpow: u32,
    },
    /// Export DOT: the 1-skeleton of a complex, its vertex links, or a GBS
    /// graph.
    ExportDot {
        input: String,
        #[arg(long, value_enum, default_value_t = DotKind::Complex)]
        what: DotKind,
    },
    /// Exhaustive and randomized verification sweeps.
    Sweep {
        #[command(subcommand)]
        which: SweepCommand,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DotKind {
    Complex,
    Links,
    Gbs,
}

#[derive(Subcommand)]
enum SweepCommand {
    /// Link condition, Euler characteristic and homology across all
    /// automorphism words up to a body length.
    Npc(NpcArgs),
    /// Exhaustive GBS classifier checks.
    Gbs(GbsArgs),
    /// Exact girth against brute-force circuit enumeration.
    Girth(RandomArgs),
    /// Matrix decomposition round-trips on random products.
    Matrices(RandomArgs),
    /// Uniqueness of row-subtraction sequences.
    Rows(RowsArgs),
}

#[derive(Args)]
struct NpcArgs {
    #[arg(long, default_value_t = 6)]
    max_body: usize,
}

#[derive(Args)]
struct GbsArgs {
    #[arg(long, default_value_t = 3)]
    max_vertices: usize,
    #[arg(long, default_value_t = 3)]
    max_edges: usize,
    #[arg(long, default_value_t = 3)]
    max_label: i64,
}

#[derive(Args)]
struct RandomArgs {
    #[arg(long, default_value_t = 500)]
    count: usize,
    /// Overrides the TOOLKIT_SEED environment variable.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RowsArgs {
    #[arg(long, default_value_t = 20)]
    sum_bound: i64,
}

fn read_input(input: &str) -> Result<String> {
    let trimmed = input.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return Ok(input.to_string());
    }
    if input == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        return Ok(buf);
    }
    std::fs::read_to_string(input).with_context(|| format!("reading {input}"))
}

/// Accepts a compact word directly, or reads the input (file/stdin/inline
/// JSON) and parses a word or matrix from it.
fn parse_aut_word_input(input: &str) -> Result<AutWord> {
    if let Some(w) = AutWord::parse_compact(input.trim()) {
        return Ok(w);
    }
    parse_aut_word(&read_input(input)?)
}

fn parse_aut_word(text: &str) -> Result<AutWord> {
    let trimmed = text.trim();
    if let Some(w) = AutWord::parse_compact(trimmed) {
        return Ok(w);
    }
    if trimmed.starts_with('{') {
        let w: AutWord = serde_json::from_str(trimmed).context("automorphism word JSON")?;
        if w.body.is_empty() {
            bail!("automorphism word must have a nonempty body");
        }
        return Ok(w);
    }
    if trimmed.starts_with('[') {
        let m: Mat2Z = serde_json::from_str(trimmed).context("matrix JSON")?;
        let dec = decompose(&m)?;
        return Ok(to_aut_word(&dec));
    }
    Err(anyhow!(
        "expected LLR.psi2-style word, word JSON, or matrix JSON"
    ))
}

fn emit(format: Format, value: &serde_json::Value, human: impl FnOnce() -> String) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(value).unwrap()),
        Format::Human => println!("{}", human()),
    }
}

fn complex_summary(x: &PE2Complex, word: Option<&AutWord>) -> serde_json::Value {
    let report = check_npc(x);
    serde_json::json!({
        "case": word.map(classify_case),
        "vertices": x.vertex_count(),
        "edges": x.edges.len(),
        "cells": x.cells.len(),
        "degenerate_cells": x.degenerate_cell_count(),
        "euler_characteristic": euler_characteristic(x),
        "h1": homology_h1(x),
        "npc": report,
        "complex": x,
    })
}

fn run() -> Result<i32> {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        // rayon reads this on first use of the global pool
        std::env::set_var("RAYON_NUM_THREADS", jobs.to_string());
    }
    match cli.command {
        Command::DecomposeMatrix { input } => {
            let text = read_input(&input)?;
            let m: Mat2Z = serde_json::from_str(text.trim()).context("matrix JSON")?;
            let dec = match decompose(&m) {
                Ok(dec) => dec,
                Err(e) => {
                    eprintln!("{e}");
                    return Ok(2);
                }
            };
            let word = to_aut_word(&dec);
            let value = serde_json::json!({
                "input": m,
                "sign": dec.sign,
                "flip": dec.flip,
                "conjugator": dec.conjugator,
                "lr_word": dec.lr_word,
                "terminal": dec.terminal,
                "verification_product": dec.word_product(),
                "aut_word": word,
                "aut_word_compact": word.compact(),
            });
            emit(cli.format, &value, || {
                format!(
                    "{} = C^-1 ({}) C with C = {}, sign {}, flip {}; word {}",
                    m,
                    dec.word_product(),
                    dec.conjugator,
                    dec.sign,
                    dec.flip,
                    word.compact()
                )
            });
            Ok(0)
        }
        Command::BuildComplex { input, pe } => {
            let word = parse_aut_word_input(&input)?;
            let built = if pe {
                build_pe_complex(&word)
            } else {
                build_square_complex(&word)
            };
            let x = match built {
                Ok(x) => x,
                Err(ComplexError::DegenerateCylinder) => {
                    eprintln!("{}", ComplexError::DegenerateCylinder);
                    return Ok(3);
                }
                Err(e) => {
                    eprintln!("{e}");
                    return Ok(2);
                }
            };
            let value = complex_summary(&x, Some(&word));
            let pass = value["npc"]["pass"].as_bool().unwrap_or(false);
            emit(cli.format, &value, || {
                format!(
                    "{}: case {:?}, chi {}, H1 {}, link condition {}",
                    word.compact(),
                    classify_case(&word),
                    euler_characteristic(&x),
                    homology_h1(&x),
                    if pass { "PASS" } else { "FAIL" }
                )
            });
            Ok(if pass { 0 } else { 1 })
        }
        Command::CheckNpc {
            input,
            float_tolerance,
        } => {
            let text = read_input(&input)?;
            let x: PE2Complex = serde_json::from_str(&text).context("complex JSON")?;
            x.validate().map_err(|e| anyhow!("{e}"))?;
            let report = check_npc(&x);
            let pass = report.pass;
            let mut value = serde_json::to_value(&report)?;
            if let Some(tol) = float_tolerance {
                let borderline: Vec<serde_json::Value> = (0..x.vertex_count())
                    .filter_map(|v| {
                        let link = vertex_link(&x, v);
                        let edges: Vec<(usize, usize, f64)> = link
                            .edges
                            .iter()
                            .map(|e| (e.u, e.v, e.weight.to_f64()))
                            .collect();
                        catsq_core::linkcheck::weighted_girth_f64(&edges, link.node_count(), tol)
                            .map(|(girth, flagged)| {
                                serde_json::json!({
                                    "vertex": v,
                                    "float_girth": girth,
                                    "borderline": flagged,
                                })
                            })
                    })
                    .collect();
                value["float_check"] = serde_json::json!({
                    "tolerance": tol,
                    "vertices": borderline,
                });
            }
            emit(cli.format, &value, || {
                report
                    .vertices
                    .iter()
                    .map(|v| {
                        format!(
                            "{}: girth {} -> {}",
                            v.label,
                            v.girth.map_or("inf".to_string(), |g| g.to_string()),
                            if v.pass { "pass" } else { "FAIL" }
                        )
                    })
                    .collect::<Vec<_>>()
                    .join("\n")
            });
            Ok(if pass { 0 } else { 1 })
        }
        Command::ClassifyGbs { input } => {
            let text = read_input(&input)?;
            let g: GbsGraph = serde_json::from_str(&text).context("GBS graph JSON")?;
            let out = match classify(&g) {
                Ok(out) => out,
                Err(e) => {
                    eprintln!("{e}");
                    return Ok(2);
                }
            };
            emit(cli.format, &serde_json::to_value(&out)?, || {
                format!("{out:?}")
            });
            Ok(0)
        }
        Command::AnalyzeEndo {
            input,
            maxlen,
            maxpow,
        } => {
            if maxlen < 1 || maxpow < 1 {
                bail!("search bounds must be at least 1");
            }
            let text = read_input(&input)?;
            let theta: Endomorphism = serde_json::from_str(&text).context("endomorphism JSON")?;
            let bounds = SearchBounds { maxlen, maxpow };
            let cert = match linearity_certificate(&theta, bounds) {
                Ok(cert) => cert,
                Err(e) => {
                    eprintln!("{e}");
                    return Ok(2);
                }
            };
            let report = analyze(&theta, bounds);
            let value = serde_json::json!({
                "endomorphism": theta,
                "analysis": report,
                "certificate": cert,
            });
            emit(cli.format, &value, || match &cert {
                Certificate::WordHyperbolicIrreducibleLinear { .. } => {
                    "word hyperbolic, irreducible, linear over Z".to_string()
                }
                Certificate::PeriodicFound { witness } => format!(
                    "periodic class: theta^{}({}) ~ w^{}",
                    witness.power_i, witness.word, witness.power_j
                ),
                Certificate::NotApplicable { reasons, .. } => {
                    format!("not applicable: {}", reasons.join("; "))
                }
            });
            Ok(cert.exit_code())
        }
        Command::ExportDot { input, what } => {
            match what {
                DotKind::Gbs => {
                    let text = read_input(&input)?;
                    let g: GbsGraph = serde_json::from_str(&text).context("GBS graph JSON")?;
                    g.validate().map_err(|e| anyhow!("{e}"))?;
                    print!("{}", g.to_dot());
                }
                DotKind::Complex | DotKind::Links => {
                    let x: PE2Complex = if AutWord::parse_compact(input.trim()).is_some() {
                        let word = parse_aut_word_input(&input)?;
                        build_square_complex(&word).map_err(|e| anyhow!("{e}"))?
                    } else {
                        let text = read_input(&input)?;
                        if text.trim_start().starts_with('{') && text.contains("\"cells\"") {
                            let x: PE2Complex =
                                serde_json::from_str(&text).context("complex JSON")?;
                            x.validate().map_err(|e| anyhow!("{e}"))?;
                            x
                        } else {
                            let word = parse_aut_word(&text)?;
                            build_square_complex(&word).map_err(|e| anyhow!("{e}"))?
                        }
                    };
                    if what == DotKind::Complex {
                        print!("{}", x.to_dot());
                    } else {
                        for v in 0..x.vertex_count() {
                            let link = vertex_link(&x, v);
                            print!("{}", link.to_dot(&format!("link_{}", x.vertex_label(v))));
                        }
                    }
                }
            }
            Ok(0)
        }
        Command::Sweep { which } => {
            let report = match which {
                SweepCommand::Npc(args) => sweeps::npc_sweep(args.max_body, true),
                SweepCommand::Gbs(args) => sweeps::gbs_exhaustive_sweep(
                    args.max_vertices,
                    args.max_edges,
                    args.max_label,
                    true,
                ),
                SweepCommand::Girth(args) => {
                    let seed = args.seed.unwrap_or_else(|| sweeps::seed_from_env(20250808));
                    sweeps::girth_oracle_sweep(args.count, seed, true)
                }
                SweepCommand::Matrices(args) => {
                    let seed = args.seed.unwrap_or_else(|| sweeps::seed_from_env(20250808));
                    sweeps::matrix_roundtrip_sweep(args.count, 12, seed, true)
                }
                SweepCommand::Rows(args) => {
                    sweeps::row_subtraction_uniqueness_sweep(args.sum_bound, true)
                }
            };
            let pass = report.pass();
            emit(cli.format, &serde_json::to_value(&report)?, || {
                format!(
                    "{}: {} cases, {} -> {}",
                    report.name,
                    report.cases,
                    if pass {
                        "no failures".to_string()
                    } else {
                        format!("{} failures", report.failures.len())
                    },
                    if pass { "PASS" } else { "FAIL" }
                )
            });
            Ok(if pass { 0 } else { 1 })
        }
    }
}

fn main() {
    match run() {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}
