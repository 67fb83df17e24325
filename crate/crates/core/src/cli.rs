//! Command-line surface. `run` parses arguments, merges the configuration
//! (flags over config file over defaults) and returns the exit code with the
//! rendered output, so the binary is a thin wrapper.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::charlattice::{character_lattice, verify_symmetry_identification};
use crate::complex::{
    check_admissible_complex, check_limits, check_smooth_complex, enumerate_isotropic_orbits, induce_decomposition,
    ord_mult_strata, refine_complex, strata_poset, ComplexDecomposition, StrataPoset,
};
use crate::error::Error;
use crate::flags::{admissible_triples, enumerate_positions, parahoric_chain, ParahoricType, PositionInvariant};
use crate::polyhedral::fan::gl_generators;
use crate::polyhedral::{hilbert_basis, sym_dim, verify_hilbert_basis, Decomposition, IntegralStructure, RationalCone};
use crate::sweep::{run_sweep, SweepConfig, FAULT_ENV};
use crate::weyl::bruhat_count;

#[derive(Parser, Debug)]
#[command(name = "parahoric", version, about = "Boundary combinatorics of parahoric-level Siegel compactifications")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Relative positions 𝒲_r with the Bruhat cross-check.
    Weyl,
    /// The parahoric lattice chain.
    Chain,
    /// Character lattices S^w for every w of a given rank.
    Charlattice,
    /// Hilbert bases of stratum cones (or of --rays) with bounded verification.
    Hilbert,
    /// Smoothness table of the induced decomposition.
    Smooth,
    /// Per-cell smooth refinement with verification.
    Refine,
    /// Isotropic summand orbits and bounded admissibility.
    Complex,
    /// The strata poset as JSON or DOT.
    Strata,
    /// Strata flagged ordinary-multiplicative.
    Ordmult,
    /// The acceptance sweep.
    Sweep,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Dot,
}

#[derive(Args, Debug, Default)]
pub struct Opts {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub g: Option<usize>,
    #[arg(long, global = true)]
    pub p: Option<u32>,
    /// Parahoric type, e.g. `1,2`.
    #[arg(long = "D", global = true, value_delimiter = ',')]
    pub d: Option<Vec<usize>>,
    #[arg(long, global = true)]
    pub r: Option<usize>,
    /// `principal` or a JSON file `{"g": .., "cones": [[ray, ..], ..]}`.
    #[arg(long, global = true)]
    pub decomposition: Option<String>,
    /// Rays of a cone in Sym², `;`-separated, entries `,`-separated.
    #[arg(long, global = true)]
    pub rays: Option<String>,
    #[arg(long, global = true)]
    pub hilbert_bound: Option<u32>,
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    #[arg(long, global = true)]
    pub coverage: Option<i64>,
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    g: Option<usize>,
    p: Option<u32>,
    #[serde(rename = "D")]
    d: Option<Vec<usize>>,
    r: Option<usize>,
    decomposition: Option<String>,
    format: Option<Format>,
    output: Option<PathBuf>,
    threads: Option<usize>,
    seed: Option<u64>,
    #[serde(default)]
    bounds: FileBounds,
    #[serde(default)]
    sweep: FileSweep,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileBounds {
    hilbert: Option<u32>,
    depth: Option<usize>,
    coverage: Option<i64>,
    budget: Option<usize>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileSweep {
    square_instances: Option<usize>,
    square_max_order: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub g: usize,
    pub p: u32,
    pub t: ParahoricType,
    pub r: Option<usize>,
    pub decomposition: String,
    pub rays: Option<String>,
    pub hilbert_bound: u32,
    pub depth: usize,
    pub coverage: i64,
    pub budget: usize,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub sweep: SweepConfig,
}

/// A failure with its exit code: 1 for computational mismatches, 2 for usage.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: 2, message: msg.into() }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Shape(_) | Error::Invalid(_) => 2,
            Error::Mismatch(_) | Error::Budget(_) | Error::Internal(_) => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

impl RunConfig {
    pub fn resolve(opts: &Opts) -> Result<RunConfig, Failure> {
        let file: FileConfig = match &opts.config {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
                toml::from_str(&text).map_err(|e| usage(format!("invalid config {}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let g = opts.g.or(file.g).unwrap_or(1);
        let p = opts.p.or(file.p).unwrap_or(2);
        let d = opts.d.clone().or(file.d).unwrap_or_else(|| vec![g]);
        if g == 0 {
            return Err(usage("g must be at least 1"));
        }
        if !crate::fp::is_prime(u64::from(p)) {
            return Err(usage(format!("p = {p} is not prime")));
        }
        let t = ParahoricType::new(g, d).map_err(|e| usage(e.to_string()))?;
        let r = opts.r.or(file.r);
        if r.is_some_and(|r| r > g) {
            return Err(usage("r must not exceed g"));
        }
        let hilbert_bound = opts.hilbert_bound.or(file.bounds.hilbert).unwrap_or(8);
        let depth = opts.depth.or(file.bounds.depth).unwrap_or(2);
        let coverage = opts.coverage.or(file.bounds.coverage).unwrap_or(2);
        let budget = opts.budget.or(file.bounds.budget).unwrap_or(500);
        if hilbert_bound == 0 || depth == 0 || coverage <= 0 || budget == 0 {
            return Err(usage("verification bounds must be positive"));
        }
        let threads = opts.threads.or(file.threads);
        if threads == Some(0) {
            return Err(usage("--threads must be positive"));
        }
        let defaults = SweepConfig::default();
        let fault = std::env::var(FAULT_ENV).ok().and_then(|v| v.parse().ok());
        let sweep = SweepConfig {
            seed: opts.seed.or(file.seed).unwrap_or(defaults.seed),
            square_instances: file.sweep.square_instances.unwrap_or(defaults.square_instances),
            square_max_order: file.sweep.square_max_order.unwrap_or(defaults.square_max_order),
            hilbert_bound,
            refine_budget: budget,
            fault,
        };
        Ok(RunConfig {
            g,
            p,
            t,
            r,
            decomposition: opts.decomposition.clone().or(file.decomposition).unwrap_or_else(|| "principal".into()),
            rays: opts.rays.clone(),
            hilbert_bound,
            depth,
            coverage,
            budget,
            format: opts.format.or(file.format).unwrap_or(Format::Json),
            output: opts.output.clone().or(file.output),
            threads,
            sweep,
        })
    }

    fn ranks(&self) -> Vec<usize> {
        match self.r {
            Some(r) => vec![r],
            None => (0..=self.g).collect(),
        }
    }
}

#[derive(Deserialize)]
struct DecompositionFile {
    g: usize,
    #[serde(with = "crate::json::bigint_vecs_list")]
    cones: Vec<Vec<Vec<BigInt>>>,
}

fn load_decomposition(cfg: &RunConfig) -> Result<Decomposition, Failure> {
    if cfg.decomposition == "principal" {
        return Ok(Decomposition::principal(cfg.g)?);
    }
    let text = std::fs::read_to_string(&cfg.decomposition)
        .map_err(|e| usage(format!("cannot read {}: {e}", cfg.decomposition)))?;
    let f: DecompositionFile =
        serde_json::from_str(&text).map_err(|e| usage(format!("invalid decomposition file: {e}")))?;
    if f.g != cfg.g {
        return Err(usage(format!("decomposition is for g = {}, run is for g = {}", f.g, cfg.g)));
    }
    let cones =
        f.cones.into_iter().map(|rays| RationalCone::new(sym_dim(f.g), rays)).collect::<crate::Result<Vec<_>>>()?;
    Ok(Decomposition::new(f.g, cones, gl_generators(f.g))?)
}

fn parse_rays(s: &str, g: usize) -> Result<Vec<Vec<BigInt>>, Failure> {
    let n = sym_dim(g);
    s.split(';')
        .map(|ray| {
            let v: Vec<BigInt> = ray
                .split(',')
                .map(|x| x.trim().parse::<BigInt>().map_err(|_| usage(format!("bad integer {x:?} in --rays"))))
                .collect::<Result<_, _>>()?;
            if v.len() != n {
                return Err(usage(format!("rays must have {n} entries for g = {g}")));
            }
            Ok(v)
        })
        .collect()
}

fn w_json(w: &PositionInvariant) -> Value {
    json!({ "r": w.r, "m": w.m, "a": w.a, "e": w.e, "label": w.label() })
}

fn matrix_rows(m: &crate::lattice::IntMatrix) -> Value {
    Value::Array(m.row_vecs().iter().map(|r| crate::json::vec_to_value(r)).collect())
}

fn header(cfg: &RunConfig) -> Value {
    json!({ "g": cfg.g, "p": cfg.p, "D": cfg.t.d })
}

fn with_header(cfg: &RunConfig, key: &str, body: Value) -> Value {
    let mut h = header(cfg);
    h[key] = body;
    h
}

fn cmd_weyl(cfg: &RunConfig) -> Result<Value, Failure> {
    let mut ranks = Vec::new();
    for r in cfg.ranks() {
        let ws = enumerate_positions(cfg.g, cfg.p, r, &cfg.t)?;
        let bruhat = bruhat_count(cfg.g, r, &cfg.t);
        if bruhat != ws.len() {
            return Err(
                Error::Mismatch(format!("r = {r}: {} orbits but {bruhat} Bruhat double cosets", ws.len())).into()
            );
        }
        ranks.push(json!({ "r": r, "count": ws.len(), "bruhat": bruhat, "invariants": ws.iter().map(w_json).collect::<Vec<_>>() }));
    }
    Ok(with_header(cfg, "ranks", Value::Array(ranks)))
}

fn cmd_chain(cfg: &RunConfig) -> Result<Value, Failure> {
    let chain = parahoric_chain(&cfg.t, cfg.p)?;
    let members: Vec<Value> =
        (0..chain.len()).map(|i| json!({ "index": i, "columns": matrix_rows(&chain.member(i).transpose()) })).collect();
    Ok(with_header(cfg, "members", Value::Array(members)))
}

fn cmd_charlattice(cfg: &RunConfig) -> Result<Value, Failure> {
    let mut out = Vec::new();
    for r in cfg.ranks() {
        for w in admissible_triples(cfg.g, r, &cfg.t) {
            let cl = character_lattice(&w, cfg.p)?;
            let (basis, den) = cl.dual_basis()?;
            out.push(json!({
                "w": w_json(&w),
                "rank": cl.rank,
                "free": cl.free,
                "index": crate::json::int_to_value(&cl.index),
                "symmetry_identifications": verify_symmetry_identification(&cl),
                "dual_basis": matrix_rows(&basis),
                "denominator": crate::json::int_to_value(&den),
            }));
        }
    }
    Ok(with_header(cfg, "lattices", Value::Array(out)))
}

fn complex(cfg: &RunConfig) -> Result<(ComplexDecomposition, StrataPoset), Failure> {
    check_limits(cfg.g, cfg.p)?;
    let sigma = load_decomposition(cfg)?;
    let sf = induce_decomposition(&sigma, cfg.p, &cfg.t)?;
    let poset = strata_poset(&sf)?;
    Ok((sf, poset))
}

fn hilbert_entry(label: Value, cone: &RationalCone, s: &IntegralStructure, bound: u32) -> Result<Value, Failure> {
    let hb = hilbert_basis(cone, s);
    let check = verify_hilbert_basis(&s.cone_in_dual(cone).rays, &hb, bound);
    if !(check.complete && check.minimal) {
        return Err(Error::Mismatch(format!(
            "Hilbert basis of {:?} fails verification: {:?}",
            cone.rays, check.witnesses
        ))
        .into());
    }
    Ok(json!({
        "cone": label,
        "rays": serde_json::to_value(cone).expect("cone serializes")["rays"].clone(),
        "elements": hb.elements.iter().map(|e| crate::json::vec_to_value(e)).collect::<Vec<_>>(),
        "check": serde_json::to_value(&check).expect("check serializes"),
    }))
}

fn cmd_hilbert(cfg: &RunConfig) -> Result<Value, Failure> {
    let mut out = Vec::new();
    if let Some(rays) = &cfg.rays {
        let cone = RationalCone::new(sym_dim(cfg.g), parse_rays(rays, cfg.g)?)?;
        out.push(hilbert_entry(
            json!("input"),
            &cone,
            &IntegralStructure::standard(sym_dim(cfg.g)),
            cfg.hilbert_bound,
        )?);
    } else {
        let (sf, poset) = complex(cfg)?;
        for n in poset.nodes.iter().filter(|n| n.r > 0) {
            let cell = sf.cells.iter().find(|c| c.orbit.coords == n.summand).expect("node cell");
            for (name, s) in [("Sym2", IntegralStructure::standard(sym_dim(n.r))), ("S^w", cell.structure.clone())] {
                out.push(hilbert_entry(
                    json!({ "node": n.id, "w": n.w.label(), "structure": name }),
                    &n.cone,
                    &s,
                    cfg.hilbert_bound,
                )?);
            }
        }
    }
    Ok(with_header(cfg, "cones", Value::Array(out)))
}

fn cmd_smooth(cfg: &RunConfig) -> Result<Value, Failure> {
    let (sf, poset) = complex(cfg)?;
    let table = check_smooth_complex(&sf, &poset);
    Ok(with_header(cfg, "table", serde_json::to_value(&table).expect("table serializes")))
}

fn cmd_refine(cfg: &RunConfig) -> Result<Value, Failure> {
    let (sf, poset) = complex(cfg)?;
    let cells = refine_complex(&sf, &poset, cfg.budget)?;
    let ok = cells.iter().all(|c| c.check.refines && c.check.smooth && c.check.support_preserved);
    let body = json!({
        "verified": ok,
        "cells": cells.iter().map(|c| json!({
            "summand": c.summand.iter().map(|j| j + 1).collect::<Vec<_>>(),
            "w": w_json(&c.w),
            "steps": serde_json::to_value(&c.refinement.steps).expect("steps serialize"),
            "output": serde_json::to_value(&c.refinement.output.cones).expect("cones serialize"),
            "check": serde_json::to_value(&c.check).expect("check serializes"),
        })).collect::<Vec<_>>(),
    });
    if !ok {
        return Err(Error::Mismatch(format!("refinement verification failed: {body}")).into());
    }
    Ok(with_header(cfg, "refinement", body))
}

fn cmd_complex(cfg: &RunConfig) -> Result<Value, Failure> {
    check_limits(cfg.g, cfg.p)?;
    let sigma = load_decomposition(cfg)?;
    let mut orbits = Vec::new();
    for r in cfg.ranks() {
        for o in enumerate_isotropic_orbits(cfg.g, cfg.p, &cfg.t, r)? {
            orbits.push(json!({
                "r": r,
                "w": w_json(&o.w),
                "summand": o.coords.iter().map(|j| j + 1).collect::<Vec<_>>(),
                "canonical": matrix_rows(&o.rep.canonical),
                "size_mod_p": o.size,
                "ord_mult": o.ord_mult,
            }));
        }
    }
    let sf = induce_decomposition(&sigma, cfg.p, &cfg.t)?;
    let adm = check_admissible_complex(&sf, cfg.depth, cfg.coverage)?;
    let mut out = header(cfg);
    out["orbits"] = Value::Array(orbits);
    out["admissibility"] = serde_json::to_value(&adm).expect("report serializes");
    if !adm.admissible {
        return Err(Failure {
            code: 1,
            message: format!("decomposition is not admissible: {}", adm.violations.join("; ")),
        });
    }
    Ok(out)
}

fn cmd_ordmult(cfg: &RunConfig) -> Result<Value, Failure> {
    let (_, poset) = complex(cfg)?;
    let nodes: Vec<Value> = ord_mult_strata(&poset)
        .into_iter()
        .map(|i| {
            let n = &poset.nodes[i];
            json!({ "id": n.id, "r": n.r, "w": w_json(&n.w), "dim": n.dim, "summand": n.summand.iter().map(|j| j + 1).collect::<Vec<_>>() })
        })
        .collect();
    Ok(with_header(cfg, "ord_mult", Value::Array(nodes)))
}

fn render(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json renders") + "\n"
}

fn execute(command: Command, cfg: &RunConfig) -> Result<String, Failure> {
    if cfg.format == Format::Dot && command != Command::Strata {
        return Err(usage("DOT output is only available for `strata`"));
    }
    let value = match command {
        Command::Weyl => cmd_weyl(cfg)?,
        Command::Chain => cmd_chain(cfg)?,
        Command::Charlattice => cmd_charlattice(cfg)?,
        Command::Hilbert => cmd_hilbert(cfg)?,
        Command::Smooth => cmd_smooth(cfg)?,
        Command::Refine => cmd_refine(cfg)?,
        Command::Complex => cmd_complex(cfg)?,
        Command::Strata => {
            let (_, poset) = complex(cfg)?;
            return Ok(match cfg.format {
                Format::Dot => poset.to_dot(),
                Format::Json => render(&poset.to_json()),
            });
        }
        Command::Ordmult => cmd_ordmult(cfg)?,
        Command::Sweep => {
            let report = run_sweep(&cfg.sweep);
            let text = report.to_json_string();
            if !report.all_pass {
                return Err(Failure { code: 1, message: text });
            }
            return Ok(text);
        }
    };
    Ok(render(&value))
}

/// Outcome of one invocation: exit code, standard output, standard error.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let cfg = match RunConfig::resolve(&cli.opts) {
        Ok(c) => c,
        Err(f) => return Outcome { code: f.code, stdout: String::new(), stderr: format!("error: {}\n", f.message) },
    };
    let result = match cfg.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(cli.command, &cfg)),
            Err(e) => Err(Failure { code: 1, message: e.to_string() }),
        },
        None => execute(cli.command, &cfg),
    };
    match result {
        Ok(text) => match &cfg.output {
            Some(path) => match std::fs::write(path, &text) {
                Ok(()) => Outcome { code: 0, stdout: String::new(), stderr: String::new() },
                Err(e) => Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: format!("error: cannot write {}: {e}\n", path.display()),
                },
            },
            None => Outcome { code: 0, stdout: text, stderr: String::new() },
        },
        // a failing sweep still emits its report
        Err(f) if cli.command == Command::Sweep && f.code == 1 && f.message.starts_with('{') => {
            if let Some(path) = &cfg.output {
                let _ = std::fs::write(path, &f.message);
                Outcome { code: 1, stdout: String::new(), stderr: "error: sweep has failing criteria\n".into() }
            } else {
                Outcome { code: 1, stdout: f.message, stderr: "error: sweep has failing criteria\n".into() }
            }
        }
        Err(f) => Outcome { code: f.code, stdout: String::new(), stderr: format!("error: {}\n", f.message) },
    }
}
