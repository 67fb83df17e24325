//! The reproducibility sweep: every acceptance criterion as a report entry.
//!
//! Reports contain no timings, so two runs with the same configuration are
//! byte-identical. Criterion 9 reruns criteria 1–8 on a single thread and
//! compares serialized reports.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::charlattice::{character_lattice, verify_symmetry_identification, CharacterLattice};
use crate::complex::{check_smooth_complex, induce_decomposition, ord_mult_strata, refine_complex, strata_poset};
use crate::error::Result;
use crate::flags::{admissible_triples, weight_orbits, ParahoricType, PositionInvariant, SymplecticSpace};
use crate::lattice::square::SquareInstance;
use crate::polyhedral::{
    divisor_of_square, hilbert_basis, sym_dim, verify_hilbert_basis, Decomposition, IntegralStructure,
};
use crate::weyl::bruhat_count;

pub const FAULT_ENV: &str = "PARAHORIC_INJECT_FAULT";

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub seed: u64,
    pub square_instances: usize,
    pub square_max_order: u64,
    pub hilbert_bound: u32,
    pub refine_budget: usize,
    /// Criterion whose computation is deliberately corrupted (harness self-test).
    #[serde(skip)]
    pub fault: Option<u32>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            seed: 0,
            square_instances: 200,
            square_max_order: 256,
            hilbert_bound: 8,
            refine_budget: 500,
            fault: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    pub details: Value,
}

impl CriterionResult {
    fn new(id: u32, name: &str, failures: Vec<String>, details: Value) -> Self {
        CriterionResult {
            id,
            name: name.into(),
            status: if failures.is_empty() { Status::Pass } else { Status::Fail },
            witness: failures.into_iter().next(),
            details,
        }
    }

    fn error(id: u32, name: &str, e: impl std::fmt::Display) -> Self {
        CriterionResult::new(id, name, vec![format!("error: {e}")], Value::Null)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub criteria: Vec<CriterionResult>,
    pub all_pass: bool,
}

fn types(g: usize) -> Vec<ParahoricType> {
    ParahoricType::all(g)
}

fn tri(r: usize) -> usize {
    r * (r + 1) / 2
}

pub fn weyl_enumeration(cfg: &SweepConfig) -> CriterionResult {
    let name = "W enumeration: orbit count = triple count = Bruhat count";
    let mut cases = Vec::new();
    for g in 1..=2 {
        for t in types(g) {
            for p in [2u32, 3] {
                for r in 0..=g {
                    cases.push((g, t.clone(), p, r));
                }
            }
        }
    }
    let rows: Vec<Result<(usize, String, u32, usize, usize, usize, usize, bool)>> = cases
        .par_iter()
        .map(|(g, t, p, r)| {
            let space = SymplecticSpace::new(*g, *p)?;
            let orbits = weight_orbits(&space, *r, t)?;
            let triples = admissible_triples(*g, *r, t);
            let from_orbits: BTreeSet<PositionInvariant> = orbits.iter().map(|(w, _)| w.clone()).collect();
            let mut n_orbits = orbits.len();
            if cfg.fault == Some(1) && *g == 2 {
                n_orbits += 1;
            }
            Ok((
                *g,
                format!("{:?}", t.d),
                *p,
                *r,
                n_orbits,
                triples.len(),
                bruhat_count(*g, *r, t),
                from_orbits == triples,
            ))
        })
        .collect();
    let mut failures = Vec::new();
    let mut table = Vec::new();
    for row in rows {
        match row {
            Ok((g, d, p, r, o, tr, b, same)) => {
                if o != tr || tr != b || !same {
                    failures.push(format!(
                        "g={g} D={d} p={p} r={r}: orbits {o}, triples {tr}, Bruhat {b}, sets agree {same}"
                    ));
                }
                table.push(json!({ "g": g, "D": d, "p": p, "r": r, "orbits": o, "triples": tr, "bruhat": b }));
            }
            Err(e) => failures.push(e.to_string()),
        }
    }
    let t1 = ParahoricType::new(1, vec![1]).expect("valid type");
    for (r, want) in [(1, 2), (0, 1)] {
        let got = admissible_triples(1, r, &t1).len();
        if got != want {
            failures.push(format!("g=1 D={{1}} r={r}: |W| = {got}, expected {want}"));
        }
    }
    CriterionResult::new(1, name, failures, json!({ "cases": table }))
}

/// Character lattices for every `r ≤ g ≤ 3`, `D`, `w`, `p ∈ {2, 3}`.
fn all_lattices() -> Vec<(usize, u32, PositionInvariant, Result<CharacterLattice>)> {
    let mut cases = Vec::new();
    for g in 1..=3 {
        for t in types(g) {
            for r in 0..=g {
                for w in admissible_triples(g, r, &t) {
                    for p in [2u32, 3] {
                        cases.push((g, p, w.clone()));
                    }
                }
            }
        }
    }
    cases
        .into_par_iter()
        .map(|(g, p, w)| {
            let cl = character_lattice(&w, p);
            (g, p, w, cl)
        })
        .collect()
}

fn freeness(
    cfg: &SweepConfig,
    lattices: &[(usize, u32, PositionInvariant, Result<CharacterLattice>)],
) -> CriterionResult {
    let name = "S^w free of rank r(r+1)/2 for r <= g <= 3";
    let mut failures = Vec::new();
    for (k, (g, p, w, cl)) in lattices.iter().enumerate() {
        match cl {
            Ok(cl) => {
                let free = cl.free && !(cfg.fault == Some(2) && k == lattices.len() / 2);
                if !free || cl.rank != tri(w.r) {
                    failures.push(format!("g={g} p={p} w={}: free {free}, rank {}", w.label(), cl.rank));
                }
            }
            Err(e) => failures.push(format!("g={g} p={p} w={}: {e}", w.label())),
        }
    }
    CriterionResult::new(2, name, failures, json!({ "lattices": lattices.len() }))
}

fn order_identity(cfg: &SweepConfig) -> CriterionResult {
    let name = "limit order identity on random finite squares";
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let instances: Vec<SquareInstance> =
        (0..cfg.square_instances).map(|_| SquareInstance::random(&mut rng, cfg.square_max_order)).collect();
    let rows: Vec<(u64, u64, Result<BigInt>)> =
        instances.par_iter().map(|s| (s.pair_count(), s.formula(), s.limit_order())).collect();
    let mut failures = Vec::new();
    for (k, (s, (pairs, formula, lim))) in instances.iter().zip(rows).enumerate() {
        let formula = if cfg.fault == Some(3) && k == 0 { formula + 1 } else { formula };
        match lim {
            Ok(l) if l == BigInt::from(pairs) && pairs == formula => {}
            Ok(l) => failures.push(format!("B={:?}: pairs {pairs}, formula {formula}, limit {l}", s.moduli)),
            Err(e) => failures.push(format!("B={:?}: {e}", s.moduli)),
        }
    }
    let max_order = instances.iter().map(|s| s.order()).max().unwrap_or(0);
    CriterionResult::new(3, name, failures, json!({ "instances": instances.len(), "max_order": max_order }))
}

fn symmetry(
    cfg: &SweepConfig,
    lattices: &[(usize, u32, PositionInvariant, Result<CharacterLattice>)],
) -> CriterionResult {
    let name = "symmetry identifications hold in every S^w at g <= 3";
    let mut failures = Vec::new();
    let mut checked = 0;
    for (g, p, w, cl) in lattices {
        if let Ok(cl) = cl {
            checked += 1;
            let ok = verify_symmetry_identification(cl) && !(cfg.fault == Some(4) && checked == 1);
            if !ok {
                failures.push(format!("g={g} p={p} w={}", w.label()));
            }
        }
    }
    CriterionResult::new(4, name, failures, json!({ "lattices": checked }))
}

fn square_divisors(cfg: &SweepConfig) -> CriterionResult {
    let name = "divisor of x(x) on the g=2 principal cone is effective with the expected support";
    let sigma = match Decomposition::principal(2) {
        Ok(f) => f.cones.last().expect("principal cone").clone(),
        Err(e) => return CriterionResult::error(5, name, e),
    };
    let mut failures = Vec::new();
    let mut checked = 0;
    for a in -3i64..=3 {
        for b in -3i64..=3 {
            if a.gcd(&b) != 1 {
                continue;
            }
            checked += 1;
            let x = vec![BigInt::from(a), BigInt::from(b)];
            let mut res = divisor_of_square(&sigma, &x);
            if cfg.fault == Some(5) && (a, b) == (1, 1) {
                res = Err(crate::Error::Mismatch("injected fault".into()));
            }
            if let Err(e) = res {
                failures.push(format!("x=({a},{b}): {e}"));
            }
        }
    }
    CriterionResult::new(5, name, failures, json!({ "vectors": checked }))
}

fn smoothness_and_refinement(cfg: &SweepConfig) -> CriterionResult {
    let name = "g=2 p=2 smoothness table and smooth refinement";
    let sigma = match Decomposition::principal(2) {
        Ok(f) => f,
        Err(e) => return CriterionResult::error(6, name, e),
    };
    let mut failures = Vec::new();
    let mut findings = Vec::new();
    let mut tables = Vec::new();
    for t in types(2) {
        let run = || -> Result<(Value, Vec<String>, Vec<String>)> {
            let sf = induce_decomposition(&sigma, 2, &t)?;
            let poset = strata_poset(&sf)?;
            let table = check_smooth_complex(&sf, &poset);
            let refined = refine_complex(&sf, &poset, cfg.refine_budget)?;
            let mut bad = Vec::new();
            for (k, c) in refined.iter().enumerate() {
                let smooth = c.check.smooth && !(cfg.fault == Some(6) && k == 0);
                if !(c.check.refines && smooth && c.check.support_preserved) {
                    bad.push(format!("D={:?} cell {:?}: {:?}", t.d, c.summand, c.check.witnesses.first()));
                }
            }
            let found: Vec<String> = table
                .findings
                .iter()
                .map(|&i| {
                    let row = &table.rows[i];
                    format!(
                        "D={:?} w={} cone {:?}: multiplicity {} for S^w",
                        t.d,
                        row.w.label(),
                        row.cone.rays,
                        row.multiplicity_sw
                    )
                })
                .collect();
            let steps: usize = refined.iter().map(|c| c.refinement.steps.len()).sum();
            Ok((
                json!({ "D": t.d, "rows": table.rows.len(), "findings": table.findings.len(), "refinement_steps": steps }),
                bad,
                found,
            ))
        };
        match run() {
            Ok((v, bad, found)) => {
                tables.push(v);
                failures.extend(bad);
                findings.extend(found);
            }
            Err(e) => failures.push(format!("D={:?}: {e}", t.d)),
        }
    }
    CriterionResult::new(6, name, failures, json!({ "tables": tables, "findings": findings }))
}

fn genus_one_strata(cfg: &SweepConfig) -> CriterionResult {
    let name = "g=1 D={1} strata poset and ord_mult";
    let t = ParahoricType::new(1, vec![1]).expect("valid type");
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for p in [2u32, 3, 5] {
        let run = || -> Result<(Vec<String>, Vec<String>, usize)> {
            let sf = induce_decomposition(&Decomposition::principal(1)?, p, &t)?;
            let poset = strata_poset(&sf)?;
            let boundary: Vec<String> = poset.nodes.iter().filter(|n| n.r > 0).map(|n| n.w.label()).collect();
            let mut flagged: Vec<String> = ord_mult_strata(&poset).iter().map(|&i| poset.nodes[i].w.label()).collect();
            if cfg.fault == Some(7) {
                flagged.push("(0,0,1)".into());
            }
            let open = poset.nodes.iter().filter(|n| n.r == 0).count();
            Ok((boundary, flagged, open))
        };
        match run() {
            Ok((mut boundary, flagged, open)) => {
                boundary.sort();
                if open != 1 || boundary != ["(0,0,1)", "(1,0,0)"] || flagged != ["(1,0,0)"] {
                    failures.push(format!("p={p}: open {open}, boundary {boundary:?}, ord_mult {flagged:?}"));
                }
                rows.push(json!({ "p": p, "open": open, "boundary": boundary, "ord_mult": flagged }));
            }
            Err(e) => failures.push(format!("p={p}: {e}")),
        }
    }
    CriterionResult::new(7, name, failures, json!({ "runs": rows }))
}

/// Stratum cones for `g ≤ 2`, every `D`, `p ∈ {2, 3}`, each with `Sym²` and its `S^w`.
fn hilbert_suite() -> Result<Vec<(String, crate::polyhedral::RationalCone, IntegralStructure)>> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for g in 1..=2 {
        let sigma = Decomposition::principal(g)?;
        for t in types(g) {
            for p in [2u32, 3] {
                let sf = induce_decomposition(&sigma, p, &t)?;
                let poset = strata_poset(&sf)?;
                for n in poset.nodes.iter().filter(|n| n.r > 0) {
                    let cell = sf.cells.iter().find(|c| c.orbit.coords == n.summand).expect("node cell");
                    for s in [IntegralStructure::standard(sym_dim(n.r)), cell.structure.clone()] {
                        let key = (n.cone.rays.clone(), s.basis.clone(), s.denominator.clone());
                        if seen.insert(format!("{key:?}")) {
                            out.push((format!("g={g} D={:?} p={p} w={}", t.d, n.w.label()), n.cone.clone(), s));
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

fn hilbert_bases(cfg: &SweepConfig) -> CriterionResult {
    let name = "Hilbert basis completeness and minimality up to the coordinate bound";
    let suite = match hilbert_suite() {
        Ok(s) => s,
        Err(e) => return CriterionResult::error(8, name, e),
    };
    let checks: Vec<(bool, bool, usize, Vec<String>)> = suite
        .par_iter()
        .enumerate()
        .map(|(k, (label, cone, s))| {
            let mut hb = hilbert_basis(cone, s);
            if cfg.fault == Some(8) && k == 0 {
                hb.elements.pop();
            }
            let ineqs = s.cone_in_dual(cone).rays;
            let c = verify_hilbert_basis(&ineqs, &hb, cfg.hilbert_bound);
            let w = c.witnesses.iter().map(|x| format!("{label} cone {:?}: {x:?}", cone.rays)).collect();
            (c.complete, c.minimal, c.points_checked, w)
        })
        .collect();
    let mut failures = Vec::new();
    let mut points = 0;
    for (k, (complete, minimal, n, w)) in checks.into_iter().enumerate() {
        points += n;
        if !(complete && minimal) {
            let (label, cone, _) = &suite[k];
            failures.push(w.into_iter().next().unwrap_or_else(|| format!("{label} cone {:?}", cone.rays)));
        }
    }
    CriterionResult::new(
        8,
        name,
        failures,
        json!({ "cones": suite.len(), "bound": cfg.hilbert_bound, "points_checked": points }),
    )
}

fn criteria_1_to_8(cfg: &SweepConfig) -> Vec<CriterionResult> {
    let lattices = all_lattices();
    vec![
        weyl_enumeration(cfg),
        freeness(cfg, &lattices),
        order_identity(cfg),
        symmetry(cfg, &lattices),
        square_divisors(cfg),
        smoothness_and_refinement(cfg),
        genus_one_strata(cfg),
        hilbert_bases(cfg),
    ]
}

pub fn run_single(cfg: &SweepConfig, id: u32) -> Result<CriterionResult> {
    Ok(match id {
        1 => weyl_enumeration(cfg),
        2 => freeness(cfg, &all_lattices()),
        3 => order_identity(cfg),
        4 => symmetry(cfg, &all_lattices()),
        5 => square_divisors(cfg),
        6 => smoothness_and_refinement(cfg),
        7 => genus_one_strata(cfg),
        8 => hilbert_bases(cfg),
        9 => determinism(cfg, &criteria_1_to_8(cfg)),
        _ => return Err(crate::Error::Invalid(format!("no criterion {id}"))),
    })
}

fn determinism(cfg: &SweepConfig, first: &[CriterionResult]) -> CriterionResult {
    let name = "repeated sweeps give byte-identical reports";
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build();
    let second = match pool {
        Ok(pool) => pool.install(|| criteria_1_to_8(cfg)),
        Err(e) => return CriterionResult::error(9, name, e),
    };
    let a = serde_json::to_string(first).expect("report serializes");
    let mut b = serde_json::to_string(&second).expect("report serializes");
    if cfg.fault == Some(9) {
        b.push(' ');
    }
    let failures = if a == b {
        Vec::new()
    } else {
        let at = a.bytes().zip(b.bytes()).position(|(x, y)| x != y).unwrap_or(a.len().min(b.len()));
        vec![format!("reports differ at byte {at}")]
    };
    CriterionResult::new(9, name, failures, json!({ "bytes": a.len() }))
}

pub fn run_sweep(cfg: &SweepConfig) -> SweepReport {
    let mut criteria = criteria_1_to_8(cfg);
    criteria.push(determinism(cfg, &criteria));
    let all_pass = criteria.iter().all(|c| c.status == Status::Pass);
    SweepReport { config: cfg.clone(), criteria, all_pass }
}

impl SweepReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}
