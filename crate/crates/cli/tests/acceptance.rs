//! Acceptance criteria 1 to 10, one status line each.
//!
//! Criterion 9 is informational: a discrepancy is printed as FAIL but does not
//! change the exit status.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::process::ExitCode;

use qsing_cli::job::parse_job;
use qsing_cli::report::{parse_ideal, render_text, stage_ring, Verbosity};
use qsing_core::diffops::{log_hasse, LogContext, TaylorIndex};
use qsing_core::geom::{a_transform_module, blowup_chart, total_transform_module};
use qsing_core::qdiff::{check_pointwise, make_g, run_sequence, SequenceReport, StopReason};
use qsing_core::qmod::{candidate_points, eta_at, eta_table, max_locus, q_order_at, CandidateSpec, QModule};
use qsing_core::verify::{self, SuiteReport};
use qsing_core::{parse_poly, ExpVec, Ideal, Order, PointSpec, Polynomial, Ring, RingRef};

const SEED: u64 = 20261017;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn module(r: &RingRef, gens: &[&str], e: u32) -> QModule {
    QModule::normal_form(r, gens.iter().map(|g| parse_poly(g, r).unwrap()), e).unwrap()
}

/// Products of all `size`-element subsets of the given factors.
fn subset_products(r: &RingRef, factors: &[Polynomial], size: usize) -> Vec<Polynomial> {
    let n = factors.len();
    (0u32..1 << n)
        .filter(|mask| mask.count_ones() as usize == size)
        .map(|mask| {
            (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .fold(Polynomial::one(r), |acc, i| acc.mul(&factors[i]).unwrap())
        })
        .collect()
}

fn stage_ideals(rep: &SequenceReport, k: usize) -> Result<(RingRef, Vec<Ideal>), String> {
    let st = &rep.stages[k];
    let ring = stage_ring(rep.p, &st.base_names, &st.variables).map_err(|e| e.to_string())?;
    let comps = st
        .collection
        .as_ref()
        .ok_or(format!("stage {k} has no collection"))?
        .iter()
        .map(|c| parse_ideal(c, &ring).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((ring, comps))
}

fn criterion_1() -> Outcome {
    let src = std::fs::read_to_string(fixture("five_var.job")).map_err(|e| e.to_string())?;
    let rep = run_sequence(&parse_job(&src).map_err(|e| e.to_string())?.job).map_err(|e| e.to_string())?;
    let golden = std::fs::read_to_string(fixture("five_var.golden.txt")).map_err(|e| e.to_string())?;
    ensure!(render_text(&rep, Verbosity::Full) == golden, "text report differs from golden fixture");
    ensure!(rep.stages.len() == 4, "expected 4 stages, got {}", rep.stages.len());
    let fin = |v: u64| Some(Order::Finite(v));

    // stage 0
    let (r0, g0) = stage_ideals(&rep, 0)?;
    let xs: Vec<Polynomial> = (0..5).map(|i| Polynomial::var(&r0, i)).collect();
    let c1 = Ideal::new(&r0, subset_products(&r0, &xs, 4)).unwrap();
    let c2 = Ideal::new(&r0, subset_products(&r0, &xs, 3)).unwrap();
    ensure!(g0 == vec![c1, c2], "stage 0 collection mismatch");
    let s0 = &rep.stages[0];
    ensure!(s0.eta_g_max == fin(5) && s0.eta_g_locus == ["origin"], "stage 0 max eta(G)");

    // stage 1
    let (r1, g1) = stage_ideals(&rep, 1)?;
    let s1 = &rep.stages[1];
    ensure!(s1.module == ["x1^2*x2'*x3'*x4'*x5'"], "stage 1 module {:?}", s1.module);
    ensure!(s1.lambda == ["x1"] && s1.l == "x1", "stage 1 log data");
    let x1 = Polynomial::var(&r1, 0);
    let ys: Vec<Polynomial> = (1..5).map(|i| Polynomial::var(&r1, i)).collect();
    let c1 = Ideal::new(&r1, subset_products(&r1, &ys, 3).into_iter().map(|m| m.mul(&x1).unwrap())).unwrap();
    let c2 = Ideal::new(&r1, subset_products(&r1, &ys, 2)).unwrap();
    ensure!(g1 == vec![c1, c2], "stage 1 collection mismatch");
    ensure!(
        s1.eta_g_max == fin(4) && s1.eta_g_locus == ["generic:x2',x3',x4',x5'"],
        "stage 1 max eta(G) {:?} at {:?}",
        s1.eta_g_max,
        s1.eta_g_locus
    );
    ensure!(s1.eta_m_max == Order::Finite(6) && s1.eta_m_locus == ["origin"], "stage 1 max eta(M)");

    // stage 2
    let s2 = &rep.stages[2];
    ensure!(
        s2.eta_g_max == fin(3) && s2.eta_g_locus == ["generic:x3'',x4'',x5''"],
        "stage 2 max eta(G)"
    );
    ensure!(s2.eta_m_max == Order::Finite(6), "stage 2 max eta(M)");

    // stage 3
    let (r3, g3) = stage_ideals(&rep, 3)?;
    let x1 = Polynomial::var(&r3, 0);
    let c1 = Ideal::new(&r3, [3, 4].map(|j| x1.mul(&Polynomial::var(&r3, j)).unwrap())).unwrap();
    ensure!(g3 == vec![c1, Ideal::unit(&r3)], "stage 3 collection mismatch");
    let s3 = &rep.stages[3];
    ensure!(s3.eta_g_max == fin(2) && s3.eta_m_max == Order::Finite(5), "stage 3 maxima");
    ensure!(rep.stop == StopReason::BelowQ(Order::Finite(2)), "stop reason {:?}", rep.stop);
    ensure!(golden.ends_with("max η(G) = 2 < q: stop\n"), "golden ending");
    Ok("four stages, eta(G) maxima 5, 4, 3, 2; eta(M) maxima 5, 6, 6, 5; golden report matches".into())
}

fn criterion_2() -> Outcome {
    let mut seen = Vec::new();
    for (p, e) in [(2u64, 1u32), (3, 1), (2, 2), (5, 1)] {
        let r = Ring::new(p, &["X", "Y"]).unwrap();
        let q = r.p().q(e).unwrap();
        let m = module(&r, &[&format!("X^{q}*Y")], e);
        let gx = PointSpec::generic(&r, [0].into()).unwrap();
        ensure!(eta_at(&m, &gx).unwrap() == Order::Finite(q + 1), "q={q}: eta at generic X");
        ensure!(q_order_at(&m, &gx).unwrap() == Order::Finite(q), "q={q}: q-order at generic X");
        for lam in 0..p {
            let pt = PointSpec::Rational(vec![0, lam]);
            ensure!(
                q_order_at(&m, &pt).unwrap() == Order::Finite(q + 1),
                "q={q}: q-order at (0,{lam})"
            );
        }
        seen.push(q.to_string());
    }
    Ok(format!("q in {{{}}}", seen.join(", ")))
}

fn criterion_3() -> Outcome {
    let r = Ring::new(3, &["x1", "x2"]).unwrap();
    let m = module(&r, &["x1*x2*(x2 - 2*x1 + x1^3)"], 1);
    let z: BTreeSet<usize> = [0, 1].into();
    let expect = |c: &qsing_core::geom::Chart, src: &str| module(c.target(), &[src], 1);

    let c1 = blowup_chart(&r, &z, 0).unwrap();
    let total = total_transform_module(&m, &c1).unwrap();
    ensure!(total == expect(&c1, "x1^3*x2'*(x2' - 2 + x1^2)"), "x1-chart total: {total}");
    let one = a_transform_module(&m, &c1, 1).unwrap();
    ensure!(one == expect(&c1, "x2'*(x2' - 2 + x1^2)"), "x1-chart 1-transform: {one}");

    let c2 = blowup_chart(&r, &z, 1).unwrap();
    let total = total_transform_module(&m, &c2).unwrap();
    ensure!(total == expect(&c2, "x2^3*x1'*(1 - 2*x1' + x1'^3*x2^2)"), "x2-chart total: {total}");
    let one = a_transform_module(&m, &c2, 1).unwrap();
    ensure!(one == expect(&c2, "x1'*(1 - 2*x1' + x1'^3*x2^2)"), "x2-chart 1-transform: {one}");
    Ok("both charts of the origin blowup, total and 1-transforms".into())
}

fn criterion_4() -> Outcome {
    let r = Ring::new(3, &["x1", "x2", "x3", "x4", "x5"]).unwrap();
    let m = module(&r, &["x1*x2*x3*x4*x5"], 1);
    let cands = candidate_points(&r, &CandidateSpec::default());
    let (source_max, _) = max_locus(&cands, &eta_table(&m, &cands).unwrap());
    let c = blowup_chart(&r, &(0..5).collect(), 0).unwrap();
    let m1 = a_transform_module(&m, &c, 1).unwrap();
    let origin = PointSpec::origin(5);
    let jumped = eta_at(&m1, &origin).unwrap();
    ensure!(source_max == Order::Finite(5), "source max eta(M) = {source_max}");
    ensure!(jumped >= Order::Finite(6), "eta(M_1) at chart origin = {jumped}");
    let pts = candidate_points(c.target(), &CandidateSpec::default());
    let rep = check_pointwise(&make_g(&m).unwrap(), &c, 1, &pts).unwrap();
    ensure!(rep.precondition_holds, "precondition: {}", rep.precondition_note);
    ensure!(rep.all_hold(), "collection inequality failed at {} points", rep.violations().len());
    Ok(format!(
        "module eta jumps {source_max} -> {jumped}; collection inequality holds at {} chart points",
        rep.rows.len()
    ))
}

fn suite_outcome(reports: &[&SuiteReport]) -> Outcome {
    let mut parts = Vec::new();
    for r in reports {
        if !r.passed() {
            return Err(format!("{}: {} failures, first: {}", r.name, r.failures.len(), r.failures[0]));
        }
        parts.push(format!("{}: {} cases, {} checks", r.name, r.cases, r.checks));
    }
    Ok(parts.join("; "))
}

// Criterion 9 oracle: operators sum c_{nu,gamma} x^nu D_gamma in two variables,
// checked for preservation of every power x_j^k.

const ORDER: u32 = 3;
const COEFF_DEG: u32 = 3;

fn binom_table(p: u64, n: usize) -> Vec<Vec<u64>> {
    let mut t = vec![vec![0u64; n + 1]; n + 1];
    for a in 0..=n {
        t[a][0] = 1;
        for b in 1..=a {
            t[a][b] = (t[a - 1][b - 1] + t[a - 1][b]) % p;
        }
    }
    t
}

fn exps_up_to(deg: u32) -> Vec<[u32; 2]> {
    let mut v = Vec::new();
    for d in 0..=deg {
        for a in 0..=d {
            v.push([a, d - a]);
        }
    }
    v
}

fn rank_mod_p(mut rows: Vec<Vec<u64>>, p: u64) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let inv = |a: u64| (1..p).find(|b| a * b % p == 1).unwrap();
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&i| rows[i][col] != 0) else { continue };
        rows.swap(rank, piv);
        let s = inv(rows[rank][col]);
        for v in rows[rank].iter_mut() {
            *v = *v * s % p;
        }
        for i in 0..rows.len() {
            if i != rank && rows[i][col] != 0 {
                let f = rows[i][col];
                let pivot = rows[rank].clone();
                for (v, &w) in rows[i].iter_mut().zip(&pivot) {
                    *v = (*v + p * p - f * w) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

type RowKey = (usize, u32, [u32; 2], [u32; 2]);

struct OracleCase {
    p: u64,
    lambda: BTreeSet<usize>,
    kernel_dim: usize,
    family_dim: usize,
    family_is_log: bool,
}

fn oracle_case(p: u64, lambda: &BTreeSet<usize>) -> OracleCase {
    let binom = binom_table(p, 24);
    let coeffs = exps_up_to(COEFF_DEG);
    let gammas = exps_up_to(ORDER);
    let basis: Vec<([u32; 2], [u32; 2])> =
        coeffs.iter().flat_map(|&nu| gammas.iter().map(move |&g| (nu, g))).collect();

    // one row per (j, k, beta, output exponent): coefficient of that output monomial
    let mut rows: BTreeMap<RowKey, Vec<u64>> = BTreeMap::new();
    for &j in lambda {
        for k in 1..=ORDER + 3 {
            for b0 in 0..=ORDER + 2 {
                for b1 in 0..=ORDER + 2 {
                    let mut alpha = [b0, b1];
                    alpha[j] += k;
                    for (idx, &(nu, g)) in basis.iter().enumerate() {
                        if alpha[0] < g[0] || alpha[1] < g[1] {
                            continue;
                        }
                        let c = binom[alpha[0] as usize][g[0] as usize] * binom[alpha[1] as usize][g[1] as usize] % p;
                        if c == 0 {
                            continue;
                        }
                        let out = [alpha[0] - g[0] + nu[0], alpha[1] - g[1] + nu[1]];
                        if out[j] < k {
                            let row = rows.entry((j, k, [b0, b1], out)).or_insert_with(|| vec![0; basis.len()]);
                            row[idx] = (row[idx] + c) % p;
                        }
                    }
                }
            }
        }
    }
    let rows: Vec<Vec<u64>> = rows.into_values().collect();
    let kernel_dim = basis.len() - rank_mod_p(rows.clone(), p);

    // family members x^mu x^{gamma_Lambda} D_gamma are the basis vectors with
    // nu >= gamma on Lambda
    let in_family: Vec<bool> = basis
        .iter()
        .map(|(nu, g)| lambda.iter().all(|&j| nu[j] >= g[j]))
        .collect();
    let family_dim = in_family.iter().filter(|&&b| b).count();
    let family_is_log = rows
        .iter()
        .all(|row| row.iter().zip(&in_family).all(|(&c, &f)| !f || c == 0));
    OracleCase {
        p,
        lambda: lambda.clone(),
        kernel_dim,
        family_dim,
        family_is_log,
    }
}

/// The library's log operators agree with the oracle's action on monomials.
fn library_matches_oracle(p: u64, lambda: &BTreeSet<usize>) -> bool {
    let r = Ring::new(p, &["x1", "x2"]).unwrap();
    let ctx = LogContext::new(&r, lambda.clone(), ExpVec::new(vec![u32::from(lambda.contains(&0)), u32::from(lambda.contains(&1))])).unwrap();
    let binom = binom_table(p, 24);
    for g in exps_up_to(ORDER) {
        for a in exps_up_to(6) {
            let x = Polynomial::monomial(&r, ExpVec::new(a.to_vec()), 1);
            let got = log_hasse(&TaylorIndex::new(ExpVec::new(g.to_vec())), &ctx, &x).unwrap();
            let want = if a[0] >= g[0] && a[1] >= g[1] {
                let c = binom[a[0] as usize][g[0] as usize] * binom[a[1] as usize][g[1] as usize] % p;
                let mut out = [a[0] - g[0], a[1] - g[1]];
                for &j in lambda {
                    out[j] += g[j];
                }
                Polynomial::monomial(&r, ExpVec::new(out.to_vec()), c as i64)
            } else {
                Polynomial::zero(&r)
            };
            if got != want {
                return false;
            }
        }
    }
    true
}

fn criterion_9() -> Outcome {
    let lambdas: [BTreeSet<usize>; 4] = [BTreeSet::new(), [0].into(), [1].into(), [0, 1].into()];
    let mut notes = Vec::new();
    let mut bad = Vec::new();
    for p in [2u64, 3] {
        for lam in &lambdas {
            let case = oracle_case(p, lam);
            let agree = library_matches_oracle(p, lam);
            let desc = format!("p={} Lambda={:?}: span {} vs {}", case.p, case.lambda, case.family_dim, case.kernel_dim);
            if !(case.family_is_log && case.family_dim == case.kernel_dim && agree) {
                bad.push(format!(
                    "{desc} (family logarithmic: {}, library agrees: {agree})",
                    case.family_is_log
                ));
            }
            notes.push(desc);
        }
    }
    if bad.is_empty() {
        Ok(format!("spans equal in all 8 cases ({})", notes.join("; ")))
    } else {
        Err(bad.join("; "))
    }
}

fn main() -> ExitCode {
    let suites = verify::run_all(SEED);
    let find = |prefix: &str| -> Vec<&SuiteReport> {
        suites.iter().filter(|s| s.name.starts_with(prefix)).collect()
    };
    let inclusion: Vec<&SuiteReport> = suites
        .iter()
        .filter(|s| s.name.starts_with("G(") || s.name.starts_with("(G(") || s.name.starts_with("Giraud"))
        .collect();

    let results: Vec<(u32, &str, Outcome, bool)> = vec![
        (1, "five-variable walkthrough", criterion_1(), false),
        (2, "Whitney umbrella", criterion_2(), false),
        (3, "chart-transform identities", criterion_3(), false),
        (4, "eta jump on modules, not on collections", criterion_4(), false),
        (5, "multiple-of-q law", suite_outcome(&find("multiple-of-q")), false),
        (6, "sandwich and rational-point equality", suite_outcome(&find("sandwich")), false),
        (7, "pointwise inequality", suite_outcome(&find("pointwise")), false),
        (8, "inclusion suite", if inclusion.len() == 4 { suite_outcome(&inclusion) } else { Err("missing suites".into()) }, false),
        (9, "log-operator generating set (informational)", criterion_9(), true),
        (10, "Jacobian criterion", suite_outcome(&find("Jacobian")), false),
    ];

    let mut failed = false;
    for (id, title, outcome, informational) in &results {
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {title}: {detail}"),
            Err(why) => {
                println!("criterion {id:>2} FAIL  {title}: {why}");
                failed |= !informational;
            }
        }
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
