//! Seeded randomized suites checking the invariant laws on generated data.
//!
//! Each suite returns a [`SuiteReport`] listing failing instances instead of
//! stopping at the first one, so that drivers can print a full summary.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diffops::{
    diff_ideal, diff_plus_components, log_diff_plus_components, LogContext,
};
use crate::error::Result;
use crate::ffpoly::{ExpVec, Polynomial, Ring, RingRef};
use crate::geom::{a_transform_module, blowup_chart, total_transform_module, transform_log_context};
use crate::ideals::{ideal_included, ideal_order_at, order_at, Ideal, Order, PointSpec};
use crate::qdiff::{
    collection_included, collection_transform, eta_g_at, make_g, make_g_log, triple_transform,
    LogTriple, QDiffCollection,
};
use crate::qmod::{
    candidate_points, eta_at, max_a_for_center, q_order_at, subsets_of_size, CandidateSpec, QModule,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub name: String,
    pub cases: usize,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(name: &str) -> Self {
        SuiteReport {
            name: name.to_string(),
            cases: 0,
            checks: 0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn record<T>(&mut self, r: Result<T>, ctx: impl FnOnce() -> String) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.checks += 1;
                self.failures.push(format!("{}: {e}", ctx()));
                None
            }
        }
    }
}

fn rng_for(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn ring(p: u64, n: usize) -> RingRef {
    let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    Ring::new(p, &names).expect("small primes are valid")
}

/// Random exponent vector with entries in `0..=max`.
pub fn random_exponent(rng: &mut impl Rng, n: usize, max: u32) -> ExpVec {
    ExpVec::new((0..n).map(|_| rng.gen_range(0..=max)).collect())
}

/// Random polynomial with up to `terms` terms of total degree at most `deg`.
pub fn random_poly(rng: &mut impl Rng, r: &RingRef, terms: usize, deg: u32) -> Polynomial {
    let p = r.p().get();
    let n = r.nvars();
    let mut out = Vec::new();
    for _ in 0..rng.gen_range(1..=terms) {
        let mut e = vec![0u32; n];
        for _ in 0..rng.gen_range(0..=deg) {
            e[rng.gen_range(0..n)] += 1;
        }
        out.push((ExpVec::new(e), rng.gen_range(1..p)));
    }
    Polynomial::from_terms(r, out).expect("exponents fit")
}

/// Nontrivial module generated by one or two random monomials.
pub fn random_monomial_module(rng: &mut impl Rng, r: &RingRef, e: u32, max: u32) -> QModule {
    loop {
        let k = rng.gen_range(1..=2);
        let gens: Vec<Polynomial> = (0..k)
            .map(|_| Polynomial::monomial(r, random_exponent(rng, r.nvars(), max), 1))
            .collect();
        let m = QModule::normal_form(r, gens, e).expect("same ring");
        if !m.is_trivial() {
            return m;
        }
    }
}

fn random_subset(rng: &mut impl Rng, n: usize) -> BTreeSet<usize> {
    loop {
        let s: BTreeSet<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        if !s.is_empty() {
            return s;
        }
    }
}

fn random_rational(rng: &mut impl Rng, r: &RingRef) -> PointSpec {
    let p = r.p().get();
    PointSpec::Rational((0..r.nvars()).map(|_| rng.gen_range(0..p)).collect())
}

/// `(p, e)` pairs with small `q`.
const FIELDS: [(u64, u32); 5] = [(2, 1), (3, 1), (2, 2), (5, 1), (3, 2)];

fn pick_field(rng: &mut impl Rng, max_q: u64) -> (u64, u32) {
    let ok: Vec<(u64, u32)> = FIELDS
        .iter()
        .copied()
        .filter(|&(p, e)| p.pow(e) <= max_q)
        .collect();
    *ok.choose(rng).expect("nonempty")
}

fn show(m: &QModule) -> String {
    format!("F_{} q={} M={m}", m.ring().p().get(), m.q())
}

/// For monomial modules and coordinate hypersurfaces, the order of
/// `Diff^{q-1}_+(M)` along the hypersurface is `q * max_a`.
pub fn multiple_of_q_suite(seed: u64, cases: usize) -> SuiteReport {
    let mut rep = SuiteReport::new("multiple-of-q law");
    let mut rng = rng_for(seed, 5);
    for _ in 0..cases {
        rep.cases += 1;
        let (p, e) = pick_field(&mut rng, 9);
        let r = ring(p, rng.gen_range(1..=3));
        let q = p.pow(e);
        let m = random_monomial_module(&mut rng, &r, e, 3 * q as u32);
        let t = rng.gen_range(0..r.nvars());
        let z: BTreeSet<usize> = [t].into();
        let Some(a) = rep.record(max_a_for_center(&m, &z), || show(&m)) else { continue };
        let xi = PointSpec::generic(&r, z).expect("valid");
        let comps = diff_plus_components(&m).expect("in range");
        let Some(n) = rep.record(ideal_order_at(comps.last().expect("q >= 2"), &xi), || show(&m)) else {
            continue;
        };
        rep.check(n == Order::Finite(q * a), || {
            format!("{}: n = {n}, q*a = {}", show(&m), q * a)
        });
    }
    rep
}

/// `nu^(q) <= eta < q(a+1)` with equality off multiples of `q`, and
/// `eta = nu^(q)` at rational points.
pub fn sandwich_suite(seed: u64, cases: usize) -> SuiteReport {
    let mut rep = SuiteReport::new("sandwich and rational-point equality");
    let mut rng = rng_for(seed, 6);
    while rep.cases < cases {
        let (p, e) = pick_field(&mut rng, 9);
        let q = p.pow(e);
        let r = ring(p, rng.gen_range(1..=4));
        let f = random_poly(&mut rng, &r, 5, 10);
        let (plus, _) = f.strip_q_power(e).expect("e >= 1");
        if plus.is_zero() {
            continue;
        }
        rep.cases += 1;
        let m = QModule::normal_form(&r, [plus], e).expect("same ring");
        let mut pts = vec![PointSpec::origin(r.nvars()), random_rational(&mut rng, &r)];
        pts.push(PointSpec::generic(&r, random_subset(&mut rng, r.nvars())).expect("valid"));
        for pt in pts {
            let (Some(nu), Some(eta)) = (
                rep.record(q_order_at(&m, &pt), || show(&m)),
                rep.record(eta_at(&m, &pt), || show(&m)),
            ) else {
                continue;
            };
            let where_ = pt.render(&r);
            let (Some(nv), Some(ev)) = (nu.finite(), eta.finite()) else {
                rep.check(false, || format!("{} at {where_}: infinite invariant", show(&m)));
                continue;
            };
            let a = nv / q;
            rep.check(nv <= ev && ev < q * (a + 1), || {
                format!("{} at {where_}: nu = {nv}, eta = {ev}", show(&m))
            });
            if nv % q != 0 {
                rep.check(nv == ev, || {
                    format!("{} at {where_}: q does not divide nu = {nv} but eta = {ev}", show(&m))
                });
            }
            if matches!(pt, PointSpec::Rational(_)) {
                rep.check(nv == ev, || {
                    format!("{} at rational {where_}: nu = {nv}, eta = {ev}", show(&m))
                });
            }
        }
    }
    rep
}

/// Generic points (and the origin) of candidate centers inside the maximum
/// locus of `eta(G)`, with the maximum.
fn centers_in_max_locus(g: &QDiffCollection) -> Result<(Order, Vec<BTreeSet<usize>>)> {
    let r = g.ring();
    let n = r.nvars();
    let mut subsets = Vec::new();
    for k in 1..=n {
        subsets.extend(subsets_of_size(n, k));
    }
    let mut vals = Vec::with_capacity(subsets.len());
    for s in &subsets {
        vals.push(eta_g_at(g, &PointSpec::generic(r, s.clone())?)?);
    }
    let best = vals.iter().copied().max().unwrap_or(Order::Infinite);
    let hits = subsets
        .into_iter()
        .zip(vals)
        .filter(|(_, v)| *v == best)
        .map(|(s, _)| s)
        .collect();
    Ok((best, hits))
}

/// `eta_{pi(x)}(G) >= eta_x(G_1^(a))` at chart origins, exceptional generic
/// points and random rational chart points.
pub fn pointwise_suite(seed: u64, cases: usize) -> SuiteReport {
    let mut rep = SuiteReport::new("pointwise inequality for collections");
    let mut rng = rng_for(seed, 7);
    while rep.cases < cases {
        let (p, e) = pick_field(&mut rng, 4);
        let q = p.pow(e);
        let r = ring(p, rng.gen_range(2..=3));
        let m = random_monomial_module(&mut rng, &r, e, 2 * q as u32 + 1);
        let g = make_g(&m).expect("monomial");
        let Ok((best, centers)) = centers_in_max_locus(&g) else { continue };
        let Some(bv) = best.finite() else { continue };
        if bv < q {
            continue;
        }
        rep.cases += 1;
        let z = centers.choose(&mut rng).expect("argmax exists").clone();
        let a = bv / q;
        for &t in &z {
            let Some(c) = rep.record(blowup_chart(&r, &z, t), || show(&m)) else { continue };
            let Some(g1) = rep.record(collection_transform(&g, &c, a), || show(&m)) else {
                continue;
            };
            let tr = c.target();
            let mut pts = vec![
                PointSpec::origin(tr.nvars()),
                PointSpec::generic(tr, [t].into()).expect("valid"),
            ];
            for _ in 0..3 {
                pts.push(random_rational(&mut rng, tr));
            }
            pts.extend(candidate_points(tr, &CandidateSpec::default()));
            for pt in pts {
                let image = c.image_point(&pt).expect("valid point");
                let before = eta_g_at(&g, &image).expect("valid");
                let after = eta_g_at(&g1, &pt).expect("valid");
                rep.check(after <= before, || {
                    format!(
                        "{} center {z:?} chart {t} a={a}: eta {after} at {} > {before} at {}",
                        show(&m),
                        pt.render(tr),
                        image.render(&r)
                    )
                });
            }
        }
    }
    rep
}

fn random_log_context(rng: &mut impl Rng, r: &RingRef) -> LogContext {
    let n = r.nvars();
    let lambda: BTreeSet<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
    let l: Vec<u32> = (0..n)
        .map(|j| u32::from(lambda.contains(&j)) + if rng.gen_bool(0.2) { 1 } else { 0 })
        .collect();
    LogContext::new(r, lambda, ExpVec::new(l)).expect("lambda divides L")
}

fn included_all(a: &[Ideal], b: &[Ideal]) -> Result<bool> {
    for (x, y) in a.iter().zip(b) {
        if !ideal_included(x, y)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The componentwise inclusions between collections and the Giraud-type
/// inclusions, one report per family.
pub fn inclusion_suites(seed: u64, cases: usize) -> Vec<SuiteReport> {
    let mut plain_log = SuiteReport::new("G(M) in G(M,Lambda,L)");
    let mut transform = SuiteReport::new("G(M_1) in (G(M))_1");
    let mut log_transform = SuiteReport::new("(G(M,Lambda,L))_1 in G(M_1,Lambda_1,L_1)");
    let mut giraud = SuiteReport::new("Giraud and comparison inclusions");
    let mut rng = rng_for(seed, 8);

    while plain_log.cases < cases {
        let (p, e) = pick_field(&mut rng, 5);
        let r = ring(p, rng.gen_range(2..=3));
        let q = p.pow(e);
        let m = random_monomial_module(&mut rng, &r, e, 2 * q as u32 + 2);
        let ctx = random_log_context(&mut rng, &r);
        let t = LogTriple::new(m.clone(), ctx.clone()).expect("same ring");
        plain_log.cases += 1;
        if let (Some(g), Some(gl)) = (
            plain_log.record(make_g(&m), || show(&m)),
            plain_log.record(make_g_log(&t), || show(&m)),
        ) {
            let ok = plain_log.record(collection_included(&g, &gl), || show(&m));
            plain_log.check(ok == Some(true), || {
                format!("{} Lambda={} L={}: {g} not in {gl}", show(&m), ctx.render_lambda(), ctx.l_poly())
            });
        }
    }

    while transform.cases < cases {
        let (p, e) = pick_field(&mut rng, 5);
        let r = ring(p, rng.gen_range(2..=3));
        let q = p.pow(e);
        let m = random_monomial_module(&mut rng, &r, e, 2 * q as u32 + 2);
        let z = random_subset(&mut rng, r.nvars());
        let Ok(a) = max_a_for_center(&m, &z) else { continue };
        if a == 0 {
            continue;
        }
        transform.cases += 1;
        let t = *z.iter().collect::<Vec<_>>().choose(&mut rng).expect("nonempty");
        let c = blowup_chart(&r, &z, *t).expect("t in z");
        let lhs = a_transform_module(&m, &c, a).and_then(|m1| make_g(&m1));
        let rhs = make_g(&m).and_then(|g| collection_transform(&g, &c, a));
        if let (Some(lhs), Some(rhs)) =
            (transform.record(lhs, || show(&m)), transform.record(rhs, || show(&m)))
        {
            let ok = transform.record(collection_included(&lhs, &rhs), || show(&m));
            transform.check(ok == Some(true), || {
                format!("{} center {z:?} chart {t} a={a}: {lhs} not in {rhs}", show(&m))
            });
        }
    }

    while log_transform.cases < cases {
        let (p, e) = pick_field(&mut rng, 5);
        let r = ring(p, rng.gen_range(2..=3));
        let q = p.pow(e);
        let m = random_monomial_module(&mut rng, &r, e, 2 * q as u32 + 2);
        let ctx = random_log_context(&mut rng, &r);
        let tri = LogTriple::new(m.clone(), ctx.clone()).expect("same ring");
        let Ok(gl) = make_g_log(&tri) else { continue };
        let z = random_subset(&mut rng, r.nvars());
        let xi = PointSpec::generic(&r, z.clone()).expect("valid");
        let Ok(Order::Finite(eta)) = eta_g_at(&gl, &xi) else { continue };
        let a = eta / q;
        if a == 0 {
            continue;
        }
        log_transform.cases += 1;
        let t = *z.iter().collect::<Vec<_>>().choose(&mut rng).expect("nonempty");
        let c = blowup_chart(&r, &z, *t).expect("t in z");
        let lhs = collection_transform(&gl, &c, a);
        let rhs = triple_transform(&tri, &c, a).and_then(|t1| make_g_log(&t1));
        if let (Some(lhs), Some(rhs)) =
            (log_transform.record(lhs, || show(&m)), log_transform.record(rhs, || show(&m)))
        {
            let ok = log_transform.record(collection_included(&lhs, &rhs), || show(&m));
            log_transform.check(ok == Some(true), || {
                format!(
                    "{} Lambda={} L={} center {z:?} chart {t} a={a}: {lhs} not in {rhs}",
                    show(&m),
                    ctx.render_lambda(),
                    ctx.l_poly()
                )
            });
        }
    }

    while giraud.cases < cases {
        let (p, e) = pick_field(&mut rng, 5);
        let r = ring(p, rng.gen_range(2..=3));
        let q = p.pow(e);
        let m = random_monomial_module(&mut rng, &r, e, 2 * q as u32 + 2);
        let ctx = random_log_context(&mut rng, &r);
        let z = random_subset(&mut rng, r.nvars());
        let t = *z.iter().collect::<Vec<_>>().choose(&mut rng).expect("nonempty");
        let c = blowup_chart(&r, &z, *t).expect("t in z");
        giraud.cases += 1;
        let tr = c.target();
        let total = total_transform_module(&m, &c).expect("same ring");
        let before = diff_plus_components(&m).expect("valid");
        let after = diff_plus_components(&total).expect("valid");
        let pulled: Vec<Ideal> = before
            .iter()
            .map(|i| i.substitute_all(c.images(), tr).expect("same ring"))
            .collect();
        let scaled: Vec<Ideal> = pulled
            .iter()
            .enumerate()
            .map(|(k, i)| i.mul_monomial(&ExpVec::unit(tr.nvars(), *t).checked_scale(k as u64 + 1).expect("small")).expect("fits"))
            .collect();
        let ok = giraud.record(included_all(&scaled, &after), || show(&m));
        giraud.check(ok == Some(true), || format!("{} chart {t} of {z:?}: Giraud (module) fails", show(&m)));
        let ok = giraud.record(included_all(&after, &pulled), || show(&m));
        giraud.check(ok == Some(true), || format!("{} chart {t} of {z:?}: comparison (module) fails", show(&m)));

        // ideal versions on the first Diff component
        let j = before[0].clone();
        let jt = j.substitute_all(c.images(), tr).expect("same ring");
        for i in 0..q {
            let d_then_pull = diff_ideal(&j, i)
                .and_then(|d| d.substitute_all(c.images(), tr))
                .expect("monomial");
            let pull_then_d = diff_ideal(&jt, i).expect("monomial");
            let shifted = d_then_pull
                .mul_monomial(&ExpVec::unit(tr.nvars(), *t).checked_scale(i).expect("small"))
                .expect("fits");
            let ok = giraud.record(ideal_included(&shifted, &pull_then_d), || show(&m));
            giraud.check(ok == Some(true), || format!("{} chart {t} of {z:?} i={i}: Giraud (ideal) fails", show(&m)));
            let ok = giraud.record(ideal_included(&pull_then_d, &d_then_pull), || show(&m));
            giraud.check(ok == Some(true), || format!("{} chart {t} of {z:?} i={i}: comparison (ideal) fails", show(&m)));
        }

        // logarithmic version
        let ctx1 = transform_log_context(&ctx, &c).expect("coordinate data");
        let lbefore = log_diff_plus_components(&m, &ctx).expect("valid");
        let lafter = log_diff_plus_components(&total, &ctx1).expect("valid");
        let lscaled: Vec<Ideal> = lbefore
            .iter()
            .enumerate()
            .map(|(k, i)| {
                i.substitute_all(c.images(), tr)
                    .and_then(|x| x.mul_monomial(&ExpVec::unit(tr.nvars(), *t).checked_scale(k as u64 + 1)?))
                    .expect("fits")
            })
            .collect();
        let ok = giraud.record(included_all(&lscaled, &lafter), || show(&m));
        giraud.check(ok == Some(true), || {
            format!("{} Lambda={} chart {t} of {z:?}: Giraud (log) fails", show(&m), ctx.render_lambda())
        });
    }

    vec![plain_log, transform, log_transform, giraud]
}

/// `nu_x(f) >= n` iff `Diff^{n-1}(<f>)` has positive order at `x`.
pub fn jacobian_suite(seed: u64, cases: usize) -> SuiteReport {
    let mut rep = SuiteReport::new("Jacobian criterion");
    let mut rng = rng_for(seed, 10);
    for _ in 0..cases {
        rep.cases += 1;
        let (p, _) = pick_field(&mut rng, 5);
        let r = ring(p, rng.gen_range(1..=3));
        let f = random_poly(&mut rng, &r, 4, 7);
        let n: u64 = rng.gen_range(1..=6);
        let j = Ideal::new(&r, [f.clone()]).expect("same ring");
        let Some(d) = rep.record(diff_ideal(&j, n - 1), || format!("f = {f}")) else { continue };
        for pt in [PointSpec::origin(r.nvars()), random_rational(&mut rng, &r)] {
            let lhs = order_at(&f, &pt).expect("valid").at_least(n);
            let rhs = ideal_order_at(&d, &pt).expect("valid").at_least(1);
            rep.check(lhs == rhs, || {
                format!("F_{p} f = {f}, n = {n} at {}: order test {lhs}, Diff test {rhs}", pt.render(&r))
            });
        }
    }
    rep
}

/// All suites with the default instance counts.
pub fn run_all(seed: u64) -> Vec<SuiteReport> {
    let mut out = vec![
        multiple_of_q_suite(seed, 200),
        sandwich_suite(seed, 500),
        pointwise_suite(seed, 100),
    ];
    out.extend(inclusion_suites(seed, 100));
    out.push(jacobian_suite(seed, 300));
    out
}
