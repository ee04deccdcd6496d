//! Hasse-Taylor operators `D_gamma` and the ideals they generate.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::ffpoly::{inv_mod, mul_mod, same_ring, ExpVec, FieldScalar, Polynomial, Prime, RingRef};
use crate::ideals::Ideal;
use crate::qmod::QModule;

/// `C(a, b) mod p` for `a, b < p`.
fn small_binom(a: u64, b: u64, p: u64) -> u64 {
    if b > a {
        return 0;
    }
    let b = b.min(a - b);
    let mut num = 1u64;
    let mut den = 1u64;
    for j in 0..b {
        num = mul_mod(num, (a - j) % p, p);
        den = mul_mod(den, (j + 1) % p, p);
    }
    mul_mod(num, inv_mod(den, p).expect("den is a product of units"), p)
}

fn lucas_scalar(mut a: u64, mut b: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    while b > 0 {
        let (ad, bd) = (a % p, b % p);
        if bd > ad {
            return 0;
        }
        acc = mul_mod(acc, small_binom(ad, bd, p), p);
        a /= p;
        b /= p;
    }
    acc
}

/// `prod_k C(alpha_k, gamma_k) mod p`, evaluated digitwise in base `p`.
pub fn lucas_binom(alpha: &ExpVec, gamma: &ExpVec, p: Prime) -> Result<FieldScalar> {
    if alpha.len() != gamma.len() {
        return Err(Error::LengthMismatch {
            expected: alpha.len(),
            found: gamma.len(),
        });
    }
    let p_val = p.get();
    let mut acc = 1u64;
    for (&a, &g) in alpha.as_slice().iter().zip(gamma.as_slice()) {
        acc = mul_mod(acc, lucas_scalar(a as u64, g as u64, p_val), p_val);
        if acc == 0 {
            break;
        }
    }
    Ok(FieldScalar::from_residue(acc, p))
}

/// Index `gamma` of the operator `D_gamma`; `gamma = 0` is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TaylorIndex {
    gamma: ExpVec,
}

impl TaylorIndex {
    pub fn new(gamma: ExpVec) -> Self {
        TaylorIndex { gamma }
    }

    pub fn gamma(&self) -> &ExpVec {
        &self.gamma
    }

    pub fn order(&self) -> u64 {
        self.gamma.degree()
    }
}

impl fmt::Display for TaylorIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.gamma.as_slice().iter().map(|v| v.to_string()).collect();
        write!(f, "D_({})", parts.join(","))
    }
}

/// `D_gamma(f)`, termwise `C(alpha, gamma) x^(alpha - gamma)`.
pub fn hasse(gamma: &TaylorIndex, f: &Polynomial) -> Result<Polynomial> {
    let g = gamma.gamma();
    if g.len() != f.ring().nvars() {
        return Err(Error::RingMismatch(format!(
            "operator index of length {} on a ring with {} variables",
            g.len(),
            f.ring().nvars()
        )));
    }
    let p = f.ring().p();
    let mut out = Vec::new();
    for (alpha, c) in f.terms() {
        if !g.divides(alpha) {
            continue;
        }
        let l = lucas_binom(alpha, g, p)?.value();
        if l != 0 {
            out.push((alpha.checked_sub(g)?, mul_mod(l, c, p.get())));
        }
    }
    // distinct alpha give distinct alpha - gamma
    Polynomial::from_terms(f.ring(), out)
}

/// All `gamma <= bound` (componentwise) with `lo <= |gamma| <= hi`.
pub(crate) fn indices_up_to(bound: &ExpVec, lo: u64, hi: u64) -> Vec<ExpVec> {
    fn rec(bound: &[u32], k: usize, left: u64, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if k == bound.len() {
            out.push(cur.clone());
            return;
        }
        let top = (bound[k] as u64).min(left);
        for v in 0..=top {
            cur.push(v as u32);
            rec(bound, k + 1, left - v, cur, out);
            cur.pop();
        }
    }
    let mut raw = Vec::new();
    rec(bound.as_slice(), 0, hi, &mut Vec::with_capacity(bound.len()), &mut raw);
    raw.into_iter()
        .map(ExpVec::new)
        .filter(|g| g.degree() >= lo)
        .collect()
}

/// Componentwise maximum exponent over the support of `f`.
fn support_bound(f: &Polynomial) -> ExpVec {
    let n = f.ring().nvars();
    let mut b = vec![0u32; n];
    for (e, _) in f.terms() {
        for (k, &v) in e.as_slice().iter().enumerate() {
            b[k] = b[k].max(v);
        }
    }
    ExpVec::new(b)
}

/// Log weight `prod_{j in lambda} x_j^{gamma_j}`.
fn log_weight(gamma: &ExpVec, lambda: &BTreeSet<usize>) -> ExpVec {
    let mut w = vec![0u32; gamma.len()];
    for &j in lambda {
        w[j] = gamma.get(j);
    }
    ExpVec::new(w)
}

/// Nonzero images `(|gamma|, w_gamma * D_gamma(g))` of a generator for
/// `lo <= |gamma| <= hi`, where `w_gamma` is the log weight (or 1).
fn operator_images(
    g: &Polynomial,
    lo: u64,
    hi: u64,
    lambda: Option<&BTreeSet<usize>>,
) -> Result<Vec<(u64, Polynomial)>> {
    let mut out = Vec::new();
    for gamma in indices_up_to(&support_bound(g), lo, hi) {
        let d = hasse(&TaylorIndex::new(gamma.clone()), g)?;
        if d.is_zero() {
            continue;
        }
        let d = match lambda {
            Some(l) => d.mul_monomial(&log_weight(&gamma, l))?,
            None => d,
        };
        out.push((gamma.degree(), d));
    }
    Ok(out)
}

/// Ideals `[D_1, ..., D_top]` where `D_i` is generated by the images of
/// all operators with `lo <= |gamma| <= i`.
fn cumulative_ideals(
    ring: &RingRef,
    gens: &[Polynomial],
    lo: u64,
    top: u64,
    lambda: Option<&BTreeSet<usize>>,
) -> Result<Vec<Ideal>> {
    let mut by_order: Vec<Vec<Polynomial>> = vec![Vec::new(); top as usize + 1];
    for g in gens {
        for (ord, d) in operator_images(g, lo, top, lambda)? {
            by_order[ord as usize].push(d);
        }
    }
    let mut out = Vec::with_capacity(top as usize);
    let mut acc = Ideal::zero(ring);
    for (i, layer) in by_order.into_iter().enumerate() {
        if !layer.is_empty() {
            acc = Ideal::new(ring, acc.generators().iter().cloned().chain(layer))?;
        }
        if i >= 1 {
            out.push(acc.clone());
        }
    }
    Ok(out)
}

fn check_plus_range(m: &QModule, i: u64) -> Result<()> {
    if i == 0 || i >= m.q() {
        return Err(Error::OutOfRange(format!(
            "order {i} outside 1..={} for q = {}",
            m.q() - 1,
            m.q()
        )));
    }
    Ok(())
}

/// `Diff^i_+(M)`: images of the generators under `D_gamma`, `0 < |gamma| <= i`.
pub fn diff_plus_ideal(m: &QModule, i: u64) -> Result<Ideal> {
    check_plus_range(m, i)?;
    let mut all = cumulative_ideals(m.ring(), m.generators(), 1, i, None)?;
    Ok(all.pop().expect("i >= 1"))
}

/// `[Diff^1_+(M), ..., Diff^{q-1}_+(M)]`, sharing one pass over the operators.
pub fn diff_plus_components(m: &QModule) -> Result<Vec<Ideal>> {
    cumulative_ideals(m.ring(), m.generators(), 1, m.q() - 1, None)
}

/// `Diff^i(J)`: images under `D_gamma` with `|gamma| <= i`, including `J`.
pub fn diff_ideal(j: &Ideal, i: u64) -> Result<Ideal> {
    if i == 0 {
        return Ok(j.clone());
    }
    let all = cumulative_ideals(j.ring(), j.generators(), 0, i, None)?;
    Ok(all.into_iter().last().expect("i >= 1"))
}

/// Coordinate normal-crossings data: hypersurfaces `x_j = 0` for `j` in
/// `lambda`, and a monomial `x^l` lying in each of their ideals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogContext {
    ring: RingRef,
    lambda: BTreeSet<usize>,
    l: ExpVec,
}

impl LogContext {
    pub fn new(ring: &RingRef, lambda: BTreeSet<usize>, l: ExpVec) -> Result<Self> {
        if l.len() != ring.nvars() {
            return Err(Error::LengthMismatch {
                expected: ring.nvars(),
                found: l.len(),
            });
        }
        if let Some(&j) = lambda.iter().find(|&&j| j >= ring.nvars()) {
            return Err(Error::OutOfRange(format!("hypersurface index {j} out of range")));
        }
        if let Some(&j) = lambda.iter().find(|&&j| l.get(j) == 0) {
            return Err(Error::Domain(format!(
                "L = {} is not contained in the ideal of {}",
                Polynomial::monomial(ring, l.clone(), 1),
                ring.display_name(j)
            )));
        }
        Ok(LogContext {
            ring: ring.clone(),
            lambda,
            l,
        })
    }

    /// Empty `lambda`, `L = 1`.
    pub fn trivial(ring: &RingRef) -> Self {
        LogContext {
            ring: ring.clone(),
            lambda: BTreeSet::new(),
            l: ExpVec::zero(ring.nvars()),
        }
    }

    pub fn ring(&self) -> &RingRef {
        &self.ring
    }

    pub fn lambda(&self) -> &BTreeSet<usize> {
        &self.lambda
    }

    pub fn l(&self) -> &ExpVec {
        &self.l
    }

    pub fn l_poly(&self) -> Polynomial {
        Polynomial::monomial(&self.ring, self.l.clone(), 1)
    }

    pub fn render_lambda(&self) -> String {
        let names: Vec<String> = self.lambda.iter().map(|&j| self.ring.display_name(j)).collect();
        format!("{{{}}}", names.join(", "))
    }
}

/// The logarithmic operator `(prod_{j in lambda} x_j^{gamma_j}) D_gamma`.
pub fn log_hasse(gamma: &TaylorIndex, ctx: &LogContext, f: &Polynomial) -> Result<Polynomial> {
    same_ring(ctx.ring(), f.ring())?;
    hasse(gamma, f)?.mul_monomial(&log_weight(gamma.gamma(), ctx.lambda()))
}

/// `Diff^i_{Lambda,+}(M)` for the generating family `x^{gamma_Lambda} D_gamma`.
pub fn log_diff_plus_ideal(m: &QModule, ctx: &LogContext, i: u64) -> Result<Ideal> {
    check_plus_range(m, i)?;
    same_ring(m.ring(), ctx.ring())?;
    let mut all = cumulative_ideals(m.ring(), m.generators(), 1, i, Some(ctx.lambda()))?;
    Ok(all.pop().expect("i >= 1"))
}

/// All logarithmic components `i = 1..q-1`.
pub fn log_diff_plus_components(m: &QModule, ctx: &LogContext) -> Result<Vec<Ideal>> {
    same_ring(m.ring(), ctx.ring())?;
    cumulative_ideals(m.ring(), m.generators(), 1, m.q() - 1, Some(ctx.lambda()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffpoly::Ring;
    use crate::parse::parse_poly;

    fn ring(p: u64, n: usize) -> RingRef {
        let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        Ring::new(p, &names).unwrap()
    }

    fn module(r: &RingRef, e: u32, gens: &[&str]) -> QModule {
        QModule::normal_form(r, gens.iter().map(|g| parse_poly(g, r).unwrap()), e).unwrap()
    }

    fn ideal(r: &RingRef, gens: &[&str]) -> Ideal {
        Ideal::new(r, gens.iter().map(|g| parse_poly(g, r).unwrap())).unwrap()
    }

    fn binom_naive(a: u64, b: u64) -> u128 {
        if b > a {
            return 0;
        }
        let mut c: u128 = 1;
        for j in 0..b {
            c = c * (a - j) as u128 / (j + 1) as u128;
        }
        c
    }

    #[test]
    fn lucas_examples() {
        let p3 = Prime::new(3).unwrap();
        let v = |x: u32| ExpVec::new(vec![x]);
        assert_eq!(lucas_binom(&v(4), &v(2), p3).unwrap().value(), 0);
        assert_eq!(lucas_binom(&v(7), &v(0), p3).unwrap().value(), 1);
        assert_eq!(lucas_binom(&v(11), &v(11), p3).unwrap().value(), 1);
        for p in [2u64, 3, 5, 7] {
            let pr = Prime::new(p).unwrap();
            for a in 0..40u32 {
                for b in 0..=a + 1 {
                    let expect = (binom_naive(a as u64, b as u64) % p as u128) as u64;
                    assert_eq!(lucas_binom(&v(a), &v(b), pr).unwrap().value(), expect);
                }
            }
        }
        assert!(lucas_binom(&v(1), &ExpVec::zero(2), p3).is_err());
    }

    #[test]
    fn hasse_examples() {
        let r = ring(3, 2);
        let f = parse_poly("x1^4*x2", &r).unwrap();
        let d = |g: Vec<u32>| hasse(&TaylorIndex::new(ExpVec::new(g)), &f).unwrap();
        assert_eq!(d(vec![1, 0]), parse_poly("x1^3*x2", &r).unwrap());
        assert!(d(vec![2, 0]).is_zero());
        assert_eq!(d(vec![0, 0]), f);
        assert!(d(vec![5, 0]).is_zero());
    }

    #[test]
    fn five_variable_components() {
        let r = ring(3, 5);
        let m = module(&r, 1, &["x1*x2*x3*x4*x5"]);
        let d1 = diff_plus_ideal(&m, 1).unwrap();
        assert_eq!(
            d1,
            ideal(&r, &["x2*x3*x4*x5", "x1*x3*x4*x5", "x1*x2*x4*x5", "x1*x2*x3*x5", "x1*x2*x3*x4"])
        );
        let d2 = diff_plus_ideal(&m, 2).unwrap();
        assert_eq!(d2.generators().len(), 10);
        assert!(d2.generators().iter().all(|g| g.total_degree() == Some(3)));
        assert_eq!(diff_plus_components(&m).unwrap(), vec![d1, d2]);
        assert!(diff_plus_ideal(&m, 0).is_err());
        assert!(diff_plus_ideal(&m, 3).is_err());
    }

    #[test]
    fn q_powers_have_no_derivatives() {
        let r = ring(3, 2);
        let m = module(&r, 1, &["x1^3"]);
        assert!(diff_plus_ideal(&m, 1).unwrap().is_zero());
        assert!(diff_plus_ideal(&m, 2).unwrap().is_zero());
    }

    #[test]
    fn diff_ideal_examples() {
        let r = ring(3, 2);
        let j = ideal(&r, &["x1^2*x2"]);
        assert_eq!(diff_ideal(&j, 1).unwrap(), ideal(&r, &["x1*x2", "x1^2"]));
        assert_eq!(diff_ideal(&j, 0).unwrap(), j);
        assert_eq!(diff_ideal(&Ideal::unit(&r), 2).unwrap(), Ideal::unit(&r));
    }

    #[test]
    fn log_examples() {
        let r = ring(3, 5);
        let m = module(&r, 1, &["x1^2*x2*x3*x4*x5"]);
        let ctx = LogContext::new(&r, [0].into(), ExpVec::new(vec![1, 0, 0, 0, 0])).unwrap();
        let l1 = log_diff_plus_ideal(&m, &ctx, 1).unwrap();
        assert_eq!(
            l1,
            ideal(&r, &["x1^2*x3*x4*x5", "x1^2*x2*x4*x5", "x1^2*x2*x3*x5", "x1^2*x2*x3*x4"])
        );
        let empty = LogContext::trivial(&r);
        for i in 1..3 {
            assert_eq!(
                log_diff_plus_ideal(&m, &empty, i).unwrap(),
                diff_plus_ideal(&m, i).unwrap()
            );
        }
        assert!(LogContext::new(&r, [1].into(), ExpVec::new(vec![1, 0, 0, 0, 0])).is_err());
        assert!(LogContext::new(&r, [7].into(), ExpVec::zero(5)).is_err());
    }
}
