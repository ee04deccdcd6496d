//! O^q-submodules of `F_p[x]` up to adding q-th powers, and the invariants
//! `nu^(q)`, `eta`, `Sing(M, a)`.

use std::collections::BTreeSet;
use std::fmt;

use crate::diffops::{diff_plus_components, diff_plus_ideal};
use crate::error::{Error, Result};
use crate::ffpoly::{same_ring, Polynomial, RingRef};
use crate::ideals::{ideal_order_at, order_at, Ideal, Order, PointSpec};

/// Generators of an O^q-module in normal form: q-power-stripped, nonzero,
/// monic, sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QModule {
    ring: RingRef,
    e: u32,
    q: u64,
    gens: Vec<Polynomial>,
}

impl QModule {
    pub fn normal_form(
        ring: &RingRef,
        gens: impl IntoIterator<Item = Polynomial>,
        e: u32,
    ) -> Result<Self> {
        let q = ring.p().q(e)?;
        let mut out = Vec::new();
        for g in gens {
            same_ring(ring, g.ring())?;
            let (plus, _) = g.strip_q_power(e)?;
            if !plus.is_zero() {
                // units of F_p are q-th powers
                out.push(plus.monic());
            }
        }
        out.sort_by(|a, b| {
            let ka: Vec<_> = a.terms().collect();
            let kb: Vec<_> = b.terms().collect();
            ka.cmp(&kb)
        });
        out.dedup();
        Ok(QModule {
            ring: ring.clone(),
            e,
            q,
            gens: out,
        })
    }

    pub fn ring(&self) -> &RingRef {
        &self.ring
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn generators(&self) -> &[Polynomial] {
        &self.gens
    }

    pub fn is_trivial(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn is_monomial(&self) -> bool {
        self.gens.iter().all(Polynomial::is_monomial)
    }

    /// Module moved so that the rational point `c` becomes the origin.
    pub fn translate(&self, c: &[u64]) -> Result<QModule> {
        let gens = self
            .gens
            .iter()
            .map(|g| g.translate(c))
            .collect::<Result<Vec<_>>>()?;
        QModule::normal_form(&self.ring, gens, self.e)
    }

    pub fn render_with<F: Fn(usize) -> String>(&self, name: F) -> String {
        let parts: Vec<String> = self.gens.iter().map(|g| g.render_with(&name)).collect();
        format!("<{}>", parts.join(", "))
    }
}

impl fmt::Display for QModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_with(|i| self.ring.display_name(i)))
    }
}

/// `nu^(q)_pt(g)` for a single polynomial.
pub fn q_order_of(g: &Polynomial, e: u32, pt: &PointSpec) -> Result<Order> {
    pt.validate(g.ring())?;
    match pt {
        PointSpec::Rational(c) => {
            let (plus, _) = g.translate(c)?.strip_q_power(e)?;
            Ok(Order::from_option(plus.min_degree()))
        }
        PointSpec::Generic(_) => {
            let (plus, _) = g.strip_q_power(e)?;
            order_at(&plus, pt)
        }
    }
}

/// `nu^(q)_pt(M)`: minimum over generators.
pub fn q_order_at(m: &QModule, pt: &PointSpec) -> Result<Order> {
    pt.validate(&m.ring)?;
    let mut best = Order::Infinite;
    for g in &m.gens {
        best = best.min(q_order_of(g, m.e, pt)?);
    }
    Ok(best)
}

/// `min_i (nu_pt(D_i) + i)` over a list `[D_1, ..., D_{q-1}]`.
pub(crate) fn eta_from_components(components: &[Ideal], pt: &PointSpec) -> Result<Order> {
    let mut best = Order::Infinite;
    for (k, ideal) in components.iter().enumerate() {
        best = best.min(ideal_order_at(ideal, pt)?.plus(k as u64 + 1));
    }
    Ok(best)
}

/// `eta_pt(M)`. Rational points are moved to the origin first; Hasse
/// operators commute with translations.
pub fn eta_at(m: &QModule, pt: &PointSpec) -> Result<Order> {
    pt.validate(&m.ring)?;
    match pt {
        PointSpec::Rational(c) if !pt.is_origin() => {
            let moved = m.translate(c)?;
            eta_from_components(&diff_plus_components(&moved)?, &PointSpec::origin(c.len()))
        }
        _ => eta_from_components(&diff_plus_components(m)?, pt),
    }
}

/// `eta` on many points, reusing the Diff ideals of the untranslated module.
pub fn eta_table(m: &QModule, pts: &[PointSpec]) -> Result<Vec<Order>> {
    let base = diff_plus_components(m)?;
    pts.iter()
        .map(|pt| {
            pt.validate(&m.ring)?;
            match pt {
                PointSpec::Rational(c) if !pt.is_origin() => {
                    let moved = m.translate(c)?;
                    eta_from_components(&diff_plus_components(&moved)?, &PointSpec::origin(c.len()))
                }
                _ => eta_from_components(&base, pt),
            }
        })
        .collect()
}

fn top_diff_order(m: &QModule, pt: &PointSpec) -> Result<Order> {
    if m.is_trivial() {
        return Ok(Order::Infinite);
    }
    match pt {
        PointSpec::Rational(c) if !pt.is_origin() => {
            let moved = m.translate(c)?;
            ideal_order_at(&diff_plus_ideal(&moved, m.q - 1)?, &PointSpec::origin(c.len()))
        }
        _ => ideal_order_at(&diff_plus_ideal(m, m.q - 1)?, pt),
    }
}

fn check_a(a: u64) -> Result<()> {
    if a == 0 {
        return Err(Error::OutOfRange("a must be at least 1".into()));
    }
    Ok(())
}

/// `pt in Sing(M, a)`: `nu_pt(Diff^{q-1}_+(M)) >= q(a-1)+1`, cross-checked
/// against `eta_pt(M) >= qa`.
pub fn sing_test(m: &QModule, a: u64, pt: &PointSpec) -> Result<bool> {
    check_a(a)?;
    pt.validate(&m.ring)?;
    let q = m.q;
    let by_diff = top_diff_order(m, pt)?.at_least(q * (a - 1) + 1);
    let by_eta = eta_at(m, pt)?.at_least(q * a);
    if by_diff != by_eta {
        return Err(Error::Internal(format!(
            "Sing(M, {a}) membership at {} disagrees: Diff test {by_diff}, eta test {by_eta}",
            pt.render(&m.ring)
        )));
    }
    Ok(by_diff)
}

/// Whether `V(x_i : i in z)` is a permissible center for `(M, a)`.
pub fn is_permissible_center(m: &QModule, a: u64, z: &BTreeSet<usize>) -> Result<bool> {
    let xi = PointSpec::generic(&m.ring, z.clone())?;
    sing_test(m, a, &xi)
}

/// Largest `a` such that `V(x_i : i in z)` is permissible for `(M, a)`;
/// 0 when not even `a = 1` works.
pub fn max_a_for_center(m: &QModule, z: &BTreeSet<usize>) -> Result<u64> {
    if m.is_trivial() {
        return Err(Error::Domain(
            "the trivial module is permissible for every a".into(),
        ));
    }
    let xi = PointSpec::generic(&m.ring, z.clone())?;
    let eta = eta_at(m, &xi)?
        .finite()
        .ok_or_else(|| Error::Internal("eta is infinite for a nontrivial module".into()))?;
    let q = m.q;
    let a = eta / q;
    if a >= 1 && !sing_test(m, a, &xi)? {
        return Err(Error::Internal(format!("center not permissible for a = {a}")));
    }
    if sing_test(m, a + 1, &xi)? {
        return Err(Error::Internal(format!("center permissible beyond a = {a}")));
    }
    if z.len() == 1 {
        let n = top_diff_order(m, &xi)?;
        if n != Order::Finite(q * a) {
            return Err(Error::Internal(format!(
                "hypersurface order of Diff^(q-1)_+ is {n}, expected q*a = {}",
                q * a
            )));
        }
    }
    Ok(a)
}

/// Declared candidate set for maximum-locus scans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSpec {
    /// Rational points with every coordinate in `0..box_size` (0: none).
    pub box_size: u64,
    /// Generic points of `V(x_i : i in S)` for `1 <= |S| <= codim`.
    pub codim: usize,
}

impl Default for CandidateSpec {
    fn default() -> Self {
        CandidateSpec {
            box_size: 0,
            codim: usize::MAX,
        }
    }
}

/// Origin, box points, then generic points by increasing codimension.
pub fn candidate_points(ring: &RingRef, spec: &CandidateSpec) -> Vec<PointSpec> {
    let n = ring.nvars();
    let mut out = vec![PointSpec::origin(n)];
    let b = spec.box_size.min(ring.p().get());
    if b > 0 {
        let mut c = vec![0u64; n];
        'outer: loop {
            let pt = PointSpec::Rational(c.clone());
            if !pt.is_origin() {
                out.push(pt);
            }
            for k in (0..n).rev() {
                c[k] += 1;
                if c[k] < b {
                    continue 'outer;
                }
                c[k] = 0;
            }
            break;
        }
    }
    for size in 1..=spec.codim.min(n.saturating_sub(1)) {
        for subset in subsets_of_size(n, size) {
            out.push(PointSpec::Generic(subset));
        }
    }
    out
}

pub(crate) fn subsets_of_size(n: usize, k: usize) -> Vec<BTreeSet<usize>> {
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<BTreeSet<usize>>) {
        if cur.len() == k {
            out.push(cur.iter().copied().collect());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Whether `inner` lies in the closure of `outer`.
pub fn specializes(inner: &PointSpec, outer: &PointSpec) -> bool {
    match outer {
        PointSpec::Generic(s) => inner.lies_on(s),
        PointSpec::Rational(_) => inner == outer,
    }
}

/// Maximum over the table and the argmax points not lying in the closure of
/// another argmax point.
pub fn max_locus(pts: &[PointSpec], values: &[Order]) -> (Order, Vec<PointSpec>) {
    let best = values.iter().copied().max().unwrap_or(Order::Infinite);
    let hits: Vec<&PointSpec> = pts
        .iter()
        .zip(values)
        .filter(|(_, v)| **v == best)
        .map(|(p, _)| p)
        .collect();
    let mut locus: Vec<PointSpec> = Vec::new();
    for p in &hits {
        let dominated = hits.iter().any(|o| o != p && specializes(p, o));
        if !dominated && !locus.contains(p) {
            locus.push((*p).clone());
        }
    }
    (best, locus)
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

    #[test]
    fn normal_forms() {
        let r = ring(3, 2);
        let m = module(&r, 1, &["x1^4*x2 + 2*x1^3"]);
        assert_eq!(m.to_string(), "<x1^4*x2>");
        assert!(module(&r, 1, &["x1^3"]).is_trivial());
        assert_eq!(QModule::normal_form(&r, m.generators().to_vec(), 1).unwrap(), m);
        assert_eq!(module(&r, 1, &["2*x1*x2", "x1*x2 + x2^3"]).generators().len(), 1);
    }

    #[test]
    fn q_orders() {
        let r = ring(3, 2);
        let m = module(&r, 1, &["x1^3*x2"]);
        for lam in 0..3 {
            let pt = PointSpec::rational(&r, &[0, lam]).unwrap();
            assert_eq!(q_order_at(&m, &pt).unwrap(), Order::Finite(4));
        }
        let axis = PointSpec::generic(&r, [0].into()).unwrap();
        assert_eq!(q_order_at(&m, &axis).unwrap(), Order::Finite(3));
        assert_eq!(q_order_at(&module(&r, 1, &[]), &axis).unwrap(), Order::Infinite);
    }

    #[test]
    fn eta_examples() {
        let r5 = ring(3, 5);
        let m = module(&r5, 1, &["x1*x2*x3*x4*x5"]);
        assert_eq!(eta_at(&m, &PointSpec::origin(5)).unwrap(), Order::Finite(5));
        let m3 = module(&r5, 1, &["x1^2*x2*x4*x5"]);
        assert_eq!(eta_at(&m3, &PointSpec::origin(5)).unwrap(), Order::Finite(5));
        let r = ring(3, 2);
        let umb = module(&r, 1, &["x1^3*x2"]);
        let axis = PointSpec::generic(&r, [0].into()).unwrap();
        assert_eq!(eta_at(&umb, &axis).unwrap(), Order::Finite(4));
        assert_eq!(eta_at(&module(&r, 1, &["x1^3"]), &axis).unwrap(), Order::Infinite);
    }

    #[test]
    fn sing_examples() {
        let r5 = ring(3, 5);
        let m = module(&r5, 1, &["x1*x2*x3*x4*x5"]);
        let o = PointSpec::origin(5);
        assert!(sing_test(&m, 1, &o).unwrap());
        assert!(!sing_test(&m, 2, &o).unwrap());
        assert!(sing_test(&module(&r5, 1, &[]), 4, &o).unwrap());
        assert!(sing_test(&m, 0, &o).is_err());
    }

    #[test]
    fn permissibility_and_max_a() {
        let r = ring(3, 2);
        let umb = module(&r, 1, &["x1^3*x2"]);
        assert!(is_permissible_center(&umb, 1, &[0].into()).unwrap());
        assert!(!is_permissible_center(&umb, 2, &[0].into()).unwrap());
        assert!(is_permissible_center(&module(&r, 1, &[]), 7, &[0].into()).unwrap());
        assert_eq!(max_a_for_center(&umb, &[0].into()).unwrap(), 1);
        assert_eq!(max_a_for_center(&module(&r, 1, &["x1^6*x2"]), &[0].into()).unwrap(), 2);
        assert_eq!(max_a_for_center(&module(&r, 1, &["x1*x2"]), &[0, 1].into()).unwrap(), 0);
        assert_eq!(max_a_for_center(&module(&r, 1, &["x1^2*x2"]), &[0].into()).unwrap(), 0);
        assert!(matches!(
            max_a_for_center(&module(&r, 1, &["x1^3"]), &[0].into()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn candidates() {
        let r = ring(3, 3);
        let pts = candidate_points(&r, &CandidateSpec { box_size: 2, codim: 2 });
        // origin + 7 box points + 3 + 3 generic points
        assert_eq!(pts.len(), 14);
        let all = candidate_points(&r, &CandidateSpec::default());
        assert_eq!(all.len(), 1 + 3 + 3);
    }

    #[test]
    fn locus_keeps_generic_points() {
        let r = ring(3, 2);
        let pts = vec![
            PointSpec::origin(2),
            PointSpec::generic(&r, [0].into()).unwrap(),
            PointSpec::generic(&r, [1].into()).unwrap(),
        ];
        let vals = [Order::Finite(4), Order::Finite(4), Order::Finite(3)];
        let (best, locus) = max_locus(&pts, &vals);
        assert_eq!(best, Order::Finite(4));
        assert_eq!(locus, vec![pts[1].clone()]);
    }
}
