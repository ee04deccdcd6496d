//! Ideals by generators, orders at points, and the exact monomial fragment
//! (membership, inclusion, colon by a monomial).

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::ffpoly::{same_ring, ExpVec, Polynomial, RingRef};

/// A natural number or infinity; `Finite(_) < Infinite`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Order {
    Finite(u64),
    Infinite,
}

impl Order {
    pub fn from_option(v: Option<u64>) -> Self {
        v.map_or(Order::Infinite, Order::Finite)
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Order::Finite(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Order::Finite(v) => Some(v),
            Order::Infinite => None,
        }
    }

    pub fn plus(self, k: u64) -> Order {
        match self {
            Order::Finite(v) => Order::Finite(v + k),
            Order::Infinite => Order::Infinite,
        }
    }

    /// `self >= n` for a finite threshold.
    pub fn at_least(self, n: u64) -> bool {
        self >= Order::Finite(n)
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(v) => write!(f, "{v}"),
            Order::Infinite => f.write_str("inf"),
        }
    }
}

/// A point of `Spec F_p[x_1..x_n]`: an `F_p`-rational point, or the generic
/// point of the coordinate subvariety `V(x_i : i in S)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointSpec {
    Rational(Vec<u64>),
    Generic(BTreeSet<usize>),
}

impl PointSpec {
    pub fn origin(n: usize) -> Self {
        PointSpec::Rational(vec![0; n])
    }

    pub fn rational(ring: &RingRef, coords: &[i64]) -> Result<Self> {
        if coords.len() != ring.nvars() {
            return Err(Error::InvalidPoint(format!(
                "expected {} coordinates, found {}",
                ring.nvars(),
                coords.len()
            )));
        }
        let p = ring.p().get();
        Ok(PointSpec::Rational(
            coords.iter().map(|&c| crate::ffpoly::reduce_signed(c, p)).collect(),
        ))
    }

    /// Generic point of `V(x_i : i in subset)`. The full index set is the
    /// origin and is returned as such.
    pub fn generic(ring: &RingRef, subset: BTreeSet<usize>) -> Result<Self> {
        if subset.is_empty() {
            return Err(Error::InvalidPoint("generic point needs a nonempty subset".into()));
        }
        if let Some(&bad) = subset.iter().find(|&&i| i >= ring.nvars()) {
            return Err(Error::InvalidPoint(format!("variable index {bad} out of range")));
        }
        if subset.len() == ring.nvars() {
            return Ok(PointSpec::origin(ring.nvars()));
        }
        Ok(PointSpec::Generic(subset))
    }

    pub fn validate(&self, ring: &RingRef) -> Result<()> {
        match self {
            PointSpec::Rational(c) => {
                if c.len() != ring.nvars() {
                    return Err(Error::InvalidPoint(format!(
                        "expected {} coordinates, found {}",
                        ring.nvars(),
                        c.len()
                    )));
                }
                if c.iter().any(|&v| v >= ring.p().get()) {
                    return Err(Error::InvalidPoint("coordinates must be reduced mod p".into()));
                }
                Ok(())
            }
            PointSpec::Generic(s) => {
                if s.is_empty() || s.iter().any(|&i| i >= ring.nvars()) {
                    return Err(Error::InvalidPoint(format!("bad generic subset {s:?}")));
                }
                Ok(())
            }
        }
    }

    pub fn is_origin(&self) -> bool {
        matches!(self, PointSpec::Rational(c) if c.iter().all(|&v| v == 0))
    }

    /// Indices of the coordinates that vanish at this point.
    pub fn vanishing_set(&self) -> BTreeSet<usize> {
        match self {
            PointSpec::Rational(c) => (0..c.len()).filter(|&i| c[i] == 0).collect(),
            PointSpec::Generic(s) => s.clone(),
        }
    }

    /// Whether this point lies on `V(x_i : i in subset)`.
    pub fn lies_on(&self, subset: &BTreeSet<usize>) -> bool {
        match self {
            PointSpec::Rational(c) => subset.iter().all(|&i| c[i] == 0),
            PointSpec::Generic(s) => subset.is_subset(s),
        }
    }

    /// Parse `origin`, `point:a1,..,an` or `generic:v1,v2,..` against `ring`.
    pub fn parse(text: &str, ring: &RingRef) -> Result<Self> {
        let text = text.trim();
        if text == "origin" {
            return Ok(PointSpec::origin(ring.nvars()));
        }
        if let Some(rest) = text.strip_prefix("point:") {
            let coords = rest
                .split(',')
                .map(|c| {
                    c.trim()
                        .parse::<i64>()
                        .map_err(|_| Error::InvalidPoint(format!("bad coordinate `{}`", c.trim())))
                })
                .collect::<Result<Vec<_>>>()?;
            return PointSpec::rational(ring, &coords);
        }
        if let Some(rest) = text.strip_prefix("generic:") {
            let subset = rest
                .split(',')
                .map(|v| {
                    ring.index_of(v.trim())
                        .ok_or_else(|| Error::InvalidPoint(format!("unknown variable `{}`", v.trim())))
                })
                .collect::<Result<BTreeSet<_>>>()?;
            return PointSpec::generic(ring, subset);
        }
        Err(Error::InvalidPoint(format!(
            "`{text}`: expected origin, point:a1,...,an or generic:v1,..."
        )))
    }

    /// Textual form accepted by the CLI: `origin`, `point:a,b,..`, `generic:x,y`.
    pub fn render(&self, ring: &RingRef) -> String {
        match self {
            p if p.is_origin() => "origin".to_string(),
            PointSpec::Rational(c) => format!(
                "point:{}",
                c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
            ),
            PointSpec::Generic(s) => format!(
                "generic:{}",
                s.iter().map(|&i| ring.display_name(i)).collect::<Vec<_>>().join(",")
            ),
        }
    }
}

/// `nu_pt(f)`: the order of `f` at a rational point or along a coordinate
/// subvariety (ordinary and symbolic powers of coordinate primes agree).
pub fn order_at(f: &Polynomial, pt: &PointSpec) -> Result<Order> {
    pt.validate(f.ring())?;
    Ok(match pt {
        PointSpec::Rational(c) => Order::from_option(f.translate(c)?.min_degree()),
        PointSpec::Generic(s) => Order::from_option(f.min_degree_on(s)),
    })
}

/// Ideal given by generators, held in a canonical form.
///
/// Generators are monic, deduplicated and sorted (monomials first, in
/// descending graded-lex order). When every generator is
/// a monomial the list is the minimal monomial generating set; otherwise
/// non-monomial generators already contained in the monomial part are
/// dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ideal {
    ring: RingRef,
    gens: Vec<Polynomial>,
    is_monomial: bool,
}

impl Ideal {
    pub fn new(ring: &RingRef, gens: impl IntoIterator<Item = Polynomial>) -> Result<Self> {
        let mut monos: Vec<ExpVec> = Vec::new();
        let mut others: Vec<Polynomial> = Vec::new();
        for g in gens {
            same_ring(ring, g.ring())?;
            if g.is_zero() {
                continue;
            }
            if g.is_monomial() {
                monos.push(g.leading_term().unwrap().0.clone());
            } else {
                others.push(g.monic());
            }
        }
        let monos = minimal_monomials(monos);
        others.retain(|g| !g.terms().all(|(e, _)| monos.iter().any(|m| m.divides(e))));
        others.sort_by_key(poly_key);
        others.dedup();
        let is_monomial = others.is_empty();
        let mut gens: Vec<Polynomial> = monos
            .into_iter()
            .rev()
            .map(|m| Polynomial::monomial(ring, m, 1))
            .collect();
        gens.extend(others);
        Ok(Ideal {
            ring: ring.clone(),
            gens,
            is_monomial,
        })
    }

    pub fn zero(ring: &RingRef) -> Self {
        Ideal {
            ring: ring.clone(),
            gens: Vec::new(),
            is_monomial: true,
        }
    }

    pub fn unit(ring: &RingRef) -> Self {
        Ideal {
            ring: ring.clone(),
            gens: vec![Polynomial::one(ring)],
            is_monomial: true,
        }
    }

    pub fn from_monomials(ring: &RingRef, monos: impl IntoIterator<Item = ExpVec>) -> Self {
        Ideal::new(ring, monos.into_iter().map(|m| Polynomial::monomial(ring, m, 1)))
            .expect("monomials share the ring")
    }

    pub fn ring(&self) -> &RingRef {
        &self.ring
    }

    pub fn generators(&self) -> &[Polynomial] {
        &self.gens
    }

    pub fn is_monomial(&self) -> bool {
        self.is_monomial
    }

    pub fn is_zero(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.gens.iter().any(|g| g.is_constant() && !g.is_zero())
    }

    /// Monomial generators as exponent vectors (all of them when `is_monomial`).
    pub fn monomial_exponents(&self) -> Vec<ExpVec> {
        self.gens
            .iter()
            .filter(|g| g.is_monomial())
            .map(|g| g.leading_term().unwrap().0.clone())
            .collect()
    }

    pub fn sum(&self, other: &Ideal) -> Result<Ideal> {
        same_ring(&self.ring, &other.ring)?;
        Ideal::new(&self.ring, self.gens.iter().chain(&other.gens).cloned())
    }

    pub fn mul_monomial(&self, m: &ExpVec) -> Result<Ideal> {
        let gens = self
            .gens
            .iter()
            .map(|g| g.mul_monomial(m))
            .collect::<Result<Vec<_>>>()?;
        Ideal::new(&self.ring, gens)
    }

    /// Image under a ring map given by one image per variable.
    pub fn substitute_all(&self, images: &[Polynomial], target: &RingRef) -> Result<Ideal> {
        let gens = self
            .gens
            .iter()
            .map(|g| g.substitute_all(images, target))
            .collect::<Result<Vec<_>>>()?;
        Ideal::new(target, gens)
    }

    pub fn render_with<F: Fn(usize) -> String>(&self, name: F) -> String {
        let parts: Vec<String> = self.gens.iter().map(|g| g.render_with(&name)).collect();
        format!("<{}>", parts.join(", "))
    }

    pub fn render_base(&self) -> String {
        self.render_with(|i| self.ring.base_name(i).to_string())
    }
}

impl fmt::Display for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_with(|i| self.ring.display_name(i)))
    }
}

fn poly_key(p: &Polynomial) -> Vec<(ExpVec, u64)> {
    let mut v: Vec<(ExpVec, u64)> = p.terms().map(|(e, c)| (e.clone(), c)).collect();
    v.reverse();
    v
}

/// Minimal generating set of the monomial ideal spanned by `monos`, sorted
/// ascending in graded-lex order.
pub(crate) fn minimal_monomials(mut monos: Vec<ExpVec>) -> Vec<ExpVec> {
    monos.sort();
    monos.dedup();
    let mut kept: Vec<ExpVec> = Vec::with_capacity(monos.len());
    // ascending degree: a divisor always comes before its multiples
    for m in monos {
        if !kept.iter().any(|k| k.divides(&m)) {
            kept.push(m);
        }
    }
    kept
}

/// `nu_pt(I)`: minimum over generators of `order_at`.
pub fn ideal_order_at(ideal: &Ideal, pt: &PointSpec) -> Result<Order> {
    pt.validate(&ideal.ring)?;
    if let PointSpec::Generic(s) = pt {
        return Ok(Order::from_option(
            ideal.gens.iter().filter_map(|g| g.min_degree_on(s)).min(),
        ));
    }
    let mut best = Order::Infinite;
    for g in &ideal.gens {
        best = best.min(order_at(g, pt)?);
        if best == Order::Finite(0) {
            break;
        }
    }
    Ok(best)
}

/// Membership of `f` in a monomial ideal: every term divisible by a generator.
pub fn monomial_contains(ideal: &Ideal, f: &Polynomial) -> Result<bool> {
    if !ideal.is_monomial {
        return Err(Error::Unsupported(format!(
            "membership test needs a monomial ideal, got {ideal}"
        )));
    }
    same_ring(&ideal.ring, f.ring())?;
    let monos = ideal.monomial_exponents();
    Ok(f.terms().all(|(e, _)| monos.iter().any(|m| m.divides(e))))
}

/// `I ⊆ J` for monomial `J`.
pub fn ideal_included(i: &Ideal, j: &Ideal) -> Result<bool> {
    for g in &i.gens {
        if !monomial_contains(j, g)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `(I : x^m)`. Exact for monomial `I` (generator `g -> g / gcd(g, x^m)`) and
/// for ideals whose generators are all divisible by `x^m`.
pub fn colon_by_monomial(ideal: &Ideal, m: &ExpVec) -> Result<Ideal> {
    if m.len() != ideal.ring.nvars() {
        return Err(Error::LengthMismatch {
            expected: ideal.ring.nvars(),
            found: m.len(),
        });
    }
    if ideal.is_monomial {
        let monos = ideal
            .monomial_exponents()
            .into_iter()
            .map(|g| {
                let common = g.gcd(m);
                g.checked_sub(&common)
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(Ideal::from_monomials(&ideal.ring, monos));
    }
    let mut gens = Vec::with_capacity(ideal.gens.len());
    for g in &ideal.gens {
        match g.div_monomial_exact(m) {
            Some(h) => gens.push(h),
            None => {
                return Err(Error::Unsupported(format!(
                    "colon of non-monomial ideal {ideal} by a monomial not dividing generator {g}"
                )))
            }
        }
    }
    Ideal::new(&ideal.ring, gens)
}
