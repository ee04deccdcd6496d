//! Prime-field scalars and sparse multivariate polynomials over `F_p`.
//!
//! Polynomials are maps from exponent vectors to nonzero residues, ordered
//! graded-lexicographically so that printing and iteration are deterministic.
//! Besides ring arithmetic this module provides the q-expansion
//! `f = sum_alpha c_alpha^q x^alpha` (every `alpha_i < q`) and q-power
//! stripping. Because the ground field is the prime field, the coordinate
//! variables form a p-basis and coefficient q-th roots are the identity.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

const MAX_PRIME: u64 = 1 << 31;

/// A validated prime characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if !(2..=MAX_PRIME).contains(&p) || !is_prime(p) {
            return Err(Error::InvalidPrime(p));
        }
        Ok(Prime(p))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    /// `p^e`, failing on overflow of `u64` or on `e = 0`.
    pub fn q(self, e: u32) -> Result<u64> {
        if e == 0 {
            return Err(Error::OutOfRange("q = p^e needs e >= 1".into()));
        }
        self.0
            .checked_pow(e)
            .ok_or_else(|| Error::Overflow(format!("{}^{} does not fit in 64 bits", self.0, e)))
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[inline]
pub(crate) fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    (a + b) % p
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    a * b % p
}

#[inline]
pub(crate) fn neg_mod(a: u64, p: u64) -> u64 {
    (p - a % p) % p
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

pub(crate) fn inv_mod(a: u64, p: u64) -> Option<u64> {
    if a.is_multiple_of(p) {
        None
    } else {
        Some(pow_mod(a, p - 2, p))
    }
}

/// Reduce a signed integer into `[0, p)`.
pub fn reduce_signed(v: i64, p: u64) -> u64 {
    (v.rem_euclid(p as i64)) as u64
}

/// An element of `F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldScalar {
    value: u64,
    p: Prime,
}

impl FieldScalar {
    pub fn new(value: i64, p: Prime) -> Self {
        FieldScalar {
            value: reduce_signed(value, p.get()),
            p,
        }
    }

    pub fn from_residue(value: u64, p: Prime) -> Self {
        FieldScalar {
            value: value % p.get(),
            p,
        }
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn prime(self) -> Prime {
        self.p
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn inv(self) -> Option<Self> {
        inv_mod(self.value, self.p.get()).map(|v| Self::from_residue(v, self.p))
    }

    pub fn pow(self, exp: u64) -> Self {
        Self::from_residue(pow_mod(self.value, exp, self.p.get()), self.p)
    }

    /// The unique `q`-th root. Frobenius is the identity on the prime field.
    pub fn qth_root(self) -> Self {
        self
    }
}

impl std::ops::Add for FieldScalar {
    type Output = Self;

    fn add(self, other: Self) -> Self {
        Self::from_residue(add_mod(self.value, other.value, self.p.get()), self.p)
    }
}

impl std::ops::Mul for FieldScalar {
    type Output = Self;

    fn mul(self, other: Self) -> Self {
        Self::from_residue(mul_mod(self.value, other.value, self.p.get()), self.p)
    }
}

impl std::ops::Neg for FieldScalar {
    type Output = Self;

    fn neg(self) -> Self {
        Self::from_residue(neg_mod(self.value, self.p.get()), self.p)
    }
}

impl fmt::Display for FieldScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Exponent vector of a monomial. Ordered graded-lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExpVec(Vec<u32>);

impl ExpVec {
    pub fn new(exps: Vec<u32>) -> Self {
        ExpVec(exps)
    }

    pub fn zero(n: usize) -> Self {
        ExpVec(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        ExpVec(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    /// Sum of the entries indexed by `subset`.
    pub fn degree_on(&self, subset: &BTreeSet<usize>) -> u64 {
        subset.iter().map(|&i| self.0[i] as u64).sum()
    }

    pub fn checked_add(&self, other: &ExpVec) -> Result<ExpVec> {
        check_len(self.len(), other.len())?;
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| {
                a.checked_add(*b)
                    .ok_or_else(|| Error::Overflow("exponent addition".into()))
            })
            .collect::<Result<Vec<_>>>()
            .map(ExpVec)
    }

    /// Componentwise difference; an error if any entry would go negative.
    pub fn checked_sub(&self, other: &ExpVec) -> Result<ExpVec> {
        check_len(self.len(), other.len())?;
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| {
                a.checked_sub(*b).ok_or_else(|| {
                    Error::OutOfRange(format!("exponent difference {a} - {b} is negative"))
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(ExpVec)
    }

    pub fn checked_scale(&self, k: u64) -> Result<ExpVec> {
        self.0
            .iter()
            .map(|&a| {
                u32::try_from(a as u64 * k)
                    .map_err(|_| Error::Overflow(format!("exponent {a} * {k}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(ExpVec)
    }

    /// `self <= other` componentwise.
    pub fn divides(&self, other: &ExpVec) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn gcd(&self, other: &ExpVec) -> ExpVec {
        ExpVec(self.0.iter().zip(&other.0).map(|(a, b)| *a.min(b)).collect())
    }

    pub fn lcm(&self, other: &ExpVec) -> ExpVec {
        ExpVec(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    /// Split into `(self mod q, self div q)` componentwise.
    pub fn div_rem(&self, q: u64) -> (ExpVec, ExpVec) {
        let rem = self.0.iter().map(|&a| (a as u64 % q) as u32).collect();
        let quo = self.0.iter().map(|&a| (a as u64 / q) as u32).collect();
        (ExpVec(rem), ExpVec(quo))
    }

    pub fn all_divisible_by(&self, q: u64) -> bool {
        self.0.iter().all(|&a| (a as u64).is_multiple_of(q))
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::LengthMismatch { expected, found })
    } else {
        Ok(())
    }
}

impl Ord for ExpVec {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for ExpVec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The coordinate ring `F_p[x_1, ..., x_n]`.
///
/// `primes` only affects display names (`x2`, `x2'`, `x2''`, ...), which
/// record how many chart substitutions a coordinate went through.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ring {
    p: Prime,
    names: Vec<String>,
    primes: Vec<u32>,
}

pub type RingRef = Arc<Ring>;

impl Ring {
    pub fn new<S: AsRef<str>>(p: u64, names: &[S]) -> Result<RingRef> {
        let p = Prime::new(p)?;
        if names.is_empty() {
            return Err(Error::OutOfRange("a ring needs at least one variable".into()));
        }
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        let distinct: BTreeSet<&String> = names.iter().collect();
        if distinct.len() != names.len() {
            return Err(Error::Domain("duplicate variable names".into()));
        }
        if let Some(bad) = names.iter().find(|n| !is_identifier(n)) {
            return Err(Error::Domain(format!("`{bad}` is not a valid variable name")));
        }
        let primes = vec![0; names.len()];
        Ok(Arc::new(Ring { p, names, primes }))
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn base_name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn base_names(&self) -> &[String] {
        &self.names
    }

    pub fn prime_count(&self, i: usize) -> u32 {
        self.primes[i]
    }

    pub fn display_name(&self, i: usize) -> String {
        let mut s = self.names[i].clone();
        s.extend(std::iter::repeat_n('\'', self.primes[i] as usize));
        s
    }

    /// Resolve a variable by display name (with primes) or by base name.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        (0..self.nvars())
            .find(|&i| self.display_name(i) == name)
            .or_else(|| self.names.iter().position(|n| n == name))
    }

    /// Same variables with one more prime on each index in `bumped`.
    pub fn reprimed(&self, bumped: &BTreeSet<usize>) -> RingRef {
        let mut r = self.clone();
        for &i in bumped {
            r.primes[i] += 1;
        }
        Arc::new(r)
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn same_ring(a: &RingRef, b: &RingRef) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(Error::RingMismatch(format!(
            "F_{}[{}] vs F_{}[{}]",
            a.p.get(),
            (0..a.nvars()).map(|i| a.display_name(i)).collect::<Vec<_>>().join(","),
            b.p.get(),
            (0..b.nvars()).map(|i| b.display_name(i)).collect::<Vec<_>>().join(",")
        )))
    }
}

/// Sparse polynomial over `F_p`: exponent vector to nonzero residue.
#[derive(Debug, Clone)]
pub struct Polynomial {
    ring: RingRef,
    terms: BTreeMap<ExpVec, u64>,
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.ring, &other.ring) || self.ring == other.ring)
            && self.terms == other.terms
    }
}

impl Eq for Polynomial {}

impl Polynomial {
    pub fn zero(ring: &RingRef) -> Self {
        Polynomial {
            ring: ring.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ring: &RingRef) -> Self {
        Self::constant(ring, 1)
    }

    pub fn constant(ring: &RingRef, c: i64) -> Self {
        Self::monomial(ring, ExpVec::zero(ring.nvars()), c)
    }

    pub fn var(ring: &RingRef, i: usize) -> Self {
        Self::monomial(ring, ExpVec::unit(ring.nvars(), i), 1)
    }

    pub fn monomial(ring: &RingRef, exps: ExpVec, c: i64) -> Self {
        assert_eq!(exps.len(), ring.nvars(), "exponent vector length");
        let mut terms = BTreeMap::new();
        let c = reduce_signed(c, ring.p.get());
        if c != 0 {
            terms.insert(exps, c);
        }
        Polynomial {
            ring: ring.clone(),
            terms,
        }
    }

    /// Build from `(exponents, coefficient)` pairs; like terms are combined.
    pub fn from_terms<I>(ring: &RingRef, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (ExpVec, u64)>,
    {
        let p = ring.p.get();
        let mut map: BTreeMap<ExpVec, u64> = BTreeMap::new();
        for (e, c) in terms {
            check_len(ring.nvars(), e.len())?;
            let slot = map.entry(e).or_insert(0);
            *slot = add_mod(*slot, c % p, p);
        }
        map.retain(|_, c| *c != 0);
        Ok(Polynomial {
            ring: ring.clone(),
            terms: map,
        })
    }

    pub fn ring(&self) -> &RingRef {
        &self.ring
    }

    pub fn p(&self) -> u64 {
        self.ring.p.get()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.is_zero())
    }

    /// A single nonzero term.
    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in descending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&ExpVec, u64)> {
        self.terms.iter().rev().map(|(e, c)| (e, *c))
    }

    pub fn coefficient(&self, e: &ExpVec) -> u64 {
        self.terms.get(e).copied().unwrap_or(0)
    }

    pub fn leading_term(&self) -> Option<(&ExpVec, u64)> {
        self.terms.iter().next_back().map(|(e, c)| (e, *c))
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u64> {
        self.terms.keys().map(|e| e.degree()).max()
    }

    /// Minimal total degree of a term (the order at the origin).
    pub fn min_degree(&self) -> Option<u64> {
        self.terms.keys().map(|e| e.degree()).min()
    }

    /// Minimal `sum_{i in subset} e_i` over the terms.
    pub fn min_degree_on(&self, subset: &BTreeSet<usize>) -> Option<u64> {
        self.terms.keys().map(|e| e.degree_on(subset)).min()
    }

    /// Divide by the leading coefficient.
    pub fn monic(&self) -> Polynomial {
        match self.leading_term() {
            None => self.clone(),
            Some((_, 1)) => self.clone(),
            Some((_, c)) => {
                let inv = inv_mod(c, self.p()).expect("nonzero residue is invertible");
                self.scale(inv)
            }
        }
    }

    pub fn scale(&self, c: u64) -> Polynomial {
        let p = self.p();
        let c = c % p;
        let mut terms = BTreeMap::new();
        if c != 0 {
            for (e, v) in &self.terms {
                terms.insert(e.clone(), mul_mod(*v, c, p));
            }
        }
        Polynomial {
            ring: self.ring.clone(),
            terms,
        }
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        same_ring(&self.ring, &other.ring)?;
        let p = self.p();
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            let slot = terms.entry(e.clone()).or_insert(0);
            *slot = add_mod(*slot, *c, p);
            if *slot == 0 {
                terms.remove(e);
            }
        }
        Ok(Polynomial {
            ring: self.ring.clone(),
            terms,
        })
    }

    pub fn neg(&self) -> Polynomial {
        let p = self.p();
        Polynomial {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), neg_mod(*c, p))).collect(),
        }
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.add(&other.neg())
    }

    /// Exact product over `F_p`.
    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        same_ring(&self.ring, &other.ring)?;
        let p = self.p();
        let mut terms: BTreeMap<ExpVec, u64> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.checked_add(eb)?;
                let slot = terms.entry(e).or_insert(0);
                *slot = add_mod(*slot, mul_mod(*ca, *cb, p), p);
            }
        }
        terms.retain(|_, c| *c != 0);
        Ok(Polynomial {
            ring: self.ring.clone(),
            terms,
        })
    }

    /// Multiply by the monomial `x^m`.
    pub fn mul_monomial(&self, m: &ExpVec) -> Result<Polynomial> {
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| Ok((e.checked_add(m)?, *c)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(Polynomial {
            ring: self.ring.clone(),
            terms,
        })
    }

    pub fn pow(&self, mut k: u64) -> Result<Polynomial> {
        let mut acc = Polynomial::one(&self.ring);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// `self^(p^e)` computed through Frobenius: exponents scale by `q` and
    /// coefficients are raised to the `q`-th power.
    pub fn frobenius(&self, e: u32) -> Result<Polynomial> {
        let q = self.ring.p.q(e)?;
        let p = self.p();
        let terms = self
            .terms
            .iter()
            .map(|(ex, c)| Ok((ex.checked_scale(q)?, pow_mod(*c, q, p))))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(Polynomial {
            ring: self.ring.clone(),
            terms,
        })
    }

    /// Exact division by `x^m`; `None` if some term is not divisible.
    pub fn div_monomial_exact(&self, m: &ExpVec) -> Option<Polynomial> {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if !m.divides(e) {
                return None;
            }
            terms.insert(e.checked_sub(m).ok()?, *c);
        }
        Some(Polynomial {
            ring: self.ring.clone(),
            terms,
        })
    }

    /// Ring homomorphism `x_i -> images[i]` into the ring of the images.
    ///
    /// Only variables that occur in `self` need an image.
    pub fn substitute(
        &self,
        images: &BTreeMap<usize, Polynomial>,
        target: &RingRef,
    ) -> Result<Polynomial> {
        for img in images.values() {
            same_ring(img.ring(), target)?;
        }
        let mut cache: HashMap<(usize, u32), Polynomial> = HashMap::new();
        let mut out = Polynomial::zero(target);
        for (e, c) in &self.terms {
            let mut term = Polynomial::constant(target, *c as i64);
            for (i, &k) in e.as_slice().iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let img = images
                    .get(&i)
                    .ok_or_else(|| Error::UnmappedVariable(self.ring.display_name(i)))?;
                let factor = match cache.get(&(i, k)) {
                    Some(f) => f.clone(),
                    None => {
                        let f = img.pow(k as u64)?;
                        cache.insert((i, k), f.clone());
                        f
                    }
                };
                term = term.mul(&factor)?;
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Substitution with one image per variable, in order.
    pub fn substitute_all(&self, images: &[Polynomial], target: &RingRef) -> Result<Polynomial> {
        let map: BTreeMap<usize, Polynomial> = images.iter().cloned().enumerate().collect();
        self.substitute(&map, target)
    }

    /// `x -> f(x + point)`, moving `point` to the origin.
    pub fn translate(&self, point: &[u64]) -> Result<Polynomial> {
        check_len(self.ring.nvars(), point.len())?;
        if point.iter().all(|&c| c % self.p() == 0) {
            return Ok(self.clone());
        }
        let images: Vec<Polynomial> = point
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                Polynomial::var(&self.ring, i)
                    .add(&Polynomial::constant(&self.ring, (c % self.p()) as i64))
            })
            .collect::<Result<_>>()?;
        self.substitute_all(&images, &self.ring.clone())
    }

    /// Bucket monomials by exponent residues mod `q = p^e`.
    pub fn q_expand(&self, e: u32) -> Result<QExpansion> {
        let q = self.ring.p.q(e)?;
        let mut raw: BTreeMap<ExpVec, Vec<(ExpVec, u64)>> = BTreeMap::new();
        for (ex, c) in &self.terms {
            let (alpha, mu) = ex.div_rem(q);
            // the q-th root of c is c itself on the prime field
            raw.entry(alpha).or_default().push((mu, *c));
        }
        let buckets = raw
            .into_iter()
            .map(|(alpha, ts)| Ok((alpha, Polynomial::from_terms(&self.ring, ts)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(QExpansion {
            ring: self.ring.clone(),
            e,
            q,
            buckets,
        })
    }

    /// `(f^+, f is a q-th power)`, where `f^+` drops the trivial bucket.
    pub fn strip_q_power(&self, e: u32) -> Result<(Polynomial, bool)> {
        let q = self.ring.p.q(e)?;
        let terms: BTreeMap<ExpVec, u64> = self
            .terms
            .iter()
            .filter(|(ex, _)| !ex.all_divisible_by(q))
            .map(|(ex, c)| (ex.clone(), *c))
            .collect();
        let stripped = Polynomial {
            ring: self.ring.clone(),
            terms,
        };
        let is_q_power = stripped.is_zero();
        Ok((stripped, is_q_power))
    }

    /// Render with a custom variable naming.
    pub fn render_with<F: Fn(usize) -> String>(&self, name: F) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::with_capacity(self.terms.len());
        for (e, c) in self.terms() {
            let mono = render_monomial(e, &name);
            parts.push(match (c, mono.is_empty()) {
                (c, true) => c.to_string(),
                (1, false) => mono,
                (c, false) => format!("{c}*{mono}"),
            });
        }
        parts.join(" + ")
    }

    /// Render using base names (no primes); stable across charts.
    pub fn render_base(&self) -> String {
        self.render_with(|i| self.ring.base_name(i).to_string())
    }
}

pub(crate) fn render_monomial<F: Fn(usize) -> String>(e: &ExpVec, name: &F) -> String {
    let mut factors = Vec::new();
    for (i, &k) in e.as_slice().iter().enumerate() {
        match k {
            0 => {}
            1 => factors.push(name(i)),
            k => factors.push(format!("{}^{}", name(i), k)),
        }
    }
    factors.join("*")
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_with(|i| self.ring.display_name(i)))
    }
}

impl std::ops::Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::add(self, rhs).expect("ring mismatch in +")
    }
}

impl std::ops::Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::sub(self, rhs).expect("ring mismatch in -")
    }
}

impl std::ops::Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::mul(self, rhs).expect("ring mismatch in *")
    }
}

/// `f = sum_alpha c_alpha^q x^alpha` with `0 <= alpha_i < q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QExpansion {
    ring: RingRef,
    e: u32,
    q: u64,
    buckets: BTreeMap<ExpVec, Polynomial>,
}

impl QExpansion {
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn ring(&self) -> &RingRef {
        &self.ring
    }

    pub fn buckets(&self) -> &BTreeMap<ExpVec, Polynomial> {
        &self.buckets
    }

    pub fn bucket(&self, alpha: &ExpVec) -> Option<&Polynomial> {
        self.buckets.get(alpha)
    }

    /// The `alpha = 0` coefficient `c_0` (its q-th power is the trivial part).
    pub fn trivial_part(&self) -> Option<&Polynomial> {
        self.buckets.get(&ExpVec::zero(self.ring.nvars()))
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }

    /// `sum_alpha c_alpha^q x^alpha`.
    pub fn reassemble(&self) -> Result<Polynomial> {
        let mut out = Polynomial::zero(&self.ring);
        for (alpha, c) in &self.buckets {
            out = out.add(&c.frobenius(self.e)?.mul_monomial(alpha)?)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: u64, n: usize) -> RingRef {
        let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        Ring::new(p, &names).unwrap()
    }

    fn mono(ring: &RingRef, e: &[u32], c: i64) -> Polynomial {
        Polynomial::monomial(ring, ExpVec::new(e.to_vec()), c)
    }

    #[test]
    fn rejects_composite_characteristic() {
        assert_eq!(Ring::new(4, &["x"]).unwrap_err(), Error::InvalidPrime(4));
        assert!(Ring::new(1, &["x"]).is_err());
        assert!(Ring::new(2147483647, &["x"]).is_ok());
    }

    #[test]
    fn product_cross_terms_cancel_mod_3() {
        let ring = r(3, 2);
        let a = &Polynomial::var(&ring, 0) + &Polynomial::var(&ring, 1);
        let b = &Polynomial::var(&ring, 0) + &mono(&ring, &[0, 1], 2);
        let expected = &mono(&ring, &[2, 0], 1) + &mono(&ring, &[0, 2], 2);
        assert_eq!(a.mul(&b).unwrap(), expected);
        assert_eq!(a.mul(&Polynomial::one(&ring)).unwrap(), a);
        assert!(a.mul(&Polynomial::zero(&ring)).unwrap().is_zero());
    }

    #[test]
    fn ring_mismatch_is_reported() {
        let a = Polynomial::var(&r(3, 2), 0);
        let b = Polynomial::var(&r(5, 2), 0);
        assert!(matches!(a.mul(&b), Err(Error::RingMismatch(_))));
    }

    #[test]
    fn chart_substitution_of_intro_example() {
        let ring = r(3, 2);
        let x1 = Polynomial::var(&ring, 0);
        let x2 = Polynomial::var(&ring, 1);
        // x1*x2*(x2 - 2x1 + x1^3)
        let inner = &(&x2 - &x1.scale(2)) + &x1.pow(3).unwrap();
        let f = &(&x1 * &x2) * &inner;
        let images = vec![x1.clone(), &x1 * &x2];
        let g = f.substitute_all(&images, &ring).unwrap();
        // x1^3*x2*(x2 - 2 + x1^2)
        let inner2 = &(&x2 - &Polynomial::constant(&ring, 2)) + &x1.pow(2).unwrap();
        let expected = &(&x1.pow(3).unwrap() * &x2) * &inner2;
        assert_eq!(g, expected);
        let ident = vec![x1.clone(), x2.clone()];
        assert_eq!(f.substitute_all(&ident, &ring).unwrap(), f);
        let kill = vec![Polynomial::zero(&ring), x2.clone()];
        assert!(f.substitute_all(&kill, &ring).unwrap().is_zero());
    }

    #[test]
    fn unmapped_variable() {
        let ring = r(3, 2);
        let f = mono(&ring, &[1, 1], 1);
        let mut map = BTreeMap::new();
        map.insert(0, Polynomial::var(&ring, 0));
        assert_eq!(
            f.substitute(&map, &ring).unwrap_err(),
            Error::UnmappedVariable("x2".into())
        );
    }

    #[test]
    fn translate_umbrella_point() {
        let ring = r(3, 2);
        let f = mono(&ring, &[3, 1], 1);
        for lambda in 0..3u64 {
            let g = f.translate(&[0, lambda]).unwrap();
            let expected = &f + &mono(&ring, &[3, 0], lambda as i64);
            assert_eq!(g, expected);
        }
        let c = Polynomial::constant(&ring, 2);
        assert_eq!(c.translate(&[1, 2]).unwrap(), c);
        assert!(matches!(
            f.translate(&[1]),
            Err(Error::LengthMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn q_expansion_buckets() {
        let ring = r(3, 2);
        // x1^4*x2 + 2*x1^3 + x2^2
        let f = &(&mono(&ring, &[4, 1], 1) + &mono(&ring, &[3, 0], 2)) + &mono(&ring, &[0, 2], 1);
        let qe = f.q_expand(1).unwrap();
        assert_eq!(qe.buckets().len(), 3);
        assert_eq!(qe.bucket(&ExpVec::new(vec![1, 1])).unwrap(), &mono(&ring, &[1, 0], 1));
        assert_eq!(qe.bucket(&ExpVec::new(vec![0, 0])).unwrap(), &mono(&ring, &[1, 0], 2));
        assert_eq!(qe.bucket(&ExpVec::new(vec![0, 2])).unwrap(), &Polynomial::one(&ring));
        assert_eq!(qe.reassemble().unwrap(), f);

        let cube = mono(&ring, &[3, 0], 1);
        let qe = cube.q_expand(1).unwrap();
        assert_eq!(qe.buckets().len(), 1);
        assert_eq!(qe.trivial_part().unwrap(), &mono(&ring, &[1, 0], 1));
        assert!(Polynomial::zero(&ring).q_expand(1).unwrap().is_empty());
    }

    #[test]
    fn strip_examples() {
        let ring = r(3, 2);
        let f = &(&mono(&ring, &[4, 1], 1) + &mono(&ring, &[3, 0], 2)) + &mono(&ring, &[0, 2], 1);
        let (plus, is_q) = f.strip_q_power(1).unwrap();
        assert_eq!(plus, &mono(&ring, &[4, 1], 1) + &mono(&ring, &[0, 2], 1));
        assert!(!is_q);
        // (x1 + 2)^3 = x1^3 + 2 over F_3
        let g = &mono(&ring, &[3, 0], 1) + &Polynomial::constant(&ring, 2);
        let (plus, is_q) = g.strip_q_power(1).unwrap();
        assert!(plus.is_zero() && is_q);
        let (plus, is_q) = Polynomial::zero(&ring).strip_q_power(1).unwrap();
        assert!(plus.is_zero() && is_q);
    }

    #[test]
    fn q_overflow_is_an_error() {
        let ring = r(2, 1);
        assert!(matches!(
            Polynomial::var(&ring, 0).q_expand(64),
            Err(Error::Overflow(_))
        ));
        assert!(ring.p().q(0).is_err());
    }

    #[test]
    fn display_is_grlex_descending() {
        let ring = r(3, 2);
        let f = &(&mono(&ring, &[0, 2], 1) + &mono(&ring, &[3, 0], 2)) + &mono(&ring, &[4, 1], 1);
        assert_eq!(f.to_string(), "x1^4*x2 + 2*x1^3 + x2^2");
        assert_eq!(Polynomial::zero(&ring).to_string(), "0");
        let primed = ring.reprimed(&[1].into_iter().collect());
        assert_eq!(Polynomial::var(&primed, 1).to_string(), "x2'");
        assert_eq!(primed.index_of("x2'"), Some(1));
        assert_eq!(primed.index_of("x2"), Some(1));
    }

    #[test]
    fn exponent_subtraction_is_checked() {
        let a = ExpVec::new(vec![1, 2]);
        let b = ExpVec::new(vec![2, 0]);
        assert!(a.checked_sub(&b).is_err());
        assert_eq!(b.checked_sub(&ExpVec::new(vec![1, 0])).unwrap(), ExpVec::new(vec![1, 0]));
    }

    #[test]
    fn scalar_field_ops() {
        let p = Prime::new(7).unwrap();
        let a = FieldScalar::new(-1, p);
        assert_eq!(a.value(), 6);
        assert_eq!((a * a).value(), 1);
        assert_eq!((a + a + (-a)), a);
        assert_eq!(a.inv().unwrap(), a);
        assert_eq!(a.qth_root(), a);
        assert_eq!(a.pow(7), a);
        assert!(FieldScalar::new(0, p).inv().is_none());
    }
}
