//! Affine charts of blowups along coordinate centers and the transforms of
//! modules, ideals and logarithmic contexts.

use std::collections::BTreeSet;

use crate::diffops::LogContext;
use crate::error::{Error, Result};
use crate::ffpoly::{same_ring, ExpVec, Polynomial, RingRef};
use crate::ideals::{colon_by_monomial, Ideal, PointSpec};
use crate::qmod::{is_permissible_center, QModule};

/// Chart `t` of the blowup along `V(x_i : i in center)`:
/// `x_i -> x_t * x_i` for `i` in `center \ {t}`, other variables fixed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chart {
    parent: RingRef,
    target: RingRef,
    center: BTreeSet<usize>,
    t: usize,
    images: Vec<Polynomial>,
}

/// The chart `t` of the blowup of `ring` along the center `s`.
pub fn blowup_chart(ring: &RingRef, s: &BTreeSet<usize>, t: usize) -> Result<Chart> {
    if s.is_empty() {
        return Err(Error::Domain("blowup center must be nonempty".into()));
    }
    if let Some(&bad) = s.iter().find(|&&i| i >= ring.nvars()) {
        return Err(Error::OutOfRange(format!("center index {bad} out of range")));
    }
    if !s.contains(&t) {
        return Err(Error::Domain(format!(
            "chart variable {} is not in the center",
            if t < ring.nvars() { ring.display_name(t) } else { t.to_string() }
        )));
    }
    let moved: BTreeSet<usize> = s.iter().copied().filter(|&i| i != t).collect();
    let target = ring.reprimed(&moved);
    let images = (0..ring.nvars())
        .map(|i| {
            let xi = Polynomial::var(&target, i);
            if moved.contains(&i) {
                xi.mul_monomial(&ExpVec::unit(ring.nvars(), t))
            } else {
                Ok(xi)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Chart {
        parent: ring.clone(),
        target,
        center: s.clone(),
        t,
        images,
    })
}

impl Chart {
    pub fn parent(&self) -> &RingRef {
        &self.parent
    }

    pub fn target(&self) -> &RingRef {
        &self.target
    }

    pub fn center(&self) -> &BTreeSet<usize> {
        &self.center
    }

    pub fn chart_var(&self) -> usize {
        self.t
    }

    /// Index of the exceptional hypersurface `x_t = 0` on the chart.
    pub fn exceptional(&self) -> usize {
        self.t
    }

    pub fn is_identity(&self) -> bool {
        self.center.len() == 1
    }

    pub fn images(&self) -> &[Polynomial] {
        &self.images
    }

    /// Pull back a polynomial of the parent ring.
    pub fn apply(&self, f: &Polynomial) -> Result<Polynomial> {
        same_ring(&self.parent, f.ring())?;
        f.substitute_all(&self.images, &self.target)
    }

    /// Image of a monomial exponent under the chart substitution.
    pub fn apply_exponent(&self, e: &ExpVec) -> Result<ExpVec> {
        let mut v = e.as_slice().to_vec();
        let extra: u64 = self
            .center
            .iter()
            .filter(|&&i| i != self.t)
            .map(|&i| e.get(i) as u64)
            .sum();
        let nt = v[self.t] as u64 + extra;
        v[self.t] = u32::try_from(nt)
            .map_err(|_| Error::Overflow(format!("exponent {nt} exceeds u32")))?;
        Ok(ExpVec::new(v))
    }

    /// Image in the parent of a point of the chart.
    pub fn image_point(&self, pt: &PointSpec) -> Result<PointSpec> {
        pt.validate(&self.target)?;
        Ok(match pt {
            PointSpec::Rational(c) => {
                let p = self.parent.p().get();
                let img = (0..c.len())
                    .map(|i| {
                        if self.center.contains(&i) && i != self.t {
                            c[i] * c[self.t] % p
                        } else {
                            c[i]
                        }
                    })
                    .collect();
                PointSpec::Rational(img)
            }
            PointSpec::Generic(s) => {
                let img: BTreeSet<usize> = if s.contains(&self.t) {
                    s.union(&self.center).copied().collect()
                } else {
                    s.clone()
                };
                PointSpec::generic(&self.parent, img)?
            }
        })
    }
}

/// `M * O^q` on the chart, in normal form.
pub fn total_transform_module(m: &QModule, c: &Chart) -> Result<QModule> {
    same_ring(m.ring(), c.parent())?;
    let gens = m
        .generators()
        .iter()
        .map(|g| c.apply(g))
        .collect::<Result<Vec<_>>>()?;
    QModule::normal_form(c.target(), gens, m.e())
}

/// The a-transform: pull back, strip q-th powers, divide by `x_t^{qa}`.
pub fn a_transform_module(m: &QModule, c: &Chart, a: u64) -> Result<QModule> {
    if a == 0 {
        return Err(Error::OutOfRange("a must be at least 1".into()));
    }
    same_ring(m.ring(), c.parent())?;
    let permissible = is_permissible_center(m, a, c.center())?;
    let q = m.q();
    let shift = q
        .checked_mul(a)
        .and_then(|v| u32::try_from(v).ok())
        .ok_or_else(|| Error::Overflow(format!("q*a = {q}*{a}")))?;
    let mut div = vec![0u32; c.target().nvars()];
    div[c.exceptional()] = shift;
    let div = ExpVec::new(div);
    let mut out = Vec::with_capacity(m.generators().len());
    for g in m.generators() {
        let (plus, _) = c.apply(g)?.strip_q_power(m.e())?;
        match plus.div_monomial_exact(&div) {
            Some(h) => out.push(h),
            None => {
                let bad = plus
                    .terms()
                    .map(|(e, _)| e.clone())
                    .find(|e| !div.divides(e))
                    .expect("some term is not divisible");
                let (alpha, _) = bad.div_rem(q);
                let mono = |e: &ExpVec| Polynomial::monomial(c.target(), e.clone(), 1).to_string();
                let msg = format!(
                    "generator {g} pulls back to a term {} in bucket {} not divisible by {}",
                    mono(&bad),
                    mono(&alpha),
                    mono(&div)
                );
                if permissible {
                    return Err(Error::Internal(msg));
                }
                return Err(Error::NotPermissible(msg));
            }
        }
    }
    if !permissible {
        return Err(Error::Internal(format!(
            "division by x_t^{shift} succeeded on a non-permissible center"
        )));
    }
    QModule::normal_form(c.target(), out, m.e())
}

/// `(I * O_{V1} : x_t^{qa})`.
pub fn transform_ideal(i: &Ideal, c: &Chart, qa: u64) -> Result<Ideal> {
    same_ring(i.ring(), c.parent())?;
    let pulled = i.substitute_all(c.images(), c.target())?;
    let k = u32::try_from(qa).map_err(|_| Error::Overflow(format!("exponent {qa}")))?;
    let mut m = vec![0u32; c.target().nvars()];
    m[c.exceptional()] = k;
    colon_by_monomial(&pulled, &ExpVec::new(m))
}

/// Strict transforms of `Lambda` plus the exceptional hypersurface, and
/// `L_1 = (L * O_{V1}) * x_t`.
pub fn transform_log_context(ctx: &LogContext, c: &Chart) -> Result<LogContext> {
    same_ring(ctx.ring(), c.parent())?;
    let mut lambda = ctx.lambda().clone();
    lambda.insert(c.exceptional());
    let mut l = c.apply_exponent(ctx.l())?;
    l = l.checked_add(&ExpVec::unit(l.len(), c.exceptional()))?;
    LogContext::new(c.target(), lambda, l)
}
