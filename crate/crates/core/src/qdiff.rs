//! q-differential collections `(I_1, ..., I_{q-1})`, logarithmic triples
//! `(M, Lambda, L)`, and the sequence runner built on them.

use std::collections::BTreeSet;
use std::fmt;

use crate::diffops::{diff_ideal, diff_plus_components, log_diff_plus_components, LogContext};
use crate::error::{Error, Result};
use crate::ffpoly::{same_ring, ExpVec, Ring, RingRef};
use crate::geom::{a_transform_module, blowup_chart, transform_ideal, transform_log_context, Chart};
use crate::ideals::{colon_by_monomial, ideal_included, ideal_order_at, Ideal, Order, PointSpec};
use crate::parse::parse_poly;
use crate::qmod::{candidate_points, eta_table, max_a_for_center, max_locus, q_order_at, CandidateSpec, QModule};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QDiffCollection {
    ring: RingRef,
    q: u64,
    ideals: Vec<Ideal>,
}

impl QDiffCollection {
    pub fn new(ring: &RingRef, q: u64, ideals: Vec<Ideal>) -> Result<Self> {
        if q < 2 {
            return Err(Error::OutOfRange(format!("q = {q}")));
        }
        if ideals.len() as u64 != q - 1 {
            return Err(Error::LengthMismatch {
                expected: (q - 1) as usize,
                found: ideals.len(),
            });
        }
        for i in &ideals {
            same_ring(ring, i.ring())?;
        }
        Ok(QDiffCollection {
            ring: ring.clone(),
            q,
            ideals,
        })
    }

    pub fn zero(ring: &RingRef, q: u64) -> Self {
        QDiffCollection {
            ring: ring.clone(),
            q,
            ideals: vec![Ideal::zero(ring); (q - 1) as usize],
        }
    }

    pub fn ring(&self) -> &RingRef {
        &self.ring
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// `I_1, ..., I_{q-1}` (index `i - 1` holds `I_i`).
    pub fn ideals(&self) -> &[Ideal] {
        &self.ideals
    }

    pub fn component(&self, i: u64) -> &Ideal {
        &self.ideals[(i - 1) as usize]
    }

    pub fn is_zero(&self) -> bool {
        self.ideals.iter().all(Ideal::is_zero)
    }

    pub fn is_monomial(&self) -> bool {
        self.ideals.iter().all(Ideal::is_monomial)
    }

    pub fn render_with<F: Fn(usize) -> String>(&self, name: F) -> String {
        let parts: Vec<String> = self.ideals.iter().map(|i| i.render_with(&name)).collect();
        format!("({})", parts.join(", "))
    }
}

impl fmt::Display for QDiffCollection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_with(|i| self.ring.display_name(i)))
    }
}

/// `G(M) = (Diff^1_+(M), ..., Diff^{q-1}_+(M))`.
pub fn make_g(m: &QModule) -> Result<QDiffCollection> {
    QDiffCollection::new(m.ring(), m.q(), diff_plus_components(m)?)
}

/// The module together with its normal-crossings data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogTriple {
    module: QModule,
    ctx: LogContext,
}

impl LogTriple {
    pub fn new(module: QModule, ctx: LogContext) -> Result<Self> {
        same_ring(module.ring(), ctx.ring())?;
        Ok(LogTriple { module, ctx })
    }

    pub fn module(&self) -> &QModule {
        &self.module
    }

    pub fn ctx(&self) -> &LogContext {
        &self.ctx
    }

    pub fn ring(&self) -> &RingRef {
        self.module.ring()
    }
}

/// `G(M, Lambda, L)`: component `i` is `(Diff^i_{Lambda,+}(M) : L^i)`.
pub fn make_g_log(t: &LogTriple) -> Result<QDiffCollection> {
    let comps = log_diff_plus_components(&t.module, &t.ctx)?;
    let mut out = Vec::with_capacity(comps.len());
    for (k, ideal) in comps.iter().enumerate() {
        let li = t.ctx.l().checked_scale(k as u64 + 1)?;
        out.push(colon_by_monomial(ideal, &li)?);
    }
    QDiffCollection::new(t.ring(), t.module.q(), out)
}

/// Componentwise `G ⊆ H` (`H` monomial).
pub fn collection_included(g: &QDiffCollection, h: &QDiffCollection) -> Result<bool> {
    same_ring(&g.ring, &h.ring)?;
    if g.q != h.q {
        return Err(Error::Domain(format!("q differs: {} vs {}", g.q, h.q)));
    }
    for (a, b) in g.ideals.iter().zip(&h.ideals) {
        if !ideal_included(a, b)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Chain `I_i ⊆ I_{i+1}` and `Diff^j(I_i) ⊆ I_{i+j}` for `i + j <= q - 1`.
pub fn validate_qdiff(g: &QDiffCollection) -> Result<bool> {
    if !g.is_monomial() {
        return Err(Error::Unsupported(format!(
            "validation needs monomial components, got {g}"
        )));
    }
    let top = g.q - 1;
    for i in 1..top {
        if !ideal_included(g.component(i), g.component(i + 1))? {
            return Ok(false);
        }
    }
    for i in 1..=top {
        for j in 1..=top - i {
            let d = diff_ideal(g.component(i), j)?;
            if !ideal_included(&d, g.component(i + j))? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `eta_pt(G) = min_i (nu_pt(I_i) + i)`.
pub fn eta_g_at(g: &QDiffCollection, pt: &PointSpec) -> Result<Order> {
    pt.validate(&g.ring)?;
    let mut best = Order::Infinite;
    for (k, ideal) in g.ideals.iter().enumerate() {
        best = best.min(ideal_order_at(ideal, pt)?.plus(k as u64 + 1));
    }
    Ok(best)
}

/// Componentwise `(I_i * O_{V1} : x_t^{qa})`.
pub fn collection_transform(g: &QDiffCollection, c: &Chart, a: u64) -> Result<QDiffCollection> {
    if a == 0 {
        return Err(Error::OutOfRange("a must be at least 1".into()));
    }
    same_ring(&g.ring, c.parent())?;
    let qa = g.q.checked_mul(a).ok_or_else(|| Error::Overflow(format!("q*a = {}*{a}", g.q)))?;
    let ideals = g
        .ideals
        .iter()
        .map(|i| transform_ideal(i, c, qa))
        .collect::<Result<Vec<_>>>()?;
    QDiffCollection::new(c.target(), g.q, ideals)
}

/// `(M_1^(a), Lambda_1, L_1)` on the chart.
pub fn triple_transform(t: &LogTriple, c: &Chart, a: u64) -> Result<LogTriple> {
    let m1 = a_transform_module(&t.module, c, a)?;
    let ctx1 = transform_log_context(&t.ctx, c)?;
    LogTriple::new(m1, ctx1)
}

/// One row of a pointwise comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointwiseRow {
    pub chart_point: PointSpec,
    pub image: PointSpec,
    /// `eta` of the source collection at the image point.
    pub source_eta: Order,
    /// `eta` of the transformed collection at the chart point.
    pub chart_eta: Order,
}

impl PointwiseRow {
    pub fn holds(&self) -> bool {
        self.source_eta >= self.chart_eta
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointwiseReport {
    /// `eta(G)` equals `qa + b` with `0 <= b < q` along the sampled points of
    /// the center.
    pub precondition_holds: bool,
    pub precondition_note: String,
    pub rows: Vec<PointwiseRow>,
}

impl PointwiseReport {
    pub fn violations(&self) -> Vec<&PointwiseRow> {
        self.rows.iter().filter(|r| !r.holds()).collect()
    }

    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(PointwiseRow::holds)
    }
}

/// Compare `eta_{pi(x)}(G)` with `eta_x(G_1^(a))` at the supplied chart points.
pub fn check_pointwise(
    g: &QDiffCollection,
    c: &Chart,
    a: u64,
    pts: &[PointSpec],
) -> Result<PointwiseReport> {
    let g1 = collection_transform(g, c, a)?;
    let parent = c.parent();
    let mut samples = vec![PointSpec::generic(parent, c.center().clone())?];
    let mut rows = Vec::with_capacity(pts.len());
    for pt in pts {
        let image = c.image_point(pt)?;
        if image.lies_on(c.center()) && !samples.contains(&image) {
            samples.push(image.clone());
        }
        rows.push(PointwiseRow {
            chart_point: pt.clone(),
            source_eta: eta_g_at(g, &image)?,
            chart_eta: eta_g_at(&g1, pt)?,
            image,
        });
    }
    let origin = PointSpec::origin(parent.nvars());
    if !samples.contains(&origin) {
        samples.push(origin);
    }
    let values = samples
        .iter()
        .map(|s| eta_g_at(g, s))
        .collect::<Result<Vec<_>>>()?;
    let target = Order::Finite(g.q * a);
    let constant = values.iter().all(|v| *v == values[0]);
    let in_band = match values[0] {
        Order::Finite(v) => v / g.q == a,
        Order::Infinite => false,
    };
    let precondition_holds = constant && in_band && values[0] >= target;
    let precondition_note = if precondition_holds {
        format!("eta(G) = {} along the center", values[0])
    } else if !constant {
        format!(
            "eta(G) is not constant along the sampled center points: {}",
            values.iter().map(Order::to_string).collect::<Vec<_>>().join(", ")
        )
    } else {
        format!("eta(G) = {} along the center is not of the form {}*{a} + b", values[0], g.q)
    };
    Ok(PointwiseReport {
        precondition_holds,
        precondition_note,
        rows,
    })
}

/// Exponent `a` of a step: fixed, or derived from the collection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AValue {
    Auto,
    Explicit(u64),
}

/// A blowup step: center and chart variable given by (display or base) name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub center: Vec<String>,
    pub chart: String,
    pub a: AValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceJob {
    pub p: u64,
    pub e: u32,
    pub vars: Vec<String>,
    pub gens: Vec<String>,
    pub lambda: Vec<String>,
    pub l: Option<String>,
    pub steps: Vec<Step>,
    pub candidates: CandidateSpec,
    /// Points in `PointSpec::parse` syntax, evaluated at every stage.
    pub queries: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryRow {
    pub point: String,
    pub eta_g: Option<Order>,
    pub eta_m: Order,
    pub q_order: Order,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepReport {
    pub center: Vec<String>,
    pub chart: String,
    pub a: u64,
    pub a_auto: bool,
    /// `eta(G)` at the generic point of the center, when `G` is available.
    pub eta_center: Option<Order>,
    pub b: Option<u64>,
    pub center_in_max_locus: Option<bool>,
    /// Chart points whose `eta` exceeded `eta` of the previous collection at
    /// the image point.
    pub pointwise_violations: Vec<String>,
    pub hypotheses_hold: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageReport {
    pub index: usize,
    pub variables: Vec<String>,
    pub base_names: Vec<String>,
    pub module: Vec<String>,
    pub lambda: Vec<String>,
    pub l: String,
    /// Rendered components of `G(M, Lambda, L)`; `None` outside the exact fragment.
    pub collection: Option<Vec<String>>,
    pub collection_note: Option<String>,
    pub validated: Option<bool>,
    pub eta_g_max: Option<Order>,
    pub eta_g_locus: Vec<String>,
    pub eta_m_max: Order,
    pub eta_m_locus: Vec<String>,
    pub queries: Vec<QueryRow>,
    pub step: Option<StepReport>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StopReason {
    BelowQ(Order),
    StepsExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceReport {
    pub p: u64,
    pub e: u32,
    pub q: u64,
    pub stages: Vec<StageReport>,
    pub stop: StopReason,
    /// `(a_i, b_i)` with `max eta(G_i) = q a_i + b_i`, per stage with a collection.
    pub chain: Vec<(usize, u64, u64)>,
}

impl SequenceReport {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for st in &self.stages {
            if let Some(step) = &st.step {
                if step.hypotheses_hold {
                    for v in &step.pointwise_violations {
                        out.push(format!("step {}: {v}", st.index + 1));
                    }
                }
            }
        }
        for w in self.chain.windows(2) {
            let (i0, a0, b0) = w[0];
            let (i1, a1, b1) = w[1];
            let step_ok = self.stages[i0].step.as_ref().is_some_and(|s| s.hypotheses_hold);
            if i1 == i0 + 1 && step_ok && (a1 * self.q + b1) > (a0 * self.q + b0) {
                out.push(format!(
                    "max eta(G) rose from {} at stage {i0} to {} at stage {i1}",
                    a0 * self.q + b0,
                    a1 * self.q + b1
                ));
            }
        }
        out
    }

    /// Internal-consistency error when the theorem hypotheses held and the
    /// inequality failed.
    pub fn check(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Internal(v.join("; ")))
        }
    }
}

fn resolve_names(ring: &RingRef, names: &[String]) -> Result<BTreeSet<usize>> {
    names
        .iter()
        .map(|n| {
            ring.index_of(n.trim())
                .ok_or_else(|| Error::Domain(format!("unknown variable `{}`", n.trim())))
        })
        .collect()
}

struct Stage {
    triple: LogTriple,
    g: std::result::Result<QDiffCollection, Error>,
}

fn build_stage(triple: LogTriple) -> Result<Stage> {
    let g = match make_g_log(&triple) {
        Err(e) if !matches!(e, Error::Unsupported(_)) => return Err(e),
        other => other,
    };
    Ok(Stage { triple, g })
}

fn stage_report(
    index: usize,
    stage: &Stage,
    job: &SequenceJob,
) -> Result<(StageReport, Option<Vec<Order>>)> {
    let ring = stage.triple.ring().clone();
    let name = |i: usize| ring.display_name(i);
    let m = stage.triple.module();
    let ctx = stage.triple.ctx();
    let cands = candidate_points(&ring, &job.candidates);
    let m_values = eta_table(m, &cands)?;
    let (eta_m_max, m_locus) = max_locus(&cands, &m_values);

    let (collection, note, validated, g_values) = match &stage.g {
        Ok(g) => {
            let values = cands
                .iter()
                .map(|p| eta_g_at(g, p))
                .collect::<Result<Vec<_>>>()?;
            let validated = if g.is_monomial() { Some(validate_qdiff(g)?) } else { None };
            (
                Some(g.ideals().iter().map(|i| i.render_with(name)).collect()),
                None,
                validated,
                Some(values),
            )
        }
        Err(e) => (None, Some(e.to_string()), None, None),
    };
    let (eta_g_max, g_locus) = match &g_values {
        Some(v) => {
            let (best, locus) = max_locus(&cands, v);
            (Some(best), locus)
        }
        None => (None, Vec::new()),
    };

    let mut queries = Vec::new();
    for qtext in &job.queries {
        let Ok(pt) = PointSpec::parse(qtext, &ring) else { continue };
        let eta_g = match &stage.g {
            Ok(g) => Some(eta_g_at(g, &pt)?),
            Err(_) => None,
        };
        queries.push(QueryRow {
            point: pt.render(&ring),
            eta_g,
            eta_m: crate::qmod::eta_at(m, &pt)?,
            q_order: q_order_at(m, &pt)?,
        });
    }

    let report = StageReport {
        index,
        variables: (0..ring.nvars()).map(name).collect(),
        base_names: ring.base_names().to_vec(),
        module: m.generators().iter().map(|g| g.render_with(name)).collect(),
        lambda: ctx.lambda().iter().map(|&j| name(j)).collect(),
        l: ctx.l_poly().render_with(name),
        collection,
        collection_note: note,
        validated,
        eta_g_max,
        eta_g_locus: g_locus.iter().map(|p| p.render(&ring)).collect(),
        eta_m_max,
        eta_m_locus: m_locus.iter().map(|p| p.render(&ring)).collect(),
        queries,
        step: None,
    };
    Ok((report, g_values))
}

/// Parse the job's ring, module and logarithmic data.
pub fn initial_triple(job: &SequenceJob) -> Result<LogTriple> {
    let ring = Ring::new(job.p, &job.vars)?;
    let gens = job
        .gens
        .iter()
        .map(|g| parse_poly(g, &ring))
        .collect::<Result<Vec<_>>>()?;
    let m = QModule::normal_form(&ring, gens, job.e)?;
    let lambda = resolve_names(&ring, &job.lambda)?;
    let l = match &job.l {
        Some(src) => {
            let poly = parse_poly(src, &ring)?;
            match poly.leading_term() {
                Some((e, _)) if poly.is_monomial() => e.clone(),
                _ => {
                    return Err(Error::Domain(format!("L = `{src}` must be a single monomial")))
                }
            }
        }
        None => ExpVec::zero(ring.nvars()),
    };
    let ctx = LogContext::new(&ring, lambda, l)?;
    LogTriple::new(m, ctx)
}

/// Run the steps of `job` in order, stopping once `max eta(G) < q` over the
/// candidate set.
pub fn run_sequence(job: &SequenceJob) -> Result<SequenceReport> {
    let triple = initial_triple(job)?;
    let q = triple.module().q();
    let mut stage = build_stage(triple)?;
    let mut stages = Vec::new();
    let mut chain = Vec::new();
    let mut stop = StopReason::StepsExhausted;
    let mut step_iter = job.steps.iter();

    loop {
        let index = stages.len();
        let (mut report, g_values) = stage_report(index, &stage, job)?;
        if let Some(Order::Finite(v)) = report.eta_g_max {
            chain.push((index, v / q, v % q));
        }
        if let Some(best) = report.eta_g_max {
            if best < Order::Finite(q) {
                stop = StopReason::BelowQ(best);
                stages.push(report);
                break;
            }
        }
        let Some(step) = step_iter.next() else {
            stages.push(report);
            break;
        };
        let ring = stage.triple.ring().clone();
        let center = resolve_names(&ring, &step.center)?;
        let t = *resolve_names(&ring, std::slice::from_ref(&step.chart))?
            .iter()
            .next()
            .expect("one name");
        let chart = blowup_chart(&ring, &center, t)?;
        let xi = PointSpec::generic(&ring, center.clone())?;

        let (eta_center, in_locus) = match (&stage.g, &g_values) {
            (Ok(g), Some(vals)) => {
                let ec = eta_g_at(g, &xi)?;
                let best = vals.iter().copied().max().unwrap_or(Order::Infinite);
                (Some(ec), Some(ec == best))
            }
            _ => (None, None),
        };
        let (a, a_auto) = match step.a {
            AValue::Explicit(a) => (a, false),
            AValue::Auto => match eta_center {
                Some(Order::Finite(v)) => (v / q, true),
                Some(Order::Infinite) => {
                    return Err(Error::Domain("eta(G) is infinite along the center".into()))
                }
                None => (max_a_for_center(stage.triple.module(), &center)?, true),
            },
        };
        if a == 0 {
            return Err(Error::NotPermissible(format!(
                "center {{{}}} has a = 0",
                center.iter().map(|&i| ring.display_name(i)).collect::<Vec<_>>().join(", ")
            )));
        }
        let b = match eta_center {
            Some(Order::Finite(v)) if v >= q * a => Some(v - q * a),
            _ => None,
        };
        let next = build_stage(triple_transform(&stage.triple, &chart, a)?)?;

        let hypotheses_hold = in_locus == Some(true)
            && matches!(eta_center, Some(Order::Finite(v)) if v / q == a);
        let mut violations = Vec::new();
        if let (Ok(g0), Ok(g1)) = (&stage.g, &next.g) {
            for pt in candidate_points(chart.target(), &job.candidates) {
                let image = chart.image_point(&pt)?;
                let before = eta_g_at(g0, &image)?;
                let after = eta_g_at(g1, &pt)?;
                if after > before {
                    violations.push(format!(
                        "eta(G) = {after} at {} but {before} at its image {}",
                        pt.render(chart.target()),
                        image.render(&ring)
                    ));
                }
            }
        }
        report.step = Some(StepReport {
            center: center.iter().map(|&i| ring.display_name(i)).collect(),
            chart: ring.display_name(t),
            a,
            a_auto,
            eta_center,
            b,
            center_in_max_locus: in_locus,
            pointwise_violations: violations,
            hypotheses_hold,
        });
        stages.push(report);
        stage = next;
    }

    Ok(SequenceReport {
        p: job.p,
        e: job.e,
        q,
        stages,
        stop,
        chain,
    })
}
