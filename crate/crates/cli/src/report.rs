//! Plain-text and JSON renderings of a `SequenceReport`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use qsing_core::qdiff::{SequenceReport, StageReport, StepReport, StopReason};
use qsing_core::{parse_poly, Error, Ideal, Order, PointSpec, Result, Ring, RingRef};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Verbosity {
    Brief,
    #[default]
    Full,
}

impl std::str::FromStr for Verbosity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "brief" => Ok(Verbosity::Brief),
            "full" => Ok(Verbosity::Full),
            other => Err(format!("unknown verbosity `{other}` (expected brief or full)")),
        }
    }
}

/// Rebuild the ring of a stage from its base names and primed display names.
pub fn stage_ring(p: u64, base: &[String], display: &[String]) -> Result<RingRef> {
    let mut ring = Ring::new(p, base)?;
    let counts: Vec<usize> = base
        .iter()
        .zip(display)
        .map(|(b, d)| d.len().saturating_sub(b.len()))
        .collect();
    let top = counts.iter().copied().max().unwrap_or(0);
    for k in 0..top {
        let bump: BTreeSet<usize> = (0..counts.len()).filter(|&i| counts[i] > k).collect();
        ring = ring.reprimed(&bump);
    }
    Ok(ring)
}

/// Parse an ideal rendered as `<g1, g2, ...>`.
pub fn parse_ideal(text: &str, ring: &RingRef) -> Result<Ideal> {
    let inner = text
        .trim()
        .strip_prefix('<')
        .and_then(|t| t.strip_suffix('>'))
        .ok_or_else(|| Error::Domain(format!("`{text}` is not of the form <...>")))?;
    if inner.trim().is_empty() {
        return Ok(Ideal::zero(ring));
    }
    let gens = inner
        .split(',')
        .map(|g| parse_poly(g, ring))
        .collect::<Result<Vec<_>>>()?;
    Ideal::new(ring, gens)
}

fn order_text(o: Option<Order>) -> String {
    o.map_or_else(|| "n/a".to_string(), |o| o.to_string())
}

fn bracket(items: &[String]) -> String {
    format!("<{}>", items.join(", "))
}

fn step_line(s: &StepReport) -> String {
    let mut line = format!(
        "step: center {{{}}}, chart {}, a = {}{}",
        s.center.join(", "),
        s.chart,
        s.a,
        if s.a_auto { " (auto)" } else { "" }
    );
    if let Some(ec) = s.eta_center {
        let _ = write!(line, ", η(G) at center = {ec}");
    }
    if let Some(b) = s.b {
        let _ = write!(line, ", b = {b}");
    }
    line
}

fn stage_text(out: &mut String, st: &StageReport, v: Verbosity) {
    let _ = writeln!(out, "stage {}", st.index);
    let _ = writeln!(out, "  variables: {}", st.variables.join(", "));
    let _ = writeln!(out, "  M = {}", bracket(&st.module));
    if v == Verbosity::Full {
        let _ = writeln!(out, "  Lambda = {{{}}}", st.lambda.join(", "));
        let _ = writeln!(out, "  L = {}", st.l);
    }
    match &st.collection {
        Some(c) => {
            let mark = match st.validated {
                Some(true) => "validated",
                Some(false) => "INVALID",
                None => "unvalidated",
            };
            let _ = writeln!(out, "  G = ({}) [{mark}]", c.join(", "));
        }
        None => {
            let note = st.collection_note.as_deref().unwrap_or("not computed");
            let _ = writeln!(out, "  G unavailable: {note}");
        }
    }
    let locus = |l: &[String]| {
        if v == Verbosity::Full && !l.is_empty() {
            format!(" at {}", l.join("; "))
        } else {
            String::new()
        }
    };
    let _ = writeln!(out, "  max η(M) over candidates = {}{}", st.eta_m_max, locus(&st.eta_m_locus));
    if st.collection.is_some() {
        let _ = writeln!(
            out,
            "  max η(G) over candidates = {}{}",
            order_text(st.eta_g_max),
            locus(&st.eta_g_locus)
        );
    }
    if v == Verbosity::Full {
        for q in &st.queries {
            let _ = writeln!(
                out,
                "  at {}: η(G) = {}, η(M) = {}, ν^(q) = {}",
                q.point,
                order_text(q.eta_g),
                q.eta_m,
                q.q_order
            );
        }
    }
    if let Some(s) = &st.step {
        let _ = writeln!(out, "  {}", step_line(s));
        if v == Verbosity::Full {
            if s.center_in_max_locus == Some(false) {
                let _ = writeln!(out, "  note: center is not in the max η(G) locus");
            }
            if !s.hypotheses_hold {
                for w in &s.pointwise_violations {
                    let _ = writeln!(out, "  note (hypotheses not met): {w}");
                }
            }
        }
    }
}

/// Human-readable report. The last line states why the run stopped.
pub fn render_text(rep: &SequenceReport, v: Verbosity) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "sequence over F_{}, e = {}, q = {}", rep.p, rep.e, rep.q);
    for st in &rep.stages {
        out.push('\n');
        stage_text(&mut out, st, v);
    }
    out.push('\n');
    for w in rep.violations() {
        let _ = writeln!(out, "violation: {w}");
    }
    match rep.stop {
        StopReason::BelowQ(o) => {
            let _ = writeln!(out, "max η(G) = {o} < q: stop");
        }
        StopReason::StepsExhausted => {
            let last = rep.stages.last().and_then(|s| s.eta_g_max);
            match last {
                Some(o) => {
                    let _ = writeln!(out, "steps exhausted with max η(G) = {o}");
                }
                None => {
                    let _ = writeln!(out, "steps exhausted");
                }
            }
        }
    }
    out
}

fn order_json(o: Option<Order>) -> Value {
    match o {
        None => Value::Null,
        Some(Order::Finite(v)) => json!(v),
        Some(Order::Infinite) => json!("inf"),
    }
}

struct StageRings {
    display: RingRef,
    base: RingRef,
}

impl StageRings {
    fn new(p: u64, st: &StageReport) -> Result<Self> {
        Ok(StageRings {
            display: stage_ring(p, &st.base_names, &st.variables)?,
            base: Ring::new(p, &st.base_names)?,
        })
    }

    fn poly(&self, text: &str) -> Result<String> {
        Ok(parse_poly(text, &self.display)?.render_base())
    }

    fn ideal(&self, text: &str) -> Result<String> {
        Ok(parse_ideal(text, &self.display)?.render_base())
    }

    fn point(&self, text: &str) -> Result<String> {
        Ok(PointSpec::parse(text, &self.display)?.render(&self.base))
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.display
            .index_of(name)
            .ok_or_else(|| Error::Internal(format!("report names unknown variable `{name}`")))
    }
}

fn stage_json(p: u64, st: &StageReport) -> Result<Value> {
    let r = StageRings::new(p, st)?;
    let rename: Vec<Value> = (0..st.variables.len())
        .map(|i| json!({"index": i, "base": st.base_names[i], "display": st.variables[i]}))
        .collect();
    let many = |xs: &[String], f: &dyn Fn(&str) -> Result<String>| -> Result<Vec<String>> {
        xs.iter().map(|x| f(x)).collect()
    };
    let collection = match &st.collection {
        Some(c) => json!(many(c, &|s| r.ideal(s))?),
        None => Value::Null,
    };
    let queries = st
        .queries
        .iter()
        .map(|q| {
            Ok(json!({
                "point": r.point(&q.point)?,
                "eta_g": order_json(q.eta_g),
                "eta_m": order_json(Some(q.eta_m)),
                "q_order": order_json(Some(q.q_order)),
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let step = match &st.step {
        Some(s) => json!({
            "center": s.center.iter().map(|c| r.index(c)).collect::<Result<Vec<_>>>()?,
            "chart": r.index(&s.chart)?,
            "a": s.a,
            "a_auto": s.a_auto,
            "eta_center": order_json(s.eta_center),
            "b": s.b,
            "center_in_max_locus": s.center_in_max_locus,
            "pointwise_violations": s.pointwise_violations,
            "hypotheses_hold": s.hypotheses_hold,
        }),
        None => Value::Null,
    };
    Ok(json!({
        "index": st.index,
        "variables": rename,
        "module": many(&st.module, &|s| r.poly(s))?,
        "lambda": st.lambda.iter().map(|c| r.index(c)).collect::<Result<Vec<_>>>()?,
        "l": r.poly(&st.l)?,
        "collection": collection,
        "collection_note": st.collection_note,
        "validated": st.validated,
        "eta_g_max": order_json(st.eta_g_max),
        "eta_g_locus": many(&st.eta_g_locus, &|s| r.point(s))?,
        "eta_m_max": order_json(Some(st.eta_m_max)),
        "eta_m_locus": many(&st.eta_m_locus, &|s| r.point(s))?,
        "queries": queries,
        "step": step,
    }))
}

/// Structured report. Polynomials use base names; each stage carries a
/// rename table from stable indices to primed display names.
pub fn render_json(rep: &SequenceReport) -> Result<String> {
    let stages = rep
        .stages
        .iter()
        .map(|st| stage_json(rep.p, st))
        .collect::<Result<Vec<_>>>()?;
    let stop = match rep.stop {
        StopReason::BelowQ(o) => json!({"kind": "below_q", "eta_g_max": order_json(Some(o))}),
        StopReason::StepsExhausted => json!({"kind": "steps_exhausted"}),
    };
    let chain: Vec<Value> = rep
        .chain
        .iter()
        .map(|&(i, a, b)| json!({"stage": i, "a": a, "b": b}))
        .collect();
    let doc = json!({
        "p": rep.p,
        "e": rep.e,
        "q": rep.q,
        "stages": stages,
        "stop": stop,
        "chain": chain,
        "violations": rep.violations(),
    });
    let mut s = serde_json::to_string_pretty(&doc)
        .map_err(|e| Error::Internal(format!("json encoding failed: {e}")))?;
    s.push('\n');
    Ok(s)
}
