//! Text formats for graphs and candidate-edge universes.
//!
//! Existing-edge file: one `src dst p` triple per line, whitespace separated,
//! `#` starts a comment. A line holding a single label declares an isolated node.
//!
//! Candidate file: `src dst p cost` per line, or `src dst cost` with the
//! probability taken from [`LoadOptions::default_candidate_p`]. Alternatively a
//! JSON generator config: `{"mode":"uniform","cost":x,"p":y}` or
//! `{"mode":"range","cost_min":a,"cost_max":b,"p":y,"seed":s}`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::{GraphBuilder, GraphError, InvalidGraph, NodeId, SocialGraph};
use crate::money::Money;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadOptions {
    /// Probability given to candidate edges whose line or config omits one.
    pub default_candidate_p: f64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            default_candidate_p: 0.5,
        }
    }
}

/// Deterministic expansion of candidate edges over every non-edge `(u, v)`, `u != v`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum CandidateGenerator {
    Uniform {
        cost: f64,
        #[serde(default)]
        p: Option<f64>,
    },
    Range {
        cost_min: f64,
        cost_max: f64,
        #[serde(default)]
        p: Option<f64>,
        #[serde(default)]
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum CandidateSpec {
    None,
    List(String),
    Generator(CandidateGenerator),
}

impl CandidateSpec {
    /// Interprets `text` as a JSON generator config when it starts with `{`,
    /// otherwise as a candidate edge list.
    pub fn from_text(text: &str) -> Result<Self, GraphError> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str(text)
                .map(CandidateSpec::Generator)
                .map_err(|e| GraphError::Generator(e.to_string()))
        } else {
            Ok(CandidateSpec::List(text.to_string()))
        }
    }
}

/// Parses an existing-edge list and a candidate specification into a validated graph.
pub fn load_graph<F: Scalar>(
    edge_text: &str,
    candidates: &CandidateSpec,
    options: &LoadOptions,
) -> Result<SocialGraph<F>, GraphError> {
    let mut builder = GraphBuilder::<F>::new();
    for (line_no, fields) in data_lines(edge_text) {
        let at = |kind| GraphError::Line {
            file: "edges",
            line: line_no,
            kind,
        };
        match fields.as_slice() {
            [label] => {
                builder.node(label);
            }
            [src, dst, p] => {
                let p = parse_probability::<F>(p).map_err(at)?;
                let (s, t) = (builder.node(src), builder.node(dst));
                builder.edge(s, t, p).map_err(at)?;
            }
            _ => {
                return Err(at(InvalidGraph::Parse(format!(
                    "expected `src dst p`, found {} fields",
                    fields.len()
                ))))
            }
        }
    }

    match candidates {
        CandidateSpec::None => {}
        CandidateSpec::List(text) => {
            for (line_no, fields) in data_lines(text) {
                let at = |kind| GraphError::Line {
                    file: "candidates",
                    line: line_no,
                    kind,
                };
                let (src, dst, p, cost) = match fields.as_slice() {
                    [src, dst, p, cost] => (src, dst, parse_probability::<F>(p).map_err(at)?, cost),
                    [src, dst, cost] => (
                        src,
                        dst,
                        probability_from_f64::<F>(options.default_candidate_p).map_err(at)?,
                        cost,
                    ),
                    _ => {
                        return Err(at(InvalidGraph::Parse(format!(
                            "expected `src dst p cost`, found {} fields",
                            fields.len()
                        ))))
                    }
                };
                let cost = parse_cost(cost).map_err(at)?;
                let (s, t) = (builder.node(src), builder.node(dst));
                builder.candidate(s, t, p, cost).map_err(at)?;
            }
        }
        CandidateSpec::Generator(generator) => expand_generator(&mut builder, generator, options)?,
    }
    Ok(builder.build())
}

fn expand_generator<F: Scalar>(
    builder: &mut GraphBuilder<F>,
    generator: &CandidateGenerator,
    options: &LoadOptions,
) -> Result<(), GraphError> {
    let gen_err = |e: InvalidGraph| GraphError::Generator(e.to_string());
    let unit_cost = |x: f64| -> Result<Money, GraphError> {
        let m = Money::from_f64_exact(x).map_err(|e| GraphError::Generator(e.to_string()))?;
        if m < Money::ZERO || m > Money::ONE {
            return Err(gen_err(InvalidGraph::CostOutOfRange(x.to_string())));
        }
        Ok(m)
    };
    let p_of = |p: Option<f64>| {
        probability_from_f64::<F>(p.unwrap_or(options.default_candidate_p)).map_err(gen_err)
    };
    let n = builder.node_count() as u32;
    let pairs: Vec<(NodeId, NodeId)> = (0..n)
        .flat_map(|u| (0..n).map(move |v| (NodeId(u), NodeId(v))))
        .filter(|&(u, v)| u != v && !builder.has_edge(u, v))
        .collect();
    match *generator {
        CandidateGenerator::Uniform { cost, p } => {
            let (cost, p) = (unit_cost(cost)?, p_of(p)?);
            for (u, v) in pairs {
                builder.candidate(u, v, p, cost).map_err(gen_err)?;
            }
        }
        CandidateGenerator::Range {
            cost_min,
            cost_max,
            p,
            seed,
        } => {
            let (lo, hi, p) = (unit_cost(cost_min)?, unit_cost(cost_max)?, p_of(p)?);
            if lo > hi {
                return Err(GraphError::Generator(format!(
                    "cost_min {lo} exceeds cost_max {hi}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for (u, v) in pairs {
                let cost = Money::from_micros(rng.gen_range(lo.micros()..=hi.micros()));
                builder.candidate(u, v, p, cost).map_err(gen_err)?;
            }
        }
    }
    Ok(())
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body.split_whitespace().collect();
        (!fields.is_empty()).then_some((i + 1, fields))
    })
}

fn parse_probability<F: Scalar>(text: &str) -> Result<F, InvalidGraph> {
    let value: f64 = text
        .parse()
        .map_err(|_| InvalidGraph::Parse(format!("invalid probability `{text}`")))?;
    probability_from_f64(value)
}

fn probability_from_f64<F: Scalar>(value: f64) -> Result<F, InvalidGraph> {
    if !(0.0..=1.0).contains(&value) {
        return Err(InvalidGraph::ProbabilityOutOfRange(value));
    }
    Ok(F::of(value))
}

fn parse_cost(text: &str) -> Result<Money, InvalidGraph> {
    let cost: Money = text
        .parse()
        .map_err(|e| InvalidGraph::Parse(format!("invalid cost: {e}")))?;
    if cost < Money::ZERO || cost > Money::ONE {
        return Err(InvalidGraph::CostOutOfRange(text.to_string()));
    }
    Ok(cost)
}

/// Serializes nodes and existing edges; reparsing yields the same ids and labels.
pub fn write_edge_list<F: Scalar>(graph: &SocialGraph<F>) -> String {
    let mut out = String::from("# nodes\n");
    for label in graph.labels() {
        let _ = writeln!(out, "{label}");
    }
    out.push_str("# src dst p\n");
    for e in graph.edges() {
        let _ = writeln!(out, "{} {} {}", graph.label(e.source), graph.label(e.target), e.p);
    }
    out
}

pub fn write_candidate_list<F: Scalar>(graph: &SocialGraph<F>) -> String {
    let mut out = String::from("# src dst p cost\n");
    for c in graph.candidates() {
        let _ = writeln!(
            out,
            "{} {} {} {}",
            graph.label(c.source),
            graph.label(c.target),
            c.p,
            c.cost
        );
    }
    out
}
