//! Plain-text graph formats.
//!
//! Edge list: one `u v [t]` per line, whitespace separated, `t` defaulting to 1.0.
//! `#` starts a comment. A first non-comment line reading `directed` stores each
//! line as a directed entry `u -> v`; otherwise lines are undirected and each
//! weight is halved into both directions.
//!
//! Scores: one `v eta [lambda]` per line. Nodes that never appear in a score
//! line keep interest 0 and lambda 0.5.
//!
//! Node tokens are labels. When every label is a non-negative integer, dense
//! ids follow numeric order; otherwise they follow first appearance.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Result, WasoError};
use crate::graph::{GraphBuilder, NodeRecord, SocialGraph, DEFAULT_LAMBDA};

#[derive(Clone, Copy, Debug, Default)]
pub struct LoadOptions {
    /// Min-max normalize interest and tightness into [0, 1] after loading.
    pub normalize: bool,
}

struct EdgeLine {
    u: String,
    v: String,
    t: f64,
}

struct ScoreLine {
    v: String,
    eta: f64,
    lambda: Option<f64>,
}

fn content(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => line[..pos].trim(),
        None => line.trim(),
    }
}

fn parse_f64(tok: &str, line: usize, what: &str) -> Result<f64> {
    let x: f64 = tok.parse().map_err(|_| WasoError::Parse {
        line,
        message: format!("{what} `{tok}` is not a number"),
    })?;
    if !x.is_finite() {
        return Err(WasoError::Parse {
            line,
            message: format!("{what} `{tok}` is not finite"),
        });
    }
    Ok(x)
}

fn parse_edges(text: &str) -> Result<(bool, Vec<EdgeLine>)> {
    let mut directed = false;
    let mut seen_content = false;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = content(raw);
        if body.is_empty() {
            continue;
        }
        if !seen_content {
            seen_content = true;
            match body.to_ascii_lowercase().as_str() {
                "directed" => {
                    directed = true;
                    continue;
                }
                "undirected" => continue,
                _ => {}
            }
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.len() < 2 || toks.len() > 3 {
            return Err(WasoError::Parse {
                line,
                message: format!("expected `u v [t]`, found {} fields", toks.len()),
            });
        }
        if toks[0] == toks[1] {
            return Err(WasoError::Parse {
                line,
                message: format!("self-loop on `{}`", toks[0]),
            });
        }
        let t = match toks.get(2) {
            Some(tok) => parse_f64(tok, line, "tightness")?,
            None => 1.0,
        };
        edges.push(EdgeLine {
            u: toks[0].to_string(),
            v: toks[1].to_string(),
            t,
        });
    }
    Ok((directed, edges))
}

fn parse_scores(text: &str) -> Result<Vec<ScoreLine>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = content(raw);
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.len() < 2 || toks.len() > 3 {
            return Err(WasoError::Parse {
                line,
                message: format!("expected `v eta [lambda]`, found {} fields", toks.len()),
            });
        }
        let eta = parse_f64(toks[1], line, "interest")?;
        let lambda = match toks.get(2) {
            Some(tok) => {
                let l = parse_f64(tok, line, "lambda")?;
                if !(0.0..=1.0).contains(&l) {
                    return Err(WasoError::Parse {
                        line,
                        message: format!("lambda {l} outside [0, 1]"),
                    });
                }
                Some(l)
            }
            None => None,
        };
        out.push(ScoreLine {
            v: toks[0].to_string(),
            eta,
            lambda,
        });
    }
    Ok(out)
}

/// Builds a graph from edge-list text and optional score text.
pub fn parse_graph(edges: &str, scores: Option<&str>, opts: LoadOptions) -> Result<SocialGraph> {
    let (directed, edge_lines) = parse_edges(edges)?;
    let score_lines = match scores {
        Some(s) => parse_scores(s)?,
        None => Vec::new(),
    };

    let mut labels: Vec<&str> = Vec::new();
    let mut seen: HashMap<&str, ()> = HashMap::new();
    let tokens = edge_lines
        .iter()
        .flat_map(|e| [e.u.as_str(), e.v.as_str()])
        .chain(score_lines.iter().map(|s| s.v.as_str()));
    for tok in tokens {
        if seen.insert(tok, ()).is_none() {
            labels.push(tok);
        }
    }
    let numeric: Option<Vec<u64>> = labels.iter().map(|l| l.parse::<u64>().ok()).collect();
    if let Some(nums) = numeric {
        let mut order: Vec<usize> = (0..labels.len()).collect();
        order.sort_by_key(|&i| nums[i]);
        labels = order.into_iter().map(|i| labels[i]).collect();
    }

    let mut b = GraphBuilder::new();
    let mut id: HashMap<&str, usize> = HashMap::with_capacity(labels.len());
    for l in &labels {
        let v = b.add_labeled_node(*l, NodeRecord { interest: 0.0, lambda: DEFAULT_LAMBDA });
        id.insert(l, v);
    }
    for e in &edge_lines {
        let (u, v) = (id[e.u.as_str()], id[e.v.as_str()]);
        if directed {
            b.set_tightness(u, v, e.t)?;
        } else {
            b.add_undirected(u, v, e.t)?;
        }
    }
    for s in &score_lines {
        let v = id[s.v.as_str()];
        b.set_interest(v, s.eta)?;
        if let Some(l) = s.lambda {
            b.set_lambda(v, l)?;
        }
    }
    let g = b.build()?;
    Ok(if opts.normalize { g.normalized() } else { g })
}

pub fn load_graph(edges: &Path, scores: Option<&Path>, opts: LoadOptions) -> Result<SocialGraph> {
    let edge_text = std::fs::read_to_string(edges)?;
    let score_text = match scores {
        Some(p) => Some(std::fs::read_to_string(p)?),
        None => None,
    };
    parse_graph(&edge_text, score_text.as_deref(), opts)
}

fn is_symmetric(g: &SocialGraph) -> bool {
    (0..g.n()).all(|i| {
        g.out_edges(i)
            .iter()
            .all(|&(j, t)| g.edge(j, i) == Some(t))
    })
}

/// Serializes the edges. Symmetric graphs are written undirected (weights doubled
/// back to file weight), anything else gets a `directed` header. Round trips exactly.
pub fn write_edge_list(g: &SocialGraph) -> String {
    let mut out = String::new();
    if is_symmetric(g) {
        for i in 0..g.n() {
            for &(j, t) in g.out_edges(i) {
                if i < j {
                    let _ = writeln!(out, "{} {} {}", g.label(i), g.label(j), t * 2.0);
                }
            }
        }
    } else {
        out.push_str("directed\n");
        for i in 0..g.n() {
            for &(j, t) in g.out_edges(i) {
                let _ = writeln!(out, "{} {} {}", g.label(i), g.label(j), t);
            }
        }
    }
    out
}

pub fn write_scores(g: &SocialGraph) -> String {
    let mut out = String::new();
    for (i, rec) in g.nodes().iter().enumerate() {
        let _ = writeln!(out, "{} {} {}", g.label(i), rec.interest, rec.lambda);
    }
    out
}
