//! Integer program for the connected group problem, written in LP text format,
//! plus an exhaustive substitution checker that validates the model on tiny graphs.
//!
//! Variables: `x_i` (node selected), `y_i_j` (edge counted), `r_i` (root),
//! `p_i_j_m_n` (arc m->n on the root-i-to-j path), `d_i_j_m` (depth of m on that
//! path). Arcs are the symmetric closure of the stored edges so reachability is
//! undirected, matching the connectivity notion used everywhere else.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Result, WasoError};
use crate::graph::{NodeId, SocialGraph};

/// How arcs on a root path are tied to selected nodes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PathLink {
    /// `p <= x_m` and `p <= x_n`: paths may only use selected nodes.
    #[default]
    Tight,
    /// `p <= 2(x_m + x_n)`: one selected endpoint suffices, which lets a path
    /// pass through an unselected node.
    Loose,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VarKind {
    Binary,
    Integer { lo: i64, hi: i64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Clone, Debug)]
pub struct IlpModel {
    pub n: usize,
    pub k: usize,
    pub variables: Vec<Variable>,
    /// Objective grouped per node: the `x_i` term, then its outgoing `y_i_j` terms
    /// in adjacency order.
    pub objective: Vec<(usize, f64, Vec<(usize, f64)>)>,
    pub constraints: Vec<Constraint>,
    pub x: Vec<usize>,
    pub r: Vec<usize>,
    pub y: HashMap<(NodeId, NodeId), usize>,
    pub p: HashMap<(NodeId, NodeId, NodeId, NodeId), usize>,
    pub d: HashMap<(NodeId, NodeId, NodeId), usize>,
}

/// Node limit for export; the path variables grow as n^2 times the arc count.
pub const MAX_EXPORT_NODES: usize = 60;

struct Builder {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
}

impl Builder {
    fn var(&mut self, name: String, kind: VarKind) -> usize {
        self.variables.push(Variable { name, kind });
        self.variables.len() - 1
    }

    fn row(&mut self, name: String, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.constraints.push(Constraint { name, terms, sense, rhs });
    }
}

/// Builds the model for selecting `k` nodes of `graph`.
pub fn export_ilp(graph: &SocialGraph, k: usize, link: PathLink) -> Result<IlpModel> {
    let n = graph.n();
    if n > MAX_EXPORT_NODES {
        return Err(WasoError::ScaleGuard(format!(
            "{n} nodes exceeds the model export limit of {MAX_EXPORT_NODES}"
        )));
    }
    if k == 0 || k > n {
        return Err(WasoError::InvalidArgument(format!("k = {k} must lie in [1, {n}]")));
    }
    let mut b = Builder { variables: Vec::new(), constraints: Vec::new() };
    let big = n as f64;

    let x: Vec<usize> = (0..n).map(|i| b.var(format!("x_{i}"), VarKind::Binary)).collect();
    let mut y = HashMap::new();
    let mut objective = Vec::with_capacity(n);
    for i in 0..n {
        let mut social = Vec::new();
        for &(j, t) in graph.out_edges(i) {
            let v = b.var(format!("y_{i}_{j}"), VarKind::Binary);
            y.insert((i, j), v);
            social.push((v, t));
        }
        objective.push((x[i], graph.interest(i), social));
    }
    let r: Vec<usize> = (0..n).map(|i| b.var(format!("r_{i}"), VarKind::Binary)).collect();

    let arcs: Vec<(NodeId, NodeId)> = (0..n)
        .flat_map(|m| graph.neighbors(m).iter().map(move |&nn| (m, nn)))
        .collect();
    let mut p = HashMap::new();
    let mut d = HashMap::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for &(m, nn) in &arcs {
                p.insert((i, j, m, nn), b.var(format!("p_{i}_{j}_{m}_{nn}"), VarKind::Binary));
            }
            for m in 0..n {
                let v = b.var(format!("d_{i}_{j}_{m}"), VarKind::Integer { lo: 0, hi: n as i64 });
                d.insert((i, j, m), v);
            }
        }
    }

    b.row("B1".into(), x.iter().map(|&v| (v, 1.0)).collect(), Sense::Eq, k as f64);
    for i in 0..n {
        for &(j, t) in graph.out_edges(i) {
            let yv = y[&(i, j)];
            b.row(format!("B2_{i}_{j}"), vec![(x[i], 1.0), (x[j], 1.0), (yv, -2.0)], Sense::Ge, 0.0);
            if t < 0.0 {
                // Without this a negative edge could be dropped while both ends are selected.
                b.row(format!("B3_{i}_{j}"), vec![(yv, 1.0), (x[i], -1.0), (x[j], -1.0)], Sense::Ge, -1.0);
            }
        }
    }
    b.row("A1".into(), r.iter().map(|&v| (v, 1.0)).collect(), Sense::Eq, 1.0);
    for i in 0..n {
        b.row(format!("A2_{i}"), vec![(r[i], 1.0), (x[i], -1.0)], Sense::Le, 0.0);
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut a3 = vec![(r[i], 1.0), (x[j], 1.0)];
            a3.extend(graph.neighbors(i).iter().map(|&nn| (p[&(i, j, i, nn)], -1.0)));
            b.row(format!("A3_{i}_{j}"), a3, Sense::Le, 1.0);
            let mut a4 = vec![(r[i], 1.0), (x[j], 1.0)];
            a4.extend(graph.neighbors(j).iter().map(|&m| (p[&(i, j, m, j)], -1.0)));
            b.row(format!("A4_{i}_{j}"), a4, Sense::Le, 1.0);
            for m in 0..n {
                if m == i || m == j {
                    continue;
                }
                let mut a5: Vec<(usize, f64)> =
                    graph.neighbors(m).iter().map(|&q| (p[&(i, j, q, m)], 1.0)).collect();
                a5.extend(graph.neighbors(m).iter().map(|&nn| (p[&(i, j, m, nn)], -1.0)));
                if !a5.is_empty() {
                    b.row(format!("A5_{i}_{j}_{m}"), a5, Sense::Eq, 0.0);
                }
            }
            for &(m, nn) in &arcs {
                let pv = p[&(i, j, m, nn)];
                // d_m + (p - 1)|V| < d_n over integers: d_m - d_n + |V| p <= |V| - 1.
                b.row(
                    format!("A6_{i}_{j}_{m}_{nn}"),
                    vec![(d[&(i, j, m)], 1.0), (d[&(i, j, nn)], -1.0), (pv, big)],
                    Sense::Le,
                    big - 1.0,
                );
                match link {
                    PathLink::Tight => {
                        b.row(format!("A7_{i}_{j}_{m}_{nn}_a"), vec![(pv, 1.0), (x[m], -1.0)], Sense::Le, 0.0);
                        b.row(format!("A7_{i}_{j}_{m}_{nn}_b"), vec![(pv, 1.0), (x[nn], -1.0)], Sense::Le, 0.0);
                    }
                    PathLink::Loose => {
                        b.row(
                            format!("A7_{i}_{j}_{m}_{nn}"),
                            vec![(pv, 1.0), (x[m], -2.0), (x[nn], -2.0)],
                            Sense::Le,
                            0.0,
                        );
                    }
                }
            }
        }
    }
    Ok(IlpModel {
        n,
        k,
        variables: b.variables,
        objective,
        constraints: b.constraints,
        x,
        r,
        y,
        p,
        d,
    })
}

fn write_terms(out: &mut String, vars: &[Variable], terms: impl Iterator<Item = (usize, f64)>) {
    let mut first = true;
    let mut width = 0;
    for (v, c) in terms {
        let sign = if c < 0.0 { "-" } else { "+" };
        let piece = if first && c >= 0.0 {
            format!("{} {}", c, vars[v].name)
        } else {
            format!("{sign} {} {}", c.abs(), vars[v].name)
        };
        // LP readers limit line length; wrap long rows.
        if width + piece.len() > 200 {
            out.push_str("\n  ");
            width = 0;
        }
        if !first {
            out.push(' ');
        }
        out.push_str(&piece);
        width += piece.len() + 1;
        first = false;
    }
    if first {
        out.push_str("0 x_0");
    }
}

impl IlpModel {
    pub fn variable_count(&self) -> usize {
        self.variables.len()
    }

    /// Serializes in CPLEX LP text format.
    pub fn to_lp(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "\\ connected group selection, n = {}, k = {}", self.n, self.k);
        out.push_str("Maximize\n obj: ");
        let terms = self
            .objective
            .iter()
            .flat_map(|(xv, eta, social)| std::iter::once((*xv, *eta)).chain(social.iter().copied()));
        write_terms(&mut out, &self.variables, terms);
        out.push_str("\nSubject To\n");
        for c in &self.constraints {
            let _ = write!(out, " {}: ", c.name);
            write_terms(&mut out, &self.variables, c.terms.iter().copied());
            let op = match c.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
                Sense::Eq => "=",
            };
            let _ = writeln!(out, " {op} {}", c.rhs);
        }
        out.push_str("Bounds\n");
        for v in &self.variables {
            if let VarKind::Integer { lo, hi } = v.kind {
                let _ = writeln!(out, " {lo} <= {} <= {hi}", v.name);
            }
        }
        out.push_str("Binaries\n");
        for v in self.variables.iter().filter(|v| v.kind == VarKind::Binary) {
            let _ = writeln!(out, " {}", v.name);
        }
        out.push_str("Generals\n");
        for v in &self.variables {
            if matches!(v.kind, VarKind::Integer { .. }) {
                let _ = writeln!(out, " {}", v.name);
            }
        }
        out.push_str("End\n");
        out
    }

    /// Objective at a full assignment, summed per node (interest, then social
    /// terms) in the same order willingness is evaluated.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        let mut total = 0.0;
        for (xv, eta, social) in &self.objective {
            total += eta * values[*xv];
            let mut s = 0.0;
            for &(v, t) in social {
                if values[v] != 0.0 {
                    s += t * values[v];
                }
            }
            total += s;
        }
        total
    }

    pub fn row_satisfied(&self, c: &Constraint, values: &[f64]) -> bool {
        let lhs: f64 = c.terms.iter().map(|&(v, a)| a * values[v]).sum();
        match c.sense {
            Sense::Le => lhs <= c.rhs + 1e-9,
            Sense::Ge => lhs >= c.rhs - 1e-9,
            Sense::Eq => (lhs - c.rhs).abs() <= 1e-9,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Fixed,
    Path(usize),
    Depth(usize),
}

/// Decides, by exhaustive substitution, which node selections the model admits.
///
/// For a given `x` the checker sets `y_i_j = x_i x_j`, tries every root, and for
/// each root-destination block searches the path binaries depth first (rows are
/// pruned by their attainable range as soon as a variable is fixed). Depth rows
/// form difference constraints, solved by Bellman-Ford.
pub struct SubstitutionChecker<'a> {
    model: &'a IlpModel,
    role: Vec<Role>,
    blocks: Vec<Block>,
    fixed_rows: Vec<usize>,
}

struct Block {
    path_vars: Vec<usize>,
    depth_vars: Vec<usize>,
    path_rows: Vec<usize>,
    depth_rows: Vec<usize>,
    rows_of_var: HashMap<usize, Vec<usize>>,
}

impl<'a> SubstitutionChecker<'a> {
    pub fn new(model: &'a IlpModel) -> Self {
        let mut role = vec![Role::Fixed; model.variables.len()];
        let mut block_of: HashMap<(NodeId, NodeId), usize> = HashMap::new();
        let mut blocks: Vec<Block> = Vec::new();
        let mut keys: Vec<_> = model.p.iter().map(|(&(i, j, _, _), &v)| ((i, j), v, true)).collect();
        keys.extend(model.d.iter().map(|(&(i, j, _), &v)| ((i, j), v, false)));
        keys.sort_by_key(|&(pair, v, _)| (pair, v));
        for (pair, v, is_path) in keys {
            let b = *block_of.entry(pair).or_insert_with(|| {
                blocks.push(Block {
                    path_vars: Vec::new(),
                    depth_vars: Vec::new(),
                    path_rows: Vec::new(),
                    depth_rows: Vec::new(),
                    rows_of_var: HashMap::new(),
                });
                blocks.len() - 1
            });
            if is_path {
                role[v] = Role::Path(b);
                blocks[b].path_vars.push(v);
            } else {
                role[v] = Role::Depth(b);
                blocks[b].depth_vars.push(v);
            }
        }
        let mut fixed_rows = Vec::new();
        for (ri, c) in model.constraints.iter().enumerate() {
            let mut block = None;
            let mut has_depth = false;
            for &(v, _) in &c.terms {
                match role[v] {
                    Role::Fixed => {}
                    Role::Path(b) => block = Some(b),
                    Role::Depth(b) => {
                        block = Some(b);
                        has_depth = true;
                    }
                }
            }
            match block {
                None => fixed_rows.push(ri),
                Some(b) if has_depth => blocks[b].depth_rows.push(ri),
                Some(b) => {
                    blocks[b].path_rows.push(ri);
                    for &(v, _) in &c.terms {
                        if role[v] == Role::Path(b) {
                            blocks[b].rows_of_var.entry(v).or_default().push(ri);
                        }
                    }
                }
            }
        }
        SubstitutionChecker { model, role, blocks, fixed_rows }
    }

    /// Whether some completion of `selected` satisfies every row; if so, the
    /// objective at the best `y` (which is `x_i x_j`).
    pub fn check(&self, selected: &[bool]) -> Option<f64> {
        let m = self.model;
        let mut values = vec![0.0; m.variables.len()];
        for (i, &s) in selected.iter().enumerate() {
            values[m.x[i]] = if s { 1.0 } else { 0.0 };
        }
        for (&(i, j), &v) in &m.y {
            values[v] = if selected[i] && selected[j] { 1.0 } else { 0.0 };
        }
        for root in 0..m.n {
            for &rv in &m.r {
                values[rv] = 0.0;
            }
            values[m.r[root]] = 1.0;
            if !self.fixed_rows.iter().all(|&ri| m.row_satisfied(&m.constraints[ri], &values)) {
                continue;
            }
            let mut ok = true;
            for b in 0..self.blocks.len() {
                if !self.solve_block(b, &mut values) {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Some(m.objective_value(&values));
            }
        }
        None
    }

    fn solve_block(&self, b: usize, values: &mut [f64]) -> bool {
        let block = &self.blocks[b];
        let mut assigned = vec![false; self.model.variables.len()];
        for (v, role) in self.role.iter().enumerate() {
            if *role == Role::Fixed {
                assigned[v] = true;
            }
        }
        self.search(block, 0, values, &mut assigned)
    }

    fn feasible_range(&self, ri: usize, values: &[f64], assigned: &[bool]) -> bool {
        let c = &self.model.constraints[ri];
        let (mut lo, mut hi) = (0.0, 0.0);
        for &(v, a) in &c.terms {
            if assigned[v] {
                lo += a * values[v];
                hi += a * values[v];
            } else {
                lo += a.min(0.0);
                hi += a.max(0.0);
            }
        }
        match c.sense {
            Sense::Le => lo <= c.rhs + 1e-9,
            Sense::Ge => hi >= c.rhs - 1e-9,
            Sense::Eq => lo <= c.rhs + 1e-9 && hi >= c.rhs - 1e-9,
        }
    }

    fn search(&self, block: &Block, pos: usize, values: &mut [f64], assigned: &mut [bool]) -> bool {
        if pos == 0 && !block.path_rows.iter().all(|&ri| self.feasible_range(ri, values, assigned)) {
            return false;
        }
        if pos == block.path_vars.len() {
            return self.depths_feasible(block, values);
        }
        let v = block.path_vars[pos];
        assigned[v] = true;
        for val in [0.0, 1.0] {
            values[v] = val;
            let rows = block.rows_of_var.get(&v).map(Vec::as_slice).unwrap_or(&[]);
            if rows.iter().all(|&ri| self.feasible_range(ri, values, assigned))
                && self.search(block, pos + 1, values, assigned)
            {
                return true;
            }
        }
        assigned[v] = false;
        values[v] = 0.0;
        false
    }

    // Depth rows read `d_a - d_b + (fixed terms) <= rhs`. Each becomes the edge
    // b -> a with weight rhs - fixed; bounds 0 <= d <= hi come from a source node.
    fn depths_feasible(&self, block: &Block, values: &mut [f64]) -> bool {
        let m = self.model;
        let idx: HashMap<usize, usize> = block.depth_vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let source = block.depth_vars.len();
        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        for &v in &block.depth_vars {
            if let VarKind::Integer { lo, hi } = m.variables[v].kind {
                edges.push((source, idx[&v], hi as f64));
                edges.push((idx[&v], source, -(lo as f64)));
            }
        }
        for &ri in &block.depth_rows {
            let c = &m.constraints[ri];
            let mut plus = None;
            let mut minus = None;
            let mut fixed = 0.0;
            for &(v, a) in &c.terms {
                match idx.get(&v) {
                    Some(&di) if a == 1.0 => plus = Some(di),
                    Some(&di) if a == -1.0 => minus = Some(di),
                    Some(_) => return false,
                    None => fixed += a * values[v],
                }
            }
            let (Some(a), Some(bn)) = (plus, minus) else {
                return false;
            };
            let bound = c.rhs - fixed;
            match c.sense {
                Sense::Le => edges.push((bn, a, bound)),
                Sense::Ge => edges.push((a, bn, -bound)),
                Sense::Eq => {
                    edges.push((bn, a, bound));
                    edges.push((a, bn, -bound));
                }
            }
        }
        let count = source + 1;
        let mut dist = vec![0.0f64; count];
        for _ in 0..count {
            let mut changed = false;
            for &(u, v, w) in &edges {
                if dist[u] + w < dist[v] - 1e-12 {
                    dist[v] = dist[u] + w;
                    changed = true;
                }
            }
            if !changed {
                // Shift so the source sits at 0; depths are then integral and in range.
                let base = dist[source];
                for (&v, &i) in &idx {
                    values[v] = dist[i] - base;
                }
                return true;
            }
        }
        false
    }
}
