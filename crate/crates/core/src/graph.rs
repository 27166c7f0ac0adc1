//! Motion graphs restricted to finite vertex sets.
//!
//! The motion graph has an edge `x -> x + u` for every control `u`. Inside a
//! finite vertex set only the edges whose head stays in the set are kept,
//! which gives the induced subgraph every later stage works on. Self-loops
//! appear when the zero control is available and count toward out-degree.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{ControlSet, IntVector, Labeling};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("no subgraph with minimum out-degree {threshold} contains the initial state")]
    Infeasible { threshold: usize },
}

/// An induced subgraph `G_Ŝ` of the motion graph.
#[derive(Clone, Debug)]
pub struct InducedSubgraph {
    vertices: Vec<IntVector>,
    index: HashMap<IntVector, usize>,
    // (control index, successor vertex index), ascending by control index
    out_adj: Vec<Vec<(usize, usize)>>,
    min_out_degree: usize,
    num_controls: usize,
}

impl InducedSubgraph {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[IntVector] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &IntVector {
        &self.vertices[v]
    }

    pub fn contains(&self, x: &IntVector) -> bool {
        self.index.contains_key(x)
    }

    pub fn index_of(&self, x: &IntVector) -> Option<usize> {
        self.index.get(x).copied()
    }

    /// Outgoing `(control index, successor)` pairs of vertex `v`.
    pub fn out_edges(&self, v: usize) -> &[(usize, usize)] {
        &self.out_adj[v]
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out_adj[v].len()
    }

    /// Zero for the empty graph.
    pub fn min_out_degree(&self) -> usize {
        self.min_out_degree
    }

    pub fn num_edges(&self) -> usize {
        self.out_adj.iter().map(Vec::len).sum()
    }

    pub fn num_controls(&self) -> usize {
        self.num_controls
    }

    /// Successor of `v` under control `u`, if it stays inside the subgraph.
    pub fn successor(&self, v: usize, control: usize) -> Option<usize> {
        let adj = &self.out_adj[v];
        adj.binary_search_by_key(&control, |&(u, _)| u)
            .ok()
            .map(|i| adj[i].1)
    }

    /// Graphviz rendering. With a labeling, edges carry their one-based label.
    pub fn to_dot(&self, labeling: Option<&Labeling>) -> String {
        let mut out = String::from("digraph G {\n");
        for (v, x) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "  v{v} [label=\"({x})\"];");
        }
        for (v, adj) in self.out_adj.iter().enumerate() {
            for &(u, w) in adj {
                match labeling {
                    Some(lab) => {
                        let _ = writeln!(out, "  v{v} -> v{w} [label=\"{}\"];", lab.label(u) + 1);
                    }
                    None => {
                        let _ = writeln!(out, "  v{v} -> v{w};");
                    }
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Builds the subgraph induced by `points` with complete adjacency.
///
/// Duplicate points are kept once, at their first position.
pub fn build_induced(points: &[IntVector], controls: &ControlSet) -> InducedSubgraph {
    let mut vertices = Vec::with_capacity(points.len());
    let mut index = HashMap::with_capacity(points.len());
    for p in points {
        if !index.contains_key(p) {
            index.insert(p.clone(), vertices.len());
            vertices.push(p.clone());
        }
    }

    let mut out_adj = Vec::with_capacity(vertices.len());
    let mut scratch = IntVector::zeros(controls.dim());
    for x in &vertices {
        let mut adj = Vec::new();
        for (ui, u) in controls.iter().enumerate() {
            scratch = add_into(scratch, x, u);
            if let Some(&w) = index.get(&scratch) {
                adj.push((ui, w));
            }
        }
        out_adj.push(adj);
    }
    let min_out_degree = out_adj.iter().map(Vec::len).min().unwrap_or(0);
    InducedSubgraph {
        vertices,
        index,
        out_adj,
        min_out_degree,
        num_controls: controls.len(),
    }
}

// Reuses the allocation of `buf` for `x + u`.
fn add_into(buf: IntVector, x: &IntVector, u: &IntVector) -> IntVector {
    let mut coords = buf.into_coords();
    coords.clear();
    coords.extend(x.coords().iter().zip(u.coords()).map(|(a, b)| a + b));
    IntVector::new(coords)
}

/// Surviving-vertex mask after repeatedly deleting vertices of out-degree
/// below `threshold`.
pub fn peel_mask(g: &InducedSubgraph, threshold: usize) -> Vec<bool> {
    let n = g.len();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        for &(_, w) in g.out_edges(v) {
            preds[w].push(v);
        }
    }
    let mut degree: Vec<usize> = (0..n).map(|v| g.out_degree(v)).collect();
    let mut alive = vec![true; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| degree[v] < threshold).collect();
    for &v in &queue {
        alive[v] = false;
    }
    while let Some(v) = queue.pop_front() {
        for &p in &preds[v] {
            if !alive[p] {
                continue;
            }
            degree[p] -= 1;
            if degree[p] < threshold {
                alive[p] = false;
                queue.push_back(p);
            }
        }
    }
    alive
}

/// Largest induced subgraph of `points` in which every out-degree is at
/// least `threshold`, provided it still contains `x0`.
pub fn peel_to_min_degree(
    points: &[IntVector],
    controls: &ControlSet,
    threshold: usize,
    x0: &IntVector,
) -> Result<InducedSubgraph, GraphError> {
    let full = build_induced(points, controls);
    let alive = peel_mask(&full, threshold);
    let survives = full.index_of(x0).is_some_and(|v| alive[v]);
    if !survives {
        return Err(GraphError::Infeasible { threshold });
    }
    let kept: Vec<IntVector> = full
        .vertices
        .into_iter()
        .zip(alive)
        .filter_map(|(x, a)| a.then_some(x))
        .collect();
    Ok(build_induced(&kept, controls))
}
