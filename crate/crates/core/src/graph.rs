//! Simple undirected graphs and their text format.
//!
//! The text format has one `u v` edge per line; a line with a single
//! identifier declares an isolated node; `#` starts a comment. Nodes are
//! also declared implicitly by the edges mentioning them, in order of first
//! appearance.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{name, Name};

/// Undirected graph without self-loops or parallel edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    names: Vec<Name>,
    /// sorted, deduplicated, each pair with u < v
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(names: Vec<Name>, edges: Vec<(usize, usize)>) -> Result<Graph> {
        let mut es: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u >= names.len() || v >= names.len() {
                return Err(Error::Malformed("edge endpoint out of range".into()));
            }
            if u == v {
                return Err(Error::Malformed(format!(
                    "self-loop on node {}",
                    names[u]
                )));
            }
            es.push((u.min(v), u.max(v)));
        }
        es.sort_unstable();
        es.dedup();
        Ok(Graph { names, edges: es })
    }

    /// Nodes named `n0..n{count-1}`.
    pub fn with_nodes(count: usize, edges: Vec<(usize, usize)>) -> Result<Graph> {
        let names = (0..count).map(|i| name(&format!("n{i}"))).collect();
        Graph::new(names, edges)
    }

    pub fn complete(count: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..count {
            for v in u + 1..count {
                edges.push((u, v));
            }
        }
        Graph::with_nodes(count, edges).expect("complete graph is well-formed")
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_name(&self, u: usize) -> &Name {
        &self.names[u]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Indices of edges incident to `u`, in edge order.
    pub fn incident_edges(&self, u: usize) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, (a, b))| *a == u || *b == u)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn degree(&self, u: usize) -> usize {
        self.edges
            .iter()
            .filter(|(a, b)| *a == u || *b == u)
            .count()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let e = (u.min(v), u.max(v));
        self.edges.binary_search(&e).is_ok()
    }

    pub fn isolated_nodes(&self) -> Vec<usize> {
        (0..self.node_count())
            .filter(|&u| self.degree(u) == 0)
            .collect()
    }

    /// Two-colors the graph if possible: returns per-node sides, isolated
    /// nodes on the left. `None` when an odd cycle exists.
    pub fn bipartition(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        let n = self.node_count();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut color = vec![usize::MAX; n];
        for start in 0..n {
            if color[start] != usize::MAX {
                continue;
            }
            color[start] = 0;
            let mut queue = std::collections::VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if color[v] == usize::MAX {
                        color[v] = 1 - color[u];
                        queue.push_back(v);
                    } else if color[v] == color[u] {
                        return None;
                    }
                }
            }
        }
        let left = (0..n).filter(|&u| color[u] == 0).collect();
        let right = (0..n).filter(|&u| color[u] == 1).collect();
        Some((left, right))
    }

    /// Splits into a bipartite view along [`Graph::bipartition`].
    pub fn to_bipartite(&self) -> Option<BipartiteGraph> {
        let (left, right) = self.bipartition()?;
        let mut left_of: BTreeMap<usize, usize> = BTreeMap::new();
        let mut right_of: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, &u) in left.iter().enumerate() {
            left_of.insert(u, i);
        }
        for (i, &v) in right.iter().enumerate() {
            right_of.insert(v, i);
        }
        let mut edges = Vec::new();
        for &(u, v) in &self.edges {
            let (lu, rv) = if let (Some(&l), Some(&r)) = (left_of.get(&u), right_of.get(&v)) {
                (l, r)
            } else {
                (left_of[&v], right_of[&u])
            };
            edges.push((lu, rv));
        }
        Some(BipartiteGraph::new(
            left.iter().map(|&u| self.names[u].clone()).collect(),
            right.iter().map(|&v| self.names[v].clone()).collect(),
            edges,
        ))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for u in self.isolated_nodes() {
            let _ = writeln!(out, "{}", self.names[u]);
        }
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{} {}", self.names[u], self.names[v]);
        }
        out
    }
}

/// Parses the edge-list format. Node order is first appearance. Node names
/// share the identifier syntax of database files, and may not start with
/// `_` (the null marker) or `@` (reserved for fresh constants), so the
/// reductions can embed them in databases without collisions.
pub fn parse_graph(text: &str) -> Result<Graph> {
    fn check_node(tok: &str, line: usize) -> Result<()> {
        let ok = !tok.starts_with('_')
            && !tok.starts_with('@')
            && tok
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '\'' | '+' | '-'));
        if ok {
            Ok(())
        } else {
            Err(Error::parse(
                line,
                1,
                format!("invalid node name {tok:?}"),
            ))
        }
    }
    let mut names: Vec<Name> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut intern = |tok: &str, names: &mut Vec<Name>| -> usize {
        if let Some(&i) = index.get(tok) {
            return i;
        }
        let i = names.len();
        names.push(name(tok));
        index.insert(tok.to_string(), i);
        i
    };
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        for t in &tokens {
            check_node(t, lineno + 1)?;
        }
        match tokens.len() {
            0 => {}
            1 => {
                intern(tokens[0], &mut names);
            }
            2 => {
                let u = intern(tokens[0], &mut names);
                let v = intern(tokens[1], &mut names);
                if u == v {
                    return Err(Error::parse(
                        lineno + 1,
                        1,
                        format!("self-loop on node {}", tokens[0]),
                    ));
                }
                edges.push((u, v));
            }
            _ => {
                return Err(Error::parse(
                    lineno + 1,
                    1,
                    "expected `u v` (an edge) or `u` (an isolated node)",
                ))
            }
        }
    }
    Graph::new(names, edges)
}

/// A graph with a fixed bipartition; edges go left-to-right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    left: Vec<Name>,
    right: Vec<Name>,
    /// (left index, right index), sorted and deduplicated
    edges: Vec<(usize, usize)>,
}

impl BipartiteGraph {
    pub fn new(left: Vec<Name>, right: Vec<Name>, mut edges: Vec<(usize, usize)>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        BipartiteGraph { left, right, edges }
    }

    /// Sides named `u0..` and `v0..`.
    pub fn with_sides(nl: usize, nr: usize, edges: Vec<(usize, usize)>) -> Self {
        BipartiteGraph::new(
            (0..nl).map(|i| name(&format!("u{i}"))).collect(),
            (0..nr).map(|i| name(&format!("v{i}"))).collect(),
            edges,
        )
    }

    pub fn left(&self) -> &[Name] {
        &self.left
    }

    pub fn right(&self) -> &[Name] {
        &self.right
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, l: usize, r: usize) -> bool {
        self.edges.binary_search(&(l, r)).is_ok()
    }

    /// The same graph without sides; left nodes come first.
    pub fn to_graph(&self) -> Graph {
        let mut names = self.left.clone();
        names.extend(self.right.iter().cloned());
        let edges = self
            .edges
            .iter()
            .map(|&(l, r)| (l, self.left.len() + r))
            .collect();
        Graph::new(names, edges).expect("bipartite edges are well-formed")
    }
}
