//! Simple undirected graphs and the bundled `G14` instance.
//!
//! Graphs are stored as a vertex count plus a list of unordered edges. The
//! on-disk format is JSON: `{"name": "...", "n": 14, "edges": [[u, v], ...]}`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Bundled adjacency data for the 14-vertex, 37-edge game graph.
pub const G14_JSON: &str = include_str!("../data/g14.json");

/// An undirected simple graph with labeled vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub name: String,
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a graph after normalizing and validating the edge list.
    ///
    /// Edges are stored with `u < v` and sorted; self-loops, duplicates and
    /// out-of-range endpoints are rejected.
    pub fn new(name: impl Into<String>, n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("graph must have at least one vertex"));
        }
        let mut norm: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b {
                return Err(Error::domain(format!("self-loop at vertex {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::domain(format!(
                    "edge ({a},{b}) has endpoint outside 0..{n}"
                )));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        let before = norm.len();
        norm.dedup();
        if norm.len() != before {
            return Err(Error::domain("duplicate edge in edge list"));
        }
        Ok(Graph {
            name: name.into(),
            n,
            edges: norm,
        })
    }

    /// The bundled `G14` graph: 14 vertices, 37 edges.
    ///
    /// Checked on load: vertex and edge counts. The deeper invariants
    /// (classical value 86/88, existence of an orthogonal representation in
    /// R^4) are exercised by the acceptance suite, which re-derives both.
    pub fn g14() -> Self {
        let g = Self::from_json(G14_JSON).expect("bundled g14.json is valid");
        assert_eq!(g.n, 14, "bundled G14 must have 14 vertices");
        assert_eq!(g.edges.len(), 37, "bundled G14 must have 37 edges");
        g
    }

    /// Complete graph on `n` vertices.
    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((i, j));
            }
        }
        Graph::new(format!("K{n}"), n, &edges).expect("complete graph is valid")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            name: String,
            n: usize,
            edges: Vec<(usize, usize)>,
        }
        let raw: Raw = serde_json::from_str(s)?;
        Graph::new(raw.name, raw.n, &raw.edges)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let e = (u.min(v), u.max(v));
        self.edges.binary_search(&e).is_ok()
    }

    /// Adjacency lists, one per vertex.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut nbrs = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            nbrs[u].push(v);
            nbrs[v].push(u);
        }
        nbrs
    }

    /// Relabels vertices by `perm` (vertex `v` becomes `perm[v]`).
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::domain("permutation length must equal vertex count"));
        }
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        Graph::new(self.name.clone(), self.n, &edges)
    }

    /// SHA-256 of the canonical JSON form, used to stamp reports.
    pub fn content_hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("graph serializes");
        let mut h = Sha256::new();
        h.update(canon.as_bytes());
        hex_string(&h.finalize())
    }

    /// Exact `c`-colorability by backtracking with forward checking.
    ///
    /// Brute-force oracle; fine for the desk-scale graphs this toolkit
    /// targets, not meant for large instances.
    pub fn is_colorable(&self, c: usize) -> bool {
        if c == 0 {
            return self.n == 0;
        }
        if c >= self.n {
            return true;
        }
        let nbrs = self.neighbors();
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by_key(|&v| std::cmp::Reverse(nbrs[v].len()));
        let mut colors = vec![usize::MAX; self.n];
        self.color_bt(&nbrs, &order, &mut colors, 0, 0, c)
    }

    fn color_bt(
        &self,
        nbrs: &[Vec<usize>],
        order: &[usize],
        colors: &mut [usize],
        k: usize,
        max_used: usize,
        c: usize,
    ) -> bool {
        if k == self.n {
            return true;
        }
        let v = order[k];
        // colors above max_used+1 are symmetric; skip them
        let limit = c.min(max_used + 2);
        'outer: for col in 0..limit {
            for &u in &nbrs[v] {
                if colors[u] == col {
                    continue 'outer;
                }
            }
            colors[v] = col;
            if self.color_bt(nbrs, order, colors, k + 1, max_used.max(col + 1), c) {
                return true;
            }
            colors[v] = usize::MAX;
        }
        false
    }

    /// Chromatic number by incrementing the colorability oracle.
    pub fn chromatic_number(&self) -> usize {
        (1..=self.n)
            .find(|&c| self.is_colorable(c))
            .expect("every graph is n-colorable")
    }
}

fn hex_string(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}
