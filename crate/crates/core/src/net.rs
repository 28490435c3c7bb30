//! Directed multigraphs with one origin/destination pair.
//!
//! Links are an ordered list of (tail, head) pairs; parallel links are
//! distinct entries. All types are immutable after construction.

use crate::error::{Error, Result};
use std::collections::VecDeque;

/// A directed multigraph with distinguished origin and destination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedNetwork {
    node_count: usize,
    links: Vec<(usize, usize)>,
    origin: usize,
    destination: usize,
}

impl DirectedNetwork {
    /// Builds a network, rejecting invariant violations.
    pub fn new(
        node_count: usize,
        links: Vec<(usize, usize)>,
        origin: usize,
        destination: usize,
    ) -> Result<Self> {
        let net = Self::new_unchecked(node_count, links, origin, destination);
        let violations = net.validate();
        if violations.is_empty() {
            Ok(net)
        } else {
            Err(Error::invalid(&violations))
        }
    }

    /// Builds without validation. Intended for diagnostics and tests;
    /// solvers assume [`DirectedNetwork::validate`] returns an empty list.
    pub fn new_unchecked(
        node_count: usize,
        links: Vec<(usize, usize)>,
        origin: usize,
        destination: usize,
    ) -> Self {
        Self {
            node_count,
            links,
            origin,
            destination,
        }
    }

    /// Lists every invariant violation; empty iff the network is valid.
    pub fn validate(&self) -> Vec<String> {
        let mut violations = Vec::new();
        if self.node_count == 0 {
            violations.push("node count must be positive".to_string());
        }
        if self.origin == self.destination {
            violations.push("origin equals destination".to_string());
        }
        for (who, n) in [("origin", self.origin), ("destination", self.destination)] {
            if n >= self.node_count {
                violations.push(format!("{who} index {n} out of range"));
            }
        }
        for (e, &(tail, head)) in self.links.iter().enumerate() {
            if tail >= self.node_count || head >= self.node_count {
                violations.push(format!("link {e} endpoint out of range"));
            } else if tail == head {
                violations.push(format!("self-loop at link {e}"));
            }
        }
        violations
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self) -> &[(usize, usize)] {
        &self.links
    }

    pub fn tail(&self, e: usize) -> usize {
        self.links[e].0
    }

    pub fn head(&self, e: usize) -> usize {
        self.links[e].1
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn destination(&self) -> usize {
        self.destination
    }

    /// Keeps exactly the links lying on some directed origin→destination
    /// path. The node set is preserved. Idempotent.
    pub fn prune(&self) -> Result<Self> {
        let forward = self.reachable(self.origin, false);
        let backward = self.reachable(self.destination, true);
        if !forward[self.destination] {
            return Err(Error::NoPath);
        }
        let links = self
            .links
            .iter()
            .copied()
            .filter(|&(t, h)| forward[t] && backward[h])
            .collect();
        Ok(Self {
            node_count: self.node_count,
            links,
            origin: self.origin,
            destination: self.destination,
        })
    }

    /// Directed reachability from `start` (or to it when `reverse`).
    fn reachable(&self, start: usize, reverse: bool) -> Vec<bool> {
        let mut seen = vec![false; self.node_count];
        seen[start] = true;
        let mut adj = vec![Vec::new(); self.node_count];
        for &(t, h) in &self.links {
            if reverse {
                adj[h].push(t);
            } else {
                adj[t].push(h);
            }
        }
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// Node-link incidence matrix: +1 at the tail row, −1 at the head row.
    pub fn incidence(&self) -> IncidenceMatrix {
        let mut entries = vec![0i8; self.node_count * self.links.len()];
        for (e, &(t, h)) in self.links.iter().enumerate() {
            entries[t * self.links.len() + e] = 1;
            entries[h * self.links.len() + e] = -1;
        }
        IncidenceMatrix {
            rows: self.node_count,
            cols: self.links.len(),
            entries,
        }
    }

    /// Two-terminal series-parallel recognition by exhaustive reduction:
    /// merge parallel links with equal tail and head, contract interior
    /// nodes with in-degree one and out-degree one. The answer does not
    /// depend on the reduction order (the reduction system is confluent).
    pub fn is_series_parallel(&self) -> bool {
        self.reduces_to_single_link(|candidates| candidates.first().copied())
    }

    /// Same reduction with a caller-chosen tie-break among applicable
    /// series contractions; exposed so tests can randomize the order.
    pub fn reduces_to_single_link(
        &self,
        pick: impl Fn(&[usize]) -> Option<usize>,
    ) -> bool {
        let mut links: Vec<(usize, usize)> = self.links.clone();
        loop {
            // Merge one parallel pair per sweep.
            let mut merged = false;
            'outer: for x in 0..links.len() {
                for y in (x + 1)..links.len() {
                    if links[x] == links[y] {
                        links.swap_remove(y);
                        merged = true;
                        break 'outer;
                    }
                }
            }
            if merged {
                continue;
            }
            let mut indeg = vec![0usize; self.node_count];
            let mut outdeg = vec![0usize; self.node_count];
            for &(t, h) in &links {
                outdeg[t] += 1;
                indeg[h] += 1;
            }
            // A series node whose contraction would create a self-loop is
            // never contractible; such 2-cycles cannot occur in a
            // series-parallel construction.
            let candidates: Vec<usize> = (0..self.node_count)
                .filter(|&v| {
                    v != self.origin
                        && v != self.destination
                        && indeg[v] == 1
                        && outdeg[v] == 1
                })
                .filter(|&v| {
                    let t = links.iter().find(|&&(_, h)| h == v).unwrap().0;
                    let h = links.iter().find(|&&(t2, _)| t2 == v).unwrap().1;
                    t != h
                })
                .collect();
            match pick(&candidates) {
                Some(v) => {
                    let in_pos = links.iter().position(|&(_, h)| h == v).unwrap();
                    let (t, _) = links[in_pos];
                    links.remove(in_pos);
                    let out_pos = links.iter().position(|&(t2, _)| t2 == v).unwrap();
                    let (_, h) = links[out_pos];
                    links.remove(out_pos);
                    links.push((t, h));
                }
                None => break,
            }
        }
        links.len() == 1 && links[0] == (self.origin, self.destination)
    }

    /// Undirected adjacency with parallel links collapsed.
    pub fn undirected_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for &(t, h) in &self.links {
            if !adj[t].contains(&h) {
                adj[t].push(h);
                adj[h].push(t);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Hop distance of every node from the unordered pair `{i, j}` in the
    /// undirected view: `min(BFS(n, i), BFS(n, j))`. `None` marks nodes in
    /// other components. Requires `i` and `j` to be adjacent.
    pub fn hop_distance_from_link(&self, i: usize, j: usize) -> Result<Vec<Option<usize>>> {
        let adj = self.undirected_adjacency();
        if i >= self.node_count || j >= self.node_count || !adj[i].contains(&j) {
            return Err(Error::Invalid(format!("{{{i},{j}}} is not a link")));
        }
        Ok(bfs_multi(&adj, &[i, j]))
    }
}

/// Multi-source BFS over an adjacency list.
pub(crate) fn bfs_multi(adj: &[Vec<usize>], sources: &[usize]) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist[s].is_none() {
            dist[s] = Some(0);
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Dense node-link incidence matrix with entries in {−1, 0, +1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<i8>,
}

impl IncidenceMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, node: usize, link: usize) -> i8 {
        self.entries[node * self.cols + link]
    }

    /// Column of a single link.
    pub fn column(&self, link: usize) -> Vec<i8> {
        (0..self.rows).map(|n| self.entry(n, link)).collect()
    }
}
