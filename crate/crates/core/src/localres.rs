//! Local bounds on the effective resistance of a link.
//!
//! Cutting at distance d removes every node more than d hops from the
//! link's endpoints (raising resistance), shorting merges them into one
//! supernode s (lowering it). By Rayleigh monotonicity the two effective
//! resistances sandwich the true value, tightening as d grows, and both
//! depend only on the network within distance d+1 of the link — which is
//! what makes the all-links scan embarrassingly parallel.

use crate::error::Result;
use crate::resistor::{effective_resistance, ResistorNet};
use rayon::prelude::*;

/// A cut or shorted neighborhood of one resistor link.
#[derive(Debug, Clone)]
pub struct LocalNet {
    pub net: ResistorNet,
    /// Original node index → local index (kept nodes only).
    pub node_map: Vec<Option<usize>>,
    /// Local indices of the link endpoints (i, j).
    pub endpoints: (usize, usize),
    /// Local index of the shorting supernode, when one exists.
    pub supernode: Option<usize>,
}

impl LocalNet {
    /// Index of the original link {i, j} inside the local network.
    pub fn link(&self) -> usize {
        self.net
            .link_between(self.endpoints.0, self.endpoints.1)
            .expect("the bounded link survives both constructions")
    }
}

/// Two-sided bounds for one resistor link at distance d.
#[derive(Debug, Clone, Copy)]
pub struct ResistanceBounds {
    pub link: usize,
    pub d: usize,
    /// r^{L_d}, from the shorted network.
    pub lower: f64,
    /// r^{U_d}, from the cut network.
    pub upper: f64,
}

impl ResistanceBounds {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }

    /// Plug-in midpoint (r^U + r^L)/2.
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.upper + self.lower)
    }
}

/// Keeps the nodes within hop distance d of the link and every surviving
/// edge among them. d = 0 keeps the endpoints alone, realizing the upper
/// bound 1/W_ij.
pub fn cut_at_distance(rn: &ResistorNet, link: usize, d: usize) -> LocalNet {
    let dist = rn.link_distances(link);
    build_local(rn, link, &dist, d, false)
}

/// Merges every node at hop distance greater than d into one supernode.
/// Conductances into the supernode aggregate; edges internal to the merged
/// set connect s to itself and are dropped. When no node lies beyond d the
/// result coincides with the cut network. d = 0 merges everything except
/// the endpoints, realizing the 1/w*-style lower bound.
pub fn short_at_distance(rn: &ResistorNet, link: usize, d: usize) -> LocalNet {
    let dist = rn.link_distances(link);
    build_local(rn, link, &dist, d, true)
}

fn build_local(
    rn: &ResistorNet,
    link: usize,
    dist: &[Option<usize>],
    d: usize,
    short: bool,
) -> LocalNet {
    let (i, j) = rn.links()[link];
    let mut node_map = vec![None; rn.node_count()];
    let mut next = 0usize;
    for (v, &dv) in dist.iter().enumerate() {
        if matches!(dv, Some(x) if x <= d) {
            node_map[v] = Some(next);
            next += 1;
        }
    }
    let kept = next;

    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut into_super = vec![0.0; kept];
    let mut has_outer = false;
    for (l, &(a, b)) in rn.links().iter().enumerate() {
        match (node_map[a], node_map[b]) {
            (Some(la), Some(lb)) => edges.push((la, lb, rn.weight(l))),
            (Some(la), None) => {
                if dist[b].is_some() {
                    into_super[la] += rn.weight(l);
                    has_outer = true;
                }
            }
            (None, Some(lb)) => {
                if dist[a].is_some() {
                    into_super[lb] += rn.weight(l);
                    has_outer = true;
                }
            }
            (None, None) => {}
        }
    }
    let mut node_count = kept;
    let mut supernode = None;
    if short && has_outer {
        let s = kept;
        node_count += 1;
        supernode = Some(s);
        for (v, &w) in into_super.iter().enumerate() {
            if w > 0.0 {
                edges.push((v, s, w));
            }
        }
    }
    let net = ResistorNet::from_weighted_edges(node_count, &edges)
        .expect("local construction preserves resistor invariants");
    LocalNet {
        net,
        endpoints: (node_map[i].unwrap(), node_map[j].unwrap()),
        node_map,
        supernode,
    }
}

/// Upper bound from the cut network, lower bound from the shorted network,
/// both at the same distance d.
pub fn resistance_bounds(rn: &ResistorNet, link: usize, d: usize) -> Result<ResistanceBounds> {
    let cut = cut_at_distance(rn, link, d);
    let upper = effective_resistance(&cut.net, cut.link())?;
    let shorted = short_at_distance(rn, link, d);
    let lower = effective_resistance(&shorted.net, shorted.link())?;
    Ok(ResistanceBounds {
        link,
        d,
        lower,
        upper,
    })
}

/// Bounds for every resistor link at distance d. Per-link tasks are
/// independent, so they run in parallel; the output is indexed by link and
/// identical regardless of schedule.
pub fn scan_all_links(rn: &ResistorNet, d: usize) -> Result<Vec<ResistanceBounds>> {
    (0..rn.link_count())
        .into_par_iter()
        .map(|l| resistance_bounds(rn, l, d))
        .collect()
}

/// Mean relative bound gap (1/L) Σ_l (r^U_l − r^L_l)/r_l.
pub fn average_relative_gap(bounds: &[ResistanceBounds], exact: &[f64]) -> f64 {
    if bounds.is_empty() {
        return 0.0;
    }
    let total: f64 = bounds
        .iter()
        .map(|b| (b.upper - b.lower) / exact[b.link])
        .sum();
    total / bounds.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::resistor::effective_resistances_all;

    #[test]
    fn grid_cut_short_at_one_matches_hand_values() {
        // central link of a large grid: cut at 1 leaves 8 nodes and
        // resistance 3/5; shorted at 1 gives 40/87.
        let rn = generators::square_grid(21);
        let center = 10 * 21 + 10;
        let link = rn.link_between(center, center + 1).unwrap();

        let cut = cut_at_distance(&rn, link, 1);
        assert_eq!(cut.net.node_count(), 8);
        assert!(cut.supernode.is_none());
        let ru = effective_resistance(&cut.net, cut.link()).unwrap();
        assert!((ru - 0.6).abs() < 1e-12);

        let shorted = short_at_distance(&rn, link, 1);
        assert_eq!(shorted.net.node_count(), 9);
        assert!(shorted.supernode.is_some());
        let rl = effective_resistance(&shorted.net, shorted.link()).unwrap();
        assert!((rl - 40.0 / 87.0).abs() < 1e-12);
    }

    #[test]
    fn beyond_diameter_cut_equals_short() {
        let rn = generators::ring(6);
        let link = rn.link_between(0, 1).unwrap();
        let b = resistance_bounds(&rn, link, 10).unwrap();
        assert!((b.upper - b.lower).abs() < 1e-15);
        let exact = effective_resistance(&rn, link).unwrap();
        assert!((b.upper - exact).abs() < 1e-15);
    }

    #[test]
    fn ring_cut_and_short_shapes() {
        // Ring of 12, link {0,1}, d=2: cut keeps a 6-node path pair,
        // short adds the supernode adjacent to the two far nodes.
        let rn = generators::ring(12);
        let link = rn.link_between(0, 1).unwrap();
        let cut = cut_at_distance(&rn, link, 2);
        assert_eq!(cut.net.node_count(), 6);
        assert_eq!(cut.net.link_count(), 5);
        let shorted = short_at_distance(&rn, link, 2);
        assert_eq!(shorted.net.node_count(), 7);
        assert_eq!(shorted.net.link_count(), 7);
        let s = shorted.supernode.unwrap();
        assert_eq!(
            shorted
                .net
                .neighbors(s)
                .iter()
                .map(|&(n, _)| n)
                .count(),
            2
        );
    }

    #[test]
    fn example1_bounds_are_exact_bridges() {
        let net = crate::net::DirectedNetwork::new(3, vec![(0, 1), (0, 1), (1, 2)], 0, 2).unwrap();
        let game = crate::wardrop::AffineGame::new(net, vec![3.0, 2.0, 1.0], vec![0.0; 3], 3.0)
            .unwrap();
        let rn = crate::resistor::ResistorNet::from_affine(&game, &[]).unwrap();
        let exact = effective_resistances_all(&rn).unwrap();
        for (l, b) in scan_all_links(&rn, 1).unwrap().into_iter().enumerate() {
            assert!((b.lower - exact[l]).abs() < 1e-12);
            assert!((b.upper - exact[l]).abs() < 1e-12);
        }
    }

    #[test]
    fn ring_scan_is_symmetric() {
        let rn = generators::ring(12);
        let bounds = scan_all_links(&rn, 2).unwrap();
        let first = bounds[0];
        for b in &bounds {
            assert!((b.lower - first.lower).abs() < 1e-12);
            assert!((b.upper - first.upper).abs() < 1e-12);
        }
        assert!(first.gap() > 1e-6);
    }

    #[test]
    fn average_gap_zero_when_exact() {
        let rn = generators::ring(6);
        let bounds = scan_all_links(&rn, 5).unwrap();
        let exact = effective_resistances_all(&rn).unwrap();
        assert!(average_relative_gap(&bounds, &exact).abs() < 1e-12);
    }
}
