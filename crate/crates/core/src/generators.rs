//! Construction of the benchmark networks and seeded random corpora.
//!
//! Grid, ring and double-tree constructors return unit-conductance
//! resistor networks (the form the bounds and walk diagnostics consume);
//! the game constructors return routing games over directed networks.
//! Everything random is seeded and reproducible.

use crate::net::DirectedNetwork;
use crate::resistor::ResistorNet;
use crate::wardrop::{AffineGame, Delay, GeneralGame};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// side × side grid with unit conductances.
pub fn square_grid(side: usize) -> ResistorNet {
    assert!(side >= 3, "grid side must be at least 3");
    let idx = |x: usize, y: usize| x * side + y;
    let mut edges = Vec::with_capacity(2 * side * (side - 1));
    for x in 0..side {
        for y in 0..side {
            if x + 1 < side {
                edges.push((idx(x, y), idx(x + 1, y), 1.0));
            }
            if y + 1 < side {
                edges.push((idx(x, y), idx(x, y + 1), 1.0));
            }
        }
    }
    ResistorNet::from_weighted_edges(side * side, &edges).expect("grid edges are valid")
}

/// side × side × side cubic grid with unit conductances.
pub fn cube_grid(side: usize) -> ResistorNet {
    assert!(side >= 3, "grid side must be at least 3");
    let idx = |x: usize, y: usize, z: usize| (x * side + y) * side + z;
    let mut edges = Vec::new();
    for x in 0..side {
        for y in 0..side {
            for z in 0..side {
                if x + 1 < side {
                    edges.push((idx(x, y, z), idx(x + 1, y, z), 1.0));
                }
                if y + 1 < side {
                    edges.push((idx(x, y, z), idx(x, y + 1, z), 1.0));
                }
                if z + 1 < side {
                    edges.push((idx(x, y, z), idx(x, y, z + 1), 1.0));
                }
            }
        }
    }
    ResistorNet::from_weighted_edges(side * side * side, &edges).expect("grid edges are valid")
}

/// Cycle on n nodes with unit conductances.
pub fn ring(n: usize) -> ResistorNet {
    assert!(n >= 4, "ring size must be at least 4");
    let edges: Vec<(usize, usize, f64)> = (0..n).map(|k| (k, (k + 1) % n, 1.0)).collect();
    ResistorNet::from_weighted_edges(n, &edges).expect("ring edges are valid")
}

/// Two complete binary trees of the given depth rooted at nodes 0 and 1,
/// joined by the link {0, 1}; unit conductances. Node count is
/// 2(2^(depth+1) − 1).
pub fn double_tree(depth: usize) -> ResistorNet {
    assert!(depth >= 2, "double tree depth must be at least 2");
    let mut edges = vec![(0usize, 1usize, 1.0)];
    let mut next = 2usize;
    for root in [0usize, 1] {
        let mut level = vec![root];
        for _ in 0..depth {
            let mut deeper = Vec::with_capacity(level.len() * 2);
            for &p in &level {
                for _ in 0..2 {
                    edges.push((p, next, 1.0));
                    deeper.push(next);
                    next += 1;
                }
            }
            level = deeper;
        }
    }
    ResistorNet::from_weighted_edges(next, &edges).expect("tree edges are valid")
}

/// Two parallel origin→destination links.
pub fn wheatstone(a: [f64; 2], b: [f64; 2], m: f64) -> AffineGame {
    let net = DirectedNetwork::new(2, vec![(0, 1), (0, 1)], 0, 1).expect("valid by construction");
    AffineGame::new(net, a.to_vec(), b.to_vec(), m).expect("valid by construction")
}

/// Two parallel links o→n followed by one link n→d, linear delays.
pub fn example1(a: [f64; 3], m: f64) -> AffineGame {
    let net = DirectedNetwork::new(3, vec![(0, 1), (0, 1), (1, 2)], 0, 2)
        .expect("valid by construction");
    AffineGame::new(net, a.to_vec(), vec![0.0; 3], m).expect("valid by construction")
}

/// The 17-node, 28-link highway topology with origin node 0 and
/// destination node 16 (nodes are numbered here from 0, links from 0).
pub fn la_highway() -> DirectedNetwork {
    // (tail, head) per link, in link order l1..l28
    let raw: [(usize, usize); 28] = [
        (1, 2),   // l1
        (2, 3),   // l2
        (3, 4),   // l3
        (4, 5),   // l4
        (1, 6),   // l5
        (6, 7),   // l6
        (7, 8),   // l7
        (8, 9),   // l8
        (9, 13),  // l9
        (2, 7),   // l10
        (3, 8),   // l11
        (3, 9),   // l12
        (4, 9),   // l13
        (5, 14),  // l14
        (6, 10),  // l15
        (10, 11), // l16
        (10, 15), // l17
        (7, 10),  // l18
        (8, 11),  // l19
        (9, 12),  // l20
        (11, 12), // l21
        (12, 13), // l22
        (13, 14), // l23
        (11, 15), // l24
        (13, 17), // l25
        (14, 17), // l26
        (15, 16), // l27
        (16, 17), // l28
    ];
    let links = raw.iter().map(|&(t, h)| (t - 1, h - 1)).collect();
    DirectedNetwork::new(17, links, 0, 16).expect("valid by construction")
}

/// The highway topology with quartic delays τ_e(f) = a_e f⁴ + b_e.
pub fn la_highway_quartic(a: &[f64], b: &[f64], m: f64) -> GeneralGame {
    let net = la_highway();
    let delays = a
        .iter()
        .zip(b)
        .map(|(&a, &b)| Delay::Polynomial {
            coeff: a,
            offset: b,
            degree: 4,
        })
        .collect();
    GeneralGame::new(net, delays, m).expect("valid by construction")
}

/// Parameter ranges for the random series-parallel corpus.
#[derive(Debug, Clone, Copy)]
pub struct SeriesParallelParams {
    pub depth: usize,
    pub slope_range: (f64, f64),
    pub throughput_range: (f64, f64),
}

impl Default for SeriesParallelParams {
    fn default() -> Self {
        Self {
            depth: 5,
            slope_range: (0.5, 4.0),
            throughput_range: (0.5, 8.0),
        }
    }
}

/// Random series-parallel affine game with b = 0 (so every link carries
/// flow at any throughput). Built by recursive series/parallel composition;
/// depth 1 is a single link.
pub fn random_series_parallel(seed: u64, params: SeriesParallelParams) -> AffineGame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut links: Vec<(usize, usize)> = Vec::new();
    let mut node_count = 2usize;
    build_sp(&mut rng, params.depth, 0, 1, &mut node_count, &mut links);
    let net = DirectedNetwork::new(node_count, links, 0, 1).expect("composition is valid");
    let a: Vec<f64> = (0..net.link_count())
        .map(|_| rng.random_range(params.slope_range.0..params.slope_range.1))
        .collect();
    let m = rng.random_range(params.throughput_range.0..params.throughput_range.1);
    let b = vec![0.0; net.link_count()];
    AffineGame::new(net, a, b, m).expect("composition is pruned and positive")
}

fn build_sp(
    rng: &mut ChaCha8Rng,
    depth: usize,
    o: usize,
    d: usize,
    node_count: &mut usize,
    links: &mut Vec<(usize, usize)>,
) {
    if depth <= 1 {
        links.push((o, d));
        return;
    }
    match rng.random_range(0..3u8) {
        // series: split at a fresh middle node
        0 => {
            let mid = *node_count;
            *node_count += 1;
            build_sp(rng, depth - 1, o, mid, node_count, links);
            build_sp(rng, depth - 1, mid, d, node_count, links);
        }
        // parallel composition of two smaller blocks
        1 => {
            build_sp(rng, depth - 1, o, d, node_count, links);
            build_sp(rng, depth - 1, o, d, node_count, links);
        }
        // stop early with a single link
        _ => links.push((o, d)),
    }
}

/// Random connected weighted graph: a random spanning tree plus extra
/// chords, conductances drawn from `weight_range`.
pub fn random_connected(
    seed: u64,
    nodes: usize,
    extra_links: usize,
    weight_range: (f64, f64),
) -> ResistorNet {
    assert!(nodes >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for v in 1..nodes {
        let u = rng.random_range(0..v);
        edges.push((u, v, rng.random_range(weight_range.0..weight_range.1)));
    }
    let mut attempts = 0;
    let mut added = 0;
    while added < extra_links && attempts < 20 * extra_links + 100 {
        attempts += 1;
        let u = rng.random_range(0..nodes);
        let v = rng.random_range(0..nodes);
        if u == v {
            continue;
        }
        let key = (u.min(v), u.max(v));
        if edges.iter().any(|&(a, b, _)| (a.min(b), a.max(b)) == key) {
            continue;
        }
        edges.push((key.0, key.1, rng.random_range(weight_range.0..weight_range.1)));
        added += 1;
    }
    ResistorNet::from_weighted_edges(nodes, &edges).expect("tree plus chords is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_and_ring_counts() {
        let g = square_grid(5);
        assert_eq!(g.node_count(), 25);
        assert_eq!(g.link_count(), 2 * 5 * 4);

        let c = cube_grid(3);
        assert_eq!(c.node_count(), 27);
        assert_eq!(c.link_count(), 54);

        let r = ring(6);
        assert_eq!(r.node_count(), 6);
        assert_eq!(r.link_count(), 6);
    }

    #[test]
    fn double_tree_counts() {
        for depth in [2usize, 3, 5] {
            let t = double_tree(depth);
            assert_eq!(t.node_count(), 2 * ((1 << (depth + 1)) - 1));
            assert_eq!(t.link_count(), t.node_count() - 1);
        }
    }

    #[test]
    fn la_topology_counts() {
        let net = la_highway();
        assert_eq!(net.node_count(), 17);
        assert_eq!(net.link_count(), 28);
        assert!(net.validate().is_empty());
        // every link lies on an o→d path
        assert_eq!(net.prune().unwrap().link_count(), 28);
    }

    #[test]
    fn wheatstone_and_example1_shapes() {
        let w = wheatstone([1.0, 1.0], [1.0, 1.5], 1.0);
        assert_eq!(w.network().link_count(), 2);
        let e = example1([3.0, 2.0, 1.0], 3.0);
        assert_eq!(e.network().node_count(), 3);
    }

    #[test]
    fn random_series_parallel_is_recognized() {
        for seed in 0..30 {
            let game = random_series_parallel(seed, SeriesParallelParams::default());
            assert!(game.network().is_series_parallel(), "seed {seed}");
            assert!(game.b().iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn random_series_parallel_depth_one_is_single_link() {
        let game = random_series_parallel(
            3,
            SeriesParallelParams {
                depth: 1,
                ..Default::default()
            },
        );
        assert_eq!(game.network().link_count(), 1);
    }

    #[test]
    fn generators_are_deterministic() {
        let a = random_series_parallel(11, SeriesParallelParams::default());
        let b = random_series_parallel(11, SeriesParallelParams::default());
        assert_eq!(a.network().links(), b.network().links());
        assert_eq!(a.a(), b.a());
        assert_eq!(a.throughput(), b.throughput());

        let x = random_connected(5, 30, 20, (0.5, 2.0));
        let y = random_connected(5, 30, 20, (0.5, 2.0));
        assert_eq!(x.links(), y.links());
    }
}
