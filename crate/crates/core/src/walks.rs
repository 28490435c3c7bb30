//! Hitting-probability diagnostics for the bound gap.
//!
//! All probabilities refer to the jump chain P = I_w⁻¹ W of the
//! continuous-time walk with rates W; hitting order is insensitive to the
//! exponential holding times, so the discrete chain gives the same values.
//! Every quantity is solved exactly as an absorbing-boundary harmonic
//! system — no Monte Carlo.

use crate::error::{Error, Result};
use crate::linalg::{grounded_laplacian, Grounding, SpdSolver};
use crate::localres::{cut_at_distance, short_at_distance};
use crate::resistor::ResistorNet;

/// p_start(T_A < T_B): which of two disjoint node sets is hit first.
#[derive(Debug, Clone)]
pub struct HittingQuery {
    pub start: usize,
    pub target_a: Vec<usize>,
    pub target_b: Vec<usize>,
}

impl HittingQuery {
    pub fn new(start: usize, target_a: Vec<usize>, target_b: Vec<usize>) -> Result<Self> {
        if target_a.is_empty() && target_b.is_empty() {
            return Err(Error::Invalid("both target sets are empty".to_string()));
        }
        if target_a.iter().any(|a| target_b.contains(a)) {
            return Err(Error::Invalid("target sets intersect".to_string()));
        }
        Ok(Self {
            start,
            target_a,
            target_b,
        })
    }
}

/// Solves the harmonic system for p(T_A < T_B): absorbing value 1 on A,
/// 0 on B, conductance-weighted average at interior nodes of the start's
/// component.
pub fn hit_before(rn: &ResistorNet, query: &HittingQuery) -> Result<f64> {
    if query.target_a.contains(&query.start) {
        return Ok(1.0);
    }
    if query.target_b.contains(&query.start) {
        return Ok(0.0);
    }
    let p = hit_before_all(rn, query.start, &query.target_a, &query.target_b)?;
    Ok(p[query.start])
}

/// Full vector of p(T_A < T_B) over the component of `within`.
fn hit_before_all(
    rn: &ResistorNet,
    within: usize,
    target_a: &[usize],
    target_b: &[usize],
) -> Result<Vec<f64>> {
    let component = rn.component_of(within);
    let absorbing: Vec<usize> = target_a
        .iter()
        .chain(target_b)
        .copied()
        .filter(|&v| component[v])
        .collect();
    if absorbing.is_empty() {
        return Err(Error::Unreachable(within));
    }
    let grounding = Grounding::new_within(rn.node_count(), &component, &absorbing);
    if grounding.is_empty() {
        // every node of the component is absorbing
        let mut p = vec![0.0; rn.node_count()];
        for &a in target_a {
            if component.get(a).copied().unwrap_or(false) {
                p[a] = 1.0;
            }
        }
        return Ok(p);
    }
    let edges = rn
        .links()
        .iter()
        .enumerate()
        .map(|(l, &(a, b))| (a, b, rn.weight(l)));
    let solver = SpdSolver::new(grounded_laplacian(&grounding, edges))?;

    // rhs: conductance into the 1-valued boundary
    let mut rhs = vec![0.0; grounding.len()];
    for &a in target_a {
        if !component.get(a).copied().unwrap_or(false) {
            continue;
        }
        for &(nbr, l) in rn.neighbors(a) {
            if let Some(rn_idx) = grounding.reduced(nbr) {
                rhs[rn_idx] += rn.weight(l);
            }
        }
    }
    let mut p = grounding.scatter(&solver.solve(&rhs)?, rn.node_count());
    for &a in target_a {
        if component.get(a).copied().unwrap_or(false) {
            p[a] = 1.0;
        }
    }
    Ok(p)
}

/// Escape probability p_i(T_j < T_i⁺): one jump out of i, then hit j
/// before returning. Equals 1/(w_i · r_{ij}) on every network.
pub fn return_escape(rn: &ResistorNet, i: usize, j: usize) -> Result<f64> {
    rn.require_connected(i, j)?;
    let p = hit_before_all(rn, i, &[j], &[i])?;
    let total: f64 = rn
        .neighbors(i)
        .iter()
        .map(|&(nbr, l)| rn.weight(l) * p[nbr])
        .sum();
    Ok(total / rn.degree(i))
}

/// N_d: nodes at hop distance exactly d from one endpoint of the link and
/// at least d from the other.
pub fn shell_nodes(rn: &ResistorNet, link: usize, d: usize) -> Vec<usize> {
    let (i, j) = rn.links()[link];
    let adj: Vec<Vec<usize>> = (0..rn.node_count())
        .map(|v| rn.neighbors(v).iter().map(|&(n, _)| n).collect())
        .collect();
    let di = crate::net::bfs_multi(&adj, &[i]);
    let dj = crate::net::bfs_multi(&adj, &[j]);
    (0..rn.node_count())
        .filter(|&n| match (di[n], dj[n]) {
            (Some(a), Some(b)) => (a == d && b >= d) || (b == d && a >= d),
            _ => false,
        })
        .collect()
}

/// Term 1 of the gap bound: p_i(T_{N_d} < T_j) on the full network.
/// Zero when the shell is empty. Nonincreasing in d.
pub fn term1(rn: &ResistorNet, link: usize, d: usize) -> Result<f64> {
    let shell = shell_nodes(rn, link, d);
    if shell.is_empty() {
        return Ok(0.0);
    }
    let (i, j) = rn.links()[link];
    hit_before(rn, &HittingQuery::new(i, shell, vec![j])?)
}

/// Term 2: max over shell nodes g of p^{U_d}_g(T_i < T_j) − p^{L_d}_g(T_i < T_j),
/// the cut and shorted networks disagreeing on where the walk lands first.
/// One absorbing solve per local network covers every shell node.
pub fn term2(rn: &ResistorNet, link: usize, d: usize) -> Result<f64> {
    let shell = shell_nodes(rn, link, d);
    if shell.is_empty() {
        return Ok(0.0);
    }
    let (i, j) = rn.links()[link];
    let cut = cut_at_distance(rn, link, d);
    let shorted = short_at_distance(rn, link, d);
    let pu = hit_before_all(
        &cut.net,
        cut.node_map[i].unwrap(),
        &[cut.node_map[i].unwrap()],
        &[cut.node_map[j].unwrap()],
    )?;
    let pl = hit_before_all(
        &shorted.net,
        shorted.node_map[i].unwrap(),
        &[shorted.node_map[i].unwrap()],
        &[shorted.node_map[j].unwrap()],
    )?;
    let mut worst = f64::NEG_INFINITY;
    for &g in &shell {
        let gc = cut.node_map[g].expect("shell nodes survive the cut");
        let gs = shorted.node_map[g].expect("shell nodes survive the short");
        worst = worst.max(pu[gc] - pl[gs]);
    }
    Ok(worst)
}

/// Right-hand side of the gap bound: (w_i / W_ij²) · Term 1 · Term 2.
/// Dominates r^{U_d} − r^{L_d}; zero when the shell is empty.
pub fn gap_rhs(rn: &ResistorNet, link: usize, d: usize) -> Result<f64> {
    let shell = shell_nodes(rn, link, d);
    if shell.is_empty() {
        return Ok(0.0);
    }
    let (i, j) = rn.links()[link];
    let w_i = rn.degree(i);
    let w_ij = rn.conductance_between(i, j);
    Ok(w_i / (w_ij * w_ij) * term1(rn, link, d)? * term2(rn, link, d)?)
}

/// Closed-form lower bound of the double tree shorted at distance d:
/// (2^{d+1} − 1)/(2^{d+1} + 2^d − 1). Increases to 2/3, so the bound gap
/// 1 − r^{L_d} converges to 1/3 instead of vanishing.
pub fn double_tree_lower_closed_form(d: u32) -> f64 {
    let p = 2f64.powi(d as i32 + 1);
    let q = 2f64.powi(d as i32);
    (p - 1.0) / (p + q - 1.0)
}

/// The same value from the recursion r(0) = 3, r(n) = 2 + r(n−1)/2,
/// r^{L_d} = (1 + 2/r(d−1))⁻¹.
pub fn double_tree_lower_recursion(d: u32) -> f64 {
    let mut r = 3.0;
    for _ in 1..d {
        r = 2.0 + r / 2.0;
    }
    1.0 / (1.0 + 2.0 / r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::localres::resistance_bounds;
    use crate::resistor::effective_resistance;

    #[test]
    fn ring_gamblers_ruin_closed_forms() {
        // On ring(2d+2) the two shell nodes of link {0,1} hit 0 before 1
        // with probabilities (d+1)/(2d+1) and d/(2d+1).
        for d in 1..=10usize {
            let rn = generators::ring(2 * d + 2);
            let link = rn.link_between(0, 1).unwrap();
            let shell = shell_nodes(&rn, link, d);
            assert_eq!(shell.len(), 2);
            let mut probs: Vec<f64> = shell
                .iter()
                .map(|&g| {
                    hit_before(&rn, &HittingQuery::new(g, vec![0], vec![1]).unwrap()).unwrap()
                })
                .collect();
            probs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = (2 * d + 1) as f64;
            assert!((probs[0] - d as f64 / n).abs() < 1e-12);
            assert!((probs[1] - (d as f64 + 1.0) / n).abs() < 1e-12);
        }
    }

    #[test]
    fn ring_cut_probabilities_are_degenerate() {
        // On the cut network the near-side shell node must pass through
        // its endpoint: probability 1; the far side gives 0.
        let d = 2;
        let rn = generators::ring(12);
        let link = rn.link_between(0, 1).unwrap();
        let cut = cut_at_distance(&rn, link, d);
        let shell = shell_nodes(&rn, link, d);
        let mut probs: Vec<f64> = shell
            .iter()
            .map(|&g| {
                hit_before(
                    &cut.net,
                    &HittingQuery::new(
                        cut.node_map[g].unwrap(),
                        vec![cut.node_map[0].unwrap()],
                        vec![cut.node_map[1].unwrap()],
                    )
                    .unwrap(),
                )
                .unwrap()
            })
            .collect();
        probs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(probs[0].abs() < 1e-15);
        assert!((probs[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn start_inside_target_is_immediate() {
        let rn = generators::ring(6);
        let q = HittingQuery::new(3, vec![3], vec![0]).unwrap();
        assert_eq!(hit_before(&rn, &q).unwrap(), 1.0);
    }

    #[test]
    fn return_escape_small_cases() {
        let two = ResistorNet::from_weighted_edges(2, &[(0, 1, 1.0)]).unwrap();
        assert!((return_escape(&two, 0, 1).unwrap() - 1.0).abs() < 1e-15);

        // unit triangle: r = 2/3, w_i = 2, escape = 1/(2·2/3) = 3/4
        let tri =
            ResistorNet::from_weighted_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        assert!((return_escape(&tri, 0, 1).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn term1_vanishes_beyond_diameter() {
        let rn = generators::ring(8);
        let link = rn.link_between(0, 1).unwrap();
        assert_eq!(term1(&rn, link, 20).unwrap(), 0.0);
        assert_eq!(gap_rhs(&rn, link, 20).unwrap(), 0.0);
        let b = resistance_bounds(&rn, link, 20).unwrap();
        assert!(b.gap().abs() < 1e-15);
    }

    #[test]
    fn term1_monotone_in_d() {
        let rn = generators::square_grid(15);
        let center = 7 * 15 + 7;
        let link = rn.link_between(center, center + 1).unwrap();
        let mut prev = 1.0;
        for d in 1..=5 {
            let t = term1(&rn, link, d).unwrap();
            assert!(t <= prev + 1e-12, "term1 not monotone at d={d}");
            prev = t;
        }
    }

    #[test]
    fn ring_term2_exact_value() {
        // explicit ring: term2 = d/(2d+2), attained at the near-side node
        for d in [2usize, 3, 5] {
            let rn = generators::ring(4 * d + 4);
            let link = rn.link_between(0, 1).unwrap();
            let t2 = term2(&rn, link, d).unwrap();
            assert!(
                (t2 - d as f64 / (2.0 * d as f64 + 2.0)).abs() < 1e-12,
                "d={d}: {t2}"
            );
        }
    }

    #[test]
    fn gap_bound_on_ring() {
        let d = 3;
        let rn = generators::ring(24);
        let link = rn.link_between(0, 1).unwrap();
        let rhs = gap_rhs(&rn, link, d).unwrap();
        let b = resistance_bounds(&rn, link, d).unwrap();
        assert!(rhs > 0.0);
        assert!(b.gap() <= rhs + 1e-12);
    }

    #[test]
    fn double_tree_closed_form_matches_recursion() {
        for d in 1..=10 {
            let cf = double_tree_lower_closed_form(d);
            let rec = double_tree_lower_recursion(d);
            assert!((cf - rec).abs() < 1e-15, "d={d}");
        }
        assert!((double_tree_lower_closed_form(1) - 0.6).abs() < 1e-15);
        assert!((double_tree_lower_closed_form(2) - 7.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn double_tree_shorted_matches_closed_form() {
        for d in [1usize, 2, 4] {
            let rn = generators::double_tree(d + 2);
            let link = rn.link_between(0, 1).unwrap();
            let shorted = short_at_distance(&rn, link, d);
            let rl = effective_resistance(&shorted.net, shorted.link()).unwrap();
            assert!((rl - double_tree_lower_closed_form(d as u32)).abs() < 1e-9);
            // the link is a bridge: cut bound is exactly 1
            let cut = cut_at_distance(&rn, link, d);
            let ru = effective_resistance(&cut.net, cut.link()).unwrap();
            assert!((ru - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn double_tree_term1_stays_positive() {
        let rn = generators::double_tree(9);
        let link = rn.link_between(0, 1).unwrap();
        for d in 2..=6 {
            let t = term1(&rn, link, d).unwrap();
            assert!(t > 0.1, "double tree escape probability collapsed: {t}");
        }
    }
}
