//! Wardrop equilibria of routing games.
//!
//! Two independent solvers are provided. [`solve_affine`] runs an active-set
//! iteration on the linear KKT system of the affine game: it solves on a
//! candidate support, drops the most negative flow (assigning its multiplier
//! from stationarity), re-admits dropped links whose multiplier turns
//! negative, and terminates when both flows and multipliers are nonnegative.
//! [`solve_convex`] minimizes the Beckmann potential with away-step
//! Frank-Wolfe over path assignments and certifies optimality with the
//! Frank-Wolfe duality gap. The two agree on every instance up to solver
//! tolerance; the convex solver doubles as the fallback when a candidate
//! support disconnects the reduced system.

use crate::error::{Error, Result};
use crate::linalg::{grounded_laplacian, Grounding, SpdSolver};
use crate::net::DirectedNetwork;
use crate::SUPPORT_REL_TOL;
use std::collections::BinaryHeap;

/// Per-link delay function τ(f) = coeff·f^degree + offset.
///
/// `degree = 1` is the affine case; higher degrees model congestion that
/// kicks in sharply (the polynomial family is what the file format accepts).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Delay {
    Affine { a: f64, b: f64 },
    Polynomial { coeff: f64, offset: f64, degree: u32 },
}

impl Delay {
    pub fn eval(&self, f: f64) -> f64 {
        match *self {
            Delay::Affine { a, b } => a * f + b,
            Delay::Polynomial { coeff, offset, degree } => coeff * f.powi(degree as i32) + offset,
        }
    }

    pub fn derivative(&self, f: f64) -> f64 {
        match *self {
            Delay::Affine { a, .. } => a,
            Delay::Polynomial { coeff, degree, .. } => {
                coeff * degree as f64 * f.powi(degree as i32 - 1)
            }
        }
    }

    /// Beckmann primitive ∫₀^f τ(s) ds, in closed form.
    pub fn primitive(&self, f: f64) -> f64 {
        match *self {
            Delay::Affine { a, b } => 0.5 * a * f * f + b * f,
            Delay::Polynomial { coeff, offset, degree } => {
                coeff * f.powi(degree as i32 + 1) / (degree as f64 + 1.0) + offset * f
            }
        }
    }

    /// Free-flow time τ(0).
    pub fn offset(&self) -> f64 {
        match *self {
            Delay::Affine { b, .. } => b,
            Delay::Polynomial { offset, .. } => offset,
        }
    }

    /// Congestion coefficient (the part an intervention divides by 1+u).
    pub fn coefficient(&self) -> f64 {
        match *self {
            Delay::Affine { a, .. } => a,
            Delay::Polynomial { coeff, .. } => coeff,
        }
    }

    /// Same delay with the congestion term divided by `1 + u`.
    pub fn improved(&self, u: f64) -> Delay {
        match *self {
            Delay::Affine { a, b } => Delay::Affine { a: a / (1.0 + u), b },
            Delay::Polynomial { coeff, offset, degree } => Delay::Polynomial {
                coeff: coeff / (1.0 + u),
                offset,
                degree,
            },
        }
    }
}

/// Affine routing game: τ_e(f) = a_e f + b_e, throughput m from o to d.
#[derive(Debug, Clone)]
pub struct AffineGame {
    network: DirectedNetwork,
    a: Vec<f64>,
    b: Vec<f64>,
    m: f64,
}

impl AffineGame {
    /// The network must already be pruned: every link on some o→d path.
    pub fn new(network: DirectedNetwork, a: Vec<f64>, b: Vec<f64>, m: f64) -> Result<Self> {
        let mut violations = network.validate();
        if a.len() != network.link_count() || b.len() != network.link_count() {
            violations.push("delay coefficient length differs from link count".to_string());
        }
        if a.iter().any(|&x| x <= 0.0) {
            violations.push("all slopes a_e must be positive".to_string());
        }
        if b.iter().any(|&x| x < 0.0) {
            violations.push("free-flow times b_e must be nonnegative".to_string());
        }
        if m <= 0.0 {
            violations.push("throughput must be positive".to_string());
        }
        if violations.is_empty() && network.prune()?.link_count() != network.link_count() {
            violations.push("network is not pruned".to_string());
        }
        if !violations.is_empty() {
            return Err(Error::invalid(&violations));
        }
        Ok(Self { network, a, b, m })
    }

    pub fn network(&self) -> &DirectedNetwork {
        &self.network
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn throughput(&self) -> f64 {
        self.m
    }

    pub fn delay(&self, e: usize, f: f64) -> f64 {
        self.a[e] * f + self.b[e]
    }

    /// Game with link `e`'s slope divided by `1 + u`.
    pub fn improved(&self, e: usize, u: f64) -> Self {
        let mut a = self.a.clone();
        a[e] /= 1.0 + u;
        Self {
            network: self.network.clone(),
            a,
            b: self.b.clone(),
            m: self.m,
        }
    }

    pub fn to_general(&self) -> GeneralGame {
        let delays = self
            .a
            .iter()
            .zip(&self.b)
            .map(|(&a, &b)| Delay::Affine { a, b })
            .collect();
        GeneralGame {
            network: self.network.clone(),
            delays,
            m: self.m,
        }
    }
}

/// Routing game with arbitrary strictly increasing polynomial delays.
#[derive(Debug, Clone)]
pub struct GeneralGame {
    network: DirectedNetwork,
    delays: Vec<Delay>,
    m: f64,
}

impl GeneralGame {
    pub fn new(network: DirectedNetwork, delays: Vec<Delay>, m: f64) -> Result<Self> {
        let mut violations = network.validate();
        if delays.len() != network.link_count() {
            violations.push("delay list length differs from link count".to_string());
        }
        for (e, d) in delays.iter().enumerate() {
            if d.coefficient() <= 0.0 {
                violations.push(format!("link {e}: congestion coefficient must be positive"));
            }
            if d.offset() < 0.0 {
                violations.push(format!("link {e}: free-flow time must be nonnegative"));
            }
        }
        if m <= 0.0 {
            violations.push("throughput must be positive".to_string());
        }
        if violations.is_empty() && network.prune()?.link_count() != network.link_count() {
            violations.push("network is not pruned".to_string());
        }
        if !violations.is_empty() {
            return Err(Error::invalid(&violations));
        }
        Ok(Self { network, delays, m })
    }

    pub fn network(&self) -> &DirectedNetwork {
        &self.network
    }

    pub fn delays(&self) -> &[Delay] {
        &self.delays
    }

    pub fn throughput(&self) -> f64 {
        self.m
    }

    pub fn delay(&self, e: usize, f: f64) -> f64 {
        self.delays[e].eval(f)
    }

    /// Game with link `e`'s congestion term divided by `1 + u`.
    pub fn improved(&self, e: usize, u: f64) -> Self {
        let mut delays = self.delays.clone();
        delays[e] = delays[e].improved(u);
        Self {
            network: self.network.clone(),
            delays,
            m: self.m,
        }
    }
}

/// A solved equilibrium: flows, multipliers, support and social cost.
///
/// γ is normalized by γ_d = 0; E_+ collects the links with λ_e > 0
/// (equivalently, unused at equilibrium).
#[derive(Debug, Clone)]
pub struct Equilibrium {
    pub f: Vec<f64>,
    pub gamma: Vec<f64>,
    pub lambda: Vec<f64>,
    pub support_complement: Vec<usize>,
    pub social_cost: f64,
}

impl Equilibrium {
    fn assemble(delays: &[Delay], f: Vec<f64>, gamma: Vec<f64>, lambda: Vec<f64>, game_m: f64, origin: usize, destination: usize) -> Result<Self> {
        let cost_scale = gamma[origin].abs().max(1.0);
        let support_complement = (0..f.len())
            .filter(|&e| {
                f[e] <= SUPPORT_REL_TOL * game_m && lambda[e] > SUPPORT_REL_TOL * cost_scale
            })
            .collect();
        let direct: f64 = f
            .iter()
            .enumerate()
            .map(|(e, &fe)| fe * delays[e].eval(fe))
            .sum();
        let via_multiplier = game_m * (gamma[origin] - gamma[destination]);
        if (direct - via_multiplier).abs() > 1e-7 * direct.abs().max(1.0) {
            return Err(Error::InconsistentMultipliers {
                direct,
                multiplier: via_multiplier,
            });
        }
        Ok(Self {
            f,
            gamma,
            lambda,
            support_complement,
            social_cost: direct,
        })
    }
}

/// Total travel time Σ_e f_e τ_e(f_e), cross-checked against m(γ_o − γ_d).
pub fn social_cost(eq: &Equilibrium, game: &GeneralGame) -> Result<f64> {
    let direct: f64 = eq
        .f
        .iter()
        .enumerate()
        .map(|(e, &fe)| fe * game.delay(e, fe))
        .sum();
    let via_multiplier = game.throughput()
        * (eq.gamma[game.network().origin()] - eq.gamma[game.network().destination()]);
    if (direct - via_multiplier).abs() > 1e-7 * direct.abs().max(1.0) {
        return Err(Error::InconsistentMultipliers {
            direct,
            multiplier: via_multiplier,
        });
    }
    Ok(direct)
}

/// Solves the affine game by active-set iteration on the KKT system.
///
/// One link leaves the candidate support per iteration (the most negative
/// flow); a dropped link re-enters when its multiplier turns negative. A
/// singular reduced system (the candidate support disconnects some node
/// from the destination) and the E² iteration cap both fall back to the
/// convex solver.
pub fn solve_affine(game: &AffineGame) -> Result<Equilibrium> {
    match solve_affine_active_set(game) {
        Ok(eq) => Ok(eq),
        Err(Error::SingularSystem(_)) | Err(Error::NotConverged { .. }) => {
            solve_affine_via_convex(game)
        }
        Err(e) => Err(e),
    }
}

fn solve_affine_via_convex(game: &AffineGame) -> Result<Equilibrium> {
    let general = game.to_general();
    let scale = game.throughput() * game.b().iter().cloned().fold(1.0, f64::max);
    solve_convex(&general, 1e-12 * scale.max(1.0), 2_000_000)
}

fn solve_affine_active_set(game: &AffineGame) -> Result<Equilibrium> {
    let net = game.network();
    let (n, e_count) = (net.node_count(), net.link_count());
    let (o, d) = (net.origin(), net.destination());
    let m = game.throughput();
    let flow_tol = 1e-10 * m.max(1.0);

    let mut in_support = vec![true; e_count];
    let cap = e_count * e_count + 4;
    for _ in 0..cap {
        // Nodes touched by the candidate support; others are outside the
        // system (their conservation constraint is vacuous).
        let mut active = vec![false; n];
        active[o] = true;
        active[d] = true;
        for e in 0..e_count {
            if in_support[e] {
                active[net.tail(e)] = true;
                active[net.head(e)] = true;
            }
        }
        let grounding = Grounding::new_within(n, &active, &[d]);
        let conductances = (0..e_count).filter(|&e| in_support[e]).map(|e| {
            (net.tail(e), net.head(e), 1.0 / game.a()[e])
        });
        let lap = grounded_laplacian(&grounding, conductances);
        let solver = SpdSolver::new(lap)?;

        // rhs = K^T b + ν restricted away from the destination
        let mut rhs = vec![0.0; grounding.len()];
        for e in 0..e_count {
            if !in_support[e] {
                continue;
            }
            let w = game.b()[e] / game.a()[e];
            if let Some(rt) = grounding.reduced(net.tail(e)) {
                rhs[rt] += w;
            }
            if let Some(rh) = grounding.reduced(net.head(e)) {
                rhs[rh] -= w;
            }
        }
        match grounding.reduced(o) {
            Some(ro) => rhs[ro] += m,
            None => return Err(Error::NoPath),
        }

        let gamma_reduced = solver.solve(&rhs)?;
        let gamma = grounding.scatter(&gamma_reduced, n);

        let mut f = vec![0.0; e_count];
        let mut lambda = vec![0.0; e_count];
        for e in 0..e_count {
            let dg = gamma[net.tail(e)] - gamma[net.head(e)];
            if in_support[e] {
                f[e] = (dg - game.b()[e]) / game.a()[e];
            } else {
                lambda[e] = game.b()[e] - dg;
            }
        }

        let worst_flow = (0..e_count)
            .filter(|&e| in_support[e])
            .min_by(|&x, &y| f[x].partial_cmp(&f[y]).unwrap());
        if let Some(e) = worst_flow {
            if f[e] < -flow_tol {
                in_support[e] = false;
                continue;
            }
        }
        let cost_scale = gamma[o].abs().max(1.0);
        let worst_lambda = (0..e_count)
            .filter(|&e| !in_support[e])
            .min_by(|&x, &y| lambda[x].partial_cmp(&lambda[y]).unwrap());
        if let Some(e) = worst_lambda {
            if lambda[e] < -1e-10 * cost_scale {
                in_support[e] = true;
                continue;
            }
        }

        for fe in &mut f {
            if *fe < 0.0 {
                *fe = 0.0;
            }
        }
        for le in &mut lambda {
            if *le < 0.0 {
                *le = 0.0;
            }
        }
        let delays = game.to_general().delays().to_vec();
        return Equilibrium::assemble(&delays, f, gamma, lambda, m, o, d);
    }
    Err(Error::NotConverged {
        gap: f64::NAN,
        iterations: cap,
    })
}

/// Maximum KKT violation of a candidate equilibrium, over all five
/// condition groups: stationarity, conservation, complementary slackness,
/// and the two sign constraints.
pub fn kkt_residual(eq: &Equilibrium, game: &GeneralGame) -> f64 {
    let net = game.network();
    let mut worst = 0.0f64;
    let mut balance = vec![0.0; net.node_count()];
    for (e, &(t, h)) in net.links().iter().enumerate() {
        let stat = game.delay(e, eq.f[e]) + eq.gamma[h] - eq.gamma[t] - eq.lambda[e];
        worst = worst.max(stat.abs());
        worst = worst.max((eq.lambda[e] * eq.f[e]).abs());
        worst = worst.max(-eq.lambda[e]);
        worst = worst.max(-eq.f[e]);
        balance[t] += eq.f[e];
        balance[h] -= eq.f[e];
    }
    balance[net.origin()] -= game.throughput();
    balance[net.destination()] += game.throughput();
    for v in balance {
        worst = worst.max(v.abs());
    }
    worst
}

/// Per-link and overall throughput thresholds above which the whole link
/// set carries flow (series-parallel networks only).
#[derive(Debug, Clone)]
pub struct MinThroughput {
    pub per_link: Vec<f64>,
    pub overall: f64,
}

/// Thresholds m̄_e = (b_e − a_e [K Q⁻¹ Kᵀ]_{e:} b) / Δṽ_e on the full link
/// set, where ṽ is the voltage under unit current injection. On a
/// series-parallel network every Δṽ_e is positive, so each threshold is
/// finite and E_+ = ∅ for every m ≥ m̄ = max_e m̄_e. With b = 0 this yields
/// m̄ = 0: linear series-parallel games use every link at any throughput.
pub fn min_throughput(game: &AffineGame) -> Result<MinThroughput> {
    let net = game.network();
    if !net.is_series_parallel() {
        return Err(Error::NotSeriesParallel);
    }
    let n = net.node_count();
    let (o, d) = (net.origin(), net.destination());
    let grounding = Grounding::new(n, &[d]);
    let conductances = (0..net.link_count())
        .map(|e| (net.tail(e), net.head(e), 1.0 / game.a()[e]));
    let solver = SpdSolver::new(grounded_laplacian(&grounding, conductances))?;

    // z = Q⁻¹ Kᵀ b, so a_e [K Q⁻¹ Kᵀ]_{e:} b = z_{ξ(e)} − z_{θ(e)}
    let mut ktb = vec![0.0; grounding.len()];
    for e in 0..net.link_count() {
        let w = game.b()[e] / game.a()[e];
        if let Some(rt) = grounding.reduced(net.tail(e)) {
            ktb[rt] += w;
        }
        if let Some(rh) = grounding.reduced(net.head(e)) {
            ktb[rh] -= w;
        }
    }
    let z = grounding.scatter(&solver.solve(&ktb)?, n);

    let mut unit = vec![0.0; grounding.len()];
    unit[grounding.reduced(o).expect("origin is never the destination")] = 1.0;
    let v_tilde = grounding.scatter(&solver.solve(&unit)?, n);

    let per_link: Vec<f64> = (0..net.link_count())
        .map(|e| {
            let dv = v_tilde[net.tail(e)] - v_tilde[net.head(e)];
            let numerator = game.b()[e] - (z[net.tail(e)] - z[net.head(e)]);
            if numerator <= 0.0 {
                0.0
            } else {
                numerator / dv
            }
        })
        .collect();
    let overall = per_link.iter().cloned().fold(0.0, f64::max);
    Ok(MinThroughput { per_link, overall })
}

// ---------------------------------------------------------------------------
// Convex (Beckmann) solver: away-step Frank-Wolfe over path assignments.
// ---------------------------------------------------------------------------

#[derive(Clone)]
struct PathAtom {
    links: Vec<usize>,
    weight: f64,
}

/// Minimizes the Beckmann potential over feasible flows until the
/// Frank-Wolfe duality gap certificate drops below `tol` (absolute).
///
/// Away steps over the discovered path set give the linear convergence
/// needed to certify tight gaps; the step size is an exact line search on
/// the directional derivative (closed form for affine delays, bisection
/// otherwise). Multipliers are recovered as shortest-path potentials to the
/// destination under the equilibrium costs, with γ_d = 0.
pub fn solve_convex(game: &GeneralGame, tol: f64, max_iter: usize) -> Result<Equilibrium> {
    let net = game.network();
    let e_count = net.link_count();
    let m = game.throughput();

    let costs_at = |f: &[f64]| -> Vec<f64> {
        (0..e_count).map(|e| game.delay(e, f[e])).collect()
    };

    let zero_costs = costs_at(&vec![0.0; e_count]);
    let first = shortest_path(net, &zero_costs).ok_or(Error::NoPath)?;
    let mut atoms = vec![PathAtom { links: first.1, weight: 1.0 }];
    let mut f = flow_of(&atoms, m, e_count);
    let mut last_gap = f64::INFINITY;

    for _ in 0..max_iter {
        let costs = costs_at(&f);
        let (sp_cost, sp_links) = shortest_path(net, &costs).ok_or(Error::NoPath)?;
        let cf: f64 = costs.iter().zip(&f).map(|(c, fe)| c * fe).sum();
        let fw_gap = cf - m * sp_cost;
        last_gap = fw_gap;
        if fw_gap <= tol {
            break;
        }

        let away_idx = atoms
            .iter()
            .enumerate()
            .max_by(|(_, x), (_, y)| {
                let cx: f64 = x.links.iter().map(|&e| costs[e]).sum();
                let cy: f64 = y.links.iter().map(|&e| costs[e]).sum();
                cx.partial_cmp(&cy).unwrap()
            })
            .map(|(i, _)| i)
            .unwrap();
        let away_cost: f64 = atoms[away_idx].links.iter().map(|&e| costs[e]).sum();
        let away_gap = m * away_cost - cf;

        let mut direction = vec![0.0; e_count];
        let (gamma_max, fw_step) = if fw_gap >= away_gap {
            for &e in &sp_links {
                direction[e] += m;
            }
            for (e, fe) in f.iter().enumerate() {
                direction[e] -= fe;
            }
            (1.0, true)
        } else {
            let w = atoms[away_idx].weight;
            for (e, fe) in f.iter().enumerate() {
                direction[e] = *fe;
            }
            for &e in &atoms[away_idx].links {
                direction[e] -= m;
            }
            (w / (1.0 - w).max(f64::MIN_POSITIVE), false)
        };

        let step = line_search(game, &f, &direction, gamma_max);
        if step <= 0.0 {
            break;
        }

        if fw_step {
            for atom in &mut atoms {
                atom.weight *= 1.0 - step;
            }
            if let Some(atom) = atoms.iter_mut().find(|a| a.links == sp_links) {
                atom.weight += step;
            } else {
                atoms.push(PathAtom { links: sp_links, weight: step });
            }
        } else {
            for (i, atom) in atoms.iter_mut().enumerate() {
                if i == away_idx {
                    atom.weight *= 1.0 + step;
                    atom.weight -= step;
                } else {
                    atom.weight *= 1.0 + step;
                }
            }
        }
        atoms.retain(|a| a.weight > 1e-15);
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        for atom in &mut atoms {
            atom.weight /= total;
        }
        f = flow_of(&atoms, m, e_count);
    }

    if last_gap > tol {
        return Err(Error::NotConverged {
            gap: last_gap,
            iterations: max_iter,
        });
    }

    let costs = costs_at(&f);
    let gamma = potentials_to_destination(net, &costs);
    let mut lambda = vec![0.0; e_count];
    for e in 0..e_count {
        lambda[e] = (costs[e] + gamma[net.head(e)] - gamma[net.tail(e)]).max(0.0);
    }
    // exact zeros for clearly-used links keep complementary slackness clean
    for e in 0..e_count {
        if f[e] > SUPPORT_REL_TOL * m {
            lambda[e] = 0.0;
        }
    }
    Equilibrium::assemble(
        game.delays(),
        f,
        gamma,
        lambda,
        m,
        net.origin(),
        net.destination(),
    )
}

fn flow_of(atoms: &[PathAtom], m: f64, e_count: usize) -> Vec<f64> {
    let mut f = vec![0.0; e_count];
    for atom in atoms {
        for &e in &atom.links {
            f[e] += atom.weight * m;
        }
    }
    f
}

/// Exact line search for the Beckmann objective along `direction`,
/// restricted to [0, gamma_max]. The directional derivative
/// φ'(γ) = Σ_e τ_e(f_e + γ d_e) d_e is nondecreasing in γ.
fn line_search(game: &GeneralGame, f: &[f64], direction: &[f64], gamma_max: f64) -> f64 {
    let phi = |g: f64| -> f64 {
        direction
            .iter()
            .enumerate()
            .filter(|(_, &de)| de != 0.0)
            .map(|(e, &de)| game.delay(e, (f[e] + g * de).max(0.0)) * de)
            .sum()
    };
    if phi(0.0) >= 0.0 {
        return 0.0;
    }
    if phi(gamma_max) <= 0.0 {
        return gamma_max;
    }
    let affine = game.delays().iter().all(|d| matches!(d, Delay::Affine { .. }));
    if affine {
        let num: f64 = -phi(0.0);
        let den: f64 = direction
            .iter()
            .enumerate()
            .map(|(e, &de)| game.delays()[e].coefficient() * de * de)
            .sum();
        return (num / den).clamp(0.0, gamma_max);
    }
    let (mut lo, mut hi) = (0.0, gamma_max);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Dijkstra from the origin; returns (cost, link ids of a shortest path).
fn shortest_path(net: &DirectedNetwork, costs: &[f64]) -> Option<(f64, Vec<usize>)> {
    let n = net.node_count();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (e, &(t, h)) in net.links().iter().enumerate() {
        adj[t].push((h, e));
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    dist[net.origin()] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(HeapItem { cost: 0.0, node: net.origin() });
    while let Some(HeapItem { cost, node }) = heap.pop() {
        if cost > dist[node] {
            continue;
        }
        for &(next, e) in &adj[node] {
            let cand = cost + costs[e];
            if cand < dist[next] {
                dist[next] = cand;
                pred[next] = Some(e);
                heap.push(HeapItem { cost: cand, node: next });
            }
        }
    }
    if !dist[net.destination()].is_finite() {
        return None;
    }
    let mut links = Vec::new();
    let mut node = net.destination();
    while node != net.origin() {
        let e = pred[node]?;
        links.push(e);
        node = net.tail(e);
    }
    links.reverse();
    Some((dist[net.destination()], links))
}

/// Shortest-path distance from every node to the destination under the
/// given link costs; unreachable nodes get 0 (they carry no pruned links).
fn potentials_to_destination(net: &DirectedNetwork, costs: &[f64]) -> Vec<f64> {
    let n = net.node_count();
    let mut radj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (e, &(t, h)) in net.links().iter().enumerate() {
        radj[h].push((t, e));
    }
    let mut dist = vec![f64::INFINITY; n];
    dist[net.destination()] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(HeapItem { cost: 0.0, node: net.destination() });
    while let Some(HeapItem { cost, node }) = heap.pop() {
        if cost > dist[node] {
            continue;
        }
        for &(prev, e) in &radj[node] {
            let cand = cost + costs[e];
            if cand < dist[prev] {
                dist[prev] = cand;
                heap.push(HeapItem { cost: cand, node: prev });
            }
        }
    }
    dist.into_iter().map(|d| if d.is_finite() { d } else { 0.0 }).collect()
}

struct HeapItem {
    cost: f64,
    node: usize,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cost == other.cost && self.node == other.node
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // min-heap on cost, ties by node id for determinism
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap()
            .then_with(|| other.node.cmp(&self.node))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wheatstone(a: [f64; 2], b: [f64; 2], m: f64) -> AffineGame {
        let net = DirectedNetwork::new(2, vec![(0, 1), (0, 1)], 0, 1).unwrap();
        AffineGame::new(net, a.to_vec(), b.to_vec(), m).unwrap()
    }

    fn example1(a: [f64; 3], m: f64) -> AffineGame {
        let net = DirectedNetwork::new(3, vec![(0, 1), (0, 1), (1, 2)], 0, 2).unwrap();
        AffineGame::new(net, a.to_vec(), vec![0.0; 3], m).unwrap()
    }

    #[test]
    fn wheatstone_interior_equilibrium() {
        let eq = solve_affine(&wheatstone([1.0, 1.0], [1.0, 1.5], 1.0)).unwrap();
        assert!((eq.f[0] - 0.75).abs() < 1e-12);
        assert!((eq.f[1] - 0.25).abs() < 1e-12);
        assert!(eq.lambda[0].abs() < 1e-12 && eq.lambda[1].abs() < 1e-12);
        assert!(eq.support_complement.is_empty());
    }

    #[test]
    fn wheatstone_boundary_equilibrium() {
        // slope of link 1 improved to 1/3: link 2 leaves the support
        let eq = solve_affine(&wheatstone([1.0 / 3.0, 1.0], [1.0, 1.5], 1.0)).unwrap();
        assert!((eq.f[0] - 1.0).abs() < 1e-12);
        assert!(eq.f[1].abs() < 1e-12);
        assert!((eq.lambda[1] - 1.0 / 6.0).abs() < 1e-12);
        assert_eq!(eq.support_complement, vec![1]);
    }

    #[test]
    fn example1_parallel_split() {
        let eq = solve_affine(&example1([3.0, 2.0, 1.0], 3.0)).unwrap();
        assert!((eq.f[0] - 1.2).abs() < 1e-12);
        assert!((eq.f[1] - 1.8).abs() < 1e-12);
        assert!((eq.f[2] - 3.0).abs() < 1e-12);
        assert!((eq.social_cost - 19.8).abs() < 1e-10);
    }

    #[test]
    fn single_link_carries_everything() {
        let net = DirectedNetwork::new(2, vec![(0, 1)], 0, 1).unwrap();
        let game = GeneralGame::new(
            net,
            vec![Delay::Polynomial { coeff: 2.0, offset: 0.5, degree: 4 }],
            2.5,
        )
        .unwrap();
        let eq = solve_convex(&game, 1e-12, 10_000).unwrap();
        assert!((eq.f[0] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn kkt_residual_contract() {
        let game = wheatstone([1.0, 1.0], [1.0, 1.5], 1.0);
        let eq = solve_affine(&game).unwrap();
        assert!(kkt_residual(&eq, &game.to_general()) < 1e-9);
        // exact rational Wheatstone data resolves to machine precision
        assert!(kkt_residual(&eq, &game.to_general()) < 1e-12);

        let mut broken = eq.clone();
        broken.f[0] += 1.0;
        assert!(kkt_residual(&broken, &game.to_general()) >= 1.0);
    }

    #[test]
    fn convex_agrees_with_active_set() {
        let game = wheatstone([1.0, 1.0], [1.0, 1.5], 1.0);
        let exact = solve_affine(&game).unwrap();
        let fw = solve_convex(&game.to_general(), 1e-13, 500_000).unwrap();
        for e in 0..2 {
            assert!((exact.f[e] - fw.f[e]).abs() < 1e-6);
        }
    }

    #[test]
    fn min_throughput_wheatstone() {
        // two parallel links, a = (1,1), b = (1, 3/2): f_2 ≥ 0 iff
        // m ≥ (b_2 − b_1)/a_1 = 1/2
        let game = wheatstone([1.0, 1.0], [1.0, 1.5], 1.0);
        let thr = min_throughput(&game).unwrap();
        assert!((thr.overall - 0.5).abs() < 1e-12);
    }

    #[test]
    fn min_throughput_zero_for_linear() {
        let thr = min_throughput(&example1([3.0, 2.0, 1.0], 3.0)).unwrap();
        assert_eq!(thr.overall, 0.0);

        let net = DirectedNetwork::new(2, vec![(0, 1)], 0, 1).unwrap();
        let single = AffineGame::new(net, vec![2.0], vec![0.7], 1.0).unwrap();
        assert_eq!(min_throughput(&single).unwrap().overall, 0.0);
    }

    #[test]
    fn min_throughput_rejects_non_series_parallel() {
        let net =
            DirectedNetwork::new(4, vec![(0, 1), (0, 2), (1, 3), (2, 3), (1, 2)], 0, 3).unwrap();
        let game = AffineGame::new(net, vec![1.0; 5], vec![0.0; 5], 1.0).unwrap();
        assert!(matches!(min_throughput(&game), Err(Error::NotSeriesParallel)));
    }
}
