//! Deterministic linear-algebra oracles for the trap walk on small graphs:
//! stationary laws, hitting distributions, escape probabilities, capacities,
//! the stationary state of the deep-trap return chain, expected occupation
//! times, mixing times, and exactly evaluated certificate inequalities. These
//! are the ground truth every Monte Carlo estimate is checked against.

pub mod linalg;

use linalg::{Lu, Mat};

use crate::env::Environment;
use crate::error::Error;
use crate::graph::Graph;
use crate::scalar::Real;
use crate::{Result, VertexId};

/// Largest graph for which dense full-graph solves and matrix powers run.
const DENSE_LIMIT: usize = 2500;

/// A probability distribution on a finite set of states.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution<T = f64> {
    support: Vec<VertexId>,
    mass: Vec<T>,
}

impl<T: Real> Distribution<T> {
    pub fn new(support: Vec<VertexId>, mass: Vec<T>) -> Result<Self> {
        if support.len() != mass.len() || support.is_empty() {
            return Err(Error::Validation("support/mass length mismatch".into()));
        }
        let mut seen = support.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Validation("duplicate state in support".into()));
        }
        if mass.iter().any(|&m| m < -T::epsilon() || !m.is_finite()) {
            return Err(Error::Validation("negative mass".into()));
        }
        let total: T = mass.iter().copied().sum();
        let tol = T::from_f64_lossy(1e-12).max(T::epsilon() * T::from_f64_lossy(100.0));
        if (total - T::one()).abs() > tol {
            return Err(Error::Validation(format!("mass sums to {total}, not 1")));
        }
        Ok(Self { support, mass })
    }

    pub fn from_weights(support: Vec<VertexId>, weights: Vec<T>) -> Result<Self> {
        let total: T = weights.iter().copied().sum();
        if !(total > T::zero()) {
            return Err(Error::Validation("weights must have positive total".into()));
        }
        let mass = weights.into_iter().map(|w| w / total).collect();
        Self::new(support, mass)
    }

    pub fn point_mass(state: VertexId) -> Self {
        Self { support: vec![state], mass: vec![T::one()] }
    }

    pub fn support(&self) -> &[VertexId] {
        &self.support
    }

    pub fn mass(&self) -> &[T] {
        &self.mass
    }

    pub fn mass_of(&self, state: VertexId) -> T {
        self.support
            .iter()
            .position(|&s| s == state)
            .map_or(T::zero(), |i| self.mass[i])
    }

    /// Total variation distance to another distribution (half l1, over the
    /// union of supports).
    pub fn tv(&self, other: &Distribution<T>) -> T {
        let mut states: Vec<VertexId> = self.support.iter().chain(&other.support).copied().collect();
        states.sort_unstable();
        states.dedup();
        let half = T::from_f64_lossy(0.5);
        states
            .into_iter()
            .map(|s| (self.mass_of(s) - other.mass_of(s)).abs())
            .sum::<T>()
            * half
    }
}

/// Stationary distribution of the continuous-time walk: mass proportional to
/// `deg(x) * W_x`.
pub fn stationary_nu<T: Real>(env: &Environment<T>) -> Distribution<T> {
    let g = env.graph();
    let weights: Vec<T> = g
        .vertices()
        .map(|x| T::from_f64_lossy(g.degree(x) as f64) * env.depth(x))
        .collect();
    Distribution::from_weights(g.vertices().collect(), weights).expect("positive depths")
}

/// Stationary distribution of the embedded discrete chains: mass proportional
/// to the degree.
pub fn stationary_pi<T: Real>(g: &Graph) -> Distribution<T> {
    let weights: Vec<T> = g.vertices().map(|x| T::from_f64_lossy(g.degree(x) as f64)).collect();
    Distribution::from_weights(g.vertices().collect(), weights).expect("degrees are positive")
}

fn check_dense_size(g: &Graph) -> Result<()> {
    if g.n_vertices() > DENSE_LIMIT {
        return Err(Error::Size(format!(
            "{} vertices exceed the dense-solve limit {DENSE_LIMIT}",
            g.n_vertices()
        )));
    }
    Ok(())
}

/// Solver for hitting quantities of the jump chain with target set `a`:
/// factorizes the interior system once and exposes hitting distributions from
/// any start, the equilibrium hitting distribution, and the certificate
/// inequalities that bound their distance.
pub struct HittingSolve<T: Real> {
    a: Vec<VertexId>,
    /// Vertices outside `a`, in ascending order.
    transient: Vec<VertexId>,
    /// Local index of each vertex in `transient` (or MAX).
    transient_idx: Vec<u32>,
    /// `h[j][k]` = probability that the walk from `transient[k]` hits `a` at `a[j]`.
    h: Vec<Vec<T>>,
    /// Equilibrium hitting distribution over `a`.
    p: Vec<T>,
}

impl<T: Real> HittingSolve<T> {
    pub fn new(g: &Graph, a: &[VertexId]) -> Result<Self> {
        check_dense_size(g)?;
        if a.is_empty() {
            return Err(Error::Validation("target set is empty".into()));
        }
        let mut sorted = a.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Validation("duplicate vertex in target set".into()));
        }
        let n = g.n_vertices();
        let in_a = {
            let mut mask = vec![false; n];
            for &x in a {
                if x as usize >= n {
                    return Err(Error::Validation(format!("vertex {x} out of range")));
                }
                mask[x as usize] = true;
            }
            mask
        };
        let transient: Vec<VertexId> = g.vertices().filter(|&v| !in_a[v as usize]).collect();
        let mut transient_idx = vec![u32::MAX; n];
        for (k, &v) in transient.iter().enumerate() {
            transient_idx[v as usize] = k as u32;
        }
        let m = transient.len();
        let lu = interior_system(g, &transient, &transient_idx)?;
        // One absorption column per target vertex.
        let mut h = Vec::with_capacity(a.len());
        for &target in a {
            let mut rhs = vec![T::zero(); m];
            for (k, &z) in transient.iter().enumerate() {
                if g.has_edge(z, target) {
                    rhs[k] = T::one() / T::from_f64_lossy(g.degree(z) as f64);
                }
            }
            h.push(match &lu {
                Some(lu) => lu.solve(&rhs),
                None => Vec::new(),
            });
        }
        // Equilibrium hitting: average the columns under the degree-stationary
        // law, plus the mass already sitting on `a`.
        let pi: T = T::one() / T::from_f64_lossy(2.0 * g.n_edges() as f64);
        let p: Vec<T> = a
            .iter()
            .enumerate()
            .map(|(j, &target)| {
                let interior: T = transient
                    .iter()
                    .enumerate()
                    .map(|(k, &z)| T::from_f64_lossy(g.degree(z) as f64) * h[j][k])
                    .sum();
                (interior + T::from_f64_lossy(g.degree(target) as f64)) * pi
            })
            .collect();
        Ok(Self { a: a.to_vec(), transient, transient_idx, h, p })
    }

    pub fn targets(&self) -> &[VertexId] {
        &self.a
    }

    /// `P_z[walk hits the target set at a_j]` for each `j`.
    pub fn hit_distribution(&self, z: VertexId) -> Distribution<T> {
        if let Some(j) = self.a.iter().position(|&x| x == z) {
            let mut mass = vec![T::zero(); self.a.len()];
            mass[j] = T::one();
            return Distribution { support: self.a.clone(), mass };
        }
        let k = self.transient_idx[z as usize] as usize;
        let mass: Vec<T> = self.h.iter().map(|col| col[k]).collect();
        Distribution { support: self.a.clone(), mass }
    }

    /// Hitting distribution from the degree-stationary start.
    pub fn equilibrium(&self) -> Distribution<T> {
        Distribution { support: self.a.clone(), mass: self.p.clone() }
    }
}

/// LU factors of the interior system `(I - Q)` of the jump chain restricted to
/// `transient`; `None` when the transient set is empty.
fn interior_system<T: Real>(
    g: &Graph,
    transient: &[VertexId],
    transient_idx: &[u32],
) -> Result<Option<Lu<T>>> {
    let m = transient.len();
    if m == 0 {
        return Ok(None);
    }
    let mut sys = Mat::zeros(m, m);
    for (k, &z) in transient.iter().enumerate() {
        sys[(k, k)] = T::one();
        let step = T::one() / T::from_f64_lossy(g.degree(z) as f64);
        for &y in g.neighbors(z) {
            let idx = transient_idx[y as usize];
            if idx != u32::MAX {
                sys[(k, idx as usize)] -= step;
            }
        }
    }
    Ok(Some(sys.lu()?))
}

/// `P_z[X(H_A) = a_j]` for the jump chain, as a distribution over `a`.
pub fn hit_distribution<T: Real>(g: &Graph, z: VertexId, a: &[VertexId]) -> Result<Distribution<T>> {
    Ok(HittingSolve::new(g, a)?.hit_distribution(z))
}

/// The equilibrium hitting distribution `p(a_j, A)`: the law of the first
/// visit to `a` when the jump chain starts from its stationary distribution.
pub fn equilibrium_hit<T: Real>(g: &Graph, a: &[VertexId]) -> Result<Distribution<T>> {
    Ok(HittingSolve::new(g, a)?.equilibrium())
}

/// Escape probability `v_ell(x)`: the jump chain from `x` reaches distance
/// greater than `ell` before returning to `x`. Errors when the ball of radius
/// `ell` covers the whole graph.
pub fn escape_probability<T: Real>(g: &Graph, x: VertexId, ell: usize) -> Result<T> {
    let dist = g.distances_from(x);
    let n = g.n_vertices();
    if dist.iter().all(|&d| (d as usize) <= ell) {
        return Err(Error::Domain(format!(
            "ball of radius {ell} around {x} covers the whole graph"
        )));
    }
    if ell == 0 {
        return Ok(T::one());
    }
    // Transient set: the punctured ball B(x, ell) \ {x}. Absorbing: x and the
    // exterior. q solves the reach-exterior-first system.
    let transient: Vec<VertexId> = (0..n as VertexId)
        .filter(|&v| v != x && (dist[v as usize] as usize) <= ell)
        .collect();
    let mut transient_idx = vec![u32::MAX; n];
    for (k, &v) in transient.iter().enumerate() {
        transient_idx[v as usize] = k as u32;
    }
    let m = transient.len();
    let mut rhs = vec![T::zero(); m];
    for (k, &z) in transient.iter().enumerate() {
        let step = T::one() / T::from_f64_lossy(g.degree(z) as f64);
        for &y in g.neighbors(z) {
            if (dist[y as usize] as usize) > ell {
                rhs[k] += step;
            }
        }
    }
    let q = match interior_system(g, &transient, &transient_idx)? {
        Some(lu) => lu.solve(&rhs),
        None => Vec::new(),
    };
    let step = T::one() / T::from_f64_lossy(g.degree(x) as f64);
    let mut v = T::zero();
    for &y in g.neighbors(x) {
        let idx = transient_idx[y as usize];
        if idx != u32::MAX {
            v += step * q[idx as usize];
        } else if (dist[y as usize] as usize) > ell {
            v += step;
        }
    }
    Ok(v)
}

/// Both exact routes to the capacity between disjoint sets.
#[derive(Clone, Copy, Debug)]
pub struct CapacityPair<T> {
    /// Dirichlet form of the harmonic potential.
    pub dirichlet: T,
    /// Boundary flux sum over the source set.
    pub boundary_sum: T,
}

/// Capacity between disjoint vertex sets, computed both as the Dirichlet form
/// of the potential `g(z) = P_z[H_A <= H_B]` and as the boundary sum
/// `sum_{y in A} nu(y) W_y^{-1} P_y[H_B < H_A^+]`; the two must agree.
pub fn capacity<T: Real>(
    env: &Environment<T>,
    a: &[VertexId],
    b: &[VertexId],
) -> Result<CapacityPair<T>> {
    let g = env.graph();
    check_dense_size(g)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::Validation("capacity needs nonempty sets".into()));
    }
    if a.iter().any(|x| b.contains(x)) {
        return Err(Error::Validation("capacity sets must be disjoint".into()));
    }
    let n = g.n_vertices();
    // potential: 1 on a, 0 on b, harmonic elsewhere
    let mut kind = vec![0u8; n]; // 0 interior, 1 source, 2 sink
    for &x in a {
        kind[x as usize] = 1;
    }
    for &x in b {
        kind[x as usize] = 2;
    }
    let transient: Vec<VertexId> = g.vertices().filter(|&v| kind[v as usize] == 0).collect();
    let mut transient_idx = vec![u32::MAX; n];
    for (k, &v) in transient.iter().enumerate() {
        transient_idx[v as usize] = k as u32;
    }
    let mut rhs = vec![T::zero(); transient.len()];
    for (k, &z) in transient.iter().enumerate() {
        let step = T::one() / T::from_f64_lossy(g.degree(z) as f64);
        for &y in g.neighbors(z) {
            if kind[y as usize] == 1 {
                rhs[k] += step;
            }
        }
    }
    let sol = match interior_system(g, &transient, &transient_idx)? {
        Some(lu) => lu.solve(&rhs),
        None => Vec::new(),
    };
    let potential = |v: VertexId| -> T {
        match kind[v as usize] {
            1 => T::one(),
            2 => T::zero(),
            _ => sol[transient_idx[v as usize] as usize],
        }
    };
    // The edge conductance nu(x) / (deg(x) W_x) is the constant 1/Z.
    let z_norm: T = g
        .vertices()
        .map(|x| T::from_f64_lossy(g.degree(x) as f64) * env.depth(x))
        .sum();
    let dirichlet: T = g
        .edges()
        .map(|(u, v)| {
            let d = potential(u) - potential(v);
            d * d
        })
        .sum::<T>()
        / z_norm;
    let boundary_sum: T = a
        .iter()
        .map(|&y| {
            let esc: T = g.neighbors(y).iter().map(|&z| T::one() - potential(z)).sum();
            esc / z_norm
        })
        .sum();
    Ok(CapacityPair { dirichlet, boundary_sum })
}

/// Verifies the deep-trap separation condition `d(a_i, a_j) > 2*ell + 1`,
/// naming the first offending pair.
pub fn check_separation(g: &Graph, a: &[VertexId], ell: usize) -> Result<()> {
    for (i, &x) in a.iter().enumerate() {
        let dist = g.distances_from(x);
        for &y in &a[i + 1..] {
            let d = dist[y as usize] as usize;
            if d <= 2 * ell + 1 {
                return Err(Error::Precondition(format!(
                    "traps {x} and {y} are at distance {d} <= 2*{ell}+1"
                )));
            }
        }
    }
    Ok(())
}

/// Stationary state of the return chain on the trap set: the law of the trap
/// occupied at successive returns to `a` after escaping to distance `ell`.
/// Mass is proportional to `deg(x) * v_ell(x)`; the equivalent form through
/// the walk's stationary law (`nu(x) v(x) / W_x`) is computed as a
/// cross-check.
pub fn trace_stationary<T: Real>(
    env: &Environment<T>,
    a: &[VertexId],
    ell: usize,
) -> Result<Distribution<T>> {
    let g = env.graph();
    check_separation(g, a, ell)?;
    let v: Vec<T> = a
        .iter()
        .map(|&x| escape_probability(g, x, ell))
        .collect::<Result<_>>()?;
    let by_degree: Vec<T> = a
        .iter()
        .zip(&v)
        .map(|(&x, &vx)| T::from_f64_lossy(g.degree(x) as f64) * vx)
        .collect();
    let nu = stationary_nu(env);
    let by_nu: Vec<T> = a
        .iter()
        .zip(&v)
        .map(|(&x, &vx)| nu.mass_of(x) * vx / env.depth(x))
        .collect();
    let rho = Distribution::from_weights(a.to_vec(), by_degree)?;
    let rho_nu = Distribution::from_weights(a.to_vec(), by_nu)?;
    let drift = rho.tv(&rho_nu).to_f64_lossy();
    if drift > 1e-12 {
        return Err(Error::Validation(format!(
            "the two stationary-state forms disagree by {drift}"
        )));
    }
    Ok(rho)
}

/// Expected integral of `g_fn` along the walk from trap `x` until the first
/// return to the trap set after escaping to distance `ell`.
///
/// Phase one accumulates occupation inside the ball around `x` until first
/// exit and records the exit distribution; phase two accumulates occupation
/// from the exit points until the next visit to `a`.
pub fn expected_occupation<T: Real>(
    env: &Environment<T>,
    x: VertexId,
    a: &[VertexId],
    ell: usize,
    g_fn: &[T],
) -> Result<T> {
    let g = env.graph();
    check_dense_size(g)?;
    check_separation(g, a, ell)?;
    if !a.contains(&x) {
        return Err(Error::Validation(format!("start {x} is not in the trap set")));
    }
    if g_fn.len() != g.n_vertices() {
        return Err(Error::Validation("function must be defined on every vertex".into()));
    }
    let n = g.n_vertices();
    let dist = g.distances_from(x);
    if dist.iter().all(|&d| (d as usize) <= ell) {
        return Err(Error::Domain("ball covers the whole graph".into()));
    }

    // Phase 1: inside the closed ball around x until first exit. Separation
    // keeps every other trap out of reach before the exit.
    let ball: Vec<VertexId> =
        (0..n as VertexId).filter(|&v| (dist[v as usize] as usize) <= ell).collect();
    let mut ball_idx = vec![u32::MAX; n];
    for (k, &v) in ball.iter().enumerate() {
        ball_idx[v as usize] = k as u32;
    }
    let lu1 = interior_system(g, &ball, &ball_idx)?.expect("ball is nonempty");
    let load: Vec<T> = ball.iter().map(|&z| env.depth(z) * g_fn[z as usize]).collect();
    let occupation1 = lu1.solve(&load);
    let k_x = ball_idx[x as usize] as usize;

    // Exit distribution: weight each ball vertex by its expected visit count
    // from x, then push one step outside.
    let mut start = vec![T::zero(); ball.len()];
    start[k_x] = T::one();
    let visits = lu1.solve_transpose(&start);
    let mut exit_weight = vec![T::zero(); n];
    for (k, &z) in ball.iter().enumerate() {
        if visits[k] == T::zero() {
            continue;
        }
        let step = visits[k] / T::from_f64_lossy(g.degree(z) as f64);
        for &y in g.neighbors(z) {
            if (dist[y as usize] as usize) > ell {
                exit_weight[y as usize] += step;
            }
        }
    }

    // Phase 2: from the exit points until the walk enters the trap set.
    let in_a = {
        let mut mask = vec![false; n];
        for &t in a {
            mask[t as usize] = true;
        }
        mask
    };
    let transient: Vec<VertexId> = g.vertices().filter(|&v| !in_a[v as usize]).collect();
    let mut transient_idx = vec![u32::MAX; n];
    for (k, &v) in transient.iter().enumerate() {
        transient_idx[v as usize] = k as u32;
    }
    let lu2 = interior_system(g, &transient, &transient_idx)?;
    let occupation2 = match &lu2 {
        Some(lu) => {
            let load: Vec<T> =
                transient.iter().map(|&z| env.depth(z) * g_fn[z as usize]).collect();
            lu.solve(&load)
        }
        None => Vec::new(),
    };

    let mut total = occupation1[k_x];
    for (v, &w) in exit_weight.iter().enumerate() {
        if w == T::zero() {
            continue;
        }
        let idx = transient_idx[v];
        debug_assert_ne!(idx, u32::MAX, "exit points are outside the trap set");
        total += w * occupation2[idx as usize];
    }
    Ok(total)
}

/// Both sides of the stationary occupation identity: the escape-weighted sum
/// of expected cycle integrals against the plain stationary average of `g_fn`.
pub fn occupation_identity<T: Real>(
    env: &Environment<T>,
    a: &[VertexId],
    ell: usize,
    g_fn: &[T],
) -> Result<(T, T)> {
    let g = env.graph();
    let nu = stationary_nu(env);
    let mut lhs = T::zero();
    for &x in a {
        let v = escape_probability::<T>(g, x, ell)?;
        let e = expected_occupation(env, x, a, ell, g_fn)?;
        lhs += v * nu.mass_of(x) / env.depth(x) * e;
    }
    let rhs: T = g.vertices().map(|z| g_fn[z as usize] * nu.mass_of(z)).sum();
    Ok((lhs, rhs))
}

/// Mean time between returns to the trap set under the stationary return law:
/// `E_rho[W_x / v(x)] / nu(A)`.
pub fn mean_cycle_length<T: Real>(env: &Environment<T>, a: &[VertexId], ell: usize) -> Result<T> {
    let g = env.graph();
    let rho = trace_stationary(env, a, ell)?;
    let nu = stationary_nu(env);
    let mut time_at_traps = T::zero();
    let mut nu_a = T::zero();
    for &x in a {
        let v = escape_probability::<T>(g, x, ell)?;
        time_at_traps += rho.mass_of(x) * env.depth(x) / v;
        nu_a += nu.mass_of(x);
    }
    Ok(time_at_traps / nu_a)
}

// ---------------------------------------------------------------------------
// Lazy-chain quantities: mixing time and finite-horizon hitting bounds
// ---------------------------------------------------------------------------

/// Dense transition matrix of the lazy embedded chain: stay with probability
/// 1/2, otherwise step to a uniform neighbor.
fn lazy_matrix<T: Real>(g: &Graph) -> Mat<T> {
    let n = g.n_vertices();
    let mut p = Mat::zeros(n, n);
    let half = T::from_f64_lossy(0.5);
    for x in 0..n {
        p[(x, x)] = half;
        let step = half / T::from_f64_lossy(g.degree(x as VertexId) as f64);
        for &y in g.neighbors(x as VertexId) {
            p[(x, y as usize)] += step;
        }
    }
    p
}

fn worst_tv_from_stationary<T: Real>(p: &Mat<T>, pi: &[T]) -> T {
    let half = T::from_f64_lossy(0.5);
    (0..p.rows())
        .map(|x| p.row(x).iter().zip(pi).map(|(&a, &b)| (a - b).abs()).sum::<T>() * half)
        .fold(T::zero(), T::max)
}

/// Mixing time of the lazy chain: the least number of steps after which the
/// worst-case total-variation distance to stationarity is at most 1/4.
/// Computed by squaring the transition matrix to bracket the threshold, then
/// refining with the stored powers.
pub fn mixing_time<T: Real>(g: &Graph) -> Result<usize> {
    check_dense_size(g)?;
    let pi_dist = stationary_pi::<T>(g);
    let pi = pi_dist.mass();
    let quarter = T::from_f64_lossy(0.25);
    let p = lazy_matrix::<T>(g);
    if worst_tv_from_stationary(&p, pi) <= quarter {
        return Ok(1);
    }
    // squares[k] holds P^(2^k); grow until the distance drops through 1/4.
    let mut squares = vec![p];
    loop {
        let next = {
            let last = squares.last().unwrap();
            last.matmul(last)
        };
        let done = worst_tv_from_stationary(&next, pi) <= quarter;
        squares.push(next);
        if done {
            break;
        }
        if squares.len() > 40 {
            return Err(Error::Budget("mixing time exceeds 2^40 steps".into()));
        }
    }
    // Largest n with distance above 1/4, assembled bit by bit.
    let top = squares.len() - 2; // squares[top] is still above 1/4
    let mut n = 1usize << top;
    let mut cur = squares[top].clone();
    for j in (0..top).rev() {
        let cand = cur.matmul(&squares[j]);
        if worst_tv_from_stationary(&cand, pi) > quarter {
            n += 1 << j;
            cur = cand;
        }
    }
    Ok(n + 1)
}

/// `P_z[H_A <= steps]` for the lazy chain, for every start `z` at once.
pub fn hitting_probability_within<T: Real>(
    g: &Graph,
    a: &[VertexId],
    steps: usize,
) -> Result<Vec<T>> {
    if steps > 100_000 {
        return Err(Error::Budget(format!("{steps} steps exceed the 1e5 iteration cap")));
    }
    let n = g.n_vertices();
    let mut in_a = vec![false; n];
    for &x in a {
        in_a[x as usize] = true;
    }
    let half = T::from_f64_lossy(0.5);
    let mut u: Vec<T> = in_a.iter().map(|&b| if b { T::one() } else { T::zero() }).collect();
    let mut next = vec![T::zero(); n];
    for _ in 0..steps {
        for z in 0..n {
            next[z] = if in_a[z] {
                T::one()
            } else {
                let step = half / T::from_f64_lossy(g.degree(z as VertexId) as f64);
                let nbr: T = g.neighbors(z as VertexId).iter().map(|&y| u[y as usize]).sum();
                half * u[z] + step * nbr
            };
        }
        std::mem::swap(&mut u, &mut next);
    }
    Ok(u)
}

/// An exactly evaluated inequality: the check passes when `lhs <= rhs`.
#[derive(Clone, Copy, Debug)]
pub struct Certificate<T> {
    pub lhs: T,
    pub rhs: T,
}

impl<T: Real> Certificate<T> {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

/// Certificate that the hitting distribution from `z` is close to the
/// equilibrium hitting distribution once the chain has had `l_factor` mixing
/// times to equilibrate: the l1 distance is bounded by
/// `2 (2^-L + P_z[H_A < L t_mix])`.
pub fn hitting_equilibration_certificate<T: Real>(
    g: &Graph,
    solve: &HittingSolve<T>,
    z: VertexId,
    l_factor: usize,
    t_mix: usize,
) -> Result<Certificate<T>> {
    if solve.targets().contains(&z) {
        return Err(Error::Validation(format!("start {z} lies in the target set")));
    }
    let from_z = solve.hit_distribution(z);
    let eq = solve.equilibrium();
    let lhs: T = from_z
        .mass()
        .iter()
        .zip(eq.mass())
        .map(|(&a, &b)| (a - b).abs())
        .sum();
    let steps = (l_factor * t_mix).saturating_sub(1);
    let u = hitting_probability_within::<T>(g, solve.targets(), steps)?;
    let two = T::from_f64_lossy(2.0);
    let rhs = two * (T::from_f64_lossy(0.5).powi(l_factor as i32) + u[z as usize]);
    Ok(Certificate { lhs, rhs })
}

/// Certificate for starts inside the trap set: conditioning on escape, the
/// next-trap law is `v_ell(x_i) p(., A)` up to the worst-case equilibration
/// error over the exterior of the trap balls.
pub fn trap_return_certificate<T: Real>(
    g: &Graph,
    solve: &HittingSolve<T>,
    ell: usize,
    i: usize,
    l_factor: usize,
    t_mix: usize,
) -> Result<Certificate<T>> {
    let a = solve.targets();
    check_separation(g, a, ell)?;
    let x_i = a[i];
    let v = escape_probability::<T>(g, x_i, ell)?;

    // Sub-probability exit measure: mass escaping the ball around x_i before
    // returning to x_i, by exit vertex.
    let n = g.n_vertices();
    let dist = g.distances_from(x_i);
    let transient: Vec<VertexId> = (0..n as VertexId)
        .filter(|&z| z != x_i && (dist[z as usize] as usize) <= ell)
        .collect();
    let mut transient_idx = vec![u32::MAX; n];
    for (k, &z) in transient.iter().enumerate() {
        transient_idx[z as usize] = k as u32;
    }
    let lu = interior_system(g, &transient, &transient_idx)?;
    let step_x = T::one() / T::from_f64_lossy(g.degree(x_i) as f64);
    let visits = match &lu {
        Some(lu) => {
            let mut start = vec![T::zero(); transient.len()];
            for &y in g.neighbors(x_i) {
                let idx = transient_idx[y as usize];
                if idx != u32::MAX {
                    start[idx as usize] += step_x;
                }
            }
            lu.solve_transpose(&start)
        }
        None => Vec::new(),
    };
    let mut exit = vec![T::zero(); n];
    for &y in g.neighbors(x_i) {
        if (dist[y as usize] as usize) > ell {
            exit[y as usize] += step_x;
        }
    }
    for (k, &z) in transient.iter().enumerate() {
        if visits.get(k).copied().unwrap_or_else(T::zero) == T::zero() {
            continue;
        }
        let step = visits[k] / T::from_f64_lossy(g.degree(z) as f64);
        for &y in g.neighbors(z) {
            if (dist[y as usize] as usize) > ell {
                exit[y as usize] += step;
            }
        }
    }

    // Law of the next trap reached after escaping.
    let eq = solve.equilibrium();
    let mut next_trap = vec![T::zero(); a.len()];
    for (r, &w) in exit.iter().enumerate() {
        if w == T::zero() {
            continue;
        }
        let hd = solve.hit_distribution(r as VertexId);
        for (j, m) in hd.mass().iter().enumerate() {
            next_trap[j] += w * *m;
        }
    }
    let lhs: T = (0..a.len())
        .filter(|&j| j != i)
        .map(|j| (next_trap[j] - v * eq.mass()[j]).abs())
        .sum();

    // Worst-case equilibration error over the exterior of the trap balls.
    let steps = (l_factor * t_mix).saturating_sub(1);
    let u = hitting_probability_within::<T>(g, a, steps)?;
    let dist_a = g.distances_from_set(a);
    let worst = (0..n)
        .filter(|&z| (dist_a[z] as usize) > ell)
        .map(|z| u[z])
        .fold(T::zero(), T::max);
    let two = T::from_f64_lossy(2.0);
    let rhs = two * v * (T::from_f64_lossy(0.5).powi(l_factor as i32) + worst);
    Ok(Certificate { lhs, rhs })
}

/// Certificate that the equilibrium hitting distribution is approximated by
/// the degree-and-escape profile `deg(x) v_ell(x) / Gamma`, with the same
/// worst-case equilibration bound on the right.
pub fn equilibrium_profile_certificate<T: Real>(
    g: &Graph,
    solve: &HittingSolve<T>,
    ell: usize,
    l_factor: usize,
    t_mix: usize,
) -> Result<Certificate<T>> {
    let a = solve.targets();
    check_separation(g, a, ell)?;
    let v: Vec<T> = a
        .iter()
        .map(|&x| escape_probability(g, x, ell))
        .collect::<Result<_>>()?;
    let gamma: T = a
        .iter()
        .zip(&v)
        .map(|(&x, &vx)| T::from_f64_lossy(g.degree(x) as f64) * vx)
        .sum();
    let eq = solve.equilibrium();
    let lhs = a
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let profile = T::from_f64_lossy(g.degree(x) as f64) * v[j] / gamma;
            (eq.mass()[j] - profile).abs()
        })
        .fold(T::zero(), T::max);
    let u = hitting_probability_within::<T>(g, a, l_factor * t_mix)?;
    let n = g.n_vertices();
    let dist_a = g.distances_from_set(a);
    let worst = (0..n)
        .filter(|&z| (dist_a[z] as usize) > ell)
        .map(|z| u[z])
        .fold(T::zero(), T::max);
    let two = T::from_f64_lossy(2.0);
    let rhs = two * (T::from_f64_lossy(0.5).powi(l_factor as i32) + worst);
    Ok(Certificate { lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::assign_weights;
    use crate::graph::{hypercube, regular_tree, torus, Graph, GraphKind};
    use crate::RandomSource;

    fn path_graph(n: usize) -> Graph {
        let edges: Vec<(VertexId, VertexId)> =
            (0..n - 1).map(|i| (i as VertexId, i as VertexId + 1)).collect();
        Graph::from_edges(GraphKind::Custom, n, &edges).unwrap()
    }

    fn unit_env(g: Graph) -> Environment<f64> {
        let n = g.n_vertices();
        let mut rng = RandomSource::new(0).rng();
        assign_weights(g, &vec![1.0; n], &mut rng).unwrap()
    }

    #[test]
    fn nu_on_path_with_unit_weights() {
        let env = unit_env(path_graph(3));
        let nu = stationary_nu(&env);
        assert!((nu.mass_of(0) - 0.25).abs() < 1e-15);
        assert!((nu.mass_of(1) - 0.5).abs() < 1e-15);
        assert!((nu.mass_of(2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn nu_uniform_on_cycle_with_equal_weights() {
        let env = unit_env(torus(3, 1).unwrap());
        let nu = stationary_nu(&env);
        for x in 0..3 {
            assert!((nu.mass_of(x) - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn nu_detailed_balance() {
        // nu(x) rate(x->y) = nu(y) rate(y->x) for every edge.
        let g = torus(4, 2).unwrap();
        let mut rng = RandomSource::new(9).rng();
        let w: Vec<f64> = crate::env::sample_pareto_weights(16, 0.5, &mut rng).unwrap();
        let env = assign_weights(g, &w, &mut rng).unwrap();
        let nu = stationary_nu(&env);
        for (u, v) in env.graph().edges() {
            let lhs = nu.mass_of(u) / (env.graph().degree(u) as f64 * env.depth(u));
            let rhs = nu.mass_of(v) / (env.graph().degree(v) as f64 * env.depth(v));
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs());
        }
    }

    #[test]
    fn pi_on_star() {
        let g = Graph::from_edges(GraphKind::Custom, 4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let pi = stationary_pi::<f64>(&g);
        assert!((pi.mass_of(0) - 0.5).abs() < 1e-15);
        for leaf in 1..4 {
            assert!((pi.mass_of(leaf) - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn pi_uniform_on_regular_graph() {
        let g = hypercube(3).unwrap();
        let pi = stationary_pi::<f64>(&g);
        for x in 0..8 {
            assert!((pi.mass_of(x) - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn hit_from_target_is_point_mass() {
        let g = path_graph(3);
        let d = hit_distribution::<f64>(&g, 0, &[0, 2]).unwrap();
        assert_eq!(d.mass_of(0), 1.0);
    }

    #[test]
    fn hit_middle_of_path_is_half_half() {
        let g = path_graph(3);
        let d = hit_distribution::<f64>(&g, 1, &[0, 2]).unwrap();
        assert!((d.mass_of(0) - 0.5).abs() < 1e-14);
        assert!((d.mass_of(2) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn hit_columns_are_harmonic() {
        let g = torus(7, 2).unwrap();
        let a = [0u32, 24];
        let solve = HittingSolve::<f64>::new(&g, &a).unwrap();
        for z in g.vertices() {
            if a.contains(&z) {
                continue;
            }
            let hz = solve.hit_distribution(z);
            for (j, &target) in a.iter().enumerate() {
                let avg: f64 = g
                    .neighbors(z)
                    .iter()
                    .map(|&y| solve.hit_distribution(y).mass()[j])
                    .sum::<f64>()
                    / g.degree(z) as f64;
                assert!(
                    (avg - hz.mass()[j]).abs() < 1e-10,
                    "harmonicity violated at {z} target {target}"
                );
            }
        }
    }

    #[test]
    fn equilibrium_hit_point_mass_on_singleton() {
        let g = torus(5, 1).unwrap();
        let d = equilibrium_hit::<f64>(&g, &[2]).unwrap();
        assert_eq!(d.mass_of(2), 1.0);
    }

    #[test]
    fn equilibrium_hit_uniform_over_symmetric_pair() {
        // Two opposite vertices of an even cycle are exchangeable.
        let g = torus(8, 1).unwrap();
        let d = equilibrium_hit::<f64>(&g, &[0, 4]).unwrap();
        assert!((d.mass_of(0) - 0.5).abs() < 1e-13);
        assert!((d.mass_of(4) - 0.5).abs() < 1e-13);
    }

    #[test]
    fn escape_radius_zero_is_one() {
        let g = torus(6, 1).unwrap();
        assert_eq!(escape_probability::<f64>(&g, 0, 0).unwrap(), 1.0);
    }

    #[test]
    fn escape_on_six_cycle_radius_one() {
        // From a cycle vertex: the first step lands at distance 1; from there
        // the symmetric walk reaches distance 2 before the center w.p. 1/2.
        let g = torus(6, 1).unwrap();
        let v = escape_probability::<f64>(&g, 0, 1).unwrap();
        assert!((v - 0.5).abs() < 1e-14, "v = {v}");
    }

    #[test]
    fn escape_on_regular_tree_closed_form() {
        // On the 3-regular tree the distance walk moves up w.p. 2/3, so the
        // chance of reaching distance s before returning is (1/2)/(1-2^-s);
        // exiting the ball of radius ell means reaching distance s = ell + 1.
        let g = regular_tree(3, 8).unwrap();
        for s in [1usize, 3, 5] {
            let v = escape_probability::<f64>(&g, 0, s - 1).unwrap();
            let formula = 0.5 / (1.0 - 0.5f64.powi(s as i32));
            assert!((v - formula).abs() < 1e-12, "s={s}: {v} vs {formula}");
        }
        let v5 = escape_probability::<f64>(&g, 0, 5).unwrap();
        assert!((v5 - 0.5 / (1.0 - 0.5f64.powi(6))).abs() < 1e-12);
    }

    #[test]
    fn escape_ball_covering_graph_is_domain_error() {
        let g = torus(3, 1).unwrap();
        assert!(escape_probability::<f64>(&g, 0, 1).is_err());
    }

    #[test]
    fn escape_monotone_in_radius() {
        let g = torus(9, 2).unwrap();
        let mut prev = 1.0f64;
        for ell in 1..4 {
            let v = escape_probability::<f64>(&g, 0, ell).unwrap();
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn capacity_single_edge_closed_form() {
        let g = Graph::from_edges(GraphKind::Custom, 2, &[(0, 1)]).unwrap();
        let mut rng = RandomSource::new(1).rng();
        let env = assign_weights(g, &[3.0, 5.0], &mut rng).unwrap();
        let cap = capacity(&env, &[0], &[1]).unwrap();
        assert!((cap.dirichlet - 1.0 / 8.0).abs() < 1e-15);
        assert!((cap.boundary_sum - 1.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn capacity_is_symmetric() {
        let g = torus(5, 2).unwrap();
        let mut rng = RandomSource::new(2).rng();
        let w: Vec<f64> = crate::env::sample_pareto_weights(25, 0.5, &mut rng).unwrap();
        let env = assign_weights(g, &w, &mut rng).unwrap();
        let ab = capacity(&env, &[0, 7], &[12, 18]).unwrap();
        let ba = capacity(&env, &[12, 18], &[0, 7]).unwrap();
        assert!((ab.dirichlet - ba.dirichlet).abs() <= 1e-12 * ab.dirichlet);
        assert!((ab.dirichlet - ab.boundary_sum).abs() <= 1e-10 * ab.dirichlet);
    }

    #[test]
    fn trace_stationary_point_mass_for_single_trap() {
        let env = unit_env(torus(7, 1).unwrap());
        let rho = trace_stationary(&env, &[0], 1).unwrap();
        assert_eq!(rho.mass_of(0), 1.0);
    }

    #[test]
    fn trace_stationary_uniform_on_transitive_symmetric_set() {
        let env = unit_env(torus(12, 1).unwrap());
        let rho = trace_stationary(&env, &[0, 6], 2).unwrap();
        assert!((rho.mass_of(0) - 0.5).abs() < 1e-13);
    }

    #[test]
    fn separation_violation_names_the_pair() {
        let env = unit_env(torus(12, 1).unwrap());
        let err = trace_stationary(&env, &[0, 3], 1).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains('0') && msg.contains('3'), "{msg}");
    }

    #[test]
    fn occupation_indicator_of_trap_is_depth_over_escape() {
        // Expected time at the trap itself before escape-and-return is W/v.
        let g = torus(9, 1).unwrap();
        let mut rng = RandomSource::new(3).rng();
        let env =
            assign_weights(g, &[5.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0], &mut rng).unwrap();
        let trap = env.ranked_vertices()[0];
        let mut indicator = vec![0.0; 9];
        indicator[trap as usize] = 1.0;
        let e = expected_occupation(&env, trap, &[trap], 1, &indicator).unwrap();
        let v = escape_probability::<f64>(env.graph(), trap, 1).unwrap();
        assert!((e - 5.0 / v).abs() < 1e-10, "{e} vs {}", 5.0 / v);
    }

    #[test]
    fn cycle_length_matches_direct_computation() {
        let g = torus(8, 1).unwrap();
        let mut rng = RandomSource::new(4).rng();
        let w: Vec<f64> = crate::env::sample_pareto_weights(8, 0.5, &mut rng).unwrap();
        let env = assign_weights(g, &w, &mut rng).unwrap();
        let a = [0u32];
        let ones = vec![1.0; 8];
        let direct = expected_occupation(&env, 0, &a, 1, &ones).unwrap();
        let closed = mean_cycle_length(&env, &a, 1).unwrap();
        assert!((direct - closed).abs() <= 1e-10 * direct, "{direct} vs {closed}");
    }

    #[test]
    fn occupation_identity_on_small_torus() {
        let g = torus(9, 2).unwrap();
        let mut rng = RandomSource::new(5).rng();
        let w: Vec<f64> = crate::env::sample_pareto_weights(81, 0.5, &mut rng).unwrap();
        let env = assign_weights(g, &w, &mut rng).unwrap();
        let a = [0u32, 40];
        check_separation(env.graph(), &a, 1).unwrap();
        use rand::Rng;
        let g_fn: Vec<f64> = (0..81).map(|_| rng.random::<f64>()).collect();
        let (lhs, rhs) = occupation_identity(&env, &a, 1, &g_fn).unwrap();
        assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs(), "{lhs} vs {rhs}");
    }

    #[test]
    fn mixing_time_two_vertex_graph() {
        // The lazy chain on one edge reaches uniform in a single step.
        let g = Graph::from_edges(GraphKind::Custom, 2, &[(0, 1)]).unwrap();
        assert_eq!(mixing_time::<f64>(&g).unwrap(), 1);
    }

    #[test]
    fn mixing_time_complete_graphs() {
        // K4 sits exactly at the 1/4 threshold after one step; larger complete
        // graphs need two.
        let k = |m: usize| {
            let edges: Vec<(VertexId, VertexId)> = (0..m as VertexId)
                .flat_map(|i| ((i + 1)..m as VertexId).map(move |j| (i, j)))
                .collect();
            Graph::from_edges(GraphKind::Custom, m, &edges).unwrap()
        };
        let t4 = mixing_time::<f64>(&k(4)).unwrap();
        let t8 = mixing_time::<f64>(&k(8)).unwrap();
        let t16 = mixing_time::<f64>(&k(16)).unwrap();
        assert!(t4 <= 2 && t8 == 2 && t16 == 2, "{t4} {t8} {t16}");
    }

    #[test]
    fn tv_decay_is_monotone() {
        let g = torus(5, 1).unwrap();
        let pi = stationary_pi::<f64>(&g);
        let p = lazy_matrix::<f64>(&g);
        let mut cur = p.clone();
        let mut prev = worst_tv_from_stationary(&cur, pi.mass());
        for _ in 0..12 {
            cur = cur.matmul(&p);
            let d = worst_tv_from_stationary(&cur, pi.mass());
            assert!(d <= prev + 1e-14);
            prev = d;
        }
    }

    #[test]
    fn mixing_time_torus_scales_with_side_squared() {
        let ratios: Vec<f64> = [5usize, 9, 15]
            .iter()
            .map(|&n| {
                let g = torus(n, 2).unwrap();
                mixing_time::<f64>(&g).unwrap() as f64 / (n * n) as f64
            })
            .collect();
        for r in &ratios {
            assert!(*r > 0.02 && *r < 3.0, "ratios {ratios:?}");
        }
        let spread = ratios.iter().cloned().fold(f64::MIN, f64::max)
            / ratios.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 4.0, "ratios {ratios:?}");
    }

    #[test]
    fn hitting_probability_monotone_in_steps() {
        let g = torus(6, 2).unwrap();
        let a = [0u32];
        let u5 = hitting_probability_within::<f64>(&g, &a, 5).unwrap();
        let u20 = hitting_probability_within::<f64>(&g, &a, 20).unwrap();
        for z in 0..36 {
            assert!(u20[z] >= u5[z] - 1e-15);
        }
        assert_eq!(u5[0], 1.0);
    }

    #[test]
    fn equilibration_certificate_holds_and_tightens() {
        let g = torus(9, 2).unwrap();
        let a = [0u32, 40];
        let solve = HittingSolve::<f64>::new(&g, &a).unwrap();
        let t_mix = mixing_time::<f64>(&g).unwrap();
        let far = 4 + 4 * 9;
        for l in [2usize, 4, 8] {
            let c = hitting_equilibration_certificate(&g, &solve, far, l, t_mix).unwrap();
            assert!(c.holds(), "L={l}: lhs {} rhs {}", c.lhs, c.rhs);
        }
    }

    #[test]
    fn trap_return_certificate_holds() {
        let g = torus(11, 2).unwrap();
        let a = [0u32, 60];
        let solve = HittingSolve::<f64>::new(&g, &a).unwrap();
        let t_mix = mixing_time::<f64>(&g).unwrap();
        for i in 0..2 {
            let c = trap_return_certificate(&g, &solve, 2, i, 6, t_mix).unwrap();
            assert!(c.holds(), "i={i}: lhs {} rhs {}", c.lhs, c.rhs);
        }
    }

    #[test]
    fn equilibrium_profile_certificate_holds() {
        let g = torus(11, 2).unwrap();
        let a = [0u32, 60];
        let solve = HittingSolve::<f64>::new(&g, &a).unwrap();
        let t_mix = mixing_time::<f64>(&g).unwrap();
        let c = equilibrium_profile_certificate(&g, &solve, 2, 8, t_mix).unwrap();
        assert!(c.holds(), "lhs {} rhs {}", c.lhs, c.rhs);
    }
}
