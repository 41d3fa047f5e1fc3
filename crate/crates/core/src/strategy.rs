//! Quantum strategies for the coloring game.
//!
//! The shared state is two Bell pairs, `|Ψ⟩ = (1/2) Σ_j |j⟩_A |j⟩_B`. Alice
//! measures in the basis `U(x)`, Bob in the entrywise conjugate basis
//! `conj(U(y))`, which makes the joint amplitude `(1/2)(U(x) U(y)†)_{ab}`.
//! The perfect strategy sets `U(v) = M_q^T` for an orthogonal representation
//! `v ↦ q_v` of the graph, where `M_q` is the quaternion matrix of `q_v`:
//! the diagonal of `U(u) U(v)†` then collapses to `⟨q_u, q_v⟩·(1,1,1,1)`, so
//! orthogonal representations win every edge question exactly.

use std::collections::BTreeMap;

use nalgebra::Vector4;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::behavior::BehaviorTable;
use crate::error::{Error, Result};
use crate::game::{ColoringGame, QuestionKind};
use crate::graph::Graph;
use crate::linalg::{complexify, unitarity_defect, CM4, RM4};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// A unit vector in R^4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec4(Vector4<f64>);

impl UnitVec4 {
    pub const NORM_TOL: f64 = 1e-12;

    /// Wraps a vector that is already unit-norm within [`Self::NORM_TOL`].
    pub fn new(v: Vector4<f64>) -> Result<Self> {
        if (v.norm() - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::domain(format!(
                "vector norm {} is not 1 within {}",
                v.norm(),
                Self::NORM_TOL
            )));
        }
        Ok(UnitVec4(v))
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalized(v: Vector4<f64>) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::domain("cannot normalize zero or non-finite vector"));
        }
        Ok(UnitVec4(v / n))
    }

    pub fn components(&self) -> [f64; 4] {
        [self.0[0], self.0[1], self.0[2], self.0[3]]
    }

    pub fn vector(&self) -> &Vector4<f64> {
        &self.0
    }

    pub fn dot(&self, other: &UnitVec4) -> f64 {
        self.0.dot(&other.0)
    }
}

/// The quaternion matrix of a unit vector, an element of SO(4).
///
/// Key property: `diag(M_q^T M_p) = ⟨q, p⟩ · (1,1,1,1)`, so orthogonal
/// vectors give a vanishing diagonal.
pub fn quaternion_matrix(q: &UnitVec4) -> RM4 {
    let [q0, q1, q2, q3] = q.components();
    RM4::new(
        q0, -q1, -q2, -q3, //
        q1, q0, q3, -q2, //
        q2, -q3, q0, q1, //
        q3, q2, -q1, q0,
    )
}

/// An assignment of unit vectors to vertices with its orthogonality residual.
#[derive(Debug, Clone)]
pub struct OrthogonalRep {
    pub vectors: Vec<UnitVec4>,
    /// `max_{uv ∈ E} |⟨q_u, q_v⟩|`, reported honestly from the search.
    pub residual: f64,
}

impl OrthogonalRep {
    pub const VALID_RESIDUAL: f64 = 1e-8;

    pub fn new(vectors: Vec<UnitVec4>, graph: &Graph) -> Result<Self> {
        if vectors.len() != graph.n {
            return Err(Error::domain("one vector per vertex required"));
        }
        let residual = rep_residual(&vectors, graph);
        Ok(OrthogonalRep { vectors, residual })
    }

    pub fn is_valid(&self) -> bool {
        self.residual < Self::VALID_RESIDUAL
    }

    /// JSON object keyed by vertex index: `{"0": [q0,q1,q2,q3], ...}`.
    pub fn to_json(&self) -> String {
        let map: BTreeMap<String, [f64; 4]> = self
            .vectors
            .iter()
            .enumerate()
            .map(|(v, q)| (v.to_string(), q.components()))
            .collect();
        serde_json::to_string_pretty(&map).expect("representation serializes")
    }

    pub fn from_json(s: &str, graph: &Graph) -> Result<Self> {
        let map: BTreeMap<String, [f64; 4]> = serde_json::from_str(s)?;
        let mut vectors = Vec::with_capacity(graph.n);
        for v in 0..graph.n {
            let q = map
                .get(&v.to_string())
                .ok_or_else(|| Error::data(format!("representation missing vertex {v}")))?;
            vectors.push(UnitVec4::new(Vector4::new(q[0], q[1], q[2], q[3]))?);
        }
        OrthogonalRep::new(vectors, graph)
    }
}

fn rep_residual(vectors: &[UnitVec4], graph: &Graph) -> f64 {
    graph
        .edges
        .iter()
        .map(|&(u, v)| vectors[u].dot(&vectors[v]).abs())
        .fold(0.0, f64::max)
}

/// Settings for the orthogonal-representation search.
#[derive(Debug, Clone)]
pub struct RepSearchConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop when the Riemannian gradient norm drops below this.
    pub grad_tol: f64,
}

impl Default for RepSearchConfig {
    fn default() -> Self {
        RepSearchConfig {
            restarts: 32,
            max_iters: 50_000,
            grad_tol: 1e-10,
        }
    }
}

/// Multi-restart projected gradient descent for an orthogonal representation.
///
/// Minimizes `Σ_{uv ∈ E} ⟨q_u, q_v⟩²` over the product of unit spheres with
/// backtracking line search, renormalizing after every step. Returns the best
/// representation found; the caller inspects `residual` (failure to reach
/// 1e-8 is reported, not raised).
pub fn find_orthogonal_representation(
    graph: &Graph,
    seed: u64,
    config: &RepSearchConfig,
) -> OrthogonalRep {
    let run = |restart: usize| -> (f64, Vec<UnitVec4>) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ (restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut vecs: Vec<Vector4<f64>> = (0..graph.n)
            .map(|_| {
                let mut v = Vector4::from_fn(|_, _| rng.gen::<f64>() * 2.0 - 1.0);
                while v.norm() < 1e-6 {
                    v = Vector4::from_fn(|_, _| rng.gen::<f64>() * 2.0 - 1.0);
                }
                v.normalize()
            })
            .collect();
        descend(graph, &mut vecs, config);
        let unit: Vec<UnitVec4> = vecs.into_iter().map(|v| UnitVec4(v.normalize())).collect();
        let obj = objective(graph, &unit);
        (obj, unit)
    };

    #[cfg(feature = "parallel")]
    let best = (0..config.restarts)
        .into_par_iter()
        .map(run)
        .min_by(|a, b| a.0.total_cmp(&b.0));
    #[cfg(not(feature = "parallel"))]
    let best = (0..config.restarts).map(run).min_by(|a, b| a.0.total_cmp(&b.0));

    let (_, vectors) = best.expect("at least one restart");
    let residual = rep_residual(&vectors, graph);
    OrthogonalRep { vectors, residual }
}

fn objective(graph: &Graph, vecs: &[UnitVec4]) -> f64 {
    graph
        .edges
        .iter()
        .map(|&(u, v)| {
            let d = vecs[u].dot(&vecs[v]);
            d * d
        })
        .sum()
}

fn descend(graph: &Graph, vecs: &mut [Vector4<f64>], config: &RepSearchConfig) {
    let nbrs = graph.neighbors();
    let obj = |vs: &[Vector4<f64>]| -> f64 {
        graph
            .edges
            .iter()
            .map(|&(u, v)| {
                let d = vs[u].dot(&vs[v]);
                d * d
            })
            .sum()
    };
    let mut f = obj(vecs);
    let mut step = 0.1;
    for _ in 0..config.max_iters {
        // Riemannian gradient: euclidean gradient projected to each sphere's
        // tangent space
        let mut grad: Vec<Vector4<f64>> = Vec::with_capacity(vecs.len());
        let mut gnorm2 = 0.0;
        for u in 0..vecs.len() {
            let mut g = Vector4::zeros();
            for &v in &nbrs[u] {
                g += vecs[v] * (2.0 * vecs[u].dot(&vecs[v]));
            }
            let g_tan = g - vecs[u] * vecs[u].dot(&g);
            gnorm2 += g_tan.norm_squared();
            grad.push(g_tan);
        }
        if gnorm2.sqrt() < config.grad_tol {
            break;
        }
        // backtracking line search with step growth on success
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<Vector4<f64>> = vecs
                .iter()
                .zip(grad.iter())
                .map(|(q, g)| (q - g * step).normalize())
                .collect();
            let ft = obj(&trial);
            if ft < f - 1e-4 * step * gnorm2 {
                vecs.copy_from_slice(&trial);
                f = ft;
                step *= 1.3;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break; // step underflow: stationary to machine precision
        }
    }
}

/// A quantum strategy: one 4x4 measurement unitary per vertex (Alice's side;
/// Bob's is the entrywise conjugate).
#[derive(Debug, Clone)]
pub struct Strategy {
    pub unitaries: Vec<CM4>,
}

impl Strategy {
    pub const UNITARITY_TOL: f64 = 1e-10;

    pub fn new(unitaries: Vec<CM4>) -> Result<Self> {
        for (v, u) in unitaries.iter().enumerate() {
            let defect = unitarity_defect(u);
            if defect > Self::UNITARITY_TOL {
                return Err(Error::domain(format!(
                    "matrix for vertex {v} is not unitary (defect {defect:.2e})"
                )));
            }
        }
        Ok(Strategy { unitaries })
    }

    pub fn vertex_count(&self) -> usize {
        self.unitaries.len()
    }

    /// JSON export: list of 4x4 matrices, each a row-major list of
    /// `[re, im]` pairs.
    pub fn to_json(&self) -> String {
        let data: Vec<Vec<[f64; 2]>> = self
            .unitaries
            .iter()
            .map(|u| {
                let mut rows = Vec::with_capacity(16);
                for r in 0..4 {
                    for c in 0..4 {
                        rows.push([u[(r, c)].re, u[(r, c)].im]);
                    }
                }
                rows
            })
            .collect();
        serde_json::to_string_pretty(&data).expect("strategy serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let data: Vec<Vec<[f64; 2]>> = serde_json::from_str(s)?;
        let mut unitaries = Vec::with_capacity(data.len());
        for m in &data {
            if m.len() != 16 {
                return Err(Error::data("each matrix needs 16 row-major entries"));
            }
            let u = CM4::from_fn(|r, c| {
                let [re, im] = m[r * 4 + c];
                num_complex::Complex::new(re, im)
            });
            unitaries.push(u);
        }
        Strategy::new(unitaries)
    }
}

/// Builds the perfect strategy `U(v) = M_{q_v}^T` from a valid representation.
pub fn build_perfect_strategy(rep: &OrthogonalRep) -> Result<Strategy> {
    if !rep.is_valid() {
        return Err(Error::domain(format!(
            "representation residual {:.2e} exceeds {:.0e}",
            rep.residual,
            OrthogonalRep::VALID_RESIDUAL
        )));
    }
    let unitaries = rep
        .vectors
        .iter()
        .map(|q| complexify(&quaternion_matrix(q).transpose()))
        .collect();
    Strategy::new(unitaries)
}

/// `max_a |(U(u) U(v)†)_{aa}|` for an edge `{u, v}`: the amount by which the
/// strategy can lose the edge question. Zero for a perfect strategy.
pub fn edge_residual(strategy: &Strategy, graph: &Graph, u: usize, v: usize) -> Result<f64> {
    if !graph.has_edge(u, v) {
        return Err(Error::domain(format!("({u},{v}) is not an edge")));
    }
    let prod = strategy.unitaries[u] * strategy.unitaries[v].adjoint();
    Ok((0..4).map(|a| prod[(a, a)].norm()).fold(0.0, f64::max))
}

/// Joint outcome probabilities `P(a,b|x,y) = |(1/2)(U(x)U(y)†)_{ab}|²` for
/// one question.
pub fn question_probabilities(strategy: &Strategy, x: usize, y: usize) -> [f64; 16] {
    let prod = strategy.unitaries[x] * strategy.unitaries[y].adjoint();
    let mut p = [0.0; 16];
    for a in 0..4 {
        for b in 0..4 {
            let amp = prod[(a, b)] * 0.5;
            p[a * 4 + b] = amp.norm_sqr();
        }
    }
    p
}

/// Exact quantum value of a strategy on a game.
pub fn quantum_value(strategy: &Strategy, game: &ColoringGame) -> Result<f64> {
    if strategy.vertex_count() != game.graph.n {
        return Err(Error::domain(
            "strategy and game disagree on the vertex count",
        ));
    }
    if game.colors != 4 {
        return Err(Error::domain("quantum strategies here use 4 colors (2 qubits per player)"));
    }
    let pi = 1.0 / game.question_count() as f64;
    let mut omega = 0.0;
    for q in &game.questions {
        let p = question_probabilities(strategy, q.x, q.y);
        let win: f64 = match q.kind {
            QuestionKind::Vertex => (0..4).map(|a| p[a * 4 + a]).sum(),
            QuestionKind::DirectedEdge => {
                let lose: f64 = (0..4).map(|a| p[a * 4 + a]).sum();
                let total: f64 = p.iter().sum();
                total - lose
            }
        };
        omega += pi * win;
    }
    Ok(omega)
}

/// Exact behavior table `P(a,b|x,y)` over the game's question support.
pub fn behavior_table(strategy: &Strategy, game: &ColoringGame) -> Result<BehaviorTable> {
    if strategy.vertex_count() != game.graph.n {
        return Err(Error::domain(
            "strategy and game disagree on the vertex count",
        ));
    }
    let support: Vec<(usize, usize)> = game.questions.iter().map(|q| (q.x, q.y)).collect();
    let freqs: Vec<Vec<f64>> = game
        .questions
        .iter()
        .map(|q| question_probabilities(strategy, q.x, q.y).to_vec())
        .collect();
    let shots = vec![None; support.len()];
    BehaviorTable::new(support, 4, 4, freqs, shots)
}

/// Exhaustive diagnostic: the largest edge residual over all edges.
pub fn max_edge_residual(strategy: &Strategy, graph: &Graph) -> Result<f64> {
    let mut worst = 0.0f64;
    for &(u, v) in &graph.edges {
        worst = worst.max(edge_residual(strategy, graph, u, v)?);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::build_game;
    use nalgebra::Vector4;

    fn unit(v: [f64; 4]) -> UnitVec4 {
        UnitVec4::normalized(Vector4::new(v[0], v[1], v[2], v[3])).unwrap()
    }

    #[test]
    fn quaternion_identity_case() {
        let q = unit([1.0, 0.0, 0.0, 0.0]);
        assert!((quaternion_matrix(&q) - RM4::identity()).norm() < 1e-15);
    }

    #[test]
    fn quaternion_diag_property() {
        use rand::Rng;
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..100 {
            let q = UnitVec4::normalized(Vector4::from_fn(|_, _| rng.gen::<f64>() - 0.5)).unwrap();
            let p = UnitVec4::normalized(Vector4::from_fn(|_, _| rng.gen::<f64>() - 0.5)).unwrap();
            let m = quaternion_matrix(&q).transpose() * quaternion_matrix(&p);
            let ip = q.dot(&p);
            for a in 0..4 {
                assert!((m[(a, a)] - ip).abs() < 1e-12);
            }
            // SO(4): orthogonal with determinant +1
            let mq = quaternion_matrix(&q);
            assert!((mq.transpose() * mq - RM4::identity()).norm() < 1e-12);
            assert!((mq.determinant() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn orthogonal_q_p_gives_zero_diag() {
        let q = unit([1.0, 0.0, 0.0, 0.0]);
        let p = unit([0.0, 1.0, 0.0, 0.0]);
        let m = quaternion_matrix(&q).transpose() * quaternion_matrix(&p);
        for a in 0..4 {
            assert!(m[(a, a)].abs() < 1e-15);
        }
    }

    #[test]
    fn k2_representation_is_easy() {
        let k2 = Graph::complete(2);
        let rep = find_orthogonal_representation(&k2, 1, &RepSearchConfig { restarts: 4, ..Default::default() });
        assert!(rep.residual < 1e-10, "residual {}", rep.residual);
    }

    #[test]
    fn k5_has_no_r4_representation() {
        let k5 = Graph::complete(5);
        let rep = find_orthogonal_representation(&k5, 1, &RepSearchConfig { restarts: 8, ..Default::default() });
        // five mutually orthogonal unit vectors cannot exist in R^4
        assert!(rep.residual > 0.05, "residual {}", rep.residual);
        assert!(!rep.is_valid());
    }

    #[test]
    fn perfect_strategy_on_k2() {
        let k2 = Graph::complete(2);
        let rep = OrthogonalRep::new(
            vec![unit([1.0, 0.0, 0.0, 0.0]), unit([0.0, 1.0, 0.0, 0.0])],
            &k2,
        )
        .unwrap();
        let strat = build_perfect_strategy(&rep).unwrap();
        let game = build_game(&k2, 4).unwrap();
        let omega = quantum_value(&strat, &game).unwrap();
        assert!((omega - 1.0).abs() < 1e-12, "omega {}", omega);
        assert!(edge_residual(&strat, &k2, 0, 1).unwrap() < 1e-12);
    }

    #[test]
    fn identity_strategy_wins_only_vertices() {
        let g14 = Graph::g14();
        let game = build_game(&g14, 4).unwrap();
        let strat = Strategy::new(vec![CM4::identity(); 14]).unwrap();
        let omega = quantum_value(&strat, &game).unwrap();
        assert!((omega - 14.0 / 88.0).abs() < 1e-12, "omega {}", omega);
    }

    #[test]
    fn identity_edge_residual_is_one() {
        let k2 = Graph::complete(2);
        let strat = Strategy::new(vec![CM4::identity(); 2]).unwrap();
        assert!((edge_residual(&strat, &k2, 0, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!(edge_residual(&strat, &k2, 0, 0).is_err());
    }

    #[test]
    fn perturbed_vector_loses_eps_squared() {
        // ⟨q_u, q_v⟩ = ε ⇒ each colliding outcome carries probability ε²/4,
        // so the edge question loses ε² in total; compare against the direct
        // probability evaluation
        let k2 = Graph::complete(2);
        let eps = 1e-3;
        let q0 = unit([1.0, 0.0, 0.0, 0.0]);
        let q1 = UnitVec4::normalized(Vector4::new(eps, 1.0, 0.0, 0.0)).unwrap();
        let rep = OrthogonalRep::new(vec![q0, q1], &k2).unwrap();
        // residual eps is above the validity gate; build directly
        let strat = Strategy::new(
            rep.vectors
                .iter()
                .map(|q| complexify(&quaternion_matrix(q).transpose()))
                .collect(),
        )
        .unwrap();
        let p = question_probabilities(&strat, 0, 1);
        let lose: f64 = (0..4).map(|a| p[a * 4 + a]).sum();
        let ip = q0.dot(&q1);
        assert!((lose - ip * ip).abs() < 1e-12);
    }

    #[test]
    fn reversed_edge_probabilities_swap() {
        use rand::Rng;
        // P(a,b|u,v) = P(b,a|v,u) under the conjugate protocol
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let mut random_unitary = || {
            // QR of a random complex matrix
            let m = CM4::from_fn(|_, _| {
                num_complex::Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let qr = m.qr();
            qr.q()
        };
        let strat = Strategy::new(vec![random_unitary(), random_unitary()]).unwrap();
        let puv = question_probabilities(&strat, 0, 1);
        let pvu = question_probabilities(&strat, 1, 0);
        for a in 0..4 {
            for b in 0..4 {
                assert!((puv[a * 4 + b] - pvu[b * 4 + a]).abs() < 1e-12);
            }
        }
    }
}
