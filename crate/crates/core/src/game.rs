//! The c-coloring nonlocal game: questions, rule function, and the exact
//! classical value.
//!
//! Questions are the graph's vertices (both players get the same vertex) and
//! its directed edges (the players get the two endpoints). Vertex questions
//! are won by equal colors, edge questions by different colors. The classical
//! value is the best winning probability of any pair of deterministic
//! colorings; shared randomness cannot do better, so this is the full
//! local-hidden-variable supremum.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Kind of referee question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuestionKind {
    Vertex,
    DirectedEdge,
}

/// A referee question: Alice receives `x`, Bob receives `y`.
///
/// Vertex questions have `x == y`; directed-edge questions have `{x, y}` an
/// edge of the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Question {
    pub kind: QuestionKind,
    pub x: usize,
    pub y: usize,
}

impl Question {
    pub fn vertex(v: usize) -> Self {
        Question {
            kind: QuestionKind::Vertex,
            x: v,
            y: v,
        }
    }

    pub fn edge(u: usize, v: usize) -> Self {
        Question {
            kind: QuestionKind::DirectedEdge,
            x: u,
            y: v,
        }
    }
}

/// The rule function: 1 if answers `(a, b)` win question `q`, else 0.
///
/// Vertex questions demand equal colors, edge questions different colors.
pub fn rule_lambda(a: usize, b: usize, q: &Question, colors: usize) -> Result<u8> {
    if a >= colors || b >= colors {
        return Err(Error::domain(format!(
            "color out of range: ({a},{b}) with {colors} colors"
        )));
    }
    let eq = a == b;
    Ok(match q.kind {
        QuestionKind::Vertex => eq as u8,
        QuestionKind::DirectedEdge => (!eq) as u8,
    })
}

/// A c-coloring game on a graph: the ordered question list and the uniform
/// distribution over it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColoringGame {
    pub graph: Graph,
    pub colors: usize,
    /// `|V|` vertex questions followed by `2|E|` directed-edge questions.
    pub questions: Vec<Question>,
}

impl ColoringGame {
    pub fn question_count(&self) -> usize {
        self.questions.len()
    }

    /// Uniform weight of each question, as an exact rational.
    pub fn pi(&self) -> Ratio<u64> {
        Ratio::new(1, self.questions.len() as u64)
    }
}

/// Builds the coloring game for `graph` with `c` colors.
///
/// The question list contains each vertex once as `(v, v)` and each edge
/// twice, as `(u, v)` and `(v, u)`, all with uniform weight.
pub fn build_game(graph: &Graph, colors: usize) -> Result<ColoringGame> {
    if colors == 0 {
        return Err(Error::domain("color count must be positive"));
    }
    if graph.n == 0 {
        return Err(Error::domain("empty graph"));
    }
    let mut questions = Vec::with_capacity(graph.n + 2 * graph.edges.len());
    for v in 0..graph.n {
        questions.push(Question::vertex(v));
    }
    for &(u, v) in &graph.edges {
        questions.push(Question::edge(u, v));
        questions.push(Question::edge(v, u));
    }
    Ok(ColoringGame {
        graph: graph.clone(),
        colors,
        questions,
    })
}

/// A deterministic strategy pair together with the number of questions it wins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalOptimum {
    /// Number of won questions (out of `|V| + 2|E|`).
    pub wins: u64,
    pub f_alice: Vec<u8>,
    pub f_bob: Vec<u8>,
}

/// Work-size guard: reject instances with `|V| * log2(c) > 30` unless
/// explicitly overridden.
fn guard(game: &ColoringGame, override_size: bool) -> Result<()> {
    let bits = game.graph.n as f64 * (game.colors as f64).log2();
    if bits > 30.0 && !override_size {
        return Err(Error::size(format!(
            "classical value needs {:.0} enumeration bits (> 30); pass the size override to force",
            bits
        )));
    }
    Ok(())
}

/// Exact classical game value as a rational number.
///
/// Enumerates Alice's deterministic coloring `f_A`; for fixed `f_A` the score
/// decomposes over Bob's vertices, so Bob's best response is computed
/// per-vertex. Colors are symmetric under joint relabeling, so the
/// enumeration fixes `f_A(0) = 0`.
pub fn classical_value(game: &ColoringGame, override_size: bool) -> Result<Ratio<u64>> {
    guard(game, override_size)?;
    let n = game.graph.n;
    let c = game.colors;
    let nbrs = game.graph.neighbors();
    let total = game.questions.len() as u64;

    // Enumerate f_A with f_A(0) fixed to color 0.
    let space: u64 = (c as u64)
        .checked_pow((n - 1) as u32)
        .ok_or_else(|| Error::size("strategy space does not fit in u64"))?;

    let best_for_range = |range: std::ops::Range<u64>| -> u64 {
        let mut fa = vec![0u8; n];
        let mut counts = vec![0u32; c];
        let mut best = 0u64;
        for idx in range {
            let mut t = idx;
            for v in 1..n {
                fa[v] = (t % c as u64) as u8;
                t /= c as u64;
            }
            let mut wins = 0u64;
            for w in 0..n {
                counts[..c].fill(0);
                for &u in &nbrs[w] {
                    counts[fa[u] as usize] += 1;
                }
                let deg = nbrs[w].len() as u64;
                let mut best_w = 0u64;
                for (b, &cnt) in counts[..c].iter().enumerate() {
                    let score = (b as u8 == fa[w]) as u64 + deg - cnt as u64;
                    if score > best_w {
                        best_w = score;
                    }
                }
                wins += best_w;
            }
            if wins > best {
                best = wins;
            }
        }
        best
    };

    #[cfg(feature = "parallel")]
    let best = {
        let chunks: u64 = 256.min(space.max(1));
        let chunk = space.div_ceil(chunks);
        (0..chunks)
            .into_par_iter()
            .map(|k| best_for_range(k * chunk..((k + 1) * chunk).min(space)))
            .max()
            .unwrap_or(0)
    };
    #[cfg(not(feature = "parallel"))]
    let best = best_for_range(0..space);

    Ok(Ratio::new(best, total))
}

/// Exact classical optimum with the witnessing strategy pair.
///
/// Full joint enumeration of `f_A` (no color-symmetry reduction) so that the
/// reported pair is the lexicographically first maximizer; intended for small
/// instances and cross-checks.
pub fn classical_optimum(game: &ColoringGame, override_size: bool) -> Result<ClassicalOptimum> {
    guard(game, override_size)?;
    let n = game.graph.n;
    let c = game.colors;
    let nbrs = game.graph.neighbors();
    let space: u64 = (c as u64)
        .checked_pow(n as u32)
        .ok_or_else(|| Error::size("strategy space does not fit in u64"))?;

    let mut best: Option<ClassicalOptimum> = None;
    let mut fa = vec![0u8; n];
    let mut counts = vec![0u32; c];
    for idx in 0..space {
        let mut t = idx;
        // digit order: fa[0] is the most significant digit so that lexicographic
        // order of fa matches the enumeration order
        for v in (0..n).rev() {
            fa[v] = (t % c as u64) as u8;
            t /= c as u64;
        }
        let mut wins = 0u64;
        let mut fb = vec![0u8; n];
        for w in 0..n {
            counts[..c].fill(0);
            for &u in &nbrs[w] {
                counts[fa[u] as usize] += 1;
            }
            let deg = nbrs[w].len() as u64;
            let mut best_w = 0u64;
            let mut best_b = 0u8;
            for (b, &cnt) in counts[..c].iter().enumerate() {
                let score = (b as u8 == fa[w]) as u64 + deg - cnt as u64;
                if score > best_w {
                    best_w = score;
                    best_b = b as u8;
                }
            }
            fb[w] = best_b;
            wins += best_w;
        }
        let better = match &best {
            None => true,
            Some(cur) => wins > cur.wins,
        };
        if better {
            best = Some(ClassicalOptimum {
                wins,
                f_alice: fa.clone(),
                f_bob: fb,
            });
        }
    }
    Ok(best.expect("at least one strategy exists"))
}

/// Score of an explicit deterministic pair: the number of won questions.
pub fn pair_score(game: &ColoringGame, f_alice: &[u8], f_bob: &[u8]) -> Result<u64> {
    if f_alice.len() != game.graph.n || f_bob.len() != game.graph.n {
        return Err(Error::domain("strategy length must equal vertex count"));
    }
    let mut wins = 0u64;
    for q in &game.questions {
        wins += rule_lambda(f_alice[q.x] as usize, f_bob[q.y] as usize, q, game.colors)? as u64;
    }
    Ok(wins)
}
