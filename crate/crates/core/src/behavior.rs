//! Empirical (or exact) conditional behaviors `P(a,b|x,y)` over a question
//! support, the input format of the non-signaling analysis.

use crate::counts::{parse_bitstring, parse_label, CountsDataset};
use crate::error::{Error, Result};
use crate::game::{ColoringGame, QuestionKind};

/// Conditional outcome distributions for every question in a support.
///
/// Outcomes are indexed `a * outcomes_b + b`. For the coloring game the
/// support is the full directed question list (vertex questions plus both
/// directions of every edge).
#[derive(Debug, Clone)]
pub struct BehaviorTable {
    pub support: Vec<(usize, usize)>,
    pub outcomes_a: usize,
    pub outcomes_b: usize,
    /// One distribution per support entry.
    pub freqs: Vec<Vec<f64>>,
    /// Shots behind each distribution; `None` for exact tables.
    pub shots: Vec<Option<u64>>,
}

impl BehaviorTable {
    pub const NORM_TOL: f64 = 1e-12;

    pub fn new(
        support: Vec<(usize, usize)>,
        outcomes_a: usize,
        outcomes_b: usize,
        freqs: Vec<Vec<f64>>,
        shots: Vec<Option<u64>>,
    ) -> Result<Self> {
        if freqs.len() != support.len() || shots.len() != support.len() {
            return Err(Error::domain("support, freqs and shots must align"));
        }
        let k = outcomes_a * outcomes_b;
        for (i, f) in freqs.iter().enumerate() {
            if f.len() != k {
                return Err(Error::domain(format!(
                    "question {i}: expected {k} outcome cells, got {}",
                    f.len()
                )));
            }
            if f.iter().any(|&x| x < -1e-15 || !x.is_finite()) {
                return Err(Error::domain(format!("question {i}: negative frequency")));
            }
            let s: f64 = f.iter().sum();
            if (s - 1.0).abs() > Self::NORM_TOL {
                return Err(Error::domain(format!(
                    "question {i}: frequencies sum to {s}, not 1"
                )));
            }
        }
        Ok(BehaviorTable {
            support,
            outcomes_a,
            outcomes_b,
            freqs,
            shots,
        })
    }

    pub fn question_count(&self) -> usize {
        self.support.len()
    }

    pub fn cell(&self, q: usize, a: usize, b: usize) -> f64 {
        self.freqs[q][a * self.outcomes_b + b]
    }

    /// Largest violation of the non-signaling marginal equalities.
    ///
    /// For each Alice input `x` and answer `a`, `Σ_b P(a,b|x,y)` must not
    /// depend on `y`; symmetrically for Bob. Returns the max spread.
    pub fn ns_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        // Alice side: group support indices by x
        let xs: Vec<usize> = {
            let mut v: Vec<usize> = self.support.iter().map(|&(x, _)| x).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        for &x in &xs {
            let qs: Vec<usize> = (0..self.support.len())
                .filter(|&q| self.support[q].0 == x)
                .collect();
            if qs.len() < 2 {
                continue;
            }
            for a in 0..self.outcomes_a {
                let margs: Vec<f64> = qs
                    .iter()
                    .map(|&q| (0..self.outcomes_b).map(|b| self.cell(q, a, b)).sum())
                    .collect();
                let lo = margs.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = margs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                worst = worst.max(hi - lo);
            }
        }
        let ys: Vec<usize> = {
            let mut v: Vec<usize> = self.support.iter().map(|&(_, y)| y).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        for &y in &ys {
            let qs: Vec<usize> = (0..self.support.len())
                .filter(|&q| self.support[q].1 == y)
                .collect();
            if qs.len() < 2 {
                continue;
            }
            for b in 0..self.outcomes_b {
                let margs: Vec<f64> = qs
                    .iter()
                    .map(|&q| (0..self.outcomes_a).map(|a| self.cell(q, a, b)).sum())
                    .collect();
                let lo = margs.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = margs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                worst = worst.max(hi - lo);
            }
        }
        worst
    }

    /// Builds the empirical behavior of a counts dataset over the game's
    /// directed question support.
    pub fn from_counts(dataset: &CountsDataset, game: &ColoringGame) -> Result<Self> {
        let shots_per_q = expand_shots(dataset, game)?;
        let support: Vec<(usize, usize)> = game.questions.iter().map(|q| (q.x, q.y)).collect();
        let mut freqs = Vec::with_capacity(support.len());
        let mut shots = Vec::with_capacity(support.len());
        for outcomes in &shots_per_q {
            let n = outcomes.len() as u64;
            if n == 0 {
                return Err(Error::data("question with zero shots"));
            }
            let mut f = vec![0.0; 16];
            for &o in outcomes {
                f[o as usize] += 1.0 / n as f64;
            }
            freqs.push(f);
            shots.push(Some(n));
        }
        BehaviorTable::new(support, 4, 4, freqs, shots)
    }
}

/// Expands a counts dataset into per-directed-question outcome sequences.
///
/// Each physical shot is assigned to exactly one directed question. Vertex
/// circuits feed `(v, v)` directly. Each undirected edge circuit serves both
/// directed questions: shots alternate by expansion index, and shots assigned
/// to the reversed question get their Alice/Bob outcome halves swapped
/// (`P(a,b|v,u) = P(b,a|u,v)` under the conjugate protocol). Outcomes are
/// expanded in sorted bitstring order, so the split is deterministic.
///
/// Returned sequences are indexed like `game.questions`.
pub fn expand_shots(dataset: &CountsDataset, game: &ColoringGame) -> Result<Vec<Vec<u8>>> {
    let mut per_q: Vec<Vec<u8>> = vec![Vec::new(); game.questions.len()];
    // index directed questions
    let mut q_index = std::collections::BTreeMap::new();
    for (i, q) in game.questions.iter().enumerate() {
        q_index.insert((q.x, q.y), i);
    }
    for rec in &dataset.records {
        let (kind, u, v) = parse_label(&rec.label)?;
        match kind {
            QuestionKind::Vertex => {
                let qi = *q_index
                    .get(&(u, u))
                    .ok_or_else(|| Error::data(format!("label {} not in game", rec.label)))?;
                for (key, &cnt) in &rec.counts {
                    let o = parse_bitstring(key)? as u8;
                    for _ in 0..cnt {
                        per_q[qi].push(o);
                    }
                }
            }
            QuestionKind::DirectedEdge => {
                let qi_fwd = *q_index
                    .get(&(u, v))
                    .ok_or_else(|| Error::data(format!("label {} not in game", rec.label)))?;
                let qi_rev = *q_index
                    .get(&(v, u))
                    .ok_or_else(|| Error::data(format!("label {} reversal not in game", rec.label)))?;
                let mut idx = 0u64;
                for (key, &cnt) in &rec.counts {
                    let o = parse_bitstring(key)? as u8;
                    let (a, b) = (o >> 2, o & 3);
                    let swapped = (b << 2) | a;
                    for _ in 0..cnt {
                        if idx % 2 == 0 {
                            per_q[qi_fwd].push(o);
                        } else {
                            per_q[qi_rev].push(swapped);
                        }
                        idx += 1;
                    }
                }
            }
        }
    }
    Ok(per_q)
}
