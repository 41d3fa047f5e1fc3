//! Exact 4-qubit density-matrix simulation of native-gate circuits under
//! depolarizing and readout (SPAM) noise, plus multinomial shot sampling.
//!
//! Each gate is applied as a unitary conjugation followed by a depolarizing
//! channel on its support; readout applies a per-qubit confusion matrix to
//! the diagonal. Depolarizing strengths are the standard average-fidelity
//! inversion `p = (1 − F)·d/(d − 1)`, which is approximate: the hardware
//! numbers it mimics are fidelities, not channel parameters.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuits::{gate_unitary, Circuit, NativeGate};
use crate::counts::{format_bitstring, CountsDataset, CountsRecord, Provenance};
use crate::error::{Error, Result};
use crate::game::QuestionKind;
use crate::linalg::{c, CM16};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Phenomenological noise parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Depolarizing probability after every single-qubit gate.
    pub p1: f64,
    /// Depolarizing probability after every `Rxx` gate.
    pub p2: f64,
    /// Per-qubit P(read 1 | prepared 0).
    pub eps01: f64,
    /// Per-qubit P(read 0 | state 1).
    pub eps10: f64,
}

impl NoiseModel {
    pub const IDEAL: NoiseModel = NoiseModel {
        p1: 0.0,
        p2: 0.0,
        eps01: 0.0,
        eps10: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("p1", self.p1),
            ("p2", self.p2),
            ("eps01", self.eps01),
            ("eps10", self.eps10),
        ] {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(Error::domain(format!("noise parameter {name} = {v} outside [0,1]")));
            }
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0 && self.eps01 == 0.0 && self.eps10 == 0.0
    }

    /// Per-qubit readout confusion matrix; `confusion[r][t] = P(read r | true t)`.
    pub fn confusion(&self) -> [[f64; 2]; 2] {
        [
            [1.0 - self.eps01, self.eps10],
            [self.eps01, 1.0 - self.eps10],
        ]
    }

    /// Parses either `{"preset": "blue"}` or explicit
    /// `{"p1": .., "p2": .., "eps01": .., "eps10": ..}`.
    pub fn from_json_spec(s: &str) -> Result<NoiseModel> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Spec {
            Preset { preset: String },
            Explicit(NoiseModel),
        }
        let spec: Spec = serde_json::from_str(s)?;
        let model = match spec {
            Spec::Preset { preset } => NoisePreset::parse(&preset)?.noise_model(),
            Spec::Explicit(m) => m,
        };
        model.validate()?;
        Ok(model)
    }
}

/// Hardware-style noise presets.
///
/// SPAM errors, single- and two-qubit fidelities per system: Silver
/// (0.83%, 99.98%, 98.6%), Gold (0.44%, 99.95%, 98.55%), Blue
/// (0.37%, 99.97%, 99.5%), Aria (0.39%, 99.95%, 99.6%). Fidelities map to
/// depolarizing strengths via `p = (1 − F)·d/(d − 1)` with `d = 2` for
/// single-qubit gates and `d = 4` for `Rxx`. The per-system fidelity
/// estimation methods differ, so presets treat them uniformly as average
/// gate fidelities; reports flag simulated data as phenomenological.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoisePreset {
    Ideal,
    Silver,
    Gold,
    Blue,
    Aria,
}

impl NoisePreset {
    pub const ALL: [NoisePreset; 5] = [
        NoisePreset::Ideal,
        NoisePreset::Silver,
        NoisePreset::Gold,
        NoisePreset::Blue,
        NoisePreset::Aria,
    ];

    pub fn parse(name: &str) -> Result<NoisePreset> {
        match name.to_ascii_lowercase().as_str() {
            "ideal" => Ok(NoisePreset::Ideal),
            "silver" => Ok(NoisePreset::Silver),
            "gold" => Ok(NoisePreset::Gold),
            "blue" => Ok(NoisePreset::Blue),
            "aria" => Ok(NoisePreset::Aria),
            other => Err(Error::domain(format!("unknown noise preset {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NoisePreset::Ideal => "ideal",
            NoisePreset::Silver => "silver",
            NoisePreset::Gold => "gold",
            NoisePreset::Blue => "blue",
            NoisePreset::Aria => "aria",
        }
    }

    /// (SPAM error, single-qubit fidelity, two-qubit fidelity).
    fn table(&self) -> (f64, f64, f64) {
        match self {
            NoisePreset::Ideal => (0.0, 1.0, 1.0),
            NoisePreset::Silver => (0.0083, 0.9998, 0.986),
            NoisePreset::Gold => (0.0044, 0.9995, 0.9855),
            NoisePreset::Blue => (0.0037, 0.9997, 0.995),
            NoisePreset::Aria => (0.0039, 0.9995, 0.996),
        }
    }

    pub fn noise_model(&self) -> NoiseModel {
        let (spam, f1, f2) = self.table();
        NoiseModel {
            p1: (1.0 - f1) * 2.0,
            p2: (1.0 - f2) * 4.0 / 3.0,
            eps01: spam,
            eps10: spam,
        }
    }

    /// Shots per circuit collected on the corresponding system.
    pub fn default_shots(&self) -> u64 {
        match self {
            NoisePreset::Gold => 300,
            NoisePreset::Aria => 20_000,
            _ => 2000,
        }
    }
}

/// Maps a preset name to its noise model.
pub fn noise_from_preset(name: &str) -> Result<NoiseModel> {
    Ok(NoisePreset::parse(name)?.noise_model())
}

const DIM: usize = 16;

/// Replaces the state on `support` qubits by the maximally mixed state with
/// probability `p`: `ρ ← (1−p)·ρ + p·(I/d ⊗ tr_supp ρ)`.
fn depolarize(rho: &mut CM16, support: &[usize], p: f64) {
    if p == 0.0 {
        return;
    }
    let mask: usize = support.iter().map(|&q| 1usize << (3 - q)).sum();
    let d = 1usize << support.len();
    let mut mixed = CM16::zeros();
    // enumerate index pairs agreeing outside the support
    for i in 0..DIM {
        for j in 0..DIM {
            if (i & !mask) != (j & !mask) {
                continue;
            }
            if (i & mask) != (j & mask) {
                continue; // identity on support is diagonal in the support bits
            }
            // trace over the support: sum rho over all support configurations
            let mut tr = c(0.0, 0.0);
            let mut k_bits = 0usize;
            loop {
                let ii = (i & !mask) | k_bits;
                let jj = (j & !mask) | k_bits;
                tr += rho[(ii, jj)];
                // next subset of mask
                k_bits = (k_bits.wrapping_sub(mask)) & mask;
                if k_bits == 0 {
                    break;
                }
            }
            mixed[(i, j)] = tr / d as f64;
        }
    }
    *rho = *rho * c(1.0 - p, 0.0) + mixed * c(p, 0.0);
}

/// Applies the 4-fold tensor product of per-qubit confusion matrices to an
/// outcome distribution.
pub fn apply_confusion(dist: &mut [f64; DIM], confusion: &[[[f64; 2]; 2]; 4]) {
    for q in 0..4 {
        let shift = 3 - q;
        let cm = &confusion[q];
        let mut out = [0.0f64; DIM];
        for (t, &pt) in dist.iter().enumerate() {
            let tb = (t >> shift) & 1;
            for rb in 0..2 {
                let r = (t & !(1 << shift)) | (rb << shift);
                out[r] += cm[rb][tb] * pt;
            }
        }
        *dist = out;
    }
}

/// Simulates a 4-qubit circuit from `|0000⟩` under the noise model and
/// returns the 16 outcome probabilities (after readout confusion).
pub fn simulate_circuit(circuit: &Circuit, noise: &NoiseModel) -> Result<[f64; DIM]> {
    noise.validate()?;
    if circuit.n_qubits != 4 {
        return Err(Error::domain("simulator expects 4-qubit circuits"));
    }
    let mut rho = CM16::zeros();
    rho[(0, 0)] = c(1.0, 0.0);
    for gate in &circuit.gates {
        let u = gate_unitary(gate, 4);
        rho = u * rho * u.adjoint();
        match gate {
            NativeGate::Rphi { q, .. } | NativeGate::Rz { q, .. } => {
                depolarize(&mut rho, &[*q], noise.p1)
            }
            NativeGate::Rxx { a, b, .. } => depolarize(&mut rho, &[*a, *b], noise.p2),
        }
    }
    let mut dist = [0.0f64; DIM];
    for (i, d) in dist.iter_mut().enumerate() {
        *d = rho[(i, i)].re.max(0.0);
    }
    let cm = noise.confusion();
    apply_confusion(&mut dist, &[cm, cm, cm, cm]);
    Ok(dist)
}

/// Diagnostics on a density matrix, used by the channel-invariant tests.
pub fn density_diagnostics(rho: &CM16) -> (f64, f64) {
    let herm = (rho - rho.adjoint()).norm();
    let trace = (rho.trace() - c(1.0, 0.0)).norm();
    (herm, trace)
}

/// Runs `simulate_circuit` and keeps the raw density matrix path observable
/// for tests: returns the state after all gates, before readout.
pub fn simulate_density(circuit: &Circuit, noise: &NoiseModel) -> Result<CM16> {
    noise.validate()?;
    let mut rho = CM16::zeros();
    rho[(0, 0)] = c(1.0, 0.0);
    for gate in &circuit.gates {
        let u = gate_unitary(gate, 4);
        rho = u * rho * u.adjoint();
        match gate {
            NativeGate::Rphi { q, .. } | NativeGate::Rz { q, .. } => {
                depolarize(&mut rho, &[*q], noise.p1)
            }
            NativeGate::Rxx { a, b, .. } => depolarize(&mut rho, &[*a, *b], noise.p2),
        }
    }
    Ok(rho)
}

/// Deterministic RNG for a circuit within a run: the stream is derived from
/// the run seed and the circuit label, so per-circuit sampling is stable
/// under parallel execution.
pub fn label_rng(seed: u64, label: &str) -> ChaCha12Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    let digest = h.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha12Rng::from_seed(key)
}

/// Multinomial sample of `shots` outcomes from a 16-bin distribution.
pub fn sample_counts(
    dist: &[f64; DIM],
    shots: u64,
    rng: &mut ChaCha12Rng,
) -> Result<BTreeMap<String, u64>> {
    if shots == 0 {
        return Err(Error::domain("need at least one shot"));
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > 1e-9 || dist.iter().any(|&p| !(p >= -1e-12)) {
        return Err(Error::domain(format!(
            "invalid distribution (sum {total}, min {})",
            dist.iter().cloned().fold(f64::INFINITY, f64::min)
        )));
    }
    let mut cumulative = [0.0f64; DIM];
    let mut acc = 0.0;
    for (i, &p) in dist.iter().enumerate() {
        acc += p.max(0.0) / total;
        cumulative[i] = acc;
    }
    cumulative[DIM - 1] = 1.0;
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for _ in 0..shots {
        let r: f64 = rng.gen();
        let idx = cumulative.partition_point(|&cv| cv < r).min(DIM - 1);
        *counts.entry(format_bitstring(idx)).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Simulates and samples every circuit, producing a counts dataset.
pub fn run_experiment(
    circuits: &[Circuit],
    noise: &NoiseModel,
    shots_per_circuit: u64,
    seed: u64,
) -> Result<CountsDataset> {
    let simulate_one = |circ: &Circuit| -> Result<CountsRecord> {
        let dist = simulate_circuit(circ, noise)?;
        let mut rng = label_rng(seed, &circ.label);
        let counts = sample_counts(&dist, shots_per_circuit, &mut rng)?;
        let kind = if circ.label.starts_with('v') {
            QuestionKind::Vertex
        } else {
            QuestionKind::DirectedEdge
        };
        Ok(CountsRecord {
            label: circ.label.clone(),
            kind,
            shots: shots_per_circuit,
            counts,
        })
    };

    #[cfg(feature = "parallel")]
    let records: Result<Vec<CountsRecord>> = circuits.par_iter().map(simulate_one).collect();
    #[cfg(not(feature = "parallel"))]
    let records: Result<Vec<CountsRecord>> = circuits.iter().map(simulate_one).collect();

    CountsDataset::new(records?, Provenance::Simulated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{ansatz_unitary, game_circuits, AnsatzTemplate, GameAnsatz};
    use crate::game::build_game;
    use crate::graph::Graph;
    use crate::strategy::{question_probabilities, Strategy};

    fn k2_ansatz(seed: u64) -> GameAnsatz {
        use rand::Rng;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let p: Vec<Vec<f64>> = (0..2)
            .map(|_| (0..8).map(|_| rng.gen_range(-3.0..3.0)).collect())
            .collect();
        GameAnsatz::new(AnsatzTemplate::OneRxx, p).unwrap()
    }

    #[test]
    fn vertex_circuit_is_exact_quarter_diagonal() {
        // conjugate protocol: any unitary measurement wins vertex questions
        let k2 = Graph::complete(2);
        let game = build_game(&k2, 4).unwrap();
        let ansatz = k2_ansatz(42);
        let circs = game_circuits(&ansatz, &game).unwrap();
        let dist = simulate_circuit(&circs[0], &NoiseModel::IDEAL).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let expect = if a == b { 0.25 } else { 0.0 };
                assert!(
                    (dist[a * 4 + b] - expect).abs() < 1e-12,
                    "P({a},{b}) = {}",
                    dist[a * 4 + b]
                );
            }
        }
    }

    #[test]
    fn circuit_path_matches_direct_probabilities() {
        // the full circuit (prep + Alice ansatz + exact Bob conjugate) must
        // reproduce the amplitude-formula probabilities to machine precision
        let k2 = Graph::complete(2);
        let game = build_game(&k2, 4).unwrap();
        let ansatz = k2_ansatz(7);
        let strat = Strategy::new(vec![
            ansatz_unitary(AnsatzTemplate::OneRxx, &ansatz.params[0]).unwrap(),
            ansatz_unitary(AnsatzTemplate::OneRxx, &ansatz.params[1]).unwrap(),
        ])
        .unwrap();
        let circs = game_circuits(&ansatz, &game).unwrap();
        let edge = circs.iter().find(|c| c.label == "e0_1").unwrap();
        let dist = simulate_circuit(edge, &NoiseModel::IDEAL).unwrap();
        let direct = question_probabilities(&strat, 0, 1);
        for i in 0..16 {
            assert!(
                (dist[i] - direct[i]).abs() < 1e-12,
                "outcome {i}: circuit {} vs direct {}",
                dist[i],
                direct[i]
            );
        }
    }

    #[test]
    fn probabilities_sum_to_one_under_noise() {
        let k2 = Graph::complete(2);
        let game = build_game(&k2, 4).unwrap();
        let circs = game_circuits(&k2_ansatz(1), &game).unwrap();
        let noise = NoiseModel {
            p1: 0.01,
            p2: 0.05,
            eps01: 0.02,
            eps10: 0.03,
        };
        for circ in &circs {
            let dist = simulate_circuit(circ, &noise).unwrap();
            let total: f64 = dist.iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "{}: sum {}", circ.label, total);
            let rho = simulate_density(circ, &noise).unwrap();
            let (herm, tr) = density_diagnostics(&rho);
            assert!(herm < 1e-12 && tr < 1e-12);
        }
    }

    #[test]
    fn preset_values() {
        let blue = noise_from_preset("blue").unwrap();
        assert!((blue.eps01 - 0.0037).abs() < 1e-12);
        assert!((blue.p2 - 0.005 * 4.0 / 3.0).abs() < 1e-12);
        let silver = noise_from_preset("silver").unwrap();
        assert!((silver.eps01 - 0.0083).abs() < 1e-12);
        assert!((silver.p2 - 0.014 * 4.0 / 3.0).abs() < 1e-6);
        assert!(noise_from_preset("ideal").unwrap().is_ideal());
        assert!(noise_from_preset("nope").is_err());
        let m = NoiseModel::from_json_spec(r#"{"preset": "gold"}"#).unwrap();
        assert!((m.eps01 - 0.0044).abs() < 1e-12);
        let m = NoiseModel::from_json_spec(r#"{"p1": 0.0, "p2": 0.1, "eps01": 0.0, "eps10": 0.0}"#)
            .unwrap();
        assert!((m.p2 - 0.1).abs() < 1e-12);
    }

    #[test]
    fn spam_only_grows_linearly_on_edge_circuit() {
        // first-order growth of the equal-color mass in the readout error
        let k2 = Graph::complete(2);
        let game = build_game(&k2, 4).unwrap();
        // near-perfect K2 strategy fitted by the single-gate template
        let strat = crate::strategy::build_perfect_strategy(
            &crate::strategy::OrthogonalRep::new(
                vec![
                    crate::strategy::UnitVec4::normalized(nalgebra::Vector4::new(1.0, 0.0, 0.0, 0.0)).unwrap(),
                    crate::strategy::UnitVec4::normalized(nalgebra::Vector4::new(0.0, 1.0, 0.0, 0.0)).unwrap(),
                ],
                &k2,
            )
            .unwrap(),
        )
        .unwrap();
        let (ansatz, dist) = crate::circuits::fit_strategy(&strat, AnsatzTemplate::OneRxx, 8, 5).unwrap();
        assert!(dist < 1e-7, "fit distance {dist}");
        let circs = game_circuits(&ansatz, &game).unwrap();
        let edge = circs.iter().find(|c| c.label == "e0_1").unwrap();
        let mass = |eps: f64| -> f64 {
            let noise = NoiseModel {
                p1: 0.0,
                p2: 0.0,
                eps01: eps,
                eps10: eps,
            };
            let d = simulate_circuit(edge, &noise).unwrap();
            (0..4).map(|a| d[a * 4 + a]).sum()
        };
        let base = mass(0.0);
        assert!(base < 1e-9, "ideal equal-color mass {base}");
        let eps = 1e-4;
        let slope = (mass(eps) - base) / eps;
        let slope2 = (mass(2.0 * eps) - base) / (2.0 * eps);
        // linear regime: halving eps leaves the secant slope nearly unchanged
        assert!(slope > 0.1, "slope {slope}");
        assert!((slope - slope2).abs() / slope < 0.01, "{slope} vs {slope2}");
    }

    #[test]
    fn sampling_is_deterministic_and_concentrated() {
        let uniform = [1.0 / 16.0; 16];
        let mut rng = label_rng(99, "v0");
        let counts = sample_counts(&uniform, 16_000, &mut rng).unwrap();
        let mut rng2 = label_rng(99, "v0");
        let counts2 = sample_counts(&uniform, 16_000, &mut rng2).unwrap();
        assert_eq!(counts, counts2);
        // each bin within 5 sigma of 1000, sigma = sqrt(n p (1-p)) ≈ 30.6
        for idx in 0..16 {
            let k = *counts.get(&format_bitstring(idx)).unwrap_or(&0);
            assert!(
                (k as f64 - 1000.0).abs() < 5.0 * 30.62,
                "bin {idx} count {k}"
            );
        }
        let total: u64 = counts.values().sum();
        assert_eq!(total, 16_000);
    }

    #[test]
    fn point_mass_sampling() {
        let mut dist = [0.0; 16];
        dist[0] = 1.0;
        let mut rng = label_rng(1, "x");
        let counts = sample_counts(&dist, 100, &mut rng).unwrap();
        assert_eq!(counts.len(), 1);
        assert_eq!(counts["0000"], 100);
    }

    #[test]
    fn run_experiment_rejects_duplicate_labels() {
        let circ = crate::circuits::bell_prep_circuit();
        let mut c1 = circ.clone();
        c1.label = "v0".into();
        let mut c2 = circ.clone();
        c2.label = "v0".into();
        let res = run_experiment(&[c1, c2], &NoiseModel::IDEAL, 10, 0);
        assert!(res.is_err());
    }

    #[test]
    fn depolarizing_is_trace_preserving() {
        let k2 = Graph::complete(2);
        let game = build_game(&k2, 4).unwrap();
        let circs = game_circuits(&k2_ansatz(3), &game).unwrap();
        let noise = NoiseModel {
            p1: 0.3,
            p2: 0.7,
            eps01: 0.0,
            eps10: 0.0,
        };
        let rho = simulate_density(&circs[0], &noise).unwrap();
        let (herm, tr) = density_diagnostics(&rho);
        assert!(herm < 1e-12, "hermiticity {herm}");
        assert!(tr < 1e-12, "trace deviation {tr}");
        // eigenvalues of a physical state are nonnegative
        let eig = rho.map(|z| z).symmetric_eigenvalues();
        assert!(eig.iter().all(|l| l.re > -1e-10));
    }
}
