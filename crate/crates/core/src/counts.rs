//! Measured (or simulated) shot counts, one record per executed circuit.
//!
//! On disk this is JSONL, one object per circuit:
//! `{"label": "v5", "kind": "vertex", "shots": 2000, "counts": {"0110": 4, ...}}`.
//!
//! Bit convention: the outcome string is `q0 q1 q2 q3` left to right; Alice's
//! color is `2·q0 + q1`, Bob's is `2·q2 + q3`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::QuestionKind;

/// Origin of a dataset, carried through to reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Simulated,
    Ingested,
}

/// Counts for one circuit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountsRecord {
    pub label: String,
    #[serde(with = "kind_serde")]
    pub kind: QuestionKind,
    pub shots: u64,
    /// Outcome bitstring -> multiplicity. BTreeMap keeps serialization stable.
    pub counts: BTreeMap<String, u64>,
}

mod kind_serde {
    use super::QuestionKind;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(k: &QuestionKind, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(match k {
            QuestionKind::Vertex => "vertex",
            QuestionKind::DirectedEdge => "edge",
        })
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<QuestionKind, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "vertex" => Ok(QuestionKind::Vertex),
            "edge" => Ok(QuestionKind::DirectedEdge),
            other => Err(serde::de::Error::custom(format!("unknown kind {other}"))),
        }
    }
}

impl CountsRecord {
    pub fn validate(&self) -> Result<()> {
        let total: u64 = self.counts.values().sum();
        if total != self.shots {
            return Err(Error::data(format!(
                "record {}: counts sum to {} but shots = {}",
                self.label, total, self.shots
            )));
        }
        for key in self.counts.keys() {
            parse_bitstring(key)?;
        }
        Ok(())
    }

    /// Empirical outcome frequencies indexed by `a*4 + b`.
    pub fn frequencies(&self) -> Result<[f64; 16]> {
        let mut f = [0.0; 16];
        if self.shots == 0 {
            return Err(Error::data(format!("record {} has zero shots", self.label)));
        }
        for (key, &cnt) in &self.counts {
            let idx = parse_bitstring(key)?;
            f[idx] += cnt as f64 / self.shots as f64;
        }
        Ok(f)
    }
}

/// Parses a 4-bit outcome string into the index `a*4 + b`.
pub fn parse_bitstring(s: &str) -> Result<usize> {
    if s.len() != 4 || !s.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(Error::data(format!("malformed outcome bitstring {s:?}")));
    }
    Ok(s.bytes().fold(0usize, |acc, b| acc * 2 + (b - b'0') as usize))
}

/// Formats an outcome index `a*4 + b` as the 4-bit string `q0q1q2q3`.
pub fn format_bitstring(idx: usize) -> String {
    format!("{idx:04b}")
}

/// Circuit label helpers: `v{i}` for vertex circuits, `e{u}_{v}` for edge
/// circuits with `u < v`.
pub fn vertex_label(v: usize) -> String {
    format!("v{v}")
}

pub fn edge_label(u: usize, v: usize) -> String {
    format!("e{}_{}", u.min(v), u.max(v))
}

/// Parses a circuit label back into its question location.
pub fn parse_label(label: &str) -> Result<(QuestionKind, usize, usize)> {
    if let Some(rest) = label.strip_prefix('v') {
        let v: usize = rest
            .parse()
            .map_err(|_| Error::data(format!("bad vertex label {label:?}")))?;
        return Ok((QuestionKind::Vertex, v, v));
    }
    if let Some(rest) = label.strip_prefix('e') {
        let (u, v) = rest
            .split_once('_')
            .ok_or_else(|| Error::data(format!("bad edge label {label:?}")))?;
        let u: usize = u
            .parse()
            .map_err(|_| Error::data(format!("bad edge label {label:?}")))?;
        let v: usize = v
            .parse()
            .map_err(|_| Error::data(format!("bad edge label {label:?}")))?;
        return Ok((QuestionKind::DirectedEdge, u, v));
    }
    Err(Error::data(format!("unrecognized label {label:?}")))
}

/// A full run: one record per circuit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountsDataset {
    pub records: Vec<CountsRecord>,
    pub provenance: Provenance,
}

impl CountsDataset {
    pub fn new(records: Vec<CountsRecord>, provenance: Provenance) -> Result<Self> {
        let mut labels = BTreeSet::new();
        for r in &records {
            r.validate()?;
            if !labels.insert(r.label.clone()) {
                return Err(Error::data(format!("duplicate label {}", r.label)));
            }
        }
        Ok(CountsDataset {
            records,
            provenance,
        })
    }

    pub fn record(&self, label: &str) -> Option<&CountsRecord> {
        self.records.iter().find(|r| r.label == label)
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R, provenance: Provenance) -> Result<Self> {
        let mut records = Vec::new();
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            records.push(serde_json::from_str::<CountsRecord>(&line)?);
        }
        CountsDataset::new(records, provenance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitstring_round_trip() {
        for idx in 0..16 {
            assert_eq!(parse_bitstring(&format_bitstring(idx)).unwrap(), idx);
        }
        assert!(parse_bitstring("012").is_err());
        assert!(parse_bitstring("00012").is_err());
    }

    #[test]
    fn label_round_trip() {
        assert_eq!(
            parse_label(&vertex_label(7)).unwrap(),
            (QuestionKind::Vertex, 7, 7)
        );
        assert_eq!(
            parse_label(&edge_label(9, 3)).unwrap(),
            (QuestionKind::DirectedEdge, 3, 9)
        );
        assert!(parse_label("x1").is_err());
    }

    #[test]
    fn dataset_rejects_bad_records() {
        let rec = CountsRecord {
            label: "v0".into(),
            kind: QuestionKind::Vertex,
            shots: 3,
            counts: [("0000".to_string(), 2)].into_iter().collect(),
        };
        assert!(CountsDataset::new(vec![rec], Provenance::Simulated).is_err());

        let rec = CountsRecord {
            label: "v0".into(),
            kind: QuestionKind::Vertex,
            shots: 1,
            counts: [("0000".to_string(), 1)].into_iter().collect(),
        };
        let dup = CountsDataset::new(vec![rec.clone(), rec], Provenance::Simulated);
        assert!(dup.is_err());
    }

    #[test]
    fn jsonl_round_trip() {
        let rec = CountsRecord {
            label: "e0_1".into(),
            kind: QuestionKind::DirectedEdge,
            shots: 5,
            counts: [("0001".to_string(), 3), ("1110".to_string(), 2)]
                .into_iter()
                .collect(),
        };
        let ds = CountsDataset::new(vec![rec], Provenance::Simulated).unwrap();
        let mut buf = Vec::new();
        ds.write_jsonl(&mut buf).unwrap();
        let ds2 = CountsDataset::read_jsonl(&buf[..], Provenance::Simulated).unwrap();
        assert_eq!(ds2.records.len(), 1);
        assert_eq!(ds2.records[0].counts["0001"], 3);
    }
}
