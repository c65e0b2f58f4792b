//! The weighted syndrome graph built from a fault catalog.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::decoder::faults::{Fault, FaultCatalog};
use crate::detectors::{detector_label, DetectorLabel};
use crate::error::{Error, Result};
use crate::layout::{Block, CodeSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Space,
    Time,
    SpaceTime,
    GateFlow,
    Boundary,
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeKind::Space => "space",
            EdgeKind::Time => "time",
            EdgeKind::SpaceTime => "space_time",
            EdgeKind::GateFlow => "gate_flow",
            EdgeKind::Boundary => "boundary",
        })
    }
}

/// An edge between detectors `u < v`; `v` equals the boundary node index
/// for boundary edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub p: f64,
    pub w: f64,
    #[serde(rename = "type")]
    pub kind: EdgeKind,
    pub obs: [bool; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    #[serde(flatten)]
    pub label: Option<DetectorLabel>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub boundary: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyndromeGraph {
    pub spec: CodeSpec,
    pub detector_count: usize,
    /// Sorted by `(u, v, obs)`.
    pub edges: Vec<Edge>,
    pub warnings: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

/// Log-likelihood weight `ln((1 - p) / p)`, with `p` clamped to `0.5`.
pub fn edge_weight(p: f64) -> f64 {
    let p = p.min(0.5);
    ((1.0 - p) / p).ln()
}

/// Probability that exactly one of two independent events occurs.
pub fn combine(p: f64, q: f64) -> f64 {
    p + q - 2.0 * p * q
}

pub fn classify(spec: &CodeSpec, u: usize, v: usize, boundary: usize) -> EdgeKind {
    if v == boundary || u == boundary {
        return EdgeKind::Boundary;
    }
    let (a, b) = (detector_label(spec, u), detector_label(spec, v));
    if a.block != b.block {
        EdgeKind::GateFlow
    } else if a.check == b.check {
        EdgeKind::Time
    } else if a.round == b.round {
        EdgeKind::Space
    } else {
        EdgeKind::SpaceTime
    }
}

type Key = (usize, usize, [bool; 2]);

impl SyndromeGraph {
    pub fn boundary(&self) -> usize {
        self.detector_count
    }

    pub fn node_count(&self) -> usize {
        self.detector_count + 1
    }

    pub fn nodes(&self) -> Vec<Node> {
        let mut nodes: Vec<Node> = (0..self.detector_count)
            .map(|i| Node {
                id: i,
                label: Some(detector_label(&self.spec, i)),
                boundary: false,
            })
            .collect();
        nodes.push(Node {
            id: self.detector_count,
            label: None,
            boundary: true,
        });
        nodes
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&GraphJson {
            nodes: self.nodes(),
            edges: self.edges.clone(),
        })?)
    }

    pub fn edges_of_kind(&self, kind: EdgeKind) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.kind == kind)
    }

    pub fn find(&self, u: usize, v: usize) -> Vec<&Edge> {
        let (u, v) = (u.min(v), u.max(v));
        self.edges.iter().filter(|e| e.u == u && e.v == v).collect()
    }
}

/// Builds the decoding graph: 2-detector faults become edges, 1-detector
/// faults boundary edges, and larger detector sets are split into edges.
///
/// A fault touching both blocks is split per block, each part carrying that
/// block's observable flip. A part (or single-block fault) with more than
/// two detectors is partitioned into existing edges, preferring fewer
/// boundary parts, then more space-like parts.
pub fn build_syndrome_graph(catalog: &FaultCatalog) -> Result<SyndromeGraph> {
    let spec = catalog.spec;
    let n = catalog.detector_count;
    let boundary = n;
    let active: Vec<&Fault> = catalog.faults.iter().filter(|f| f.p > 0.0).collect();

    let mut primitive: BTreeSet<Key> = BTreeSet::new();
    let mut pending: Vec<(&Fault, Vec<usize>, [bool; 2])> = Vec::new();
    let mut assigned: Vec<(&Fault, Vec<Key>)> = Vec::new();

    for f in &active {
        match f.detectors.len() {
            0 if f.observables == [false, false] => {}
            0 => {
                return Err(Error::SilentLogical {
                    fault: f.id,
                    location: f.location.clone(),
                })
            }
            1 | 2 => {
                let k = pair_key(&f.detectors, f.observables, boundary);
                primitive.insert(k);
                assigned.push((f, vec![k]));
            }
            _ => {}
        }
    }
    // Split cross-block hyperedges into per-block parts.
    for f in &active {
        if f.detectors.len() <= 2 {
            continue;
        }
        let (ctrl, tgt): (Vec<usize>, Vec<usize>) = f
            .detectors
            .iter()
            .partition(|&&i| detector_label(&spec, i).block == Block::Control);
        if ctrl.is_empty() || tgt.is_empty() {
            pending.push((f, f.detectors.clone(), f.observables));
            continue;
        }
        let mut keys = Vec::new();
        for (part, obs) in [
            (ctrl, [f.observables[0], false]),
            (tgt, [false, f.observables[1]]),
        ] {
            if part.len() <= 2 {
                let k = pair_key(&part, obs, boundary);
                primitive.insert(k);
                keys.push(k);
            } else {
                pending.push((f, part, obs));
            }
        }
        if !keys.is_empty() {
            assigned.push((f, keys));
        }
    }
    for (f, dets, obs) in pending {
        let parts = decompose(&spec, &dets, obs, &primitive, boundary).ok_or_else(|| {
            Error::Undecomposable {
                fault: f.id,
                location: f.location.clone(),
                detectors: f.detectors.clone(),
            }
        })?;
        assigned.push((f, parts));
    }

    let mut probs: BTreeMap<Key, f64> = BTreeMap::new();
    for (f, keys) in &assigned {
        for k in keys {
            let e = probs.entry(*k).or_insert(0.0);
            *e = combine(*e, f.p);
        }
    }
    let mut warnings = Vec::new();
    let edges = probs
        .into_iter()
        .map(|((u, v, obs), p)| {
            if p > 0.5 {
                warnings.push(format!("edge {u}-{v} has p={p} > 0.5; weight clamped to 0"));
            }
            Edge {
                u,
                v,
                p,
                w: edge_weight(p),
                kind: classify(&spec, u, v, boundary),
                obs,
            }
        })
        .collect();
    Ok(SyndromeGraph {
        spec,
        detector_count: n,
        edges,
        warnings,
    })
}

fn pair_key(dets: &[usize], obs: [bool; 2], boundary: usize) -> Key {
    match *dets {
        [a] => (a, boundary, obs),
        [a, b] => (a.min(b), a.max(b), obs),
        _ => unreachable!("pair_key needs one or two detectors"),
    }
}

/// Fewer boundary parts, then more space parts, then the sorted parts.
type Score = (usize, std::cmp::Reverse<usize>, Vec<Key>);

/// Partitions `dets` into one- and two-detector parts present in
/// `primitive` whose observable flips XOR to `target`.
fn decompose(
    spec: &CodeSpec,
    dets: &[usize],
    target: [bool; 2],
    primitive: &BTreeSet<Key>,
    boundary: usize,
) -> Option<Vec<Key>> {
    let variants = |u: usize, v: usize| -> Vec<[bool; 2]> {
        primitive
            .range((u, v, [false, false])..=(u, v, [true, true]))
            .map(|k| k.2)
            .collect()
    };
    let mut best: Option<(Score, Vec<Key>)> = None;
    let mut stack: Vec<Key> = Vec::new();

    #[allow(clippy::too_many_arguments)]
    fn search(
        rest: &[usize],
        acc: [bool; 2],
        target: [bool; 2],
        stack: &mut Vec<Key>,
        variants: &dyn Fn(usize, usize) -> Vec<[bool; 2]>,
        spec: &CodeSpec,
        boundary: usize,
        best: &mut Option<(Score, Vec<Key>)>,
    ) {
        let Some((&a, tail)) = rest.split_first() else {
            if acc == target {
                let boundaries = stack.iter().filter(|k| k.1 == boundary).count();
                let spaces = stack
                    .iter()
                    .filter(|k| classify(spec, k.0, k.1, boundary) == EdgeKind::Space)
                    .count();
                let mut sorted = stack.clone();
                sorted.sort_unstable();
                let score = (boundaries, std::cmp::Reverse(spaces), sorted.clone());
                if best.as_ref().is_none_or(|(s, _)| score < *s) {
                    *best = Some((score, sorted));
                }
            }
            return;
        };
        for obs in variants(a, boundary) {
            stack.push((a, boundary, obs));
            search(
                tail,
                [acc[0] ^ obs[0], acc[1] ^ obs[1]],
                target,
                stack,
                variants,
                spec,
                boundary,
                best,
            );
            stack.pop();
        }
        for (i, &b) in tail.iter().enumerate() {
            for obs in variants(a, b) {
                let mut remaining = tail.to_vec();
                remaining.remove(i);
                stack.push((a, b, obs));
                search(
                    &remaining,
                    [acc[0] ^ obs[0], acc[1] ^ obs[1]],
                    target,
                    stack,
                    variants,
                    spec,
                    boundary,
                    best,
                );
                stack.pop();
            }
        }
    }

    let mut sorted = dets.to_vec();
    sorted.sort_unstable();
    search(
        &sorted,
        [false, false],
        target,
        &mut stack,
        &variants,
        spec,
        boundary,
        &mut best,
    );
    best.map(|(_, parts)| parts)
}
