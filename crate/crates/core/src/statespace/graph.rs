use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{Orientation, PersonalDimension, Phss, Roi, StateSpaceError};
use crate::hse::{KnowledgeBank, Move};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    /// Bucket index along each dimension.
    pub buckets: Vec<usize>,
    pub center: Vec<f64>,
    /// Index into [`StateGraph::rois`].
    pub roi: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub input_label: String,
    pub cost_weeks: f64,
}

/// Uniform lattice over a PHSS. Node ids are row-major over bucket indices,
/// the first dimension varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct StateGraph {
    pub dimensions: Vec<PersonalDimension>,
    pub shape: Vec<usize>,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub rois: Vec<Roi>,
    out: Vec<Vec<usize>>,
}

impl StateGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_id(&self, buckets: &[usize]) -> Option<NodeId> {
        if buckets.len() != self.shape.len() || buckets.iter().zip(&self.shape).any(|(b, n)| b >= n) {
            return None;
        }
        Some(buckets.iter().zip(&self.shape).fold(0, |acc, (b, n)| acc * n + b))
    }

    /// Outgoing edges of `node`.
    pub fn out_edges(&self, node: NodeId) -> impl Iterator<Item = &Edge> {
        self.out[node].iter().map(|&e| &self.edges[e])
    }

    pub fn edge(&self, from: NodeId, to: NodeId) -> Option<&Edge> {
        self.out_edges(from).find(|e| e.to == to)
    }

    pub fn roi_label(&self, node: NodeId) -> Option<&str> {
        self.nodes[node].roi.map(|r| self.rois[r].label.as_str())
    }

    /// Nodes painted with the ROI `label`.
    pub fn roi_nodes(&self, label: &str) -> Result<Vec<NodeId>, StateSpaceError> {
        let idx = self
            .rois
            .iter()
            .position(|r| r.label == label)
            .ok_or_else(|| StateSpaceError::UnknownRoi(label.into()))?;
        Ok(self.nodes.iter().filter(|n| n.roi == Some(idx)).map(|n| n.id).collect())
    }

    pub fn export(&self) -> GraphExport {
        GraphExport {
            dimensions: self
                .dimensions
                .iter()
                .map(|d| DimensionExport {
                    name: d.name().into(),
                    unit: d.spec.unit.clone(),
                    orientation: d.spec.orientation,
                    min: d.min,
                    max: d.max,
                    bucket_count: d.bucket_count(),
                    boundaries: d.boundaries(),
                    provenance: d.provenance.clone(),
                })
                .collect(),
            rois: self.rois.clone(),
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeExport {
                    id: n.id,
                    buckets: n.buckets.clone(),
                    center: n.center.clone(),
                    roi: self.roi_label(n.id).map(str::to_string),
                    neighbors: self
                        .out_edges(n.id)
                        .map(|e| NeighborExport {
                            to: e.to,
                            input_label: e.input_label.clone(),
                            cost_weeks: e.cost_weeks,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionExport {
    pub name: String,
    pub unit: String,
    pub orientation: Orientation,
    pub min: f64,
    pub max: f64,
    pub bucket_count: usize,
    pub boundaries: Vec<f64>,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborExport {
    pub to: NodeId,
    pub input_label: String,
    pub cost_weeks: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeExport {
    pub id: NodeId,
    pub buckets: Vec<usize>,
    pub center: Vec<f64>,
    pub roi: Option<String>,
    pub neighbors: Vec<NeighborExport>,
}

/// Adjacency-list form of a [`StateGraph`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphExport {
    pub dimensions: Vec<DimensionExport>,
    pub rois: Vec<Roi>,
    pub nodes: Vec<NodeExport>,
}

fn unravel(mut id: usize, shape: &[usize]) -> Vec<usize> {
    let mut out = vec![0; shape.len()];
    for (k, n) in shape.iter().enumerate().rev() {
        out[k] = id % n;
        id /= n;
    }
    out
}

/// Buckets of `d` covered by the closed interval `[lo, hi]`: those whose
/// center falls in `[lo, hi)`, or `[lo, hi]` when `hi` is the dimension max.
/// A sliver too thin to hold any center paints the bucket holding its
/// midpoint.
fn covered_buckets(d: &PersonalDimension, lo: f64, hi: f64) -> Vec<bool> {
    let n = d.bucket_count();
    let mut mask: Vec<bool> = (0..n)
        .map(|b| {
            let c = d.center(b);
            lo <= c && (c < hi || (hi >= d.max && c <= hi))
        })
        .collect();
    if !mask.iter().any(|m| *m) {
        mask[d.bucket_of((lo + hi) / 2.0)] = true;
    }
    mask
}

fn move_for(delta: i64, orientation: Orientation) -> Move {
    match (delta.signum(), orientation) {
        (0, _) => Move::Hold,
        (1, Orientation::HigherIsBetter) | (-1, Orientation::LowerIsBetter) => Move::Improve,
        _ => Move::Worsen,
    }
}

/// Cuts the PHSS into its lattice, connects Chebyshev neighbours with the
/// bank's transition rules and paints ROI labels onto nodes.
pub fn discretize_and_label(
    phss: &Phss,
    rois: &[Roi],
    bank: &KnowledgeBank,
) -> Result<StateGraph, StateSpaceError> {
    let dims = &phss.dimensions;
    if dims.is_empty() {
        return Err(StateSpaceError::NoDimensions);
    }
    for d in dims {
        d.spec.validate()?;
        if !(d.min < d.max) {
            return Err(StateSpaceError::InvalidDimension {
                name: d.name().into(),
                reason: "personal bounds are empty".into(),
            });
        }
    }
    let shape: Vec<usize> = dims.iter().map(|d| d.bucket_count()).collect();
    let total: usize = shape.iter().product();

    let masks: Vec<Vec<Vec<bool>>> = rois
        .iter()
        .map(|r| {
            if r.bounds.len() != dims.len() {
                return Err(StateSpaceError::InvalidRoi {
                    label: r.label.clone(),
                    reason: format!("expected {} intervals, got {}", dims.len(), r.bounds.len()),
                });
            }
            Ok(dims
                .iter()
                .zip(&r.bounds)
                .map(|(d, &(lo, hi))| covered_buckets(d, lo, hi))
                .collect())
        })
        .collect::<Result<_, _>>()?;

    let mut overlaps: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut nodes = Vec::with_capacity(total);
    for id in 0..total {
        let buckets = unravel(id, &shape);
        let hits: Vec<usize> = masks
            .iter()
            .enumerate()
            .filter(|(_, m)| m.iter().zip(&buckets).all(|(dm, &b)| dm[b]))
            .map(|(i, _)| i)
            .collect();
        for (k, &a) in hits.iter().enumerate() {
            for &b in &hits[k + 1..] {
                *overlaps.entry((a, b)).or_default() += 1;
            }
        }
        let center = dims.iter().zip(&buckets).map(|(d, &b)| d.center(b)).collect();
        nodes.push(Node { id, buckets, center, roi: hits.first().copied() });
    }
    if let Some((&(a, b), &n)) = overlaps.iter().next() {
        return Err(StateSpaceError::OverlappingRois {
            a: rois[a].label.clone(),
            b: rois[b].label.clone(),
            nodes: n,
        });
    }

    let offsets: Vec<Vec<i64>> = (0..3usize.pow(dims.len() as u32))
        .map(|k| unravel(k, &vec![3; dims.len()]).into_iter().map(|x| x as i64 - 1).collect::<Vec<_>>())
        .filter(|o: &Vec<i64>| o.iter().any(|x| *x != 0))
        .collect();
    let mut rule_cache: HashMap<Vec<i64>, (String, f64)> = HashMap::new();
    for o in &offsets {
        let moves: BTreeMap<String, Move> = dims
            .iter()
            .zip(o)
            .map(|(d, &x)| (d.name().to_string(), move_for(x, d.spec.orientation)))
            .collect();
        let rule = bank.transition(&moves).ok_or_else(|| {
            let desc: Vec<String> = moves.iter().map(|(k, v)| format!("{k}={v:?}")).collect();
            StateSpaceError::MissingTransition(desc.join(","))
        })?;
        rule_cache.insert(o.clone(), (rule.input_label.clone(), rule.cost_weeks));
    }

    let mut edges = Vec::new();
    let mut out = vec![Vec::new(); total];
    for node in &nodes {
        for o in &offsets {
            let target: Option<Vec<usize>> = node
                .buckets
                .iter()
                .zip(o)
                .zip(&shape)
                .map(|((&b, &x), &n)| {
                    let t = b as i64 + x;
                    (0..n as i64).contains(&t).then_some(t as usize)
                })
                .collect();
            let Some(target) = target else { continue };
            let to = target.iter().zip(&shape).fold(0, |acc, (b, n)| acc * n + b);
            let (label, cost) = &rule_cache[o];
            out[node.id].push(edges.len());
            edges.push(Edge { from: node.id, to, input_label: label.clone(), cost_weeks: *cost });
        }
    }

    Ok(StateGraph {
        dimensions: dims.clone(),
        shape,
        nodes,
        edges,
        rois: rois.to_vec(),
        out,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub node: NodeId,
    /// At least one coordinate lay outside the personal bounds.
    pub clamped: bool,
}

/// The node whose bucket contains `coords`. Coordinates outside the
/// personal bounds are clamped onto the boundary and flagged.
pub fn locate(coords: &BTreeMap<String, f64>, graph: &StateGraph) -> Result<Location, StateSpaceError> {
    let mut clamped = false;
    let mut buckets = Vec::with_capacity(graph.dimensions.len());
    for d in &graph.dimensions {
        let x = coords
            .get(d.name())
            .copied()
            .filter(|x| !x.is_nan())
            .ok_or_else(|| StateSpaceError::MissingCoordinate(d.name().into()))?;
        let c = x.clamp(d.min, d.max);
        clamped |= c != x;
        buckets.push(d.bucket_of(c));
    }
    let node = graph.node_id(&buckets).expect("buckets are in range");
    Ok(Location { node, clamped })
}
