//! Geometric grid graphs: vertices on the integer lattice, edges drawn as
//! open straight segments.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{
    gcd_reduce, interior_lattice_points, lattice_point_on_open_segment, LatticePoint, Segment,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("malformed graph document at line {line}, column {column}: {message}")]
    Malformed {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("vertex {index} has {found} coordinates, expected {dim}")]
    VertexDimension {
        index: usize,
        found: usize,
        dim: usize,
    },
    #[error("duplicate vertex {point}: indices {first} and {second}")]
    DuplicateVertex {
        point: LatticePoint,
        first: usize,
        second: usize,
    },
    #[error("edge {edge} references vertex {vertex}, but there are only {count} vertices")]
    IndexOutOfRange {
        edge: usize,
        vertex: usize,
        count: usize,
    },
    #[error("edge {edge} is a self-loop on vertex {vertex}")]
    SelfLoop { edge: usize, vertex: usize },
    #[error("edge {edge} duplicates edge {first} ({u}, {v})")]
    DuplicateEdge {
        edge: usize,
        first: usize,
        u: usize,
        v: usize,
    },
    #[error("graph has no vertices")]
    Empty,
    #[error("grid sides must be positive, got {0:?}")]
    BadGridSpec(Vec<u64>),
    #[error("cannot read grid {0:?}; expected sides joined by 'x', e.g. 3x3x2")]
    BadGridText(String),
}

/// The box `{1..X_1} x ... x {1..X_d}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GridSpec {
    sides: Vec<u64>,
}

impl GridSpec {
    pub fn new(sides: Vec<u64>) -> Result<Self, GraphError> {
        if sides.is_empty() || sides.contains(&0) {
            return Err(GraphError::BadGridSpec(sides));
        }
        Ok(GridSpec { sides })
    }

    pub fn sides(&self) -> &[u64] {
        &self.sides
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn volume(&self) -> BigUint {
        self.sides
            .iter()
            .fold(BigUint::one(), |acc, &x| acc * BigUint::from(x))
    }

    /// Volume as a machine integer, if it fits.
    pub fn volume_u64(&self) -> Option<u64> {
        self.sides
            .iter()
            .try_fold(1u64, |acc, &x| acc.checked_mul(x))
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        p.dim() == self.dim()
            && p.coords()
                .iter()
                .zip(&self.sides)
                .all(|(&c, &x)| c >= 1 && (c as u64) <= x)
    }

    /// All grid points in lexicographic order (first coordinate slowest).
    pub fn points(&self) -> Vec<LatticePoint> {
        let mut out = vec![Vec::with_capacity(self.dim())];
        for &side in &self.sides {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (1..=side as i64).map(move |c| {
                        let mut p = prefix.clone();
                        p.push(c);
                        p
                    })
                })
                .collect();
        }
        out.into_iter().map(LatticePoint::new).collect()
    }

    /// Pairs `(i, j)`, `i < j`, of grid points (indices into [`points`])
    /// whose open segment contains no point of the grid. On a full box this
    /// is the same as primitivity of the difference vector.
    ///
    /// [`points`]: GridSpec::points
    pub fn proper_pairs(&self) -> (Vec<LatticePoint>, Vec<(usize, usize)>) {
        let pts = self.points();
        let mut pairs = Vec::new();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let s = Segment::new(pts[i].clone(), pts[j].clone()).expect("distinct points");
                if gcd_reduce(&s).1 == 1 {
                    pairs.push((i, j));
                }
            }
        }
        (pts, pairs)
    }
}

impl FromStr for GridSpec {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let sides = s
            .split('x')
            .map(|t| t.trim().parse::<u64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| GraphError::BadGridText(s.to_string()))?;
        GridSpec::new(sides)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sides.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join("x"))
    }
}

/// A geometric grid graph. Vertices are distinct, edges are distinct
/// unordered pairs without self-loops. The stored orientation of an edge is
/// kept (it names the anchor endpoint for [`GridGraph::reduce_edges`]).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridGraph {
    dim: usize,
    vertices: Vec<LatticePoint>,
    edges: Vec<(usize, usize)>,
}

/// One `(edge, vertex)` pair where the vertex lies on the open edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProperViolation {
    pub edge: usize,
    pub vertex: usize,
}

impl fmt::Display for ProperViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "vertex {} lies on edge {}", self.vertex, self.edge)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDocument {
    dim: usize,
    vertices: Vec<Vec<i64>>,
    edges: Vec<[usize; 2]>,
}

impl GridGraph {
    pub fn new(
        dim: usize,
        vertices: Vec<LatticePoint>,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self, GraphError> {
        if dim == 0 {
            return Err(GraphError::ZeroDimension);
        }
        let mut seen: HashMap<&LatticePoint, usize> = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if v.dim() != dim {
                return Err(GraphError::VertexDimension {
                    index: i,
                    found: v.dim(),
                    dim,
                });
            }
            if let Some(&first) = seen.get(v) {
                return Err(GraphError::DuplicateVertex {
                    point: v.clone(),
                    first,
                    second: i,
                });
            }
            seen.insert(v, i);
        }
        let n = vertices.len();
        let mut seen_edges: HashMap<(usize, usize), usize> = HashMap::with_capacity(edges.len());
        for (e, &(u, v)) in edges.iter().enumerate() {
            for x in [u, v] {
                if x >= n {
                    return Err(GraphError::IndexOutOfRange {
                        edge: e,
                        vertex: x,
                        count: n,
                    });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop { edge: e, vertex: u });
            }
            let key = (u.min(v), u.max(v));
            if let Some(&first) = seen_edges.get(&key) {
                return Err(GraphError::DuplicateEdge {
                    edge: e,
                    first,
                    u,
                    v,
                });
            }
            seen_edges.insert(key, e);
        }
        Ok(GridGraph {
            dim,
            vertices,
            edges,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[LatticePoint] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn segment(&self, e: usize) -> Segment {
        let (u, v) = self.edges[e];
        Segment::new(self.vertices[u].clone(), self.vertices[v].clone())
            .expect("validated graph has no self-loops")
    }

    pub fn segments(&self) -> Vec<Segment> {
        (0..self.edges.len()).map(|e| self.segment(e)).collect()
    }

    pub fn index_of(&self, p: &LatticePoint) -> Option<usize> {
        self.vertices.iter().position(|v| v == p)
    }

    /// Every `(edge, vertex)` pair with the vertex on the open edge, sorted.
    pub fn validate_proper(&self) -> Vec<ProperViolation> {
        let index: HashMap<&LatticePoint, usize> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v, i))
            .collect();
        let mut out = Vec::new();
        for e in 0..self.edges.len() {
            let seg = self.segment(e);
            let (_, g) = gcd_reduce(&seg);
            if g == 1 {
                continue;
            }
            if ((g - 1) as usize) <= self.vertices.len() {
                for p in interior_lattice_points(&seg) {
                    if let Some(&x) = index.get(&p) {
                        out.push(ProperViolation { edge: e, vertex: x });
                    }
                }
            } else {
                for (x, p) in self.vertices.iter().enumerate() {
                    if lattice_point_on_open_segment(p, &seg) {
                        out.push(ProperViolation { edge: e, vertex: x });
                    }
                }
            }
        }
        out.sort_by_key(|v| (v.edge, v.vertex));
        out
    }

    pub fn is_proper(&self) -> bool {
        self.validate_proper().is_empty()
    }

    /// Volume of the bounding grid after translating its minimum corner to
    /// `(1, ..., 1)`.
    pub fn compute_volume(&self) -> Result<BigUint, GraphError> {
        let (lo, hi) = self.bounding_box().ok_or(GraphError::Empty)?;
        Ok(lo.iter().zip(&hi).fold(BigUint::one(), |acc, (&l, &h)| {
            acc * BigUint::from((h as i128 - l as i128 + 1) as u128)
        }))
    }

    /// Componentwise `(min, max)` over all vertices.
    pub fn bounding_box(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        let first = self.vertices.first()?;
        let mut lo = first.coords().to_vec();
        let mut hi = lo.clone();
        for v in &self.vertices[1..] {
            for (i, &c) in v.coords().iter().enumerate() {
                lo[i] = lo[i].min(c);
                hi[i] = hi[i].max(c);
            }
        }
        Some((lo, hi))
    }

    /// Same graph with every vertex shifted by `delta`.
    pub fn translate(&self, delta: &[i64]) -> GridGraph {
        assert_eq!(delta.len(), self.dim, "translation dimension");
        GridGraph {
            dim: self.dim,
            vertices: self.vertices.iter().map(|v| v.offset(delta)).collect(),
            edges: self.edges.clone(),
        }
    }

    /// Replaces each edge `uw` by the primitive edge from its anchor `u`
    /// towards `w`, adding the new endpoint as a vertex when needed. Edges
    /// that collapse onto an existing one are dropped. The result may have a
    /// different crossing count than `self`.
    pub fn reduce_edges(&self) -> GridGraph {
        let mut vertices = self.vertices.clone();
        let mut index: HashMap<LatticePoint, usize> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        let mut seen = HashSet::new();
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in 0..self.edges.len() {
            let (u, _) = self.edges[e];
            let (dir, _) = gcd_reduce(&self.segment(e));
            let target = vertices[u].offset(dir.coords());
            let w = *index.entry(target.clone()).or_insert_with(|| {
                vertices.push(target);
                vertices.len() - 1
            });
            if seen.insert((u.min(w), u.max(w))) {
                edges.push((u, w));
            }
        }
        GridGraph {
            dim: self.dim,
            vertices,
            edges,
        }
    }

    /// Parses the JSON wire format
    /// `{"dim": d, "vertices": [[..], ..], "edges": [[i, j], ..]}`.
    pub fn parse(text: &str) -> Result<GridGraph, GraphError> {
        let doc: GraphDocument = serde_json::from_str(text).map_err(|e| GraphError::Malformed {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        GridGraph::new(
            doc.dim,
            doc.vertices.into_iter().map(LatticePoint::new).collect(),
            doc.edges.into_iter().map(|[u, v]| (u, v)).collect(),
        )
    }

    /// Compact canonical JSON; `parse(serialize(g)) == g`.
    pub fn serialize(&self) -> String {
        let doc = GraphDocument {
            dim: self.dim,
            vertices: self.vertices.iter().map(|v| v.coords().to_vec()).collect(),
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
        };
        serde_json::to_string(&doc).expect("graph documents always serialize")
    }

    /// Union with another graph over the same dimension; vertices are merged
    /// by position and duplicate edges are dropped.
    pub fn union(&self, other: &GridGraph) -> Result<GridGraph, GraphError> {
        if other.dim != self.dim {
            return Err(GraphError::VertexDimension {
                index: 0,
                found: other.dim,
                dim: self.dim,
            });
        }
        let mut vertices = self.vertices.clone();
        let mut index: HashMap<LatticePoint, usize> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        let remap: Vec<usize> = other
            .vertices
            .iter()
            .map(|v| {
                *index.entry(v.clone()).or_insert_with(|| {
                    vertices.push(v.clone());
                    vertices.len() - 1
                })
            })
            .collect();
        let mut seen: HashSet<(usize, usize)> = self
            .edges
            .iter()
            .map(|&(u, v)| (u.min(v), u.max(v)))
            .collect();
        let mut edges = self.edges.clone();
        for &(u, v) in &other.edges {
            let (a, b) = (remap[u], remap[v]);
            if seen.insert((a.min(b), a.max(b))) {
                edges.push((a, b));
            }
        }
        GridGraph::new(self.dim, vertices, edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[&[i64]]) -> Vec<LatticePoint> {
        v.iter().map(|c| LatticePoint::new(c.to_vec())).collect()
    }

    #[test]
    fn improper_edge_is_reported() {
        let g = GridGraph::new(2, pts(&[&[1, 1], &[2, 2], &[3, 3]]), vec![(0, 2)]).unwrap();
        assert_eq!(
            g.validate_proper(),
            vec![ProperViolation { edge: 0, vertex: 1 }]
        );
    }

    #[test]
    fn long_edge_uses_vertex_scan() {
        let g = GridGraph::new(2, pts(&[&[0, 0], &[100, 0], &[37, 0]]), vec![(0, 1)]).unwrap();
        assert_eq!(
            g.validate_proper(),
            vec![ProperViolation { edge: 0, vertex: 2 }]
        );
    }

    #[test]
    fn empty_edge_set_is_proper() {
        let g = GridGraph::new(2, pts(&[&[1, 1], &[2, 2], &[3, 3]]), vec![]).unwrap();
        assert!(g.validate_proper().is_empty());
    }

    #[test]
    fn volume_examples() {
        let g = GridGraph::new(3, pts(&[&[1, 1, 1], &[3, 2, 1]]), vec![]).unwrap();
        assert_eq!(g.compute_volume().unwrap(), BigUint::from(6u32));
        let g = GridGraph::new(2, pts(&[&[-7, 4]]), vec![]).unwrap();
        assert_eq!(g.compute_volume().unwrap(), BigUint::from(1u32));
        let g = GridGraph::new(2, vec![], vec![]).unwrap();
        assert_eq!(g.compute_volume(), Err(GraphError::Empty));
    }

    #[test]
    fn parse_small_document() {
        let g = GridGraph::parse(r#"{"dim":2,"vertices":[[1,1],[2,2]],"edges":[[0,1]]}"#).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edges(), &[(0, 1)]);
        assert_eq!(
            g.serialize(),
            r#"{"dim":2,"vertices":[[1,1],[2,2]],"edges":[[0,1]]}"#
        );
    }

    #[test]
    fn parse_errors_name_the_problem() {
        let e = GridGraph::parse(r#"{"dim":2,"vertices":[[1,1],[1,1]],"edges":[]}"#).unwrap_err();
        assert!(matches!(
            e,
            GraphError::DuplicateVertex {
                first: 0,
                second: 1,
                ..
            }
        ));
        assert!(e.to_string().contains("(1,1)"));

        let e = GridGraph::parse(r#"{"dim":2,"vertices":[[1,1]],"edges":[[0,3]]}"#).unwrap_err();
        assert_eq!(
            e,
            GraphError::IndexOutOfRange {
                edge: 0,
                vertex: 3,
                count: 1
            }
        );

        let e = GridGraph::parse(r#"{"dim":2,"vertices":[[1,1]],"edges":[[0,0]]}"#).unwrap_err();
        assert_eq!(e, GraphError::SelfLoop { edge: 0, vertex: 0 });

        let e = GridGraph::parse(r#"{"dim":2,"vertices":[[1,1],[1,2]],"edges":[[0,1],[1,0]]}"#)
            .unwrap_err();
        assert!(matches!(
            e,
            GraphError::DuplicateEdge {
                edge: 1,
                first: 0,
                ..
            }
        ));

        let e = GridGraph::parse(r#"{"dim":2,"vertices":[[1,1,1]],"edges":[]}"#).unwrap_err();
        assert!(matches!(
            e,
            GraphError::VertexDimension {
                index: 0,
                found: 3,
                dim: 2
            }
        ));

        let e = GridGraph::parse("{\"dim\":2,\n\"vertices\":[[1,1]],\n\"edges\":[[0,1,]]}")
            .unwrap_err();
        assert!(matches!(e, GraphError::Malformed { line: 3, .. }));
    }

    #[test]
    fn reduce_edges_shortens_from_anchor() {
        let g = GridGraph::new(2, pts(&[&[1, 1], &[4, 7], &[2, 3]]), vec![(0, 1)]).unwrap();
        let r = g.reduce_edges();
        assert_eq!(r.edge_count(), 1);
        let (u, w) = r.edges()[0];
        assert_eq!(r.vertices()[u], LatticePoint::from([1, 1]));
        assert_eq!(r.vertices()[w], LatticePoint::from([2, 3]));
        assert_eq!(r.vertex_count(), 3);

        let g = GridGraph::new(2, pts(&[&[0, 0], &[0, 2]]), vec![(1, 0)]).unwrap();
        let r = g.reduce_edges();
        assert_eq!(r.vertex_count(), 3);
        assert_eq!(r.vertices()[2], LatticePoint::from([0, 1]));
        assert!(r.is_proper());
    }

    #[test]
    fn grid_points_and_pairs() {
        let spec = GridSpec::new(vec![2, 2]).unwrap();
        assert_eq!(spec.points().len(), 4);
        assert_eq!(spec.proper_pairs().1.len(), 6);
        let spec = GridSpec::new(vec![1, 3]).unwrap();
        assert_eq!(spec.proper_pairs().1, vec![(0, 1), (1, 2)]);
        assert!(GridSpec::new(vec![2, 0]).is_err());
        assert_eq!("3x3x2".parse::<GridSpec>().unwrap().sides(), &[3, 3, 2]);
        assert_eq!("3x3x2".parse::<GridSpec>().unwrap().to_string(), "3x3x2");
        assert!("3by3".parse::<GridSpec>().is_err());
        assert!("3x0".parse::<GridSpec>().is_err());
    }
}
