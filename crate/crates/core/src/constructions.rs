//! Generators for the extremal drawings, the matching-to-tree augmentation,
//! layer stacking, and the skip-sum upper bound on per-edge crossings.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geom::{crosses, gcd_reduce, LatticePoint, Segment};
use crate::grid_graph::{GraphError, GridGraph, GridSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("block side {k} does not divide grid side {side}")]
    NotDivisible { k: u64, side: u64 },
    #[error("requested {requested} edges but only {available} proper candidates exist")]
    Unreachable { requested: usize, available: usize },
    #[error("input is not a matching: vertex {0} has degree above one")]
    NotMatching(usize),
    #[error("input is not crossing-free: edges {0} and {1} cross")]
    NotCrossingFree(usize, usize),
    #[error("edge {0} does not join the two layers")]
    NotInterLayer(usize),
    #[error("vertex set is not the expected grid: {0}")]
    WrongVertexSet(String),
    #[error("graph for layer pair {layer} uses vertex {point} outside layers {layer} and {}", .layer + 1)]
    OutsideLayerPair { layer: u64, point: LatticePoint },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn check_dims(k: u64, d: usize, min_d: usize) -> Result<(), ConstructionError> {
    if k == 0 {
        return Err(ConstructionError::BadParams("k must be at least 1".into()));
    }
    if d < min_d {
        return Err(ConstructionError::BadParams(format!(
            "dimension must be at least {min_d}"
        )));
    }
    Ok(())
}

/// Vertices of `{1..k}^(d-1) x {1, 2}` and the edges joining every
/// bottom-layer point to every top-layer point (bottom endpoint first).
pub fn layered_complete_bipartite(k: u64, d: usize) -> Result<GridGraph, ConstructionError> {
    check_dims(k, d, 2)?;
    let spec = layered_spec(k, d);
    let vertices = spec.points();
    let (bottom, top): (Vec<usize>, Vec<usize>) =
        (0..vertices.len()).partition(|&i| vertices[i].coords()[d - 1] == 1);
    let edges = bottom
        .iter()
        .flat_map(|&u| top.iter().map(move |&w| (u, w)))
        .collect();
    Ok(GridGraph::new(d, vertices, edges)?)
}

fn layered_spec(k: u64, d: usize) -> GridSpec {
    let mut sides = vec![k; d - 1];
    sides.push(2);
    GridSpec::new(sides).expect("positive sides")
}

/// `(side/k)^(d-1)` box-disjoint copies of the `k`-block bipartite drawing
/// tiling `{1..side}^(d-1) x {1, 2}`.
pub fn tile_bipartite(k: u64, side: u64, d: usize) -> Result<GridGraph, ConstructionError> {
    check_dims(k, d, 3)?;
    if side == 0 || !side.is_multiple_of(k) {
        return Err(ConstructionError::NotDivisible { k, side });
    }
    let block = layered_complete_bipartite(k, d)?;
    let per_axis = side / k;
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    let offsets = GridSpec::new(vec![per_axis; d - 1])
        .expect("positive")
        .points();
    for off in offsets {
        let mut delta: Vec<i64> = off.coords().iter().map(|&c| (c - 1) * k as i64).collect();
        delta.push(0);
        let base = vertices.len();
        vertices.extend(block.vertices().iter().map(|v| v.offset(&delta)));
        edges.extend(block.edges().iter().map(|&(u, w)| (u + base, w + base)));
    }
    Ok(GridGraph::new(d, vertices, edges)?)
}

/// Parameters of the skip-sum bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SkipBoundParams {
    pub k: u64,
    pub d: u32,
}

/// Upper bound on the number of planes through an edge with skip `r`.
fn planes_with_skip(r: u64, d: u32) -> BigInt {
    if d == 3 {
        BigInt::from(4 * r)
    } else {
        BigInt::from(d - 1) * BigInt::from(2 * r + 1).pow(d - 2)
    }
}

/// `Σ_{r=1..k} A_d(r)·(k/r)²` with `A_3(r) = 4r` and
/// `A_d(r) = (d-1)(2r+1)^(d-2)` for `d >= 4`: an upper bound on the number
/// of edges crossing any one edge of [`layered_complete_bipartite`].
pub fn analytic_skip_bound(params: SkipBoundParams) -> Result<BigRational, ConstructionError> {
    let SkipBoundParams { k, d } = params;
    check_dims(k, d as usize, 3)?;
    let kk = BigInt::from(k) * k;
    let mut sum = BigRational::zero();
    for r in 1..=k {
        sum += BigRational::new(planes_with_skip(r, d) * &kk, BigInt::from(r) * r);
    }
    Ok(sum)
}

/// All grid points of `spec` with `m` distinct edges sampled uniformly from
/// the proper candidates (open segment free of grid points). With
/// `primitive_only` the candidates are further restricted to primitive
/// differences; on a full grid box the two conditions coincide.
pub fn random_proper_graph(
    spec: &GridSpec,
    m: usize,
    seed: u64,
    primitive_only: bool,
) -> Result<GridGraph, ConstructionError> {
    let (points, pairs) = spec.proper_pairs();
    let pairs: Vec<(usize, usize)> = if primitive_only {
        pairs
            .into_iter()
            .filter(|&(i, j)| {
                let s = Segment::new(points[i].clone(), points[j].clone()).expect("distinct");
                gcd_reduce(&s).1 == 1
            })
            .collect()
    } else {
        pairs
    };
    if m > pairs.len() {
        return Err(ConstructionError::Unreachable {
            requested: m,
            available: pairs.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = index::sample(&mut rng, pairs.len(), m).into_vec();
    chosen.sort_unstable();
    let edges = chosen.into_iter().map(|i| pairs[i]).collect();
    Ok(GridGraph::new(spec.dim(), points, edges)?)
}

/// A random crossing-free matching between the two layers of
/// `{1..k}^(d-1) x {1, 2}`, built greedily over a shuffled edge order.
pub fn random_crossing_free_matching(
    k: u64,
    d: usize,
    seed: u64,
) -> Result<GridGraph, ConstructionError> {
    let full = layered_complete_bipartite(k, d)?;
    let segs = full.segments();
    let mut order: Vec<usize> = (0..segs.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut used = vec![false; full.vertex_count()];
    let mut chosen: Vec<usize> = Vec::new();
    for e in order {
        let (u, w) = full.edges()[e];
        if used[u] || used[w] {
            continue;
        }
        if chosen
            .iter()
            .any(|&c| crosses(&segs[c], &segs[e]).expect("same dim"))
        {
            continue;
        }
        used[u] = true;
        used[w] = true;
        chosen.push(e);
    }
    chosen.sort_unstable();
    let edges = chosen.into_iter().map(|e| full.edges()[e]).collect();
    Ok(GridGraph::new(d, full.vertices().to_vec(), edges)?)
}

fn check_crossing_free(g: &GridGraph) -> Result<(), ConstructionError> {
    let segs = g.segments();
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            if crosses(&segs[i], &segs[j]).expect("same dim") {
                return Err(ConstructionError::NotCrossingFree(i, j));
            }
        }
    }
    Ok(())
}

/// Extends a crossing-free inter-layer matching on `{1..k}^(d-1) x {1, 2}`
/// to a crossing-free spanning tree containing it.
///
/// All unit edges inside each layer are added after the matching edges;
/// then, while a cycle exists, the lowest-index non-matching edge of the
/// first cycle found by depth-first search is removed.
pub fn augment_matching_to_spanning_tree(
    matching: &GridGraph,
    k: u64,
    d: usize,
) -> Result<GridGraph, ConstructionError> {
    check_dims(k, d, 2)?;
    let spec = layered_spec(k, d);
    if matching.dim() != d {
        return Err(ConstructionError::WrongVertexSet(format!(
            "dimension {} instead of {d}",
            matching.dim()
        )));
    }
    let grid = spec.points();
    let expected: HashSet<&LatticePoint> = grid.iter().collect();
    let actual: HashSet<&LatticePoint> = matching.vertices().iter().collect();
    if actual != expected {
        return Err(ConstructionError::WrongVertexSet(format!(
            "expected the {} points of the {spec} grid, found {} vertices",
            grid.len(),
            matching.vertex_count()
        )));
    }
    let vs = matching.vertices();
    let mut degree = vec![0u32; vs.len()];
    for (e, &(u, w)) in matching.edges().iter().enumerate() {
        let (lu, lw) = (vs[u].coords()[d - 1], vs[w].coords()[d - 1]);
        if lu == lw {
            return Err(ConstructionError::NotInterLayer(e));
        }
        for x in [u, w] {
            degree[x] += 1;
            if degree[x] > 1 {
                return Err(ConstructionError::NotMatching(x));
            }
        }
    }
    check_crossing_free(matching)?;

    let index: HashMap<&LatticePoint, usize> = vs.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let fixed = matching.edge_count();
    let mut edges: Vec<(usize, usize)> = matching.edges().to_vec();
    for (i, v) in vs.iter().enumerate() {
        for axis in 0..d - 1 {
            let mut c = v.coords().to_vec();
            c[axis] += 1;
            if let Some(&j) = index.get(&LatticePoint::new(c)) {
                edges.push((i, j));
            }
        }
    }
    if fixed == 0 {
        // No inter-layer edge: join the layers at the first grid point.
        let mut top = grid[0].coords().to_vec();
        top[d - 1] += 1;
        edges.push((index[&grid[0]], index[&LatticePoint::new(top)]));
    }
    let mut alive = vec![true; edges.len()];
    while let Some(cycle) = find_cycle(vs.len(), &edges, &alive) {
        let victim = cycle
            .into_iter()
            .filter(|&e| e >= fixed)
            .min()
            .expect("a matching is acyclic, so every cycle has a non-matching edge");
        alive[victim] = false;
    }
    let kept = edges
        .into_iter()
        .zip(alive)
        .filter_map(|(e, a)| a.then_some(e))
        .collect();
    Ok(GridGraph::new(d, vs.to_vec(), kept)?)
}

/// Edge indices of the first cycle met by an iterative DFS that visits
/// vertices and incident edges in index order.
fn find_cycle(n: usize, edges: &[(usize, usize)], alive: &[bool]) -> Option<Vec<usize>> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (e, &(u, w)) in edges.iter().enumerate() {
        if alive[e] {
            adj[u].push((w, e));
            adj[w].push((u, e));
        }
    }
    let mut parent_edge: Vec<Option<usize>> = vec![None; n];
    let mut parent: Vec<usize> = vec![usize::MAX; n];
    let mut depth: Vec<usize> = vec![usize::MAX; n];
    for root in 0..n {
        if depth[root] != usize::MAX {
            continue;
        }
        depth[root] = 0;
        let mut stack = vec![(root, 0usize)];
        while let Some(top) = stack.last_mut() {
            let v = top.0;
            if top.1 == adj[v].len() {
                stack.pop();
                continue;
            }
            let (w, e) = adj[v][top.1];
            top.1 += 1;
            if Some(e) == parent_edge[v] {
                continue;
            }
            if depth[w] == usize::MAX {
                depth[w] = depth[v] + 1;
                parent[w] = v;
                parent_edge[w] = Some(e);
                stack.push((w, 0));
            } else if depth[w] < depth[v] {
                // back edge closes a cycle through the tree path w..v
                let mut cycle = vec![e];
                let mut x = v;
                while x != w {
                    cycle.push(parent_edge[x].expect("non-root"));
                    x = parent[x];
                }
                return Some(cycle);
            }
        }
    }
    None
}

/// Union of per-layer-pair graphs on the full `{1..k}^d` grid. Each input
/// is `(i, graph)` where every edge of `graph` joins layer `i` to layer
/// `i + 1` (last coordinate), `1 <= i < k`.
pub fn stack_layer_graphs(
    per_pair: &[(u64, GridGraph)],
    k: u64,
    d: usize,
) -> Result<GridGraph, ConstructionError> {
    check_dims(k, d, 2)?;
    let grid = GridSpec::new(vec![k; d]).expect("positive").points();
    let index: HashMap<&LatticePoint, usize> =
        grid.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    for (layer, g) in per_pair {
        let layer = *layer;
        if layer == 0 || layer >= k {
            return Err(ConstructionError::BadParams(format!(
                "layer pair {layer} outside 1..{k}"
            )));
        }
        if g.dim() != d {
            return Err(ConstructionError::BadParams(format!(
                "graph for layer pair {layer} has dimension {}",
                g.dim()
            )));
        }
        for (e, &(u, w)) in g.edges().iter().enumerate() {
            let mut ends = [0usize; 2];
            let mut lasts = [0i64; 2];
            for (slot, x) in [u, w].into_iter().enumerate() {
                let p = &g.vertices()[x];
                let last = p.coords()[d - 1];
                let id = index
                    .get(p)
                    .copied()
                    .filter(|_| last == layer as i64 || last == layer as i64 + 1);
                ends[slot] = id.ok_or_else(|| ConstructionError::OutsideLayerPair {
                    layer,
                    point: p.clone(),
                })?;
                lasts[slot] = last;
            }
            if lasts[0] == lasts[1] {
                return Err(ConstructionError::NotInterLayer(e));
            }
            if seen.insert((ends[0].min(ends[1]), ends[0].max(ends[1]))) {
                edges.push((ends[0], ends[1]));
            }
        }
    }
    Ok(GridGraph::new(d, grid, edges)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crossings::{count_crossings_naive, per_edge_max};

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn layered_counts() {
        for (k, d, n, m) in [(2, 3, 8, 16), (3, 3, 18, 81), (2, 4, 16, 64), (1, 2, 2, 1)] {
            let g = layered_complete_bipartite(k, d).unwrap();
            assert_eq!((g.vertex_count(), g.edge_count()), (n, m), "k={k} d={d}");
            assert!(g.is_proper());
        }
        assert_eq!(
            layered_complete_bipartite(2, 3)
                .unwrap()
                .compute_volume()
                .unwrap(),
            8u32.into()
        );
        assert!(layered_complete_bipartite(0, 3).is_err());
    }

    #[test]
    fn layered_k2_d3_crossings() {
        let g = layered_complete_bipartite(2, 3).unwrap();
        let rep = count_crossings_naive(&g).unwrap();
        assert_eq!(rep.total, 10);
        assert_eq!(rep.per_edge_max(), 3);
    }

    #[test]
    fn tiling() {
        let g = tile_bipartite(2, 4, 3).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (32, 64));
        assert_eq!(count_crossings_naive(&g).unwrap().total, 40);
        assert_eq!(
            tile_bipartite(3, 3, 3).unwrap(),
            layered_complete_bipartite(3, 3).unwrap()
        );
        let g = tile_bipartite(1, 3, 3).unwrap();
        assert_eq!(g.edge_count(), 9);
        assert_eq!(count_crossings_naive(&g).unwrap().total, 0);
        assert_eq!(
            tile_bipartite(3, 4, 3),
            Err(ConstructionError::NotDivisible { k: 3, side: 4 })
        );
    }

    #[test]
    fn skip_bound_examples() {
        assert_eq!(
            analytic_skip_bound(SkipBoundParams { k: 2, d: 3 }).unwrap(),
            r(24, 1)
        );
        assert_eq!(
            analytic_skip_bound(SkipBoundParams { k: 4, d: 3 }).unwrap(),
            r(400, 3)
        );
        assert_eq!(
            analytic_skip_bound(SkipBoundParams { k: 2, d: 4 }).unwrap(),
            r(183, 1)
        );
        assert!(analytic_skip_bound(SkipBoundParams { k: 2, d: 2 }).is_err());
    }

    #[test]
    fn skip_bound_dominates_small_cases() {
        for k in 1..=4 {
            let g = layered_complete_bipartite(k, 3).unwrap();
            let bound = analytic_skip_bound(SkipBoundParams { k, d: 3 }).unwrap();
            assert!(r(per_edge_max(&g).unwrap() as i64, 1) <= bound, "k={k}");
        }
    }

    #[test]
    fn random_graph_determinism_and_full_candidate_set() {
        let spec = GridSpec::new(vec![3, 3]).unwrap();
        let a = random_proper_graph(&spec, 10, 7, true).unwrap();
        let b = random_proper_graph(&spec, 10, 7, true).unwrap();
        assert_eq!(a, b);
        assert!(a.is_proper());
        let c = random_proper_graph(&spec, 10, 8, true).unwrap();
        assert_ne!(a, c);

        let spec = GridSpec::new(vec![2, 2]).unwrap();
        let g = random_proper_graph(&spec, 6, 1, true).unwrap();
        assert_eq!(g.edge_count(), 6);
        assert!(matches!(
            random_proper_graph(&spec, 7, 1, false),
            Err(ConstructionError::Unreachable {
                requested: 7,
                available: 6
            })
        ));
    }

    #[test]
    fn augment_empty_and_vertical() {
        let base = layered_complete_bipartite(2, 3).unwrap();
        let empty = GridGraph::new(3, base.vertices().to_vec(), vec![]).unwrap();
        let t = augment_matching_to_spanning_tree(&empty, 2, 3).unwrap();
        assert_eq!(t.edge_count(), 7);
        assert_eq!(count_crossings_naive(&t).unwrap().total, 0);

        let vs = base.vertices();
        let vertical: Vec<(usize, usize)> = (0..vs.len())
            .filter(|&i| vs[i].coords()[2] == 1)
            .map(|i| {
                let mut c = vs[i].coords().to_vec();
                c[2] = 2;
                (i, base.index_of(&LatticePoint::new(c)).unwrap())
            })
            .collect();
        let m = GridGraph::new(3, vs.to_vec(), vertical.clone()).unwrap();
        let t = augment_matching_to_spanning_tree(&m, 2, 3).unwrap();
        assert_eq!(t.edge_count(), 7);
        for e in vertical {
            assert!(t.edges().contains(&e));
        }
    }

    #[test]
    fn augment_rejects_bad_inputs() {
        let base = layered_complete_bipartite(2, 3).unwrap();
        // vertex 0 matched twice
        let bad = GridGraph::new(3, base.vertices().to_vec(), base.edges()[..2].to_vec()).unwrap();
        assert!(matches!(
            augment_matching_to_spanning_tree(&bad, 2, 3),
            Err(ConstructionError::NotMatching(_))
        ));
        let wrong = GridGraph::new(3, base.vertices()[..4].to_vec(), vec![]).unwrap();
        assert!(matches!(
            augment_matching_to_spanning_tree(&wrong, 2, 3),
            Err(ConstructionError::WrongVertexSet(_))
        ));
        // two crossing main diagonals: (1,1,1)-(2,2,2) and (2,2,1)-(1,1,2)
        let vs = base.vertices();
        let idx = |c: [i64; 3]| base.index_of(&LatticePoint::from(c)).unwrap();
        let crossing = GridGraph::new(
            3,
            vs.to_vec(),
            vec![
                (idx([1, 1, 1]), idx([2, 2, 2])),
                (idx([2, 2, 1]), idx([1, 1, 2])),
            ],
        )
        .unwrap();
        assert!(matches!(
            augment_matching_to_spanning_tree(&crossing, 2, 3),
            Err(ConstructionError::NotCrossingFree(0, 1))
        ));
        let in_layer =
            GridGraph::new(3, vs.to_vec(), vec![(idx([1, 1, 1]), idx([1, 2, 1]))]).unwrap();
        assert!(matches!(
            augment_matching_to_spanning_tree(&in_layer, 2, 3),
            Err(ConstructionError::NotInterLayer(0))
        ));
    }

    #[test]
    fn find_cycle_on_triangle_with_tail() {
        let edges = [(0, 1), (1, 2), (2, 0), (2, 3)];
        let mut c = find_cycle(4, &edges, &[true; 4]).unwrap();
        c.sort();
        assert_eq!(c, vec![0, 1, 2]);
        assert!(find_cycle(4, &edges, &[true, false, true, true]).is_none());
    }

    #[test]
    fn stacking() {
        let empty = stack_layer_graphs(&[], 3, 4).unwrap();
        assert_eq!(empty.vertex_count(), 81);
        assert_eq!(empty.edge_count(), 0);

        let m = random_crossing_free_matching(3, 4, 5).unwrap();
        let single = stack_layer_graphs(&[(1, m.clone())], 3, 4).unwrap();
        let mut original: Vec<(LatticePoint, LatticePoint)> = m
            .edges()
            .iter()
            .map(|&(u, w)| (m.vertices()[u].clone(), m.vertices()[w].clone()))
            .collect();
        let mut embedded: Vec<(LatticePoint, LatticePoint)> = single
            .edges()
            .iter()
            .map(|&(u, w)| (single.vertices()[u].clone(), single.vertices()[w].clone()))
            .collect();
        original.sort();
        embedded.sort();
        assert_eq!(original, embedded);

        // a graph for layers (1,2) presented as pair 2
        assert!(matches!(
            stack_layer_graphs(&[(2, m)], 3, 4),
            Err(ConstructionError::OutsideLayerPair { layer: 2, .. })
        ));
    }

    #[test]
    fn random_matching_is_crossing_free_matching() {
        for seed in 0..5 {
            let m = random_crossing_free_matching(3, 3, seed).unwrap();
            assert_eq!(count_crossings_naive(&m).unwrap().total, 0);
            let mut deg = vec![0; m.vertex_count()];
            for &(u, w) in m.edges() {
                deg[u] += 1;
                deg[w] += 1;
            }
            assert!(deg.iter().all(|&x| x <= 1));
            assert!(m.edge_count() > 0);
        }
    }
}
