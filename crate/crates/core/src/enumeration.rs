//! Exact counts of crossing-free edge sets on small grids.
//!
//! Candidate edges are the grid-point pairs whose open segment avoids every
//! grid point. Two candidates conflict when their open segments meet, so
//! crossing-free graphs are exactly the independent sets of the conflict
//! graph. Node sets are `u64` bitmasks, which is where the 64-candidate cap
//! comes from.

use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use thiserror::Error;

use crate::geom::{crosses, Segment};
use crate::grid_graph::GridSpec;

pub const DEFAULT_CANDIDATE_CAP: usize = 64;
pub const SPANNING_TREE_VOLUME_CAP: u64 = 9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumError {
    #[error("{what} is {found}, above the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        found: u64,
        cap: u64,
    },
    #[error("invalid argument: {0}")]
    BadArgument(String),
}

/// Arbitrary-precision natural count.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BigCount(pub BigUint);

impl BigCount {
    pub fn value(&self) -> &BigUint {
        &self.0
    }
}

impl fmt::Display for BigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u128> for BigCount {
    fn from(v: u128) -> Self {
        BigCount(BigUint::from(v))
    }
}

/// Candidate edges and their pairwise conflicts.
#[derive(Clone, Debug)]
pub struct ConflictGraph {
    candidates: Vec<Segment>,
    adj: Vec<u64>,
}

impl ConflictGraph {
    /// Conflict graph over arbitrary distinct segments (at most 64).
    pub fn from_segments(candidates: Vec<Segment>) -> Result<Self, EnumError> {
        Self::from_segments_capped(candidates, DEFAULT_CANDIDATE_CAP)
    }

    fn from_segments_capped(mut candidates: Vec<Segment>, cap: usize) -> Result<Self, EnumError> {
        let cap = cap.min(DEFAULT_CANDIDATE_CAP);
        let mut seen = std::collections::HashSet::new();
        candidates.retain(|s| {
            let (a, b) = (s.a().clone(), s.b().clone());
            seen.insert(if a <= b { (a, b) } else { (b, a) })
        });
        if candidates.len() > cap {
            return Err(EnumError::CapExceeded {
                what: "candidate count",
                found: candidates.len() as u64,
                cap: cap as u64,
            });
        }
        if let Some(s) = candidates.iter().find(|s| s.dim() != candidates[0].dim()) {
            return Err(EnumError::BadArgument(format!("mixed dimensions at {s:?}")));
        }
        let n = candidates.len();
        let mut adj = vec![0u64; n];
        for i in 0..n {
            for j in i + 1..n {
                if crosses(&candidates[i], &candidates[j]).expect("same dimension") {
                    adj[i] |= 1 << j;
                    adj[j] |= 1 << i;
                }
            }
        }
        Ok(ConflictGraph { candidates, adj })
    }

    /// Restriction to the candidates selected by `keep`, in order.
    pub fn induced(&self, keep: &[usize]) -> ConflictGraph {
        let adj = keep
            .iter()
            .map(|&i| {
                keep.iter()
                    .enumerate()
                    .filter(|&(_, &j)| self.adj[i] >> j & 1 == 1)
                    .fold(0u64, |acc, (x, _)| acc | 1 << x)
            })
            .collect();
        ConflictGraph {
            candidates: keep.iter().map(|&i| self.candidates[i].clone()).collect(),
            adj,
        }
    }

    pub fn candidates(&self) -> &[Segment] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Neighbour bitmask of candidate `i`.
    pub fn neighbours(&self, i: usize) -> u64 {
        self.adj[i]
    }

    pub fn conflicts(&self, i: usize, j: usize) -> bool {
        self.adj[i] >> j & 1 == 1
    }

    pub fn conflict_pairs(&self) -> usize {
        self.adj
            .iter()
            .map(|a| a.count_ones() as usize)
            .sum::<usize>()
            / 2
    }

    fn full_mask(&self) -> u64 {
        match self.candidates.len() {
            64 => u64::MAX,
            n => (1u64 << n) - 1,
        }
    }

    /// Adds adjacency between candidates sharing an endpoint.
    fn with_endpoint_conflicts(&self) -> ConflictGraph {
        let mut adj = self.adj.clone();
        let n = self.len();
        for i in 0..n {
            for j in i + 1..n {
                if self.candidates[i].shares_endpoint(&self.candidates[j]) {
                    adj[i] |= 1 << j;
                    adj[j] |= 1 << i;
                }
            }
        }
        ConflictGraph {
            candidates: self.candidates.clone(),
            adj,
        }
    }
}

/// Candidates are the grid-point pairs whose open segment contains no grid
/// point of `spec`.
pub fn build_conflict_graph(spec: &GridSpec) -> Result<ConflictGraph, EnumError> {
    build_conflict_graph_capped(spec, DEFAULT_CANDIDATE_CAP)
}

pub fn build_conflict_graph_capped(
    spec: &GridSpec,
    cap: usize,
) -> Result<ConflictGraph, EnumError> {
    // cheap pre-check so huge grids fail before the quadratic pair scan
    let vol = spec.volume_u64().unwrap_or(u64::MAX);
    if vol > 2 * DEFAULT_CANDIDATE_CAP as u64 {
        return Err(EnumError::CapExceeded {
            what: "grid volume for enumeration",
            found: vol,
            cap: 2 * DEFAULT_CANDIDATE_CAP as u64,
        });
    }
    let (pts, pairs) = spec.proper_pairs();
    let segs = pairs
        .into_iter()
        .map(|(i, j)| Segment::new(pts[i].clone(), pts[j].clone()).expect("distinct points"))
        .collect();
    ConflictGraph::from_segments_capped(segs, cap)
}

fn components(mask: u64, adj: &[u64]) -> Vec<u64> {
    let mut rest = mask;
    let mut out = Vec::new();
    while rest != 0 {
        let start = rest & rest.wrapping_neg();
        let mut comp = start;
        let mut frontier = start;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let new = adj[v] & mask & !comp;
            comp |= new;
            frontier |= new;
        }
        out.push(comp);
        rest &= !comp;
    }
    out
}

/// Node of `mask` with the most neighbours inside `mask` (lowest index on ties).
fn max_degree_node(mask: u64, adj: &[u64]) -> (usize, u32) {
    let mut best = (usize::MAX, 0u32);
    let mut rest = mask;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let deg = (adj[v] & mask).count_ones();
        if best.0 == usize::MAX || deg > best.1 {
            best = (v, deg);
        }
    }
    best
}

struct IndependentSetCounter<'a> {
    adj: &'a [u64],
    memo: HashMap<u64, u128>,
}

impl IndependentSetCounter<'_> {
    fn count(&mut self, mask: u64) -> u128 {
        components(mask, self.adj)
            .into_iter()
            .map(|c| self.count_connected(c))
            .product()
    }

    fn count_connected(&mut self, comp: u64) -> u128 {
        if comp.count_ones() == 1 {
            return 2;
        }
        if let Some(&c) = self.memo.get(&comp) {
            return c;
        }
        let (v, _) = max_degree_node(comp, self.adj);
        let bit = 1u64 << v;
        let without = self.count(comp & !bit);
        let with = self.count(comp & !bit & !self.adj[v]);
        let total = without + with;
        self.memo.insert(comp, total);
        total
    }
}

fn count_independent_sets(cg: &ConflictGraph) -> u128 {
    let mut counter = IndependentSetCounter {
        adj: &cg.adj,
        memo: HashMap::new(),
    };
    counter.count(cg.full_mask())
}

/// Number of conflict-free candidate subsets, the empty set included.
pub fn count_crossing_free_subgraphs(cg: &ConflictGraph) -> Result<BigCount, EnumError> {
    check_cap(cg)?;
    Ok(count_independent_sets(cg).into())
}

/// Number of conflict-free candidate subsets in which no two edges share an
/// endpoint, the empty matching included.
pub fn count_crossing_free_matchings(cg: &ConflictGraph) -> Result<BigCount, EnumError> {
    check_cap(cg)?;
    Ok(count_independent_sets(&cg.with_endpoint_conflicts()).into())
}

fn check_cap(cg: &ConflictGraph) -> Result<(), EnumError> {
    if cg.len() > DEFAULT_CANDIDATE_CAP {
        return Err(EnumError::CapExceeded {
            what: "candidate count",
            found: cg.len() as u64,
            cap: DEFAULT_CANDIDATE_CAP as u64,
        });
    }
    Ok(())
}

struct MaxIndependentSet<'a> {
    adj: &'a [u64],
    memo: HashMap<u64, u32>,
}

impl MaxIndependentSet<'_> {
    fn solve(&mut self, mask: u64) -> u32 {
        components(mask, self.adj)
            .into_iter()
            .map(|c| self.solve_connected(c))
            .sum()
    }

    fn solve_connected(&mut self, comp: u64) -> u32 {
        if comp.count_ones() <= 1 {
            return comp.count_ones();
        }
        if let Some(&c) = self.memo.get(&comp) {
            return c;
        }
        // A node of degree <= 1 lies in some maximum independent set.
        let mut rest = comp;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if (self.adj[v] & comp).count_ones() <= 1 {
                let best = 1 + self.solve(comp & !(1u64 << v) & !self.adj[v]);
                self.memo.insert(comp, best);
                return best;
            }
        }
        let (v, _) = max_degree_node(comp, self.adj);
        let bit = 1u64 << v;
        let with = 1 + self.solve(comp & !bit & !self.adj[v]);
        // Bound: dropping v can only win if the rest can beat `with`.
        let best = if (comp & !bit).count_ones() > with {
            with.max(self.solve(comp & !bit))
        } else {
            with
        };
        self.memo.insert(comp, best);
        best
    }
}

/// Size of a maximum conflict-free candidate set.
pub fn max_crossing_free_edges(spec: &GridSpec) -> Result<u64, EnumError> {
    let cg = build_conflict_graph(spec)?;
    Ok(max_independent_set(&cg) as u64)
}

pub fn max_independent_set(cg: &ConflictGraph) -> u32 {
    let mut s = MaxIndependentSet {
        adj: &cg.adj,
        memo: HashMap::new(),
    };
    s.solve(cg.full_mask())
}

/// `Π(2X_i - 1) - ΠX_i`.
pub fn bose_formula(spec: &GridSpec) -> BigUint {
    let odd = spec
        .sides()
        .iter()
        .fold(BigUint::one(), |acc, &x| acc * BigUint::from(2 * x - 1));
    odd - spec.volume()
}

/// Number of spanning trees of the candidate graph of `spec` that use no
/// conflicting pair, by depth-first inclusion/exclusion over candidates.
pub fn count_crossing_free_spanning_trees(spec: &GridSpec) -> Result<BigCount, EnumError> {
    let vol = spec.volume_u64().unwrap_or(u64::MAX);
    if vol > SPANNING_TREE_VOLUME_CAP {
        return Err(EnumError::CapExceeded {
            what: "grid volume for spanning trees",
            found: vol,
            cap: SPANNING_TREE_VOLUME_CAP,
        });
    }
    let cg = build_conflict_graph(spec)?;
    let pts = spec.points();
    let index: HashMap<_, _> = pts.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let ends: Vec<(usize, usize)> = cg
        .candidates()
        .iter()
        .map(|s| (index[s.a()], index[s.b()]))
        .collect();
    let mut search = TreeSearch {
        n: pts.len(),
        ends: &ends,
        adj: &cg.adj,
        count: 0,
    };
    let parent: Vec<usize> = (0..pts.len()).collect();
    search.run(0, 0, 0, &parent);
    Ok(search.count.into())
}

struct TreeSearch<'a> {
    n: usize,
    ends: &'a [(usize, usize)],
    adj: &'a [u64],
    count: u128,
}

fn find(parent: &[usize], mut x: usize) -> usize {
    while parent[x] != x {
        x = parent[x];
    }
    x
}

impl TreeSearch<'_> {
    fn run(&mut self, next: usize, chosen: u64, size: usize, parent: &[usize]) {
        if size + 1 == self.n {
            self.count += 1;
            return;
        }
        if self.n <= 1 {
            self.count += 1;
            return;
        }
        if self.ends.len() - next < self.n - 1 - size {
            return;
        }
        let (u, w) = self.ends[next];
        if self.adj[next] & chosen == 0 {
            let (ru, rw) = (find(parent, u), find(parent, w));
            if ru != rw {
                let mut p = parent.to_vec();
                p[ru] = rw;
                self.run(next + 1, chosen | 1 << next, size + 1, &p);
            }
        }
        self.run(next + 1, chosen, size, parent);
    }
}

/// With `B = (2^d - 1)N`, `M = C(N, 2)` and `B' = min(B, M)`:
/// `2^B' · C(M, B')`.
pub fn ncs_upper_formula(n: &BigUint, d: u32) -> Result<BigCount, EnumError> {
    if *n < BigUint::from(2u32) {
        return Err(EnumError::BadArgument("N must be at least 2".into()));
    }
    let b = ((BigUint::one() << d as usize) - 1u32) * n;
    let m = n * (n - 1u32) / 2u32;
    let bp = b.min(m.clone());
    let bp_small = bp
        .to_usize()
        .ok_or_else(|| EnumError::BadArgument("edge budget too large to evaluate".into()))?;
    Ok(BigCount((BigUint::one() << bp_small) * binomial(m, bp)))
}

/// `(floor(cN))^floor(N / (2c))`.
pub fn ncs_lower_formula(n: &BigUint, c: &BigRational) -> Result<BigCount, EnumError> {
    if !c.is_positive() {
        return Err(EnumError::BadArgument("c must be positive".into()));
    }
    let nq = BigRational::from_integer(BigInt::from(n.clone()));
    let base = (c * &nq).floor().to_integer();
    if base < BigInt::one() {
        return Err(EnumError::BadArgument("cN must be at least 1".into()));
    }
    let exp = (nq / (c * BigRational::from_integer(2.into())))
        .floor()
        .to_integer();
    let exp = exp
        .to_u32()
        .ok_or_else(|| EnumError::BadArgument("exponent too large".into()))?;
    let base = base.to_biguint().expect("positive");
    Ok(BigCount(num_traits::pow(base, exp as usize)))
}
