//! Exact crossing counts and lower-bound certificates.
//!
//! [`count_crossings_naive`] tests every edge pair and is the reference.
//! [`count_crossings_pruned`] must agree with it on every input; it only
//! skips pairs that provably cannot meet.

use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::geom::{crosses, gcd_reduce, segments_cross, CrossKind, RationalPoint, Segment};
use crate::grid_graph::{GridGraph, ProperViolation};
use crate::numtheory::edge_pgrid_points;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CrossingError {
    #[error("graph is not proper: {}", summarize(.0))]
    Improper(Vec<ProperViolation>),
    #[error("edge {edge} is not primitive (gcd {gcd}); reduce edges first")]
    NonPrimitive { edge: usize, gcd: u64 },
    #[error("edges {0} and {1} overlap collinearly")]
    CollinearOverlap(usize, usize),
    #[error("p_max must be at least 1")]
    ZeroPMax,
    #[error("volume must be at least 1")]
    ZeroVolume,
}

fn summarize(v: &[ProperViolation]) -> String {
    let shown: Vec<String> = v.iter().take(5).map(|x| x.to_string()).collect();
    if v.len() > 5 {
        format!("{} (and {} more)", shown.join("; "), v.len() - 5)
    } else {
        shown.join("; ")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMethod {
    Naive,
    Pruned,
}

impl fmt::Display for CountMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountMethod::Naive => "naive",
            CountMethod::Pruned => "pruned",
        })
    }
}

/// Number of crossing pairs plus, per edge, how many edges cross it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossingReport {
    pub total: u64,
    pub per_edge: Vec<u64>,
    pub method: CountMethod,
}

impl CrossingReport {
    fn from_pairs(
        m: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
        method: CountMethod,
    ) -> Self {
        let mut per_edge = vec![0u64; m];
        let mut total = 0u64;
        for (i, j) in pairs {
            per_edge[i] += 1;
            per_edge[j] += 1;
            total += 1;
        }
        CrossingReport {
            total,
            per_edge,
            method,
        }
    }

    pub fn per_edge_max(&self) -> u64 {
        self.per_edge.iter().copied().max().unwrap_or(0)
    }
}

fn require_proper(g: &GridGraph) -> Result<(), CrossingError> {
    let v = g.validate_proper();
    if v.is_empty() {
        Ok(())
    } else {
        Err(CrossingError::Improper(v))
    }
}

/// Tests all `m(m-1)/2` edge pairs.
pub fn count_crossings_naive(g: &GridGraph) -> Result<CrossingReport, CrossingError> {
    require_proper(g)?;
    let segs = g.segments();
    let mut pairs = Vec::new();
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            if crosses(&segs[i], &segs[j]).expect("same dimension") {
                pairs.push((i, j));
            }
        }
    }
    Ok(CrossingReport::from_pairs(
        segs.len(),
        pairs,
        CountMethod::Naive,
    ))
}

/// Edges whose bounding box spans more unit cells than this are tested
/// against every other edge by box overlap instead of being bucketed.
const MAX_CELLS_PER_EDGE: u64 = 256;

type Cell = Vec<i64>;

/// Cells `z` assigned to an edge: along each axis `z_i` ranges over
/// `lo_i..hi_i` (or just `lo_i` when the edge is flat in that axis).
fn cell_ranges(lo: &[i64], hi: &[i64]) -> Vec<(i64, i64)> {
    lo.iter()
        .zip(hi)
        .map(|(&l, &h)| if h > l { (l, h - 1) } else { (l, l) })
        .collect()
}

fn cell_count(ranges: &[(i64, i64)]) -> Option<u64> {
    ranges
        .iter()
        .try_fold(1u64, |acc, &(a, b)| acc.checked_mul((b - a + 1) as u64))
}

fn boxes_overlap(a: &(Vec<i64>, Vec<i64>), b: &(Vec<i64>, Vec<i64>)) -> bool {
    a.0.iter()
        .zip(&a.1)
        .zip(b.0.iter().zip(&b.1))
        .all(|((&alo, &ahi), (&blo, &bhi))| alo <= bhi && blo <= ahi)
}

fn for_each_cell(ranges: &[(i64, i64)], mut f: impl FnMut(&Cell)) {
    let mut cur: Cell = ranges.iter().map(|r| r.0).collect();
    loop {
        f(&cur);
        let mut axis = 0;
        loop {
            if axis == ranges.len() {
                return;
            }
            if cur[axis] < ranges[axis].1 {
                cur[axis] += 1;
                break;
            }
            cur[axis] = ranges[axis].0;
            axis += 1;
        }
    }
}

/// Same result as [`count_crossings_naive`], testing only pairs that share
/// a unit cell.
///
/// Each edge is registered in the unit cells covered by its bounding box.
/// A pair is tested in exactly one cell: the lower corner of the
/// intersection of the two boxes. If two open edges meet, that corner cell
/// belongs to both (an edge that is not flat along an axis only reaches the
/// top of its box at an endpoint). Edges with very large boxes skip the
/// buckets and are compared by box overlap against everything.
pub fn count_crossings_pruned(g: &GridGraph) -> Result<CrossingReport, CrossingError> {
    require_proper(g)?;
    let segs = g.segments();
    let m = segs.len();
    let boxes: Vec<(Vec<i64>, Vec<i64>)> = segs.iter().map(Segment::bounding_box).collect();
    let ranges: Vec<Vec<(i64, i64)>> = boxes.iter().map(|(l, h)| cell_ranges(l, h)).collect();
    let large: Vec<bool> = ranges
        .iter()
        .map(|r| cell_count(r).is_none_or(|c| c > MAX_CELLS_PER_EDGE))
        .collect();

    let mut buckets: HashMap<Cell, Vec<usize>> = HashMap::new();
    for e in 0..m {
        if !large[e] {
            for_each_cell(&ranges[e], |c| {
                buckets.entry(c.clone()).or_default().push(e)
            });
        }
    }
    let mut cells: Vec<&Cell> = buckets.keys().collect();
    cells.sort();

    let mut pairs = Vec::new();
    let mut corner = vec![0i64; g.dim()];
    for cell in cells {
        let members = &buckets[cell];
        for (x, &i) in members.iter().enumerate() {
            for &j in &members[x + 1..] {
                for (axis, c) in corner.iter_mut().enumerate() {
                    *c = boxes[i].0[axis].max(boxes[j].0[axis]);
                }
                if corner != *cell {
                    continue;
                }
                if crosses(&segs[i], &segs[j]).expect("same dimension") {
                    pairs.push((i.min(j), i.max(j)));
                }
            }
        }
    }
    for i in (0..m).filter(|&i| large[i]) {
        for j in 0..m {
            if j == i || (large[j] && j < i) {
                continue;
            }
            if boxes_overlap(&boxes[i], &boxes[j])
                && crosses(&segs[i], &segs[j]).expect("same dimension")
            {
                pairs.push((i.min(j), i.max(j)));
            }
        }
    }
    Ok(CrossingReport::from_pairs(m, pairs, CountMethod::Pruned))
}

/// Largest number of edges crossing a single edge.
pub fn per_edge_max(g: &GridGraph) -> Result<u64, CrossingError> {
    Ok(count_crossings_naive(g)?.per_edge_max())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    MidpointBucket,
    MidpointFormula,
    EssentialPgrid,
    GreedyRemoval,
}

impl fmt::Display for CertificateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CertificateKind::MidpointBucket => "midpoint-bucket",
            CertificateKind::MidpointFormula => "midpoint-formula",
            CertificateKind::EssentialPgrid => "essential-pgrid",
            CertificateKind::GreedyRemoval => "greedy-removal",
        })
    }
}

/// Crossings found on one essential level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelTally {
    pub p: u64,
    /// Sum of `R_i` over occupied points; equals `m·φ(p)` for primitive edges.
    pub incidences: u64,
    pub occupied_points: u64,
    /// Sum of `C(R_i, 2)`.
    pub pairs: u64,
}

/// A lower bound on a crossing count with the data that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundCertificate {
    pub kind: CertificateKind,
    pub value: BigRational,
    pub p_max: Option<u64>,
    pub levels: Vec<LevelTally>,
}

impl BoundCertificate {
    fn plain(kind: CertificateKind, value: BigRational) -> Self {
        BoundCertificate {
            kind,
            value,
            p_max: None,
            levels: Vec::new(),
        }
    }

    /// Smallest integer not below the bound.
    pub fn ceil(&self) -> BigInt {
        self.value.ceil().to_integer()
    }
}

fn choose2(r: u64) -> u64 {
    r * r.saturating_sub(1) / 2
}

/// Buckets edges by their exact midpoint and sums `C(R_i, 2)`; distinct
/// edges sharing a midpoint cross there.
pub fn lower_bound_midpoint_bucket(g: &GridGraph) -> Result<BoundCertificate, CrossingError> {
    require_proper(g)?;
    let mut buckets: HashMap<Vec<i128>, u64> = HashMap::new();
    for &(u, w) in g.edges() {
        // twice the midpoint, kept integral
        let key = g.vertices()[u]
            .coords()
            .iter()
            .zip(g.vertices()[w].coords())
            .map(|(&a, &b)| a as i128 + b as i128)
            .collect();
        *buckets.entry(key).or_default() += 1;
    }
    let value: u64 = buckets.values().map(|&r| choose2(r)).sum();
    Ok(BoundCertificate::plain(
        CertificateKind::MidpointBucket,
        BigRational::from_integer(value.into()),
    ))
}

fn two_pow_minus_one(d: u32) -> BigInt {
    (BigInt::one() << d as usize) - 1
}

/// `max(0, (m² / ((2^d - 1)·N) - m) / 2)`, a lower bound on the crossings of
/// any `d`-dimensional grid graph with `m` edges and volume at most `n`.
pub fn lower_bound_midpoint_formula(
    n: &BigUint,
    m: &BigUint,
    d: u32,
) -> Result<BigRational, CrossingError> {
    if n.is_zero() {
        return Err(CrossingError::ZeroVolume);
    }
    let m = BigInt::from(m.clone());
    let k = two_pow_minus_one(d) * BigInt::from(n.clone());
    let v = (BigRational::new(&m * &m, k) - BigRational::from_integer(m))
        / BigRational::from_integer(2.into());
    Ok(if v.is_negative() {
        BigRational::zero()
    } else {
        v
    })
}

/// `max(0, m - (2^d - 1)·N)`.
pub fn lower_bound_greedy_removal(
    n: &BigUint,
    m: &BigUint,
    d: u32,
) -> Result<BigUint, CrossingError> {
    if n.is_zero() {
        return Err(CrossingError::ZeroVolume);
    }
    let cap = ((BigUint::one() << d as usize) - 1u32) * n;
    Ok(if *m > cap { m - cap } else { BigUint::zero() })
}

/// `floor(cbrt(m / N))` clamped to `1..=16`.
pub fn default_p_max(n: &BigUint, m: &BigUint) -> u64 {
    if n.is_zero() {
        return 1;
    }
    let mut p = 1u64;
    while p < 16 && BigUint::from((p + 1).pow(3)) * n <= *m {
        p += 1;
    }
    p
}

/// For every `p <= p_max`, buckets the essential p-grid points of all edges
/// and sums `C(R_i, 2)`. Levels partition the crossing points, so the total
/// is at most the crossing count.
///
/// Refuses graphs with a non-primitive edge (points of such an edge are not
/// on the essential level they are filed under) and graphs with a
/// collinear-overlapping pair (one crossing pair would be counted on many
/// levels).
pub fn lower_bound_essential_pgrid(
    g: &GridGraph,
    p_max: u64,
) -> Result<BoundCertificate, CrossingError> {
    if p_max == 0 {
        return Err(CrossingError::ZeroPMax);
    }
    require_proper(g)?;
    let segs = g.segments();
    for (e, s) in segs.iter().enumerate() {
        let (_, gcd) = gcd_reduce(s);
        if gcd != 1 {
            return Err(CrossingError::NonPrimitive { edge: e, gcd });
        }
    }
    if let Some((i, j)) = first_collinear_overlap(&segs) {
        return Err(CrossingError::CollinearOverlap(i, j));
    }
    let mut levels = Vec::with_capacity(p_max as usize);
    let mut total = 0u64;
    for p in 1..=p_max {
        let mut buckets: HashMap<RationalPoint, u64> = HashMap::new();
        let mut incidences = 0u64;
        for s in &segs {
            let (_, q) = edge_pgrid_points(s, p).expect("primitivity and p >= 1 checked above");
            incidences += q.len() as u64;
            for pt in q {
                *buckets.entry(pt).or_default() += 1;
            }
        }
        let pairs: u64 = buckets.values().map(|&r| choose2(r)).sum();
        total += pairs;
        levels.push(LevelTally {
            p,
            incidences,
            occupied_points: buckets.len() as u64,
            pairs,
        });
    }
    Ok(BoundCertificate {
        kind: CertificateKind::EssentialPgrid,
        value: BigRational::from_integer(total.into()),
        p_max: Some(p_max),
        levels,
    })
}

fn first_collinear_overlap(segs: &[Segment]) -> Option<(usize, usize)> {
    // Only parallel edges can overlap; group by primitive direction up to sign.
    let mut groups: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (e, s) in segs.iter().enumerate() {
        let (dir, _) = gcd_reduce(s);
        let mut key = dir.into_coords();
        if key.iter().find(|&&c| c != 0).is_some_and(|&c| c < 0) {
            key.iter_mut().for_each(|c| *c = -*c);
        }
        groups.entry(key).or_default().push(e);
    }
    let mut found: Option<(usize, usize)> = None;
    for members in groups.values() {
        for (x, &i) in members.iter().enumerate() {
            for &j in &members[x + 1..] {
                if segments_cross(&segs[i], &segs[j]) == Ok(CrossKind::CollinearOverlap) {
                    let pair = (i.min(j), i.max(j));
                    found = Some(found.map_or(pair, |f| f.min(pair)));
                }
            }
        }
    }
    found
}

/// All four certificates for one graph, using its own bounding volume.
pub fn all_certificates(
    g: &GridGraph,
    p_max: Option<u64>,
) -> Result<Vec<BoundCertificate>, CrossingError> {
    let n = g.compute_volume().map_err(|_| CrossingError::ZeroVolume)?;
    let m = BigUint::from(g.edge_count());
    let d = g.dim() as u32;
    let p = p_max.unwrap_or_else(|| default_p_max(&n, &m));
    Ok(vec![
        lower_bound_midpoint_bucket(g)?,
        BoundCertificate::plain(
            CertificateKind::MidpointFormula,
            lower_bound_midpoint_formula(&n, &m, d)?,
        ),
        lower_bound_essential_pgrid(g, p)?,
        BoundCertificate::plain(
            CertificateKind::GreedyRemoval,
            BigRational::from_integer(BigInt::from(lower_bound_greedy_removal(&n, &m, d)?)),
        ),
    ])
}
