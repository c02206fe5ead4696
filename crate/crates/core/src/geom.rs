//! Exact predicates on open segments with integer endpoints.
//!
//! Every quantity here is an integer or an exact rational. The hot path
//! ([`crosses`]) runs in checked `i128` arithmetic and falls back to
//! `BigInt` when an intermediate product overflows, so results never
//! depend on coordinate magnitude.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeomError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("degenerate segment: both endpoints are {0}")]
    Degenerate(LatticePoint),
    #[error("points must have dimension at least 1")]
    ZeroDimension,
}

/// A point of the integer lattice `Z^d`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticePoint(Vec<i64>);

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> Self {
        LatticePoint(coords)
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_coords(self) -> Vec<i64> {
        self.0
    }

    /// Componentwise `self + other`.
    pub fn offset(&self, delta: &[i64]) -> LatticePoint {
        LatticePoint(self.0.iter().zip(delta).map(|(a, b)| a + b).collect())
    }

    pub fn to_rational(&self) -> RationalPoint {
        RationalPoint(
            self.0
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }
}

impl fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<i64>> for LatticePoint {
    fn from(v: Vec<i64>) -> Self {
        LatticePoint(v)
    }
}

impl<const N: usize> From<[i64; N]> for LatticePoint {
    fn from(v: [i64; N]) -> Self {
        LatticePoint(v.to_vec())
    }
}

/// A point with exact rational coordinates. `BigRational` keeps every
/// coordinate in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalPoint(Vec<BigRational>);

impl RationalPoint {
    pub fn new(coords: Vec<BigRational>) -> Self {
        RationalPoint(coords)
    }

    /// Builds `(n_1/den, ..., n_d/den)`.
    pub fn from_scaled(numerators: &[BigInt], den: &BigInt) -> Self {
        RationalPoint(
            numerators
                .iter()
                .map(|n| BigRational::new(n.clone(), den.clone()))
                .collect(),
        )
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_lattice(&self) -> bool {
        self.0.iter().all(|c| c.is_integer())
    }
}

impl fmt::Debug for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl From<&LatticePoint> for RationalPoint {
    fn from(p: &LatticePoint) -> Self {
        p.to_rational()
    }
}

/// An open segment between two distinct lattice points. The endpoints are
/// not part of the segment.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Segment {
    a: LatticePoint,
    b: LatticePoint,
}

impl Segment {
    pub fn new(a: LatticePoint, b: LatticePoint) -> Result<Self, GeomError> {
        if a.dim() != b.dim() {
            return Err(GeomError::DimensionMismatch(a.dim(), b.dim()));
        }
        if a.dim() == 0 {
            return Err(GeomError::ZeroDimension);
        }
        if a == b {
            return Err(GeomError::Degenerate(a));
        }
        Ok(Segment { a, b })
    }

    pub fn a(&self) -> &LatticePoint {
        &self.a
    }

    pub fn b(&self) -> &LatticePoint {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// `b - a`, widened so the subtraction cannot overflow.
    pub fn delta(&self) -> Vec<i128> {
        self.a
            .coords()
            .iter()
            .zip(self.b.coords())
            .map(|(&a, &b)| b as i128 - a as i128)
            .collect()
    }

    pub fn shares_endpoint(&self, other: &Segment) -> bool {
        self.a == other.a || self.a == other.b || self.b == other.a || self.b == other.b
    }

    /// Componentwise closed bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Vec<i64>, Vec<i64>) {
        let lo = self
            .a
            .coords()
            .iter()
            .zip(self.b.coords())
            .map(|(&x, &y)| x.min(y))
            .collect();
        let hi = self
            .a
            .coords()
            .iter()
            .zip(self.b.coords())
            .map(|(&x, &y)| x.max(y))
            .collect();
        (lo, hi)
    }
}

impl fmt::Debug for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.a, self.b)
    }
}

/// How two open segments meet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CrossKind {
    Disjoint,
    /// The closed segments touch only at an endpoint common to both.
    SharedEndpointOnly,
    /// A single common point strictly inside both segments.
    PointCross(RationalPoint),
    /// Collinear with overlapping open intervals.
    CollinearOverlap,
}

impl CrossKind {
    /// Whether this pair counts as one crossing.
    pub fn is_crossing(&self) -> bool {
        matches!(self, CrossKind::PointCross(_) | CrossKind::CollinearOverlap)
    }

    /// Same classification, ignoring the reported point.
    pub fn same_class(&self, other: &CrossKind) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Primitive direction of `seg` together with the gcd `g` of its
/// coordinate differences, so that `b - a = g * direction`.
pub fn gcd_reduce(seg: &Segment) -> (LatticePoint, u64) {
    let delta = seg.delta();
    let g = delta
        .iter()
        .fold(0u128, |acc, &x| gcd_u128(acc, x.unsigned_abs()));
    // b != a, so g >= 1; every |delta_i| <= 2^64 - 1 hence g fits in u64
    let direction = delta.iter().map(|&x| (x / g as i128) as i64).collect();
    (LatticePoint(direction), g as u64)
}

/// Whether the segment contains no lattice point other than its endpoints.
pub fn is_primitive(seg: &Segment) -> bool {
    gcd_reduce(seg).1 == 1
}

/// The `g - 1` lattice points strictly between `a` and `b`, ordered from `a`.
pub fn interior_lattice_points(seg: &Segment) -> Vec<LatticePoint> {
    let (dir, g) = gcd_reduce(seg);
    (1..g as i64)
        .map(|i| {
            LatticePoint(
                seg.a
                    .coords()
                    .iter()
                    .zip(dir.coords())
                    .map(|(&a, &v)| a + i * v)
                    .collect(),
            )
        })
        .collect()
}

/// Whether the lattice point `x` lies on the open segment, in pure integer
/// arithmetic.
pub fn lattice_point_on_open_segment(x: &LatticePoint, seg: &Segment) -> bool {
    if x.dim() != seg.dim() {
        return false;
    }
    let (dir, g) = gcd_reduce(seg);
    // x = a + i*dir for an integer 0 < i < g
    let mut step: Option<i128> = None;
    for ((&xc, &ac), &v) in x.coords().iter().zip(seg.a.coords()).zip(dir.coords()) {
        let off = xc as i128 - ac as i128;
        if v == 0 {
            if off != 0 {
                return false;
            }
            continue;
        }
        let v = v as i128;
        if off % v != 0 {
            return false;
        }
        let i = off / v;
        match step {
            None => step = Some(i),
            Some(s) if s != i => return false,
            _ => {}
        }
    }
    matches!(step, Some(i) if i > 0 && i < g as i128)
}

/// Whether `p = a + t(b - a)` for some rational `0 < t < 1`.
pub fn point_on_open_segment(p: &RationalPoint, seg: &Segment) -> bool {
    if p.dim() != seg.dim() {
        return false;
    }
    let a = seg.a.to_rational();
    let delta: Vec<BigInt> = seg.delta().into_iter().map(BigInt::from).collect();
    let axis = delta
        .iter()
        .position(|d| !d.is_zero())
        .expect("non-degenerate");
    let t =
        (&p.coords()[axis] - &a.coords()[axis]) / BigRational::from_integer(delta[axis].clone());
    if !t.is_positive() || t >= BigRational::one() {
        return false;
    }
    p.coords()
        .iter()
        .zip(a.coords())
        .zip(&delta)
        .all(|((pc, ac), d)| *pc == ac + &t * BigRational::from_integer(d.clone()))
}

/// Integer ring operations that may report overflow.
trait ExactRing: Sized + Clone + Ord + Zero {
    fn from_i128(v: i128) -> Self;
    fn plus(&self, o: &Self) -> Option<Self>;
    fn minus(&self, o: &Self) -> Option<Self>;
    fn times(&self, o: &Self) -> Option<Self>;
}

impl ExactRing for i128 {
    fn from_i128(v: i128) -> Self {
        v
    }
    fn plus(&self, o: &Self) -> Option<Self> {
        self.checked_add(*o)
    }
    fn minus(&self, o: &Self) -> Option<Self> {
        self.checked_sub(*o)
    }
    fn times(&self, o: &Self) -> Option<Self> {
        self.checked_mul(*o)
    }
}

impl ExactRing for BigInt {
    fn from_i128(v: i128) -> Self {
        BigInt::from(v)
    }
    fn plus(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn minus(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn times(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
}

fn dot<R: ExactRing>(u: &[R], v: &[R]) -> Option<R> {
    u.iter()
        .zip(v)
        .try_fold(R::zero(), |acc, (x, y)| acc.plus(&x.times(y)?))
}

/// Classification before the crossing point is materialised. For a point
/// crossing, the parameter on the first segment is `t_num / den`.
enum RawCross<R> {
    Disjoint,
    SharedEndpoint,
    Overlap,
    Point { t_num: R, den: R },
}

fn classify<R: ExactRing>(s1: &Segment, s2: &Segment) -> Option<RawCross<R>> {
    let lift = |v: Vec<i128>| v.into_iter().map(R::from_i128).collect::<Vec<R>>();
    let u = lift(s1.delta());
    let v = lift(s2.delta());
    let w = lift(
        s1.a.coords()
            .iter()
            .zip(s2.a.coords())
            .map(|(&a, &c)| c as i128 - a as i128)
            .collect(),
    );

    // Solve t*u - s*v = w through the Gram system of (u, v).
    let uu = dot(&u, &u)?;
    let uv = dot(&u, &v)?;
    let vv = dot(&v, &v)?;
    let wu = dot(&w, &u)?;
    let wv = dot(&w, &v)?;
    // Lagrange identity: this is the sum of squared 2x2 minors of (u, v).
    let gram = uu.times(&vv)?.minus(&uv.times(&uv)?)?;

    if gram.is_zero() {
        // Parallel supports. Same line iff w is parallel to u as well.
        let ww = dot(&w, &w)?;
        if !uu.times(&ww)?.minus(&wu.times(&wu)?)?.is_zero() {
            return Some(RawCross::Disjoint);
        }
        // Positions along u, scaled by |u|^2: s1 spans (0, uu).
        let c_pos = wu;
        let d_pos = c_pos.plus(&uv)?;
        let (lo2, hi2) = if c_pos <= d_pos {
            (c_pos, d_pos)
        } else {
            (d_pos, c_pos)
        };
        let zero = R::zero();
        let lo = if lo2 > zero { lo2 } else { zero };
        let hi = if hi2 < uu { hi2 } else { uu };
        return Some(if lo < hi {
            RawCross::Overlap
        } else if lo == hi {
            RawCross::SharedEndpoint
        } else {
            RawCross::Disjoint
        });
    }

    let t_num = wu.times(&vv)?.minus(&uv.times(&wv)?)?;
    let s_num = uv.times(&wu)?.minus(&uu.times(&wv)?)?;
    // Coplanarity: the least-squares solution must satisfy the system exactly.
    for ((ui, vi), wi) in u.iter().zip(&v).zip(&w) {
        let lhs = t_num.times(ui)?.minus(&s_num.times(vi)?)?;
        if lhs != gram.times(wi)? {
            return Some(RawCross::Disjoint);
        }
    }
    let zero = R::zero();
    let inside = |x: &R| *x > zero && *x < gram;
    let at_end = |x: &R| x.is_zero() || *x == gram;
    Some(if inside(&t_num) && inside(&s_num) {
        RawCross::Point { t_num, den: gram }
    } else if at_end(&t_num) && at_end(&s_num) {
        RawCross::SharedEndpoint
    } else {
        RawCross::Disjoint
    })
}

fn check_dims(s1: &Segment, s2: &Segment) -> Result<(), GeomError> {
    if s1.dim() != s2.dim() {
        Err(GeomError::DimensionMismatch(s1.dim(), s2.dim()))
    } else {
        Ok(())
    }
}

/// Classifies how the open segments `s1` and `s2` meet.
pub fn segments_cross(s1: &Segment, s2: &Segment) -> Result<CrossKind, GeomError> {
    check_dims(s1, s2)?;
    let raw = match classify::<i128>(s1, s2) {
        Some(RawCross::Disjoint) => return Ok(CrossKind::Disjoint),
        Some(RawCross::SharedEndpoint) => return Ok(CrossKind::SharedEndpointOnly),
        Some(RawCross::Overlap) => return Ok(CrossKind::CollinearOverlap),
        Some(RawCross::Point { t_num, den }) => (BigInt::from(t_num), BigInt::from(den)),
        None => match classify::<BigInt>(s1, s2).expect("BigInt arithmetic is total") {
            RawCross::Disjoint => return Ok(CrossKind::Disjoint),
            RawCross::SharedEndpoint => return Ok(CrossKind::SharedEndpointOnly),
            RawCross::Overlap => return Ok(CrossKind::CollinearOverlap),
            RawCross::Point { t_num, den } => (t_num, den),
        },
    };
    let (t_num, den) = raw;
    let scaled: Vec<BigInt> =
        s1.a.coords()
            .iter()
            .zip(s1.delta())
            .map(|(&a, d)| BigInt::from(a) * &den + &t_num * BigInt::from(d))
            .collect();
    Ok(CrossKind::PointCross(RationalPoint::from_scaled(
        &scaled, &den,
    )))
}

/// Whether the pair counts as a crossing (point crossing or collinear
/// overlap). Same answer as `segments_cross(..).is_crossing()` without
/// building the crossing point.
pub fn crosses(s1: &Segment, s2: &Segment) -> Result<bool, GeomError> {
    check_dims(s1, s2)?;
    Ok(match classify::<i128>(s1, s2) {
        Some(r) => matches!(r, RawCross::Point { .. } | RawCross::Overlap),
        None => matches!(
            classify::<BigInt>(s1, s2).expect("BigInt arithmetic is total"),
            RawCross::Point { .. } | RawCross::Overlap
        ),
    })
}

/// `lcm` of the denominators of all coordinates.
pub fn denominator_lcm(p: &RationalPoint) -> BigInt {
    p.coords()
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(a: &[i64], b: &[i64]) -> Segment {
        Segment::new(LatticePoint::new(a.to_vec()), LatticePoint::new(b.to_vec())).unwrap()
    }

    fn rp(c: &[(i64, i64)]) -> RationalPoint {
        RationalPoint::new(
            c.iter()
                .map(|&(n, d)| BigRational::new(n.into(), d.into()))
                .collect(),
        )
    }

    #[test]
    fn gcd_reduce_examples() {
        let (d, g) = gcd_reduce(&seg(&[0, 0, 0], &[4, 6, 2]));
        assert_eq!((d.coords(), g), (&[2, 3, 1][..], 2));
        let (d, g) = gcd_reduce(&seg(&[1, 1], &[2, 3]));
        assert_eq!((d.coords(), g), (&[1, 2][..], 1));
        let (d, g) = gcd_reduce(&seg(&[0, 0], &[0, 5]));
        assert_eq!((d.coords(), g), (&[0, 1][..], 5));
        let (d, g) = gcd_reduce(&seg(&[3, 0], &[-3, 0]));
        assert_eq!((d.coords(), g), (&[-1, 0][..], 6));
    }

    #[test]
    fn interior_points_examples() {
        assert_eq!(
            interior_lattice_points(&seg(&[1, 1], &[4, 7])),
            vec![LatticePoint::from([2, 3]), LatticePoint::from([3, 5])]
        );
        assert!(interior_lattice_points(&seg(&[1, 1, 1], &[2, 3, 4])).is_empty());
        assert_eq!(
            interior_lattice_points(&seg(&[0, 0], &[0, 3])),
            vec![LatticePoint::from([0, 1]), LatticePoint::from([0, 2])]
        );
    }

    #[test]
    fn point_on_open_segment_examples() {
        let s = seg(&[0, 0], &[2, 2]);
        assert!(point_on_open_segment(&rp(&[(1, 1), (1, 1)]), &s));
        assert!(!point_on_open_segment(&rp(&[(2, 1), (2, 1)]), &s));
        assert!(!point_on_open_segment(&rp(&[(0, 1), (0, 1)]), &s));
        assert!(!point_on_open_segment(&rp(&[(1, 1), (2, 1)]), &s));
        assert!(point_on_open_segment(&rp(&[(1, 2), (1, 2)]), &s));
    }

    #[test]
    fn lattice_membership_agrees_with_rational_test() {
        let s = seg(&[0, 0, 0], &[4, 6, 2]);
        for x in -1..6 {
            for y in -1..8 {
                for z in -1..4 {
                    let p = LatticePoint::from([x, y, z]);
                    assert_eq!(
                        lattice_point_on_open_segment(&p, &s),
                        point_on_open_segment(&p.to_rational(), &s),
                        "{p}"
                    );
                }
            }
        }
    }

    #[test]
    fn cross_examples() {
        let k = segments_cross(&seg(&[0, 0, 0], &[2, 2, 0]), &seg(&[0, 2, 0], &[2, 0, 0])).unwrap();
        assert_eq!(k, CrossKind::PointCross(rp(&[(1, 1), (1, 1), (0, 1)])));
        let k = segments_cross(&seg(&[0, 0], &[1, 1]), &seg(&[1, 1], &[2, 0])).unwrap();
        assert_eq!(k, CrossKind::SharedEndpointOnly);
        let k = segments_cross(&seg(&[0, 0], &[3, 0]), &seg(&[1, 0], &[4, 0])).unwrap();
        assert_eq!(k, CrossKind::CollinearOverlap);
    }

    #[test]
    fn collinear_edge_cases() {
        // end to end
        let k = segments_cross(&seg(&[0, 0], &[1, 0]), &seg(&[1, 0], &[2, 0])).unwrap();
        assert_eq!(k, CrossKind::SharedEndpointOnly);
        // gap
        let k = segments_cross(&seg(&[0, 0], &[1, 0]), &seg(&[2, 0], &[3, 0])).unwrap();
        assert_eq!(k, CrossKind::Disjoint);
        // reversed orientation, nested
        let k = segments_cross(&seg(&[0, 0], &[4, 4]), &seg(&[3, 3], &[1, 1])).unwrap();
        assert_eq!(k, CrossKind::CollinearOverlap);
        // identical
        let s = seg(&[0, 0, 1], &[2, 1, 1]);
        assert_eq!(segments_cross(&s, &s).unwrap(), CrossKind::CollinearOverlap);
        // parallel, distinct lines
        let k = segments_cross(&seg(&[0, 0], &[2, 0]), &seg(&[0, 1], &[2, 1])).unwrap();
        assert_eq!(k, CrossKind::Disjoint);
    }

    #[test]
    fn skew_and_t_junction() {
        let k =
            segments_cross(&seg(&[0, 0, 0], &[2, 0, 0]), &seg(&[1, -1, 1], &[1, 1, 1])).unwrap();
        assert_eq!(k, CrossKind::Disjoint);
        // endpoint of one in the interior of the other: open segments do not meet
        let k = segments_cross(&seg(&[0, 0], &[2, 0]), &seg(&[1, 0], &[1, 3])).unwrap();
        assert_eq!(k, CrossKind::Disjoint);
        // lines meet beyond the segments
        let k = segments_cross(&seg(&[0, 0], &[1, 0]), &seg(&[3, -1], &[3, 1])).unwrap();
        assert_eq!(k, CrossKind::Disjoint);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let e = segments_cross(&seg(&[0, 0], &[1, 0]), &seg(&[0, 0, 0], &[1, 1, 1])).unwrap_err();
        assert_eq!(e, GeomError::DimensionMismatch(2, 3));
        assert!(Segment::new(LatticePoint::from([1, 1]), LatticePoint::from([1, 1])).is_err());
    }

    #[test]
    fn big_coordinates_fall_back_to_bigint() {
        let big = 1i64 << 62;
        let s1 = seg(&[-big, -big, 0], &[big, big, 0]);
        let s2 = seg(&[-big, big, 0], &[big, -big, 0]);
        assert_eq!(
            segments_cross(&s1, &s2).unwrap(),
            CrossKind::PointCross(rp(&[(0, 1), (0, 1), (0, 1)]))
        );
        assert!(crosses(&s1, &s2).unwrap());
    }

    #[test]
    fn denominator_lcm_of_mixed_point() {
        assert_eq!(
            denominator_lcm(&rp(&[(3, 2), (5, 3), (1, 1)])),
            BigInt::from(6)
        );
    }
}
