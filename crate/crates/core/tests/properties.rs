use std::collections::HashSet;

use gridcross_core::constructions::random_proper_graph;
use gridcross_core::crossings::{
    all_certificates, count_crossings_naive, count_crossings_pruned, lower_bound_essential_pgrid,
    lower_bound_midpoint_bucket,
};
use gridcross_core::geom::{
    crosses, gcd_reduce, point_on_open_segment, segments_cross, CrossKind, LatticePoint, Segment,
};
use gridcross_core::grid_graph::{GridGraph, GridSpec};
use gridcross_core::numtheory::{edge_pgrid_points, essential_level, totient_sieve};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use proptest::prelude::*;

fn point(dim: usize, range: i64) -> impl Strategy<Value = LatticePoint> {
    prop::collection::vec(-range..=range, dim).prop_map(LatticePoint::new)
}

fn segment(dim: usize, range: i64) -> impl Strategy<Value = Segment> {
    (point(dim, range), point(dim, range))
        .prop_filter("distinct endpoints", |(a, b)| a != b)
        .prop_map(|(a, b)| Segment::new(a, b).unwrap())
}

fn segment_pair() -> impl Strategy<Value = (Segment, Segment)> {
    (2usize..=4).prop_flat_map(|d| (segment(d, 4), segment(d, 4)))
}

fn primitive_segment() -> impl Strategy<Value = Segment> {
    (2usize..=4)
        .prop_flat_map(|d| segment(d, 20).prop_filter("primitive", |s| gcd_reduce(s).1 == 1))
}

fn grid_graph() -> impl Strategy<Value = GridGraph> {
    (2usize..=4, any::<u64>(), 0usize..40).prop_map(|(d, seed, m)| {
        let side = match d {
            2 => 6,
            3 => 3,
            _ => 2,
        };
        let spec = GridSpec::new(vec![side; d]).unwrap();
        let available = spec.proper_pairs().1.len();
        random_proper_graph(&spec, m.min(available), seed, true).unwrap()
    })
}

fn reversed(s: &Segment) -> Segment {
    Segment::new(s.b().clone(), s.a().clone()).unwrap()
}

fn scaled(s: &Segment, k: i64, t: &[i64]) -> Segment {
    let f = |p: &LatticePoint| {
        LatticePoint::new(p.coords().iter().zip(t).map(|(c, o)| c * k + o).collect())
    };
    Segment::new(f(s.a()), f(s.b())).unwrap()
}

/// Count of `i` in `1..p` coprime to `p`.
fn coprime_count(p: u64) -> u64 {
    (1..p).filter(|i| i.gcd(&p) == 1).count() as u64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn crossing_is_symmetric((s1, s2) in segment_pair()) {
        let k12 = segments_cross(&s1, &s2).unwrap();
        let k21 = segments_cross(&s2, &s1).unwrap();
        prop_assert!(k12.same_class(&k21));
        prop_assert!(k12.same_class(&segments_cross(&reversed(&s1), &s2).unwrap()));
        prop_assert_eq!(k12.is_crossing(), crosses(&s1, &s2).unwrap());
        if let (CrossKind::PointCross(p), CrossKind::PointCross(q)) = (&k12, &k21) {
            prop_assert_eq!(p, q);
        }
    }

    #[test]
    fn crossing_point_lies_on_both_open_segments((s1, s2) in segment_pair()) {
        if let CrossKind::PointCross(p) = segments_cross(&s1, &s2).unwrap() {
            prop_assert!(point_on_open_segment(&p, &s1));
            prop_assert!(point_on_open_segment(&p, &s2));
        }
    }

    #[test]
    fn classification_survives_scaling_and_translation(
        (s1, s2) in segment_pair(),
        k in 1i64..5,
        shift in prop::collection::vec(-50i64..50, 4),
    ) {
        let t = &shift[..s1.dim()];
        let before = segments_cross(&s1, &s2).unwrap();
        let after = segments_cross(&scaled(&s1, k, t), &scaled(&s2, k, t)).unwrap();
        prop_assert!(before.same_class(&after));
    }

    #[test]
    fn serialization_round_trips(g in grid_graph()) {
        prop_assert_eq!(GridGraph::parse(&g.serialize()).unwrap(), g);
    }

    #[test]
    fn volume_is_translation_invariant(g in grid_graph(), shift in prop::collection::vec(-1000i64..1000, 4)) {
        let t = &shift[..g.dim()];
        prop_assert_eq!(g.compute_volume().unwrap(), g.translate(t).compute_volume().unwrap());
    }

    #[test]
    fn pruned_matches_naive(g in grid_graph()) {
        let naive = count_crossings_naive(&g).unwrap();
        let pruned = count_crossings_pruned(&g).unwrap();
        prop_assert_eq!(naive.total, pruned.total);
        prop_assert_eq!(naive.per_edge, pruned.per_edge);
    }

    #[test]
    fn translation_preserves_crossings(g in grid_graph(), shift in prop::collection::vec(-1000i64..1000, 4)) {
        let t = &shift[..g.dim()];
        prop_assert_eq!(
            count_crossings_naive(&g).unwrap().total,
            count_crossings_naive(&g.translate(t)).unwrap().total
        );
    }

    #[test]
    fn certificates_are_sound(g in grid_graph()) {
        let crs = BigRational::from_integer(count_crossings_naive(&g).unwrap().total.into());
        for cert in all_certificates(&g, Some(8)).unwrap() {
            prop_assert!(cert.value <= crs, "{} = {} > {}", cert.kind, cert.value, crs);
        }
    }

    #[test]
    fn essential_incidence_mass(g in grid_graph(), p_max in 1u64..=8) {
        let cert = lower_bound_essential_pgrid(&g, p_max).unwrap();
        let m = g.edge_count() as u64;
        for level in &cert.levels {
            prop_assert_eq!(level.incidences, m * coprime_count(level.p));
        }
    }

    #[test]
    fn essential_grid_size_and_level(s in primitive_segment(), p in 1u64..=50) {
        let (all, q) = edge_pgrid_points(&s, p).unwrap();
        prop_assert_eq!(all.len() as u64, p - 1);
        prop_assert_eq!(q.len() as u64, coprime_count(p));
        for pt in &q {
            prop_assert_eq!(essential_level(pt), BigInt::from(p));
        }
    }

    #[test]
    fn crossings_monotone_under_edge_removal(g in grid_graph(), drop in any::<prop::sample::Index>()) {
        prop_assume!(g.edge_count() > 0);
        let e = drop.index(g.edge_count());
        let mut edges = g.edges().to_vec();
        edges.remove(e);
        let h = GridGraph::new(g.dim(), g.vertices().to_vec(), edges).unwrap();
        let full = count_crossings_naive(&g).unwrap();
        let less = count_crossings_naive(&h).unwrap();
        prop_assert_eq!(less.total + full.per_edge[e], full.total);
    }
}

#[test]
fn essential_levels_are_disjoint_on_a_segment() {
    let s = Segment::new([1, 1, 1].into(), [2, 3, 4].into()).unwrap();
    let mut seen = HashSet::new();
    for p in 1..=30 {
        for pt in edge_pgrid_points(&s, p).unwrap().1 {
            assert!(seen.insert(pt));
        }
    }
    // the union over p <= 30 covers every p-grid point with p <= 30
    let all: HashSet<_> = (1..=30)
        .flat_map(|p| edge_pgrid_points(&s, p).unwrap().0)
        .collect();
    assert_eq!(all, seen);
}

#[test]
fn totient_sieve_matches_coprime_count() {
    let t = totient_sieve(300);
    for p in 2..=300 {
        assert_eq!(t.get(p), coprime_count(p), "p={p}");
    }
}

#[test]
fn midpoint_bucket_finds_the_classic_star() {
    // four edges through (0, 0) share that midpoint pairwise
    let vs: Vec<LatticePoint> = [
        [-1, -1],
        [1, 1],
        [-1, 1],
        [1, -1],
        [-1, 0],
        [1, 0],
        [0, -1],
        [0, 1],
    ]
    .into_iter()
    .map(LatticePoint::from)
    .collect();
    let g = GridGraph::new(2, vs, vec![(0, 1), (2, 3), (4, 5), (6, 7)]).unwrap();
    let b = lower_bound_midpoint_bucket(&g).unwrap();
    assert_eq!(b.value, BigRational::from_integer(6.into()));
    assert_eq!(count_crossings_naive(&g).unwrap().total, 6);
}
