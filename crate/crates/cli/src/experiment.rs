//! Parameter sweeps that produce one record per grid point.

use std::time::Instant;

use clap::ValueEnum;
use gridcross_core::constructions::{
    analytic_skip_bound, layered_complete_bipartite, random_proper_graph, SkipBoundParams,
};
use gridcross_core::crossings::{
    all_certificates, count_crossings_naive, count_crossings_pruned, BoundCertificate,
    CertificateKind, CrossingReport,
};
use gridcross_core::enumeration::{
    bose_formula, build_conflict_graph, count_crossing_free_matchings,
    count_crossing_free_spanning_trees, count_crossing_free_subgraphs, max_independent_set,
    ncs_lower_formula, ncs_upper_formula, SPANNING_TREE_VOLUME_CAP,
};
use gridcross_core::grid_graph::{GridGraph, GridSpec};
use gridcross_core::numtheory::{totient_rows, totient_sieve};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::report::Record;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExperimentKind {
    Growth3d,
    #[value(name = "growth_hd")]
    GrowthHd,
    Certificates,
    Totients,
    Enumeration,
}

/// Sweep description. Only the ranges used by `kind` are read:
///
/// * `growth3d`: `ks`
/// * `growth_hd`: `ks` x `dims`
/// * `certificates`: `grids` x `edges` x `seeds`, with `p_max`
/// * `totients`: `ns`
/// * `enumeration`: `grids`
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub ks: Vec<u64>,
    pub dims: Vec<usize>,
    pub grids: Vec<GridSpec>,
    pub edges: Vec<usize>,
    pub seeds: Vec<u64>,
    pub ns: Vec<u64>,
    pub p_max: Option<u64>,
    /// Adds a `wall_ms_f64` column. Off by default so output is reproducible.
    pub timing: bool,
}

impl ExperimentConfig {
    /// The default sweep for `kind`.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let grid = |s: &str| s.parse::<GridSpec>().expect("literal grid");
        let base = ExperimentConfig {
            kind,
            ks: vec![],
            dims: vec![],
            grids: vec![],
            edges: vec![],
            seeds: vec![],
            ns: vec![],
            p_max: None,
            timing: false,
        };
        match kind {
            ExperimentKind::Growth3d => ExperimentConfig {
                ks: (2..=6).collect(),
                ..base
            },
            ExperimentKind::GrowthHd => ExperimentConfig {
                ks: vec![2, 3],
                dims: vec![4],
                ..base
            },
            ExperimentKind::Certificates => ExperimentConfig {
                grids: vec![grid("8x8"), grid("4x4x4"), grid("4x4x2x2")],
                edges: vec![5, 10, 20, 30, 40, 50, 60],
                seeds: (0..10).collect(),
                p_max: Some(8),
                ..base
            },
            ExperimentKind::Totients => ExperimentConfig {
                ns: vec![1, 2, 3, 10, 27, 100, 1000, 10000],
                ..base
            },
            ExperimentKind::Enumeration => ExperimentConfig {
                grids: ["1x2", "1x3", "2x2", "3x2", "3x3", "2x2x2"]
                    .map(grid)
                    .to_vec(),
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let need = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(CliError::validation(format!("{what} must be non-empty")))
            }
        };
        match self.kind {
            ExperimentKind::Growth3d => {
                need(!self.ks.is_empty(), "k range")?;
            }
            ExperimentKind::GrowthHd => {
                need(!self.ks.is_empty(), "k range")?;
                need(!self.dims.is_empty(), "dimension range")?;
                if let Some(d) = self.dims.iter().find(|&&d| d < 4) {
                    return Err(CliError::validation(format!(
                        "growth_hd needs dimension >= 4, got {d}"
                    )));
                }
            }
            ExperimentKind::Certificates => {
                need(!self.grids.is_empty(), "grid list")?;
                need(!self.edges.is_empty(), "edge-count range")?;
                need(!self.seeds.is_empty(), "seed range")?;
            }
            ExperimentKind::Totients => {
                need(!self.ns.is_empty(), "n range")?;
                if self.ns.contains(&0) {
                    return Err(CliError::validation("n must be at least 1"));
                }
            }
            ExperimentKind::Enumeration => need(!self.grids.is_empty(), "grid list")?,
        }
        if self.ks.contains(&0) {
            return Err(CliError::validation("k must be at least 1"));
        }
        if self.p_max == Some(0) {
            return Err(CliError::validation("p_max must be at least 1"));
        }
        Ok(())
    }
}

/// Runs the sweep. Points are evaluated in parallel and returned in the
/// order of the configured parameter grid.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<Record>, CliError> {
    config.validate()?;
    let timed = |f: &dyn Fn() -> Result<Record, CliError>| -> Result<Record, CliError> {
        let start = Instant::now();
        let mut r = f()?;
        if config.timing {
            r.insert(
                "wall_ms_f64".into(),
                json!(start.elapsed().as_secs_f64() * 1e3),
            );
        }
        Ok(r)
    };
    match config.kind {
        ExperimentKind::Growth3d => config
            .ks
            .par_iter()
            .map(|&k| timed(&|| growth_record(k, 3)))
            .collect(),
        ExperimentKind::GrowthHd => {
            let points: Vec<(usize, u64)> = config
                .dims
                .iter()
                .flat_map(|&d| config.ks.iter().map(move |&k| (d, k)))
                .collect();
            points
                .par_iter()
                .map(|&(d, k)| timed(&|| growth_record(k, d)))
                .collect()
        }
        ExperimentKind::Certificates => {
            let mut points = Vec::new();
            for g in &config.grids {
                for &m in &config.edges {
                    for &s in &config.seeds {
                        points.push((g, m, s));
                    }
                }
            }
            points
                .par_iter()
                .map(|&(g, m, s)| timed(&|| certificate_record(g, m, s, config.p_max)))
                .collect()
        }
        ExperimentKind::Totients => totient_records(&config.ns, config.timing),
        ExperimentKind::Enumeration => config
            .grids
            .par_iter()
            .map(|g| timed(&|| enumeration_record(g).map_err(|e| e.context(g))))
            .collect(),
    }
}

fn ratio(num: &BigInt, den: f64) -> Value {
    match num.to_f64() {
        Some(n) if den > 0.0 => json!(n / den),
        _ => Value::Null,
    }
}

/// Crossings of [`layered_complete_bipartite`]`(k, d)` against the skip-sum
/// bound. `d = 3` rows carry `cr / (k⁶ ln k)`, `d >= 4` rows `cr / ℓ³` with
/// `ℓ = k^(d-1)`.
pub fn growth_record(k: u64, d: usize) -> Result<Record, CliError> {
    let g = layered_complete_bipartite(k, d)?;
    let report = count_crossings_pruned(&g)?;
    let bound = analytic_skip_bound(SkipBoundParams { k, d: d as u32 })?;
    let cr = BigInt::from(report.total);
    let max = report.per_edge_max();
    let ell = BigInt::from(k).pow(d as u32 - 1);
    let mut r = Record::new();
    r.insert("k".into(), json!(k));
    r.insert("d".into(), json!(d));
    r.insert("vertices".into(), json!(g.vertex_count()));
    r.insert("edges".into(), json!(g.edge_count()));
    r.insert("volume".into(), json!(g.compute_volume()?.to_string()));
    r.insert("crossings".into(), json!(cr.to_string()));
    r.insert("per_edge_max".into(), json!(max.to_string()));
    r.insert("skip_bound".into(), json!(bound.to_string()));
    r.insert(
        "per_edge_within_bound".into(),
        json!(BigRational::from_integer(max.into()) <= bound),
    );
    if d == 3 {
        let k6 = (k as f64).powi(6);
        let lnk = (k as f64).ln();
        r.insert("upper_bound_f64".into(), json!(2.0 * k6 * lnk + 30.0 * k6));
        r.insert("ratio_k6_lnk_f64".into(), ratio(&cr, k6 * lnk));
    } else {
        let pair_bound =
            &bound * BigRational::from_integer(&ell * &ell) / BigRational::from_integer(2.into());
        r.insert("ell".into(), json!(ell.to_string()));
        r.insert("pair_bound".into(), json!(pair_bound.to_string()));
        r.insert(
            "within_pair_bound".into(),
            json!(BigRational::from_integer(cr.clone()) <= pair_bound),
        );
        r.insert(
            "ratio_ell3_f64".into(),
            ratio(&cr, ell.to_f64().unwrap_or(f64::INFINITY).powi(3)),
        );
    }
    // Every edge meets at most floor(bound) = cN - 1 others.
    let n = BigUint::from(g.vertex_count());
    let c = BigRational::new(
        bound.floor().to_integer() + 1,
        BigInt::from(g.vertex_count()),
    );
    r.insert("admissible_c".into(), json!(c.to_string()));
    r.insert(
        "ncs_lower".into(),
        json!(ncs_lower_formula(&n, &c)?.to_string()),
    );
    Ok(r)
}

/// Number of essential p-grid points on one primitive edge.
fn essential_points_per_edge(phi: &[u64], p: u64) -> u64 {
    if p == 1 {
        0
    } else {
        phi[p as usize - 1]
    }
}

fn certificate_value(certs: &[BoundCertificate], kind: CertificateKind) -> &BoundCertificate {
    certs
        .iter()
        .find(|c| c.kind == kind)
        .expect("all kinds present")
}

/// A random proper graph on `grid` with `m` edges, its exact crossing count
/// and every lower-bound certificate.
pub fn certificate_record(
    grid: &GridSpec,
    m: usize,
    seed: u64,
    p_max: Option<u64>,
) -> Result<Record, CliError> {
    let g =
        random_proper_graph(grid, m, seed, true).map_err(|e| CliError::from(e).context(grid))?;
    let naive = count_crossings_naive(&g)?;
    let pruned = count_crossings_pruned(&g)?;
    let certs = all_certificates(&g, p_max)?;
    let cr = BigRational::from_integer(naive.total.into());
    let essential = certificate_value(&certs, CertificateKind::EssentialPgrid);
    let p_used = essential
        .p_max
        .expect("essential certificate records p_max");
    let phi = totient_sieve(p_used);
    let incidence_ok = essential
        .levels
        .iter()
        .all(|l| l.incidences == m as u64 * essential_points_per_edge(phi.values(), l.p));
    let mut r = Record::new();
    r.insert("grid".into(), json!(grid.to_string()));
    r.insert("d".into(), json!(grid.dim()));
    r.insert("volume".into(), json!(g.compute_volume()?.to_string()));
    r.insert("seed".into(), json!(seed));
    r.insert("edges".into(), json!(m));
    r.insert("crossings".into(), json!(naive.total.to_string()));
    r.insert(
        "pruned_agrees".into(),
        json!(pruned.total == naive.total && pruned.per_edge == naive.per_edge),
    );
    for kind in [
        CertificateKind::MidpointBucket,
        CertificateKind::MidpointFormula,
        CertificateKind::EssentialPgrid,
        CertificateKind::GreedyRemoval,
    ] {
        let c = certificate_value(&certs, kind);
        r.insert(
            kind.to_string().replace('-', "_"),
            json!(c.value.to_string()),
        );
    }
    r.insert("p_max".into(), json!(p_used));
    r.insert("sound".into(), json!(certs.iter().all(|c| c.value <= cr)));
    r.insert("incidence_mass_ok".into(), json!(incidence_ok));
    Ok(r)
}

fn totient_records(ns: &[u64], timing: bool) -> Result<Vec<Record>, CliError> {
    let start = Instant::now();
    let n_max = *ns.iter().max().expect("validated non-empty");
    let mut by_n = std::collections::HashMap::new();
    for row in totient_rows(n_max) {
        if ns.contains(&row.n) {
            by_n.insert(row.n, row);
        }
    }
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    Ok(ns
        .iter()
        .map(|n| {
            let row = &by_n[n];
            let cube = (*n as u128).pow(3);
            let mut r = Record::new();
            r.insert("n".into(), json!(n));
            r.insert("phi".into(), json!(row.phi));
            r.insert("s1".into(), json!(row.s1.to_string()));
            r.insert("s2".into(), json!(row.s2.to_string()));
            r.insert("s3_f64".into(), json!(row.s3_f64));
            r.insert("s2_over_n3_f64".into(), json!(row.s2 as f64 / cube as f64));
            r.insert("s2_below_n3".into(), json!(row.s2 < cube));
            r.insert("s2_at_least_n3_over_11".into(), json!(11 * row.s2 >= cube));
            if timing {
                r.insert("wall_ms_f64".into(), json!(elapsed));
            }
            r
        })
        .collect())
}

/// Exact enumeration counts on `grid` next to the closed-form values.
pub fn enumeration_record(grid: &GridSpec) -> Result<Record, CliError> {
    let cg = build_conflict_graph(grid)?;
    let subgraphs = count_crossing_free_subgraphs(&cg)?;
    let matchings = count_crossing_free_matchings(&cg)?;
    let volume = grid.volume();
    let trees = if grid
        .volume_u64()
        .is_some_and(|v| v <= SPANNING_TREE_VOLUME_CAP)
    {
        Some(count_crossing_free_spanning_trees(grid)?)
    } else {
        None
    };
    let max_edges = max_independent_set(&cg);
    let bose = bose_formula(grid);
    let upper = if volume >= BigUint::from(2u32) {
        Some(ncs_upper_formula(&volume, grid.dim() as u32)?)
    } else {
        None
    };
    let mut r = Record::new();
    r.insert("grid".into(), json!(grid.to_string()));
    r.insert("d".into(), json!(grid.dim()));
    r.insert("volume".into(), json!(volume.to_string()));
    r.insert("candidates".into(), json!(cg.len()));
    r.insert("conflict_pairs".into(), json!(cg.conflict_pairs()));
    r.insert("subgraphs".into(), json!(subgraphs.to_string()));
    r.insert("matchings".into(), json!(matchings.to_string()));
    r.insert(
        "spanning_trees".into(),
        trees.map_or(Value::Null, |t| json!(t.to_string())),
    );
    r.insert("max_edges".into(), json!(max_edges.to_string()));
    r.insert("bose".into(), json!(bose.to_string()));
    r.insert(
        "ncs_upper".into(),
        upper.as_ref().map_or(Value::Null, |u| json!(u.to_string())),
    );
    r.insert(
        "max_edges_is_bose".into(),
        json!(BigUint::from(max_edges) == bose),
    );
    r.insert(
        "ordered".into(),
        json!(matchings <= subgraphs && upper.as_ref().is_none_or(|u| subgraphs <= *u)),
    );
    Ok(r)
}

/// Crossing count of one graph, optionally with every certificate.
pub fn crossing_record(
    g: &GridGraph,
    report: &CrossingReport,
    certs: Option<&[BoundCertificate]>,
    per_edge: bool,
) -> Result<Record, CliError> {
    let mut r = Record::new();
    r.insert("dim".into(), json!(g.dim()));
    r.insert("vertices".into(), json!(g.vertex_count()));
    r.insert("edges".into(), json!(g.edge_count()));
    r.insert(
        "volume".into(),
        g.compute_volume()
            .map_or(Value::Null, |v| json!(v.to_string())),
    );
    r.insert(
        "method".into(),
        json!(format!("{:?}", report.method).to_lowercase()),
    );
    r.insert("crossings".into(), json!(report.total.to_string()));
    r.insert(
        "per_edge_max".into(),
        json!(report.per_edge_max().to_string()),
    );
    if let Some(certs) = certs {
        for c in certs {
            r.insert(
                c.kind.to_string().replace('-', "_"),
                json!(c.value.to_string()),
            );
            if let Some(p) = c.p_max {
                r.insert("p_max".into(), json!(p));
            }
        }
    }
    if per_edge {
        r.insert("per_edge".into(), json!(report.per_edge));
    }
    Ok(r)
}
