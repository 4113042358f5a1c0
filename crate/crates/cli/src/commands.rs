use std::collections::BTreeMap;

use anyhow::{anyhow, bail, ensure, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tropoclust_core::clustering::{cluster_restarts, ClusterOptions};
use tropoclust_core::fermat_weber::{corrected_tropical_median, SiteSet};
use tropoclust_core::phylo::{
    clade_support, cophenetic, default_taxa, emit_newick, random_equidistant_tree_with,
    random_tree_with_coarse_type, tree_from_ultrametric, PairIndexMap, PairVector,
    UltrametricVector,
};
use tropoclust_core::scalar::convert;
use tropoclust_core::trop::asym_dist;
use tropoclust_core::{Arithmetic, Rational, Scalar, TorusPoint};

use crate::input::{load, Dataset};
use crate::output::{csv_text, histogram, point_json, Sink};
use crate::{AnalyzeArgs, ClusterArgs, GenArgs, InputArgs, NotConverged};

pub const MEDIAN_SCHEMA: &str = "tropoclust.median/1";
pub const CLUSTER_SCHEMA: &str = "tropoclust.cluster/1";
pub const ANALYZE_SCHEMA: &str = "tropoclust.analyze/1";
const HISTOGRAM_BINS: usize = 20;

macro_rules! dispatch {
    ($mode:expr, $f:ident($($arg:expr),*)) => {
        match $mode {
            Arithmetic::Exact => $f::<Rational>($($arg),*),
            Arithmetic::Float => $f::<f64>($($arg),*),
        }
    };
}

fn mode_name(mode: Arithmetic) -> &'static str {
    match mode {
        Arithmetic::Exact => "exact",
        Arithmetic::Float => "float",
    }
}

/// Newick of the tree encoded by `point`, if it is an ultrametric.
fn consensus_newick<S: Scalar>(map: &PairIndexMap, point: &TorusPoint<S>) -> Option<String> {
    let pv = PairVector::from_point(map.clone(), point).ok()?;
    let u = UltrametricVector::new(pv).ok()?;
    Some(emit_newick(&tree_from_ultrametric(&u)))
}

fn ultrametrics<S: Scalar>(data: &Dataset<S>) -> Result<Vec<UltrametricVector<S>>> {
    (0..data.len())
        .map(|i| {
            UltrametricVector::new(data.pair_vector(i)?)
                .with_context(|| format!("site {}", data.ids[i]))
        })
        .collect()
}

pub fn distances(args: &InputArgs) -> Result<()> {
    dispatch!(args.arithmetic, distances_in(args))
}

fn distances_in<S: Scalar>(args: &InputArgs) -> Result<()> {
    let data = load::<S>(&args.input, args.vectors)?;
    ensure!(data.len() >= 2, "need at least two inputs, got {}", data.len());
    let mut header = vec![""];
    header.extend(data.ids.iter().map(String::as_str));
    let rows = data.points.iter().enumerate().map(|(i, x)| {
        let mut row = vec![data.ids[i].clone()];
        row.extend(
            data.points
                .iter()
                .map(|y| asym_dist(x, y).expect("equal lengths").to_literal()),
        );
        row
    });
    let text = csv_text(&header, rows)?;
    Sink::new(args.out.as_deref())?.emit("distances.csv", &text, true)
}

pub fn median(args: &InputArgs) -> Result<()> {
    dispatch!(args.arithmetic, median_in(args))
}

fn median_in<S: Scalar>(args: &InputArgs) -> Result<()> {
    let data = load::<S>(&args.input, args.vectors)?;
    let sites = SiteSet::new(data.points.clone())?;
    let r = corrected_tropical_median(&sites, data.trees)?;
    let newick = consensus_newick(&data.map, &r.median);
    if data.trees && newick.is_none() {
        bail!("the consensus is not an ultrametric");
    }
    let report = json!({
        "schema": MEDIAN_SCHEMA,
        "arithmetic": mode_name(args.arithmetic),
        "taxa": data.map.taxa(),
        "sites": data.len(),
        "median": point_json(&r.median),
        "fw_value": r.fw_value.to_literal(),
        "vertex_count": r.vertices.len(),
        "vertices": r.vertices.iter().map(point_json).collect::<Vec<_>>(),
        "dimension": r.dimension,
        "degenerate_drop": r.degenerate_drop.map(|i| data.ids[i].clone()),
        "subdominant_applied": r.subdominant_applied,
        "newick": newick,
    });
    let sink = Sink::new(args.out.as_deref())?;
    sink.emit_json("median.json", &report, true)?;
    if let Some(nwk) = &newick {
        sink.emit("median.nwk", &format!("{nwk}\n"), false)?;
    }
    Ok(())
}

pub fn cluster(args: &ClusterArgs) -> Result<()> {
    dispatch!(args.input.arithmetic, cluster_in(args))
}

fn cluster_in<S: Scalar>(args: &ClusterArgs) -> Result<()> {
    let data = load::<S>(&args.input.input, args.input.vectors)?;
    let m = data.len();
    ensure!(args.k >= 1 && args.k <= m, "k must lie in 1..={m}, got {}", args.k);
    let sites = SiteSet::new(data.points.clone())?;
    let opts = ClusterOptions {
        max_iters: args.max_iters,
        tree_mode: data.trees,
        restarts: args.runs.max(1),
        ..ClusterOptions::new(args.k, args.seed)
    };
    let summary = cluster_restarts(&sites, &opts)?;
    let best = &summary.best;

    // Number clusters by their smallest member so the output does not depend on seeding order.
    let mut order: Vec<usize> = (0..best.k()).collect();
    let members = best.clusters();
    order.sort_by_key(|&c| members[c].first().copied().unwrap_or(usize::MAX));
    let mut relabel = vec![0; best.k()];
    for (new, &old) in order.iter().enumerate() {
        relabel[old] = new;
    }

    let sink = Sink::new(args.input.out.as_deref())?;
    let mut clusters = Vec::new();
    for (new, &old) in order.iter().enumerate() {
        let centroid = &best.centroids[old];
        let newick = consensus_newick(&data.map, centroid);
        if data.trees && newick.is_none() {
            bail!("consensus of cluster {new} is not an ultrametric");
        }
        if let Some(nwk) = &newick {
            sink.emit(&format!("consensus_{new}.nwk"), &format!("{nwk}\n"), false)?;
        }
        let coarse = if data.trees {
            let pv = PairVector::from_point(data.map.clone(), centroid)?;
            Some(UltrametricVector::new(pv)?.coarse_type().to_string())
        } else {
            None
        };
        clusters.push(json!({
            "index": new,
            "size": members[old].len(),
            "members": members[old].iter().map(|&s| data.ids[s].clone()).collect::<Vec<_>>(),
            "centroid": point_json(centroid),
            "coarse_type": coarse,
            "newick": newick,
        }));
    }

    let lonely: Vec<String> = best
        .lonely_centroids()
        .into_iter()
        .map(|s| data.ids[s].clone())
        .collect();
    let runs: Vec<Value> = summary
        .runs
        .iter()
        .map(|r| {
            json!({
                "seed": r.seed,
                "loss": r.loss.to_literal(),
                "iterations": r.iterations,
                "converged": r.converged,
            })
        })
        .collect();
    let best_seed = summary.runs[0].seed;
    let report = json!({
        "schema": CLUSTER_SCHEMA,
        "arithmetic": mode_name(args.input.arithmetic),
        "taxa": data.map.taxa(),
        "sites": m,
        "k": args.k,
        "runs": opts.restarts,
        "seed": args.seed,
        "best": {
            "seed": best_seed,
            "loss": best.loss.to_literal(),
            "iterations": best.iterations,
            "converged": best.converged,
            "sizes": order.iter().map(|&c| members[c].len()).collect::<Vec<_>>(),
            "lonely_centroids": lonely,
            "clusters": clusters,
        },
        "mean_loss": summary.mean_loss().to_literal(),
        "all_runs": runs,
    });

    let assignment = csv_text(
        &["id", "cluster"],
        best.assignment
            .iter()
            .enumerate()
            .map(|(s, &c)| [data.ids[s].clone(), relabel[c].to_string()]),
    )?;
    let sizes = csv_text(
        &["cluster", "size"],
        order
            .iter()
            .enumerate()
            .map(|(new, &old)| [new.to_string(), members[old].len().to_string()]),
    )?;
    let mut by_seed = summary.runs.clone();
    by_seed.sort_by_key(|r| r.seed);
    let losses = csv_text(
        &["seed", "loss", "iterations", "converged"],
        by_seed.iter().map(|r| {
            [
                r.seed.to_string(),
                r.loss.to_literal(),
                r.iterations.to_string(),
                r.converged.to_string(),
            ]
        }),
    )?;
    let values: Vec<f64> = by_seed.iter().map(|r| r.loss.to_f64_lossy()).collect();
    let hist = csv_text(
        &["lower", "upper", "count"],
        histogram(&values, HISTOGRAM_BINS)
            .into_iter()
            .map(|(lo, hi, c)| [lo.to_string(), hi.to_string(), c.to_string()]),
    )?;
    sink.emit("assignment.csv", &assignment, false)?;
    sink.emit("cluster_sizes.csv", &sizes, false)?;
    sink.emit("losses.csv", &losses, false)?;
    sink.emit("loss_histogram.csv", &hist, false)?;
    sink.emit_json("cluster.json", &report, true)?;

    if !best.converged {
        return Err(NotConverged(format!(
            "best run (seed {best_seed}) stopped after {} iterations",
            best.iterations
        ))
        .into());
    }
    Ok(())
}

pub fn analyze(args: &AnalyzeArgs) -> Result<()> {
    dispatch!(args.input.arithmetic, analyze_in(args))
}

fn analyze_in<S: Scalar>(args: &AnalyzeArgs) -> Result<()> {
    let data = load::<S>(&args.input.input, args.input.vectors)?;
    let trees = ultrametrics(&data)?;
    let sink = Sink::new(args.input.out.as_deref())?;

    let mut census: BTreeMap<String, usize> = BTreeMap::new();
    for u in &trees {
        *census.entry(u.coarse_type().to_string()).or_default() += 1;
    }
    let mut types: Vec<(String, usize)> = census.into_iter().collect();
    types.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let mut clades = Vec::new();
    for text in &args.clade {
        let names: Vec<&str> = text.split(',').map(str::trim).collect();
        let support = clade_support(&trees, &names).with_context(|| format!("clade {text}"))?;
        clades.push(json!({ "clade": names, "support": support }));
    }

    let mut pairs = Vec::new();
    for text in &args.pair {
        let (a, b) = text
            .split_once(':')
            .ok_or_else(|| anyhow!("pair `{text}` is not of the form a:b"))?;
        let depths = trees
            .iter()
            .map(|u| u.mrca_depth(a, b))
            .collect::<Result<Vec<S>, _>>()
            .with_context(|| format!("pair {text}"))?;
        let csv = csv_text(
            &["id", "depth"],
            depths
                .iter()
                .zip(&data.ids)
                .map(|(d, id)| [id.clone(), d.to_literal()]),
        )?;
        let file = format!("mrca_{a}_{b}.csv");
        sink.emit(&file, &csv, false)?;
        let f: Vec<f64> = depths.iter().map(|d| d.to_f64_lossy()).collect();
        pairs.push(json!({
            "pair": [a, b],
            "file": file,
            "mean": f.iter().sum::<f64>() / f.len() as f64,
            "min": f.iter().copied().fold(f64::INFINITY, f64::min),
            "max": f.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }));
    }

    let gaps = trees
        .iter()
        .map(|u| u.resolution_gap())
        .collect::<Result<Vec<S>, _>>()?;
    let gap_csv = csv_text(
        &["id", "gap"],
        gaps.iter().zip(&data.ids).map(|(g, id)| [id.clone(), g.to_literal()]),
    )?;
    sink.emit("resolution_gaps.csv", &gap_csv, false)?;
    let gf: Vec<f64> = gaps.iter().map(|g| g.to_f64_lossy()).collect();

    let report = json!({
        "schema": ANALYZE_SCHEMA,
        "arithmetic": mode_name(args.input.arithmetic),
        "taxa": data.map.taxa(),
        "trees": trees.len(),
        "coarse_types": {
            "distinct": types.len(),
            "counts": types.iter().map(|(t, c)| json!({ "coarse_type": t, "count": c })).collect::<Vec<_>>(),
        },
        "clade_support": clades,
        "mrca_depths": pairs,
        "resolution_gap": {
            "min": gf.iter().copied().fold(f64::INFINITY, f64::min),
            "max": gf.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            "mean": gf.iter().sum::<f64>() / gf.len() as f64,
            "unresolved": gaps.iter().filter(|g| g.is_zero_tol(1e-9)).count(),
        },
    });
    sink.emit_json("analyze.json", &report, true)
}

/// Blocks of a root split written as `a,b|c,d,e`.
fn parse_coarse_type(text: &str) -> Result<Vec<Vec<String>>> {
    let blocks: Vec<Vec<String>> = text
        .split('|')
        .map(|b| b.split(',').map(|t| t.trim().to_string()).collect())
        .collect();
    ensure!(
        blocks.len() >= 2 && blocks.iter().flatten().all(|t| !t.is_empty()),
        "coarse type `{text}` needs at least two nonempty blocks"
    );
    Ok(blocks)
}

pub fn gen(args: &GenArgs) -> Result<()> {
    let blocks = args.coarse_type.as_deref().map(parse_coarse_type).transpose()?;
    let taxa = match (&blocks, args.n_taxa) {
        (Some(b), n) => {
            let mut t: Vec<String> = b.iter().flatten().cloned().collect();
            t.sort();
            t.dedup();
            ensure!(t.len() == b.iter().map(Vec::len).sum::<usize>(), "taxa repeat across blocks");
            if let Some(n) = n {
                ensure!(n == t.len(), "--N {n} disagrees with the {} taxa of the coarse type", t.len());
            }
            t
        }
        (None, Some(n)) => default_taxa(n),
        (None, None) => bail!("either --N or --coarse-type is required"),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut text = String::new();
    let omega: Rational = convert(&args.omega);
    let height: Rational = convert(&args.big_omega);
    for i in 0..args.count {
        let tree = match &blocks {
            Some(b) => random_tree_with_coarse_type::<Rational, _>(b, args.omega, args.big_omega, &mut rng)?,
            None => random_equidistant_tree_with::<Rational, _>(&taxa, args.omega, args.big_omega, &mut rng)?,
        };
        let stats = cophenetic(&tree)?.depth_stats();
        ensure!(
            stats.height == height && stats.nu()? > omega,
            "generated tree {} violates the depth bounds",
            i + 1
        );
        text.push_str(&emit_newick(&tree));
        text.push('\n');
    }
    Sink::new(args.out.as_deref())?.emit("trees.nwk", &text, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_type_spec() {
        let b = parse_coarse_type("a,b|c, d").unwrap();
        assert_eq!(b, vec![vec!["a", "b"], vec!["c", "d"]]);
        assert!(parse_coarse_type("a,b").is_err());
        assert!(parse_coarse_type("a,|c").is_err());
    }
}
