//! Tropical k-means++: seeding, Lloyd iteration under the asymmetric
//! distance, restarts, and an exhaustive oracle for small inputs.
//!
//! Distances are always taken from the site to the centroid, `d(s, c)`.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fermat_weber::{corrected_tropical_median, fw_value, tropical_median, SiteSet};
use crate::scalar::{sum, Scalar, DEFAULT_TOLERANCE};
use crate::trop::{asym_dist_unchecked, pointwise_max, TorusPoint};

/// Largest input accepted by [`brute_force_optimal`].
pub const BRUTE_FORCE_LIMIT: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Init {
    KMeansPlusPlus,
    /// Start from these sites as centroids.
    Explicit(Vec<usize>),
}

/// How the M-step computes a cluster's centroid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CentroidRule {
    /// Tropical median, with tree corrections when `tree_mode` is set.
    Median,
    /// Coordinatewise maximum of the cluster.
    PointwiseMax,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterOptions {
    pub k: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub init: Init,
    pub tree_mode: bool,
    pub restarts: usize,
    pub rule: CentroidRule,
}

impl ClusterOptions {
    pub fn new(k: usize, seed: u64) -> Self {
        ClusterOptions {
            k,
            seed,
            max_iters: 1000,
            init: Init::KMeansPlusPlus,
            tree_mode: false,
            restarts: 1,
            rule: CentroidRule::Median,
        }
    }

    fn validate(&self, m: usize) -> Result<()> {
        if self.k == 0 || self.k > m {
            return Err(Error::InvalidArgument(format!(
                "k must lie in 1..={m}, got {}",
                self.k
            )));
        }
        if let Init::Explicit(idx) = &self.init {
            if idx.len() != self.k {
                return Err(Error::InvalidArgument(format!(
                    "expected {} initial centroids, got {}",
                    self.k,
                    idx.len()
                )));
            }
            if let Some(bad) = idx.iter().find(|&&i| i >= m) {
                return Err(Error::InvalidArgument(format!("no site with index {bad}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering<S> {
    /// Cluster index of each site.
    pub assignment: Vec<usize>,
    pub centroids: Vec<TorusPoint<S>>,
    pub loss: S,
    /// Number of A-steps, including the one that found the assignment unchanged.
    pub iterations: usize,
    /// Loss after every half-step: A-step, M-step, A-step, …
    pub history: Vec<S>,
    pub converged: bool,
    /// Sites the run started from.
    pub initial: Vec<usize>,
}

impl<S: Scalar> Clustering<S> {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    /// Site indices of each cluster, in increasing order.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k()];
        for (s, &c) in self.assignment.iter().enumerate() {
            out[c].push(s);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.clusters().iter().map(Vec::len).collect()
    }

    /// Partition as sorted blocks sorted by smallest member; independent of
    /// cluster numbering.
    pub fn partition(&self) -> Vec<Vec<usize>> {
        let mut blocks: Vec<Vec<usize>> = self
            .clusters()
            .into_iter()
            .filter(|b| !b.is_empty())
            .collect();
        blocks.sort();
        blocks
    }

    /// Members of singleton clusters.
    pub fn lonely_centroids(&self) -> Vec<usize> {
        self.clusters()
            .into_iter()
            .filter(|b| b.len() == 1)
            .map(|b| b[0])
            .collect()
    }
}

/// `Σ_s d(s, centroid[assignment[s]])`.
pub fn clustering_loss<S: Scalar>(
    sites: &SiteSet<S>,
    assignment: &[usize],
    centroids: &[TorusPoint<S>],
) -> S {
    sum(sites
        .sites()
        .iter()
        .zip(assignment)
        .map(|(s, &c)| asym_dist_unchecked(s.coords(), centroids[c].coords())))
}

/// k-means++ seeding with weights `min_i d(s, c_i)` (first power).
pub fn seed_kmeanspp<S: Scalar, R: Rng + ?Sized>(
    sites: &SiteSet<S>,
    k: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let m = sites.len();
    if k == 0 || k > m {
        return Err(Error::InvalidArgument(format!(
            "k must lie in 1..={m}, got {k}"
        )));
    }
    let pts = sites.sites();
    let mut chosen = vec![rng.random_range(0..m)];
    let mut weight: Vec<f64> = pts
        .iter()
        .map(|s| asym_dist_unchecked(s.coords(), pts[chosen[0]].coords()).to_f64_lossy())
        .collect();
    weight[chosen[0]] = 0.0;
    while chosen.len() < k {
        let total: f64 = weight.iter().sum();
        let next = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in weight.iter().enumerate() {
                if w > 0.0 {
                    pick = Some(i);
                    if r < w {
                        break;
                    }
                    r -= w;
                }
            }
            pick.expect("positive total weight")
        } else {
            // Every remaining site coincides with a chosen one.
            let free: Vec<usize> = (0..m).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        for (i, s) in pts.iter().enumerate() {
            let d = asym_dist_unchecked(s.coords(), pts[next].coords()).to_f64_lossy();
            weight[i] = weight[i].min(d);
        }
        for &c in &chosen {
            weight[c] = 0.0;
        }
    }
    Ok(chosen)
}

/// A-step: nearest centroid, smallest index on ties.
pub fn assign<S: Scalar>(sites: &SiteSet<S>, centroids: &[TorusPoint<S>]) -> Result<Vec<usize>> {
    if centroids.is_empty() {
        return Err(Error::EmptyInput("no centroids"));
    }
    if let Some(c) = centroids.iter().find(|c| c.len() != sites.dim()) {
        return Err(Error::DimensionMismatch {
            expected: sites.dim(),
            got: c.len(),
        });
    }
    Ok(sites
        .sites()
        .iter()
        .map(|s| {
            let mut best = 0;
            let mut best_d = asym_dist_unchecked(s.coords(), centroids[0].coords());
            for (i, c) in centroids.iter().enumerate().skip(1) {
                let d = asym_dist_unchecked(s.coords(), c.coords());
                if (best_d.clone() - d.clone()).is_pos(DEFAULT_TOLERANCE) {
                    best = i;
                    best_d = d;
                }
            }
            best
        })
        .collect())
}

/// M-step. Every cluster must be nonempty.
pub fn update_centroids<S: Scalar>(
    sites: &SiteSet<S>,
    assignment: &[usize],
    k: usize,
    tree_mode: bool,
    rule: CentroidRule,
) -> Result<Vec<TorusPoint<S>>> {
    let mut members = vec![Vec::new(); k];
    for (s, &c) in assignment.iter().enumerate() {
        members[c].push(s);
    }
    members
        .iter()
        .enumerate()
        .map(|(j, idx)| {
            if idx.is_empty() {
                return Err(Error::InvalidArgument(format!("cluster {j} is empty")));
            }
            let cluster = sites.subset(idx)?;
            match rule {
                CentroidRule::Median => Ok(corrected_tropical_median(&cluster, tree_mode)?.median),
                CentroidRule::PointwiseMax => pointwise_max(cluster.sites()),
            }
        })
        .collect()
}

/// Gives every empty cluster a site: the one farthest from its own centroid
/// among clusters with at least two members, smallest index on ties. The
/// moved site becomes the new centroid.
fn repair_empty<S: Scalar>(
    sites: &SiteSet<S>,
    assignment: &mut [usize],
    centroids: &mut [TorusPoint<S>],
) {
    let k = centroids.len();
    loop {
        let mut sizes = vec![0usize; k];
        for &c in assignment.iter() {
            sizes[c] += 1;
        }
        let Some(empty) = sizes.iter().position(|&n| n == 0) else {
            return;
        };
        let mut best: Option<(usize, S)> = None;
        for (s, site) in sites.sites().iter().enumerate() {
            if sizes[assignment[s]] < 2 {
                continue;
            }
            let d = asym_dist_unchecked(site.coords(), centroids[assignment[s]].coords());
            if best.as_ref().is_none_or(|(_, b)| d > *b) {
                best = Some((s, d));
            }
        }
        let Some((s, _)) = best else { return };
        assignment[s] = empty;
        centroids[empty] = sites.sites()[s].clone();
    }
}

/// One run of Lloyd's iteration from the initial centroids given by `opts`
/// (k-means++ draws use `opts.seed`).
pub fn lloyd<S: Scalar>(sites: &SiteSet<S>, opts: &ClusterOptions) -> Result<Clustering<S>> {
    opts.validate(sites.len())?;
    let initial = match &opts.init {
        Init::Explicit(idx) => idx.clone(),
        Init::KMeansPlusPlus => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            seed_kmeanspp(sites, opts.k, &mut rng)?
        }
    };
    let mut centroids: Vec<TorusPoint<S>> =
        initial.iter().map(|&i| sites.sites()[i].clone()).collect();
    let mut previous: Option<Vec<usize>> = None;
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iters {
        iterations += 1;
        let mut assignment = assign(sites, &centroids)?;
        repair_empty(sites, &mut assignment, &mut centroids);
        history.push(clustering_loss(sites, &assignment, &centroids));
        if previous.as_ref() == Some(&assignment) {
            converged = true;
            break;
        }
        centroids = update_centroids(sites, &assignment, opts.k, opts.tree_mode, opts.rule)?;
        history.push(clustering_loss(sites, &assignment, &centroids));
        previous = Some(assignment);
    }
    let assignment = match previous {
        Some(a) if converged => a,
        _ => {
            // Out of iterations: report the assignment matching the last centroids.
            let mut a = assign(sites, &centroids)?;
            repair_empty(sites, &mut a, &mut centroids);
            a
        }
    };
    let loss = clustering_loss(sites, &assignment, &centroids);
    Ok(Clustering {
        assignment,
        centroids,
        loss,
        iterations,
        history,
        converged,
        initial,
    })
}

/// [`lloyd`] with the coordinatewise maximum as centroid.
pub fn lloyd_maxvariant<S: Scalar>(
    sites: &SiteSet<S>,
    opts: &ClusterOptions,
) -> Result<Clustering<S>> {
    let opts = ClusterOptions {
        rule: CentroidRule::PointwiseMax,
        ..opts.clone()
    };
    lloyd(sites, &opts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord<S> {
    pub seed: u64,
    pub loss: S,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartSummary<S> {
    pub best: Clustering<S>,
    /// One record per run, sorted by `(loss, seed)`.
    pub runs: Vec<RunRecord<S>>,
}

impl<S: Scalar> RestartSummary<S> {
    pub fn mean_loss(&self) -> S {
        sum(self.runs.iter().map(|r| r.loss.clone())) / S::from_int(self.runs.len() as i64)
    }

    pub fn losses(&self) -> Vec<S> {
        self.runs.iter().map(|r| r.loss.clone()).collect()
    }
}

/// `opts.restarts` independent k-means++ runs with seeds `opts.seed`,
/// `opts.seed + 1`, …; the best run is the first in `(loss, seed)` order.
pub fn cluster_restarts<S: Scalar>(
    sites: &SiteSet<S>,
    opts: &ClusterOptions,
) -> Result<RestartSummary<S>> {
    let runs = opts.restarts.max(1);
    let mut results: Vec<(u64, Clustering<S>)> = (0..runs as u64)
        .into_par_iter()
        .map(|r| {
            let seed = opts.seed.wrapping_add(r);
            let run_opts = ClusterOptions {
                seed,
                ..opts.clone()
            };
            lloyd(sites, &run_opts).map(|c| (seed, c))
        })
        .collect::<Result<_>>()?;
    results.sort_by(|(sa, a), (sb, b)| {
        a.loss
            .partial_cmp(&b.loss)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(sa.cmp(sb))
    });
    let records = results
        .iter()
        .map(|(seed, c)| RunRecord {
            seed: *seed,
            loss: c.loss.clone(),
            iterations: c.iterations,
            converged: c.converged,
        })
        .collect();
    let best = results.swap_remove(0).1;
    Ok(RestartSummary {
        best,
        runs: records,
    })
}

/// Global minimizer of the clustering loss over all partitions into at most
/// `k` nonempty blocks. Centroids are plain tropical medians.
pub fn brute_force_optimal<S: Scalar>(sites: &SiteSet<S>, k: usize) -> Result<Clustering<S>> {
    let m = sites.len();
    if m > BRUTE_FORCE_LIMIT {
        return Err(Error::TooManySites(m, BRUTE_FORCE_LIMIT));
    }
    if k == 0 || k > m {
        return Err(Error::InvalidArgument(format!(
            "k must lie in 1..={m}, got {k}"
        )));
    }
    let mut cache: HashMap<u32, S> = HashMap::new();
    let mut block_value = |mask: u32| -> Result<S> {
        if let Some(v) = cache.get(&mask) {
            return Ok(v.clone());
        }
        let idx: Vec<usize> = (0..m).filter(|&i| mask & (1 << i) != 0).collect();
        let v = fw_value(&sites.subset(&idx)?)?;
        cache.insert(mask, v.clone());
        Ok(v)
    };

    // Restricted growth strings: labels[0] = 0, labels[i] ≤ 1 + max(labels[..i]).
    let mut labels = vec![0usize; m];
    let mut best: Option<(S, Vec<usize>)> = None;
    loop {
        let blocks = labels.iter().max().map_or(0, |b| b + 1);
        let mut masks = vec![0u32; blocks];
        for (i, &l) in labels.iter().enumerate() {
            masks[l] |= 1 << i;
        }
        let mut total = S::zero();
        for &mask in &masks {
            total = total + block_value(mask)?;
        }
        if best.as_ref().is_none_or(|(b, _)| total < *b) {
            best = Some((total, labels.clone()));
        }
        if !next_partition(&mut labels, k) {
            break;
        }
    }
    let (loss, labels) = best.expect("at least one partition");
    let blocks = labels.iter().max().map_or(0, |b| b + 1);
    let mut centroids = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let idx: Vec<usize> = (0..m).filter(|&i| labels[i] == b).collect();
        centroids.push(tropical_median(&sites.subset(&idx)?)?.median);
    }
    Ok(Clustering {
        assignment: labels,
        centroids,
        loss,
        iterations: 0,
        history: Vec::new(),
        converged: true,
        initial: Vec::new(),
    })
}

/// Advances a restricted growth string with at most `k` distinct labels.
fn next_partition(labels: &mut [usize], k: usize) -> bool {
    let m = labels.len();
    for i in (1..m).rev() {
        let prefix_max = labels[..i].iter().copied().max().unwrap_or(0);
        if labels[i] <= prefix_max && labels[i] + 1 < k {
            labels[i] += 1;
            labels[i + 1..].iter_mut().for_each(|l| *l = 0);
            return true;
        }
    }
    false
}

/// `loss / optimal`; `0/0` counts as 1, and `None` means a positive loss
/// against a zero optimum.
pub fn competitive_factor<S: Scalar>(loss: &S, optimal: &S) -> Option<S> {
    if optimal.is_zero_tol(DEFAULT_TOLERANCE) {
        if loss.is_zero_tol(DEFAULT_TOLERANCE) {
            Some(S::one())
        } else {
            None
        }
    } else {
        Some(loss.clone() / optimal.clone())
    }
}
