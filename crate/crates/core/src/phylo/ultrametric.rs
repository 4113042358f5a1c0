//! Dissimilarity vectors indexed by taxon pairs, ultrametrics, and the
//! tree statistics derived from them.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::phylo::tree::PhyloTree;
use crate::scalar::Scalar;
use crate::trop::{TorusPoint, TORUS_EQ_TOLERANCE};

/// `√ε₀` for binary64, the ε-ultrametric threshold used for float results.
pub fn sqrt_machine_epsilon() -> f64 {
    f64::EPSILON.sqrt()
}

/// Bijection between unordered taxon pairs and coordinates. Taxa are sorted
/// lexicographically and pairs `(a, b)`, `a < b`, are ordered
/// lexicographically, so the layout of a vector is fixed by its taxa.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairIndexMap {
    taxa: Vec<String>,
    lookup: HashMap<String, usize>,
}

impl PairIndexMap {
    pub fn new<I, T>(taxa: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<String>,
    {
        let mut taxa: Vec<String> = taxa.into_iter().map(Into::into).collect();
        taxa.sort();
        for w in taxa.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateTaxon(w[0].clone()));
            }
        }
        let lookup = taxa
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(PairIndexMap { taxa, lookup })
    }

    /// Taxon names `a, b, c, …` (or `t01, t02, …` beyond 26).
    pub fn with_default_taxa(n_taxa: usize) -> Self {
        PairIndexMap::new(default_taxa(n_taxa)).expect("distinct default names")
    }

    /// Map for a vector of length `n`, with default taxon names.
    pub fn for_len(n: usize) -> Result<Self> {
        Ok(Self::with_default_taxa(taxa_count(n)?))
    }

    pub fn taxa(&self) -> &[String] {
        &self.taxa
    }

    pub fn num_taxa(&self) -> usize {
        self.taxa.len()
    }

    pub fn num_pairs(&self) -> usize {
        let n = self.taxa.len();
        n * n.saturating_sub(1) / 2
    }

    pub fn taxon_index(&self, taxon: &str) -> Result<usize> {
        self.lookup
            .get(taxon)
            .copied()
            .ok_or_else(|| Error::UnknownTaxon(taxon.to_string()))
    }

    /// Coordinate of the pair of taxon indices `i ≠ j` (either order).
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i != j);
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let n = self.taxa.len();
        a * (2 * n - a - 1) / 2 + (b - a - 1)
    }

    pub fn index_of(&self, a: &str, b: &str) -> Result<usize> {
        let (i, j) = (self.taxon_index(a)?, self.taxon_index(b)?);
        if i == j {
            return Err(Error::InvalidArgument(format!(
                "pair of identical taxa `{a}`"
            )));
        }
        Ok(self.index(i, j))
    }

    /// Taxon indices of a coordinate.
    pub fn pair(&self, index: usize) -> (usize, usize) {
        let n = self.taxa.len();
        let mut rest = index;
        for a in 0..n {
            let row = n - a - 1;
            if rest < row {
                return (a, a + 1 + rest);
            }
            rest -= row;
        }
        panic!("pair index {index} out of range for {n} taxa");
    }

    pub fn pair_names(&self, index: usize) -> (&str, &str) {
        let (a, b) = self.pair(index);
        (&self.taxa[a], &self.taxa[b])
    }
}

pub fn default_taxa(n_taxa: usize) -> Vec<String> {
    if n_taxa <= 26 {
        (0..n_taxa)
            .map(|i| char::from(b'a' + i as u8).to_string())
            .collect()
    } else {
        let width = n_taxa.to_string().len();
        (1..=n_taxa).map(|i| format!("t{i:0width$}")).collect()
    }
}

/// `N` with `N(N−1)/2 = n`.
pub fn taxa_count(n: usize) -> Result<usize> {
    let mut taxa = 2;
    while taxa * (taxa - 1) / 2 < n {
        taxa += 1;
    }
    if taxa * (taxa - 1) / 2 == n {
        Ok(taxa)
    } else {
        Err(Error::NotPairCount(n))
    }
}

/// A dissimilarity on taxa, stored by pair coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct PairVector<S> {
    map: PairIndexMap,
    values: Vec<S>,
}

impl<S: Scalar> PairVector<S> {
    pub fn new(map: PairIndexMap, values: Vec<S>) -> Result<Self> {
        if values.len() != map.num_pairs() {
            return Err(Error::DimensionMismatch {
                expected: map.num_pairs(),
                got: values.len(),
            });
        }
        Ok(PairVector { map, values })
    }

    /// Vector of length `N(N−1)/2` with default taxon names.
    pub fn from_values(values: Vec<S>) -> Result<Self> {
        let map = PairIndexMap::for_len(values.len())?;
        PairVector::new(map, values)
    }

    pub fn from_ints(values: &[i64]) -> Result<Self> {
        Self::from_values(values.iter().map(|&v| S::from_int(v)).collect())
    }

    pub fn from_point(map: PairIndexMap, point: &TorusPoint<S>) -> Result<Self> {
        PairVector::new(map, point.coords().to_vec())
    }

    pub fn map(&self) -> &PairIndexMap {
        &self.map
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn num_taxa(&self) -> usize {
        self.map.num_taxa()
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.values[self.map.index(i, j)]
    }

    pub fn point(&self) -> Result<TorusPoint<S>> {
        TorusPoint::new(self.values.clone())
    }

    pub fn max_value(&self) -> S {
        fold_values(&self.values, S::max_of)
    }

    pub fn min_value(&self) -> S {
        fold_values(&self.values, S::min_of)
    }

    /// `self + λ𝟙`.
    pub fn shifted(&self, lambda: &S) -> Self {
        PairVector {
            map: self.map.clone(),
            values: self.values.iter().map(|v| v.clone() + lambda.clone()).collect(),
        }
    }

    fn triples(&self) -> impl Iterator<Item = [S; 3]> + '_ {
        let n = self.num_taxa();
        (0..n).flat_map(move |a| {
            (a + 1..n).flat_map(move |b| {
                (b + 1..n).map(move |c| {
                    [
                        self.get(a, b).clone(),
                        self.get(a, c).clone(),
                        self.get(b, c).clone(),
                    ]
                })
            })
        })
    }

    /// Whether `(1 − ε)·max ≤ Mid` holds for every taxon triple, where
    /// `Mid = sum − max − min`.
    pub fn is_eps_ultrametric(&self, eps: &S) -> bool {
        self.triples().all(|t| {
            let (_, mid, hi) = sort3(t);
            !((S::one() - eps.clone()) * hi - mid).is_pos(0.0)
        })
    }

    /// Smallest ε ≥ 0 for which [`PairVector::is_eps_ultrametric`] holds.
    /// `None` if no finite ε works (a triple with maximum 0 and a negative
    /// middle value).
    pub fn min_eps(&self) -> Option<S> {
        let mut worst = S::zero();
        for t in self.triples() {
            let (_, mid, hi) = sort3(t);
            let needed = if hi.is_positive() {
                S::one() - mid / hi
            } else if hi.is_zero() {
                if mid.is_negative() {
                    return None;
                }
                S::zero()
            } else {
                S::zero()
            };
            worst = S::max_of(worst, needed);
        }
        Some(worst)
    }

    /// Three-point condition: in every triple the maximum is attained twice.
    /// Exact in exact mode; floats accept `min_eps ≤ √ε₀`.
    pub fn is_ultrametric(&self) -> bool {
        match self.min_eps() {
            None => false,
            Some(eps) => match S::MODE {
                crate::scalar::Arithmetic::Exact => eps.is_zero(),
                crate::scalar::Arithmetic::Float => {
                    eps.to_f64_lossy() <= sqrt_machine_epsilon()
                }
            },
        }
    }

    /// Largest ultrametric below `self`: `u*_ab` is the minimum over paths
    /// from `a` to `b` in the complete graph of the largest edge weight.
    pub fn subdominant_ultrametric(&self) -> UltrametricVector<S> {
        let n = self.num_taxa();
        let mut d = vec![vec![S::zero(); n]; n];
        for i in 0..n {
            for j in i + 1..n {
                d[i][j] = self.get(i, j).clone();
                d[j][i] = d[i][j].clone();
            }
        }
        for k in 0..n {
            for i in 0..n {
                if i == k {
                    continue;
                }
                for j in 0..n {
                    if j == i || j == k {
                        continue;
                    }
                    let via = S::max_of(d[i][k].clone(), d[k][j].clone());
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        let values = (0..self.map.num_pairs())
            .map(|p| {
                let (i, j) = self.map.pair(p);
                d[i][j].clone()
            })
            .collect();
        UltrametricVector(PairVector {
            map: self.map.clone(),
            values,
        })
    }
}

impl<S: fmt::Display> fmt::Display for PairVector<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

fn fold_values<S: Scalar>(values: &[S], f: fn(S, S) -> S) -> S {
    values
        .iter()
        .skip(1)
        .fold(values[0].clone(), |m, v| f(m, v.clone()))
}

fn sort3<S: Scalar>(t: [S; 3]) -> (S, S, S) {
    let [mut a, mut b, mut c] = t;
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    if b > c {
        std::mem::swap(&mut b, &mut c);
    }
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    (a, b, c)
}

/// A [`PairVector`] that satisfies the three-point condition.
#[derive(Debug, Clone, PartialEq)]
pub struct UltrametricVector<S>(PairVector<S>);

impl<S: Scalar> UltrametricVector<S> {
    pub fn new(v: PairVector<S>) -> Result<Self> {
        if v.num_taxa() < 2 {
            return Err(Error::InvalidArgument(
                "an ultrametric needs at least two taxa".to_string(),
            ));
        }
        if !v.is_ultrametric() {
            let eps = v
                .min_eps()
                .map(|e| e.to_f64_lossy().to_string())
                .unwrap_or_else(|| "inf".to_string());
            return Err(Error::NotUltrametric(format!("min eps {eps}")));
        }
        Ok(UltrametricVector(v))
    }

    pub fn from_ints(values: &[i64]) -> Result<Self> {
        Self::new(PairVector::from_ints(values)?)
    }

    pub fn as_pairs(&self) -> &PairVector<S> {
        &self.0
    }

    pub fn into_pairs(self) -> PairVector<S> {
        self.0
    }

    /// Height of the tree the vector encodes: `max(u)/2`.
    pub fn height(&self) -> S {
        self.0.max_value() / S::from_int(2)
    }

    /// Float tolerance for "strictly below the maximum".
    fn below_max_tol(&self) -> f64 {
        TORUS_EQ_TOLERANCE * (1.0 + self.0.max_value().abs().to_f64_lossy())
    }

    pub fn depth_stats(&self) -> DepthStats<S> {
        let max = self.0.max_value();
        let tol = self.below_max_tol();
        let height = self.height();
        let two = S::from_int(2);
        let second = self
            .0
            .values
            .iter()
            .filter(|v| (max.clone() - (*v).clone()).is_pos(tol))
            .cloned()
            .reduce(S::max_of);
        DepthStats {
            eta: height.clone() - self.0.min_value() / two.clone(),
            nu: second.map(|m2| height.clone() - m2 / two.clone()),
            height,
        }
    }

    /// Partition of the taxa by the subtrees below the root: `a ~ b` iff
    /// `u_ab < max(u)`.
    pub fn coarse_type(&self) -> CoarseType {
        let n = self.0.num_taxa();
        let max = self.0.max_value();
        let tol = self.below_max_tol();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut c = x;
            while p[c] != r {
                let next = p[c];
                p[c] = r;
                c = next;
            }
            r
        }
        for i in 0..n {
            for j in i + 1..n {
                if (max.clone() - self.0.get(i, j).clone()).is_pos(tol) {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri.max(rj)] = ri.min(rj);
                    }
                }
            }
        }
        let mut blocks: Vec<Vec<String>> = Vec::new();
        let mut block_of: HashMap<usize, usize> = HashMap::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            let b = *block_of.entry(r).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[b].push(self.0.map.taxa[i].clone());
        }
        CoarseType::new(blocks)
    }

    /// Depth of the most recent common ancestor of `a` and `b`.
    pub fn mrca_depth(&self, a: &str, b: &str) -> Result<S> {
        let idx = self.0.map.index_of(a, b)?;
        Ok(self.height() - self.0.values[idx].clone() / S::from_int(2))
    }

    /// Smallest gap `max − min` over all taxon triples; zero iff some triple
    /// is unresolved.
    pub fn resolution_gap(&self) -> Result<S> {
        if self.0.num_taxa() < 3 {
            return Err(Error::InvalidArgument(
                "resolution gap needs at least three taxa".to_string(),
            ));
        }
        Ok(self
            .0
            .triples()
            .map(|t| {
                let (lo, _, hi) = sort3(t);
                hi - lo
            })
            .reduce(S::min_of)
            .expect("at least one triple"))
    }

    /// Whether the taxa in `clade` form a clade: every distance inside is
    /// strictly smaller than every distance to the outside.
    pub fn contains_clade(&self, clade: &[usize]) -> bool {
        let n = self.0.num_taxa();
        let inside: Vec<bool> = (0..n).map(|i| clade.contains(&i)).collect();
        let mut max_in: Option<S> = None;
        let mut min_out: Option<S> = None;
        for i in 0..n {
            for j in i + 1..n {
                let v = self.0.get(i, j).clone();
                match (inside[i], inside[j]) {
                    (true, true) => max_in = Some(max_in.map_or(v.clone(), |m| S::max_of(m, v))),
                    (true, false) | (false, true) => {
                        min_out = Some(min_out.map_or(v.clone(), |m| S::min_of(m, v)))
                    }
                    _ => {}
                }
            }
        }
        match (max_in, min_out) {
            (Some(lo), Some(hi)) => (hi - lo).is_pos(self.below_max_tol()),
            _ => false,
        }
    }
}

impl<S> std::ops::Deref for UltrametricVector<S> {
    type Target = PairVector<S>;

    fn deref(&self) -> &PairVector<S> {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepthStats<S> {
    pub height: S,
    /// Largest depth of an internal node.
    pub eta: S,
    /// Smallest depth of a non-root internal node; `None` for star trees.
    pub nu: Option<S>,
}

impl<S: Clone> DepthStats<S> {
    pub fn nu(&self) -> Result<S> {
        self.nu.clone().ok_or(Error::StarTree)
    }
}

/// Partition of the taxa into the leaf sets of the root's child subtrees.
/// Blocks are sorted and ordered by their first taxon.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoarseType(Vec<Vec<String>>);

impl CoarseType {
    pub fn new(blocks: Vec<Vec<String>>) -> Self {
        let mut blocks: Vec<Vec<String>> = blocks
            .into_iter()
            .filter(|b| !b.is_empty())
            .map(|mut b| {
                b.sort();
                b
            })
            .collect();
        blocks.sort();
        CoarseType(blocks)
    }

    pub fn blocks(&self) -> &[Vec<String>] {
        &self.0
    }

    pub fn num_blocks(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for CoarseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks: Vec<String> = self.0.iter().map(|b| format!("{{{}}}", b.join(","))).collect();
        write!(f, "{{{}}}", blocks.join(","))
    }
}

/// Fraction of `trees` in which the taxa of `clade` form a clade.
pub fn clade_support<S: Scalar, T: AsRef<str>>(
    trees: &[UltrametricVector<S>],
    clade: &[T],
) -> Result<f64> {
    let Some(first) = trees.first() else {
        return Err(Error::EmptyInput("no trees"));
    };
    let n = first.num_taxa();
    if clade.len() < 2 || clade.len() >= n {
        return Err(Error::InvalidArgument(format!(
            "clade size must lie strictly between 1 and {n}, got {}",
            clade.len()
        )));
    }
    let mut hits = 0usize;
    for tree in trees {
        let mut idx = clade
            .iter()
            .map(|t| tree.map().taxon_index(t.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        idx.sort_unstable();
        idx.dedup();
        if idx.len() != clade.len() {
            return Err(Error::InvalidArgument("clade lists a taxon twice".to_string()));
        }
        if tree.contains_clade(&idx) {
            hits += 1;
        }
    }
    Ok(hits as f64 / trees.len() as f64)
}

/// Pairwise leaf distances of an equidistant tree.
pub fn cophenetic<S: Scalar>(tree: &PhyloTree<S>) -> Result<UltrametricVector<S>> {
    if !tree.is_equidistant() {
        let (lo, hi) = tree.leaf_depth_range();
        return Err(Error::NotEquidistant {
            min: lo.to_f64_lossy(),
            max: hi.to_f64_lossy(),
        });
    }
    let map = PairIndexMap::new(tree.taxa())?;
    let height = tree.height();
    let depth = tree.depths();
    let mut values = vec![S::zero(); map.num_pairs()];

    // For each internal node, every pair split between two of its children
    // has that node as MRCA.
    let mut below: Vec<Vec<usize>> = vec![Vec::new(); tree.num_nodes()];
    for id in tree.preorder().into_iter().rev() {
        let node = tree.node(id);
        if node.children.is_empty() {
            let label = node.label.as_deref().expect("validated leaf label");
            below[id] = vec![map.taxon_index(label)?];
            continue;
        }
        let dist = (height.clone() - depth[id].clone()) * S::from_int(2);
        let mut acc: Vec<usize> = Vec::new();
        for &c in &node.children {
            for &x in &below[c] {
                for &y in &acc {
                    values[map.index(x, y)] = dist.clone();
                }
            }
            acc.extend(below[c].iter().copied());
        }
        below[id] = acc;
    }
    UltrametricVector::new(PairVector::new(map, values)?)
}

/// Equidistant tree whose cophenetic vector is `u`, built by single-linkage
/// agglomeration: clusters at the smallest remaining distance merge first,
/// and all clusters joined at the same level become children of one node.
pub fn tree_from_ultrametric<S: Scalar>(u: &UltrametricVector<S>) -> PhyloTree<S> {
    let map = u.map();
    let n = map.num_taxa();
    let height = u.height();
    let two = S::from_int(2);
    let tol = u.below_max_tol();

    // Cluster = (member taxa, node depth, children as (cluster index, is_leaf)).
    struct Cluster<S> {
        members: Vec<usize>,
        depth: S,
        children: Vec<usize>,
        taxon: Option<usize>,
    }
    let mut clusters: Vec<Cluster<S>> = (0..n)
        .map(|i| Cluster {
            members: vec![i],
            depth: height.clone(),
            children: Vec::new(),
            taxon: Some(i),
        })
        .collect();
    let mut active: Vec<usize> = (0..n).collect();

    let linkage = |a: &Cluster<S>, b: &Cluster<S>| -> S {
        let mut best: Option<S> = None;
        for &x in &a.members {
            for &y in &b.members {
                let v = u.get(x, y).clone();
                best = Some(best.map_or(v.clone(), |m| S::min_of(m, v)));
            }
        }
        best.expect("nonempty clusters")
    };

    while active.len() > 1 {
        let mut level: Option<S> = None;
        for (ai, &a) in active.iter().enumerate() {
            for &b in &active[ai + 1..] {
                let d = linkage(&clusters[a], &clusters[b]);
                level = Some(level.map_or(d.clone(), |m| S::min_of(m, d)));
            }
        }
        let level = level.expect("two active clusters");

        // Group active clusters connected at this level.
        let k = active.len();
        let mut group: Vec<usize> = (0..k).collect();
        for i in 0..k {
            for j in i + 1..k {
                let d = linkage(&clusters[active[i]], &clusters[active[j]]);
                if !(d - level.clone()).is_pos(tol) {
                    let (gi, gj) = (group[i], group[j]);
                    if gi != gj {
                        let (keep, drop) = (gi.min(gj), gi.max(gj));
                        group.iter_mut().filter(|g| **g == drop).for_each(|g| *g = keep);
                    }
                }
            }
        }
        let mut next_active = Vec::new();
        let mut handled = vec![false; k];
        for i in 0..k {
            if handled[i] {
                continue;
            }
            let members: Vec<usize> = (0..k).filter(|&j| group[j] == group[i]).collect();
            members.iter().for_each(|&j| handled[j] = true);
            if members.len() == 1 {
                next_active.push(active[i]);
                continue;
            }
            let children: Vec<usize> = members.iter().map(|&j| active[j]).collect();
            let taxa: Vec<usize> = children
                .iter()
                .flat_map(|&c| clusters[c].members.iter().copied())
                .collect();
            clusters.push(Cluster {
                members: taxa,
                depth: height.clone() - level.clone() / two.clone(),
                children,
                taxon: None,
            });
            next_active.push(clusters.len() - 1);
        }
        active = next_active;
    }

    let mut tree = PhyloTree::with_root();
    let top = active[0];
    let mut stack: Vec<(usize, usize)> = clusters[top]
        .children
        .iter()
        .map(|&c| (c, tree.root()))
        .collect();
    let root_depth = clusters[top].depth.clone();
    let mut parent_depth: HashMap<usize, S> = HashMap::new();
    parent_depth.insert(tree.root(), root_depth.clone());
    // Shift so the root sits at depth zero.
    while let Some((c, parent)) = stack.pop() {
        let cl = &clusters[c];
        let length = cl.depth.clone() - parent_depth[&parent].clone();
        let label = cl.taxon.map(|t| map.taxa()[t].clone());
        let id = tree.add_child(parent, label, length);
        parent_depth.insert(id, cl.depth.clone());
        stack.extend(cl.children.iter().map(|&g| (g, id)));
    }
    tree
}
