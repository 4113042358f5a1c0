//! Loading trees or raw vectors into a common site list.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use tropoclust_core::phylo::{
    cophenetic, parse_newick_lines, taxa_count, NewickOptions, PairIndexMap, PairVector,
};
use tropoclust_core::{Error, Scalar, TorusPoint};

/// Sites read from one input file, all on the same taxa.
#[derive(Debug, Clone)]
pub struct Dataset<S> {
    pub ids: Vec<String>,
    pub map: PairIndexMap,
    pub points: Vec<TorusPoint<S>>,
    /// Whether the sites came from trees (and so must stay ultrametric).
    pub trees: bool,
}

impl<S: Scalar> Dataset<S> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn pair_vector(&self, i: usize) -> Result<PairVector<S>> {
        Ok(PairVector::from_point(self.map.clone(), &self.points[i])?)
    }
}

pub fn load<S: Scalar>(path: &Path, vectors: bool) -> Result<Dataset<S>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let data = if vectors {
        parse_vectors(&text)
    } else {
        parse_trees(&text)
    };
    data.with_context(|| path.display().to_string())
}

/// One Newick tree per line; every tree must be equidistant on the same taxa.
pub fn parse_trees<S: Scalar>(text: &str) -> Result<Dataset<S>> {
    let trees = parse_newick_lines::<S>(text, NewickOptions::default())?;
    let lines: Vec<usize> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, _)| i + 1)
        .collect();
    let mut map: Option<PairIndexMap> = None;
    let mut points = Vec::with_capacity(trees.len());
    for (tree, line) in trees.iter().zip(&lines) {
        let u = cophenetic(tree).map_err(|e| Error::Parse(format!("line {line}: {e}")))?;
        match &map {
            None => map = Some(u.map().clone()),
            Some(m) if m.taxa() != u.map().taxa() => {
                return Err(Error::Parse(format!(
                    "line {line}: taxa differ from the first tree"
                ))
                .into());
            }
            Some(_) => {}
        }
        points.push(u.point()?);
    }
    let Some(map) = map else {
        return Err(Error::EmptyInput("no trees").into());
    };
    Ok(Dataset {
        ids: (1..=points.len()).map(|i| format!("tree{i}")).collect(),
        map,
        points,
        trees: true,
    })
}

/// CSV with a header `id,<taxon>,…` followed by rows `id,<value>,…` holding
/// the pair coordinates in lexicographic pair order. Lines starting with `#`
/// are comments.
pub fn parse_vectors<S: Scalar>(text: &str) -> Result<Dataset<S>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().context("reading the header")?.clone();
    if header.len() < 4 {
        bail!("the header needs an id column and at least three taxa");
    }
    let taxa: Vec<&str> = header.iter().skip(1).collect();
    let sorted = {
        let mut t = taxa.clone();
        t.sort();
        t
    };
    if taxa != sorted {
        bail!("taxa in the header must be sorted");
    }
    let map = PairIndexMap::new(taxa.iter().copied())?;
    let n = map.num_pairs();
    let mut ids = Vec::new();
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.context("reading a row")?;
        let line = record.position().map_or(0, |p| p.line());
        let fields: Vec<&str> = record.iter().collect();
        if fields.len() != n + 1 {
            bail!(
                "line {line}: expected an id and {n} values for {} taxa, got {} fields",
                map.num_taxa(),
                fields.len()
            );
        }
        let values = fields[1..]
            .iter()
            .map(|f| S::parse_literal(f))
            .collect::<Result<Vec<S>, _>>()
            .with_context(|| format!("line {line}"))?;
        ids.push(fields[0].to_string());
        points.push(TorusPoint::new(values)?);
    }
    if points.is_empty() {
        return Err(Error::EmptyInput("no vectors").into());
    }
    debug_assert_eq!(taxa_count(n).ok(), Some(map.num_taxa()));
    Ok(Dataset {
        ids,
        map,
        points,
        trees: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tropoclust_core::Rational;

    #[test]
    fn vectors_round_trip() {
        let d = parse_vectors::<Rational>("id,a,b,c\nv1,1,3,0\nv2,0,3,1\n").unwrap();
        assert_eq!(d.ids, vec!["v1", "v2"]);
        assert_eq!(d.points[1], TorusPoint::from_ints(&[0, 3, 1]));
        assert!(!d.trees);
    }

    #[test]
    fn vectors_reject_bad_rows() {
        assert!(parse_vectors::<f64>("id,a,b,c\nv1,1,3\n").is_err());
        assert!(parse_vectors::<f64>("id,b,a\nv1,1\n").is_err());
        assert!(parse_vectors::<f64>("id,a,b,c\n").is_err());
        assert!(parse_vectors::<f64>("id,a,b\nv,1\n").is_err());
    }

    #[test]
    fn trees_share_taxa() {
        let ok = parse_trees::<Rational>("(a:1,b:1,c:1);\n\n(c:2,(b:1,a:1):1);\n").unwrap();
        assert_eq!(ok.ids, vec!["tree1", "tree2"]);
        assert_eq!(ok.points[1], TorusPoint::from_ints(&[2, 4, 4]));
        let err = parse_trees::<Rational>("(a:1,b:1,c:1);\n(a:1,b:1,d:1);\n").unwrap_err();
        assert!(format!("{err:#}").contains("line 2"));
        let err = parse_trees::<Rational>("(a:1,b:1,c:1);\n((a:1,b:2):1,c:2);\n").unwrap_err();
        assert!(format!("{err:#}").contains("line 2"), "{err:#}");
    }
}
