//! Rooted phylogenetic trees and Newick I/O.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::trop::TORUS_EQ_TOLERANCE;

#[derive(Debug, Clone, PartialEq)]
pub struct Node<S> {
    pub label: Option<String>,
    /// Length of the edge to the parent; zero for the root.
    pub length: S,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
}

/// Rooted tree stored as an arena of nodes. Leaves carry unique taxon labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PhyloTree<S> {
    nodes: Vec<Node<S>>,
    root: usize,
}

impl<S: Scalar> PhyloTree<S> {
    /// A tree consisting of a root only; grow it with [`PhyloTree::add_child`].
    pub fn with_root() -> Self {
        PhyloTree {
            nodes: vec![Node {
                label: None,
                length: S::zero(),
                children: Vec::new(),
                parent: None,
            }],
            root: 0,
        }
    }

    pub fn add_child(&mut self, parent: usize, label: Option<String>, length: S) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node {
            label,
            length,
            children: Vec::new(),
            parent: Some(parent),
        });
        self.nodes[parent].children.push(id);
        id
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node(&self, id: usize) -> &Node<S> {
        &self.nodes[id]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_leaf(&self, id: usize) -> bool {
        self.nodes[id].children.is_empty()
    }

    /// Leaf ids in preorder.
    pub fn leaves(&self) -> Vec<usize> {
        self.preorder()
            .into_iter()
            .filter(|&id| self.is_leaf(id))
            .collect()
    }

    pub fn num_leaves(&self) -> usize {
        self.leaves().len()
    }

    /// Taxon labels in lexicographic order.
    pub fn taxa(&self) -> Vec<String> {
        let mut taxa: Vec<String> = self
            .leaves()
            .into_iter()
            .filter_map(|id| self.nodes[id].label.clone())
            .collect();
        taxa.sort();
        taxa
    }

    pub fn preorder(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            order.push(id);
            stack.extend(self.nodes[id].children.iter().rev());
        }
        order
    }

    /// Depth of every node (root-path length), indexed by node id.
    pub fn depths(&self) -> Vec<S> {
        let mut depth = vec![S::zero(); self.nodes.len()];
        for id in self.preorder() {
            if let Some(p) = self.nodes[id].parent {
                depth[id] = depth[p].clone() + self.nodes[id].length.clone();
            }
        }
        depth
    }

    /// Checks structure: every internal node has at least two children, every
    /// leaf is labeled, labels are unique. With `strict`, internal edges must
    /// also have positive length.
    pub fn validate(&self, strict: bool) -> Result<()> {
        let mut seen = HashSet::new();
        for id in self.preorder() {
            let node = &self.nodes[id];
            if node.children.is_empty() {
                let label = node.label.as_ref().ok_or_else(|| {
                    Error::InvalidArgument("leaf without a taxon label".to_string())
                })?;
                if !seen.insert(label.clone()) {
                    return Err(Error::DuplicateTaxon(label.clone()));
                }
            } else {
                if node.children.len() < 2 && id != self.root {
                    return Err(Error::InvalidArgument(
                        "internal node with a single child".to_string(),
                    ));
                }
                if strict && id != self.root && !node.length.is_pos(0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "internal edge of nonpositive length {}",
                        node.length
                    )));
                }
            }
        }
        if self.nodes[self.root].children.len() < 2 && self.nodes.len() > 1 {
            return Err(Error::InvalidArgument(
                "root with a single child".to_string(),
            ));
        }
        Ok(())
    }

    /// Smallest and largest root-to-leaf length.
    pub fn leaf_depth_range(&self) -> (S, S) {
        let depth = self.depths();
        let leaves = self.leaves();
        let mut lo = depth[leaves[0]].clone();
        let mut hi = lo.clone();
        for &l in &leaves[1..] {
            lo = S::min_of(lo, depth[l].clone());
            hi = S::max_of(hi, depth[l].clone());
        }
        (lo, hi)
    }

    /// All leaves at the same depth; floats within `1e-8·(1 + height)`.
    pub fn is_equidistant(&self) -> bool {
        let (lo, hi) = self.leaf_depth_range();
        let tol = TORUS_EQ_TOLERANCE * (1.0 + hi.abs().to_f64_lossy());
        lo.approx_eq(&hi, tol)
    }

    /// Common leaf depth of an equidistant tree.
    pub fn height(&self) -> S {
        self.leaf_depth_range().1
    }

    /// Smallest taxon label below each node.
    fn min_labels(&self) -> Vec<String> {
        let mut min = vec![String::new(); self.nodes.len()];
        for id in self.preorder().into_iter().rev() {
            let node = &self.nodes[id];
            min[id] = if node.children.is_empty() {
                node.label.clone().unwrap_or_default()
            } else {
                node.children
                    .iter()
                    .map(|&c| min[c].clone())
                    .min()
                    .unwrap_or_default()
            };
        }
        min
    }

    /// Same tree with children ordered by their smallest descendant label.
    pub fn canonical(&self) -> PhyloTree<S> {
        let min = self.min_labels();
        let mut out = PhyloTree::with_root();
        out.nodes[0].label = self.nodes[self.root].label.clone();
        let mut stack = vec![(self.root, 0usize)];
        while let Some((src, dst)) = stack.pop() {
            let mut kids = self.nodes[src].children.clone();
            kids.sort_by(|a, b| min[*a].cmp(&min[*b]));
            for k in kids {
                let node = &self.nodes[k];
                let id = out.add_child(dst, node.label.clone(), node.length.clone());
                stack.push((k, id));
            }
        }
        out
    }

    /// Structural equality up to child order, with equal lengths and labels.
    pub fn isomorphic(&self, other: &PhyloTree<S>) -> bool {
        emit_newick(self) == emit_newick(other)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NewickOptions {
    /// Read a missing `:length` as zero instead of failing.
    pub allow_missing_lengths: bool,
}

/// Parses one rooted Newick expression terminated by `;`.
pub fn parse_newick<S: Scalar>(text: &str) -> Result<PhyloTree<S>> {
    parse_newick_with(text, NewickOptions::default())
}

pub fn parse_newick_with<S: Scalar>(text: &str, opts: NewickOptions) -> Result<PhyloTree<S>> {
    let mut parser = Parser {
        bytes: text.as_bytes(),
        text,
        pos: 0,
        opts,
    };
    let mut tree = PhyloTree::with_root();
    parser.subtree(&mut tree, 0)?;
    parser.skip_ws();
    if parser.peek() != Some(b';') {
        return Err(parser.error("expected `;`"));
    }
    parser.pos += 1;
    parser.skip_ws();
    if parser.pos != parser.bytes.len() {
        return Err(parser.error("trailing characters after `;`"));
    }
    tree.validate(false)?;
    Ok(tree)
}

/// Parses a file with one tree per line; blank lines are skipped.
/// Errors carry the 1-based line number.
pub fn parse_newick_lines<S: Scalar>(text: &str, opts: NewickOptions) -> Result<Vec<PhyloTree<S>>> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            parse_newick_with(line, opts).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))
        })
        .collect()
}

struct Parser<'a> {
    bytes: &'a [u8],
    text: &'a str,
    pos: usize,
    opts: NewickOptions,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Newick {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn token(&mut self) -> &str {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|b| !matches!(b, b'(' | b')' | b',' | b':' | b';'))
        {
            self.pos += 1;
        }
        self.text[start..self.pos].trim()
    }

    /// Reads the subtree rooted at the existing node `id`.
    fn subtree<S: Scalar>(&mut self, tree: &mut PhyloTree<S>, id: usize) -> Result<()> {
        self.skip_ws();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            loop {
                let child = tree.add_child(id, None, S::zero());
                self.subtree(tree, child)?;
                self.skip_ws();
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.error("expected `,` or `)`")),
                }
            }
            if tree.node(id).children.len() < 2 {
                return Err(self.error("internal node needs at least two children"));
            }
        }
        let label = self.token().to_string();
        if !label.is_empty() {
            tree.nodes[id].label = Some(label);
        } else if tree.is_leaf(id) {
            return Err(self.error("leaf without a taxon label"));
        }

        self.skip_ws();
        let is_root = id == tree.root;
        if self.peek() == Some(b':') {
            self.pos += 1;
            let start = self.pos;
            let literal = self.token().to_string();
            let length = S::parse_literal(&literal).map_err(|_| Error::Newick {
                position: start,
                message: format!("invalid branch length `{literal}`"),
            })?;
            if !is_root {
                tree.nodes[id].length = length;
            }
        } else if !is_root && !self.opts.allow_missing_lengths {
            return Err(self.error("missing branch length"));
        }
        Ok(())
    }
}

/// Canonical Newick: children sorted by smallest descendant label, lengths
/// written so that they parse back to the same value.
pub fn emit_newick<S: Scalar>(tree: &PhyloTree<S>) -> String {
    let canon = tree.canonical();
    let mut out = String::new();
    write_node(&canon, canon.root, &mut out);
    out.push(';');
    out
}

fn write_node<S: Scalar>(tree: &PhyloTree<S>, id: usize, out: &mut String) {
    let node = tree.node(id);
    if !node.children.is_empty() {
        out.push('(');
        for (i, &c) in node.children.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write_node(tree, c, out);
        }
        out.push(')');
    }
    if let Some(label) = &node.label {
        out.push_str(label);
    }
    if id != tree.root {
        out.push(':');
        out.push_str(&node.length.to_literal());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    const EXAMPLE: &str = "(((a:1,b:1):1,c:2):1,d:3);";

    #[test]
    fn parses_example_tree() {
        let t: PhyloTree<Rational> = parse_newick(EXAMPLE).unwrap();
        assert_eq!(t.num_leaves(), 4);
        assert_eq!(t.taxa(), vec!["a", "b", "c", "d"]);
        assert!(t.is_equidistant());
        assert_eq!(t.height(), Rational::from_int(3));
    }

    #[test]
    fn parses_cherry_and_unequal_tree() {
        let t: PhyloTree<f64> = parse_newick("(a:1,b:1);").unwrap();
        assert_eq!(t.num_leaves(), 2);
        assert!(t.is_equidistant());
        let t: PhyloTree<f64> = parse_newick("((a:1,b:2):1,c:2);").unwrap();
        assert!(!t.is_equidistant());
    }

    #[test]
    fn emits_canonical_round_trip() {
        for text in [EXAMPLE, "(a:1,b:1);", "((a:1,b:2):1,c:2);"] {
            let t: PhyloTree<Rational> = parse_newick(text).unwrap();
            let emitted = emit_newick(&t);
            let back: PhyloTree<Rational> = parse_newick(&emitted).unwrap();
            assert!(t.isomorphic(&back));
            assert_eq!(emit_newick(&back), emitted);
        }
        let t: PhyloTree<Rational> = parse_newick("(d:3,(c:2,(b:1,a:1):1):1);").unwrap();
        assert_eq!(emit_newick(&t), EXAMPLE);
    }

    #[test]
    fn syntax_errors_report_position() {
        let err = parse_newick::<f64>("(a:1,b:1").unwrap_err();
        assert!(matches!(err, Error::Newick { position: 8, .. }), "{err:?}");
        assert!(matches!(
            parse_newick::<f64>("(a:1,b:x);"),
            Err(Error::Newick { position: 7, .. })
        ));
        assert!(parse_newick::<f64>("(a:1,:1);").is_err());
        assert!(parse_newick::<f64>("(a:1,b:1);x").is_err());
        assert!(parse_newick::<f64>("((a:1):1,b:1);").is_err());
    }

    #[test]
    fn duplicate_taxa_rejected() {
        assert_eq!(
            parse_newick::<f64>("(a:1,a:1);").unwrap_err(),
            Error::DuplicateTaxon("a".to_string())
        );
    }

    #[test]
    fn missing_lengths_need_the_flag() {
        assert!(parse_newick::<f64>("(a,b:1);").is_err());
        let opts = NewickOptions {
            allow_missing_lengths: true,
        };
        let t: PhyloTree<f64> = parse_newick_with("(a,b:1);", opts).unwrap();
        assert_eq!(t.leaf_depth_range(), (0.0, 1.0));
    }

    #[test]
    fn negative_leaf_edges_and_strict_validation() {
        let t: PhyloTree<f64> = parse_newick("((a:-1,b:-1):2,c:1);").unwrap();
        assert!(t.is_equidistant());
        assert!(t.validate(true).is_ok());
        let t: PhyloTree<f64> = parse_newick("((a:2,b:2):0,c:2);").unwrap();
        assert!(t.validate(false).is_ok());
        assert!(t.validate(true).is_err());
    }

    #[test]
    fn internal_labels_and_whitespace() {
        let t: PhyloTree<f64> = parse_newick(" ( Pf : 1 , Pv:1 )anc : 0.5 ;").unwrap();
        assert_eq!(t.taxa(), vec!["Pf", "Pv"]);
        assert_eq!(emit_newick(&t), "(Pf:1,Pv:1)anc;");
    }

    #[test]
    fn forest_errors_carry_line_numbers() {
        let text = "(a:1,b:1);\n\n(a:1,b:);\n";
        let err = parse_newick_lines::<f64>(text, NewickOptions::default()).unwrap_err();
        assert!(err.to_string().starts_with("line 3:"), "{err}");
    }
}
