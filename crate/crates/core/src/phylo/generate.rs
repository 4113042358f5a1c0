//! Seeded random equidistant binary trees with bounded internal depths.
//!
//! Topologies come from uniform sequential pair merging (coalescent order).
//! Depths are then assigned from the root down: leaves sit at depth `Ω`, and
//! each non-root internal node is drawn uniformly from
//! `(max(parent depth, ω), Ω)`. Draws are snapped to a dyadic grid of
//! spacing 2⁻²⁰ so the same seed gives the same tree in exact and float mode.
//! Each draw leaves one grid step per internal level still below the node, so
//! deep chains never run out of room.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::phylo::tree::PhyloTree;
use crate::phylo::ultrametric::default_taxa;
use crate::scalar::{convert, Scalar};

const GRID_BITS: i32 = 20;

#[derive(Debug, Clone)]
enum Shape {
    Leaf(String),
    Internal(Vec<Shape>),
}

impl Shape {
    /// Longest chain of internal nodes strictly below this one.
    fn levels_below(&self) -> i64 {
        match self {
            Shape::Leaf(_) => 0,
            Shape::Internal(kids) => kids
                .iter()
                .map(|k| match k {
                    Shape::Leaf(_) => 0,
                    Shape::Internal(_) => 1 + k.levels_below(),
                })
                .max()
                .unwrap_or(0),
        }
    }
}

fn check_bounds(omega: f64, big_omega: f64) -> Result<()> {
    if !(omega > 0.0 && omega < big_omega && big_omega.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "depth bounds need 0 < omega < Omega, got omega={omega}, Omega={big_omega}"
        )));
    }
    Ok(())
}

/// Random binary equidistant tree on `n_taxa` default-named taxa.
pub fn random_equidistant_tree<S: Scalar>(
    n_taxa: usize,
    omega: f64,
    big_omega: f64,
    seed: u64,
) -> Result<PhyloTree<S>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_equidistant_tree_with(&default_taxa(n_taxa), omega, big_omega, &mut rng)
}

pub fn random_equidistant_tree_with<S: Scalar, R: Rng + ?Sized>(
    taxa: &[String],
    omega: f64,
    big_omega: f64,
    rng: &mut R,
) -> Result<PhyloTree<S>> {
    check_bounds(omega, big_omega)?;
    if taxa.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 taxa, got {}",
            taxa.len()
        )));
    }
    let shape = coalescent(taxa, rng);
    realize(&shape, omega, big_omega, rng)
}

/// Random tree whose coarse type is `blocks`: the root gets one child per
/// block, and each block of two or more taxa is a random binary subtree.
/// With two blocks the result is binary.
pub fn random_tree_with_coarse_type<S: Scalar, R: Rng + ?Sized>(
    blocks: &[Vec<String>],
    omega: f64,
    big_omega: f64,
    rng: &mut R,
) -> Result<PhyloTree<S>> {
    check_bounds(omega, big_omega)?;
    if blocks.len() < 2 || blocks.iter().any(|b| b.is_empty()) {
        return Err(Error::InvalidArgument(
            "a coarse type needs at least two nonempty blocks".to_string(),
        ));
    }
    let children = blocks.iter().map(|b| coalescent(b, rng)).collect();
    realize(&Shape::Internal(children), omega, big_omega, rng)
}

fn coalescent<R: Rng + ?Sized>(taxa: &[String], rng: &mut R) -> Shape {
    let mut pool: Vec<Shape> = taxa.iter().cloned().map(Shape::Leaf).collect();
    while pool.len() > 1 {
        let i = rng.random_range(0..pool.len());
        let mut j = rng.random_range(0..pool.len() - 1);
        if j >= i {
            j += 1;
        }
        let (lo, hi) = (i.min(j), i.max(j));
        let b = pool.swap_remove(hi);
        let a = pool.swap_remove(lo);
        pool.push(Shape::Internal(vec![a, b]));
    }
    pool.pop().expect("at least one taxon")
}

fn realize<S: Scalar, R: Rng + ?Sized>(
    shape: &Shape,
    omega: f64,
    big_omega: f64,
    rng: &mut R,
) -> Result<PhyloTree<S>> {
    let mut tree = PhyloTree::with_root();
    let leaf_depth: S = convert(&big_omega);
    let Shape::Internal(children) = shape else {
        return Err(Error::InvalidArgument("a tree needs two taxa".to_string()));
    };
    let mut stack: Vec<(&Shape, usize, f64, S)> = children
        .iter()
        .rev()
        .map(|c| (c, tree.root(), 0.0, S::zero()))
        .collect();
    while let Some((node, parent, parent_depth, parent_exact)) = stack.pop() {
        match node {
            Shape::Leaf(label) => {
                let length = leaf_depth.clone() - parent_exact;
                tree.add_child(parent, Some(label.clone()), length);
            }
            Shape::Internal(kids) => {
                let (depth, exact) = draw_depth::<S, R>(
                    parent_depth.max(omega),
                    big_omega,
                    node.levels_below(),
                    rng,
                )?;
                let id = tree.add_child(parent, None, exact.clone() - parent_exact);
                for k in kids.iter().rev() {
                    stack.push((k, id, depth, exact.clone()));
                }
            }
        }
    }
    Ok(tree)
}

/// Uniform draw from the grid points strictly inside `(lo, hi)`, keeping
/// `reserve` grid points free above the draw.
fn draw_depth<S: Scalar, R: Rng + ?Sized>(
    lo: f64,
    hi: f64,
    reserve: i64,
    rng: &mut R,
) -> Result<(f64, S)> {
    let scale = 2f64.powi(GRID_BITS);
    let first = (lo * scale).floor() as i64 + 1;
    let last = (hi * scale).ceil() as i64 - 1 - reserve;
    if first > last {
        return Err(Error::InvalidArgument(format!(
            "depth interval ({lo}, {hi}) is too narrow"
        )));
    }
    let k = rng.random_range(first..=last);
    let exact = S::from_int(k) / S::from_int(1i64 << GRID_BITS);
    Ok((k as f64 / scale, exact))
}
