#![allow(dead_code)]

use rand::Rng;
use tropoclust_core::phylo::{cophenetic, default_taxa, random_tree_with_coarse_type};
use tropoclust_core::{Rational, Scalar, TorusPoint};

pub type Q = Rational;

pub fn q(num: i64, den: i64) -> Q {
    Q::new(num.into(), den.into())
}

/// Point with coordinates `k/den`, `|k| ≤ range`.
pub fn random_point<R: Rng>(rng: &mut R, n: usize, range: i64, den: i64) -> TorusPoint<Q> {
    TorusPoint::new((0..n).map(|_| q(rng.random_range(-range..=range), den)).collect()).unwrap()
}

/// Random split of the first `n_taxa` default taxa into two nonempty blocks.
pub fn random_split<R: Rng>(rng: &mut R, n_taxa: usize) -> Vec<Vec<String>> {
    let taxa = default_taxa(n_taxa);
    loop {
        let mask: u32 = rng.random_range(1..(1u32 << n_taxa) - 1);
        let (a, b): (Vec<_>, Vec<_>) = taxa.iter().enumerate().partition(|(i, _)| mask & (1 << i) != 0);
        let a: Vec<String> = a.into_iter().map(|(_, t)| t.clone()).collect();
        let b: Vec<String> = b.into_iter().map(|(_, t)| t.clone()).collect();
        if !a.is_empty() && !b.is_empty() {
            return vec![a, b];
        }
    }
}

/// Cophenetic point of a random tree with the given coarse type.
pub fn tree_point<S: Scalar, R: Rng>(
    rng: &mut R,
    blocks: &[Vec<String>],
    omega: f64,
    big_omega: f64,
) -> TorusPoint<S> {
    let tree = random_tree_with_coarse_type::<S, _>(blocks, omega, big_omega, rng).unwrap();
    cophenetic(&tree).unwrap().point().unwrap()
}
