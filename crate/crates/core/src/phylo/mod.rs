//! Phylogenetic trees, their ultrametric encodings, and tree statistics.

pub mod generate;
pub mod tree;
pub mod ultrametric;

pub use generate::{random_equidistant_tree, random_equidistant_tree_with, random_tree_with_coarse_type};
pub use tree::{emit_newick, parse_newick, parse_newick_lines, parse_newick_with, NewickOptions, PhyloTree};
pub use ultrametric::{
    clade_support, cophenetic, default_taxa, sqrt_machine_epsilon, taxa_count, tree_from_ultrametric,
    CoarseType, DepthStats, PairIndexMap, PairVector, UltrametricVector,
};
