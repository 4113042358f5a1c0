//! Tropical k-means++ clustering of equidistant phylogenetic trees under the
//! asymmetric tropical distance, with tropical median consensus trees
//! computed from Fermat–Weber polytropes.

pub mod clustering;
pub mod error;
pub mod fermat_weber;
pub mod lp;
pub mod phylo;
pub mod scalar;
pub mod trop;

pub use error::{Error, Result};
pub use scalar::{Arithmetic, Rational, Scalar};
pub use trop::TorusPoint;
