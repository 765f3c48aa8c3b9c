//! Estimating diagonal entries of powers of sparse symmetric matrices with
//! phase estimation, and the reduction that makes the problem hard.
//!
//! ```
//! use dee::sparse::SparseSymmetricMatrix;
//!
//! let k3 = SparseSymmetricMatrix::adjacency_from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
//! // closed walks of length 3 from vertex 0
//! assert_eq!(k3.power_diag_exact(0, 3).unwrap(), 2.0);
//! ```

pub mod circuit;
pub mod error;
pub mod gateset;
pub mod hardness;
pub mod numeric;
pub mod qpe;
pub mod random;
pub mod sparse;
pub mod spectral;

pub use error::{Error, Result};
