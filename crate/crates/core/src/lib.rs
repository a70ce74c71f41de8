//! Exact quantization and centroidal Voronoi tessellations for the uniform
//! self-similar measure on the dyadic Cantor set with contraction ratio `r`.
//!
//! All arithmetic is exact: a concrete ratio is a big rational, and the ratio
//! may also be kept as a formal parameter so that distortions and gate
//! inequalities come out as rational functions of `r`.

pub mod codebook;
pub mod cvt;
pub mod error;
pub mod measure;
pub mod oracle;
pub mod poly;
pub mod rational_fn;
pub mod scalar;
pub mod threshold;
pub mod word;

pub use codebook::{Codebook, CodebookRecord, Construction, Family};
pub use cvt::{CvtCertificate, CvtStatus, DistortionBound};
pub use error::{Error, Result};
pub use measure::CantorMeasure;
pub use oracle::DiscreteMeasure;
pub use poly::IntPoly;
pub use rational_fn::{isolate_root, ParamRational};
pub use scalar::{ParamScalar, Scalar};
pub use threshold::Threshold;
pub use word::{AffineMap, Word};
