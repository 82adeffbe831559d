//! Nearest-neighbor learning in semimetric spaces.
//!
//! The crate works over a finite sample whose pairwise distances are stored in
//! a validated [`SemimetricMatrix`]: symmetric, zero exactly on the diagonal,
//! but not required to satisfy the triangle inequality. On top of it sit
//!
//! * [`space`]: distance constructions (fractional ℓp, Jensen-Shannon,
//!   k-median Hausdorff) and adversarial fixtures,
//! * [`geometry`]: greedy nets, exact packing numbers, density and doubling
//!   constants,
//! * [`classifier`]: margins, the induced 1-NN rule and consistent condensing,
//! * [`bounds`]: sample-compression generalization bounds with fast rates,
//! * [`srm`]: margin/removal trade-off selection through bipartite vertex
//!   cover.
//!
//! All logarithms in [`bounds`] are natural logarithms.

pub mod bounds;
pub mod classifier;
pub mod geometry;
pub mod random;
pub mod space;
pub mod srm;


pub use bounds::{BoundError, BoundReport};
pub use classifier::{ClassifierError, LabeledSample, Label, NNModel};
pub use geometry::{DimensionReport, GeometryError, NetResult};
pub use space::{DistanceSpec, PointSet, SemimetricMatrix, SpaceError};
pub use srm::{CoverMode, SrmError, SrmSolution};
