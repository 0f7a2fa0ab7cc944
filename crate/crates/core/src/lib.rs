//! Probability measures on the circle and the plane convex sets they
//! generate.
//!
//! A measure μ on `[0, 2π)` with vanishing first Fourier coefficient traces
//! a closed convex curve `Z(t) = ∫_0^t e^{iF^{-1}(u)} du` whose perimeter is
//! the mass of μ. Operations on measures (mixture, circular convolution,
//! reflection) map to operations on convex sets (Minkowski sum, curvature
//! convolution, symmetrisation).

pub mod boundary;
pub mod chirotope;
pub mod empirical;
pub mod error;
pub mod hausdorff;
pub mod io;
pub mod measure;
pub mod ops;
mod pieces;
pub mod randgen;
pub mod rng;

pub use boundary::{
    area_fourier, area_pairs, area_shoelace, boundary_from_measure, curvature_radius, extremal_points,
    measure_from_boundary, AreaEstimate, ConvexBoundary, Curvature,
};
pub use error::{Error, Result};
pub use hausdorff::{hausdorff, hausdorff_curves};
pub use measure::{circ_convolve, mixture, Angle, CircleMeasure, FourierCoeffs};
pub use chirotope::{chirotope_signs, is_convex_position, is_convex_position_hull, laplace_n3, mc_laplace, signed_area, PointSet};
pub use empirical::{
    convergence_experiment, empirical_curve, fdd_covariance, fluctuation_process, k_operator, max_theta_deviation,
    reorder_complex, reorder_polygon, sample_angles, ComplexSample,
};
pub use ops::{classify_stable_limit, minkowski_sum, StableKind, StableLimit};
pub use randgen::{
    density_from_szego, gen_closed_first, gen_fixed_area, gen_mass_first, gen_sparse, measure_from_density,
    FixedAreaOutcome, SzegoPolynomial, TrigDensity,
};
