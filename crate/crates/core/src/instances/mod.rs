//! Problem instances: random ellipsoid intersections, the epigraph families
//! and fixtures with known intersections.

mod ellipsoids;
mod families;
mod fixtures;

pub use ellipsoids::{
    default_density, gen_ellipsoids, shape_matrix, EllipsoidInstance, Triplet, DEFAULT_GAMMA, FILE_EXTENSION,
};
pub use families::{
    family_solution_set, make_family, Family, QuadraticNorm, QuarticNorm, RadialFunction, RadialProfile, ShiftedPower,
    WeightedQuadratic, HYPOTHESIS_TOL,
};
pub use fixtures::{halfspace_line, tangent_disk, two_lines, Fixture};
