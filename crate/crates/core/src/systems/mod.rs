//! Concrete area-preserving systems packaged as [`LiftedMap`](crate::cover::LiftedMap)s.

mod billiard;
mod rigid;
mod standard;
mod table;
mod table_file;

pub use billiard::{billiard_map, billiard_measure_check, BilliardMap, BilliardState};
pub use rigid::RigidRotation;
pub use standard::{standard_map, StandardMap, StandardMapParams};
pub use table::{table_from_cosine_series, ConvexTable, CosineTerm};
pub use table_file::{parse_table, render_table, TableSpec};

/// The two tables every billiard check runs against: the unit circle and
/// the oval `r(ψ) = 1 + 0.05 cos ψ`.
pub fn shipped_tables() -> Vec<(&'static str, ConvexTable)> {
    vec![
        ("circle", table_from_cosine_series(1.0, &[]).expect("unit circle is convex")),
        ("oval", table_from_cosine_series(1.0, &[CosineTerm { amplitude: 0.05, phase: 0.0 }]).expect("oval is convex")),
    ]
}
