//! Parameter sweeps over the circuit solver and their tabular output.

mod engine;
mod grid;
mod peak;
mod result;
mod topology;

pub use engine::{
    compare_mm_over_distances, compare_with_without_mm, distance_sweep, evaluate_grid, frequency_sweep,
    slab_position_sweep, MmComparison, MmDistanceComparison, MmDistanceRow, SweepOptions,
};
pub use grid::{FrequencyGrid, Spacing};
pub use peak::{peak_find, Peak};
pub use result::{model_hash, to_json_full_precision, SweepMetadata, SweepResult, SweepRow, CSV_HEADER};
pub use topology::{
    minus_3db_bandwidth, resolve_topology, topology_compare, TopologyBase, TopologyComparison, TopologyKind,
    TopologyOutcome, TopologySpec,
};
