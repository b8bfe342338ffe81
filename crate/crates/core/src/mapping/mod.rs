//! Mapping the community trajectory onto individual buildings.

mod allocate;
mod building;
mod gps_join;
mod occupancy;
mod placement;

pub use allocate::{allocate, allocation_weight, AllocationOptions, CapacitySplit};
pub use building::{
    Allocation, Building, BuildingType, Construction, EnergyStructure, Environment, Glazing, SchoolLevel,
};
pub use gps_join::{join_gps, write_trajectories_csv, PersonTrajectory, StepAssignment, DEFAULT_SNAP_RADIUS_M};
pub use occupancy::OccupancyField;
pub use placement::ActivityPlacementTable;
