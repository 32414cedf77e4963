//! Repair, georeferencing, merging and voxel gap closing on triangle meshes.

mod merge;
mod repair;
mod voxel;

pub use merge::{export_wgs84, georeference, merge, watertight_check, MergeReport, WatertightReport};
pub use repair::{
    clip_below_plane, largest_component, median_edge_length, remove_long_edge_faces, repair,
    trim_to_footprint, RepairOptions, RepairReport,
};
pub use voxel::{close_gaps, column_tops, fill_basin, solidify_columns, triangle_box_overlap, voxelize, wrap_surface, VoxelGrid};
