pub mod depth_io;
pub mod error;
pub mod eval;
pub mod fsutil;
pub mod geometry;
pub mod noise_filter;
pub mod region_graph;
pub mod roi_detect;
pub mod tracker;
pub mod pipeline;
