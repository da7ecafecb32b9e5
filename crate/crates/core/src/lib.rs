#![forbid(unsafe_code)]

pub mod absorption;
pub mod concentration;
pub mod connectivity;
pub mod connector;
pub mod error;
pub mod extremal;
pub mod hypercore;
pub mod pipeline;
pub mod report;
pub mod robust;
pub mod tightpaths;
pub mod vertex_set;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use hypercore::{Hypergraph, Relabeled};
pub use tightpaths::{TightCycle, TightPath};
pub use vertex_set::{Vertex, VertexSet};
