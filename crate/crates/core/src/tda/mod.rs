//! Delay embeddings, Vietoris–Rips persistence and diagram summaries.

pub mod diagram;
pub mod embedding;
pub mod landscape;
pub mod rips;
pub mod wasserstein;

pub use diagram::{Feature, PersistenceDiagram};
pub use embedding::{hausdorff, takens_embed, PointCloud};
pub use landscape::{landscape, landscape_distance, landscape_norm, PersistenceLandscape};
pub use rips::{rips_persistence, FiltrationSpec};
pub use wasserstein::{bottleneck, persistence_to_empty, wasserstein};
