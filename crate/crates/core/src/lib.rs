//! Land-use neighborhood mining and city grouping.
//!
//! The crate turns polygon land-use layers into neighborhood transactions,
//! mines frequent co-occurring land-use itemsets per city, merges them into a
//! cities x itemsets relative-support matrix, embeds the cities in 2D and
//! groups them with Ward hierarchical clustering. SVG renderers produce the
//! heatmap, dendrogram and scatter views.
//!
//! Stages, in pipeline order:
//!
//! * [`geo`]: GeoJSON ingest and validation
//! * [`neighborhood`]: buffer-distance neighbors and transactions
//! * [`fim`]: frequent itemset mining
//! * [`matrix`]: per-city itemsets merged into one matrix
//! * [`embedding`]: PCA / UMAP and pairwise distances
//! * [`clustering`]: Ward linkage, dendrogram cuts, validity indices
//! * [`report`]: SVG output
//! * [`pipeline`]: configuration, stage runners, manifest

pub mod clustering;
pub mod embedding;
pub mod error;
pub mod fim;
pub mod fixtures;
pub mod geo;
pub mod geometry;
pub mod matrix;
pub mod neighborhood;
pub mod pipeline;
pub mod report;

pub use error::{Error, ErrorKind, Result};
