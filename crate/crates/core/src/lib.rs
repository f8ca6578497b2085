//! Bi-unitary connections on bipartite graphs, their composition and
//! decomposition, flatness, and α-induction for SU(2)_k module categories.

pub mod ade;
pub mod alpha;
pub mod catops;
pub mod connection;
pub mod error;
pub mod flatness;
pub mod graphs;
pub mod linalg;
pub mod planar;
pub mod strings;
pub mod su2k;

pub use connection::{BiunitarityReport, CellValue, Connection, GaugeFamily, Shape};
pub use error::{Error, Result};
pub use graphs::{BipartiteGraph, PfData};
pub use planar::{Chirality, Engine};
