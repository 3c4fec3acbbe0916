//! File formats, parallel search and tooling around [`modforge_core`].
//!
//! - [`json`]: module sets, assemblies and tasks as JSON.
//! - [`xml`]: URDF text output and an independent URDF reader.
//! - [`search`]: module roles, the multi-threaded search front end.
//! - [`bench`]: model-generation latency.
//! - [`trajectory`]: CSV export of joint trajectories.
//! - [`samples`]: the data files shipped in `data/`.

pub mod bench;
pub mod json;
pub mod samples;
pub mod search;
pub mod trajectory;
pub mod xml;

pub use modforge_core as core;
