//! File formats, packs, the scenario runner, the wire format and the HTTP
//! service around `argora-core`.

pub mod cli;
pub mod packs;
pub mod wire;
pub mod scenario;
pub mod service;
pub mod session;
