//! File formats: scene documents, PLY, OBJ, PNG, PFM.

pub mod obj;
pub mod pfm;
pub mod ply;
pub mod png;
pub mod scene_doc;
