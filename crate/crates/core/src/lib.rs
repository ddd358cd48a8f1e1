//! Linear programs whose variables weight the answers of conjunctive queries.

pub mod relcore;
pub mod cq;
pub mod lpcore;
pub mod decomp;
pub mod lang;
pub mod interp;
pub mod weighting;
pub mod pipeline;
pub mod synth;
pub mod bench;

