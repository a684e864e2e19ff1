mod codec;
mod file;
mod flat;
mod model;
mod structure;

pub use codec::Radix;
pub use file::{read_model, write_model, ModelFile};
pub use flat::FlatMdp;
pub use model::{
    sample_categorical, FactoredMdp, RewardDist, RewardFactor, RewardKind, Step, TransitionFactor,
    FLATTEN_LIMIT,
};
pub use structure::{FactoredStructure, Projection, Scope, StructureSpec};
