//! Learned shortcut for the power-split optimiser.
//!
//! Offline, channel profiles are labelled with their full-search optimum and a
//! small tanh network is fitted to them; online, a prediction costs one
//! forward pass.

mod dataset;
mod model;
mod network;
mod train;

pub use dataset::{features, generate_dataset, split_dataset, ChannelGrid, Dataset, DatasetRecord, InputMode, DATASET_HEADER};
pub use model::{
    scale_labels, unscale_outputs, ModelMetadata, ModelSet, Normalizer, SurrogateModel, ALPHA_CLAMP, ALPHA_RANGE,
    BETA_CLAMP, BETA_RANGE, MODEL_FORMAT_VERSION,
};
pub use network::{Mlp, OpCount, N_OUT};
pub use train::{train, train_models, StopReason, TrainConfig};

/// Forward-pass cost of a trained model.
pub fn feedforward_op_count(model: &SurrogateModel) -> OpCount {
    model.op_count()
}
