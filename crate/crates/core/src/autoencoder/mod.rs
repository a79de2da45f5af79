//! Dense autoencoder trained on reconstruction error plus the eccentric loss
//! of each minibatch's latent codes.

pub mod adam;
pub mod checkpoint;
pub mod data;
pub mod idx;
pub mod model;
pub mod net;
pub mod train;

pub use data::{load_dataset, DataSource, Dataset};
pub use model::{Autoencoder, Gradients, LossParts};
pub use net::{Activation, DenseNet, DenseNetSpec, ForwardTrace};
pub use train::{encode_dataset, initial_model, train, TrainConfig, TrainReport};
