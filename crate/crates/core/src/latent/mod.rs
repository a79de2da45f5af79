//! Analysis of latent embeddings.

pub mod align;
pub mod decode;
pub mod eigen;
pub mod knn;
pub mod metrics;
pub mod sampling;
pub mod spectrum;

pub use align::{align, AlignmentResult};
pub use decode::{decode_eigen_components, ComponentPair, Decoder, IdentityDecoder};
pub use knn::{knn_classify, KnnResult};
pub use metrics::{cross_correlation, similarity_metrics, CorrelationMatrix, SimilarityMetrics};
pub use sampling::{sample_latents, SampleMode, Sampled};
pub use spectrum::{covariance, spectrum, to_principal_embedding, Embedding, SpectrumReport};
