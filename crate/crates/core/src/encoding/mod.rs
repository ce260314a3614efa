//! Input featurizations: the trainable multiresolution hash grid for
//! positions and a fixed sinusoidal encoding for view directions.

mod freq;
mod hash;

pub use freq::{freq_encode, FreqEncodingConfig};
pub use hash::{hash_index, HashGrid, HashGridConfig, HashTrace};
