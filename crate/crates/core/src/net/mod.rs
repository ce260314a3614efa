//! Minimal reverse-mode computation graph: enough node kinds (linear,
//! relu, conv1d, concat, input) to express every shallow architecture the
//! toolkit trains, with explicit parameter tensors and Adam.

mod adam;
mod graph;
mod mat;
mod network;
mod param;

pub use adam::AdamState;
pub use graph::{Conv1dLayout, LayerGraphSpec, NodeOp, NodeSpec, SpecBuilder};
pub use mat::Mat;
pub use network::{Network, Trace};
pub use param::{GradBuffer, ParamTensor};
