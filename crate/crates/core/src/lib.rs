//! Feature-model driven generation of feedforward neural network
//! architectures.

pub mod arch;
pub mod cli;
pub mod diversity;
pub mod dnn;
pub mod emit;
pub mod flatten;
pub mod fm;
pub mod sat;
