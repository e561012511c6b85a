//! Writers from the transition-system pivot to exchange formats.

mod dot;
mod lotos;
mod uppaal;

pub use dot::{emit_dot, emit_process_dot};
pub use lotos::emit_lotos;
pub use uppaal::{emit_uppaal, UppaalError};
