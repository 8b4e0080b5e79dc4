//! Crate-internal prelude: `alloc` collections and float math for `no_std`.

pub use alloc::boxed::Box;
pub use alloc::format;
pub use alloc::string::{String, ToString};
pub use alloc::sync::Arc;
pub use alloc::vec;
pub use alloc::vec::Vec;

pub use num_traits::Float;
