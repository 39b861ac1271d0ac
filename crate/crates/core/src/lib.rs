pub mod error;
pub mod field;
pub mod lanes;
pub mod limbs;
pub mod mont_generic;
pub mod mont_special;
pub mod presets;
pub mod simd_add;

pub use error::{Error, Result};
pub use limbs::{BigInt, RadixConfig};
