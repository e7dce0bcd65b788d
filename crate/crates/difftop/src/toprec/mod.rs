//! Topological recursion on the curve `x = z + 1/z`, `y = ln z`.

pub mod basis;
pub mod engine;
pub mod special;

pub use basis::{PoleBasisForm, PoleTermJson, PoleVarJson, Primitive, Slot};
pub use engine::{residue_at_branchpoint, TopRec, TrError};
pub use special::{omega_special, NotSpecial, Special};
