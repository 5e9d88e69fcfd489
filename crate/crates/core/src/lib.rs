pub mod bergman;
pub mod cli;
pub mod error;
pub mod exec;
pub mod identities;
pub mod linalg;
pub mod multiindex;
pub mod optuple;
pub mod wold;

pub use error::{Error, Result};
pub use exec::Exec;
pub use optuple::{OperatorTuple, Tolerances};
