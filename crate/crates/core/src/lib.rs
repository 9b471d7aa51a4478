//! Exact arithmetic for rank-2 Drinfeld modules with complex multiplication
//! over A = F_q[T].

pub mod error;
pub mod ffield;
pub mod poly;
pub mod laurent;
pub mod quad;
pub mod cm;
pub mod brown;
pub mod modforms;
pub mod classno;
pub mod interval;
pub mod bounds;
pub mod sweep;

pub use error::{Error, Result};
