//! Match-reference regular expressions: regexes whose variables must all
//! match one repeated substring, automata that decide them, and bijective
//! string lenses typed by them.

pub mod ambiguity;
pub mod cli;
pub mod dsl;
pub mod lens;
pub mod mre;
pub mod mrras;
pub mod oracle;
mod regular;
pub mod sre;

pub use lens::{Direction, Lens};
pub use mre::Mre;
