//! Exact p-adic dynamics on truncated residue rings.
//!
//! * [`padic`]: truncated p-adic integers, valuations, the shift `sigma^n`.
//! * [`transducer`]: letter-to-word automata and the maps they induce.
//! * [`dsl`]: a small language for self-maps of `Z_p` with certified lookahead.
//! * [`mahler`]: Mahler coefficients and the coefficient-based criteria.
//! * [`dynamics`]: brute-force oracles over `Z/p^k` and the plot set.

pub mod dsl;
pub mod dynamics;
pub mod mahler;
pub mod padic;
pub mod transducer;

pub use dsl::{parse_map, MapExpr};
pub use padic::{PadicApprox, Prime, Valuation};
pub use transducer::{parse_automaton, Automaton};
