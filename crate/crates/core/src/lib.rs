//! Adaptive gradient method for composite problems with inexact oracles
//! and inexact prox-mappings.

pub mod error;
pub mod harness;
pub mod oracle;
pub mod problems;
pub mod prox;
pub mod rng;
pub mod solver;
pub mod space;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/prox.md")]
    mod prox {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/problems.md")]
    mod problems {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
