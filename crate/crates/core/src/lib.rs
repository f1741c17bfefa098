//! Small-`μ` asymptotics of oscillatory integrals whose phase is the moment
//! map of a linear orthogonal action of a compact Lie group.

pub mod action;
pub mod amplitude;
pub mod critical;
pub mod fd;
pub mod fit;
pub mod fourier;
pub mod linalg;
pub mod oracle;
pub mod phase;
pub mod pipeline;
pub mod quadrature;
pub mod resolution;
pub mod tol;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/actions.md")]
    mod actions {}
    #[doc = include_str!("../../../book/src/phase.md")]
    mod phase {}
    #[doc = include_str!("../../../book/src/critical-set.md")]
    mod critical_set {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/resolution.md")]
    mod resolution {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
}
