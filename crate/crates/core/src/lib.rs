//! Bifurcation invariants of parametrized families of linear elliptic
//! boundary value problems.
//!
//! The crate computes, from principal symbols alone:
//!
//! * the interior multiplicity `μ_i`, the Bott-Fedosov degree of the
//!   comparison map `σ = p(λ) p(∞)⁻¹` over `S^q × S^{2n-1}`;
//! * the boundary multiplicity `μ_b`, the degree of `τ = b(λ) b(∞)⁻¹`, where
//!   `b` is the boundary symbol restricted to the decaying solutions of the
//!   conormal half-line ODE, over `S^q × S(Γ)`;
//! * the order `n(q)` attached to `J(S^q)` and the divisibility verdict.
//!
//! Everything here is pure computation and builds without `std`. Threading,
//! configuration files, and reports live in the companion `bifindex` crate;
//! parallel quadrature is plugged in through [`exec::Executor`].
#![no_std]
#![allow(clippy::needless_range_loop)]
// `!(x < limit)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod catalog;
pub mod construct;
pub mod degree;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod halfline;
pub mod jtheory;
pub mod linalg;
pub mod manifold;
pub mod multiplicity;
mod prelude;
pub mod qmc;
pub mod symbol;

pub use error::{Error, Result};
pub use linalg::{CMat, C64};
