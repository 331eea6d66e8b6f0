//! Exact-arithmetic construction of p-adic Eisenstein series on `U(n,n)`
//! over an imaginary quadratic field `K = Q(sqrt(-D))`, with `p` split in `K`.
//!
//! The crate computes q-expansions along two routes (the holomorphic series
//! `G` and the p-adic series `E_F`), checks the local coefficient formula at
//! `p` against a brute-force finite sum, and checks the interpolation and
//! congruence properties of the resulting measure coefficient by coefficient.
//! All arithmetic is exact: values live in `Q[x, y] / (Phi_m(x), y^2 + D)`.

pub mod characters;
pub mod cli;
pub mod error;
pub mod field_ctx;
pub mod local_factors;
pub mod measure;
pub mod qexp;
pub mod schwartz_p;

pub use error::{Error, Result};
