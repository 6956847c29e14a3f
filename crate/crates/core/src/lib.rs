//! The g-and-k and generalised g-and-h quantile distributions.
//!
//! Both families are defined by pushing a standard normal variable `z`
//! through a transform `Q(z)`:
//!
//! ```text
//! Q_gk(z) = A + B (1 + c tanh(g z / 2)) z (1 + z^2)^k
//! Q_gh(z) = A + B (1 + c tanh(g z / 2)) z exp(h z^2 / 2)
//! ```
//!
//! The crate provides the distribution functions ([`dist`]), numerical and
//! theoretical parameter-validity checks ([`validity`]), fast simulation of
//! order statistics ([`orderstats`]) and three inference engines for IID
//! data: adaptive Metropolis MCMC ([`mcmc`]), rejection ABC ([`abc`]) and
//! bounded finite-difference stochastic approximation ([`fdsa`]).
//!
//! The crate is `no_std` and only needs `alloc`.
//!
//! ```
//! use gk_core::{dist, Family, QdParams};
//!
//! let p = QdParams::new(Family::GK, 1.0, 2.0, 0.5, 0.1).unwrap();
//! let x = dist::quantile(0.9, &p).unwrap();
//! let u = dist::cdf(x, &p).unwrap();
//! assert!((u - 0.9).abs() < 1e-10);
//! ```

#![no_std]
// NaN-rejecting checks are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod abc;
pub mod dist;
mod error;
pub mod fdsa;
pub mod linalg;
pub mod mcmc;
pub mod normal;
pub mod orderstats;
mod params;
pub mod rng;
pub mod roots;
pub mod summary;
pub mod validity;

pub use error::{Error, Result};
pub use params::{Family, QdParams, Theta, DEFAULT_C};
