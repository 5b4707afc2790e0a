//! Impulsive two-component reaction–diffusion model of faecal–oral
//! transmission on a periodically evolving domain, transformed to the fixed
//! interval `[0, L]`:
//!
//! ```text
//! u_t = d1/ρ²·u_xx − n·ρ̇/ρ·u − a11·u + a12·v
//! v_t = d2/ρ²·v_xx − n·ρ̇/ρ·v − a22·v + f(u)
//! u = v = 0 at x = 0, L;   u((kτ)⁺) = g(u(kτ)),  k = 0, 1, 2, …
//! ```
//!
//! Modules: [`model`] (parameters and assumption checks), [`pde`] (time
//! stepping), [`eigen`] (principal eigenvalue), [`steady`] (periodic
//! solution by monotone iteration), [`config`] and [`experiments`] (the
//! command-line front end) and [`io`] (CSV output).

// `!(x > 0.0)` rejects NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod eigen;
pub mod error;
pub mod experiments;
pub mod io;
pub mod model;
pub mod pde;
pub mod steady;
pub mod tridiag;

pub use error::{Error, Result};
