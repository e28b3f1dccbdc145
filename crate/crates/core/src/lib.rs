#![cfg_attr(not(any(feature = "std", test)), no_std)]

//! Orthogonal polynomials on the unit circle driven by randomized Verblunsky
//! parameters `α_n = a_n·ω_n`.
//!
//! The crate is `no_std` compatible (it needs `alloc`) and contains only the
//! numerical machinery:
//!
//! * [`verblunsky`]: deterministic envelopes `a_n`, tail energies `R_k`,
//!   the summability series and seeded multiplier streams.
//! * [`szego`]: the Szegő recursion in pointwise and coefficient form, norm
//!   constants and a Bernstein–Szegő orthogonality oracle.
//! * [`prufer`]: unwrapped Prüfer phases and the accumulated `log Φ*_n`.
//! * [`supnorm`]: roots-of-unity evaluation and certified sup-norm bounds.
//! * [`stats`]: Monte Carlo checks of the martingale and block-sum structure.
//! * [`sharpness`]: alignment sets and blow-up witnesses for sparse envelopes.
//!
//! IO, configuration files, parallel drivers and the CLI live in the `opuc`
//! crate.
//!
//! ```
//! use opuc_core::szego::PointState;
//! use opuc_core::Complex64;
//!
//! let z = Complex64::new(-1.0, 0.0);
//! let s = PointState::new(z).unwrap().step(Complex64::new(0.5, 0.0)).unwrap();
//! assert_eq!(s.phi_star, Complex64::new(1.5, 0.0));
//! assert_eq!(s.phi.norm(), s.phi_star.norm());
//! ```

extern crate alloc;

mod ddouble;
pub mod error;
pub mod fft;
mod float;
pub mod prufer;
pub mod rng;
pub mod sharpness;
pub mod stats;
pub mod supnorm;
pub mod szego;
pub mod verblunsky;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// `2π`.
pub const TAU: f64 = core::f64::consts::TAU;
