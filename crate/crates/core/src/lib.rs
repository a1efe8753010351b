//! Monte Carlo and analytic tools for the SINR distribution of cellular
//! networks with base stations drawn from motion-invariant point processes.
//!
//! The outage probability obeys `1 - P_c(theta) ~ kappa theta^m` as
//! `theta -> 0`, where `m` is the polynomial order of the fading CDF at zero.
//! Comparing `kappa` with its Poisson value gives the asymptotic deployment
//! gain `(kappa_ppp / kappa)^(1/m)`: the horizontal shift, in `theta`, between
//! a process's success curve and the Poisson one in the high-reliability
//! regime.

pub mod analytic_ppp;
pub mod error;
pub mod gain;
pub mod geometry;
pub mod io;
pub mod point_process;
pub mod propagation;
pub mod quadrature;
pub mod sinr_mc;
pub mod stats;
pub mod stream;

pub use error::{Error, Result};
pub use geometry::{Point, Topology, Window};
pub use point_process::{PointPattern, ProcessModel};
pub use propagation::{FadingModel, PathLossKind, PathLossModel, SmallTCoefficient};
pub use sinr_mc::{Scenario, SinrBatch, SinrSample, SuccessCurve};
