//! Hilbert and Kobayashi geometry of bounded convex domains, and the
//! asymptotic dynamics of nonexpansive maps and semigroups acting on them.

pub mod exec;
pub mod geometry;
pub mod metrics;
pub mod horoballs;
pub mod dynamics;
pub mod verify;
pub mod cli_io;
