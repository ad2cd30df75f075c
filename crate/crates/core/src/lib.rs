//! Pseudospectral laboratory for incompressible flow on the periodic box
//! `[-pi, pi]^3`.
//!
//! The crate provides:
//!
//! - truncated Fourier fields and exact spectral calculus
//!   ([`field`], [`fft`], [`operators`]),
//! - curl eigenfields on lattice shells and helical decompositions
//!   ([`beltrami`]),
//! - critical-space and space-time norms evaluated on discrete
//!   parabolic cylinders ([`cylinder`], [`lp`], [`norms`]),
//! - an integrating-factor RK4 solver for the full equations and a
//!   fixed-point iteration for the mild perturbation system
//!   ([`solver`], [`picard`]),
//! - scripted experiment scenarios with CSV reporting
//!   ([`experiments`], [`report`]),
//! - a binary snapshot format and a flat key-value config language
//!   ([`snapshot`], [`config`]).

pub mod beltrami;
pub mod config;
pub mod cylinder;
pub mod error;
pub mod experiments;
pub mod fft;
pub mod field;
pub mod heat_kernel;
pub mod lp;
pub mod norms;
pub mod operators;
pub mod picard;
pub mod report;
pub mod snapshot;
pub mod solver;
pub mod trajectory;

pub use error::{Error, Result};
pub use field::{SpectralField, Wavevector};
