// SPDX-License-Identifier: Apache-2.0
#![no_std]
// Whenever std is linked (tests, std consumers) its inherent float methods
// shadow the libm-backed `Float` trait and the trait imports go unused.
#![allow(unused_imports)]

extern crate alloc;

pub mod error;
pub mod numerics;

pub use error::{Error, ErrorKind, Result};
pub mod cavity;
pub mod laser;
pub mod optomech;
pub mod spectral;
