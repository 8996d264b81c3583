//! cos(πx) and sin(πx) that are exact at multiples of one half.
//!
//! Flux biases of exactly half a flux quantum must cancel the first harmonic
//! to the bit, otherwise parity-symmetric Hamiltonians pick up spurious
//! 1e-17 couplings between parity sectors.

use std::f64::consts::PI;

fn reduce(x: f64) -> f64 {
    x.rem_euclid(2.0)
}

pub fn cos_pi(x: f64) -> f64 {
    let r = reduce(x);
    match r {
        0.0 => 1.0,
        0.5 | 1.5 => 0.0,
        1.0 => -1.0,
        r => (PI * r).cos(),
    }
}

pub fn sin_pi(x: f64) -> f64 {
    let r = reduce(x);
    match r {
        0.0 | 1.0 => 0.0,
        0.5 => 1.0,
        1.5 => -1.0,
        r => (PI * r).sin(),
    }
}
