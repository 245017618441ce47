//! Closed-form D1D3 amplitudes shared by the core and command-line tests.
//!
//! Each term is keyed by the three photons that are not on the D1/D3
//! channels (3 and 7), as the printed forms list them.

use std::collections::BTreeMap;

use ghzsim_core::history::label_channels;
use ghzsim_core::{Amplitude, SparseState};

pub type Triple = [(u8, u8); 3];

pub fn c(re: f64, im: f64) -> Amplitude {
    Amplitude::new(re, im)
}

/// Keys each labelled term by the three photons that are not on the D1/D3
/// channels, which is how the closed forms list them.
pub fn by_listed_photons(state: &SparseState) -> BTreeMap<Triple, Amplitude> {
    let mut out = BTreeMap::new();
    for (label, a) in state.terms() {
        let rest: Vec<(u8, u8)> = label_channels(label)
            .into_iter()
            .filter(|(_, ch)| ch.index() != 3 && ch.index() != 7)
            .map(|(p, ch)| (p, ch.index()))
            .collect();
        let key: Triple = rest.try_into().expect("two photons sit on the detector channels");
        assert!(out.insert(key, *a).is_none(), "listed photons identify the term");
    }
    out
}

/// Detector-post-selected D1D3 state at perfect interference.
pub fn detector_state_at_zero() -> Vec<(Triple, Amplitude)> {
    let q = 1.0 / 64.0;
    let h = 1.0 / (32.0 * 2f64.sqrt());
    vec![
        ([(1, 1), (2, 1), (4, 5)], c(0.0, q)),
        ([(1, 1), (3, 5), (4, 5)], c(0.0, q)),
        ([(2, 6), (3, 5), (4, 5)], c(q, 0.0)),
        ([(1, 2), (3, 6), (4, 5)], c(0.0, h)),
        ([(2, 6), (3, 6), (4, 5)], c(0.0, q)),
        ([(1, 2), (2, 1), (4, 5)], c(-h, 0.0)),
        ([(1, 1), (3, 5), (5, 9)], c(0.0, h)),
        ([(2, 6), (3, 5), (5, 9)], c(h, 0.0)),
        ([(1, 1), (4, 10), (5, 9)], c(h, 0.0)),
        ([(1, 1), (2, 1), (5, 10)], c(q, 0.0)),
        ([(1, 2), (2, 1), (5, 10)], c(0.0, h)),
        ([(1, 2), (3, 6), (5, 10)], c(h, 0.0)),
        ([(2, 6), (3, 6), (5, 10)], c(q, 0.0)),
        ([(1, 1), (4, 10), (5, 10)], c(0.0, q)),
        ([(2, 6), (4, 10), (5, 10)], c(q, 0.0)),
        ([(2, 6), (4, 10), (5, 9)], c(0.0, -h)),
    ]
}

/// Single-occupancy D1D3 state, unnormalised, at HOM-failure parameter `delta`.
pub fn single_occupancy_closed_form(delta: f64) -> Vec<(Triple, Amplitude)> {
    let s = delta.sqrt();
    let u = 1.0 - 2.0 * s;
    let r2 = 2f64.sqrt();
    vec![
        ([(1, 1), (3, 5), (5, 9)], c(0.0, u * u / (32.0 * r2))),
        ([(1, 2), (3, 6), (5, 10)], c(u * u / (32.0 * r2), 0.0)),
        ([(1, 1), (3, 5), (4, 10)], c(s * u / 32.0, 0.0)),
        ([(1, 2), (3, 6), (4, 10)], c(s * u / (16.0 * r2), 0.0)),
        ([(1, 2), (2, 6), (5, 10)], c(s * u / (16.0 * r2), 0.0)),
        ([(2, 1), (4, 5), (5, 9)], c(0.0, delta / (8.0 * r2))),
        ([(2, 1), (3, 5), (4, 10)], c(delta / 16.0, 0.0)),
        ([(1, 2), (2, 6), (4, 10)], c(delta * r2 / 16.0, 0.0)),
        ([(1, 1), (2, 6), (4, 10)], c(0.0, -delta / 16.0)),
        ([(2, 1), (3, 6), (4, 10)], c(0.0, delta / 16.0)),
        ([(1, 1), (4, 5), (5, 10)], c(-u * s / 32.0, 0.0)),
        ([(2, 1), (4, 5), (5, 10)], c(-delta / 16.0, 0.0)),
        ([(1, 1), (2, 6), (5, 10)], c(0.0, -u * s / 32.0)),
        ([(2, 1), (3, 6), (5, 10)], c(0.0, u * s / 32.0)),
        ([(2, 1), (3, 5), (5, 9)], c(0.0, u * s / (16.0 * r2))),
        ([(1, 1), (4, 5), (5, 9)], c(0.0, u * s / (16.0 * r2))),
    ]
}


/// Largest amplitude error, infinite when the term sets differ.
pub fn deviation(got: &BTreeMap<Triple, Amplitude>, want: &[(Triple, Amplitude)]) -> f64 {
    if got.len() != want.len() {
        return f64::INFINITY;
    }
    want.iter()
        .map(|(key, amp)| got.get(key).map_or(f64::INFINITY, |g| (g - amp).norm()))
        .fold(0.0, f64::max)
}
