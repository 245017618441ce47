//! Path-history expansion with partially distinguishable photons.
//!
//! Every photon is followed independently through the layout. A joint history
//! picks one path per photon; its coefficient is kept as a monomial in the
//! element symbols `R_k`, `T_k` and a power of `i`. A squared symbol of a
//! central beam splitter means two photons met there and took the same
//! action; it is replaced by the pair amplitude `sqrt(delta)`, so `delta = 0`
//! is perfect two-photon interference and `delta = 1/4` reproduces the
//! fully distinguishable product `r^2 = t^2 = 1/2`. All other symbols take
//! the element's own `r` or `t`.
//!
//! Outcomes are photon-labelled: histories ending with the same photon to
//! channel assignment are summed. [`identify`] additionally merges labelled
//! outcomes with equal channel occupancy.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ideal::{condition_on_pair, IdealProtocol};
use crate::interferometer::{pair_name, Action, Channel, CircuitLayout, DetectorId, NUM_CHANNELS, NUM_PHOTONS};
use crate::state::{Amplitude, BasisLabel, SparseState};

pub const DELTA_MAX: f64 = 0.5;

/// Value of `delta` at which the substituted pair amplitude equals `1/2`.
pub const DISTINGUISHABLE_DELTA: f64 = 0.25;

pub const DEFAULT_GRID_POINTS: usize = 101;

pub const ALL_PHOTONS: [u8; 5] = [1, 2, 3, 4, 5];

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Event {
    /// Index into `CircuitLayout::elements`.
    pub element: usize,
    pub action: Action,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PhotonHistory {
    pub photon: u8,
    pub events: Vec<Event>,
    /// Lane after each event.
    pub lanes: Vec<Channel>,
    /// Channel label after the output crossings.
    pub terminal: Channel,
    pub coefficient: CoefficientMonomial,
}

impl PhotonHistory {
    /// Action letters in event order, e.g. `"rrt"`.
    pub fn actions(&self) -> String {
        self.events.iter().map(|e| e.action.letter()).collect()
    }
}

/// Symbol of a beam-splitter traversal: `R_k` for reflection, `T_k` for
/// transmission.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Symbol {
    pub element: usize,
    pub action: Action,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct CoefficientMonomial {
    /// Power of `i`, reduced mod 4.
    pub i_power: u8,
    pub exponents: BTreeMap<Symbol, u8>,
}

impl CoefficientMonomial {
    pub fn one() -> Self {
        CoefficientMonomial::default()
    }

    fn push(&mut self, event: Event) {
        match event.action {
            Action::Mirror => self.i_power = (self.i_power + 1) % 4,
            Action::Reflect => {
                self.i_power = (self.i_power + 1) % 4;
                *self.exponents.entry(Symbol { element: event.element, action: Action::Reflect }).or_default() += 1;
            }
            Action::Transmit => {
                *self.exponents.entry(Symbol { element: event.element, action: Action::Transmit }).or_default() += 1;
            }
        }
    }

    pub fn mul(&self, other: &CoefficientMonomial) -> CoefficientMonomial {
        let mut out = self.clone();
        out.i_power = (self.i_power + other.i_power) % 4;
        for (s, e) in &other.exponents {
            *out.exponents.entry(*s).or_default() += e;
        }
        out
    }

    pub fn degree(&self) -> u32 {
        self.exponents.values().map(|&e| e as u32).sum()
    }

    fn phase(&self) -> Amplitude {
        match self.i_power % 4 {
            0 => Amplitude::new(1.0, 0.0),
            1 => Amplitude::new(0.0, 1.0),
            2 => Amplitude::new(-1.0, 0.0),
            _ => Amplitude::new(0.0, -1.0),
        }
    }

    /// Value with every symbol set to its element's `r` or `t`.
    pub fn evaluate_plain(&self, layout: &CircuitLayout) -> Amplitude {
        let mut v = 1.0;
        for (s, &e) in &self.exponents {
            v *= symbol_value(layout, *s).powi(e as i32);
        }
        self.phase() * v
    }

    /// Value with squared central symbols replaced by `sqrt(delta)`.
    pub fn evaluate(&self, layout: &CircuitLayout, delta: f64) -> Result<Amplitude> {
        check_delta(delta)?;
        let pair = delta.sqrt();
        let mut v = 1.0;
        for (s, &e) in &self.exponents {
            if layout.is_central(&layout.elements[s.element]) {
                v *= pair.powi((e / 2) as i32) * symbol_value(layout, *s).powi((e % 2) as i32);
            } else {
                v *= symbol_value(layout, *s).powi(e as i32);
            }
        }
        Ok(self.phase() * v)
    }

    pub fn display<'a>(&'a self, layout: &'a CircuitLayout) -> impl fmt::Display + 'a {
        MonomialDisplay { m: self, layout }
    }
}

struct MonomialDisplay<'a> {
    m: &'a CoefficientMonomial,
    layout: &'a CircuitLayout,
}

impl fmt::Display for MonomialDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "i^{}", self.m.i_power)?;
        for (s, e) in &self.m.exponents {
            let id = &self.layout.elements[s.element].id;
            let n = id.trim_start_matches(|c: char| c.is_ascii_alphabetic());
            let sym = if s.action == Action::Reflect { 'R' } else { 'T' };
            write!(f, " {sym}{n}")?;
            if *e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

fn symbol_value(layout: &CircuitLayout, s: Symbol) -> f64 {
    let e = &layout.elements[s.element];
    match s.action {
        Action::Reflect => e.r,
        _ => e.t,
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(0.0..=DELTA_MAX).contains(&delta) {
        return Err(Error::DeltaOutOfRange(delta));
    }
    Ok(())
}

/// Standalone form of [`CoefficientMonomial::evaluate`].
pub fn evaluate_coefficient(layout: &CircuitLayout, m: &CoefficientMonomial, delta: f64) -> Result<Amplitude> {
    m.evaluate(layout, delta)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointHistory {
    /// Index of each photon's path in [`HistoryEngine::photon_histories`].
    pub paths: [usize; 5],
    pub coefficient: CoefficientMonomial,
    /// Final channel of photons 1..5.
    pub outcome: [Channel; 5],
}

/// All single-photon paths of one photon, reflection branch first.
pub fn photon_histories(layout: &CircuitLayout, photon: u8) -> Vec<PhotonHistory> {
    let mut out = Vec::new();
    let start = PhotonHistory {
        photon,
        events: Vec::new(),
        lanes: Vec::new(),
        terminal: layout.source_channel(photon),
        coefficient: CoefficientMonomial::one(),
    };
    extend(layout, 1, layout.source_channel(photon), start, &mut out);
    out
}

fn extend(layout: &CircuitLayout, layer: u8, lane: Channel, h: PhotonHistory, out: &mut Vec<PhotonHistory>) {
    if layer > layout.num_layers() {
        out.push(PhotonHistory { terminal: layout.output_label(lane), ..h });
        return;
    }
    let Some(element) = layout.elements.iter().position(|e| e.layer == layer && e.touches(lane)) else {
        extend(layout, layer + 1, lane, h, out);
        return;
    };
    let branches = layout.elements[element].scatter(lane).expect("element touches lane");
    for (next, action, _) in branches {
        let mut b = h.clone();
        let ev = Event { element, action };
        b.events.push(ev);
        b.lanes.push(next);
        b.coefficient.push(ev);
        extend(layout, layer + 1, next, b, out);
    }
}

/// Joint histories of the five photons with their outcome groups.
#[derive(Clone, Debug)]
pub struct HistoryEngine {
    layout: CircuitLayout,
    per_photon: Vec<Vec<PhotonHistory>>,
    joint: Vec<JointHistory>,
    /// Labelled outcomes and the joint histories reaching each, in label order.
    groups: Vec<(BasisLabel, Vec<usize>)>,
}

impl HistoryEngine {
    pub fn new(layout: CircuitLayout) -> Self {
        let per_photon: Vec<Vec<PhotonHistory>> = (1..=NUM_PHOTONS).map(|p| photon_histories(&layout, p)).collect();
        let joint = enumerate_joint(&per_photon);
        let mut by_label: BTreeMap<BasisLabel, Vec<usize>> = BTreeMap::new();
        for (k, j) in joint.iter().enumerate() {
            by_label.entry(outcome_label(&j.outcome)).or_default().push(k);
        }
        HistoryEngine { layout, per_photon, joint, groups: by_label.into_iter().collect() }
    }

    pub fn layout(&self) -> &CircuitLayout {
        &self.layout
    }

    pub fn photon_histories(&self, photon: u8) -> &[PhotonHistory] {
        &self.per_photon[photon as usize - 1]
    }

    pub fn joint_histories(&self) -> &[JointHistory] {
        &self.joint
    }

    pub fn num_outcomes(&self) -> usize {
        self.groups.len()
    }

    /// Photon-labelled output state at `delta`.
    pub fn general_outcome(&self, delta: f64) -> Result<SparseState> {
        check_delta(delta)?;
        let mut terms = Vec::with_capacity(self.groups.len());
        for (label, members) in &self.groups {
            let mut amp = Amplitude::default();
            for &k in members {
                amp += self.joint[k].coefficient.evaluate(&self.layout, delta)?;
            }
            terms.push((label.clone(), amp));
        }
        SparseState::from_terms(&ALL_PHOTONS, terms)
    }

    /// Desired heralded state for `pair`: the ideal conditional state of
    /// photons 1, 3, 5 with the mediators in the pair's detector channels.
    pub fn target_state(&self, pair: (DetectorId, DetectorId)) -> Result<SparseState> {
        let ideal = IdealProtocol::new(self.layout.clone());
        let (psi, _, _) = ideal.prepared_state()?;
        let outcome = condition_on_pair(&psi, pair)?;
        let mediators = BasisLabel::from_channels(&[
            (pair.0.photon(), self.layout.detector_channel(pair.0)),
            (pair.1.photon(), self.layout.detector_channel(pair.1)),
        ])?;
        outcome.state.tensor(&SparseState::basis(mediators))
    }

    /// Overlap rows for every `delta` in `grid` and every detector pair,
    /// ordered by `delta` then pair.
    pub fn overlap_curves(&self, grid: &[f64]) -> Result<Vec<OverlapRow>> {
        for &d in grid {
            check_delta(d)?;
        }
        let targets: Vec<SparseState> =
            DetectorId::PAIRS.iter().map(|&p| self.target_state(p)).collect::<Result<_>>()?;
        let rows: Vec<Vec<OverlapRow>> = grid
            .par_iter()
            .map(|&delta| self.rows_at(delta, &targets))
            .collect::<Result<_>>()?;
        Ok(rows.into_iter().flatten().collect())
    }

    fn rows_at(&self, delta: f64, targets: &[SparseState]) -> Result<Vec<OverlapRow>> {
        let gen = self.general_outcome(delta)?;
        let gen_norm = gen.norm_sqr();
        let mut rows = Vec::with_capacity(4);
        for (pair, target) in DetectorId::PAIRS.iter().zip(targets) {
            let ps = postselect_detectors(&self.layout, &gen, *pair);
            let single = postselect_single_occupancy(&self.layout, &ps);
            let p_gen = target.inner_product(&gen)?.norm_sqr();
            let f_ps = fidelity(target, &ps)?;
            let f_single = fidelity(target, &single)?;
            rows.push(OverlapRow {
                delta,
                pair: pair_name(*pair),
                p_gen,
                p_gen_normalized: p_gen / gen_norm,
                f_postselected: f_ps,
                f_single_occupancy: f_single,
                flagged: f_ps.is_none() || f_single.is_none(),
            });
        }
        Ok(rows)
    }
}

fn enumerate_joint(per_photon: &[Vec<PhotonHistory>]) -> Vec<JointHistory> {
    let total: usize = per_photon.iter().map(Vec::len).product();
    let mut out = Vec::with_capacity(total);
    let mut idx = [0usize; 5];
    loop {
        let mut coefficient = CoefficientMonomial::one();
        for p in 0..5 {
            coefficient = coefficient.mul(&per_photon[p][idx[p]].coefficient);
        }
        let outcome = std::array::from_fn(|p| per_photon[p][idx[p]].terminal);
        out.push(JointHistory { paths: idx, coefficient, outcome });
        // odometer with photon 5 fastest
        let mut p = 5;
        loop {
            if p == 0 {
                return out;
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < per_photon[p].len() {
                break;
            }
            idx[p] = 0;
        }
    }
}

/// Full enumeration for a layout.
pub fn enumerate_joint_histories(layout: &CircuitLayout) -> Vec<JointHistory> {
    let per_photon: Vec<Vec<PhotonHistory>> = (1..=NUM_PHOTONS).map(|p| photon_histories(layout, p)).collect();
    enumerate_joint(&per_photon)
}

fn outcome_label(outcome: &[Channel; 5]) -> BasisLabel {
    let assignment: Vec<(u8, Channel)> = outcome.iter().enumerate().map(|(i, c)| (i as u8 + 1, *c)).collect();
    BasisLabel::from_channels(&assignment).expect("five photons on valid channels")
}

/// Final channel of every photon in a label.
pub fn label_channels(label: &BasisLabel) -> Vec<(u8, Channel)> {
    label
        .sites()
        .iter()
        .map(|(p, s)| (*p, s.channel(*p).expect("photon in range")))
        .collect()
}

/// Photon count per channel, index 0 for channel 1.
pub fn occupancy(label: &BasisLabel) -> [u8; NUM_CHANNELS as usize] {
    let mut n = [0u8; NUM_CHANNELS as usize];
    for (_, c) in label_channels(label) {
        n[c.index() as usize - 1] += 1;
    }
    n
}

/// Exactly one photon on each of the pair's channels and none on the other
/// two detector channels.
pub fn postselect_detectors(layout: &CircuitLayout, state: &SparseState, pair: (DetectorId, DetectorId)) -> SparseState {
    let want: BTreeMap<Channel, u8> = DetectorId::ALL
        .iter()
        .map(|&d| (layout.detector_channel(d), u8::from(d == pair.0 || d == pair.1)))
        .collect();
    state
        .map_terms(|l, a| {
            let n = occupancy(l);
            want.iter().all(|(c, k)| n[c.index() as usize - 1] == *k).then(|| (l.clone(), a))
        })
        .expect("filter keeps labels")
}

/// Exactly one photon leaves each qubit circuit.
pub fn postselect_single_occupancy(layout: &CircuitLayout, state: &SparseState) -> SparseState {
    let circuits = layout.qubit_circuits();
    state
        .map_terms(|l, a| {
            let channels = label_channels(l);
            circuits
                .iter()
                .all(|&j| channels.iter().filter(|(_, c)| c.circuit() == j).count() == 1)
                .then(|| (l.clone(), a))
        })
        .expect("filter keeps labels")
}

/// `|<target|state>|^2 / <state|state>`, or `None` for a zero state.
fn fidelity(target: &SparseState, state: &SparseState) -> Result<Option<f64>> {
    let n2 = state.norm_sqr();
    if n2 <= 1e-30 {
        return Ok(None);
    }
    Ok(Some(target.inner_product(state)?.norm_sqr() / n2))
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct OccupationOutcome {
    pub occupancy: [u8; NUM_CHANNELS as usize],
    /// Plain sum of the labelled amplitudes with this occupancy.
    pub amplitude: Amplitude,
}

impl OccupationOutcome {
    /// Amplitude of the normalised bosonic occupation state.
    pub fn fock_amplitude(&self) -> Amplitude {
        let f: f64 = self.occupancy.iter().map(|&n| (1..=n as u32).product::<u32>() as f64).product();
        self.amplitude * f.sqrt()
    }
}

/// Merges labelled outcomes that differ only by a permutation of photons.
pub fn identify(state: &SparseState) -> Vec<OccupationOutcome> {
    let mut acc: BTreeMap<[u8; NUM_CHANNELS as usize], Amplitude> = BTreeMap::new();
    for (l, a) in state.terms() {
        *acc.entry(occupancy(l)).or_default() += a;
    }
    acc.into_iter()
        .filter(|(_, a)| a.norm() >= crate::state::PRUNE_THRESHOLD)
        .map(|(occupancy, amplitude)| OccupationOutcome { occupancy, amplitude })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverlapRow {
    pub delta: f64,
    pub pair: String,
    /// `|<GHZ_ij|Psi_gen>|^2` with the unnormalised general outcome.
    pub p_gen: f64,
    pub p_gen_normalized: f64,
    pub f_postselected: Option<f64>,
    pub f_single_occupancy: Option<f64>,
    /// Set when a post-selected state vanishes and a fidelity is undefined.
    pub flagged: bool,
}

/// `n` evenly spaced points on `[min, max]`, endpoints included.
pub fn delta_grid(n: usize, min: f64, max: f64) -> Result<Vec<f64>> {
    check_delta(min)?;
    check_delta(max)?;
    if n < 2 || min > max {
        return Err(Error::InvalidLabel(format!("grid needs at least 2 points and min <= max, got {n} on [{min}, {max}]")));
    }
    let step = (max - min) / (n - 1) as f64;
    Ok((0..n).map(|k| if k == n - 1 { max } else { min + step * k as f64 }).collect())
}

pub fn default_grid() -> Vec<f64> {
    delta_grid(DEFAULT_GRID_POINTS, 0.0, DELTA_MAX).expect("default grid is valid")
}
