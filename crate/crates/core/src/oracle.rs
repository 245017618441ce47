//! Brute-force second-quantised simulation of the interferometer.
//!
//! The state is a dense vector over every occupation pattern of the modes.
//! Beam splitters act through the bosonic two-mode transform built from
//! factorial sums; nothing here reuses the sparse engines, so their results
//! can be checked against it.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ideal::{ConditionalOutcome, ALL_PHOTONS, QUBIT_PHOTONS};
use crate::interferometer::{Channel, CircuitLayout, DetectorId, Element, ElementKind, NUM_CHANNELS, NUM_PHOTONS};
use crate::state::{Amplitude, BasisLabel, Mode, SparseState};

/// Occupation patterns of `photons` bosons in `modes` modes, in ascending
/// lexicographic order.
#[derive(Clone, Debug)]
pub struct FockBasis {
    modes: usize,
    photons: u8,
    states: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

impl FockBasis {
    pub fn new(modes: usize, photons: u8) -> Self {
        let mut states = Vec::new();
        let mut cur = vec![0u8; modes];
        fill(&mut cur, 0, photons, &mut states);
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        FockBasis { modes, photons, states, index }
    }

    /// Ten channels, five photons: 2002 states.
    pub fn standard() -> Self {
        FockBasis::new(NUM_CHANNELS as usize, NUM_PHOTONS)
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn photons(&self) -> u8 {
        self.photons
    }

    pub fn state(&self, i: usize) -> &[u8] {
        &self.states[i]
    }

    pub fn index_of(&self, occupation: &[u8]) -> Option<usize> {
        self.index.get(occupation).copied()
    }
}

fn fill(cur: &mut Vec<u8>, mode: usize, left: u8, out: &mut Vec<Vec<u8>>) {
    if mode + 1 == cur.len() {
        cur[mode] = left;
        out.push(cur.clone());
        return;
    }
    for n in 0..=left {
        cur[mode] = n;
        fill(cur, mode + 1, left - n, out);
    }
    cur[mode] = 0;
}

#[derive(Clone, Debug)]
pub struct FockState {
    basis: Arc<FockBasis>,
    pub amps: Vec<Amplitude>,
}

impl FockState {
    pub fn zero(basis: Arc<FockBasis>) -> Self {
        let amps = vec![Amplitude::default(); basis.dim()];
        FockState { basis, amps }
    }

    /// Unit amplitude on one occupation pattern.
    pub fn occupation(basis: Arc<FockBasis>, occupation: &[u8]) -> Result<Self> {
        let i = basis
            .index_of(occupation)
            .ok_or_else(|| Error::InvalidLabel(format!("occupation {occupation:?} not in basis")))?;
        let mut s = FockState::zero(basis);
        s.amps[i] = Amplitude::new(1.0, 0.0);
        Ok(s)
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn amplitude(&self, occupation: &[u8]) -> Amplitude {
        self.basis.index_of(occupation).map(|i| self.amps[i]).unwrap_or_default()
    }

    /// Non-zero entries in basis order.
    pub fn entries(&self) -> impl Iterator<Item = (&[u8], Amplitude)> {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(i, a)| (self.basis.state(i), *a))
    }

    /// Keeps only the patterns accepted by `keep`.
    pub fn project<F: Fn(&[u8]) -> bool>(&self, keep: F) -> FockState {
        let mut out = FockState::zero(self.basis.clone());
        for (i, a) in self.amps.iter().enumerate() {
            if keep(self.basis.state(i)) {
                out.amps[i] = *a;
            }
        }
        out
    }

    /// Exchanges the occupations of two modes.
    pub fn swap_modes(&self, a: usize, b: usize) -> FockState {
        let mut out = FockState::zero(self.basis.clone());
        for (i, amp) in self.amps.iter().enumerate() {
            let mut occ = self.basis.state(i).to_vec();
            occ.swap(a, b);
            let j = self.basis.index_of(&occ).expect("swap keeps photon number");
            out.amps[j] += amp;
        }
        out
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

fn mode_of(c: Channel, basis: &FockBasis) -> Result<usize> {
    let m = c.index() as usize - 1;
    if m >= basis.modes() {
        return Err(Error::InvalidChannel(c.index()));
    }
    Ok(m)
}

/// Applies one beam splitter or mirror to every basis state.
pub fn apply_element(state: &FockState, e: &Element) -> Result<FockState> {
    let basis = state.basis.clone();
    let mut out = FockState::zero(basis.clone());
    match e.kind {
        ElementKind::Mirror => {
            let m = mode_of(e.ports[0], &basis)?;
            for (i, a) in state.amps.iter().enumerate() {
                out.amps[i] = a * Amplitude::i().powu(basis.state(i)[m] as u32);
            }
        }
        ElementKind::BeamSplitter => {
            let (ma, mb) = (mode_of(e.ports[0], &basis)?, mode_of(e.ports[1], &basis)?);
            let s = e.matrix();
            for (i, a) in state.amps.iter().enumerate() {
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let occ = basis.state(i);
                let (n1, n2) = (occ[ma] as u32, occ[mb] as u32);
                for m1 in 0..=n1 + n2 {
                    let m2 = n1 + n2 - m1;
                    let mut sum = Amplitude::default();
                    for k in m1.saturating_sub(n2)..=m1.min(n1) {
                        let l = m1 - k;
                        sum += s[0][0].powu(k) * s[1][0].powu(n1 - k) * s[0][1].powu(l) * s[1][1].powu(n2 - l)
                            * (binomial(n1, k) * binomial(n2, l));
                    }
                    let norm = (factorial(m1) * factorial(m2) / (factorial(n1) * factorial(n2))).sqrt();
                    let mut next = occ.to_vec();
                    next[ma] = m1 as u8;
                    next[mb] = m2 as u8;
                    let j = basis.index_of(&next).expect("photon number conserved");
                    out.amps[j] += a * sum * norm;
                }
            }
        }
    }
    Ok(out)
}

/// Applies a set of elements acting on disjoint ports.
pub fn evolve_layer(state: &FockState, elements: &[&Element]) -> Result<FockState> {
    let mut seen = Vec::new();
    for e in elements {
        for p in &e.ports {
            if seen.contains(p) {
                return Err(Error::OverlappingPorts { layer: e.layer, channel: p.index() });
            }
            seen.push(*p);
        }
    }
    let mut cur = state.clone();
    for e in elements {
        cur = apply_element(&cur, e)?;
    }
    Ok(cur)
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    /// Squared norm after each layer and after the output relabelling.
    pub layer_norms: Vec<f64>,
    /// Weight of collision-free patterns after the first layer.
    pub retention_probability: f64,
    /// Weight of the one-photon-per-circuit sector after the second layer.
    pub sector_probability: f64,
    /// Normalised sector state in qubit form.
    pub sector_state: SparseState,
    /// Detector-conditioned states, conditional on the sector.
    pub outcomes: Vec<ConditionalOutcome>,
    pub unconditional: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DistinguishableReport {
    /// Output amplitudes of each photon, indexed by photon - 1.
    pub per_photon: Vec<BTreeMap<Channel, Amplitude>>,
    /// Photon-labelled output state, product of the single-photon amplitudes.
    pub outcome: SparseState,
}

#[derive(Clone, Debug)]
pub struct FockOracle {
    layout: CircuitLayout,
    basis: Arc<FockBasis>,
}

impl FockOracle {
    pub fn new(layout: CircuitLayout) -> Self {
        FockOracle { layout, basis: Arc::new(FockBasis::standard()) }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn layout(&self) -> &CircuitLayout {
        &self.layout
    }

    /// One photon on each source lane.
    pub fn input_state(&self) -> FockState {
        let mut occ = vec![0u8; self.basis.modes()];
        for j in 1..=NUM_PHOTONS {
            occ[self.layout.source_channel(j).index() as usize - 1] = 1;
        }
        FockState::occupation(self.basis.clone(), &occ).expect("five photons")
    }

    /// State after each layer; the last entry also has the output labels applied.
    pub fn run_layers(&self) -> Result<Vec<FockState>> {
        let mut states = Vec::new();
        let mut cur = self.input_state();
        for layer in 1..=self.layout.num_layers() {
            let elements: Vec<&Element> = self.layout.elements_in_layer(layer).collect();
            cur = evolve_layer(&cur, &elements)?;
            states.push(cur.clone());
        }
        states.push(self.relabel(&cur));
        Ok(states)
    }

    pub fn relabel(&self, state: &FockState) -> FockState {
        let mut cur = state.clone();
        for (a, b) in &self.layout.output_crossings {
            cur = cur.swap_modes(a.index() as usize - 1, b.index() as usize - 1);
        }
        cur
    }

    /// Final output state with the crossings applied.
    pub fn final_state(&self) -> Result<FockState> {
        Ok(self.run_layers()?.pop().expect("at least the relabelled state"))
    }

    fn circuit_counts(occ: &[u8]) -> [u8; 5] {
        std::array::from_fn(|j| occ[2 * j] + occ[2 * j + 1])
    }

    /// Qubit-form label of a pattern with one photon per listed circuit.
    fn qubit_label(occ: &[u8], circuits: &[u8]) -> BasisLabel {
        let modes: Vec<Mode> = circuits
            .iter()
            .map(|&j| if occ[2 * j as usize - 2] == 1 { Mode::A } else { Mode::B })
            .collect();
        BasisLabel::qubits(circuits, &modes).expect("circuit photons")
    }

    pub fn simulate_ideal_pipeline(&self) -> Result<OracleReport> {
        let states = self.run_layers()?;
        let layer_norms = states.iter().map(FockState::norm_sqr).collect();

        let pairs = self.layout.collision_pairs();
        let retention = states[0]
            .entries()
            .filter(|(occ, _)| {
                !pairs.iter().any(|(a, b)| occ[a.index() as usize - 1] > 0 && occ[b.index() as usize - 1] > 0)
            })
            .map(|(_, a)| a.norm_sqr())
            .sum();

        let one_each = |occ: &[u8]| Self::circuit_counts(occ) == [1; 5];
        let sector = states[1].project(one_each);
        let sector_terms = sector.entries().map(|(occ, a)| (Self::qubit_label(occ, &ALL_PHOTONS), a));
        let (sector_state, sector_probability) = SparseState::from_terms(&ALL_PHOTONS, sector_terms)?.normalize()?;

        let last = states.last().expect("relabelled state");
        let mut outcomes = Vec::with_capacity(4);
        let mut unconditional = Vec::with_capacity(4);
        for pair in DetectorId::PAIRS {
            let want: Vec<(usize, u8)> = DetectorId::ALL
                .iter()
                .map(|&d| {
                    let c = self.layout.detector_channel(d);
                    (c.index() as usize - 1, u8::from(d == pair.0 || d == pair.1))
                })
                .collect();
            let hit = last.project(|occ| {
                want.iter().all(|(m, n)| occ[*m] == *n)
                    && QUBIT_PHOTONS.iter().all(|&j| Self::circuit_counts(occ)[j as usize - 1] == 1)
            });
            let terms = hit.entries().map(|(occ, a)| (Self::qubit_label(occ, &QUBIT_PHOTONS), a));
            let residual = SparseState::from_terms(&QUBIT_PHOTONS, terms)?;
            let p = residual.norm_sqr();
            unconditional.push(p);
            let (state, probability) = match residual.normalize() {
                Ok((s, _)) => (s, p / sector_probability),
                Err(Error::ZeroNorm(_)) => (SparseState::zero(&QUBIT_PHOTONS), 0.0),
                Err(e) => return Err(e),
            };
            outcomes.push(ConditionalOutcome { pair, state, probability });
        }
        Ok(OracleReport {
            layer_norms,
            retention_probability: retention,
            sector_probability,
            sector_state,
            outcomes,
            unconditional,
        })
    }

    /// Dense single-photon transfer matrix of one layer, `m[out][in]`.
    pub fn layer_matrix(&self, layer: u8) -> [[Amplitude; 10]; 10] {
        let mut m = [[Amplitude::default(); 10]; 10];
        for (c, row) in m.iter_mut().enumerate() {
            row[c] = Amplitude::new(1.0, 0.0);
        }
        for e in self.layout.elements_in_layer(layer) {
            let idx: Vec<usize> = e.ports.iter().map(|p| p.index() as usize - 1).collect();
            match e.kind {
                ElementKind::Mirror => m[idx[0]][idx[0]] = Amplitude::i(),
                ElementKind::BeamSplitter => {
                    let s = e.matrix();
                    for (r, &o) in idx.iter().enumerate() {
                        for (c, &i) in idx.iter().enumerate() {
                            m[o][i] = s[r][c];
                        }
                    }
                }
            }
        }
        m
    }

    /// Independent single-photon propagation of every photon.
    pub fn simulate_distinguishable(&self) -> Result<DistinguishableReport> {
        let layers: Vec<[[Amplitude; 10]; 10]> = (1..=self.layout.num_layers()).map(|l| self.layer_matrix(l)).collect();
        let mut per_photon = Vec::with_capacity(NUM_PHOTONS as usize);
        for j in 1..=NUM_PHOTONS {
            let mut v = [Amplitude::default(); 10];
            v[self.layout.source_channel(j).index() as usize - 1] = Amplitude::new(1.0, 0.0);
            for m in &layers {
                let mut next = [Amplitude::default(); 10];
                for (o, row) in m.iter().enumerate() {
                    next[o] = row.iter().zip(&v).map(|(a, b)| a * b).sum();
                }
                v = next;
            }
            let mut out = BTreeMap::new();
            for (k, a) in v.iter().enumerate() {
                if a.norm_sqr() > 0.0 {
                    let lane = Channel::new(k as u8 + 1)?;
                    out.insert(self.layout.output_label(lane), *a);
                }
            }
            per_photon.push(out);
        }
        let mut terms: Vec<(Vec<(u8, Channel)>, Amplitude)> = vec![(Vec::new(), Amplitude::new(1.0, 0.0))];
        for (p, amps) in per_photon.iter().enumerate() {
            let mut next = Vec::with_capacity(terms.len() * amps.len());
            for (assign, a) in &terms {
                for (c, b) in amps {
                    let mut x = assign.clone();
                    x.push((p as u8 + 1, *c));
                    next.push((x, a * b));
                }
            }
            terms = next;
        }
        let labelled = terms
            .into_iter()
            .map(|(assign, a)| BasisLabel::from_channels(&assign).map(|l| (l, a)))
            .collect::<Result<Vec<_>>>()?;
        let outcome = SparseState::from_terms(&ALL_PHOTONS, labelled)?;
        Ok(DistinguishableReport { per_photon, outcome })
    }
}

impl Default for FockOracle {
    fn default() -> Self {
        FockOracle::new(CircuitLayout::standard())
    }
}
