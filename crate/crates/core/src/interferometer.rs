//! The five-circuit interferometer: channels, optical elements, layer order
//! and the single-photon scattering convention shared by every engine.
//!
//! Channel `2j-1` is mode A and channel `2j` is mode B of circuit `j`.
//! Photon `j` enters its first beam splitter on lane `2j`, so transmission
//! puts it in A and reflection (phase `i`) in B. A beam splitter multiplies
//! by `i*r` and keeps the photon in its lane on reflection, or by `t` and
//! moves it to the partner lane on transmission. A mirror multiplies by `i`.
//!
//! The output ports of the two detector beam splitters are labelled crosswise
//! (`output_crossings`): the port reached by the reflected B arm of circuit 2
//! is channel 3. With that labelling the photon-2 state `(i|A> + |B>)/sqrt2`
//! leaves entirely through channel 3 and fires D1, and the history records
//! match the channel numbering used for the error analysis.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{Amplitude, Mode};

pub const NUM_CHANNELS: u8 = 10;
pub const NUM_PHOTONS: u8 = 5;

const UNITARITY_TOL: f64 = 1e-12;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Channel(u8);

impl Channel {
    pub fn new(index: u8) -> Result<Self> {
        if (1..=NUM_CHANNELS).contains(&index) {
            Ok(Channel(index))
        } else {
            Err(Error::InvalidChannel(index))
        }
    }

    /// Channel of `mode` in `circuit` (1..=5).
    pub fn of(circuit: u8, mode: Mode) -> Result<Self> {
        if !(1..=NUM_PHOTONS).contains(&circuit) {
            return Err(Error::InvalidLabel(format!("circuit {circuit}")));
        }
        Ok(match mode {
            Mode::A => Channel(2 * circuit - 1),
            Mode::B => Channel(2 * circuit),
        })
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn circuit(self) -> u8 {
        self.0.div_ceil(2)
    }

    pub fn mode(self) -> Mode {
        if self.0 % 2 == 1 {
            Mode::A
        } else {
            Mode::B
        }
    }

    pub fn all() -> impl Iterator<Item = Channel> {
        (1..=NUM_CHANNELS).map(Channel)
    }
}

impl TryFrom<u8> for Channel {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        Channel::new(v)
    }
}

impl From<Channel> for u8 {
    fn from(c: Channel) -> u8 {
        c.0
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DetectorId {
    D1,
    D2,
    D3,
    D4,
}

impl DetectorId {
    pub const ALL: [DetectorId; 4] = [DetectorId::D1, DetectorId::D2, DetectorId::D3, DetectorId::D4];

    /// The four coincidence pairs in reporting order.
    pub const PAIRS: [(DetectorId, DetectorId); 4] = [
        (DetectorId::D1, DetectorId::D3),
        (DetectorId::D1, DetectorId::D4),
        (DetectorId::D2, DetectorId::D3),
        (DetectorId::D2, DetectorId::D4),
    ];

    /// Mediator photon this detector measures.
    pub fn photon(self) -> u8 {
        match self {
            DetectorId::D1 | DetectorId::D2 => 2,
            DetectorId::D3 | DetectorId::D4 => 4,
        }
    }

    pub fn parse_pair(s: &str) -> Option<(DetectorId, DetectorId)> {
        DetectorId::PAIRS.into_iter().find(|p| pair_name(*p) == s)
    }
}

impl fmt::Display for DetectorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// `D1D3`-style name of a detector pair.
pub fn pair_name(pair: (DetectorId, DetectorId)) -> String {
    format!("{}{}", pair.0, pair.1)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    BeamSplitter,
    Mirror,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Reflect,
    Transmit,
    Mirror,
}

impl Action {
    pub fn letter(self) -> char {
        match self {
            Action::Reflect | Action::Mirror => 'r',
            Action::Transmit => 't',
        }
    }
}

fn default_amp() -> f64 {
    std::f64::consts::FRAC_1_SQRT_2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub id: String,
    pub kind: ElementKind,
    pub ports: Vec<Channel>,
    pub layer: u8,
    #[serde(default = "default_amp")]
    pub r: f64,
    #[serde(default = "default_amp")]
    pub t: f64,
}

impl Element {
    pub fn beam_splitter(id: &str, a: u8, b: u8, layer: u8) -> Self {
        Element {
            id: id.to_string(),
            kind: ElementKind::BeamSplitter,
            ports: vec![Channel(a), Channel(b)],
            layer,
            r: default_amp(),
            t: default_amp(),
        }
    }

    pub fn mirror(id: &str, c: u8, layer: u8) -> Self {
        Element {
            id: id.to_string(),
            kind: ElementKind::Mirror,
            ports: vec![Channel(c)],
            layer,
            r: 1.0,
            t: 0.0,
        }
    }

    pub fn touches(&self, c: Channel) -> bool {
        self.ports.contains(&c)
    }

    pub fn partner(&self, c: Channel) -> Option<Channel> {
        match (self.kind, &self.ports[..]) {
            (ElementKind::BeamSplitter, [a, b]) if *a == c => Some(*b),
            (ElementKind::BeamSplitter, [a, b]) if *b == c => Some(*a),
            _ => None,
        }
    }

    /// 2x2 scattering matrix `[[i r, t], [t, i r]]` in port order.
    pub fn matrix(&self) -> [[Amplitude; 2]; 2] {
        let ir = Amplitude::new(0.0, self.r);
        let t = Amplitude::new(self.t, 0.0);
        [[ir, t], [t, ir]]
    }

    /// Branches of a photon entering on `c`: `(exit channel, action, amplitude)`.
    pub fn scatter(&self, c: Channel) -> Result<Vec<(Channel, Action, Amplitude)>> {
        if !self.touches(c) {
            return Err(Error::ChannelNotOnElement { channel: c.0, element: self.id.clone() });
        }
        Ok(match self.kind {
            ElementKind::Mirror => vec![(c, Action::Mirror, Amplitude::i())],
            ElementKind::BeamSplitter => {
                let p = self.partner(c).expect("beam splitter has two ports");
                vec![
                    (c, Action::Reflect, Amplitude::new(0.0, self.r)),
                    (p, Action::Transmit, Amplitude::new(self.t, 0.0)),
                ]
            }
        })
    }
}

/// Single-photon application of one element.
pub fn apply_element_single(channel: Channel, element: &Element) -> Result<Vec<(Channel, Amplitude)>> {
    Ok(element.scatter(channel)?.into_iter().map(|(c, _, a)| (c, a)).collect())
}

fn standard_crossings() -> Vec<(Channel, Channel)> {
    vec![(Channel(3), Channel(4)), (Channel(7), Channel(8))]
}

fn standard_detectors() -> BTreeMap<Channel, DetectorId> {
    BTreeMap::from([
        (Channel(3), DetectorId::D1),
        (Channel(4), DetectorId::D2),
        (Channel(7), DetectorId::D3),
        (Channel(8), DetectorId::D4),
    ])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitLayout {
    pub elements: Vec<Element>,
    /// Lane pairs whose labels are exchanged after the final layer.
    #[serde(default = "standard_crossings")]
    pub output_crossings: Vec<(Channel, Channel)>,
    #[serde(default = "standard_detectors")]
    pub detector_map: BTreeMap<Channel, DetectorId>,
}

impl CircuitLayout {
    pub fn standard() -> Self {
        let mut elements = Vec::with_capacity(13);
        for j in 1..=NUM_PHOTONS {
            elements.push(Element::beam_splitter(&format!("BS{j}"), 2 * j - 1, 2 * j, 1));
        }
        elements.push(Element::mirror("M1", 2, 2));
        elements.push(Element::beam_splitter("BS6", 1, 4, 2));
        elements.push(Element::beam_splitter("BS7", 3, 6, 2));
        elements.push(Element::beam_splitter("BS8", 5, 8, 2));
        elements.push(Element::beam_splitter("BS9", 7, 10, 2));
        elements.push(Element::mirror("M2", 9, 2));
        elements.push(Element::beam_splitter("BS10", 3, 4, 3));
        elements.push(Element::beam_splitter("BS11", 7, 8, 3));
        let layout = CircuitLayout {
            elements,
            output_crossings: standard_crossings(),
            detector_map: standard_detectors(),
        };
        layout.validate().expect("standard layout is valid");
        layout
    }

    /// Standard layout with the four central beam splitters replaced by
    /// one mirror per lane.
    pub fn central_mirror_variant() -> Self {
        let mut out = CircuitLayout::standard();
        let mut elements = Vec::new();
        for e in out.elements.drain(..) {
            if e.layer == 2 && e.kind == ElementKind::BeamSplitter {
                for p in &e.ports {
                    elements.push(Element::mirror(&format!("{}.{}", e.id, p.0), p.0, 2));
                }
            } else {
                elements.push(e);
            }
        }
        out.elements = elements;
        out.validate().expect("mirror variant is valid");
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let layout: CircuitLayout = serde_json::from_str(text)?;
        layout.validate()?;
        Ok(layout)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidLayout(m));
        let mut ids = BTreeSet::new();
        let mut used: BTreeMap<u8, BTreeSet<Channel>> = BTreeMap::new();
        for e in &self.elements {
            if !ids.insert(e.id.as_str()) {
                return bad(format!("duplicate element id {}", e.id));
            }
            if !(1..=3).contains(&e.layer) {
                return bad(format!("{} has layer {}", e.id, e.layer));
            }
            match (e.kind, e.ports.len()) {
                (ElementKind::BeamSplitter, 2) => {
                    if e.ports[0] == e.ports[1] {
                        return bad(format!("{} has identical ports", e.id));
                    }
                    if !(e.r.is_finite() && e.t.is_finite()) || (e.r * e.r + e.t * e.t - 1.0).abs() > UNITARITY_TOL {
                        return bad(format!("{}: r^2 + t^2 != 1", e.id));
                    }
                }
                (ElementKind::Mirror, 1) => {}
                (kind, n) => return bad(format!("{} is a {kind:?} with {n} ports", e.id)),
            }
            let lanes = used.entry(e.layer).or_default();
            for p in &e.ports {
                if !lanes.insert(*p) {
                    return Err(Error::OverlappingPorts { layer: e.layer, channel: p.0 });
                }
            }
        }
        for j in 1..=NUM_PHOTONS {
            let src = self.source_channel(j);
            let ok = self
                .element_at(1, src)
                .is_some_and(|e| e.kind == ElementKind::BeamSplitter && e.partner(src).map(|c| c.circuit()) == Some(j));
            if !ok {
                return bad(format!("photon {j} has no first-layer beam splitter inside its circuit"));
            }
        }
        let mut crossed = BTreeSet::new();
        for (a, b) in &self.output_crossings {
            if a == b || !crossed.insert(*a) || !crossed.insert(*b) {
                return bad("output crossings must be disjoint lane pairs".into());
            }
        }
        let mut seen = BTreeSet::new();
        for d in self.detector_map.values() {
            if !seen.insert(*d) {
                return bad(format!("detector {d} mapped twice"));
            }
        }
        if seen.len() != 4 {
            return bad("all four detectors must be mapped".into());
        }
        Ok(())
    }

    pub fn elements_in_layer(&self, layer: u8) -> impl Iterator<Item = &Element> {
        self.elements.iter().filter(move |e| e.layer == layer)
    }

    pub fn element_at(&self, layer: u8, c: Channel) -> Option<&Element> {
        self.elements.iter().find(|e| e.layer == layer && e.touches(c))
    }

    pub fn element_index(&self, id: &str) -> Option<usize> {
        self.elements.iter().position(|e| e.id == id)
    }

    pub fn num_layers(&self) -> u8 {
        self.elements.iter().map(|e| e.layer).max().unwrap_or(0)
    }

    /// Lane on which photon `j` enters its first beam splitter.
    pub fn source_channel(&self, photon: u8) -> Channel {
        Channel(2 * photon)
    }

    /// Final channel label of a lane after the last layer.
    pub fn output_label(&self, lane: Channel) -> Channel {
        for (a, b) in &self.output_crossings {
            if *a == lane {
                return *b;
            }
            if *b == lane {
                return *a;
            }
        }
        lane
    }

    pub fn detector_channel(&self, d: DetectorId) -> Channel {
        *self
            .detector_map
            .iter()
            .find(|(_, v)| **v == d)
            .expect("validated layouts map every detector")
            .0
    }

    pub fn detector_at(&self, c: Channel) -> Option<DetectorId> {
        self.detector_map.get(&c).copied()
    }

    /// Whether `e` is a second-layer beam splitter shared by two circuits.
    pub fn is_central(&self, e: &Element) -> bool {
        e.layer == 2 && e.kind == ElementKind::BeamSplitter
    }

    /// Circuits whose photons carry the qubits (no detectors on them).
    pub fn qubit_circuits(&self) -> Vec<u8> {
        (1..=NUM_PHOTONS)
            .filter(|&j| {
                [Mode::A, Mode::B]
                    .iter()
                    .all(|&m| !self.detector_map.contains_key(&Channel::of(j, m).expect("circuit in range")))
            })
            .collect()
    }

    /// Pairs of lanes that meet on a second-layer beam splitter.
    pub fn collision_pairs(&self) -> Vec<(Channel, Channel)> {
        self.elements_in_layer(2)
            .filter(|e| e.kind == ElementKind::BeamSplitter)
            .map(|e| (e.ports[0], e.ports[1]))
            .collect()
    }

    /// Propagates single-photon amplitudes through layers `from_layer..`
    /// and applies the output labelling.
    pub fn propagate_single(&self, from_layer: u8, input: &[(Channel, Amplitude)]) -> BTreeMap<Channel, Amplitude> {
        let mut amps: BTreeMap<Channel, Amplitude> = BTreeMap::new();
        for (c, a) in input {
            *amps.entry(*c).or_default() += a;
        }
        for layer in from_layer..=self.num_layers() {
            let mut next: BTreeMap<Channel, Amplitude> = BTreeMap::new();
            for (c, a) in amps {
                match self.element_at(layer, c) {
                    Some(e) => {
                        for (out, amp) in apply_element_single(c, e).expect("element touches lane") {
                            *next.entry(out).or_default() += a * amp;
                        }
                    }
                    None => *next.entry(c).or_default() += a,
                }
            }
            amps = next;
        }
        amps.into_iter().map(|(c, a)| (self.output_label(c), a)).collect()
    }
}

impl Default for CircuitLayout {
    fn default() -> Self {
        CircuitLayout::standard()
    }
}
