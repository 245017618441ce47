//! Sparse complex-amplitude states over per-photon basis labels.
//!
//! A label assigns every photon of the state either a qubit mode (`A`/`B` of
//! its home circuit) or a raw channel. Channels inside the photon's home
//! circuit are always stored in qubit form, so the two spellings of the same
//! ket compare equal.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interferometer::Channel;

pub type Amplitude = Complex64;

/// Amplitudes with magnitude below this are dropped.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

const ZERO_NORM_FLOOR: f64 = 1e-30;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mode {
    A,
    B,
}

impl Mode {
    pub fn flip(self) -> Mode {
        match self {
            Mode::A => Mode::B,
            Mode::B => Mode::A,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::A => "A",
            Mode::B => "B",
        })
    }
}

/// Where one photon sits in a basis ket.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Site {
    Mode(Mode),
    Channel(Channel),
}

impl Site {
    /// Canonical site of `photon` in `channel`: qubit form when the channel
    /// belongs to the photon's home circuit.
    pub fn from_channel(photon: u8, channel: Channel) -> Site {
        if channel.circuit() == photon {
            Site::Mode(channel.mode())
        } else {
            Site::Channel(channel)
        }
    }

    /// Channel form of this site for `photon`.
    pub fn channel(self, photon: u8) -> Result<Channel> {
        match self {
            Site::Mode(m) => Channel::of(photon, m),
            Site::Channel(c) => Ok(c),
        }
    }
}

/// Ordered per-photon assignment, sorted by photon index.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisLabel(Vec<(u8, Site)>);

impl BasisLabel {
    pub fn new<I: IntoIterator<Item = (u8, Site)>>(sites: I) -> Result<Self> {
        let mut v: Vec<(u8, Site)> = sites
            .into_iter()
            .map(|(p, s)| match s {
                Site::Channel(c) => (p, Site::from_channel(p, c)),
                m => (p, m),
            })
            .collect();
        v.sort_by_key(|(p, _)| *p);
        for w in v.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidLabel(format!("photon {} assigned twice", w[0].0)));
            }
        }
        if let Some((p, _)) = v.iter().find(|(p, _)| *p == 0) {
            return Err(Error::InvalidLabel(format!("photon index {p}")));
        }
        Ok(BasisLabel(v))
    }

    /// Label in qubit form, photon `photons[k]` in `modes[k]`.
    pub fn qubits(photons: &[u8], modes: &[Mode]) -> Result<Self> {
        if photons.len() != modes.len() {
            return Err(Error::InvalidLabel("photon/mode count mismatch".into()));
        }
        Self::new(photons.iter().copied().zip(modes.iter().map(|&m| Site::Mode(m))))
    }

    pub fn from_channels(assignment: &[(u8, Channel)]) -> Result<Self> {
        Self::new(assignment.iter().map(|&(p, c)| (p, Site::Channel(c))))
    }

    pub fn sites(&self) -> &[(u8, Site)] {
        &self.0
    }

    pub fn photons(&self) -> Vec<u8> {
        self.0.iter().map(|(p, _)| *p).collect()
    }

    pub fn site(&self, photon: u8) -> Option<Site> {
        self.0.iter().find(|(p, _)| *p == photon).map(|(_, s)| *s)
    }

    /// Mode of `photon` if it is in qubit form.
    pub fn mode(&self, photon: u8) -> Option<Mode> {
        match self.site(photon)? {
            Site::Mode(m) => Some(m),
            Site::Channel(_) => None,
        }
    }

    pub fn is_qubit_form(&self) -> bool {
        self.0.iter().all(|(_, s)| matches!(s, Site::Mode(_)))
    }

    fn without(&self, photon: u8) -> BasisLabel {
        BasisLabel(self.0.iter().copied().filter(|(p, _)| *p != photon).collect())
    }

    fn merged(&self, other: &BasisLabel) -> BasisLabel {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        v.sort_by_key(|(p, _)| *p);
        BasisLabel(v)
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, s) in &self.0 {
            match s {
                Site::Mode(m) => write!(f, "|{m}>{p}")?,
                Site::Channel(c) => write!(f, "|{}>{p}", c.index())?,
            }
        }
        Ok(())
    }
}

/// Sparse ket: basis labels mapped to non-negligible amplitudes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "StateJson", try_from = "StateJson")]
pub struct SparseState {
    photons: Vec<u8>,
    terms: BTreeMap<BasisLabel, Amplitude>,
}

impl SparseState {
    /// The zero vector over `photons`.
    pub fn zero(photons: &[u8]) -> Self {
        let mut photons = photons.to_vec();
        photons.sort_unstable();
        photons.dedup();
        SparseState { photons, terms: BTreeMap::new() }
    }

    /// Builds a state, summing repeated labels and pruning negligible terms.
    pub fn from_terms<I>(photons: &[u8], terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BasisLabel, Amplitude)>,
    {
        let mut state = SparseState::zero(photons);
        for (label, amp) in terms {
            if label.photons() != state.photons {
                return Err(Error::PhotonSetMismatch {
                    left: state.photons.clone(),
                    right: label.photons(),
                });
            }
            if !amp.re.is_finite() || !amp.im.is_finite() {
                return Err(Error::NonFinite(label.to_string()));
            }
            *state.terms.entry(label).or_default() += amp;
        }
        state.prune();
        Ok(state)
    }

    /// `a|A>_p + b|B>_p`.
    pub fn single_photon(photon: u8, a: Amplitude, b: Amplitude) -> Self {
        let terms = [(Mode::A, a), (Mode::B, b)]
            .into_iter()
            .map(|(m, amp)| (BasisLabel(vec![(photon, Site::Mode(m))]), amp));
        SparseState::from_terms(&[photon], terms).expect("single-photon labels are valid")
    }

    /// Unit-amplitude single ket.
    pub fn basis(label: BasisLabel) -> Self {
        let photons = label.photons();
        SparseState::from_terms(&photons, [(label, Amplitude::new(1.0, 0.0))])
            .expect("label defines its own photon set")
    }

    fn prune(&mut self) {
        self.terms.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
    }

    pub fn photons(&self) -> &[u8] {
        &self.photons
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BasisLabel, &Amplitude)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, label: &BasisLabel) -> Amplitude {
        self.terms.get(label).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn scale(&self, c: Amplitude) -> Self {
        let mut out = self.clone();
        for a in out.terms.values_mut() {
            *a *= c;
        }
        out.prune();
        out
    }

    /// Applies `f` to every term's label and amplitude; colliding labels add up.
    pub fn map_terms<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&BasisLabel, Amplitude) -> Option<(BasisLabel, Amplitude)>,
    {
        let mapped: Vec<_> = self.terms.iter().filter_map(|(l, a)| f(l, *a)).collect();
        SparseState::from_terms(&self.photons, mapped)
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &SparseState) -> Result<Amplitude> {
        if self.photons != other.photons {
            return Err(Error::PhotonSetMismatch {
                left: self.photons.clone(),
                right: other.photons.clone(),
            });
        }
        let (small, large, conj_small) = if self.terms.len() <= other.terms.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        let mut acc = Amplitude::default();
        for (label, a) in &small.terms {
            if let Some(b) = large.terms.get(label) {
                acc += if conj_small { a.conj() * b } else { b.conj() * a };
            }
        }
        Ok(acc)
    }

    /// Unit-norm copy and the squared norm it was divided by.
    pub fn normalize(&self) -> Result<(SparseState, f64)> {
        let n2 = self.norm_sqr();
        if n2 <= ZERO_NORM_FLOOR {
            return Err(Error::ZeroNorm(n2));
        }
        Ok((self.scale(Amplitude::new(1.0 / n2.sqrt(), 0.0)), n2))
    }

    pub fn tensor(&self, other: &SparseState) -> Result<SparseState> {
        if let Some(p) = self.photons.iter().find(|p| other.photons.contains(p)) {
            return Err(Error::PhotonSetOverlap(*p));
        }
        let mut photons = self.photons.clone();
        photons.extend_from_slice(&other.photons);
        let terms = self.terms.iter().flat_map(|(la, a)| {
            other.terms.iter().map(move |(lb, b)| (la.merged(lb), a * b))
        });
        SparseState::from_terms(&photons, terms)
    }

    /// Projects the listed photons onto the given single-photon bras and
    /// returns the unnormalised residual state on the remaining photons.
    pub fn project_rank1(&self, bras: &[SparseState]) -> Result<SparseState> {
        let mut current = self.clone();
        for bra in bras {
            let [photon] = bra.photons[..] else {
                return Err(Error::InvalidLabel(format!(
                    "bra must address one photon, got {:?}",
                    bra.photons
                )));
            };
            if !current.photons.contains(&photon) {
                return Err(Error::PhotonAbsent(photon));
            }
            let rest: Vec<u8> = current.photons.iter().copied().filter(|&p| p != photon).collect();
            let mut terms = Vec::with_capacity(current.terms.len());
            for (label, amp) in &current.terms {
                let site = label.site(photon).expect("label covers photon set");
                let bra_label = BasisLabel(vec![(photon, site)]);
                if let Some(b) = bra.terms.get(&bra_label) {
                    terms.push((label.without(photon), b.conj() * amp));
                }
            }
            current = SparseState::from_terms(&rest, terms)?;
        }
        Ok(current)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&StateJson::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<SparseState> {
        let raw: StateJson = serde_json::from_str(text)?;
        raw.try_into()
    }
}

impl fmt::Display for SparseState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (label, a)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:.6}{:+.6}i){label}", a.re, a.im)?;
        }
        Ok(())
    }
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum SiteJson {
    Mode(Mode),
    Channel(u8),
}

#[derive(Clone, Serialize, Deserialize)]
struct TermJson {
    label: BTreeMap<String, SiteJson>,
    re: f64,
    im: f64,
}

#[derive(Clone, Serialize, Deserialize)]
struct StateJson {
    photons: Vec<u8>,
    terms: Vec<TermJson>,
}

impl From<SparseState> for StateJson {
    fn from(s: SparseState) -> Self {
        StateJson::from(&s)
    }
}

impl From<&SparseState> for StateJson {
    fn from(s: &SparseState) -> Self {
        let terms = s
            .terms
            .iter()
            .map(|(label, a)| TermJson {
                label: label
                    .sites()
                    .iter()
                    .map(|(p, site)| {
                        let v = match site {
                            Site::Mode(m) => SiteJson::Mode(*m),
                            Site::Channel(c) => SiteJson::Channel(c.index()),
                        };
                        (p.to_string(), v)
                    })
                    .collect(),
                re: a.re,
                im: a.im,
            })
            .collect();
        StateJson { photons: s.photons.clone(), terms }
    }
}

impl TryFrom<StateJson> for SparseState {
    type Error = Error;

    fn try_from(raw: StateJson) -> Result<Self> {
        let mut terms = Vec::with_capacity(raw.terms.len());
        for t in raw.terms {
            let mut sites = Vec::with_capacity(t.label.len());
            for (key, v) in t.label {
                let photon: u8 = key
                    .parse()
                    .map_err(|_| Error::InvalidLabel(format!("photon key {key:?}")))?;
                let site = match v {
                    SiteJson::Mode(m) => Site::Mode(m),
                    SiteJson::Channel(c) => Site::Channel(Channel::new(c)?),
                };
                sites.push((photon, site));
            }
            terms.push((BasisLabel::new(sites)?, Amplitude::new(t.re, t.im)));
        }
        SparseState::from_terms(&raw.photons, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Amplitude {
        Amplitude::new(re, im)
    }

    fn plus_i(photon: u8) -> SparseState {
        SparseState::single_photon(photon, c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2))
    }

    #[test]
    fn orthogonal_labels_have_zero_overlap() {
        let a = SparseState::basis(BasisLabel::qubits(&[1, 2, 3, 4, 5], &[Mode::A; 5]).unwrap());
        let b = SparseState::basis(
            BasisLabel::qubits(&[1, 2, 3, 4, 5], &[Mode::B, Mode::A, Mode::A, Mode::A, Mode::A])
                .unwrap(),
        );
        assert_eq!(a.inner_product(&b).unwrap(), c(0.0, 0.0));
        assert_eq!(a.inner_product(&a).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn inner_product_rejects_mismatched_photons() {
        let err = plus_i(1).inner_product(&plus_i(2)).unwrap_err();
        assert!(matches!(err, Error::PhotonSetMismatch { .. }));
    }

    #[test]
    fn inner_product_is_conjugate_linear_on_the_left() {
        let a = plus_i(1);
        let b = SparseState::single_photon(1, c(0.3, 0.1), c(-0.2, 0.7));
        let ab = a.inner_product(&b).unwrap();
        let ba = b.inner_product(&a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-15);
        let scaled = a.scale(c(0.0, 2.0)).inner_product(&b).unwrap();
        assert!((scaled - c(0.0, -2.0) * ab).norm() < 1e-15);
    }

    #[test]
    fn two_photon_product_has_minus_half_on_bb() {
        let s = plus_i(1).tensor(&plus_i(2)).unwrap();
        let bb = BasisLabel::qubits(&[1, 2], &[Mode::B, Mode::B]).unwrap();
        assert!((s.amplitude(&bb) - c(-0.5, 0.0)).norm() < 1e-15);
        assert_eq!(s.len(), 4);
    }

    #[test]
    fn tensor_rejects_overlap() {
        assert_eq!(plus_i(3).tensor(&plus_i(3)).unwrap_err(), Error::PhotonSetOverlap(3));
    }

    #[test]
    fn tensor_with_unit_basis_state_relabels() {
        let unit = SparseState::basis(BasisLabel::qubits(&[4], &[Mode::B]).unwrap());
        let s = plus_i(1).tensor(&unit).unwrap();
        assert_eq!(s.photons(), &[1, 4]);
        let ab = BasisLabel::qubits(&[1, 4], &[Mode::A, Mode::B]).unwrap();
        assert!((s.amplitude(&ab) - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn normalize_reports_prior_norm() {
        let k = 1.0 / (2.0 * 10f64.sqrt());
        let s = SparseState::from_terms(
            &[1],
            [
                (BasisLabel::qubits(&[1], &[Mode::A]).unwrap(), c(k, 0.0)),
                (BasisLabel::qubits(&[1], &[Mode::B]).unwrap(), c(0.0, k)),
            ],
        )
        .unwrap();
        let (n, n2) = s.normalize().unwrap();
        assert!((n2 - 0.05).abs() < 1e-15);
        assert!((n.norm_sqr() - 1.0).abs() < 1e-12);
        let (again, one) = n.normalize().unwrap();
        assert!((one - 1.0).abs() < 1e-12);
        assert!((again.inner_product(&n).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn normalize_rejects_zero() {
        assert!(matches!(SparseState::zero(&[1]).normalize(), Err(Error::ZeroNorm(_))));
    }

    #[test]
    fn project_out_one_photon() {
        let s = SparseState::basis(BasisLabel::qubits(&[1, 2], &[Mode::A, Mode::A]).unwrap());
        let bra = SparseState::basis(BasisLabel::qubits(&[2], &[Mode::A]).unwrap());
        let r = s.project_rank1(&[bra]).unwrap();
        assert_eq!(r.photons(), &[1]);
        let a1 = BasisLabel::qubits(&[1], &[Mode::A]).unwrap();
        assert_eq!(r.amplitude(&a1), c(1.0, 0.0));

        let orth = SparseState::basis(BasisLabel::qubits(&[2], &[Mode::B]).unwrap());
        assert!(s.project_rank1(&[orth]).unwrap().is_empty());
    }

    #[test]
    fn project_rejects_absent_photon() {
        let err = plus_i(1).project_rank1(&[plus_i(4)]).unwrap_err();
        assert_eq!(err, Error::PhotonAbsent(4));
    }

    #[test]
    fn home_channels_collapse_to_qubit_form() {
        let ch = BasisLabel::from_channels(&[(1, Channel::new(2).unwrap()), (2, Channel::new(1).unwrap())])
            .unwrap();
        assert_eq!(ch.site(1), Some(Site::Mode(Mode::B)));
        assert_eq!(ch.site(2), Some(Site::Channel(Channel::new(1).unwrap())));
        assert!(!ch.is_qubit_form());
    }

    #[test]
    fn json_accepts_both_label_forms() {
        let text = r#"{"photons":[1,3],"terms":[
            {"label":{"1":"A","3":5},"re":0.6,"im":0.0},
            {"label":{"1":2,"3":"B"},"re":0.0,"im":0.8}]}"#;
        let s = SparseState::from_json(text).unwrap();
        let aa = BasisLabel::qubits(&[1, 3], &[Mode::A, Mode::A]).unwrap();
        let bb = BasisLabel::qubits(&[1, 3], &[Mode::B, Mode::B]).unwrap();
        assert_eq!(s.amplitude(&aa), c(0.6, 0.0));
        assert_eq!(s.amplitude(&bb), c(0.0, 0.8));
        let out = s.to_json().unwrap();
        assert!(out.contains("\"A\"") && !out.contains(": 5"));
        assert_eq!(SparseState::from_json(&out).unwrap(), s);
    }

    #[test]
    fn json_rejects_bad_channel() {
        let text = r#"{"photons":[1],"terms":[{"label":{"1":11},"re":1.0,"im":0.0}]}"#;
        assert_eq!(SparseState::from_json(text).unwrap_err(), Error::InvalidChannel(11));
    }

    #[test]
    fn non_finite_amplitudes_are_rejected() {
        let l = BasisLabel::qubits(&[1], &[Mode::A]).unwrap();
        let err = SparseState::from_terms(&[1], [(l, c(f64::NAN, 0.0))]).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
    }

    #[test]
    fn tiny_amplitudes_are_pruned() {
        let l = BasisLabel::qubits(&[1], &[Mode::A]).unwrap();
        let s = SparseState::from_terms(&[1], [(l, c(1e-16, 0.0))]).unwrap();
        assert!(s.is_empty());
    }
}
