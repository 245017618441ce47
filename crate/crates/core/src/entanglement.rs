//! Three-qubit entanglement of photons 1, 3 and 5: single-photon reductions,
//! local entropies, the 3-tangle and the SLOCC class.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{Amplitude, BasisLabel, Mode, SparseState};

/// Photons carrying the three qubits, in amplitude-index order.
pub const QUBITS: [u8; 3] = [1, 3, 5];

/// Entropy below which a photon counts as unentangled.
pub const EPS_ENTROPY: f64 = 1e-9;
/// 3-tangle below which a genuinely entangled state is W class.
pub const EPS_TANGLE: f64 = 1e-10;

const NORM_TOL: f64 = 1e-12;
const DENSITY_TOL: f64 = 1e-12;

/// Amplitudes indexed by `4*x1 + 2*x3 + x5` with `A = 0`, `B = 1`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PureState3 {
    amps: [Amplitude; 8],
}

fn bit(m: Mode) -> usize {
    match m {
        Mode::A => 0,
        Mode::B => 1,
    }
}

fn mode(b: usize) -> Mode {
    if b == 0 {
        Mode::A
    } else {
        Mode::B
    }
}

impl PureState3 {
    pub fn new(amps: [Amplitude; 8]) -> Result<Self> {
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite("three-qubit amplitude".into()));
        }
        let n2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidLabel(format!("three-qubit state has squared norm {n2}")));
        }
        Ok(PureState3 { amps })
    }

    /// Scales `amps` to unit norm.
    pub fn normalized(amps: [Amplitude; 8]) -> Result<Self> {
        let n2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if n2 <= 1e-30 || !n2.is_finite() {
            return Err(Error::ZeroNorm(n2));
        }
        let s = 1.0 / n2.sqrt();
        PureState3::new(amps.map(|a| a * s))
    }

    pub fn amplitudes(&self) -> &[Amplitude; 8] {
        &self.amps
    }

    pub fn amplitude(&self, x1: Mode, x3: Mode, x5: Mode) -> Amplitude {
        self.amps[4 * bit(x1) + 2 * bit(x3) + bit(x5)]
    }

    /// Reads a normalised state of photons 1, 3, 5 in qubit form.
    pub fn from_sparse(state: &SparseState) -> Result<Self> {
        if state.photons() != QUBITS {
            return Err(Error::PhotonSetMismatch { left: QUBITS.to_vec(), right: state.photons().to_vec() });
        }
        let mut amps = [Amplitude::default(); 8];
        for (label, a) in state.terms() {
            let idx = QUBITS
                .iter()
                .map(|&p| label.mode(p).map(bit).ok_or_else(|| Error::InvalidLabel(label.to_string())))
                .try_fold(0, |acc, b| b.map(|b| 2 * acc + b))?;
            amps[idx] = *a;
        }
        PureState3::new(amps)
    }

    pub fn to_sparse(&self) -> SparseState {
        let terms = self.amps.iter().enumerate().map(|(i, a)| {
            let modes = [mode(i >> 2 & 1), mode(i >> 1 & 1), mode(i & 1)];
            (BasisLabel::qubits(&QUBITS, &modes).expect("three qubit photons"), *a)
        });
        SparseState::from_terms(&QUBITS, terms).expect("qubit labels")
    }

    /// `(|AAA> + |BBB>)/sqrt2`.
    pub fn ghz() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = [Amplitude::default(); 8];
        amps[0] = Amplitude::new(s, 0.0);
        amps[7] = Amplitude::new(s, 0.0);
        PureState3 { amps }
    }

    /// `(|AAB> + |ABA> + |BAA>)/sqrt3`.
    pub fn w() -> Self {
        let s = 1.0 / 3f64.sqrt();
        let mut amps = [Amplitude::default(); 8];
        for i in [1, 2, 4] {
            amps[i] = Amplitude::new(s, 0.0);
        }
        PureState3 { amps }
    }

    /// Partial trace onto one of photons 1, 3, 5.
    pub fn reduce(&self, keep: u8) -> Result<DensityMatrix2> {
        let shift = match keep {
            1 => 2,
            3 => 1,
            5 => 0,
            p => return Err(Error::NotAnalysedPhoton(p)),
        };
        let mut m = [[Amplitude::default(); 2]; 2];
        for (i, a) in self.amps.iter().enumerate() {
            for (j, b) in self.amps.iter().enumerate() {
                let rest = !(1usize << shift) & 7;
                if i & rest == j & rest {
                    m[i >> shift & 1][j >> shift & 1] += a * b.conj();
                }
            }
        }
        Ok(DensityMatrix2 { m })
    }
}

impl fmt::Display for PureState3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_sparse().fmt(f)
    }
}

/// GHZ reference as a sparse state of photons 1, 3, 5.
pub fn ghz_state() -> SparseState {
    PureState3::ghz().to_sparse()
}

pub fn w_state() -> SparseState {
    PureState3::w().to_sparse()
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct DensityMatrix2 {
    pub m: [[Amplitude; 2]; 2],
}

impl DensityMatrix2 {
    /// Checks Hermiticity and unit trace.
    pub fn new(m: [[Amplitude; 2]; 2]) -> Result<Self> {
        let rho = DensityMatrix2 { m };
        if (m[0][1] - m[1][0].conj()).norm() > DENSITY_TOL || m[0][0].im.abs() > DENSITY_TOL || m[1][1].im.abs() > DENSITY_TOL {
            return Err(Error::InvalidDensityMatrix("not Hermitian".into()));
        }
        rho.check_trace()?;
        Ok(rho)
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0].re + self.m[1][1].re
    }

    fn check_trace(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).abs() > DENSITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
        }
        Ok(())
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.m[0][0].re;
        let d = self.m[1][1].re;
        let b = self.m[0][1].norm();
        let mid = 0.5 * (a + d);
        let half = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        [mid - half, mid + half]
    }
}

/// Von Neumann entropy in bits.
pub fn entropy_bits(rho: &DensityMatrix2) -> Result<f64> {
    rho.check_trace()?;
    let mut s = 0.0;
    for mut l in rho.eigenvalues() {
        if !(-DENSITY_TOL..=1.0 + DENSITY_TOL).contains(&l) {
            return Err(Error::InvalidDensityMatrix(format!("eigenvalue {l}")));
        }
        l = l.clamp(0.0, 1.0);
        if l > 0.0 {
            s -= l * l.log2();
        }
    }
    Ok(s.max(0.0))
}

/// Residual tangle from the Cayley hyperdeterminant of the amplitude tensor.
pub fn three_tangle(psi: &PureState3) -> f64 {
    let a = |x: usize, y: usize, z: usize| psi.amps[4 * x + 2 * y + z];
    let sq = |c: Amplitude| c * c;
    let d1 = sq(a(0, 0, 0)) * sq(a(1, 1, 1))
        + sq(a(0, 0, 1)) * sq(a(1, 1, 0))
        + sq(a(0, 1, 0)) * sq(a(1, 0, 1))
        + sq(a(1, 0, 0)) * sq(a(0, 1, 1));
    let d2 = a(0, 0, 0) * a(1, 1, 1) * a(0, 1, 1) * a(1, 0, 0)
        + a(0, 0, 0) * a(1, 1, 1) * a(1, 0, 1) * a(0, 1, 0)
        + a(0, 0, 0) * a(1, 1, 1) * a(1, 1, 0) * a(0, 0, 1)
        + a(0, 1, 1) * a(1, 0, 0) * a(1, 0, 1) * a(0, 1, 0)
        + a(0, 1, 1) * a(1, 0, 0) * a(1, 1, 0) * a(0, 0, 1)
        + a(1, 0, 1) * a(0, 1, 0) * a(1, 1, 0) * a(0, 0, 1);
    let d3 = a(0, 0, 0) * a(1, 1, 0) * a(1, 0, 1) * a(0, 1, 1) + a(1, 1, 1) * a(0, 0, 1) * a(0, 1, 0) * a(1, 0, 0);
    4.0 * (d1 - 2.0 * d2 + 4.0 * d3).norm()
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EntanglementClass {
    #[serde(rename = "PRODUCT")]
    Product,
    #[serde(rename = "BISEPARABLE_1|35")]
    Biseparable1,
    #[serde(rename = "BISEPARABLE_3|15")]
    Biseparable3,
    #[serde(rename = "BISEPARABLE_5|13")]
    Biseparable5,
    #[serde(rename = "W_CLASS")]
    W,
    #[serde(rename = "GHZ_CLASS")]
    Ghz,
}

impl EntanglementClass {
    pub fn name(self) -> &'static str {
        match self {
            EntanglementClass::Product => "PRODUCT",
            EntanglementClass::Biseparable1 => "BISEPARABLE_1|35",
            EntanglementClass::Biseparable3 => "BISEPARABLE_3|15",
            EntanglementClass::Biseparable5 => "BISEPARABLE_5|13",
            EntanglementClass::W => "W_CLASS",
            EntanglementClass::Ghz => "GHZ_CLASS",
        }
    }
}

impl fmt::Display for EntanglementClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    #[serde(rename = "S1")]
    pub s1: f64,
    #[serde(rename = "S3")]
    pub s3: f64,
    #[serde(rename = "S5")]
    pub s5: f64,
    pub tau: f64,
    pub class: EntanglementClass,
}

pub fn classify(psi: &PureState3) -> EntanglementReport {
    let s = QUBITS.map(|p| entropy_bits(&psi.reduce(p).expect("analysed photon")).expect("reduction of a unit state"));
    let tau = three_tangle(psi);
    let zero: Vec<bool> = s.iter().map(|v| *v < EPS_ENTROPY).collect();
    let class = match (zero[0], zero[1], zero[2]) {
        (false, false, false) if tau > EPS_TANGLE => EntanglementClass::Ghz,
        (false, false, false) => EntanglementClass::W,
        (true, false, false) => EntanglementClass::Biseparable1,
        (false, true, false) => EntanglementClass::Biseparable3,
        (false, false, true) => EntanglementClass::Biseparable5,
        // one pure marginal of a pure three-party state forces a second
        _ => EntanglementClass::Product,
    };
    EntanglementReport { s1: s[0], s3: s[1], s5: s[2], tau, class }
}
