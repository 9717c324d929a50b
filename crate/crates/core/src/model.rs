//! System parameters, channels, beamformers and the link metrics.
//!
//! Units: powers in Watts, energies in Joules per unit-length slot, rates in
//! bits/s/Hz. Decibel conversions happen only at the configuration boundary.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{abs_inner_sq, cvector_from_pairs, cvector_to_pairs, CMatrix, CVector, C64};

/// Transmitter, receiver and target parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Transmit antennas, `M > 1`.
    pub antennas: usize,
    /// Energy receivers, `K >= 1`.
    pub energy_receivers: usize,
    /// Sum-power budget (W).
    pub power: f64,
    /// Noise power at the information receiver (W).
    pub ir_noise: f64,
    /// Noise power at each energy receiver (W).
    pub er_noise: Vec<f64>,
    /// Energy harvesting efficiency in `(0, 1)`.
    pub efficiency: f64,
    /// Non-negative energy weights, one per energy receiver.
    pub weights: Vec<f64>,
    /// Target secrecy rate (bits/s/Hz).
    pub secrecy_target: f64,
}

impl SystemParams {
    /// Four antennas, three energy receivers, 1 W budget, -50 dBm noise
    /// everywhere, 50% harvesting efficiency and unit weights.
    pub fn reference() -> Self {
        let k = 3;
        Self {
            antennas: 4,
            energy_receivers: k,
            power: 1.0,
            ir_noise: 1e-8,
            er_noise: vec![1e-8; k],
            efficiency: 0.5,
            weights: vec![1.0; k],
            secrecy_target: 0.0,
        }
    }

    pub fn with_target(mut self, rate: f64) -> Self {
        self.secrecy_target = rate;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.energy_receivers;
        if self.antennas < 2 {
            return Err(Error::validation(format!(
                "need at least two transmit antennas, got {}",
                self.antennas
            )));
        }
        if k == 0 {
            return Err(Error::validation("need at least one energy receiver"));
        }
        if self.er_noise.len() != k || self.weights.len() != k {
            return Err(Error::validation(format!(
                "expected {k} noise powers and weights, got {} and {}",
                self.er_noise.len(),
                self.weights.len()
            )));
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.power) || !positive(self.ir_noise) || !self.er_noise.iter().all(|&x| positive(x)) {
            return Err(Error::validation("power budget and noise powers must be positive"));
        }
        if !(self.efficiency > 0.0 && self.efficiency < 1.0) {
            return Err(Error::validation(format!(
                "harvesting efficiency must lie in (0,1), got {}",
                self.efficiency
            )));
        }
        if !self.weights.iter().all(|&w| w.is_finite() && w >= 0.0) {
            return Err(Error::validation("energy weights must be finite and non-negative"));
        }
        if !(self.secrecy_target.is_finite() && self.secrecy_target >= 0.0) {
            return Err(Error::validation(format!(
                "secrecy target must be a non-negative number, got {}",
                self.secrecy_target
            )));
        }
        Ok(())
    }

    /// `mu_k * zeta` for every energy receiver.
    pub fn energy_coefficients(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w * self.efficiency).collect()
    }
}

/// Conjugated channel vectors from the transmitter to the information
/// receiver (`h`) and to each energy receiver (`g[k]`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub h: CVector,
    pub g: Vec<CVector>,
}

#[derive(Serialize, Deserialize)]
struct ChannelFile {
    h: Vec<[f64; 2]>,
    g: Vec<Vec<[f64; 2]>>,
}

impl ChannelSet {
    pub fn new(h: CVector, g: Vec<CVector>) -> Result<Self> {
        let ch = Self { h, g };
        ch.check_shape()?;
        Ok(ch)
    }

    fn check_shape(&self) -> Result<()> {
        let m = self.h.len();
        if self.g.is_empty() {
            return Err(Error::validation("channel set has no energy receivers"));
        }
        if let Some((k, _)) = self.g.iter().enumerate().find(|(_, g)| g.len() != m) {
            return Err(Error::validation(format!(
                "energy receiver {k} channel has length {} but h has length {m}",
                self.g[k].len()
            )));
        }
        let finite = |v: &CVector| v.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite(&self.h) || !self.g.iter().all(finite) {
            return Err(Error::validation("channel entries must be finite"));
        }
        Ok(())
    }

    pub fn antennas(&self) -> usize {
        self.h.len()
    }

    pub fn energy_receivers(&self) -> usize {
        self.g.len()
    }

    /// Checks that the channel dimensions match the system parameters.
    pub fn validate_for(&self, params: &SystemParams) -> Result<()> {
        self.check_shape()?;
        if self.antennas() != params.antennas || self.energy_receivers() != params.energy_receivers {
            return Err(Error::validation(format!(
                "channels are {}x{} (M x K) but parameters say {}x{}",
                self.antennas(),
                self.energy_receivers(),
                params.antennas,
                params.energy_receivers
            )));
        }
        Ok(())
    }

    /// `G = [g_1, ..., g_K]^H`, a `K x M` matrix.
    pub fn g_matrix(&self) -> CMatrix {
        let m = self.antennas();
        CMatrix::from_fn(self.g.len(), m, |k, j| self.g[k][j].conj())
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ChannelFile {
            h: cvector_to_pairs(&self.h),
            g: self.g.iter().map(cvector_to_pairs).collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ChannelFile = serde_json::from_str(text)?;
        Self::new(
            cvector_from_pairs(&file.h),
            file.g.iter().map(|row| cvector_from_pairs(row)).collect(),
        )
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Statistics of the Rayleigh-fading channel draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelGenSpec {
    /// Per-entry average power of `h` (linear path gain).
    pub rho_h_sq: f64,
    /// Per-entry average power of each `g_k`; must exceed `rho_h_sq`.
    pub rho_g_sq: Vec<f64>,
    pub seed: u64,
}

impl ChannelGenSpec {
    /// 70 dB attenuation to the information receiver, 30 dB to every energy receiver.
    pub fn reference(energy_receivers: usize, seed: u64) -> Self {
        Self {
            rho_h_sq: 1e-7,
            rho_g_sq: vec![1e-3; energy_receivers],
            seed,
        }
    }

    pub fn validate(&self, params: &SystemParams) -> Result<()> {
        if self.rho_g_sq.len() != params.energy_receivers {
            return Err(Error::validation(format!(
                "expected {} energy-receiver path gains, got {}",
                params.energy_receivers,
                self.rho_g_sq.len()
            )));
        }
        if !(self.rho_h_sq.is_finite() && self.rho_h_sq > 0.0) {
            return Err(Error::validation(format!(
                "information-receiver path gain must be positive, got {}",
                self.rho_h_sq
            )));
        }
        if let Some(bad) = self.rho_g_sq.iter().find(|&&r| !(r.is_finite() && r > self.rho_h_sq)) {
            return Err(Error::validation(format!(
                "energy-receiver path gain {bad} must exceed the information-receiver gain {}",
                self.rho_h_sq
            )));
        }
        Ok(())
    }
}

/// Draws one channel realization. Equivalent to trial 0 of
/// [`generate_channels_for_trial`].
pub fn generate_channels(params: &SystemParams, spec: &ChannelGenSpec) -> Result<ChannelSet> {
    generate_channels_for_trial(params, spec, 0)
}

/// Draws the channels of Monte Carlo trial `trial`.
///
/// Each trial owns the ChaCha20 stream `trial` under key `seed`. Entries are
/// drawn in a fixed order: `h` first, then `g_1 .. g_K`, each vector in index
/// order, real part before imaginary part. Every component is
/// `N(0, rho/2)` so each entry is CSCG with variance `rho`.
pub fn generate_channels_for_trial(
    params: &SystemParams,
    spec: &ChannelGenSpec,
    trial: u64,
) -> Result<ChannelSet> {
    spec.validate(params)?;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    rng.set_stream(trial);
    let m = params.antennas;
    let mut draw = |rho: f64| -> CVector {
        let s = (rho / 2.0).sqrt();
        CVector::from_iterator(
            m,
            (0..m).map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                C64::new(s * re, s * im)
            }),
        )
    };
    let h = draw(spec.rho_h_sq);
    let g = spec.rho_g_sq.iter().map(|&r| draw(r)).collect();
    ChannelSet::new(h, g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeTag {
    Optimal,
    Sub1,
    Sub2,
    Trivial,
}

impl SchemeTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeTag::Optimal => "optimal",
            SchemeTag::Sub1 => "sub1",
            SchemeTag::Sub2 => "sub2",
            SchemeTag::Trivial => "trivial",
        }
    }
}

impl std::fmt::Display for SchemeTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Serde adapters writing complex vectors as `[re, im]` pairs.
pub mod cvector_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::linalg::{cvector_from_pairs, cvector_to_pairs, CVector};

    pub fn serialize<S: Serializer>(v: &CVector, s: S) -> Result<S::Ok, S::Error> {
        cvector_to_pairs(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CVector, D::Error> {
        Ok(cvector_from_pairs(&Vec::<[f64; 2]>::deserialize(d)?))
    }

    pub mod list {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[CVector], s: S) -> Result<S::Ok, S::Error> {
            v.iter().map(cvector_to_pairs).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CVector>, D::Error> {
            Ok(Vec::<Vec<[f64; 2]>>::deserialize(d)?
                .iter()
                .map(|p| cvector_from_pairs(p))
                .collect())
        }
    }
}

/// One information beam plus `d` energy beams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamformingSolution {
    #[serde(with = "cvector_serde")]
    pub v0: CVector,
    #[serde(with = "cvector_serde::list")]
    pub w: Vec<CVector>,
    pub scheme: SchemeTag,
}

impl BeamformingSolution {
    pub fn total_power(&self) -> f64 {
        self.v0.norm_squared() + self.w.iter().map(|w| w.norm_squared()).sum::<f64>()
    }

    pub fn energy_beam_count(&self) -> usize {
        self.w.len()
    }

    /// Checks dimensions, `d <= M`, and the power budget with relative slack `1e-8`.
    pub fn validate_for(&self, params: &SystemParams) -> Result<()> {
        let m = params.antennas;
        if self.v0.len() != m || self.w.iter().any(|w| w.len() != m) {
            return Err(Error::validation("beam length does not match antenna count"));
        }
        if self.w.len() > m {
            return Err(Error::validation(format!(
                "{} energy beams exceed the {m} antennas",
                self.w.len()
            )));
        }
        let p = self.total_power();
        if p > params.power * (1.0 + 1e-8) {
            return Err(Error::validation(format!(
                "beams use {p} W of a {} W budget",
                params.power
            )));
        }
        Ok(())
    }
}

/// Link-level figures of merit of a beamforming solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub sinr_ir: f64,
    pub sinr_er: Vec<f64>,
    /// May be negative; callers decide whether to clamp.
    pub secrecy_rate: f64,
    /// Joules per slot.
    pub energy_per_er: Vec<f64>,
    pub weighted_sum_energy: f64,
}

fn interference(w: &[CVector], ch: &CVector) -> f64 {
    w.iter().map(|wi| abs_inner_sq(wi, ch)).sum()
}

/// SINR at the information receiver and at every energy receiver acting as
/// an eavesdropper.
pub fn compute_sinrs(ch: &ChannelSet, beams: &BeamformingSolution, params: &SystemParams) -> (f64, Vec<f64>) {
    let sinr_ir = abs_inner_sq(&beams.v0, &ch.h) / (interference(&beams.w, &ch.h) + params.ir_noise);
    let sinr_er = ch
        .g
        .iter()
        .zip(&params.er_noise)
        .map(|(g, &noise)| abs_inner_sq(&beams.v0, g) / (interference(&beams.w, g) + noise))
        .collect();
    (sinr_ir, sinr_er)
}

fn secrecy_from_sinrs(sinr_ir: f64, sinr_er: &[f64]) -> f64 {
    let legit = (1.0 + sinr_ir).log2();
    sinr_er
        .iter()
        .map(|&s| legit - (1.0 + s).log2())
        .fold(f64::INFINITY, f64::min)
}

/// Worst-case secrecy rate over all energy receivers, unclamped.
pub fn compute_secrecy_rate(ch: &ChannelSet, beams: &BeamformingSolution, params: &SystemParams) -> f64 {
    let (sinr_ir, sinr_er) = compute_sinrs(ch, beams, params);
    secrecy_from_sinrs(sinr_ir, &sinr_er)
}

/// Harvested energy per energy receiver and its weighted sum.
pub fn compute_energy(ch: &ChannelSet, beams: &BeamformingSolution, params: &SystemParams) -> (Vec<f64>, f64) {
    let per_er: Vec<f64> = ch
        .g
        .iter()
        .map(|g| params.efficiency * (abs_inner_sq(&beams.v0, g) + interference(&beams.w, g)))
        .collect();
    let weighted = per_er.iter().zip(&params.weights).map(|(e, mu)| mu * e).sum();
    (per_er, weighted)
}

pub fn evaluate(ch: &ChannelSet, beams: &BeamformingSolution, params: &SystemParams) -> Metrics {
    let (sinr_ir, sinr_er) = compute_sinrs(ch, beams, params);
    let secrecy_rate = secrecy_from_sinrs(sinr_ir, &sinr_er);
    let (energy_per_er, weighted_sum_energy) = compute_energy(ch, beams, params);
    Metrics {
        sinr_ir,
        sinr_er,
        secrecy_rate,
        energy_per_er,
        weighted_sum_energy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(entries: &[(f64, f64)]) -> CVector {
        CVector::from_iterator(entries.len(), entries.iter().map(|&(r, i)| C64::new(r, i)))
    }

    fn unit_params(m: usize, k: usize) -> SystemParams {
        SystemParams {
            antennas: m,
            energy_receivers: k,
            power: 10.0,
            ir_noise: 1.0,
            er_noise: vec![1.0; k],
            efficiency: 0.5,
            weights: vec![1.0; k],
            secrecy_target: 0.0,
        }
    }

    fn orthogonal() -> ChannelSet {
        ChannelSet::new(cv(&[(1.0, 0.0), (0.0, 0.0)]), vec![cv(&[(0.0, 0.0), (1.0, 0.0)])]).unwrap()
    }

    #[test]
    fn zero_information_beam() {
        let p = unit_params(2, 1);
        let beams = BeamformingSolution {
            v0: CVector::zeros(2),
            w: vec![cv(&[(0.3, 0.1), (0.2, -0.4)])],
            scheme: SchemeTag::Optimal,
        };
        let (s0, sk) = compute_sinrs(&orthogonal(), &beams, &p);
        assert_eq!(s0, 0.0);
        assert_eq!(sk, vec![0.0]);
        assert!(compute_secrecy_rate(&orthogonal(), &beams, &p) <= 0.0);
    }

    #[test]
    fn zero_beams_give_zero_rate_and_energy() {
        let p = unit_params(2, 1);
        let beams = BeamformingSolution { v0: CVector::zeros(2), w: vec![], scheme: SchemeTag::Optimal };
        assert_eq!(compute_secrecy_rate(&orthogonal(), &beams, &p), 0.0);
        let (e, sum) = compute_energy(&orthogonal(), &beams, &p);
        assert_eq!(e, vec![0.0]);
        assert_eq!(sum, 0.0);
    }

    #[test]
    fn orthogonal_sinrs() {
        let p = unit_params(2, 1);
        let beams = BeamformingSolution {
            v0: cv(&[(1.0, 0.0), (0.0, 0.0)]),
            w: vec![cv(&[(0.0, 0.0), (1.0, 0.0)])],
            scheme: SchemeTag::Optimal,
        };
        let (s0, sk) = compute_sinrs(&orthogonal(), &beams, &p);
        assert_eq!(s0, 1.0);
        assert_eq!(sk, vec![0.0]);
    }

    #[test]
    fn orthogonal_secrecy_sign() {
        let p = unit_params(2, 1);
        let mut beams = BeamformingSolution {
            v0: cv(&[(1.0, 0.0), (0.0, 0.0)]),
            w: vec![],
            scheme: SchemeTag::Optimal,
        };
        assert_eq!(compute_secrecy_rate(&orthogonal(), &beams, &p), 1.0);
        beams.v0 = cv(&[(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(compute_secrecy_rate(&orthogonal(), &beams, &p), -1.0);
    }

    #[test]
    fn secrecy_takes_worst_eavesdropper() {
        let p = unit_params(2, 2);
        let ch = ChannelSet::new(
            cv(&[(1.0, 0.0), (0.5, 0.0)]),
            vec![cv(&[(0.1, 0.0), (0.0, 0.0)]), cv(&[(2.0, 0.0), (1.0, 1.0)])],
        )
        .unwrap();
        let beams = BeamformingSolution {
            v0: cv(&[(1.0, 0.5), (0.5, 0.0)]),
            w: vec![cv(&[(0.1, 0.0), (-0.2, 0.3)])],
            scheme: SchemeTag::Optimal,
        };
        let (s0, sk) = compute_sinrs(&ch, &beams, &p);
        let per_k: Vec<f64> = sk.iter().map(|s| (1.0 + s0).log2() - (1.0 + s).log2()).collect();
        assert!(per_k[1] < per_k[0]);
        assert_eq!(compute_secrecy_rate(&ch, &beams, &p), per_k[1]);
    }

    #[test]
    fn energy_direct_evaluation() {
        let p = unit_params(2, 1);
        let ch = ChannelSet::new(cv(&[(0.0, 0.0), (1.0, 0.0)]), vec![cv(&[(1.0, 0.0), (0.0, 0.0)])]).unwrap();
        let beams = BeamformingSolution {
            v0: cv(&[(2f64.sqrt(), 0.0), (0.0, 0.0)]),
            w: vec![],
            scheme: SchemeTag::Optimal,
        };
        let (e, sum) = compute_energy(&ch, &beams, &p);
        assert!((e[0] - 1.0).abs() < 1e-15);
        assert!((sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn generation_is_deterministic_and_validated() {
        let params = SystemParams::reference();
        let spec = ChannelGenSpec::reference(3, 42);
        let a = generate_channels(&params, &spec).unwrap();
        let b = generate_channels(&params, &spec).unwrap();
        assert_eq!(a, b);
        let c = generate_channels_for_trial(&params, &spec, 1).unwrap();
        assert_ne!(a, c);

        let mut bad = spec.clone();
        bad.rho_h_sq = 0.0;
        assert!(generate_channels(&params, &bad).is_err());
        let mut bad = spec.clone();
        bad.rho_g_sq[1] = 1e-8;
        assert!(generate_channels(&params, &bad).is_err());
        let mut bad = spec;
        bad.rho_g_sq.pop();
        assert!(generate_channels(&params, &bad).is_err());
    }

    #[test]
    fn generated_power_matches_statistics() {
        let params = SystemParams::reference();
        let spec = ChannelGenSpec { rho_h_sq: 1e-3, rho_g_sq: vec![1e-2; 3], seed: 99 };
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|t| {
                let ch = generate_channels_for_trial(&params, &spec, t).unwrap();
                ch.h.norm_squared() / params.antennas as f64
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1e-3).abs() < 0.05 * 1e-3, "mean {mean}");
    }

    #[test]
    fn channel_json_round_trip() {
        let params = SystemParams::reference();
        let ch = generate_channels(&params, &ChannelGenSpec::reference(3, 1)).unwrap();
        let back = ChannelSet::from_json(&ch.to_json().unwrap()).unwrap();
        assert_eq!(back, ch);
        let text = r#"{"h": [[1,0],[0,1]], "g": [[[0,0],[1,0]], [[1,1]]]}"#;
        assert!(ChannelSet::from_json(text).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(SystemParams::reference().validate().is_ok());
        let mut p = SystemParams::reference();
        p.antennas = 1;
        assert!(p.validate().is_err());
        let mut p = SystemParams::reference();
        p.efficiency = 1.0;
        assert!(p.validate().is_err());
        let mut p = SystemParams::reference();
        p.weights[0] = -1.0;
        assert!(p.validate().is_err());
        let mut p = SystemParams::reference();
        p.ir_noise = 0.0;
        assert!(p.validate().is_err());
    }
}
