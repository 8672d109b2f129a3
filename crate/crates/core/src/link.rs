//! OOK link over the modal fading channel: received-signal model, threshold
//! detection, and the SISO / diversity bit-error-rate Monte Carlo.
//!
//! Fading is quasi-static: one phase screen (hence one set of channel
//! gains) per block of `bits_per_screen` bits. Every screen owns two random
//! streams derived from `(master_seed, screen index)`, one for the screen and
//! one for bits and noise, so results do not depend on thread count and all
//! receiver configurations see the same bits and noise.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::channel::projected_gain;
use crate::error::{Error, Result};
use crate::field::{normalize, ComplexField2D, GridSpec};
use crate::modes::ModeSpec;
use crate::turbulence::{derive_seed, PhaseScreen, ScreenGenerator, Stream, TurbulenceParams};

pub const DEFAULT_THRESHOLD_FRACTION: f64 = 0.5;
pub const DEFAULT_NOISE_SIGMA: f64 = 0.2;
pub const DEFAULT_BITS_PER_SCREEN: u64 = 10_000;
pub const DEFAULT_SCREENS: usize = 256;

/// How arm contributions add on the photodiode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Combining {
    /// `Σ g_i |h_i|²`: mutually incoherent transmitters.
    #[default]
    Incoherent,
    /// `|Σ sqrt(g_i) h_i|²`: arms interfere on the detector.
    Coherent,
}

/// Detection hologram used in the diversity configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiversityDetection {
    /// Each arm is projected onto its own launch mode.
    #[default]
    MatchedPerArm,
    /// One hologram matched to the normalised sum of all launch modes.
    Superposition,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arm {
    pub mode: ModeSpec,
    /// Transmitted intensity weight `g_i`.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub arms: Vec<Arm>,
    /// Receiver sensitivity `r`.
    pub receiver_sensitivity: f64,
    /// AWGN standard deviation, in received-power units.
    pub noise_sigma: f64,
    /// Decision threshold as a fraction of the unfaded 1-level.
    pub threshold_fraction: f64,
    pub bits_per_screen: u64,
    pub n_screens: usize,
    pub master_seed: u64,
    pub turbulence: TurbulenceParams,
    pub combining: Combining,
    pub detection: DiversityDetection,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl LinkConfig {
    /// Equal-intensity arms (`g_i = 1/k`) with the default receiver.
    pub fn equal_split(modes: &[ModeSpec], turbulence: TurbulenceParams) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidParameter("a link needs at least one arm".into()));
        }
        let weight = 1.0 / modes.len() as f64;
        let config = Self {
            arms: modes.iter().map(|&mode| Arm { mode, weight }).collect(),
            receiver_sensitivity: 1.0,
            noise_sigma: DEFAULT_NOISE_SIGMA,
            threshold_fraction: DEFAULT_THRESHOLD_FRACTION,
            bits_per_screen: DEFAULT_BITS_PER_SCREEN,
            n_screens: DEFAULT_SCREENS,
            master_seed: 0,
            turbulence,
            combining: Combining::Incoherent,
            detection: DiversityDetection::MatchedPerArm,
            threads: None,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.arms.is_empty() {
            return Err(Error::InvalidParameter("a link needs at least one arm".into()));
        }
        if self.arms.iter().any(|a| !(a.weight >= 0.0)) {
            return Err(Error::InvalidParameter("arm weights must be non-negative".into()));
        }
        let total: f64 = self.arms.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "arm weights must sum to 1, got {total}"
            )));
        }
        if !(self.receiver_sensitivity > 0.0 && self.receiver_sensitivity.is_finite()) {
            return Err(Error::InvalidParameter("receiver sensitivity must be positive".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidParameter("noise sigma must be non-negative".into()));
        }
        if !(self.threshold_fraction > 0.0 && self.threshold_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "threshold fraction must lie in (0, 1), got {}",
                self.threshold_fraction
            )));
        }
        if self.bits_per_screen == 0 || self.n_screens == 0 {
            return Err(Error::InvalidParameter("bits and screens must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidParameter("thread count must be positive".into()));
        }
        self.turbulence.validate()
    }

    /// Single-arm link carrying the full transmit intensity on arm `index`.
    pub fn siso(&self, index: usize) -> Result<LinkConfig> {
        let arm = self.arms.get(index).ok_or_else(|| {
            Error::InvalidParameter(format!("arm {index} out of range ({} arms)", self.arms.len()))
        })?;
        Ok(LinkConfig {
            arms: vec![Arm {
                mode: arm.mode,
                weight: 1.0,
            }],
            ..self.clone()
        })
    }

    /// Noise-free detected power for `symbol` given per-arm gains, plus
    /// `noise_sample`.
    pub fn received_power(&self, symbol: u8, gains: &[Complex64], noise_sample: f64) -> Result<f64> {
        if gains.len() != self.arms.len() {
            return Err(Error::LengthMismatch {
                expected: self.arms.len(),
                got: gains.len(),
            });
        }
        let weights: Vec<f64> = self.arms.iter().map(|a| a.weight).collect();
        Ok(received_power(
            symbol,
            gains,
            &weights,
            self.receiver_sensitivity,
            self.combining,
            noise_sample,
        ))
    }

    /// Received 1-level without turbulence, under this receiver model.
    pub fn reference_power(&self) -> Result<f64> {
        let prepared = PreparedLink::new(self)?;
        Ok(prepared.reference_power)
    }

    pub fn detection_threshold(&self) -> Result<f64> {
        Ok(self.threshold_fraction * self.reference_power()?)
    }

    /// `y ≥ γ·P_ref`.
    pub fn detect(&self, y: f64) -> Result<u8> {
        Ok(detect(y, self.detection_threshold()?))
    }

    fn run_in_pool<T: Send>(&self, job: impl FnOnce() -> T + Send) -> Result<T> {
        match self.threads {
            None => Ok(job()),
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::ThreadPool(e.to_string()))?;
                Ok(pool.install(job))
            }
        }
    }
}

/// OOK-NRZ at one sample per bit: the symbol is the bit.
pub fn modulate_ook(bits: &[bool]) -> Vec<u8> {
    bits.iter().map(|&b| u8::from(b)).collect()
}

/// `y = r · P(gains) · symbol + noise`, with `P = Σ g_i |h_i|²` for
/// incoherent arms or `|Σ sqrt(g_i) h_i|²` for coherent ones.
pub fn received_power(
    symbol: u8,
    gains: &[Complex64],
    weights: &[f64],
    receiver_sensitivity: f64,
    combining: Combining,
    noise_sample: f64,
) -> f64 {
    let signal = match combining {
        Combining::Incoherent => gains
            .iter()
            .zip(weights)
            .map(|(h, g)| g * h.norm_sqr())
            .sum::<f64>(),
        Combining::Coherent => gains
            .iter()
            .zip(weights)
            .map(|(h, g)| h * g.sqrt())
            .sum::<Complex64>()
            .norm_sqr(),
    };
    receiver_sensitivity * signal * f64::from(symbol) + noise_sample
}

pub fn detect(y: f64, threshold: f64) -> u8 {
    u8::from(y >= threshold)
}

/// Which receiver a BER estimate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeSelection {
    /// Arm `i` alone at full intensity.
    Siso(usize),
    /// All arms at their configured weights.
    Diversity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerEstimate {
    pub ber: f64,
    /// Larger of the per-screen (clustered) standard error and the binomial
    /// one. Bits within a screen share one fade, so the clustered value
    /// usually dominates.
    pub std_error: f64,
    pub errors: u64,
    pub bits: u64,
    pub screens: usize,
}

impl BerEstimate {
    /// Binomial standard error `sqrt(p(1-p)/bits)`.
    pub fn binomial_std_error(&self) -> f64 {
        (self.ber * (1.0 - self.ber) / self.bits as f64).sqrt()
    }

    /// Smallest BER distinguishable from zero at this sample size.
    pub fn resolution(&self) -> f64 {
        1.0 / self.bits as f64
    }
}

/// BER of every SISO arm and of the diversity receiver at one r0.
#[derive(Debug, Clone, PartialEq)]
pub struct BerResult {
    pub r0: f64,
    pub per_arm: Vec<BerEstimate>,
    pub diversity: BerEstimate,
    pub bits_tested: u64,
    pub screens_used: usize,
}

impl BerResult {
    pub fn ber_per_arm(&self) -> Vec<f64> {
        self.per_arm.iter().map(|e| e.ber).collect()
    }

    pub fn ber_diversity(&self) -> f64 {
        self.diversity.ber
    }
}

/// Mode fields and thresholds resolved once per configuration.
struct PreparedLink {
    arm_fields: Vec<ComplexField2D>,
    diversity_detect: Option<ComplexField2D>,
    reference_power: f64,
}

impl PreparedLink {
    fn new(config: &LinkConfig) -> Result<Self> {
        config.validate()?;
        let grid: GridSpec = config.turbulence.grid;
        let arm_fields = config
            .arms
            .iter()
            .map(|a| a.mode.evaluate(&grid))
            .collect::<Result<Vec<_>>>()?;
        let diversity_detect = match config.detection {
            DiversityDetection::MatchedPerArm => None,
            DiversityDetection::Superposition => {
                let mut sum = ComplexField2D::zeros(grid);
                for f in &arm_fields {
                    sum = sum.add_scaled(Complex64::new(1.0, 0.0), f)?;
                }
                Some(normalize(&sum)?)
            }
        };
        let mut prepared = Self {
            arm_fields,
            diversity_detect,
            reference_power: 0.0,
        };
        let flat = PhaseScreen::flat(grid, 0.0);
        let gains = prepared.diversity_gains(&flat)?;
        prepared.reference_power = config.received_power(1, &gains, 0.0)?;
        if !(prepared.reference_power > 0.0) {
            return Err(Error::InvalidParameter(
                "receiver collects no power without turbulence".into(),
            ));
        }
        Ok(prepared)
    }

    fn matched_gains(&self, screen: &PhaseScreen) -> Result<Vec<Complex64>> {
        self.arm_fields
            .iter()
            .map(|f| projected_gain(f, f, screen))
            .collect()
    }

    fn diversity_gains(&self, screen: &PhaseScreen) -> Result<Vec<Complex64>> {
        match &self.diversity_detect {
            None => self.matched_gains(screen),
            Some(d) => self
                .arm_fields
                .iter()
                .map(|f| projected_gain(d, f, screen))
                .collect(),
        }
    }
}

/// One receiver under test: its noise-free 1-level per screen is computed
/// from the screen gains, then bits and noise are applied.
struct Branch {
    selection: ModeSelection,
    threshold: f64,
}

fn branches(config: &LinkConfig, prepared: &PreparedLink, selections: &[ModeSelection]) -> Result<Vec<Branch>> {
    selections
        .iter()
        .map(|&selection| {
            let reference = match selection {
                ModeSelection::Siso(i) => {
                    let siso = config.siso(i)?;
                    siso.received_power(1, &[Complex64::new(1.0, 0.0)], 0.0)?
                }
                ModeSelection::Diversity => prepared.reference_power,
            };
            Ok(Branch {
                selection,
                threshold: config.threshold_fraction * reference,
            })
        })
        .collect()
}

/// Signal level (noise-free, symbol 1) of each branch for one screen.
fn branch_levels(
    config: &LinkConfig,
    branches: &[Branch],
    matched: &[Complex64],
    diversity: &[Complex64],
) -> Result<Vec<f64>> {
    branches
        .iter()
        .map(|b| match b.selection {
            ModeSelection::Siso(i) => config.siso(i)?.received_power(1, &matched[i..=i], 0.0),
            ModeSelection::Diversity => config.received_power(1, diversity, 0.0),
        })
        .collect()
}

/// Error counts of each branch over one screen's bits.
fn count_errors(config: &LinkConfig, branches: &[Branch], levels: &[f64], screen_index: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.master_seed, Stream::Bits, screen_index));
    let mut errors = vec![0u64; branches.len()];
    for _ in 0..config.bits_per_screen {
        let bit: bool = rng.gen();
        let z: f64 = StandardNormal.sample(&mut rng);
        let noise = config.noise_sigma * z;
        let symbol = f64::from(u8::from(bit));
        for ((b, &level), e) in branches.iter().zip(levels).zip(errors.iter_mut()) {
            let y = level * symbol + noise;
            if detect(y, b.threshold) != u8::from(bit) {
                *e += 1;
            }
        }
    }
    errors
}

fn summarize(config: &LinkConfig, per_screen: &[Vec<u64>], branch: usize) -> BerEstimate {
    let bits_per = config.bits_per_screen;
    let screens = per_screen.len();
    let errors: u64 = per_screen.iter().map(|e| e[branch]).sum();
    let bits = bits_per * screens as u64;
    let ber = errors as f64 / bits as f64;
    let std_error = if screens > 1 {
        let var = per_screen
            .iter()
            .map(|e| {
                let d = e[branch] as f64 / bits_per as f64 - ber;
                d * d
            })
            .sum::<f64>()
            / (screens - 1) as f64;
        (var / screens as f64).sqrt()
    } else {
        (ber * (1.0 - ber) / bits as f64).sqrt()
    };
    BerEstimate {
        ber,
        std_error: std_error.max((ber * (1.0 - ber) / bits as f64).sqrt()),
        errors,
        bits,
        screens,
    }
}

fn run_branches(
    config: &LinkConfig,
    selections: &[ModeSelection],
    gains_for_screen: impl Fn(u64) -> Result<(Vec<Complex64>, Vec<Complex64>)> + Sync,
) -> Result<Vec<BerEstimate>> {
    let prepared = PreparedLink::new(config)?;
    let branches = branches(config, &prepared, selections)?;
    let per_screen: Vec<Vec<u64>> = config.run_in_pool(|| {
        (0..config.n_screens as u64)
            .into_par_iter()
            .map(|s| {
                let (matched, diversity) = gains_for_screen(s)?;
                let levels = branch_levels(config, &branches, &matched, &diversity)?;
                Ok(count_errors(config, &branches, &levels, s))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Ok((0..branches.len()).map(|b| summarize(config, &per_screen, b)).collect())
}

fn simulate(config: &LinkConfig, selections: &[ModeSelection]) -> Result<Vec<BerEstimate>> {
    let prepared = PreparedLink::new(config)?;
    let generator = ScreenGenerator::new(config.turbulence)?;
    run_branches(config, selections, |s| {
        let screen = generator.generate(derive_seed(config.master_seed, Stream::Screen, s));
        let matched = prepared.matched_gains(&screen)?;
        let diversity = match prepared.diversity_detect {
            None => matched.clone(),
            Some(_) => prepared.diversity_gains(&screen)?,
        };
        Ok((matched, diversity))
    })
}

/// BER of one receiver configuration through Kolmogorov screens.
pub fn ber_monte_carlo(config: &LinkConfig, selection: ModeSelection) -> Result<BerEstimate> {
    check_selection(config, selection)?;
    Ok(simulate(config, &[selection])?[0])
}

/// As [`ber_monte_carlo`] but with caller-supplied per-screen arm gains.
/// `gains(s)` returns one complex gain per arm for screen `s`; the same gains
/// feed both the SISO and the diversity receivers.
pub fn ber_monte_carlo_with_gains(
    config: &LinkConfig,
    selection: ModeSelection,
    gains: impl Fn(u64) -> Vec<Complex64> + Sync,
) -> Result<BerEstimate> {
    check_selection(config, selection)?;
    let k = config.arms.len();
    let out = run_branches(config, &[selection], |s| {
        let g = gains(s);
        if g.len() != k {
            return Err(Error::LengthMismatch { expected: k, got: g.len() });
        }
        Ok((g.clone(), g))
    })?;
    Ok(out[0])
}

fn check_selection(config: &LinkConfig, selection: ModeSelection) -> Result<()> {
    if let ModeSelection::Siso(i) = selection {
        if i >= config.arms.len() {
            return Err(Error::InvalidParameter(format!(
                "arm {i} out of range ({} arms)",
                config.arms.len()
            )));
        }
    }
    Ok(())
}

/// Every SISO arm and the diversity receiver at the configured r0, sharing
/// screens, bits, and noise.
pub fn simulate_point(config: &LinkConfig) -> Result<BerResult> {
    let mut selections: Vec<ModeSelection> = (0..config.arms.len()).map(ModeSelection::Siso).collect();
    selections.push(ModeSelection::Diversity);
    let mut estimates = simulate(config, &selections)?;
    let diversity = estimates.pop().expect("diversity branch present");
    Ok(BerResult {
        r0: config.turbulence.r0,
        per_arm: estimates,
        diversity,
        bits_tested: config.bits_per_screen * config.n_screens as u64,
        screens_used: config.n_screens,
    })
}

/// Joint error probability of independent channels: `Π p_i`.
pub fn diversity_error_product(pe: &[f64]) -> Result<f64> {
    pe.iter().try_fold(1.0, |acc, &p| {
        if (0.0..=1.0).contains(&p) {
            Ok(acc * p)
        } else {
            Err(Error::Probability(p))
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutageReport {
    pub trials: u64,
    pub per_arm_rates: Vec<f64>,
    pub joint_error_rate: f64,
    pub predicted: f64,
    /// Binomial standard error of the joint rate at the predicted value.
    pub std_error: f64,
}

/// Drives the equal-gain receiver with synthetic channels whose arms fail
/// independently (gain 0 with probability `p_i`, otherwise 1) and measures
/// how often a transmitted 1 is lost.
///
/// The threshold sits at half of one arm's share, so a bit is lost only when
/// every arm is in outage.
pub fn outage_product_experiment(outage_probabilities: &[f64], trials: u64, seed: u64) -> Result<OutageReport> {
    let predicted = diversity_error_product(outage_probabilities)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let k = outage_probabilities.len();
    if k == 0 {
        return Err(Error::InvalidParameter("need at least one arm".into()));
    }
    let weights = vec![1.0 / k as f64; k];
    let threshold = 0.5 / k as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arm_outages = vec![0u64; k];
    let mut joint = 0u64;
    let mut gains = vec![Complex64::new(0.0, 0.0); k];
    for _ in 0..trials {
        for ((g, &p), count) in gains.iter_mut().zip(outage_probabilities).zip(arm_outages.iter_mut()) {
            let out = rng.gen::<f64>() < p;
            *count += u64::from(out);
            *g = Complex64::new(if out { 0.0 } else { 1.0 }, 0.0);
        }
        let y = received_power(1, &gains, &weights, 1.0, Combining::Incoherent, 0.0);
        if detect(y, threshold) == 0 {
            joint += 1;
        }
    }
    let n = trials as f64;
    Ok(OutageReport {
        trials,
        per_arm_rates: arm_outages.iter().map(|&c| c as f64 / n).collect(),
        joint_error_rate: joint as f64 / n,
        predicted,
        std_error: (predicted * (1.0 - predicted) / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const W0: f64 = 0.626e-3;

    fn grid() -> GridSpec {
        GridSpec::new(64, 10.0 * 2.0 * W0 * 5f64.sqrt()).unwrap()
    }

    fn pair_config(r0: f64) -> LinkConfig {
        let modes = [ModeSpec::hg(2, 2, W0).unwrap(), ModeSpec::lg(2, 1, W0).unwrap()];
        let mut c = LinkConfig::equal_split(&modes, TurbulenceParams::new(r0, grid()).unwrap()).unwrap();
        c.bits_per_screen = 200;
        c.n_screens = 16;
        c
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn ook_is_identity() {
        assert_eq!(modulate_ook(&[true, false, true]), vec![1, 0, 1]);
        assert!(modulate_ook(&[]).is_empty());
        assert_eq!(modulate_ook(&[true; 5]), vec![1; 5]);
    }

    #[test]
    fn received_power_arithmetic() {
        let inc = Combining::Incoherent;
        assert_eq!(received_power(0, &[c(1.0)], &[1.0], 1.0, inc, 0.0), 0.0);
        assert_eq!(received_power(1, &[c(1.0)], &[1.0], 1.0, inc, 0.0), 1.0);
        let y = received_power(1, &[c(0.8f64.sqrt()), c(0.4f64.sqrt())], &[0.5, 0.5], 1.0, inc, 0.0);
        assert!((y - 0.6).abs() < 1e-15);
        let coh = received_power(1, &[c(1.0), c(1.0)], &[0.5, 0.5], 1.0, Combining::Coherent, 0.0);
        assert!((coh - 2.0).abs() < 1e-15);
    }

    #[test]
    fn received_power_length_mismatch() {
        let cfg = pair_config(0.01);
        assert!(matches!(
            cfg.received_power(1, &[c(1.0)], 0.0),
            Err(Error::LengthMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn detection_threshold() {
        let cfg = pair_config(0.01);
        let p_ref = cfg.reference_power().unwrap();
        assert!((p_ref - 1.0).abs() < 1e-6);
        assert_eq!(cfg.detect(p_ref).unwrap(), 1);
        assert_eq!(cfg.detect(0.0).unwrap(), 0);
        assert_eq!(cfg.detect(0.49 * p_ref).unwrap(), 0);
    }

    #[test]
    fn config_validation() {
        let mut cfg = pair_config(0.01);
        cfg.threshold_fraction = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = pair_config(0.01);
        cfg.arms[0].weight = 0.7;
        assert!(cfg.validate().is_err());
        let mut cfg = pair_config(0.01);
        cfg.threads = Some(0);
        assert!(cfg.validate().is_err());
        assert!(pair_config(0.01).siso(2).is_err());
    }

    #[test]
    fn power_fairness() {
        let cfg = pair_config(0.01);
        let div = cfg.reference_power().unwrap();
        for i in 0..2 {
            let siso = cfg.siso(i).unwrap().reference_power().unwrap();
            assert!((siso - div).abs() < 1e-12);
        }
    }

    #[test]
    fn product_arithmetic() {
        assert!((diversity_error_product(&[0.1, 0.2]).unwrap() - 0.02).abs() < 1e-15);
        assert_eq!(diversity_error_product(&[1.0, 0.37]).unwrap(), 0.37);
        assert!(matches!(diversity_error_product(&[0.5, 1.5]), Err(Error::Probability(_))));
        assert!(diversity_error_product(&[-0.1]).is_err());
    }

    #[test]
    fn noiseless_unfaded_link_is_error_free() {
        let mut cfg = pair_config(f64::INFINITY);
        cfg.noise_sigma = 0.0;
        let r = simulate_point(&cfg).unwrap();
        assert!(r.per_arm.iter().all(|e| e.errors == 0));
        assert_eq!(r.diversity.errors, 0);
    }

    #[test]
    fn total_fade_loses_every_one() {
        let mut cfg = pair_config(0.01);
        cfg.noise_sigma = 0.0;
        cfg.bits_per_screen = 1000;
        let est = ber_monte_carlo_with_gains(&cfg, ModeSelection::Diversity, |_| vec![c(0.0); 2]).unwrap();
        let sigma = (0.25 / est.bits as f64).sqrt();
        assert!((est.ber - 0.5).abs() < 3.0 * sigma, "ber {}", est.ber);
    }

    #[test]
    fn selection_matches_joint_simulation() {
        let cfg = pair_config(3e-3);
        let joint = simulate_point(&cfg).unwrap();
        let lg = ber_monte_carlo(&cfg, ModeSelection::Siso(1)).unwrap();
        assert_eq!(lg, joint.per_arm[1]);
        let div = ber_monte_carlo(&cfg, ModeSelection::Diversity).unwrap();
        assert_eq!(div, joint.diversity);
        assert!(ber_monte_carlo(&cfg, ModeSelection::Siso(5)).is_err());
    }
}
