use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{check_finite, OutcomeRow, ScenarioResult};
use crate::components::{
    herald_outcomes, herald_outcomes_mixed, propagate, AomCoupler, Component, DemuxRoute,
    FrequencyDemux, HeraldDetector, HeraldLabel, LossChannel, PolarizingBeamSplitter,
    DEFAULT_AOM_ABSORPTION,
};
use crate::error::{Error, Result};
use crate::fock::{
    concurrence, fidelity, partial_trace, phased_pair, Arm, BinId, Mode, ModeRegistry, Occupation,
    Polarization, PostState, PureState, SubsystemSelector,
};

/// Default doublet splitting, Hz.
pub const DEFAULT_DOUBLET_SPLITTING: f64 = 8.0e8;
/// Default biexciton shift, Hz.
pub const DEFAULT_BIEXCITON_SHIFT: f64 = 1.0e11;
const DEFAULT_OMEGA_1: f64 = 3.3e14;
const RELATION_TOLERANCE: f64 = 1e-9;

/// Efficiency and dark-count probability of one herald detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorSettings {
    pub efficiency: f64,
    pub dark_count_probability: f64,
}

impl Default for DetectorSettings {
    fn default() -> Self {
        DetectorSettings {
            efficiency: 1.0,
            dark_count_probability: 0.0,
        }
    }
}

/// Cascade emission frequencies and the rectifying circuit's settings.
///
/// The dot emits `(|x,ω1; x,ω2⟩ + e^{iν}|y,ω3; y,ω4⟩)/√2` with
/// `ω3 > ω1 > ω2 > ω4`, `ω3 − ω1 = ω2 − ω4 = Δ` and `ω1 − ω2 = ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiexcitonConfig {
    /// Emission frequencies in Hz.
    pub omega_1: f64,
    pub omega_2: f64,
    pub omega_3: f64,
    pub omega_4: f64,
    /// Phase `ν` between the two emission branches.
    pub phase: f64,
    /// AOM interaction angle of the plain FBS.
    pub theta: f64,
    /// Probability `α` that one pass of the heralded shifter moves a photon.
    pub shift_efficiency: f64,
    /// Absorption per AOM pass.
    pub absorption: f64,
    pub detector_u: DetectorSettings,
    pub detector_v: DetectorSettings,
}

impl Default for BiexcitonConfig {
    fn default() -> Self {
        Self::from_splittings(
            DEFAULT_OMEGA_1,
            DEFAULT_DOUBLET_SPLITTING,
            DEFAULT_BIEXCITON_SHIFT,
        )
    }
}

impl BiexcitonConfig {
    /// Builds the four frequencies from `ω1`, the doublet splitting `Δ` and
    /// the biexciton shift `ξ`.
    pub fn from_splittings(omega_1: f64, doublet_splitting: f64, biexciton_shift: f64) -> Self {
        let omega_2 = omega_1 - biexciton_shift;
        BiexcitonConfig {
            omega_1,
            omega_2,
            omega_3: omega_1 + doublet_splitting,
            omega_4: omega_2 - doublet_splitting,
            phase: 0.0,
            theta: FRAC_PI_2,
            shift_efficiency: 0.8,
            absorption: DEFAULT_AOM_ABSORPTION,
            detector_u: DetectorSettings::default(),
            detector_v: DetectorSettings::default(),
        }
    }

    pub fn doublet_splitting(&self) -> f64 {
        self.omega_3 - self.omega_1
    }

    pub fn biexciton_shift(&self) -> f64 {
        self.omega_1 - self.omega_2
    }

    pub fn validate(&self) -> Result<()> {
        let freqs = [self.omega_1, self.omega_2, self.omega_3, self.omega_4];
        if let Some(bad) = freqs.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
            return Err(Error::param(
                "omega",
                format!("frequencies must be positive, got {bad}"),
            ));
        }
        if !(self.omega_3 > self.omega_1
            && self.omega_1 > self.omega_2
            && self.omega_2 > self.omega_4)
        {
            return Err(Error::param(
                "omega",
                format!(
                    "need ω3 > ω1 > ω2 > ω4, got ω1={} ω2={} ω3={} ω4={}",
                    self.omega_1, self.omega_2, self.omega_3, self.omega_4
                ),
            ));
        }
        let delta = self.doublet_splitting();
        let lower = self.omega_2 - self.omega_4;
        if (delta - lower).abs() > RELATION_TOLERANCE * delta {
            return Err(Error::param(
                "omega",
                format!("ω3 − ω1 = {delta} Hz differs from ω2 − ω4 = {lower} Hz"),
            ));
        }
        check_finite("phase", self.phase)?;
        check_finite("theta", self.theta)?;
        if !(0.0..=1.0).contains(&self.shift_efficiency) {
            return Err(Error::param(
                "shift_efficiency",
                format!("{} outside [0, 1]", self.shift_efficiency),
            ));
        }
        if !(0.0..1.0).contains(&self.absorption) {
            return Err(Error::param(
                "absorption",
                format!("{} outside [0, 1)", self.absorption),
            ));
        }
        Ok(())
    }

    fn parameters(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("omega_1_hz".into(), self.omega_1),
            ("omega_2_hz".into(), self.omega_2),
            ("omega_3_hz".into(), self.omega_3),
            ("omega_4_hz".into(), self.omega_4),
            ("doublet_splitting_hz".into(), self.doublet_splitting()),
            ("biexciton_shift_hz".into(), self.biexciton_shift()),
            ("phase".into(), self.phase),
        ])
    }
}

struct Bins {
    w: [BinId; 4],
}

fn base_registry(config: &BiexcitonConfig) -> Result<(ModeRegistry, Bins)> {
    let mut reg = ModeRegistry::new();
    let w = [
        reg.add_bin("w1", config.omega_1)?,
        reg.add_bin("w2", config.omega_2)?,
        reg.add_bin("w3", config.omega_3)?,
        reg.add_bin("w4", config.omega_4)?,
    ];
    for path in ["in", "out"] {
        for &b in &w {
            reg.add_mode(Mode::new(path, b, Polarization::X))?;
            reg.add_mode(Mode::new(path, b, Polarization::Y))?;
        }
    }
    for &b in &w {
        reg.add_mode(Mode::new("X", b, Polarization::X))?;
        reg.add_mode(Mode::new("Y", b, Polarization::Y))?;
    }
    Ok((reg, Bins { w }))
}

fn mode(reg: &ModeRegistry, path: &str, bin: BinId, pol: Polarization) -> Result<usize> {
    reg.require(&Mode::new(path, bin, pol))
}

fn pair(reg: &ModeRegistry, a: usize, b: usize) -> Result<Occupation> {
    Occupation::from_pairs(reg.len(), &[(a, 1), (b, 1)])
}

/// The asymmetric-dot emission, entering on path `in`.
fn emission(reg: &Arc<ModeRegistry>, bins: &Bins, phase: f64) -> Result<PureState> {
    let [w1, w2, w3, w4] = bins.w;
    let xx = pair(
        reg,
        mode(reg, "in", w1, Polarization::X)?,
        mode(reg, "in", w2, Polarization::X)?,
    )?;
    let yy = pair(
        reg,
        mode(reg, "in", w3, Polarization::Y)?,
        mode(reg, "in", w4, Polarization::Y)?,
    )?;
    PureState::from_terms(
        Arc::clone(reg),
        [
            (xx, Complex64::new(FRAC_1_SQRT_2, 0.0)),
            (yy, Complex64::from_polar(FRAC_1_SQRT_2, phase)),
        ],
    )
}

fn split() -> Component {
    Component::Pbs(PolarizingBeamSplitter {
        input: "in".into(),
        transmit: "X".into(),
        reflect: "Y".into(),
    })
}

fn recombine() -> Component {
    Component::Pbs(PolarizingBeamSplitter {
        input: "out".into(),
        transmit: "X".into(),
        reflect: "Y".into(),
    })
}

/// One photon of each pair, read out on path `out` with its frequency traced.
fn output_selector(bins: &Bins) -> SubsystemSelector {
    let [w1, w2, w3, w4] = bins.w;
    let first = Arm {
        paths: ["out".to_string()].into(),
        bins: [w1, w3].into(),
    };
    let second = Arm {
        paths: ["out".to_string()].into(),
        bins: [w2, w4].into(),
    };
    SubsystemSelector::polarization_pair(first, second)
}

fn target_label(phase: f64) -> String {
    format!("(|xx⟩ + e^(i·{phase:.6})|yy⟩)/√2")
}

/// Mach-Zehnder rectifier: `y` light passes an AOM driven at `Δ` that couples
/// `ω3 ↔ ω1` and `ω4 ↔ ω2`; `x` light bypasses it.
///
/// Reports the polarization state after tracing frequency, its concurrence
/// (`sin²θ`) and its fidelity to `(|xx⟩ + e^{i(ν+π)}|yy⟩)/√2`. Absorption and
/// detector settings do not enter this circuit.
pub fn run_biexciton_fbs(config: &BiexcitonConfig) -> Result<ScenarioResult> {
    config.validate()?;
    let (reg, bins) = base_registry(config)?;
    let [w1, w2, w3, w4] = bins.w;
    let y = Polarization::Y;
    let aom = AomCoupler::new(
        "fbs",
        vec![
            (mode(&reg, "Y", w1, y)?, mode(&reg, "Y", w3, y)?),
            (mode(&reg, "Y", w2, y)?, mode(&reg, "Y", w4, y)?),
        ],
        config.theta,
        config.doublet_splitting(),
    );
    let circuit = vec![split(), Component::Aom(aom), recombine()];
    let reg = Arc::new(reg);
    let output = propagate(&emission(&reg, &bins, config.phase)?, &circuit)?;

    let rho = partial_trace(&output, &output_selector(&bins))?;
    let target_phase = config.phase + PI;
    let c = concurrence(&rho)?;
    let f = fidelity(&rho, &phased_pair(4, 0, 3, target_phase))?;

    let mut result = ScenarioResult::new("biexciton_fbs");
    result.parameters = config.parameters();
    result.parameters.insert("theta".into(), config.theta);
    result.success_probability = output.probability_where(all_on_out(&reg));
    let (y1, y2) = (mode(&reg, "out", w1, y)?, mode(&reg, "out", w2, y)?);
    let rectified = output.probability_where(|o| o.get(y1) == 1 && o.get(y2) == 1);
    result
        .metrics
        .insert("yy_rectified_probability".into(), rectified);
    result
        .metrics
        .insert("conversion_efficiency".into(), config.theta.sin().powi(2));
    result.metrics.insert("purity".into(), rho.purity());
    result.outcomes = bin_breakdown(&output, &reg);
    result.target = Some(target_label(target_phase));
    result.fidelity_to_target = Some(f);
    result.concurrence = Some(c);
    result.conditioned_state = Some(rho);
    result.warnings = circuit.iter().flat_map(Component::warnings).collect();
    Ok(result)
}

/// Probability of each (polarization, bin, bin) combination found on `out`.
fn bin_breakdown(output: &PureState, reg: &ModeRegistry) -> Vec<OutcomeRow> {
    let mut rows: BTreeMap<String, f64> = BTreeMap::new();
    for (occ, amp) in output.terms() {
        let mut parts = Vec::new();
        for m in 0..reg.len() {
            if occ.get(m) > 0 {
                parts.push(reg.label(m));
            }
        }
        *rows.entry(parts.join(" ")).or_default() += amp.norm_sqr();
    }
    rows.into_iter()
        .map(|(k, p)| OutcomeRow::new(k, p))
        .collect()
}

struct PrimeCircuit {
    registry: Arc<ModeRegistry>,
    components: Vec<Component>,
    herald_u: HeraldDetector,
    herald_v: HeraldDetector,
}

fn prime_circuit(config: &BiexcitonConfig) -> Result<(PrimeCircuit, Bins)> {
    let (mut reg, bins) = base_registry(config)?;
    let [w1, w2, w3, w4] = bins.w;
    let y = Polarization::Y;
    for (path, bin) in [("armA", w1), ("armA", w3), ("armB", w2), ("armB", w4)] {
        reg.add_mode(Mode::new(path, bin, y))?;
    }
    let a3 = mode(&reg, "armA", w3, y)?;
    let a1 = mode(&reg, "armA", w1, y)?;
    let b4 = mode(&reg, "armB", w4, y)?;
    let b2 = mode(&reg, "armB", w2, y)?;
    let loss = LossChannel {
        name: "absorption".into(),
        modes: vec![a3, b4],
        transmission: 1.0 - config.absorption,
    };
    loss.register_environment(&mut reg)?;

    let theta_alpha = config.shift_efficiency.sqrt().asin();
    let delta = config.doublet_splitting();
    let to_arms = FrequencyDemux {
        routes: vec![
            DemuxRoute {
                path: "Y".into(),
                bin: w3,
                to: "armA".into(),
            },
            DemuxRoute {
                path: "Y".into(),
                bin: w4,
                to: "armB".into(),
            },
        ],
    };
    let from_arms = FrequencyDemux {
        routes: vec![
            DemuxRoute {
                path: "armA".into(),
                bin: w1,
                to: "Y".into(),
            },
            DemuxRoute {
                path: "armB".into(),
                bin: w2,
                to: "Y".into(),
            },
        ],
    };
    let components = vec![
        split(),
        Component::Demux(to_arms),
        Component::Loss(loss),
        Component::Aom(AomCoupler::new("aomA", vec![(a3, a1)], theta_alpha, delta)),
        Component::Aom(AomCoupler::new("aomB", vec![(b4, b2)], theta_alpha, delta)),
        Component::Demux(from_arms),
        recombine(),
    ];
    let herald = |name: &str, m: usize, s: DetectorSettings| HeraldDetector {
        name: name.into(),
        modes: vec![m],
        efficiency: s.efficiency,
        dark_count_probability: s.dark_count_probability,
    };
    Ok((
        PrimeCircuit {
            registry: Arc::new(reg),
            components,
            herald_u: herald("U", a3, config.detector_u),
            herald_v: herald("V", b4, config.detector_v),
        },
        bins,
    ))
}

fn all_on_out(reg: &ModeRegistry) -> impl Fn(&Occupation) -> bool + '_ {
    move |o: &Occupation| {
        o.total() == 2
            && (0..reg.len())
                .all(|m| o.get(m) == 0 || reg.mode(m).is_some_and(|md| md.path == "out"))
    }
}

/// Heralded rectifier: each `y` photon gets its own shifter pass and any
/// unshifted light is sent to detector U (`ω3` arm) or V (`ω4` arm).
///
/// `success_probability` is the heralded-success probability of the device on
/// the `y` photon pair: no click at either detector and both photons
/// delivered, `α²(1−a)²` for ideal detectors. The outcome table splits the
/// same pair over click patterns plus a "lost without click" row.
///
/// `conditioned_state` is the output polarization state when the device
/// succeeds: the `x` branch as propagated and the delivered `y` branch with
/// the device success amplitude divided out. Post-selecting the whole
/// two-branch state on no click is unbalanced, because the `x` branch never
/// meets the detectors; its probability and concurrence are reported in
/// `metrics` as `postselected_*`.
pub fn run_biexciton_fbs_prime(config: &BiexcitonConfig) -> Result<ScenarioResult> {
    config.validate()?;
    let (circuit, bins) = prime_circuit(config)?;
    let reg = &circuit.registry;
    let [_, _, w3, w4] = bins.w;
    let y = Polarization::Y;
    let delivered = all_on_out(reg);

    // device level: the y photon pair alone
    let y_pair = PureState::basis(
        Arc::clone(reg),
        pair(reg, mode(reg, "in", w3, y)?, mode(reg, "in", w4, y)?)?,
    )?;
    let out = propagate(&y_pair, &circuit.components)?;
    let mut rows = Vec::new();
    let mut success = 0.0;
    let mut lost_silent = 0.0;
    for u in herald_outcomes(&out, &circuit.herald_u)? {
        let Some(after_u) = &u.post_state else {
            rows.push(OutcomeRow::new(format!("U {}", label(u.label)), 0.0));
            continue;
        };
        for v in herald_outcomes_mixed(after_u, &circuit.herald_v)? {
            let p = u.probability * v.probability;
            if u.label == HeraldLabel::NoClick && v.label == HeraldLabel::NoClick {
                let ok = v
                    .post_state
                    .as_ref()
                    .map_or(0.0, |s| s.probability_where(&delivered));
                success = p * ok;
                lost_silent = p * (1.0 - ok);
            } else {
                rows.push(OutcomeRow::new(
                    format!("U {}, V {}", label(u.label), label(v.label)),
                    p,
                ));
            }
        }
    }

    // full emission through the same circuit
    let full = propagate(&emission(reg, &bins, config.phase)?, &circuit.components)?;
    let selector = output_selector(&bins);
    let mut result = ScenarioResult::new("biexciton_fbs_prime");
    result.parameters = config.parameters();
    result
        .parameters
        .insert("shift_efficiency".into(), config.shift_efficiency);
    result
        .parameters
        .insert("absorption".into(), config.absorption);

    let target_phase = config.phase + PI;
    let mut success_row = OutcomeRow::new("success (no click, both delivered)", success);
    if success > 0.0 {
        let gain = success.sqrt();
        let is_y = |o: &Occupation| {
            (0..reg.len())
                .any(|m| o.get(m) > 0 && reg.mode(m).is_some_and(|md| md.polarization == y))
        };
        let terms: Vec<(Occupation, Complex64)> = full
            .terms()
            .filter(|(o, _)| delivered(o))
            .map(|(o, a)| (o.clone(), if is_y(o) { a / gain } else { *a }))
            .collect();
        let rectified = PureState::from_terms(Arc::clone(reg), terms)?;
        let rho = partial_trace(&rectified, &selector)?;
        let c = concurrence(&rho)?;
        let f = fidelity(&rho, &phased_pair(4, 0, 3, target_phase))?;
        success_row.concurrence = Some(c);
        success_row.fidelity = Some(f);
        result.concurrence = Some(c);
        result.fidelity_to_target = Some(f);
        result.conditioned_state = Some(rho);
    }
    rows.push(success_row);
    rows.push(OutcomeRow::new("lost without click", lost_silent));

    // whole-state post-selection, for comparison
    let (post_p, post_c) = postselect_full(&full, &circuit, &delivered, &selector)?;
    result
        .metrics
        .insert("postselected_probability".into(), post_p);
    if let Some(c) = post_c {
        result.metrics.insert("postselected_concurrence".into(), c);
    }

    let alpha = config.shift_efficiency;
    let bound = 0.95f64.powi(2) * alpha * alpha;
    result.metrics.insert(
        "ideal_success".into(),
        (alpha * (1.0 - config.absorption)).powi(2),
    );
    result.metrics.insert("lower_bound".into(), bound);
    result.metrics.insert(
        "lower_bound_holds".into(),
        f64::from(u8::from(success >= bound)),
    );
    result.success_probability = success;
    result.target = Some(target_label(target_phase));
    result.outcomes = rows;
    result.warnings = circuit
        .components
        .iter()
        .flat_map(Component::warnings)
        .collect();
    if config.absorption > 0.05 {
        result.warnings.push(format!(
            "absorption {} exceeds 0.05; the 0.95²α² bound is not expected to hold",
            config.absorption
        ));
    }
    Ok(result)
}

fn label(l: HeraldLabel) -> &'static str {
    match l {
        HeraldLabel::Click => "click",
        HeraldLabel::NoClick => "no click",
    }
}

/// No click at U and V and both photons on `out`, applied to the full
/// two-branch state.
fn postselect_full(
    full: &PureState,
    circuit: &PrimeCircuit,
    delivered: &impl Fn(&Occupation) -> bool,
    selector: &SubsystemSelector,
) -> Result<(f64, Option<f64>)> {
    let [_, u] = herald_outcomes(full, &circuit.herald_u)?;
    let Some(after_u) = u.post_state else {
        return Ok((0.0, None));
    };
    let [_, v] = herald_outcomes_mixed(&after_u, &circuit.herald_v)?;
    let Some(after_v) = v.post_state else {
        return Ok((0.0, None));
    };
    let mut parts = Vec::new();
    for (w, s) in after_v.components() {
        let (p, kept) = s.project(delivered);
        if let Some(kept) = kept {
            parts.push((w * p, kept));
        }
    }
    let kept: f64 = parts.iter().map(|(w, _)| w).sum();
    let p = u.probability * v.probability * kept;
    if kept <= 0.0 {
        return Ok((p, None));
    }
    let state = PostState::from_weighted(parts)?;
    let (_, rho) = crate::fock::partial_trace_postselected(&state, selector, false)?;
    Ok((p, Some(concurrence(&rho)?)))
}
