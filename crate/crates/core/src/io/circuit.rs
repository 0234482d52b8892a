//! Resolution of a [`CircuitDocument`] against a mode registry.

use std::sync::Arc;

use num_complex::Complex64;

use super::document::{
    parse_mode_ref, CircuitDocument, ComponentSpec, FactorSpec, Postselect, SubsystemSpec,
};
use crate::components::{
    compile_component, AomCoupler, Component, DemuxRoute, FrequencyDemux, HeraldDetector,
    LossChannel, PolarizingBeamSplitter, SpatialBeamSplitter,
};
use crate::error::{Error, Result};
use crate::fock::{
    Arm, BinId, Factor, Mode, ModeRegistry, Occupation, PureState, SubsystemSelector,
    DEFAULT_MAX_PHOTONS,
};

/// One element of the resolved circuit with its herald policy.
#[derive(Debug, Clone)]
pub struct Step {
    pub component: Component,
    /// Set for heralds only.
    pub postselect: Option<Postselect>,
}

#[derive(Debug, Clone)]
pub struct Detection {
    pub label: String,
    pub modes: Vec<usize>,
    pub frequency_blind: bool,
}

#[derive(Debug, Clone)]
pub struct SubsystemRequest {
    pub selector: SubsystemSelector,
    pub postselect: bool,
    /// Index into [`Circuit::detections`].
    pub per_outcome_of: Option<usize>,
}

/// A document with every name resolved to a mode index.
#[derive(Debug, Clone)]
pub struct Circuit {
    pub registry: Arc<ModeRegistry>,
    pub initial: PureState,
    pub steps: Vec<Step>,
    pub detections: Vec<Detection>,
    pub subsystem: Option<SubsystemRequest>,
    pub fidelity_target: Option<Vec<Complex64>>,
    pub coincidences: Vec<(String, Vec<Vec<usize>>)>,
    pub warnings: Vec<String>,
}

fn at(path: impl Into<String>) -> impl FnOnce(Error) -> Error {
    let path = path.into();
    move |e| match e {
        Error::Document { .. } => e,
        other => Error::document(path, other.to_string()),
    }
}

fn bin_id(registry: &ModeRegistry, label: &str) -> Result<BinId> {
    registry
        .bin_by_label(label)
        .map(|b| b.id)
        .ok_or_else(|| Error::InvalidBin(format!("no bin labelled `{label}`")))
}

fn to_mode(registry: &ModeRegistry, text: &str) -> Result<Mode> {
    let r = parse_mode_ref(text)?;
    Ok(match r.bin {
        Some(b) => Mode::new(r.path, bin_id(registry, &b)?, r.polarization),
        None => Mode::marker(r.path),
    })
}

fn resolve(registry: &ModeRegistry, text: &str) -> Result<usize> {
    let mode = to_mode(registry, text)?;
    registry
        .index_of(&mode)
        .ok_or_else(|| Error::UnknownMode(format!("`{text}` is not declared")))
}

fn resolve_all(registry: &ModeRegistry, texts: &[String], path: &str) -> Result<Vec<usize>> {
    texts
        .iter()
        .enumerate()
        .map(|(i, t)| resolve(registry, t).map_err(at(format!("{path}[{i}]"))))
        .collect()
}

fn name_or(name: &Option<String>, kind: &str, index: usize) -> String {
    name.clone().unwrap_or_else(|| format!("{kind}{index}"))
}

impl Circuit {
    pub fn build(doc: &CircuitDocument) -> Result<Circuit> {
        let mut reg = ModeRegistry::new();
        for (i, b) in doc.bins.iter().enumerate() {
            reg.add_bin(b.label.clone(), b.frequency_hz)
                .map_err(at(format!("bins[{i}]")))?;
        }
        for (i, m) in doc.modes.iter().enumerate() {
            let path = format!("modes[{i}]");
            let mode = to_mode(&reg, m).map_err(at(&path))?;
            reg.add_mode(mode).map_err(at(&path))?;
        }

        // loss channels need their environment modes before anything compiles
        let mut components = Vec::with_capacity(doc.components.len());
        for (i, spec) in doc.components.iter().enumerate() {
            let path = format!("components[{i}]");
            let component = Self::component(&reg, spec, i, &path)?;
            if let Component::Loss(l) = &component {
                l.register_environment(&mut reg).map_err(at(&path))?;
            }
            components.push(component);
        }
        let reg = Arc::new(reg);

        let mut steps = Vec::with_capacity(components.len());
        let mut warnings = Vec::new();
        for (i, (component, spec)) in components.into_iter().zip(&doc.components).enumerate() {
            compile_component(&component, &reg).map_err(at(format!("components[{i}]")))?;
            warnings.extend(component.warnings());
            let postselect = match spec {
                ComponentSpec::Herald { postselect, .. } => Some(*postselect),
                _ => None,
            };
            steps.push(Step {
                component,
                postselect,
            });
        }

        let initial = Self::initial_state(doc, &reg, &mut warnings)?;

        let mut detections = Vec::new();
        for (i, d) in doc.detections.iter().enumerate() {
            let path = format!("detections[{i}]");
            if d.modes.is_empty() {
                return Err(Error::document(
                    format!("{path}.modes"),
                    "no modes to watch",
                ));
            }
            if doc.detections[..i].iter().any(|p| p.label == d.label) {
                return Err(Error::document(
                    format!("{path}.label"),
                    format!("duplicate label `{}`", d.label),
                ));
            }
            detections.push(Detection {
                label: d.label.clone(),
                modes: resolve_all(&reg, &d.modes, &format!("{path}.modes"))?,
                frequency_blind: d.frequency_blind,
            });
        }

        let out = &doc.outputs;
        let subsystem = match &out.subsystem {
            Some(s) => Some(Self::subsystem(&reg, s, &detections)?),
            None => None,
        };
        let dim = subsystem.as_ref().map(|s| s.selector.labels(&reg).len());
        if out.concurrence && dim != Some(4) {
            return Err(Error::document(
                "outputs.concurrence",
                "concurrence needs a two-qubit subsystem (two two-level factors)",
            ));
        }
        let fidelity_target = match &out.fidelity_target {
            Some(amps) => {
                let Some(dim) = dim else {
                    return Err(Error::document(
                        "outputs.fidelity_target",
                        "needs outputs.subsystem",
                    ));
                };
                if amps.len() != dim {
                    return Err(Error::document(
                        "outputs.fidelity_target",
                        format!(
                            "{} amplitudes for a {dim}-dimensional subsystem",
                            amps.len()
                        ),
                    ));
                }
                let target: Vec<Complex64> = amps
                    .iter()
                    .map(|[re, im]| Complex64::new(*re, *im))
                    .collect();
                if target.iter().map(|a| a.norm_sqr()).sum::<f64>() <= 0.0 {
                    return Err(Error::document("outputs.fidelity_target", "zero vector"));
                }
                Some(target)
            }
            None => None,
        };
        let mut coincidences = Vec::new();
        for (i, c) in out.coincidences.iter().enumerate() {
            let path = format!("outputs.coincidences[{i}]");
            if c.groups.is_empty() {
                return Err(Error::document(format!("{path}.groups"), "no groups"));
            }
            let groups = c
                .groups
                .iter()
                .enumerate()
                .map(|(g, modes)| resolve_all(&reg, modes, &format!("{path}.groups[{g}]")))
                .collect::<Result<Vec<_>>>()?;
            coincidences.push((c.label.clone(), groups));
        }

        Ok(Circuit {
            registry: reg,
            initial,
            steps,
            detections,
            subsystem,
            fidelity_target,
            coincidences,
            warnings,
        })
    }

    fn component(
        reg: &ModeRegistry,
        spec: &ComponentSpec,
        index: usize,
        path: &str,
    ) -> Result<Component> {
        let name = name_or(&spec_name(spec), spec.kind(), index);
        Ok(match spec {
            ComponentSpec::Aom {
                pairs,
                theta,
                modulation_hz,
                ..
            } => {
                let mut resolved = Vec::with_capacity(pairs.len());
                for (j, [a, b]) in pairs.iter().enumerate() {
                    let p = format!("{path}.pairs[{j}]");
                    resolved.push((
                        resolve(reg, a).map_err(at(&p))?,
                        resolve(reg, b).map_err(at(&p))?,
                    ));
                }
                Component::Aom(AomCoupler::new(name, resolved, *theta, *modulation_hz))
            }
            ComponentSpec::BeamSplitter {
                path_a,
                path_b,
                mixing_angle,
                ..
            } => Component::BeamSplitter(SpatialBeamSplitter {
                path_a: path_a.clone(),
                path_b: path_b.clone(),
                mixing_angle: *mixing_angle,
            }),
            ComponentSpec::Pbs {
                input,
                transmit,
                reflect,
                ..
            } => Component::Pbs(PolarizingBeamSplitter {
                input: input.clone(),
                transmit: transmit.clone(),
                reflect: reflect.clone(),
            }),
            ComponentSpec::Demux { routes, .. } => {
                let mut resolved = Vec::with_capacity(routes.len());
                for (j, r) in routes.iter().enumerate() {
                    resolved.push(DemuxRoute {
                        path: r.path.clone(),
                        bin: bin_id(reg, &r.bin).map_err(at(format!("{path}.routes[{j}].bin")))?,
                        to: r.to.clone(),
                    });
                }
                Component::Demux(FrequencyDemux { routes: resolved })
            }
            ComponentSpec::Loss {
                modes,
                transmission,
                ..
            } => Component::Loss(LossChannel {
                name,
                modes: resolve_all(reg, modes, &format!("{path}.modes"))?,
                transmission: *transmission,
            }),
            ComponentSpec::Herald {
                modes,
                efficiency,
                dark_count_probability,
                ..
            } => Component::Herald(HeraldDetector {
                name,
                modes: resolve_all(reg, modes, &format!("{path}.modes"))?,
                efficiency: *efficiency,
                dark_count_probability: *dark_count_probability,
            }),
        })
    }

    fn initial_state(
        doc: &CircuitDocument,
        reg: &Arc<ModeRegistry>,
        warnings: &mut Vec<String>,
    ) -> Result<PureState> {
        if doc.initial_state.is_empty() {
            return Err(Error::document("initial_state", "no terms"));
        }
        let max_photons = doc.max_photons.unwrap_or(DEFAULT_MAX_PHOTONS);
        let mut terms = Vec::with_capacity(doc.initial_state.len());
        let mut norm = 0.0;
        for (i, t) in doc.initial_state.iter().enumerate() {
            let mut pairs = Vec::new();
            for (label, &n) in &t.occupation {
                let m = resolve(reg, label)
                    .map_err(at(format!("initial_state[{i}].occupation.{label}")))?;
                pairs.push((m, n));
            }
            let occ = Occupation::from_pairs(reg.len(), &pairs)
                .map_err(at(format!("initial_state[{i}]")))?;
            let amp = Complex64::new(t.amplitude[0], t.amplitude[1]);
            if !(amp.re.is_finite() && amp.im.is_finite()) {
                return Err(Error::document(
                    format!("initial_state[{i}].amplitude"),
                    "not finite",
                ));
            }
            norm += amp.norm_sqr();
            terms.push((occ, amp));
        }
        let state = PureState::build(Arc::clone(reg), terms, max_photons, true)
            .map_err(at("initial_state"))?;
        if (norm - 1.0).abs() > 1e-9 {
            warnings.push(format!(
                "initial state had squared norm {norm}; it was normalized"
            ));
        }
        Ok(state)
    }

    fn subsystem(
        reg: &ModeRegistry,
        spec: &SubsystemSpec,
        detections: &[Detection],
    ) -> Result<SubsystemRequest> {
        if spec.factors.is_empty() {
            return Err(Error::document("outputs.subsystem.factors", "no factors"));
        }
        let mut factors = Vec::with_capacity(spec.factors.len());
        for (i, f) in spec.factors.iter().enumerate() {
            let path = format!("outputs.subsystem.factors[{i}]");
            factors.push(match f {
                FactorSpec::Polarization { paths, bins } => {
                    let mut ids = Vec::with_capacity(bins.len());
                    for (j, b) in bins.iter().enumerate() {
                        ids.push(bin_id(reg, b).map_err(at(format!("{path}.bins[{j}]")))?);
                    }
                    Factor::Polarization(Arm {
                        paths: paths.iter().cloned().collect(),
                        bins: ids.into_iter().collect(),
                    })
                }
                FactorSpec::Which { modes } => {
                    if modes.is_empty() {
                        return Err(Error::document(format!("{path}.modes"), "no modes"));
                    }
                    Factor::Which(resolve_all(reg, modes, &format!("{path}.modes"))?)
                }
                FactorSpec::Occupied { mode } => {
                    Factor::Occupied(resolve(reg, mode).map_err(at(format!("{path}.mode")))?)
                }
            });
        }
        let per_outcome_of = match &spec.per_outcome_of {
            Some(label) => Some(
                detections
                    .iter()
                    .position(|d| &d.label == label)
                    .ok_or_else(|| {
                        Error::document(
                            "outputs.subsystem.per_outcome_of",
                            format!("no detection labelled `{label}`"),
                        )
                    })?,
            ),
            None => None,
        };
        Ok(SubsystemRequest {
            selector: SubsystemSelector::new(factors),
            postselect: spec.postselect,
            per_outcome_of,
        })
    }

    /// Components in order, heralds included.
    pub fn components(&self) -> impl Iterator<Item = &Component> {
        self.steps.iter().map(|s| &s.component)
    }
}

fn spec_name(spec: &ComponentSpec) -> Option<String> {
    spec.name().map(str::to_string)
}
