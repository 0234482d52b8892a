use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use super::circuit::{Circuit, Step};
use super::document::{CircuitDocument, Postselect};
use crate::components::{
    compile_component, herald_outcomes_mixed, Compiled, Component, HeraldLabel, HeraldOutcome,
};
use crate::error::{Error, Result};
use crate::fock::{
    apply_mode_unitary, concurrence, condition_on_detection, fidelity, partial_trace_postselected,
    ClickPattern, DensityMatrix, ModeRegistry, ModeUnitary, PostState, PureState,
};

#[derive(Debug, Clone, Serialize)]
pub struct HeraldReport {
    pub component: usize,
    pub name: String,
    pub click: f64,
    pub no_click: f64,
    pub postselect: Postselect,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutcomeReport {
    pub pattern: String,
    pub probability: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DetectionReport {
    pub label: String,
    pub frequency_blind: bool,
    pub outcomes: Vec<OutcomeReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TermReport {
    pub occupation: BTreeMap<String, u8>,
    pub amplitude: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct StateComponent {
    pub weight: f64,
    pub terms: Vec<TermReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubsystemOutcome {
    pub pattern: String,
    pub probability: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub concurrence: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    pub density_matrix: DensityMatrix,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubsystemReport {
    /// Weight of the terms the factors could classify.
    pub kept_probability: f64,
    pub density_matrix: DensityMatrix,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub concurrence: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub per_outcome: Vec<SubsystemOutcome>,
}

/// Everything a run produced. Field order is fixed and maps are sorted, so
/// equal inputs give byte-identical JSON apart from `elapsed_seconds`.
#[derive(Debug, Clone, Serialize)]
pub struct ResultDocument {
    pub tool: String,
    pub version: String,
    pub document: CircuitDocument,
    pub modes: Vec<String>,
    pub warnings: Vec<String>,
    /// Probability of the herald outcomes that were kept.
    pub success_probability: f64,
    pub heralds: Vec<HeraldReport>,
    pub detections: Vec<DetectionReport>,
    pub metrics: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<Vec<StateComponent>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<BTreeMap<String, f64>>,
    /// Product of the non-herald components, `[re, im]` entries, row major.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unitary: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subsystem: Option<SubsystemReport>,
    pub elapsed_seconds: f64,
}

impl ResultDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("results serialize")
    }

    /// JSON without the wall-clock field, for comparing runs.
    pub fn comparable_json(&self) -> String {
        let mut copy = self.clone();
        copy.elapsed_seconds = 0.0;
        copy.to_json()
    }
}

fn in_step(index: usize, step: &Step) -> impl FnOnce(Error) -> Error + '_ {
    move |e| Error::Component {
        index,
        kind: step.component.kind().to_string(),
        source: Box::new(e),
    }
}

fn map_components(
    state: &PostState,
    f: impl Fn(&PureState) -> Result<PureState>,
) -> Result<PostState> {
    let parts = state
        .components()
        .into_iter()
        .map(|(w, s)| Ok((w, f(s)?)))
        .collect::<Result<Vec<_>>>()?;
    PostState::from_weighted(parts)
}

/// Product of every unitary component, heralds skipped.
pub fn compiled_unitary(circuit: &Circuit) -> Result<ModeUnitary> {
    let mut total = ModeUnitary::identity(circuit.registry.len());
    for (i, step) in circuit.steps.iter().enumerate() {
        if let Compiled::Unitary(u) =
            compile_component(&step.component, &circuit.registry).map_err(in_step(i, step))?
        {
            total = total.then(&u)?;
        }
    }
    Ok(total)
}

enum Kept {
    One(HeraldOutcome),
    Both([HeraldOutcome; 2]),
}

/// Evolves the initial state through the circuit, applying herald policies.
/// Returns the final state and the kept probability.
pub fn evolve(circuit: &Circuit, heralds: &mut Vec<HeraldReport>) -> Result<(PostState, f64)> {
    let mut state = PostState::Pure(circuit.initial.clone());
    let mut kept = 1.0;
    for (i, step) in circuit.steps.iter().enumerate() {
        match compile_component(&step.component, &circuit.registry).map_err(in_step(i, step))? {
            Compiled::Unitary(u) => {
                state = map_components(&state, |s| apply_mode_unitary(s, &u))
                    .map_err(in_step(i, step))?;
            }
            Compiled::Detection(det) => {
                let [click, silent] =
                    herald_outcomes_mixed(&state, &det).map_err(in_step(i, step))?;
                let policy = step.postselect.unwrap_or_default();
                heralds.push(HeraldReport {
                    component: i,
                    name: det.name.clone(),
                    click: click.probability,
                    no_click: silent.probability,
                    postselect: policy,
                });
                let chosen = match policy {
                    Postselect::Click => Kept::One(click),
                    Postselect::NoClick => Kept::One(silent),
                    Postselect::None => Kept::Both([click, silent]),
                };
                state = match chosen {
                    Kept::One(out) => {
                        kept *= out.probability;
                        out.post_state.ok_or_else(|| {
                            in_step(i, step)(Error::InvalidComponent(format!(
                                "{}: the postselected outcome ({}) has zero probability",
                                det.name,
                                if out.label == HeraldLabel::Click {
                                    "click"
                                } else {
                                    "no click"
                                }
                            )))
                        })?
                    }
                    Kept::Both(both) => {
                        let mut parts = Vec::new();
                        for out in both {
                            if let Some(post) = out.post_state {
                                for (w, s) in post.components() {
                                    parts.push((out.probability * w, s.clone()));
                                }
                            }
                        }
                        PostState::from_weighted(parts).map_err(in_step(i, step))?
                    }
                };
            }
        }
    }
    Ok((state, kept))
}

/// Outcomes of one detection on a possibly mixed state, merged by pattern.
pub fn detect(
    state: &PostState,
    modes: &[usize],
    frequency_blind: bool,
) -> Result<Vec<(ClickPattern, f64, PostState)>> {
    let mut merged: BTreeMap<ClickPattern, Vec<(f64, PureState)>> = BTreeMap::new();
    for (w, s) in state.components() {
        for outcome in condition_on_detection(s, modes, frequency_blind)? {
            let bucket = merged.entry(outcome.pattern).or_default();
            for (pw, ps) in outcome.post_state.components() {
                bucket.push((w * outcome.probability * pw, ps.clone()));
            }
        }
    }
    merged
        .into_iter()
        .map(|(pattern, parts)| {
            let p = parts.iter().map(|(w, _)| w).sum();
            Ok((pattern, p, PostState::from_weighted(parts)?))
        })
        .collect()
}

fn state_dump(state: &PostState, registry: &ModeRegistry) -> Vec<StateComponent> {
    state
        .components()
        .into_iter()
        .map(|(weight, s)| StateComponent {
            weight,
            terms: s
                .terms()
                .map(|(occ, a)| TermReport {
                    occupation: (0..registry.len())
                        .filter(|&m| occ.get(m) > 0)
                        .map(|m| (registry.label(m), occ.get(m)))
                        .collect(),
                    amplitude: [a.re, a.im],
                })
                .collect(),
        })
        .collect()
}

fn probability_table(state: &PostState, registry: &ModeRegistry) -> BTreeMap<String, f64> {
    let mut table = BTreeMap::new();
    for (w, s) in state.components() {
        for (occ, a) in s.terms() {
            *table.entry(occ.describe(registry)).or_insert(0.0) += w * a.norm_sqr();
        }
    }
    table
}

fn measures(
    circuit: &Circuit,
    rho: &DensityMatrix,
    want_concurrence: bool,
) -> Result<(Option<f64>, Option<f64>)> {
    let c = if want_concurrence {
        Some(concurrence(rho)?)
    } else {
        None
    };
    let f = match &circuit.fidelity_target {
        Some(t) => Some(fidelity(rho, t)?),
        None => None,
    };
    Ok((c, f))
}

/// Runs a document and collects the requested outputs.
pub fn run_document(doc: &CircuitDocument) -> Result<ResultDocument> {
    let start = Instant::now();
    let circuit = Circuit::build(doc)?;
    let registry = &circuit.registry;
    let mut heralds = Vec::new();
    let (state, kept) = evolve(&circuit, &mut heralds)?;
    let mut metrics = BTreeMap::new();
    metrics.insert("success_probability".to_string(), kept);

    let mut detections = Vec::new();
    let mut detected = Vec::new();
    for d in &circuit.detections {
        let outcomes = detect(&state, &d.modes, d.frequency_blind)?;
        let total: f64 = outcomes.iter().map(|(_, p, _)| p).sum();
        metrics.insert(format!("detection.{}.total", d.label), total);
        detections.push(DetectionReport {
            label: d.label.clone(),
            frequency_blind: d.frequency_blind,
            outcomes: outcomes
                .iter()
                .map(|(pattern, p, _)| OutcomeReport {
                    pattern: pattern.describe(registry),
                    probability: *p,
                })
                .collect(),
        });
        detected.push(outcomes);
    }

    for (label, groups) in &circuit.coincidences {
        let p = state.probability_where(|o| groups.iter().all(|g| g.iter().any(|&m| o.get(m) > 0)));
        metrics.insert(format!("coincidence.{label}"), p);
        metrics.insert(format!("coincidence.{label}.joint"), p * kept);
    }

    let subsystem = match &circuit.subsystem {
        Some(req) => {
            let (kept_probability, rho) =
                partial_trace_postselected(&state, &req.selector, req.postselect)?;
            let (c, f) = measures(&circuit, &rho, doc.outputs.concurrence)?;
            metrics.insert("subsystem.kept_probability".into(), kept_probability);
            metrics.insert("purity".into(), rho.purity());
            if let Some(c) = c {
                metrics.insert("concurrence".into(), c);
            }
            if let Some(f) = f {
                metrics.insert("fidelity".into(), f);
            }
            let mut per_outcome = Vec::new();
            if let Some(di) = req.per_outcome_of {
                for (pattern, p, post) in &detected[di] {
                    if !pattern.is_click() {
                        continue;
                    }
                    let (_, rho) = partial_trace_postselected(post, &req.selector, req.postselect)?;
                    let (c, f) = measures(&circuit, &rho, doc.outputs.concurrence)?;
                    per_outcome.push(SubsystemOutcome {
                        pattern: pattern.describe(registry),
                        probability: *p,
                        concurrence: c,
                        fidelity: f,
                        density_matrix: rho,
                    });
                }
            }
            Some(SubsystemReport {
                kept_probability,
                density_matrix: rho,
                concurrence: c,
                fidelity: f,
                per_outcome,
            })
        }
        None => None,
    };

    let unitary = if doc.outputs.unitary {
        let u = compiled_unitary(&circuit)?;
        let m = u.matrix();
        Some(
            (0..m.nrows())
                .map(|r| {
                    (0..m.ncols())
                        .map(|c| [m[(r, c)].re, m[(r, c)].im])
                        .collect()
                })
                .collect(),
        )
    } else {
        None
    };

    let mut warnings = circuit.warnings.clone();
    if circuit
        .steps
        .iter()
        .any(|s| matches!(s.component, Component::Herald(_)))
        && doc.outputs.unitary
    {
        warnings.push("heralds are not part of the reported unitary".into());
    }

    Ok(ResultDocument {
        tool: "freqbeam".into(),
        version: crate::VERSION.into(),
        document: doc.clone(),
        modes: registry.labels(),
        warnings,
        success_probability: kept,
        heralds,
        detections,
        metrics,
        state: doc.outputs.state.then(|| state_dump(&state, registry)),
        probabilities: doc
            .outputs
            .probabilities
            .then(|| probability_table(&state, registry)),
        unitary,
        subsystem,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}
