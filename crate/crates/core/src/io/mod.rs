//! Circuit documents: parsing, execution, sweeps and oracle checks.

mod circuit;
mod document;
mod oracle;
mod run;
mod sweep;

pub use circuit::{Circuit, Detection, Step, SubsystemRequest};
pub use document::{
    parse_circuit, parse_mode_ref, BinSpec, CircuitDocument, CoincidenceSpec, ComponentSpec,
    DetectionSpec, FactorSpec, ModeRef, OutputSpec, Postselect, RouteSpec, SubsystemSpec, TermSpec,
};
pub use oracle::{compare_with_oracle, oracle_report, OracleCheck, OracleReport, ORACLE_TOLERANCE};
pub use run::{
    compiled_unitary, detect, evolve, run_document, DetectionReport, HeraldReport, OutcomeReport,
    ResultDocument, StateComponent, SubsystemOutcome, SubsystemReport, TermReport,
};
pub use sweep::{resolve_parameter, run_sweep, SweepRow, SweepSpec, SweepTable};
