//! Attributed, cardinality-based feature models: DSL, configurations, and the
//! direct validity check.

mod check;
mod config;
mod constraint;
mod model;
mod parse;
mod print;
mod validate;

pub use check::{check_configuration, check_configuration_within, ValidityReport, Violation, ViolationKind};
pub use config::{
    AttrKey, ConfigParseError, Configuration, InstancePath, PathError, PathSyntaxError, ResolvedPath, Segment,
};
pub use constraint::{
    Aggregate, ConstraintKind, CrossConstraint, Declared, Expr, FeatureRef, Ground, GroundAtom, InstanceBounds,
    RefSegment,
};
pub use model::{Attribute, Cardinality, Feature, FeatureId, FeatureModel, GroupKind, Value};
pub use parse::{parse_constraints, parse_fm, ParseError, ParseErrorKind};
pub use validate::{validate_model, Diagnostic, DiagnosticKind};
