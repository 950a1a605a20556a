//! Deficit reports shared by the radial and inequality checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Where a term of an inequality was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Fem,
    Radial,
    Geometry,
    ClosedForm,
}

/// How the deficit `lhs - rhs` is judged.
///
/// `AtLeast` passes when `deficit >= -tolerance` (the inequality `lhs >= rhs`
/// holds up to discretization error). `StrictlyAbove` passes when
/// `deficit >= tolerance`, i.e. the claimed side wins by a definite margin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    AtLeast,
    StrictlyAbove,
}

/// An auxiliary condition that must hold for the report to pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideCondition {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub holds: bool,
}

/// Outcome of evaluating one inequality instance.
///
/// The claimed inequality is always written as `lhs >= rhs` (or `lhs > rhs`
/// for [`Comparison::StrictlyAbove`]); checks of the form `a <= b` store
/// `lhs = b`, `rhs = a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    name: String,
    lhs: f64,
    rhs: f64,
    deficit: f64,
    tolerance: f64,
    comparison: Comparison,
    pass: bool,
    inputs: BTreeMap<String, f64>,
    term_provenance: BTreeMap<String, Provenance>,
    conditions: Vec<SideCondition>,
    notes: Vec<String>,
}

impl InequalityReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64, comparison: Comparison) -> Self {
        assert!(tolerance > 0.0, "report tolerance must be positive, got {tolerance}");
        let mut report = InequalityReport {
            name: name.into(),
            lhs,
            rhs,
            deficit: lhs - rhs,
            tolerance,
            comparison,
            pass: false,
            inputs: BTreeMap::new(),
            term_provenance: BTreeMap::new(),
            conditions: Vec::new(),
            notes: Vec::new(),
        };
        report.pass = report.evaluate();
        report
    }

    pub fn at_least(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::new(name, lhs, rhs, tolerance, Comparison::AtLeast)
    }

    pub fn strictly_above(name: impl Into<String>, lhs: f64, rhs: f64, margin: f64) -> Self {
        Self::new(name, lhs, rhs, margin, Comparison::StrictlyAbove)
    }

    fn primary_holds(&self) -> bool {
        match self.comparison {
            Comparison::AtLeast => self.deficit >= -self.tolerance,
            Comparison::StrictlyAbove => self.deficit >= self.tolerance,
        }
    }

    fn evaluate(&self) -> bool {
        self.primary_holds() && self.conditions.iter().all(|c| c.holds)
    }

    pub fn with_input(mut self, key: impl Into<String>, value: f64) -> Self {
        self.inputs.insert(key.into(), value);
        self
    }

    pub fn with_term(mut self, term: impl Into<String>, source: Provenance) -> Self {
        self.term_provenance.insert(term.into(), source);
        self
    }

    pub fn with_condition(mut self, name: impl Into<String>, value: f64, limit: f64, holds: bool) -> Self {
        self.conditions.push(SideCondition { name: name.into(), value, limit, holds });
        self.pass = self.evaluate();
        self
    }

    /// Replaces the tolerance (e.g. a user override) and re-evaluates.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        assert!(tolerance > 0.0, "report tolerance must be positive, got {tolerance}");
        self.tolerance = tolerance;
        self.pass = self.evaluate();
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn lhs(&self) -> f64 {
        self.lhs
    }
    pub fn rhs(&self) -> f64 {
        self.rhs
    }
    pub fn deficit(&self) -> f64 {
        self.deficit
    }
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
    pub fn comparison(&self) -> Comparison {
        self.comparison
    }
    pub fn pass(&self) -> bool {
        self.pass
    }
    pub fn inputs(&self) -> &BTreeMap<String, f64> {
        &self.inputs
    }
    pub fn input(&self, key: &str) -> Option<f64> {
        self.inputs.get(key).copied()
    }
    pub fn term_provenance(&self) -> &BTreeMap<String, Provenance> {
        &self.term_provenance
    }
    pub fn conditions(&self) -> &[SideCondition] {
        &self.conditions
    }
    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    /// True when the stored deficit and pass flag agree with lhs, rhs and the
    /// side conditions. Always true for reports built through this API.
    pub fn is_consistent(&self) -> bool {
        self.tolerance > 0.0 && self.deficit == self.lhs - self.rhs && self.pass == self.evaluate()
    }
}
