//! Machine-readable run report. Field order is fixed by declaration and maps
//! are ordered, so serialisation is canonical.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use specgap::bounds::{AlphaBeta, SearchBox, Target, WeightedGaps};
use specgap::oracle::{
    CorderoCheck, IdentityCheck, InequalityCheck, JohnsenCheck, SecondOrderCheck,
};
use specgap::{BoundResult, SpectrumResult, SymmetryReport};

use crate::config::Command;

/// Bound-versus-oracle excess (and negative inequality slack) tolerated
/// before a violation is flagged.
pub const VIOLATION_TOL: f64 = 2e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub metadata: Metadata,
    pub bounds: Vec<NamedBound>,
    pub alpha_beta: Option<AlphaBeta<f64>>,
    pub weighted_gaps: Option<WeightedGaps<f64>>,
    pub spectrum: Option<SpectrumResult<f64>>,
    pub verification: Option<Verification>,
    pub violations: Vec<Violation>,
    /// Wall-clock milliseconds per command; excluded from determinism checks.
    pub timings_ms: BTreeMap<String, f64>,
}

impl Report {
    /// Copy with timings cleared, for comparing runs.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        r.timings_ms.clear();
        r
    }

    pub fn bound(&self, id: &str) -> Option<&BoundResult<f64>> {
        self.bounds.iter().find(|b| b.id == id).map(|b| &b.result)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool_version: String,
    pub potential: String,
    pub dim: usize,
    pub weight: String,
    pub eps: Option<Vec<f64>>,
    pub search_box: SearchBox<f64>,
    pub grid: Option<GridInfo>,
    pub seed: u64,
    pub commands: Vec<Command>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub radius: f64,
    pub n: usize,
    pub spacing: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedBound {
    pub id: String,
    pub result: BoundResult<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub item: String,
    pub target: Option<Target>,
    pub claimed: f64,
    pub observed: f64,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub intertwining: IntertwiningSummary,
    pub symmetry: SymmetryReport<f64>,
    pub brascamp_lieb: Vec<NamedInequality>,
    pub cordero: Option<CorderoCheck<f64>>,
    pub variance_identity: Vec<NamedIdentity>,
    pub second_order: Vec<NamedSecondOrder>,
    pub schrodinger_spectrum: Option<JohnsenCheck<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntertwiningSummary {
    pub step: f64,
    pub samples: usize,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedInequality {
    pub name: String,
    pub check: InequalityCheck<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedIdentity {
    pub name: String,
    pub check: IdentityCheck<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedSecondOrder {
    pub name: String,
    pub check: SecondOrderCheck<f64>,
}

/// Short human-readable summary.
pub fn summary(report: &Report) -> String {
    let mut out = vec![format!(
        "{} (d = {}), weight {}",
        report.metadata.potential, report.metadata.dim, report.metadata.weight
    )];
    for b in &report.bounds {
        let value = match b.result.value {
            Some(v) => format!("{v:.10}"),
            None => "not applicable".to_string(),
        };
        out.push(format!("  {:<34} {} ≥ {value}", b.id, b.result.target));
    }
    if let Some(s) = &report.spectrum {
        let ev: Vec<String> = s.eigenvalues.iter().map(|v| format!("{v:.6}")).collect();
        out.push(format!("  oracle eigenvalues: {}", ev.join(", ")));
    }
    if let Some(v) = &report.verification {
        out.push(format!(
            "  intertwining max residual: {:.3e}",
            v.intertwining.max_residual
        ));
        for bl in &v.brascamp_lieb {
            out.push(format!("  {:<34} slack {:.3e}", bl.name, bl.check.slack));
        }
    }
    if report.violations.is_empty() {
        out.push("  no violations".to_string());
    } else {
        for v in &report.violations {
            out.push(format!(
                "  VIOLATION {}: claimed {} vs observed {} (excess {:.3e})",
                v.item, v.claimed, v.observed, v.excess
            ));
        }
    }
    out.join("\n")
}
