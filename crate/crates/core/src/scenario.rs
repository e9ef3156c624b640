//! Scenario-driven verification: declarative field/surface/check
//! descriptions and the structured reports they produce.
//!
//! A scenario names a surface, one or two fields (plus an optional finite
//! candidate family), a list of checks, and optional expected assertions.
//! Theorem checks are consistency checks, not proofs: when every
//! hypothesis is certified the conclusion is asserted and its failure is a
//! reportable violation; when a hypothesis cannot be certified the check
//! is flagged and the conclusion is not asserted, so no false theorem
//! violations can ever be reported.

use crate::area::{default_probes, is_area_preserving};
use crate::blocks::{decompose_blocks_from_scan, dependency_set, Block};
use crate::cycles::{detect_cycles, Cycle};
use crate::error::{EvalError, SurfaceError};
use crate::field::{
    check_bracket_condition, check_bracket_condition_numeric, BracketVerdict, ComboField,
    FieldExpr, VectorField,
};
use crate::flow::{flow, flow_endpoint, nelson_compose, FlowConfig};
use crate::geom::{Mat2, Vec2};
use crate::index::IndexConfig;
use crate::lima::{build_lima_pair, LimaField};
use crate::parser::parse_field;
use crate::surface::{Surface, SurfaceSpec};
use crate::zeros::{find_zeros, ZeroScan};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("failed to read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario does not match the schema: {0}")]
    Schema(String),
    #[error("field '{which}' is invalid: {message}")]
    BadField { which: String, message: String },
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

/// A vector field in a scenario file: either a DSL expression string or a
/// named builtin construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Expr(String),
    Builtin {
        builtin: String,
        #[serde(default = "default_steepness")]
        steepness: f64,
    },
}

fn default_steepness() -> f64 {
    1.0
}

/// A built scenario field with the metadata the theorem checks need.
pub enum BuiltField {
    Expr(FieldExpr),
    Lima(LimaField),
}

impl BuiltField {
    pub fn as_dyn(&self) -> &dyn VectorField {
        match self {
            BuiltField::Expr(f) => f,
            BuiltField::Lima(f) => f,
        }
    }

    pub fn as_expr(&self) -> Option<&FieldExpr> {
        match self {
            BuiltField::Expr(f) => Some(f),
            BuiltField::Lima(_) => None,
        }
    }

    /// The DSL node kinds are all real-analytic on their domains; the
    /// boundary-vanishing Lima field is deliberately not analytic at the
    /// boundary circle (that is the point of the example).
    pub fn is_analytic(&self) -> bool {
        matches!(self, BuiltField::Expr(_))
    }

    pub fn describe(&self) -> String {
        match self {
            BuiltField::Expr(f) => f.to_string(),
            BuiltField::Lima(f) => format!(
                "lima_boundary(steepness={}, twist={})",
                f.steepness, f.twist
            ),
        }
    }
}

impl VectorField for BuiltField {
    fn eval(&self, p: Vec2) -> Result<Vec2, EvalError> {
        self.as_dyn().eval(p)
    }
    fn jacobian(&self, p: Vec2) -> Result<Mat2, EvalError> {
        self.as_dyn().jacobian(p)
    }
    fn divergence(&self, p: Vec2) -> Result<f64, EvalError> {
        self.as_dyn().divergence(p)
    }
}

impl FieldSpec {
    pub fn build(&self, which: &str) -> Result<BuiltField, ScenarioError> {
        match self {
            FieldSpec::Expr(src) => {
                parse_field(src)
                    .map(BuiltField::Expr)
                    .map_err(|e| ScenarioError::BadField {
                        which: which.to_string(),
                        message: e.to_string(),
                    })
            }
            FieldSpec::Builtin { builtin, steepness } => match builtin.as_str() {
                "lima_boundary" => Ok(BuiltField::Lima(build_lima_pair(*steepness).0)),
                "lima_interior" => Ok(BuiltField::Expr(build_lima_pair(*steepness).1)),
                other => Err(ScenarioError::BadField {
                    which: which.to_string(),
                    message: format!("unknown builtin field '{other}'"),
                }),
            },
        }
    }
}

/// The checks a scenario can request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    BracketCondition,
    Blocks,
    Indices,
    Euler,
    Dependency,
    Cycles,
    Area,
    #[serde(rename = "theorem_1_5a")]
    Theorem15a,
    #[serde(rename = "theorem_1_5b")]
    Theorem15b,
    #[serde(rename = "theorem_1_8")]
    Theorem18,
    LimaExample,
    Nelson,
    PermuteCurves,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::BracketCondition => "bracket_condition",
            CheckKind::Blocks => "blocks",
            CheckKind::Indices => "indices",
            CheckKind::Euler => "euler",
            CheckKind::Dependency => "dependency",
            CheckKind::Cycles => "cycles",
            CheckKind::Area => "area",
            CheckKind::Theorem15a => "theorem_1_5a",
            CheckKind::Theorem15b => "theorem_1_5b",
            CheckKind::Theorem18 => "theorem_1_8",
            CheckKind::LimaExample => "lima_example",
            CheckKind::Nelson => "nelson",
            CheckKind::PermuteCurves => "permute_curves",
        }
    }
}

/// Per-scenario tunables with sensible defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Configs {
    pub flow: FlowConfig,
    pub index: IndexConfig,
    pub resolution: usize,
    pub dependency_tol: f64,
    pub bracket_tol: f64,
    /// Shrink factor applied to the surface for sampled bracket checks on
    /// non-symbolic fields (the interior grid).
    pub bracket_interior_shrink: f64,
    pub t_max: f64,
    pub cycle_seeds: Vec<[f64; 2]>,
    pub transversal: Option<[[f64; 2]; 2]>,
    pub nelson_t: f64,
    pub nelson_ks: Vec<u32>,
    pub nelson_point: [f64; 2],
    pub permute_t: f64,
    pub permute_samples: Vec<[f64; 2]>,
    pub area_time: f64,
}

impl Default for Configs {
    fn default() -> Self {
        Configs {
            flow: FlowConfig::default(),
            index: IndexConfig::default(),
            resolution: 256,
            dependency_tol: crate::blocks::DEPENDENCY_TOL,
            bracket_tol: crate::field::BRACKET_TOL,
            bracket_interior_shrink: 0.95,
            t_max: 50.0,
            cycle_seeds: Vec::new(),
            transversal: None,
            nelson_t: 0.5,
            nelson_ks: vec![2, 4, 8, 16, 32],
            nelson_point: [0.5, 0.0],
            permute_t: 0.3,
            permute_samples: Vec::new(),
            area_time: 1.0,
        }
    }
}

/// Optional typed assertions checked against the produced payloads.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Expected {
    pub block_indices: Option<Vec<i64>>,
    pub block_count: Option<usize>,
    pub euler_char: Option<i64>,
    pub bracket_holds: Option<bool>,
    pub area_preserving: Option<bool>,
    pub cycle_count: Option<usize>,
    pub conclusion_witnessed: Option<bool>,
    pub essential: Option<bool>,
    pub zero_count_second_field: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub surface: SurfaceSpec,
    #[serde(rename = "X")]
    pub x: FieldSpec,
    #[serde(rename = "Y", skip_serializing_if = "Option::is_none")]
    pub y: Option<FieldSpec>,
    /// Finite candidate family standing in for a set of admissible fields;
    /// each member gets a bracket check against `X`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<FieldSpec>,
    pub checks: Vec<CheckKind>,
    #[serde(default)]
    pub configs: Configs,
    #[serde(default)]
    pub expected: Expected,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario, ScenarioError> {
        let s: Scenario =
            serde_json::from_str(text).map_err(|e| ScenarioError::Schema(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path)?;
        Scenario::from_json(&text)
    }

    /// Load-time validation: checks that need a second field have one, and
    /// every expected assertion has a check producing its value.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let has = |k: CheckKind| self.checks.contains(&k);
        let needs_y = [
            CheckKind::BracketCondition,
            CheckKind::Dependency,
            CheckKind::Theorem15a,
            CheckKind::Theorem15b,
            CheckKind::Theorem18,
            CheckKind::LimaExample,
            CheckKind::Nelson,
            CheckKind::PermuteCurves,
        ];
        if self.y.is_none() {
            if let Some(k) = needs_y.iter().find(|k| has(**k)) {
                return Err(ScenarioError::Schema(format!(
                    "check '{}' requires a field Y",
                    k.name()
                )));
            }
        }
        let any_theorem = has(CheckKind::Theorem15a)
            || has(CheckKind::Theorem15b)
            || has(CheckKind::Theorem18)
            || has(CheckKind::LimaExample);
        let e = &self.expected;
        let rules: [(&str, bool, bool); 9] = [
            (
                "block_indices",
                e.block_indices.is_some(),
                has(CheckKind::Blocks) || has(CheckKind::Indices),
            ),
            (
                "block_count",
                e.block_count.is_some(),
                has(CheckKind::Blocks) || has(CheckKind::Indices),
            ),
            ("euler_char", e.euler_char.is_some(), has(CheckKind::Euler)),
            (
                "bracket_holds",
                e.bracket_holds.is_some(),
                has(CheckKind::BracketCondition) || any_theorem,
            ),
            (
                "area_preserving",
                e.area_preserving.is_some(),
                has(CheckKind::Area) || has(CheckKind::Theorem18),
            ),
            (
                "cycle_count",
                e.cycle_count.is_some(),
                has(CheckKind::Cycles),
            ),
            (
                "conclusion_witnessed",
                e.conclusion_witnessed.is_some(),
                any_theorem,
            ),
            (
                "essential",
                e.essential.is_some(),
                any_theorem || has(CheckKind::Blocks) || has(CheckKind::Indices),
            ),
            (
                "zero_count_second_field",
                e.zero_count_second_field.is_some(),
                any_theorem,
            ),
        ];
        for (name, wanted, satisfied) in rules {
            if wanted && !satisfied {
                return Err(ScenarioError::Schema(format!(
                    "expected assertion '{name}' has no check producing it"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Hypotheses could not be certified; conclusion not asserted.
    Flagged,
    Error,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub kind: CheckKind,
    pub status: CheckStatus,
    pub payload: Value,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub version: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    pub provenance: Provenance,
    pub checks: Vec<CheckReport>,
    pub failed_expectations: Vec<String>,
    pub overall_pass: bool,
}

impl Report {
    pub fn has_errors(&self) -> bool {
        self.checks.iter().any(|c| c.status == CheckStatus::Error)
    }

    pub fn check(&self, kind: CheckKind) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.kind == kind)
    }
}

/// FNV-1a over the canonical scenario JSON; cheap, stable provenance tag.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

pub fn run_scenario_path(path: &std::path::Path) -> Result<Report, ScenarioError> {
    let scenario = Scenario::from_path(path)?;
    run_scenario(&scenario)
}

/// Executes every requested check in order and evaluates the expected
/// assertions. Deterministic: two runs of the same scenario produce
/// byte-identical reports.
pub fn run_scenario(scenario: &Scenario) -> Result<Report, ScenarioError> {
    scenario.validate()?;
    let surface = scenario.surface.build()?;
    let x = scenario.x.build("X")?;
    let y = match &scenario.y {
        Some(spec) => Some(spec.build("Y")?),
        None => None,
    };
    let candidates: Vec<BuiltField> = scenario
        .candidates
        .iter()
        .enumerate()
        .map(|(i, spec)| spec.build(&format!("candidates[{i}]")))
        .collect::<Result<_, _>>()?;

    let mut ctx = Context {
        scenario,
        surface,
        x,
        y,
        candidates,
        scan_x: None,
        blocks_x: None,
    };

    let mut checks = Vec::with_capacity(scenario.checks.len());
    for &kind in &scenario.checks {
        checks.push(ctx.run_check(kind));
    }

    let failed_expectations = evaluate_expectations(&scenario.expected, &checks);
    let overall_pass = failed_expectations.is_empty()
        && checks
            .iter()
            .all(|c| matches!(c.status, CheckStatus::Pass | CheckStatus::Flagged));

    let canonical = serde_json::to_vec(scenario).unwrap_or_default();
    Ok(Report {
        scenario: scenario.name.clone(),
        provenance: Provenance {
            config_hash: format!("{:016x}", fnv1a(&canonical)),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        checks,
        failed_expectations,
        overall_pass,
    })
}

struct Context<'a> {
    scenario: &'a Scenario,
    surface: Surface,
    x: BuiltField,
    y: Option<BuiltField>,
    candidates: Vec<BuiltField>,
    scan_x: Option<ZeroScan>,
    blocks_x: Option<Result<Vec<Block>, String>>,
}

impl Context<'_> {
    fn cfg(&self) -> &Configs {
        &self.scenario.configs
    }

    fn y_field(&self) -> &BuiltField {
        self.y.as_ref().expect("validated: check requires Y")
    }

    /// Blocks of X, computed once.
    fn blocks_x(&mut self) -> Result<Vec<Block>, String> {
        if self.blocks_x.is_none() {
            let result = (|| {
                let resolution = self.cfg().resolution;
                let flow_cfg = self.cfg().flow;
                let index_cfg = self.cfg().index;
                let scan = find_zeros(self.x.as_dyn(), &self.surface, resolution)
                    .map_err(|e| e.to_string())?;
                self.scan_x = Some(scan);
                decompose_blocks_from_scan(
                    self.x.as_dyn(),
                    &self.surface,
                    self.scan_x.as_ref().unwrap(),
                    &flow_cfg,
                    &index_cfg,
                )
                .map_err(|e| e.to_string())
            })();
            self.blocks_x = Some(result);
        }
        self.blocks_x.clone().unwrap()
    }

    fn run_check(&mut self, kind: CheckKind) -> CheckReport {
        let result = match kind {
            CheckKind::BracketCondition => self.check_bracket(),
            CheckKind::Blocks | CheckKind::Indices => self.check_blocks(),
            CheckKind::Euler => self.check_euler(),
            CheckKind::Dependency => self.check_dependency(),
            CheckKind::Cycles => self.check_cycles(),
            CheckKind::Area => self.check_area(),
            CheckKind::Theorem15a => self.check_theorem(TheoremVariant::Analytic),
            CheckKind::Theorem15b => self.check_theorem(TheoremVariant::CycleBoundary),
            CheckKind::Theorem18 => self.check_theorem(TheoremVariant::AreaPreserving),
            CheckKind::LimaExample => self.check_lima(),
            CheckKind::Nelson => self.check_nelson(),
            CheckKind::PermuteCurves => self.check_permute(),
        };
        match result {
            Ok((status, payload, notes)) => CheckReport {
                kind,
                status,
                payload,
                notes,
            },
            Err(message) => CheckReport {
                kind,
                status: CheckStatus::Error,
                payload: json!({ "error": message }),
                notes: vec![],
            },
        }
    }

    fn check_bracket(&mut self) -> CheckResult {
        let verdict = self.bracket_verdict()?;
        let (mut status, mut payload) = bracket_payload(&verdict);
        // record the symbolically computed bracket when both fields are
        // expression trees; the report does not arbitrate what relation it
        // "should" satisfy
        if let (Some(xe), Some(ye)) = (self.x.as_expr(), self.y_field().as_expr()) {
            let bracket = crate::field::lie_bracket(xe, ye);
            if let Value::Object(map) = &mut payload {
                map.insert("lie_bracket".into(), json!(bracket.to_string()));
            }
        }
        // finite candidate family: each member is checked against X too
        if !self.candidates.is_empty() {
            let tol = self.cfg().bracket_tol;
            let mut members = Vec::new();
            for (i, cand) in self.candidates.iter().enumerate() {
                let verdict = match (self.x.as_expr(), cand.as_expr()) {
                    (Some(xe), Some(ce)) => check_bracket_condition(xe, ce, &self.surface, tol)
                        .map_err(|e| e.to_string())?,
                    _ => {
                        let inner =
                            shrink_surface(&self.surface, self.cfg().bracket_interior_shrink)?;
                        check_bracket_condition_numeric(self.x.as_dyn(), cand.as_dyn(), &inner, tol)
                            .map_err(|e| e.to_string())?
                    }
                };
                if !verdict.holds() {
                    status = CheckStatus::Fail;
                }
                let (_, v) = bracket_payload(&verdict);
                members.push(json!({
                    "member": i,
                    "field": cand.describe(),
                    "verdict": v,
                }));
            }
            if let Value::Object(map) = &mut payload {
                map.insert("candidates".into(), Value::Array(members));
            }
        }
        Ok((status, payload, vec![]))
    }

    fn bracket_verdict(&mut self) -> Result<BracketVerdict, String> {
        let tol = self.cfg().bracket_tol;
        let y = self.y_field();
        match (self.x.as_expr(), y.as_expr()) {
            (Some(xe), Some(ye)) => {
                check_bracket_condition(xe, ye, &self.surface, tol).map_err(|e| e.to_string())
            }
            _ => {
                // non-symbolic fields: sampled residual on the interior
                // grid, away from boundary degeneracies
                let inner = shrink_surface(&self.surface, self.cfg().bracket_interior_shrink)?;
                check_bracket_condition_numeric(self.x.as_dyn(), y.as_dyn(), &inner, tol)
                    .map_err(|e| e.to_string())
            }
        }
    }

    fn check_blocks(&mut self) -> CheckResult {
        let blocks = self.blocks_x()?;
        let scan = self.scan_x.as_ref().unwrap();
        let payload = blocks_payload(&blocks, scan);
        Ok((CheckStatus::Pass, payload, vec![]))
    }

    fn check_euler(&mut self) -> CheckResult {
        let chi = self.surface.euler_characteristic();
        let boundary_components = self.surface.boundary().len() as i64;
        Ok((
            CheckStatus::Pass,
            json!({
                "euler_char": chi,
                "boundary_components": boundary_components,
            }),
            vec![],
        ))
    }

    fn check_dependency(&mut self) -> CheckResult {
        let resolution = self.cfg().resolution;
        let tol = self.cfg().dependency_tol;
        let d = dependency_set(
            self.x.as_dyn(),
            self.y_field().as_dyn(),
            &self.surface,
            resolution,
            tol,
        )
        .map_err(|e| e.to_string())?;
        let payload = json!({
            "cell_count": d.cells.len(),
            "component_count": d.components.len(),
            "cells": cells_json(&d.cells, &d.grid),
            "grid": d.grid,
        });
        Ok((CheckStatus::Pass, payload, vec![]))
    }

    fn check_cycles(&mut self) -> CheckResult {
        let seeds: Vec<Vec2> = self
            .cfg()
            .cycle_seeds
            .iter()
            .map(|&p| Vec2::from(p))
            .collect();
        let t_max = self.cfg().t_max;
        let flow_cfg = self.cfg().flow;
        let cycles = detect_cycles(self.x.as_dyn(), &self.surface, &seeds, t_max, &flow_cfg);
        Ok((CheckStatus::Pass, cycles_payload(&cycles), vec![]))
    }

    fn check_area(&mut self) -> CheckResult {
        let report = self.area_report();
        let status = CheckStatus::Pass;
        Ok((status, serde_json::to_value(&report).unwrap(), vec![]))
    }

    fn area_report(&self) -> crate::area::AreaReport {
        let probes = default_probes(&self.surface, 16);
        let field = self.y.as_ref().unwrap_or(&self.x);
        is_area_preserving(
            field.as_dyn(),
            &self.surface,
            &probes,
            self.cfg().area_time,
            &self.cfg().flow,
        )
    }

    fn check_nelson(&mut self) -> CheckResult {
        let cfg = self.cfg().clone();
        let y = self.y_field();
        let p = Vec2::from(cfg.nelson_point);
        let combined = ComboField::sum(self.x.as_dyn(), y.as_dyn());
        let direct = flow_endpoint(&combined, &self.surface, p, cfg.nelson_t, &cfg.flow)
            .map_err(|e| e.to_string())?;
        let mut errors: Vec<(u32, f64)> = Vec::new();
        for &k in &cfg.nelson_ks {
            let composed = nelson_compose(
                self.x.as_dyn(),
                y.as_dyn(),
                &self.surface,
                p,
                cfg.nelson_t,
                k,
                &cfg.flow,
            )
            .map_err(|e| e.to_string())?;
            errors.push((k, composed.dist(direct)));
        }
        let payload = json!({
            "t": cfg.nelson_t,
            "point": [p.x, p.y],
            "errors": errors.iter().map(|(k, e)| json!({"k": k, "error": e})).collect::<Vec<_>>(),
            "empirical_order": empirical_order(&errors),
        });
        Ok((CheckStatus::Pass, payload, vec![]))
    }

    fn check_permute(&mut self) -> CheckResult {
        let cfg = self.cfg().clone();
        let samples: Vec<Vec2> = cfg.permute_samples.iter().map(|&p| Vec2::from(p)).collect();
        if samples.is_empty() {
            return Err("permute_curves needs configs.permute_samples".into());
        }
        let report = crate::flow::check_permutes_integral_curves(
            self.x.as_dyn(),
            self.y_field().as_dyn(),
            &self.surface,
            &samples,
            cfg.permute_t,
            &cfg.flow,
        )
        .map_err(|e| e.to_string())?;
        let status = if report.max_residual < 1e-5 && report.all_factors_positive {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Ok((status, serde_json::to_value(&report).unwrap(), vec![]))
    }

    /// Shared hypothesis battery for the common-zero theorem checks.
    fn hypotheses(&mut self, notes: &mut Vec<String>) -> Result<Hypotheses, String> {
        let bracket = self.bracket_verdict()?;
        if !bracket.holds() {
            notes.push("hypothesis (bracket condition) fails".into());
        }

        let inward = |field: &dyn VectorField, surface: &Surface| -> Result<bool, String> {
            for p in surface.boundary_samples(64) {
                let v = field.eval(p).map_err(|e| e.to_string())?;
                if !surface.inward_cone_test(p, v).map_err(|e| e.to_string())? {
                    return Ok(false);
                }
            }
            Ok(true)
        };
        let surface = self.surface.clone();
        let inward_x = inward(self.x.as_dyn(), &surface)?;
        let inward_y = inward(self.y_field().as_dyn(), &surface)?;
        if !inward_x {
            notes.push("hypothesis (X inward) fails".into());
        }
        if !inward_y {
            notes.push("hypothesis (Y inward) fails".into());
        }

        let analytic_x = self.x.is_analytic();
        let analytic_y = self.y_field().is_analytic();

        let blocks = self.blocks_x()?;
        let essential: Vec<usize> = blocks
            .iter()
            .enumerate()
            .filter(|(_, b)| b.index.value != 0)
            .map(|(i, _)| i)
            .collect();
        if essential.is_empty() {
            notes.push("hypothesis (essential) fails".into());
        }

        Ok(Hypotheses {
            bracket,
            inward_x,
            inward_y,
            analytic_x,
            analytic_y,
            blocks,
            essential,
        })
    }

    /// Looks for a polished zero of Y within one cell-width of the block.
    fn conclusion_witness(&mut self, block: &Block) -> Result<Option<Vec2>, String> {
        let resolution = self.cfg().resolution;
        let scan_y = find_zeros(self.y_field().as_dyn(), &self.surface, resolution)
            .map_err(|e| e.to_string())?;
        let grid = scan_y.grid;
        for z in &scan_y.zeros {
            let close = block
                .cells
                .iter()
                .any(|&(ix, iy)| grid.cell_center(ix, iy).dist(z.point) <= 1.5 * grid.cell);
            if close {
                return Ok(Some(z.point));
            }
        }
        Ok(None)
    }

    fn check_theorem(&mut self, variant: TheoremVariant) -> CheckResult {
        let mut notes = Vec::new();
        let hyp = self.hypotheses(&mut notes)?;
        let mut extra_payload = BTreeMap::new();

        let variant_ok = match variant {
            TheoremVariant::Analytic => {
                if !hyp.analytic_x {
                    notes.push("hypothesis (X analytic) fails".into());
                }
                if !hyp.analytic_y {
                    notes.push("hypothesis (Y analytic) fails".into());
                }
                hyp.analytic_x && hyp.analytic_y
            }
            TheoremVariant::CycleBoundary => {
                let seeds: Vec<Vec2> = self
                    .cfg()
                    .cycle_seeds
                    .iter()
                    .map(|&p| Vec2::from(p))
                    .collect();
                let cycles = detect_cycles(
                    self.y_field().as_dyn(),
                    &self.surface,
                    &seeds,
                    self.cfg().t_max,
                    &self.cfg().flow,
                );
                extra_payload.insert("cycles".to_string(), cycles_payload(&cycles));
                let enclosing = hyp.essential.first().map(|&i| &hyp.blocks[i]).map(|b| {
                    let grid = self.scan_x.as_ref().unwrap().grid;
                    cycles.iter().any(|c| {
                        b.cells
                            .iter()
                            .any(|&(ix, iy)| c.encloses(grid.cell_center(ix, iy)))
                    })
                });
                let ok = enclosing.unwrap_or(false) && !cycles.is_empty();
                if !ok {
                    notes.push(
                        "hypothesis (neighborhood bounded by second-field cycles) fails".into(),
                    );
                }
                ok
            }
            TheoremVariant::AreaPreserving => {
                let report = self.area_report();
                let ok = report.preserving;
                extra_payload.insert("area".to_string(), serde_json::to_value(&report).unwrap());
                if !ok {
                    notes.push("hypothesis (area preserving) fails".into());
                }
                ok
            }
        };

        let hypotheses_certified = hyp.bracket.holds()
            && hyp.inward_x
            && hyp.inward_y
            && !hyp.essential.is_empty()
            && variant_ok;

        let mut witness = None;
        let mut status = CheckStatus::Flagged;
        if hypotheses_certified {
            // conclusion asserted: some essential block must meet the
            // zero set of the second field
            for &i in &hyp.essential {
                let block = hyp.blocks[i].clone();
                if let Some(w) = self.conclusion_witness(&block)? {
                    witness = Some(w);
                    break;
                }
            }
            status = if witness.is_some() {
                CheckStatus::Pass
            } else {
                notes.push("conclusion violated: no common zero near an essential block".into());
                CheckStatus::Fail
            };
        } else {
            notes.push("conclusion not asserted".into());
        }

        let (_, bracket_json) = bracket_payload(&hyp.bracket);
        let mut payload = json!({
            "hypotheses": {
                "bracket": bracket_json,
                "inward_x": hyp.inward_x,
                "inward_y": hyp.inward_y,
                "analytic_x": hyp.analytic_x,
                "analytic_y": hyp.analytic_y,
                "essential_blocks": hyp.essential,
                "block_indices": hyp.blocks.iter().map(|b| b.index.value).collect::<Vec<_>>(),
                "certified": hypotheses_certified,
            },
            "conclusion_witnessed": witness.is_some(),
            "witness": witness.map(|w| vec![w.x, w.y]),
        });
        if let Value::Object(map) = &mut payload {
            for (k, v) in extra_payload {
                map.insert(k, v);
            }
        }
        Ok((status, payload, notes))
    }

    fn check_lima(&mut self) -> CheckResult {
        let mut notes = Vec::new();
        // bracket residual on the interior grid
        let bracket = self.bracket_verdict()?;
        let residual = match &bracket {
            BracketVerdict::Holds { max_residual, .. } => *max_residual,
            BracketVerdict::Fails { residual, .. } => *residual,
        };

        let blocks = self.blocks_x()?;
        let scan_x_grid = self.scan_x.as_ref().unwrap().grid;
        let boundary_blocks: Vec<&Block> = blocks.iter().filter(|b| b.touches_boundary).collect();
        let single_boundary_block = blocks.len() == 1 && boundary_blocks.len() == 1;
        let block_index = blocks.first().map(|b| b.index.value);

        let resolution = self.cfg().resolution;
        let scan_y = find_zeros(self.y_field().as_dyn(), &self.surface, resolution)
            .map_err(|e| e.to_string())?;
        let y_zero = scan_y.zeros.first().map(|z| z.point);

        // separation of the two zero sets
        let min_cell_distance = match (blocks.first(), y_zero) {
            (Some(b), Some(z)) => b
                .cells
                .iter()
                .map(|&(ix, iy)| scan_x_grid.cell_center(ix, iy).dist(z))
                .fold(f64::INFINITY, f64::min),
            _ => f64::NAN,
        };

        let ok = residual < 1e-6
            && single_boundary_block
            && block_index == Some(1)
            && scan_y.zeros.len() == 1
            && y_zero.map(|z| z.norm() < 1e-6).unwrap_or(false)
            && min_cell_distance > 0.5;
        if !ok {
            notes.push("constructed pair failed one of the example's properties".into());
        }

        let payload = json!({
            "bracket_residual": residual,
            "block_count": blocks.len(),
            "boundary_block": single_boundary_block,
            "block_index": block_index,
            "second_field_zeros": scan_y.zeros.iter().map(|z| vec![z.point.x, z.point.y]).collect::<Vec<_>>(),
            "zero_set_separation": min_cell_distance,
        });
        Ok((
            if ok {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            payload,
            notes,
        ))
    }
}

enum TheoremVariant {
    Analytic,
    CycleBoundary,
    AreaPreserving,
}

struct Hypotheses {
    bracket: BracketVerdict,
    inward_x: bool,
    inward_y: bool,
    analytic_x: bool,
    analytic_y: bool,
    blocks: Vec<Block>,
    essential: Vec<usize>,
}

type CheckResult = Result<(CheckStatus, Value, Vec<String>), String>;

fn bracket_payload(verdict: &BracketVerdict) -> (CheckStatus, Value) {
    match verdict {
        BracketVerdict::Holds {
            exact,
            max_residual,
        } => (
            CheckStatus::Pass,
            json!({"holds": true, "exact": exact, "max_residual": max_residual}),
        ),
        BracketVerdict::Fails {
            exact,
            witness,
            residual,
        } => (
            CheckStatus::Fail,
            json!({
                "holds": false,
                "exact": exact,
                "witness": [witness.x, witness.y],
                "residual": residual,
            }),
        ),
    }
}

fn blocks_payload(blocks: &[Block], scan: &ZeroScan) -> Value {
    json!({
        "block_count": blocks.len(),
        "blocks": blocks
            .iter()
            .map(|b| {
                json!({
                    "index": b.index.value,
                    "tau": b.index.tau,
                    "min_modulus": b.index.min_modulus,
                    "touches_boundary": b.touches_boundary,
                    "cell_count": b.cells.len(),
                    "cells": cells_json(&b.cells, &scan.grid),
                    "zeros": b.zeros.iter().map(|z| vec![z.point.x, z.point.y]).collect::<Vec<_>>(),
                    "contours": b.region.contours.iter().map(curve_json).collect::<Vec<_>>(),
                })
            })
            .collect::<Vec<_>>(),
        "suspect_cell_count": scan.suspect_cells.len(),
        "polished_zero_count": scan.zeros.len(),
        "grid": scan.grid,
        "index_sum": blocks.iter().map(|b| b.index.value).sum::<i64>(),
    })
}

fn cycles_payload(cycles: &[Cycle]) -> Value {
    json!({
        "cycle_count": cycles.len(),
        "cycles": cycles
            .iter()
            .map(|c| {
                json!({
                    "period": c.period,
                    "closure_gap": c.closure_gap,
                    "points": c.points.iter().map(|p| vec![p.x, p.y]).collect::<Vec<_>>(),
                })
            })
            .collect::<Vec<_>>(),
    })
}

fn curve_json(c: &crate::geom::Curve) -> Value {
    json!({
        "closed": c.closed,
        "points": c.vertices.iter().map(|p| vec![p.x, p.y]).collect::<Vec<_>>(),
    })
}

fn cells_json(cells: &[(i64, i64)], grid: &crate::zeros::GridInfo) -> Value {
    Value::Array(
        cells
            .iter()
            .map(|&(ix, iy)| {
                let c = grid.cell_center(ix, iy);
                json!([ix, iy, c.x, c.y])
            })
            .collect(),
    )
}

/// Least-squares slope of log(error) against log(1/k).
pub fn empirical_order(errors: &[(u32, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = errors
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|(k, e)| (-(f64::from(*k)).ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Shrinks a surface toward its interior for sampled checks that must
/// avoid boundary degeneracies.
fn shrink_surface(surface: &Surface, factor: f64) -> Result<Surface, String> {
    use crate::surface::SurfaceKind;
    let s = match surface.kind() {
        SurfaceKind::Disk { center, radius } => Surface::disk(*center, radius * factor),
        SurfaceKind::Annulus {
            center,
            r_inner,
            r_outer,
        } => {
            let mid = (r_inner + r_outer) / 2.0;
            let half = (r_outer - r_inner) / 2.0 * factor;
            Surface::annulus(*center, mid - half, mid + half)
        }
        SurfaceKind::HalfplaneWindow {
            x_min,
            x_max,
            height,
        } => {
            let cx = (x_min + x_max) / 2.0;
            let half = (x_max - x_min) / 2.0 * factor;
            Surface::halfplane_window(cx - half, cx + half, height * factor)
        }
        SurfaceKind::PolygonWithHoles { .. } => return Ok(surface.clone()),
    };
    s.map_err(|e| e.to_string())
}

fn evaluate_expectations(expected: &Expected, checks: &[CheckReport]) -> Vec<String> {
    let mut failures = Vec::new();
    let find = |kinds: &[CheckKind]| -> Option<&CheckReport> {
        checks.iter().find(|c| kinds.contains(&c.kind))
    };
    let theorem_kinds = [
        CheckKind::Theorem15a,
        CheckKind::Theorem15b,
        CheckKind::Theorem18,
        CheckKind::LimaExample,
    ];

    if let Some(want) = &expected.block_indices {
        if let Some(c) = find(&[CheckKind::Blocks, CheckKind::Indices]) {
            let mut got: Vec<i64> = c.payload["blocks"]
                .as_array()
                .map(|bs| bs.iter().filter_map(|b| b["index"].as_i64()).collect())
                .unwrap_or_default();
            got.sort_unstable();
            let mut want_sorted = want.clone();
            want_sorted.sort_unstable();
            if got != want_sorted {
                failures.push(format!(
                    "block_indices: expected {want_sorted:?}, got {got:?}"
                ));
            }
        }
    }
    if let Some(want) = expected.block_count {
        if let Some(c) = find(&[CheckKind::Blocks, CheckKind::Indices]) {
            let got = c.payload["block_count"].as_u64().unwrap_or(u64::MAX) as usize;
            if got != want {
                failures.push(format!("block_count: expected {want}, got {got}"));
            }
        }
    }
    if let Some(want) = expected.euler_char {
        if let Some(c) = find(&[CheckKind::Euler]) {
            let got = c.payload["euler_char"].as_i64().unwrap_or(i64::MAX);
            if got != want {
                failures.push(format!("euler_char: expected {want}, got {got}"));
            }
        }
    }
    if let Some(want) = expected.bracket_holds {
        let got = find(&[CheckKind::BracketCondition])
            .map(|c| c.payload["holds"].as_bool().unwrap_or(false))
            .or_else(|| {
                find(&theorem_kinds).map(|c| {
                    c.payload["hypotheses"]["bracket"]["holds"]
                        .as_bool()
                        .unwrap_or(false)
                })
            });
        if got != Some(want) {
            failures.push(format!("bracket_holds: expected {want}, got {got:?}"));
        }
    }
    if let Some(want) = expected.area_preserving {
        let got = find(&[CheckKind::Area])
            .map(|c| c.payload["preserving"].as_bool().unwrap_or(false))
            .or_else(|| {
                find(&[CheckKind::Theorem18])
                    .map(|c| c.payload["area"]["preserving"].as_bool().unwrap_or(false))
            });
        if got != Some(want) {
            failures.push(format!("area_preserving: expected {want}, got {got:?}"));
        }
    }
    if let Some(want) = expected.cycle_count {
        if let Some(c) = find(&[CheckKind::Cycles]) {
            let got = c.payload["cycle_count"].as_u64().unwrap_or(u64::MAX) as usize;
            if got != want {
                failures.push(format!("cycle_count: expected {want}, got {got}"));
            }
        }
    }
    if let Some(want) = expected.conclusion_witnessed {
        if let Some(c) = find(&theorem_kinds) {
            let got = c.payload["conclusion_witnessed"].as_bool().unwrap_or(false);
            if got != want {
                failures.push(format!("conclusion_witnessed: expected {want}, got {got}"));
            }
        }
    }
    if let Some(want) = expected.essential {
        // the lima_example payload has no hypothesis battery; fall through
        // to the blocks payload for it
        if let Some(c) = find(&[
            CheckKind::Theorem15a,
            CheckKind::Theorem15b,
            CheckKind::Theorem18,
        ]) {
            let got = !c.payload["hypotheses"]["essential_blocks"]
                .as_array()
                .map(|a| a.is_empty())
                .unwrap_or(true);
            if got != want {
                failures.push(format!("essential: expected {want}, got {got}"));
            }
        } else if let Some(c) = find(&[CheckKind::Blocks, CheckKind::Indices]) {
            let got = c.payload["blocks"]
                .as_array()
                .map(|bs| bs.iter().any(|b| b["index"].as_i64().unwrap_or(0) != 0))
                .unwrap_or(false);
            if got != want {
                failures.push(format!("essential: expected {want}, got {got}"));
            }
        }
    }
    if let Some(want) = expected.zero_count_second_field {
        if let Some(c) = find(&[CheckKind::LimaExample]) {
            let got = c.payload["second_field_zeros"]
                .as_array()
                .map(|a| a.len())
                .unwrap_or(usize::MAX);
            if got != want {
                failures.push(format!(
                    "zero_count_second_field: expected {want}, got {got}"
                ));
            }
        }
    }
    failures
}

/// Report of a whole-trajectory export request; used by the CLI and demo.
pub fn trajectory_for(
    scenario: &Scenario,
    which: &str,
    start: Vec2,
    t: f64,
) -> Result<crate::flow::Trajectory, ScenarioError> {
    let surface = scenario.surface.build()?;
    let field = match which {
        "Y" => scenario
            .y
            .as_ref()
            .ok_or_else(|| ScenarioError::Schema("scenario has no field Y".into()))?
            .build("Y")?,
        _ => scenario.x.build("X")?,
    };
    flow(field.as_dyn(), &surface, start, t, &scenario.configs.flow)
        .map_err(|e| ScenarioError::Schema(format!("integration failed: {e}")))
}
