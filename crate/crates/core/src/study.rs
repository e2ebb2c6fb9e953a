//! Scenario sweeps over pole count, rotor slot shape and rated speed, with
//! the comparison table, speed-trend curves and best-design selection.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::ModelConstants;
use crate::constraints::{
    apply_overrides, default_constraints, evaluate_constraints, ConstraintOverride,
    ConstraintReport,
};
use crate::error::{EvimError, Result};
use crate::optimizer::{optimize, DesignProblem, HJConfig};
use crate::performance::{MotorModel, PerformanceReport};
use crate::spec::{
    default_bounds, validate_spec, DesignVector, HarmonicSpectrum, MaterialCatalog, MotorSpec,
    SlotShape,
};

pub const STUDY_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub pole_count: u32,
    pub rotor_slot_shape: SlotShape,
    pub rated_speed: f64,
}

impl Scenario {
    /// e.g. `2p rect-rect 1800`; stator slots are always rectangular.
    pub fn label(&self) -> String {
        format!(
            "{}p rect-{} {}",
            self.pole_count,
            self.rotor_slot_shape.label(),
            self.rated_speed
        )
    }

    fn key(&self) -> (u32, SlotShape, u64) {
        (
            self.pole_count,
            self.rotor_slot_shape,
            self.rated_speed.to_bits(),
        )
    }

    fn sort_key(&self) -> (u32, SlotShape, f64) {
        (self.pole_count, self.rotor_slot_shape, self.rated_speed)
    }
}

fn cmp_scenarios(a: &Scenario, b: &Scenario) -> std::cmp::Ordering {
    let (pa, sa, va) = a.sort_key();
    let (pb, sb, vb) = b.sort_key();
    pa.cmp(&pb).then(sa.cmp(&sb)).then(va.total_cmp(&vb))
}

fn default_pole_counts() -> Vec<u32> {
    vec![2, 4]
}

fn default_shapes() -> Vec<SlotShape> {
    vec![SlotShape::Rectangular, SlotShape::Round]
}

fn default_speeds() -> Vec<f64> {
    vec![1600.0, 1800.0, 2000.0]
}

/// Rated speeds swept for the trend curves of one pole count.
pub fn curve_speeds(pole_count: u32) -> Vec<f64> {
    match pole_count {
        2 => (0..8).map(|k| 1400.0 + 200.0 * f64::from(k)).collect(),
        _ => (0..8).map(|k| 1400.0 + 100.0 * f64::from(k)).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    #[serde(default = "default_pole_counts")]
    pub pole_counts: Vec<u32>,
    #[serde(default = "default_shapes")]
    pub rotor_slot_shapes: Vec<SlotShape>,
    #[serde(default = "default_speeds")]
    pub rated_speeds: Vec<f64>,
    #[serde(default)]
    pub curves: bool,
    /// Rotor slot shape of the curve sweeps.
    #[serde(default = "rect")]
    pub curve_rotor_slot_shape: SlotShape,
    #[serde(default)]
    pub max_speed: Option<f64>,
    #[serde(default)]
    pub spectrum: Option<HarmonicSpectrum>,
    #[serde(default)]
    pub materials: MaterialCatalog,
    #[serde(default)]
    pub constants: ModelConstants,
    #[serde(default)]
    pub constraints: BTreeMap<String, ConstraintOverride>,
    #[serde(default)]
    pub optimizer: HJConfig,
    #[serde(default)]
    pub selection: SelectionPolicy,
    /// Scenario a designer would pick by judgment; a warning is raised when
    /// the policy selects a different one.
    #[serde(default = "expected_best")]
    pub expected_best: Option<Scenario>,
}

fn expected_best() -> Option<Scenario> {
    Some(Scenario {
        pole_count: 2,
        rotor_slot_shape: SlotShape::Rectangular,
        rated_speed: 1800.0,
    })
}

/// Lexicographic ranking of feasible scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionPolicy {
    /// Efficiency, then mass, then cost.
    #[default]
    EfficiencyFirst,
    /// Mass, then efficiency, then cost.
    MassFirst,
    /// Cost, then efficiency, then mass.
    CostFirst,
}

fn rect() -> SlotShape {
    SlotShape::Rectangular
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            pole_counts: default_pole_counts(),
            rotor_slot_shapes: default_shapes(),
            rated_speeds: default_speeds(),
            curves: false,
            curve_rotor_slot_shape: SlotShape::Rectangular,
            max_speed: None,
            spectrum: None,
            materials: MaterialCatalog::default(),
            constants: ModelConstants::default(),
            constraints: BTreeMap::new(),
            optimizer: HJConfig::default(),
            selection: SelectionPolicy::default(),
            expected_best: expected_best(),
        }
    }
}

impl StudyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if let Some(p) = self.pole_counts.iter().find(|p| !matches!(p, 2 | 4)) {
            problems.push(format!("pole count {p} not in {{2, 4}}"));
        }
        if self
            .rated_speeds
            .iter()
            .any(|s| !(s.is_finite() && *s > 0.0))
        {
            problems.push("rated speeds must be positive".to_string());
        }
        if self.optimizer.validate().is_err() {
            problems.push("optimizer configuration out of range".to_string());
        }
        problems.extend(self.constants.validate().into_iter().map(|v| v.message));
        let mut probe = default_constraints(&MotorSpec::ev_traction(2, 1800.0));
        if let Err(e) = apply_overrides(&mut probe, &self.constraints) {
            problems.push(e.to_string());
        }
        for s in self.scenarios() {
            let spec = self.spec_for(&s);
            problems.extend(
                validate_spec(&spec, &self.materials)
                    .into_iter()
                    .map(|v| format!("{}: {}", s.label(), v.message)),
            );
        }
        problems.dedup();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(EvimError::Invalid(problems.join("; ")))
        }
    }

    /// The comparison grid, in table order.
    pub fn scenarios(&self) -> Vec<Scenario> {
        let mut out = Vec::new();
        for &pole_count in &self.pole_counts {
            for &rotor_slot_shape in &self.rotor_slot_shapes {
                for &rated_speed in &self.rated_speeds {
                    out.push(Scenario {
                        pole_count,
                        rotor_slot_shape,
                        rated_speed,
                    });
                }
            }
        }
        out.sort_by(cmp_scenarios);
        out.dedup_by_key(|s| s.key());
        out
    }

    fn curve_scenarios(&self) -> Vec<Scenario> {
        if !self.curves {
            return Vec::new();
        }
        let mut out = Vec::new();
        for &pole_count in &self.pole_counts {
            for rated_speed in curve_speeds(pole_count) {
                out.push(Scenario {
                    pole_count,
                    rotor_slot_shape: self.curve_rotor_slot_shape,
                    rated_speed,
                });
            }
        }
        out
    }

    pub fn spec_for(&self, s: &Scenario) -> MotorSpec {
        let mut spec = MotorSpec::ev_traction(s.pole_count, s.rated_speed)
            .with_rotor_slot_shape(s.rotor_slot_shape);
        if let Some(m) = self.max_speed {
            spec.max_speed = m;
        }
        if let Some(h) = &self.spectrum {
            spec.spectrum = h.clone();
        }
        spec
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizedDesign {
    pub design: DesignVector,
    pub feasible: bool,
    pub evaluations: usize,
    pub penalty_mu: f64,
    pub report: Box<PerformanceReport>,
    pub constraints: ConstraintReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioOutcome {
    Optimized(OptimizedDesign),
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub scenario: Scenario,
    pub label: String,
    pub outcome: ScenarioOutcome,
}

impl ScenarioResult {
    pub fn optimized(&self) -> Option<&OptimizedDesign> {
        match &self.outcome {
            ScenarioOutcome::Optimized(o) => Some(o),
            ScenarioOutcome::Failed { .. } => None,
        }
    }

    pub fn report(&self) -> Option<&PerformanceReport> {
        self.optimized().map(|o| o.report.as_ref())
    }

    pub fn is_feasible(&self) -> bool {
        self.optimized().is_some_and(|o| o.feasible)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub rated_speed: f64,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSeries {
    pub parameter: String,
    pub pole_count: u32,
    pub points: Vec<CurvePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub label: String,
    pub scenario: Scenario,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub schema_version: u32,
    pub scenarios: Vec<ScenarioResult>,
    #[serde(default)]
    pub curves: Vec<CurveSeries>,
    pub best: Option<Selection>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl StudyReport {
    pub fn get(
        &self,
        pole_count: u32,
        shape: SlotShape,
        rated_speed: f64,
    ) -> Option<&ScenarioResult> {
        self.scenarios.iter().find(|r| {
            r.scenario.pole_count == pole_count
                && r.scenario.rotor_slot_shape == shape
                && r.scenario.rated_speed == rated_speed
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Optimize one scenario. Failures are captured, never propagated.
pub fn run_scenario(config: &StudyConfig, scenario: &Scenario) -> ScenarioResult {
    let outcome = optimize_scenario(config, scenario).unwrap_or_else(|e| ScenarioOutcome::Failed {
        reason: e.to_string(),
    });
    ScenarioResult {
        scenario: *scenario,
        label: scenario.label(),
        outcome,
    }
}

fn optimize_scenario(config: &StudyConfig, scenario: &Scenario) -> Result<ScenarioOutcome> {
    let spec = config.spec_for(scenario);
    let mut constraints = default_constraints(&spec);
    apply_overrides(&mut constraints, &config.constraints)?;
    let bounds = default_bounds(&spec);
    let model = MotorModel {
        spec,
        materials: config.materials.clone(),
        constants: config.constants.clone(),
    };
    let problem = DesignProblem::full(model, constraints, bounds);
    let result = optimize(&problem, &config.optimizer)?;
    let design = result.best.design;
    let evaluations = result.total_evaluations();
    Ok(match problem.model.evaluate(&design) {
        Ok(report) => {
            let cr = evaluate_constraints(&report, &problem.constraints)?;
            ScenarioOutcome::Optimized(OptimizedDesign {
                design,
                feasible: cr.feasible,
                evaluations,
                penalty_mu: result.best.penalty_mu,
                report: Box::new(report),
                constraints: cr,
            })
        }
        Err(inf) => ScenarioOutcome::Failed {
            reason: format!("search ended on an unevaluable design ({inf})"),
        },
    })
}

/// Optimize every scenario (and the curve sweeps when requested) on the
/// current rayon pool. The result depends only on `config`.
pub fn run_study(config: &StudyConfig) -> Result<StudyReport> {
    config.validate()?;
    let main = config.scenarios();
    let mut warnings = Vec::new();
    if main.is_empty() {
        warnings.push("no scenarios: the pole, slot shape or speed list is empty".to_string());
    }
    let mut all = main.clone();
    all.extend(config.curve_scenarios());
    all.sort_by(cmp_scenarios);
    all.dedup_by_key(|s| s.key());

    let results: Vec<ScenarioResult> = all.par_iter().map(|s| run_scenario(config, s)).collect();
    let by_key: BTreeMap<_, _> = results.iter().map(|r| (r.scenario.key(), r)).collect();

    let scenarios: Vec<ScenarioResult> = main.iter().map(|s| by_key[&s.key()].clone()).collect();
    for r in &scenarios {
        if let ScenarioOutcome::Failed { reason } = &r.outcome {
            warnings.push(format!("{}: {reason}", r.label));
        }
    }

    let mut curves = Vec::new();
    if config.curves {
        for &p in &config.pole_counts {
            let series: Vec<&ScenarioResult> = curve_speeds(p)
                .into_iter()
                .map(|v| {
                    by_key[&Scenario {
                        pole_count: p,
                        rotor_slot_shape: config.curve_rotor_slot_shape,
                        rated_speed: v,
                    }
                    .key()]
                })
                .collect();
            for (param, _) in CURVE_PARAMETERS {
                curves.push(CurveSeries {
                    parameter: param.to_string(),
                    pole_count: p,
                    points: series
                        .iter()
                        .map(|r| CurvePoint {
                            rated_speed: r.scenario.rated_speed,
                            value: r.report().and_then(|rep| curve_value(rep, param)),
                        })
                        .collect(),
                });
            }
        }
    }

    let mut report = StudyReport {
        schema_version: STUDY_SCHEMA_VERSION,
        scenarios,
        curves,
        best: None,
        warnings,
    };
    if !report.scenarios.is_empty() {
        match select_best(&report, config.selection) {
            Ok(sel) => {
                if let Some(e) = config.expected_best {
                    if sel.scenario.key() != e.key() {
                        report.warnings.push(format!(
                            "selection policy picked {}, not the expected {}",
                            sel.label,
                            e.label()
                        ));
                    }
                }
                report.best = Some(sel);
            }
            Err(_) => report.warnings.push("no feasible scenario".to_string()),
        }
    }
    Ok(report)
}

/// Plotted parameter families and the report field behind each.
pub const CURVE_PARAMETERS: [(&str, &str); 10] = [
    ("stator_inner_diameter", "design.stator_inner_diameter"),
    ("core_length", "design.core_length"),
    ("volume", "volume"),
    ("mass", "mass"),
    ("inertia", "inertia"),
    ("cost", "cost"),
    ("breakdown_torque_base", "breakdown_torque_base"),
    ("breakdown_torque_max", "breakdown_torque_max"),
    ("efficiency", "efficiency"),
    ("power_factor", "power_factor"),
];

fn curve_value(report: &PerformanceReport, parameter: &str) -> Option<f64> {
    match parameter {
        "stator_inner_diameter" => Some(report.design.stator_inner_diameter),
        "core_length" => Some(report.design.core_length),
        other => report.field(other),
    }
}

/// Best feasible scenario under `policy`; remaining ties go to table order.
pub fn select_best(report: &StudyReport, policy: SelectionPolicy) -> Result<Selection> {
    let mut feasible: Vec<(&ScenarioResult, &PerformanceReport)> = report
        .scenarios
        .iter()
        .filter(|r| r.is_feasible())
        .filter_map(|r| r.report().map(|rep| (r, rep)))
        .collect();
    feasible.sort_by(|(ra, a), (rb, b)| {
        let eta = b.efficiency.total_cmp(&a.efficiency);
        let mass = a.mass.total_cmp(&b.mass);
        let cost = a.cost.total_cmp(&b.cost);
        match policy {
            SelectionPolicy::EfficiencyFirst => eta.then(mass).then(cost),
            SelectionPolicy::MassFirst => mass.then(eta).then(cost),
            SelectionPolicy::CostFirst => cost.then(eta).then(mass),
        }
        .then(cmp_scenarios(&ra.scenario, &rb.scenario))
    });
    let (winner, w) = *feasible.first().ok_or(EvimError::NoFeasibleScenario)?;
    let mut rationale = format!(
        "{} ranks first by {} among {} feasible scenario(s): {:.2} %, {:.2} kg, {:.1} $",
        winner.label,
        match policy {
            SelectionPolicy::EfficiencyFirst => "efficiency",
            SelectionPolicy::MassFirst => "mass",
            SelectionPolicy::CostFirst => "cost",
        },
        feasible.len(),
        100.0 * w.efficiency,
        w.mass,
        w.cost
    );
    if let Some((r, rep)) = feasible.get(1) {
        let _ = write!(
            rationale,
            "; runner-up {}: {:.2} %, {:.2} kg, {:.1} $",
            r.label,
            100.0 * rep.efficiency,
            rep.mass,
            rep.cost
        );
    }
    Ok(Selection {
        label: winner.label.clone(),
        scenario: winner.scenario,
        rationale,
    })
}

/// Table rows: heading and decimals. `None` entries are filled per scenario.
const TABLE_ROWS: [(&str, usize); 14] = [
    ("L (m)", 4),
    ("D_o (m)", 4),
    ("D (m)", 4),
    ("W (kg)", 2),
    ("V (m^3)", 5),
    ("C ($)", 1),
    ("J (kg m^2)", 4),
    ("eta (%)", 2),
    ("pf", 3),
    ("T (C)", 2),
    ("T_pm (N m)", 3),
    ("T_pb (N m)", 2),
    ("W_s (m)", 4),
    ("d_s (m)", 4),
];

const SLOT_DECIMALS: usize = 4;

fn table_values(rep: &PerformanceReport) -> [f64; 14] {
    let d = &rep.design;
    [
        d.core_length,
        rep.geometry.stator_outer_diameter,
        d.stator_inner_diameter,
        rep.mass,
        rep.volume,
        rep.cost,
        rep.inertia,
        100.0 * rep.efficiency,
        rep.power_factor,
        rep.temperature_rise,
        rep.breakdown_torque_max,
        rep.breakdown_torque_base,
        d.stator_slot_width,
        d.stator_slot_depth,
    ]
}

/// Parameter-by-scenario comparison table with formatted cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignTable {
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<String>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Text,
}

impl std::str::FromStr for TableFormat {
    type Err = EvimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "text" => Ok(TableFormat::Text),
            other => Err(EvimError::Invalid(format!(
                "unknown table format `{other}`"
            ))),
        }
    }
}

/// Round-rotor columns share a single `W_r=d_r` row; rectangular columns use
/// separate `W_r` and `d_r` rows. Cells that do not apply, and every cell of
/// a failed scenario, are empty.
pub fn design_table(report: &StudyReport) -> DesignTable {
    let cols = &report.scenarios;
    let columns = cols.iter().map(|r| r.label.clone()).collect();
    let mut rows: Vec<(String, Vec<String>)> = TABLE_ROWS
        .iter()
        .enumerate()
        .map(|(i, &(name, dec))| {
            let cells = cols
                .iter()
                .map(|r| {
                    r.report()
                        .map(|rep| format!("{:.*}", dec, table_values(rep)[i]))
                        .unwrap_or_default()
                })
                .collect();
            (name.to_string(), cells)
        })
        .collect();
    let has = |shape| cols.iter().any(|r| r.scenario.rotor_slot_shape == shape);
    let slot_row = |name: &str, shape: SlotShape, pick: fn(&DesignVector) -> f64| {
        let cells = cols
            .iter()
            .map(|r| match r.report() {
                Some(rep) if r.scenario.rotor_slot_shape == shape => {
                    format!("{:.*}", SLOT_DECIMALS, pick(&rep.design))
                }
                _ => String::new(),
            })
            .collect();
        (name.to_string(), cells)
    };
    if has(SlotShape::Rectangular) {
        rows.push(slot_row("W_r (m)", SlotShape::Rectangular, |d| {
            d.rotor_slot_width
        }));
        rows.push(slot_row("d_r (m)", SlotShape::Rectangular, |d| {
            d.rotor_slot_depth
        }));
    }
    if has(SlotShape::Round) {
        rows.push(slot_row("W_r=d_r (m)", SlotShape::Round, |d| {
            d.rotor_slot_width
        }));
    }
    DesignTable { columns, rows }
}

impl DesignTable {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["parameter".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for (name, cells) in &self.rows {
            let mut rec = vec![name.clone()];
            rec.extend(cells.iter().cloned());
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| EvimError::Csv(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| EvimError::Csv(e.to_string()))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let header = r.headers()?.clone();
        let columns = header.iter().skip(1).map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let mut it = rec.iter();
            let name = it.next().unwrap_or_default().to_string();
            rows.push((name, it.map(str::to_string).collect()));
        }
        Ok(DesignTable { columns, rows })
    }

    /// Right-aligned columns, two spaces apart.
    pub fn to_text(&self) -> String {
        let first = self
            .rows
            .iter()
            .map(|(n, _)| n.len())
            .chain(std::iter::once("parameter".len()))
            .max()
            .unwrap_or(0);
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(j, c)| {
                self.rows
                    .iter()
                    .map(|(_, cells)| cells[j].len())
                    .chain(std::iter::once(c.len()))
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        let _ = write!(out, "{:<first$}", "parameter");
        for (c, w) in self.columns.iter().zip(&widths) {
            let _ = write!(out, "  {c:>w$}");
        }
        out.push('\n');
        for (name, cells) in &self.rows {
            let _ = write!(out, "{name:<first$}");
            for (c, w) in cells.iter().zip(&widths) {
                let _ = write!(out, "  {c:>w$}");
            }
            out.push('\n');
        }
        out
    }
}

pub fn emit_design_table(report: &StudyReport, format: TableFormat) -> Result<String> {
    let table = design_table(report);
    match format {
        TableFormat::Csv => table.to_csv(),
        TableFormat::Text => {
            let mut text = table.to_text();
            let flagged: Vec<&str> = report
                .scenarios
                .iter()
                .filter(|r| !r.is_feasible())
                .map(|r| r.label.as_str())
                .collect();
            if !flagged.is_empty() {
                let _ = writeln!(text, "\ninfeasible: {}", flagged.join(", "));
            }
            if let Some(b) = &report.best {
                let _ = writeln!(text, "best: {}", b.rationale);
            }
            Ok(text)
        }
    }
}

/// One CSV per parameter family and pole count: `(file name, contents)`.
pub fn emit_speed_curves(report: &StudyReport) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for s in &report.curves {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["rated_speed", "value", "pole_count"])?;
        for p in &s.points {
            w.write_record([
                p.rated_speed.to_string(),
                p.value.map(|v| format!("{v:.9e}")).unwrap_or_default(),
                s.pole_count.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| EvimError::Csv(e.to_string()))?;
        out.push((
            format!("curves_{}_{}p.csv", s.parameter, s.pole_count),
            String::from_utf8(bytes).map_err(|e| EvimError::Csv(e.to_string()))?,
        ));
    }
    Ok(out)
}

/// Write `study.json`, `table.csv`, `table.txt` and any curve files to `dir`.
pub fn write_study(report: &StudyReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(
        dir.join("study.json"),
        serde_json::to_string_pretty(report)?,
    )?;
    std::fs::write(
        dir.join("table.csv"),
        emit_design_table(report, TableFormat::Csv)?,
    )?;
    std::fs::write(
        dir.join("table.txt"),
        emit_design_table(report, TableFormat::Text)?,
    )?;
    for (name, text) in emit_speed_curves(report)? {
        std::fs::write(dir.join(name), text)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> StudyConfig {
        StudyConfig {
            pole_counts: vec![2],
            rotor_slot_shapes: vec![SlotShape::Rectangular, SlotShape::Round],
            rated_speeds: vec![1800.0],
            optimizer: HJConfig {
                start_fractions: vec![0.5],
                ..HJConfig::default()
            },
            ..StudyConfig::default()
        }
    }

    #[test]
    fn default_grid_has_twelve_scenarios_in_table_order() {
        let s = StudyConfig::default().scenarios();
        assert_eq!(s.len(), 12);
        let rr: Vec<f64> = s
            .iter()
            .filter(|s| s.pole_count == 2 && s.rotor_slot_shape == SlotShape::Rectangular)
            .map(|s| s.rated_speed)
            .collect();
        assert_eq!(rr, vec![1600.0, 1800.0, 2000.0]);
        assert_eq!(s[0].label(), "2p rect-rect 1600");
    }

    #[test]
    fn curve_speed_ranges() {
        let two = curve_speeds(2);
        assert_eq!(
            (two[0], *two.last().unwrap(), two.len()),
            (1400.0, 2800.0, 8)
        );
        let four = curve_speeds(4);
        assert_eq!(
            (four[0], *four.last().unwrap(), four.len()),
            (1400.0, 2100.0, 8)
        );
    }

    #[test]
    fn empty_speed_list_gives_empty_report_with_warning() {
        let cfg = StudyConfig {
            rated_speeds: vec![],
            ..StudyConfig::default()
        };
        let r = run_study(&cfg).unwrap();
        assert!(r.scenarios.is_empty() && r.best.is_none());
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = StudyConfig {
            pole_counts: vec![6],
            ..StudyConfig::default()
        };
        assert!(matches!(run_study(&cfg), Err(EvimError::Invalid(_))));
        let cfg = StudyConfig {
            rated_speeds: vec![9000.0],
            ..StudyConfig::default()
        };
        assert!(matches!(run_study(&cfg), Err(EvimError::Invalid(_))));
        let json = r#"{"pole_counts": [2], "colour": "red"}"#;
        assert!(StudyConfig::from_json(json).is_err());
    }

    #[test]
    fn small_study_table_round_trips() {
        let r = run_study(&small_config()).unwrap();
        assert_eq!(r.scenarios.len(), 2);
        let t = design_table(&r);
        let names: Vec<&str> = t.rows.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names.len(), 17);
        assert_eq!(&names[14..], &["W_r (m)", "d_r (m)", "W_r=d_r (m)"]);
        let csv = t.to_csv().unwrap();
        assert_eq!(DesignTable::from_csv(&csv).unwrap(), t);
        let eta = &t.rows[7].1[0];
        assert_eq!(eta.split('.').nth(1).map(str::len), Some(2));
        let rep = r.scenarios[0].report().unwrap();
        let parsed: f64 = eta.parse().unwrap();
        assert!((parsed - 100.0 * rep.efficiency).abs() <= 0.005 + 1e-12);
        // round rotor column leaves the rectangular rows empty
        assert_eq!(t.rows[14].1[1], "");
        assert_ne!(t.rows[16].1[1], "");
        let text = t.to_text();
        assert_eq!(text.lines().count(), 18);
    }

    #[test]
    fn selection_prefers_efficiency_then_mass() {
        let mut r = run_study(&small_config()).unwrap();
        let best = select_best(&r, SelectionPolicy::EfficiencyFirst).unwrap();
        let effs: Vec<f64> = r
            .scenarios
            .iter()
            .filter(|s| s.is_feasible())
            .map(|s| s.report().unwrap().efficiency)
            .collect();
        let chosen = r
            .scenarios
            .iter()
            .find(|s| s.label == best.label)
            .unwrap()
            .report()
            .unwrap()
            .efficiency;
        assert!(effs.iter().all(|&e| e <= chosen));

        // equal efficiency: the lighter design wins
        let a = r.scenarios[0].clone();
        let mut b = a.clone();
        b.scenario.rated_speed = 1900.0;
        b.label = b.scenario.label();
        if let ScenarioOutcome::Optimized(o) = &mut b.outcome {
            o.report.mass -= 1.0;
        }
        r.scenarios = vec![a, b.clone()];
        assert_eq!(
            select_best(&r, SelectionPolicy::EfficiencyFirst)
                .unwrap()
                .label,
            b.label
        );
        r.scenarios.reverse();
        assert_eq!(
            select_best(&r, SelectionPolicy::EfficiencyFirst)
                .unwrap()
                .label,
            b.label
        );
        assert_eq!(
            select_best(&r, SelectionPolicy::MassFirst).unwrap().label,
            b.label
        );

        for s in &mut r.scenarios {
            if let ScenarioOutcome::Optimized(o) = &mut s.outcome {
                o.feasible = false;
            }
        }
        assert_eq!(
            select_best(&r, SelectionPolicy::EfficiencyFirst).unwrap_err(),
            EvimError::NoFeasibleScenario
        );
    }

    #[test]
    fn curves_have_one_row_per_speed() {
        let cfg = StudyConfig {
            pole_counts: vec![4],
            rotor_slot_shapes: vec![SlotShape::Rectangular],
            rated_speeds: vec![1800.0],
            curves: true,
            optimizer: HJConfig {
                start_fractions: vec![0.5],
                max_evaluations: 400,
                ..HJConfig::default()
            },
            ..StudyConfig::default()
        };
        let r = run_study(&cfg).unwrap();
        let files = emit_speed_curves(&r).unwrap();
        assert_eq!(files.len(), CURVE_PARAMETERS.len());
        assert!(files.iter().any(|(n, _)| n == "curves_efficiency_4p.csv"));
        for (_, text) in &files {
            assert_eq!(text.lines().count(), 1 + curve_speeds(4).len());
        }
    }
}
