use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::family::{evaluate, family_state, fit_points, validate_ladder, with_threads};
use super::family::{FamilyId, FamilyState, MeasureParams, SpinRule, SweepPoint};
use super::fit::ScalingFit;
use crate::error::{Error, Result};
use crate::io::format_number;
use crate::measures::MeasureId;

/// Scaling classes of the table cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SizeClass {
    #[serde(rename = "O(N)")]
    N,
    #[serde(rename = "O(sqrt N)")]
    SqrtN,
    #[serde(rename = "O(1)")]
    One,
    #[serde(rename = "O(1/M)")]
    InvM,
    /// The measure does not apply to the family (single component).
    #[serde(rename = "n.d.")]
    NotDefined,
    /// The measure applies but is undefined on some member.
    #[serde(rename = "undefined")]
    UndefinedForInput,
    #[serde(rename = "unclassified")]
    Unclassified,
}

impl SizeClass {
    pub fn label(&self) -> String {
        serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
    }
}

/// Which size the cell is swept over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    N,
    M,
}

/// Exponent bands: `[0.85, 1.15]` is `O(N)`, `[0.35, 0.65]` is `O(sqrt N)`,
/// `[-0.15, 0.15]` is `O(1)`; in a sweep over `M`, `[-1.15, -0.85]` is `O(1/M)`.
pub fn classify(exponent: f64, variable: SweepVariable) -> SizeClass {
    let within = |c: f64| (exponent - c).abs() <= 0.15;
    match variable {
        SweepVariable::N if within(1.0) => SizeClass::N,
        SweepVariable::N if within(0.5) => SizeClass::SqrtN,
        SweepVariable::N if within(0.0) => SizeClass::One,
        SweepVariable::M if within(-1.0) => SizeClass::InvM,
        SweepVariable::M if within(0.0) => SizeClass::One,
        _ => SizeClass::Unclassified,
    }
}

/// Table rows, top to bottom.
pub const TABLE_ROWS: [MeasureId; 8] = [
    MeasureId::MSquared,
    MeasureId::RelativeFisher,
    MeasureId::CDelta,
    MeasureId::DBar,
    MeasureId::SizePg,
    MeasureId::IndexP,
    MeasureId::NEff,
    MeasureId::IWigner,
];

/// Published classification of each cell.
pub fn paper_target(measure: MeasureId, family: FamilyId) -> SizeClass {
    use FamilyId::*;
    use MeasureId::*;
    match (family, measure) {
        (EvenCat, _) => SizeClass::N,
        (DisplacedSinglePhoton, SizePg) => SizeClass::SqrtN,
        (DisplacedSinglePhoton, _) => SizeClass::One,
        (FockSuperposition, MSquared) => SizeClass::InvM,
        (FockSuperposition, RelativeFisher) => SizeClass::One,
        (FockSuperposition, _) => SizeClass::N,
        (Fock, IndexP | NEff | IWigner) => SizeClass::N,
        (Fock, _) => SizeClass::NotDefined,
        (Coherent, _) => SizeClass::One,
    }
}

/// Flag carried by the coarse-grained size of the even cat: the published
/// `O(N)` has no stated channel, and homodyne smearing separates the
/// components only by `O(sqrt N)`.
pub const PAPER_DISCREPANCY: &str = "paper-discrepancy";

fn discrepancy(measure: MeasureId, family: FamilyId) -> bool {
    measure == MeasureId::SizePg && family == FamilyId::EvenCat
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Table1Params {
    pub ladder: Vec<usize>,
    pub spin_rule: SpinRule,
    pub measure: MeasureParams,
    /// `N` held fixed in the sweep over `M`.
    pub m_sweep_size: usize,
    pub m_sweep_spins: Vec<usize>,
}

impl Default for Table1Params {
    fn default() -> Self {
        Self {
            ladder: vec![8, 16, 32, 64],
            spin_rule: SpinRule::default(),
            measure: MeasureParams::default(),
            m_sweep_size: 8,
            m_sweep_spins: vec![1600, 3200, 6400, 12800],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Table1Cell {
    pub measure: MeasureId,
    pub family: FamilyId,
    pub sweep_variable: SweepVariable,
    pub paper: SizeClass,
    pub class: SizeClass,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<ScalingFit>,
    pub points: Vec<SweepPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
    /// Whether the class agrees with the paper; absent for flagged cells.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matches: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Table1Report {
    pub params: Table1Params,
    pub cells: Vec<Table1Cell>,
}

/// Sweeps every row over every family and classifies the fitted exponents.
/// Failures stay inside their cell.
pub fn table1(params: &Table1Params, threads: usize) -> Result<Table1Report> {
    validate_ladder(&params.ladder)?;
    validate_ladder(&params.m_sweep_spins)?;
    if !(params.measure.delta > 0.0 && params.measure.delta <= 0.5) {
        return Err(Error::Domain(format!("delta = {} outside (0, 1/2]", params.measure.delta)));
    }
    if !(params.measure.p_g > 0.5 && params.measure.p_g < 1.0) {
        return Err(Error::Domain(format!("P_g = {} outside (1/2, 1)", params.measure.p_g)));
    }
    with_threads(threads, || build(params))?
}

type Member = (usize, usize, Result<FamilyState>);

fn build(params: &Table1Params) -> Result<Table1Report> {
    let mut specs: Vec<(FamilyId, usize, SpinRule)> = Vec::new();
    for fam in FamilyId::TABLE {
        for &n in &params.ladder {
            specs.push((fam, n, params.spin_rule));
        }
    }
    for &m in &params.m_sweep_spins {
        specs.push((FamilyId::FockSuperposition, params.m_sweep_size, SpinRule::Fixed(m)));
    }
    let members: Vec<Member> = specs
        .par_iter()
        .map(|&(fam, n, rule)| (n, rule.spins(n), family_state(fam, n, rule)))
        .collect();
    let ladder_len = params.ladder.len();
    let column = |fam: FamilyId| {
        let i = FamilyId::TABLE.iter().position(|&f| f == fam).unwrap();
        &members[i * ladder_len..(i + 1) * ladder_len]
    };
    let m_sweep = &members[FamilyId::TABLE.len() * ladder_len..];

    let mut jobs: Vec<(MeasureId, FamilyId, SweepVariable, &[Member])> = Vec::new();
    for measure in TABLE_ROWS {
        for fam in FamilyId::TABLE {
            if paper_target(measure, fam) == SizeClass::InvM {
                jobs.push((measure, fam, SweepVariable::M, m_sweep));
            } else {
                jobs.push((measure, fam, SweepVariable::N, column(fam)));
            }
        }
    }
    let cells = jobs
        .par_iter()
        .map(|&(measure, fam, var, members)| cell(measure, fam, var, members, &params.measure))
        .collect();
    Ok(Table1Report { params: params.clone(), cells })
}

fn cell(
    measure: MeasureId,
    family: FamilyId,
    variable: SweepVariable,
    members: &[Member],
    params: &MeasureParams,
) -> Table1Cell {
    let results: Vec<(SweepPoint, bool)> = members
        .par_iter()
        .map(|(n, spins, st)| {
            let r = st.as_ref().map_err(Clone::clone).and_then(|st| evaluate(st, measure, params));
            let undefined = matches!(r, Err(Error::Undefined(_)));
            let point = match r {
                Ok(v) => SweepPoint { size: *n, spins: *spins, value: Some(v), error: None },
                Err(e) => SweepPoint { size: *n, spins: *spins, value: None, error: Some(e.to_string()) },
            };
            (point, undefined)
        })
        .collect();
    let all_undefined = results.iter().all(|r| r.1);
    let any_undefined = results.iter().any(|r| r.1);
    let points: Vec<SweepPoint> = results.into_iter().map(|r| r.0).collect();
    let paper = paper_target(measure, family);
    let (fit, error) = match variable {
        SweepVariable::N => fit_points(&points, |p| p.size as f64),
        SweepVariable::M => fit_points(&points, |p| p.spins as f64),
    };
    let class = match &fit {
        Some(f) => classify(f.exponent, variable),
        None if all_undefined && paper == SizeClass::NotDefined => SizeClass::NotDefined,
        None if any_undefined => SizeClass::UndefinedForInput,
        None => SizeClass::Unclassified,
    };
    let flagged = discrepancy(measure, family);
    Table1Cell {
        measure,
        family,
        sweep_variable: variable,
        paper,
        class,
        fit,
        points,
        error: if class == SizeClass::NotDefined { None } else { error },
        flag: flagged.then(|| PAPER_DISCREPANCY.to_string()),
        matches: (!flagged).then_some(class == paper),
    }
}

impl Table1Report {
    pub fn cell(&self, measure: MeasureId, family: FamilyId) -> Option<&Table1Cell> {
        self.cells.iter().find(|c| c.measure == measure && c.family == family)
    }

    /// Cells whose class is checked against the paper: every defined cell
    /// except the flagged one.
    pub fn checked_cells(&self) -> impl Iterator<Item = &Table1Cell> {
        self.cells.iter().filter(|c| c.paper != SizeClass::NotDefined && c.flag.is_none())
    }

    /// `(matching, checked)` counts over the checked cells.
    pub fn agreement(&self) -> (usize, usize) {
        let checked: Vec<_> = self.checked_cells().collect();
        (checked.iter().filter(|c| c.matches == Some(true)).count(), checked.len())
    }

    /// One row per measure; per family the exponent, its 95% half-width, the
    /// measured class and the paper's class.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("measure");
        for fam in FamilyId::TABLE {
            let f = fam.name();
            write!(out, ",{f}_exponent,{f}_ci95,{f}_class,{f}_paper_target").unwrap();
        }
        out.push_str(",notes\n");
        for measure in TABLE_ROWS {
            out.push_str(&measure.name());
            let mut notes = Vec::new();
            for fam in FamilyId::TABLE {
                let c = self.cell(measure, fam).expect("every cell is evaluated");
                let (e, ci) = c.fit.map(|f| (format_number(f.exponent), format_number(f.ci95))).unwrap_or_default();
                write!(out, ",{e},{ci},{},{}", c.class.label(), c.paper.label()).unwrap();
                notes.extend(cell_notes(c));
            }
            writeln!(out, ",{}", csv_quote(&notes.join("; "))).unwrap();
        }
        out
    }

    /// Aligned plain-text table.
    pub fn to_text(&self) -> String {
        let mut rows: Vec<Vec<String>> = vec![std::iter::once("measure".to_string())
            .chain(FamilyId::TABLE.iter().map(|f| f.name()))
            .collect()];
        let mut notes = Vec::new();
        for measure in TABLE_ROWS {
            let mut row = vec![measure.name()];
            for fam in FamilyId::TABLE {
                let c = self.cell(measure, fam).expect("every cell is evaluated");
                let exp = c
                    .fit
                    .map(|f| format!(" {:+.3}±{:.3}", f.exponent, f.ci95))
                    .unwrap_or_default();
                let mark = match (&c.flag, c.matches) {
                    (Some(_), _) => " (!)".to_string(),
                    (None, Some(false)) => format!(" (paper: {})", c.paper.label()),
                    _ => String::new(),
                };
                let var = if c.sweep_variable == SweepVariable::M { " [M]" } else { "" };
                row.push(format!("{}{exp}{var}{mark}", c.class.label()));
                notes.extend(cell_notes(c));
            }
            rows.push(row);
        }
        let widths: Vec<usize> =
            (0..rows[0].len()).map(|j| rows.iter().map(|r| r[j].chars().count()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for row in &rows {
            let line: Vec<String> =
                row.iter().zip(&widths).map(|(s, w)| format!("{s}{}", " ".repeat(w - s.chars().count()))).collect();
            writeln!(out, "{}", line.join("  ").trim_end()).unwrap();
        }
        let (ok, total) = self.agreement();
        writeln!(out, "\n{ok}/{total} checked cells agree with the published classes").unwrap();
        for n in notes {
            writeln!(out, "note: {n}").unwrap();
        }
        out
    }
}

fn cell_notes(c: &Table1Cell) -> Vec<String> {
    let mut notes = Vec::new();
    if let Some(flag) = &c.flag {
        notes.push(format!("{}/{}: {flag}, published {}", c.measure.name(), c.family.name(), c.paper.label()));
    }
    if let Some(e) = &c.error {
        notes.push(format!("{}/{}: {e}", c.measure.name(), c.family.name()));
    }
    notes
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bands() {
        assert_eq!(classify(0.97, SweepVariable::N), SizeClass::N);
        assert_eq!(classify(0.52, SweepVariable::N), SizeClass::SqrtN);
        assert_eq!(classify(-0.1, SweepVariable::N), SizeClass::One);
        assert_eq!(classify(0.75, SweepVariable::N), SizeClass::Unclassified);
        assert_eq!(classify(-0.95, SweepVariable::M), SizeClass::InvM);
        assert_eq!(classify(-0.95, SweepVariable::N), SizeClass::Unclassified);
    }

    #[test]
    fn published_grid_has_27_defined_cells() {
        let defined = TABLE_ROWS
            .iter()
            .flat_map(|&m| FamilyId::TABLE.iter().map(move |&f| paper_target(m, f)))
            .filter(|c| *c != SizeClass::NotDefined)
            .count();
        assert_eq!(defined, 27);
        assert_eq!(SizeClass::SqrtN.label(), "O(sqrt N)");
    }
}
