//! Serializable report documents. Numbers are written with 17 significant
//! digits so that identical runs give byte-identical output.

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::value::RawValue;

use phasepair::fmt::sig17;
use phasepair::pipeline::{Analysis, RunConfig, NORMALIZATION_NOTE};
use phasepair::principal::{Classification, PredicateStatus, QLimit};
use phasepair::verify::Check;
use phasepair::zeros::ZeroGapTable;

/// A number in fixed 17-digit form; non-finite values become `null`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(sig17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

/// Parameters as a JSON object, in the order given.
#[derive(Clone, Debug, PartialEq)]
pub struct Params(pub Vec<(String, f64)>);

impl Serialize for Params {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, &Num(*v))?;
        }
        map.end()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TolerancesDoc {
    pub rtol: Num,
    pub atol: Num,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConfigDoc {
    pub equation: String,
    pub params: Params,
    pub x0: Option<Num>,
    pub xmax: Num,
    pub rtol: Num,
    pub atol: Num,
    pub window_fraction: Num,
    pub seed: u64,
}

impl ConfigDoc {
    pub fn new(c: &RunConfig<f64>) -> Self {
        ConfigDoc {
            equation: c.equation.clone(),
            params: Params(c.params.clone()),
            x0: c.x0.map(Num),
            xmax: Num(c.xmax),
            rtol: Num(c.rtol),
            atol: Num(c.atol),
            window_fraction: Num(c.window_fraction),
            seed: c.seed,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Coefficients {
    #[serde(rename = "A")]
    pub a: Num,
    #[serde(rename = "B")]
    pub b: Num,
    #[serde(rename = "C")]
    pub c: Num,
}

#[derive(Clone, Debug, Serialize)]
pub struct PredicateDoc {
    pub status: &'static str,
    pub at: Option<Num>,
    pub violations: Option<usize>,
    pub reason: Option<String>,
}

impl PredicateDoc {
    fn new(p: &PredicateStatus<f64>) -> Self {
        match p {
            PredicateStatus::Holds => PredicateDoc {
                status: "holds",
                at: None,
                violations: None,
                reason: None,
            },
            PredicateStatus::Fails { at, violations, reason } => PredicateDoc {
                status: "fails",
                at: at.map(Num),
                violations: Some(*violations),
                reason: Some(reason.clone()),
            },
            PredicateStatus::NotDecidable(r) => PredicateDoc {
                status: "not_decidable",
                at: None,
                violations: None,
                reason: Some(r.clone()),
            },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassifyDoc {
    pub windows: Vec<[Num; 2]>,
    pub v_means: Vec<Num>,
    pub dv_means: Vec<Num>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub fit_window: [Num; 2],
    pub classify: ClassifyDoc,
    pub principal: Vec<String>,
    pub q_limit: String,
    pub condition_points: usize,
    pub wronskian_drift: Num,
    pub appell_points: usize,
}

/// The `analyze` document.
#[derive(Clone, Debug, Serialize)]
pub struct AnalyzeReport {
    pub equation: String,
    pub params: Params,
    pub span: [Num; 2],
    pub tolerances: TolerancesDoc,
    pub wronskian: Num,
    pub coefficients: Coefficients,
    pub classification: &'static str,
    #[serde(rename = "L")]
    pub l: Option<Num>,
    #[serde(rename = "K")]
    pub k: Option<Num>,
    pub k1: Num,
    pub k2: Num,
    pub objective: Num,
    pub appell_residual: Num,
    pub corollary1: PredicateDoc,
    pub corollary2: PredicateDoc,
    pub remark_finite_q: PredicateDoc,
    pub config: ConfigDoc,
    pub normalization_note: &'static str,
    pub diagnostics: Diagnostics,
}

fn q_limit_text(q: &QLimit<f64>) -> String {
    match q {
        QLimit::Finite(v) => format!("finite ({})", sig17(*v)),
        QLimit::Zero => "zero".into(),
        QLimit::Infinite => "infinite".into(),
        QLimit::Unknown => "unknown".into(),
    }
}

fn pair(p: (f64, f64)) -> [Num; 2] {
    [Num(p.0), Num(p.1)]
}

impl AnalyzeReport {
    pub fn new(a: &Analysis<f64>) -> Self {
        let r = &a.fit.report;
        let span = a.span();
        AnalyzeReport {
            equation: a.config.equation.clone(),
            params: Params(a.model.params().to_vec()),
            span: pair(span),
            tolerances: TolerancesDoc {
                rtol: Num(a.config.rtol),
                atol: Num(a.config.atol),
            },
            wronskian: Num(a.wronskian),
            coefficients: Coefficients {
                a: Num(r.coeffs.a),
                b: Num(r.coeffs.b),
                c: Num(r.coeffs.c),
            },
            classification: r.classification.tag(),
            l: r.l.map(Num),
            k: r.k.map(Num),
            k1: Num(r.k1_est),
            k2: Num(r.k2_est),
            objective: Num(r.objective),
            appell_residual: Num(a.appell.max),
            corollary1: PredicateDoc::new(&a.conditions.corollary1),
            corollary2: PredicateDoc::new(&a.conditions.corollary2),
            remark_finite_q: PredicateDoc::new(&a.conditions.remark_finite_q),
            config: ConfigDoc::new(&a.config),
            normalization_note: NORMALIZATION_NOTE,
            diagnostics: Diagnostics {
                fit_window: pair(r.window),
                classify: ClassifyDoc {
                    windows: r.classify.windows.iter().map(|w| pair(*w)).collect(),
                    v_means: r.classify.v_means.iter().map(|v| Num(*v)).collect(),
                    dv_means: r.classify.dv_means.iter().map(|v| Num(*v)).collect(),
                    notes: r.classify.diagnostics.clone(),
                },
                principal: r.diagnostics.clone(),
                q_limit: q_limit_text(&a.conditions.q_limit),
                condition_points: a.conditions.checked,
                wronskian_drift: Num(a.fit.pair.max_wronskian_drift()),
                appell_points: a.appell.points,
            },
        }
    }

    /// Scalar fields as `key,value` lines.
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<Num>| x.map(|n| sig17(n.0)).unwrap_or_default();
        let mut rows: Vec<(String, String)> = vec![("equation".into(), self.equation.clone())];
        for (k, v) in &self.params.0 {
            rows.push((format!("param.{k}"), sig17(*v)));
        }
        rows.extend([
            ("x0".into(), sig17(self.span[0].0)),
            ("xmax".into(), sig17(self.span[1].0)),
            ("rtol".into(), sig17(self.tolerances.rtol.0)),
            ("atol".into(), sig17(self.tolerances.atol.0)),
            ("wronskian".into(), sig17(self.wronskian.0)),
            ("A".into(), sig17(self.coefficients.a.0)),
            ("B".into(), sig17(self.coefficients.b.0)),
            ("C".into(), sig17(self.coefficients.c.0)),
            ("classification".into(), self.classification.to_string()),
            ("L".into(), opt(self.l)),
            ("K".into(), opt(self.k)),
            ("k1".into(), sig17(self.k1.0)),
            ("k2".into(), sig17(self.k2.0)),
            ("objective".into(), sig17(self.objective.0)),
            ("appell_residual".into(), sig17(self.appell_residual.0)),
            ("corollary1".into(), self.corollary1.status.to_string()),
            ("corollary2".into(), self.corollary2.status.to_string()),
            ("remark_finite_q".into(), self.remark_finite_q.status.to_string()),
        ]);
        let mut out = String::from("key,value\n");
        for (k, v) in rows {
            out.push_str(&format!("{k},{v}\n"));
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GapRowDoc {
    pub j: usize,
    pub x_crit: Num,
    pub x_zero: Num,
    pub gap: Num,
    pub phase_gap: Num,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapSummary {
    pub d_first: Option<Num>,
    pub d_last: Option<Num>,
    pub delta_last: Option<Num>,
}

/// The `zeros` document.
#[derive(Clone, Debug, Serialize)]
pub struct ZerosReport {
    pub equation: String,
    pub params: Params,
    pub span: [Num; 2],
    pub classification: &'static str,
    pub coefficients: Coefficients,
    pub rows: Vec<GapRowDoc>,
    pub summary: GapSummary,
    pub config: ConfigDoc,
    pub normalization_note: &'static str,
    pub diagnostics: Vec<String>,
    #[serde(skip)]
    csv: String,
}

impl ZerosReport {
    pub fn new(a: &Analysis<f64>, t: &ZeroGapTable<f64>) -> Self {
        let r = &a.fit.report;
        let mut diagnostics = r.diagnostics.clone();
        diagnostics.extend(r.classify.diagnostics.iter().cloned());
        ZerosReport {
            equation: a.config.equation.clone(),
            params: Params(a.model.params().to_vec()),
            span: pair(a.span()),
            classification: r.classification.tag(),
            coefficients: Coefficients {
                a: Num(r.coeffs.a),
                b: Num(r.coeffs.b),
                c: Num(r.coeffs.c),
            },
            rows: t
                .rows
                .iter()
                .map(|row| GapRowDoc {
                    j: row.j,
                    x_crit: Num(row.x_crit),
                    x_zero: Num(row.x_zero),
                    gap: Num(row.gap),
                    phase_gap: Num(row.phase_gap),
                })
                .collect(),
            summary: GapSummary {
                d_first: t.d_first().map(Num),
                d_last: t.d_last().map(Num),
                delta_last: t.delta_last().map(Num),
            },
            config: ConfigDoc::new(&a.config),
            normalization_note: NORMALIZATION_NOTE,
            diagnostics,
            csv: t.to_csv(),
        }
    }

    /// The gap table followed by a `# summary:` comment line.
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<Num>| x.map(|n| sig17(n.0)).unwrap_or_else(|| "nan".into());
        let mut out = self.csv.clone();
        if !out.ends_with('\n') {
            out.push('\n');
        }
        out.push_str(&format!(
            "# summary: d_first={}, d_last={}, delta_last={}\n",
            opt(self.summary.d_first),
            opt(self.summary.d_last),
            opt(self.summary.delta_last)
        ));
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckDoc {
    pub name: String,
    pub value: Num,
    pub bound: Num,
    pub pass: bool,
    pub detail: String,
}

/// The `verify` document.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub suite: &'static str,
    pub seed: u64,
    pub rtol: Option<Num>,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<CheckDoc>,
}

impl VerifyReport {
    pub fn new(suite: &'static str, seed: u64, rtol: Option<f64>, checks: &[Check]) -> Self {
        let passed = checks.iter().filter(|c| c.pass).count();
        VerifyReport {
            suite,
            seed,
            rtol: rtol.map(Num),
            passed,
            failed: checks.len() - passed,
            checks: checks
                .iter()
                .map(|c| CheckDoc {
                    name: c.name.clone(),
                    value: Num(c.value),
                    bound: Num(c.bound),
                    pass: c.pass,
                    detail: c.detail.clone(),
                })
                .collect(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }

    /// One line per check.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{} {}: value {} bound {}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                fmt_num(c.value),
                fmt_num(c.bound)
            ));
            if !c.detail.is_empty() {
                out.push_str(&format!(" ({})", c.detail));
            }
            out.push('\n');
        }
        out.push_str(&format!("{} passed, {} failed\n", self.passed, self.failed));
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("status,name,value,bound,detail\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                if c.pass { "PASS" } else { "FAIL" },
                csv_field(&c.name),
                fmt_num(c.value),
                fmt_num(c.bound),
                csv_field(&c.detail)
            ));
        }
        out
    }
}

fn fmt_num(n: Num) -> String {
    if n.0.is_finite() {
        sig17(n.0)
    } else {
        "nan".into()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Tag of a classification, with the limit when known.
pub fn describe(c: &Classification<f64>) -> String {
    match c {
        Classification::LFinite { l } => format!("L-finite (L = {})", sig17(*l)),
        Classification::LZero { k } => format!("L-zero (K = {})", sig17(*k)),
        Classification::LInfinite { k } => format!("L-infinite (K = {})", sig17(*k)),
        Classification::Undetermined => "undetermined".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_use_seventeen_digits() {
        assert_eq!(serde_json::to_string(&Num(0.1)).unwrap(), "0.10000000000000001");
        assert_eq!(serde_json::to_string(&Num(f64::NAN)).unwrap(), "null");
        let p = Params(vec![("nu".into(), 0.5), ("a".into(), 2.0)]);
        assert_eq!(
            serde_json::to_string(&p).unwrap(),
            r#"{"nu":0.50000000000000000,"a":2.0000000000000000}"#
        );
    }

    #[test]
    fn csv_fields_are_quoted() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
