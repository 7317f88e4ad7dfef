//! Closed-form bounds and Monte Carlo estimators, and the reports that
//! confront one with the other.

pub mod bounds;
pub mod estimators;
pub mod stats;
pub mod tail;

use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use bounds::{
    calibrate_c_beta, holder_bound_rhs, holder_bracket, kappa, moment_bound_rhs, BoundValue,
    BoundVariant, HolderConstants, Increment, MomentBoundParams,
};
pub use estimators::*;
pub use stats::{bootstrap, wilson, Bootstrap, Interval, IntervalMethod};
pub use tail::{eta_window, stirling_check, tabulate_tail, tail_exponent, TailBoundParams, TailRow, TailTable};

/// Absolute tolerance for order checks under shared noise.
pub const TOL_COMPARISON: f64 = 1e-8;

/// Tidy table attached to a report; becomes one CSV per figure id.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub figure: String,
    pub columns: Vec<String>,
    #[serde(with = "lossless::rows")]
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(figure: &str, columns: &[&str]) -> Self {
        Self {
            figure: figure.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format_number(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Shortest round-trip decimal, with `inf`, `-inf`, `nan` spelled out.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:?}")
    }
}

/// Outcome of one claim.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim: String,
    pub description: String,
    #[serde(with = "lossless")]
    pub estimate: f64,
    pub interval: Option<Interval>,
    #[serde(with = "lossless::option")]
    pub bound: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
    pub replicas: usize,
    /// Digest of the inputs that produced the report; filled in by the runner.
    pub inputs_digest: String,
    /// Wall time. Deliberately not serialised so that reruns are
    /// byte-identical.
    #[serde(skip)]
    pub runtime: Option<Duration>,
    pub notes: Vec<String>,
    pub tables: Vec<Table>,
}

impl VerificationReport {
    pub fn new(claim: &str, description: &str, estimate: f64, pass: bool) -> Self {
        Self {
            claim: claim.into(),
            description: description.into(),
            estimate,
            interval: None,
            bound: None,
            tolerance: None,
            pass,
            replicas: 0,
            inputs_digest: String::new(),
            runtime: None,
            notes: Vec::new(),
            tables: Vec::new(),
        }
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn with_interval(mut self, interval: Interval) -> Self {
        self.interval = Some(interval);
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = Some(tol);
        self
    }

    pub fn with_replicas(mut self, n: usize) -> Self {
        self.replicas = n;
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn table(mut self, table: Table) -> Self {
        self.tables.push(table);
        self
    }

    /// Report for a negative control: passes iff `inner` failed.
    pub fn negative_control(inner: &VerificationReport, claim: &str) -> Self {
        let mut r = inner.clone();
        r.claim = claim.into();
        r.description = format!("negative control, must fail: {}", inner.description);
        r.pass = !inner.pass;
        r
    }
}

/// Human-readable table. Runtimes appear here only.
pub fn render_text(reports: &[VerificationReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<34} {:>14} {:>29} {:>12} {:>8} {:>6} {:>9}",
        "claim", "estimate", "interval", "bound", "replicas", "status", "runtime"
    );
    for r in reports {
        let interval = r
            .interval
            .map(|i| format!("[{:.4e}, {:.4e}]", i.lo, i.hi))
            .unwrap_or_else(|| "-".into());
        let bound = r.bound.map(|b| format!("{b:.4e}")).unwrap_or_else(|| "-".into());
        let runtime = r
            .runtime
            .map(|d| format!("{:.2}s", d.as_secs_f64()))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{:<34} {:>14.6e} {:>29} {:>12} {:>8} {:>6} {:>9}",
            r.claim,
            r.estimate,
            interval,
            bound,
            r.replicas,
            if r.pass { "PASS" } else { "FAIL" },
            runtime
        );
        for n in &r.notes {
            let _ = writeln!(out, "    {n}");
        }
    }
    out
}

/// Serde helpers writing non-finite floats as strings, since JSON numbers
/// cannot carry them.
pub(crate) mod lossless {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    fn to_repr(v: f64) -> Repr {
        if v.is_finite() {
            Repr::Num(v)
        } else {
            Repr::Text(super::format_number(v))
        }
    }

    fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(v) => Ok(v),
            Repr::Text(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(E::custom(format!("not a number: {other}"))),
            },
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            v.map(to_repr).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            Option::<Repr>::deserialize(d)?.map(from_repr).transpose()
        }
    }

    pub mod rows {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
            let reprs: Vec<Vec<Repr>> = v.iter().map(|r| r.iter().map(|x| to_repr(*x)).collect()).collect();
            reprs.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
            Vec::<Vec<Repr>>::deserialize(d)?
                .into_iter()
                .map(|r| r.into_iter().map(from_repr::<D::Error>).collect::<Result<Vec<_>, _>>())
                .collect()
        }
    }
}
