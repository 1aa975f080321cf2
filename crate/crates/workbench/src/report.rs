//! JSON reports and aligned text tables for each analysis.

use std::fmt::Write as _;

use dsr_core::agreement::{AgreementReport, Aggregation};
use dsr_core::analytics::{BinComparison, LogOdds, TargetDelta};
use dsr_core::scorer::ScoreFit;
use dsr_core::spaneval::{EvalReport, Scored};
use dsr_core::stats::{significance_stars, WelchResult};
use dsr_core::{Dimension, SpanKind};
use serde_json::{json, Value};

use crate::export::table_cell;

pub fn dimension_name(d: Dimension) -> &'static str {
    match d {
        Dimension::OpposeAdvocate => "Oppose-Advocate",
        Dimension::VictimizedAided => "Victimized-Aided",
        Dimension::HarmfulHelpful => "Harmful-Helpful",
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

/// A test result entry: statistic, p-value, sample size and stars.
pub fn test_entry(statistic: f64, p: f64, n: usize) -> Value {
    json!({ "statistic": statistic, "p": p, "n": n, "stars": significance_stars(p) })
}

pub fn agreement_json(r: &AgreementReport) -> Value {
    let dims: Vec<Value> = Dimension::ALL
        .iter()
        .map(|d| match r.per_dimension.get(d) {
            Some(a) => json!({
                "dimension": d.code(),
                "alpha": a.alpha,
                "n_scores": a.n_scores,
                "n_units": a.n_units,
            }),
            None => json!({ "dimension": d.code(), "alpha": null }),
        })
        .collect();
    json!({
        "dimensions": dims,
        "micro_alpha": r.micro_alpha,
        "n_scores": r.n_scores,
        "n_units": r.n_units,
    })
}

pub fn agreement_table(r: &AgreementReport) -> String {
    let mut out = format!("{:<22}{:>10}{:>8}\n", "Attribute", "# Scores", "alpha");
    for d in Dimension::ALL {
        match r.per_dimension.get(&d) {
            Some(a) => {
                let _ = writeln!(out, "{:<22}{:>10}{:>8.3}", dimension_name(d), a.n_scores, a.alpha);
            }
            None => {
                let _ = writeln!(out, "{:<22}{:>10}{:>8}", dimension_name(d), 0, "-");
            }
        }
    }
    let micro = r.micro_alpha.map_or_else(|| "-".to_string(), |a| format!("{a:.3}"));
    let _ = writeln!(out, "{:<22}{:>10}{:>8}", "Total & Micro-Avg.", r.n_scores, micro);
    out
}

pub fn flagged_json(a: &Aggregation) -> Value {
    let units: Vec<Value> = a
        .flagged
        .iter()
        .map(|f| {
            json!({
                "text_id": f.unit.text_id,
                "start": f.unit.start,
                "end": f.unit.end,
                "kind": f.unit.kind.as_str(),
                "dim": f.unit.dimension.code(),
                "n": f.n,
                "mean": f.mean,
                "sd": f.sd,
            })
        })
        .collect();
    json!({ "kept_spans": a.spans.len(), "flagged": units })
}

fn scored_json(s: &Scored) -> Value {
    json!({
        "tp": s.counts.tp,
        "fp": s.counts.fp,
        "fn": s.counts.fn_,
        "precision": s.prf.precision,
        "recall": s.prf.recall,
        "f1": s.prf.f1,
    })
}

pub fn eval_json(r: &EvalReport) -> Value {
    let per = |m: &std::collections::BTreeMap<SpanKind, Scored>| -> Value {
        m.iter().map(|(k, s)| (k.as_str().to_string(), scored_json(s))).collect()
    };
    json!({
        "span": { "per_label": per(&r.per_label), "micro": scored_json(&r.micro_span) },
        "token": { "per_label": per(&r.token_per_label), "micro": scored_json(&r.micro_token) },
    })
}

/// Strict span scores per label and micro-averaged, then token-level micro,
/// in one row.
pub fn eval_table(run_name: &str, r: &EvalReport) -> String {
    let width = run_name.len().max(5);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:<16}{:<16}{:<16}{:<16}",
        "", "Character", "Topic", "Micro Avg.", "Token Micro Avg."
    );
    let _ = writeln!(out, "{:<width$}  {}", "Run", "p    r    F1   ".repeat(4).trim_end());
    let mut row = format!("{run_name:<width$} ");
    let groups = [
        r.per_label.get(&SpanKind::Character).copied().unwrap_or_default(),
        r.per_label.get(&SpanKind::Topic).copied().unwrap_or_default(),
        r.micro_span,
        r.micro_token,
    ];
    for g in groups {
        for v in [g.prf.precision, g.prf.recall, g.prf.f1] {
            let _ = write!(row, " {:<4}", table_cell(v));
        }
    }
    out.push_str(row.trim_end());
    out.push('\n');
    out
}

fn fit_json(f: &Option<ScoreFit>) -> Value {
    match f {
        Some(f) => json!({ "n": f.n, "rmse": f.rmse, "r2": f.r2 }),
        None => Value::Null,
    }
}

pub fn score_fit_json(fits: &[Option<ScoreFit>; 3]) -> Value {
    Dimension::ALL
        .iter()
        .map(|d| (d.code().to_string(), fit_json(&fits[d.index()])))
        .collect()
}

pub fn score_fit_table(fits: &[Option<ScoreFit>; 3]) -> String {
    let mut out = format!("{:<20}{:>8}{:>10}{:>10}\n", "Dimension", "n", "RMSE", "R2");
    for d in Dimension::ALL {
        match &fits[d.index()] {
            Some(f) => {
                let r2 = f.r2.map_or_else(|| "undef".to_string(), |v| format!("{v:.4}"));
                let _ = writeln!(out, "{:<20}{:>8}{:>10.4}{:>10}", dimension_name(d), f.n, f.rmse, r2);
            }
            None => {
                let _ = writeln!(out, "{:<20}{:>8}{:>10}{:>10}", dimension_name(d), 0, "-", "-");
            }
        }
    }
    out
}

pub fn log_odds_json(attribute: &str, r: &LogOdds) -> Value {
    let t = r.table;
    json!({
        "attribute": attribute,
        "table": [[t.a, t.b], [t.c, t.d]],
        "odds_ratio": r.odds_ratio,
        "log_odds": r.log_odds,
        "corrected": r.corrected,
        "test": test_entry(r.log_odds, r.p, t.total() as usize),
    })
}

pub fn welch_json(w: &WelchResult, n: usize) -> Value {
    json!({
        "t": w.t,
        "df": w.df,
        "mean_a": w.mean_a,
        "sd_a": w.sd_a,
        "mean_b": w.mean_b,
        "sd_b": w.sd_b,
        "test": test_entry(w.t, w.p_two_sided, n),
    })
}

pub fn bins_json(rows: &[BinComparison]) -> Value {
    rows.iter()
        .map(|r| {
            json!({
                "group": r.group,
                "n_high": r.n_high,
                "n_low": r.n_low,
                "welch": r.test.as_ref().map(|w| welch_json(w, r.n_high + r.n_low)),
            })
        })
        .collect()
}

pub fn targets_json(rows: &[TargetDelta]) -> Value {
    rows.iter()
        .map(|r| {
            json!({
                "target": r.target,
                "n_in": r.n_in,
                "n_out": r.n_out,
                "median_in": r.median_in,
                "median_out": r.median_out,
                "delta": r.delta,
                "test": r.p.map(|p| test_entry(r.delta, p, r.n_in + r.n_out)),
            })
        })
        .collect()
}
