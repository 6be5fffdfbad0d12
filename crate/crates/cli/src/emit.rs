//! Report rendering. The machine format is written by hand so that field
//! order and float formatting (17 significant digits) never depend on a
//! serializer's defaults; it parses back into `VerificationReport`.

use std::fmt::Write;

use schauder_core::{VerificationReport, Witness};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Machine,
}

pub fn emit_report(report: &VerificationReport, format: Format) -> String {
    match format {
        Format::Text => emit_text(report),
        Format::Machine => emit_machine(report),
    }
}

/// First line `PASS <check>` (or `FAIL`, `N/A`), then `key: value` lines;
/// subchecks are indented by two spaces per level.
pub fn emit_text(report: &VerificationReport) -> String {
    let mut out = String::new();
    text_into(&mut out, report, 0);
    out
}

fn text_into(out: &mut String, r: &VerificationReport, depth: usize) {
    let pad = "  ".repeat(depth);
    let _ = writeln!(out, "{pad}{} {}", r.verdict.as_str(), r.check);
    if depth == 0 {
        let _ = writeln!(out, "group: {}", r.provenance.group);
        match r.provenance.seed {
            Some(s) => {
                let _ = writeln!(out, "seed: {s}");
            }
            None => {
                let _ = writeln!(out, "seed: none");
            }
        }
        let t = &r.provenance.tolerances;
        let _ = writeln!(
            out,
            "tolerance: residual={:e} zero={:e} rank={:e}",
            t.residual, t.zero, t.rank
        );
    }
    for (k, v) in &r.residuals {
        let _ = writeln!(out, "{pad}residual.{k}: {v:e}");
    }
    for (k, w) in &r.witnesses {
        let _ = writeln!(out, "{pad}witness.{k}: {}", witness_text(w));
    }
    for s in &r.subchecks {
        text_into(out, s, depth + 1);
    }
}

fn witness_text(w: &Witness) -> String {
    let z = |c: &[f64; 2]| {
        if c[1] == 0.0 {
            format!("{}", c[0])
        } else if c[1] < 0.0 {
            format!("{}-{}i", c[0], -c[1])
        } else {
            format!("{}+{}i", c[0], c[1])
        }
    };
    match w {
        Witness::Indices(v) => format!("{v:?}"),
        Witness::Count(n) => n.to_string(),
        Witness::Flag(b) => b.to_string(),
        Witness::Scalar(c) => z(c),
        Witness::Vector(v) => format!("[{}]", v.iter().map(z).collect::<Vec<_>>().join(", ")),
        Witness::Text(s) => s.clone(),
    }
}

pub fn emit_machine(report: &VerificationReport) -> String {
    let mut out = String::new();
    machine_into(&mut out, report);
    out.push('\n');
    out
}

fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn machine_into(out: &mut String, r: &VerificationReport) {
    let verdict = match r.verdict {
        schauder_core::Verdict::Pass => "pass",
        schauder_core::Verdict::Fail => "fail",
        schauder_core::Verdict::NotApplicable => "not-applicable",
    };
    let _ = write!(
        out,
        "{{\"check\":{},\"verdict\":\"{verdict}\",\"residuals\":{{",
        string(&r.check)
    );
    let residuals: Vec<String> = r
        .residuals
        .iter()
        .map(|(k, v)| format!("{}:{}", string(k), float(*v)))
        .collect();
    out.push_str(&residuals.join(","));
    out.push_str("},\"witnesses\":{");
    let witnesses: Vec<String> = r
        .witnesses
        .iter()
        .map(|(k, w)| format!("{}:{}", string(k), witness_json(w)))
        .collect();
    out.push_str(&witnesses.join(","));
    let t = &r.provenance.tolerances;
    let seed = r.provenance.seed.map_or("null".to_string(), |s| s.to_string());
    let _ = write!(
        out,
        "}},\"provenance\":{{\"seed\":{seed},\"tolerances\":{{\"residual\":{},\"zero\":{},\"rank\":{}}},\"group\":{}}},\"subchecks\":[",
        float(t.residual),
        float(t.zero),
        float(t.rank),
        string(&r.provenance.group)
    );
    for (i, s) in r.subchecks.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        machine_into(out, s);
    }
    out.push_str("]}");
}

fn witness_json(w: &Witness) -> String {
    let pair = |c: &[f64; 2]| format!("[{},{}]", float(c[0]), float(c[1]));
    match w {
        Witness::Indices(v) => format!(
            "{{\"indices\":[{}]}}",
            v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
        ),
        Witness::Count(n) => format!("{{\"count\":{n}}}"),
        Witness::Flag(b) => format!("{{\"flag\":{b}}}"),
        Witness::Scalar(c) => format!("{{\"scalar\":{}}}", pair(c)),
        Witness::Vector(v) => format!("{{\"vector\":[{}]}}", v.iter().map(pair).collect::<Vec<_>>().join(",")),
        Witness::Text(s) => format!("{{\"text\":{}}}", string(s)),
    }
}
