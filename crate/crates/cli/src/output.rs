//! CSV and JSON artifacts.

use std::fmt::Write as _;

use sconvex::{Cover, CoverReport, PolyConvexFn, SingularPoint};

use crate::instance::num;
use crate::Family;

fn joined(v: &[f64]) -> String {
    v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(";")
}

/// `id, x1..xd, order, j_indices, witnesses`; `j_indices` are one-based and
/// witnesses are `a-b` pairs of zero-based point indices.
pub(crate) fn points_csv(dim: usize, points: &[SingularPoint]) -> String {
    let mut out = String::from("id");
    for i in 1..=dim {
        let _ = write!(out, ",x{i}");
    }
    out.push_str(",order,j_indices,witnesses\n");
    for (id, p) in points.iter().enumerate() {
        let _ = write!(out, "{id}");
        for &v in &p.location {
            let _ = write!(out, ",{}", num(v));
        }
        let js: Vec<String> = p.j_indices.iter().map(|j| (j + 1).to_string()).collect();
        let ws: Vec<String> = p.witnesses.iter().map(|w| format!("{}-{}", w.a, w.b)).collect();
        let _ = writeln!(out, ",{},{},{}", p.order.as_u8(), js.join(";"), ws.join(";"));
    }
    out
}

/// Long format: one row per piece of `g1`/`g2`, normal vector, or hyperplane
/// anchor/direction.
pub(crate) fn surfaces_csv(families: &[Family]) -> String {
    let mut out = String::from("surface,family,j,precompose,part,piece,vector,scalar\n");
    let mut id = 0;
    for f in families {
        for cover in &f.covers {
            let head = |pre: bool| format!("{id},{},{},{}", f.name, f.j + 1, u8::from(pre));
            match cover {
                Cover::Surface(s) => {
                    let h = head(s.precompose().is_some());
                    let mut pieces = |name: &str, g: &PolyConvexFn| {
                        for (k, (slope, c)) in g.pieces().enumerate() {
                            let _ = writeln!(out, "{h},{name},{k},{},{}", joined(slope), num(c));
                        }
                    };
                    pieces("g1", s.g1());
                    pieces("g2", s.g2());
                    for (k, w) in s.normal_set().iter().enumerate() {
                        let _ = writeln!(out, "{h},normal,{k},{},", joined(w));
                    }
                }
                Cover::Hyperplane(p) => {
                    let h = head(false);
                    let _ = writeln!(out, "{h},anchor,0,{},", joined(&p.anchor));
                    let _ = writeln!(out, "{h},direction,0,{},", joined(&p.direction));
                }
            }
            id += 1;
        }
    }
    out
}

fn finite_or_null(v: f64) -> serde_json::Value {
    if v.is_finite() {
        serde_json::json!(v)
    } else {
        serde_json::Value::Null
    }
}

pub(crate) fn report_json(
    families: &[Family],
    reports: &[CoverReport],
    points: usize,
    sampling: &serde_json::Value,
    passed: bool,
) -> String {
    let mut total = CoverReport::default();
    let entries: Vec<serde_json::Value> = families
        .iter()
        .zip(reports)
        .map(|(f, r)| {
            total.merge(r);
            serde_json::json!({
                "family": f.name,
                "j": f.j + 1,
                "covers": f.covers.len(),
                "total_points": r.total_points,
                "covered": r.covered,
                "max_residual": finite_or_null(r.max_residual),
                "normal_checks": r.normal_checks,
                "normal_failures": r.normal_failures,
            })
        })
        .collect();
    let doc = serde_json::json!({
        "sampling": sampling,
        "singular_points": points,
        "families": entries,
        "total": {
            "total_points": total.total_points,
            "covered": total.covered,
            "max_residual": finite_or_null(total.max_residual),
            "normal_checks": total.normal_checks,
            "normal_failures": total.normal_failures,
        },
        "passed": passed,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
    s.push('\n');
    s
}
