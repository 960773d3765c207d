//! Human and JSON renderings. Floats are rounded to 12 significant digits
//! so that reports are stable across platforms and free of last-bit noise.

use entangle_core::verify::{LoccCheckResult, PropertyCheckResult};
use entangle_core::{CEReport, EntanglementCombination, PartySubset};
use serde_json::{json, Map, Value};

pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn one_based(s: PartySubset) -> Vec<usize> {
    s.iter().map(|k| k + 1).collect()
}

fn subset_key(s: PartySubset) -> String {
    one_based(s)
        .iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn ec_json(ec: &EntanglementCombination) -> Value {
    json!(ec
        .blocks()
        .iter()
        .map(|b| one_based(*b))
        .collect::<Vec<_>>())
}

pub fn ce_json(r: &CEReport) -> Value {
    let mut m = Map::new();
    m.insert("dims".into(), json!(r.dims));
    m.insert("ce".into(), json!(round12(r.ce)));
    m.insert("ec".into(), ec_json(&r.ec));
    m.insert(
        "blocks".into(),
        json!(r
            .block_cefs
            .iter()
            .map(|b| json!({"parties": one_based(b.block), "cef": round12(b.cef)}))
            .collect::<Vec<_>>()),
    );
    if let Some(entropies) = &r.subset_entropies {
        let mut e = Map::new();
        for (s, v) in entropies {
            e.insert(subset_key(*s), json!(round12(*v)));
        }
        m.insert("subset_entropies".into(), Value::Object(e));
    }
    m.insert(
        "tolerances".into(),
        json!({"rank_eps": r.tolerances.rank_eps, "norm_eps": r.tolerances.norm_eps}),
    );
    m.insert("normalized_input".into(), json!(r.normalized_input));
    Value::Object(m)
}

pub fn ce_human(r: &CEReport) -> String {
    let mut out = format!(
        "dims: {:?}\nCE: {:?}\nEC: {}\n",
        r.dims,
        round12(r.ce),
        r.ec
    );
    for b in &r.block_cefs {
        out += &format!("CEF{}: {:?}\n", b.block, round12(b.cef));
    }
    if let Some(entropies) = &r.subset_entropies {
        for (s, v) in entropies {
            out += &format!("S{s}: {:?}\n", round12(*v));
        }
    }
    if r.normalized_input {
        out += "input was normalized\n";
    }
    out
}

pub fn ec_output(dims: &[usize], ec: &EntanglementCombination, as_json: bool) -> String {
    if as_json {
        json!({"dims": dims, "ec": ec_json(ec)}).to_string()
    } else {
        ec.to_string()
    }
}

pub fn scalar_output(
    dims: &[usize],
    key: &str,
    subset: Option<PartySubset>,
    v: f64,
    as_json: bool,
) -> String {
    if as_json {
        let mut m = Map::new();
        m.insert("dims".into(), json!(dims));
        if let Some(s) = subset {
            m.insert("subset".into(), json!(one_based(s)));
        }
        m.insert(key.into(), json!(round12(v)));
        Value::Object(m).to_string()
    } else {
        format!("{:?}", round12(v))
    }
}

pub fn check_json(r: &PropertyCheckResult) -> Value {
    json!({
        "property": r.property,
        "passed": r.passed,
        "trials": r.trials,
        "max_violation": r.max_violation,
        "tolerance": r.tolerance,
        "ec_mismatches": r.ec_mismatches,
        "seed": r.seed,
    })
}

pub fn check_human(r: &PropertyCheckResult) -> String {
    format!(
        "{}: {} (trials {}, max violation {:e}, tolerance {:e}, ec mismatches {}, seed {})",
        r.property,
        if r.passed { "PASS" } else { "FAIL" },
        r.trials,
        r.max_violation,
        r.tolerance,
        r.ec_mismatches,
        r.seed
    )
}

pub fn checks_output(results: &[PropertyCheckResult], as_json: bool) -> String {
    if as_json {
        json!(results.iter().map(check_json).collect::<Vec<_>>()).to_string()
    } else {
        results
            .iter()
            .map(check_human)
            .collect::<Vec<_>>()
            .join("\n")
    }
}

pub fn locc_results(r: LoccCheckResult) -> Vec<PropertyCheckResult> {
    vec![r.subset_entropy, r.ce_monotonicity]
}
