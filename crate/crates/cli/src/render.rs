//! Text renderings of backend JSON values, and CSV output.

use serde_json::Value as Json;

/// A scalar as text: an exact series `[c0, c1, ..]` becomes
/// `c0 + c1*q + ..`, a complex `[re, im]` becomes `re+imi`.
pub fn scalar(v: &Json) -> String {
    match v {
        Json::Array(items) if items.iter().all(Json::is_string) => series(items),
        Json::Array(items) if items.len() == 2 && items.iter().all(Json::is_number) => {
            complex(items[0].as_f64().unwrap_or(f64::NAN), items[1].as_f64().unwrap_or(f64::NAN))
        }
        Json::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn series(coeffs: &[Json]) -> String {
    let mut terms = Vec::new();
    for (n, c) in coeffs.iter().enumerate() {
        let c = c.as_str().unwrap_or("?");
        if c == "0" {
            continue;
        }
        let c = if c.contains('/') || c.starts_with('-') { format!("({c})") } else { c.to_string() };
        terms.push(match n {
            0 => c,
            1 => format!("{c}*q"),
            _ => format!("{c}*q^{n}"),
        });
    }
    let order = coeffs.len().saturating_sub(1);
    if terms.is_empty() {
        "0".to_string()
    } else {
        format!("{} + O(q^{})", terms.join(" + "), order + 1)
    }
}

fn complex(re: f64, im: f64) -> String {
    format!("{re:.12e}{im:+.12e}i")
}

/// A canonical or chart coordinate as text.
pub fn value(v: &Json) -> String {
    match v {
        Json::Array(items) if items.len() == 2 => complex(items[0].as_f64().unwrap_or(f64::NAN), items[1].as_f64().unwrap_or(f64::NAN)),
        Json::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// CSV text with a header row.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}
