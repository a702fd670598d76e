use super::crosstalk::CrosstalkMatrix;
use super::qder::QderReport;
use super::thresholds::Protocol;

pub const QDER_SUMMARY_HEADER: &str =
    "dimension,basis,ao,qder,stddev,bb84_threshold,bb84_pass,mub_threshold,mub_pass,singapore_threshold,singapore_pass";

/// One line per row: `row,<col labels...>` header, then `label,v0,v1,...`. Values are
/// written with full round-trip precision.
pub fn crosstalk_csv(c: &CrosstalkMatrix, labels: &[String]) -> String {
    let mut out = String::from("sent\\detected");
    for l in labels {
        out.push(',');
        out.push_str(&csv_field(l));
    }
    out.push('\n');
    for (i, row) in c.values.rows().into_iter().enumerate() {
        let name = labels.get(i).map_or_else(|| i.to_string(), |l| csv_field(l));
        out.push_str(&name);
        for v in row {
            out.push_str(&format!(",{v:?}"));
        }
        out.push('\n');
    }
    out
}

/// `ao` is free text describing the AO setting of the run (`off`, `on`, ...).
pub fn qder_summary_csv<'a>(rows: impl IntoIterator<Item = (&'a QderReport, &'a str)>) -> String {
    let mut out = String::from(QDER_SUMMARY_HEADER);
    out.push('\n');
    for (q, ao) in rows {
        out.push_str(&format!("{},{},{},{:?},{:?}", q.dim, csv_field(&q.label), csv_field(ao), q.qder, q.stddev));
        for p in [Protocol::Bb84, Protocol::MubProtocol, Protocol::Singapore] {
            match q.verdict(p) {
                Some(v) => out.push_str(&format!(",{:?},{}", v.threshold, v.pass)),
                None => out.push_str(",,"),
            }
        }
        out.push('\n');
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
