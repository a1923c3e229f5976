//! The `widthlab-v1` results format.
//!
//! A leading `# schema: widthlab-v1` line, one header row, then one record
//! per run. Reals are written with 17 significant digits so a read-back
//! reproduces every bit. Skipped runs leave their measurement cells empty.

use std::io::{BufRead, Read, Write};

use super::family::FamilyKind;
use super::row::{RowMetrics, RowStatus, ScanRow};
use crate::error::{Error, Result};

pub const SCHEMA: &str = "widthlab-v1";

pub const COLUMNS: [&str; 24] = [
    "n",
    "q",
    "gamma",
    "family",
    "seed",
    "status",
    "reason",
    "k0",
    "k1",
    "dim",
    "sup_q",
    "avg_q",
    "avg_2",
    "holder_lb",
    "I1",
    "I2",
    "I3",
    "delta",
    "l2_threshold",
    "lq_threshold",
    "l2_branch",
    "lq_branch",
    "dichotomy",
    "wall_time_ms",
];

pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_real(v: Option<f64>) -> String {
    v.map(format_real).unwrap_or_default()
}

fn opt_bool(v: Option<bool>) -> String {
    v.map(|b| b.to_string()).unwrap_or_default()
}

/// Writes rows after checking each row's invariants. Nothing is written if
/// any row fails.
pub fn write_rows<W: Write>(out: W, rows: &[ScanRow]) -> Result<()> {
    for r in rows {
        r.check_invariants()?;
    }
    let mut out = out;
    writeln!(out, "# schema: {SCHEMA}")?;
    let mut w = csv::WriterBuilder::new().from_writer(out);
    w.write_record(COLUMNS)?;
    for r in rows {
        let m = r.metrics();
        let (status, reason) = match &r.status {
            RowStatus::Ok(_) => ("ok", ""),
            RowStatus::Skipped(why) => ("skipped", why.as_str()),
        };
        let record: Vec<String> = vec![
            r.n.to_string(),
            format_real(r.q),
            format_real(r.gamma),
            r.family.to_string(),
            r.seed.to_string(),
            status.to_string(),
            reason.to_string(),
            m.map(|m| m.k0.to_string()).unwrap_or_default(),
            m.map(|m| m.k1.to_string()).unwrap_or_default(),
            m.map(|m| m.dim.to_string()).unwrap_or_default(),
            opt_real(m.map(|m| m.sup_q)),
            opt_real(m.map(|m| m.avg_q)),
            opt_real(m.map(|m| m.avg_2)),
            opt_real(m.map(|m| m.holder_lb)),
            opt_real(m.map(|m| m.i1)),
            opt_real(m.map(|m| m.i2)),
            opt_real(m.map(|m| m.i3)),
            opt_real(r.delta),
            opt_real(r.l2_threshold()),
            format_real(r.lq_threshold()),
            opt_bool(r.l2_holds()),
            opt_bool(r.lq_holds()),
            r.dichotomy().map(|d| d.to_string()).unwrap_or_default(),
            r.wall_time_ms.to_string(),
        ];
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Serialises to a string; convenient for tests and byte comparisons.
pub fn rows_to_string(rows: &[ScanRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

fn parse<T: std::str::FromStr>(field: &str, name: &str, line: u64) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::Io(format!("record {line}: cannot parse {name} = '{field}'")))
}

fn parse_opt<T: std::str::FromStr>(field: &str, name: &str, line: u64) -> Result<Option<T>> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse(field, name, line).map(Some)
    }
}

/// Reads a `widthlab-v1` file. The derived columns (thresholds, branches)
/// are recomputed from the stored ones rather than trusted.
pub fn read_rows<R: Read>(input: R) -> Result<Vec<ScanRow>> {
    let mut input = std::io::BufReader::new(input);
    let mut first = String::new();
    input.read_line(&mut first)?;
    let tag = first.trim().strip_prefix("# schema:").map(str::trim);
    if tag != Some(SCHEMA) {
        return Err(Error::Io(format!("expected '# schema: {SCHEMA}', found '{}'", first.trim())));
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(Error::Io("column header does not match widthlab-v1".into()));
    }
    let col = |name: &str| COLUMNS.iter().position(|c| *c == name).expect("known column");
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i as u64 + 1;
        let get = |name: &str| rec.get(col(name)).unwrap_or("");
        let family: FamilyKind = get("family").parse()?;
        let status = match get("status") {
            "ok" => {
                let real = |name: &str| parse::<f64>(get(name), name, line);
                RowStatus::Ok(RowMetrics {
                    k0: parse(get("k0"), "k0", line)?,
                    k1: parse(get("k1"), "k1", line)?,
                    dim: parse(get("dim"), "dim", line)?,
                    sup_q: real("sup_q")?,
                    avg_q: real("avg_q")?,
                    avg_2: real("avg_2")?,
                    holder_lb: real("holder_lb")?,
                    i1: real("I1")?,
                    i2: real("I2")?,
                    i3: real("I3")?,
                })
            }
            "skipped" => RowStatus::Skipped(get("reason").to_string()),
            other => return Err(Error::Io(format!("record {line}: unknown status '{other}'"))),
        };
        rows.push(ScanRow {
            n: parse(get("n"), "n", line)?,
            q: parse(get("q"), "q", line)?,
            gamma: parse(get("gamma"), "gamma", line)?,
            family,
            seed: parse(get("seed"), "seed", line)?,
            delta: parse_opt(get("delta"), "delta", line)?,
            status,
            wall_time_ms: parse(get("wall_time_ms"), "wall_time_ms", line)?,
        });
    }
    Ok(rows)
}
