//! CSV exports with a header row.

use std::collections::BTreeMap;
use std::io::Write;

use super::ScatterPoint;

pub fn histogram_csv<W: Write>(w: W, rows: &[(String, usize)]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["property", "count"])?;
    for (p, c) in rows {
        out.write_record([p.as_str(), &c.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn yearly_csv<W: Write>(w: W, counts: &BTreeMap<String, usize>) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["year", "count"])?;
    for (y, c) in counts {
        out.write_record([y.as_str(), &c.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn scatter_csv<W: Write>(w: W, points: &[ScatterPoint]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "y", "doc_id", "year"])?;
    for p in points {
        let year = p.year.map(|y| y.to_string()).unwrap_or_default();
        out.write_record([p.x.to_string(), p.y.to_string(), p.doc_id.clone(), year])?;
    }
    out.flush()?;
    Ok(())
}
