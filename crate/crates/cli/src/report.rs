use hermsurg::formcore::{det_class, signature, witt_class, Flavor, UnimodularForm};
use hermsurg::Error;
use num_bigint::BigInt;

pub const INVARIANT_COLUMNS: [&str; 5] = ["rank", "signature", "parity", "det-class", "witt-class"];

/// Left-aligned text table that can also be written as CSV.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let widths: Vec<usize> = (0..self.header.len())
            .map(|c| self.rows.iter().map(|r| r[c].len()).chain([self.header[c].len()]).max().unwrap_or(0))
            .collect();
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(&self.header);
        for r in &self.rows {
            out.push_str(&line(r));
        }
        out
    }

    pub fn csv(&self) -> Result<String, String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(|e| e.to_string())?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| e.to_string())?;
        }
        String::from_utf8(w.into_inner().map_err(|e| e.to_string())?).map_err(|e| e.to_string())
    }
}

pub fn coords(c: &[BigInt]) -> String {
    format!("({})", c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
}

/// rank, signature, parity, det-class, witt-class; "-" where an invariant is not defined.
pub fn invariants(f: &UnimodularForm, cap: usize) -> Result<Vec<String>, Error> {
    let p = f.param();
    let sig = if p.ring.is_integers() && p.epsilon == 1 { signature(f)?.to_string() } else { "-".into() };
    let parity = if p.ring.is_integers() || (p.ring.modulus() == Some(2) && p.flavor == Flavor::Symmetric) {
        let odd = (0..f.rank()).any(|i| p.ring.balanced(f.gram().get(i, i)).bit(0));
        if odd { "odd" } else { "even" }.to_string()
    } else {
        "-".into()
    };
    Ok(vec![f.rank().to_string(), sig, parity, det_class(f).to_string(), coords(&witt_class(f, cap)?)])
}
