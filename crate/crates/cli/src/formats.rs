//! Input files, number formatting and output tables.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use serde_json::Value;
use vge_core::graph::{MetricGraph, TailFamily};
use vge_core::origami::Origami;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    vertices: usize,
    #[serde(default)]
    edges: Vec<EdgeSpec>,
    #[serde(default)]
    tails: Vec<TailSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeSpec {
    from: usize,
    to: usize,
    len: f64,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum TailSpec {
    Arithmetic {
        from: usize,
        to: usize,
        a: f64,
        b: f64,
    },
    Power {
        from: usize,
        to: usize,
        a: f64,
        alpha: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OrigamiFile {
    n: usize,
    sigma_h: Vec<u32>,
    sigma_v: Vec<u32>,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn parse_graph(text: &str) -> Result<MetricGraph, CliError> {
    let f: GraphFile =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("graph file: {e}")))?;
    let heads: Vec<(usize, usize, f64)> = f.edges.iter().map(|e| (e.from, e.to, e.len)).collect();
    let tails = f
        .tails
        .iter()
        .map(|t| match *t {
            TailSpec::Arithmetic { from, to, a, b } => TailFamily::arithmetic(from, to, a, b),
            TailSpec::Power { from, to, a, alpha } => TailFamily::power(from, to, a, alpha),
        })
        .collect();
    Ok(MetricGraph::new(f.vertices, &heads, tails)?)
}

pub fn read_graph(path: &Path) -> Result<MetricGraph, CliError> {
    parse_graph(&read(path)?)
}

pub fn parse_origami(text: &str) -> Result<Origami, CliError> {
    let f: OrigamiFile =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("origami file: {e}")))?;
    if f.sigma_h.len() != f.n || f.sigma_v.len() != f.n {
        return Err(CliError::Input(format!(
            "origami file: n = {} but the permutations have {} and {} entries",
            f.n,
            f.sigma_h.len(),
            f.sigma_v.len()
        )));
    }
    Ok(Origami::from_one_indexed(&f.sigma_h, &f.sigma_v)?)
}

pub fn read_origami(path: &Path) -> Result<Origami, CliError> {
    parse_origami(&read(path)?)
}

/// Rounds to 12 significant digits, so printed values do not depend on the
/// last bits of a floating-point reduction.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn num(x: f64) -> Value {
    let r = round12(x);
    serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number)
}

pub fn fmt_num(x: f64) -> String {
    let r = round12(x);
    if r.is_nan() {
        "nan".into()
    } else if r.is_infinite() {
        if r > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{r}")
    }
}

/// A CSV table.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Table {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.header.join(","));
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.join(","));
        }
        out
    }
}

/// Command result in both output formats.
#[derive(Clone, Debug)]
pub struct Output {
    pub json: Value,
    pub table: Table,
}

/// `R,value` table from samples.
pub fn curve_table(value_name: &str, samples: &[(f64, f64)]) -> Table {
    let mut t = Table::new(&["R", value_name]);
    for &(r, v) in samples {
        t.push(vec![fmt_num(r), fmt_num(v)]);
    }
    t
}

/// `lo, lo + step, ...` up to `hi`, each value rounded to 12 digits.
pub fn radius_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0 && lo > 0.0 && hi >= lo) || !(hi.is_finite()) {
        return Err(CliError::Usage(format!(
            "need 0 < rmin <= rmax and step > 0 (got rmin={lo}, rmax={hi}, step={step})"
        )));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if n > 10_000_000 {
        return Err(CliError::Usage(
            "radius grid has more than 10⁷ points".into(),
        ));
    }
    Ok((0..n).map(|i| round12(lo + i as f64 * step)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round12(0.1 + 0.2), 0.3);
        assert_eq!(fmt_num(std::f64::consts::LN_2), "0.69314718056");
        assert_eq!(fmt_num(f64::NAN), "nan");
    }

    #[test]
    fn grid() {
        let g = radius_grid(0.1, 1.2, 0.1).unwrap();
        assert_eq!(g.len(), 12);
        assert_eq!(g[11], 1.2);
        assert!(radius_grid(0.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn graph_files() {
        let g = parse_graph(
            r#"{"vertices": 1, "edges": [{"from": 0, "to": 0, "len": 1.0}],
            "tails": [{"from": 0, "to": 0, "kind": "arithmetic", "a": 0, "b": 1},
                      {"from": 0, "to": 0, "kind": "power", "a": 1, "alpha": 0.5}]}"#,
        )
        .unwrap();
        assert_eq!(g.tail_families().len(), 2);
        assert!(matches!(
            parse_graph(r#"{"vertices": 1, "edges": [{"from": 0, "to": 0, "len": -1}]}"#),
            Err(CliError::Core(vge_core::Error::InvalidGraph(_)))
        ));
        assert!(matches!(
            parse_graph(r#"{"vertices": 1, "bogus": 2}"#),
            Err(CliError::Input(_))
        ));
    }

    #[test]
    fn origami_files() {
        let o = parse_origami(r#"{"n": 3, "sigma_h": [2,1,3], "sigma_v": [3,2,1]}"#).unwrap();
        assert_eq!(o, Origami::l_shape());
        assert!(parse_origami(r#"{"n": 2, "sigma_h": [2,1,3], "sigma_v": [3,2,1]}"#).is_err());
    }
}
