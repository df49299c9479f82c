//! Output plumbing: provenance headers, CSV rows, sinks and gnuplot scripts.

use crate::config::RunConfig;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance for one command: artifact version, config hash and a flat parameter echo.
pub struct Meta {
    pub command: &'static str,
    pub hash: String,
    pub params: BTreeMap<String, String>,
}

fn flatten(prefix: &str, v: &serde_json::Value, out: &mut BTreeMap<String, String>) {
    match v {
        serde_json::Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        serde_json::Value::Null => {}
        serde_json::Value::String(s) => {
            out.insert(prefix.to_string(), s.clone());
        }
        other => {
            out.insert(prefix.to_string(), other.to_string());
        }
    }
}

impl Meta {
    pub fn new(command: &'static str, cfg: &RunConfig, sections: &[(&str, serde_json::Value)]) -> Self {
        let mut params = BTreeMap::new();
        params.insert("seed".to_string(), cfg.seed.to_string());
        for (name, v) in sections {
            flatten(name, v, &mut params);
        }
        Self { command, hash: cfg.hash(), params }
    }

    /// Single `# ...` line placed above the column row of every CSV.
    pub fn line(&self) -> String {
        let echo: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("# nematic {VERSION} command={} config_sha256={} {}", self.command, self.hash, echo.join(" "))
    }

    pub fn map(&self) -> BTreeMap<String, String> {
        let mut m: BTreeMap<String, String> = self.params.iter().map(|(k, v)| (format!("param.{k}"), v.clone())).collect();
        m.insert("artifact".into(), format!("nematic {VERSION}"));
        m.insert("command".into(), self.command.into());
        m.insert("config_sha256".into(), self.hash.clone());
        m
    }
}

pub fn section<T: Serialize>(s: &T) -> serde_json::Value {
    serde_json::to_value(s).expect("section serializes")
}

/// Formats a float with the shortest representation that round-trips.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn sink(path: Option<&Path>) -> std::io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(File::create(p)?))
        }
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

pub struct Csv<W: Write> {
    w: W,
    columns: usize,
}

impl<W: Write> Csv<W> {
    pub fn new(mut w: W, meta: &Meta, columns: &[&str]) -> std::io::Result<Self> {
        writeln!(w, "{}", meta.line())?;
        writeln!(w, "{}", columns.join(","))?;
        Ok(Self { w, columns: columns.len() })
    }

    pub fn row(&mut self, fields: &[String]) -> std::io::Result<()> {
        debug_assert_eq!(fields.len(), self.columns);
        writeln!(self.w, "{}", fields.join(","))
    }

    pub fn finish(mut self) -> std::io::Result<()> {
        self.w.flush()
    }
}

pub fn json<W: Write, T: Serialize>(mut w: W, meta: &Meta, body: &T) -> std::io::Result<()> {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        header: Header<'a>,
        #[serde(flatten)]
        body: &'a T,
    }
    #[derive(Serialize)]
    struct Header<'a> {
        artifact: String,
        command: &'a str,
        config_sha256: &'a str,
        params: &'a BTreeMap<String, String>,
    }
    let doc = Doc { header: Header { artifact: format!("nematic {VERSION}"), command: meta.command, config_sha256: &meta.hash, params: &meta.params }, body };
    serde_json::to_writer_pretty(&mut w, &doc).map_err(std::io::Error::other)?;
    writeln!(w)?;
    w.flush()
}

/// Writes `<csv stem>.gp` next to `csv`, plotting `y` columns against column `x` (1-based).
pub fn gnuplot(csv: &Path, meta: &Meta, title: &str, x: (usize, &str), ys: &[(usize, &str)], logy: bool) -> std::io::Result<PathBuf> {
    let script = csv.with_extension("gp");
    let mut w = BufWriter::new(File::create(&script)?);
    writeln!(w, "{}", meta.line())?;
    writeln!(w, "set datafile separator ','")?;
    writeln!(w, "set datafile commentschars '#'")?;
    writeln!(w, "set key autotitle columnhead")?;
    writeln!(w, "set terminal pngcairo size 900,600")?;
    writeln!(w, "set output '{}'", csv.with_extension("png").file_name().unwrap_or_default().to_string_lossy())?;
    writeln!(w, "set title '{title}'")?;
    writeln!(w, "set xlabel '{}'", x.1)?;
    if logy {
        writeln!(w, "set logscale y")?;
    }
    let name = csv.file_name().unwrap_or_default().to_string_lossy();
    let plots: Vec<String> = ys.iter().map(|(c, label)| format!("'{name}' using {}:{c} with linespoints title '{label}'", x.0)).collect();
    writeln!(w, "plot {}", plots.join(", \\\n     "))?;
    w.flush()?;
    Ok(script)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_line_is_stable() {
        let cfg = RunConfig::default();
        let a = Meta::new("phase", &cfg, &[("phase", section(&cfg.phase))]);
        let b = Meta::new("phase", &cfg, &[("phase", section(&cfg.phase))]);
        assert_eq!(a.line(), b.line());
        assert!(a.line().starts_with("# nematic "));
        assert!(a.line().contains("phase.count=200"));
        assert!(!a.line().contains('\n'));
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-17, 6.7314863964833584] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(opt(None), "");
    }
}
