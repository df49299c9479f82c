//! Checkpoints: a key=value header (dims, box, time, parameters) followed by row-major cell
//! records of five Q components and two velocity components.

use super::{FieldState, FlowParams};
use crate::error::{Error, Result};
use crate::tensor::SymTraceless3;
use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};

const MAGIC: &[u8; 4] = b"NQCK";
const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckpointFormat {
    Csv,
    Binary,
}

pub fn header(st: &FieldState, p: &FlowParams) -> BTreeMap<String, String> {
    let mut h = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        h.insert(k.to_string(), v);
    };
    put("nx", st.nx.to_string());
    put("ny", st.ny.to_string());
    put("lx", st.lx.to_string());
    put("ly", st.ly.to_string());
    put("t", st.t.to_string());
    put("de", p.de.to_string());
    put("re", p.re.to_string());
    put("gamma_solvent", p.gamma_solvent.to_string());
    put("eps", p.eps.to_string());
    put("alpha", p.alpha_ms.to_string());
    put("g_const", p.g_const.to_string());
    put("gamma_par", p.gamma_par.to_string());
    put("gamma_perp", p.gamma_perp.to_string());
    h
}

fn io(e: std::io::Error) -> Error {
    Error::Format(e.to_string())
}

fn parse<T: std::str::FromStr>(h: &BTreeMap<String, String>, k: &str) -> Result<T> {
    h.get(k)
        .ok_or_else(|| Error::Format(format!("missing header key {k}")))?
        .parse()
        .map_err(|_| Error::Format(format!("bad value for {k}")))
}

fn shell(h: &BTreeMap<String, String>) -> Result<FieldState> {
    let nx: usize = parse(h, "nx")?;
    let ny: usize = parse(h, "ny")?;
    if nx == 0 || ny == 0 {
        return Err(Error::Format("empty grid".into()));
    }
    let mut st = FieldState::uniform(nx, ny, parse(h, "lx")?, parse(h, "ly")?, SymTraceless3::ZERO);
    st.t = parse(h, "t")?;
    Ok(st)
}

pub fn write_csv<W: Write>(w: &mut W, st: &FieldState, p: &FlowParams) -> Result<()> {
    csv_with_header(w, st, &header(st, p))
}

fn csv_with_header<W: Write>(w: &mut W, st: &FieldState, h: &BTreeMap<String, String>) -> Result<()> {
    for (k, v) in h {
        writeln!(w, "# {k}={v}").map_err(io)?;
    }
    writeln!(w, "ix,iy,qxx,qyy,qxy,qxz,qyz,vx,vy").map_err(io)?;
    for i in 0..st.len() {
        let q = st.q[i].0;
        writeln!(w, "{},{},{},{},{},{},{},{},{}", i % st.nx, i / st.nx, q[0], q[1], q[2], q[3], q[4], st.v[0][i], st.v[1][i]).map_err(io)?;
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(r: R) -> Result<(FieldState, BTreeMap<String, String>)> {
    let mut h = BTreeMap::new();
    let mut rows = Vec::new();
    let mut seen_columns = false;
    for line in r.lines() {
        let line = line.map_err(io)?;
        if let Some(kv) = line.strip_prefix("# ") {
            let (k, v) = kv.split_once('=').ok_or_else(|| Error::Format(format!("bad header line {line}")))?;
            h.insert(k.to_string(), v.to_string());
        } else if !seen_columns {
            seen_columns = true;
        } else if !line.is_empty() {
            let vals: Vec<f64> = line.split(',').skip(2).map(|s| s.parse().map_err(|_| Error::Format(format!("bad record {line}")))).collect::<Result<_>>()?;
            if vals.len() != 7 {
                return Err(Error::Format(format!("bad record {line}")));
            }
            rows.push(vals);
        }
    }
    let mut st = shell(&h)?;
    if rows.len() != st.len() {
        return Err(Error::Format(format!("expected {} records, found {}", st.len(), rows.len())));
    }
    for (i, r) in rows.iter().enumerate() {
        st.q[i] = SymTraceless3([r[0], r[1], r[2], r[3], r[4]]);
        st.v[0][i] = r[5];
        st.v[1][i] = r[6];
    }
    Ok((st, h))
}

pub fn write_binary<W: Write>(w: &mut W, st: &FieldState, p: &FlowParams) -> Result<()> {
    binary_with_header(w, st, &header(st, p))
}

fn binary_with_header<W: Write>(w: &mut W, st: &FieldState, h: &BTreeMap<String, String>) -> Result<()> {
    let text: String = h.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
    w.write_all(MAGIC).map_err(io)?;
    w.write_all(&VERSION.to_le_bytes()).map_err(io)?;
    w.write_all(&(text.len() as u32).to_le_bytes()).map_err(io)?;
    w.write_all(text.as_bytes()).map_err(io)?;
    for i in 0..st.len() {
        for x in st.q[i].0.iter().chain([&st.v[0][i], &st.v[1][i]]) {
            w.write_all(&x.to_le_bytes()).map_err(io)?;
        }
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<(FieldState, BTreeMap<String, String>)> {
    let mut word = [0u8; 4];
    r.read_exact(&mut word).map_err(io)?;
    if &word != MAGIC {
        return Err(Error::Format("not a checkpoint file".into()));
    }
    r.read_exact(&mut word).map_err(io)?;
    if u32::from_le_bytes(word) != VERSION {
        return Err(Error::Format("unsupported checkpoint version".into()));
    }
    r.read_exact(&mut word).map_err(io)?;
    let mut text = vec![0u8; u32::from_le_bytes(word) as usize];
    r.read_exact(&mut text).map_err(io)?;
    let text = String::from_utf8(text).map_err(|e| Error::Format(e.to_string()))?;
    let h: BTreeMap<String, String> = text
        .lines()
        .map(|l| l.split_once('=').map(|(k, v)| (k.to_string(), v.to_string())).ok_or_else(|| Error::Format(format!("bad header line {l}"))))
        .collect::<Result<_>>()?;
    let mut st = shell(&h)?;
    let mut buf = [0u8; 8];
    for i in 0..st.len() {
        let mut vals = [0.0; 7];
        for v in vals.iter_mut() {
            r.read_exact(&mut buf).map_err(io)?;
            *v = f64::from_le_bytes(buf);
        }
        st.q[i] = SymTraceless3([vals[0], vals[1], vals[2], vals[3], vals[4]]);
        st.v[0][i] = vals[5];
        st.v[1][i] = vals[6];
    }
    Ok((st, h))
}

/// Writes a checkpoint whose header also carries `meta`; state keys win over meta keys.
pub fn write<W: Write>(w: &mut W, st: &FieldState, p: &FlowParams, format: CheckpointFormat, meta: &BTreeMap<String, String>) -> Result<()> {
    let mut h = meta.clone();
    h.extend(header(st, p));
    if h.keys().any(|k| k.contains('=') || k.contains('\n')) || h.values().any(|v| v.contains('\n')) {
        return Err(Error::Format("header keys may not contain '=' or newlines".into()));
    }
    match format {
        CheckpointFormat::Csv => csv_with_header(w, st, &h),
        CheckpointFormat::Binary => binary_with_header(w, st, &h),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FieldState {
        let mut st = FieldState::perturbed_equilibrium(6, 4, 2.0, 3.0, 0.55, 0.4, 0.2, 3);
        st.t = 1.25;
        st
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let st = sample();
        let mut buf = Vec::new();
        write_csv(&mut buf, &st, &FlowParams::default()).unwrap();
        let (back, h) = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, st);
        assert_eq!(h["alpha"], "7");
    }

    #[test]
    fn binary_roundtrip_is_exact() {
        let st = sample();
        let mut buf = Vec::new();
        write_binary(&mut buf, &st, &FlowParams::default()).unwrap();
        let (back, _) = read_binary(buf.as_slice()).unwrap();
        assert_eq!(back, st);
        buf[0] = b'X';
        assert!(matches!(read_binary(buf.as_slice()), Err(Error::Format(_))));
    }

    #[test]
    fn meta_is_carried_in_both_formats() {
        let st = sample();
        let meta = BTreeMap::from([("config_sha256".to_string(), "abc".to_string()), ("t".to_string(), "9".to_string())]);
        for format in [CheckpointFormat::Csv, CheckpointFormat::Binary] {
            let mut buf = Vec::new();
            write(&mut buf, &st, &FlowParams::default(), format, &meta).unwrap();
            let (back, h) = match format {
                CheckpointFormat::Csv => read_csv(buf.as_slice()).unwrap(),
                CheckpointFormat::Binary => read_binary(buf.as_slice()).unwrap(),
            };
            assert_eq!(back, st);
            assert_eq!(h["config_sha256"], "abc");
            assert_eq!(h["t"], "1.25");
        }
    }

    #[test]
    fn truncated_csv_is_rejected() {
        let st = sample();
        let mut buf = Vec::new();
        write_csv(&mut buf, &st, &FlowParams::default()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cut: String = text.lines().take(text.lines().count() - 1).map(|l| format!("{l}\n")).collect();
        assert!(matches!(read_csv(cut.as_bytes()), Err(Error::Format(_))));
    }
}
