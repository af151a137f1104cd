//! Textual parameter dump. Floats are written in shortest round-trip
//! scientific form, so write-then-read reproduces parameters bitwise.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::arch::{Architecture, NetConfig, NetKind};
use crate::error::{Error, Result};

const MAGIC: &str = "gprice-checkpoint 1";

/// One network's architecture and parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NetState {
    pub arch: Architecture,
    pub params: Vec<f64>,
}

pub fn render(nets: &[NetState]) -> String {
    let mut s = String::new();
    s.push_str(MAGIC);
    s.push('\n');
    for net in nets {
        let c = &net.arch.config;
        let hidden: Vec<String> = c.hidden.iter().map(|h| h.to_string()).collect();
        writeln!(s, "net {}", net.arch.kind.name()).unwrap();
        writeln!(s, "expansion_width {}", c.expansion_width).unwrap();
        writeln!(s, "hidden {}", hidden.join(" ")).unwrap();
        writeln!(s, "dropout {:e}", c.dropout).unwrap();
        writeln!(s, "expansion_gain {:e}", c.expansion_gain).unwrap();
        writeln!(s, "dense_gain {:e}", c.dense_gain).unwrap();
        writeln!(s, "price_scale {:e}", c.price_scale).unwrap();
        for seg in net.arch.segments() {
            writeln!(s, "section {} {} {}", seg.name, seg.rows, seg.cols).unwrap();
            for row in net.params[seg.range()].chunks(seg.cols.max(1)) {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
                s.push_str(&cells.join(" "));
                s.push('\n');
            }
        }
        s.push_str("end\n");
    }
    s
}

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Data(format!("checkpoint line {line}: {msg}"))
}

pub fn parse(text: &str) -> Result<Vec<NetState>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, MAGIC)) => {}
        _ => return Err(Error::Data("not a checkpoint file (bad header)".into())),
    }
    let mut next = |what: &str| -> Result<(usize, &str)> {
        lines
            .next()
            .ok_or_else(|| Error::Data(format!("checkpoint truncated, expected {what}")))
    };
    let mut nets = Vec::new();
    loop {
        let (ln, head) = match next("net") {
            Ok(v) => v,
            Err(_) if !nets.is_empty() => break,
            Err(e) => return Err(e),
        };
        let kind = match head.strip_prefix("net ") {
            Some("value") => NetKind::Value,
            Some("generator") => NetKind::Generator,
            _ => return Err(bad(ln, format!("expected net header, got {head:?}"))),
        };
        let mut field = |key: &str| -> Result<(usize, String)> {
            let (ln, l) = next(key)?;
            l.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .map(|r| (ln, r.to_string()))
                .ok_or_else(|| bad(ln, format!("expected {key}")))
        };
        let num = |(ln, v): (usize, String)| -> Result<f64> {
            v.parse::<f64>().map_err(|e| bad(ln, e))
        };
        let (ln_w, width) = field("expansion_width")?;
        let (ln_h, hidden) = field("hidden")?;
        let config = NetConfig {
            expansion_width: width.parse().map_err(|e| bad(ln_w, e))?,
            hidden: hidden
                .split_whitespace()
                .map(|h| h.parse::<usize>().map_err(|e| bad(ln_h, e)))
                .collect::<Result<_>>()?,
            dropout: num(field("dropout")?)?,
            expansion_gain: num(field("expansion_gain")?)?,
            dense_gain: num(field("dense_gain")?)?,
            price_scale: num(field("price_scale")?)?,
        };
        let arch = Architecture::new(kind, config).map_err(|e| bad(ln, e))?;
        let mut params = Vec::with_capacity(arch.n_params());
        for seg in arch.segments() {
            let (ln, l) = next("section")?;
            let expect = format!("section {} {} {}", seg.name, seg.rows, seg.cols);
            if l != expect {
                return Err(bad(ln, format!("expected {expect:?}, got {l:?}")));
            }
            let start = params.len();
            while params.len() - start < seg.len() {
                let (ln, row) = next("values")?;
                for cell in row.split_whitespace() {
                    params.push(cell.parse::<f64>().map_err(|e| bad(ln, e))?);
                }
            }
            if params.len() - start != seg.len() {
                return Err(Error::Data(format!("section {} has wrong length", seg.name)));
            }
        }
        let (ln, end) = next("end")?;
        if end != "end" {
            return Err(bad(ln, "expected end"));
        }
        nets.push(NetState { arch, params });
    }
    Ok(nets)
}

pub fn save(path: &Path, nets: &[NetState]) -> Result<()> {
    crate::fsutil::ensure_parent(path)?;
    fs::write(path, render(nets)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<Vec<NetState>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bitwise() {
        let cfg = NetConfig {
            expansion_width: 4,
            hidden: vec![6, 3],
            ..NetConfig::value()
        };
        let arch = Architecture::value(cfg).unwrap();
        let mut params = arch.init_params(11, 0.25);
        params[0] = 1.0 / 3.0;
        params[1] = -0.0;
        params[2] = f64::MIN_POSITIVE / 3.0;
        let gen = Architecture::generator(NetConfig {
            expansion_width: 3,
            hidden: vec![2],
            ..NetConfig::generator()
        })
        .unwrap();
        let nets = vec![
            NetState { arch, params },
            NetState { params: gen.init_params(1, 1.2), arch: gen },
        ];
        let back = parse(&render(&nets)).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in nets.iter().zip(&back) {
            assert_eq!(a.arch, b.arch);
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&a.params), bits(&b.params));
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(parse("hello"), Err(Error::Data(_))));
        let arch = Architecture::generator(NetConfig {
            expansion_width: 2,
            hidden: vec![2],
            ..NetConfig::generator()
        })
        .unwrap();
        let text = render(&[NetState { params: arch.init_params(0, 0.0), arch }]);
        let cut = &text[..text.len() / 2];
        assert!(parse(cut).is_err());
    }
}
