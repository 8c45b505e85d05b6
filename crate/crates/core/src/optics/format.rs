//! Netlist exchange formats.
//!
//! Text form, one element per line:
//!
//! ```text
//! # comment
//! netlist dim=4 reference_path=3 state=1
//! I HWP angle=1.0471975511965979 path=0
//! I PBS paths=0,1
//! I PS phase=1.5707963267948966 path=1
//! IV BS paths=0,1
//! IV DET label=D1 path=0
//! ```
//!
//! JSON form is the serde representation wrapped with a `schema_version`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::states::Dimension;

use super::{Element, OpticalNetlist, Polarization, Stage, StageBlock};

pub const NETLIST_SCHEMA_VERSION: u32 = 1;

fn malformed(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::MalformedNetlist(format!("line {line}: {msg}"))
}

fn fmt_real<T: Real>(x: T) -> String {
    // f64 Display is the shortest string that parses back to the same value.
    format!("{}", x.to_f64_lossy())
}

pub fn to_text<T: Real>(netlist: &OpticalNetlist<T>) -> String {
    let mut out = String::new();
    let _ = write!(
        out,
        "netlist dim={} reference_path={}",
        netlist.dim.get(),
        netlist.reference_path
    );
    if let Some(l) = netlist.prepared_state {
        let _ = write!(out, " state={l}");
    }
    out.push('\n');
    for (stage, e) in netlist.elements() {
        let _ = write!(out, "{stage} {}", e.kind_name());
        match e {
            Element::Hwp { angle, path } => {
                let _ = write!(out, " angle={} path={path}", fmt_real(*angle));
            }
            Element::Pbs { paths } | Element::Bs { paths } | Element::Mirror { paths } => {
                let _ = write!(out, " paths={},{}", paths[0], paths[1]);
            }
            Element::Ps { phase, path, pol } => {
                let _ = write!(out, " phase={} path={path}", fmt_real(*phase));
                if let Some(p) = pol {
                    let _ = write!(out, " pol={p:?}");
                }
            }
            Element::Det { label, path } => {
                let _ = write!(out, " label={label} path={path}");
            }
        }
        out.push('\n');
    }
    out
}

struct Fields<'a> {
    line: usize,
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> Fields<'a> {
    fn parse(line: usize, tokens: impl Iterator<Item = &'a str>) -> Result<Self> {
        let pairs = tokens
            .map(|t| t.split_once('=').ok_or_else(|| malformed(line, format!("expected key=value, got `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { line, pairs })
    }

    fn raw(&self, key: &str) -> Result<&'a str> {
        self.pairs
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| malformed(self.line, format!("missing `{key}`")))
    }

    fn opt_raw(&self, key: &str) -> Option<&'a str> {
        self.pairs.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }

    fn usize(&self, key: &str) -> Result<usize> {
        let v = self.raw(key)?;
        v.parse().map_err(|_| malformed(self.line, format!("`{key}={v}` is not an index")))
    }

    fn real<T: Real>(&self, key: &str) -> Result<T> {
        let v = self.raw(key)?;
        let x: f64 = v
            .parse()
            .map_err(|_| malformed(self.line, format!("`{key}={v}` is not a number")))?;
        T::from_f64(x).ok_or_else(|| malformed(self.line, format!("`{key}={v}` out of range")))
    }

    fn pair(&self, key: &str) -> Result<[usize; 2]> {
        let v = self.raw(key)?;
        let bad = || malformed(self.line, format!("`{key}={v}` is not a path pair"));
        let (a, b) = v.split_once(',').ok_or_else(bad)?;
        Ok([a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?])
    }
}

pub fn from_text<T: Real>(text: &str) -> Result<OpticalNetlist<T>> {
    let mut netlist: Option<OpticalNetlist<T>> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let head = tokens.next().expect("nonempty line");

        let Some(net) = netlist.as_mut() else {
            if head != "netlist" {
                return Err(malformed(line_no, "expected `netlist` header"));
            }
            let f = Fields::parse(line_no, tokens)?;
            let dim = Dimension::new(f.usize("dim")?).map_err(|e| malformed(line_no, e))?;
            let prepared_state = match f.opt_raw("state") {
                Some(_) => Some(f.usize("state")?),
                None => None,
            };
            netlist = Some(OpticalNetlist {
                dim,
                reference_path: f.usize("reference_path")?,
                prepared_state,
                stages: Vec::new(),
            });
            continue;
        };

        let stage = Stage::from_label(head).ok_or_else(|| malformed(line_no, format!("unknown stage `{head}`")))?;
        let kind = tokens.next().ok_or_else(|| malformed(line_no, "missing element kind"))?;
        let f = Fields::parse(line_no, tokens)?;
        let element = match kind {
            "HWP" => Element::Hwp {
                angle: f.real("angle")?,
                path: f.usize("path")?,
            },
            "PBS" => Element::Pbs { paths: f.pair("paths")? },
            "BS" => Element::Bs { paths: f.pair("paths")? },
            "MIRROR" => Element::Mirror { paths: f.pair("paths")? },
            "PS" => Element::Ps {
                phase: f.real("phase")?,
                path: f.usize("path")?,
                pol: match f.opt_raw("pol") {
                    None => None,
                    Some("H") => Some(Polarization::H),
                    Some("V") => Some(Polarization::V),
                    Some(other) => return Err(malformed(line_no, format!("unknown polarization `{other}`"))),
                },
            },
            "DET" => Element::Det {
                label: f.raw("label")?.to_string(),
                path: f.usize("path")?,
            },
            other => return Err(malformed(line_no, format!("unknown element `{other}`"))),
        };

        match net.stages.last_mut() {
            Some(block) if block.stage == stage => block.push(element),
            _ => {
                let mut block = StageBlock::new(stage);
                block.push(element);
                net.stages.push(block);
            }
        }
    }
    let netlist = netlist.ok_or_else(|| Error::MalformedNetlist("empty netlist".into()))?;
    netlist.validate()?;
    Ok(netlist)
}

#[derive(Serialize, Deserialize)]
struct NetlistDocument<N> {
    schema_version: u32,
    netlist: N,
}

pub fn to_json<T: Real>(netlist: &OpticalNetlist<T>) -> String {
    serde_json::to_string_pretty(&NetlistDocument {
        schema_version: NETLIST_SCHEMA_VERSION,
        netlist,
    })
    .expect("netlist serializes")
}

pub fn from_json<T: Real>(json: &str) -> Result<OpticalNetlist<T>> {
    let doc: NetlistDocument<OpticalNetlist<T>> =
        serde_json::from_str(json).map_err(|e| Error::MalformedNetlist(e.to_string()))?;
    if doc.schema_version != NETLIST_SCHEMA_VERSION {
        return Err(Error::MalformedNetlist(format!(
            "unsupported schema_version {}",
            doc.schema_version
        )));
    }
    doc.netlist.validate()?;
    Ok(doc.netlist)
}
