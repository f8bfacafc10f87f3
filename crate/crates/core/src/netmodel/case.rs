//! Case file reader and writer.
//!
//! The format is a sectioned, whitespace-separated text table (BUS / BRANCH /
//! GEN / LOAD / DYN) with `#` comments and a `BASE_MVA` header; column orders
//! are fixed and documented in docs/case_format.md. Power columns are in MW /
//! MVAr so published test cases can be transcribed directly; conversion to
//! per-unit happens on load.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::{
    Branch, BranchKind, Bus, BusType, DynEntry, ElementStatus, ExciterParams, Generator,
    GovernorParams, Load, Network, NetworkError,
};

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("cannot read case file: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Invalid(#[from] NetworkError),
}

struct LineParser<'a> {
    tokens: Vec<&'a str>,
    cursor: usize,
    line: usize,
}

impl<'a> LineParser<'a> {
    fn new(tokens: Vec<&'a str>, line: usize) -> Self {
        LineParser { tokens, cursor: 0, line }
    }

    fn err(&self, msg: impl Into<String>) -> CaseError {
        CaseError::Parse { line: self.line, msg: msg.into() }
    }

    fn next_tok(&mut self, what: &str) -> Result<&'a str, CaseError> {
        let t = self
            .tokens
            .get(self.cursor)
            .ok_or_else(|| self.err(format!("missing column `{what}`")))?;
        self.cursor += 1;
        Ok(t)
    }

    fn usize(&mut self, what: &str) -> Result<usize, CaseError> {
        let t = self.next_tok(what)?;
        t.parse()
            .map_err(|_| self.err(format!("column `{what}`: expected integer, got `{t}`")))
    }

    fn f64(&mut self, what: &str) -> Result<f64, CaseError> {
        let t = self.next_tok(what)?;
        t.parse()
            .map_err(|_| self.err(format!("column `{what}`: expected number, got `{t}`")))
    }

    fn done(&self) -> Result<(), CaseError> {
        if self.cursor != self.tokens.len() {
            return Err(self.err(format!(
                "unexpected trailing column `{}`",
                self.tokens[self.cursor]
            )));
        }
        Ok(())
    }
}

pub fn load_case(path: impl AsRef<Path>) -> Result<Network, CaseError> {
    let text = std::fs::read_to_string(path)?;
    load_case_str(&text)
}

/// Parses case text. See [`load_case`] for the file-based variant.
pub fn load_case_str(text: &str) -> Result<Network, CaseError> {
    let mut base_mva = 100.0;
    let mut buses = Vec::new();
    let mut branches = Vec::new();
    let mut generators = Vec::new();
    let mut loads = Vec::new();
    let mut dyn_entries = Vec::new();
    let mut section: Option<&str> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let mut p = LineParser::new(tokens.clone(), line);
        match (section, tokens[0]) {
            (None, "BASE_MVA") => {
                p.next_tok("BASE_MVA")?;
                base_mva = p.f64("base value")?;
                p.done()?;
            }
            (None, "BUS" | "BRANCH" | "GEN" | "LOAD" | "DYN") => section = Some(tokens[0]),
            (Some(_), "END") => section = None,
            (Some("BUS"), _) => {
                let id = p.usize("id")?;
                let voltage_kv = p.f64("kv")?;
                let t = p.next_tok("type")?;
                let bus_type = match t {
                    "slack" => BusType::Slack,
                    "pv" => BusType::Pv,
                    "pq" => BusType::Pq,
                    other => return Err(p.err(format!("unknown bus type `{other}`"))),
                };
                p.done()?;
                buses.push(Bus { id, voltage_kv, bus_type, status: ElementStatus::InService });
            }
            (Some("BRANCH"), _) => {
                let id = p.usize("id")?;
                let from_bus = p.usize("from")?;
                let to_bus = p.usize("to")?;
                let r = p.f64("r")?;
                let x = p.f64("x")?;
                let b_shunt = p.f64("b")?;
                let tap = p.f64("tap")?;
                let rating_mva = p.f64("rating")?;
                let kind = match p.next_tok("kind")? {
                    "line" => BranchKind::Line,
                    "transformer" => BranchKind::Transformer,
                    other => return Err(p.err(format!("unknown branch kind `{other}`"))),
                };
                p.done()?;
                branches.push(Branch {
                    id,
                    from_bus,
                    to_bus,
                    r,
                    x,
                    b_shunt,
                    tap,
                    rating_mva,
                    kind,
                    status: ElementStatus::InService,
                });
            }
            (Some("GEN"), _) => {
                let id = p.usize("id")?;
                let bus = p.usize("bus")?;
                let p_mw = p.f64("p_mw")?;
                let q_min = p.f64("qmin")? / base_mva;
                let q_max = p.f64("qmax")? / base_mva;
                let v_set = p.f64("v_set")?;
                let inertia_h = p.f64("h")?;
                let damping_d = p.f64("d")?;
                let xd_prime = p.f64("xd_p")?;
                let p_max = p.f64("p_max")? / base_mva;
                let droop = p.f64("droop")?;
                let t_gov = p.f64("t_gov")?;
                let k_a = p.f64("k_a")?;
                let t_ex = p.f64("t_ex")?;
                let efd_max = p.f64("efd_max")?;
                p.done()?;
                generators.push(Generator {
                    id,
                    bus,
                    p_set: p_mw / base_mva,
                    q_min,
                    q_max,
                    v_set,
                    inertia_h,
                    damping_d,
                    xd_prime,
                    governor: GovernorParams { p_max, droop, t_gov },
                    exciter: ExciterParams { k_a, t_ex, efd_max },
                    status: ElementStatus::InService,
                });
            }
            (Some("LOAD"), _) => {
                let id = p.usize("id")?;
                let bus = p.usize("bus")?;
                let p_mw = p.f64("p_mw")?;
                let q_mvar = p.f64("q_mvar")?;
                let sheddable_fraction = p.f64("sheddable")?;
                p.done()?;
                loads.push(Load {
                    id,
                    bus,
                    p: p_mw / base_mva,
                    q: q_mvar / base_mva,
                    sheddable_fraction,
                    status: ElementStatus::InService,
                });
            }
            (Some("DYN"), _) => match tokens[0] {
                "SET" => {
                    p.next_tok("SET")?;
                    let key = p.next_tok("key")?.to_string();
                    let value = p.f64("value")?;
                    p.done()?;
                    dyn_entries.push(DynEntry { selector: None, key, value });
                }
                "RELAY" => {
                    p.next_tok("RELAY")?;
                    let kind = p.next_tok("kind")?.to_string();
                    let element = p.next_tok("element")?.to_string();
                    let key = p.next_tok("key")?.to_string();
                    let value = p.f64("value")?;
                    p.done()?;
                    dyn_entries.push(DynEntry { selector: Some((kind, element)), key, value });
                }
                other => return Err(p.err(format!("unknown DYN directive `{other}`"))),
            },
            (None, other) => {
                return Err(p.err(format!("unexpected token `{other}` outside any section")))
            }
            (Some(s), _) => return Err(p.err(format!("unreachable section `{s}`"))),
        }
    }

    Ok(Network::new(base_mva, buses, branches, generators, loads, dyn_entries)?)
}

pub fn write_case(net: &Network, path: impl AsRef<Path>) -> Result<(), CaseError> {
    std::fs::write(path, write_case_string(net))?;
    Ok(())
}

/// Renders a network back to case text. Loading the output reproduces the
/// network exactly for any network that itself came from a case file.
pub fn write_case_string(net: &Network) -> String {
    let b = net.base_mva;
    let mut s = String::new();
    let _ = writeln!(s, "BASE_MVA {b}");
    let _ = writeln!(s, "\nBUS");
    for bus in &net.buses {
        let t = match bus.bus_type {
            BusType::Slack => "slack",
            BusType::Pv => "pv",
            BusType::Pq => "pq",
        };
        let _ = writeln!(s, "{} {} {}", bus.id, bus.voltage_kv, t);
    }
    let _ = writeln!(s, "END\n\nBRANCH");
    for br in &net.branches {
        let kind = match br.kind {
            BranchKind::Line => "line",
            BranchKind::Transformer => "transformer",
        };
        let _ = writeln!(
            s,
            "{} {} {} {} {} {} {} {} {}",
            br.id, br.from_bus, br.to_bus, br.r, br.x, br.b_shunt, br.tap, br.rating_mva, kind
        );
    }
    let _ = writeln!(s, "END\n\nGEN");
    for g in &net.generators {
        let _ = writeln!(
            s,
            "{} {} {} {} {} {} {} {} {} {} {} {} {} {} {}",
            g.id,
            g.bus,
            g.p_set * b,
            g.q_min * b,
            g.q_max * b,
            g.v_set,
            g.inertia_h,
            g.damping_d,
            g.xd_prime,
            g.governor.p_max * b,
            g.governor.droop,
            g.governor.t_gov,
            g.exciter.k_a,
            g.exciter.t_ex,
            g.exciter.efd_max
        );
    }
    let _ = writeln!(s, "END\n\nLOAD");
    for l in &net.loads {
        let _ = writeln!(
            s,
            "{} {} {} {} {}",
            l.id,
            l.bus,
            l.p * b,
            l.q * b,
            l.sheddable_fraction
        );
    }
    let _ = writeln!(s, "END");
    if !net.dyn_entries.is_empty() {
        let _ = writeln!(s, "\nDYN");
        for e in &net.dyn_entries {
            match &e.selector {
                None => {
                    let _ = writeln!(s, "SET {} {}", e.key, e.value);
                }
                Some((kind, elem)) => {
                    let _ = writeln!(s, "RELAY {} {} {} {}", kind, elem, e.key, e.value);
                }
            }
        }
        let _ = writeln!(s, "END");
    }
    s
}
