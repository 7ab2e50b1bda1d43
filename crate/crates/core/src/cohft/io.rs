//! Line-oriented correlator file format.
//!
//! ```text
//! N 1
//! eta 1
//! bounds 2 10 13
//! q 1
//! b 0
//! charge 0
//! 0; (1,0) (1,0) (1,0); 1
//! ```
//! `bounds` (gmax nmax dmax) and the conformal lines `q`, `b`, `charge` are
//! optional; `#` starts a comment.

use std::fmt::Write;

use super::{CohftError, ConformalData, CorrelatorTable, Insertion, Matrix};
use crate::algebra::{fmt_q, parse_q, Q};

fn err(line: usize, msg: impl Into<String>) -> CohftError {
    CohftError::Format { line, msg: msg.into() }
}

fn rationals(line: usize, s: &str) -> Result<Vec<Q>, CohftError> {
    s.split_whitespace().map(|x| parse_q(x).ok_or_else(|| err(line, format!("bad rational `{x}`")))).collect()
}

fn square(line: usize, v: Vec<Q>, n: usize) -> Result<Matrix, CohftError> {
    if v.len() != n * n {
        return Err(err(line, format!("expected {} entries", n * n)));
    }
    Ok(v.chunks(n).map(|c| c.to_vec()).collect())
}

pub fn read_table(text: &str) -> Result<(CorrelatorTable, Option<ConformalData>), CohftError> {
    let mut n: Option<usize> = None;
    let mut eta: Option<Matrix> = None;
    let mut bounds: Option<(u8, usize, u8)> = None;
    let (mut q, mut b, mut charge) = (None, None, None);
    let mut records = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if line.contains(';') {
            records.push((ln, line.to_string()));
            continue;
        }
        let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        match head {
            "N" => n = Some(rest.trim().parse().map_err(|_| err(ln, "bad N"))?),
            "eta" => eta = Some(square(ln, rationals(ln, rest)?, n.ok_or_else(|| err(ln, "eta before N"))?)?),
            "q" => q = Some(square(ln, rationals(ln, rest)?, n.ok_or_else(|| err(ln, "q before N"))?)?),
            "b" => b = Some(rationals(ln, rest)?),
            "charge" => charge = rationals(ln, rest)?.pop(),
            "bounds" => {
                let v: Vec<usize> =
                    rest.split_whitespace().map(|x| x.parse().map_err(|_| err(ln, "bad bound"))).collect::<Result<_, _>>()?;
                let [g, nm, d] = v[..] else { return Err(err(ln, "bounds needs gmax nmax dmax")) };
                bounds = Some((g as u8, nm, d as u8));
            }
            other => return Err(err(ln, format!("unknown header `{other}`"))),
        }
    }
    let n = n.ok_or_else(|| err(0, "missing N"))?;
    let eta = eta.ok_or_else(|| err(0, "missing eta"))?;
    let mut parsed = Vec::new();
    for (ln, line) in records {
        let parts: Vec<&str> = line.split(';').map(str::trim).collect();
        let [g, ins, val] = parts[..] else { return Err(err(ln, "record needs `g; insertions; value`")) };
        let g: u8 = g.parse().map_err(|_| err(ln, "bad genus"))?;
        let mut list = Vec::new();
        for tok in ins.split(')').map(str::trim).filter(|t| !t.is_empty()) {
            let inner = tok.strip_prefix('(').ok_or_else(|| err(ln, format!("bad insertion `{tok}`")))?;
            let (a, d) = inner.split_once(',').ok_or_else(|| err(ln, "insertion needs (a,d)"))?;
            let a: u8 = a.trim().parse().map_err(|_| err(ln, "bad alpha"))?;
            let d: u8 = d.trim().parse().map_err(|_| err(ln, "bad d"))?;
            if a == 0 || a as usize > n {
                return Err(err(ln, format!("alpha {a} outside 1..={n}")));
            }
            list.push(Insertion::new(a, d));
        }
        let v = parse_q(val).ok_or_else(|| err(ln, format!("bad value `{val}`")))?;
        parsed.push((g, list, v));
    }
    let (gmax, nmax, dmax) = bounds.unwrap_or_else(|| {
        let g = parsed.iter().map(|p| p.0).max().unwrap_or(0);
        let nm = parsed.iter().map(|p| p.1.len()).max().unwrap_or(3);
        let d = parsed.iter().flat_map(|p| p.1.iter().map(|i| i.d)).max().unwrap_or(0);
        (g, nm, d)
    });
    let mut t = CorrelatorTable::new(eta, gmax, nmax, dmax)?;
    for (g, list, v) in parsed {
        t.insert(g, list, v);
    }
    let conf = match (q, b, charge) {
        (Some(q), Some(b), Some(charge)) => Some(ConformalData { q, b, charge }),
        (None, None, None) => None,
        _ => return Err(err(0, "conformal data needs q, b and charge together")),
    };
    Ok((t, conf))
}

pub fn write_table(t: &CorrelatorTable, conf: Option<&ConformalData>) -> String {
    let mut s = String::new();
    let row = |m: &Matrix| m.iter().flatten().map(fmt_q).collect::<Vec<_>>().join(" ");
    writeln!(s, "N {}", t.n()).unwrap();
    writeln!(s, "eta {}", row(t.eta())).unwrap();
    writeln!(s, "bounds {} {} {}", t.gmax, t.nmax, t.dmax).unwrap();
    if let Some(c) = conf {
        writeln!(s, "q {}", row(&c.q)).unwrap();
        writeln!(s, "b {}", c.b.iter().map(fmt_q).collect::<Vec<_>>().join(" ")).unwrap();
        writeln!(s, "charge {}", fmt_q(&c.charge)).unwrap();
    }
    for (g, ins, v) in t.entries() {
        let list = ins.iter().map(|i| format!("({},{})", i.alpha, i.d)).collect::<Vec<_>>().join(" ");
        writeln!(s, "{g}; {list}; {}", fmt_q(v)).unwrap();
    }
    s
}
