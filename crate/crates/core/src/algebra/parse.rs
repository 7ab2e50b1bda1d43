//! Reader for the canonical text form, e.g. `-1/2*eps^2*u[1,1]^-2*th[1,0]`.

use num_traits::One;

use super::{parse_q, AlgebraError, Ctx, DiffExpr, Jet, Monomial, Q};

fn err(msg: impl Into<String>) -> AlgebraError {
    AlgebraError::Parse(msg.into())
}

fn parse_index(s: &str) -> Result<(u8, u8), AlgebraError> {
    let inner = s.strip_prefix('[').and_then(|x| x.strip_suffix(']')).ok_or_else(|| err(s))?;
    let (a, b) = inner.split_once(',').ok_or_else(|| err(s))?;
    let a = a.trim().parse().map_err(|_| err(s))?;
    let b = b.trim().parse().map_err(|_| err(s))?;
    Ok((a, b))
}

fn parse_term(ctx: Ctx, t: &str, neg: bool) -> Result<DiffExpr, AlgebraError> {
    let mut coef = if neg { -Q::one() } else { Q::one() };
    let mut g = 0u8;
    let mut even = Vec::new();
    let mut odd = Vec::new();
    for f in t.split('*') {
        let f = f.trim();
        if f.is_empty() {
            return Err(err(format!("empty factor in `{t}`")));
        }
        if let Some(rest) = f.strip_prefix("eps") {
            let e: u32 = match rest.strip_prefix('^') {
                Some(x) => x.parse().map_err(|_| err(f))?,
                None if rest.is_empty() => 1,
                None => return Err(err(f)),
            };
            if e % 2 == 1 {
                return Err(err(format!("odd eps power in `{f}`")));
            }
            g += (e / 2) as u8;
        } else if let Some(rest) = f.strip_prefix("th") {
            let (a, s) = parse_index(rest)?;
            if a == 0 || a > ctx.n {
                return Err(AlgebraError::BadIndex(a, ctx.n));
            }
            odd.push(Jet::new(a, s));
        } else if let Some(rest) = f.strip_prefix('u') {
            let (idx, e) = match rest.split_once('^') {
                Some((i, e)) => (i, e.parse::<i32>().map_err(|_| err(f))?),
                None => (rest, 1),
            };
            let (a, s) = parse_index(idx)?;
            if a == 0 || a > ctx.n {
                return Err(AlgebraError::BadIndex(a, ctx.n));
            }
            even.push((Jet::new(a, s), e));
        } else {
            coef *= parse_q(f).ok_or_else(|| err(format!("bad coefficient `{f}`")))?;
        }
    }
    if odd.len() != {
        let mut o = odd.clone();
        o.sort();
        o.dedup();
        o.len()
    } {
        return Ok(DiffExpr::zero(ctx));
    }
    let (sign, m) = Monomial::new(even, odd)?;
    if sign {
        coef = -coef;
    }
    Ok(DiffExpr::monomial(ctx, g, m, coef))
}

pub(super) fn parse_expr(ctx: Ctx, s: &str) -> Result<DiffExpr, AlgebraError> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(err("empty expression"));
    }
    let mut out = DiffExpr::zero(ctx);
    let bytes = s.as_bytes();
    let mut start = 0;
    let mut neg = false;
    if bytes[0] == b'-' || bytes[0] == b'+' {
        neg = bytes[0] == b'-';
        start = 1;
    }
    let mut depth = 0i32;
    let mut i = start;
    while i <= bytes.len() {
        let at_end = i == bytes.len();
        let c = if at_end { b'+' } else { bytes[i] };
        match c {
            b'[' => depth += 1,
            b']' => depth -= 1,
            // a sign right after `^` belongs to an exponent
            b'+' | b'-' if depth == 0 && (at_end || bytes[i - 1] != b'^') => {
                let term = &s[start..i];
                if term == "0" {
                    // literal zero
                } else {
                    out += &parse_term(ctx, term, neg)?;
                }
                neg = c == b'-';
                start = i + 1;
            }
            _ => {}
        }
        i += 1;
    }
    Ok(out)
}
