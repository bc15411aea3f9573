//! Parsing of seed and target-count lists such as `1..20` or `5,10,20`.

use std::ops::RangeInclusive;

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("invalid {what} '{}'", s.trim()))
}

fn parse_range(s: &str, what: &str) -> Result<Option<RangeInclusive<u64>>, String> {
    let Some((a, b)) = s.split_once("..") else {
        return Ok(None);
    };
    let b = b.strip_prefix('=').unwrap_or(b);
    let (a, b): (u64, u64) = (parse_num(a, what)?, parse_num(b, what)?);
    if a > b {
        return Err(format!("empty {what} range {a}..{b}"));
    }
    Ok(Some(a..=b))
}

/// Inclusive ranges (`1..20`, `1..=20`) and comma-separated lists, mixed freely.
pub fn parse_u64_list(s: &str, what: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        match parse_range(part, what)? {
            Some(r) => out.extend(r),
            None => out.push(parse_num(part, what)?),
        }
    }
    if out.is_empty() {
        return Err(format!("no {what} given"));
    }
    Ok(out)
}

pub fn parse_usize_list(s: &str, what: &str) -> Result<Vec<usize>, String> {
    parse_u64_list(s, what)?
        .into_iter()
        .map(|v| usize::try_from(v).map_err(|_| format!("{what} {v} is too large")))
        .collect()
}
