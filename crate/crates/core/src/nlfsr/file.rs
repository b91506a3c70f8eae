//! Register parameter files.
//!
//! ```text
//! # comment
//! register A12 33
//! x0
//! x8 x15
//! register T6 6
//! 0
//! 1 4
//! ```
//!
//! Each `register <name> <length>` header is followed by the ANF lines of its
//! feedback function (see [`parse_anf`](crate::boolfun::parse_anf)).

use crate::boolfun::parse_anf_lines;
use crate::error::{Error, Result};
use crate::nlfsr::{RegisterSpec, MAX_REGISTER_LEN};

/// Parses the feedback ANF of a single register of length `length`.
pub fn parse_register(text: &str, length: usize, name: &str) -> Result<RegisterSpec> {
    if length == 0 || length > MAX_REGISTER_LEN {
        return Err(Error::Capacity(format!("register length {length} outside 1..={MAX_REGISTER_LEN}")));
    }
    let parsed = parse_anf_lines(text.lines().enumerate().map(|(i, l)| (i + 1, l)), Some(length))?;
    RegisterSpec::new(name, parsed.poly)
}

pub fn parse_register_file(text: &str) -> Result<Vec<RegisterSpec>> {
    struct Pending<'a> {
        name: String,
        length: usize,
        lines: Vec<(usize, &'a str)>,
    }

    fn finish(p: Pending<'_>) -> Result<RegisterSpec> {
        let parsed = parse_anf_lines(p.lines.into_iter(), Some(p.length))?;
        RegisterSpec::new(p.name, parsed.poly)
    }

    let mut out: Vec<RegisterSpec> = Vec::new();
    let mut current: Option<Pending> = None;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if let Some(rest) = body.strip_prefix("register") {
            if !rest.is_empty() && !rest.starts_with(char::is_whitespace) {
                return Err(Error::parse(lineno, format!("unexpected token `{body}`")));
            }
            let fields: Vec<&str> = rest.split_whitespace().collect();
            let [name, len] = fields.as_slice() else {
                return Err(Error::parse(lineno, "expected `register <name> <length>`"));
            };
            let length: usize = len
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad register length `{len}`")))?;
            if length == 0 || length > MAX_REGISTER_LEN {
                return Err(Error::parse(
                    lineno,
                    format!("register length {length} outside 1..={MAX_REGISTER_LEN}"),
                ));
            }
            if let Some(p) = current.take() {
                out.push(finish(p)?);
            }
            if out.iter().any(|r| r.name() == *name) {
                return Err(Error::parse(lineno, format!("duplicate register name `{name}`")));
            }
            current = Some(Pending {
                name: name.to_string(),
                length,
                lines: Vec::new(),
            });
        } else if let Some(p) = current.as_mut() {
            p.lines.push((lineno, raw));
        } else if !body.is_empty() {
            return Err(Error::parse(lineno, "ANF line before any `register` header"));
        }
    }
    if let Some(p) = current.take() {
        out.push(finish(p)?);
    }
    if out.is_empty() {
        return Err(Error::parse_nl("no registers defined"));
    }
    Ok(out)
}

pub fn format_register_file(specs: &[RegisterSpec]) -> String {
    let mut s = String::new();
    for r in specs {
        s.push_str(&format!("register {} {}\n", r.name(), r.length()));
        s.push_str(&r.feedback().to_text());
    }
    s
}
