//! Combiner spec files.
//!
//! ```text
//! name cipherbent6
//! registers standins.reg        # register parameter file, relative path
//! registers a12.reg
//! wiring S27 S28 S30 S31 S32 A12
//! combiner
//! x0 x3
//! x1 x4
//! x2 x5
//! ```
//!
//! `wiring` lists the register driving `x0`, `x1`, … in order. Without it all
//! loaded registers are wired in ascending length order (file order breaks
//! ties). Everything after the `combiner` line is the combining function in
//! ANF text form.

use std::path::Path;

use crate::boolfun::parse_anf_lines;
use crate::combiner::CombinerSpec;
use crate::error::{Error, Result};
use crate::nlfsr::{parse_register_file, RegisterSpec};

/// Parses spec text; `load` returns the contents of a referenced register file.
pub fn parse_combiner_spec(text: &str, load: &mut dyn FnMut(&str) -> Result<String>) -> Result<CombinerSpec> {
    let mut name = None;
    let mut pool: Vec<RegisterSpec> = Vec::new();
    let mut wiring: Option<(usize, Vec<String>)> = None;
    let mut combiner_at = None;
    let lines: Vec<(usize, &str)> = text.lines().enumerate().map(|(i, l)| (i + 1, l)).collect();
    for &(lineno, raw) in &lines {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut parts = body.split_whitespace();
        let key = parts.next().expect("nonempty");
        let args: Vec<&str> = parts.collect();
        match key {
            "name" => {
                let [n] = args.as_slice() else {
                    return Err(Error::parse(lineno, "expected `name <label>`"));
                };
                if name.replace(n.to_string()).is_some() {
                    return Err(Error::parse(lineno, "duplicate `name`"));
                }
            }
            "registers" => {
                let [path] = args.as_slice() else {
                    return Err(Error::parse(lineno, "expected `registers <file>`"));
                };
                let text = load(path)?;
                for r in parse_register_file(&text)
                    .map_err(|e| Error::parse(lineno, format!("in register file `{path}`: {e}")))?
                {
                    if pool.iter().any(|p| p.name() == r.name()) {
                        return Err(Error::parse(lineno, format!("register `{}` defined twice", r.name())));
                    }
                    pool.push(r);
                }
            }
            "wiring" => {
                if args.is_empty() {
                    return Err(Error::parse(lineno, "empty wiring"));
                }
                if wiring.is_some() {
                    return Err(Error::parse(lineno, "duplicate `wiring`"));
                }
                wiring = Some((lineno, args.iter().map(|s| s.to_string()).collect()));
            }
            "combiner" => {
                if !args.is_empty() {
                    return Err(Error::parse(lineno, "`combiner` takes no arguments"));
                }
                combiner_at = Some(lineno);
                break;
            }
            other => return Err(Error::parse(lineno, format!("unknown directive `{other}`"))),
        }
    }
    let combiner_line = combiner_at.ok_or_else(|| Error::parse_nl("missing `combiner` block"))?;
    let registers = match wiring {
        Some((lineno, names)) => names
            .iter()
            .map(|n| {
                pool.iter()
                    .find(|r| r.name() == n)
                    .cloned()
                    .ok_or_else(|| Error::parse(lineno, format!("wiring names unknown register `{n}`")))
            })
            .collect::<Result<Vec<_>>>()?,
        None => {
            let mut regs = pool;
            regs.sort_by_key(|r| r.length());
            regs
        }
    };
    if registers.is_empty() {
        return Err(Error::parse_nl("no registers wired"));
    }
    let anf = parse_anf_lines(
        lines.iter().copied().filter(|&(l, _)| l > combiner_line),
        Some(registers.len()),
    )?;
    CombinerSpec::new(name.unwrap_or_else(|| "combiner".to_string()), registers, anf.poly)
}

/// Reads a spec file; register files resolve relative to its directory.
pub fn load_combiner_spec(path: &Path) -> Result<CombinerSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_combiner_spec(&text, &mut |rel| {
        let p = base.join(rel);
        std::fs::read_to_string(&p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
    })
}

/// Renders a spec that loads its registers from `register_files`.
pub fn format_combiner_spec(spec: &CombinerSpec, register_files: &[&str]) -> String {
    let mut s = format!("name {}\n", spec.name());
    for f in register_files {
        s.push_str(&format!("registers {f}\n"));
    }
    let names: Vec<&str> = spec.registers().iter().map(|r| r.name()).collect();
    s.push_str(&format!("wiring {}\ncombiner\n", names.join(" ")));
    s.push_str(&spec.combiner().to_text());
    s
}
