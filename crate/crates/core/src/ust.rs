//! The UST text format for uncertain strings.
//!
//! ```text
//! # comment
//! ustr branchy
//! pos a:0.3 b:0.4 d:0.3
//! pos a:0.6 c:0.4
//! corr 2 c 1 a 0.5 0.3
//! end
//! ```
//!
//! One `pos` line per position, `corr <i> <sym_i> <j> <sym_j> <p_plus>
//! <p_minus>` for correlations, blocks closed by `end`. Several blocks make
//! a collection. Zero-probability entries are dropped while reading.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Correlation, DocumentCollection, PositionDistribution, Symbol, UncertainString};

struct Block {
    name: String,
    line: usize,
    positions: Vec<PositionDistribution>,
    correlations: Vec<Correlation>,
}

/// Parses every block in `src`; `file` is only used in error messages.
pub fn parse(src: &str, file: &str) -> Result<Vec<UncertainString>> {
    let err = |line: usize, msg: String| Error::Parse {
        file: file.to_string(),
        line,
        msg,
    };
    let mut out = Vec::new();
    let mut cur: Option<Block> = None;
    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let text = raw.split('#').next().unwrap().trim();
        if text.is_empty() {
            continue;
        }
        let mut words = text.split_whitespace();
        let head = words.next().unwrap();
        let args: Vec<&str> = words.collect();
        match (head, cur.as_mut()) {
            ("ustr", None) => {
                let [name] = args[..] else {
                    return Err(err(line, "expected `ustr <name>`".into()));
                };
                cur = Some(Block {
                    name: name.to_string(),
                    line,
                    positions: Vec::new(),
                    correlations: Vec::new(),
                });
            }
            ("ustr", Some(b)) => {
                return Err(err(line, format!("block `{}` is not closed by `end`", b.name)));
            }
            ("pos", Some(b)) => {
                let mut entries = Vec::with_capacity(args.len());
                for a in &args {
                    let (s, p) = a
                        .split_once(':')
                        .ok_or_else(|| err(line, format!("expected <sym>:<prob>, got `{a}`")))?;
                    let sym = parse_symbol(s).map_err(|m| err(line, m))?;
                    let prob = parse_prob(p).map_err(|m| err(line, m))?;
                    if entries.iter().any(|&(t, _)| t == sym) {
                        return Err(err(line, format!("symbol {sym} listed twice")));
                    }
                    entries.push((sym, prob));
                }
                let dist = PositionDistribution::new(entries);
                if dist.is_empty() {
                    return Err(err(line, "position has no symbol with nonzero probability".into()));
                }
                b.positions.push(dist);
            }
            ("corr", Some(b)) => {
                let [i, si, j, sj, pp, pm] = args[..] else {
                    return Err(err(
                        line,
                        "expected `corr <i> <sym_i> <j> <sym_j> <p_plus> <p_minus>`".into(),
                    ));
                };
                let index = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| err(line, format!("bad position `{s}`")))
                };
                b.correlations.push(Correlation {
                    src_pos: index(i)?,
                    src_sym: parse_symbol(si).map_err(|m| err(line, m))?,
                    cond_pos: index(j)?,
                    cond_sym: parse_symbol(sj).map_err(|m| err(line, m))?,
                    p_plus: parse_prob(pp).map_err(|m| err(line, m))?,
                    p_minus: parse_prob(pm).map_err(|m| err(line, m))?,
                });
            }
            ("end", Some(_)) => {
                if !args.is_empty() {
                    return Err(err(line, "unexpected text after `end`".into()));
                }
                let b = cur.take().unwrap();
                let u = UncertainString::new(b.name, b.positions, b.correlations);
                u.ensure_valid().map_err(|e| err(b.line, e.to_string()))?;
                out.push(u);
            }
            ("pos" | "corr" | "end", None) => {
                return Err(err(line, format!("`{head}` outside a `ustr` block")));
            }
            _ => return Err(err(line, format!("unknown directive `{head}`"))),
        }
    }
    if let Some(b) = cur {
        return Err(err(b.line, format!("block `{}` is not closed by `end`", b.name)));
    }
    if out.is_empty() {
        return Err(err(0, "no `ustr` block found".into()));
    }
    Ok(out)
}

fn parse_symbol(s: &str) -> std::result::Result<Symbol, String> {
    match s.as_bytes() {
        [b] => Symbol::new(*b).ok_or_else(|| format!("`{s}` is not a valid symbol")),
        _ => Err(format!("symbol must be a single character, got `{s}`")),
    }
}

fn parse_prob(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(p) if (0.0..=1.0).contains(&p) => Ok(p),
        Ok(p) => Err(format!("probability {p} outside [0, 1]")),
        Err(_) => Err(format!("bad probability `{s}`")),
    }
}

pub fn parse_collection(src: &str, file: &str) -> Result<DocumentCollection> {
    DocumentCollection::checked(parse(src, file)?)
}

pub fn read_file(path: &Path) -> Result<DocumentCollection> {
    let src = std::fs::read_to_string(path)?;
    parse_collection(&src, &path.display().to_string())
}

/// Writes strings in a form `parse` reads back identically.
pub fn write(docs: &[UncertainString]) -> String {
    let mut s = String::new();
    for u in docs {
        writeln!(s, "ustr {}", u.name()).unwrap();
        for d in u.positions() {
            s.push_str("pos");
            for &(sym, p) in d.entries() {
                write!(s, " {sym}:{p}").unwrap();
            }
            s.push('\n');
        }
        for c in u.correlations() {
            writeln!(
                s,
                "corr {} {} {} {} {} {}",
                c.src_pos, c.src_sym, c.cond_pos, c.cond_sym, c.p_plus, c.p_minus
            )
            .unwrap();
        }
        s.push_str("end\n");
    }
    s
}
