//! Line-oriented text formats: polytope files, class files and the
//! append-only run log. All indices are 0-based; rationals are written as
//! `p` or `p/q`. Writing then parsing is the identity, byte for byte.
//!
//! Polytope file:
//! ```text
//! polytope <name>
//! ambient_dim <d>
//! vertices <n>
//! <n lines of d rational tokens>
//! symmetry <g>
//! <g lines of n images>
//! ```
//!
//! Class file: header lines `polytope`, `ambient_dim`, `method`, `cutoff`,
//! `seed`, `status`, `count`, then one record per line:
//! `a1 .. ad b tight_size orbit_size` (orbit size `-` when not computed).
//!
//! Log file: a header line `log <name> <method> <cutoff> <seed>`, then
//! `C <key indices> | <a1 .. ad b> | <tight indices>` per discovered class
//! and `P <ordinal>` when a class's descent completed.

use std::fmt::Write as _;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::One;

use crate::dd::RunStatus;
use crate::exact::{Int, Rat};
use crate::model::{Inequality, VPolytope};
use crate::sampler::{ClassRecord, ResumeState, RunLog};
use crate::symmetry::{CanonicalKey, Perm, PermGroup};
use crate::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn rat_to_token(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn token_to_rat(tok: &str, line: usize) -> Result<Rat> {
    match tok.split_once('/') {
        None => BigInt::from_str(tok)
            .map(Rat::from_integer)
            .map_err(|_| parse_err(line, format!("bad rational token '{tok}'"))),
        Some((n, d)) => {
            let n = BigInt::from_str(n)
                .map_err(|_| parse_err(line, format!("bad numerator '{n}'")))?;
            let d = BigInt::from_str(d)
                .map_err(|_| parse_err(line, format!("bad denominator '{d}'")))?;
            if d <= BigInt::from(0) {
                return Err(parse_err(line, "denominator must be positive"));
            }
            Ok(Rat::new(n, d))
        }
    }
}

/// Serializes a polytope and its symmetry generators.
pub fn write_polytope(p: &VPolytope, group: &PermGroup) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "polytope {}", p.name());
    let _ = writeln!(out, "ambient_dim {}", p.ambient_dim());
    let _ = writeln!(out, "vertices {}", p.len());
    for v in p.vertices() {
        let tokens: Vec<String> = v.iter().map(rat_to_token).collect();
        let _ = writeln!(out, "{}", tokens.join(" "));
    }
    let _ = writeln!(out, "symmetry {}", group.generators().len());
    for g in group.generators() {
        let tokens: Vec<String> = g.image().iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "{}", tokens.join(" "));
    }
    out
}

pub fn save_polytope(path: &Path, p: &VPolytope, group: &PermGroup) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(write_polytope(p, group).as_bytes())?;
    f.flush()?;
    Ok(())
}

struct LineReader<'a> {
    lines: std::str::Lines<'a>,
    number: usize,
}

impl<'a> LineReader<'a> {
    fn new(text: &'a str) -> Self {
        LineReader {
            lines: text.lines(),
            number: 0,
        }
    }

    fn next(&mut self) -> Result<&'a str> {
        self.number += 1;
        self.lines
            .next()
            .ok_or_else(|| parse_err(self.number, "unexpected end of file"))
    }

    fn keyword(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next()?;
        line.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| parse_err(self.number, format!("expected '{key} ...' line")))
    }

    fn keyword_usize(&mut self, key: &str) -> Result<usize> {
        let value = self.keyword(key)?;
        value
            .trim()
            .parse()
            .map_err(|_| parse_err(self.number, format!("bad {key} value '{value}'")))
    }
}

/// Parses a polytope file.
pub fn parse_polytope(text: &str) -> Result<(Arc<VPolytope>, Arc<PermGroup>)> {
    let mut r = LineReader::new(text);
    let name = r.keyword("polytope")?.trim().to_string();
    let d = r.keyword_usize("ambient_dim")?;
    let n = r.keyword_usize("vertices")?;
    let mut vertices = Vec::with_capacity(n);
    for _ in 0..n {
        let line = r.next()?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != d {
            return Err(parse_err(
                r.number,
                format!("expected {d} coordinates, got {}", tokens.len()),
            ));
        }
        let mut v = Vec::with_capacity(d);
        for t in tokens {
            v.push(token_to_rat(t, r.number)?);
        }
        vertices.push(v);
    }
    let g = r.keyword_usize("symmetry")?;
    let mut gens = Vec::with_capacity(g);
    for _ in 0..g {
        let line = r.next()?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != n {
            return Err(parse_err(
                r.number,
                format!("expected {n} images, got {}", tokens.len()),
            ));
        }
        let mut image = Vec::with_capacity(n);
        for t in tokens {
            image.push(
                t.parse::<u32>()
                    .map_err(|_| parse_err(r.number, format!("bad image '{t}'")))?,
            );
        }
        gens.push(Perm::new(image).map_err(|e| parse_err(r.number, e.to_string()))?);
    }
    let polytope = Arc::new(VPolytope::new(name, vertices)?);
    let group = Arc::new(PermGroup::new(n, gens)?);
    Ok((polytope, group))
}

pub fn load_polytope(path: &Path) -> Result<(Arc<VPolytope>, Arc<PermGroup>)> {
    let text = std::fs::read_to_string(path)?;
    parse_polytope(&text)
}

/// Class file header.
#[derive(Clone, Debug)]
pub struct ClassFileMeta {
    pub polytope: String,
    pub ambient_dim: usize,
    pub method: String,
    pub cutoff: usize,
    pub seed: u64,
    pub status: RunStatus,
}

/// One class file record.
#[derive(Clone, Debug)]
pub struct ClassFileRecord {
    pub ineq: Inequality,
    pub tight_size: usize,
    pub orbit_size: Option<u64>,
}

fn status_token(status: &RunStatus) -> String {
    match status {
        RunStatus::Complete => "complete".to_string(),
        RunStatus::Stopped(reason) => format!("stopped:{reason}"),
    }
}

fn parse_status(tok: &str, line: usize) -> Result<RunStatus> {
    if tok == "complete" {
        Ok(RunStatus::Complete)
    } else if let Some(reason) = tok.strip_prefix("stopped:") {
        Ok(RunStatus::Stopped(reason.to_string()))
    } else {
        Err(parse_err(line, format!("bad status '{tok}'")))
    }
}

pub fn write_class_file(meta: &ClassFileMeta, records: &[ClassFileRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "polytope {}", meta.polytope);
    let _ = writeln!(out, "ambient_dim {}", meta.ambient_dim);
    let _ = writeln!(out, "method {}", meta.method);
    let _ = writeln!(out, "cutoff {}", meta.cutoff);
    let _ = writeln!(out, "seed {}", meta.seed);
    let _ = writeln!(out, "status {}", status_token(&meta.status));
    let _ = writeln!(out, "count {}", records.len());
    for r in records {
        let mut tokens: Vec<String> = r.ineq.coeffs().iter().map(|c| c.to_string()).collect();
        tokens.push(r.ineq.rhs().to_string());
        tokens.push(r.tight_size.to_string());
        tokens.push(
            r.orbit_size
                .map(|o| o.to_string())
                .unwrap_or_else(|| "-".to_string()),
        );
        let _ = writeln!(out, "{}", tokens.join(" "));
    }
    out
}

pub fn save_class_file(path: &Path, meta: &ClassFileMeta, records: &[ClassFileRecord]) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(write_class_file(meta, records).as_bytes())?;
    f.flush()?;
    Ok(())
}

pub fn parse_class_file(text: &str) -> Result<(ClassFileMeta, Vec<ClassFileRecord>)> {
    let mut r = LineReader::new(text);
    let polytope = r.keyword("polytope")?.trim().to_string();
    let ambient_dim = r.keyword_usize("ambient_dim")?;
    let method = r.keyword("method")?.trim().to_string();
    let cutoff = r.keyword_usize("cutoff")?;
    let seed: u64 = {
        let v = r.keyword("seed")?;
        v.trim()
            .parse()
            .map_err(|_| parse_err(r.number, format!("bad seed '{v}'")))?
    };
    let status = {
        let v = r.keyword("status")?.trim().to_string();
        parse_status(&v, r.number)?
    };
    let count = r.keyword_usize("count")?;
    let mut records = Vec::with_capacity(count);
    for _ in 0..count {
        let line = r.next()?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != ambient_dim + 3 {
            return Err(parse_err(
                r.number,
                format!(
                    "expected {} tokens (d+1 coefficients, tight size, orbit), got {}",
                    ambient_dim + 3,
                    tokens.len()
                ),
            ));
        }
        let mut ints = Vec::with_capacity(ambient_dim + 1);
        for t in &tokens[..ambient_dim + 1] {
            ints.push(
                Int::from_str(t).map_err(|_| parse_err(r.number, format!("bad coefficient '{t}'")))?,
            );
        }
        let rhs = ints.pop().expect("d+1 tokens parsed");
        let ineq =
            Inequality::from_integer(ints, rhs).map_err(|e| parse_err(r.number, e.to_string()))?;
        let tight_size: usize = tokens[ambient_dim + 1]
            .parse()
            .map_err(|_| parse_err(r.number, "bad tight size"))?;
        let orbit_size = match tokens[ambient_dim + 2] {
            "-" => None,
            t => Some(
                t.parse::<u64>()
                    .map_err(|_| parse_err(r.number, "bad orbit size"))?,
            ),
        };
        records.push(ClassFileRecord {
            ineq,
            tight_size,
            orbit_size,
        });
    }
    Ok((
        ClassFileMeta {
            polytope,
            ambient_dim,
            method,
            cutoff,
            seed,
            status,
        },
        records,
    ))
}

pub fn load_class_file(path: &Path) -> Result<(ClassFileMeta, Vec<ClassFileRecord>)> {
    let text = std::fs::read_to_string(path)?;
    parse_class_file(&text)
}

/// Parses a bare inequality file: one `a1 .. ad b` line per inequality.
pub fn parse_inequalities(text: &str, dim: usize) -> Result<Vec<Inequality>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != dim + 1 {
            return Err(parse_err(
                line_no,
                format!("expected {} integer tokens, got {}", dim + 1, tokens.len()),
            ));
        }
        let mut ints = Vec::with_capacity(dim + 1);
        for t in tokens {
            ints.push(
                Int::from_str(t).map_err(|_| parse_err(line_no, format!("bad coefficient '{t}'")))?,
            );
        }
        let rhs = ints.pop().expect("d+1 tokens parsed");
        out.push(Inequality::from_integer(ints, rhs).map_err(|e| parse_err(line_no, e.to_string()))?);
    }
    Ok(out)
}

/// Append-only log writer used by the sampling store.
pub struct ClassLog {
    out: BufWriter<File>,
}

pub struct LogHeader {
    pub polytope: String,
    pub method: String,
    pub cutoff: usize,
    pub seed: u64,
}

impl ClassLog {
    /// Creates a fresh log with a header line.
    pub fn create(path: &Path, header: &LogHeader) -> Result<Self> {
        let f = File::create(path)?;
        let mut out = BufWriter::new(f);
        writeln!(
            out,
            "log {} {} {} {}",
            header.polytope, header.method, header.cutoff, header.seed
        )?;
        out.flush()?;
        Ok(ClassLog { out })
    }

    /// Reopens an existing log for appending.
    pub fn append(path: &Path) -> Result<Self> {
        let f = OpenOptions::new().append(true).open(path)?;
        Ok(ClassLog {
            out: BufWriter::new(f),
        })
    }
}

impl RunLog for ClassLog {
    fn class_discovered(&mut self, _ordinal: usize, record: &ClassRecord) -> Result<()> {
        let key: Vec<String> = record.key.0.iter().map(|i| i.to_string()).collect();
        let mut ineq: Vec<String> = record.support.coeffs().iter().map(|c| c.to_string()).collect();
        ineq.push(record.support.rhs().to_string());
        let tight: Vec<String> = record.tight.iter().map(|i| i.to_string()).collect();
        writeln!(
            self.out,
            "C {} | {} | {}",
            key.join(" "),
            ineq.join(" "),
            tight.join(" ")
        )?;
        self.out.flush()?;
        Ok(())
    }

    fn class_processed(&mut self, ordinal: usize) -> Result<()> {
        writeln!(self.out, "P {ordinal}")?;
        self.out.flush()?;
        Ok(())
    }
}

/// Replays a log into resume state. The header must match the requested run.
pub fn read_log(path: &Path, expect: &LogHeader) -> Result<ResumeState> {
    let f = File::open(path)?;
    let reader = BufReader::new(f);
    let mut state = ResumeState::default();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line_no == 1 {
            let want = format!(
                "log {} {} {} {}",
                expect.polytope, expect.method, expect.cutoff, expect.seed
            );
            if line != want {
                return Err(parse_err(
                    line_no,
                    format!("log header '{line}' does not match run '{want}'"),
                ));
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("C ") {
            let parts: Vec<&str> = rest.split('|').collect();
            if parts.len() != 3 {
                return Err(parse_err(line_no, "expected 'C key | ineq | tight'"));
            }
            let key: Vec<u32> = parse_u32_list(parts[0], line_no)?;
            let mut ints = Vec::new();
            for t in parts[1].split_whitespace() {
                ints.push(
                    Int::from_str(t)
                        .map_err(|_| parse_err(line_no, format!("bad coefficient '{t}'")))?,
                );
            }
            if ints.len() < 2 {
                return Err(parse_err(line_no, "inequality needs d+1 tokens"));
            }
            let rhs = ints.pop().expect("nonempty");
            let support = Inequality::from_integer(ints, rhs)
                .map_err(|e| parse_err(line_no, e.to_string()))?;
            let tight: Vec<usize> = parse_u32_list(parts[2], line_no)?
                .into_iter()
                .map(|i| i as usize)
                .collect();
            state.records.push(ClassRecord {
                key: CanonicalKey(key),
                support,
                tight,
            });
            state.processed.push(false);
        } else if let Some(rest) = line.strip_prefix("P ") {
            let ordinal: usize = rest
                .trim()
                .parse()
                .map_err(|_| parse_err(line_no, "bad ordinal"))?;
            if ordinal >= state.records.len() {
                return Err(parse_err(line_no, "processed marker for unknown class"));
            }
            state.processed[ordinal] = true;
        } else {
            return Err(parse_err(line_no, format!("unknown log line '{line}'")));
        }
    }
    Ok(state)
}

fn parse_u32_list(text: &str, line: usize) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for t in text.split_whitespace() {
        out.push(
            t.parse::<u32>()
                .map_err(|_| parse_err(line, format!("bad index '{t}'")))?,
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{bell_polytope, BellScenario};

    #[test]
    fn polytope_round_trip_is_byte_exact() {
        let s = BellScenario::new(2, 2, 2, 2).unwrap();
        let (p, g) = bell_polytope(&s).unwrap();
        let text = write_polytope(&p, &g);
        let (p2, g2) = parse_polytope(&text).unwrap();
        assert_eq!(write_polytope(&p2, &g2), text);
        assert_eq!(p2.len(), p.len());
        assert_eq!(p2.vertices(), p.vertices());
        assert_eq!(g2.generators().len(), g.generators().len());
    }

    #[test]
    fn class_file_round_trip_is_byte_exact() {
        let meta = ClassFileMeta {
            polytope: "demo".into(),
            ambient_dim: 2,
            method: "as".into(),
            cutoff: 20,
            seed: 42,
            status: RunStatus::Stopped("max-classes".into()),
        };
        let records = vec![
            ClassFileRecord {
                ineq: Inequality::from_integer(vec![Int::from(1), Int::from(-2)], Int::from(3))
                    .unwrap(),
                tight_size: 4,
                orbit_size: Some(16),
            },
            ClassFileRecord {
                ineq: Inequality::from_integer(vec![Int::from(0), Int::from(1)], Int::from(1))
                    .unwrap(),
                tight_size: 2,
                orbit_size: None,
            },
        ];
        let text = write_class_file(&meta, &records);
        let (meta2, records2) = parse_class_file(&text).unwrap();
        assert_eq!(write_class_file(&meta2, &records2), text);
        assert_eq!(records2.len(), 2);
        assert_eq!(records2[0].orbit_size, Some(16));
        assert_eq!(records2[1].orbit_size, None);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "polytope x\nambient_dim 2\nvertices 1\n1 oops\nsymmetry 0\n";
        match parse_polytope(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn log_round_trip() {
        let dir = std::env::temp_dir().join(format!("facets-log-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.log");
        let header = LogHeader {
            polytope: "demo".into(),
            method: "as".into(),
            cutoff: 10,
            seed: 7,
        };
        let mut log = ClassLog::create(&path, &header).unwrap();
        let rec = ClassRecord {
            key: CanonicalKey(vec![0, 2, 5]),
            support: Inequality::from_integer(vec![Int::from(1), Int::from(1)], Int::from(1))
                .unwrap(),
            tight: vec![0, 2, 5],
        };
        log.class_discovered(0, &rec).unwrap();
        log.class_processed(0).unwrap();
        drop(log);
        let state = read_log(&path, &header).unwrap();
        assert_eq!(state.records.len(), 1);
        assert_eq!(state.records[0].key.0, vec![0, 2, 5]);
        assert!(state.processed[0]);
        let bad = LogHeader {
            seed: 8,
            ..LogHeader {
                polytope: "demo".into(),
                method: "as".into(),
                cutoff: 10,
                seed: 8,
            }
        };
        assert!(read_log(&path, &bad).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }
}
