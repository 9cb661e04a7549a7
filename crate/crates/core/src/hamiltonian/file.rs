//! Line-oriented integral files.
//!
//! ```text
//! # two-site Bose-Hubbard
//! STATISTICS BOSON
//! N 2
//! M 2
//! H 1 2 -1.0
//! H 2 1 -1.0
//! W 1 1 1 1 1.0
//! W 2 2 2 2 1.0
//! ```
//!
//! `W k s q l re [im]` is the coefficient of `b†_k b†_s b_l b_q`. Mixture
//! files start with `STATISTICS MIX <A> <B>`, give `NA MA NB MB`, and use
//! `HA WA HB WB` for the intra-species tables and `X k q k' q' re [im]` for
//! the inter-species coefficient of `a†_k a_q b†_k' b_q'`. Anything after
//! `#` is ignored. An entry listed twice is an error.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::HamiltonianSpec;
use crate::error::{Error, Result};
use crate::fockspace::{Space, Statistics};
use crate::mixtures::{MixtureHamiltonian, MixtureSpace};

/// Parsed contents of an integral file.
#[derive(Clone, Debug, PartialEq)]
pub enum IntegralFile {
    Single(HamiltonianSpec),
    Mixture(MixtureHamiltonian),
}

impl IntegralFile {
    pub fn into_single(self) -> Result<HamiltonianSpec> {
        match self {
            Self::Single(s) => Ok(s),
            Self::Mixture(_) => Err(Error::Format(
                "expected a single-species file, found a mixture".into(),
            )),
        }
    }

    pub fn into_mixture(self) -> Result<MixtureHamiltonian> {
        match self {
            Self::Mixture(m) => Ok(m),
            Self::Single(_) => Err(Error::Format(
                "expected a mixture file, found a single species".into(),
            )),
        }
    }
}

/// Reads a single-species integral file.
pub fn load_integrals(path: impl AsRef<Path>) -> Result<HamiltonianSpec> {
    load_integral_file(path)?.into_single()
}

/// Reads any integral file, single-species or mixture.
pub fn load_integral_file(path: impl AsRef<Path>) -> Result<IntegralFile> {
    parse_integrals(&std::fs::read_to_string(path)?)
}

pub fn save_integrals(path: impl AsRef<Path>, file: &IntegralFile) -> Result<()> {
    std::fs::write(path, write_integrals(file))?;
    Ok(())
}

fn parse_stats(word: &str, line: usize) -> Result<Statistics> {
    match word.to_ascii_uppercase().as_str() {
        "FERMION" => Ok(Statistics::Fermion),
        "BOSON" => Ok(Statistics::Boson),
        _ => Err(Error::Parse {
            line,
            message: format!("unknown statistics {word:?}"),
        }),
    }
}

fn stats_word(s: Statistics) -> &'static str {
    match s {
        Statistics::Fermion => "FERMION",
        Statistics::Boson => "BOSON",
    }
}

struct Body<'a> {
    line: usize,
    tag: &'a str,
    fields: Vec<&'a str>,
}

impl Body<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            message: message.into(),
        }
    }

    /// Splits `n` 1-based indices (each bounded by `bounds[i]`) and a value.
    fn entry<const K: usize>(&self, bounds: [usize; K]) -> Result<([usize; K], Complex64)> {
        let f = &self.fields;
        if f.len() != K + 1 && f.len() != K + 2 {
            return Err(self.err(format!(
                "{} expects {K} indices and a value, got {} fields",
                self.tag,
                f.len()
            )));
        }
        let mut idx = [0usize; K];
        for (i, slot) in idx.iter_mut().enumerate() {
            let v: usize = f[i]
                .parse()
                .map_err(|_| self.err(format!("bad index {:?}", f[i])))?;
            if v == 0 || v > bounds[i] {
                return Err(self.err(format!("index {v} outside [1, {}]", bounds[i])));
            }
            *slot = v;
        }
        let num = |s: &str| -> Result<f64> {
            let x: f64 = s
                .parse()
                .map_err(|_| self.err(format!("bad number {s:?}")))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(self.err(format!("non-finite number {s:?}")))
            }
        };
        let re = num(f[K])?;
        let im = if f.len() == K + 2 {
            num(f[K + 1])?
        } else {
            0.0
        };
        Ok((idx, Complex64::new(re, im)))
    }
}

#[derive(Default)]
struct Header {
    statistics: Vec<Statistics>,
    mixture: bool,
    counts: [Option<usize>; 4],
}

const SINGLE_KEYS: [&str; 2] = ["N", "M"];
const MIX_KEYS: [&str; 4] = ["NA", "MA", "NB", "MB"];

/// Parses the text of an integral file.
pub fn parse_integrals(text: &str) -> Result<IntegralFile> {
    let mut header: Option<Header> = None;
    let mut single: Option<HamiltonianSpec> = None;
    let mut mix: Option<MixtureHamiltonian> = None;
    let mut seen: HashSet<(String, Vec<usize>)> = HashSet::new();
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut words = content.split_whitespace();
        let tag = words.next().expect("non-empty line");
        let fields: Vec<&str> = words.collect();
        let perr = |message: String| Error::Parse { line, message };

        let Some(h) = header.as_mut() else {
            if !tag.eq_ignore_ascii_case("STATISTICS") {
                return Err(perr("file must start with a STATISTICS line".into()));
            }
            let mut hd = Header::default();
            match fields.as_slice() {
                [s] => hd.statistics.push(parse_stats(s, line)?),
                [mixword, a, b] if mixword.eq_ignore_ascii_case("MIX") => {
                    hd.mixture = true;
                    hd.statistics.push(parse_stats(a, line)?);
                    hd.statistics.push(parse_stats(b, line)?);
                }
                _ => return Err(perr(format!("malformed STATISTICS line {content:?}"))),
            }
            header = Some(hd);
            continue;
        };

        let keys: &[&str] = if h.mixture { &MIX_KEYS } else { &SINGLE_KEYS };
        let upper = tag.to_ascii_uppercase();
        if let Some(pos) = keys.iter().position(|k| *k == upper) {
            if single.is_some() || mix.is_some() {
                return Err(perr(format!("{tag} after the first body line")));
            }
            if h.counts[pos].is_some() {
                return Err(perr(format!("{tag} given twice")));
            }
            let [v] = fields.as_slice() else {
                return Err(perr(format!("{tag} expects one integer")));
            };
            let v: usize = v.parse().map_err(|_| perr(format!("bad integer {v:?}")))?;
            h.counts[pos] = Some(v);
            continue;
        }

        // first body line: header must be complete
        if single.is_none() && mix.is_none() {
            let mut c = Vec::with_capacity(keys.len());
            for (k, v) in keys.iter().zip(&h.counts) {
                c.push(v.ok_or_else(|| perr(format!("missing {k} line before the body")))?);
            }
            let space_err = |e: Error| perr(e.to_string());
            if h.mixture {
                let a = Space::new(h.statistics[0], c[0], c[1]).map_err(space_err)?;
                let b = Space::new(h.statistics[1], c[2], c[3]).map_err(space_err)?;
                mix = Some(MixtureHamiltonian::zeros(&MixtureSpace::new(a, b)?));
            } else {
                let s = Space::new(h.statistics[0], c[0], c[1]).map_err(space_err)?;
                single = Some(HamiltonianSpec::zeros(&s));
            }
        }

        let body = Body { line, tag, fields };
        let mut note = |idx: &[usize]| -> Result<()> {
            if seen.insert((upper.clone(), idx.to_vec())) {
                Ok(())
            } else {
                Err(body.err(format!("duplicate entry {upper} {idx:?}")))
            }
        };
        match (upper.as_str(), single.as_mut(), mix.as_mut()) {
            ("H", Some(s), _) => {
                let m = s.space().orbitals();
                let ([k, q], v) = body.entry([m; 2])?;
                note(&[k, q])?;
                s.one_body_mut().set(k, q, v);
            }
            ("W", Some(s), _) => {
                let m = s.space().orbitals();
                let ([k, sx, q, l], v) = body.entry([m; 4])?;
                note(&[k, sx, q, l])?;
                s.two_body_mut().set(k, sx, q, l, v);
            }
            ("HA" | "HB", _, Some(x)) => {
                let spec = if upper == "HA" { &mut x.a } else { &mut x.b };
                let m = spec.space().orbitals();
                let ([k, q], v) = body.entry([m; 2])?;
                note(&[k, q])?;
                spec.one_body_mut().set(k, q, v);
            }
            ("WA" | "WB", _, Some(x)) => {
                let spec = if upper == "WA" { &mut x.a } else { &mut x.b };
                let m = spec.space().orbitals();
                let ([k, sx, q, l], v) = body.entry([m; 4])?;
                note(&[k, sx, q, l])?;
                spec.two_body_mut().set(k, sx, q, l, v);
            }
            ("X", _, Some(x)) => {
                let (ma, mb) = (x.a.space().orbitals(), x.b.space().orbitals());
                let ([k, q, kp, qp], v) = body.entry([ma, ma, mb, mb])?;
                note(&[k, q, kp, qp])?;
                x.inter.set(k, kp, q, qp, v);
            }
            _ => {
                let kind = if mix.is_some() {
                    "mixture"
                } else {
                    "single-species"
                };
                return Err(body.err(format!("unexpected {tag:?} line in a {kind} file")));
            }
        }
    }

    // a header with no body lines still describes a (zero) operator
    let Some(h) = header else {
        return Err(Error::Parse {
            line: last_line.max(1),
            message: "empty integral file".into(),
        });
    };
    if let Some(s) = single {
        return Ok(IntegralFile::Single(s));
    }
    if let Some(x) = mix {
        return Ok(IntegralFile::Mixture(x));
    }
    let keys: &[&str] = if h.mixture { &MIX_KEYS } else { &SINGLE_KEYS };
    let mut c = Vec::new();
    for (k, v) in keys.iter().zip(&h.counts) {
        c.push(v.ok_or_else(|| Error::Parse {
            line: last_line,
            message: format!("missing {k} line"),
        })?);
    }
    if h.mixture {
        let a = Space::new(h.statistics[0], c[0], c[1])?;
        let b = Space::new(h.statistics[1], c[2], c[3])?;
        Ok(IntegralFile::Mixture(MixtureHamiltonian::zeros(
            &MixtureSpace::new(a, b)?,
        )))
    } else {
        let s = Space::new(h.statistics[0], c[0], c[1])?;
        Ok(IntegralFile::Single(HamiltonianSpec::zeros(&s)))
    }
}

fn push_value(out: &mut String, v: Complex64) {
    // Display on f64 prints the shortest string that parses back exactly
    let _ = writeln!(out, " {} {}", v.re, v.im);
}

fn write_tables(out: &mut String, spec: &HamiltonianSpec, h: &str, w: &str) {
    for ((k, q), v) in spec.one_body().nonzeros() {
        let _ = write!(out, "{h} {k} {q}");
        push_value(out, v);
    }
    for ([k, s, q, l], v) in spec.two_body().nonzeros() {
        let _ = write!(out, "{w} {k} {s} {q} {l}");
        push_value(out, v);
    }
}

/// Renders an integral file; only nonzero entries are written.
pub fn write_integrals(file: &IntegralFile) -> String {
    let mut out = String::new();
    match file {
        IntegralFile::Single(spec) => {
            let s = spec.space();
            let _ = writeln!(out, "STATISTICS {}", stats_word(s.statistics()));
            let _ = writeln!(out, "N {}", s.particles());
            let _ = writeln!(out, "M {}", s.orbitals());
            write_tables(&mut out, spec, "H", "W");
        }
        IntegralFile::Mixture(x) => {
            let (a, b) = (x.a.space(), x.b.space());
            let _ = writeln!(
                out,
                "STATISTICS MIX {} {}",
                stats_word(a.statistics()),
                stats_word(b.statistics())
            );
            let _ = writeln!(out, "NA {}", a.particles());
            let _ = writeln!(out, "MA {}", a.orbitals());
            let _ = writeln!(out, "NB {}", b.particles());
            let _ = writeln!(out, "MB {}", b.orbitals());
            write_tables(&mut out, &x.a, "HA", "WA");
            write_tables(&mut out, &x.b, "HB", "WB");
            for ([k, kp, q, qp], v) in x.inter.nonzeros() {
                let _ = write!(out, "X {k} {q} {kp} {qp}");
                push_value(&mut out, v);
            }
        }
    }
    out
}
