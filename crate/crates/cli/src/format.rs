//! Text formats: tensor files, CPD files and characteristic matrices.
//!
//! Tensor file:
//!
//! ```text
//! field 2
//! H 2            (optional, border ring GF(p)[x]/(x^H))
//! shape 2 2 2
//! 0 x x 0
//! x 0 0 0
//! ```
//!
//! The body lists entries in row-major order, separated by whitespace. `#`
//! starts a comment. A CPD file has the same header followed by `rank R` and
//! one `factor d` block per axis holding the `n_d x R` factor matrix row by row.

use std::fmt::Write as _;

use cpd_core::{BorderRing, Cpd, Matrix, Poly, PrimeField, Ring, Tensor};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

fn perr<T>(line: usize, col: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        col,
        msg: msg.into(),
    })
}

/// Entries of a parsed file: field elements, or polynomials when `H` was given.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Entries {
    Field(Tensor<u32>),
    Border(BorderRing, Tensor<Poly>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorFile {
    pub field: PrimeField,
    pub entries: Entries,
}

impl TensorFile {
    pub fn shape(&self) -> &[usize] {
        match &self.entries {
            Entries::Field(t) => t.shape(),
            Entries::Border(_, t) => t.shape(),
        }
    }

    pub fn threshold(&self) -> Option<usize> {
        match &self.entries {
            Entries::Field(_) => None,
            Entries::Border(r, _) => Some(r.threshold()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CpdEntries {
    Field(Cpd<u32>),
    Border(BorderRing, Cpd<Poly>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CpdFile {
    pub field: PrimeField,
    pub cpd: CpdEntries,
}

#[derive(Clone, Debug)]
struct Token<'a> {
    text: &'a str,
    line: usize,
    col: usize,
}

fn tokenize(src: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let mut start = None;
        for (i, ch) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
            if ch.is_whitespace() {
                if let Some(s) = start.take() {
                    out.push(Token {
                        text: &line[s..i],
                        line: ln + 1,
                        col: s + 1,
                    });
                }
            } else if start.is_none() {
                start = Some(i);
            }
        }
    }
    out
}

struct Cursor<'a> {
    toks: Vec<Token<'a>>,
    pos: usize,
    end: (usize, usize),
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        let lines = src.lines().count();
        Self {
            toks: tokenize(src),
            pos: 0,
            end: (lines.max(1), 1),
        }
    }

    fn peek(&self) -> Option<&Token<'a>> {
        self.toks.get(self.pos)
    }

    fn next(&mut self, what: &str) -> Result<Token<'a>, ParseError> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => perr(self.end.0, self.end.1, format!("unexpected end of input, expected {what}")),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<Token<'a>, ParseError> {
        let t = self.next(&format!("`{kw}`"))?;
        if t.text != kw {
            return perr(t.line, t.col, format!("expected `{kw}`, found `{}`", t.text));
        }
        Ok(t)
    }

    fn number(&mut self, what: &str) -> Result<(usize, Token<'a>), ParseError> {
        let t = self.next(what)?;
        match t.text.parse::<usize>() {
            Ok(v) => Ok((v, t)),
            Err(_) => perr(t.line, t.col, format!("expected {what}, found `{}`", t.text)),
        }
    }

    /// The remaining tokens on `line`, all of which must be integers.
    fn line_numbers(&mut self, line: usize) -> Result<Vec<(usize, Token<'a>)>, ParseError> {
        let mut out = Vec::new();
        while let Some(t) = self.peek().filter(|t| t.line == line).cloned() {
            match t.text.parse::<usize>() {
                Ok(v) => out.push((v, t)),
                Err(_) => return perr(t.line, t.col, format!("expected a side length, found `{}`", t.text)),
            }
            self.pos += 1;
        }
        Ok(out)
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) => perr(t.line, t.col, format!("unexpected trailing token `{}`", t.text)),
            None => Ok(()),
        }
    }
}

struct Header {
    field: PrimeField,
    ring: Option<BorderRing>,
    shape: Vec<usize>,
}

fn parse_header(c: &mut Cursor<'_>) -> Result<Header, ParseError> {
    c.keyword("field")?;
    let (p, pt) = c.number("a prime modulus")?;
    let field = match PrimeField::new(p as u64) {
        Ok(f) => f,
        Err(e) => return perr(pt.line, pt.col, e.to_string()),
    };
    let mut ring = None;
    if c.peek().map(|t| t.text) == Some("H") {
        c.next("`H`")?;
        let (h, ht) = c.number("a threshold H >= 1")?;
        match BorderRing::new(field, h) {
            Ok(r) => ring = Some(r),
            Err(e) => return perr(ht.line, ht.col, e.to_string()),
        }
    }
    let kw = c.keyword("shape")?;
    let dims = c.line_numbers(kw.line)?;
    if dims.is_empty() {
        return perr(kw.line, kw.col, "shape needs at least one side length");
    }
    if let Some((_, t)) = dims.iter().find(|(n, _)| *n == 0) {
        return perr(t.line, t.col, "side lengths must be positive");
    }
    Ok(Header {
        field,
        ring,
        shape: dims.into_iter().map(|(n, _)| n).collect(),
    })
}

fn parse_int(text: &str) -> Option<i64> {
    text.parse::<i64>().ok()
}

/// Parses `3`, `x`, `2*x^3`, `1+x+x^2` over `ring`.
pub fn parse_poly(ring: &BorderRing, text: &str) -> Result<Poly, String> {
    let h = ring.threshold();
    let mut coeffs = vec![0i64; h];
    for term in text.split('+') {
        if term.is_empty() {
            return Err(format!("empty term in `{text}`"));
        }
        let (coef, mono) = match term.find('x') {
            None => (term, None),
            Some(i) => {
                let c = term[..i].strip_suffix('*').unwrap_or(&term[..i]);
                (c, Some(&term[i + 1..]))
            }
        };
        let c = match coef {
            "" => 1,
            "-" => -1,
            s => parse_int(s).ok_or_else(|| format!("bad coefficient `{s}` in `{term}`"))?,
        };
        let deg = match mono {
            None => 0,
            Some("") => 1,
            Some(rest) => rest
                .strip_prefix('^')
                .and_then(|d| d.parse::<usize>().ok())
                .ok_or_else(|| format!("bad exponent in `{term}`"))?,
        };
        if deg >= h {
            return Err(format!("degree {deg} is not below H = {h}"));
        }
        coeffs[deg] += c;
    }
    ring.from_coeffs(&coeffs).map_err(|e| e.to_string())
}

fn parse_field_entry(field: &PrimeField, t: &Token<'_>) -> Result<u32, ParseError> {
    match parse_int(t.text) {
        Some(v) => Ok(field.reduce(v)),
        None => perr(t.line, t.col, format!("`{}` is not an integer", t.text)),
    }
}

fn parse_border_entry(ring: &BorderRing, t: &Token<'_>) -> Result<Poly, ParseError> {
    parse_poly(ring, t.text).or_else(|m| perr(t.line, t.col, m))
}

fn take_entries<'a>(c: &mut Cursor<'a>, n: usize, what: &str) -> Result<Vec<Token<'a>>, ParseError> {
    (0..n).map(|_| c.next(what)).collect()
}

pub fn parse_tensor_file(src: &str) -> Result<TensorFile, ParseError> {
    let mut c = Cursor::new(src);
    let h = parse_header(&mut c)?;
    let n: usize = h.shape.iter().product();
    let toks = take_entries(&mut c, n, &format!("{n} entries"))?;
    c.finish()?;
    let entries = match h.ring {
        None => {
            let d = toks.iter().map(|t| parse_field_entry(&h.field, t)).collect::<Result<_, _>>()?;
            Entries::Field(Tensor::new(h.shape, d).expect("entry count checked"))
        }
        Some(r) => {
            let d = toks.iter().map(|t| parse_border_entry(&r, t)).collect::<Result<_, _>>()?;
            Entries::Border(r, Tensor::new(h.shape, d).expect("entry count checked"))
        }
    };
    Ok(TensorFile {
        field: h.field,
        entries,
    })
}

fn write_header(out: &mut String, p: u32, h: Option<usize>, shape: &[usize]) {
    let _ = writeln!(out, "field {p}");
    if let Some(h) = h {
        let _ = writeln!(out, "H {h}");
    }
    let dims: Vec<String> = shape.iter().map(ToString::to_string).collect();
    let _ = writeln!(out, "shape {}", dims.join(" "));
}

fn write_rows<E>(out: &mut String, data: &[E], width: usize, show: impl Fn(&E) -> String) {
    if width == 0 {
        return;
    }
    for row in data.chunks(width) {
        let cells: Vec<String> = row.iter().map(&show).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
}

/// Writes one line per fiber along the last axis.
pub fn write_tensor_file(f: &TensorFile) -> String {
    let mut out = String::new();
    let shape = f.shape().to_vec();
    write_header(&mut out, f.field.modulus(), f.threshold(), &shape);
    let width = *shape.last().unwrap_or(&1);
    match &f.entries {
        Entries::Field(t) => write_rows(&mut out, t.data(), width, u32::to_string),
        Entries::Border(_, t) => write_rows(&mut out, t.data(), width, Poly::to_string),
    }
    out
}

pub fn parse_cpd_file(src: &str) -> Result<CpdFile, ParseError> {
    let mut c = Cursor::new(src);
    let h = parse_header(&mut c)?;
    c.keyword("rank")?;
    let (r, _) = c.number("the number of terms")?;
    let mut field_factors = Vec::new();
    let mut border_factors = Vec::new();
    for (d, &n) in h.shape.iter().enumerate() {
        c.keyword("factor")?;
        let (idx, t) = c.number("a factor index")?;
        if idx != d {
            return perr(t.line, t.col, format!("expected factor {d}, found factor {idx}"));
        }
        let toks = take_entries(&mut c, n * r, &format!("{} entries of factor {d}", n * r))?;
        match &h.ring {
            None => {
                let v = toks.iter().map(|t| parse_field_entry(&h.field, t)).collect::<Result<_, _>>()?;
                field_factors.push(Matrix::from_vec(n, r, v).expect("entry count checked"));
            }
            Some(ring) => {
                let v = toks.iter().map(|t| parse_border_entry(ring, t)).collect::<Result<_, _>>()?;
                border_factors.push(Matrix::from_vec(n, r, v).expect("entry count checked"));
            }
        }
    }
    c.finish()?;
    let cpd = match h.ring {
        None => CpdEntries::Field(Cpd::new(field_factors).expect("shared column count")),
        Some(ring) => CpdEntries::Border(ring, Cpd::new(border_factors).expect("shared column count")),
    };
    Ok(CpdFile { field: h.field, cpd })
}

fn write_factors<E>(out: &mut String, cpd: &Cpd<E>, show: impl Fn(&E) -> String + Copy)
where
    E: Clone,
{
    let _ = writeln!(out, "rank {}", cpd.rank());
    for (d, m) in cpd.factors.iter().enumerate() {
        let _ = writeln!(out, "factor {d}");
        write_rows(out, m.data(), m.cols(), show);
    }
}

pub fn write_cpd_file(f: &CpdFile) -> String {
    let mut out = String::new();
    match &f.cpd {
        CpdEntries::Field(c) => {
            write_header(&mut out, f.field.modulus(), None, &c.shape());
            write_factors(&mut out, c, u32::to_string);
        }
        CpdEntries::Border(r, c) => {
            write_header(&mut out, f.field.modulus(), Some(r.threshold()), &c.shape());
            write_factors(&mut out, c, Poly::to_string);
        }
    }
    out
}

pub fn field_cpd_file(field: PrimeField, cpd: &Cpd<u32>) -> String {
    write_cpd_file(&CpdFile {
        field,
        cpd: CpdEntries::Field(cpd.clone()),
    })
}

pub fn border_cpd_file(ring: &BorderRing, cpd: &Cpd<Poly>) -> String {
    write_cpd_file(&CpdFile {
        field: *ring.base(),
        cpd: CpdEntries::Border(*ring, cpd.clone()),
    })
}

/// Parses a characteristic matrix: rows separated by `;` or newlines, cells
/// by commas, each cell a combination such as `v0+2*v1` or `0`.
///
/// `slices` fixes the first side length; otherwise it is one more than the
/// largest variable index that occurs.
pub fn parse_char_matrix(field: &PrimeField, src: &str, slices: Option<usize>) -> Result<Tensor<u32>, ParseError> {
    // (row, col, var, coef)
    let mut terms: Vec<(usize, usize, usize, u32)> = Vec::new();
    let mut rows = 0usize;
    let mut width: Option<usize> = None;
    let mut max_var: Option<(usize, usize, usize)> = None;
    for (ln, line) in src.lines().enumerate() {
        let line_no = ln + 1;
        let line = line.split('#').next().unwrap_or("");
        let mut offset = 0;
        for row in line.split(';') {
            let row_start = offset;
            offset += row.len() + 1;
            if row.trim().is_empty() {
                continue;
            }
            let mut col_off = row_start;
            let cells: Vec<(usize, &str)> = row
                .split(',')
                .map(|c| {
                    let s = col_off;
                    col_off += c.len() + 1;
                    (s, c)
                })
                .collect();
            match width {
                None => width = Some(cells.len()),
                Some(w) if w != cells.len() => {
                    return perr(
                        line_no,
                        row_start + 1,
                        format!("row has {} cells, expected {w}", cells.len()),
                    );
                }
                _ => {}
            }
            for (k, (cstart, cell)) in cells.into_iter().enumerate() {
                let lead = cell.len() - cell.trim_start().len();
                let col = cstart + lead + 1;
                let body: String = cell.chars().filter(|c| !c.is_whitespace()).collect();
                if body.is_empty() {
                    return perr(line_no, col, "empty cell");
                }
                if body == "0" {
                    continue;
                }
                for term in body.split('+') {
                    let Some((coef, var)) = term.split_once('v') else {
                        return perr(line_no, col, format!("cannot parse term `{term}`"));
                    };
                    let coef = coef.strip_suffix('*').unwrap_or(coef);
                    let c = match coef {
                        "" => 1,
                        "-" => -1,
                        s => match parse_int(s) {
                            Some(v) => v,
                            None => return perr(line_no, col, format!("bad coefficient in `{term}`")),
                        },
                    };
                    let Ok(i) = var.parse::<usize>() else {
                        return perr(line_no, col, format!("bad variable in `{term}`"));
                    };
                    if max_var.map_or(true, |(m, _, _)| i > m) {
                        max_var = Some((i, line_no, col));
                    }
                    terms.push((rows, k, i, field.reduce(c)));
                }
            }
            rows += 1;
        }
    }
    let Some(p) = width else {
        return perr(1, 1, "empty characteristic matrix");
    };
    let m = match (slices, max_var) {
        (Some(m), Some((i, l, c))) if i >= m => {
            return perr(l, c, format!("v{i} with only {m} slices"));
        }
        (Some(m), _) => m,
        (None, Some((i, _, _))) => i + 1,
        (None, None) => 1,
    };
    let mut t = Tensor::zeros(field, vec![m, rows, p]);
    for (j, k, i, c) in terms {
        let cur = *t.get(&[i, j, k]);
        t.set(&[i, j, k], field.add(&cur, &c));
    }
    Ok(t)
}

/// Writes `v ×_0 T` as comma-separated cells, one row per line.
pub fn write_char_matrix(t: &Tensor<u32>) -> String {
    let (m, n, p) = (t.shape()[0], t.shape()[1], t.shape()[2]);
    let mut out = String::new();
    for j in 0..n {
        let cells: Vec<String> = (0..p)
            .map(|k| {
                let terms: Vec<String> = (0..m)
                    .filter_map(|i| match *t.get(&[i, j, k]) {
                        0 => None,
                        1 => Some(format!("v{i}")),
                        c => Some(format!("{c}*v{i}")),
                    })
                    .collect();
                if terms.is_empty() {
                    "0".into()
                } else {
                    terms.join("+")
                }
            })
            .collect();
        let _ = writeln!(out, "{}", cells.join(", "));
    }
    out
}

/// A tensor file starts with `field`; anything else is a characteristic matrix.
pub fn looks_like_tensor_file(src: &str) -> bool {
    tokenize(src).first().map(|t| t.text) == Some("field")
}
