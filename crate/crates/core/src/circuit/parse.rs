use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use super::{Circuit, Gate, Instruction, Output, Preparation};
use crate::maps::GaussianMap;
use crate::measurement::{Feedforward, Quadrature};
use crate::state::rows_to_matrix;

/// Syntax error with a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

/// Splits a line at whitespace outside brackets; `#` outside brackets starts a comment.
fn tokenize(line: &str, line_no: usize) -> Result<Vec<Token<'_>>, ParseError> {
    let mut tokens = Vec::new();
    let mut depth = 0usize;
    let mut start: Option<(usize, usize)> = None; // (byte offset, column)
    let mut last_open = 0;
    for (column, (offset, ch)) in line.char_indices().enumerate().map(|(i, c)| (i + 1, c)) {
        if depth == 0 && (ch.is_whitespace() || ch == '#') {
            if let Some((b, c)) = start.take() {
                tokens.push(Token { text: &line[b..offset], column: c });
            }
            if ch == '#' {
                return Ok(tokens);
            }
            continue;
        }
        if start.is_none() {
            start = Some((offset, column));
        }
        match ch {
            '[' => {
                if depth == 0 {
                    last_open = column;
                }
                depth += 1;
            }
            ']' => {
                if depth == 0 {
                    return Err(ParseError {
                        line: line_no,
                        column,
                        message: "unbalanced ']'".into(),
                    });
                }
                depth -= 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(ParseError {
            line: line_no,
            column: last_open,
            message: "unclosed '['".into(),
        });
    }
    if let Some((b, c)) = start {
        tokens.push(Token { text: &line[b..], column: c });
    }
    Ok(tokens)
}

struct LineParser<'a> {
    line: usize,
    keyword: Token<'a>,
    tokens: Vec<Token<'a>>,
    end_column: usize,
}

struct Param<'a> {
    value: &'a str,
    column: usize,
}

impl<'a> LineParser<'a> {
    fn err(&self, column: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column,
            message: message.into(),
        }
    }

    fn usize_at(&self, tok: &Token<'_>, what: &str) -> Result<usize, ParseError> {
        tok.text
            .parse::<usize>()
            .map_err(|_| self.err(tok.column, format!("malformed {what} {:?}", tok.text)))
    }

    fn float(&self, text: &str, column: usize) -> Result<f64, ParseError> {
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.err(column, format!("malformed number {text:?}"))),
        }
    }

    /// Leading bare tokens (no `=`, not `->`), consumed from the front.
    fn positionals(&mut self) -> Vec<Token<'a>> {
        let count = self
            .tokens
            .iter()
            .take_while(|t| !t.text.contains('=') && t.text != "->")
            .count();
        self.tokens.drain(..count).collect()
    }

    fn modes(&mut self, arity: usize) -> Result<Vec<usize>, ParseError> {
        let pos = self.positionals();
        if pos.len() != arity {
            let column = pos.get(arity).map_or(self.end_column, |t| t.column);
            return Err(self.err(
                column,
                format!(
                    "'{}' expects {arity} mode index{}, got {}",
                    self.keyword.text,
                    if arity == 1 { "" } else { "es" },
                    pos.len()
                ),
            ));
        }
        pos.iter().map(|t| self.usize_at(t, "mode index")).collect()
    }

    /// Consumes leading `key=value` tokens; keys must come from `allowed`.
    fn params(&mut self, allowed: &[&str]) -> Result<HashMap<&'a str, Param<'a>>, ParseError> {
        let mut out = HashMap::new();
        while let Some(tok) = self.tokens.first() {
            let Some((key, value)) = tok.text.split_once('=') else {
                break;
            };
            let tok = self.tokens.remove(0);
            if !allowed.contains(&key) {
                return Err(self.err(
                    tok.column,
                    format!("unknown parameter '{key}' for '{}'", self.keyword.text),
                ));
            }
            if value.is_empty() {
                return Err(self.err(tok.column + key.chars().count() + 1, format!("missing value for '{key}'")));
            }
            let param = Param {
                value,
                column: tok.column + key.chars().count() + 1,
            };
            if out.insert(key, param).is_some() {
                return Err(self.err(tok.column, format!("parameter '{key}' given twice")));
            }
        }
        Ok(out)
    }

    fn required(&self, params: &HashMap<&str, Param<'_>>, key: &str) -> Result<f64, ParseError> {
        match params.get(key) {
            Some(p) => self.float(p.value, p.column),
            None => Err(self.err(
                self.end_column,
                format!("'{}' requires parameter '{key}'", self.keyword.text),
            )),
        }
    }

    fn optional(&self, params: &HashMap<&str, Param<'_>>, key: &str, default: f64) -> Result<f64, ParseError> {
        match params.get(key) {
            Some(p) => self.float(p.value, p.column),
            None => Ok(default),
        }
    }

    fn vector(&self, p: &Param<'_>) -> Result<Vec<f64>, ParseError> {
        serde_json::from_str::<Vec<f64>>(p.value)
            .map_err(|e| self.err(p.column, format!("malformed number list {:?}: {e}", p.value)))
    }

    fn matrix(&self, p: &Param<'_>) -> Result<DMatrix<f64>, ParseError> {
        let rows = serde_json::from_str::<Vec<Vec<f64>>>(p.value)
            .map_err(|e| self.err(p.column, format!("malformed matrix {:?}: {e}", p.value)))?;
        let m = rows_to_matrix(&rows).map_err(|e| self.err(p.column, e.to_string()))?;
        if m.nrows() != m.ncols() {
            return Err(self.err(p.column, format!("matrix must be square, got {}x{}", m.nrows(), m.ncols())));
        }
        Ok(m)
    }

    fn arrow_label(&mut self) -> Result<String, ParseError> {
        match self.tokens.first() {
            Some(t) if t.text == "->" => {}
            Some(t) => return Err(self.err(t.column, format!("expected '->', found {:?}", t.text))),
            None => return Err(self.err(self.end_column, "expected '-> LABEL'")),
        }
        self.tokens.remove(0);
        if self.tokens.is_empty() {
            return Err(self.err(self.end_column, "expected a label after '->'"));
        }
        let tok = self.tokens.remove(0);
        if !is_label(tok.text) {
            return Err(self.err(tok.column, format!("invalid label {:?}", tok.text)));
        }
        Ok(tok.text.to_string())
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.tokens.first() {
            Some(t) => Err(self.err(t.column, format!("unexpected token {:?}", t.text))),
            None => Ok(()),
        }
    }
}

/// Labels are identifiers: a letter or `_` followed by letters, digits or `_`.
pub(crate) fn is_label(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A label, or a heterodyne label with a `.q` or `.p` suffix.
fn is_record_key(s: &str) -> bool {
    match s.rsplit_once('.') {
        Some((base, "q" | "p")) => is_label(base),
        Some(_) => false,
        None => is_label(s),
    }
}

/// Parses a circuit program.
pub fn parse(text: &str) -> Result<Circuit, ParseError> {
    parse_spanned(text).map(|(c, _)| c)
}

/// Parses a circuit program, also returning the source line of each instruction.
pub fn parse_spanned(text: &str) -> Result<(Circuit, Vec<usize>), ParseError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut modes: Option<usize> = None;
    let mut instructions = Vec::new();
    let mut lines = Vec::new();

    for (i, raw) in text.split('\n').enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let mut tokens = tokenize(line, line_no)?;
        if tokens.is_empty() {
            continue;
        }
        let keyword = tokens.remove(0);
        let mut lp = LineParser {
            line: line_no,
            keyword: keyword.clone(),
            tokens,
            end_column: line.chars().count() + 1,
        };

        if keyword.text == "modes" {
            if modes.is_some() {
                return Err(lp.err(keyword.column, "duplicate 'modes' header"));
            }
            let pos = lp.positionals();
            let [tok] = pos.as_slice() else {
                return Err(lp.err(keyword.column, "'modes' expects exactly one integer"));
            };
            let n = lp.usize_at(tok, "mode count")?;
            if n == 0 {
                return Err(lp.err(tok.column, "mode count must be at least 1"));
            }
            lp.finish()?;
            modes = Some(n);
            continue;
        }
        if modes.is_none() {
            return Err(lp.err(keyword.column, "program must start with a 'modes N' header"));
        }

        let instr = parse_instruction(&mut lp)?;
        lp.finish()?;
        instructions.push(instr);
        lines.push(line_no);
    }

    let Some(modes) = modes else {
        return Err(ParseError {
            line: 1,
            column: 1,
            message: "missing 'modes N' header".into(),
        });
    };
    Ok((Circuit { modes, instructions }, lines))
}

fn parse_instruction(lp: &mut LineParser<'_>) -> Result<Instruction, ParseError> {
    let kw = lp.keyword.clone();
    let gate1 = |lp: &mut LineParser<'_>, key: &str| -> Result<(usize, f64), ParseError> {
        let m = lp.modes(1)?[0];
        let params = lp.params(&[key])?;
        Ok((m, lp.required(&params, key)?))
    };
    let gate2 = |lp: &mut LineParser<'_>, key: &str| -> Result<([usize; 2], f64), ParseError> {
        let m = lp.modes(2)?;
        let params = lp.params(&[key])?;
        Ok(([m[0], m[1]], lp.required(&params, key)?))
    };

    let instr = match kw.text {
        "init" => {
            let pos = lp.positionals();
            let [kind] = pos.as_slice() else {
                return Err(lp.err(
                    pos.get(1).map_or(lp.end_column, |t| t.column),
                    "'init' expects exactly one state kind",
                ));
            };
            let prep = match kind.text {
                "vacuum" => {
                    lp.params(&[])?;
                    Preparation::Vacuum
                }
                "coherent" => {
                    let params = lp.params(&["xi"])?;
                    let p = params
                        .get("xi")
                        .ok_or_else(|| lp.err(lp.end_column, "'init coherent' requires parameter 'xi'"))?;
                    Preparation::Coherent { xi: lp.vector(p)? }
                }
                "squeezed" => {
                    let params = lp.params(&["r"])?;
                    Preparation::Squeezed { r: lp.required(&params, "r")? }
                }
                "thermal" => {
                    let params = lp.params(&["nbar"])?;
                    Preparation::Thermal { n_bar: lp.required(&params, "nbar")? }
                }
                "epr" => {
                    let params = lp.params(&["r"])?;
                    Preparation::Epr { r: lp.required(&params, "r")? }
                }
                other => return Err(lp.err(kind.column, format!("unknown state kind {other:?}"))),
            };
            Instruction::Prepare(prep)
        }
        "disp" => {
            let mode = lp.modes(1)?[0];
            let params = lp.params(&["q", "p"])?;
            Instruction::Gate(Gate::Displacement {
                mode,
                q: lp.optional(&params, "q", 0.0)?,
                p: lp.optional(&params, "p", 0.0)?,
            })
        }
        "phase" => {
            let (mode, theta) = gate1(lp, "theta")?;
            Instruction::Gate(Gate::PhaseShift { mode, theta })
        }
        "squeeze" => {
            let (mode, r) = gate1(lp, "r")?;
            Instruction::Gate(Gate::Squeeze { mode, r })
        }
        "bs" => {
            let (modes, theta) = gate2(lp, "theta")?;
            Instruction::Gate(Gate::Beamsplitter { modes, theta })
        }
        "tms" => {
            let (modes, r) = gate2(lp, "r")?;
            Instruction::Gate(Gate::TwoModeSqueeze { modes, r })
        }
        "loss" => {
            let (mode, eta) = gate1(lp, "eta")?;
            Instruction::Gate(Gate::Loss { mode, eta })
        }
        "amp" => {
            let (mode, g) = gate1(lp, "g")?;
            Instruction::Gate(Gate::Amplifier { mode, g })
        }
        "noise" => {
            let (mode, n_noise) = gate1(lp, "n")?;
            Instruction::Gate(Gate::ThermalNoise { mode, n_noise })
        }
        "map" => parse_raw_map(lp)?,
        "homodyne" => {
            let mode = lp.modes(1)?[0];
            let params = lp.params(&["theta"])?;
            let theta = lp.required(&params, "theta")?;
            let label = lp.arrow_label()?;
            Instruction::Homodyne { mode, theta, label }
        }
        "heterodyne" => {
            let mode = lp.modes(1)?[0];
            let label = lp.arrow_label()?;
            Instruction::Heterodyne { mode, label }
        }
        "discard" => Instruction::Discard { mode: lp.modes(1)?[0] },
        "feedforward" => {
            let pos = lp.positionals();
            if let Some(t) = pos.first() {
                return Err(lp.err(t.column, format!("unexpected token {:?} before parameters", t.text)));
            }
            let params = lp.params(&["gain", "from", "to"])?;
            let gain = lp.required(&params, "gain")?;
            let from = params
                .get("from")
                .ok_or_else(|| lp.err(lp.end_column, "'feedforward' requires parameter 'from'"))?;
            if !is_record_key(from.value) {
                return Err(lp.err(from.column, format!("invalid record key {:?}", from.value)));
            }
            let to = params
                .get("to")
                .ok_or_else(|| lp.err(lp.end_column, "'feedforward' requires parameter 'to'"))?;
            let target = lp.usize_at(&Token { text: to.value, column: to.column }, "mode index")?;
            let dir = lp.positionals();
            let quadrature = match dir.as_slice() {
                [t] if t.text == "q" => Quadrature::Q,
                [t] if t.text == "p" => Quadrature::P,
                [t, ..] => return Err(lp.err(t.column, format!("expected quadrature 'q' or 'p', found {:?}", t.text))),
                [] => return Err(lp.err(lp.end_column, "'feedforward' requires a quadrature 'q' or 'p'")),
            };
            Instruction::Feedforward(Feedforward {
                gain,
                source: from.value.to_string(),
                target,
                quadrature,
            })
        }
        "output" => {
            let pos = lp.positionals();
            match pos.split_first() {
                Some((t, [])) if t.text == "state" => Instruction::Output(Output::State),
                Some((t, rest)) if t.text == "wigner" => {
                    if rest.is_empty() {
                        return Err(lp.err(lp.end_column, "'output wigner' requires a phase-space point"));
                    }
                    let point = rest
                        .iter()
                        .map(|tok| lp.float(tok.text, tok.column))
                        .collect::<Result<Vec<_>, _>>()?;
                    Instruction::Output(Output::Wigner { point })
                }
                Some((t, [extra, ..])) if t.text == "state" => {
                    return Err(lp.err(extra.column, format!("unexpected token {:?}", extra.text)))
                }
                Some((t, _)) => {
                    return Err(lp.err(t.column, format!("expected 'state' or 'wigner', found {:?}", t.text)))
                }
                None => return Err(lp.err(lp.end_column, "'output' expects 'state' or 'wigner'")),
            }
        }
        other => return Err(lp.err(kw.column, format!("unknown instruction {other:?}"))),
    };
    Ok(instr)
}

fn parse_raw_map(lp: &mut LineParser<'_>) -> Result<Instruction, ParseError> {
    let pos = lp.positionals();
    let modes = pos
        .iter()
        .map(|t| lp.usize_at(t, "mode index"))
        .collect::<Result<Vec<_>, _>>()?;
    let params = lp.params(&["alpha", "a", "g"])?;
    let alpha = params.get("alpha").map(|p| lp.vector(p)).transpose()?;
    let a = params.get("a").map(|p| lp.matrix(p)).transpose()?;
    let g = params.get("g").map(|p| lp.matrix(p)).transpose()?;

    let dim = if !modes.is_empty() {
        2 * modes.len()
    } else if let Some(a) = &a {
        a.nrows()
    } else if let Some(g) = &g {
        g.nrows()
    } else if let Some(alpha) = &alpha {
        alpha.len()
    } else {
        return Err(lp.err(lp.end_column, "'map' needs mode indices or at least one of alpha, a, g"));
    };
    let check = |len: usize, key: &str| -> Result<(), ParseError> {
        if len != dim {
            let column = params.get(key).map_or(lp.end_column, |p| p.column);
            return Err(lp.err(column, format!("'{key}' has dimension {len}, expected {dim}")));
        }
        Ok(())
    };
    if dim == 0 || dim % 2 != 0 {
        return Err(lp.err(lp.keyword.column, format!("phase-space dimension {dim} is not a positive even number")));
    }
    if let Some(v) = &alpha {
        check(v.len(), "alpha")?;
    }
    if let Some(m) = &a {
        check(m.nrows(), "a")?;
    }
    if let Some(m) = &g {
        check(m.nrows(), "g")?;
    }
    let map = GaussianMap::new(
        alpha.map_or_else(|| DVector::zeros(dim), DVector::from_vec),
        a.unwrap_or_else(|| DMatrix::identity(dim, dim)),
        g.unwrap_or_else(|| DMatrix::zeros(dim, dim)),
    )
    .map_err(|e| lp.err(params.get("g").map_or(lp.keyword.column, |p| p.column), e.to_string()))?;
    Ok(Instruction::RawMap { modes, map })
}
