//! Plain-text circuit format.
//!
//! ```text
//! qubits 2;
//! # comment
//! h 0;
//!
//! cx 0, 1;
//! rz 1 : 1.5707963267948966;
//! ```
//!
//! Blank lines separate layers. Angles are radians.

use std::fmt::Write as _;

use crate::circuit::{Gate, Instruction, QuantumCircuit};
use crate::error::{Error, ParseError, Result};

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn new(src: &str, line: usize) -> Self {
        Self {
            chars: src.chars().collect(),
            pos: 0,
            line,
        }
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.column(), message)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c == ' ' || c == '\t') {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let start = self.pos;
        while self.peek().is_some_and(&pred) {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn word(&mut self) -> String {
        self.take_while(|c| c.is_ascii_alphanumeric() || c == '_')
    }

    fn expect(&mut self, c: char, what: &str) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn integer(&mut self, what: &str) -> Result<(usize, usize), ParseError> {
        self.skip_ws();
        let col = self.column();
        let digits = self.take_while(|c| c.is_ascii_digit());
        if digits.is_empty() {
            return Err(ParseError::new(self.line, col, format!("expected {what}")));
        }
        digits
            .parse()
            .map(|v| (v, col))
            .map_err(|_| ParseError::new(self.line, col, format!("{what} is too large")))
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        self.skip_ws();
        let col = self.column();
        let text = self.take_while(|c| c.is_ascii_digit() || matches!(c, '.' | '+' | '-' | 'e' | 'E'));
        if text.is_empty() {
            return Err(ParseError::new(self.line, col, "expected a parameter value"));
        }
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(_) => Err(ParseError::new(self.line, col, "parameter is not finite")),
            Err(_) => Err(ParseError::new(self.line, col, format!("invalid number {text:?}"))),
        }
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        self.expect(';', "';'")?;
        self.skip_ws();
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.error("unexpected text after ';'")),
        }
    }
}

fn strip_comment(line: &str) -> &str {
    let line = line.strip_suffix('\r').unwrap_or(line);
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_header(cur: &mut Cursor) -> Result<usize, ParseError> {
    cur.skip_ws();
    let col = cur.column();
    if cur.word() != "qubits" {
        return Err(ParseError::new(cur.line, col, "expected header 'qubits <n>;'"));
    }
    let (n, _) = cur.integer("qubit count")?;
    cur.finish()?;
    Ok(n)
}

fn parse_statement(cur: &mut Cursor, n_qubits: usize) -> Result<(Instruction, Vec<usize>), ParseError> {
    cur.skip_ws();
    let name_col = cur.column();
    let name = cur.word();
    let arity = match name.as_str() {
        "cx" | "rxx" | "ryy" | "rzz" | "swap" => 2,
        "h" | "s" | "sdg" | "x" | "y" | "z" | "rx" | "ry" | "rz" | "measure" => 1,
        "" => return Err(ParseError::new(cur.line, name_col, "expected a gate name")),
        _ => {
            return Err(ParseError::new(
                cur.line,
                name_col,
                format!("unknown gate {name:?}"),
            ))
        }
    };
    let mut qubits = Vec::with_capacity(arity);
    let mut columns = Vec::with_capacity(arity);
    for k in 0..arity {
        if k > 0 {
            cur.skip_ws();
            if cur.peek() != Some(',') {
                return Err(cur.error(format!("gate {name} is missing its second qubit operand")));
            }
            cur.pos += 1;
        }
        let (q, col) = cur.integer("a qubit index")?;
        if q >= n_qubits {
            return Err(ParseError::new(
                cur.line,
                col,
                format!("qubit {q} out of range for {n_qubits} qubits"),
            ));
        }
        qubits.push(q);
        columns.push(col);
    }
    cur.skip_ws();
    if cur.peek() == Some(',') {
        return Err(cur.error(format!("gate {name} takes {arity} qubit operand(s)")));
    }
    let param = if cur.peek() == Some(':') {
        cur.pos += 1;
        if !Gate::takes_param(&name) {
            return Err(cur.error(format!("gate {name} takes no parameter")));
        }
        Some(cur.number()?)
    } else {
        if Gate::takes_param(&name) {
            return Err(cur.error(format!("gate {name} is missing its parameter")));
        }
        None
    };
    cur.finish()?;
    let gate = Gate::from_name(&name, param).expect("name and parameter checked");
    Ok((Instruction::new(gate, &qubits), columns))
}

/// Parses the text format into a layered circuit.
pub fn parse(text: &str) -> Result<QuantumCircuit> {
    let mut circuit: Option<QuantumCircuit> = None;
    let mut layer: Vec<Instruction> = Vec::new();
    let mut used: Vec<bool> = Vec::new();
    let mut layer_start = 0;

    let flush = |circuit: &mut QuantumCircuit,
                 layer: &mut Vec<Instruction>,
                 used: &mut Vec<bool>,
                 line: usize|
     -> Result<()> {
        let ops = std::mem::take(layer);
        used.iter_mut().for_each(|u| *u = false);
        circuit
            .push_layer(ops)
            .map_err(|e| ParseError::new(line, 1, e.to_string()).into())
    };

    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let raw_line = raw.strip_suffix('\r').unwrap_or(raw);
        let content = strip_comment(raw);
        if content.trim().is_empty() {
            if raw_line.trim().is_empty() {
                if let Some(c) = circuit.as_mut() {
                    flush(c, &mut layer, &mut used, layer_start)?;
                }
            }
            continue;
        }
        let mut cur = Cursor::new(content, line_no);
        let Some(c) = circuit.as_mut() else {
            let n = parse_header(&mut cur)?;
            circuit = Some(QuantumCircuit::new(n));
            used = vec![false; n];
            continue;
        };
        let (inst, columns) = parse_statement(&mut cur, c.n_qubits())?;
        if layer.is_empty() {
            layer_start = line_no;
        }
        for (&q, &col) in inst.qubits.iter().zip(&columns) {
            if std::mem::replace(&mut used[q], true) {
                return Err(ParseError::new(
                    line_no,
                    col,
                    format!("qubit {q} is already used in this layer"),
                )
                .into());
            }
        }
        layer.push(inst);
    }
    let Some(mut c) = circuit else {
        return Err(ParseError::new(1, 1, "missing header 'qubits <n>;'").into());
    };
    flush(&mut c, &mut layer, &mut used, layer_start)?;
    Ok(c)
}

/// Canonical text form. Fails only for gates the format cannot express (`u`).
pub fn serialize(circuit: &QuantumCircuit) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "qubits {};", circuit.n_qubits()).unwrap();
    for layer in circuit.layers() {
        out.push('\n');
        for op in layer.ops() {
            if matches!(op.gate, Gate::U(_)) {
                return Err(Error::Format(
                    "arbitrary single-qubit unitaries have no text form".into(),
                ));
            }
            out.push_str(op.gate.name());
            out.push(' ');
            let qs: Vec<String> = op.qubits.iter().map(usize::to_string).collect();
            out.push_str(&qs.join(", "));
            if let Some(t) = op.gate.param() {
                write!(out, " : {t:?}").unwrap();
            }
            out.push_str(";\n");
        }
    }
    Ok(out)
}
