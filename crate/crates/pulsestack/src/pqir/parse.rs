// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! Parser for the `.pqir` subset grammar.
//!
//! Whitespace-insensitive between tokens; `;` starts a line comment. The
//! parser accepts exactly the constructs the emitter produces: opaque type
//! declarations, constant arrays of doubles or `%Frame*` handles, one
//! entry function of intrinsic calls, intrinsic declarations, and one
//! attribute group. Calls are type-checked against the fixed intrinsic
//! table.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::ir::{Frame, FrameId, PortId, PulseInstruction, ResultId, Schedule, SiteId, Waveform};
use crate::passes::{Diagnostic, Diagnostics};

use super::{
    intrinsic_signature, ArgType, ModuleAttributes, PulseModule, BARRIER, CAPTURE, DELAY,
    FRAME_CHANGE, MZ, PULSE_PROFILE, SET_FREQUENCY, SET_PHASE, SHIFT_FREQUENCY, SHIFT_PHASE,
    WAVEFORM, WAVEFORM_PLAY,
};

/// Successful parse: the module plus non-fatal notes (e.g. unknown
/// intrinsics that are declared but never called).
#[derive(Debug)]
pub struct Parsed {
    pub module: PulseModule,
    pub notes: Diagnostics,
}

/// Parse `.pqir` text into a module.
pub fn parse(text: &str) -> Result<Parsed, ParseError> {
    let tokens = lex(text)?;
    Parser::new(tokens).run()
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    /// `%name`
    Local(String),
    /// `@name`
    Global(String),
    /// Bare keyword or identifier.
    Word(String),
    /// `"..."`
    Str(String),
    /// Integer or float literal text.
    Number(String),
    /// `#N`
    AttrRef(u32),
    Punct(char),
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    line: u32,
    col: u32,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut chars = text.chars().peekable();

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if let Some(c) = c {
                if c == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let (tok_line, tok_col) = (line, col);
        match c {
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump!();
                }
            }
            c if c.is_whitespace() => {
                bump!();
            }
            '%' | '@' => {
                bump!();
                let mut name = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                        name.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                if name.is_empty() {
                    return Err(ParseError::syntax(
                        tok_line,
                        tok_col,
                        "identifier after sigil",
                    ));
                }
                let kind = if c == '%' {
                    TokenKind::Local(name)
                } else {
                    TokenKind::Global(name)
                };
                tokens.push(Token {
                    kind,
                    line: tok_line,
                    col: tok_col,
                });
            }
            '#' => {
                bump!();
                let mut digits = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        digits.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                let value: u32 = digits
                    .parse()
                    .map_err(|_| ParseError::syntax(tok_line, tok_col, "attribute group number"))?;
                tokens.push(Token {
                    kind: TokenKind::AttrRef(value),
                    line: tok_line,
                    col: tok_col,
                });
            }
            '"' => {
                bump!();
                let mut value = String::new();
                loop {
                    match bump!() {
                        Some('"') => break,
                        Some('\n') | None => {
                            return Err(ParseError::syntax(
                                tok_line,
                                tok_col,
                                "closing quote on the same line",
                            ))
                        }
                        Some(c) => value.push(c),
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Str(value),
                    line: tok_line,
                    col: tok_col,
                });
            }
            '-' | '0'..='9' => {
                let mut number = String::new();
                number.push(c);
                bump!();
                while let Some(&c) = chars.peek() {
                    let exponent_sign = matches!(c, '+' | '-')
                        && matches!(number.chars().last(), Some('e') | Some('E'));
                    if c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E') || exponent_sign {
                        number.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Number(number),
                    line: tok_line,
                    col: tok_col,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        word.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Word(word),
                    line: tok_line,
                    col: tok_col,
                });
            }
            '=' | '(' | ')' | '[' | ']' | '{' | '}' | ',' | ':' | '*' => {
                bump!();
                tokens.push(Token {
                    kind: TokenKind::Punct(c),
                    line: tok_line,
                    col: tok_col,
                });
            }
            other => {
                return Err(ParseError::syntax(
                    tok_line,
                    tok_col,
                    format!("token (found {other:?})"),
                ))
            }
        }
    }
    Ok(tokens)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Arg {
    I64(u64),
    Double(f64),
    DoublePtr(String),
    WaveformLocal(String),
    Handle { ty: String, value: u64 },
    FrameList(String),
}

impl Arg {
    fn type_name(&self) -> String {
        match self {
            Arg::I64(_) => "i64".to_string(),
            Arg::Double(_) => "double".to_string(),
            Arg::DoublePtr(_) => "double*".to_string(),
            Arg::WaveformLocal(_) => "%Waveform*".to_string(),
            Arg::Handle { ty, .. } => format!("%{ty}*"),
            Arg::FrameList(_) => "%Frame**".to_string(),
        }
    }

    fn matches(&self, expected: ArgType) -> bool {
        match (self, expected) {
            (Arg::I64(_), ArgType::I64)
            | (Arg::Double(_), ArgType::Double)
            | (Arg::DoublePtr(_), ArgType::DoublePtr)
            | (Arg::WaveformLocal(_), ArgType::WaveformPtr)
            | (Arg::FrameList(_), ArgType::FramePtrPtr) => true,
            (Arg::Handle { ty, .. }, ArgType::PortPtr) => ty == "Port",
            (Arg::Handle { ty, .. }, ArgType::FramePtr) => ty == "Frame",
            (Arg::Handle { ty, .. }, ArgType::QubitPtr) => ty == "Qubit",
            (Arg::Handle { ty, .. }, ArgType::ResultPtr) => ty == "Result",
            _ => false,
        }
    }
}

struct Call {
    assigned: Option<String>,
    returns: Option<String>, // pointer type name for non-void returns
    name: String,
    args: Vec<Arg>,
    line: u32,
    col: u32,
}

struct Declare {
    name: String,
    args: Vec<String>,
    ret: Option<String>,
    line: u32,
    col: u32,
}

/// `(key, value, line, col)` entries of one attribute group.
type AttrEntries = Vec<(String, Option<String>, u32, u32)>;

#[derive(Default)]
struct RawModule {
    module_name: Option<String>,
    entry_name: Option<String>,
    entry_attr_ref: Option<u32>,
    double_globals: Vec<(String, Vec<f64>)>,
    frame_list_globals: BTreeMap<String, Vec<u64>>,
    calls: Vec<Call>,
    declares: Vec<Declare>,
    attr_groups: BTreeMap<u32, AttrEntries>,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(tokens: Vec<Token>) -> Self {
        Parser { tokens, pos: 0 }
    }

    fn here(&self) -> (u32, u32) {
        match self.tokens.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => self
                .tokens
                .last()
                .map(|t| (t.line, t.col + 1))
                .unwrap_or((1, 1)),
        }
    }

    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn next(&mut self) -> Option<Token> {
        let token = self.tokens.get(self.pos).cloned();
        if token.is_some() {
            self.pos += 1;
        }
        token
    }

    fn syntax(&self, expected: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError::syntax(line, col, expected)
    }

    fn expect_word(&mut self, word: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(TokenKind::Word(w)) if w == word => {
                self.next();
                Ok(())
            }
            _ => Err(self.syntax(format!("keyword `{word}`"))),
        }
    }

    fn expect_punct(&mut self, punct: char) -> Result<(), ParseError> {
        match self.peek() {
            Some(TokenKind::Punct(p)) if *p == punct => {
                self.next();
                Ok(())
            }
            _ => Err(self.syntax(format!("`{punct}`"))),
        }
    }

    fn eat_punct(&mut self, punct: char) -> bool {
        if matches!(self.peek(), Some(TokenKind::Punct(p)) if *p == punct) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_local(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(TokenKind::Local(_)) => {
                let Some(Token {
                    kind: TokenKind::Local(name),
                    ..
                }) = self.next()
                else {
                    unreachable!()
                };
                Ok(name)
            }
            _ => Err(self.syntax("%identifier")),
        }
    }

    fn expect_global(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(TokenKind::Global(_)) => {
                let Some(Token {
                    kind: TokenKind::Global(name),
                    ..
                }) = self.next()
                else {
                    unreachable!()
                };
                Ok(name)
            }
            _ => Err(self.syntax("@identifier")),
        }
    }

    fn expect_string(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(TokenKind::Str(_)) => {
                let Some(Token {
                    kind: TokenKind::Str(value),
                    ..
                }) = self.next()
                else {
                    unreachable!()
                };
                Ok(value)
            }
            _ => Err(self.syntax("string literal")),
        }
    }

    fn expect_u64(&mut self) -> Result<u64, ParseError> {
        let (line, col) = self.here();
        match self.peek() {
            Some(TokenKind::Number(_)) => {
                let Some(Token {
                    kind: TokenKind::Number(text),
                    ..
                }) = self.next()
                else {
                    unreachable!()
                };
                text.parse()
                    .map_err(|_| ParseError::syntax(line, col, "non-negative integer"))
            }
            _ => Err(self.syntax("integer literal")),
        }
    }

    fn expect_f64(&mut self) -> Result<f64, ParseError> {
        let (line, col) = self.here();
        match self.peek() {
            Some(TokenKind::Number(_)) => {
                let Some(Token {
                    kind: TokenKind::Number(text),
                    ..
                }) = self.next()
                else {
                    unreachable!()
                };
                text.parse()
                    .map_err(|_| ParseError::syntax(line, col, "floating-point literal"))
            }
            _ => Err(self.syntax("floating-point literal")),
        }
    }

    fn run(mut self) -> Result<Parsed, ParseError> {
        let mut raw = RawModule::default();
        while let Some(kind) = self.peek() {
            match kind {
                TokenKind::Word(w) if w == "source_filename" => {
                    self.next();
                    self.expect_punct('=')?;
                    raw.module_name = Some(self.expect_string()?);
                }
                TokenKind::Local(_) => {
                    // `%Name = type opaque`
                    self.next();
                    self.expect_punct('=')?;
                    self.expect_word("type")?;
                    self.expect_word("opaque")?;
                }
                TokenKind::Global(_) => self.parse_global(&mut raw)?,
                TokenKind::Word(w) if w == "define" => self.parse_define(&mut raw)?,
                TokenKind::Word(w) if w == "declare" => self.parse_declare(&mut raw)?,
                TokenKind::Word(w) if w == "attributes" => self.parse_attributes(&mut raw)?,
                _ => return Err(self.syntax(
                    "top-level item (source_filename, type, global, define, declare, attributes)",
                )),
            }
        }
        assemble(raw)
    }

    fn parse_global(&mut self, raw: &mut RawModule) -> Result<(), ParseError> {
        let (line, col) = self.here();
        let name = self.expect_global()?;
        self.expect_punct('=')?;
        self.expect_word("constant")?;
        self.expect_punct('[')?;
        let declared_len = self.expect_u64()?;
        self.expect_word("x")?;
        match self.peek() {
            Some(TokenKind::Word(w)) if w == "double" => {
                self.next();
                self.expect_punct(']')?;
                self.expect_punct('[')?;
                let mut values = Vec::new();
                loop {
                    self.expect_word("double")?;
                    values.push(self.expect_f64()?);
                    if !self.eat_punct(',') {
                        break;
                    }
                }
                self.expect_punct(']')?;
                if values.len() as u64 != declared_len {
                    return Err(ParseError::invalid_data(
                        line,
                        col,
                        format!(
                            "global @{name} declares {declared_len} doubles but lists {}",
                            values.len()
                        ),
                    ));
                }
                raw.double_globals.push((name, values));
            }
            Some(TokenKind::Local(t)) if t == "Frame" => {
                self.next();
                self.expect_punct('*')?;
                self.expect_punct(']')?;
                self.expect_punct('[')?;
                let mut handles = Vec::new();
                loop {
                    let local = self.expect_local()?;
                    if local != "Frame" {
                        return Err(self.syntax("%Frame* element"));
                    }
                    self.expect_punct('*')?;
                    let (value, ty) = self.parse_inttoptr()?;
                    if ty != "Frame" {
                        return Err(self.syntax("inttoptr to %Frame*"));
                    }
                    handles.push(value);
                    if !self.eat_punct(',') {
                        break;
                    }
                }
                self.expect_punct(']')?;
                if handles.len() as u64 != declared_len {
                    return Err(ParseError::invalid_data(
                        line,
                        col,
                        format!(
                            "global @{name} declares {declared_len} frames but lists {}",
                            handles.len()
                        ),
                    ));
                }
                raw.frame_list_globals.insert(name, handles);
            }
            _ => return Err(self.syntax("array element type (double or %Frame*)")),
        }
        Ok(())
    }

    fn parse_inttoptr(&mut self) -> Result<(u64, String), ParseError> {
        self.expect_word("inttoptr")?;
        self.expect_punct('(')?;
        self.expect_word("i64")?;
        let value = self.expect_u64()?;
        self.expect_word("to")?;
        let ty = self.expect_local()?;
        self.expect_punct('*')?;
        self.expect_punct(')')?;
        Ok((value, ty))
    }

    fn parse_define(&mut self, raw: &mut RawModule) -> Result<(), ParseError> {
        self.expect_word("define")?;
        if raw.entry_name.is_some() {
            return Err(self.syntax("a single entry function per module"));
        }
        self.expect_word("void")?;
        raw.entry_name = Some(self.expect_global()?);
        self.expect_punct('(')?;
        self.expect_punct(')')?;
        match self.peek() {
            Some(TokenKind::AttrRef(n)) => {
                raw.entry_attr_ref = Some(*n);
                self.next();
            }
            _ => return Err(self.syntax("attribute group reference (#N)")),
        }
        self.expect_punct('{')?;
        // Optional basic-block label.
        if let Some(TokenKind::Word(_)) = self.peek() {
            if matches!(
                self.tokens.get(self.pos + 1).map(|t| &t.kind),
                Some(TokenKind::Punct(':'))
            ) {
                self.next();
                self.next();
            }
        }
        loop {
            match self.peek() {
                Some(TokenKind::Word(w)) if w == "ret" => {
                    self.next();
                    self.expect_word("void")?;
                    break;
                }
                Some(TokenKind::Word(w)) if w == "call" => {
                    let call = self.parse_call(None)?;
                    raw.calls.push(call);
                }
                Some(TokenKind::Local(_)) => {
                    let (line, col) = self.here();
                    let assigned = self.expect_local()?;
                    self.expect_punct('=')?;
                    match self.peek() {
                        Some(TokenKind::Word(w)) if w == "call" => {
                            let call = self.parse_call(Some((assigned, line, col)))?;
                            raw.calls.push(call);
                        }
                        _ => return Err(self.syntax("`call` after assignment")),
                    }
                }
                _ => return Err(self.syntax("call instruction or `ret void`")),
            }
        }
        self.expect_punct('}')?;
        Ok(())
    }

    fn parse_call(&mut self, assigned: Option<(String, u32, u32)>) -> Result<Call, ParseError> {
        self.expect_word("call")?;
        let returns = match self.peek() {
            Some(TokenKind::Word(w)) if w == "void" => {
                self.next();
                None
            }
            Some(TokenKind::Local(_)) => {
                let ty = self.expect_local()?;
                self.expect_punct('*')?;
                Some(ty)
            }
            _ => return Err(self.syntax("return type (void or %Type*)")),
        };
        let (line, col) = self.here();
        let name = self.expect_global()?;
        self.expect_punct('(')?;
        let mut args = Vec::new();
        if !self.eat_punct(')') {
            loop {
                args.push(self.parse_arg()?);
                if !self.eat_punct(',') {
                    break;
                }
            }
            self.expect_punct(')')?;
        }
        let (assigned, line, col) = match assigned {
            Some((name, line, col)) => (Some(name), line, col),
            None => (None, line, col),
        };
        Ok(Call {
            assigned,
            returns,
            name,
            args,
            line,
            col,
        })
    }

    fn parse_arg(&mut self) -> Result<Arg, ParseError> {
        match self.peek().cloned() {
            Some(TokenKind::Word(w)) if w == "i64" => {
                self.next();
                Ok(Arg::I64(self.expect_u64()?))
            }
            Some(TokenKind::Word(w)) if w == "double" => {
                self.next();
                if self.eat_punct('*') {
                    Ok(Arg::DoublePtr(self.expect_global()?))
                } else {
                    Ok(Arg::Double(self.expect_f64()?))
                }
            }
            Some(TokenKind::Local(ty)) => {
                self.next();
                self.expect_punct('*')?;
                if self.eat_punct('*') {
                    if ty != "Frame" {
                        return Err(self.syntax("%Frame** argument"));
                    }
                    return Ok(Arg::FrameList(self.expect_global()?));
                }
                match self.peek() {
                    Some(TokenKind::Word(w)) if w == "inttoptr" => {
                        let (value, target) = self.parse_inttoptr()?;
                        if target != ty {
                            return Err(self.syntax(format!("inttoptr to %{ty}*")));
                        }
                        Ok(Arg::Handle { ty, value })
                    }
                    Some(TokenKind::Local(_)) => {
                        let local = self.expect_local()?;
                        if ty == "Waveform" {
                            Ok(Arg::WaveformLocal(local))
                        } else {
                            Err(self.syntax("%Waveform* local reference"))
                        }
                    }
                    _ => Err(self.syntax("inttoptr handle or local reference")),
                }
            }
            _ => Err(self.syntax("argument")),
        }
    }

    fn parse_declare(&mut self, raw: &mut RawModule) -> Result<(), ParseError> {
        self.expect_word("declare")?;
        let ret = match self.peek() {
            Some(TokenKind::Word(w)) if w == "void" => {
                self.next();
                None
            }
            Some(TokenKind::Local(_)) => {
                let ty = self.expect_local()?;
                self.expect_punct('*')?;
                Some(ty)
            }
            _ => return Err(self.syntax("return type")),
        };
        let (line, col) = self.here();
        let name = self.expect_global()?;
        self.expect_punct('(')?;
        let mut args = Vec::new();
        if !self.eat_punct(')') {
            loop {
                args.push(self.parse_type_name()?);
                if !self.eat_punct(',') {
                    break;
                }
            }
            self.expect_punct(')')?;
        }
        raw.declares.push(Declare {
            name,
            args,
            ret,
            line,
            col,
        });
        Ok(())
    }

    fn parse_type_name(&mut self) -> Result<String, ParseError> {
        match self.peek().cloned() {
            Some(TokenKind::Word(w)) if w == "i64" => {
                self.next();
                Ok("i64".to_string())
            }
            Some(TokenKind::Word(w)) if w == "double" => {
                self.next();
                if self.eat_punct('*') {
                    Ok("double*".to_string())
                } else {
                    Ok("double".to_string())
                }
            }
            Some(TokenKind::Local(ty)) => {
                self.next();
                self.expect_punct('*')?;
                if self.eat_punct('*') {
                    Ok(format!("%{ty}**"))
                } else {
                    Ok(format!("%{ty}*"))
                }
            }
            _ => Err(self.syntax("type name")),
        }
    }

    fn parse_attributes(&mut self, raw: &mut RawModule) -> Result<(), ParseError> {
        self.expect_word("attributes")?;
        let group = match self.peek() {
            Some(TokenKind::AttrRef(n)) => {
                let n = *n;
                self.next();
                n
            }
            _ => return Err(self.syntax("attribute group reference (#N)")),
        };
        self.expect_punct('=')?;
        self.expect_punct('{')?;
        let mut entries = Vec::new();
        loop {
            match self.peek() {
                Some(TokenKind::Punct('}')) => {
                    self.next();
                    break;
                }
                Some(TokenKind::Str(_)) => {
                    let (line, col) = self.here();
                    let key = self.expect_string()?;
                    let value = if self.eat_punct('=') {
                        Some(self.expect_string()?)
                    } else {
                        None
                    };
                    entries.push((key, value, line, col));
                }
                _ => return Err(self.syntax("attribute key or `}`")),
            }
        }
        raw.attr_groups.insert(group, entries);
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Semantic assembly
// ---------------------------------------------------------------------------

fn assemble(raw: RawModule) -> Result<Parsed, ParseError> {
    let mut notes = Diagnostics::new();

    let entry_name = raw.entry_name.ok_or(ParseError {
        line: 1,
        col: 1,
        kind: ParseErrorKind::MissingEntry,
    })?;
    let module_name = raw.module_name.unwrap_or_else(|| "module".to_string());

    // Declares: check known signatures, note unknown-but-uncalled names.
    for declare in &raw.declares {
        match intrinsic_signature(&declare.name) {
            Some((args, returns_waveform)) => {
                let expected: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                let expected_ret = returns_waveform.then(|| "Waveform".to_string());
                if declare.args != expected || declare.ret != expected_ret {
                    return Err(ParseError {
                        line: declare.line,
                        col: declare.col,
                        kind: ParseErrorKind::DeclarationMismatch {
                            name: declare.name.clone(),
                        },
                    });
                }
            }
            None => {
                if !raw.calls.iter().any(|c| c.name == declare.name) {
                    notes.push(Diagnostic::note(
                        None,
                        format!(
                            "declared intrinsic {} is unknown and never called; ignored",
                            declare.name
                        ),
                    ));
                } else {
                    return Err(ParseError {
                        line: declare.line,
                        col: declare.col,
                        kind: ParseErrorKind::UnknownIntrinsic {
                            name: declare.name.clone(),
                        },
                    });
                }
            }
        }
    }

    // Attribute group.
    let attr_ref = raw.entry_attr_ref.unwrap_or(0);
    let Some(entries) = raw.attr_groups.get(&attr_ref) else {
        return Err(ParseError {
            line: 1,
            col: 1,
            kind: ParseErrorKind::Syntax {
                expected: format!("attributes #{attr_ref} group"),
            },
        });
    };
    let mut attributes = ModuleAttributes {
        entry_point: false,
        output_labeling_schema: String::new(),
        qir_profiles: String::new(),
        required_num_ports: 0,
        required_num_qubits: 0,
        required_num_results: 0,
    };
    for (key, value, line, col) in entries {
        let parse_count = |value: &Option<String>| -> Result<u32, ParseError> {
            value.as_deref().unwrap_or("0").parse().map_err(|_| {
                ParseError::invalid_data(*line, *col, format!("attribute {key} must be a count"))
            })
        };
        match key.as_str() {
            "entry_point" => attributes.entry_point = true,
            "output_labeling_schema" => {
                attributes.output_labeling_schema = value.clone().unwrap_or_default()
            }
            "qir_profiles" => attributes.qir_profiles = value.clone().unwrap_or_default(),
            "required_num_ports" => attributes.required_num_ports = parse_count(value)?,
            "required_num_qubits" => attributes.required_num_qubits = parse_count(value)?,
            "required_num_results" => attributes.required_num_results = parse_count(value)?,
            other => notes.push(Diagnostic::note(
                None,
                format!("unknown attribute {other:?} ignored"),
            )),
        }
    }
    if attributes.qir_profiles != PULSE_PROFILE {
        return Err(ParseError {
            line: 1,
            col: 1,
            kind: ParseErrorKind::ProfileMismatch {
                found: attributes.qir_profiles.clone(),
            },
        });
    }

    // Calls -> instructions.
    let mut waveforms: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let mut instructions: Vec<PulseInstruction> = Vec::new();
    let mut handles: std::collections::BTreeSet<u32> = std::collections::BTreeSet::new();

    for call in &raw.calls {
        let (expected_args, returns_waveform) =
            intrinsic_signature(&call.name).ok_or(ParseError {
                line: call.line,
                col: call.col,
                kind: ParseErrorKind::UnknownIntrinsic {
                    name: call.name.clone(),
                },
            })?;
        if call.args.len() != expected_args.len() {
            return Err(ParseError {
                line: call.line,
                col: call.col,
                kind: ParseErrorKind::Arity {
                    intrinsic: call.name.clone(),
                    expected: expected_args.len(),
                    got: call.args.len(),
                },
            });
        }
        for (index, (arg, expected)) in call.args.iter().zip(expected_args).enumerate() {
            if !arg.matches(*expected) {
                return Err(ParseError {
                    line: call.line,
                    col: call.col,
                    kind: ParseErrorKind::TypeMismatch {
                        intrinsic: call.name.clone(),
                        index,
                        expected: expected.to_string(),
                        got: arg.type_name(),
                    },
                });
            }
        }
        let returns_ok = match (&call.returns, returns_waveform) {
            (None, false) => call.assigned.is_none(),
            (Some(ty), true) => ty == "Waveform",
            _ => false,
        };
        if !returns_ok {
            return Err(ParseError {
                line: call.line,
                col: call.col,
                kind: ParseErrorKind::TypeMismatch {
                    intrinsic: call.name.clone(),
                    index: usize::MAX,
                    expected: if returns_waveform {
                        "%Waveform*"
                    } else {
                        "void"
                    }
                    .to_string(),
                    got: call
                        .returns
                        .as_ref()
                        .map(|t| format!("%{t}*"))
                        .unwrap_or_else(|| "void".to_string()),
                },
            });
        }

        let handle32 = |value: u64| -> Result<u32, ParseError> {
            u32::try_from(value).map_err(|_| {
                ParseError::invalid_data(call.line, call.col, "handle exceeds u32 range")
            })
        };

        match call.name.as_str() {
            WAVEFORM => {
                let Arg::I64(len) = call.args[0] else {
                    unreachable!()
                };
                let Arg::DoublePtr(ref global) = call.args[1] else {
                    unreachable!()
                };
                let data = raw
                    .double_globals
                    .iter()
                    .find(|(name, _)| name == global)
                    .map(|(_, data)| data)
                    .ok_or(ParseError {
                        line: call.line,
                        col: call.col,
                        kind: ParseErrorKind::UndeclaredGlobal {
                            name: global.clone(),
                        },
                    })?;
                if data.len() as u64 != len * 2 {
                    return Err(ParseError::invalid_data(
                        call.line,
                        call.col,
                        format!(
                            "waveform of {len} samples needs {} doubles, global @{global} has {}",
                            len * 2,
                            data.len()
                        ),
                    ));
                }
                let samples: Vec<(f64, f64)> = data.chunks_exact(2).map(|c| (c[0], c[1])).collect();
                let local = call.assigned.clone().ok_or_else(|| {
                    ParseError::syntax(call.line, call.col, "assignment of the waveform handle")
                })?;
                waveforms.insert(local, samples);
            }
            WAVEFORM_PLAY => {
                let Arg::Handle { value, .. } = call.args[0] else {
                    unreachable!()
                };
                let Arg::WaveformLocal(ref local) = call.args[1] else {
                    unreachable!()
                };
                let samples = waveforms.get(local).ok_or(ParseError {
                    line: call.line,
                    col: call.col,
                    kind: ParseErrorKind::UndefinedLocal {
                        name: local.clone(),
                    },
                })?;
                let handle = handle32(value)?;
                handles.insert(handle);
                let waveform =
                    Waveform::sampled(samples.iter().map(|&(re, im)| Complex64::new(re, im)))
                        .map_err(|e| {
                            ParseError::invalid_data(call.line, call.col, e.to_string())
                        })?;
                instructions.push(PulseInstruction::Play {
                    frame: canonical_frame(handle),
                    waveform,
                });
            }
            FRAME_CHANGE => {
                let Arg::Handle { value, .. } = call.args[0] else {
                    unreachable!()
                };
                let Arg::Double(frequency) = call.args[1] else {
                    unreachable!()
                };
                let Arg::Double(phase) = call.args[2] else {
                    unreachable!()
                };
                let handle = handle32(value)?;
                handles.insert(handle);
                instructions.push(PulseInstruction::SetFrequency {
                    frame: canonical_frame(handle),
                    frequency_hz: frequency,
                });
                instructions.push(PulseInstruction::SetPhase {
                    frame: canonical_frame(handle),
                    phase_rad: phase,
                });
            }
            DELAY => {
                let Arg::Handle { value, .. } = call.args[0] else {
                    unreachable!()
                };
                let Arg::I64(duration) = call.args[1] else {
                    unreachable!()
                };
                let handle = handle32(value)?;
                handles.insert(handle);
                instructions.push(PulseInstruction::Delay {
                    frame: canonical_frame(handle),
                    duration_samples: duration,
                });
            }
            SHIFT_PHASE | SET_PHASE | SHIFT_FREQUENCY | SET_FREQUENCY => {
                let Arg::Handle { value, .. } = call.args[0] else {
                    unreachable!()
                };
                let Arg::Double(argument) = call.args[1] else {
                    unreachable!()
                };
                let handle = handle32(value)?;
                handles.insert(handle);
                let frame = canonical_frame(handle);
                instructions.push(match call.name.as_str() {
                    SHIFT_PHASE => PulseInstruction::ShiftPhase {
                        frame,
                        delta_rad: argument,
                    },
                    SET_PHASE => PulseInstruction::SetPhase {
                        frame,
                        phase_rad: argument,
                    },
                    SHIFT_FREQUENCY => PulseInstruction::ShiftFrequency {
                        frame,
                        delta_hz: argument,
                    },
                    _ => PulseInstruction::SetFrequency {
                        frame,
                        frequency_hz: argument,
                    },
                });
            }
            BARRIER => {
                let Arg::I64(count) = call.args[0] else {
                    unreachable!()
                };
                let Arg::FrameList(ref global) = call.args[1] else {
                    unreachable!()
                };
                let list = raw.frame_list_globals.get(global).ok_or(ParseError {
                    line: call.line,
                    col: call.col,
                    kind: ParseErrorKind::UndeclaredGlobal {
                        name: global.clone(),
                    },
                })?;
                if list.len() as u64 != count {
                    return Err(ParseError::invalid_data(
                        call.line,
                        call.col,
                        format!(
                            "barrier claims {count} frames, global @{global} lists {}",
                            list.len()
                        ),
                    ));
                }
                let mut frames = std::collections::BTreeSet::new();
                for &value in list {
                    let handle = handle32(value)?;
                    handles.insert(handle);
                    frames.insert(canonical_frame(handle));
                }
                instructions.push(PulseInstruction::Barrier { frames });
            }
            CAPTURE => {
                let Arg::Handle { value: frame, .. } = call.args[0] else {
                    unreachable!()
                };
                let Arg::Handle { value: result, .. } = call.args[1] else {
                    unreachable!()
                };
                let handle = handle32(frame)?;
                handles.insert(handle);
                instructions.push(PulseInstruction::Capture {
                    frame: canonical_frame(handle),
                    result: ResultId(handle32(result)?),
                });
            }
            MZ => {
                let Arg::Handle { value: qubit, .. } = call.args[0] else {
                    unreachable!()
                };
                let Arg::Handle { value: result, .. } = call.args[1] else {
                    unreachable!()
                };
                instructions.push(PulseInstruction::Measure {
                    site: SiteId(handle32(qubit)?),
                    result: ResultId(handle32(result)?),
                });
            }
            _ => unreachable!("signature table covers every name"),
        }
    }

    let mut frames = BTreeMap::new();
    for handle in handles {
        let id = canonical_frame(handle);
        let port = PortId::new(format!("port{handle}")).expect("canonical port id");
        frames.insert(
            id.clone(),
            Frame::new(id, port, 0.0, 0.0).expect("zero frame state"),
        );
    }
    let schedule = Schedule::new(frames, instructions).map_err(|e| ParseError {
        line: 1,
        col: 1,
        kind: ParseErrorKind::Schedule(e.to_string()),
    })?;

    let module = PulseModule {
        module_name,
        entry_name,
        attributes,
        schedule,
        waveform_globals: raw
            .double_globals
            .into_iter()
            .map(|(name, data)| {
                let samples = data.chunks_exact(2).map(|c| (c[0], c[1])).collect();
                (name, samples)
            })
            .collect(),
    };
    module.validate().map_err(|e| ParseError {
        line: 1,
        col: 1,
        kind: ParseErrorKind::Module(e.to_string()),
    })?;

    Ok(Parsed { module, notes })
}

fn canonical_frame(handle: u32) -> FrameId {
    FrameId::new(format!("frame{handle}")).expect("canonical frame id")
}

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

#[derive(Debug, Error, PartialEq)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn syntax(line: u32, col: u32, expected: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            kind: ParseErrorKind::Syntax {
                expected: expected.into(),
            },
        }
    }

    fn invalid_data(line: u32, col: u32, message: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            kind: ParseErrorKind::InvalidData {
                message: message.into(),
            },
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ParseErrorKind {
    #[error("expected {expected}")]
    Syntax { expected: String },
    #[error("qir_profiles is {found:?}, expected \"pulse\"")]
    ProfileMismatch { found: String },
    #[error("reference to undeclared global @{name}")]
    UndeclaredGlobal { name: String },
    #[error("{intrinsic} expects {expected} arguments, got {got}")]
    Arity {
        intrinsic: String,
        expected: usize,
        got: usize,
    },
    #[error("{intrinsic} argument {index}: expected {expected}, got {got}")]
    TypeMismatch {
        intrinsic: String,
        index: usize,
        expected: String,
        got: String,
    },
    #[error("call to unknown intrinsic {name}")]
    UnknownIntrinsic { name: String },
    #[error("reference to undefined local %{name}")]
    UndefinedLocal { name: String },
    #[error("declaration of {name} does not match the intrinsic table")]
    DeclarationMismatch { name: String },
    #[error("module has no entry function")]
    MissingEntry,
    #[error("invalid data: {message}")]
    InvalidData { message: String },
    #[error("schedule invariant violated: {0}")]
    Schedule(String),
    #[error("module invariant violated: {0}")]
    Module(String),
}
