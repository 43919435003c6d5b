//! Tokenizer for `.cmt` template files.

use super::Position;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum TokenKind {
    /// Bare word: keywords, part kinds, formats, tags, meta keys, booleans.
    Word(String),
    /// Decoded string literal plus the source position of every decoded char.
    Str(String, Vec<Position>),
    Int(i128),
    Colon,
    Comma,
    Plus,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Eof,
}

impl TokenKind {
    pub(crate) fn describe(&self) -> String {
        match self {
            TokenKind::Word(w) => format!("'{w}'"),
            TokenKind::Str(..) => "a string".into(),
            TokenKind::Int(_) => "an integer".into(),
            TokenKind::Colon => "':'".into(),
            TokenKind::Comma => "','".into(),
            TokenKind::Plus => "'+'".into(),
            TokenKind::LBrace => "'{'".into(),
            TokenKind::RBrace => "'}'".into(),
            TokenKind::LBracket => "'['".into(),
            TokenKind::RBracket => "']'".into(),
            TokenKind::Eof => "end of file".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Token {
    pub kind: TokenKind,
    pub pos: Position,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LexError {
    pub message: String,
    pub pos: Position,
}

pub(crate) struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Position,
}

impl<'a> Lexer<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Self {
            chars: text.chars().peekable(),
            pos: Position { line: 1, column: 1 },
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == '#' {
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    pub(crate) fn tokenize(mut self) -> Result<Vec<Token>, LexError> {
        let mut tokens = Vec::new();
        loop {
            self.skip_trivia();
            let pos = self.pos;
            let Some(&c) = self.chars.peek() else {
                tokens.push(Token {
                    kind: TokenKind::Eof,
                    pos,
                });
                return Ok(tokens);
            };
            let kind = match c {
                ':' | ',' | '+' | '{' | '}' | '[' | ']' => {
                    self.bump();
                    match c {
                        ':' => TokenKind::Colon,
                        ',' => TokenKind::Comma,
                        '+' => TokenKind::Plus,
                        '{' => TokenKind::LBrace,
                        '}' => TokenKind::RBrace,
                        '[' => TokenKind::LBracket,
                        _ => TokenKind::RBracket,
                    }
                }
                '"' => self.string(pos)?,
                '-' | '0'..='9' => self.integer(pos)?,
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let mut word = String::new();
                    while let Some(&c) = self.chars.peek() {
                        if c.is_ascii_alphanumeric() || c == '_' {
                            word.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    TokenKind::Word(word)
                }
                other => {
                    return Err(LexError {
                        message: format!("unexpected character {other:?}"),
                        pos,
                    })
                }
            };
            tokens.push(Token { kind, pos });
        }
    }

    fn integer(&mut self, start: Position) -> Result<TokenKind, LexError> {
        let negative = self.chars.peek() == Some(&'-');
        if negative {
            self.bump();
        }
        let mut digits = String::new();
        while let Some(&c) = self.chars.peek() {
            if c.is_ascii_digit() {
                digits.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if digits.is_empty() {
            return Err(LexError {
                message: "expected digits after '-'".into(),
                pos: start,
            });
        }
        // Anything beyond 30 digits is out of range for every field anyway.
        if digits.len() > 30 {
            return Err(LexError {
                message: "integer literal too large".into(),
                pos: start,
            });
        }
        let value: i128 = digits.parse().expect("ascii digits");
        Ok(TokenKind::Int(if negative { -value } else { value }))
    }

    fn string(&mut self, start: Position) -> Result<TokenKind, LexError> {
        self.bump();
        let mut text = String::new();
        let mut positions = Vec::new();
        loop {
            let pos = self.pos;
            match self.chars.peek().copied() {
                None | Some('\n') => {
                    return Err(LexError {
                        message: "unterminated string".into(),
                        pos: start,
                    })
                }
                Some('"') => {
                    self.bump();
                    return Ok(TokenKind::Str(text, positions));
                }
                Some('\\') => {
                    self.bump();
                    let decoded = match self.bump() {
                        Some('"') => '"',
                        Some('\\') => '\\',
                        Some('n') => '\n',
                        Some('t') => '\t',
                        Some('r') => '\r',
                        Some('u') => self.unicode_escape(pos)?,
                        _ => {
                            return Err(LexError {
                                message: "invalid escape sequence".into(),
                                pos,
                            })
                        }
                    };
                    text.push(decoded);
                    positions.push(pos);
                }
                Some(c) => {
                    self.bump();
                    text.push(c);
                    positions.push(pos);
                }
            }
        }
    }

    /// `\u{XXXX}` with 1 to 6 hex digits.
    fn unicode_escape(&mut self, pos: Position) -> Result<char, LexError> {
        let err = || LexError {
            message: "invalid unicode escape, expected \\u{XXXX}".into(),
            pos,
        };
        if self.bump() != Some('{') {
            return Err(err());
        }
        let mut hex = String::new();
        loop {
            match self.bump() {
                Some('}') => break,
                Some(c) if c.is_ascii_hexdigit() && hex.len() < 6 => hex.push(c),
                _ => return Err(err()),
            }
        }
        u32::from_str_radix(&hex, 16)
            .ok()
            .and_then(char::from_u32)
            .ok_or_else(err)
    }
}
