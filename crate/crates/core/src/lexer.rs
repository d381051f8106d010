//! A small, total lexer for Python-like notebook code.
//!
//! Notebook cells are often fragments that no real parser accepts, so this
//! lexer never fails: unknown bytes become [`TokenKind::Other`] and an
//! unterminated string simply runs to the end of its line (or of the cell,
//! for triple-quoted strings).

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Name,
    Number,
    /// A string literal. `body` holds the text between the quotes.
    Str { body: String },
    /// A `#` comment. `text` excludes the leading `#` run.
    Comment { text: String },
    /// Single-character or compound operator / punctuation.
    Op,
    /// End of a logical line (only emitted outside brackets).
    Newline,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Raw source slice of the token.
    pub text: String,
}

impl Token {
    pub fn is_op(&self, op: &str) -> bool {
        self.kind == TokenKind::Op && self.text == op
    }

    pub fn is_name(&self, name: &str) -> bool {
        self.kind == TokenKind::Name && self.text == name
    }
}

const THREE_CHAR_OPS: &[&str] = &["**=", "//=", ">>=", "<<=", "..."];
const TWO_CHAR_OPS: &[&str] = &[
    "==", "!=", "<=", ">=", "->", ":=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "@=", "**",
    "//", "<<", ">>",
];

pub const KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue",
    "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import",
    "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while",
    "with", "yield",
];

pub fn is_keyword(name: &str) -> bool {
    KEYWORDS.contains(&name)
}

fn is_ident_start(c: char) -> bool {
    c == '_' || c.is_alphabetic()
}

fn is_ident_continue(c: char) -> bool {
    c == '_' || c.is_alphanumeric()
}

/// Length (in chars) of a string prefix such as `r`, `b`, `f`, `rb`, `Rf`
/// starting at `i`, if it is immediately followed by a quote.
fn string_prefix_len(chars: &[char], i: usize) -> Option<usize> {
    let mut n = 0;
    while n < 2 && i + n < chars.len() && "rRbBuUfF".contains(chars[i + n]) {
        n += 1;
    }
    if n == 0 || i + n >= chars.len() || !matches!(chars[i + n], '\'' | '"') {
        return None;
    }
    let prefix: String = chars[i..i + n].iter().collect::<String>().to_ascii_lowercase();
    matches!(
        prefix.as_str(),
        "r" | "b" | "u" | "f" | "rb" | "br" | "fr" | "rf"
    )
    .then_some(n)
}

pub fn tokenize(source: &str) -> Vec<Token> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let mut depth: usize = 0;
    let mut i = 0;
    let mut at_line_start = true;

    let push = |tokens: &mut Vec<Token>, kind: TokenKind, start: usize, end: usize| {
        tokens.push(Token { kind, text: chars[start..end].iter().collect() });
    };

    while i < chars.len() {
        let c = chars[i];

        if c == '\n' {
            if depth == 0 && !matches!(tokens.last(), None | Some(Token { kind: TokenKind::Newline, .. }))
            {
                push(&mut tokens, TokenKind::Newline, i, i + 1);
            }
            i += 1;
            at_line_start = true;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        // IPython magics and shell escapes occupy the whole line.
        if at_line_start && depth == 0 && (c == '%' || c == '!') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        at_line_start = false;

        if c == '\\' && chars.get(i + 1) == Some(&'\n') {
            i += 2;
            continue;
        }

        if c == '#' {
            let start = i;
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            let raw: String = chars[start..i].iter().collect();
            let text = raw.trim_start_matches('#').trim().to_string();
            tokens.push(Token { kind: TokenKind::Comment { text }, text: raw });
            continue;
        }

        let prefix = if is_ident_start(c) { string_prefix_len(&chars, i) } else { None };
        if c == '\'' || c == '"' || prefix.is_some() {
            let start = i;
            let plen = prefix.unwrap_or(0);
            let raw_mode = chars[i..i + plen].iter().any(|p| *p == 'r' || *p == 'R');
            i += plen;
            let quote = chars[i];
            let triple = chars.get(i + 1) == Some(&quote) && chars.get(i + 2) == Some(&quote);
            let qlen = if triple { 3 } else { 1 };
            i += qlen;
            let body_start = i;
            let mut body_end = chars.len();
            while i < chars.len() {
                let ch = chars[i];
                if ch == '\\' && !raw_mode {
                    i += 2;
                    continue;
                }
                if ch == '\\' && raw_mode {
                    // raw strings still cannot end on an escaped quote
                    i += if chars.get(i + 1) == Some(&quote) { 2 } else { 1 };
                    continue;
                }
                if !triple && ch == '\n' {
                    body_end = i;
                    break;
                }
                if ch == quote
                    && (!triple
                        || (chars.get(i + 1) == Some(&quote) && chars.get(i + 2) == Some(&quote)))
                {
                    body_end = i;
                    i += qlen;
                    break;
                }
                i += 1;
            }
            let i_end = i.min(chars.len());
            let body_end = body_end.min(chars.len()).max(body_start);
            let body: String = chars[body_start..body_end].iter().collect();
            push(&mut tokens, TokenKind::Str { body }, start, i_end);
            i = i_end;
            continue;
        }

        if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_continue(chars[i]) {
                i += 1;
            }
            push(&mut tokens, TokenKind::Name, start, i);
            continue;
        }

        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() {
                let ch = chars[i];
                // A sign continues the literal only as a decimal exponent (1e-3, not 0xe-1).
                let exponent_sign = (ch == '+' || ch == '-')
                    && matches!(chars[i - 1], 'e' | 'E')
                    && !chars[start..i].iter().any(|x| matches!(x, 'x' | 'X'));
                if ch.is_ascii_alphanumeric() || ch == '_' || ch == '.' || exponent_sign {
                    i += 1;
                } else {
                    break;
                }
            }
            push(&mut tokens, TokenKind::Number, start, i);
            continue;
        }

        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        if let Some(op) = THREE_CHAR_OPS.iter().find(|op| rest.starts_with(**op)) {
            push(&mut tokens, TokenKind::Op, i, i + op.len());
            i += op.len();
            continue;
        }
        if let Some(op) = TWO_CHAR_OPS.iter().find(|op| rest.starts_with(**op)) {
            push(&mut tokens, TokenKind::Op, i, i + op.len());
            i += op.len();
            continue;
        }
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth = depth.saturating_sub(1),
            _ => {}
        }
        let kind = if c.is_ascii_punctuation() { TokenKind::Op } else { TokenKind::Other };
        push(&mut tokens, kind, i, i + 1);
        i += 1;
    }
    if !matches!(tokens.last(), None | Some(Token { kind: TokenKind::Newline, .. })) {
        tokens.push(Token { kind: TokenKind::Newline, text: String::new() });
    }
    tokens
}
