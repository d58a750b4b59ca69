//! Per-line tokenizer. Every token remembers its 1-based column.

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Word(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Semi,
    Eq,
    Neq,
    Assign,
    Arrow,
    Bar,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Neq => "`!=`".into(),
            Tok::Assign => "`:=`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Bar => "`|`".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub col: usize,
    pub message: String,
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Tokenizes one line, stopping at a `#` comment. A `-` joins a word only
/// when it sits between two word characters (`feasible-guard`).
pub fn lex_line(line: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if is_word_char(c) {
            let start = i;
            while i < chars.len() {
                let hyphen_inside = chars[i] == '-' && i > start && i + 1 < chars.len() && is_word_char(chars[i + 1]);
                if is_word_char(chars[i]) || hyphen_inside {
                    i += 1;
                } else {
                    break;
                }
            }
            let word: String = chars[start..i].iter().collect();
            out.push(Token {
                tok: Tok::Word(word),
                col,
            });
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            ('!', Some('=')) => (Tok::Neq, 2),
            (':', Some('=')) => (Tok::Assign, 2),
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            (',', _) => (Tok::Comma, 1),
            (':', _) => (Tok::Colon, 1),
            (';', _) => (Tok::Semi, 1),
            ('=', _) => (Tok::Eq, 1),
            ('|', _) => (Tok::Bar, 1),
            _ => {
                return Err(LexError {
                    col,
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        out.push(Token { tok, col });
        i += len;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex_line(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn hyphenated_keyword_is_one_word() {
        assert_eq!(
            toks("feasible-guard a(X) uses p(X)")[0],
            Tok::Word("feasible-guard".into())
        );
    }

    #[test]
    fn arrow_and_operators() {
        assert_eq!(
            toks("x->y := != = :"),
            vec![
                Tok::Word("x".into()),
                Tok::Arrow,
                Tok::Word("y".into()),
                Tok::Assign,
                Tok::Neq,
                Tok::Eq,
                Tok::Colon
            ]
        );
    }

    #[test]
    fn comment_stops_line() {
        assert_eq!(toks("sort a = { b } # trailing"), toks("sort a = { b }"));
    }

    #[test]
    fn bad_character_reports_column() {
        let err = lex_line("fluent f$").unwrap_err();
        assert_eq!(err.col, 9);
    }
}
