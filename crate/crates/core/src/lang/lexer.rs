use super::ast::Line;
use super::LangError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Int(i64),
    Char(char),
    Ident(String),
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: Line,
}

const PUNCTS: &[&str] = &[
    "&&", "||", "==", "!=", "<=", ">=", "++", "--", "+=", "-=", "*=", "(", ")", "{", "}", "[", "]",
    ";", ",", ".", "+", "-", "*", "/", "%", "<", ">", "=", "!",
];

pub fn lex(src: &str) -> Result<Vec<Token>, LangError> {
    let bytes: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut line: Line = 1;
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c == '\n' {
            line += 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '/' && bytes.get(i + 1) == Some(&'/') {
            while i < bytes.len() && bytes[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '/' && bytes.get(i + 1) == Some(&'*') {
            i += 2;
            while i < bytes.len() && !(bytes[i] == '*' && bytes.get(i + 1) == Some(&'/')) {
                if bytes[i] == '\n' {
                    line += 1;
                }
                i += 1;
            }
            if i >= bytes.len() {
                return Err(LangError::Parse {
                    line,
                    message: "unterminated block comment".into(),
                });
            }
            i += 2;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = bytes[start..i].iter().collect();
            let n = text.parse::<i64>().map_err(|_| LangError::Parse {
                line,
                message: format!("integer literal out of range: {text}"),
            })?;
            out.push(Token {
                tok: Tok::Int(n),
                line,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_alphanumeric() || bytes[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(bytes[start..i].iter().collect()),
                line,
            });
            continue;
        }
        if c == '\'' {
            let (ch, len) = match (bytes.get(i + 1), bytes.get(i + 2), bytes.get(i + 3)) {
                (Some('\\'), Some(e), Some('\'')) => {
                    let ch = match e {
                        'n' => '\n',
                        't' => '\t',
                        '0' => '\0',
                        '\\' => '\\',
                        '\'' => '\'',
                        other => {
                            return Err(LangError::Parse {
                                line,
                                message: format!("unknown escape \\{other}"),
                            })
                        }
                    };
                    (ch, 4)
                }
                (Some(ch), Some('\''), _) if *ch != '\\' => (*ch, 3),
                _ => {
                    return Err(LangError::Parse {
                        line,
                        message: "malformed char literal".into(),
                    })
                }
            };
            out.push(Token {
                tok: Tok::Char(ch),
                line,
            });
            i += len;
            continue;
        }
        let rest: String = bytes[i..bytes.len().min(i + 2)].iter().collect();
        match PUNCTS.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                out.push(Token {
                    tok: Tok::Punct(p),
                    line,
                });
                i += p.len();
            }
            None => {
                return Err(LangError::Parse {
                    line,
                    message: format!("unexpected character '{c}'"),
                })
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
    });
    Ok(out)
}
