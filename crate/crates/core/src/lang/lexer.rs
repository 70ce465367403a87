use super::LangError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    /// Numeric literal as written: `12`, `0.4`, `.5`, or `1/100000` when the
    /// slash is not surrounded by whitespace.
    Number(String),
    Sym(&'static str),
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const SYMBOLS: &[&str] = &[
    "<=", ">=", "(", ")", "{", "}", ",", ";", "|", "&", "!", "=", "<", ">", "+", "-", "*", "/",
];

pub(crate) fn lex(src: &str) -> Result<Vec<Token>, LangError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start_col = col;
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(s),
                line,
                col: start_col,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = i;
            i = scan_decimal(&chars, i);
            if i < chars.len()
                && chars[i] == '/'
                && chars
                    .get(i + 1)
                    .is_some_and(|d| d.is_ascii_digit() || *d == '.')
            {
                let after = scan_decimal(&chars, i + 1);
                if after > i + 1 {
                    i = after;
                }
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Number(s),
                line,
                col: start_col,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                i += sym.len();
                col += sym.len();
                out.push(Token {
                    tok: Tok::Sym(sym),
                    line,
                    col: start_col,
                });
            }
            None => {
                return Err(LangError::Syntax {
                    line,
                    col,
                    message: format!("unexpected character `{c}`"),
                    expected: Vec::new(),
                })
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

fn scan_decimal(chars: &[char], mut i: usize) -> usize {
    while i < chars.len() && chars[i].is_ascii_digit() {
        i += 1;
    }
    if i < chars.len() && chars[i] == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
        i += 1;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
    }
    i
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn fractions_without_spaces_are_one_literal() {
        assert_eq!(
            toks("P(x) = 1/100000;"),
            vec![
                Tok::Ident("P".into()),
                Tok::Sym("("),
                Tok::Ident("x".into()),
                Tok::Sym(")"),
                Tok::Sym("="),
                Tok::Number("1/100000".into()),
                Tok::Sym(";"),
                Tok::Eof
            ]
        );
        assert_eq!(
            toks("1 / 2"),
            vec![
                Tok::Number("1".into()),
                Tok::Sym("/"),
                Tok::Number("2".into()),
                Tok::Eof
            ]
        );
        assert_eq!(
            toks(".5 0.25"),
            vec![
                Tok::Number(".5".into()),
                Tok::Number("0.25".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_positions() {
        let ts = lex("# header\n  event a; # trailing\n<=").unwrap();
        assert_eq!(ts[0].tok, Tok::Ident("event".into()));
        assert_eq!((ts[0].line, ts[0].col), (2, 3));
        assert_eq!(ts[3].tok, Tok::Sym("<="));
        assert_eq!((ts[3].line, ts[3].col), (3, 1));
    }

    #[test]
    fn unexpected_character() {
        let err = lex("event a;\n  @").unwrap_err();
        assert!(matches!(
            err,
            LangError::Syntax {
                line: 2,
                col: 3,
                ..
            }
        ));
    }
}
