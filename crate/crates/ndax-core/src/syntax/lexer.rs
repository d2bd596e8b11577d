//! Tokenizer for theory, program, and mapping sources.

use crate::error::{Diagnostic, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Dot,
    Question,
    Star,
    Amp,
    Pipe,
    PipePipe,
    Bang,
    Arrow,
    Iff,
    Eq,
    Neq,
    Theory,
    Sort,
    Updates,
    Fluent,
    Action,
    Reactions,
    Subset,
    Of,
    Where,
    Ssa,
    Init,
    Closed,
    Open,
    Mapping,
    From,
    To,
    Agent,
    System,
    Program,
    Over,
    Pi,
    If,
    Then,
    Else,
    Endif,
    While,
    Do,
    Endwhile,
    Nil,
    Exists,
    Forall,
    True,
    False,
    In,
    PossAg,
    Eof,
}

impl TokenKind {
    pub fn describe(self) -> &'static str {
        match self {
            TokenKind::Ident => "identifier",
            TokenKind::LBrace => "'{'",
            TokenKind::RBrace => "'}'",
            TokenKind::LParen => "'('",
            TokenKind::RParen => "')'",
            TokenKind::LBracket => "'['",
            TokenKind::RBracket => "']'",
            TokenKind::Comma => "','",
            TokenKind::Semi => "';'",
            TokenKind::Colon => "':'",
            TokenKind::Dot => "'.'",
            TokenKind::Question => "'?'",
            TokenKind::Star => "'*'",
            TokenKind::Amp => "'&'",
            TokenKind::Pipe => "'|'",
            TokenKind::PipePipe => "'||'",
            TokenKind::Bang => "'!'",
            TokenKind::Arrow => "'->'",
            TokenKind::Iff => "'<->'",
            TokenKind::Eq => "'='",
            TokenKind::Neq => "'!='",
            TokenKind::Theory => "'theory'",
            TokenKind::Sort => "'sort'",
            TokenKind::Updates => "'updates'",
            TokenKind::Fluent => "'fluent'",
            TokenKind::Action => "'action'",
            TokenKind::Reactions => "'reactions'",
            TokenKind::Subset => "'subset'",
            TokenKind::Of => "'of'",
            TokenKind::Where => "'where'",
            TokenKind::Ssa => "'ssa'",
            TokenKind::Init => "'init'",
            TokenKind::Closed => "'closed'",
            TokenKind::Open => "'open'",
            TokenKind::Mapping => "'mapping'",
            TokenKind::From => "'from'",
            TokenKind::To => "'to'",
            TokenKind::Agent => "'agent'",
            TokenKind::System => "'system'",
            TokenKind::Program => "'program'",
            TokenKind::Over => "'over'",
            TokenKind::Pi => "'pi'",
            TokenKind::If => "'if'",
            TokenKind::Then => "'then'",
            TokenKind::Else => "'else'",
            TokenKind::Endif => "'endif'",
            TokenKind::While => "'while'",
            TokenKind::Do => "'do'",
            TokenKind::Endwhile => "'endwhile'",
            TokenKind::Nil => "'nil'",
            TokenKind::Exists => "'exists'",
            TokenKind::Forall => "'forall'",
            TokenKind::True => "'true'",
            TokenKind::False => "'false'",
            TokenKind::In => "'in'",
            TokenKind::PossAg => "'poss_ag'",
            TokenKind::Eof => "end of input",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: u32,
    pub col: u32,
}

fn keyword(word: &str) -> Option<TokenKind> {
    Some(match word {
        "theory" => TokenKind::Theory,
        "sort" => TokenKind::Sort,
        "updates" => TokenKind::Updates,
        "fluent" => TokenKind::Fluent,
        "action" => TokenKind::Action,
        "reactions" => TokenKind::Reactions,
        "subset" => TokenKind::Subset,
        "of" => TokenKind::Of,
        "where" => TokenKind::Where,
        "ssa" => TokenKind::Ssa,
        "init" => TokenKind::Init,
        "closed" => TokenKind::Closed,
        "open" => TokenKind::Open,
        "mapping" => TokenKind::Mapping,
        "from" => TokenKind::From,
        "to" => TokenKind::To,
        "agent" => TokenKind::Agent,
        "system" => TokenKind::System,
        "program" => TokenKind::Program,
        "over" => TokenKind::Over,
        "pi" => TokenKind::Pi,
        "if" => TokenKind::If,
        "then" => TokenKind::Then,
        "else" => TokenKind::Else,
        "endif" => TokenKind::Endif,
        "while" => TokenKind::While,
        "do" => TokenKind::Do,
        "endwhile" => TokenKind::Endwhile,
        "nil" => TokenKind::Nil,
        "exists" => TokenKind::Exists,
        "forall" => TokenKind::Forall,
        "true" => TokenKind::True,
        "false" => TokenKind::False,
        "in" => TokenKind::In,
        "poss_ag" => TokenKind::PossAg,
        _ => return None,
    })
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits a source document into tokens, failing on the first character
/// that fits nowhere.
pub fn tokenize(src: &str, origin: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut chars = src.chars().peekable();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let fail = |line: u32, col: u32, message: String, hint: Option<&str>| {
        Err(Error::Parse {
            origin: origin.to_string(),
            diagnostics: vec![Diagnostic {
                line,
                col,
                message,
                hint: hint.map(str::to_string),
            }],
        })
    };
    while let Some(c) = chars.next() {
        let (tok_line, tok_col) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            continue;
        }
        col += 1;
        if c.is_whitespace() {
            continue;
        }
        if c == '/' {
            if chars.peek() == Some(&'/') {
                while let Some(&p) = chars.peek() {
                    if p == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
                continue;
            }
            return fail(tok_line, tok_col, "unexpected '/'".to_string(), Some("comments start with //"));
        }
        if is_ident_char(c) {
            let mut word = String::new();
            word.push(c);
            while let Some(&p) = chars.peek() {
                if !is_ident_char(p) {
                    break;
                }
                word.push(p);
                chars.next();
                col += 1;
            }
            let kind = keyword(&word).unwrap_or(TokenKind::Ident);
            tokens.push(Token { kind, text: word, line: tok_line, col: tok_col });
            continue;
        }
        let mut push = |kind: TokenKind, text: &str| {
            tokens.push(Token {
                kind,
                text: text.to_string(),
                line: tok_line,
                col: tok_col,
            });
        };
        match c {
            '{' => push(TokenKind::LBrace, "{"),
            '}' => push(TokenKind::RBrace, "}"),
            '(' => push(TokenKind::LParen, "("),
            ')' => push(TokenKind::RParen, ")"),
            '[' => push(TokenKind::LBracket, "["),
            ']' => push(TokenKind::RBracket, "]"),
            ',' => push(TokenKind::Comma, ","),
            ';' => push(TokenKind::Semi, ";"),
            ':' => push(TokenKind::Colon, ":"),
            '.' => push(TokenKind::Dot, "."),
            '?' => push(TokenKind::Question, "?"),
            '*' => push(TokenKind::Star, "*"),
            '&' => push(TokenKind::Amp, "&"),
            '=' => push(TokenKind::Eq, "="),
            '|' => {
                if chars.peek() == Some(&'|') {
                    chars.next();
                    col += 1;
                    push(TokenKind::PipePipe, "||");
                } else {
                    push(TokenKind::Pipe, "|");
                }
            }
            '!' => {
                if chars.peek() == Some(&'=') {
                    chars.next();
                    col += 1;
                    push(TokenKind::Neq, "!=");
                } else {
                    push(TokenKind::Bang, "!");
                }
            }
            '-' => {
                if chars.peek() == Some(&'>') {
                    chars.next();
                    col += 1;
                    push(TokenKind::Arrow, "->");
                } else {
                    return fail(tok_line, tok_col, "unexpected '-'".to_string(), Some("did you mean '->'?"));
                }
            }
            '<' => {
                if chars.peek() == Some(&'-') {
                    chars.next();
                    col += 1;
                    if chars.peek() == Some(&'>') {
                        chars.next();
                        col += 1;
                        push(TokenKind::Iff, "<->");
                    } else {
                        return fail(tok_line, tok_col, "unexpected '<-'".to_string(), Some("did you mean '<->'?"));
                    }
                } else {
                    return fail(tok_line, tok_col, "unexpected '<'".to_string(), Some("did you mean '<->'?"));
                }
            }
            other => {
                return fail(tok_line, tok_col, format!("unexpected character '{other}'"), None);
            }
        }
    }
    tokens.push(Token { kind: TokenKind::Eof, text: String::new(), line, col });
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src, "test").unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn punctuation_and_compounds() {
        assert_eq!(
            kinds("-> <-> != ! | || = * ?"),
            vec![
                TokenKind::Arrow,
                TokenKind::Iff,
                TokenKind::Neq,
                TokenKind::Bang,
                TokenKind::Pipe,
                TokenKind::PipePipe,
                TokenKind::Eq,
                TokenKind::Star,
                TokenKind::Question,
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn keywords_and_identifiers() {
        let toks = tokenize("theory tire_ll { fluent At_LL(11); }", "test").unwrap();
        assert_eq!(toks[0].kind, TokenKind::Theory);
        assert_eq!(toks[1].kind, TokenKind::Ident);
        assert_eq!(toks[1].text, "tire_ll");
        assert_eq!(toks[4].text, "At_LL");
        assert_eq!(toks[6].text, "11");
        assert_eq!(toks[6].kind, TokenKind::Ident);
    }

    #[test]
    fn comments_and_positions() {
        let toks = tokenize("sort // everything after is skipped\n  loc", "test").unwrap();
        assert_eq!(toks[0].kind, TokenKind::Sort);
        assert_eq!(toks[1].text, "loc");
        assert_eq!(toks[1].line, 2);
        assert_eq!(toks[1].col, 3);
    }

    #[test]
    fn stray_characters_are_rejected() {
        let err = tokenize("sort $x", "bad.ndt").unwrap_err();
        match err {
            Error::Parse { origin, diagnostics } => {
                assert_eq!(origin, "bad.ndt");
                assert_eq!(diagnostics[0].line, 1);
                assert_eq!(diagnostics[0].col, 6);
            }
            other => panic!("unexpected error {other}"),
        }
    }
}
