//! Recursive-descent parser for the surface language.
//!
//! Formula connectives bind loosest to tightest as `<->`, `->`, `|`, `&`,
//! `!`; quantifiers extend as far right as possible. Program operators bind
//! loosest to tightest as `|`, `||`, `;`, postfix `*`. A parenthesized
//! element is a test exactly when a `?` follows it at bracket depth zero.

use crate::error::{Diagnostic, Error, Result};
use crate::syntax::ast::*;
use crate::syntax::lexer::{tokenize, Token, TokenKind};

pub fn parse_theory(src: &str, origin: &str) -> Result<TheoryDoc> {
    let mut parser = Parser::new(src, origin)?;
    let doc = parser.theory_doc()?;
    parser.expect(TokenKind::Eof)?;
    Ok(doc)
}

pub fn parse_mapping(src: &str, origin: &str) -> Result<MappingDoc> {
    let mut parser = Parser::new(src, origin)?;
    let doc = parser.mapping_doc()?;
    parser.expect(TokenKind::Eof)?;
    Ok(doc)
}

/// Parses a bare formula, as supplied for goals and queries.
pub fn parse_formula_str(src: &str, origin: &str) -> Result<FormulaAst> {
    let mut parser = Parser::new(src, origin)?;
    let formula = parser.formula()?;
    parser.expect(TokenKind::Eof)?;
    Ok(formula)
}

pub fn parse_programs(src: &str, origin: &str) -> Result<Vec<ProgramDoc>> {
    let mut parser = Parser::new(src, origin)?;
    let mut docs = Vec::new();
    while parser.peek().kind != TokenKind::Eof {
        docs.push(parser.program_doc()?);
    }
    if docs.is_empty() {
        return Err(parser.error_here("expected a program document", None));
    }
    Ok(docs)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    origin: String,
}

impl Parser {
    fn new(src: &str, origin: &str) -> Result<Parser> {
        Ok(Parser {
            tokens: tokenize(src, origin)?,
            pos: 0,
            origin: origin.to_string(),
        })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_kind_at(&self, offset: usize) -> TokenKind {
        self.tokens
            .get(self.pos + offset)
            .map(|t| t.kind)
            .unwrap_or(TokenKind::Eof)
    }

    fn advance(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn eat(&mut self, kind: TokenKind) -> bool {
        if self.peek().kind == kind {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<Token> {
        if self.peek().kind == kind {
            Ok(self.advance())
        } else {
            let found = self.peek().kind.describe();
            Err(self.error_here(&format!("expected {}, found {found}", kind.describe()), None))
        }
    }

    fn error_here(&self, message: &str, hint: Option<&str>) -> Error {
        let tok = self.peek();
        Error::Parse {
            origin: self.origin.clone(),
            diagnostics: vec![Diagnostic {
                line: tok.line,
                col: tok.col,
                message: message.to_string(),
                hint: hint.map(str::to_string),
            }],
        }
    }

    fn span_here(&self) -> Span {
        let tok = self.peek();
        Span { line: tok.line, col: tok.col }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Span)> {
        if self.peek().kind != TokenKind::Ident {
            let found = self.peek().kind.describe();
            return Err(self.error_here(&format!("expected {what}, found {found}"), None));
        }
        let tok = self.advance();
        Ok((tok.text, Span { line: tok.line, col: tok.col }))
    }

    fn term(&mut self) -> Result<TermAst> {
        let (name, span) = self.ident("a term")?;
        Ok(TermAst { name, span })
    }

    fn term_list(&mut self) -> Result<Vec<TermAst>> {
        let mut terms = vec![self.term()?];
        while self.eat(TokenKind::Comma) {
            terms.push(self.term()?);
        }
        Ok(terms)
    }

    fn ident_list(&mut self) -> Result<Vec<String>> {
        let mut names = vec![self.ident("a name")?.0];
        while self.eat(TokenKind::Comma) {
            names.push(self.ident("a name")?.0);
        }
        Ok(names)
    }

    // ---------------------------------------------------------- theories

    fn theory_doc(&mut self) -> Result<TheoryDoc> {
        let span = self.span_here();
        self.expect(TokenKind::Theory)?;
        let (name, _) = self.ident("a theory name")?;
        self.expect(TokenKind::LBrace)?;
        let mut doc = TheoryDoc {
            name,
            sorts: Vec::new(),
            updates: Vec::new(),
            fluents: Vec::new(),
            actions: Vec::new(),
            ssas: Vec::new(),
            init: InitBlock::default(),
            span,
        };
        let mut saw_init = false;
        loop {
            match self.peek().kind {
                TokenKind::Sort => doc.sorts.push(self.sort_decl()?),
                TokenKind::Updates => doc.updates.push(self.updates_decl()?),
                TokenKind::Fluent => doc.fluents.push(self.fluent_decl()?),
                TokenKind::Action => doc.actions.push(self.action_decl()?),
                TokenKind::Ssa => doc.ssas.push(self.ssa_decl()?),
                TokenKind::Init => {
                    if saw_init {
                        return Err(self.error_here("duplicate init block", None));
                    }
                    saw_init = true;
                    doc.init = self.init_block()?;
                }
                TokenKind::RBrace => {
                    self.advance();
                    return Ok(doc);
                }
                _ => {
                    return Err(self.error_here(
                        "expected a sort, updates, fluent, action, ssa, or init declaration",
                        None,
                    ))
                }
            }
        }
    }

    fn sort_decl(&mut self) -> Result<SortDecl> {
        let span = self.span_here();
        self.expect(TokenKind::Sort)?;
        let (name, _) = self.ident("a sort name")?;
        self.expect(TokenKind::Eq)?;
        self.expect(TokenKind::LBrace)?;
        let objects = self.ident_list()?;
        self.expect(TokenKind::RBrace)?;
        self.expect(TokenKind::Semi)?;
        Ok(SortDecl { name, objects, span })
    }

    fn updates_decl(&mut self) -> Result<UpdatesDecl> {
        let span = self.span_here();
        self.expect(TokenKind::Updates)?;
        let (name, _) = self.ident("an update family name")?;
        self.expect(TokenKind::LParen)?;
        let param_sorts = if self.peek().kind == TokenKind::RParen {
            Vec::new()
        } else {
            self.ident_list()?
        };
        self.expect(TokenKind::RParen)?;
        self.expect(TokenKind::Semi)?;
        Ok(UpdatesDecl { name, param_sorts, span })
    }

    fn fluent_decl(&mut self) -> Result<FluentDecl> {
        let span = self.span_here();
        self.expect(TokenKind::Fluent)?;
        let (name, _) = self.ident("a fluent name")?;
        let param_sorts = if self.eat(TokenKind::LParen) {
            let sorts = if self.peek().kind == TokenKind::RParen {
                Vec::new()
            } else {
                self.ident_list()?
            };
            self.expect(TokenKind::RParen)?;
            sorts
        } else {
            Vec::new()
        };
        self.expect(TokenKind::Semi)?;
        Ok(FluentDecl { name, param_sorts, span })
    }

    fn typed_params(&mut self) -> Result<Vec<(String, String)>> {
        self.expect(TokenKind::LParen)?;
        let mut params = Vec::new();
        if self.peek().kind != TokenKind::RParen {
            loop {
                let (var, _) = self.ident("a parameter name")?;
                self.expect(TokenKind::Colon)?;
                let (sort, _) = self.ident("a sort name")?;
                params.push((var, sort));
                if !self.eat(TokenKind::Comma) {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen)?;
        Ok(params)
    }

    fn action_decl(&mut self) -> Result<ActionDecl> {
        let span = self.span_here();
        self.expect(TokenKind::Action)?;
        let (name, _) = self.ident("an action name")?;
        let params = self.typed_params()?;
        self.expect(TokenKind::Reactions)?;
        let (reaction_var, _) = self.ident("a reaction variable")?;
        let reactions = if self.eat(TokenKind::In) {
            self.expect(TokenKind::LBrace)?;
            let tokens = self.ident_list()?;
            self.expect(TokenKind::RBrace)?;
            ReactionDecl::Tokens(tokens)
        } else if self.eat(TokenKind::Subset) {
            self.expect(TokenKind::Of)?;
            self.expect(TokenKind::LBrace)?;
            let mut patterns = vec![self.update_pattern()?];
            while self.eat(TokenKind::Comma) {
                patterns.push(self.update_pattern()?);
            }
            let mut binders = Vec::new();
            if self.eat(TokenKind::Where) {
                loop {
                    let (var, _) = self.ident("a binder name")?;
                    self.expect(TokenKind::Colon)?;
                    let (sort, _) = self.ident("a sort name")?;
                    binders.push((var, sort));
                    if !self.eat(TokenKind::Comma) {
                        break;
                    }
                }
            }
            self.expect(TokenKind::RBrace)?;
            ReactionDecl::Subsets { patterns, binders }
        } else {
            return Err(self.error_here(
                "expected 'in { .. }' or 'subset of { .. }' after the reaction variable",
                None,
            ));
        };
        self.expect(TokenKind::LBrace)?;
        self.expect(TokenKind::PossAg)?;
        self.expect(TokenKind::Colon)?;
        let poss_ag = self.formula()?;
        self.expect(TokenKind::Semi)?;
        let (keyword, _) = self.ident("'poss'")?;
        if keyword != "poss" {
            return Err(self.error_here("expected 'poss' after the poss_ag clause", None));
        }
        self.expect(TokenKind::Colon)?;
        let poss = self.formula()?;
        self.expect(TokenKind::Semi)?;
        self.expect(TokenKind::RBrace)?;
        Ok(ActionDecl { name, params, reaction_var, reactions, poss_ag, poss, span })
    }

    fn update_pattern(&mut self) -> Result<UpdatePatAst> {
        let (family, span) = self.ident("an update family")?;
        let args = if self.eat(TokenKind::LParen) {
            let args = if self.peek().kind == TokenKind::RParen {
                Vec::new()
            } else {
                self.term_list()?
            };
            self.expect(TokenKind::RParen)?;
            args
        } else {
            Vec::new()
        };
        Ok(UpdatePatAst { family, args, span })
    }

    fn ssa_decl(&mut self) -> Result<SsaDecl> {
        let span = self.span_here();
        self.expect(TokenKind::Ssa)?;
        let (fluent, _) = self.ident("a fluent name")?;
        let params = if self.eat(TokenKind::LParen) {
            let params = if self.peek().kind == TokenKind::RParen {
                Vec::new()
            } else {
                self.ident_list()?
            };
            self.expect(TokenKind::RParen)?;
            params
        } else {
            Vec::new()
        };
        self.expect(TokenKind::Colon)?;
        let body = self.formula()?;
        self.expect(TokenKind::Semi)?;
        Ok(SsaDecl { fluent, params, body, span })
    }

    fn init_block(&mut self) -> Result<InitBlock> {
        self.expect(TokenKind::Init)?;
        self.expect(TokenKind::LBrace)?;
        let mut block = InitBlock::default();
        let mut saw_closed = false;
        let mut saw_open = false;
        loop {
            match self.peek().kind {
                TokenKind::Closed | TokenKind::Open => {
                    let which = self.advance().kind;
                    let seen = if which == TokenKind::Closed { &mut saw_closed } else { &mut saw_open };
                    if *seen {
                        return Err(self.error_here("duplicate init clause", None));
                    }
                    *seen = true;
                    self.expect(TokenKind::Colon)?;
                    let mut atoms = Vec::new();
                    if self.peek().kind != TokenKind::Semi {
                        atoms.push(self.ground_atom()?);
                        while self.eat(TokenKind::Comma) {
                            atoms.push(self.ground_atom()?);
                        }
                    }
                    self.expect(TokenKind::Semi)?;
                    if which == TokenKind::Closed {
                        block.closed = atoms;
                    } else {
                        block.open = atoms;
                    }
                }
                TokenKind::RBrace => {
                    self.advance();
                    return Ok(block);
                }
                _ => return Err(self.error_here("expected 'closed:', 'open:', or '}'", None)),
            }
        }
    }

    fn ground_atom(&mut self) -> Result<GroundAtomAst> {
        let (fluent, span) = self.ident("a fluent name")?;
        let args = if self.eat(TokenKind::LParen) {
            let args = if self.peek().kind == TokenKind::RParen {
                Vec::new()
            } else {
                self.ident_list()?
            };
            self.expect(TokenKind::RParen)?;
            args
        } else {
            Vec::new()
        };
        Ok(GroundAtomAst { fluent, args, span })
    }

    // ---------------------------------------------------------- formulas

    fn formula(&mut self) -> Result<FormulaAst> {
        let mut left = self.formula_implies()?;
        while self.eat(TokenKind::Iff) {
            let right = self.formula_implies()?;
            left = FormulaAst::Iff(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn formula_implies(&mut self) -> Result<FormulaAst> {
        let left = self.formula_or()?;
        if self.eat(TokenKind::Arrow) {
            let right = self.formula_implies()?;
            return Ok(FormulaAst::Implies(Box::new(left), Box::new(right)));
        }
        Ok(left)
    }

    fn formula_or(&mut self) -> Result<FormulaAst> {
        let mut left = self.formula_and()?;
        while self.eat(TokenKind::Pipe) {
            let right = self.formula_and()?;
            left = FormulaAst::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn formula_and(&mut self) -> Result<FormulaAst> {
        let mut left = self.formula_unary()?;
        while self.eat(TokenKind::Amp) {
            let right = self.formula_unary()?;
            left = FormulaAst::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn binder_list(&mut self) -> Result<Vec<(String, DomainAst)>> {
        let mut binders = Vec::new();
        loop {
            let (var, _) = self.ident("a variable name")?;
            self.expect(TokenKind::Colon)?;
            binders.push((var, self.domain()?));
            if !self.eat(TokenKind::Comma) {
                break;
            }
        }
        self.expect(TokenKind::Dot)?;
        Ok(binders)
    }

    fn domain(&mut self) -> Result<DomainAst> {
        let span = self.span_here();
        if self.eat(TokenKind::Reactions) {
            self.expect(TokenKind::LParen)?;
            let (action, _) = self.ident("an action name")?;
            self.expect(TokenKind::RParen)?;
            Ok(DomainAst::Reactions(action, span))
        } else {
            let (sort, _) = self.ident("a sort name or reactions(..)")?;
            Ok(DomainAst::Sort(sort, span))
        }
    }

    fn formula_unary(&mut self) -> Result<FormulaAst> {
        match self.peek().kind {
            TokenKind::Bang => {
                self.advance();
                Ok(FormulaAst::Not(Box::new(self.formula_unary()?)))
            }
            TokenKind::Exists => {
                let span = self.span_here();
                self.advance();
                let binders = self.binder_list()?;
                let body = self.formula()?;
                Ok(FormulaAst::Exists { binders, body: Box::new(body), span })
            }
            TokenKind::Forall => {
                let span = self.span_here();
                self.advance();
                let binders = self.binder_list()?;
                let body = self.formula()?;
                Ok(FormulaAst::Forall { binders, body: Box::new(body), span })
            }
            TokenKind::True => {
                self.advance();
                Ok(FormulaAst::True)
            }
            TokenKind::False => {
                self.advance();
                Ok(FormulaAst::False)
            }
            TokenKind::PossAg => {
                let span = self.span_here();
                self.advance();
                Ok(FormulaAst::PossAg(span))
            }
            TokenKind::LParen => {
                self.advance();
                let inner = self.formula()?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            TokenKind::Ident => self.formula_ident(),
            _ => {
                let found = self.peek().kind.describe();
                Err(self.error_here(&format!("expected a formula, found {found}"), None))
            }
        }
    }

    fn formula_ident(&mut self) -> Result<FormulaAst> {
        let (name, span) = self.ident("a name")?;
        if name == "a" && self.peek().kind == TokenKind::Eq {
            self.advance();
            let (action, _) = self.ident("an action name")?;
            self.expect(TokenKind::LParen)?;
            let args = if self.peek().kind == TokenKind::RParen {
                Vec::new()
            } else {
                self.term_list()?
            };
            self.expect(TokenKind::RParen)?;
            return Ok(FormulaAst::ActEq { action, args, span });
        }
        if self.peek().kind == TokenKind::LParen {
            self.advance();
            let args = if self.peek().kind == TokenKind::RParen {
                Vec::new()
            } else {
                self.term_list()?
            };
            self.expect(TokenKind::RParen)?;
            if self.eat(TokenKind::In) {
                let set = self.term()?;
                return Ok(FormulaAst::InSet {
                    pattern: UpdatePatAst { family: name, args, span },
                    set,
                });
            }
            return Ok(FormulaAst::Atom { name, args, span });
        }
        match self.peek().kind {
            TokenKind::Eq | TokenKind::Neq => {
                let negated = self.advance().kind == TokenKind::Neq;
                let right = self.term()?;
                Ok(FormulaAst::Eq { left: TermAst { name, span }, right, negated })
            }
            TokenKind::In => {
                self.advance();
                let set = self.term()?;
                Ok(FormulaAst::InSet {
                    pattern: UpdatePatAst { family: name, args: Vec::new(), span },
                    set,
                })
            }
            _ => Ok(FormulaAst::Atom { name, args: Vec::new(), span }),
        }
    }

    // ---------------------------------------------------------- programs

    fn program_doc(&mut self) -> Result<ProgramDoc> {
        let span = self.span_here();
        let kind = match self.peek().kind {
            TokenKind::Agent => ProgramKind::Agent,
            TokenKind::System => ProgramKind::System,
            _ => return Err(self.error_here("expected 'agent program' or 'system program'", None)),
        };
        self.advance();
        self.expect(TokenKind::Program)?;
        let (name, _) = self.ident("a program name")?;
        self.expect(TokenKind::Over)?;
        let (theory, _) = self.ident("a theory name")?;
        self.expect(TokenKind::LBrace)?;
        let body = self.program()?;
        self.eat(TokenKind::Semi);
        self.expect(TokenKind::RBrace)?;
        Ok(ProgramDoc { name, kind, theory, body, span })
    }

    pub(crate) fn program(&mut self) -> Result<ProgramAst> {
        let mut parts = vec![self.program_conc()?];
        while self.eat(TokenKind::Pipe) {
            parts.push(self.program_conc()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { ProgramAst::Choice(parts) })
    }

    fn program_conc(&mut self) -> Result<ProgramAst> {
        let mut left = self.program_seq()?;
        while self.eat(TokenKind::PipePipe) {
            let right = self.program_seq()?;
            left = ProgramAst::Conc(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn program_seq(&mut self) -> Result<ProgramAst> {
        let mut parts = vec![self.program_postfix()?];
        while self.peek().kind == TokenKind::Semi {
            if !starts_program(self.peek_kind_at(1)) {
                break;
            }
            self.advance();
            parts.push(self.program_postfix()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { ProgramAst::Seq(parts) })
    }

    fn program_postfix(&mut self) -> Result<ProgramAst> {
        let mut prog = self.program_primary()?;
        while self.eat(TokenKind::Star) {
            prog = ProgramAst::Star(Box::new(prog));
        }
        Ok(prog)
    }

    fn program_primary(&mut self) -> Result<ProgramAst> {
        let span = self.span_here();
        match self.peek().kind {
            TokenKind::Nil => {
                self.advance();
                Ok(ProgramAst::Nil)
            }
            TokenKind::Pi => {
                self.advance();
                let binders = self.binder_list()?;
                let body = self.program()?;
                Ok(ProgramAst::Pick { binders, body: Box::new(body), span })
            }
            TokenKind::If => {
                self.advance();
                let cond = self.formula()?;
                self.expect(TokenKind::Then)?;
                let then_branch = Box::new(self.program()?);
                let else_branch = if self.eat(TokenKind::Else) {
                    Some(Box::new(self.program()?))
                } else {
                    None
                };
                self.expect(TokenKind::Endif)?;
                Ok(ProgramAst::If { cond, then_branch, else_branch, span })
            }
            TokenKind::While => {
                self.advance();
                let cond = self.formula()?;
                self.expect(TokenKind::Do)?;
                let body = Box::new(self.program()?);
                self.expect(TokenKind::Endwhile)?;
                Ok(ProgramAst::While { cond, body, span })
            }
            TokenKind::LBracket => {
                self.advance();
                let inner = self.program()?;
                self.expect(TokenKind::RBracket)?;
                Ok(inner)
            }
            TokenKind::Ident
            | TokenKind::LParen
            | TokenKind::Bang
            | TokenKind::True
            | TokenKind::False
            | TokenKind::Exists
            | TokenKind::Forall => {
                if self.test_ahead() {
                    let cond = self.formula()?;
                    self.expect(TokenKind::Question)?;
                    return Ok(ProgramAst::Test(cond, span));
                }
                match self.peek().kind {
                    TokenKind::LParen => {
                        self.advance();
                        let inner = self.program()?;
                        self.expect(TokenKind::RParen)?;
                        Ok(inner)
                    }
                    TokenKind::Ident => {
                        let (name, span) = self.ident("an action name")?;
                        let args = if self.eat(TokenKind::LParen) {
                            let args = if self.peek().kind == TokenKind::RParen {
                                Vec::new()
                            } else {
                                self.term_list()?
                            };
                            self.expect(TokenKind::RParen)?;
                            args
                        } else {
                            Vec::new()
                        };
                        Ok(ProgramAst::Call { name, args, span })
                    }
                    _ => Err(self.error_here("expected a program", None)),
                }
            }
            _ => {
                let found = self.peek().kind.describe();
                Err(self.error_here(&format!("expected a program, found {found}"), None))
            }
        }
    }

    /// Looks ahead from the start of a program element to decide whether it
    /// is a test. Brackets are balanced; a `?` at depth zero settles it one
    /// way, a program separator or closer at depth zero the other.
    fn test_ahead(&self) -> bool {
        let mut depth: u32 = 0;
        let mut i = self.pos;
        loop {
            let kind = self.tokens.get(i).map(|t| t.kind).unwrap_or(TokenKind::Eof);
            match kind {
                TokenKind::LParen | TokenKind::LBracket => depth += 1,
                TokenKind::RParen | TokenKind::RBracket => {
                    if depth == 0 {
                        return false;
                    }
                    depth -= 1;
                }
                TokenKind::Question => {
                    if depth == 0 {
                        return true;
                    }
                }
                TokenKind::Semi
                | TokenKind::Pipe
                | TokenKind::PipePipe
                | TokenKind::Star
                | TokenKind::RBrace
                | TokenKind::Then
                | TokenKind::Else
                | TokenKind::Endif
                | TokenKind::Do
                | TokenKind::Endwhile
                | TokenKind::Agent
                | TokenKind::System
                | TokenKind::Fluent
                | TokenKind::Action
                | TokenKind::Eof => {
                    if depth == 0 {
                        return false;
                    }
                }
                _ => {}
            }
            if kind == TokenKind::Eof {
                return false;
            }
            i += 1;
        }
    }

    // ---------------------------------------------------------- mappings

    fn mapping_doc(&mut self) -> Result<MappingDoc> {
        let span = self.span_here();
        self.expect(TokenKind::Mapping)?;
        let (name, _) = self.ident("a mapping name")?;
        self.expect(TokenKind::From)?;
        let (hl, _) = self.ident("a theory name")?;
        self.expect(TokenKind::To)?;
        let (ll, _) = self.ident("a theory name")?;
        self.expect(TokenKind::LBrace)?;
        let mut actions = Vec::new();
        let mut fluents = Vec::new();
        loop {
            match self.peek().kind {
                TokenKind::Action => actions.push(self.mapped_action()?),
                TokenKind::Fluent => fluents.push(self.mapped_fluent()?),
                TokenKind::RBrace => {
                    self.advance();
                    return Ok(MappingDoc { name, hl, ll, actions, fluents, span });
                }
                _ => {
                    return Err(
                        self.error_here("expected an action clause, a fluent clause, or '}'", None)
                    )
                }
            }
        }
    }

    fn mapped_action(&mut self) -> Result<MappedActionDecl> {
        let span = self.span_here();
        self.expect(TokenKind::Action)?;
        let (name, _) = self.ident("an action name")?;
        let params = self.typed_params()?;
        self.expect(TokenKind::LBrace)?;
        self.expect(TokenKind::Agent)?;
        self.expect(TokenKind::Colon)?;
        let agent = self.program()?;
        self.expect(TokenKind::Semi)?;
        self.expect(TokenKind::System)?;
        self.expect(TokenKind::LParen)?;
        let (system_var, _) = self.ident("a reaction variable")?;
        self.expect(TokenKind::RParen)?;
        self.expect(TokenKind::Colon)?;
        let system = self.program()?;
        self.expect(TokenKind::Semi)?;
        self.expect(TokenKind::RBrace)?;
        Ok(MappedActionDecl { name, params, agent, system_var, system, span })
    }

    fn mapped_fluent(&mut self) -> Result<MappedFluentDecl> {
        let span = self.span_here();
        self.expect(TokenKind::Fluent)?;
        let (name, _) = self.ident("a fluent name")?;
        let params = if self.eat(TokenKind::LParen) {
            let params = if self.peek().kind == TokenKind::RParen {
                Vec::new()
            } else {
                self.ident_list()?
            };
            self.expect(TokenKind::RParen)?;
            params
        } else {
            Vec::new()
        };
        self.expect(TokenKind::Colon)?;
        let body = self.formula()?;
        self.expect(TokenKind::Semi)?;
        Ok(MappedFluentDecl { name, params, body, span })
    }
}

fn starts_program(kind: TokenKind) -> bool {
    matches!(
        kind,
        TokenKind::Ident
            | TokenKind::Nil
            | TokenKind::Pi
            | TokenKind::If
            | TokenKind::While
            | TokenKind::LBracket
            | TokenKind::LParen
            | TokenKind::Bang
            | TokenKind::True
            | TokenKind::False
            | TokenKind::Exists
            | TokenKind::Forall
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::pretty::{pretty_formula, pretty_program};

    fn formula_of(src: &str) -> FormulaAst {
        let mut parser = Parser::new(src, "test").unwrap();
        let f = parser.formula().unwrap();
        parser.expect(TokenKind::Eof).unwrap();
        f
    }

    fn program_of(src: &str) -> ProgramAst {
        let mut parser = Parser::new(src, "test").unwrap();
        let p = parser.program().unwrap();
        parser.expect(TokenKind::Eof).unwrap();
        p
    }

    #[test]
    fn connective_precedence() {
        let f = formula_of("p | q & r -> s <-> t");
        assert_eq!(pretty_formula(&f), "((p | (q & r)) -> s) <-> t");
    }

    #[test]
    fn implication_is_right_associative() {
        let f = formula_of("p -> q -> r");
        assert_eq!(pretty_formula(&f), "p -> (q -> r)");
    }

    #[test]
    fn quantifiers_extend_right_and_nest() {
        let f = formula_of("exists o: location, r: reactions(drive) . a = drive(o, d, r) & At(o)");
        assert_eq!(
            pretty_formula(&f),
            "exists o: location . exists r: reactions(drive) . (a = drive(o, d, r)) & At(o)"
        );
    }

    #[test]
    fn equality_membership_and_action_atoms() {
        assert_eq!(pretty_formula(&formula_of("x != y")), "x != y");
        assert_eq!(pretty_formula(&formula_of("close_Rd(t) in e")), "close_Rd(t) in e");
        assert_eq!(pretty_formula(&formula_of("a = wait(r)")), "a = wait(r)");
        assert_eq!(pretty_formula(&formula_of("poss_ag & r = Pong")), "poss_ag & (r = Pong)");
    }

    #[test]
    fn program_operator_precedence() {
        let p = program_of("x | y; z || w");
        assert_eq!(pretty_program(&p), "x | y; z || w");
        let q = program_of("[x | y]; z*");
        assert_eq!(pretty_program(&q), "(x | y); z*");
    }

    #[test]
    fn tests_are_recognized_by_lookahead() {
        assert_eq!(pretty_program(&program_of("At(q)?")), "At(q)?");
        assert_eq!(pretty_program(&program_of("(p & q)?; move(q)")), "(p & q)?; move(q)");
        assert_eq!(pretty_program(&program_of("(move(p) | move(q)); ping")), "(move(p) | move(q)); ping");
        assert_eq!(pretty_program(&program_of("!Flat?")), "(!Flat)?");
        let starred = program_of("[pi d: loc . move(d)]*; At(q)?");
        assert_eq!(pretty_program(&starred), "(pi d: loc . move(d))*; At(q)?");
    }

    #[test]
    fn conditionals_and_loops() {
        let p = program_of("if Flat then fix(d) else nil endif");
        assert_eq!(pretty_program(&p), "if Flat then fix(d) else nil endif");
        let w = program_of("while !Done do step endwhile");
        assert_eq!(pretty_program(&w), "while !Done do step endwhile");
    }

    #[test]
    fn theory_documents_round_trip_structurally() {
        let src = "
theory demo {
    sort loc = { p, q };
    fluent At(loc);
    fluent Jammed;
    action move(d: loc) reactions r in { Arrive, Slip } {
        poss_ag: !At(d);
        poss: poss_ag & (r = Arrive | r = Slip & !Jammed);
    }
    action scan() reactions e subset of { mark(l) where l: loc } {
        poss_ag: true;
        poss: poss_ag;
    }
    ssa At(l): (exists r: reactions(move) . a = move(l, r))
        | (At(l) & !(exists d: loc, r: reactions(move) . a = move(d, r)));
    init {
        closed: At(p);
        open: Jammed;
    }
}";
        let doc = parse_theory(src, "demo.ndt").unwrap();
        assert_eq!(doc.name, "demo");
        assert_eq!(doc.sorts[0].objects, vec!["p", "q"]);
        assert_eq!(doc.fluents.len(), 2);
        assert_eq!(doc.actions.len(), 2);
        assert_eq!(doc.actions[0].reaction_var, "r");
        assert!(matches!(doc.actions[1].reactions, ReactionDecl::Subsets { .. }));
        assert_eq!(doc.ssas.len(), 1);
        assert_eq!(doc.init.closed.len(), 1);
        assert_eq!(doc.init.open[0].fluent, "Jammed");
    }

    #[test]
    fn mapping_documents_parse_clause_boundaries() {
        let src = "
mapping demo from hi to lo {
    action big(o: loc, d: loc) {
        agent: step(o, d); if Flat then fix(d) else nil endif;
        system(r): pi rl: reactions(step) . step(o, d, rl); (r = Done)?;
    }
    fluent At_H(l): At_L(l);
}";
        let doc = parse_mapping(src, "demo.ndm").unwrap();
        assert_eq!(doc.hl, "hi");
        assert_eq!(doc.ll, "lo");
        assert_eq!(doc.actions.len(), 1);
        assert_eq!(doc.actions[0].system_var, "r");
        assert_eq!(pretty_program(&doc.actions[0].agent), "step(o, d); if Flat then fix(d) else nil endif");
        assert_eq!(doc.fluents[0].name, "At_H");
    }

    #[test]
    fn program_documents_parse() {
        let src = "
agent program go over demo {
    [pi o: loc, d: loc . move(o, d)]*; At(q)?;
}
system program run over demo {
    move(p, q, Arrive)
}";
        let docs = parse_programs(src, "demo.ndp").unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].kind, ProgramKind::Agent);
        assert_eq!(docs[1].kind, ProgramKind::System);
        assert_eq!(docs[1].theory, "demo");
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_theory("theory t { sort s = { }; }", "t.ndt").unwrap_err();
        match err {
            Error::Parse { diagnostics, .. } => {
                assert_eq!(diagnostics.len(), 1);
                assert_eq!(diagnostics[0].line, 1);
            }
            other => panic!("unexpected error {other}"),
        }
    }
}
