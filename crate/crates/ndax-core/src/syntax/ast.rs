//! Parsed form of the surface language, before names are resolved.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone)]
pub struct TheoryDoc {
    pub name: String,
    pub sorts: Vec<SortDecl>,
    pub updates: Vec<UpdatesDecl>,
    pub fluents: Vec<FluentDecl>,
    pub actions: Vec<ActionDecl>,
    pub ssas: Vec<SsaDecl>,
    pub init: InitBlock,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct SortDecl {
    pub name: String,
    pub objects: Vec<String>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct UpdatesDecl {
    pub name: String,
    pub param_sorts: Vec<String>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct FluentDecl {
    pub name: String,
    pub param_sorts: Vec<String>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct ActionDecl {
    pub name: String,
    pub params: Vec<(String, String)>,
    pub reaction_var: String,
    pub reactions: ReactionDecl,
    pub poss_ag: FormulaAst,
    pub poss: FormulaAst,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub enum ReactionDecl {
    Tokens(Vec<String>),
    Subsets {
        patterns: Vec<UpdatePatAst>,
        binders: Vec<(String, String)>,
    },
}

#[derive(Debug, Clone)]
pub struct UpdatePatAst {
    pub family: String,
    pub args: Vec<TermAst>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct SsaDecl {
    pub fluent: String,
    pub params: Vec<String>,
    pub body: FormulaAst,
    pub span: Span,
}

#[derive(Debug, Clone, Default)]
pub struct InitBlock {
    pub closed: Vec<GroundAtomAst>,
    pub open: Vec<GroundAtomAst>,
}

#[derive(Debug, Clone)]
pub struct GroundAtomAst {
    pub fluent: String,
    pub args: Vec<String>,
    pub span: Span,
}

/// A name in term position; whether it is a variable or an object is decided
/// during lowering.
#[derive(Debug, Clone)]
pub struct TermAst {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub enum DomainAst {
    Sort(String, Span),
    Reactions(String, Span),
}

#[derive(Debug, Clone)]
pub enum FormulaAst {
    True,
    False,
    PossAg(Span),
    /// Fluent atom, or a bare name standing for a zero-parameter fluent.
    Atom {
        name: String,
        args: Vec<TermAst>,
        span: Span,
    },
    Eq {
        left: TermAst,
        right: TermAst,
        negated: bool,
    },
    /// `a = name(args..)` with the reaction as the final argument.
    ActEq {
        action: String,
        args: Vec<TermAst>,
        span: Span,
    },
    /// `family(args..) in set`.
    InSet {
        pattern: UpdatePatAst,
        set: TermAst,
    },
    Not(Box<FormulaAst>),
    And(Box<FormulaAst>, Box<FormulaAst>),
    Or(Box<FormulaAst>, Box<FormulaAst>),
    Implies(Box<FormulaAst>, Box<FormulaAst>),
    Iff(Box<FormulaAst>, Box<FormulaAst>),
    Exists {
        binders: Vec<(String, DomainAst)>,
        body: Box<FormulaAst>,
        span: Span,
    },
    Forall {
        binders: Vec<(String, DomainAst)>,
        body: Box<FormulaAst>,
        span: Span,
    },
}

#[derive(Debug, Clone)]
pub enum ProgramAst {
    Nil,
    Test(FormulaAst, Span),
    /// Action invocation; agent or system arity is decided by the lowering
    /// context.
    Call {
        name: String,
        args: Vec<TermAst>,
        span: Span,
    },
    Seq(Vec<ProgramAst>),
    Choice(Vec<ProgramAst>),
    Conc(Box<ProgramAst>, Box<ProgramAst>),
    Pick {
        binders: Vec<(String, DomainAst)>,
        body: Box<ProgramAst>,
        span: Span,
    },
    Star(Box<ProgramAst>),
    If {
        cond: FormulaAst,
        then_branch: Box<ProgramAst>,
        else_branch: Option<Box<ProgramAst>>,
        span: Span,
    },
    While {
        cond: FormulaAst,
        body: Box<ProgramAst>,
        span: Span,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProgramKind {
    Agent,
    System,
}

#[derive(Debug, Clone)]
pub struct ProgramDoc {
    pub name: String,
    pub kind: ProgramKind,
    pub theory: String,
    pub body: ProgramAst,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct MappingDoc {
    pub name: String,
    pub hl: String,
    pub ll: String,
    pub actions: Vec<MappedActionDecl>,
    pub fluents: Vec<MappedFluentDecl>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct MappedActionDecl {
    pub name: String,
    pub params: Vec<(String, String)>,
    pub agent: ProgramAst,
    pub system_var: String,
    pub system: ProgramAst,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct MappedFluentDecl {
    pub name: String,
    pub params: Vec<String>,
    pub body: FormulaAst,
    pub span: Span,
}
