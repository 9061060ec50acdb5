//! Source-level syntax tree of a model file.

use crate::span::SourceSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    And,
    Or,
    Xor,
    Implies,
    RevImplies,
    Iff,
    In,
    Subset,
    Superset,
    Union,
    Diff,
    SymDiff,
    Intersection,
}

impl BinOp {
    pub const ALL: [BinOp; 23] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
        BinOp::Lt,
        BinOp::Gt,
        BinOp::Le,
        BinOp::Ge,
        BinOp::Eq,
        BinOp::Ne,
        BinOp::And,
        BinOp::Or,
        BinOp::Xor,
        BinOp::Implies,
        BinOp::RevImplies,
        BinOp::Iff,
        BinOp::In,
        BinOp::Subset,
        BinOp::Superset,
        BinOp::Union,
        BinOp::Diff,
        BinOp::SymDiff,
        BinOp::Intersection,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::Le => "<=",
            BinOp::Ge => ">=",
            BinOp::Eq => "=",
            BinOp::Ne => "<>",
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Xor => "xor",
            BinOp::Implies => "->",
            BinOp::RevImplies => "<-",
            BinOp::Iff => "<->",
            BinOp::In => "in",
            BinOp::Subset => "subset",
            BinOp::Superset => "superset",
            BinOp::Union => "union",
            BinOp::Diff => "diff",
            BinOp::SymDiff => "symdiff",
            BinOp::Intersection => "intersection",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Implies | BinOp::RevImplies | BinOp::Iff => 1,
            BinOp::Or => 2,
            BinOp::Xor => 3,
            BinOp::And => 4,
            BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge | BinOp::Eq | BinOp::Ne => 5,
            BinOp::In
            | BinOp::Subset
            | BinOp::Superset
            | BinOp::Union
            | BinOp::Diff
            | BinOp::SymDiff
            | BinOp::Intersection => 6,
            BinOp::Add | BinOp::Sub => 7,
            BinOp::Mul | BinOp::Div => 8,
        }
    }

    /// Implications group to the right, everything else to the left.
    pub fn is_right_assoc(self) -> bool {
        self.precedence() == 1
    }

    /// Name of the backend concept that renders this operator.
    pub fn concept(self) -> &'static str {
        match self {
            BinOp::Add => "Add",
            BinOp::Sub => "Sub",
            BinOp::Mul => "Mul",
            BinOp::Div => "Div",
            BinOp::Lt => "Lt",
            BinOp::Gt => "Gt",
            BinOp::Le => "Le",
            BinOp::Ge => "Ge",
            BinOp::Eq => "Eq",
            BinOp::Ne => "Ne",
            BinOp::And => "And",
            BinOp::Or => "Or",
            BinOp::Xor => "Xor",
            BinOp::Implies => "Implies",
            BinOp::RevImplies => "RevImplies",
            BinOp::Iff => "Iff",
            BinOp::In => "In",
            BinOp::Subset => "Subset",
            BinOp::Superset => "Superset",
            BinOp::Union => "Union",
            BinOp::Diff => "Diff",
            BinOp::SymDiff => "SymDiff",
            BinOp::Intersection => "Intersection",
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 5
    }

    pub fn is_logical(self) -> bool {
        matches!(
            self,
            BinOp::And | BinOp::Or | BinOp::Xor | BinOp::Implies | BinOp::RevImplies | BinOp::Iff
        )
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div)
    }

    /// Keyword operators need surrounding whitespace when printed.
    pub fn is_word(self) -> bool {
        self.symbol().chars().all(|c| c.is_ascii_alphabetic())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
    Card,
}

impl UnOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnOp::Neg => "-",
            UnOp::Not => "not",
            UnOp::Card => "cardinality",
        }
    }

    pub fn concept(self) -> &'static str {
        match self {
            UnOp::Neg => "Neg",
            UnOp::Not => "Not",
            UnOp::Card => "Card",
        }
    }
}

pub const UNARY_PRECEDENCE: u8 = 9;
pub const ATOM_PRECEDENCE: u8 = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Int(i64),
    Real(f64),
    Bool(bool),
    /// Variable, constant, loop variable or enum literal; resolved by the analyzer.
    Name(String),
    Index(Box<Expr>, Vec<Expr>),
    Field(Box<Expr>, String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    SetLit(Vec<Expr>),
    ArrayLit(Vec<Expr>),
    Call(String, Vec<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind, span: SourceSpan) -> Self {
        Expr { kind, span }
    }

    pub fn precedence(&self) -> u8 {
        match &self.kind {
            ExprKind::Binary(op, _, _) => op.precedence(),
            ExprKind::Unary(UnOp::Card, _) => ATOM_PRECEDENCE,
            ExprKind::Unary(_, _) => UNARY_PRECEDENCE,
            _ => ATOM_PRECEDENCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub name: String,
    pub imports: Vec<Import>,
    pub classes: Vec<ClassDef>,
    /// The first declared class.
    pub main_class: String,
}

impl Model {
    pub fn class(&self, name: &str) -> Option<&ClassDef> {
        self.classes.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Import {
    pub path: String,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDef {
    pub name: String,
    pub superclass: Option<String>,
    pub attributes: Vec<Attribute>,
    pub zones: Vec<ConstraintZone>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TypeRef {
    Int,
    Real,
    Bool,
    SetOfInt,
    /// `set of E` for an enum `E`.
    SetOf(String),
    /// An enum or class name.
    Named(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Bound {
    Int(i64),
    /// A data constant or an enum name.
    Name(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainDecl {
    Interval(Expr, Expr),
    Set(Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attribute {
    pub name: String,
    pub ty: TypeRef,
    pub shape: Vec<Bound>,
    pub domain: Option<DomainDecl>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintZone {
    pub name: String,
    pub items: Vec<Item>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjectiveKind {
    Minimize,
    Maximize,
}

impl ObjectiveKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ObjectiveKind::Minimize => "minimize",
            ObjectiveKind::Maximize => "maximize",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RangeExpr {
    Interval(Expr, Expr),
    /// Traverses the values of an enum.
    Named(String, SourceSpan),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    Constraint(Expr),
    Forall {
        var: String,
        range: RangeExpr,
        body: Vec<Item>,
        span: SourceSpan,
    },
    If {
        cond: Expr,
        then_items: Vec<Item>,
        else_items: Option<Vec<Item>>,
        span: SourceSpan,
    },
    Objective {
        kind: ObjectiveKind,
        expr: Expr,
        span: SourceSpan,
    },
    Global {
        name: String,
        args: Vec<Expr>,
        span: SourceSpan,
    },
}

impl Item {
    pub fn span(&self) -> &SourceSpan {
        match self {
            Item::Constraint(e) => &e.span,
            Item::Forall { span, .. }
            | Item::If { span, .. }
            | Item::Objective { span, .. }
            | Item::Global { span, .. } => span,
        }
    }
}

/// Global constraints recognised at statement level.
pub const GLOBALS: &[&str] = &["alldifferent", "cumulatives"];

/// Replaces every span with the synthetic one, for structural comparison.
pub trait EraseSpans {
    fn erase_spans(&mut self);
}

impl EraseSpans for Expr {
    fn erase_spans(&mut self) {
        self.span = SourceSpan::synthetic();
        match &mut self.kind {
            ExprKind::Index(b, idx) => {
                b.erase_spans();
                idx.iter_mut().for_each(EraseSpans::erase_spans);
            }
            ExprKind::Field(b, _) | ExprKind::Unary(_, b) => b.erase_spans(),
            ExprKind::Binary(_, l, r) => {
                l.erase_spans();
                r.erase_spans();
            }
            ExprKind::SetLit(es) | ExprKind::ArrayLit(es) | ExprKind::Call(_, es) => {
                es.iter_mut().for_each(EraseSpans::erase_spans)
            }
            ExprKind::Int(_) | ExprKind::Real(_) | ExprKind::Bool(_) | ExprKind::Name(_) => {}
        }
    }
}

impl EraseSpans for Item {
    fn erase_spans(&mut self) {
        match self {
            Item::Constraint(e) => e.erase_spans(),
            Item::Forall {
                range, body, span, ..
            } => {
                *span = SourceSpan::synthetic();
                match range {
                    RangeExpr::Interval(a, b) => {
                        a.erase_spans();
                        b.erase_spans();
                    }
                    RangeExpr::Named(_, s) => *s = SourceSpan::synthetic(),
                }
                body.iter_mut().for_each(EraseSpans::erase_spans);
            }
            Item::If {
                cond,
                then_items,
                else_items,
                span,
            } => {
                *span = SourceSpan::synthetic();
                cond.erase_spans();
                then_items.iter_mut().for_each(EraseSpans::erase_spans);
                if let Some(items) = else_items {
                    items.iter_mut().for_each(EraseSpans::erase_spans);
                }
            }
            Item::Objective { expr, span, .. } => {
                *span = SourceSpan::synthetic();
                expr.erase_spans();
            }
            Item::Global { args, span, .. } => {
                *span = SourceSpan::synthetic();
                args.iter_mut().for_each(EraseSpans::erase_spans);
            }
        }
    }
}

impl EraseSpans for Model {
    fn erase_spans(&mut self) {
        for imp in &mut self.imports {
            imp.span = SourceSpan::synthetic();
        }
        for class in &mut self.classes {
            class.span = SourceSpan::synthetic();
            for attr in &mut class.attributes {
                attr.span = SourceSpan::synthetic();
                match &mut attr.domain {
                    Some(DomainDecl::Interval(a, b)) => {
                        a.erase_spans();
                        b.erase_spans();
                    }
                    Some(DomainDecl::Set(es)) => es.iter_mut().for_each(EraseSpans::erase_spans),
                    None => {}
                }
            }
            for zone in &mut class.zones {
                zone.span = SourceSpan::synthetic();
                zone.items.iter_mut().for_each(EraseSpans::erase_spans);
            }
        }
    }
}
