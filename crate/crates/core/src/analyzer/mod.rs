//! Name resolution, type checking and structural validation of model plus data.

mod bind;
mod check;
mod inherit;

use indexmap::IndexMap;

use crate::ast::{
    Attribute, Bound, ClassDef, ConstraintZone, DomainDecl, Expr, ExprKind, Import, Item, Model,
    ObjectiveKind, RangeExpr, TypeRef, UnOp, BinOp,
};
use crate::data::DataFile;
use crate::flat::Domain;
use crate::span::{Diagnostic, Diagnostics, SourceSpan};
use crate::value::Value;

pub use bind::{bind_data, Instance, Seg, Slot};
pub use inherit::linearize_inheritance;

/// Static type of an expression. Enum values are ordinals and mix freely with ints.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ty {
    Int,
    Real,
    Bool,
    Set,
    Enum(String),
    Object(String),
    Array { elem: Box<Ty>, dims: usize },
}

impl Ty {
    pub fn is_intlike(&self) -> bool {
        matches!(self, Ty::Int | Ty::Enum(_))
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Ty::Int | Ty::Enum(_) | Ty::Real)
    }

    pub fn array(elem: Ty, dims: usize) -> Ty {
        if dims == 0 {
            elem
        } else {
            Ty::Array {
                elem: Box::new(elem),
                dims,
            }
        }
    }
}

impl std::fmt::Display for Ty {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Ty::Int => f.write_str("int"),
            Ty::Real => f.write_str("real"),
            Ty::Bool => f.write_str("bool"),
            Ty::Set => f.write_str("set of int"),
            Ty::Enum(e) => f.write_str(e),
            Ty::Object(c) => f.write_str(c),
            Ty::Array { elem, dims } => write!(f, "{dims}-d array of {elem}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TExpr {
    pub kind: TKind,
    pub ty: Ty,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TKind {
    Lit(Value),
    EnumLit {
        enum_name: String,
        label: String,
        ordinal: i64,
    },
    /// A data constant.
    Const(String),
    LoopVar(String),
    /// An attribute of the object whose zone contains the expression.
    Attr(String),
    Index(Box<TExpr>, Vec<TExpr>),
    Field(Box<TExpr>, String),
    Unary(UnOp, Box<TExpr>),
    Binary(BinOp, Box<TExpr>, Box<TExpr>),
    SetLit(Vec<TExpr>),
    ArrayLit(Vec<TExpr>),
}

impl TExpr {
    pub fn lit(v: Value, span: SourceSpan) -> TExpr {
        let ty = match &v {
            Value::Int(_) => Ty::Int,
            Value::Real(_) => Ty::Real,
            Value::Bool(_) => Ty::Bool,
            Value::Set(_) => Ty::Set,
        };
        TExpr {
            kind: TKind::Lit(v),
            ty,
            span,
        }
    }

    pub fn as_lit(&self) -> Option<&Value> {
        match &self.kind {
            TKind::Lit(v) => Some(v),
            _ => None,
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut TExpr> {
        match &mut self.kind {
            TKind::Index(b, idx) => std::iter::once(&mut **b).chain(idx.iter_mut()).collect(),
            TKind::Field(b, _) | TKind::Unary(_, b) => vec![&mut **b],
            TKind::Binary(_, l, r) => vec![&mut **l, &mut **r],
            TKind::SetLit(es) | TKind::ArrayLit(es) => es.iter_mut().collect(),
            _ => Vec::new(),
        }
    }

    pub fn children(&self) -> Vec<&TExpr> {
        match &self.kind {
            TKind::Index(b, idx) => std::iter::once(&**b).chain(idx.iter()).collect(),
            TKind::Field(b, _) | TKind::Unary(_, b) => vec![&**b],
            TKind::Binary(_, l, r) => vec![&**l, &**r],
            TKind::SetLit(es) | TKind::ArrayLit(es) => es.iter().collect(),
            _ => Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|c| c.node_count()).sum::<usize>()
    }

    /// Rewrites every node bottom-up.
    pub fn rewrite(&mut self, f: &mut dyn FnMut(&mut TExpr)) {
        for c in self.children_mut() {
            c.rewrite(f);
        }
        f(self);
    }

    pub fn any(&self, pred: &dyn Fn(&TExpr) -> bool) -> bool {
        pred(self) || self.children().iter().any(|c| c.any(pred))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TRange {
    Interval(TExpr, TExpr),
    Enum(String, SourceSpan),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TItem {
    Constraint(TExpr),
    Forall {
        var: String,
        range: TRange,
        body: Vec<TItem>,
        span: SourceSpan,
    },
    If {
        cond: TExpr,
        then_items: Vec<TItem>,
        else_items: Option<Vec<TItem>>,
        span: SourceSpan,
    },
    Objective {
        kind: ObjectiveKind,
        expr: TExpr,
        span: SourceSpan,
    },
    Global {
        name: String,
        args: Vec<TExpr>,
        span: SourceSpan,
    },
}

impl TItem {
    pub fn node_count(&self) -> usize {
        1 + match self {
            TItem::Constraint(e) => e.node_count(),
            TItem::Forall { range, body, .. } => {
                let r = match range {
                    TRange::Interval(a, b) => a.node_count() + b.node_count(),
                    TRange::Enum(..) => 1,
                };
                r + body.iter().map(TItem::node_count).sum::<usize>()
            }
            TItem::If {
                cond,
                then_items,
                else_items,
                ..
            } => {
                cond.node_count()
                    + then_items.iter().map(TItem::node_count).sum::<usize>()
                    + else_items.iter().flatten().map(TItem::node_count).sum::<usize>()
            }
            TItem::Objective { expr, .. } => expr.node_count(),
            TItem::Global { args, .. } => args.iter().map(TExpr::node_count).sum(),
        }
    }

    /// Applies `f` to every expression directly or transitively inside the item.
    pub fn exprs_mut(&mut self, f: &mut dyn FnMut(&mut TExpr)) {
        match self {
            TItem::Constraint(e) | TItem::Objective { expr: e, .. } => f(e),
            TItem::Forall { range, body, .. } => {
                if let TRange::Interval(a, b) = range {
                    f(a);
                    f(b);
                }
                body.iter_mut().for_each(|i| i.exprs_mut(f));
            }
            TItem::If {
                cond,
                then_items,
                else_items,
                ..
            } => {
                f(cond);
                then_items.iter_mut().for_each(|i| i.exprs_mut(f));
                else_items.iter_mut().flatten().for_each(|i| i.exprs_mut(f));
            }
            TItem::Global { args, .. } => args.iter_mut().for_each(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttrTy {
    Int,
    Real,
    Bool,
    SetOfInt,
    SetOf(String),
    Enum(String),
    Object(String),
}

impl AttrTy {
    /// Type of one element.
    pub fn ty(&self) -> Ty {
        match self {
            AttrTy::Int => Ty::Int,
            AttrTy::Real => Ty::Real,
            AttrTy::Bool => Ty::Bool,
            AttrTy::SetOfInt | AttrTy::SetOf(_) => Ty::Set,
            AttrTy::Enum(e) => Ty::Enum(e.clone()),
            AttrTy::Object(c) => Ty::Object(c.clone()),
        }
    }

    fn type_ref(&self) -> TypeRef {
        match self {
            AttrTy::Int => TypeRef::Int,
            AttrTy::Real => TypeRef::Real,
            AttrTy::Bool => TypeRef::Bool,
            AttrTy::SetOfInt => TypeRef::SetOfInt,
            AttrTy::SetOf(e) => TypeRef::SetOf(e.clone()),
            AttrTy::Enum(n) | AttrTy::Object(n) => TypeRef::Named(n.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dim {
    pub size: usize,
    /// The bound as written: a literal, a constant or an enum name.
    pub bound: Bound,
    /// Set when the dimension is indexed by an enum.
    pub enum_name: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TAttr {
    pub name: String,
    pub ty: AttrTy,
    pub dims: Vec<Dim>,
    /// Evaluated domain; for sets, the universe of elements.
    pub domain: Option<Domain>,
    /// The enum whose labels render this attribute's values.
    pub enum_tag: Option<String>,
    pub decl: Option<DomainDecl>,
    pub span: SourceSpan,
}

impl TAttr {
    pub fn shape(&self) -> Vec<usize> {
        self.dims.iter().map(|d| d.size).collect()
    }

    pub fn len(&self) -> usize {
        self.dims.iter().map(|d| d.size).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn full_ty(&self) -> Ty {
        Ty::array(self.ty.ty(), self.dims.len())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TZone {
    pub name: String,
    pub items: Vec<TItem>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TClass {
    pub name: String,
    pub attributes: Vec<TAttr>,
    pub zones: Vec<TZone>,
    pub span: SourceSpan,
}

impl TClass {
    pub fn attr(&self, name: &str) -> Option<&TAttr> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn attr_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }
}

/// A data constant with its values in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstVal {
    pub elem: Ty,
    pub shape: Vec<usize>,
    pub values: Vec<Value>,
}

impl ConstVal {
    pub fn ty(&self) -> Ty {
        Ty::array(self.elem.clone(), self.shape.len())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypedModel {
    pub name: String,
    pub main_class: String,
    pub imports: Vec<Import>,
    /// Linearized: inherited members are copied in, declaration order kept.
    pub classes: Vec<TClass>,
    pub enums: IndexMap<String, Vec<String>>,
    pub constants: IndexMap<String, ConstVal>,
    /// Enum label tables kept for rendering solutions; filled by enum substitution.
    pub enum_tables: IndexMap<String, Vec<String>>,
    pub warnings: Vec<Diagnostic>,
}

impl TypedModel {
    pub fn class(&self, name: &str) -> Option<&TClass> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn main(&self) -> &TClass {
        self.class(&self.main_class).expect("main class exists")
    }

    pub fn node_count(&self) -> usize {
        self.classes
            .iter()
            .map(|c| {
                c.attributes.len()
                    + c.zones
                        .iter()
                        .map(|z| z.items.iter().map(TItem::node_count).sum::<usize>())
                        .sum::<usize>()
            })
            .sum()
    }

    /// Source form of the analyzed model: linearized classes, names unresolved again.
    pub fn to_model(&self) -> Model {
        Model {
            name: self.name.clone(),
            imports: self.imports.clone(),
            main_class: self.main_class.clone(),
            classes: self
                .classes
                .iter()
                .map(|c| ClassDef {
                    name: c.name.clone(),
                    superclass: None,
                    attributes: c
                        .attributes
                        .iter()
                        .map(|a| Attribute {
                            name: a.name.clone(),
                            ty: a.ty.type_ref(),
                            shape: a.dims.iter().map(|d| d.bound.clone()).collect(),
                            domain: a.decl.clone(),
                            span: a.span.clone(),
                        })
                        .collect(),
                    zones: c
                        .zones
                        .iter()
                        .map(|z| ConstraintZone {
                            name: z.name.clone(),
                            items: z.items.iter().map(item_to_ast).collect(),
                            span: z.span.clone(),
                        })
                        .collect(),
                    span: c.span.clone(),
                })
                .collect(),
        }
    }
}

pub fn expr_to_ast(e: &TExpr) -> Expr {
    let kind = match &e.kind {
        TKind::Lit(Value::Int(v)) => ExprKind::Int(*v),
        TKind::Lit(Value::Real(v)) => ExprKind::Real(*v),
        TKind::Lit(Value::Bool(v)) => ExprKind::Bool(*v),
        TKind::Lit(Value::Set(s)) => ExprKind::SetLit(
            s.iter()
                .map(|v| Expr::new(ExprKind::Int(*v), e.span.clone()))
                .collect(),
        ),
        TKind::EnumLit { label, .. } => ExprKind::Name(label.clone()),
        TKind::Const(n) | TKind::LoopVar(n) | TKind::Attr(n) => ExprKind::Name(n.clone()),
        TKind::Index(b, idx) => {
            ExprKind::Index(Box::new(expr_to_ast(b)), idx.iter().map(expr_to_ast).collect())
        }
        TKind::Field(b, f) => ExprKind::Field(Box::new(expr_to_ast(b)), f.clone()),
        TKind::Unary(op, b) => ExprKind::Unary(*op, Box::new(expr_to_ast(b))),
        TKind::Binary(op, l, r) => {
            ExprKind::Binary(*op, Box::new(expr_to_ast(l)), Box::new(expr_to_ast(r)))
        }
        TKind::SetLit(es) => ExprKind::SetLit(es.iter().map(expr_to_ast).collect()),
        TKind::ArrayLit(es) => ExprKind::ArrayLit(es.iter().map(expr_to_ast).collect()),
    };
    Expr::new(kind, e.span.clone())
}

fn item_to_ast(it: &TItem) -> Item {
    match it {
        TItem::Constraint(e) => Item::Constraint(expr_to_ast(e)),
        TItem::Forall {
            var,
            range,
            body,
            span,
        } => Item::Forall {
            var: var.clone(),
            range: match range {
                TRange::Interval(a, b) => RangeExpr::Interval(expr_to_ast(a), expr_to_ast(b)),
                TRange::Enum(n, s) => RangeExpr::Named(n.clone(), s.clone()),
            },
            body: body.iter().map(item_to_ast).collect(),
            span: span.clone(),
        },
        TItem::If {
            cond,
            then_items,
            else_items,
            span,
        } => Item::If {
            cond: expr_to_ast(cond),
            then_items: then_items.iter().map(item_to_ast).collect(),
            else_items: else_items
                .as_ref()
                .map(|items| items.iter().map(item_to_ast).collect()),
            span: span.clone(),
        },
        TItem::Objective { kind, expr, span } => Item::Objective {
            kind: *kind,
            expr: expr_to_ast(expr),
            span: span.clone(),
        },
        TItem::Global { name, args, span } => Item::Global {
            name: name.clone(),
            args: args.iter().map(expr_to_ast).collect(),
            span: span.clone(),
        },
    }
}

/// Resolves and checks `m` against `d`, collecting every error before failing.
pub fn analyze(m: &Model, d: &DataFile) -> Result<TypedModel, Diagnostics> {
    check::Analyzer::run(m, d)
}
