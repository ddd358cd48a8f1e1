//! Programs over conjunctive queries: syntax, normal form and closure.

mod ast;
mod close;
mod normal;
mod parse;

use crate::cq::syntax::{Span, SyntaxError};
use crate::cq::CqError;
use crate::relcore::{Value, Var};

pub use ast::{
    ClosedConstraint, ClosedProgram, ClosedSum, Coef, Constraint, Loc, Program, QueryDef, Rel, Sum, WeightClosed,
    WeightOpen,
};
pub use close::close;
pub use normal::{normal_form, rename_apart};
pub use parse::parse_program;

#[derive(Debug, thiserror::Error)]
pub enum LangError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{span}: free variable `{name}`")]
    FreeVariable { name: String, span: Span },
    #[error("{span}: `{name}` bound twice in one binder")]
    Shadowing { name: String, span: Span },
    #[error("{span}: query `{name}` defined twice")]
    DuplicateQuery { name: String, span: Span },
    #[error("{span}: parameters of `{name}` differ from the free variables of its body")]
    QueryParams { name: String, span: Span },
    #[error("{span}: unknown query `{name}`")]
    UnknownQuery { name: String, span: Span },
    #[error("{span}: `{query}` takes {expected} variables, weight scope lists {found}")]
    ScopeArity {
        query: String,
        expected: usize,
        found: usize,
        span: Span,
    },
    #[error("{span}: target `{name}` is not in the weight scope")]
    TargetNotInScope { name: String, span: Span },
    #[error("{span}: value `{name}` is a scope variable")]
    ValueInScope { name: String, span: Span },
    #[error("num undefined on {0:?}")]
    NumUndefined(Value),
    #[error("unbound variable `{0}` during closure")]
    InternalFreeVariable(Var),
    #[error(transparent)]
    Eval(#[from] CqError),
}
