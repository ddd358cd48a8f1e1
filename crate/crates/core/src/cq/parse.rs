use super::syntax::{SyntaxError, Tok, Tokens};
use super::{ConjQuery, Expr};
use crate::relcore::{Value, Var};

pub fn parse_query(src: &str) -> Result<ConjQuery, SyntaxError> {
    let mut toks = Tokens::new(src)?;
    let q = parse_query_tokens(&mut toks)?;
    toks.expect_eof()?;
    Ok(q)
}

/// `conj := unary ('/\' unary)*`; `exists` scopes as far right as possible.
pub fn parse_query_tokens(toks: &mut Tokens) -> Result<ConjQuery, SyntaxError> {
    let mut q = parse_unary(toks)?;
    while toks.eat_punct("/\\") {
        q = q.and(parse_unary(toks)?);
    }
    Ok(q)
}

fn parse_unary(toks: &mut Tokens) -> Result<ConjQuery, SyntaxError> {
    if toks.eat_keyword("exists") {
        let vars = parse_binders(toks)?;
        toks.expect_punct(".")?;
        let body = parse_query_tokens(toks)?;
        return Ok(vars
            .into_iter()
            .rev()
            .fold(body, |b, v| ConjQuery::Exists(v, Box::new(b))));
    }
    if toks.eat_keyword("true") {
        return Ok(ConjQuery::True);
    }
    if toks.eat_punct("(") {
        let q = parse_query_tokens(toks)?;
        toks.expect_punct(")")?;
        return Ok(q);
    }
    if matches!(toks.peek(), Tok::Ident(_)) && *toks.peek_at(1) == Tok::Punct("(") {
        let rel = toks.ident()?;
        toks.expect_punct("(")?;
        let mut args = Vec::new();
        if !toks.eat_punct(")") {
            loop {
                args.push(parse_expr(toks)?);
                if toks.eat_punct(")") {
                    break;
                }
                toks.expect_punct(",")?;
            }
        }
        return Ok(ConjQuery::Atom(rel, args));
    }
    let lhs = parse_expr(toks)?;
    toks.expect_punct("==")?;
    let rhs = parse_expr(toks)?;
    Ok(ConjQuery::Equal(lhs, rhs))
}

/// `y`, `y, z`, `y z` or `(y, z)`.
pub(crate) fn parse_binders(toks: &mut Tokens) -> Result<Vec<Var>, SyntaxError> {
    let paren = toks.eat_punct("(");
    let mut vars = vec![Var::new(&toks.ident()?)];
    loop {
        if toks.eat_punct(",") || matches!(toks.peek(), Tok::Ident(s) if !super::syntax::is_reserved(s)) {
            vars.push(Var::new(&toks.ident()?));
        } else {
            break;
        }
    }
    if paren {
        toks.expect_punct(")")?;
    }
    Ok(vars)
}

pub(crate) fn parse_expr(toks: &mut Tokens) -> Result<Expr, SyntaxError> {
    match toks.peek().clone() {
        Tok::Ident(_) => Ok(Expr::Var(Var::new(&toks.ident()?))),
        Tok::Str(s) => {
            toks.next();
            Ok(Expr::Const(Value::new(&s)))
        }
        Tok::Num(n) => {
            toks.next();
            Ok(Expr::Const(Value::new(&n)))
        }
        Tok::Punct("-") => {
            toks.next();
            match toks.peek().clone() {
                Tok::Num(n) => {
                    toks.next();
                    Ok(Expr::Const(Value::new(&format!("-{n}"))))
                }
                _ => toks.unexpected("number"),
            }
        }
        _ => toks.unexpected("variable or constant"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exists_scopes_right() {
        let q = parse_query("exists y. R1(x) /\\ R2(y)").unwrap();
        assert!(matches!(q, ConjQuery::Exists(_, ref b) if matches!(**b, ConjQuery::And(..))));
        let multi = parse_query("exists a, b. R(a, b)").unwrap();
        assert_eq!(multi, ConjQuery::exists("a", ConjQuery::exists("b", ConjQuery::atom("R", &["a", "b"]))));
        assert_eq!(parse_query("exists (a b). R(a, b)").unwrap(), multi);
    }

    #[test]
    fn constants_and_errors() {
        let q = parse_query("R(x, 'w1', 2.5, -3) /\\ x == \"c\"").unwrap();
        assert_eq!(q.atoms()[0].1[3], Expr::constant("-3"));
        assert!(parse_query("R(x").is_err());
        assert!(parse_query("x").is_err());
        let err = parse_query("R(x) /\\\n  == y").unwrap_err();
        assert_eq!((err.span.line, err.span.col), (2, 3));
    }
}
