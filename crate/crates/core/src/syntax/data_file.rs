//! Data files: enums, constants and variable-assignments.

use crate::data::{Assignment, ConstDecl, DataFile, DataValue, DataValueKind, EnumDecl};
use crate::span::{Diagnostics, SourceSpan};

use super::cursor::{Cursor, PResult};
use super::lexer::Tok;
use super::model::parse_type;

pub fn parse_data(text: &str, file: &str) -> Result<DataFile, Diagnostics> {
    let mut c = Cursor::new(text, file);
    let mut data = DataFile::default();
    while !c.at_eof() {
        let r = if c.at_kw("enum") {
            enum_decl(&mut c, &mut data)
        } else {
            decl(&mut c, &mut data)
        };
        if r.is_err() {
            c.recover();
        }
    }
    if c.diags.is_empty() {
        Ok(data)
    } else {
        Err(Diagnostics(c.diags))
    }
}

fn defined(data: &DataFile, name: &str) -> bool {
    data.enums.contains_key(name) || data.constants.contains_key(name)
}

fn enum_decl(c: &mut Cursor, data: &mut DataFile) -> PResult<()> {
    let kw = c.next().span;
    let (name, name_span) = c.expect_ident("an enum name")?;
    c.expect_sym(":=")?;
    c.expect_sym("{")?;
    let (values, end) = c.list("}", |c| c.expect_ident("an enum value"))?;
    c.expect_sym(";")?;
    if values.is_empty() {
        c.error_at(end, format!("enum `{name}` has no values"));
        return Err(());
    }
    let mut seen: Vec<String> = Vec::new();
    for (v, span) in values {
        if seen.contains(&v) {
            c.error_at(span, format!("duplicate value `{v}` in enum `{name}`"));
        } else {
            seen.push(v);
        }
    }
    if defined(data, &name) {
        c.error_at(name_span, format!("`{name}` is defined twice"));
        return Ok(());
    }
    data.enums.insert(
        name.clone(),
        EnumDecl {
            name,
            values: seen,
            span: kw,
        },
    );
    Ok(())
}

/// `Type name := v;` declares a constant, `Type Main.path := v;` assigns into the model.
fn decl(c: &mut Cursor, data: &mut DataFile) -> PResult<()> {
    let start = c.peek().span.clone();
    let ty = parse_type(c)?;
    let (first, first_span) = c.expect_ident("a constant name or an assignment path")?;
    let mut path = vec![first];
    while c.eat_sym(".") {
        path.push(c.expect_ident("an attribute name")?.0);
    }
    c.expect_sym(":=")?;
    let value = value(c)?;
    let end = c.expect_sym(";")?;
    let span = start.to(&end);
    if path.len() == 1 {
        let name = path.pop().unwrap();
        if defined(data, &name) {
            c.error_at(first_span, format!("`{name}` is defined twice"));
            return Ok(());
        }
        data.constants.insert(
            name.clone(),
            ConstDecl {
                name,
                ty,
                value,
                span,
            },
        );
    } else {
        data.assignments.push(Assignment {
            ty,
            path,
            value,
            span,
        });
    }
    Ok(())
}

fn value(c: &mut Cursor) -> PResult<DataValue> {
    let t = c.peek().clone();
    let kind = match &t.tok {
        Tok::Sym("_") => {
            c.next();
            DataValueKind::Omit
        }
        Tok::Sym("-") => {
            c.next();
            let n = c.next();
            match n.tok {
                Tok::Int(v) => {
                    return Ok(DataValue {
                        kind: DataValueKind::Int(-v),
                        span: t.span.to(&n.span),
                    })
                }
                Tok::Real(v) => {
                    return Ok(DataValue {
                        kind: DataValueKind::Real(-v),
                        span: t.span.to(&n.span),
                    })
                }
                _ => {
                    c.error_at(n.span, "expected a number after `-`");
                    return Err(());
                }
            }
        }
        Tok::Int(v) => {
            c.next();
            DataValueKind::Int(*v)
        }
        Tok::Real(v) => {
            c.next();
            DataValueKind::Real(*v)
        }
        Tok::Ident(w) if w == "true" || w == "false" => {
            c.next();
            DataValueKind::Bool(w == "true")
        }
        Tok::Ident(w) => {
            c.next();
            DataValueKind::Symbol(w.clone())
        }
        Tok::Sym("{") => {
            c.next();
            let (vs, end) = c.list("}", value)?;
            return Ok(DataValue {
                kind: DataValueKind::Braced(vs),
                span: t.span.to(&end),
            });
        }
        Tok::Sym("[") => {
            c.next();
            return array(c, t.span);
        }
        _ => {
            c.expected("a value");
            return Err(());
        }
    };
    Ok(DataValue { kind, span: t.span })
}

enum Entry {
    Keyed(String, DataValue),
    Plain(DataValue),
}

fn array(c: &mut Cursor, open: SourceSpan) -> PResult<DataValue> {
    let (entries, end) = c.list("]", |c| {
        let keyed = matches!(c.peek().tok, Tok::Ident(_)) && c.peek_n(1).is_sym(":");
        if keyed {
            let (key, _) = c.expect_ident("a key")?;
            c.next();
            Ok(Entry::Keyed(key, value(c)?))
        } else {
            Ok(Entry::Plain(value(c)?))
        }
    })?;
    let span = open.to(&end);
    let keyed = entries.iter().filter(|e| matches!(e, Entry::Keyed(..))).count();
    if keyed > 0 && keyed < entries.len() {
        c.error_at(span, "keyed and positional entries mixed in one array literal");
        return Err(());
    }
    let kind = if keyed > 0 {
        DataValueKind::Keyed(
            entries
                .into_iter()
                .map(|e| match e {
                    Entry::Keyed(k, v) => (k, v),
                    Entry::Plain(_) => unreachable!(),
                })
                .collect(),
        )
    } else {
        DataValueKind::Array(
            entries
                .into_iter()
                .map(|e| match e {
                    Entry::Plain(v) => v,
                    Entry::Keyed(..) => unreachable!(),
                })
                .collect(),
        )
    };
    Ok(DataValue { kind, span })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file() {
        assert!(parse_data("", "d.dat").unwrap().is_empty());
    }

    #[test]
    fn enum_and_constant() {
        let d = parse_data("enum e := {A,B}; int k := 2;", "d.dat").unwrap();
        assert_eq!(d.enums["e"].values, vec!["A", "B"]);
        assert_eq!(d.constants["k"].value.kind, DataValueKind::Int(2));
    }

    #[test]
    fn duplicate_enum_value() {
        let err = parse_data("enum e := {A,B,A};", "d.dat").unwrap_err();
        assert!(err.0[0].message.contains("duplicate value `A`"));
    }

    #[test]
    fn mixed_keyed_and_positional() {
        let err = parse_data("int k := [A:1, 2];", "d.dat").unwrap_err();
        assert!(err.0[0].message.contains("mixed"));
    }

    #[test]
    fn object_literals_with_omission() {
        let d = parse_data("Man M.man := [R: {[H:5, T:1], _}];", "d.dat").unwrap();
        let a = &d.assignments[0];
        assert_eq!(a.path, vec!["M", "man"]);
        let DataValueKind::Keyed(entries) = &a.value.kind else {
            panic!()
        };
        let DataValueKind::Braced(fields) = &entries[0].1.kind else {
            panic!()
        };
        assert_eq!(fields[1].kind, DataValueKind::Omit);
    }
}
