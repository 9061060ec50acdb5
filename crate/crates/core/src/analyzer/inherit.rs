use std::collections::HashSet;

use crate::ast::{ClassDef, Model};
use crate::span::{Diagnostic, Diagnostics};

/// Name of the first class on an inheritance cycle through `start`, if any.
fn cycle_from(m: &Model, start: &ClassDef) -> Option<Vec<String>> {
    let mut chain = vec![start.name.clone()];
    let mut cur = start;
    while let Some(sup) = &cur.superclass {
        if chain.contains(sup) {
            chain.push(sup.clone());
            return Some(chain);
        }
        chain.push(sup.clone());
        cur = m.class(sup)?;
    }
    None
}

/// Reports unknown superclasses and inheritance cycles, each cycle once.
pub(crate) fn check_inheritance(m: &Model) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut reported: HashSet<String> = HashSet::new();
    for class in &m.classes {
        if let Some(sup) = &class.superclass {
            if m.class(sup).is_none() {
                diags.push(Diagnostic::error(
                    class.span.clone(),
                    format!("class `{}` extends unknown class `{sup}`", class.name),
                ));
                continue;
            }
        }
        if let Some(chain) = cycle_from(m, class) {
            let last = chain.last().unwrap();
            let first = chain.iter().position(|c| c == last).unwrap();
            let members: Vec<&String> = chain[first..chain.len() - 1].iter().collect();
            if members.iter().any(|c| reported.contains(*c)) {
                continue;
            }
            reported.extend(members.iter().map(|c| c.to_string()));
            let names: Vec<&str> = members.iter().map(|s| s.as_str()).collect();
            diags.push(Diagnostic::error(
                class.span.clone(),
                format!("inheritance cycle: {}", names.join(" -> ")),
            ));
        }
    }
    diags
}

/// Copies every superclass's attributes and zones into its subclasses
/// (superclass members first) and drops `extends` links.
pub fn linearize_inheritance(m: &Model) -> Result<Model, Diagnostics> {
    let diags = check_inheritance(m);
    if !diags.is_empty() {
        return Err(Diagnostics(diags));
    }
    let mut diags = Vec::new();
    let mut classes = Vec::new();
    for class in &m.classes {
        let mut lineage = vec![class];
        while let Some(sup) = &lineage.last().unwrap().superclass {
            lineage.push(m.class(sup).expect("checked above"));
        }
        let mut out = ClassDef {
            name: class.name.clone(),
            superclass: None,
            attributes: Vec::new(),
            zones: Vec::new(),
            span: class.span.clone(),
        };
        for ancestor in lineage.iter().rev() {
            for attr in &ancestor.attributes {
                if let Some(prev) = out.attributes.iter().find(|a| a.name == attr.name) {
                    let msg = if ancestor.name == class.name && prev.span != attr.span {
                        format!(
                            "attribute `{}` of class `{}` collides with an inherited attribute",
                            attr.name, class.name
                        )
                    } else {
                        format!("attribute `{}` declared twice in class `{}`", attr.name, class.name)
                    };
                    diags.push(Diagnostic::error(attr.span.clone(), msg));
                    continue;
                }
                out.attributes.push(attr.clone());
            }
            for zone in &ancestor.zones {
                if out.zones.iter().any(|z| z.name == zone.name) {
                    diags.push(Diagnostic::error(
                        zone.span.clone(),
                        format!("constraint zone `{}` declared twice in class `{}`", zone.name, class.name),
                    ));
                    continue;
                }
                out.zones.push(zone.clone());
            }
        }
        classes.push(out);
    }
    if !diags.is_empty() {
        return Err(Diagnostics(diags));
    }
    Ok(Model {
        classes,
        ..m.clone()
    })
}
