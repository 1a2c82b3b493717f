//! Chidamber–Kemerer metrics computed from the syntactic model.
//!
//! WMC uses unit method complexity and LCOM is the original LCOM1 floored at
//! zero. DIT only sees ancestors declared inside the snapshot.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::graph::TypeGraph;
use crate::model::{MethodDecl, Receiver, Signature, TypeDecl};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CKVector {
    pub class_name: String,
    pub dit: usize,
    pub noc: usize,
    pub loc: usize,
    pub lcom: usize,
    pub wmc: usize,
    pub rfc: usize,
    pub cbo: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CkOptions {
    /// Treat constructors as methods for WMC, RFC and LCOM.
    pub include_constructors: bool,
}

impl Default for CkOptions {
    fn default() -> Self {
        Self { include_constructors: true }
    }
}

pub fn compute_ck(class: &TypeDecl, graph: &TypeGraph) -> CKVector {
    compute_ck_with(class, graph, &CkOptions::default())
}

pub fn compute_ck_with(class: &TypeDecl, graph: &TypeGraph, options: &CkOptions) -> CKVector {
    let name = class.qualified_name.as_str();
    let methods: Vec<&MethodDecl> =
        class.methods.iter().filter(|m| options.include_constructors || !m.constructor).collect();

    let own: BTreeSet<Signature> = methods.iter().map(|m| m.signature()).collect();
    let invoked: BTreeSet<Signature> =
        methods.iter().flat_map(|m| &m.invocations).map(|c| c.signature()).filter(|s| !own.contains(s)).collect();

    CKVector {
        class_name: class.qualified_name.clone(),
        dit: graph.ancestors(name).len(),
        noc: graph.subclasses(name).len(),
        loc: class.loc_physical,
        lcom: lcom1(&methods),
        wmc: methods.len(),
        rfc: methods.len() + invoked.len(),
        cbo: coupled_types(class, graph).len(),
    }
}

/// max(0, P − Q) over all method pairs, where P counts pairs with no
/// shared field access and Q pairs sharing at least one field.
fn lcom1(methods: &[&MethodDecl]) -> usize {
    let sets: Vec<BTreeSet<&str>> =
        methods.iter().map(|m| m.accessed_fields.iter().map(String::as_str).collect()).collect();
    let (mut disjoint, mut sharing) = (0usize, 0usize);
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            if sets[i].is_disjoint(&sets[j]) {
                disjoint += 1;
            } else {
                sharing += 1;
            }
        }
    }
    disjoint.saturating_sub(sharing)
}

/// Other snapshot types referenced through field, parameter and return
/// types, call receivers, and supertype edges.
pub fn coupled_types<'g>(class: &TypeDecl, graph: &'g TypeGraph) -> BTreeSet<&'g str> {
    let from = class.qualified_name.as_str();
    let mut raw: Vec<&str> = Vec::new();
    raw.extend(class.fields.iter().map(|f| f.declared_type_name.as_str()));
    for m in &class.methods {
        raw.extend(m.parameters.iter().map(|p| p.type_name.as_str()));
        raw.extend(m.return_type.as_deref());
        for call in &m.invocations {
            match &call.receiver {
                Receiver::Variable { type_name, .. } => raw.push(type_name),
                Receiver::Name { name } => raw.push(name),
                _ => {}
            }
        }
    }

    let mut out: BTreeSet<&str> = raw.into_iter().filter_map(|r| graph.resolve(from, r)).collect();
    if let Some(sup) = graph.super_edges.get(from).filter(|e| e.resolved) {
        out.extend(graph.get(&sup.name).map(|t| t.qualified_name.as_str()));
    }
    for iface in graph.interfaces_of(from).filter(|e| e.resolved) {
        out.extend(graph.get(&iface.name).map(|t| t.qualified_name.as_str()));
    }
    out.remove(from);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::java::parse_compilation_unit;

    fn graph(files: &[(&str, &str)]) -> TypeGraph {
        let units: Vec<_> = files.iter().map(|(p, s)| parse_compilation_unit(s, p).unwrap()).collect();
        TypeGraph::build(&units).unwrap()
    }

    #[test]
    fn no_extends_means_dit_zero() {
        let g = graph(&[("A.java", "class A {}")]);
        assert_eq!(compute_ck(g.get("A").unwrap(), &g).dit, 0);
    }

    #[test]
    fn three_methods_no_shared_fields() {
        let g = graph(&[("A.java", "class A { int x, y, z; void a(){ x++; } void b(){ y++; } void c(){ z++; } }")]);
        let ck = compute_ck(g.get("A").unwrap(), &g);
        assert_eq!((ck.lcom, ck.wmc), (3, 3));
    }

    #[test]
    fn rfc_is_own_plus_distinct_invoked() {
        let g = graph(&[(
            "A.java",
            "class A { void a(){ System.out.println(); } void b(){ Math.abs(1); System.out.println(); } void c(){ a(); } }",
        )]);
        assert_eq!(compute_ck(g.get("A").unwrap(), &g).rfc, 5);
    }

    #[test]
    fn lcom_zero_with_at_most_one_method() {
        let g = graph(&[("A.java", "class A { int x; void a(){ } }"), ("B.java", "class B {}")]);
        assert_eq!(compute_ck(g.get("A").unwrap(), &g).lcom, 0);
        assert_eq!(compute_ck(g.get("B").unwrap(), &g).lcom, 0);
    }

    #[test]
    fn dit_noc_and_cbo() {
        let g = graph(&[
            ("A.java", "class A extends B implements I { Engine e; Wheel w(Tyre t){ Util.help(); return null; } }"),
            ("B.java", "class B extends C {}"),
            ("C.java", "import java.util.ArrayList; class C extends ArrayList {}"),
            ("D.java", "class D extends B {}"),
            ("I.java", "interface I {}"),
            ("Engine.java", "class Engine {}"),
            ("Wheel.java", "class Wheel {}"),
            ("Tyre.java", "class Tyre {}"),
            ("Util.java", "class Util { static void help(){} }"),
        ]);
        let a = compute_ck(g.get("A").unwrap(), &g);
        assert_eq!(a.dit, 2);
        assert_eq!(a.noc, 0);
        // B, I, Engine, Wheel, Tyre, Util
        assert_eq!(a.cbo, 6);
        let b = compute_ck(g.get("B").unwrap(), &g);
        assert_eq!(b.noc, 2);
        assert_eq!(b.dit, 1);
    }

    #[test]
    fn constructors_switch() {
        let g = graph(&[("A.java", "class A { int x; A(){ x = 1; } void f(){ x++; } }")]);
        let a = g.get("A").unwrap();
        assert_eq!(compute_ck(a, &g).wmc, 2);
        let no_ctor = compute_ck_with(a, &g, &CkOptions { include_constructors: false });
        assert_eq!(no_ctor.wmc, 1);
    }
}
