//! Snapshot-wide type graph.
//!
//! Names are resolved in Java lookup order: member types of the
//! lexically enclosing types, single-type imports, the declaring package,
//! on-demand imports, and finally a unique simple-name match across the
//! snapshot. Edges whose targets stay unresolved are kept and marked
//! external.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::ModelError;
use crate::model::{CompilationUnitModel, Import, Nesting, TypeDecl, TypeKind};

/// A supertype reference. `name` is a qualified name when `resolved`,
/// otherwise the best textual name available for the external type.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TypeRef {
    pub name: String,
    pub resolved: bool,
}

impl TypeRef {
    fn internal(name: &str) -> Self {
        Self { name: name.to_string(), resolved: true }
    }

    fn external(name: impl Into<String>) -> Self {
        Self { name: name.into(), resolved: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct ResolutionContext {
    path: String,
    package: String,
    imports: Vec<Import>,
    /// The type itself followed by its lexically enclosing types.
    scopes: Vec<String>,
}

/// Resolved declarations of one snapshot. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeGraph {
    pub types: BTreeMap<String, TypeDecl>,
    pub super_edges: BTreeMap<String, TypeRef>,
    pub impl_edges: BTreeMap<String, BTreeSet<TypeRef>>,
    contexts: BTreeMap<String, ResolutionContext>,
    /// Enclosing type → (simple name → qualified name) of member, local
    /// and named nested types.
    members: BTreeMap<String, BTreeMap<String, String>>,
    /// Simple name → qualified names of named, non-local types.
    by_simple_name: BTreeMap<String, Vec<String>>,
    /// Resolved superclass → direct subclasses.
    children: BTreeMap<String, Vec<String>>,
}

/// `java.lang` types that must never be matched against same-named
/// snapshot types in other packages.
const JAVA_LANG: &[&str] = &[
    "Object", "String", "Integer", "Long", "Short", "Byte", "Double", "Float", "Boolean", "Character",
    "Number", "Math", "System", "Thread", "Runnable", "Exception", "RuntimeException", "Error", "Throwable",
    "Iterable", "Comparable", "CharSequence", "StringBuilder", "StringBuffer", "Class", "Enum", "Record",
    "Cloneable", "AutoCloseable", "Override", "Deprecated", "Void", "IllegalArgumentException",
    "IllegalStateException", "NullPointerException", "UnsupportedOperationException",
    "IndexOutOfBoundsException", "ClassCastException", "ArithmeticException", "InterruptedException",
    "CloneNotSupportedException", "SuppressWarnings", "FunctionalInterface", "SafeVarargs",
];

impl TypeGraph {
    /// Builds and cycle-checks the graph for one snapshot. The result does
    /// not depend on the order of `units`.
    pub fn build<'a>(units: impl IntoIterator<Item = &'a CompilationUnitModel>) -> Result<Self, ModelError> {
        let mut order: Vec<&CompilationUnitModel> = units.into_iter().collect();
        order.sort_by(|a, b| a.path.cmp(&b.path));
        for pair in order.windows(2) {
            if pair[0].path == pair[1].path {
                return Err(ModelError::DuplicatePath(pair[0].path.clone()));
            }
        }

        let mut graph = TypeGraph {
            types: BTreeMap::new(),
            super_edges: BTreeMap::new(),
            impl_edges: BTreeMap::new(),
            contexts: BTreeMap::new(),
            members: BTreeMap::new(),
            by_simple_name: BTreeMap::new(),
            children: BTreeMap::new(),
        };

        for unit in order {
            for decl in &unit.types {
                if let Some(prev) = graph.contexts.get(&decl.qualified_name) {
                    return Err(ModelError::DuplicateType {
                        name: decl.qualified_name.clone(),
                        first: prev.path.clone(),
                        second: unit.path.clone(),
                    });
                }
                let mut scopes = vec![decl.qualified_name.clone()];
                let mut enclosing = decl.enclosing.clone();
                while let Some(e) = enclosing {
                    enclosing = unit.types.iter().find(|t| t.qualified_name == e).and_then(|t| t.enclosing.clone());
                    scopes.push(e);
                }
                graph.contexts.insert(
                    decl.qualified_name.clone(),
                    ResolutionContext {
                        path: unit.path.clone(),
                        package: unit.package.clone(),
                        imports: unit.imports.clone(),
                        scopes,
                    },
                );
                if let (Some(enc), true) = (&decl.enclosing, decl.nesting != Nesting::Anonymous) {
                    graph
                        .members
                        .entry(enc.clone())
                        .or_default()
                        .insert(decl.simple_name.clone(), decl.qualified_name.clone());
                }
                if matches!(decl.nesting, Nesting::TopLevel | Nesting::Member) {
                    graph.by_simple_name.entry(decl.simple_name.clone()).or_default().push(decl.qualified_name.clone());
                }
                graph.types.insert(decl.qualified_name.clone(), decl.clone());
            }
        }

        let names: Vec<String> = graph.types.keys().cloned().collect();
        for name in &names {
            let decl = &graph.types[name];
            let mut interfaces: BTreeSet<TypeRef> =
                decl.interface_names.iter().map(|raw| graph.resolve_ref(name, raw)).collect();
            if let Some(raw) = &decl.superclass_name {
                let target = graph.resolve_ref(name, raw);
                let target_is_interface =
                    target.resolved && graph.types.get(&target.name).map(TypeDecl::is_interface).unwrap_or(false);
                if decl.nesting == Nesting::Anonymous && target_is_interface {
                    interfaces.insert(target);
                } else {
                    graph.super_edges.insert(name.clone(), target);
                }
            }
            if !interfaces.is_empty() {
                graph.impl_edges.insert(name.clone(), interfaces);
            }
        }
        for (child, parent) in &graph.super_edges {
            if parent.resolved {
                graph.children.entry(parent.name.clone()).or_default().push(child.clone());
            }
        }

        graph.check_cycles()?;
        Ok(graph)
    }

    fn check_cycles(&self) -> Result<(), ModelError> {
        // 0 = unvisited, 1 = on the current chain, 2 = done.
        let mut state: BTreeMap<&str, u8> = BTreeMap::new();
        for start in self.types.keys() {
            if state.get(start.as_str()).copied().unwrap_or(0) != 0 {
                continue;
            }
            let mut chain: Vec<&str> = Vec::new();
            let mut cur = Some(start.as_str());
            while let Some(node) = cur {
                match state.get(node).copied().unwrap_or(0) {
                    1 => {
                        let pos = chain.iter().position(|&n| n == node).unwrap_or(0);
                        let mut cycle: Vec<String> = chain[pos..].iter().map(|s| s.to_string()).collect();
                        cycle.push(node.to_string());
                        return Err(ModelError::Cycle { cycle });
                    }
                    2 => break,
                    _ => {}
                }
                state.insert(node, 1);
                chain.push(node);
                cur = self.super_edges.get(node).filter(|e| e.resolved).map(|e| e.name.as_str());
            }
            for n in chain {
                state.insert(n, 2);
            }
        }
        Ok(())
    }

    pub fn get(&self, qualified_name: &str) -> Option<&TypeDecl> {
        self.types.get(qualified_name)
    }

    /// Resolves a raw type name as seen from inside `from`. Returns the
    /// qualified name of a snapshot type, or `None` for external types.
    pub fn resolve(&self, from: &str, raw: &str) -> Option<&str> {
        let r = self.resolve_ref(from, raw);
        if r.resolved {
            self.types.get_key_value(&r.name).map(|(k, _)| k.as_str())
        } else {
            None
        }
    }

    /// Like [`resolve`](Self::resolve) but keeps a name for external types.
    pub fn resolve_ref(&self, from: &str, raw: &str) -> TypeRef {
        let raw = crate::model::element_type(raw);
        if raw.is_empty() || crate::model::is_primitive(raw) {
            return TypeRef::external(raw);
        }
        let Some(ctx) = self.contexts.get(from) else {
            return match self.types.contains_key(raw) {
                true => TypeRef::internal(raw),
                false => TypeRef::external(raw),
            };
        };
        if let Some((head, rest)) = raw.split_once('.') {
            if self.types.contains_key(raw) {
                return TypeRef::internal(raw);
            }
            if let Some(h) = self.resolve_simple(ctx, head).filter(|h| h.resolved) {
                let candidate = format!("{}.{}", h.name, rest);
                if self.types.contains_key(&candidate) {
                    return TypeRef::internal(&candidate);
                }
            }
            return TypeRef::external(raw);
        }
        self.resolve_simple(ctx, raw).unwrap_or_else(|| TypeRef::external(raw))
    }

    fn resolve_simple(&self, ctx: &ResolutionContext, name: &str) -> Option<TypeRef> {
        for scope in &ctx.scopes {
            if let Some(q) = self.members.get(scope).and_then(|m| m.get(name)) {
                return Some(TypeRef::internal(q));
            }
            if let Some(t) = self.types.get(scope) {
                if t.simple_name == name && t.nesting != Nesting::Anonymous {
                    return Some(TypeRef::internal(scope));
                }
            }
        }
        for imp in ctx.imports.iter().filter(|i| !i.wildcard && !i.is_static) {
            if imp.simple_name() == name {
                return Some(if self.types.contains_key(&imp.name) {
                    TypeRef::internal(&imp.name)
                } else {
                    TypeRef::external(imp.name.clone())
                });
            }
        }
        let same_package = if ctx.package.is_empty() { name.to_string() } else { format!("{}.{}", ctx.package, name) };
        if self.types.contains_key(&same_package) {
            return Some(TypeRef::internal(&same_package));
        }
        for imp in ctx.imports.iter().filter(|i| i.wildcard && !i.is_static) {
            let candidate = format!("{}.{}", imp.name, name);
            if self.types.contains_key(&candidate) {
                return Some(TypeRef::internal(&candidate));
            }
        }
        if JAVA_LANG.contains(&name) {
            return Some(TypeRef::external(name));
        }
        match self.by_simple_name.get(name).map(Vec::as_slice) {
            Some([only]) => Some(TypeRef::internal(only)),
            _ => None,
        }
    }

    /// Resolved superclass chain, nearest ancestor first.
    pub fn ancestors(&self, class: &str) -> Vec<&TypeDecl> {
        let mut out = Vec::new();
        let mut cur = class;
        while let Some(edge) = self.super_edges.get(cur).filter(|e| e.resolved) {
            match self.types.get(&edge.name) {
                Some(t) => {
                    out.push(t);
                    cur = &edge.name;
                }
                None => break,
            }
        }
        out
    }

    /// The first unresolved superclass reached walking up from `class`.
    pub fn external_ancestor(&self, class: &str) -> Option<&TypeRef> {
        let mut cur = class;
        loop {
            let edge = self.super_edges.get(cur)?;
            if !edge.resolved {
                return Some(edge);
            }
            cur = &edge.name;
        }
    }

    /// Classes whose resolved superclass edge targets `class`.
    pub fn subclasses(&self, class: &str) -> &[String] {
        self.children.get(class).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn interfaces_of(&self, ty: &str) -> impl Iterator<Item = &TypeRef> {
        self.impl_edges.get(ty).into_iter().flatten()
    }

    pub fn path_of(&self, ty: &str) -> Option<&str> {
        self.contexts.get(ty).map(|c| c.path.as_str())
    }

    pub fn kind_of(&self, ty: &str) -> Option<TypeKind> {
        self.types.get(ty).map(|t| t.kind)
    }
}
