//! Java front end: turns source text into a [`CompilationUnitModel`].
//!
//! Parsing is delegated to tree-sitter; this module walks the concrete
//! syntax tree once, tracking lexical scopes so that every occurrence of a
//! field or local variable can be attributed to its declaration.

use std::collections::{BTreeSet, HashMap};

use tree_sitter::{Node, Parser};

use crate::error::ModelError;
use crate::model::*;

/// Parses one Java source file.
///
/// A file without type declarations yields a model with no types. Any
/// syntax error reported by the grammar is fatal for the file.
pub fn parse_compilation_unit(source: &str, path: &str) -> Result<CompilationUnitModel, ModelError> {
    if path.is_empty() {
        return Err(ModelError::EmptyPath);
    }
    let mut parser = Parser::new();
    parser
        .set_language(&tree_sitter_java::LANGUAGE.into())
        .expect("tree-sitter-java grammar is ABI compatible");
    let tree = parser.parse(source, None).ok_or_else(|| ModelError::Parse {
        path: path.to_string(),
        line: 1,
        message: "parser produced no tree".into(),
    })?;
    let root = tree.root_node();
    if root.has_error() {
        let (line, message) = first_error(root, source.as_bytes());
        return Err(ModelError::Parse { path: path.to_string(), line, message });
    }

    let mut ex = Extractor::new(source.as_bytes(), root);
    let mut imports = Vec::new();
    let mut cursor = root.walk();
    for child in root.named_children(&mut cursor) {
        match child.kind() {
            "package_declaration" => ex.package = package_name(child, ex.src),
            "import_declaration" => imports.push(import(child, ex.src)),
            _ => {}
        }
    }
    let mut cursor = root.walk();
    for child in root.named_children(&mut cursor) {
        if is_type_declaration(child.kind()) {
            ex.visit_type(child, Nesting::TopLevel, None);
        }
    }

    Ok(CompilationUnitModel {
        path: path.to_string(),
        package: ex.package.clone(),
        imports,
        types: ex.finish(),
    })
}

fn first_error(root: Node<'_>, src: &[u8]) -> (usize, String) {
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        if node.is_error() {
            let snippet: String = node.utf8_text(src).unwrap_or("").chars().take(40).collect();
            return (node.start_position().row + 1, format!("unexpected `{}`", snippet.trim()));
        }
        if node.is_missing() {
            return (node.start_position().row + 1, format!("missing `{}`", node.kind()));
        }
        let mut cursor = node.walk();
        let children: Vec<_> = node.children(&mut cursor).filter(|c| c.has_error()).collect();
        stack.extend(children.into_iter().rev());
    }
    (root.start_position().row + 1, "syntax error".into())
}

fn is_type_declaration(kind: &str) -> bool {
    matches!(
        kind,
        "class_declaration"
            | "interface_declaration"
            | "enum_declaration"
            | "record_declaration"
            | "annotation_type_declaration"
    )
}

fn is_type_node(kind: &str) -> bool {
    matches!(
        kind,
        "type_identifier"
            | "scoped_type_identifier"
            | "generic_type"
            | "array_type"
            | "integral_type"
            | "floating_point_type"
            | "boolean_type"
            | "void_type"
            | "type_arguments"
            | "type_parameters"
            | "dimensions"
            | "modifiers"
            | "marker_annotation"
            | "annotation"
            | "annotated_type"
            | "line_comment"
            | "block_comment"
    )
}

fn text<'a>(node: Node<'_>, src: &'a [u8]) -> &'a str {
    node.utf8_text(src).unwrap_or("")
}

fn package_name(node: Node<'_>, src: &[u8]) -> String {
    let mut cursor = node.walk();
    let name = node
        .named_children(&mut cursor)
        .find(|c| matches!(c.kind(), "scoped_identifier" | "identifier"))
        .map(|c| text(c, src).to_string())
        .unwrap_or_default();
    name
}

fn import(node: Node<'_>, src: &[u8]) -> Import {
    let mut cursor = node.walk();
    let mut imp = Import { name: String::new(), wildcard: false, is_static: false };
    for c in node.children(&mut cursor) {
        match c.kind() {
            "static" => imp.is_static = true,
            "asterisk" => imp.wildcard = true,
            "scoped_identifier" | "identifier" => imp.name = text(c, src).to_string(),
            _ => {}
        }
    }
    imp
}

/// Raw type name with generic arguments and annotations removed.
fn erase(node: Node<'_>, src: &[u8]) -> String {
    match node.kind() {
        "generic_type" => {
            let mut cursor = node.walk();
            let base = node
                .named_children(&mut cursor)
                .find(|c| c.kind() != "type_arguments")
                .map(|c| erase(c, src))
                .unwrap_or_default();
            base
        }
        "scoped_type_identifier" => {
            let mut cursor = node.walk();
            let parts: Vec<String> = node
                .named_children(&mut cursor)
                .filter(|c| !matches!(c.kind(), "annotation" | "marker_annotation"))
                .map(|c| erase(c, src))
                .collect();
            parts.join(".")
        }
        "array_type" => {
            let element = node.child_by_field_name("element").map(|e| erase(e, src)).unwrap_or_default();
            let dims = node.child_by_field_name("dimensions").map(|d| dimension_count(d, src)).unwrap_or(1);
            format!("{element}{}", "[]".repeat(dims))
        }
        "annotated_type" => {
            let mut cursor = node.walk();
            let inner = node
                .named_children(&mut cursor)
                .filter(|c| !matches!(c.kind(), "annotation" | "marker_annotation"))
                .last()
                .map(|c| erase(c, src))
                .unwrap_or_default();
            inner
        }
        _ => text(node, src).trim().to_string(),
    }
}

fn dimension_count(node: Node<'_>, src: &[u8]) -> usize {
    text(node, src).matches('[').count()
}

fn argument_count(args: Option<Node<'_>>) -> usize {
    args.map(|a| {
        let mut cursor = a.walk();
        let n = a.named_children(&mut cursor).filter(|c| !c.is_extra()).count();
        n
    })
    .unwrap_or(0)
}

fn line_of(node: Node<'_>) -> usize {
    node.start_position().row + 1
}

struct TypeBuilder {
    decl: TypeDecl,
    field_ids: Vec<usize>,
    method_ids: Vec<usize>,
    anonymous_count: usize,
    local_count: usize,
}

struct MethodBuilder {
    owner: usize,
    decl: MethodDecl,
    local_ids: Vec<usize>,
    accessed: BTreeSet<String>,
}

struct VarBuilder {
    decl: VarDecl,
    owner_type: usize,
    /// (plain `=` assignment, inside constructor or initializer) per use.
    assign_info: Vec<(bool, bool)>,
}

enum Frame {
    Fields { names: HashMap<String, usize> },
    /// `None` marks names that shadow outer declarations but are not
    /// tracked (parameters, catch and lambda parameters, pattern bindings).
    Locals(HashMap<String, Option<usize>>),
}

struct Extractor<'s> {
    src: &'s [u8],
    package: String,
    code_rows: Vec<bool>,
    types: Vec<TypeBuilder>,
    methods: Vec<MethodBuilder>,
    vars: Vec<VarBuilder>,
    frames: Vec<Frame>,
    type_stack: Vec<usize>,
    current_method: Option<usize>,
    in_constructor: bool,
}

impl<'s> Extractor<'s> {
    fn new(src: &'s [u8], root: Node<'_>) -> Self {
        let rows = root.end_position().row + 1;
        let mut code_rows = vec![false; rows];
        mark_code_rows(root, &mut code_rows);
        Self {
            src,
            package: String::new(),
            code_rows,
            types: Vec::new(),
            methods: Vec::new(),
            vars: Vec::new(),
            frames: Vec::new(),
            type_stack: Vec::new(),
            current_method: None,
            in_constructor: false,
        }
    }

    fn loc(&self, node: Node<'_>) -> usize {
        let start = node.start_position().row;
        let end = node.end_position().row.min(self.code_rows.len().saturating_sub(1));
        self.code_rows[start..=end].iter().filter(|&&b| b).count()
    }

    fn qualify(&mut self, nesting: Nesting, simple: &str) -> String {
        let outer = self.type_stack.last().copied();
        match (nesting, outer) {
            (Nesting::TopLevel, _) | (_, None) => {
                if self.package.is_empty() {
                    simple.to_string()
                } else {
                    format!("{}.{}", self.package, simple)
                }
            }
            (Nesting::Member, Some(o)) => format!("{}.{}", self.types[o].decl.qualified_name, simple),
            (Nesting::Local, Some(o)) => {
                self.types[o].local_count += 1;
                format!("{}${}{}", self.types[o].decl.qualified_name, self.types[o].local_count, simple)
            }
            (Nesting::Anonymous, Some(o)) => {
                self.types[o].anonymous_count += 1;
                format!("{}${}", self.types[o].decl.qualified_name, self.types[o].anonymous_count)
            }
        }
    }

    /// Visits a named type declaration, or the class body of an anonymous
    /// class when `anonymous_super` is given.
    fn visit_type(&mut self, node: Node<'_>, nesting: Nesting, anonymous_super: Option<String>) {
        let src = self.src;
        let (simple, kind, body) = if nesting == Nesting::Anonymous {
            (String::new(), TypeKind::Class, Some(node))
        } else {
            let name = node.child_by_field_name("name").map(|n| text(n, src).to_string()).unwrap_or_default();
            let kind = match node.kind() {
                "interface_declaration" | "annotation_type_declaration" => TypeKind::Interface,
                "enum_declaration" => TypeKind::Enum,
                _ => TypeKind::Class,
            };
            (name, kind, node.child_by_field_name("body"))
        };
        let qualified_name = self.qualify(nesting, &simple);
        let simple_name = if nesting == Nesting::Anonymous {
            qualified_name.rsplit('.').next().unwrap_or(&qualified_name).to_string()
        } else {
            simple
        };

        let mut superclass_name = anonymous_super;
        let mut interface_names = Vec::new();
        if nesting != Nesting::Anonymous {
            if let Some(sc) = node.child_by_field_name("superclass") {
                let mut cursor = sc.walk();
                superclass_name = sc.named_children(&mut cursor).next().map(|t| erase(t, src));
            }
            if let Some(si) = node.child_by_field_name("interfaces") {
                interface_names.extend(type_list(si, src));
            }
            let mut cursor = node.walk();
            for c in node.named_children(&mut cursor) {
                if c.kind() == "extends_interfaces" {
                    interface_names.extend(type_list(c, src));
                }
            }
        }
        if kind == TypeKind::Interface {
            superclass_name = None;
        }

        let enclosing = self.type_stack.last().map(|&o| self.types[o].decl.qualified_name.clone());
        let loc_node = if nesting == Nesting::Anonymous { node.parent().unwrap_or(node) } else { node };
        let idx = self.types.len();
        self.types.push(TypeBuilder {
            decl: TypeDecl {
                qualified_name,
                simple_name,
                kind,
                nesting,
                enclosing,
                superclass_name,
                interface_names,
                fields: Vec::new(),
                methods: Vec::new(),
                loc_physical: self.loc(loc_node).max(1),
            },
            field_ids: Vec::new(),
            method_ids: Vec::new(),
            anonymous_count: 0,
            local_count: 0,
        });

        let saved_method = self.current_method.take();
        let saved_ctor = self.in_constructor;
        self.type_stack.push(idx);

        let mut members = Vec::new();
        if node.kind() == "record_declaration" {
            if let Some(params) = node.child_by_field_name("parameters") {
                members.push(params);
            }
        }
        if let Some(body) = body {
            collect_members(body, &mut members);
        }

        // Declare every field before walking any body so forward references
        // from methods resolve.
        let mut names = HashMap::new();
        for &m in &members {
            match m.kind() {
                "field_declaration" | "constant_declaration" => {
                    let ty = m.child_by_field_name("type").map(|t| erase(t, src)).unwrap_or_default();
                    let mut cursor = m.walk();
                    for d in m.children_by_field_name("declarator", &mut cursor) {
                        let id = self.declare_var(d, &ty, VarScope::Field, idx);
                        names.insert(self.vars[id].decl.name.clone(), id);
                        self.types[idx].field_ids.push(id);
                    }
                }
                "formal_parameters" => {
                    let mut cursor = m.walk();
                    for p in m.named_children(&mut cursor).filter(|p| p.kind() == "formal_parameter") {
                        let (name, ty) = parameter(p, src);
                        let id = self.vars.len();
                        self.vars.push(VarBuilder {
                            decl: VarDecl {
                                name: name.clone(),
                                declared_type_name: ty,
                                scope: VarScope::Field,
                                initialized: true,
                                line: line_of(p),
                                uses: Vec::new(),
                            },
                            owner_type: idx,
                            assign_info: Vec::new(),
                        });
                        names.insert(name, id);
                        self.types[idx].field_ids.push(id);
                    }
                }
                _ => {}
            }
        }
        self.frames.push(Frame::Fields { names });

        for &m in &members {
            match m.kind() {
                "field_declaration" | "constant_declaration" => {
                    self.in_constructor = true;
                    let mut cursor = m.walk();
                    let values: Vec<_> = m
                        .children_by_field_name("declarator", &mut cursor)
                        .filter_map(|d| d.child_by_field_name("value"))
                        .collect();
                    for v in values {
                        self.walk(v);
                    }
                    self.in_constructor = false;
                }
                "method_declaration" | "constructor_declaration" | "compact_constructor_declaration" => {
                    self.visit_method(m, idx);
                }
                "block" | "static_initializer" => {
                    self.in_constructor = true;
                    self.walk(m);
                    self.in_constructor = false;
                }
                "enum_constant" => {
                    if let Some(args) = m.child_by_field_name("arguments") {
                        self.in_constructor = true;
                        self.walk(args);
                        self.in_constructor = false;
                    }
                    if let Some(body) = m.child_by_field_name("body") {
                        let enum_name = self.types[idx].decl.simple_name.clone();
                        self.visit_type(body, Nesting::Anonymous, Some(enum_name));
                    }
                }
                k if is_type_declaration(k) => self.visit_type(m, Nesting::Member, None),
                _ => {}
            }
        }

        self.frames.pop();
        self.type_stack.pop();
        self.current_method = saved_method;
        self.in_constructor = saved_ctor;
    }

    fn visit_method(&mut self, node: Node<'_>, owner: usize) {
        let src = self.src;
        let constructor = node.kind() != "method_declaration";
        let name = node.child_by_field_name("name").map(|n| text(n, src).to_string()).unwrap_or_default();
        let mut parameters = Vec::new();
        let compact = node.kind() == "compact_constructor_declaration";
        if compact {
            // Record components are the implicit parameters.
            for &fid in &self.types[owner].field_ids {
                let v = &self.vars[fid].decl;
                parameters.push(Parameter { name: v.name.clone(), type_name: v.declared_type_name.clone() });
            }
        } else if let Some(params) = node.child_by_field_name("parameters") {
            let mut cursor = params.walk();
            for p in params.named_children(&mut cursor) {
                match p.kind() {
                    "formal_parameter" => {
                        let (n, t) = parameter(p, src);
                        parameters.push(Parameter { name: n, type_name: t });
                    }
                    "spread_parameter" => {
                        let mut c2 = p.walk();
                        let mut ty = String::new();
                        let mut pname = String::new();
                        for c in p.named_children(&mut c2) {
                            match c.kind() {
                                "variable_declarator" => {
                                    pname = c
                                        .child_by_field_name("name")
                                        .map(|n| text(n, src).to_string())
                                        .unwrap_or_default()
                                }
                                "modifiers" | "annotation" | "marker_annotation" => {}
                                _ => ty = erase(c, src),
                            }
                        }
                        parameters.push(Parameter { name: pname, type_name: format!("{ty}[]") });
                    }
                    _ => {}
                }
            }
        }
        let return_type = if constructor {
            None
        } else {
            node.child_by_field_name("type").map(|t| erase(t, src)).filter(|t| t != "void")
        };

        let id = self.methods.len();
        self.methods.push(MethodBuilder {
            owner,
            decl: MethodDecl {
                name,
                arity: parameters.len(),
                constructor,
                parameters: parameters.clone(),
                return_type,
                invocations: Vec::new(),
                accessed_fields: Vec::new(),
                locals: Vec::new(),
            },
            local_ids: Vec::new(),
            accessed: BTreeSet::new(),
        });
        self.types[owner].method_ids.push(id);

        if let Some(body) = node.child_by_field_name("body") {
            let saved = (self.current_method, self.in_constructor);
            self.current_method = Some(id);
            self.in_constructor = constructor;
            let scope = if compact {
                HashMap::new()
            } else {
                parameters.iter().map(|p| (p.name.clone(), None)).collect()
            };
            self.frames.push(Frame::Locals(scope));
            self.walk(body);
            self.frames.pop();
            (self.current_method, self.in_constructor) = saved;
        }
    }

    fn declare_var(&mut self, declarator: Node<'_>, base_type: &str, scope: VarScope, owner: usize) -> usize {
        let src = self.src;
        let name = declarator.child_by_field_name("name").map(|n| text(n, src).to_string()).unwrap_or_default();
        let dims = declarator.child_by_field_name("dimensions").map(|d| dimension_count(d, src)).unwrap_or(0);
        let id = self.vars.len();
        self.vars.push(VarBuilder {
            decl: VarDecl {
                name,
                declared_type_name: format!("{base_type}{}", "[]".repeat(dims)),
                scope,
                initialized: declarator.child_by_field_name("value").is_some(),
                line: line_of(declarator),
                uses: Vec::new(),
            },
            owner_type: owner,
            assign_info: Vec::new(),
        });
        id
    }

    fn declare_local(&mut self, declarator: Node<'_>, base_type: &str, initialized: bool) {
        let owner = self.type_stack.last().copied().unwrap_or(0);
        let id = self.declare_var(declarator, base_type, VarScope::Local, owner);
        self.vars[id].decl.initialized |= initialized;
        if let Some(m) = self.current_method {
            self.methods[m].local_ids.push(id);
        }
        let name = self.vars[id].decl.name.clone();
        self.bind(name, Some(id));
    }

    fn bind(&mut self, name: String, id: Option<usize>) {
        if let Some(Frame::Locals(map)) = self.frames.last_mut() {
            map.insert(name, id);
        } else {
            self.frames.push(Frame::Locals(HashMap::from([(name, id)])));
        }
    }

    fn lookup(&self, name: &str) -> Option<usize> {
        for frame in self.frames.iter().rev() {
            match frame {
                Frame::Locals(map) => {
                    if let Some(entry) = map.get(name) {
                        return *entry;
                    }
                }
                Frame::Fields { names, .. } => {
                    if let Some(&id) = names.get(name) {
                        return Some(id);
                    }
                }
            }
        }
        None
    }

    fn lookup_own_field(&self, name: &str) -> Option<usize> {
        self.frames.iter().rev().find_map(|f| match f {
            Frame::Fields { names, .. } => Some(names.get(name).copied()),
            Frame::Locals(_) => None,
        })?
    }

    fn record_use(&mut self, var: usize, occurrence: Node<'_>) {
        let (kind, plain) = classify(occurrence, self.src);
        self.vars[var].decl.uses.push(UseSite { kind, line: line_of(occurrence), initializing: false });
        self.vars[var].assign_info.push((plain, self.in_constructor));
        if let Some(m) = self.current_method {
            let v = &self.vars[var];
            if v.decl.scope == VarScope::Field && v.owner_type == self.methods[m].owner {
                let name = v.decl.name.clone();
                self.methods[m].accessed.insert(name);
            }
        }
    }

    fn with_scope(&mut self, f: impl FnOnce(&mut Self)) {
        self.frames.push(Frame::Locals(HashMap::new()));
        f(self);
        self.frames.pop();
    }

    fn walk_children(&mut self, node: Node<'_>) {
        let mut cursor = node.walk();
        let children: Vec<_> = node.named_children(&mut cursor).collect();
        for c in children {
            self.walk(c);
        }
    }

    fn walk(&mut self, node: Node<'_>) {
        let src = self.src;
        match node.kind() {
            k if is_type_node(k) => {}
            "block" | "constructor_body" | "switch_block" | "for_statement" | "catch_clause"
            | "try_with_resources_statement" => self.with_scope(|s| s.walk_children(node)),
            "enhanced_for_statement" => {
                if let Some(v) = node.child_by_field_name("value") {
                    self.walk(v);
                }
                self.with_scope(|s| {
                    let ty = node.child_by_field_name("type").map(|t| erase(t, src)).unwrap_or_default();
                    s.declare_local(node, &ty, true);
                    if let Some(b) = node.child_by_field_name("body") {
                        s.walk(b);
                    }
                });
            }
            "lambda_expression" => self.with_scope(|s| {
                if let Some(params) = node.child_by_field_name("parameters") {
                    for name in lambda_parameter_names(params, src) {
                        s.bind(name, None);
                    }
                }
                if let Some(b) = node.child_by_field_name("body") {
                    s.walk(b);
                }
            }),
            "local_variable_declaration" => {
                let ty = node.child_by_field_name("type").map(|t| erase(t, src)).unwrap_or_default();
                let mut cursor = node.walk();
                let decls: Vec<_> = node.children_by_field_name("declarator", &mut cursor).collect();
                for d in decls {
                    if let Some(v) = d.child_by_field_name("value") {
                        self.walk(v);
                    }
                    self.declare_local(d, &ty, false);
                }
            }
            "resource" => {
                if let Some(t) = node.child_by_field_name("type") {
                    if let Some(v) = node.child_by_field_name("value") {
                        self.walk(v);
                    }
                    let ty = erase(t, src);
                    self.declare_local(node, &ty, true);
                } else {
                    self.walk_children(node);
                }
            }
            "catch_formal_parameter" => {
                if let Some(n) = node.child_by_field_name("name") {
                    self.bind(text(n, src).to_string(), None);
                }
            }
            "formal_parameter" => {
                if let Some(n) = node.child_by_field_name("name") {
                    self.bind(text(n, src).to_string(), None);
                }
            }
            "instanceof_expression" => {
                if let Some(l) = node.child_by_field_name("left") {
                    self.walk(l);
                }
                if let Some(n) = node.child_by_field_name("name") {
                    self.bind(text(n, src).to_string(), None);
                }
                if let Some(p) = node.child_by_field_name("pattern") {
                    self.bind_pattern(p);
                }
            }
            "type_pattern" | "record_pattern" => self.bind_pattern(node),
            "method_invocation" => self.visit_call(node),
            "field_access" => {
                let object = node.child_by_field_name("object");
                let field = node.child_by_field_name("field");
                match (object, field) {
                    (Some(o), Some(f)) if o.kind() == "this" && f.kind() == "identifier" => {
                        if let Some(id) = self.lookup_own_field(text(f, src)) {
                            self.record_use(id, node);
                        }
                    }
                    (Some(o), _) if o.kind() != "super" => self.walk(o),
                    _ => {}
                }
            }
            "identifier" => {
                if let Some(id) = self.lookup(text(node, src)) {
                    self.record_use(id, node);
                }
            }
            "method_reference" => {
                if let Some(first) = node.named_child(0) {
                    if first.kind() != "super" {
                        self.walk(first);
                    }
                }
            }
            "object_creation_expression" => {
                let mut cursor = node.walk();
                let children: Vec<_> = node.named_children(&mut cursor).collect();
                let type_node = node.child_by_field_name("type");
                for c in &children {
                    if c.kind() == "class_body" || Some(*c) == type_node {
                        continue;
                    }
                    self.walk(*c);
                }
                if let Some(body) = children.iter().find(|c| c.kind() == "class_body") {
                    let sup = type_node.map(|t| erase(t, src));
                    self.visit_type(*body, Nesting::Anonymous, sup);
                }
            }
            k if is_type_declaration(k) => self.visit_type(node, Nesting::Local, None),
            "labeled_statement" => {
                let mut cursor = node.walk();
                let children: Vec<_> = node.named_children(&mut cursor).filter(|c| c.kind() != "identifier").collect();
                for c in children {
                    self.walk(c);
                }
            }
            "break_statement" | "continue_statement" | "class_literal" => {}
            _ => self.walk_children(node),
        }
    }

    fn bind_pattern(&mut self, node: Node<'_>) {
        let src = self.src;
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            let mut cursor = n.walk();
            for c in n.named_children(&mut cursor) {
                match c.kind() {
                    "identifier" => self.bind(text(c, src).to_string(), None),
                    "record_pattern" | "record_pattern_body" | "record_pattern_component" | "type_pattern" => {
                        stack.push(c)
                    }
                    _ => {}
                }
            }
        }
    }

    fn visit_call(&mut self, node: Node<'_>) {
        let src = self.src;
        let name = node.child_by_field_name("name").map(|n| text(n, src).to_string()).unwrap_or_default();
        let args = node.child_by_field_name("arguments");
        let object = node.child_by_field_name("object");
        let receiver = match object {
            None => Receiver::Implicit,
            Some(o) => match o.kind() {
                "this" => Receiver::This,
                "super" => Receiver::Super,
                "identifier" => {
                    let n = text(o, src);
                    match self.lookup(n) {
                        Some(id) => Receiver::Variable {
                            name: n.to_string(),
                            type_name: self.vars[id].decl.declared_type_name.clone(),
                        },
                        None if self.is_shadowed(n) => Receiver::Expression,
                        None => Receiver::Name { name: n.to_string() },
                    }
                }
                "field_access" => {
                    let fo = o.child_by_field_name("object");
                    let ff = o.child_by_field_name("field");
                    match (fo, ff) {
                        (Some(fo), Some(ff)) if fo.kind() == "this" => match self.lookup_own_field(text(ff, src)) {
                            Some(id) => Receiver::Variable {
                                name: self.vars[id].decl.name.clone(),
                                type_name: self.vars[id].decl.declared_type_name.clone(),
                            },
                            None => Receiver::Expression,
                        },
                        (Some(fo), _) if fo.kind() == "super" => Receiver::Expression,
                        _ => Receiver::Expression,
                    }
                }
                _ => Receiver::Expression,
            },
        };
        if let Some(m) = self.current_method {
            self.methods[m].decl.invocations.push(CallSite {
                name,
                arity: argument_count(args),
                receiver,
                line: line_of(node),
            });
        }
        if let Some(o) = object {
            self.walk(o);
        }
        if let Some(a) = args {
            self.walk(a);
        }
    }

    /// True when `name` is bound to an untracked local (parameter etc.).
    fn is_shadowed(&self, name: &str) -> bool {
        for frame in self.frames.iter().rev() {
            match frame {
                Frame::Locals(map) => {
                    if let Some(entry) = map.get(name) {
                        return entry.is_none();
                    }
                }
                Frame::Fields { names, .. } => {
                    if names.contains_key(name) {
                        return false;
                    }
                }
            }
        }
        false
    }

    fn finish(mut self) -> Vec<TypeDecl> {
        for v in &mut self.vars {
            mark_initializing(v);
        }
        let mut vars: Vec<Option<VarDecl>> = self.vars.into_iter().map(|v| Some(v.decl)).collect();
        let mut methods: Vec<Option<MethodBuilder>> = self.methods.into_iter().map(Some).collect();
        self.types
            .into_iter()
            .map(|tb| {
                let mut decl = tb.decl;
                decl.fields = tb.field_ids.iter().filter_map(|&i| vars[i].take()).collect();
                decl.methods = tb
                    .method_ids
                    .iter()
                    .filter_map(|&i| methods[i].take())
                    .map(|mb| {
                        let mut m = mb.decl;
                        m.locals = mb.local_ids.iter().filter_map(|&i| vars[i].take()).collect();
                        m.accessed_fields = mb.accessed.into_iter().collect();
                        m
                    })
                    .collect();
                decl
            })
            .collect()
    }
}

fn mark_initializing(v: &mut VarBuilder) {
    let plain: Vec<usize> = v
        .decl
        .uses
        .iter()
        .enumerate()
        .filter(|(i, u)| u.kind == UseKind::AssignmentTarget && v.assign_info[*i].0)
        .map(|(i, _)| i)
        .collect();
    if v.decl.scope == VarScope::Field {
        let in_ctor: Vec<usize> = plain.iter().copied().filter(|&i| v.assign_info[i].1).collect();
        if !in_ctor.is_empty() {
            for i in in_ctor {
                v.decl.uses[i].initializing = true;
            }
            return;
        }
    }
    if !v.decl.initialized {
        if let Some(&first) = plain.first() {
            v.decl.uses[first].initializing = true;
        }
    }
}

fn collect_members<'t>(body: Node<'t>, out: &mut Vec<Node<'t>>) {
    let mut cursor = body.walk();
    for c in body.named_children(&mut cursor) {
        if c.kind() == "enum_body_declarations" {
            collect_members(c, out);
        } else {
            out.push(c);
        }
    }
}

fn type_list(node: Node<'_>, src: &[u8]) -> Vec<String> {
    let mut out = Vec::new();
    let mut cursor = node.walk();
    for c in node.named_children(&mut cursor) {
        if c.kind() == "type_list" {
            let mut c2 = c.walk();
            out.extend(c.named_children(&mut c2).filter(|t| !t.is_extra()).map(|t| erase(t, src)));
        }
    }
    out
}

fn parameter(node: Node<'_>, src: &[u8]) -> (String, String) {
    let name = node.child_by_field_name("name").map(|n| text(n, src).to_string()).unwrap_or_default();
    let base = node.child_by_field_name("type").map(|t| erase(t, src)).unwrap_or_default();
    let dims = node.child_by_field_name("dimensions").map(|d| dimension_count(d, src)).unwrap_or(0);
    (name, format!("{base}{}", "[]".repeat(dims)))
}

fn lambda_parameter_names(params: Node<'_>, src: &[u8]) -> Vec<String> {
    match params.kind() {
        "identifier" => vec![text(params, src).to_string()],
        _ => {
            let mut cursor = params.walk();
            let names = params
                .named_children(&mut cursor)
                .filter_map(|p| match p.kind() {
                    "identifier" => Some(text(p, src).to_string()),
                    "formal_parameter" => p.child_by_field_name("name").map(|n| text(n, src).to_string()),
                    "spread_parameter" => {
                        let mut c2 = p.walk();
                        let declarator = p.named_children(&mut c2).find(|c| c.kind() == "variable_declarator");
                        declarator
                            .and_then(|d| d.child_by_field_name("name"))
                            .map(|n| text(n, src).to_string())
                    }
                    _ => None,
                })
                .collect();
            names
        }
    }
}

/// Classifies a variable occurrence by its syntactic parent. The second
/// value is true for the left side of a plain `=` assignment.
fn classify(occurrence: Node<'_>, src: &[u8]) -> (UseKind, bool) {
    let Some(parent) = occurrence.parent() else {
        return (UseKind::Other, false);
    };
    let is_field = |name: &str| parent.child_by_field_name(name) == Some(occurrence);
    match parent.kind() {
        "method_invocation" if is_field("object") => (UseKind::CallReceiver, false),
        "field_access" if is_field("object") => (UseKind::FieldAccess, false),
        "assignment_expression" if is_field("left") => {
            let plain = parent.child_by_field_name("operator").map(|o| text(o, src) == "=").unwrap_or(false);
            (UseKind::AssignmentTarget, plain)
        }
        "update_expression" => (UseKind::AssignmentTarget, false),
        "argument_list" => (UseKind::Argument, false),
        "return_statement" => (UseKind::ReturnValue, false),
        _ => (UseKind::Other, false),
    }
}

fn mark_code_rows(root: Node<'_>, rows: &mut [bool]) {
    let mut cursor = root.walk();
    let mut descending = true;
    loop {
        let node = cursor.node();
        if descending {
            let kind = node.kind();
            if kind == "line_comment" || kind == "block_comment" {
                descending = false;
                continue;
            }
            if node.child_count() == 0 {
                let start = node.start_position().row;
                let end = node.end_position().row;
                for r in start..=end.min(rows.len().saturating_sub(1)) {
                    rows[r] = true;
                }
            } else if cursor.goto_first_child() {
                continue;
            }
            descending = false;
        }
        if cursor.goto_next_sibling() {
            descending = true;
        } else if !cursor.goto_parent() {
            break;
        }
    }
}
