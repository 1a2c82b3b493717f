//! Brute-force reference implementation of the ten class metrics.
//!
//! Shares only the Java front end with the tool. Name resolution, the
//! interface closure, ancestor chains, method pairs, use sites and line
//! spans are re-derived here by exhaustive enumeration.

use std::collections::{BTreeMap, BTreeSet};

use reuselens_core::model::{CompilationUnitModel, Nesting, Receiver, TypeDecl, TypeKind, UseKind};
use reuselens_core::parse_compilation_unit;

const VALUE_TYPES: &[&str] = &[
    "byte", "short", "int", "long", "float", "double", "boolean", "char", "Byte", "Short", "Integer", "Long",
    "Float", "Double", "Boolean", "Character", "String", "java.lang.String",
];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Internal(usize),
    External(String),
}

struct Entry<'a> {
    decl: &'a TypeDecl,
    unit: &'a CompilationUnitModel,
    source: &'a str,
}

struct World<'a> {
    types: Vec<Entry<'a>>,
}

impl<'a> World<'a> {
    fn resolve(&self, from: usize, raw: &str) -> Key {
        let raw = raw.trim_end_matches("[]");
        let unit = self.types[from].unit;
        let imported = unit.imports.iter().find(|i| !i.wildcard && !i.is_static && i.simple_name() == raw);
        if let Some(imp) = imported {
            return match self.types.iter().position(|e| e.decl.qualified_name == imp.name) {
                Some(i) => Key::Internal(i),
                None => Key::External(raw.to_string()),
            };
        }
        let hits: Vec<usize> = (0..self.types.len())
            .filter(|&i| {
                let d = self.types[i].decl;
                d.qualified_name == raw || (d.nesting != Nesting::Anonymous && d.simple_name == raw)
            })
            .collect();
        match hits.as_slice() {
            [only] => Key::Internal(*only),
            _ => Key::External(raw.to_string()),
        }
    }

    fn is_interface(&self, k: &Key) -> bool {
        matches!(k, Key::Internal(i) if self.types[*i].decl.kind == TypeKind::Interface)
    }

    /// Superclass edge; anonymous classes over an interface have none.
    fn direct_super(&self, t: usize) -> Option<Key> {
        let d = self.types[t].decl;
        let k = self.resolve(t, d.superclass_name.as_deref()?);
        if d.nesting == Nesting::Anonymous && self.is_interface(&k) {
            None
        } else {
            Some(k)
        }
    }

    fn direct_interfaces(&self, t: usize) -> Vec<Key> {
        let d = self.types[t].decl;
        let mut out: Vec<Key> = d.interface_names.iter().map(|n| self.resolve(t, n)).collect();
        if d.nesting == Nesting::Anonymous {
            if let Some(k) = d.superclass_name.as_deref().map(|n| self.resolve(t, n)) {
                if self.is_interface(&k) {
                    out.push(k);
                }
            }
        }
        out
    }

    /// Resolved ancestors, nearest first, plus whether the chain ends in an
    /// external class.
    fn ancestors(&self, t: usize) -> (Vec<usize>, bool) {
        let mut chain = Vec::new();
        let mut cur = t;
        loop {
            match self.direct_super(cur) {
                Some(Key::Internal(p)) if !chain.contains(&p) && p != t => {
                    chain.push(p);
                    cur = p;
                }
                Some(Key::External(_)) => return (chain, true),
                _ => return (chain, false),
            }
        }
    }

    fn spec(&self, t: usize) -> usize {
        let mut set: BTreeSet<Key> = self.direct_interfaces(t).into_iter().collect();
        loop {
            let before = set.len();
            let internal: Vec<usize> =
                set.iter().filter_map(|k| if let Key::Internal(i) = k { Some(*i) } else { None }).collect();
            for i in internal {
                set.extend(self.direct_interfaces(i));
            }
            if set.len() == before {
                return set.len();
            }
        }
    }

    fn own_signatures(&self, t: usize) -> BTreeSet<(String, usize)> {
        self.types[t].decl.methods.iter().filter(|m| !m.constructor).map(|m| (m.name.clone(), m.arity)).collect()
    }

    fn implementation(&self, t: usize) -> usize {
        let d = self.types[t].decl;
        if d.kind == TypeKind::Interface {
            return 0;
        }
        let own = self.own_signatures(t);
        let (ancestors, external_top) = self.ancestors(t);
        let mut used: BTreeSet<(String, usize)> = BTreeSet::new();
        for m in &d.methods {
            for call in &m.invocations {
                let sig = (call.name.clone(), call.arity);
                if own.contains(&sig) {
                    continue;
                }
                let via_self = matches!(call.receiver, Receiver::Implicit | Receiver::This | Receiver::Super);
                if !via_self {
                    continue;
                }
                let mut found = false;
                for &a in &ancestors {
                    for am in &self.types[a].decl.methods {
                        if !am.constructor && am.name == call.name && am.arity == call.arity {
                            found = true;
                        }
                    }
                }
                if found || (call.receiver == Receiver::Super && external_top) {
                    used.insert(sig);
                }
            }
        }
        used.len()
    }

    fn delegation(&self, t: usize) -> usize {
        let d = self.types[t].decl;
        if d.kind == TypeKind::Interface {
            return 0;
        }
        let vars = d.fields.iter().chain(d.methods.iter().flat_map(|m| m.locals.iter()));
        let mut count = 0;
        for v in vars {
            let ty = v.declared_type_name.as_str();
            if ty.ends_with("[]") || VALUE_TYPES.contains(&ty) {
                continue;
            }
            if !matches!(self.resolve(t, ty), Key::Internal(_)) {
                continue;
            }
            let receiver_uses = v.uses.iter().filter(|u| u.kind == UseKind::CallReceiver).count();
            let other_uses = v.uses.iter().filter(|u| u.kind != UseKind::CallReceiver && !u.initializing).count();
            if receiver_uses >= 1 && other_uses == 0 {
                count += 1;
            }
        }
        count
    }

    fn lcom(&self, t: usize) -> usize {
        let methods = &self.types[t].decl.methods;
        let (mut p, mut q) = (0i64, 0i64);
        for i in 0..methods.len() {
            for j in 0..methods.len() {
                if i >= j {
                    continue;
                }
                let shared = methods[i].accessed_fields.iter().any(|f| methods[j].accessed_fields.contains(f));
                if shared {
                    q += 1;
                } else {
                    p += 1;
                }
            }
        }
        (p - q).max(0) as usize
    }

    fn rfc(&self, t: usize) -> usize {
        let d = self.types[t].decl;
        let own: BTreeSet<(String, usize)> = d
            .methods
            .iter()
            .map(|m| if m.constructor { ("<init>".to_string(), m.arity) } else { (m.name.clone(), m.arity) })
            .collect();
        let mut called: BTreeSet<(String, usize)> = BTreeSet::new();
        for m in &d.methods {
            for c in &m.invocations {
                let sig = (c.name.clone(), c.arity);
                if !own.contains(&sig) {
                    called.insert(sig);
                }
            }
        }
        d.methods.len() + called.len()
    }

    fn cbo(&self, t: usize) -> usize {
        let d = self.types[t].decl;
        let mut names: Vec<&str> = Vec::new();
        for f in &d.fields {
            names.push(&f.declared_type_name);
        }
        for m in &d.methods {
            for p in &m.parameters {
                names.push(&p.type_name);
            }
            if let Some(r) = &m.return_type {
                names.push(r);
            }
            for c in &m.invocations {
                match &c.receiver {
                    Receiver::Variable { type_name, .. } => names.push(type_name),
                    Receiver::Name { name } => names.push(name),
                    _ => {}
                }
            }
        }
        let mut coupled: BTreeSet<usize> = BTreeSet::new();
        for n in names {
            if let Key::Internal(i) = self.resolve(t, n) {
                coupled.insert(i);
            }
        }
        let supers = self.direct_super(t).into_iter().chain(self.direct_interfaces(t));
        for k in supers {
            if let Key::Internal(i) = k {
                coupled.insert(i);
            }
        }
        coupled.remove(&t);
        coupled.len()
    }

    fn loc(&self, t: usize) -> usize {
        let e = &self.types[t];
        let (stripped, code_lines) = strip_comments(e.source);
        let start = match e.decl.nesting {
            Nesting::Anonymous => {
                let sup = e.decl.superclass_name.as_deref().unwrap_or("");
                let nth: usize = e.decl.qualified_name.rsplit('$').next().and_then(|s| s.parse().ok()).unwrap_or(1);
                find_anonymous(&stripped, sup, nth)
            }
            _ => find_declaration(&stripped, &e.decl.simple_name),
        }
        .unwrap_or_else(|| panic!("cannot locate {} in source", e.decl.qualified_name));
        let open = start + stripped[start..].find('{').expect("type body");
        let mut depth = 0i32;
        let mut close = open;
        for (i, ch) in stripped[open..].char_indices() {
            match ch {
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        close = open + i;
                        break;
                    }
                }
                _ => {}
            }
        }
        let line_of = |pos: usize| stripped[..pos].matches('\n').count();
        (line_of(start)..=line_of(close)).filter(|&l| code_lines[l]).count()
    }
}

/// Source with comments, string and char literals blanked (newlines kept),
/// and a per-line flag for lines holding any code.
fn strip_comments(src: &str) -> (String, Vec<bool>) {
    #[derive(PartialEq)]
    enum S {
        Code,
        Line,
        Block,
        Str,
        Chr,
    }
    let chars: Vec<char> = src.chars().collect();
    let mut out = String::with_capacity(src.len());
    let mut code = vec![false];
    let mut state = S::Code;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        if c == '\n' {
            out.push('\n');
            code.push(false);
            if state == S::Line {
                state = S::Code;
            }
            i += 1;
            continue;
        }
        let line = code.len() - 1;
        match state {
            S::Code => {
                if c == '/' && next == Some('/') {
                    state = S::Line;
                    out.push_str("  ");
                    i += 2;
                    continue;
                }
                if c == '/' && next == Some('*') {
                    state = S::Block;
                    out.push_str("  ");
                    i += 2;
                    continue;
                }
                if !c.is_whitespace() {
                    code[line] = true;
                }
                if c == '"' {
                    state = S::Str;
                } else if c == '\'' {
                    state = S::Chr;
                }
                out.push(c);
            }
            S::Line => out.push(' '),
            S::Block => {
                if c == '*' && next == Some('/') {
                    state = S::Code;
                    out.push_str("  ");
                    i += 2;
                    continue;
                }
                out.push(' ');
            }
            S::Str | S::Chr => {
                code[line] = true;
                let quote = if state == S::Str { '"' } else { '\'' };
                if c == '\\' {
                    out.push_str("  ");
                    i += 2;
                    continue;
                }
                if c == quote {
                    state = S::Code;
                    out.push(c);
                } else {
                    out.push(' ');
                }
            }
        }
        i += 1;
    }
    (out, code)
}

fn is_ident(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

fn word_at(text: &str, pos: usize, word: &str) -> bool {
    text[pos..].starts_with(word)
        && text[..pos].chars().next_back().map_or(true, |c| !is_ident(c))
        && text[pos + word.len()..].chars().next().map_or(true, |c| !is_ident(c))
}

/// Line start of the declaration `class|interface|enum <name>`.
fn find_declaration(text: &str, name: &str) -> Option<usize> {
    for kw in ["class", "interface", "enum"] {
        for (pos, _) in text.match_indices(kw) {
            if !word_at(text, pos, kw) {
                continue;
            }
            let rest = &text[pos + kw.len()..];
            let trimmed = rest.trim_start();
            let name_pos = pos + kw.len() + (rest.len() - trimmed.len());
            if word_at(text, name_pos, name) {
                return Some(line_start(text, pos));
            }
        }
    }
    None
}

/// Declarations start at their modifiers, which the fixtures keep on the
/// keyword's line.
fn line_start(text: &str, pos: usize) -> usize {
    text[..pos].rfind('\n').map_or(0, |p| p + 1)
}

/// Position of `new <sup>(...) {` for the `nth` anonymous body over `sup`.
fn find_anonymous(text: &str, sup: &str, nth: usize) -> Option<usize> {
    let mut seen = 0;
    for (pos, _) in text.match_indices("new") {
        if !word_at(text, pos, "new") {
            continue;
        }
        let after = text[pos + 3..].trim_start();
        if !after.starts_with(sup) {
            continue;
        }
        let paren = pos + text[pos..].find('(')?;
        let mut depth = 0;
        let mut close = None;
        for (i, c) in text[paren..].char_indices() {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        close = Some(paren + i);
                        break;
                    }
                }
                _ => {}
            }
        }
        if text[close? + 1..].trim_start().starts_with('{') {
            seen += 1;
            if seen == nth {
                return Some(pos);
            }
        }
    }
    None
}

/// Metric values keyed by qualified class name, in the order
/// spec, impl, deleg, dit, noc, loc, lcom, wmc, rfc, cbo.
pub fn oracle_metrics(files: &[(String, String)]) -> BTreeMap<String, [usize; 10]> {
    let units: Vec<(CompilationUnitModel, &str)> = files
        .iter()
        .map(|(path, src)| (parse_compilation_unit(src, path).expect("fixture parses"), src.as_str()))
        .collect();
    let world = World {
        types: units
            .iter()
            .flat_map(|(u, src)| u.types.iter().map(move |d| Entry { decl: d, unit: u, source: src }))
            .collect(),
    };
    let mut out = BTreeMap::new();
    for t in 0..world.types.len() {
        let (ancestors, _) = world.ancestors(t);
        let noc = (0..world.types.len()).filter(|&j| world.direct_super(j) == Some(Key::Internal(t))).count();
        let d = world.types[t].decl;
        out.insert(
            d.qualified_name.clone(),
            [
                world.spec(t),
                world.implementation(t),
                world.delegation(t),
                ancestors.len(),
                noc,
                world.loc(t),
                world.lcom(t),
                d.methods.len(),
                world.rfc(t),
                world.cbo(t),
            ],
        );
    }
    out
}
