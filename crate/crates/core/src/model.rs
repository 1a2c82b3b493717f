//! Lightweight semantic model of Java compilation units.
//!
//! The model is syntactic: names are kept as written (with generic
//! arguments erased) and resolved later by [`crate::graph::TypeGraph`].

use std::fmt;

use serde::{Deserialize, Serialize};

/// One parsed `.java` file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompilationUnitModel {
    /// Repository-relative path, unique within a snapshot.
    pub path: String,
    /// Dotted package name; empty for the default package.
    pub package: String,
    pub imports: Vec<Import>,
    /// Every top-level, member, local and anonymous type, outermost first.
    pub types: Vec<TypeDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Import {
    /// Dotted name without the trailing `.*`.
    pub name: String,
    pub wildcard: bool,
    pub is_static: bool,
}

impl Import {
    /// Last segment of a single-type import.
    pub fn simple_name(&self) -> &str {
        self.name.rsplit('.').next().unwrap_or(&self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeKind {
    Class,
    Interface,
    Enum,
}

impl fmt::Display for TypeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TypeKind::Class => "class",
            TypeKind::Interface => "interface",
            TypeKind::Enum => "enum",
        })
    }
}

/// How a nested declaration relates to its enclosing type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nesting {
    TopLevel,
    Member,
    Local,
    Anonymous,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeDecl {
    /// `pkg.Outer.Inner` for member types, `pkg.Outer$1` for anonymous
    /// classes and `pkg.Outer$1Local` for local classes.
    pub qualified_name: String,
    pub simple_name: String,
    pub kind: TypeKind,
    pub nesting: Nesting,
    /// Qualified name of the lexically enclosing type.
    pub enclosing: Option<String>,
    /// Raw (erased) name from the `extends` clause. Always `None` for
    /// interfaces, whose `extends` list lives in `interface_names`.
    pub superclass_name: Option<String>,
    pub interface_names: Vec<String>,
    pub fields: Vec<VarDecl>,
    pub methods: Vec<MethodDecl>,
    /// Non-blank, non-comment lines spanned by the declaration.
    pub loc_physical: usize,
}

impl TypeDecl {
    pub fn is_interface(&self) -> bool {
        self.kind == TypeKind::Interface
    }

    pub fn method_signatures(&self) -> impl Iterator<Item = Signature> + '_ {
        self.methods.iter().filter(|m| !m.constructor).map(MethodDecl::signature)
    }
}

/// Overload key: name plus arity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Signature {
    pub name: String,
    pub arity: usize,
}

impl Signature {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Self { name: name.into(), arity }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodDecl {
    /// Method name; constructors carry the simple name of their type.
    pub name: String,
    pub arity: usize,
    pub constructor: bool,
    pub parameters: Vec<Parameter>,
    /// Erased return type, `None` for `void` and constructors.
    pub return_type: Option<String>,
    /// Every method-call expression in the body, in source order.
    pub invocations: Vec<CallSite>,
    /// Own fields read or written in the body, sorted and deduplicated.
    pub accessed_fields: Vec<String>,
    pub locals: Vec<VarDecl>,
}

impl MethodDecl {
    pub fn signature(&self) -> Signature {
        if self.constructor {
            Signature::new("<init>", self.arity)
        } else {
            Signature::new(self.name.clone(), self.arity)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub type_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallSite {
    pub name: String,
    pub arity: usize,
    pub receiver: Receiver,
    /// 1-based source line.
    pub line: usize,
}

impl CallSite {
    pub fn signature(&self) -> Signature {
        Signature::new(self.name.clone(), self.arity)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Receiver {
    /// `foo()`
    Implicit,
    /// `this.foo()`
    This,
    /// `super.foo()`
    Super,
    /// `v.foo()` or `this.v.foo()` where `v` is a variable in scope.
    Variable { name: String, type_name: String },
    /// `Name.foo()` where `Name` is not a variable; usually a static call.
    Name { name: String },
    /// Any other receiver expression.
    Expression,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarScope {
    Field,
    Local,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarDecl {
    pub name: String,
    /// Erased declared type; array dimensions are kept as `[]` suffixes.
    pub declared_type_name: String,
    pub scope: VarScope,
    /// Declared with an initializer expression.
    pub initialized: bool,
    pub line: usize,
    pub uses: Vec<UseSite>,
}

impl VarDecl {
    pub fn is_array(&self) -> bool {
        self.declared_type_name.ends_with("[]")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UseKind {
    CallReceiver,
    FieldAccess,
    AssignmentTarget,
    Argument,
    ReturnValue,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UseSite {
    pub kind: UseKind,
    pub line: usize,
    /// The assignment that gives the variable its first value: a plain `=`
    /// in a constructor or initializer block for fields, otherwise the first
    /// plain `=` of a variable declared without initializer.
    pub initializing: bool,
}

const PRIMITIVES: &[&str] = &["byte", "short", "int", "long", "float", "double", "boolean", "char", "void"];

const BOXED: &[&str] = &[
    "Byte", "Short", "Integer", "Long", "Float", "Double", "Boolean", "Character", "String", "Void",
    "java.lang.Byte", "java.lang.Short", "java.lang.Integer", "java.lang.Long", "java.lang.Float",
    "java.lang.Double", "java.lang.Boolean", "java.lang.Character", "java.lang.String", "java.lang.Void",
];

pub fn is_primitive(type_name: &str) -> bool {
    PRIMITIVES.contains(&type_name)
}

/// Primitive, boxed primitive, or `String`.
pub fn is_value_type(type_name: &str) -> bool {
    is_primitive(type_name) || BOXED.contains(&type_name)
}

/// Strips array dimensions: `Foo[][]` → `Foo`.
pub fn element_type(type_name: &str) -> &str {
    type_name.trim_end_matches("[]")
}
