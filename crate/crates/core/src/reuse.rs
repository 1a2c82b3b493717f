//! The three reuse metrics: specification inheritance, implementation
//! inheritance and delegation.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::graph::TypeGraph;
use crate::model::{is_value_type, Receiver, Signature, TypeDecl, UseKind, VarDecl};

/// Which interfaces seed the specification-inheritance closure.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecSeed {
    /// Only the class's own `implements` clause.
    #[default]
    OwnClause,
    /// Also the `implements` clauses of every resolved ancestor.
    WithSuperclassChain,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelegationScope {
    #[default]
    FieldsAndLocals,
    FieldsOnly,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsConfig {
    #[serde(default)]
    pub spec_seed: SpecSeed,
    #[serde(default)]
    pub delegation_scope: DelegationScope,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReuseVector {
    pub class_name: String,
    pub spec_inheritance: usize,
    pub impl_inheritance: usize,
    pub delegation: usize,
}

/// Number of distinct interfaces reachable from the class through
/// `implements` and interface `extends` edges. External interfaces count
/// once each by name.
pub fn specification_inheritance(class: &TypeDecl, graph: &TypeGraph, config: &MetricsConfig) -> usize {
    let mut seeds: Vec<&str> = vec![class.qualified_name.as_str()];
    if config.spec_seed == SpecSeed::WithSuperclassChain {
        seeds.extend(graph.ancestors(&class.qualified_name).into_iter().map(|t| t.qualified_name.as_str()));
    }

    let mut seen: BTreeSet<(bool, &str)> = BTreeSet::new();
    let mut queue: VecDeque<&str> = VecDeque::new();
    for seed in seeds {
        for iface in graph.interfaces_of(seed) {
            if seen.insert((iface.resolved, &iface.name)) && iface.resolved {
                queue.push_back(&iface.name);
            }
        }
    }
    while let Some(cur) = queue.pop_front() {
        for iface in graph.interfaces_of(cur) {
            if seen.insert((iface.resolved, &iface.name)) && iface.resolved {
                queue.push_back(&iface.name);
            }
        }
    }
    seen.len()
}

/// Number of distinct ancestor methods (by name and arity) that the class
/// invokes through an implicit receiver, `this`, or `super`, excluding
/// methods the class overrides.
pub fn implementation_inheritance(class: &TypeDecl, graph: &TypeGraph) -> usize {
    if class.is_interface() {
        return 0;
    }
    let own: BTreeSet<Signature> = class.method_signatures().collect();
    let inherited: BTreeSet<Signature> = graph
        .ancestors(&class.qualified_name)
        .into_iter()
        .flat_map(|t| t.method_signatures())
        .filter(|s| !own.contains(s))
        .collect();
    let external_parent = graph.external_ancestor(&class.qualified_name).is_some();

    let mut used: BTreeSet<(bool, Signature)> = BTreeSet::new();
    for call in class.methods.iter().flat_map(|m| &m.invocations) {
        let sig = call.signature();
        if own.contains(&sig) {
            continue;
        }
        match call.receiver {
            Receiver::Implicit | Receiver::This | Receiver::Super if inherited.contains(&sig) => {
                used.insert((true, sig));
            }
            Receiver::Super if external_parent => {
                used.insert((false, sig));
            }
            _ => {}
        }
    }
    used.len()
}

/// Variables of snapshot-internal, non-value types that are only ever used
/// as method-call receivers (apart from their initializing assignment).
pub fn delegation(class: &TypeDecl, graph: &TypeGraph, config: &MetricsConfig) -> usize {
    if class.is_interface() {
        return 0;
    }
    delegation_candidates(class, config)
        .filter(|v| is_delegate(v, class, graph))
        .count()
}

fn delegation_candidates<'a>(class: &'a TypeDecl, config: &MetricsConfig) -> impl Iterator<Item = &'a VarDecl> {
    let locals = match config.delegation_scope {
        DelegationScope::FieldsAndLocals => Some(class.methods.iter().flat_map(|m| &m.locals)),
        DelegationScope::FieldsOnly => None,
    };
    class.fields.iter().chain(locals.into_iter().flatten())
}

fn is_delegate(var: &VarDecl, class: &TypeDecl, graph: &TypeGraph) -> bool {
    if var.is_array() || is_value_type(&var.declared_type_name) {
        return false;
    }
    if graph.resolve(&class.qualified_name, &var.declared_type_name).is_none() {
        return false;
    }
    let mut calls = 0;
    for u in &var.uses {
        match u.kind {
            UseKind::CallReceiver => calls += 1,
            _ if u.initializing => {}
            _ => return false,
        }
    }
    calls > 0
}

pub fn reuse_vector(class: &TypeDecl, graph: &TypeGraph, config: &MetricsConfig) -> ReuseVector {
    ReuseVector {
        class_name: class.qualified_name.clone(),
        spec_inheritance: specification_inheritance(class, graph, config),
        impl_inheritance: implementation_inheritance(class, graph),
        delegation: delegation(class, graph, config),
    }
}
