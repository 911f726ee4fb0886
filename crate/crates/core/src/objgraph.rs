//! Object-graph snapshots and their canonical text codec.
//!
//! A snapshot holds the heap reachable from a method's parameters at one exit
//! of that method. Graphs are stored as flat node tables so that cycles and
//! shared substructure need no special handling in the data model.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;
use std::io::Write;

use serde::de::{Deserializer, MapAccess, Visitor};
use serde::Deserialize;
use thiserror::Error;

pub type NodeId = u64;

/// Snapshot file format version written by this crate.
pub const FORMAT_VERSION: u64 = 1;

/// Default cap on the number of nodes in a single graph.
pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Null,
    Primitive,
    String,
    Array,
    Object,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Null => "null",
            NodeKind::Primitive => "primitive",
            NodeKind::String => "string",
            NodeKind::Array => "array",
            NodeKind::Object => "object",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Kind-specific content of a node. Each kind has exactly one payload shape.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Payload {
    Null,
    /// `value` is the canonical scalar encoding, see [`canonical`].
    Primitive { type_name: String, value: String },
    Str { value: String },
    /// `component` names the element type of the array.
    Array { component: String, elements: Vec<NodeId> },
    Object { type_name: String, fields: BTreeMap<String, NodeId> },
}

impl Payload {
    pub fn kind(&self) -> NodeKind {
        match self {
            Payload::Null => NodeKind::Null,
            Payload::Primitive { .. } => NodeKind::Primitive,
            Payload::Str { .. } => NodeKind::String,
            Payload::Array { .. } => NodeKind::Array,
            Payload::Object { .. } => NodeKind::Object,
        }
    }

    pub fn type_name(&self) -> Option<&str> {
        match self {
            Payload::Primitive { type_name, .. } | Payload::Object { type_name, .. } => Some(type_name),
            Payload::Array { component, .. } => Some(component),
            Payload::Null | Payload::Str { .. } => None,
        }
    }

    /// Node ids this payload points at, in serialization order.
    pub fn references(&self) -> Box<dyn Iterator<Item = NodeId> + '_> {
        match self {
            Payload::Array { elements, .. } => Box::new(elements.iter().copied()),
            Payload::Object { fields, .. } => Box::new(fields.values().copied()),
            _ => Box::new(std::iter::empty()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObjectNode {
    pub id: NodeId,
    pub payload: Payload,
}

impl ObjectNode {
    pub fn new(id: NodeId, payload: Payload) -> Self {
        Self { id, payload }
    }

    pub fn kind(&self) -> NodeKind {
        self.payload.kind()
    }
}

/// Canonical scalar encodings for primitive node values.
pub mod canonical {
    pub fn int(v: i64) -> String {
        v.to_string()
    }

    pub fn boolean(v: bool) -> String {
        if v { "true" } else { "false" }.to_owned()
    }

    /// Characters are stored as their decimal code point.
    pub fn character(c: char) -> String {
        (c as u32).to_string()
    }

    pub fn float64(v: f64) -> String {
        format!("{:016x}", v.to_bits())
    }

    pub fn float32(v: f32) -> String {
        format!("{:08x}", v.to_bits())
    }
}

/// A heap graph rooted at the captured parameters of one method exit.
///
/// Nodes are kept sorted by id so lookups are a binary search. Duplicate ids
/// are representable (and reported by [`validate_graph`]) so that decoded
/// input can be checked rather than silently merged.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ObjectGraph {
    nodes: Vec<ObjectNode>,
    roots: Vec<NodeId>,
}

impl ObjectGraph {
    pub fn new(mut nodes: Vec<ObjectNode>, roots: Vec<NodeId>) -> Self {
        nodes.sort_by_key(|n| n.id);
        Self { nodes, roots }
    }

    pub fn nodes(&self) -> &[ObjectNode] {
        &self.nodes
    }

    pub fn roots(&self) -> &[NodeId] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> Option<&ObjectNode> {
        self.nodes
            .binary_search_by_key(&id, |n| n.id)
            .ok()
            .map(|i| &self.nodes[i])
    }

    pub fn node_mut(&mut self, id: NodeId) -> Option<&mut ObjectNode> {
        match self.nodes.binary_search_by_key(&id, |n| n.id) {
            Ok(i) => Some(&mut self.nodes[i]),
            Err(_) => None,
        }
    }
}

/// Incremental construction of graphs with sequential ids.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    nodes: Vec<ObjectNode>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, payload: Payload) -> NodeId {
        let id = self.nodes.len() as NodeId;
        self.nodes.push(ObjectNode::new(id, payload));
        id
    }

    pub fn null(&mut self) -> NodeId {
        self.push(Payload::Null)
    }

    pub fn primitive(&mut self, type_name: &str, value: impl Into<String>) -> NodeId {
        self.push(Payload::Primitive {
            type_name: type_name.to_owned(),
            value: value.into(),
        })
    }

    pub fn int(&mut self, v: i64) -> NodeId {
        self.primitive("int", canonical::int(v))
    }

    pub fn string(&mut self, value: impl Into<String>) -> NodeId {
        self.push(Payload::Str { value: value.into() })
    }

    pub fn array(&mut self, component: &str, elements: Vec<NodeId>) -> NodeId {
        self.push(Payload::Array {
            component: component.to_owned(),
            elements,
        })
    }

    pub fn object<'a>(&mut self, type_name: &str, fields: impl IntoIterator<Item = (&'a str, NodeId)>) -> NodeId {
        self.push(Payload::Object {
            type_name: type_name.to_owned(),
            fields: fields.into_iter().map(|(k, v)| (k.to_owned(), v)).collect(),
        })
    }

    /// Sets (or adds) a field on an existing object node; used to close cycles.
    ///
    /// Panics if `object` is not an object node built by this builder.
    pub fn set_field(&mut self, object: NodeId, name: &str, target: NodeId) {
        match &mut self.nodes[object as usize].payload {
            Payload::Object { fields, .. } => {
                fields.insert(name.to_owned(), target);
            }
            other => panic!("set_field on {} node {object}", other.kind()),
        }
    }

    pub fn finish(self, roots: Vec<NodeId>) -> ObjectGraph {
        ObjectGraph::new(self.nodes, roots)
    }
}

/// One method exit within one test run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub exit_index: usize,
    pub graph: ObjectGraph,
}

/// All snapshots of one method during one test, for one program version.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapshotDocument {
    pub format_version: u64,
    pub test_name: String,
    pub method_name: String,
    pub snapshots: Vec<Snapshot>,
}

impl SnapshotDocument {
    pub fn new(test_name: impl Into<String>, method_name: impl Into<String>) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            test_name: test_name.into(),
            method_name: method_name.into(),
            snapshots: Vec::new(),
        }
    }

    /// Appends a graph as the next exit.
    pub fn push(&mut self, graph: ObjectGraph) {
        let exit_index = self.snapshots.len();
        self.snapshots.push(Snapshot { exit_index, graph });
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    DuplicateId,
    DanglingReference { target: NodeId },
    DanglingRoot,
    Unreachable,
    NodeBudgetExceeded { count: usize, budget: usize },
}

/// A single broken graph invariant. `node` is the offending node id, or the
/// missing root id for [`Rule::DanglingRoot`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub node: Option<NodeId>,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let node = self.node.map(|n| n.to_string()).unwrap_or_else(|| "-".into());
        match &self.rule {
            Rule::DuplicateId => write!(f, "duplicate id {node}"),
            Rule::DanglingReference { target } => {
                write!(f, "node {node} references missing id {target}")
            }
            Rule::DanglingRoot => write!(f, "root {node} does not resolve"),
            Rule::Unreachable => write!(f, "unreachable node {node}"),
            Rule::NodeBudgetExceeded { count, budget } => {
                write!(f, "graph has {count} nodes, budget is {budget}")
            }
        }
    }
}

pub fn validate_graph(graph: &ObjectGraph) -> Vec<Violation> {
    validate_graph_with_budget(graph, DEFAULT_NODE_BUDGET)
}

pub fn validate_graph_with_budget(graph: &ObjectGraph, budget: usize) -> Vec<Violation> {
    let mut out = Vec::new();
    if graph.nodes.len() > budget {
        out.push(Violation {
            node: None,
            rule: Rule::NodeBudgetExceeded {
                count: graph.nodes.len(),
                budget,
            },
        });
    }
    for pair in graph.nodes.windows(2) {
        if pair[0].id == pair[1].id {
            out.push(Violation {
                node: Some(pair[1].id),
                rule: Rule::DuplicateId,
            });
        }
    }
    for node in &graph.nodes {
        for target in node.payload.references() {
            if graph.node(target).is_none() {
                out.push(Violation {
                    node: Some(node.id),
                    rule: Rule::DanglingReference { target },
                });
            }
        }
    }
    for &root in &graph.roots {
        if graph.node(root).is_none() {
            out.push(Violation {
                node: Some(root),
                rule: Rule::DanglingRoot,
            });
        }
    }

    let mut seen: HashSet<NodeId> = HashSet::with_capacity(graph.nodes.len());
    let mut queue: VecDeque<NodeId> = graph.roots.iter().copied().collect();
    while let Some(id) = queue.pop_front() {
        let Some(node) = graph.node(id) else { continue };
        if seen.insert(id) {
            queue.extend(node.payload.references());
        }
    }
    for node in &graph.nodes {
        if !seen.contains(&node.id) {
            out.push(Violation {
                node: Some(node.id),
                rule: Rule::Unreachable,
            });
        }
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SnapshotError {
    #[error("malformed snapshot document: {0}")]
    Malformed(String),
    #[error("unsupported snapshot format version {0}")]
    UnsupportedVersion(String),
    #[error("snapshot invariant violated: {0}")]
    InvariantViolation(String),
}

fn check_document(doc: &SnapshotDocument, budget: usize) -> Result<(), SnapshotError> {
    if doc.format_version != FORMAT_VERSION {
        return Err(SnapshotError::UnsupportedVersion(doc.format_version.to_string()));
    }
    if doc.test_name.is_empty() {
        return Err(SnapshotError::InvariantViolation("empty test name".into()));
    }
    for (i, snap) in doc.snapshots.iter().enumerate() {
        if snap.exit_index != i {
            return Err(SnapshotError::InvariantViolation(format!(
                "snapshot {i} has exit index {}",
                snap.exit_index
            )));
        }
        let violations = validate_graph_with_budget(&snap.graph, budget);
        if !violations.is_empty() {
            let joined = violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ");
            return Err(SnapshotError::InvariantViolation(format!("exit {i}: {joined}")));
        }
    }
    Ok(())
}

pub fn encode_snapshot_document(doc: &SnapshotDocument) -> Result<Vec<u8>, SnapshotError> {
    encode_snapshot_document_with_budget(doc, DEFAULT_NODE_BUDGET)
}

/// Writes the canonical text form: one line per node, nodes by ascending id,
/// object fields by field name.
pub fn encode_snapshot_document_with_budget(doc: &SnapshotDocument, budget: usize) -> Result<Vec<u8>, SnapshotError> {
    check_document(doc, budget)?;
    let mut out = Vec::new();
    write_document(&mut out, doc).expect("writing to a Vec cannot fail");
    Ok(out)
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization cannot fail")
}

fn write_ids(out: &mut Vec<u8>, ids: &[NodeId]) -> std::io::Result<()> {
    out.push(b'[');
    for (i, id) in ids.iter().enumerate() {
        if i > 0 {
            out.push(b',');
        }
        write!(out, "{id}")?;
    }
    out.push(b']');
    Ok(())
}

fn write_document(out: &mut Vec<u8>, doc: &SnapshotDocument) -> std::io::Result<()> {
    write!(
        out,
        "{{\"version\":{},\"test\":{},\"method\":{},\"snapshots\":[",
        doc.format_version,
        json_str(&doc.test_name),
        json_str(&doc.method_name)
    )?;
    for (si, snap) in doc.snapshots.iter().enumerate() {
        out.extend_from_slice(if si == 0 { b"\n" } else { b",\n" });
        write!(out, "{{\"exit\":{},\"roots\":", snap.exit_index)?;
        write_ids(out, &snap.graph.roots)?;
        out.extend_from_slice(b",\"nodes\":[");
        for (ni, node) in snap.graph.nodes.iter().enumerate() {
            out.extend_from_slice(if ni == 0 { b"\n" } else { b",\n" });
            write!(out, "{{\"id\":{},\"kind\":\"{}\"", node.id, node.kind())?;
            match &node.payload {
                Payload::Null => {}
                Payload::Primitive { type_name, value } => {
                    write!(out, ",\"type\":{},\"value\":{}", json_str(type_name), json_str(value))?;
                }
                Payload::Str { value } => write!(out, ",\"value\":{}", json_str(value))?,
                Payload::Array { component, elements } => {
                    write!(out, ",\"type\":{},\"elems\":", json_str(component))?;
                    write_ids(out, elements)?;
                }
                Payload::Object { type_name, fields } => {
                    write!(out, ",\"type\":{},\"fields\":{{", json_str(type_name))?;
                    for (fi, (name, id)) in fields.iter().enumerate() {
                        if fi > 0 {
                            out.push(b',');
                        }
                        write!(out, "{}:{id}", json_str(name))?;
                    }
                    out.push(b'}');
                }
            }
            out.push(b'}');
        }
        if !snap.graph.nodes.is_empty() {
            out.push(b'\n');
        }
        out.extend_from_slice(b"]}");
    }
    if !doc.snapshots.is_empty() {
        out.push(b'\n');
    }
    out.extend_from_slice(b"]}\n");
    Ok(())
}

#[derive(Deserialize)]
struct VersionProbe {
    version: Option<serde_json::Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    version: u64,
    test: String,
    method: String,
    snapshots: Vec<RawSnapshot>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSnapshot {
    exit: usize,
    roots: Vec<NodeId>,
    nodes: Vec<RawNode>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: NodeId,
    kind: String,
    #[serde(rename = "type")]
    type_name: Option<String>,
    value: Option<String>,
    elems: Option<Vec<NodeId>>,
    fields: Option<FieldList>,
}

/// Object fields as written, so that repeated names can be detected.
struct FieldList(Vec<(String, NodeId)>);

impl<'de> Deserialize<'de> for FieldList {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct FieldVisitor;
        impl<'de> Visitor<'de> for FieldVisitor {
            type Value = FieldList;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map from field name to node id")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<FieldList, A::Error> {
                let mut out = Vec::new();
                while let Some(entry) = map.next_entry::<String, NodeId>()? {
                    out.push(entry);
                }
                Ok(FieldList(out))
            }
        }
        deserializer.deserialize_map(FieldVisitor)
    }
}

impl RawNode {
    fn into_node(self) -> Result<ObjectNode, SnapshotError> {
        let id = self.id;
        let shape = |what: &str| SnapshotError::Malformed(format!("node {id}: {what}"));
        let present = (
            self.type_name.is_some(),
            self.value.is_some(),
            self.elems.is_some(),
            self.fields.is_some(),
        );
        let payload = match (self.kind.as_str(), present) {
            ("null", (false, false, false, false)) => Payload::Null,
            ("primitive", (true, true, false, false)) => Payload::Primitive {
                type_name: self.type_name.unwrap_or_default(),
                value: self.value.unwrap_or_default(),
            },
            ("string", (false, true, false, false)) => Payload::Str {
                value: self.value.unwrap_or_default(),
            },
            ("array", (true, false, true, false)) => Payload::Array {
                component: self.type_name.unwrap_or_default(),
                elements: self.elems.unwrap_or_default(),
            },
            ("object", (true, false, false, true)) => {
                let mut fields = BTreeMap::new();
                for (name, target) in self.fields.map(|f| f.0).unwrap_or_default() {
                    if fields.insert(name.clone(), target).is_some() {
                        return Err(SnapshotError::InvariantViolation(format!(
                            "node {id}: duplicate field name {name:?}"
                        )));
                    }
                }
                Payload::Object {
                    type_name: self.type_name.unwrap_or_default(),
                    fields,
                }
            }
            ("null" | "primitive" | "string" | "array" | "object", _) => {
                return Err(shape(&format!("keys do not match kind {:?}", self.kind)))
            }
            (other, _) => return Err(shape(&format!("unknown kind {other:?}"))),
        };
        Ok(ObjectNode::new(id, payload))
    }
}

pub fn decode_snapshot_document(bytes: &[u8]) -> Result<SnapshotDocument, SnapshotError> {
    decode_snapshot_document_with_budget(bytes, DEFAULT_NODE_BUDGET)
}

pub fn decode_snapshot_document_with_budget(bytes: &[u8], budget: usize) -> Result<SnapshotDocument, SnapshotError> {
    let probe: VersionProbe = serde_json::from_slice(bytes).map_err(|e| SnapshotError::Malformed(e.to_string()))?;
    match probe.version {
        Some(serde_json::Value::Number(n)) if n.as_u64() == Some(FORMAT_VERSION) => {}
        Some(other) => return Err(SnapshotError::UnsupportedVersion(other.to_string())),
        None => return Err(SnapshotError::Malformed("missing field `version`".into())),
    }
    let raw: RawDocument = serde_json::from_slice(bytes).map_err(|e| SnapshotError::Malformed(e.to_string()))?;

    let mut doc = SnapshotDocument {
        format_version: raw.version,
        test_name: raw.test,
        method_name: raw.method,
        snapshots: Vec::with_capacity(raw.snapshots.len()),
    };
    for snap in raw.snapshots {
        let nodes = snap.nodes.into_iter().map(RawNode::into_node).collect::<Result<Vec<_>, _>>()?;
        doc.snapshots.push(Snapshot {
            exit_index: snap.exit,
            graph: ObjectGraph::new(nodes, snap.roots),
        });
    }
    check_document(&doc, budget)?;
    Ok(doc)
}
