//! Plan rendering (DOT, JSON) and JSON reading.

use std::fmt::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::FormatError;
use crate::model::GroundModel;
use crate::plan::{ConditionalPlan, NodeId, PlanNode, PlanStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanFormat {
    Dot,
    Json,
}

impl FromStr for PlanFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "dot" => Ok(PlanFormat::Dot),
            "json" => Ok(PlanFormat::Json),
            other => Err(format!("unknown plan format {other} (expected dot or json)")),
        }
    }
}

fn act_label(model: &GroundModel, actions: &[crate::model::ActionId]) -> String {
    actions
        .iter()
        .map(|&a| model.action(a).label.as_str())
        .collect::<Vec<_>>()
        .join(" | ")
}

fn node_label(model: &GroundModel, node: &PlanNode) -> String {
    match node {
        PlanNode::Act { actions, .. } => act_label(model, actions),
        PlanNode::Sense { sensing, .. } => model.sensing(*sensing).label.clone(),
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering. Node ids follow preorder; shared subtrees appear once.
pub fn render_dot(model: &GroundModel, plan: &ConditionalPlan) -> String {
    let plan = plan.compact();
    let mut out = String::from("digraph plan {\n");
    for (k, node) in plan.nodes().iter().enumerate() {
        let shape = match node {
            PlanNode::Act { .. } => "box",
            PlanNode::Sense { .. } => "diamond",
        };
        let _ = writeln!(
            out,
            "  n{k} [shape={shape}, label=\"{}\"];",
            escape(&node_label(model, node))
        );
    }
    for (k, node) in plan.nodes().iter().enumerate() {
        match node {
            PlanNode::Act { child: Some(c), .. } => {
                let _ = writeln!(out, "  n{k} -> n{};", c.0);
            }
            PlanNode::Act { child: None, .. } => {}
            PlanNode::Sense { sensing, edges } => {
                let target = model.sensing(*sensing).target;
                for &(v, c) in edges {
                    let _ = writeln!(
                        out,
                        "  n{k} -> n{} [label=\"{}\"];",
                        c.0,
                        escape(model.value_name(target, v))
                    );
                }
            }
        }
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonChild {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    outcome: Option<String>,
    id: u32,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonNode {
    id: u32,
    kind: String,
    label: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    actions: Vec<String>,
    children: Vec<JsonChild>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonPlan {
    nodes: Vec<JsonNode>,
    root: Option<u32>,
    stats: PlanStats,
}

/// JSON rendering; ids follow preorder and shared subtrees are emitted once.
pub fn render_json(model: &GroundModel, plan: &ConditionalPlan) -> String {
    let stats = plan.stats();
    let plan = plan.compact();
    let nodes = plan
        .nodes()
        .iter()
        .enumerate()
        .map(|(k, node)| match node {
            PlanNode::Act { actions, child } => JsonNode {
                id: k as u32,
                kind: "act".into(),
                label: node_label(model, node),
                actions: actions.iter().map(|&a| model.action(a).label.clone()).collect(),
                children: child.iter().map(|c| JsonChild { outcome: None, id: c.0 }).collect(),
            },
            PlanNode::Sense { sensing, edges } => {
                let target = model.sensing(*sensing).target;
                JsonNode {
                    id: k as u32,
                    kind: "sense".into(),
                    label: node_label(model, node),
                    actions: Vec::new(),
                    children: edges
                        .iter()
                        .map(|&(v, c)| JsonChild {
                            outcome: Some(model.value_name(target, v).to_string()),
                            id: c.0,
                        })
                        .collect(),
                }
            }
        })
        .collect();
    let doc = JsonPlan {
        nodes,
        root: plan.root().map(|r| r.0),
        stats,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("plan serializes");
    s.push('\n');
    s
}

/// Reads a plan written by [`render_json`], resolving labels against `model`.
/// Node ids may be arbitrary as long as references resolve.
pub fn plan_from_json(model: &GroundModel, text: &str) -> Result<ConditionalPlan, FormatError> {
    let doc: JsonPlan = serde_json::from_str(text).map_err(|e| FormatError::Json(e.to_string()))?;
    let index: std::collections::HashMap<u32, usize> = doc.nodes.iter().enumerate().map(|(k, n)| (n.id, k)).collect();
    if index.len() != doc.nodes.len() {
        return Err(FormatError::Json("duplicate node ids".into()));
    }
    let resolve = |id: u32| {
        index
            .get(&id)
            .map(|&k| NodeId(k as u32))
            .ok_or(FormatError::UnknownNode(id))
    };
    let mut nodes = Vec::with_capacity(doc.nodes.len());
    for n in &doc.nodes {
        let node = match n.kind.as_str() {
            "act" => {
                let labels: Vec<String> = if n.actions.is_empty() {
                    n.label.split('|').map(|s| s.trim().to_string()).collect()
                } else {
                    n.actions.clone()
                };
                let actions = labels
                    .iter()
                    .map(|l| {
                        model
                            .action_by_label(l)
                            .ok_or_else(|| FormatError::UnknownAction(l.clone()))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if n.children.len() > 1 {
                    return Err(FormatError::Malformed {
                        id: n.id,
                        message: "actuation node with more than one child".into(),
                    });
                }
                let child = n.children.first().map(|c| resolve(c.id)).transpose()?;
                PlanNode::Act { actions, child }
            }
            "sense" => {
                let sensing = model
                    .sensing_by_label(&n.label)
                    .ok_or_else(|| FormatError::UnknownSensing(n.label.clone()))?;
                let target = model.sensing(sensing).target;
                let mut edges = Vec::with_capacity(n.children.len());
                for c in &n.children {
                    let name = c.outcome.as_deref().ok_or_else(|| FormatError::Malformed {
                        id: n.id,
                        message: "sensing edge without outcome".into(),
                    })?;
                    let v = model
                        .value_index(target, name)
                        .ok_or_else(|| FormatError::UnknownOutcome {
                            instance: model.instance_label(target).to_string(),
                            value: name.to_string(),
                        })?;
                    edges.push((v, resolve(c.id)?));
                }
                PlanNode::Sense { sensing, edges }
            }
            other => {
                return Err(FormatError::Malformed {
                    id: n.id,
                    message: format!("unknown node kind {other}"),
                })
            }
        };
        nodes.push(node);
    }
    let root = doc.root.map(resolve).transpose()?;
    Ok(ConditionalPlan::new(nodes, root))
}
