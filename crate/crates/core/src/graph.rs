//! Layered view/ensemble graphs.
//!
//! A view node holds a data matrix and the linkage method that represents it
//! inside a fusion. An ensemble node fuses its children into an affinity
//! matrix; that output can itself be a child of another ensemble, in which
//! case its `1 - affinity` dissimilarity is used together with the node's own
//! method. Every ensemble is seeded from the root seed and its node id, so
//! independent branches may be evaluated in any order.

use std::collections::HashMap;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fusion::{hc_fuse_views, FusionConfig};
use crate::hclust::euclidean_distances;
use crate::par::{self, Execution};
use crate::seed::derive_seed_str;
use crate::types::{affinity_to_distance, AffinityMatrix, DistanceMatrix, MethodId, ViewMatrix};

/// Registered fusion algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fuser {
    HcFused { iterations: usize },
}

impl Fuser {
    /// Parses a fuser id; the iteration count is supplied separately.
    pub fn parse(id: &str, iterations: usize) -> Result<Self> {
        match FuserKind::from_str(id)? {
            FuserKind::HcFused => Ok(Fuser::HcFused { iterations }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FuserKind {
    HcFused,
}

impl FromStr for FuserKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hc_fused" | "hcfused" | "hc_fuse" => Ok(FuserKind::HcFused),
            other => Err(Error::config(format!("unknown fuser '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum NodeKind {
    View(Arc<ViewMatrix>),
    Ensemble { children: Vec<String>, fuser: Fuser },
}

#[derive(Debug, Clone)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    /// Linkage representing this node when it feeds a parent ensemble.
    pub method: Option<MethodId>,
}

#[derive(Debug, Clone, Default)]
pub struct EnsembleGraph {
    nodes: Vec<Node>,
    index: HashMap<String, usize>,
    output: Option<String>,
}

impl EnsembleGraph {
    pub fn new() -> Self {
        Self::default()
    }

    fn insert(&mut self, node: Node) -> Result<()> {
        if self.index.contains_key(&node.id) {
            return Err(Error::config(format!("duplicate node id '{}'", node.id)));
        }
        self.index.insert(node.id.clone(), self.nodes.len());
        self.nodes.push(node);
        Ok(())
    }

    pub fn add_view(&mut self, id: &str, data: Arc<ViewMatrix>, method: MethodId) -> Result<()> {
        self.insert(Node {
            id: id.to_string(),
            kind: NodeKind::View(data),
            method: Some(method),
        })
    }

    /// Like [`add_view`](Self::add_view) with the method given by name.
    pub fn add_view_named(&mut self, id: &str, data: Arc<ViewMatrix>, method: &str) -> Result<()> {
        self.add_view(id, data, method.parse()?)
    }

    /// Adds an ensemble over `children`. `method` is needed only if this
    /// ensemble feeds another one.
    pub fn add_ensemble(
        &mut self,
        id: &str,
        children: &[&str],
        fuser: Fuser,
        method: Option<MethodId>,
    ) -> Result<()> {
        if children.is_empty() {
            return Err(Error::config(format!("ensemble '{id}' has no children")));
        }
        self.insert(Node {
            id: id.to_string(),
            kind: NodeKind::Ensemble {
                children: children.iter().map(|c| c.to_string()).collect(),
                fuser,
            },
            method,
        })
    }

    pub fn set_output(&mut self, id: &str) {
        self.output = Some(id.to_string());
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    fn lookup(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::config(format!("unknown node '{id}'")))
    }

    /// Checks structure and returns, for every node reachable from the
    /// output, its depth (leaves at 0), plus the output index.
    fn plan(&self) -> Result<(Vec<Option<usize>>, usize)> {
        let out_id = self
            .output
            .as_deref()
            .ok_or_else(|| Error::config("graph has no output node"))?;
        let out = self.lookup(out_id)?;
        if !matches!(self.nodes[out].kind, NodeKind::Ensemble { .. }) {
            return Err(Error::config("the output node must be an ensemble"));
        }
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Fresh,
            Open,
            Done,
        }
        let mut mark = vec![Mark::Fresh; self.nodes.len()];
        let mut depth: Vec<Option<usize>> = vec![None; self.nodes.len()];
        // iterative DFS: (node, children visited?)
        let mut stack = vec![(out, false)];
        while let Some((i, expanded)) = stack.pop() {
            if expanded {
                let d = match &self.nodes[i].kind {
                    NodeKind::View(_) => 0,
                    NodeKind::Ensemble { children, .. } => {
                        let mut d = 0;
                        for c in children {
                            d = d.max(depth[self.lookup(c)?].expect("child finished") + 1);
                        }
                        d
                    }
                };
                depth[i] = Some(d);
                mark[i] = Mark::Done;
                continue;
            }
            match mark[i] {
                Mark::Done => continue,
                Mark::Open => {
                    return Err(Error::config(format!(
                        "cycle through node '{}'",
                        self.nodes[i].id
                    )))
                }
                Mark::Fresh => {}
            }
            mark[i] = Mark::Open;
            stack.push((i, true));
            if let NodeKind::Ensemble { children, .. } = &self.nodes[i].kind {
                for c in children.iter().rev() {
                    let ci = self.lookup(c)?;
                    if mark[ci] == Mark::Open {
                        return Err(Error::config(format!("cycle through node '{c}'")));
                    }
                    if self.nodes[ci].method.is_none() {
                        return Err(Error::config(format!(
                            "node '{c}' feeds an ensemble but has no method"
                        )));
                    }
                    if mark[ci] == Mark::Fresh {
                        stack.push((ci, false));
                    }
                }
            }
        }
        // every leaf must describe the same samples
        let mut ids: Option<&[String]> = None;
        for (i, node) in self.nodes.iter().enumerate() {
            if let (NodeKind::View(v), Some(_)) = (&node.kind, depth[i]) {
                match ids {
                    None => ids = Some(v.sample_ids()),
                    Some(s) if s != v.sample_ids() => {
                        return Err(Error::input(format!(
                            "view '{}' has different sample ids",
                            node.id
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok((depth, out))
    }
}

#[derive(Debug, Clone)]
enum Value {
    Distances(DistanceMatrix),
    Affinity(AffinityMatrix),
}

impl Value {
    fn as_distances(&self) -> DistanceMatrix {
        match self {
            Value::Distances(d) => d.clone(),
            Value::Affinity(a) => affinity_to_distance(a),
        }
    }
}

/// Evaluates the graph bottom-up and returns the output ensemble's affinity.
pub fn execute_graph(graph: &EnsembleGraph, seed: u64, exec: Execution) -> Result<AffinityMatrix> {
    let (depth, out) = graph.plan()?;
    let max_depth = depth.iter().flatten().copied().max().unwrap_or(0);
    let mut values: HashMap<usize, Value> = HashMap::new();
    for level in 0..=max_depth {
        let todo: Vec<usize> = (0..graph.nodes.len())
            .filter(|&i| depth[i] == Some(level))
            .collect();
        let done = par::map_slice(exec, &todo, |&i| -> Result<Value> {
            let node = &graph.nodes[i];
            match &node.kind {
                NodeKind::View(v) => Ok(Value::Distances(euclidean_distances(v))),
                NodeKind::Ensemble { children, fuser } => {
                    let Fuser::HcFused { iterations } = *fuser;
                    let inputs: Vec<(DistanceMatrix, MethodId)> = children
                        .iter()
                        .map(|c| {
                            let ci = graph.index[c];
                            let method = graph.nodes[ci].method.expect("validated");
                            (values[&ci].as_distances(), method)
                        })
                        .collect();
                    let tagged: Vec<(&DistanceMatrix, MethodId)> =
                        inputs.iter().map(|(d, m)| (d, *m)).collect();
                    let cfg = FusionConfig {
                        iterations,
                        seed: derive_seed_str(seed, &node.id),
                        exec,
                        ..FusionConfig::default()
                    };
                    Ok(Value::Affinity(hc_fuse_views(&tagged, &cfg)?))
                }
            }
        });
        for (i, v) in todo.into_iter().zip(done) {
            values.insert(i, v?);
        }
    }
    match values.remove(&out) {
        Some(Value::Affinity(a)) => Ok(a),
        _ => unreachable!("output validated as an ensemble"),
    }
}
