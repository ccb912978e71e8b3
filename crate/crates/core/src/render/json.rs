//! The graph document: graph, cover membership and optional layout in one
//! JSON object.
//!
//! ```text
//! { "schema": 1, "eps": .., "n_points": ..,
//!   "nodes":   [{"id", "landmark", "size", "colorings": {..}, "x"?, "y"?}],
//!   "edges":   [{"a", "b", "intersection"}],
//!   "members": {"<id>": [point, ..]} }
//! ```
//!
//! Object keys are sorted and floats use the shortest representation that
//! parses back to the same double, so equal inputs give equal bytes.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::cover::{Ball, Cover};
use crate::error::{Error, Result};
use crate::graph::{BallGraph, BallNode, Edge};
use crate::layout::Layout;

pub const SCHEMA_VERSION: u64 = 1;

/// Everything a graph document carries. For a filtered graph, `cover`
/// holds only the surviving balls.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphDocument {
    pub graph: BallGraph,
    pub cover: Cover,
    pub layout: Option<Layout>,
}

pub fn export_value(graph: &BallGraph, cover: &Cover, layout: Option<&Layout>) -> Result<Value> {
    let mut nodes = Vec::with_capacity(graph.len());
    let mut members = Map::new();
    for n in graph.nodes() {
        let ball = cover.ball(n.id).ok_or(Error::UnknownBall(n.id))?;
        let mut obj = Map::new();
        obj.insert("id".into(), json!(n.id));
        obj.insert("landmark".into(), json!(n.landmark));
        obj.insert("size".into(), json!(n.size));
        obj.insert("colorings".into(), json!(n.colorings));
        if let Some(layout) = layout {
            let (x, y) = layout.get(n.id).ok_or(Error::MissingPosition(n.id))?;
            obj.insert("x".into(), json!(x));
            obj.insert("y".into(), json!(y));
        }
        nodes.push(Value::Object(obj));
        members.insert(n.id.to_string(), json!(ball.members));
    }
    let edges: Vec<Value> = graph
        .edges()
        .iter()
        .map(|e| json!({"a": e.a, "b": e.b, "intersection": e.intersection}))
        .collect();
    Ok(json!({
        "schema": SCHEMA_VERSION,
        "eps": graph.eps(),
        "n_points": cover.n_points(),
        "nodes": nodes,
        "edges": edges,
        "members": members,
    }))
}

pub fn export_json(graph: &BallGraph, cover: &Cover, layout: Option<&Layout>) -> Result<String> {
    let value = export_value(graph, cover, layout)?;
    let mut s = serde_json::to_string_pretty(&value).map_err(|e| Error::InvalidDocument(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidDocument(msg.into())
}

fn get<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| bad(format!("missing `{key}`")))
}

fn as_usize(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| bad(format!("`{what}` must be a non-negative integer")))
}

fn as_f64(v: &Value, what: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| bad(format!("`{what}` must be a number")))
}

pub fn import_json(text: &str) -> Result<GraphDocument> {
    let root: Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let root = root.as_object().ok_or_else(|| bad("document must be an object"))?;
    let schema = get(root, "schema")?.as_u64();
    if schema != Some(SCHEMA_VERSION) {
        return Err(bad(format!("unsupported schema {:?}", get(root, "schema")?)));
    }
    let eps = as_f64(get(root, "eps")?, "eps")?;
    let n_points = as_usize(get(root, "n_points")?, "n_points")?;

    let members_obj = get(root, "members")?
        .as_object()
        .ok_or_else(|| bad("`members` must be an object"))?;
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, v) in members_obj {
        let id: usize = k.parse().map_err(|_| bad(format!("bad member key `{k}`")))?;
        let list = v
            .as_array()
            .ok_or_else(|| bad("member lists must be arrays"))?
            .iter()
            .map(|p| as_usize(p, "member"))
            .collect::<Result<Vec<_>>>()?;
        if list.iter().any(|&p| p >= n_points) {
            return Err(bad(format!("ball {id} lists a point beyond n_points")));
        }
        members.insert(id, list);
    }

    let mut nodes = Vec::new();
    let mut balls = Vec::new();
    let mut positions = BTreeMap::new();
    let mut with_xy = 0usize;
    let node_values = get(root, "nodes")?
        .as_array()
        .ok_or_else(|| bad("`nodes` must be an array"))?;
    for v in node_values {
        let o = v.as_object().ok_or_else(|| bad("node must be an object"))?;
        let id = as_usize(get(o, "id")?, "id")?;
        let landmark = as_usize(get(o, "landmark")?, "landmark")?;
        let size = as_usize(get(o, "size")?, "size")?;
        let mut colorings = BTreeMap::new();
        for (name, cv) in get(o, "colorings")?
            .as_object()
            .ok_or_else(|| bad("`colorings` must be an object"))?
        {
            colorings.insert(name.clone(), as_f64(cv, name)?);
        }
        match (o.get("x"), o.get("y")) {
            (Some(x), Some(y)) => {
                positions.insert(id, (as_f64(x, "x")?, as_f64(y, "y")?));
                with_xy += 1;
            }
            (None, None) => {}
            _ => return Err(bad(format!("node {id} has only one coordinate"))),
        }
        let ball_members = members
            .remove(&id)
            .ok_or_else(|| bad(format!("no members for ball {id}")))?;
        if ball_members.len() != size {
            return Err(bad(format!(
                "ball {id}: size {size} but {} members",
                ball_members.len()
            )));
        }
        if landmark >= n_points {
            return Err(bad(format!("ball {id}: landmark beyond n_points")));
        }
        balls.push(Ball {
            id,
            landmark,
            members: ball_members,
        });
        nodes.push(BallNode {
            id,
            landmark,
            size,
            colorings,
        });
    }
    if let Some(id) = members.keys().next() {
        return Err(bad(format!("members listed for unknown ball {id}")));
    }
    if with_xy != 0 && with_xy != nodes.len() {
        return Err(bad("either every node or no node carries a position"));
    }

    let edge_values = get(root, "edges")?
        .as_array()
        .ok_or_else(|| bad("`edges` must be an array"))?;
    let edges = edge_values
        .iter()
        .map(|v| {
            let o = v.as_object().ok_or_else(|| bad("edge must be an object"))?;
            Ok(Edge {
                a: as_usize(get(o, "a")?, "a")?,
                b: as_usize(get(o, "b")?, "b")?,
                intersection: as_usize(get(o, "intersection")?, "intersection")?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    balls.sort_by_key(|b| b.id);
    let graph = BallGraph::from_parts(nodes, edges, eps)?;
    let layout = (with_xy > 0).then(|| Layout::from_positions(positions));
    Ok(GraphDocument {
        graph,
        cover: Cover::from_parts(balls, eps, n_points),
        layout,
    })
}
