//! Text dataset formats.
//!
//! Edge lists: one edge per line, `u v [w]` with 0-based vertex ids and an
//! optional weight (default 1.0). Coverage files: `element: item item ...`
//! lines plus optional `weight item w` lines (default weight 1.0). In both
//! formats `#` starts a comment.

use std::collections::HashMap;

use super::{Coverage, Cut};
use crate::error::{Error, Result};

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
    .trim()
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList {
    /// One more than the largest vertex id mentioned.
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl EdgeList {
    pub fn into_cut(self, directed: bool) -> Result<Cut> {
        Cut::new(self.n, self.edges, directed)
    }
}

pub fn parse_edge_list(text: &str) -> Result<EdgeList> {
    let mut edges = Vec::new();
    let mut n = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(parse_err(line_no, format!("expected `u v [w]`, got `{line}`")));
        }
        let vertex = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| parse_err(line_no, format!("bad vertex id `{s}`")))
        };
        let u = vertex(fields[0])?;
        let v = vertex(fields[1])?;
        let w = match fields.get(2) {
            Some(s) => s
                .parse::<f64>()
                .map_err(|_| parse_err(line_no, format!("bad weight `{s}`")))?,
            None => 1.0,
        };
        if w.is_nan() || w < 0.0 {
            return Err(Error::NegativeWeight(w));
        }
        n = n.max(u + 1).max(v + 1);
        edges.push((u, v, w));
    }
    Ok(EdgeList { n, edges })
}

pub fn parse_coverage(text: &str) -> Result<Coverage> {
    let mut item_index: HashMap<String, usize> = HashMap::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut covers: Vec<Vec<usize>> = Vec::new();
    let mut intern = |name: &str, weights: &mut Vec<f64>| -> usize {
        *item_index.entry(name.to_string()).or_insert_with(|| {
            weights.push(1.0);
            weights.len() - 1
        })
    };
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        if let Some((head, rest)) = line.split_once(':') {
            let element: usize = head
                .trim()
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad element id `{}`", head.trim())))?;
            if covers.len() <= element {
                covers.resize(element + 1, Vec::new());
            }
            for item in rest.split_whitespace() {
                let id = intern(item, &mut weights);
                if !covers[element].contains(&id) {
                    covers[element].push(id);
                }
            }
        } else {
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["weight", item, w] => {
                    let w: f64 = w
                        .parse()
                        .map_err(|_| parse_err(line_no, format!("bad weight `{w}`")))?;
                    if w.is_nan() || w < 0.0 {
                        return Err(Error::NegativeWeight(w));
                    }
                    let id = intern(item, &mut weights);
                    weights[id] = w;
                }
                _ => {
                    return Err(parse_err(
                        line_no,
                        format!("expected `element: items...` or `weight item w`, got `{line}`"),
                    ))
                }
            }
        }
    }
    Coverage::new(covers, weights)
}
