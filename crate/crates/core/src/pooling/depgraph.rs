use std::collections::VecDeque;

use super::PoolingError;
use crate::text::Token;

/// A dependency tree over one sentence. `heads[i]` is the 1-based head of
/// token `i`, with 0 marking the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepGraph {
    id: String,
    tokens: Vec<String>,
    heads: Vec<usize>,
    relations: Vec<String>,
}

impl DepGraph {
    pub fn new(
        id: impl Into<String>,
        tokens: Vec<String>,
        heads: Vec<usize>,
        relations: Vec<String>,
    ) -> Result<Self, PoolingError> {
        let id = id.into();
        let n = tokens.len();
        let bad = |reason: String| PoolingError::Graph {
            sentence: id.clone(),
            reason,
        };
        if heads.len() != n || relations.len() != n {
            return Err(bad("tokens, heads and relations differ in length".into()));
        }
        if n == 0 {
            return Err(bad("empty sentence".into()));
        }
        if let Some(h) = heads.iter().find(|&&h| h > n) {
            return Err(bad(format!("head {h} out of range")));
        }
        let roots = heads.iter().filter(|&&h| h == 0).count();
        if roots != 1 {
            return Err(bad(format!("{roots} roots")));
        }
        for start in 0..n {
            let mut node = start;
            let mut steps = 0;
            while heads[node] != 0 {
                node = heads[node] - 1;
                steps += 1;
                if steps > n {
                    return Err(bad(format!("cycle through token {}", start + 1)));
                }
            }
        }
        Ok(DepGraph {
            id,
            tokens,
            heads,
            relations,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn heads(&self) -> &[usize] {
        &self.heads
    }

    pub fn relations(&self) -> &[String] {
        &self.relations
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// 0-based index of the root token.
    pub fn root(&self) -> usize {
        self.heads.iter().position(|&h| h == 0).expect("validated single root")
    }

    fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.len()];
        for (child, &head) in self.heads.iter().enumerate() {
            if head > 0 {
                adj[child].push(head - 1);
                adj[head - 1].push(child);
            }
        }
        adj
    }
}

/// Tokens linked to any of `targets` through undirected dependency edges,
/// ascending (surface order), targets included. `max_depth` bounds the
/// number of edges walked; `None` returns the whole connected component.
pub fn dep_context(graph: &DepGraph, targets: &[usize], max_depth: Option<usize>) -> Result<Vec<usize>, PoolingError> {
    if targets.is_empty() {
        return Err(PoolingError::TargetIndex {
            sentence: graph.id.clone(),
            index: None,
        });
    }
    if let Some(&bad) = targets.iter().find(|&&t| t >= graph.len()) {
        return Err(PoolingError::TargetIndex {
            sentence: graph.id.clone(),
            index: Some(bad),
        });
    }
    let adj = graph.neighbours();
    let mut depth = vec![usize::MAX; graph.len()];
    let mut queue = VecDeque::new();
    for &t in targets {
        depth[t] = 0;
        queue.push_back(t);
    }
    while let Some(node) = queue.pop_front() {
        if max_depth.is_some_and(|m| depth[node] >= m) {
            continue;
        }
        for &next in &adj[node] {
            if depth[next] == usize::MAX {
                depth[next] = depth[node] + 1;
                queue.push_back(next);
            }
        }
    }
    Ok((0..graph.len()).filter(|&i| depth[i] != usize::MAX).collect())
}

/// Map each graph token to the indices of `tokens` that share its
/// characters. Both sides are compared lowercased with whitespace removed;
/// the concatenations must be identical.
pub fn align_graph(graph: &DepGraph, tokens: &[Token]) -> Result<Vec<Vec<usize>>, PoolingError> {
    let explode = |words: &mut dyn Iterator<Item = (usize, &str)>| -> (Vec<char>, Vec<usize>) {
        let mut chars = Vec::new();
        let mut owner = Vec::new();
        for (i, w) in words {
            for c in w.to_lowercase().chars().filter(|c| !c.is_whitespace()) {
                chars.push(c);
                owner.push(i);
            }
        }
        (chars, owner)
    };
    let (graph_chars, graph_owner) = explode(&mut graph.tokens.iter().map(String::as_str).enumerate());
    let (token_chars, token_owner) = explode(&mut tokens.iter().map(|t| t.surface.as_str()).enumerate());
    if graph_chars != token_chars {
        return Err(PoolingError::Alignment {
            sentence: graph.id.clone(),
            graph: graph.tokens.join(" "),
            text: tokens.iter().map(|t| t.surface.as_str()).collect::<Vec<_>>().join(" "),
        });
    }
    let mut map = vec![Vec::new(); graph.len()];
    for (&g, &t) in graph_owner.iter().zip(&token_owner) {
        if map[g].last() != Some(&t) {
            map[g].push(t);
        }
    }
    Ok(map)
}

/// Indices into `tokens` (surface order) that are dependency-linked to the
/// tokens at `target` positions.
pub fn dep_context_tokens(
    graph: &DepGraph,
    tokens: &[Token],
    target: std::ops::Range<usize>,
    max_depth: Option<usize>,
) -> Result<Vec<usize>, PoolingError> {
    let map = align_graph(graph, tokens)?;
    let graph_targets: Vec<usize> = map
        .iter()
        .enumerate()
        .filter(|(_, owned)| owned.iter().any(|t| target.contains(t)))
        .map(|(g, _)| g)
        .collect();
    let nodes = dep_context(graph, &graph_targets, max_depth)?;
    let mut out: Vec<usize> = nodes.iter().flat_map(|&g| map[g].iter().copied()).collect();
    out.extend(target);
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Read CoNLL-U (or CoNLL-X) sentences. Multiword-token ranges (`3-4`) and
/// empty nodes (`5.1`) are skipped. A `# sent_id = ...` comment names the
/// sentence; otherwise its 0-based position is used.
pub fn parse_conll(bytes: &[u8]) -> Result<Vec<DepGraph>, PoolingError> {
    let text = String::from_utf8_lossy(bytes);
    let mut graphs = Vec::new();
    let mut sent_id: Option<String> = None;
    let mut tokens = Vec::new();
    let mut heads = Vec::new();
    let mut relations = Vec::new();

    let flush = |sent_id: &mut Option<String>,
                     tokens: &mut Vec<String>,
                     heads: &mut Vec<usize>,
                     relations: &mut Vec<String>,
                     graphs: &mut Vec<DepGraph>|
     -> Result<(), PoolingError> {
        if tokens.is_empty() {
            *sent_id = None;
            return Ok(());
        }
        let id = sent_id.take().unwrap_or_else(|| graphs.len().to_string());
        graphs.push(DepGraph::new(
            id,
            std::mem::take(tokens),
            std::mem::take(heads),
            std::mem::take(relations),
        )?);
        Ok(())
    };

    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(&mut sent_id, &mut tokens, &mut heads, &mut relations, &mut graphs)?;
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(id) = comment.trim().strip_prefix("sent_id") {
                sent_id = Some(id.trim_start_matches([' ', '=']).trim().to_string());
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 8 {
            return Err(PoolingError::Conll {
                line: n + 1,
                message: format!("expected 10 tab-separated columns, found {}", cols.len()),
            });
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let head = cols[6].parse::<usize>().map_err(|_| PoolingError::Conll {
            line: n + 1,
            message: format!("bad head {:?}", cols[6]),
        })?;
        tokens.push(cols[1].to_string());
        heads.push(head);
        relations.push(cols[7].to_string());
    }
    flush(&mut sent_id, &mut tokens, &mut heads, &mut relations, &mut graphs)?;
    Ok(graphs)
}
