use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::depgraph::{dep_context_tokens, DepGraph};
use super::ops::{context_features, median_pool, PoolOp};
use super::PoolingError;
use crate::embedding::EmbeddingMatrix;
use crate::lexicon::{mask_context, MaskPolicy, SentimentLexicon};
use crate::text::{surfaces, ContextBundle};

/// The neural-pooling method families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "target-ind")]
    TargetInd,
    #[serde(rename = "target-dep-")]
    TargetDepMinus,
    #[serde(rename = "target-dep")]
    TargetDep,
    #[serde(rename = "target-dep+")]
    TargetDepPlus,
    #[serde(rename = "tdparse-")]
    TdParseMinus,
    #[serde(rename = "tdparse")]
    TdParse,
    #[serde(rename = "tdparse+")]
    TdParsePlus,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::TargetInd,
        Family::TargetDepMinus,
        Family::TargetDep,
        Family::TargetDepPlus,
        Family::TdParseMinus,
        Family::TdParse,
        Family::TdParsePlus,
    ];

    pub fn contexts(self) -> &'static [Context] {
        use Context::*;
        match self {
            Family::TargetInd => &[Full],
            Family::TargetDepMinus => &[Left, Right, Target],
            Family::TargetDep => &[Full, Left, Right, Target],
            Family::TargetDepPlus => &[Full, Left, Right, Target, LeftSentiment, RightSentiment],
            Family::TdParseMinus => &[Dependency],
            Family::TdParse => &[Dependency, Left, Right],
            Family::TdParsePlus => &[Dependency, Left, Right, LeftSentiment, RightSentiment],
        }
    }

    pub fn needs_lexicon(self) -> bool {
        matches!(self, Family::TargetDepPlus | Family::TdParsePlus)
    }

    pub fn needs_graph(self) -> bool {
        matches!(self, Family::TdParseMinus | Family::TdParse | Family::TdParsePlus)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::TargetInd => "target-ind",
            Family::TargetDepMinus => "target-dep-",
            Family::TargetDep => "target-dep",
            Family::TargetDepPlus => "target-dep+",
            Family::TdParseMinus => "tdparse-",
            Family::TdParse => "tdparse",
            Family::TdParsePlus => "tdparse+",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = PoolingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.to_ascii_lowercase().replace('_', "-");
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or(PoolingError::UnknownFamily(s))
    }
}

/// A context whose token embeddings are pooled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Context {
    Full,
    Left,
    Right,
    Target,
    LeftSentiment,
    RightSentiment,
    Dependency,
}

/// One slice of a feature vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutEntry {
    pub context: Context,
    pub op: PoolOp,
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub entries: Vec<LayoutEntry>,
}

impl Layout {
    pub fn for_family(family: Family, dim: usize) -> Layout {
        let mut entries = Vec::new();
        let mut offset = 0;
        for &context in family.contexts() {
            for op in PoolOp::ALL {
                entries.push(LayoutEntry {
                    context,
                    op,
                    start: offset,
                    end: offset + dim,
                });
                offset += dim;
            }
        }
        Layout { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.last().map_or(0, |e| e.end)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub layout: Arc<Layout>,
}

/// How to build features: the family plus its lexicon and masking and
/// dependency options.
#[derive(Clone, Debug)]
pub struct MethodSpec {
    family: Family,
    lexicon: Option<Arc<SentimentLexicon>>,
    /// Masking policy of the left/right sentiment contexts.
    pub left_policy: MaskPolicy,
    pub right_policy: MaskPolicy,
    /// Maximum edge distance for the dependency context; `None` is the
    /// full connected component.
    pub dep_depth: Option<usize>,
}

impl MethodSpec {
    pub fn new(family: Family, lexicon: Option<Arc<SentimentLexicon>>) -> Result<Self, PoolingError> {
        if family.needs_lexicon() && lexicon.is_none() {
            return Err(PoolingError::MissingLexicon(family));
        }
        Ok(MethodSpec {
            family,
            lexicon,
            left_policy: MaskPolicy::Any,
            right_policy: MaskPolicy::Any,
            dep_depth: None,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn lexicon(&self) -> Option<&SentimentLexicon> {
        self.lexicon.as_deref()
    }

    pub fn layout(&self, dim: usize) -> Layout {
        Layout::for_family(self.family, dim)
    }
}

/// Build the method's feature vector for one instance: per-occurrence
/// pooled contexts, then the per-dimension median across occurrences.
pub fn assemble_features(
    bundles: &[ContextBundle],
    spec: &MethodSpec,
    embedding: &EmbeddingMatrix,
    graph: Option<&DepGraph>,
) -> Result<FeatureVector, PoolingError> {
    let layout = Arc::new(spec.layout(embedding.dim()));
    let values = assemble_values(bundles, spec, embedding, graph)?;
    debug_assert_eq!(values.len(), layout.len());
    Ok(FeatureVector { values, layout })
}

pub(crate) fn assemble_values(
    bundles: &[ContextBundle],
    spec: &MethodSpec,
    embedding: &EmbeddingMatrix,
    graph: Option<&DepGraph>,
) -> Result<Vec<f64>, PoolingError> {
    if bundles.is_empty() {
        return Err(PoolingError::NoOccurrences);
    }
    let family = spec.family;
    if family.needs_graph() && graph.is_none() {
        return Err(PoolingError::MissingGraph(family));
    }
    let mut per_occurrence = Vec::with_capacity(bundles.len());
    for bundle in bundles {
        let mut values = Vec::with_capacity(family.contexts().len() * 5 * embedding.dim());
        for &context in family.contexts() {
            let tokens: Vec<String> = match context {
                Context::Full => owned(&surfaces(&bundle.full)),
                Context::Left => owned(&surfaces(&bundle.left)),
                Context::Right => owned(&surfaces(&bundle.right)),
                Context::Target => owned(&surfaces(&bundle.target)),
                Context::LeftSentiment => {
                    let lexicon = spec.lexicon().ok_or(PoolingError::MissingLexicon(family))?;
                    mask_context(&surfaces(&bundle.left), lexicon, spec.left_policy)
                }
                Context::RightSentiment => {
                    let lexicon = spec.lexicon().ok_or(PoolingError::MissingLexicon(family))?;
                    mask_context(&surfaces(&bundle.right), lexicon, spec.right_policy)
                }
                Context::Dependency => {
                    let graph = graph.ok_or(PoolingError::MissingGraph(family))?;
                    dep_context_tokens(graph, &bundle.full, bundle.target_indices(), spec.dep_depth)?
                        .into_iter()
                        .map(|i| bundle.full[i].surface.clone())
                        .collect()
                }
            };
            values.extend(context_features(&tokens, embedding));
        }
        per_occurrence.push(values);
    }
    Ok(median_pool(&per_occurrence))
}

fn owned(tokens: &[&str]) -> Vec<String> {
    tokens.iter().map(|s| s.to_string()).collect()
}

/// Sidecar describing a feature file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureFileHeader {
    pub method: Family,
    pub dim: usize,
    pub records: usize,
    pub ids: Vec<String>,
    pub layout: Layout,
}

/// Write records as `u32 length` followed by that many `f32` values, all
/// little-endian.
pub fn write_feature_records<W: Write>(mut sink: W, rows: &[Vec<f64>]) -> std::io::Result<()> {
    for row in rows {
        sink.write_all(&(row.len() as u32).to_le_bytes())?;
        for &v in row {
            sink.write_all(&(v as f32).to_le_bytes())?;
        }
    }
    sink.flush()
}

pub fn read_feature_records<R: Read>(mut source: R) -> std::io::Result<Vec<Vec<f64>>> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let mut rows = Vec::new();
    let mut pos = 0;
    let truncated = || std::io::Error::new(std::io::ErrorKind::UnexpectedEof, "truncated feature record");
    while pos < bytes.len() {
        let len_bytes: [u8; 4] = bytes.get(pos..pos + 4).ok_or_else(truncated)?.try_into().unwrap();
        let len = u32::from_le_bytes(len_bytes) as usize;
        pos += 4;
        let body = bytes.get(pos..pos + 4 * len).ok_or_else(truncated)?;
        rows.push(
            body.chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
                .collect(),
        );
        pos += 4 * len;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Label, Span, TargetInstance};
    use crate::lexicon::parse_hl;
    use crate::text::extract_contexts;

    fn embedding() -> EmbeddingMatrix {
        EmbeddingMatrix::from_pairs(
            2,
            [
                ("good", vec![1.0, 0.5]),
                ("camera", vec![0.0, 2.0]),
                ("works", vec![-1.0, 1.0]),
                (",", vec![0.25, 0.25]),
            ],
        )
        .unwrap()
    }

    fn instance() -> TargetInstance {
        TargetInstance::new(
            "c",
            "good camera , camera works",
            "camera",
            vec![Span::new(5, 11), Span::new(14, 20)],
            Label::Positive,
        )
        .unwrap()
    }

    #[test]
    fn layout_lengths() {
        assert_eq!(Layout::for_family(Family::TargetDep, 50).len(), 1000);
        assert_eq!(Layout::for_family(Family::TargetInd, 3).len(), 15);
        assert_eq!(Layout::for_family(Family::TdParsePlus, 2).len(), 50);
    }

    #[test]
    fn single_occurrence_is_identity() {
        let inst = TargetInstance::new("a", "good camera", "camera", vec![Span::new(5, 11)], Label::Positive).unwrap();
        let bundles = extract_contexts(&inst).unwrap();
        let spec = MethodSpec::new(Family::TargetDepMinus, None).unwrap();
        let fv = assemble_features(&bundles, &spec, &embedding(), None).unwrap();
        let mut expected = context_features(&["good"], &embedding());
        expected.extend(context_features::<&str>(&[], &embedding()));
        expected.extend(context_features(&["camera"], &embedding()));
        assert_eq!(fv.values, expected);
    }

    #[test]
    fn multiple_occurrences_take_median() {
        let bundles = extract_contexts(&instance()).unwrap();
        let spec = MethodSpec::new(Family::TargetDepMinus, None).unwrap();
        let emb = embedding();
        let fv = assemble_features(&bundles, &spec, &emb, None).unwrap();
        let per: Vec<Vec<f64>> = bundles
            .iter()
            .map(|b| {
                let mut v = context_features(&surfaces(&b.left), &emb);
                v.extend(context_features(&surfaces(&b.right), &emb));
                v.extend(context_features(&surfaces(&b.target), &emb));
                v
            })
            .collect();
        let expected: Vec<f64> = (0..per[0].len()).map(|j| (per[0][j] + per[1][j]) / 2.0).collect();
        assert_eq!(fv.values, expected);
    }

    #[test]
    fn plus_requires_lexicon_and_tdparse_requires_graph() {
        assert!(matches!(
            MethodSpec::new(Family::TargetDepPlus, None),
            Err(PoolingError::MissingLexicon(_))
        ));
        let spec = MethodSpec::new(Family::TdParse, None).unwrap();
        let bundles = extract_contexts(&instance()).unwrap();
        assert!(matches!(
            assemble_features(&bundles, &spec, &embedding(), None),
            Err(PoolingError::MissingGraph(_))
        ));
    }

    #[test]
    fn sentiment_contexts_mask_non_lexicon_words() {
        let lex = Arc::new(parse_hl(b"good\nworks\n", b""));
        let spec = MethodSpec::new(Family::TargetDepPlus, Some(lex)).unwrap();
        let inst = TargetInstance::new("a", "good , camera", "camera", vec![Span::new(7, 13)], Label::Positive).unwrap();
        let bundles = extract_contexts(&inst).unwrap();
        let emb = embedding();
        let fv = assemble_features(&bundles, &spec, &emb, None).unwrap();
        let ls = fv
            .layout
            .entries
            .iter()
            .find(|e| e.context == Context::LeftSentiment && e.op == PoolOp::Min)
            .unwrap();
        // left = [good, ","]; "," is masked to zeros, so min = min(good, 0)
        assert_eq!(&fv.values[ls.start..ls.end], &[0.0, 0.0]);
        let l = fv
            .layout
            .entries
            .iter()
            .find(|e| e.context == Context::Left && e.op == PoolOp::Min)
            .unwrap();
        assert_eq!(&fv.values[l.start..l.end], &[0.25, 0.25]);
    }

    #[test]
    fn tdparse_uses_graph() {
        let graph = DepGraph::new(
            "g",
            ["good", "camera", ",", "camera", "works"].iter().map(|s| s.to_string()).collect(),
            vec![2, 5, 5, 5, 0],
            vec!["x".into(); 5],
        )
        .unwrap();
        let bundles = extract_contexts(&instance()).unwrap();
        let emb = embedding();
        let spec = MethodSpec::new(Family::TdParseMinus, None).unwrap();
        let fv = assemble_features(&bundles, &spec, &emb, Some(&graph)).unwrap();
        // full component == whole sentence for both occurrences
        let all = context_features(&["good", "camera", ",", "camera", "works"], &emb);
        assert_eq!(fv.values, all);
    }

    #[test]
    fn feature_records_round_trip() {
        let rows = vec![vec![1.0, -0.5], vec![], vec![0.25]];
        let mut buf = Vec::new();
        write_feature_records(&mut buf, &rows).unwrap();
        assert_eq!(buf.len(), 4 + 8 + 4 + 4 + 4);
        assert_eq!(read_feature_records(buf.as_slice()).unwrap(), rows);
        assert!(read_feature_records(&buf[..5]).is_err());
    }
}
