//! Dependency parses as three-relation directed graphs.
//!
//! Sentences are read from CoNLL-U. Every non-root token `t` with head `h`
//! contributes a [`RelationKind::Forward`] edge `h -> t` and a
//! [`RelationKind::Inverse`] edge `t -> h`; every node also gets one
//! [`RelationKind::SelfLoop`]. Deprel labels are kept on the tokens but do
//! not refine the relation set.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One syntactic word of a sentence. `index` is 1-based; `head == 0` marks the root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub index: usize,
    pub surface: String,
    pub head: usize,
    pub deprel: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub id: String,
    pub tokens: Vec<Token>,
}

impl Sentence {
    /// Builds a sentence and checks the dependency-tree invariants.
    pub fn new(id: impl Into<String>, tokens: Vec<Token>) -> Result<Self> {
        let sentence = Sentence {
            id: id.into(),
            tokens,
        };
        sentence.validate()?;
        Ok(sentence)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Renders the sentence as a CoNLL-U block (trailing blank line included).
    /// Columns not modelled here are written as `_`.
    pub fn to_conllu(&self) -> String {
        let mut out = format!("# sent_id = {}\n", self.id);
        for t in &self.tokens {
            out.push_str(&format!(
                "{}\t{}\t_\t_\t_\t_\t{}\t{}\t_\t_\n",
                t.index, t.surface, t.head, t.deprel
            ));
        }
        out.push('\n');
        out
    }

    /// Index of the root token (1-based).
    pub fn root(&self) -> Option<usize> {
        self.tokens.iter().find(|t| t.head == 0).map(|t| t.index)
    }

    pub fn validate(&self) -> Result<()> {
        let structural = |message: String| Error::Structure {
            sentence: self.id.clone(),
            message,
        };
        let n = self.tokens.len();
        if n == 0 {
            return Err(structural("sentence has no tokens".into()));
        }
        for (pos, tok) in self.tokens.iter().enumerate() {
            if tok.index != pos + 1 {
                return Err(structural(format!(
                    "token at position {} has index {}",
                    pos + 1,
                    tok.index
                )));
            }
            if tok.head > n {
                return Err(structural(format!(
                    "token {} has head {} outside 0..={n}",
                    tok.index, tok.head
                )));
            }
            if tok.head == tok.index {
                return Err(structural(format!("token {} is its own head", tok.index)));
            }
        }
        let roots = self.tokens.iter().filter(|t| t.head == 0).count();
        if roots != 1 {
            return Err(structural(format!("expected exactly one root, found {roots}")));
        }
        // Walk up from every token; a path longer than n revisits a node.
        for tok in &self.tokens {
            let mut cur = tok.index;
            let mut steps = 0;
            while cur != 0 {
                cur = self.tokens[cur - 1].head;
                steps += 1;
                if steps > n {
                    return Err(structural(format!(
                        "head links starting at token {} contain a cycle",
                        tok.index
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Parses a CoNLL-U document into validated sentences.
///
/// Multiword-token ranges (`3-4`) and empty nodes (`5.1`) are skipped.
/// Sentence ids come from a `# sent_id = ...` comment when present,
/// otherwise the 1-based block number.
pub fn parse_conllu(text: &str) -> Result<Vec<Sentence>> {
    let mut sentences = Vec::new();
    let mut tokens: Vec<Token> = Vec::new();
    let mut sent_id: Option<String> = None;
    let mut in_block = false;

    let mut finish = |tokens: &mut Vec<Token>, sent_id: &mut Option<String>| -> Result<()> {
        let id = sent_id
            .take()
            .unwrap_or_else(|| format!("{}", sentences.len() + 1));
        let sentence = Sentence::new(id, std::mem::take(tokens))?;
        sentences.push(sentence);
        Ok(())
    };

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            if in_block {
                if tokens.is_empty() {
                    sent_id = None;
                } else {
                    finish(&mut tokens, &mut sent_id)?;
                }
                in_block = false;
            }
            continue;
        }
        in_block = true;
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                if key.trim() == "sent_id" {
                    sent_id = Some(value.trim().to_string());
                }
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 10 tab-separated columns, found {}", cols.len()),
            });
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let parse_num = |s: &str, what: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid {what} `{s}`"),
            })
        };
        let index = parse_num(cols[0], "token index")?;
        let head = parse_num(cols[6], "head")?;
        tokens.push(Token {
            index,
            surface: cols[1].to_string(),
            head,
            deprel: cols[7].to_string(),
        });
    }
    if in_block && !tokens.is_empty() {
        finish(&mut tokens, &mut sent_id)?;
    }
    Ok(sentences)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    /// Head to dependent.
    Forward,
    /// Dependent to head.
    Inverse,
    SelfLoop,
}

impl RelationKind {
    pub const ALL: [RelationKind; 3] = [
        RelationKind::Forward,
        RelationKind::Inverse,
        RelationKind::SelfLoop,
    ];

    pub fn index(self) -> usize {
        match self {
            RelationKind::Forward => 0,
            RelationKind::Inverse => 1,
            RelationKind::SelfLoop => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RelationKind::Forward => "forward",
            RelationKind::Inverse => "inverse",
            RelationKind::SelfLoop => "self_loop",
        }
    }
}

/// Directed labeled edge between 0-based node ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    #[serde(rename = "rel")]
    pub relation: RelationKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DependencyGraph {
    n: usize,
    features: Array2<f64>,
    edges: Vec<Edge>,
}

/// Edges implied by a sentence's head links, in token order, followed by the self-loops.
pub fn dependency_edges(sentence: &Sentence) -> Vec<Edge> {
    let n = sentence.len();
    let mut edges = Vec::with_capacity(3 * n);
    for tok in &sentence.tokens {
        if tok.head == 0 {
            continue;
        }
        let (head, dep) = (tok.head - 1, tok.index - 1);
        edges.push(Edge {
            src: head,
            dst: dep,
            relation: RelationKind::Forward,
        });
        edges.push(Edge {
            src: dep,
            dst: head,
            relation: RelationKind::Inverse,
        });
    }
    edges.extend((0..n).map(|i| Edge {
        src: i,
        dst: i,
        relation: RelationKind::SelfLoop,
    }));
    edges
}

pub fn build_graph(sentence: &Sentence, features: Array2<f64>) -> Result<DependencyGraph> {
    if features.nrows() != sentence.len() {
        return Err(Error::dim(format!(
            "sentence {} has {} tokens but {} feature rows",
            sentence.id,
            sentence.len(),
            features.nrows()
        )));
    }
    if features.ncols() == 0 {
        return Err(Error::dim("node feature dimension must be positive"));
    }
    Ok(DependencyGraph {
        n: sentence.len(),
        edges: dependency_edges(sentence),
        features,
    })
}

impl DependencyGraph {
    /// Builds a graph from an explicit edge list, checking the graph invariants:
    /// one self-loop per node, no other self-loop edges, and Forward/Inverse
    /// edge sets that are mutual transposes.
    pub fn from_edges(features: Array2<f64>, edges: Vec<Edge>) -> Result<Self> {
        let n = features.nrows();
        if features.ncols() == 0 {
            return Err(Error::dim("node feature dimension must be positive"));
        }
        let mut self_loops = vec![0usize; n];
        let mut forward = Vec::new();
        let mut inverse = Vec::new();
        for e in &edges {
            if e.src >= n || e.dst >= n {
                return Err(Error::dim(format!(
                    "edge {} -> {} references a node outside 0..{n}",
                    e.src, e.dst
                )));
            }
            match e.relation {
                RelationKind::SelfLoop => {
                    if e.src != e.dst {
                        return Err(Error::dim("self-loop edge between distinct nodes"));
                    }
                    self_loops[e.src] += 1;
                }
                RelationKind::Forward => forward.push((e.src, e.dst)),
                RelationKind::Inverse => inverse.push((e.dst, e.src)),
            }
        }
        if self_loops.iter().any(|&c| c != 1) {
            return Err(Error::dim("every node needs exactly one self-loop"));
        }
        forward.sort_unstable();
        inverse.sort_unstable();
        if forward != inverse {
            return Err(Error::dim("forward and inverse edges are not transposes"));
        }
        Ok(DependencyGraph { n, features, edges })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self, relation: RelationKind) -> usize {
        self.edges.iter().filter(|e| e.relation == relation).count()
    }
}

/// In-neighbor lists per (node, relation) with their normalization constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborIndex {
    neighbors: Vec<[Vec<usize>; 3]>,
}

impl NeighborIndex {
    pub fn node_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, node: usize, relation: RelationKind) -> &[usize] {
        &self.neighbors[node][relation.index()]
    }

    /// `c_{i,r} = max(1, |N_i^r|)`.
    pub fn norm(&self, node: usize, relation: RelationKind) -> usize {
        self.neighbors(node, relation).len().max(1)
    }

    pub fn total_entries(&self) -> usize {
        self.neighbors
            .iter()
            .map(|per| per.iter().map(Vec::len).sum::<usize>())
            .sum()
    }
}

pub fn neighbor_index(graph: &DependencyGraph) -> NeighborIndex {
    let mut neighbors = vec![[Vec::new(), Vec::new(), Vec::new()]; graph.n];
    for e in &graph.edges {
        neighbors[e.dst][e.relation.index()].push(e.src);
    }
    NeighborIndex { neighbors }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tok(index: usize, head: usize) -> Token {
        Token {
            index,
            surface: format!("w{index}"),
            head,
            deprel: "dep".into(),
        }
    }

    fn sentence(heads: &[usize]) -> Sentence {
        let tokens = heads
            .iter()
            .enumerate()
            .map(|(i, &h)| tok(i + 1, h))
            .collect();
        Sentence::new("t", tokens).unwrap()
    }

    #[test]
    fn parses_two_line_block() {
        let text = "1\tran\t_\t_\t_\t_\t0\troot\t_\t_\n2\tfast\t_\t_\t_\t_\t1\tadvmod\t_\t_\n";
        let sents = parse_conllu(text).unwrap();
        assert_eq!(sents.len(), 1);
        let got: Vec<_> = sents[0]
            .tokens
            .iter()
            .map(|t| (t.index, t.surface.as_str(), t.head, t.deprel.as_str()))
            .collect();
        assert_eq!(got, vec![(1, "ran", 0, "root"), (2, "fast", 1, "advmod")]);
    }

    #[test]
    fn empty_document() {
        assert!(parse_conllu("").unwrap().is_empty());
        assert!(parse_conllu("\n\n# just a comment\n\n").unwrap().is_empty());
    }

    #[test]
    fn three_token_tree_rooted_at_middle() {
        let text = "# sent_id = s7\n\
                    1\tthe\t_\t_\t_\t_\t2\tdet\t_\t_\n\
                    2\tdog\t_\t_\t_\t_\t0\troot\t_\t_\n\
                    3\tbarks\t_\t_\t_\t_\t2\tdep\t_\t_\n";
        let sents = parse_conllu(text).unwrap();
        assert_eq!(sents[0].id, "s7");
        assert_eq!(sents[0].root(), Some(2));
    }

    #[test]
    fn crlf_and_multiword_lines() {
        let text = "1-2\tdel\t_\t_\t_\t_\t_\t_\t_\t_\r\n\
                    1\tde\t_\t_\t_\t_\t0\troot\t_\t_\r\n\
                    2\tel\t_\t_\t_\t_\t1\tdet\t_\t_\r\n\
                    2.1\tx\t_\t_\t_\t_\t_\t_\t_\t_\r\n\r\n\
                    1\tya\t_\t_\t_\t_\t0\troot\t_\t_\r\n";
        let sents = parse_conllu(text).unwrap();
        assert_eq!(sents.len(), 2);
        assert_eq!(sents[0].len(), 2);
        assert_eq!(sents[0].tokens[1].surface, "el");
        assert_eq!(sents[1].id, "2");
        let again = parse_conllu(&(sents[0].to_conllu() + &sents[1].to_conllu())).unwrap();
        assert_eq!(again[0].tokens, sents[0].tokens);
        assert_eq!(again[1].id, "2");
    }

    #[test]
    fn column_count_error_names_line() {
        let text = "1\tok\t_\t_\t_\t_\t0\troot\t_\t_\n2\tbad\t_\t1\n";
        match parse_conllu(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn structural_errors_name_sentence() {
        let cyclic = "# sent_id = loop\n\
                      1\ta\t_\t_\t_\t_\t2\tdep\t_\t_\n\
                      2\tb\t_\t_\t_\t_\t1\tdep\t_\t_\n\
                      3\tc\t_\t_\t_\t_\t0\troot\t_\t_\n";
        match parse_conllu(cyclic) {
            Err(Error::Structure { sentence, .. }) => assert_eq!(sentence, "loop"),
            other => panic!("unexpected {other:?}"),
        }
        let out_of_range = "1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n2\tb\t_\t_\t_\t_\t5\tdep\t_\t_\n";
        assert!(matches!(
            parse_conllu(out_of_range),
            Err(Error::Structure { .. })
        ));
    }

    #[test]
    fn single_root_graph() {
        let g = build_graph(&sentence(&[0]), Array2::ones((1, 2))).unwrap();
        assert_eq!(g.edge_count(RelationKind::SelfLoop), 1);
        assert_eq!(g.edge_count(RelationKind::Forward), 0);
        assert_eq!(g.edge_count(RelationKind::Inverse), 0);
    }

    #[test]
    fn three_token_edges_and_index() {
        let g = build_graph(&sentence(&[2, 0, 2]), Array2::zeros((3, 1))).unwrap();
        let mut fwd: Vec<_> = g
            .edges()
            .iter()
            .filter(|e| e.relation == RelationKind::Forward)
            .map(|e| (e.src + 1, e.dst + 1))
            .collect();
        fwd.sort();
        assert_eq!(fwd, vec![(2, 1), (2, 3)]);
        let mut inv: Vec<_> = g
            .edges()
            .iter()
            .filter(|e| e.relation == RelationKind::Inverse)
            .map(|e| (e.src + 1, e.dst + 1))
            .collect();
        inv.sort();
        assert_eq!(inv, vec![(1, 2), (3, 2)]);
        assert_eq!(g.edge_count(RelationKind::SelfLoop), 3);

        let idx = neighbor_index(&g);
        assert_eq!(idx.neighbors(0, RelationKind::Forward), &[1]);
        assert!(idx.neighbors(1, RelationKind::Forward).is_empty());
        assert_eq!(idx.norm(1, RelationKind::Forward), 1);
        assert_eq!(idx.neighbors(1, RelationKind::Inverse), &[0, 2]);
        assert_eq!(idx.norm(1, RelationKind::Inverse), 2);
        for i in 0..3 {
            assert_eq!(idx.neighbors(i, RelationKind::SelfLoop), &[i]);
            assert_eq!(idx.norm(i, RelationKind::SelfLoop), 1);
        }
        assert_eq!(idx.total_entries(), g.edges().len());
    }

    #[test]
    fn feature_row_mismatch() {
        let err = build_graph(&sentence(&[0, 1]), Array2::zeros((3, 2))).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    fn random_heads() -> impl Strategy<Value = Vec<usize>> {
        // the k-th node of a shuffled order attaches to one of the nodes before it
        (1usize..=12)
            .prop_flat_map(|n| {
                (
                    Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
                    proptest::collection::vec(any::<prop::sample::Index>(), n),
                )
            })
            .prop_map(|(order, picks)| {
                let mut heads = vec![0usize; order.len()];
                for k in 1..order.len() {
                    heads[order[k]] = order[picks[k].index(k)] + 1;
                }
                heads
            })
    }

    fn to_conllu(heads: &[usize]) -> String {
        heads
            .iter()
            .enumerate()
            .map(|(i, h)| format!("{}\tw\t_\t_\t_\t_\t{}\tdep\t_\t_\n", i + 1, h))
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn edge_counts_over_random_trees(heads in random_heads()) {
            let n = heads.len();
            let g = build_graph(&sentence(&heads), Array2::zeros((n, 1))).unwrap();
            let idx = neighbor_index(&g);
            let total = |r| (0..n).map(|i| idx.neighbors(i, r).len()).sum::<usize>();
            prop_assert_eq!(total(RelationKind::Forward), n - 1);
            prop_assert_eq!(total(RelationKind::Inverse), n - 1);
            prop_assert_eq!(total(RelationKind::SelfLoop), n);
            prop_assert_eq!(idx.total_entries(), g.edges().len());
            for e in g.edges().iter().filter(|e| e.relation == RelationKind::Forward) {
                let transposed = Edge { src: e.dst, dst: e.src, relation: RelationKind::Inverse };
                prop_assert!(g.edges().contains(&transposed));
            }
        }

        #[test]
        fn cyclic_heads_rejected(heads in random_heads(), a in any::<prop::sample::Index>(), b in any::<prop::sample::Index>()) {
            let n = heads.len();
            prop_assume!(n >= 2);
            // re-point a non-root node at a member of its own subtree (itself included)
            let mut heads = heads;
            let non_root: Vec<usize> = (0..n).filter(|&i| heads[i] != 0).collect();
            let start = non_root[a.index(non_root.len())];
            let subtree: Vec<usize> = (0..n)
                .filter(|&cand| {
                    let mut cur = cand + 1;
                    while cur != 0 {
                        if cur == start + 1 {
                            return true;
                        }
                        cur = heads[cur - 1];
                    }
                    false
                })
                .collect();
            heads[start] = subtree[b.index(subtree.len())] + 1;
            prop_assert!(parse_conllu(&to_conllu(&heads)).is_err());
        }
    }
}
