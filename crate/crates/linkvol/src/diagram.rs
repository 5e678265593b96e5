//! Oriented link diagrams from PD codes.
//!
//! A PD tuple lists the four edge labels of a crossing counterclockwise,
//! starting at the incoming under-strand. Corner `q` of a crossing is the
//! face between positions `q` and `q + 1`.
//!
//! Labelling around a crossing: `j` is the face between the two outgoing
//! strand ends, `k` lies across the under-strand from `j`, `m` across the
//! over-strand, and `l` is opposite `j`. The under-strand's component is
//! `α`, the over-strand's is `β`.

use std::collections::{BTreeMap, HashMap};

use serde::Deserialize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DiagramError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("arc label count ≠ 2: label {label} appears {count} time(s)")]
    ArcLabelCount { label: u32, count: usize },
    #[error("empty diagram")]
    Empty,
    #[error("inconsistent orientation at crossing {0}")]
    Orientation(usize),
    #[error("disconnected (split) diagram is unsupported")]
    Disconnected,
    #[error(
        "component {component} has no {kind}-passing crossing; \
         apply a Reidemeister move so every component passes over and under"
    )]
    MissingPassage { component: usize, kind: &'static str },
    #[error("component index {0} out of range")]
    ComponentIndex(usize),
    #[error("meridian override: arc {arc} does not lie on component {component}")]
    Meridian { component: usize, arc: usize },
    #[error("invalid diagram JSON: {0}")]
    Json(String),
}

/// Validated PD code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdCode {
    pub crossings: Vec<[u32; 4]>,
}

impl PdCode {
    pub fn new(crossings: Vec<[u32; 4]>) -> Result<Self, DiagramError> {
        if crossings.is_empty() {
            return Err(DiagramError::Empty);
        }
        let mut count: BTreeMap<u32, usize> = BTreeMap::new();
        for t in &crossings {
            for &a in t {
                *count.entry(a).or_default() += 1;
            }
        }
        if let Some((&label, &count)) = count.iter().find(|(_, &n)| n != 2) {
            return Err(DiagramError::ArcLabelCount { label, count });
        }
        Ok(PdCode { crossings })
    }
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn err(&self, msg: impl Into<String>) -> DiagramError {
        DiagramError::Syntax { line: self.line, col: self.col, msg: msg.into() }
    }

    fn expect(&mut self, want: char) -> Result<(), DiagramError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c == want => {
                self.bump();
                Ok(())
            }
            Some(c) => Err(self.err(format!("expected '{want}', found '{c}'"))),
            None => Err(self.err(format!("expected '{want}', found end of input"))),
        }
    }

    fn number(&mut self) -> Result<u32, DiagramError> {
        self.skip_ws();
        let mut digits = String::new();
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            digits.push(c);
            self.bump();
        }
        if digits.is_empty() {
            return Err(self.err("expected a positive integer label"));
        }
        match digits.parse::<u32>() {
            Ok(0) => Err(self.err("labels must be positive")),
            Ok(n) => Ok(n),
            Err(_) => Err(self.err("label out of range")),
        }
    }
}

/// Parse the compact form `X[a,b,c,d] X[...] ...`.
pub fn parse_pd(text: &str) -> Result<PdCode, DiagramError> {
    let mut cur = Cursor { chars: text.chars().peekable(), line: 1, col: 1 };
    let mut crossings = Vec::new();
    loop {
        cur.skip_ws();
        if cur.peek().is_none() {
            break;
        }
        cur.expect('X')?;
        cur.expect('[')?;
        let mut t = [0u32; 4];
        for (i, slot) in t.iter_mut().enumerate() {
            if i > 0 {
                cur.expect(',')?;
            }
            *slot = cur.number()?;
        }
        cur.expect(']')?;
        crossings.push(t);
    }
    PdCode::new(crossings)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DiagramFile {
    pd: Vec<[u32; 4]>,
    #[serde(default)]
    meridians: Option<Vec<Option<usize>>>,
}

/// Read a diagram file: compact PD text or `{"pd": [...], "meridians": [...]}`.
///
/// Meridian overrides are 0-based arc indices, one entry (or null) per
/// component.
pub fn load_diagram(text: &str) -> Result<LinkDiagram, DiagramError> {
    if text.trim_start().starts_with('{') {
        let f: DiagramFile = serde_json::from_str(text).map_err(|e| DiagramError::Json(e.to_string()))?;
        let d = build_diagram(&PdCode::new(f.pd)?)?;
        match f.meridians {
            Some(m) => d.with_meridians(&m),
            None => Ok(d),
        }
    } else {
        build_diagram(&parse_pd(text)?)
    }
}

/// One crossing with its Figure-style labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Crossing {
    pub pd: [u32; 4],
    pub sign: i8,
    /// Face at corner `q` (between PD positions `q` and `q+1`).
    pub corners: [usize; 4],
    pub j: usize,
    pub k: usize,
    pub l: usize,
    pub m: usize,
    /// α
    pub under_component: usize,
    /// β
    pub over_component: usize,
    pub over_arc: usize,
    pub under_in_arc: usize,
    pub under_out_arc: usize,
}

impl Crossing {
    /// Region indices in slot order `(j, k, l, m)`.
    pub fn slots(&self) -> [usize; 4] {
        [self.j, self.k, self.l, self.m]
    }
}

/// Oriented edge between two crossings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub label: u32,
    pub arc: usize,
    pub component: usize,
    pub left: usize,
    pub right: usize,
    /// (crossing, position) where the edge starts.
    pub tail: (usize, usize),
    /// (crossing, position) where the edge ends.
    pub head: (usize, usize),
}

/// Over-arc: maximal run of edges that never passes under. One Wirtinger
/// generator each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    pub edges: Vec<u32>,
    pub component: usize,
}

/// Word in the Wirtinger generators: `(generator, ±1)` factors.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Word(pub Vec<(usize, i8)>);

/// Wirtinger relation `g_out = g_over^sign · g_in · g_over^-sign`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Relation {
    pub over: usize,
    pub input: usize,
    pub output: usize,
    pub sign: i8,
}

#[derive(Debug, Clone)]
pub struct LinkDiagram {
    pub crossings: Vec<Crossing>,
    pub n_regions: usize,
    /// Edge labels of each component in orientation order.
    pub components: Vec<Vec<u32>>,
    pub arcs: Vec<Arc>,
    /// Arc index of the meridian generator per component.
    pub meridians: Vec<usize>,
    edges: BTreeMap<u32, Edge>,
}

type Occurrences = HashMap<u32, Vec<(usize, usize)>>;

fn other_end(x: &[[u32; 4]], occ: &Occurrences, c: usize, p: usize) -> (usize, usize) {
    let o = &occ[&x[c][p]];
    if o[0] == (c, p) {
        o[1]
    } else {
        o[0]
    }
}

fn orient(
    x: &[[u32; 4]],
    occ: &Occurrences,
    incoming: &mut HashMap<(usize, usize), bool>,
    start: (usize, usize),
    val: bool,
) -> Result<(), DiagramError> {
    let mut stack = vec![(start, val)];
    while let Some((key, v)) = stack.pop() {
        match incoming.get(&key) {
            Some(&w) if w != v => return Err(DiagramError::Orientation(key.0)),
            Some(_) => continue,
            None => {
                incoming.insert(key, v);
                let (c, p) = key;
                stack.push(((c, (p + 2) % 4), !v));
                stack.push((other_end(x, occ, c, p), !v));
            }
        }
    }
    Ok(())
}

const ACROSS_UNDER: [usize; 4] = [3, 2, 1, 0];
const ACROSS_OVER: [usize; 4] = [1, 0, 3, 2];

pub fn build_diagram(pd: &PdCode) -> Result<LinkDiagram, DiagramError> {
    let x = &pd.crossings;
    let nc = x.len();
    let mut occ: Occurrences = HashMap::new();
    for (c, t) in x.iter().enumerate() {
        for (p, &a) in t.iter().enumerate() {
            occ.entry(a).or_default().push((c, p));
        }
    }
    let other = |c: usize, p: usize| other_end(x, &occ, c, p);

    // orientation: true = strand enters the crossing at this position
    let mut incoming: HashMap<(usize, usize), bool> = HashMap::new();
    for c in 0..nc {
        orient(x, &occ, &mut incoming, (c, 0), true)?;
    }
    // strands that never pass under: orient arbitrarily, rejected below
    for c in 0..nc {
        if !incoming.contains_key(&(c, 1)) {
            orient(x, &occ, &mut incoming, (c, 1), true)?;
        }
    }

    let sign: Vec<i8> = (0..nc).map(|c| if incoming[&(c, 3)] { 1 } else { -1 }).collect();
    let mut tail = HashMap::new();
    let mut head = HashMap::new();
    for (&a, o) in &occ {
        for &(c, p) in o {
            if incoming[&(c, p)] {
                head.insert(a, (c, p));
            } else {
                tail.insert(a, (c, p));
            }
        }
    }
    let next_edge = |a: u32| -> u32 {
        let (hc, hp) = head[&a];
        x[hc][(hp + 2) % 4]
    };

    // components
    let mut labels: Vec<u32> = occ.keys().copied().collect();
    labels.sort_unstable();
    let mut comp_of: HashMap<u32, usize> = HashMap::new();
    let mut components = Vec::new();
    for &a in &labels {
        if comp_of.contains_key(&a) {
            continue;
        }
        let mut comp = Vec::new();
        let mut e = a;
        while !comp_of.contains_key(&e) {
            comp_of.insert(e, components.len());
            comp.push(e);
            e = next_edge(e);
        }
        components.push(comp);
    }

    for i in 0..components.len() {
        if !x.iter().any(|t| comp_of[&t[1]] == i) {
            return Err(DiagramError::MissingPassage { component: i, kind: "over" });
        }
        if !x.iter().any(|t| comp_of[&t[0]] == i) {
            return Err(DiagramError::MissingPassage { component: i, kind: "under" });
        }
    }

    // over-arcs, each starting where a strand leaves as the under-strand
    let mut arcs: Vec<Arc> = Vec::new();
    for t in x {
        let mut e = t[2];
        let mut edges = vec![e];
        loop {
            let (hc, hp) = head[&e];
            if hp == 0 {
                break;
            }
            e = x[hc][(hp + 2) % 4];
            edges.push(e);
        }
        arcs.push(Arc { component: comp_of[&edges[0]], edges });
    }
    arcs.sort_by_key(|a| a.edges[0]);
    let mut arc_of: HashMap<u32, usize> = HashMap::new();
    for (i, a) in arcs.iter().enumerate() {
        for &e in &a.edges {
            arc_of.insert(e, i);
        }
    }

    // faces
    let mut corner_region: HashMap<(usize, usize), usize> = HashMap::new();
    let mut n_regions = 0;
    for c in 0..nc {
        for q in 0..4 {
            if corner_region.contains_key(&(c, q)) {
                continue;
            }
            let (mut cc, mut qq) = (c, q);
            while !corner_region.contains_key(&(cc, qq)) {
                corner_region.insert((cc, qq), n_regions);
                let (c2, p2) = other(cc, qq);
                cc = c2;
                qq = (p2 + 3) % 4;
            }
            n_regions += 1;
        }
    }
    if n_regions != nc + 2 {
        return Err(DiagramError::Disconnected);
    }

    let crossings: Vec<Crossing> = (0..nc)
        .map(|c| {
            let corners = [0, 1, 2, 3].map(|q| corner_region[&(c, q)]);
            let jc = if sign[c] > 0 { 1 } else { 2 };
            Crossing {
                pd: x[c],
                sign: sign[c],
                corners,
                j: corners[jc],
                k: corners[ACROSS_UNDER[jc]],
                l: corners[(jc + 2) % 4],
                m: corners[ACROSS_OVER[jc]],
                under_component: comp_of[&x[c][0]],
                over_component: comp_of[&x[c][1]],
                over_arc: arc_of[&x[c][1]],
                under_in_arc: arc_of[&x[c][0]],
                under_out_arc: arc_of[&x[c][2]],
            }
        })
        .collect();

    let edges = labels
        .iter()
        .map(|&a| {
            let (c, p) = tail[&a];
            let e = Edge {
                label: a,
                arc: arc_of[&a],
                component: comp_of[&a],
                left: corner_region[&(c, p)],
                right: corner_region[&(c, (p + 3) % 4)],
                tail: (c, p),
                head: head[&a],
            };
            (a, e)
        })
        .collect();

    let meridians = (0..components.len())
        .map(|i| arcs.iter().position(|a| a.component == i).expect("component has an arc"))
        .collect();

    Ok(LinkDiagram { crossings, n_regions, components, arcs, meridians, edges })
}

impl LinkDiagram {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn n_generators(&self) -> usize {
        self.arcs.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.values()
    }

    pub fn edge(&self, label: u32) -> &Edge {
        &self.edges[&label]
    }

    /// Replace the default meridian generators; `None` keeps the default.
    pub fn with_meridians(mut self, overrides: &[Option<usize>]) -> Result<Self, DiagramError> {
        for (i, o) in overrides.iter().enumerate() {
            if i >= self.n_components() {
                return Err(DiagramError::ComponentIndex(i));
            }
            if let Some(arc) = *o {
                if self.arcs.get(arc).map(|a| a.component) != Some(i) {
                    return Err(DiagramError::Meridian { component: i, arc });
                }
                self.meridians[i] = arc;
            }
        }
        Ok(self)
    }

    /// One relation per crossing.
    pub fn wirtinger(&self) -> Vec<Relation> {
        self.crossings
            .iter()
            .map(|c| Relation { over: c.over_arc, input: c.under_in_arc, output: c.under_out_arc, sign: c.sign })
            .collect()
    }

    /// Sum of signs of the self-crossings of component `i`.
    pub fn writhe(&self, i: usize) -> Result<i64, DiagramError> {
        if i >= self.n_components() {
            return Err(DiagramError::ComponentIndex(i));
        }
        Ok(self
            .crossings
            .iter()
            .filter(|c| c.under_component == i && c.over_component == i)
            .map(|c| c.sign as i64)
            .sum())
    }

    /// Canonical longitude of component `i`, based at the start of its
    /// meridian arc and commuting with the meridian generator.
    pub fn longitude_word(&self, i: usize) -> Result<Word, DiagramError> {
        let wr = self.writhe(i)?;
        let mu = self.meridians[i];
        let start = self.arcs[mu].edges[0];
        let mut word = Vec::new();
        let mut e = start;
        loop {
            let (hc, hp) = self.edge(e).head;
            let c = &self.crossings[hc];
            if hp == 0 {
                word.push((c.over_arc, c.sign));
            }
            e = c.pd[(hp + 2) % 4];
            if e == start {
                break;
            }
        }
        word.reverse();
        let fix = if wr > 0 { -1 } else { 1 };
        word.extend(std::iter::repeat_n((mu, fix), wr.unsigned_abs() as usize));
        Ok(Word(word))
    }

    /// Multi-line summary used by `linkvol analyze`.
    pub fn summary(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let h = self.n_components();
        let _ = writeln!(
            s,
            "n={} regions, {} crossings, {} component{}",
            self.n_regions,
            self.crossings.len(),
            h,
            if h == 1 { "" } else { "s" }
        );
        for (i, a) in self.arcs.iter().enumerate() {
            let _ = writeln!(s, "arc g{}: component {}, edges {:?}", i + 1, a.component, a.edges);
        }
        for (i, c) in self.crossings.iter().enumerate() {
            let _ = writeln!(
                s,
                "crossing {i}: X{:?} sign {:+} (j,k,l,m)=({},{},{},{}) alpha={} beta={}",
                c.pd, c.sign, c.j, c.k, c.l, c.m, c.under_component, c.over_component
            );
        }
        for r in self.wirtinger() {
            let e = if r.sign > 0 { "" } else { "^-1" };
            let f = if r.sign > 0 { "^-1" } else { "" };
            let _ = writeln!(s, "relation: g{} = g{}{e} g{} g{}{f}", r.output + 1, r.over + 1, r.input + 1, r.over + 1);
        }
        for i in 0..h {
            let w = self.longitude_word(i).expect("valid component");
            let word: Vec<String> =
                w.0.iter()
                    .map(|&(g, e)| if e > 0 { format!("g{}", g + 1) } else { format!("g{}^-1", g + 1) })
                    .collect();
            let _ = writeln!(
                s,
                "component {i}: writhe {}, meridian g{}, longitude {}",
                self.writhe(i).expect("valid component"),
                self.meridians[i] + 1,
                word.join(" ")
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TREFOIL: &str = "X[1,4,2,5] X[3,6,4,1] X[5,2,6,3]";
    const FIG8: &str = "X[4,2,5,1] X[8,6,1,5] X[6,3,7,4] X[2,7,3,8]";

    #[test]
    fn parse_examples() {
        assert_eq!(parse_pd(TREFOIL).unwrap().crossings.len(), 3);
        assert_eq!(parse_pd(FIG8).unwrap().crossings.len(), 4);
        assert!(matches!(parse_pd("X[1,4,2,5] X[3,6,4,1]"), Err(DiagramError::ArcLabelCount { .. })));
        let e = parse_pd("X[1,2,3,4]\n  X[1;2]").unwrap_err();
        assert_eq!(e, DiagramError::Syntax { line: 2, col: 6, msg: "expected ',', found ';'".into() });
    }

    #[test]
    fn figure_eight_structure() {
        let d = build_diagram(&parse_pd(FIG8).unwrap()).unwrap();
        assert_eq!(d.n_regions, 6);
        assert_eq!(d.n_components(), 1);
        assert_eq!(d.crossings.iter().map(|c| c.sign).collect::<Vec<_>>(), [1, 1, -1, -1]);
        assert_eq!(
            d.arcs.iter().map(|a| a.edges.clone()).collect::<Vec<_>>(),
            [vec![1, 2], vec![3, 4], vec![5, 6], vec![7, 8]]
        );
        assert_eq!(d.writhe(0).unwrap(), 0);
    }

    #[test]
    fn trefoil_writhe() {
        let d = build_diagram(&parse_pd(TREFOIL).unwrap()).unwrap();
        assert_eq!(d.n_regions, 5);
        assert_eq!(d.writhe(0).unwrap().abs(), 3);
        assert_eq!(d.arcs.len(), 3);
    }

    #[test]
    fn split_and_passage_errors() {
        let split = format!("{TREFOIL} X[11,14,12,15] X[13,16,14,11] X[15,12,16,13]");
        assert_eq!(build_diagram(&parse_pd(&split).unwrap()).unwrap_err(), DiagramError::Disconnected);
    }
}
