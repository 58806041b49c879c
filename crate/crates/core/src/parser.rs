//! Tokenization and sentence parsing.
//!
//! Declarative sentences are parsed by recursive descent with ordered
//! alternatives and full backtracking, over both structure and lexical
//! ambiguity. Noun-phrase preposition chains attach greedy-longest;
//! a prepositional group is claimed as a prepositional object when the
//! governing verb's valence declares that preposition, and is otherwise
//! left for the adverbial group.

use alloc::borrow::ToOwned;
use alloc::string::String;
use alloc::vec::Vec;
use core::cell::{Cell, RefCell};
use core::fmt;

use crate::lexicon::{LexEntry, Lexicon, Pos, VerbForm};

/// Sentence terminator abbreviations that do not end a sentence.
const ABBREVIATIONS: &[&str] = &["mr.", "mrs.", "dr."];

/// Adverbs that trigger inversion at the beginning of a sentence.
const INVERSION_ADVERBS: &[&str] = &["never", "hardly", "scarcely", "nothing"];

/// Verbs of existence for there/here-initial sentences.
const EXISTENCE_VERBS: &[&str] = &["be", "exist", "stand", "lie", "come"];

/// Subordinating introducers of adverbial clauses.
pub const CLAUSE_INTRODUCERS: &[&str] =
    &["when", "while", "because", "if", "after", "before", "as"];

const RELATIVE_PRONOUNS: &[&str] = &["who", "which", "that"];

/// A surface token with every dictionary analysis attached.
#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub text: String,
    /// Byte offsets into the source text.
    pub span: (usize, usize),
    pub analyses: Vec<LexEntry>,
}

/// Grammar nonterminals, one per production of the sentence grammar.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum NonTerminal {
    DeclarativeSentence,
    ComplexDeclarativeSentence,
    SimpleDeclarativeSentence,
    ReverseOrderSentence,
    ThereIsConstruction,
    SubjectGroup,
    BasicNounPhrase,
    DeterminativeConstruction,
    ParticipialPhrase,
    AttributiveClause,
    InfinitivePhrase,
    PredicateGroup,
    Predicate,
    ObjectGroup,
    IndirectObject,
    DirectObject,
    PrepositionalObject,
    AdverbialGroup,
    AdverbialModifier,
    SimpleAdverbialModifier,
    AdverbialClause,
    ObjectClause,
    SubjectClause,
}

impl NonTerminal {
    pub const ALL: [NonTerminal; 23] = [
        NonTerminal::DeclarativeSentence,
        NonTerminal::ComplexDeclarativeSentence,
        NonTerminal::SimpleDeclarativeSentence,
        NonTerminal::ReverseOrderSentence,
        NonTerminal::ThereIsConstruction,
        NonTerminal::SubjectGroup,
        NonTerminal::BasicNounPhrase,
        NonTerminal::DeterminativeConstruction,
        NonTerminal::ParticipialPhrase,
        NonTerminal::AttributiveClause,
        NonTerminal::InfinitivePhrase,
        NonTerminal::PredicateGroup,
        NonTerminal::Predicate,
        NonTerminal::ObjectGroup,
        NonTerminal::IndirectObject,
        NonTerminal::DirectObject,
        NonTerminal::PrepositionalObject,
        NonTerminal::AdverbialGroup,
        NonTerminal::AdverbialModifier,
        NonTerminal::SimpleAdverbialModifier,
        NonTerminal::AdverbialClause,
        NonTerminal::ObjectClause,
        NonTerminal::SubjectClause,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NonTerminal::DeclarativeSentence => "declarative sentence",
            NonTerminal::ComplexDeclarativeSentence => "complex declarative sentence",
            NonTerminal::SimpleDeclarativeSentence => "simple declarative sentence",
            NonTerminal::ReverseOrderSentence => "sentence with reverse order",
            NonTerminal::ThereIsConstruction => "there-is construction",
            NonTerminal::SubjectGroup => "group of subject",
            NonTerminal::BasicNounPhrase => "basic noun phrase",
            NonTerminal::DeterminativeConstruction => "determinative construction",
            NonTerminal::ParticipialPhrase => "participial phrase",
            NonTerminal::AttributiveClause => "attributive clause",
            NonTerminal::InfinitivePhrase => "infinitive phrase",
            NonTerminal::PredicateGroup => "group of predicate",
            NonTerminal::Predicate => "predicate",
            NonTerminal::ObjectGroup => "group of objects",
            NonTerminal::IndirectObject => "indirect object",
            NonTerminal::DirectObject => "direct object",
            NonTerminal::PrepositionalObject => "prepositional object",
            NonTerminal::AdverbialGroup => "group of adverbial modifiers",
            NonTerminal::AdverbialModifier => "adverbial modifier",
            NonTerminal::SimpleAdverbialModifier => "simple adverbial modifier",
            NonTerminal::AdverbialClause => "adverbial clause",
            NonTerminal::ObjectClause => "object clause",
            NonTerminal::SubjectClause => "subject clause",
        }
    }
}

impl fmt::Display for NonTerminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A leaf of the parse tree: the token plus the analysis the parse
/// committed to.
#[derive(Clone, Debug, PartialEq)]
pub struct Leaf {
    pub text: String,
    pub span: (usize, usize),
    pub analysis: LexEntry,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Child {
    Node(ParseNode),
    Leaf(Leaf),
}

/// Labeled parse tree node.
#[derive(Clone, Debug, PartialEq)]
pub struct ParseNode {
    pub label: NonTerminal,
    pub children: Vec<Child>,
}

impl ParseNode {
    fn new(label: NonTerminal, children: Vec<Child>) -> ParseNode {
        ParseNode { label, children }
    }

    pub fn nodes(&self) -> impl Iterator<Item = &ParseNode> {
        self.children.iter().filter_map(|c| match c {
            Child::Node(n) => Some(n),
            Child::Leaf(_) => None,
        })
    }

    pub fn direct_leaves(&self) -> impl Iterator<Item = &Leaf> {
        self.children.iter().filter_map(|c| match c {
            Child::Leaf(l) => Some(l),
            Child::Node(_) => None,
        })
    }

    pub fn find(&self, label: NonTerminal) -> Option<&ParseNode> {
        self.nodes().find(|n| n.label == label)
    }

    pub fn find_all(&self, label: NonTerminal) -> Vec<&ParseNode> {
        self.nodes().filter(|n| n.label == label).collect()
    }

    /// All leaves, in order.
    pub fn leaves(&self) -> Vec<&Leaf> {
        let mut out = Vec::new();
        fn walk<'a>(node: &'a ParseNode, out: &mut Vec<&'a Leaf>) {
            for child in &node.children {
                match child {
                    Child::Leaf(l) => out.push(l),
                    Child::Node(n) => walk(n, out),
                }
            }
        }
        walk(self, &mut out);
        out
    }

    /// Multiset of nonterminal labels in this tree, as ordered counts.
    pub fn label_counts(&self) -> Vec<(NonTerminal, usize)> {
        let mut counts = alloc::collections::BTreeMap::new();
        fn walk(node: &ParseNode, counts: &mut alloc::collections::BTreeMap<NonTerminal, usize>) {
            *counts.entry(node.label).or_insert(0) += 1;
            for n in node.nodes() {
                walk(n, counts);
            }
        }
        walk(self, &mut counts);
        counts.into_iter().collect()
    }
}

/// How a predicate node is built.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PredicateClass {
    Simple,
    CompoundVerbal,
    CompoundNominal,
}

/// Classify a predicate node by its shape.
pub fn classify_predicate(node: &ParseNode) -> PredicateClass {
    debug_assert_eq!(node.label, NonTerminal::Predicate);
    let nominal = node
        .children
        .last()
        .map(|c| match c {
            Child::Node(n) => n.label == NonTerminal::BasicNounPhrase,
            Child::Leaf(l) => l.analysis.pos == Pos::Adjective,
        })
        .unwrap_or(false);
    if nominal {
        return PredicateClass::CompoundNominal;
    }
    if node.direct_leaves().any(|l| l.analysis.pos == Pos::Auxiliary) {
        PredicateClass::CompoundVerbal
    } else {
        PredicateClass::Simple
    }
}

/// The main verb leaf of a predicate node and its particle, if any.
pub fn predicate_main_verb(node: &ParseNode) -> Option<(&Leaf, Option<&Leaf>)> {
    let leaves: Vec<&Leaf> = node.direct_leaves().collect();
    let main_idx = leaves.iter().rposition(|l| l.analysis.pos == Pos::Verb)?;
    let particle = leaves.get(main_idx + 1).copied().filter(|l| {
        matches!(l.analysis.pos, Pos::Preposition | Pos::Adverb) && l.text != "not"
    });
    Some((leaves[main_idx], particle))
}

/// Auxiliary leaves of a predicate node, in order.
pub fn predicate_auxiliaries(node: &ParseNode) -> Vec<&Leaf> {
    node.direct_leaves().filter(|l| l.analysis.pos == Pos::Auxiliary).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParseError {
    EmptySentence,
    /// Words with no dictionary analysis; the sentence is not parsed.
    UnknownWords(Vec<String>),
    /// No complete parse; carries the longest parsed prefix and the
    /// production that failed furthest in.
    NoParse { consumed: usize, production: &'static str },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::EmptySentence => write!(f, "empty sentence"),
            ParseError::UnknownWords(ws) => {
                write!(f, "unknown words: {}", ws.join(", "))
            }
            ParseError::NoParse { consumed, production } => write!(
                f,
                "no parse: {consumed} token(s) consumed, failed in {production}"
            ),
        }
    }
}

impl core::error::Error for ParseError {}

/// Production enter/exit events for `--trace`.
#[derive(Clone, Copy, Debug)]
pub enum TraceEvent {
    Enter { production: &'static str, position: usize },
    Exit { production: &'static str, position: usize, matched: bool },
}

/// Split text into sentences of analyzed tokens. Sentences end at `.`,
/// `?` or `!` outside the closed abbreviation list; commas are tokens.
pub fn tokenize(text: &str, lexicon: &Lexicon) -> Vec<Vec<Token>> {
    let mut sentences = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    let mut word_start: Option<usize> = None;

    let flush_word = |end: usize, start: &mut Option<usize>, current: &mut Vec<Token>| {
        if let Some(s) = start.take() {
            let text_slice = &text[s..end];
            current.push(Token {
                text: text_slice.to_owned(),
                span: (s, end),
                analyses: lexicon.lookup(text_slice),
            });
        }
    };

    let bytes = text.char_indices().collect::<Vec<_>>();
    let mut i = 0;
    while i < bytes.len() {
        let (at, ch) = bytes[i];
        match ch {
            c if c.is_alphanumeric() || c == '\'' || c == '-' => {
                if word_start.is_none() {
                    word_start = Some(at);
                }
            }
            '.' => {
                // Keep the dot on closed-list abbreviations.
                if let Some(s) = word_start {
                    let with_dot = text[s..at + 1].to_lowercase();
                    if ABBREVIATIONS.contains(&with_dot.as_str()) {
                        let end = at + 1;
                        current.push(Token {
                            text: text[s..end].to_owned(),
                            span: (s, end),
                            analyses: lexicon.lookup(&text[s..end]),
                        });
                        word_start = None;
                        i += 1;
                        continue;
                    }
                }
                flush_word(at, &mut word_start, &mut current);
                if !current.is_empty() {
                    sentences.push(core::mem::take(&mut current));
                }
            }
            '?' | '!' => {
                flush_word(at, &mut word_start, &mut current);
                if !current.is_empty() {
                    sentences.push(core::mem::take(&mut current));
                }
            }
            ',' => {
                flush_word(at, &mut word_start, &mut current);
                current.push(Token {
                    text: ",".to_owned(),
                    span: (at, at + 1),
                    analyses: lexicon.lookup(","),
                });
            }
            _ => flush_word(at, &mut word_start, &mut current),
        }
        i += 1;
    }
    flush_word(text.len(), &mut word_start, &mut current);
    if !current.is_empty() {
        sentences.push(current);
    }
    sentences
}

/// Claim context for prepositional attachment inside noun phrases and
/// object groups.
#[derive(Clone, Copy)]
struct Claims<'a> {
    verb: Option<&'a str>,
    /// Passive participles claim "by" for the demoted subject.
    allow_by: bool,
}

impl<'a> Claims<'a> {
    const NONE: Claims<'static> = Claims { verb: None, allow_by: false };

    fn claims(&self, lexicon: &Lexicon, prep: &str) -> bool {
        if self.allow_by && prep == "by" {
            return true;
        }
        match self.verb {
            Some(lemma) => lexicon.verb_claims_prep(lemma, prep),
            None => false,
        }
    }
}

type Alts = Vec<(ParseNode, usize)>;

struct Ctx<'a, 'b> {
    lexicon: &'a Lexicon,
    tokens: &'a [Token],
    trace: RefCell<Option<&'b mut dyn FnMut(TraceEvent)>>,
    furthest: Cell<usize>,
    furthest_production: Cell<&'static str>,
}

impl<'a, 'b> Ctx<'a, 'b> {
    fn traced<T>(
        &self,
        production: &'static str,
        position: usize,
        f: impl FnOnce() -> Vec<T>,
    ) -> Vec<T> {
        if let Some(t) = self.trace.borrow_mut().as_mut() {
            t(TraceEvent::Enter { production, position });
        }
        let out = f();
        if let Some(t) = self.trace.borrow_mut().as_mut() {
            t(TraceEvent::Exit { production, position, matched: !out.is_empty() });
        }
        if out.is_empty() && position >= self.furthest.get() {
            self.furthest.set(position);
            self.furthest_production.set(production);
        }
        out
    }

    fn token(&self, pos: usize) -> Option<&'a Token> {
        self.tokens.get(pos)
    }

    /// Analyses of the token at `pos` passing the filter, in dictionary
    /// order.
    fn analyses(&self, pos: usize, f: impl Fn(&LexEntry) -> bool) -> Vec<&'a LexEntry> {
        match self.token(pos) {
            Some(t) => t.analyses.iter().filter(|e| f(e)).collect(),
            None => Vec::new(),
        }
    }

    fn leaf(&self, pos: usize, analysis: &LexEntry) -> Leaf {
        let t = &self.tokens[pos];
        Leaf { text: t.text.clone(), span: t.span, analysis: analysis.clone() }
    }

    fn surface(&self, pos: usize) -> Option<String> {
        self.token(pos).map(|t| t.text.to_lowercase())
    }

    // declarative sentence ::= complex | simple; only used on the whole
    // token list, so full consumption is enforced here.
    fn declarative(&self) -> Option<ParseNode> {
        let len = self.tokens.len();
        // Complex: split at the first workable top-level conjunction.
        for i in 1..len.saturating_sub(1) {
            if self.analyses(i, |e| e.pos == Pos::Conjunction).is_empty() {
                continue;
            }
            let conj = self.analyses(i, |e| e.pos == Pos::Conjunction)[0];
            let halves = self.traced("complex declarative sentence", 0, || {
                let mut out = Vec::new();
                for (left, lnext) in self.simple(0) {
                    if lnext != i {
                        continue;
                    }
                    for (right, rnext) in self.simple(i + 1) {
                        if rnext != len {
                            continue;
                        }
                        out.push(ParseNode::new(
                            NonTerminal::ComplexDeclarativeSentence,
                            alloc::vec![
                                Child::Node(left.clone()),
                                Child::Leaf(self.leaf(i, conj)),
                                Child::Node(right),
                            ],
                        ));
                        break;
                    }
                    if !out.is_empty() {
                        break;
                    }
                }
                out
            });
            if let Some(node) = halves.into_iter().next() {
                return Some(ParseNode::new(
                    NonTerminal::DeclarativeSentence,
                    alloc::vec![Child::Node(node)],
                ));
            }
        }
        for (node, next) in self.simple(0) {
            if next == len {
                return Some(ParseNode::new(
                    NonTerminal::DeclarativeSentence,
                    alloc::vec![Child::Node(node)],
                ));
            }
        }
        None
    }

    // simple declarative ::= [adverbial modifier] subject predicate-group
    //                      | reverse order
    fn simple(&self, pos: usize) -> Alts {
        self.traced("simple declarative sentence", pos, || {
            let mut out = Vec::new();
            let straight = |lead: Option<(ParseNode, usize)>, out: &mut Alts| {
                let (lead_node, p) = match lead {
                    Some((n, p)) => (Some(n), p),
                    None => (None, pos),
                };
                for (subj, p2) in self.subject_group(p) {
                    for (pred, p3) in self.predicate_group(p2, None) {
                        let mut children = Vec::new();
                        if let Some(l) = &lead_node {
                            children.push(Child::Node(l.clone()));
                        }
                        children.push(Child::Node(subj.clone()));
                        children.push(Child::Node(pred));
                        out.push((
                            ParseNode::new(NonTerminal::SimpleDeclarativeSentence, children),
                            p3,
                        ));
                    }
                }
            };
            straight(None, &mut out);
            for lead in self.adverbial_modifier(pos) {
                straight(Some(lead), &mut out);
            }
            for (rev, p) in self.reverse_order(pos) {
                out.push((
                    ParseNode::new(
                        NonTerminal::SimpleDeclarativeSentence,
                        alloc::vec![Child::Node(rev)],
                    ),
                    p,
                ));
            }
            out
        })
    }

    fn reverse_order(&self, pos: usize) -> Alts {
        self.traced("sentence with reverse order", pos, || {
            let mut out = Vec::new();
            for (node, p) in self.there_is(pos) {
                out.push((
                    ParseNode::new(
                        NonTerminal::ReverseOrderSentence,
                        alloc::vec![Child::Node(node)],
                    ),
                    p,
                ));
            }
            // there/here + verb of existence + subject + adverbials
            if let Some(word) = self.surface(pos) {
                if word == "there" || word == "here" {
                    if let Some(adv) =
                        self.analyses(pos, |e| e.pos == Pos::Adverb).first().copied()
                    {
                        for verb in self.analyses(pos + 1, |e| {
                            e.pos == Pos::Verb
                                && EXISTENCE_VERBS.contains(&e.lemma.as_str())
                                && finite(e)
                        }) {
                            for (subj, p2) in self.subject_group(pos + 2) {
                                for (advs, p3) in self.adverbial_group(p2) {
                                    out.push((
                                        ParseNode::new(
                                            NonTerminal::ReverseOrderSentence,
                                            alloc::vec![
                                                Child::Leaf(self.leaf(pos, adv)),
                                                Child::Leaf(self.leaf(pos + 1, verb)),
                                                Child::Node(subj.clone()),
                                                Child::Node(advs),
                                            ],
                                        ),
                                        p3,
                                    ));
                                }
                            }
                        }
                    }
                }
            }
            // inversion adverb + auxiliary + subject + rest of predicate
            if let Some(word) = self.surface(pos) {
                if INVERSION_ADVERBS.contains(&word.as_str()) {
                    if let Some(adv) =
                        self.analyses(pos, |e| e.pos == Pos::Adverb).first().copied()
                    {
                        for aux in self.analyses(pos + 1, |e| e.pos == Pos::Auxiliary) {
                            let fronted = self.leaf(pos + 1, aux);
                            for (subj, p2) in self.subject_group(pos + 2) {
                                for (pred, p3) in self.predicate_group(p2, Some(&fronted)) {
                                    out.push((
                                        ParseNode::new(
                                            NonTerminal::ReverseOrderSentence,
                                            alloc::vec![
                                                Child::Leaf(self.leaf(pos, adv)),
                                                Child::Leaf(fronted.clone()),
                                                Child::Node(subj.clone()),
                                                Child::Node(pred),
                                            ],
                                        ),
                                        p3,
                                    ));
                                }
                            }
                        }
                    }
                }
            }
            out
        })
    }

    // there + be (indefinite tense) + subject + adverbials
    fn there_is(&self, pos: usize) -> Alts {
        self.traced("there-is construction", pos, || {
            let mut out = Vec::new();
            if self.surface(pos).as_deref() != Some("there") {
                return out;
            }
            let Some(adv) = self.analyses(pos, |e| e.pos == Pos::Adverb).first().copied()
            else {
                return out;
            };
            for be in self.analyses(pos + 1, |e| e.pos == Pos::Verb && e.lemma == "be" && finite(e))
            {
                for (subj, p2) in self.subject_group(pos + 2) {
                    for (advs, p3) in self.adverbial_group(p2) {
                        out.push((
                            ParseNode::new(
                                NonTerminal::ThereIsConstruction,
                                alloc::vec![
                                    Child::Leaf(self.leaf(pos, adv)),
                                    Child::Leaf(self.leaf(pos + 1, be)),
                                    Child::Node(subj.clone()),
                                    Child::Node(advs),
                                ],
                            ),
                            p3,
                        ));
                    }
                }
            }
            out
        })
    }

    // group of subject ::= basic noun phrase [determinative] | subject clause
    fn subject_group(&self, pos: usize) -> Alts {
        self.traced("group of subject", pos, || {
            let mut out = Vec::new();
            for (bnp, det, p) in self.noun_phrase(pos, Claims::NONE, true) {
                let mut children = alloc::vec![Child::Node(bnp)];
                if let Some(d) = det {
                    children.push(Child::Node(d));
                }
                out.push((ParseNode::new(NonTerminal::SubjectGroup, children), p));
            }
            for (clause, p) in self.that_clause(pos, NonTerminal::SubjectClause) {
                out.push((
                    ParseNode::new(NonTerminal::SubjectGroup, alloc::vec![Child::Node(clause)]),
                    p,
                ));
            }
            out
        })
    }

    fn that_clause(&self, pos: usize, label: NonTerminal) -> Alts {
        let name = match label {
            NonTerminal::SubjectClause => "subject clause",
            _ => "object clause",
        };
        self.traced(name, pos, || {
            let mut out = Vec::new();
            if self.surface(pos).as_deref() != Some("that") {
                return out;
            }
            let Some(intro) = self
                .analyses(pos, |e| e.pos == Pos::Conjunction || e.pos == Pos::Pronoun)
                .first()
                .copied()
            else {
                return out;
            };
            for (body, p) in self.simple(pos + 1) {
                out.push((
                    ParseNode::new(
                        label,
                        alloc::vec![Child::Leaf(self.leaf(pos, intro)), Child::Node(body)],
                    ),
                    p,
                ));
            }
            out
        })
    }

    // One noun unit: a pronoun, or (determiner|adjective|numeral)* noun+.
    // Longest noun run first.
    fn unit(&self, pos: usize) -> Vec<(Vec<Leaf>, usize)> {
        let mut out = Vec::new();
        if let Some(pron) = self.analyses(pos, |e| e.pos == Pos::Pronoun).first() {
            out.push((alloc::vec![self.leaf(pos, pron)], pos + 1));
        }
        let mut prefix = Vec::new();
        let mut p = pos;
        loop {
            let mods = self.analyses(p, |e| {
                matches!(e.pos, Pos::Determiner | Pos::Adjective | Pos::Numeral)
            });
            // Stop extending the modifier run once a noun reading exists
            // here; nouns may double as modifiers only via backtracking.
            if mods.is_empty() || !self.analyses(p, |e| e.pos == Pos::Noun).is_empty() {
                break;
            }
            prefix.push(self.leaf(p, mods[0]));
            p += 1;
        }
        let mut nouns = Vec::new();
        let mut q = p;
        while let Some(n) = self.analyses(q, |e| e.pos == Pos::Noun).first() {
            nouns.push(self.leaf(q, n));
            q += 1;
        }
        for take in (1..=nouns.len()).rev() {
            let mut leaves = prefix.clone();
            leaves.extend(nouns[..take].iter().cloned());
            out.push((leaves, p + take));
        }
        out
    }

    // Noun group: unit, optionally coordinated by comma or conjunction.
    fn group(&self, pos: usize) -> Vec<(Vec<Leaf>, usize)> {
        let mut out = Vec::new();
        for (leaves, p) in self.unit(pos) {
            // Try to extend with coordination, longest first.
            let mut extended = Vec::new();
            if let Some(conj) =
                self.analyses(p, |e| e.pos == Pos::Conjunction).first().copied()
            {
                for (more, p2) in self.group(p + 1) {
                    let mut all = leaves.clone();
                    all.push(self.leaf(p, conj));
                    all.extend(more);
                    extended.push((all, p2));
                }
            }
            out.extend(extended);
            out.push((leaves, p));
        }
        out
    }

    // Basic noun phrase: noun groups chained by unclaimed prepositions,
    // greedy-longest first.
    fn bnp_leaves(&self, pos: usize, claims: Claims<'_>) -> Vec<(Vec<Leaf>, usize)> {
        let mut out = Vec::new();
        for (leaves, p) in self.group(pos) {
            let mut chains = Vec::new();
            if let Some(prep) = self.analyses(p, |e| e.pos == Pos::Preposition).first().copied()
            {
                let word = prep.lemma.clone();
                if !claims.claims(self.lexicon, &word) {
                    for (more, p2) in self.bnp_leaves(p + 1, claims) {
                        let mut all = leaves.clone();
                        all.push(self.leaf(p, prep));
                        all.extend(more);
                        chains.push((all, p2));
                    }
                }
            }
            out.extend(chains);
            out.push((leaves, p));
        }
        out
    }

    /// Noun phrase with optional determinative construction. Alternatives
    /// are ordered chain-longest first, determinative attached before not.
    fn noun_phrase(
        &self,
        pos: usize,
        claims: Claims<'_>,
        allow_det: bool,
    ) -> Vec<(ParseNode, Option<ParseNode>, usize)> {
        let alts = self.traced("basic noun phrase", pos, || self.bnp_leaves(pos, claims));
        let mut out = Vec::new();
        for (leaves, p) in alts {
            let node = ParseNode::new(
                NonTerminal::BasicNounPhrase,
                leaves.into_iter().map(Child::Leaf).collect(),
            );
            if allow_det {
                for (det, p2) in self.determinative(p) {
                    out.push((node.clone(), Some(det), p2));
                }
            }
            out.push((node, None, p));
        }
        out
    }

    fn determinative(&self, pos: usize) -> Alts {
        self.traced("determinative construction", pos, || {
            let mut out = Vec::new();
            for (inner, p) in self.participial_phrase(pos) {
                out.push((wrap(NonTerminal::DeterminativeConstruction, inner), p));
            }
            for (inner, p) in self.attributive_clause(pos) {
                out.push((wrap(NonTerminal::DeterminativeConstruction, inner), p));
            }
            for (inner, p) in self.infinitive_phrase(pos) {
                out.push((wrap(NonTerminal::DeterminativeConstruction, inner), p));
            }
            out
        })
    }

    // participle + controlled construction
    fn participial_phrase(&self, pos: usize) -> Alts {
        self.traced("participial phrase", pos, || {
            let mut out = Vec::new();
            for verb in self.analyses(pos, |e| {
                e.pos == Pos::Verb
                    && matches!(e.features.verb_form, VerbForm::Ing | VerbForm::PastPart)
            }) {
                let claims = Claims {
                    verb: Some(&verb.lemma),
                    allow_by: verb.features.verb_form == VerbForm::PastPart,
                };
                for (rest, p) in self.controlled(pos + 1, claims) {
                    let mut children = alloc::vec![Child::Leaf(self.leaf(pos, verb))];
                    children.extend(rest);
                    out.push((ParseNode::new(NonTerminal::ParticipialPhrase, children), p));
                }
            }
            out
        })
    }

    // to + base verb [+ particle] + controlled construction
    fn infinitive_phrase(&self, pos: usize) -> Alts {
        self.traced("infinitive phrase", pos, || {
            let mut out = Vec::new();
            if self.surface(pos).as_deref() != Some("to") {
                return out;
            }
            let Some(to) = self.analyses(pos, |e| e.pos == Pos::Preposition).first().copied()
            else {
                return out;
            };
            for verb in self
                .analyses(pos + 1, |e| e.pos == Pos::Verb && e.features.verb_form == VerbForm::Base)
            {
                let particle = self.particle_at(pos + 2, &verb.lemma);
                let after = if particle.is_some() { pos + 3 } else { pos + 2 };
                let claims = Claims { verb: Some(&verb.lemma), allow_by: false };
                for (rest, p) in self.controlled(after, claims) {
                    let mut children = alloc::vec![
                        Child::Leaf(self.leaf(pos, to)),
                        Child::Leaf(self.leaf(pos + 1, verb)),
                    ];
                    if let Some(part) = &particle {
                        children.push(Child::Leaf(part.clone()));
                    }
                    children.extend(rest);
                    out.push((ParseNode::new(NonTerminal::InfinitivePhrase, children), p));
                }
            }
            out
        })
    }

    // who/which/that + clause body; subject-gap reading first.
    fn attributive_clause(&self, pos: usize) -> Alts {
        self.traced("attributive clause", pos, || {
            let mut out = Vec::new();
            let Some(word) = self.surface(pos) else { return out };
            if !RELATIVE_PRONOUNS.contains(&word.as_str()) {
                return out;
            }
            let Some(intro) = self
                .analyses(pos, |e| {
                    matches!(e.pos, Pos::Pronoun | Pos::Conjunction | Pos::Determiner)
                })
                .first()
                .copied()
            else {
                return out;
            };
            for (pred, p) in self.predicate_group(pos + 1, None) {
                out.push((
                    ParseNode::new(
                        NonTerminal::AttributiveClause,
                        alloc::vec![Child::Leaf(self.leaf(pos, intro)), Child::Node(pred)],
                    ),
                    p,
                ));
            }
            for (subj, p1) in self.subject_group(pos + 1) {
                for (pred, p) in self.predicate_group(p1, None) {
                    out.push((
                        ParseNode::new(
                            NonTerminal::AttributiveClause,
                            alloc::vec![
                                Child::Leaf(self.leaf(pos, intro)),
                                Child::Node(subj.clone()),
                                Child::Node(pred),
                            ],
                        ),
                        p,
                    ));
                }
            }
            out
        })
    }

    // [group of objects][group of adverbial modifiers] after a verb form.
    fn controlled(&self, pos: usize, claims: Claims<'a>) -> Vec<(Vec<Child>, usize)> {
        let mut out = Vec::new();
        let with_advs = |prefix: Vec<Child>, p: usize, out: &mut Vec<(Vec<Child>, usize)>| {
            for (advs, p2) in self.adverbial_group(p) {
                let mut children = prefix.clone();
                children.push(Child::Node(advs));
                out.push((children, p2));
            }
            out.push((prefix, p));
        };
        for (objs, p) in self.object_group(pos, claims) {
            with_advs(alloc::vec![Child::Node(objs)], p, &mut out);
        }
        with_advs(Vec::new(), pos, &mut out);
        out
    }

    // predicate group ::= predicate [objects] [adverbials]
    fn predicate_group(&self, pos: usize, fronted: Option<&Leaf>) -> Alts {
        self.traced("group of predicate", pos, || {
            let mut out = Vec::new();
            for (pred, claims, p) in self.predicate(pos, fronted) {
                for (rest, p2) in self.controlled(p, claims) {
                    let mut children = alloc::vec![Child::Node(pred.clone())];
                    children.extend(rest);
                    out.push((ParseNode::new(NonTerminal::PredicateGroup, children), p2));
                }
            }
            out
        })
    }

    fn particle_at(&self, pos: usize, lemma: &str) -> Option<Leaf> {
        let word = self.surface(pos)?;
        if !self.lexicon.has_particle_sense(lemma, &word) {
            return None;
        }
        // A following noun-group start reads as a prepositional phrase,
        // not a particle.
        let next_is_nominal = !self
            .analyses(pos + 1, |e| {
                matches!(
                    e.pos,
                    Pos::Determiner | Pos::Adjective | Pos::Numeral | Pos::Noun | Pos::Pronoun
                )
            })
            .is_empty();
        if next_is_nominal {
            return None;
        }
        self.analyses(pos, |e| matches!(e.pos, Pos::Preposition | Pos::Adverb))
            .first()
            .map(|a| self.leaf(pos, a))
    }

    // predicate ::= [adverb] aux* [not] [adverb] verb [particle] [complement]
    fn predicate(&self, pos: usize, fronted: Option<&Leaf>) -> Vec<(ParseNode, Claims<'a>, usize)> {
        let out = self.traced("predicate", pos, || {
            let mut out: Vec<(ParseNode, Claims<'a>, usize)> = Vec::new();
            let lead_adverb = self
                .analyses(pos, |e| e.pos == Pos::Adverb)
                .first()
                .copied()
                .filter(|_| {
                    self.surface(pos).as_deref() != Some("not")
                        && !self
                            .analyses(pos + 1, |e| {
                                matches!(e.pos, Pos::Verb | Pos::Auxiliary)
                            })
                            .is_empty()
                });
            let starts = match lead_adverb {
                Some(adv) => alloc::vec![(Some(adv), pos + 1)],
                None => alloc::vec![(None, pos)],
            };
            for (lead, start) in starts {
                // Verb-ish run with at most one "not".
                let mut verbish: Vec<usize> = Vec::new();
                let mut not_at: Option<usize> = None;
                let mut p = start;
                loop {
                    if self.surface(p).as_deref() == Some("not")
                        && not_at.is_none()
                        && !verbish.is_empty()
                    {
                        not_at = Some(p);
                        p += 1;
                        continue;
                    }
                    if !self
                        .analyses(p, |e| matches!(e.pos, Pos::Verb | Pos::Auxiliary))
                        .is_empty()
                    {
                        verbish.push(p);
                        p += 1;
                        continue;
                    }
                    break;
                }
                // Longest run first: the last verb-ish token is the main
                // verb, everything before must read as auxiliaries.
                for take in (1..=verbish.len()).rev() {
                    let main_pos = verbish[take - 1];
                    // "not" may sit inside the auxiliary chain or directly
                    // after a finite main verb (nominal negation).
                    let not_after_main = not_at == Some(main_pos + 1);
                    if let Some(n) = not_at {
                        if n > main_pos + 1 {
                            continue;
                        }
                    }
                    let aux_positions = &verbish[..take - 1];
                    let auxes: Vec<&LexEntry> = aux_positions
                        .iter()
                        .map(|&ap| {
                            self.analyses(ap, |e| e.pos == Pos::Auxiliary).first().copied()
                        })
                        .collect::<Option<Vec<_>>>()
                        .unwrap_or_default();
                    if auxes.len() != aux_positions.len() {
                        continue;
                    }
                    for main in self.analyses(main_pos, |e| e.pos == Pos::Verb) {
                        let particle = if not_after_main {
                            None
                        } else {
                            self.particle_at(main_pos + 1, &main.lemma)
                        };
                        let after_verb = if particle.is_some() || not_after_main {
                            main_pos + 2
                        } else {
                            main_pos + 1
                        };
                        let mut children: Vec<Child> = Vec::new();
                        if let Some(adv) = lead {
                            children.push(Child::Leaf(self.leaf(pos, adv)));
                        }
                        for (&ap, aux) in aux_positions.iter().zip(&auxes) {
                            children.push(Child::Leaf(self.leaf(ap, aux)));
                            if not_at == Some(ap + 1) {
                                let not = self.analyses(ap + 1, |e| e.pos == Pos::Adverb);
                                if let Some(n) = not.first() {
                                    children.push(Child::Leaf(self.leaf(ap + 1, n)));
                                }
                            }
                        }
                        children.push(Child::Leaf(self.leaf(main_pos, main)));
                        if not_after_main {
                            if let Some(n) =
                                self.analyses(main_pos + 1, |e| e.pos == Pos::Adverb).first()
                            {
                                children.push(Child::Leaf(self.leaf(main_pos + 1, n)));
                            }
                        }
                        if let Some(part) = &particle {
                            children.push(Child::Leaf(part.clone()));
                        }
                        let claims = Claims {
                            verb: Some(&main.lemma),
                            allow_by: is_passive_shape(&auxes, main, fronted),
                        };
                        // Compound nominal: be + noun phrase or adjective.
                        if main.lemma == "be" && particle.is_none() {
                            for (bnp, _det, p2) in
                                self.noun_phrase(after_verb, claims, false)
                            {
                                let mut nominal = children.clone();
                                nominal.push(Child::Node(bnp));
                                out.push((
                                    ParseNode::new(NonTerminal::Predicate, nominal),
                                    claims,
                                    p2,
                                ));
                            }
                            if let Some(adj) = self
                                .analyses(after_verb, |e| e.pos == Pos::Adjective)
                                .first()
                            {
                                let mut nominal = children.clone();
                                nominal.push(Child::Leaf(self.leaf(after_verb, adj)));
                                out.push((
                                    ParseNode::new(NonTerminal::Predicate, nominal),
                                    claims,
                                    after_verb + 1,
                                ));
                            }
                        }
                        out.push((
                            ParseNode::new(NonTerminal::Predicate, children),
                            claims,
                            after_verb,
                        ));
                    }
                }
            }
            out
        });
        out
    }

    // group of objects ::= [indirect] [direct] [prepositional]
    fn object_group(&self, pos: usize, claims: Claims<'a>) -> Alts {
        self.traced("group of objects", pos, || {
            let mut out = Vec::new();
            let push = |children: Vec<Child>, p: usize, out: &mut Alts| {
                out.push((ParseNode::new(NonTerminal::ObjectGroup, children), p));
            };
            // indirect + direct (+ prepositional)
            for (io, p1) in self.simple_object(pos, claims, NonTerminal::IndirectObject) {
                for (dobj, p2) in self.direct_object(p1, claims) {
                    for (po, p3) in self.prep_object(p2, claims) {
                        push(
                            alloc::vec![
                                Child::Node(io.clone()),
                                Child::Node(dobj.clone()),
                                Child::Node(po),
                            ],
                            p3,
                            &mut out,
                        );
                    }
                    push(alloc::vec![Child::Node(io.clone()), Child::Node(dobj)], p2, &mut out);
                }
            }
            // direct (+ prepositional)
            for (dobj, p1) in self.direct_object(pos, claims) {
                for (po, p2) in self.prep_object(p1, claims) {
                    push(alloc::vec![Child::Node(dobj.clone()), Child::Node(po)], p2, &mut out);
                }
                push(alloc::vec![Child::Node(dobj)], p1, &mut out);
            }
            // prepositional only
            for (po, p1) in self.prep_object(pos, claims) {
                push(alloc::vec![Child::Node(po)], p1, &mut out);
            }
            out
        })
    }

    fn simple_object(&self, pos: usize, claims: Claims<'a>, label: NonTerminal) -> Alts {
        let name = match label {
            NonTerminal::IndirectObject => "indirect object",
            _ => "direct object",
        };
        self.traced(name, pos, || {
            let mut out = Vec::new();
            for (bnp, det, p) in self.noun_phrase(pos, claims, true) {
                let mut children = alloc::vec![Child::Node(bnp)];
                if let Some(d) = det {
                    children.push(Child::Node(d));
                }
                out.push((ParseNode::new(label, children), p));
            }
            out
        })
    }

    fn direct_object(&self, pos: usize, claims: Claims<'a>) -> Alts {
        let mut out = self.simple_object(pos, claims, NonTerminal::DirectObject);
        for (inf, p) in self.infinitive_phrase(pos) {
            out.push((wrap(NonTerminal::DirectObject, inf), p));
        }
        for (clause, p) in self.that_clause(pos, NonTerminal::ObjectClause) {
            out.push((wrap(NonTerminal::DirectObject, clause), p));
        }
        out
    }

    fn prep_object(&self, pos: usize, claims: Claims<'a>) -> Alts {
        self.traced("prepositional object", pos, || {
            let mut out = Vec::new();
            let Some(prep) = self.analyses(pos, |e| e.pos == Pos::Preposition).first().copied()
            else {
                return out;
            };
            if !claims.claims(self.lexicon, &prep.lemma) {
                return out;
            }
            for (bnp, det, p) in self.noun_phrase(pos + 1, claims, true) {
                let mut children =
                    alloc::vec![Child::Leaf(self.leaf(pos, prep)), Child::Node(bnp)];
                if let Some(d) = det {
                    children.push(Child::Node(d));
                }
                out.push((ParseNode::new(NonTerminal::PrepositionalObject, children), p));
            }
            out
        })
    }

    fn adverbial_group(&self, pos: usize) -> Alts {
        self.traced("group of adverbial modifiers", pos, || {
            let mut out = Vec::new();
            for (first, p1) in self.adverbial_modifier(pos) {
                // Longer groups first.
                for (rest, p2) in self.adverbial_group(p1) {
                    let mut children = alloc::vec![Child::Node(first.clone())];
                    children.extend(rest.children);
                    out.push((ParseNode::new(NonTerminal::AdverbialGroup, children), p2));
                }
                out.push((
                    ParseNode::new(
                        NonTerminal::AdverbialGroup,
                        alloc::vec![Child::Node(first)],
                    ),
                    p1,
                ));
            }
            out
        })
    }

    fn adverbial_modifier(&self, pos: usize) -> Alts {
        self.traced("adverbial modifier", pos, || {
            let mut out = Vec::new();
            for (simple, p) in self.simple_adverbial(pos) {
                out.push((wrap(NonTerminal::AdverbialModifier, simple), p));
            }
            for (clause, p) in self.adverbial_clause(pos) {
                out.push((wrap(NonTerminal::AdverbialModifier, clause), p));
            }
            for (part, p) in self.participial_phrase(pos) {
                out.push((wrap(NonTerminal::AdverbialModifier, part), p));
            }
            for (inf, p) in self.infinitive_phrase(pos) {
                out.push((wrap(NonTerminal::AdverbialModifier, inf), p));
            }
            out
        })
    }

    // adverb | [conjunction] preposition BNP | BNP adverb
    fn simple_adverbial(&self, pos: usize) -> Alts {
        self.traced("simple adverbial modifier", pos, || {
            let mut out = Vec::new();
            if self.surface(pos).as_deref() != Some("not") {
                if let Some(adv) = self.analyses(pos, |e| e.pos == Pos::Adverb).first() {
                    out.push((
                        ParseNode::new(
                            NonTerminal::SimpleAdverbialModifier,
                            alloc::vec![Child::Leaf(self.leaf(pos, adv))],
                        ),
                        pos + 1,
                    ));
                }
            }
            let prep_alt = |conj: Option<Leaf>, p: usize, out: &mut Alts| {
                if let Some(prep) = self.analyses(p, |e| e.pos == Pos::Preposition).first() {
                    for (bnp, _det, p2) in self.noun_phrase(p + 1, Claims::NONE, false) {
                        let mut children = Vec::new();
                        if let Some(c) = &conj {
                            children.push(Child::Leaf(c.clone()));
                        }
                        children.push(Child::Leaf(self.leaf(p, prep)));
                        children.push(Child::Node(bnp));
                        out.push((
                            ParseNode::new(NonTerminal::SimpleAdverbialModifier, children),
                            p2,
                        ));
                    }
                }
            };
            prep_alt(None, pos, &mut out);
            if let Some(conj) = self.analyses(pos, |e| e.pos == Pos::Conjunction).first() {
                if self.surface(pos).as_deref() != Some(",") {
                    prep_alt(Some(self.leaf(pos, conj)), pos + 1, &mut out);
                }
            }
            for (bnp, _det, p) in self.noun_phrase(pos, Claims::NONE, false) {
                if let Some(adv) = self.analyses(p, |e| e.pos == Pos::Adverb).first() {
                    out.push((
                        ParseNode::new(
                            NonTerminal::SimpleAdverbialModifier,
                            alloc::vec![Child::Node(bnp), Child::Leaf(self.leaf(p, adv))],
                        ),
                        p + 1,
                    ));
                }
            }
            out
        })
    }

    fn adverbial_clause(&self, pos: usize) -> Alts {
        self.traced("adverbial clause", pos, || {
            let mut out = Vec::new();
            let Some(word) = self.surface(pos) else { return out };
            if !CLAUSE_INTRODUCERS.contains(&word.as_str()) {
                return out;
            }
            let Some(intro) = self
                .analyses(pos, |e| matches!(e.pos, Pos::Conjunction | Pos::Preposition))
                .first()
                .copied()
            else {
                return out;
            };
            for (body, p) in self.simple(pos + 1) {
                out.push((
                    ParseNode::new(
                        NonTerminal::AdverbialClause,
                        alloc::vec![Child::Leaf(self.leaf(pos, intro)), Child::Node(body)],
                    ),
                    p,
                ));
            }
            out
        })
    }
}

fn wrap(label: NonTerminal, inner: ParseNode) -> ParseNode {
    ParseNode::new(label, alloc::vec![Child::Node(inner)])
}

fn finite(e: &LexEntry) -> bool {
    matches!(
        e.features.verb_form,
        VerbForm::Base | VerbForm::ThirdSing | VerbForm::Past
    )
}

// be + past participle, possibly under a fronted auxiliary.
fn is_passive_shape(auxes: &[&LexEntry], main: &LexEntry, fronted: Option<&Leaf>) -> bool {
    if main.features.verb_form != VerbForm::PastPart {
        return false;
    }
    if let Some(last) = auxes.last() {
        return last.lemma == "be";
    }
    fronted.map(|f| f.analysis.lemma == "be").unwrap_or(false)
}

/// Parse one declarative sentence; the tree consumes every token.
pub fn parse_declarative(lexicon: &Lexicon, tokens: &[Token]) -> Result<ParseNode, ParseError> {
    parse_declarative_impl(lexicon, tokens, None)
}

/// As [`parse_declarative`], streaming production enter/exit events.
pub fn parse_declarative_traced(
    lexicon: &Lexicon,
    tokens: &[Token],
    trace: &mut dyn FnMut(TraceEvent),
) -> Result<ParseNode, ParseError> {
    parse_declarative_impl(lexicon, tokens, Some(trace))
}

fn parse_declarative_impl(
    lexicon: &Lexicon,
    tokens: &[Token],
    trace: Option<&mut dyn FnMut(TraceEvent)>,
) -> Result<ParseNode, ParseError> {
    if tokens.is_empty() {
        return Err(ParseError::EmptySentence);
    }
    let unknown: Vec<String> = tokens
        .iter()
        .filter(|t| t.analyses.is_empty())
        .map(|t| t.text.clone())
        .collect();
    if !unknown.is_empty() {
        return Err(ParseError::UnknownWords(unknown));
    }
    let ctx = Ctx {
        lexicon,
        tokens,
        trace: RefCell::new(trace),
        furthest: Cell::new(0),
        furthest_production: Cell::new("declarative sentence"),
    };
    match ctx.declarative() {
        Some(node) => Ok(node),
        None => Err(ParseError::NoParse {
            consumed: ctx.furthest.get(),
            production: ctx.furthest_production.get(),
        }),
    }
}

/// Result of parsing a noun phrase from the start of a token slice.
#[derive(Clone, Debug)]
pub struct NounPhrase {
    pub phrase: ParseNode,
    pub determinative: Option<ParseNode>,
    pub consumed: usize,
}

/// Parse a basic noun phrase (with optional determinative construction)
/// from the start of the slice, greedy-longest.
pub fn parse_noun_phrase(lexicon: &Lexicon, tokens: &[Token]) -> Result<NounPhrase, ParseError> {
    if tokens.is_empty() {
        return Err(ParseError::EmptySentence);
    }
    let ctx = Ctx {
        lexicon,
        tokens,
        trace: RefCell::new(None),
        furthest: Cell::new(0),
        furthest_production: Cell::new("basic noun phrase"),
    };
    let mut best: Option<NounPhrase> = None;
    for (bnp, det, p) in ctx.noun_phrase(0, Claims::NONE, true) {
        if best.as_ref().map(|b| p > b.consumed).unwrap_or(true) {
            best = Some(NounPhrase { phrase: bnp, determinative: det, consumed: p });
        }
    }
    best.ok_or(ParseError::NoParse { consumed: 0, production: "basic noun phrase" })
}

/// Parse a predicate group (predicate + controlled construction) from the
/// start of the slice, greedy-longest.
pub fn parse_predicate_group(
    lexicon: &Lexicon,
    tokens: &[Token],
) -> Result<(ParseNode, usize), ParseError> {
    if tokens.is_empty() {
        return Err(ParseError::EmptySentence);
    }
    let ctx = Ctx {
        lexicon,
        tokens,
        trace: RefCell::new(None),
        furthest: Cell::new(0),
        furthest_production: Cell::new("group of predicate"),
    };
    let mut best: Option<(ParseNode, usize)> = None;
    for (node, p) in ctx.predicate_group(0, None) {
        if best.as_ref().map(|(_, bp)| p > *bp).unwrap_or(true) {
            best = Some((node, p));
        }
    }
    best.ok_or(ParseError::NoParse { consumed: 0, production: "group of predicate" })
}

/// Parse an infinitive phrase from the start of the slice, greedy-longest.
/// Used for knowledge-base stage lines.
pub fn parse_infinitive_phrase(
    lexicon: &Lexicon,
    tokens: &[Token],
) -> Result<(ParseNode, usize), ParseError> {
    if tokens.is_empty() {
        return Err(ParseError::EmptySentence);
    }
    let ctx = Ctx {
        lexicon,
        tokens,
        trace: RefCell::new(None),
        furthest: Cell::new(0),
        furthest_production: Cell::new("infinitive phrase"),
    };
    let mut best: Option<(ParseNode, usize)> = None;
    for (node, p) in ctx.infinitive_phrase(0) {
        if best.as_ref().map(|(_, bp)| p > *bp).unwrap_or(true) {
            best = Some((node, p));
        }
    }
    best.ok_or(ParseError::NoParse { consumed: 0, production: "infinitive phrase" })
}

/// Structural view of a basic noun phrase: noun groups split at chaining
/// prepositions, units split at coordination.
#[derive(Clone, Debug)]
pub struct BnpView<'a> {
    pub groups: Vec<BnpGroup<'a>>,
}

#[derive(Clone, Debug)]
pub struct BnpGroup<'a> {
    /// The chaining preposition in front of this group, absent for the first.
    pub prep: Option<&'a Leaf>,
    pub units: Vec<BnpUnit<'a>>,
}

#[derive(Clone, Debug)]
pub struct BnpUnit<'a> {
    pub determiners: Vec<&'a Leaf>,
    pub adjectives: Vec<&'a Leaf>,
    pub numerals: Vec<&'a Leaf>,
    pub nouns: Vec<&'a Leaf>,
    pub pronoun: Option<&'a Leaf>,
}

impl<'a> BnpUnit<'a> {
    fn new() -> Self {
        BnpUnit {
            determiners: Vec::new(),
            adjectives: Vec::new(),
            numerals: Vec::new(),
            nouns: Vec::new(),
            pronoun: None,
        }
    }

    /// The head noun: the last noun of the unit.
    pub fn head_noun(&self) -> Option<&'a Leaf> {
        self.nouns.last().copied()
    }
}

/// Decompose a basic noun phrase node into groups and units.
pub fn bnp_view(node: &ParseNode) -> BnpView<'_> {
    debug_assert_eq!(node.label, NonTerminal::BasicNounPhrase);
    let mut groups: Vec<BnpGroup<'_>> = Vec::new();
    let mut group = BnpGroup { prep: None, units: alloc::vec![BnpUnit::new()] };
    for leaf in node.direct_leaves() {
        match leaf.analysis.pos {
            Pos::Preposition => {
                groups.push(core::mem::replace(
                    &mut group,
                    BnpGroup { prep: Some(leaf), units: alloc::vec![BnpUnit::new()] },
                ));
            }
            Pos::Conjunction => group.units.push(BnpUnit::new()),
            Pos::Determiner => group.units.last_mut().unwrap().determiners.push(leaf),
            Pos::Adjective => group.units.last_mut().unwrap().adjectives.push(leaf),
            Pos::Numeral => group.units.last_mut().unwrap().numerals.push(leaf),
            Pos::Noun => group.units.last_mut().unwrap().nouns.push(leaf),
            Pos::Pronoun => group.units.last_mut().unwrap().pronoun = Some(leaf),
            _ => {}
        }
    }
    groups.push(group);
    BnpView { groups }
}

/// Number of chained noun groups in a basic noun phrase.
pub fn noun_group_count(node: &ParseNode) -> usize {
    bnp_view(node).groups.len()
}

pub mod grammar {
    //! The encoded grammar table: declarative shape of every production,
    //! and a checker validating that a parse tree conforms to it.

    use alloc::boxed::Box;
    use alloc::format;
    use alloc::string::String;
    use alloc::vec::Vec;

    use super::{Child, NonTerminal, ParseNode, CLAUSE_INTRODUCERS};
    use crate::lexicon::{Pos, VerbForm};

    #[derive(Clone)]
    pub enum Pat {
        Node(NonTerminal),
        LeafPos(&'static [Pos]),
        LeafWord(&'static [&'static str]),
        /// Verb leaf in participial form.
        LeafParticiple,
        /// Verb leaf in base form.
        LeafBaseVerb,
        Opt(Box<Pat>),
        Star(Box<Pat>),
        Plus(Box<Pat>),
        Alt(Vec<Pat>),
        Seq(Vec<Pat>),
    }

    fn opt(p: Pat) -> Pat {
        Pat::Opt(Box::new(p))
    }

    fn star(p: Pat) -> Pat {
        Pat::Star(Box::new(p))
    }

    fn plus(p: Pat) -> Pat {
        Pat::Plus(Box::new(p))
    }

    fn node(n: NonTerminal) -> Pat {
        Pat::Node(n)
    }

    /// Alternatives for each nonterminal, as child-sequence patterns.
    pub fn alternatives(label: NonTerminal) -> Vec<Vec<Pat>> {
        use NonTerminal::*;
        let unit = || {
            Pat::Alt(alloc::vec![
                Pat::LeafPos(&[Pos::Pronoun]),
                Pat::Seq(alloc::vec![
                    star(Pat::LeafPos(&[Pos::Determiner, Pos::Adjective, Pos::Numeral])),
                    plus(Pat::LeafPos(&[Pos::Noun])),
                ]),
            ])
        };
        let group = || {
            Pat::Seq(alloc::vec![
                unit(),
                star(Pat::Seq(alloc::vec![Pat::LeafPos(&[Pos::Conjunction]), unit()])),
            ])
        };
        match label {
            DeclarativeSentence => alloc::vec![
                alloc::vec![node(ComplexDeclarativeSentence)],
                alloc::vec![node(SimpleDeclarativeSentence)],
            ],
            ComplexDeclarativeSentence => alloc::vec![alloc::vec![
                node(SimpleDeclarativeSentence),
                Pat::LeafPos(&[Pos::Conjunction]),
                node(SimpleDeclarativeSentence),
            ]],
            SimpleDeclarativeSentence => alloc::vec![
                alloc::vec![
                    opt(node(AdverbialModifier)),
                    node(SubjectGroup),
                    node(PredicateGroup),
                ],
                alloc::vec![node(ReverseOrderSentence)],
            ],
            ReverseOrderSentence => alloc::vec![
                alloc::vec![node(ThereIsConstruction)],
                alloc::vec![
                    Pat::LeafWord(&["there", "here"]),
                    Pat::LeafPos(&[Pos::Verb]),
                    node(SubjectGroup),
                    node(AdverbialGroup),
                ],
                alloc::vec![
                    Pat::LeafPos(&[Pos::Adverb]),
                    Pat::LeafPos(&[Pos::Auxiliary]),
                    node(SubjectGroup),
                    node(PredicateGroup),
                ],
            ],
            ThereIsConstruction => alloc::vec![alloc::vec![
                Pat::LeafWord(&["there"]),
                Pat::LeafPos(&[Pos::Verb]),
                node(SubjectGroup),
                node(AdverbialGroup),
            ]],
            SubjectGroup => alloc::vec![
                alloc::vec![node(BasicNounPhrase), opt(node(DeterminativeConstruction))],
                alloc::vec![node(SubjectClause)],
            ],
            BasicNounPhrase => alloc::vec![alloc::vec![
                group(),
                star(Pat::Seq(alloc::vec![Pat::LeafPos(&[Pos::Preposition]), group()])),
            ]],
            DeterminativeConstruction => alloc::vec![alloc::vec![Pat::Alt(alloc::vec![
                node(ParticipialPhrase),
                node(AttributiveClause),
                node(InfinitivePhrase),
            ])]],
            ParticipialPhrase => alloc::vec![alloc::vec![
                Pat::LeafParticiple,
                opt(node(ObjectGroup)),
                opt(node(AdverbialGroup)),
            ]],
            AttributiveClause => alloc::vec![alloc::vec![
                Pat::LeafWord(&["who", "which", "that"]),
                opt(node(SubjectGroup)),
                node(PredicateGroup),
            ]],
            InfinitivePhrase => alloc::vec![alloc::vec![
                Pat::LeafWord(&["to"]),
                Pat::LeafBaseVerb,
                opt(Pat::LeafPos(&[Pos::Preposition, Pos::Adverb])),
                opt(node(ObjectGroup)),
                opt(node(AdverbialGroup)),
            ]],
            PredicateGroup => alloc::vec![alloc::vec![
                node(Predicate),
                opt(node(ObjectGroup)),
                opt(node(AdverbialGroup)),
            ]],
            Predicate => alloc::vec![alloc::vec![
                opt(Pat::LeafPos(&[Pos::Adverb])),
                star(Pat::Alt(alloc::vec![
                    Pat::LeafPos(&[Pos::Auxiliary]),
                    Pat::LeafWord(&["not"]),
                ])),
                Pat::LeafPos(&[Pos::Verb]),
                opt(Pat::LeafWord(&["not"])),
                opt(Pat::LeafPos(&[Pos::Preposition, Pos::Adverb])),
                opt(Pat::Alt(alloc::vec![
                    node(BasicNounPhrase),
                    Pat::LeafPos(&[Pos::Adjective]),
                ])),
            ]],
            ObjectGroup => alloc::vec![
                alloc::vec![
                    node(IndirectObject),
                    node(DirectObject),
                    opt(node(PrepositionalObject)),
                ],
                alloc::vec![node(DirectObject), opt(node(PrepositionalObject))],
                alloc::vec![node(PrepositionalObject)],
            ],
            IndirectObject => alloc::vec![alloc::vec![
                node(BasicNounPhrase),
                opt(node(DeterminativeConstruction)),
            ]],
            DirectObject => alloc::vec![
                alloc::vec![node(BasicNounPhrase), opt(node(DeterminativeConstruction))],
                alloc::vec![node(InfinitivePhrase)],
                alloc::vec![node(ObjectClause)],
            ],
            PrepositionalObject => alloc::vec![alloc::vec![
                Pat::LeafPos(&[Pos::Preposition]),
                node(BasicNounPhrase),
                opt(node(DeterminativeConstruction)),
            ]],
            AdverbialGroup => alloc::vec![alloc::vec![plus(node(AdverbialModifier))]],
            AdverbialModifier => alloc::vec![alloc::vec![Pat::Alt(alloc::vec![
                node(SimpleAdverbialModifier),
                node(AdverbialClause),
                node(ParticipialPhrase),
                node(InfinitivePhrase),
            ])]],
            SimpleAdverbialModifier => alloc::vec![
                alloc::vec![Pat::LeafPos(&[Pos::Adverb])],
                alloc::vec![
                    opt(Pat::LeafPos(&[Pos::Conjunction])),
                    Pat::LeafPos(&[Pos::Preposition]),
                    node(BasicNounPhrase),
                ],
                alloc::vec![node(BasicNounPhrase), Pat::LeafPos(&[Pos::Adverb])],
            ],
            AdverbialClause => alloc::vec![alloc::vec![
                Pat::LeafWord(CLAUSE_INTRODUCERS),
                node(SimpleDeclarativeSentence),
            ]],
            ObjectClause => alloc::vec![alloc::vec![
                Pat::LeafWord(&["that"]),
                node(SimpleDeclarativeSentence),
            ]],
            SubjectClause => alloc::vec![alloc::vec![
                Pat::LeafWord(&["that"]),
                node(SimpleDeclarativeSentence),
            ]],
        }
    }

    fn match_one(pat: &Pat, child: &Child) -> bool {
        match (pat, child) {
            (Pat::Node(n), Child::Node(node)) => node.label == *n,
            (Pat::LeafPos(ps), Child::Leaf(l)) => ps.contains(&l.analysis.pos),
            (Pat::LeafWord(ws), Child::Leaf(l)) => ws.contains(&l.text.to_lowercase().as_str()),
            (Pat::LeafParticiple, Child::Leaf(l)) => {
                l.analysis.pos == Pos::Verb
                    && matches!(l.analysis.features.verb_form, VerbForm::Ing | VerbForm::PastPart)
            }
            (Pat::LeafBaseVerb, Child::Leaf(l)) => {
                l.analysis.pos == Pos::Verb && l.analysis.features.verb_form == VerbForm::Base
            }
            _ => false,
        }
    }

    // Backtracking sequence match of patterns against children.
    fn match_seq(pats: &[Pat], children: &[Child]) -> bool {
        match pats.split_first() {
            None => children.is_empty(),
            Some((first, rest)) => match first {
                Pat::Opt(inner) => {
                    (!children.is_empty()
                        && match_seq(
                            &[(**inner).clone()]
                                .into_iter()
                                .chain(rest.iter().cloned())
                                .collect::<Vec<_>>(),
                            children,
                        ))
                        || match_seq(rest, children)
                }
                Pat::Star(inner) => {
                    // Greedy with backtracking.
                    if !children.is_empty() {
                        let with = [(**inner).clone()]
                            .into_iter()
                            .chain([first.clone()])
                            .chain(rest.iter().cloned())
                            .collect::<Vec<_>>();
                        if match_seq(&with, children) {
                            return true;
                        }
                    }
                    match_seq(rest, children)
                }
                Pat::Plus(inner) => {
                    let expanded = [(**inner).clone(), Pat::Star(inner.clone())]
                        .into_iter()
                        .chain(rest.iter().cloned())
                        .collect::<Vec<_>>();
                    match_seq(&expanded, children)
                }
                Pat::Alt(opts) => opts.iter().any(|o| {
                    let expanded = [o.clone()]
                        .into_iter()
                        .chain(rest.iter().cloned())
                        .collect::<Vec<_>>();
                    match_seq(&expanded, children)
                }),
                Pat::Seq(seq) => {
                    let expanded = seq
                        .iter()
                        .cloned()
                        .chain(rest.iter().cloned())
                        .collect::<Vec<_>>();
                    match_seq(&expanded, children)
                }
                simple => match children.split_first() {
                    Some((c, cs)) if match_one(simple, c) => match_seq(rest, cs),
                    _ => false,
                },
            },
        }
    }

    /// Check that every node's child sequence matches one alternative of
    /// its production.
    pub fn check_tree(node: &ParseNode) -> Result<(), String> {
        let alts = alternatives(node.label);
        if !alts.iter().any(|alt| match_seq(alt, &node.children)) {
            return Err(format!(
                "children of {} node do not match any alternative of its production",
                node.label
            ));
        }
        for child in &node.children {
            if let Child::Node(n) = child {
                check_tree(n)?;
            }
        }
        Ok(())
    }
}
