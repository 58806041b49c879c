//! The knowledge base: frame articles describing word semantics.
//!
//! An article opens with `frame is <description>` and is followed by body
//! lines: full declaratives state the functions of a noun, `X consists of
//! A, B` states structure, infinitive lines give a verb's definitions or
//! motives (a trailing "as"-clause marks the motive's condition), and
//! `alternative <n> ; <text>` lines are the staged alternatives of an
//! operation. Body lines are parsed with the main grammar and mapped into
//! shadow records held in the knowledge base's own code space, disjoint
//! from any story database.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::lexicon::{FactorConstraint, KindFilter, Lexicon, Pos};
use crate::parser::{self, Token};
use crate::semdb::{Code, SemanticDb};
use crate::semmap::{score_constraints, Analyzer, FactorSet};

/// What an article describes.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FrameKind {
    Noun,
    Verb,
    Operation,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EntryRole {
    /// What the noun does ("doctor examines a person").
    Function,
    /// One component from a "consists of" line.
    StructurePart,
    /// Semantic definition of a verb.
    Definition,
    /// Description of a particular sub-action of a verb.
    SubAction,
    /// Motive or cause of an action, possibly conditional.
    Motive,
    /// One stage of an operation alternative.
    Stage,
}

/// One body line of an article (or one listed part for structure lines).
#[derive(Clone, Debug)]
pub struct FrameEntry {
    pub role: EntryRole,
    /// Verbatim source text of the entry.
    pub text: String,
    /// Shadow records this entry mapped to.
    pub parsed: Vec<Code>,
    /// Alternative number, stages only.
    pub alternative_no: u32,
    /// Condition split off a trailing "as"-clause.
    pub condition: Option<String>,
    /// Set when stage parsing degraded to raw text.
    pub warning: Option<String>,
}

/// A knowledge-base article.
#[derive(Clone, Debug)]
pub struct Frame {
    pub head: String,
    pub kind: FrameKind,
    pub entries: Vec<FrameEntry>,
    /// Verb-frame lookup key.
    pub verb_lemma: Option<String>,
    pub verb_particle: Option<String>,
    /// Qualifier factors derived from a noun group in the head
    /// ("shoot a person" restricts the object kind).
    pub qualifier: Vec<FactorConstraint>,
    /// Normalized article source, for lossless serialization.
    source: String,
}

impl Frame {
    /// The article text, whitespace-normalized.
    pub fn serialize(&self) -> String {
        self.source.clone()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum KbError {
    MissingHeader { line: String },
    BodyLine { text: String, message: String },
    NotFound { head: String },
}

impl fmt::Display for KbError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KbError::MissingHeader { line } => {
                write!(f, "article must open with \"frame is <description>\", found {line:?}")
            }
            KbError::BodyLine { text, message } => {
                write!(f, "cannot ingest body line {text:?}: {message}")
            }
            KbError::NotFound { head } => write!(f, "no frame for {head:?}"),
        }
    }
}

impl core::error::Error for KbError {}

/// Frames plus their shadow record store.
#[derive(Debug, Default)]
pub struct KnowledgeBase {
    pub frames: Vec<Frame>,
    shadow: SemanticDb,
}

impl KnowledgeBase {
    pub fn new() -> KnowledgeBase {
        KnowledgeBase::default()
    }

    /// The shadow record store (same schemas as a story database, own
    /// code space).
    pub fn shadow(&self) -> &SemanticDb {
        &self.shadow
    }

    /// Ingest a whole frame file: articles separated by blank lines.
    /// Returns the number of frames added.
    pub fn load_articles(&mut self, text: &str, lexicon: &Lexicon) -> Result<usize, KbError> {
        let mut count = 0;
        for article in split_articles(text) {
            self.ingest_frame(&article, lexicon)?;
            count += 1;
        }
        Ok(count)
    }

    /// Ingest one article. Returns the new frame.
    pub fn ingest_frame(&mut self, article: &str, lexicon: &Lexicon) -> Result<&Frame, KbError> {
        let mut lines = article
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect::<Vec<&str>>();
        if lines.is_empty() {
            return Err(KbError::MissingHeader { line: String::new() });
        }
        let header = lines.remove(0);
        let head = header
            .strip_prefix("frame is ")
            .map(str::trim)
            .filter(|h| !h.is_empty())
            .ok_or_else(|| KbError::MissingHeader { line: header.to_owned() })?;

        let mut analyzer = Analyzer::new(lexicon);
        let mut entries: Vec<FrameEntry> = Vec::new();
        let mut has_stages = false;
        // An "as"-clause anywhere marks the article's infinitive lines as
        // motives rather than plain definitions.
        let motive_article = lines.iter().any(|l| !l.starts_with("alternative ") && split_condition(l).1.is_some());
        let mut infinitives_seen = 0usize;

        for line in &lines {
            if let Some(stage) = parse_stage_line(line) {
                has_stages = true;
                let (no, text) = stage;
                let mut entry = FrameEntry {
                    role: EntryRole::Stage,
                    text: text.to_owned(),
                    parsed: Vec::new(),
                    alternative_no: no,
                    condition: None,
                    warning: None,
                };
                // Stages must not block loading; degrade to raw text.
                match self.map_infinitive(&mut analyzer, text, lexicon) {
                    Ok(codes) => entry.parsed = codes,
                    Err(message) => entry.warning = Some(message),
                }
                entries.push(entry);
                continue;
            }
            if let Some((_, parts)) = parse_consists_line(line) {
                for part in parts {
                    entries.push(FrameEntry {
                        role: EntryRole::StructurePart,
                        text: part,
                        parsed: Vec::new(),
                        alternative_no: 0,
                        condition: None,
                        warning: None,
                    });
                }
                continue;
            }
            let (action_text, condition) = split_condition(line);
            if line.starts_with("to ") {
                let role = if motive_article {
                    EntryRole::Motive
                } else if infinitives_seen == 0 {
                    EntryRole::Definition
                } else {
                    EntryRole::SubAction
                };
                infinitives_seen += 1;
                let parsed = self
                    .map_infinitive(&mut analyzer, action_text, lexicon)
                    .map_err(|message| KbError::BodyLine { text: (*line).to_owned(), message })?;
                entries.push(FrameEntry {
                    role,
                    text: action_text.to_owned(),
                    parsed,
                    alternative_no: 0,
                    condition: condition.map(str::to_owned),
                    warning: None,
                });
                continue;
            }
            // Full declarative: a function of the described noun.
            let parsed = self
                .map_declarative(&mut analyzer, line, lexicon)
                .map_err(|message| KbError::BodyLine { text: (*line).to_owned(), message })?;
            entries.push(FrameEntry {
                role: EntryRole::Function,
                text: (*line).to_owned(),
                parsed,
                alternative_no: 0,
                condition: None,
                warning: None,
            });
        }

        let (verb_lemma, verb_particle, qualifier) = head_key(head, lexicon);
        let kind = if has_stages {
            FrameKind::Operation
        } else if verb_lemma.is_some() {
            FrameKind::Verb
        } else {
            FrameKind::Noun
        };
        let source = core::iter::once(header)
            .chain(lines.iter().copied())
            .collect::<Vec<&str>>()
            .join("\n");
        self.frames.push(Frame {
            head: head.to_owned(),
            kind,
            entries,
            verb_lemma,
            verb_particle,
            qualifier,
            source,
        });
        Ok(self.frames.last().unwrap())
    }

    fn map_declarative(
        &mut self,
        analyzer: &mut Analyzer<'_>,
        line: &str,
        lexicon: &Lexicon,
    ) -> Result<Vec<Code>, String> {
        let sentences = parser::tokenize(line, lexicon);
        let tokens = sentences.first().ok_or_else(|| "empty line".to_owned())?;
        let tree =
            parser::parse_declarative(lexicon, tokens).map_err(|e| e.to_string())?;
        analyzer.analyze_sentence(&tree, &mut self.shadow).map_err(|e| e.to_string())
    }

    fn map_infinitive(
        &mut self,
        analyzer: &mut Analyzer<'_>,
        text: &str,
        lexicon: &Lexicon,
    ) -> Result<Vec<Code>, String> {
        let sentences = parser::tokenize(text, lexicon);
        let tokens = sentences.first().ok_or_else(|| "empty line".to_owned())?;
        let unknown: Vec<String> = tokens
            .iter()
            .filter(|t| t.analyses.is_empty())
            .map(|t| t.text.clone())
            .collect();
        if !unknown.is_empty() {
            return Err(format!("unknown words: {}", unknown.join(", ")));
        }
        let (node, consumed) =
            parser::parse_infinitive_phrase(lexicon, tokens).map_err(|e| e.to_string())?;
        if consumed != tokens.len() {
            return Err(format!("trailing words after position {consumed}"));
        }
        let mut out = Vec::new();
        analyzer
            .analyze_infinitive(&node, Code::NULL, None, &mut self.shadow, "main", &mut out)
            .map_err(|e| e.to_string())?;
        Ok(out)
    }

    /// Find a frame by head. An exact head match wins; otherwise the head
    /// is taken as a verb lemma and qualifier factors select among its
    /// frames by the same rule as verb-sense selection.
    pub fn frame_lookup(
        &self,
        head: &str,
        qualifier: Option<&FactorSet>,
    ) -> Result<&Frame, KbError> {
        let norm = normalize(head);
        if let Some(frame) = self.frames.iter().find(|f| normalize(&f.head) == norm) {
            return Ok(frame);
        }
        let empty = FactorSet::default();
        let factors = qualifier.unwrap_or(&empty);
        let mut best: Option<(&Frame, usize)> = None;
        for frame in &self.frames {
            if frame.verb_lemma.as_deref() != Some(norm.as_str()) {
                continue;
            }
            if let Some(score) = score_constraints(&frame.qualifier, factors) {
                let better = match best {
                    Some((_, s)) => score > s,
                    None => true,
                };
                if better {
                    best = Some((frame, score));
                }
            }
        }
        best.map(|(f, _)| f).ok_or_else(|| KbError::NotFound { head: head.to_owned() })
    }

    /// The staged alternatives of an operation, in file order. Alternatives
    /// may come from separate articles sharing the goal head.
    pub fn operation_alternatives(&self, goal: &str) -> Result<Vec<Vec<&FrameEntry>>, KbError> {
        let norm = normalize(goal);
        let mut numbers: Vec<u32> = Vec::new();
        let mut stages_by_no: alloc::collections::BTreeMap<u32, Vec<&FrameEntry>> =
            alloc::collections::BTreeMap::new();
        for frame in &self.frames {
            if normalize(&frame.head) != norm || frame.kind != FrameKind::Operation {
                continue;
            }
            for entry in &frame.entries {
                if entry.role == EntryRole::Stage {
                    if !numbers.contains(&entry.alternative_no) {
                        numbers.push(entry.alternative_no);
                    }
                    stages_by_no.entry(entry.alternative_no).or_default().push(entry);
                }
            }
        }
        if stages_by_no.is_empty() {
            return Err(KbError::NotFound { head: goal.to_owned() });
        }
        Ok(stages_by_no.into_values().collect())
    }
}

fn normalize(s: &str) -> String {
    s.split_whitespace().collect::<Vec<&str>>().join(" ").to_lowercase()
}

/// Split articles on blank lines; a new `frame is` header also opens a
/// fresh article.
fn split_articles(text: &str) -> Vec<String> {
    let mut articles: Vec<Vec<&str>> = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() {
            if !current.is_empty() {
                articles.push(core::mem::take(&mut current));
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        if line.starts_with("frame is ") && !current.is_empty() {
            articles.push(core::mem::take(&mut current));
        }
        current.push(line);
    }
    if !current.is_empty() {
        articles.push(current);
    }
    articles.into_iter().map(|lines| lines.join("\n")).collect()
}

/// `alternative <n> ; <text>`
fn parse_stage_line(line: &str) -> Option<(u32, &str)> {
    let rest = line.strip_prefix("alternative ")?;
    let (no, text) = rest.split_once(';')?;
    let no: u32 = no.trim().parse().ok()?;
    Some((no, text.trim()))
}

/// `<noun group> consists of <part>, <part>, ...`
fn parse_consists_line(line: &str) -> Option<(String, Vec<String>)> {
    let lowered = line.to_lowercase();
    let idx = lowered.find(" consists of ").or_else(|| lowered.find(" consist of "))?;
    let of_idx = lowered[idx..].find(" of ").unwrap() + idx;
    let subject = line[..idx].trim().to_owned();
    let list = &line[of_idx + 4..];
    let mut parts = Vec::new();
    for chunk in list.split(',') {
        for piece in chunk.split(" and ") {
            let part = piece.trim().trim_end_matches('.').trim();
            if part.is_empty() || part == "..." {
                continue;
            }
            parts.push(part.to_owned());
        }
    }
    if parts.is_empty() {
        None
    } else {
        Some((subject, parts))
    }
}

/// Trailing "as"-clause: `<action> as <condition>`.
fn split_condition(line: &str) -> (&str, Option<&str>) {
    match line.find(" as ") {
        Some(idx) => (line[..idx].trim(), Some(line[idx + 4..].trim())),
        None => (line, None),
    }
}

// Lookup key for a verb-frame head: lemma, particle, qualifier factors.
fn head_key(
    head: &str,
    lexicon: &Lexicon,
) -> (Option<String>, Option<String>, Vec<FactorConstraint>) {
    let sentences = parser::tokenize(head, lexicon);
    let Some(tokens) = sentences.first() else { return (None, None, Vec::new()) };
    let tokens: &[Token] = tokens;
    let Some(first) = tokens.first() else { return (None, None, Vec::new()) };
    let lemma = first.text.to_lowercase();
    if !lexicon.is_verb_lemma(&lemma) {
        return (None, None, Vec::new());
    }
    let mut particle = None;
    let mut rest = 1;
    if let Some(second) = tokens.get(1) {
        let word = second.text.to_lowercase();
        if lexicon.has_particle_sense(&lemma, &word) && tokens.len() == 2 {
            particle = Some(word);
            rest = 2;
        }
    }
    let mut qualifier = Vec::new();
    let remaining = &tokens[rest..];
    if !remaining.is_empty() {
        // Either "prep + noun group" or a direct-object noun group.
        let (prep, np_start) = match remaining[0]
            .analyses
            .iter()
            .find(|e| e.pos == Pos::Preposition)
        {
            Some(p) => (Some(p.lemma.clone()), 1),
            None => (None, 0),
        };
        let head_code = remaining[np_start..]
            .iter()
            .flat_map(|t| t.analyses.iter())
            .filter(|e| e.pos == Pos::Noun)
            .filter_map(|e| e.semcode)
            .last();
        if let Some(code) = head_code {
            match prep {
                Some(p) => qualifier.push(FactorConstraint::Prep(p, KindFilter::Is(code))),
                None => qualifier.push(FactorConstraint::DirectObject(KindFilter::Is(code))),
            }
        }
    }
    (Some(lemma), particle, qualifier)
}
