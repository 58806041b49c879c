//! Word dictionaries and morphological analysis.
//!
//! Three tab-separated dictionary files feed the lexicon: `nouns.dict`
//! (surface, pos, lemma, features, semantic code), `verbs.dict` (lemma,
//! particle or `-`, semantic type, target kind, valence spec) and
//! `closed.dict` (surface, pos, lemma, features) for the closed classes.
//! Lines starting with `#` are comments.
//!
//! Lookup is closed-world: inflected forms are resolved through suffix
//! rules and a fixed irregular-verb table, and anything else is an unknown
//! word reported to the caller, never guessed.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Part of speech of a dictionary entry.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Pos {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Preposition,
    Conjunction,
    Pronoun,
    Determiner,
    Numeral,
    Auxiliary,
}

impl Pos {
    pub fn name(self) -> &'static str {
        match self {
            Pos::Noun => "noun",
            Pos::Verb => "verb",
            Pos::Adjective => "adjective",
            Pos::Adverb => "adverb",
            Pos::Preposition => "preposition",
            Pos::Conjunction => "conjunction",
            Pos::Pronoun => "pronoun",
            Pos::Determiner => "determiner",
            Pos::Numeral => "numeral",
            Pos::Auxiliary => "auxiliary",
        }
    }

    fn from_name(s: &str) -> Option<Pos> {
        Some(match s {
            "noun" => Pos::Noun,
            "verb" => Pos::Verb,
            "adjective" => Pos::Adjective,
            "adverb" => Pos::Adverb,
            "preposition" => Pos::Preposition,
            "conjunction" => Pos::Conjunction,
            "pronoun" => Pos::Pronoun,
            "determiner" => Pos::Determiner,
            "numeral" => Pos::Numeral,
            "auxiliary" => Pos::Auxiliary,
            _ => return None,
        })
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Semantic code of a noun: decides which database record kind a noun
/// phrase headed by this noun becomes. `Disease` nouns are stored as
/// `abstr` records flagged as diseases.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum SemCode {
    Person,
    Animal,
    Organization,
    Project,
    Thing,
    Machine,
    Place,
    Tim,
    Abstr,
    Disease,
    Event,
}

impl SemCode {
    pub fn name(self) -> &'static str {
        match self {
            SemCode::Person => "person",
            SemCode::Animal => "animal",
            SemCode::Organization => "organization",
            SemCode::Project => "project",
            SemCode::Thing => "thing",
            SemCode::Machine => "machine",
            SemCode::Place => "place",
            SemCode::Tim => "tim",
            SemCode::Abstr => "abstr",
            SemCode::Disease => "disease",
            SemCode::Event => "event",
        }
    }

    pub fn from_name(s: &str) -> Option<SemCode> {
        Some(match s {
            "person" => SemCode::Person,
            "animal" => SemCode::Animal,
            "organization" => SemCode::Organization,
            "project" => SemCode::Project,
            "thing" => SemCode::Thing,
            "machine" => SemCode::Machine,
            "place" => SemCode::Place,
            "tim" => SemCode::Tim,
            "abstr" => SemCode::Abstr,
            "disease" => SemCode::Disease,
            "event" => SemCode::Event,
            _ => return None,
        })
    }
}

impl fmt::Display for SemCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum Number {
    Sing,
    Plur,
    #[default]
    None,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum VerbForm {
    Base,
    Past,
    PastPart,
    Ing,
    ThirdSing,
    #[default]
    None,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum PersonFeature {
    First,
    Second,
    Third,
    #[default]
    None,
}

/// Inflection features carried by a dictionary entry or derived analysis.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct FeatureSet {
    pub number: Number,
    pub verb_form: VerbForm,
    pub person: PersonFeature,
}

impl FeatureSet {
    pub fn sing() -> FeatureSet {
        FeatureSet { number: Number::Sing, ..FeatureSet::default() }
    }

    pub fn plur() -> FeatureSet {
        FeatureSet { number: Number::Plur, ..FeatureSet::default() }
    }

    pub fn verb(form: VerbForm) -> FeatureSet {
        FeatureSet { verb_form: form, ..FeatureSet::default() }
    }
}

/// One analysis of a surface word.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LexEntry {
    pub surface: String,
    pub pos: Pos,
    pub lemma: String,
    pub features: FeatureSet,
    /// Present exactly for nouns.
    pub semcode: Option<SemCode>,
}

/// Restriction on the semantic-code kind of a valence slot.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum KindFilter {
    Any,
    Is(SemCode),
}

impl KindFilter {
    pub fn admits(self, kind: SemCode) -> bool {
        match self {
            KindFilter::Any => true,
            KindFilter::Is(k) => k == kind,
        }
    }
}

/// One valence slot of a verb sense.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum FactorConstraint {
    Subject(KindFilter),
    DirectObject(KindFilter),
    Prep(String, KindFilter),
}

/// Which database predicate a verb sense produces.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TargetKind {
    Action,
    Message,
    Intelligence,
    Job,
    Event,
}

impl TargetKind {
    pub fn name(self) -> &'static str {
        match self {
            TargetKind::Action => "action",
            TargetKind::Message => "message",
            TargetKind::Intelligence => "intelligence",
            TargetKind::Job => "job",
            TargetKind::Event => "event",
        }
    }

    fn from_name(s: &str) -> Option<TargetKind> {
        Some(match s {
            "action" => TargetKind::Action,
            "message" => TargetKind::Message,
            "intelligence" => TargetKind::Intelligence,
            "job" => TargetKind::Job,
            "event" => TargetKind::Event,
            _ => return None,
        })
    }
}

/// One sense of a verb: a lemma (optionally with a particle), its semantic
/// action type, the record kind it maps to, and valence constraints used
/// for sense selection.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VerbSense {
    pub lemma: String,
    pub particle: Option<String>,
    pub semantic_type: String,
    pub target_kind: TargetKind,
    pub valence: Vec<FactorConstraint>,
    /// Position in dictionary order, for stable tie-breaking.
    pub ordinal: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LexiconError {
    /// No entries at all across the dictionary files.
    Empty,
    /// A malformed dictionary line.
    Line { file: &'static str, line: usize, message: String },
}

impl fmt::Display for LexiconError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LexiconError::Empty => write!(f, "no dictionaries found"),
            LexiconError::Line { file, line, message } => {
                write!(f, "{file}:{line}: {message}")
            }
        }
    }
}

impl core::error::Error for LexiconError {}

// Irregular verb forms. Base forms come from the verb dictionary itself;
// this table only lists forms that the suffix rules would get wrong.
// Lemmas present here are excluded from -ed derivation.
const IRREGULAR_VERBS: &[(&str, &str, VerbForm)] = &[
    ("am", "be", VerbForm::Base),
    ("is", "be", VerbForm::ThirdSing),
    ("are", "be", VerbForm::Base),
    ("was", "be", VerbForm::Past),
    ("were", "be", VerbForm::Past),
    ("been", "be", VerbForm::PastPart),
    ("being", "be", VerbForm::Ing),
    ("has", "have", VerbForm::ThirdSing),
    ("had", "have", VerbForm::Past),
    ("had", "have", VerbForm::PastPart),
    ("does", "do", VerbForm::ThirdSing),
    ("did", "do", VerbForm::Past),
    ("done", "do", VerbForm::PastPart),
    ("went", "go", VerbForm::Past),
    ("gone", "go", VerbForm::PastPart),
    ("saw", "see", VerbForm::Past),
    ("seen", "see", VerbForm::PastPart),
    ("came", "come", VerbForm::Past),
    ("come", "come", VerbForm::PastPart),
    ("took", "take", VerbForm::Past),
    ("taken", "take", VerbForm::PastPart),
    ("gave", "give", VerbForm::Past),
    ("given", "give", VerbForm::PastPart),
    ("got", "get", VerbForm::Past),
    ("got", "get", VerbForm::PastPart),
    ("made", "make", VerbForm::Past),
    ("made", "make", VerbForm::PastPart),
    ("knew", "know", VerbForm::Past),
    ("known", "know", VerbForm::PastPart),
    ("thought", "think", VerbForm::Past),
    ("thought", "think", VerbForm::PastPart),
    ("said", "say", VerbForm::Past),
    ("said", "say", VerbForm::PastPart),
    ("told", "tell", VerbForm::Past),
    ("told", "tell", VerbForm::PastPart),
    ("sent", "send", VerbForm::Past),
    ("sent", "send", VerbForm::PastPart),
    ("slept", "sleep", VerbForm::Past),
    ("slept", "sleep", VerbForm::PastPart),
    ("woke", "wake", VerbForm::Past),
    ("woken", "wake", VerbForm::PastPart),
    ("stood", "stand", VerbForm::Past),
    ("stood", "stand", VerbForm::PastPart),
    ("lay", "lie", VerbForm::Past),
    ("lain", "lie", VerbForm::PastPart),
    ("lying", "lie", VerbForm::Ing),
    ("ate", "eat", VerbForm::Past),
    ("eaten", "eat", VerbForm::PastPart),
    ("shot", "shoot", VerbForm::Past),
    ("shot", "shoot", VerbForm::PastPart),
    ("read", "read", VerbForm::Past),
    ("read", "read", VerbForm::PastPart),
    ("ran", "run", VerbForm::Past),
    ("run", "run", VerbForm::PastPart),
    ("met", "meet", VerbForm::Past),
    ("met", "meet", VerbForm::PastPart),
    ("paid", "pay", VerbForm::Past),
    ("paid", "pay", VerbForm::PastPart),
    ("bought", "buy", VerbForm::Past),
    ("bought", "buy", VerbForm::PastPart),
    ("stole", "steal", VerbForm::Past),
    ("stolen", "steal", VerbForm::PastPart),
    ("fell", "fall", VerbForm::Past),
    ("fallen", "fall", VerbForm::PastPart),
    ("flew", "fly", VerbForm::Past),
    ("flown", "fly", VerbForm::PastPart),
    ("wrote", "write", VerbForm::Past),
    ("written", "write", VerbForm::PastPart),
    ("sat", "sit", VerbForm::Past),
    ("sat", "sit", VerbForm::PastPart),
    ("spoke", "speak", VerbForm::Past),
    ("spoken", "speak", VerbForm::PastPart),
    ("brought", "bring", VerbForm::Past),
    ("brought", "bring", VerbForm::PastPart),
    ("heard", "hear", VerbForm::Past),
    ("heard", "hear", VerbForm::PastPart),
    ("held", "hold", VerbForm::Past),
    ("held", "hold", VerbForm::PastPart),
    ("kept", "keep", VerbForm::Past),
    ("kept", "keep", VerbForm::PastPart),
    ("left", "leave", VerbForm::Past),
    ("left", "leave", VerbForm::PastPart),
    ("lost", "lose", VerbForm::Past),
    ("lost", "lose", VerbForm::PastPart),
    ("put", "put", VerbForm::Past),
    ("put", "put", VerbForm::PastPart),
    ("sold", "sell", VerbForm::Past),
    ("sold", "sell", VerbForm::PastPart),
    ("shown", "show", VerbForm::PastPart),
    ("sang", "sing", VerbForm::Past),
    ("sung", "sing", VerbForm::PastPart),
    ("spent", "spend", VerbForm::Past),
    ("spent", "spend", VerbForm::PastPart),
    ("won", "win", VerbForm::Past),
    ("won", "win", VerbForm::PastPart),
    ("wore", "wear", VerbForm::Past),
    ("worn", "wear", VerbForm::PastPart),
    ("drove", "drive", VerbForm::Past),
    ("driven", "drive", VerbForm::PastPart),
    ("drank", "drink", VerbForm::Past),
    ("drunk", "drink", VerbForm::PastPart),
    ("began", "begin", VerbForm::Past),
    ("begun", "begin", VerbForm::PastPart),
    ("broke", "break", VerbForm::Past),
    ("broken", "break", VerbForm::PastPart),
    ("caught", "catch", VerbForm::Past),
    ("caught", "catch", VerbForm::PastPart),
    ("chose", "choose", VerbForm::Past),
    ("chosen", "choose", VerbForm::PastPart),
    ("felt", "feel", VerbForm::Past),
    ("felt", "feel", VerbForm::PastPart),
    ("found", "find", VerbForm::Past),
    ("found", "find", VerbForm::PastPart),
    ("forgot", "forget", VerbForm::Past),
    ("forgotten", "forget", VerbForm::PastPart),
    ("taught", "teach", VerbForm::Past),
    ("taught", "teach", VerbForm::PastPart),
    ("threw", "throw", VerbForm::Past),
    ("thrown", "throw", VerbForm::PastPart),
    ("understood", "understand", VerbForm::Past),
    ("understood", "understand", VerbForm::PastPart),
    ("dying", "die", VerbForm::Ing),
];

/// Modal auxiliaries, recognized without dictionary rows.
const MODALS: &[&str] =
    &["will", "would", "shall", "should", "can", "could", "may", "might", "must"];

/// Lemmas that double as auxiliaries.
const AUX_LEMMAS: &[&str] = &["be", "have", "do"];

/// In-memory dictionary set. Immutable after load.
#[derive(Clone, Debug, Default)]
pub struct Lexicon {
    /// Explicit entries keyed by surface form, in file order.
    entries: BTreeMap<String, Vec<LexEntry>>,
    /// Verb senses in dictionary order.
    senses: Vec<VerbSense>,
    /// All verb lemmas, including particle variants' base lemma.
    verb_lemmas: BTreeSet<String>,
    /// Lemmas with irregular past forms, excluded from -ed derivation.
    irregular_lemmas: BTreeSet<String>,
    /// Noun lemmas (singular rows) for plural derivation.
    noun_lemmas: BTreeMap<String, SemCode>,
    entry_count: usize,
}

impl Lexicon {
    /// Build a lexicon from the contents of the three dictionary files.
    pub fn from_texts(nouns: &str, verbs: &str, closed: &str) -> Result<Lexicon, LexiconError> {
        let mut lex = Lexicon {
            irregular_lemmas: IRREGULAR_VERBS
                .iter()
                .filter(|(_, _, form)| *form == VerbForm::Past)
                .map(|(_, lemma, _)| (*lemma).to_owned())
                .collect(),
            ..Lexicon::default()
        };
        lex.load_nouns(nouns)?;
        lex.load_verbs(verbs)?;
        lex.load_closed(closed)?;
        if lex.entry_count == 0 {
            return Err(LexiconError::Empty);
        }
        Ok(lex)
    }

    /// Total of dictionary rows loaded (lexical entries plus verb senses).
    pub fn entry_count(&self) -> usize {
        self.entry_count
    }

    fn load_nouns(&mut self, text: &str) -> Result<(), LexiconError> {
        for (lineno, line) in dict_lines(text) {
            let cols: Vec<&str> = line.split('\t').collect();
            let err = |message: String| LexiconError::Line { file: "nouns.dict", line: lineno, message };
            if cols.len() != 5 {
                return Err(err(format!("expected 5 tab-separated columns, found {}", cols.len())));
            }
            let pos = Pos::from_name(cols[1])
                .ok_or_else(|| err(format!("unknown part of speech {:?}", cols[1])))?;
            if pos != Pos::Noun {
                return Err(err("nouns.dict rows must have pos noun".to_owned()));
            }
            let features = parse_features(cols[3]).map_err(|m| err(m))?;
            let semcode = SemCode::from_name(cols[4])
                .ok_or_else(|| err(format!("unknown semantic code {:?}", cols[4])))?;
            let surface = cols[0].to_lowercase();
            let lemma = cols[2].to_lowercase();
            if surface.is_empty() || lemma.is_empty() {
                return Err(err("surface and lemma must be non-empty".to_owned()));
            }
            if features.number == Number::Sing && surface == lemma {
                self.noun_lemmas.insert(lemma.clone(), semcode);
            }
            self.push_entry(LexEntry { surface, pos, lemma, features, semcode: Some(semcode) });
        }
        Ok(())
    }

    fn load_verbs(&mut self, text: &str) -> Result<(), LexiconError> {
        for (lineno, line) in dict_lines(text) {
            let cols: Vec<&str> = line.split('\t').collect();
            let err = |message: String| LexiconError::Line { file: "verbs.dict", line: lineno, message };
            if cols.len() != 5 {
                return Err(err(format!("expected 5 tab-separated columns, found {}", cols.len())));
            }
            let lemma = cols[0].to_lowercase();
            if lemma.is_empty() {
                return Err(err("verb lemma must be non-empty".to_owned()));
            }
            let particle = match cols[1] {
                "-" | "" => None,
                p => Some(p.to_lowercase()),
            };
            let semantic_type = cols[2].to_owned();
            if semantic_type.is_empty() {
                return Err(err("semantic type must be non-empty".to_owned()));
            }
            let target_kind = TargetKind::from_name(cols[3])
                .ok_or_else(|| err(format!("unknown target kind {:?}", cols[3])))?;
            let valence = parse_valence(cols[4]).map_err(|m| err(m))?;
            self.verb_lemmas.insert(lemma.clone());
            let ordinal = self.senses.len();
            self.senses.push(VerbSense { lemma, particle, semantic_type, target_kind, valence, ordinal });
            self.entry_count += 1;
        }
        Ok(())
    }

    fn load_closed(&mut self, text: &str) -> Result<(), LexiconError> {
        for (lineno, line) in dict_lines(text) {
            let cols: Vec<&str> = line.split('\t').collect();
            let err = |message: String| LexiconError::Line { file: "closed.dict", line: lineno, message };
            if cols.len() != 4 {
                return Err(err(format!("expected 4 tab-separated columns, found {}", cols.len())));
            }
            let pos = Pos::from_name(cols[1])
                .ok_or_else(|| err(format!("unknown part of speech {:?}", cols[1])))?;
            if pos == Pos::Noun || pos == Pos::Verb {
                return Err(err(format!("{pos} rows belong in their own dictionary")));
            }
            let features = parse_features(cols[3]).map_err(|m| err(m))?;
            let surface = cols[0].to_lowercase();
            let lemma = cols[2].to_lowercase();
            if surface.is_empty() || lemma.is_empty() {
                return Err(err("surface and lemma must be non-empty".to_owned()));
            }
            self.push_entry(LexEntry { surface, pos, lemma, features, semcode: None });
        }
        Ok(())
    }

    fn push_entry(&mut self, entry: LexEntry) {
        self.entries.entry(entry.surface.clone()).or_default().push(entry);
        self.entry_count += 1;
    }

    /// All analyses of a surface word, lowercased. Deterministic: explicit
    /// dictionary rows first (file order), then irregular-table forms, then
    /// suffix-derived forms. Unknown words yield an empty list.
    pub fn lookup(&self, surface: &str) -> Vec<LexEntry> {
        let s = surface.to_lowercase();
        let mut out: Vec<LexEntry> = Vec::new();

        if let Some(found) = self.entries.get(&s) {
            out.extend(found.iter().cloned());
        }

        // Base verb forms come straight from the sense table.
        if self.verb_lemmas.contains(&s) {
            out.push(LexEntry {
                surface: s.clone(),
                pos: Pos::Verb,
                lemma: s.clone(),
                features: FeatureSet::verb(VerbForm::Base),
                semcode: None,
            });
            if AUX_LEMMAS.contains(&s.as_str()) {
                out.push(LexEntry {
                    surface: s.clone(),
                    pos: Pos::Auxiliary,
                    lemma: s.clone(),
                    features: FeatureSet::verb(VerbForm::Base),
                    semcode: None,
                });
            }
        }

        if MODALS.contains(&s.as_str()) {
            out.push(LexEntry {
                surface: s.clone(),
                pos: Pos::Auxiliary,
                lemma: s.clone(),
                features: FeatureSet::verb(VerbForm::Base),
                semcode: None,
            });
        }

        for (form, lemma, verb_form) in IRREGULAR_VERBS {
            if *form == s && self.verb_lemmas.contains(*lemma) {
                let features = FeatureSet::verb(*verb_form);
                if AUX_LEMMAS.contains(lemma) {
                    out.push(LexEntry {
                        surface: s.clone(),
                        pos: Pos::Auxiliary,
                        lemma: (*lemma).to_owned(),
                        features,
                        semcode: None,
                    });
                }
                out.push(LexEntry {
                    surface: s.clone(),
                    pos: Pos::Verb,
                    lemma: (*lemma).to_owned(),
                    features,
                    semcode: None,
                });
            }
        }

        self.derive_by_suffix(&s, &mut out);

        out
    }

    fn derive_by_suffix(&self, s: &str, out: &mut Vec<LexEntry>) {
        let push_noun = |lemma: &str, out: &mut Vec<LexEntry>| {
            if let Some(code) = self.noun_lemmas.get(lemma) {
                out.push(LexEntry {
                    surface: s.to_owned(),
                    pos: Pos::Noun,
                    lemma: lemma.to_owned(),
                    features: FeatureSet::plur(),
                    semcode: Some(*code),
                });
            }
        };
        let regular_verb = |lemma: &str| {
            self.verb_lemmas.contains(lemma) && !self.irregular_lemmas.contains(lemma)
        };
        let push_verb = |lemma: &str, form: VerbForm, out: &mut Vec<LexEntry>| {
            out.push(LexEntry {
                surface: s.to_owned(),
                pos: Pos::Verb,
                lemma: lemma.to_owned(),
                features: FeatureSet::verb(form),
                semcode: None,
            });
        };

        // -s / -es / -ies: noun plural and verb third person singular.
        for cand in s_form_stems(s) {
            push_noun(&cand, out);
            // Third singular exists for irregular verbs too (comes, goes).
            if self.verb_lemmas.contains(cand.as_str()) && cand != "be" {
                push_verb(&cand, VerbForm::ThirdSing, out);
            }
        }

        // -ed / -d / -ied: past and past participle.
        for cand in ed_form_stems(s) {
            if regular_verb(&cand) {
                push_verb(&cand, VerbForm::Past, out);
                push_verb(&cand, VerbForm::PastPart, out);
            }
        }

        // -ing: present participle. Regular for irregular-past verbs too
        // (reading, taking), except the table-listed forms (lying, dying).
        for cand in ing_form_stems(s) {
            let table_listed = IRREGULAR_VERBS
                .iter()
                .any(|(form, lemma, vf)| *vf == VerbForm::Ing && *form == s && *lemma == cand);
            if self.verb_lemmas.contains(cand.as_str()) && !table_listed && cand != "be" && cand != "lie" && cand != "die" {
                push_verb(&cand, VerbForm::Ing, out);
            }
        }
    }

    /// Senses of a verb lemma with exactly the given particle, in
    /// dictionary order.
    pub fn verb_senses(&self, lemma: &str, particle: Option<&str>) -> Vec<&VerbSense> {
        self.senses
            .iter()
            .filter(|sense| sense.lemma == lemma && sense.particle.as_deref() == particle)
            .collect()
    }

    /// All senses of a lemma regardless of particle.
    pub fn all_senses(&self, lemma: &str) -> Vec<&VerbSense> {
        self.senses.iter().filter(|sense| sense.lemma == lemma).collect()
    }

    /// True when some sense of the lemma pairs with this particle.
    pub fn has_particle_sense(&self, lemma: &str, particle: &str) -> bool {
        self.senses
            .iter()
            .any(|sense| sense.lemma == lemma && sense.particle.as_deref() == Some(particle))
    }

    /// True when some sense of the lemma declares the preposition in its
    /// valence. Drives prepositional-object vs adverbial attachment.
    pub fn verb_claims_prep(&self, lemma: &str, prep: &str) -> bool {
        self.senses.iter().any(|sense| {
            sense.lemma == lemma
                && sense
                    .valence
                    .iter()
                    .any(|c| matches!(c, FactorConstraint::Prep(p, _) if p == prep))
        })
    }

    pub fn is_verb_lemma(&self, lemma: &str) -> bool {
        self.verb_lemmas.contains(lemma)
    }
}

fn dict_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

fn parse_features(spec: &str) -> Result<FeatureSet, String> {
    let mut features = FeatureSet::default();
    if spec == "-" || spec == "none" || spec.is_empty() {
        return Ok(features);
    }
    for part in spec.split(',') {
        match part {
            "sing" => features.number = Number::Sing,
            "plur" => features.number = Number::Plur,
            "base" => features.verb_form = VerbForm::Base,
            "past" => features.verb_form = VerbForm::Past,
            "pastpart" => features.verb_form = VerbForm::PastPart,
            "ing" => features.verb_form = VerbForm::Ing,
            "thirdsing" => features.verb_form = VerbForm::ThirdSing,
            "first" => features.person = PersonFeature::First,
            "second" => features.person = PersonFeature::Second,
            "third" => features.person = PersonFeature::Third,
            other => return Err(format!("unknown feature {other:?}")),
        }
    }
    Ok(features)
}

fn parse_valence(spec: &str) -> Result<Vec<FactorConstraint>, String> {
    let mut out = Vec::new();
    if spec == "-" || spec.is_empty() {
        return Ok(out);
    }
    for clause in spec.split(';') {
        let clause = clause.trim();
        if clause.is_empty() {
            continue;
        }
        let (slot, kind_name) = clause
            .split_once('=')
            .ok_or_else(|| format!("valence clause {clause:?} is missing '='"))?;
        let filter = match kind_name {
            "-" => KindFilter::Any,
            name => KindFilter::Is(
                SemCode::from_name(name).ok_or_else(|| format!("unknown kind {name:?}"))?,
            ),
        };
        match slot {
            "subj" => out.push(FactorConstraint::Subject(filter)),
            "dobj" => out.push(FactorConstraint::DirectObject(filter)),
            _ => match slot.split_once(':') {
                Some(("prep", word)) if !word.is_empty() => {
                    out.push(FactorConstraint::Prep(word.to_lowercase(), filter))
                }
                _ => return Err(format!("unknown valence slot {slot:?}")),
            },
        }
    }
    Ok(out)
}

// Candidate stems for an -s form, most specific first.
fn s_form_stems(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(stem) = s.strip_suffix("ies") {
        if !stem.is_empty() {
            out.push(format!("{stem}y"));
        }
    }
    if let Some(stem) = s.strip_suffix("es") {
        if !stem.is_empty() {
            out.push(stem.to_owned());
        }
    }
    if let Some(stem) = s.strip_suffix('s') {
        if !stem.is_empty() && !stem.ends_with('s') {
            out.push(stem.to_owned());
        }
    }
    out.dedup();
    out
}

fn ed_form_stems(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(stem) = s.strip_suffix("ied") {
        if !stem.is_empty() {
            out.push(format!("{stem}y"));
        }
    }
    if let Some(stem) = s.strip_suffix("ed") {
        if !stem.is_empty() {
            out.push(stem.to_owned());
            // Doubled final consonant: robbed -> rob.
            let bytes = stem.as_bytes();
            if bytes.len() >= 2 && bytes[bytes.len() - 1] == bytes[bytes.len() - 2] {
                out.push(stem[..stem.len() - 1].to_owned());
            }
        }
    }
    if let Some(stem) = s.strip_suffix('d') {
        // lived -> live: only the silent-e pattern.
        if stem.ends_with('e') {
            out.push(stem.to_owned());
        }
    }
    out.dedup();
    out
}

fn ing_form_stems(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(stem) = s.strip_suffix("ing") {
        if !stem.is_empty() {
            out.push(stem.to_owned());
            let bytes = stem.as_bytes();
            if bytes.len() >= 2 && bytes[bytes.len() - 1] == bytes[bytes.len() - 2] {
                out.push(stem[..stem.len() - 1].to_owned());
            }
            out.push(format!("{stem}e"));
        }
    }
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_lexicon() -> Lexicon {
        let nouns = "ship\tnoun\tship\tsing\tmachine\n\
                     mate\tnoun\tmate\tsing\tperson\n\
                     year\tnoun\tyear\tsing\ttim\n\
                     study\tnoun\tstudy\tsing\tthing\n";
        let verbs = "be\t-\tIS\taction\tsubj=-;prep:on=-\n\
                     go\t-\tGO\taction\tsubj=-;prep:to=-\n\
                     go\ton\tGO\taction\tsubj=-\n\
                     shoot\t-\tPROPEL\taction\tsubj=person;prep:from=machine\n\
                     shoot\t-\tPROPEL\taction\tsubj=person;dobj=person\n\
                     rob\t-\tTRANSFER\taction\tsubj=person;dobj=organization\n\
                     live\t-\tIS\taction\tsubj=person\n";
        let closed = "a\tdeterminer\ta\tnone\n\
                      on\tpreposition\ton\tnone\n\
                      fifteen\tnumeral\tfifteen\tnone\n";
        Lexicon::from_texts(nouns, verbs, closed).unwrap()
    }

    #[test]
    fn tabbed_noun_row_maps_ship_to_machine() {
        let lex = small_lexicon();
        let hits = lex.lookup("ship");
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].pos, Pos::Noun);
        assert_eq!(hits[0].semcode, Some(SemCode::Machine));
    }

    #[test]
    fn plural_resolves_through_suffix_rule() {
        let lex = small_lexicon();
        let hits = lex.lookup("ships");
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].lemma, "ship");
        assert_eq!(hits[0].features.number, Number::Plur);
        assert_eq!(hits[0].semcode, Some(SemCode::Machine));
    }

    #[test]
    fn was_resolves_through_irregular_table() {
        let lex = small_lexicon();
        let hits = lex.lookup("was");
        assert_eq!(hits.len(), 2);
        assert!(hits.iter().any(|e| e.pos == Pos::Auxiliary));
        assert!(hits.iter().any(|e| e.pos == Pos::Verb));
        assert!(hits.iter().all(|e| e.lemma == "be" && e.features.verb_form == VerbForm::Past));
    }

    #[test]
    fn unknown_word_yields_empty_list() {
        let lex = small_lexicon();
        assert!(lex.lookup("xyzzy").is_empty());
    }

    #[test]
    fn lookup_is_deterministic() {
        let lex = small_lexicon();
        assert_eq!(lex.lookup("shot"), lex.lookup("shot"));
        assert_eq!(lex.lookup("studies"), lex.lookup("studies"));
    }

    #[test]
    fn particle_sense_is_distinct() {
        let lex = small_lexicon();
        let on = lex.verb_senses("go", Some("on"));
        assert_eq!(on.len(), 1);
        assert_eq!(on[0].particle.as_deref(), Some("on"));
        let plain = lex.verb_senses("go", None);
        assert_eq!(plain.len(), 1);
        assert!(plain[0].particle.is_none());
    }

    #[test]
    fn shoot_has_two_senses() {
        let lex = small_lexicon();
        let senses = lex.verb_senses("shoot", None);
        assert_eq!(senses.len(), 2);
        assert!(senses[0].valence.iter().any(|c| matches!(c, FactorConstraint::Prep(p, _) if p == "from")));
        assert!(senses[1].valence.iter().any(|c| matches!(c, FactorConstraint::DirectObject(_))));
    }

    #[test]
    fn be_is_a_single_is_sense() {
        let lex = small_lexicon();
        let senses = lex.verb_senses("be", None);
        assert_eq!(senses.len(), 1);
        assert_eq!(senses[0].semantic_type, "IS");
        assert_eq!(senses[0].target_kind, TargetKind::Action);
    }

    #[test]
    fn ed_and_ing_spelling_rules() {
        let lex = small_lexicon();
        // robbed -> rob (undoubling)
        assert!(lex.lookup("robbed").iter().any(|e| e.lemma == "rob" && e.features.verb_form == VerbForm::Past));
        // lived -> live (silent e)
        assert!(lex.lookup("lived").iter().any(|e| e.lemma == "live" && e.features.verb_form == VerbForm::Past));
        // going -> go
        assert!(lex.lookup("going").iter().any(|e| e.lemma == "go" && e.features.verb_form == VerbForm::Ing));
        // shooted is blocked by the irregular table
        assert!(lex.lookup("shooted").is_empty());
    }

    #[test]
    fn empty_dictionaries_error() {
        assert_eq!(Lexicon::from_texts("", "", "").unwrap_err(), LexiconError::Empty);
    }

    #[test]
    fn malformed_line_reports_file_and_number() {
        let err = Lexicon::from_texts("ship\tnoun\tship\n", "", "").unwrap_err();
        assert_eq!(
            err,
            LexiconError::Line {
                file: "nouns.dict",
                line: 1,
                message: "expected 5 tab-separated columns, found 3".into()
            }
        );
    }
}
