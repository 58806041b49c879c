//! Question answering over the fact database and knowledge base.
//!
//! Questions are parsed with a small interrogative grammar
//! (`wh-word [aux] [NP] [VP]`, do-support undone), compiled into query
//! patterns with the asked role left open, and answered by rendering
//! the fillers. Definition questions ("What does a doctor do?") go to
//! the knowledge base instead.

use alloc::borrow::ToOwned;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::kb::{EntryRole, KnowledgeBase};
use crate::lexicon::{Lexicon, Pos, SemCode, TargetKind, VerbForm};
use crate::parser::{
    self, bnp_view, classify_predicate, predicate_auxiliaries, predicate_main_verb, NonTerminal,
    ParseNode, PredicateClass, Token,
};
use crate::semdb::{Code, Kind, QueryPattern, RecordRef, SemanticDb};
use crate::semmap::{map_tense, FactorSet};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum QType {
    Who,
    WhatSubject,
    WhatObject,
    Where,
    When,
    YesNo,
    WhatDoesXDo,
    Why,
}

/// A noun-phrase focus extracted from the question.
#[derive(Clone, Debug, Default)]
pub struct NpFocus {
    /// Capitalized name without a determiner.
    pub proper_name: Option<String>,
    /// Head noun lemma and its semantic code.
    pub noun: Option<(String, SemCode)>,
    /// A personal pronoun stood here.
    pub pronoun: bool,
}

/// Parsed question: type plus focus constituents.
#[derive(Clone, Debug)]
pub struct Question {
    pub qtype: QType,
    pub verb: String,
    pub particle: Option<String>,
    pub tense: String,
    pub subject: Option<NpFocus>,
    pub object: Option<NpFocus>,
    /// Nominal complement of "be".
    pub complement: Option<NpFocus>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AnswerStatus {
    Found,
    NoFact,
    UnknownWords,
}

#[derive(Clone, Debug)]
pub struct Answer {
    pub status: AnswerStatus,
    pub text: String,
    pub supporting_codes: Vec<Code>,
}

impl Answer {
    fn no_fact() -> Answer {
        Answer { status: AnswerStatus::NoFact, text: "No fact.".to_owned(), supporting_codes: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum QaError {
    /// The input is a statement, not a question.
    NotAQuestion,
    /// A question form outside the supported grammar.
    UnsupportedForm { detail: String },
    Empty,
}

impl fmt::Display for QaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QaError::NotAQuestion => write!(f, "not a question"),
            QaError::UnsupportedForm { detail } => {
                write!(f, "unsupported question form: {detail}")
            }
            QaError::Empty => write!(f, "empty question"),
        }
    }
}

impl core::error::Error for QaError {}

const WH_WORDS: &[&str] = &["who", "what", "where", "when", "why"];

/// Parse a question from its tokens.
pub fn parse_question(lexicon: &Lexicon, tokens: &[Token]) -> Result<Question, QaError> {
    if tokens.is_empty() {
        return Err(QaError::Empty);
    }
    let first = tokens[0].text.to_lowercase();
    let is_aux = |t: &Token| t.analyses.iter().any(|e| e.pos == Pos::Auxiliary);

    if WH_WORDS.contains(&first.as_str()) {
        let rest = &tokens[1..];
        if rest.is_empty() {
            return Err(QaError::UnsupportedForm { detail: "bare interrogative".into() });
        }
        if is_aux(&rest[0]) {
            // wh + aux + NP + verb phrase (do-support undone)
            let (subject, consumed) = parse_focus(lexicon, &rest[1..])
                .ok_or_else(|| unsupported("expected a noun phrase after the auxiliary"))?;
            let aux = &rest[0];
            let after = &rest[1 + consumed..];
            let (verb, particle, tense, object, complement) =
                parse_question_vp(lexicon, aux, after)?;
            let qtype = match first.as_str() {
                "who" => QType::Who,
                "where" => QType::Where,
                "when" => QType::When,
                "why" => QType::Why,
                _ => {
                    if verb == "do" && after.len() <= 1 {
                        QType::WhatDoesXDo
                    } else {
                        QType::WhatObject
                    }
                }
            };
            return Ok(Question {
                qtype,
                verb,
                particle,
                tense,
                subject: Some(subject),
                object,
                complement,
            });
        }
        // wh as subject: wh + verb phrase
        let (pred, consumed) = parser::parse_predicate_group(lexicon, rest)
            .map_err(|e| unsupported(&e.to_string()))?;
        if consumed != rest.len() {
            return Err(unsupported("trailing words after the predicate"));
        }
        let (verb, particle, tense, object, complement) = read_predicate_group(&pred)?;
        let qtype = match first.as_str() {
            "who" => QType::Who,
            "what" => QType::WhatSubject,
            "where" => QType::Where,
            "when" => QType::When,
            "why" => QType::Why,
            _ => unreachable!(),
        };
        return Ok(Question { qtype, verb, particle, tense, subject: None, object, complement });
    }

    if is_aux(&tokens[0]) {
        // yes/no: aux + NP + rest
        let (subject, consumed) = parse_focus(lexicon, &tokens[1..])
            .ok_or_else(|| unsupported("expected a noun phrase after the auxiliary"))?;
        let aux = &tokens[0];
        let after = &tokens[1 + consumed..];
        let (verb, particle, tense, object, complement) = parse_question_vp(lexicon, aux, after)?;
        return Ok(Question {
            qtype: QType::YesNo,
            verb,
            particle,
            tense,
            subject: Some(subject),
            object,
            complement,
        });
    }

    Err(QaError::NotAQuestion)
}

fn unsupported(detail: &str) -> QaError {
    QaError::UnsupportedForm { detail: detail.to_owned() }
}

// The verb phrase after "aux NP": either nothing (the auxiliary itself is
// the verb, as in "Was Brown a mate?"), or a non-finite verb phrase.
fn parse_question_vp(
    lexicon: &Lexicon,
    aux: &Token,
    after: &[Token],
) -> Result<(String, Option<String>, String, Option<NpFocus>, Option<NpFocus>), QaError> {
    let aux_entry = aux
        .analyses
        .iter()
        .find(|e| e.pos == Pos::Auxiliary)
        .ok_or_else(|| unsupported("expected an auxiliary"))?;
    let aux_tense = |form: VerbForm| match form {
        VerbForm::Past => "past",
        _ => "pres",
    };
    if after.is_empty() {
        // "Was Brown there?" degenerates; treat the auxiliary as the verb.
        return Ok((
            aux_entry.lemma.clone(),
            None,
            aux_tense(aux_entry.features.verb_form).to_owned(),
            None,
            None,
        ));
    }
    // Complement of "be": "Was Brown a mate?"
    let starts_with_verb = after[0].analyses.iter().any(|e| e.pos == Pos::Verb);
    if aux_entry.lemma == "be" && !starts_with_verb {
        let (complement, consumed) = parse_focus(lexicon, after)
            .ok_or_else(|| unsupported("expected a complement after \"be\""))?;
        if consumed != after.len() {
            return Err(unsupported("trailing words after the complement"));
        }
        return Ok((
            "be".to_owned(),
            None,
            aux_tense(aux_entry.features.verb_form).to_owned(),
            None,
            Some(complement),
        ));
    }
    // Main verb; undo do-support and read the auxiliary chain tense.
    let main = after[0]
        .analyses
        .iter()
        .find(|e| e.pos == Pos::Verb)
        .ok_or_else(|| unsupported("expected a verb"))?;
    let chain: Vec<(&str, VerbForm)> = match aux_entry.lemma.as_str() {
        "do" => Vec::new(),
        lemma => alloc::vec![(lemma, aux_entry.features.verb_form)],
    };
    let effective_main_form = if aux_entry.lemma == "do" {
        // "did ... go" asks in the auxiliary's tense
        match aux_entry.features.verb_form {
            VerbForm::Past => VerbForm::Past,
            _ => VerbForm::ThirdSing,
        }
    } else {
        main.features.verb_form
    };
    let (tense, _) = map_tense(&chain, effective_main_form)
        .map_err(|e| unsupported(&e.to_string()))?;
    let mut particle = None;
    let mut rest_start = 1;
    if let Some(next) = after.get(1) {
        let word = next.text.to_lowercase();
        if lexicon.has_particle_sense(&main.lemma, &word)
            && after
                .get(2)
                .map(|t| {
                    !t.analyses.iter().any(|e| {
                        matches!(
                            e.pos,
                            Pos::Determiner | Pos::Adjective | Pos::Numeral | Pos::Noun | Pos::Pronoun
                        )
                    })
                })
                .unwrap_or(true)
        {
            particle = Some(word);
            rest_start = 2;
        }
    }
    let object = match parse_focus(lexicon, &after[rest_start..]) {
        Some((focus, _)) => Some(focus),
        None => None,
    };
    Ok((main.lemma.clone(), particle, tense.to_owned(), object, None))
}

// Extract verb/tense/object/complement from a parsed predicate group
// (wh-as-subject questions).
fn read_predicate_group(
    node: &ParseNode,
) -> Result<(String, Option<String>, String, Option<NpFocus>, Option<NpFocus>), QaError> {
    let predicate = node
        .find(NonTerminal::Predicate)
        .ok_or_else(|| unsupported("no predicate"))?;
    let (main, particle) =
        predicate_main_verb(predicate).ok_or_else(|| unsupported("no main verb"))?;
    let chain: Vec<(&str, VerbForm)> = predicate_auxiliaries(predicate)
        .into_iter()
        .map(|l| (l.analysis.lemma.as_str(), l.analysis.features.verb_form))
        .collect();
    let (tense, _) = map_tense(&chain, main.analysis.features.verb_form)
        .map_err(|e| unsupported(&e.to_string()))?;
    let mut complement = None;
    if classify_predicate(predicate) == PredicateClass::CompoundNominal {
        if let Some(bnp) = predicate.find(NonTerminal::BasicNounPhrase) {
            complement = Some(focus_from_bnp(bnp));
        }
    }
    let mut object = None;
    if let Some(objects) = node.find(NonTerminal::ObjectGroup) {
        if let Some(dobj) = objects.find(NonTerminal::DirectObject) {
            if let Some(bnp) = dobj.find(NonTerminal::BasicNounPhrase) {
                object = Some(focus_from_bnp(bnp));
            }
        }
    }
    Ok((
        main.analysis.lemma.clone(),
        particle.map(|p| p.text.to_lowercase()),
        tense.to_owned(),
        object,
        complement,
    ))
}

fn parse_focus(lexicon: &Lexicon, tokens: &[Token]) -> Option<(NpFocus, usize)> {
    if tokens.is_empty() {
        return None;
    }
    let np = parser::parse_noun_phrase(lexicon, tokens).ok()?;
    Some((focus_from_bnp(&np.phrase), np.consumed))
}

fn focus_from_bnp(bnp: &ParseNode) -> NpFocus {
    let view = bnp_view(bnp);
    let mut focus = NpFocus::default();
    if let Some(unit) = view.groups.first().and_then(|g| g.units.first()) {
        if unit.pronoun.is_some() {
            focus.pronoun = true;
            return focus;
        }
        if let Some(head) = unit.head_noun() {
            let proper = unit.determiners.is_empty()
                && head.text.chars().next().map(char::is_uppercase).unwrap_or(false);
            if proper {
                focus.proper_name = Some(head.text.clone());
            }
            if let Some(code) = head.analysis.semcode {
                focus.noun = Some((head.analysis.lemma.clone(), code));
            }
        }
    }
    focus
}

/// Pattern matching an entity focus.
fn entity_pattern(focus: &NpFocus) -> Option<QueryPattern> {
    if focus.pronoun {
        return Some(QueryPattern::new(Kind::Person));
    }
    let (lemma, code) = focus.noun.clone()?;
    if let Some(name) = &focus.proper_name {
        let pattern = match code {
            SemCode::Person => QueryPattern::new(Kind::Person).text("last_name", name),
            SemCode::Place => QueryPattern::new(Kind::Place).text("name", name),
            SemCode::Organization => QueryPattern::new(Kind::Organization).text("name", name),
            _ => QueryPattern::new(kind_for(code)),
        };
        return Some(pattern);
    }
    let pattern = match code {
        SemCode::Person => QueryPattern::new(Kind::Person).text("designation", &lemma),
        SemCode::Machine => QueryPattern::new(Kind::Machine).text("type_noun", &lemma),
        SemCode::Thing => QueryPattern::new(Kind::Thing).text("type_noun", &lemma),
        SemCode::Animal => QueryPattern::new(Kind::Animal).text("type_noun", &lemma),
        SemCode::Place => QueryPattern::new(Kind::Place).text("designation", &lemma),
        SemCode::Tim => QueryPattern::new(Kind::Tim).text("unit", &lemma),
        SemCode::Organization => {
            QueryPattern::new(Kind::Organization).text("designation", &lemma)
        }
        SemCode::Project => QueryPattern::new(Kind::Project).text("designation", &lemma),
        SemCode::Abstr | SemCode::Disease => {
            QueryPattern::new(Kind::Abstr).text("designation", &lemma)
        }
        SemCode::Event => QueryPattern::new(Kind::Event).text("designation", &lemma),
    };
    Some(pattern)
}

fn kind_for(code: SemCode) -> Kind {
    match code {
        SemCode::Person => Kind::Person,
        SemCode::Animal => Kind::Animal,
        SemCode::Organization => Kind::Organization,
        SemCode::Project => Kind::Project,
        SemCode::Thing => Kind::Thing,
        SemCode::Machine => Kind::Machine,
        SemCode::Place => Kind::Place,
        SemCode::Tim => Kind::Tim,
        SemCode::Abstr | SemCode::Disease => Kind::Abstr,
        SemCode::Event => Kind::Event,
    }
}

/// Compile the question into one pattern per action-shaped kind.
pub fn compile_patterns(q: &Question) -> Vec<QueryPattern> {
    let mut out = Vec::new();
    for kind in [Kind::Action, Kind::Message, Kind::Intelligence, Kind::Job] {
        let mut p = QueryPattern::new(kind).text("verb", &q.verb);
        if !q.tense.is_empty() {
            p = p.text("tense", &q.tense);
        }
        if let Some(subject) = &q.subject {
            if let Some(sp) = entity_pattern(subject) {
                p = p.code_of("subject", sp);
            }
        }
        if let Some(object) = &q.object {
            if let Some(op) = entity_pattern(object) {
                p = p.code_of("object_of_influence", op);
            }
        }
        if let Some(complement) = &q.complement {
            if let Some(cp) = entity_pattern(complement) {
                p = p.code_of("object_of_influence", cp);
            }
        }
        out.push(p);
    }
    out
}

fn query_actions(db: &SemanticDb, q: &Question) -> Vec<Code> {
    let mut hits = Vec::new();
    for pattern in compile_patterns(q) {
        if let Ok(codes) = db.query(&pattern) {
            hits.extend(codes);
        }
    }
    hits.sort();
    hits.dedup();
    hits
}

/// Render a record as English text.
pub fn render(db: &SemanticDb, code: Code) -> String {
    let Some(r) = db.record(code) else { return String::new() };
    match r.kind {
        Kind::Person => render_person(&r),
        Kind::Machine | Kind::Thing | Kind::Animal => {
            let noun = r.text("type_noun");
            let name = r.text("name");
            if !name.is_empty() {
                name.to_owned()
            } else {
                with_article(noun)
            }
        }
        Kind::Place => {
            let name = r.text("name");
            if !name.is_empty() {
                name.to_owned()
            } else {
                with_article(r.text("designation"))
            }
        }
        Kind::Organization => {
            let name = r.text("name");
            if !name.is_empty() {
                name.to_owned()
            } else {
                with_article(r.text("designation"))
            }
        }
        Kind::Tim => render_time(db, &r),
        Kind::Abstr => with_article(r.text("designation")),
        Kind::Event => with_article(r.text("designation")),
        Kind::Number => r.text("value_word").to_owned(),
        _ => format_record_fallback(&r),
    }
}

fn render_person(r: &RecordRef<'_>) -> String {
    let honorific = match r.text("sex") {
        "m" => "Mister ",
        "f" => "Missis ",
        _ => "",
    };
    let first = r.text("first_name");
    let last = r.text("last_name");
    if !first.is_empty() || !last.is_empty() {
        let mut name = String::new();
        name.push_str(honorific);
        if !first.is_empty() {
            name.push_str(first);
            if !last.is_empty() {
                name.push(' ');
            }
        }
        name.push_str(last);
        name
    } else {
        with_article(r.text("designation"))
    }
}

// A time span renders with its count and trailing cause word, e.g.
// "fifteen years ago".
fn render_time(db: &SemanticDb, r: &RecordRef<'_>) -> String {
    let mut parts: Vec<String> = Vec::new();
    if let Some(number) = db
        .records_of_kind(Kind::Number)
        .find(|n| n.ref_code("referent") == r.code)
    {
        parts.push(number.text("value_word").to_owned());
    }
    parts.push(r.text("unit").to_owned());
    if let Some(cause) = db
        .records_of_kind(Kind::Cause)
        .find(|c| c.ref_code("tim_ref") == r.code)
    {
        parts.push(cause.text("word").to_owned());
    }
    parts.retain(|p| !p.is_empty());
    parts.join(" ")
}

fn format_record_fallback(r: &RecordRef<'_>) -> String {
    let d = r.text("designation");
    if d.is_empty() {
        r.kind.name().to_owned()
    } else {
        with_article(d)
    }
}

fn with_article(noun: &str) -> String {
    if noun.is_empty() {
        return String::new();
    }
    let article = match noun.chars().next().unwrap() {
        'a' | 'e' | 'i' | 'o' | 'u' => "an",
        _ => "a",
    };
    alloc::format!("{article} {noun}")
}

/// Answer a question over the database and knowledge base.
pub fn answer(
    question_text: &str,
    db: &SemanticDb,
    kb: &KnowledgeBase,
    lexicon: &Lexicon,
) -> Result<Answer, QaError> {
    let sentences = parser::tokenize(question_text, lexicon);
    let tokens = sentences.into_iter().next().ok_or(QaError::Empty)?;
    let unknown: Vec<String> = tokens
        .iter()
        .filter(|t| t.analyses.is_empty())
        .map(|t| t.text.clone())
        .collect();
    if !unknown.is_empty() {
        return Ok(Answer {
            status: AnswerStatus::UnknownWords,
            text: alloc::format!("Unknown words: {}.", unknown.join(", ")),
            supporting_codes: Vec::new(),
        });
    }
    if !question_text.trim_end().ends_with('?') {
        // Also accept inverted questions without the mark, but reject
        // plain statements outright.
        if parse_question(lexicon, &tokens).is_err() {
            return Err(QaError::NotAQuestion);
        }
    }
    let q = parse_question(lexicon, &tokens)?;

    match q.qtype {
        QType::WhatDoesXDo => {
            let noun = q
                .subject
                .as_ref()
                .and_then(|f| f.noun.as_ref())
                .map(|(lemma, _)| lemma.clone())
                .ok_or_else(|| unsupported("no subject noun to look up"))?;
            match kb.frame_lookup(&noun, None) {
                Ok(frame) => {
                    let functions: Vec<&crate::kb::FrameEntry> = frame
                        .entries
                        .iter()
                        .filter(|e| e.role == EntryRole::Function)
                        .collect();
                    if functions.is_empty() {
                        return Ok(Answer::no_fact());
                    }
                    let text = functions
                        .iter()
                        .map(|e| e.text.clone())
                        .collect::<Vec<String>>()
                        .join("\n");
                    let mut supporting: Vec<Code> =
                        functions.iter().flat_map(|e| e.parsed.iter().copied()).collect();
                    supporting.sort();
                    supporting.dedup();
                    Ok(Answer { status: AnswerStatus::Found, text, supporting_codes: supporting })
                }
                Err(_) => Ok(Answer::no_fact()),
            }
        }
        QType::Why => answer_why(&q, db, kb),
        QType::YesNo => {
            let hits = query_actions(db, &q);
            if hits.is_empty() {
                Ok(Answer::no_fact())
            } else {
                Ok(Answer {
                    status: AnswerStatus::Found,
                    text: "Yes.".to_owned(),
                    supporting_codes: hits,
                })
            }
        }
        QType::Who | QType::WhatSubject => {
            let hits = query_actions(db, &q);
            let mut fillers = Vec::new();
            let mut supporting = Vec::new();
            for code in hits {
                let subject = db.record(code).map(|r| r.ref_code("subject")).unwrap_or(Code::NULL);
                if subject.is_null() {
                    continue;
                }
                let text = render(db, subject);
                if !text.is_empty() && !fillers.contains(&text) {
                    fillers.push(text);
                }
                supporting.push(code);
                supporting.push(subject);
            }
            if fillers.is_empty() {
                return Ok(Answer::no_fact());
            }
            Ok(Answer {
                status: AnswerStatus::Found,
                text: fillers.join(", "),
                supporting_codes: supporting,
            })
        }
        QType::WhatObject => {
            let hits = query_actions(db, &q);
            let mut fillers = Vec::new();
            let mut supporting = Vec::new();
            for code in hits {
                let object = db
                    .record(code)
                    .map(|r| r.ref_code("object_of_influence"))
                    .unwrap_or(Code::NULL);
                if object.is_null() {
                    continue;
                }
                let text = render(db, object);
                if !text.is_empty() && !fillers.contains(&text) {
                    fillers.push(text);
                }
                supporting.push(code);
                supporting.push(object);
            }
            if fillers.is_empty() {
                return Ok(Answer::no_fact());
            }
            Ok(Answer {
                status: AnswerStatus::Found,
                text: fillers.join(", "),
                supporting_codes: supporting,
            })
        }
        QType::Where => {
            let hits = query_actions(db, &q);
            let mut fillers = Vec::new();
            let mut supporting = Vec::new();
            for code in hits {
                let Some(r) = db.record(code) else { continue };
                for field in ["final_location", "start_location"] {
                    let place = r.ref_code(field);
                    if !place.is_null() {
                        let text = render(db, place);
                        if !text.is_empty() && !fillers.contains(&text) {
                            fillers.push(text);
                        }
                        supporting.push(code);
                        supporting.push(place);
                        break;
                    }
                }
            }
            if fillers.is_empty() {
                return Ok(Answer::no_fact());
            }
            Ok(Answer {
                status: AnswerStatus::Found,
                text: fillers.join(", "),
                supporting_codes: supporting,
            })
        }
        QType::When => {
            let hits = query_actions(db, &q);
            let mut fillers = Vec::new();
            let mut supporting = Vec::new();
            for code in hits {
                let Some(r) = db.record(code) else { continue };
                let time = r.ref_code("start_time");
                if time.is_null() {
                    continue;
                }
                let text = render(db, time);
                if !text.is_empty() && !fillers.contains(&text) {
                    fillers.push(text);
                }
                supporting.push(code);
                supporting.push(time);
            }
            if fillers.is_empty() {
                return Ok(Answer::no_fact());
            }
            Ok(Answer {
                status: AnswerStatus::Found,
                text: fillers.join(", "),
                supporting_codes: supporting,
            })
        }
    }
}

// Motives come from the verb's frame; a motive whose condition matches a
// stored fact is asserted, otherwise all candidates are prefixed
// "possibly".
fn answer_why(q: &Question, db: &SemanticDb, kb: &KnowledgeBase) -> Result<Answer, QaError> {
    let hits = query_actions(db, q);
    let Some(action_code) = hits.first().copied() else {
        return Ok(Answer::no_fact());
    };
    let action = db.record(action_code).unwrap();
    let mut factors = FactorSet::default();
    if let Some(object) = db.record(action.ref_code("object_of_influence")) {
        factors.dobj_kind = Some(match object.kind {
            Kind::Person => SemCode::Person,
            Kind::Machine => SemCode::Machine,
            Kind::Thing => SemCode::Thing,
            Kind::Organization => SemCode::Organization,
            _ => SemCode::Abstr,
        });
    }
    let Ok(frame) = kb.frame_lookup(&q.verb, Some(&factors)) else {
        return Ok(Answer::no_fact());
    };
    let motives: Vec<&crate::kb::FrameEntry> =
        frame.entries.iter().filter(|e| e.role == EntryRole::Motive).collect();
    if motives.is_empty() {
        return Ok(Answer::no_fact());
    }
    let mut matched: Vec<&crate::kb::FrameEntry> = Vec::new();
    for motive in &motives {
        if let Some(condition) = &motive.condition {
            if condition_holds(condition, &action, db) {
                matched.push(motive);
            }
        }
    }
    let (status, text) = if matched.is_empty() {
        (
            AnswerStatus::Found,
            motives
                .iter()
                .map(|m| alloc::format!("possibly {}", m.text))
                .collect::<Vec<String>>()
                .join("\n"),
        )
    } else {
        (
            AnswerStatus::Found,
            matched.iter().map(|m| m.text.clone()).collect::<Vec<String>>().join("\n"),
        )
    };
    Ok(Answer { status, text, supporting_codes: alloc::vec![action_code] })
}

// Conditions speak about "the subject" (the actor) and "the/this person"
// (the object of influence); nominal conditions check designation or
// profession, verbal conditions check for a stored action.
fn condition_holds(condition: &str, action: &RecordRef<'_>, db: &SemanticDb) -> bool {
    let words: Vec<String> =
        condition.split_whitespace().map(|w| w.to_lowercase()).collect();
    let resolve = |noun: &str| -> Code {
        match noun {
            "subject" => action.ref_code("subject"),
            "person" => action.ref_code("object_of_influence"),
            _ => Code::NULL,
        }
    };
    // Shape: <det> <referent> is|was <noun-or-adjective> ...
    let be_idx = words.iter().position(|w| w == "is" || w == "was");
    if let Some(i) = be_idx {
        if i >= 1 {
            let referent = resolve(&words[i - 1]);
            if referent.is_null() {
                return false;
            }
            // The predicate noun may carry a determiner or chain on.
            let value = words[i + 1..]
                .iter()
                .find(|w| !matches!(w.as_str(), "a" | "an" | "the" | "this"))
                .cloned()
                .unwrap_or_default();
            if value.is_empty() {
                return false;
            }
            if let Some(r) = db.record(referent) {
                return r.text("designation") == value
                    || r.text("profession") == value
                    || r.text("last_name").to_lowercase() == value;
            }
            return false;
        }
    }
    // Shape: <det> <referent> <verb>s <det> <referent>
    if words.len() >= 3 {
        let left = resolve(words.get(1).map(String::as_str).unwrap_or(""));
        let right = resolve(words.last().map(String::as_str).unwrap_or(""));
        if !left.is_null() && !right.is_null() {
            for kind in [Kind::Action, Kind::Message, Kind::Intelligence, Kind::Job] {
                let verbs: Vec<String> = words
                    .iter()
                    .skip(2)
                    .take(1)
                    .map(|w| w.trim_end_matches('s').to_owned())
                    .collect();
                if let Some(verb) = verbs.first() {
                    let pattern = QueryPattern::new(kind)
                        .text("verb", verb)
                        .ref_code("subject", left)
                        .ref_code("object_of_influence", right);
                    if let Ok(codes) = db.query(&pattern) {
                        if !codes.is_empty() {
                            return true;
                        }
                    }
                }
            }
        }
    }
    false
}

// Keep the target-kind helper visible for tests of event questions.
pub fn verb_targets_event(lexicon: &Lexicon, lemma: &str) -> bool {
    lexicon.all_senses(lemma).iter().any(|s| s.target_kind == TargetKind::Event)
}
