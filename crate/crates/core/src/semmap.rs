//! Translation of parse trees into semantic-database records.
//!
//! A simple declarative clause is analyzed in five steps: the leading
//! adverbial modifier, the subject, the group of objects, the group of
//! adverbial modifiers, and finally the predicate. Noun phrases become
//! entity records typed by the semantic code of their head noun; the
//! predicate becomes one action/message/intelligence/job/event record
//! wired to everything the earlier steps produced.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::lexicon::{
    FactorConstraint, Lexicon, Pos, SemCode, TargetKind, VerbForm, VerbSense,
};
use crate::parser::{
    bnp_view, classify_predicate, predicate_auxiliaries, predicate_main_verb, BnpUnit,
    Leaf, NonTerminal, ParseNode, PredicateClass,
};
use crate::semdb::{
    ActionKind, ActionRecord, Code, DbError, EventRecord, GenericRecord, Kind, PersonRecord,
    Record, SemanticDb,
};

const HONORIFICS_M: &[&str] = &["mister", "mr.", "sir"];
const HONORIFICS_F: &[&str] = &["missis", "mrs.", "miss", "madam", "lady"];

#[derive(Clone, Debug, PartialEq)]
pub enum MapError {
    /// The main verb has no dictionary senses.
    UnknownVerb { verb: String },
    /// Every sense was ruled out by the observed factors.
    NoSense { verb: String, rejected: Vec<String> },
    /// A noun phrase head without a semantic code (not a noun).
    NoHeadNoun,
    /// The auxiliary chain does not map to a tense.
    Tense { chain: String },
    /// A pronoun with no matching antecedent in the database.
    UnresolvedPronoun { word: String },
    /// The tree is not a declarative sentence parse.
    NotASentence,
    Db(DbError),
}

impl fmt::Display for MapError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapError::UnknownVerb { verb } => write!(f, "no senses for verb {verb:?}"),
            MapError::NoSense { verb, rejected } => {
                write!(f, "no sense of {verb:?} fits the sentence factors: {}", rejected.join("; "))
            }
            MapError::NoHeadNoun => write!(f, "noun phrase has no head noun"),
            MapError::Tense { chain } => write!(f, "auxiliary chain {chain:?} maps to no tense"),
            MapError::UnresolvedPronoun { word } => {
                write!(f, "pronoun {word:?} has no antecedent")
            }
            MapError::NotASentence => write!(f, "not a declarative sentence tree"),
            MapError::Db(e) => write!(f, "database error: {e}"),
        }
    }
}

impl core::error::Error for MapError {}

impl From<DbError> for MapError {
    fn from(e: DbError) -> MapError {
        MapError::Db(e)
    }
}

/// Factors observed in a clause, derived wholly from the parse tree.
#[derive(Clone, Debug, Default)]
pub struct FactorSet {
    pub subject_kind: Option<SemCode>,
    pub dobj_kind: Option<SemCode>,
    pub iobj_kind: Option<SemCode>,
    pub prep_objects: Vec<(String, SemCode)>,
    pub place_present: bool,
    pub time_present: bool,
    pub purpose_present: bool,
    pub tool_present: bool,
}

/// Score a constraint list against observed factors: number of satisfied
/// constraints, or None when any constraint is violated (the factor is
/// present with a rejected kind). Absent factors are neutral.
pub fn score_constraints(valence: &[FactorConstraint], factors: &FactorSet) -> Option<usize> {
    let mut score = 0usize;
    for c in valence {
        match c {
            FactorConstraint::Subject(filter) => match factors.subject_kind {
                Some(k) if filter.admits(k) => score += 1,
                Some(_) => return None,
                None => {}
            },
            FactorConstraint::DirectObject(filter) => match factors.dobj_kind {
                Some(k) if filter.admits(k) => score += 1,
                Some(_) => return None,
                None => {}
            },
            FactorConstraint::Prep(word, filter) => {
                match factors.prep_objects.iter().find(|(w, _)| w == word) {
                    Some((_, k)) if filter.admits(*k) => score += 1,
                    Some(_) => return None,
                    None => {}
                }
            }
        }
    }
    Some(score)
}

/// Pick the sense with the most satisfied valence constraints and none
/// violated; ties break by dictionary order.
pub fn select_verb_sense<'s>(
    senses: &[&'s VerbSense],
    factors: &FactorSet,
) -> Result<&'s VerbSense, MapError> {
    let mut best: Option<(&VerbSense, usize)> = None;
    let mut rejected = Vec::new();
    for sense in senses {
        match score_constraints(&sense.valence, factors) {
            None => rejected.push(format!("sense {} violates a valence constraint", sense.ordinal)),
            Some(score) => {
                let better = match best {
                    Some((_, s)) => score > s,
                    None => true,
                };
                if better {
                    best = Some((sense, score));
                }
            }
        }
    }
    match best {
        Some((sense, _)) => Ok(sense),
        None => Err(MapError::NoSense {
            verb: senses.first().map(|s| s.lemma.clone()).unwrap_or_default(),
            rejected,
        }),
    }
}

/// Map an auxiliary chain plus the main verb form to (tense, tense type).
pub fn map_tense(
    auxes: &[(&str, VerbForm)],
    main_form: VerbForm,
) -> Result<(&'static str, &'static str), MapError> {
    let err = || MapError::Tense {
        chain: format!(
            "{} + {:?}",
            auxes.iter().map(|(l, _)| *l).collect::<Vec<_>>().join(" "),
            main_form
        ),
    };
    let finite_tense = |form: VerbForm| match form {
        VerbForm::Past => Some("past"),
        VerbForm::Base | VerbForm::ThirdSing => Some("pres"),
        _ => Option::None,
    };
    // Aspect/voice from the tail of the chain.
    let tail_type = |tail: &[(&str, VerbForm)]| -> Option<&'static str> {
        match tail {
            [] => match main_form {
                VerbForm::Base | VerbForm::ThirdSing | VerbForm::Past => Some("indef"),
                _ => Option::None,
            },
            [("have", _)] => match main_form {
                VerbForm::PastPart => Some("perf"),
                _ => Option::None,
            },
            [("be", _)] => match main_form {
                VerbForm::Ing => Some("cont"),
                VerbForm::PastPart => Some("indpassiv"),
                _ => Option::None,
            },
            [("have", _), ("be", VerbForm::PastPart)] => match main_form {
                VerbForm::Ing => Some("perfcont"),
                VerbForm::PastPart => Some("perfpasiv"),
                _ => Option::None,
            },
            _ => Option::None,
        }
    };
    match auxes.split_first() {
        None => {
            let tense = finite_tense(main_form).ok_or_else(err)?;
            Ok((tense, "indef"))
        }
        Some(((first, first_form), rest)) => match *first {
            "do" => {
                if !rest.is_empty() || main_form != VerbForm::Base {
                    return Err(err());
                }
                let tense = finite_tense(*first_form).ok_or_else(err)?;
                Ok((tense, "indef"))
            }
            "have" => {
                let tense = finite_tense(*first_form).ok_or_else(err)?;
                let full: Vec<(&str, VerbForm)> =
                    core::iter::once(("have", *first_form)).chain(rest.iter().copied()).collect();
                let ty = tail_type(&full).ok_or_else(err)?;
                Ok((tense, ty))
            }
            "be" => {
                let tense = finite_tense(*first_form).ok_or_else(err)?;
                let full: Vec<(&str, VerbForm)> =
                    core::iter::once(("be", *first_form)).chain(rest.iter().copied()).collect();
                let ty = tail_type(&full).ok_or_else(err)?;
                Ok((tense, ty))
            }
            modal => {
                let tense = match modal {
                    "will" => "fut",
                    "would" => "futpast",
                    _ => "mod",
                };
                let ty = tail_type(rest).ok_or_else(err)?;
                Ok((tense, ty))
            }
        },
    }
}

/// Which record kind an entity of the given semantic code becomes.
fn record_kind_for(code: SemCode) -> Kind {
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

/// Per-clause analysis state.
#[derive(Default)]
struct AnalysisContext {
    subject: Code,
    subject_kind: Option<SemCode>,
    object_of_influence: Code,
    directed_from: Code,
    directed_to: Code,
    start_time: Code,
    start_location: Code,
    final_location: Code,
    tool: Code,
    purpose: Code,
    by_agent: Code,
    adverbs: Vec<String>,
    factors: FactorSet,
}

/// Report of a batch text ingestion.
#[derive(Clone, Debug, Default)]
pub struct IngestReport {
    pub sentences: usize,
    pub records: Vec<Code>,
    /// (sentence number, error message) for skipped sentences.
    pub failures: Vec<(usize, String)>,
}

/// Sentence analyzer for one story. Sequential: entity reuse and pronoun
/// resolution depend on the order sentences are fed in.
pub struct Analyzer<'a> {
    lexicon: &'a Lexicon,
    ordinal: i64,
}

impl<'a> Analyzer<'a> {
    pub fn new(lexicon: &'a Lexicon) -> Analyzer<'a> {
        Analyzer { lexicon, ordinal: 0 }
    }

    /// Analyze one declarative parse; returns the new record codes in
    /// insertion order.
    pub fn analyze_sentence(
        &mut self,
        tree: &ParseNode,
        db: &mut SemanticDb,
    ) -> Result<Vec<Code>, MapError> {
        self.ordinal += 1;
        let mut out = Vec::new();
        let result = self.analyze_declarative(tree, db, &mut out);
        match result {
            Ok(()) => Ok(out),
            Err(e) => Err(e),
        }
    }

    /// Tokenize, parse and analyze a whole text, sentence by sentence.
    /// Failures skip the sentence and are reported, never fatal.
    pub fn ingest_text(&mut self, text: &str, db: &mut SemanticDb) -> IngestReport {
        let mut report = IngestReport::default();
        for (i, tokens) in crate::parser::tokenize(text, self.lexicon).into_iter().enumerate() {
            report.sentences += 1;
            let sentence_no = i + 1;
            match crate::parser::parse_declarative(self.lexicon, &tokens) {
                Ok(tree) => match self.analyze_sentence(&tree, db) {
                    Ok(codes) => report.records.extend(codes),
                    Err(e) => report.failures.push((sentence_no, e.to_string())),
                },
                Err(e) => report.failures.push((sentence_no, e.to_string())),
            }
        }
        report
    }

    fn analyze_declarative(
        &mut self,
        tree: &ParseNode,
        db: &mut SemanticDb,
        out: &mut Vec<Code>,
    ) -> Result<(), MapError> {
        match tree.label {
            NonTerminal::DeclarativeSentence => {
                let inner = tree.nodes().next().ok_or(MapError::NotASentence)?;
                self.analyze_declarative(inner, db, out)
            }
            NonTerminal::ComplexDeclarativeSentence => {
                for part in tree.find_all(NonTerminal::SimpleDeclarativeSentence) {
                    self.analyze_simple(part, db, "main", out)?;
                }
                Ok(())
            }
            NonTerminal::SimpleDeclarativeSentence => {
                self.analyze_simple(tree, db, "main", out)?;
                Ok(())
            }
            _ => Err(MapError::NotASentence),
        }
    }

    /// The five analysis steps over one simple clause. Returns the main
    /// record's code.
    fn analyze_simple(
        &mut self,
        node: &ParseNode,
        db: &mut SemanticDb,
        role: &str,
        out: &mut Vec<Code>,
    ) -> Result<Code, MapError> {
        debug_assert_eq!(node.label, NonTerminal::SimpleDeclarativeSentence);
        if let Some(rev) = node.find(NonTerminal::ReverseOrderSentence) {
            return self.analyze_reverse(rev, db, role, out);
        }
        let mut ctx = AnalysisContext::default();

        // 1. adverbial modifier at the beginning of the sentence
        if let Some(lead) = node.find(NonTerminal::AdverbialModifier) {
            self.map_adverbial(lead, &mut ctx, db, out)?;
        }

        // 2. subject
        let subject_group =
            node.find(NonTerminal::SubjectGroup).ok_or(MapError::NotASentence)?;
        self.map_subject_group(subject_group, &mut ctx, db, out)?;

        let pred_group =
            node.find(NonTerminal::PredicateGroup).ok_or(MapError::NotASentence)?;
        self.analyze_predicate_group(pred_group, None, ctx, db, role, out)
    }

    fn analyze_reverse(
        &mut self,
        node: &ParseNode,
        db: &mut SemanticDb,
        role: &str,
        out: &mut Vec<Code>,
    ) -> Result<Code, MapError> {
        if let Some(there_is) = node.find(NonTerminal::ThereIsConstruction) {
            return self.analyze_existential(there_is, db, role, out);
        }
        let leaves: Vec<&Leaf> = node.direct_leaves().collect();
        let subject_group = node.find(NonTerminal::SubjectGroup).ok_or(MapError::NotASentence)?;
        if let Some(pred_group) = node.find(NonTerminal::PredicateGroup) {
            // Inversion: adverb + fronted auxiliary + subject + predicate rest.
            let mut ctx = AnalysisContext::default();
            if let Some(adv) = leaves.first() {
                ctx.adverbs.push(adv.text.to_lowercase());
            }
            let fronted = leaves.get(1).copied();
            self.map_subject_group(subject_group, &mut ctx, db, out)?;
            return self.analyze_predicate_group(pred_group, fronted, ctx, db, role, out);
        }
        // there/here + verb of existence
        self.analyze_existential(node, db, role, out)
    }

    // there-is and there/here-initial sentences share this shape:
    // [there/here, verb, subject group, adverbial group].
    fn analyze_existential(
        &mut self,
        node: &ParseNode,
        db: &mut SemanticDb,
        role: &str,
        out: &mut Vec<Code>,
    ) -> Result<Code, MapError> {
        let verb = node
            .direct_leaves()
            .find(|l| l.analysis.pos == Pos::Verb)
            .ok_or(MapError::NotASentence)?;
        let mut ctx = AnalysisContext::default();
        let subject_group =
            node.find(NonTerminal::SubjectGroup).ok_or(MapError::NotASentence)?;
        self.map_subject_group(subject_group, &mut ctx, db, out)?;
        if let Some(advs) = node.find(NonTerminal::AdverbialGroup) {
            self.map_adverbials(advs, &mut ctx, db, out)?;
        }
        let (tense, tense_type) = map_tense(&[], verb.analysis.features.verb_form)?;
        let senses = self.lexicon.verb_senses(&verb.analysis.lemma, None);
        if senses.is_empty() {
            return Err(MapError::UnknownVerb { verb: verb.analysis.lemma.clone() });
        }
        let sense = select_verb_sense(&senses, &ctx.factors)?;
        self.insert_main_record(sense, &verb.analysis.lemma, tense, tense_type, "", ctx, db, role, out)
    }

    fn analyze_predicate_group(
        &mut self,
        node: &ParseNode,
        fronted_aux: Option<&Leaf>,
        mut ctx: AnalysisContext,
        db: &mut SemanticDb,
        role: &str,
        out: &mut Vec<Code>,
    ) -> Result<Code, MapError> {
        debug_assert_eq!(node.label, NonTerminal::PredicateGroup);
        let predicate =
            node.find(NonTerminal::Predicate).ok_or(MapError::NotASentence)?;
        let (main, particle) =
            predicate_main_verb(predicate).ok_or(MapError::NotASentence)?;

        // 3. the group of objects
        if let Some(objects) = node.find(NonTerminal::ObjectGroup) {
            self.map_objects(objects, &mut ctx, db, out)?;
        }

        // 4. the group of adverbial modifiers
        if let Some(advs) = node.find(NonTerminal::AdverbialGroup) {
            self.map_adverbials(advs, &mut ctx, db, out)?;
        }

        // 5. the predicate
        let mut chain: Vec<(&str, VerbForm)> = Vec::new();
        if let Some(f) = fronted_aux {
            chain.push((&f.analysis.lemma, f.analysis.features.verb_form));
        }
        for aux in predicate_auxiliaries(predicate) {
            chain.push((&aux.analysis.lemma, aux.analysis.features.verb_form));
        }
        let (tense, tense_type) = map_tense(&chain, main.analysis.features.verb_form)?;
        let negation =
            if predicate.direct_leaves().any(|l| l.text.eq_ignore_ascii_case("not")) {
                "not"
            } else {
                ""
            };
        if let Some(adv) = predicate
            .direct_leaves()
            .find(|l| l.analysis.pos == Pos::Adverb && !l.text.eq_ignore_ascii_case("not"))
        {
            ctx.adverbs.push(adv.text.to_lowercase());
        }

        if classify_predicate(predicate) == PredicateClass::CompoundNominal {
            return self.analyze_nominal(predicate, main, tense, tense_type, negation, ctx, db, role, out);
        }

        // Passive voice swaps the grammatical subject into the object slot
        // and promotes a by-agent when present.
        if matches!(tense_type, "indpassiv" | "perfpasiv") {
            ctx.object_of_influence = ctx.subject;
            ctx.factors.dobj_kind = ctx.factors.subject_kind.take();
            ctx.subject = ctx.by_agent;
            ctx.subject_kind = None;
        }

        let lemma = main.analysis.lemma.clone();
        let particle_word = particle.map(|p| p.text.to_lowercase());
        let senses = self.lexicon.verb_senses(&lemma, particle_word.as_deref());
        if senses.is_empty() {
            return Err(MapError::UnknownVerb {
                verb: match &particle_word {
                    Some(p) => format!("{lemma} {p}"),
                    None => lemma,
                },
            });
        }
        let sense = select_verb_sense(&senses, &ctx.factors)?;
        self.insert_main_record(sense, &lemma, tense, tense_type, negation, ctx, db, role, out)
    }

    // Compound nominal predicate: subject IS complement. The complement
    // mints its own record; a person complement fills the profession of
    // both sides.
    fn analyze_nominal(
        &mut self,
        predicate: &ParseNode,
        main: &Leaf,
        tense: &str,
        tense_type: &str,
        negation: &str,
        mut ctx: AnalysisContext,
        db: &mut SemanticDb,
        role: &str,
        out: &mut Vec<Code>,
    ) -> Result<Code, MapError> {
        let mut result_state = String::new();
        if let Some(complement) = predicate.find(NonTerminal::BasicNounPhrase) {
            let (code, kind, head) = self.map_noun_phrase_inner(complement, None, db, out)?;
            if kind == SemCode::Person && ctx.subject_kind == Some(SemCode::Person) {
                let noun = head.unwrap_or_default();
                db.update_text(code, "profession", &noun)?;
                if !ctx.subject.is_null() {
                    db.update_text(ctx.subject, "profession", &noun)?;
                }
            }
            if crate::semdb::ref_allowed(Kind::Action, "object_of_influence", record_kind_for(kind)) {
                ctx.object_of_influence = code;
            }
            ctx.factors.dobj_kind = Some(kind);
        } else if let Some(adj) = predicate
            .direct_leaves()
            .find(|l| l.analysis.pos == Pos::Adjective)
        {
            result_state = adj.analysis.lemma.clone();
        }
        let senses = self.lexicon.verb_senses(&main.analysis.lemma, None);
        if senses.is_empty() {
            return Err(MapError::UnknownVerb { verb: main.analysis.lemma.clone() });
        }
        let sense = select_verb_sense(&senses, &ctx.factors)?;
        let code = self.insert_main_record(
            sense,
            &main.analysis.lemma,
            tense,
            tense_type,
            negation,
            ctx,
            db,
            role,
            out,
        )?;
        if !result_state.is_empty() {
            db.update_text(code, "result_state", &result_state)?;
        }
        Ok(code)
    }

    #[allow(clippy::too_many_arguments)]
    fn insert_main_record(
        &mut self,
        sense: &VerbSense,
        lemma: &str,
        tense: &str,
        tense_type: &str,
        negation: &str,
        ctx: AnalysisContext,
        db: &mut SemanticDb,
        role: &str,
        out: &mut Vec<Code>,
    ) -> Result<Code, MapError> {
        if sense.target_kind == TargetKind::Event {
            let event = EventRecord {
                sort: "real".to_owned(),
                subject: self.checked_ref(db, Kind::Event, "subject", ctx.subject),
                designation: lemma.to_owned(),
                scale: String::new(),
                time: ctx.start_time,
                starting_state: 0,
                result_state: 0,
                location: if !ctx.start_location.is_null() {
                    ctx.start_location
                } else {
                    ctx.final_location
                },
                way_tool: String::new(),
                object_of_influence: ctx.object_of_influence,
                tense: tense.to_owned(),
            };
            let code = self.ins(db, event, out)?;
            return Ok(code);
        }
        let action_kind = match sense.target_kind {
            TargetKind::Action => ActionKind::Action,
            TargetKind::Message => ActionKind::Message,
            TargetKind::Intelligence => ActionKind::Intelligence,
            TargetKind::Job => ActionKind::Job,
            TargetKind::Event => unreachable!(),
        };
        let record_kind = action_kind.kind();
        let linkage = self.ins(
            db,
            GenericRecord::new(Kind::Cadr).with_int("d", self.ordinal),
            out,
        )?;
        let action = ActionRecord {
            kind: action_kind,
            semantic_type: sense.semantic_type.clone(),
            sort: "real".to_owned(),
            negation: negation.to_owned(),
            tense: tense.to_owned(),
            tense_type: tense_type.to_owned(),
            adverb: ctx.adverbs.join(" "),
            verb: lemma.to_owned(),
            subject: self.checked_ref(db, record_kind, "subject", ctx.subject),
            object_of_influence: self.checked_ref(
                db,
                record_kind,
                "object_of_influence",
                ctx.object_of_influence,
            ),
            directed_from: self.checked_ref(db, record_kind, "directed_from", ctx.directed_from),
            directed_to: self.checked_ref(db, record_kind, "directed_to", ctx.directed_to),
            result_state: String::new(),
            start_time: ctx.start_time,
            start_location: ctx.start_location,
            final_location: ctx.final_location,
            tool: self.checked_ref(db, record_kind, "tool", ctx.tool),
            purpose: ctx.purpose,
            clause_role: role.to_owned(),
            linkage,
            sentence_ordinal: self.ordinal,
        };
        self.ins(db, action, out)
    }

    // Null out references whose target kind the schema disallows.
    fn checked_ref(&self, db: &SemanticDb, kind: Kind, field: &str, code: Code) -> Code {
        if code.is_null() {
            return code;
        }
        match db.kind_of(code) {
            Some(target) if crate::semdb::ref_allowed(kind, field, target) => code,
            _ => Code::NULL,
        }
    }

    fn ins(
        &mut self,
        db: &mut SemanticDb,
        record: impl Into<Record>,
        out: &mut Vec<Code>,
    ) -> Result<Code, MapError> {
        let code = db.insert(record)?;
        out.push(code);
        Ok(code)
    }

    fn map_subject_group(
        &mut self,
        node: &ParseNode,
        ctx: &mut AnalysisContext,
        db: &mut SemanticDb,
        out: &mut Vec<Code>,
    ) -> Result<(), MapError> {
        if let Some(clause) = node.find(NonTerminal::SubjectClause) {
            let inner = clause
                .find(NonTerminal::SimpleDeclarativeSentence)
                .ok_or(MapError::NotASentence)?;
            let code = self.analyze_simple(inner, db, "sub", out)?;
            // A clause cannot fill the typed subject slot; keep it reachable
            // through the purpose link.
            ctx.purpose = code;
            return Ok(());
        }
        let bnp = node
            .find(NonTerminal::BasicNounPhrase)
            .ok_or(MapError::NotASentence)?;
        let det = node.find(NonTerminal::DeterminativeConstruction);
        let (code, kind, _) = self.map_noun_phrase_inner(bnp, det, db, out)?;
        ctx.subject = code;
        ctx.subject_kind = Some(kind);
        ctx.factors.subject_kind = Some(kind);
        Ok(())
    }

    /// Map a basic noun phrase; returns the code of the record for the
    /// head unit. Chained groups and coordinated units mint linked records.
    pub fn map_noun_phrase(
        &mut self,
        bnp: &ParseNode,
        db: &mut SemanticDb,
    ) -> Result<Code, MapError> {
        let mut out = Vec::new();
        let (code, _, _) = self.map_noun_phrase_inner(bnp, None, db, &mut out)?;
        Ok(code)
    }

    fn map_noun_phrase_inner(
        &mut self,
        bnp: &ParseNode,
        det: Option<&ParseNode>,
        db: &mut SemanticDb,
        out: &mut Vec<Code>,
    ) -> Result<(Code, SemCode, Option<String>), MapError> {
        let view = bnp_view(bnp);
        let mut head: Option<(Code, SemCode, Option<String>)> = None;
        for (gi, group) in view.groups.iter().enumerate() {
            for (ui, unit) in group.units.iter().enumerate() {
                let (code, kind, noun) = self.map_unit(unit, db, out)?;
                if gi == 0 && ui == 0 {
                    head = Some((code, kind, noun));
                } else if gi > 0 && kind == SemCode::Place {
                    // A place group chained onto an entity becomes its
                    // location when the head record has a location field.
                    if let Some((head_code, head_kind, _)) = &head {
                        let head_rec_kind = record_kind_for(*head_kind);
                        if crate::semdb::field_exists(head_rec_kind, "location")
                            && crate::semdb::ref_allowed(head_rec_kind, "location", Kind::Place)
                        {
                            db.update_ref(*head_code, "location", code)?;
                        }
                    }
                }
            }
        }
        let (head_code, head_kind, head_noun) = head.ok_or(MapError::NoHeadNoun)?;
        if let Some(det) = det {
            self.map_determinative(det, head_code, head_kind, db, out)?;
        }
        Ok((head_code, head_kind, head_noun))
    }

    // One noun unit becomes one record (or reuses an existing one).
    fn map_unit(
        &mut self,
        unit: &BnpUnit<'_>,
        db: &mut SemanticDb,
        out: &mut Vec<Code>,
    ) -> Result<(Code, SemCode, Option<String>), MapError> {
        if let Some(pron) = unit.pronoun {
            return self.resolve_pronoun(pron, db);
        }
        let head = unit.head_noun().ok_or(MapError::NoHeadNoun)?;
        let kind = head.analysis.semcode.ok_or(MapError::NoHeadNoun)?;
        let lemma = head.analysis.lemma.clone();
        let adjectives = unit
            .adjectives
            .iter()
            .map(|a| a.analysis.lemma.clone())
            .collect::<Vec<_>>()
            .join(" ");

        let proper = unit.determiners.is_empty()
            && head.text.chars().next().map(char::is_uppercase).unwrap_or(false)
            && head.text.to_lowercase() == lemma;

        let code = match kind {
            SemCode::Person => {
                let mut sex = String::new();
                let mut first_name = String::new();
                for attr in &unit.nouns[..unit.nouns.len() - 1] {
                    let al = attr.analysis.lemma.as_str();
                    if HONORIFICS_M.contains(&al) {
                        sex = "m".to_owned();
                    } else if HONORIFICS_F.contains(&al) {
                        sex = "f".to_owned();
                    } else if proper {
                        first_name = attr.text.clone();
                    }
                }
                if proper {
                    let last_name = head.text.clone();
                    // Within a story, a proper name refers to the same
                    // person record.
                    if let Some(existing) = db
                        .records_of_kind(Kind::Person)
                        .filter(|r| r.text("last_name") == last_name)
                        .map(|r| r.code)
                        .last()
                    {
                        if !sex.is_empty() {
                            db.update_text(existing, "sex", &sex)?;
                        }
                        return Ok((existing, kind, Some(lemma)));
                    }
                    self.ins(
                        db,
                        PersonRecord {
                            sex,
                            first_name,
                            last_name,
                            additional_data: adjectives,
                            ..PersonRecord::default()
                        },
                        out,
                    )?
                } else {
                    self.ins(
                        db,
                        PersonRecord {
                            designation: lemma.clone(),
                            sex,
                            additional_data: adjectives,
                            ..PersonRecord::default()
                        },
                        out,
                    )?
                }
            }
            SemCode::Machine => self.ins(
                db,
                GenericRecord::new(Kind::Machine)
                    .with_text("type_noun", &lemma)
                    .with_text("description", &adjectives)
                    .with_text("name", if proper { &head.text } else { "" }),
                out,
            )?,
            SemCode::Thing => self.ins(
                db,
                GenericRecord::new(Kind::Thing)
                    .with_text("type_noun", &lemma)
                    .with_text("description", &adjectives),
                out,
            )?,
            SemCode::Animal => self.ins(
                db,
                GenericRecord::new(Kind::Animal)
                    .with_text("type_noun", &lemma)
                    .with_text("name", if proper { &head.text } else { "" }),
                out,
            )?,
            SemCode::Place => self.ins(
                db,
                GenericRecord::new(Kind::Place)
                    .with_text("designation", if proper { "" } else { &lemma })
                    .with_text("name", if proper { &head.text } else { "" })
                    .with_text("kind", &adjectives),
                out,
            )?,
            SemCode::Tim => self.ins(
                db,
                GenericRecord::new(Kind::Tim)
                    .with_text("unit", &head.text.to_lowercase())
                    .with_text("note", &adjectives),
                out,
            )?,
            SemCode::Organization => self.ins(
                db,
                GenericRecord::new(Kind::Organization)
                    .with_text("designation", if proper { "" } else { &lemma })
                    .with_text("name", if proper { &head.text } else { "" })
                    .with_text("org_type", &adjectives),
                out,
            )?,
            SemCode::Project => self.ins(
                db,
                GenericRecord::new(Kind::Project)
                    .with_text("designation", if proper { "" } else { &lemma })
                    .with_text("name", if proper { &head.text } else { "" }),
                out,
            )?,
            SemCode::Abstr | SemCode::Disease => self.ins(
                db,
                GenericRecord::new(Kind::Abstr)
                    .with_text("designation", &lemma)
                    .with_text("noun", &adjectives)
                    .with_text("flag", if kind == SemCode::Disease { "disease" } else { "" }),
                out,
            )?,
            SemCode::Event => self.ins(
                db,
                EventRecord {
                    designation: lemma.clone(),
                    sort: "real".to_owned(),
                    ..EventRecord::default()
                },
                out,
            )?,
        };

        // Numeral attributes become number records tied to the entity.
        for numeral in &unit.numerals {
            self.ins(
                db,
                GenericRecord::new(Kind::Number)
                    .with_text("value_word", &numeral.analysis.lemma)
                    .with_ref("referent", code),
                out,
            )?;
        }
        // An event named as an attribute mints an event record as well.
        for attr in unit.nouns.iter().take(unit.nouns.len().saturating_sub(1)) {
            if attr.analysis.semcode == Some(SemCode::Event) {
                self.ins(
                    db,
                    EventRecord {
                        designation: attr.analysis.lemma.clone(),
                        sort: "real".to_owned(),
                        time: if kind == SemCode::Tim { code } else { Code::NULL },
                        ..EventRecord::default()
                    },
                    out,
                )?;
            }
        }
        Ok((code, kind, Some(lemma)))
    }

    fn resolve_pronoun(
        &mut self,
        pron: &Leaf,
        db: &SemanticDb,
    ) -> Result<(Code, SemCode, Option<String>), MapError> {
        let word = pron.analysis.lemma.as_str();
        let person_with_sex = |sex: &str| {
            db.records_of_kind(Kind::Person)
                .filter(|r| r.text("sex") == sex)
                .map(|r| r.code)
                .last()
                .or_else(|| db.records_of_kind(Kind::Person).map(|r| r.code).last())
        };
        match word {
            "he" | "him" | "i" | "you" => person_with_sex("m")
                .map(|c| (c, SemCode::Person, None))
                .ok_or_else(|| MapError::UnresolvedPronoun { word: pron.text.clone() }),
            "she" | "her" => person_with_sex("f")
                .map(|c| (c, SemCode::Person, None))
                .ok_or_else(|| MapError::UnresolvedPronoun { word: pron.text.clone() }),
            "it" => {
                let non_person = db
                    .records()
                    .filter(|r| {
                        matches!(
                            r.kind,
                            Kind::Machine
                                | Kind::Thing
                                | Kind::Animal
                                | Kind::Place
                                | Kind::Organization
                                | Kind::Abstr
                        )
                    })
                    .map(|r| (r.code, r.kind))
                    .last();
                match non_person {
                    Some((code, k)) => {
                        let sem = match k {
                            Kind::Machine => SemCode::Machine,
                            Kind::Thing => SemCode::Thing,
                            Kind::Animal => SemCode::Animal,
                            Kind::Place => SemCode::Place,
                            Kind::Organization => SemCode::Organization,
                            _ => SemCode::Abstr,
                        };
                        Ok((code, sem, None))
                    }
                    None => Err(MapError::UnresolvedPronoun { word: pron.text.clone() }),
                }
            }
            _ => Err(MapError::UnresolvedPronoun { word: pron.text.clone() }),
        }
    }

    // Determinative constructions are analyzed recursively as subordinate
    // clauses tied to the head entity.
    fn map_determinative(
        &mut self,
        det: &ParseNode,
        head: Code,
        head_kind: SemCode,
        db: &mut SemanticDb,
        out: &mut Vec<Code>,
    ) -> Result<(), MapError> {
        let inner = det.nodes().next().ok_or(MapError::NotASentence)?;
        match inner.label {
            NonTerminal::AttributiveClause => {
                let pred_group = inner
                    .find(NonTerminal::PredicateGroup)
                    .ok_or(MapError::NotASentence)?;
                let mut ctx = AnalysisContext::default();
                match inner.find(NonTerminal::SubjectGroup) {
                    Some(sg) => {
                        // Object gap: the head is what the clause acts on.
                        self.map_subject_group(sg, &mut ctx, db, out)?;
                        ctx.object_of_influence = head;
                        ctx.factors.dobj_kind = Some(head_kind);
                    }
                    None => {
                        ctx.subject = head;
                        ctx.subject_kind = Some(head_kind);
                        ctx.factors.subject_kind = Some(head_kind);
                    }
                }
                self.analyze_predicate_group(pred_group, None, ctx, db, "sub", out)?;
            }
            NonTerminal::ParticipialPhrase => {
                self.analyze_participial(inner, head, head_kind, db, out)?;
            }
            NonTerminal::InfinitivePhrase => {
                self.analyze_infinitive(inner, head, Some(head_kind), db, "sub", out)?;
            }
            _ => {}
        }
        Ok(())
    }

    fn analyze_participial(
        &mut self,
        node: &ParseNode,
        head: Code,
        head_kind: SemCode,
        db: &mut SemanticDb,
        out: &mut Vec<Code>,
    ) -> Result<Code, MapError> {
        let participle = node
            .direct_leaves()
            .find(|l| l.analysis.pos == Pos::Verb)
            .ok_or(MapError::NotASentence)?;
        let mut ctx = AnalysisContext::default();
        if participle.analysis.features.verb_form == VerbForm::PastPart {
            // Passive participle: the head undergoes the action.
            ctx.object_of_influence = head;
            ctx.factors.dobj_kind = Some(head_kind);
        } else {
            ctx.subject = head;
            ctx.subject_kind = Some(head_kind);
            ctx.factors.subject_kind = Some(head_kind);
        }
        if let Some(objects) = node.find(NonTerminal::ObjectGroup) {
            self.map_objects(objects, &mut ctx, db, out)?;
        }
        if let Some(advs) = node.find(NonTerminal::AdverbialGroup) {
            self.map_adverbials(advs, &mut ctx, db, out)?;
        }
        if participle.analysis.features.verb_form == VerbForm::PastPart {
            ctx.subject = ctx.by_agent;
        }
        let lemma = &participle.analysis.lemma;
        let senses = self.lexicon.verb_senses(lemma, None);
        if senses.is_empty() {
            return Err(MapError::UnknownVerb { verb: lemma.clone() });
        }
        let sense = select_verb_sense(&senses, &ctx.factors)?;
        self.insert_main_record(sense, lemma, "", "", "", ctx, db, "sub", out)
    }

    /// Analyze an infinitive phrase as a subjectless (or inherited-subject)
    /// clause; used for purpose modifiers, infinitive objects and
    /// knowledge-base stage lines.
    pub fn analyze_infinitive(
        &mut self,
        node: &ParseNode,
        subject: Code,
        subject_kind: Option<SemCode>,
        db: &mut SemanticDb,
        role: &str,
        out: &mut Vec<Code>,
    ) -> Result<Code, MapError> {
        debug_assert_eq!(node.label, NonTerminal::InfinitivePhrase);
        let leaves: Vec<&Leaf> = node.direct_leaves().collect();
        let verb = leaves
            .iter()
            .find(|l| l.analysis.pos == Pos::Verb)
            .ok_or(MapError::NotASentence)?;
        let particle = leaves
            .iter()
            .skip_while(|l| l.analysis.pos != Pos::Verb)
            .nth(1)
            .filter(|l| matches!(l.analysis.pos, Pos::Preposition | Pos::Adverb));
        let mut ctx = AnalysisContext::default();
        ctx.subject = subject;
        ctx.subject_kind = subject_kind;
        ctx.factors.subject_kind = subject_kind;
        if let Some(objects) = node.find(NonTerminal::ObjectGroup) {
            self.map_objects(objects, &mut ctx, db, out)?;
        }
        if let Some(advs) = node.find(NonTerminal::AdverbialGroup) {
            self.map_adverbials(advs, &mut ctx, db, out)?;
        }
        let lemma = verb.analysis.lemma.clone();
        let particle_word = particle.map(|p| p.text.to_lowercase());
        let senses = self.lexicon.verb_senses(&lemma, particle_word.as_deref());
        if senses.is_empty() {
            return Err(MapError::UnknownVerb { verb: lemma });
        }
        let sense = select_verb_sense(&senses, &ctx.factors)?;
        self.insert_main_record(sense, &lemma, "", "", "", ctx, db, role, out)
    }

    fn map_objects(
        &mut self,
        node: &ParseNode,
        ctx: &mut AnalysisContext,
        db: &mut SemanticDb,
        out: &mut Vec<Code>,
    ) -> Result<(), MapError> {
        debug_assert_eq!(node.label, NonTerminal::ObjectGroup);
        if let Some(io) = node.find(NonTerminal::IndirectObject) {
            let bnp = io.find(NonTerminal::BasicNounPhrase).ok_or(MapError::NotASentence)?;
            let det = io.find(NonTerminal::DeterminativeConstruction);
            let (code, kind, _) = self.map_noun_phrase_inner(bnp, det, db, out)?;
            ctx.factors.iobj_kind = Some(kind);
            // The indirect object is whom the action is addressed to.
            if matches!(kind, SemCode::Person | SemCode::Organization) {
                ctx.directed_to = code;
            }
        }
        if let Some(dobj) = node.find(NonTerminal::DirectObject) {
            if let Some(bnp) = dobj.find(NonTerminal::BasicNounPhrase) {
                let det = dobj.find(NonTerminal::DeterminativeConstruction);
                let (code, kind, _) = self.map_noun_phrase_inner(bnp, det, db, out)?;
                ctx.object_of_influence = code;
                ctx.factors.dobj_kind = Some(kind);
            } else if let Some(inf) = dobj.find(NonTerminal::InfinitivePhrase) {
                let code =
                    self.analyze_infinitive(inf, ctx.subject, ctx.subject_kind, db, "sub", out)?;
                ctx.purpose = code;
                ctx.factors.purpose_present = true;
            } else if let Some(clause) = dobj.find(NonTerminal::ObjectClause) {
                let inner = clause
                    .find(NonTerminal::SimpleDeclarativeSentence)
                    .ok_or(MapError::NotASentence)?;
                let code = self.analyze_simple(inner, db, "sub", out)?;
                ctx.purpose = code;
            }
        }
        if let Some(po) = node.find(NonTerminal::PrepositionalObject) {
            let prep = po
                .direct_leaves()
                .find(|l| l.analysis.pos == Pos::Preposition)
                .map(|l| l.analysis.lemma.clone())
                .ok_or(MapError::NotASentence)?;
            let bnp = po.find(NonTerminal::BasicNounPhrase).ok_or(MapError::NotASentence)?;
            let det = po.find(NonTerminal::DeterminativeConstruction);
            let (code, kind, _) = self.map_noun_phrase_inner(bnp, det, db, out)?;
            ctx.factors.prep_objects.push((prep.clone(), kind));
            self.wire_prep(&prep, code, kind, ctx);
        }
        Ok(())
    }

    // Wiring of a preposition-linked entity into the action slots.
    fn wire_prep(&self, prep: &str, code: Code, kind: SemCode, ctx: &mut AnalysisContext) {
        match (prep, kind) {
            ("to" | "into" | "onto", SemCode::Place) => ctx.final_location = code,
            ("to", SemCode::Person | SemCode::Organization) => ctx.directed_to = code,
            ("from", SemCode::Place) => ctx.start_location = code,
            ("from", SemCode::Person | SemCode::Organization) => ctx.directed_from = code,
            ("from" | "with" | "by", SemCode::Machine | SemCode::Thing) => {
                ctx.tool = code;
                ctx.factors.tool_present = true;
            }
            ("by", SemCode::Person | SemCode::Organization) => ctx.by_agent = code,
            ("in" | "at" | "on" | "near", SemCode::Place) => {
                ctx.start_location = code;
                ctx.factors.place_present = true;
            }
            ("in" | "at" | "on", SemCode::Tim) => {
                ctx.start_time = code;
                ctx.factors.time_present = true;
            }
            _ => {}
        }
    }

    fn map_adverbials(
        &mut self,
        node: &ParseNode,
        ctx: &mut AnalysisContext,
        db: &mut SemanticDb,
        out: &mut Vec<Code>,
    ) -> Result<(), MapError> {
        debug_assert_eq!(node.label, NonTerminal::AdverbialGroup);
        for modifier in node.find_all(NonTerminal::AdverbialModifier) {
            self.map_adverbial(modifier, ctx, db, out)?;
        }
        Ok(())
    }

    fn map_adverbial(
        &mut self,
        node: &ParseNode,
        ctx: &mut AnalysisContext,
        db: &mut SemanticDb,
        out: &mut Vec<Code>,
    ) -> Result<(), MapError> {
        debug_assert_eq!(node.label, NonTerminal::AdverbialModifier);
        let inner = node.nodes().next().ok_or(MapError::NotASentence)?;
        match inner.label {
            NonTerminal::SimpleAdverbialModifier => {
                let leaves: Vec<&Leaf> = inner.direct_leaves().collect();
                let bnp = inner.find(NonTerminal::BasicNounPhrase);
                match bnp {
                    None => {
                        // Bare adverb.
                        if let Some(adv) = leaves.first() {
                            ctx.adverbs.push(adv.text.to_lowercase());
                        }
                    }
                    Some(bnp) => {
                        let prep = leaves
                            .iter()
                            .find(|l| l.analysis.pos == Pos::Preposition)
                            .map(|l| l.analysis.lemma.clone());
                        let trailing_adverb = leaves
                            .iter()
                            .find(|l| l.analysis.pos == Pos::Adverb)
                            .map(|l| l.analysis.lemma.clone());
                        let (code, kind, _) = self.map_noun_phrase_inner(bnp, None, db, out)?;
                        match prep {
                            Some(p) => {
                                match kind {
                                    SemCode::Place => ctx.factors.place_present = true,
                                    SemCode::Tim => ctx.factors.time_present = true,
                                    _ => {}
                                }
                                self.wire_prep(&p, code, kind, ctx);
                            }
                            None => {
                                // noun phrase + adverb, e.g. a span of time
                                // followed by "ago".
                                if kind == SemCode::Tim {
                                    ctx.start_time = code;
                                    ctx.factors.time_present = true;
                                    if let Some(adv) = trailing_adverb {
                                        let number = db
                                            .records_of_kind(Kind::Number)
                                            .filter(|r| r.ref_code("referent") == code)
                                            .map(|r| r.code)
                                            .last()
                                            .unwrap_or(Code::NULL);
                                        self.ins(
                                            db,
                                            GenericRecord::new(Kind::Cause)
                                                .with_text("word", &adv)
                                                .with_ref("number_ref", number)
                                                .with_ref("tim_ref", code),
                                            out,
                                        )?;
                                    }
                                } else if let Some(adv) = trailing_adverb {
                                    ctx.adverbs.push(adv);
                                }
                            }
                        }
                    }
                }
            }
            NonTerminal::AdverbialClause => {
                let body = inner
                    .find(NonTerminal::SimpleDeclarativeSentence)
                    .ok_or(MapError::NotASentence)?;
                self.analyze_simple(body, db, "sub", out)?;
            }
            NonTerminal::ParticipialPhrase => {
                let code = self.analyze_participial(inner, ctx.subject, ctx.subject_kind.unwrap_or(SemCode::Person), db, out)?;
                // "using <tool>" hands its object to the main action.
                if let Some(r) = db.record(code) {
                    if r.text("verb") == "use" {
                        let obj = r.ref_code("object_of_influence");
                        if !obj.is_null() {
                            ctx.tool = obj;
                            ctx.factors.tool_present = true;
                        }
                    }
                }
            }
            NonTerminal::InfinitivePhrase => {
                let code =
                    self.analyze_infinitive(inner, ctx.subject, ctx.subject_kind, db, "sub", out)?;
                ctx.purpose = code;
                ctx.factors.purpose_present = true;
            }
            _ => {}
        }
        Ok(())
    }
}
