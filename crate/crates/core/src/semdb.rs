//! The semantic database: typed predicate records with unique codes,
//! referential integrity, wildcard-pattern queries, and a line-oriented
//! textual dump format.
//!
//! Records come in eighteen kinds. `person`, `action`-like kinds
//! (`action`, `message`, `intelligence`, `job`) and `event` have dedicated
//! structs; the remaining kinds share [`GenericRecord`] with per-kind field
//! schemas. All kinds draw codes from one allocator, so a code identifies a
//! record regardless of kind. Code 0 is the null reference.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Unique record identifier. 0 never names a record and means "no reference".
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Code(pub u64);

impl Code {
    pub const NULL: Code = Code(0);

    pub fn is_null(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Record kind tag. One per database predicate.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Kind {
    Person,
    Job,
    Organization,
    Project,
    Action,
    Event,
    Message,
    Place,
    Tim,
    Machine,
    Thing,
    Animal,
    Relation,
    Intelligence,
    Cause,
    Abstr,
    Number,
    Cadr,
}

impl Kind {
    pub const ALL: [Kind; 18] = [
        Kind::Person,
        Kind::Job,
        Kind::Organization,
        Kind::Project,
        Kind::Action,
        Kind::Event,
        Kind::Message,
        Kind::Place,
        Kind::Tim,
        Kind::Machine,
        Kind::Thing,
        Kind::Animal,
        Kind::Relation,
        Kind::Intelligence,
        Kind::Cause,
        Kind::Abstr,
        Kind::Number,
        Kind::Cadr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Person => "person",
            Kind::Job => "job",
            Kind::Organization => "organization",
            Kind::Project => "project",
            Kind::Action => "action",
            Kind::Event => "event",
            Kind::Message => "message",
            Kind::Place => "place",
            Kind::Tim => "tim",
            Kind::Machine => "machine",
            Kind::Thing => "thing",
            Kind::Animal => "animal",
            Kind::Relation => "relation",
            Kind::Intelligence => "intelligence",
            Kind::Cause => "cause",
            Kind::Abstr => "abstr",
            Kind::Number => "number",
            Kind::Cadr => "cadr",
        }
    }

    pub fn from_name(name: &str) -> Option<Kind> {
        Kind::ALL.iter().copied().find(|k| k.name() == name)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A single field value. Text covers enumerated string domains too;
/// Ref fields hold codes; Int fields are plain numbers, not references.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Value {
    Text(String),
    Ref(Code),
    Int(i64),
}

impl Value {
    pub fn text(s: &str) -> Value {
        Value::Text(s.to_owned())
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_ref_code(&self) -> Option<Code> {
        match self {
            Value::Ref(c) => Some(*c),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }
}

/// Which kinds a reference field may point at.
#[derive(Clone, Copy, Debug)]
pub enum RefKinds {
    Any,
    OneOf(&'static [Kind]),
}

impl RefKinds {
    fn allows(&self, kind: Kind) -> bool {
        match self {
            RefKinds::Any => true,
            RefKinds::OneOf(ks) => ks.contains(&kind),
        }
    }
}

/// Field type in a record schema.
#[derive(Clone, Copy, Debug)]
pub enum FieldTy {
    /// Free text; empty string means "no value".
    Text,
    /// Text restricted to the listed values (empty string always allowed).
    Enum(&'static [&'static str]),
    /// Code of another record, or 0.
    Ref(RefKinds),
    /// Plain integer, not a reference.
    Int,
}

#[derive(Clone, Copy, Debug)]
pub struct FieldDef {
    pub name: &'static str,
    pub ty: FieldTy,
}

const fn text(name: &'static str) -> FieldDef {
    FieldDef { name, ty: FieldTy::Text }
}

const fn en(name: &'static str, values: &'static [&'static str]) -> FieldDef {
    FieldDef { name, ty: FieldTy::Enum(values) }
}

const fn rf(name: &'static str, kinds: &'static [Kind]) -> FieldDef {
    FieldDef { name, ty: FieldTy::Ref(RefKinds::OneOf(kinds)) }
}

const fn rf_any(name: &'static str) -> FieldDef {
    FieldDef { name, ty: FieldTy::Ref(RefKinds::Any) }
}

const fn int(name: &'static str) -> FieldDef {
    FieldDef { name, ty: FieldTy::Int }
}

pub const TENSES: &[&str] = &["pres", "past", "fut", "futpast", "mod"];
pub const TENSE_TYPES: &[&str] =
    &["indef", "perf", "cont", "perfcont", "indpassiv", "perfpasiv"];
pub const SORTS: &[&str] = &["real", "sup"];

/// Scales with normative bounds on event states.
pub const BOUNDED_SCALES: &[&str] = &["health", "hunger"];
pub const SCALE_MIN: i64 = -100;
pub const SCALE_MAX: i64 = 100;

const PERSON_FIELDS: &[FieldDef] = &[
    text("designation"),
    en("sex", &["m", "f"]),
    text("first_name"),
    text("last_name"),
    text("additional_data"),
    rf("place_of_birth", &[Kind::Place]),
    text("nationality"),
    text("mother_tongue"),
    text("other_tongue"),
    rf("place_of_residence", &[Kind::Place]),
    text("face"),
    text("nose"),
    text("constitution"),
    text("eyes"),
    text("hair"),
    rf("date_of_birth", &[Kind::Tim]),
    text("stature"),
    text("temperament"),
    text("psychological_type"),
    text("profession"),
];

// Shared by action, message, intelligence and job records.
const ACTION_FIELDS: &[FieldDef] = &[
    text("semantic_type"),
    en("sort", SORTS),
    en("negation", &["not"]),
    en("tense", TENSES),
    en("tense_type", TENSE_TYPES),
    text("adverb"),
    text("verb"),
    rf("subject", &[Kind::Person, Kind::Machine, Kind::Organization, Kind::Animal]),
    rf("object_of_influence", &[Kind::Person, Kind::Machine, Kind::Thing, Kind::Organization]),
    rf("directed_from", &[Kind::Person, Kind::Organization]),
    rf("directed_to", &[Kind::Person, Kind::Organization]),
    text("result_state"),
    rf("start_time", &[Kind::Tim]),
    rf("start_location", &[Kind::Place]),
    rf("final_location", &[Kind::Place]),
    rf("tool", &[Kind::Machine, Kind::Thing]),
    rf_any("purpose"),
    en("clause_role", &["main", "sub"]),
    rf("linkage", &[Kind::Cadr]),
    int("sentence_ordinal"),
];

const EVENT_FIELDS: &[FieldDef] = &[
    en("sort", SORTS),
    rf("subject", &[Kind::Person, Kind::Machine, Kind::Thing, Kind::Animal]),
    text("designation"),
    text("scale"),
    rf("time", &[Kind::Tim]),
    int("starting_state"),
    int("result_state"),
    rf("location", &[Kind::Place]),
    text("way_tool"),
    rf_any("object_of_influence"),
    en("tense", TENSES),
];

const ORGANIZATION_FIELDS: &[FieldDef] = &[
    text("designation"),
    text("name"),
    text("org_type"),
    rf("place", &[Kind::Place]),
];

const PROJECT_FIELDS: &[FieldDef] = &[
    text("designation"),
    text("name"),
    rf("organization", &[Kind::Organization]),
];

const PLACE_FIELDS: &[FieldDef] =
    &[text("designation"), text("name"), text("kind")];

const TIM_FIELDS: &[FieldDef] = &[
    text("designation"),
    text("unit"),
    text("year"),
    text("month"),
    text("day"),
    text("hour"),
    text("minute"),
    text("weekday"),
    text("season"),
    text("note"),
];

const MACHINE_FIELDS: &[FieldDef] = &[
    text("designation"),
    text("type_noun"),
    text("name"),
    text("sort"),
    text("description"),
    text("attribute"),
    rf("owner", &[Kind::Person, Kind::Organization]),
    rf("location", &[Kind::Place]),
    rf("time", &[Kind::Tim]),
];

const THING_FIELDS: &[FieldDef] = &[
    text("designation"),
    text("type_noun"),
    text("description"),
    rf("owner", &[Kind::Person, Kind::Organization]),
    rf("location", &[Kind::Place]),
];

const ANIMAL_FIELDS: &[FieldDef] = &[
    text("designation"),
    text("type_noun"),
    text("name"),
    rf("owner", &[Kind::Person]),
    rf("location", &[Kind::Place]),
];

const RELATION_FIELDS: &[FieldDef] =
    &[text("rel_type"), rf_any("left"), rf_any("right")];

const CAUSE_FIELDS: &[FieldDef] = &[
    text("word"),
    text("reserved1"),
    text("reserved2"),
    rf("number_ref", &[Kind::Number]),
    text("reserved3"),
    rf("tim_ref", &[Kind::Tim]),
];

const ABSTR_FIELDS: &[FieldDef] =
    &[text("designation"), text("noun"), text("flag")];

const NUMBER_FIELDS: &[FieldDef] = &[
    text("value_word"),
    text("reserved1"),
    text("reserved2"),
    rf_any("referent"),
];

// Linkage record: four opaque integers, deliberately not references.
const CADR_FIELDS: &[FieldDef] = &[int("a"), int("b"), int("c"), int("d")];

/// Field schema for a kind, excluding the leading code.
pub fn schema(kind: Kind) -> &'static [FieldDef] {
    match kind {
        Kind::Person => PERSON_FIELDS,
        Kind::Action | Kind::Message | Kind::Intelligence | Kind::Job => ACTION_FIELDS,
        Kind::Event => EVENT_FIELDS,
        Kind::Organization => ORGANIZATION_FIELDS,
        Kind::Project => PROJECT_FIELDS,
        Kind::Place => PLACE_FIELDS,
        Kind::Tim => TIM_FIELDS,
        Kind::Machine => MACHINE_FIELDS,
        Kind::Thing => THING_FIELDS,
        Kind::Animal => ANIMAL_FIELDS,
        Kind::Relation => RELATION_FIELDS,
        Kind::Cause => CAUSE_FIELDS,
        Kind::Abstr => ABSTR_FIELDS,
        Kind::Number => NUMBER_FIELDS,
        Kind::Cadr => CADR_FIELDS,
    }
}

pub fn field_index(kind: Kind, name: &str) -> Option<usize> {
    schema(kind).iter().position(|f| f.name == name)
}

pub fn field_exists(kind: Kind, name: &str) -> bool {
    field_index(kind, name).is_some()
}

/// Whether a reference field of `kind` may point at a record of `target`.
pub fn ref_allowed(kind: Kind, field: &str, target: Kind) -> bool {
    match field_index(kind, field).map(|i| schema(kind)[i].ty) {
        Some(FieldTy::Ref(ks)) => ks.allows(target),
        _ => false,
    }
}

/// The 21-field person predicate, less the code.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PersonRecord {
    pub designation: String,
    pub sex: String,
    pub first_name: String,
    pub last_name: String,
    pub additional_data: String,
    pub place_of_birth: Code,
    pub nationality: String,
    pub mother_tongue: String,
    pub other_tongue: String,
    pub place_of_residence: Code,
    pub face: String,
    pub nose: String,
    pub constitution: String,
    pub eyes: String,
    pub hair: String,
    pub date_of_birth: Code,
    pub stature: String,
    pub temperament: String,
    pub psychological_type: String,
    pub profession: String,
}

/// Which action-shaped predicate a record belongs to.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ActionKind {
    Action,
    Message,
    Intelligence,
    Job,
}

impl ActionKind {
    pub fn kind(self) -> Kind {
        match self {
            ActionKind::Action => Kind::Action,
            ActionKind::Message => Kind::Message,
            ActionKind::Intelligence => Kind::Intelligence,
            ActionKind::Job => Kind::Job,
        }
    }
}

/// Action-shaped record. `message`, `intelligence` and `job` share this
/// layout; for those, `directed_to` doubles as the addressee and `purpose`
/// as the content link when a clause is attached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionRecord {
    pub kind: ActionKind,
    pub semantic_type: String,
    pub sort: String,
    pub negation: String,
    pub tense: String,
    pub tense_type: String,
    pub adverb: String,
    pub verb: String,
    pub subject: Code,
    pub object_of_influence: Code,
    pub directed_from: Code,
    pub directed_to: Code,
    pub result_state: String,
    pub start_time: Code,
    pub start_location: Code,
    pub final_location: Code,
    pub tool: Code,
    pub purpose: Code,
    pub clause_role: String,
    pub linkage: Code,
    pub sentence_ordinal: i64,
}

impl Default for ActionRecord {
    fn default() -> Self {
        ActionRecord {
            kind: ActionKind::Action,
            semantic_type: String::new(),
            sort: String::new(),
            negation: String::new(),
            tense: String::new(),
            tense_type: String::new(),
            adverb: String::new(),
            verb: String::new(),
            subject: Code::NULL,
            object_of_influence: Code::NULL,
            directed_from: Code::NULL,
            directed_to: Code::NULL,
            result_state: String::new(),
            start_time: Code::NULL,
            start_location: Code::NULL,
            final_location: Code::NULL,
            tool: Code::NULL,
            purpose: Code::NULL,
            clause_role: String::new(),
            linkage: Code::NULL,
            sentence_ordinal: 0,
        }
    }
}

/// Change-of-state record. States follow the named scale; for normative
/// scales (health, hunger) they are confined to [-100, 100].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EventRecord {
    pub sort: String,
    pub subject: Code,
    pub designation: String,
    pub scale: String,
    pub time: Code,
    pub starting_state: i64,
    pub result_state: i64,
    pub location: Code,
    pub way_tool: String,
    pub object_of_influence: Code,
    pub tense: String,
}

/// Schema-checked record for the kinds without a dedicated struct.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenericRecord {
    kind: Kind,
    values: Vec<Value>,
}

impl GenericRecord {
    /// Fresh record of `kind` with empty/zero fields.
    ///
    /// Panics if `kind` has a dedicated struct (person, action-shaped, event).
    pub fn new(kind: Kind) -> GenericRecord {
        assert!(
            !matches!(
                kind,
                Kind::Person
                    | Kind::Action
                    | Kind::Message
                    | Kind::Intelligence
                    | Kind::Job
                    | Kind::Event
            ),
            "kind {kind} has a dedicated record struct"
        );
        let values = schema(kind)
            .iter()
            .map(|f| match f.ty {
                FieldTy::Text | FieldTy::Enum(_) => Value::Text(String::new()),
                FieldTy::Ref(_) => Value::Ref(Code::NULL),
                FieldTy::Int => Value::Int(0),
            })
            .collect();
        GenericRecord { kind, values }
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    fn idx(&self, name: &str) -> usize {
        field_index(self.kind, name)
            .unwrap_or_else(|| panic!("kind {} has no field {name}", self.kind))
    }

    pub fn with_text(mut self, name: &str, v: &str) -> GenericRecord {
        let i = self.idx(name);
        self.values[i] = Value::text(v);
        self
    }

    pub fn with_ref(mut self, name: &str, c: Code) -> GenericRecord {
        let i = self.idx(name);
        self.values[i] = Value::Ref(c);
        self
    }

    pub fn with_int(mut self, name: &str, v: i64) -> GenericRecord {
        let i = self.idx(name);
        self.values[i] = Value::Int(v);
        self
    }

    pub fn get(&self, name: &str) -> &Value {
        &self.values[self.idx(name)]
    }
}

/// Any record, ready for insertion.
#[derive(Clone, Debug, PartialEq)]
pub enum Record {
    Person(PersonRecord),
    Action(ActionRecord),
    Event(EventRecord),
    Generic(GenericRecord),
}

impl From<PersonRecord> for Record {
    fn from(r: PersonRecord) -> Record {
        Record::Person(r)
    }
}

impl From<ActionRecord> for Record {
    fn from(r: ActionRecord) -> Record {
        Record::Action(r)
    }
}

impl From<EventRecord> for Record {
    fn from(r: EventRecord) -> Record {
        Record::Event(r)
    }
}

impl From<GenericRecord> for Record {
    fn from(r: GenericRecord) -> Record {
        Record::Generic(r)
    }
}

impl Record {
    pub fn kind(&self) -> Kind {
        match self {
            Record::Person(_) => Kind::Person,
            Record::Action(a) => a.kind.kind(),
            Record::Event(_) => Kind::Event,
            Record::Generic(g) => g.kind,
        }
    }

    fn into_values(self) -> Vec<Value> {
        fn t(s: String) -> Value {
            Value::Text(s)
        }
        fn r(c: Code) -> Value {
            Value::Ref(c)
        }
        match self {
            Record::Person(p) => alloc::vec![
                t(p.designation),
                t(p.sex),
                t(p.first_name),
                t(p.last_name),
                t(p.additional_data),
                r(p.place_of_birth),
                t(p.nationality),
                t(p.mother_tongue),
                t(p.other_tongue),
                r(p.place_of_residence),
                t(p.face),
                t(p.nose),
                t(p.constitution),
                t(p.eyes),
                t(p.hair),
                r(p.date_of_birth),
                t(p.stature),
                t(p.temperament),
                t(p.psychological_type),
                t(p.profession),
            ],
            Record::Action(a) => alloc::vec![
                t(a.semantic_type),
                t(a.sort),
                t(a.negation),
                t(a.tense),
                t(a.tense_type),
                t(a.adverb),
                t(a.verb),
                r(a.subject),
                r(a.object_of_influence),
                r(a.directed_from),
                r(a.directed_to),
                t(a.result_state),
                r(a.start_time),
                r(a.start_location),
                r(a.final_location),
                r(a.tool),
                r(a.purpose),
                t(a.clause_role),
                r(a.linkage),
                Value::Int(a.sentence_ordinal),
            ],
            Record::Event(e) => alloc::vec![
                t(e.sort),
                r(e.subject),
                t(e.designation),
                t(e.scale),
                r(e.time),
                Value::Int(e.starting_state),
                Value::Int(e.result_state),
                r(e.location),
                t(e.way_tool),
                r(e.object_of_influence),
                t(e.tense),
            ],
            Record::Generic(g) => g.values,
        }
    }
}

/// Borrowed view of a stored record.
#[derive(Clone, Copy, Debug)]
pub struct RecordRef<'a> {
    pub code: Code,
    pub kind: Kind,
    values: &'a [Value],
}

impl<'a> RecordRef<'a> {
    pub fn get(&self, name: &str) -> Option<&'a Value> {
        field_index(self.kind, name).map(|i| &self.values[i])
    }

    /// Text field content, or "" when the field is absent or non-text.
    pub fn text(&self, name: &str) -> &'a str {
        self.get(name).and_then(Value::as_text).unwrap_or("")
    }

    pub fn ref_code(&self, name: &str) -> Code {
        self.get(name).and_then(Value::as_ref_code).unwrap_or(Code::NULL)
    }

    pub fn int(&self, name: &str) -> i64 {
        self.get(name).and_then(Value::as_int).unwrap_or(0)
    }

    pub fn values(&self) -> &'a [Value] {
        self.values
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Stored {
    kind: Kind,
    values: Vec<Value>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DbError {
    /// A reference field names a code that is not in the database.
    DanglingRef { kind: Kind, field: &'static str, target: Code },
    /// A reference field points at a record of a disallowed kind.
    WrongRefKind { kind: Kind, field: &'static str, target: Code, found: Kind },
    /// An enumerated field holds a value outside its domain.
    Domain { kind: Kind, field: &'static str, value: String },
    /// An event state lies outside the bounds of its normative scale.
    ScaleBounds { field: &'static str, value: i64 },
    /// Wrong number of fields for the kind.
    Arity { kind: Kind, expected: usize, found: usize },
    /// A value's shape does not match the field type.
    FieldType { kind: Kind, field: &'static str },
    /// Query pattern names a field the kind does not have.
    UnknownField { kind: Kind, field: String },
    /// Explicit-code insertion collided with an existing code.
    DuplicateCode { code: Code },
    /// Explicit-code insertion used the null code.
    NullCode,
    /// Malformed dump text.
    Parse { line: usize, message: String },
}

impl fmt::Display for DbError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DbError::DanglingRef { kind, field, target } => {
                write!(f, "{kind}.{field} references missing code {target}")
            }
            DbError::WrongRefKind { kind, field, target, found } => write!(
                f,
                "{kind}.{field} references code {target} of kind {found}, which is not allowed"
            ),
            DbError::Domain { kind, field, value } => {
                write!(f, "{kind}.{field} value {value:?} is outside its domain")
            }
            DbError::ScaleBounds { field, value } => {
                write!(f, "event.{field} value {value} is outside the scale bounds [-100, 100]")
            }
            DbError::Arity { kind, expected, found } => {
                write!(f, "{kind} record needs {expected} fields after the code, found {found}")
            }
            DbError::FieldType { kind, field } => {
                write!(f, "{kind}.{field} holds a value of the wrong shape")
            }
            DbError::UnknownField { kind, field } => {
                write!(f, "kind {kind} has no field named {field:?}")
            }
            DbError::DuplicateCode { code } => write!(f, "code {code} is already in use"),
            DbError::NullCode => write!(f, "code 0 is reserved for the null reference"),
            DbError::Parse { line, message } => write!(f, "dump line {line}: {message}"),
        }
    }
}

impl core::error::Error for DbError {}

/// Constraint on one pattern field.
#[derive(Clone, Debug)]
pub enum Constraint {
    Equals(Value),
    Wildcard,
    /// Field must reference a record matching the nested pattern.
    CodeOf(Box<QueryPattern>),
}

/// A record skeleton matched against the database. Unlisted fields are
/// unconstrained.
#[derive(Clone, Debug)]
pub struct QueryPattern {
    pub kind: Kind,
    pub constraints: Vec<(String, Constraint)>,
}

impl QueryPattern {
    pub fn new(kind: Kind) -> QueryPattern {
        QueryPattern { kind, constraints: Vec::new() }
    }

    pub fn text(mut self, field: &str, value: &str) -> QueryPattern {
        self.constraints.push((field.to_owned(), Constraint::Equals(Value::text(value))));
        self
    }

    pub fn int(mut self, field: &str, value: i64) -> QueryPattern {
        self.constraints.push((field.to_owned(), Constraint::Equals(Value::Int(value))));
        self
    }

    pub fn ref_code(mut self, field: &str, code: Code) -> QueryPattern {
        self.constraints.push((field.to_owned(), Constraint::Equals(Value::Ref(code))));
        self
    }

    pub fn wildcard(mut self, field: &str) -> QueryPattern {
        self.constraints.push((field.to_owned(), Constraint::Wildcard));
        self
    }

    pub fn code_of(mut self, field: &str, nested: QueryPattern) -> QueryPattern {
        self.constraints.push((field.to_owned(), Constraint::CodeOf(Box::new(nested))));
        self
    }
}

/// The record store. Codes are allocated monotonically from 1.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SemanticDb {
    records: BTreeMap<Code, Stored>,
    next: u64,
}

impl SemanticDb {
    pub fn new() -> SemanticDb {
        SemanticDb { records: BTreeMap::new(), next: 1 }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn contains(&self, code: Code) -> bool {
        self.records.contains_key(&code)
    }

    pub fn kind_of(&self, code: Code) -> Option<Kind> {
        self.records.get(&code).map(|s| s.kind)
    }

    pub fn record(&self, code: Code) -> Option<RecordRef<'_>> {
        self.records
            .get(&code)
            .map(|s| RecordRef { code, kind: s.kind, values: &s.values })
    }

    /// All records in code order.
    pub fn records(&self) -> impl Iterator<Item = RecordRef<'_>> {
        self.records
            .iter()
            .map(|(code, s)| RecordRef { code: *code, kind: s.kind, values: &s.values })
    }

    pub fn records_of_kind(&self, kind: Kind) -> impl Iterator<Item = RecordRef<'_>> {
        self.records().filter(move |r| r.kind == kind)
    }

    /// Insert a record under a fresh code. Every reference field must be 0
    /// or name an existing record of an allowed kind.
    pub fn insert(&mut self, record: impl Into<Record>) -> Result<Code, DbError> {
        let record = record.into();
        let kind = record.kind();
        let values = record.into_values();
        self.validate(kind, &values)?;
        let code = Code(self.next);
        self.next += 1;
        self.records.insert(code, Stored { kind, values });
        Ok(code)
    }

    /// Insert a record under an explicit code, deferring reference checks.
    /// Used for batch construction; call [`SemanticDb::check_integrity`]
    /// once the batch is complete.
    pub fn insert_with_code(
        &mut self,
        code: Code,
        record: impl Into<Record>,
    ) -> Result<(), DbError> {
        if code.is_null() {
            return Err(DbError::NullCode);
        }
        if self.records.contains_key(&code) {
            return Err(DbError::DuplicateCode { code });
        }
        let record = record.into();
        let kind = record.kind();
        let values = record.into_values();
        self.validate_shallow(kind, &values)?;
        self.records.insert(code, Stored { kind, values });
        if code.0 >= self.next {
            self.next = code.0 + 1;
        }
        Ok(())
    }

    /// Build a database from (code, record) pairs in one batch. References
    /// may point forward inside the batch; integrity is checked at the end.
    pub fn from_records(
        pairs: impl IntoIterator<Item = (Code, Record)>,
    ) -> Result<SemanticDb, DbError> {
        let mut db = SemanticDb::new();
        for (code, record) in pairs {
            db.insert_with_code(code, record)?;
        }
        db.check_integrity()?;
        Ok(db)
    }

    /// Verify every reference field across the database.
    pub fn check_integrity(&self) -> Result<(), DbError> {
        for r in self.records() {
            for (def, value) in schema(r.kind).iter().zip(r.values()) {
                if let FieldTy::Ref(allowed) = def.ty {
                    let target = value.as_ref_code().unwrap_or(Code::NULL);
                    if target.is_null() {
                        continue;
                    }
                    match self.kind_of(target) {
                        None => {
                            return Err(DbError::DanglingRef {
                                kind: r.kind,
                                field: def.name,
                                target,
                            })
                        }
                        Some(found) if !allowed.allows(found) => {
                            return Err(DbError::WrongRefKind {
                                kind: r.kind,
                                field: def.name,
                                target,
                                found,
                            })
                        }
                        Some(_) => {}
                    }
                }
            }
        }
        Ok(())
    }

    // Shape, domain and scale checks that need no other records.
    fn validate_shallow(&self, kind: Kind, values: &[Value]) -> Result<(), DbError> {
        let fields = schema(kind);
        if fields.len() != values.len() {
            return Err(DbError::Arity { kind, expected: fields.len(), found: values.len() });
        }
        for (def, value) in fields.iter().zip(values) {
            match (def.ty, value) {
                (FieldTy::Text, Value::Text(_)) => {}
                (FieldTy::Enum(domain), Value::Text(v)) => {
                    if !v.is_empty() && !domain.contains(&v.as_str()) {
                        return Err(DbError::Domain {
                            kind,
                            field: def.name,
                            value: v.clone(),
                        });
                    }
                }
                (FieldTy::Ref(_), Value::Ref(_)) => {}
                (FieldTy::Int, Value::Int(_)) => {}
                _ => return Err(DbError::FieldType { kind, field: def.name }),
            }
        }
        if kind == Kind::Event {
            let scale = values[3].as_text().unwrap_or("");
            if BOUNDED_SCALES.contains(&scale) {
                for (field, idx) in [("starting_state", 5usize), ("result_state", 6)] {
                    let v = values[idx].as_int().unwrap_or(0);
                    if !(SCALE_MIN..=SCALE_MAX).contains(&v) {
                        return Err(DbError::ScaleBounds { field, value: v });
                    }
                }
            }
        }
        Ok(())
    }

    fn validate(&self, kind: Kind, values: &[Value]) -> Result<(), DbError> {
        self.validate_shallow(kind, values)?;
        for (def, value) in schema(kind).iter().zip(values) {
            if let FieldTy::Ref(allowed) = def.ty {
                let target = value.as_ref_code().unwrap_or(Code::NULL);
                if target.is_null() {
                    continue;
                }
                match self.kind_of(target) {
                    None => {
                        return Err(DbError::DanglingRef { kind, field: def.name, target })
                    }
                    Some(found) if !allowed.allows(found) => {
                        return Err(DbError::WrongRefKind {
                            kind,
                            field: def.name,
                            target,
                            found,
                        })
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(())
    }

    /// Overwrite a text or enumerated field of a stored record.
    pub fn update_text(&mut self, code: Code, field: &str, value: &str) -> Result<(), DbError> {
        let kind = self.kind_of(code).ok_or(DbError::DanglingRef {
            kind: Kind::Abstr,
            field: "code",
            target: code,
        })?;
        let idx = field_index(kind, field)
            .ok_or_else(|| DbError::UnknownField { kind, field: field.to_owned() })?;
        match schema(kind)[idx].ty {
            FieldTy::Text => {}
            FieldTy::Enum(domain) => {
                if !value.is_empty() && !domain.contains(&value) {
                    return Err(DbError::Domain { kind, field: schema(kind)[idx].name, value: value.to_owned() });
                }
            }
            _ => return Err(DbError::FieldType { kind, field: schema(kind)[idx].name }),
        }
        self.records.get_mut(&code).unwrap().values[idx] = Value::text(value);
        Ok(())
    }

    /// Overwrite a reference field of a stored record.
    pub fn update_ref(&mut self, code: Code, field: &str, target: Code) -> Result<(), DbError> {
        let kind = self.kind_of(code).ok_or(DbError::DanglingRef {
            kind: Kind::Abstr,
            field: "code",
            target: code,
        })?;
        let idx = field_index(kind, field)
            .ok_or_else(|| DbError::UnknownField { kind, field: field.to_owned() })?;
        let FieldTy::Ref(allowed) = schema(kind)[idx].ty else {
            return Err(DbError::FieldType { kind, field: schema(kind)[idx].name });
        };
        if !target.is_null() {
            match self.kind_of(target) {
                None => {
                    return Err(DbError::DanglingRef {
                        kind,
                        field: schema(kind)[idx].name,
                        target,
                    })
                }
                Some(found) if !allowed.allows(found) => {
                    return Err(DbError::WrongRefKind {
                        kind,
                        field: schema(kind)[idx].name,
                        target,
                        found,
                    })
                }
                Some(_) => {}
            }
        }
        self.records.get_mut(&code).unwrap().values[idx] = Value::Ref(target);
        Ok(())
    }

    /// All records satisfying the pattern, in code order.
    pub fn query(&self, pattern: &QueryPattern) -> Result<Vec<Code>, DbError> {
        self.check_pattern(pattern)?;
        let mut out = Vec::new();
        for r in self.records_of_kind(pattern.kind) {
            if self.matches(r, pattern) {
                out.push(r.code);
            }
        }
        Ok(out)
    }

    fn check_pattern(&self, pattern: &QueryPattern) -> Result<(), DbError> {
        for (name, c) in &pattern.constraints {
            if field_index(pattern.kind, name).is_none() {
                return Err(DbError::UnknownField { kind: pattern.kind, field: name.clone() });
            }
            if let Constraint::CodeOf(nested) = c {
                self.check_pattern(nested)?;
            }
        }
        Ok(())
    }

    fn matches(&self, r: RecordRef<'_>, pattern: &QueryPattern) -> bool {
        if r.kind != pattern.kind {
            return false;
        }
        pattern.constraints.iter().all(|(name, c)| {
            let value = match r.get(name) {
                Some(v) => v,
                None => return false,
            };
            match c {
                Constraint::Wildcard => true,
                Constraint::Equals(want) => value == want,
                Constraint::CodeOf(nested) => match value.as_ref_code() {
                    Some(code) if !code.is_null() => match self.record(code) {
                        Some(inner) => self.matches(inner, nested),
                        None => false,
                    },
                    _ => false,
                },
            }
        })
    }

    /// One record per line in functor syntax, code order, trailing newline.
    /// Empty database dumps to empty text.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for r in self.records() {
            out.push_str(r.kind.name());
            out.push('(');
            out.push_str(&r.code.to_string());
            for v in r.values() {
                out.push(',');
                match v {
                    Value::Text(s) => {
                        out.push('"');
                        for ch in s.chars() {
                            if ch == '"' {
                                out.push('"');
                            }
                            out.push(ch);
                        }
                        out.push('"');
                    }
                    Value::Ref(c) => out.push_str(&c.to_string()),
                    Value::Int(i) => out.push_str(&i.to_string()),
                }
            }
            out.push_str(")\n");
        }
        out
    }

    /// Rebuild a database from dump text. Inverse of [`SemanticDb::dump`].
    pub fn load(text: &str) -> Result<SemanticDb, DbError> {
        let mut db = SemanticDb::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let (kind, args) = parse_dump_line(line, lineno)?;
            let fields = schema(kind);
            if args.len() != fields.len() + 1 {
                return Err(DbError::Parse {
                    line: lineno,
                    message: format!(
                        "{} takes {} arguments, found {}",
                        kind.name(),
                        fields.len() + 1,
                        args.len()
                    ),
                });
            }
            let code = match &args[0] {
                Arg::Num(n) if *n > 0 => Code(*n as u64),
                _ => {
                    return Err(DbError::Parse {
                        line: lineno,
                        message: "record code must be a positive integer".to_owned(),
                    })
                }
            };
            let mut values = Vec::with_capacity(fields.len());
            for (def, arg) in fields.iter().zip(&args[1..]) {
                let value = match (def.ty, arg) {
                    (FieldTy::Text | FieldTy::Enum(_), Arg::Str(s)) => Value::Text(s.clone()),
                    (FieldTy::Ref(_), Arg::Num(n)) if *n >= 0 => Value::Ref(Code(*n as u64)),
                    (FieldTy::Int, Arg::Num(n)) => Value::Int(*n),
                    _ => {
                        return Err(DbError::Parse {
                            line: lineno,
                            message: format!("field {} has the wrong argument shape", def.name),
                        })
                    }
                };
                values.push(value);
            }
            if db.records.contains_key(&code) {
                return Err(DbError::Parse {
                    line: lineno,
                    message: format!("duplicate code {code}"),
                });
            }
            db.validate_shallow(kind, &values).map_err(|e| DbError::Parse {
                line: lineno,
                message: e.to_string(),
            })?;
            db.records.insert(code, Stored { kind, values });
            if code.0 >= db.next {
                db.next = code.0 + 1;
            }
        }
        db.check_integrity()?;
        Ok(db)
    }
}

enum Arg {
    Str(String),
    Num(i64),
}

fn parse_dump_line(line: &str, lineno: usize) -> Result<(Kind, Vec<Arg>), DbError> {
    let err = |message: String| DbError::Parse { line: lineno, message };
    let open = line
        .find('(')
        .ok_or_else(|| err("expected functor syntax kind(...)".to_owned()))?;
    if !line.ends_with(')') {
        return Err(err("missing closing parenthesis".to_owned()));
    }
    let kind = Kind::from_name(&line[..open])
        .ok_or_else(|| err(format!("unknown record kind {:?}", &line[..open])))?;
    let body = &line[open + 1..line.len() - 1];
    let mut args = Vec::new();
    let mut chars = body.chars().peekable();
    loop {
        match chars.peek() {
            None => break,
            Some('"') => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        None => return Err(err("unterminated string".to_owned())),
                        Some('"') => {
                            // Doubled quote is an escaped quote.
                            if chars.peek() == Some(&'"') {
                                chars.next();
                                s.push('"');
                            } else {
                                break;
                            }
                        }
                        Some(ch) => s.push(ch),
                    }
                }
                args.push(Arg::Str(s));
            }
            Some(_) => {
                let mut tok = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch == ',' {
                        break;
                    }
                    tok.push(ch);
                    chars.next();
                }
                let tok = tok.trim();
                let n: i64 = tok
                    .parse()
                    .map_err(|_| err(format!("expected number, found {tok:?}")))?;
                args.push(Arg::Num(n));
            }
        }
        match chars.next() {
            None => break,
            Some(',') => continue,
            Some(ch) => return Err(err(format!("expected comma, found {ch:?}"))),
        }
    }
    Ok((kind, args))
}

/// True when a code bijection maps one database's record multiset onto the
/// other's, preserving kinds, non-reference fields and reference structure.
pub fn alpha_equivalent(a: &SemanticDb, b: &SemanticDb) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let a_recs: Vec<RecordRef<'_>> = a.records().collect();
    let b_recs: Vec<RecordRef<'_>> = b.records().collect();

    // Non-reference signature: kind plus every non-ref value plus the
    // null/non-null shape of each ref field.
    fn signature(r: &RecordRef<'_>) -> (Kind, Vec<Value>, Vec<bool>) {
        let mut plain = Vec::new();
        let mut nulls = Vec::new();
        for (def, v) in schema(r.kind).iter().zip(r.values()) {
            match def.ty {
                FieldTy::Ref(_) => nulls.push(v.as_ref_code().unwrap_or(Code::NULL).is_null()),
                _ => plain.push(v.clone()),
            }
        }
        (r.kind, plain, nulls)
    }

    let b_sigs: Vec<_> = b_recs.iter().map(signature).collect();

    fn refs(r: &RecordRef<'_>) -> Vec<Code> {
        schema(r.kind)
            .iter()
            .zip(r.values())
            .filter(|(def, _)| matches!(def.ty, FieldTy::Ref(_)))
            .map(|(_, v)| v.as_ref_code().unwrap_or(Code::NULL))
            .collect()
    }

    fn search(
        i: usize,
        a_recs: &[RecordRef<'_>],
        b_recs: &[RecordRef<'_>],
        b_sigs: &[(Kind, Vec<Value>, Vec<bool>)],
        used: &mut Vec<bool>,
        fwd: &mut BTreeMap<Code, Code>,
        rev: &mut BTreeMap<Code, Code>,
    ) -> bool {
        if i == a_recs.len() {
            return true;
        }
        let ra = &a_recs[i];
        let sig_a = {
            let mut plain = Vec::new();
            let mut nulls = Vec::new();
            for (def, v) in schema(ra.kind).iter().zip(ra.values()) {
                match def.ty {
                    FieldTy::Ref(_) => {
                        nulls.push(v.as_ref_code().unwrap_or(Code::NULL).is_null())
                    }
                    _ => plain.push(v.clone()),
                }
            }
            (ra.kind, plain, nulls)
        };
        for (j, rb) in b_recs.iter().enumerate() {
            if used[j] || b_sigs[j] != sig_a {
                continue;
            }
            // Tentative pairing: record codes and all reference pairs must
            // be consistent with the mapping built so far.
            let mut added: Vec<Code> = Vec::new();
            let mut ok = true;
            let bind = |x: Code, y: Code, fwd: &mut BTreeMap<Code, Code>,
                            rev: &mut BTreeMap<Code, Code>,
                            added: &mut Vec<Code>| {
                if x.is_null() || y.is_null() {
                    return x.is_null() == y.is_null();
                }
                match fwd.get(&x) {
                    Some(&mapped) => mapped == y,
                    None => {
                        if rev.contains_key(&y) {
                            return false;
                        }
                        fwd.insert(x, y);
                        rev.insert(y, x);
                        added.push(x);
                        true
                    }
                }
            };
            if !bind(ra.code, rb.code, fwd, rev, &mut added) {
                ok = false;
            }
            if ok {
                for (x, y) in refs(ra).into_iter().zip(refs(rb)) {
                    if !bind(x, y, fwd, rev, &mut added) {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                used[j] = true;
                if search(i + 1, a_recs, b_recs, b_sigs, used, fwd, rev) {
                    return true;
                }
                used[j] = false;
            }
            for x in added {
                if let Some(y) = fwd.remove(&x) {
                    rev.remove(&y);
                }
            }
        }
        false
    }

    let mut used = alloc::vec![false; b_recs.len()];
    let mut fwd = BTreeMap::new();
    let mut rev = BTreeMap::new();
    search(0, &a_recs, &b_recs, &b_sigs, &mut used, &mut fwd, &mut rev)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tim_years() -> GenericRecord {
        GenericRecord::new(Kind::Tim).with_text("unit", "years")
    }

    #[test]
    fn first_insert_gets_code_one() {
        let mut db = SemanticDb::new();
        let code = db.insert(tim_years()).unwrap();
        assert_eq!(code, Code(1));
        assert_eq!(db.record(code).unwrap().text("unit"), "years");
    }

    #[test]
    fn dangling_reference_is_rejected() {
        let mut db = SemanticDb::new();
        let action = ActionRecord { start_time: Code(99), ..ActionRecord::default() };
        let err = db.insert(action).unwrap_err();
        assert_eq!(
            err,
            DbError::DanglingRef { kind: Kind::Action, field: "start_time", target: Code(99) }
        );
    }

    #[test]
    fn wrong_kind_reference_is_rejected() {
        let mut db = SemanticDb::new();
        let tim = db.insert(tim_years()).unwrap();
        let action = ActionRecord { subject: tim, ..ActionRecord::default() };
        let err = db.insert(action).unwrap_err();
        assert!(matches!(err, DbError::WrongRefKind { field: "subject", .. }));
    }

    #[test]
    fn enum_domains_are_enforced() {
        let mut db = SemanticDb::new();
        let bad = ActionRecord { tense: "sometime".into(), ..ActionRecord::default() };
        assert!(matches!(db.insert(bad).unwrap_err(), DbError::Domain { field: "tense", .. }));
        // Empty means unset and is always allowed.
        let ok = ActionRecord::default();
        db.insert(ok).unwrap();
    }

    #[test]
    fn event_scale_bounds() {
        let mut db = SemanticDb::new();
        let bad = EventRecord {
            scale: "health".into(),
            result_state: -150,
            ..EventRecord::default()
        };
        assert!(matches!(db.insert(bad).unwrap_err(), DbError::ScaleBounds { .. }));
        let ok = EventRecord {
            scale: "health".into(),
            starting_state: 100,
            result_state: -100,
            ..EventRecord::default()
        };
        db.insert(ok).unwrap();
        // Unknown scales carry no bounds.
        let free = EventRecord {
            scale: "temperature".into(),
            result_state: 451,
            ..EventRecord::default()
        };
        db.insert(free).unwrap();
    }

    #[test]
    fn query_on_empty_db_is_empty() {
        let db = SemanticDb::new();
        let hits = db.query(&QueryPattern::new(Kind::Person)).unwrap();
        assert!(hits.is_empty());
    }

    #[test]
    fn unknown_pattern_field_errors() {
        let db = SemanticDb::new();
        let err = db.query(&QueryPattern::new(Kind::Person).text("surname", "Brown")).unwrap_err();
        assert_eq!(err, DbError::UnknownField { kind: Kind::Person, field: "surname".into() });
    }

    #[test]
    fn dump_quotes_and_doubles_embedded_quotes() {
        let mut db = SemanticDb::new();
        db.insert(GenericRecord::new(Kind::Abstr).with_text("designation", "say \"no\""))
            .unwrap();
        let text = db.dump();
        assert_eq!(text, "abstr(1,\"say \"\"no\"\"\",\"\",\"\")\n");
        let back = SemanticDb::load(&text).unwrap();
        assert_eq!(back.record(Code(1)).unwrap().text("designation"), "say \"no\"");
    }

    #[test]
    fn empty_db_dumps_to_empty_text() {
        assert_eq!(SemanticDb::new().dump(), "");
        assert!(SemanticDb::load("").unwrap().is_empty());
    }

    #[test]
    fn load_reports_line_numbers() {
        let err = SemanticDb::load("tim(1,\"\",\"years\",\"\",\"\",\"\",\"\",\"\",\"\",\"\",\"\")\nnope(2)\n")
            .unwrap_err();
        assert!(matches!(err, DbError::Parse { line: 2, .. }));
    }

    #[test]
    fn alpha_equivalence_identity_and_renaming() {
        let mut a = SemanticDb::new();
        let tim = a.insert(tim_years()).unwrap();
        a.insert(GenericRecord::new(Kind::Number).with_text("value_word", "fifteen").with_ref("referent", tim))
            .unwrap();
        assert!(alpha_equivalent(&a, &a));

        // Same structure under shifted codes.
        let mut b = SemanticDb::new();
        b.insert(GenericRecord::new(Kind::Abstr)).unwrap();
        let tim_b = b.insert(tim_years()).unwrap();
        b.insert(
            GenericRecord::new(Kind::Number).with_text("value_word", "fifteen").with_ref("referent", tim_b),
        )
        .unwrap();
        assert!(!alpha_equivalent(&a, &b)); // extra abstr record

        let mut c = SemanticDb::new();
        c.insert(tim_years()).unwrap();
        let tim_c = Code(1);
        c.insert(
            GenericRecord::new(Kind::Number).with_text("value_word", "fifteen").with_ref("referent", tim_c),
        )
        .unwrap();
        assert!(alpha_equivalent(&a, &c));
    }

    #[test]
    fn alpha_equivalence_respects_reference_structure() {
        // Two tims and two numbers; in `a` both numbers share one tim, in
        // `b` each number has its own. Same multiset of rows, different wiring.
        let mut a = SemanticDb::new();
        let t1 = a.insert(tim_years()).unwrap();
        let _t2 = a.insert(tim_years()).unwrap();
        a.insert(GenericRecord::new(Kind::Number).with_ref("referent", t1)).unwrap();
        a.insert(GenericRecord::new(Kind::Number).with_ref("referent", t1)).unwrap();

        let mut b = SemanticDb::new();
        let u1 = b.insert(tim_years()).unwrap();
        let u2 = b.insert(tim_years()).unwrap();
        b.insert(GenericRecord::new(Kind::Number).with_ref("referent", u1)).unwrap();
        b.insert(GenericRecord::new(Kind::Number).with_ref("referent", u2)).unwrap();

        assert!(!alpha_equivalent(&a, &b));
        assert!(alpha_equivalent(&b, &b));
    }

    #[test]
    fn batch_accepts_forward_references() {
        // action -> cadr appears before the cadr row, as in a loaded dump.
        let action = ActionRecord {
            semantic_type: "IS".into(),
            verb: "be".into(),
            linkage: Code(7),
            ..ActionRecord::default()
        };
        let cadr = GenericRecord::new(Kind::Cadr).with_int("d", 1);
        let db = SemanticDb::from_records([
            (Code(3), Record::Action(action)),
            (Code(7), Record::Generic(cadr)),
        ])
        .unwrap();
        assert_eq!(db.len(), 2);
        // Fresh inserts continue above the highest explicit code.
        let mut db = db;
        let next = db.insert(tim_years()).unwrap();
        assert_eq!(next, Code(8));
    }
}
