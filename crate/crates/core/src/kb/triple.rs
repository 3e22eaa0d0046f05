use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::schema::{Class, ObjectKind, Predicate, ResourceStatus};
use crate::geo::GeoPoint;

/// Object position of a triple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Term {
    Id(String),
    Int(i64),
    Text(String),
}

impl Term {
    pub fn id(s: impl Into<String>) -> Self {
        Term::Id(s.into())
    }

    pub fn text(s: impl Into<String>) -> Self {
        Term::Text(s.into())
    }

    pub fn as_id(&self) -> Option<&str> {
        match self {
            Term::Id(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Term::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Term::Text(s) => Some(s),
            _ => None,
        }
    }

    /// Lexical form as written in the triple file (before escaping).
    pub fn lexical(&self) -> String {
        match self {
            Term::Id(s) | Term::Text(s) => s.clone(),
            Term::Int(n) => n.to_string(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Id(s) => f.write_str(s),
            Term::Int(n) => write!(f, "{n}"),
            Term::Text(s) => write!(f, "{s:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject: String,
    pub predicate: Predicate,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: impl Into<String>, predicate: Predicate, object: Term) -> Self {
        Self {
            subject: subject.into(),
            predicate,
            object,
        }
    }

    /// Builds a triple from raw lexical forms, typing the object according to
    /// the predicate. Integer properties accept a unit suffix (`8_places`).
    pub fn parse(subject: &str, predicate: &str, object: &str) -> Result<Self, Rejection> {
        let predicate: Predicate = predicate
            .parse()
            .map_err(|_| Rejection::UnknownPredicate(predicate.to_string()))?;
        let conflict = || Rejection::TypeConflict {
            predicate,
            object: object.to_string(),
        };
        let object = match predicate.object_kind() {
            ObjectKind::Integer => Term::Int(parse_count(object).ok_or_else(conflict)?),
            ObjectKind::Text | ObjectKind::Coordinate => Term::Text(object.to_string()),
            ObjectKind::Class | ObjectKind::Identifier | ObjectKind::Status => {
                Term::Id(object.to_string())
            }
        };
        let t = Triple::new(subject, predicate, object);
        t.check()?;
        Ok(t)
    }

    /// Schema check applied on every assertion.
    pub fn check(&self) -> Result<(), Rejection> {
        if self.subject.is_empty() {
            return Err(Rejection::EmptySubject);
        }
        if !is_identifier(&self.subject) {
            return Err(Rejection::MalformedIdentifier(self.subject.clone()));
        }
        let conflict = || Rejection::TypeConflict {
            predicate: self.predicate,
            object: self.object.lexical(),
        };
        match (self.predicate.object_kind(), &self.object) {
            (ObjectKind::Integer, Term::Int(_)) => Ok(()),
            (ObjectKind::Text, Term::Text(_)) => Ok(()),
            (ObjectKind::Coordinate, Term::Text(s)) => {
                s.parse::<GeoPoint>().map(|_| ()).map_err(|_| conflict())
            }
            (ObjectKind::Identifier, Term::Id(s)) if is_identifier(s) => Ok(()),
            (ObjectKind::Class, Term::Id(s)) => match Class::from_iri(s) {
                Some(_) => Ok(()),
                None => Err(Rejection::UnknownClass(s.clone())),
            },
            (ObjectKind::Status, Term::Id(s)) if ResourceStatus::parse(s).is_some() => Ok(()),
            _ => Err(conflict()),
        }
    }
}

impl PartialOrd for Triple {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Triple {
    fn cmp(&self, other: &Self) -> Ordering {
        self.subject
            .cmp(&other.subject)
            .then_with(|| self.predicate.cmp(&other.predicate))
            .then_with(|| self.object.cmp(&other.object))
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}, {}>", self.subject, self.predicate, self.object)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Rejection {
    #[error("empty subject")]
    EmptySubject,
    #[error("identifier `{0}` contains whitespace or control characters")]
    MalformedIdentifier(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("object `{object}` does not fit the type of `{predicate}`")]
    TypeConflict { predicate: Predicate, object: String },
}

impl Rejection {
    pub fn code(&self) -> &'static str {
        match self {
            Rejection::EmptySubject => "empty_subject",
            Rejection::MalformedIdentifier(_) => "malformed_identifier",
            Rejection::UnknownPredicate(_) => "unknown_predicate",
            Rejection::UnknownClass(_) => "unknown_class",
            Rejection::TypeConflict { .. } => "type_conflict",
        }
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(|c| c.is_whitespace() || c.is_control())
}

/// `8`, `-3` and `8_places` all parse; `8.5` and `eight` do not.
fn parse_count(s: &str) -> Option<i64> {
    let digits = match s.split_once('_') {
        Some((n, suffix)) if !suffix.is_empty() && suffix.chars().all(|c| c.is_alphanumeric() || c == '_') => n,
        Some(_) => return None,
        None => s,
    };
    digits.parse().ok()
}
