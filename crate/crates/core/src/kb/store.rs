use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, RwLock, RwLockReadGuard, RwLockWriteGuard};

type Entries = BTreeSet<(Predicate, Term)>;

use super::schema::Predicate;
use super::triple::{Rejection, Term, Triple};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assertion {
    Added,
    /// The triple was already present.
    Unchanged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Retraction {
    Removed,
    Absent,
}

/// Pattern for [`TripleStore::query`]; `None` is a wildcard.
#[derive(Debug, Clone, Copy, Default)]
pub struct Pattern<'a> {
    pub subject: Option<&'a str>,
    pub predicate: Option<Predicate>,
    pub object: Option<&'a Term>,
}

impl<'a> Pattern<'a> {
    pub fn any() -> Self {
        Self::default()
    }

    pub fn subject(mut self, s: &'a str) -> Self {
        self.subject = Some(s);
        self
    }

    pub fn predicate(mut self, p: Predicate) -> Self {
        self.predicate = Some(p);
        self
    }

    pub fn object(mut self, o: &'a Term) -> Self {
        self.object = Some(o);
        self
    }
}

/// In-memory set of triples indexed by subject.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TripleStore {
    by_subject: BTreeMap<String, BTreeSet<(Predicate, Term)>>,
    len: usize,
}

impl TripleStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn assert_triple(&mut self, t: Triple) -> Result<Assertion, Rejection> {
        t.check()?;
        let added = self
            .by_subject
            .entry(t.subject)
            .or_default()
            .insert((t.predicate, t.object));
        if added {
            self.len += 1;
            Ok(Assertion::Added)
        } else {
            Ok(Assertion::Unchanged)
        }
    }

    /// Parses and asserts a triple given in lexical form.
    pub fn assert_raw(&mut self, s: &str, p: &str, o: &str) -> Result<Assertion, Rejection> {
        self.assert_triple(Triple::parse(s, p, o)?)
    }

    /// Asserts every triple or none of them.
    pub fn assert_all(&mut self, triples: impl IntoIterator<Item = Triple>) -> Result<(), Rejection> {
        let triples: Vec<Triple> = triples.into_iter().collect();
        for t in &triples {
            t.check()?;
        }
        for t in triples {
            self.assert_triple(t)?;
        }
        Ok(())
    }

    pub fn retract_triple(&mut self, t: &Triple) -> Retraction {
        let Some(entries) = self.by_subject.get_mut(&t.subject) else {
            return Retraction::Absent;
        };
        if !entries.remove(&(t.predicate, t.object.clone())) {
            return Retraction::Absent;
        }
        if entries.is_empty() {
            self.by_subject.remove(&t.subject);
        }
        self.len -= 1;
        Retraction::Removed
    }

    /// Removes every `(subject, predicate, _)` triple; returns how many went.
    pub fn retract_values(&mut self, subject: &str, predicate: Predicate) -> usize {
        let doomed: Vec<Triple> = self
            .query(Pattern::any().subject(subject).predicate(predicate))
            .collect();
        for t in &doomed {
            self.retract_triple(t);
        }
        doomed.len()
    }

    /// Replaces all values of a single-valued property.
    pub fn set_value(&mut self, subject: &str, predicate: Predicate, object: Term) -> Result<(), Rejection> {
        let t = Triple::new(subject, predicate, object);
        t.check()?;
        self.retract_values(subject, predicate);
        self.assert_triple(t)?;
        Ok(())
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.by_subject
            .get(&t.subject)
            .is_some_and(|e| e.contains(&(t.predicate, t.object.clone())))
    }

    /// Matching triples ordered by subject, predicate name, then object.
    pub fn query<'a>(&'a self, pattern: Pattern<'a>) -> impl Iterator<Item = Triple> + 'a {
        let subjects: Box<dyn Iterator<Item = (&String, &Entries)>> =
            match pattern.subject {
                Some(s) => Box::new(self.by_subject.get_key_value(s).into_iter()),
                None => Box::new(self.by_subject.iter()),
            };
        subjects.flat_map(move |(s, entries)| {
            entries
                .iter()
                .filter(move |(p, o)| {
                    pattern.predicate.is_none_or(|want| want == *p)
                        && pattern.object.is_none_or(|want| want == o)
                })
                .map(move |(p, o)| Triple::new(s.clone(), *p, o.clone()))
        })
    }

    pub fn objects<'a>(&'a self, subject: &str, predicate: Predicate) -> impl Iterator<Item = &'a Term> + 'a {
        self.by_subject
            .get(subject)
            .into_iter()
            .flat_map(move |e| e.iter().filter(move |(p, _)| *p == predicate).map(|(_, o)| o))
    }

    /// Subjects `s` with `<s, predicate, object>`.
    pub fn subjects_with<'a>(&'a self, predicate: Predicate, object: &Term) -> impl Iterator<Item = &'a str> + 'a {
        let key = (predicate, object.clone());
        self.by_subject
            .iter()
            .filter(move |(_, e)| e.contains(&key))
            .map(|(s, _)| s.as_str())
    }

    pub fn subjects(&self) -> impl Iterator<Item = &str> {
        self.by_subject.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = Triple> + '_ {
        self.query(Pattern::any())
    }
}

/// Reader-writer handle over a store. Readers take cheap snapshots; a writer
/// holds the lock for the whole mutation so nobody sees a half-applied change.
#[derive(Debug, Clone, Default)]
pub struct SharedKnowledgeBase {
    inner: Arc<RwLock<TripleStore>>,
}

impl SharedKnowledgeBase {
    pub fn new(store: TripleStore) -> Self {
        Self {
            inner: Arc::new(RwLock::new(store)),
        }
    }

    pub fn read(&self) -> RwLockReadGuard<'_, TripleStore> {
        self.inner.read().unwrap_or_else(|e| e.into_inner())
    }

    pub fn write(&self) -> RwLockWriteGuard<'_, TripleStore> {
        self.inner.write().unwrap_or_else(|e| e.into_inner())
    }

    pub fn snapshot(&self) -> TripleStore {
        self.read().clone()
    }
}
