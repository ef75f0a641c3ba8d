//! LIWC-style lexicon parsing and category membership.
//!
//! File format (`.dic`-compatible, UTF-8): a header block delimited by
//! lines containing only `%`, with `"<id> <CATEGORY_NAME>"` lines, then
//! word lines `"<pattern> <id> [<id>...]"`. A trailing `*` in a pattern
//! matches any word with that prefix.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;

use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::text::{Vocabulary, Word};

use super::{MembershipSource, TopicMembership};

#[derive(Clone, Debug)]
pub struct LexiconEntry {
    /// Normalized pattern without the trailing `*`.
    pub pattern: String,
    pub is_prefix: bool,
    /// Category indices into [`Lexicon::categories`].
    pub categories: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Lexicon {
    categories: Vec<String>,
    entries: Vec<LexiconEntry>,
}

impl Lexicon {
    /// Parse a lexicon stream. All errors carry the 1-based line number.
    pub fn parse<R: BufRead>(reader: R) -> Result<Lexicon> {
        let fail = |line: u64, message: String| Error::Lexicon { line, message };

        let mut categories: Vec<String> = Vec::new();
        let mut id_to_index: HashMap<u64, usize> = HashMap::new();
        let mut entries: Vec<LexiconEntry> = Vec::new();

        #[derive(PartialEq)]
        enum State {
            BeforeHeader,
            InHeader,
            Words,
        }
        let mut state = State::BeforeHeader;
        let mut line_no: u64 = 0;

        for line in reader.lines() {
            let line = line?;
            line_no += 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if trimmed == "%" {
                state = match state {
                    State::BeforeHeader => State::InHeader,
                    State::InHeader => State::Words,
                    State::Words => {
                        return Err(fail(line_no, "unexpected '%' after header".into()))
                    }
                };
                continue;
            }
            match state {
                State::BeforeHeader => {
                    return Err(fail(
                        line_no,
                        "expected '%' to open the category header".into(),
                    ));
                }
                State::InHeader => {
                    let fields: Vec<&str> = trimmed.split_whitespace().collect();
                    if fields.len() != 2 {
                        return Err(fail(
                            line_no,
                            format!("malformed category line {trimmed:?}"),
                        ));
                    }
                    let id: u64 = fields[0].parse().map_err(|_| {
                        fail(line_no, format!("bad category id {:?}", fields[0]))
                    })?;
                    let name = fields[1].to_owned();
                    if id_to_index.contains_key(&id) {
                        return Err(fail(line_no, format!("duplicate category id {id}")));
                    }
                    if categories.contains(&name) {
                        return Err(fail(line_no, format!("duplicate category name {name:?}")));
                    }
                    id_to_index.insert(id, categories.len());
                    categories.push(name);
                }
                State::Words => {
                    let mut fields = trimmed.split_whitespace();
                    let raw_pattern = fields.next().expect("non-empty line");
                    let ids: Vec<&str> = fields.collect();
                    if ids.is_empty() {
                        return Err(fail(
                            line_no,
                            format!("word line {raw_pattern:?} lists no categories"),
                        ));
                    }
                    let mut cats = Vec::with_capacity(ids.len());
                    for id_str in ids {
                        let id: u64 = id_str.parse().map_err(|_| {
                            fail(
                                line_no,
                                format!("malformed line: {id_str:?} is not a category id"),
                            )
                        })?;
                        let index = *id_to_index.get(&id).ok_or_else(|| {
                            fail(line_no, format!("unknown category id {id}"))
                        })?;
                        if !cats.contains(&index) {
                            cats.push(index);
                        }
                    }
                    let (stem, is_prefix) = match raw_pattern.strip_suffix('*') {
                        Some(s) => (s, true),
                        None => (raw_pattern, false),
                    };
                    // patterns match against normalized words, so fold
                    // them the same way (but keep edge characters: a
                    // pattern is author-controlled, not tokenizer noise)
                    let pattern: String = stem.nfc().collect::<String>().to_lowercase();
                    if pattern.is_empty() {
                        return Err(fail(
                            line_no,
                            format!("pattern {raw_pattern:?} is empty"),
                        ));
                    }
                    entries.push(LexiconEntry {
                        pattern,
                        is_prefix,
                        categories: cats,
                    });
                }
            }
        }
        if state == State::BeforeHeader {
            return Err(fail(line_no.max(1), "missing category header".into()));
        }
        Ok(Lexicon { categories, entries })
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    /// Union of category indices over all entries matching the word.
    pub fn matches(&self, word: &Word) -> BTreeSet<usize> {
        let w = word.as_str();
        let mut cats = BTreeSet::new();
        for entry in &self.entries {
            let hit = if entry.is_prefix {
                w.starts_with(entry.pattern.as_str())
            } else {
                w == entry.pattern
            };
            if hit {
                cats.extend(entry.categories.iter().copied());
            }
        }
        cats
    }
}

/// Membership for every vocabulary word matching at least one pattern:
/// 1/T_w for each of the T_w matched categories (all matching patterns'
/// categories are unioned; there is no longest-match rule).
pub fn lexicon_membership(lexicon: &Lexicon, vocab: &Vocabulary) -> TopicMembership {
    let mut map = BTreeMap::new();
    for word in vocab.iter() {
        let cats = lexicon.matches(word);
        if cats.is_empty() {
            continue;
        }
        let weight = 1.0 / cats.len() as f64;
        map.insert(
            word.clone(),
            cats.into_iter().map(|c| (c, weight)).collect::<Vec<_>>(),
        );
    }
    if map.is_empty() {
        log::warn!("lexicon matched no vocabulary words; membership is empty");
    }
    TopicMembership::new(
        lexicon.categories.clone(),
        MembershipSource::Lexicon,
        map,
    )
}
