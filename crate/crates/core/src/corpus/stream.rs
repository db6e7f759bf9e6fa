use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::AnnotatedCorpus;
use crate::error::{Error, Result};

const ENTITY_PREFIX: &str = "ENT:";
const TYPE_PREFIX: &str = "TYPE:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TokenKind {
    Word,
    Entity,
    Type,
}

/// A token of the three-copy stream. Entity and type tokens live in their
/// own namespaces so that e.g. the type `city` never collides with the word
/// "city".
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Token {
    Word(String),
    Entity(String),
    Type(String),
}

impl Token {
    pub fn kind(&self) -> TokenKind {
        match self {
            Token::Word(_) => TokenKind::Word,
            Token::Entity(_) => TokenKind::Entity,
            Token::Type(_) => TokenKind::Type,
        }
    }

    pub fn text(&self) -> &str {
        match self {
            Token::Word(s) | Token::Entity(s) | Token::Type(s) => s,
        }
    }

    /// Serialized key: words verbatim, entities as `ENT:<id>`, types as `TYPE:<id>`.
    pub fn key(&self) -> String {
        match self {
            Token::Word(s) => s.clone(),
            Token::Entity(s) => format!("{ENTITY_PREFIX}{s}"),
            Token::Type(s) => format!("{TYPE_PREFIX}{s}"),
        }
    }

    pub fn from_key(key: &str) -> Token {
        if let Some(id) = key.strip_prefix(ENTITY_PREFIX) {
            Token::Entity(id.to_string())
        } else if let Some(id) = key.strip_prefix(TYPE_PREFIX) {
            Token::Type(id.to_string())
        } else {
            Token::Word(key.to_string())
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

pub fn entity_key(id: &str) -> String {
    Token::Entity(id.to_string()).key()
}

pub fn type_key(id: &str) -> String {
    Token::Type(id.to_string()).key()
}

/// Sentences of tokens; the training input of the embedding models.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenStream {
    pub sentences: Vec<Vec<Token>>,
}

impl TokenStream {
    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.token_count() == 0
    }

    /// One sentence per line, keys separated by single spaces.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for s in &self.sentences {
            let line: Vec<String> = s.iter().map(Token::key).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut sentences = Vec::new();
        for line in BufReader::new(f).lines() {
            let line = line.map_err(|e| Error::io(path, e))?;
            sentences.push(line.split_whitespace().map(Token::from_key).collect());
        }
        Ok(TokenStream { sentences })
    }
}

/// Emits, per sentence: the surface sentence; a copy with every mention
/// collapsed to its entity token; a copy with every mention collapsed to its
/// entity's notable-type token, except mentions of entities in `exclude`,
/// which keep their surface words.
pub fn build_three_copy_corpus(
    corpus: &AnnotatedCorpus,
    notable: &HashMap<String, String>,
    exclude: &HashSet<String>,
) -> Result<TokenStream> {
    let mut out = Vec::with_capacity(3 * corpus.sentences.len());
    for (si, s) in corpus.sentences.iter().enumerate() {
        s.validate()?;
        let surface: Vec<Token> = s.tokens.iter().cloned().map(Token::Word).collect();
        let mut by_entity = Vec::with_capacity(s.tokens.len());
        let mut by_type = Vec::with_capacity(s.tokens.len());
        let mut i = 0;
        let mut mentions = s.mentions.iter().peekable();
        while i < s.tokens.len() {
            match mentions.peek() {
                Some(m) if m.start == i => {
                    let held_out = exclude.contains(&m.entity);
                    let notable_type = notable.get(&m.entity);
                    if notable_type.is_none() && !held_out {
                        return Err(Error::Validation(format!(
                            "sentence {}: mention of unknown entity `{}` (no notable type)",
                            si + 1,
                            m.entity
                        )));
                    }
                    by_entity.push(Token::Entity(m.entity.clone()));
                    match notable_type {
                        Some(t) if !held_out => by_type.push(Token::Type(t.clone())),
                        _ => by_type.extend(surface[m.start..m.end].iter().cloned()),
                    }
                    i = m.end;
                    mentions.next();
                }
                _ => {
                    by_entity.push(surface[i].clone());
                    by_type.push(surface[i].clone());
                    i += 1;
                }
            }
        }
        out.push(surface);
        out.push(by_entity);
        out.push(by_type);
    }
    Ok(TokenStream { sentences: out })
}

/// Reads `entity_id<TAB>type_id` rows.
pub fn load_notable_types(path: impl AsRef<Path>) -> Result<HashMap<String, String>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_notable_types(&text, &path.display().to_string())
}

pub fn parse_notable_types(text: &str, origin: &str) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let Some((e, t)) = line.split_once('\t') else {
            return Err(Error::parse(origin, lineno + 1, "expected `entity_id<TAB>type_id`"));
        };
        let (e, t) = (e.trim(), t.trim());
        if e.is_empty() || t.is_empty() || t.contains('\t') {
            return Err(Error::parse(origin, lineno + 1, "expected `entity_id<TAB>type_id`"));
        }
        if map.insert(e.to_string(), t.to_string()).is_some() {
            return Err(Error::parse(origin, lineno + 1, format!("duplicate entity `{e}`")));
        }
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(s: &[Token]) -> Vec<String> {
        s.iter().map(Token::key).collect()
    }

    #[test]
    fn three_copies_of_a_sentence() {
        let c = AnnotatedCorpus::parse("X visited [[m.05|Paris]]\n", "c").unwrap();
        let notable = HashMap::from([("m.05".to_string(), "city".to_string())]);
        let s = build_three_copy_corpus(&c, &notable, &HashSet::new()).unwrap();
        assert_eq!(s.sentences.len(), 3);
        assert_eq!(words(&s.sentences[0]), ["X", "visited", "Paris"]);
        assert_eq!(s.sentences[1][2], Token::Entity("m.05".into()));
        assert_eq!(s.sentences[2][2], Token::Type("city".into()));
        assert_eq!(words(&s.sentences[1][..2]), ["X", "visited"]);
    }

    #[test]
    fn no_mentions_gives_identical_copies() {
        let c = AnnotatedCorpus::parse("just some words .\n", "c").unwrap();
        let s = build_three_copy_corpus(&c, &HashMap::new(), &HashSet::new()).unwrap();
        assert_eq!(s.sentences[0], s.sentences[1]);
        assert_eq!(s.sentences[1], s.sentences[2]);
    }

    #[test]
    fn excluded_entity_keeps_surface_in_type_copy() {
        let c = AnnotatedCorpus::parse("X visited [[m.05|Paris Ville]] today\n", "c").unwrap();
        let notable = HashMap::from([("m.05".to_string(), "city".to_string())]);
        let exclude = HashSet::from(["m.05".to_string()]);
        let s = build_three_copy_corpus(&c, &notable, &exclude).unwrap();
        assert_eq!(words(&s.sentences[2]), ["X", "visited", "Paris", "Ville", "today"]);
        assert_eq!(words(&s.sentences[1]), ["X", "visited", "ENT:m.05", "today"]);
    }

    #[test]
    fn unknown_entity_is_an_error() {
        let c = AnnotatedCorpus::parse("[[m.99|Nowhere]]\n", "c").unwrap();
        assert!(build_three_copy_corpus(&c, &HashMap::new(), &HashSet::new()).is_err());
    }

    #[test]
    fn key_round_trip() {
        for t in [Token::Word("city".into()), Token::Entity("m.05".into()), Token::Type("city".into())] {
            assert_eq!(Token::from_key(&t.key()), t);
        }
    }
}
