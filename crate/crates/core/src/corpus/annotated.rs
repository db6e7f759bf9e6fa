use std::path::Path;

use crate::error::{Error, Result};

/// A mention span `[start, end)` over a sentence's tokens, linked to an entity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mention {
    pub start: usize,
    pub end: usize,
    pub entity: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<String>,
    /// Sorted by start, non-overlapping.
    pub mentions: Vec<Mention>,
}

impl Sentence {
    pub fn validate(&self) -> Result<()> {
        let mut prev_end = 0;
        for m in &self.mentions {
            if m.start >= m.end || m.end > self.tokens.len() {
                return Err(Error::Validation(format!(
                    "mention of `{}` spans [{}, {}) in a sentence of {} tokens",
                    m.entity,
                    m.start,
                    m.end,
                    self.tokens.len()
                )));
            }
            if m.start < prev_end {
                return Err(Error::Validation(format!(
                    "mention of `{}` overlaps the previous mention",
                    m.entity
                )));
            }
            prev_end = m.end;
        }
        Ok(())
    }

    /// Inline-markup form, the inverse of [`parse_line`].
    pub fn to_markup(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        let mut mentions = self.mentions.iter().peekable();
        while i < self.tokens.len() {
            match mentions.peek() {
                Some(m) if m.start == i => {
                    parts.push(format!("[[{}|{}]]", m.entity, self.tokens[m.start..m.end].join(" ")));
                    i = m.end;
                    mentions.next();
                }
                _ => {
                    parts.push(self.tokens[i].clone());
                    i += 1;
                }
            }
        }
        parts.join(" ")
    }
}

/// Tokenized sentences with entity-mention spans.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnnotatedCorpus {
    pub sentences: Vec<Sentence>,
}

impl AnnotatedCorpus {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// One sentence per line; mentions inline as `[[entity_id|surface words]]`.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut sentences = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let s = parse_line(line).map_err(|msg| Error::parse(origin, lineno + 1, msg))?;
            sentences.push(s);
        }
        Ok(AnnotatedCorpus { sentences })
    }

    pub fn to_markup(&self) -> String {
        let mut out = String::new();
        for s in &self.sentences {
            out.push_str(&s.to_markup());
            out.push('\n');
        }
        out
    }

    pub fn mention_count(&self) -> usize {
        self.sentences.iter().map(|s| s.mentions.len()).sum()
    }
}

/// Parses one markup line into tokens and mention spans.
pub fn parse_line(line: &str) -> std::result::Result<Sentence, String> {
    let mut s = Sentence::default();
    let mut rest = line;
    while let Some(open) = rest.find("[[") {
        tokenize_into(&rest[..open], &mut s.tokens);
        let after = &rest[open + 2..];
        let close = after.find("]]").ok_or("unterminated `[[` mention")?;
        let inner = &after[..close];
        let (entity, surface) = inner
            .split_once('|')
            .ok_or("mention without `|` between entity id and surface")?;
        let entity = entity.trim();
        if entity.is_empty() {
            return Err("mention with empty entity id".into());
        }
        let start = s.tokens.len();
        tokenize_into(surface, &mut s.tokens);
        if s.tokens.len() == start {
            return Err(format!("mention of `{entity}` has no surface words"));
        }
        s.mentions.push(Mention {
            start,
            end: s.tokens.len(),
            entity: entity.to_string(),
        });
        rest = &after[close + 2..];
    }
    if rest.contains("]]") {
        return Err("`]]` without matching `[[`".into());
    }
    tokenize_into(rest, &mut s.tokens);
    Ok(s)
}

/// Whitespace tokenization with trailing punctuation split into separate tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    tokenize_into(text, &mut out);
    out
}

fn tokenize_into(text: &str, out: &mut Vec<String>) {
    for raw in text.split_whitespace() {
        let body = raw.trim_end_matches(|c: char| c.is_ascii_punctuation());
        if body.is_empty() {
            out.push(raw.to_string());
            continue;
        }
        out.push(body.to_string());
        out.extend(raw[body.len()..].chars().map(String::from));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_trailing_punctuation() {
        assert_eq!(tokenize("Hello, world!).  ..."), ["Hello", ",", "world", "!", ")", ".", "..."]);
        assert_eq!(tokenize("U.S. e-mail"), ["U.S", ".", "e-mail"]);
    }

    #[test]
    fn parses_mentions() {
        let s = parse_line("X visited [[m.05|Paris]] and [[m.06|New York City]].").unwrap();
        assert_eq!(
            s.tokens,
            ["X", "visited", "Paris", "and", "New", "York", "City", "."]
        );
        assert_eq!(s.mentions.len(), 2);
        assert_eq!((s.mentions[1].start, s.mentions[1].end), (4, 7));
        assert_eq!(s.mentions[1].entity, "m.06");
    }

    #[test]
    fn malformed_markup() {
        assert!(parse_line("a [[m.1|b").is_err());
        assert!(parse_line("a [[m.1 b]]").is_err());
        assert!(parse_line("a [[|b]]").is_err());
        assert!(parse_line("a [[m.1| ]]").is_err());
        assert!(parse_line("a ]] b").is_err());
        let err = AnnotatedCorpus::parse("ok\nbad [[x\n", "c").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn markup_round_trip() {
        let text = "X visited [[m.05|Paris]] .\n[[m.1|A B]] [[m.2|C]] d\n";
        let c = AnnotatedCorpus::parse(text, "c").unwrap();
        assert_eq!(c.to_markup(), text);
        for s in &c.sentences {
            s.validate().unwrap();
        }
    }
}
