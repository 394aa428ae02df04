use std::fmt;

use crate::corpus_io::{Origin, SentencePair};
use crate::error::{Error, Result};
use crate::translit::TranslitLabel;

/// A hint token. Surface form is `<...>` and a tagged sentence is
/// `tag + " " + sentence`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    Bin(usize),
    Bt,
    Translit(TranslitLabel),
}

impl Tag {
    /// Quality-bin and BT tags share the leading slot on the source side.
    pub fn is_origin_slot(self) -> bool {
        matches!(self, Tag::Bin(_) | Tag::Bt)
    }

    pub fn parse(token: &str) -> Option<Tag> {
        let inner = token.strip_prefix('<')?.strip_suffix('>')?;
        match inner {
            "BT" => Some(Tag::Bt),
            "Txn" => Some(Tag::Translit(TranslitLabel::Txn)),
            "Both" => Some(Tag::Translit(TranslitLabel::Both)),
            _ => {
                let digits = inner.strip_prefix("bin")?;
                if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit()) {
                    return None;
                }
                digits.parse().ok().map(Tag::Bin)
            }
        }
    }

    /// Splits one leading tag off `text` when it is followed by a space.
    pub fn split_leading(text: &str) -> Option<(Tag, &str)> {
        let (token, rest) = text.split_once(' ')?;
        Tag::parse(token).map(|tag| (tag, rest))
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Bin(j) => write!(f, "<bin{j}>"),
            Tag::Bt => f.write_str("<BT>"),
            Tag::Translit(label) => write!(f, "<{label}>"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Source,
    Target,
}

/// Tags at the start of `text`, outermost first, and the untagged rest.
pub fn leading_tags(mut text: &str) -> (Vec<Tag>, &str) {
    let mut tags = Vec::new();
    while let Some((tag, rest)) = Tag::split_leading(text) {
        tags.push(tag);
        text = rest;
    }
    (tags, text)
}

fn prepend(tag: Tag, text: &str) -> String {
    format!("{tag} {text}")
}

fn check_origin_slot_free(source: &str) -> Result<()> {
    let (tags, _) = leading_tags(source);
    match tags.iter().find(|t| t.is_origin_slot()) {
        Some(t) => Err(Error::AlreadyTagged(t.to_string())),
        None => Ok(()),
    }
}

pub fn apply_quality_tag(pair: &SentencePair, bin: usize, k: usize) -> Result<SentencePair> {
    if bin == 0 || bin > k {
        return Err(Error::BinOutOfRange { bin, k });
    }
    check_origin_slot_free(&pair.source)?;
    Ok(SentencePair {
        source: prepend(Tag::Bin(bin), &pair.source),
        ..pair.clone()
    })
}

pub fn apply_bt_tag(pair: &SentencePair) -> Result<SentencePair> {
    if pair.origin != Origin::Bt {
        return Err(Error::NotBtOrigin(pair.id));
    }
    check_origin_slot_free(&pair.source)?;
    Ok(SentencePair {
        source: prepend(Tag::Bt, &pair.source),
        ..pair.clone()
    })
}

/// On the source side the translit tag goes after any quality or BT tag, so
/// the result always reads `<binJ> <Txn> text`.
pub fn apply_translit_tag(pair: &SentencePair, label: TranslitLabel, side: Side) -> Result<SentencePair> {
    let tag = Tag::Translit(label);
    let text = match side {
        Side::Source => &pair.source,
        Side::Target => &pair.target,
    };
    let (tags, _) = leading_tags(text);
    if let Some(t) = tags.iter().find(|t| matches!(t, Tag::Translit(_))) {
        return Err(Error::AlreadyTagged(t.to_string()));
    }
    let tagged = match (side, tags.first()) {
        (Side::Source, Some(&first)) if first.is_origin_slot() => {
            let (_, rest) = Tag::split_leading(text).expect("tag just parsed");
            format!("{first} {}", prepend(tag, rest))
        }
        _ => prepend(tag, text),
    };
    let mut out = pair.clone();
    match side {
        Side::Source => out.source = tagged,
        Side::Target => out.target = tagged,
    }
    Ok(out)
}

/// Removes every leading tag from both sides.
pub fn strip_tags(pair: &SentencePair) -> SentencePair {
    SentencePair {
        source: leading_tags(&pair.source).1.to_owned(),
        target: leading_tags(&pair.target).1.to_owned(),
        ..pair.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(origin: Origin) -> SentencePair {
        SentencePair::new(3, "hello", "world", origin)
    }

    #[test]
    fn quality_tag_surface() {
        assert_eq!(apply_quality_tag(&pair(Origin::Bt), 4, 4).unwrap().source, "<bin4> hello");
        assert_eq!(apply_quality_tag(&pair(Origin::Bt), 1, 4).unwrap().source, "<bin1> hello");
        assert!(matches!(apply_quality_tag(&pair(Origin::Bt), 5, 4), Err(Error::BinOutOfRange { bin: 5, k: 4 })));
        assert!(matches!(apply_quality_tag(&pair(Origin::Bt), 0, 4), Err(Error::BinOutOfRange { .. })));
    }

    #[test]
    fn bt_tag_rules() {
        let tagged = apply_bt_tag(&pair(Origin::Bt)).unwrap();
        assert_eq!(tagged.source, "<BT> hello");
        assert!(matches!(apply_bt_tag(&pair(Origin::Bitext)), Err(Error::NotBtOrigin(3))));
        assert!(matches!(apply_bt_tag(&tagged), Err(Error::AlreadyTagged(_))));
        assert!(matches!(apply_quality_tag(&tagged, 1, 4), Err(Error::AlreadyTagged(_))));
    }

    #[test]
    fn translit_tag_sides() {
        let p = pair(Origin::Bitext);
        assert_eq!(apply_translit_tag(&p, TranslitLabel::Both, Side::Target).unwrap().target, "<Both> world");
        assert_eq!(apply_translit_tag(&p, TranslitLabel::Txn, Side::Source).unwrap().source, "<Txn> hello");
        let q = apply_quality_tag(&p, 2, 4).unwrap();
        let both = apply_translit_tag(&q, TranslitLabel::Txn, Side::Source).unwrap();
        assert_eq!(both.source, "<bin2> <Txn> hello");
        assert!(matches!(
            apply_translit_tag(&both, TranslitLabel::Both, Side::Source),
            Err(Error::AlreadyTagged(_))
        ));
        // quality after translit lands in the same canonical order
        let t = apply_translit_tag(&p, TranslitLabel::Txn, Side::Source).unwrap();
        assert_eq!(apply_quality_tag(&t, 2, 4).unwrap().source, "<bin2> <Txn> hello");
        assert_eq!(strip_tags(&both), p);
    }

    #[test]
    fn parse_rejects_near_misses() {
        assert_eq!(Tag::parse("<bin12>"), Some(Tag::Bin(12)));
        for bad in ["<bin0>", "<bin>", "<bin01>", "<bin 1>", "<bt>", "bin1", "<Txn"] {
            assert_eq!(Tag::parse(bad), None, "{bad}");
        }
    }
}
