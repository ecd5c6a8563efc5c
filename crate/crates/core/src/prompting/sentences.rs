/// Tokens that end in a period without ending a sentence.
const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "st", "jr", "sr", "vs", "mt", "ft", "lt", "col", "gen", "gov", "sgt", "capt",
    "rev", "hon", "e.g", "i.e", "cf", "approx", "fig", "jan", "feb", "aug", "sept", "oct", "nov", "dec",
];

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '”' | '’')
}

/// True when the period at byte `dot` belongs to an abbreviation or an
/// initial rather than ending a sentence.
fn period_is_protected(text: &str, dot: usize) -> bool {
    let word_start = text[..dot]
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_whitespace() || *c == '(' || *c == '"')
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(0);
    let word = &text[word_start..dot];
    if word.is_empty() {
        return false;
    }
    // "S. Hanumantha Rao", "U.S. president": a lone capital before the dot.
    let last_segment = word.rsplit('.').next().unwrap_or(word);
    let mut chars = last_segment.chars();
    if let (Some(c), None) = (chars.next(), chars.next()) {
        if c.is_uppercase() {
            return true;
        }
    }
    let lower = word.to_lowercase();
    ABBREVIATIONS.contains(&lower.as_str())
}

/// Splits text into sentences.
///
/// Boundaries are line breaks and `.`/`?`/`!` (plus any closing quotes or
/// brackets) followed by whitespace. Periods after known abbreviations and
/// single capital initials do not split; a period inside a number never
/// does because it is not followed by whitespace. Returned slices are
/// trimmed substrings of `text`.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut iter = text.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        let boundary_end = if c == '\n' {
            Some(i)
        } else if matches!(c, '.' | '?' | '!') {
            let mut end = i + c.len_utf8();
            // Swallow repeated terminators and closing quotes/brackets.
            while let Some(&(j, d)) = iter.peek() {
                if matches!(d, '.' | '?' | '!') || is_closer(d) {
                    end = j + d.len_utf8();
                    iter.next();
                } else {
                    break;
                }
            }
            let followed_by_space = text[end..].chars().next().is_none_or(char::is_whitespace);
            if followed_by_space && !(c == '.' && end == i + 1 && period_is_protected(text, i)) {
                Some(end)
            } else {
                None
            }
        } else {
            None
        };
        if let Some(end) = boundary_end {
            let piece = text[start..end].trim();
            if !piece.is_empty() {
                out.push(piece);
            }
            start = end;
        }
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        out.push(tail);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn splits_cot_style() {
        let s = split_sentences(
            "First, Antony King worked as house engineer for Simply Red. Second, Simply Red formed in 1985 in Manchester.",
        );
        assert_eq!(
            s,
            vec![
                "First, Antony King worked as house engineer for Simply Red.",
                "Second, Simply Red formed in 1985 in Manchester."
            ]
        );
    }

    #[test]
    fn numbers_and_initials() {
        let s = split_sentences(
            "Second, Rimini is a city of 146,606 inhabitants. Pi is 3.14 roughly. The composer is S. Hanumantha Rao. He lived in the U.S. for years.",
        );
        assert_eq!(
            s,
            vec![
                "Second, Rimini is a city of 146,606 inhabitants.",
                "Pi is 3.14 roughly.",
                "The composer is S. Hanumantha Rao.",
                "He lived in the U.S. for years."
            ]
        );
    }

    #[test]
    fn abbreviations_and_questions() {
        let s = split_sentences("Dr. Who met Mr. Smith. Really? Yes! \"Quoted.\" Done");
        assert_eq!(
            s,
            vec!["Dr. Who met Mr. Smith.", "Really?", "Yes!", "\"Quoted.\"", "Done"]
        );
    }

    #[test]
    fn newlines_split() {
        let s = split_sentences("line one\nline two.\n\nline three");
        assert_eq!(s, vec!["line one", "line two.", "line three"]);
    }

    #[test]
    fn empty_input() {
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("  \n ").is_empty());
    }

    proptest! {
        #[test]
        fn pieces_are_substrings_in_order(text in "[A-Za-z0-9 ,.?!\n]{0,120}") {
            let pieces = split_sentences(&text);
            let mut cursor = 0;
            for p in pieces {
                prop_assert!(!p.is_empty());
                let found = text[cursor..].find(p);
                prop_assert!(found.is_some(), "{:?} not found after {}", p, cursor);
                cursor += found.unwrap() + p.len();
            }
        }
    }
}
