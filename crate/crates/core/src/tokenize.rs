//! Shared tokenizer for collocation counting, lexicon lookup and classifier
//! features.
//!
//! Text is lowercased and split on Unicode whitespace. Leading and trailing
//! punctuation is stripped from every token, except `#` and `@` so hashtags
//! and mentions survive. Emoji are not punctuation and stay inside their
//! token.

/// Tokenize `text` into lowercase tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    tokens(text).collect()
}

/// Lazy form of [`tokenize`].
pub fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace().filter_map(|raw| {
        let trimmed = raw.trim_matches(is_strippable);
        if trimmed.is_empty() {
            None
        } else {
            Some(trimmed.to_lowercase())
        }
    })
}

fn is_strippable(c: char) -> bool {
    if c == '#' || c == '@' {
        return false;
    }
    c.is_ascii_punctuation()
        || ('\u{2000}'..='\u{206F}').contains(&c)
        || ('\u{3000}'..='\u{303F}').contains(&c)
        || matches!(c, '¡' | '¿' | '«' | '»' | '·' | '§' | '¶')
}
