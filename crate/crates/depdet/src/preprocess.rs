//! Deterministic text cleaning and tokenization.
//!
//! The cleaning pipeline applies four steps in a fixed order: emoji/symbol
//! removal, non-Bangla word removal, punctuation removal, whitespace
//! normalization. Each step is a pure function and the composed pipeline is
//! idempotent.

use serde::{Deserialize, Serialize};
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

/// Which cleaning steps run, in pipeline order.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(default)]
pub struct CleaningConfig {
    pub remove_emojis: bool,
    pub remove_non_bangla: bool,
    pub remove_punctuation: bool,
    pub normalize_whitespace: bool,
}

impl Default for CleaningConfig {
    fn default() -> Self {
        CleaningConfig {
            remove_emojis: true,
            remove_non_bangla: true,
            remove_punctuation: true,
            normalize_whitespace: true,
        }
    }
}

impl CleaningConfig {
    /// True if at least one step is enabled.
    pub fn any_enabled(&self) -> bool {
        self.remove_emojis
            || self.remove_non_bangla
            || self.remove_punctuation
            || self.normalize_whitespace
    }
}

// Emoji is defined by block membership. Variation selectors and ZWJ are
// stripped too so emoji sequences vanish without leaving joiners behind.
const EMOJI_BLOCKS: &[(u32, u32)] = &[
    (0x1F600, 0x1F64F), // Emoticons
    (0x1F300, 0x1F5FF), // Misc Symbols and Pictographs
    (0x1F680, 0x1F6FF), // Transport and Map
    (0x1F900, 0x1F9FF), // Supplemental Symbols and Pictographs
    (0x1FA70, 0x1FAFF), // Symbols and Pictographs Extended-A
    (0x2600, 0x26FF),   // Misc Symbols
    (0x2700, 0x27BF),   // Dingbats
    (0xFE00, 0xFE0F),   // Variation Selectors
    (0x200D, 0x200D),   // Zero Width Joiner
];

fn in_emoji_block(c: char) -> bool {
    let cp = c as u32;
    EMOJI_BLOCKS.iter().any(|&(lo, hi)| cp >= lo && cp <= hi)
}

/// Ornamental/other symbols (category So) outside the emoji blocks, e.g. ۞.
fn is_stray_symbol(c: char) -> bool {
    !in_emoji_block(c) && c.general_category_group() == GeneralCategoryGroup::Symbol && {
        use unicode_properties::GeneralCategory;
        c.general_category() == GeneralCategory::OtherSymbol
    }
}

/// Delete emoji/pictograph code points (and stray So symbols) outright.
pub fn remove_emojis(text: &str) -> String {
    text.chars()
        .filter(|&c| !in_emoji_block(c) && !is_stray_symbol(c))
        .collect()
}

/// A token is dropped when it contains any Basic-Latin letter or digit
/// (covers bare English words, hashtags, and digit-only tokens alike while
/// keeping the pipeline idempotent after punctuation splits). Bangla words
/// and Bangla numerals are kept. Whitespace between kept tokens is preserved
/// as-is; the whitespace step compacts leftovers.
pub fn remove_non_bangla_words(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut token = String::new();
    let flush = |token: &mut String, out: &mut String| {
        if !token.chars().any(|c| c.is_ascii_alphanumeric()) {
            out.push_str(token);
        }
        token.clear();
    };
    for c in text.chars() {
        if c.is_whitespace() {
            flush(&mut token, &mut out);
            out.push(c);
        } else {
            token.push(c);
        }
    }
    flush(&mut token, &mut out);
    out
}

/// Replace punctuation (Unicode category P, including the Bangla danda) and
/// stray So symbols by a single space each.
pub fn remove_punctuation(text: &str) -> String {
    text.chars()
        .map(|c| {
            if c.general_category_group() == GeneralCategoryGroup::Punctuation
                || is_stray_symbol(c)
            {
                ' '
            } else {
                c
            }
        })
        .collect()
}

/// Collapse whitespace runs to single spaces and trim the ends.
pub fn normalize_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_run = false;
    for c in text.chars() {
        if c.is_whitespace() {
            in_run = true;
        } else {
            if in_run && !out.is_empty() {
                out.push(' ');
            }
            in_run = false;
            out.push(c);
        }
    }
    out
}

/// Run the enabled steps in pipeline order.
pub fn clean(text: &str, config: &CleaningConfig) -> String {
    let mut s = text.to_string();
    if config.remove_emojis {
        s = remove_emojis(&s);
    }
    if config.remove_non_bangla {
        s = remove_non_bangla_words(&s);
    }
    if config.remove_punctuation {
        s = remove_punctuation(&s);
    }
    if config.normalize_whitespace {
        s = normalize_whitespace(&s);
    }
    s
}

/// Clean with every step enabled.
pub fn clean_default(text: &str) -> String {
    clean(text, &CleaningConfig::default())
}

/// Split cleaned text on single spaces. Empty tokens never occur on cleaned
/// input; they are filtered anyway so stray input cannot produce them.
pub fn tokenize(text: &str) -> Vec<&str> {
    text.split(' ').filter(|t| !t.is_empty()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn removes_single_emoji() {
        assert_eq!(remove_emojis("ভালো 😀"), "ভালো ");
    }

    #[test]
    fn emoji_free_text_unchanged() {
        let s = "ভালো আছি, and more!";
        assert_eq!(remove_emojis(s), s);
    }

    #[test]
    fn ornamental_symbol_removed() {
        assert_eq!(remove_emojis("۞"), "");
        // also covered by the punctuation step when used standalone
        assert_eq!(remove_punctuation("۞"), " ");
    }

    #[test]
    fn zwj_sequence_fully_removed() {
        // family emoji: man + ZWJ + woman + ZWJ + boy
        let s = "ক\u{1F468}\u{200D}\u{1F469}\u{200D}\u{1F466}খ";
        assert_eq!(remove_emojis(s), "কখ");
    }

    #[test]
    fn latin_token_dropped() {
        assert_eq!(normalize_whitespace(&remove_non_bangla_words("আমি sad আছি")), "আমি আছি");
    }

    #[test]
    fn hashtag_with_latin_dropped_wholesale() {
        assert_eq!(normalize_whitespace(&remove_non_bangla_words("#Jumma ভালো")), "ভালো");
    }

    #[test]
    fn all_bangla_unchanged() {
        let s = "আমি ভালো আছি";
        assert_eq!(remove_non_bangla_words(s), s);
    }

    #[test]
    fn digit_only_token_dropped_bangla_digits_kept() {
        assert_eq!(normalize_whitespace(&remove_non_bangla_words("২০০৯ 2009 ক")), "২০০৯ ক");
    }

    #[test]
    fn punctuation_to_space() {
        assert_eq!(remove_punctuation("ভালো!"), "ভালো ");
        assert_eq!(remove_punctuation("……"), "  ");
        assert_eq!(remove_punctuation("।"), " ");
    }

    #[test]
    fn punctuation_free_unchanged() {
        let s = "ভালো আছি";
        assert_eq!(remove_punctuation(s), s);
    }

    #[test]
    fn whitespace_collapsed() {
        assert_eq!(normalize_whitespace("  ক   খ "), "ক খ");
        assert_eq!(normalize_whitespace("ক খ"), "ক খ");
        assert_eq!(normalize_whitespace("\t\nক"), "ক");
    }

    // The worked pipeline example: noisy greeting -> bare Bangla sentence.
    #[test]
    fn full_pipeline_example() {
        let input = "শুভ সকাল পবিত্র জুম্মার দিন জুম্মা মোবারক ! ۞ সুন্দর হোক সবার জীবন #Jumma";
        let expected = "শুভ সকাল পবিত্র জুম্মার দিন জুম্মা মোবারক সুন্দর হোক সবার জীবন";
        assert_eq!(clean_default(input), expected);
    }

    #[test]
    fn clean_empty_is_empty() {
        assert_eq!(clean_default(""), "");
    }

    #[test]
    fn tokenize_basic() {
        assert_eq!(tokenize("ক খ গ"), vec!["ক", "খ", "গ"]);
        assert!(tokenize("").is_empty());
    }

    proptest! {
        #[test]
        fn clean_is_idempotent(s in "\\PC{0,80}") {
            let once = clean_default(&s);
            prop_assert_eq!(clean_default(&once), once);
        }

        #[test]
        fn clean_output_has_no_removed_classes(s in "\\PC{0,80}") {
            let out = clean_default(&s);
            for c in out.chars() {
                prop_assert!(!in_emoji_block(c), "emoji {c:?} survived");
                prop_assert!(!c.is_ascii_alphabetic(), "latin letter {c:?} survived");
                prop_assert!(
                    c.general_category_group() != GeneralCategoryGroup::Punctuation,
                    "punctuation {c:?} survived"
                );
            }
            prop_assert!(!out.contains("  "), "doubled space survived");
        }

        #[test]
        fn clean_introduces_no_new_chars(s in "\\PC{0,80}") {
            let out = clean_default(&s);
            for c in out.chars() {
                prop_assert!(c == ' ' || s.contains(c), "{c:?} not in input");
            }
        }

        #[test]
        fn tokenize_roundtrips_cleaned_text(s in "\\PC{0,80}") {
            let cleaned = clean_default(&s);
            prop_assert_eq!(tokenize(&cleaned).join(" "), cleaned);
        }

        #[test]
        fn single_steps_are_identity_when_feature_absent(words in proptest::collection::vec("[\\u0995-\\u09A8]{1,6}", 0..6)) {
            // Bangla-letter-only tokens: every individual step keeps them intact.
            let s = words.join(" ");
            prop_assert_eq!(remove_emojis(&s), s.clone());
            prop_assert_eq!(remove_non_bangla_words(&s), s.clone());
            prop_assert_eq!(remove_punctuation(&s), s.clone());
            prop_assert_eq!(normalize_whitespace(&s), s.clone());
        }
    }
}
