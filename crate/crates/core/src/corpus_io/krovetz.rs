//! Dictionary-light approximation of the Krovetz inflectional stemmer.
//!
//! Krovetz stems conservatively: it strips plural, past-tense and progressive endings and a
//! handful of derivational `-ion` endings, and consults a lexicon to decide which candidate
//! stem is a real word. Without the full dictionary we recode stems with Porter-style
//! shape rules (undoubling, restoring a silent `e`) and keep a small exception lexicon for
//! words the shape rules would mangle.
//!
//! The cascade is applied until it reaches a fixed point, so `stem(stem(w)) == stem(w)`.

/// Words mapped to a fixed stem. Every target must itself be a fixed point of the cascade.
const IRREGULAR: &[(&str, &str)] = &[
    ("children", "child"),
    ("feet", "foot"),
    ("geese", "goose"),
    ("goes", "go"),
    ("information", "inform"),
    ("men", "man"),
    ("mice", "mouse"),
    ("teeth", "tooth"),
    ("women", "woman"),
];

/// Words left untouched even though a suffix rule would fire.
const PROTECTED: &[&str] = &[
    "always", "atlas", "bias", "bleed", "breed", "canvas", "christmas", "creed", "economics",
    "embed", "feed", "freed", "greed", "heed", "hundred", "kindred", "lens", "mathematics",
    "naked", "news", "perhaps", "physics", "politics", "sacred", "seed", "series", "species",
    "speed", "steed", "thus", "tweed", "weed", "wicked",
];

/// Stem a single lowercase token.
///
/// Tokens that are not purely ASCII lowercase letters, or that are three characters or
/// shorter, are returned unchanged.
pub fn stem(word: &str) -> String {
    let mut current = word.to_string();
    // Every rule shortens the word, so the loop terminates well before the bound.
    for _ in 0..16 {
        let next = stem_once(&current);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

fn stem_once(word: &str) -> String {
    if let Some(target) = lookup_irregular(word) {
        return target.to_string();
    }
    if word.len() <= 3 || !word.bytes().all(|b| b.is_ascii_lowercase()) || is_protected(word) {
        return word.to_string();
    }
    let mut w = plural(word);
    for rule in [past_tense as fn(&str) -> String, progressive, ion] {
        if is_protected(&w) || lookup_irregular(&w).is_some() {
            break;
        }
        w = rule(&w);
    }
    w
}

fn lookup_irregular(word: &str) -> Option<&'static str> {
    IRREGULAR
        .iter()
        .find(|(from, _)| *from == word)
        .map(|(_, to)| *to)
}

fn is_protected(word: &str) -> bool {
    PROTECTED.binary_search(&word).is_ok()
}

fn is_consonant(w: &[u8], i: usize) -> bool {
    match w[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => false,
        b'y' => i == 0 || !is_consonant(w, i - 1),
        _ => true,
    }
}

fn has_vowel(stem: &str) -> bool {
    let w = stem.as_bytes();
    (0..w.len()).any(|i| !is_consonant(w, i))
}

/// Number of vowel-consonant sequences, Porter's `m`.
fn measure(stem: &str) -> usize {
    let w = stem.as_bytes();
    let mut m = 0;
    let mut prev_vowel = false;
    for i in 0..w.len() {
        let vowel = !is_consonant(w, i);
        if prev_vowel && !vowel {
            m += 1;
        }
        prev_vowel = vowel;
    }
    m
}

fn ends_cvc(stem: &str) -> bool {
    let w = stem.as_bytes();
    let n = w.len();
    n >= 3
        && is_consonant(w, n - 3)
        && !is_consonant(w, n - 2)
        && is_consonant(w, n - 1)
        && !matches!(w[n - 1], b'w' | b'x' | b'y')
}

fn ends_double_consonant(stem: &str) -> bool {
    let w = stem.as_bytes();
    let n = w.len();
    n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1)
}

/// Repair a stem left behind by removing `-ed` or `-ing`.
fn recode(stem: &str) -> String {
    if stem.ends_with("at") || stem.ends_with("bl") || stem.ends_with("iz") {
        return format!("{stem}e");
    }
    if ends_double_consonant(stem) && !matches!(stem.as_bytes()[stem.len() - 1], b'l' | b's' | b'z') {
        return stem[..stem.len() - 1].to_string();
    }
    if measure(stem) == 1 && ends_cvc(stem) {
        return format!("{stem}e");
    }
    stem.to_string()
}

fn plural(w: &str) -> String {
    if let Some(base) = w.strip_suffix("ies") {
        return if w.len() > 4 {
            format!("{base}y")
        } else {
            format!("{base}ie")
        };
    }
    if w.ends_with("es") {
        let base = &w[..w.len() - 2];
        if ["sses", "xes", "ches", "shes", "zzes"].iter().any(|s| w.ends_with(s))
            || (w.ends_with("oes") && w.len() > 4)
        {
            return base.to_string();
        }
        return w[..w.len() - 1].to_string();
    }
    if w.ends_with('s') && !(w.ends_with("ss") || w.ends_with("us") || w.ends_with("is")) {
        return w[..w.len() - 1].to_string();
    }
    w.to_string()
}

fn past_tense(w: &str) -> String {
    if let Some(base) = w.strip_suffix("ied") {
        return if w.len() > 4 {
            format!("{base}y")
        } else {
            format!("{base}ie")
        };
    }
    if w.ends_with("eed") {
        return if w.len() > 5 {
            w[..w.len() - 1].to_string()
        } else {
            w.to_string()
        };
    }
    match w.strip_suffix("ed") {
        Some(stem) if stem.len() >= 3 && has_vowel(stem) => recode(stem),
        _ => w.to_string(),
    }
}

fn progressive(w: &str) -> String {
    match w.strip_suffix("ing") {
        Some(stem) if stem.len() >= 3 && has_vowel(stem) => recode(stem),
        _ => w.to_string(),
    }
}

fn ion(w: &str) -> String {
    if let Some(base) = w.strip_suffix("ization") {
        if base.len() >= 3 {
            return format!("{base}ize");
        }
    }
    if let Some(base) = w.strip_suffix("ation") {
        if base.len() >= 3 {
            return format!("{base}ate");
        }
    }
    if w.ends_with("ction") && w.len() >= 6 {
        return w[..w.len() - 3].to_string();
    }
    w.to_string()
}
