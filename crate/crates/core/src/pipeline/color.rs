use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::PipelineError;

pub const COMPOSITE: &str = "composite";
pub const COLOURFUL: &str = "colourful";

/// Vocabulary used to reduce free-text colour descriptions to a generic
/// colour name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLexicon")]
pub struct ColorLexicon {
    base_colors: BTreeSet<String>,
    modifier_tokens: BTreeSet<String>,
    multi_color_delimiters: Vec<String>,
}

#[derive(Deserialize)]
struct RawLexicon {
    base_colors: BTreeSet<String>,
    modifier_tokens: BTreeSet<String>,
    multi_color_delimiters: Vec<String>,
}

impl TryFrom<RawLexicon> for ColorLexicon {
    type Error = PipelineError;

    fn try_from(raw: RawLexicon) -> Result<Self, Self::Error> {
        ColorLexicon::new(
            raw.base_colors,
            raw.modifier_tokens,
            raw.multi_color_delimiters,
        )
    }
}

impl ColorLexicon {
    pub fn new(
        base_colors: BTreeSet<String>,
        modifier_tokens: BTreeSet<String>,
        multi_color_delimiters: Vec<String>,
    ) -> Result<Self, PipelineError> {
        if base_colors.is_empty() {
            return Err(PipelineError::InvalidLexicon("no base colours".into()));
        }
        if multi_color_delimiters.is_empty() || multi_color_delimiters.iter().any(String::is_empty)
        {
            return Err(PipelineError::InvalidLexicon(
                "delimiters must be non-empty".into(),
            ));
        }
        let lower = |set: BTreeSet<String>| set.into_iter().map(|s| s.to_lowercase()).collect();
        Ok(Self {
            base_colors: lower(base_colors),
            modifier_tokens: lower(modifier_tokens),
            multi_color_delimiters: multi_color_delimiters
                .into_iter()
                .map(|d| d.to_lowercase())
                .collect(),
        })
    }

    pub fn base_colors(&self) -> &BTreeSet<String> {
        &self.base_colors
    }

    pub fn modifier_tokens(&self) -> &BTreeSet<String> {
        &self.modifier_tokens
    }

    pub fn multi_color_delimiters(&self) -> &[String] {
        &self.multi_color_delimiters
    }
}

impl Default for ColorLexicon {
    fn default() -> Self {
        let set = |items: &[&str]| items.iter().map(|s| s.to_string()).collect();
        ColorLexicon::new(
            set(&[
                "grey", "gray", "black", "white", "red", "blue", "green", "pink", "purple",
                "brown", "yellow", "orange", "gold", "silver", "beige",
            ]),
            set(&[
                "dark", "light", "matte", "deep", "pale", "bright", "navy", "rose", "midnight",
                "metallic", "glossy", "space", "sky", "jet",
            ]),
            vec!["/".into(), "&".into(), ",".into(), " and ".into()],
        )
        .expect("default lexicon is valid")
    }
}

/// Reduces a colour description to a generic token.
///
/// Two delimiter-separated segments give `composite`, three or more give
/// `colourful`. A single segment maps to its last base colour once modifier
/// words are dropped; descriptions with no base colour come back lowercased
/// and trimmed.
pub fn normalize_color(raw: &str, lexicon: &ColorLexicon) -> String {
    let lowered = raw.trim().to_lowercase();
    let mut segments = vec![lowered.as_str()];
    for delimiter in &lexicon.multi_color_delimiters {
        segments = segments
            .into_iter()
            .flat_map(|s| s.split(delimiter.as_str()))
            .collect();
    }
    let segments: Vec<&str> = segments
        .into_iter()
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();

    match segments.len() {
        2 => COMPOSITE.to_string(),
        n if n >= 3 => COLOURFUL.to_string(),
        1 => segments[0]
            .split(|c: char| c.is_whitespace() || c == '-')
            .filter(|t| !t.is_empty() && !lexicon.modifier_tokens.contains(*t))
            .rfind(|t| lexicon.base_colors.contains(*t))
            .map_or(lowered.clone(), str::to_string),
        _ => lowered,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn norm(raw: &str) -> String {
        normalize_color(raw, &ColorLexicon::default())
    }

    #[test]
    fn examples() {
        assert_eq!(norm("dark grey"), "grey");
        assert_eq!(norm("black/red"), "composite");
        assert_eq!(norm("red, white & blue"), "colourful");
        assert_eq!(norm("grey"), "grey");
    }

    #[test]
    fn more_shapes() {
        assert_eq!(norm("  Matte Black "), "black");
        assert_eq!(norm("black and white"), "composite");
        assert_eq!(norm("black/mystery"), "composite");
        assert_eq!(norm("Rose Gold"), "gold");
        assert_eq!(norm("Teal"), "teal");
        assert_eq!(norm("Midnight"), "midnight");
        assert_eq!(norm("light-blue"), "blue");
        assert_eq!(norm("red/"), "red");
        assert_eq!(norm("/"), "/");
        assert_eq!(norm("black/grey/white/red"), "colourful");
        // no " and " inside words
        assert_eq!(norm("sandy"), "sandy");
    }

    #[test]
    fn lexicon_validation() {
        let empty = BTreeSet::new();
        assert!(ColorLexicon::new(empty.clone(), empty.clone(), vec!["/".into()]).is_err());
        let one: BTreeSet<String> = ["red".to_string()].into();
        assert!(ColorLexicon::new(one.clone(), empty.clone(), vec![]).is_err());
        assert!(ColorLexicon::new(one, empty, vec!["".into()]).is_err());
    }

    proptest! {
        #[test]
        fn idempotent(raw in "[a-zA-Z /&,-]{1,24}") {
            let once = norm(&raw);
            prop_assert_eq!(norm(&once), once);
        }

        #[test]
        fn idempotent_on_listing_like_text(
            parts in proptest::collection::vec(
                prop_oneof![Just("dark"), Just("grey"), Just("red"), Just("teal"), Just("matte")],
                1..4,
            ),
            delim in prop_oneof![Just(" "), Just("/"), Just(" and "), Just(", ")],
        ) {
            let raw = parts.join(delim);
            let once = norm(&raw);
            prop_assert_eq!(norm(&once), once);
        }
    }
}
