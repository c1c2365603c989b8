use alloc::string::String;
use alloc::vec::Vec;

/// Lowercased maximal runs of alphanumeric characters.
///
/// Both the classifier's word features and the keyword tables are built
/// from this tokenization, so a keyword matches a query exactly when the
/// query contains it as a whole word.
pub(crate) fn word_tokens(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(String::from)
        .collect()
}
