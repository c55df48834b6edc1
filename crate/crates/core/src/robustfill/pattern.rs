use super::{Pattern, RegexClass};

/// Half-open byte range `[start, end)` of a match.
pub type Span = (usize, usize);

fn is_member(class: RegexClass, b: u8) -> bool {
    match class {
        RegexClass::Number | RegexClass::Digit => b.is_ascii_digit(),
        RegexClass::Word => b.is_ascii_alphabetic(),
        RegexClass::Alphanum => b.is_ascii_alphanumeric(),
        RegexClass::AllCaps => b.is_ascii_uppercase(),
        RegexClass::Lower => b.is_ascii_lowercase(),
        RegexClass::Char => true,
        // handled separately
        RegexClass::PropCase => false,
    }
}

/// Non-overlapping, leftmost, maximal matches of `pattern` in `text`.
///
/// Classes: `NUMBER=[0-9]+`, `WORD=[A-Za-z]+`, `ALPHANUM=[A-Za-z0-9]+`,
/// `ALL_CAPS=[A-Z]+`, `PROP_CASE=[A-Z][a-z]+`, `LOWER=[a-z]+`, `DIGIT=[0-9]`,
/// `CHAR=.`; a delimiter matches itself.
pub fn matches(pattern: Pattern, text: &str) -> Vec<Span> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    match pattern {
        Pattern::Delimiter(c) => {
            let mut buf = [0u8; 4];
            let needle = c.encode_utf8(&mut buf).as_bytes();
            if needle.len() == 1 {
                out.extend(
                    bytes
                        .iter()
                        .enumerate()
                        .filter(|(_, &b)| b == needle[0])
                        .map(|(i, _)| (i, i + 1)),
                );
            }
        }
        Pattern::Class(RegexClass::Digit) | Pattern::Class(RegexClass::Char) => {
            let class = match pattern {
                Pattern::Class(c) => c,
                _ => unreachable!(),
            };
            out.extend(
                bytes
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| is_member(class, b))
                    .map(|(i, _)| (i, i + 1)),
            );
        }
        Pattern::Class(RegexClass::PropCase) => {
            let mut i = 0;
            while i < bytes.len() {
                if bytes[i].is_ascii_uppercase() {
                    let mut j = i + 1;
                    while j < bytes.len() && bytes[j].is_ascii_lowercase() {
                        j += 1;
                    }
                    if j > i + 1 {
                        out.push((i, j));
                        i = j;
                        continue;
                    }
                }
                i += 1;
            }
        }
        Pattern::Class(class) => {
            let mut i = 0;
            while i < bytes.len() {
                if is_member(class, bytes[i]) {
                    let mut j = i + 1;
                    while j < bytes.len() && is_member(class, bytes[j]) {
                        j += 1;
                    }
                    out.push((i, j));
                    i = j;
                } else {
                    i += 1;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_runs() {
        assert_eq!(
            matches(Pattern::Class(RegexClass::Number), "ab12cd3"),
            vec![(2, 4), (6, 7)]
        );
    }

    #[test]
    fn word_on_empty() {
        assert!(matches(Pattern::Class(RegexClass::Word), "").is_empty());
    }

    #[test]
    fn delimiter_literal() {
        assert_eq!(
            matches(Pattern::Delimiter(','), "a,b,c"),
            vec![(1, 2), (3, 4)]
        );
    }

    #[test]
    fn prop_case_needs_lowercase_tail() {
        let text = "ABc De F";
        assert_eq!(
            matches(Pattern::Class(RegexClass::PropCase), text),
            vec![(1, 3), (4, 6)]
        );
    }

    #[test]
    fn digits_and_chars_are_single() {
        assert_eq!(
            matches(Pattern::Class(RegexClass::Digit), "a12"),
            vec![(1, 2), (2, 3)]
        );
        assert_eq!(matches(Pattern::Class(RegexClass::Char), "ab").len(), 2);
    }

    #[test]
    fn all_caps_and_lower() {
        assert_eq!(
            matches(Pattern::Class(RegexClass::AllCaps), "ABcD"),
            vec![(0, 2), (3, 4)]
        );
        assert_eq!(
            matches(Pattern::Class(RegexClass::Lower), "ABcD e"),
            vec![(2, 3), (5, 6)]
        );
        assert_eq!(
            matches(Pattern::Class(RegexClass::Alphanum), "a1 b,2"),
            vec![(0, 2), (3, 4), (5, 6)]
        );
    }
}
