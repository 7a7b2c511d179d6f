//! Monodromy input grammar shared by flags and batch lines.
//!
//! `--matrix "a,b,c,d"` is the row-major matrix `[[a, b], [c, d]]`.
//! `--word "l1,m1;l2,m2"` is `R^l1 L^m1 R^l2 L^m2`; a leading `-` negates it.

use std::fmt;

use num_bigint::BigInt;
use ptbundle::sl2z::{MatSL2, TwistWord};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Input {
    Matrix(MatSL2),
    Word(TwistWord),
}

impl fmt::Display for Input {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Input::Matrix(m) => write!(f, "matrix {m}"),
            Input::Word(w) => write!(f, "word {w}"),
        }
    }
}

/// Comma-separated integers with their starting character offsets.
fn integers(text: &str) -> Result<Vec<(usize, BigInt)>, CliError> {
    let mut out = Vec::new();
    let mut offset = 0;
    for field in text.split(',') {
        let lead = field.len() - field.trim_start().len();
        let token = field.trim();
        let value = token.parse::<BigInt>().map_err(|_| CliError::Parse {
            position: offset + lead,
            message: if token.is_empty() {
                "expected an integer".to_string()
            } else {
                format!("`{token}` is not an integer")
            },
        })?;
        out.push((offset + lead, value));
        offset += field.len() + 1;
    }
    Ok(out)
}

pub fn parse_matrix(text: &str) -> Result<MatSL2, CliError> {
    let entries = integers(text)?;
    if entries.len() != 4 {
        return Err(CliError::Parse {
            position: text.len(),
            message: format!("expected 4 entries, found {}", entries.len()),
        });
    }
    let [a, b, c, d] = [0, 1, 2, 3].map(|i| entries[i].1.clone());
    Ok(MatSL2::new(a, b, c, d)?)
}

pub fn parse_word(text: &str) -> Result<TwistWord, CliError> {
    let trimmed = text.trim_start();
    let (sign, body, mut offset) = match trimmed.strip_prefix('-') {
        Some(rest) => (-1, rest, text.len() - rest.len()),
        None => (1, trimmed, text.len() - trimmed.len()),
    };
    let mut syllables = Vec::new();
    for group in body.split(';') {
        let pair = integers(group).map_err(|e| e.shifted(offset))?;
        if pair.len() != 2 {
            return Err(CliError::Parse {
                position: offset,
                message: format!("a syllable needs two exponents, found {}", pair.len()),
            });
        }
        let mut exps = [0u64; 2];
        for (slot, (pos, v)) in exps.iter_mut().zip(pair) {
            *slot = u64::try_from(&v).ok().filter(|&e| e > 0).ok_or_else(|| {
                CliError::Domain(ptbundle::Error::InvalidWord(format!(
                    "exponent {v} at position {} is not a positive integer",
                    offset + pos
                )))
            })?;
        }
        syllables.push((exps[0], exps[1]));
        offset += group.len() + 1;
    }
    Ok(TwistWord::new(sign, syllables)?)
}

/// Exactly one of the two inputs must be present.
pub fn parse_input(matrix: Option<&str>, word: Option<&str>) -> Result<Input, CliError> {
    match (matrix, word) {
        (Some(m), None) => parse_matrix(m).map(Input::Matrix),
        (None, Some(w)) => parse_word(w).map(Input::Word),
        (Some(_), Some(_)) => Err(CliError::Usage("give only one of --matrix and --word".into())),
        (None, None) => Err(CliError::Usage("one of --matrix or --word is required".into())),
    }
}

/// Splits a batch line into shell-like tokens: whitespace separated, with
/// single or double quotes grouping.
fn tokens(line: &str) -> Result<Vec<String>, CliError> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut in_token = false;
    let mut quote: Option<(char, usize)> = None;
    for (i, ch) in line.char_indices() {
        match quote {
            Some((q, _)) if ch == q => quote = None,
            Some(_) => cur.push(ch),
            None if ch == '"' || ch == '\'' => {
                quote = Some((ch, i));
                in_token = true;
            }
            None if ch.is_whitespace() => {
                if in_token {
                    out.push(std::mem::take(&mut cur));
                    in_token = false;
                }
            }
            None => {
                cur.push(ch);
                in_token = true;
            }
        }
    }
    if let Some((_, pos)) = quote {
        return Err(CliError::Parse {
            position: pos,
            message: "unterminated quote".into(),
        });
    }
    if in_token {
        out.push(cur);
    }
    Ok(out)
}

/// Parses one batch line, written with the same flags as the command line.
pub fn parse_line(line: &str) -> Result<Input, CliError> {
    let toks = tokens(line)?;
    let mut matrix = None;
    let mut word = None;
    let mut it = toks.iter();
    while let Some(tok) = it.next() {
        let (flag, inline) = match tok.split_once('=') {
            Some((f, v)) if f.starts_with("--") => (f, Some(v.to_string())),
            _ => (tok.as_str(), None),
        };
        let slot = match flag {
            "--matrix" => &mut matrix,
            "--word" => &mut word,
            other => return Err(CliError::Usage(format!("unexpected `{other}` in batch line"))),
        };
        let value = match inline {
            Some(v) => v,
            None => it
                .next()
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("{flag} needs a value")))?,
        };
        if slot.replace(value).is_some() {
            return Err(CliError::Usage(format!("{flag} given twice")));
        }
    }
    parse_input(matrix.as_deref(), word.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_flag() {
        assert_eq!(parse_matrix("2,1,1,1").unwrap(), MatSL2::new(2, 1, 1, 1).unwrap());
        assert_eq!(parse_matrix(" 2, 1 ,1,1").unwrap(), MatSL2::new(2, 1, 1, 1).unwrap());
    }

    #[test]
    fn bad_determinant() {
        let err = parse_matrix("1,0,0,2").unwrap_err();
        assert_eq!(err.kind(), "DeterminantError");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn parse_error_positions() {
        match parse_matrix("2,x,1,1").unwrap_err() {
            CliError::Parse { position, .. } => assert_eq!(position, 2),
            e => panic!("{e:?}"),
        }
        match parse_word("1,1;2,").unwrap_err() {
            CliError::Parse { position, .. } => assert_eq!(position, 6),
            e => panic!("{e:?}"),
        }
        assert!(matches!(parse_matrix("1,2,3"), Err(CliError::Parse { .. })));
    }

    #[test]
    fn word_flag() {
        let w = parse_word("1,1").unwrap();
        assert_eq!(w.syllables(), &[(1, 1)]);
        let w = parse_word("-2,1;1,3").unwrap();
        assert_eq!(w.sign(), -1);
        assert_eq!(w.syllables(), &[(2, 1), (1, 3)]);
    }

    #[test]
    fn nonpositive_syllable() {
        assert_eq!(parse_word("1,0").unwrap_err().kind(), "NonPositiveSyllable");
        assert_eq!(parse_word("1,-2").unwrap_err().kind(), "NonPositiveSyllable");
    }

    #[test]
    fn exactly_one_input() {
        assert!(matches!(parse_input(None, None), Err(CliError::Usage(_))));
        assert!(matches!(parse_input(Some("2,1,1,1"), Some("1,1")), Err(CliError::Usage(_))));
    }

    #[test]
    fn batch_lines() {
        let w = parse_line("--word \"1,1;1,1\"").unwrap();
        assert_eq!(w, Input::Word(parse_word("1,1;1,1").unwrap()));
        let m = parse_line("--matrix=2,1,1,1").unwrap();
        assert_eq!(m, Input::Matrix(MatSL2::new(2, 1, 1, 1).unwrap()));
        assert!(parse_line("--matrix '2,1,1,1").is_err());
        assert!(parse_line("--volume 3").is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn word_text_round_trips(
                negative in any::<bool>(),
                syl in prop::collection::vec((1u64..1000, 1u64..1000), 1..6),
            ) {
                let body: Vec<String> = syl.iter().map(|(l, m)| format!("{l},{m}")).collect();
                let text = format!("{}{}", if negative { "-" } else { "" }, body.join(";"));
                let w = parse_word(&text).unwrap();
                prop_assert_eq!(w.syllables(), syl.as_slice());
                prop_assert_eq!(w.sign(), if negative { -1 } else { 1 });
            }

            #[test]
            fn matrix_text_round_trips(j in -50i64..50, b in 1i64..10_000, k in -50i64..50) {
                // a ≡ d ≡ 1 mod b makes (ad − 1)/b an integer.
                let (a, d) = (j * b + 1, k * b + 1);
                let c = (a * d - 1) / b;
                let m = parse_matrix(&format!("{a},{b},{c},{d}")).unwrap();
                prop_assert_eq!(m, MatSL2::new(a, b, c, d).unwrap());
            }
        }
    }
}
