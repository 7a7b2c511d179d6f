#![allow(dead_code)]

use ptbundle::sl2z::TwistWord;

/// Every syllable list with total exponent between 2 and `max`.
pub fn syllable_lists(max: u64) -> Vec<Vec<(u64, u64)>> {
    fn extend(prefix: &mut Vec<(u64, u64)>, left: u64, out: &mut Vec<Vec<(u64, u64)>>) {
        for l in 1..left {
            for m in 1..=left - l {
                prefix.push((l, m));
                out.push(prefix.clone());
                extend(prefix, left - l - m, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), max, &mut out);
    out
}

pub fn positive_words(max: u64) -> Vec<TwistWord> {
    syllable_lists(max)
        .into_iter()
        .map(|s| TwistWord::positive(s).unwrap())
        .collect()
}
