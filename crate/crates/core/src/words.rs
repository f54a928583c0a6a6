//! Words over the fixed alphabet, wrapping, tupling and the canonical codecs.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num::bigint::BigInt;
use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Q;

/// The alphabet.
pub const SIGMA: [char; 5] = ['0', '1', '-', '/', '#'];

pub fn in_sigma(c: char) -> bool {
    SIGMA.contains(&c)
}

/// A finite word over the alphabet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(String);

impl Word {
    pub fn new(s: impl Into<String>) -> Result<Word> {
        let s = s.into();
        match s.chars().find(|c| !in_sigma(*c)) {
            Some(c) => Err(Error::InvalidCode(format!("symbol {c:?} not in alphabet"))),
            None => Ok(Word(s)),
        }
    }

    pub fn empty() -> Word {
        Word(String::new())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, o: &Word) -> Word {
        Word(format!("{}{}", self.0, o.0))
    }

    /// Internal constructor for strings already known to be over the alphabet.
    pub(crate) fn raw(s: String) -> Word {
        debug_assert!(s.chars().all(in_sigma));
        Word(s)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for Word {
    type Err = Error;
    fn from_str(s: &str) -> Result<Word> {
        Word::new(s)
    }
}

impl AsRef<str> for Word {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Wrapping: 11, then 0a for each symbol a, then 011.
pub fn wrap(u: &str) -> Word {
    let mut s = String::with_capacity(2 * u.len() + 5);
    s.push_str("11");
    for c in u.chars() {
        s.push('0');
        s.push(c);
    }
    s.push_str("011");
    Word::raw(s)
}

/// Try to read one wrapped block starting at byte `p`; returns the content and the end.
fn parse_block(b: &[u8], p: usize) -> Option<(String, usize)> {
    if p + 5 > b.len() || b[p] != b'1' || b[p + 1] != b'1' {
        return None;
    }
    let mut j = p + 2;
    let mut out = String::new();
    loop {
        if j + 2 >= b.len() || b[j] != b'0' {
            return None;
        }
        if b[j + 1] == b'1' && b[j + 2] == b'1' {
            return Some((out, j + 3));
        }
        out.push(b[j + 1] as char);
        j += 2;
    }
}

/// Every u whose wrapping occurs in `w`, scanning left to right without overlaps.
pub fn scan_wrapped(w: &str) -> Vec<Word> {
    scan_blocks(w).into_iter().map(|(u, _, _)| u).collect()
}

/// Like `scan_wrapped` but also returns the byte span of each block.
pub fn scan_blocks(w: &str) -> Vec<(Word, usize, usize)> {
    let b = w.as_bytes();
    let mut out = Vec::new();
    let mut p = 0;
    while p + 5 <= b.len() {
        match parse_block(b, p) {
            Some((u, end)) => {
                out.push((Word::raw(u), p, end));
                p = end;
            }
            None => p += 1,
        }
    }
    out
}

/// u is a wrapped subword of w.
pub fn occurs_in(u: &str, w: &str) -> bool {
    scan_wrapped(w).iter().any(|v| v.as_str() == u)
}

/// Concatenated wrappings.
pub fn tuple<S: AsRef<str>>(parts: &[S]) -> Word {
    let mut s = String::new();
    for p in parts {
        s.push_str(wrap(p.as_ref()).as_str());
    }
    Word::raw(s)
}

/// Exactly `n` wrapped blocks spanning the whole word.
pub fn untuple(w: &str, n: usize) -> Option<Vec<Word>> {
    let blocks = untuple_all(w)?;
    (blocks.len() == n).then_some(blocks)
}

/// The word split into consecutive wrapped blocks with nothing in between.
pub fn untuple_all(w: &str) -> Option<Vec<Word>> {
    let b = w.as_bytes();
    let mut p = 0;
    let mut out = Vec::new();
    while p < b.len() {
        let (u, end) = parse_block(b, p)?;
        out.push(Word::raw(u));
        p = end;
    }
    Some(out)
}

/// A prefix-monotone budgeted symbol stream.
#[derive(Clone)]
pub struct WordStream {
    producer: Arc<dyn Fn(usize) -> String + Send + Sync>,
}

impl WordStream {
    pub fn new(f: impl Fn(usize) -> String + Send + Sync + 'static) -> Self {
        WordStream {
            producer: Arc::new(f),
        }
    }

    /// The constant stream aaaa...
    pub fn repeat(a: char) -> Self {
        WordStream::new(move |b| std::iter::repeat_n(a, b).collect())
    }

    /// A finite word followed by nothing.
    pub fn finite(w: Word) -> Self {
        WordStream::new(move |b| w.as_str().chars().take(b).collect())
    }

    /// The first symbols the stream has produced by this budget (at most `budget`).
    pub fn prefix(&self, budget: usize) -> String {
        let mut s = (self.producer)(budget);
        if s.len() > budget {
            s.truncate(budget);
        }
        s
    }
}

impl fmt::Debug for WordStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WordStream({:?}...)", self.prefix(16))
    }
}

/// wrap(u) followed by p.
pub fn tuple_mixed(u: &str, p: &WordStream) -> WordStream {
    let head = wrap(u).as_str().to_string();
    let p = p.clone();
    WordStream::new(move |b| {
        let mut s: String = head.chars().take(b).collect();
        if b > head.len() {
            s.push_str(&p.prefix(b - head.len()));
        }
        s
    })
}

/// p(0) q(0) p(1) q(1) ...
pub fn interleave(p: &WordStream, q: &WordStream) -> WordStream {
    let (p, q) = (p.clone(), q.clone());
    WordStream::new(move |b| {
        let a: Vec<char> = p.prefix(b.div_ceil(2)).chars().collect();
        let c: Vec<char> = q.prefix(b / 2).chars().collect();
        let mut s = String::with_capacity(b);
        for i in 0..b {
            let src = if i % 2 == 0 {
                a.get(i / 2)
            } else {
                c.get(i / 2)
            };
            match src {
                Some(ch) => s.push(*ch),
                None => break,
            }
        }
        s
    })
}

/// Inverse of `interleave` on a finite prefix.
pub fn deinterleave(s: &str) -> (String, String) {
    let mut a = String::new();
    let mut c = String::new();
    for (i, ch) in s.chars().enumerate() {
        if i % 2 == 0 {
            a.push(ch)
        } else {
            c.push(ch)
        }
    }
    (a, c)
}

fn is_numeral(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b == b'0' || b == b'1') && (s == "0" || s.starts_with('1'))
}

pub fn nat_encode(n: &BigInt) -> Word {
    assert!(!n.is_negative(), "natural numbers only");
    Word::raw(n.to_str_radix(2))
}

pub fn nat_encode_u64(n: u64) -> Word {
    Word::raw(format!("{n:b}"))
}

pub fn nat_in_dom(w: &str) -> bool {
    is_numeral(w)
}

pub fn nat_decode(w: &str) -> Result<BigInt> {
    if !is_numeral(w) {
        return Err(Error::InvalidCode(format!("not a binary numeral: {w:?}")));
    }
    Ok(BigInt::parse_bytes(w.as_bytes(), 2).expect("numeral"))
}

pub fn rat_encode(x: &Q) -> Word {
    let sign = if x.is_negative() { "-" } else { "" };
    Word::raw(format!(
        "{sign}{}/{}",
        x.numer().abs().to_str_radix(2),
        x.denom().to_str_radix(2)
    ))
}

pub fn rat_decode(w: &str) -> Result<Q> {
    let bad = |why: &str| Error::InvalidCode(format!("{why}: {w:?}"));
    let (neg, body) = match w.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, w),
    };
    let (n, d) = body.split_once('/').ok_or_else(|| bad("missing '/'"))?;
    if !is_numeral(n) || !is_numeral(d) {
        return Err(bad("malformed numeral"));
    }
    let n = BigInt::parse_bytes(n.as_bytes(), 2).expect("numeral");
    let d = BigInt::parse_bytes(d.as_bytes(), 2).expect("numeral");
    if d.is_zero() {
        return Err(bad("zero denominator"));
    }
    if neg && n.is_zero() {
        return Err(bad("negative zero"));
    }
    if !num::Integer::gcd(&n, &d).is_one() {
        return Err(bad("not in lowest terms"));
    }
    let v = Q::new(n, d);
    Ok(if neg { -v } else { v })
}

pub fn rat_in_dom(w: &str) -> bool {
    rat_decode(w).is_ok()
}

/// How a finite set of base elements is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flavor {
    Union,
    Intersection,
}

/// Code of a finite set of member words.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FsCode {
    pub word: Word,
    pub flavor: Flavor,
}

impl FsCode {
    /// True when the code denotes the empty family (the whole space for intersections,
    /// the empty set for unions).
    pub fn is_empty_family(&self) -> bool {
        scan_wrapped(self.word.as_str()).is_empty()
    }
}

pub fn fs_encode<S: AsRef<str>>(
    members: &[S],
    flavor: Flavor,
    dom: &dyn Fn(&str) -> bool,
) -> Result<FsCode> {
    let mut seen = BTreeSet::new();
    let mut s = String::new();
    for m in members {
        let m = m.as_ref();
        if !m.chars().all(in_sigma) || !dom(m) {
            return Err(Error::InvalidCode(format!("member outside domain: {m:?}")));
        }
        if seen.insert(m.to_string()) {
            s.push_str(wrap(m).as_str());
        }
    }
    Ok(FsCode {
        word: Word::raw(s),
        flavor,
    })
}

pub fn fs_members(w: &str) -> Vec<Word> {
    let mut seen = BTreeSet::new();
    scan_wrapped(w)
        .into_iter()
        .filter(|u| seen.insert(u.clone()))
        .collect()
}

pub fn fs_decode(c: &FsCode, dom: &dyn Fn(&str) -> bool) -> Result<BTreeSet<Word>> {
    let mut out = BTreeSet::new();
    for u in scan_wrapped(c.word.as_str()) {
        if !dom(u.as_str()) {
            return Err(Error::InvalidCode(format!("member outside domain: {u}")));
        }
        out.insert(u);
    }
    Ok(out)
}

pub fn fs_in_dom(w: &str, dom: &dyn Fn(&str) -> bool) -> bool {
    scan_wrapped(w).iter().all(|u| dom(u.as_str()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap("1").as_str(), "1101011");
        assert_eq!(wrap("01").as_str(), "110001011");
        assert_eq!(wrap("").as_str(), "11011");
    }

    #[test]
    fn scan_examples() {
        assert_eq!(scan_wrapped("1101011"), vec![Word::raw("1".into())]);
        let w = format!("0{}0{}", wrap("1"), wrap("01"));
        let got: Vec<String> = scan_wrapped(&w).iter().map(|u| u.to_string()).collect();
        assert_eq!(got, vec!["1", "01"]);
        assert!(scan_wrapped("10101").is_empty());
    }

    #[test]
    fn tuple_examples() {
        assert_eq!(
            tuple(&["1", "0"]).as_str(),
            format!("{}{}", wrap("1"), wrap("0"))
        );
        let p = interleave(&WordStream::repeat('0'), &WordStream::repeat('1'));
        assert_eq!(p.prefix(6), "010101");
        let m = tuple_mixed("1", &WordStream::repeat('0'));
        assert_eq!(m.prefix(10), "1101011000");
        assert_eq!(m.prefix(3), "110");
        assert_eq!(
            untuple(tuple(&["1", "", "-1/1"]).as_str(), 3).unwrap()[2].as_str(),
            "-1/1"
        );
    }

    #[test]
    fn nat_examples() {
        assert_eq!(nat_encode_u64(5).as_str(), "101");
        assert_eq!(nat_encode_u64(0).as_str(), "0");
        assert!(nat_decode("01").is_err());
        assert_eq!(nat_decode("101").unwrap(), BigInt::from(5));
    }

    #[test]
    fn rat_examples() {
        assert_eq!(rat_encode(&q(1, 2)).as_str(), "1/10");
        assert_eq!(rat_encode(&qi(-3)).as_str(), "-11/1");
        assert_eq!(rat_encode(&qi(0)).as_str(), "0/1");
        assert!(rat_decode("10/100").is_err());
        assert!(rat_decode("1/0").is_err());
        assert!(rat_decode("-0/1").is_err());
        assert!(rat_decode("1/").is_err());
        assert_eq!(rat_decode("-11/1").unwrap(), qi(-3));
    }

    #[test]
    fn fs_examples() {
        let any = |_: &str| true;
        assert!(fs_encode(&["u1"], Flavor::Union, &any).is_err());
        let c = fs_encode(&["1"], Flavor::Union, &any).unwrap();
        assert_eq!(
            fs_decode(&c, &any).unwrap().into_iter().collect::<Vec<_>>(),
            vec![Word::raw("1".into())]
        );
        let top = fs_encode::<&str>(&[], Flavor::Intersection, &any).unwrap();
        assert!(top.is_empty_family() && top.word.is_empty());
        let bot = fs_encode::<&str>(&[], Flavor::Union, &any).unwrap();
        assert!(bot.is_empty_family());
        assert!(fs_encode(&["10"], Flavor::Union, &nat_in_dom).is_ok());
        assert!(fs_encode(&["01"], Flavor::Union, &nat_in_dom).is_err());
    }
}
