//! Grammar for reported quantities: plain decimals, `a × 10^{b}` and `aE±b`
//! scientific notation, `x ± e` errors, `x – y` / `x to y` ranges, followed by a
//! unit run.

use thiserror::Error;

use crate::record::ParsedValue;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("no parseable number in {surface:?}")]
pub struct ParseFailure {
    pub surface: String,
}

const QUALIFIERS: &[&str] = &[
    "approximately",
    "around",
    "about",
    "nearly",
    "up to",
    "over",
    "above",
    "below",
    "ca.",
    "ca",
    "~",
    "≈",
    "∼",
    "<",
    ">",
    "≤",
    "≥",
    "=",
];

/// Parses a number at `pos`, returning its value and the position after it.
/// Scientific forms are rebuilt as an `e`-notation string so the result is the
/// correctly rounded value of the written decimal.
pub(crate) fn number_at(chars: &[char], pos: usize) -> Option<(f64, usize)> {
    let mut i = pos;
    let mut lit = String::new();
    if matches!(chars.get(i), Some('-' | '+')) {
        if chars[i] == '-' {
            lit.push('-');
        }
        i += 1;
    }
    // bare power of ten: 10^{b}
    if let Some((exp, end)) = power_of_ten(chars, i) {
        lit.push_str("1e");
        lit.push_str(&exp.to_string());
        return lit.parse().ok().map(|v| (v, end));
    }
    let digits_start = i;
    while i < chars.len() && chars[i].is_ascii_digit() {
        lit.push(chars[i]);
        i += 1;
        // thousands separators: 10,000
        if chars.get(i) == Some(&',')
            && chars.get(i + 1..i + 4).is_some_and(|g| g.iter().all(char::is_ascii_digit))
            && !chars.get(i + 4).is_some_and(char::is_ascii_digit)
        {
            i += 1;
        }
    }
    let int_digits = i > digits_start;
    let mut frac_digits = false;
    if chars.get(i) == Some(&'.') && chars.get(i + 1).is_some_and(char::is_ascii_digit) {
        lit.push('.');
        i += 1;
        while i < chars.len() && chars[i].is_ascii_digit() {
            lit.push(chars[i]);
            i += 1;
            frac_digits = true;
        }
    }
    if !int_digits && !frac_digits {
        return None;
    }
    let mut exponent: i64 = 0;
    if matches!(chars.get(i), Some('e' | 'E')) {
        let mut k = i + 1;
        let neg = match chars.get(k) {
            Some('-') => {
                k += 1;
                true
            }
            Some('+') => {
                k += 1;
                false
            }
            _ => false,
        };
        let start = k;
        while k < chars.len() && chars[k].is_ascii_digit() {
            k += 1;
        }
        if k > start && !chars.get(k).is_some_and(|c| c.is_alphabetic()) {
            let e: i64 = chars[start..k].iter().collect::<String>().parse().ok()?;
            exponent += if neg { -e } else { e };
            i = k;
        }
    }
    // a × 10^{b}
    let mut k = skip_spaces(chars, i);
    if matches!(chars.get(k), Some('×' | 'x' | 'X' | '*' | '·')) {
        k = skip_spaces(chars, k + 1);
        if let Some((e, end)) = power_of_ten(chars, k) {
            exponent += e;
            i = end;
        }
    }
    if exponent != 0 {
        lit.push('e');
        lit.push_str(&exponent.to_string());
    }
    lit.parse().ok().map(|v| (v, i))
}

fn skip_spaces(chars: &[char], mut i: usize) -> usize {
    while chars.get(i).is_some_and(|c| *c == ' ') {
        i += 1;
    }
    i
}

/// `10^{b}`, `10^b` or `10^{ b }` starting at `i`.
fn power_of_ten(chars: &[char], i: usize) -> Option<(i64, usize)> {
    if chars.get(i..i + 2) != Some(&['1', '0']) {
        return None;
    }
    let mut k = skip_spaces(chars, i + 2);
    if chars.get(k) != Some(&'^') {
        return None;
    }
    k += 1;
    let braced = chars.get(k) == Some(&'{');
    if braced {
        k = skip_spaces(chars, k + 1);
    }
    let start = k;
    if matches!(chars.get(k), Some('-' | '+')) {
        k += 1;
    }
    let digits = k;
    while k < chars.len() && chars[k].is_ascii_digit() {
        k += 1;
    }
    if k == digits {
        return None;
    }
    let e: i64 = chars[start..k].iter().collect::<String>().trim_start_matches('+').parse().ok()?;
    if braced {
        k = skip_spaces(chars, k);
        if chars.get(k) != Some(&'}') {
            return None;
        }
        k += 1;
    }
    Some((e, k))
}

fn skip_ws(chars: &[char], mut i: usize) -> usize {
    while chars.get(i).is_some_and(|c| c.is_whitespace()) {
        i += 1;
    }
    i
}

fn starts_with_word(chars: &[char], i: usize, word: &str) -> Option<usize> {
    let w: Vec<char> = word.chars().collect();
    let slice = chars.get(i..i + w.len())?;
    let matches = slice.iter().zip(&w).all(|(a, b)| a.to_lowercase().eq(b.to_lowercase()));
    let boundary =
        !w.last().is_some_and(|c| c.is_alphabetic()) || !chars.get(i + w.len()).is_some_and(|c| c.is_alphanumeric());
    (matches && boundary).then_some(i + w.len())
}

/// The numeric part of a quantity: value, optional error, optional range.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct NumericPart {
    pub lo: f64,
    pub hi: Option<f64>,
    pub error: Option<f64>,
    pub end: usize,
}

fn error_at(chars: &[char], i: usize) -> Option<(f64, usize)> {
    let k = skip_ws(chars, i);
    let after = if chars.get(k) == Some(&'±') {
        k + 1
    } else if chars.get(k..k + 3) == Some(&['+', '/', '-']) {
        k + 3
    } else {
        return None;
    };
    let k = skip_ws(chars, after);
    let (e, end) = number_at(chars, k)?;
    (e >= 0.0).then_some((e, end))
}

fn range_end_at(chars: &[char], i: usize) -> Option<(f64, usize)> {
    let k = skip_ws(chars, i);
    let after = match chars.get(k) {
        Some('-' | '–' | '—' | '~') => k + 1,
        _ => starts_with_word(chars, k, "to")?,
    };
    let k = skip_ws(chars, after);
    number_at(chars, k)
}

/// `(x ± e) × 10^{b}`: the multiplier applies to every number in the group.
fn grouped_part(chars: &[char], pos: usize) -> Option<NumericPart> {
    if chars.get(pos) != Some(&'(') {
        return None;
    }
    let inner = numeric_part(chars, skip_ws(chars, pos + 1))?;
    let k = skip_ws(chars, inner.end);
    if chars.get(k) != Some(&')') {
        return None;
    }
    let mut end = k + 1;
    let mut exp = 0;
    let m = skip_spaces(chars, end);
    if matches!(chars.get(m), Some('×' | 'x' | 'X' | '*' | '·')) {
        if let Some((e, k)) = power_of_ten(chars, skip_spaces(chars, m + 1)) {
            exp = e;
            end = k;
        }
    }
    let scale = |v: f64| if exp == 0 { v } else { format!("{v}e{exp}").parse().unwrap_or(v * 10f64.powi(exp as i32)) };
    Some(NumericPart { lo: scale(inner.lo), hi: inner.hi.map(scale), error: inner.error.map(scale), end })
}

pub(crate) fn numeric_part(chars: &[char], pos: usize) -> Option<NumericPart> {
    if let Some(part) = grouped_part(chars, pos) {
        return Some(part);
    }
    let (lo, mut end) = number_at(chars, pos)?;
    let mut part = NumericPart { lo, hi: None, error: None, end };
    if let Some((e, k)) = error_at(chars, end) {
        part.error = Some(e);
        end = k;
    }
    if let Some((hi, k)) = range_end_at(chars, end) {
        part.hi = Some(hi);
        end = k;
        if part.error.is_none() {
            if let Some((e, k)) = error_at(chars, end) {
                part.error = Some(e);
                end = k;
            }
        }
    }
    part.end = end;
    Some(part)
}

fn skip_qualifiers(chars: &[char], mut i: usize) -> usize {
    loop {
        i = skip_ws(chars, i);
        match QUALIFIERS.iter().find_map(|q| starts_with_word(chars, i, q)) {
            Some(k) => i = k,
            None => return i,
        }
    }
}

/// Parses a PROPERTY_VALUE (or MATERIAL_AMOUNT) surface. Unit conversion is
/// left to the unit registry.
pub fn parse_property_value(surface: &str) -> Result<ParsedValue, ParseFailure> {
    let chars: Vec<char> = surface.chars().collect();
    let fail = || ParseFailure { surface: surface.to_string() };
    let start = skip_qualifiers(&chars, 0);
    let part = numeric_part(&chars, start).ok_or_else(fail)?;
    let unit: String = chars[part.end..].iter().collect();
    let unit = unit.trim().trim_end_matches([',', ';', '.', ':']).trim();
    let unit = strip_unbalanced_paren(unit);
    let mut value = ParsedValue::new(part.lo, unit);
    value.error = part.error;
    if let Some(hi) = part.hi {
        let (lo, hi) = if part.lo <= hi { (part.lo, hi) } else { (hi, part.lo) };
        value.range = Some((lo, hi));
        value.numeric = lo + (hi - lo) / 2.0;
    }
    if !value.numeric.is_finite() {
        return Err(fail());
    }
    Ok(value)
}

fn strip_unbalanced_paren(unit: &str) -> &str {
    let open = unit.matches('(').count();
    let close = unit.matches(')').count();
    if close > open {
        unit.strip_suffix(')').unwrap_or(unit).trim_end()
    } else {
        unit
    }
}
