/// Parses a finite decimal or an exact rational `p/q` with integer `p`, `q`.
///
/// Returns `None` for anything else, including `inf` and `nan`.
pub fn parse_real(text: &str) -> Option<f64> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p: i64 = p.trim().parse().ok()?;
        let q: i64 = q.trim().parse().ok()?;
        if q <= 0 {
            return None;
        }
        return Some(p as f64 / q as f64);
    }
    if !text
        .bytes()
        .all(|c| c.is_ascii_digit() || matches!(c, b'+' | b'-' | b'.' | b'e' | b'E'))
    {
        return None;
    }
    text.parse::<f64>().ok().filter(|v| v.is_finite())
}

const MAX_DENOMINATOR: i64 = 1000;
const MIN_SIGNIFICANT: usize = 12;

/// Text that [`parse_real`] maps back to exactly `v`.
///
/// Integers print bare; values that are exactly `p/q` in lowest terms with
/// `q <= 1000` and no terminating decimal expansion print as `p/q`; anything
/// else prints as the shortest round-trip decimal, zero-padded to at least
/// 12 significant digits.
pub fn format_real(v: f64) -> String {
    assert!(v.is_finite(), "cannot format {v}");
    if v == v.trunc() && v.abs() < 1e15 {
        return format!("{}", v as i64);
    }
    if let Some((p, q)) = small_rational(v) {
        return format!("{p}/{q}");
    }
    let abs = v.abs();
    let text = if (1e-5..1e15).contains(&abs) {
        format!("{v}")
    } else {
        format!("{v:e}")
    };
    pad_significant(text)
}

fn small_rational(v: f64) -> Option<(i64, i64)> {
    if v.abs() > 1e9 {
        return None;
    }
    let (p, q) = (2..=MAX_DENOMINATOR).find_map(|q| {
        let p = (v * q as f64).round();
        (p.abs() < 1e12 && p / q as f64 == v).then_some((p as i64, q))
    })?;
    (!terminates(q)).then_some((p, q))
}

fn terminates(mut q: i64) -> bool {
    for f in [2, 5] {
        while q % f == 0 {
            q /= f;
        }
    }
    q == 1
}

fn pad_significant(text: String) -> String {
    let (mantissa, exponent) = match text.find('e') {
        Some(i) => (&text[..i], &text[i..]),
        None => (text.as_str(), ""),
    };
    let digits = mantissa
        .bytes()
        .filter(u8::is_ascii_digit)
        .skip_while(|&c| c == b'0')
        .count();
    if digits >= MIN_SIGNIFICANT {
        return text;
    }
    let mut out = mantissa.to_string();
    if !out.contains('.') {
        out.push('.');
    }
    out.extend(std::iter::repeat_n('0', MIN_SIGNIFICANT - digits));
    out.push_str(exponent);
    out
}
