use super::number::{format_real, parse_real};
use super::BellfmtError;
use crate::grothendieck::CorrelationFunctional;

/// Reads `m` lines of `m` comma-separated reals (decimals or `p/q`).
/// Blank lines are skipped.
pub fn parse_correlation_matrix(text: &str) -> Result<CorrelationFunctional, BellfmtError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.trim();
        if content.is_empty() {
            continue;
        }
        let row = content
            .split(',')
            .enumerate()
            .map(|(k, field)| {
                let field = field.trim();
                parse_real(field).ok_or_else(|| BellfmtError::NonNumeric {
                    line,
                    field: k + 1,
                    text: field.to_string(),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(BellfmtError::RaggedRows {
                    line,
                    expected: first.len(),
                    found: row.len(),
                });
            }
        }
        rows.push(row);
    }
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() {
        return Err(BellfmtError::Empty);
    }
    if rows.len() != cols {
        return Err(BellfmtError::NotSquare {
            rows: rows.len(),
            cols,
        });
    }
    Ok(CorrelationFunctional::from_rows(&rows).expect("square finite rows"))
}

/// One line per row, exact round-trip decimals, LF line endings.
pub fn serialize_correlation_matrix(f: &CorrelationFunctional) -> String {
    let mut out = String::new();
    for row in f.rows() {
        let fields: Vec<String> = row.iter().map(|&v| format_real(v)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn chsh_matrix() {
        let f = parse_correlation_matrix("1,1\n1,-1").unwrap();
        assert_eq!(f.as_slice(), &[1.0, 1.0, 1.0, -1.0]);
    }

    #[test]
    fn single_entry_and_crlf() {
        assert_eq!(parse_correlation_matrix("1").unwrap().m(), 1);
        let f = parse_correlation_matrix(" 0.5 , 2\r\n3,4\r\n\r\n").unwrap();
        assert_eq!(f.as_slice(), &[0.5, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn errors() {
        assert_eq!(
            parse_correlation_matrix("1,2\n3"),
            Err(BellfmtError::RaggedRows {
                line: 2,
                expected: 2,
                found: 1
            })
        );
        assert_eq!(
            parse_correlation_matrix("1,x\n3,4"),
            Err(BellfmtError::NonNumeric {
                line: 1,
                field: 2,
                text: "x".into()
            })
        );
        assert!(matches!(
            parse_correlation_matrix("1,nan"),
            Err(BellfmtError::NonNumeric { .. })
        ));
        assert_eq!(
            parse_correlation_matrix("1,2"),
            Err(BellfmtError::NotSquare { rows: 1, cols: 2 })
        );
        assert_eq!(parse_correlation_matrix("\n"), Err(BellfmtError::Empty));
    }

    #[test]
    fn random_5x5_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let entries: Vec<f64> = (0..25).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = CorrelationFunctional::new(5, entries).unwrap();
        let text = serialize_correlation_matrix(&f);
        assert_eq!(parse_correlation_matrix(&text).unwrap(), f);
    }
}
