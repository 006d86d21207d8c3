use std::fmt;

use super::number::{format_real, parse_real};
use super::BellfmtError;
use crate::linalg::Party;
use crate::scenario::{BellFunctional, BellScenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermKind {
    Joint {
        x: usize,
        y: usize,
        a: usize,
        b: usize,
    },
    MarginalA {
        x: usize,
        a: usize,
    },
    MarginalB {
        y: usize,
        b: usize,
    },
    Constant,
}

impl fmt::Display for TermKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TermKind::Joint { x, y, a, b } => write!(f, "P({a} {b}|{x} {y})"),
            TermKind::MarginalA { x, a } => write!(f, "PA({a}|{x})"),
            TermKind::MarginalB { y, b } => write!(f, "PB({b}|{y})"),
            TermKind::Constant => f.write_str("const"),
        }
    }
}

/// One coefficient line; `text` is the coefficient as written.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub kind: TermKind,
    pub coefficient: f64,
    pub text: String,
    pub line: usize,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TermKind::Constant => write!(f, "const {}", self.text),
            kind if self.text.starts_with(['-', '+']) => write!(f, "{} {kind}", self.text),
            kind => write!(f, "+{} {kind}", self.text),
        }
    }
}

/// Parsed `.bell` file: the scenario and its terms in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalDocument {
    pub scenario: BellScenario,
    pub terms: Vec<Term>,
}

impl FunctionalDocument {
    /// Sums the terms into a functional; repeated terms accumulate.
    pub fn to_functional(&self) -> BellFunctional {
        let mut f = BellFunctional::zero(self.scenario.clone());
        let mut constant = 0.0;
        for t in &self.terms {
            match t.kind {
                TermKind::Joint { x, y, a, b } => f.add_joint(x, y, a, b, t.coefficient),
                TermKind::MarginalA { x, a } => f.add_marginal(Party::A, x, a, t.coefficient),
                TermKind::MarginalB { y, b } => f.add_marginal(Party::B, y, b, t.coefficient),
                TermKind::Constant => constant += t.coefficient,
            }
        }
        f.set_constant(constant);
        f
    }

    pub fn abs_coefficient_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }
}

impl fmt::Display for FunctionalDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario {}", self.scenario.describe())?;
        for t in &self.terms {
            writeln!(f, "{t}")?;
        }
        Ok(())
    }
}

pub fn parse_functional(text: &str) -> Result<BellFunctional, BellfmtError> {
    Ok(parse_document(text)?.to_functional())
}

pub fn parse_document(text: &str) -> Result<FunctionalDocument, BellfmtError> {
    let mut scenario: Option<BellScenario> = None;
    let mut terms = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim_end_matches('\r');
        let mut cur = Cursor::new(content, line_no);
        cur.skip_ws();
        if cur.at_end() {
            continue;
        }
        if cur.starts_with("scenario") {
            if scenario.is_some() {
                return Err(cur.error("duplicate scenario declaration"));
            }
            scenario = Some(parse_scenario(&mut cur)?);
            continue;
        }
        let Some(sc) = scenario.as_ref() else {
            return Err(BellfmtError::MissingScenario);
        };
        let term = if cur.starts_with("const") {
            cur.advance("const".len());
            let (coefficient, text) = parse_coefficient(&mut cur, content.len())?;
            Term {
                kind: TermKind::Constant,
                coefficient,
                text,
                line: line_no,
            }
        } else {
            let end = content.find('P').unwrap_or(content.len());
            let (coefficient, text) = parse_coefficient(&mut cur, end)?;
            let kind = parse_term_kind(&mut cur)?;
            check_range(sc, kind, line_no)?;
            Term {
                kind,
                coefficient,
                text,
                line: line_no,
            }
        };
        cur.skip_ws();
        if !cur.at_end() {
            return Err(cur.error("unexpected trailing text"));
        }
        terms.push(term);
    }
    let scenario = scenario.ok_or(BellfmtError::MissingScenario)?;
    Ok(FunctionalDocument { scenario, terms })
}

/// Canonical text: scenario, constant, Alice marginals, Bob marginals, then
/// joint terms ordered by `(x, y, a, b)`. Zero coefficients are omitted.
pub fn serialize_functional(f: &BellFunctional) -> String {
    canonical_document(f).to_string()
}

fn canonical_document(f: &BellFunctional) -> FunctionalDocument {
    let sc = f.scenario();
    let mut terms = Vec::new();
    let mut push = |kind: TermKind, w: f64| {
        if w != 0.0 {
            terms.push(Term {
                kind,
                coefficient: w,
                text: format_real(w),
                line: 0,
            });
        }
    };
    push(TermKind::Constant, f.constant());
    for (x, &v) in sc.outcomes_a().iter().enumerate() {
        for a in 0..v {
            push(TermKind::MarginalA { x, a }, f.marginal(Party::A, x, a));
        }
    }
    for (y, &v) in sc.outcomes_b().iter().enumerate() {
        for b in 0..v {
            push(TermKind::MarginalB { y, b }, f.marginal(Party::B, y, b));
        }
    }
    for (x, &va) in sc.outcomes_a().iter().enumerate() {
        for (y, &vb) in sc.outcomes_b().iter().enumerate() {
            for a in 0..va {
                for b in 0..vb {
                    push(TermKind::Joint { x, y, a, b }, f.joint(x, y, a, b));
                }
            }
        }
    }
    FunctionalDocument {
        scenario: sc.clone(),
        terms,
    }
}

fn parse_scenario(cur: &mut Cursor<'_>) -> Result<BellScenario, BellfmtError> {
    let start_col = cur.column();
    cur.advance("scenario".len());
    let mut lists = Vec::new();
    for party in ['A', 'B'] {
        cur.skip_ws();
        cur.expect(party)?;
        cur.skip_ws();
        cur.expect(':')?;
        let mut counts = Vec::new();
        loop {
            cur.skip_ws();
            counts.push(cur.uint()?);
            cur.skip_ws();
            if cur.peek() == Some(',') {
                cur.advance(1);
            } else {
                break;
            }
        }
        lists.push(counts);
    }
    cur.skip_ws();
    if !cur.at_end() {
        return Err(cur.error("unexpected trailing text"));
    }
    let outcomes_b = lists.pop().unwrap_or_default();
    let outcomes_a = lists.pop().unwrap_or_default();
    BellScenario::new(outcomes_a, outcomes_b).map_err(|e| BellfmtError::Syntax {
        line: cur.line,
        column: start_col,
        message: e.to_string(),
    })
}

/// Coefficient text spans the cursor up to byte offset `end`; whitespace
/// inside it is ignored.
fn parse_coefficient(cur: &mut Cursor<'_>, end: usize) -> Result<(f64, String), BellfmtError> {
    cur.skip_ws();
    let col = cur.column();
    let raw = cur.take_until(end);
    let text: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
    if text.is_empty() {
        return Err(BellfmtError::Syntax {
            line: cur.line,
            column: col,
            message: "expected a coefficient".into(),
        });
    }
    match parse_real(&text) {
        Some(v) => Ok((v, text)),
        None => Err(BellfmtError::Syntax {
            line: cur.line,
            column: col,
            message: format!("`{text}` is not a finite real or rational p/q"),
        }),
    }
}

fn parse_term_kind(cur: &mut Cursor<'_>) -> Result<TermKind, BellfmtError> {
    cur.expect('P')?;
    let marginal = match cur.peek() {
        Some('A') => {
            cur.advance(1);
            Some(Party::A)
        }
        Some('B') => {
            cur.advance(1);
            Some(Party::B)
        }
        _ => None,
    };
    cur.skip_ws();
    cur.expect('(')?;
    let (outcomes, settings) = match marginal {
        Some(_) => {
            cur.skip_ws();
            let o = cur.uint()?;
            cur.skip_ws();
            cur.expect('|')?;
            cur.skip_ws();
            let s = cur.uint()?;
            ([o, 0], [s, 0])
        }
        None => {
            let o = cur.uint_pair()?;
            cur.skip_ws();
            cur.expect('|')?;
            let s = cur.uint_pair()?;
            (o, s)
        }
    };
    cur.skip_ws();
    cur.expect(')')?;
    Ok(match marginal {
        Some(Party::A) => TermKind::MarginalA {
            x: settings[0],
            a: outcomes[0],
        },
        Some(Party::B) => TermKind::MarginalB {
            y: settings[0],
            b: outcomes[0],
        },
        None => TermKind::Joint {
            x: settings[0],
            y: settings[1],
            a: outcomes[0],
            b: outcomes[1],
        },
    })
}

fn check_range(sc: &BellScenario, kind: TermKind, line: usize) -> Result<(), BellfmtError> {
    let setting_outcome = |party: Party, s: usize, o: usize| -> Result<(), String> {
        let outcomes = sc.outcomes(party);
        match outcomes.get(s) {
            None => Err(format!("party {party} has {} settings", outcomes.len())),
            Some(&v) if o >= v => Err(format!("party {party}, setting {s} has {v} outcomes")),
            Some(_) => Ok(()),
        }
    };
    let check = match kind {
        TermKind::Joint { x, y, a, b } => {
            setting_outcome(Party::A, x, a).and_then(|_| setting_outcome(Party::B, y, b))
        }
        TermKind::MarginalA { x, a } => setting_outcome(Party::A, x, a),
        TermKind::MarginalB { y, b } => setting_outcome(Party::B, y, b),
        TermKind::Constant => Ok(()),
    };
    check.map_err(|detail| BellfmtError::IndexOutOfRange {
        line,
        term: kind.to_string(),
        detail,
    })
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str, line: usize) -> Self {
        Self { text, pos: 0, line }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn column(&self) -> usize {
        self.text[..self.pos].chars().count() + 1
    }

    fn starts_with(&self, word: &str) -> bool {
        self.rest().starts_with(word)
    }

    fn advance(&mut self, bytes: usize) {
        self.pos = (self.pos + bytes).min(self.text.len());
    }

    fn take_until(&mut self, end: usize) -> &'a str {
        let end = end.max(self.pos);
        let s = &self.text[self.pos..end];
        self.pos = end;
        s
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn error(&self, message: impl Into<String>) -> BellfmtError {
        BellfmtError::Syntax {
            line: self.line,
            column: self.column(),
            message: message.into(),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), BellfmtError> {
        match self.peek() {
            Some(got) if got == c => {
                self.advance(c.len_utf8());
                Ok(())
            }
            Some(got) => Err(self.error(format!("expected `{c}`, found `{got}`"))),
            None => Err(self.error(format!("expected `{c}`, found end of line"))),
        }
    }

    fn uint(&mut self) -> Result<usize, BellfmtError> {
        let digits = self.rest().bytes().take_while(u8::is_ascii_digit).count();
        if digits == 0 {
            return Err(self.error("expected a non-negative integer"));
        }
        let value = self.rest()[..digits]
            .parse()
            .map_err(|_| self.error("integer too large"))?;
        self.advance(digits);
        Ok(value)
    }

    /// Two integers separated by whitespace and/or one comma.
    fn uint_pair(&mut self) -> Result<[usize; 2], BellfmtError> {
        self.skip_ws();
        let first = self.uint()?;
        let before = self.pos;
        self.skip_ws();
        if self.peek() == Some(',') {
            self.advance(1);
            self.skip_ws();
        } else if self.pos == before {
            return Err(self.error("expected whitespace or `,` between indices"));
        }
        let second = self.uint()?;
        Ok([first, second])
    }
}
