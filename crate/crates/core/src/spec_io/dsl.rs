//! Bracket notation.
//!
//! ```text
//! PDD = [
//!   [{depressed_mood}],            #A
//!   [{insomnia, hypersomnia}, {fatigue}, {hopelessness}, 2], #B
//! ]
//! ```
//!
//! Generator shapes: `[S]`, `[S, k]`, `[S1, .., Sm, k]` (m ≥ 2), `[L1, L2]` and
//! `[L1, L2, (r, s, t)]`. A list is `[S, ..]` or `{S, ..}`; `{}` and `∅` are
//! the empty set. Names may be bare or quoted with `'` or `"`. A one-word
//! comment after a criterion becomes its label.

use super::{build_generator, build_spec, ParseDiagnostics, ParseResult};
use crate::generator::{Generator, Requirement};
use crate::spec::{Criterion, DisorderSpec};
use crate::symptom::{Symptom, SymptomSet};

type Pos = (usize, usize);

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open(char),
    Close(char),
    Comma,
    Equals,
    Empty,
    Word(String, bool),
}

#[derive(Debug)]
struct Lexed {
    toks: Vec<(Tok, Pos)>,
    comments: Vec<(usize, String)>,
}

fn lex(text: &str) -> Result<Lexed, (Pos, String)> {
    let mut toks = Vec::new();
    let mut comments = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    let bump = |c: char, line: &mut usize, col: &mut usize| {
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while let Some(&c) = chars.peek() {
        let pos = (line, col);
        match c {
            '#' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    bump(c, &mut line, &mut col);
                    s.push(c);
                }
                comments.push((pos.0, s[1..].to_string()));
            }
            '[' | '{' | '(' => {
                chars.next();
                bump(c, &mut line, &mut col);
                toks.push((Tok::Open(c), pos));
            }
            ']' | '}' | ')' => {
                chars.next();
                bump(c, &mut line, &mut col);
                toks.push((Tok::Close(c), pos));
            }
            ',' => {
                chars.next();
                bump(c, &mut line, &mut col);
                toks.push((Tok::Comma, pos));
            }
            '=' => {
                chars.next();
                bump(c, &mut line, &mut col);
                toks.push((Tok::Equals, pos));
            }
            '∅' => {
                chars.next();
                bump(c, &mut line, &mut col);
                toks.push((Tok::Empty, pos));
            }
            '\'' | '"' => {
                chars.next();
                bump(c, &mut line, &mut col);
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some(q) if q == c => {
                            bump(q, &mut line, &mut col);
                            break;
                        }
                        Some('\n') | None => return Err((pos, "unterminated quoted name".into())),
                        Some(x) => {
                            bump(x, &mut line, &mut col);
                            s.push(x);
                        }
                    }
                }
                toks.push((Tok::Word(s, true), pos));
            }
            c if c.is_whitespace() => {
                chars.next();
                bump(c, &mut line, &mut col);
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || "[]{}(),=#'\"∅".contains(c) {
                        break;
                    }
                    chars.next();
                    bump(c, &mut line, &mut col);
                    s.push(c);
                }
                toks.push((Tok::Word(s, false), pos));
            }
        }
    }
    Ok(Lexed { toks, comments })
}

#[derive(Debug, Clone)]
enum Value {
    Word(String, bool),
    Empty,
    Brace(Vec<Node>),
    Bracket(Vec<Node>),
    Paren(Vec<Node>),
}

#[derive(Debug, Clone)]
struct Node {
    value: Value,
    pos: Pos,
    /// Line of the closing delimiter (or of the token itself).
    end_line: usize,
}

struct Parser<'a> {
    toks: &'a [(Tok, Pos)],
    at: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a (Tok, Pos)> {
        self.toks.get(self.at)
    }

    fn eof_pos(&self) -> Pos {
        self.toks.last().map(|t| t.1).unwrap_or((1, 1))
    }

    fn value(&mut self) -> Result<Node, (Pos, String)> {
        let Some((tok, pos)) = self.peek() else {
            return Err((self.eof_pos(), "unexpected end of input".into()));
        };
        self.at += 1;
        let pos = *pos;
        let value = match tok {
            Tok::Word(w, q) => Value::Word(w.clone(), *q),
            Tok::Empty => Value::Empty,
            Tok::Open(open) => {
                let close = match open {
                    '[' => ']',
                    '{' => '}',
                    _ => ')',
                };
                let (items, end_line) = self.items(close)?;
                let value = match open {
                    '[' => Value::Bracket(items),
                    '{' => Value::Brace(items),
                    _ => Value::Paren(items),
                };
                return Ok(Node { value, pos, end_line });
            }
            Tok::Close(c) => return Err((pos, format!("unexpected '{c}'"))),
            Tok::Comma => return Err((pos, "unexpected ','".into())),
            Tok::Equals => return Err((pos, "unexpected '='".into())),
        };
        Ok(Node {
            value,
            pos,
            end_line: pos.0,
        })
    }

    /// Comma-separated items up to `close`; a trailing comma is allowed.
    fn items(&mut self, close: char) -> Result<(Vec<Node>, usize), (Pos, String)> {
        let mut items = Vec::new();
        loop {
            match self.peek() {
                Some((Tok::Close(c), pos)) if *c == close => {
                    self.at += 1;
                    return Ok((items, pos.0));
                }
                Some(_) => {}
                None => return Err((self.eof_pos(), format!("missing '{close}'"))),
            }
            items.push(self.value()?);
            match self.peek() {
                Some((Tok::Comma, _)) => self.at += 1,
                Some((Tok::Close(c), _)) if *c == close => {}
                Some((_, pos)) => return Err((*pos, format!("expected ',' or '{close}'"))),
                None => return Err((self.eof_pos(), format!("missing '{close}'"))),
            }
        }
    }
}

fn describe(v: &Value) -> &'static str {
    match v {
        Value::Word(..) => "name",
        Value::Empty => "empty set",
        Value::Brace(_) => "set",
        Value::Bracket(_) => "list",
        Value::Paren(_) => "tuple",
    }
}

/// A value converted to domain types; collects symptom-name errors.
struct Reader<'d> {
    diags: &'d mut ParseDiagnostics,
}

enum Shape {
    Generator(Generator),
    /// Not a generator shape; carries a description of what was seen.
    Ambiguous(String),
    /// A generator shape whose contents failed to read (already reported).
    Broken,
}

impl Reader<'_> {
    fn symptom(&mut self, node: &Node) -> Option<Symptom> {
        let Value::Word(w, _) = &node.value else {
            return None;
        };
        match Symptom::new(w) {
            Ok(s) => Some(s),
            Err(_) => {
                self.diags.error(
                    node.pos,
                    "invalid-symptom",
                    format!("invalid symptom name {w:?}: use letters, digits and '_'"),
                );
                None
            }
        }
    }

    fn is_set(node: &Node) -> bool {
        match &node.value {
            Value::Empty => true,
            Value::Brace(items) => items.iter().all(|i| matches!(i.value, Value::Word(..))),
            _ => false,
        }
    }

    fn is_list(node: &Node) -> bool {
        match &node.value {
            Value::Bracket(items) => items.iter().all(Self::is_set),
            Value::Brace(items) => !items.is_empty() && !Self::is_set(node) && items.iter().all(Self::is_set),
            _ => false,
        }
    }

    fn set(&mut self, node: &Node) -> Option<SymptomSet> {
        let mut out = SymptomSet::new();
        let mut ok = true;
        if let Value::Brace(items) = &node.value {
            for item in items {
                match self.symptom(item) {
                    Some(s) => {
                        if !out.insert(s) {
                            self.diags.warning(
                                item.pos,
                                "duplicate-symptom",
                                format!("symptom {} repeated within a set", item_text(item)),
                            );
                        }
                    }
                    None => ok = false,
                }
            }
        }
        ok.then_some(out)
    }

    fn list(&mut self, node: &Node) -> Option<Vec<SymptomSet>> {
        let (Value::Bracket(items) | Value::Brace(items)) = &node.value else {
            return None;
        };
        let sets: Vec<Option<SymptomSet>> = items.iter().map(|i| self.set(i)).collect();
        sets.into_iter().collect()
    }

    fn number(node: &Node) -> Option<usize> {
        match &node.value {
            Value::Word(w, false) => w.parse().ok(),
            _ => None,
        }
    }

    fn generator(&mut self, node: &Node) -> Shape {
        let Value::Bracket(items) = &node.value else {
            return Shape::Ambiguous(describe(&node.value).into());
        };
        let kinds: Vec<&str> = items
            .iter()
            .map(|i| {
                if Self::number(i).is_some() {
                    "k"
                } else if Self::is_set(i) {
                    "S"
                } else if Self::is_list(i) {
                    "L"
                } else if matches!(i.value, Value::Paren(_)) {
                    "T"
                } else {
                    describe(&i.value)
                }
            })
            .collect();
        let shape = format!("[{}]", kinds.join(", "));
        let n = items.len();
        let sets_then_k = n >= 2
            && kinds[n - 1] == "k"
            && kinds[..n - 1].iter().all(|k| *k == "S");
        let g = if n == 1 && kinds[0] == "S" {
            self.set(&items[0]).map(Generator::Fixed)
        } else if sets_then_k && n == 2 {
            let k = Self::number(&items[1]).unwrap();
            self.set(&items[0]).map(|set| Generator::AtLeast { set, k })
        } else if sets_then_k {
            let k = Self::number(&items[n - 1]).unwrap();
            let sets: Option<Vec<SymptomSet>> = items[..n - 1].iter().map(|i| self.set(i)).collect();
            sets.map(|sets| Generator::SetCount { sets, k })
        } else if n == 2 && kinds == ["L", "L"] {
            let first = self.list(&items[0]);
            let second = self.list(&items[1]);
            first.zip(second).map(|(first, second)| Generator::Pairing { first, second })
        } else if n == 3 && kinds == ["L", "L", "T"] {
            let Value::Paren(t) = &items[2].value else { unreachable!() };
            let nums: Option<Vec<usize>> = t.iter().map(Self::number).collect();
            let Some(nums) = nums.filter(|v| v.len() == 3) else {
                return Shape::Ambiguous(format!("{shape} with a tuple that is not (r, s, t)"));
            };
            let first = self.list(&items[0]);
            let second = self.list(&items[1]);
            first.zip(second).map(|(first, second)| Generator::SplitSetCount {
                first,
                second,
                req: Requirement::new(nums[0], nums[1], nums[2]),
            })
        } else {
            return Shape::Ambiguous(shape);
        };
        match g {
            Some(g) => Shape::Generator(g),
            None => Shape::Broken,
        }
    }
}

fn item_text(node: &Node) -> String {
    match &node.value {
        Value::Word(w, _) => w.clone(),
        v => describe(v).into(),
    }
}

fn ambiguous(diags: &mut ParseDiagnostics, pos: Pos, shape: &str) {
    diags.error(
        pos,
        "ambiguous-variant",
        format!(
            "{shape} matches no generator shape; expected [S], [S, k], [S1, .., Sm, k], [L1, L2] or [L1, L2, (r, s, t)]"
        ),
    );
}

struct Document {
    name: Option<String>,
    root: Node,
    comments: Vec<(usize, String)>,
}

fn document(text: &str, diags: &mut ParseDiagnostics) -> Option<Document> {
    let lexed = match lex(text) {
        Ok(l) => l,
        Err((pos, msg)) => {
            diags.error(pos, "syntax", msg);
            return None;
        }
    };
    let toks = &lexed.toks;
    let mut p = Parser { toks, at: 0 };
    let mut name = None;
    if let (Some((Tok::Word(w, _), _)), Some((Tok::Equals, _))) = (toks.first(), toks.get(1)) {
        name = Some(w.clone());
        p.at = 2;
    }
    if p.peek().is_none() {
        diags.error(p.eof_pos(), "empty-spec", "no criteria found");
        return None;
    }
    let root = match p.value() {
        Ok(n) => n,
        Err((pos, msg)) => {
            diags.error(pos, "syntax", msg);
            return None;
        }
    };
    if let Some((_, pos)) = p.peek() {
        diags.error(*pos, "syntax", "unexpected input after the closing bracket");
        return None;
    }
    Some(Document {
        name,
        root,
        comments: lexed.comments,
    })
}

/// A one-word comment on `line`, read as a label.
fn label_on(comments: &[(usize, String)], line: usize) -> Option<String> {
    let (_, text) = comments.iter().find(|(l, _)| *l == line)?;
    let text = text.trim();
    (!text.is_empty() && !text.contains(char::is_whitespace)).then(|| text.to_string())
}

/// Parses a disorder; the name defaults to `unnamed`.
pub fn parse_dsl(text: &str) -> ParseResult<DisorderSpec> {
    parse_dsl_named(text, "unnamed")
}

pub(crate) fn parse_dsl_named(text: &str, fallback_name: &str) -> ParseResult<DisorderSpec> {
    let mut diags = ParseDiagnostics::default();
    let Some(doc) = document(text, &mut diags) else {
        return Err(diags);
    };
    let name = doc.name.clone().unwrap_or_else(|| fallback_name.to_string());
    let Value::Bracket(items) = &doc.root.value else {
        diags.error(doc.root.pos, "syntax", "a disorder must be a bracketed list of criteria");
        return Err(diags);
    };
    if items.is_empty() {
        diags.error(doc.root.pos, "empty-spec", format!("disorder {name:?} has no criteria"));
        return Err(diags);
    }

    // A list of bracketed criteria, unless that reading fails and the whole
    // thing is itself one generator.
    let mut criteria = Vec::new();
    let mut trial = ParseDiagnostics::default();
    let mut as_disorder = items.iter().all(|i| matches!(i.value, Value::Bracket(_)));
    if as_disorder {
        let mut r = Reader { diags: &mut trial };
        for (i, item) in items.iter().enumerate() {
            match r.generator(item) {
                Shape::Generator(g) => {
                    // the last criterion closing on a line takes that line's label
                    let last_on_line = items[i + 1..].iter().all(|n| n.end_line != item.end_line);
                    let label = last_on_line
                        .then(|| label_on(&doc.comments, item.end_line))
                        .flatten();
                    criteria.push((Criterion { label, generator: g }, item.pos));
                }
                Shape::Broken => {}
                Shape::Ambiguous(shape) => {
                    ambiguous(r.diags, item.pos, &shape);
                    as_disorder = false;
                }
            }
        }
    }
    if !as_disorder {
        let mut single = ParseDiagnostics::default();
        let shape = Reader { diags: &mut single }.generator(&doc.root);
        match shape {
            Shape::Generator(g) => {
                criteria = vec![(Criterion::new(g), doc.root.pos)];
                trial = single;
            }
            // report the per-criterion findings when that reading got further
            _ if !trial.is_empty() => {}
            Shape::Broken => trial = single,
            Shape::Ambiguous(shape) => {
                trial = single;
                ambiguous(&mut trial, doc.root.pos, &shape);
            }
        }
    }
    diags.items.extend(trial.items);
    if diags.has_errors() {
        return Err(diags);
    }
    match build_spec(name, criteria, &mut diags) {
        Some(spec) => Ok((spec, diags)),
        None => Err(diags),
    }
}

/// Parses one generator such as `[{a, b, c}, 2]`.
pub fn parse_generator_dsl(text: &str) -> ParseResult<Generator> {
    let mut diags = ParseDiagnostics::default();
    let Some(doc) = document(text, &mut diags) else {
        return Err(diags);
    };
    let pos = doc.root.pos;
    let shape = Reader { diags: &mut diags }.generator(&doc.root);
    let g = match shape {
        Shape::Generator(g) => g,
        Shape::Broken => return Err(diags),
        Shape::Ambiguous(shape) => {
            ambiguous(&mut diags, pos, &shape);
            return Err(diags);
        }
    };
    if diags.has_errors() {
        return Err(diags);
    }
    match build_generator(g, pos, &mut diags) {
        Some(g) => Ok((g, diags)),
        None => Err(diags),
    }
}

fn quote_name(name: &str) -> String {
    let bare = !name.is_empty()
        && !name
            .chars()
            .any(|c| c.is_whitespace() || "[]{}(),=#'\"∅".contains(c));
    if bare {
        name.to_string()
    } else if name.contains('"') {
        format!("'{name}'")
    } else {
        format!("\"{name}\"")
    }
}

/// Bracket notation with sorted set elements, one criterion per line.
pub fn to_dsl(d: &DisorderSpec) -> String {
    let mut out = format!("{} = [\n", quote_name(d.name()));
    for c in d.criteria() {
        out.push_str("  ");
        c.generator
            .write_notation(&mut out, true)
            .expect("writing to a String");
        out.push(',');
        if let Some(label) = &c.label {
            out.push_str(" #");
            out.push_str(label);
        }
        out.push('\n');
    }
    out.push_str("]\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::GeneratorKind;

    fn set(names: &[&str]) -> SymptomSet {
        SymptomSet::from_names(names).unwrap()
    }

    fn gen(text: &str) -> Generator {
        parse_generator_dsl(text).unwrap().0
    }

    #[test]
    fn shapes() {
        assert_eq!(gen("[{a,b,c,d}]"), Generator::Fixed(set(&["a", "b", "c", "d"])));
        assert_eq!(
            gen("[{a,b,c}, 2]"),
            Generator::AtLeast {
                set: set(&["a", "b", "c"]),
                k: 2
            }
        );
        assert_eq!(gen("[{a,b},{c,d},{e,f},2]").kind(), GeneratorKind::G2);
        assert_eq!(
            gen("[[{a,b},{c}], [{d},{e,f}], (1,0,3)]"),
            Generator::SplitSetCount {
                first: vec![set(&["a", "b"]), set(&["c"])],
                second: vec![set(&["d"]), set(&["e", "f"])],
                req: Requirement::new(1, 0, 3),
            }
        );
    }

    #[test]
    fn sentinel_spellings() {
        let expected = Generator::Pairing {
            first: vec![set(&["a"]), set(&["b"])],
            second: vec![SymptomSet::new()],
        };
        for text in ["[[{a},{b}], [∅]]", "[[{a},{b}], [{}]]", "[{{a},{b}}, {∅}]"] {
            assert_eq!(gen(text), expected, "{text}");
        }
    }

    #[test]
    fn quoted_names_and_labels() {
        let text = "X = [\n  [{'p', \"q\"}], #A\n  [{r, s}, 1] # B+C\n]\n";
        let (d, diags) = parse_dsl(text).unwrap();
        assert!(diags.is_empty());
        assert_eq!(d.name(), "X");
        assert_eq!(d.criteria()[0].label.as_deref(), Some("A"));
        assert_eq!(d.criteria()[1].label.as_deref(), Some("B+C"));
    }

    #[test]
    fn prose_comment_is_not_a_label() {
        let (d, _) = parse_dsl("[\n [{a}], # just a note\n]").unwrap();
        assert_eq!(d.criteria()[0].label, None);
    }

    #[test]
    fn single_generator_file() {
        let (d, _) = parse_dsl("[{a,b,c,d,e}, 3]").unwrap();
        assert_eq!(d.criteria().len(), 1);
        assert_eq!(d.criteria()[0].generator.kind(), GeneratorKind::G1);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_generator_dsl("[{a,b},{c,d},3]").unwrap_err();
        let d = e.errors().next().unwrap();
        assert_eq!(d.code, "invalid-generator");
        assert!(d.message.contains("k ≤ m"), "{}", d.message);

        let e = parse_dsl("[\n  [{a}, {b}],\n]").unwrap_err();
        let d = e.errors().next().unwrap();
        assert_eq!((d.code, d.line, d.col), ("ambiguous-variant", 2, 3));

        let e = parse_dsl("[[{a, b-c}]]").unwrap_err();
        assert_eq!(e.errors().next().unwrap().code, "invalid-symptom");

        let e = parse_dsl("[[{a, b}]").unwrap_err();
        assert_eq!(e.errors().next().unwrap().code, "syntax");

        let e = parse_dsl("[]").unwrap_err();
        assert_eq!(e.errors().next().unwrap().code, "empty-spec");
    }

    #[test]
    fn warnings_do_not_block() {
        let (d, diags) = parse_dsl("[[{a,b}, 0], [{b,c}]]").unwrap();
        assert!(!d.disjoint_criteria());
        let codes: Vec<&str> = diags.warnings().map(|w| w.code).collect();
        assert_eq!(codes, ["zero-threshold", "overlapping-criteria"]);
    }

    #[test]
    fn round_trip_sorts_sets() {
        let (d, _) = parse_dsl("T = [\n [{c, a, b}, 2], #A\n [[{z}], [{}]],\n]").unwrap();
        let text = to_dsl(&d);
        assert_eq!(text, "T = [\n  [{a, b, c}, 2], #A\n  [[{z}], [{}]],\n]\n");
        assert_eq!(parse_dsl(&text).unwrap().0, d);
    }
}
