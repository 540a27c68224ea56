//! Canonical TOML format.
//!
//! ```toml
//! name = "GAD"
//!
//! [[criteria]]
//! label = "C"
//! gen = "G2"
//! sets = [["restlessness"], ["fatigue"], ["irritability"]]
//! k = 2
//! ```
//!
//! Fields by variant: G0 `set`; G1 `set`, `k`; G2 `sets`, `k`; G3 `list1`,
//! `list2`; G4 `list1`, `list2`, `req = [r, s, t]`. An empty set is `[]`.

use serde::Deserialize;
use toml::Spanned;

use super::{build_spec, ParseDiagnostics, ParseResult};
use crate::generator::{Generator, Requirement};
use crate::spec::{Criterion, DisorderSpec};
use crate::symptom::{Symptom, SymptomSet};

type Pos = (usize, usize);
type RawSet = Vec<Spanned<String>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    name: String,
    #[serde(default)]
    criteria: Vec<Spanned<RawCriterion>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCriterion {
    label: Option<String>,
    gen: Spanned<String>,
    set: Option<RawSet>,
    sets: Option<Vec<RawSet>>,
    k: Option<usize>,
    list1: Option<Vec<RawSet>>,
    list2: Option<Vec<RawSet>>,
    req: Option<[usize; 3]>,
}

struct Lines {
    starts: Vec<usize>,
}

impl Lines {
    fn new(text: &str) -> Self {
        let mut starts = vec![0];
        starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        Lines { starts }
    }

    fn pos(&self, text: &str, offset: usize) -> Pos {
        let line = self.starts.partition_point(|&s| s <= offset);
        let start = self.starts[line - 1];
        let col = text.get(start..offset).map_or(1, |s| s.chars().count() + 1);
        (line, col)
    }
}

struct Ctx<'a> {
    text: &'a str,
    lines: Lines,
    diags: ParseDiagnostics,
}

impl Ctx<'_> {
    fn at(&self, offset: usize) -> Pos {
        self.lines.pos(self.text, offset)
    }

    fn set(&mut self, raw: &RawSet) -> Option<SymptomSet> {
        let mut out = SymptomSet::new();
        let mut ok = true;
        for name in raw {
            match Symptom::new(name.get_ref()) {
                Ok(s) => {
                    if !out.insert(s) {
                        let pos = self.at(name.span().start);
                        self.diags.warning(
                            pos,
                            "duplicate-symptom",
                            format!("symptom {} repeated within a set", name.get_ref()),
                        );
                    }
                }
                Err(_) => {
                    let pos = self.at(name.span().start);
                    self.diags.error(
                        pos,
                        "invalid-symptom",
                        format!(
                            "invalid symptom name {:?}: use letters, digits and '_'",
                            name.get_ref()
                        ),
                    );
                    ok = false;
                }
            }
        }
        ok.then_some(out)
    }

    fn sets(&mut self, raw: &[RawSet]) -> Option<Vec<SymptomSet>> {
        let sets: Vec<Option<SymptomSet>> = raw.iter().map(|s| self.set(s)).collect();
        sets.into_iter().collect()
    }

    fn criterion(&mut self, raw: &Spanned<RawCriterion>) -> Option<Generator> {
        let pos = self.at(raw.span().start);
        let c = raw.get_ref();
        let gen = c.gen.get_ref().as_str();
        let present = [
            ("set", c.set.is_some()),
            ("sets", c.sets.is_some()),
            ("k", c.k.is_some()),
            ("list1", c.list1.is_some()),
            ("list2", c.list2.is_some()),
            ("req", c.req.is_some()),
        ];
        let wanted: &[&str] = match gen {
            "G0" => &["set"],
            "G1" => &["set", "k"],
            "G2" => &["sets", "k"],
            "G3" => &["list1", "list2"],
            "G4" => &["list1", "list2", "req"],
            other => {
                let gpos = self.at(c.gen.span().start);
                self.diags.error(
                    gpos,
                    "unknown-variant",
                    format!("unknown generator {other:?}; expected G0, G1, G2, G3 or G4"),
                );
                return None;
            }
        };
        let mut ok = true;
        for (field, is_present) in present {
            if wanted.contains(&field) && !is_present {
                self.diags
                    .error(pos, "missing-field", format!("{gen} requires `{field}`"));
                ok = false;
            } else if !wanted.contains(&field) && is_present {
                self.diags
                    .error(pos, "unexpected-field", format!("{gen} does not take `{field}`"));
                ok = false;
            }
        }
        if !ok {
            return None;
        }
        match gen {
            "G0" => self.set(c.set.as_ref()?).map(Generator::Fixed),
            "G1" => {
                let set = self.set(c.set.as_ref()?)?;
                Some(Generator::AtLeast { set, k: c.k? })
            }
            "G2" => {
                let sets = self.sets(c.sets.as_ref()?)?;
                Some(Generator::SetCount { sets, k: c.k? })
            }
            _ => {
                let first = self.sets(c.list1.as_ref()?);
                let second = self.sets(c.list2.as_ref()?);
                let (first, second) = (first?, second?);
                Some(match c.req {
                    None => Generator::Pairing { first, second },
                    Some([r, s, t]) => Generator::SplitSetCount {
                        first,
                        second,
                        req: Requirement::new(r, s, t),
                    },
                })
            }
        }
    }
}

/// Parses a canonical TOML disorder file.
pub fn parse_canonical(text: &str) -> ParseResult<DisorderSpec> {
    let mut ctx = Ctx {
        text,
        lines: Lines::new(text),
        diags: ParseDiagnostics::default(),
    };
    let raw: RawSpec = match toml::from_str(text) {
        Ok(r) => r,
        Err(e) => {
            let pos = e.span().map_or((0, 0), |s| ctx.at(s.start));
            ctx.diags.error(pos, "syntax", e.message().trim().to_string());
            return Err(ctx.diags);
        }
    };
    let mut criteria = Vec::new();
    for c in &raw.criteria {
        if let Some(g) = ctx.criterion(c) {
            let pos = ctx.at(c.span().start);
            let label = c.get_ref().label.clone();
            criteria.push((Criterion { label, generator: g }, pos));
        }
    }
    let mut diags = ctx.diags;
    if diags.has_errors() {
        return Err(diags);
    }
    match build_spec(raw.name, criteria, &mut diags) {
        Some(spec) => Ok((spec, diags)),
        None => Err(diags),
    }
}

fn quoted(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn write_set(out: &mut String, s: &SymptomSet) {
    out.push('[');
    let names: Vec<String> = s.sorted().iter().map(|x| quoted(x.as_str())).collect();
    out.push_str(&names.join(", "));
    out.push(']');
}

fn write_sets(out: &mut String, sets: &[SymptomSet]) {
    out.push('[');
    for (i, s) in sets.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_set(out, s);
    }
    out.push(']');
}

/// Canonical TOML with sorted set elements.
pub fn to_canonical(d: &DisorderSpec) -> String {
    let mut out = format!("name = {}\n", quoted(d.name()));
    for c in d.criteria() {
        out.push_str("\n[[criteria]]\n");
        if let Some(label) = &c.label {
            out.push_str(&format!("label = {}\n", quoted(label)));
        }
        out.push_str(&format!("gen = \"{}\"\n", c.generator.kind()));
        match &c.generator {
            Generator::Fixed(s) => {
                out.push_str("set = ");
                write_set(&mut out, s);
                out.push('\n');
            }
            Generator::AtLeast { set, k } => {
                out.push_str("set = ");
                write_set(&mut out, set);
                out.push_str(&format!("\nk = {k}\n"));
            }
            Generator::SetCount { sets, k } => {
                out.push_str("sets = ");
                write_sets(&mut out, sets);
                out.push_str(&format!("\nk = {k}\n"));
            }
            Generator::Pairing { first, second } => {
                out.push_str("list1 = ");
                write_sets(&mut out, first);
                out.push_str("\nlist2 = ");
                write_sets(&mut out, second);
                out.push('\n');
            }
            Generator::SplitSetCount { first, second, req } => {
                out.push_str("list1 = ");
                write_sets(&mut out, first);
                out.push_str("\nlist2 = ");
                write_sets(&mut out, second);
                out.push_str(&format!(
                    "\nreq = [{}, {}, {}]\n",
                    req.first, req.second, req.total
                ));
            }
        }
    }
    out
}
