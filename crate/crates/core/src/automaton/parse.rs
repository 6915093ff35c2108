use std::collections::BTreeSet;

use crate::zones::{Atom, CmpOp};

use super::{ClockConstraint, Edge, Location, ModelError, TimedAutomaton};

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses a standalone clock constraint such as `x1 >= 1 && x2 < 3`.
pub fn parse_constraint(text: &str, clocks: &[String]) -> Result<ClockConstraint, ModelError> {
    parse_cc(text, clocks, 1)
}

/// Parses `x OP d && ...` against `clocks`; `true` is the empty conjunction.
pub(crate) fn parse_cc(text: &str, clocks: &[String], line: usize) -> Result<ClockConstraint, ModelError> {
    let text = text.trim();
    if text == "true" || text == "tt" {
        return Ok(ClockConstraint::tt());
    }
    let mut atoms = Vec::new();
    for part in text.split("&&") {
        let part = part.trim();
        let op_start = part
            .find(['<', '>', '='])
            .ok_or_else(|| ModelError::new(line, format!("expected a comparison in `{part}`")))?;
        let op_len = if part[op_start + 1..].starts_with('=') { 2 } else { 1 };
        let op_str = &part[op_start..op_start + op_len];
        let op = CmpOp::parse(op_str).ok_or_else(|| ModelError::new(line, format!("unknown operator `{op_str}`")))?;
        let clock = part[..op_start].trim();
        let value = part[op_start + op_len..].trim();
        let idx = clocks
            .iter()
            .position(|c| c == clock)
            .ok_or_else(|| ModelError::new(line, format!("undeclared clock `{clock}`")))?;
        let value: i64 = value
            .parse()
            .ok()
            .filter(|v| *v >= 0)
            .ok_or_else(|| ModelError::new(line, format!("constant `{value}` is not a non-negative integer")))?;
        atoms.push(Atom::new(idx + 1, op, value));
    }
    Ok(ClockConstraint::new(atoms))
}

/// Splits `rest` at the given keywords, returning (leading text, keyword
/// sections in order of appearance).
fn sections<'a>(rest: &'a str, keywords: &[&'static str]) -> (&'a str, Vec<(&'static str, &'a str)>) {
    let mut marks: Vec<(usize, &'static str)> = Vec::new();
    for kw in keywords {
        let mut from = 0;
        while let Some(pos) = rest[from..].find(kw) {
            let at = from + pos;
            let before_ok = at == 0 || rest[..at].ends_with(' ');
            let after = &rest[at + kw.len()..];
            let after_ok = kw.ends_with(':') || after.is_empty() || after.starts_with(' ');
            if before_ok && after_ok {
                marks.push((at, kw));
                break;
            }
            from = at + kw.len();
        }
    }
    marks.sort();
    let lead_end = marks.first().map_or(rest.len(), |m| m.0);
    let mut out = Vec::new();
    for (i, &(at, kw)) in marks.iter().enumerate() {
        let end = marks.get(i + 1).map_or(rest.len(), |m| m.0);
        out.push((kw, rest[at + kw.len()..end].trim()));
    }
    (rest[..lead_end].trim(), out)
}

struct RawEdge {
    line: usize,
    src: String,
    dst: String,
    action: String,
    guard: Option<String>,
    resets: Vec<String>,
}

/// Parses the line-oriented model format.
pub fn parse_model(text: &str) -> Result<TimedAutomaton, ModelError> {
    let mut name = None;
    let mut clocks: Option<Vec<String>> = None;
    let mut actions: Vec<String> = Vec::new();
    let mut props: Vec<String> = Vec::new();
    let mut locations: Vec<Location> = Vec::new();
    let mut initial = None;
    let mut raw_edges = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (head, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        let rest = rest.trim();
        match head {
            "automaton" => {
                if !is_ident(rest) {
                    return Err(ModelError::new(line, "automaton needs a name"));
                }
                name = Some(rest.to_string());
            }
            "clocks:" => clocks = Some(split_list(rest)),
            "actions:" => actions = split_list(rest),
            "props:" => props = split_list(rest),
            "location" => {
                let cs = clocks
                    .as_ref()
                    .ok_or_else(|| ModelError::new(line, "clocks must be declared before locations"))?;
                let (lead, secs) = sections(rest, &["initial", "invariant:", "labels:"]);
                if !is_ident(lead) {
                    return Err(ModelError::new(line, format!("bad location name `{lead}`")));
                }
                if locations.iter().any(|l| l.name == lead) {
                    return Err(ModelError::new(line, format!("duplicate location `{lead}`")));
                }
                let mut invariant = ClockConstraint::tt();
                let mut labels = BTreeSet::new();
                for (kw, body) in secs {
                    match kw {
                        "initial" => {
                            if !body.is_empty() {
                                return Err(ModelError::new(line, format!("unexpected `{body}`")));
                            }
                            if initial.is_some() {
                                return Err(ModelError::new(line, "more than one initial location"));
                            }
                            initial = Some(locations.len());
                        }
                        "invariant:" => {
                            invariant = parse_cc(body, cs, line)?;
                            if !invariant.is_past_closed() {
                                return Err(ModelError::new(
                                    line,
                                    "invariants may only use upper bounds (< or <=)",
                                ));
                            }
                        }
                        _ => {
                            for p in split_list(body) {
                                if !props.contains(&p) {
                                    return Err(ModelError::new(line, format!("undeclared proposition `{p}`")));
                                }
                                labels.insert(p);
                            }
                        }
                    }
                }
                locations.push(Location {
                    name: lead.to_string(),
                    invariant,
                    labels,
                });
            }
            "edge" => {
                let (lead, secs) = sections(rest, &["on", "when", "reset"]);
                let (src, dst) = lead
                    .split_once("->")
                    .ok_or_else(|| ModelError::new(line, "expected `src -> dst`"))?;
                let mut e = RawEdge {
                    line,
                    src: src.trim().to_string(),
                    dst: dst.trim().to_string(),
                    action: String::new(),
                    guard: None,
                    resets: Vec::new(),
                };
                for (kw, body) in secs {
                    match kw {
                        "on" => e.action = body.to_string(),
                        "when" => e.guard = Some(body.to_string()),
                        _ => e.resets = split_list(body),
                    }
                }
                if e.action.is_empty() {
                    return Err(ModelError::new(line, "edge needs `on <action>`"));
                }
                raw_edges.push(e);
            }
            other => return Err(ModelError::new(line, format!("unexpected `{other}`"))),
        }
    }

    let name = name.ok_or_else(|| ModelError::new(1, "missing `automaton <name>`"))?;
    let clocks = clocks.ok_or_else(|| ModelError::new(1, "missing `clocks:`"))?;
    if clocks.is_empty() {
        return Err(ModelError::new(1, "at least one clock is required"));
    }
    let initial = initial.ok_or_else(|| ModelError::new(1, "no location is marked initial"))?;

    let mut edges = Vec::with_capacity(raw_edges.len());
    for e in raw_edges {
        let loc = |n: &str| {
            locations
                .iter()
                .position(|l| l.name == n)
                .ok_or_else(|| ModelError::new(e.line, format!("undeclared location `{n}`")))
        };
        let source = loc(&e.src)?;
        let target = loc(&e.dst)?;
        let action = actions
            .iter()
            .position(|a| *a == e.action)
            .ok_or_else(|| ModelError::new(e.line, format!("undeclared action `{}`", e.action)))?;
        let guard = match &e.guard {
            Some(g) => parse_cc(g, &clocks, e.line)?,
            None => ClockConstraint::tt(),
        };
        let mut resets = Vec::new();
        for r in &e.resets {
            let idx = clocks
                .iter()
                .position(|c| c == r)
                .ok_or_else(|| ModelError::new(e.line, format!("undeclared clock `{r}`")))?;
            resets.push(idx + 1);
        }
        edges.push(Edge {
            source,
            target,
            action,
            guard,
            resets,
        });
    }

    let ta = TimedAutomaton {
        name,
        clocks,
        actions,
        props,
        locations,
        initial,
        edges,
    };
    ta.validate()?;
    Ok(ta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::train;

    #[test]
    fn train_has_expected_shape() {
        let ta = train();
        assert_eq!(ta.locations.len(), 3);
        assert_eq!(ta.actions.len(), 3);
        assert_eq!(ta.clocks, vec!["x1"]);
        let near = ta.location_index("near").unwrap();
        assert_eq!(ta.invariant(near).atoms, vec![Atom::new(1, CmpOp::Le, 4)]);
    }

    #[test]
    fn empty_edge_section_is_fine() {
        let ta = parse_model("automaton a\nclocks: x\nactions:\nprops:\nlocation l initial\n").unwrap();
        assert!(ta.edges.is_empty());
    }

    #[test]
    fn undeclared_clock_is_reported_with_line() {
        let text = "automaton a\nclocks: x1\nactions: go\nprops:\nlocation l initial\nedge l -> l on go when x9 < 2\n";
        let err = parse_model(text).unwrap_err();
        assert_eq!(err.line, 6);
        assert!(err.message.contains("x9"), "{err}");
    }

    #[test]
    fn lower_bound_invariant_is_rejected() {
        let text = "automaton a\nclocks: x\nactions:\nprops:\nlocation l initial invariant: x >= 1\n";
        assert!(parse_model(text).is_err());
    }

    #[test]
    fn rational_constants_are_rejected() {
        let text = "automaton a\nclocks: x\nactions:\nprops:\nlocation l initial invariant: x <= 1.5\n";
        assert!(parse_model(text).is_err());
    }

    #[test]
    fn comments_and_spacing_are_ignored() {
        let text = "automaton a # name\n\nclocks: x,y\nactions: t\nprops: p\nlocation l initial invariant: x<=2&&y<3 labels: p\nedge l -> l on t when y>=1 reset x, y\n";
        let ta = parse_model(text).unwrap();
        assert_eq!(ta.locations[0].invariant.atoms.len(), 2);
        assert_eq!(ta.edges[0].resets, vec![1, 2]);
    }
}
