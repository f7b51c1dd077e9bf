use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::StructureError;
use crate::model::{Dag, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditKind {
    Add,
    Remove,
}

impl EditKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EditKind::Add => "add",
            EditKind::Remove => "remove",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub kind: EditKind,
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Edit {
    pub fn add(from: impl Into<String>, to: impl Into<String>) -> Self {
        Edit {
            kind: EditKind::Add,
            from: from.into(),
            to: to.into(),
            note: String::new(),
        }
    }

    pub fn remove(from: impl Into<String>, to: impl Into<String>) -> Self {
        Edit {
            kind: EditKind::Remove,
            ..Edit::add(from, to)
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

impl fmt::Display for Edit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.kind.as_str(), self.from, self.to)?;
        if !self.note.is_empty() {
            write!(f, " # {}", self.note)?;
        }
        Ok(())
    }
}

/// Ordered arc additions and removals. Text form is one edit per line,
/// `add FROM TO` or `remove FROM TO`, with `#` starting a comment; a comment
/// on an edit line becomes that edit's note.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditScript {
    pub edits: Vec<Edit>,
}

impl EditScript {
    pub fn new(edits: Vec<Edit>) -> Self {
        EditScript { edits }
    }

    pub fn is_empty(&self) -> bool {
        self.edits.is_empty()
    }

    pub fn len(&self) -> usize {
        self.edits.len()
    }

    /// Removals of arcs only in `base`, then additions of arcs only in
    /// `target`. Every intermediate graph is a subgraph of `target`, so the
    /// additions never close a cycle.
    pub fn between(base: &Dag, target: &Dag) -> Result<Self, StructureError> {
        if base.nodes() != target.nodes() {
            return Err(StructureError::Constraint(
                "graphs have different node lists".into(),
            ));
        }
        let before = base.arcs();
        let after = target.arcs();
        let removes = before
            .iter()
            .filter(|a| !after.contains(a))
            .map(|(f, t)| Edit::remove(f, t));
        let adds = after
            .iter()
            .filter(|a| !before.contains(a))
            .map(|(f, t)| Edit::add(f, t));
        Ok(EditScript::new(removes.chain(adds).collect()))
    }

    pub fn to_text(&self) -> String {
        self.edits.iter().map(|e| format!("{e}\n")).collect()
    }
}

impl FromStr for EditScript {
    type Err = StructureError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut edits = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let (body, note) = match raw.split_once('#') {
                Some((b, c)) => (b, c.trim()),
                None => (raw, ""),
            };
            let words: Vec<&str> = body.split_whitespace().collect();
            let edit = match words.as_slice() {
                [] => continue,
                ["add", from, to] => Edit::add(*from, *to),
                ["remove", from, to] => Edit::remove(*from, *to),
                _ => {
                    return Err(StructureError::Parse {
                        line: n + 1,
                        message: format!("expected `add FROM TO` or `remove FROM TO`, got `{}`", body.trim()),
                    })
                }
            };
            edits.push(edit.with_note(note));
        }
        Ok(EditScript { edits })
    }
}

impl fmt::Display for EditScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Applies edits in order, rejecting no-ops and cycle-closing additions.
pub fn apply_edits(dag: &Dag, script: &EditScript) -> Result<Dag, StructureError> {
    let mut out = dag.clone();
    for (i, e) in script.edits.iter().enumerate() {
        let index = |id: &str| {
            out.index_of(id)
                .ok_or_else(|| StructureError::Model(ModelError::UnknownVariable(id.to_string())))
        };
        let (from, to) = (index(&e.from)?, index(&e.to)?);
        match e.kind {
            EditKind::Add => {
                if from == to || out.creates_cycle(from, to) {
                    return Err(StructureError::Model(ModelError::Cycle(e.to.clone())));
                }
                if out.parent_indices(to).contains(&from) {
                    return Err(StructureError::NoOp(format!("edit {}: arc {} -> {} already present", i + 1, e.from, e.to)));
                }
                out.insert_arc(from, to)?;
            }
            EditKind::Remove => {
                if !out.delete_arc(from, to) {
                    return Err(StructureError::NoOp(format!("edit {}: arc {} -> {} absent", i + 1, e.from, e.to)));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Dag {
        Dag::new(["A", "B", "C"], [("B", vec!["A"])]).unwrap()
    }

    #[test]
    fn empty_script_is_identity() {
        assert_eq!(apply_edits(&ab(), &EditScript::default()).unwrap(), ab());
    }

    #[test]
    fn reverse_arc_is_a_cycle() {
        let s = EditScript::new(vec![Edit::add("B", "A")]);
        assert_eq!(apply_edits(&ab(), &s).unwrap_err().name(), "CycleError");
    }

    #[test]
    fn no_ops_rejected() {
        for e in [Edit::add("A", "B"), Edit::remove("A", "C")] {
            let err = apply_edits(&ab(), &EditScript::new(vec![e])).unwrap_err();
            assert_eq!(err.name(), "NoOpError");
        }
    }

    #[test]
    fn unknown_node() {
        let err = apply_edits(&ab(), &EditScript::new(vec![Edit::add("A", "Q")])).unwrap_err();
        assert_eq!(err.name(), "UnknownVariable");
    }

    #[test]
    fn edits_apply_in_order() {
        let s: EditScript = "remove A B\nadd B A # flip\nadd C A".parse().unwrap();
        let d = apply_edits(&ab(), &s).unwrap();
        assert_eq!(d.parents("A").unwrap(), vec!["B", "C"]);
        assert!(!d.has_arc("A", "B"));
    }

    #[test]
    fn text_round_trip() {
        let text = "# header comment\n\nadd v1 v8 # sex drives smoking\nremove v2 v5\n";
        let s: EditScript = text.parse().unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.edits[0].note, "sex drives smoking");
        assert_eq!(s.to_text().parse::<EditScript>().unwrap(), s);
        assert_eq!(s.to_text(), "add v1 v8 # sex drives smoking\nremove v2 v5\n");
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = "add A B\nflip A B\n".parse::<EditScript>().unwrap_err();
        assert!(matches!(err, StructureError::Parse { line: 2, .. }));
        assert!("add A".parse::<EditScript>().is_err());
    }

    #[test]
    fn between_reaches_target() {
        let target = Dag::new(["A", "B", "C"], [("A", vec!["B"]), ("C", vec!["A", "B"])]).unwrap();
        let s = EditScript::between(&ab(), &target).unwrap();
        assert_eq!(apply_edits(&ab(), &s).unwrap(), target);
        assert_eq!(s.edits[0], Edit::remove("A", "B"));
    }
}
