use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{KgeError, Result};

/// Bijective maps between surface strings and dense ids for entities and
/// relations. Ids are assigned in first-occurrence order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocab {
    entities: Vec<String>,
    relations: Vec<String>,
    entity_to_id: HashMap<String, usize>,
    relation_to_id: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabJson {
    entities: serde_json::Map<String, serde_json::Value>,
    relations: serde_json::Map<String, serde_json::Value>,
}

impl Vocab {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern_entity(&mut self, name: &str) -> usize {
        intern(&mut self.entities, &mut self.entity_to_id, name)
    }

    pub fn intern_relation(&mut self, name: &str) -> usize {
        intern(&mut self.relations, &mut self.relation_to_id, name)
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    /// Number of original relations (without inverses).
    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn entity_id(&self, name: &str) -> Option<usize> {
        self.entity_to_id.get(name).copied()
    }

    pub fn relation_id(&self, name: &str) -> Option<usize> {
        self.relation_to_id.get(name).copied()
    }

    pub fn entity_name(&self, id: usize) -> Option<&str> {
        self.entities.get(id).map(String::as_str)
    }

    /// Name of a relation id; inverse ids render as `name⁻¹`.
    pub fn relation_name(&self, id: usize) -> Option<String> {
        let n = self.relations.len();
        if id < n {
            Some(self.relations[id].clone())
        } else {
            self.relations.get(id - n).map(|s| format!("{s}⁻¹"))
        }
    }

    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn relations(&self) -> &[String] {
        &self.relations
    }

    /// JSON with two objects, `"entities"` and `"relations"`, mapping names to ids.
    pub fn to_json(&self) -> String {
        let obj = |names: &[String]| {
            names
                .iter()
                .enumerate()
                .map(|(i, s)| (s.clone(), serde_json::Value::from(i)))
                .collect::<serde_json::Map<_, _>>()
        };
        let v = VocabJson {
            entities: obj(&self.entities),
            relations: obj(&self.relations),
        };
        serde_json::to_string_pretty(&v).expect("vocab serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: VocabJson =
            serde_json::from_str(text).map_err(|e| KgeError::Compat(format!("vocab json: {e}")))?;
        let decode = |m: serde_json::Map<String, serde_json::Value>| -> Result<Vec<String>> {
            let mut names = vec![None; m.len()];
            for (name, id) in m {
                let id = id
                    .as_u64()
                    .map(|x| x as usize)
                    .filter(|&x| x < names.len())
                    .ok_or_else(|| KgeError::Compat(format!("bad id for {name:?}")))?;
                if names[id].replace(name).is_some() {
                    return Err(KgeError::Compat(format!("duplicate id {id}")));
                }
            }
            Ok(names.into_iter().map(Option::unwrap).collect())
        };
        let mut vocab = Vocab::new();
        for e in decode(v.entities)? {
            vocab.intern_entity(&e);
        }
        for r in decode(v.relations)? {
            vocab.intern_relation(&r);
        }
        Ok(vocab)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| KgeError::io(path, e))
    }
}

fn intern(names: &mut Vec<String>, ids: &mut HashMap<String, usize>, name: &str) -> usize {
    if let Some(&id) = ids.get(name) {
        return id;
    }
    let id = names.len();
    names.push(name.to_owned());
    ids.insert(name.to_owned(), id);
    id
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_dense_first_occurrence() {
        let mut v = Vocab::new();
        assert_eq!(v.intern_entity("b"), 0);
        assert_eq!(v.intern_entity("a"), 1);
        assert_eq!(v.intern_entity("b"), 0);
        assert_eq!(v.num_entities(), 2);
        for i in 0..v.num_entities() {
            assert_eq!(v.entity_id(v.entity_name(i).unwrap()), Some(i));
        }
    }

    #[test]
    fn inverse_relation_names() {
        let mut v = Vocab::new();
        v.intern_relation("likes");
        assert_eq!(v.relation_name(0).as_deref(), Some("likes"));
        assert_eq!(v.relation_name(1).as_deref(), Some("likes⁻¹"));
        assert_eq!(v.relation_name(2), None);
    }

    #[test]
    fn json_round_trip() {
        let mut v = Vocab::new();
        for e in ["x", "y", "z"] {
            v.intern_entity(e);
        }
        v.intern_relation("r");
        let back = Vocab::from_json(&v.to_json()).unwrap();
        assert_eq!(back, v);
    }
}
