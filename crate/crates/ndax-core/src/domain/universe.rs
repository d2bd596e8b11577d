//! Object sorts, reaction sorts, and runtime values.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::domain::SortId;
use crate::intern::{Names, Sym};

/// A named finite sort of object constants, kept in lexicographic order.
#[derive(Debug, Clone)]
pub struct SortDef {
    pub name: Sym,
    pub objects: Vec<Sym>,
}

/// All sorts of a theory plus a reverse index from object to its sort.
#[derive(Debug, Clone, Default)]
pub struct Sorts {
    pub defs: Vec<SortDef>,
    by_name: HashMap<Sym, SortId>,
    object_index: HashMap<Sym, (SortId, u32)>,
}

impl Sorts {
    pub fn new() -> Self {
        Sorts::default()
    }

    /// Adds a sort whose objects are already deduplicated; objects are sorted
    /// lexicographically here. Each object constant may belong to one sort
    /// only.
    pub fn add(&mut self, names: &Names, name: Sym, mut objects: Vec<Sym>) -> Result<SortId, String> {
        if self.by_name.contains_key(&name) {
            return Err(format!("duplicate sort {}", names.resolve(name)));
        }
        if objects.is_empty() {
            return Err(format!("sort {} is empty", names.resolve(name)));
        }
        names.sort_lexicographic(&mut objects);
        objects.dedup();
        let id = self.defs.len();
        for &obj in &objects {
            if self.object_index.contains_key(&obj) {
                return Err(format!(
                    "object {} already belongs to another sort",
                    names.resolve(obj)
                ));
            }
        }
        for (i, &obj) in objects.iter().enumerate() {
            self.object_index.insert(obj, (id, i as u32));
        }
        self.defs.push(SortDef { name, objects });
        self.by_name.insert(name, id);
        Ok(id)
    }

    pub fn by_name(&self, name: Sym) -> Option<SortId> {
        self.by_name.get(&name).copied()
    }

    pub fn def(&self, id: SortId) -> &SortDef {
        &self.defs[id]
    }

    /// Sort and dense in-sort index of an object constant.
    pub fn object(&self, obj: Sym) -> Option<(SortId, u32)> {
        self.object_index.get(&obj).copied()
    }

    pub fn contains(&self, sort: SortId, obj: Sym) -> bool {
        self.object(obj).map(|(s, _)| s == sort).unwrap_or(false)
    }
}

/// A ground status-update atom, member of a set-valued reaction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UpdateAtom {
    pub family: Sym,
    pub args: Vec<Sym>,
}

/// Declared family of update atoms, e.g. one per closable road.
#[derive(Debug, Clone)]
pub struct UpdateFamily {
    pub name: Sym,
    pub param_sorts: Vec<SortId>,
}

/// The set of reaction values an action's environment may answer with.
/// Identity is the token list or subset base; the precomputed subset table is
/// carried alongside so enumeration is shared rather than rebuilt.
#[derive(Debug, Clone)]
pub enum ReactionSort {
    /// Finitely many named reaction tokens.
    Tokens(Arc<Vec<Sym>>),
    /// Every subset of a base list of update atoms; contradictory subsets are
    /// excluded by the action's precondition, not by the sort itself.
    Subsets { base: Arc<Vec<UpdateAtom>>, all: Arc<Vec<Value>> },
}

impl PartialEq for ReactionSort {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (ReactionSort::Tokens(a), ReactionSort::Tokens(b)) => a == b,
            (ReactionSort::Subsets { base: a, .. }, ReactionSort::Subsets { base: b, .. }) => {
                a == b
            }
            _ => false,
        }
    }
}

impl Eq for ReactionSort {}

impl PartialOrd for ReactionSort {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ReactionSort {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (ReactionSort::Tokens(a), ReactionSort::Tokens(b)) => a.cmp(b),
            (ReactionSort::Subsets { base: a, .. }, ReactionSort::Subsets { base: b, .. }) => {
                a.cmp(b)
            }
            (ReactionSort::Tokens(_), ReactionSort::Subsets { .. }) => std::cmp::Ordering::Less,
            (ReactionSort::Subsets { .. }, ReactionSort::Tokens(_)) => {
                std::cmp::Ordering::Greater
            }
        }
    }
}

impl std::hash::Hash for ReactionSort {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            ReactionSort::Tokens(tokens) => tokens.hash(state),
            ReactionSort::Subsets { base, .. } => base.hash(state),
        }
    }
}

impl ReactionSort {
    /// Builds the subset sort over a base list, materializing every subset in
    /// binary-counter order once.
    pub fn subsets(base: Vec<UpdateAtom>) -> ReactionSort {
        let n = base.len();
        let mut all = Vec::with_capacity(1 << n);
        for mask in 0u32..(1u32 << n) {
            let set: BTreeSet<UpdateAtom> = base
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, atom)| atom.clone())
                .collect();
            all.push(Value::Set(Arc::new(set)));
        }
        ReactionSort::Subsets { base: Arc::new(base), all: Arc::new(all) }
    }

    pub fn contains(&self, value: &Value) -> bool {
        match (self, value) {
            (ReactionSort::Tokens(tokens), Value::Obj(sym)) => tokens.contains(sym),
            (ReactionSort::Subsets { base, .. }, Value::Set(set)) => {
                set.iter().all(|atom| base.contains(atom))
            }
            _ => false,
        }
    }

    /// Number of values enumerated by [`ReactionSort::enumerate`].
    pub fn count(&self) -> usize {
        match self {
            ReactionSort::Tokens(tokens) => tokens.len(),
            ReactionSort::Subsets { base, .. } => 1usize << base.len(),
        }
    }

    /// All values in deterministic order: tokens as declared (lexicographic
    /// after lowering), subsets in binary-counter order over the base list.
    pub fn enumerate(&self) -> Arc<Vec<Value>> {
        match self {
            ReactionSort::Tokens(tokens) => {
                Arc::new(tokens.iter().map(|&t| Value::Obj(t)).collect())
            }
            ReactionSort::Subsets { all, .. } => Arc::clone(all),
        }
    }
}

/// Finite quantifier domain, resolved to concrete values at lowering so a
/// formula can be moved between theories that share a name table.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarDomain {
    Objects { sort: Sym, values: Arc<Vec<Sym>> },
    Reactions { action: Sym, sort: ReactionSort },
}

impl VarDomain {
    pub fn contains(&self, value: &Value) -> bool {
        match (self, value) {
            (VarDomain::Objects { values, .. }, Value::Obj(sym)) => values.contains(sym),
            (VarDomain::Reactions { sort, .. }, v) => sort.contains(v),
            _ => false,
        }
    }

    pub fn enumerate(&self) -> Arc<Vec<Value>> {
        match self {
            VarDomain::Objects { values, .. } => {
                Arc::new(values.iter().map(|&o| Value::Obj(o)).collect())
            }
            VarDomain::Reactions { sort, .. } => sort.enumerate(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            VarDomain::Objects { values, .. } => values.len(),
            VarDomain::Reactions { sort, .. } => sort.count(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn display(&self, names: &Names) -> String {
        match self {
            VarDomain::Objects { sort, .. } => names.resolve(*sort).to_string(),
            VarDomain::Reactions { action, .. } => {
                format!("reactions({})", names.resolve(*action))
            }
        }
    }
}

/// A runtime value: an object constant (reaction tokens included) or a
/// set-valued reaction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Obj(Sym),
    Set(Arc<BTreeSet<UpdateAtom>>),
}

impl Value {
    pub fn empty_set() -> Self {
        Value::Set(Arc::new(BTreeSet::new()))
    }

    pub fn as_obj(&self) -> Option<Sym> {
        match self {
            Value::Obj(sym) => Some(*sym),
            Value::Set(_) => None,
        }
    }

    /// Renders the value; sets are shown in lexicographic member order.
    pub fn display(&self, names: &Names) -> String {
        match self {
            Value::Obj(sym) => names.resolve(*sym).to_string(),
            Value::Set(set) => {
                let mut members: Vec<String> = set
                    .iter()
                    .map(|atom| {
                        let args: Vec<&str> =
                            atom.args.iter().map(|&a| names.resolve(a)).collect();
                        if args.is_empty() {
                            names.resolve(atom.family).to_string()
                        } else {
                            format!("{}({})", names.resolve(atom.family), args.join(","))
                        }
                    })
                    .collect();
                members.sort();
                format!("{{{}}}", members.join(","))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names_with(items: &[&str]) -> (Names, Vec<Sym>) {
        let mut names = Names::new();
        let syms = items.iter().map(|s| names.intern(s)).collect();
        (names, syms)
    }

    #[test]
    fn sorts_keep_lexicographic_object_order() {
        let (mut names, _) = names_with(&[]);
        let c = names.intern("carol");
        let a = names.intern("alice");
        let b = names.intern("bob");
        let loc = names.intern("Agent");
        let mut sorts = Sorts::new();
        let id = sorts.add(&names, loc, vec![c, a, b]).unwrap();
        let def = sorts.def(id);
        let rendered: Vec<&str> = def.objects.iter().map(|&o| names.resolve(o)).collect();
        assert_eq!(rendered, vec!["alice", "bob", "carol"]);
        assert_eq!(sorts.object(b), Some((id, 1)));
    }

    #[test]
    fn duplicate_sort_membership_is_rejected() {
        let (mut names, _) = names_with(&[]);
        let x = names.intern("x");
        let s1 = names.intern("S1");
        let s2 = names.intern("S2");
        let mut sorts = Sorts::new();
        sorts.add(&names, s1, vec![x]).unwrap();
        assert!(sorts.add(&names, s2, vec![x]).is_err());
    }

    #[test]
    fn token_reactions_enumerate_in_declared_order() {
        let (mut names, _) = names_with(&[]);
        let flat = names.intern("FlatTire");
        let ok = names.intern("NoFlatTire");
        let sort = ReactionSort::Tokens(Arc::new(vec![flat, ok]));
        assert_eq!(sort.count(), 2);
        assert_eq!(
            *sort.enumerate(),
            vec![Value::Obj(flat), Value::Obj(ok)]
        );
        assert!(sort.contains(&Value::Obj(flat)));
        assert!(!sort.contains(&Value::empty_set()));
    }

    #[test]
    fn subset_reactions_enumerate_all_subsets() {
        let (mut names, _) = names_with(&[]);
        let close = names.intern("close");
        let open = names.intern("open");
        let r = names.intern("RtA");
        let base = vec![
            UpdateAtom { family: close, args: vec![r] },
            UpdateAtom { family: open, args: vec![r] },
        ];
        let sort = ReactionSort::subsets(base.clone());
        let values = sort.enumerate();
        assert_eq!(values.len(), 4);
        assert_eq!(values[0], Value::empty_set());
        assert!(sort.contains(&values[3]));
        let foreign = Value::Set(Arc::new(
            [UpdateAtom { family: close, args: vec![close] }].into_iter().collect(),
        ));
        assert!(!sort.contains(&foreign));
    }

    #[test]
    fn set_value_display_is_sorted() {
        let (mut names, _) = names_with(&[]);
        let close = names.intern("close_Rt");
        let rt_b = names.intern("Rt_B");
        let rt_a = names.intern("Rt_A");
        let set: BTreeSet<UpdateAtom> = [
            UpdateAtom { family: close, args: vec![rt_b] },
            UpdateAtom { family: close, args: vec![rt_a] },
        ]
        .into_iter()
        .collect();
        let value = Value::Set(Arc::new(set));
        assert_eq!(value.display(&names), "{close_Rt(Rt_A),close_Rt(Rt_B)}");
    }
}
