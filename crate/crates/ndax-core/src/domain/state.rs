//! Packed truth assignments over the ground fluent atoms of a theory.

use std::collections::HashMap;

use crate::domain::universe::Sorts;
use crate::domain::{FluentId, SortId};
use crate::intern::{Names, Sym};

/// Enumerates every ground fluent atom of a theory and assigns it a dense
/// index. Fluents are laid out in declaration order (lexicographic after
/// lowering) and argument tuples in mixed-radix order over the sorted object
/// lists, so indices are lexicographic over rendered atom names.
#[derive(Debug, Clone)]
pub struct AtomTable {
    /// Per fluent: starting index and per-parameter (sort, stride).
    layout: Vec<FluentLayout>,
    total: usize,
}

#[derive(Debug, Clone)]
struct FluentLayout {
    base: usize,
    dims: Vec<(SortId, usize)>,
}

impl AtomTable {
    pub fn new(sorts: &Sorts, fluent_param_sorts: &[Vec<SortId>]) -> AtomTable {
        let mut layout = Vec::with_capacity(fluent_param_sorts.len());
        let mut next = 0usize;
        for param_sorts in fluent_param_sorts {
            let mut dims = vec![(0usize, 0usize); param_sorts.len()];
            let mut stride = 1usize;
            for (i, &sort) in param_sorts.iter().enumerate().rev() {
                dims[i] = (sort, stride);
                stride *= sorts.def(sort).objects.len();
            }
            layout.push(FluentLayout { base: next, dims });
            next += stride;
        }
        AtomTable { layout, total: next }
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn fluent_count(&self) -> usize {
        self.layout.len()
    }

    /// Index range `[start, end)` of one fluent's atoms.
    pub fn fluent_range(&self, fluent: FluentId) -> (usize, usize) {
        let base = self.layout[fluent].base;
        let end = self
            .layout
            .get(fluent + 1)
            .map(|l| l.base)
            .unwrap_or(self.total);
        (base, end)
    }

    /// Index of a ground atom; `None` on arity or sort mismatch.
    pub fn atom_id(&self, sorts: &Sorts, fluent: FluentId, args: &[Sym]) -> Option<usize> {
        let layout = &self.layout[fluent];
        if args.len() != layout.dims.len() {
            return None;
        }
        let mut id = layout.base;
        for (&arg, &(sort, stride)) in args.iter().zip(&layout.dims) {
            let (arg_sort, idx) = sorts.object(arg)?;
            if arg_sort != sort {
                return None;
            }
            id += idx as usize * stride;
        }
        Some(id)
    }

    /// Reconstructs the (fluent, args) of an atom index.
    pub fn atom(&self, sorts: &Sorts, id: usize) -> (FluentId, Vec<Sym>) {
        let fluent = match self.layout.binary_search_by(|l| l.base.cmp(&id)) {
            Ok(f) => f,
            Err(ins) => ins - 1,
        };
        // Skip empty layouts that share a base with their successor.
        let fluent = (0..=fluent)
            .rev()
            .find(|&f| {
                let (start, end) = self.fluent_range(f);
                id >= start && id < end
            })
            .expect("atom id out of range");
        let layout = &self.layout[fluent];
        let mut rem = id - layout.base;
        let mut args = Vec::with_capacity(layout.dims.len());
        for &(sort, stride) in &layout.dims {
            let idx = rem / stride;
            rem %= stride;
            args.push(sorts.def(sort).objects[idx]);
        }
        (fluent, args)
    }
}

/// Total truth assignment over a theory's ground atoms. Bits beyond the atom
/// count stay zero, so derived equality and hashing are extensional.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State {
    bits: Box<[u64]>,
}

impl State {
    pub fn empty(atom_count: usize) -> State {
        State {
            bits: vec![0u64; atom_count.div_ceil(64)].into_boxed_slice(),
        }
    }

    pub fn get(&self, atom: usize) -> bool {
        self.bits[atom / 64] & (1u64 << (atom % 64)) != 0
    }

    pub fn set(&mut self, atom: usize, value: bool) {
        let mask = 1u64 << (atom % 64);
        if value {
            self.bits[atom / 64] |= mask;
        } else {
            self.bits[atom / 64] &= !mask;
        }
    }

    /// Indices of all true atoms, ascending.
    pub fn true_atoms(&self, atom_count: usize) -> Vec<usize> {
        (0..atom_count).filter(|&i| self.get(i)).collect()
    }
}

/// Deduplicating store assigning dense ids to states.
#[derive(Debug, Default)]
pub struct StateStore {
    index: HashMap<State, u32>,
    list: Vec<State>,
}

impl StateStore {
    pub fn new() -> StateStore {
        StateStore::default()
    }

    pub fn insert(&mut self, state: State) -> u32 {
        if let Some(&id) = self.index.get(&state) {
            return id;
        }
        let id = self.list.len() as u32;
        self.index.insert(state.clone(), id);
        self.list.push(state);
        id
    }

    pub fn get_id(&self, state: &State) -> Option<u32> {
        self.index.get(state).copied()
    }

    pub fn state(&self, id: u32) -> &State {
        &self.list[id as usize]
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }
}

/// Renders an atom index as `Fluent(arg,...)`.
pub(crate) fn render_atom(
    names: &Names,
    fluent_name: Sym,
    args: &[Sym],
) -> String {
    if args.is_empty() {
        names.resolve(fluent_name).to_string()
    } else {
        let rendered: Vec<&str> = args.iter().map(|&a| names.resolve(a)).collect();
        format!("{}({})", names.resolve(fluent_name), rendered.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intern::Names;

    fn tiny_universe() -> (Names, Sorts, AtomTable) {
        let mut names = Names::new();
        let a = names.intern("a");
        let b = names.intern("b");
        let sort = names.intern("S");
        let mut sorts = Sorts::new();
        sorts.add(&names, sort, vec![b, a]).unwrap();
        // Fluent 0: P(S,S); fluent 1: Q; fluent 2: R(S).
        let table = AtomTable::new(&sorts, &[vec![0, 0], vec![], vec![0]]);
        (names, sorts, table)
    }

    #[test]
    fn atom_ids_are_dense_and_invertible() {
        let (_names, sorts, table) = tiny_universe();
        assert_eq!(table.len(), 4 + 1 + 2);
        for id in 0..table.len() {
            let (fluent, args) = table.atom(&sorts, id);
            assert_eq!(table.atom_id(&sorts, fluent, &args), Some(id));
        }
    }

    #[test]
    fn fluent_ranges_partition_the_table() {
        let (_names, _sorts, table) = tiny_universe();
        assert_eq!(table.fluent_range(0), (0, 4));
        assert_eq!(table.fluent_range(1), (4, 5));
        assert_eq!(table.fluent_range(2), (5, 7));
    }

    #[test]
    fn sort_mismatch_yields_no_atom() {
        let (mut names, sorts, table) = tiny_universe();
        let stranger = names.intern("zz");
        assert_eq!(table.atom_id(&sorts, 2, &[stranger]), None);
        let a = names.get("a").unwrap();
        assert_eq!(table.atom_id(&sorts, 1, &[a]), None);
    }

    #[test]
    fn state_bits_round_trip() {
        let mut state = State::empty(130);
        state.set(0, true);
        state.set(64, true);
        state.set(129, true);
        assert!(state.get(0) && state.get(64) && state.get(129));
        assert!(!state.get(1));
        state.set(64, false);
        assert!(!state.get(64));
        assert_eq!(state.true_atoms(130), vec![0, 129]);
    }

    #[test]
    fn equal_assignments_are_equal_states() {
        let mut s1 = State::empty(10);
        let mut s2 = State::empty(10);
        s1.set(3, true);
        s2.set(3, true);
        assert_eq!(s1, s2);
        s2.set(4, true);
        assert_ne!(s1, s2);
    }

    #[test]
    fn state_store_deduplicates() {
        let mut store = StateStore::new();
        let mut s = State::empty(8);
        s.set(1, true);
        let id1 = store.insert(s.clone());
        let id2 = store.insert(s.clone());
        assert_eq!(id1, id2);
        assert_eq!(store.len(), 1);
        assert_eq!(store.state(id1), &s);
    }
}
