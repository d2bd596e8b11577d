//! Symbol interning for names of objects, fluents, actions, and reactions.
//!
//! All documents loaded into one session share a single table, so equal names
//! intern to equal symbols across theories and mappings.

use std::collections::HashMap;
use std::fmt;

/// Interned name. Symbols are only meaningful relative to the [`Names`] table
/// they were interned in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sym(u32);

/// Append-only symbol table.
#[derive(Debug, Clone, Default)]
pub struct Names {
    lookup: HashMap<Box<str>, Sym>,
    list: Vec<Box<str>>,
}

impl Names {
    pub fn new() -> Self {
        Names::default()
    }

    pub fn intern(&mut self, name: &str) -> Sym {
        if let Some(&sym) = self.lookup.get(name) {
            return sym;
        }
        let sym = Sym(self.list.len() as u32);
        self.list.push(name.into());
        self.lookup.insert(name.into(), sym);
        sym
    }

    /// Looks up an already-interned name.
    pub fn get(&self, name: &str) -> Option<Sym> {
        self.lookup.get(name).copied()
    }

    pub fn resolve(&self, sym: Sym) -> &str {
        self.list.get(sym.0 as usize).map(|s| &**s).unwrap_or("?")
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    /// Sorts symbols by their textual names.
    pub fn sort_lexicographic(&self, syms: &mut [Sym]) {
        syms.sort_by(|a, b| self.resolve(*a).cmp(self.resolve(*b)));
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}
