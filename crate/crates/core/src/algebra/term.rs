//! Composition trees with typed input slots.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{Signature, Sort, SymbolKind};
use crate::error::CoreError;
use crate::Result;

/// A term: leaves are typed input slots, internal nodes are primitive
/// symbols applied to argument terms.
///
/// Set-lifting is part of the sort discipline: an argument of sort
/// `set<s>` may feed an input declared as `s`. Functions then map over
/// the set and union their outputs; predicates hold if any element
/// satisfies them. Composing relation-valued symbols this way is
/// relational join.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Term {
    Input { slot: usize, sort: Sort },
    Apply { symbol: String, args: Vec<Term> },
}

impl core::fmt::Display for Term {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Term::Input { slot, .. } => write!(f, "#{slot}"),
            Term::Apply { symbol, args } => {
                write!(f, "{symbol}(")?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{arg}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl Term {
    pub fn input(slot: usize, sort: Sort) -> Term {
        Term::Input { slot, sort }
    }

    pub fn apply(symbol: &str, args: Vec<Term>) -> Term {
        Term::Apply {
            symbol: symbol.into(),
            args,
        }
    }

    /// Number of input slots, `max slot + 1` (0 for closed terms).
    pub fn arity(&self) -> usize {
        match self {
            Term::Input { slot, .. } => slot + 1,
            Term::Apply { args, .. } => args.iter().map(Term::arity).max().unwrap_or(0),
        }
    }

    /// Height of the composition tree; bare inputs have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::Input { .. } => 0,
            Term::Apply { args, .. } => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    /// Symbols occurring anywhere in the tree.
    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        if let Term::Apply { symbol, args } = self {
            out.insert(symbol.clone());
            for arg in args {
                arg.collect_symbols(out);
            }
        }
    }

    pub fn uses(&self, symbol: &str) -> bool {
        match self {
            Term::Input { .. } => false,
            Term::Apply { symbol: s, args } => s == symbol || args.iter().any(|a| a.uses(symbol)),
        }
    }

    /// The sort of each input slot; conflicting uses are an error.
    pub fn slot_sorts(&self) -> Result<BTreeMap<usize, Sort>> {
        let mut map = BTreeMap::new();
        self.collect_slots(&mut map)?;
        Ok(map)
    }

    fn collect_slots(&self, map: &mut BTreeMap<usize, Sort>) -> Result<()> {
        match self {
            Term::Input { slot, sort } => {
                if let Some(existing) = map.get(slot) {
                    if existing != sort {
                        return Err(CoreError::TypeMismatch(format!(
                            "slot #{slot} used with sorts '{existing}' and '{sort}'"
                        )));
                    }
                } else {
                    map.insert(*slot, sort.clone());
                }
                Ok(())
            }
            Term::Apply { args, .. } => {
                for arg in args {
                    arg.collect_slots(map)?;
                }
                Ok(())
            }
        }
    }

    /// Infer the output sort against a signature, enforcing sort-correct
    /// wiring with set-lifting.
    pub fn output_sort(&self, signature: &Signature) -> Result<Sort> {
        match self {
            Term::Input { sort, .. } => Ok(sort.clone()),
            Term::Apply { symbol, args } => {
                let decl = signature.primitive(symbol)?;
                if args.len() != decl.inputs.len() {
                    return Err(CoreError::TypeMismatch(format!(
                        "'{symbol}' takes {} arguments, got {}",
                        decl.inputs.len(),
                        args.len()
                    )));
                }
                let mut lifted = false;
                for (arg, expected) in args.iter().zip(&decl.inputs) {
                    let got = arg.output_sort(signature)?;
                    if &got == expected {
                        continue;
                    }
                    // Lifting: set<s> flows into an input declared s.
                    if let (Sort::Set(inner), Sort::Entity(want)) = (&got, expected) {
                        if inner == want {
                            lifted = true;
                            continue;
                        }
                    }
                    return Err(CoreError::TypeMismatch(format!(
                        "'{symbol}' expects '{expected}', got '{got}'"
                    )));
                }
                let out = decl.output.clone();
                if lifted && decl.kind == SymbolKind::Function {
                    match out {
                        Sort::Entity(s) => Ok(Sort::Set(s)),
                        other => Ok(other),
                    }
                } else {
                    Ok(out)
                }
            }
        }
    }
}
