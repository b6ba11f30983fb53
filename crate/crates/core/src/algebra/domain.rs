//! Domain interpretations: carriers, parameters, relation data, and
//! term evaluation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::value::Value;
use super::{PrimImpl, Signature, Sort, SymbolKind, Term};
use crate::error::CoreError;
use crate::rng::SeedRng;
use crate::Result;

/// Carrier of one sort: a finite entity list or a numeric interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Carrier {
    Finite(Vec<String>),
    Interval { lo: f64, hi: f64 },
}

/// Additive parameter tie: the follower slot's effective value is its
/// declared value plus the leader slots' declared values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamTie {
    pub symbol: String,
    pub slot: usize,
    pub add_from: Vec<(String, usize)>,
}

/// One domain: carriers per sort, parameters per symbol, edge data for
/// relation symbols, and optional parameter ties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainInterpretation {
    pub name: String,
    pub signature: Signature,
    pub carriers: BTreeMap<String, Carrier>,
    pub params: BTreeMap<String, Vec<f64>>,
    /// Edge sets for `RelationImage` symbols, keyed by symbol name:
    /// `(x, y)` means `y` is in the image of `x`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub relations: BTreeMap<String, BTreeSet<(String, String)>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ties: Vec<ParamTie>,
}

/// Cap on exhaustive input enumeration over finite carriers.
const EXHAUSTIVE_CAP: usize = 4096;

impl DomainInterpretation {
    /// Structural validation of the whole interpretation.
    pub fn validate(&self) -> Result<()> {
        self.signature.validate()?;
        for sort in &self.signature.sorts {
            if !self.carriers.contains_key(sort) {
                return Err(CoreError::Validation(format!(
                    "domain '{}' lacks a carrier for sort '{sort}'",
                    self.name
                )));
            }
        }
        for (sort, carrier) in &self.carriers {
            match carrier {
                Carrier::Finite(entities) => {
                    if entities.is_empty() {
                        return Err(CoreError::Validation(format!(
                            "carrier for sort '{sort}' is empty"
                        )));
                    }
                }
                Carrier::Interval { lo, hi } => {
                    if !(lo <= hi) {
                        return Err(CoreError::Validation(format!(
                            "carrier for sort '{sort}' has lo > hi"
                        )));
                    }
                }
            }
        }
        for (name, decl) in &self.signature.primitives {
            let params = self.params.get(name).map_or(0, Vec::len);
            if params != decl.param_count() {
                return Err(CoreError::Validation(format!(
                    "symbol '{name}' has {params} params, needs {}",
                    decl.param_count()
                )));
            }
            if matches!(decl.implementation, PrimImpl::RelationImage)
                && !self.relations.contains_key(name)
            {
                return Err(CoreError::Validation(format!(
                    "relation symbol '{name}' has no edge data"
                )));
            }
        }
        for tie in &self.ties {
            let check = |sym: &str, slot: usize| -> Result<()> {
                let len = self.params.get(sym).map_or(0, Vec::len);
                if slot >= len {
                    return Err(CoreError::Validation(format!(
                        "tie references slot {slot} of '{sym}' which has {len} params"
                    )));
                }
                Ok(())
            };
            check(&tie.symbol, tie.slot)?;
            for (leader, slot) in &tie.add_from {
                check(leader, *slot)?;
            }
        }
        Ok(())
    }

    /// Effective parameter vector of a symbol after ties.
    pub fn effective_params(&self, symbol: &str) -> Result<Vec<f64>> {
        let mut params = self
            .params
            .get(symbol)
            .ok_or_else(|| CoreError::Validation(format!("no params for symbol '{symbol}'")))?
            .clone();
        for tie in &self.ties {
            if tie.symbol == symbol {
                for (leader, slot) in &tie.add_from {
                    let v = self
                        .params
                        .get(leader)
                        .and_then(|p| p.get(*slot))
                        .ok_or_else(|| {
                            CoreError::Validation(format!(
                                "tie reads missing slot {slot} of '{leader}'"
                            ))
                        })?;
                    params[tie.slot] += v;
                }
            }
        }
        Ok(params)
    }

    /// Copy with one symbol's declared params replaced.
    pub fn with_params(&self, symbol: &str, params: Vec<f64>) -> Result<DomainInterpretation> {
        let mut domain = self.clone();
        let slot = domain
            .params
            .get_mut(symbol)
            .ok_or_else(|| CoreError::Validation(format!("no params for symbol '{symbol}'")))?;
        if slot.len() != params.len() {
            return Err(CoreError::shape(slot.len(), params.len(), "replacement params"));
        }
        *slot = params;
        Ok(domain)
    }

    fn carrier(&self, sort_name: &str) -> Result<&Carrier> {
        self.carriers
            .get(sort_name)
            .ok_or_else(|| CoreError::Validation(format!("no carrier for sort '{sort_name}'")))
    }

    /// Evaluate a term on inputs indexed by slot. Deterministic terms
    /// ignore `rng`; stochastic primitives require it.
    pub fn evaluate(
        &self,
        term: &Term,
        inputs: &[Value],
        mut rng: Option<&mut SeedRng>,
    ) -> Result<Value> {
        // Sort-check up front so evaluation can assume wiring is sound.
        term.output_sort(&self.signature)?;
        self.eval_node(term, inputs, &mut rng)
    }

    fn eval_node(
        &self,
        term: &Term,
        inputs: &[Value],
        rng: &mut Option<&mut SeedRng>,
    ) -> Result<Value> {
        match term {
            Term::Input { slot, .. } => inputs.get(*slot).cloned().ok_or_else(|| {
                CoreError::Precondition(format!(
                    "term uses slot #{slot} but only {} inputs were given",
                    inputs.len()
                ))
            }),
            Term::Apply { symbol, args } => {
                let mut arg_values = Vec::with_capacity(args.len());
                for arg in args {
                    arg_values.push(self.eval_node(arg, inputs, rng)?);
                }
                self.apply_symbol(symbol, &arg_values, rng)
            }
        }
    }

    fn apply_symbol(
        &self,
        symbol: &str,
        args: &[Value],
        rng: &mut Option<&mut SeedRng>,
    ) -> Result<Value> {
        let decl = self.signature.primitive(symbol)?;
        // Set-lifting: entity-typed inputs receiving sets are expanded
        // over elements; function outputs are unioned, predicate
        // outputs are OR-ed (exists semantics).
        let lift_at = args
            .iter()
            .zip(&decl.inputs)
            .position(|(value, expected)| {
                matches!(expected, Sort::Entity(_)) && matches!(value, Value::EntitySet(_))
            });
        if let Some(pos) = lift_at {
            let Value::EntitySet(elements) = &args[pos] else {
                unreachable!("position found an entity set");
            };
            let mut set_out: BTreeSet<String> = BTreeSet::new();
            let mut bool_out = false;
            let mut any = false;
            for element in elements {
                let mut inner = args.to_vec();
                inner[pos] = Value::Entity(element.clone());
                match self.apply_symbol(symbol, &inner, rng)? {
                    Value::Entity(e) => {
                        set_out.insert(e);
                    }
                    Value::EntitySet(s) => {
                        set_out.extend(s);
                    }
                    Value::Bool(b) => {
                        bool_out |= b;
                    }
                    Value::Real(_) => {
                        return Err(CoreError::TypeMismatch(format!(
                            "cannot lift numeric output of '{symbol}' over an entity set"
                        )))
                    }
                }
                any = true;
            }
            return Ok(match (&decl.output, any) {
                (Sort::Bool, _) => Value::Bool(bool_out),
                // Empty input set: empty output set.
                (_, _) => Value::EntitySet(set_out),
            });
        }

        let params = self.effective_params(symbol)?;
        match &decl.implementation {
            PrimImpl::RelationImage => {
                let Value::Entity(x) = &args[0] else {
                    return Err(CoreError::TypeMismatch(format!(
                        "'{symbol}' expects an entity, got {}",
                        args[0].kind_name()
                    )));
                };
                let edges = self.relations.get(symbol).ok_or_else(|| {
                    CoreError::Validation(format!("relation symbol '{symbol}' has no edge data"))
                })?;
                let image: BTreeSet<String> = edges
                    .iter()
                    .filter(|(from, _)| from == x)
                    .map(|(_, to)| to.clone())
                    .collect();
                Ok(Value::EntitySet(image))
            }
            PrimImpl::Contains => {
                let Value::EntitySet(set) = &args[0] else {
                    return Err(CoreError::TypeMismatch(format!(
                        "'{symbol}' expects an entity set, got {}",
                        args[0].kind_name()
                    )));
                };
                let Value::Entity(e) = &args[1] else {
                    return Err(CoreError::TypeMismatch(format!(
                        "'{symbol}' expects an entity, got {}",
                        args[1].kind_name()
                    )));
                };
                Ok(Value::Bool(set.contains(e)))
            }
            implementation => {
                let numeric: Vec<f64> = args
                    .iter()
                    .map(Value::as_real)
                    .collect::<Result<_>>()?;
                let v = implementation.eval_numeric(&numeric, &params, rng.as_deref_mut())?;
                Ok(match decl.output {
                    Sort::Bool => Value::Bool(v > 0.5),
                    _ => Value::Real(v),
                })
            }
        }
    }

    /// Inputs for a slot-sort layout: the exhaustive grid when every
    /// slot is finite and the grid is small, otherwise `n` seeded draws.
    pub fn sample_inputs(
        &self,
        slot_sorts: &BTreeMap<usize, Sort>,
        n: usize,
        seed: u64,
    ) -> Result<Vec<Vec<Value>>> {
        let arity = slot_sorts.keys().next_back().map_or(0, |k| k + 1);
        let mut finite_sizes = Vec::new();
        let mut all_finite = true;
        for slot in 0..arity {
            match slot_sorts.get(&slot) {
                Some(Sort::Entity(s)) => match self.carrier(s)? {
                    Carrier::Finite(entities) => finite_sizes.push(entities.len()),
                    Carrier::Interval { .. } => {
                        return Err(CoreError::TypeMismatch(format!(
                            "entity sort '{s}' has a numeric carrier"
                        )))
                    }
                },
                Some(Sort::Numeric(_)) => all_finite = false,
                Some(other) => {
                    return Err(CoreError::TypeMismatch(format!(
                        "cannot sample inputs of sort '{other}'"
                    )))
                }
                // Unused slot: fill with a placeholder zero.
                None => all_finite = false,
            }
        }
        let grid: usize = finite_sizes.iter().product();
        if all_finite && arity > 0 && grid <= EXHAUSTIVE_CAP {
            return self.exhaustive_inputs(slot_sorts, arity);
        }
        let mut rng = SeedRng::new(seed).split(0x1au64 << 8 | 0x9e);
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let mut row = Vec::with_capacity(arity);
            for slot in 0..arity {
                row.push(match slot_sorts.get(&slot) {
                    Some(Sort::Entity(s)) => match self.carrier(s)? {
                        Carrier::Finite(entities) => {
                            Value::Entity(entities[rng.index(entities.len())].clone())
                        }
                        Carrier::Interval { .. } => unreachable!("checked above"),
                    },
                    Some(Sort::Numeric(s)) => match self.carrier(s)? {
                        Carrier::Interval { lo, hi } => Value::Real(rng.uniform_in(*lo, *hi)),
                        Carrier::Finite(_) => {
                            return Err(CoreError::TypeMismatch(format!(
                                "numeric sort '{s}' has a finite carrier"
                            )))
                        }
                    },
                    _ => Value::Real(0.0),
                });
            }
            out.push(row);
        }
        Ok(out)
    }

    fn exhaustive_inputs(
        &self,
        slot_sorts: &BTreeMap<usize, Sort>,
        arity: usize,
    ) -> Result<Vec<Vec<Value>>> {
        let mut pools: Vec<Vec<String>> = Vec::with_capacity(arity);
        for slot in 0..arity {
            let Some(Sort::Entity(s)) = slot_sorts.get(&slot) else {
                return Err(CoreError::TypeMismatch("exhaustive grid needs entity slots".into()));
            };
            let Carrier::Finite(entities) = self.carrier(s)? else {
                return Err(CoreError::TypeMismatch("exhaustive grid needs finite carriers".into()));
            };
            pools.push(entities.clone());
        }
        let total: usize = pools.iter().map(Vec::len).product();
        let mut out = Vec::with_capacity(total);
        let mut index = alloc::vec![0usize; arity];
        loop {
            out.push(
                pools
                    .iter()
                    .zip(&index)
                    .map(|(pool, &i)| Value::Entity(pool[i].clone()))
                    .collect(),
            );
            let mut axis = arity;
            loop {
                if axis == 0 {
                    return Ok(out);
                }
                axis -= 1;
                index[axis] += 1;
                if index[axis] < pools[axis].len() {
                    break;
                }
                index[axis] = 0;
            }
        }
    }
}

/// True when any symbol used by the term has a stochastic
/// implementation in this signature.
pub(crate) fn term_is_stochastic(term: &Term, signature: &Signature) -> bool {
    term.symbols().iter().any(|s| {
        signature
            .primitives
            .get(s)
            .is_some_and(|d| d.implementation.is_stochastic())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::testsig::{family_domain, money_domain, shopping_term};

    #[test]
    fn grandparent_on_family_graph() {
        let domain = family_domain(&[("a", "b"), ("b", "c")]);
        let person = Sort::Entity("person".into());
        let grand = Term::apply(
            "contains",
            alloc::vec![
                Term::apply(
                    "parent",
                    alloc::vec![Term::apply("parent", alloc::vec![Term::input(0, person.clone())])],
                ),
                Term::input(1, person),
            ],
        );
        let yes = domain
            .evaluate(
                &grand,
                &[Value::Entity("a".into()), Value::Entity("c".into())],
                None,
            )
            .unwrap();
        assert_eq!(yes, Value::Bool(true));
        let no = domain
            .evaluate(
                &grand,
                &[Value::Entity("a".into()), Value::Entity("b".into())],
                None,
            )
            .unwrap();
        assert_eq!(no, Value::Bool(false));
    }

    #[test]
    fn shopping_total_is_41() {
        let domain = money_domain("dollars", 1.0);
        let term = shopping_term();
        let out = domain
            .evaluate(
                &term,
                &[
                    Value::Real(15.0),
                    Value::Real(3.0),
                    Value::Real(0.2),
                    Value::Real(5.0),
                ],
                None,
            )
            .unwrap();
        assert_eq!(out, Value::Real(41.0));
    }

    #[test]
    fn identity_term_returns_its_input() {
        let domain = money_domain("dollars", 1.0);
        let term = Term::input(0, Sort::Numeric("money".into()));
        let out = domain.evaluate(&term, &[Value::Real(7.5)], None).unwrap();
        assert_eq!(out, Value::Real(7.5));
    }

    #[test]
    fn sort_mismatch_surfaces_as_type_error() {
        let domain = money_domain("dollars", 1.0);
        let term = Term::apply(
            "add",
            alloc::vec![
                Term::input(0, Sort::Numeric("money".into())),
                Term::input(1, Sort::Numeric("scalar".into())),
            ],
        );
        let err = domain.evaluate(&term, &[Value::Real(1.0), Value::Real(2.0)], None);
        assert!(matches!(err, Err(CoreError::TypeMismatch(_))));
    }

    #[test]
    fn exhaustive_inputs_cover_the_grid() {
        let domain = family_domain(&[("a", "b")]);
        let person = Sort::Entity("person".into());
        let sorts: BTreeMap<usize, Sort> = [(0, person.clone()), (1, person)].into_iter().collect();
        let inputs = domain.sample_inputs(&sorts, 10, 1).unwrap();
        // Three named entities -> 9 ordered pairs, deterministic order.
        assert_eq!(inputs.len(), 9);
        assert_eq!(
            inputs[0],
            alloc::vec![Value::Entity("a".into()), Value::Entity("a".into())]
        );
    }

    #[test]
    fn effective_params_apply_ties() {
        let mut domain = money_domain("dollars", 1.0);
        domain.ties.push(ParamTie {
            symbol: "multiply".into(),
            slot: 0,
            add_from: alloc::vec![("discount".into(), 0)],
        });
        // multiply's gain becomes 1 + 1 = 2.
        assert_eq!(domain.effective_params("multiply").unwrap(), alloc::vec![2.0]);
    }
}
